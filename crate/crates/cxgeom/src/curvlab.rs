//! Riemannian curvature on coordinate charts, Gibbons–Hawking metrics and their
//! hyperkähler checks, and the linearized complex Monge–Ampère equation.
//!
//! Index layout: `Γ^λ_{μν}` at `(λ·n + μ)·n + ν`, `R^λ_{ρμν}` at
//! `((λ·n + ρ)·n + μ)·n + ν`, with
//! `R^λ_{ρμν} = ∂_μΓ^λ_{ρν} − ∂_νΓ^λ_{ρμ} + Γ^λ_{μσ}Γ^σ_{νρ} − Γ^λ_{νσ}Γ^σ_{μρ}`
//! and `R_{ρν} = R^λ_{ρλν}`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::tensor::grid::{form_max_norm, interior_max};
use crate::tensor::{exterior_derivative, Coeff, DScheme, ExteriorForm, GridField, GridSpec, Jet, JetSpace, RMat};

pub type MetricClosure = Arc<dyn Fn(&[Jet<f64>]) -> Jet<RMat> + Send + Sync>;

#[derive(Clone)]
pub struct MetricChart {
    pub n: usize,
    pub metric: MetricClosure,
    /// Step for the central differences of Γ.
    pub fd_step: f64,
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart").field("n", &self.n).field("fd_step", &self.fd_step).finish()
    }
}

impl MetricChart {
    pub fn new(n: usize, metric: MetricClosure) -> Self {
        MetricChart { n, metric, fd_step: 1e-4 }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet<RMat>> {
        if x.len() != self.n {
            return Err(GeomError::Dimension(format!("point of dim {} on a {}-dim chart", x.len(), self.n)));
        }
        let space = JetSpace::new(self.n, order);
        let g = (self.metric)(&Jet::vars(&space, x));
        let g0 = g.value();
        if g0.nrows() != self.n || g0.ncols() != self.n {
            return Err(GeomError::Dimension("metric closure returned a wrong-size matrix".into()));
        }
        if g0.determinant().abs() <= 1e-12 {
            return Err(GeomError::Singular(0));
        }
        Ok(g)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<RMat> {
        Ok(self.jet(x, 0)?.value().clone())
    }
}

/// Christoffel symbols as jets of one order below the metric jet.
pub(crate) fn christoffel_jets(g: &Jet<RMat>, n: usize) -> Result<Vec<Jet<f64>>> {
    let ginv = g.inverse().ok_or(GeomError::Singular(0))?;
    let dg: Vec<Jet<RMat>> = (0..n).map(|r| g.partial(r)).collect();
    let valid = g.valid - 1;
    let ginv = ginv.truncate(valid);
    let mut out = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for m in 0..n {
            for nu in 0..n {
                let mut acc = Jet::constant(&g.space, 0.0).truncate(valid);
                for r in 0..n {
                    let lower = dg[m].entry(nu, r).add(&dg[nu].entry(m, r)).sub(&dg[r].entry(m, nu));
                    acc = acc.add(&ginv.entry(l, r).mul(&lower));
                }
                out.push(acc.scale(0.5));
            }
        }
    }
    Ok(out)
}

pub fn christoffel(chart: &MetricChart, x: &[f64]) -> Result<Vec<f64>> {
    let g = chart.jet(x, 1)?;
    Ok(christoffel_jets(&g, chart.n)?.iter().map(|j| *j.value()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePoint {
    pub n: usize,
    pub metric: RMat,
    pub gamma: Vec<f64>,
    pub riemann: Vec<f64>,
    pub ricci: RMat,
    pub scalar: f64,
    pub einstein: RMat,
}

impl CurvaturePoint {
    pub fn gamma(&self, l: usize, m: usize, nu: usize) -> f64 {
        self.gamma[(l * self.n + m) * self.n + nu]
    }

    pub fn riemann(&self, l: usize, r: usize, m: usize, nu: usize) -> f64 {
        self.riemann[((l * self.n + r) * self.n + m) * self.n + nu]
    }

    /// `R_{λρμν} = g_{λσ} R^σ_{ρμν}`.
    pub fn riemann_lowered(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n * n * n];
        for l in 0..n {
            for r in 0..n {
                for m in 0..n {
                    for nu in 0..n {
                        out[((l * n + r) * n + m) * n + nu] =
                            (0..n).map(|s| self.metric[(l, s)] * self.riemann(s, r, m, nu)).sum();
                    }
                }
            }
        }
        out
    }

    /// Max of `|Γ^λ_{μν} − Γ^λ_{νμ}|`.
    pub fn gamma_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut w: f64 = 0.0;
        for l in 0..n {
            for m in 0..n {
                for nu in 0..n {
                    w = w.max((self.gamma(l, m, nu) - self.gamma(l, nu, m)).abs());
                }
            }
        }
        w
    }

    /// Max of `|R^λ_{ρμν} + R^λ_{μνρ} + R^λ_{νρμ}|`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut w: f64 = 0.0;
        for l in 0..n {
            for r in 0..n {
                for m in 0..n {
                    for nu in 0..n {
                        let s = self.riemann(l, r, m, nu) + self.riemann(l, m, nu, r) + self.riemann(l, nu, r, m);
                        w = w.max(s.abs());
                    }
                }
            }
        }
        w
    }

    /// Max of `|R_{λρμν} − R_{μνλρ}|`.
    pub fn pair_symmetry_defect(&self) -> f64 {
        let n = self.n;
        let low = self.riemann_lowered();
        let at = |a: usize, b: usize, c: usize, d: usize| low[((a * n + b) * n + c) * n + d];
        let mut w: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        w = w.max((at(a, b, c, d) - at(c, d, a, b)).abs());
                    }
                }
            }
        }
        w
    }

    pub fn ricci_asymmetry(&self) -> f64 {
        crate::linalg::max_abs_r(&(&self.ricci - self.ricci.transpose()))
    }

    pub fn riemann_norm(&self) -> f64 {
        self.riemann.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn assemble(n: usize, metric: RMat, gamma: Vec<f64>, dgamma: &[Vec<f64>]) -> Result<CurvaturePoint> {
    let gi = |l: usize, m: usize, nu: usize| gamma[(l * n + m) * n + nu];
    let dg = |d: usize, l: usize, m: usize, nu: usize| dgamma[d][(l * n + m) * n + nu];
    let mut riemann = vec![0.0; n * n * n * n];
    for l in 0..n {
        for r in 0..n {
            for m in 0..n {
                for nu in 0..n {
                    let mut v = dg(m, l, r, nu) - dg(nu, l, r, m);
                    for s in 0..n {
                        v += gi(l, m, s) * gi(s, nu, r) - gi(l, nu, s) * gi(s, m, r);
                    }
                    riemann[((l * n + r) * n + m) * n + nu] = v;
                }
            }
        }
    }
    let ricci = RMat::from_fn(n, n, |r, nu| (0..n).map(|l| riemann[((l * n + r) * n + l) * n + nu]).sum());
    let ginv = metric.clone().try_inverse().ok_or(GeomError::Singular(0))?;
    let scalar = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| ginv[(a, b)] * ricci[(a, b)]).sum();
    let einstein = &ricci - &metric * (0.5 * scalar);
    Ok(CurvaturePoint { n, metric, gamma, riemann, ricci, scalar, einstein })
}

/// Curvature from analytic Γ with central differences of step `chart.fd_step`.
pub fn curvature(chart: &MetricChart, x: &[f64]) -> Result<CurvaturePoint> {
    let n = chart.n;
    let h = chart.fd_step;
    let metric = chart.metric_at(x)?;
    let gamma = christoffel(chart, x)?;
    let dgamma = (0..n)
        .map(|d| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[d] += h;
            xm[d] -= h;
            let gp = christoffel(chart, &xp)?;
            let gm = christoffel(chart, &xm)?;
            Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    assemble(n, metric, gamma, &dgamma)
}

/// Curvature from an order-2 metric jet, with no differencing.
pub fn curvature_exact(chart: &MetricChart, x: &[f64]) -> Result<CurvaturePoint> {
    let n = chart.n;
    let g = chart.jet(x, 2)?;
    let gj = christoffel_jets(&g, n)?;
    let gamma: Vec<f64> = gj.iter().map(|j| *j.value()).collect();
    let dgamma: Vec<Vec<f64>> = (0..n).map(|d| gj.iter().map(|j| j.partial_value(&[d])).collect()).collect();
    assemble(n, g.value().clone(), gamma, &dgamma)
}

/// `∇^μ G_{μν}` with `∂G` by central differences of step `h` on exact curvature.
pub fn einstein_divergence(chart: &MetricChart, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = chart.n;
    let here = curvature_exact(chart, x)?;
    let ginv = here.metric.clone().try_inverse().ok_or(GeomError::Singular(0))?;
    let dg: Vec<RMat> = (0..n)
        .map(|a| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[a] += h;
            xm[a] -= h;
            Ok((curvature_exact(chart, &xp)?.einstein - curvature_exact(chart, &xm)?.einstein) / (2.0 * h))
        })
        .collect::<Result<_>>()?;
    let g = &here.einstein;
    Ok((0..n)
        .map(|nu| {
            let mut s = 0.0;
            for mu in 0..n {
                for a in 0..n {
                    let mut cov = dg[a][(mu, nu)];
                    for l in 0..n {
                        cov -= here.gamma(l, a, mu) * g[(l, nu)] + here.gamma(l, a, nu) * g[(mu, l)];
                    }
                    s += ginv[(mu, a)] * cov;
                }
            }
            s
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Fixture charts

pub fn flat_chart(n: usize) -> MetricChart {
    MetricChart::new(
        n,
        Arc::new(move |x: &[Jet<f64>]| Jet::constant(&x[0].space, RMat::identity(n, n))),
    )
}

/// Round 2-sphere of radius `r` in `(θ, φ)`.
pub fn round_s2(r: f64) -> MetricChart {
    MetricChart::new(
        2,
        Arc::new(move |x: &[Jet<f64>]| {
            let s = x[0].sin();
            let zero = x[0].cst(0.0);
            let a = x[0].cst(r * r);
            let b = s.mul(&s).scale(r * r);
            Jet::<RMat>::from_entries(2, 2, &[a, zero.clone(), zero, b])
        }),
    )
}

/// Stereographic round `Sⁿ` of radius 1: `g = 4/(1+|x|²)² δ`.
pub fn round_sphere(n: usize) -> MetricChart {
    MetricChart::new(
        n,
        Arc::new(move |x: &[Jet<f64>]| {
            let r2 = x.iter().fold(x[0].cst(1.0), |a, xi| a.add(&xi.mul(xi)));
            let f = r2.mul(&r2).recip().scale(4.0);
            let zero = x[0].cst(0.0);
            let e: Vec<Jet<f64>> =
                (0..n * n).map(|k| if k / n == k % n { f.clone() } else { zero.clone() }).collect();
            Jet::<RMat>::from_entries(n, n, &e)
        }),
    )
}

/// A smooth non-vacuum metric: `δ + 0.2·(sin, products) bumps`.
pub fn wavy_chart(n: usize) -> MetricChart {
    MetricChart::new(
        n,
        Arc::new(move |x: &[Jet<f64>]| {
            let mut e = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let mut v = x[0].cst(if a == b { 1.0 } else { 0.0 });
                    let (lo, hi) = (a.min(b), a.max(b));
                    let i = (lo + hi) % n;
                    let j = (lo + 2 * hi + 1) % n;
                    v = v.add(&x[i].sin().mul(&x[j].cos()).scale(0.2 / (1.0 + (a + b) as f64)));
                    if a == b {
                        v = v.add(&x[(a + 1) % n].mul(&x[(a + 1) % n]).scale(0.1));
                    }
                    e.push(v);
                }
            }
            Jet::<RMat>::from_entries(n, n, &e)
        }),
    )
}

// ---------------------------------------------------------------------------
// Gibbons–Hawking

fn default_exclusion() -> f64 {
    0.1
}

fn default_tube() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbonsHawkingData {
    pub epsilon: f64,
    pub centers: Vec<[f64; 3]>,
    pub masses: Vec<f64>,
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
    #[serde(default = "default_tube")]
    pub string_tube: f64,
    /// Negates one spatial component of A⃗; negative controls only.
    #[serde(default)]
    pub flip: Option<usize>,
}

impl GibbonsHawkingData {
    pub fn new(epsilon: f64, centers: Vec<[f64; 3]>, masses: Vec<f64>) -> Result<Self> {
        let d = GibbonsHawkingData { epsilon, centers, masses, exclusion: 0.1, string_tube: 0.05, flip: None };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.len() != self.masses.len() {
            return Err(GeomError::InvalidInput(format!(
                "{} centers but {} masses",
                self.centers.len(),
                self.masses.len()
            )));
        }
        if self.masses.iter().any(|&m| !(m > 0.0)) {
            return Err(GeomError::InvalidInput("masses must be positive".into()));
        }
        if self.epsilon < 0.0 {
            return Err(GeomError::InvalidInput("ε must be non-negative".into()));
        }
        Ok(())
    }

    /// Rejects points near a center or inside a Dirac-string tube.
    pub fn check_point(&self, p: &[f64; 3]) -> Result<()> {
        for c in &self.centers {
            let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if r < self.exclusion {
                return Err(GeomError::Precondition(format!("point {p:?} within {} of center {c:?}", self.exclusion)));
            }
            if d[2] < 0.0 && (d[0] * d[0] + d[1] * d[1]).sqrt() < self.string_tube {
                return Err(GeomError::Precondition(format!("point {p:?} inside the string tube below {c:?}")));
            }
        }
        if self.centers.is_empty() && self.epsilon == 0.0 {
            return Err(GeomError::Precondition("A₀ vanishes identically".into()));
        }
        Ok(())
    }

    /// `(A₀, A₁, A₂, A₃)` as jets in the spatial coordinates `x[1..4]`.
    pub fn potentials(&self, x: &[Jet<f64>]) -> [Jet<f64>; 4] {
        let mut a0 = x[0].cst(self.epsilon);
        let mut a1 = x[0].cst(0.0);
        let mut a2 = x[0].cst(0.0);
        for (c, &m) in self.centers.iter().zip(&self.masses) {
            let dx = x[1].add_f(-c[0]);
            let dy = x[2].add_f(-c[1]);
            let dz = x[3].add_f(-c[2]);
            let r = dx.mul(&dx).add(&dy.mul(&dy)).add(&dz.mul(&dz)).sqrt();
            a0 = a0.add(&r.recip().scale(m));
            // monopole with the string along −e₃ and curl A⃗ = ∇A₀
            let w = r.mul(&r.add(&dz)).recip().scale(m);
            a1 = a1.add(&dy.mul(&w));
            a2 = a2.sub(&dx.mul(&w));
        }
        let mut a = [a0, a1, a2, x[0].cst(0.0)];
        if let Some(k) = self.flip {
            if (1..=3).contains(&k) {
                a[k] = a[k].neg();
            }
        }
        a
    }

    pub fn potential_values(&self, p: &[f64; 3]) -> [f64; 4] {
        let space = JetSpace::new(4, 0);
        let x = Jet::vars(&space, &[0.0, p[0], p[1], p[2]]);
        let a = self.potentials(&x);
        [*a[0].value(), *a[1].value(), *a[2].value(), *a[3].value()]
    }

    /// `(max |∇A₀ − curl A⃗|, |ΔA₀|)` at a point, from exact jets.
    pub fn monopole_residuals(&self, p: &[f64; 3]) -> Result<(f64, f64)> {
        self.check_point(p)?;
        let space = JetSpace::new(4, 2);
        let x = Jet::vars(&space, &[0.0, p[0], p[1], p[2]]);
        let a = self.potentials(&x);
        let d = |f: &Jet<f64>, k: usize| f.partial_value(&[k]);
        let mut curl: f64 = 0.0;
        for k in 1..=3 {
            let l = k % 3 + 1;
            let m = l % 3 + 1;
            curl = curl.max((d(&a[0], k) - (d(&a[m], l) - d(&a[l], m))).abs());
        }
        let lap: f64 = (1..=3).map(|k| a[0].partial_value(&[k, k])).sum();
        Ok((curl, lap.abs()))
    }
}

/// `ds² = (dx⁰ + A_n dxⁿ)²/A₀ + A₀ Σ (dx^k)²`.
pub fn gibbons_hawking_chart(data: &GibbonsHawkingData) -> Result<MetricChart> {
    data.validate()?;
    let d = data.clone();
    Ok(MetricChart::new(
        4,
        Arc::new(move |x: &[Jet<f64>]| {
            let a = d.potentials(x);
            let inv = a[0].recip();
            let one = x[0].cst(1.0);
            let b = [one, a[1].clone(), a[2].clone(), a[3].clone()];
            let mut e = Vec::with_capacity(16);
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = b[i].mul(&b[j]).mul(&inv);
                    if i == j && i > 0 {
                        v = v.add(&a[0]);
                    }
                    e.push(v);
                }
            }
            Jet::<RMat>::from_entries(4, 4, &e)
        }),
    ))
}

/// `j_k = θ⁰∧θ^k − θ^ℓ∧θ^m` at a point, `(k, ℓ, m)` cyclic.
pub fn asd_triplet(data: &GibbonsHawkingData, p: &[f64; 3]) -> [ExteriorForm<f64>; 3] {
    let [a0, a1, a2, a3] = data.potential_values(p);
    let s = a0.sqrt();
    let dx = |i: usize| ExteriorForm::dx(4, i);
    let theta0 = dx(0).add(&dx(1).scale(a1)).add(&dx(2).scale(a2)).add(&dx(3).scale(a3)).scale(1.0 / s);
    let theta = |k: usize| dx(k).scale(s);
    [1usize, 2, 3].map(|k| {
        let l = k % 3 + 1;
        let m = l % 3 + 1;
        theta0.wedge(&theta(k)).sub(&theta(l).wedge(&theta(m)))
    })
}

/// Interior max `‖dj_k‖` over a cube of half-width `half` with `count` nodes per
/// spatial axis (and three along x⁰).
pub fn asd_triplet_closure(data: &GibbonsHawkingData, centre: [f64; 3], half: f64, count: usize) -> Result<[f64; 3]> {
    data.validate()?;
    let h = 2.0 * half / (count - 1) as f64;
    let spec = GridSpec::new(
        vec![-h, centre[0] - half, centre[1] - half, centre[2] - half],
        vec![h, centre[0] + half, centre[1] + half, centre[2] + half],
        vec![3, count, count, count],
    )?;
    for k in 0..spec.len() {
        let x = spec.point(k);
        data.check_point(&[x[1], x[2], x[3]])?;
    }
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let field = GridField::sample(spec.clone(), |x| asd_triplet(data, &[x[1], x[2], x[3]])[k].to_complex());
        let d = exterior_derivative(&field, &DScheme::Central)?;
        *slot = interior_max(&d, 1, form_max_norm);
    }
    Ok(out)
}

fn levi_civita4(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    crate::tensor::basis::permutation_sign(&idx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfDualityReport {
    pub self_dual: f64,
    pub anti_self_dual: f64,
    pub ricci: f64,
    pub riemann: f64,
}

/// Splits `R_{abcd}` in an orthonormal frame under `*` on the `(c, d)` pair.
/// The frame is Gram–Schmidt of `∂₀, …, ∂₃`; `orientation` flips `ε`.
pub fn riemann_selfduality(chart: &MetricChart, x: &[f64], orientation: f64) -> Result<SelfDualityReport> {
    if chart.n != 4 {
        return Err(GeomError::Dimension(format!("self-duality needs dim 4, got {}", chart.n)));
    }
    let cp = curvature(chart, x)?;
    let g = &cp.metric;
    if g.clone().symmetric_eigen().eigenvalues.min() <= 0.0 {
        return Err(GeomError::Precondition("metric is not Riemannian".into()));
    }
    let frame = gram_schmidt(g);
    let low = cp.riemann_lowered();
    let n = 4;
    let mut rf = vec![0.0; 256];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut v = 0.0;
                    for l in 0..n {
                        for r in 0..n {
                            for m in 0..n {
                                for nu in 0..n {
                                    v += low[((l * n + r) * n + m) * n + nu]
                                        * frame[(l, a)]
                                        * frame[(r, b)]
                                        * frame[(m, c)]
                                        * frame[(nu, d)];
                                }
                            }
                        }
                    }
                    rf[((a * 4 + b) * 4 + c) * 4 + d] = v;
                }
            }
        }
    }
    let o = orientation.signum();
    let (mut sd, mut asd, mut tot) = (0.0, 0.0, 0.0);
    for a in 0..4 {
        for b in (a + 1)..4 {
            for c in 0..4 {
                for d in (c + 1)..4 {
                    let r = rf[((a * 4 + b) * 4 + c) * 4 + d];
                    let mut star = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            star += 0.5 * o * levi_civita4(c, d, e, f) * rf[((a * 4 + b) * 4 + e) * 4 + f];
                        }
                    }
                    sd += (0.5 * (r + star)).powi(2);
                    asd += (0.5 * (r - star)).powi(2);
                    tot += r * r;
                }
            }
        }
    }
    let ricci = cp.ricci.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(SelfDualityReport { self_dual: sd.sqrt(), anti_self_dual: asd.sqrt(), ricci, riemann: tot.sqrt() })
}

/// Columns `E_a` with `Eᵗ g E = 1`, Gram–Schmidt in coordinate order.
pub fn gram_schmidt(g: &RMat) -> RMat {
    let n = g.nrows();
    let mut e = RMat::zeros(n, n);
    for a in 0..n {
        let mut v = nalgebra::DVector::<f64>::zeros(n);
        v[a] = 1.0;
        for b in 0..a {
            let u = e.column(b).into_owned();
            let p = (u.transpose() * g * &v)[(0, 0)];
            v -= u * p;
        }
        let nv = (v.transpose() * g * &v)[(0, 0)].sqrt();
        e.set_column(a, &(v / nv));
    }
    e
}

// ---------------------------------------------------------------------------
// Monge–Ampère

pub type PotentialClosure = Arc<dyn Fn(&[Jet<f64>]) -> Jet<f64> + Send + Sync>;

/// `∂_{z_a}∂_{z̄_b}F` for `F(x₁, y₁, x₂, y₂)`.
pub fn complex_hessian(f: &PotentialClosure, x: &[f64]) -> crate::tensor::CMat {
    let space = JetSpace::new(4, 2);
    let v = f(&Jet::vars(&space, x));
    let d2 = |i: usize, j: usize| v.partial_value(&[i, j]);
    crate::tensor::CMat::from_fn(2, 2, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        Complex64::new(d2(xa, xb) + d2(ya, yb), d2(xa, yb) - d2(ya, xb)) * 0.25
    })
}

pub fn flat_potential() -> PotentialClosure {
    Arc::new(|x: &[Jet<f64>]| x.iter().fold(x[0].cst(0.0), |a, xi| a.add(&xi.mul(xi))))
}

/// `(sup|det ∂∂̄F − 1|, sup|det ∂∂̄(F₀ + εφ) − 1|/ε)` over the nodes of `spec`.
pub fn monge_ampere_residual(
    f: &PotentialClosure,
    eps: f64,
    phi: &PotentialClosure,
    spec: &GridSpec,
) -> Result<(f64, f64)> {
    if spec.dim() != 4 {
        return Err(GeomError::Dimension("Monge–Ampère box must be 4-dimensional".into()));
    }
    let f0 = flat_potential();
    let phi = phi.clone();
    let perturbed: PotentialClosure = Arc::new(move |x: &[Jet<f64>]| f0(x).add(&phi(x).scale(eps)));
    let vals: Vec<Result<(f64, f64)>> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let x = spec.point(k);
            let h = complex_hessian(f, &x);
            let eig = h.clone().symmetric_eigen();
            if eig.eigenvalues.min() <= 0.0 {
                return Err(GeomError::Precondition(format!("∂∂̄F not positive at {x:?}")));
            }
            let r0 = (h.determinant() - 1.0).norm();
            let r1 = (complex_hessian(&perturbed, &x).determinant() - 1.0).norm() / eps;
            Ok((r0, r1))
        })
        .collect();
    let mut out = (0.0f64, 0.0f64);
    for v in vals {
        let (a, b) = v?;
        out = (out.0.max(a), out.1.max(b));
    }
    Ok(out)
}

/// `Re(z₁z₂) = x₁x₂ − y₁y₂`.
pub fn pluriharmonic_perturbation() -> PotentialClosure {
    Arc::new(|x: &[Jet<f64>]| x[0].mul(&x[2]).sub(&x[1].mul(&x[3])))
}

/// `|z₁|⁴`.
pub fn quartic_perturbation() -> PotentialClosure {
    Arc::new(|x: &[Jet<f64>]| {
        let r = x[0].mul(&x[0]).add(&x[1].mul(&x[1]));
        r.mul(&r)
    })
}

/// Two centres on the x³ axis with unequal masses, ε = 1.
pub fn two_center_fixture() -> GibbonsHawkingData {
    GibbonsHawkingData::new(1.0, vec![[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]], vec![1.0, 0.7]).expect("valid fixture")
}

/// Probe points away from the centres and their Dirac strings.
pub const GH_PROBES: [[f64; 4]; 4] =
    [[0.0, 0.6, 0.3, 0.2], [0.3, -0.4, 0.7, 0.9], [1.0, 0.5, -0.5, -0.1], [-0.2, 0.9, 0.1, -1.2]];
