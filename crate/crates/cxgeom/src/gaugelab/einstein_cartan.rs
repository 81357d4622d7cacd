//! Einstein–Cartan conservation forms pulled back along a local section of
//! the orthonormal frame bundle. A section is a coframe `θⁱ = e^i_μ dx^μ`
//! plus a metric connection `ω^i_j`; everything else is derived with jets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvlab::{christoffel_jets, MetricChart};
use crate::error::{GeomError, Result};
use crate::tensor::basis::permutation_sign;
use crate::tensor::{Coeff, ExteriorForm, Jet, JetSpace, RMat};

pub type CoframeClosure = Arc<dyn Fn(&[Jet<f64>]) -> Jet<RMat> + Send + Sync>;
/// Returns `W_ν` with `ω^i_j = Σ_ν W_ν[i][j] dx^ν`.
pub type ConnectionClosure = Arc<dyn Fn(&[Jet<f64>]) -> Vec<Jet<RMat>> + Send + Sync>;

type JForm = ExteriorForm<Jet<f64>>;
type Form = ExteriorForm<f64>;

#[derive(Clone)]
pub struct FrameSection {
    pub n: usize,
    pub eta: Vec<f64>,
    /// Rows are frame indices, columns chart indices.
    pub coframe: CoframeClosure,
    /// `None` selects the Levi-Civita connection of `g = eᵗηe`.
    pub connection: Option<ConnectionClosure>,
}

impl std::fmt::Debug for FrameSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameSection")
            .field("n", &self.n)
            .field("eta", &self.eta)
            .field("levi_civita", &self.connection.is_none())
            .finish()
    }
}

/// Structure forms of a section at one point, as jets.
struct Structure {
    n: usize,
    eta: Vec<f64>,
    theta: Vec<JForm>,
    omega: Vec<Vec<JForm>>,
    omega_up: Vec<Vec<JForm>>,
    torsion: Vec<JForm>,
    curv: Vec<Vec<JForm>>,
    curv_up: Vec<Vec<JForm>>,
    /// θ*_I for every ordered tuple of length 1..=4, flattened base n.
    stars: Vec<Vec<JForm>>,
}

impl Structure {
    fn eta_of(&self, i: usize) -> f64 {
        self.eta[i]
    }

    fn star(&self, idx: &[usize]) -> &JForm {
        let k = idx.iter().fold(0, |a, &i| a * self.n + i);
        &self.stars[idx.len()][k]
    }
}

fn zero_form(n: usize, degree: usize, proto: &Jet<f64>) -> JForm {
    ExteriorForm::zero(n, degree, &proto.zero_like())
}

impl FrameSection {
    pub fn new(eta: Vec<f64>, coframe: CoframeClosure, connection: Option<ConnectionClosure>) -> Result<Self> {
        let n = eta.len();
        if !(3..=6).contains(&n) {
            return Err(GeomError::Dimension(format!("frame sections need 3 ≤ n ≤ 6, got {n}")));
        }
        if eta.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(GeomError::InvalidInput("η must be diagonal with entries ±1".into()));
        }
        Ok(FrameSection { n, eta, coframe, connection })
    }

    pub fn levi_civita(eta: Vec<f64>, coframe: CoframeClosure) -> Result<Self> {
        FrameSection::new(eta, coframe, None)
    }

    /// The metric `g = eᵗηe` as a curvlab chart.
    pub fn metric_chart(&self) -> MetricChart {
        let eta = self.eta.clone();
        let co = self.coframe.clone();
        let n = self.n;
        MetricChart::new(
            n,
            Arc::new(move |x: &[Jet<f64>]| {
                let e = co(x);
                Jet::<RMat>::from_entries(n, n, &metric_entries(&e, &eta))
            }),
        )
    }

    /// The section rotated by a constant `r ∈ SO(η)`: `θ' = rθ`, `ω' = rωr⁻¹`.
    pub fn rotated(&self, r: &RMat) -> Result<Self> {
        let n = self.n;
        if r.nrows() != n || r.ncols() != n {
            return Err(GeomError::Dimension(format!("rotation of size {}", r.nrows())));
        }
        let eta = RMat::from_diagonal(&nalgebra::DVector::from_vec(self.eta.clone()));
        if (r.transpose() * &eta * r - &eta).abs().max() > 1e-12 || (r.determinant() - 1.0).abs() > 1e-12 {
            return Err(GeomError::Precondition("r is not in SO(η)".into()));
        }
        let rinv = r.clone().try_inverse().ok_or(GeomError::Singular(0))?;
        let co = self.coframe.clone();
        let rc = r.clone();
        let coframe: CoframeClosure = Arc::new(move |x: &[Jet<f64>]| Jet::constant(&x[0].space, rc.clone()).mul(&co(x)));
        let connection = match &self.connection {
            None => None,
            Some(w) => {
                let w = w.clone();
                let (rc, ri) = (r.clone(), rinv);
                Some(Arc::new(move |x: &[Jet<f64>]| {
                    let (a, b) = (Jet::constant(&x[0].space, rc.clone()), Jet::constant(&x[0].space, ri.clone()));
                    w(x).iter().map(|m| a.mul(m).mul(&b)).collect()
                }) as ConnectionClosure)
            }
        };
        FrameSection::new(self.eta.clone(), coframe, connection)
    }

    fn structure(&self, x: &[f64], order: usize) -> Result<Structure> {
        let n = self.n;
        if x.len() != n {
            return Err(GeomError::Dimension(format!("point of dim {} for a rank-{n} frame", x.len())));
        }
        let vars = Jet::vars(&JetSpace::new(n, order), x);
        let e = (self.coframe)(&vars);
        if e.value().nrows() != n || e.value().ncols() != n {
            return Err(GeomError::Dimension("coframe closure returned a wrong-size matrix".into()));
        }
        if e.value().determinant().abs() < 1e-12 {
            return Err(GeomError::Singular(0));
        }
        let w: Vec<Jet<RMat>> = match &self.connection {
            Some(c) => {
                let w = c(&vars);
                if w.len() != n {
                    return Err(GeomError::Dimension(format!("{} connection components", w.len())));
                }
                for (nu, wn) in w.iter().enumerate() {
                    let low = RMat::from_fn(n, n, |i, j| self.eta[i] * wn.value()[(i, j)]);
                    let skew = (&low + low.transpose()).abs().max();
                    if skew > 1e-12 * (1.0 + low.abs().max()) {
                        return Err(GeomError::Precondition(format!("ω_ij not antisymmetric in component {nu} ({skew:.3e})")));
                    }
                }
                w
            }
            None => levi_civita_components(&e, &self.eta)?,
        };
        let proto = e.entry(0, 0);
        let theta: Vec<JForm> =
            (0..n).map(|i| ExteriorForm { n, degree: 1, coeffs: (0..n).map(|mu| e.entry(i, mu)).collect() }).collect();
        let omega: Vec<Vec<JForm>> = (0..n)
            .map(|i| {
                (0..n).map(|j| ExteriorForm { n, degree: 1, coeffs: (0..n).map(|nu| w[nu].entry(i, j)).collect() }).collect()
            })
            .collect();
        let raise = |f: &Vec<Vec<JForm>>| -> Vec<Vec<JForm>> {
            (0..n).map(|i| (0..n).map(|j| f[i][j].scale(self.eta[j])).collect()).collect()
        };
        let omega_up = raise(&omega);
        let mut torsion = Vec::with_capacity(n);
        for i in 0..n {
            let mut t = theta[i].d()?;
            for j in 0..n {
                t = t.add(&omega[i][j].wedge(&theta[j]));
            }
            torsion.push(t);
        }
        let mut curv = vec![Vec::with_capacity(n); n];
        for i in 0..n {
            for j in 0..n {
                let mut c = omega[i][j].d()?;
                for k in 0..n {
                    c = c.add(&omega[i][k].wedge(&omega[k][j]));
                }
                curv[i].push(c);
            }
        }
        let curv_up = raise(&curv);
        let mut stars = vec![Vec::new()];
        for q in 1..=4.min(n) {
            let mut level = Vec::with_capacity(n.pow(q as u32));
            for k in 0..n.pow(q as u32) {
                let idx: Vec<usize> = (0..q).rev().map(|p| (k / n.pow(p as u32)) % n).collect();
                level.push(theta_star(&theta, &idx, &proto));
            }
            stars.push(level);
        }
        Ok(Structure { n, eta: self.eta.clone(), theta, omega, omega_up, torsion, curv, curv_up, stars })
    }
}

fn metric_entries(e: &Jet<RMat>, eta: &[f64]) -> Vec<Jet<f64>> {
    let n = eta.len();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = e.entry(0, a).mul(&e.entry(0, b)).scale(eta[0]);
            for i in 1..n {
                acc = acc.add(&e.entry(i, a).mul(&e.entry(i, b)).scale(eta[i]));
            }
            out.push(acc);
        }
    }
    out
}

/// `ω^i_j(∂_ν) = e^i_λ (∂_ν E^λ_j + Γ^λ_{νμ} E^μ_j)` with `E = e⁻¹`.
fn levi_civita_components(e: &Jet<RMat>, eta: &[f64]) -> Result<Vec<Jet<RMat>>> {
    let n = eta.len();
    let g = Jet::<RMat>::from_entries(n, n, &metric_entries(e, eta));
    let gamma = christoffel_jets(&g, n)?;
    let big_e = e.inverse().ok_or(GeomError::Singular(0))?;
    let mut out = Vec::with_capacity(n);
    for nu in 0..n {
        let de = big_e.partial(nu);
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = e.entry(i, 0).zero_like().truncate(de.valid);
                for l in 0..n {
                    let mut inner = de.entry(l, j);
                    for mu in 0..n {
                        inner = inner.add(&gamma[(l * n + nu) * n + mu].mul(&big_e.entry(mu, j)));
                    }
                    acc = acc.add(&e.entry(i, l).mul(&inner));
                }
                entries.push(acc);
            }
        }
        out.push(Jet::<RMat>::from_entries(n, n, &entries));
    }
    Ok(out)
}

/// `θ*_I = (1/(n−q)!) ε_{I J} θ^{j₁}∧…` summed over ordered `J`, i.e. one
/// term per increasing complement.
fn theta_star(theta: &[JForm], idx: &[usize], proto: &Jet<f64>) -> JForm {
    let n = theta.len();
    let q = idx.len();
    let comp: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
    let mut seq = idx.to_vec();
    seq.extend(&comp);
    let sign = if comp.len() == n - q { permutation_sign(&seq) } else { 0.0 };
    if sign == 0.0 {
        return zero_form(n, n - q, proto);
    }
    let mut out = ExteriorForm { n, degree: 0, coeffs: vec![proto.zero_like().add_f(sign)] };
    for &c in &comp {
        out = out.wedge(&theta[c]);
    }
    out
}

#[derive(Clone, Debug)]
pub struct TauSigma {
    /// `τ_i`, (n−1)-forms.
    pub tau: Vec<Form>,
    /// `σ_i`, (n−2)-forms.
    pub sigma: Vec<Form>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectionResiduals {
    /// `dσ_i − τ_i − ½(Θ^j∧ω^{kl}∧θ*_{ijkl} − Ω^{jk}∧θ*_{ijk})`.
    pub sigma_identity: f64,
    /// `dτ_i` minus its torsion/curvature expansion.
    pub tau_identity: f64,
    /// `dΘ + ω∧Θ − Ω∧θ`.
    pub torsion_bianchi: f64,
    /// `Ω_ij + Ω_ji`.
    pub curvature_skew: f64,
    pub d_tau: f64,
    pub tau_minus_dsigma: f64,
    pub torsion: f64,
    /// `Ω^{jk}∧θ*_{ijk}`.
    pub einstein_form: f64,
    /// Scale of `τ` and `dσ`, used for relative verdicts.
    pub scale: f64,
}

fn max_coeff(forms: &[JForm]) -> f64 {
    forms.iter().flat_map(|f| f.coeffs.iter()).fold(0.0, |m, c| m.max(c.value().abs()))
}

fn tau_forms(s: &Structure) -> Vec<JForm> {
    let n = s.n;
    let proto = s.theta[0].coeffs[0].clone();
    (0..n)
        .map(|i| {
            let mut acc = zero_form(n, n - 1, &proto);
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let a = s.omega[j][i].wedge(&s.omega_up[k][l]).wedge(s.star(&[j, k, l]));
                        let b = s.omega[j][l].wedge(&s.omega_up[l][k]).wedge(s.star(&[i, j, k]));
                        acc = acc.add(&a).add(&b);
                    }
                }
            }
            acc.scale(-0.5)
        })
        .collect()
}

fn sigma_forms(s: &Structure) -> Vec<JForm> {
    let n = s.n;
    let proto = s.theta[0].coeffs[0].clone();
    (0..n)
        .map(|i| {
            let mut acc = zero_form(n, n - 2, &proto);
            for j in 0..n {
                for k in 0..n {
                    acc = acc.add(&s.omega_up[j][k].wedge(s.star(&[i, j, k])));
                }
            }
            acc.scale(-0.5)
        })
        .collect()
}

/// `Ω^{jk}∧θ*_{ijk}` for each `i`.
fn einstein_forms(s: &Structure) -> Vec<JForm> {
    let n = s.n;
    let proto = s.theta[0].coeffs[0].clone();
    (0..n)
        .map(|i| {
            let mut acc = zero_form(n, n - 1, &proto);
            for j in 0..n {
                for k in 0..n {
                    acc = acc.add(&s.curv_up[j][k].wedge(s.star(&[i, j, k])));
                }
            }
            acc
        })
        .collect()
}

fn residuals(s: &Structure) -> Result<SectionResiduals> {
    let n = s.n;
    let proto = s.theta[0].coeffs[0].clone();
    let tau = tau_forms(s);
    let sigma = sigma_forms(s);
    let ein = einstein_forms(s);
    let dsigma: Vec<JForm> = sigma.iter().map(|f| f.d()).collect::<Result<_>>()?;
    let dtau: Vec<JForm> = tau.iter().map(|f| f.d()).collect::<Result<_>>()?;

    let mut sig_id = Vec::with_capacity(n);
    for i in 0..n {
        let mut rhs = zero_form(n, n - 1, &proto);
        if n >= 4 {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        rhs = rhs.add(&s.torsion[j].wedge(&s.omega_up[k][l]).wedge(s.star(&[i, j, k, l])));
                    }
                }
            }
        }
        let rhs = rhs.sub(&ein[i]).scale(0.5).add(&tau[i]);
        sig_id.push(dsigma[i].sub(&rhs));
    }

    let mut tau_id = Vec::with_capacity(n);
    // torsion-free part of ω^{jk}∧Ω^l_m∧θ^m∧θ*_{ijkl} uses Ω^l_m∧θ^m
    let omega_theta: Vec<JForm> = (0..n)
        .map(|l| (0..n).fold(zero_form(n, 3, &proto), |acc, m| acc.add(&s.curv[l][m].wedge(&s.theta[m]))))
        .collect();
    for i in 0..n {
        let mut acc = zero_form(n, n, &proto);
        if n >= 4 {
            for m in 0..n {
                let mut inner = zero_form(n, n - 2, &proto);
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            inner = inner
                                .add(&s.omega[l][i].wedge(&s.omega_up[j][k]).wedge(s.star(&[j, k, l, m])))
                                .add(&s.omega[j][l].wedge(&s.omega_up[l][k]).wedge(s.star(&[i, j, k, m])));
                        }
                    }
                }
                acc = acc.sub(&s.torsion[m].wedge(&inner.scale(0.5)));
            }
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc = acc.add(&s.omega_up[j][k].wedge(&omega_theta[l]).wedge(s.star(&[i, j, k, l])).scale(0.5));
                    }
                }
            }
        }
        for j in 0..n {
            acc = acc.add(&s.omega[j][i].wedge(&ein[j]).scale(0.5));
        }
        tau_id.push(dtau[i].sub(&acc));
    }

    let mut bianchi = Vec::with_capacity(n);
    for i in 0..n {
        let mut b = s.torsion[i].d()?;
        for j in 0..n {
            b = b.add(&s.omega[i][j].wedge(&s.torsion[j])).sub(&s.curv[i][j].wedge(&s.theta[j]));
        }
        bianchi.push(b);
    }
    let mut skew: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let c = s.curv[i][j].scale(s.eta_of(i)).add(&s.curv[j][i].scale(s.eta_of(j)));
            skew = skew.max(max_coeff(&[c]));
        }
    }
    let diff: Vec<JForm> = tau.iter().zip(&dsigma).map(|(t, d)| t.sub(d)).collect();
    Ok(SectionResiduals {
        sigma_identity: max_coeff(&sig_id),
        tau_identity: max_coeff(&tau_id),
        torsion_bianchi: max_coeff(&bianchi),
        curvature_skew: skew,
        d_tau: max_coeff(&dtau),
        tau_minus_dsigma: max_coeff(&diff),
        torsion: max_coeff(&s.torsion),
        einstein_form: max_coeff(&ein),
        scale: max_coeff(&tau).max(max_coeff(&dsigma)).max(max_coeff(&s.omega.concat())),
    })
}

/// `τ`, `σ` and the identity residuals of a section at `x`.
pub fn tau_sigma(section: &FrameSection, x: &[f64]) -> Result<(TauSigma, SectionResiduals)> {
    let s = section.structure(x, 2)?;
    let ts = TauSigma {
        tau: tau_forms(&s).iter().map(|f| f.value()).collect(),
        sigma: sigma_forms(&s).iter().map(|f| f.value()).collect(),
    };
    Ok((ts, residuals(&s)?))
}

/// The σ identity with `dσ` taken by central differences of step `h` instead
/// of jets; the residual is `O(h²)`.
pub fn sigma_identity_fd(section: &FrameSection, x: &[f64], h: f64) -> Result<f64> {
    let n = section.n;
    let here = section.structure(x, 2)?;
    let tau = tau_forms(&here);
    let ein = einstein_forms(&here);
    let proto = here.theta[0].coeffs[0].clone();
    let sig_at = |v: usize, t: f64| -> Result<Vec<Form>> {
        let mut y = x.to_vec();
        y[v] += t;
        Ok(sigma_forms(&section.structure(&y, 2)?).iter().map(|f| f.value()).collect())
    };
    let mut dsig: Vec<Form> = (0..n).map(|_| ExteriorForm::zero(n, n - 1, &0.0)).collect();
    let b = crate::tensor::basis::basis(n);
    for v in 0..n {
        let (p, m) = (sig_at(v, h)?, sig_at(v, -h)?);
        for i in 0..n {
            for (k, &mask) in b.by_degree[n - 2].iter().enumerate() {
                if mask & (1 << v) != 0 {
                    continue;
                }
                let der = (p[i].coeffs[k] - m[i].coeffs[k]) / (2.0 * h);
                let s = crate::tensor::basis::merge_sign(1 << v, mask);
                dsig[i].coeffs[b.position[(mask | (1 << v)) as usize]] += s * der;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut rhs = zero_form(n, n - 1, &proto);
        if n >= 4 {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        rhs = rhs.add(&here.torsion[j].wedge(&here.omega_up[k][l]).wedge(here.star(&[i, j, k, l])));
                    }
                }
            }
        }
        let rhs = rhs.sub(&ein[i]).scale(0.5).add(&tau[i]).value();
        worst = dsig[i].sub(&rhs).coeffs.iter().fold(worst, |w, c| w.max(c.abs()));
    }
    Ok(worst)
}

/// `max_k |−½Ω^{ij}∧θ*_{ijk} − G^i_k θ*_i|` with `G` the Einstein tensor of
/// `g = eᵗηe` from curvlab, moved to the frame.
pub fn einstein_tensor_defect(section: &FrameSection, x: &[f64]) -> Result<f64> {
    let n = section.n;
    let s = section.structure(x, 2)?;
    let cp = crate::curvlab::curvature_exact(&section.metric_chart(), x)?;
    let vars = Jet::vars(&JetSpace::new(n, 0), x);
    let e = (section.coframe)(&vars).value().clone();
    let big_e = e.try_inverse().ok_or(GeomError::Singular(0))?;
    let g_frame = big_e.transpose() * &cp.einstein * &big_e;
    let ein = einstein_forms(&s);
    let proto = s.theta[0].coeffs[0].clone();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut rhs = zero_form(n, n - 1, &proto);
        for i in 0..n {
            rhs = rhs.add(&s.star(&[i]).scale(section.eta[i] * g_frame[(i, k)]));
        }
        let d = ein[k].scale(-0.5).sub(&rhs).value();
        worst = d.coeffs.iter().fold(worst, |w, c| w.max(c.abs()));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EinsteinVerdict {
    /// `dτ = 0`
    pub closed: bool,
    /// `τ = dσ`
    pub exact: bool,
    /// `Θ = 0` and `Ω^{jk}∧θ*_{ijk} = 0`
    pub vacuum: bool,
    pub consistent: bool,
    pub tolerance: f64,
    pub worst: SectionResiduals,
}

/// The three conditions of the equivalence theorem, each decided on the
/// worst probe with residuals relative to the local size of `ω`.
pub fn einstein_equivalence_check(section: &FrameSection, probes: &[Vec<f64>], tol: f64) -> Result<EinsteinVerdict> {
    if probes.is_empty() {
        return Err(GeomError::InvalidInput("no probes".into()));
    }
    let mut worst: Option<SectionResiduals> = None;
    let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
    for x in probes {
        let (_, r) = tau_sigma(section, x)?;
        let denom = r.scale.max(1.0);
        a = a.max(r.d_tau / denom);
        b = b.max(r.tau_minus_dsigma / denom);
        c = c.max(r.torsion.max(r.einstein_form) / denom);
        worst = Some(match worst {
            None => r,
            Some(w) => SectionResiduals {
                sigma_identity: w.sigma_identity.max(r.sigma_identity),
                tau_identity: w.tau_identity.max(r.tau_identity),
                torsion_bianchi: w.torsion_bianchi.max(r.torsion_bianchi),
                curvature_skew: w.curvature_skew.max(r.curvature_skew),
                d_tau: w.d_tau.max(r.d_tau),
                tau_minus_dsigma: w.tau_minus_dsigma.max(r.tau_minus_dsigma),
                torsion: w.torsion.max(r.torsion),
                einstein_form: w.einstein_form.max(r.einstein_form),
                scale: w.scale.max(r.scale),
            },
        });
    }
    let (closed, exact, vacuum) = (a <= tol, b <= tol, c <= tol);
    Ok(EinsteinVerdict {
        closed,
        exact,
        vacuum,
        consistent: closed == exact && exact == vacuum,
        tolerance: tol,
        worst: worst.expect("non-empty"),
    })
}

fn diag_coframe(f: impl Fn(&[Jet<f64>]) -> Vec<Jet<f64>> + Send + Sync + 'static) -> CoframeClosure {
    Arc::new(move |x: &[Jet<f64>]| {
        let d = f(x);
        let n = d.len();
        let zero = x[0].cst(0.0);
        let e: Vec<Jet<f64>> = (0..n * n).map(|k| if k / n == k % n { d[k / n].clone() } else { zero.clone() }).collect();
        Jet::<RMat>::from_entries(n, n, &e)
    })
}

/// `θⁱ = dxⁱ` with the Levi-Civita connection (ω = 0).
pub fn flat(n: usize) -> Result<FrameSection> {
    FrameSection::levi_civita(vec![1.0; n], diag_coframe(|x| x.iter().map(|v| v.cst(1.0)).collect()))
}

/// Flat ℝ⁴ in a position-dependent rotated frame; ω is nonzero but still
/// Levi-Civita and curvature-free.
pub fn rotating_frame() -> Result<FrameSection> {
    FrameSection::levi_civita(
        vec![1.0; 4],
        Arc::new(|x: &[Jet<f64>]| {
            let (a, b) = (x[2].sin(), x[0].mul(&x[1]).scale(0.5));
            let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
            let z = x[0].cst(0.0);
            let o = x[0].cst(1.0);
            let r1 = [ca.clone(), sa.neg(), z.clone(), z.clone(), sa, ca, z.clone(), z.clone(), z.clone(), z.clone(), o.clone(), z.clone(), z.clone(), z.clone(), z.clone(), o.clone()];
            let r2 = [o.clone(), z.clone(), z.clone(), z.clone(), z.clone(), o, z.clone(), z.clone(), z.clone(), z.clone(), cb.clone(), sb.neg(), z.clone(), z, sb, cb];
            Jet::<RMat>::from_entries(4, 4, &r1).mul(&Jet::<RMat>::from_entries(4, 4, &r2))
        }),
    )
}

/// Isotropic Schwarzschild, `θ⁰ = a dt`, `θᵏ = b² dxᵏ` with
/// `a = (1 − m/2ρ)/(1 + m/2ρ)`, `b = 1 + m/2ρ`; Euclidean time unless
/// `lorentzian`, which uses `η = diag(+,−,−,−)`.
pub fn schwarzschild(mass: f64, lorentzian: bool) -> Result<FrameSection> {
    if !(mass > 0.0) {
        return Err(GeomError::InvalidInput(format!("mass {mass} must be positive")));
    }
    let eta = if lorentzian { vec![1.0, -1.0, -1.0, -1.0] } else { vec![1.0; 4] };
    FrameSection::levi_civita(
        eta,
        diag_coframe(move |x| {
            let rho = x[1].mul(&x[1]).add(&x[2].mul(&x[2])).add(&x[3].mul(&x[3])).sqrt();
            let u = rho.recip().scale(mass * 0.5);
            let b = u.add_f(1.0);
            let a = u.neg().add_f(1.0).mul(&b.recip());
            let b2 = b.mul(&b);
            vec![a, b2.clone(), b2.clone(), b2]
        }),
    )
}

/// Round S⁴ in stereographic coordinates, `θⁱ = 2dxⁱ/(1 + |x|²)`.
pub fn sphere() -> Result<FrameSection> {
    FrameSection::levi_civita(
        vec![1.0; 4],
        diag_coframe(|x| {
            let r2 = x.iter().fold(x[0].cst(1.0), |a, v| a.add(&v.mul(v)));
            let f = r2.recip().scale(2.0);
            vec![f; 4]
        }),
    )
}

/// A wavy coframe with a seeded polynomial metric connection that is not
/// Levi-Civita.
pub fn torsionful(seed: u64) -> Result<FrameSection> {
    let mut g = crate::rng::seeded(seed, "gauge.ec.torsionful");
    let c: Vec<f64> = (0..6 * 4 * 3).map(|_| crate::rng::normal(&mut g) * 0.3).collect();
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let coframe: CoframeClosure = Arc::new(|x: &[Jet<f64>]| {
        let mut e = Vec::with_capacity(16);
        for i in 0..4 {
            for mu in 0..4 {
                let base = x[0].cst(if i == mu { 1.0 } else { 0.0 });
                e.push(base.add(&x[(i + mu) % 4].mul(&x[(i + 2 * mu + 1) % 4]).scale(0.1 / (1.0 + (i + mu) as f64))));
            }
        }
        Jet::<RMat>::from_entries(4, 4, &e)
    });
    let connection: ConnectionClosure = Arc::new(move |x: &[Jet<f64>]| {
        (0..4)
            .map(|nu| {
                let z = x[0].cst(0.0);
                let mut e = vec![z; 16];
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    let k = &c[(p * 4 + nu) * 3..(p * 4 + nu) * 3 + 3];
                    let w = x[0].cst(k[0]).add(&x[(nu + p) % 4].scale(k[1])).add(&x[p % 4].mul(&x[nu]).scale(k[2]));
                    e[i * 4 + j] = w.clone();
                    e[j * 4 + i] = w.neg();
                }
                Jet::<RMat>::from_entries(4, 4, &e)
            })
            .collect()
    });
    FrameSection::new(vec![1.0; 4], coframe, Some(connection))
}

/// Named sections, e.g. read from a JSON file on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case")]
pub enum SectionFixture {
    Flat,
    RotatingFrame,
    Schwarzschild {
        mass: f64,
        #[serde(default)]
        lorentzian: bool,
    },
    Sphere,
    Torsionful {
        #[serde(default)]
        seed: u64,
    },
}

impl SectionFixture {
    pub fn build(&self) -> Result<FrameSection> {
        match *self {
            SectionFixture::Flat => flat(4),
            SectionFixture::RotatingFrame => rotating_frame(),
            SectionFixture::Schwarzschild { mass, lorentzian } => schwarzschild(mass, lorentzian),
            SectionFixture::Sphere => sphere(),
            SectionFixture::Torsionful { seed } => torsionful(seed),
        }
    }

    /// Default probe points kept clear of coordinate singularities.
    pub fn default_probes(&self) -> Vec<Vec<f64>> {
        match self {
            SectionFixture::Schwarzschild { .. } => {
                vec![vec![0.2, 1.5, 1.0, 0.8], vec![-0.4, 0.3, -2.0, 1.1], vec![1.0, -1.2, 0.7, -2.2]]
            }
            _ => vec![vec![0.3, -0.2, 0.5, 0.4], vec![-0.6, 0.1, 0.2, -0.7], vec![0.5, 0.8, -0.3, 0.1]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvlab::curvature_exact;
    use proptest::prelude::*;

    fn probes() -> Vec<Vec<f64>> {
        SectionFixture::Flat.default_probes()
    }

    #[test]
    fn flat_is_trivial() {
        let s = flat(4).unwrap();
        let (ts, r) = tau_sigma(&s, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(ts.tau.iter().chain(&ts.sigma).all(|f| f.coeffs.iter().all(|&c| c == 0.0)));
        assert_eq!(ts.tau[0].degree, 3);
        assert_eq!(ts.sigma[0].degree, 2);
        assert_eq!(r.sigma_identity + r.tau_identity + r.d_tau + r.torsion + r.einstein_form, 0.0);
        let v = einstein_equivalence_check(&s, &probes(), 1e-8).unwrap();
        assert!(v.closed && v.exact && v.vacuum && v.consistent);
    }

    #[test]
    fn theta_star_top_and_single() {
        let s = flat(4).unwrap().structure(&[0.0; 4], 2).unwrap();
        assert_eq!(*s.star(&[0, 1, 2, 3]).coeffs[0].value(), 1.0);
        assert_eq!(*s.star(&[1, 0, 2, 3]).coeffs[0].value(), -1.0);
        assert_eq!(*s.star(&[0, 0, 2, 3]).coeffs[0].value(), 0.0);
        // θ*_1 = θ²∧θ³∧θ⁴
        assert_eq!(s.star(&[0]).value().get(&[1, 2, 3]), 1.0);
        assert_eq!(s.star(&[1]).value().get(&[0, 2, 3]), -1.0);
    }

    #[test]
    fn identities_hold_on_all_fixtures() {
        for fx in [
            SectionFixture::RotatingFrame,
            SectionFixture::Schwarzschild { mass: 1.0, lorentzian: false },
            SectionFixture::Schwarzschild { mass: 1.0, lorentzian: true },
            SectionFixture::Sphere,
            SectionFixture::Torsionful { seed: 4 },
        ] {
            let s = fx.build().unwrap();
            for x in fx.default_probes() {
                let (_, r) = tau_sigma(&s, &x).unwrap();
                let tol = 1e-10 * (1.0 + r.scale.powi(3));
                assert!(r.sigma_identity < tol, "{fx:?} {r:?}");
                assert!(r.tau_identity < tol, "{fx:?} {r:?}");
                assert!(r.torsion_bianchi < tol, "{fx:?} {r:?}");
                assert!(r.curvature_skew < 1e-12 * (1.0 + r.scale.powi(2)), "{fx:?} {r:?}");
            }
        }
    }

    #[test]
    fn sigma_identity_converges_under_refinement() {
        let s = torsionful(9).unwrap();
        let x = [0.3, -0.2, 0.5, 0.4];
        let e1 = sigma_identity_fd(&s, &x, 1e-2).unwrap();
        let e2 = sigma_identity_fd(&s, &x, 5e-3).unwrap();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{e1} {e2}");
        // Levi-Civita sections take ω from derivatives of the coframe
        let fx = SectionFixture::Schwarzschild { mass: 1.0, lorentzian: false };
        let x = &fx.default_probes()[0];
        let e1 = sigma_identity_fd(&fx.build().unwrap(), x, 1e-2).unwrap();
        let e2 = sigma_identity_fd(&fx.build().unwrap(), x, 5e-3).unwrap();
        assert!(e1 < 1e-2 && (3.0..5.0).contains(&(e1 / e2)), "{e1} {e2}");
    }

    #[test]
    fn schwarzschild_is_ricci_flat_and_vacuum() {
        for lorentzian in [false, true] {
            let fx = SectionFixture::Schwarzschild { mass: 1.0, lorentzian };
            let s = fx.build().unwrap();
            for x in fx.default_probes() {
                let cp = curvature_exact(&s.metric_chart(), &x).unwrap();
                assert!(cp.ricci.abs().max() < 1e-10, "{}", cp.ricci);
                let (_, r) = tau_sigma(&s, &x).unwrap();
                assert!(r.d_tau < 1e-4);
                assert!(r.torsion < 1e-12);
            }
            let v = einstein_equivalence_check(&s, &fx.default_probes(), 1e-8).unwrap();
            assert!(v.closed && v.exact && v.vacuum && v.consistent, "{v:?}");
        }
    }

    #[test]
    fn rotating_frame_is_vacuum() {
        let s = rotating_frame().unwrap();
        let (_, r) = tau_sigma(&s, &probes()[0]).unwrap();
        assert!(r.scale > 0.1);
        let v = einstein_equivalence_check(&s, &probes(), 1e-8).unwrap();
        assert!(v.closed && v.exact && v.vacuum && v.consistent, "{v:?}");
    }

    #[test]
    fn non_vacuum_controls() {
        for s in [sphere().unwrap(), torsionful(2).unwrap()] {
            let (_, r) = tau_sigma(&s, &probes()[0]).unwrap();
            assert!(r.d_tau > 1e-3, "{r:?}");
            let v = einstein_equivalence_check(&s, &probes(), 1e-8).unwrap();
            assert!(!v.closed && !v.exact && !v.vacuum && v.consistent, "{v:?}");
        }
    }

    #[test]
    fn einstein_form_matches_curvlab() {
        for s in [sphere().unwrap(), schwarzschild(1.0, false).unwrap(), rotating_frame().unwrap()] {
            for x in (SectionFixture::Schwarzschild { mass: 1.0, lorentzian: false }).default_probes() {
                assert!(einstein_tensor_defect(&s, &x).unwrap() < 1e-9);
            }
        }
        // on S⁴ G = −3g, so Ω^{jk}∧θ*_{0jk} = 6θ*_0 = 6·2³ dx¹²³ at the origin
        let s = sphere().unwrap();
        let st = s.structure(&[0.0; 4], 2).unwrap();
        let e = einstein_forms(&st);
        assert!((e[0].value().get(&[1, 2, 3]) - 48.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_sections() {
        assert!(FrameSection::new(vec![1.0, 2.0, 1.0, 1.0], flat(4).unwrap().coframe, None).is_err());
        let sym: ConnectionClosure = Arc::new(|x: &[Jet<f64>]| vec![Jet::constant(&x[0].space, RMat::identity(4, 4)); 4]);
        let s = FrameSection::new(vec![1.0; 4], flat(4).unwrap().coframe, Some(sym)).unwrap();
        assert!(tau_sigma(&s, &[0.0; 4]).is_err());
        assert!(schwarzschild(-1.0, false).is_err());
        let deg = FrameSection::levi_civita(vec![1.0; 4], diag_coframe(|x| vec![x[0].cst(0.0); 4])).unwrap();
        assert!(matches!(tau_sigma(&deg, &[0.0; 4]), Err(GeomError::Singular(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn constant_rotation_covariance(seed in 0u64..1000) {
            let s = torsionful(seed).unwrap();
            let mut g = crate::rng::seeded(seed, "t.ec.rot");
            let r = crate::rng::special_orthogonal(&mut g, 4);
            let rs = s.rotated(&r).unwrap();
            let x = [0.2, -0.1, 0.4, 0.3];
            let (t0, r0) = tau_sigma(&s, &x).unwrap();
            let (t1, r1) = tau_sigma(&rs, &x).unwrap();
            prop_assert!((r0.sigma_identity - r1.sigma_identity).abs() < 1e-10);
            for i in 0..4 {
                let mixed = (0..4).fold(ExteriorForm::zero(4, 3, &0.0), |acc, j| acc.add(&t0.tau[j].scale(r[(i, j)])));
                let d = mixed.sub(&t1.tau[i]).coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                prop_assert!(d < 1e-10, "{}", d);
                let mixed = (0..4).fold(ExteriorForm::zero(4, 2, &0.0), |acc, j| acc.add(&t0.sigma[j].scale(r[(i, j)])));
                let d = mixed.sub(&t1.sigma[i]).coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                prop_assert!(d < 1e-10, "{}", d);
            }
        }
    }
}
