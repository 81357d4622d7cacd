//! Yang–Mills potentials on Euclidean ℝ⁴ with values in anti-Hermitian p×p
//! matrices. Every derivative comes from jets, so residuals are analytic.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg::max_abs;
use crate::tensor::{CMat, Coeff, ExteriorForm, FrameMetric, Jet, JetSpace};

pub type PotentialClosure = Arc<dyn Fn(&[Jet<f64>]) -> Vec<Jet<CMat>> + Send + Sync>;
pub type GaugeClosure = Arc<dyn Fn(&[Jet<f64>]) -> Jet<CMat> + Send + Sync>;

type MForm = ExteriorForm<Jet<CMat>>;

#[derive(Clone)]
pub struct GaugePotential {
    pub p: usize,
    pub components: PotentialClosure,
}

impl std::fmt::Debug for GaugePotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugePotential").field("p", &self.p).finish()
    }
}

impl GaugePotential {
    pub fn new(p: usize, components: PotentialClosure) -> Self {
        GaugePotential { p, components }
    }

    pub fn zero(p: usize) -> Self {
        GaugePotential::new(p, Arc::new(move |x: &[Jet<f64>]| vec![Jet::constant(&x[0].space, CMat::zeros(p, p)); 4]))
    }

    /// `A` as a matrix-valued 1-form of jets of the given order at `x`.
    pub fn form(&self, x: &[f64], order: usize) -> Result<MForm> {
        if x.len() != 4 {
            return Err(GeomError::Dimension(format!("gauge potentials live on ℝ⁴, got a point of dim {}", x.len())));
        }
        let space = JetSpace::new(4, order);
        let comps = (self.components)(&Jet::vars(&space, x));
        if comps.len() != 4 {
            return Err(GeomError::Dimension(format!("{} potential components", comps.len())));
        }
        for (mu, a) in comps.iter().enumerate() {
            let v = a.value();
            if v.nrows() != self.p || v.ncols() != self.p {
                return Err(GeomError::Dimension(format!("A_{mu} is {}×{}", v.nrows(), v.ncols())));
            }
            let skew = max_abs(&(v + v.adjoint()));
            if skew > 1e-12 * (1.0 + max_abs(v)) {
                return Err(GeomError::Precondition(format!("A_{mu} is not anti-Hermitian ({skew:.3e})")));
            }
        }
        Ok(ExteriorForm { n: 4, degree: 1, coeffs: comps })
    }
}

fn euclid() -> FrameMetric {
    FrameMetric::euclidean(4)
}

fn field(af: &MForm) -> Result<MForm> {
    Ok(af.d()?.add(&af.wedge(af)))
}

/// `∇ω = dω + [A, ω]` with the graded bracket.
fn cov(af: &MForm, w: &MForm) -> Result<MForm> {
    Ok(w.d()?.add(&af.bracket(w)))
}

pub fn form_norm(f: &ExteriorForm<CMat>) -> f64 {
    f.coeffs.iter().map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt()
}

/// `F = dA + A∧A` at `x`.
pub fn curvature(a: &GaugePotential, x: &[f64]) -> Result<ExteriorForm<CMat>> {
    Ok(field(&a.form(x, 1)?)?.value())
}

/// `‖d*F + [A, *F]‖` at `x`.
pub fn ym_residual(a: &GaugePotential, x: &[f64]) -> Result<f64> {
    let af = a.form(x, 2)?;
    let sf = field(&af)?.star(&euclid());
    Ok(form_norm(&cov(&af, &sf)?.value()))
}

/// `‖dF + [A, F]‖` at `x`.
pub fn bianchi_residual(a: &GaugePotential, x: &[f64]) -> Result<f64> {
    let af = a.form(x, 2)?;
    Ok(form_norm(&cov(&af, &field(&af)?)?.value()))
}

/// `(‖F + *F‖, ‖F − *F‖) / ‖F‖`.
pub fn duality_residuals(a: &GaugePotential, x: &[f64]) -> Result<(f64, f64)> {
    let f = curvature(a, x)?;
    let sf = f.star(&euclid());
    let n = form_norm(&f);
    if n == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((form_norm(&f.add(&sf)) / n, form_norm(&f.sub(&sf)) / n))
}

/// `‖d(−[A, *F])‖` at `x`.
pub fn conservation_form_residual(a: &GaugePotential, x: &[f64]) -> Result<f64> {
    let af = a.form(x, 2)?;
    let sf = field(&af)?.star(&euclid());
    let flux = af.bracket(&sf).neg();
    Ok(form_norm(&flux.d()?.value()))
}

/// `‖∇(𝒟_A B) + [B, ∇*F]‖` with `𝒟_A B = ∇*∇B + [B, *F]`.
pub fn linearized_identity_residual(a: &GaugePotential, b: &GaugePotential, x: &[f64]) -> Result<f64> {
    if a.p != b.p {
        return Err(GeomError::Dimension(format!("A is {}×{} but B is {}×{}", a.p, a.p, b.p, b.p)));
    }
    let af = a.form(x, 3)?;
    let bf = b.form(x, 3)?;
    let sf = field(&af)?.star(&euclid());
    let nb = cov(&af, &bf)?;
    let dab = cov(&af, &nb.star(&euclid()))?.add(&bf.bracket(&sf));
    let lhs = cov(&af, &dab)?;
    let rhs = bf.bracket(&cov(&af, &sf)?).neg();
    Ok(form_norm(&lhs.sub(&rhs).value()))
}

/// `max |g⁻¹Fg − F'|` with `A' = g⁻¹Ag + g⁻¹dg`; `g` must be unitary.
pub fn gauge_covariance_residual(a: &GaugePotential, g: &GaugeClosure, x: &[f64]) -> Result<f64> {
    let af = a.form(x, 2)?;
    let gj = g(&Jet::vars(&af.coeffs[0].space, x));
    let gi = gj.adjoint();
    let moved: Vec<Jet<CMat>> =
        (0..4).map(|mu| gi.mul(&af.coeffs[mu]).mul(&gj).add(&gi.mul(&gj.partial(mu)))).collect();
    let ap = ExteriorForm { n: 4, degree: 1, coeffs: moved };
    let fp = field(&ap)?.value();
    let f = field(&af)?.value();
    let g0 = gj.value();
    let gi0 = gi.value();
    Ok(f.coeffs.iter().zip(&fp.coeffs).fold(0.0, |m, (fi, fpi)| m.max(max_abs(&(gi0 * fi * g0 - fpi)))))
}

/// Quaternion units as 2×2 matrices: `E₀ = 1`, `E_k = −iσ_k`.
pub fn quaternion_units() -> [CMat; 4] {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    [
        CMat::from_row_slice(2, 2, &[o, z, z, o]),
        CMat::from_row_slice(2, 2, &[z, -i, -i, z]),
        CMat::from_row_slice(2, 2, &[z, -o, o, z]),
        CMat::from_row_slice(2, 2, &[-i, z, z, i]),
    ]
}

fn im_part(m: &CMat) -> CMat {
    let half_tr = m.trace() * 0.5;
    m - CMat::identity(2, 2) * half_tr
}

/// Regular-gauge BPST potential `A = Im(x̄ dx)/(|x−c|² + ρ²)` (or the
/// conjugate branch `Im(x dx̄)` when `dual` is set).
pub fn bpst_branch(rho: f64, center: [f64; 4], dual: bool) -> Result<GaugePotential> {
    if !(rho > 0.0) {
        return Err(GeomError::InvalidInput(format!("ρ = {rho} must be positive")));
    }
    let e = quaternion_units();
    // structure matrices S[a][μ] = Im(q(E_a) E_μ) with q the chosen conjugation
    let s: Vec<Vec<CMat>> = (0..4)
        .map(|a| {
            (0..4)
                .map(|mu| {
                    if dual {
                        im_part(&(&e[a] * e[mu].adjoint()))
                    } else {
                        im_part(&(e[a].adjoint() * &e[mu]))
                    }
                })
                .collect()
        })
        .collect();
    Ok(GaugePotential::new(
        2,
        Arc::new(move |x: &[Jet<f64>]| {
            let y: Vec<Jet<f64>> = (0..4).map(|k| x[k].add_f(-center[k])).collect();
            let r2 = y.iter().fold(x[0].cst(rho * rho), |acc, v| acc.add(&v.mul(v)));
            let w = r2.recip();
            let coef: Vec<Jet<Complex64>> = y.iter().map(|v| v.mul(&w).to_complex()).collect();
            (0..4)
                .map(|mu| {
                    (0..4).fold(Jet::constant(&x[0].space, CMat::zeros(2, 2)), |acc, a| {
                        acc.add(&Jet::scalar_times(&coef[a], &s[a][mu]))
                    })
                })
                .collect()
        }),
    ))
}

/// The anti-self-dual (`F = −*F`) BPST instanton.
pub fn bpst(rho: f64, center: [f64; 4]) -> Result<GaugePotential> {
    bpst_branch(rho, center, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargeReport {
    pub charge: f64,
    pub radius: f64,
    pub intervals: usize,
}

/// `(1/8π²)∫ Tr(F∧F)` over the ball of radius `r_max` about `center`, for
/// potentials whose density is O(4)-symmetric about it; composite Simpson in
/// the radius, doubled until the relative change drops below 1e−9.
pub fn topological_charge(a: &GaugePotential, center: [f64; 4], r_max: f64) -> Result<ChargeReport> {
    let dir = [0.5, -0.5, 0.5, 0.5];
    let density = |r: f64| -> Result<f64> {
        let x: Vec<f64> = (0..4).map(|k| center[k] + r * dir[k]).collect();
        let f = curvature(a, &x)?;
        let ff = f.wedge(&f);
        Ok(ff.coeffs[0].trace().re * 2.0 * PI * PI * r.powi(3))
    };
    let simpson = |n: usize| -> Result<f64> {
        let h = r_max / n as f64;
        let mut s = density(0.0)? + density(r_max)?;
        for k in 1..n {
            s += density(k as f64 * h)? * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        Ok(s * h / 3.0)
    };
    let mut n = 256;
    let mut prev = simpson(n)?;
    loop {
        n *= 2;
        let next = simpson(n)?;
        if (next - prev).abs() <= 1e-9 * next.abs().max(1e-300) || n >= 1 << 16 {
            return Ok(ChargeReport { charge: next / (8.0 * PI * PI), radius: r_max, intervals: n });
        }
        prev = next;
    }
}

/// Polynomial su(2)-valued potential from seeded coefficients, degree ≤ 2.
pub fn random_polynomial(seed: u64, scale: f64) -> GaugePotential {
    let mut g = crate::rng::seeded(seed, "gauge.poly");
    let e = quaternion_units();
    // coefficients c[μ][a][k]: constant, linear and one quadratic term per (μ, a)
    let c: Vec<Vec<Vec<f64>>> = (0..4)
        .map(|_| (0..3).map(|_| (0..7).map(|_| crate::rng::normal(&mut g) * scale).collect()).collect())
        .collect();
    GaugePotential::new(
        2,
        Arc::new(move |x: &[Jet<f64>]| {
            (0..4)
                .map(|mu| {
                    (0..3).fold(Jet::constant(&x[0].space, CMat::zeros(2, 2)), |acc, a| {
                        let k = &c[mu][a];
                        let mut f = x[0].cst(k[0]);
                        for v in 0..4 {
                            f = f.add(&x[v].scale(k[1 + v]));
                        }
                        f = f.add(&x[(mu + a) % 4].mul(&x[(mu + 2 * a + 1) % 4]).scale(k[5]));
                        f = f.add(&x[a].mul(&x[a]).mul(&x[mu]).scale(k[6]));
                        acc.add(&Jet::scalar_times(&f.to_complex(), &e[a + 1]))
                    })
                })
                .collect()
        }),
    )
}

/// Smooth SU(2)-valued gauge transformation: a normalized unit quaternion field.
pub fn smooth_gauge() -> GaugeClosure {
    let e = quaternion_units();
    Arc::new(move |x: &[Jet<f64>]| {
        let q = [
            x[0].scale(0.3).add_f(1.0),
            x[1].mul(&x[2]).scale(0.2),
            x[3].sin(),
            x[0].cos().scale(0.5),
        ];
        let nrm = q.iter().fold(x[0].cst(0.0), |acc, v| acc.add(&v.mul(v))).sqrt().recip();
        (0..4).fold(Jet::constant(&x[0].space, CMat::zeros(2, 2)), |acc, a| {
            acc.add(&Jet::scalar_times(&q[a].mul(&nrm).to_complex(), &e[a]))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn bianchi_for_any_potential(seed in 0u64..10_000, x in proptest::array::uniform4(-2.0f64..2.0)) {
            let a = random_polynomial(seed, 0.5);
            prop_assert!(bianchi_residual(&a, &x).unwrap() < 1e-9);
        }
    }

    fn probes(n: usize, seed: u64) -> Vec<[f64; 4]> {
        let mut g = rng::seeded(seed, "t.ym.probes");
        (0..n).map(|_| [0; 4].map(|_| rng::uniform(&mut g, -2.0, 2.0))).collect()
    }

    fn abelian() -> GaugePotential {
        // A = x¹dx² with value i ∈ u(1)
        GaugePotential::new(
            1,
            Arc::new(|x: &[Jet<f64>]| {
                let z = Jet::constant(&x[0].space, CMat::zeros(1, 1));
                let i = CMat::from_element(1, 1, Complex64::i());
                vec![z.clone(), Jet::scalar_times(&x[0].to_complex(), &i), z.clone(), z]
            }),
        )
    }

    #[test]
    fn zero_and_abelian() {
        let x = [0.3, -0.1, 0.7, 1.1];
        let z = GaugePotential::zero(2);
        assert_eq!(form_norm(&curvature(&z, &x).unwrap()), 0.0);
        assert_eq!(ym_residual(&z, &x).unwrap(), 0.0);
        let f = curvature(&abelian(), &x).unwrap();
        let expected = ExteriorForm::monomial(4, &[0, 1], CMat::from_element(1, 1, Complex64::i()));
        assert!(form_norm(&f.sub(&expected)) < 1e-15);
        assert_eq!(conservation_form_residual(&abelian(), &x).unwrap(), 0.0);
    }

    #[test]
    fn structure_checks() {
        let bad = GaugePotential::new(1, Arc::new(|x: &[Jet<f64>]| vec![Jet::constant(&x[0].space, CMat::identity(1, 1)); 4]));
        assert!(curvature(&bad, &[0.0; 4]).is_err());
        assert!(bpst(0.0, [0.0; 4]).is_err());
    }

    #[test]
    fn covariance_and_bianchi() {
        let g = smooth_gauge();
        for a in [bpst(1.0, [0.0; 4]).unwrap(), random_polynomial(3, 0.5)] {
            for x in probes(10, 1) {
                assert!(gauge_covariance_residual(&a, &g, &x).unwrap() < 1e-9);
                assert!(bianchi_residual(&a, &x).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn bpst_is_anti_self_dual() {
        let a = bpst(1.0, [0.1, 0.0, -0.2, 0.3]).unwrap();
        let other = bpst_branch(1.0, [0.0; 4], true).unwrap();
        for x in probes(100, 2) {
            let (plus, minus) = duality_residuals(&a, &x).unwrap();
            assert!(plus < 1e-10, "{plus}");
            assert!(minus > 1.0);
            assert!(ym_residual(&a, &x).unwrap() < 1e-8);
            let (p2, m2) = duality_residuals(&other, &x).unwrap();
            assert!(m2 < 1e-10 && p2 > 1.0);
        }
    }

    #[test]
    fn bpst_charge() {
        let a = bpst(1.0, [0.0; 4]).unwrap();
        let q1 = topological_charge(&a, [0.0; 4], 50.0).unwrap();
        assert!((q1.charge.abs() - 1.0).abs() < 0.02, "{q1:?}");
        let b = bpst(2.0, [0.0; 4]).unwrap();
        let q2 = topological_charge(&b, [0.0; 4], 100.0).unwrap();
        assert!((q1.charge - q2.charge).abs() < 1e-3);
        // density depends only on the radius
        let f1 = curvature(&a, &[0.6, 0.0, 0.0, 0.0]).unwrap();
        let f2 = curvature(&a, &[0.0, 0.0, 0.36, 0.48]).unwrap();
        let d = |f: &ExteriorForm<CMat>| f.wedge(f).coeffs[0].trace().re;
        assert!((d(&f1) - d(&f2)).abs() < 1e-12);
    }

    #[test]
    fn conservation() {
        let a = bpst(1.0, [0.0; 4]).unwrap();
        let ctrl = random_polynomial(5, 0.5);
        for x in probes(10, 3) {
            assert!(conservation_form_residual(&a, &x).unwrap() < 1e-6);
        }
        let worst = probes(10, 3).iter().map(|x| conservation_form_residual(&ctrl, x).unwrap()).fold(0.0, f64::max);
        assert!(worst > 1e-3);
        assert!(probes(5, 3).iter().all(|x| ym_residual(&ctrl, x).unwrap() > 1e-6));
    }

    #[test]
    fn linearized_identity() {
        let b = random_polynomial(7, 0.4);
        for a in [GaugePotential::zero(2), bpst(1.0, [0.0; 4]).unwrap(), random_polynomial(8, 0.4)] {
            for x in probes(5, 4) {
                let r = linearized_identity_residual(&a, &b, &x).unwrap();
                assert!(r < 1e-6, "{r}");
            }
        }
    }
}
