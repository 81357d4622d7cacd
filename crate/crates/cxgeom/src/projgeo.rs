//! Grassmannians G_{N,p}(ℂ) as Hermitian projectors of trace p.

use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::linalg::{c, commutator, max_abs};
use crate::rng::{gaussian_c, SeededRng};
use crate::tensor::grid::{form_max_norm, interior_max};
use crate::tensor::{exterior_derivative, grid_partial, CMat, Coeff, DScheme, ExteriorForm, GridField, Jet};

const EXACT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianProjector {
    pub p: usize,
    pub m: CMat,
}

impl HermitianProjector {
    pub fn new(m: CMat, p: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(GeomError::Dimension("projector must be square".into()));
        }
        let herm = max_abs(&(&m - m.adjoint()));
        let idem = max_abs(&(&m * &m - &m));
        let tr = (m.trace() - c(p as f64)).norm();
        if herm > EXACT || idem > EXACT || tr > 1e-8 {
            return Err(GeomError::InvalidInput(format!(
                "not a rank-{p} Hermitian projector (‖P−P†‖={herm:.2e}, ‖P²−P‖={idem:.2e}, |TrP−p|={tr:.2e})"
            )));
        }
        Ok(HermitianProjector { p, m })
    }

    /// `H (H†H)⁻¹ H†` for a full-rank N×p frame.
    pub fn from_frame(h: &CMat) -> Result<Self> {
        let g = (h.adjoint() * h).try_inverse().ok_or(GeomError::Singular(0))?;
        let m = h * g * h.adjoint();
        // symmetrize away rounding
        let m = (&m + m.adjoint()).scale(0.5);
        Self::new(m, h.ncols())
    }

    pub fn random(rng: &mut SeededRng, n: usize, p: usize) -> Self {
        Self::from_frame(&gaussian_c(rng, n, p)).expect("Gaussian frames have full rank")
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn complement(&self) -> CMat {
        CMat::identity(self.n(), self.n()) - &self.m
    }
}

/// `(N−p)×p` coordinates of the chart around the standard p-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannChart {
    pub z: CMat,
}

fn frame_of_chart(z: &CMat) -> CMat {
    let (q, p) = (z.nrows(), z.ncols());
    let mut v = CMat::zeros(p + q, p);
    v.view_mut((0, 0), (p, p)).copy_from(&CMat::identity(p, p));
    v.view_mut((p, 0), (q, p)).copy_from(z);
    v
}

pub fn projector_from_chart(chart: &GrassmannChart) -> HermitianProjector {
    let v = frame_of_chart(&chart.z);
    let p = chart.z.ncols();
    let inner = (CMat::identity(p, p) + chart.z.adjoint() * &chart.z).try_inverse().expect("1 + Z†Z is positive");
    let m = &v * inner * v.adjoint();
    let m = (&m + m.adjoint()).scale(0.5);
    HermitianProjector { p, m }
}

/// Chart coordinates of P in the standard chart: Z = V_bot V_top⁻¹ for any frame V of im P.
pub fn chart_of(proj: &HermitianProjector) -> Result<GrassmannChart> {
    let (n, p) = (proj.n(), proj.p);
    let frame = image_frame(proj);
    let top = frame.rows(0, p).into_owned();
    let sv = top.clone().svd(false, false).singular_values;
    if sv.min() < 1e-8 {
        return Err(GeomError::Precondition("projector lies outside the standard chart".into()));
    }
    let z = frame.rows(p, n - p) * top.try_inverse().ok_or(GeomError::Singular(0))?;
    Ok(GrassmannChart { z })
}

/// Row subset whose p×p block of the image frame is best conditioned,
/// together with the chart coordinates after moving those rows to the top.
pub fn best_chart(proj: &HermitianProjector) -> (Vec<usize>, GrassmannChart) {
    let (n, p) = (proj.n(), proj.p);
    let frame = image_frame(proj);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for rows in subsets(n, p) {
        let block = CMat::from_fn(p, p, |i, j| frame[(rows[i], j)]);
        let s = block.svd(false, false).singular_values.min();
        if s > best.0 {
            best = (s, rows);
        }
    }
    let rows = best.1;
    let order: Vec<usize> = rows.iter().copied().chain((0..n).filter(|r| !rows.contains(r))).collect();
    let perm = CMat::from_fn(n, n, |i, j| if order[i] == j { c(1.0) } else { c(0.0) });
    let moved = HermitianProjector { p, m: &perm * &proj.m * perm.adjoint() };
    let chart = chart_of(&moved).expect("best block is invertible");
    (rows, chart)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
}

/// Orthonormal basis of im P (eigenvectors of eigenvalue 1).
fn image_frame(proj: &HermitianProjector) -> CMat {
    let eig = proj.m.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..proj.n()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    CMat::from_fn(proj.n(), proj.p, |i, j| eig.eigenvectors[(i, idx[j])])
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub a: CMat,
}

fn check_hermitian(a: &CMat) -> Result<()> {
    if max_abs(&(a - a.adjoint())) > 1e-9 * (1.0 + max_abs(a)) {
        return Err(GeomError::InvalidInput("matrix is not Hermitian".into()));
    }
    Ok(())
}

/// `[P, [P, A]] = PA(1−P) + (1−P)AP`.
pub fn tangent_project(proj: &HermitianProjector, a: &CMat) -> Result<TangentVector> {
    check_hermitian(a)?;
    Ok(TangentVector { a: commutator(&proj.m, &commutator(&proj.m, a)) })
}

pub fn is_tangent(proj: &HermitianProjector, a: &CMat, tol: f64) -> bool {
    max_abs(&(a - commutator(&proj.m, &commutator(&proj.m, a)))) <= tol * (1.0 + max_abs(a))
}

/// `J_P(A) = −i[P, A]`.
pub fn almost_complex(proj: &HermitianProjector, t: &TangentVector) -> Result<TangentVector> {
    if !is_tangent(proj, &t.a, 1e-9) {
        return Err(GeomError::Precondition("vector is not tangent at P".into()));
    }
    Ok(TangentVector { a: commutator(&proj.m, &t.a) * Complex64::new(0.0, -1.0) })
}

/// `F = log det(1 + Z†Z)`.
pub fn kahler_potential(chart: &GrassmannChart) -> f64 {
    let p = chart.z.ncols();
    (CMat::identity(p, p) + chart.z.adjoint() * &chart.z).determinant().re.ln()
}

/// `V (V†V)⁻¹ V†` as a jet, for a frame jet V.
pub fn frame_projector_jet(v: &Jet<CMat>) -> Option<Jet<CMat>> {
    let gram = v.adjoint().mul(v);
    Some(v.mul(&gram.inverse()?).mul(&v.adjoint()))
}

/// Projector jet of a chart jet `Z`.
pub fn projector_jet(z: &Jet<CMat>) -> Jet<CMat> {
    let (q, p) = (z.c[0].nrows(), z.c[0].ncols());
    let mut v = z.map(|m| {
        let mut out = CMat::zeros(p + q, p);
        out.view_mut((p, 0), (q, p)).copy_from(m);
        out
    });
    v.c[0].view_mut((0, 0), (p, p)).copy_from(&CMat::identity(p, p));
    frame_projector_jet(&v).expect("chart frames have full rank")
}

fn one_forms(dp: &[CMat]) -> ExteriorForm<CMat> {
    ExteriorForm::from_coeffs(dp.len(), 1, dp.to_vec()).expect("one coefficient per direction")
}

/// `ψ = Tr(dP ∧ [P, dP])` from the partials of P at a point.
pub fn psi_form(p: &CMat, dp: &[CMat]) -> ExteriorForm<Complex64> {
    let d = one_forms(dp);
    let comm = d.map(|x| commutator(p, x));
    d.wedge(&comm).map(|m| m.trace())
}

/// `Tr(P dP ∧ dP)` from the partials of P at a point.
pub fn p_dp_dp(p: &CMat, dp: &[CMat]) -> ExteriorForm<Complex64> {
    let d = one_forms(dp);
    d.wedge(&d).lmul(p).map(|m| m.trace())
}

/// Ratio of ψ to `2 Tr(P dP∧dP)`, read off at the largest component.
pub fn psi_factor(p: &CMat, dp: &[CMat]) -> Option<Complex64> {
    let a = psi_form(p, dp);
    let b = p_dp_dp(p, dp).scale(2.0);
    let (k, bmax) = b.coeffs.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))?;
    (bmax.norm() > 1e-12).then(|| a.coeffs[k] / bmax)
}

/// Max-norm of dψ over interior nodes, for a projector field on a box of dimension ≥ 3.
pub fn fundamental_form_closure(field: &GridField<CMat>) -> Result<f64> {
    let m = field.spec.dim();
    if m < 3 {
        return Err(GeomError::Precondition(format!("dψ is a 3-form; the field has {m} parameters")));
    }
    if field.spec.shape.iter().any(|&s| s < 5) {
        return Err(GeomError::Precondition("need at least 5 samples per axis".into()));
    }
    let partials: Vec<Vec<CMat>> = (0..m).map(|a| grid_partial(field, a)).collect();
    let psi = GridField {
        spec: field.spec.clone(),
        values: (0..field.values.len())
            .map(|k| {
                let dp: Vec<CMat> = partials.iter().map(|d| d[k].clone()).collect();
                psi_form(&field.values[k], &dp)
            })
            .collect(),
        flagged_margin: 1,
    };
    let dpsi = exterior_derivative(&psi, &DScheme::Central)?;
    Ok(interior_max(&dpsi, 2, form_max_norm))
}

/// `∂²f/∂z_α∂z̄_β` by central differences with step h.
pub fn wirtinger_hessian(f: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> CMat {
    let n = z.len();
    let eval = |shift: &[(usize, f64)]| {
        let mut x: Vec<f64> = z.iter().flat_map(|w| [w.re, w.im]).collect();
        for &(i, d) in shift {
            x[i] += d;
        }
        let pt: Vec<Complex64> = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        f(&pt)
    };
    let m = 2 * n;
    let mut hess = vec![vec![0.0; m]; m];
    let f0 = eval(&[]);
    for i in 0..m {
        for j in i..m {
            let v = if i == j {
                (eval(&[(i, h)]) - 2.0 * f0 + eval(&[(i, -h)])) / (h * h)
            } else {
                (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)]) + eval(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            };
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    // ∂_α∂̄_β = ¼ (∂x_α − i∂y_α)(∂x_β + i∂y_β)
    CMat::from_fn(n, n, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        Complex64::new(hess[xa][xb] + hess[ya][yb], hess[xa][yb] - hess[ya][xb]) * 0.25
    })
}

/// `R_{αβ̄} = −∂_α∂̄_β log det G` with `G = ∂∂̄F`, by nested central differences.
pub fn ricci_from_potential(f: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h_inner: f64, h_outer: f64) -> Result<CMat> {
    let g0 = wirtinger_hessian(f, z, h_inner);
    let eig = g0.clone().symmetric_eigen().eigenvalues;
    if eig.iter().any(|&e| e <= 0.0) {
        return Err(GeomError::Precondition("∂∂̄F is not positive definite".into()));
    }
    let logdet = |w: &[Complex64]| wirtinger_hessian(f, w, h_inner).determinant().re.ln();
    Ok(-wirtinger_hessian(&logdet, z, h_outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::tensor::{ComplexCoeff, GridSpec, JetSpace};
    use proptest::prelude::*;

    fn cm(rows: usize, cols: usize, v: &[(f64, f64)]) -> CMat {
        CMat::from_row_slice(rows, cols, &v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>())
    }

    #[test]
    fn chart_origin_and_hand_value() {
        let p0 = projector_from_chart(&GrassmannChart { z: CMat::zeros(2, 2) });
        let mut d = CMat::zeros(4, 4);
        d[(0, 0)] = c(1.0);
        d[(1, 1)] = c(1.0);
        assert_eq!(p0.m, d);
        let p1 = projector_from_chart(&GrassmannChart { z: cm(1, 1, &[(1.0, 0.0)]) });
        assert!(max_abs(&(p1.m - cm(2, 2, &[(0.5, 0.0); 4]))) < 1e-15);
    }

    #[test]
    fn random_chart_projectors_are_valid() {
        let mut rng = seeded(11, "projgeo-chart");
        for (n, p) in [(2, 1), (3, 1), (4, 2), (5, 2)] {
            for _ in 0..20 {
                let z = gaussian_c(&mut rng, n - p, p);
                let proj = projector_from_chart(&GrassmannChart { z: z.clone() });
                assert!(HermitianProjector::new(proj.m.clone(), p).is_ok());
                let back = chart_of(&proj).unwrap();
                assert!(max_abs(&(back.z - &z)) < 1e-9 * (1.0 + max_abs(&z)));
                assert!(max_abs(&(projector_from_chart(&chart_of(&proj).unwrap()).m - &proj.m)) < 1e-10);
            }
        }
    }

    #[test]
    fn chart_rejects_and_best_chart_recovers() {
        // the plane spanned by e₂ is outside the standard chart of ℂP²
        let mut m = CMat::zeros(3, 3);
        m[(1, 1)] = c(1.0);
        let proj = HermitianProjector::new(m, 1).unwrap();
        assert!(chart_of(&proj).is_err());
        let (rows, chart) = best_chart(&proj);
        assert_eq!(rows, vec![1]);
        assert!(max_abs(&chart.z) < 1e-12);
    }

    #[test]
    fn tangent_projection_properties() {
        let mut rng = seeded(12, "projgeo-tangent");
        for _ in 0..20 {
            let proj = HermitianProjector::random(&mut rng, 4, 2);
            let herm = |r: &mut SeededRng| {
                let g = gaussian_c(r, 4, 4);
                (&g + g.adjoint()).scale(0.5)
            };
            let (a, b) = (herm(&mut rng), herm(&mut rng));
            let pa = tangent_project(&proj, &a).unwrap().a;
            let pb = tangent_project(&proj, &b).unwrap().a;
            assert!(max_abs(&(tangent_project(&proj, &pa).unwrap().a - &pa)) < 1e-12);
            assert!(((&pa * &b).trace() - (&a * &pb).trace()).norm() < 1e-12);
            assert!(pa.trace().norm() < 1e-12);
        }
        let proj = HermitianProjector::random(&mut rng, 3, 1);
        let shifted = &proj.m - CMat::identity(3, 3).scale(1.0 / 3.0);
        assert!(max_abs(&tangent_project(&proj, &shifted).unwrap().a) < 1e-14);
        assert!(tangent_project(&proj, &cm(3, 3, &[(0.0, 1.0); 9])).is_err());
    }

    #[test]
    fn almost_complex_structure() {
        let p = HermitianProjector::new(cm(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]), 1).unwrap();
        let a = TangentVector { a: cm(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]) };
        let ja = almost_complex(&p, &a).unwrap().a;
        assert!(max_abs(&(ja - cm(2, 2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)]))) < 1e-15);

        let mut rng = seeded(13, "projgeo-j");
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let proj = HermitianProjector::random(&mut rng, 4, 2);
            let g = gaussian_c(&mut rng, 4, 4);
            let t = tangent_project(&proj, &(&g + g.adjoint())).unwrap();
            let jt = almost_complex(&proj, &t).unwrap();
            let jjt = almost_complex(&proj, &jt).unwrap();
            worst = worst.max(max_abs(&(jjt.a + &t.a)));
            let (n1, n2) = ((&t.a * &t.a).trace(), (&jt.a * &jt.a).trace());
            assert!((n1 - n2).norm() < 1e-11 * (1.0 + n1.norm()));
        }
        assert!(worst < 1e-11);
        let bad = TangentVector { a: CMat::identity(2, 2) };
        assert!(almost_complex(&p, &bad).is_err());
    }

    #[test]
    fn potential_values() {
        assert_eq!(kahler_potential(&GrassmannChart { z: CMat::zeros(2, 1) }), 0.0);
        let mut rng = seeded(14, "projgeo-potential");
        let (z1, z2) = (gaussian_c(&mut rng, 2, 1), gaussian_c(&mut rng, 1, 2));
        let mut z = CMat::zeros(3, 3);
        z.view_mut((0, 0), (2, 1)).copy_from(&z1);
        z.view_mut((2, 1), (1, 2)).copy_from(&z2);
        let f = kahler_potential(&GrassmannChart { z });
        let f12 = kahler_potential(&GrassmannChart { z: z1 }) + kahler_potential(&GrassmannChart { z: z2 });
        assert!((f - f12).abs() < 1e-12);
    }

    fn cp1_potential(z: &[Complex64]) -> f64 {
        (1.0 + z[0].norm_sqr()).ln()
    }

    fn projector_partials(z: &CMat) -> (Vec<CMat>, Vec<CMat>) {
        // ∂P/∂z_k and ∂P/∂z̄_k for each entry of Z, from exact jets
        let (q, p) = (z.nrows(), z.ncols());
        let space = JetSpace::new(2 * q * p, 1);
        let x0: Vec<f64> = (0..q * p).flat_map(|k| [z[(k / p, k % p)].re, z[(k / p, k % p)].im]).collect();
        let vars = Jet::vars(&space, &x0);
        let mut zj = Jet::constant(&space, CMat::zeros(q, p));
        for k in 0..q * p {
            let w = vars[2 * k].to_complex().add(&vars[2 * k + 1].to_complex().scale_c(Complex64::i()));
            let mut e = CMat::zeros(q, p);
            e[(k / p, k % p)] = c(1.0);
            zj = zj.add(&Jet::scalar_times(&w, &e));
        }
        let pj = projector_jet(&zj);
        let dz = (0..q * p).map(|k| pj.dz(2 * k, 2 * k + 1).c[0].clone()).collect();
        let dzb = (0..q * p).map(|k| pj.dzbar(2 * k, 2 * k + 1).c[0].clone()).collect();
        (dz, dzb)
    }

    #[test]
    fn potential_hessian_is_induced_metric() {
        let g = wirtinger_hessian(&cp1_potential, &[c(0.0)], 1e-3);
        assert!((g[(0, 0)] - c(1.0)).norm() < 1e-6);
        let (dz, dzb) = projector_partials(&CMat::zeros(1, 1));
        let tr = (&dz[0] * &dzb[0]).trace();
        assert!((tr - g[(0, 0)]).norm() < 1e-6);
        // ds² = Tr(dP²) along ∂/∂x equals 2 ∂∂̄F
        let dx = &dz[0] + &dzb[0];
        assert!(((&dx * &dx).trace() - g[(0, 0)] * 2.0).norm() < 2e-6);

        // Grassmannian: ∂_{(ij)}∂̄_{(kl)} F = Tr(∂P ∂̄P) at a random chart point
        let mut rng = seeded(15, "projgeo-metric");
        let z = gaussian_c(&mut rng, 2, 2).scale(0.5);
        let zc = z.clone();
        let pot = move |w: &[Complex64]| kahler_potential(&GrassmannChart { z: CMat::from_row_slice(2, 2, w) });
        let flat: Vec<Complex64> = (0..4).map(|k| zc[(k / 2, k % 2)]).collect();
        let hess = wirtinger_hessian(&pot, &flat, 1e-3);
        let (dz, dzb) = projector_partials(&z);
        for a in 0..4 {
            for b in 0..4 {
                let t = (&dz[a] * &dzb[b]).trace();
                assert!((t - hess[(a, b)]).norm() < 1e-5, "{a}{b}");
            }
        }
    }

    #[test]
    fn ricci_of_fubini_study() {
        let mut ratios = Vec::new();
        for z in [c(0.0), Complex64::new(0.5, 0.3), Complex64::new(-1.2, 0.7)] {
            let r = ricci_from_potential(&cp1_potential, &[z], 1e-3, 1e-2).unwrap();
            let g = wirtinger_hessian(&cp1_potential, &[z], 1e-3);
            ratios.push((r[(0, 0)] / g[(0, 0)]).re);
        }
        for r in &ratios {
            assert!((r - 2.0).abs() < 1e-3, "{ratios:?}");
        }
        let flat = |z: &[Complex64]| z.iter().map(|w| w.norm_sqr()).sum::<f64>();
        let r = ricci_from_potential(&flat, &[c(0.3), c(-0.2)], 1e-3, 1e-2).unwrap();
        assert!(max_abs(&r) < 1e-6);
        let concave = |z: &[Complex64]| -z[0].norm_sqr();
        assert!(ricci_from_potential(&concave, &[c(0.0)], 1e-3, 1e-2).is_err());
    }

    fn g42_family(t: &[f64]) -> CMat {
        let z = cm(
            2,
            2,
            &[(0.5 * t[0], 0.2 * t[1]), (0.3 * t[2] * t[0], -0.4 * t[1]), (0.5 * t[1] + 0.2, 0.4 * t[2]), (0.3 * t[0] * t[0], 0.3 * t[2])],
        );
        projector_from_chart(&GrassmannChart { z }).m
    }

    #[test]
    fn fundamental_form_is_closed() {
        let konst = GridField::sample(GridSpec::cube(3, 0.0, 1.0, 7), |_| g42_family(&[0.1, 0.2, 0.3]));
        assert_eq!(fundamental_form_closure(&konst).unwrap(), 0.0);
        let mut errs = Vec::new();
        for n in [33, 65] {
            let f = GridField::sample(GridSpec::cube(3, 0.0, 1.0, n), g42_family);
            errs.push(fundamental_form_closure(&f).unwrap());
        }
        assert!(errs[1] < 1e-4, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
        let flat = GridField::sample(GridSpec::cube(2, 0.0, 1.0, 9), |t| g42_family(&[t[0], t[1], 0.0]));
        assert!(fundamental_form_closure(&flat).is_err());
    }

    #[test]
    fn psi_relative_factor_and_odd_trace() {
        let space = JetSpace::new(3, 1);
        let mut rng = seeded(16, "projgeo-psi");
        for _ in 0..5 {
            let x0: Vec<f64> = (0..3).map(|_| crate::rng::normal(&mut rng) * 0.5).collect();
            let vars = Jet::vars(&space, &x0);
            let (e0, e1, e2) = (gaussian_c(&mut rng, 2, 2), gaussian_c(&mut rng, 2, 2), gaussian_c(&mut rng, 2, 2));
            let z = Jet::scalar_times(&vars[0].to_complex(), &e0)
                .add(&Jet::scalar_times(&vars[1].to_complex(), &e1))
                .add(&Jet::scalar_times(&vars[2].to_complex(), &e2));
            let p = projector_jet(&z);
            let dp: Vec<CMat> = (0..3).map(|v| p.partial(v).c[0].clone()).collect();
            let f = psi_factor(&p.c[0], &dp).unwrap();
            assert!((f - c(-1.0)).norm() < 1e-10, "{f}");
            let t = (&dp[0] * &dp[1] * &dp[2]).trace() - (&dp[0] * &dp[2] * &dp[1]).trace();
            // Tr(dP∧dP∧dP) component is purely imaginary
            assert!(t.re.abs() < 1e-10 * (1.0 + t.norm()));
        }
    }

    #[test]
    fn rank_one_derivative_is_off_diagonal() {
        let space = JetSpace::new(2, 1);
        let mut rng = seeded(17, "projgeo-offdiag");
        for _ in 0..10 {
            let vars = Jet::vars(&space, &[crate::rng::normal(&mut rng), crate::rng::normal(&mut rng)]);
            let (a, b) = (gaussian_c(&mut rng, 3, 1), gaussian_c(&mut rng, 3, 1));
            let z = Jet::scalar_times(&vars[0].to_complex(), &a).add(&Jet::scalar_times(&vars[1].to_complex().mul(&vars[1].to_complex()), &b));
            let p = projector_jet(&z);
            let (p0, q0) = (p.c[0].clone(), CMat::identity(4, 4) - &p.c[0]);
            for v in 0..2 {
                let d = p.partial(v).c[0].clone();
                assert!(max_abs(&(&p0 * &d * &p0)) < 1e-10);
                assert!(max_abs(&(&q0 * &d * &q0)) < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn projector_invariants_hold(re in prop::collection::vec(-3.0f64..3.0, 6), im in prop::collection::vec(-3.0f64..3.0, 6)) {
            let z = CMat::from_fn(3, 2, |i, j| Complex64::new(re[i * 2 + j], im[i * 2 + j]));
            let proj = projector_from_chart(&GrassmannChart { z });
            prop_assert!(max_abs(&(&proj.m - proj.m.adjoint())) < 1e-12);
            prop_assert!(max_abs(&(&proj.m * &proj.m - &proj.m)) < 1e-12);
            prop_assert!((proj.m.trace() - c(2.0)).norm() < 1e-12);
        }
    }
}
