//! Spinors of ℝ^{2ℓ}: a Jordan–Wigner Clifford representation, vacua of isometric
//! complex structures, annihilator spaces, the Fock isometry and chirality.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::jspace::{ComplexStructure, IsometricComplexStructure};
use crate::linalg::{c, max_abs, nullspace, rank_r};
use crate::rng::{self, SeededRng};
use crate::tensor::{CMat, ExteriorForm, RMat};

pub type Spinor = DVector<Complex64>;

pub const MAX_ELL: usize = 6;

/// Hermitian generators `γ_0 … γ_{2ℓ−1}` on ℂ^{2^ℓ}. Basis index bit `k` is the
/// occupation of mode `k`; `γ_k = a_k + a_k†`, `γ_{k+ℓ} = i(a_k† − a_k)`.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub ell: usize,
    pub gammas: Vec<CMat>,
    pub lowering: Vec<CMat>,
}

pub fn build_gamma(ell: usize) -> Result<CliffordRep> {
    if !(1..=MAX_ELL).contains(&ell) {
        return Err(GeomError::InvalidInput(format!("ℓ = {ell} outside 1..={MAX_ELL}")));
    }
    let d = 1usize << ell;
    let lowering: Vec<CMat> = (0..ell)
        .map(|k| {
            let mut a = CMat::zeros(d, d);
            for n in 0..d {
                if n & (1 << k) != 0 {
                    let parity = (n & ((1 << k) - 1)).count_ones();
                    a[(n ^ (1 << k), n)] = c(if parity % 2 == 0 { 1.0 } else { -1.0 });
                }
            }
            a
        })
        .collect();
    let i = Complex64::i();
    let mut gammas = Vec::with_capacity(2 * ell);
    for a in &lowering {
        gammas.push(a + a.adjoint());
    }
    for a in &lowering {
        gammas.push((a.adjoint() - a) * i);
    }
    Ok(CliffordRep { ell, gammas, lowering })
}

impl CliffordRep {
    pub fn dim(&self) -> usize {
        1 << self.ell
    }

    pub fn n(&self) -> usize {
        2 * self.ell
    }

    /// `γ(ω) = Σ ω_i γ_i`, complex linear in `ω`.
    pub fn gamma_of(&self, w: &[Complex64]) -> CMat {
        let d = self.dim();
        self.gammas.iter().zip(w).fold(CMat::zeros(d, d), |acc, (g, &x)| acc + g * x)
    }

    /// Largest deviation from `γ_iγ_j + γ_jγ_i = 2δ_ij` and from hermiticity.
    pub fn clifford_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for (i, gi) in self.gammas.iter().enumerate() {
            worst = worst.max(max_abs(&(gi - gi.adjoint())));
            for (j, gj) in self.gammas.iter().enumerate() {
                let target = if i == j { CMat::identity(d, d) * c(2.0) } else { CMat::zeros(d, d) };
                worst = worst.max(max_abs(&(gi * gj + gj * gi - target)));
            }
        }
        worst
    }

    /// Dimension of `{X : [X, γ_i] = 0 ∀i}`.
    pub fn commutant_dimension(&self) -> usize {
        let d = self.dim();
        let dd = d * d;
        // Σ K_iᵀK_i has the same kernel as the stacked system and stays dd×dd
        let mut gram = CMat::zeros(dd, dd);
        for g in &self.gammas {
            let mut k = CMat::zeros(dd, dd);
            for a in 0..d {
                for b in 0..d {
                    let row = a * d + b;
                    for cc in 0..d {
                        k[(row, a * d + cc)] += g[(cc, b)];
                        k[(row, cc * d + b)] -= g[(a, cc)];
                    }
                }
            }
            gram += k.adjoint() * &k;
        }
        nullspace(&gram, 1e-10).ncols()
    }

    /// Standard Fock vacuum `|0…0⟩`.
    pub fn fock_vacuum(&self) -> Spinor {
        let mut v = Spinor::zeros(self.dim());
        v[0] = c(1.0);
        v
    }

    /// `exp(¼ Σ X_ij γ_iγ_j)` for a real antisymmetric `X`; it conjugates
    /// `γ(v)` to `γ(e^X v)`.
    pub fn spin_lift(&self, x: &RMat) -> CMat {
        let d = self.dim();
        let mut gen = CMat::zeros(d, d);
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j && x[(i, j)] != 0.0 {
                    gen += &self.gammas[i] * &self.gammas[j] * c(0.25 * x[(i, j)]);
                }
            }
        }
        gen.exp()
    }
}

/// Fixes the phase so that the first coordinate above `1e−8` is real positive.
fn normalize_phase(mut v: Spinor) -> Spinor {
    let norm = v.norm();
    v /= c(norm);
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8).copied() {
        v *= z.conj() / z.norm();
    }
    v
}

fn check_ell(rep: &CliffordRep, s: &ComplexStructure) -> Result<()> {
    if s.ell != rep.ell {
        return Err(GeomError::Dimension(format!("J on ℝ^{} with a rep for ℓ = {}", s.n(), rep.ell)));
    }
    Ok(())
}

/// The unit spinor killed by `γ(ω)` for all `ω ∈ Λ^{1,0}E*_J`.
pub fn vacuum_from_j(rep: &CliffordRep, j: &IsometricComplexStructure) -> Result<Spinor> {
    check_ell(rep, j.inner())?;
    let alpha = j.inner().holomorphic_covectors();
    let d = rep.dim();
    let mut stacked = CMat::zeros(d * alpha.ncols(), d);
    for q in 0..alpha.ncols() {
        let w: Vec<Complex64> = alpha.column(q).iter().copied().collect();
        stacked.view_mut((q * d, 0), (d, d)).copy_from(&rep.gamma_of(&w));
    }
    let ker = nullspace(&stacked, 1e-9);
    if ker.ncols() != 1 {
        return Err(GeomError::Precondition(format!("joint kernel has dimension {}", ker.ncols())));
    }
    Ok(normalize_phase(ker.column(0).into_owned()))
}

/// `I(ψ) = {ω ∈ E*_c : γ(ω)ψ = 0}` as orthonormal columns.
#[derive(Clone, Debug)]
pub struct AnnihilatorSpace {
    pub basis: CMat,
    pub simple: bool,
}

impl AnnihilatorSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// max `|(ω, ω′)|` for the bilinear extension of the metric.
    pub fn isotropy_defect(&self) -> f64 {
        max_abs(&(self.basis.transpose() * &self.basis))
    }
}

pub fn annihilator(rep: &CliffordRep, psi: &Spinor) -> Result<AnnihilatorSpace> {
    if psi.norm() < 1e-14 {
        return Err(GeomError::InvalidInput("zero spinor".into()));
    }
    let cols: Vec<Spinor> = rep.gammas.iter().map(|g| g * psi).collect();
    let m = CMat::from_columns(&cols);
    let basis = nullspace(&m, 1e-9);
    let simple = basis.ncols() == rep.ell;
    Ok(AnnihilatorSpace { basis, simple })
}

/// J with `Λ^{1,0}E*_J = I(ψ)`: `Jᵗ = V diag(i, −i) V⁻¹` with `V = [W, W̄]`.
pub fn j_from_simple_spinor(rep: &CliffordRep, psi: &Spinor) -> Result<IsometricComplexStructure> {
    let ann = annihilator(rep, psi)?;
    if !ann.simple {
        return Err(GeomError::Precondition(format!("annihilator has dimension {} < ℓ = {}", ann.dim(), rep.ell)));
    }
    let n = rep.n();
    let ell = rep.ell;
    let w = &ann.basis;
    let v = CMat::from_fn(n, n, |r, k| if k < ell { w[(r, k)] } else { w[(r, k - ell)].conj() });
    let vi = v.clone().try_inverse().ok_or_else(|| GeomError::Numerical("I(ψ) meets its conjugate".into()))?;
    let d = CMat::from_fn(n, n, |r, k| match (r == k, r < ell) {
        (true, true) => Complex64::i(),
        (true, false) => -Complex64::i(),
        _ => c(0.0),
    });
    let jt = &v * d * vi;
    let j = jt.transpose().map(|z| z.re);
    let j = (&j - j.transpose()) * 0.5;
    IsometricComplexStructure::new(j)
}

/// Orthonormal `(0,1)` covectors `ᾱ^q` of an isometric J, as columns.
pub fn antiholomorphic_covectors(j: &IsometricComplexStructure) -> CMat {
    j.inner().holomorphic_covectors().map(|z| z.conj())
}

/// Fock isometry `Φ_J`: `ᾱ^{i1}∧…∧ᾱ^{ik} ↦ 2^{−k/2} γ(ᾱ^{i1})…γ(ᾱ^{ik}) ψ`.
/// `phi[k]` is the degree-k part of an inhomogeneous form.
pub fn fock_pack(
    rep: &CliffordRep,
    j: &IsometricComplexStructure,
    phi: &[ExteriorForm<Complex64>],
    psi: &Spinor,
) -> Result<Spinor> {
    check_ell(rep, j.inner())?;
    let ell = rep.ell;
    let n = rep.n();
    let abar = antiholomorphic_covectors(j);
    let ones: Vec<ExteriorForm<Complex64>> = (0..ell)
        .map(|q| ExteriorForm { n, degree: 1, coeffs: abar.column(q).iter().copied().collect() })
        .collect();
    let ops: Vec<CMat> = (0..ell)
        .map(|q| rep.gamma_of(&abar.column(q).iter().copied().collect::<Vec<_>>()) * c(std::f64::consts::FRAC_1_SQRT_2))
        .collect();
    let mut out = Spinor::zeros(rep.dim());
    for part in phi {
        if part.n != n {
            return Err(GeomError::Dimension(format!("form on ℝ^{} for ℓ = {ell}", part.n)));
        }
        let k = part.degree;
        if k > ell {
            if part.norm() > 1e-10 {
                return Err(GeomError::InvalidInput(format!("degree {k} > ℓ cannot be of type (0,k)")));
            }
            continue;
        }
        let mut residual = part.clone();
        for mask in crate::tensor::basis::basis(ell).by_degree[k].iter() {
            let idx = crate::tensor::basis::indices(*mask);
            let mut b = ExteriorForm { n, degree: 0, coeffs: vec![c(1.0)] };
            let mut v = psi.clone();
            for &q in &idx {
                b = b.wedge(&ones[q]);
            }
            for &q in idx.iter().rev() {
                v = &ops[q] * v;
            }
            let coef = b.hermitian_inner(part);
            residual = residual.sub(&b.scale_c(coef));
            out += v * coef;
        }
        if residual.norm() > 1e-9 * (1.0 + part.norm()) {
            return Err(GeomError::InvalidInput(format!(
                "degree-{k} part has {:.3e} outside Λ^{{0,{k}}}",
                residual.norm()
            )));
        }
    }
    Ok(out)
}

/// `Γ = ±i^ℓ γ_0…γ_{2ℓ−1}` with the sign making the Fock vacuum `+1`, and the
/// projectors `(1 ± Γ)/2`.
#[derive(Clone, Debug)]
pub struct Chirality {
    pub gamma: CMat,
    pub plus: CMat,
    pub minus: CMat,
}

pub fn chirality_split(rep: &CliffordRep) -> Chirality {
    let d = rep.dim();
    let mut g = CMat::identity(d, d) * Complex64::i().powu(rep.ell as u32);
    for gi in &rep.gammas {
        g *= gi;
    }
    let vac = rep.fock_vacuum();
    let sign = (vac.adjoint() * &g * &vac)[(0, 0)].re.signum();
    let gamma = g * c(sign);
    let id = CMat::identity(d, d);
    let plus = (&id + &gamma) * c(0.5);
    let minus = (&id - &gamma) * c(0.5);
    Chirality { gamma, plus, minus }
}

pub fn random_spinor(rng: &mut SeededRng, dim: usize) -> Spinor {
    Spinor::from_fn(dim, |_, _| rng::cnormal(rng))
}

pub fn small_bivector(rng: &mut SeededRng, n: usize, scale: f64) -> RMat {
    let a = rng::gaussian_r(rng, n, n) * scale;
    (&a - a.transpose()) * 0.5
}

/// `‖ψ₁ψ₁† − ψ₂ψ₂†‖∞` for unit-normalized inputs.
pub fn ray_distance(a: &Spinor, b: &Spinor) -> f64 {
    let a = a / c(a.norm());
    let b = b / c(b.norm());
    max_abs(&(&a * a.adjoint() - &b * b.adjoint()))
}

/// Real rank of the differential of `(J, scale, phase) ↦ ψ` at the Fock vacuum.
pub fn simple_cone_tangent_rank(rep: &CliffordRep) -> usize {
    let n = rep.n();
    let vac = rep.fock_vacuum();
    let mut cols: Vec<Spinor> = vec![vac.clone(), &vac * Complex64::i()];
    for i in 0..n {
        for j in (i + 1)..n {
            let gen = &rep.gammas[i] * &rep.gammas[j] * c(0.5);
            cols.push(gen * &vac);
        }
    }
    let d = rep.dim();
    let real = RMat::from_fn(2 * d, cols.len(), |r, k| if r < d { cols[k][r].re } else { cols[k][r - d].im });
    rank_r(&real, 1e-10)
}

/// Roundtrip summary used by the CLI: max `‖ΔJ‖` and max ray distance over samples.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RoundtripReport {
    pub ell: usize,
    pub samples: usize,
    pub max_j_error: f64,
    pub max_ray_error: f64,
    pub min_annihilator_dim: usize,
}

pub fn roundtrip(ell: usize, samples: usize, seed: u64) -> Result<RoundtripReport> {
    let rep = build_gamma(ell)?;
    let mut g = rng::seeded(seed, "spinor.roundtrip");
    let (mut je, mut re, mut dmin) = (0.0f64, 0.0f64, usize::MAX);
    for k in 0..samples {
        let j = IsometricComplexStructure::random(&mut g, ell, if k % 2 == 0 { 1 } else { -1 });
        let psi = vacuum_from_j(&rep, &j)?;
        dmin = dmin.min(annihilator(&rep, &psi)?.dim());
        let back = j_from_simple_spinor(&rep, &psi)?;
        je = je.max(crate::linalg::max_abs_r(&(&back.0.j - &j.0.j)));
        re = re.max(ray_distance(&vacuum_from_j(&rep, &back)?, &psi));
    }
    Ok(RoundtripReport { ell, samples, max_j_error: je, max_ray_error: re, min_annihilator_dim: dmin })
}

/// The basis `ᾱ^{q₁}∧…∧ᾱ^{q_k}` of Λ^{0,*}, one single-degree form per entry.
pub fn fock_basis(j: &IsometricComplexStructure, ell: usize) -> Vec<Vec<ExteriorForm<Complex64>>> {
    let n = 2 * ell;
    let abar = antiholomorphic_covectors(j);
    let mut out = Vec::new();
    for k in 0..=ell {
        for mask in crate::tensor::basis::basis(ell).by_degree[k].iter() {
            let mut b = ExteriorForm { n, degree: 0, coeffs: vec![c(1.0)] };
            for q in crate::tensor::basis::indices(*mask) {
                b = b.wedge(&ExteriorForm { n, degree: 1, coeffs: abar.column(q).iter().copied().collect() });
            }
            out.push(vec![b]);
        }
    }
    out
}

/// `max |G†G − 1|` for the Fock images of [`fock_basis`] at the vacuum of `j`.
pub fn fock_gram_defect(rep: &CliffordRep, j: &IsometricComplexStructure) -> Result<f64> {
    let psi = vacuum_from_j(rep, j)?;
    let images: Vec<Spinor> =
        fock_basis(j, rep.ell).iter().map(|f| fock_pack(rep, j, f, &psi)).collect::<Result<_>>()?;
    let m = CMat::from_columns(&images);
    let d = rep.dim();
    Ok(max_abs(&(m.adjoint() * &m - CMat::identity(d, d))))
}
