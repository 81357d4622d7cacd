//! Complex structures on ℝ^{2ℓ}: the spaces I(E) ⊃ H(E), orientation, types of
//! forms, the self-duality criterion, the polar retraction I → H, the fibration
//! H(ℝ^{2ℓ+2}) → S^{2ℓ} and the Nijenhuis tensor of J-fields.
//!
//! Matrices act on column vectors: `J e_j = Σ_k J[(k, j)] e_k`, so `J^k_j = J[(k, j)]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg::{c, max_abs_r, nullspace, pfaffian, rank_r, sym_apply, to_complex};
use crate::rng::{self, SeededRng};
use crate::tensor::basis::{basis, binomial};
use crate::tensor::{grid_partial, CMat, ExteriorForm, FrameMetric, GridField, RMat};

const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    pub ell: usize,
    pub j: RMat,
}

impl ComplexStructure {
    pub fn new(j: RMat) -> Result<Self> {
        let n = j.nrows();
        if n != j.ncols() || n == 0 || n % 2 == 1 {
            return Err(GeomError::Dimension(format!("complex structure must be 2ℓ×2ℓ, got {}×{}", n, j.ncols())));
        }
        let defect = max_abs_r(&(&j * &j + RMat::identity(n, n)));
        if defect > STRUCTURE_TOL {
            return Err(GeomError::Precondition(format!("‖J²+1‖ = {defect:.3e}")));
        }
        Ok(ComplexStructure { ell: n / 2, j })
    }

    /// `J₀ = [[0, −I], [I, 0]]`, so `J₀ e_k = e_{k+ℓ}`.
    pub fn standard(ell: usize) -> Self {
        let n = 2 * ell;
        let mut j = RMat::zeros(n, n);
        for k in 0..ell {
            j[(k + ell, k)] = 1.0;
            j[(k, k + ell)] = -1.0;
        }
        ComplexStructure { ell, j }
    }

    pub fn n(&self) -> usize {
        2 * self.ell
    }

    pub fn neg(&self) -> Self {
        ComplexStructure { ell: self.ell, j: -&self.j }
    }

    /// `G J G⁻¹`.
    pub fn conjugate_by(&self, g: &RMat) -> Result<Self> {
        let gi = g.clone().try_inverse().ok_or(GeomError::Singular(0))?;
        Ok(ComplexStructure { ell: self.ell, j: g * &self.j * gi })
    }

    pub fn is_isometric(&self) -> bool {
        max_abs_r(&(self.j.transpose() + &self.j)) <= STRUCTURE_TOL
    }

    /// Covectors of type (1,0): columns spanning `{ω : ω∘J = iω}`, i.e. the
    /// `+i` eigenspace of `Jᵗ`.
    pub fn holomorphic_covectors(&self) -> CMat {
        let n = self.n();
        let a = to_complex(&self.j.transpose()) - CMat::identity(n, n) * Complex64::i();
        nullspace(&a, 1e-9)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsometricComplexStructure(pub ComplexStructure);

impl IsometricComplexStructure {
    pub fn new(j: RMat) -> Result<Self> {
        let s = ComplexStructure::new(j)?;
        let skew = max_abs_r(&(s.j.transpose() + &s.j));
        if skew > STRUCTURE_TOL {
            return Err(GeomError::Precondition(format!("‖Jᵗ+J‖ = {skew:.3e}")));
        }
        Ok(IsometricComplexStructure(s))
    }

    pub fn standard(ell: usize) -> Self {
        IsometricComplexStructure(ComplexStructure::standard(ell))
    }

    /// `R J₀ Rᵗ` for a Haar rotation `R`; the sign picks H₊ or H₋.
    pub fn random(rng: &mut SeededRng, ell: usize, orientation: i8) -> Self {
        let mut r = rng::special_orthogonal(rng, 2 * ell);
        if orientation < 0 {
            r.column_mut(0).neg_mut();
        }
        let j0 = ComplexStructure::standard(ell).j;
        let j = &r * j0 * r.transpose();
        // symmetrize away rounding so the antisymmetry check is exact
        let j = (&j - j.transpose()) * 0.5;
        IsometricComplexStructure(ComplexStructure { ell, j })
    }

    pub fn inner(&self) -> &ComplexStructure {
        &self.0
    }
}

/// Random element of I(ℝ^{2ℓ}): `G J₀ G⁻¹` with `G` Gaussian, well conditioned.
pub fn random_structure(rng: &mut SeededRng, ell: usize) -> ComplexStructure {
    let n = 2 * ell;
    loop {
        let g = RMat::identity(n, n) + rng::gaussian_r(rng, n, n) * 0.4;
        let sv = g.clone().svd(false, false).singular_values;
        if sv.min() > 0.2 {
            return ComplexStructure::standard(ell).conjugate_by(&g).expect("conditioned");
        }
    }
}

/// Orientation of `J`: the sign of `det(e_{i1}…e_{iℓ}, Je_{i1}…Je_{iℓ})`, with
/// the `e_i` taken greedily from the standard basis as a complex basis of `E_J`.
pub fn orientation(s: &ComplexStructure) -> i8 {
    let n = s.n();
    let mut picked: Vec<usize> = Vec::new();
    for i in 0..n {
        if picked.len() == s.ell {
            break;
        }
        let mut cols: Vec<usize> = picked.clone();
        cols.push(i);
        let m = real_frame(s, &cols);
        if rank_r(&m, 1e-9) == 2 * cols.len() {
            picked = cols;
        }
    }
    let det = real_frame(s, &picked).determinant();
    if det > 0.0 {
        1
    } else {
        -1
    }
}

fn real_frame(s: &ComplexStructure, cols: &[usize]) -> RMat {
    let n = s.n();
    let mut m = RMat::zeros(n, 2 * cols.len());
    for (a, &i) in cols.iter().enumerate() {
        m[(i, a)] = 1.0;
        m.column_mut(cols.len() + a).copy_from(&s.j.column(i));
    }
    m
}

/// `sign(Pf J) · (−1)^{ℓ(ℓ+1)/2}`; agrees with [`orientation`] on H(E).
pub fn pfaffian_orientation(s: &IsometricComplexStructure) -> i8 {
    let ell = s.0.ell;
    let pf = pfaffian(&s.0.j);
    let sign = if (ell * (ell + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    if pf * sign > 0.0 {
        1
    } else {
        -1
    }
}

/// The tangent space `{A : AJ + JA = 0}` of I(E) at `J`, and its intersection
/// with the antisymmetric matrices (tangent to H(E) when `J` is isometric).
pub fn tangent_dimensions(s: &ComplexStructure) -> (usize, usize) {
    let n = s.n();
    let nn = n * n;
    // vec(A) with A[(a,b)] at index a*n + b
    let mut anti = RMat::zeros(nn, nn);
    for a in 0..n {
        for b in 0..n {
            let row = a * n + b;
            for k in 0..n {
                anti[(row, a * n + k)] += s.j[(k, b)];
                anti[(row, k * n + b)] += s.j[(a, k)];
            }
        }
    }
    let full = nn - rank_r(&anti, 1e-10);
    let mut stacked = RMat::zeros(2 * nn, nn);
    stacked.view_mut((0, 0), (nn, nn)).copy_from(&anti);
    for a in 0..n {
        for b in 0..n {
            stacked[(nn + a * n + b, a * n + b)] += 1.0;
            stacked[(nn + a * n + b, b * n + a)] += 1.0;
        }
    }
    (full, nn - rank_r(&stacked, 1e-10))
}

fn covector(v: &[Complex64]) -> ExteriorForm<Complex64> {
    ExteriorForm { n: v.len(), degree: 1, coeffs: v.to_vec() }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    basis(n).by_degree[k].iter().map(|&m| crate::tensor::basis::indices(m)).collect()
}

/// Projector onto `Λ^{r,s}_J` inside `Λ^{r+s}E*_c`, acting on coefficient
/// vectors in the lexicographic monomial basis.
#[derive(Clone, Debug)]
pub struct PureTypeProjector {
    pub r: usize,
    pub s: usize,
    pub n: usize,
    pub matrix: CMat,
}

impl PureTypeProjector {
    pub fn apply(&self, w: &ExteriorForm<Complex64>) -> Result<ExteriorForm<Complex64>> {
        if w.n != self.n || w.degree != self.r + self.s {
            return Err(GeomError::Dimension(format!(
                "degree-{} form on ℝ^{} for a ({},{}) projector on ℝ^{}",
                w.degree, w.n, self.r, self.s, self.n
            )));
        }
        let v = nalgebra::DVector::from_vec(w.coeffs.clone());
        let out = &self.matrix * v;
        Ok(ExteriorForm { n: w.n, degree: w.degree, coeffs: out.iter().copied().collect() })
    }

    pub fn rank(&self) -> usize {
        crate::linalg::rank(&self.matrix, 1e-9)
    }
}

/// All projectors `P^{r,s}` with `r + s = k`, indexed by `r`.
pub fn type_projectors(s: &ComplexStructure, k: usize) -> Result<Vec<PureTypeProjector>> {
    let ell = s.ell;
    let n = s.n();
    if k > n {
        return Err(GeomError::InvalidInput(format!("degree {k} exceeds 2ℓ = {n}")));
    }
    let alpha = s.holomorphic_covectors();
    if alpha.ncols() != ell {
        return Err(GeomError::Numerical(format!("+i eigenspace of Jᵗ has dimension {}", alpha.ncols())));
    }
    let a: Vec<ExteriorForm<Complex64>> =
        (0..ell).map(|q| covector(&alpha.column(q).iter().copied().collect::<Vec<_>>())).collect();
    let abar: Vec<ExteriorForm<Complex64>> = a.iter().map(|f| f.conj()).collect();
    let dim = binomial(n, k);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    let mut types: Vec<usize> = Vec::with_capacity(dim);
    let one = ExteriorForm { n, degree: 0, coeffs: vec![c(1.0)] };
    for r in 0..=k.min(ell) {
        let sdeg = k - r;
        if sdeg > ell {
            continue;
        }
        for hi in subsets(ell, r) {
            for lo in subsets(ell, sdeg) {
                let mut w = one.clone();
                for &i in &hi {
                    w = w.wedge(&a[i]);
                }
                for &i in &lo {
                    w = w.wedge(&abar[i]);
                }
                cols.push(w.coeffs);
                types.push(r);
            }
        }
    }
    let b = CMat::from_fn(dim, dim, |i, j| cols[j][i]);
    let binv = b.clone().try_inverse().ok_or_else(|| GeomError::Numerical("type basis is singular".into()))?;
    Ok((0..=k)
        .map(|r| {
            let mask = CMat::from_fn(dim, dim, |i, j| if i == j && types[i] == r { c(1.0) } else { c(0.0) });
            PureTypeProjector { r, s: k - r, n, matrix: &b * mask * &binv }
        })
        .collect())
}

pub fn pure_type_projector(s: &ComplexStructure, r: usize, t: usize) -> Result<PureTypeProjector> {
    let mut all = type_projectors(s, r + t)?;
    Ok(all.swap_remove(r))
}

/// `i^ℓ ⋆Ω` for the Euclidean metric and orientation `dx¹∧…∧dx^{2ℓ}`, where
/// `⋆β ∧ α = (α, β) vol`. On ℓ-forms `⋆ = (−1)^ℓ *` with the library star, and
/// this ordering makes `i^ℓ⋆` act by +1 on `Λ^{0,ℓ}_J` for every `J ∈ H₊`.
pub fn twisted_star(w: &ExteriorForm<Complex64>) -> ExteriorForm<Complex64> {
    let ell = w.n / 2;
    let phase = (-Complex64::i()).powu(ell as u32);
    w.star(&FrameMetric::euclidean(w.n)).scale_c(phase)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideReport {
    /// +1 for H₊, −1 for H₋.
    pub side: i8,
    /// `‖Ω + side·i^ℓ*Ω‖`.
    pub condition_residual: f64,
    pub condition_holds: bool,
    pub max_projection: f64,
    pub violating_found: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub ell: usize,
    pub samples: usize,
    pub plus: SideReport,
    pub minus: SideReport,
}

impl LemmaReport {
    pub fn consistent(&self) -> bool {
        self.plus.consistent && self.minus.consistent
    }
}

/// Samples J ∈ H₊ and J ∈ H₋ and compares `P^{0,ℓ}_J Ω = 0` with the
/// condition `Ω ± i^ℓ*Ω = 0`.
pub fn selfduality_pure_equivalence(w: &ExteriorForm<Complex64>, samples: usize, seed: u64) -> Result<LemmaReport> {
    if w.n % 2 == 1 {
        return Err(GeomError::Precondition(format!("odd total dimension {}", w.n)));
    }
    let ell = w.n / 2;
    if w.degree != ell {
        return Err(GeomError::InvalidInput(format!("Ω has degree {} but ℓ = {ell}", w.degree)));
    }
    let scale = 1.0 + w.norm();
    let ts = twisted_star(w);
    let side = |sign: i8| -> Result<SideReport> {
        let cond = if sign > 0 { w.add(&ts) } else { w.sub(&ts) };
        let condition_residual = cond.norm();
        let condition_holds = condition_residual <= 1e-12 * scale;
        let stream = if sign > 0 { "jspace.lemma77.plus" } else { "jspace.lemma77.minus" };
        let norms: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|k| {
                let mut g = rng::seeded(seed.wrapping_add(k as u64), stream);
                let j = IsometricComplexStructure::random(&mut g, ell, sign);
                debug_assert_eq!(orientation(j.inner()), sign);
                let p = pure_type_projector(j.inner(), 0, ell)?;
                Ok(p.apply(w)?.norm())
            })
            .collect::<Result<_>>()?;
        let max_projection = norms.iter().copied().fold(0.0, f64::max);
        let violating_found = max_projection > 1e-6 * scale;
        let consistent = if condition_holds { max_projection < 1e-9 * scale } else { violating_found };
        Ok(SideReport { side: sign, condition_residual, condition_holds, max_projection, violating_found, consistent })
    };
    Ok(LemmaReport { ell, samples, plus: side(1)?, minus: side(-1)? })
}

/// Polar path `J_τ = J₀ e^{τS}` with `S = ½ log(JᵗJ)` and `J₀ = J e^{−S}`.
#[derive(Clone, Debug)]
pub struct PolarPath {
    pub s: RMat,
    pub j0: RMat,
    pub ell: usize,
}

impl PolarPath {
    pub fn new(st: &ComplexStructure) -> Result<Self> {
        let jtj = st.j.transpose() * &st.j;
        let jtj = (&jtj + jtj.transpose()) * 0.5;
        let eig = jtj.clone().symmetric_eigen();
        if eig.eigenvalues.min() <= 0.0 {
            return Err(GeomError::Numerical("JᵗJ is not positive definite".into()));
        }
        let s = sym_apply(&jtj, |x| 0.5 * x.ln());
        let j0 = &st.j * sym_apply(&s, |x| (-x).exp());
        Ok(PolarPath { s, j0, ell: st.ell })
    }

    pub fn at(&self, tau: f64) -> ComplexStructure {
        ComplexStructure { ell: self.ell, j: &self.j0 * sym_apply(&self.s, |x| (tau * x).exp()) }
    }
}

pub fn polar_retract(st: &ComplexStructure, tau: f64) -> Result<ComplexStructure> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(GeomError::InvalidInput(format!("τ = {tau} outside [0, 1]")));
    }
    Ok(PolarPath::new(st)?.at(tau))
}

/// `J = [[J̃, u], [−uᵗ, 0]]` on ℝ^{2ℓ+2}.
#[derive(Clone, Debug)]
pub struct FibrationPoint {
    pub u: nalgebra::DVector<f64>,
    pub j_tilde: RMat,
}

impl FibrationPoint {
    pub fn rebuild(&self) -> RMat {
        let m = self.u.len();
        let mut j = RMat::zeros(m + 1, m + 1);
        j.view_mut((0, 0), (m, m)).copy_from(&self.j_tilde);
        for i in 0..m {
            j[(i, m)] = self.u[i];
            j[(m, i)] = -self.u[i];
        }
        j
    }
}

pub fn sphere_fibration_decompose(s: &IsometricComplexStructure) -> FibrationPoint {
    let n = s.0.n();
    let m = n - 1;
    let u = s.0.j.view((0, m), (m, 1)).column(0).into_owned();
    let j_tilde = s.0.j.view((0, 0), (m, m)).into_owned();
    FibrationPoint { u, j_tilde }
}

/// Re-project a matrix with spectrum near ±i onto `J² = −1` by the Newton
/// iteration `J ← (J − J⁻¹)/2`.
pub fn project_to_structure(a: &RMat) -> Result<ComplexStructure> {
    let n = a.nrows();
    let mut j = a.clone();
    for _ in 0..60 {
        let inv = j.clone().try_inverse().ok_or(GeomError::Singular(0))?;
        j = (&j - inv) * 0.5;
        if max_abs_r(&(&j * &j + RMat::identity(n, n))) < 1e-14 {
            return ComplexStructure::new(j);
        }
    }
    Err(GeomError::Numerical("sign iteration did not converge".into()))
}

/// Sampled field of complex structures.
#[derive(Clone, Debug)]
pub struct JField {
    pub field: GridField<RMat>,
    pub ell: usize,
}

impl JField {
    pub fn new(field: GridField<RMat>) -> Result<Self> {
        let n = field.spec.dim();
        if n % 2 == 1 {
            return Err(GeomError::Dimension(format!("J-field over an odd box of dim {n}")));
        }
        for (k, j) in field.values.iter().enumerate() {
            if j.nrows() != n || j.ncols() != n {
                return Err(GeomError::Dimension(format!("node {k} carries a {}×{} matrix", j.nrows(), j.ncols())));
            }
            let defect = max_abs_r(&(j * j + RMat::identity(n, n)));
            if defect > STRUCTURE_TOL {
                return Err(GeomError::Precondition(format!("‖J²+1‖ = {defect:.3e} at node {k}")));
            }
        }
        Ok(JField { ell: n / 2, field })
    }

    pub fn sample(spec: crate::tensor::GridSpec, f: impl Fn(&[f64]) -> RMat + Sync) -> Result<Self> {
        JField::new(GridField::sample(spec, f))
    }

    fn check_size(&self) -> Result<()> {
        if self.field.spec.shape.iter().any(|&s| s < 3) {
            return Err(GeomError::Precondition("J-field needs at least 3 nodes per axis".into()));
        }
        Ok(())
    }

    /// `∂_l J` for every axis, indexed `[l][node]`.
    fn partials(&self) -> Vec<Vec<RMat>> {
        (0..self.field.spec.dim()).map(|l| grid_partial(&self.field, l)).collect()
    }
}

/// `(1,2)`-tensor `N^k_{ij}` stored at `k·n² + i·n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NTensor {
    pub n: usize,
    pub c: Vec<f64>,
}

impl NTensor {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.n + i) * self.n + j]
    }

    /// `N(X, Y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| (0..n).map(|i| (0..n).map(|j| self.get(k, i, j) * x[i] * y[j]).sum::<f64>()).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn nijenhuis_at(j: &RMat, d: &[RMat]) -> NTensor {
    let n = j.nrows();
    let mut c = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for jj in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += j[(l, i)] * d[l][(k, jj)] - j[(l, jj)] * d[l][(k, i)];
                    v += -j[(k, l)] * d[i][(l, jj)] + j[(k, l)] * d[jj][(l, i)];
                }
                c[(k * n + i) * n + jj] = 2.0 * v;
            }
        }
    }
    NTensor { n, c }
}

/// Nijenhuis tensor from centred differences of the sampled field. Nodes on the
/// faces use one-sided stencils and are flagged through `flagged_margin`.
pub fn nijenhuis(jf: &JField) -> Result<GridField<NTensor>> {
    jf.check_size()?;
    let d = jf.partials();
    let n = jf.field.spec.dim();
    let values = (0..jf.field.values.len())
        .into_par_iter()
        .map(|node| {
            let dn: Vec<RMat> = (0..n).map(|l| d[l][node].clone()).collect();
            nijenhuis_at(&jf.field.values[node], &dn)
        })
        .collect();
    Ok(GridField { spec: jf.field.spec.clone(), values, flagged_margin: 1 })
}

/// Interior max of `‖N‖∞`.
pub fn nijenhuis_interior_max(nf: &GridField<NTensor>) -> f64 {
    crate::tensor::grid::interior_max(nf, 1, |t| t.max_abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectionResiduals {
    /// max over interior nodes and coordinate pairs of `|(∇_X J)Y|`.
    pub nabla_j: f64,
    /// max of `|T(X,Y) − N(X,Y)/8|`.
    pub torsion: f64,
}

/// Builds `∇ = ∇̃ − Q` from coordinate derivatives and measures `∇J` and
/// `T − N/8` on all coordinate pairs.
pub fn almost_complex_connection_check(jf: &JField) -> Result<ConnectionResiduals> {
    jf.check_size()?;
    let d = jf.partials();
    let n = jf.field.spec.dim();
    let nodes: Vec<usize> = jf.field.interior(1).collect();
    let per: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&node| {
            let j = &jf.field.values[node];
            let dn: Vec<RMat> = (0..n).map(|l| d[l][node].clone()).collect();
            let q = q_tensor(j, &dn);
            let nt = nijenhuis_at(j, &dn);
            let mut nab: f64 = 0.0;
            let mut tor: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    // (∇_a J) e_b = (∂_a J) e_b − Q(e_a, J e_b) + J Q(e_a, e_b)
                    let jq = j * &q[a][b];
                    for k in 0..n {
                        let qjb: f64 = (0..n).map(|cc| j[(cc, b)] * q[a][cc][k]).sum();
                        nab = nab.max((dn[a][(k, b)] - qjb + jq[k]).abs());
                        let t = -q[a][b][k] + q[b][a][k];
                        tor = tor.max((t - nt.get(k, a, b) / 8.0).abs());
                    }
                }
            }
            (nab, tor)
        })
        .collect();
    let (nabla_j, torsion) = per.iter().fold((0.0f64, 0.0f64), |(x, y), &(a, b)| (x.max(a), y.max(b)));
    Ok(ConnectionResiduals { nabla_j, torsion })
}

/// `Q(e_a, e_b)` from `4Q(X,Y) = (∇̃_{JY}J)X + J(∇̃_Y J)X + 2J(∇̃_X J)Y`.
fn q_tensor(j: &RMat, d: &[RMat]) -> Vec<Vec<nalgebra::DVector<f64>>> {
    let n = j.nrows();
    let jd: Vec<RMat> = d.iter().map(|m| j * m).collect();
    let djy: Vec<RMat> = (0..n)
        .map(|b| (0..n).fold(RMat::zeros(n, n), |acc, l| acc + &d[l] * j[(l, b)]))
        .collect();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let v = djy[b].column(a) + jd[b].column(a) + jd[a].column(b) * 2.0;
                    v * 0.25
                })
                .collect()
        })
        .collect()
}

/// Fixture fields used by the tests, the CLI and the acceptance suite.
pub mod fixtures {
    use super::*;
    use crate::tensor::GridSpec;

    /// A real diffeomorphism of ℝ⁴ that is not holomorphic for J₀.
    fn phi_jacobian(x: &[f64]) -> RMat {
        let e = 0.3;
        let mut d = RMat::identity(4, 4);
        // φ(x) = x + e·(sin x₂, x₃², x₀x₁, cos x₀ − 1)
        d[(0, 2)] += e * x[2].cos();
        d[(1, 3)] += e * 2.0 * x[3];
        d[(2, 0)] += e * x[1];
        d[(2, 1)] += e * x[0];
        d[(3, 0)] += -e * x[0].sin();
        d
    }

    /// `φ*J₀ = dφ⁻¹ J₀ dφ`, integrable because it is J₀ in other coordinates.
    pub fn pulled_back(x: &[f64]) -> RMat {
        let d = phi_jacobian(x);
        let di = d.clone().try_inverse().expect("φ is a local diffeomorphism near the origin");
        di * ComplexStructure::standard(2).j * d
    }

    /// Straight-line blend between `J₀` and a rotated copy, re-projected.
    pub fn blended(x: &[f64]) -> RMat {
        let theta: f64 = 0.9;
        let mut r = RMat::identity(4, 4);
        r[(0, 0)] = theta.cos();
        r[(0, 1)] = -theta.sin();
        r[(1, 0)] = theta.sin();
        r[(1, 1)] = theta.cos();
        let j0 = ComplexStructure::standard(2).j;
        let j1 = &r * &j0 * r.transpose();
        let t = 0.5 + x[0] + 0.5 * x[1];
        let a = j0 * (1.0 - t) + j1 * t;
        project_to_structure(&a).expect("blend stays away from the real axis").j
    }

    /// Smooth perturbation of `J₀` by seeded coefficient matrices.
    pub fn perturbed(seed: u64) -> impl Fn(&[f64]) -> RMat + Sync {
        let mut g = rng::seeded(seed, "jspace.perturbed");
        let lin: Vec<RMat> = (0..4).map(|_| rng::gaussian_r(&mut g, 4, 4) * 0.1).collect();
        let quad = rng::gaussian_r(&mut g, 4, 4) * 0.1;
        move |x: &[f64]| {
            let mut a = ComplexStructure::standard(2).j;
            for (l, m) in lin.iter().enumerate() {
                a += m * x[l];
            }
            a += &quad * (x[0] * x[1]);
            project_to_structure(&a).expect("small perturbation").j
        }
    }

    /// Probe plane through `centre`: `count` nodes at spacing `h` along
    /// x₀, x₁ and three nodes along x₂, x₃.
    pub fn probe_plane(centre: [f64; 4], h: f64, count: usize) -> GridSpec {
        let half = h * (count - 1) as f64 / 2.0;
        GridSpec::new(
            vec![centre[0] - half, centre[1] - half, centre[2] - h, centre[3] - h],
            vec![centre[0] + half, centre[1] + half, centre[2] + h, centre[3] + h],
            vec![count, count, 3, 3],
        )
        .expect("valid probe plane")
    }
}

pub fn standard_form(n: usize, terms: &[(&[usize], f64)]) -> ExteriorForm<Complex64> {
    let mut w: Option<ExteriorForm<Complex64>> = None;
    for (idx, coef) in terms {
        let m = ExteriorForm::monomial(n, idx, c(*coef));
        w = Some(match w {
            None => m,
            Some(acc) => acc.add(&m),
        });
    }
    w.unwrap_or_else(|| ExteriorForm::zero(n, 0, &c(0.0)))
}

pub fn matrix_distance(a: &RMat, b: &RMat) -> f64 {
    max_abs_r(&(a - b))
}

pub fn identity_defect(s: &ComplexStructure) -> f64 {
    let n = s.n();
    max_abs_r(&(&s.j * &s.j + DMatrix::identity(n, n)))
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn i_plus() -> ComplexStructure {
        ComplexStructure::new(RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn orientation_anchors() {
        assert_eq!(orientation(&i_plus()), 1);
        assert_eq!(orientation(&i_plus().neg()), -1);
        for ell in 1..=4 {
            assert_eq!(orientation(&ComplexStructure::standard(ell)), 1);
        }
        assert_eq!(orientation(&ComplexStructure::standard(2).neg()), 1);
        assert_eq!(orientation(&ComplexStructure::standard(3).neg()), -1);
    }

    #[test]
    fn orientation_matches_pfaffian_on_h() {
        let mut g = rng::seeded(1, "t.pf");
        for ell in 1..=4 {
            for sign in [1i8, -1] {
                for _ in 0..20 {
                    let j = IsometricComplexStructure::random(&mut g, ell, sign);
                    assert_eq!(orientation(j.inner()), sign);
                    assert_eq!(pfaffian_orientation(&j), sign);
                }
            }
        }
    }

    #[test]
    fn gl_plus_preserves_orientation() {
        let mut g = rng::seeded(2, "t.glplus");
        for _ in 0..50 {
            let j = random_structure(&mut g, 2);
            let m = rng::gaussian_r(&mut g, 4, 4);
            let o = orientation(&j.conjugate_by(&m).unwrap());
            let expected = if m.determinant() > 0.0 { orientation(&j) } else { -orientation(&j) };
            assert_eq!(o, expected);
        }
    }

    #[test]
    fn tangent_dimensions_are_stable() {
        let mut g = rng::seeded(3, "t.tangent");
        for ell in 1..=3 {
            for _ in 0..5 {
                let (full, _) = tangent_dimensions(&random_structure(&mut g, ell));
                assert_eq!(full, 2 * ell * ell);
                let h = IsometricComplexStructure::random(&mut g, ell, 1);
                let (full, iso) = tangent_dimensions(h.inner());
                assert_eq!(full, 2 * ell * ell);
                assert_eq!(iso, ell * (ell - 1));
            }
        }
    }

    #[test]
    fn projector_sums_and_ranks() {
        let mut g = rng::seeded(4, "t.proj");
        for ell in 1..=3 {
            let j = random_structure(&mut g, ell);
            for k in 0..=2 * ell {
                let ps = type_projectors(&j, k).unwrap();
                let dim = binomial(2 * ell, k);
                let sum = ps.iter().fold(CMat::zeros(dim, dim), |a, p| a + &p.matrix);
                assert!(crate::linalg::max_abs(&(sum - CMat::identity(dim, dim))) < 1e-9);
                for p in &ps {
                    let idem = &p.matrix * &p.matrix - &p.matrix;
                    assert!(crate::linalg::max_abs(&idem) < 1e-9);
                    let expected = if p.r <= ell && p.s <= ell { binomial(ell, p.r) * binomial(ell, p.s) } else { 0 };
                    assert_eq!(p.rank(), expected, "ℓ={ell} ({},{})", p.r, p.s);
                }
            }
        }
    }

    #[test]
    fn p11_rank_four_at_ell_two() {
        let p = pure_type_projector(&ComplexStructure::standard(2), 1, 1).unwrap();
        assert_eq!(p.rank(), 4);
    }

    #[test]
    fn isometric_projectors_are_hermitian() {
        let mut g = rng::seeded(5, "t.herm");
        let j = IsometricComplexStructure::random(&mut g, 3, 1);
        for p in type_projectors(j.inner(), 3).unwrap() {
            assert!(crate::linalg::max_abs(&(p.matrix.adjoint() - &p.matrix)) < 1e-10);
        }
    }

    #[test]
    fn conjugation_swaps_types() {
        let mut g = rng::seeded(6, "t.conj");
        let j = random_structure(&mut g, 2);
        let ps = type_projectors(&j, 2).unwrap();
        let w = ExteriorForm { n: 4, degree: 2, coeffs: (0..6).map(|_| rng::cnormal(&mut g)).collect() };
        for r in 0..=2 {
            let lhs = ps[r].apply(&w).unwrap().conj();
            let rhs = ps[2 - r].apply(&w.conj()).unwrap();
            assert!(lhs.sub(&rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn p0l_rank_one() {
        let mut g = rng::seeded(7, "t.p0l");
        for ell in 1..=3 {
            for _ in 0..5 {
                let j = random_structure(&mut g, ell);
                assert_eq!(pure_type_projector(&j, 0, ell).unwrap().rank(), 1);
            }
        }
    }

    #[test]
    fn lemma_fixture_dx12_minus_dx34() {
        let w = standard_form(4, &[(&[0, 1], 1.0), (&[2, 3], -1.0)]);
        // anti-self-dual, so Ω − i²*Ω = Ω + *Ω = 0: the H₋ statement applies
        let rep = selfduality_pure_equivalence(&w, 200, 7).unwrap();
        assert!(rep.minus.condition_holds);
        assert!(rep.minus.max_projection < 1e-9);
        assert!(!rep.plus.condition_holds);
        assert!(rep.plus.violating_found);
        assert!(rep.consistent());
        // the self-dual partner is killed by every J ∈ H₊
        let sd = standard_form(4, &[(&[0, 1], 1.0), (&[2, 3], 1.0)]);
        let rep = selfduality_pure_equivalence(&sd, 200, 7).unwrap();
        assert!(rep.plus.condition_holds && rep.plus.max_projection < 1e-9);
        assert!(rep.minus.violating_found);
    }

    #[test]
    fn lemma_zero_and_mixed() {
        let z = ExteriorForm::zero(4, 2, &c(0.0));
        let rep = selfduality_pure_equivalence(&z, 20, 1).unwrap();
        assert!(rep.plus.condition_holds && rep.minus.condition_holds && rep.consistent());
        let mixed = standard_form(4, &[(&[0, 1], 1.0), (&[0, 2], 0.5)]);
        let rep = selfduality_pure_equivalence(&mixed, 200, 3).unwrap();
        assert!(rep.plus.violating_found && rep.minus.violating_found && rep.consistent());
    }

    #[test]
    fn lemma_ell_three() {
        let mut g = rng::seeded(8, "t.l3");
        let w = ExteriorForm { n: 6, degree: 3, coeffs: (0..20).map(|_| rng::cnormal(&mut g)).collect() };
        for sign in [1.0, -1.0] {
            let ts = twisted_star(&w);
            let proj = if sign > 0.0 { w.sub(&ts) } else { w.add(&ts) }.scale(0.5);
            let rep = selfduality_pure_equivalence(&proj, 60, 9).unwrap();
            let s = if sign > 0.0 { &rep.plus } else { &rep.minus };
            assert!(s.condition_holds && s.max_projection < 1e-9, "{rep:?}");
            assert!(rep.consistent());
        }
    }

    #[test]
    fn odd_dimension_rejected() {
        let w = ExteriorForm::zero(3, 1, &c(0.0));
        assert!(matches!(selfduality_pure_equivalence(&w, 1, 0), Err(GeomError::Precondition(_))));
    }

    #[test]
    fn polar_of_isometric_is_constant() {
        let mut g = rng::seeded(9, "t.polar0");
        let j = IsometricComplexStructure::random(&mut g, 2, 1);
        let path = PolarPath::new(j.inner()).unwrap();
        assert!(max_abs_r(&path.s) < 1e-12);
        assert!(matrix_distance(&path.at(0.3).j, &j.0.j) < 1e-12);
    }

    #[test]
    fn polar_path_stays_in_i() {
        let mut g = rng::seeded(10, "t.polar");
        for _ in 0..20 {
            let j = random_structure(&mut g, 2);
            let path = PolarPath::new(&j).unwrap();
            assert!(max_abs_r(&(&path.s - path.s.transpose())) < 1e-12);
            for tau in [0.0, 0.25, 0.5, 0.75, 1.0] {
                assert!(identity_defect(&path.at(tau)) < 1e-8);
            }
            assert!(matrix_distance(&path.at(1.0).j, &j.j) < 1e-9);
            IsometricComplexStructure::new(path.at(0.0).j).unwrap();
            let dt = 1e-3;
            let step = matrix_distance(&path.at(0.5).j, &path.at(0.5 + dt).j);
            assert!(step < 10.0 * (1.0 + max_abs_r(&path.s)) * dt);
        }
    }

    #[test]
    fn fibration_roundtrip() {
        let std = IsometricComplexStructure::standard(3);
        let fp = sphere_fibration_decompose(&std);
        // last column of J₀ on ℝ⁶ is −e₃
        assert!((fp.u[2] + 1.0).abs() < 1e-15);
        let mut g = rng::seeded(11, "t.fib");
        for k in 0..100 {
            let j = IsometricComplexStructure::random(&mut g, 3, if k % 2 == 0 { 1 } else { -1 });
            let fp = sphere_fibration_decompose(&j);
            assert!((fp.u.norm() - 1.0).abs() < 1e-12);
            assert!((&fp.j_tilde * &fp.u).norm() < 1e-12);
            assert!((fp.j_tilde.transpose() * &fp.u).norm() < 1e-12);
            assert!(matrix_distance(&fp.rebuild(), &j.0.j) < 1e-12);
            // on u⊥, J̃ squares to −1
            let m = fp.u.len();
            let pu = RMat::identity(m, m) - &fp.u * fp.u.transpose();
            assert!(max_abs_r(&(&fp.j_tilde * &fp.j_tilde + &pu)) < 1e-12);
        }
    }

    #[test]
    fn constant_field_is_flat() {
        let spec = probe_plane([0.0; 4], 0.1, 5);
        let mut g = rng::seeded(12, "t.const");
        let j = random_structure(&mut g, 2).j;
        let jf = JField::sample(spec, |_| j.clone()).unwrap();
        assert!(nijenhuis_interior_max(&nijenhuis(&jf).unwrap()) < 1e-12);
        let r = almost_complex_connection_check(&jf).unwrap();
        assert!(r.nabla_j < 1e-12 && r.torsion < 1e-12);
    }

    #[test]
    fn integrable_fixture() {
        let jf = JField::sample(probe_plane([0.1, -0.2, 0.15, 0.05], 1.0 / 64.0, 17), pulled_back).unwrap();
        let n = nijenhuis(&jf).unwrap();
        let m = nijenhuis_interior_max(&n);
        assert!(m < 1e-4, "‖N‖ = {m:e}");
        let r = almost_complex_connection_check(&jf).unwrap();
        assert!(r.torsion < 1e-10 && r.nabla_j < 1e-3, "{r:?}");
    }

    #[test]
    fn blended_fixture_is_not_integrable() {
        let jf = JField::sample(probe_plane([0.0; 4], 1.0 / 64.0, 9), blended).unwrap();
        let nf = nijenhuis(&jf).unwrap();
        assert!(nijenhuis_interior_max(&nf) > 0.01);
        let node = nf.interior(1).next().unwrap();
        let t = &nf.values[node];
        let mut g = rng::seeded(13, "t.njx");
        for _ in 0..10 {
            let x: Vec<f64> = (0..4).map(|_| rng::normal(&mut g)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng::normal(&mut g)).collect();
            let jx: Vec<f64> = (&jf.field.values[node] * nalgebra::DVector::from_vec(x.clone())).iter().copied().collect();
            let nxy = t.eval(&x, &y);
            let nyx = t.eval(&y, &x);
            assert!(nxy.iter().zip(&nyx).all(|(a, b)| (a + b).abs() < 1e-12));
            assert!(t.eval(&x, &jx).iter().all(|v| v.abs() < 1e-3 * (1.0 + t.max_abs())));
        }
    }

    #[test]
    fn perturbed_connection_residuals() {
        let jf = JField::sample(probe_plane([0.05, 0.1, -0.1, 0.2], 1.0 / 64.0, 9), perturbed(21)).unwrap();
        let r = almost_complex_connection_check(&jf).unwrap();
        assert!(r.nabla_j < 1e-3 && r.torsion < 1e-3, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn polar_retract_invariants(seed in 0u64..1_000_000, tau in 0.0f64..=1.0) {
            let mut g = rng::seeded(seed, "prop.polar");
            let j = random_structure(&mut g, 2);
            let jt = polar_retract(&j, tau).unwrap();
            prop_assert!(identity_defect(&jt) < 1e-8);
        }

        #[test]
        fn fibration_rebuild(seed in 0u64..1_000_000) {
            let mut g = rng::seeded(seed, "prop.fib");
            let j = IsometricComplexStructure::random(&mut g, 2, 1);
            let fp = sphere_fibration_decompose(&j);
            prop_assert!(matrix_distance(&fp.rebuild(), &j.0.j) < 1e-12);
        }
    }
}
