//! Prolongations of linear Lie algebras and the Spencer δ-complex, in exact
//! rational arithmetic.
//!
//! An element of 𝔤^(k) is stored as an ℝⁿ-valued homogeneous polynomial of
//! degree k+1: a symmetric (k+1)-linear map t corresponds to X(x) = t(x,…,x)/(k+1)!,
//! so every partial application is a constant-coefficient derivative of X.
//! The complex C^{r,s} = 𝔤^(r−1) ⊗ Λˢ then carries δ = d, the exterior
//! derivative of polynomial forms. Rescaling each monomial by a factorial
//! (the multiplicity normalization) changes no rank.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::tensor::basis::{basis, merge_sign};

pub type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

#[derive(Clone, Debug)]
pub struct MatrixLieAlgebra {
    pub name: String,
    pub n: usize,
    /// Basis matrices, row-major `n × n` with integer entries.
    pub basis: Vec<Vec<i64>>,
}

fn unit(n: usize, i: usize, j: usize) -> Vec<i64> {
    let mut m = vec![0; n * n];
    m[i * n + j] = 1;
    m
}

impl MatrixLieAlgebra {
    pub fn gl(n: usize) -> Self {
        let basis = (0..n).flat_map(|i| (0..n).map(move |j| unit(n, i, j))).collect();
        MatrixLieAlgebra { name: format!("gl({n})"), n, basis }
    }

    pub fn o(n: usize) -> Self {
        let mut basis = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut m = unit(n, i, j);
                m[j * n + i] = -1;
                basis.push(m);
            }
        }
        MatrixLieAlgebra { name: format!("o({n})"), n, basis }
    }

    pub fn co(n: usize) -> Self {
        let mut g = Self::o(n);
        let mut id = vec![0; n * n];
        for i in 0..n {
            id[i * n + i] = 1;
        }
        g.basis.push(id);
        g.name = format!("co({n})");
        g
    }

    /// 𝔰𝔭(ℓ, ℝ) ⊂ 𝔤𝔩(2ℓ): matrices X with XᵗΩ + ΩX = 0, Ω = [[0, 1], [−1, 0]].
    pub fn sp(l: usize) -> Self {
        let n = 2 * l;
        let mut basis = Vec::new();
        // [[A, B], [C, −Aᵗ]] with B, C symmetric
        for i in 0..l {
            for j in 0..l {
                let mut m = unit(n, i, j);
                m[(l + j) * n + (l + i)] = -1;
                basis.push(m);
            }
        }
        for i in 0..l {
            for j in i..l {
                let mut b = unit(n, i, l + j);
                b[j * n + l + i] = 1;
                basis.push(b);
                let mut cc = unit(n, l + i, j);
                cc[(l + j) * n + i] = 1;
                basis.push(cc);
            }
        }
        MatrixLieAlgebra { name: format!("sp({l})"), n, basis }
    }

    /// 𝔤𝔩(ℓ, ℂ) ⊂ 𝔤𝔩(2ℓ, ℝ): matrices commuting with J₀ = [[0, −1], [1, 0]].
    pub fn gl_complex(l: usize) -> Self {
        let n = 2 * l;
        let mut basis = Vec::new();
        for i in 0..l {
            for j in 0..l {
                // real part: [[E, 0], [0, E]]
                let mut re = unit(n, i, j);
                re[(l + i) * n + l + j] = 1;
                basis.push(re);
                // imaginary part: [[0, −E], [E, 0]]
                let mut im = vec![0; n * n];
                im[i * n + l + j] = -1;
                im[(l + i) * n + j] = 1;
                basis.push(im);
            }
        }
        MatrixLieAlgebra { name: format!("glC({l})"), n, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Functionals on 𝔤𝔩(n) vanishing on 𝔤 (rows of length n²).
    pub fn annihilators(&self) -> Vec<Vec<Q>> {
        let rows: Vec<Vec<Q>> = self.basis.iter().map(|b| b.iter().map(|&v| q(v)).collect()).collect();
        nullspace(&rows, self.n * self.n)
    }

    pub fn contains(&self, m: &[Q]) -> bool {
        self.annihilators().iter().all(|l| dot(l, m).is_zero())
    }

    pub fn is_independent(&self) -> bool {
        let rows: Vec<Vec<Q>> = self.basis.iter().map(|b| b.iter().map(|&v| q(v)).collect()).collect();
        rank(rows) == self.dim()
    }

    pub fn is_closed(&self) -> bool {
        let n = self.n;
        let ann = self.annihilators();
        for a in &self.basis {
            for b in &self.basis {
                let mut c = vec![Q::zero(); n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut s = 0i64;
                        for k in 0..n {
                            s += a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j];
                        }
                        c[i * n + j] = q(s);
                    }
                }
                if ann.iter().any(|l| !dot(l, &c).is_zero()) {
                    return false;
                }
            }
        }
        true
    }
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y)
}

/// Homogeneous monomials of a fixed degree in n variables.
#[derive(Clone, Debug)]
pub struct Monomials {
    pub n: usize,
    pub degree: usize,
    pub list: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl Monomials {
    pub fn new(n: usize, degree: usize) -> Self {
        let mut list = Vec::new();
        fn rec(n: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if cur.len() + 1 == n {
                cur.push(left as u8);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for k in (0..=left).rev() {
                cur.push(k as u8);
                rec(n, left - k, cur, out);
                cur.pop();
            }
        }
        if n > 0 {
            rec(n, degree, &mut Vec::new(), &mut list);
        }
        let index = list.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Monomials { n, degree, list, index }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn position(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

fn exp_factorial(e: &[u8]) -> i64 {
    e.iter().map(|&k| (1..=k as i64).product::<i64>()).product()
}

/// 𝔤^(k) as a subspace of ℝⁿ-valued polynomials of degree k+1 (k ≥ −1).
#[derive(Clone, Debug)]
pub struct ProlongationSpace {
    pub k: i64,
    pub n: usize,
    pub monomials: Monomials,
    /// Coordinates over the ambient basis `(μ, α) ↦ μ·|monomials| + α`.
    pub basis: Vec<Vec<Q>>,
}

impl ProlongationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n * self.monomials.len()
    }

    /// Component `t^μ_{i₁…i_{k+1}}` of the symmetric tensor of a basis element.
    pub fn tensor_component(&self, b: usize, mu: usize, idx: &[usize]) -> Q {
        let mut e = vec![0u8; self.n];
        for &i in idx {
            e[i] += 1;
        }
        match self.monomials.position(&e) {
            Some(a) => self.basis[b][mu * self.monomials.len() + a].clone() * q(exp_factorial(&e)),
            None => Q::zero(),
        }
    }
}

pub fn prolongation(g: &MatrixLieAlgebra, k: i64) -> ProlongationSpace {
    assert!(k >= -1, "prolongation order must be ≥ −1");
    let n = g.n;
    let mons = Monomials::new(n, (k + 1) as usize);
    let m = mons.len();
    let unknowns = n * m;
    if k == -1 {
        let basis = (0..n)
            .map(|mu| {
                let mut v = vec![Q::zero(); unknowns];
                v[mu * m] = Q::one();
                v
            })
            .collect();
        return ProlongationSpace { k, n, monomials: mons, basis };
    }
    let ann = g.annihilators();
    let betas = Monomials::new(n, k as usize);
    let mut rows = Vec::new();
    for beta in &betas.list {
        for l in &ann {
            let mut row = vec![Q::zero(); unknowns];
            for mu in 0..n {
                for nu in 0..n {
                    let coef = &l[mu * n + nu];
                    if coef.is_zero() {
                        continue;
                    }
                    let mut alpha = beta.clone();
                    alpha[nu] += 1;
                    let a = mons.position(&alpha).expect("degree k+1 monomial");
                    row[mu * m + a] += coef * q(exp_factorial(&alpha));
                }
            }
            rows.push(row);
        }
    }
    let basis = nullspace(&rows, unknowns);
    ProlongationSpace { k, n, monomials: mons, basis }
}

/// Ambient cochain space P_r ⊗ Λˢ: ℝⁿ-valued degree-r polynomial s-forms.
#[derive(Clone, Debug)]
pub struct SpencerCochain {
    pub r: usize,
    pub s: usize,
    pub n: usize,
    /// Index `(μ·|P_r| + α)·C(n,s) + I`.
    pub coeffs: Vec<Q>,
}

fn ambient_len(n: usize, r: usize, s: usize) -> usize {
    if s > n {
        return 0;
    }
    n * Monomials::new(n, r).len() * basis(n).by_degree[s].len()
}

impl SpencerCochain {
    pub fn zero(n: usize, r: usize, s: usize) -> Self {
        SpencerCochain { r, s, n, coeffs: vec![Q::zero(); ambient_len(n, r, s)] }
    }

    /// `x^α dx^I ⊗ e_μ`.
    pub fn monomial(n: usize, mu: usize, alpha: &[u8], form: &[usize]) -> Self {
        let r = alpha.iter().map(|&a| a as usize).sum();
        let mut c = Self::zero(n, r, form.len());
        let mons = Monomials::new(n, r);
        let a = mons.position(alpha).unwrap();
        let sign = crate::tensor::basis::permutation_sign(form);
        let mask = crate::tensor::basis::mask_of(form);
        let i = basis(n).position[mask as usize];
        let nf = basis(n).by_degree[form.len()].len();
        c.coeffs[(mu * mons.len() + a) * nf + i] = q(sign as i64);
        c
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// Matrix (rows = target coordinates) of d: P_r⊗Λˢ → P_{r−1}⊗Λ^{s+1}.
pub fn delta_matrix(n: usize, r: usize, s: usize) -> Vec<Vec<Q>> {
    let src_len = ambient_len(n, r, s);
    if r == 0 || s >= n {
        return vec![vec![Q::zero(); src_len]; ambient_len(n, r.saturating_sub(1), s + 1)];
    }
    let ms = Monomials::new(n, r);
    let mt = Monomials::new(n, r - 1);
    let b = basis(n);
    let (fs, ft) = (&b.by_degree[s], &b.by_degree[s + 1]);
    let mut out = vec![vec![Q::zero(); src_len]; n * mt.len() * ft.len()];
    for mu in 0..n {
        for (a, alpha) in ms.list.iter().enumerate() {
            for (i, &mask) in fs.iter().enumerate() {
                let col = (mu * ms.len() + a) * fs.len() + i;
                for v in 0..n {
                    if alpha[v] == 0 || mask & (1 << v) != 0 {
                        continue;
                    }
                    let mut da = alpha.clone();
                    da[v] -= 1;
                    let ta = mt.position(&da).unwrap();
                    let tm = mask | (1 << v);
                    let row = (mu * mt.len() + ta) * ft.len() + b.position[tm as usize];
                    out[row][col] += q(alpha[v] as i64 * merge_sign(1 << v, mask) as i64);
                }
            }
        }
    }
    out
}

pub fn delta(c: &SpencerCochain) -> SpencerCochain {
    let m = delta_matrix(c.n, c.r, c.s);
    let coeffs = m.iter().map(|row| dot(row, &c.coeffs)).collect();
    SpencerCochain { r: c.r.saturating_sub(1), s: c.s + 1, n: c.n, coeffs }
}

/// Columns spanning 𝔤^(r−1) ⊗ Λˢ inside P_r ⊗ Λˢ.
fn cochain_columns(g: &MatrixLieAlgebra, r: usize, s: usize) -> Vec<Vec<Q>> {
    let n = g.n;
    let p = prolongation(g, r as i64 - 1);
    let nf = basis(n).by_degree[s].len();
    let mut cols = Vec::new();
    for bvec in &p.basis {
        for i in 0..nf {
            let mut col = vec![Q::zero(); bvec.len() * nf];
            for (k, v) in bvec.iter().enumerate() {
                col[k * nf + i] = v.clone();
            }
            cols.push(col);
        }
    }
    cols
}

pub fn cochain_dim(g: &MatrixLieAlgebra, r: usize, s: usize) -> usize {
    if s > g.n {
        return 0;
    }
    prolongation(g, r as i64 - 1).dim() * basis(g.n).by_degree[s].len()
}

/// Rank of δ restricted to C^{r,s} = 𝔤^(r−1) ⊗ Λˢ.
pub fn delta_rank(g: &MatrixLieAlgebra, r: usize, s: usize) -> usize {
    if r == 0 || s >= g.n {
        return 0;
    }
    let d = delta_matrix(g.n, r, s);
    let cols = cochain_columns(g, r, s);
    // images of the cochain basis vectors, as rows
    let images: Vec<Vec<Q>> = cols.iter().map(|c| d.iter().map(|row| dot(row, c)).collect()).collect();
    rank(images)
}

/// dim H^{r,s}(𝔤) = dim C^{r,s} − rank δ|C^{r,s} − rank δ|C^{r+1,s−1}.
pub fn spencer_cohomology_dim(g: &MatrixLieAlgebra, r: usize, s: usize) -> usize {
    if s > g.n {
        return 0;
    }
    let dim = cochain_dim(g, r, s);
    let out = delta_rank(g, r, s);
    let inc = if s == 0 { 0 } else { delta_rank(g, r + 1, s - 1) };
    dim - out - inc
}

/// Searches rank-one matrices u⊗ω with entries of u, ω in {−1, 0, 1}.
pub fn contains_rank_one(g: &MatrixLieAlgebra) -> bool {
    let n = g.n;
    let ann = g.annihilators();
    let vecs: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = (k % 3) as i64 - 1;
                    k /= 3;
                    d
                })
                .collect()
        })
        .filter(|v: &Vec<i64>| v.iter().any(|&x| x != 0))
        .collect();
    for u in &vecs {
        for w in &vecs {
            let m: Vec<Q> = (0..n * n).map(|k| q(u[k / n] * w[k % n])).collect();
            if ann.iter().all(|l| dot(l, &m).is_zero()) {
                return true;
            }
        }
    }
    false
}

/// Row-reduce in place; returns pivot columns.
fn row_reduce(m: &mut [Vec<Q>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = Q::one() / m[row][col].clone();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let f = r[col].clone();
                for (x, y) in r.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    row_reduce(&mut rows, ncols).len()
}

/// Basis of {x : A x = 0} for the rows of A.
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let pivots = row_reduce(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Product of two rational matrices given as row lists.
pub fn matmul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Q::zero(), |s, k| if row[k].is_zero() { s } else { s + &row[k] * &b[k][j] }))
                .collect()
        })
        .collect()
}

pub fn is_zero_matrix(m: &[Vec<Q>]) -> bool {
    m.iter().all(|r| r.iter().all(|x| x.is_zero() || x.abs().is_zero()))
}

/// One CSV row `(algebra, r, s, dim)`.
pub fn table_rows(g: &MatrixLieAlgebra, max_total: usize) -> Vec<(String, usize, usize, usize)> {
    let mut rows = Vec::new();
    for total in 0..=max_total {
        for r in 0..=total {
            let s = total - r;
            if s <= g.n {
                rows.push((g.name.clone(), r, s, spencer_cohomology_dim(g, r, s)));
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_algebras_are_subalgebras() {
        for g in [
            MatrixLieAlgebra::gl(3),
            MatrixLieAlgebra::o(4),
            MatrixLieAlgebra::co(4),
            MatrixLieAlgebra::sp(2),
            MatrixLieAlgebra::gl_complex(2),
        ] {
            assert!(g.is_independent(), "{}", g.name);
            assert!(g.is_closed(), "{}", g.name);
        }
        assert_eq!(MatrixLieAlgebra::sp(2).dim(), 10);
        assert_eq!(MatrixLieAlgebra::gl_complex(2).dim(), 8);
    }

    #[test]
    fn orthogonal_algebra_has_no_first_prolongation() {
        for n in 2..=5 {
            assert_eq!(prolongation(&MatrixLieAlgebra::o(n), 1).dim(), 0);
        }
    }

    #[test]
    fn gl_first_prolongation_is_all_symmetric_maps() {
        for n in 1usize..=4 {
            assert_eq!(prolongation(&MatrixLieAlgebra::gl(n), 1).dim(), n * n * (n + 1) / 2);
        }
    }

    #[test]
    fn conformal_algebra_is_of_order_two() {
        for n in 3..=5 {
            let g = MatrixLieAlgebra::co(n);
            assert_eq!(prolongation(&g, 1).dim(), n);
            assert_eq!(prolongation(&g, 2).dim(), 0);
        }
    }

    #[test]
    fn prolongation_elements_are_symmetric_and_land_in_g() {
        let g = MatrixLieAlgebra::co(3);
        let p = prolongation(&g, 1);
        for b in 0..p.dim() {
            for i in 0..3 {
                let mut m = vec![Q::zero(); 9];
                for mu in 0..3 {
                    for nu in 0..3 {
                        let t = p.tensor_component(b, mu, &[i, nu]);
                        assert_eq!(t, p.tensor_component(b, mu, &[nu, i]));
                        m[mu * 3 + nu] = t;
                    }
                }
                assert!(g.contains(&m));
            }
        }
    }

    #[test]
    fn delta_is_exterior_derivative() {
        // x¹ dx² ⊗ e₁ ↦ dx¹∧dx² ⊗ e₁
        let c = SpencerCochain::monomial(2, 0, &[1, 0], &[1]);
        let d = delta(&c);
        assert_eq!(d.coeffs, SpencerCochain::monomial(2, 0, &[0, 0], &[0, 1]).coeffs);
    }

    #[test]
    fn delta_of_symmetric_tensor_small_case() {
        // t ∈ S²(ℝ²)*⊗ℝ², X = ½ t(x,x); δX = Σ_j t(e_j, x) dx^j, i.e. coefficient of
        // x^k dx^j ⊗ e_μ is t^μ_{jk}.
        let t = |mu: usize, j: usize, k: usize| -> i64 { [[[2, -1], [-1, 3]], [[0, 5], [5, 1]]][mu][j][k] };
        let mons2 = Monomials::new(2, 2);
        let mut c = SpencerCochain::zero(2, 2, 0);
        for mu in 0..2 {
            for (a, e) in mons2.list.iter().enumerate() {
                let idx: Vec<usize> = (0..2).flat_map(|v| std::iter::repeat(v).take(e[v] as usize)).collect();
                // ½ t(x,x) coefficient of x^α is t_{α} · (multinomial)/2
                let coef = Q::new(BigInt::from(t(mu, idx[0], idx[1]) * if e.iter().any(|&x| x == 1) { 2 } else { 1 }), BigInt::from(2));
                c.coeffs[mu * mons2.len() + a] = coef;
            }
        }
        let d = delta(&c);
        let mons1 = Monomials::new(2, 1);
        for mu in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut e = [0u8; 2];
                    e[k] = 1;
                    let a = mons1.position(&e).unwrap();
                    assert_eq!(d.coeffs[(mu * 2 + a) * 2 + j], q(t(mu, j, k)));
                }
            }
        }
    }

    #[test]
    fn delta_squared_vanishes() {
        for n in 1usize..=4 {
            for r in 2..=4 {
                for s in 0..n.saturating_sub(1) {
                    let prod = matmul(&delta_matrix(n, r - 1, s + 1), &delta_matrix(n, r, s));
                    assert!(is_zero_matrix(&prod), "n={n} r={r} s={s}");
                }
            }
        }
    }

    #[test]
    fn curvature_tensor_count() {
        assert_eq!(spencer_cohomology_dim(&MatrixLieAlgebra::o(4), 1, 2), 20);
        assert_eq!(spencer_cohomology_dim(&MatrixLieAlgebra::co(4), 1, 2), 10);
        assert_eq!(spencer_cohomology_dim(&MatrixLieAlgebra::o(3), 1, 2), 6);
    }

    #[test]
    fn orthogonal_algebra_has_no_rank_one_elements() {
        for n in 2..=4 {
            assert!(!contains_rank_one(&MatrixLieAlgebra::o(n)));
        }
        assert!(contains_rank_one(&MatrixLieAlgebra::gl(2)));
    }

    fn all_small_algebras() -> Vec<MatrixLieAlgebra> {
        let mut v = Vec::new();
        for n in 2..=4 {
            v.push(MatrixLieAlgebra::gl(n));
            v.push(MatrixLieAlgebra::o(n));
            v.push(MatrixLieAlgebra::co(n));
        }
        v.push(MatrixLieAlgebra::sp(1));
        v.push(MatrixLieAlgebra::sp(2));
        v.push(MatrixLieAlgebra::gl_complex(1));
        v.push(MatrixLieAlgebra::gl_complex(2));
        v
    }

    #[test]
    fn gl_real_is_acyclic() {
        for n in 2..=3 {
            let g = MatrixLieAlgebra::gl(n);
            for total in 1..=4 {
                for r in 0..=total {
                    let s = total - r;
                    if s <= n {
                        assert_eq!(spencer_cohomology_dim(&g, r, s), 0, "gl({n}) r={r} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_column_vanishes() {
        for g in all_small_algebras() {
            for r in 1..=3 {
                assert_eq!(spencer_cohomology_dim(&g, r, 1), 0, "{} r={r}", g.name);
            }
        }
    }

    #[test]
    fn orthogonal_second_column() {
        for n in 3..=4 {
            let g = MatrixLieAlgebra::o(n);
            assert_eq!(spencer_cohomology_dim(&g, 0, 2), 0);
            for r in 2..=3 {
                assert_eq!(spencer_cohomology_dim(&g, r, 2), 0, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn weyl_count_is_riemann_count_minus_ricci() {
        let riemann = spencer_cohomology_dim(&MatrixLieAlgebra::o(4), 1, 2);
        let weyl = spencer_cohomology_dim(&MatrixLieAlgebra::co(4), 1, 2);
        assert_eq!(weyl, riemann - 10);
    }

    #[test]
    fn vanishing_passes_from_o_to_co() {
        for n in 3..=4 {
            for k in 1..=n {
                if spencer_cohomology_dim(&MatrixLieAlgebra::o(n), 0, k) == 0 {
                    assert_eq!(spencer_cohomology_dim(&MatrixLieAlgebra::co(n), 0, k), 0, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn symplectic_and_complex_second_column() {
        for g in [MatrixLieAlgebra::sp(2), MatrixLieAlgebra::gl_complex(2)] {
            for r in 1..=2 {
                assert_eq!(spencer_cohomology_dim(&g, r, 2), 0, "{} r={r}", g.name);
            }
        }
    }
}
