//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::tensor::{CMat, RMat};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn max_abs_r(m: &RMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.abs()))
}

/// Orthonormal basis (as columns) of the kernel of `a`, singular values below
/// `rel_tol · σ_max` (or below `rel_tol` when `a` vanishes) count as zero.
pub fn nullspace(a: &CMat, rel_tol: f64) -> CMat {
    let (m, n) = a.shape();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let padded = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.max();
    let cutoff = if smax > 0.0 { rel_tol * smax } else { rel_tol };
    let cols: Vec<DVector<Complex64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| vt.row(k).adjoint())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    let (_, n) = a.shape();
    n - nullspace(a, rel_tol).ncols()
}

pub fn rank_r(a: &RMat, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// `f(S)` for a real symmetric `S` through its eigen-decomposition.
pub fn sym_apply(s: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let eig = s.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Gram–Schmidt on the columns, dropping nearly dependent ones.
pub fn orthonormalize(a: &CMat, tol: f64) -> CMat {
    let mut out: Vec<DVector<Complex64>> = Vec::new();
    for j in 0..a.ncols() {
        let mut v = a.column(j).into_owned();
        for _ in 0..2 {
            for u in &out {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let nv = v.norm();
        if nv > tol {
            out.push(v / c(nv));
        }
    }
    if out.is_empty() {
        CMat::zeros(a.nrows(), 0)
    } else {
        CMat::from_columns(&out)
    }
}

/// Pfaffian of a real antisymmetric matrix by Parlett–Reid elimination with pivoting.
pub fn pfaffian(a: &RMat) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        // bring the largest entry of column k below the diagonal to row k+1
        let (mut piv, mut best) = (k + 1, m[(k + 1, k)].abs());
        for i in (k + 2)..n {
            if m[(i, k)].abs() > best {
                best = m[(i, k)].abs();
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k + 1 {
            m.swap_rows(k + 1, piv);
            m.swap_columns(k + 1, piv);
            pf = -pf;
        }
        let akk1 = m[(k, k + 1)];
        pf *= akk1;
        for i in (k + 2)..n {
            let tau = m[(k, i)] / akk1;
            for j in 0..n {
                let v = m[(k + 1, j)];
                m[(i, j)] -= tau * v;
            }
            for j in 0..n {
                let v = m[(j, k + 1)];
                m[(j, i)] -= tau * v;
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let a = CMat::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let k = nullspace(&a, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&a * &k)) < 1e-14);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let a = RMat::from_row_slice(
            4,
            4,
            &[0.0, 1.0, 2.0, -0.5, -1.0, 0.0, 0.3, 4.0, -2.0, -0.3, 0.0, 1.5, 0.5, -4.0, -1.5, 0.0],
        );
        let pf = pfaffian(&a);
        // Pf = a12 a34 − a13 a24 + a14 a23
        let direct = 1.0 * 1.5 - 2.0 * 4.0 + (-0.5) * 0.3;
        assert!((pf - direct).abs() < 1e-12);
        assert!((pf * pf - a.determinant()).abs() < 1e-10);
    }
}
