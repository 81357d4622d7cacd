//! Exterior forms on ℝⁿ with coefficients in any [`Coeff`] ring.

use num_complex::Complex64;

use super::basis::{basis, indices, mask_of, merge_sign};
use super::coeff::{Coeff, ComplexCoeff};
use super::jet::Jet;
use crate::error::{GeomError, Result};

/// Diagonal signature `η` with an orientation sign.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMetric {
    pub eta: Vec<f64>,
    pub orientation: f64,
}

impl FrameMetric {
    pub fn euclidean(n: usize) -> Self {
        FrameMetric { eta: vec![1.0; n], orientation: 1.0 }
    }

    /// `s` entries +1 followed by `n − s` entries −1.
    pub fn signature(n: usize, s: usize) -> Self {
        let eta = (0..n).map(|i| if i < s { 1.0 } else { -1.0 }).collect();
        FrameMetric { eta, orientation: 1.0 }
    }

    pub fn with_orientation(mut self, o: f64) -> Self {
        self.orientation = o.signum();
        self
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    fn eta_of(&self, mask: u32) -> f64 {
        indices(mask).iter().map(|&i| self.eta[i]).product()
    }
}

#[derive(Clone, Debug)]
pub struct ExteriorForm<C> {
    pub n: usize,
    pub degree: usize,
    pub coeffs: Vec<C>,
}

impl<C: Coeff> ExteriorForm<C> {
    pub fn zero(n: usize, degree: usize, proto: &C) -> Self {
        let len = basis(n).by_degree[degree].len();
        ExteriorForm { n, degree, coeffs: vec![proto.zero_like(); len] }
    }

    pub fn from_coeffs(n: usize, degree: usize, coeffs: Vec<C>) -> Result<Self> {
        let len = basis(n).by_degree.get(degree).map(|b| b.len());
        if len != Some(coeffs.len()) {
            return Err(GeomError::Dimension(format!(
                "{} coefficients for a degree-{degree} form on ℝ^{n}",
                coeffs.len()
            )));
        }
        Ok(ExteriorForm { n, degree, coeffs })
    }

    /// `c · dx^{i1} ∧ … ∧ dx^{ip}` for an arbitrary index order.
    pub fn monomial(n: usize, idx: &[usize], c: C) -> Self {
        let mut f = ExteriorForm::zero(n, idx.len(), &c);
        let sign = super::basis::permutation_sign(idx);
        if sign != 0.0 {
            let pos = basis(n).position[mask_of(idx) as usize];
            f.coeffs[pos] = c.scale(sign);
        }
        f
    }

    pub fn masks(&self) -> &'static [u32] {
        &basis(self.n).by_degree[self.degree]
    }

    pub fn get(&self, idx: &[usize]) -> C {
        let sign = super::basis::permutation_sign(idx);
        let c = &self.coeffs[basis(self.n).position[mask_of(idx) as usize]];
        if sign == 0.0 {
            c.zero_like()
        } else {
            c.scale(sign)
        }
    }

    pub fn component(&self, mask: u32) -> &C {
        &self.coeffs[basis(self.n).position[mask as usize]]
    }

    fn check_same(&self, rhs: &Self) -> Result<()> {
        if self.n != rhs.n || self.degree != rhs.degree {
            return Err(GeomError::Dimension(format!(
                "forms of type ({}, {}) and ({}, {})",
                self.n, self.degree, rhs.n, rhs.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_same(rhs).expect("adding incompatible forms");
        ExteriorForm {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.check_same(rhs).expect("subtracting incompatible forms");
        ExteriorForm {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ExteriorForm<D> {
        ExteriorForm { n: self.n, degree: self.degree, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Left-multiply every coefficient by `c` (matrix order preserved).
    pub fn lmul(&self, c: &C) -> Self {
        self.map(|x| c.mul(x))
    }

    pub fn rmul(&self, c: &C) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn try_wedge(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(GeomError::Dimension(format!("wedge of forms on ℝ^{} and ℝ^{}", self.n, rhs.n)));
        }
        let degree = self.degree + rhs.degree;
        if degree > self.n {
            return Err(GeomError::Dimension(format!("wedge degree {degree} exceeds {}", self.n)));
        }
        let b = basis(self.n);
        let proto = self.coeffs.first().or(rhs.coeffs.first()).expect("empty form");
        let mut out = ExteriorForm::zero(self.n, degree, proto);
        for (ia, &ma) in b.by_degree[self.degree].iter().enumerate() {
            let ca = &self.coeffs[ia];
            if ca.magnitude() == 0.0 {
                continue;
            }
            for (ib, &mb) in b.by_degree[rhs.degree].iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let cb = &rhs.coeffs[ib];
                let term = ca.mul(cb).scale(merge_sign(ma, mb));
                out.coeffs[b.position[(ma | mb) as usize]].add_assign(&term);
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, rhs: &Self) -> Self {
        self.try_wedge(rhs).expect("incompatible wedge")
    }

    /// Graded commutator `[α, β] = α∧β − (−1)^{pq} β∧α`.
    pub fn bracket(&self, rhs: &Self) -> Self {
        let ab = self.wedge(rhs);
        let ba = rhs.wedge(self);
        if (self.degree * rhs.degree) % 2 == 0 {
            ab.sub(&ba)
        } else {
            ab.add(&ba)
        }
    }

    /// Hodge star fixed by `α ∧ *β = (α, β) vol` with `vol = o · dx¹∧…∧dxⁿ`.
    pub fn hodge_star(&self, eta: &FrameMetric) -> Result<Self> {
        if eta.dim() != self.n {
            return Err(GeomError::Dimension(format!("metric of dim {} on forms over ℝ^{}", eta.dim(), self.n)));
        }
        let b = basis(self.n);
        let full = (1u32 << self.n) - 1;
        let proto = &self.coeffs[0];
        let mut out = ExteriorForm::zero(self.n, self.n - self.degree, proto);
        for (i, &m) in b.by_degree[self.degree].iter().enumerate() {
            let comp = full & !m;
            let s = merge_sign(m, comp) * eta.eta_of(m) * eta.orientation;
            out.coeffs[b.position[comp as usize]] = self.coeffs[i].scale(s);
        }
        Ok(out)
    }

    pub fn star(&self, eta: &FrameMetric) -> Self {
        self.hodge_star(eta).expect("hodge star dimension")
    }

    /// `(H, H') = Σ_{I increasing} η^I k(H_I, H'_I)`, the 1/p! sum over ordered indices.
    pub fn inner_with(&self, rhs: &Self, eta: &FrameMetric, k: impl Fn(&C, &C) -> f64) -> Result<f64> {
        self.check_same(rhs)?;
        if eta.dim() != self.n {
            return Err(GeomError::Dimension("metric dimension".into()));
        }
        Ok(self
            .masks()
            .iter()
            .enumerate()
            .map(|(i, &m)| eta.eta_of(m) * k(&self.coeffs[i], &rhs.coeffs[i]))
            .sum())
    }

    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.magnitude()))
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<C: ComplexCoeff> ExteriorForm<C> {
    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        self.map(|c| c.scale_c(s))
    }
}

impl ExteriorForm<f64> {
    pub fn one(n: usize) -> Self {
        ExteriorForm { n, degree: 0, coeffs: vec![1.0] }
    }

    pub fn vol(n: usize) -> Self {
        ExteriorForm::monomial(n, &(0..n).collect::<Vec<_>>(), 1.0)
    }

    pub fn dx(n: usize, i: usize) -> Self {
        ExteriorForm::monomial(n, &[i], 1.0)
    }

    pub fn inner(&self, rhs: &Self, eta: &FrameMetric) -> Result<f64> {
        self.inner_with(rhs, eta, |a, b| a * b)
    }

    pub fn to_complex(&self) -> ExteriorForm<Complex64> {
        self.map(|&x| Complex64::new(x, 0.0))
    }
}

impl ExteriorForm<Complex64> {
    /// Hermitian inner product `Σ η^I conj(a_I) b_I`.
    pub fn hermitian_inner(&self, rhs: &Self) -> Complex64 {
        self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.hermitian_inner(self).re.sqrt()
    }
}

impl<C: Coeff> ExteriorForm<Jet<C>> {
    /// Exterior derivative computed from the jet partials.
    pub fn d(&self) -> Result<Self> {
        if self.degree >= self.n {
            return Err(GeomError::Precondition(format!(
                "d of a degree-{} form on ℝ^{} would have degree {}",
                self.degree,
                self.n,
                self.degree + 1
            )));
        }
        let b = basis(self.n);
        let proto = self.coeffs[0].partial(0);
        let mut out = ExteriorForm::zero(self.n, self.degree + 1, &proto);
        for (i, &m) in b.by_degree[self.degree].iter().enumerate() {
            for v in 0..self.n {
                if m & (1 << v) != 0 {
                    continue;
                }
                let s = merge_sign(1 << v, m);
                let term = self.coeffs[i].partial(v).scale(s);
                out.coeffs[b.position[(m | (1 << v)) as usize]].add_assign(&term);
            }
        }
        Ok(out)
    }

    pub fn value(&self) -> ExteriorForm<C> {
        self.map(|j| j.value().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::basis::permutation_sign;

    fn basis_forms(n: usize, p: usize) -> Vec<ExteriorForm<f64>> {
        basis(n).by_degree[p].iter().map(|&m| ExteriorForm::monomial(n, &indices(m), 1.0)).collect()
    }

    #[test]
    fn unit_is_identity_for_wedge() {
        let w = ExteriorForm::monomial(4, &[1, 3], 2.5);
        let r = ExteriorForm::one(4).wedge(&w);
        assert_eq!(r.coeffs, w.coeffs);
    }

    #[test]
    fn dx_wedge_dx_vanishes() {
        let a = ExteriorForm::dx(3, 0);
        assert_eq!(a.wedge(&a).magnitude(), 0.0);
    }

    #[test]
    fn wedge_against_permutation_expansion() {
        // brute force: (dx^a∧dx^b)∧(dx^c∧dx^d) has coefficient sign(a,b,c,d) on the sorted index set
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs = ExteriorForm::monomial(n, &[i, j], 1.0).wedge(&ExteriorForm::monomial(n, &[k, l], 1.0));
                        let expected = permutation_sign(&[i, j, k, l]);
                        assert_eq!(lhs.coeffs[0], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn star_of_one_and_dx12() {
        let eta = FrameMetric::euclidean(4);
        let s = ExteriorForm::one(4).star(&eta);
        assert_eq!(s.coeffs, ExteriorForm::vol(4).coeffs);
        let s2 = ExteriorForm::monomial(4, &[0, 1], 1.0).star(&eta);
        assert_eq!(s2.coeffs, ExteriorForm::monomial(4, &[2, 3], 1.0).coeffs);
    }

    #[test]
    fn defining_property_all_signatures() {
        for n in 1..=6 {
            for s in 0..=n {
                for o in [1.0, -1.0] {
                    let eta = FrameMetric::signature(n, s).with_orientation(o);
                    let mut vol = ExteriorForm::vol(n);
                    vol = vol.scale(o);
                    for p in 0..=n {
                        let forms = basis_forms(n, p);
                        for a in &forms {
                            for b in &forms {
                                let lhs = a.wedge(&b.star(&eta));
                                let ip = a.inner(b, &eta).unwrap();
                                let rhs = vol.scale(ip);
                                assert_eq!(lhs.coeffs, rhs.coeffs);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn double_star_on_two_forms_in_four_dims() {
        let eta = FrameMetric::euclidean(4);
        for f in basis_forms(4, 2) {
            assert_eq!(f.star(&eta).star(&eta).coeffs, f.coeffs);
        }
    }

    #[test]
    fn signature_inner_products() {
        let eta = FrameMetric::signature(4, 1);
        let e = FrameMetric::euclidean(4);
        assert_eq!(ExteriorForm::vol(4).inner(&ExteriorForm::vol(4), &e).unwrap(), 1.0);
        assert_eq!(ExteriorForm::dx(4, 0).inner(&ExteriorForm::dx(4, 0), &eta).unwrap(), 1.0);
        assert_eq!(ExteriorForm::dx(4, 1).inner(&ExteriorForm::dx(4, 1), &eta).unwrap(), -1.0);
        let f = ExteriorForm::monomial(4, &[0, 1], 1.0).add(&ExteriorForm::monomial(4, &[2, 3], 1.0));
        assert_eq!(f.inner(&f, &e).unwrap(), 2.0);
    }

    #[test]
    fn graded_commutator_of_scalar_forms() {
        let a = ExteriorForm::dx(3, 0);
        let b = ExteriorForm::dx(3, 1);
        // [a, b] = a∧b + b∧a = 0 for commuting coefficients and odd degrees
        assert_eq!(a.bracket(&b).magnitude(), 0.0);
    }

    #[test]
    fn degree_overflow_is_rejected() {
        let a = ExteriorForm::monomial(3, &[0, 1], 1.0);
        assert!(a.try_wedge(&a).is_err());
    }
}
