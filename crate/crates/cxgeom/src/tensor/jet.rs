//! Truncated multivariate Taylor expansions.
//!
//! A `Jet` stores the Taylor coefficients `c_α` of a function around a base
//! point, `f(x0 + t) = Σ c_α t^α`, up to a total degree. Differentiation
//! lowers the trustworthy degree by one; `valid` tracks that so partials of
//! too high order are caught instead of silently reading zeros.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::coeff::{CMat, Coeff, ComplexCoeff, RMat};

#[derive(Debug)]
pub struct JetSpace {
    pub nvars: usize,
    pub order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// Number of monomials with degree ≤ k, for k = 0..=order.
    count_le: Vec<usize>,
    /// Product table `(a, b, c)` with `x^a x^b = x^c`, sorted by degree of `c`.
    mul: Vec<(u32, u32, u32)>,
    mul_le: Vec<usize>,
    /// Per variable: `(src, dst, factor)` with `∂_v x^src = factor · x^dst`.
    deriv: Vec<Vec<(usize, usize, f64)>>,
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<Self> {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut count_le = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut level = Vec::new();
            monomials_of_degree(nvars, d, &mut vec![0u8; nvars], 0, &mut level);
            level.sort_by(|a, b| b.cmp(a));
            exps.extend(level);
            count_le.push(exps.len());
        }
        let degree: Vec<usize> = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let lookup: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut mul = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if degree[a] + degree[b] > order {
                    continue;
                }
                let ec: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                mul.push((a as u32, b as u32, lookup[&ec] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, c)| degree[c as usize]);
        let mul_le = (0..=order)
            .map(|k| mul.iter().take_while(|t| degree[t.2 as usize] <= k).count())
            .collect();

        let deriv = (0..nvars)
            .map(|v| {
                let mut t = Vec::new();
                for (src, e) in exps.iter().enumerate() {
                    if e[v] == 0 {
                        continue;
                    }
                    let mut de = e.clone();
                    de[v] -= 1;
                    t.push((src, lookup[&de], e[v] as f64));
                }
                t
            })
            .collect();

        Arc::new(JetSpace { nvars, order, exps, degree, lookup, count_le, mul, mul_le, deriv })
    }

    pub fn len(&self, valid: usize) -> usize {
        self.count_le[valid]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k]
    }

    pub fn degree_of(&self, k: usize) -> usize {
        self.degree[k]
    }
}

fn monomials_of_degree(n: usize, d: usize, cur: &mut Vec<u8>, var: usize, out: &mut Vec<Vec<u8>>) {
    if var + 1 == n || n == 0 {
        if n > 0 {
            cur[var] = d as u8;
        }
        if n > 0 || d == 0 {
            out.push(cur.clone());
        }
        if n > 0 {
            cur[var] = 0;
        }
        return;
    }
    for k in 0..=d {
        cur[var] = k as u8;
        monomials_of_degree(n, d - k, cur, var + 1, out);
    }
    cur[var] = 0;
}

#[derive(Clone, Debug)]
pub struct Jet<C> {
    pub space: Arc<JetSpace>,
    pub valid: usize,
    pub c: Vec<C>,
}

impl<C: Coeff> Jet<C> {
    pub fn constant(space: &Arc<JetSpace>, v: C) -> Self {
        let n = space.len(space.order);
        let mut c = vec![v.zero_like(); n];
        c[0] = v;
        Jet { space: space.clone(), valid: space.order, c }
    }

    pub fn value(&self) -> &C {
        &self.c[0]
    }

    /// Taylor coefficient for a multi-exponent.
    pub fn coeff(&self, exps: &[u8]) -> &C {
        let k = self.space.index_of(exps).expect("exponent outside jet space");
        assert!(k < self.c.len(), "requested degree exceeds valid order {}", self.valid);
        &self.c[k]
    }

    /// Partial derivative value at the base point for a list of variables
    /// (repeats allowed): `∂_{v1}∂_{v2}… f(x0)`.
    pub fn partial_value(&self, vars: &[usize]) -> C {
        let mut e = vec![0u8; self.space.nvars];
        for &v in vars {
            e[v] += 1;
        }
        let fact: f64 = e.iter().map(|&k| (1..=k as u64).product::<u64>() as f64).product();
        self.coeff(&e).scale(fact)
    }

    pub fn truncate(&self, valid: usize) -> Self {
        let valid = valid.min(self.valid);
        Jet { space: self.space.clone(), valid, c: self.c[..self.space.len(valid)].to_vec() }
    }

    /// `∂f/∂x_v` as a jet of one lower valid order.
    pub fn partial(&self, v: usize) -> Self {
        assert!(self.valid >= 1, "cannot differentiate a jet of valid order 0");
        let valid = self.valid - 1;
        let n = self.space.len(valid);
        let mut c = vec![self.c[0].zero_like(); n];
        for &(src, dst, f) in &self.space.deriv[v] {
            if dst < n && src < self.c.len() {
                c[dst].add_assign(&self.c[src].scale(f));
            }
        }
        Jet { space: self.space.clone(), valid, c }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Jet<D> {
        Jet { space: self.space.clone(), valid: self.valid, c: self.c.iter().map(f).collect() }
    }

    pub fn zip_with(&self, rhs: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        let valid = self.valid.min(rhs.valid);
        let n = self.space.len(valid);
        Jet { space: self.space.clone(), valid, c: (0..n).map(|k| f(&self.c[k], &rhs.c[k])).collect() }
    }

    /// Horner evaluation of `Σ t_k (f − f0)^k`.
    pub fn compose(&self, taylor: &[C]) -> Self {
        let mut d = self.clone();
        d.c[0] = d.c[0].zero_like();
        let kmax = self.valid.min(taylor.len() - 1);
        let mut r = Jet::constant(&self.space, taylor[kmax].clone()).truncate(self.valid);
        for k in (0..kmax).rev() {
            r = r.mul(&d);
            r.c[0] = r.c[0].add(&taylor[k]);
        }
        r
    }
}

impl<C: Coeff> Coeff for Jet<C> {
    fn zero_like(&self) -> Self {
        Jet { space: self.space.clone(), valid: self.valid, c: self.c.iter().map(|x| x.zero_like()).collect() }
    }
    fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.add(b))
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.sub(b))
    }
    fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }
    fn mul(&self, rhs: &Self) -> Self {
        let valid = self.valid.min(rhs.valid);
        let n = self.space.len(valid);
        // the product shape may differ from either factor
        let mut c = vec![self.c[0].mul(&rhs.c[0]).zero_like(); n];
        for &(a, b, k) in &self.space.mul[..self.space.mul_le[valid]] {
            c[k as usize].add_assign(&self.c[a as usize].mul(&rhs.c[b as usize]));
        }
        Jet { space: self.space.clone(), valid, c }
    }
    fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }
    fn magnitude(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.magnitude()))
    }
}

impl<C: ComplexCoeff> ComplexCoeff for Jet<C> {
    fn scale_c(&self, s: Complex64) -> Self {
        self.map(|a| a.scale_c(s))
    }
    fn conj(&self) -> Self {
        self.map(|a| a.conj())
    }
}

impl Jet<f64> {
    pub fn var(space: &Arc<JetSpace>, v: usize, x0: f64) -> Self {
        let mut j = Jet::constant(space, x0);
        let mut e = vec![0u8; space.nvars];
        e[v] = 1;
        if let Some(k) = space.index_of(&e).filter(|&k| k < j.c.len()) {
            j.c[k] = 1.0;
        }
        j
    }

    pub fn vars(space: &Arc<JetSpace>, x0: &[f64]) -> Vec<Self> {
        x0.iter().enumerate().map(|(v, &x)| Jet::var(space, v, x)).collect()
    }

    pub fn to_complex(&self) -> Jet<Complex64> {
        self.map(|&x| Complex64::new(x, 0.0))
    }

    pub fn cst(&self, v: f64) -> Self {
        Jet::constant(&self.space, v).truncate(self.valid)
    }

    pub fn add_f(&self, v: f64) -> Self {
        let mut r = self.clone();
        r.c[0] += v;
        r
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let t: Vec<f64> = (0..=self.valid).map(|k| (-1f64).powi(k as i32) / a.powi(k as i32 + 1)).collect();
        self.compose(&t)
    }

    pub fn powf(&self, p: f64) -> Self {
        let a = self.c[0];
        let mut t = Vec::with_capacity(self.valid + 1);
        let mut binom = 1.0;
        for k in 0..=self.valid {
            t.push(binom * a.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&t)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        let t: Vec<f64> = (0..=self.valid).map(|k| e / factorial(k)).collect();
        self.compose(&t)
    }

    pub fn ln(&self) -> Self {
        let a = self.c[0];
        let mut t = vec![a.ln()];
        for k in 1..=self.valid {
            t.push((-1f64).powi(k as i32 + 1) / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&t)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [s, c, -s, -c];
        let t: Vec<f64> = (0..=self.valid).map(|k| cyc[k % 4] / factorial(k)).collect();
        self.compose(&t)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [c, -s, -c, s];
        let t: Vec<f64> = (0..=self.valid).map(|k| cyc[k % 4] / factorial(k)).collect();
        self.compose(&t)
    }

    pub fn atan(&self) -> Self {
        // atan' = 1/(1+x²); integrate the series of the derivative term by term.
        let a = self.c[0];
        let space1 = JetSpace::new(1, self.valid);
        let x = Jet::var(&space1, 0, a);
        let dx = x.mul(&x).add_f(1.0).recip();
        let mut t = vec![a.atan()];
        for k in 1..=self.valid {
            let e = [(k - 1) as u8];
            t.push(dx.coeff(&e) / k as f64);
        }
        self.compose(&t)
    }
}

impl Jet<Complex64> {
    pub fn re(&self) -> Jet<f64> {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> Jet<f64> {
        self.map(|z| z.im)
    }

    pub fn cst(&self, v: Complex64) -> Self {
        Jet::constant(&self.space, v).truncate(self.valid)
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let t: Vec<Complex64> = (0..=self.valid).map(|k| (-1f64).powi(k as i32) / a.powi(k as i32 + 1)).collect();
        self.compose(&t)
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        let t: Vec<Complex64> = (0..=self.valid).map(|k| e / factorial(k)).collect();
        self.compose(&t)
    }

    pub fn ln(&self) -> Self {
        let a = self.c[0];
        let mut t = vec![a.ln()];
        for k in 1..=self.valid {
            t.push((-1f64).powi(k as i32 + 1) / (a.powi(k as i32) * k as f64));
        }
        self.compose(&t)
    }

    /// Wirtinger `∂/∂z = ½(∂_x − i∂_y)` for jets in variables `(x, y)` at positions `vx`, `vy`.
    pub fn dz(&self, vx: usize, vy: usize) -> Self {
        self.partial(vx).sub(&self.partial(vy).scale_c(Complex64::i())).scale(0.5)
    }

    pub fn dzbar(&self, vx: usize, vy: usize) -> Self {
        self.partial(vx).add(&self.partial(vy).scale_c(Complex64::i())).scale(0.5)
    }
}

macro_rules! matrix_jet_impl {
    ($mat:ty, $scalar:ty) => {
        impl Jet<$mat> {
            /// Inverse through the Neumann series of the nilpotent part.
            pub fn inverse(&self) -> Option<Self> {
                let m0inv = self.c[0].clone().try_inverse()?;
                let mut d = self.clone();
                d.c[0] = d.c[0].zero_like();
                let step = Jet::constant(&self.space, -m0inv.clone()).truncate(self.valid).mul(&d);
                let base = Jet::constant(&self.space, m0inv).truncate(self.valid);
                let mut r = base.clone();
                for _ in 0..self.valid {
                    r = base.add(&step.mul(&r));
                }
                Some(r)
            }

            pub fn entry(&self, i: usize, j: usize) -> Jet<$scalar> {
                self.map(|m| m[(i, j)])
            }

            pub fn trace(&self) -> Jet<$scalar> {
                self.map(|m| m.trace())
            }

            pub fn from_entries(rows: usize, cols: usize, e: &[Jet<$scalar>]) -> Self {
                let space = e[0].space.clone();
                let valid = e.iter().map(|j| j.valid).min().unwrap();
                let n = space.len(valid);
                let c = (0..n).map(|k| <$mat>::from_fn(rows, cols, |i, j| e[i * cols + j].c[k])).collect();
                Jet { space, valid, c }
            }

            pub fn transpose(&self) -> Self {
                self.map(|m| m.transpose())
            }
        }
    };
}

matrix_jet_impl!(CMat, Complex64);
matrix_jet_impl!(RMat, f64);

impl Jet<CMat> {
    pub fn adjoint(&self) -> Self {
        self.map(|m| m.adjoint())
    }

    pub fn scalar_times(s: &Jet<Complex64>, m: &CMat) -> Self {
        s.map(|z| m * *z)
    }

    pub fn dz(&self, vx: usize, vy: usize) -> Self {
        self.partial(vx).sub(&self.partial(vy).scale_c(Complex64::i())).scale(0.5)
    }

    pub fn dzbar(&self, vx: usize, vy: usize) -> Self {
        self.partial(vx).add(&self.partial(vy).scale_c(Complex64::i())).scale(0.5)
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_counts() {
        let s = JetSpace::new(4, 3);
        assert_eq!(s.len(3), 35);
        assert_eq!(s.len(1), 5);
        assert_eq!(s.len(0), 1);
    }

    #[test]
    fn product_rule_on_polynomials() {
        let s = JetSpace::new(2, 4);
        let x = Jet::var(&s, 0, 0.3);
        let y = Jet::var(&s, 1, -0.7);
        // f = x²y + 3y³
        let f = x.mul(&x).mul(&y).add(&y.mul(&y).mul(&y).scale(3.0));
        assert!(close(*f.value(), 0.09 * -0.7 + 3.0 * (-0.343), 1e-14));
        assert!(close(f.partial_value(&[0]), 2.0 * 0.3 * -0.7, 1e-14));
        assert!(close(f.partial_value(&[1]), 0.09 + 9.0 * 0.49, 1e-14));
        assert!(close(f.partial_value(&[0, 1]), 0.6, 1e-14));
        assert!(close(f.partial_value(&[1, 1, 1]), 18.0, 1e-14));
        assert!(close(f.partial_value(&[0, 0, 1]), 2.0, 1e-14));
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let s = JetSpace::new(1, 4);
        let x = Jet::var(&s, 0, 0.4);
        let e = x.exp();
        for k in 0..=4 {
            assert!(close(e.partial_value(&vec![0; k]), 0.4f64.exp(), 1e-13));
        }
        let r = x.recip();
        assert!(close(r.partial_value(&[0, 0]), 2.0 / 0.4f64.powi(3), 1e-12));
        let l = x.ln();
        assert!(close(l.partial_value(&[0, 0, 0]), 2.0 / 0.4f64.powi(3), 1e-12));
        let q = x.sqrt();
        assert!(close(q.partial_value(&[0]), 0.5 / 0.4f64.sqrt(), 1e-13));
        let a = x.atan();
        assert!(close(a.partial_value(&[0]), 1.0 / 1.16, 1e-13));
        assert!(close(a.partial_value(&[0, 0]), -2.0 * 0.4 / (1.16f64 * 1.16), 1e-12));
        let sn = x.sin();
        assert!(close(sn.partial_value(&[0, 0, 0]), -(0.4f64.cos()), 1e-13));
    }

    #[test]
    fn partial_lowers_valid_order() {
        let s = JetSpace::new(3, 2);
        let x = Jet::var(&s, 0, 1.0);
        let d = x.mul(&x).partial(0);
        assert_eq!(d.valid, 1);
        assert!(close(d.partial_value(&[0]), 2.0, 1e-15));
    }

    #[test]
    fn matrix_inverse_jet() {
        let s = JetSpace::new(2, 3);
        let x = Jet::var(&s, 0, 0.2).to_complex();
        let y = Jet::var(&s, 1, 0.5).to_complex();
        let one = x.cst(Complex64::new(1.0, 0.0));
        let m = Jet::<CMat>::from_entries(2, 2, &[one.clone(), x.clone(), y.clone(), one.add(&x.mul(&y))]);
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        for k in 0..prod.c.len() {
            let target = if k == 0 { CMat::identity(2, 2) } else { CMat::zeros(2, 2) };
            assert!((&prod.c[k] - target).norm() < 1e-13);
        }
    }
}
