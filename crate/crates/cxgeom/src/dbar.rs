//! The ∂̄-equation in one and two complex variables.
//!
//! The Cauchy transform `T f(z) = (2πi)⁻¹ ∫ f(ξ)/(ξ−z) dξ∧dξ̄ = (1/π) ∫ f(ξ)/(z−ξ) dA`
//! is discretized by the midpoint rule on the lattice. The cell containing z is
//! either dropped or replaced by its exact first-order contribution
//! `−(h²/π) ∂f/∂z`; the zeroth-order term integrates to zero by symmetry.
//!
//! `gauge_solve` sums the Neumann series `G = Σ Fₙ`, `F₀ = 1`,
//! `Fₙ₊₁ = T(Fₙ A χ)`, so `∂̄G = G A` wherever the cutoff χ equals one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::linalg::{commutator, op_norm};
use crate::tensor::{CMat, GridField, GridSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Matrix-valued samples on a lattice over ℂ (2 real axes) or ℂ² (4 real axes).
/// Axis pairs `(2k, 2k+1)` are the real and imaginary parts of `z_{k+1}`.
#[derive(Clone, Debug)]
pub struct ComplexGridFunction {
    pub spec: GridSpec,
    /// Matrix size N.
    pub dim: usize,
    /// `planes[r·N + c][node]`.
    pub planes: Vec<Vec<Complex64>>,
}

impl ComplexGridFunction {
    pub fn zeros(spec: GridSpec, dim: usize) -> Result<Self> {
        check_spec(&spec)?;
        if dim == 0 {
            return Err(GeomError::InvalidInput("matrix size must be at least 1".into()));
        }
        let planes = vec![vec![ZERO; spec.len()]; dim * dim];
        Ok(ComplexGridFunction { spec, dim, planes })
    }

    pub fn identity(spec: GridSpec, dim: usize) -> Result<Self> {
        let mut g = Self::zeros(spec, dim)?;
        for r in 0..dim {
            g.planes[r * dim + r].iter_mut().for_each(|v| *v = ONE);
        }
        Ok(g)
    }

    /// Samples `f(z)` where `z` holds the complex coordinates of each node.
    pub fn from_fn(spec: GridSpec, dim: usize, f: impl Fn(&[Complex64]) -> CMat + Sync) -> Result<Self> {
        let mut g = Self::zeros(spec, dim)?;
        let vals: Vec<CMat> = (0..g.len()).into_par_iter().map(|k| f(&g.coords(k))).collect();
        for (k, m) in vals.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(GeomError::Dimension(format!("sample is {}×{}, expected {dim}×{dim}", m.nrows(), m.ncols())));
            }
            g.set(k, m);
        }
        Ok(g)
    }

    pub fn from_field(f: &GridField<CMat>) -> Result<Self> {
        let dim = f.values.first().map_or(0, |m| m.nrows());
        let mut g = Self::zeros(f.spec.clone(), dim)?;
        for (k, m) in f.values.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(GeomError::Dimension("mixed matrix sizes in field".into()));
            }
            g.set(k, m);
        }
        Ok(g)
    }

    pub fn to_field(&self) -> GridField<CMat> {
        GridField { spec: self.spec.clone(), values: (0..self.len()).map(|k| self.at(k)).collect(), flagged_margin: 0 }
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn variables(&self) -> usize {
        self.spec.dim() / 2
    }

    pub fn coords(&self, k: usize) -> Vec<Complex64> {
        let p = self.spec.point(k);
        p.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
    }

    pub fn at(&self, k: usize) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, c| self.planes[r * self.dim + c][k])
    }

    pub fn set(&mut self, k: usize, m: &CMat) {
        for r in 0..self.dim {
            for c in 0..self.dim {
                self.planes[r * self.dim + c][k] = m[(r, c)];
            }
        }
    }

    pub fn has_nan(&self) -> bool {
        self.planes.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite())
    }

    /// Pointwise matrix product.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![vec![ZERO; self.len()]; n * n];
        for r in 0..n {
            for c in 0..n {
                let o = &mut out[r * n + c];
                for k in 0..n {
                    let (a, b) = (&self.planes[r * n + k], &rhs.planes[k * n + c]);
                    for ((o, x), y) in o.iter_mut().zip(a).zip(b) {
                        *o += x * y;
                    }
                }
            }
        }
        ComplexGridFunction { spec: self.spec.clone(), dim: n, planes: out }
    }

    pub fn scale_by(&self, s: &[f64]) -> Self {
        let planes = self.planes.iter().map(|p| p.iter().zip(s).map(|(z, w)| z * w).collect()).collect();
        ComplexGridFunction { spec: self.spec.clone(), dim: self.dim, planes }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let planes = self.planes.iter().zip(&rhs.planes).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        ComplexGridFunction { spec: self.spec.clone(), dim: self.dim, planes }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let planes = self.planes.iter().zip(&rhs.planes).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        ComplexGridFunction { spec: self.spec.clone(), dim: self.dim, planes }
    }

    /// Conjugation `M ↦ C⁻¹ M C` at every node.
    pub fn conjugate_by(&self, c: &CMat) -> Result<Self> {
        let ci = c.clone().try_inverse().ok_or_else(|| GeomError::Precondition("conjugating matrix is singular".into()))?;
        let mut out = self.clone();
        for k in 0..self.len() {
            out.set(k, &(&ci * self.at(k) * c));
        }
        Ok(out)
    }

    /// Frobenius norm at node k.
    pub fn node_norm(&self, k: usize) -> f64 {
        self.planes.iter().map(|p| p[k].norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.len()).map(|k| self.node_norm(k)).fold(0.0, f64::max)
    }

    /// Max over nodes of the spectral norm.
    pub fn sup_op_norm(&self) -> f64 {
        if self.dim == 1 {
            return self.planes[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        (0..self.len()).into_par_iter().map(|k| op_norm(&self.at(k))).reduce(|| 0.0, f64::max)
    }

    /// Every 2^j-th node along each axis; needs `(n−1)` divisible by 2^j.
    pub fn coarsen(&self, j: u32) -> Result<Self> {
        let step = 1usize << j;
        if self.spec.shape.iter().any(|&s| (s - 1) % step != 0 || (s - 1) / step < 2) {
            return Err(GeomError::InvalidInput(format!("grid of shape {:?} cannot be coarsened {j} times", self.spec.shape)));
        }
        let shape: Vec<usize> = self.spec.shape.iter().map(|&s| (s - 1) / step + 1).collect();
        let spec = GridSpec::new(self.spec.lo.clone(), self.spec.hi.clone(), shape)?;
        let mut out = Self::zeros(spec.clone(), self.dim)?;
        for k in 0..spec.len() {
            let idx: Vec<usize> = spec.unravel(k).iter().map(|i| i * step).collect();
            let src = self.spec.ravel(&idx);
            for (o, p) in out.planes.iter_mut().zip(&self.planes) {
                o[k] = p[src];
            }
        }
        Ok(out)
    }
}

fn check_spec(spec: &GridSpec) -> Result<()> {
    if spec.dim() != 2 && spec.dim() != 4 {
        return Err(GeomError::Dimension(format!("expected 2 or 4 real axes, found {}", spec.dim())));
    }
    let h = spec.spacing();
    for pair in h.chunks(2) {
        if ((pair[0] - pair[1]) / pair[0]).abs() > 1e-9 {
            return Err(GeomError::InvalidInput("cells must be square in each complex variable".into()));
        }
    }
    for a in (0..spec.dim()).step_by(2) {
        if spec.shape[a] != spec.shape[a + 1] {
            return Err(GeomError::InvalidInput("each complex slice must be an n×n lattice".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityRule {
    CellExclusion,
    PolarCorrected,
}

/// Radial cutoff: 1 up to `plateau`, 0 beyond `support`, quintic smoothstep between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub center: Complex64,
    pub plateau: f64,
    pub support: f64,
}

impl Cutoff {
    pub fn new(center: Complex64, support: f64) -> Self {
        Cutoff { center, plateau: 0.6 * support, support }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let r = (z - self.center).norm();
        if r <= self.plateau {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            let s = (self.support - r) / (self.support - self.plateau);
            s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }

    pub fn on_plateau(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.plateau
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyQuadrature {
    pub rule: SingularityRule,
    pub cutoff: Cutoff,
}

impl CauchyQuadrature {
    /// Polar-corrected rule with the cutoff inscribed in the slice square.
    pub fn for_slice(spec: &GridSpec, axis: usize) -> Self {
        let (lo, hi) = ((spec.lo[axis], spec.lo[axis + 1]), (spec.hi[axis], spec.hi[axis + 1]));
        let center = Complex64::new(0.5 * (lo.0 + hi.0), 0.5 * (lo.1 + hi.1));
        let half = 0.5 * (hi.0 - lo.0).min(hi.1 - lo.1);
        CauchyQuadrature { rule: SingularityRule::PolarCorrected, cutoff: Cutoff::new(center, half) }
    }
}

/// `K(z−ξ) = h² / (π (z−ξ))` for all lattice offsets, rows reversed in the second index.
struct Kernel {
    n: usize,
    h: f64,
    /// `(di + n−1)·(2n−1) + (n−1 − dj)`.
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Kernel {
    fn new(n: usize, h: f64) -> Self {
        let w = 2 * n - 1;
        let mut re = vec![0.0; w * w];
        let mut im = vec![0.0; w * w];
        for a in 0..w {
            for b in 0..w {
                let (di, dj) = (a as f64 - (n - 1) as f64, (n - 1) as f64 - b as f64);
                if di == 0.0 && dj == 0.0 {
                    continue;
                }
                let k = Complex64::new(di, dj).inv() * (h / PI);
                re[a * w + b] = k.re;
                im[a * w + b] = k.im;
            }
        }
        Kernel { n, h, re, im }
    }

    /// Transform of one n×n slice, split into real and imaginary parts.
    fn apply_slice(&self, fr: &[f64], fi: &[f64], out: &mut [Complex64]) {
        let n = self.n;
        let w = 2 * n - 1;
        for iz in 0..n {
            for jz in 0..n {
                let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
                let (mut b0, mut b1, mut b2, mut b3) = (0.0, 0.0, 0.0, 0.0);
                for is in 0..n {
                    let base = (iz + n - 1 - is) * w + (n - 1 - jz);
                    let kr = &self.re[base..base + n];
                    let ki = &self.im[base..base + n];
                    let xr = &fr[is * n..is * n + n];
                    let xi = &fi[is * n..is * n + n];
                    let mut j = 0;
                    while j + 2 <= n {
                        a0 += kr[j] * xr[j];
                        a1 -= ki[j] * xi[j];
                        b0 += kr[j] * xi[j];
                        b1 += ki[j] * xr[j];
                        a2 += kr[j + 1] * xr[j + 1];
                        a3 -= ki[j + 1] * xi[j + 1];
                        b2 += kr[j + 1] * xi[j + 1];
                        b3 += ki[j + 1] * xr[j + 1];
                        j += 2;
                    }
                    if j < n {
                        a0 += kr[j] * xr[j] - ki[j] * xi[j];
                        b0 += kr[j] * xi[j] + ki[j] * xr[j];
                    }
                }
                out[iz * n + jz] = Complex64::new(a0 + a1 + a2 + a3, b0 + b1 + b2 + b3);
            }
        }
    }

    /// Node-major batch: `data[node·batch + b]`, one transform per b.
    fn apply_node_major(&self, data: &[Complex64], batch: usize) -> Vec<Complex64> {
        let n = self.n;
        let w = 2 * n - 1;
        let nn = n * n;
        let mut out = vec![ZERO; nn * batch];
        out.par_chunks_mut(batch).enumerate().for_each(|(z, o)| {
            let (iz, jz) = (z / n, z % n);
            for s in 0..nn {
                if s == z {
                    continue;
                }
                let (is, js) = (s / n, s % n);
                let idx = (iz + n - 1 - is) * w + (n - 1 - jz + js);
                let k = Complex64::new(self.re[idx], self.im[idx]);
                for (o, x) in o.iter_mut().zip(&data[s * batch..(s + 1) * batch]) {
                    *o += k * x;
                }
            }
        });
        out
    }
}

/// Which complex variable of a lattice a transform acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    Z1,
    Z2,
}

struct SliceLayout {
    n: usize,
    h: f64,
    /// Number of slices and the stride pattern.
    batch: usize,
    node_major: bool,
}

fn layout(spec: &GridSpec, var: Variable) -> Result<SliceLayout> {
    let h = spec.spacing();
    match (spec.dim(), var) {
        (2, Variable::Z1) => Ok(SliceLayout { n: spec.shape[0], h: h[0], batch: 1, node_major: false }),
        (4, Variable::Z1) => Ok(SliceLayout { n: spec.shape[0], h: h[0], batch: spec.shape[2] * spec.shape[3], node_major: true }),
        (4, Variable::Z2) => Ok(SliceLayout { n: spec.shape[2], h: h[2], batch: spec.shape[0] * spec.shape[1], node_major: false }),
        _ => Err(GeomError::Dimension(format!("no variable {var:?} on a {}-axis lattice", spec.dim()))),
    }
}

/// Central-difference ∂/∂z or ∂/∂z̄ in one variable; one-sided at faces.
fn wirtinger(plane: &[Complex64], lay: &SliceLayout, conj: bool) -> Vec<Complex64> {
    let n = lay.n;
    let nn = n * n;
    let pos = |node: usize, b: usize| if lay.node_major { node * lay.batch + b } else { b * nn + node };
    let diff = |b: usize, i: usize, j: usize, axis: usize| -> Complex64 {
        let at = |i: usize, j: usize| plane[pos(i * n + j, b)];
        let c = if axis == 0 { i } else { j };
        let step = |c: usize| if axis == 0 { at(c, j) } else { at(i, c) };
        if c == 0 {
            (step(1) * 4.0 - step(0) * 3.0 - step(2)) / (2.0 * lay.h)
        } else if c == n - 1 {
            (step(n - 1) * 3.0 - step(n - 2) * 4.0 + step(n - 3)) / (2.0 * lay.h)
        } else {
            (step(c + 1) - step(c - 1)) / (2.0 * lay.h)
        }
    };
    let sign = if conj { 1.0 } else { -1.0 };
    let mut out = vec![ZERO; plane.len()];
    for b in 0..lay.batch {
        for i in 0..n {
            for j in 0..n {
                let dx = diff(b, i, j, 0);
                let dy = diff(b, i, j, 1);
                out[pos(i * n + j, b)] = (dx + Complex64::new(0.0, sign) * dy) * 0.5;
            }
        }
    }
    out
}

fn transform_plane(plane: &[Complex64], kernel: &Kernel, lay: &SliceLayout, rule: SingularityRule) -> Vec<Complex64> {
    let nn = lay.n * lay.n;
    let mut out = if lay.node_major {
        kernel.apply_node_major(plane, lay.batch)
    } else {
        let mut out = vec![ZERO; plane.len()];
        out.par_chunks_mut(nn).zip(plane.par_chunks(nn)).for_each(|(o, f)| {
            let fr: Vec<f64> = f.iter().map(|z| z.re).collect();
            let fi: Vec<f64> = f.iter().map(|z| z.im).collect();
            kernel.apply_slice(&fr, &fi, o);
        });
        out
    };
    if rule == SingularityRule::PolarCorrected {
        let dz = wirtinger(plane, lay, false);
        let w = kernel.h * kernel.h / PI;
        out.iter_mut().zip(dz).for_each(|(o, d)| *o -= d * w);
    }
    out
}

/// Cauchy transform in one variable; the cutoff is not applied here.
pub fn cauchy_transform_in(f: &ComplexGridFunction, var: Variable, rule: SingularityRule) -> Result<ComplexGridFunction> {
    if f.is_empty() {
        return Err(GeomError::InvalidInput("empty domain".into()));
    }
    if f.has_nan() {
        return Err(GeomError::InvalidInput("non-finite value in input".into()));
    }
    let lay = layout(&f.spec, var)?;
    let kernel = Kernel::new(lay.n, lay.h);
    let planes = f.planes.iter().map(|p| transform_plane(p, &kernel, &lay, rule)).collect();
    Ok(ComplexGridFunction { spec: f.spec.clone(), dim: f.dim, planes })
}

/// `g` with ∂g/∂z̄ = f on a lattice over ℂ.
pub fn cauchy_transform(f: &ComplexGridFunction, q: &CauchyQuadrature) -> Result<ComplexGridFunction> {
    if f.variables() != 1 {
        return Err(GeomError::Dimension("cauchy_transform acts on functions of one variable".into()));
    }
    cauchy_transform_in(f, Variable::Z1, q.rule)
}

/// ∂/∂z̄ in the given variable by central differences.
pub fn dbar(f: &ComplexGridFunction, var: Variable) -> Result<ComplexGridFunction> {
    let lay = layout(&f.spec, var)?;
    let planes = f.planes.iter().map(|p| wirtinger(p, &lay, true)).collect();
    Ok(ComplexGridFunction { spec: f.spec.clone(), dim: f.dim, planes })
}

fn slice_coord(f: &ComplexGridFunction, k: usize, var: Variable) -> Complex64 {
    let z = f.coords(k);
    match var {
        Variable::Z1 => z[0],
        Variable::Z2 => z[1],
    }
}

fn slice_margin(spec: &GridSpec, k: usize, var: Variable) -> usize {
    let idx = spec.unravel(k);
    let a = if var == Variable::Z1 { 0 } else { 2 };
    let n = spec.shape[a];
    [idx[a], idx[a + 1]].iter().map(|&i| i.min(n - 1 - i)).min().unwrap()
}

/// `max ‖∂g/∂z̄ − f‖` over interior nodes inside `region`.
pub fn poisson_residual(g: &ComplexGridFunction, f: &ComplexGridFunction, region: impl Fn(Complex64) -> bool) -> Result<f64> {
    let d = dbar(g, Variable::Z1)?.sub(f);
    Ok((0..d.len())
        .filter(|&k| slice_margin(&d.spec, k, Variable::Z1) >= 1 && region(slice_coord(&d, k, Variable::Z1)))
        .map(|k| d.node_norm(k))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct GaugeSolution {
    pub g: ComplexGridFunction,
    /// Sup norms of F₀, F₁, … .
    pub iterate_norms: Vec<f64>,
    /// A-priori contraction estimate sup‖Aχ‖ · sup_z Σ|K|.
    pub contraction_bound: f64,
    pub cutoff: Cutoff,
}

const MAX_ITER: usize = 60;
const STOP: f64 = 1e-12;

/// Discrete analogue of sup_z (1/π)∫_{|ξ−c|<R} dA/|z−ξ|, evaluated at the cutoff centre.
fn kernel_mass(spec: &GridSpec, axis: usize, cut: &Cutoff) -> f64 {
    let (n, h) = (spec.shape[axis], spec.spacing()[axis]);
    let (x0, y0) = (spec.lo[axis], spec.lo[axis + 1]);
    let ic = (((cut.center.re - x0) / h).round() as usize).min(n - 1);
    let jc = (((cut.center.im - y0) / h).round() as usize).min(n - 1);
    let z = Complex64::new(x0 + ic as f64 * h, y0 + jc as f64 * h);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let xi = Complex64::new(x0 + i as f64 * h, y0 + j as f64 * h);
            if (i, j) != (ic, jc) && cut.eval(xi) > 0.0 {
                s += h * h / (PI * (z - xi).norm());
            }
        }
    }
    s
}

fn neumann(
    a: &ComplexGridFunction,
    var: Variable,
    q: &CauchyQuadrature,
) -> Result<GaugeSolution> {
    let axis = if var == Variable::Z1 { 0 } else { 2 };
    let h = a.spec.spacing()[axis];
    let mut cut = q.cutoff;
    let (chi, bound) = loop {
        let chi: Vec<f64> = (0..a.len()).map(|k| cut.eval(slice_coord(a, k, var))).collect();
        let sup = a.scale_by(&chi).sup_op_norm();
        let bound = sup * kernel_mass(&a.spec, axis, &cut);
        if bound < 0.5 {
            break (chi, bound);
        }
        cut = Cutoff::new(cut.center, 0.8 * cut.support);
        if cut.plateau < 2.0 * h {
            return Err(GeomError::ContractionFailure { bound, target: 0.5 });
        }
    };
    let achi = a.scale_by(&chi);
    let mut f = ComplexGridFunction::identity(a.spec.clone(), a.dim)?;
    let mut g = f.clone();
    let mut norms = vec![f.sup_op_norm()];
    let mut slow = 0;
    for _ in 0..MAX_ITER {
        f = cauchy_transform_in(&f.mul(&achi), var, q.rule)?;
        let nf = f.sup_op_norm();
        g = g.add(&f);
        let prev = *norms.last().unwrap();
        norms.push(nf);
        if nf < STOP {
            break;
        }
        if prev > 0.0 && nf / prev >= 0.5 {
            slow += 1;
            if slow >= 5 {
                return Err(GeomError::ContractionFailure { bound: nf / prev, target: 0.5 });
            }
        } else {
            slow = 0;
        }
    }
    for k in 0..g.len() {
        if g.at(k).determinant().norm() < 1e-300 {
            return Err(GeomError::Singular(k));
        }
    }
    Ok(GaugeSolution { g, iterate_norms: norms, contraction_bound: bound, cutoff: cut })
}

/// G with A = G⁻¹ ∂G/∂z̄ on the plateau of the cutoff.
pub fn gauge_solve(a: &ComplexGridFunction, q: &CauchyQuadrature) -> Result<GaugeSolution> {
    if a.variables() != 1 {
        return Err(GeomError::Dimension("gauge_solve acts on functions of one variable".into()));
    }
    if a.has_nan() {
        return Err(GeomError::InvalidInput("non-finite value in input".into()));
    }
    neumann(a, Variable::Z1, q)
}

/// Pointwise `∂G/∂z̄ − G·A` in the given variable.
pub fn gauge_residual_field(g: &ComplexGridFunction, a: &ComplexGridFunction, var: Variable) -> Result<ComplexGridFunction> {
    Ok(dbar(g, var)?.sub(&g.mul(a)))
}

/// `max ‖∂G/∂z̄ − G A‖` over interior nodes on the plateau, divided by max ‖A‖ there.
pub fn relative_gauge_residual(g: &ComplexGridFunction, a: &ComplexGridFunction, cut: &Cutoff) -> Result<f64> {
    let r = gauge_residual_field(g, a, Variable::Z1)?;
    let nodes: Vec<usize> = (0..g.len())
        .filter(|&k| slice_margin(&g.spec, k, Variable::Z1) >= 1 && cut.on_plateau(slice_coord(g, k, Variable::Z1)))
        .collect();
    let num = nodes.iter().map(|&k| r.node_norm(k)).fold(0.0, f64::max);
    let den = nodes.iter().map(|&k| a.node_norm(k)).fold(0.0, f64::max);
    Ok(if den > 0.0 { num / den } else { num })
}

/// `max ‖∂A₂/∂z̄₁ − ∂A₁/∂z̄₂ + [A₁, A₂]‖` over interior nodes.
pub fn compatibility_residual(a1: &ComplexGridFunction, a2: &ComplexGridFunction) -> Result<f64> {
    let d = dbar(a2, Variable::Z1)?.sub(&dbar(a1, Variable::Z2)?);
    let mut worst: f64 = 0.0;
    for k in 0..d.len() {
        if d.spec.face_distance(k) < 1 {
            continue;
        }
        let m = d.at(k) + commutator(&a1.at(k), &a2.at(k));
        worst = worst.max(m.norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct MultiSolution {
    pub g: ComplexGridFunction,
    pub compatibility: f64,
    /// Relative residuals of ∂̄_α G = G A_α on the joint plateau, α = 1, 2.
    pub residuals: [f64; 2],
    pub cutoffs: [Cutoff; 2],
}

/// G over ℂ² with ∂G/∂z̄_α = G A_α, α = 1, 2.
///
/// First G̃ solves the z₁-equation slice by slice. Then
/// A'₂ = G̃ A₂ G̃⁻¹ − ∂̄₂G̃ G̃⁻¹ is holomorphic in z₁ by compatibility, and
/// H solving ∂̄₂H = H A'₂ slice by slice gives G = H G̃.
pub fn multivariable_solve(
    a1: &ComplexGridFunction,
    a2: &ComplexGridFunction,
    q: [CauchyQuadrature; 2],
    tau_c: Option<f64>,
) -> Result<MultiSolution> {
    if a1.variables() != 2 || a2.spec != a1.spec || a2.dim != a1.dim {
        return Err(GeomError::Dimension("multivariable_solve needs two fields on the same ℂ² lattice".into()));
    }
    if a1.has_nan() || a2.has_nan() {
        return Err(GeomError::InvalidInput("non-finite value in input".into()));
    }
    let h = a1.spec.spacing().into_iter().fold(0.0, f64::max);
    let tau = tau_c.unwrap_or(10.0 * h);
    let compat = compatibility_residual(a1, a2)?;
    if compat > tau {
        return Err(GeomError::CompatibilityViolation(compat));
    }
    let s1 = neumann(a1, Variable::Z1, &q[0])?;
    let gt = s1.g;
    let mut gt_inv = gt.clone();
    for k in 0..gt.len() {
        let inv = gt.at(k).try_inverse().ok_or(GeomError::Singular(k))?;
        gt_inv.set(k, &inv);
    }
    let a2p = gt.mul(a2).mul(&gt_inv).sub(&dbar(&gt, Variable::Z2)?.mul(&gt_inv));
    let s2 = neumann(&a2p, Variable::Z2, &q[1])?;
    let g = s2.g.mul(&gt);
    let cut = [s1.cutoff, s2.cutoff];
    let nodes: Vec<usize> = (0..g.len())
        .filter(|&k| {
            let z = g.coords(k);
            g.spec.face_distance(k) >= 1 && cut[0].on_plateau(z[0]) && cut[1].on_plateau(z[1])
        })
        .collect();
    let mut residuals = [0.0; 2];
    for (i, (a, var)) in [(a1, Variable::Z1), (a2, Variable::Z2)].into_iter().enumerate() {
        let r = gauge_residual_field(&g, a, var)?;
        let num = nodes.iter().map(|&k| r.node_norm(k)).fold(0.0, f64::max);
        let den = nodes.iter().map(|&k| a.node_norm(k)).fold(0.0, f64::max);
        residuals[i] = if den > 0.0 { num / den } else { num };
    }
    Ok(MultiSolution { g, compatibility: compat, residuals, cutoffs: cut })
}

/// Lattice over the square `[−r, r]²` (n nodes per side), or its product with itself.
pub fn square_spec(r: f64, n: usize, variables: usize) -> GridSpec {
    GridSpec::cube(2 * variables, -r, r, n)
}

/// Potentials used by tests, the verify suite and the CLI.
pub mod fixtures {
    use super::*;
    use crate::rng::{gaussian_c, seeded};

    /// `A = ∂̄φ E` with `E² = 0` and `φ = 0.4 z̄ e^{−|z|²}`, so `G = exp(φE)` solves exactly.
    pub fn manufactured(s: GridSpec) -> ComplexGridFunction {
        let zero = Complex64::new(0.0, 0.0);
        ComplexGridFunction::from_fn(s, 2, |z| {
            let z = z[0];
            let dphi = (-z.norm_sqr()).exp() * 0.4 * (1.0 - z.norm_sqr());
            CMat::from_row_slice(2, 2, &[zero, Complex64::from(dphi), zero, zero])
        })
        .expect("two-dimensional slice spec")
    }

    /// `(m₀ + m₁z̄)e^{−|z|²}` with small Gaussian `m₀, m₁`.
    pub fn generic(s: GridSpec, seed: u64) -> ComplexGridFunction {
        let mut rng = seeded(seed, "dbar-generic");
        let s12 = Complex64::from(0.12);
        let (m0, m1) = (gaussian_c(&mut rng, 2, 2) * s12, gaussian_c(&mut rng, 2, 2) * s12);
        ComplexGridFunction::from_fn(s, 2, |z| (&m0 + &m1 * z[0].conj()) * Complex64::from((-z[0].norm_sqr()).exp()))
            .expect("two-dimensional slice spec")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(spec: GridSpec, f: impl Fn(Complex64) -> Complex64 + Sync) -> ComplexGridFunction {
        ComplexGridFunction::from_fn(spec, 1, |z| CMat::from_element(1, 1, f(z[0]))).unwrap()
    }

    fn q(spec: &GridSpec) -> CauchyQuadrature {
        CauchyQuadrature::for_slice(spec, 0)
    }

    #[test]
    fn zero_maps_to_zero() {
        let s = square_spec(1.0, 17, 1);
        let g = cauchy_transform(&ComplexGridFunction::zeros(s.clone(), 2).unwrap(), &q(&s)).unwrap();
        assert_eq!(g.sup_norm(), 0.0);
    }

    #[test]
    fn rejects_nan() {
        let s = square_spec(1.0, 9, 1);
        let f = scalar(s.clone(), |_| Complex64::new(f64::NAN, 0.0));
        assert!(matches!(cauchy_transform(&f, &q(&s)), Err(GeomError::InvalidInput(_))));
    }

    #[test]
    fn kernel_matches_direct_sum() {
        // independent evaluation of (h²/π) Σ f(ξ)/(z−ξ) at one node
        let s = square_spec(1.0, 9, 1);
        let f = scalar(s.clone(), |z| z * z + Complex64::new(0.3, -1.0));
        let g = cauchy_transform_in(&f, Variable::Z1, SingularityRule::CellExclusion).unwrap();
        let h = s.spacing()[0];
        for k in [0, 13, 40, 80] {
            let z = f.coords(k)[0];
            let mut acc = ZERO;
            for j in 0..f.len() {
                if j != k {
                    acc += f.planes[0][j] / (z - f.coords(j)[0]) * (h * h / PI);
                }
            }
            assert!((acc - g.planes[0][k]).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_on_disc_has_small_residual() {
        let mut prev = f64::INFINITY;
        for n in [65, 129] {
            let s = square_spec(1.0, n, 1);
            let f = scalar(s.clone(), |z| if z.norm() <= 1.0 { ONE } else { ZERO });
            let g = cauchy_transform(&f, &q(&s)).unwrap();
            let r = poisson_residual(&g, &f, |z| z.norm() <= 0.6).unwrap();
            assert!(r < prev);
            prev = r;
        }
        assert!(prev < 0.05, "{prev}");
    }

    #[test]
    fn gaussian_refinement_order() {
        let mut res = Vec::new();
        for n in [33, 65, 129] {
            let s = square_spec(1.0, n, 1);
            let f = scalar(s.clone(), |z| Complex64::new((-z.norm_sqr() / 0.08).exp(), 0.0));
            let g = cauchy_transform(&f, &q(&s)).unwrap();
            res.push(poisson_residual(&g, &f, |z| z.norm() <= 0.6).unwrap());
        }
        for w in res.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.0, "{res:?}");
        }
    }

    #[test]
    fn zero_potential_gives_identity() {
        let s = square_spec(1.0, 17, 1);
        let sol = gauge_solve(&ComplexGridFunction::zeros(s.clone(), 2).unwrap(), &q(&s)).unwrap();
        let id = ComplexGridFunction::identity(s, 2).unwrap();
        assert_eq!(sol.g.sub(&id).sup_norm(), 0.0);
    }

    #[test]
    fn manufactured_nilpotent_potential() {
        let s = square_spec(1.0, 129, 1);
        let a = fixtures::manufactured(s.clone());
        let sol = gauge_solve(&a, &q(&s)).unwrap();
        let r = relative_gauge_residual(&sol.g, &a, &sol.cutoff).unwrap();
        assert!(r < 1e-3, "{r}");
        for (n, norm) in sol.iterate_norms.iter().enumerate() {
            assert!(*norm <= sol.contraction_bound.powi(n as i32) * (1.0 + 1e-9) + 1e-15);
        }
    }

    #[test]
    fn neumann_series_decays_geometrically() {
        let s = square_spec(1.0, 33, 1);
        let a = fixtures::generic(s.clone(), 3);
        let sol = gauge_solve(&a, &q(&s)).unwrap();
        assert!(sol.contraction_bound < 0.5);
        assert!(sol.iterate_norms.len() > 5);
        for (n, norm) in sol.iterate_norms.iter().enumerate() {
            assert!(*norm <= sol.contraction_bound.powi(n as i32) * (1.0 + 1e-9) + 1e-15, "n={n}");
        }
        for k in 0..sol.g.len() {
            assert!(sol.g.at(k).determinant().norm() > 0.0);
        }
        let r = relative_gauge_residual(&sol.g, &a, &sol.cutoff).unwrap();
        assert!(r < 2e-2, "{r}");
    }

    #[test]
    fn gauge_covariance() {
        let s = square_spec(1.0, 25, 1);
        let a = fixtures::generic(s.clone(), 5);
        let c = CMat::from_row_slice(2, 2, &[ONE, Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.0), Complex64::new(1.2, 0.0)]);
        let sol = gauge_solve(&a, &q(&s)).unwrap();
        let ac = a.conjugate_by(&c).unwrap();
        let solc = gauge_solve(&ac, &q(&s)).unwrap();
        let r = gauge_residual_field(&sol.g, &a, Variable::Z1).unwrap().conjugate_by(&c).unwrap();
        let rc = gauge_residual_field(&solc.g, &ac, Variable::Z1).unwrap();
        assert!(r.sub(&rc).sup_norm() < 1e-12);
    }

    #[test]
    fn scalar_exponential_oracle() {
        let s = square_spec(1.0, 65, 1);
        let a = scalar(s.clone(), |z| Complex64::new(0.2, 0.1) * (-z.norm_sqr()).exp() * (ONE + z));
        let quad = q(&s);
        let sol = gauge_solve(&a, &quad).unwrap();
        let chi: Vec<f64> = (0..a.len()).map(|k| sol.cutoff.eval(a.coords(k)[0])).collect();
        let t = cauchy_transform(&a.scale_by(&chi), &quad).unwrap();
        let g0 = scalar(s, |_| ZERO);
        let mut g_exp = g0.clone();
        for k in 0..g_exp.len() {
            g_exp.planes[0][k] = t.planes[0][k].exp();
        }
        let r1 = relative_gauge_residual(&sol.g, &a, &sol.cutoff).unwrap();
        let r2 = relative_gauge_residual(&g_exp, &a, &sol.cutoff).unwrap();
        assert!(r1 < 1e-2 && r2 < 1e-2, "{r1} {r2}");
    }

    #[test]
    fn oversized_potential_shrinks_cutoff() {
        let s = square_spec(1.0, 33, 1);
        let a = scalar(s.clone(), |_| Complex64::new(0.6, 0.0));
        let quad = q(&s);
        let sol = gauge_solve(&a, &quad).unwrap();
        assert!(sol.cutoff.support < quad.cutoff.support);
        let huge = scalar(s.clone(), |_| Complex64::new(1e3, 0.0));
        assert!(matches!(gauge_solve(&huge, &quad), Err(GeomError::ContractionFailure { .. })));
    }

    fn manufactured_c2(n: usize) -> (ComplexGridFunction, ComplexGridFunction) {
        // G₀ = 1 + φ E with E² = 0, A_α = ∂̄_α φ E
        let s = square_spec(1.0, n, 2);
        let mk = |alpha: usize| {
            ComplexGridFunction::from_fn(s.clone(), 2, move |z| {
                let e = (-(z[0].norm_sqr() + z[1].norm_sqr())).exp();
                // φ = 0.3 (z̄₁ + z̄₂ z₁) e^{−|z|²}
                let p = (z[0].conj() + z[1].conj() * z[0]) * 0.3;
                let d = if alpha == 0 { Complex64::from(0.3) - p * z[0] } else { z[0] * 0.3 - p * z[1] } * e;
                CMat::from_row_slice(2, 2, &[ZERO, d, ZERO, ZERO])
            })
            .unwrap()
        };
        (mk(0), mk(1))
    }

    #[test]
    fn multivariable_manufactured() {
        let (a1, a2) = manufactured_c2(21);
        let q = [CauchyQuadrature::for_slice(&a1.spec, 0), CauchyQuadrature::for_slice(&a1.spec, 2)];
        let sol = multivariable_solve(&a1, &a2, q, None).unwrap();
        assert!(sol.residuals[0] < 1e-2 && sol.residuals[1] < 1e-2, "{:?}", sol.residuals);
    }

    #[test]
    fn multivariable_zero_and_violation() {
        let s = square_spec(1.0, 9, 2);
        let z = ComplexGridFunction::zeros(s.clone(), 2).unwrap();
        let q = [CauchyQuadrature::for_slice(&s, 0), CauchyQuadrature::for_slice(&s, 2)];
        let sol = multivariable_solve(&z, &z, q, None).unwrap();
        assert_eq!(sol.g.sub(&ComplexGridFunction::identity(s.clone(), 2).unwrap()).sup_norm(), 0.0);
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let y = x.transpose();
        let a1 = ComplexGridFunction::from_fn(s.clone(), 2, |_| x.clone() * Complex64::from(2.0)).unwrap();
        let a2 = ComplexGridFunction::from_fn(s, 2, |_| y.clone() * Complex64::from(2.0)).unwrap();
        match multivariable_solve(&a1, &a2, q, None) {
            Err(GeomError::CompatibilityViolation(v)) => assert!((v - 4.0 * 2f64.sqrt()).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
