//! Fields sampled on uniform rectangular lattices.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::coeff::{CMat, Coeff};
use super::form::ExteriorForm;
use super::jet::{Jet, JetSpace};
use crate::error::{GeomError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != shape.len() || lo.is_empty() {
            return Err(GeomError::Dimension("box and shape lengths differ".into()));
        }
        if shape.iter().any(|&s| s < 2) || lo.iter().zip(&hi).any(|(a, b)| !(b > a)) {
            return Err(GeomError::InvalidInput("degenerate grid box".into()));
        }
        Ok(GridSpec { lo, hi, shape })
    }

    /// Cube `[lo, hi]^dim` with `count` samples per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, count: usize) -> Self {
        GridSpec::new(vec![lo; dim], vec![hi; dim], vec![count; dim]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| (self.hi[a] - self.lo[a]) / (self.shape[a] - 1) as f64).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn unravel(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = k % self.shape[a];
            k /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        let h = self.spacing();
        self.unravel(k).iter().enumerate().map(|(a, &i)| self.lo[a] + i as f64 * h[a]).collect()
    }

    /// Distance (in nodes) from the nearest face.
    pub fn face_distance(&self, k: usize) -> usize {
        self.unravel(k).iter().zip(&self.shape).map(|(&i, &s)| i.min(s - 1 - i)).min().unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct GridField<T> {
    pub spec: GridSpec,
    pub values: Vec<T>,
    /// Nodes closer than this to a face came from one-sided stencils.
    pub flagged_margin: usize,
}

impl<T: Send + Sync> GridField<T> {
    pub fn sample(spec: GridSpec, f: impl Fn(&[f64]) -> T + Sync) -> Self {
        let values = (0..spec.len()).into_par_iter().map(|k| f(&spec.point(k))).collect();
        GridField { spec, values, flagged_margin: 0 }
    }
}

impl<T> GridField<T> {
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&k| self.spec.face_distance(k) >= margin)
    }
}

pub type FormClosure = Arc<dyn Fn(&[Jet<Complex64>]) -> ExteriorForm<Jet<Complex64>> + Send + Sync>;

pub enum DScheme {
    Central,
    Analytic(FormClosure),
}

/// Numerical or analytic exterior derivative of a sampled form field.
pub fn exterior_derivative(
    f: &GridField<ExteriorForm<Complex64>>,
    scheme: &DScheme,
) -> Result<GridField<ExteriorForm<Complex64>>> {
    let n = f.spec.dim();
    let degree = f.values.first().map(|v| v.degree).ok_or_else(|| GeomError::InvalidInput("empty field".into()))?;
    if f.values[0].n != n {
        return Err(GeomError::Dimension(format!("forms on ℝ^{} sampled over a {n}-dim grid", f.values[0].n)));
    }
    if degree >= n {
        return Err(GeomError::Precondition(format!("d of a top-degree form (degree {degree}) on ℝ^{n}")));
    }
    match scheme {
        DScheme::Central => {
            if f.spec.shape.iter().any(|&s| s < 3) {
                return Err(GeomError::Precondition("central differences need ≥ 3 samples per axis".into()));
            }
            let h = f.spec.spacing();
            let strides = f.spec.strides();
            let values = (0..f.values.len())
                .into_par_iter()
                .map(|k| {
                    let idx = f.spec.unravel(k);
                    let mut acc = ExteriorForm::zero(n, degree + 1, &Complex64::new(0.0, 0.0));
                    for v in 0..n {
                        let s = strides[v];
                        let last = f.spec.shape[v] - 1;
                        let deriv = |c: usize| -> Complex64 {
                            let val = |kk: usize| f.values[kk].coeffs[c];
                            if idx[v] == 0 {
                                (-3.0 * val(k) + 4.0 * val(k + s) - val(k + 2 * s)) / (2.0 * h[v])
                            } else if idx[v] == last {
                                (3.0 * val(k) - 4.0 * val(k - s) + val(k - 2 * s)) / (2.0 * h[v])
                            } else {
                                (val(k + s) - val(k - s)) / (2.0 * h[v])
                            }
                        };
                        let coeffs: Vec<Complex64> = (0..f.values[k].coeffs.len()).map(deriv).collect();
                        let df = ExteriorForm { n, degree, coeffs };
                        acc = acc.add(&ExteriorForm::monomial(n, &[v], Complex64::new(1.0, 0.0)).wedge(&df));
                    }
                    acc
                })
                .collect();
            Ok(GridField { spec: f.spec.clone(), values, flagged_margin: 1 })
        }
        DScheme::Analytic(closure) => {
            let space = JetSpace::new(n, 1);
            let values = (0..f.values.len())
                .into_par_iter()
                .map(|k| {
                    let x = f.spec.point(k);
                    let vars: Vec<Jet<Complex64>> = Jet::vars(&space, &x).iter().map(|j| j.to_complex()).collect();
                    let form = closure(&vars);
                    form.d().map(|d| d.value())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GridField { spec: f.spec.clone(), values, flagged_margin: 0 })
        }
    }
}

/// Serialization of lattice payloads.
pub trait Payload: Sized {
    const KIND: &'static str;
    fn degree(&self) -> Option<usize> {
        None
    }
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, degree: Option<usize>, dim: usize) -> Result<Self>;
}

fn cjson(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

fn cparse(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| GeomError::InvalidInput("non-numeric value".into()))?;
            let im = a[1].as_f64().ok_or_else(|| GeomError::InvalidInput("non-numeric value".into()))?;
            Ok(Complex64::new(re, im))
        }
        _ => Err(GeomError::InvalidInput(format!("expected [re, im], found {v}"))),
    }
}

impl Payload for Complex64 {
    const KIND: &'static str = "scalar";
    fn to_json(&self) -> Value {
        cjson(self)
    }
    fn from_json(v: &Value, _: Option<usize>, _: usize) -> Result<Self> {
        cparse(v)
    }
}

impl Payload for CMat {
    const KIND: &'static str = "matrix";
    fn to_json(&self) -> Value {
        Value::Array((0..self.nrows()).map(|i| Value::Array((0..self.ncols()).map(|j| cjson(&self[(i, j)])).collect())).collect())
    }
    fn from_json(v: &Value, _: Option<usize>, _: usize) -> Result<Self> {
        let rows = v.as_array().ok_or_else(|| GeomError::InvalidInput("matrix payload must be an array of rows".into()))?;
        let parsed: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.as_array().ok_or_else(|| GeomError::InvalidInput("matrix row".into()))?.iter().map(cparse).collect())
            .collect::<Result<_>>()?;
        let nr = parsed.len();
        let nc = parsed.first().map_or(0, |r| r.len());
        if nr == 0 || parsed.iter().any(|r| r.len() != nc) {
            return Err(GeomError::InvalidInput("ragged matrix payload".into()));
        }
        Ok(CMat::from_fn(nr, nc, |i, j| parsed[i][j]))
    }
}

impl Payload for ExteriorForm<Complex64> {
    const KIND: &'static str = "form";
    fn degree(&self) -> Option<usize> {
        Some(self.degree)
    }
    fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(cjson).collect())
    }
    fn from_json(v: &Value, degree: Option<usize>, dim: usize) -> Result<Self> {
        let degree = degree.ok_or_else(|| GeomError::InvalidInput("form payload without degree".into()))?;
        let coeffs = v
            .as_array()
            .ok_or_else(|| GeomError::InvalidInput("form payload must be an array".into()))?
            .iter()
            .map(cparse)
            .collect::<Result<Vec<_>>>()?;
        ExteriorForm::from_coeffs(dim, degree, coeffs)
    }
}

impl<T: Payload> GridField<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "box": self.spec.lo.iter().zip(&self.spec.hi).map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "shape": self.spec.shape,
            "degree": self.values.first().and_then(|v| v.degree()),
            "payload_kind": T::KIND,
            "values": self.values.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| GeomError::InvalidInput(m.to_string());
        let kind = v.get("payload_kind").and_then(Value::as_str).ok_or_else(|| bad("missing payload_kind"))?;
        if kind != T::KIND {
            return Err(bad(&format!("payload_kind {kind}, expected {}", T::KIND)));
        }
        let boxes = v.get("box").and_then(Value::as_array).ok_or_else(|| bad("missing box"))?;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for b in boxes {
            let pair = b.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("box entries are [min, max]"))?;
            lo.push(pair[0].as_f64().ok_or_else(|| bad("box bound"))?);
            hi.push(pair[1].as_f64().ok_or_else(|| bad("box bound"))?);
        }
        let shape: Vec<usize> = v
            .get("shape")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing shape"))?
            .iter()
            .map(|s| s.as_u64().map(|x| x as usize).ok_or_else(|| bad("shape entry")))
            .collect::<Result<_>>()?;
        let spec = GridSpec::new(lo, hi, shape)?;
        let degree = v.get("degree").and_then(Value::as_u64).map(|d| d as usize);
        let raw = v.get("values").and_then(Value::as_array).ok_or_else(|| bad("missing values"))?;
        if raw.len() != spec.len() {
            return Err(bad(&format!("{} values for {} nodes", raw.len(), spec.len())));
        }
        let dim = spec.dim();
        let values = raw.iter().map(|x| T::from_json(x, degree, dim)).collect::<Result<Vec<_>>>()?;
        Ok(GridField { spec, values, flagged_margin: 0 })
    }
}

/// Second-order partial derivative along `axis` (central inside, one-sided at faces).
pub fn grid_partial<T: Coeff>(f: &GridField<T>, axis: usize) -> Vec<T> {
    let h = f.spec.spacing()[axis];
    let s = f.spec.strides()[axis];
    let last = f.spec.shape[axis] - 1;
    (0..f.values.len())
        .map(|k| {
            let i = f.spec.unravel(k)[axis];
            let v = &f.values;
            if i == 0 {
                v[k + s].scale(4.0).sub(&v[k].scale(3.0)).sub(&v[k + 2 * s]).scale(0.5 / h)
            } else if i == last {
                v[k].scale(3.0).sub(&v[k - s].scale(4.0)).add(&v[k - 2 * s]).scale(0.5 / h)
            } else {
                v[k + s].sub(&v[k - s]).scale(0.5 / h)
            }
        })
        .collect()
}

/// Max over nodes at least `margin` from every face.
pub fn interior_max<T>(f: &GridField<T>, margin: usize, norm: impl Fn(&T) -> f64) -> f64 {
    f.interior(margin).map(|k| norm(&f.values[k])).fold(0.0, f64::max)
}

pub fn form_max_norm(f: &ExteriorForm<Complex64>) -> f64 {
    f.coeffs.iter().fold(0.0, |m, z| m.max(z.norm()))
}
