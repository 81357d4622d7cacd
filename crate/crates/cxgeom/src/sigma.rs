//! Sigma models ℂ ⊃ Ω → G_{N,p}(ℂ) in the projector picture.
//!
//! Wirtinger derivatives are ∂/∂z = ½(∂ₓ − i∂ᵧ) and ∂/∂z̄ = ½(∂ₓ + i∂ᵧ). Every
//! operation reads derivatives either from the lattice (second-order
//! differences) or from an analytic closure evaluated as a jet in (x, y).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::linalg::{c, commutator, max_abs, op_norm};
use crate::projgeo::{frame_projector_jet, projector_jet, HermitianProjector};
use crate::tensor::{grid_partial, CMat, Coeff, ComplexCoeff, GridField, GridSpec, Jet, JetSpace};

/// `P(x, y)` as a jet, from the jets of x and y.
pub type ProjectorClosure = Arc<dyn Fn(&Jet<f64>, &Jet<f64>) -> Jet<CMat> + Send + Sync>;

#[derive(Clone)]
pub struct ProjectorField {
    pub spec: GridSpec,
    pub n: usize,
    pub p: usize,
    pub values: Vec<CMat>,
    pub closure: Option<ProjectorClosure>,
}

impl std::fmt::Debug for ProjectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectorField")
            .field("shape", &self.spec.shape)
            .field("n", &self.n)
            .field("p", &self.p)
            .field("analytic", &self.closure.is_some())
            .finish()
    }
}

/// Where derivatives come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Deriv {
    Grid,
    Analytic,
}

impl ProjectorField {
    pub fn from_values(spec: GridSpec, p: usize, values: Vec<CMat>) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(GeomError::Dimension("projector fields live on a planar lattice".into()));
        }
        if values.len() != spec.len() {
            return Err(GeomError::Dimension("one projector per node".into()));
        }
        let n = values[0].nrows();
        for m in &values {
            HermitianProjector::new(m.clone(), p)?;
        }
        let field = ProjectorField { spec, n, p, values, closure: None };
        field.check_continuity()?;
        Ok(field)
    }

    pub fn from_closure(spec: GridSpec, p: usize, closure: ProjectorClosure) -> Result<Self> {
        let space = JetSpace::new(2, 0);
        let values: Vec<CMat> = (0..spec.len())
            .into_par_iter()
            .map(|k| {
                let x = spec.point(k);
                closure(&Jet::var(&space, 0, x[0]), &Jet::var(&space, 1, x[1])).c[0].clone()
            })
            .collect();
        let mut field = Self::from_values(spec, p, values)?;
        field.closure = Some(closure);
        Ok(field)
    }

    pub fn from_field(f: &GridField<CMat>, p: usize) -> Result<Self> {
        Self::from_values(f.spec.clone(), p, f.values.clone())
    }

    pub fn to_field(&self) -> GridField<CMat> {
        GridField { spec: self.spec.clone(), values: self.values.clone(), flagged_margin: 0 }
    }

    fn check_continuity(&self) -> Result<()> {
        let strides = self.spec.strides();
        for k in 0..self.values.len() {
            let idx = self.spec.unravel(k);
            for a in 0..2 {
                if idx[a] + 1 < self.spec.shape[a] {
                    let d = &self.values[k + strides[a]] - &self.values[k];
                    if d.norm() >= 0.5 && op_norm(&d) >= 0.5 {
                        return Err(GeomError::InvalidInput(format!("field jumps by ≥ 0.5 next to node {k}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `U P U†` at every node.
    pub fn conjugate_unitary(&self, u: &CMat) -> Self {
        let ua = u.adjoint();
        let values = self.values.iter().map(|m| u * m * &ua).collect();
        let closure = self.closure.clone().map(|f| {
            let (u, ua) = (u.clone(), ua.clone());
            Arc::new(move |x: &Jet<f64>, y: &Jet<f64>| f(x, y).map(|m| &u * m * &ua)) as ProjectorClosure
        });
        ProjectorField { spec: self.spec.clone(), n: self.n, p: self.p, values, closure }
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        let values = self.values.iter().map(|m| m.map(|z| z.conj())).collect();
        let closure = self.closure.clone().map(|f| {
            Arc::new(move |x: &Jet<f64>, y: &Jet<f64>| f(x, y).map(|m| m.map(|z| z.conj()))) as ProjectorClosure
        });
        ProjectorField { spec: self.spec.clone(), n: self.n, p: self.p, values, closure }
    }

    pub fn coord(&self, k: usize) -> Complex64 {
        let x = self.spec.point(k);
        Complex64::new(x[0], x[1])
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.spec.lo[0] + self.spec.hi[0]), 0.5 * (self.spec.lo[1] + self.spec.hi[1]))
    }

    fn inscribed_radius(&self) -> f64 {
        0.5 * (self.spec.hi[0] - self.spec.lo[0]).min(self.spec.hi[1] - self.spec.lo[1])
    }
}

/// Derivative data at one node.
#[derive(Clone, Debug)]
pub struct NodeDerivs {
    pub p: CMat,
    pub px: CMat,
    pub py: CMat,
    pub pz: CMat,
    pub pzb: CMat,
    /// `∂²P/∂z∂z̄ = ¼ΔP`.
    pub pzzb: CMat,
}

fn wirt(px: &CMat, py: &CMat) -> (CMat, CMat) {
    let i = Complex64::i();
    ((px - py * i) * c(0.5), (px + py * i) * c(0.5))
}

fn analytic_jet(field: &ProjectorField, space: &Arc<JetSpace>, k: usize) -> Result<Jet<CMat>> {
    let f = field.closure.as_ref().ok_or_else(|| GeomError::Precondition("field has no analytic closure".into()))?;
    let x = field.spec.point(k);
    Ok(f(&Jet::var(space, 0, x[0]), &Jet::var(space, 1, x[1])))
}

/// Derivatives at every node; `None` where the lattice stencil lacks room.
pub fn node_derivatives(field: &ProjectorField, deriv: Deriv) -> Result<Vec<Option<NodeDerivs>>> {
    match deriv {
        Deriv::Analytic => {
            let space = JetSpace::new(2, 2);
            (0..field.values.len())
                .into_par_iter()
                .map(|k| {
                    let j = analytic_jet(field, &space, k)?;
                    let (jx, jy) = (j.partial(0), j.partial(1));
                    let (px, py) = (jx.c[0].clone(), jy.c[0].clone());
                    let (pz, pzb) = wirt(&px, &py);
                    let lap = jx.partial(0).c[0].clone() + jy.partial(1).c[0].clone();
                    Ok(Some(NodeDerivs { p: j.c[0].clone(), px, py, pz, pzb, pzzb: lap * c(0.25) }))
                })
                .collect()
        }
        Deriv::Grid => {
            if field.spec.shape.iter().any(|&s| s < 5) {
                return Err(GeomError::Precondition("grid too small: need at least 5 nodes per axis".into()));
            }
            let f = field.to_field();
            let (gx, gy) = (grid_partial(&f, 0), grid_partial(&f, 1));
            let h = field.spec.spacing();
            let st = field.spec.strides();
            Ok((0..field.values.len())
                .map(|k| {
                    if field.spec.face_distance(k) < 1 {
                        return None;
                    }
                    let v = &field.values;
                    let lap = (&v[k + st[0]] + &v[k - st[0]] - &v[k] * c(2.0)) / c(h[0] * h[0])
                        + (&v[k + st[1]] + &v[k - st[1]] - &v[k] * c(2.0)) / c(h[1] * h[1]);
                    let (pz, pzb) = wirt(&gx[k], &gy[k]);
                    Some(NodeDerivs { p: v[k].clone(), px: gx[k].clone(), py: gy[k].clone(), pz, pzb, pzzb: lap * c(0.25) })
                })
                .collect())
        }
    }
}

fn sup_over(d: &[Option<NodeDerivs>], margin_ok: impl Fn(usize) -> bool, f: impl Fn(&NodeDerivs) -> f64) -> f64 {
    d.iter().enumerate().filter(|(k, _)| margin_ok(*k)).filter_map(|(_, x)| x.as_ref().map(&f)).fold(0.0, f64::max)
}

/// `sup ‖[P, ∂²P/∂z∂z̄]‖` over interior nodes.
pub fn harmonic_residual(field: &ProjectorField, deriv: Deriv) -> Result<f64> {
    let d = node_derivatives(field, deriv)?;
    Ok(sup_over(&d, |k| field.spec.face_distance(k) >= 1, |n| op_norm(&commutator(&n.p, &n.pzzb))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Holomorphy {
    Holomorphic,
    Antiholomorphic,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub kind: Holomorphy,
    /// Both sign tests passed (locally constant field).
    pub degenerate: bool,
    /// `sup ‖[P, ∂P/∂z] + ∂P/∂z‖`.
    pub holomorphic_residual: f64,
    /// `sup ‖[P, ∂P/∂z] − ∂P/∂z‖`.
    pub antiholomorphic_residual: f64,
    pub tolerance: f64,
    /// For rank one: whether `(∂P/∂z)² = 0` agrees with ±holomorphy.
    pub square_test_agrees: Option<bool>,
}

/// Default tolerance: analytic 1e−6·sup‖∂P/∂z‖, lattice 1e−2·sup‖∂P/∂z‖.
pub fn holomorphy_classify(field: &ProjectorField, deriv: Deriv, tol: Option<f64>) -> Result<Classification> {
    let d = node_derivatives(field, deriv)?;
    let interior = |k: usize| field.spec.face_distance(k) >= 1;
    let scale = sup_over(&d, interior, |n| op_norm(&n.pz));
    let tau = tol.unwrap_or(match deriv {
        Deriv::Analytic => 1e-6 * scale.max(1e-300),
        Deriv::Grid => 1e-2 * scale.max(1e-300),
    });
    let rh = sup_over(&d, interior, |n| op_norm(&(commutator(&n.p, &n.pz) + &n.pz)));
    let ra = sup_over(&d, interior, |n| op_norm(&(commutator(&n.p, &n.pz) - &n.pz)));
    let (hol, anti) = (rh < tau, ra < tau);
    let kind = if hol {
        Holomorphy::Holomorphic
    } else if anti {
        Holomorphy::Antiholomorphic
    } else {
        Holomorphy::Neither
    };
    let square_test_agrees = (field.p == 1).then(|| {
        let sq = sup_over(&d, interior, |n| op_norm(&(&n.pz * &n.pz)));
        let tau2 = match deriv {
            Deriv::Analytic => 1e-6,
            Deriv::Grid => 1e-2,
        } * scale
            * scale;
        (sq < tau2.max(1e-300)) == (hol || anti)
    });
    Ok(Classification {
        kind,
        degenerate: hol && anti,
        holomorphic_residual: rh,
        antiholomorphic_residual: ra,
        tolerance: tau,
        square_test_agrees,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressReport {
    /// `sup |∂/∂z̄ Tr((∂P/∂z)²)|`.
    pub value: f64,
    pub harmonic_residual: f64,
    pub precondition_met: bool,
}

/// Holomorphy defect of the stress component `Tr((∂P/∂z)²)`.
pub fn stress_holomorphy(field: &ProjectorField, deriv: Deriv, tau_h: f64) -> Result<StressReport> {
    let harm = harmonic_residual(field, deriv)?;
    let value = match deriv {
        Deriv::Analytic => {
            let space = JetSpace::new(2, 2);
            (0..field.values.len())
                .into_par_iter()
                .map(|k| {
                    let j = analytic_jet(field, &space, k)?;
                    let pz = j.dz(0, 1);
                    let t = pz.mul(&pz).trace();
                    Ok(t.dzbar(0, 1).c[0].norm())
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max)
        }
        Deriv::Grid => {
            let d = node_derivatives(field, Deriv::Grid)?;
            let t = GridField {
                spec: field.spec.clone(),
                values: d.iter().map(|n| n.as_ref().map_or(c(0.0), |n| (&n.pz * &n.pz).trace())).collect(),
                flagged_margin: 1,
            };
            let (tx, ty) = (grid_partial(&t, 0), grid_partial(&t, 1));
            (0..t.values.len())
                .filter(|&k| field.spec.face_distance(k) >= 2)
                .map(|k| ((tx[k] + ty[k] * Complex64::i()) * 0.5).norm())
                .fold(0.0, f64::max)
        }
    };
    Ok(StressReport { value, harmonic_residual: harm, precondition_met: harm < tau_h })
}

/// `sup ‖(D_X P)³ − ½ Tr((D_X P)²) D_X P‖` for rank one, `X = a ∂ₓ + b ∂ᵧ`.
pub fn cubic_identity_residual(
    field: &ProjectorField,
    deriv: Deriv,
    direction: impl Fn(Complex64) -> (Complex64, Complex64),
) -> Result<f64> {
    if field.p != 1 {
        return Err(GeomError::Precondition(format!("cubic identity needs rank one, field has rank {}", field.p)));
    }
    let d = node_derivatives(field, deriv)?;
    Ok(d.iter()
        .enumerate()
        .filter_map(|(k, n)| n.as_ref().map(|n| (k, n)))
        .map(|(k, n)| {
            let (a, b) = direction(field.coord(k));
            let dx = &n.px * a + &n.py * b;
            let cube = &dx * &dx * &dx;
            op_norm(&(cube - &dx * ((&dx * &dx).trace() * 0.5)))
        })
        .fold(0.0, f64::max))
}

/// Smallest k ≤ N with `sup ‖(∂P/∂z)^k‖ < 1e−6 · (sup ‖∂P/∂z‖)^k`, else N+1.
pub fn nilpotency_order(field: &ProjectorField, deriv: Deriv) -> Result<usize> {
    let d = node_derivatives(field, deriv)?;
    let interior = |k: usize| field.spec.face_distance(k) >= 1;
    let scale = sup_over(&d, interior, |n| op_norm(&n.pz));
    if scale == 0.0 {
        return Ok(1);
    }
    for k in 1..=field.n {
        let sup = sup_over(&d, interior, |n| {
            let mut m = n.pz.clone();
            for _ in 1..k {
                m = &m * &n.pz;
            }
            op_norm(&m)
        });
        if sup < 1e-6 * scale.powi(k as i32) {
            return Ok(k);
        }
    }
    Ok(field.n + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChargeReport {
    /// `(1/2πi) ∫ Tr(P dP∧dP)` over the inscribed disc.
    pub charge: f64,
    /// Dirichlet energy `½ ∫ Tr((∂ₓP)² + (∂ᵧP)²)` over the same disc.
    pub energy: f64,
    /// `sup ‖dP‖` on the outer ring divided by the interior maximum.
    pub boundary_ratio: f64,
    /// Set when the field is far from constant near the boundary.
    pub boundary_warning: bool,
}

pub fn topological_charge(field: &ProjectorField, deriv: Deriv) -> Result<ChargeReport> {
    let d = node_derivatives(field, deriv)?;
    let h = field.spec.spacing();
    let (c0, r) = (field.center(), field.inscribed_radius());
    let mut q = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    let (mut ring, mut inner) = (0.0f64, 0.0f64);
    for (k, n) in d.iter().enumerate() {
        let Some(n) = n else { continue };
        let rho = (field.coord(k) - c0).norm();
        if rho > r {
            continue;
        }
        q += (&n.p * commutator(&n.px, &n.py)).trace();
        e += 0.5 * (&n.px * &n.px + &n.py * &n.py).trace().re;
        let size = n.px.norm() + n.py.norm();
        if rho > 0.9 * r {
            ring = ring.max(size);
        } else {
            inner = inner.max(size);
        }
    }
    let area = h[0] * h[1];
    let charge = (q * area / Complex64::new(0.0, 2.0 * PI)).re;
    let boundary_ratio = if inner > 0.0 { ring / inner } else { 0.0 };
    Ok(ChargeReport { charge, energy: e * area, boundary_ratio, boundary_warning: boundary_ratio > 1e-2 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaReport {
    pub name: String,
    pub harmonic_residual: f64,
    pub classification: Classification,
    pub energy: f64,
    pub topological_charge: f64,
    pub boundary_warning: bool,
    pub nilpotency_order: usize,
}

pub fn report(name: &str, field: &ProjectorField, deriv: Deriv) -> Result<SigmaReport> {
    let ch = topological_charge(field, deriv)?;
    Ok(SigmaReport {
        name: name.to_string(),
        harmonic_residual: harmonic_residual(field, deriv)?,
        classification: holomorphy_classify(field, deriv, None)?,
        energy: ch.energy,
        topological_charge: ch.charge,
        boundary_warning: ch.boundary_warning,
        nilpotency_order: nilpotency_order(field, deriv)?,
    })
}

/// Built-in fixtures, each with an analytic closure.
pub mod fixtures {
    use super::*;

    fn z_of(x: &Jet<f64>, y: &Jet<f64>) -> Jet<Complex64> {
        x.to_complex().add(&y.to_complex().scale_c(Complex64::i()))
    }

    fn cp1(chart: impl Fn(&Jet<Complex64>) -> Jet<Complex64> + Send + Sync + 'static) -> ProjectorClosure {
        Arc::new(move |x: &Jet<f64>, y: &Jet<f64>| {
            let w = chart(&z_of(x, y));
            projector_jet(&w.map(|v| CMat::from_element(1, 1, *v)))
        })
    }

    /// ℂP¹ chart Z = z.
    pub fn cp1_identity() -> ProjectorClosure {
        cp1(|z| z.clone())
    }

    pub fn cp1_conjugate() -> ProjectorClosure {
        cp1(|z| z.conj())
    }

    pub fn cp1_square() -> ProjectorClosure {
        cp1(|z| z.mul(z))
    }

    /// Z = z + 0.3 z̄², not harmonic.
    pub fn cp1_nonharmonic() -> ProjectorClosure {
        cp1(|z| z.add(&z.conj().mul(&z.conj()).scale(0.3)))
    }

    pub fn constant(n: usize, p: usize) -> ProjectorClosure {
        let mut m = CMat::zeros(n, n);
        for i in 0..p {
            m[(i, i)] = c(1.0);
        }
        Arc::new(move |x: &Jet<f64>, _: &Jet<f64>| Jet::constant(&x.space, m.clone()).truncate(x.valid))
    }

    /// ℂP² map onto the line spanned by `g = f_z − f (f†f_z)/(f†f)`, f = (1, √2 z, z²).
    ///
    /// The jets are taken one order deeper so that differentiating f keeps the
    /// requested order.
    pub fn cp2_veronese_middle() -> ProjectorClosure {
        Arc::new(|x: &Jet<f64>, y: &Jet<f64>| {
            let deeper = JetSpace::new(2, x.valid + 1);
            let (xd, yd) = (Jet::var(&deeper, 0, x.c[0]), Jet::var(&deeper, 1, y.c[0]));
            let z = z_of(&xd, &yd);
            let one = z.cst(c(1.0));
            let entries = [one, z.scale(2f64.sqrt()), z.mul(&z)];
            let f = Jet::<CMat>::from_entries(3, 1, &entries);
            let fz = f.dz(0, 1);
            let f = f.truncate(fz.valid);
            let fa = f.adjoint();
            let ratio = fa.mul(&fz).mul(&fa.mul(&f).inverse().expect("f ≠ 0"));
            let g = fz.sub(&f.mul(&ratio));
            let p = frame_projector_jet(&g).expect("g ≠ 0 away from nothing");
            // re-express over the caller's jet space
            Jet { space: x.space.clone(), valid: x.valid, c: p.c[..x.space.len(x.valid)].to_vec() }
        })
    }

    /// Smooth ℂP² field with no special structure.
    pub fn cp2_generic() -> ProjectorClosure {
        Arc::new(|x: &Jet<f64>, y: &Jet<f64>| {
            let z = z_of(x, y);
            let zb = z.conj();
            let entries = [z.cst(c(1.0)), z.add(&zb.scale(0.5)), z.mul(&zb).scale(0.3).add(&zb)];
            let v = Jet::<CMat>::from_entries(3, 1, &entries);
            frame_projector_jet(&v).expect("first entry is 1")
        })
    }

    pub fn builtin() -> Vec<(&'static str, usize, ProjectorClosure)> {
        vec![
            ("constant", 1, constant(2, 1)),
            ("cp1_identity", 1, cp1_identity()),
            ("cp1_conjugate", 1, cp1_conjugate()),
            ("cp1_square", 1, cp1_square()),
            ("cp1_nonharmonic", 1, cp1_nonharmonic()),
            ("cp2_veronese_middle", 1, cp2_veronese_middle()),
            ("cp2_generic", 1, cp2_generic()),
        ]
    }
}

/// Max deviation of `∂P/∂z = P ∂P/∂z (1−P) + (1−P) ∂P/∂z P` over nodes.
pub fn splitting_residual(field: &ProjectorField, deriv: Deriv) -> Result<f64> {
    let d = node_derivatives(field, deriv)?;
    Ok(sup_over(&d, |_| true, |n| {
        let q = CMat::identity(n.p.nrows(), n.p.nrows()) - &n.p;
        max_abs(&(&n.pz - &n.p * &n.pz * &q - &q * &n.pz * &n.p))
    }))
}
