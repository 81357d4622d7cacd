//! Browser bindings: each export takes plain numbers/strings and returns a JSON string.

use cxgeom::dbar::{fixtures as dbar_fixtures, gauge_solve, relative_gauge_residual, square_spec, CauchyQuadrature};
use cxgeom::gaugelab::yang_mills::duality_residuals;
use cxgeom::gaugelab::{bpst, topological_charge as instanton_charge, ym_residual};
use cxgeom::sigma::{fixtures as sigma_fixtures, topological_charge, Deriv, ProjectorField};
use cxgeom::tensor::GridSpec;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn sigma_charge_json(fixture: &str, radius: f64, n: usize) -> Result<String, String> {
    if !(radius > 0.0) || !(9..=257).contains(&n) {
        return Err("need radius > 0 and 9 ≤ n ≤ 257".into());
    }
    let closure = match fixture {
        "cp1-identity" => sigma_fixtures::cp1_identity(),
        "cp1-square" => sigma_fixtures::cp1_square(),
        "cp1-conjugate" => sigma_fixtures::cp1_conjugate(),
        "cp2-veronese-middle" => sigma_fixtures::cp2_veronese_middle(),
        other => return Err(format!("unknown fixture {other:?}")),
    };
    let field = ProjectorField::from_closure(GridSpec::cube(2, -radius, radius, n), 1, closure).map_err(err)?;
    let r = topological_charge(&field, Deriv::Analytic).map_err(err)?;
    serde_json::to_string(&r).map_err(err)
}

pub fn dbar_solve_json(fixture: &str, n: usize, seed: u64) -> Result<String, String> {
    if !(9..=129).contains(&n) {
        return Err("need 9 ≤ n ≤ 129".into());
    }
    let spec = square_spec(1.0, n, 1);
    let a = match fixture {
        "manufactured" => dbar_fixtures::manufactured(spec),
        "generic" => dbar_fixtures::generic(spec, seed),
        other => return Err(format!("unknown fixture {other:?}")),
    };
    let sol = gauge_solve(&a, &CauchyQuadrature::for_slice(&a.spec, 0)).map_err(err)?;
    let residual = relative_gauge_residual(&sol.g, &a, &sol.cutoff).map_err(err)?;
    Ok(json!({
        "relative_residual": residual,
        "contraction_bound": sol.contraction_bound,
        "iterate_norms": sol.iterate_norms,
    })
    .to_string())
}

pub fn bpst_json(rho: f64, x: [f64; 4]) -> Result<String, String> {
    if !(rho > 0.0) || x.iter().any(|v| !v.is_finite()) {
        return Err("need rho > 0 and a finite point".into());
    }
    let a = bpst(rho, [0.0; 4]).map_err(err)?;
    let (plus, minus) = duality_residuals(&a, &x).map_err(err)?;
    let charge = instanton_charge(&a, [0.0; 4], 50.0 * rho).map_err(err)?;
    Ok(json!({
        "f_plus_star_f": plus,
        "f_minus_star_f": minus,
        "ym_residual": ym_residual(&a, &x).map_err(err)?,
        "charge": charge.charge,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn sigma_charge(fixture: &str, radius: f64, n: usize) -> Result<String, JsValue> {
    sigma_charge_json(fixture, radius, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dbar_solve(fixture: &str, n: usize, seed: u64) -> Result<String, JsValue> {
    dbar_solve_json(fixture, n, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bpst_probe(rho: f64, x0: f64, x1: f64, x2: f64, x3: f64) -> Result<String, JsValue> {
    bpst_json(rho, [x0, x1, x2, x3]).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn sigma_degree_one() {
        let v = parse(&sigma_charge_json("cp1-identity", 8.0, 129).unwrap());
        assert!((v["charge"].as_f64().unwrap() - 1.0).abs() < 0.05, "{v}");
        assert!(sigma_charge_json("torus", 1.0, 33).is_err());
        assert!(sigma_charge_json("cp1-identity", -1.0, 33).is_err());
    }

    #[test]
    fn dbar_manufactured() {
        let v = parse(&dbar_solve_json("manufactured", 33, 0).unwrap());
        assert!(v["relative_residual"].as_f64().unwrap() < 2e-2, "{v}");
        assert!(dbar_solve_json("manufactured", 4, 0).is_err());
    }

    #[test]
    fn bpst_point() {
        let v = parse(&bpst_json(1.0, [0.3, -0.2, 0.7, 0.1]).unwrap());
        assert!(v["f_plus_star_f"].as_f64().unwrap() < 1e-10, "{v}");
        assert!((v["charge"].as_f64().unwrap().abs() - 1.0).abs() < 0.02);
        assert!(bpst_json(0.0, [0.0; 4]).is_err());
    }
}
