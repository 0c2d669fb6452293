//! Browser bindings for three small explorations: qubit fidelity measures,
//! the repetition binding curve and the oracle per-query gap.

use qcommit::channels::{gen_qcd, PromiseKind};
use qcommit::linalg::{DensityMatrix, Operator, C64};
use qcommit::norms::{fidelity, swap_test_accept, trace_distance};
use qcommit::oraclegame::{envelope, per_query_gap, OracleInput, PUniformSpec, UnitaryMeasure};
use qcommit::schemes::{qcd_advice, repetition_bound, repetition_cheat};
use wasm_bindgen::prelude::*;

/// Qubit state from a Bloch vector, shrunk onto the ball if it pokes out.
fn bloch_state(x: f64, y: f64, z: f64) -> qcommit::Result<DensityMatrix> {
    let r = (x * x + y * y + z * z).sqrt();
    let s = if r > 1.0 { 1.0 / r } else { 1.0 };
    let (x, y, z) = (x * s, y * s, z * s);
    let op = Operator::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C64::new(0.5 * (1.0 + z), 0.0),
        (1, 1) => C64::new(0.5 * (1.0 - z), 0.0),
        (0, 1) => C64::new(0.5 * x, -0.5 * y),
        _ => C64::new(0.5 * x, 0.5 * y),
    });
    DensityMatrix::with_tolerance(op, 1e-9)
}

/// [F, ½‖ρ−σ‖₁, 1−F, √(1−F²), swap-test acceptance]
pub fn qubit_measures(a: [f64; 3], b: [f64; 3]) -> qcommit::Result<Vec<f64>> {
    let rho = bloch_state(a[0], a[1], a[2])?;
    let sigma = bloch_state(b[0], b[1], b[2])?;
    let f = fidelity(&rho, &sigma)?;
    let t = 0.5 * trace_distance(&rho, &sigma)?;
    Ok(vec![f, t, 1.0 - f, (1.0 - f * f).max(0.0).sqrt(), swap_test_accept(&rho, &sigma)?])
}

/// Rows of [k, ½ + 2^−(k+1), full bound, searched cheat] for k = 1..=k_max.
pub fn repetition_curve(k_max: usize, mu: f64, seed: u64) -> qcommit::Result<Vec<f64>> {
    let mut inst = gen_qcd(PromiseKind::Yes, 1, false, seed)?;
    inst.mu = mu;
    let advice = qcd_advice(&inst, 4, seed)?;
    let mut out = Vec::with_capacity(4 * k_max);
    for k in 1..=k_max.min(3) {
        let searched = repetition_cheat(&inst, k, &advice, 2, seed + k as u64)?.average;
        out.extend([k as f64, 0.5 + 0.5f64.powi(k as i32 + 1), repetition_bound(k, mu), searched]);
    }
    Ok(out)
}

/// [direct gap, formula mean, formula std error, 2|α||β|, envelope] for an
/// input cos θ|0⟩ + sin θ|1⟩ against the p-uniform family with p = 2^−m.
pub fn oracle_gap(d: usize, m: u32, samples: usize, theta: f64, seed: u64) -> qcommit::Result<Vec<f64>> {
    let input = OracleInput::new(C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0))?;
    let spec = PUniformSpec::new(d, m, seed)?;
    let g = per_query_gap(&UnitaryMeasure::PUniform(spec), &input, samples)?;
    let point = 2.0 * input.alpha.norm() * input.beta.norm();
    Ok(vec![g.direct, g.formula.mean, g.formula.std_error, point, envelope(d, m)])
}

fn js(r: qcommit::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = qubitMeasures)]
pub fn qubit_measures_js(ax: f64, ay: f64, az: f64, bx: f64, by: f64, bz: f64) -> Result<Vec<f64>, JsError> {
    js(qubit_measures([ax, ay, az], [bx, by, bz]))
}

#[wasm_bindgen(js_name = repetitionCurve)]
pub fn repetition_curve_js(k_max: usize, mu: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    if !(mu > 0.0 && mu <= 0.25) {
        return Err(JsError::new("mu must lie in (0, 0.25]"));
    }
    js(repetition_curve(k_max, mu, u64::from(seed)))
}

#[wasm_bindgen(js_name = oracleGap)]
pub fn oracle_gap_js(d: usize, m: u32, samples: usize, theta: f64, seed: u32) -> Result<Vec<f64>, JsError> {
    if d == 0 || d > 16 || m > 8 || !(1..=20_000).contains(&samples) {
        return Err(JsError::new("need 1 ≤ d ≤ 16, m ≤ 8 and 1 ≤ samples ≤ 20000"));
    }
    js(oracle_gap(d, m, samples, theta, u64::from(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_and_equal_qubits() {
        let v = qubit_measures([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]).unwrap();
        assert!(v[0].abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9 && (v[4] - 0.5).abs() < 1e-9);
        let v = qubit_measures([0.3, -0.2, 0.5], [0.3, -0.2, 0.5]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-9 && v[1].abs() < 1e-9);
    }

    #[test]
    fn oversized_bloch_vectors_are_clamped() {
        let v = qubit_measures([2.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn curve_stays_under_bound() {
        let rows = repetition_curve(2, 1e-6, 3).unwrap();
        for row in rows.chunks(4) {
            assert!(row[3] <= row[2] + 1e-6);
        }
    }

    #[test]
    fn uniform_gap_matches_point_formula_shape() {
        let v = oracle_gap(2, 0, 400, std::f64::consts::FRAC_PI_4, 1).unwrap();
        assert!((v[3] - 1.0).abs() < 1e-12);
        assert!(v[0] <= v[3] + 1e-9);
    }
}
