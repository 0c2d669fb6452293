//! Monte Carlo estimates of ‖E U‖tr and of the single-query gap between the
//! two oracles.

use serde::{Deserialize, Serialize};

use super::oracle::{oracle_map, OracleInput, OracleKind};
use super::sampling::{PUniformSpec, UnitaryMeasure};
use crate::error::{Error, Result};
use crate::linalg::decomp::polar_unitary;
use crate::linalg::operator::Operator;
use crate::norms::trace_norm;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Mean and sample standard deviation over √n.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return McEstimate { mean: 0.0, std_error: 0.0, samples: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        McEstimate { mean, std_error: (var / n as f64).sqrt(), samples: n }
    }
}

fn mean_of(samples: &[Operator]) -> Operator {
    let d = samples[0].rows();
    let sum = samples.iter().fold(Operator::zeros(d, d), |acc, u| &acc + u);
    sum.scale_real(1.0 / samples.len() as f64)
}

/// Re tr(W† U) for each sample.
fn projections(w: &Operator, samples: &[Operator]) -> Vec<f64> {
    let wd = w.adjoint();
    samples.iter().map(|u| wd.trace_product(u).re).collect()
}

/// ‖mean U‖tr of the samples (biased upward as an estimate of ‖E U‖tr).
pub fn plug_in_norm(samples: &[Operator]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    trace_norm(&mean_of(samples))
}

/// Cross-fitted estimate of ‖E U‖tr = max_W Re tr(W† E U): the polar part of
/// each half's mean is scored on the other half. Unlike the plug-in norm it is
/// centred at zero for the Haar measure; it never exceeds the true value in
/// expectation.
pub fn expected_norm(measure: &UnitaryMeasure, n: usize) -> Result<McEstimate> {
    if n < 2 {
        return Err(Error::InvalidParameter("expected_norm needs at least two samples".into()));
    }
    Ok(cross_fit(&measure.sample(n)))
}

pub(crate) fn cross_fit(samples: &[Operator]) -> McEstimate {
    let n = samples.len();
    let (a, b) = samples.split_at(n / 2);
    let xa = projections(&polar_unitary(&mean_of(b)), a);
    let xb = projections(&polar_unitary(&mean_of(a)), b);
    let ea = McEstimate::from_values(&xa);
    let eb = McEstimate::from_values(&xb);
    McEstimate {
        mean: 0.5 * (ea.mean + eb.mean),
        std_error: 0.5 * (ea.std_error.powi(2) + eb.std_error.powi(2)).sqrt(),
        samples: n,
    }
}

/// 4·√(d(1 + m ln 2)).
pub fn envelope(d: usize, m: u32) -> f64 {
    4.0 * (d as f64 * (1.0 + m as f64 * std::f64::consts::LN_2)).sqrt()
}

/// ‖O₁(ν) − O₂(ν)‖tr for the σ-averaged coherent oracle, computed two ways.
#[derive(Clone, Debug, Serialize)]
pub struct GapEstimate {
    /// Trace norm of the difference of the two dense output states.
    pub direct: f64,
    /// (2|α||β|/d)·‖mean U‖tr with a delta-method standard error.
    pub formula: McEstimate,
    /// |direct − formula| within the combined standard errors plus 1e-9.
    pub agrees: bool,
}

pub fn per_query_gap(measure: &UnitaryMeasure, input: &OracleInput, n: usize) -> Result<GapEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("per_query_gap needs at least one sample".into()));
    }
    let d = measure.dim();
    let samples = measure.sample(n);
    let mean = mean_of(&samples);
    let rho = input.density();
    let o1 = oracle_map(OracleKind::Coherent, Some(&mean), &rho, d)?;
    let o2 = oracle_map(OracleKind::Dephasing, None, &rho, d)?;
    let direct = trace_norm(&(&o1 - &o2));
    let prefactor = 2.0 * input.alpha.norm() * input.beta.norm() / d as f64;
    let proj = McEstimate::from_values(&projections(&polar_unitary(&mean), &samples));
    let formula = McEstimate { mean: prefactor * trace_norm(&mean), std_error: prefactor * proj.std_error, samples: n };
    // both sides are the same plug-in quantity, so each carries the same error
    let agrees = (direct - formula.mean).abs() <= 2.0 * formula.std_error + 1e-9;
    Ok(GapEstimate { direct, formula, agrees })
}

/// Triangle-inequality accumulation over `queries` hybrid steps.
pub fn hybrid_bound(per_query: f64, queries: usize) -> f64 {
    per_query * queries as f64
}

/// One row of a scaling sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: usize,
    pub m: u32,
    pub n: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub envelope: f64,
}

/// expected_norm over every (d, m) pair, rows sorted by (d, m). Each cell
/// uses its own seed derived from `seed`, d and m.
pub fn scaling_sweep(ds: &[usize], ms: &[u32], n: usize, seed: u64) -> Result<Vec<ScalingRow>> {
    let mut cells: Vec<(usize, u32)> = ds.iter().flat_map(|&d| ms.iter().map(move |&m| (d, m))).collect();
    cells.sort_unstable();
    cells.dedup();
    cells
        .into_iter()
        .map(|(d, m)| {
            let cell_seed = seed ^ ((d as u64) << 32) ^ (m as u64) << 16;
            let spec = PUniformSpec::new(d, m, cell_seed)?;
            let est = expected_norm(&UnitaryMeasure::PUniform(spec), n)?;
            Ok(ScalingRow { d, m, n, estimate: est.mean, std_error: est.std_error, envelope: envelope(d, m) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::{C64, ONE, ZERO};
    use crate::oraclegame::sampling::haar_sample;

    #[test]
    fn estimate_from_values() {
        let e = McEstimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(McEstimate::from_values(&[7.0]).std_error, 0.0);
    }

    #[test]
    fn point_mass_norm_is_dimension() {
        for d in [2, 3, 5] {
            let m = UnitaryMeasure::point_mass(haar_sample(d, d as u64).unwrap()).unwrap();
            let e = expected_norm(&m, 10).unwrap();
            assert!((e.mean - d as f64).abs() < 1e-9);
            assert!(e.std_error < 1e-9);
        }
    }

    #[test]
    fn haar_norm_is_centred() {
        let m = UnitaryMeasure::PUniform(PUniformSpec::new(4, 0, 3).unwrap());
        let e = expected_norm(&m, 4000).unwrap();
        assert!(e.mean.abs() <= 3.0 * e.std_error, "{e:?}");
        let plug = plug_in_norm(&m.sample(4000));
        assert!(plug > e.mean);
    }

    #[test]
    fn conditioning_raises_the_norm() {
        let e0 = expected_norm(&UnitaryMeasure::PUniform(PUniformSpec::new(2, 0, 1).unwrap()), 4000).unwrap();
        let e3 = expected_norm(&UnitaryMeasure::PUniform(PUniformSpec::new(2, 3, 1).unwrap()), 4000).unwrap();
        assert!(e3.mean > e0.mean + 3.0 * (e0.std_error + e3.std_error));
        assert!(e3.mean <= envelope(2, 3));
    }

    #[test]
    fn gap_examples() {
        let u = haar_sample(2, 8).unwrap();
        let pm = UnitaryMeasure::point_mass(u).unwrap();
        let g = per_query_gap(&pm, &OracleInput::plus(), 3).unwrap();
        assert!((g.direct - 1.0).abs() < 1e-9);
        assert!(g.agrees);
        let zero = OracleInput::new(ONE, ZERO).unwrap();
        let g = per_query_gap(&pm, &zero, 3).unwrap();
        assert!(g.direct.abs() < 1e-12 && g.formula.mean.abs() < 1e-12);
        let skew = OracleInput::new(C64::new(0.6, 0.0), C64::new(0.0, -0.8)).unwrap();
        for d in [2, 4] {
            let pm = UnitaryMeasure::point_mass(haar_sample(d, 1).unwrap()).unwrap();
            let g = per_query_gap(&pm, &skew, 1).unwrap();
            assert!((g.direct - 2.0 * 0.6 * 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn gap_monte_carlo_agrees() {
        let m = UnitaryMeasure::PUniform(PUniformSpec::new(2, 2, 4).unwrap());
        let g = per_query_gap(&m, &OracleInput::plus(), 2000).unwrap();
        assert!(g.agrees, "{g:?}");
    }

    #[test]
    fn sweep_rows_sorted_with_envelope() {
        let rows = scaling_sweep(&[4, 2], &[1, 0], 200, 0).unwrap();
        let keys: Vec<(usize, u32)> = rows.iter().map(|r| (r.d, r.m)).collect();
        assert_eq!(keys, vec![(2, 0), (2, 1), (4, 0), (4, 1)]);
        assert!((rows[3].envelope - 4.0 * (4.0 * (1.0 + std::f64::consts::LN_2)).sqrt()).abs() < 1e-12);
        assert_eq!(hybrid_bound(0.1, 5), 0.5);
    }
}
