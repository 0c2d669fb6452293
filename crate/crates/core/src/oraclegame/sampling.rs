//! Haar and p-uniform sampling of unitaries.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::linalg::decomp::gram_schmidt_step;
use crate::linalg::operator::{Operator, C64};
use crate::linalg::random::{gaussian, haar_unitary, stream_rng};

/// Largest dimension the sampler accepts.
pub const MAX_DIM: usize = 32;
/// Event probabilities below this are refused.
pub const ACCEPTANCE_FLOOR: f64 = 1e-6;

const CALIBRATION_STREAM: u64 = u64::MAX;
const CALIBRATION_MIN_DRAWS: usize = 20_000;
const CALIBRATION_MAX_DRAWS: usize = 4_000_000;

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidParameter(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// Haar-random unitary from a seed.
pub fn haar_sample(d: usize, seed: u64) -> Result<Operator> {
    check_dim(d)?;
    Ok(haar_unitary(d, &mut stream_rng(seed, 0)))
}

/// Haar measure of {U : Re U₀₀ ≥ t}. Re U₀₀ is the first real coordinate of a
/// uniform point on S^{2d−1}, whose square is Beta(½, d − ½) distributed.
pub fn event_probability(d: usize, t: f64) -> f64 {
    if t <= -1.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let tail = 0.5 * beta_reg(d as f64 - 0.5, 0.5, 1.0 - t * t);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Threshold t with event probability p, by bisection.
fn threshold_for(d: usize, p: f64) -> f64 {
    if p >= 1.0 {
        return -1.0;
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if event_probability(d, mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Haar measure conditioned on Re⟨r|U|r⟩ ≥ threshold with r = |0⟩; the
/// threshold is chosen so the event has mass 2^{−m}, making the conditioned
/// measure p-uniform with p = 2^{−m}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PUniformSpec {
    pub d: usize,
    pub m: u32,
    pub threshold: f64,
    pub seed: u64,
    /// Exact Haar mass of the event.
    pub event_probability: f64,
    /// Monte Carlo estimate of the same mass made at construction.
    pub measured_probability: f64,
}

impl PUniformSpec {
    pub fn new(d: usize, m: u32, seed: u64) -> Result<Self> {
        check_dim(d)?;
        let p = 0.5f64.powi(m as i32);
        if p < ACCEPTANCE_FLOOR {
            return Err(Error::Calibration(format!("event mass 2^-{m} below the acceptance floor {ACCEPTANCE_FLOOR:e}")));
        }
        let threshold = if m == 0 { -1.0 } else { threshold_for(d, p) };
        let event_probability = event_probability(d, threshold);
        let draws = ((400.0 / p).ceil() as usize).clamp(CALIBRATION_MIN_DRAWS, CALIBRATION_MAX_DRAWS);
        let mut rng = stream_rng(seed, CALIBRATION_STREAM);
        let hits = (0..draws).filter(|_| statistic_of_column(&gaussian_column(d, &mut rng)) >= threshold).count();
        let measured_probability = hits as f64 / draws as f64;
        if !(0.5 * p..=2.0 * p).contains(&measured_probability) {
            return Err(Error::Calibration(format!(
                "measured event mass {measured_probability:.3e} outside [{:.3e}, {:.3e}]",
                0.5 * p,
                2.0 * p
            )));
        }
        Ok(PUniformSpec { d, m, threshold, seed, event_probability, measured_probability })
    }

    /// p of the conditioned measure.
    pub fn p(&self) -> f64 {
        self.event_probability
    }

    pub fn accepts(&self, u: &Operator) -> bool {
        u[(0, 0)].re >= self.threshold
    }

    /// Sample `index` of the stream; each index has its own generator.
    pub fn sample_at(&self, index: u64) -> Operator {
        let mut rng = stream_rng(self.seed, index);
        loop {
            // the first Gram–Schmidt column is the normalized first Gaussian
            // column, so the event can be tested before drawing the rest
            let first = gaussian_column(self.d, &mut rng);
            if statistic_of_column(&first) < self.threshold {
                continue;
            }
            let mut cols = vec![first];
            cols.extend((1..self.d).map(|_| gaussian_column(self.d, &mut rng)));
            if let Some(u) = orthonormalize(cols) {
                return u;
            }
        }
    }
}

fn gaussian_column<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    (0..d).map(|_| gaussian(rng)).collect()
}

fn statistic_of_column(g: &[C64]) -> f64 {
    let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return f64::NEG_INFINITY;
    }
    g[0].re / norm
}

fn orthonormalize(cols: Vec<Vec<C64>>) -> Option<Operator> {
    let d = cols.len();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in cols {
        basis.push(gram_schmidt_step(&basis, c)?);
    }
    Some(Operator::from_fn(d, d, |i, j| basis[j][i]))
}

/// `n` draws from the conditioned measure (rejection sampling).
pub fn p_uniform_sample(spec: &PUniformSpec, n: usize) -> Vec<Operator> {
    (0..n as u64).map(|i| spec.sample_at(i)).collect()
}

/// A measure on unitaries used by the estimators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum UnitaryMeasure {
    PUniform(PUniformSpec),
    PointMass { unitary: Operator },
}

impl UnitaryMeasure {
    pub fn point_mass(u: Operator) -> Result<Self> {
        let dev = u.unitary_deviation();
        if dev > crate::linalg::tol::UNITARY {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(UnitaryMeasure::PointMass { unitary: u })
    }

    pub fn dim(&self) -> usize {
        match self {
            UnitaryMeasure::PUniform(s) => s.d,
            UnitaryMeasure::PointMass { unitary } => unitary.rows(),
        }
    }

    /// 2^{−m} for the conditioned family; a point mass is not p-uniform for
    /// any p > 0, reported as 0.
    pub fn p(&self) -> f64 {
        match self {
            UnitaryMeasure::PUniform(s) => s.p(),
            UnitaryMeasure::PointMass { .. } => 0.0,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<Operator> {
        match self {
            UnitaryMeasure::PUniform(s) => p_uniform_sample(s, n),
            UnitaryMeasure::PointMass { unitary } => vec![unitary.clone(); n],
        }
    }
}

/// Per-bin comparison of the two histograms behind the invariance check.
#[derive(Clone, Debug, Serialize)]
pub struct HistogramCheck {
    pub statistic: String,
    /// Largest (P̂_{uσ}(bin) − P̂_μ(bin)/p) in units of its standard error.
    pub max_excess_sigma: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub checks: Vec<HistogramCheck>,
    pub passed: bool,
}

const BINS: usize = 10;
const SIGMA_LEVEL: f64 = 3.0;
const HAAR_REFERENCE_SEED: u64 = 0x4aa7;

/// Checks that left-multiplying σ-samples by `u` keeps the density of two
/// bounded statistics below the Haar density divided by p: Re⟨0|uU|0⟩ on the
/// unitary group and |⟨0|uU|0⟩|² for the pushed-forward state uU|0⟩.
pub fn p_uniform_invariance_check(spec: &PUniformSpec, u: &Operator, n: usize) -> Result<InvarianceReport> {
    if u.rows() != spec.d || !u.is_square() {
        return Err(Error::DimensionMismatch(format!("u is {}x{} for d = {}", u.rows(), u.cols(), spec.d)));
    }
    let dev = u.unitary_deviation();
    if dev > crate::linalg::tol::UNITARY {
        return Err(Error::NotUnitary { deviation: dev });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let pushed: Vec<Operator> = p_uniform_sample(spec, n).iter().map(|s| u.matmul(s)).collect();
    let haar: Vec<Operator> =
        (0..n as u64).map(|i| haar_unitary(spec.d, &mut stream_rng(spec.seed ^ HAAR_REFERENCE_SEED, i))).collect();
    type Stat = fn(&Operator) -> f64;
    let stats: [(&str, Stat, f64, f64); 2] = [
        ("re_u00", |w| w[(0, 0)].re, -1.0, 1.0),
        ("state_overlap_sq", |w| w[(0, 0)].norm_sqr(), 0.0, 1.0),
    ];
    let p = spec.p();
    let mut checks = Vec::with_capacity(stats.len());
    for (name, f, lo, hi) in stats {
        let h_push = histogram(pushed.iter().map(f), lo, hi);
        let h_haar = histogram(haar.iter().map(f), lo, hi);
        let nf = n as f64;
        let mut worst = f64::NEG_INFINITY;
        for (a, b) in h_push.iter().zip(&h_haar) {
            let pa = *a as f64 / nf;
            let pb = *b as f64 / nf;
            let var = pa * (1.0 - pa) / nf + pb * (1.0 - pb) / (nf * p * p);
            // one count's worth of floor keeps empty bins from dividing by zero
            let se = var.sqrt().max(1.0 / nf);
            worst = worst.max((pa - pb / p) / se);
        }
        checks.push(HistogramCheck { statistic: name.to_string(), max_excess_sigma: worst, passed: worst <= SIGMA_LEVEL });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(InvarianceReport { checks, passed })
}

fn histogram(values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> [usize; BINS] {
    let mut h = [0usize; BINS];
    for v in values {
        let k = (((v - lo) / (hi - lo)) * BINS as f64).floor().clamp(0.0, (BINS - 1) as f64) as usize;
        h[k] += 1;
    }
    h
}
