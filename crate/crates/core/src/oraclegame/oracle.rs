//! The two oracle types, the interactive protocol, and provers for it.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::decomp::svd;
use crate::linalg::operator::{tensor, Operator, C64, ONE, ZERO};
use crate::linalg::random::{haar_unitary, stream_rng};
use crate::linalg::state::DensityMatrix;
use crate::linalg::tol;

/// Which of the two oracles is queried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum OracleKind {
    /// Keeps the coherence of the control qubit through the hidden unitary.
    Coherent,
    /// Measures the control qubit and appends the maximally mixed state.
    Dephasing,
}

impl TryFrom<u8> for OracleKind {
    type Error = Error;
    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(OracleKind::Coherent),
            2 => Ok(OracleKind::Dephasing),
            _ => Err(Error::InvalidParameter(format!("oracle kind {k} is neither 1 nor 2"))),
        }
    }
}

impl From<OracleKind> for u8 {
    fn from(k: OracleKind) -> u8 {
        match k {
            OracleKind::Coherent => 1,
            OracleKind::Dephasing => 2,
        }
    }
}

/// α|0⟩ + β|1⟩ on the control qubit A.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInput {
    pub alpha: C64,
    pub beta: C64,
}

impl OracleInput {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("|α|² + |β|² = {n}")));
        }
        Ok(OracleInput { alpha, beta })
    }

    /// (|0⟩ + |1⟩)/√2.
    pub fn plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        OracleInput { alpha: h, beta: h }
    }

    pub fn density(&self) -> Operator {
        let v = [self.alpha, self.beta];
        Operator::outer(&v, &v)
    }
}

/// The oracle as a linear map on operators X on A, output on A ⊗ H ⊗ K:
/// Σᵢⱼ Xᵢⱼ |i⟩⟨j| ⊗ Mᵢⱼ ⊗ I_K / d² with M₀₀ = M₁₁ = I, M₁₀ = W, M₀₁ = W†
/// (coherent) or M₀₁ = M₁₀ = 0 (dephasing). `w` need not be unitary, which
/// lets averaged oracles reuse the map.
pub(crate) fn oracle_map(kind: OracleKind, w: Option<&Operator>, x: &Operator, d: usize) -> Result<Operator> {
    if x.rows() != 2 || x.cols() != 2 {
        return Err(Error::DimensionMismatch(format!("oracle input {}x{} is not a qubit operator", x.rows(), x.cols())));
    }
    let id = Operator::identity(d);
    let scale = 1.0 / (d * d) as f64;
    let mut blocks: [[Option<Operator>; 2]; 2] = [[Some(id.clone()), None], [None, Some(id.clone())]];
    if kind == OracleKind::Coherent {
        let w = w.ok_or_else(|| Error::InvalidParameter("the coherent oracle needs a hidden unitary".into()))?;
        if w.rows() != d || w.cols() != d {
            return Err(Error::DimensionMismatch(format!("hidden operator {}x{} for d = {d}", w.rows(), w.cols())));
        }
        blocks[0][1] = Some(w.adjoint());
        blocks[1][0] = Some(w.clone());
    }
    let n = 2 * d * d;
    let mut out = Operator::zeros(n, n);
    for (i, row) in blocks.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            if let Some(m) = m {
                let mut e = Operator::zeros(2, 2);
                e[(i, j)] = x[(i, j)] * scale;
                out = &out + &tensor(&tensor(&e, m), &id);
            }
        }
    }
    Ok(out)
}

fn check_hidden(kind: OracleKind, hidden: Option<&Operator>, d: usize) -> Result<()> {
    if let (OracleKind::Coherent, Some(u)) = (kind, hidden) {
        if u.rows() != d || !u.is_square() {
            return Err(Error::DimensionMismatch(format!("hidden unitary {}x{} for d = {d}", u.rows(), u.cols())));
        }
        let dev = u.unitary_deviation();
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary { deviation: dev });
        }
    }
    Ok(())
}

/// Exact output of one query on A ⊗ H ⊗ K.
pub fn oracle_apply(kind: OracleKind, hidden: Option<&Operator>, input: &OracleInput, d: usize) -> Result<DensityMatrix> {
    check_hidden(kind, hidden, d)?;
    DensityMatrix::new(oracle_map(kind, hidden, &input.density(), d)?)
}

/// State on B ⊗ A ⊗ H after querying with half of |φ⁺⟩ on B ⊗ A; K is traced
/// out since nobody acts on it again.
fn pre_prover_state(kind: OracleKind, hidden: Option<&Operator>, d: usize) -> Operator {
    let id = Operator::identity(d);
    let n = 4 * d;
    let mut out = Operator::zeros(n, n);
    for i in 0..2 {
        for j in 0..2 {
            let m = match (i, j, kind) {
                (0, 0, _) | (1, 1, _) => id.clone(),
                (0, 1, OracleKind::Coherent) => hidden.expect("checked").adjoint(),
                (1, 0, OracleKind::Coherent) => hidden.expect("checked").clone(),
                _ => continue,
            };
            let mut e = Operator::zeros(4, 4);
            e[(3 * i, 3 * j)] = ONE;
            out = &out + &tensor(&e, &m).scale_real(0.5 / d as f64);
        }
    }
    out
}

/// |φ⁺⟩⟨φ⁺|_{BA} ⊗ I_H
fn accept_projector(d: usize) -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
    tensor(&Operator::outer(&phi, &phi), &Operator::identity(d))
}

/// Acceptance probability of the protocol when the prover applies `prover`
/// to A ⊗ H.
pub fn protocol_accept(kind: OracleKind, hidden: Option<&Operator>, prover: &Channel, d: usize) -> Result<f64> {
    if kind == OracleKind::Coherent && hidden.is_none() {
        return Err(Error::InvalidParameter("the coherent oracle needs a hidden unitary".into()));
    }
    check_hidden(kind, hidden, d)?;
    if prover.input_dim() != 2 * d || prover.output_dim() != 2 * d {
        return Err(Error::DimensionMismatch(format!(
            "prover maps {} to {}, expected A ⊗ H of dimension {}",
            prover.input_dim(),
            prover.output_dim(),
            2 * d
        )));
    }
    let rho = pre_prover_state(kind, hidden, d);
    let out = prover.apply_with_reference(&rho, 2)?;
    Ok(out.trace_product(&accept_projector(d)).re.clamp(0.0, 1.0))
}

/// |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U† on A ⊗ H.
pub fn honest_prover(hidden: &Operator) -> Result<Channel> {
    let d = hidden.rows();
    let mut c = Operator::zeros(2 * d, 2 * d);
    for i in 0..d {
        c[(i, i)] = ONE;
    }
    let ud = hidden.adjoint();
    for i in 0..d {
        for j in 0..d {
            c[(d + i, d + j)] = ud[(i, j)];
        }
    }
    Channel::unitary(&c)
}

/// Best prover found by the search.
#[derive(Clone, Debug, Serialize)]
pub struct ProverSearch {
    pub value: f64,
    pub prover: Channel,
    pub restarts: usize,
    pub env_dim: usize,
}

const PROVER_ITERS: usize = 500;
const PROVER_TOL: f64 = 1e-13;

/// Multistart ascent over provers given by an isometry A⊗H → A⊗H⊗E.
/// The acceptance is a positive quadratic form in the isometry, so replacing
/// it by the polar part of the gradient never decreases the value.
pub fn search_prover(
    kind: OracleKind,
    hidden: Option<&Operator>,
    d: usize,
    env_dim: usize,
    restarts: usize,
    seed: u64,
) -> Result<ProverSearch> {
    if kind == OracleKind::Coherent && hidden.is_none() {
        return Err(Error::InvalidParameter("the coherent oracle needs a hidden unitary".into()));
    }
    check_hidden(kind, hidden, d)?;
    if env_dim == 0 {
        return Err(Error::InvalidParameter("environment dimension must be positive".into()));
    }
    let n = 2 * d;
    let rho = pre_prover_state(kind, hidden, d);
    let proj = accept_projector(d);
    let block = |m: &Operator, b: usize, c: usize| Operator::from_fn(n, n, |i, j| m[(b * n + i, c * n + j)]);
    let rho_blocks: Vec<Vec<Operator>> = (0..2).map(|b| (0..2).map(|c| block(&rho, b, c)).collect()).collect();
    // Π blocks lifted to A ⊗ H ⊗ E
    let proj_blocks: Vec<Vec<Operator>> = (0..2)
        .map(|b| (0..2).map(|c| tensor(&block(&proj, b, c), &Operator::identity(env_dim))).collect())
        .collect();
    let gradient = |v: &Operator| {
        let mut g = Operator::zeros(n * env_dim, n);
        for b in 0..2 {
            for c in 0..2 {
                g = &g + &proj_blocks[b][c].matmul(&v.matmul(&rho_blocks[c][b]));
            }
        }
        g
    };
    let value = |v: &Operator| v.adjoint().matmul(&gradient(v)).trace().re;
    let mut best: Option<(f64, Operator)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = stream_rng(seed, r as u64);
        let full = haar_unitary(n * env_dim, &mut rng);
        let mut v = Operator::from_fn(n * env_dim, n, |i, j| full[(i, j)]);
        let mut current = value(&v);
        for _ in 0..PROVER_ITERS {
            let dec = svd(&gradient(&v));
            let next = dec.u.matmul(&dec.v.adjoint());
            let val = value(&next);
            if val < current + PROVER_TOL {
                if val > current {
                    v = next;
                    current = val;
                }
                break;
            }
            v = next;
            current = val;
        }
        if best.as_ref().is_none_or(|b| current > b.0) {
            best = Some((current, v));
        }
    }
    let (_, v) = best.expect("at least one restart");
    let kraus: Vec<Operator> = (0..env_dim).map(|e| Operator::from_fn(n, n, |i, j| v[(i * env_dim + e, j)])).collect();
    let prover = Channel::from_kraus(kraus)?;
    let value = protocol_accept(kind, hidden, &prover, d)?;
    Ok(ProverSearch { value, prover, restarts: restarts.max(1), env_dim })
}

/// Prover that resets the control qubit to |0⟩ and leaves H alone.
pub fn reset_control_prover(d: usize) -> Channel {
    let k = |j: usize| {
        let mut e = Operator::zeros(2, 2);
        e[(0, j)] = ONE;
        tensor(&e, &Operator::identity(d))
    };
    Channel::from_kraus(vec![k(0), k(1)]).expect("complete by construction")
}
