//! Swap-test commitment from a pair of far-apart channels, and its parallel
//! repetition.

use serde::Serialize;

use super::steering::{SteeringProblem, SteeringSolution};
use super::{CheatReport, CommitTranscript, SchemeKind};
use crate::channels::{Channel, PromiseKind, QcdInstance};
use crate::error::{Error, Result};
use crate::linalg::operator::{inner, tensor, Operator, C64};
use crate::linalg::state::{permute_operator, reduced_state, DensityMatrix, PureState, SubsystemShape};
use crate::norms::{diamond_lower, fidelity};

/// Largest repetition count supported by the exact computations.
pub const MAX_K: usize = 3;

/// The maximizing input |φ*⟩ on F ⊗ input (F first) for the instance's channels.
pub fn qcd_advice(inst: &QcdInstance, restarts: usize, seed: u64) -> Result<PureState> {
    let est = diamond_lower(&inst.channel(0)?, &inst.channel(1)?, restarts, seed)?;
    if est.lower_bound < 2.0 - inst.mu - 1e-4 {
        return Err(Error::VerificationFailed(format!("advice reaches only {}", est.lower_bound)));
    }
    Ok(est.maximizer)
}

/// |φ_b⟩ = (I_F ⊗ U_b)(|φ*⟩|0⟩) on F ⊗ O ⊗ G.
pub fn committed_state(inst: &QcdInstance, b: u8, advice: &PureState) -> Result<PureState> {
    let din = inst.input_dim();
    if advice.dim() % din != 0 {
        return Err(Error::DimensionMismatch(format!("advice of dimension {} for input {din}", advice.dim())));
    }
    let df = advice.dim() / din;
    let v = inst.isometry(b)?;
    PureState::normalized(tensor(&Operator::identity(df), &v).apply(advice.amplitudes()))
}

fn advice_f_dim(inst: &QcdInstance, advice: &PureState) -> usize {
    advice.dim() / inst.input_dim()
}

/// Honest commit and reveal of bit `b`.
pub fn qcd_round(inst: &QcdInstance, b: u8, advice: &PureState) -> Result<CommitTranscript> {
    qcd_round_with_reveal(inst, b, b, advice)
}

/// The sender prepares |φ_committed⟩ and later claims `revealed`; the receiver
/// undoes U_revealed and swap-tests against its copy of |φ*⟩|0⟩.
pub fn qcd_round_with_reveal(inst: &QcdInstance, committed: u8, revealed: u8, advice: &PureState) -> Result<CommitTranscript> {
    let sent = committed_state(inst, committed, advice)?;
    let expected = committed_state(inst, revealed, advice)?;
    let df = advice_f_dim(inst, advice);
    let a_dim = df * inst.o_dim();
    let shape = SubsystemShape::new(vec![a_dim, inst.g_dim()])?;
    let commit_state = DensityMatrix::new(reduced_state(sent.amplitudes(), &shape, &[0])?.hermitian_part())?;
    // undoing U_revealed and comparing with |φ*⟩|0⟩ is the same as comparing with |φ_revealed⟩
    let overlap = inner(expected.amplitudes(), sent.amplitudes()).norm_sqr();
    let accept_probability = (0.5 + 0.5 * overlap).clamp(0.5, 1.0);
    Ok(CommitTranscript {
        scheme: SchemeKind::QcdSwap,
        committed_bit: committed,
        commit_state,
        reveal_state: sent.density(),
        accepted: accept_probability >= 1.0 - 1e-9,
        accept_probability,
    })
}

/// Probability that all k swap tests between the blocks of ρ on (A⊗B)^k and
/// fresh copies of |φ⟩ accept: tr[ρ ⊗ᵢ (I + |φ⟩⟨φ|)/2].
pub fn test_pass_prob(rho: &DensityMatrix, phi: &PureState, k: usize) -> Result<f64> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={MAX_K}")));
    }
    let n = phi.dim();
    if rho.dim() != n.pow(k as u32) {
        return Err(Error::DimensionMismatch(format!("state of dimension {} for {k} blocks of {n}", rho.dim())));
    }
    Ok(rho.op().trace_product(&pass_operator(phi.amplitudes(), k)).re.clamp(0.0, 1.0))
}

/// ⊗ᵢ (I + |φ⟩⟨φ|)/2 on (A⊗B)^k in block order.
fn pass_operator(phi: &[C64], k: usize) -> Operator {
    let n = phi.len();
    let single = (&Operator::identity(n) + &Operator::outer(phi, phi)).scale_real(0.5);
    let mut m = single.clone();
    for _ in 1..k {
        m = tensor(&m, &single);
    }
    m
}

/// Shared purified state with bit-dependent unitaries on the B-systems and
/// reference; by construction both induced states share their A-marginal.
#[derive(Clone, Debug, Serialize)]
pub struct RepetitionAdversary {
    /// |ω⟩ on A₁…A_k ⊗ B₁…B_k ⊗ R.
    pub shared_state: PureState,
    /// Identity on B₁…B_k ⊗ R.
    pub attack_0: Channel,
    /// Searched unitary on B₁…B_k ⊗ R.
    pub attack_1: Channel,
    pub k: usize,
    pub a_dim: usize,
    pub b_dim: usize,
    pub r_dim: usize,
}

impl RepetitionAdversary {
    /// ρ₀, ρ₁ on (A⊗B)^k in block order A₁B₁A₂B₂….
    pub fn induced_states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        let kk = self.a_dim.pow(self.k as u32);
        let ll = self.b_dim.pow(self.k as u32);
        let lr = ll * self.r_dim;
        let mut out = Vec::with_capacity(2);
        for attack in [&self.attack_0, &self.attack_1] {
            let u = &attack.kraus()[0];
            let w = Operator::from_vec(kk, lr, self.shared_state.amplitudes().to_vec())?;
            let moved = w.matmul(&u.transpose()).into_data();
            let shape = SubsystemShape::new(vec![kk * ll, self.r_dim])?;
            let grouped = reduced_state(&moved, &shape, &[0])?;
            out.push(DensityMatrix::normalized(ungroup(&grouped, self.a_dim, self.b_dim, self.k)?.hermitian_part())?);
        }
        let b = out.pop().expect("two states");
        let a = out.pop().expect("two states");
        Ok((a, b))
    }
}

/// Factor order A₁..A_k B₁..B_k for the grouped registers.
fn grouped_shape(a: usize, b: usize, k: usize) -> SubsystemShape {
    SubsystemShape::new(std::iter::repeat_n(a, k).chain(std::iter::repeat_n(b, k)).collect()).expect("positive")
}

/// Block order A₁B₁… → grouped order A₁..A_k B₁..B_k.
fn group(op: &Operator, a: usize, b: usize, k: usize) -> Result<Operator> {
    let block = SubsystemShape::new((0..k).flat_map(|_| [a, b]).collect())?;
    let order: Vec<usize> = (0..k).map(|i| 2 * i).chain((0..k).map(|i| 2 * i + 1)).collect();
    permute_operator(op, &block, &order)
}

/// Grouped order → block order.
fn ungroup(op: &Operator, a: usize, b: usize, k: usize) -> Result<Operator> {
    let order: Vec<usize> = (0..k).flat_map(|i| [i, k + i]).collect();
    permute_operator(op, &grouped_shape(a, b, k), &order)
}

/// ½ + 2^{−(k+1)} + 2√(2k·mu).
pub fn repetition_bound(k: usize, mu: f64) -> f64 {
    0.5 + 0.5f64.powi(k as i32 + 1) + 2.0 * (2.0 * k as f64 * mu).sqrt()
}

struct RepetitionSetup {
    problem: SteeringProblem,
    a_dim: usize,
    b_dim: usize,
    phis: [PureState; 2],
}

fn setup(inst: &QcdInstance, k: usize, advice: &PureState) -> Result<RepetitionSetup> {
    if k == 0 || k > MAX_K {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={MAX_K}")));
    }
    let a_dim = advice_f_dim(inst, advice) * inst.o_dim();
    let b_dim = inst.g_dim();
    let kk = a_dim.pow(k as u32);
    let ll = b_dim.pow(k as u32);
    if kk * ll > 4096 {
        return Err(Error::InvalidParameter(format!("(A⊗B)^{k} has dimension {} above 4096", kk * ll)));
    }
    let phis = [committed_state(inst, 0, advice)?, committed_state(inst, 1, advice)?];
    let m0 = group(&pass_operator(phis[0].amplitudes(), k), a_dim, b_dim, k)?;
    let m1 = group(&pass_operator(phis[1].amplitudes(), k), a_dim, b_dim, k)?;
    let dr = SteeringProblem::default_reference(kk, ll);
    Ok(RepetitionSetup { problem: SteeringProblem::new(m0, m1, kk, ll, dr)?, a_dim, b_dim, phis })
}

fn adversary(setup: &RepetitionSetup, sol: &SteeringSolution, k: usize) -> Result<RepetitionAdversary> {
    let p = &setup.problem;
    Ok(RepetitionAdversary {
        shared_state: PureState::normalized(sol.omega.clone())?,
        attack_0: Channel::identity(p.dl * p.dr),
        attack_1: Channel::unitary(&sol.v)?,
        k,
        a_dim: setup.a_dim,
        b_dim: setup.b_dim,
        r_dim: p.dr,
    })
}

/// Searched cheating sender for the k-fold repetition, with its strategy.
pub fn repetition_search(
    inst: &QcdInstance,
    k: usize,
    advice: &PureState,
    restarts: usize,
    seed: u64,
) -> Result<(CheatReport, RepetitionAdversary)> {
    let s = setup(inst, k, advice)?;
    let sol = s.problem.search(restarts, seed);
    let adv = adversary(&s, &sol, k)?;
    let bound = if inst.kind == PromiseKind::Yes { repetition_bound(k, inst.mu) } else { 1.0 };
    let report = CheatReport::new(
        sol.p0,
        sol.p1,
        bound,
        format!("multistart steering search, {} restarts, reference dimension {}", restarts.max(1), s.problem.dr),
    );
    if !report.within_bound(1e-6) {
        return Err(Error::NumericalDefect(format!("searched {} exceeds bound {}", report.average, bound)));
    }
    // the searched states pass the k-block test with the reported probabilities
    let (r0, r1) = adv.induced_states()?;
    let t0 = test_pass_prob(&r0, &s.phis[0], k)?;
    let t1 = test_pass_prob(&r1, &s.phis[1], k)?;
    if (t0 - sol.p0).abs() > 1e-9 || (t1 - sol.p1).abs() > 1e-9 {
        return Err(Error::NumericalDefect("steering values disagree with the swap-test evaluation".into()));
    }
    Ok((report, adv))
}

/// Searched cheating probability for the k-fold repetition, bounded by
/// ½ + 2^{−(k+1)} + 2√(2k·mu) on Y instances (the bound is 1 otherwise).
pub fn repetition_cheat(inst: &QcdInstance, k: usize, advice: &PureState, restarts: usize, seed: u64) -> Result<CheatReport> {
    repetition_search(inst, k, advice, restarts, seed).map(|(r, _)| r)
}

/// Single round: bound ¾ + √mu/4, attained (up to 1e-3) on ideal instances whose
/// committed states have orthogonal A-marginals.
pub fn qcd_single_round_cheat(inst: &QcdInstance, advice: &PureState, restarts: usize, seed: u64) -> Result<CheatReport> {
    let (mut report, _) = repetition_search(inst, 1, advice, restarts, seed)?;
    if inst.kind == PromiseKind::Yes {
        report.analytic_bound = 0.75 + inst.mu.sqrt() / 4.0;
    }
    if !report.within_bound(1e-6) {
        return Err(Error::NumericalDefect(format!("searched {} exceeds ¾ + √mu/4", report.average)));
    }
    let s = setup(inst, 1, advice)?;
    let shape = SubsystemShape::new(vec![s.a_dim, s.b_dim])?;
    let red = |p: &PureState| -> Result<DensityMatrix> {
        DensityMatrix::normalized(reduced_state(p.amplitudes(), &shape, &[0])?.hermitian_part())
    };
    let f = fidelity(&red(&s.phis[0])?, &red(&s.phis[1])?)?;
    if f <= 1e-9 && report.average < 0.75 - 1e-3 {
        return Err(Error::NumericalDefect(format!("search reached only {} on an ideal instance", report.average)));
    }
    report.strategy_note = format!("{}; A-marginal fidelity of committed states {f:.3e}", report.strategy_note);
    Ok(report)
}
