//! Commitment from a pair of measurements with equal-marginal witnesses.
//!
//! The sender commits by sending the Y half of ρ^b and reveals by sending the
//! X half; the receiver applies q_b to the joint state.

use serde::Serialize;

use super::steering::SteeringProblem;
use crate::channels::{Channel, PiInstance};
use crate::error::{Error, Result};
use crate::linalg::operator::Operator;
use crate::linalg::state::{partial_trace, permute_operator, permute_vector, DensityMatrix, PureState, SubsystemShape};

#[derive(Clone, Debug, Serialize)]
pub struct PiCommitment {
    /// tr_Y ρ^b, the half kept until the reveal.
    pub sender_keep: DensityMatrix,
    /// tr_X ρ^b, sent at commit time.
    pub commit_msg: DensityMatrix,
    /// ρ^b itself; the reveal completes it on the receiver's side.
    pub joint: DensityMatrix,
}

pub fn pi_commit(inst: &PiInstance, b: u8) -> Result<PiCommitment> {
    let joint = inst
        .witness(b)
        .ok_or_else(|| Error::InvalidParameter("commitments need an instance with witnesses".into()))?
        .clone();
    let shape = inst.shape();
    Ok(PiCommitment {
        sender_keep: joint.partial_trace(&shape, &[0])?,
        commit_msg: joint.partial_trace(&shape, &[1])?,
        joint,
    })
}

/// Probability that q_b outputs 1 on `joint` (a state on X ⊗ Y).
pub fn pi_verify(inst: &PiInstance, b: u8, joint: &DensityMatrix) -> Result<f64> {
    if joint.dim() != inst.dx * inst.dy {
        return Err(Error::DimensionMismatch(format!(
            "joint state of dimension {} for X ⊗ Y of dimension {}",
            joint.dim(),
            inst.dx * inst.dy
        )));
    }
    inst.measurement(b).accept_probability(joint.op())
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessEval {
    /// ½(Pr[q0(ρ⁰) = 1] + Pr[q1(ρ¹) = 1]).
    pub avg_accept: f64,
    /// tr_W σ = ρ⁰ within 1e-9 and ρ¹ = (Ψ ⊗ I_Y)(σ) is a state.
    pub constraint_ok: bool,
    pub p0: f64,
    pub p1: f64,
    pub rho1: Operator,
}

/// Evaluates a candidate witness: `sigma` lives on W ⊗ X ⊗ Y and `psi` maps
/// W ⊗ X to X.
pub fn witnessable_eval(
    q0: &Channel,
    q1: &Channel,
    rho0: &DensityMatrix,
    sigma: &DensityMatrix,
    psi: &Channel,
) -> Result<WitnessEval> {
    let dx = psi.output_dim();
    if psi.input_dim() % dx != 0 || rho0.dim() % dx != 0 {
        return Err(Error::DimensionMismatch(format!(
            "Ψ maps {} to {dx}, ρ⁰ has dimension {}",
            psi.input_dim(),
            rho0.dim()
        )));
    }
    let dw = psi.input_dim() / dx;
    let dy = rho0.dim() / dx;
    if sigma.dim() != dw * dx * dy || q0.input_dim() != dx * dy || q1.input_dim() != dx * dy {
        return Err(Error::DimensionMismatch(format!(
            "σ of dimension {} and measurements on {} for W, X, Y = {dw}, {dx}, {dy}",
            sigma.dim(),
            q0.input_dim()
        )));
    }
    let wxy = SubsystemShape::new(vec![dw, dx, dy])?;
    let marginal = partial_trace(sigma.op(), &wxy, &[1, 2])?;
    let dev = marginal.max_abs_diff(rho0.op());
    // Y ⊗ (W ⊗ X), apply Ψ with Y as the reference, then back to X ⊗ Y
    let moved = permute_operator(sigma.op(), &wxy, &[2, 0, 1])?;
    let out = psi.apply_with_reference(&moved, dy)?;
    let rho1 = permute_operator(&out, &SubsystemShape::new(vec![dy, dx])?, &[1, 0])?;
    let trace_dev = (rho1.trace().re - 1.0).abs();
    let p0 = q0.accept_probability(rho0.op())?;
    let p1 = q1.accept_probability(&rho1)?;
    Ok(WitnessEval {
        avg_accept: 0.5 * (p0 + p1),
        constraint_ok: dev <= 1e-9 && trace_dev <= 1e-9,
        p0,
        p1,
        rho1,
    })
}

/// Best witness pair found by the search, with the witness in the form
/// accepted by [`witnessable_eval`].
#[derive(Clone, Debug, Serialize)]
pub struct PiSearch {
    pub value: f64,
    pub p0: f64,
    pub p1: f64,
    /// σ on W ⊗ X ⊗ Y.
    pub sigma: DensityMatrix,
    /// Ψ from W ⊗ X to X.
    pub psi: Channel,
    pub rho0: DensityMatrix,
    pub rho1: DensityMatrix,
    pub restarts: usize,
}

/// Searches over pairs with equal Y-marginals for the largest average
/// acceptance; the result is a lower bound on the best cheating sender.
pub fn pi_cheat_search(inst: &PiInstance, restarts: usize, seed: u64) -> Result<PiSearch> {
    let (dx, dy) = (inst.dx, inst.dy);
    let xy = inst.shape();
    // the shared register is Y, the freely steerable one is X
    let to_yx = |m: Operator| permute_operator(&m, &xy, &[1, 0]);
    let m0 = to_yx(inst.q0.acceptance_operator()?)?;
    let m1 = to_yx(inst.q1.acceptance_operator()?)?;
    let dr = SteeringProblem::default_reference(dy, dx);
    let problem = SteeringProblem::new(m0, m1, dy, dx, dr)?;
    let sol = problem.search(restarts, seed);

    let yxr = SubsystemShape::new(vec![dy, dx, dr])?;
    let omega = PureState::normalized(permute_vector(&sol.omega, &yxr, &[2, 1, 0])?)?;
    let sigma = omega.density();
    let v = permute_operator(&sol.v, &SubsystemShape::new(vec![dx, dr])?, &[1, 0])?;
    let psi = Channel::stinespring(v, dr * dx, 1, SubsystemShape::new(vec![dr, dx])?, vec![0])?;
    let rho0 = sigma.partial_trace(&SubsystemShape::new(vec![dr, dx, dy])?, &[1, 2])?;
    let eval = witnessable_eval(&inst.q0, &inst.q1, &rho0, &sigma, &psi)?;
    if !eval.constraint_ok || (eval.avg_accept - sol.value).abs() > 1e-9 {
        return Err(Error::NumericalDefect(format!(
            "searched witness evaluates to {} against {}",
            eval.avg_accept, sol.value
        )));
    }
    let rho1 = DensityMatrix::normalized(eval.rho1.hermitian_part())?;
    Ok(PiSearch { value: eval.avg_accept, p0: eval.p0, p1: eval.p1, sigma, psi, rho0, rho1, restarts: restarts.max(1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gen_pi, PromiseKind};
    use crate::linalg::random::{random_density, stream_rng};

    #[test]
    fn bell_pair_commitments_hide() {
        let inst = PiInstance::bell_pair();
        let half = Operator::identity(2).scale_real(0.5);
        for b in 0..2u8 {
            let c = pi_commit(&inst, b).unwrap();
            assert!(c.commit_msg.op().max_abs_diff(&half) < 1e-15);
            assert!((pi_verify(&inst, b, &c.joint).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_yes_instances_hide_and_accept() {
        for seed in 0..5 {
            let inst = gen_pi(PromiseKind::Yes, (2, 2), seed).unwrap();
            let c0 = pi_commit(&inst, 0).unwrap();
            let c1 = pi_commit(&inst, 1).unwrap();
            assert!(c0.commit_msg.op().max_abs_diff(c1.commit_msg.op()) < 1e-10);
            for (b, c) in [(0u8, &c0), (1, &c1)] {
                assert!((pi_verify(&inst, b, &c.joint).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn verify_matches_acceptance_operator() {
        let inst = gen_pi(PromiseKind::Yes, (2, 3), 4).unwrap();
        let joint = random_density(6, &mut stream_rng(8, 0));
        let m = inst.q1.acceptance_operator().unwrap();
        assert!((pi_verify(&inst, 1, &joint).unwrap() - joint.op().trace_product(&m).re).abs() < 1e-12);
        assert!(pi_verify(&inst, 1, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn orthogonal_support_rejected() {
        let inst = PiInstance::bell_pair();
        // |φ⁻⟩ is orthogonal to |φ⁺⟩
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = crate::linalg::operator::ZERO;
        let minus = PureState::new(vec![
            crate::linalg::operator::C64::new(h, 0.0),
            z,
            z,
            crate::linalg::operator::C64::new(-h, 0.0),
        ])
        .unwrap();
        assert!(pi_verify(&inst, 0, &minus.density()).unwrap() < 1e-12);
    }

    #[test]
    fn identity_witness() {
        let inst = PiInstance::bell_pair();
        let rho0 = inst.rho0.clone().unwrap();
        let e = witnessable_eval(&inst.q0, &inst.q1, &rho0, &rho0, &Channel::identity(2)).unwrap();
        assert!(e.constraint_ok);
        assert!(e.rho1.max_abs_diff(rho0.op()) < 1e-14);
        assert!((e.avg_accept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_on_yes_finds_honest_value() {
        let inst = gen_pi(PromiseKind::Yes, (2, 2), 1).unwrap();
        let s = pi_cheat_search(&inst, 8, 0).unwrap();
        assert!(s.value > 1.0 - 1e-6, "{}", s.value);
    }

    #[test]
    fn search_on_no_stays_at_half() {
        let inst = gen_pi(PromiseKind::No, (2, 2), 3).unwrap();
        let s = pi_cheat_search(&inst, 16, 1).unwrap();
        assert!(s.value <= 0.5 + inst.mu + 1e-3);
        let t = PiInstance::tradeoff_example().unwrap();
        let s = pi_cheat_search(&t, 16, 1).unwrap();
        assert!((s.value - 0.5).abs() < 1e-6, "{}", s.value);
    }
}
