//! Commitment from a pair of circuits with far-apart outputs.

use serde::Serialize;

use super::CheatReport;
use crate::channels::QsdInstance;
use crate::error::{Error, Result};
use crate::linalg::operator::{tensor_vec, ONE, ZERO};
use crate::linalg::state::{reduced_state, uhlmann_overlap, DensityMatrix, PureState, SubsystemShape};
use crate::norms::fidelity_sum_opt;

#[derive(Clone, Debug, Serialize)]
pub struct QsdCommitment {
    /// |φ_{C_b}⟩ on O ⊗ G, kept by the sender until the reveal.
    pub sender_keep: PureState,
    /// tr_G |φ_{C_b}⟩⟨φ_{C_b}|, sent to the receiver.
    pub commit_msg: DensityMatrix,
}

pub fn qsd_commit(inst: &QsdInstance, b: u8) -> Result<QsdCommitment> {
    let sender_keep = inst.full_state(b)?;
    let shape = SubsystemShape::new(vec![inst.o_dim(), inst.g_dim()])?;
    let commit_msg = DensityMatrix::new(reduced_state(sender_keep.amplitudes(), &shape, &[0])?.hermitian_part())?;
    Ok(QsdCommitment { sender_keep, commit_msg })
}

/// Acceptance probability ⟨φ_{C_b}|ξ|φ_{C_b}⟩ of the receiver's check, which
/// undoes C_b and measures the all-zero outcome.
pub fn qsd_verify(inst: &QsdInstance, b: u8, full_state: &DensityMatrix) -> Result<f64> {
    let phi = inst.full_state(b)?;
    if full_state.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "revealed state of dimension {} for O ⊗ G of dimension {}",
            full_state.dim(),
            phi.dim()
        )));
    }
    let v = full_state.op().apply(phi.amplitudes());
    Ok(crate::linalg::operator::inner(phi.amplitudes(), &v).re.clamp(0.0, 1.0))
}

/// Optimal cheating sender: commit to the O-part of γ maximizing
/// F(ρ⁰, γ)² + F(γ, ρ¹)², then steer a purification of γ towards |φ_{C_b}⟩.
pub fn qsd_optimal_cheat(inst: &QsdInstance) -> Result<CheatReport> {
    let rho = [inst.output_state(0)?, inst.output_state(1)?];
    let opt = fidelity_sum_opt(&rho[0], &rho[1])?;
    if !opt.converged {
        return Err(Error::NumericalDefect(format!(
            "fidelity-sum search stopped at {} below the optimum {}",
            opt.value, opt.target
        )));
    }
    let gamma = &opt.optimizer_state;
    let (od, gd) = (inst.o_dim(), inst.g_dim());
    // the sender's extra register R' has dimension dim O, enough to purify γ
    let rd = od;
    let mut p = [0.0; 2];
    let mut commits = Vec::with_capacity(2);
    for b in 0..2u8 {
        let phi = inst.full_state(b)?;
        let mut zero = vec![ZERO; rd];
        zero[0] = ONE;
        let target = PureState::new(tensor_vec(phi.amplitudes(), &zero))?;
        let chi = uhlmann_overlap(&rho[b as usize], gamma, &target)?;
        let shape = SubsystemShape::new(vec![od, gd, rd])?;
        let xi = DensityMatrix::normalized(reduced_state(chi.amplitudes(), &shape, &[0, 1])?.hermitian_part())?;
        commits.push(reduced_state(chi.amplitudes(), &shape, &[0])?);
        p[b as usize] = qsd_verify(inst, b, &xi)?;
    }
    // both reveals start from the same committed message
    let drift = commits[0].max_abs_diff(&commits[1]);
    if drift > 1e-8 {
        return Err(Error::NumericalDefect(format!("cheating commitments differ by {drift:.3e}")));
    }
    Ok(CheatReport::new(
        p[0],
        p[1],
        inst.analytic_bound(),
        format!("Uhlmann steering of the fidelity-sum optimizer (target ½(1 + F) = {:.12})", 0.5 * opt.target),
    ))
}

/// Trace distance between the two commit messages (statistical hiding).
pub fn commit_distance(inst: &QsdInstance) -> Result<f64> {
    let a = qsd_commit(inst, 0)?.commit_msg;
    let b = qsd_commit(inst, 1)?.commit_msg;
    Ok(crate::norms::trace_norm(&(a.op() - b.op())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gen_qsd, PromiseKind};
    use crate::linalg::random::{random_density, stream_rng};
    use crate::linalg::operator::Operator;
    use crate::norms::fidelity;

    #[test]
    fn commit_messages_one_qubit() {
        let inst = gen_qsd(PromiseKind::Yes, 1, false, 0).unwrap();
        let c0 = qsd_commit(&inst, 0).unwrap();
        let c1 = qsd_commit(&inst, 1).unwrap();
        assert!(c0.commit_msg.op().max_abs_diff(&Operator::diag_real(&[1.0, 0.0])) < 1e-15);
        assert!(c1.commit_msg.op().max_abs_diff(&Operator::diag_real(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn garbage_commit_is_partial_trace() {
        let inst = gen_qsd(PromiseKind::Yes, 2, true, 3).unwrap();
        let c = qsd_commit(&inst, 1).unwrap();
        let run = inst.c1.run_from_zero().unwrap();
        let direct = crate::linalg::state::partial_trace(
            &Operator::outer(run.amplitudes(), run.amplitudes()),
            &inst.c1.shape(),
            &inst.o_wires(),
        )
        .unwrap();
        assert!(c.commit_msg.op().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn verify_examples() {
        let inst = gen_qsd(PromiseKind::Yes, 2, true, 1).unwrap();
        for b in 0..2u8 {
            let honest = qsd_commit(&inst, b).unwrap().sender_keep.density();
            assert!((qsd_verify(&inst, b, &honest).unwrap() - 1.0).abs() < 1e-12);
            assert!(qsd_verify(&inst, 1 - b, &honest).unwrap() < 1e-12);
        }
        let xi = random_density(8, &mut stream_rng(2, 0));
        let phi = inst.full_state(0).unwrap();
        let direct = crate::linalg::operator::inner(phi.amplitudes(), &xi.op().apply(phi.amplitudes())).norm();
        assert!((qsd_verify(&inst, 0, &xi).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn optimal_cheat_examples() {
        let same = gen_qsd(PromiseKind::No, 2, false, 0).unwrap();
        assert!((qsd_optimal_cheat(&same).unwrap().average - 1.0).abs() < 1e-6);
        let far = gen_qsd(PromiseKind::Yes, 2, true, 0).unwrap();
        let r = qsd_optimal_cheat(&far).unwrap();
        assert!((r.average - 0.5).abs() < 1e-6);
        assert!(r.within_bound(1e-6));
        let rot = QsdInstance::rotation_pair(std::f64::consts::FRAC_PI_3).unwrap();
        assert!((qsd_optimal_cheat(&rot).unwrap().average - 0.75).abs() < 1e-6);
    }

    #[test]
    fn optimal_cheat_matches_fidelity_formula() {
        for seed in 0..4 {
            let inst = gen_qsd(PromiseKind::No, 2, true, seed).unwrap();
            // perturb C1 so the outputs differ but are not orthogonal
            let mut c1 = inst.c1.clone();
            c1.push(crate::channels::gates::ry(0.3 + seed as f64 * 0.2), &[0]);
            let custom = QsdInstance::new(inst.c0.clone(), c1, 1e-6, PromiseKind::Unpromised).unwrap();
            let f = fidelity(&custom.output_state(0).unwrap(), &custom.output_state(1).unwrap()).unwrap();
            let r = qsd_optimal_cheat(&custom).unwrap();
            assert!((r.average - 0.5 * (1.0 + f)).abs() < 1e-6, "{} vs {}", r.average, 0.5 * (1.0 + f));
        }
    }

    #[test]
    fn no_instances_hide_statistically() {
        let inst = gen_qsd(PromiseKind::No, 3, true, 9).unwrap();
        assert!(commit_distance(&inst).unwrap() <= inst.mu);
    }
}
