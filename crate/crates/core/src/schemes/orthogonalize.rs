//! Turning two nearly-distinguishable pure states into a pair whose A-marginals
//! are exactly orthogonal, with little movement of either state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::decomp::herm_eig;
use crate::linalg::operator::Operator;
use crate::linalg::state::{reduced_state, uhlmann_overlap, DensityMatrix, PureState, SubsystemShape};
use crate::linalg::tol;
use crate::norms::trace_norm;

#[derive(Clone, Debug, Serialize)]
pub struct Orthogonalized {
    pub phi0p: PureState,
    pub phi1p: PureState,
    /// 2 − ‖tr_B φ₀ − tr_B φ₁‖tr for the inputs.
    pub epsilon: f64,
    /// |⟨φ'_i|φ_i⟩| for i = 0, 1.
    pub overlaps: [f64; 2],
}

/// `split` is A ⊗ B with A first. The A-marginals are projected onto the
/// non-negative and negative eigenspaces of their difference and then
/// re-purified as close to the inputs as possible.
pub fn orthogonalize(phi0: &PureState, phi1: &PureState, split: &SubsystemShape) -> Result<Orthogonalized> {
    if split.len() != 2 {
        return Err(Error::InvalidParameter(format!("split must have two factors, got {}", split.len())));
    }
    if phi0.dim() != split.dim() || phi1.dim() != split.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {} for a split of dimension {}",
            phi0.dim(),
            phi1.dim(),
            split.dim()
        )));
    }
    let marginal = |p: &PureState| -> Result<DensityMatrix> {
        DensityMatrix::normalized(reduced_state(p.amplitudes(), split, &[0])?.hermitian_part())
    };
    let rho = [marginal(phi0)?, marginal(phi1)?];
    let epsilon = (2.0 - trace_norm(&(rho[0].op() - rho[1].op()))).max(0.0);
    if epsilon >= 1.0 {
        return Err(Error::TooClose { epsilon });
    }
    let plus = herm_eig(&(rho[0].op() - rho[1].op()))?.map(|l| if l > -tol::RANK { 1.0 } else { 0.0 });
    let minus = &Operator::identity(plus.rows()) - &plus;
    let mut out = Vec::with_capacity(2);
    let mut overlaps = [0.0; 2];
    for (i, (phi, proj)) in [(phi0, &plus), (phi1, &minus)].into_iter().enumerate() {
        let target = DensityMatrix::normalized(proj.conjugate(rho[i].op()).hermitian_part())?;
        let p = uhlmann_overlap(&rho[i], &target, phi)?;
        overlaps[i] = p.overlap(phi).norm();
        out.push(p);
    }
    let phi1p = out.pop().expect("two states");
    let phi0p = out.pop().expect("two states");
    Ok(Orthogonalized { phi0p, phi1p, epsilon, overlaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::C64;
    use crate::norms::fidelity;

    fn diag_purification(p: f64) -> PureState {
        // √p|00⟩ + √(1−p)|11⟩
        PureState::new(vec![C64::new(p.sqrt(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new((1.0 - p).sqrt(), 0.0)])
            .unwrap()
    }

    #[test]
    fn diagonal_qubit_pair() {
        let a = diag_purification(0.99);
        let b = diag_purification(0.01);
        let split = SubsystemShape::qubits(2);
        let o = orthogonalize(&a, &b, &split).unwrap();
        assert!((o.epsilon - 0.04).abs() < 1e-12);
        let r0 = reduced_state(o.phi0p.amplitudes(), &split, &[0]).unwrap();
        let r1 = reduced_state(o.phi1p.amplitudes(), &split, &[0]).unwrap();
        assert!(r0.max_abs_diff(&Operator::diag_real(&[1.0, 0.0])) < 1e-12);
        assert!(r1.max_abs_diff(&Operator::diag_real(&[0.0, 1.0])) < 1e-12);
        for ov in o.overlaps {
            assert!((ov - 0.99f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_inputs_are_kept() {
        let split = SubsystemShape::qubits(2);
        let a = diag_purification(1.0);
        let b = diag_purification(0.0);
        let o = orthogonalize(&a, &b, &split).unwrap();
        assert!(o.epsilon < 1e-12);
        assert!((o.phi0p.overlap(&a).norm() - 1.0).abs() < 1e-12);
        assert!((o.phi1p.overlap(&b).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn close_states_are_rejected() {
        let split = SubsystemShape::qubits(2);
        let a = diag_purification(0.6);
        let b = diag_purification(0.4);
        assert!(matches!(orthogonalize(&a, &b, &split), Err(Error::TooClose { .. })));
    }

    #[test]
    fn outputs_have_orthogonal_marginals() {
        let split = SubsystemShape::new(vec![3, 2]).unwrap();
        let a = PureState::normalized(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.1),
            C64::new(0.05, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.02, 0.0),
        ])
        .unwrap();
        let b = PureState::normalized(vec![
            C64::new(0.0, 0.0),
            C64::new(0.03, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.9, 0.0),
            C64::new(0.4, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let o = orthogonalize(&a, &b, &split).unwrap();
        let m = |p: &PureState| DensityMatrix::normalized(reduced_state(p.amplitudes(), &split, &[0]).unwrap()).unwrap();
        assert!(fidelity(&m(&o.phi0p), &m(&o.phi1p)).unwrap() <= 1e-9);
        for ov in o.overlaps {
            assert!(ov >= 1.0 - o.epsilon - 1e-8);
        }
    }
}
