//! Distance and overlap functionals on states and channels, and the
//! optimizers built on them.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::decomp::{herm_eig, herm_eig_unchecked, psd_sqrt, svd, top_eigenvector};
use crate::linalg::operator::{Operator, C64, ZERO};
use crate::linalg::random::{random_density, random_pure_vec, stream_rng};
use crate::linalg::state::{purify, uhlmann_overlap, DensityMatrix, PureState, SubsystemShape};
use crate::linalg::tol;

pub const DEFAULT_RESTARTS: usize = 32;
const ASCENT_MAX_ITERS: usize = 500;
const ASCENT_TOL: f64 = 1e-13;

/// Sum of singular values.
pub fn trace_norm(x: &Operator) -> f64 {
    svd(x).s.iter().sum()
}

/// ‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(trace_norm(&(rho.op() - sigma.op())))
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

/// F(ρ, σ) = ‖√ρ √σ‖₁, in [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let a = psd_sqrt(rho.op())?;
    let b = psd_sqrt(sigma.op())?;
    Ok(trace_norm(&a.matmul(&b)).min(1.0))
}

/// Fidelity of two pure states.
pub fn pure_fidelity(a: &PureState, b: &PureState) -> f64 {
    a.overlap(b).norm().min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FvdgBounds {
    /// 1 − F
    pub lower: f64,
    /// ½‖ρ − σ‖₁
    pub mid: f64,
    /// √(1 − F²)
    pub upper: f64,
}

pub fn fvdg_bounds(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<FvdgBounds> {
    let f = fidelity(rho, sigma)?;
    let b = FvdgBounds { lower: 1.0 - f, mid: 0.5 * trace_distance(rho, sigma)?, upper: (1.0 - f * f).max(0.0).sqrt() };
    if b.lower > b.mid + tol::DEFAULT || b.mid > b.upper + tol::DEFAULT {
        return Err(Error::NumericalDefect(format!(
            "ordering violated: {:.12} ≤ {:.12} ≤ {:.12}",
            b.lower, b.mid, b.upper
        )));
    }
    Ok(b)
}

/// ½ + ½ tr(ρσ).
pub fn swap_test_accept(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok((0.5 + 0.5 * rho.op().trace_product(sigma.op()).re).clamp(0.5, 1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelitySumResult {
    /// max over ξ of F(ρ,ξ)² + F(ξ,σ)² as found by the search.
    pub value: f64,
    pub optimizer_state: DensityMatrix,
    /// 1 + F(ρ, σ)
    pub target: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Embeds a purification on S ⊗ C^r into S ⊗ C^dr (dr ≥ r).
fn pad_reference(psi: &PureState, ds: usize, dr: usize) -> PureState {
    let r = psi.dim() / ds;
    let mut amps = vec![ZERO; ds * dr];
    for s in 0..ds {
        for k in 0..r {
            amps[s * dr + k] = psi.amplitudes()[s * r + k];
        }
    }
    PureState::new(amps).expect("padding keeps the norm")
}

fn fidelity_sum(rho: &DensityMatrix, xi: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let a = fidelity(rho, xi)?;
    let b = fidelity(xi, sigma)?;
    Ok(a * a + b * b)
}

/// Seesaw step: purify ξ, align purifications of ρ and σ with it, then take the
/// best pure state for the two aligned vectors.
fn seesaw_step(rho: &DensityMatrix, sigma: &DensityMatrix, xi: &DensityMatrix) -> Result<DensityMatrix> {
    let d = rho.dim();
    let psi_xi = pad_reference(&purify(xi), d, d);
    let psi_rho = uhlmann_overlap(xi, rho, &psi_xi)?;
    let psi_sigma = uhlmann_overlap(xi, sigma, &psi_xi)?;
    let g = &Operator::outer(psi_rho.amplitudes(), psi_rho.amplitudes())
        + &Operator::outer(psi_sigma.amplitudes(), psi_sigma.amplitudes());
    let (_, chi) = top_eigenvector(&g);
    let shape = SubsystemShape::new(vec![d, d])?;
    let red = crate::linalg::state::reduced_state(&chi, &shape, &[0])?;
    DensityMatrix::normalized(red.hermitian_part())
}

/// Maximizes F(ρ,ξ)² + F(ξ,σ)² over states ξ.
pub fn fidelity_sum_opt(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<FidelitySumResult> {
    same_dim(rho, sigma)?;
    let target = 1.0 + fidelity(rho, sigma)?;
    let mut best: Option<(f64, DensityMatrix)> = None;
    let mut iterations = 0;
    const RESTARTS: u64 = 8;
    const STEPS: usize = 50;
    'outer: for restart in 0..RESTARTS {
        let mut xi = if restart == 0 {
            rho.clone()
        } else {
            random_density(rho.dim(), &mut stream_rng(0x5eed, restart))
        };
        let mut value = fidelity_sum(rho, &xi, sigma)?;
        for _ in 0..STEPS {
            iterations += 1;
            let next = seesaw_step(rho, sigma, &xi)?;
            let v = fidelity_sum(rho, &next, sigma)?;
            let improved = v > value + 1e-15;
            if v >= value {
                xi = next;
                value = v;
            }
            if (value - target).abs() <= 1e-9 || !improved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, xi));
        }
        if (best.as_ref().unwrap().0 - target).abs() <= 1e-9 {
            break 'outer;
        }
    }
    let (value, optimizer_state) = best.expect("at least one restart");
    Ok(FidelitySumResult { value, optimizer_state, target, converged: (value - target).abs() <= 1e-6, iterations })
}

/// Lower bound on ‖Φ₀ − Φ₁‖⋄ with the input that attains it.
#[derive(Clone, Debug, Serialize)]
pub struct DiamondEstimate {
    pub lower_bound: f64,
    /// Pure state on reference ⊗ input (reference first, same dimension as input).
    pub maximizer: PureState,
    pub restarts: usize,
    pub converged: bool,
}

fn check_pair(phi0: &Channel, phi1: &Channel) -> Result<()> {
    if phi0.input_dim() != phi1.input_dim() || phi0.output_dim() != phi1.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}→{} and {}→{}",
            phi0.input_dim(),
            phi0.output_dim(),
            phi1.input_dim(),
            phi1.output_dim()
        )));
    }
    Ok(())
}

/// (id_R ⊗ (Φ₀ − Φ₁))(|φ⟩⟨φ|).
pub fn channel_difference_output(phi0: &Channel, phi1: &Channel, input: &[C64], reference: usize) -> Result<Operator> {
    let p = Operator::outer(input, input);
    Ok(&phi0.apply_with_reference(&p, reference)? - &phi1.apply_with_reference(&p, reference)?)
}

/// Π₊ − Π₋ for a Hermitian operator, with the kernel assigned to Π₊.
fn sign_operator(h: &Operator) -> Operator {
    let eig = herm_eig_unchecked(&h.hermitian_part());
    eig.map(|l| if l >= -tol::RANK { 1.0 } else { -1.0 })
}

/// Alternating ascent from `start`; returns (value, state, converged).
fn ascend(phi0: &Channel, phi1: &Channel, reference: usize, start: Vec<C64>) -> Result<(f64, Vec<C64>, bool)> {
    let mut phi = start;
    let mut value = trace_norm(&channel_difference_output(phi0, phi1, &phi, reference)?);
    let mut converged = false;
    for _ in 0..ASCENT_MAX_ITERS {
        if value >= 2.0 - 1e-12 {
            converged = true;
            break;
        }
        let delta = channel_difference_output(phi0, phi1, &phi, reference)?;
        let h = sign_operator(&delta);
        let g = &phi0.adjoint_with_reference(&h, reference)? - &phi1.adjoint_with_reference(&h, reference)?;
        let (_, next) = top_eigenvector(&g);
        let v = trace_norm(&channel_difference_output(phi0, phi1, &next, reference)?);
        if v <= value + ASCENT_TOL {
            if v > value {
                phi = next;
                value = v;
            }
            converged = true;
            break;
        }
        phi = next;
        value = v;
    }
    Ok((value.min(2.0), phi, converged))
}

fn multistart(phi0: &Channel, phi1: &Channel, reference: usize, restarts: usize, seed: u64) -> Result<(f64, Vec<C64>, bool)> {
    check_pair(phi0, phi1)?;
    let d = phi0.input_dim();
    let dim = d * reference;
    let mut best: Option<(f64, Vec<C64>, bool)> = None;
    for r in 0..restarts.max(1) {
        let start = if r == 0 && reference > 1 {
            // maximally entangled start
            let w = 1.0 / (d as f64).sqrt();
            (0..dim).map(|i| if i % (d + 1) == 0 { C64::new(w, 0.0) } else { ZERO }).collect()
        } else {
            random_pure_vec(dim, &mut stream_rng(seed, r as u64))
        };
        let run = ascend(phi0, phi1, reference, start)?;
        if best.as_ref().is_none_or(|b| run.0 > b.0) {
            best = Some(run);
        }
        if best.as_ref().unwrap().0 >= 2.0 - 1e-12 {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Multistart ascent for max over pure φ on reference ⊗ input of
/// ‖(id ⊗ (Φ₀ − Φ₁))(|φ⟩⟨φ|)‖₁.
pub fn diamond_lower(phi0: &Channel, phi1: &Channel, restarts: usize, seed: u64) -> Result<DiamondEstimate> {
    let d = phi0.input_dim();
    let (value, state, converged) = multistart(phi0, phi1, d, restarts, seed)?;
    Ok(DiamondEstimate {
        lower_bound: value,
        maximizer: PureState::normalized(state)?,
        restarts: restarts.max(1),
        converged,
    })
}

/// dim(input) × (multistart estimate of the induced trace norm over pure
/// unentangled inputs). Fails if the diamond estimate exceeds it.
pub fn diamond_dim_bound(phi0: &Channel, phi1: &Channel) -> Result<f64> {
    const SEED: u64 = 0xd1a;
    let (induced, _, _) = multistart(phi0, phi1, 1, DEFAULT_RESTARTS, SEED)?;
    let bound = phi0.input_dim() as f64 * induced;
    let lower = diamond_lower(phi0, phi1, DEFAULT_RESTARTS, SEED)?.lower_bound;
    if lower > bound + 1e-6 {
        return Err(Error::NumericalDefect(format!("diamond estimate {lower} exceeds dimension bound {bound}")));
    }
    Ok(bound)
}

/// Projector onto the non-negative eigenspace of ρ⁰ − ρ¹.
pub fn helstrom_effect(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<Operator> {
    same_dim(rho0, rho1)?;
    let eig = herm_eig(&(rho0.op() - rho1.op()))?;
    Ok(eig.map(|l| if l >= -tol::RANK { 1.0 } else { 0.0 }))
}

/// |Pr[d(ρ⁰ ⊗ σ) = 1] − Pr[d(ρ¹ ⊗ σ) = 1]| for a one-bit measurement channel `d`.
pub fn advantage(d: &Channel, advice: &DensityMatrix, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    same_dim(rho0, rho1)?;
    if d.input_dim() != rho0.dim() * advice.dim() {
        return Err(Error::DimensionMismatch(format!(
            "distinguisher input {} against state {} ⊗ advice {}",
            d.input_dim(),
            rho0.dim(),
            advice.dim()
        )));
    }
    let p0 = d.accept_probability(&rho0.op().kron(advice.op()))?;
    let p1 = d.accept_probability(&rho1.op().kron(advice.op()))?;
    Ok((p0 - p1).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::gates;
    use crate::linalg::operator::{basis_vector, tensor, tensor_vec};
    use crate::linalg::random::{haar_unitary, random_density, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Closed form for qubits: F² = tr(ρσ) + 2√(det ρ det σ).
    fn qubit_fidelity(rho: &Operator, sigma: &Operator) -> f64 {
        let det = |m: &Operator| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
        (rho.trace_product(sigma).re + 2.0 * (det(rho) * det(sigma)).sqrt()).sqrt()
    }

    #[test]
    fn trace_norm_basics() {
        assert!((trace_norm(&gates::pauli_z()) - 2.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((trace_norm(random_density(5, &mut rng).op()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(3, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap() < 1e-12);
        let a = random_pure_state(4, &mut rng);
        let b = random_pure_state(4, &mut rng);
        assert!((fidelity(&a.density(), &b.density()).unwrap() - a.overlap(&b).norm()).abs() < 1e-9);
        for _ in 0..50 {
            let r = random_density(2, &mut rng);
            let s = random_density(2, &mut rng);
            let f = fidelity(&r, &s).unwrap();
            assert!((f - qubit_fidelity(r.op(), s.op())).abs() < 1e-10);
            assert!((f - fidelity(&s, &r).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn fvdg_edge_cases() {
        let rho = DensityMatrix::maximally_mixed(3);
        let b = fvdg_bounds(&rho, &rho).unwrap();
        assert!(b.lower.abs() < 1e-9 && b.mid.abs() < 1e-12 && b.upper < 1e-4);
        let b = fvdg_bounds(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.mid - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_test_examples() {
        let z = DensityMatrix::basis(2, 0);
        assert!((swap_test_accept(&z, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!((swap_test_accept(&z, &DensityMatrix::basis(2, 1)).unwrap() - 0.5).abs() < 1e-15);
        let m = DensityMatrix::maximally_mixed(2);
        assert!((swap_test_accept(&m, &m).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn fidelity_sum_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(3, &mut rng);
        let r = fidelity_sum_opt(&rho, &rho).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
        let r = fidelity_sum_opt(&DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        for _ in 0..20 {
            let a = random_density(2, &mut rng);
            let b = random_density(2, &mut rng);
            let r = fidelity_sum_opt(&a, &b).unwrap();
            assert!((r.value - 1.0 - qubit_fidelity(a.op(), b.op())).abs() < 1e-6);
            assert!((fidelity_sum(&a, &r.optimizer_state, &b).unwrap() - r.value).abs() < 1e-8);
        }
    }

    #[test]
    fn diamond_examples() {
        let id = Channel::identity(2);
        let z = Channel::unitary(&gates::pauli_z()).unwrap();
        assert!(diamond_lower(&id, &id, 4, 0).unwrap().lower_bound < 1e-12);
        let est = diamond_lower(&id, &z, 4, 0).unwrap();
        assert!((est.lower_bound - 2.0).abs() < 1e-9);
        let out = channel_difference_output(&id, &z, est.maximizer.amplitudes(), 2).unwrap();
        assert!((trace_norm(&out) - est.lower_bound).abs() < 1e-8);
        let r0 = Channel::replacement(2, &DensityMatrix::basis(2, 0));
        let r1 = Channel::replacement(2, &DensityMatrix::basis(2, 1));
        assert!((diamond_lower(&r0, &r1, 2, 1).unwrap().lower_bound - 2.0).abs() < 1e-9);
        assert!(diamond_dim_bound(&id, &z).unwrap() >= 2.0 - 1e-9);
        assert!(diamond_dim_bound(&id, &id).unwrap() < 1e-12);
    }

    #[test]
    fn identity_vs_depolarizing_matches_grid() {
        let id = Channel::identity(2);
        let dep = Channel::depolarizing(2, 1.0).unwrap();
        let est = diamond_lower(&id, &dep, DEFAULT_RESTARTS, 9).unwrap();
        // grid over product Bloch-sphere inputs and a family of reference-entangled inputs
        let mut grid_best: f64 = 0.0;
        let n = 24;
        for i in 0..=n {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            for j in 0..n {
                let ph = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let v = vec![C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), ph)];
                let psi = tensor_vec(&basis_vector(2, 0), &v);
                grid_best = grid_best.max(trace_norm(&channel_difference_output(&id, &dep, &psi, 2).unwrap()));
                // cos(θ/2)|00⟩ + e^{iφ} sin(θ/2)|11⟩
                let mut ent = vec![ZERO; 4];
                ent[0] = C64::new((theta / 2.0).cos(), 0.0);
                ent[3] = C64::from_polar((theta / 2.0).sin(), ph);
                grid_best = grid_best.max(trace_norm(&channel_difference_output(&id, &dep, &ent, 2).unwrap()));
            }
        }
        assert!((est.lower_bound - grid_best).abs() < 1e-6, "{} vs {}", est.lower_bound, grid_best);
        assert!((est.lower_bound - 1.5).abs() < 1e-6);
    }

    #[test]
    fn helstrom_attains_half_trace_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a = random_density(3, &mut rng);
            let b = random_density(3, &mut rng);
            let m = Channel::measurement(&helstrom_effect(&a, &b).unwrap()).unwrap();
            let adv = advantage(&m, &DensityMatrix::basis(1, 0), &a, &b).unwrap();
            assert!((adv - 0.5 * trace_distance(&a, &b).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn advantage_trivial_cases() {
        let z = DensityMatrix::basis(2, 0);
        let o = DensityMatrix::basis(2, 1);
        let m = Channel::measurement(z.op()).unwrap();
        let none = DensityMatrix::basis(1, 0);
        assert!(advantage(&m, &none, &z, &z).unwrap() < 1e-15);
        assert!((advantage(&m, &none, &z, &o).unwrap() - 1.0).abs() < 1e-15);
        let adv = DensityMatrix::maximally_mixed(2);
        let m2 = Channel::measurement(&tensor(z.op(), &Operator::identity(2))).unwrap();
        assert!((advantage(&m2, &adv, &z, &o).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_invariance_of_trace_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = crate::linalg::random::random_matrix(4, 4, &mut rng);
        let u = haar_unitary(4, &mut rng);
        let v = haar_unitary(4, &mut rng);
        assert!((trace_norm(&u.matmul(&x).matmul(&v)) - trace_norm(&x)).abs() < 1e-9);
    }
}
