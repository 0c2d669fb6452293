//! Seeded random matrices and states.

use rand::Rng;
use rand_distr::StandardNormal;

use super::decomp::gram_schmidt_step;
use super::operator::{normalize, Operator, C64};
use super::state::{DensityMatrix, PureState};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    Operator::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    random_matrix(d, d, rng).hermitian_part()
}

/// Haar-distributed unitary: Gram–Schmidt on the columns of a complex Ginibre
/// matrix. Gram–Schmidt yields a triangular factor with positive diagonal, which
/// is the phase correction that makes the result exactly Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    loop {
        let g = random_matrix(d, d, rng);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(d);
        for j in 0..d {
            match gram_schmidt_step(&basis, g.col(j)) {
                Some(q) => basis.push(q),
                None => break,
            }
        }
        if basis.len() == d {
            return Operator::from_fn(d, d, |i, j| basis[j][i]);
        }
    }
}

pub fn random_pure_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        if normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    PureState::new(random_pure_vec(d, rng)).expect("normalized")
}

/// Random density matrix of the given rank (induced measure from a Haar
/// purification).
pub fn random_density_rank<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = random_matrix(d, rank.max(1), rng);
    let rho = g.matmul(&g.adjoint());
    let t = rho.trace().re;
    DensityMatrix::new(rho.scale_real(1.0 / t)).expect("valid by construction")
}

/// Full-rank random density matrix (Hilbert–Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    random_density_rank(d, d, rng)
}

/// Independent generator for sub-task `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
