//! Search over state pairs with equal marginals on a constrained register.
//!
//! Pairs (ρ₀, ρ₁) on K ⊗ L with tr_L ρ₀ = tr_L ρ₁ are parameterized as
//! ρ₀ = tr_R |ω⟩⟨ω| and ρ₁ = tr_R (I_K ⊗ V)|ω⟩⟨ω|(I_K ⊗ V)† with |ω⟩ on
//! K ⊗ L ⊗ R and V unitary on L ⊗ R, so the constraint holds exactly for
//! every point of the search. The objective ½(tr M₀ρ₀ + tr M₁ρ₁) is raised by
//! alternating power steps in ω with linearized (polar) steps in V; both steps
//! are monotone for positive semidefinite M_b.

use crate::error::{Error, Result};
use crate::linalg::decomp::polar_unitary;
use crate::linalg::operator::{inner, normalize, Operator, C64};
use crate::linalg::random::{haar_unitary, random_pure_vec, stream_rng};

const OUTER_ITERS: usize = 400;
const POWER_STEPS: usize = 8;
const STALL_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SteeringProblem {
    pub m0: Operator,
    pub m1: Operator,
    pub dk: usize,
    pub dl: usize,
    pub dr: usize,
}

#[derive(Clone, Debug)]
pub struct SteeringSolution {
    pub value: f64,
    pub p0: f64,
    pub p1: f64,
    /// |ω⟩ on K ⊗ L ⊗ R.
    pub omega: Vec<C64>,
    /// Unitary on L ⊗ R producing the second state.
    pub v: Operator,
}

impl SteeringProblem {
    pub fn new(m0: Operator, m1: Operator, dk: usize, dl: usize, dr: usize) -> Result<Self> {
        let n = dk * dl;
        for m in [&m0, &m1] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!("operator {}x{} on K ⊗ L of dimension {n}", m.rows(), m.cols())));
            }
        }
        if dr == 0 {
            return Err(Error::InvalidParameter("reference dimension must be positive".into()));
        }
        Ok(SteeringProblem { m0, m1, dk, dl, dr })
    }

    /// Smallest reference making L ⊗ R at least as large as K.
    pub fn default_reference(dk: usize, dl: usize) -> usize {
        dk.div_ceil(dl).max(1)
    }

    /// (M ⊗ I_R) ω
    fn apply_m(&self, m: &Operator, omega: &[C64]) -> Vec<C64> {
        let n = self.dk * self.dl;
        let om = Operator::from_vec(n, self.dr, omega.to_vec()).expect("shape");
        m.matmul(&om).into_data()
    }

    /// (I_K ⊗ X) ω for X on L ⊗ R
    fn apply_lr(&self, x: &Operator, omega: &[C64]) -> Vec<C64> {
        let lr = self.dl * self.dr;
        let w = Operator::from_vec(self.dk, lr, omega.to_vec()).expect("shape");
        w.matmul(&x.transpose()).into_data()
    }

    pub fn evaluate(&self, omega: &[C64], v: &Operator) -> (f64, f64) {
        let p0 = inner(omega, &self.apply_m(&self.m0, omega)).re;
        let vo = self.apply_lr(v, omega);
        let p1 = inner(&vo, &self.apply_m(&self.m1, &vo)).re;
        (p0, p1)
    }

    /// ½(M₀ ⊗ I + (I ⊗ V)†(M₁ ⊗ I)(I ⊗ V)) ω
    fn apply_objective(&self, omega: &[C64], v: &Operator) -> Vec<C64> {
        let a = self.apply_m(&self.m0, omega);
        let vo = self.apply_lr(v, omega);
        let b = self.apply_lr(&v.adjoint(), &self.apply_m(&self.m1, &vo));
        a.iter().zip(&b).map(|(x, y)| (x + y) * 0.5).collect()
    }

    /// Best unitary for the linearization of the second term at `v`.
    fn polar_step(&self, omega: &[C64], v: &Operator) -> Operator {
        let lr = self.dl * self.dr;
        let y = self.apply_m(&self.m1, &self.apply_lr(v, omega));
        let ymat = Operator::from_vec(self.dk, lr, y).expect("shape");
        let wmat = Operator::from_vec(self.dk, lr, omega.to_vec()).expect("shape");
        let c = ymat.adjoint().matmul(&wmat);
        polar_unitary(&c).conj()
    }

    fn run(&self, mut omega: Vec<C64>, mut v: Operator) -> SteeringSolution {
        let (mut p0, mut p1) = self.evaluate(&omega, &v);
        let mut value = 0.5 * (p0 + p1);
        for _ in 0..OUTER_ITERS {
            let start = value;
            for _ in 0..POWER_STEPS {
                let mut next = self.apply_objective(&omega, &v);
                if normalize(&mut next) == 0.0 {
                    break;
                }
                let (a, b) = self.evaluate(&next, &v);
                if 0.5 * (a + b) + 1e-15 < value {
                    break;
                }
                omega = next;
                (p0, p1) = (a, b);
                value = 0.5 * (a + b);
            }
            let cand = self.polar_step(&omega, &v);
            let (a, b) = self.evaluate(&omega, &cand);
            if 0.5 * (a + b) >= value {
                v = cand;
                (p0, p1) = (a, b);
                value = 0.5 * (a + b);
            }
            if value - start < STALL_TOL {
                break;
            }
        }
        SteeringSolution { value, p0, p1, omega, v }
    }

    /// Multistart search; restart 0 starts from V = I.
    pub fn search(&self, restarts: usize, seed: u64) -> SteeringSolution {
        let n = self.dk * self.dl * self.dr;
        let lr = self.dl * self.dr;
        let mut best: Option<SteeringSolution> = None;
        for r in 0..restarts.max(1) {
            let mut rng = stream_rng(seed, r as u64);
            let omega = random_pure_vec(n, &mut rng);
            let v = if r == 0 { Operator::identity(lr) } else { haar_unitary(lr, &mut rng) };
            let sol = self.run(omega, v);
            if best.as_ref().is_none_or(|b| sol.value > b.value) {
                best = Some(sol);
            }
        }
        best.expect("at least one restart")
    }

    /// ρ₀ and ρ₁ on K ⊗ L.
    pub fn induced_states(&self, sol: &SteeringSolution) -> (Operator, Operator) {
        let n = self.dk * self.dl;
        let reduce = |w: &[C64]| {
            let m = Operator::from_vec(n, self.dr, w.to_vec()).expect("shape");
            m.matmul(&m.adjoint())
        };
        (reduce(&sol.omega), reduce(&self.apply_lr(&sol.v, &sol.omega)))
    }
}
