//! Quantum channels, circuits and problem-instance generators.

pub mod circuit;
pub mod instances;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::decomp::herm_eig;
use crate::linalg::operator::{tensor, Operator, C64, ONE, ZERO};
use crate::linalg::state::{DensityMatrix, SubsystemShape};
use crate::linalg::tol;

pub use circuit::{gates, Circuit, Gate};
pub use instances::{gen_pi, gen_qcd, gen_qsd, PiInstance, PromiseKind, QcdInstance, QsdInstance};

/// How a channel is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ChannelForm {
    Kraus { operators: Vec<Operator> },
    /// `unitary` acts on input ⊗ ancilla (ancilla prepared in |0⟩); the result is
    /// read against `shape` and the factors in `discard` are traced out.
    Stinespring { unitary: Operator, input_dim: usize, ancilla_dim: usize, shape: SubsystemShape, discard: Vec<usize> },
}

/// Completely positive trace-preserving map. The Kraus operators are always
/// materialized, whichever form the channel was specified in.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    form: ChannelForm,
    kraus: Vec<Operator>,
    input_dim: usize,
    output_dim: usize,
}

impl Channel {
    pub fn from_kraus(operators: Vec<Operator>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        let (out, inp) = (first.rows(), first.cols());
        let mut sum = Operator::zeros(inp, inp);
        for k in &operators {
            if k.rows() != out || k.cols() != inp {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            sum = &sum + &k.adjoint().matmul(k);
        }
        let dev = sum.max_abs_diff(&Operator::identity(inp));
        if dev > tol::DEFAULT {
            return Err(Error::InvalidParameter(format!("Kraus operators incomplete (deviation {dev:.3e})")));
        }
        let kraus = operators.clone();
        Ok(Channel { form: ChannelForm::Kraus { operators }, kraus, input_dim: inp, output_dim: out })
    }

    pub fn stinespring(
        unitary: Operator,
        input_dim: usize,
        ancilla_dim: usize,
        shape: SubsystemShape,
        discard: Vec<usize>,
    ) -> Result<Self> {
        let total = input_dim * ancilla_dim;
        if !unitary.is_square() || unitary.rows() != total || shape.dim() != total {
            return Err(Error::DimensionMismatch(format!(
                "unitary {}x{} against input {input_dim} x ancilla {ancilla_dim} and shape {:?}",
                unitary.rows(),
                unitary.cols(),
                shape.factors()
            )));
        }
        let dev = unitary.unitary_deviation();
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let mut sorted = discard.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != discard.len() || sorted.iter().any(|&k| k >= shape.len()) {
            return Err(Error::InvalidParameter(format!("bad discard set {discard:?}")));
        }
        let keep: Vec<usize> = (0..shape.len()).filter(|k| !sorted.contains(k)).collect();
        let out_dim = shape.sub_dim(&keep);
        let env_dim = shape.sub_dim(&sorted);
        // isometry V = U (I ⊗ |0⟩): the columns of U at ancilla index 0
        let mut kraus = vec![Operator::zeros(out_dim, input_dim); env_dim];
        for r in 0..total {
            let digits = shape.digits(r);
            let o = keep.iter().fold(0, |acc, &k| acc * shape.factors()[k] + digits[k]);
            let e = sorted.iter().fold(0, |acc, &k| acc * shape.factors()[k] + digits[k]);
            for i in 0..input_dim {
                kraus[e][(o, i)] = unitary[(r, i * ancilla_dim)];
            }
        }
        kraus.retain(|k| k.max_abs() > 0.0);
        if kraus.is_empty() {
            kraus.push(Operator::zeros(out_dim, input_dim));
        }
        Ok(Channel {
            form: ChannelForm::Stinespring { unitary, input_dim, ancilla_dim, shape, discard },
            kraus,
            input_dim,
            output_dim: out_dim,
        })
    }

    pub fn from_form(form: ChannelForm) -> Result<Self> {
        match form {
            ChannelForm::Kraus { operators } => Self::from_kraus(operators),
            ChannelForm::Stinespring { unitary, input_dim, ancilla_dim, shape, discard } => {
                Self::stinespring(unitary, input_dim, ancilla_dim, shape, discard)
            }
        }
    }

    /// Conjugation by a unitary.
    pub fn unitary(u: &Operator) -> Result<Self> {
        let dev = u.unitary_deviation();
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Self::from_kraus(vec![u.clone()])
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![Operator::identity(d)]).expect("identity is a channel")
    }

    /// ρ ↦ tr(ρ) τ.
    pub fn replacement(d_in: usize, tau: &DensityMatrix) -> Self {
        let eig = herm_eig(tau.op()).expect("density matrices are Hermitian");
        let mut ops = Vec::new();
        for (k, &l) in eig.values.iter().enumerate() {
            if l <= tol::RANK {
                continue;
            }
            let v = eig.vector(k);
            for j in 0..d_in {
                let mut e = vec![ZERO; d_in];
                e[j] = ONE;
                ops.push(Operator::outer(&v, &e).scale_real(l.sqrt()));
            }
        }
        Self::from_kraus(ops).expect("replacement channel is trace preserving")
    }

    /// ρ ↦ (1 − p) ρ + p tr(ρ) I/d.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing probability {p} outside [0, 1]")));
        }
        let mut ops = Vec::new();
        if p < 1.0 {
            ops.push(Operator::identity(d).scale_real((1.0 - p).sqrt()));
        }
        if p > 0.0 {
            let w = (p / d as f64).sqrt();
            for i in 0..d {
                for j in 0..d {
                    let mut k = Operator::zeros(d, d);
                    k[(i, j)] = C64::new(w, 0.0);
                    ops.push(k);
                }
            }
        }
        Self::from_kraus(ops)
    }

    /// Two-outcome measurement with acceptance effect `effect`, writing the
    /// outcome to a qubit (|1⟩ = accept).
    pub fn measurement(effect: &Operator) -> Result<Self> {
        if !effect.is_square() {
            return Err(Error::DimensionMismatch("effect must be square".into()));
        }
        let d = effect.rows();
        let eig = herm_eig(effect)?;
        if eig.values[0] > 1.0 + tol::DEFAULT || *eig.values.last().unwrap() < -tol::DEFAULT {
            return Err(Error::InvalidParameter("effect must satisfy 0 ≤ E ≤ I".into()));
        }
        let sqrt_e = eig.map(|l| l.clamp(0.0, 1.0).sqrt());
        let sqrt_f = eig.map(|l| (1.0 - l).clamp(0.0, 1.0).sqrt());
        let mut ops = Vec::with_capacity(2 * d);
        for (bit, root) in [(1usize, &sqrt_e), (0usize, &sqrt_f)] {
            for j in 0..d {
                let k = Operator::from_fn(2, d, |r, c| if r == bit { root[(j, c)] } else { ZERO });
                ops.push(k);
            }
        }
        Self::from_kraus(ops)
    }

    pub fn form(&self) -> &ChannelForm {
        &self.form
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn check_input(&self, rho: &Operator, reference: usize) -> Result<()> {
        if !rho.is_square() || rho.rows() != reference * self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel input {} (reference {reference}) against {}x{} operator",
                self.input_dim,
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(())
    }

    /// Applies the channel to an arbitrary operator on the input space.
    pub fn apply_op(&self, x: &Operator) -> Result<Operator> {
        self.apply_with_reference(x, 1)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_op(rho.op())?;
        DensityMatrix::with_tolerance(out, rho.tolerance().max(tol::DEFAULT))
    }

    /// (id_R ⊗ Φ)(x) for x on R ⊗ input, reference first.
    pub fn apply_with_reference(&self, x: &Operator, reference: usize) -> Result<Operator> {
        self.check_input(x, reference)?;
        let (di, dout) = (self.input_dim, self.output_dim);
        let mut out = Operator::zeros(reference * dout, reference * dout);
        let mut block = Operator::zeros(di, di);
        for r in 0..reference {
            for s in 0..reference {
                for i in 0..di {
                    for j in 0..di {
                        block[(i, j)] = x[(r * di + i, s * di + j)];
                    }
                }
                if block.max_abs() == 0.0 {
                    continue;
                }
                for k in &self.kraus {
                    let y = k.matmul(&block).matmul(&k.adjoint());
                    for i in 0..dout {
                        for j in 0..dout {
                            out[(r * dout + i, s * dout + j)] += y[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// (id_R ⊗ Φ†)(h) for h on R ⊗ output.
    pub fn adjoint_with_reference(&self, h: &Operator, reference: usize) -> Result<Operator> {
        let (di, dout) = (self.input_dim, self.output_dim);
        if !h.is_square() || h.rows() != reference * dout {
            return Err(Error::DimensionMismatch("adjoint channel input has wrong dimension".into()));
        }
        let mut out = Operator::zeros(reference * di, reference * di);
        let mut block = Operator::zeros(dout, dout);
        for r in 0..reference {
            for s in 0..reference {
                for i in 0..dout {
                    for j in 0..dout {
                        block[(i, j)] = h[(r * dout + i, s * dout + j)];
                    }
                }
                for k in &self.kraus {
                    let y = k.adjoint().matmul(&block).matmul(k);
                    for i in 0..di {
                        for j in 0..di {
                            out[(r * di + i, s * di + j)] += y[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    pub fn choi(&self) -> Operator {
        let d = self.input_dim;
        let omega = Operator::from_fn(d * d, d * d, |r, c| {
            if r % (d + 1) == 0 && c % (d + 1) == 0 {
                ONE
            } else {
                ZERO
            }
        });
        self.apply_with_reference(&omega, d).expect("dimensions match by construction")
    }

    /// First `self`, then `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.output_dim != next.input_dim {
            return Err(Error::DimensionMismatch("channel composition dimensions differ".into()));
        }
        let mut ops = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                let k = b.matmul(a);
                if k.max_abs() > 0.0 {
                    ops.push(k);
                }
            }
        }
        Channel::from_kraus(ops)
    }

    /// Φ ⊗ Ψ.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let mut ops = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                ops.push(tensor(a, b));
            }
        }
        Channel::from_kraus(ops)
    }

    /// Probability of outcome 1 for a channel with a qubit output.
    pub fn accept_probability(&self, rho: &Operator) -> Result<f64> {
        if self.output_dim != 2 {
            return Err(Error::DimensionMismatch("acceptance needs a one-qubit output".into()));
        }
        Ok(self.apply_op(rho)?[(1, 1)].re.clamp(0.0, 1.0))
    }

    /// Acceptance operator M with Pr[accept] = tr(M ρ), for one-qubit outputs.
    pub fn acceptance_operator(&self) -> Result<Operator> {
        if self.output_dim != 2 {
            return Err(Error::DimensionMismatch("acceptance needs a one-qubit output".into()));
        }
        let mut p1 = Operator::zeros(2, 2);
        p1[(1, 1)] = ONE;
        self.adjoint_with_reference(&p1, 1)
    }
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.form.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let form = ChannelForm::deserialize(deserializer)?;
        Channel::from_form(form).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::decomp::herm_eig;
    use crate::linalg::random::{haar_unitary, random_density};
    use crate::linalg::state::partial_trace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_choi() {
        let c = Channel::identity(2).choi();
        let mut expected = Operator::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(i, j)] = ONE;
        }
        assert!(c.max_abs_diff(&expected) < 1e-15);
        assert!((c.trace().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fully_depolarizing_choi() {
        let c = Channel::depolarizing(2, 1.0).unwrap().choi();
        // term by term: Φ(|i⟩⟨j|) = δ_ij I/2
        let mut expected = Operator::zeros(4, 4);
        for i in 0..2 {
            for a in 0..2 {
                expected[(i * 2 + a, i * 2 + a)] = C64::new(0.5, 0.0);
            }
        }
        assert!(c.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn unitary_mixing_preserves_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = Channel::depolarizing(2, 0.3).unwrap();
        let ks = ch.kraus();
        let n = ks.len();
        let w = haar_unitary(n, &mut rng);
        let mixed: Vec<Operator> = (0..n)
            .map(|a| {
                let mut acc = Operator::zeros(2, 2);
                for (b, k) in ks.iter().enumerate() {
                    acc = &acc + &k.scale(w[(a, b)]);
                }
                acc
            })
            .collect();
        let other = Channel::from_kraus(mixed).unwrap();
        assert!(other.choi().max_abs_diff(&ch.choi()) < 1e-10);
    }

    #[test]
    fn choi_is_psd_with_identity_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = haar_unitary(6, &mut rng);
        let ch = Channel::stinespring(u, 3, 2, SubsystemShape::new(vec![2, 3]).unwrap(), vec![0]).unwrap();
        assert_eq!(ch.output_dim(), 3);
        let c = ch.choi();
        assert!(*herm_eig(&c).unwrap().values.last().unwrap() > -1e-12);
        let marginal = partial_trace(&c, &SubsystemShape::new(vec![3, 3]).unwrap(), &[0]).unwrap();
        assert!(marginal.max_abs_diff(&Operator::identity(3)) < 1e-12);
    }

    #[test]
    fn replacement_outputs_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tau = random_density(2, &mut rng);
        let rho = random_density(3, &mut rng);
        let out = Channel::replacement(3, &tau).apply(&rho).unwrap();
        assert!(out.op().max_abs_diff(tau.op()) < 1e-12);
    }

    #[test]
    fn measurement_acceptance_operator() {
        let e = Operator::diag_real(&[0.2, 0.7]);
        let m = Channel::measurement(&e).unwrap();
        assert!(m.acceptance_operator().unwrap().max_abs_diff(&e) < 1e-12);
        let rho = DensityMatrix::maximally_mixed(2);
        assert!((m.accept_probability(rho.op()).unwrap() - 0.45).abs() < 1e-12);
    }

    #[test]
    fn adjoint_is_dual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = Channel::depolarizing(2, 0.4).unwrap().then(&Channel::unitary(&haar_unitary(2, &mut rng)).unwrap()).unwrap();
        let rho = random_density(4, &mut rng);
        let h = crate::linalg::random::random_hermitian(4, &mut rng);
        let lhs = h.trace_product(&ch.apply_with_reference(rho.op(), 2).unwrap());
        let rhs = ch.adjoint_with_reference(&h, 2).unwrap().trace_product(rho.op());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        assert!(Channel::from_kraus(vec![Operator::diag_real(&[1.0, 0.5])]).is_err());
        assert!(Channel::depolarizing(2, 1.5).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let ch = Channel::depolarizing(2, 0.25).unwrap();
        let text = serde_json::to_string(&ch).unwrap();
        let back: Channel = serde_json::from_str(&text).unwrap();
        assert!(back.choi().max_abs_diff(&ch.choi()) < 1e-15);
    }
}
