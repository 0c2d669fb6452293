//! Generators for QSD, QCD and Π problem instances.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::circuit::{gates, Circuit};
use super::Channel;
use crate::error::{Error, Result};
use crate::linalg::decomp::herm_eig;
use crate::linalg::operator::{tensor, Operator, C64, ZERO};
use crate::linalg::random::{haar_unitary, random_density_rank, stream_rng};
use crate::linalg::state::{partial_trace, reduced_state, DensityMatrix, PureState, SubsystemShape};
use crate::linalg::tol;
use crate::norms::{diamond_dim_bound, diamond_lower, trace_distance};

/// Tolerance parameter attached to generated instances.
pub const DEFAULT_MU: f64 = 1e-6;
/// Restarts of the adversary search that certifies Π N-instances.
pub const PI_CERTIFY_RESTARTS: usize = 64;
const QCD_VERIFY_RESTARTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromiseKind {
    #[serde(rename = "Y")]
    Yes,
    #[serde(rename = "N")]
    No,
    /// Hand-built instance outside both promise sets.
    #[serde(rename = "unpromised")]
    Unpromised,
}

impl std::str::FromStr for PromiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Y" | "y" | "yes" => Ok(PromiseKind::Yes),
            "N" | "n" | "no" => Ok(PromiseKind::No),
            _ => Err(Error::InvalidParameter(format!("unknown instance kind {s:?}"))),
        }
    }
}

fn random_pair<R: Rng + ?Sized>(wires: &[usize], rng: &mut R) -> [usize; 2] {
    let a = *wires.choose(rng).expect("non-empty");
    loop {
        let b = *wires.choose(rng).expect("non-empty");
        if b != a {
            return [a, b];
        }
    }
}

/// Random two-qubit gates on the listed wires (nothing if fewer than two).
fn scramble<R: Rng + ?Sized>(c: &mut Circuit, wires: &[usize], count: usize, rng: &mut R) {
    if wires.len() < 2 {
        return;
    }
    for _ in 0..count {
        let pair = random_pair(wires, rng);
        c.push(haar_unitary(4, rng), &pair);
    }
}

/// Random gates on all listed wires, single-qubit gates included.
fn random_gates<R: Rng + ?Sized>(c: &mut Circuit, wires: &[usize], count: usize, rng: &mut R) {
    for _ in 0..count {
        if wires.len() >= 2 && rng.random_bool(0.6) {
            let pair = random_pair(wires, rng);
            c.push(haar_unitary(4, rng), &pair);
        } else {
            let w = *wires.choose(rng).expect("non-empty");
            c.push(haar_unitary(2, rng), &[w]);
        }
    }
}

/// Two unitary circuits run on |0…0⟩; the split lists the O wires, the other
/// wires are garbage G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsdInstance {
    pub c0: Circuit,
    pub c1: Circuit,
    pub mu: f64,
    pub kind: PromiseKind,
}

impl QsdInstance {
    /// Builds an instance and checks its promise by direct computation.
    pub fn new(c0: Circuit, c1: Circuit, mu: f64, kind: PromiseKind) -> Result<Self> {
        for c in [&c0, &c1] {
            c.validate()?;
            if !c.discards.is_empty() {
                return Err(Error::InvalidParameter("QSD circuits must be unitary".into()));
            }
        }
        if c0.wires != c1.wires || c0.split != c1.split {
            return Err(Error::DimensionMismatch("QSD circuits differ in wires or split".into()));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mu = {mu} outside [0, 1)")));
        }
        let inst = QsdInstance { c0, c1, mu, kind };
        let dist = inst.output_distance()?;
        match kind {
            PromiseKind::Yes if dist < 2.0 - mu => {
                Err(Error::VerificationFailed(format!("Y instance has trace distance {dist}")))
            }
            PromiseKind::No if dist > mu => Err(Error::VerificationFailed(format!("N instance has trace distance {dist}"))),
            _ => Ok(inst),
        }
    }

    /// The instance C₀ = empty, C₁ = Ry rotation: outputs |0⟩ and cos θ|0⟩ + sin θ|1⟩.
    pub fn rotation_pair(theta: f64) -> Result<Self> {
        let c0 = Circuit::new(1, 0);
        let c1 = Circuit::new(1, 0).with_gate(gates::ry(theta), &[0]);
        QsdInstance::new(c0, c1, DEFAULT_MU, PromiseKind::Unpromised)
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        QsdInstance::new(self.c0, self.c1, mu, self.kind)
    }

    pub fn circuit(&self, b: u8) -> &Circuit {
        if b == 0 {
            &self.c0
        } else {
            &self.c1
        }
    }

    pub fn o_wires(&self) -> Vec<usize> {
        let mut w = self.c0.split.clone();
        w.sort_unstable();
        w
    }

    pub fn g_wires(&self) -> Vec<usize> {
        (0..self.c0.wires).filter(|w| !self.c0.split.contains(w)).collect()
    }

    pub fn o_dim(&self) -> usize {
        1 << self.c0.split.len()
    }

    pub fn g_dim(&self) -> usize {
        1 << (self.c0.wires - self.c0.split.len())
    }

    /// |φ_{C_b}⟩ on all wires, reordered so that O precedes G.
    pub fn full_state(&self, b: u8) -> Result<PureState> {
        let out = self.circuit(b).run_from_zero()?;
        let order: Vec<usize> = self.o_wires().into_iter().chain(self.g_wires()).collect();
        let v = crate::linalg::state::permute_vector(out.amplitudes(), &self.c0.shape(), &order)?;
        PureState::new(v)
    }

    /// ρ^{C_b} = tr_G |φ_{C_b}⟩⟨φ_{C_b}|.
    pub fn output_state(&self, b: u8) -> Result<DensityMatrix> {
        let full = self.full_state(b)?;
        let shape = SubsystemShape::new(vec![self.o_dim(), self.g_dim()])?;
        DensityMatrix::new(reduced_state(full.amplitudes(), &shape, &[0])?.hermitian_part())
    }

    pub fn output_distance(&self) -> Result<f64> {
        trace_distance(&self.output_state(0)?, &self.output_state(1)?)
    }

    /// ½ + √mu/2 for Y instances; the trivial bound 1 otherwise.
    pub fn analytic_bound(&self) -> f64 {
        match self.kind {
            PromiseKind::Yes => 0.5 + self.mu.sqrt() / 2.0,
            _ => 1.0,
        }
    }
}

/// Builds a QSD instance on `qubits` O wires, optionally with one garbage wire
/// entangled with the last O wire.
pub fn gen_qsd(kind: PromiseKind, qubits: usize, entangle_garbage: bool, seed: u64) -> Result<QsdInstance> {
    if qubits == 0 || qubits > 5 {
        return Err(Error::InvalidParameter(format!("qubits = {qubits} outside 1..=5")));
    }
    if entangle_garbage && qubits < 2 && kind == PromiseKind::Yes {
        return Err(Error::InvalidParameter("entangled garbage on a Y instance needs at least 2 O qubits".into()));
    }
    let mut rng = stream_rng(seed, 0x95d);
    let wires = qubits + usize::from(entangle_garbage);
    let o: Vec<usize> = (0..qubits).collect();
    let mut prep = Circuit::new(wires, 0);
    prep.split = o.clone();
    if entangle_garbage {
        let g = qubits;
        prep.push(gates::hadamard(), &[g]);
        prep.push(gates::cnot(), &[g, qubits - 1]);
    }
    let (c0, c1) = match kind {
        PromiseKind::Yes => {
            let mut c0 = prep.clone();
            let mut c1 = Circuit { gates: Vec::new(), ..prep.clone() };
            c1.push(gates::pauli_x(), &[0]);
            c1.gates.extend(prep.gates.iter().cloned());
            let mut s = Circuit::new(wires, 0);
            scramble(&mut s, &o, 2 * qubits, &mut rng);
            c0.gates.extend(s.gates.iter().cloned());
            c1.gates.extend(s.gates);
            (c0, c1)
        }
        PromiseKind::No => {
            let mut c = prep.clone();
            let all: Vec<usize> = (0..wires).collect();
            random_gates(&mut c, &all, 3 * wires, &mut rng);
            (c.clone(), c)
        }
        PromiseKind::Unpromised => {
            return Err(Error::InvalidParameter("generators only build Y or N instances".into()));
        }
    };
    let inst = QsdInstance::new(c0, c1, DEFAULT_MU, kind)?;
    let dist = inst.output_distance()?;
    let ok = match kind {
        PromiseKind::Yes => dist >= 2.0 - 1e-6,
        _ => dist <= 1e-10,
    };
    if !ok {
        return Err(Error::VerificationFailed(format!("generated {kind:?} instance has trace distance {dist}")));
    }
    Ok(inst)
}

/// Two mixed-state circuits; input wires come first, ancillas last, and the
/// discarded wires form the garbage G of the commitment scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcdInstance {
    pub c0: Circuit,
    pub c1: Circuit,
    pub mu: f64,
    pub kind: PromiseKind,
}

impl QcdInstance {
    pub fn new(c0: Circuit, c1: Circuit, mu: f64, kind: PromiseKind) -> Result<Self> {
        c0.validate()?;
        c1.validate()?;
        if c0.wires != c1.wires || c0.ancillas != c1.ancillas || c0.discards != c1.discards {
            return Err(Error::DimensionMismatch("QCD circuits differ in wires, ancillas or discards".into()));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mu = {mu} outside [0, 1)")));
        }
        let inst = QcdInstance { c0, c1, mu, kind };
        let (q0, q1) = (inst.channel(0)?, inst.channel(1)?);
        match kind {
            PromiseKind::Yes => {
                let est = diamond_lower(&q0, &q1, QCD_VERIFY_RESTARTS, 0)?;
                if est.lower_bound < 2.0 - mu {
                    return Err(Error::VerificationFailed(format!("Y instance diamond estimate {}", est.lower_bound)));
                }
            }
            PromiseKind::No => {
                let bound = diamond_dim_bound(&q0, &q1)?;
                if bound > mu {
                    return Err(Error::VerificationFailed(format!("N instance dimension bound {bound}")));
                }
            }
            PromiseKind::Unpromised => {}
        }
        Ok(inst)
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        QcdInstance::new(self.c0, self.c1, mu, self.kind)
    }

    pub fn circuit(&self, b: u8) -> &Circuit {
        if b == 0 {
            &self.c0
        } else {
            &self.c1
        }
    }

    pub fn channel(&self, b: u8) -> Result<Channel> {
        self.circuit(b).to_channel()
    }

    pub fn input_dim(&self) -> usize {
        self.c0.input_dim()
    }

    /// Dimension of the surviving output wires O.
    pub fn o_dim(&self) -> usize {
        1 << (self.c0.wires - self.c0.discards.len())
    }

    /// Dimension of the discarded wires G.
    pub fn g_dim(&self) -> usize {
        1 << self.c0.discards.len()
    }

    /// The isometry U_b (I ⊗ |0⟩) with output rows ordered O ⊗ G.
    pub fn isometry(&self, b: u8) -> Result<Operator> {
        let c = self.circuit(b);
        let u = c.expanded_unitary()?;
        let order: Vec<usize> = c.surviving().into_iter().chain(c.discards.iter().copied()).collect();
        let anc = 1usize << c.ancillas;
        let mut out = Operator::zeros(u.rows(), c.input_dim());
        for i in 0..c.input_dim() {
            let col = crate::linalg::state::permute_vector(&u.col(i * anc), &c.shape(), &order)?;
            out.set_col(i, &col);
        }
        Ok(out)
    }
}

/// Builds a QCD instance on `qubits` input wires. Y instances are identity vs
/// Z (up to a common scramble) or, with `garbage`, dephasing vs dephasing after X.
pub fn gen_qcd(kind: PromiseKind, qubits: usize, garbage: bool, seed: u64) -> Result<QcdInstance> {
    if qubits == 0 || qubits > 3 {
        return Err(Error::InvalidParameter(format!("qubits = {qubits} outside 1..=3")));
    }
    let mut rng = stream_rng(seed, 0x9cd);
    let wires = qubits + usize::from(garbage);
    let inputs: Vec<usize> = (0..qubits).collect();
    let mut base = Circuit::new(wires, usize::from(garbage));
    if garbage {
        base.discards = vec![qubits];
        base.split = inputs.clone();
    }
    let (c0, c1) = match kind {
        PromiseKind::Yes => {
            let mut s = Circuit::new(wires, 0);
            scramble(&mut s, &inputs, 2 * qubits, &mut rng);
            let mut c0 = base.clone();
            let mut c1 = base.clone();
            if garbage {
                c1.push(gates::pauli_x(), &[0]);
                c0.push(gates::cnot(), &[0, qubits]);
                c1.push(gates::cnot(), &[0, qubits]);
            } else {
                c1.push(gates::pauli_z(), &[0]);
            }
            c0.gates.extend(s.gates.iter().cloned());
            c1.gates.extend(s.gates);
            (c0, c1)
        }
        PromiseKind::No => {
            let mut c = base.clone();
            let all: Vec<usize> = (0..wires).collect();
            random_gates(&mut c, &all, 3 * wires, &mut rng);
            (c.clone(), c)
        }
        PromiseKind::Unpromised => {
            return Err(Error::InvalidParameter("generators only build Y or N instances".into()));
        }
    };
    let inst = QcdInstance::new(c0, c1, DEFAULT_MU, kind)?;
    if kind == PromiseKind::Yes {
        let (q0, q1) = (inst.channel(0)?, inst.channel(1)?);
        let est = diamond_lower(&q0, &q1, QCD_VERIFY_RESTARTS, seed)?;
        if est.lower_bound < 2.0 - 1e-6 {
            return Err(Error::VerificationFailed(format!("Y instance diamond estimate {}", est.lower_bound)));
        }
    }
    Ok(inst)
}

/// Result of the adversary search that certifies a Π N-instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiCertificate {
    pub searched_value: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// Two one-bit measurements on X ⊗ Y, with honest witnesses for Y instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiInstance {
    pub dx: usize,
    pub dy: usize,
    pub q0: Channel,
    pub q1: Channel,
    pub rho0: Option<DensityMatrix>,
    pub rho1: Option<DensityMatrix>,
    pub mu: f64,
    pub kind: PromiseKind,
    /// Present on N instances: the searched cheating value (a sound but not
    /// exhaustive check).
    pub certificate: Option<PiCertificate>,
}

impl PiInstance {
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::new(vec![self.dx, self.dy]).expect("positive dimensions")
    }

    pub fn measurement(&self, b: u8) -> &Channel {
        if b == 0 {
            &self.q0
        } else {
            &self.q1
        }
    }

    pub fn witness(&self, b: u8) -> Option<&DensityMatrix> {
        if b == 0 {
            self.rho0.as_ref()
        } else {
            self.rho1.as_ref()
        }
    }

    /// Y instance from two witnesses: q_b projects onto the support of ρ^b.
    pub fn from_witnesses(rho0: DensityMatrix, rho1: DensityMatrix, dx: usize, dy: usize, mu: f64) -> Result<Self> {
        let q0 = Channel::measurement(&support_projector(&rho0)?)?;
        let q1 = Channel::measurement(&support_projector(&rho1)?)?;
        let inst = PiInstance {
            dx,
            dy,
            q0,
            q1,
            rho0: Some(rho0),
            rho1: Some(rho1),
            mu,
            kind: PromiseKind::Yes,
            certificate: None,
        };
        inst.verify_yes()?;
        Ok(inst)
    }

    /// ρ⁰ = ρ¹ = |φ⁺⟩⟨φ⁺| with both measurements projecting onto |φ⁺⟩.
    pub fn bell_pair() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = PureState::new(vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]).expect("unit vector");
        PiInstance::from_witnesses(phi.density(), phi.density(), 2, 2, DEFAULT_MU).expect("valid Y instance")
    }

    /// Unverified instance from two acceptance effects on X ⊗ Y.
    pub fn from_effects(e0: &Operator, e1: &Operator, dx: usize, dy: usize, mu: f64, kind: PromiseKind) -> Result<Self> {
        if e0.rows() != dx * dy || e1.rows() != dx * dy {
            return Err(Error::DimensionMismatch("effects do not act on X ⊗ Y".into()));
        }
        Ok(PiInstance {
            dx,
            dy,
            q0: Channel::measurement(e0)?,
            q1: Channel::measurement(e1)?,
            rho0: None,
            rho1: None,
            mu,
            kind,
            certificate: None,
        })
    }

    /// Two qubits: q0 accepts iff |00⟩, q1 accepts iff the Y qubit is |1⟩.
    /// Any equal-Y-marginal pair trades one acceptance against the other.
    pub fn tradeoff_example() -> Result<Self> {
        let e0 = Operator::diag_real(&[1.0, 0.0, 0.0, 0.0]);
        let e1 = tensor(&Operator::identity(2), &Operator::diag_real(&[0.0, 1.0]));
        let inst = PiInstance::from_effects(&e0, &e1, 2, 2, DEFAULT_MU, PromiseKind::No)?;
        inst.certify_no(PI_CERTIFY_RESTARTS, 0)
    }

    fn verify_yes(&self) -> Result<()> {
        let (r0, r1) = match (&self.rho0, &self.rho1) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::VerificationFailed("Y instance without witnesses".into())),
        };
        let shape = self.shape();
        let m0 = partial_trace(r0.op(), &shape, &[1])?;
        let m1 = partial_trace(r1.op(), &shape, &[1])?;
        let dev = m0.max_abs_diff(&m1);
        if dev > 1e-10 {
            return Err(Error::VerificationFailed(format!("Y-marginals differ by {dev:.3e}")));
        }
        let avg = 0.5 * (self.q0.accept_probability(r0.op())? + self.q1.accept_probability(r1.op())?);
        if (avg - 1.0).abs() > 1e-9 {
            return Err(Error::VerificationFailed(format!("honest acceptance {avg}")));
        }
        Ok(())
    }

    /// Runs the adversary search and records it; fails if it beats ½ + mu.
    pub fn certify_no(mut self, restarts: usize, seed: u64) -> Result<Self> {
        let found = crate::schemes::pi::pi_cheat_search(&self, restarts, seed)?;
        if found.value > 0.5 + self.mu + 1e-9 {
            return Err(Error::VerificationFailed(format!("adversary search reached {}", found.value)));
        }
        self.certificate = Some(PiCertificate { searched_value: found.value, restarts, seed });
        Ok(self)
    }
}

/// Projector onto the eigenvectors with eigenvalue above [`tol::RANK`].
pub fn support_projector(rho: &DensityMatrix) -> Result<Operator> {
    Ok(herm_eig(rho.op())?.map(|l| if l > tol::RANK { 1.0 } else { 0.0 }))
}

/// Random projector of the given rank on C^d.
fn random_projector<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let u = haar_unitary(d, rng);
    let mut p = Operator::zeros(d, d);
    for k in 0..rank {
        let v = u.col(k);
        p = &p + &Operator::outer(&v, &v);
    }
    p
}

/// Builds a Π instance with the given register dimensions.
pub fn gen_pi(kind: PromiseKind, dims: (usize, usize), seed: u64) -> Result<PiInstance> {
    let (dx, dy) = dims;
    if dx == 0 || dy == 0 || dx > 4 || dy > 4 {
        return Err(Error::InvalidParameter(format!("dims ({dx}, {dy}) outside 1..=4")));
    }
    let mut rng = stream_rng(seed, 0x91);
    match kind {
        PromiseKind::Yes => {
            let rank = rng.random_range(1..=2.min(dx * dy));
            let rho0 = random_density_rank(dx * dy, rank, &mut rng);
            let v = tensor(&haar_unitary(dx, &mut rng), &Operator::identity(dy));
            let rho1 = DensityMatrix::new(v.conjugate(rho0.op()).hermitian_part())?;
            PiInstance::from_witnesses(rho0, rho1, dx, dy, DEFAULT_MU)
        }
        PromiseKind::No => {
            if dy < 2 {
                return Err(Error::InvalidParameter("N instances need dy ≥ 2".into()));
            }
            // E_b = A_b ⊗ P_b with P₀ ⊥ P₁ on Y, so any equal-marginal pair
            // averages at most ½
            let basis = haar_unitary(dy, &mut rng);
            let split = rng.random_range(1..dy);
            let proj = |range: std::ops::Range<usize>| {
                let mut p = Operator::zeros(dy, dy);
                for k in range {
                    let v = basis.col(k);
                    p = &p + &Operator::outer(&v, &v);
                }
                p
            };
            let p0 = proj(0..split);
            let p1 = proj(split..dy);
            let a0 = random_projector(dx, rng.random_range(1..=dx), &mut rng);
            let a1 = random_projector(dx, rng.random_range(1..=dx), &mut rng);
            let inst =
                PiInstance::from_effects(&tensor(&a0, &p0), &tensor(&a1, &p1), dx, dy, DEFAULT_MU, PromiseKind::No)?;
            inst.certify_no(PI_CERTIFY_RESTARTS, seed)
        }
        PromiseKind::Unpromised => Err(Error::InvalidParameter("generators only build Y or N instances".into())),
    }
}
