//! Qubit circuits with ancillas, discarded wires and an output split.

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::linalg::operator::{Operator, C64, ZERO};
use crate::linalg::state::{apply_local, PureState, SubsystemShape};
use crate::linalg::tol;

/// A unitary acting on one or two wires (first target most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub matrix: Operator,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(matrix: Operator, targets: Vec<usize>) -> Self {
        Gate { matrix, targets }
    }
}

/// Common gate matrices.
pub mod gates {
    use crate::linalg::operator::{Operator, C64, ONE, ZERO};

    pub fn hadamard() -> Operator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Operator::from_real_rows(&[&[h, h], &[h, -h]])
    }

    pub fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> Operator {
        Operator::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        })
    }

    pub fn pauli_z() -> Operator {
        Operator::diag_real(&[1.0, -1.0])
    }

    /// Real rotation cos θ |0⟩ + sin θ |1⟩ from |0⟩.
    pub fn ry(theta: f64) -> Operator {
        let (s, c) = theta.sin_cos();
        Operator::from_real_rows(&[&[c, -s], &[s, c]])
    }

    /// Control on the first target, X on the second.
    pub fn cnot() -> Operator {
        controlled(&pauli_x())
    }

    /// |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u.
    pub fn controlled(u: &Operator) -> Operator {
        let d = u.rows();
        Operator::from_fn(2 * d, 2 * d, |i, j| {
            if i < d && j < d {
                if i == j {
                    ONE
                } else {
                    ZERO
                }
            } else if i >= d && j >= d {
                u[(i - d, j - d)]
            } else {
                ZERO
            }
        })
    }
}

/// Circuit on `wires` qubits; the last `ancillas` wires start in |0⟩. After the
/// gates, wires in `discards` are traced out; `split` lists the surviving wires
/// forming the first output part (O or X), the remaining survivors form the
/// second part (G or Y).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub wires: usize,
    pub ancillas: usize,
    pub gates: Vec<Gate>,
    pub discards: Vec<usize>,
    pub split: Vec<usize>,
}

impl Circuit {
    pub fn new(wires: usize, ancillas: usize) -> Self {
        Circuit { wires, ancillas, gates: Vec::new(), discards: Vec::new(), split: (0..wires).collect() }
    }

    pub fn with_gate(mut self, matrix: Operator, targets: &[usize]) -> Self {
        self.gates.push(Gate::new(matrix, targets.to_vec()));
        self
    }

    pub fn push(&mut self, matrix: Operator, targets: &[usize]) {
        self.gates.push(Gate::new(matrix, targets.to_vec()));
    }

    pub fn validate(&self) -> Result<()> {
        if self.wires == 0 || self.ancillas > self.wires {
            return Err(Error::InvalidParameter(format!("{} wires with {} ancillas", self.wires, self.ancillas)));
        }
        if self.wires > 12 {
            return Err(Error::InvalidParameter(format!("{} wires exceed the dense simulation cap", self.wires)));
        }
        for (n, g) in self.gates.iter().enumerate() {
            if g.targets.is_empty() || g.targets.len() > 2 {
                return Err(Error::InvalidParameter(format!("gate {n} acts on {} wires", g.targets.len())));
            }
            if g.targets.iter().any(|&t| t >= self.wires) || (g.targets.len() == 2 && g.targets[0] == g.targets[1]) {
                return Err(Error::InvalidParameter(format!("gate {n} has bad targets {:?}", g.targets)));
            }
            let d = 1 << g.targets.len();
            if g.matrix.rows() != d || g.matrix.cols() != d {
                return Err(Error::DimensionMismatch(format!("gate {n} matrix is not {d}x{d}")));
            }
            let dev = g.matrix.unitary_deviation();
            if dev > tol::UNITARY {
                return Err(Error::NotUnitary { deviation: dev });
            }
        }
        let mut seen = vec![false; self.wires];
        for &w in &self.discards {
            if w >= self.wires || seen[w] {
                return Err(Error::InvalidParameter(format!("bad discard set {:?}", self.discards)));
            }
            seen[w] = true;
        }
        let mut in_split = vec![false; self.wires];
        for &w in &self.split {
            if w >= self.wires || seen[w] || in_split[w] {
                return Err(Error::InvalidParameter(format!("split {:?} must list distinct surviving wires", self.split)));
            }
            in_split[w] = true;
        }
        Ok(())
    }

    pub fn input_wires(&self) -> usize {
        self.wires - self.ancillas
    }

    pub fn input_dim(&self) -> usize {
        1 << self.input_wires()
    }

    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::qubits(self.wires)
    }

    /// Surviving wires in increasing order; this is the output factor order.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.wires).filter(|w| !self.discards.contains(w)).collect()
    }

    /// Positions (within the surviving wires) of the first and second output parts.
    pub fn split_positions(&self) -> (Vec<usize>, Vec<usize>) {
        let surv = self.surviving();
        let first = surv.iter().enumerate().filter(|(_, w)| self.split.contains(w)).map(|(i, _)| i).collect();
        let second = surv.iter().enumerate().filter(|(_, w)| !self.split.contains(w)).map(|(i, _)| i).collect();
        (first, second)
    }

    fn run_vector(&self, mut v: Vec<C64>) -> Result<Vec<C64>> {
        let shape = self.shape();
        for g in &self.gates {
            apply_local(&mut v, &shape, &g.targets, &g.matrix)?;
        }
        Ok(v)
    }

    /// Applies the gates to `input` ⊗ |0…0⟩ and returns the full output state
    /// on all wires, before any discarding.
    pub fn run_unitary(&self, input: &PureState) -> Result<PureState> {
        self.validate()?;
        if input.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "input of dimension {} for {} input wires",
                input.dim(),
                self.input_wires()
            )));
        }
        let anc = 1usize << self.ancillas;
        let mut v = vec![ZERO; 1 << self.wires];
        for (i, z) in input.amplitudes().iter().enumerate() {
            v[i * anc] = *z;
        }
        PureState::normalized(self.run_vector(v)?)
    }

    /// Output of the circuit on the all-zero input.
    pub fn run_from_zero(&self) -> Result<PureState> {
        self.run_unitary(&PureState::basis(self.input_dim(), 0))
    }

    /// The product of all gates as a matrix on every wire.
    pub fn expanded_unitary(&self) -> Result<Operator> {
        self.validate()?;
        let d = 1usize << self.wires;
        let mut u = Operator::zeros(d, d);
        for j in 0..d {
            let mut e = vec![ZERO; d];
            e[j] = C64::new(1.0, 0.0);
            u.set_col(j, &self.run_vector(e)?);
        }
        Ok(u)
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let u = self.expanded_unitary()?;
        Channel::stinespring(u, self.input_dim(), 1 << self.ancillas, self.shape(), self.discards.clone())
    }

    /// Circuit running the gates of `self` followed by those of `other` on the same wires.
    pub fn followed_by(&self, other: &[Gate]) -> Circuit {
        let mut c = self.clone();
        c.gates.extend_from_slice(other);
        c
    }
}
