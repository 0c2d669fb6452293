use serde::{Deserialize, Serialize};

use super::decomp::{complete_orthonormal, gram_schmidt_step, herm_eig, psd_sqrt, svd};
use super::operator::{norm, Operator, C64, ZERO};
use super::tol;
use crate::error::{Error, Result};

/// Ordered tensor factor dimensions; the first factor is most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    factors: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.iter().any(|&f| f == 0) {
            return Err(Error::InvalidParameter("subsystem dimensions must be positive".into()));
        }
        Ok(SubsystemShape { factors })
    }

    pub fn qubits(n: usize) -> Self {
        SubsystemShape { factors: vec![2; n] }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.factors[k + 1];
        }
        s
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            d[k] = index % self.factors[k];
            index /= self.factors[k];
        }
        d
    }

    /// Dimension of the product of the listed factors.
    pub fn sub_dim(&self, which: &[usize]) -> usize {
        which.iter().map(|&k| self.factors[k]).product()
    }

    fn check_indices(&self, which: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.factors.len()];
        for &k in which {
            if k >= self.factors.len() || seen[k] {
                return Err(Error::InvalidParameter(format!("bad subsystem index list {which:?}")));
            }
            seen[k] = true;
        }
        Ok(())
    }

    /// For every full index, the flat index of its digits restricted to `which`
    /// (in the order given).
    fn projection_table(&self, which: &[usize]) -> Vec<usize> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let d = self.digits(i);
                which.iter().fold(0, |acc, &k| acc * self.factors[k] + d[k])
            })
            .collect()
    }
}

/// Partial trace keeping the listed factors (in their original order).
pub fn partial_trace(rho: &Operator, shape: &SubsystemShape, keep: &[usize]) -> Result<Operator> {
    if !rho.is_square() || rho.rows() != shape.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} against shape {:?}",
            rho.rows(),
            rho.cols(),
            shape.factors()
        )));
    }
    shape.check_indices(keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..shape.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let dk = shape.sub_dim(&keep_sorted);
    let dt = shape.sub_dim(&traced);
    let kt = shape.projection_table(&keep_sorted);
    let tt = shape.projection_table(&traced);
    let mut full = vec![0usize; dk * dt];
    for i in 0..shape.dim() {
        full[kt[i] * dt + tt[i]] = i;
    }
    let mut out = Operator::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += rho[(full[a * dt + t], full[b * dt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state of a pure vector on the kept factors, without forming |ψ⟩⟨ψ|.
pub fn reduced_state(psi: &[C64], shape: &SubsystemShape, keep: &[usize]) -> Result<Operator> {
    if psi.len() != shape.dim() {
        return Err(Error::DimensionMismatch(format!("vector of length {} against shape {:?}", psi.len(), shape.factors())));
    }
    shape.check_indices(keep)?;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..shape.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let m = as_matrix(psi, shape, &keep_sorted, &traced);
    Ok(m.matmul(&m.adjoint()))
}

/// Reshapes a vector into a (first group) × (second group) matrix.
pub fn as_matrix(psi: &[C64], shape: &SubsystemShape, rows: &[usize], cols: &[usize]) -> Operator {
    let rt = shape.projection_table(rows);
    let ct = shape.projection_table(cols);
    let mut m = Operator::zeros(shape.sub_dim(rows), shape.sub_dim(cols));
    for (i, z) in psi.iter().enumerate() {
        m[(rt[i], ct[i])] = *z;
    }
    m
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]` of the input.
pub fn permute_vector(psi: &[C64], shape: &SubsystemShape, order: &[usize]) -> Result<Vec<C64>> {
    if order.len() != shape.len() {
        return Err(Error::InvalidParameter("permutation must list every factor".into()));
    }
    shape.check_indices(order)?;
    let table = shape.projection_table(order);
    let mut out = vec![ZERO; psi.len()];
    for (i, z) in psi.iter().enumerate() {
        out[table[i]] = *z;
    }
    Ok(out)
}

/// Reorders tensor factors of an operator (same convention as [`permute_vector`]).
pub fn permute_operator(op: &Operator, shape: &SubsystemShape, order: &[usize]) -> Result<Operator> {
    if order.len() != shape.len() {
        return Err(Error::InvalidParameter("permutation must list every factor".into()));
    }
    shape.check_indices(order)?;
    let table = shape.projection_table(order);
    let mut out = Operator::zeros(op.rows(), op.cols());
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            out[(table[i], table[j])] = op[(i, j)];
        }
    }
    Ok(out)
}

/// Applies `op` to the listed factors of a state vector in place.
pub fn apply_local(psi: &mut [C64], shape: &SubsystemShape, targets: &[usize], op: &Operator) -> Result<()> {
    shape.check_indices(targets)?;
    let td = shape.sub_dim(targets);
    if op.rows() != td || op.cols() != td || psi.len() != shape.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on factors {:?} of {:?}",
            op.rows(),
            op.cols(),
            targets,
            shape.factors()
        )));
    }
    let strides = shape.strides();
    let tshape = SubsystemShape { factors: targets.iter().map(|&k| shape.factors[k]).collect() };
    let offsets: Vec<usize> = (0..td)
        .map(|t| tshape.digits(t).iter().zip(targets).map(|(d, &k)| d * strides[k]).sum())
        .collect();
    let mut buf = vec![ZERO; td];
    for base in 0..psi.len() {
        let digits = shape.digits(base);
        if targets.iter().any(|&k| digits[k] != 0) {
            continue;
        }
        for (b, off) in buf.iter_mut().zip(&offsets) {
            *b = psi[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            psi[base + off] = op.row(r).iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
    Ok(())
}

/// Density matrix: Hermitian, positive semidefinite and unit trace within `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    op: Operator,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, tol::DEFAULT)
    }

    pub fn with_tolerance(op: Operator, tolerance: f64) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tolerance || tr.im.abs() > tolerance {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let dev = op.hermitian_deviation();
        if dev > tolerance {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let op = op.hermitian_part();
        let eig = herm_eig(&op)?;
        let min = *eig.values.last().expect("non-empty");
        if min < -tolerance {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { op, tolerance })
    }

    /// Renormalizes a nonzero PSD operator to unit trace.
    pub fn normalized(op: Operator) -> Result<Self> {
        let t = op.trace().re;
        if t <= 0.0 {
            return Err(Error::InvalidState("operator has no positive trace".into()));
        }
        Self::new(op.scale_real(1.0 / t))
    }

    pub fn pure(psi: &PureState) -> Self {
        DensityMatrix { op: Operator::outer(psi.amplitudes(), psi.amplitudes()), tolerance: tol::DEFAULT }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { op: Operator::identity(d).scale_real(1.0 / d as f64), tolerance: tol::DEFAULT }
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut op = Operator::zeros(d, d);
        op[(i, i)] = C64::new(1.0, 0.0);
        DensityMatrix { op, tolerance: tol::DEFAULT }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { op: self.op.kron(&other.op), tolerance: self.tolerance.max(other.tolerance) }
    }

    pub fn partial_trace(&self, shape: &SubsystemShape, keep: &[usize]) -> Result<DensityMatrix> {
        let op = partial_trace(&self.op, shape, keep)?;
        Ok(DensityMatrix { op, tolerance: self.tolerance })
    }

    /// Rank counted with eigenvalues above [`tol::RANK`].
    pub fn rank(&self) -> usize {
        herm_eig(&self.op).map(|e| e.values.iter().filter(|&&l| l > tol::RANK).count()).unwrap_or(0)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            op: Operator,
            tolerance: Option<f64>,
        }
        let w = Wire::deserialize(deserializer)?;
        DensityMatrix::with_tolerance(w.op, w.tolerance.unwrap_or(tol::DEFAULT)).map_err(serde::de::Error::custom)
    }
}

/// Unit vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let n = norm(&amplitudes);
        if (n * n - 1.0).abs() > tol::DEFAULT {
            return Err(Error::InvalidState(format!("squared norm {} differs from 1", n * n)));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z /= n;
        }
        Ok(PureState { amplitudes })
    }

    pub fn basis(d: usize, i: usize) -> Self {
        PureState { amplitudes: super::operator::basis_vector(d, i) }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amplitudes: super::operator::tensor_vec(&self.amplitudes, &other.amplitudes) }
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        super::operator::inner(&self.amplitudes, &other.amplitudes)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            amplitudes: Vec<C64>,
        }
        let w = Wire::deserialize(deserializer)?;
        PureState::new(w.amplitudes).map_err(serde::de::Error::custom)
    }
}

/// Purification on system ⊗ reference with reference dimension rank(ρ).
pub fn purify(rho: &DensityMatrix) -> PureState {
    let eig = herm_eig(rho.op()).expect("density matrices are Hermitian");
    let d = rho.dim();
    let support: Vec<usize> = (0..d).filter(|&i| eig.values[i] > tol::RANK).collect();
    let r = support.len().max(1);
    let mut amps = vec![ZERO; d * r];
    for (k, &i) in support.iter().enumerate() {
        let w = eig.values[i].sqrt();
        for s in 0..d {
            amps[s * r + k] = eig.vectors[(s, i)] * w;
        }
    }
    PureState::normalized(amps).expect("nonzero purification")
}

/// Given a purification of ρ on S ⊗ R, returns a purification of σ on the same
/// S ⊗ R whose overlap with it is real, non-negative and equal to F(ρ, σ).
pub fn uhlmann_overlap(rho: &DensityMatrix, sigma: &DensityMatrix, psi_rho: &PureState) -> Result<PureState> {
    let ds = rho.dim();
    if sigma.dim() != ds {
        return Err(Error::DimensionMismatch("rho and sigma differ in dimension".into()));
    }
    if psi_rho.dim() % ds != 0 {
        return Err(Error::DimensionMismatch(format!("purification length {} not a multiple of {}", psi_rho.dim(), ds)));
    }
    let dr = psi_rho.dim() / ds;
    let x = Operator::from_vec(ds, dr, psi_rho.amplitudes().to_vec())?;
    let reduced = x.matmul(&x.adjoint());
    let deviation = reduced.max_abs_diff(rho.op());
    if deviation > 1e-8 {
        return Err(Error::NotAPurification { deviation });
    }
    let sqrt_sigma = psd_sqrt(sigma.op())?;
    let t = sqrt_sigma.matmul(&x);
    let dec = svd(&t);
    let keep_cut = 1e-10 * dec.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut ps: Vec<Vec<C64>> = Vec::new();
    let mut qs: Vec<Vec<C64>> = Vec::new();
    for (i, &s) in dec.s.iter().enumerate() {
        if s > keep_cut {
            ps.push(dec.u.col(i));
            qs.push(dec.v.col(i));
        }
    }
    let eig = herm_eig(sigma.op())?;
    let support: Vec<Vec<C64>> = (0..ds).filter(|&i| eig.values[i] > tol::RANK).map(|i| eig.vector(i)).collect();
    for s in support {
        if ps.len() >= ds {
            break;
        }
        if let Some(p) = gram_schmidt_step(&ps, s) {
            ps.push(p);
        }
    }
    let kept_q = qs.len();
    if ps.len() > dr {
        return Err(Error::DimensionMismatch(format!(
            "reference dimension {dr} too small for a purification of rank {}",
            ps.len()
        )));
    }
    qs.extend(complete_orthonormal(&qs, dr, ps.len() - kept_q));
    let mut w = Operator::zeros(ds, dr);
    for (p, q) in ps.iter().zip(&qs) {
        for i in 0..ds {
            for j in 0..dr {
                w[(i, j)] += p[i] * q[j].conj();
            }
        }
    }
    let y = sqrt_sigma.matmul(&w);
    PureState::normalized(y.into_data())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator::{basis_vector, tensor, tensor_vec};
    use crate::linalg::random::{random_density, random_density_rank, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> Vec<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]
    }

    /// Explicit index-sum reference for tracing out the last factor of a 2-factor split.
    fn trace_out_second(rho: &Operator, da: usize, db: usize) -> Operator {
        Operator::from_fn(da, da, |i, j| (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum())
    }

    #[test]
    fn product_state_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let r = partial_trace(&tensor(rho.op(), sigma.op()), &shape, &[0]).unwrap();
        assert!(r.max_abs_diff(rho.op()) < 1e-14);
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let rho = Operator::outer(&bell(), &bell());
        let r = partial_trace(&rho, &SubsystemShape::qubits(2), &[0]).unwrap();
        assert!(r.max_abs_diff(&Operator::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn three_qubit_partial_trace_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(8, &mut rng);
        let shape = SubsystemShape::qubits(3);
        // keep first two qubits: trace out the last factor of a 4 x 2 split
        let r = partial_trace(rho.op(), &shape, &[0, 1]).unwrap();
        assert!(r.max_abs_diff(&trace_out_second(rho.op(), 4, 2)) < 1e-15);
        // keep the middle qubit: explicit triple sum
        let mid = partial_trace(rho.op(), &shape, &[1]).unwrap();
        let oracle = Operator::from_fn(2, 2, |i, j| {
            let mut acc = ZERO;
            for a in 0..2 {
                for c in 0..2 {
                    acc += rho.op()[(a * 4 + i * 2 + c, a * 4 + j * 2 + c)];
                }
            }
            acc
        });
        assert!(mid.max_abs_diff(&oracle) < 1e-15);
        assert!((r.trace().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn partial_trace_shape_mismatch() {
        let rho = Operator::identity(4);
        assert!(partial_trace(&rho, &SubsystemShape::qubits(3), &[0]).is_err());
        assert!(partial_trace(&rho, &SubsystemShape::qubits(2), &[2]).is_err());
    }

    #[test]
    fn apply_local_matches_expanded_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_pure_state(12, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3, 2]).unwrap();
        let x = Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        // X on factor 2, expanded as I_2 ⊗ I_3 ⊗ X
        let full = tensor(&Operator::identity(6), &x);
        let mut v = psi.amplitudes().to_vec();
        apply_local(&mut v, &shape, &[2], &x).unwrap();
        let w = full.apply(psi.amplitudes());
        assert!(v.iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-15));
        // swapped targets of a two-factor operator
        let op = tensor(&x, &Operator::diag_real(&[1.0, 2.0, 3.0]));
        let mut v1 = psi.amplitudes().to_vec();
        apply_local(&mut v1, &shape, &[2, 1], &op).unwrap();
        let perm = permute_vector(psi.amplitudes(), &shape, &[0, 2, 1]).unwrap();
        let mut v2 = perm.clone();
        let shape2 = SubsystemShape::new(vec![2, 2, 3]).unwrap();
        apply_local(&mut v2, &shape2, &[1, 2], &op).unwrap();
        let back = permute_vector(&v2, &shape2, &[0, 2, 1]).unwrap();
        assert!(v1.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn purify_pure_state_has_trivial_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = random_pure_state(3, &mut rng);
        let p = purify(&psi.density());
        assert_eq!(p.dim(), 3);
        assert!((p.overlap(&psi).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed() {
        let p = purify(&DensityMatrix::maximally_mixed(2));
        assert_eq!(p.dim(), 4);
        let r = reduced_state(p.amplitudes(), &SubsystemShape::qubits(2), &[0]).unwrap();
        assert!(r.max_abs_diff(&Operator::identity(2).scale_real(0.5)) < 1e-14);
    }

    #[test]
    fn purify_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=8 {
            for rank in 1..=d {
                let rho = random_density_rank(d, rank, &mut rng);
                let p = purify(&rho);
                let r = p.dim() / d;
                assert_eq!(r, rho.rank().max(1));
                let shape = SubsystemShape::new(vec![d, r]).unwrap();
                let back = reduced_state(p.amplitudes(), &shape, &[0]).unwrap();
                assert!(back.max_abs_diff(rho.op()) < 1e-10);
            }
        }
    }

    #[test]
    fn uhlmann_identical_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho = random_density(3, &mut rng);
        let p = purify(&rho);
        let same = uhlmann_overlap(&rho, &rho, &p).unwrap();
        assert!((same.overlap(&p).norm() - 1.0).abs() < 1e-8);

        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        let pz = PureState::new(tensor_vec(&basis_vector(2, 0), &basis_vector(2, 0))).unwrap();
        let q = uhlmann_overlap(&zero, &one, &pz).unwrap();
        assert!(q.overlap(&pz).norm() < 1e-12);
        let red = reduced_state(q.amplitudes(), &SubsystemShape::qubits(2), &[0]).unwrap();
        assert!(red.max_abs_diff(one.op()) < 1e-12);
    }

    #[test]
    fn uhlmann_rejects_non_purification() {
        let rho = DensityMatrix::basis(2, 0);
        let wrong = PureState::basis(4, 3);
        assert!(matches!(uhlmann_overlap(&rho, &rho, &wrong), Err(Error::NotAPurification { .. })));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(Operator::identity(2)).is_err());
        assert!(DensityMatrix::new(Operator::diag_real(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(Operator::from_real_rows(&[&[0.5, 0.5], &[0.0, 0.5]])).is_err());
        assert!(PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
    }
}
