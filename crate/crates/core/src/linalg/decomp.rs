//! Jacobi-based spectral decompositions.
//!
//! Hermitian eigenproblems use cyclic two-sided Jacobi rotations, singular
//! values use one-sided (Hestenes) Jacobi. Both are accurate to a few ulps of
//! the operator norm at the dimensions this crate works with (≤ a few hundred).

use super::operator::{inner, norm, Operator, C64, ONE, ZERO};
use super::tol;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as orthonormal columns, matching `values`.
    pub vectors: Operator,
}

impl HermEig {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.col(i)
    }

    /// V f(Λ) V†
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Operator {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Operator::zeros(n, n);
        for k in 0..n {
            if fv[k] == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * fv[k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Computes the 2×2 unitary rotation that annihilates the off-diagonal entry
/// `apq` of the Hermitian block [[app, apq], [conj(apq), aqq]].
///
/// Returns (c, s, phase) where the rotation acts on columns as
/// col_p' = c col_p − s e^{-iφ} col_q, col_q' = s col_p + c e^{-iφ} col_q.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64) {
    let r = apq.norm();
    let phase = if r > 0.0 { apq / r } else { ONE };
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase.conj())
}

/// Eigen-decomposition of a Hermitian operator by cyclic Jacobi rotations.
pub fn herm_eig(h: &Operator) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("eigendecomposition needs a square operator".into()));
    }
    let dev = h.hermitian_deviation();
    if dev > tol::DEFAULT * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(herm_eig_unchecked(&h.hermitian_part()))
}

pub(crate) fn herm_eig_unchecked(h: &Operator) -> HermEig {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = Operator::identity(n);
    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= f64::EPSILON * 1e-2 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= f64::MIN_POSITIVE * 1e10 {
                        continue;
                    }
                    let (c, s, e) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                    // A <- A G
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * c - akq * (e * s);
                        a[(k, q)] = akp * s + akq * (e * c);
                    }
                    // A <- G† A
                    let ec = e.conj();
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = apk * c - aqk * (ec * s);
                        a[(q, k)] = apk * s + aqk * (ec * c);
                    }
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                    // V <- V G
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * (e * s);
                        v[(k, q)] = vkp * s + vkq * (e * c);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = Operator::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermEig { values, vectors }
}

/// Thin singular value decomposition A = U Σ V†.
#[derive(Clone, Debug)]
pub struct Svd {
    /// m × k with orthonormal columns (k = min(m, n)).
    pub u: Operator,
    /// Descending singular values, length k.
    pub s: Vec<f64>,
    /// n × k with orthonormal columns.
    pub v: Operator,
}

/// One-sided Jacobi SVD. Left vectors belonging to zero singular values are
/// completed to an orthonormal set.
pub fn svd(a: &Operator) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = Operator::identity(n);
    let scale = a.frobenius_norm();
    if scale > 0.0 && n > 1 {
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = ZERO;
                    for k in 0..m {
                        let wp = w[(k, p)];
                        let wq = w[(k, q)];
                        alpha += wp.norm_sqr();
                        beta += wq.norm_sqr();
                        gamma += wp.conj() * wq;
                    }
                    if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() < 1e-300 {
                        continue;
                    }
                    rotated = true;
                    let (c, s, e) = jacobi_rotation(alpha, beta, gamma);
                    for k in 0..m {
                        let wp = w[(k, p)];
                        let wq = w[(k, q)];
                        w[(k, p)] = wp * c - wq * (e * s);
                        w[(k, q)] = wp * s + wq * (e * c);
                    }
                    for k in 0..n {
                        let vp = v[(k, p)];
                        let vq = v[(k, q)];
                        v[(k, p)] = vp * c - vq * (e * s);
                        v[(k, q)] = vp * s + vq * (e * c);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| norm(&w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let cutoff = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * (m as f64);
    let mut u = Operator::zeros(m, n);
    let mut filled = Vec::new();
    for (c, &j) in order.iter().enumerate() {
        if norms[j] > cutoff {
            let col: Vec<C64> = w.col(j).iter().map(|z| z / norms[j]).collect();
            u.set_col(c, &col);
            filled.push(c);
        }
    }
    let mut basis: Vec<Vec<C64>> = filled.iter().map(|&c| u.col(c)).collect();
    let completion = complete_orthonormal(&basis, m, n - filled.len());
    let mut extra = completion.into_iter();
    for c in 0..n {
        if !filled.contains(&c) {
            let col = extra.next().expect("completion size");
            u.set_col(c, &col);
            basis.push(col);
        }
    }
    let v_sorted = Operator::from_fn(n, n, |r, c| v[(r, order[c])]);
    Svd { u, s, v: v_sorted }
}

/// Extends an orthonormal family with `count` further orthonormal vectors in C^dim.
pub fn complete_orthonormal(existing: &[Vec<C64>], dim: usize, count: usize) -> Vec<Vec<C64>> {
    let mut all: Vec<Vec<C64>> = existing.to_vec();
    let mut added = Vec::new();
    let mut candidate = 0;
    while added.len() < count && candidate < dim {
        let mut e = vec![ZERO; dim];
        e[candidate] = ONE;
        candidate += 1;
        if let Some(q) = gram_schmidt_step(&all, e) {
            all.push(q.clone());
            added.push(q);
        }
    }
    assert_eq!(added.len(), count, "cannot complete orthonormal family");
    added
}

/// Orthogonalizes `v` against an orthonormal family (twice, for stability);
/// returns `None` if nothing independent is left.
pub fn gram_schmidt_step(basis: &[Vec<C64>], mut v: Vec<C64>) -> Option<Vec<C64>> {
    let start = norm(&v);
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let n = norm(&v);
    if n <= 1e-10 * start.max(1e-300) {
        return None;
    }
    Some(v.into_iter().map(|z| z / n).collect())
}

/// Unitary polar factor of a square operator: the unitary W maximizing Re tr(W† A).
pub fn polar_unitary(a: &Operator) -> Operator {
    assert!(a.is_square());
    let d = svd(a);
    d.u.matmul(&d.v.adjoint())
}

/// Principal square root of a positive semidefinite operator.
///
/// Eigenvalues in [−tolerance, 0) are clamped to zero; eigenvalues below
/// [`tol::SPECTRAL_FLOOR`] (relative to the operator scale) are treated as
/// exact zeros so that numerically rank-deficient inputs keep their kernel.
pub fn psd_sqrt(a: &Operator) -> Result<Operator> {
    let eig = herm_eig(a)?;
    let scale = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol::DEFAULT * scale {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let floor = tol::SPECTRAL_FLOOR * scale;
    Ok(eig.map(|l| if l > floor { l.sqrt() } else { 0.0 }))
}

/// Eigenvector of the largest eigenvalue of a Hermitian operator.
pub fn top_eigenvector(h: &Operator) -> (f64, Vec<C64>) {
    let eig = herm_eig_unchecked(&h.hermitian_part());
    (eig.values[0], eig.vector(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_z() -> Operator {
        Operator::diag_real(&[1.0, -1.0])
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = herm_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
    }

    #[test]
    fn identity_spectrum() {
        let e = herm_eig(&Operator::identity(5)).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn qubit_eigenvalues_match_quadratic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h = random_hermitian(2, &mut rng);
            let a = h[(0, 0)].re;
            let d = h[(1, 1)].re;
            let b = h[(0, 1)].norm_sqr();
            let mean = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b).sqrt();
            let e = herm_eig(&h).unwrap();
            assert!((e.values[0] - (mean + disc)).abs() < 1e-13);
            assert!((e.values[1] - (mean - disc)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn residual_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1, 3, 8, 17] {
            let h = random_hermitian(d, &mut rng);
            let e = herm_eig(&h).unwrap();
            let hn = h.frobenius_norm();
            for i in 0..d {
                let v = e.vector(i);
                let hv = h.apply(&v);
                let r: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e.values[i]).norm_sqr()).sum::<f64>().sqrt();
                assert!(r <= 1e-10 * hn);
            }
            assert!(e.vectors.unitary_deviation() < 1e-10);
        }
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(3, 3), (5, 2), (2, 6), (4, 4)] {
            let a = random_matrix(m, n, &mut rng);
            let d = svd(&a);
            let k = m.min(n);
            let sigma = Operator::diag_real(&d.s);
            let back = d.u.matmul(&sigma).matmul(&d.v.adjoint());
            assert!(back.max_abs_diff(&a) < 1e-12);
            assert_eq!(d.u.cols(), k);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_completes_rank_deficient_left_vectors() {
        let a = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let d = svd(&a);
        let utu = d.u.adjoint().matmul(&d.u);
        assert!(utu.max_abs_diff(&Operator::identity(2)) < 1e-14);
        assert_eq!(d.s, vec![1.0, 0.0]);
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        assert!(psd_sqrt(&Operator::identity(3)).unwrap().max_abs_diff(&Operator::identity(3)) < 1e-15);
        let r = psd_sqrt(&Operator::diag_real(&[0.25, 0.81])).unwrap();
        assert!(r.max_abs_diff(&Operator::diag_real(&[0.5, 0.9])) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_negative() {
        let a = Operator::diag_real(&[1.0, -0.1]);
        assert!(matches!(psd_sqrt(&a), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn polar_factor_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(4, 4, &mut rng);
        let w = polar_unitary(&a);
        assert!(w.unitary_deviation() < 1e-12);
        // W†A is PSD
        let p = w.adjoint().matmul(&a);
        assert!(p.is_hermitian(1e-10));
        assert!(herm_eig(&p).unwrap().values.iter().all(|&l| l > -1e-12));
    }
}
