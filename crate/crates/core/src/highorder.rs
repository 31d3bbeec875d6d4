//! K-th order difference penalties solved by iteratively reweighted banded
//! linear systems.

use crate::error::{Error, Result};
use crate::problem::{PenaltySpec, Problem, Signal, SolverResult, Status};

/// Pivots below this are reported as ill-conditioned.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Zero-padded k-th order forward difference operator on sequences of length n.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOperator {
    n: usize,
    k: usize,
    coeffs: Vec<f64>,
}

impl DifferenceOperator {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n <= k {
            return Err(Error::InvalidParameter(format!(
                "difference order k = {k} needs n > k, got n = {n}"
            )));
        }
        let mut coeffs = vec![0.0; k + 1];
        let mut binom = 1.0;
        for (j, c) in coeffs.iter_mut().enumerate() {
            let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            *c = sign * binom;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        Ok(DifferenceOperator { n, k, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    /// Row stencil: `(Dx)_r = Σ_j coeffs[j] · x[r + j]`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// The n − k non-trivial rows of the difference.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(crate::error::shape(self.n, x.len()));
        }
        Ok((0..self.n - self.k)
            .map(|r| self.coeffs.iter().enumerate().map(|(j, c)| c * x[r + j]).sum())
            .collect())
    }

    /// The full padded product: n entries, the last k of them zero.
    pub fn apply_padded(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.apply(x)?;
        out.resize(self.n, 0.0);
        Ok(out)
    }

    /// `Dᵀ a` for `a` of length n − k.
    pub fn apply_transpose(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &v) in a.iter().enumerate().take(self.n - self.k) {
            for (j, c) in self.coeffs.iter().enumerate() {
                out[r + j] += c * v;
            }
        }
        out
    }

    /// `I + Dᵀ diag(w) D` with right-hand side `rhs`.
    pub fn normal_system(&self, w: &[f64], rhs: Vec<f64>) -> Result<BandedSystem> {
        if w.len() != self.n - self.k {
            return Err(crate::error::shape(self.n - self.k, w.len()));
        }
        let mut sys = BandedSystem::identity(self.n, self.k, rhs)?;
        for (r, &wr) in w.iter().enumerate() {
            for (a, ca) in self.coeffs.iter().enumerate() {
                for (b, cb) in self.coeffs.iter().enumerate().take(a + 1) {
                    sys.lower[a - b][r + a] += wr * ca * cb;
                }
            }
        }
        Ok(sys)
    }
}

/// Symmetric banded matrix with half-bandwidth `half`, stored by diagonals:
/// `lower[j][i]` is entry `(i, i − j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSystem {
    n: usize,
    half: usize,
    lower: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl BandedSystem {
    pub fn identity(n: usize, half: usize, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != n {
            return Err(crate::error::shape(n, rhs.len()));
        }
        let mut lower = vec![vec![0.0; n]; half + 1];
        lower[0].iter_mut().for_each(|v| *v = 1.0);
        Ok(BandedSystem { n, half, lower, rhs })
    }

    /// Builds from a dense symmetric matrix, ignoring entries outside the band.
    pub fn from_dense(m: &nalgebra::DMatrix<f64>, half: usize, rhs: Vec<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(crate::error::shape(n, m.ncols()));
        }
        let mut sys = Self::identity(n, half, rhs)?;
        for j in 0..=half {
            for i in j..n {
                sys.lower[j][i] = m[(i, i - j)];
            }
        }
        Ok(sys)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.half {
            0.0
        } else {
            self.lower[i - j][i]
        }
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            out[i] += self.lower[0][i] * x[i];
            for j in 1..=self.half.min(i) {
                let v = self.lower[j][i];
                out[i] += v * x[i - j];
                out[i - j] += v * x[i];
            }
        }
        out
    }
}

/// Solves the system by banded LDLᵀ elimination in O(half² · n).
pub fn banded_solve(sys: &BandedSystem) -> Result<Vec<f64>> {
    let n = sys.n;
    let p = sys.half;
    // l[j][i] = L(i, i − j)
    let mut l = vec![vec![0.0; n]; p + 1];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(p);
        for c in lo..i {
            let mut v = sys.lower[i - c][i];
            for t in lo.max(c.saturating_sub(p))..c {
                v -= l[i - t][i] * l[c - t][c] * d[t];
            }
            l[i - c][i] = v / d[c];
        }
        let mut piv = sys.lower[0][i];
        for t in lo..i {
            piv -= l[i - t][i] * l[i - t][i] * d[t];
        }
        if !(piv >= PIVOT_FLOOR) {
            return Err(Error::IllConditioned { row: i, pivot: piv });
        }
        d[i] = piv;
    }
    let mut x = sys.rhs.clone();
    for i in 0..n {
        for t in i.saturating_sub(p)..i {
            x[i] -= l[i - t][i] * x[t];
        }
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n).rev() {
        for j in 1..=p.min(n - 1 - i) {
            x[i] -= l[j][i + j] * x[i + j];
        }
    }
    Ok(x)
}

fn huber(a: f64, eps: f64) -> f64 {
    if a >= eps {
        a
    } else {
        0.5 * a * a / eps + 0.5 * eps
    }
}

/// Huber-smoothed objective `½‖x − y‖² + λ Σ huber_ε(|(Dx)_r|)`.
pub fn surrogate_objective(op: &DifferenceOperator, y: &[f64], x: &[f64], lambda: f64, eps: f64) -> Result<f64> {
    let data: f64 = x.iter().zip(y).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
    let pen: f64 = op.apply(x)?.iter().map(|d| huber(d.abs(), eps)).sum();
    Ok(data + lambda * pen)
}

/// Output of [`kth_order_reweighted`]: the solver result and the surrogate
/// objective after every iteration.
#[derive(Debug, Clone)]
pub struct ReweightedFit {
    pub result: SolverResult,
    pub surrogate_trace: Vec<f64>,
}

/// Minimizes `½‖x − y‖² + λ‖Dᵏx‖₁` through the sequence of weighted ridge
/// problems `(I + λ Dᵀ diag(1/ρ) D) x = y`, `ρ_r = max(|(Dx)_r|, ε)`.
pub fn kth_order_reweighted(y: &[f64], k: usize, lambda: f64, epsilon: f64, max_iters: usize) -> Result<ReweightedFit> {
    let problem = Problem::new(Signal::Scalar(y.to_vec()), PenaltySpec::KthOrder { k, lambda })?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("iteration budget must be at least 1".into()));
    }
    let op = DifferenceOperator::new(y.len(), k)?;
    let mut x = y.to_vec();
    let mut trace = Vec::new();
    let mut prev = surrogate_objective(&op, y, &x, lambda, epsilon)?;
    let mut status = Status::MaxIters;
    let mut iterations = 0;
    let mut weights = vec![0.0; y.len() - k];
    for _ in 0..max_iters {
        iterations += 1;
        let dx = op.apply(&x)?;
        for (w, d) in weights.iter_mut().zip(&dx) {
            *w = lambda / d.abs().max(epsilon);
        }
        let next = banded_solve(&op.normal_system(&weights, y.to_vec())?)?;
        let cur = surrogate_objective(&op, y, &next, lambda, epsilon)?;
        trace.push(cur);
        x = next;
        if prev - cur <= 1e-12 * prev.abs() {
            status = Status::Converged;
            break;
        }
        prev = cur;
    }
    let dx = op.apply(&x)?;
    let alpha: Vec<f64> = dx.iter().map(|d| lambda * d / d.abs().max(epsilon)).collect();
    let result = SolverResult::finish(&problem, Signal::Scalar(x), Signal::Scalar(alpha), iterations, status)?;
    Ok(ReweightedFit {
        result,
        surrogate_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_examples() {
        let d1 = DifferenceOperator::new(3, 1).unwrap();
        assert_eq!(d1.apply(&[1.0, 2.0, 4.0]).unwrap(), vec![1.0, 2.0]);
        let d2 = DifferenceOperator::new(3, 2).unwrap();
        assert_eq!(d2.apply(&[1.0, 2.0, 4.0]).unwrap(), vec![1.0]);
        let ramp: Vec<f64> = (0..10).map(|i| 3.0 * i as f64 - 2.0).collect();
        let d = DifferenceOperator::new(10, 2).unwrap();
        assert!(d.apply(&ramp).unwrap().iter().all(|v| *v == 0.0));
        assert!(DifferenceOperator::new(2, 2).is_err());
        assert!(d1.apply(&[1.0]).is_err());
        assert_eq!(
            DifferenceOperator::new(5, 3).unwrap().coefficients(),
            &[-1.0, 3.0, -3.0, 1.0]
        );
    }

    #[test]
    fn padded_rows_are_zero() {
        let d = DifferenceOperator::new(7, 3).unwrap();
        let x = [1.0, -4.0, 2.5, 9.0, 0.0, 3.0, 7.0];
        let full = d.apply_padded(&x).unwrap();
        assert_eq!(full.len(), 7);
        assert!(full[4..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn transpose_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = DifferenceOperator::new(12, 3).unwrap();
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = d.apply(&x).unwrap().iter().zip(&a).map(|(p, q)| p * q).sum();
        let rhs: f64 = d.apply_transpose(&a).iter().zip(&x).map(|(p, q)| p * q).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn identity_solve() {
        let b = vec![1.0, -2.0, 3.0];
        let sys = BandedSystem::identity(3, 2, b.clone()).unwrap();
        assert_eq!(banded_solve(&sys).unwrap(), b);
    }

    #[test]
    fn tridiagonal_fixture() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1, 0, 1] has x = [1, 1, 1]
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let sys = BandedSystem::from_dense(&m, 1, vec![1.0, 0.0, 1.0]).unwrap();
        let x = banded_solve(&sys).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_system_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let sys = BandedSystem::from_dense(&m, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(banded_solve(&sys), Err(Error::IllConditioned { row: 1, .. })));
    }

    fn dense_check(n: usize, k: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DifferenceOperator::new(n, k).unwrap();
        let w: Vec<f64> = (0..n - k).map(|_| rng.random_range(0.01..100.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let sys = d.normal_system(&w, b.clone()).unwrap();
        let x = banded_solve(&sys).unwrap();
        let mut dense = DMatrix::<f64>::identity(n, n);
        for (r, wr) in w.iter().enumerate() {
            for (a, ca) in d.coefficients().iter().enumerate() {
                for (bb, cb) in d.coefficients().iter().enumerate() {
                    dense[(r + a, r + bb)] += wr * ca * cb;
                }
            }
        }
        let xd = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let binf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let resid = &dense * DVector::from_vec(x.clone()) - DVector::from_vec(b);
        assert!(resid.amax() <= 1e-10 * binf, "residual {}", resid.amax());
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() <= 1e-10 * (1.0 + xd[i].abs()) * 1e2, "n={n} k={k}");
            assert_eq!(sys.get(i, i), dense[(i, i)]);
        }
    }

    #[test]
    fn k2_matches_dense() {
        dense_check(60, 2, 11);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn banded_matches_dense(n in 6usize..200, k in 1usize..5, seed in any::<u64>()) {
            dense_check(n, k, seed);
        }
    }

    #[test]
    fn polynomial_is_fixed_point() {
        let y: Vec<f64> = (0..20).map(|i| 0.5 * i as f64 + 1.0).collect();
        let fit = kth_order_reweighted(&y, 2, 3.0, 1e-6, 10).unwrap();
        for (a, b) in fit.result.x.as_scalar().unwrap().iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn k1_two_points() {
        let fit = kth_order_reweighted(&[1.0, -1.0], 1, 0.5, 1e-8, 200).unwrap();
        let x = fit.result.x.as_scalar().unwrap();
        assert!((x[0] - 0.5).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn surrogate_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..4 {
            for &(lambda, eps) in &[(0.1, 1e-3), (1.0, 1e-6), (5.0, 1e-2)] {
                let y: Vec<f64> = (0..80).map(|_| rng.random_range(-3.0..3.0)).collect();
                let fit = kth_order_reweighted(&y, k, lambda, eps, 60).unwrap();
                for w in fit.surrogate_trace.windows(2) {
                    assert!(w[1] <= w[0] * (1.0 + 1e-12), "k={k} {} > {}", w[1], w[0]);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(kth_order_reweighted(&[1.0, 2.0], 2, 1.0, 1e-6, 5).is_err());
        assert!(kth_order_reweighted(&[1.0, 2.0, 3.0], 1, 1.0, 0.0, 5).is_err());
        assert!(kth_order_reweighted(&[1.0, 2.0, 3.0], 1, 1.0, 1e-3, 0).is_err());
    }
}
