//! Problem description, solver output, objective evaluation and KKT checks
//! shared by every solver in the crate.
//!
//! Sign convention for dual variables: `alpha[i]` is a subgradient of the
//! i-th penalty evaluated at `x[i] - x[i+1]`, and stationarity reads
//! `∇h_i(x_i) + alpha_i - alpha_{i-1} = 0` with `alpha_0 = alpha_n = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{shape, Error, Result};
use crate::highorder::DifferenceOperator;
use crate::link::BregmanLink;

/// Tolerance used to certify a dual certificate.
pub const KKT_TOL: f64 = 1e-8;
/// Relative tolerance when comparing objective values.
pub const OBJECTIVE_RTOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a weight matrix.
pub const SPD_EIGEN_FLOOR: f64 = 1e-12;
/// Two neighbours closer than this are reported as fused.
pub const FUSION_THRESHOLD: f64 = 1e-8;

/// A sequence of n scalars or n vectors (stored as the rows of an n×d matrix).
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Scalar(Vec<f64>),
    Vector(DMatrix<f64>),
}

impl Signal {
    pub fn len(&self) -> usize {
        match self {
            Signal::Scalar(v) => v.len(),
            Signal::Vector(m) => m.nrows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Signal::Scalar(_) => 1,
            Signal::Vector(m) => m.ncols(),
        }
    }

    pub fn as_scalar(&self) -> Option<&[f64]> {
        match self {
            Signal::Scalar(v) => Some(v),
            Signal::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&DMatrix<f64>> {
        match self {
            Signal::Vector(m) => Some(m),
            Signal::Scalar(_) => None,
        }
    }

    /// Rows as an n×d matrix regardless of variant.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        match self {
            Signal::Scalar(v) => DMatrix::from_column_slice(v.len(), 1, v),
            Signal::Vector(m) => m.clone(),
        }
    }

    /// Number of maximal runs of neighbours whose difference (2-norm) is
    /// below `threshold`.
    pub fn segments(&self, threshold: f64) -> usize {
        let m = self.to_matrix();
        if m.nrows() == 0 {
            return 0;
        }
        1 + (0..m.nrows() - 1)
            .filter(|&i| (m.row(i + 1) - m.row(i)).norm() >= threshold)
            .count()
    }
}

/// The variational penalty and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltySpec {
    /// Σ λᵢ |xᵢ − xᵢ₊₁|
    FusedLasso { lambda: Vec<f64> },
    /// Fused lasso plus Σ βᵢ |xᵢ|.
    SparseFused { lambda: Vec<f64>, beta: Vec<f64> },
    /// gᵢ(δ) = hiᵢ [δ]₊ − loᵢ [−δ]₊ with hiᵢ ≥ 0 ≥ loᵢ (either may be infinite).
    Asymmetric { hi: Vec<f64>, lo: Vec<f64> },
    /// x₁ ≤ x₂ ≤ … ≤ xₙ
    Isotonic,
    /// |xᵢ₊₁ − xᵢ| ≤ λᵢ
    Barrier { lambda: Vec<f64> },
    /// Σ (wᵢ/2) ‖xᵢ₊₁ − xᵢ‖², wᵢ = 1 when no weights are given.
    MvSquared { gap_weights: Option<Vec<f64>> },
    /// scale · Σ ‖xᵢ₊₁ − xᵢ‖₂
    MvL2 { scale: f64 },
    /// scale · Σ ‖xᵢ₊₁ − xᵢ‖∞
    MvLinf { scale: f64 },
    /// λ · ‖[D̃ᵏ x]₁..ₙ₋ₖ‖₁
    KthOrder { k: usize, lambda: f64 },
}

impl PenaltySpec {
    pub fn is_multivariate(&self) -> bool {
        matches!(
            self,
            PenaltySpec::MvSquared { .. } | PenaltySpec::MvL2 { .. } | PenaltySpec::MvLinf { .. }
        )
    }
}

/// An instance: observations, penalty, data-term link and optional weights.
#[derive(Debug, Clone)]
pub struct Problem {
    pub y: Signal,
    pub penalty: PenaltySpec,
    pub link: BregmanLink,
    pub weights: Option<Vec<DMatrix<f64>>>,
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(shape(format!("{name} of length {n}"), format!("length {}", v.len())));
    }
    Ok(())
}

fn check_all(name: &str, v: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    match v.iter().position(|&x| x.is_nan() || !ok(x)) {
        Some(i) => Err(Error::InvalidParameter(format!(
            "{name}[{i}] = {} must be {what}",
            v[i]
        ))),
        None => Ok(()),
    }
}

impl Problem {
    pub fn new(y: Signal, penalty: PenaltySpec) -> Result<Self> {
        Self::with_link(y, penalty, BregmanLink::Squared)
    }

    pub fn with_link(y: Signal, penalty: PenaltySpec, link: BregmanLink) -> Result<Self> {
        let p = Problem {
            y,
            penalty,
            link,
            weights: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_weights(y: DMatrix<f64>, weights: Vec<DMatrix<f64>>, gap_weights: Option<Vec<f64>>) -> Result<Self> {
        let p = Problem {
            y: Signal::Vector(y),
            penalty: PenaltySpec::MvSquared { gap_weights },
            link: BregmanLink::Squared,
            weights: Some(weights),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of dual variables carried by a certificate.
    pub fn dual_len(&self) -> usize {
        let n = self.n();
        match self.penalty {
            PenaltySpec::KthOrder { k, .. } => n.saturating_sub(k),
            _ => n.saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidParameter("empty observation sequence".into()));
        }
        let gaps = n - 1;
        let mv = self.penalty.is_multivariate();
        match (&self.y, mv) {
            (Signal::Scalar(_), true) => return Err(shape("vector observations", "scalar observations")),
            (Signal::Vector(_), false) => return Err(shape("scalar observations", "vector observations")),
            _ => {}
        }
        if mv && !self.link.is_squared() {
            return Err(Error::InvalidParameter(
                "multivariate problems use the squared link".into(),
            ));
        }
        let nonneg = |x: f64| x >= 0.0;
        match &self.penalty {
            PenaltySpec::FusedLasso { lambda } => {
                check_len("lambda", lambda, gaps)?;
                check_all("lambda", lambda, nonneg, "non-negative")?;
            }
            PenaltySpec::SparseFused { lambda, beta } => {
                check_len("lambda", lambda, gaps)?;
                check_len("beta", beta, n)?;
                check_all("lambda", lambda, nonneg, "non-negative")?;
                check_all("beta", beta, |b| b >= 0.0 && b.is_finite(), "finite and non-negative")?;
            }
            PenaltySpec::Asymmetric { hi, lo } => {
                check_len("lambda_hi", hi, gaps)?;
                check_len("lambda_lo", lo, gaps)?;
                check_all("lambda_hi", hi, nonneg, "non-negative")?;
                check_all("lambda_lo", lo, |x| x <= 0.0, "non-positive")?;
            }
            PenaltySpec::Isotonic => {}
            PenaltySpec::Barrier { lambda } => {
                if !self.link.is_squared() {
                    return Err(Error::InvalidParameter(
                        "barrier penalty requires the squared link".into(),
                    ));
                }
                check_len("lambda", lambda, gaps)?;
                check_all("lambda", lambda, |x| x > 0.0 && x.is_finite(), "finite and positive")?;
            }
            PenaltySpec::MvSquared { gap_weights } => {
                if let Some(w) = gap_weights {
                    check_len("gap_weights", w, gaps)?;
                    check_all("gap_weights", w, |x| x > 0.0 && x.is_finite(), "finite and positive")?;
                }
            }
            PenaltySpec::MvL2 { scale } | PenaltySpec::MvLinf { scale } => {
                check_all("scale", &[*scale], |x| x > 0.0 && x.is_finite(), "finite and positive")?;
            }
            PenaltySpec::KthOrder { k, lambda } => {
                if *k == 0 || *k >= n {
                    return Err(Error::InvalidParameter(format!(
                        "order k = {k} must satisfy 1 <= k < n = {n}"
                    )));
                }
                if !self.link.is_squared() {
                    return Err(Error::InvalidParameter(
                        "k-th order penalty requires the squared link".into(),
                    ));
                }
                check_all("lambda", &[*lambda], nonneg, "non-negative")?;
            }
        }
        match &self.y {
            Signal::Scalar(y) => {
                for (i, &v) in y.iter().enumerate() {
                    if !self.link.contains(v) {
                        let (lo, hi) = self.link.domain();
                        return Err(Error::OutsideDomain {
                            index: i,
                            value: v,
                            lo,
                            hi,
                        });
                    }
                }
            }
            Signal::Vector(m) => {
                if let Some(i) = m.iter().position(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "non-finite observation at flat index {i}"
                    )));
                }
            }
        }
        if let Some(ws) = &self.weights {
            if !matches!(self.penalty, PenaltySpec::MvSquared { .. }) {
                return Err(Error::InvalidParameter(
                    "weight matrices are only supported for the squared vector penalty".into(),
                ));
            }
            let d = self.y.dim();
            if ws.len() != n {
                return Err(shape(format!("{n} weight matrices"), ws.len()));
            }
            for (i, q) in ws.iter().enumerate() {
                if q.nrows() != d || q.ncols() != d {
                    return Err(shape(
                        format!("{d}x{d} weight matrix"),
                        format!("{}x{}", q.nrows(), q.ncols()),
                    ));
                }
                let asym = (q - q.transpose()).amax();
                if asym > 1e-10 * q.amax().max(1.0) {
                    return Err(Error::NotPositiveDefinite {
                        index: i,
                        min_eigenvalue: f64::NAN,
                    });
                }
                let min_eig = SymmetricEigen::new(q.clone()).eigenvalues.min();
                if min_eig < SPD_EIGEN_FLOOR {
                    return Err(Error::NotPositiveDefinite {
                        index: i,
                        min_eigenvalue: min_eig,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_candidate(&self, x: &Signal) -> Result<()> {
        if x.len() != self.n()
            || x.dim() != self.y.dim()
            || std::mem::discriminant(x) != std::mem::discriminant(&self.y)
        {
            return Err(shape(
                format!("{} x {}", self.n(), self.y.dim()),
                format!("{} x {}", x.len(), x.dim()),
            ));
        }
        if let Signal::Scalar(v) = x {
            for (i, &xi) in v.iter().enumerate() {
                if !self.link.contains(xi) {
                    let (lo, hi) = self.link.domain();
                    return Err(Error::OutsideDomain {
                        index: i,
                        value: xi,
                        lo,
                        hi,
                    });
                }
            }
        }
        Ok(())
    }
}

/// How a solver terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Exact,
    Converged,
    MaxIters,
}

/// Dual sequence witnessing optimality; `alpha` has `problem.dual_len()` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub alpha: Signal,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: Signal,
    pub dual: DualCertificate,
    pub objective: f64,
    pub iterations: usize,
    pub status: Status,
}

impl SolverResult {
    pub(crate) fn finish(
        problem: &Problem,
        x: Signal,
        alpha: Signal,
        iterations: usize,
        status: Status,
    ) -> Result<Self> {
        let objective = evaluate_objective(problem, &x)?;
        Ok(SolverResult {
            x,
            dual: DualCertificate { alpha },
            objective,
            iterations,
            status,
        })
    }
}

fn asym_penalty(delta: f64, hi: f64, lo: f64) -> f64 {
    if delta > 0.0 {
        hi * delta
    } else if delta < 0.0 {
        lo * delta
    } else {
        0.0
    }
}

/// Σᵢ hᵢ(xᵢ) + Σᵢ gᵢ(differences). Constraint penalties evaluate to +∞ when violated.
pub fn evaluate_objective(problem: &Problem, x: &Signal) -> Result<f64> {
    problem.check_candidate(x)?;
    match (&problem.y, x) {
        (Signal::Scalar(y), Signal::Scalar(x)) => Ok(scalar_objective(problem, y, x)),
        (Signal::Vector(y), Signal::Vector(x)) => Ok(vector_objective(problem, y, x)),
        _ => unreachable!("checked by check_candidate"),
    }
}

fn scalar_objective(problem: &Problem, y: &[f64], x: &[f64]) -> f64 {
    let link = &problem.link;
    let data: f64 = x.iter().zip(y).map(|(&xi, &yi)| link.divergence(xi, yi)).sum();
    let diffs = x.windows(2).map(|w| w[0] - w[1]);
    let penalty: f64 = match &problem.penalty {
        PenaltySpec::FusedLasso { lambda } => diffs.zip(lambda).map(|(d, l)| l * d.abs()).sum(),
        PenaltySpec::SparseFused { lambda, beta } => {
            diffs.zip(lambda).map(|(d, l)| l * d.abs()).sum::<f64>()
                + x.iter().zip(beta).map(|(xi, b)| b * xi.abs()).sum::<f64>()
        }
        PenaltySpec::Asymmetric { hi, lo } => diffs
            .zip(hi.iter().zip(lo))
            .map(|(d, (&h, &l))| asym_penalty(d, h, l))
            .sum(),
        PenaltySpec::Isotonic => {
            if diffs.into_iter().any(|d| d > 0.0) {
                f64::INFINITY
            } else {
                0.0
            }
        }
        PenaltySpec::Barrier { lambda } => {
            if diffs.zip(lambda).any(|(d, &l)| d.abs() > l) {
                f64::INFINITY
            } else {
                0.0
            }
        }
        PenaltySpec::KthOrder { k, lambda } => {
            let op = DifferenceOperator::new(x.len(), *k).expect("validated order");
            lambda
                * op.apply(x)
                    .expect("validated length")
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
        }
        _ => unreachable!("validated scalar penalty"),
    };
    data + penalty
}

fn vector_objective(problem: &Problem, y: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    let n = y.nrows();
    let resid = x - y;
    let data: f64 = match &problem.weights {
        Some(ws) => (0..n)
            .map(|i| {
                let r = resid.row(i).transpose();
                0.5 * (r.transpose() * &ws[i] * &r)[(0, 0)]
            })
            .sum(),
        None => 0.5 * resid.norm_squared(),
    };
    let diff = |i: usize| x.row(i + 1) - x.row(i);
    let penalty: f64 = match &problem.penalty {
        PenaltySpec::MvSquared { gap_weights } => (0..n - 1)
            .map(|i| 0.5 * gap_weights.as_ref().map_or(1.0, |w| w[i]) * diff(i).norm_squared())
            .sum(),
        PenaltySpec::MvL2 { scale } => scale * (0..n - 1).map(|i| diff(i).norm()).sum::<f64>(),
        PenaltySpec::MvLinf { scale } => scale * (0..n - 1).map(|i| diff(i).amax()).sum::<f64>(),
        _ => unreachable!("validated vector penalty"),
    };
    data + penalty
}

fn dist_to_interval(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

/// Largest violation among the stationarity conditions and the
/// Fenchel–Young inclusions αᵢ ∈ ∂gᵢ(xᵢ − xᵢ₊₁); zero at an exact optimum.
pub fn kkt_residual(problem: &Problem, result: &SolverResult) -> Result<f64> {
    problem.check_candidate(&result.x)?;
    let alpha = &result.dual.alpha;
    let m = problem.dual_len();
    if alpha.len() != m || (m > 0 && alpha.dim() != problem.y.dim()) {
        return Err(shape(format!("{m} dual entries"), alpha.len()));
    }
    match (&problem.y, &result.x) {
        (Signal::Scalar(y), Signal::Scalar(x)) => {
            let a: Vec<f64> = match alpha {
                Signal::Scalar(a) => a.clone(),
                Signal::Vector(a) if a.nrows() == 0 => Vec::new(),
                Signal::Vector(_) => return Err(shape("scalar dual", "vector dual")),
            };
            Ok(scalar_kkt(problem, y, x, &a))
        }
        (Signal::Vector(y), Signal::Vector(x)) => {
            let a = alpha.to_matrix();
            Ok(vector_kkt(problem, y, x, &a))
        }
        _ => unreachable!(),
    }
}

fn scalar_kkt(problem: &Problem, y: &[f64], x: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    if let PenaltySpec::KthOrder { k, lambda } = problem.penalty {
        let op = DifferenceOperator::new(n, k).expect("validated order");
        let adj = op.apply_transpose(alpha);
        let stat = (0..n).map(|i| (x[i] - y[i] + adj[i]).abs()).fold(0.0, f64::max);
        let dx = op.apply(x).expect("validated length");
        let fy = dx
            .iter()
            .zip(alpha)
            .map(|(&d, &a)| (a.abs() - lambda).max(0.0) + (lambda * d.abs() - a.clamp(-lambda, lambda) * d))
            .fold(0.0, f64::max);
        return stat.max(fy);
    }
    let link = &problem.link;
    let a = |i: isize| -> f64 {
        if i < 0 || i as usize >= n - 1 {
            0.0
        } else {
            alpha[i as usize]
        }
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        // α_{i−1} − α_i ∈ ∂h_i(x_i)
        let target = a(i as isize - 1) - a(i as isize);
        let grad = link.forward(x[i]) - link.forward(y[i]);
        let r = match &problem.penalty {
            PenaltySpec::SparseFused { beta, .. } => {
                let b = beta[i];
                let s = target - grad;
                dist_to_interval(s, -b, b) + (b * x[i].abs() - s.clamp(-b, b) * x[i])
            }
            _ => (target - grad).abs(),
        };
        worst = worst.max(r);
    }
    for i in 0..n.saturating_sub(1) {
        let d = x[i] - x[i + 1];
        let ai = alpha[i];
        let r = match &problem.penalty {
            PenaltySpec::FusedLasso { lambda } | PenaltySpec::SparseFused { lambda, .. } => {
                let l = lambda[i];
                dist_to_interval(ai, -l, l) + (l * d.abs() - ai.clamp(-l, l) * d)
            }
            PenaltySpec::Asymmetric { hi, lo } => asym_residual(d, ai, hi[i], lo[i]),
            PenaltySpec::Isotonic => asym_residual(d, ai, f64::INFINITY, 0.0),
            PenaltySpec::Barrier { lambda } => {
                let l = lambda[i];
                (d.abs() - l).max(0.0) + (l * ai.abs() - ai * d.clamp(-l, l))
            }
            _ => unreachable!(),
        };
        worst = worst.max(r);
    }
    worst
}

fn asym_residual(d: f64, a: f64, hi: f64, lo: f64) -> f64 {
    let dual_infeas = dist_to_interval(a, lo, hi);
    let ac = a.clamp(lo, hi);
    let primal_infeas = if (d > 0.0 && hi.is_infinite()) || (d < 0.0 && lo.is_infinite()) {
        d.abs()
    } else {
        0.0
    };
    let fy = if primal_infeas > 0.0 {
        0.0
    } else {
        asym_penalty(d, hi, lo) - ac * d
    };
    dual_infeas + primal_infeas + fy
}

fn vector_kkt(problem: &Problem, y: &DMatrix<f64>, x: &DMatrix<f64>, alpha: &DMatrix<f64>) -> f64 {
    let n = y.nrows();
    let d = y.ncols();
    let a = |i: isize| -> DVector<f64> {
        if i < 0 || i as usize >= n - 1 {
            DVector::zeros(d)
        } else {
            alpha.row(i as usize).transpose()
        }
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        let r = (x.row(i) - y.row(i)).transpose();
        let grad = match &problem.weights {
            Some(ws) => &ws[i] * r,
            None => r,
        };
        let target = a(i as isize - 1) - a(i as isize);
        worst = worst.max((target - grad).amax());
    }
    for i in 0..n.saturating_sub(1) {
        let delta = (x.row(i) - x.row(i + 1)).transpose();
        let ai = a(i as isize);
        let r = match &problem.penalty {
            PenaltySpec::MvSquared { gap_weights } => {
                let w = gap_weights.as_ref().map_or(1.0, |w| w[i]);
                (ai - delta * w).amax()
            }
            PenaltySpec::MvL2 { scale } => {
                let norm = ai.norm();
                let clipped = if norm > *scale {
                    &ai * (*scale / norm)
                } else {
                    ai.clone()
                };
                (norm - scale).max(0.0) + (scale * delta.norm() - clipped.dot(&delta))
            }
            PenaltySpec::MvLinf { scale } => {
                let l1 = ai.lp_norm(1);
                let clipped = if l1 > *scale { &ai * (*scale / l1) } else { ai.clone() };
                (l1 - scale).max(0.0) + (scale * delta.amax() - clipped.dot(&delta))
            }
            _ => unreachable!(),
        };
        worst = worst.max(r);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fused(y: &[f64], lambda: f64) -> Problem {
        Problem::new(
            Signal::Scalar(y.to_vec()),
            PenaltySpec::FusedLasso {
                lambda: vec![lambda; y.len() - 1],
            },
        )
        .unwrap()
    }

    fn result(x: Vec<f64>, alpha: Vec<f64>) -> SolverResult {
        SolverResult {
            x: Signal::Scalar(x),
            dual: DualCertificate {
                alpha: Signal::Scalar(alpha),
            },
            objective: 0.0,
            iterations: 1,
            status: Status::Exact,
        }
    }

    #[test]
    fn objective_of_trivial_instances() {
        let p = fused(&[0.0, 0.0], 1.0);
        assert_eq!(evaluate_objective(&p, &Signal::Scalar(vec![0.0, 0.0])).unwrap(), 0.0);
        let p = fused(&[1.0, -1.0], 0.5);
        assert_eq!(evaluate_objective(&p, &Signal::Scalar(vec![1.0, -1.0])).unwrap(), 1.0);
    }

    #[test]
    fn violated_barrier_is_infinite() {
        let p = Problem::new(
            Signal::Scalar(vec![0.0, 10.0]),
            PenaltySpec::Barrier { lambda: vec![2.0] },
        )
        .unwrap();
        assert_eq!(
            evaluate_objective(&p, &Signal::Scalar(vec![0.0, 10.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn objective_rejects_bad_candidates() {
        let p = fused(&[0.0, 0.0], 1.0);
        assert!(matches!(
            evaluate_objective(&p, &Signal::Scalar(vec![0.0])),
            Err(Error::ShapeMismatch { .. })
        ));
        let p = Problem::with_link(
            Signal::Scalar(vec![0.2, 0.8]),
            PenaltySpec::FusedLasso { lambda: vec![1.0] },
            BregmanLink::Entropy,
        )
        .unwrap();
        assert!(matches!(
            evaluate_objective(&p, &Signal::Scalar(vec![0.2, 1.0])),
            Err(Error::OutsideDomain { index: 1, .. })
        ));
    }

    #[test]
    fn kkt_of_unsmoothed_pair() {
        let p = fused(&[1.0, -1.0], 0.5);
        let r = kkt_residual(&p, &result(vec![1.0, -1.0], vec![0.0])).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let r = kkt_residual(&p, &result(vec![0.5, -0.5], vec![0.5])).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn kkt_of_single_point() {
        let p = Problem::new(Signal::Scalar(vec![3.0]), PenaltySpec::FusedLasso { lambda: vec![] }).unwrap();
        assert_eq!(kkt_residual(&p, &result(vec![3.0], vec![])).unwrap(), 0.0);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let y = Signal::Scalar(vec![1.0, 2.0, 3.0]);
        assert!(Problem::new(y.clone(), PenaltySpec::FusedLasso { lambda: vec![1.0] }).is_err());
        assert!(Problem::new(
            y.clone(),
            PenaltySpec::FusedLasso {
                lambda: vec![1.0, -1.0]
            }
        )
        .is_err());
        assert!(Problem::new(
            y.clone(),
            PenaltySpec::Asymmetric {
                hi: vec![1.0, 1.0],
                lo: vec![0.5, 0.0]
            }
        )
        .is_err());
        assert!(Problem::new(y.clone(), PenaltySpec::Barrier { lambda: vec![0.0, 1.0] }).is_err());
        assert!(Problem::new(y.clone(), PenaltySpec::KthOrder { k: 3, lambda: 1.0 }).is_err());
        assert!(Problem::new(Signal::Scalar(vec![]), PenaltySpec::Isotonic).is_err());
        assert!(Problem::with_link(
            Signal::Scalar(vec![0.5, 1.5]),
            PenaltySpec::Isotonic,
            BregmanLink::Entropy
        )
        .is_err());
    }

    #[test]
    fn non_spd_weights_rejected() {
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let good = DMatrix::identity(2, 2);
        let err = Problem::with_weights(y, vec![good, bad], None).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { index: 1, .. }));
    }

    #[test]
    fn segments_count_fused_blocks() {
        let s = Signal::Scalar(vec![1.0, 1.0, 2.0, 2.0, 2.0, 3.0]);
        assert_eq!(s.segments(FUSION_THRESHOLD), 3);
    }
}
