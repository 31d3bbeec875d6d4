//! Exact solvers for scalar sequences.
//!
//! Every variant runs the same two passes. The forward pass walks from the
//! last coordinate to the first, maintaining the map from a candidate value
//! of the current coordinate (in link space, `u = ∇φ(x)`) to the dual
//! variable of the gap on its left. The first coordinate is the root of the
//! final map, and the backward pass reads the remaining coordinates off the
//! per-gap records.
//!
//! Dual convention: `αᵢ ∈ ∂gᵢ(xᵢ − xᵢ₊₁)` and `∇hᵢ(xᵢ) + αᵢ − αᵢ₋₁ = 0`
//! with `α₀ = αₙ = 0`.

use crate::error::{Error, Result};
use crate::link::BregmanLink;
use crate::problem::{PenaltySpec, Problem, Signal, SolverResult, Status};
use crate::pwl::{BreakpointList, ClipRecord, KvetshRecord, OpStats};
use crate::skiplist::LazySkipList;

/// Per-gap record left by the forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRecord {
    Clip(ClipRecord),
    Kvetsh(KvetshRecord),
}

/// Forward pass output: one record per gap, in gap order.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace {
    pub steps: Vec<StepRecord>,
    pub stats: OpStats,
}

/// Data structure holding the barrier maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BarrierBackend {
    Naive,
    #[default]
    SkipList,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierConfig {
    pub backend: BarrierBackend,
    pub seed: u64,
    pub promote_p: f64,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        BarrierConfig {
            backend: BarrierBackend::SkipList,
            seed: 0,
            promote_p: 0.5,
        }
    }
}

impl From<BarrierBackend> for BarrierConfig {
    fn from(backend: BarrierBackend) -> Self {
        BarrierConfig {
            backend,
            ..Self::default()
        }
    }
}

fn domain_check(y: &[f64], link: &BregmanLink) -> Result<Vec<f64>> {
    y.iter()
        .enumerate()
        .map(|(i, &v)| {
            if link.contains(v) {
                Ok(link.forward(v))
            } else {
                let (lo, hi) = link.domain();
                Err(Error::OutsideDomain {
                    index: i,
                    value: v,
                    lo,
                    hi,
                })
            }
        })
        .collect()
}

/// How `β|x|` enters link space: a jump at `∇φ(0)`, or a constant shift when
/// zero lies outside the link's domain.
#[derive(Debug, Clone, Copy)]
enum SparseShape {
    None,
    Jump(f64),
    Shift(f64),
}

fn sparse_shape(link: &BregmanLink) -> SparseShape {
    let (lo, hi) = link.domain();
    if lo >= 0.0 {
        SparseShape::Shift(1.0)
    } else if hi <= 0.0 {
        SparseShape::Shift(-1.0)
    } else {
        SparseShape::Jump(link.forward(0.0))
    }
}

/// Runs the clip-based forward pass for the lasso family and returns the
/// trace and the link-space value of the first coordinate.
pub fn lasso_forward(problem: &Problem) -> Result<(ForwardTrace, f64)> {
    problem.validate()?;
    let y = problem
        .y
        .as_scalar()
        .ok_or_else(|| Error::InvalidParameter("expected scalar observations".into()))?;
    let c = domain_check(y, &problem.link)?;
    let n = y.len();
    let (lo, hi, beta): (Vec<f64>, Vec<f64>, Option<&[f64]>) = match &problem.penalty {
        PenaltySpec::FusedLasso { lambda } => (lambda.iter().map(|l| -l).collect(), lambda.clone(), None),
        PenaltySpec::SparseFused { lambda, beta } => (lambda.iter().map(|l| -l).collect(), lambda.clone(), Some(beta)),
        PenaltySpec::Asymmetric { hi, lo } => (lo.clone(), hi.clone(), None),
        PenaltySpec::Isotonic => (vec![0.0; n - 1], vec![f64::INFINITY; n - 1], None),
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other:?} is not a clip-family penalty"
            )))
        }
    };
    let shape = match beta {
        Some(_) => sparse_shape(&problem.link),
        None => SparseShape::None,
    };
    let mut map = BreakpointList::zero();
    let absorb = |map: &mut BreakpointList, i: usize| match shape {
        SparseShape::None => map.add_shift(c[i]),
        SparseShape::Jump(at) => {
            map.add_shift(c[i]);
            map.add_jump(at, beta.expect("sparse")[i]);
        }
        SparseShape::Shift(sign) => map.add_shift(c[i] - sign * beta.expect("sparse")[i]),
    };
    let mut steps = vec![
        StepRecord::Clip(ClipRecord {
            z_minus: 0.0,
            z_plus: 0.0,
            step_index: 0
        });
        n - 1
    ];
    for i in (1..n).rev() {
        absorb(&mut map, i);
        let rec = map.clip(lo[i - 1], hi[i - 1], i - 1)?;
        steps[i - 1] = StepRecord::Clip(rec);
    }
    absorb(&mut map, 0);
    let u1 = map.zero_crossing()?;
    Ok((
        ForwardTrace {
            steps,
            stats: map.stats(),
        },
        u1,
    ))
}

fn nudge_within(x: f64, center: f64, lambda: f64) -> f64 {
    let mut v = x;
    while v - center > lambda {
        v = v.next_down();
    }
    while center - v > lambda {
        v = v.next_up();
    }
    v
}

/// Reads the sequence off the trace, starting from the link-space value
/// `u1` of the first coordinate. Returns primal values.
pub fn backtrack(trace: &ForwardTrace, u1: f64, link: &BregmanLink) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(trace.steps.len() + 1);
    let mut u = u1;
    x.push(link.inverse(u));
    for step in &trace.steps {
        match *step {
            StepRecord::Clip(rec) => {
                if rec.z_minus > rec.z_plus {
                    return Err(Error::Internal(format!(
                        "inconsistent clip record at gap {}",
                        rec.step_index
                    )));
                }
                u = u.clamp(rec.z_minus, rec.z_plus);
                x.push(link.inverse(u));
            }
            StepRecord::Kvetsh(rec) => {
                let prev = u;
                u = nudge_within(rec.z.clamp(prev - rec.lambda, prev + rec.lambda), prev, rec.lambda);
                x.push(u);
            }
        }
    }
    Ok(x)
}

/// Closed interval, possibly unbounded.
#[derive(Debug, Clone, Copy)]
struct Iv(f64, f64);

impl Iv {
    fn point(v: f64) -> Self {
        Iv(v, v)
    }

    fn meet(self, o: Iv) -> Option<Iv> {
        let lo = self.0.max(o.0);
        let hi = self.1.min(o.1);
        (lo <= hi).then_some(Iv(lo, hi))
    }

    fn project(self, v: f64) -> f64 {
        v.clamp(self.0, self.1)
    }

    /// Point of `self` nearest to the interval `o`.
    fn nearest_to(self, o: Iv) -> f64 {
        if self.1 < o.0 {
            self.1
        } else {
            self.0
        }
    }
}

/// Subdifferential of the gap penalty at `d = xᵢ − xᵢ₊₁`.
fn gap_subdiff(penalty: &PenaltySpec, i: usize, d: f64, tol: f64) -> Iv {
    let asym = |hi: f64, lo: f64| {
        if d > tol {
            Iv::point(hi)
        } else if d < -tol {
            Iv::point(lo)
        } else {
            Iv(lo, hi)
        }
    };
    match penalty {
        PenaltySpec::FusedLasso { lambda } | PenaltySpec::SparseFused { lambda, .. } => asym(lambda[i], -lambda[i]),
        PenaltySpec::Asymmetric { hi, lo } => asym(hi[i], lo[i]),
        PenaltySpec::Isotonic => asym(f64::INFINITY, 0.0),
        PenaltySpec::Barrier { lambda } => barrier_subdiff(lambda[i], d, tol),
        _ => Iv(f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// `tol` absorbs the rounding of a difference that sits on the boundary.
fn barrier_subdiff(lambda: f64, d: f64, tol: f64) -> Iv {
    if d >= lambda - tol {
        Iv(0.0, f64::INFINITY)
    } else if d <= -lambda + tol {
        Iv(f64::NEG_INFINITY, 0.0)
    } else {
        Iv::point(0.0)
    }
}

/// Range of `∇hᵢ(xᵢ)` in link space.
fn data_subdiff(problem: &Problem, i: usize, x: f64, y: f64) -> Iv {
    let g = problem.link.forward(x) - problem.link.forward(y);
    if let PenaltySpec::SparseFused { beta, .. } = &problem.penalty {
        let b = beta[i];
        let tol = 1e-12 * (1.0 + y.abs());
        if x > tol {
            Iv::point(g + b)
        } else if x < -tol {
            Iv::point(g - b)
        } else {
            Iv(g - b, g + b)
        }
    } else {
        Iv::point(g)
    }
}

/// Dual sequence consistent with `x`, found by propagating feasible intervals
/// forward from `α₀ = 0` and selecting backward from `αₙ = 0`.
pub fn recover_dual(problem: &Problem, x: &[f64]) -> Vec<f64> {
    let y = problem.y.as_scalar().expect("scalar problem");
    let n = x.len();
    if n < 2 {
        return Vec::new();
    }
    let grads: Vec<Iv> = (0..n).map(|i| data_subdiff(problem, i, x[i], y[i])).collect();
    // reach[i]: feasible values of αᵢ given α₀ = 0 (index 0 unused)
    let mut reach = vec![Iv::point(0.0); n];
    for i in 1..n {
        let prev = reach[i - 1];
        let g = grads[i - 1];
        let cand = Iv(prev.0 - g.1, prev.1 - g.0);
        let tol = 1e-12 * (1.0 + x[i - 1].abs() + x[i].abs());
        let s = gap_subdiff(&problem.penalty, i - 1, x[i - 1] - x[i], tol);
        reach[i] = cand.meet(s).unwrap_or_else(|| Iv::point(s.nearest_to(cand)));
    }
    let mut alpha = vec![0.0; n - 1];
    let mut next = 0.0;
    for i in (1..n).rev() {
        // αᵢ₋₁ ∈ αᵢ + ∂hᵢ(xᵢ)
        let g = grads[i];
        let target = Iv(next + g.0, next + g.1);
        let mid = if g.0 == g.1 {
            target.0
        } else {
            0.5 * (target.0 + target.1)
        };
        let chosen = match reach[i].meet(target) {
            Some(iv) => iv.project(mid),
            None => reach[i].nearest_to(target),
        };
        alpha[i - 1] = chosen;
        next = chosen;
    }
    alpha
}

fn finish_exact(problem: &Problem, x: Vec<f64>) -> Result<SolverResult> {
    let alpha = recover_dual(problem, &x);
    SolverResult::finish(problem, Signal::Scalar(x), Signal::Scalar(alpha), 1, Status::Exact)
}

fn solve_lasso_family(problem: &Problem) -> Result<SolverResult> {
    let (trace, u1) = lasso_forward(problem)?;
    let x = backtrack(&trace, u1, &problem.link)?;
    finish_exact(problem, x)
}

/// Minimizes `Σ D_φ(xᵢ, yᵢ) + Σ λᵢ |xᵢ − xᵢ₊₁|`.
pub fn fused_lasso(y: &[f64], lambda: &[f64], link: &BregmanLink) -> Result<SolverResult> {
    let p = Problem::with_link(
        Signal::Scalar(y.to_vec()),
        PenaltySpec::FusedLasso {
            lambda: lambda.to_vec(),
        },
        link.clone(),
    )?;
    solve_lasso_family(&p)
}

/// Fused lasso plus `Σ βᵢ |xᵢ|`.
pub fn sparse_fused_lasso(y: &[f64], lambda: &[f64], beta: &[f64], link: &BregmanLink) -> Result<SolverResult> {
    let p = Problem::with_link(
        Signal::Scalar(y.to_vec()),
        PenaltySpec::SparseFused {
            lambda: lambda.to_vec(),
            beta: beta.to_vec(),
        },
        link.clone(),
    )?;
    solve_lasso_family(&p)
}

/// Gap penalty `hiᵢ [δ]₊ − loᵢ [−δ]₊` with `δ = xᵢ − xᵢ₊₁`.
pub fn asymmetric_fused(y: &[f64], lambda_hi: &[f64], lambda_lo: &[f64], link: &BregmanLink) -> Result<SolverResult> {
    let p = Problem::with_link(
        Signal::Scalar(y.to_vec()),
        PenaltySpec::Asymmetric {
            hi: lambda_hi.to_vec(),
            lo: lambda_lo.to_vec(),
        },
        link.clone(),
    )?;
    solve_lasso_family(&p)
}

/// Best non-decreasing fit.
pub fn isotonic(y: &[f64], link: &BregmanLink) -> Result<SolverResult> {
    let p = Problem::with_link(Signal::Scalar(y.to_vec()), PenaltySpec::Isotonic, link.clone())?;
    let mut res = solve_lasso_family(&p)?;
    if let Signal::Scalar(x) = &mut res.x {
        // clamping in link space is monotone; guard against inverse-link rounding
        for i in 1..x.len() {
            if x[i] < x[i - 1] {
                x[i] = x[i - 1];
            }
        }
    }
    Ok(res)
}

/// Barrier forward and backward passes. `lambda` may contain zeros.
/// Returns the fit and the number of search visits (skip list) or knot
/// visits (naive list).
pub(crate) fn barrier_path(y: &[f64], lambda: &[f64], cfg: &BarrierConfig) -> Result<(Vec<f64>, usize)> {
    let n = y.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty observation sequence".into()));
    }
    if lambda.len() != n - 1 {
        return Err(crate::error::shape(n - 1, lambda.len()));
    }
    let mut steps = vec![StepRecord::Kvetsh(KvetshRecord { z: 0.0, lambda: 0.0 }); n - 1];
    let (u1, visited) = match cfg.backend {
        BarrierBackend::Naive => {
            let mut map = BreakpointList::zero();
            for i in (1..n).rev() {
                map.add_shift(y[i]);
                let z = map.zero_crossing()?;
                steps[i - 1] = StepRecord::Kvetsh(map.kvetsh(z, lambda[i - 1])?);
            }
            map.add_shift(y[0]);
            let u1 = map.zero_crossing()?;
            (u1, map.stats().visited)
        }
        BarrierBackend::SkipList => {
            let mut list = LazySkipList::new(n, cfg.seed, cfg.promote_p)?;
            for i in (1..n).rev() {
                list.add_shift(y[i]);
                let path = list.find_zero()?;
                list.kvetsh(&path, lambda[i - 1])?;
                steps[i - 1] = StepRecord::Kvetsh(KvetshRecord {
                    z: path.z,
                    lambda: lambda[i - 1],
                });
            }
            list.add_shift(y[0]);
            let u1 = list.zero_crossing()?;
            (u1, list.visited())
        }
    };
    let trace = ForwardTrace {
        steps,
        stats: OpStats::default(),
    };
    Ok((backtrack(&trace, u1, &BregmanLink::Squared)?, visited))
}

/// Minimizes `Σ ½(xᵢ − yᵢ)²` subject to `|xᵢ₊₁ − xᵢ| ≤ λᵢ`.
pub fn fused_barrier(y: &[f64], lambda: &[f64], backend: impl Into<BarrierConfig>) -> Result<SolverResult> {
    Ok(fused_barrier_counted(y, lambda, &backend.into())?.0)
}

/// [`fused_barrier`] that also reports the number of visited vertices.
pub fn fused_barrier_counted(y: &[f64], lambda: &[f64], cfg: &BarrierConfig) -> Result<(SolverResult, usize)> {
    let p = Problem::new(
        Signal::Scalar(y.to_vec()),
        PenaltySpec::Barrier {
            lambda: lambda.to_vec(),
        },
    )?;
    let (x, visited) = barrier_path(y, lambda, cfg)?;
    Ok((finish_exact(&p, x)?, visited))
}

/// Dispatches any scalar difference penalty to its exact solver.
pub fn solve(problem: &Problem) -> Result<SolverResult> {
    problem.validate()?;
    match &problem.penalty {
        PenaltySpec::Barrier { lambda } => {
            let y = problem.y.as_scalar().expect("validated");
            let (x, _) = barrier_path(y, lambda, &BarrierConfig::default())?;
            finish_exact(problem, x)
        }
        PenaltySpec::KthOrder { .. } => Err(Error::InvalidParameter(
            "k-th order penalties are solved by the high-order module".into(),
        )),
        p if p.is_multivariate() => Err(Error::InvalidParameter(
            "multivariate penalty given to a scalar solver".into(),
        )),
        _ => solve_lasso_family(problem),
    }
}
