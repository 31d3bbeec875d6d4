//! Solvers for sequences of vectors.
//!
//! Rows of the `n × d` matrices are the sequence elements. Dual variables
//! follow the scalar convention: `αᵢ ∈ ∂gᵢ(xᵢ − xᵢ₊₁)` and
//! `Qᵢ(xᵢ − yᵢ) + αᵢ − αᵢ₋₁ = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{PenaltySpec, Problem, Signal, SolverResult, Status};
use crate::univariate::{barrier_path, BarrierConfig};

/// Affine relation `αᵢ₋₁ = gain · xᵢ + offset` carried by the squared-fusion
/// recursion. Starting from `αₙ = 0`, the gain stays symmetric positive
/// definite and bounded, so no rescaling is needed along the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineDualState {
    pub gain: DMatrix<f64>,
    pub offset: DVector<f64>,
}

fn spd_solve(m: DMatrix<f64>, rhs: &DVector<f64>, index: usize) -> Result<DVector<f64>> {
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite {
        index,
        min_eigenvalue: f64::NAN,
    })?;
    Ok(chol.solve(rhs))
}

/// Minimizes `Σ ½‖xᵢ − yᵢ‖²_{Qᵢ} + Σ (wᵢ/2)‖xᵢ₊₁ − xᵢ‖²` exactly.
///
/// Backward pass: with `αᵢ = Mᵢ₊₁xᵢ₊₁ + mᵢ₊₁` and `xᵢ₊₁ = xᵢ − αᵢ/wᵢ`,
/// `αᵢ = Kᵢ(Mᵢ₊₁xᵢ + mᵢ₊₁)` where `Kᵢ = (I + Mᵢ₊₁/wᵢ)⁻¹`, so
/// `Mᵢ = Qᵢ + KᵢMᵢ₊₁` and `mᵢ = −Qᵢyᵢ + Kᵢmᵢ₊₁`. Then `x₁ = −M₁⁻¹m₁` and a
/// forward pass replays the stored maps.
pub fn mv_squared_weighted(
    y: &DMatrix<f64>,
    q: Option<&[DMatrix<f64>]>,
    gap_weights: Option<&[f64]>,
) -> Result<SolverResult> {
    let problem = match q {
        Some(ws) => Problem::with_weights(y.clone(), ws.to_vec(), gap_weights.map(<[f64]>::to_vec))?,
        None => Problem::new(
            Signal::Vector(y.clone()),
            PenaltySpec::MvSquared {
                gap_weights: gap_weights.map(<[f64]>::to_vec),
            },
        )?,
    };
    let (x, alpha) = match q {
        None => squared_identity(y, gap_weights),
        Some(ws) => squared_general(y, ws, gap_weights)?,
    };
    SolverResult::finish(&problem, Signal::Vector(x), Signal::Vector(alpha), 1, Status::Exact)
}

/// [`mv_squared_weighted`] with unit gap weights.
pub fn mv_squared(y: &DMatrix<f64>, q: Option<&[DMatrix<f64>]>) -> Result<SolverResult> {
    mv_squared_weighted(y, q, None)
}

/// All `Qᵢ = I`: the gains are multiples of the identity.
fn squared_identity(y: &DMatrix<f64>, gap_weights: Option<&[f64]>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, d) = (y.nrows(), y.ncols());
    let w = |i: usize| gap_weights.map_or(1.0, |w| w[i]);
    // gain[i], offset row i describe α_{i−1} as a function of x_i
    let mut gain = vec![0.0; n];
    let mut offset = DMatrix::<f64>::zeros(n, d);
    let mut k = vec![0.0; n.saturating_sub(1)];
    gain[n - 1] = 1.0;
    offset.set_row(n - 1, &(-y.row(n - 1)));
    for i in (0..n - 1).rev() {
        k[i] = 1.0 / (1.0 + gain[i + 1] / w(i));
        gain[i] = 1.0 + k[i] * gain[i + 1];
        let row = -y.row(i) + offset.row(i + 1) * k[i];
        offset.set_row(i, &row);
    }
    let mut x = DMatrix::<f64>::zeros(n, d);
    let mut alpha = DMatrix::<f64>::zeros(n - 1, d);
    x.set_row(0, &(-offset.row(0) / gain[0]));
    for i in 0..n - 1 {
        let a = (x.row(i) * gain[i + 1] + offset.row(i + 1)) * k[i];
        let next = x.row(i) - &a / w(i);
        alpha.set_row(i, &a);
        x.set_row(i + 1, &next);
    }
    (x, alpha)
}

fn squared_general(
    y: &DMatrix<f64>,
    q: &[DMatrix<f64>],
    gap_weights: Option<&[f64]>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, d) = (y.nrows(), y.ncols());
    let w = |i: usize| gap_weights.map_or(1.0, |w| w[i]);
    let eye = DMatrix::<f64>::identity(d, d);
    let mut states: Vec<AffineDualState> = Vec::with_capacity(n);
    let mut ks: Vec<DMatrix<f64>> = vec![eye.clone(); n.saturating_sub(1)];
    states.push(AffineDualState {
        gain: q[n - 1].clone(),
        offset: -(&q[n - 1] * y.row(n - 1).transpose()),
    });
    for i in (0..n - 1).rev() {
        let next = states.last().expect("non-empty");
        let inner = &eye + &next.gain / w(i);
        let k = inner
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Internal(format!("singular recursion step at gap {i}")))?;
        let mut gain = &q[i] + &k * &next.gain;
        gain = (&gain + gain.transpose()) * 0.5;
        let offset = -(&q[i] * y.row(i).transpose()) + &k * &next.offset;
        ks[i] = k;
        states.push(AffineDualState { gain, offset });
    }
    states.reverse();
    let mut x = DMatrix::<f64>::zeros(n, d);
    let mut alpha = DMatrix::<f64>::zeros(n - 1, d);
    let x1 = spd_solve(states[0].gain.clone(), &(-&states[0].offset), 0)?;
    x.set_row(0, &x1.transpose());
    for i in 0..n - 1 {
        let xi = x.row(i).transpose();
        let a = &ks[i] * (&states[i + 1].gain * &xi + &states[i + 1].offset);
        let next = &xi - &a / w(i);
        alpha.set_row(i, &a.transpose());
        x.set_row(i + 1, &next.transpose());
    }
    Ok((x, alpha))
}

/// `‖d‖²/(2ε)` inside the ε-ball, `‖d‖ − ε/2` outside.
pub fn huber(d: &DVector<f64>, epsilon: f64) -> f64 {
    huber_norm(d.norm(), epsilon)
}

pub(crate) fn huber_norm(r: f64, epsilon: f64) -> f64 {
    if r <= epsilon {
        r * r / (2.0 * epsilon)
    } else {
        r - 0.5 * epsilon
    }
}

/// `½‖x − y‖² + Σ huber(xᵢ₊₁ − xᵢ)`.
pub fn huber_objective(y: &DMatrix<f64>, x: &DMatrix<f64>, epsilon: f64) -> f64 {
    let data = 0.5 * (x - y).norm_squared();
    let pen: f64 = (0..x.nrows().saturating_sub(1))
        .map(|i| huber_norm((x.row(i + 1) - x.row(i)).norm(), epsilon))
        .sum();
    data + pen
}

/// Iterative fit plus the surrogate objective recorded after each step.
#[derive(Debug, Clone)]
pub struct SurrogateFit {
    pub result: SolverResult,
    /// Surrogate objective of the starting point followed by every iterate.
    pub surrogate_trace: Vec<f64>,
}

/// Iterate state of the reweighted ℓ2 fusion solver.
#[derive(Debug, Clone)]
pub struct SurrogateState {
    pub x: DMatrix<f64>,
    pub rho: Vec<f64>,
    pub epsilon: f64,
    pub t: usize,
}

impl SurrogateState {
    pub fn new(y: &DMatrix<f64>, epsilon: f64) -> Self {
        let mut s = SurrogateState {
            x: y.clone(),
            rho: vec![epsilon; y.nrows().saturating_sub(1)],
            epsilon,
            t: 0,
        };
        s.refresh_rho();
        s
    }

    fn refresh_rho(&mut self) {
        for (i, r) in self.rho.iter_mut().enumerate() {
            *r = (self.x.row(i + 1) - self.x.row(i)).norm().max(self.epsilon);
        }
    }

    /// One reweighted squared-fusion solve: minimizes
    /// `Σ ½‖xᵢ − yᵢ‖² + Σ ‖xᵢ₊₁ − xᵢ‖²/(2ρᵢ)`.
    pub fn step(&mut self, y: &DMatrix<f64>) {
        let w: Vec<f64> = self.rho.iter().map(|r| 1.0 / r).collect();
        let (x, _) = squared_identity(y, Some(&w));
        self.x = x;
        self.t += 1;
        self.refresh_rho();
    }
}

/// Minimizes `½‖x − y‖² + scale · Σ‖xᵢ₊₁ − xᵢ‖₂` through its Huber
/// surrogate: each iteration solves a squared-fusion problem weighted by
/// `1/ρᵢ`, `ρᵢ = max(‖xᵢ₊₁ − xᵢ‖, ε)`. Stops after `t_max` iterations or
/// when the surrogate decreases by less than 1e-12.
pub fn mv_l2(y: &DMatrix<f64>, scale: f64, epsilon: f64, t_max: usize) -> Result<SurrogateFit> {
    let problem = Problem::new(Signal::Vector(y.clone()), PenaltySpec::MvL2 { scale })?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if t_max == 0 {
        return Err(Error::InvalidParameter("iteration budget must be at least 1".into()));
    }
    let ys = y / scale;
    let mut state = SurrogateState::new(&ys, epsilon);
    let mut trace = vec![huber_objective(&ys, &state.x, epsilon)];
    let mut status = Status::MaxIters;
    if y.nrows() > 1 {
        while state.t < t_max {
            state.step(&ys);
            let cur = huber_objective(&ys, &state.x, epsilon);
            let prev = *trace.last().expect("non-empty");
            trace.push(cur);
            if prev - cur < 1e-12 {
                status = Status::Converged;
                break;
            }
        }
    } else {
        status = Status::Converged;
    }
    let n = y.nrows();
    let mut alpha = DMatrix::<f64>::zeros(n.saturating_sub(1), y.ncols());
    for i in 0..n.saturating_sub(1) {
        let diff = state.x.row(i) - state.x.row(i + 1);
        alpha.set_row(i, &(diff * (scale / state.rho[i])));
    }
    let x = state.x * scale;
    let trace = trace.into_iter().map(|v| v * scale * scale).collect();
    Ok(SurrogateFit {
        result: SolverResult::finish(&problem, Signal::Vector(x), Signal::Vector(alpha), state.t, status)?,
        surrogate_trace: trace,
    })
}

/// `Dᵢ = ‖yᵢ₊₁ − yᵢ‖∞`, an upper bound on the optimal ℓ∞ differences.
pub fn slack_bounds(y: &DMatrix<f64>) -> Vec<f64> {
    (0..y.nrows().saturating_sub(1))
        .map(|i| (y.row(i + 1) - y.row(i)).amax())
        .collect()
}

/// Slack variables and AdaGrad accumulators for the ℓ∞ solver.
#[derive(Debug, Clone)]
pub struct SlackState {
    pub xi: Vec<f64>,
    pub grad_accum: Vec<f64>,
    pub bounds: Vec<f64>,
}

/// Value `L(ξ) = min { ½‖x − y‖² : ‖xᵢ₊₁ − xᵢ‖∞ ≤ ξᵢ } + Σ ξᵢ` with its
/// minimizer and the multipliers of the difference constraints.
fn slack_value(y: &DMatrix<f64>, xi: &[f64]) -> Result<(f64, DMatrix<f64>, DMatrix<f64>)> {
    let (n, d) = (y.nrows(), y.ncols());
    let mut x = DMatrix::<f64>::zeros(n, d);
    let mut alpha = DMatrix::<f64>::zeros(n - 1, d);
    let cfg = BarrierConfig::default();
    for j in 0..d {
        let col: Vec<f64> = y.column(j).iter().copied().collect();
        let (xc, _) = barrier_path(&col, xi, &cfg)?;
        let mut a = 0.0;
        for i in 0..n - 1 {
            a -= xc[i] - col[i];
            alpha[(i, j)] = a;
        }
        for (i, v) in xc.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let value = 0.5 * (&x - y).norm_squared() + xi.iter().sum::<f64>();
    Ok((value, x, alpha))
}

/// Minimizes `½‖x − y‖² + scale · Σ‖xᵢ₊₁ − xᵢ‖∞` by AdaGrad on the slack
/// bounds ξ. Each ξ is evaluated with `d` independent barrier solves; the
/// subgradient is `1 − ‖αᵢ‖₁`. Returns the best iterate found.
pub fn mv_linf(y: &DMatrix<f64>, scale: f64, outer_iters: usize) -> Result<SolverResult> {
    let problem = Problem::new(Signal::Vector(y.clone()), PenaltySpec::MvLinf { scale })?;
    if outer_iters == 0 {
        return Err(Error::InvalidParameter("iteration budget must be at least 1".into()));
    }
    let n = y.nrows();
    if n == 1 {
        let alpha = DMatrix::<f64>::zeros(0, y.ncols());
        return SolverResult::finish(
            &problem,
            Signal::Vector(y.clone()),
            Signal::Vector(alpha),
            0,
            Status::Converged,
        );
    }
    let ys = y / scale;
    let bounds = slack_bounds(&ys);
    let mut state = SlackState {
        xi: bounds.iter().map(|b| 0.5 * b).collect(),
        grad_accum: vec![0.0; n - 1],
        bounds,
    };
    let mut best: Option<(f64, DMatrix<f64>, DMatrix<f64>)> = None;
    for _ in 0..outer_iters {
        let (value, x, alpha) = slack_value(&ys, &state.xi)?;
        for i in 0..n - 1 {
            let u = 1.0 - alpha.row(i).iter().map(|a| a.abs()).sum::<f64>();
            state.grad_accum[i] += u * u;
            let lr = state.bounds[i] / std::f64::consts::SQRT_2;
            state.xi[i] = (state.xi[i] - lr * u / (state.grad_accum[i] + 1e-12).sqrt()).clamp(0.0, state.bounds[i]);
        }
        if best
            .as_ref()
            .is_none_or(|b| value <= b.0 + 4.0 * f64::EPSILON * b.0.abs())
        {
            best = Some((value, x, alpha));
        }
    }
    let (_, x, alpha) = best.expect("at least one iteration");
    SolverResult::finish(
        &problem,
        Signal::Vector(x * scale),
        Signal::Vector(alpha * scale),
        outer_iters,
        Status::MaxIters,
    )
}

/// Norm of the fusion penalty.
pub use crate::oracle::PenaltyNorm;

/// Euclidean projection onto `{w : ‖w‖₁ ≤ r}` by sorting magnitudes.
pub fn project_l1_ball(v: &DVector<f64>, r: f64) -> DVector<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= r {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - r) / (j + 1) as f64;
        if m - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    v.map(|x| x.signum() * (x.abs() - tau).max(0.0))
}

fn project_dual_ball(v: &DVector<f64>, norm: PenaltyNorm, r: f64) -> DVector<f64> {
    match norm {
        PenaltyNorm::L2 => {
            let len = v.norm();
            if len <= r {
                v.clone()
            } else {
                v * (r / len)
            }
        }
        PenaltyNorm::Linf => project_l1_ball(v, r),
    }
}

/// Projected dual gradient with step `eta` for `½‖x − y‖² + scale·Σ‖Δᵢ‖`.
///
/// The update is the simultaneous one
/// `aᵢ ← Π(aᵢ − η(aᵢ − aᵢ₋₁ + yᵢ + aᵢ − aᵢ₊₁ − yᵢ₊₁))` on `aᵢ = −αᵢ`, with
/// primal read-out `xᵢ = yᵢ + aᵢ − aᵢ₋₁`.
pub fn dpg_scaled(y: &DMatrix<f64>, norm: PenaltyNorm, scale: f64, eta: f64, iters: usize) -> Result<SolverResult> {
    let penalty = match norm {
        PenaltyNorm::L2 => PenaltySpec::MvL2 { scale },
        PenaltyNorm::Linf => PenaltySpec::MvLinf { scale },
    };
    let problem = Problem::new(Signal::Vector(y.clone()), penalty)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {eta}"
        )));
    }
    let (n, d) = (y.nrows(), y.ncols());
    let m = n - 1;
    let mut a = DMatrix::<f64>::zeros(m, d);
    let row = |a: &DMatrix<f64>, i: isize| -> DVector<f64> {
        if i < 0 || i as usize >= m {
            DVector::zeros(d)
        } else {
            a.row(i as usize).transpose()
        }
    };
    for _ in 0..iters {
        let mut next = a.clone();
        for i in 0..m {
            let ai = row(&a, i as isize);
            let grad = &ai - row(&a, i as isize - 1) + y.row(i).transpose() + &ai
                - row(&a, i as isize + 1)
                - y.row(i + 1).transpose();
            let p = project_dual_ball(&(ai - grad * eta), norm, scale);
            next.set_row(i, &p.transpose());
        }
        a = next;
    }
    let mut x = y.clone();
    for i in 0..n {
        let r = y.row(i).transpose() + row(&a, i as isize) - row(&a, i as isize - 1);
        x.set_row(i, &r.transpose());
    }
    SolverResult::finish(&problem, Signal::Vector(x), Signal::Vector(-a), iters, Status::MaxIters)
}

/// [`dpg_scaled`] with unit penalty scale.
pub fn dpg(y: &DMatrix<f64>, norm: PenaltyNorm, eta: f64, iters: usize) -> Result<SolverResult> {
    dpg_scaled(y, norm, 1.0, eta, iters)
}

/// `D Dᵀ` for the `(n − 1) × n` first-difference matrix.
pub fn difference_gram(n: usize) -> DMatrix<f64> {
    let m = n.saturating_sub(1);
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            2.0
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Unit vector `αᵢ = (−1)ⁱ/√(n−1)` with `αᵀDDᵀα = 4 − 2/(n−1)`.
pub fn alternating_witness(n: usize) -> DVector<f64> {
    let m = n - 1;
    DVector::from_fn(m, |i, _| {
        let s = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        s / (m as f64).sqrt()
    })
}

/// Tent vector `αᵢ = (n/2 − |i − n/2|)/√(n³/12)` with `‖α‖ ≥ 1` and
/// `αᵀDDᵀα = 12/n²` for even `n`.
pub fn tent_witness(n: usize) -> DVector<f64> {
    let h = n as f64 / 2.0;
    let norm = ((n as f64).powi(3) / 12.0).sqrt();
    DVector::from_fn(n - 1, |i, _| (h - ((i + 1) as f64 - h).abs()) / norm)
}
