//! Reference solvers and synthetic instance generators.
//!
//! [`brute_force_solve`] shares no code with the exact solvers. It runs
//! cyclic coordinate ascent on the dual problem
//!
//! `max_α  −Σᵢ hᵢ*(αᵢ₋₁ − αᵢ) − Σᵢ gᵢ*(αᵢ)`
//!
//! reads the primal off the dual through `xᵢ = ∇hᵢ*(αᵢ₋₁ − αᵢ)`, repairs
//! feasibility where the penalty is a constraint, and stops once the duality
//! gap certifies the requested accuracy.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::highorder::DifferenceOperator;
use crate::link::BregmanLink;
use crate::problem::{evaluate_objective, PenaltySpec, Problem, Signal};

/// Largest `n · d` accepted by [`brute_force_solve`].
pub const ORACLE_MAX_SIZE: usize = 2000;

/// Coordinate sweeps allowed before giving up.
pub const ORACLE_MAX_SWEEPS: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x: Signal,
    pub alpha: Signal,
    pub objective: f64,
    /// Certified bound on `objective − optimum`.
    pub gap: f64,
    pub sweeps: usize,
}

/// Minimizer of `problem` with objective certified within `tol` of optimal.
pub fn brute_force_solve(problem: &Problem, tol: f64) -> Result<OracleSolution> {
    problem.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let size = problem.n() * problem.y.dim().max(1);
    if size > ORACLE_MAX_SIZE {
        return Err(Error::InvalidParameter(format!(
            "reference solver is limited to n·d <= {ORACLE_MAX_SIZE}, got {size}"
        )));
    }
    match (&problem.y, &problem.penalty) {
        (Signal::Scalar(y), PenaltySpec::KthOrder { k, lambda }) => kth_order_oracle(problem, y, *k, *lambda, tol),
        (Signal::Scalar(y), PenaltySpec::Asymmetric { hi, lo }) if hi.iter().chain(lo).any(|v| v.is_infinite()) => {
            scalar_oracle(&exact_penalty(problem, y, hi, lo)?, y, tol)
        }
        (Signal::Scalar(y), _) => scalar_oracle(problem, y, tol),
        (Signal::Vector(y), PenaltySpec::MvSquared { gap_weights }) => {
            mv_squared_dense(problem, y, gap_weights.as_deref())
        }
        (Signal::Vector(y), _) => vector_oracle(problem, y, tol),
    }
}

/// Pool-adjacent-violators: the non-decreasing sequence closest to `v` in
/// weighted squared error.
pub fn pava(v: &[f64], w: Option<&[f64]>) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(v.len());
    for (i, &val) in v.iter().enumerate() {
        let wi = w.map_or(1.0, |w| w[i]);
        let mut cur = (val, wi, 1usize);
        while let Some(&(m, pw, cnt)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = pw + cur.1;
            cur = ((m * pw + cur.0 * cur.1) / tw, tw, cnt + cur.2);
        }
        blocks.push(cur);
    }
    blocks.iter().flat_map(|&(m, _, c)| std::iter::repeat_n(m, c)).collect()
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Per-coordinate data term in conjugate form.
struct DataTerm<'a> {
    link: &'a BregmanLink,
    y: f64,
    c: f64,
    beta: f64,
    /// Position of zero in link space, when zero is inside the domain.
    zero_u: Option<f64>,
    /// Sign of x when zero is outside the domain.
    fixed_sign: f64,
}

impl DataTerm<'_> {
    /// `∇h*(s)`: the primal value whose data subgradient equals `s`.
    fn primal(&self, s: f64) -> f64 {
        let u = self.c + s;
        if self.beta == 0.0 {
            return self.link.inverse(u);
        }
        match self.zero_u {
            Some(u0) => {
                if u - self.beta > u0 {
                    self.link.inverse(u - self.beta)
                } else if u + self.beta < u0 {
                    self.link.inverse(u + self.beta)
                } else {
                    0.0
                }
            }
            None => self.link.inverse(u - self.fixed_sign * self.beta),
        }
    }

    fn value(&self, x: f64) -> f64 {
        self.link.divergence(x, self.y) + self.beta * x.abs()
    }

    /// `h*(s)` by the Fenchel equality.
    fn conjugate(&self, s: f64) -> f64 {
        let x = self.primal(s);
        s * x - self.value(x)
    }
}

#[derive(Debug, Clone, Copy)]
enum GapConj {
    Box(f64, f64),
    /// `λ|α|`
    Abs(f64),
}

impl GapConj {
    fn value(&self, a: f64) -> f64 {
        match *self {
            GapConj::Box(..) => 0.0,
            GapConj::Abs(l) => l * a.abs(),
        }
    }
}

/// Root of a non-decreasing scalar function, starting near `guess`.
fn monotone_root(f: impl Fn(f64) -> f64, guess: f64) -> f64 {
    let mut step = 1.0;
    let (mut lo, mut hi) = (guess - step, guess + step);
    while f(lo) > 0.0 {
        step *= 2.0;
        lo = guess - step;
        if step > 1e300 {
            break;
        }
    }
    step = 1.0;
    while f(hi) < 0.0 {
        step *= 2.0;
        hi = guess + step;
        if step > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Replaces infinite asymmetric weights by a finite one exceeding every
/// optimal dual magnitude. The optimum lies in the range of the data, so
/// `|αᵢ| ≤ n · (max c − min c)` and the penalized problem has the same
/// minimizer.
fn exact_penalty(problem: &Problem, y: &[f64], hi: &[f64], lo: &[f64]) -> Result<Problem> {
    let c: Vec<f64> = y.iter().map(|&v| problem.link.forward(v)).collect();
    let spread = c.iter().copied().fold(f64::NEG_INFINITY, f64::max) - c.iter().copied().fold(f64::INFINITY, f64::min);
    let big = 2.0 * y.len() as f64 * spread + 1.0;
    Problem::with_link(
        problem.y.clone(),
        PenaltySpec::Asymmetric {
            hi: hi.iter().map(|v| v.min(big)).collect(),
            lo: lo.iter().map(|v| v.max(-big)).collect(),
        },
        problem.link.clone(),
    )
}

fn scalar_oracle(problem: &Problem, y: &[f64], tol: f64) -> Result<OracleSolution> {
    let n = y.len();
    let link = &problem.link;
    let (dlo, dhi) = link.domain();
    let betas: Vec<f64> = match &problem.penalty {
        PenaltySpec::SparseFused { beta, .. } => beta.clone(),
        _ => vec![0.0; n],
    };
    let zero_u = (dlo < 0.0 && dhi > 0.0).then(|| link.forward(0.0));
    let terms: Vec<DataTerm> = (0..n)
        .map(|i| DataTerm {
            link,
            y: y[i],
            c: link.forward(y[i]),
            beta: betas[i],
            zero_u,
            fixed_sign: if dlo >= 0.0 { 1.0 } else { -1.0 },
        })
        .collect();
    let gaps: Vec<GapConj> = (0..n.saturating_sub(1))
        .map(|i| match &problem.penalty {
            PenaltySpec::FusedLasso { lambda } | PenaltySpec::SparseFused { lambda, .. } => {
                GapConj::Box(-lambda[i], lambda[i])
            }
            PenaltySpec::Asymmetric { hi, lo } => GapConj::Box(lo[i], hi[i]),
            PenaltySpec::Isotonic => GapConj::Box(0.0, f64::INFINITY),
            PenaltySpec::Barrier { lambda } => GapConj::Abs(lambda[i]),
            _ => unreachable!("scalar penalty"),
        })
        .collect();
    let closed_form = link.is_squared() && betas.iter().all(|&b| b == 0.0);
    let mut alpha = vec![0.0; n.saturating_sub(1)];
    let at = |a: &[f64], i: isize| -> f64 {
        if i < 0 || i as usize >= a.len() {
            0.0
        } else {
            a[i as usize]
        }
    };

    let certify = |alpha: &[f64]| -> Result<(Vec<f64>, f64, f64)> {
        let mut x: Vec<f64> = (0..n)
            .map(|i| terms[i].primal(at(alpha, i as isize - 1) - at(alpha, i as isize)))
            .collect();
        match &problem.penalty {
            PenaltySpec::Isotonic => {
                let u: Vec<f64> = x.iter().map(|&v| link.forward(v)).collect();
                x = pava(&u, None).into_iter().map(|v| link.inverse(v)).collect();
                for i in 1..n {
                    x[i] = x[i].max(x[i - 1]);
                }
            }
            PenaltySpec::Barrier { lambda } => {
                for i in 1..n {
                    let (lo, hi) = (x[i - 1] - lambda[i - 1], x[i - 1] + lambda[i - 1]);
                    let mut v = x[i].clamp(lo, hi);
                    while v - x[i - 1] > lambda[i - 1] {
                        v = v.next_down();
                    }
                    while x[i - 1] - v > lambda[i - 1] {
                        v = v.next_up();
                    }
                    x[i] = v;
                }
            }
            _ => {}
        }
        let primal = evaluate_objective(problem, &Signal::Scalar(x.clone()))?;
        let mut dual = 0.0;
        for i in 0..n {
            dual -= terms[i].conjugate(at(alpha, i as isize - 1) - at(alpha, i as isize));
        }
        for (g, &a) in gaps.iter().zip(alpha) {
            dual -= g.value(a);
        }
        Ok((x, primal, primal - dual))
    };

    let mut sweeps = 0;
    loop {
        let forward = sweeps % 2 == 0;
        for step in 0..alpha.len() {
            let j = if forward { step } else { alpha.len() - 1 - step };
            let a_prev = at(&alpha, j as isize - 1);
            let a_next = at(&alpha, j as isize + 1);
            let guess = 0.5 * (terms[j].c - terms[j + 1].c + a_prev + a_next);
            let root = if closed_form {
                guess
            } else {
                let (tj, tk) = (&terms[j], &terms[j + 1]);
                match gaps[j] {
                    GapConj::Box(..) => monotone_root(|a| tk.primal(a - a_next) - tj.primal(a_prev - a), guess),
                    GapConj::Abs(_) => guess,
                }
            };
            alpha[j] = match gaps[j] {
                GapConj::Box(lo, hi) => root.clamp(lo, hi),
                GapConj::Abs(l) => soft(root, 0.5 * l),
            };
        }
        sweeps += 1;
        if sweeps % 10 == 0 || alpha.is_empty() {
            let (x, objective, gap) = certify(&alpha)?;
            if gap <= tol {
                return Ok(OracleSolution {
                    x: Signal::Scalar(x),
                    alpha: Signal::Scalar(alpha),
                    objective,
                    gap: gap.max(0.0),
                    sweeps,
                });
            }
            if sweeps >= ORACLE_MAX_SWEEPS {
                return Err(Error::BudgetExhausted {
                    iterations: sweeps,
                    gap,
                });
            }
        }
    }
}

/// Euclidean projection onto the ℓ1 ball of radius `r`, thresholding level
/// found by bisection.
fn project_l1_ball(v: &DVector<f64>, r: f64) -> DVector<f64> {
    if v.lp_norm(1) <= r {
        return v.clone();
    }
    let (mut lo, mut hi) = (0.0, v.amax());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if v.iter().map(|x| (x.abs() - mid).max(0.0)).sum::<f64>() > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v.map(|x| soft(x, hi))
}

/// Euclidean projection onto the ℓ2 ball of radius `r`.
fn project_l2_ball(v: &DVector<f64>, r: f64) -> DVector<f64> {
    let norm = v.norm();
    if norm <= r {
        v.clone()
    } else {
        v * (r / norm)
    }
}

fn vector_oracle(problem: &Problem, y: &DMatrix<f64>, tol: f64) -> Result<OracleSolution> {
    if problem.weights.is_some() {
        return Err(Error::InvalidParameter(
            "reference solver supports weighted data terms only for squared fusion".into(),
        ));
    }
    let (n, d) = (y.nrows(), y.ncols());
    let (scale, l2) = match problem.penalty {
        PenaltySpec::MvL2 { scale } => (scale, true),
        PenaltySpec::MvLinf { scale } => (scale, false),
        _ => unreachable!("vector penalty"),
    };
    let mut alpha = DMatrix::<f64>::zeros(n - 1, d);
    let row = |a: &DMatrix<f64>, i: isize| -> DVector<f64> {
        if i < 0 || i as usize >= n - 1 {
            DVector::zeros(d)
        } else {
            a.row(i as usize).transpose()
        }
    };
    let mut sweeps = 0;
    loop {
        let forward = sweeps % 2 == 0;
        for step in 0..n - 1 {
            let j = if forward { step } else { n - 2 - step };
            let a = (y.row(j).transpose() - y.row(j + 1).transpose()
                + row(&alpha, j as isize - 1)
                + row(&alpha, j as isize + 1))
                * 0.5;
            let p = if l2 {
                project_l2_ball(&a, scale)
            } else {
                project_l1_ball(&a, scale)
            };
            alpha.set_row(j, &p.transpose());
        }
        sweeps += 1;
        if sweeps % 10 == 0 || n == 1 {
            let mut x = y.clone();
            let mut dual = 0.0;
            for i in 0..n {
                let s = row(&alpha, i as isize - 1) - row(&alpha, i as isize);
                let yi = y.row(i).transpose();
                x.set_row(i, &(&yi + &s).transpose());
                dual -= 0.5 * s.norm_squared() + s.dot(&yi);
            }
            let objective = evaluate_objective(problem, &Signal::Vector(x.clone()))?;
            let gap = objective - dual;
            if gap <= tol {
                return Ok(OracleSolution {
                    x: Signal::Vector(x),
                    alpha: Signal::Vector(alpha),
                    objective,
                    gap: gap.max(0.0),
                    sweeps,
                });
            }
            if sweeps >= ORACLE_MAX_SWEEPS {
                return Err(Error::BudgetExhausted {
                    iterations: sweeps,
                    gap,
                });
            }
        }
    }
}

/// Squared fusion has a linear optimality system; solve it densely.
fn mv_squared_dense(problem: &Problem, y: &DMatrix<f64>, w: Option<&[f64]>) -> Result<OracleSolution> {
    let (n, d) = (y.nrows(), y.ncols());
    let nd = n * d;
    let mut m = DMatrix::<f64>::zeros(nd, nd);
    let mut rhs = DVector::<f64>::zeros(nd);
    for i in 0..n {
        let q = match &problem.weights {
            Some(ws) => ws[i].clone(),
            None => DMatrix::identity(d, d),
        };
        let qy = &q * y.row(i).transpose();
        for a in 0..d {
            rhs[i * d + a] = qy[a];
            for b in 0..d {
                m[(i * d + a, i * d + b)] += q[(a, b)];
            }
        }
    }
    for i in 0..n.saturating_sub(1) {
        let wi = w.map_or(1.0, |w| w[i]);
        for a in 0..d {
            let (p, q) = (i * d + a, (i + 1) * d + a);
            m[(p, p)] += wi;
            m[(q, q)] += wi;
            m[(p, q)] -= wi;
            m[(q, p)] -= wi;
        }
    }
    let sol = m
        .cholesky()
        .ok_or_else(|| Error::Internal("squared fusion system is not positive definite".into()))?
        .solve(&rhs);
    let x = DMatrix::from_row_slice(n, d, sol.as_slice());
    let mut alpha = DMatrix::<f64>::zeros(n.saturating_sub(1), d);
    for i in 0..n.saturating_sub(1) {
        let wi = w.map_or(1.0, |w| w[i]);
        alpha.set_row(i, &((x.row(i) - x.row(i + 1)) * wi));
    }
    let objective = evaluate_objective(problem, &Signal::Vector(x.clone()))?;
    Ok(OracleSolution {
        x: Signal::Vector(x),
        alpha: Signal::Vector(alpha),
        objective,
        gap: 0.0,
        sweeps: 1,
    })
}

fn kth_order_oracle(problem: &Problem, y: &[f64], k: usize, lambda: f64, tol: f64) -> Result<OracleSolution> {
    let n = y.len();
    let op = DifferenceOperator::new(n, k)?;
    let coeffs = op.coefficients().to_vec();
    let norm2: f64 = coeffs.iter().map(|c| c * c).sum();
    let m = n - k;
    let mut alpha = vec![0.0; m];
    let mut x = y.to_vec();
    let mut sweeps = 0;
    loop {
        let forward = sweeps % 2 == 0;
        for step in 0..m {
            let r = if forward { step } else { m - 1 - step };
            let dx: f64 = coeffs.iter().enumerate().map(|(j, c)| c * x[r + j]).sum();
            let new = (alpha[r] + dx / norm2).clamp(-lambda, lambda);
            let delta = new - alpha[r];
            if delta != 0.0 {
                for (j, c) in coeffs.iter().enumerate() {
                    x[r + j] -= c * delta;
                }
                alpha[r] = new;
            }
        }
        sweeps += 1;
        if sweeps % 10 == 0 {
            // recompute x to shed accumulated rounding
            let adj = op.apply_transpose(&alpha);
            for i in 0..n {
                x[i] = y[i] - adj[i];
            }
            let objective = evaluate_objective(problem, &Signal::Scalar(x.clone()))?;
            let ynorm: f64 = y.iter().map(|v| v * v).sum();
            let rnorm: f64 = x.iter().map(|v| v * v).sum();
            let gap = objective - 0.5 * (ynorm - rnorm);
            if gap <= tol {
                return Ok(OracleSolution {
                    x: Signal::Scalar(x),
                    alpha: Signal::Scalar(alpha),
                    objective,
                    gap: gap.max(0.0),
                    sweeps,
                });
            }
            if sweeps >= ORACLE_MAX_SWEEPS {
                return Err(Error::BudgetExhausted {
                    iterations: sweeps,
                    gap,
                });
            }
        }
    }
}

/// Norm defining the fusion penalty of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyNorm {
    L2,
    Linf,
}

/// Observations with a known primal-dual optimal pair.
#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub y: DMatrix<f64>,
    pub x_star: DMatrix<f64>,
    pub alpha_star: DMatrix<f64>,
    /// `fused_mask[i]` marks the gap between rows i and i + 1 as fused.
    pub fused_mask: Vec<bool>,
    pub seed: u64,
}

impl SyntheticInstance {
    /// The matching penalty with unit scale.
    pub fn penalty(&self, norm: PenaltyNorm) -> PenaltySpec {
        match norm {
            PenaltyNorm::L2 => PenaltySpec::MvL2 { scale: 1.0 },
            PenaltyNorm::Linf => PenaltySpec::MvLinf { scale: 1.0 },
        }
    }
}

/// `P(R ≤ 1)` for `R ~ Gamma(d, rate)`.
fn erlang_cdf_at_one(d: usize, rate: f64) -> f64 {
    // 1 − Σ_{k<d} e^{−rate} rate^k / k!
    let mut term = (-rate).exp();
    let mut tail = 0.0;
    for k in 0..d {
        if k > 0 {
            term *= rate / k as f64;
        }
        tail += term;
    }
    (1.0 - tail).clamp(0.0, 1.0)
}

/// Rate giving the radial law the requested mass inside the unit ball.
fn rate_for_mass(d: usize, mass: f64) -> f64 {
    let target = mass.clamp(0.01, 0.99);
    let (mut lo, mut hi) = (1e-9, 1.0);
    while erlang_cdf_at_one(d, hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erlang_cdf_at_one(d, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unit vector in the given norm, distributed by the cone measure.
fn random_direction(rng: &mut ChaCha8Rng, d: usize, norm: PenaltyNorm) -> DVector<f64> {
    match norm {
        PenaltyNorm::L2 => loop {
            let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let r = v.norm();
            if r > 1e-12 {
                return v / r;
            }
        },
        PenaltyNorm::Linf => {
            let e = DVector::from_fn(d, |_, _| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln());
            let total = e.sum();
            DVector::from_fn(d, |i, _| {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                s * e[i] / total
            })
        }
    }
}

/// Draws from `∝ exp(−rate‖v‖)` conditioned on `‖v‖ ≤ 1` (inside) or `> 1`.
fn sample_radial(rng: &mut ChaCha8Rng, gamma: &Gamma<f64>, d: usize, norm: PenaltyNorm, inside: bool) -> DVector<f64> {
    let r = loop {
        let r: f64 = gamma.sample(rng);
        if (r <= 1.0) == inside {
            break r;
        }
    };
    random_direction(rng, d, norm) * r
}

/// Subgradient of the penalty norm at a non-zero difference.
fn norm_subgradient(delta: &DVector<f64>, norm: PenaltyNorm) -> DVector<f64> {
    match norm {
        PenaltyNorm::L2 => delta / delta.norm(),
        PenaltyNorm::Linf => {
            let i = delta.iamax();
            let mut g = DVector::zeros(delta.len());
            g[i] = delta[i].signum();
            g
        }
    }
}

/// Random instance of `½‖x − y‖² + Σ‖xᵢ − xᵢ₊₁‖` with known solution.
///
/// Each gap is fused with probability `fuse_prob`. A fused gap gets a dual
/// variable drawn inside the dual unit ball and a zero difference; an
/// unfused gap gets a difference drawn outside the unit ball and the
/// matching subgradient as its dual variable. Directions and radii follow
/// the density `∝ exp(−rate‖·‖)`, in the ℓ1 norm for the ℓ∞ penalty.
pub fn gen_fused(n: usize, d: usize, fuse_prob: f64, norm: PenaltyNorm, seed: u64) -> Result<SyntheticInstance> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("instance needs n >= 1 and d >= 1".into()));
    }
    if !(0.0..=1.0).contains(&fuse_prob) {
        return Err(Error::InvalidParameter(format!(
            "fusion probability must be in [0, 1], got {fuse_prob}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rate = rate_for_mass(d, fuse_prob);
    let gamma = Gamma::new(d as f64, 1.0 / rate).map_err(|e| Error::Internal(e.to_string()))?;
    let mut x = DMatrix::<f64>::zeros(n, d);
    let mut alpha = DMatrix::<f64>::zeros(n.saturating_sub(1), d);
    let mut mask = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..d {
        x[(0, j)] = rng.sample(StandardNormal);
    }
    for i in 0..n.saturating_sub(1) {
        let fused = rng.random::<f64>() < fuse_prob;
        mask.push(fused);
        let (a, delta) = if fused {
            (sample_radial(&mut rng, &gamma, d, norm, true), DVector::zeros(d))
        } else {
            let delta = sample_radial(&mut rng, &gamma, d, norm, false);
            (norm_subgradient(&delta, norm), delta)
        };
        alpha.set_row(i, &a.transpose());
        let next = x.row(i).transpose() - delta;
        x.set_row(i + 1, &next.transpose());
    }
    let mut y = x.clone();
    for i in 0..n {
        if i < n - 1 {
            let r = y.row(i) + alpha.row(i);
            y.set_row(i, &r);
        }
        if i > 0 {
            let r = y.row(i) - alpha.row(i - 1);
            y.set_row(i, &r);
        }
    }
    Ok(SyntheticInstance {
        y,
        x_star: x,
        alpha_star: alpha,
        fused_mask: mask,
        seed,
    })
}

/// `yᵢ = (i − n/2)²/n + U(−ε, ε)` for `i = 1..n`, with `num_shocks` random
/// positions overwritten by `shock_value`.
pub fn gen_quadratic_noise(
    n: usize,
    eps_uniform: f64,
    num_shocks: usize,
    shock_value: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
    }
    if !(eps_uniform >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be non-negative, got {eps_uniform}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n as f64 / 2.0;
    let mut y: Vec<f64> = (1..=n)
        .map(|i| {
            let base = (i as f64 - half).powi(2) / n as f64;
            if eps_uniform > 0.0 {
                base + rng.random_range(-eps_uniform..=eps_uniform)
            } else {
                base
            }
        })
        .collect();
    for _ in 0..num_shocks {
        let i = rng.random_range(0..n);
        y[i] = shock_value;
    }
    Ok(y)
}

/// Scalar instance of the k-th order penalty with known solution.
#[derive(Debug, Clone)]
pub struct KthOrderInstance {
    pub y: Vec<f64>,
    pub x_star: Vec<f64>,
    pub alpha_star: Vec<f64>,
    /// `zero_mask[r]` marks a vanishing k-th difference.
    pub zero_mask: Vec<bool>,
    pub lambda: f64,
}

/// Draws k-th differences that vanish with probability `sparsity`, builds x
/// from them, picks a dual variable inside `(−λ, λ)` on vanishing rows and
/// `±λ` elsewhere, and sets `y = x + Dᵀα`.
pub fn gen_sparse_kth(n: usize, k: usize, sparsity: f64, lambda: f64, seed: u64) -> Result<KthOrderInstance> {
    let op = DifferenceOperator::new(n, k)?;
    if !(0.0..=1.0).contains(&sparsity) || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(
            "sparsity must be in [0, 1] and lambda positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = n - k;
    let mut diffs = vec![0.0; m];
    let mut mask = vec![false; m];
    let mut alpha = vec![0.0; m];
    for r in 0..m {
        if rng.random::<f64>() < sparsity {
            mask[r] = true;
            alpha[r] = lambda * rng.random_range(-0.9..0.9);
        } else {
            let mag = rng.random_range(0.05..1.0);
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            diffs[r] = s * mag;
            alpha[r] = s * lambda;
        }
    }
    // solve the lower-triangular stencil for x given its first k entries
    let coeffs = op.coefficients();
    let mut x = vec![0.0; n];
    for v in x.iter_mut().take(k) {
        *v = rng.sample(StandardNormal);
    }
    for r in 0..m {
        let partial: f64 = (0..k).map(|j| coeffs[j] * x[r + j]).sum();
        x[r + k] = (diffs[r] - partial) / coeffs[k];
    }
    let adj = op.apply_transpose(&alpha);
    let y = x.iter().zip(&adj).map(|(a, b)| a + b).collect();
    Ok(KthOrderInstance {
        y,
        x_star: x,
        alpha_star: alpha,
        zero_mask: mask,
        lambda,
    })
}
