use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use seqfit::highorder::kth_order_reweighted;
use seqfit::multivariate::{dpg_scaled, mv_l2, mv_linf, mv_squared_weighted, PenaltyNorm};
use seqfit::oracle::{gen_fused, gen_quadratic_noise, gen_sparse_kth};
use seqfit::problem::FUSION_THRESHOLD;
use seqfit::univariate::{self, BarrierBackend, BarrierConfig};
use seqfit::{kkt_residual, BregmanLink, PenaltySpec, Problem, Signal, SolverResult, Status};

use crate::cli::*;
use crate::error::CliError;
use crate::io::{ensure_dir, matrix_csv, read_column, read_matrix, sibling, write_atomic};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub command: &'static str,
    pub penalty: String,
    pub n: usize,
    pub d: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    pub segments: usize,
    pub iterations: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn status_name(s: Status) -> String {
    match s {
        Status::Exact => "exact",
        Status::Converged => "converged",
        Status::MaxIters => "max_iters",
    }
    .into()
}

fn column(m: &DMatrix<f64>, path: &Path) -> Result<Vec<f64>, CliError> {
    if m.ncols() != 1 {
        return Err(CliError::Parse(format!(
            "{}: expected one column, found {}",
            path.display(),
            m.ncols()
        )));
    }
    Ok(m.column(0).iter().copied().collect())
}

/// A value repeated `len` times or read from a file; exactly one source.
fn per_index(name: &str, value: Option<f64>, file: Option<&Path>, len: usize) -> Result<Vec<f64>, CliError> {
    match (value, file) {
        (Some(_), Some(_)) => Err(config(format!("--{name} and --{name}-file are mutually exclusive"))),
        (Some(v), None) => Ok(vec![v; len]),
        (None, Some(p)) => read_column(p),
        (None, None) => Err(config(format!("--{name} or --{name}-file is required"))),
    }
}

fn write_outputs(common: &Common, result: &SolverResult) -> Result<(), CliError> {
    write_atomic(&common.out, &matrix_csv(&result.x.to_matrix()))?;
    if common.emit_dual {
        write_atomic(
            &sibling(&common.out, "dual"),
            &matrix_csv(&result.dual.alpha.to_matrix()),
        )?;
    }
    Ok(())
}

fn summarize(
    command: &'static str,
    penalty: String,
    problem: &Problem,
    result: &SolverResult,
    started: Instant,
    common: &Common,
    trace: Option<Vec<f64>>,
) -> Result<Summary, CliError> {
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    Ok(Summary {
        schema: SCHEMA,
        command,
        penalty,
        n: problem.y.len(),
        d: problem.y.dim(),
        objective: result.objective,
        kkt_residual: kkt_residual(problem, result)?,
        segments: result.x.segments(FUSION_THRESHOLD),
        iterations: result.iterations,
        status: status_name(result.status),
        wall_time_ms: (!common.no_timing).then_some(elapsed),
        trace: if common.trace { trace } else { None },
    })
}

pub fn smooth(args: &SmoothArgs) -> Result<Summary, CliError> {
    let y = column(&read_matrix(&args.common.input)?, &args.common.input)?;
    let n = y.len();
    let gaps = n - 1;
    let link = match args.link {
        LinkName::Squared => BregmanLink::Squared,
        LinkName::Entropy => BregmanLink::Entropy,
    };
    let lambda_file = args.lambda_file.as_deref();
    let penalty = match args.penalty {
        ScalarPenalty::Fused => PenaltySpec::FusedLasso {
            lambda: per_index("lambda", args.lambda, lambda_file, gaps)?,
        },
        ScalarPenalty::Sparse => PenaltySpec::SparseFused {
            lambda: per_index("lambda", args.lambda, lambda_file, gaps)?,
            beta: per_index("beta", args.beta, args.beta_file.as_deref(), n)?,
        },
        ScalarPenalty::Asymmetric => {
            let (hi, lo) = match (args.lambda_hi, args.lambda_lo, args.lambda) {
                (Some(hi), Some(lo), None) => (hi, lo),
                (None, None, Some(l)) => (l, -l),
                _ => {
                    return Err(config(
                        "asymmetric needs --lambda-hi and --lambda-lo (or a symmetric --lambda)",
                    ))
                }
            };
            PenaltySpec::Asymmetric {
                hi: vec![hi; gaps],
                lo: vec![lo; gaps],
            }
        }
        ScalarPenalty::Isotonic => PenaltySpec::Isotonic,
        ScalarPenalty::Barrier => {
            if args.link != LinkName::Squared {
                return Err(config("the barrier penalty supports only the squared link"));
            }
            PenaltySpec::Barrier {
                lambda: per_index("lambda", args.lambda, lambda_file, gaps)?,
            }
        }
    };
    let problem = Problem::with_link(Signal::Scalar(y.clone()), penalty, link)?;
    let started = Instant::now();
    let result = match &problem.penalty {
        PenaltySpec::Barrier { lambda } => {
            let backend = match args.backend {
                BackendName::Naive => BarrierBackend::Naive,
                BackendName::Skiplist => BarrierBackend::SkipList,
            };
            let cfg = BarrierConfig {
                seed: args.seed,
                ..BarrierConfig::from(backend)
            };
            univariate::fused_barrier_counted(&y, lambda, &cfg)?.0
        }
        _ => univariate::solve(&problem)?,
    };
    write_outputs(&args.common, &result)?;
    let name = args.penalty.to_possible_value().expect("named").get_name().to_string();
    summarize("smooth", name, &problem, &result, started, &args.common, None)
}

pub fn smooth_mv(args: &SmoothMvArgs) -> Result<Summary, CliError> {
    let y = read_matrix(&args.common.input)?;
    let n = y.nrows();
    if args.lambda.is_some() && args.lambda_file.is_some() {
        return Err(config("--lambda and --lambda-file are mutually exclusive"));
    }
    if args.lambda_file.is_some() && args.penalty != MvPenalty::MvSquared {
        return Err(config("--lambda-file applies only to mv-squared"));
    }
    let scale = args.lambda.unwrap_or(1.0);
    let started = Instant::now();
    let mut trace = None;
    let (penalty, result) = match args.penalty {
        MvPenalty::MvSquared => {
            let weights = match &args.lambda_file {
                Some(p) => Some(read_column(p)?),
                None => args.lambda.map(|w| vec![w; n.saturating_sub(1)]),
            };
            let r = mv_squared_weighted(&y, None, weights.as_deref())?;
            (PenaltySpec::MvSquared { gap_weights: weights }, r)
        }
        MvPenalty::MvL2 => {
            let fit = mv_l2(&y, scale, args.epsilon, args.iters)?;
            trace = Some(fit.surrogate_trace);
            (PenaltySpec::MvL2 { scale }, fit.result)
        }
        MvPenalty::MvLinf => (PenaltySpec::MvLinf { scale }, mv_linf(&y, scale, args.iters)?),
        MvPenalty::DpgL2 => (
            PenaltySpec::MvL2 { scale },
            dpg_scaled(&y, PenaltyNorm::L2, scale, args.eta, args.iters)?,
        ),
        MvPenalty::DpgLinf => (
            PenaltySpec::MvLinf { scale },
            dpg_scaled(&y, PenaltyNorm::Linf, scale, args.eta, args.iters)?,
        ),
    };
    let problem = Problem::new(Signal::Vector(y), penalty)?;
    write_outputs(&args.common, &result)?;
    let name = args.penalty.to_possible_value().expect("named").get_name().to_string();
    summarize("smooth-mv", name, &problem, &result, started, &args.common, trace)
}

pub fn trend(args: &TrendArgs) -> Result<Summary, CliError> {
    let y = column(&read_matrix(&args.common.input)?, &args.common.input)?;
    let problem = Problem::new(
        Signal::Scalar(y.clone()),
        PenaltySpec::KthOrder {
            k: args.order,
            lambda: args.lambda,
        },
    )?;
    let started = Instant::now();
    let fit = kth_order_reweighted(&y, args.order, args.lambda, args.epsilon, args.iters)?;
    write_outputs(&args.common, &fit.result)?;
    summarize(
        "trend",
        format!("order-{}", args.order),
        &problem,
        &fit.result,
        started,
        &args.common,
        Some(fit.surrogate_trace),
    )
}

/// One row of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub sparsity: f64,
    pub distance_to_truth: f64,
    pub recovery_rate: f64,
    pub false_discovery: f64,
    pub wall_time_ms: f64,
}

pub const BENCH_HEADER: &str = "method,sparsity,distance_to_truth,recovery_rate,false_discovery,wall_time";

struct CellScore {
    distance: f64,
    recovery: f64,
    false_discovery: f64,
    ms: f64,
}

fn score(x: &DMatrix<f64>, truth: &DMatrix<f64>, mask: &[bool], ms: f64) -> CellScore {
    let (mut hit, mut fused, mut wrong, mut merged) = (0usize, 0usize, 0usize, 0usize);
    for (i, &f) in mask.iter().enumerate() {
        let m = (x.row(i + 1) - x.row(i)).norm() < FUSION_THRESHOLD;
        fused += f as usize;
        hit += (f && m) as usize;
        wrong += (!f && m) as usize;
        merged += m as usize;
    }
    CellScore {
        distance: (x - truth).norm(),
        recovery: if fused == 0 { 1.0 } else { hit as f64 / fused as f64 },
        false_discovery: if merged == 0 { 0.0 } else { wrong as f64 / merged as f64 },
        ms,
    }
}

fn parse_levels(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: f64 = s
                .parse()
                .map_err(|_| config(format!("sparsity level {s:?} is not a number")))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(config(format!("sparsity level {v} is outside [0, 1]")))
            }
        })
        .collect()
}

fn bench_methods(norm: NormChoice) -> Vec<(&'static str, PenaltyNorm, bool)> {
    let mut out = Vec::new();
    if norm != NormChoice::Linf {
        out.push(("mv-l2", PenaltyNorm::L2, false));
        out.push(("dpg-l2", PenaltyNorm::L2, true));
    }
    if norm != NormChoice::L2 {
        out.push(("mv-linf", PenaltyNorm::Linf, false));
        out.push(("dpg-linf", PenaltyNorm::Linf, true));
    }
    out
}

/// Runs the sweep and returns rows ordered by sparsity level, then method.
pub fn bench_rows(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let levels = parse_levels(&args.sparsity)?;
    if args.n < 2 || args.d == 0 || args.seeds == 0 || args.iters == 0 {
        return Err(config("bench needs n >= 2, d >= 1, seeds >= 1 and iters >= 1"));
    }
    let methods = bench_methods(args.norm);
    let cells: Vec<(usize, usize, u64)> = (0..levels.len())
        .flat_map(|l| (0..methods.len()).flat_map(move |m| (0..args.seeds).map(move |s| (l, m, s))))
        .collect();
    let scores: Vec<Result<CellScore, CliError>> = cells
        .par_iter()
        .map(|&(l, m, s)| {
            let (_, norm, baseline) = methods[m];
            let seed = args.seed.wrapping_add(1000 * l as u64).wrapping_add(s);
            let inst = gen_fused(args.n, args.d, levels[l], norm, seed)?;
            let started = Instant::now();
            let fit = match (baseline, norm) {
                (true, _) => dpg_scaled(&inst.y, norm, 1.0, args.eta, args.iters)?,
                (false, PenaltyNorm::L2) => mv_l2(&inst.y, 1.0, args.epsilon, args.iters)?.result,
                (false, PenaltyNorm::Linf) => mv_linf(&inst.y, 1.0, args.iters)?,
            };
            let ms = if args.no_timing {
                0.0
            } else {
                started.elapsed().as_secs_f64() * 1e3
            };
            let x = fit.x.as_vector().expect("multivariate solution");
            Ok(score(x, &inst.x_star, &inst.fused_mask, ms))
        })
        .collect();
    let mut rows = Vec::new();
    let k = args.seeds as usize;
    for (chunk, cell) in scores.chunks(k).zip(cells.chunks(k)) {
        let (l, m, _) = cell[0];
        let (mut dist, mut rec, mut fdr, mut ms) = (0.0, 0.0, 0.0, 0.0);
        for s in chunk {
            let s = s.as_ref().map_err(|e| CliError::Solver(e.to_string()))?;
            dist += s.distance;
            rec += s.recovery;
            fdr += s.false_discovery;
            ms += s.ms;
        }
        let kf = k as f64;
        rows.push(BenchRow {
            method: methods[m].0,
            sparsity: levels[l],
            distance_to_truth: dist / kf,
            recovery_rate: rec / kf,
            false_discovery: fdr / kf,
            wall_time_ms: ms / kf,
        });
    }
    Ok(rows)
}

pub fn bench(args: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    let rows = bench_rows(args)?;
    let mut csv = format!("{BENCH_HEADER}\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, r.sparsity, r.distance_to_truth, r.recovery_rate, r.false_discovery, r.wall_time_ms
        ));
    }
    write_atomic(&args.out, &csv)?;
    if let Some(dir) = &args.plot_dir {
        ensure_dir(dir)?;
        for (method, _, _) in bench_methods(args.norm) {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let series = |f: fn(&BenchRow) -> f64| -> String {
                let mut s = String::from("x,y\n");
                for r in &mine {
                    s.push_str(&format!("{},{}\n", r.sparsity, f(r)));
                }
                s
            };
            write_atomic(
                &dir.join(format!("{method}_distance.csv")),
                &series(|r| r.distance_to_truth),
            )?;
            write_atomic(
                &dir.join(format!("{method}_recovery.csv")),
                &series(|r| r.recovery_rate),
            )?;
        }
    }
    Ok(rows)
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let mask_csv = |mask: &[bool]| mask.iter().map(|&b| if b { "1\n" } else { "0\n" }).collect::<String>();
    match args.kind {
        GenKind::Fused => {
            let norm = match args.norm {
                NormChoice::L2 => PenaltyNorm::L2,
                NormChoice::Linf => PenaltyNorm::Linf,
                NormChoice::Both => return Err(config("gen needs --norm l2 or --norm linf")),
            };
            let inst = gen_fused(args.n, args.d, args.sparsity, norm, args.seed)?;
            write_atomic(&args.out, &matrix_csv(&inst.y))?;
            write_atomic(&sibling(&args.out, "truth"), &matrix_csv(&inst.x_star))?;
            write_atomic(&sibling(&args.out, "mask"), &mask_csv(&inst.fused_mask))?;
            if args.emit_dual {
                write_atomic(&sibling(&args.out, "dual"), &matrix_csv(&inst.alpha_star))?;
            }
        }
        GenKind::Kth => {
            let inst = gen_sparse_kth(args.n, args.order, args.sparsity, args.lambda, args.seed)?;
            let col = |v: &[f64]| matrix_csv(&DMatrix::from_column_slice(v.len(), 1, v));
            write_atomic(&args.out, &col(&inst.y))?;
            write_atomic(&sibling(&args.out, "truth"), &col(&inst.x_star))?;
            write_atomic(&sibling(&args.out, "mask"), &mask_csv(&inst.zero_mask))?;
            if args.emit_dual {
                write_atomic(&sibling(&args.out, "dual"), &col(&inst.alpha_star))?;
            }
        }
        GenKind::Quadratic => {
            let y = gen_quadratic_noise(args.n, args.noise, args.shocks, args.shock_value, args.seed)?;
            write_atomic(&args.out, &matrix_csv(&DMatrix::from_column_slice(y.len(), 1, &y)))?;
        }
    }
    Ok(())
}
