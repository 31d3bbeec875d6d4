use proptest::prelude::*;
use seqfit::univariate::{
    asymmetric_fused, fused_barrier, fused_lasso, isotonic, sparse_fused_lasso, BarrierBackend, BarrierConfig,
};
use seqfit::{kkt_residual, BregmanLink, PenaltySpec, Problem, Signal, SolverResult};

const SQ: BregmanLink = BregmanLink::Squared;

fn xs(r: &SolverResult) -> &[f64] {
    r.x.as_scalar().unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec(-20.0f64..20.0, n),
            proptest::collection::vec(0.0f64..4.0, n - 1),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sparse_without_beta_is_fused((y, lambda) in series()) {
        let a = sparse_fused_lasso(&y, &lambda, &vec![0.0; y.len()], &SQ).unwrap();
        let b = fused_lasso(&y, &lambda, &SQ).unwrap();
        prop_assert!(max_diff(xs(&a), xs(&b)) <= 1e-10);
    }

    #[test]
    fn symmetric_asymmetric_is_fused((y, lambda) in series()) {
        let lo: Vec<f64> = lambda.iter().map(|l| -l).collect();
        let a = asymmetric_fused(&y, &lambda, &lo, &SQ).unwrap();
        let b = fused_lasso(&y, &lambda, &SQ).unwrap();
        prop_assert!(max_diff(xs(&a), xs(&b)) <= 1e-10);
    }

    #[test]
    fn one_sided_asymmetric_is_isotonic((y, lambda) in series()) {
        let hi = vec![f64::INFINITY; lambda.len()];
        let lo = vec![0.0; lambda.len()];
        let a = asymmetric_fused(&y, &hi, &lo, &SQ).unwrap();
        let b = isotonic(&y, &SQ).unwrap();
        prop_assert!(max_diff(xs(&a), xs(&b)) <= 1e-10);
        prop_assert!(xs(&b).windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn barrier_output_is_feasible_and_certified((y, lambda) in series(), seed in any::<u64>()) {
        let lambda: Vec<f64> = lambda.iter().map(|l| l + 0.01).collect();
        let p = Problem::new(Signal::Scalar(y.clone()), PenaltySpec::Barrier { lambda: lambda.clone() }).unwrap();
        let naive = fused_barrier(&y, &lambda, BarrierBackend::Naive).unwrap();
        let skip = fused_barrier(&y, &lambda, BarrierConfig { seed, ..BarrierConfig::default() }).unwrap();
        for r in [&naive, &skip] {
            let x = xs(r);
            prop_assert!(x.windows(2).zip(&lambda).all(|(w, l)| (w[1] - w[0]).abs() <= *l));
            prop_assert!(kkt_residual(&p, r).unwrap() <= 1e-8);
        }
        prop_assert!(max_diff(xs(&naive), xs(&skip)) <= 1e-9);
    }

    #[test]
    fn entropy_link_solutions_are_certified(
        y in proptest::collection::vec(0.01f64..0.99, 2..30),
        lambda in 0.0f64..2.0,
    ) {
        let lam = vec![lambda; y.len() - 1];
        let r = fused_lasso(&y, &lam, &BregmanLink::Entropy).unwrap();
        let p = Problem::with_link(Signal::Scalar(y), PenaltySpec::FusedLasso { lambda: lam }, BregmanLink::Entropy).unwrap();
        prop_assert!(xs(&r).iter().all(|&v| v > 0.0 && v < 1.0));
        prop_assert!(kkt_residual(&p, &r).unwrap() <= 1e-8);
    }
}

#[test]
fn fused_lasso_is_piecewise_constant_with_large_lambda() {
    let y = [1.0, 5.0, -2.0, 7.0, 0.5];
    let r = fused_lasso(&y, &[100.0; 4], &SQ).unwrap();
    let mean = y.iter().sum::<f64>() / 5.0;
    assert!(xs(&r).iter().all(|v| (v - mean).abs() <= 1e-12));
    assert_eq!(r.x.segments(1e-8), 1);
}
