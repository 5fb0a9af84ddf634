mod common;

use hhofenn::benchfns::{evaluate_noiseless, suite_catalog, FunctionId, ObjectiveFunction};
use hhofenn::optimizer::{
    adaptive_threshold, opposite, quasi_opposite_with, run, run_benchmark, Algorithm, Bounds, FnProblem,
    OptimizerConfig,
};
use hhofenn::Error;
use proptest::prelude::*;

fn small(alg: Algorithm, seed: u64) -> OptimizerConfig {
    OptimizerConfig::new(alg, 8, 25, seed)
}

#[test]
fn every_function_reaches_its_known_optimum_at_the_argmin() {
    for obj in suite_catalog(7).unwrap() {
        let (Some(opt), Some(at)) = (obj.known_optimum, obj.optimum_location()) else {
            assert_eq!(obj.id, FunctionId::QuarticNoise);
            continue;
        };
        let v = evaluate_noiseless(obj.id, &at);
        assert!((v - opt).abs() <= 1e-9 * opt.abs().max(1.0), "{}: {v} vs {opt}", obj.id);
        assert!(obj.in_bounds(&at), "{} optimum lies outside the box", obj.id);
    }
}

#[test]
fn benchmark_runs_are_deterministic_per_seed() {
    let obj = ObjectiveFunction::new(FunctionId::Ackley, 6).unwrap();
    for alg in Algorithm::ALL {
        let a = run_benchmark(&obj, &small(alg, 3)).unwrap();
        let b = run_benchmark(&obj, &small(alg, 3)).unwrap();
        let c = run_benchmark(&obj, &small(alg, 4)).unwrap();
        assert!(a.same_result(&b), "{alg} is not reproducible");
        assert_ne!(a.final_position, c.final_position, "{alg} ignores its seed");
    }
}

#[test]
fn best_so_far_trace_never_increases_and_ends_at_the_result() {
    for f in FunctionId::ALL {
        let obj = ObjectiveFunction::new(f, 5).unwrap();
        for alg in Algorithm::ALL {
            let r = run_benchmark(&obj, &small(alg, 1)).unwrap();
            assert_eq!(r.best_trace.len(), 25);
            assert!(r.best_trace.windows(2).all(|w| w[1] <= w[0]), "{alg} on {f}");
            assert_eq!(*r.best_trace.last().unwrap(), r.final_fitness);
            assert!(obj.in_bounds(&r.final_position), "{alg} on {f} left the box");
        }
    }
}

#[test]
fn hho_plus_improves_on_hho_on_sphere() {
    let obj = ObjectiveFunction::new(FunctionId::Sphere, 10).unwrap();
    let mean = |alg| {
        (0..5)
            .map(|s| {
                run_benchmark(&obj, &OptimizerConfig::new(alg, 20, 100, s))
                    .unwrap()
                    .final_fitness
            })
            .sum::<f64>()
            / 5.0
    };
    assert!(mean(Algorithm::HhoPlus) < mean(Algorithm::Hho));
}

#[test]
fn flat_objective_keeps_a_constant_trace() {
    let mut p = FnProblem::new(vec![-1.0; 3], vec![1.0; 3], |_: &[f64]| 2.5).unwrap();
    let r = run(&mut p, &small(Algorithm::HhoPlus, 0)).unwrap();
    assert!(r.best_trace.iter().all(|&v| v == 2.5));
}

#[test]
fn degenerate_boxes_are_rejected() {
    let flat = |x: &[f64]| x[0];
    assert!(FnProblem::new(vec![0.0; 2], vec![0.0; 2], flat).is_err());
    assert!(FnProblem::new(vec![0.0; 2], vec![1.0; 3], flat).is_err());
    assert!(FnProblem::new(vec![], vec![], flat).is_err());
}

#[test]
fn invalid_configurations_are_rejected() {
    let obj = ObjectiveFunction::new(FunctionId::Sphere, 3).unwrap();
    for (pop, iters) in [(1, 10), (0, 10), (10, 0)] {
        let err = run_benchmark(&obj, &OptimizerConfig::new(Algorithm::Hho, pop, iters, 0)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
    assert!(matches!(
        ObjectiveFunction::new(FunctionId::Sphere, 0),
        Err(Error::Contract(_))
    ));
    assert!(matches!("nope".parse::<FunctionId>(), Err(Error::UnknownId(_))));
    assert_eq!("HHO+".parse::<Algorithm>().unwrap(), Algorithm::HhoPlus);
}

#[test]
fn non_finite_fitness_is_reported() {
    let mut p = FnProblem::new(vec![-1.0; 2], vec![1.0; 2], |_: &[f64]| f64::NAN).unwrap();
    let err = run(&mut p, &small(Algorithm::Hho, 0)).unwrap_err();
    assert!(
        matches!(err, Error::NonFiniteFitness { .. } | Error::NonFinite(_)),
        "{err}"
    );
}

#[test]
fn threshold_rejects_out_of_range_iterations() {
    assert!(adaptive_threshold(0, 0).is_err());
    assert!(adaptive_threshold(11, 10).is_err());
    assert_eq!(adaptive_threshold(0, 10).unwrap(), 1.0);
}

proptest! {
    #[test]
    fn opposite_reflects_through_the_center(
        (lower, upper, x) in (1usize..6).prop_flat_map(|d| (
            prop::collection::vec(-100.0f64..0.0, d),
            prop::collection::vec(0.0f64..100.0, d),
            prop::collection::vec(0.0f64..1.0, d),
        ))
    ) {
        let x: Vec<f64> = x.iter().zip(lower.iter().zip(&upper)).map(|(t, (l, u))| l + t * (u - l)).collect();
        let b = Bounds { lower: &lower, upper: &upper };
        let o = opposite(&x, b);
        for i in 0..x.len() {
            let c = (lower[i] + upper[i]) / 2.0;
            prop_assert!(((o[i] - c) + (x[i] - c)).abs() <= 1e-12 * (1.0 + c.abs() + x[i].abs()));
            prop_assert!(o[i] >= lower[i] - 1e-12 && o[i] <= upper[i] + 1e-12);
        }
    }

    #[test]
    fn quasi_opposite_endpoints(lo in -50.0f64..0.0, width in 1e-3f64..100.0, t in 0.0f64..1.0) {
        let (lower, upper) = ([lo], [lo + width]);
        let x = [lo + t * width];
        let b = Bounds { lower: &lower, upper: &upper };
        let center = (lower[0] + upper[0]) / 2.0;
        prop_assert_eq!(quasi_opposite_with(&x, b, &[0.0])[0], center);
        let near_opp = quasi_opposite_with(&x, b, &[1.0 - 1e-12])[0];
        prop_assert!((near_opp - opposite(&x, b)[0]).abs() <= 1e-9 * (1.0 + width));
    }

    #[test]
    fn threshold_lies_between_its_endpoints(t_max in 1usize..2000, frac in 0.0f64..=1.0) {
        let t = ((t_max as f64) * frac) as usize;
        let a = adaptive_threshold(t, t_max).unwrap();
        prop_assert!(a <= 1.0 && a >= (-1.0f64).tanh() + 1.0 - 1e-15);
    }
}
