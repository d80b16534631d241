mod common;

use common::*;
use jpc_core::adams::AdamsWeights;
use jpc_core::{adams_solve, solve, start_values, ProblemSpec, SolverConfig, StarterConfig};

#[test]
fn reproduces_published_baseline() {
    let p = poly8(0.5);
    let errs: Vec<f64> = STEPS
        .iter()
        .map(|&h| adams_solve(&p, h, (1.0 / h).round() as usize).unwrap().max_error(poly8_exact))
        .collect();
    for ((h, e), published) in STEPS.iter().zip(&errs).zip(ADAMS_TABLE) {
        assert!((e - published).abs() / published < 0.012, "h {h}: {e:e} vs {published:e}");
    }
    let order = fitted_order(&STEPS[..5], &errs[..5]);
    assert!((order - 1.6).abs() <= 0.2, "{order}");
}

#[test]
fn classical_one_step() {
    let p = ProblemSpec::new(1.0, vec![1.0], 0.1, |_, x| -x).unwrap();
    let traj = adams_solve(&p, 0.1, 1).unwrap();
    assert!((traj.x()[1] - 0.905).abs() < 1e-15);
}

#[test]
fn weights_are_positive_and_sum_to_the_kernel_integral() {
    for alpha in [0.2, 0.5, 1.0, 1.7] {
        let w = AdamsWeights::new(alpha, 40);
        for n in [0usize, 7, 39] {
            let b_sum: f64 = (0..=n).map(|j| w.b(j, n)).sum();
            assert!((b_sum - ((n + 1) as f64).powf(alpha)).abs() < 1e-10 * (n as f64 + 1.0));
            assert!((0..=n).all(|j| w.b(j, n) > 0.0));
            let a_sum: f64 = (0..=n).map(|j| w.a(j, n)).sum::<f64>() + 1.0;
            let want = (alpha + 1.0) * ((n + 1) as f64).powf(alpha);
            assert!((a_sum - want).abs() < 1e-9 * want, "alpha {alpha}, n {n}: {a_sum} vs {want}");
        }
    }
}

#[test]
fn exact_start_samples_the_solution() {
    let p = poly8(0.5);
    let values = start_values(&p, 0.1, 3, &StarterConfig::Exact, Some(&poly8_exact)).unwrap();
    assert_eq!(values.len(), 3);
    assert_eq!(values[0], 0.0);
    assert!((values[1] - 3.1e-7).abs() < 1e-20);
    assert!(start_values(&p, 0.1, 3, &StarterConfig::Exact, None).is_err());
}

#[test]
fn refined_start_is_accurate() {
    let p = poly8(0.5);
    let values = start_values(&p, 0.1, 3, &StarterConfig::RefinedAdams { k: 2 }, None).unwrap();
    for (i, v) in values.iter().enumerate() {
        assert!((v - poly8_exact(i as f64 * 0.1)).abs() < 1e-6, "i {i}: {v}");
    }
}

#[test]
fn refined_start_costs_little_order() {
    for (alpha, interp) in [(0.5, 2), (0.9, 3)] {
        let p = poly8(alpha);
        let hs = &STEPS[1..5];
        let exact: Vec<f64> = hs
            .iter()
            .map(|&h| solve(&p, &SolverConfig::new(interp, h)).unwrap().max_error(poly8_exact))
            .collect();
        let refined: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let starter = StarterConfig::refined_for(alpha, h, interp);
                solve(&p, &SolverConfig::new(interp, h).with_starter(starter)).unwrap().max_error(poly8_exact)
            })
            .collect();
        let (oe, or) = (fitted_order(hs, &exact), fitted_order(hs, &refined));
        assert!(oe - or < 0.3, "alpha {alpha}, IN {interp}: {oe} vs {or}");
    }
}

#[test]
fn starter_strings() {
    assert_eq!("refined:3".parse::<StarterConfig>().unwrap(), StarterConfig::RefinedAdams { k: 3 });
    assert_eq!("exact".parse::<StarterConfig>().unwrap(), StarterConfig::Exact);
    assert!("refined:0".parse::<StarterConfig>().is_err());
    assert!("adams".parse::<StarterConfig>().is_err());
    assert_eq!(StarterConfig::RefinedAdams { k: 4 }.to_string(), "refined:4");
}

#[test]
fn zero_problem_stays_at_rest() {
    let p = ProblemSpec::new(0.6, vec![0.0], 1.0, |_, _| 0.0).unwrap();
    let traj = adams_solve(&p, 0.05, 20).unwrap();
    assert!(traj.x().iter().all(|&x| x == 0.0));
    let v = start_values(&p, 0.1, 4, &StarterConfig::RefinedAdams { k: 1 }, None).unwrap();
    assert!(v.iter().all(|&x| x == 0.0));
}
