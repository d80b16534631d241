#![allow(clippy::excessive_precision)]
use jpc_core::quadrature::{gauss_lobatto_rule, moment, JacobiWeight};
use proptest::prelude::*;

const GOLDEN: &str = include_str!("data/lobatto_27.csv");

struct GoldenRow {
    alpha: f64,
    index: usize,
    node: f64,
    weight: f64,
}

fn golden() -> Vec<GoldenRow> {
    GOLDEN
        .lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            GoldenRow {
                alpha: cols[0].parse().unwrap(),
                index: cols[1].parse().unwrap(),
                node: cols[2].parse().unwrap(),
                weight: cols[3].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn golden_rules_reproduced() {
    let rows = golden();
    assert_eq!(rows.len(), 8 * 27);
    let mut alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    alphas.dedup();
    assert_eq!(alphas, vec![0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 1.8]);
    for alpha in alphas {
        let rule = gauss_lobatto_rule(&JacobiWeight::fractional(alpha).unwrap(), 27).unwrap();
        for r in rows.iter().filter(|r| r.alpha == alpha) {
            let dn = (rule.nodes()[r.index] - r.node).abs();
            let dw = (rule.weights()[r.index] - r.weight).abs();
            assert!(dn <= 1e-12, "alpha {alpha} node {}: deviation {dn:e}", r.index);
            assert!(dw <= 1e-12, "alpha {alpha} weight {}: deviation {dw:e}", r.index);
        }
    }
}

#[test]
fn quoted_golden_entries() {
    let rule = gauss_lobatto_rule(&JacobiWeight::new(-0.9, 0.0).unwrap(), 27).unwrap();
    assert!((rule.nodes()[1] - -0.9892016529048960).abs() < 1e-12);
    assert!((rule.weights()[0] - 0.0015793891284060).abs() < 1e-12);
    assert!((rule.weights()[26] - 5.0539800138885518).abs() < 1e-12);
    let rule = gauss_lobatto_rule(&JacobiWeight::new(-0.5, 0.0).unwrap(), 27).unwrap();
    assert_eq!(rule.nodes()[26], 1.0);
    assert!((rule.weights()[26] - 0.0846378557289007).abs() < 1e-12);
    let rule = gauss_lobatto_rule(&JacobiWeight::new(0.8, 0.0).unwrap(), 27).unwrap();
    assert!((rule.weights()[26] - 0.0000387924881512).abs() < 1e-12);
}

#[test]
fn matches_high_precision_eigen_solution() {
    // 50-digit symmetric eigen-solve of the Lobatto-modified Jacobi matrix,
    // with a = -0.9 taken as its nearest f64.
    let rule = gauss_lobatto_rule(&JacobiWeight::new(-0.9, 0.0).unwrap(), 27).unwrap();
    assert!((rule.weights()[26] - 5.053980013888611263383848).abs() < 4e-15);
    assert!((rule.nodes()[1] - -0.989201652904896063264236).abs() < 1e-16);
}

#[test]
fn moments_match_high_precision_oracle() {
    // Binomial expansion in Beta functions, evaluated at 50 digits.
    let cases = [
        (0.2, 0.0, 3, -0.1118862034088021163288602),
        (-0.9, 0.0, 10, 7.566911147360561034062064),
        (-0.7, 0.0, 10, 1.528840451646078698249459),
        (-0.5, 0.0, 51, 0.2327234184023338468423249),
        (0.8, 0.0, 51, -0.03248075299323635278778538),
        (2.0, 0.5, 51, -0.009107270169508708507992575),
        (-0.9, 0.5, 20, 9.937354247753893329377127),
        (0.2, 0.0, 51, -0.01405515774824980137570811),
        (-0.9, 0.0, 51, 6.403430800548630659788189),
        (0.5, 0.0, 21, -0.05513083904706891650131922),
    ];
    for (a, b, k, expected) in cases {
        let m = moment(&JacobiWeight::new(a, b).unwrap(), k).unwrap();
        let rel = ((m - expected) / expected).abs();
        assert!(rel < 1e-14, "a={a} b={b} k={k}: {m} vs {expected} (rel {rel:e})");
    }
}

#[test]
fn integrate_examples() {
    let w = JacobiWeight::new(-0.5, 0.0).unwrap();
    let rule = gauss_lobatto_rule(&w, 27).unwrap();
    assert!((rule.integrate(|_| 1.0) - 2.0 * 2f64.sqrt()).abs() < 1e-12);

    let w = JacobiWeight::new(-0.7, 0.0).unwrap();
    let rule = gauss_lobatto_rule(&w, 27).unwrap();
    let m10 = moment(&w, 10).unwrap();
    assert!((rule.integrate(|s| s.powi(10)) - m10).abs() < 1e-12);
    let top = 2 * 27 - 3;
    let mt = moment(&w, top).unwrap();
    assert!((rule.integrate(|s| s.powi(top as i32)) - mt).abs() < 1e-10);
}

#[test]
fn exactness_and_positivity_grid() {
    for a in [-0.9, -0.5, 0.0, 0.8, 2.0] {
        for b in [0.0, 0.5] {
            let w = JacobiWeight::new(a, b).unwrap();
            for n in [5usize, 11, 27] {
                let rule = gauss_lobatto_rule(&w, n).unwrap();
                assert_eq!(rule.nodes()[0], -1.0);
                assert_eq!(rule.nodes()[n - 1], 1.0);
                assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
                assert!(rule.weights().iter().all(|&x| x > 0.0), "a={a} b={b} n={n}");
                for k in 0..=(2 * n - 3) {
                    let exact = moment(&w, k).unwrap();
                    let got = rule.integrate(|s| s.powi(k as i32));
                    assert!(
                        (got - exact).abs() <= 1e-11 * exact.abs().max(1.0),
                        "a={a} b={b} n={n} k={k}: {got} vs {exact}"
                    );
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weight_sum_identity(alpha in 0.05f64..2.0, n in 3usize..40) {
        let rule = gauss_lobatto_rule(&JacobiWeight::fractional(alpha).unwrap(), n).unwrap();
        let sum: f64 = rule.weights().iter().sum();
        let expected = 2f64.powf(alpha) / alpha;
        prop_assert!(((sum - expected) / expected).abs() < 1e-13);
    }

    #[test]
    fn construction_is_deterministic(alpha in 0.05f64..2.0) {
        let w = JacobiWeight::fractional(alpha).unwrap();
        prop_assert_eq!(gauss_lobatto_rule(&w, 13).unwrap(), gauss_lobatto_rule(&w, 13).unwrap());
    }
}
