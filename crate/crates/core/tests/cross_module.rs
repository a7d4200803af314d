//! Checks that tie several modules together: constructions against closed
//! forms, the numeric oracle against constructions, and serialization.

use std::f64::consts::LN_2;

use gepi_core::applications::{
    broadcast_region_gaussian, default_alpha_grid, equality_condition_check, scalar_mgl_suite,
    MonteCarloConfig,
};
use gepi_core::group::DistributionLiteral;
use gepi_core::numeric::{min_sum_entropy, minimize_with_seeds, MinimizationConfig};
use gepi_core::{
    direct_sum_lower_bound, extremal_tuple, f_2n, f_gk, f_group, gaussian_2n,
    two_level_distribution, Execution, FiniteAbelianGroup, GroupDistribution,
};
use proptest::prelude::*;

fn g(desc: &str) -> FiniteAbelianGroup {
    FiniteAbelianGroup::parse(desc).unwrap()
}

fn sum_entropy(ds: &[GroupDistribution]) -> f64 {
    let mut acc = ds[0].clone();
    for d in &ds[1..] {
        acc = acc.convolve(d).unwrap();
    }
    acc.entropy()
}

proptest! {
    #[test]
    fn extremal_tuple_attains_fold(
        n in 1usize..=4,
        fr in proptest::collection::vec(0.0f64..=1.0, 2..=4),
    ) {
        let max = n as f64 * LN_2;
        let xs: Vec<f64> = fr.iter().map(|f| f * max).collect();
        let group = FiniteAbelianGroup::cyclic(1 << n).unwrap();
        let tuple = extremal_tuple(&group, &xs).unwrap();
        for (d, x) in tuple.iter().zip(&xs) {
            prop_assert!((d.entropy() - x).abs() < 1e-10);
        }
        prop_assert!((sum_entropy(&tuple) - f_gk(n, &xs).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn direct_sums_match_cyclic_closed_form(
        fx in 0.0f64..=1.0,
        fy in 0.0f64..=1.0,
        split in prop::sample::select(vec![(1usize, 1usize), (1, 2), (2, 1), (1, 3), (2, 2)]),
    ) {
        let n = split.0 + split.1;
        let (x, y) = (fx * n as f64 * LN_2, fy * n as f64 * LN_2);
        let bound = direct_sum_lower_bound(split.0, split.1, x, y, 40).unwrap();
        prop_assert!((bound - f_2n(n, x, y).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn oracle_never_beats_closed_form(fx in 0.0f64..=1.0, fy in 0.0f64..=1.0) {
        // The closed form is a lower bound; any feasible point sits above it.
        let group = g("z2xz2");
        let (x, y) = (fx * 2.0 * LN_2, fy * 2.0 * LN_2);
        let cfg = MinimizationConfig { restarts: 2, max_iterations: 60, ..Default::default() };
        let r = min_sum_entropy(&group, x, y, &cfg).unwrap();
        prop_assert!(r.value >= f_group(&group, x, y).unwrap() - 1e-9);
        for (d, t) in r.argmin.iter().zip([x, y]) {
            prop_assert!((d.entropy() - t).abs() <= 1e-9);
        }
    }
}

#[test]
fn gaussian_pair_is_tight_for_the_minimum() {
    for n in 1..=4usize {
        let group = FiniteAbelianGroup::cyclic(1 << n).unwrap();
        for &(a, b) in &[(0.1, 0.2), (0.3, 0.45), (0.0, 0.25)] {
            let (p, q) = (gaussian_2n(&group, a).unwrap(), gaussian_2n(&group, b).unwrap());
            assert!(equality_condition_check(&p, &q).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn two_level_entropy_formula() {
    let group = g("z2xz4");
    for k in 0..3 {
        for &a in &[0.0, 0.1, 0.5] {
            let d = two_level_distribution(&group, k, a, None).unwrap();
            let h = if a == 0.0 { 0.0 } else { -(a * a.ln() + (1.0 - a) * (1.0 - a).ln()) };
            assert!((d.entropy() - (k as f64 * LN_2 + h)).abs() < 1e-12);
        }
    }
}

#[test]
fn seeded_oracle_keeps_the_seed_when_it_is_optimal() {
    let group = g("z8");
    let xs = [0.9, 1.3];
    let seed: Vec<Vec<f64>> = extremal_tuple(&group, &xs)
        .unwrap()
        .into_iter()
        .map(|d| d.into_probs())
        .collect();
    let cfg = MinimizationConfig { restarts: 1, structured_starts: false, ..Default::default() };
    let r = minimize_with_seeds(&group, &xs, &cfg, &[seed]).unwrap();
    assert!((r.value - f_gk(3, &xs).unwrap()).abs() < 1e-9);
}

#[test]
fn monte_carlo_is_schedule_independent() {
    let groups = [g("z4"), g("z2xz2")];
    let run = |execution| {
        scalar_mgl_suite(&groups, &MonteCarloConfig { trials: 400, seed: 11, execution }).unwrap()
    };
    let (a, b) = (run(Execution::Sequential), run(Execution::Parallel));
    assert_eq!(a.min_slack.to_bits(), b.min_slack.to_bits());
    assert_eq!(a.worst_trial, b.worst_trial);
}

#[test]
fn literal_round_trip_and_decimal_strings() {
    let text = r#"{"group":{"cyclic_orders":[2,4]},"probs":["0.125","0.125",0.25,0,"0.5",0,0,0]}"#;
    let lit: DistributionLiteral = serde_json::from_str(text).unwrap();
    let d = lit.into_distribution().unwrap();
    assert_eq!(d.group().to_string(), "z2xz4");
    assert!((d.entropy() - (0.25 * 8f64.ln() + 0.25 * 4f64.ln() + 0.5 * 2f64.ln())).abs() < 1e-12);
    let back = serde_json::to_string(&DistributionLiteral::from_distribution(&d)).unwrap();
    let again = serde_json::from_str::<DistributionLiteral>(&back).unwrap().into_distribution().unwrap();
    assert_eq!(d.probs(), again.probs());
}

#[test]
fn region_report_serializes() {
    let group = FiniteAbelianGroup::cyclic(8).unwrap();
    let r = broadcast_region_gaussian(
        3,
        &gaussian_2n(&group, 0.1).unwrap(),
        &gaussian_2n(&group, 0.2).unwrap(),
        &default_alpha_grid(),
    )
    .unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 201);
    assert!(r.points.windows(2).all(|w| w[0].r1 <= w[1].r1 + 1e-15 && w[0].r2 >= w[1].r2 - 1e-15));
}
