use matchsim::coherent::analytic_error;
use matchsim::resource::{
    advantage_threshold, geometric_grid, optimal_mu, resource_curve, ti_quantum, OptimizerConfig,
};
use matchsim::{ClassicalBound, ImperfectionModel, Protocol, Threshold, TiMetric};
use proptest::prelude::*;

fn practical() -> ImperfectionModel {
    ImperfectionModel::new(1.0, 0.25, 0.988, 0.0).unwrap()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    cov / var
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_mu_brackets_target(half in 1usize..3000, p in 0.02f64..0.3, practical_model in any::<bool>(), sm in any::<bool>()) {
        let n = 2 * half;
        let model = if practical_model { practical() } else { ImperfectionModel::ideal() };
        let protocol = if sm { Protocol::Sm } else { Protocol::Hm };
        match optimal_mu(protocol, n, &model, p) {
            Ok(mu) => {
                let tol = OptimizerConfig::default().tol;
                prop_assert!(analytic_error(protocol, n, mu, &model) <= p);
                prop_assert!(analytic_error(protocol, n, mu - tol, &model) > p);
            }
            Err(matchsim::Error::Infeasible { floor, .. }) => prop_assert!(floor > p),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn metric_gap_is_log2e(n in 2usize..1_000_000, mu in 0.0f64..100.0) {
        let d = ti_quantum(n, mu, TiMetric::LogNPlusE) - ti_quantum(n, mu, TiMetric::LogN);
        prop_assert!((d - mu * std::f64::consts::LOG2_E).abs() <= 1e-12 * (1.0 + mu * 20.0));
    }
}

#[test]
fn lower_bound_threshold_not_below_best_known() {
    for (protocol, model) in [
        (Protocol::Hm, ImperfectionModel::ideal()),
        (Protocol::Sm, ImperfectionModel::ideal()),
    ] {
        let best = advantage_threshold(
            protocol,
            &model,
            0.1,
            TiMetric::LogNPlusE,
            ClassicalBound::BestKnown,
            false,
        )
        .unwrap();
        let lb = advantage_threshold(
            protocol,
            &model,
            0.1,
            TiMetric::LogNPlusE,
            ClassicalBound::LowerBound,
            false,
        )
        .unwrap();
        assert!(
            lb.value().unwrap() >= best.value().unwrap(),
            "{protocol}: {best:?} {lb:?}"
        );
    }
}

#[test]
fn post_selection_lowers_threshold() {
    for protocol in [Protocol::Hm, Protocol::Sm] {
        let std = advantage_threshold(
            protocol,
            &practical(),
            0.1,
            TiMetric::LogNPlusE,
            ClassicalBound::BestKnown,
            false,
        )
        .unwrap();
        let post = advantage_threshold(
            protocol,
            &practical(),
            0.1,
            TiMetric::LogNPlusE,
            ClassicalBound::BestKnown,
            true,
        )
        .unwrap();
        assert!(
            post.value().unwrap() <= std.value().unwrap(),
            "{protocol}: {std:?} {post:?}"
        );
    }
}

#[test]
fn ideal_lower_bound_crossover_near_ten_thousand() {
    let t = advantage_threshold(
        Protocol::Hm,
        &ImperfectionModel::ideal(),
        0.1,
        TiMetric::LogNPlusE,
        ClassicalBound::LowerBound,
        false,
    )
    .unwrap();
    let n = t.value().unwrap();
    assert!((5000..=21000).contains(&n), "{t:?}");
    assert!(matches!(t, Threshold::Found { .. }));
}

#[test]
fn ideal_curve_slopes() {
    let grid = geometric_grid(16, 16384, 31).unwrap();
    let pts = resource_curve(
        Protocol::Hm,
        &ImperfectionModel::ideal(),
        0.1,
        TiMetric::LogNPlusE,
        &grid,
        false,
    )
    .unwrap();
    assert_eq!(pts.len(), grid.len());
    for p in &pts {
        assert!(p.p_error_achieved.unwrap() <= 0.1 + 1e-3);
    }
    let top: Vec<_> = pts.iter().filter(|p| p.n >= 1638).collect();
    let classical = slope(
        &top.iter()
            .map(|p| ((p.n as f64).ln(), p.ti_classical_best.ln()))
            .collect::<Vec<_>>(),
    );
    assert!((classical - 0.5).abs() < 0.05, "{classical}");
    let quantum = slope(
        &top.iter()
            .map(|p| ((p.n as f64).ln(), p.ti_quantum.unwrap().ln()))
            .collect::<Vec<_>>(),
    );
    // log growth: local slope 1/ln(n·e) ≈ 0.1 over this decade
    assert!(quantum > 0.0 && quantum < 0.15, "{quantum}");
}

#[test]
fn practical_sm_mu_constant_in_n() {
    let grid: Vec<usize> = (1000..=4000).step_by(500).collect();
    let pts = resource_curve(
        Protocol::Sm,
        &practical(),
        0.1,
        TiMetric::LogNPlusE,
        &grid,
        false,
    )
    .unwrap();
    let mus: Vec<f64> = pts.iter().map(|p| p.mu_opt.unwrap()).collect();
    let mean = mus.iter().sum::<f64>() / mus.len() as f64;
    assert!(
        mus.iter().all(|m| (m - mean).abs() / mean < 0.05),
        "{mus:?}"
    );
}

#[test]
fn infeasible_points_are_flagged() {
    let model = ImperfectionModel::new(1.0, 0.25, 0.6, 0.0).unwrap();
    let pts = resource_curve(Protocol::Hm, &model, 0.1, TiMetric::LogN, &[2, 100], false).unwrap();
    assert!(pts
        .iter()
        .all(|p| p.mu_opt.is_none() && p.ti_quantum.is_none()));
    assert!(pts.iter().all(|p| p.ti_classical_best > 0.0));
}
