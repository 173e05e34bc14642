use pricenet::equilibrium::DEFAULT_TOLERANCE;
use pricenet::scenarios::{
    dwl_sweep, run_comparison, sweep_csv, tariff_sensitivity, AppliedScenario, NetworkKind, Scenario, ScenarioError,
    Verdict,
};
use pricenet::{solve_default, DemandSpec, InfluenceNetwork, MarketModel, NetworkError};

use crate::common::*;

/// No path length gains paths through the merger.
fn no_new_paths(applied: &AppliedScenario, base: &InfluenceNetwork) -> bool {
    let after = &applied.model.network().path_counts().totals;
    after.iter().zip(&base.path_counts().totals).all(|(a, b)| a <= b)
}

#[test]
fn mergers_without_new_paths_never_raise_the_price() {
    let mut checked = 0;
    for n in 2..=5 {
        for net in all_transitive_dags(n) {
            let model = costless(net.clone(), linear());
            let before = solve_default(&model).unwrap();
            for i in 0..n {
                for j in i + 1..n {
                    let s = Scenario::merger("m", net.label(i), net.label(j));
                    match s.apply(&model) {
                        // a merger can route one firm's influence through the merged firm
                        Ok(applied) if no_new_paths(&applied, &net) => {
                            let after = solve_default(&applied.model).unwrap();
                            assert!(after.p_star <= before.p_star + 1e-15, "{:?} merging {i},{j}", net.edges());
                            checked += 1;
                        }
                        Ok(_) => {}
                        Err(ScenarioError::Network { source: NetworkError::ResultCyclic { .. }, .. }) => {
                            // i and j sit on both ends of a path through a third firm
                            assert!((0..n).any(|k| net.influences(i, k) && net.influences(k, j)
                                || net.influences(j, k) && net.influences(k, i)));
                        }
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }
    assert!(checked > 1_000, "{checked}");
}

#[test]
fn contraction_can_create_paths() {
    // 1 -> 2 plus 0 -> 3; merging 0 and 2 routes 1 through the merged firm to 3
    let chained = InfluenceNetwork::from_edges(4, &[(0, 3), (1, 2)]).unwrap();
    // 0 -> {2, 3, 4} and 1 -> {2, 3}; merging 1 and 4 gives 0 -> 1+4 -> 2
    let lengthened = InfluenceNetwork::from_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3)]).unwrap();
    for (net, a, b) in [(chained, "1", "3"), (lengthened, "2", "5")] {
        let model = costless(net.clone(), linear());
        let applied = Scenario::merger("m", a, b).apply(&model).unwrap();
        assert!(!no_new_paths(&applied, &net));
        let before = solve_default(&model).unwrap();
        let after = solve_default(&applied.model).unwrap();
        assert!(after.p_star > before.p_star);
    }
}

#[test]
fn verdicts_follow_from_the_raw_reports() {
    for beta in [0.2, 0.25, 0.75, 4.0 / 3.0, 3.0] {
        let base = costless(merger_base(), power(beta));
        let scenarios = [
            Scenario::merger("A", "1", "2"),
            Scenario::merger("B", "1", "2").with_extra_edges(&[("1+2", "3")]),
        ];
        let cmp = run_comparison(&base, &scenarios, DEFAULT_TOLERANCE).unwrap();
        let b = solve_default(&base).unwrap();
        for (s, outcome) in scenarios.iter().zip(&cmp.scenarios) {
            let after = solve_default(&s.apply(&base).unwrap().model).unwrap();
            let joint_before = b.profits[0] + b.profits[1];
            let joint_after = after.profits[0];
            let others = [(2, 1), (3, 2), (4, 3)];
            let v = outcome.verdicts.unwrap();
            assert_eq!(v.socially, Verdict::of(after.social_welfare - b.social_welfare));
            assert_eq!(v.privately, Some(Verdict::of(joint_after - joint_before)));
            let pareto = after.consumer_surplus > b.consumer_surplus
                && joint_after > joint_before
                && others.iter().all(|&(u, v)| after.profits[v] > b.profits[u]);
            assert_eq!(v.pareto == Verdict::Desirable, pareto, "beta {beta} {}", s.name);
        }
    }
}

#[test]
fn explicit_post_merger_network_replaces_contraction() {
    let base = costless(merger_base(), linear());
    let mut s = Scenario::merger("X", "1", "2");
    if let pricenet::scenarios::ScenarioDelta::Merger(m) = &mut s.delta {
        m.network = Some(vec![("3".into(), "1+2".into())]);
        m.merged_cost = Some(0.05);
    }
    let applied = s.apply(&base).unwrap();
    let net = applied.model.network();
    assert_eq!(net.edge_count(), 1);
    assert!(net.influences(net.index_of("3").unwrap(), net.index_of("1+2").unwrap()));
    assert_eq!(applied.model.costs()[0], 0.05);
}

#[test]
fn merged_cost_defaults_to_the_sum() {
    let base = MarketModel::new(merger_base(), vec![0.01, 0.02, 0.0, 0.0, 0.0], 0.0, linear()).unwrap();
    let applied = Scenario::merger("A", "2", "1").apply(&base).unwrap();
    assert!((applied.model.costs()[0] - 0.03).abs() < 1e-15);
    assert_eq!(applied.constituents[0], vec![1, 0]);
}

#[test]
fn unknown_firms_and_bad_edges_are_reported() {
    let base = costless(merger_base(), linear());
    assert!(matches!(Scenario::merger("A", "1", "9").apply(&base), Err(ScenarioError::UnknownFirm { .. })));
    let cyclic = Scenario::merger("C", "1", "2").with_extra_edges(&[("4", "1+2")]);
    assert!(matches!(
        cyclic.apply(&base),
        Err(ScenarioError::Network { source: NetworkError::ResultCyclic { .. }, .. })
    ));
    assert!(matches!(Scenario::tariff("T", &[("9", 0.1)], 0.0).apply(&base), Err(ScenarioError::UnknownFirm { .. })));
}

#[test]
fn tariffs_raise_prices_and_cost_welfare() {
    for demand in [linear(), power(0.5), logit(), DemandSpec::exponential(4.0, 1.0, 1.0)] {
        let model = costless(fig4(), demand.clone());
        let s = tariff_sensitivity(&model, 0.0).unwrap();
        assert!(s.dp_dc > 0.0, "{}", demand.family_name());
        assert!(s.dtw_dp < 0.0, "{}", demand.family_name());
        // under linear demand every firm loses from a higher cost
        if demand.family_name() == "linear" {
            assert!(s.dprofit_dc.iter().all(|&d| d < 0.0));
        }
    }
    // the tariff's revenue is counted in total welfare
    let base = costless(fig4(), linear());
    let cmp = run_comparison(&base, &[Scenario::tariff("T", &[], 0.1)], DEFAULT_TOLERANCE).unwrap();
    let t = &cmp.scenarios[0];
    assert!((t.welfare.tariff_revenue - 0.1 * t.report.quantity).abs() < 1e-15);
    assert!(t.welfare.total_welfare < cmp.base.welfare.total_welfare);
    assert_eq!(t.verdicts.unwrap().privately, None);
}

#[test]
fn linear_pass_through_is_closed_form() {
    // P* - C = B (1 - C) / (1 + B), so dP*/dC = 1 / (1 + B)
    let model = MarketModel::new(fig4(), vec![0.0; 6], 0.1, linear()).unwrap();
    let s = tariff_sensitivity(&model, 0.1).unwrap();
    assert!((s.dp_dc - 1.0 / 14.0).abs() < 1e-12);
}

#[test]
fn sweep_rows_and_csv() {
    let rows = dwl_sweep(&linear(), 1, 3, &[NetworkKind::Empty, NetworkKind::Chain]).unwrap();
    assert_eq!(rows.len(), 6);
    let csv = sweep_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,kind,P_star,dwl");
    assert!(lines[2].starts_with("1,chain,0.5,0.125"));
    assert!(matches!(dwl_sweep(&linear(), 3, 2, &[NetworkKind::Empty]), Err(ScenarioError::EmptyRange { .. })));
    assert!(matches!(dwl_sweep(&logit(), 1, 40, &[NetworkKind::Chain]), Err(ScenarioError::SweepTooLarge { .. })));
}

#[test]
fn logit_sweep_uses_the_generic_solver() {
    let rows = dwl_sweep(&logit(), 1, 6, &[NetworkKind::Chain]).unwrap();
    for r in &rows {
        let direct = solve_default(&costless(InfluenceNetwork::chain(r.n), logit())).unwrap();
        assert!((r.p_star - direct.p_star).abs() < 1e-12);
        assert!((r.dwl - direct.deadweight_loss).abs() < 1e-12);
    }
}
