use num_rational::Rational64;

use pricenet::equilibrium::solve_exact_closed_form;
use pricenet::oracle::{
    chain_backward_induction, deviation_check, deviation_check_default, diamond_linear_oracle, induced_price,
    verify_all, ChainOptions, OracleError,
};
use pricenet::{solve_default, DemandSpec, InfluenceNetwork, MarketModel};

use crate::common::*;
use crate::properties::acceptance_instances;

#[test]
fn backward_induction_agrees_with_the_solver() {
    let families = [linear(), power(0.5), power(2.0), power(5.0), logit(), DemandSpec::exponential(4.0, 1.0, 1.0)];
    for demand in families {
        for n in 2..=4 {
            for costs in [vec![0.0; n], (0..n).map(|i| 0.02 * i as f64).collect()] {
                let model = MarketModel::new(InfluenceNetwork::chain(n), costs, 0.01, demand.clone()).unwrap();
                let solved = solve_default(&model).unwrap();
                let induced = chain_backward_induction(&model, ChainOptions::default()).unwrap();
                let what = format!("{} chain({n})", demand.family_name());
                assert!((induced.p_star - solved.p_star).abs() <= 1e-4, "{what}: {} vs {}", induced.p_star, solved.p_star);
                for (a, b) in induced.prices.iter().zip(&solved.prices) {
                    assert!((a - b).abs() <= 1e-3, "{what}: {a} vs {b}");
                }
                assert_eq!(induced.order, (0..n).collect::<Vec<_>>());
            }
        }
    }
}

#[test]
fn backward_induction_needs_a_chain() {
    let model = costless(diamond(), linear());
    assert!(matches!(chain_backward_induction(&model, ChainOptions::default()), Err(OracleError::NotAChain)));
}

#[test]
fn diamond_best_responses_by_hand() {
    let d = diamond_linear_oracle();
    let r = |n, m| Rational64::new(n, m);
    assert_eq!(d.p_star, r(7, 8));
    assert_eq!(d.prices, [r(3, 8), r(1, 4), r(1, 8), r(1, 8)]);
    assert_eq!(d.response3, [r(1, 4), r(-1, 3)]);
    assert_eq!(d.response4, [r(3, 8), r(-1, 3), r(-1, 2)]);

    let exact = solve_exact_closed_form(&costless(diamond(), linear())).unwrap();
    for (a, b) in exact.prices.iter().zip(d.prices) {
        assert_eq!(a.to_string(), b.to_string());
    }
}

#[test]
fn reported_prices_reproduce_the_final_price() {
    for (name, model) in acceptance_instances() {
        let report = solve_default(&model).unwrap();
        for firm in 0..report.len() {
            let p = induced_price(&model, &report, firm, report.prices[firm]).unwrap();
            assert!((p - report.p_star).abs() <= 1e-10 * report.p_star.max(1.0), "{name} firm {firm}: {p} vs {}", report.p_star);
        }
    }
}

#[test]
fn induced_price_rises_with_own_price() {
    for (name, model) in acceptance_instances() {
        let report = solve_default(&model).unwrap();
        for check in verify_all(&model, &report).unwrap() {
            assert!(check.curve.is_increasing(), "{name} firm {}", check.curve.firm);
            assert!(check.passed && check.consistent, "{name} firm {}", check.curve.firm);
        }
    }
}

#[test]
fn grid_peak_sits_at_the_equilibrium_price() {
    let model = costless(fig4(), logit());
    let report = solve_default(&model).unwrap();
    for firm in 0..6 {
        let c = deviation_check(&model, &report, firm, 0.2, 201).unwrap();
        assert!((c.curve.best_price() - report.prices[firm]).abs() <= 0.2 / 200.0 + 1e-12);
    }
}

#[test]
fn report_claiming_too_much_is_inconsistent() {
    let model = costless(fig4(), linear());
    let mut report = solve_default(&model).unwrap();
    report.p_star += 0.01;
    let c = deviation_check_default(&model, &report, 0).unwrap();
    assert!(!c.consistent && !c.passed);
}

#[test]
fn grid_arguments_are_checked() {
    let model = costless(fig4(), linear());
    let report = solve_default(&model).unwrap();
    assert!(matches!(deviation_check(&model, &report, 0, 0.1, 50), Err(OracleError::BadGrid { .. })));
    assert!(matches!(deviation_check(&model, &report, 0, 0.0, 101), Err(OracleError::BadGrid { .. })));
    assert!(matches!(deviation_check(&model, &report, 9, 0.1, 101), Err(OracleError::UnknownFirm { .. })));
}

#[test]
fn deviations_beyond_saturation_are_dropped() {
    let model = costless(InfluenceNetwork::empty(2), linear());
    let report = solve_default(&model).unwrap();
    // p = 1/3 each; pushing one firm to 1.2 leaves no demand
    let c = deviation_check(&model, &report, 0, 0.9, 101).unwrap();
    assert!(!c.curve.dropped.is_empty());
    assert!(c.passed);
}
