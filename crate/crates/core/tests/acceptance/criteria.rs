//! One test per acceptance criterion. Each prints a PASS/FAIL line and then
//! fails if any of its checks did.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pricenet::equilibrium::{logit_bounds, solve_exact_closed_form, DEFAULT_TOLERANCE};
use pricenet::oracle::{chain_backward_induction, deviation_check_default, perturb_price, ChainOptions};
use pricenet::scenarios::{dwl_sweep, run_comparison, NetworkKind, Scenario, Verdict};
use pricenet::{solve_default, solve_linear_closed_form, DemandSpec, InfluenceNetwork, MarketModel};

use crate::common::*;
use crate::properties;

/// Values printed to four decimals in the paper.
const PRINTED: f64 = 5e-4;
/// Generic solver against exact values.
const GENERIC: f64 = 1e-10;
/// Backward induction against the characterization.
const BACKWARD_INDUCTION: f64 = 1e-3;
/// Inverse-elasticity identity.
const ELASTICITY: f64 = 1e-10;
/// Sweep values against their closed forms.
const SWEEP: f64 = 1e-6;
/// Largest admissible logit gap at n = 12.
const LOGIT_GAP_AT_12: f64 = 1e-4;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn finish(criterion: usize, title: &str, failures: Vec<String>) {
    report(criterion, title, &failures);
    assert!(failures.is_empty(), "criterion {criterion}: {}", failures.join("; "));
}

/// Exact path and generic solver against known rational prices.
fn exact_and_generic(failures: &mut Vec<String>, model: &MarketModel, p_star: (i64, i64), prices: &[(i64, i64)]) {
    let exact = solve_exact_closed_form(model).unwrap();
    check(failures, exact.p_star == ratio(p_star.0, p_star.1), || format!("exact P* = {}", exact.p_star));
    for (i, &(n, d)) in prices.iter().enumerate() {
        check(failures, exact.prices[i] == ratio(n, d), || format!("exact p_{i} = {}", exact.prices[i]));
    }
    let report = solve_default(model).unwrap();
    near(failures, "P*", report.p_star, p_star.0 as f64 / p_star.1 as f64, GENERIC);
    for (i, &(n, d)) in prices.iter().enumerate() {
        near(failures, &format!("p_{}", report.firms[i]), report.prices[i], n as f64 / d as f64, GENERIC);
    }
}

#[test]
fn criterion_01_diamond_linear() {
    let mut failures = Vec::new();
    let model = costless(diamond(), linear());
    exact_and_generic(&mut failures, &model, (7, 8), &[(3, 8), (1, 4), (1, 8), (1, 8)]);
    finish(1, "diamond network, linear demand: P* = 7/8, prices (3/8, 1/4, 1/8, 1/8)", failures);
}

#[test]
fn criterion_02_fig4_linear() {
    let mut failures = Vec::new();
    let model = costless(fig4(), linear());
    // L, T, F, C, D, R
    exact_and_generic(&mut failures, &model, (13, 14), &[(4, 14), (1, 14), (1, 14), (1, 14), (2, 14), (4, 14)]);
    finish(2, "six-firm network, linear demand: P* = 13/14 and per-firm prices", failures);
}

#[test]
fn criterion_03_chain2_logit() {
    let mut failures = Vec::new();
    let model = costless(InfluenceNetwork::chain(2), logit());
    let report = solve_default(&model).unwrap();
    near(&mut failures, "P*", report.p_star, 2.3082, PRINTED);
    near(&mut failures, "p_1", report.prices[0], 1.2088, PRINTED);
    near(&mut failures, "p_2", report.prices[1], 1.0994, PRINTED);
    let induced = chain_backward_induction(&model, ChainOptions::default()).unwrap();
    near(&mut failures, "backward-induction P*", induced.p_star, report.p_star, BACKWARD_INDUCTION);
    for i in 0..2 {
        near(&mut failures, &format!("backward-induction p_{}", i + 1), induced.prices[i], report.prices[i], BACKWARD_INDUCTION);
    }
    finish(3, "two sequential firms, logit demand: P* = 2.3082, backward induction agrees", failures);
}

#[test]
fn criterion_04_fig4_logit() {
    let mut failures = Vec::new();
    let model = costless(fig4(), logit());
    let report = solve_default(&model).unwrap();
    near(&mut failures, "P*", report.p_star, 6.0313, PRINTED);
    for (i, want) in [1.0096, 1.0024, 1.0024, 1.0024, 1.0048, 1.0096].into_iter().enumerate() {
        near(&mut failures, &format!("p_{}", report.firms[i]), report.prices[i], want, PRINTED);
    }
    check(&mut failures, report.p_star > 6.0, || format!("P* = {} not above C + n/alpha = 6", report.p_star));
    for (firm, p) in report.firms.iter().zip(&report.prices) {
        check(&mut failures, *p > 1.0, || format!("p_{firm} = {p} not above c_i + 1/alpha = 1"));
    }
    let bounds = logit_bounds(&model, DEFAULT_TOLERANCE).unwrap();
    check(&mut failures, bounds.respects_bounds, || "logit_bounds reports a violation".into());
    finish(4, "six-firm network, logit demand: P* = 6.0313, prices, strict lower bounds", failures);
}

struct PanelRow {
    scenario: &'static str,
    cells: [f64; 8],
}

/// P*, total profit, joint profit of 1 and 2, profits of 3, 4, 5, CS, SW.
fn panels() -> Vec<(f64, Vec<PanelRow>)> {
    let row = |scenario, cells| PanelRow { scenario, cells };
    vec![
        (
            0.25,
            vec![
                row("base", [0.5897, 0.0167, 0.0073, 0.0036, 0.0029, 0.0029, 0.0023, 0.0190]),
                row("A", [0.5294, 0.0260, 0.0072, 0.0072, 0.0058, 0.0058, 0.0046, 0.0306]),
                row("B", [0.5461, 0.0232, 0.0075, 0.0060, 0.0048, 0.0048, 0.0039, 0.0270]),
            ],
        ),
        (
            0.75,
            vec![
                row("base", [0.8447, 0.0705, 0.0341, 0.0170, 0.0097, 0.0097, 0.0056, 0.0761]),
                row("B", [0.8363, 0.0749, 0.0337, 0.0192, 0.0110, 0.0110, 0.0063, 0.0812]),
            ],
        ),
        (
            4.0 / 3.0,
            vec![
                row("base", [0.9231, 0.1348, 0.0699, 0.0350, 0.0150, 0.0150, 0.0064, 0.1412]),
                row("B", [0.9288, 0.1281, 0.0713, 0.0306, 0.0131, 0.0131, 0.0056, 0.1337]),
            ],
        ),
        (
            0.2,
            vec![
                row("base", [0.5283, 0.0123, 0.0053, 0.0026, 0.0022, 0.0022, 0.0018, 0.0142]),
                row("A", [0.4681, 0.0199, 0.0054, 0.0054, 0.0045, 0.0045, 0.0038, 0.0237]),
            ],
        ),
    ]
}

#[test]
fn criterion_05_merger_table() {
    let mut failures = Vec::new();
    let a = Scenario::merger("A", "1", "2");
    let b = Scenario::merger("B", "1", "2").with_extra_edges(&[("1+2", "3")]);
    for (panel, (beta, rows)) in panels().into_iter().enumerate() {
        let base = costless(merger_base(), power(beta));
        let scenarios: Vec<Scenario> =
            rows.iter().skip(1).map(|r| if r.scenario == "A" { a.clone() } else { b.clone() }).collect();
        let cmp = run_comparison(&base, &scenarios, DEFAULT_TOLERANCE).unwrap();
        for row in &rows {
            let outcome = if row.scenario == "base" { &cmp.base } else { cmp.scenario(row.scenario).unwrap() };
            let r = &outcome.report;
            let pi = |label: &str| r.profits[r.index_of(label).unwrap()];
            let joint = r.index_of("1+2").map(|i| r.profits[i]).unwrap_or_else(|| pi("1") + pi("2"));
            let got = [
                r.p_star,
                r.total_profit,
                joint,
                pi("3"),
                pi("4"),
                pi("5"),
                outcome.welfare.consumer_surplus,
                outcome.welfare.social_welfare,
            ];
            let names = ["P*", "sum pi", "pi1+pi2", "pi3", "pi4", "pi5", "CS", "SW"];
            for ((name, g), w) in names.iter().zip(got).zip(row.cells) {
                near(&mut failures, &format!("panel {} {} {name}", panel + 1, row.scenario), g, w, PRINTED);
            }
        }
        let verdicts = |name: &str| cmp.scenario(name).unwrap().verdicts.unwrap();
        match panel {
            0 => {
                let vb = verdicts("B");
                check(&mut failures, vb.pareto == Verdict::Desirable, || "panel 1: B not Pareto".into());
                let va = verdicts("A");
                check(
                    &mut failures,
                    va.socially == Verdict::Desirable && va.privately == Some(Verdict::Undesirable),
                    || "panel 1: A should be socially but not privately desirable".into(),
                );
            }
            1 => {
                let v = verdicts("B");
                check(
                    &mut failures,
                    v.socially == Verdict::Desirable && v.privately == Some(Verdict::Undesirable),
                    || "panel 2: B should be socially but not privately desirable".into(),
                );
            }
            2 => {
                let v = verdicts("B");
                check(
                    &mut failures,
                    v.socially == Verdict::Undesirable && v.privately == Some(Verdict::Desirable),
                    || "panel 3: B should be privately but not socially desirable".into(),
                );
            }
            _ => {
                let v = verdicts("A");
                check(&mut failures, v.pareto == Verdict::Desirable, || "panel 4: A not Pareto".into());
            }
        }
    }
    finish(5, "merger table: every P*, profit, CS and SW cell and the caption verdicts", failures);
}

#[test]
fn criterion_06_monopoly_benchmark() {
    let mut failures = Vec::new();
    let model = costless(InfluenceNetwork::empty(1), linear());
    let exact = solve_exact_closed_form(&model).unwrap();
    check(&mut failures, exact.p_star == ratio(1, 2), || format!("exact P* = {}", exact.p_star));
    let report = solve_default(&model).unwrap();
    check(&mut failures, report.p_star == 0.5, || format!("P* = {}", report.p_star));
    check(&mut failures, report.deadweight_loss == 0.125, || format!("DWL = {}", report.deadweight_loss));

    let mut rng = StdRng::seed_from_u64(6);
    for instance in 0..20 {
        let demand = match instance % 4 {
            0 => DemandSpec::linear(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)),
            1 => DemandSpec::power(rng.gen_range(0.5..2.0), rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), rng.gen_range(0.1..4.0)),
            2 => DemandSpec::logit(rng.gen_range(0.5..2.0), rng.gen_range(0.2..3.0)),
            _ => DemandSpec::exponential(rng.gen_range(2.0..6.0), rng.gen_range(0.5..1.5), rng.gen_range(0.2..2.0)),
        };
        let saturation = demand.saturation();
        let cap = if saturation.is_finite() { 0.3 * saturation } else { 1.0 };
        let (c, c0) = (rng.gen_range(0.0..cap), rng.gen_range(0.0..cap));
        let model = MarketModel::new(InfluenceNetwork::empty(1), vec![c], c0, demand.clone()).unwrap();
        let r = solve_default(&model).unwrap();
        let p = r.p_star;
        // elasticity straight from D and D', not through g
        let elasticity = -demand.demand_slope(p).unwrap() * p / demand.demand(p).unwrap();
        let lerner = (p - c - c0) / p;
        check(&mut failures, (lerner - 1.0 / elasticity).abs() <= ELASTICITY, || {
            format!("instance {instance} ({}): Lerner {lerner} vs 1/elasticity {}", demand.family_name(), 1.0 / elasticity)
        });
    }
    finish(6, "monopoly: P* = 1/2, DWL = 1/8, inverse-elasticity rule on 20 random instances", failures);
}

#[test]
fn criterion_07_dwl_sweep() {
    let mut failures = Vec::new();
    let kinds = [NetworkKind::Empty, NetworkKind::Chain];
    let rows = dwl_sweep(&linear(), 1, 14, &kinds).unwrap();
    for n in 1..=14 {
        let get = |kind| rows.iter().find(|r| r.n == n && r.kind == kind).unwrap();
        let (empty, chain) = (get(NetworkKind::Empty), get(NetworkKind::Chain));
        if n == 1 {
            check(&mut failures, (chain.dwl - empty.dwl).abs() < 1e-15, || "n = 1: kinds differ".into());
        } else {
            check(&mut failures, chain.dwl > empty.dwl, || format!("n = {n}: chain DWL not above empty"));
        }
        // closed forms: B = 2^n - 1 (chain), B = n (empty), DWL = P*^2 / 2
        let p_chain = 1.0 - 0.5f64.powi(n as i32);
        let p_empty = n as f64 / (n as f64 + 1.0);
        near(&mut failures, &format!("chain({n}) DWL"), chain.dwl, p_chain * p_chain / 2.0, SWEEP);
        near(&mut failures, &format!("empty({n}) DWL"), empty.dwl, p_empty * p_empty / 2.0, SWEEP);
    }
    let at10 = |kind| rows.iter().find(|r| r.n == 10 && r.kind == kind).unwrap().dwl;
    near(&mut failures, "chain(10) DWL", at10(NetworkKind::Chain), 0.5 * (1023.0f64 / 1024.0).powi(2), SWEEP);
    near(&mut failures, "empty(10) DWL", at10(NetworkKind::Empty), 50.0 / 121.0, SWEEP);

    let gap_ratio = |beta: f64| {
        let rows = dwl_sweep(&power(beta), 1, 14, &kinds).unwrap();
        rows.chunks(2).map(|pair| pair[1].dwl / pair[0].dwl).fold(0.0f64, f64::max)
    };
    let (low, high) = (gap_ratio(0.1), gap_ratio(10.0));
    check(&mut failures, low < high, || format!("gap ratio at beta 1/10 ({low}) not below beta 10 ({high})"));
    finish(7, "deadweight loss: sequential above simultaneous, closed forms, power-demand gap ratios", failures);
}

#[test]
fn criterion_08_property_suite() {
    let mut failures = Vec::new();
    let parts: [(&str, fn() -> Vec<String>); 6] = [
        ("(a) kernel sign pattern", properties::sign_pattern),
        ("(b) edge addition raises prices", properties::edge_addition_monotonicity),
        ("(c) influentiality ordering", properties::ordering_on_acceptance_instances),
        ("(d) deviation checks", properties::deviation_checks),
        ("(e) tariff invariance and dP*/dC", properties::tariff_properties),
        ("(f) demand-scale invariance", properties::scale_invariance),
    ];
    for (name, run) in parts {
        for f in run() {
            failures.push(format!("{name}: {f}"));
        }
    }
    finish(8, "property suite (a)-(f)", failures);
}

#[test]
fn criterion_09_logit_asymptotics() {
    let mut failures = Vec::new();
    for (kind, make) in [("empty", InfluenceNetwork::empty as fn(usize) -> InfluenceNetwork), ("chain", InfluenceNetwork::chain)] {
        let gaps: Vec<f64> =
            (5..=12).map(|n| solve_default(&costless(make(n), logit())).unwrap().p_star - n as f64).collect();
        for (i, g) in gaps.iter().enumerate() {
            check(&mut failures, *g > 0.0, || format!("{kind}({}) gap {g} not positive", i + 5));
        }
        for (i, w) in gaps.windows(2).enumerate() {
            check(&mut failures, w[1] < w[0], || format!("{kind} gap rises from n = {} to {}", i + 5, i + 6));
        }
        let last = gaps[gaps.len() - 1];
        check(&mut failures, last < LOGIT_GAP_AT_12, || format!("{kind}(12) gap {last:.3e} not below {LOGIT_GAP_AT_12:e}"));
    }
    finish(9, "logit gap P* - n positive, decreasing for n = 5..12, below 1e-4 at n = 12", failures);
}

#[test]
fn criterion_10_beta_weights() {
    let mut failures = Vec::new();
    let model = costless(fig4(), power(0.5));
    let report = solve_default(&model).unwrap();
    let closed = solve_linear_closed_form(&model).unwrap();
    // B = 6/2 + 6/4 + 1/8 = 37/8, P* = B / (1 + B)
    near(&mut failures, "P*", report.p_star, 37.0 / 45.0, GENERIC);
    near(&mut failures, "closed-form P*", closed.p_star, report.p_star, GENERIC);
    for i in 0..report.len() {
        near(&mut failures, &format!("p_{}", report.firms[i]), closed.prices[i], report.prices[i], GENERIC);
    }
    let exact = solve_exact_closed_form(&model).unwrap();
    check(&mut failures, exact.p_star == ratio(37, 45), || format!("exact P* = {}", exact.p_star));
    check(&mut failures, exact.p_star != ratio(37, 41), || "reproduced the beta^(k-1) weighting".into());
    for i in 0..report.len() {
        let c = deviation_check_default(&model, &report, i).unwrap();
        check(&mut failures, c.passed, || format!("firm {} has a profitable deviation", report.firms[i]));
        let bad = perturb_price(&model, &report, i, 0.01).unwrap();
        check(&mut failures, !deviation_check_default(&model, &bad, i).unwrap().passed, || {
            format!("perturbed report for firm {} accepted", report.firms[i])
        });
    }
    finish(10, "quadratic demand on the six-firm network: P* = 37/45 with beta^k weights", failures);
}
