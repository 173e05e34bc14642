//! Four firms, two of which move first: 1 influences 3 and 4, 2 influences 4.
//!
//! Solves the game three ways: the generic root finder, the exact rational
//! closed form, and the hand-derived affine best responses.

use pricenet::equilibrium::solve_exact_closed_form;
use pricenet::oracle::{diamond_linear_oracle, verify_all};
use pricenet::{solve_default, DemandSpec, InfluenceNetwork, MarketModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let labels = ["1", "2", "3", "4"].map(String::from).to_vec();
    let net = InfluenceNetwork::from_labelled_edges(labels, &[("1", "3"), ("1", "4"), ("2", "4")])?;
    let model = MarketModel::costless(net, DemandSpec::linear(1.0, 1.0))?;

    let report = solve_default(&model)?;
    println!("P* = {:.6}", report.p_star);
    for (firm, price) in report.firms.iter().zip(&report.prices) {
        println!("  p_{firm} = {price:.6}");
    }

    let exact = solve_exact_closed_form(&model)?;
    let prices: Vec<String> = exact.prices.iter().map(|p| p.to_string()).collect();
    println!("exact: P* = {}, prices = [{}]", exact.p_star, prices.join(", "));

    let oracle = diamond_linear_oracle();
    println!(
        "best responses: p3(p1) = {} + ({}) p1, p4(p1, p2) = {} + ({}) p1 + ({}) p2",
        oracle.response3[0], oracle.response3[1], oracle.response4[0], oracle.response4[1], oracle.response4[2]
    );

    for check in verify_all(&model, &report)? {
        println!("  firm {} deviation check: {}", report.firms[check.curve.firm], if check.passed { "pass" } else { "FAIL" });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
