//! Checking an equilibrium without trusting the solver: unilateral
//! deviations on a grid, and backward induction on a sequential chain.

use pricenet::oracle::{chain_backward_induction, deviation_check_default, perturb_price, ChainOptions};
use pricenet::{solve_default, DemandSpec, InfluenceNetwork, MarketModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = MarketModel::costless(InfluenceNetwork::chain(2), DemandSpec::logit(1.0, 1.0))?;
    let report = solve_default(&model)?;
    println!("chain(2), logit: P* = {:.6}, prices {:.6?}", report.p_star, report.prices);

    let check = deviation_check_default(&model, &report, 0)?;
    println!(
        "leader deviation grid: {} points, best {:.6} at {:.6}, equilibrium {:.6}: {}",
        check.curve.profits.len(),
        check.curve.best_profit(),
        check.curve.best_price(),
        check.equilibrium_profit,
        if check.passed { "pass" } else { "FAIL" }
    );

    let bad = perturb_price(&model, &report, 0, 0.05)?;
    let rejected = !deviation_check_default(&model, &bad, 0)?.passed;
    println!("report with p_1 raised by 0.05 rejected: {rejected}");

    for n in 2..=4 {
        let model = MarketModel::costless(InfluenceNetwork::chain(n), DemandSpec::power(1.0, 1.0, 1.0, 0.5))?;
        let induced = chain_backward_induction(&model, ChainOptions::default())?;
        let solved = solve_default(&model)?;
        println!(
            "chain({n}), (1-P)^2: backward induction {:.9}, solver {:.9}",
            induced.p_star, solved.p_star
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
