//! Any demand curve given as a closure; derivatives of the markup kernel
//! come from finite differences.

use pricenet::{solve_default, CustomDemand, DemandSpec, InfluenceNetwork, MarketModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Gaussian demand: markup kernel 1 / (2P)
    let demand = CustomDemand::new(|p: f64| (-p * p).exp(), 4);
    let net = InfluenceNetwork::from_edges(3, &[(0, 1), (0, 2), (1, 2)])?;
    let model = MarketModel::costless(net, DemandSpec::custom(demand))?;
    let report = solve_default(&model)?;
    println!("P* = {:.6}, D(P*) = {:.6}", report.p_star, report.quantity);
    for (firm, (p, pi)) in report.firms.iter().zip(report.prices.iter().zip(&report.profits)) {
        println!("  firm {firm}: price {p:.6}, profit {pi:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
