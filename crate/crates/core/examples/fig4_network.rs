//! Six firms: L leads T, F and C; R leads D, and both lead F.
//!
//! Influentiality under linear demand is Bonacich centrality, while logit
//! demand keeps every markup just above `1 / alpha`.

use pricenet::equilibrium::{bonacich, logit_bounds, DEFAULT_TOLERANCE};
use pricenet::{solve_default, DemandSpec, InfluenceNetwork, MarketModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let labels = ["L", "T", "F", "C", "D", "R"].map(String::from).to_vec();
    let edges = [("L", "T"), ("L", "F"), ("L", "C"), ("D", "F"), ("R", "F"), ("R", "D")];
    let net = InfluenceNetwork::from_labelled_edges(labels, &edges)?;
    println!("{net}");
    println!("paths by length: {:?}", net.path_counts().totals);

    let linear = MarketModel::costless(net.clone(), DemandSpec::linear(1.0, 1.0))?;
    let report = solve_default(&linear)?;
    let centrality = bonacich(&net, 1.0);
    println!("linear demand, P* = {:.6} (13/14 = {:.6})", report.p_star, 13.0 / 14.0);
    for i in 0..net.len() {
        println!(
            "  {}: price {:.6} = {}/14, Bonacich {}",
            net.label(i),
            report.prices[i],
            (report.prices[i] * 14.0).round(),
            centrality[i]
        );
    }

    let logit = linear.with_demand(DemandSpec::logit(1.0, 1.0))?;
    let bounds = logit_bounds(&logit, DEFAULT_TOLERANCE)?;
    println!("logit demand, P* = {:.6}, lower bound {}", bounds.p_star, bounds.price_lower_bound);
    for i in 0..net.len() {
        println!("  {}: price {:.6}, above 1 by {:.2e}", net.label(i), bounds.prices[i], bounds.firm_gaps[i]);
    }
    println!("strict bounds hold: {}", bounds.respects_bounds);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
