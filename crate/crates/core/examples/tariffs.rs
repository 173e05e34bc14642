//! Tariffs raise costs. Only their total moves the final price, so a
//! uniform tariff and a lump tariff on one firm give identical aggregates.

use pricenet::equilibrium::DEFAULT_TOLERANCE;
use pricenet::io::comparison_table;
use pricenet::scenarios::{run_comparison, tariff_sensitivity, Scenario};
use pricenet::{DemandSpec, InfluenceNetwork, MarketModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let labels = ["L", "T", "F", "C", "D", "R"].map(String::from).to_vec();
    let edges = [("L", "T"), ("L", "F"), ("L", "C"), ("D", "F"), ("R", "F"), ("R", "D")];
    let net = InfluenceNetwork::from_labelled_edges(labels, &edges)?;
    let base = MarketModel::new(net, vec![0.02; 6], 0.05, DemandSpec::power(1.0, 1.0, 1.0, 0.5))?;

    let uniform: Vec<(&str, f64)> = ["L", "T", "F", "C", "D", "R"].iter().map(|f| (*f, 0.01)).collect();
    let scenarios = vec![
        Scenario::tariff("uniform", &uniform, 0.0),
        Scenario::tariff("lump_on_T", &[("T", 0.06)], 0.0),
        Scenario::tariff("import", &[], 0.06),
    ];
    let report = run_comparison(&base, &scenarios, DEFAULT_TOLERANCE)?;
    print!("{}", comparison_table(&report));

    let s = tariff_sensitivity(&base, 0.0)?;
    println!("dP*/dC = {:.6}, dTW/dP* = {:.6}", s.dp_dc, s.dtw_dp);
    for (firm, d) in base.network().labels().iter().zip(&s.dprofit_dc) {
        println!("  d pi_{firm} / dC = {d:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
