//! Merger scenarios for firms 1 and 2 in a five-firm chain, under four
//! power demands. Scenario A contracts the two firms; scenario B also lets
//! the merged firm influence firm 3.

use std::path::Path;

use pricenet::equilibrium::DEFAULT_TOLERANCE;
use pricenet::io::{comparison_table, load_scenarios};
use pricenet::scenarios::run_comparison;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/models");
    for (panel, demand) in [(1, "(1-P)^4"), (2, "(1-P)^(4/3)"), (3, "(1-P)^(3/4)"), (4, "(1-P)^5")] {
        let (base, scenarios) = load_scenarios(&dir.join(format!("table2_panel{panel}.json")))?;
        let report = run_comparison(&base, &scenarios, DEFAULT_TOLERANCE)?;
        println!("panel {panel}: D(P) = {demand}");
        print!("{}", comparison_table(&report));
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
