//! Deadweight loss of simultaneous (empty) versus fully sequential (chain)
//! pricing as the number of firms grows.

use pricenet::scenarios::{dwl_sweep, sweep_csv, NetworkKind};
use pricenet::DemandSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let kinds = [NetworkKind::Empty, NetworkKind::Chain];
    let rows = dwl_sweep(&DemandSpec::linear(1.0, 1.0), 1, 14, &kinds)?;
    print!("{}", sweep_csv(&rows));

    for beta in [0.1, 10.0] {
        let rows = dwl_sweep(&DemandSpec::power(1.0, 1.0, 1.0, beta), 1, 14, &kinds)?;
        let worst = rows
            .chunks(2)
            .map(|pair| pair[1].dwl / pair[0].dwl)
            .fold(1.0f64, f64::max);
        println!("beta = {beta}: largest chain/empty DWL ratio {worst:.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
