//! The `pricenet` command run in-process on the bundled model files.

use std::path::Path;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/models");
    let model = |name: &str| dir.join(name).display().to_string();
    let runs: [Vec<String>; 5] = [
        vec!["validate".into(), model("cyclic.json")],
        vec!["solve".into(), model("fig4_linear.json"), "--exact".into()],
        vec!["verify".into(), model("diamond.json")],
        vec!["centrality".into(), model("fig4_quadratic.json")],
        vec!["compare".into(), model("table2_panel1.json"), "--format".into(), "csv".into()],
    ];
    for args in runs {
        println!("$ pricenet {}", args.join(" "));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = pricenet::cli::run(std::iter::once("pricenet".to_string()).chain(args), &mut out, &mut err);
        print!("{}{}", String::from_utf8(out)?, String::from_utf8(err)?);
        println!("(exit {code})\n");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
