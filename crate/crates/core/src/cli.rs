//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid network (or a merger producing one),
//! 2 solver or verification failure, 3 bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::equilibrium::{
    bonacich, degree, logit_bounds, solve, solve_exact_closed_form, MarketModel, SolveError,
    DEFAULT_TOLERANCE,
};
use crate::io::{self, d4, pad_table, InputError, ModelFile, SweepFile};
use crate::network::NetworkError;
use crate::oracle::{deviation_check, DeviationCheck, OracleError};
use crate::scenarios::{dwl_sweep, run_comparison, sweep_csv, ScenarioError};
use crate::DemandSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "pricenet", version, about = "Equilibrium prices on supply-chain influence networks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Residual tolerance of the equilibrium solver.
    #[arg(long, global = true, env = "PRICENET_TOL")]
    pub tol: Option<f64>,
    /// Exact rational arithmetic (linear and power demand only).
    #[arg(long, global = true)]
    pub exact: bool,
    /// Run the deviation check after solving.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a model's influence network is acyclic and transitive.
    Validate { model: PathBuf },
    /// Solve for the equilibrium prices.
    Solve { model: PathBuf },
    /// Bonacich centrality, degree and influentiality of every firm.
    Centrality {
        model: PathBuf,
        /// Decay parameter; defaults to the demand's own for linear and power demand.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Check that no firm gains from a unilateral price deviation.
    Verify {
        model: PathBuf,
        /// Grid half-width; defaults to half of each firm's markup.
        #[arg(long)]
        width: Option<f64>,
        /// Grid points per firm.
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Directory for per-firm deviation-curve CSV files.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Compare merger and tariff scenarios against a base model.
    Compare { scenarios: PathBuf },
    /// Deadweight loss of empty and chain networks across sizes.
    DwlSweep { params: PathBuf },
    /// Logit price lower bounds and the gaps above them.
    LogitBounds { model: PathBuf },
}

/// A failed run: exit code and one-line diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Failure { code: 1, message: message.to_string() }
    }
    fn solver(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
    fn input(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string() }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        if e.is_validation_failure() {
            Failure::validation(e)
        } else {
            Failure::input(e)
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::WrongFamily { .. } | SolveError::NotRational(_) | SolveError::Model(_) => {
                Failure::input(e)
            }
            _ => Failure::solver(e),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match &e {
            ScenarioError::Network { source: NetworkError::ResultCyclic { .. } | NetworkError::Invalid { .. }, .. } => {
                Failure::validation(e)
            }
            ScenarioError::Solve { .. } => Failure::solver(e),
            _ => Failure::input(e),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Solve(s) => s.into(),
            OracleError::BadGrid { .. } => Failure::input(e),
            _ => Failure::solver(e),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return 0;
                }
                _ => 3,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(&config, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    if !text.ends_with('\n') {
        out.write_all(b"\n").map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    }
    Ok(())
}

fn tolerance(config: &RunConfig) -> Result<f64, Failure> {
    match config.tol {
        None => Ok(DEFAULT_TOLERANCE),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(Failure::input(format!("tolerance must be positive, got {t}"))),
    }
}

fn load_model(path: &Path) -> Result<MarketModel, Failure> {
    Ok(io::load_model(path)?)
}

fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let tol = tolerance(config)?;
    if config.exact && !matches!(config.command, Command::Solve { .. }) {
        return Err(Failure::input("--exact applies only to solve"));
    }
    match &config.command {
        Command::Validate { model } => validate(config, model, out),
        Command::Solve { model } => solve_cmd(config, model, tol, out),
        Command::Centrality { model, beta } => centrality(config, model, *beta, tol, out),
        Command::Verify { model, width, points, curves } => {
            let model = load_model(model)?;
            let report = solve(&model, tol)?;
            verify(config, &model, &report, *width, *points, curves.as_deref(), out)
        }
        Command::Compare { scenarios } => {
            let (base, scenarios) = io::load_scenarios(scenarios)?;
            let report = run_comparison(&base, &scenarios, tol)?;
            let text = match config.format {
                Format::Table => io::comparison_table(&report),
                Format::Json => io::to_json(&report),
                Format::Csv => io::comparison_csv(&report),
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::DwlSweep { params } => {
            let p: SweepFile = io::read_json(params)?;
            let rows = dwl_sweep(&p.demand, p.n_min, p.n_max, &p.kinds)?;
            let text = match config.format {
                Format::Json => io::to_json(&rows),
                Format::Csv => sweep_csv(&rows),
                Format::Table => {
                    let mut t = vec![["n", "kind", "P*", "DWL"].map(String::from).to_vec()];
                    t.extend(rows.iter().map(|r| vec![r.n.to_string(), r.kind.name().into(), d4(r.p_star), d4(r.dwl)]));
                    pad_table(&t)
                }
            };
            emit(out, &text)?;
            Ok(0)
        }
        Command::LogitBounds { model } => {
            let model = load_model(model)?;
            let b = logit_bounds(&model, tol)?;
            let text = match config.format {
                Format::Json => io::to_json(&b),
                Format::Csv | Format::Table => {
                    let labels = model.network().labels();
                    let rows = (0..labels.len())
                        .map(|i| (labels[i].clone(), vec![b.prices[i], b.firm_lower_bounds[i], b.firm_gaps[i]]))
                        .chain(std::iter::once((
                            "TOTAL".to_string(),
                            vec![b.p_star, b.price_lower_bound, b.gap],
                        )));
                    let header = ["firm", "price", "lower_bound", "gap"];
                    if config.format == Format::Csv {
                        io::numeric_csv(&header, rows)
                    } else {
                        let verdict = if b.respects_bounds { "all bounds hold" } else { "bounds VIOLATED" };
                        format!("{}{verdict}\n", io::numeric_table(&header, rows))
                    }
                }
            };
            emit(out, &text)?;
            Ok(if b.respects_bounds { 0 } else { 2 })
        }
    }
}

#[derive(Serialize)]
struct ValidationSummary<'a> {
    valid: bool,
    firms: &'a [String],
    edges: Vec<(&'a str, &'a str)>,
    depth: usize,
    path_totals: Vec<String>,
}

fn validate(config: &RunConfig, path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let file: ModelFile = io::read_json(path)?;
    let net = file.network().map_err(|e| Failure::from(InputError::from(e)))?;
    file.into_model()?;
    let depth = net.depth();
    // u128 counts do not fit JSON numbers in general
    let totals: Vec<String> = net.path_counts().totals[..depth].iter().map(|t| t.to_string()).collect();
    let text = match config.format {
        Format::Json => io::to_json(&ValidationSummary {
            valid: true,
            firms: net.labels(),
            edges: net.edges().into_iter().map(|(i, j)| (net.label(i), net.label(j))).collect(),
            depth,
            path_totals: totals,
        }),
        Format::Csv => {
            let mut s = String::from("k,paths\n");
            for (k, t) in totals.iter().enumerate() {
                s.push_str(&format!("{},{t}\n", k + 1));
            }
            s
        }
        Format::Table => format!(
            "valid: {} firms, {} edges, depth {}\npaths by length: {}\n",
            net.len(),
            net.edge_count(),
            depth,
            totals.join(" ")
        ),
    };
    emit(out, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct ExactOutput {
    firms: Vec<String>,
    #[serde(rename = "P_star")]
    p_star: String,
    prices: Vec<String>,
    markups: Vec<String>,
    centrality: String,
}

fn solve_cmd(config: &RunConfig, path: &Path, tol: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model(path)?;
    if config.exact {
        let exact = solve_exact_closed_form(&model)?;
        let firms = model.network().labels().to_vec();
        let text = match config.format {
            Format::Json => io::to_json(&ExactOutput {
                firms,
                p_star: exact.p_star.to_string(),
                prices: exact.prices.iter().map(|p| p.to_string()).collect(),
                markups: exact.markups.iter().map(|p| p.to_string()).collect(),
                centrality: exact.centrality.to_string(),
            }),
            Format::Csv | Format::Table => {
                let mut rows = vec![["firm", "price", "markup"].map(String::from).to_vec()];
                for (i, f) in firms.iter().enumerate() {
                    rows.push(vec![f.clone(), exact.prices[i].to_string(), exact.markups[i].to_string()]);
                }
                rows.push(vec!["TOTAL".into(), exact.p_star.to_string(), String::new()]);
                if config.format == Format::Csv {
                    rows.iter().map(|r| r.join(",") + "\n").collect()
                } else {
                    pad_table(&rows)
                }
            }
        };
        emit(out, &text)?;
        return Ok(0);
    }
    let report = solve(&model, tol)?;
    let text = match config.format {
        Format::Table => io::report_table(&report),
        Format::Json => io::to_json(&report),
        Format::Csv => io::report_csv(&report),
    };
    emit(out, &text)?;
    if config.verify {
        return verify(config, &model, &report, None, 101, None, out);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CentralityRow<'a> {
    firm: &'a str,
    degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    bonacich: Option<f64>,
    influentiality: f64,
}

fn centrality(
    config: &RunConfig,
    path: &Path,
    beta: Option<f64>,
    tol: f64,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let model = load_model(path)?;
    let beta = beta.or(match *model.demand() {
        DemandSpec::Linear { .. } => Some(1.0),
        DemandSpec::Power { beta, .. } => Some(beta),
        _ => None,
    });
    let net = model.network();
    let report = solve(&model, tol)?;
    let degrees = degree(net);
    let b = beta.map(|beta| bonacich(net, beta));
    let rows: Vec<CentralityRow> = (0..net.len())
        .map(|i| CentralityRow {
            firm: net.label(i),
            degree: degrees[i],
            bonacich: b.as_ref().map(|b| b[i]),
            influentiality: report.influentiality[i],
        })
        .collect();
    let text = match config.format {
        Format::Json => io::to_json(&rows),
        Format::Csv | Format::Table => {
            let mut header = vec!["firm", "degree"];
            if b.is_some() {
                header.push("bonacich");
            }
            header.push("influentiality");
            let fmt = |x: f64| if config.format == Format::Csv { io::format_number(x) } else { d4(x) };
            let mut t = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            for r in &rows {
                let mut row = vec![r.firm.to_string(), r.degree.to_string()];
                if let Some(v) = r.bonacich {
                    row.push(fmt(v));
                }
                row.push(fmt(r.influentiality));
                t.push(row);
            }
            if config.format == Format::Csv {
                t.iter().map(|r| r.join(",") + "\n").collect()
            } else {
                let mut s = pad_table(&t);
                if let Some(beta) = beta {
                    s.push_str(&format!("beta = {}\n", io::format_number(beta)));
                }
                s
            }
        }
    };
    emit(out, &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyRow<'a> {
    firm: &'a str,
    price: f64,
    profit: f64,
    best_grid_price: f64,
    best_grid_profit: f64,
    dropped: usize,
    induced_increasing: bool,
    consistent: bool,
    passed: bool,
}

fn verify(
    config: &RunConfig,
    model: &MarketModel,
    report: &crate::EquilibriumReport,
    width: Option<f64>,
    points: usize,
    curves: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let net = model.network();
    let checks: Vec<DeviationCheck> = (0..net.len())
        .map(|i| deviation_check(model, report, i, width.unwrap_or(0.5 * report.markups[i]), points))
        .collect::<Result<_, _>>()?;
    if let Some(dir) = curves {
        std::fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        for c in &checks {
            let name = dir.join(format!("deviation_{}.csv", net.label(c.curve.firm)));
            let rows = (0..c.curve.profits.len()).map(|k| {
                (io::format_number(c.curve.deviation_prices[k]), vec![c.curve.induced_prices[k], c.curve.profits[k]])
            });
            std::fs::write(&name, io::numeric_csv(&["price", "induced_price", "profit"], rows))
                .map_err(|e| Failure::input(format!("{}: {e}", name.display())))?;
        }
    }
    let rows: Vec<VerifyRow> = checks
        .iter()
        .map(|c| {
            let i = c.curve.firm;
            VerifyRow {
                firm: net.label(i),
                price: report.prices[i],
                profit: c.equilibrium_profit,
                best_grid_price: c.curve.best_price(),
                best_grid_profit: c.curve.best_profit(),
                dropped: c.curve.dropped.len(),
                induced_increasing: c.curve.is_increasing(),
                consistent: c.consistent,
                passed: c.passed,
            }
        })
        .collect();
    let all = rows.iter().all(|r| r.passed);
    let text = match config.format {
        Format::Json => io::to_json(&rows),
        Format::Csv | Format::Table => {
            let csv = config.format == Format::Csv;
            let fmt = |x: f64| if csv { io::format_number(x) } else { d4(x) };
            let mut t = vec![["firm", "price", "profit", "best_price", "best_profit", "dropped", "result"]
                .map(String::from)
                .to_vec()];
            for r in &rows {
                t.push(vec![
                    r.firm.to_string(),
                    fmt(r.price),
                    fmt(r.profit),
                    fmt(r.best_grid_price),
                    fmt(r.best_grid_profit),
                    r.dropped.to_string(),
                    match (r.passed, r.consistent) {
                        (true, _) => "pass",
                        (false, true) => "FAIL",
                        (false, false) => "FAIL (inconsistent)",
                    }
                    .to_string(),
                ]);
            }
            if csv {
                t.iter().map(|r| r.join(",") + "\n").collect()
            } else {
                let mut s = pad_table(&t);
                s.push_str(if all { "no profitable deviation\n" } else { "profitable deviation found\n" });
                s
            }
        }
    };
    emit(out, &text)?;
    Ok(if all { 0 } else { 2 })
}
