//! File formats: model, scenario and sweep inputs as JSON, reports as JSON,
//! CSV or a plain-text table.
//!
//! A model file is self-contained:
//!
//! ```json
//! {
//!   "firms": [{"name": "1", "cost": 0.0}, {"name": "2"}],
//!   "edges": [["1", "2"]],
//!   "c0": 0.0,
//!   "demand": {"family": "linear", "a": 1.0, "b": 1.0}
//! }
//! ```
//!
//! Edges must already be transitive; the loader reports violations instead
//! of repairing them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::demand::DemandSpec;
use crate::equilibrium::{round_significant, EquilibriumReport, MarketModel, ModelError};
use crate::network::{InfluenceNetwork, NetworkError};
use crate::scenarios::{ComparisonReport, Merger, NetworkKind, Scenario, ScenarioDelta, Tariff, Verdict};

/// Significant digits in machine-readable output.
pub const OUTPUT_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Network(#[from] NetworkError),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("scenario {0}: give either \"merge\" or \"tariffs\", not both")]
    AmbiguousScenario(String),
    #[error("scenario {0}: needs \"merge\" or \"tariffs\"")]
    EmptyScenario(String),
}

impl InputError {
    /// The input parsed but describes an invalid influence network.
    pub fn is_validation_failure(&self) -> bool {
        matches!(self, InputError::Network(NetworkError::Invalid { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirmEntry {
    pub name: String,
    #[serde(default)]
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub firms: Vec<FirmEntry>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub c0: f64,
    pub demand: DemandSpec,
}

impl ModelFile {
    pub fn network(&self) -> Result<InfluenceNetwork, NetworkError> {
        let labels = self.firms.iter().map(|f| f.name.clone()).collect();
        InfluenceNetwork::from_labelled_edges(labels, &self.edges)
    }

    pub fn into_model(self) -> Result<MarketModel, InputError> {
        let network = self.network()?;
        let costs = self.firms.iter().map(|f| f.cost).collect();
        Ok(MarketModel::new(network, costs, self.c0, self.demand)?)
    }

    pub fn from_model(model: &MarketModel) -> Self {
        let net = model.network();
        ModelFile {
            firms: net
                .labels()
                .iter()
                .zip(model.costs())
                .map(|(name, &cost)| FirmEntry { name: name.clone(), cost })
                .collect(),
            edges: net
                .edges()
                .into_iter()
                .map(|(i, j)| (net.label(i).to_string(), net.label(j).to_string()))
                .collect(),
            c0: model.price_taker_cost(),
            demand: model.demand().clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_cost: Option<f64>,
    /// Explicit post-merger influence edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tariffs: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_taker_tariff: Option<f64>,
}

impl ScenarioEntry {
    pub fn to_scenario(&self) -> Result<Scenario, InputError> {
        let tariff = self.tariffs.is_some() || self.price_taker_tariff.is_some();
        let delta = match (&self.merge, tariff) {
            (Some(_), true) => return Err(InputError::AmbiguousScenario(self.name.clone())),
            (None, false) => return Err(InputError::EmptyScenario(self.name.clone())),
            (Some(firms), false) => ScenarioDelta::Merger(Merger {
                firms: firms.clone(),
                extra_edges: self.extra_edges.clone(),
                merged_cost: self.merged_cost,
                network: self.network.clone(),
            }),
            (None, true) => ScenarioDelta::Tariff(Tariff {
                firms: self.tariffs.iter().flatten().map(|(f, t)| (f.clone(), *t)).collect(),
                price_taker: self.price_taker_tariff.unwrap_or(0.0),
            }),
        };
        Ok(Scenario { name: self.name.clone(), delta })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub base: ModelFile,
    pub scenarios: Vec<ScenarioEntry>,
}

impl ScenarioFile {
    pub fn into_parts(self) -> Result<(MarketModel, Vec<Scenario>), InputError> {
        let scenarios = self.scenarios.iter().map(ScenarioEntry::to_scenario).collect::<Result<_, _>>()?;
        Ok((self.base.into_model()?, scenarios))
    }
}

fn default_kinds() -> Vec<NetworkKind> {
    vec![NetworkKind::Empty, NetworkKind::Chain]
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub demand: DemandSpec,
    #[serde(default = "one")]
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<NetworkKind>,
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Read { path: path.display().to_string(), source })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text)
        .map_err(|e| InputError::Parse { path: path.display().to_string(), message: e.to_string() })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    parse(path, &read(path)?)
}

pub fn load_model(path: &Path) -> Result<MarketModel, InputError> {
    read_json::<ModelFile>(path)?.into_model()
}

pub fn load_scenarios(path: &Path) -> Result<(MarketModel, Vec<Scenario>), InputError> {
    read_json::<ScenarioFile>(path)?.into_parts()
}

/// `x` at [`OUTPUT_DIGITS`] significant digits, in plain decimal notation.
pub fn format_number(x: f64) -> String {
    let r = round_significant(x, OUTPUT_DIGITS);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_significant(x, OUTPUT_DIGITS)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to [`OUTPUT_DIGITS`] significant
/// digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("values serialize")
}

pub fn report_from_json(text: &str) -> Result<EquilibriumReport, serde_json::Error> {
    serde_json::from_str(text)
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

/// One row per firm plus a `TOTAL` row carrying the aggregates.
pub fn report_csv(report: &EquilibriumReport) -> String {
    let f = format_number;
    let mut rows = vec![[
        "firm",
        "cost",
        "price",
        "markup",
        "profit",
        "quantity",
        "consumer_surplus",
        "deadweight_loss",
        "social_welfare",
    ]
    .map(String::from)
    .to_vec()];
    for i in 0..report.len() {
        rows.push(vec![
            report.firms[i].clone(),
            f(report.prices[i] - report.markups[i]),
            f(report.prices[i]),
            f(report.markups[i]),
            f(report.profits[i]),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    rows.push(vec![
        "TOTAL".into(),
        f(report.total_cost),
        f(report.p_star),
        f(report.p_star - report.total_cost),
        f(report.total_profit),
        f(report.quantity),
        f(report.consumer_surplus),
        f(report.deadweight_loss),
        f(report.social_welfare),
    ]);
    csv_string(rows)
}

pub(crate) fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub(crate) fn d4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

pub fn report_table(report: &EquilibriumReport) -> String {
    let mut rows = vec![["firm", "cost", "price", "markup", "profit"].map(String::from).to_vec()];
    for i in 0..report.len() {
        rows.push(vec![
            report.firms[i].clone(),
            d4(report.prices[i] - report.markups[i]),
            d4(report.prices[i]),
            d4(report.markups[i]),
            d4(report.profits[i]),
        ]);
    }
    let mut out = pad_table(&rows);
    let _ = writeln!(out, "P* = {}  C = {}  D(P*) = {}", d4(report.p_star), d4(report.total_cost), d4(report.quantity));
    let _ = writeln!(
        out,
        "profit = {}  CS = {}  SW = {}  DWL = {}",
        d4(report.total_profit),
        d4(report.consumer_surplus),
        d4(report.social_welfare),
        d4(report.deadweight_loss)
    );
    out
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Desirable => "yes",
        Verdict::Undesirable => "no",
        Verdict::Neutral => "neutral",
    }
}

/// Profits of an outcome's firms against a column layout of post-scenario
/// firms; the base sums each column's constituents.
fn profit_columns(outcome: &crate::scenarios::ScenarioOutcome, columns: &[(String, Vec<String>)]) -> Vec<String> {
    let r = &outcome.report;
    columns
        .iter()
        .map(|(label, parts)| {
            if let Some(i) = r.index_of(label) {
                d4(r.profits[i])
            } else if parts.iter().all(|p| r.index_of(p).is_some()) {
                d4(parts.iter().map(|p| r.profits[r.index_of(p).unwrap()]).sum())
            } else {
                "-".into()
            }
        })
        .collect()
}

/// Side-by-side comparison: `P*`, total profit, per-firm profit, CS, SW and
/// the verdicts, one row per scenario.
pub fn comparison_table(report: &ComparisonReport) -> String {
    let columns: Vec<(String, Vec<String>)> = match report.scenarios.first().and_then(|s| s.delta.as_ref()) {
        Some(delta) => delta.firms.iter().map(|f| (f.firm.clone(), f.constituents.clone())).collect(),
        None => report.base.report.firms.iter().map(|f| (f.clone(), vec![f.clone()])).collect(),
    };
    let tariffs = report.scenarios.iter().any(|s| s.welfare.tariff_revenue != 0.0);
    let mut header = vec!["scenario".to_string(), "P*".into(), "sum pi".into()];
    header.extend(columns.iter().map(|(label, _)| format!("pi {label}")));
    header.extend(["CS".into(), "SW".into()]);
    if tariffs {
        header.extend(["revenue".into(), "TW".into()]);
    }
    header.extend(["social".into(), "private".into(), "pareto".into()]);
    let mut rows = vec![header];
    for outcome in report.outcomes() {
        let w = &outcome.welfare;
        let mut row = vec![outcome.name.clone(), d4(outcome.report.p_star), d4(w.total_profit)];
        row.extend(profit_columns(outcome, &columns));
        row.extend([d4(w.consumer_surplus), d4(w.social_welfare)]);
        if tariffs {
            row.extend([d4(w.tariff_revenue), d4(w.total_welfare)]);
        }
        match &outcome.verdicts {
            Some(v) => row.extend([
                verdict_word(v.socially).to_string(),
                v.privately.map(verdict_word).unwrap_or("-").to_string(),
                verdict_word(v.pareto).to_string(),
            ]),
            None => row.extend(["-".to_string(), "-".into(), "-".into()]),
        }
        rows.push(row);
    }
    pad_table(&rows)
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let f = format_number;
    let mut rows = vec![[
        "scenario",
        "P_star",
        "total_profit",
        "consumer_surplus",
        "social_welfare",
        "tariff_revenue",
        "total_welfare",
        "socially",
        "privately",
        "pareto",
    ]
    .map(String::from)
    .to_vec()];
    for outcome in report.outcomes() {
        let w = &outcome.welfare;
        let (s, p, pa) = match &outcome.verdicts {
            Some(v) => (
                verdict_word(v.socially).to_string(),
                v.privately.map(verdict_word).unwrap_or("").to_string(),
                verdict_word(v.pareto).to_string(),
            ),
            None => Default::default(),
        };
        rows.push(vec![
            outcome.name.clone(),
            f(outcome.report.p_star),
            f(w.total_profit),
            f(w.consumer_surplus),
            f(w.social_welfare),
            f(w.tariff_revenue),
            f(w.total_welfare),
            s,
            p,
            pa,
        ]);
    }
    csv_string(rows)
}

/// Generic CSV from a header and rows of numbers.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> String {
    let mut out = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (label, values) in rows {
        let mut row = vec![label];
        row.extend(values.into_iter().map(format_number));
        out.push(row);
    }
    csv_string(out)
}

/// Plain-text table from a header and rows of numbers, 4 decimals.
pub fn numeric_table(header: &[&str], rows: impl IntoIterator<Item = (String, Vec<f64>)>) -> String {
    let mut out = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (label, values) in rows {
        let mut row = vec![label];
        row.extend(values.into_iter().map(d4));
        out.push(row);
    }
    pad_table(&out)
}
