//! Policy experiments on a base market: mergers and tariffs, compared side
//! by side against the base equilibrium, plus the deadweight-loss sweep
//! across empty and chain networks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::DemandSpec;
use crate::equilibrium::{
    solve, solve_linear_closed_form, EquilibriumReport, MarketModel, ModelError, SolveError,
    DEFAULT_TOLERANCE,
};
use crate::network::{Canonical, InfluenceNetwork, NetworkError};

/// Deltas smaller than this count as no change in the verdicts.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Largest network size for the linear/power closed form in a sweep.
pub const CLOSED_FORM_SWEEP_LIMIT: usize = 20;
/// Largest network size for the generic solver in a sweep.
pub const GENERIC_SWEEP_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario {scenario}: unknown firm {firm}")]
    UnknownFirm { scenario: String, firm: String },
    #[error("scenario {scenario}: {source}")]
    Network { scenario: String, source: NetworkError },
    #[error("scenario {scenario}: {source}")]
    Model { scenario: String, source: ModelError },
    #[error("scenario {scenario}: {source}")]
    Solve { scenario: String, source: SolveError },
    #[error("sweep size n = {n} exceeds the limit of {limit} for {method}")]
    SweepTooLarge { n: usize, limit: usize, method: &'static str },
    #[error("sweep range {start}..={end} is empty")]
    EmptyRange { start: usize, end: usize },
}

/// Two firms combining into one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Merger {
    pub firms: [String; 2],
    /// Influences gained by the merged firm, over post-merger labels
    /// (the merged firm is `"a+b"`).
    pub extra_edges: Vec<(String, String)>,
    /// Cost of the merged firm; the sum of both costs when absent.
    pub merged_cost: Option<f64>,
    /// Explicit post-merger influence edges replacing the contracted
    /// network.
    pub network: Option<Vec<(String, String)>>,
}

/// Additive per-unit tariffs on firm costs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tariff {
    /// `(firm label, tariff)` pairs; unlisted firms pay nothing.
    pub firms: Vec<(String, f64)>,
    pub price_taker: f64,
}

impl Tariff {
    pub fn total(&self) -> f64 {
        self.price_taker + self.firms.iter().map(|(_, t)| t).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioDelta {
    Merger(Merger),
    Tariff(Tariff),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub delta: ScenarioDelta,
}

/// The model after a scenario's change, with each post-scenario firm mapped
/// to the base firms it replaces.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedScenario {
    pub model: MarketModel,
    pub constituents: Vec<Vec<usize>>,
    pub merged_firm: Option<usize>,
    pub tariff_total: f64,
}

impl Scenario {
    pub fn merger(name: &str, a: &str, b: &str) -> Self {
        Scenario {
            name: name.to_string(),
            delta: ScenarioDelta::Merger(Merger { firms: [a.to_string(), b.to_string()], ..Merger::default() }),
        }
    }

    pub fn tariff(name: &str, firms: &[(&str, f64)], price_taker: f64) -> Self {
        Scenario {
            name: name.to_string(),
            delta: ScenarioDelta::Tariff(Tariff {
                firms: firms.iter().map(|(f, t)| (f.to_string(), *t)).collect(),
                price_taker,
            }),
        }
    }

    /// Adds post-merger influence edges. No effect on tariff scenarios.
    pub fn with_extra_edges(mut self, edges: &[(&str, &str)]) -> Self {
        if let ScenarioDelta::Merger(m) = &mut self.delta {
            m.extra_edges.extend(edges.iter().map(|(a, b)| (a.to_string(), b.to_string())));
        }
        self
    }

    pub fn apply(&self, base: &MarketModel) -> Result<AppliedScenario, ScenarioError> {
        match &self.delta {
            ScenarioDelta::Merger(m) => self.apply_merger(base, m),
            ScenarioDelta::Tariff(t) => self.apply_tariff(base, t),
        }
    }

    fn index(&self, net: &InfluenceNetwork, firm: &str) -> Result<usize, ScenarioError> {
        net.index_of(firm)
            .ok_or_else(|| ScenarioError::UnknownFirm { scenario: self.name.clone(), firm: firm.to_string() })
    }

    fn apply_merger(&self, base: &MarketModel, m: &Merger) -> Result<AppliedScenario, ScenarioError> {
        let net = base.network();
        let i = self.index(net, &m.firms[0])?;
        let j = self.index(net, &m.firms[1])?;
        let network_err = |source| ScenarioError::Network { scenario: self.name.clone(), source };
        let contracted = net.merge_nodes(i, j, &[]).map_err(network_err)?;
        let labels = contracted.labels().to_vec();
        let edges: Vec<(String, String)> = match &m.network {
            Some(explicit) => explicit.clone(),
            None => contracted
                .edges()
                .into_iter()
                .map(|(a, b)| (labels[a].clone(), labels[b].clone()))
                .chain(m.extra_edges.iter().cloned())
                .collect(),
        };
        let mut adjacency = vec![vec![false; labels.len()]; labels.len()];
        for (a, b) in &edges {
            let a = self.index(&contracted, a)?;
            let b = self.index(&contracted, b)?;
            adjacency[a][b] = true;
        }
        if m.network.is_none() {
            crate::network::transitive_closure(&mut adjacency);
        }
        let closed: Vec<(String, String)> = (0..labels.len())
            .flat_map(|a| (0..labels.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| adjacency[a][b])
            .map(|(a, b)| (labels[a].clone(), labels[b].clone()))
            .collect();
        let network = InfluenceNetwork::from_labelled_edges(labels, &closed).map_err(|e| match e {
            NetworkError::Invalid { violations, labels } => {
                network_err(NetworkError::ResultCyclic { violations, labels })
            }
            other => network_err(other),
        })?;

        let (keep, drop) = (i.min(j), i.max(j));
        let mut constituents: Vec<Vec<usize>> = (0..net.len()).filter(|&v| v != drop).map(|v| vec![v]).collect();
        constituents[keep] = vec![i, j];
        let mut costs: Vec<f64> = constituents.iter().map(|c| c.iter().map(|&v| base.costs()[v]).sum()).collect();
        if let Some(cost) = m.merged_cost {
            costs[keep] = cost;
        }
        let model = base
            .with_network(network, costs)
            .map_err(|source| ScenarioError::Model { scenario: self.name.clone(), source })?;
        Ok(AppliedScenario { model, constituents, merged_firm: Some(keep), tariff_total: 0.0 })
    }

    fn apply_tariff(&self, base: &MarketModel, t: &Tariff) -> Result<AppliedScenario, ScenarioError> {
        let net = base.network();
        let mut costs = base.costs().to_vec();
        for (firm, tariff) in &t.firms {
            costs[self.index(net, firm)?] += tariff;
        }
        let model = base
            .with_costs(costs, base.price_taker_cost() + t.price_taker)
            .map_err(|source| ScenarioError::Model { scenario: self.name.clone(), source })?;
        Ok(AppliedScenario {
            model,
            constituents: (0..net.len()).map(|v| vec![v]).collect(),
            merged_firm: None,
            tariff_total: t.total(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Desirable,
    Undesirable,
    Neutral,
}

impl Verdict {
    pub fn of(delta: f64) -> Self {
        if delta > TIE_TOLERANCE {
            Verdict::Desirable
        } else if delta < -TIE_TOLERANCE {
            Verdict::Undesirable
        } else {
            Verdict::Neutral
        }
    }

    /// Desirable only if every change is desirable; undesirable if any is.
    pub fn all(deltas: impl IntoIterator<Item = f64>) -> Self {
        let mut out = Verdict::Desirable;
        for d in deltas {
            match Verdict::of(d) {
                Verdict::Undesirable => return Verdict::Undesirable,
                Verdict::Neutral => out = Verdict::Neutral,
                Verdict::Desirable => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelfareBlock {
    pub consumer_surplus: f64,
    pub total_profit: f64,
    pub social_welfare: f64,
    /// `D(P*) T`
    pub tariff_revenue: f64,
    /// `CS + sum of profits + D(P*) T`
    pub total_welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmDelta {
    pub firm: String,
    /// Base firms whose profits are summed for `before`.
    pub constituents: Vec<String>,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBlock {
    #[serde(rename = "P_star")]
    pub p_star: f64,
    pub consumer_surplus: f64,
    pub social_welfare: f64,
    pub total_profit: f64,
    pub total_welfare: f64,
    pub firms: Vec<FirmDelta>,
    /// Index into `firms` of the merged entity.
    pub merged_firm: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// Total welfare rises.
    pub socially: Verdict,
    /// The merging firms' joint profit rises; `None` without a merger.
    pub privately: Option<Verdict>,
    /// Consumer surplus and every firm's profit rise.
    pub pareto: Verdict,
}

impl Verdicts {
    pub fn from_delta(delta: &DeltaBlock) -> Self {
        Verdicts {
            socially: Verdict::of(delta.total_welfare),
            privately: delta.merged_firm.map(|m| Verdict::of(delta.firms[m].delta)),
            pareto: Verdict::all(
                std::iter::once(delta.consumer_surplus).chain(delta.firms.iter().map(|f| f.delta)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub report: EquilibriumReport,
    pub welfare: WelfareBlock,
    /// Absent for the base.
    pub delta: Option<DeltaBlock>,
    pub verdicts: Option<Verdicts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub base: ScenarioOutcome,
    pub scenarios: Vec<ScenarioOutcome>,
}

impl ComparisonReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioOutcome> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Base first, then scenarios in input order.
    pub fn outcomes(&self) -> impl Iterator<Item = &ScenarioOutcome> {
        std::iter::once(&self.base).chain(&self.scenarios)
    }
}

fn welfare_block(report: &EquilibriumReport, tariff_total: f64) -> WelfareBlock {
    let tariff_revenue = report.quantity * tariff_total;
    WelfareBlock {
        consumer_surplus: report.consumer_surplus,
        total_profit: report.total_profit,
        social_welfare: report.social_welfare,
        tariff_revenue,
        total_welfare: report.social_welfare + tariff_revenue,
    }
}

fn delta_block(
    base: &EquilibriumReport,
    base_welfare: &WelfareBlock,
    applied: &AppliedScenario,
    report: &EquilibriumReport,
    welfare: &WelfareBlock,
) -> DeltaBlock {
    let firms = applied
        .constituents
        .iter()
        .enumerate()
        .map(|(v, from)| {
            let before: f64 = from.iter().map(|&u| base.profits[u]).sum();
            let after = report.profits[v];
            FirmDelta {
                firm: report.firms[v].clone(),
                constituents: from.iter().map(|&u| base.firms[u].clone()).collect(),
                before,
                after,
                delta: after - before,
            }
        })
        .collect();
    DeltaBlock {
        p_star: report.p_star - base.p_star,
        consumer_surplus: welfare.consumer_surplus - base_welfare.consumer_surplus,
        social_welfare: welfare.social_welfare - base_welfare.social_welfare,
        total_profit: welfare.total_profit - base_welfare.total_profit,
        total_welfare: welfare.total_welfare - base_welfare.total_welfare,
        firms,
        merged_firm: applied.merged_firm,
    }
}

/// Solves the base and every scenario and compares each against the base.
pub fn run_comparison(
    base: &MarketModel,
    scenarios: &[Scenario],
    tol: f64,
) -> Result<ComparisonReport, ScenarioError> {
    let base_report =
        solve(base, tol).map_err(|source| ScenarioError::Solve { scenario: "base".into(), source })?;
    let base_welfare = welfare_block(&base_report, 0.0);
    let mut outcomes = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let applied = scenario.apply(base)?;
        let report = solve(&applied.model, tol)
            .map_err(|source| ScenarioError::Solve { scenario: scenario.name.clone(), source })?;
        let welfare = welfare_block(&report, applied.tariff_total);
        let delta = delta_block(&base_report, &base_welfare, &applied, &report, &welfare);
        outcomes.push(ScenarioOutcome {
            name: scenario.name.clone(),
            verdicts: Some(Verdicts::from_delta(&delta)),
            delta: Some(delta),
            report,
            welfare,
        });
    }
    Ok(ComparisonReport {
        base: ScenarioOutcome {
            name: "base".into(),
            report: base_report,
            welfare: base_welfare,
            delta: None,
            verdicts: None,
        },
        scenarios: outcomes,
    })
}

/// Local response of the equilibrium to a marginal change in total cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSensitivity {
    #[serde(rename = "dP_star_dC")]
    pub dp_dc: f64,
    /// Finite-difference `d pi_i / dC` per firm.
    pub dprofit_dc: Vec<f64>,
    /// `D'(P*) (P* - C_physical)`
    #[serde(rename = "dTW_dP_star")]
    pub dtw_dp: f64,
}

/// `tariff_total` is the part of the model's total cost that is tariff,
/// so the physical cost is `C - tariff_total`.
pub fn tariff_sensitivity(model: &MarketModel, tariff_total: f64) -> Result<TariffSensitivity, SolveError> {
    let report = solve(model, DEFAULT_TOLERANCE)?;
    let net = model.network();
    let depth = net.depth();
    let demand = model.demand();
    let p = report.p_star;

    let slope = if depth == 0 {
        0.0
    } else {
        let totals: Vec<f64> = net.path_counts().totals[..depth].iter().map(|&t| t as f64).collect();
        let table = demand.gk_table(p, depth, true)?;
        table.weighted_derivs(&totals).unwrap_or(0.0)
    };
    let dp_dc = 1.0 / (1.0 - slope);

    let c = model.total_cost();
    let h = 1e-6 * c.max(1.0);
    let shifted = |dc: f64| -> Result<EquilibriumReport, SolveError> {
        let m = model.with_costs(model.costs().to_vec(), model.price_taker_cost() + dc)?;
        solve(&m, 0.0)
    };
    // keep the lower probe non-negative when the price taker is free
    let down = h.min(model.price_taker_cost());
    let (plus, minus) = (shifted(h)?, shifted(-down)?);
    let dprofit_dc =
        plus.profits.iter().zip(&minus.profits).map(|(a, b)| (a - b) / (h + down)).collect();

    let dtw_dp = demand.demand_slope(p)? * (p - (c - tariff_total));
    Ok(TariffSensitivity { dp_dc, dprofit_dc, dtw_dp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Empty,
    Chain,
}

impl From<NetworkKind> for Canonical {
    fn from(kind: NetworkKind) -> Self {
        match kind {
            NetworkKind::Empty => Canonical::Empty,
            NetworkKind::Chain => Canonical::Chain,
        }
    }
}

impl NetworkKind {
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Empty => "empty",
            NetworkKind::Chain => "chain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub kind: NetworkKind,
    #[serde(rename = "P_star")]
    pub p_star: f64,
    pub dwl: f64,
}

/// Equilibrium price and deadweight loss of costless empty and chain
/// networks of every size in `n_min..=n_max`.
pub fn dwl_sweep(
    demand: &DemandSpec,
    n_min: usize,
    n_max: usize,
    kinds: &[NetworkKind],
) -> Result<Vec<SweepRow>, ScenarioError> {
    if n_min > n_max {
        return Err(ScenarioError::EmptyRange { start: n_min, end: n_max });
    }
    let closed_form = matches!(demand, DemandSpec::Linear { .. } | DemandSpec::Power { .. });
    let (limit, method) = if closed_form {
        (CLOSED_FORM_SWEEP_LIMIT, "the closed form")
    } else {
        (GENERIC_SWEEP_LIMIT, "the generic solver")
    };
    if n_max > limit {
        return Err(ScenarioError::SweepTooLarge { n: n_max, limit, method });
    }
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        for &kind in kinds {
            let scenario = format!("{}({n})", kind.name());
            let model = MarketModel::costless(InfluenceNetwork::canonical(kind.into(), n), demand.clone())
                .map_err(|source| ScenarioError::Model { scenario: scenario.clone(), source })?;
            let report = if closed_form { solve_linear_closed_form(&model) } else { solve(&model, DEFAULT_TOLERANCE) }
                .map_err(|source| ScenarioError::Solve { scenario, source })?;
            rows.push(SweepRow { n, kind, p_star: report.p_star, dwl: report.deadweight_loss });
        }
    }
    Ok(rows)
}

/// The sweep as CSV with header `n,kind,P_star,dwl`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,kind,P_star,dwl\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            r.kind.name(),
            crate::io::format_number(r.p_star),
            crate::io::format_number(r.dwl)
        ));
    }
    out
}
