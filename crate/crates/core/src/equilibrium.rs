//! Market models and their unique price equilibrium.
//!
//! The final-good price `P*` is the root of
//!
//! ```text
//! f(P) = P - C - sum_k T_k g_k(P)
//! ```
//!
//! where `T_k` counts the `(k-1)`-edge paths of the influence network and `C`
//! is the total marginal cost of the chain. `f` is strictly increasing, so a
//! bracketing root finder is enough. Each firm's markup is the same sum with
//! its own path counts, which is also its influentiality.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::{DemandError, DemandSpec};
use crate::exact::{int, simplest_rational};
use crate::network::{InfluenceNetwork, NetworkError};
use crate::rootfind::{solve_increasing, RootError, RootOptions};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Smallest residual worth asking of a custom demand, whose kernel comes
/// from finite differences.
pub const CUSTOM_RESIDUAL_FLOOR: f64 = 1e-8;

/// Cap on the upper-bracket offset search for demand without saturation.
const MAX_BRACKET_OFFSET: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no gains from trade: total cost {total_cost} is not below the saturation price {saturation}")]
    NoGainsFromTrade { total_cost: f64, saturation: f64 },
    #[error("equilibrium function is not increasing near P = {price}; the demand violates the monotone-kernel assumption")]
    NonMonotoneKernel { price: f64 },
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("{operation} requires {expected} demand, got {got}")]
    WrongFamily { operation: &'static str, expected: &'static str, got: &'static str },
    #[error("parameter {0} is not representable as an exact rational")]
    NotRational(f64),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("expected {expected} firm costs, got {got}")]
    CostCount { expected: usize, got: usize },
    #[error("cost of firm {firm} must be finite and non-negative, got {cost}")]
    InvalidCost { firm: String, cost: f64 },
    #[error("price-taker cost must be finite and non-negative, got {0}")]
    InvalidPriceTakerCost(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Demand(#[from] DemandError),
}

/// A full game instance: who influences whom, what everything costs, and
/// the demand for the final good.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    network: InfluenceNetwork,
    costs: Vec<f64>,
    c0: f64,
    demand: DemandSpec,
}

impl MarketModel {
    pub fn new(
        network: InfluenceNetwork,
        costs: Vec<f64>,
        c0: f64,
        demand: DemandSpec,
    ) -> Result<Self, ModelError> {
        if costs.len() != network.len() {
            return Err(ModelError::CostCount { expected: network.len(), got: costs.len() });
        }
        for (i, &cost) in costs.iter().enumerate() {
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(ModelError::InvalidCost { firm: network.label(i).to_string(), cost });
            }
        }
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(ModelError::InvalidPriceTakerCost(c0));
        }
        demand.validate()?;
        Ok(MarketModel { network, costs, c0, demand })
    }

    /// Zero-cost model, the setting of most worked examples.
    pub fn costless(network: InfluenceNetwork, demand: DemandSpec) -> Result<Self, ModelError> {
        let n = network.len();
        Self::new(network, vec![0.0; n], 0.0, demand)
    }

    pub fn network(&self) -> &InfluenceNetwork {
        &self.network
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn price_taker_cost(&self) -> f64 {
        self.c0
    }

    pub fn demand(&self) -> &DemandSpec {
        &self.demand
    }

    /// `C = c0 + sum_i c_i`.
    pub fn total_cost(&self) -> f64 {
        self.c0 + self.costs.iter().sum::<f64>()
    }

    pub fn with_demand(&self, demand: DemandSpec) -> Result<Self, ModelError> {
        Self::new(self.network.clone(), self.costs.clone(), self.c0, demand)
    }

    pub fn with_costs(&self, costs: Vec<f64>, c0: f64) -> Result<Self, ModelError> {
        Self::new(self.network.clone(), costs, c0, self.demand.clone())
    }

    pub fn with_network(&self, network: InfluenceNetwork, costs: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(network, costs, self.c0, self.demand.clone())
    }
}

/// Everything the equilibrium determines, in firm input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub firms: Vec<String>,
    #[serde(rename = "P_star")]
    pub p_star: f64,
    pub total_cost: f64,
    pub prices: Vec<f64>,
    pub markups: Vec<f64>,
    pub quantity: f64,
    pub profits: Vec<f64>,
    pub influentiality: Vec<f64>,
    pub total_profit: f64,
    pub consumer_surplus: f64,
    pub deadweight_loss: f64,
    pub social_welfare: f64,
    /// `f(P*)` of the equilibrium equation.
    pub residual: f64,
    pub iterations: usize,
}

impl EquilibriumReport {
    /// Assembles the report from an equilibrium price and per-firm
    /// influentiality.
    fn assemble(
        model: &MarketModel,
        p_star: f64,
        influentiality: Vec<f64>,
        residual: f64,
        iterations: usize,
    ) -> Result<Self, SolveError> {
        let demand = model.demand();
        let quantity = demand.demand(p_star)?;
        let prices = model.costs.iter().zip(&influentiality).map(|(c, i)| c + i).collect();
        let profits: Vec<f64> = influentiality.iter().map(|i| i * quantity).collect();
        let total_profit = profits.iter().sum();
        let consumer_surplus = demand.consumer_surplus(p_star)?;
        let total_cost = model.total_cost();
        let deadweight_loss = demand.deadweight_loss(p_star.max(total_cost), total_cost)?;
        Ok(EquilibriumReport {
            firms: model.network.labels().to_vec(),
            p_star,
            total_cost,
            prices,
            markups: influentiality.clone(),
            quantity,
            profits,
            influentiality,
            total_profit,
            consumer_surplus,
            deadweight_loss,
            social_welfare: consumer_surplus + total_profit,
            residual,
            iterations,
        })
    }

    pub fn len(&self) -> usize {
        self.firms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms.is_empty()
    }

    pub fn index_of(&self, firm: &str) -> Option<usize> {
        self.firms.iter().position(|f| f == firm)
    }

    pub fn welfare(&self) -> Welfare {
        Welfare {
            consumer_surplus: self.consumer_surplus,
            deadweight_loss: self.deadweight_loss,
            social_welfare: self.social_welfare,
            total_profit: self.total_profit,
        }
    }

    /// Copy with every float rounded to `digits` significant digits.
    pub fn rounded(&self, digits: usize) -> Self {
        let r = |x: f64| round_significant(x, digits);
        let rv = |v: &[f64]| v.iter().map(|&x| r(x)).collect();
        EquilibriumReport {
            firms: self.firms.clone(),
            p_star: r(self.p_star),
            total_cost: r(self.total_cost),
            prices: rv(&self.prices),
            markups: rv(&self.markups),
            quantity: r(self.quantity),
            profits: rv(&self.profits),
            influentiality: rv(&self.influentiality),
            total_profit: r(self.total_profit),
            consumer_surplus: r(self.consumer_surplus),
            deadweight_loss: r(self.deadweight_loss),
            social_welfare: r(self.social_welfare),
            residual: r(self.residual),
            iterations: self.iterations,
        }
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Welfare {
    pub consumer_surplus: f64,
    pub deadweight_loss: f64,
    pub social_welfare: f64,
    pub total_profit: f64,
}

/// Path-count weights truncated to the network depth.
fn weights(counts: &[u128], depth: usize) -> Vec<f64> {
    counts[..depth].iter().map(|&c| c as f64).collect()
}

/// The equilibrium function `f(P) = P - C - sum_k T_k g_k(P)`.
pub fn equilibrium_gap(model: &MarketModel, price: f64) -> Result<f64, SolveError> {
    let net = model.network();
    let depth = net.depth();
    let totals = weights(&net.path_counts().totals, depth);
    let table = model.demand().gk_table(price, depth, false)?;
    Ok(price - model.total_cost() - table.weighted(&totals))
}

/// Influentiality `I_i = sum_k e_i' A^(k-1) 1 g_k(P)` of every firm at `price`.
pub fn influentiality_at(model: &MarketModel, price: f64) -> Result<Vec<f64>, SolveError> {
    let net = model.network();
    let depth = net.depth();
    let table = model.demand().gk_table(price, depth, false)?;
    Ok((0..net.len())
        .map(|i| table.weighted(&weights(&net.path_counts().per_firm[i], depth)))
        .collect())
}

/// Bracket margin keeping evaluations off the saturation point.
pub(crate) fn bracket_margin(model: &MarketModel) -> f64 {
    let saturation = model.demand().saturation();
    if saturation.is_finite() {
        1e-12 * saturation.max(1.0)
    } else {
        1e-12 * model.total_cost().max(1.0)
    }
}

/// Root-finder settings for `tol`, floored for finite-difference demands.
pub(crate) fn root_options(demand: &DemandSpec, tol: f64) -> RootOptions {
    match demand {
        DemandSpec::Custom(_) => RootOptions {
            rel_tol: tol.max(CUSTOM_RESIDUAL_FLOOR),
            noise: CUSTOM_RESIDUAL_FLOOR,
            ..RootOptions::default()
        },
        _ => RootOptions { rel_tol: tol, ..RootOptions::default() },
    }
}

/// Solves for the unique equilibrium by bracketing the root of the
/// equilibrium function.
pub fn solve(model: &MarketModel, tol: f64) -> Result<EquilibriumReport, SolveError> {
    let demand = model.demand();
    let saturation = demand.saturation();
    let total_cost = model.total_cost();
    if total_cost >= saturation {
        return Err(SolveError::NoGainsFromTrade { total_cost, saturation });
    }
    let n = model.network().len();
    if n == 0 {
        return EquilibriumReport::assemble(model, total_cost, Vec::new(), 0.0, 0);
    }

    let eps = bracket_margin(model);
    let gap = |p: f64| equilibrium_gap(model, p);
    let lo = total_cost + eps;
    let f_lo = gap(lo)?;

    let (hi, f_hi) = if saturation.is_finite() {
        let hi = saturation - eps;
        (hi, gap(hi)?)
    } else {
        let mut offset = n as f64 * demand.g(total_cost + 1.0)?;
        loop {
            let hi = total_cost + offset;
            let f_hi = gap(hi)?;
            if f_hi > 0.0 {
                break (hi, f_hi);
            }
            offset *= 2.0;
            if offset > MAX_BRACKET_OFFSET {
                return Err(SolveError::NoConvergence(format!(
                    "no upper bracket below C + {MAX_BRACKET_OFFSET}"
                )));
            }
        }
    };

    let root = solve_increasing(gap, (lo, f_lo), (hi, f_hi), root_options(demand, tol)).map_err(|err| match err {
        RootError::NotBracketed { lo, .. } => SolveError::NonMonotoneKernel { price: lo },
        RootError::NotIncreasing { x, .. } => SolveError::NonMonotoneKernel { price: x },
        RootError::MaxIterations { iterations, x, fx } => SolveError::NoConvergence(format!(
            "{iterations} iterations, P = {x}, residual {fx}"
        )),
        RootError::Eval(e) => e,
    })?;

    let influence = influentiality_at(model, root.x)?;
    EquilibriumReport::assemble(model, root.x, influence, root.fx, root.iterations)
}

/// Solves with [`DEFAULT_TOLERANCE`].
pub fn solve_default(model: &MarketModel) -> Result<EquilibriumReport, SolveError> {
    solve(model, DEFAULT_TOLERANCE)
}

/// Saturation price and decay `beta` of a linear (`beta = 1`) or power demand.
fn power_parameters(demand: &DemandSpec, operation: &'static str) -> Result<(f64, f64), SolveError> {
    match *demand {
        DemandSpec::Linear { a, b } => Ok((a / b, 1.0)),
        DemandSpec::Power { a, b, beta, .. } => Ok((a / b, beta)),
        _ => Err(SolveError::WrongFamily {
            operation,
            expected: "linear or power",
            got: demand.family_name(),
        }),
    }
}

/// Bonacich centrality `B_i = sum_k beta^k e_i' A^(k-1) 1` of every firm.
pub fn bonacich(net: &InfluenceNetwork, beta: f64) -> Vec<f64> {
    net.path_counts()
        .per_firm
        .iter()
        .map(|row| {
            let mut weight = 1.0;
            row.iter()
                .map(|&c| {
                    weight *= beta;
                    weight * c as f64
                })
                .sum()
        })
        .collect()
}

/// Out-degree centrality.
pub fn degree(net: &InfluenceNetwork) -> Vec<usize> {
    net.out_degrees()
}

/// Per-firm influentiality of a solved report (equal to the markups).
pub fn influentiality(report: &EquilibriumReport) -> Vec<f64> {
    report.influentiality.clone()
}

/// Closed-form equilibrium for linear and power demand, where every
/// `g_k = beta^k (P̄ - P)` and the equilibrium equation is linear in `P`.
pub fn solve_linear_closed_form(model: &MarketModel) -> Result<EquilibriumReport, SolveError> {
    let (saturation, beta) = power_parameters(model.demand(), "closed-form solve")?;
    let total_cost = model.total_cost();
    if total_cost >= saturation {
        return Err(SolveError::NoGainsFromTrade { total_cost, saturation });
    }
    let firm_centrality = bonacich(model.network(), beta);
    let centrality: f64 = firm_centrality.iter().sum();
    let p_star = (total_cost + saturation * centrality) / (1.0 + centrality);
    let influence = firm_centrality
        .iter()
        .map(|b| b / (1.0 + centrality) * (saturation - total_cost))
        .collect();
    let residual = if model.network().is_empty() { 0.0 } else { equilibrium_gap(model, p_star)? };
    EquilibriumReport::assemble(model, p_star, influence, residual, 0)
}

/// Exact rational equilibrium for linear or power demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEquilibrium {
    pub p_star: BigRational,
    pub prices: Vec<BigRational>,
    pub markups: Vec<BigRational>,
    /// `B^beta(A) = sum_k beta^k 1' A^(k-1) 1`.
    pub centrality: BigRational,
}

impl ExactEquilibrium {
    pub fn p_star_f64(&self) -> f64 {
        self.p_star.to_f64().unwrap_or(f64::NAN)
    }

    pub fn prices_f64(&self) -> Vec<f64> {
        self.prices.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Closed form in exact rational arithmetic. Each float parameter is read
/// as the simplest rational that rounds to it, so `4.0 / 3.0` means `4/3`.
pub fn solve_exact_closed_form(model: &MarketModel) -> Result<ExactEquilibrium, SolveError> {
    let rational = |x: f64| simplest_rational(x).ok_or(SolveError::NotRational(x));
    let (saturation, beta) = match *model.demand() {
        DemandSpec::Linear { a, b } => (rational(a)? / rational(b)?, BigRational::one()),
        DemandSpec::Power { a, b, beta, .. } => (rational(a)? / rational(b)?, rational(beta)?),
        ref other => {
            return Err(SolveError::WrongFamily {
                operation: "exact closed-form solve",
                expected: "linear or power",
                got: other.family_name(),
            })
        }
    };
    let costs = model.costs().iter().map(|&c| rational(c)).collect::<Result<Vec<_>, _>>()?;
    let total_cost =
        costs.iter().fold(rational(model.price_taker_cost())?, |acc, c| acc + c);
    if total_cost >= saturation {
        return Err(SolveError::NoGainsFromTrade {
            total_cost: model.total_cost(),
            saturation: model.demand().saturation(),
        });
    }
    let firm_centrality: Vec<BigRational> = model
        .network()
        .path_counts()
        .per_firm
        .iter()
        .map(|row| {
            let mut weight = BigRational::one();
            row.iter().fold(BigRational::from_integer(0.into()), |acc, &c| {
                weight = &weight * &beta;
                acc + &weight * int(c)
            })
        })
        .collect();
    let centrality = firm_centrality
        .iter()
        .fold(BigRational::from_integer(0.into()), |acc, b| acc + b);
    let denom = BigRational::one() + &centrality;
    let p_star = (&total_cost + &saturation * &centrality) / &denom;
    let markups: Vec<BigRational> = firm_centrality
        .iter()
        .map(|b| b / &denom * (&saturation - &total_cost))
        .collect();
    let prices = costs.iter().zip(&markups).map(|(c, m)| c + m).collect();
    Ok(ExactEquilibrium { p_star, prices, markups, centrality })
}

/// Lower bounds on logit equilibrium prices and how far the solved
/// equilibrium sits above them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitBounds {
    /// `C + n / alpha`
    pub price_lower_bound: f64,
    /// `c_i + 1 / alpha`
    pub firm_lower_bounds: Vec<f64>,
    #[serde(rename = "P_star")]
    pub p_star: f64,
    pub prices: Vec<f64>,
    /// `P* - C - n / alpha`
    pub gap: f64,
    pub firm_gaps: Vec<f64>,
    /// All strict bounds hold.
    pub respects_bounds: bool,
}

pub fn logit_bounds(model: &MarketModel, tol: f64) -> Result<LogitBounds, SolveError> {
    let alpha = match *model.demand() {
        DemandSpec::Logit { alpha, .. } => alpha,
        ref other => {
            return Err(SolveError::WrongFamily {
                operation: "logit bounds",
                expected: "logit",
                got: other.family_name(),
            })
        }
    };
    let report = solve(model, tol)?;
    let n = model.network().len() as f64;
    let price_lower_bound = model.total_cost() + n / alpha;
    let firm_lower_bounds: Vec<f64> = model.costs().iter().map(|c| c + 1.0 / alpha).collect();
    let firm_gaps: Vec<f64> =
        report.prices.iter().zip(&firm_lower_bounds).map(|(p, b)| p - b).collect();
    let gap = report.p_star - price_lower_bound;
    let respects_bounds = (model.network().is_empty() || gap > 0.0) && firm_gaps.iter().all(|&g| g > 0.0);
    Ok(LogitBounds {
        price_lower_bound,
        firm_lower_bounds,
        p_star: report.p_star,
        prices: report.prices,
        gap,
        firm_gaps,
        respects_bounds,
    })
}

/// Consumer surplus, deadweight loss and welfare of a solved report,
/// recomputed from the model's demand.
pub fn welfare(report: &EquilibriumReport, model: &MarketModel) -> Result<Welfare, SolveError> {
    let demand = model.demand();
    let consumer_surplus = demand.consumer_surplus(report.p_star)?;
    let total_profit: f64 = report.profits.iter().sum();
    let total_cost = model.total_cost();
    Ok(Welfare {
        consumer_surplus,
        deadweight_loss: demand.deadweight_loss(report.p_star.max(total_cost), total_cost)?,
        social_welfare: consumer_surplus + total_profit,
        total_profit,
    })
}
