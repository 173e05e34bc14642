//! Independent checks of a solved equilibrium.
//!
//! * [`deviation_check`] sweeps one firm's price around its equilibrium
//!   value and confirms no grid point earns more, with influenced firms
//!   reacting along their characterized responses.
//! * [`chain_backward_induction`] solves a fully sequential chain by nested
//!   numeric optimization, without using the characterization at all.
//! * [`diamond_linear_oracle`] replays the affine best-response algebra of
//!   the four-firm diamond network in exact arithmetic.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::demand::DemandSpec;
use crate::equilibrium::{bracket_margin, root_options, EquilibriumReport, MarketModel, SolveError};
use crate::rootfind::{solve_increasing, RootError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("firm index {firm} out of range for {n} firms")]
    UnknownFirm { firm: usize, n: usize },
    #[error("deviation grid needs a positive half-width and at least 101 points (got w = {half_width}, m = {points})")]
    BadGrid { half_width: f64, points: usize },
    #[error("induced price for deviation {price} is not bracketed inside the demand domain")]
    RootNotBracketed { price: f64 },
    #[error("backward induction is limited to chains of at most 4 firms, got {0}")]
    DepthTooLarge(usize),
    #[error("backward induction needs a fully sequential network")]
    NotAChain,
    #[error("report has {got} firms but the model has {expected}")]
    ReportMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Profit of one firm as it sweeps its own price, others held at their
/// equilibrium strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCurve {
    pub firm: usize,
    pub deviation_prices: Vec<f64>,
    pub induced_prices: Vec<f64>,
    pub profits: Vec<f64>,
    /// Index into the grid of the most profitable deviation.
    pub argmax: usize,
    /// Grid prices whose induced final price left the demand domain.
    pub dropped: Vec<f64>,
}

impl DeviationCurve {
    /// The induced final price rises with the deviation price.
    pub fn is_increasing(&self) -> bool {
        self.induced_prices.windows(2).all(|w| w[1] > w[0])
    }

    pub fn best_price(&self) -> f64 {
        self.deviation_prices[self.argmax]
    }

    pub fn best_profit(&self) -> f64 {
        self.profits[self.argmax]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCheck {
    pub curve: DeviationCurve,
    /// Profit the firm actually earns at its reported price once the firms
    /// it influences respond.
    pub equilibrium_profit: f64,
    /// Final price induced by the reported price.
    pub induced_at_report: f64,
    /// The induced final price matches the report's `P*`.
    pub consistent: bool,
    pub passed: bool,
}

/// Relative gap allowed between a report's `P*` and the price its own
/// strategies induce.
const CONSISTENCY: f64 = 1e-7;

/// Final-good price induced when `firm` posts `price` and everyone else
/// plays the reported equilibrium: firms it influences re-optimize, all
/// other prices stay put.
pub fn induced_price(
    model: &MarketModel,
    report: &EquilibriumReport,
    firm: usize,
    price: f64,
) -> Result<f64, OracleError> {
    let net = model.network();
    let n = net.len();
    if firm >= n {
        return Err(OracleError::UnknownFirm { firm, n });
    }
    if report.prices.len() != n {
        return Err(OracleError::ReportMismatch { expected: n, got: report.prices.len() });
    }
    let responders: Vec<usize> = net.influenced_by(firm).collect();
    let fixed: f64 = model.price_taker_cost()
        + price
        + (0..n)
            .filter(|&j| j != firm && !net.influences(firm, j))
            .map(|j| report.prices[j])
            .sum::<f64>();
    let demand = model.demand();
    let saturation = demand.saturation();
    if responders.is_empty() {
        return if fixed >= 0.0 && fixed < saturation {
            Ok(fixed)
        } else {
            Err(OracleError::RootNotBracketed { price })
        };
    }

    let depth = net.depth();
    let weights: Vec<Vec<f64>> = responders
        .iter()
        .map(|&j| net.path_counts().per_firm[j][..depth].iter().map(|&c| c as f64).collect())
        .collect();
    let response_cost: f64 = responders.iter().map(|&j| model.costs()[j]).sum();
    let gap = |p: f64| -> Result<f64, SolveError> {
        let table = demand.gk_table(p, depth, false)?;
        let responses: f64 = weights.iter().map(|w| table.weighted(w)).sum();
        Ok(p - fixed - response_cost - responses)
    };

    let eps = bracket_margin(model);
    let lo = fixed.max(eps);
    if lo >= saturation - eps {
        return Err(OracleError::RootNotBracketed { price });
    }
    let f_lo = gap(lo)?;
    let (hi, f_hi) = if saturation.is_finite() {
        let hi = saturation - eps;
        (hi, gap(hi)?)
    } else {
        let mut offset = 1.0f64.max(lo);
        loop {
            let hi = lo + offset;
            let f_hi = gap(hi)?;
            if f_hi > 0.0 || offset > 1e6 {
                break (hi, f_hi);
            }
            offset *= 2.0;
        }
    };
    match solve_increasing(gap, (lo, f_lo), (hi, f_hi), root_options(demand, 1e-14)) {
        Ok(root) => Ok(root.x),
        Err(RootError::Eval(e)) => Err(e.into()),
        Err(_) => Err(OracleError::RootNotBracketed { price }),
    }
}

/// Sweeps firm `firm`'s price over `m` points in `[p* - w, p* + w]` (keeping
/// only prices above its cost) and checks that no deviation beats the
/// reported equilibrium profit.
pub fn deviation_check(
    model: &MarketModel,
    report: &EquilibriumReport,
    firm: usize,
    half_width: f64,
    points: usize,
) -> Result<DeviationCheck, OracleError> {
    let n = model.network().len();
    if firm >= n {
        return Err(OracleError::UnknownFirm { firm, n });
    }
    if !(half_width > 0.0) || points < 101 {
        return Err(OracleError::BadGrid { half_width, points });
    }
    let center = report.prices[firm];
    let cost = model.costs()[firm];
    let demand = model.demand();

    let mut curve = DeviationCurve {
        firm,
        deviation_prices: Vec::with_capacity(points),
        induced_prices: Vec::with_capacity(points),
        profits: Vec::with_capacity(points),
        argmax: 0,
        dropped: Vec::new(),
    };
    for k in 0..points {
        let price = center - half_width + 2.0 * half_width * k as f64 / (points - 1) as f64;
        if price <= cost {
            continue;
        }
        match induced_price(model, report, firm, price) {
            Ok(p) => {
                curve.deviation_prices.push(price);
                curve.induced_prices.push(p);
                curve.profits.push((price - cost) * demand.demand(p).map_err(SolveError::from)?);
            }
            Err(OracleError::RootNotBracketed { .. }) => curve.dropped.push(price),
            Err(e) => return Err(e),
        }
    }
    curve.argmax = curve
        .profits
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    // judge against what the reported price earns, not what the report claims
    let induced_at_report = induced_price(model, report, firm, center)?;
    let equilibrium_profit = (center - cost) * demand.demand(induced_at_report).map_err(SolveError::from)?;
    let consistent = (induced_at_report - report.p_star).abs() <= CONSISTENCY * report.p_star.abs().max(1.0);
    let best = curve.profits.get(curve.argmax).copied().unwrap_or(f64::NEG_INFINITY);
    let passed = consistent && best <= equilibrium_profit * (1.0 + 1e-6) + 1e-12;
    Ok(DeviationCheck { curve, equilibrium_profit, induced_at_report, consistent, passed })
}

/// Deviation check with the default half-width `0.5 * markup` and 101 points.
pub fn deviation_check_default(
    model: &MarketModel,
    report: &EquilibriumReport,
    firm: usize,
) -> Result<DeviationCheck, OracleError> {
    let width = 0.5 * report.markups.get(firm).copied().unwrap_or(0.0);
    deviation_check(model, report, firm, width, 101)
}

/// Runs the default deviation check for every firm.
pub fn verify_all(
    model: &MarketModel,
    report: &EquilibriumReport,
) -> Result<Vec<DeviationCheck>, OracleError> {
    (0..model.network().len()).map(|i| deviation_check_default(model, report, i)).collect()
}

/// A copy of `report` in which `firm` charges `delta` more while every other
/// price is unchanged; the final price, quantity and profits follow.
pub fn perturb_price(
    model: &MarketModel,
    report: &EquilibriumReport,
    firm: usize,
    delta: f64,
) -> Result<EquilibriumReport, OracleError> {
    let mut out = report.clone();
    out.prices[firm] += delta;
    out.markups[firm] += delta;
    out.p_star += delta;
    out.quantity = model.demand().demand(out.p_star).map_err(SolveError::from)?;
    out.profits = out.markups.iter().map(|m| m * out.quantity).collect();
    out.total_profit = out.profits.iter().sum();
    Ok(out)
}

/// Prices found by backward induction on a sequential chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    /// Prices in the model's firm order.
    pub prices: Vec<f64>,
    pub p_star: f64,
    /// Firm indices from first mover to last.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    /// Relative width at which golden-section search hands over to the
    /// first-order polish.
    pub golden_tol: f64,
    /// Initial search span above cost when demand never saturates.
    pub initial_span: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { golden_tol: 1e-5, initial_span: 4.0 }
    }
}

/// Finite-difference steps for the first-order polish, by the number of
/// nested follower levels below the optimizing firm. Deeper nesting means
/// noisier objectives and wider stencils.
const POLISH_STEPS: [f64; 4] = [1e-3, 5e-3, 1.5e-2, 4e-2];

struct ChainGame<'a> {
    demand: &'a DemandSpec,
    saturation: f64,
    costs: Vec<f64>,
    opts: ChainOptions,
}

impl ChainGame<'_> {
    fn quantity(&self, price: f64) -> f64 {
        if price >= self.saturation {
            return 0.0;
        }
        self.demand.demand(price.max(0.0)).unwrap_or(0.0)
    }

    /// Final price when firms `level..` move in order after partial sum `sum`.
    fn final_price(&self, level: usize, sum: f64) -> f64 {
        if level == self.costs.len() {
            return sum;
        }
        let p = self.best_response(level, sum);
        self.final_price(level + 1, sum + p)
    }

    fn profit(&self, level: usize, sum: f64, price: f64) -> f64 {
        let total = self.final_price(level + 1, sum + price);
        (price - self.costs[level]) * self.quantity(total)
    }

    fn best_response(&self, level: usize, sum: f64) -> f64 {
        let cost = self.costs[level];
        let hard_limit = self.saturation.is_finite();
        if hard_limit && sum + cost >= self.saturation {
            return cost;
        }
        let objective = |p: f64| self.profit(level, sum, p);
        let mut span = if hard_limit { self.saturation - sum - cost } else { self.opts.initial_span };
        let (x, bracket) = loop {
            let (lo, hi) = (cost, cost + span);
            let (x, bracket) = golden_section_max(&objective, lo, hi, self.opts.golden_tol * span);
            if !hard_limit && hi - x < 0.05 * span && span < 1e9 {
                span *= 2.0;
                continue;
            }
            break (x, bracket);
        };
        let followers = self.costs.len() - level - 1;
        // near saturation the stencil must stay inside the little room left
        let scale = if hard_limit { span.min(x.abs().max(1.0)) } else { x.abs().max(1.0) };
        let step = POLISH_STEPS[followers.min(POLISH_STEPS.len() - 1)] * scale;
        let slope = |p: f64| {
            (objective(p - 2.0 * step) - 8.0 * objective(p - step) + 8.0 * objective(p + step)
                - objective(p + 2.0 * step))
                / (12.0 * step)
        };
        let lo = (x - 2.0 * bracket).max(cost);
        let hi = x + 2.0 * bracket;
        polish_peak(slope, lo, hi).unwrap_or(x)
    }
}

/// Golden-section maximization; returns the best point and the final bracket
/// width.
fn golden_section_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = if fc >= fd { c } else { d };
    (x, b - a)
}

/// Locates the zero of a decreasing slope on `[lo, hi]` by Illinois
/// regula falsi. `None` if the slope does not change sign there.
fn polish_peak(slope: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (mut s_lo, mut s_hi) = (slope(lo), slope(hi));
    if !(s_lo > 0.0 && s_hi < 0.0) {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..100 {
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        let mut x = (lo * s_hi - hi * s_lo) / (s_hi - s_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let s = slope(x);
        if s == 0.0 {
            return Some(x);
        }
        if s > 0.0 {
            lo = x;
            s_lo = s;
            if side == 1 {
                s_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            s_hi = s;
            if side == -1 {
                s_lo *= 0.5;
            }
            side = -1;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Subgame-perfect prices of a fully sequential chain of at most four firms,
/// by nested numeric best responses (golden-section search polished with a
/// first-order condition on finite differences).
pub fn chain_backward_induction(
    model: &MarketModel,
    opts: ChainOptions,
) -> Result<ChainSolution, OracleError> {
    let net = model.network();
    let n = net.len();
    if n > 4 {
        return Err(OracleError::DepthTooLarge(n));
    }
    let degrees = net.out_degrees();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(degrees[i]));
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if !net.influences(i, j) {
                return Err(OracleError::NotAChain);
            }
        }
    }
    let game = ChainGame {
        demand: model.demand(),
        saturation: model.demand().saturation(),
        costs: order.iter().map(|&i| model.costs()[i]).collect(),
        opts,
    };
    let mut prices = vec![0.0; n];
    let mut sum = model.price_taker_cost();
    for (level, &firm) in order.iter().enumerate() {
        let p = game.best_response(level, sum);
        prices[firm] = p;
        sum += p;
    }
    Ok(ChainSolution { prices, p_star: sum, order })
}

/// Best responses and equilibrium of the diamond network
/// (`1 -> 3`, `1 -> 4`, `2 -> 4`) with `D(P) = 1 - P` and no costs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondSolution {
    pub prices: [Rational64; 4],
    pub p_star: Rational64,
    /// `p3(p1) = c + a p1`, as `[c, a]`.
    pub response3: [Rational64; 2],
    /// `p4(p1, p2) = c + a p1 + b p2`, as `[c, a, b]`.
    pub response4: [Rational64; 3],
}

/// Affine expression over `[1, p1, p2, q, p3]` where `q` stands for firm 2's
/// equilibrium price as conjectured by firm 3.
type Affine = [Rational64; 5];

const ONE: usize = 0;
const P1: usize = 1;
const P2: usize = 2;
const Q: usize = 3;
const P3: usize = 4;

fn unit(var: usize) -> Affine {
    let mut e = [Rational64::zero(); 5];
    e[var] = Rational64::one();
    e
}

fn lin(terms: &[(i64, i64, &Affine)]) -> Affine {
    let mut out = [Rational64::zero(); 5];
    for (num, den, e) in terms {
        let w = Rational64::new(*num, *den);
        for (o, x) in out.iter_mut().zip(e.iter()) {
            *o += w * x;
        }
    }
    out
}

/// Replays the affine best-response algebra of the diamond network and
/// returns its equilibrium. With `D = 1 - P`, a firm that sees the final
/// price respond to its own price with slope `s` sets
/// `p = (1 - P) / s`.
pub fn diamond_linear_oracle() -> DiamondSolution {
    let one = unit(ONE);
    let (p1, p2, q, p3) = (unit(P1), unit(P2), unit(Q), unit(P3));

    // Firm 4 sees p1 and p2 and expects p3(p1): p4 = (1 - p1 - p2 - p3) / 2.
    let p4 = lin(&[(1, 2, &one), (-1, 2, &p1), (-1, 2, &p2), (-1, 2, &p3)]);
    // Firm 3 sees p1 and expects p2 = q, p4 = p4(p1, q):
    // p3 = (1 - p1 - q - p4|_{p2=q}) / 2.
    let p4_at_q = substitute(&p4, P2, &q);
    let rhs = lin(&[(1, 2, &one), (-1, 2, &p1), (-1, 2, &q), (-1, 2, &p4_at_q)]);
    // p3 appears on both sides; solve p3 = rhs.
    let lambda = rhs[P3];
    let mut p3_solved = rhs;
    p3_solved[P3] = Rational64::zero();
    for x in p3_solved.iter_mut() {
        *x /= Rational64::one() - lambda;
    }
    let p4_solved = substitute(&p4, P3, &p3_solved);

    // Final price as seen by firms 1 and 2.
    let total = lin(&[(1, 1, &p1), (1, 1, &p2), (1, 1, &p3_solved), (1, 1, &p4_solved)]);
    // FOC of firm i: (1 - P) - p_i dP/dp_i = 0, evaluated on path where p2 = q.
    // Firm 3's conjecture q is fixed when firm 2 deviates, so dP/dp2 only
    // counts the explicit p2 terms; firm 1's deviation is seen by 3 and 4.
    let slope1 = total[P1];
    let slope2 = total[P2];
    let on_path = substitute(&total, Q, &p2);
    // Each FOC: 1 - P(p1, p2) - slope * p_i = 0, linear in (p1, p2).
    let foc = |slope: Rational64, var: usize| -> [Rational64; 3] {
        let mut row = [
            Rational64::one() - on_path[ONE],
            -on_path[P1],
            -on_path[P2],
        ];
        row[var] -= slope;
        row
    };
    let r1 = foc(slope1, 1);
    let r2 = foc(slope2, 2);
    // r[0] + r[1] p1 + r[2] p2 = 0 for both rows.
    let det = r1[1] * r2[2] - r1[2] * r2[1];
    let x1 = (-r1[0] * r2[2] + r1[2] * r2[0]) / det;
    let x2 = (-r1[1] * r2[0] + r1[0] * r2[1]) / det;

    let eval = |e: &Affine| e[ONE] + e[P1] * x1 + e[P2] * x2 + e[Q] * x2;
    let price3 = eval(&p3_solved);
    let price4 = eval(&p4_solved);
    let response3 = [p3_solved[ONE] + p3_solved[Q] * x2, p3_solved[P1]];
    let response4 = [p4_solved[ONE] + p4_solved[Q] * x2, p4_solved[P1], p4_solved[P2]];
    DiamondSolution {
        prices: [x1, x2, price3, price4],
        p_star: x1 + x2 + price3 + price4,
        response3,
        response4,
    }
}

fn substitute(e: &Affine, var: usize, with: &Affine) -> Affine {
    let coef = e[var];
    let mut out = *e;
    out[var] = Rational64::zero();
    for (o, w) in out.iter_mut().zip(with.iter()) {
        *o += coef * w;
    }
    out
}
