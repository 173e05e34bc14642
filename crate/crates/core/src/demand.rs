//! Demand families and the g-kernel.
//!
//! Everything the equilibrium needs from demand is carried by
//! `g(P) = -D(P) / D'(P)` and the weights `g_1 = g`, `g_{k+1} = -g_k' g`.
//! The named families have closed-form derivatives of `g`; [`CustomDemand`]
//! falls back to finite differences of `D`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemandError {
    #[error("price {price} outside the demand domain (0, {upper})")]
    OutOfDomain { price: f64, upper: f64 },
    #[error("derivative order {requested} exceeds the supported order {max}")]
    OrderUnsupported { requested: usize, max: usize },
    #[error("invalid demand parameter: {0}")]
    InvalidParameter(String),
}

pub type DemandFn = dyn Fn(f64) -> f64 + Send + Sync;

/// User-supplied demand curve. Derivatives come from central differences,
/// so results are approximate.
#[derive(Clone)]
pub struct CustomDemand {
    demand: Arc<DemandFn>,
    max_order: usize,
    step: Option<f64>,
    saturation: Option<f64>,
}

impl CustomDemand {
    /// `max_order` is the highest derivative of `g` the caller will request.
    pub fn new<F>(demand: F, max_order: usize) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CustomDemand { demand: Arc::new(demand), max_order, step: None, saturation: None }
    }

    /// Base finite-difference step; defaults to `1e-4 * max(1, P)`.
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = Some(step);
        self
    }

    /// Price at which demand reaches zero, if finite.
    pub fn with_saturation(mut self, saturation: f64) -> Self {
        self.saturation = Some(saturation);
        self
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn eval(&self, price: f64) -> f64 {
        (self.demand)(price)
    }

    fn base_step(&self, price: f64) -> f64 {
        self.step.unwrap_or(1e-4 * price.abs().max(1.0))
    }

    /// `order`-th derivative of D by a central difference. Higher orders use
    /// a wider stencil so rounding noise stays bounded.
    fn derivative(&self, price: f64, order: usize) -> f64 {
        if order == 0 {
            return self.eval(price);
        }
        let floor = f64::EPSILON.powf(1.0 / (order as f64 + 2.0)) * price.abs().max(1.0);
        let h = self.base_step(price).max(floor);
        let mut binom = 1.0;
        let mut sum = 0.0;
        for i in 0..=order {
            let offset = (order as f64 / 2.0 - i as f64) * h;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * self.eval(price + offset);
            binom = binom * (order - i) as f64 / (i + 1) as f64;
        }
        sum / h.powi(order as i32)
    }
}

impl fmt::Debug for CustomDemand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDemand")
            .field("max_order", &self.max_order)
            .field("step", &self.step)
            .field("saturation", &self.saturation)
            .finish_non_exhaustive()
    }
}

/// A demand family with its parameters.
///
/// `Power` is `D(P) = d (a - bP)^(1/beta)`, `Logit` is
/// `D(P) = d e^(-alpha P) / (1 + e^(-alpha P))` and `Exponential` is
/// `D(P) = a - b e^(alpha P)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum DemandSpec {
    Linear {
        a: f64,
        b: f64,
    },
    Power {
        #[serde(default = "unit")]
        d: f64,
        a: f64,
        b: f64,
        beta: f64,
    },
    Logit {
        #[serde(default = "unit")]
        d: f64,
        alpha: f64,
    },
    Exponential {
        a: f64,
        b: f64,
        alpha: f64,
    },
    #[serde(skip)]
    Custom(CustomDemand),
}

fn unit() -> f64 {
    1.0
}

impl PartialEq for DemandSpec {
    fn eq(&self, other: &Self) -> bool {
        use DemandSpec::*;
        match (self, other) {
            (Linear { a, b }, Linear { a: a2, b: b2 }) => a == a2 && b == b2,
            (Power { d, a, b, beta }, Power { d: d2, a: a2, b: b2, beta: beta2 }) => {
                d == d2 && a == a2 && b == b2 && beta == beta2
            }
            (Logit { d, alpha }, Logit { d: d2, alpha: alpha2 }) => d == d2 && alpha == alpha2,
            (Exponential { a, b, alpha }, Exponential { a: a2, b: b2, alpha: alpha2 }) => {
                a == a2 && b == b2 && alpha == alpha2
            }
            (Custom(x), Custom(y)) => Arc::ptr_eq(&x.demand, &y.demand),
            _ => false,
        }
    }
}

/// Values of `g_1..g_K` at one price, optionally with their first
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GkTable {
    pub price: f64,
    /// `values[k - 1] = g_k(price)`
    pub values: Vec<f64>,
    /// `derivs[k - 1] = g_k'(price)`
    pub derivs: Option<Vec<f64>>,
}

impl GkTable {
    pub fn depth(&self) -> usize {
        self.values.len()
    }

    /// Weighted sum `sum_k weights[k] * g_{k+1}`; extra weights must be zero.
    pub fn weighted(&self, weights: &[f64]) -> f64 {
        weights.iter().zip(&self.values).map(|(w, g)| w * g).sum()
    }

    pub fn weighted_derivs(&self, weights: &[f64]) -> Option<f64> {
        self.derivs
            .as_ref()
            .map(|d| weights.iter().zip(d).map(|(w, g)| w * g).sum())
    }
}

impl DemandSpec {
    pub fn linear(a: f64, b: f64) -> Self {
        DemandSpec::Linear { a, b }
    }

    /// `D(P) = d (a - bP)^(1/beta)`.
    pub fn power(d: f64, a: f64, b: f64, beta: f64) -> Self {
        DemandSpec::Power { d, a, b, beta }
    }

    pub fn logit(d: f64, alpha: f64) -> Self {
        DemandSpec::Logit { d, alpha }
    }

    pub fn exponential(a: f64, b: f64, alpha: f64) -> Self {
        DemandSpec::Exponential { a, b, alpha }
    }

    pub fn custom(custom: CustomDemand) -> Self {
        DemandSpec::Custom(custom)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DemandSpec::Linear { .. } => "linear",
            DemandSpec::Power { .. } => "power",
            DemandSpec::Logit { .. } => "logit",
            DemandSpec::Exponential { .. } => "exponential",
            DemandSpec::Custom(_) => "custom",
        }
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(DemandError::InvalidParameter(format!(
                    "{} demand needs {name} > 0, got {v}",
                    self.family_name()
                )))
            }
        };
        match *self {
            DemandSpec::Linear { a, b } => {
                positive("a", a)?;
                positive("b", b)
            }
            DemandSpec::Power { d, a, b, beta } => {
                positive("d", d)?;
                positive("a", a)?;
                positive("b", b)?;
                positive("beta", beta)
            }
            DemandSpec::Logit { d, alpha } => {
                positive("d", d)?;
                positive("alpha", alpha)
            }
            DemandSpec::Exponential { a, b, alpha } => {
                positive("b", b)?;
                positive("alpha", alpha)?;
                if a > b {
                    Ok(())
                } else {
                    Err(DemandError::InvalidParameter(format!(
                        "exponential demand needs a > b, got a = {a}, b = {b}"
                    )))
                }
            }
            DemandSpec::Custom(ref c) => match c.step {
                Some(h) if !(h > 0.0) => {
                    Err(DemandError::InvalidParameter(format!("custom step must be positive, got {h}")))
                }
                _ => Ok(()),
            },
        }
    }

    /// Lowest price with zero demand; infinite for logit demand.
    pub fn saturation(&self) -> f64 {
        match *self {
            DemandSpec::Linear { a, b } | DemandSpec::Power { a, b, .. } => a / b,
            DemandSpec::Logit { .. } => f64::INFINITY,
            DemandSpec::Exponential { a, b, alpha } => (a / b).ln() / alpha,
            DemandSpec::Custom(ref c) => c.saturation.unwrap_or(f64::INFINITY),
        }
    }

    /// Highest derivative order of `g` available, `None` if unbounded.
    pub fn max_order(&self) -> Option<usize> {
        match self {
            DemandSpec::Custom(c) => Some(c.max_order),
            _ => None,
        }
    }

    /// Demand scale multiplier `d`, where the family has one.
    pub fn scale(&self) -> Option<f64> {
        match *self {
            DemandSpec::Power { d, .. } | DemandSpec::Logit { d, .. } => Some(d),
            _ => None,
        }
    }

    /// Same family with demand multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Option<Self> {
        match *self {
            DemandSpec::Power { d, a, b, beta } => Some(DemandSpec::Power { d: d * factor, a, b, beta }),
            DemandSpec::Logit { d, alpha } => Some(DemandSpec::Logit { d: d * factor, alpha }),
            _ => None,
        }
    }

    fn check_open(&self, price: f64) -> Result<(), DemandError> {
        let upper = self.saturation();
        if price > 0.0 && price < upper {
            Ok(())
        } else {
            Err(DemandError::OutOfDomain { price, upper })
        }
    }

    fn check_closed(&self, price: f64) -> Result<(), DemandError> {
        if price >= 0.0 && price.is_finite() {
            Ok(())
        } else {
            Err(DemandError::OutOfDomain { price, upper: self.saturation() })
        }
    }

    /// Quantity demanded; zero at and above saturation.
    pub fn demand(&self, price: f64) -> Result<f64, DemandError> {
        self.check_closed(price)?;
        if price >= self.saturation() {
            return Ok(0.0);
        }
        Ok(match *self {
            DemandSpec::Linear { a, b } => a - b * price,
            DemandSpec::Power { d, a, b, beta } => d * (a - b * price).powf(1.0 / beta),
            DemandSpec::Logit { d, alpha } => {
                let e = (-alpha * price).exp();
                d * e / (1.0 + e)
            }
            DemandSpec::Exponential { a, b, alpha } => a - b * (alpha * price).exp(),
            DemandSpec::Custom(ref c) => c.eval(price),
        })
    }

    /// `D'(P)` from each family's own formula (not via `g`).
    pub fn demand_slope(&self, price: f64) -> Result<f64, DemandError> {
        self.check_closed(price)?;
        if price >= self.saturation() {
            return Ok(0.0);
        }
        Ok(match *self {
            DemandSpec::Linear { b, .. } => -b,
            DemandSpec::Power { d, a, b, beta } => {
                -d * b / beta * (a - b * price).powf(1.0 / beta - 1.0)
            }
            DemandSpec::Logit { d, alpha } => {
                let e = (-alpha * price).exp();
                -d * alpha * e / ((1.0 + e) * (1.0 + e))
            }
            DemandSpec::Exponential { b, alpha, .. } => -b * alpha * (alpha * price).exp(),
            DemandSpec::Custom(ref c) => c.derivative(price, 1),
        })
    }

    /// Price elasticity `-D'(P) P / D(P) = P / g(P)`.
    pub fn elasticity(&self, price: f64) -> Result<f64, DemandError> {
        Ok(price / self.g(price)?)
    }

    pub fn g(&self, price: f64) -> Result<f64, DemandError> {
        Ok(self.g_derivs(price, 0)?[0])
    }

    /// `[g(P), g'(P), ..., g^(m)(P)]`.
    pub fn g_derivs(&self, price: f64, order: usize) -> Result<Vec<f64>, DemandError> {
        self.check_open(price)?;
        if let Some(max) = self.max_order() {
            if order > max {
                return Err(DemandError::OrderUnsupported { requested: order, max });
            }
        }
        let mut out = Vec::with_capacity(order + 1);
        match *self {
            DemandSpec::Linear { a, b } => {
                out.push(a / b - price);
                out.extend((1..=order).map(|k| if k == 1 { -1.0 } else { 0.0 }));
            }
            DemandSpec::Power { a, b, beta, .. } => {
                out.push(beta * (a / b - price));
                out.extend((1..=order).map(|k| if k == 1 { -beta } else { 0.0 }));
            }
            DemandSpec::Logit { alpha, .. } => {
                // g = (1 + e^{-aP}) / a,  g^(k) = (-1)^k a^(k-1) e^{-aP}
                let e = (-alpha * price).exp();
                out.push((1.0 + e) / alpha);
                let mut term = e / alpha;
                for _ in 1..=order {
                    term *= -alpha;
                    out.push(term);
                }
            }
            DemandSpec::Exponential { a, b, alpha } => {
                // g = (r e^{-aP} - 1) / a with r = a/b,  g^(k) = (-1)^k a^(k-1) r e^{-aP}
                let re = (a / b) * (-alpha * price).exp();
                out.push((re - 1.0) / alpha);
                let mut term = re / alpha;
                for _ in 1..=order {
                    term *= -alpha;
                    out.push(term);
                }
            }
            DemandSpec::Custom(ref c) => {
                // g D' = -D, differentiated l times:
                // sum_j C(l,j) g^(j) D^(l-j+1) = -D^(l)
                let dd: Vec<f64> = (0..=order + 1).map(|j| c.derivative(price, j)).collect();
                let slope = dd[1];
                for l in 0..=order {
                    let mut rhs = -dd[l];
                    let mut binom = 1.0;
                    for (j, gj) in out.iter().enumerate() {
                        rhs -= binom * gj * dd[l - j + 1];
                        binom = binom * (l - j) as f64 / (j + 1) as f64;
                    }
                    out.push(rhs / slope);
                }
            }
        }
        Ok(out)
    }

    /// `g_1..g_depth` at `price` by Leibniz propagation of derivative arrays.
    pub fn gk_table(&self, price: f64, depth: usize, with_derivs: bool) -> Result<GkTable, DemandError> {
        if depth == 0 {
            self.check_open(price)?;
            return Ok(GkTable {
                price,
                values: Vec::new(),
                derivs: with_derivs.then(Vec::new),
            });
        }
        let top = depth - 1 + usize::from(with_derivs);
        let g = self.g_derivs(price, top)?;
        let mut level = g.clone();
        let mut values = Vec::with_capacity(depth);
        let mut derivs = Vec::with_capacity(depth);
        for k in 0..depth {
            values.push(level[0]);
            if with_derivs {
                derivs.push(level[1]);
            }
            if k + 1 == depth {
                break;
            }
            // g_{k+1}^(l) = -sum_j C(l,j) g_k^(l-j+1) g^(j)
            let next: Vec<f64> = (0..level.len() - 1)
                .map(|l| {
                    let mut binom = 1.0;
                    let mut acc = 0.0;
                    for j in 0..=l {
                        acc += binom * level[l - j + 1] * g[j];
                        binom = binom * (l - j) as f64 / (j + 1) as f64;
                    }
                    -acc
                })
                .collect();
            level = next;
        }
        Ok(GkTable { price, values, derivs: with_derivs.then_some(derivs) })
    }

    /// Consumer surplus `∫_P^{P̄} D(x) dx`.
    pub fn consumer_surplus(&self, price: f64) -> Result<f64, DemandError> {
        self.check_closed(price)?;
        let upper = self.saturation();
        if price >= upper {
            return Ok(0.0);
        }
        Ok(match *self {
            DemandSpec::Linear { a, b } => {
                let q = a - b * price;
                q * q / (2.0 * b)
            }
            DemandSpec::Power { d, a, b, beta } => {
                let expo = 1.0 / beta + 1.0;
                d * (a - b * price).powf(expo) / (b * expo)
            }
            DemandSpec::Logit { d, alpha } => d / alpha * (-alpha * price).exp().ln_1p(),
            DemandSpec::Exponential { a, b, alpha } => {
                a * (upper - price) - (a - b * (alpha * price).exp()) / alpha
            }
            DemandSpec::Custom(ref c) => quadrature::integrate(|x| c.eval(x), price, upper, 1e-10),
        })
    }

    /// Deadweight loss of pricing at `price` relative to marginal-cost
    /// pricing at `cost`.
    pub fn deadweight_loss(&self, price: f64, cost: f64) -> Result<f64, DemandError> {
        if price < cost {
            return Err(DemandError::OutOfDomain { price, upper: self.saturation() });
        }
        Ok(self.consumer_surplus(cost)?
            - self.consumer_surplus(price)?
            - (price - cost) * self.demand(price)?)
    }
}

pub fn g_derivs(spec: &DemandSpec, price: f64, order: usize) -> Result<Vec<f64>, DemandError> {
    spec.g_derivs(price, order)
}

pub fn gk_table(
    spec: &DemandSpec,
    price: f64,
    depth: usize,
    with_derivs: bool,
) -> Result<GkTable, DemandError> {
    spec.gk_table(price, depth, with_derivs)
}

pub fn demand(spec: &DemandSpec, price: f64) -> Result<f64, DemandError> {
    spec.demand(price)
}

pub fn cs(spec: &DemandSpec, price: f64) -> Result<f64, DemandError> {
    spec.consumer_surplus(price)
}

pub fn dwl(spec: &DemandSpec, price: f64, cost: f64) -> Result<f64, DemandError> {
    spec.deadweight_loss(price, cost)
}
