//! Price-setting equilibria on supply-chain influence networks.
//!
//! Monopolist firms along a supply chain post per-unit prices; some firms
//! observe others' prices before setting their own, which forms an acyclic,
//! transitive influence network. The final-good price solves a single
//! monotone equation whose weights count directed paths in that network, and
//! each firm's markup is its influentiality.
//!
//! Start with [`network::InfluenceNetwork`], pick a [`demand::DemandSpec`],
//! bundle both in an [`equilibrium::MarketModel`] and call
//! [`equilibrium::solve`]. The [`oracle`] module verifies a solution without
//! relying on the equilibrium characterization, and [`scenarios`] compares
//! mergers and tariff changes.

pub mod cli;
pub mod demand;
pub mod equilibrium;
pub mod exact;
pub mod io;
pub mod network;
pub mod oracle;
pub mod quadrature;
pub mod rootfind;
pub mod scenarios;

pub use demand::{CustomDemand, DemandError, DemandSpec, GkTable};
pub use equilibrium::{
    solve, solve_default, solve_linear_closed_form, EquilibriumReport, MarketModel, SolveError,
};
pub use network::{Canonical, InfluenceNetwork, NetworkError, PathCounts};
