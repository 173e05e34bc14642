//! Acceptance criteria and the supporting integration tests, in one binary
//! so a failing criterion never hides the rest.

mod criteria;
mod network;
mod oracle;
mod scenarios;
