//! Entropic-risk Gaussian multi-armed bandits.
//!
//! - [`risk`]: entropic risk, gaps and Gaussian KL divergence.
//! - [`posterior`]: Normal-Gamma posterior state, updates and draws.
//! - [`policies`]: ERTS and the uniform / ε-greedy / follow-the-leader baselines.
//! - [`theory`]: the asymptotic regret constant and its ingredients.
//! - [`simulator`]: seeded episodes and Monte Carlo aggregation.
//! - [`cli`]: JSON-configured experiments, reports and the invariant suite.

pub mod cli;
pub mod error;
pub mod gamma;
pub mod policies;
pub mod posterior;
pub mod risk;
pub mod simulator;
pub mod theory;

pub use error::{Error, Result};
pub use policies::{Policy, PolicyDecision};
pub use posterior::{PosteriorSample, PosteriorState};
pub use risk::{ArmSpec, BanditInstance};
pub use simulator::{AggregateResult, RunResult};
pub use theory::{TheoryReport, XiPolicy};
