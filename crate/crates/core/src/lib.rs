//! Non-cooperative power-control game for underlay cognitive-radio NOMA
//! networks.
//!
//! Primary users (PUs) and secondary users (SUs) share one band. Each player
//! iterates a closed-form best response against the interference created by
//! everyone else; SUs are admitted only while the PU interference tolerance
//! holds. The crate provides:
//!
//! - [`model`]: scenario configuration, path-loss gains and the SU ordering.
//! - [`utility`]: interference terms, SINR, rate and both utility functions.
//! - [`game`]: best responses, the best-response solver and equilibrium checks.
//! - [`baseline_oma`]: an orthogonal-access counterpart for comparison.
//! - [`experiments`]: parameter sweeps and CSV output.
//! - [`cli`]: the `crn-noma` command-line front end.

pub mod baseline_oma;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod game;
pub mod model;
pub mod utility;

pub use error::{Error, Result};
pub use game::{
    solve_equilibrium, verify_fixed_point, EquilibriumResult, SolverOptions, UpdateMode,
    VerificationReport,
};
pub use model::{build_channel_gains, validate_config, ChannelGains, NetworkConfig, PowerProfile};
