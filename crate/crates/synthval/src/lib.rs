//! Risk and utility evaluation for synthetic tabular microdata.
//!
//! The library compares a synthetic dataset against the original it was
//! derived from along two axes:
//!
//! - **Disclosure risk** via the Targeted Correct Attribution Probability
//!   (TCAP) with WEAP filtering ([`risk`]).
//! - **Utility** via the ratio of estimates (ROE) over univariate and
//!   bivariate tables, propensity-score mean squared error (pMSE),
//!   confidence-interval overlap (CIO) and standardized coefficient
//!   differences ([`utility`]).
//!
//! Two baseline synthesizers (independent-marginal sampling and sequential
//! CART) are included so the full pipeline can be exercised end to end
//! ([`synth`]), and [`report`] aggregates everything into machine-readable
//! artifacts plus a risk-utility map.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example full_pipeline
//! cargo run --release --example synthesize_cart
//! cargo run --release --example evaluate_risk
//! cargo run --release --example evaluate_utility
//! ```
//!
//! The same functionality is reachable through the thin `synthval` binary
//! (`synthval evaluate|synth|schema`).

pub mod cli;
pub mod config;
pub mod error;
pub mod regress;
pub mod report;
pub mod risk;
pub mod simdata;
pub mod synth;
pub mod tabular;
pub mod utility;

pub use error::{Error, Result};
