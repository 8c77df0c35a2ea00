//! Online residual learning.
//!
//! Offline trajectory predictors are fixed before the online horizon starts
//! and drift out of date as the target moves. This crate corrects each offline
//! expert online by learning its residual error with projected recursive least
//! squares ([`rls`]), and combines the corrected experts with exponential
//! weights ([`ensemble`]). Predictions `k` steps ahead are handled by a bank of
//! `k` learners on the residue classes `t mod k`.
//!
//! [`bench`] runs the method against purely online and purely offline baselines
//! and measures regret against hindsight comparators; [`datagen`] builds
//! reproducible synthetic scenarios; [`tuning`] evaluates the theoretical
//! learning rate and forgetting factor.
//!
//! ```
//! use orl::datagen::{generate, DynamicsKind, ExpertCorruption, SyntheticScenario};
//! use orl::ensemble::{EnsembleConfig, ExpertEnsemble};
//! use orl::rls::RlsParams;
//!
//! let experts = vec![ExpertCorruption::biased(vec![2.0, 0.0]), ExpertCorruption::noisy(1.0)];
//! let scenario = SyntheticScenario::new(2, 2, 200, DynamicsKind::StaticLinear, 0.5, experts, 1);
//! let data = generate(&scenario).unwrap();
//!
//! let params = RlsParams::new(2, 2, 0.9, 1.0, 3.0);
//! let config = EnsembleConfig { lambda: 1e-3, k: 1, p: 2, learners: Some(vec![params; 2]), residual_bound: None };
//! let mut ensemble = ExpertEnsemble::new(2, 2, config).unwrap();
//! let records = ensemble.run(&data.trajectory, &data.offline).unwrap();
//! assert_eq!(records.len(), 200);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod residual;
pub mod rls;
pub mod tuning;

pub use error::{OrlError, Result};
