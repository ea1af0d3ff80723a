//! Hard-choice detection for multi-objective decisions.
//!
//! A [`model::Jury`] of scalarised utility models judges option pairs by
//! unanimity: a pair is preferred only when no juror strictly favours the
//! other side, and incommensurable when jurors strictly disagree. The crate
//! also provides the scalarised and Pareto baselines, a gated meta-policy,
//! jury-changing resolutions, and a scenario harness.

pub mod baselines;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod metapolicy;
pub mod model;
pub mod oracle;
pub mod projection;
pub mod resolution;

pub use error::{Error, Result};
pub use model::{ChoiceProblem, Juror, Jury, Objective, OptionPoint, Relation, Tolerances, UtilityForm};
