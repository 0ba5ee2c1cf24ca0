//! Synthetic designs, the replication engine and the targeted comparisons
//! (Lagrangian versus best subset, AICc-hdf versus the KL testing error,
//! real-data leave-one-out).
mod design;
mod experiment;
mod kl;
mod lbs;
mod loo;

pub use design::*;
pub use experiment::{run_experiment, EntryReport, PathRmse, SimConfig, SimReport};
pub use kl::{kl_compare, KlReport};
pub use lbs::{lbs_compare, LbsConfig, LbsReport, LbsSide};
pub use loo::{loo_real_data, LooEntry, LooReport};
