//! Best orthogonalized subset selection (BOSS) for least-squares regression,
//! with heuristic degrees of freedom, information-criterion selection,
//! subset-selection baselines and a simulation harness.

pub mod cli;
pub mod criteria;
pub mod dof;
pub mod error;
pub mod linalg;
pub mod normal;
pub mod par;
pub mod paths;
pub mod rng;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
pub use linalg::{CenteredData, Dataset, QrState};
pub use paths::{PathMethod, SolutionPath};
