//! Approximately stable many-to-one matching between doctors and hospitals
//! whose feasible sets form general independence systems.
//!
//! The main entry points are [`gda::run_gda`], which matches a market using
//! one online packing algorithm per hospital, and
//! [`stability::alpha_stability_check`], which decides α-stability exactly by
//! solving one small packing problem per hospital.

pub mod constraint;
pub mod error;
pub mod gda;
pub mod instances;
pub mod json;
pub mod market;
pub mod online;
pub mod packing;
pub mod set;
pub mod stability;
pub mod utility;

pub use constraint::{IndependenceSystem, Knapsack};
pub use error::{Error, Result};
pub use gda::{run_gda, GdaOptions, GdaTrace, TieBreak};
pub use market::{DoctorId, HospitalId, Market, Matching, PreferenceList};
pub use online::{AlgorithmKind, OnlineAlgorithm};
pub use packing::{Limits, PackingInstance, PackingSolution};
pub use set::DoctorSet;
pub use stability::{alpha_stability_check, exists_stable_bruteforce, min_alpha, StabilityReport};
pub use utility::{Utility, WeightedCoverage};
