//! Partial information decompositions of discrete trivariate distributions,
//! and a simulation pipeline contrasting modulatory and arithmetic transfer
//! functions of two-input processors.

pub mod binning;
pub mod dist;
pub mod error;
pub mod experiment;
pub mod golden;
pub mod models;
pub mod pid;
pub mod transfer;

pub use dist::{Axes, DistDoc, InfoSummary, JointDist3};
pub use error::{Error, Result};
pub use pid::{Method, PidComponents, Spectrum};
