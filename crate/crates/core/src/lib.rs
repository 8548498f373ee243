//! Thermodynamic formalism for finite and truncated countable-state Markov
//! shifts: loop censuses, strong positive recurrence diagnostics, Parry and
//! equilibrium measures, transfer-operator spectral data, limit-law checks
//! on sampled trajectories, and finite-orbit Pliss/Pesin estimates.

pub mod census;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod pliss;
pub mod potential;
pub mod serde_ext;
pub mod spr;
pub mod stochastics;
pub mod thermo;

pub use census::LoopCensus;
pub use error::{Error, Result};
pub use graph::{
    period, spectral_decomposition, strongly_connected_components, BouquetRule, BouquetSpec, Component, DirectedGraph,
    GraphDescription, Radius, SpectralDecomposition,
};
pub use pliss::{CocycleOrbit, PesinCertificate};
pub use potential::{BlockRecoding, CylinderPotential};
pub use spr::{SprVerdict, Verdict};
pub use stochastics::{StatReport, TrajectoryBatch};
pub use thermo::{MarkovMeasure, RateFunction, TransferOperator};
