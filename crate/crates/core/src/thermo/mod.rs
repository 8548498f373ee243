//! Measures of maximal entropy, equilibrium states of locally constant
//! potentials and the spectral quantities derived from them.

pub mod measure;
pub mod obstruction;
pub mod pressure;
pub mod rate;
pub mod tail;
pub mod transfer;
pub mod variance;

pub use measure::{
    cylinder_mass, equilibrium_measure, parry_measure, pressure, CylinderMass, Equilibrium, MarkovMeasure, Transition,
};
pub use obstruction::{coboundary_obstruction_scan, periodic_orbits, ObstructionScan};
pub use pressure::{linspace, pressure_curve, PressureCurve};
pub use rate::{exact_ldp_tails, rate_function, ExactLdp, RateFunction};
pub use tail::{return_time_tail, ReturnTail};
pub use transfer::{covariance_sequence, spectral_gap, SpectralGap, TransferOperator};
pub use variance::{asymptotic_variance, VarianceEstimate, VarianceMethod};
