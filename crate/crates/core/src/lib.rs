//! Internal-feedback analysis of optimal controllers: Riccati-based SF, FC and
//! OF controllers, delay-chain plants, stabilizability without internal
//! feedback, FIR system level synthesis and closed-loop simulation.

pub mod audit;
pub mod controllers;
pub mod error;
pub mod format;
pub mod numerics;
pub mod plant;
pub mod sim;
pub mod sls;
pub mod stabilizability;

pub use controllers::{
    extract_dpf, make_fc, make_of, make_sf, make_of_with, report_signal_dims, scalar_delay_gains, ControllerKind,
    ControllerParams, ControllerRealization, DelayGains, DimensionReport, Direction, Edge, OfOptions,
};
pub use error::{Error, Result};
pub use format::ControllerArtifact;
pub use numerics::{Matrix, Vector};
pub use plant::{delay_chain_plant, scalar_plant, DelaySpec, LabeledPlant, SignalRole, StateSpace};
pub use sim::{CostEstimate, Noise, Trajectory};
pub use sls::{DelayMask, SlsResponse};
pub use stabilizability::StabilizabilityResult;
