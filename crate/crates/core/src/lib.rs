//! Decentralized conflict resolution for constant-speed airplanes.
//!
//! A closed-form control-barrier-function safety filter keeps every pair of
//! airplanes at least `r` apart. On its own, that filter can trap two
//! airplanes in mirrored avoidance manoeuvres ("blocking"), where each keeps
//! deflecting to the side that also blocks the other. A two-option nonlinear
//! opinion dynamics layer, driven by an attention signal that peaks when the
//! mutual bearing freezes, lets both airplanes commit to the same bypass side
//! without communicating.
//!
//! Modules:
//! - [`geom`]: vectors, wrapped angles, bearings, kinematics
//! - [`safety`]: barrier, margin, closed-form filter, brute-force reference
//! - [`opinion`]: attention, opinion update, guided heading, intention estimate
//! - [`sim`]: the closed-loop simulator, logs and metrics
//! - [`analysis`]: bifurcation sweeps and Monte Carlo experiments
//! - [`scenarios`]: the reference encounters used by examples and tests
//! - [`runspec`], [`plot`], [`cli`]: file formats, SVG output, command surface

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fmt;
pub mod geom;
pub mod opinion;
pub mod plot;
pub mod runspec;
pub mod safety;
pub mod scenarios;
pub mod sim;

pub use error::{Error, Result};
pub use geom::{normalize_angle, AirplaneState, AngleRad, HeadingMode, Vec2};
pub use opinion::{OpinionParams, OpinionState};
pub use safety::{FilterBranch, FilterResult, SafetyParams, Side};
pub use sim::{run_scenario, AirplaneSpec, ModeLabel, RunMetrics, RunOutput, Scenario, TrajectoryLog};
