//! Offline analysis: equilibria of the reduced opinion dynamics and
//! Monte Carlo comparison of the filter with and without opinions.

pub mod bifurcation;
pub mod montecarlo;

pub use bifurcation::{bifurcation_sweep, find_equilibria, BifurcationPoint, BifurcationSweep, Equilibrium, TwoAgentField};
pub use montecarlo::{generate_encounter, monte_carlo, monte_carlo_with, MonteCarloReport, RunRecord, VariantOutcome};
