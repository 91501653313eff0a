//! Two-option nonlinear opinion dynamics used to agree on a bypass side.
//!
//! The sign of an airplane's opinion `z` encodes the side it intends to pass
//! on: positive steers toward `β + π/2`, negative toward `β − π/2`. The
//! attention `u` gates the dynamics; it is zero while the desired heading is
//! safe and peaks at `k1/k2` when the mutual bearing stops rotating.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{bearing, AngleRad, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpinionParams {
    /// Damping toward the neutral opinion.
    pub d: f64,
    /// Weight of the airplane's own opinion inside the saturation.
    pub a_self: f64,
    /// Weight of the other airplane's (estimated) opinion.
    pub gamma: f64,
    /// Prior preference; positive favours the `+π/2` side.
    pub bias: f64,
    pub k1: f64,
    pub k2: f64,
    /// Opinion-to-heading gain.
    pub k_z: f64,
    /// Time constant of the first-order filter on the intention estimate;
    /// zero uses the raw reading.
    pub estimate_tau: f64,
}

/// Default time constant of the intention-estimate filter.
pub const DEFAULT_ESTIMATE_TAU: f64 = 0.05;

impl Default for OpinionParams {
    fn default() -> Self {
        Self { d: 3.0, a_self: 1.0, gamma: 4.0, bias: 0.0, k1: 2.0, k2: 0.1, k_z: 10.0, estimate_tau: DEFAULT_ESTIMATE_TAU }
    }
}

impl OpinionParams {
    pub fn with_bias(self, bias: f64) -> Self {
        Self { bias, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d", self.d),
            ("a_self", self.a_self),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k_z", self.k_z),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("opinion.{name} must be > 0, got {value}")));
            }
        }
        if !(self.estimate_tau.is_finite() && self.estimate_tau >= 0.0) {
            return Err(Error::InvalidConfig(format!("opinion.estimate_tau must be >= 0, got {}", self.estimate_tau)));
        }
        if !self.gamma.is_finite() || !self.bias.is_finite() {
            return Err(Error::InvalidConfig("opinion.gamma and bias must be finite".into()));
        }
        Ok(())
    }

    /// Peak attention `k1/k2`, reached when the bearing rate is zero.
    pub fn peak_attention(&self) -> f64 {
        self.k1 / self.k2
    }

    /// Critical attention for each plausible reading of the symmetric gain
    /// `κ`: the self weight, the coupling, and their mean.
    pub fn critical_candidates(&self) -> Vec<(&'static str, f64)> {
        [
            ("a_self", self.a_self),
            ("gamma", self.gamma),
            ("mean", 0.5 * (self.a_self + self.gamma)),
        ]
        .into_iter()
        .filter(|(_, k)| *k > 0.0)
        .filter_map(|(name, k)| critical_attention(self.d, k).ok().map(|u| (name, u)))
        .collect()
    }

    /// `k1/k2 − max u*` over [`critical_candidates`](Self::critical_candidates).
    /// Must be positive for blocking to trigger a decision.
    pub fn gain_margin(&self) -> f64 {
        let worst = self
            .critical_candidates()
            .into_iter()
            .map(|(_, u)| u)
            .fold(0.0, f64::max);
        self.peak_attention() - worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OpinionState {
    pub z: f64,
    /// Estimate of the other airplane's opinion.
    pub z_other_est: f64,
    pub u: f64,
}

/// Attention gain: `k1·𝟙(g(θ*) < 0) / (|β̇| + k2)`.
///
/// `g_of_theta_star` must be the margin evaluated at the *desired* heading.
pub fn attention(g_of_theta_star: f64, beta_dot: f64, params: &OpinionParams) -> f64 {
    if g_of_theta_star < 0.0 {
        params.k1 / (beta_dot.abs() + params.k2)
    } else {
        0.0
    }
}

/// One explicit Euler step of `ż = −d·z + u·tanh(a_self·z + γ·ẑ + b)`.
pub fn opinion_step(state: OpinionState, params: &OpinionParams, dt: f64) -> OpinionState {
    debug_assert!(dt > 0.0);
    let drive = (params.a_self * state.z + params.gamma * state.z_other_est + params.bias).tanh();
    let z_dot = -params.d * state.z + state.u * drive;
    OpinionState { z: state.z + dt * z_dot, ..state }
}

/// Nominal heading bent from `θ*` toward `β ± π/2` as the opinion commits.
pub fn guided_heading(theta_star: AngleRad, beta: AngleRad, z: f64, k_z: f64) -> AngleRad {
    let s = (k_z * z).tanh();
    if s == 0.0 {
        return theta_star;
    }
    theta_star.offset(s.abs() * beta.diff(theta_star) + s * FRAC_PI_2)
}

/// Communication-free estimate of the other airplane's opinion: how far its
/// heading deviates from the bearing toward us.
pub fn estimate_intention(theta_other: AngleRad, p_other: Vec2, p_self: Vec2) -> Result<f64> {
    let beta = bearing(p_other, p_self)?;
    Ok(theta_other.diff(beta))
}

/// Attention at which the neutral opinion of the symmetric two-agent system
/// loses stability: `u* = d / (2κ)`.
pub fn critical_attention(d: f64, kappa: f64) -> Result<f64> {
    if !(d > 0.0 && kappa > 0.0) || !d.is_finite() || !kappa.is_finite() {
        return Err(Error::Domain(format!("critical attention needs d, kappa > 0 (got {d}, {kappa})")));
    }
    Ok(d / (2.0 * kappa))
}
