//! IEEE 802.11 delay and loss model for an interference-prone link.
//!
//! A frame is retried until it succeeds or `max_rtx` attempts have failed.
//! `a_j` is the probability of success after exactly `j` failed attempts,
//! and the last entry of the vector is the loss probability. The access
//! point is modeled as a single-server FIFO queue whose service time is a
//! mixture over those branches.

mod io;
mod mac;
mod sim;
mod verify;

pub use io::{outcome_csv_string, read_channel_config_json, write_outcomes_csv};
pub use mac::{loss_occupancy_ms, mean_delay_given_rtx, rtx_distribution, MacParams};
pub use sim::{simulate_arrivals, simulate_channel, ChannelOutcome, LossCause};
pub use verify::{
    expected_delay_bound, monte_carlo_link, verify_causality_prob, verify_unbounded_delay, CausalityCheck,
    DelayBound, LinkSample, UnboundedDelayCheck,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel config: {0}")]
    InvalidConfig(String),
    #[error("retransmission count {j} is out of range (max {max})")]
    OutOfRange { j: u32, max: u32 },
    #[error("every frame is lost (a_{{m+2}} = 1)")]
    AlwaysLost,
    #[error("trace period {trace_ms} ms does not match channel period {config_ms} ms")]
    PeriodMismatch { trace_ms: f64, config_ms: f64 },
    #[error("channel config: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterferenceParams {
    /// Probability the interferer emits at a transmission opportunity.
    pub p_if: f64,
    /// How long the interferer stays active once it emits, in slots.
    pub t_if_slots: f64,
    /// Contending stations sharing the channel, including this one.
    pub n_stations: u32,
}

impl Default for InterferenceParams {
    fn default() -> Self {
        InterferenceParams { p_if: 0.0, t_if_slots: 0.0, n_stations: 1 }
    }
}

impl InterferenceParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&self.p_if) {
            return Err(ChannelError::InvalidConfig(format!("p_if = {} outside [0, 1]", self.p_if)));
        }
        if self.t_if_slots.is_nan() || self.t_if_slots < 0.0 {
            return Err(ChannelError::InvalidConfig(format!("t_if_slots = {} is negative", self.t_if_slots)));
        }
        if self.n_stations == 0 {
            return Err(ChannelError::InvalidConfig("n_stations must be >= 1".into()));
        }
        Ok(())
    }
}

fn default_queue_cap() -> usize {
    64
}

fn default_period_ms() -> f64 {
    20.0
}

fn default_attempt_prob() -> f64 {
    0.05
}

/// Everything needed to simulate one link. Serialized flat, so a config
/// file names every MAC and interference field at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    #[serde(flatten)]
    pub mac: MacParams,
    #[serde(flatten)]
    pub interference: InterferenceParams,
    /// Access-point capacity, counting the frame in service.
    #[serde(default = "default_queue_cap")]
    pub queue_cap: usize,
    #[serde(default = "default_period_ms")]
    pub period_ms: f64,
    #[serde(default)]
    pub transport_bound_ms: f64,
    #[serde(default)]
    pub seed: u64,
    /// Per-slot transmission probability of every other station.
    #[serde(default = "default_attempt_prob")]
    pub attempt_prob: f64,
    /// Explicit `a_0..a_{m+2}` replacing the geometric model.
    #[serde(default, rename = "a_j", skip_serializing_if = "Option::is_none")]
    pub rtx_probs: Option<Vec<f64>>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            mac: MacParams::default(),
            interference: InterferenceParams::default(),
            queue_cap: default_queue_cap(),
            period_ms: default_period_ms(),
            transport_bound_ms: 0.0,
            seed: 0,
            attempt_prob: default_attempt_prob(),
            rtx_probs: None,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        self.mac.validate()?;
        self.interference.validate()?;
        if self.queue_cap == 0 {
            return Err(ChannelError::InvalidConfig("queue_cap must be >= 1".into()));
        }
        if !(self.period_ms > 0.0 && self.period_ms.is_finite()) {
            return Err(ChannelError::InvalidConfig(format!("period_ms = {} must be positive", self.period_ms)));
        }
        if !(self.transport_bound_ms >= 0.0 && self.transport_bound_ms.is_finite()) {
            return Err(ChannelError::InvalidConfig("transport_bound_ms must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.attempt_prob) {
            return Err(ChannelError::InvalidConfig(format!("attempt_prob = {} outside [0, 1)", self.attempt_prob)));
        }
        if let Some(a) = &self.rtx_probs {
            let want = self.mac.max_rtx as usize + 1;
            if a.len() != want {
                return Err(ChannelError::InvalidConfig(format!("a_j has {} entries, expected {want}", a.len())));
            }
            if a.iter().any(|p| !(*p >= 0.0 && *p <= 1.0)) {
                return Err(ChannelError::InvalidConfig("a_j entries must lie in [0, 1]".into()));
            }
            let sum: f64 = a.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ChannelError::InvalidConfig(format!("a_j sums to {sum}, expected 1")));
            }
        }
        Ok(())
    }

    /// `a_0..a_{m+2}`: the explicit vector if given, otherwise the geometric
    /// model driven by [`attempt_failure_prob`].
    pub fn rtx_probs(&self) -> Vec<f64> {
        match &self.rtx_probs {
            Some(a) => a.clone(),
            None => rtx_distribution(attempt_failure_prob(self), self.mac.max_rtx),
        }
    }
}

/// Per-attempt failure probability from station collisions and interference:
/// `1 - (1 - p_col)(1 - p_int)`.
///
/// `p_col = 1 - (1 - q)^(n - 1)` for per-slot attempt probability `q`.
/// `p_int = p_if * T_if / (T_if + T_s / slot)` approximates the chance
/// that an emitting interferer overlaps a frame by its duty cycle.
pub fn attempt_failure_prob(cfg: &ChannelConfig) -> f64 {
    let q = cfg.attempt_prob;
    let others = cfg.interference.n_stations.saturating_sub(1) as i32;
    let p_col = 1.0 - (1.0 - q).powi(others);
    let p_int = cfg.interference.p_if * interference_overlap(cfg);
    1.0 - (1.0 - p_col) * (1.0 - p_int)
}

/// `min(1, T_if / (T_if + T_s / slot))`.
pub(crate) fn interference_overlap(cfg: &ChannelConfig) -> f64 {
    let t_if = cfg.interference.t_if_slots;
    if t_if.is_infinite() {
        return 1.0;
    }
    let frame_slots = cfg.mac.t_s_ms / cfg.mac.slot_ms;
    if t_if + frame_slots == 0.0 {
        return 0.0;
    }
    (t_if / (t_if + frame_slots)).min(1.0)
}
