use serde::{Deserialize, Serialize};

use super::ChannelError;

/// 802.11 DCF timing. Defaults are rough 802.11n / 2.4 GHz figures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacParams {
    /// Successful frame exchange time.
    #[serde(default = "d_t_s")]
    pub t_s_ms: f64,
    /// Time lost to one collision.
    #[serde(default = "d_t_col")]
    pub t_col_ms: f64,
    /// Average slot time.
    #[serde(default = "d_slot")]
    pub slot_ms: f64,
    /// Initial contention window `W_0`.
    #[serde(default = "d_w0")]
    pub w0: u32,
    /// `W_k = min(2^k, 2^max_window_exp) * W_0`.
    #[serde(default = "d_max_exp")]
    pub max_window_exp: u32,
    /// Attempts before a frame is dropped (the first transmission counts).
    #[serde(default = "d_max_rtx")]
    pub max_rtx: u32,
}

fn d_t_s() -> f64 {
    0.3
}
fn d_t_col() -> f64 {
    0.35
}
fn d_slot() -> f64 {
    0.009
}
fn d_w0() -> u32 {
    16
}
fn d_max_exp() -> u32 {
    6
}
fn d_max_rtx() -> u32 {
    7
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            t_s_ms: d_t_s(),
            t_col_ms: d_t_col(),
            slot_ms: d_slot(),
            w0: d_w0(),
            max_window_exp: d_max_exp(),
            max_rtx: d_max_rtx(),
        }
    }
}

impl MacParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.t_s_ms) || !positive(self.t_col_ms) || !positive(self.slot_ms) {
            return Err(ChannelError::InvalidConfig("MAC times must be positive".into()));
        }
        if self.w0 < 2 {
            return Err(ChannelError::InvalidConfig("w0 must be >= 2".into()));
        }
        if self.max_rtx == 0 {
            return Err(ChannelError::InvalidConfig("max_rtx must be >= 1".into()));
        }
        if self.max_window_exp > 20 {
            return Err(ChannelError::InvalidConfig("max_window_exp must be <= 20".into()));
        }
        Ok(())
    }

    /// Backoff window of stage `k`.
    pub fn window(&self, k: u32) -> u32 {
        self.w0 << k.min(self.max_window_exp)
    }

    /// Mean backoff of stages `0..=j` in slots: `sum (W_k - 1) / 2`.
    pub(crate) fn mean_backoff_slots(&self, j: u32) -> f64 {
        (0..=j).map(|k| (self.window(k) as f64 - 1.0) / 2.0).sum()
    }
}

/// `a_0..a_{m+2}` for per-attempt failure probability `p`:
/// `a_j = p^j (1 - p)` for delivered branches and the remainder for loss.
pub fn rtx_distribution(p: f64, max_rtx: u32) -> Vec<f64> {
    let p = p.clamp(0.0, 1.0);
    let mut a: Vec<f64> = (0..max_rtx as i32).map(|j| p.powi(j) * (1.0 - p)).collect();
    let delivered: f64 = a.iter().sum();
    a.push((1.0 - delivered).max(0.0));
    a
}

/// Mean wireless delay of a frame delivered after `j` failed attempts:
/// `T_s + j T_col + slot * sum_{k=0}^{j} (W_k - 1) / 2`.
pub fn mean_delay_given_rtx(j: u32, mac: &MacParams) -> Result<f64, ChannelError> {
    let max = mac.max_rtx - 1;
    if j > max {
        return Err(ChannelError::OutOfRange { j, max });
    }
    Ok(mac.t_s_ms + j as f64 * mac.t_col_ms + mac.slot_ms * mac.mean_backoff_slots(j))
}

/// Airtime burnt by a frame that exhausts every attempt.
pub fn loss_occupancy_ms(mac: &MacParams) -> f64 {
    mac.max_rtx as f64 * mac.t_col_ms + mac.slot_ms * mac.mean_backoff_slots(mac.max_rtx - 1)
}
