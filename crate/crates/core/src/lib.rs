//! Forecast-based recovery of late or lost remote-control commands.
//!
//! A remote controller streams joint-state commands every period over an
//! 802.11 link. Commands that miss their deadline are replaced by a forecast
//! from a vector autoregression trained on past trajectories, and the
//! resulting trajectory error is compared against repeating the last
//! command.
//!
//! Numerical code is generic over [`Scalar`]; the aliases at the crate root
//! fix it to `f64` for the common case.

pub mod channel;
pub mod eval;
pub mod forecast;
pub mod linalg;
pub mod recovery;
pub mod scalar;
pub mod synth;
pub mod time;
pub mod trace;

pub use scalar::Scalar;
pub use time::Micros;

pub type Command = trace::Command<f64>;
pub type Trace = trace::Trace<f64>;
pub type VarModel = forecast::VarModel<f64>;
pub type ExecutedStream = recovery::ExecutedStream<f64>;
pub type RecoveryPolicy = recovery::RecoveryPolicy<f64>;
pub type Matrix = linalg::Matrix<f64>;

pub type Trace32 = trace::Trace<f32>;
pub type VarModel32 = forecast::VarModel<f32>;
