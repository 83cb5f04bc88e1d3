use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::mac::{loss_occupancy_ms, mean_delay_given_rtx};
use super::{ChannelConfig, ChannelError};
use crate::scalar::Scalar;
use crate::time::Micros;
use crate::trace::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossCause {
    RtxExceeded,
    QueueOverflow,
}

impl LossCause {
    pub fn as_str(self) -> &'static str {
        match self {
            LossCause::RtxExceeded => "rtx_exceeded",
            LossCause::QueueOverflow => "queue_overflow",
        }
    }
}

/// Fate of one command on the link.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelOutcome {
    Delivered {
        /// Generation to arrival: queueing, service and transport.
        delay: Micros,
        /// Failed attempts before the successful one.
        rtx: u32,
        /// Time spent queued before service started.
        waited: Micros,
    },
    Lost(LossCause),
}

impl ChannelOutcome {
    pub fn delay(&self) -> Option<Micros> {
        match self {
            ChannelOutcome::Delivered { delay, .. } => Some(*delay),
            ChannelOutcome::Lost(_) => None,
        }
    }

    pub fn delay_ms(&self) -> Option<f64> {
        self.delay().map(Micros::as_ms)
    }

    pub fn is_lost(&self) -> bool {
        matches!(self, ChannelOutcome::Lost(_))
    }
}

/// Runs every command of `trace` through the access-point queue.
pub fn simulate_channel<T: Scalar>(trace: &Trace<T>, cfg: &ChannelConfig) -> Result<Vec<ChannelOutcome>, ChannelError> {
    if Micros::from_ms(cfg.period_ms) != trace.period() {
        return Err(ChannelError::PeriodMismatch { trace_ms: trace.period_ms(), config_ms: cfg.period_ms });
    }
    let arrivals: Vec<Micros> = trace.samples().iter().map(|c| c.gen_time()).collect();
    simulate_arrivals(&arrivals, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // departures sort first so a frame leaving at t frees room for an
    // arrival at the same t
    Departure,
    Arrival,
}

#[derive(Clone, Copy)]
struct InService {
    idx: usize,
    branch: usize,
    started: Micros,
}

/// Discrete-event run of the G/HEXP/1/Q access point for the given arrival
/// instants (non-decreasing). Deterministic for a fixed `cfg.seed`.
///
/// Service of branch `j` takes `T_s + Exp(E_j - T_s)`, so its mean is
/// `E_j` and no frame beats a clean transmission. A frame that exhausts its
/// attempts holds the server for the full failed-attempt airtime.
pub fn simulate_arrivals(arrivals: &[Micros], cfg: &ChannelConfig) -> Result<Vec<ChannelOutcome>, ChannelError> {
    cfg.validate()?;
    let probs = cfg.rtx_probs();
    let lost_branch = probs.len() - 1;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let extra: Vec<Option<Exp<f64>>> = (0..lost_branch as u32)
        .map(|j| {
            let mean = mean_delay_given_rtx(j, &cfg.mac).expect("branch in range") - cfg.mac.t_s_ms;
            Exp::new(1.0 / mean).ok()
        })
        .collect();
    let t_s = cfg.mac.t_s_ms;
    let loss_time = Micros::from_ms(loss_occupancy_ms(&cfg.mac));
    let d_bound = cfg.transport_bound_ms;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut outcomes: Vec<Option<ChannelOutcome>> = vec![None; arrivals.len()];
    let mut events = BinaryHeap::new();
    for (i, t) in arrivals.iter().enumerate() {
        events.push(Reverse((*t, EventKind::Arrival, i)));
    }
    let mut waiting: VecDeque<usize> = VecDeque::new();
    let mut server: Option<InService> = None;

    let start_service = |idx: usize, now: Micros, rng: &mut ChaCha8Rng, events: &mut BinaryHeap<_>| {
        let u: f64 = rng.random();
        let branch = cumulative.iter().position(|c| u < *c).unwrap_or(lost_branch);
        let service = if branch == lost_branch {
            loss_time
        } else {
            let tail = extra[branch].map_or(0.0, |e| e.sample(rng));
            Micros::from_ms(t_s + tail)
        };
        events.push(Reverse((now + service, EventKind::Departure, idx)));
        InService { idx, branch, started: now }
    };

    while let Some(Reverse((now, kind, idx))) = events.pop() {
        match kind {
            EventKind::Arrival => {
                let in_system = waiting.len() + usize::from(server.is_some());
                if in_system >= cfg.queue_cap {
                    outcomes[idx] = Some(ChannelOutcome::Lost(LossCause::QueueOverflow));
                } else if server.is_none() {
                    server = Some(start_service(idx, now, &mut rng, &mut events));
                } else {
                    waiting.push_back(idx);
                }
            }
            EventKind::Departure => {
                let done = server.take().expect("departure without a frame in service");
                debug_assert_eq!(done.idx, idx);
                outcomes[idx] = Some(if done.branch == lost_branch {
                    ChannelOutcome::Lost(LossCause::RtxExceeded)
                } else {
                    let transport = if d_bound > 0.0 {
                        // Uniform on (0, D]
                        let u: f64 = rng.random();
                        Micros::from_ms(d_bound * (1.0 - u))
                    } else {
                        Micros::ZERO
                    };
                    let generated = arrivals[idx];
                    ChannelOutcome::Delivered {
                        delay: now - generated + transport,
                        rtx: done.branch as u32,
                        waited: done.started - generated,
                    }
                });
                if let Some(next) = waiting.pop_front() {
                    server = Some(start_service(next, now, &mut rng, &mut events));
                }
            }
        }
    }
    Ok(outcomes.into_iter().map(|o| o.expect("every arrival resolves")).collect())
}
