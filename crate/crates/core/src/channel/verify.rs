use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mac::mean_delay_given_rtx;
use super::sim::simulate_arrivals;
use super::{interference_overlap, ChannelConfig, ChannelError};
use crate::time::Micros;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayBound {
    /// `D + sum_{j<=m+1} a_j E_j / (1 - a_{m+2})`.
    pub bound_ms: f64,
    /// `1 - a_{m+2}`; with the complementary probability the delay is
    /// unbounded.
    pub delivery_prob: f64,
    /// The mixture term alone, i.e. the mean service time of delivered frames.
    pub service_mean_ms: f64,
}

/// Upper bound on the mean delay of a delivered command.
pub fn expected_delay_bound(cfg: &ChannelConfig) -> Result<DelayBound, ChannelError> {
    cfg.validate()?;
    let a = cfg.rtx_probs();
    let (loss, delivered) = a.split_last().expect("a_j is never empty");
    if *loss >= 1.0 {
        return Err(ChannelError::AlwaysLost);
    }
    let mut mix = 0.0;
    for (j, aj) in delivered.iter().enumerate() {
        mix += aj * mean_delay_given_rtx(j as u32, &cfg.mac)?;
    }
    let service_mean_ms = mix / (1.0 - loss);
    Ok(DelayBound { bound_ms: cfg.transport_bound_ms + service_mean_ms, delivery_prob: 1.0 - loss, service_mean_ms })
}

/// Tallies from [`monte_carlo_link`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkSample {
    /// `counts[j]` frames delivered after `j` failed attempts; the last
    /// entry counts lost frames.
    pub counts: Vec<u64>,
    pub delay_sum_ms: f64,
    pub delay_sq_sum_ms: f64,
}

impl LinkSample {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn delivered(&self) -> u64 {
        self.total() - self.counts.last().copied().unwrap_or(0)
    }

    pub fn mean_delay_ms(&self) -> f64 {
        self.delay_sum_ms / self.delivered() as f64
    }

    /// Standard error of [`mean_delay_ms`](Self::mean_delay_ms).
    pub fn mean_delay_std_err(&self) -> f64 {
        let n = self.delivered() as f64;
        let mean = self.mean_delay_ms();
        let var = (self.delay_sq_sum_ms / n - mean * mean).max(0.0);
        (var / n).sqrt()
    }
}

/// Draws the retransmission count of one frame.
///
/// Without an explicit `a_j` vector every attempt is played out: each other
/// station transmits in the slot with probability `q`, and the interferer
/// hits the frame with probability `p_if` times its duty-cycle overlap.
fn draw_rtx(cfg: &ChannelConfig, explicit: Option<&[f64]>, overlap: f64, rng: &mut ChaCha8Rng) -> usize {
    let max = cfg.mac.max_rtx as usize;
    if let Some(a) = explicit {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, p) in a.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        return max;
    }
    let others = cfg.interference.n_stations.saturating_sub(1);
    for attempt in 0..max {
        let mut collided = false;
        for _ in 0..others {
            collided |= rng.random::<f64>() < cfg.attempt_prob;
        }
        let interfered = rng.random::<f64>() < cfg.interference.p_if && rng.random::<f64>() < overlap;
        if !collided && !interfered {
            return attempt;
        }
    }
    max
}

/// Samples `n` independent frames. Delivered frames draw their backoff
/// counters uniformly from each stage's window and add a transport delay
/// uniform on `(0, D]`.
pub fn monte_carlo_link(cfg: &ChannelConfig, n: u64, seed: u64) -> Result<LinkSample, ChannelError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let explicit = cfg.rtx_probs.as_deref();
    let overlap = interference_overlap(cfg);
    let max = cfg.mac.max_rtx as usize;
    let mut sample = LinkSample { counts: vec![0; max + 1], ..Default::default() };
    for _ in 0..n {
        let j = draw_rtx(cfg, explicit, overlap, &mut rng);
        sample.counts[j] += 1;
        if j == max {
            continue;
        }
        let mut backoff = 0u64;
        for k in 0..=j as u32 {
            backoff += rng.random_range(0..cfg.mac.window(k)) as u64;
        }
        let mut delay = cfg.mac.t_s_ms + j as f64 * cfg.mac.t_col_ms + cfg.mac.slot_ms * backoff as f64;
        if cfg.transport_bound_ms > 0.0 {
            delay += cfg.transport_bound_ms * (1.0 - rng.random::<f64>());
        }
        sample.delay_sum_ms += delay;
        sample.delay_sq_sum_ms += delay * delay;
    }
    Ok(sample)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CausalityCheck {
    /// `sum_{j<=m+1} a_j^2`.
    pub analytic: f64,
    /// Share of sampled consecutive pairs delivered with equal retransmission counts.
    pub empirical: f64,
    /// Binomial standard error at the analytic probability.
    pub std_err: f64,
}

impl CausalityCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        (self.empirical - self.analytic).abs() <= sigmas * self.std_err + f64::EPSILON
    }
}

/// Compares the analytic probability that two consecutive commands see the
/// same retransmission count (so their delay difference vanishes on
/// average) against `n_samples` sampled pairs.
pub fn verify_causality_prob(cfg: &ChannelConfig, n_samples: u64) -> Result<CausalityCheck, ChannelError> {
    if n_samples < 10_000 {
        return Err(ChannelError::InvalidConfig("causality check needs at least 10^4 samples".into()));
    }
    cfg.validate()?;
    let a = cfg.rtx_probs();
    let max = cfg.mac.max_rtx as usize;
    let analytic: f64 = a[..max].iter().map(|p| p * p).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let explicit = cfg.rtx_probs.as_deref();
    let overlap = interference_overlap(cfg);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let j1 = draw_rtx(cfg, explicit, overlap, &mut rng);
        let j2 = draw_rtx(cfg, explicit, overlap, &mut rng);
        if j1 == j2 && j1 < max {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    Ok(CausalityCheck {
        analytic,
        empirical: hits as f64 / n,
        std_err: (analytic * (1.0 - analytic) / n).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnboundedDelayCheck {
    /// `a_{m+2}`.
    pub analytic_loss: f64,
    /// Share of simulated commands lost or delayed beyond `K`.
    pub empirical_exceed: f64,
    pub std_err: f64,
}

impl UnboundedDelayCheck {
    /// The exceed rate is no smaller than the loss probability, up to noise.
    pub fn lower_bound_holds(&self, sigmas: f64) -> bool {
        self.empirical_exceed >= self.analytic_loss - sigmas * self.std_err
    }
}

/// Runs `n_samples` commands through the queue and counts those whose
/// delay exceeds `k_ms` (lost commands exceed every bound).
pub fn verify_unbounded_delay(cfg: &ChannelConfig, k_ms: f64, n_samples: u64) -> Result<UnboundedDelayCheck, ChannelError> {
    if n_samples < 10_000 {
        return Err(ChannelError::InvalidConfig("unbounded-delay check needs at least 10^4 samples".into()));
    }
    cfg.validate()?;
    let analytic_loss = *cfg.rtx_probs().last().expect("a_j is never empty");
    let period = Micros::from_ms(cfg.period_ms);
    let arrivals: Vec<Micros> = (0..n_samples as i64).map(|i| period * i).collect();
    let outcomes = simulate_arrivals(&arrivals, cfg)?;
    let exceed = outcomes
        .iter()
        .filter(|o| o.delay_ms().is_none_or(|d| d > k_ms))
        .count();
    let n = n_samples as f64;
    Ok(UnboundedDelayCheck {
        analytic_loss,
        empirical_exceed: exceed as f64 / n,
        std_err: (analytic_loss * (1.0 - analytic_loss) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{InterferenceParams, MacParams};

    fn geometric(p: f64, max_rtx: u32) -> ChannelConfig {
        // explicit a_j realizing a given per-attempt failure probability
        let mac = MacParams { max_rtx, ..Default::default() };
        ChannelConfig { mac, rtx_probs: Some(crate::channel::rtx_distribution(p, max_rtx)), ..Default::default() }
    }

    #[test]
    fn bound_examples() {
        let cfg = ChannelConfig::default();
        let b = expected_delay_bound(&cfg).unwrap();
        assert_eq!(b.delivery_prob, 1.0);
        assert_eq!(b.bound_ms, mean_delay_given_rtx(0, &cfg.mac).unwrap());

        let cfg = geometric(0.5, 3);
        let e = |j| mean_delay_given_rtx(j, &cfg.mac).unwrap();
        let b = expected_delay_bound(&cfg).unwrap();
        assert!((b.bound_ms - (0.5 * e(0) + 0.25 * e(1) + 0.125 * e(2)) / 0.875).abs() < 1e-12);
        assert_eq!(b.delivery_prob, 0.875);

        let mut lost = ChannelConfig::default();
        lost.interference = InterferenceParams { p_if: 1.0, t_if_slots: f64::INFINITY, n_stations: 1 };
        assert!(matches!(expected_delay_bound(&lost), Err(ChannelError::AlwaysLost)));
    }

    #[test]
    fn causality_examples() {
        let c = verify_causality_prob(&ChannelConfig::default(), 10_000).unwrap();
        assert_eq!((c.analytic, c.empirical), (1.0, 1.0));
        let c = verify_causality_prob(&geometric(0.5, 3), 200_000).unwrap();
        assert_eq!(c.analytic, 0.328125);
        assert!(c.within(3.0), "{c:?}");
        let c = verify_causality_prob(&geometric(0.9, 7), 200_000).unwrap();
        assert!(c.within(3.0), "{c:?}");
        assert!(verify_causality_prob(&ChannelConfig::default(), 10).is_err());
    }

    #[test]
    fn unbounded_delay_examples() {
        let u = verify_unbounded_delay(&ChannelConfig { queue_cap: 1000, ..Default::default() }, 50.0, 10_000).unwrap();
        assert_eq!((u.analytic_loss, u.empirical_exceed), (0.0, 0.0));
        let cfg = ChannelConfig { queue_cap: 1000, ..geometric(0.5, 3) };
        let u = verify_unbounded_delay(&cfg, 1e9, 100_000).unwrap();
        assert_eq!(u.analytic_loss, 0.125);
        assert!(u.empirical_exceed > 0.0);
        assert!((u.empirical_exceed - 0.125).abs() <= 3.0 * u.std_err, "{u:?}");
    }

    #[test]
    fn physical_sampler_matches_failure_prob() {
        let mut cfg = ChannelConfig::default();
        cfg.interference = InterferenceParams { p_if: 0.0, t_if_slots: 0.0, n_stations: 5 };
        let s = monte_carlo_link(&cfg, 200_000, 7).unwrap();
        // a_0 = 1 - p with p = 1 - 0.95^4
        let a0 = 0.95f64.powi(4);
        let emp = s.counts[0] as f64 / s.total() as f64;
        assert!((emp - a0).abs() < 3.0 * (a0 * (1.0 - a0) / 200_000.0).sqrt(), "{emp} vs {a0}");
    }

    #[test]
    fn sampled_mean_delay_matches_mixture() {
        let mut cfg = ChannelConfig::default();
        cfg.interference = InterferenceParams { p_if: 0.5, t_if_slots: 8.0, n_stations: 15 };
        let s = monte_carlo_link(&cfg, 300_000, 3).unwrap();
        let b = expected_delay_bound(&cfg).unwrap();
        assert!((s.mean_delay_ms() - b.service_mean_ms).abs() < 3.0 * s.mean_delay_std_err());
    }
}
