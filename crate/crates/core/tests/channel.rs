use foreco_core::channel::{
    expected_delay_bound, monte_carlo_link, read_channel_config_json, rtx_distribution, simulate_channel,
    verify_causality_prob, verify_unbounded_delay, ChannelConfig, ChannelOutcome, InterferenceParams, LossCause,
};
use foreco_core::synth::{generate_trace, Profile, SynthOptions};
use foreco_core::trace::Trace;

fn interfered(p_if: f64, n: u32) -> ChannelConfig {
    ChannelConfig {
        interference: InterferenceParams { p_if, t_if_slots: 8.0, n_stations: n },
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn histogram_matches_closed_form() {
    let cfg = interfered(0.4, 10);
    let n = 200_000u64;
    let sample = monte_carlo_link(&cfg, n, 1).unwrap();
    let a = cfg.rtx_probs();
    for (j, (&count, &p)) in sample.counts.iter().zip(&a).enumerate() {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let emp = count as f64 / n as f64;
        assert!((emp - p).abs() <= 4.0 * se + 1e-12, "bin {j}: {emp} vs {p}");
    }
}

#[test]
fn delivered_delay_respects_the_bound() {
    let cfg = ChannelConfig { transport_bound_ms: 2.0, ..interfered(0.3, 10) };
    let bound = expected_delay_bound(&cfg).unwrap();
    let s = monte_carlo_link(&cfg, 100_000, 2).unwrap();
    assert!(s.mean_delay_ms() <= bound.bound_ms + 3.0 * s.mean_delay_std_err());

    // The queued simulator adds waiting time on top, but at 50 Hz the
    // server is mostly idle.
    let trace: Trace<f64> = generate_trace(&SynthOptions { duration_s: 600.0, ..SynthOptions::new(Profile::Constant, 0) });
    let out = simulate_channel(&trace, &cfg).unwrap();
    let delays: Vec<f64> = out.iter().filter_map(|o| o.delay_ms()).collect();
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    let var = delays.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / delays.len() as f64;
    assert!(mean <= bound.bound_ms + 3.0 * (var / delays.len() as f64).sqrt(), "{mean} vs {}", bound.bound_ms);
}

#[test]
fn causality_and_unbounded_delay() {
    let cfg = interfered(0.5, 15);
    let c = verify_causality_prob(&cfg, 100_000).unwrap();
    assert!(c.within(3.5), "{c:?}");
    let u = verify_unbounded_delay(&cfg, 20.0, 50_000).unwrap();
    assert!(u.lower_bound_holds(3.0), "{u:?}");
}

#[test]
fn saturated_channel_loses_everything() {
    let cfg = ChannelConfig { rtx_probs: Some(rtx_distribution(1.0, 7)), ..Default::default() };
    let trace: Trace<f64> = generate_trace(&SynthOptions { duration_s: 2.0, ..SynthOptions::new(Profile::Constant, 0) });
    let out = simulate_channel(&trace, &cfg).unwrap();
    assert!(out.iter().all(|o| *o == ChannelOutcome::Lost(LossCause::RtxExceeded)));
    assert!(expected_delay_bound(&cfg).is_err());
}

#[test]
fn more_interference_means_more_misses() {
    let trace: Trace<f64> = generate_trace(&SynthOptions { duration_s: 120.0, ..SynthOptions::new(Profile::Constant, 0) });
    let misses = |p: f64| {
        simulate_channel(&trace, &interfered(p, 15))
            .unwrap()
            .iter()
            .filter(|o| o.delay_ms().is_none_or(|d| d > 20.0))
            .count()
    };
    let (lo, hi) = (misses(0.0), misses(0.9));
    assert!(hi > lo, "{lo} vs {hi}");
}

#[test]
fn config_json_with_defaults() {
    let cfg = read_channel_config_json(r#"{"p_if": 0.2, "t_if_slots": 4, "n_stations": 5, "seed": 9}"#.as_bytes()).unwrap();
    assert_eq!(cfg.interference, InterferenceParams { p_if: 0.2, t_if_slots: 4.0, n_stations: 5 });
    assert_eq!(cfg.mac, ChannelConfig::default().mac);
    assert_eq!(cfg.seed, 9);
}
