//! Synthetic command traces standing in for recorded teleoperation data.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::forecast::VarModel;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::trace::{JointUnit, Trace};

pub const JOINTS: usize = 6;

const HOME: [f64; JOINTS] = [0.0, 0.3, -0.6, 0.0, 0.5, 0.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Repeated home → pick → place → home cycles.
    PickAndPlace,
    /// Per-joint sums of sinusoids sharing a few base frequencies.
    SineMix,
    /// The home pose, held.
    Constant,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::PickAndPlace => "pick-and-place",
            Profile::SineMix => "sine-mix",
            Profile::Constant => "constant",
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pick-and-place" => Ok(Profile::PickAndPlace),
            "sine-mix" => Ok(Profile::SineMix),
            "constant" => Ok(Profile::Constant),
            other => Err(format!("unknown profile {other:?} (expected pick-and-place, sine-mix or constant)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub profile: Profile,
    pub duration_s: f64,
    pub period_ms: f64,
    pub seed: u64,
    /// Standard deviation of additive per-joint noise, in radians.
    pub noise_std: f64,
}

impl SynthOptions {
    pub fn new(profile: Profile, seed: u64) -> Self {
        SynthOptions { profile, duration_s: 30.0, period_ms: 20.0, seed, noise_std: 1e-4 }
    }

    pub fn samples(&self) -> usize {
        (self.duration_s * 1000.0 / self.period_ms + 1e-9).floor() as usize
    }
}

/// Generates a joint-space trace in radians. Identical options give an
/// identical trace.
///
/// # Panics
/// If the options yield fewer than one sample or a non-positive period.
pub fn generate_trace<T: Scalar>(opts: &SynthOptions) -> Trace<T> {
    assert!(opts.period_ms > 0.0, "period must be positive");
    let n = opts.samples();
    assert!(n >= 1, "duration shorter than one period");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dt = opts.period_ms / 1000.0;
    let mut rows = match opts.profile {
        Profile::Constant => vec![HOME.to_vec(); n],
        Profile::SineMix => sine_mix(&mut rng, n, dt),
        Profile::PickAndPlace => pick_and_place(&mut rng, n, dt),
    };
    if opts.profile != Profile::Constant && opts.noise_std > 0.0 {
        let noise = Normal::new(0.0, opts.noise_std).expect("finite noise");
        for v in rows.iter_mut().flatten() {
            *v += noise.sample(&mut rng);
        }
    }
    let rows = rows.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect();
    Trace::from_rows(opts.period_ms, rows, JointUnit::Radians).expect("generator emits a valid trace")
}

fn sine_mix(rng: &mut ChaCha8Rng, n: usize, dt: f64) -> Vec<Vec<f64>> {
    let freqs: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..0.6)).collect();
    let terms: Vec<Vec<(f64, f64)>> = (0..JOINTS)
        .map(|_| freqs.iter().map(|_| (rng.random_range(0.05..0.4), rng.random_range(0.0..2.0 * PI))).collect())
        .collect();
    (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            (0..JOINTS)
                .map(|k| {
                    HOME[k] + terms[k].iter().zip(&freqs).map(|((a, ph), f)| a * (2.0 * PI * f * t + ph).sin()).sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Position fraction along a trapezoidal-velocity move at normalized time
/// `u`, spending `acc` of the move accelerating and as much decelerating.
fn trapezoid(u: f64, acc: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let v = 1.0 / (1.0 - acc);
    if u < acc {
        v * u * u / (2.0 * acc)
    } else if u <= 1.0 - acc {
        v * (acc / 2.0 + u - acc)
    } else {
        1.0 - v * (1.0 - u) * (1.0 - u) / (2.0 * acc)
    }
}

/// A timed sequence of poses, linked by trapezoidal moves.
struct Segment {
    from: [f64; JOINTS],
    to: [f64; JOINTS],
    start: f64,
    duration: f64,
}

fn pick_and_place(rng: &mut ChaCha8Rng, n: usize, dt: f64) -> Vec<Vec<f64>> {
    let total = n as f64 * dt + 2.0;
    // Later joints trail the base slightly, as an operator's wrist follows
    // their arm.
    let lags: Vec<f64> = (0..JOINTS).map(|k| k as f64 * 0.03).collect();
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut pose = HOME;
    let jitter = |rng: &mut ChaCha8Rng, base: [f64; JOINTS], spread: f64| {
        let mut p = base;
        for v in &mut p {
            *v += rng.random_range(-spread..spread);
        }
        p
    };
    while t < total {
        let pick = jitter(rng, [0.9, -0.2, -0.4, 0.1, 0.9, 0.4], 0.25);
        let place = jitter(rng, [-0.8, -0.1, -0.5, -0.2, 0.8, -0.6], 0.25);
        let above = |p: [f64; JOINTS]| {
            let mut a = p;
            a[1] += 0.35;
            a[2] -= 0.25;
            a
        };
        let plan = [
            (above(pick), 0.8..1.5, 0.0..0.2),
            (pick, 0.5..0.9, 0.2..0.5),
            (above(pick), 0.5..0.9, 0.0..0.2),
            (above(place), 1.0..1.8, 0.0..0.2),
            (place, 0.5..0.9, 0.2..0.5),
            (above(place), 0.5..0.9, 0.0..0.2),
            (HOME, 0.8..1.5, 0.3..0.8),
        ];
        for (target, move_s, dwell_s) in plan {
            let duration = rng.random_range(move_s);
            segments.push(Segment { from: pose, to: target, start: t, duration });
            t += duration + rng.random_range(dwell_s);
            pose = target;
        }
    }

    let position = |k: usize, time: f64| -> f64 {
        let idx = segments.partition_point(|s| s.start <= time);
        if idx == 0 {
            return segments[0].from[k];
        }
        let s = &segments[idx - 1];
        let f = trapezoid((time - s.start) / s.duration, 0.3);
        s.from[k] + (s.to[k] - s.from[k]) * f
    };
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..JOINTS).map(|k| position(k, (i as f64 * dt - lags[k]).max(0.0))).collect())
        .collect();

    // Light moving-average smoothing rounds the velocity corners.
    const HALF: usize = 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(HALF);
            let hi = (i + HALF).min(n - 1);
            (0..JOINTS).map(|k| raw[lo..=hi].iter().map(|r| r[k]).sum::<f64>() / (hi - lo + 1) as f64).collect()
        })
        .collect()
}

/// A random VAR(`lag`) whose lag matrices have infinity norms summing to
/// 0.9, so the process is stable. The last lag carries a third of that
/// budget and is never negligible. Residual covariance is `noise_std²·I`.
pub fn random_stable_var(dim: usize, lag: usize, noise_std: f64, seed: u64) -> VarModel<f64> {
    assert!(dim >= 1 && lag >= 1, "dim and lag must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = |l: usize| if lag == 1 { 0.9 } else if l == lag - 1 { 0.3 } else { 0.6 / (lag - 1) as f64 };
    let coeffs = (0..lag)
        .map(|l| {
            let mut a: Matrix<f64> = Matrix::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    a[(r, c)] = rng.random_range(-1.0..1.0);
                }
            }
            let norm = (0..dim).map(|r| a.row(r).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
            for r in 0..dim {
                for v in a.row_mut(r) {
                    *v *= budget(l) / norm;
                }
            }
            a
        })
        .collect();
    let bias = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut cov = Matrix::identity(dim);
    for i in 0..dim {
        cov[(i, i)] = noise_std * noise_std;
    }
    VarModel::new(bias, coeffs, cov).expect("well-formed model")
}

/// Simulates `n` samples of `model` driven by i.i.d. Gaussian noise,
/// after discarding a burn-in of 200 samples started from zero.
pub fn simulate_var<T: Scalar>(model: &VarModel<T>, n: usize, noise_std: f64, period_ms: f64, seed: u64) -> Trace<T> {
    const BURN_IN: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std).expect("finite noise");
    let (dim, lag) = (model.dim(), model.lag());
    let mut rows: Vec<Vec<T>> = vec![vec![T::zero(); dim]; lag];
    for _ in 0..BURN_IN + n {
        let recent: Vec<&[T]> = rows[rows.len() - lag..].iter().map(|r| r.as_slice()).collect();
        let mut next = model.predict_rows(&recent);
        for v in &mut next {
            *v = *v + T::lit(noise.sample(&mut rng));
        }
        rows.push(next);
    }
    let rows = rows.split_off(rows.len() - n);
    Trace::from_rows(period_ms, rows, JointUnit::Radians).expect("simulated trace is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_seconds_is_1500_rows() {
        let t: Trace<f64> = generate_trace(&SynthOptions::new(Profile::PickAndPlace, 0));
        assert_eq!(t.len(), 1500);
        assert_eq!(t.dim(), JOINTS);
        assert_eq!(t.period_ms(), 20.0);
    }

    #[test]
    fn constant_rows_are_identical() {
        let t: Trace<f64> = generate_trace(&SynthOptions { duration_s: 2.0, ..SynthOptions::new(Profile::Constant, 5) });
        assert!(t.rows().all(|r| r == t.joints(0)));
    }

    #[test]
    fn seeded_and_reproducible() {
        for p in [Profile::PickAndPlace, Profile::SineMix] {
            let o = SynthOptions::new(p, 9);
            let a: Trace<f64> = generate_trace(&o);
            assert_eq!(a, generate_trace(&o));
            let b: Trace<f64> = generate_trace(&SynthOptions { seed: 10, ..o });
            assert_ne!(a, b);
        }
    }

    #[test]
    fn pick_and_place_is_smooth_and_moves() {
        let t: Trace<f64> = generate_trace(&SynthOptions { noise_std: 0.0, ..SynthOptions::new(Profile::PickAndPlace, 2) });
        let rows: Vec<&[f64]> = t.rows().collect();
        let max_step = rows.windows(2).flat_map(|w| w[0].iter().zip(w[1]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        assert!(max_step < 0.1, "max per-slot step {max_step}");
        let span = rows.iter().map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max) - rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
        assert!(span > 1.0, "base joint barely moves: {span}");
    }

    #[test]
    fn trapezoid_endpoints() {
        assert_eq!(trapezoid(0.0, 0.3), 0.0);
        assert!((trapezoid(1.0, 0.3) - 1.0).abs() < 1e-12);
        assert!((trapezoid(0.5, 0.3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simulated_var_matches_its_generator() {
        let model = random_stable_var(3, 2, 0.1, 4);
        let trace: Trace<f64> = simulate_var(&model, 20_000, 0.1, 20.0, 5);
        assert_eq!(trace.len(), 20_000);
        let fitted = crate::forecast::fit_var_ols(&trace, 2).unwrap();
        assert!(fitted.max_weight_diff(&model) < 0.05, "{}", fitted.max_weight_diff(&model));
    }

    #[test]
    fn profile_names_round_trip() {
        for p in [Profile::PickAndPlace, Profile::SineMix, Profile::Constant] {
            assert_eq!(p.as_str().parse::<Profile>().unwrap(), p);
        }
        assert!("wave".parse::<Profile>().is_err());
    }
}
