use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::channel::{ChannelOutcome, LossCause};
use crate::time::Micros;

/// Outcomes for `len` commands in which `bursts` runs of `burst_len`
/// consecutive commands are lost and every other command arrives with
/// `delay`. Runs start at random slots at or after `skip`, never touch
/// each other, and are separated by at least one delivered command.
pub fn burst_loss_outcomes(
    len: usize,
    burst_len: usize,
    bursts: usize,
    skip: usize,
    delay: Micros,
    seed: u64,
) -> Result<Vec<ChannelOutcome>, EvalError> {
    if burst_len == 0 {
        return Err(EvalError::Config("burst length must be >= 1".into()));
    }
    // Each burst claims its run plus one trailing delivered slot; the
    // rest of the slack is spread at random between them.
    let needed = bursts * (burst_len + 1);
    let Some(slack) = len.checked_sub(skip + needed) else {
        return Err(EvalError::Config(format!("{bursts} bursts of {burst_len} do not fit in {len} slots after {skip}")));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: Vec<usize> = (0..bursts).map(|_| rng.random_range(0..=slack)).collect();
    cuts.sort_unstable();

    let delivered = ChannelOutcome::Delivered { delay, rtx: 0, waited: Micros(0) };
    let mut out = vec![delivered; len];
    for (i, cut) in cuts.into_iter().enumerate() {
        let start = skip + cut + i * (burst_len + 1);
        for o in &mut out[start..start + burst_len] {
            *o = ChannelOutcome::Lost(LossCause::RtxExceeded);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn runs(out: &[ChannelOutcome]) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        let mut i = 0;
        while i < out.len() {
            if out[i].is_lost() {
                let s = i;
                while i < out.len() && out[i].is_lost() {
                    i += 1;
                }
                v.push((s, i - s));
            } else {
                i += 1;
            }
        }
        v
    }

    #[test]
    fn bursts_are_separate_and_exact() {
        for seed in 0..50 {
            let out = burst_loss_outcomes(300, 10, 8, 5, Micros(400), seed).unwrap();
            let r = runs(&out);
            assert_eq!(r.len(), 8, "seed {seed}: {r:?}");
            assert!(r.iter().all(|&(s, l)| l == 10 && s >= 5));
        }
    }

    #[test]
    fn tight_fit_and_overflow() {
        let out = burst_loss_outcomes(22, 10, 2, 0, Micros(0), 1).unwrap();
        assert_eq!(runs(&out), vec![(0, 10), (11, 10)]);
        assert!(burst_loss_outcomes(21, 10, 2, 0, Micros(0), 1).is_err());
        assert!(burst_loss_outcomes(21, 0, 2, 0, Micros(0), 1).is_err());
    }

    #[test]
    fn seeded() {
        let a = burst_loss_outcomes(1500, 5, 10, 20, Micros(0), 3).unwrap();
        assert_eq!(a, burst_loss_outcomes(1500, 5, 10, 20, Micros(0), 3).unwrap());
        assert_ne!(a, burst_loss_outcomes(1500, 5, 10, 20, Micros(0), 4).unwrap());
    }
}
