use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::rmse;
use super::EvalError;
use crate::channel::{simulate_channel, ChannelConfig, InterferenceParams};
use crate::recovery::{run_recovery, RecoveryPolicy};
use crate::scalar::Scalar;
use crate::trace::Trace;

/// Axes of the interference sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub probs: Vec<f64>,
    /// Interferer active durations, in slots.
    pub durations: Vec<f64>,
    pub robot_counts: Vec<u32>,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            probs: (0..10).map(|i| i as f64 / 10.0).collect(),
            durations: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            robot_counts: vec![5, 15, 25],
            repetitions: 40,
            master_seed: 0,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.probs.is_empty() || self.durations.is_empty() || self.robot_counts.is_empty() {
            return Err(EvalError::Config("sweep axes must be non-empty".into()));
        }
        if self.repetitions == 0 {
            return Err(EvalError::Config("repetitions must be >= 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.probs.len() * self.durations.len() * self.robot_counts.len()
    }

    /// `(robots, prob, duration)` of cell `idx`, robots outermost.
    fn cell(&self, idx: usize) -> (u32, f64, f64) {
        let nd = self.durations.len();
        let np = self.probs.len();
        (self.robot_counts[idx / (np * nd)], self.probs[(idx / nd) % np], self.durations[idx % nd])
    }
}

/// One heatmap square: per-policy RMSE for every repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub robots: u32,
    pub prob: f64,
    pub duration: f64,
    pub mean: [f64; 2],
    pub std: [f64; 2],
    pub rmse: [Vec<f64>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub policies: [String; 2],
    pub grid: SweepGrid,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, robots: u32, prob: f64, duration: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.robots == robots && c.prob == prob && c.duration == duration)
    }

    /// The cell where `policy` does worst on average.
    pub fn worst_cell(&self, policy: usize) -> &SweepCell {
        self.cells
            .iter()
            .max_by(|a, b| a.mean[policy].total_cmp(&b.mean[policy]))
            .expect("a sweep has at least one cell")
    }

    /// Mean-RMSE matrix for one robot count: probabilities as rows,
    /// durations as columns, with a header row and a leading prob column.
    pub fn matrix_csv(&self, policy: usize, robots: u32) -> String {
        let mut s = String::from("prob");
        for d in &self.grid.durations {
            s.push_str(&format!(",{d}"));
        }
        s.push('\n');
        for p in &self.grid.probs {
            s.push_str(&format!("{p}"));
            for d in &self.grid.durations {
                let v = self.cell(robots, *p, *d).map_or(f64::NAN, |c| c.mean[policy]);
                s.push_str(&format!(",{v:.9}"));
            }
            s.push('\n');
        }
        s
    }

    /// Bare whitespace-separated matrix, as read by gnuplot's `matrix` mode.
    pub fn matrix_gnuplot(&self, policy: usize, robots: u32) -> String {
        let mut s = String::new();
        for p in &self.grid.probs {
            let row: Vec<String> = self
                .grid
                .durations
                .iter()
                .map(|d| format!("{:.9}", self.cell(robots, *p, *d).map_or(f64::NAN, |c| c.mean[policy])))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Channel seed of one (cell, repetition) task.
pub fn task_seed(master: u64, cell: usize, rep: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell as u64) ^ rep as u64)
}

/// Runs both policies on identical channel outcomes for every cell and
/// repetition.
///
/// Each task owns its seed, so results do not depend on `jobs` (worker
/// threads; `None` uses every core).
pub fn run_sweep<T: Scalar>(
    trace: &Trace<T>,
    grid: &SweepGrid,
    template: &ChannelConfig,
    policies: (&RecoveryPolicy<T>, &RecoveryPolicy<T>),
    jobs: Option<usize>,
) -> Result<SweepResult, EvalError> {
    grid.validate()?;
    template.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| EvalError::Config(e.to_string()))?;

    let reps = grid.repetitions;
    let tasks: Vec<(usize, usize)> = (0..grid.cell_count()).flat_map(|c| (0..reps).map(move |r| (c, r))).collect();
    let run_task = |&(cell, rep): &(usize, usize)| -> Result<[f64; 2], EvalError> {
        let (robots, prob, duration) = grid.cell(cell);
        let cfg = ChannelConfig {
            interference: InterferenceParams { p_if: prob, t_if_slots: duration, n_stations: robots },
            seed: task_seed(grid.master_seed, cell, rep),
            ..template.clone()
        };
        let outcomes = simulate_channel(trace, &cfg)?;
        let a = rmse(&run_recovery(trace, &outcomes, policies.0)?, trace)?.as_f64();
        let b = rmse(&run_recovery(trace, &outcomes, policies.1)?, trace)?.as_f64();
        Ok([a, b])
    };
    let per_task: Vec<[f64; 2]> = pool.install(|| tasks.par_iter().map(run_task).collect::<Result<_, _>>())?;

    let cells = per_task
        .chunks(reps)
        .enumerate()
        .map(|(idx, chunk)| {
            let (robots, prob, duration) = grid.cell(idx);
            let rmse = [0, 1].map(|p| chunk.iter().map(|r| r[p]).collect::<Vec<f64>>());
            let mean = [0, 1].map(|p| rmse[p].iter().sum::<f64>() / reps as f64);
            let std = [0, 1].map(|p| {
                let m = mean[p];
                (rmse[p].iter().map(|v| (v - m) * (v - m)).sum::<f64>() / reps as f64).sqrt()
            });
            SweepCell { robots, prob, duration, mean, std, rmse }
        })
        .collect();

    Ok(SweepResult {
        policies: [policies.0.label().to_string(), policies.1.label().to_string()],
        grid: grid.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::RecoveryPolicy;
    use crate::synth::{generate_trace, Profile, SynthOptions};
    use crate::trace::RecoveryConfig;
    use std::sync::Arc;

    fn small_setup() -> (Trace<f64>, RecoveryPolicy<f64>, RecoveryPolicy<f64>) {
        let trace = generate_trace::<f64>(&SynthOptions { duration_s: 6.0, ..SynthOptions::new(Profile::PickAndPlace, 1) });
        let model = crate::forecast::fit_var_ols(&trace, 2).unwrap();
        let cfg = RecoveryConfig::new(0.0, 2, 0.0).unwrap();
        (trace, RecoveryPolicy::foreco(Arc::new(model), cfg), RecoveryPolicy::repeat_last(cfg))
    }

    #[test]
    fn cell_indexing_covers_the_grid() {
        let g = SweepGrid { probs: vec![0.0, 0.5], durations: vec![1.0, 2.0, 4.0], robot_counts: vec![5, 25], ..Default::default() };
        let cells: Vec<_> = (0..g.cell_count()).map(|i| g.cell(i)).collect();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[0], (5, 0.0, 1.0));
        assert_eq!(cells[5], (5, 0.5, 4.0));
        assert_eq!(cells[11], (25, 0.5, 4.0));
    }

    #[test]
    fn shape_self_consistency_and_determinism() {
        let (trace, a, b) = small_setup();
        let grid = SweepGrid { probs: vec![0.0, 0.6], durations: vec![1.0, 16.0], robot_counts: vec![15], repetitions: 2, master_seed: 3 };
        let r1 = run_sweep(&trace, &grid, &ChannelConfig::default(), (&a, &b), Some(2)).unwrap();
        assert_eq!(r1.cells.len(), 4);
        assert_eq!(r1.policies, ["foreco".to_string(), "repeat_last".to_string()]);
        for c in &r1.cells {
            for p in 0..2 {
                assert_eq!(c.rmse[p].len(), 2);
                assert_eq!(c.mean[p], c.rmse[p].iter().sum::<f64>() / 2.0);
                assert!(c.mean[p] >= 0.0);
            }
        }
        let r2 = run_sweep(&trace, &grid, &ChannelConfig::default(), (&a, &b), Some(1)).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn lossless_column_is_zero() {
        let (trace, a, b) = small_setup();
        let grid = SweepGrid { probs: vec![0.0], durations: vec![4.0], robot_counts: vec![1], repetitions: 3, master_seed: 0 };
        let r = run_sweep(&trace, &grid, &ChannelConfig::default(), (&a, &b), None).unwrap();
        assert_eq!(r.cells[0].mean, [0.0, 0.0]);
    }

    #[test]
    fn matrix_layout() {
        let (trace, a, b) = small_setup();
        let grid = SweepGrid { probs: vec![0.0, 0.5], durations: vec![1.0, 8.0], robot_counts: vec![5], repetitions: 1, master_seed: 0 };
        let r = run_sweep(&trace, &grid, &ChannelConfig::default(), (&a, &b), None).unwrap();
        let csv = r.matrix_csv(1, 5);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "prob,1,8");
        assert!(lines[1].starts_with("0,") && lines[2].starts_with("0.5,"));
        assert_eq!(r.matrix_gnuplot(0, 5).lines().count(), 2);
    }

    #[test]
    fn seeds_differ_across_tasks() {
        let mut seen = std::collections::HashSet::new();
        for c in 0..50 {
            for r in 0..40 {
                assert!(seen.insert(task_seed(7, c, r)));
            }
        }
        assert_ne!(task_seed(7, 0, 0), task_seed(8, 0, 0));
    }

    #[test]
    fn empty_axes_are_rejected() {
        let (trace, a, b) = small_setup();
        let grid = SweepGrid { probs: vec![], ..Default::default() };
        assert!(run_sweep(&trace, &grid, &ChannelConfig::default(), (&a, &b), None).is_err());
    }
}
