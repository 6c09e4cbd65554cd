use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, Stage, Stream};
use crate::sim::{Action, Environment, EpisodeConfig, SimError, ACTION_COUNT};

pub const THROUGHPUT_FLOORS: [u32; 5] = [0, 5, 10, 15, 20];

/// One floor's timing over `n_seeds * n_steps` agent steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub floor: u32,
    pub steps_per_second: f64,
    /// Over every timed step.
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Smallest and largest per-seed mean.
    pub min_ms: f64,
    pub max_ms: f64,
    pub n_seeds: usize,
    pub n_steps: usize,
}

/// Drives random actions from a fresh start on each floor and times every
/// step, observation rendering included. Episode resets after a terminal
/// step are not timed.
pub fn measure_throughput(
    floors: &[u32],
    n_seeds: usize,
    n_steps: usize,
    base: &EpisodeConfig,
) -> Result<Vec<ThroughputRow>, SimError> {
    let mut rows = Vec::new();
    for &floor in floors {
        let mut all = Vec::with_capacity(n_seeds * n_steps);
        let mut seed_means = Vec::with_capacity(n_seeds);
        for s in 0..n_seeds as u64 {
            let cfg = EpisodeConfig {
                tower_seed: derive_seed(&[Stage::Bench as u64, s]),
                dynamics_seed: s,
                max_floor: base.max_floor.max(floor + 1),
                ..base.clone()
            };
            let mut env = Environment::new(cfg)?;
            env.reset_at_floor(floor)?;
            let mut actions = Stream::from_seed(derive_seed(&[Stage::Bench as u64, floor as u64, s]));
            let mut times = Vec::with_capacity(n_steps);
            for _ in 0..n_steps {
                let a = Action::unflatten(actions.below(ACTION_COUNT as usize) as u32).expect("in range");
                let t0 = Instant::now();
                let r = env.step(a)?;
                times.push(t0.elapsed().as_secs_f64() * 1e3);
                if r.done {
                    env.reset_at_floor(floor)?;
                }
            }
            seed_means.push(times.iter().sum::<f64>() / times.len().max(1) as f64);
            all.extend(times);
        }
        let n = all.len().max(1) as f64;
        let mean = all.iter().sum::<f64>() / n;
        let std = (all.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n).sqrt();
        rows.push(ThroughputRow {
            floor,
            steps_per_second: if mean > 0.0 { 1000.0 / mean } else { f64::INFINITY },
            mean_ms: mean,
            std_ms: std,
            min_ms: seed_means.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: seed_means.iter().copied().fold(0.0, f64::max),
            n_seeds,
            n_steps,
        });
    }
    Ok(rows)
}

/// Rows as a fixed-width table.
pub fn format_table(rows: &[ThroughputRow]) -> String {
    let mut out = String::from("floor  steps/s     mean ms   std ms    min ms    max ms\n");
    for r in rows {
        out.push_str(&format!(
            "{:<6} {:<11.1} {:<9.4} {:<9.4} {:<9.4} {:<9.4}\n",
            r.floor, r.steps_per_second, r.mean_ms, r.std_ms, r.min_ms, r.max_ms
        ));
    }
    out
}
