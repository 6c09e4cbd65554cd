//! Evaluation protocols, baseline agents and the throughput benchmark.

mod remote;
mod solver;
mod throughput;

pub use remote::RemoteAgent;
pub use solver::{ScriptedSolver, LOOKAHEAD, ORB_DETOUR, ORB_SLACK};
pub use throughput::{format_table, measure_throughput, ThroughputRow, THROUGHPUT_FLOORS};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floor::Theme;
use crate::rng::{derive_seed, Stage, Stream};
use crate::sim::{Action, Environment, EpisodeConfig, Observation, SimError, Termination, ACTION_COUNT};

pub const TRAIN_SEEDS: usize = 100;
pub const TEST_SEEDS: usize = 5;
pub const DYNAMICS_SEEDS: usize = 5;
/// Hard cap on decisions per episode; the timer ends episodes long before.
pub const EPISODE_STEP_CAP: u64 = 1_000_000;

/// Something that picks actions. `env` is the running episode; agents that
/// only use `obs` are non-privileged.
pub trait AgentPolicy: Send {
    fn name(&self) -> String {
        "agent".into()
    }

    /// Called once before the train phase.
    fn begin_training(&mut self, _train_seeds: &[u64], _themes: &[Theme]) {}

    fn begin_episode(&mut self, _config: &EpisodeConfig) {}

    fn act(&mut self, obs: &Observation, env: &Environment) -> Action;

    /// Set once the agent can no longer act, e.g. a lost connection. The
    /// harness stops the run with [`EvalError::Remote`].
    fn fault(&self) -> Option<String> {
        None
    }

    /// Independent copy used for one test episode.
    fn fork(&self) -> Box<dyn AgentPolicy>;
}

/// Uniform over the 54 flat actions. Reseeds from the episode's seeds, so
/// each episode's action sequence depends only on `(seed, tower, dynamics)`.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    seed: u64,
    stream: Stream,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: Stream::from_seed(seed),
        }
    }

    pub fn next_action(&mut self) -> Action {
        Action::unflatten(self.stream.below(ACTION_COUNT as usize) as u32).expect("code in range")
    }
}

impl AgentPolicy for RandomAgent {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn begin_episode(&mut self, config: &EpisodeConfig) {
        self.stream = Stream::from_seed(derive_seed(&[
            self.seed,
            Stage::Agent as u64,
            config.tower_seed,
            config.dynamics_seed,
        ]));
    }

    fn act(&mut self, _obs: &Observation, _env: &Environment) -> Action {
        self.next_action()
    }

    fn fork(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}

impl AgentPolicy for ScriptedSolver {
    fn name(&self) -> String {
        "solver".into()
    }

    fn begin_episode(&mut self, _config: &EpisodeConfig) {
        *self = ScriptedSolver::new();
    }

    fn act(&mut self, _obs: &Observation, env: &Environment) -> Action {
        self.choose(env)
    }

    fn fork(&self) -> Box<dyn AgentPolicy> {
        Box::new(ScriptedSolver::new())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    NoGeneralization,
    Weak,
    Strong,
}

/// Which seeds and themes an evaluation trains and tests on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub train_seeds: Vec<u64>,
    pub test_seeds: Vec<u64>,
    pub dynamics_seeds: Vec<u64>,
    /// Empty means the episode config's own theme pool.
    pub train_themes: Vec<Theme>,
    pub test_themes: Vec<Theme>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("train and test seeds overlap: {0:?}")]
    SeedOverlap(Vec<u64>),
    #[error("train and test themes overlap: {0:?}")]
    ThemeOverlap(Vec<Theme>),
    #[error("protocol has no test seeds or no dynamics seeds")]
    Empty,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("remote agent: {0}")]
    Remote(String),
    #[error("worker pool: {0}")]
    Workers(String),
}

/// `i`-th value of derivation stream `lane` for `protocol_seed`.
pub fn protocol_seed(protocol_seed: u64, lane: u64, i: u64) -> u64 {
    derive_seed(&[protocol_seed, Stage::Protocol as u64, lane, i])
}

const LANE_TRAIN: u64 = 0;
const LANE_TEST: u64 = 1;
const LANE_DYNAMICS: u64 = 2;
const LANE_SINGLE: u64 = 3;

fn distinct(seed: u64, lane: u64, n: usize, avoid: &BTreeSet<u64>) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut seen = avoid.clone();
    let mut i = 0;
    while out.len() < n {
        let s = protocol_seed(seed, lane, i);
        if seen.insert(s) {
            out.push(s);
        }
        i += 1;
    }
    out
}

impl Protocol {
    /// Dynamics seeds are the first five values of the dynamics lane.
    pub fn dynamics_for(seed: u64) -> Vec<u64> {
        (0..DYNAMICS_SEEDS as u64).map(|i| protocol_seed(seed, LANE_DYNAMICS, i)).collect()
    }

    /// Train and test on one tower.
    pub fn no_generalization(seed: u64) -> Self {
        let tower = protocol_seed(seed, LANE_SINGLE, 0);
        Self {
            kind: ProtocolKind::NoGeneralization,
            train_seeds: vec![tower],
            test_seeds: vec![tower],
            dynamics_seeds: Self::dynamics_for(seed),
            train_themes: Vec::new(),
            test_themes: Vec::new(),
        }
    }

    /// 100 train towers, 5 held-out test towers.
    pub fn weak(seed: u64) -> Self {
        let train = distinct(seed, LANE_TRAIN, TRAIN_SEEDS, &BTreeSet::new());
        let test = distinct(seed, LANE_TEST, TEST_SEEDS, &train.iter().copied().collect());
        Self {
            kind: ProtocolKind::Weak,
            train_seeds: train,
            test_seeds: test,
            dynamics_seeds: Self::dynamics_for(seed),
            train_themes: Vec::new(),
            test_themes: Vec::new(),
        }
    }

    /// As weak, training on Ancient and Moorish and testing on Industrial.
    pub fn strong(seed: u64) -> Self {
        Self {
            kind: ProtocolKind::Strong,
            train_themes: vec![Theme::Ancient, Theme::Moorish],
            test_themes: vec![Theme::Industrial],
            ..Self::weak(seed)
        }
    }

    pub fn check(&self) -> Result<(), EvalError> {
        if self.test_seeds.is_empty() || self.dynamics_seeds.is_empty() {
            return Err(EvalError::Empty);
        }
        if self.kind != ProtocolKind::NoGeneralization {
            let train: BTreeSet<_> = self.train_seeds.iter().collect();
            let overlap: Vec<u64> = self.test_seeds.iter().filter(|s| train.contains(s)).copied().collect();
            if !overlap.is_empty() {
                return Err(EvalError::SeedOverlap(overlap));
            }
        }
        let overlap: Vec<Theme> = self
            .test_themes
            .iter()
            .filter(|t| self.train_themes.contains(t))
            .copied()
            .collect();
        if !overlap.is_empty() || (self.kind == ProtocolKind::Strong && (self.train_themes.is_empty() || self.test_themes.is_empty())) {
            return Err(EvalError::ThemeOverlap(overlap));
        }
        Ok(())
    }

    /// Number of test episodes.
    pub fn test_episodes(&self) -> usize {
        self.test_seeds.len() * self.dynamics_seeds.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Train,
    Test,
}

/// One floor instantiated during an evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub phase: Phase,
    pub tower_seed: u64,
    pub dynamics_seed: u64,
    pub floor: u32,
    pub theme: Theme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub tower_seed: u64,
    pub dynamics_seed: u64,
    pub floors: u32,
    pub steps: u64,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub termination: Option<Termination>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub episodes: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub max: u32,
}

impl Stats {
    pub fn from_counts(counts: &[u32]) -> Self {
        let n = counts.len();
        if n == 0 {
            return Self {
                episodes: 0,
                mean: 0.0,
                std: 0.0,
                max: 0,
            };
        }
        let mean = counts.iter().map(|c| *c as f64).sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (*c as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        Self {
            episodes: n,
            mean,
            std: var.sqrt(),
            max: counts.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Parallel test episodes.
    pub workers: usize,
    /// Decisions per train seed; zero skips the train episodes.
    pub train_steps_per_seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            train_steps_per_seed: 200,
        }
    }
}

/// Everything needed to rerun an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub agent: String,
    pub protocol: Protocol,
    pub config: EpisodeConfig,
    pub options: RunOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fingerprint: Fingerprint,
    pub train: Stats,
    pub test: Stats,
    /// Test episodes sorted by `(tower_seed, dynamics_seed)`.
    pub episodes: Vec<EpisodeRecord>,
    pub train_episodes: Vec<EpisodeRecord>,
    pub audit: Vec<AuditEntry>,
    pub audit_violations: usize,
}

impl EvalReport {
    pub fn floor_counts(&self) -> Vec<u32> {
        self.episodes.iter().map(|e| e.floors).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs one episode to termination (or `step_cap` decisions) and logs
/// every floor it instantiates.
pub fn run_episode(
    agent: &mut dyn AgentPolicy,
    config: &EpisodeConfig,
    step_cap: u64,
    phase: Phase,
    audit: &mut Vec<AuditEntry>,
) -> Result<EpisodeRecord, EvalError> {
    let mut env = Environment::new(config.clone())?;
    agent.begin_episode(config);
    let faulted = |agent: &dyn AgentPolicy| agent.fault().map_or(Ok(()), |f| Err(EvalError::Remote(f)));
    faulted(agent)?;
    let log = |env: &Environment, audit: &mut Vec<AuditEntry>| {
        audit.push(AuditEntry {
            phase,
            tower_seed: config.tower_seed,
            dynamics_seed: config.dynamics_seed,
            floor: env.plan().floor,
            theme: env.plan().theme,
        })
    };
    log(&env, audit);
    let mut obs = env.observe();
    let mut total = 0.0;
    let mut steps = 0;
    while !env.is_done() && steps < step_cap {
        let floor = env.state().floor_index;
        let a = agent.act(&obs, &env);
        faulted(agent)?;
        let r = env.step(a)?;
        total += r.reward;
        steps += 1;
        if !r.done && env.state().floor_index != floor {
            log(&env, audit);
        }
        obs = r.observation;
    }
    Ok(EpisodeRecord {
        tower_seed: config.tower_seed,
        dynamics_seed: config.dynamics_seed,
        floors: env.state().totals.floors,
        steps,
        episode_return: total,
        termination: env.state().termination,
    })
}

/// Runs the train phase with `agent`, then every test episode on a fork of
/// it, up to `options.workers` at a time.
pub fn run_protocol(
    agent: &mut dyn AgentPolicy,
    protocol: &Protocol,
    config: &EpisodeConfig,
    options: RunOptions,
) -> Result<EvalReport, EvalError> {
    protocol.check()?;
    config.validate()?;
    let pool_for = |themes: &[Theme]| if themes.is_empty() { config.theme_pool.clone() } else { themes.to_vec() };
    let train_pool = pool_for(&protocol.train_themes);
    let test_pool = pool_for(&protocol.test_themes);

    let mut audit = Vec::new();
    let mut train_episodes = Vec::new();
    agent.begin_training(&protocol.train_seeds, &train_pool);
    if let Some(f) = agent.fault() {
        return Err(EvalError::Remote(f));
    }
    if options.train_steps_per_seed > 0 {
        for (i, seed) in protocol.train_seeds.iter().enumerate() {
            let cfg = EpisodeConfig {
                tower_seed: *seed,
                dynamics_seed: protocol.dynamics_seeds[i % protocol.dynamics_seeds.len()],
                theme_pool: train_pool.clone(),
                ..config.clone()
            };
            train_episodes.push(run_episode(agent, &cfg, options.train_steps_per_seed, Phase::Train, &mut audit)?);
        }
    }

    let pairs: Vec<(u64, u64)> = protocol
        .test_seeds
        .iter()
        .flat_map(|t| protocol.dynamics_seeds.iter().map(move |d| (*t, *d)))
        .collect();
    let jobs: Vec<((u64, u64), Box<dyn AgentPolicy>)> =
        pairs.into_iter().map(|p| (p, agent.fork())).collect();
    let run = |((t, d), mut fork): ((u64, u64), Box<dyn AgentPolicy>)| -> Result<(EpisodeRecord, Vec<AuditEntry>), EvalError> {
        let cfg = EpisodeConfig {
            tower_seed: t,
            dynamics_seed: d,
            theme_pool: test_pool.clone(),
            ..config.clone()
        };
        let mut log = Vec::new();
        let rec = run_episode(fork.as_mut(), &cfg, EPISODE_STEP_CAP, Phase::Test, &mut log)?;
        Ok((rec, log))
    };
    let results: Vec<Result<_, EvalError>> = if options.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| EvalError::Workers(e.to_string()))?;
        pool.install(|| jobs.into_par_iter().map(run).collect())
    } else {
        jobs.into_iter().map(run).collect()
    };
    let mut episodes = Vec::new();
    for r in results {
        let (rec, log) = r?;
        episodes.push(rec);
        audit.extend(log);
    }
    episodes.sort_by_key(|e| (e.tower_seed, e.dynamics_seed));

    let audit_violations = audit
        .iter()
        .filter(|a| {
            let allowed = match a.phase {
                Phase::Train => &train_pool,
                Phase::Test => &test_pool,
            };
            !allowed.contains(&a.theme)
                || (a.phase == Phase::Train && protocol.test_themes.contains(&a.theme))
        })
        .count();
    let counts = |eps: &[EpisodeRecord]| eps.iter().map(|e| e.floors).collect::<Vec<_>>();
    Ok(EvalReport {
        fingerprint: Fingerprint {
            agent: agent.name(),
            protocol: protocol.clone(),
            config: config.clone(),
            options,
        },
        train: Stats::from_counts(&counts(&train_episodes)),
        test: Stats::from_counts(&counts(&episodes)),
        episodes,
        train_episodes,
        audit,
        audit_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_protocol_shape() {
        let p = Protocol::weak(1);
        assert_eq!(p.train_seeds.len(), 100);
        assert_eq!(p.test_seeds.len(), 5);
        assert_eq!(p.dynamics_seeds.len(), 5);
        assert_eq!(p.test_episodes(), 25);
        assert!(p.check().is_ok());
        assert_eq!(p.dynamics_seeds, Protocol::dynamics_for(1));
    }

    #[test]
    fn overlap_rejected() {
        let mut p = Protocol::weak(2);
        p.test_seeds[0] = p.train_seeds[17];
        assert_eq!(p.check(), Err(EvalError::SeedOverlap(vec![p.train_seeds[17]])));
        let mut s = Protocol::strong(2);
        s.test_themes.push(Theme::Moorish);
        assert_eq!(s.check(), Err(EvalError::ThemeOverlap(vec![Theme::Moorish])));
    }

    #[test]
    fn stats_match_hand_values() {
        let s = Stats::from_counts(&[3, 4, 3, 5, 4]);
        assert!((s.mean - 3.8).abs() < 1e-12);
        assert!((s.std - 0.7483314773547883).abs() < 1e-12);
        assert_eq!(s.max, 5);
    }
}
