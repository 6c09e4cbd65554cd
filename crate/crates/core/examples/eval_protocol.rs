//! Weak and strong generalization runs for the two baseline agents.

use towerforge::eval::{run_protocol, Protocol, RandomAgent, RunOptions, ScriptedSolver};
use towerforge::sim::EpisodeConfig;

fn main() {
    let config = EpisodeConfig::default();
    let options = RunOptions {
        workers: 4,
        ..RunOptions::default()
    };
    for protocol in [Protocol::weak(0), Protocol::strong(0)] {
        let random = run_protocol(&mut RandomAgent::new(0), &protocol, &config, options).unwrap();
        let solver = run_protocol(&mut ScriptedSolver::new(), &protocol, &config, options).unwrap();
        println!(
            "{:?}: test seeds {:?}, themes {:?} -> {:?}",
            protocol.kind, protocol.test_seeds, protocol.train_themes, protocol.test_themes
        );
        for r in [&random, &solver] {
            println!(
                "  {:<10} mean {:.2} (std {:.2}) max {}  floors {:?}  audit violations {}",
                r.fingerprint.agent,
                r.test.mean,
                r.test.std,
                r.test.max,
                r.floor_counts(),
                r.audit_violations
            );
        }
    }
}
