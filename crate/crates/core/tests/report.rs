use towerforge::eval::{run_protocol, EvalReport, Protocol, RandomAgent, RunOptions, Stats};
use towerforge::service::{Client, Server};
use towerforge::sim::EpisodeConfig;

#[test]
fn stats_recompute_by_hand() {
    let s = Stats::from_counts(&[3, 4, 3, 5, 4]);
    assert_eq!((s.episodes, s.max), (5, 5));
    assert!((s.mean - 3.8).abs() < 1e-12);
    // ((0.8² + 0.2² + 0.8² + 1.2² + 0.2²) / 5)^½ = 0.56^½
    assert!((s.std - 0.56f64.sqrt()).abs() < 1e-12);
    assert!((s.std - 0.748).abs() < 5e-4);
}

fn weak_report() -> EvalReport {
    let mut agent = RandomAgent::new(3);
    let options = RunOptions {
        workers: 2,
        train_steps_per_seed: 20,
    };
    run_protocol(&mut agent, &Protocol::weak(11), &EpisodeConfig::default(), options).unwrap()
}

#[test]
fn report_json_schema() {
    let report = weak_report();
    let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    for key in ["fingerprint", "train", "test", "episodes", "train_episodes", "audit", "audit_violations"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["episodes", "mean", "std", "max"] {
        assert!(v["test"].get(key).is_some(), "missing test.{key}");
    }
    let ep = &v["episodes"][0];
    for key in ["tower_seed", "dynamics_seed", "floors", "steps", "return", "termination"] {
        assert!(ep.get(key).is_some(), "missing episodes[0].{key}");
    }
    assert_eq!(v["fingerprint"]["protocol"]["kind"], "weak");
    let back: EvalReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, report);
}

#[test]
fn report_statistics_match_episodes() {
    let report = weak_report();
    let counts = report.floor_counts();
    assert_eq!(counts.len(), 25);
    let n = counts.len() as f64;
    let mean = counts.iter().map(|c| *c as f64).sum::<f64>() / n;
    let std = (counts.iter().map(|c| (*c as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!((report.test.mean - mean).abs() < 1e-12);
    assert!((report.test.std - std).abs() < 1e-12);
    assert_eq!(report.test.max, counts.iter().copied().max().unwrap());
    assert_eq!(report.train.episodes, 100);
}

#[test]
fn report_replays_against_the_service() {
    let report = weak_report();
    let h = Server::bind("127.0.0.1:0", 4).unwrap().spawn().unwrap();
    let mut client = Client::connect(h.addr()).unwrap();
    for ep in report.episodes.iter().take(5) {
        let config = EpisodeConfig::with_seeds(ep.tower_seed, ep.dynamics_seed);
        let (session, _) = client.create(config.clone()).unwrap();
        let mut agent = RandomAgent::new(3);
        towerforge::eval::AgentPolicy::begin_episode(&mut agent, &config);
        let mut steps = 0;
        let mut last = None;
        while steps < ep.steps {
            let r = client.step(session, agent.next_action()).unwrap();
            steps += 1;
            let done = r.done;
            last = Some(r);
            if done {
                break;
            }
        }
        let info = client.info(session).unwrap();
        assert_eq!(info.totals.floors, ep.floors);
        assert_eq!(steps, ep.steps);
        assert!(last.unwrap().done);
        client.close(session).unwrap();
    }
}
