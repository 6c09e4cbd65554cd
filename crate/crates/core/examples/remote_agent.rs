//! Hosts a policy in a separate listener and evaluates it through the wire
//! protocol, as an external agent process would be.

use towerforge::eval::{run_protocol, Protocol, RandomAgent, RemoteAgent, RunOptions};
use towerforge::service::{serve_agent, Listener};
use towerforge::sim::EpisodeConfig;

fn main() {
    let host = serve_agent(Listener::bind("127.0.0.1:0").unwrap(), || Box::new(RandomAgent::new(5))).unwrap();
    let mut agent = RemoteAgent::new(host.addr().to_string());
    let options = RunOptions {
        workers: 4,
        train_steps_per_seed: 20,
    };
    let report = run_protocol(&mut agent, &Protocol::weak(3), &EpisodeConfig::default(), options).unwrap();
    println!("{}: floors {:?}", report.fingerprint.agent, report.floor_counts());
    println!("mean {:.2} std {:.2} max {}", report.test.mean, report.test.std, report.test.max);
}
