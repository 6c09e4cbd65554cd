#![allow(dead_code)]

use std::net::SocketAddr;

use towerforge::rng::Stream;
use towerforge::service::{Client, Response, ResponseBody, SessionId};
use towerforge::sim::{Action, Environment, EpisodeConfig, ACTION_COUNT};

/// Steps a remote session and a local environment with the same scripted
/// actions and returns the index of the first step whose response text
/// differs from the locally serialized one.
pub fn echo_mismatch(addr: SocketAddr, config: EpisodeConfig, steps: usize, action_seed: u64) -> Option<usize> {
    let mut client = Client::connect(addr).expect("connect");
    let (session, obs) = client.create(config.clone()).expect("create");
    let mut local = Environment::new(config).expect("local env");
    if obs != local.observe() {
        return Some(0);
    }
    let r = echo_on(&mut client, session, &mut local, steps, action_seed);
    client.close(session).expect("close");
    r
}

pub fn echo_on(
    client: &mut Client,
    session: SessionId,
    local: &mut Environment,
    steps: usize,
    action_seed: u64,
) -> Option<usize> {
    let mut actions = Stream::from_seed(action_seed);
    for i in 0..steps {
        if local.is_done() {
            let remote = client.reset(session, None, None).expect("reset");
            if remote != local.reset().expect("local reset") {
                return Some(i);
            }
        }
        let code = actions.below(ACTION_COUNT as usize) as u32;
        let remote = if i % 2 == 0 {
            client.step(session, code)
        } else {
            client.step(session, Action::unflatten(code).unwrap().to_tuple())
        }
        .expect("step");
        let expected = local.step_flat(code).expect("local step");
        let id: u64 = serde_json::from_str::<serde_json::Value>(&client.last_raw).unwrap()["id"]
            .as_u64()
            .unwrap();
        let text = Response::new(id, ResponseBody::StepResult { session, result: expected.clone() }).to_json();
        if text != client.last_raw || remote != expected {
            return Some(i);
        }
    }
    None
}
