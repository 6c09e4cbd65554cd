use crate::floor::Theme;
use crate::service::{Client, RemotePolicy, RequestBody, ResponseBody};
use crate::sim::{Action, Environment, EpisodeConfig, Observation};

use super::{AgentPolicy, RandomAgent};

/// Policy living in another process, reached over the wire protocol. It is
/// sent observations only. Each fork opens its own connection.
pub struct RemoteAgent {
    addr: String,
    client: Option<Client>,
    fault: Option<String>,
}

impl RemoteAgent {
    pub fn new(addr: impl Into<String>) -> Self {
        Self {
            addr: addr.into(),
            client: None,
            fault: None,
        }
    }

    fn call(&mut self, body: RequestBody) -> Option<ResponseBody> {
        if self.fault.is_some() {
            return None;
        }
        if self.client.is_none() {
            match Client::connect(&self.addr) {
                Ok(c) => self.client = Some(c),
                Err(e) => {
                    self.fault = Some(format!("connect {}: {e}", self.addr));
                    return None;
                }
            }
        }
        let client = self.client.as_mut().expect("connected above");
        match client.request(body) {
            Ok(b) => Some(b),
            Err(e) => {
                self.fault = Some(e.to_string());
                None
            }
        }
    }
}

impl AgentPolicy for RemoteAgent {
    fn name(&self) -> String {
        format!("remote:{}", self.addr)
    }

    fn begin_training(&mut self, train_seeds: &[u64], themes: &[Theme]) {
        self.call(RequestBody::BeginTraining {
            train_seeds: train_seeds.to_vec(),
            themes: themes.to_vec(),
        });
    }

    fn begin_episode(&mut self, config: &EpisodeConfig) {
        self.call(RequestBody::BeginEpisode { config: config.clone() });
    }

    fn act(&mut self, obs: &Observation, env: &Environment) -> Action {
        let reply = self.call(RequestBody::Act {
            observation: obs.clone(),
            floor_index: env.state().floor_index,
        });
        match reply {
            Some(ResponseBody::Action { action }) => match action.resolve() {
                Ok(a) => a,
                Err(e) => {
                    self.fault = Some(format!("agent sent {e}"));
                    Action::NOOP
                }
            },
            Some(other) => {
                self.fault = Some(format!("expected an action, got {other:?}"));
                Action::NOOP
            }
            None => Action::NOOP,
        }
    }

    fn fault(&self) -> Option<String> {
        self.fault.clone()
    }

    fn fork(&self) -> Box<dyn AgentPolicy> {
        Box::new(RemoteAgent::new(self.addr.clone()))
    }
}

impl RemotePolicy for RandomAgent {
    fn begin_episode(&mut self, config: &EpisodeConfig) {
        AgentPolicy::begin_episode(self, config);
    }

    fn act(&mut self, _obs: &Observation, _floor_index: u32) -> Action {
        self.next_action()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{run_protocol, EvalError, Protocol, RunOptions};
    use crate::service::{serve_agent, Listener};

    #[test]
    fn remote_random_matches_local() {
        let host = serve_agent(Listener::bind("127.0.0.1:0").unwrap(), || Box::new(RandomAgent::new(3))).unwrap();
        let protocol = Protocol::weak(1);
        let config = EpisodeConfig::default();
        let options = RunOptions {
            workers: 2,
            train_steps_per_seed: 0,
        };
        let mut remote = RemoteAgent::new(host.addr().to_string());
        let r = run_protocol(&mut remote, &protocol, &config, options).unwrap();
        let l = run_protocol(&mut RandomAgent::new(3), &protocol, &config, options).unwrap();
        assert_eq!(r.episodes, l.episodes);
        assert_eq!(r.fingerprint.agent, format!("remote:{}", host.addr()));
    }

    #[test]
    fn unreachable_agent_is_an_error() {
        let addr = {
            let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap()
        };
        let mut remote = RemoteAgent::new(addr.to_string());
        let options = RunOptions {
            workers: 1,
            train_steps_per_seed: 0,
        };
        let e = run_protocol(&mut remote, &Protocol::weak(1), &EpisodeConfig::default(), options).unwrap_err();
        assert!(matches!(e, EvalError::Remote(_)), "{e:?}");
    }
}
