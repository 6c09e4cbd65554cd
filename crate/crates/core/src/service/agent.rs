use std::io;

use super::server::{Listener, ServerHandle};
use super::wire::{ErrorCode, Request, RequestBody, Response, ResponseBody};
use crate::floor::Theme;
use crate::sim::{Action, EpisodeConfig, Observation};

/// A policy hosted outside the harness. It sees observations only.
pub trait RemotePolicy: Send {
    fn begin_training(&mut self, _train_seeds: &[u64], _themes: &[Theme]) {}
    fn begin_episode(&mut self, _config: &EpisodeConfig) {}
    fn act(&mut self, obs: &Observation, floor_index: u32) -> Action;
}

/// Message handler that answers the harness's agent requests with `policy`.
pub fn agent_handler(mut policy: Box<dyn RemotePolicy>) -> impl FnMut(&str) -> String + Send {
    move |text: &str| {
        let req = match Request::parse(text) {
            Ok(r) => r,
            Err(resp) => return resp.to_json(),
        };
        let body = match &req.body {
            RequestBody::BeginTraining { train_seeds, themes } => {
                policy.begin_training(train_seeds, themes);
                ResponseBody::Ack
            }
            RequestBody::BeginEpisode { config } => {
                policy.begin_episode(config);
                ResponseBody::Ack
            }
            RequestBody::Act {
                observation,
                floor_index,
            } => ResponseBody::Action {
                action: policy.act(observation, *floor_index).into(),
            },
            _ => ResponseBody::Error {
                code: ErrorCode::BadRequest,
                message: "an agent only answers begin_training, begin_episode and act".into(),
            },
        };
        Response::new(req.id, body).to_json()
    }
}

/// Hosts one fresh policy per connection in the background.
pub fn serve_agent(
    listener: Listener,
    make: impl Fn() -> Box<dyn RemotePolicy> + Send + Sync + 'static,
) -> io::Result<ServerHandle> {
    listener.spawn(move || agent_handler(make()))
}
