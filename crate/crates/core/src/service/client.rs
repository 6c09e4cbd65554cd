use std::io;
use std::net::ToSocketAddrs;

use thiserror::Error;

use super::server::{Channel, FramedTcp};
use super::wire::{ActionSpec, ErrorCode, Request, RequestBody, Response, ResponseBody, SessionId, SessionInfo};
use crate::sim::{EpisodeConfig, Observation, StepResult};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("server closed the connection")]
    Closed,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("{code}: {message}")]
    Remote { code: ErrorCode, message: String },
    #[error("unexpected response to request {id}: {body}")]
    Unexpected { id: u64, body: String },
}

impl ClientError {
    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            ClientError::Remote { code, .. } => Some(*code),
            _ => None,
        }
    }
}

/// Blocking client, one request in flight at a time.
pub struct Client {
    channel: Box<dyn Channel>,
    next_id: u64,
    /// Raw text of the last response, for byte-level comparisons.
    pub last_raw: String,
}

impl Client {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self::over(Box::new(FramedTcp::connect(addr)?)))
    }

    pub fn over(channel: Box<dyn Channel>) -> Self {
        Self {
            channel,
            next_id: 1,
            last_raw: String::new(),
        }
    }

    /// Sends `body` and returns the response body; error responses become
    /// [`ClientError::Remote`].
    pub fn request(&mut self, body: RequestBody) -> Result<ResponseBody, ClientError> {
        let id = self.next_id;
        self.next_id += 1;
        self.channel.send(&Request::new(id, body).to_json())?;
        let text = self.channel.recv()?.ok_or(ClientError::Closed)?;
        let resp: Response = serde_json::from_str(&text).map_err(|e| ClientError::Malformed(e.to_string()))?;
        self.last_raw = text;
        if resp.id != id {
            return Err(ClientError::Unexpected {
                id,
                body: format!("answer to {}", resp.id),
            });
        }
        match resp.body {
            ResponseBody::Error { code, message } => Err(ClientError::Remote { code, message }),
            b => Ok(b),
        }
    }

    fn unexpected(&self, body: ResponseBody) -> ClientError {
        ClientError::Unexpected {
            id: self.next_id - 1,
            body: format!("{body:?}"),
        }
    }

    pub fn create(&mut self, config: EpisodeConfig) -> Result<(SessionId, Observation), ClientError> {
        match self.request(RequestBody::Create { config })? {
            ResponseBody::Created { session, observation } => Ok((session, observation)),
            b => Err(self.unexpected(b)),
        }
    }

    pub fn reset(
        &mut self,
        session: SessionId,
        tower_seed: Option<u64>,
        dynamics_seed: Option<u64>,
    ) -> Result<Observation, ClientError> {
        match self.request(RequestBody::Reset {
            session,
            tower_seed,
            dynamics_seed,
        })? {
            ResponseBody::Observation { observation, .. } => Ok(observation),
            b => Err(self.unexpected(b)),
        }
    }

    pub fn step(&mut self, session: SessionId, action: impl Into<ActionSpec>) -> Result<StepResult, ClientError> {
        match self.request(RequestBody::Step {
            session,
            action: action.into(),
        })? {
            ResponseBody::StepResult { result, .. } => Ok(result),
            b => Err(self.unexpected(b)),
        }
    }

    pub fn render(&mut self, session: SessionId) -> Result<Observation, ClientError> {
        match self.request(RequestBody::Render { session })? {
            ResponseBody::Observation { observation, .. } => Ok(observation),
            b => Err(self.unexpected(b)),
        }
    }

    pub fn info(&mut self, session: SessionId) -> Result<SessionInfo, ClientError> {
        match self.request(RequestBody::Info { session })? {
            ResponseBody::Info { info, .. } => Ok(info),
            b => Err(self.unexpected(b)),
        }
    }

    pub fn close(&mut self, session: SessionId) -> Result<(), ClientError> {
        match self.request(RequestBody::Close { session })? {
            ResponseBody::Closed { .. } => Ok(()),
            b => Err(self.unexpected(b)),
        }
    }
}
