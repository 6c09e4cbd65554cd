use std::collections::HashMap;
use std::sync::{Arc, Mutex, TryLockError};

use super::wire::{invalid_action, ErrorCode, Request, RequestBody, Response, ResponseBody, SessionId, SessionInfo};
use crate::sim::{Environment, SimError};

/// Live sessions allowed at once by default.
pub const DEFAULT_CAPACITY: usize = 50;

fn sim_code(e: &SimError) -> ErrorCode {
    match e {
        SimError::EpisodeDone => ErrorCode::EpisodeDone,
        SimError::InvalidAction(_) => ErrorCode::InvalidAction,
        SimError::BadConfig(_) => ErrorCode::BadConfig,
        SimError::GenerationFailed(_) => ErrorCode::GenerationFailed,
    }
}

/// Owns every live environment. Shared by all connections; each session
/// serves one request at a time and a concurrent one gets `Busy`.
#[derive(Debug)]
pub struct SessionManager {
    capacity: usize,
    sessions: Mutex<HashMap<SessionId, Arc<Mutex<Environment>>>>,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl SessionManager {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("session table").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parses, dispatches and serializes one message.
    pub fn handle_text(&self, text: &str) -> String {
        let resp = match Request::parse(text) {
            Ok(req) => self.handle(&req),
            Err(resp) => resp,
        };
        resp.to_json()
    }

    pub fn handle(&self, req: &Request) -> Response {
        let id = req.id;
        let body = match self.dispatch(&req.body) {
            Ok(b) => b,
            Err((code, message)) => ResponseBody::Error { code, message },
        };
        Response::new(id, body)
    }

    fn dispatch(&self, body: &RequestBody) -> Result<ResponseBody, (ErrorCode, String)> {
        let sim = |e: SimError| (sim_code(&e), e.to_string());
        match body {
            RequestBody::Create { config } => {
                config.validate().map_err(sim)?;
                if self.len() >= self.capacity {
                    return Err((
                        ErrorCode::CapacityExceeded,
                        format!("{} sessions already open", self.capacity),
                    ));
                }
                let env = Environment::new(config.clone()).map_err(sim)?;
                let observation = env.observe();
                let mut table = self.sessions.lock().expect("session table");
                if table.len() >= self.capacity {
                    return Err((
                        ErrorCode::CapacityExceeded,
                        format!("{} sessions already open", self.capacity),
                    ));
                }
                let mut session = SessionId::random();
                while table.contains_key(&session) {
                    session = SessionId::random();
                }
                table.insert(session, Arc::new(Mutex::new(env)));
                Ok(ResponseBody::Created { session, observation })
            }
            RequestBody::Reset {
                session,
                tower_seed,
                dynamics_seed,
            } => self.with(*session, |env| {
                let mut config = env.config().clone();
                config.tower_seed = tower_seed.unwrap_or(config.tower_seed);
                config.dynamics_seed = dynamics_seed.unwrap_or(config.dynamics_seed);
                let observation = env.reset_with(config).map_err(sim)?;
                Ok(ResponseBody::Observation {
                    session: *session,
                    observation,
                })
            }),
            RequestBody::Step { session, action } => self.with(*session, |env| {
                let a = action
                    .resolve()
                    .map_err(|_| (ErrorCode::InvalidAction, invalid_action(*action)))?;
                let result = env.step(a).map_err(sim)?;
                Ok(ResponseBody::StepResult {
                    session: *session,
                    result,
                })
            }),
            RequestBody::Render { session } => self.with(*session, |env| {
                Ok(ResponseBody::Observation {
                    session: *session,
                    observation: env.observe(),
                })
            }),
            RequestBody::Info { session } => self.with(*session, |env| {
                Ok(ResponseBody::Info {
                    session: *session,
                    info: info(env),
                })
            }),
            RequestBody::Close { session } => {
                let removed = self.sessions.lock().expect("session table").remove(session);
                match removed {
                    Some(_) => Ok(ResponseBody::Closed { session: *session }),
                    None => Err(unknown(*session)),
                }
            }
            RequestBody::BeginTraining { .. } | RequestBody::BeginEpisode { .. } | RequestBody::Act { .. } => {
                Err((ErrorCode::BadRequest, "agent messages are not served here".into()))
            }
        }
    }

    fn with<T>(
        &self,
        session: SessionId,
        f: impl FnOnce(&mut Environment) -> Result<T, (ErrorCode, String)>,
    ) -> Result<T, (ErrorCode, String)> {
        let env = self
            .sessions
            .lock()
            .expect("session table")
            .get(&session)
            .cloned()
            .ok_or_else(|| unknown(session))?;
        let mut guard = match env.try_lock() {
            Ok(g) => g,
            Err(TryLockError::WouldBlock) => {
                return Err((ErrorCode::Busy, format!("session {session} has a request in flight")))
            }
            Err(TryLockError::Poisoned(p)) => p.into_inner(),
        };
        f(&mut guard)
    }
}

fn unknown(session: SessionId) -> (ErrorCode, String) {
    (ErrorCode::UnknownSession, format!("no session {session}"))
}

pub fn info(env: &Environment) -> SessionInfo {
    let st = env.state();
    SessionInfo {
        config: env.config().clone(),
        floor_index: st.floor_index,
        keys_held: st.keys_held,
        time_remaining: st.time_remaining,
        ticks: st.ticks,
        done: st.done,
        termination: st.termination,
        totals: st.totals,
        theme: env.plan().theme,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::service::wire::ActionSpec;
    use crate::sim::EpisodeConfig;

    fn create(m: &SessionManager, config: EpisodeConfig) -> Response {
        m.handle(&Request::new(1, RequestBody::Create { config }))
    }

    fn session(r: &Response) -> SessionId {
        match &r.body {
            ResponseBody::Created { session, .. } => *session,
            b => panic!("{b:?}"),
        }
    }

    fn code(r: &Response) -> Option<ErrorCode> {
        match &r.body {
            ResponseBody::Error { code, .. } => Some(*code),
            _ => None,
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let m = SessionManager::new(3);
        for _ in 0..3 {
            assert_eq!(code(&create(&m, EpisodeConfig::default())), None);
        }
        assert_eq!(code(&create(&m, EpisodeConfig::default())), Some(ErrorCode::CapacityExceeded));
    }

    #[test]
    fn bad_config_rejected() {
        let m = SessionManager::new(3);
        let r = create(
            &m,
            EpisodeConfig {
                max_floor: 101,
                ..Default::default()
            },
        );
        assert_eq!(code(&r), Some(ErrorCode::BadConfig));
        assert!(m.is_empty());
    }

    #[test]
    fn step_errors() {
        let m = SessionManager::new(3);
        let s = session(&create(&m, EpisodeConfig::default()));
        let step = |a| m.handle(&Request::new(2, RequestBody::Step { session: s, action: a }));
        assert_eq!(code(&step(ActionSpec::Flat(54))), Some(ErrorCode::InvalidAction));
        assert_eq!(code(&step(ActionSpec::Tuple([3, 0, 0, 0]))), Some(ErrorCode::InvalidAction));
        assert_eq!(code(&step(ActionSpec::Flat(0))), None);
        let other = m.handle(&Request::new(3, RequestBody::Info { session: SessionId(7) }));
        assert_eq!(code(&other), Some(ErrorCode::UnknownSession));
    }

    #[test]
    fn busy_when_locked() {
        let m = SessionManager::new(3);
        let s = session(&create(&m, EpisodeConfig::default()));
        let env = m.sessions.lock().unwrap()[&s].clone();
        let _held = env.lock().unwrap();
        let r = m.handle(&Request::new(2, RequestBody::Render { session: s }));
        assert_eq!(code(&r), Some(ErrorCode::Busy));
    }

    #[test]
    fn close_frees_capacity() {
        let m = SessionManager::new(1);
        let s = session(&create(&m, EpisodeConfig::default()));
        let r = m.handle(&Request::new(2, RequestBody::Close { session: s }));
        assert_eq!(r.body, ResponseBody::Closed { session: s });
        assert_eq!(code(&create(&m, EpisodeConfig::default())), None);
        let again = m.handle(&Request::new(3, RequestBody::Close { session: s }));
        assert_eq!(code(&again), Some(ErrorCode::UnknownSession));
    }

    #[test]
    fn done_sessions_stay_queryable() {
        let m = SessionManager::new(1);
        let s = session(&create(
            &m,
            EpisodeConfig {
                starting_time: 5,
                ..Default::default()
            },
        ));
        let step = || m.handle(&Request::new(2, RequestBody::Step { session: s, action: ActionSpec::Flat(0) }));
        match step().body {
            ResponseBody::StepResult { result, .. } => assert!(result.done),
            b => panic!("{b:?}"),
        }
        assert_eq!(code(&step()), Some(ErrorCode::EpisodeDone));
        match m.handle(&Request::new(3, RequestBody::Info { session: s })).body {
            ResponseBody::Info { info, .. } => assert!(info.done),
            b => panic!("{b:?}"),
        }
    }
}
