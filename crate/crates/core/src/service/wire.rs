use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::floor::Theme;
use crate::sim::{Action, EpisodeConfig, EpisodeTotals, Observation, OutOfRange, StepResult, Termination};

pub const PROTOCOL_VERSION: u32 = 1;
/// Largest accepted frame body, in bytes.
pub const MAX_FRAME: u32 = 16 << 20;

/// Opaque 128-bit session token, written as 32 lowercase hex digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId(pub u128);

impl SessionId {
    pub fn random() -> Self {
        Self(rand::random())
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl FromStr for SessionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 {
            return Err(format!("session id must be 32 hex digits, got {s:?}"));
        }
        u128::from_str_radix(s, 16).map(SessionId).map_err(|e| e.to_string())
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// An action on the wire: a flat code or the four sub-action digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpec {
    Flat(u32),
    Tuple([u32; 4]),
}

impl ActionSpec {
    pub fn resolve(self) -> Result<Action, OutOfRange> {
        match self {
            ActionSpec::Flat(c) => Action::unflatten(c),
            ActionSpec::Tuple(t) => Action::from_tuple(t),
        }
    }

    /// Flat code for error messages; tuples out of range report as-is.
    fn code(self) -> u32 {
        match self {
            ActionSpec::Flat(c) => c,
            ActionSpec::Tuple(t) => Action::from_tuple(t).map(Action::flatten).unwrap_or(u32::MAX),
        }
    }
}

impl From<u32> for ActionSpec {
    fn from(code: u32) -> Self {
        ActionSpec::Flat(code)
    }
}

impl From<[u32; 4]> for ActionSpec {
    fn from(t: [u32; 4]) -> Self {
        ActionSpec::Tuple(t)
    }
}

impl From<Action> for ActionSpec {
    fn from(a: Action) -> Self {
        ActionSpec::Flat(a.flatten())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub version: u32,
    pub id: u64,
    #[serde(flatten)]
    pub body: RequestBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RequestBody {
    Create {
        #[serde(default)]
        config: EpisodeConfig,
    },
    /// Restarts the episode, optionally on other seeds.
    Reset {
        session: SessionId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tower_seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dynamics_seed: Option<u64>,
    },
    Step {
        session: SessionId,
        action: ActionSpec,
    },
    Render {
        session: SessionId,
    },
    Info {
        session: SessionId,
    },
    Close {
        session: SessionId,
    },
    /// Sent by the evaluation harness to a remote agent.
    BeginTraining {
        train_seeds: Vec<u64>,
        themes: Vec<Theme>,
    },
    BeginEpisode {
        config: EpisodeConfig,
    },
    Act {
        observation: Observation,
        floor_index: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub version: u32,
    /// Id of the request answered; zero when it could not be read.
    pub id: u64,
    #[serde(flatten)]
    pub body: ResponseBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResponseBody {
    Created {
        session: SessionId,
        observation: Observation,
    },
    Observation {
        session: SessionId,
        observation: Observation,
    },
    StepResult {
        session: SessionId,
        result: StepResult,
    },
    Info {
        session: SessionId,
        info: SessionInfo,
    },
    Closed {
        session: SessionId,
    },
    Ack,
    Action {
        action: ActionSpec,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

/// Snapshot returned by `info`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub config: EpisodeConfig,
    pub floor_index: u32,
    pub keys_held: u32,
    pub time_remaining: u32,
    pub ticks: u64,
    pub done: bool,
    pub termination: Option<Termination>,
    pub totals: EpisodeTotals,
    pub theme: Theme,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    CapacityExceeded,
    BadConfig,
    UnknownSession,
    EpisodeDone,
    InvalidAction,
    Busy,
    BadRequest,
    UnsupportedVersion,
    GenerationFailed,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 9] = [
        ErrorCode::CapacityExceeded,
        ErrorCode::BadConfig,
        ErrorCode::UnknownSession,
        ErrorCode::EpisodeDone,
        ErrorCode::InvalidAction,
        ErrorCode::Busy,
        ErrorCode::BadRequest,
        ErrorCode::UnsupportedVersion,
        ErrorCode::GenerationFailed,
    ];
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or("?"))
    }
}

impl Response {
    pub fn new(id: u64, body: ResponseBody) -> Self {
        Self {
            version: PROTOCOL_VERSION,
            id,
            body,
        }
    }

    pub fn error(id: u64, code: ErrorCode, message: impl Into<String>) -> Self {
        Self::new(
            id,
            ResponseBody::Error {
                code,
                message: message.into(),
            },
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }
}

impl Request {
    pub fn new(id: u64, body: RequestBody) -> Self {
        Self {
            version: PROTOCOL_VERSION,
            id,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    /// Parses one message, checking the version before the body so an
    /// unknown version is reported as such rather than as a bad body.
    #[allow(clippy::result_large_err)]
    pub fn parse(text: &str) -> Result<Request, Response> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Response::error(0, ErrorCode::BadRequest, e.to_string()))?;
        let id = value.get("id").and_then(Value::as_u64).unwrap_or(0);
        match value.get("version").map(Value::as_u64) {
            None => return Err(Response::error(id, ErrorCode::BadRequest, "missing version")),
            Some(Some(v)) if v == PROTOCOL_VERSION as u64 => {}
            Some(v) => {
                return Err(Response::error(
                    id,
                    ErrorCode::UnsupportedVersion,
                    format!("version {v:?} is not supported; use {PROTOCOL_VERSION}"),
                ))
            }
        }
        serde_json::from_value(value).map_err(|e| Response::error(id, ErrorCode::BadRequest, e.to_string()))
    }
}

pub(crate) fn invalid_action(a: ActionSpec) -> String {
    match a {
        ActionSpec::Flat(_) => OutOfRange(a.code()).to_string(),
        ActionSpec::Tuple(t) => format!("action tuple {t:?} is out of range"),
    }
}

/// Writes one frame: a 4-byte big-endian length, then the UTF-8 body.
pub fn write_frame(w: &mut impl Write, body: &str) -> io::Result<()> {
    let len = u32::try_from(body.len())
        .ok()
        .filter(|n| *n <= MAX_FRAME)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(body.as_bytes())?;
    w.flush()
}

/// Reads one frame. `Ok(None)` on a clean end of stream between frames.
pub fn read_frame(r: &mut impl Read) -> io::Result<Option<String>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds {MAX_FRAME}"),
        ));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    String::from_utf8(body)
        .map(Some)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_id_is_32_hex() {
        let id = SessionId(0xabc);
        let s = id.to_string();
        assert_eq!(s.len(), 32);
        assert_eq!(s.parse::<SessionId>().unwrap(), id);
        assert!("abc".parse::<SessionId>().is_err());
    }

    #[test]
    fn envelope_shape() {
        let r = Request::new(
            9,
            RequestBody::Step {
                session: SessionId(1),
                action: ActionSpec::Flat(3),
            },
        );
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["id"], 9);
        assert_eq!(v["type"], "step");
        assert_eq!(v["action"], 3);
        assert_eq!(Request::parse(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn tuple_actions_parse() {
        let text = r#"{"version":1,"id":2,"type":"step","session":"00000000000000000000000000000001","action":[1,0,0,1]}"#;
        match Request::parse(text).unwrap().body {
            RequestBody::Step { action, .. } => {
                assert_eq!(action, ActionSpec::Tuple([1, 0, 0, 1]));
                assert_eq!(action.resolve().unwrap().to_tuple(), [1, 0, 0, 1]);
            }
            b => panic!("{b:?}"),
        }
    }

    #[test]
    fn version_is_mandatory() {
        let e = Request::parse(r#"{"id":4,"type":"create"}"#).unwrap_err();
        assert!(matches!(e.body, ResponseBody::Error { code: ErrorCode::BadRequest, .. }));
        assert_eq!(e.id, 4);
        let e = Request::parse(r#"{"version":2,"id":5,"type":"create"}"#).unwrap_err();
        assert!(matches!(e.body, ResponseBody::Error { code: ErrorCode::UnsupportedVersion, .. }));
        let e = Request::parse("not json").unwrap_err();
        assert!(matches!(e.body, ResponseBody::Error { code: ErrorCode::BadRequest, .. }));
    }

    #[test]
    fn create_config_defaults() {
        let r = Request::parse(r#"{"version":1,"id":1,"type":"create"}"#).unwrap();
        assert_eq!(r.body, RequestBody::Create { config: EpisodeConfig::default() });
    }

    #[test]
    fn frames_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, "{}").unwrap();
        write_frame(&mut buf, "[1]").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 2]);
        let mut r = buf.as_slice();
        assert_eq!(read_frame(&mut r).unwrap().as_deref(), Some("{}"));
        assert_eq!(read_frame(&mut r).unwrap().as_deref(), Some("[1]"));
        assert_eq!(read_frame(&mut r).unwrap(), None);
    }

    #[test]
    fn oversized_frames_rejected() {
        let mut r: &[u8] = &(MAX_FRAME + 1).to_be_bytes();
        assert_eq!(read_frame(&mut r).unwrap_err().kind(), io::ErrorKind::InvalidData);
    }

    #[test]
    fn error_codes_are_snake_case() {
        assert_eq!(ErrorCode::CapacityExceeded.to_string(), "capacity_exceeded");
        assert_eq!(ErrorCode::ALL.len(), 9);
    }
}
