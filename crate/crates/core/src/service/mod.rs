//! Session service: wire format, session table, TCP/WebSocket server and
//! a blocking client.

mod agent;
mod client;
mod server;
mod session;
mod wire;

use std::num::ParseIntError;

pub use agent::{agent_handler, serve_agent, RemotePolicy};
pub use client::{Client, ClientError};
pub use server::{accept_channel, serve_channel, Channel, FramedTcp, Listener, Server, ServerHandle, WsChannel};
pub use session::{info, SessionManager, DEFAULT_CAPACITY};
pub use wire::{
    read_frame, write_frame, ActionSpec, ErrorCode, Request, RequestBody, Response, ResponseBody, SessionId,
    SessionInfo, MAX_FRAME, PROTOCOL_VERSION,
};

pub const DEFAULT_PORT: u16 = 7341;
/// Overrides `--port` when set.
pub const PORT_ENV: &str = "TOWERFORGE_PORT";

/// Port to listen on: the environment variable if set, else `flag`.
pub fn resolve_port(flag: u16) -> Result<u16, ParseIntError> {
    match std::env::var(PORT_ENV) {
        Ok(v) => v.trim().parse(),
        Err(_) => Ok(flag),
    }
}
