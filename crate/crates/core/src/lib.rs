//! Seeded procedural towers of rooms with a tick-based simulator to play
//! them.
//!
//! A floor is built in stages, each fed by its own RNG stream:
//! [`grammar`] grows a mission graph, [`layout`] embeds it on a room grid,
//! [`room`] fills each cell from a template, and [`floor`] ties them into a
//! [`floor::FloorPlan`]. [`sim::Environment`] runs episodes over those plans,
//! [`eval`] runs agents under train/test protocols and [`service`] exposes
//! environments over TCP and WebSocket.
//!
//! ```
//! use towerforge::sim::{Action, Environment, EpisodeConfig};
//!
//! let mut env = Environment::new(EpisodeConfig::with_seeds(7, 0)).unwrap();
//! let r = env.step(Action::NOOP).unwrap();
//! assert_eq!(r.observation.raster.len(), 84 * 84);
//! ```

pub mod cli;
pub mod eval;
pub mod floor;
pub mod geom;
pub mod grammar;
pub mod layout;
pub mod rng;
pub mod room;
pub mod service;
pub mod sim;
