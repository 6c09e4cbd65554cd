use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Environment;
use crate::floor::Theme;
use crate::geom::Pos;
use crate::room::TileType;

/// Cells per side of the egocentric window.
pub const VIEW_CELLS: i32 = 21;
/// Code of the agent's own cell, outside every palette.
pub const AGENT_CODE: u8 = 255;

/// What a cell shows, before theming.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum TileCode {
    Floor = 0,
    Wall = 1,
    Pit = 2,
    Spawn = 3,
    Stairs = 4,
    KeyItem = 5,
    DoorOpen = 6,
    DoorLocked = 7,
    Block = 8,
    BlockGoal = 9,
    TimeOrb = 10,
    Enemy = 11,
    PlatformPresent = 12,
    TrackVoid = 13,
    DoorGated = 14,
}

impl TileCode {
    pub const ALL: [TileCode; 15] = [
        TileCode::Floor,
        TileCode::Wall,
        TileCode::Pit,
        TileCode::Spawn,
        TileCode::Stairs,
        TileCode::KeyItem,
        TileCode::DoorOpen,
        TileCode::DoorLocked,
        TileCode::Block,
        TileCode::BlockGoal,
        TileCode::TimeOrb,
        TileCode::Enemy,
        TileCode::PlatformPresent,
        TileCode::TrackVoid,
        TileCode::DoorGated,
    ];

    /// Character used by the text view.
    pub fn glyph(self) -> char {
        match self {
            TileCode::Floor => '.',
            TileCode::Wall => '#',
            TileCode::Pit => '_',
            TileCode::Spawn => 'S',
            TileCode::Stairs => 'X',
            TileCode::KeyItem => 'K',
            TileCode::DoorOpen => '+',
            TileCode::DoorLocked => 'L',
            TileCode::Block => 'B',
            TileCode::BlockGoal => 'G',
            TileCode::TimeOrb => 'o',
            TileCode::Enemy => 'E',
            TileCode::PlatformPresent => '=',
            TileCode::TrackVoid => ' ',
            TileCode::DoorGated => '|',
        }
    }
}

/// Static tiles to codes. Doors and tracks depend on state; these give
/// their resting look.
pub fn base_code(t: TileType) -> TileCode {
    match t {
        TileType::Floor | TileType::EnemySpawn => TileCode::Floor,
        TileType::Wall => TileCode::Wall,
        TileType::Pit => TileCode::Pit,
        TileType::Spawn => TileCode::Spawn,
        TileType::Stairs => TileCode::Stairs,
        TileType::KeyItem => TileCode::KeyItem,
        TileType::DoorAnchor(_) => TileCode::DoorOpen,
        TileType::Block => TileCode::Block,
        TileType::BlockGoal => TileCode::BlockGoal,
        TileType::TimeOrb => TileCode::TimeOrb,
        TileType::PlatformTrack => TileCode::PlatformPresent,
    }
}

/// Theme permutes the sixteen base codes; lighting shifts by a multiple of
/// sixteen.
pub fn palette_code(code: TileCode, theme: Theme, lighting_bucket: u8) -> u8 {
    let c = code as u32;
    let t = theme.index() as u32;
    ((5 * c + 3 * t + 7) % 16) as u8 + 16 * lighting_bucket.min(7)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Raster side in pixels.
    pub side: u32,
    /// Row-major palette codes, `side * side` bytes.
    #[serde(serialize_with = "ser_b64", deserialize_with = "de_b64")]
    pub raster: Vec<u8>,
    pub keys_held: u32,
    pub time_remaining: u32,
    /// `time_remaining / starting_time`, clamped to `[0, 1]`.
    pub time_fraction: f64,
}

impl Observation {
    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.raster[(y * self.side + x) as usize]
    }

    /// The two auxiliary numbers: keys held and ticks left.
    pub fn aux(&self) -> [u32; 2] {
        [self.keys_held, self.time_remaining]
    }
}

fn ser_b64<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&STANDARD.encode(v))
}

fn de_b64<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
    let s = String::deserialize(d)?;
    STANDARD.decode(s).map_err(serde::de::Error::custom)
}

/// Unthemed codes of the 21×21 window, heading up, agent in the middle.
pub fn view_codes(env: &Environment) -> Vec<u8> {
    let st = env.state();
    let rs = env.room_state();
    let half = VIEW_CELLS / 2;
    let turns = st.heading.index();
    let mut out = Vec::with_capacity((VIEW_CELLS * VIEW_CELLS) as usize);
    for vy in 0..VIEW_CELLS {
        for vx in 0..VIEW_CELLS {
            let (mut dx, mut dy) = (vx - half, vy - half);
            for _ in 0..turns {
                (dx, dy) = (-dy, dx);
            }
            if dx == 0 && dy == 0 {
                out.push(AGENT_CODE);
                continue;
            }
            let p = Pos::new(st.pos.x + dx, st.pos.y + dy);
            let code = if !rs.in_bounds(p) {
                TileCode::Wall
            } else if rs.enemy_at(p) {
                TileCode::Enemy
            } else if rs.block == Some(p) {
                TileCode::Block
            } else {
                match rs.tile(p) {
                    TileType::DoorAnchor(d) => {
                        if env.door_state(d).is_some_and(|(_, locked)| locked) {
                            TileCode::DoorLocked
                        } else if env.gated(d) {
                            TileCode::DoorGated
                        } else {
                            TileCode::DoorOpen
                        }
                    }
                    TileType::PlatformTrack if !rs.platform_present(st.ticks) => TileCode::TrackVoid,
                    t => base_code(t),
                }
            };
            out.push(code as u8);
        }
    }
    out
}

/// The egocentric window as text, one row per line, `@` for the agent.
pub fn ascii_view(env: &Environment) -> String {
    let codes = view_codes(env);
    let mut out = String::with_capacity(codes.len() + VIEW_CELLS as usize);
    for row in codes.chunks(VIEW_CELLS as usize) {
        for c in row {
            out.push(match TileCode::ALL.get(*c as usize) {
                Some(t) => t.glyph(),
                None => '@',
            });
        }
        out.push('\n');
    }
    out
}

pub fn render_observation(env: &Environment) -> Observation {
    let cfg = env.config();
    let plan = env.plan();
    let st = env.state();
    let side = cfg.raster_size;
    let scale = side / VIEW_CELLS as u32;
    let bucket = plan.lighting.bucket();
    let mut lut = [0u8; 256];
    for c in TileCode::ALL {
        lut[c as usize] = palette_code(c, plan.theme, bucket);
    }
    lut[AGENT_CODE as usize] = AGENT_CODE;

    let codes = view_codes(env);
    let mut raster = vec![0u8; (side * side) as usize];
    let mut row = vec![0u8; side as usize];
    for cy in 0..VIEW_CELLS as u32 {
        for cx in 0..VIEW_CELLS as u32 {
            let v = lut[codes[(cy * VIEW_CELLS as u32 + cx) as usize] as usize];
            row[(cx * scale) as usize..((cx + 1) * scale) as usize].fill(v);
        }
        for k in 0..scale {
            let y = cy * scale + k;
            raster[(y * side) as usize..((y + 1) * side) as usize].copy_from_slice(&row);
        }
    }
    Observation {
        side,
        raster,
        keys_held: st.keys_held,
        time_remaining: st.time_remaining,
        time_fraction: (st.time_remaining as f64 / cfg.starting_time as f64).clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Action, Camera, EpisodeConfig, Jump, MoveFb, MoveLr};

    #[test]
    fn agent_code_at_centre() {
        for size in [84, 168] {
            let env = Environment::new(EpisodeConfig {
                raster_size: size,
                ..EpisodeConfig::with_seeds(5, 0)
            })
            .unwrap();
            let obs = env.observe();
            assert_eq!(obs.raster.len(), (size * size) as usize);
            assert_eq!(obs.pixel(size / 2, size / 2), AGENT_CODE);
        }
    }

    #[test]
    fn themes_never_share_a_code() {
        for a in Theme::ALL {
            for b in Theme::ALL {
                if a == b {
                    continue;
                }
                for c in TileCode::ALL {
                    assert_ne!(palette_code(c, a, 3), palette_code(c, b, 3));
                }
            }
        }
    }

    #[test]
    fn palette_is_injective_per_theme() {
        for t in Theme::ALL {
            let mut seen = std::collections::HashSet::new();
            for c in TileCode::ALL {
                assert!(seen.insert(palette_code(c, t, 0)));
            }
        }
    }

    #[test]
    fn four_turns_restore_the_view() {
        let mut env = Environment::new(EpisodeConfig::with_seeds(11, 0)).unwrap();
        let start = view_codes(&env);
        let turn = Action::new(MoveFb::NoOp, MoveLr::NoOp, Camera::Clockwise, Jump::NoOp);
        let mut views = Vec::new();
        for _ in 0..4 {
            env.step(turn).unwrap();
            views.push(view_codes(&env));
        }
        assert_ne!(views[0], start);
        assert_eq!(views[3], start);
    }

    #[test]
    fn ascii_view_shape() {
        let env = Environment::new(EpisodeConfig::with_seeds(2, 0)).unwrap();
        let text = ascii_view(&env);
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), VIEW_CELLS as usize);
        assert!(rows.iter().all(|r| r.chars().count() == VIEW_CELLS as usize));
        assert_eq!(rows[10].chars().nth(10), Some('@'));
        assert_eq!(text.matches('@').count(), 1);
    }

    #[test]
    fn base64_round_trip() {
        let env = Environment::new(EpisodeConfig::default()).unwrap();
        let obs = env.observe();
        let json = serde_json::to_string(&obs).unwrap();
        let back: Observation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, obs);
    }
}
