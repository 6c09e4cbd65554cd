//! Episode simulator over generated floors.
//!
//! One agent decision spans [`FRAME_SKIP`] ticks. Within a step the camera
//! turns on the first tick, a walk resolves on tick [`MOVE_TICK`] and a jump
//! is airborne from [`MOVE_TICK`] until it lands on [`LAND_TICK`]. Enemies
//! and platforms advance every tick; the timer drops by one per tick.

mod action;
mod observe;
mod trace;

pub use action::{Action, Camera, Jump, MoveFb, MoveLr, OutOfRange, ACTION_COUNT};
pub use observe::{
    ascii_view, base_code, palette_code, render_observation, view_codes, Observation, TileCode, AGENT_CODE,
    VIEW_CELLS,
};
pub use trace::{read_trace, write_trace};

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floor::{FloorPlan, Theme, TowerGenerator};
use crate::geom::{Direction, Pos};
use crate::layout::{Cell, DoorKind, RoomKind};
use crate::room::{is_jumpable, RoomInstance, TileType};
use crate::rng::{derive_seed, Stage, Stream};

pub const FRAME_SKIP: u32 = 5;
pub const MOVE_TICK: u32 = 2;
pub const LAND_TICK: u32 = 4;
/// Ticks between enemy moves.
pub const ENEMY_PERIOD: u64 = 10;
/// Ticks a platform stays present, then absent.
pub const PLATFORM_HALF_PERIOD: u64 = 10;
pub const MAX_FLOORS: u32 = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    #[default]
    Sparse,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub tower_seed: u64,
    pub dynamics_seed: u64,
    /// Episode ends successfully once this many floors are done.
    pub max_floor: u32,
    pub reward_mode: RewardMode,
    pub theme_pool: Vec<Theme>,
    pub starting_time: u32,
    pub orb_bonus: u32,
    pub floor_bonus: u32,
    /// Raster side, 84 or 168.
    pub raster_size: u32,
}

/// Timer defaults, in ticks. Set from a scripted-solver sweep so the slowest
/// full run still ends with about a fifth of the orb-free budget unused.
pub const DEFAULT_STARTING_TIME: u32 = 1200;
pub const DEFAULT_ORB_BONUS: u32 = 60;
pub const DEFAULT_FLOOR_BONUS: u32 = 200;

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            tower_seed: 0,
            dynamics_seed: 0,
            max_floor: 25,
            reward_mode: RewardMode::Sparse,
            theme_pool: Theme::ALL.to_vec(),
            starting_time: DEFAULT_STARTING_TIME,
            orb_bonus: DEFAULT_ORB_BONUS,
            floor_bonus: DEFAULT_FLOOR_BONUS,
            raster_size: 84,
        }
    }
}

impl EpisodeConfig {
    pub fn with_seeds(tower_seed: u64, dynamics_seed: u64) -> Self {
        Self {
            tower_seed,
            dynamics_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::BadConfig(m));
        if self.max_floor == 0 || self.max_floor > MAX_FLOORS {
            return bad(format!("max_floor must be in 1..={MAX_FLOORS}, got {}", self.max_floor));
        }
        if self.theme_pool.is_empty() {
            return bad("theme_pool is empty".into());
        }
        if self.starting_time == 0 {
            return bad("starting_time must be positive".into());
        }
        if self.raster_size != 84 && self.raster_size != 168 {
            return bad(format!("raster_size must be 84 or 168, got {}", self.raster_size));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("episode is done")]
    EpisodeDone,
    #[error("invalid action {0}")]
    InvalidAction(u32),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("generation failed: {0}")]
    GenerationFailed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    FloorCompleted { floor: u32 },
    KeyPicked,
    DoorOpened,
    PuzzleSolved,
    OrbCollected,
}

impl Event {
    /// Counts toward the dense +0.1 bonus.
    pub fn is_bonus(self) -> bool {
        matches!(self, Event::KeyPicked | Event::DoorOpened | Event::PuzzleSolved)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardKind {
    Pit,
    Platform,
    Enemy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum Termination {
    Hazard { hazard: HazardKind },
    Timeout,
    TopFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub floor_index: u32,
    pub events: Vec<Event>,
    pub termination: Option<Termination>,
    /// Ticks simulated this step; fewer than the frame skip only when the
    /// episode ended mid-step.
    pub ticks: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// What one step did, without the rendered observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Enemy {
    pub pos: Pos,
    pub dir: Direction,
    /// Chance of keeping the current direction when it is open.
    pub persistence: f64,
    pub phase: u64,
}

/// Mutable copy of one room.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoomState {
    pub side: i32,
    /// Picked items are gone; the block and enemy spawns read as floor.
    pub tiles: Vec<TileType>,
    pub block: Option<Pos>,
    pub block_origin: Option<Pos>,
    pub solved: bool,
    pub enemies: Vec<Enemy>,
    pub platform_phase: u64,
}

impl RoomState {
    fn new(room: &RoomInstance, rng: &mut Stream) -> Self {
        let mut tiles = room.tiles().to_vec();
        let mut enemies = Vec::new();
        let mut block = None;
        for p in room.positions() {
            let i = (p.y * room.side() + p.x) as usize;
            match tiles[i] {
                TileType::Block => {
                    block = Some(p);
                    tiles[i] = TileType::Floor;
                }
                TileType::EnemySpawn => {
                    tiles[i] = TileType::Floor;
                    enemies.push(Enemy {
                        pos: p,
                        dir: Direction::ALL[rng.below(4)],
                        persistence: 0.5 + 0.4 * rng.unit(),
                        phase: rng.below(ENEMY_PERIOD as usize) as u64,
                    });
                }
                _ => {}
            }
        }
        Self {
            side: room.side(),
            tiles,
            block,
            block_origin: block,
            solved: false,
            enemies,
            platform_phase: rng.below(2 * PLATFORM_HALF_PERIOD as usize) as u64,
        }
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.side && p.y < self.side
    }

    pub fn is_interior(&self, p: Pos) -> bool {
        p.x >= 1 && p.y >= 1 && p.x < self.side - 1 && p.y < self.side - 1
    }

    pub fn tile(&self, p: Pos) -> TileType {
        if self.in_bounds(p) {
            self.tiles[(p.y * self.side + p.x) as usize]
        } else {
            TileType::Wall
        }
    }

    fn set(&mut self, p: Pos, t: TileType) {
        self.tiles[(p.y * self.side + p.x) as usize] = t;
    }

    pub fn enemy_at(&self, p: Pos) -> bool {
        self.enemies.iter().any(|e| e.pos == p)
    }

    /// Whether the platform over a track tile is present at tick `ticks`.
    pub fn platform_present(&self, ticks: u64) -> bool {
        ((ticks + self.platform_phase) / PLATFORM_HALF_PERIOD).is_multiple_of(2)
    }

    fn enemy_can_enter(&self, p: Pos) -> bool {
        self.is_interior(p)
            && matches!(
                self.tile(p),
                TileType::Floor | TileType::Spawn | TileType::TimeOrb | TileType::KeyItem | TileType::BlockGoal
            )
            && Some(p) != self.block
            && !self.enemy_at(p)
    }
}

/// Running totals over the whole episode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeTotals {
    pub floors: u32,
    pub keys_picked: u32,
    pub doors_opened: u32,
    pub puzzles_solved: u32,
    pub orbs: u32,
    pub ticks: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeState {
    pub floor_index: u32,
    pub room: Cell,
    pub room_index: usize,
    pub pos: Pos,
    pub heading: Direction,
    pub keys_held: u32,
    pub time_remaining: u32,
    /// Ticks since reset.
    pub ticks: u64,
    pub done: bool,
    pub termination: Option<Termination>,
    /// Parallel to the plan's rooms.
    pub rooms: Vec<RoomState>,
    /// Parallel to the layout's doors; only locked doors ever flip.
    pub opened: Vec<bool>,
    /// Key rooms whose key has been picked up.
    pub keys_taken: Vec<Cell>,
    pub totals: EpisodeTotals,
    rng: Stream,
}

fn builtin_generator() -> Arc<TowerGenerator> {
    static GEN: OnceLock<Arc<TowerGenerator>> = OnceLock::new();
    GEN.get_or_init(|| Arc::new(TowerGenerator::builtin())).clone()
}

/// A running episode. Cloning gives an independent copy, dynamics RNG
/// included.
#[derive(Clone, Debug)]
pub struct Environment {
    config: EpisodeConfig,
    generator: Arc<TowerGenerator>,
    plan: Arc<FloorPlan>,
    state: EpisodeState,
}

impl Environment {
    /// Builds the environment and resets it.
    pub fn new(config: EpisodeConfig) -> Result<Self, SimError> {
        Self::with_generator(config, builtin_generator())
    }

    pub fn with_generator(config: EpisodeConfig, generator: Arc<TowerGenerator>) -> Result<Self, SimError> {
        Self::start(config, generator, 0)
    }

    fn start(config: EpisodeConfig, generator: Arc<TowerGenerator>, floor: u32) -> Result<Self, SimError> {
        config.validate()?;
        if floor >= config.max_floor {
            return Err(SimError::BadConfig(format!(
                "start floor {floor} is not below max_floor {}",
                config.max_floor
            )));
        }
        let rng = Stream::from_seed(derive_seed(&[config.dynamics_seed, Stage::Dynamics as u64]));
        let state = EpisodeState {
            floor_index: floor,
            room: Cell::new(0, 0),
            room_index: 0,
            pos: Pos::new(0, 0),
            heading: Direction::North,
            keys_held: 0,
            time_remaining: config.starting_time,
            ticks: 0,
            done: false,
            termination: None,
            rooms: Vec::new(),
            opened: Vec::new(),
            keys_taken: Vec::new(),
            totals: EpisodeTotals::default(),
            rng,
        };
        let plan = Self::generate(&generator, &config, floor)?;
        let mut env = Self {
            config,
            generator,
            plan,
            state,
        };
        env.enter_floor();
        Ok(env)
    }

    fn generate(generator: &TowerGenerator, config: &EpisodeConfig, floor: u32) -> Result<Arc<FloorPlan>, SimError> {
        generator
            .assemble_floor(floor, config.tower_seed, &config.theme_pool)
            .map(Arc::new)
            .map_err(|e| SimError::GenerationFailed(e.to_string()))
    }

    /// Fresh episode with the same config.
    pub fn reset(&mut self) -> Result<Observation, SimError> {
        self.reset_at_floor(0)
    }

    pub fn reset_with(&mut self, config: EpisodeConfig) -> Result<Observation, SimError> {
        *self = Self::start(config, self.generator.clone(), 0)?;
        Ok(self.observe())
    }

    /// Fresh episode starting directly on `floor`.
    pub fn reset_at_floor(&mut self, floor: u32) -> Result<Observation, SimError> {
        *self = Self::start(self.config.clone(), self.generator.clone(), floor)?;
        Ok(self.observe())
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn generator(&self) -> &Arc<TowerGenerator> {
        &self.generator
    }

    pub fn plan(&self) -> &FloorPlan {
        &self.plan
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.done
    }

    pub fn room(&self) -> &RoomInstance {
        &self.plan.rooms[self.state.room_index].room
    }

    pub fn room_state(&self) -> &RoomState {
        &self.state.rooms[self.state.room_index]
    }

    pub fn observe(&self) -> Observation {
        render_observation(self)
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, SimError> {
        let t = self.advance(action)?;
        Ok(StepResult {
            observation: self.observe(),
            reward: t.reward,
            done: t.done,
            info: t.info,
        })
    }

    pub fn step_flat(&mut self, code: u32) -> Result<StepResult, SimError> {
        if self.state.done {
            return Err(SimError::EpisodeDone);
        }
        let a = Action::unflatten(code).map_err(|e| SimError::InvalidAction(e.0))?;
        self.step(a)
    }

    /// Runs one decision without rendering.
    pub fn advance(&mut self, action: Action) -> Result<Transition, SimError> {
        if self.state.done {
            return Err(SimError::EpisodeDone);
        }
        let mut events = Vec::new();
        let mut floors = 0u32;
        let mut landing: Option<Pos> = None;
        let mut ticks = 0;
        for tick in 1..=FRAME_SKIP {
            ticks = tick;
            self.state.ticks += 1;
            self.state.totals.ticks += 1;
            self.state.time_remaining -= 1;
            let before = (self.state.room_index, self.state.pos);

            if tick == 1 {
                match action.camera {
                    Camera::Clockwise => self.state.heading = self.state.heading.cw(),
                    Camera::CounterClockwise => self.state.heading = self.state.heading.ccw(),
                    Camera::NoOp => {}
                }
            }
            if tick == MOVE_TICK {
                if let Some(d) = action.movement(self.state.heading) {
                    if action.jump == Jump::Jump {
                        landing = self.try_jump(d);
                    }
                    if landing.is_none() {
                        self.walk(d, &mut events, &mut floors)?;
                    }
                }
            }
            if tick == LAND_TICK {
                if let Some(p) = landing.take() {
                    self.state.pos = p;
                    self.arrive(&mut events, &mut floors)?;
                }
            }
            if self.state.done {
                break;
            }

            let swapped = self.update_enemies(before);
            if landing.is_none() {
                if let Some(h) = self.hazard(swapped) {
                    self.finish(Termination::Hazard { hazard: h });
                    break;
                }
            }
            if self.state.time_remaining == 0 {
                self.finish(Termination::Timeout);
                break;
            }
        }

        let bonus = events.iter().filter(|e| e.is_bonus()).count();
        let reward = match self.config.reward_mode {
            RewardMode::Sparse => floors as f64,
            RewardMode::Dense => floors as f64 + 0.1 * bonus as f64,
        };
        Ok(Transition {
            reward,
            done: self.state.done,
            info: StepInfo {
                floor_index: self.state.floor_index,
                events,
                termination: self.state.termination,
                ticks,
            },
        })
    }

    fn finish(&mut self, t: Termination) {
        self.state.done = true;
        self.state.termination = Some(t);
    }

    fn enter_floor(&mut self) {
        let plan = self.plan.clone();
        let s = &mut self.state;
        s.rooms = plan.rooms.iter().map(|r| RoomState::new(&r.room, &mut s.rng)).collect();
        s.opened = vec![false; plan.layout.doors.len()];
        s.keys_taken.clear();
        s.keys_held = 0;
        s.room = plan.layout.start;
        s.room_index = plan.room_index(plan.layout.start).expect("start room exists");
        let room = &plan.rooms[s.room_index].room;
        s.pos = room.find(TileType::Spawn).first().copied().unwrap_or_else(|| room.origin());
        s.heading = room.doors.first().copied().unwrap_or(Direction::North);
    }

    /// Starts a jump if it can land; returns the landing tile.
    fn try_jump(&mut self, d: Direction) -> Option<Pos> {
        let rs = self.room_state();
        let pos = self.state.pos;
        let mid = pos.step(d);
        let land = pos.step_n(d, 2);
        let ok = rs.in_bounds(mid)
            && is_jumpable(rs.tile(mid))
            && Some(mid) != rs.block
            && rs.is_interior(land)
            && rs.tile(land) != TileType::Wall
            && Some(land) != rs.block;
        if ok {
            self.state.pos = mid;
            Some(land)
        } else {
            None
        }
    }

    fn walk(&mut self, d: Direction, events: &mut Vec<Event>, floors: &mut u32) -> Result<(), SimError> {
        let pos = self.state.pos;
        let target = pos.step(d);
        let ri = self.state.room_index;
        let rs = &self.state.rooms[ri];
        let through = rs.tile(target) == TileType::DoorAnchor(d)
            || (!rs.in_bounds(target) && rs.tile(pos) == TileType::DoorAnchor(d));
        if through {
            self.pass_door(d, events);
            return Ok(());
        }
        if !rs.in_bounds(target) || rs.tile(target) == TileType::Wall {
            return Ok(());
        }
        if Some(target) == rs.block {
            let beyond = target.step(d);
            let free = rs.is_interior(beyond)
                && matches!(rs.tile(beyond), TileType::Floor | TileType::BlockGoal)
                && !rs.enemy_at(beyond);
            if rs.solved || !free {
                return Ok(());
            }
            let rs = &mut self.state.rooms[ri];
            rs.block = Some(beyond);
            self.state.pos = target;
            if rs.tile(beyond) == TileType::BlockGoal {
                rs.solved = true;
                self.state.totals.puzzles_solved += 1;
                events.push(Event::PuzzleSolved);
            }
            return Ok(());
        }
        if matches!(rs.tile(target), TileType::DoorAnchor(_)) {
            return Ok(());
        }
        self.state.pos = target;
        self.arrive(events, floors)
    }

    /// Whether the door on side `d` of the current room is closed to the
    /// agent because a puzzle is unsolved.
    pub fn gated(&self, d: Direction) -> bool {
        let here = self.room();
        let rs = self.room_state();
        if here.kind == RoomKind::Puzzle && !rs.solved && here.entry != Some(d) {
            return true;
        }
        let Some(next) = self.neighbor(d) else { return true };
        let ni = self.plan.room_index(next).expect("neighbor has a room");
        let there = &self.plan.rooms[ni].room;
        there.kind == RoomKind::Puzzle && !self.state.rooms[ni].solved && there.entry != Some(d.opposite())
    }

    fn neighbor(&self, d: Direction) -> Option<Cell> {
        let l = &self.plan.layout;
        self.state.room.step(d, l.width, l.height).filter(|c| l.door(self.state.room, *c).is_some())
    }

    /// Index into the layout's doors and whether that door is still locked.
    pub fn door_state(&self, d: Direction) -> Option<(usize, bool)> {
        let next = self.neighbor(d)?;
        let di = self.plan.layout.door_index(self.state.room, next)?;
        let locked = matches!(self.plan.layout.doors[di].kind, DoorKind::Locked { .. }) && !self.state.opened[di];
        Some((di, locked))
    }

    fn pass_door(&mut self, d: Direction, events: &mut Vec<Event>) {
        let Some((di, locked)) = self.door_state(d) else { return };
        if self.gated(d) {
            return;
        }
        if locked {
            if self.state.keys_held == 0 {
                return;
            }
            self.state.keys_held -= 1;
            self.state.opened[di] = true;
            self.state.totals.doors_opened += 1;
            events.push(Event::DoorOpened);
        }
        let next = self.neighbor(d).expect("door has a neighbor");
        let ni = self.plan.room_index(next).expect("neighbor has a room");
        self.state.room = next;
        self.state.room_index = ni;
        self.state.pos = self.plan.rooms[ni].room.door_pos(d.opposite());
        let rs = &mut self.state.rooms[ni];
        if !rs.solved {
            rs.block = rs.block_origin;
        }
    }

    fn arrive(&mut self, events: &mut Vec<Event>, floors: &mut u32) -> Result<(), SimError> {
        let pos = self.state.pos;
        let ri = self.state.room_index;
        match self.state.rooms[ri].tile(pos) {
            TileType::KeyItem => {
                self.state.rooms[ri].set(pos, TileType::Floor);
                self.state.keys_held += 1;
                self.state.keys_taken.push(self.state.room);
                self.state.totals.keys_picked += 1;
                events.push(Event::KeyPicked);
            }
            TileType::TimeOrb => {
                self.state.rooms[ri].set(pos, TileType::Floor);
                self.state.time_remaining += self.config.orb_bonus;
                self.state.totals.orbs += 1;
                events.push(Event::OrbCollected);
            }
            TileType::Stairs => {
                let floor = self.state.floor_index;
                events.push(Event::FloorCompleted { floor });
                *floors += 1;
                self.state.totals.floors += 1;
                self.state.time_remaining += self.config.floor_bonus;
                self.state.floor_index += 1;
                if self.state.floor_index >= self.config.max_floor {
                    self.finish(Termination::TopFloor);
                } else {
                    self.plan = Self::generate(&self.generator, &self.config, self.state.floor_index)?;
                    self.enter_floor();
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Moves the current room's enemies that are due this tick. Returns
    /// whether one of them swapped places with the agent.
    fn update_enemies(&mut self, before: (usize, Pos)) -> bool {
        let ticks = self.state.ticks;
        let agent = self.state.pos;
        let ri = self.state.room_index;
        let moved_from = (before.0 == ri && before.1 != agent).then_some(before.1);
        let s = &mut self.state;
        let rs = &mut s.rooms[ri];
        let mut swapped = false;
        for i in 0..rs.enemies.len() {
            let e = &rs.enemies[i];
            if !(ticks + e.phase).is_multiple_of(ENEMY_PERIOD) {
                continue;
            }
            let keep = s.rng.unit() < e.persistence;
            let (old, dir) = (e.pos, e.dir);
            let open: Vec<Direction> = Direction::ALL
                .into_iter()
                .filter(|d| rs.enemy_can_enter(old.step(*d)))
                .collect();
            let dir = if keep && open.contains(&dir) {
                Some(dir)
            } else if open.is_empty() {
                None
            } else {
                Some(*s.rng.pick(&open))
            };
            if let Some(d) = dir {
                let e = &mut rs.enemies[i];
                e.dir = d;
                e.pos = old.step(d);
                if old == agent && Some(e.pos) == moved_from {
                    swapped = true;
                }
            }
        }
        swapped
    }

    fn hazard(&self, swapped: bool) -> Option<HazardKind> {
        let rs = self.room_state();
        let pos = self.state.pos;
        if swapped || rs.enemy_at(pos) {
            return Some(HazardKind::Enemy);
        }
        match rs.tile(pos) {
            TileType::Pit => Some(HazardKind::Pit),
            TileType::PlatformTrack if !rs.platform_present(self.state.ticks) => Some(HazardKind::Platform),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_state() {
        let env = Environment::new(EpisodeConfig::with_seeds(3, 4)).unwrap();
        let obs = env.observe();
        assert_eq!(obs.keys_held, 0);
        assert_eq!(obs.time_remaining, DEFAULT_STARTING_TIME);
        assert_eq!(env.room().kind, RoomKind::Start);
        assert_eq!(env.room().tile(env.state().pos), TileType::Spawn);
    }

    #[test]
    fn noops_only_cost_time() {
        let mut env = Environment::new(EpisodeConfig::with_seeds(1, 1)).unwrap();
        for _ in 0..10 {
            let r = env.step(Action::NOOP).unwrap();
            assert_eq!(r.reward, 0.0);
            assert!(!r.done);
        }
        assert_eq!(env.state().time_remaining, DEFAULT_STARTING_TIME - 50);
    }

    #[test]
    fn done_is_absorbing() {
        let cfg = EpisodeConfig {
            starting_time: 7,
            ..EpisodeConfig::with_seeds(2, 2)
        };
        let mut env = Environment::new(cfg).unwrap();
        env.step(Action::NOOP).unwrap();
        let r = env.step(Action::NOOP).unwrap();
        assert!(r.done);
        assert_eq!(r.info.termination, Some(Termination::Timeout));
        assert_eq!(r.info.ticks, 2);
        let snapshot = env.state().clone();
        assert_eq!(env.step(Action::NOOP), Err(SimError::EpisodeDone));
        assert_eq!(env.step_flat(0), Err(SimError::EpisodeDone));
        assert_eq!(env.state(), &snapshot);
    }

    #[test]
    fn invalid_config_and_action() {
        let cfg = EpisodeConfig {
            max_floor: 101,
            ..Default::default()
        };
        assert!(matches!(Environment::new(cfg), Err(SimError::BadConfig(_))));
        let mut env = Environment::new(EpisodeConfig::default()).unwrap();
        assert_eq!(env.step_flat(54), Err(SimError::InvalidAction(54)));
    }

    #[test]
    fn dynamics_seed_leaves_plan_alone() {
        let a = Environment::new(EpisodeConfig::with_seeds(9, 1)).unwrap();
        let b = Environment::new(EpisodeConfig::with_seeds(9, 2)).unwrap();
        assert_eq!(a.plan().to_canonical_json(), b.plan().to_canonical_json());
    }
}
