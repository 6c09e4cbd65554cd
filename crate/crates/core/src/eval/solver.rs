use std::collections::{HashMap, VecDeque};

use crate::geom::{Direction, Pos};
use crate::layout::{solve_from, Cell, RoomKind, SolveState};
use crate::room::{is_jumpable, puzzle_witness, PuzzleMove, TileType};
use crate::sim::{Action, Environment, Termination};

/// Below this many ticks left, reachable orbs are worth a detour.
pub const ORB_SLACK: u32 = 600;
/// Extra steps an orb detour may cost.
pub const ORB_DETOUR: usize = 8;
/// Decisions simulated ahead in rooms with enemies or platforms.
pub const LOOKAHEAD: u32 = 4;

/// Non-learning oracle with full access to the simulator state. It follows
/// the room-level plan, walks shortest tile paths with jumps, replays push
/// witnesses in puzzle rooms and looks a few decisions ahead on a copy of the
/// environment to dodge enemies and vanishing platforms.
#[derive(Clone, Debug, Default)]
pub struct ScriptedSolver {
    /// Witness being replayed: floor, room, and the moves still to make.
    puzzle: Option<(u32, Cell, VecDeque<PuzzleMove>)>,
    /// Moves replayed from a witness, in order, for inspection.
    pub puzzle_log: Vec<(u32, Cell, PuzzleMove)>,
    /// Steps on which no room plan could be found.
    pub plan_failures: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Move {
    dir: Direction,
    jump: bool,
}

impl ScriptedSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn choose(&mut self, env: &Environment) -> Action {
        let st = env.state();
        let room = env.room();
        let rs = env.room_state();

        let mut stuck_puzzle = false;
        if room.kind == RoomKind::Puzzle && !rs.solved {
            match self.puzzle_step(env) {
                Some(a) => return a,
                None => stuck_puzzle = true,
            }
        }

        let goal = match self.goal(env) {
            _ if stuck_puzzle => room.entry.map(|d| room.door_pos(d)),
            g => g,
        };
        let goal = match goal {
            Some(g) => g,
            None => {
                self.plan_failures += 1;
                return Action::NOOP;
            }
        };
        if st.pos == goal {
            if let TileType::DoorAnchor(d) = rs.tile(goal) {
                return Action::toward(d, st.heading, false);
            }
        }
        let dist = distances(env, goal);
        let mut goal_dist = dist.get(&st.pos).copied();

        // Orb detour when time runs short.
        let mut target_dist = dist;
        if st.time_remaining < ORB_SLACK {
            let from_here = distances(env, st.pos);
            let best_orb = rs_positions(env)
                .filter(|p| rs.tile(*p) == TileType::TimeOrb)
                .filter_map(|p| from_here.get(&p).map(|d| (*d, p)))
                .min();
            if let Some((d, orb)) = best_orb {
                if goal_dist.is_none_or(|g| d <= g + ORB_DETOUR) {
                    target_dist = distances(env, orb);
                    goal_dist = target_dist.get(&st.pos).copied();
                }
            }
        }

        let mut options: Vec<(usize, Move)> = moves_from(env, st.pos)
            .into_iter()
            .filter_map(|(m, p)| target_dist.get(&p).map(|d| (*d, m)))
            .collect();
        options.sort_by_key(|(d, m)| (*d, m.jump, m.dir));
        let heading = st.heading;
        let mut candidates: Vec<Action> = options
            .iter()
            .filter(|(d, _)| goal_dist.is_none_or(|g| *d < g))
            .map(|(_, m)| Action::toward(m.dir, heading, m.jump))
            .collect();
        let rest: Vec<Action> = options
            .iter()
            .filter(|(d, _)| goal_dist.is_some_and(|g| *d >= g))
            .map(|(_, m)| Action::toward(m.dir, heading, m.jump))
            .collect();
        candidates.push(Action::NOOP);
        candidates.extend(rest);

        if !needs_lookahead(env) {
            return candidates[0];
        }
        let mut best = (0, candidates[0]);
        for a in &candidates {
            let s = survival(env, *a, LOOKAHEAD);
            if s == LOOKAHEAD {
                return *a;
            }
            if s > best.0 {
                best = (s, *a);
            }
        }
        best.1
    }

    /// Tile to head for in the current room.
    fn goal(&self, env: &Environment) -> Option<Pos> {
        let st = env.state();
        let room = env.room();
        let rs = env.room_state();
        if room.kind == RoomKind::Key {
            if let Some(p) = rs_positions(env).find(|p| rs.tile(*p) == TileType::KeyItem) {
                return Some(p);
            }
        }
        if room.kind == RoomKind::Exit {
            return room.find(TileType::Stairs).first().copied();
        }
        let opened = st
            .opened
            .iter()
            .enumerate()
            .filter(|(_, o)| **o)
            .map(|(i, _)| i)
            .collect();
        let plan = solve_from(
            &env.plan().layout,
            &SolveState {
                at: Some(st.room),
                keys_taken: st.keys_taken.clone(),
                opened,
                keys_held: st.keys_held,
            },
        )?;
        let next = plan.steps.first()?.to;
        let d = st.room.direction_to(next)?;
        Some(room.door_pos(d))
    }

    fn puzzle_step(&mut self, env: &Environment) -> Option<Action> {
        let st = env.state();
        let room = env.room();
        let rs = env.room_state();
        let here = (st.floor_index, st.room);
        let fresh = !matches!(&self.puzzle, Some((f, c, _)) if (*f, *c) == here);
        if fresh {
            let block = rs.block?;
            match puzzle_witness(room, st.pos, block) {
                Some(w) => self.puzzle = Some((here.0, here.1, w.into())),
                None => {
                    // Dead end: leave and come back for a reset block.
                    self.puzzle = None;
                    return None;
                }
            }
        }
        let (_, _, moves) = self.puzzle.as_mut()?;
        let m = moves.pop_front()?;
        if moves.is_empty() {
            self.puzzle = None;
        }
        self.puzzle_log.push((here.0, here.1, m));
        Some(Action::toward(m.direction(), st.heading, false))
    }
}

fn rs_positions(env: &Environment) -> impl Iterator<Item = Pos> {
    let side = env.room_state().side;
    (0..side).flat_map(move |y| (0..side).map(move |x| Pos::new(x, y)))
}

fn needs_lookahead(env: &Environment) -> bool {
    let rs = env.room_state();
    !rs.enemies.is_empty() || rs.tiles.contains(&TileType::PlatformTrack)
}

/// Decisions, up to `depth`, the agent survives after taking `a` and then
/// continuing as well as it can.
fn survival(env: &Environment, a: Action, depth: u32) -> u32 {
    let mut e = env.clone();
    match e.advance(a) {
        Ok(t) if matches!(t.info.termination, Some(Termination::Hazard { .. })) => 0,
        Ok(t) if t.done => depth,
        Ok(_) if depth <= 1 => 1,
        Ok(_) => {
            let heading = e.state().heading;
            let mut best = 0;
            for b in std::iter::once(Action::NOOP)
                .chain(Direction::ALL.into_iter().map(|d| Action::toward(d, heading, false)))
            {
                best = best.max(survival(&e, b, depth - 1));
                if best == depth - 1 {
                    break;
                }
            }
            1 + best
        }
        Err(_) => 0,
    }
}

/// Tiles the agent may stand on between decisions, for planning.
fn standable(env: &Environment, p: Pos) -> bool {
    let rs = env.room_state();
    rs.is_interior(p)
        && !matches!(rs.tile(p), TileType::Wall | TileType::Pit | TileType::PlatformTrack)
        && rs.block != Some(p)
}

/// Moves available from `p` inside the current room, with where they end.
/// Doors are only entered as the final move onto their anchor.
fn moves_from(env: &Environment, p: Pos) -> Vec<(Move, Pos)> {
    let rs = env.room_state();
    let mut out = Vec::new();
    for dir in Direction::ALL {
        let one = p.step(dir);
        if standable(env, one) || matches!(rs.tile(one), TileType::DoorAnchor(d) if d == dir) {
            out.push((Move { dir, jump: false }, one));
        }
        let two = p.step_n(dir, 2);
        if rs.in_bounds(one)
            && is_jumpable(rs.tile(one))
            && rs.block != Some(one)
            && standable(env, two)
        {
            out.push((Move { dir, jump: true }, two));
        }
    }
    out
}

/// Decisions needed from each position to reach `goal`, by reverse search.
fn distances(env: &Environment, goal: Pos) -> HashMap<Pos, usize> {
    let rs = env.room_state();
    let all: Vec<Pos> = rs_positions(env)
        .filter(|p| standable(env, *p) || matches!(rs.tile(*p), TileType::DoorAnchor(_)))
        .collect();
    // Reverse edges: q reaches p.
    let mut rev: HashMap<Pos, Vec<Pos>> = HashMap::new();
    for q in &all {
        for (_, p) in moves_from(env, *q) {
            rev.entry(p).or_default().push(*q);
        }
    }
    let mut dist = HashMap::from([(goal, 0usize)]);
    let mut queue = VecDeque::from([goal]);
    while let Some(p) = queue.pop_front() {
        // Stepping onto a door leaves the room, so doors end paths.
        if p != goal && matches!(rs.tile(p), TileType::DoorAnchor(_)) {
            continue;
        }
        let d = dist[&p];
        for q in rev.get(&p).into_iter().flatten() {
            if !dist.contains_key(q) {
                dist.insert(*q, d + 1);
                queue.push_back(*q);
            }
        }
    }
    dist
}
