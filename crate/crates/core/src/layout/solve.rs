use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Cell, DoorKind, LayoutGrid, RoomKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub from: Cell,
    pub to: Cell,
    /// A locked door was opened (and a key spent) on this move.
    pub unlocked: bool,
    /// The room entered holds a key not yet taken.
    pub picked_key: bool,
}

/// Room-to-room route from the start room to the exit room.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn transitions(&self) -> usize {
        self.steps.len()
    }

    /// Rooms in visiting order, starting room included.
    pub fn rooms(&self) -> Vec<Cell> {
        let mut out: Vec<Cell> = self.steps.first().map(|s| s.from).into_iter().collect();
        out.extend(self.steps.iter().map(|s| s.to));
        out
    }
}

/// Where a search starts from: a room plus key and door bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveState {
    pub at: Option<Cell>,
    /// Key rooms whose key has already been taken.
    pub keys_taken: Vec<Cell>,
    /// Indices into `layout.doors` of locked doors already opened.
    pub opened: Vec<usize>,
    pub keys_held: u32,
}

/// Shortest plan (by room transitions) from the start room to the exit.
/// Keys are interchangeable; each locked door consumes one the first time
/// it is passed and then stays open.
pub fn solve_floor(layout: &LayoutGrid) -> Option<Plan> {
    solve_from(layout, &SolveState::default())
}

pub fn solve_from(layout: &LayoutGrid, state: &SolveState) -> Option<Plan> {
    let key_cells: Vec<Cell> = layout
        .occupied()
        .filter(|(_, s)| s.kind == RoomKind::Key)
        .map(|(c, _)| c)
        .collect();
    let locks: Vec<usize> = layout
        .doors
        .iter()
        .enumerate()
        .filter(|(_, d)| matches!(d.kind, DoorKind::Locked { .. }))
        .map(|(i, _)| i)
        .collect();
    if key_cells.len() > 31 || locks.len() > 31 {
        return None;
    }
    let key_bit = |c: Cell| key_cells.iter().position(|k| *k == c).map(|i| 1u32 << i);
    let lock_bit = |d: usize| locks.iter().position(|l| *l == d).map(|i| 1u32 << i);

    let at = state.at.unwrap_or(layout.start);
    let mut taken0 = state
        .keys_taken
        .iter()
        .filter_map(|c| key_bit(*c))
        .fold(0, |a, b| a | b);
    let opened0 = state
        .opened
        .iter()
        .filter_map(|d| lock_bit(*d))
        .fold(0, |a, b| a | b);
    let mut held0 = state.keys_held as i64;
    if let Some(b) = key_bit(at) {
        if taken0 & b == 0 {
            taken0 |= b;
            held0 += 1;
        }
    }
    let held = |taken: u32, opened: u32| -> i64 {
        held0 + (taken.count_ones() - taken0.count_ones()) as i64
            - (opened.count_ones() - opened0.count_ones()) as i64
    };

    type State = (Cell, u32, u32);
    let initial: State = (at, taken0, opened0);
    let mut prev: HashMap<State, (State, PlanStep)> = HashMap::new();
    let mut queue = VecDeque::from([initial]);
    prev.insert(initial, (initial, dummy_step(at)));
    while let Some(s @ (cell, taken, opened)) = queue.pop_front() {
        if cell == layout.exit {
            let mut steps = Vec::new();
            let mut cur = s;
            while cur != initial {
                let (p, step) = prev[&cur];
                steps.push(step);
                cur = p;
            }
            steps.reverse();
            return Some(Plan { steps });
        }
        for (next, di) in layout.door_neighbors(cell) {
            let mut opened2 = opened;
            let mut unlocked = false;
            if let Some(b) = lock_bit(di) {
                if opened & b == 0 {
                    if held(taken, opened) < 1 {
                        continue;
                    }
                    opened2 |= b;
                    unlocked = true;
                }
            }
            let mut taken2 = taken;
            let mut picked = false;
            if let Some(b) = key_bit(next) {
                if taken & b == 0 {
                    taken2 |= b;
                    picked = true;
                }
            }
            let ns = (next, taken2, opened2);
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(ns) {
                e.insert((
                    s,
                    PlanStep {
                        from: cell,
                        to: next,
                        unlocked,
                        picked_key: picked,
                    },
                ));
                queue.push_back(ns);
            }
        }
    }
    None
}

fn dummy_step(c: Cell) -> PlanStep {
    PlanStep {
        from: c,
        to: c,
        unlocked: false,
        picked_key: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Door, RoomSlot, SlotOwner};

    fn slot(id: u32, kind: RoomKind, level: u32) -> Option<RoomSlot> {
        Some(RoomSlot {
            owner: SlotOwner::Node { id },
            kind,
            access_level: level,
            entry: None,
        })
    }

    #[test]
    fn two_room_floor_is_one_step() {
        let l = LayoutGrid {
            width: 2,
            height: 1,
            cells: vec![slot(0, RoomKind::Start, 0), slot(1, RoomKind::Exit, 0)],
            doors: vec![Door {
                a: Cell::new(0, 0),
                b: Cell::new(1, 0),
                kind: DoorKind::Open,
            }],
            start: Cell::new(0, 0),
            exit: Cell::new(1, 0),
        };
        let plan = solve_floor(&l).unwrap();
        assert_eq!(plan.transitions(), 1);
        assert_eq!(plan.rooms(), vec![Cell::new(0, 0), Cell::new(1, 0)]);
    }

    /// Start | Lock | Key, Exit below Lock: the only key sits behind the
    /// only locked door.
    #[test]
    fn key_behind_its_lock_is_unsolvable() {
        let l = LayoutGrid {
            width: 3,
            height: 2,
            cells: vec![
                slot(0, RoomKind::Start, 0),
                slot(1, RoomKind::Lock, 1),
                slot(2, RoomKind::Key, 1),
                None,
                slot(3, RoomKind::Exit, 1),
                None,
            ],
            doors: vec![
                Door {
                    a: Cell::new(0, 0),
                    b: Cell::new(1, 0),
                    kind: DoorKind::Locked { level: 1 },
                },
                Door {
                    a: Cell::new(1, 0),
                    b: Cell::new(2, 0),
                    kind: DoorKind::Open,
                },
                Door {
                    a: Cell::new(1, 0),
                    b: Cell::new(1, 1),
                    kind: DoorKind::Open,
                },
            ],
            start: Cell::new(0, 0),
            exit: Cell::new(1, 1),
        };
        assert_eq!(solve_floor(&l), None);
        // With a key in hand the same floor is solvable in two moves.
        let plan = solve_from(
            &l,
            &SolveState {
                keys_held: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(plan.transitions(), 2);
        assert!(plan.steps[0].unlocked);
    }
}
