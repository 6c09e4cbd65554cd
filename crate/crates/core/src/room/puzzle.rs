use std::collections::{HashMap, VecDeque};

use super::{RoomError, RoomInstance, TileType};
use crate::geom::{Direction, Pos};
use crate::layout::RoomKind;

/// One agent step inside a puzzle room.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PuzzleMove {
    Walk(Direction),
    Push(Direction),
}

impl PuzzleMove {
    pub fn direction(self) -> Direction {
        match self {
            PuzzleMove::Walk(d) | PuzzleMove::Push(d) => d,
        }
    }
}

/// The block's starting tile counts as floor once the block has left it.
pub(crate) fn block_can_enter(room: &RoomInstance, p: Pos) -> bool {
    room.is_interior(p)
        && matches!(room.tile(p), TileType::Floor | TileType::BlockGoal | TileType::Block)
}

pub(crate) fn agent_can_enter(room: &RoomInstance, p: Pos) -> bool {
    room.is_interior(p) && super::instantiate::is_walkable(room.tile(p))
}

/// Shortest walk-and-push sequence that parks the block on its goal, from
/// the given agent and block positions. Jumps are never needed and never
/// used. Doors other than the one the agent starts on cannot be stepped on.
pub fn puzzle_witness(room: &RoomInstance, agent: Pos, block: Pos) -> Option<Vec<PuzzleMove>> {
    let goal = *room.find(TileType::BlockGoal).first()?;
    let start = (agent, block);
    let mut prev: HashMap<(Pos, Pos), ((Pos, Pos), PuzzleMove)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut found = None;
    prev.insert(start, (start, PuzzleMove::Walk(Direction::North)));
    while let Some(s @ (a, b)) = queue.pop_front() {
        if b == goal {
            found = Some(s);
            break;
        }
        for d in Direction::ALL {
            let n = a.step(d);
            let next = if n == b {
                let beyond = b.step(d);
                if !block_can_enter(room, beyond) {
                    continue;
                }
                ((n, beyond), PuzzleMove::Push(d))
            } else if agent_can_enter(room, n) {
                ((n, b), PuzzleMove::Walk(d))
            } else {
                continue;
            };
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(next.0) {
                e.insert((s, next.1));
                queue.push_back(next.0);
            }
        }
    }
    let mut cur = found?;
    let mut moves = Vec::new();
    while cur != start {
        let (p, m) = prev[&cur];
        moves.push(m);
        cur = p;
    }
    moves.reverse();
    Some(moves)
}

/// Whether the block can be pushed onto the goal starting from the room's
/// entry. Errors unless the room is a puzzle room with exactly one block
/// and one goal.
pub fn check_puzzle_solvable(room: &RoomInstance) -> Result<bool, RoomError> {
    let blocks = room.find(TileType::Block);
    let goals = room.find(TileType::BlockGoal);
    if room.kind != RoomKind::Puzzle || blocks.len() != 1 || goals.len() != 1 {
        return Err(RoomError::NotAPuzzleRoom);
    }
    Ok(puzzle_witness(room, room.origin(), blocks[0]).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn room(rows: &[&str], entry: Direction) -> RoomInstance {
        let json = serde_json::json!({
            "template": "t", "kind": "puzzle", "rotation": 0,
            "doors": [entry], "entry": entry, "rows": rows
        });
        serde_json::from_value(json).unwrap()
    }

    /// Replays moves with the push rule spelled out independently.
    fn replay(room: &RoomInstance, moves: &[PuzzleMove]) -> Pos {
        let mut a = room.origin();
        let mut b = room.find(TileType::Block)[0];
        for m in moves {
            let d = m.direction();
            let n = a.step(d);
            if n == b {
                assert!(matches!(m, PuzzleMove::Push(_)));
                b = b.step(d);
                assert!(matches!(
                    room.tile(b),
                    TileType::Floor | TileType::BlockGoal | TileType::Block
                ));
            } else {
                assert!(matches!(m, PuzzleMove::Walk(_)));
                assert_ne!(room.tile(n), TileType::Wall);
            }
            a = n;
        }
        b
    }

    #[test]
    fn centre_block_to_corner_goal() {
        let r = room(&["#####", "#G..#", "+.B.#", "#...#", "#####"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(true));
        let w = puzzle_witness(&r, r.origin(), Pos::new(2, 2)).unwrap();
        assert_eq!(replay(&r, &w), Pos::new(1, 1));
    }

    #[test]
    fn block_in_corner_is_dead() {
        // Block already pushed into the bottom-right corner, goal elsewhere.
        let r = room(&["#####", "#G..#", "+...#", "#..B#", "#####"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(false));
    }

    #[test]
    fn block_against_wall_cannot_leave_it() {
        let r = room(&["######", "#....#", "+...B#", "#....#", "#G...#", "######"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(false));
    }

    #[test]
    fn pits_stop_pushes() {
        let r = room(&["#####", "#..G#", "+B_.#", "#...#", "#####"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(false));
        let r = room(&["#####", "#..G#", "+B..#", "#...#", "#####"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Ok(true));
    }

    #[test]
    fn not_a_puzzle_room() {
        let mut r = room(&["#####", "#G..#", "+.B.#", "#...#", "#####"], Direction::West);
        r.kind = RoomKind::Normal;
        assert_eq!(check_puzzle_solvable(&r), Err(RoomError::NotAPuzzleRoom));
        let r = room(&["#####", "#...#", "+.B.#", "#...#", "#####"], Direction::West);
        assert_eq!(check_puzzle_solvable(&r), Err(RoomError::NotAPuzzleRoom));
    }
}
