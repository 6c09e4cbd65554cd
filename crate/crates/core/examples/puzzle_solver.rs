//! Solves a block-push room and replays the witness by hand.

use towerforge::geom::Direction;
use towerforge::layout::RoomKind;
use towerforge::rng::Stream;
use towerforge::room::{check_puzzle_solvable, instantiate_room, puzzle_witness, PuzzleMove, RoomRequirements, TemplateLibrary, TileType};

fn main() {
    let lib = TemplateLibrary::builtin();
    let req = RoomRequirements {
        doors: vec![Direction::South, Direction::East],
        entry: Some(Direction::South),
    };
    let mut stream = Stream::from_seed(11);
    for t in lib.for_kind(RoomKind::Puzzle) {
        let room = instantiate_room(&lib, t, RoomKind::Puzzle, &req, &mut stream).expect("instantiates");
        let block = room.find(TileType::Block)[0];
        let goal = room.find(TileType::BlockGoal)[0];
        let moves = puzzle_witness(&room, room.origin(), block).expect("solvable");
        let pushes = moves.iter().filter(|m| matches!(m, PuzzleMove::Push(_))).count();
        println!("{}: {} moves, {pushes} pushes", t.id, moves.len());
        for row in room.rows() {
            println!("  {row}");
        }
        let (mut agent, mut b) = (room.origin(), block);
        for m in &moves {
            let next = agent.step(m.direction());
            if next == b {
                b = b.step(m.direction());
            }
            agent = next;
        }
        assert_eq!(b, goal);
        assert_eq!(check_puzzle_solvable(&room), Ok(true));
    }
}
