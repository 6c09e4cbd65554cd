//! Embeds a mission graph on the room grid and solves the result.

use towerforge::grammar::{generate_mission_graph, RecipeTable, RuleLibrary};
use towerforge::layout::{check_layout, graph_to_layout, solve_floor, DoorKind, LayoutGrid, RoomKind};
use towerforge::rng::{Stage, Stream};

fn kind_char(k: RoomKind) -> char {
    match k {
        RoomKind::Start => 'S',
        RoomKind::Exit => 'X',
        RoomKind::Normal => 'n',
        RoomKind::Key => 'K',
        RoomKind::Lock => 'L',
        RoomKind::Puzzle => 'P',
    }
}

fn draw(l: &LayoutGrid) -> String {
    use towerforge::layout::Cell;
    let mut out = String::new();
    for y in 0..l.height {
        let mut row = String::new();
        let mut below = String::new();
        for x in 0..l.width {
            let c = Cell::new(x, y);
            row.push(l.slot(c).map_or(' ', |s| kind_char(s.kind)));
            let right = (x + 1 < l.width).then(|| Cell::new(x + 1, y));
            row.push(match right.and_then(|r| l.door(c, r)) {
                Some(d) if matches!(d.kind, DoorKind::Locked { .. }) => '#',
                Some(_) => '-',
                None => ' ',
            });
            let down = (y + 1 < l.height).then(|| Cell::new(x, y + 1));
            below.push(match down.and_then(|b| l.door(c, b)) {
                Some(d) if matches!(d.kind, DoorKind::Locked { .. }) => '#',
                Some(_) => '|',
                None => ' ',
            });
            below.push(' ');
        }
        out.push_str(row.trim_end());
        out.push('\n');
        out.push_str(below.trim_end());
        out.push('\n');
    }
    out
}

fn main() {
    let (floor, seed) = (14, 3);
    let graph = generate_mission_graph(floor, seed, &RecipeTable::builtin(), &RuleLibrary::builtin()).unwrap();
    let mut stream = Stream::for_floor(seed, floor, Stage::Layout, 0);
    let layout = graph_to_layout(&graph, &mut stream).expect("embeds");
    assert!(check_layout(&layout, &graph).is_empty());

    println!("{}x{} grid, {} connector room(s)", layout.width, layout.height, layout.connector_count());
    print!("{}", draw(&layout));
    let plan = solve_floor(&layout).expect("solvable");
    println!("route: {} transitions", plan.transitions());
    for s in &plan.steps {
        println!("  {:?}", s);
    }
}
