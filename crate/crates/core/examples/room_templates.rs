//! Loads the template library and draws a few rotated instances.

use towerforge::geom::Direction;
use towerforge::layout::RoomKind;
use towerforge::rng::Stream;
use towerforge::room::{instantiate_room, RoomRequirements, TemplateLibrary};

fn main() {
    let lib = TemplateLibrary::builtin();
    println!("{} templates", lib.templates().len());
    for kind in RoomKind::ALL {
        let ids: Vec<&str> = lib.for_kind(kind).iter().map(|t| t.id.as_str()).collect();
        println!("  {kind:?}: {}", ids.join(" "));
    }

    let req = RoomRequirements {
        doors: vec![Direction::West, Direction::North],
        entry: Some(Direction::West),
    };
    let mut stream = Stream::from_seed(7);
    for id in ["hall_4a", "vault_5a", "crate_4a"] {
        let Some(t) = lib.template(id) else { continue };
        let kind = *t.kinds.first().expect("template has a kind");
        let room = instantiate_room(&lib, t, kind, &req, &mut stream).expect("instantiates");
        println!("\n{id} as {kind:?}, rotation {}:", room.rotation);
        for row in room.rows() {
            println!("  {row}");
        }
    }
}
