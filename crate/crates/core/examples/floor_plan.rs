//! Assembles a whole floor and shows that it depends on the seed alone.

use std::hash::{DefaultHasher, Hash, Hasher};

use towerforge::floor::{Theme, TowerGenerator};

fn digest(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

fn main() {
    let g = TowerGenerator::builtin();
    let seed = 2024;
    for floor in 0..g.max_floor().min(25) {
        let plan = g.assemble_floor(floor, seed, &Theme::ALL).expect("floor assembles");
        let again = g.assemble_floor(floor, seed, &Theme::ALL).unwrap();
        let json = plan.to_canonical_json();
        assert_eq!(json, again.to_canonical_json());
        println!(
            "floor {floor:>2}: {:>2} rooms  {:?}  light {}  digest {:016x}",
            plan.rooms.len(),
            plan.theme,
            plan.lighting.bucket(),
            digest(&json)
        );
    }
    let plan = g.assemble_floor(5, seed, &[Theme::Future]).unwrap();
    println!("\nfloor 5 exit room:");
    for row in plan.room(plan.layout.exit).unwrap().rows() {
        println!("  {row}");
    }
}
