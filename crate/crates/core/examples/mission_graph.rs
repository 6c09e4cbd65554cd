//! Grows mission graphs for a few floors and prints the rewrite log.
//!
//! cargo run --example mission_graph -- 42

use towerforge::grammar::{
    generate_mission_graph_logged, validate_mission_graph, NodeType, RecipeTable, RuleLibrary,
};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let rules = RuleLibrary::builtin();
    let table = RecipeTable::builtin();

    for floor in [0, 8, 16, 24] {
        let (graph, log) = generate_mission_graph_logged(floor, seed, &table, &rules).expect("builtin recipes generate");
        println!(
            "floor {floor}: {} rooms, {} keys, {} locks, {} puzzles, {} attempt(s)",
            graph.nodes().len(),
            graph.count(NodeType::Key),
            graph.count(NodeType::Lock),
            graph.count(NodeType::Puzzle),
            log.attempts
        );
        for e in log.entries.iter().filter(|e| e.attempt + 1 == log.attempts) {
            let note = e.stopped.as_deref().unwrap_or("");
            println!("  {:<22} {}/{} {note}", e.rule, e.applied, e.requested);
        }
        let tree = graph.rooted();
        for n in graph.nodes() {
            let kids: Vec<_> = tree.children(n.id);
            println!("  #{:<2} {:<7?} level {} -> {kids:?}", n.id, n.node_type, n.access_level);
        }
        assert!(validate_mission_graph(&graph).is_empty());
    }
}
