use towerforge::floor::TowerGenerator;
use towerforge::grammar::{
    initial_graph, validate_mission_graph, Edge, MissionGraph, MissionNode, NodeType, Violation, MAX_DEGREE,
};
use towerforge::rng::Stream;

/// Exit reachability by enumerating sets of entered rooms. Entering a lock
/// spends one key; keys come from key rooms already entered.
fn oracle_exit_reachable(g: &MissionGraph) -> bool {
    let nodes = g.nodes();
    let n = nodes.len();
    assert!(n <= 20);
    let idx = |id| nodes.iter().position(|m| m.id == id).unwrap();
    let start = idx(g.start().unwrap().id);
    let exit = idx(g.exit().unwrap().id);
    let mut seen = vec![false; 1 << n];
    let mut stack = vec![1u32 << start];
    seen[1 << start] = true;
    while let Some(mask) = stack.pop() {
        if mask & (1 << exit) != 0 {
            return true;
        }
        let count = |t| (0..n).filter(|i| mask & (1 << i) != 0 && nodes[*i].node_type == t).count();
        let spare = count(NodeType::Key) as i64 - count(NodeType::Lock) as i64;
        for e in g.edges() {
            for (a, b) in [(idx(e.0), idx(e.1)), (idx(e.1), idx(e.0))] {
                if mask & (1 << a) == 0 || mask & (1 << b) != 0 {
                    continue;
                }
                if nodes[b].node_type == NodeType::Lock && spare < 1 {
                    continue;
                }
                let next = mask | (1 << b);
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    stack.push(next);
                }
            }
        }
    }
    false
}

#[test]
fn star_with_five_arms_has_too_many_doors() {
    let mut nodes = vec![MissionNode::new(0, NodeType::Start, 0), MissionNode::new(1, NodeType::Exit, 0)];
    let mut edges = vec![Edge::new(0, 1)];
    for i in 2..6 {
        nodes.push(MissionNode::new(i, NodeType::Normal, 0));
        edges.push(Edge::new(0, i));
    }
    let v = validate_mission_graph(&MissionGraph::from_parts(nodes, edges));
    assert_eq!(v, vec![Violation::TooManyDoors { node: 0, degree: 5 }]);
}

#[test]
fn generated_graphs_respect_degree_and_reachability() {
    let gen = TowerGenerator::builtin();
    for seed in 0..40u64 {
        for floor in 0..25 {
            let g = gen.mission_graph(floor, seed).unwrap();
            assert!(validate_mission_graph(&g).is_empty(), "seed {seed} floor {floor}");
            assert!(g.nodes().iter().all(|n| g.neighbors(n.id).count() <= MAX_DEGREE));
            assert!(oracle_exit_reachable(&g), "seed {seed} floor {floor}");
        }
    }
}

#[test]
fn retyped_graphs_agree_with_the_oracle() {
    let gen = TowerGenerator::builtin();
    let mut stream = Stream::from_seed(77);
    let (mut reachable, mut blocked) = (0, 0);
    for seed in 0..60u64 {
        let g = gen.mission_graph(8 + (seed % 15) as u32, seed).unwrap();
        let mut nodes = g.nodes().to_vec();
        for n in nodes.iter_mut() {
            if matches!(n.node_type, NodeType::Normal | NodeType::Key | NodeType::Lock) {
                n.node_type = *stream.pick(&[NodeType::Normal, NodeType::Key, NodeType::Lock]);
            }
        }
        let h = MissionGraph::from_parts(nodes, g.edges().to_vec());
        let expect = oracle_exit_reachable(&h);
        let flagged = validate_mission_graph(&h).contains(&Violation::ExitUnreachable);
        assert_eq!(flagged, !expect, "seed {seed}: {}", h.to_canonical_json());
        if expect {
            reachable += 1;
        } else {
            blocked += 1;
        }
    }
    assert!(reachable > 0 && blocked > 0, "{reachable} {blocked}");
}

#[test]
fn initial_graph_is_minimal_and_valid() {
    let g = initial_graph();
    assert!(validate_mission_graph(&g).is_empty());
    assert!(oracle_exit_reachable(&g));
}
