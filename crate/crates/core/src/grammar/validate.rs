use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{MissionGraph, NodeId, NodeType};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingStart,
    MultipleStarts,
    MissingExit,
    MultipleExits,
    StartLevelNonZero { node: NodeId },
    DuplicateNodeId { node: NodeId },
    SelfLoop { node: NodeId },
    DuplicateEdge { a: NodeId, b: NodeId },
    DanglingEdge { a: NodeId, b: NodeId },
    Disconnected { node: NodeId },
    /// More neighbours than a grid room has sides.
    TooManyDoors { node: NodeId, degree: usize },
    /// A node above level zero with no neighbour that justifies its level.
    UnsupportedLevel { node: NodeId },
    /// A lock with no usable key on the near side of it.
    MissingKey { lock: NodeId },
    ExitUnreachable,
}

/// A room has four sides, so at most four doors.
pub const MAX_DEGREE: usize = 4;

/// Checks every structural invariant of a mission graph. Returns an empty
/// list when the graph is valid.
pub fn validate_mission_graph(graph: &MissionGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let nodes = graph.nodes();

    let starts = graph.count(NodeType::Start);
    let exits = graph.count(NodeType::Exit);
    match starts {
        0 => out.push(Violation::MissingStart),
        1 => {}
        _ => out.push(Violation::MultipleStarts),
    }
    match exits {
        0 => out.push(Violation::MissingExit),
        1 => {}
        _ => out.push(Violation::MultipleExits),
    }
    for n in nodes {
        if n.node_type == NodeType::Start && n.access_level != 0 {
            out.push(Violation::StartLevelNonZero { node: n.id });
        }
    }
    for w in nodes.windows(2) {
        if w[0].id == w[1].id {
            out.push(Violation::DuplicateNodeId { node: w[0].id });
        }
    }

    let mut seen = HashSet::new();
    for e in graph.edges() {
        if e.0 == e.1 {
            out.push(Violation::SelfLoop { node: e.0 });
        }
        if graph.node(e.0).is_none() || graph.node(e.1).is_none() {
            out.push(Violation::DanglingEdge { a: e.0, b: e.1 });
        }
        if !seen.insert(*e) {
            out.push(Violation::DuplicateEdge { a: e.0, b: e.1 });
        }
    }

    for n in nodes {
        let degree = graph.neighbors(n.id).count();
        if degree > MAX_DEGREE {
            out.push(Violation::TooManyDoors { node: n.id, degree });
        }
    }

    if starts == 1 {
        let rooted = graph.rooted();
        for n in nodes {
            if !rooted.depth.contains_key(&n.id) {
                out.push(Violation::Disconnected { node: n.id });
            }
        }
    }

    for n in nodes {
        if n.access_level == 0 {
            continue;
        }
        let supported = graph.neighbors(n.id).any(|m| {
            graph
                .node(m)
                .is_some_and(|m| m.access_level == n.access_level)
        });
        if !supported {
            out.push(Violation::UnsupportedLevel { node: n.id });
        }
    }

    if starts == 1 {
        for lock in nodes.iter().filter(|n| n.node_type == NodeType::Lock) {
            if !key_before_lock(graph, lock.access_level) {
                out.push(Violation::MissingKey { lock: lock.id });
            }
        }
        if exits == 1 && !exit_reachable(graph) {
            out.push(Violation::ExitUnreachable);
        }
    }
    out
}

/// Is there a key below level `k` reachable without entering a lock of level
/// `k` or higher?
fn key_before_lock(graph: &MissionGraph, k: u32) -> bool {
    let Some(start) = graph.start() else {
        return false;
    };
    let mut seen = BTreeSet::from([start.id]);
    let mut queue = VecDeque::from([start.id]);
    while let Some(id) = queue.pop_front() {
        let node = graph.node(id).expect("visited nodes exist");
        if node.node_type == NodeType::Key && node.access_level < k {
            return true;
        }
        for m in graph.neighbors(id) {
            let Some(next) = graph.node(m) else { continue };
            if next.node_type == NodeType::Lock && next.access_level >= k {
                continue;
            }
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    false
}

/// Exhaustive search over (room, keys collected, locks opened). Keys are
/// interchangeable and each lock consumes one.
pub(crate) fn exit_reachable(graph: &MissionGraph) -> bool {
    let (Some(start), Some(exit)) = (graph.start(), graph.exit()) else {
        return false;
    };
    let keys: Vec<NodeId> = graph
        .nodes()
        .iter()
        .filter(|n| n.node_type == NodeType::Key)
        .map(|n| n.id)
        .collect();
    let locks: Vec<NodeId> = graph
        .nodes()
        .iter()
        .filter(|n| n.node_type == NodeType::Lock)
        .map(|n| n.id)
        .collect();
    if keys.len() > 24 || locks.len() > 24 {
        // Far beyond any generated floor; refuse rather than explode.
        return false;
    }
    let bit = |list: &[NodeId], id: NodeId| list.iter().position(|x| *x == id).map(|i| 1u32 << i);

    let initial = (start.id, bit(&keys, start.id).unwrap_or(0), 0u32);
    let mut seen = HashSet::from([initial]);
    let mut queue = VecDeque::from([initial]);
    while let Some((id, got, opened)) = queue.pop_front() {
        if id == exit.id {
            return true;
        }
        for m in graph.neighbors(id) {
            let mut opened2 = opened;
            if let Some(b) = bit(&locks, m) {
                if opened & b == 0 {
                    let held = got.count_ones() - opened.count_ones();
                    if held == 0 {
                        continue;
                    }
                    opened2 |= b;
                }
            }
            let got2 = got | bit(&keys, m).unwrap_or(0);
            let state = (m, got2, opened2);
            if seen.insert(state) {
                queue.push_back(state);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{initial_graph, Edge, MissionNode};

    fn n(id: NodeId, t: NodeType, l: u32) -> MissionNode {
        MissionNode::new(id, t, l)
    }

    #[test]
    fn initial_graph_is_valid() {
        assert!(validate_mission_graph(&initial_graph()).is_empty());
    }

    #[test]
    fn lock_without_key() {
        let g = MissionGraph::from_parts(
            vec![
                n(0, NodeType::Start, 0),
                n(1, NodeType::Lock, 1),
                n(2, NodeType::Exit, 1),
            ],
            vec![Edge::new(0, 1), Edge::new(1, 2)],
        );
        let v = validate_mission_graph(&g);
        assert!(v.contains(&Violation::MissingKey { lock: 1 }), "{v:?}");
    }

    #[test]
    fn one_key_two_locks_is_unreachable() {
        // Start - Key(0); Start - Lock(1) - Normal(1) - Lock(2) - Exit(2)
        let g = MissionGraph::from_parts(
            vec![
                n(0, NodeType::Start, 0),
                n(1, NodeType::Key, 0),
                n(2, NodeType::Lock, 1),
                n(3, NodeType::Normal, 1),
                n(4, NodeType::Lock, 2),
                n(5, NodeType::Exit, 2),
            ],
            vec![
                Edge::new(0, 1),
                Edge::new(0, 2),
                Edge::new(2, 3),
                Edge::new(3, 4),
                Edge::new(4, 5),
            ],
        );
        assert_eq!(validate_mission_graph(&g), vec![Violation::ExitUnreachable]);
    }

    #[test]
    fn structural_violations() {
        let g = MissionGraph::from_parts(
            vec![n(0, NodeType::Start, 1), n(1, NodeType::Normal, 0)],
            vec![Edge::new(0, 0), Edge::new(0, 7)],
        );
        let v = validate_mission_graph(&g);
        assert!(v.contains(&Violation::MissingExit));
        assert!(v.contains(&Violation::StartLevelNonZero { node: 0 }));
        assert!(v.contains(&Violation::SelfLoop { node: 0 }));
        assert!(v.contains(&Violation::DanglingEdge { a: 0, b: 7 }));
        assert!(v.contains(&Violation::Disconnected { node: 1 }));
    }

    #[test]
    fn duplicate_edge_detected() {
        let g = MissionGraph::from_parts(
            vec![n(0, NodeType::Start, 0), n(1, NodeType::Exit, 0)],
            vec![Edge::new(0, 1), Edge::new(1, 0)],
        );
        assert_eq!(
            validate_mission_graph(&g),
            vec![Violation::DuplicateEdge { a: 0, b: 1 }]
        );
    }
}
