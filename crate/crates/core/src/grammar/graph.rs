use std::collections::{BTreeMap, VecDeque};
use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    Start,
    Exit,
    Normal,
    Key,
    Lock,
    Puzzle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MissionNode {
    pub id: NodeId,
    pub node_type: NodeType,
    /// Number of locked doors between the start room and this room.
    pub access_level: u32,
}

impl MissionNode {
    pub fn new(id: NodeId, node_type: NodeType, access_level: u32) -> Self {
        Self {
            id,
            node_type,
            access_level,
        }
    }
}

/// Unordered edge, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[NodeId; 2]", into = "[NodeId; 2]")]
pub struct Edge(pub NodeId, pub NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn touches(&self, id: NodeId) -> bool {
        self.0 == id || self.1 == id
    }

    pub fn other(&self, id: NodeId) -> NodeId {
        if self.0 == id {
            self.1
        } else {
            self.0
        }
    }
}

impl From<[NodeId; 2]> for Edge {
    fn from(v: [NodeId; 2]) -> Self {
        Edge::new(v[0], v[1])
    }
}

impl From<Edge> for [NodeId; 2] {
    fn from(e: Edge) -> Self {
        [e.0, e.1]
    }
}

/// Nodes are kept sorted by id and edges sorted, which makes the serde
/// output canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MissionGraph {
    nodes: Vec<MissionNode>,
    edges: Vec<Edge>,
}

impl MissionGraph {
    /// Builds a graph as given. Duplicate or dangling edges are kept so the
    /// validator can report them.
    pub fn from_parts(mut nodes: Vec<MissionNode>, mut edges: Vec<Edge>) -> Self {
        nodes.sort_by_key(|n| n.id);
        edges.sort();
        Self { nodes, edges }
    }

    pub fn nodes(&self) -> &[MissionNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&MissionNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Option<&mut MissionNode> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(move |i| &mut self.nodes[i])
    }

    pub(crate) fn push_node(&mut self, node: MissionNode) {
        self.nodes.push(node);
        self.nodes.sort_by_key(|n| n.id);
    }

    pub(crate) fn remove_edge(&mut self, e: Edge) -> bool {
        match self.edges.iter().position(|x| *x == e) {
            Some(i) => {
                self.edges.remove(i);
                true
            }
            None => false,
        }
    }

    pub(crate) fn add_edge(&mut self, e: Edge) {
        if let Err(i) = self.edges.binary_search(&e) {
            self.edges.insert(i, e);
        }
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.binary_search(&Edge::new(a, b)).is_ok()
    }

    pub fn next_id(&self) -> NodeId {
        self.nodes.last().map_or(0, |n| n.id + 1)
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.touches(id) && e.0 != e.1)
            .map(move |e| e.other(id))
    }

    pub fn count(&self, t: NodeType) -> usize {
        self.nodes.iter().filter(|n| n.node_type == t).count()
    }

    pub fn start(&self) -> Option<&MissionNode> {
        self.nodes.iter().find(|n| n.node_type == NodeType::Start)
    }

    pub fn exit(&self) -> Option<&MissionNode> {
        self.nodes.iter().find(|n| n.node_type == NodeType::Exit)
    }

    /// Breadth-first structure rooted at the start node.
    pub fn rooted(&self) -> Rooted {
        let mut depth = BTreeMap::new();
        let mut parent = BTreeMap::new();
        let mut order = Vec::new();
        if let Some(start) = self.start() {
            let mut queue = VecDeque::from([start.id]);
            depth.insert(start.id, 0u32);
            while let Some(id) = queue.pop_front() {
                order.push(id);
                let d = depth[&id];
                let mut next: Vec<_> = self.neighbors(id).collect();
                next.sort_unstable();
                for n in next {
                    if let std::collections::btree_map::Entry::Vacant(slot) = depth.entry(n) {
                        slot.insert(d + 1);
                        parent.insert(n, id);
                        queue.push_back(n);
                    }
                }
            }
        }
        Rooted {
            depth,
            parent,
            order,
        }
    }

    /// Structural digest used to tie a [`Match`](super::Match) to the graph
    /// it was found on.
    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    /// Canonical JSON: sorted keys, nodes ordered by id, edges sorted.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("mission graph serializes")
    }
}

/// Breadth-first tree over a mission graph, rooted at its start node.
#[derive(Clone, Debug, Default)]
pub struct Rooted {
    pub depth: BTreeMap<NodeId, u32>,
    pub parent: BTreeMap<NodeId, NodeId>,
    /// Visit order.
    pub order: Vec<NodeId>,
}

impl Rooted {
    /// True when `child` hangs directly below `parent`.
    pub fn is_child(&self, parent: NodeId, child: NodeId) -> bool {
        self.parent.get(&child) == Some(&parent)
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.order
            .iter()
            .copied()
            .filter(|c| self.parent.get(c) == Some(&id))
            .collect()
    }

    /// `id` and everything below it.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            out.extend(self.children(cur));
            i += 1;
        }
        out
    }
}
