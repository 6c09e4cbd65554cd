//! Embedding of a mission graph into a grid of rooms.
//!
//! Rooms are placed one at a time in breadth-first order from the start
//! room. A room goes next to its parent when a free neighbouring cell
//! exists; otherwise the shortest run of free cells to the nearest empty
//! cell is filled with connector rooms. Each connector belongs to exactly
//! one mission edge, so contracting connector chains gives back the mission
//! graph.

mod solve;

pub use solve::{solve_floor, solve_from, Plan, PlanStep, SolveState};

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Direction;
use crate::grammar::{validate_mission_graph, MissionGraph, NodeId, NodeType, Violation, MAX_ROOMS};
use crate::rng::Stream;

/// Largest grid side.
pub const MAX_GRID: u8 = 8;
/// Placement attempts per stream before reporting failure.
pub const PLACEMENT_ATTEMPTS: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("mission graph is invalid: {0:?}")]
    InvalidGraph(Vec<Violation>),
    #[error("layout generation failed: {0}")]
    GenerationFailed(String),
}

/// Grid coordinate of a room.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub y: u8,
    pub x: u8,
}

impl Cell {
    pub const fn new(x: u8, y: u8) -> Self {
        Self { y, x }
    }

    pub fn step(self, d: Direction, width: u8, height: u8) -> Option<Cell> {
        let (dx, dy) = d.delta();
        let x = self.x as i32 + dx;
        let y = self.y as i32 + dy;
        (x >= 0 && y >= 0 && x < width as i32 && y < height as i32)
            .then(|| Cell::new(x as u8, y as u8))
    }

    pub fn direction_to(self, other: Cell) -> Option<Direction> {
        Direction::from_delta(
            other.x as i32 - self.x as i32,
            other.y as i32 - self.y as i32,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomKind {
    Start,
    Exit,
    Normal,
    Key,
    Lock,
    Puzzle,
}

impl RoomKind {
    pub const ALL: [RoomKind; 6] = [
        RoomKind::Start,
        RoomKind::Exit,
        RoomKind::Normal,
        RoomKind::Key,
        RoomKind::Lock,
        RoomKind::Puzzle,
    ];

    pub fn of(t: NodeType) -> Self {
        match t {
            NodeType::Start => RoomKind::Start,
            NodeType::Exit => RoomKind::Exit,
            NodeType::Normal => RoomKind::Normal,
            NodeType::Key => RoomKind::Key,
            NodeType::Lock => RoomKind::Lock,
            NodeType::Puzzle => RoomKind::Puzzle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "owner", rename_all = "snake_case")]
pub enum SlotOwner {
    Node { id: NodeId },
    /// Filler room on the path realising mission edge `(a, b)`.
    Connector { a: NodeId, b: NodeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomSlot {
    #[serde(flatten)]
    pub owner: SlotOwner,
    pub kind: RoomKind,
    pub access_level: u32,
    /// Side whose door leads back toward the start room.
    pub entry: Option<Direction>,
}

impl RoomSlot {
    pub fn node(&self) -> Option<NodeId> {
        match self.owner {
            SlotOwner::Node { id } => Some(id),
            SlotOwner::Connector { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DoorKind {
    Open,
    Locked { level: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Door {
    /// The smaller of the two cells.
    pub a: Cell,
    pub b: Cell,
    #[serde(flatten)]
    pub kind: DoorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutGrid {
    pub width: u8,
    pub height: u8,
    /// Row-major.
    pub cells: Vec<Option<RoomSlot>>,
    /// Sorted by `(a, b)`.
    pub doors: Vec<Door>,
    pub start: Cell,
    /// The room holding the stairs.
    pub exit: Cell,
}

impl LayoutGrid {
    pub fn slot(&self, c: Cell) -> Option<&RoomSlot> {
        if c.x >= self.width || c.y >= self.height {
            return None;
        }
        self.cells[c.y as usize * self.width as usize + c.x as usize].as_ref()
    }

    pub fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Cell, &RoomSlot)> + '_ {
        self.cells.iter().enumerate().filter_map(move |(i, s)| {
            s.as_ref().map(|s| {
                (
                    Cell::new((i % self.width as usize) as u8, (i / self.width as usize) as u8),
                    s,
                )
            })
        })
    }

    pub fn door_index(&self, a: Cell, b: Cell) -> Option<usize> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.doors
            .binary_search_by(|d| (d.a, d.b).cmp(&(a, b)))
            .ok()
    }

    pub fn door(&self, a: Cell, b: Cell) -> Option<&Door> {
        self.door_index(a, b).map(|i| &self.doors[i])
    }

    /// Sides of `c` that carry a door.
    pub fn door_sides(&self, c: Cell) -> Vec<Direction> {
        Direction::ALL
            .into_iter()
            .filter(|d| {
                c.step(*d, self.width, self.height)
                    .is_some_and(|n| self.door(c, n).is_some())
            })
            .collect()
    }

    /// Neighbouring cells reachable through a door, with the door index.
    pub fn door_neighbors(&self, c: Cell) -> impl Iterator<Item = (Cell, usize)> + '_ {
        Direction::ALL.into_iter().filter_map(move |d| {
            let n = c.step(d, self.width, self.height)?;
            self.door_index(c, n).map(|i| (n, i))
        })
    }

    pub fn cell_of(&self, node: NodeId) -> Option<Cell> {
        self.occupied()
            .find(|(_, s)| s.node() == Some(node))
            .map(|(c, _)| c)
    }

    pub fn connector_count(&self) -> usize {
        self.occupied().filter(|(_, s)| s.node().is_none()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutViolation {
    TooLarge,
    NodeNotPlaced { node: NodeId },
    NodePlacedTwice { node: NodeId },
    DoorNotAdjacent { a: Cell, b: Cell },
    DoorToEmptyCell { a: Cell, b: Cell },
    EdgeNotRealised { a: NodeId, b: NodeId },
    /// A door that no mission edge accounts for.
    StrayDoor { a: Cell, b: Cell },
    LockLevelMismatch { a: Cell, b: Cell },
    BadStartOrExit,
}

/// Checks a layout against the mission graph it claims to embed.
pub fn check_layout(layout: &LayoutGrid, graph: &MissionGraph) -> Vec<LayoutViolation> {
    let mut out = Vec::new();
    if layout.width > MAX_GRID || layout.height > MAX_GRID || layout.width == 0 || layout.height == 0
    {
        out.push(LayoutViolation::TooLarge);
    }
    let mut placed: BTreeMap<NodeId, Cell> = BTreeMap::new();
    for (c, s) in layout.occupied() {
        if let Some(id) = s.node() {
            if placed.insert(id, c).is_some() {
                out.push(LayoutViolation::NodePlacedTwice { node: id });
            }
        }
    }
    for n in graph.nodes() {
        if !placed.contains_key(&n.id) {
            out.push(LayoutViolation::NodeNotPlaced { node: n.id });
        }
    }
    let start_ok = graph
        .start()
        .and_then(|s| placed.get(&s.id))
        .is_some_and(|c| *c == layout.start);
    let exit_ok = graph
        .exit()
        .and_then(|s| placed.get(&s.id))
        .is_some_and(|c| *c == layout.exit);
    if !start_ok || !exit_ok {
        out.push(LayoutViolation::BadStartOrExit);
    }

    for d in &layout.doors {
        if d.a.direction_to(d.b).is_none() {
            out.push(LayoutViolation::DoorNotAdjacent { a: d.a, b: d.b });
        }
        if layout.slot(d.a).is_none() || layout.slot(d.b).is_none() {
            out.push(LayoutViolation::DoorToEmptyCell { a: d.a, b: d.b });
        }
        if let DoorKind::Locked { level } = d.kind {
            let la = layout.slot(d.a).map(|s| s.access_level);
            let lb = layout.slot(d.b).map(|s| s.access_level);
            let ok = match (la, lb) {
                (Some(la), Some(lb)) => {
                    (la == level && lb + 1 == level) || (lb == level && la + 1 == level)
                }
                _ => false,
            };
            if !ok {
                out.push(LayoutViolation::LockLevelMismatch { a: d.a, b: d.b });
            }
        }
    }

    // Every mission edge must be a door path through its own connectors,
    // and every door must belong to some mission edge.
    let mut used = vec![false; layout.doors.len()];
    for e in graph.edges() {
        let (Some(&ca), Some(&cb)) = (placed.get(&e.0), placed.get(&e.1)) else {
            continue;
        };
        let own = |c: Cell| {
            c == cb
                || layout.slot(c).is_some_and(|s| {
                    matches!(s.owner, SlotOwner::Connector { a, b }
                        if (a, b) == (e.0, e.1) || (a, b) == (e.1, e.0))
                })
        };
        let mut prev: BTreeMap<Cell, (Cell, usize)> = BTreeMap::new();
        let mut queue = VecDeque::from([ca]);
        let mut found = false;
        while let Some(c) = queue.pop_front() {
            if c == cb {
                found = true;
                break;
            }
            for (n, di) in layout.door_neighbors(c) {
                if n != ca && own(n) && !prev.contains_key(&n) {
                    prev.insert(n, (c, di));
                    queue.push_back(n);
                }
            }
        }
        if !found {
            out.push(LayoutViolation::EdgeNotRealised { a: e.0, b: e.1 });
            continue;
        }
        let mut c = cb;
        while let Some(&(p, di)) = prev.get(&c) {
            used[di] = true;
            c = p;
        }
    }
    for (i, d) in layout.doors.iter().enumerate() {
        if !used[i] {
            out.push(LayoutViolation::StrayDoor { a: d.a, b: d.b });
        }
    }
    out
}

struct Placement {
    grid: BTreeMap<Cell, RoomSlot>,
    doors: BTreeMap<(Cell, Cell), DoorKind>,
}

impl Placement {
    fn free(&self, c: Cell) -> bool {
        !self.grid.contains_key(&c)
    }

    fn free_degree(&self, c: Cell) -> usize {
        Direction::ALL
            .into_iter()
            .filter_map(|d| c.step(d, MAX_GRID, MAX_GRID))
            .filter(|n| self.free(*n))
            .count()
    }

    fn add_door(&mut self, a: Cell, b: Cell, kind: DoorKind) {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.doors.insert(key, kind);
    }

    /// Shortest path of free cells from `from` to the nearest cell `goal`
    /// accepts, ties broken by the stream. Returns the cells after `from`.
    fn route(
        &self,
        from: Cell,
        stream: &mut Stream,
        goal: impl Fn(Cell) -> bool,
        passable: impl Fn(Cell) -> bool,
    ) -> Option<Vec<Cell>> {
        let mut prev: BTreeMap<Cell, Cell> = BTreeMap::new();
        let mut frontier = vec![from];
        let mut seen = std::collections::BTreeSet::from([from]);
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &c in &frontier {
                for d in Direction::ALL {
                    let Some(n) = c.step(d, MAX_GRID, MAX_GRID) else { continue };
                    if seen.contains(&n) || !(goal(n) || passable(n)) {
                        continue;
                    }
                    seen.insert(n);
                    prev.insert(n, c);
                    next.push(n);
                }
            }
            let hits: Vec<Cell> = next.iter().copied().filter(|c| goal(*c)).collect();
            if !hits.is_empty() {
                let target = *stream.pick(&hits);
                let mut path = vec![target];
                let mut c = target;
                while let Some(&p) = prev.get(&c) {
                    if p == from {
                        break;
                    }
                    path.push(p);
                    c = p;
                }
                path.reverse();
                return Some(path);
            }
            frontier = next.into_iter().filter(|c| passable(*c)).collect();
        }
        None
    }
}

fn door_kind_into(graph: &MissionGraph, from_level: u32, node: NodeId) -> DoorKind {
    let n = graph.node(node).expect("placed node exists");
    if n.node_type == NodeType::Lock && n.access_level > from_level {
        DoorKind::Locked {
            level: n.access_level,
        }
    } else {
        DoorKind::Open
    }
}

fn try_place(graph: &MissionGraph, stream: &mut Stream) -> Option<LayoutGrid> {
    let rooted = graph.rooted();
    let start = graph.start()?;
    let mut pl = Placement {
        grid: BTreeMap::new(),
        doors: BTreeMap::new(),
    };
    let mut cells: BTreeMap<NodeId, Cell> = BTreeMap::new();
    let origin = Cell::new(2 + stream.below(4) as u8, 2 + stream.below(4) as u8);
    pl.grid.insert(
        origin,
        RoomSlot {
            owner: SlotOwner::Node { id: start.id },
            kind: RoomKind::Start,
            access_level: 0,
            entry: None,
        },
    );
    cells.insert(start.id, origin);

    for &id in rooted.order.iter().skip(1) {
        let parent = rooted.parent[&id];
        let pcell = cells[&parent];
        let plevel = graph.node(parent)?.access_level;
        let node = graph.node(id)?;

        let mut options: Vec<Cell> = Direction::ALL
            .into_iter()
            .filter_map(|d| pcell.step(d, MAX_GRID, MAX_GRID))
            .filter(|c| pl.free(*c))
            .collect();
        stream.shuffle(&mut options);
        options.sort_by_key(|c| std::cmp::Reverse(pl.free_degree(*c)));

        let path = match options.first() {
            Some(&c) => vec![c],
            None => pl.route(pcell, stream, |c| pl.free(c) && pl.free_degree(c) > 0, |c| pl.free(c))
                .or_else(|| pl.route(pcell, stream, |c| pl.free(c), |c| pl.free(c)))?,
        };
        let target = *path.last()?;
        let mut prev = pcell;
        for &c in &path {
            let slot = if c == target {
                RoomSlot {
                    owner: SlotOwner::Node { id },
                    kind: RoomKind::of(node.node_type),
                    access_level: node.access_level,
                    entry: c.direction_to(prev),
                }
            } else {
                RoomSlot {
                    owner: SlotOwner::Connector { a: parent, b: id },
                    kind: RoomKind::Normal,
                    access_level: plevel,
                    entry: c.direction_to(prev),
                }
            };
            pl.grid.insert(c, slot);
            let kind = if c == target {
                door_kind_into(graph, plevel, id)
            } else {
                DoorKind::Open
            };
            pl.add_door(prev, c, kind);
            prev = c;
        }
        cells.insert(id, target);
    }

    // Edges outside the breadth-first tree (never produced by the shipped
    // rules, but allowed in a mission graph).
    for e in graph.edges() {
        if rooted.is_child(e.0, e.1) || rooted.is_child(e.1, e.0) {
            continue;
        }
        let (ca, cb) = (cells[&e.0], cells[&e.1]);
        let (la, lb) = (graph.node(e.0)?.access_level, graph.node(e.1)?.access_level);
        let path = pl.route(ca, stream, |c| c == cb, |c| pl.free(c))?;
        let mut prev = ca;
        for &c in &path {
            if c != cb {
                pl.grid.insert(
                    c,
                    RoomSlot {
                        owner: SlotOwner::Connector { a: e.0, b: e.1 },
                        kind: RoomKind::Normal,
                        access_level: la.min(lb),
                        entry: c.direction_to(prev),
                    },
                );
            }
            let kind = if c == cb {
                door_kind_into(graph, la, e.1)
            } else if prev == ca && lb < la {
                door_kind_into(graph, lb, e.0)
            } else {
                DoorKind::Open
            };
            pl.add_door(prev, c, kind);
            prev = c;
        }
    }

    let min_x = pl.grid.keys().map(|c| c.x).min()?;
    let min_y = pl.grid.keys().map(|c| c.y).min()?;
    let max_x = pl.grid.keys().map(|c| c.x).max()?;
    let max_y = pl.grid.keys().map(|c| c.y).max()?;
    let width = max_x - min_x + 1;
    let height = max_y - min_y + 1;
    let shift = |c: Cell| Cell::new(c.x - min_x, c.y - min_y);
    let mut grid = vec![None; width as usize * height as usize];
    for (c, s) in &pl.grid {
        let c = shift(*c);
        grid[c.y as usize * width as usize + c.x as usize] = Some(*s);
    }
    let mut doors: Vec<Door> = pl
        .doors
        .iter()
        .map(|((a, b), kind)| Door {
            a: shift(*a),
            b: shift(*b),
            kind: *kind,
        })
        .collect();
    doors.sort();
    Some(LayoutGrid {
        width,
        height,
        cells: grid,
        doors,
        start: shift(origin),
        exit: shift(cells[&graph.exit()?.id]),
    })
}

/// Embeds `graph` into a grid of at most 8×8 rooms.
pub fn graph_to_layout(graph: &MissionGraph, stream: &mut Stream) -> Result<LayoutGrid, LayoutError> {
    if graph.nodes().len() > MAX_ROOMS {
        return Err(LayoutError::GenerationFailed(format!(
            "{} rooms exceeds the cap of {MAX_ROOMS}",
            graph.nodes().len()
        )));
    }
    let violations = validate_mission_graph(graph);
    if !violations.is_empty() {
        return Err(LayoutError::InvalidGraph(violations));
    }
    for _ in 0..PLACEMENT_ATTEMPTS {
        if let Some(layout) = try_place(graph, stream) {
            if check_layout(&layout, graph).is_empty() {
                return Ok(layout);
            }
        }
    }
    Err(LayoutError::GenerationFailed(format!(
        "no embedding after {PLACEMENT_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{
        generate_mission_graph, initial_graph, Edge, MissionNode, RecipeTable, RuleLibrary,
    };
    use crate::rng::Stage;

    #[test]
    fn initial_graph_gives_two_adjacent_rooms() {
        let g = initial_graph();
        let l = graph_to_layout(&g, &mut Stream::from_seed(3)).unwrap();
        assert_eq!(l.width as u32 * l.height as u32, 2);
        assert_eq!(l.doors.len(), 1);
        assert_eq!(l.doors[0].kind, DoorKind::Open);
        assert_eq!(l.slot(l.exit).unwrap().kind, RoomKind::Exit);
        assert!(check_layout(&l, &g).is_empty());
    }

    #[test]
    fn locked_doors_match_far_room_level() {
        let rules = RuleLibrary::builtin();
        let table = RecipeTable::builtin();
        for seed in 0..100 {
            let g = generate_mission_graph(10, seed, &table, &rules).unwrap();
            let l = graph_to_layout(&g, &mut Stream::for_floor(seed, 10, Stage::Layout, 0)).unwrap();
            assert!(check_layout(&l, &g).is_empty());
            let mut locked = 0;
            for d in &l.doors {
                if let DoorKind::Locked { level } = d.kind {
                    locked += 1;
                    let far = [d.a, d.b]
                        .into_iter()
                        .map(|c| l.slot(c).unwrap())
                        .find(|s| s.kind == RoomKind::Lock)
                        .unwrap();
                    assert_eq!(far.access_level, level);
                }
            }
            assert_eq!(locked, g.count(NodeType::Lock));
        }
    }

    #[test]
    fn too_many_rooms_rejected() {
        let mut nodes = vec![MissionNode::new(0, NodeType::Start, 0)];
        let mut edges = Vec::new();
        for i in 1..16 {
            nodes.push(MissionNode::new(i, NodeType::Normal, 0));
            edges.push(Edge::new(i - 1, i));
        }
        nodes.push(MissionNode::new(16, NodeType::Exit, 0));
        edges.push(Edge::new(15, 16));
        let g = MissionGraph::from_parts(nodes, edges);
        assert_eq!(g.nodes().len(), 17);
        assert!(matches!(
            graph_to_layout(&g, &mut Stream::from_seed(0)),
            Err(LayoutError::GenerationFailed(_))
        ));
    }

    #[test]
    fn long_chain_uses_connectors_or_fits() {
        // A 16-room chain always fits an 8x8 grid; connectors may appear.
        let mut nodes = vec![MissionNode::new(0, NodeType::Start, 0)];
        let mut edges = Vec::new();
        for i in 1..15 {
            nodes.push(MissionNode::new(i, NodeType::Normal, 0));
            edges.push(Edge::new(i - 1, i));
        }
        nodes.push(MissionNode::new(15, NodeType::Exit, 0));
        edges.push(Edge::new(14, 15));
        let g = MissionGraph::from_parts(nodes, edges);
        for seed in 0..50 {
            let l = graph_to_layout(&g, &mut Stream::from_seed(seed)).unwrap();
            assert!(check_layout(&l, &g).is_empty());
        }
    }

    #[test]
    fn non_tree_edge_is_routed() {
        // Start - A - Exit and Start - B - Exit (a cycle).
        let g = MissionGraph::from_parts(
            vec![
                MissionNode::new(0, NodeType::Start, 0),
                MissionNode::new(1, NodeType::Normal, 0),
                MissionNode::new(2, NodeType::Normal, 0),
                MissionNode::new(3, NodeType::Exit, 0),
            ],
            vec![Edge::new(0, 1), Edge::new(0, 2), Edge::new(1, 3), Edge::new(2, 3)],
        );
        for seed in 0..20 {
            let l = graph_to_layout(&g, &mut Stream::from_seed(seed)).unwrap();
            assert!(check_layout(&l, &g).is_empty(), "{:?}", check_layout(&l, &g));
        }
    }
}
