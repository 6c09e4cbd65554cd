use std::collections::VecDeque;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{check_puzzle_solvable, CellSpec, RoomError, RoomTemplate, TemplateLibrary, TileType};
use crate::geom::{Direction, Pos};
use crate::layout::RoomKind;
use crate::rng::Stream;

/// Draws per template before giving up.
pub const RESAMPLE_LIMIT: u32 = 32;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoomRequirements {
    pub doors: Vec<Direction>,
    /// Side the agent first enters from. `None` for the start room.
    pub entry: Option<Direction>,
}

/// A concrete room: interior plus a one-tile wall border with door anchors
/// carved at side midpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomInstance {
    pub template: String,
    pub kind: RoomKind,
    /// Interior width.
    pub size: u8,
    /// Quarter turns clockwise applied to the template.
    pub rotation: u8,
    pub doors: Vec<Direction>,
    pub entry: Option<Direction>,
    tiles: Vec<TileType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoomDefect {
    MissingDoor(Direction),
    DoorUnreachable(Direction),
    /// Some reachable tile has no way back to this door.
    DoorNoReturn(Direction),
    TileUnreachable(Pos),
    ItemCount {
        tile: TileType,
        found: usize,
        expected: usize,
    },
    PuzzleUnsolvable,
    /// With the block parked on its goal, this door cannot be reached.
    PuzzleBlocksDoor(Direction),
}

impl RoomInstance {
    pub fn side(&self) -> i32 {
        self.size as i32 + 2
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.side() && p.y < self.side()
    }

    pub fn is_interior(&self, p: Pos) -> bool {
        p.x >= 1 && p.y >= 1 && p.x <= self.size as i32 && p.y <= self.size as i32
    }

    /// Tile at `p`; everything outside the room reads as wall.
    pub fn tile(&self, p: Pos) -> TileType {
        if self.in_bounds(p) {
            self.tiles[(p.y * self.side() + p.x) as usize]
        } else {
            TileType::Wall
        }
    }

    pub fn set(&mut self, p: Pos, t: TileType) {
        let side = self.side();
        self.tiles[(p.y * side + p.x) as usize] = t;
    }

    pub fn tiles(&self) -> &[TileType] {
        &self.tiles
    }

    /// Border tile of the door on side `d`.
    pub fn door_pos(&self, d: Direction) -> Pos {
        let mid = 1 + (self.size as i32 - 1) / 2;
        let last = self.side() - 1;
        match d {
            Direction::North => Pos::new(mid, 0),
            Direction::South => Pos::new(mid, last),
            Direction::West => Pos::new(0, mid),
            Direction::East => Pos::new(last, mid),
        }
    }

    /// Side whose door anchor is at `p`, if any.
    pub fn door_at(&self, p: Pos) -> Option<Direction> {
        match self.tile(p) {
            TileType::DoorAnchor(d) if self.in_bounds(p) => Some(d),
            _ => None,
        }
    }

    pub fn find(&self, t: TileType) -> Vec<Pos> {
        self.positions().filter(|p| self.tile(*p) == t).collect()
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> {
        let side = self.side();
        (0..side).flat_map(move |y| (0..side).map(move |x| Pos::new(x, y)))
    }

    pub fn rows(&self) -> Vec<String> {
        let side = self.side();
        (0..side)
            .map(|y| (0..side).map(|x| self.tile(Pos::new(x, y)).glyph()).collect())
            .collect()
    }

    /// Everything wrong with this room; empty means valid.
    pub fn defects(&self) -> Vec<RoomDefect> {
        let mut out = Vec::new();
        for d in &self.doors {
            if self.tile(self.door_pos(*d)) != TileType::DoorAnchor(*d) {
                out.push(RoomDefect::MissingDoor(*d));
            }
        }
        for (tile, expected) in required_items(self.kind) {
            let found = self.find(tile).len();
            if found != expected {
                out.push(RoomDefect::ItemCount {
                    tile,
                    found,
                    expected,
                });
            }
        }
        if !out.is_empty() {
            return out;
        }

        let origin = self.origin();
        let seen = reach(self, origin, |_| false);
        let at = |p: Pos| seen[(p.y * self.side() + p.x) as usize];
        for d in &self.doors {
            if !at(self.door_pos(*d)) {
                out.push(RoomDefect::DoorUnreachable(*d));
            }
        }
        for p in self.positions() {
            if self.is_interior(p) && is_walkable(self.tile(p)) && !at(p) {
                out.push(RoomDefect::TileUnreachable(p));
            }
        }
        for d in &self.doors {
            if returns_to(self, &seen, self.door_pos(*d), |_| false) {
                continue;
            }
            out.push(RoomDefect::DoorNoReturn(*d));
        }

        if self.kind == RoomKind::Puzzle && out.is_empty() {
            if !check_puzzle_solvable(self).unwrap_or(false) {
                out.push(RoomDefect::PuzzleUnsolvable);
            } else {
                let goal = self.find(TileType::BlockGoal)[0];
                let seen = reach(self, origin, |p| p == goal);
                for d in &self.doors {
                    let p = self.door_pos(*d);
                    if !seen[(p.y * self.side() + p.x) as usize]
                        || !returns_to(self, &seen, p, |p| p == goal)
                    {
                        out.push(RoomDefect::PuzzleBlocksDoor(*d));
                    }
                }
            }
        }
        out
    }

    /// Where an agent first stands: the entry anchor, else the spawn, else
    /// any door or walkable tile.
    pub fn origin(&self) -> Pos {
        if let Some(e) = self.entry {
            return self.door_pos(e);
        }
        if let Some(p) = self.find(TileType::Spawn).first() {
            return *p;
        }
        if let Some(d) = self.doors.first() {
            return self.door_pos(*d);
        }
        self.positions()
            .find(|p| self.is_interior(*p) && is_walkable(self.tile(*p)))
            .unwrap_or(Pos::new(1, 1))
    }
}

/// Quota items each kind must hold exactly.
fn required_items(kind: RoomKind) -> Vec<(TileType, usize)> {
    let one = |k| if kind == k { 1 } else { 0 };
    vec![
        (TileType::Spawn, one(RoomKind::Start)),
        (TileType::Stairs, one(RoomKind::Exit)),
        (TileType::KeyItem, one(RoomKind::Key)),
        (TileType::Block, one(RoomKind::Puzzle)),
        (TileType::BlockGoal, one(RoomKind::Puzzle)),
    ]
}

/// Tiles an agent can stand on.
pub fn is_walkable(t: TileType) -> bool {
    !matches!(t, TileType::Wall | TileType::Pit | TileType::PlatformTrack)
}

/// Tiles an agent can jump over.
pub fn is_jumpable(t: TileType) -> bool {
    !matches!(t, TileType::Wall | TileType::Block | TileType::DoorAnchor(_))
}

/// Tiles one step or jump away from `p`. Door anchors are only entered,
/// never left, unless `p` is where the walk began.
fn successors(room: &RoomInstance, p: Pos, from: Pos, solid: &impl Fn(Pos) -> bool) -> Vec<Pos> {
    if p != from && matches!(room.tile(p), TileType::DoorAnchor(_)) {
        return Vec::new();
    }
    let ok = |q: Pos| room.in_bounds(q) && is_walkable(room.tile(q)) && !solid(q);
    let mut out = Vec::with_capacity(8);
    for d in Direction::ALL {
        let one = p.step(d);
        let two = p.step_n(d, 2);
        if ok(one) {
            out.push(one);
        }
        if room.in_bounds(one) && is_jumpable(room.tile(one)) && !solid(one) && room.is_interior(two) && ok(two) {
            out.push(two);
        }
    }
    out
}

/// Flood fill with one-tile steps and two-tile jumps. Jumps land inside
/// the room only. `solid` marks extra blocked tiles.
pub(crate) fn reach(room: &RoomInstance, from: Pos, solid: impl Fn(Pos) -> bool) -> Vec<bool> {
    let side = room.side();
    let idx = |p: Pos| (p.y * side + p.x) as usize;
    let mut seen = vec![false; (side * side) as usize];
    let mut queue = VecDeque::from([from]);
    seen[idx(from)] = true;
    while let Some(p) = queue.pop_front() {
        for t in successors(room, p, from, &solid) {
            if !seen[idx(t)] {
                seen[idx(t)] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Whether `target` can be reached again from every interior tile marked in
/// `seen`.
fn returns_to(room: &RoomInstance, seen: &[bool], target: Pos, solid: impl Fn(Pos) -> bool) -> bool {
    let side = room.side();
    let idx = |p: Pos| (p.y * side + p.x) as usize;
    let mut back = vec![false; seen.len()];
    back[idx(target)] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for p in room.positions() {
            if back[idx(p)] || !room.is_interior(p) || !is_walkable(room.tile(p)) || solid(p) {
                continue;
            }
            if successors(room, p, p, &solid).into_iter().any(|q| back[idx(q)]) {
                back[idx(p)] = true;
                changed = true;
            }
        }
    }
    room.positions()
        .filter(|p| room.is_interior(*p) && seen[idx(*p)])
        .all(|p| back[idx(p)])
}

fn rotated(template: &RoomTemplate, rotation: u8) -> Vec<&CellSpec> {
    let n = template.size as usize;
    let mut out = Vec::with_capacity(n * n);
    for y in 0..n {
        for x in 0..n {
            let (mut sx, mut sy) = (x, y);
            // Undo `rotation` clockwise quarter turns.
            for _ in 0..rotation {
                (sx, sy) = (sy, n - 1 - sx);
            }
            out.push(template.cell(sx, sy));
        }
    }
    out
}

fn draw(
    library: &TemplateLibrary,
    template: &RoomTemplate,
    kind: RoomKind,
    req: &RoomRequirements,
    stream: &mut Stream,
) -> RoomInstance {
    let rotation = stream.below(4) as u8;
    let n = template.size as i32;
    let side = n + 2;
    let mut tiles = vec![TileType::Wall; (side * side) as usize];
    for (i, spec) in rotated(template, rotation).into_iter().enumerate() {
        let (x, y) = (i as i32 % n + 1, i as i32 / n + 1);
        tiles[(y * side + x) as usize] = match spec {
            CellSpec::Concrete(t) => *t,
            CellSpec::Category(name) => {
                let cat = library.category(name).expect("categories resolved at load");
                let w: Vec<f64> = cat.weights.iter().map(|(_, w)| *w).collect();
                cat.weights[stream.weighted(&w)].0
            }
        };
    }
    let mut doors = req.doors.clone();
    doors.sort();
    doors.dedup();
    let mut room = RoomInstance {
        template: template.id.clone(),
        kind,
        size: template.size,
        rotation,
        doors,
        entry: req.entry,
        tiles,
    };
    for d in room.doors.clone() {
        room.set(room.door_pos(d), TileType::DoorAnchor(d));
    }
    room
}

/// Samples the template until the room satisfies every invariant, at most
/// [`RESAMPLE_LIMIT`] times.
pub fn instantiate_room(
    library: &TemplateLibrary,
    template: &RoomTemplate,
    kind: RoomKind,
    required: &RoomRequirements,
    stream: &mut Stream,
) -> Result<RoomInstance, RoomError> {
    if !template.applies_to(kind) {
        return Err(RoomError::NotApplicable {
            template: template.id.clone(),
            kind,
        });
    }
    for _ in 0..RESAMPLE_LIMIT {
        let room = draw(library, template, kind, required, stream);
        if room.defects().is_empty() {
            return Ok(room);
        }
    }
    Err(RoomError::InstantiationFailed {
        template: template.id.clone(),
        attempts: RESAMPLE_LIMIT,
    })
}

#[derive(Serialize, Deserialize)]
struct RoomRepr {
    template: String,
    kind: RoomKind,
    rotation: u8,
    doors: Vec<Direction>,
    entry: Option<Direction>,
    rows: Vec<String>,
}

impl Serialize for RoomInstance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RoomRepr {
            template: self.template.clone(),
            kind: self.kind,
            rotation: self.rotation,
            doors: self.doors.clone(),
            entry: self.entry,
            rows: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RoomInstance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = RoomRepr::deserialize(d)?;
        let side = r.rows.len();
        if !(5..=7).contains(&side) {
            return Err(D::Error::custom("room must be 5 to 7 tiles wide"));
        }
        let mut room = RoomInstance {
            template: r.template,
            kind: r.kind,
            size: (side - 2) as u8,
            rotation: r.rotation,
            doors: r.doors,
            entry: r.entry,
            tiles: Vec::with_capacity(side * side),
        };
        for row in &r.rows {
            if row.chars().count() != side {
                return Err(D::Error::custom("room rows must be square"));
            }
            for c in row.chars() {
                let t = match c {
                    '+' => TileType::DoorAnchor(Direction::North),
                    c => TileType::from_glyph(c)
                        .ok_or_else(|| D::Error::custom(format!("unknown tile `{c}`")))?,
                };
                room.tiles.push(t);
            }
        }
        for d in Direction::ALL {
            let p = room.door_pos(d);
            if matches!(room.tile(p), TileType::DoorAnchor(_)) {
                room.set(p, TileType::DoorAnchor(d));
            }
        }
        Ok(room)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stage;

    fn stream(i: u64) -> Stream {
        Stream::for_floor(7, 0, Stage::Rooms, i)
    }

    fn all_doors(entry: Direction) -> RoomRequirements {
        RoomRequirements {
            doors: Direction::ALL.to_vec(),
            entry: Some(entry),
        }
    }

    #[test]
    fn instances_are_valid_and_deterministic() {
        let lib = TemplateLibrary::builtin();
        for t in lib.templates() {
            for kind in &t.kinds {
                let req = RoomRequirements {
                    doors: vec![Direction::West, Direction::East],
                    entry: Some(Direction::West),
                };
                let a = instantiate_room(&lib, t, *kind, &req, &mut stream(1)).unwrap();
                let b = instantiate_room(&lib, t, *kind, &req, &mut stream(1)).unwrap();
                assert_eq!(a, b);
                assert!(a.defects().is_empty());
                assert_eq!(a.tile(a.door_pos(Direction::West)), TileType::DoorAnchor(Direction::West));
                assert_eq!(a.tile(a.door_pos(Direction::North)), TileType::Wall);
            }
        }
    }

    #[test]
    fn four_door_rooms_instantiate_for_non_puzzle_kinds() {
        let lib = TemplateLibrary::builtin();
        for kind in RoomKind::ALL {
            if kind == RoomKind::Puzzle {
                continue;
            }
            for size in [3, 4, 5] {
                let ok = lib.candidates(kind, size).unwrap().into_iter().any(|t| {
                    instantiate_room(&lib, t, kind, &all_doors(Direction::South), &mut stream(3)).is_ok()
                });
                assert!(ok, "{kind:?} {size}");
            }
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let lib = TemplateLibrary::builtin();
        let t = lib.candidates(RoomKind::Start, 3).unwrap()[0];
        assert!(matches!(
            instantiate_room(&lib, t, RoomKind::Exit, &RoomRequirements::default(), &mut stream(0)),
            Err(RoomError::NotApplicable { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let lib = TemplateLibrary::builtin();
        let t = lib.candidates(RoomKind::Key, 5).unwrap()[0];
        let room = instantiate_room(&lib, t, RoomKind::Key, &all_doors(Direction::North), &mut stream(9)).unwrap();
        let json = serde_json::to_string(&room).unwrap();
        let back: RoomInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, room);
    }

    #[test]
    fn isolated_tile_is_a_defect() {
        let lib = TemplateLibrary::builtin();
        let t = lib.candidates(RoomKind::Normal, 5).unwrap()[0];
        let req = RoomRequirements {
            doors: vec![Direction::West],
            entry: Some(Direction::West),
        };
        let mut room = instantiate_room(&lib, t, RoomKind::Normal, &req, &mut stream(2)).unwrap();
        // Wall in the bottom-right corner tile and its two neighbours.
        let c = Pos::new(5, 5);
        for p in [c, Pos::new(3, 5), Pos::new(5, 3), Pos::new(4, 4)] {
            room.set(p, TileType::Wall);
        }
        room.set(Pos::new(4, 5), TileType::Floor);
        room.set(Pos::new(5, 4), TileType::Floor);
        room.set(c, TileType::Floor);
        assert!(room
            .defects()
            .iter()
            .any(|d| matches!(d, RoomDefect::TileUnreachable(_))));
    }
}
