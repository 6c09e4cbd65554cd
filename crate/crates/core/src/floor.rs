//! Whole-floor assembly: mission graph, grid layout, rooms and appearance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{generate_mission_graph, GrammarError, MissionGraph, RecipeTable, RuleLibrary};
use crate::layout::{graph_to_layout, solve_floor, Cell, LayoutError, LayoutGrid, RoomKind};
use crate::room::{instantiate_room, RoomError, RoomInstance, RoomRequirements, TemplateLibrary};
use crate::rng::{Stage, Stream};

/// Attempts per floor, each on fresh layout and room streams.
pub const ASSEMBLY_RETRIES: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    Ancient,
    Moorish,
    Industrial,
    Modern,
    Future,
}

impl Theme {
    pub const ALL: [Theme; 5] = [
        Theme::Ancient,
        Theme::Moorish,
        Theme::Industrial,
        Theme::Modern,
        Theme::Future,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightingParams {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// In `[0.5, 1.5]`.
    pub intensity: f64,
    pub color: [f64; 3],
}

impl LightingParams {
    pub const MIN_INTENSITY: f64 = 0.5;
    pub const MAX_INTENSITY: f64 = 1.5;

    fn sample(stream: &mut Stream) -> Self {
        let mut u = |lo: f64, hi: f64| lo + (hi - lo) * stream.unit();
        Self {
            azimuth_deg: u(0.0, 360.0),
            elevation_deg: u(15.0, 75.0),
            intensity: u(Self::MIN_INTENSITY, Self::MAX_INTENSITY),
            color: [u(0.8, 1.0), u(0.8, 1.0), u(0.8, 1.0)],
        }
    }

    /// Intensity quantised to `0..8`.
    pub fn bucket(&self) -> u8 {
        let t = (self.intensity - Self::MIN_INTENSITY) / (Self::MAX_INTENSITY - Self::MIN_INTENSITY);
        ((t * 8.0).floor() as i64).clamp(0, 7) as u8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacedRoom {
    pub cell: Cell,
    pub room: RoomInstance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub floor: u32,
    pub tower_seed: u64,
    pub theme: Theme,
    pub lighting: LightingParams,
    pub mission: MissionGraph,
    pub layout: LayoutGrid,
    /// One per occupied cell, row-major.
    pub rooms: Vec<PlacedRoom>,
    /// Assembly attempt that succeeded, from zero.
    pub attempt: u32,
}

impl FloorPlan {
    pub fn room(&self, cell: Cell) -> Option<&RoomInstance> {
        self.rooms
            .binary_search_by(|r| r.cell.cmp(&cell))
            .ok()
            .map(|i| &self.rooms[i].room)
    }

    pub fn room_index(&self, cell: Cell) -> Option<usize> {
        self.rooms.binary_search_by(|r| r.cell.cmp(&cell)).ok()
    }

    /// JSON with object keys sorted; equal plans give equal strings.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("floor plan serializes")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloorError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("theme pool is empty")]
    EmptyThemePool,
    #[error("floor {floor} could not be assembled in {attempts} attempts: {last}")]
    GenerationFailed { floor: u32, attempts: u32, last: String },
}

/// Rules, recipes and templates bundled together.
#[derive(Clone, Debug)]
pub struct TowerGenerator {
    pub rules: RuleLibrary,
    pub recipes: RecipeTable,
    pub templates: TemplateLibrary,
}

impl TowerGenerator {
    pub fn new(rules: RuleLibrary, recipes: RecipeTable, templates: TemplateLibrary) -> Self {
        Self {
            rules,
            recipes,
            templates,
        }
    }

    pub fn builtin() -> Self {
        Self::new(RuleLibrary::builtin(), RecipeTable::builtin(), TemplateLibrary::builtin())
    }

    pub fn max_floor(&self) -> u32 {
        self.recipes.max_floor()
    }

    pub fn mission_graph(&self, floor: u32, tower_seed: u64) -> Result<MissionGraph, GrammarError> {
        generate_mission_graph(floor, tower_seed, &self.recipes, &self.rules)
    }

    /// Builds floor `floor` of tower `tower_seed`. Pure in its arguments.
    pub fn assemble_floor(
        &self,
        floor: u32,
        tower_seed: u64,
        theme_pool: &[Theme],
    ) -> Result<FloorPlan, FloorError> {
        if theme_pool.is_empty() {
            return Err(FloorError::EmptyThemePool);
        }
        let mission = self.mission_graph(floor, tower_seed)?;
        let mut appearance = Stream::for_floor(tower_seed, floor, Stage::Appearance, 0);
        let theme = *appearance.pick(theme_pool);
        let lighting = LightingParams::sample(&mut appearance);

        let mut last = String::new();
        for attempt in 0..ASSEMBLY_RETRIES {
            let mut layout_stream = Stream::for_floor(tower_seed, floor, Stage::Layout, attempt as u64);
            let layout = match graph_to_layout(&mission, &mut layout_stream) {
                Ok(l) => l,
                Err(e @ LayoutError::InvalidGraph(_)) => {
                    return Err(FloorError::GenerationFailed {
                        floor,
                        attempts: attempt + 1,
                        last: e.to_string(),
                    })
                }
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            let mut room_stream = Stream::for_floor(tower_seed, floor, Stage::Rooms, attempt as u64);
            let rooms = match self.rooms_for(&layout, &mut room_stream) {
                Ok(r) => r,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            if solve_floor(&layout).is_none() {
                last = "layout has no route to the exit".into();
                continue;
            }
            return Ok(FloorPlan {
                floor,
                tower_seed,
                theme,
                lighting,
                mission,
                layout,
                rooms,
                attempt,
            });
        }
        Err(FloorError::GenerationFailed {
            floor,
            attempts: ASSEMBLY_RETRIES,
            last,
        })
    }

    fn rooms_for(&self, layout: &LayoutGrid, stream: &mut Stream) -> Result<Vec<PlacedRoom>, RoomError> {
        let mut out = Vec::new();
        for (cell, slot) in layout.occupied() {
            let req = RoomRequirements {
                doors: layout.door_sides(cell),
                entry: slot.entry,
            };
            let room = self.room_for(slot.kind, &req, stream)?;
            out.push(PlacedRoom { cell, room });
        }
        Ok(out)
    }

    /// Tries a random size first, then the others; within a size, templates
    /// in shuffled order.
    fn room_for(
        &self,
        kind: RoomKind,
        req: &RoomRequirements,
        stream: &mut Stream,
    ) -> Result<RoomInstance, RoomError> {
        let mut sizes = [3u8, 4, 5];
        stream.shuffle(&mut sizes);
        let mut last = RoomError::MissingTemplate { kind, size: sizes[0] };
        for size in sizes {
            let mut candidates = self.templates.candidates(kind, size)?;
            stream.shuffle(&mut candidates);
            for t in candidates {
                match instantiate_room(&self.templates, t, kind, req, stream) {
                    Ok(r) => return Ok(r),
                    Err(e) => last = e,
                }
            }
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::check_layout;

    #[test]
    fn floors_assemble_and_are_pure() {
        let g = TowerGenerator::builtin();
        for floor in [0, 7, 12, 20] {
            for seed in 0..10 {
                let a = g.assemble_floor(floor, seed, &Theme::ALL).unwrap();
                let b = g.assemble_floor(floor, seed, &Theme::ALL).unwrap();
                assert_eq!(a.to_canonical_json(), b.to_canonical_json());
                assert!(check_layout(&a.layout, &a.mission).is_empty());
                assert_eq!(a.rooms.len(), a.layout.occupied().count());
                for r in &a.rooms {
                    assert!(r.room.defects().is_empty());
                }
            }
        }
    }

    #[test]
    fn theme_comes_from_pool() {
        let g = TowerGenerator::builtin();
        for seed in 0..20 {
            let p = g.assemble_floor(3, seed, &[Theme::Modern]).unwrap();
            assert_eq!(p.theme, Theme::Modern);
        }
        assert_eq!(g.assemble_floor(3, 0, &[]), Err(FloorError::EmptyThemePool));
    }

    #[test]
    fn canonical_json_round_trips() {
        let g = TowerGenerator::builtin();
        let p = g.assemble_floor(16, 4, &Theme::ALL).unwrap();
        let back: FloorPlan = serde_json::from_str(&p.to_canonical_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn lighting_bucket_spans_range() {
        let mut l = LightingParams {
            azimuth_deg: 0.0,
            elevation_deg: 45.0,
            intensity: 0.5,
            color: [1.0; 3],
        };
        assert_eq!(l.bucket(), 0);
        l.intensity = 1.5;
        assert_eq!(l.bucket(), 7);
        l.intensity = 1.0;
        assert_eq!(l.bucket(), 4);
    }
}
