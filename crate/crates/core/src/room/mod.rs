//! Room templates and their instantiation.
//!
//! A template is a square grid of characters (3, 4 or 5 wide). A character
//! either names a concrete tile or refers to a category, a weighted table
//! from which the tile is drawn when the room is instantiated. The schema is
//! documented in `docs/templates.md`.

mod instantiate;
mod puzzle;

pub use instantiate::{
    instantiate_room, is_jumpable, is_walkable, RoomDefect, RoomInstance, RoomRequirements,
    RESAMPLE_LIMIT,
};
pub use puzzle::{check_puzzle_solvable, puzzle_witness, PuzzleMove};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Direction;
use crate::layout::RoomKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoomError {
    #[error("template parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("no template for {kind:?} rooms of size {size}")]
    MissingTemplate { kind: RoomKind, size: u8 },
    #[error("template `{template}` does not apply to {kind:?} rooms")]
    NotApplicable { template: String, kind: RoomKind },
    #[error("template `{template}` produced no valid room in {attempts} attempts")]
    InstantiationFailed { template: String, attempts: u32 },
    #[error("not a puzzle room with exactly one block and one goal")]
    NotAPuzzleRoom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileType {
    Floor,
    Wall,
    Pit,
    Spawn,
    Stairs,
    KeyItem,
    DoorAnchor(Direction),
    Block,
    BlockGoal,
    TimeOrb,
    EnemySpawn,
    PlatformTrack,
}

impl TileType {
    /// Tiles that can be named in templates, with their characters.
    pub const GLYPHS: [(char, TileType); 11] = [
        ('.', TileType::Floor),
        ('#', TileType::Wall),
        ('_', TileType::Pit),
        ('S', TileType::Spawn),
        ('X', TileType::Stairs),
        ('K', TileType::KeyItem),
        ('B', TileType::Block),
        ('G', TileType::BlockGoal),
        ('o', TileType::TimeOrb),
        ('e', TileType::EnemySpawn),
        ('=', TileType::PlatformTrack),
    ];

    pub fn from_glyph(c: char) -> Option<Self> {
        Self::GLYPHS.iter().find(|(g, _)| *g == c).map(|(_, t)| *t)
    }

    pub fn glyph(self) -> char {
        match self {
            TileType::DoorAnchor(_) => '+',
            t => Self::GLYPHS
                .iter()
                .find(|(_, x)| *x == t)
                .map(|(g, _)| *g)
                .unwrap_or('?'),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TileType::Floor => "floor",
            TileType::Wall => "wall",
            TileType::Pit => "pit",
            TileType::Spawn => "spawn",
            TileType::Stairs => "stairs",
            TileType::KeyItem => "key_item",
            TileType::DoorAnchor(_) => "door_anchor",
            TileType::Block => "block",
            TileType::BlockGoal => "block_goal",
            TileType::TimeOrb => "time_orb",
            TileType::EnemySpawn => "enemy_spawn",
            TileType::PlatformTrack => "platform_track",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::GLYPHS.iter().map(|(_, t)| *t).find(|t| t.name() == s)
    }

    /// Tiles the agent falls through unless something holds it up.
    pub fn is_chasm(self) -> bool {
        matches!(self, TileType::Pit | TileType::PlatformTrack)
    }

    /// Tiles a category may produce. Items with per-room quotas are
    /// excluded.
    fn sampleable(self) -> bool {
        matches!(
            self,
            TileType::Floor
                | TileType::Wall
                | TileType::Pit
                | TileType::TimeOrb
                | TileType::EnemySpawn
                | TileType::PlatformTrack
        )
    }
}

/// One template position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellSpec {
    Concrete(TileType),
    Category(String),
}

/// Weighted tile table. Entries are kept in tile order.
#[derive(Clone, Debug, PartialEq)]
pub struct Category {
    pub weights: Vec<(TileType, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoomTemplate {
    pub id: String,
    pub size: u8,
    pub kinds: Vec<RoomKind>,
    /// Row-major, `size * size` entries.
    pub cells: Vec<CellSpec>,
}

impl RoomTemplate {
    pub fn applies_to(&self, kind: RoomKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn cell(&self, x: usize, y: usize) -> &CellSpec {
        &self.cells[y * self.size as usize + x]
    }
}

/// Immutable, indexed set of templates and category tables.
#[derive(Clone, Debug, PartialEq)]
pub struct TemplateLibrary {
    templates: Vec<RoomTemplate>,
    categories: BTreeMap<String, Category>,
    legend: BTreeMap<char, String>,
    index: BTreeMap<(RoomKind, u8), Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TemplateFile {
    categories: BTreeMap<String, BTreeMap<String, f64>>,
    legend: BTreeMap<char, String>,
    templates: Vec<TemplateEntry>,
}

#[derive(Serialize, Deserialize)]
struct TemplateEntry {
    id: String,
    kinds: Vec<RoomKind>,
    rows: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    legend: BTreeMap<char, String>,
}

const BUILTIN_TEMPLATES: &str = include_str!("../../data/templates.json");

fn perr(location: impl Into<String>, message: impl Into<String>) -> RoomError {
    RoomError::Parse {
        location: location.into(),
        message: message.into(),
    }
}

impl TemplateLibrary {
    /// The templates shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TEMPLATES).expect("built-in templates are valid")
    }

    pub fn from_json(src: &str) -> Result<Self, RoomError> {
        let file: TemplateFile = serde_json::from_str(src).map_err(|e| {
            perr(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;

        let mut categories = BTreeMap::new();
        for (name, table) in &file.categories {
            let loc = format!("categories.{name}");
            let mut weights = Vec::new();
            for (tile, w) in table {
                let t = TileType::from_name(tile)
                    .ok_or_else(|| perr(&loc, format!("unknown tile `{tile}`")))?;
                if !t.sampleable() {
                    return Err(perr(&loc, format!("tile `{tile}` cannot be drawn from a category")));
                }
                if !(w.is_finite() && *w >= 0.0) {
                    return Err(perr(&loc, format!("weight for `{tile}` must be non-negative")));
                }
                weights.push((t, *w));
            }
            weights.sort_by_key(|w| w.0);
            if weights.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
                return Err(perr(&loc, "weights sum to zero"));
            }
            categories.insert(name.clone(), Category { weights });
        }

        let check_legend = |legend: &BTreeMap<char, String>, loc: &str| -> Result<(), RoomError> {
            for (c, cat) in legend {
                if TileType::from_glyph(*c).is_some() {
                    return Err(perr(loc, format!("legend character `{c}` shadows a tile")));
                }
                if !categories.contains_key(cat) {
                    return Err(perr(loc, format!("unknown category `{cat}`")));
                }
            }
            Ok(())
        };
        check_legend(&file.legend, "legend")?;

        let mut templates = Vec::new();
        let mut ids = BTreeSet::new();
        for (i, entry) in file.templates.iter().enumerate() {
            let loc = format!("templates[{i}] (`{}`)", entry.id);
            if !ids.insert(entry.id.clone()) {
                return Err(perr(&loc, "duplicate template id"));
            }
            if entry.kinds.is_empty() {
                return Err(perr(&loc, "no room kinds"));
            }
            check_legend(&entry.legend, &loc)?;
            let size = entry.rows.len();
            if !(3..=5).contains(&size) {
                return Err(perr(&loc, format!("{size} rows; templates are 3, 4 or 5 square")));
            }
            let mut cells = Vec::new();
            for (r, row) in entry.rows.iter().enumerate() {
                let chars: Vec<char> = row.chars().collect();
                if chars.len() != size {
                    return Err(perr(
                        format!("{loc}.rows[{r}]"),
                        format!("{} columns, expected {size}", chars.len()),
                    ));
                }
                for c in chars {
                    let spec = if let Some(t) = TileType::from_glyph(c) {
                        CellSpec::Concrete(t)
                    } else if let Some(cat) = entry.legend.get(&c).or(file.legend.get(&c)) {
                        CellSpec::Category(cat.clone())
                    } else {
                        return Err(perr(format!("{loc}.rows[{r}]"), format!("unknown character `{c}`")));
                    };
                    cells.push(spec);
                }
            }
            let count = |t: TileType| {
                cells
                    .iter()
                    .filter(|c| **c == CellSpec::Concrete(t))
                    .count()
            };
            let only = |t: TileType, kind: RoomKind| -> Result<(), RoomError> {
                if count(t) > 0 && entry.kinds.iter().any(|k| *k != kind) {
                    return Err(perr(&loc, format!("{} only belongs in {kind:?} rooms", t.name())));
                }
                Ok(())
            };
            only(TileType::Spawn, RoomKind::Start)?;
            only(TileType::Stairs, RoomKind::Exit)?;
            only(TileType::KeyItem, RoomKind::Key)?;
            only(TileType::Block, RoomKind::Puzzle)?;
            only(TileType::BlockGoal, RoomKind::Puzzle)?;
            templates.push(RoomTemplate {
                id: entry.id.clone(),
                size: size as u8,
                kinds: entry.kinds.clone(),
                cells,
            });
        }

        let mut index: BTreeMap<(RoomKind, u8), Vec<usize>> = BTreeMap::new();
        for (i, t) in templates.iter().enumerate() {
            for k in &t.kinds {
                index.entry((*k, t.size)).or_default().push(i);
            }
        }
        for kind in RoomKind::ALL {
            for size in [3, 4, 5] {
                if !index.contains_key(&(kind, size)) {
                    return Err(RoomError::MissingTemplate { kind, size });
                }
            }
        }
        Ok(Self {
            templates,
            categories,
            legend: file.legend,
            index,
        })
    }

    /// Canonical JSON form of the library.
    pub fn to_json(&self) -> String {
        let file = TemplateFile {
            categories: self
                .categories
                .iter()
                .map(|(name, c)| {
                    (
                        name.clone(),
                        c.weights.iter().map(|(t, w)| (t.name().to_string(), *w)).collect(),
                    )
                })
                .collect(),
            legend: self.legend.clone(),
            templates: self
                .templates
                .iter()
                .map(|t| {
                    // Each category referenced by the template gets a glyph:
                    // the library legend's if it has one, otherwise a fresh
                    // per-template one.
                    let mut local: BTreeMap<char, String> = BTreeMap::new();
                    let glyph_for = |cat: &str, local: &mut BTreeMap<char, String>| -> char {
                        if let Some((c, _)) = self.legend.iter().find(|(_, v)| v.as_str() == cat) {
                            return *c;
                        }
                        if let Some((c, _)) = local.iter().find(|(_, v)| v.as_str() == cat) {
                            return *c;
                        }
                        let c = ('a'..='z')
                            .chain('0'..='9')
                            .find(|c| {
                                TileType::from_glyph(*c).is_none()
                                    && !self.legend.contains_key(c)
                                    && !local.contains_key(c)
                            })
                            .expect("enough glyphs");
                        local.insert(c, cat.to_string());
                        c
                    };
                    let n = t.size as usize;
                    let rows = (0..n)
                        .map(|y| {
                            (0..n)
                                .map(|x| match t.cell(x, y) {
                                    CellSpec::Concrete(tile) => tile.glyph(),
                                    CellSpec::Category(cat) => glyph_for(cat, &mut local),
                                })
                                .collect()
                        })
                        .collect();
                    TemplateEntry {
                        id: t.id.clone(),
                        kinds: t.kinds.clone(),
                        rows,
                        legend: local,
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("templates serialize")
    }

    pub fn templates(&self) -> &[RoomTemplate] {
        &self.templates
    }

    pub fn template(&self, id: &str) -> Option<&RoomTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn category(&self, name: &str) -> Option<&Category> {
        self.categories.get(name)
    }

    /// Templates usable for a room of this kind and size, in file order.
    pub fn candidates(&self, kind: RoomKind, size: u8) -> Result<Vec<&RoomTemplate>, RoomError> {
        self.index
            .get(&(kind, size))
            .map(|v| v.iter().map(|i| &self.templates[*i]).collect())
            .ok_or(RoomError::MissingTemplate { kind, size })
    }

    /// Every template applicable to `kind`, any size.
    pub fn for_kind(&self, kind: RoomKind) -> Vec<&RoomTemplate> {
        self.templates.iter().filter(|t| t.applies_to(kind)).collect()
    }
}
