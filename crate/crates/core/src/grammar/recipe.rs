use serde::{Deserialize, Serialize};

use super::{
    apply_rule, find_matches, initial_graph, validate_mission_graph, GrammarError, MissionGraph,
    NodeType, RuleLibrary,
};
use crate::rng::{Stage, Stream};

/// Rooms per floor, connectors excluded.
pub const MAX_ROOMS: usize = 16;
/// Attempts per floor before giving up; attempt `i` uses sub-stream `i`.
pub const GENERATION_RETRIES: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeStep {
    pub rule: String,
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub steps: Vec<RecipeStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeBand {
    pub first_floor: u32,
    pub last_floor: u32,
    #[serde(flatten)]
    pub recipe: Recipe,
}

/// Floor bands, each with its own recipe. Bands are contiguous from floor 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeTable {
    pub bands: Vec<RecipeBand>,
}

const BUILTIN_RECIPES: &str = include_str!("../../data/recipes.json");

impl RecipeTable {
    pub fn from_json(src: &str, rules: &RuleLibrary) -> Result<Self, GrammarError> {
        let table: RecipeTable =
            serde_json::from_str(src).map_err(|e| GrammarError::Parse(e.to_string()))?;
        table.check(rules)?;
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recipes serialize")
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_RECIPES, &RuleLibrary::builtin()).expect("built-in recipes valid")
    }

    /// Highest floor covered by a band.
    pub fn max_floor(&self) -> u32 {
        self.bands.last().map_or(0, |b| b.last_floor)
    }

    pub fn recipe_for(&self, floor: u32) -> Result<&Recipe, GrammarError> {
        self.bands
            .iter()
            .find(|b| (b.first_floor..=b.last_floor).contains(&floor))
            .map(|b| &b.recipe)
            .ok_or(GrammarError::FloorOutOfRange(floor))
    }

    /// Expected number of fresh nodes of type `t` one pass of the band's
    /// recipe asks for.
    pub fn expected_creations(recipe: &Recipe, rules: &RuleLibrary, t: NodeType) -> f64 {
        recipe
            .steps
            .iter()
            .map(|s| {
                let per = rules
                    .get(&s.rule)
                    .map(|r| r.creates().iter().filter(|c| **c == t).count())
                    .unwrap_or(0);
                per as f64 * (s.min + s.max) as f64 / 2.0
            })
            .sum()
    }

    pub fn check(&self, rules: &RuleLibrary) -> Result<(), GrammarError> {
        let bad = |m: String| Err(GrammarError::InvalidRecipeTable(m));
        if self.bands.is_empty() {
            return bad("no bands".into());
        }
        let mut next = 0;
        for b in &self.bands {
            if b.first_floor != next || b.last_floor < b.first_floor {
                return bad(format!(
                    "band {}..={} does not continue from floor {next}",
                    b.first_floor, b.last_floor
                ));
            }
            next = b.last_floor + 1;
            for s in &b.recipe.steps {
                rules.get(&s.rule)?;
                if s.min > s.max {
                    return bad(format!("step `{}` has min > max", s.rule));
                }
            }
        }
        for t in [NodeType::Key, NodeType::Lock, NodeType::Puzzle] {
            for w in self.bands.windows(2) {
                let a = Self::expected_creations(&w[0].recipe, rules, t);
                let b = Self::expected_creations(&w[1].recipe, rules, t);
                if b < a {
                    return bad(format!(
                        "band starting at floor {} expects fewer {t:?} nodes than the band before",
                        w[1].first_floor
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub attempt: u32,
    pub step: usize,
    pub rule: String,
    pub requested: u32,
    pub applied: u32,
    /// Why the step stopped early, if it did.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub entries: Vec<LogEntry>,
    pub attempts: u32,
}

/// Generates the mission graph for one floor. Pure in `(floor, tower_seed)`
/// for a fixed table and library.
pub fn generate_mission_graph(
    floor: u32,
    tower_seed: u64,
    table: &RecipeTable,
    rules: &RuleLibrary,
) -> Result<MissionGraph, GrammarError> {
    generate_mission_graph_logged(floor, tower_seed, table, rules).map(|(g, _)| g)
}

pub fn generate_mission_graph_logged(
    floor: u32,
    tower_seed: u64,
    table: &RecipeTable,
    rules: &RuleLibrary,
) -> Result<(MissionGraph, GenerationLog), GrammarError> {
    let recipe = table.recipe_for(floor)?;
    let mut log = GenerationLog::default();
    for attempt in 0..GENERATION_RETRIES {
        log.attempts = attempt + 1;
        let mut stream = Stream::for_floor(tower_seed, floor, Stage::Mission, attempt as u64);
        let graph = run_recipe(recipe, rules, &mut stream, attempt, &mut log)?;
        if validate_mission_graph(&graph).is_empty() {
            return Ok((graph, log));
        }
    }
    Err(GrammarError::GenerationFailed {
        floor,
        attempts: GENERATION_RETRIES,
    })
}

fn run_recipe(
    recipe: &Recipe,
    rules: &RuleLibrary,
    stream: &mut Stream,
    attempt: u32,
    log: &mut GenerationLog,
) -> Result<MissionGraph, GrammarError> {
    let mut graph = initial_graph();
    for (i, step) in recipe.steps.iter().enumerate() {
        let rule = rules.get(&step.rule)?;
        let requested = stream.between(step.min, step.max);
        let mut entry = LogEntry {
            attempt,
            step: i,
            rule: step.rule.clone(),
            requested,
            applied: 0,
            stopped: None,
        };
        'apply: for _ in 0..requested {
            let mut matches = find_matches(&graph, rule);
            if matches.is_empty() {
                entry.stopped = Some("no match".into());
                break;
            }
            // A match whose rewrite breaks an invariant is dropped and
            // another drawn.
            let next = loop {
                if matches.is_empty() {
                    entry.stopped = Some("no valid match".into());
                    break 'apply;
                }
                let m = matches.swap_remove(stream.below(matches.len()));
                match apply_rule(&graph, rule, &m) {
                    Ok(g) => break g,
                    Err(GrammarError::InvariantViolation(_)) => continue,
                    Err(e) => return Err(e),
                }
            };
            if next.nodes().len() > MAX_ROOMS {
                entry.stopped = Some("room cap".into());
                break;
            }
            graph = next;
            entry.applied += 1;
        }
        log.entries.push(entry);
    }
    Ok(graph)
}
