//! Mission graph grammar.
//!
//! A floor's quest structure is a [`MissionGraph`]: typed rooms annotated
//! with the number of locked doors that must be opened to enter them. Graphs
//! grow from [`initial_graph`] by applying [`GraphRule`]s in the order given
//! by a floor band's [`Recipe`].

mod graph;
mod recipe;
mod rules;
mod validate;

pub use graph::{Edge, MissionGraph, MissionNode, NodeId, NodeType, Rooted};
pub use recipe::{
    generate_mission_graph, generate_mission_graph_logged, GenerationLog, LogEntry, Recipe,
    RecipeBand, RecipeStep, RecipeTable, GENERATION_RETRIES, MAX_ROOMS,
};
pub use rules::{
    apply_rule, find_matches, GraphRule, LevelConstraint, LevelExpr, Match, PatternNode, RhsNode,
    RuleLibrary, RuleSide,
};
pub use validate::{validate_mission_graph, Violation, MAX_DEGREE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("match does not belong to this graph")]
    StaleMatch,
    #[error("rewrite broke mission graph invariants: {0:?}")]
    InvariantViolation(Vec<Violation>),
    #[error("no valid mission graph for floor {floor} after {attempts} attempts")]
    GenerationFailed { floor: u32, attempts: u32 },
    #[error("floor {0} is outside every recipe band")]
    FloorOutOfRange(u32),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("malformed rule `{rule}`: {reason}")]
    MalformedRule { rule: String, reason: String },
    #[error("invalid recipe table: {0}")]
    InvalidRecipeTable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// The two-room graph every floor starts from: a start room joined to an
/// exit room, both at access level zero.
pub fn initial_graph() -> MissionGraph {
    MissionGraph::from_parts(
        vec![
            MissionNode::new(0, NodeType::Start, 0),
            MissionNode::new(1, NodeType::Exit, 0),
        ],
        vec![Edge::new(0, 1)],
    )
}
