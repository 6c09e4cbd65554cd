use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    validate_mission_graph, Edge, GrammarError, MissionGraph, MissionNode, NodeId, NodeType,
};

/// Access-level requirement on a left-hand-side node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelConstraint {
    #[default]
    Any,
    Exact(u32),
    /// Same level as the node bound to this mapping number.
    SameAs(u32),
}

/// A left-hand-side node. No `type` means a wildcard.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    pub id: u32,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub node_type: Option<NodeType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<NodeType>,
    #[serde(default)]
    pub level: LevelConstraint,
}

/// `level(of) + plus`, or `plus` alone when `of` is absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelExpr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<u32>,
    #[serde(default)]
    pub plus: u32,
}

/// A right-hand-side node. Mapping numbers seen on the left keep their
/// graph node; new numbers create fresh nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhsNode {
    pub id: u32,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub node_type: Option<NodeType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<LevelExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSide<N> {
    pub nodes: Vec<N>,
    /// On the left, `[a, b]` requires `b` to hang directly below `a` in the
    /// start-rooted tree. On the right, edges are unordered.
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRule {
    pub name: String,
    pub lhs: RuleSide<PatternNode>,
    pub rhs: RuleSide<RhsNode>,
    /// Mapping numbers whose subtree (after the rewrite) gains one access
    /// level.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raise: Vec<u32>,
}

/// One injective binding of left-hand-side mapping numbers to graph nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    /// `(mapping number, node id)` sorted by mapping number.
    pub binding: Vec<(u32, NodeId)>,
    pub graph_digest: u64,
}

impl Match {
    pub fn node(&self, mapping: u32) -> Option<NodeId> {
        self.binding
            .iter()
            .find(|(m, _)| *m == mapping)
            .map(|(_, n)| *n)
    }
}

impl GraphRule {
    fn malformed(&self, reason: impl Into<String>) -> GrammarError {
        GrammarError::MalformedRule {
            rule: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn sorted_lhs(&self) -> Vec<&PatternNode> {
        let mut v: Vec<_> = self.lhs.nodes.iter().collect();
        v.sort_by_key(|p| p.id);
        v
    }

    /// Node types this rule creates.
    pub fn creates(&self) -> Vec<NodeType> {
        let lhs: BTreeSet<u32> = self.lhs.nodes.iter().map(|p| p.id).collect();
        self.rhs
            .nodes
            .iter()
            .filter(|r| !lhs.contains(&r.id))
            .filter_map(|r| r.node_type)
            .collect()
    }

    /// Checks that mapping numbers resolve and that fresh nodes are fully
    /// specified.
    pub fn check(&self) -> Result<(), GrammarError> {
        if self.lhs.nodes.is_empty() {
            return Err(self.malformed("empty left-hand side"));
        }
        let lhs: BTreeSet<u32> = self.lhs.nodes.iter().map(|p| p.id).collect();
        if lhs.len() != self.lhs.nodes.len() {
            return Err(self.malformed("duplicate left-hand mapping number"));
        }
        let rhs: BTreeSet<u32> = self.rhs.nodes.iter().map(|r| r.id).collect();
        if rhs.len() != self.rhs.nodes.len() {
            return Err(self.malformed("duplicate right-hand mapping number"));
        }
        for p in &self.lhs.nodes {
            if let LevelConstraint::SameAs(m) = p.level {
                if !lhs.contains(&m) || m == p.id {
                    return Err(self.malformed(format!("level reference {m} does not resolve")));
                }
            }
        }
        for [a, b] in &self.lhs.edges {
            if !lhs.contains(a) || !lhs.contains(b) || a == b {
                return Err(self.malformed(format!("left edge [{a}, {b}] is invalid")));
            }
        }
        if let Some(missing) = lhs.iter().find(|m| !rhs.contains(m)) {
            return Err(self.malformed(format!("node {missing} would be deleted")));
        }
        for r in &self.rhs.nodes {
            let fresh = !lhs.contains(&r.id);
            if fresh {
                match r.node_type {
                    None => return Err(self.malformed(format!("fresh node {} has no type", r.id))),
                    Some(NodeType::Start | NodeType::Exit) => {
                        return Err(self.malformed("rules may not create start or exit nodes"))
                    }
                    _ => {}
                }
                if r.level.is_none() {
                    return Err(self.malformed(format!("fresh node {} has no level", r.id)));
                }
            } else if matches!(r.node_type, Some(NodeType::Start | NodeType::Exit)) {
                return Err(self.malformed("rules may not retype into start or exit"));
            }
            if let Some(LevelExpr { of: Some(m), .. }) = r.level {
                if !lhs.contains(&m) {
                    return Err(self.malformed(format!("level reference {m} is not on the left")));
                }
            }
        }
        for [a, b] in &self.rhs.edges {
            if !rhs.contains(a) || !rhs.contains(b) || a == b {
                return Err(self.malformed(format!("right edge [{a}, {b}] is invalid")));
            }
        }
        if let Some(m) = self.raise.iter().find(|m| !lhs.contains(m)) {
            return Err(self.malformed(format!("raised node {m} is not on the left")));
        }
        Ok(())
    }
}

fn node_fits(p: &PatternNode, n: &MissionNode) -> bool {
    if let Some(t) = p.node_type {
        if n.node_type != t {
            return false;
        }
    }
    if p.exclude.contains(&n.node_type) {
        return false;
    }
    !matches!(p.level, LevelConstraint::Exact(l) if n.access_level != l)
}

fn binding_fits(
    graph: &MissionGraph,
    rooted: &super::Rooted,
    rule: &GraphRule,
    bound: &BTreeMap<u32, NodeId>,
) -> bool {
    for p in &rule.lhs.nodes {
        let Some(&id) = bound.get(&p.id) else { continue };
        let Some(node) = graph.node(id) else {
            return false;
        };
        if !node_fits(p, node) {
            return false;
        }
        if let LevelConstraint::SameAs(m) = p.level {
            if let Some(other) = bound.get(&m).and_then(|o| graph.node(*o)) {
                if other.access_level != node.access_level {
                    return false;
                }
            }
        }
    }
    for [a, b] in &rule.lhs.edges {
        if let (Some(&x), Some(&y)) = (bound.get(a), bound.get(b)) {
            if !graph.has_edge(x, y) || !rooted.is_child(x, y) {
                return false;
            }
        }
    }
    true
}

/// Every injective binding of the rule's left-hand side onto the graph, in
/// lexicographic order of the bound node ids (taken in mapping-number
/// order).
pub fn find_matches(graph: &MissionGraph, rule: &GraphRule) -> Vec<Match> {
    let pattern = rule.sorted_lhs();
    let rooted = graph.rooted();
    let digest = graph.digest();
    let ids: Vec<NodeId> = graph.nodes().iter().map(|n| n.id).collect();
    let mut out = Vec::new();
    let mut bound = BTreeMap::new();

    #[allow(clippy::too_many_arguments)]
    fn go(
        depth: usize,
        pattern: &[&PatternNode],
        ids: &[NodeId],
        graph: &MissionGraph,
        rooted: &super::Rooted,
        rule: &GraphRule,
        bound: &mut BTreeMap<u32, NodeId>,
        out: &mut Vec<Vec<(u32, NodeId)>>,
    ) {
        if depth == pattern.len() {
            out.push(bound.iter().map(|(m, n)| (*m, *n)).collect());
            return;
        }
        let p = pattern[depth];
        for &id in ids {
            if bound.values().any(|v| *v == id) {
                continue;
            }
            bound.insert(p.id, id);
            if binding_fits(graph, rooted, rule, bound) {
                go(depth + 1, pattern, ids, graph, rooted, rule, bound, out);
            }
            bound.remove(&p.id);
        }
    }

    let mut raw = Vec::new();
    go(
        0, &pattern, &ids, graph, &rooted, rule, &mut bound, &mut raw,
    );
    // Backtracking follows mapping order and ascending ids, so `raw` is
    // already lexicographic.
    for binding in raw {
        out.push(Match {
            binding,
            graph_digest: digest,
        });
    }
    out
}

/// Rewrites `graph` at `m`. The input graph is not modified.
pub fn apply_rule(
    graph: &MissionGraph,
    rule: &GraphRule,
    m: &Match,
) -> Result<MissionGraph, GrammarError> {
    if m.graph_digest != graph.digest() {
        return Err(GrammarError::StaleMatch);
    }
    let bound: BTreeMap<u32, NodeId> = m.binding.iter().copied().collect();
    let lhs_ids: BTreeSet<u32> = rule.lhs.nodes.iter().map(|p| p.id).collect();
    if bound.keys().copied().collect::<BTreeSet<_>>() != lhs_ids {
        return Err(GrammarError::StaleMatch);
    }
    let rooted = graph.rooted();
    if !binding_fits(graph, &rooted, rule, &bound) {
        return Err(GrammarError::StaleMatch);
    }

    let level_of = |mapping: u32| -> u32 {
        graph
            .node(bound[&mapping])
            .map(|n| n.access_level)
            .unwrap_or(0)
    };
    let eval = |e: LevelExpr| e.of.map_or(0, level_of) + e.plus;

    let mut out = graph.clone();
    for [a, b] in &rule.lhs.edges {
        out.remove_edge(Edge::new(bound[a], bound[b]));
    }

    let mut ids = bound.clone();
    let mut next = graph.next_id();
    for r in &rule.rhs.nodes {
        if let Some(&id) = bound.get(&r.id) {
            let node = out.node_mut(id).ok_or(GrammarError::StaleMatch)?;
            if let Some(t) = r.node_type {
                node.node_type = t;
            }
            if let Some(e) = r.level {
                node.access_level = eval(e);
            }
        } else {
            let node = MissionNode::new(
                next,
                r.node_type.expect("checked rule"),
                eval(r.level.expect("checked rule")),
            );
            out.push_node(node);
            ids.insert(r.id, next);
            next += 1;
        }
    }
    for [a, b] in &rule.rhs.edges {
        out.add_edge(Edge::new(ids[a], ids[b]));
    }

    if !rule.raise.is_empty() {
        let rooted = out.rooted();
        let mut raised = BTreeSet::new();
        for mapping in &rule.raise {
            raised.extend(rooted.subtree(ids[mapping]));
        }
        for id in raised {
            if let Some(n) = out.node_mut(id) {
                n.access_level += 1;
            }
        }
    }

    let violations = validate_mission_graph(&out);
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(GrammarError::InvariantViolation(violations))
    }
}

/// Named rules, loaded from `rules.json`.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleLibrary {
    rules: BTreeMap<String, GraphRule>,
}

#[derive(Serialize, Deserialize)]
struct RulesFile {
    rules: Vec<GraphRule>,
}

const BUILTIN_RULES: &str = include_str!("../../data/rules.json");

impl RuleLibrary {
    pub fn new(rules: Vec<GraphRule>) -> Result<Self, GrammarError> {
        let mut map = BTreeMap::new();
        for r in rules {
            r.check()?;
            let name = r.name.clone();
            if map.insert(name.clone(), r).is_some() {
                return Err(GrammarError::Parse(format!("duplicate rule name `{name}`")));
            }
        }
        Ok(Self { rules: map })
    }

    pub fn from_json(src: &str) -> Result<Self, GrammarError> {
        let file: RulesFile =
            serde_json::from_str(src).map_err(|e| GrammarError::Parse(e.to_string()))?;
        Self::new(file.rules)
    }

    pub fn to_json(&self) -> String {
        let file = RulesFile {
            rules: self.rules.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("rules serialize")
    }

    /// The four shipped rule families: `add_normal`, `add_key_lock`,
    /// `add_puzzle` and `add_normal_key`.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_RULES).expect("built-in rules are valid")
    }

    pub fn get(&self, name: &str) -> Result<&GraphRule, GrammarError> {
        self.rules
            .get(name)
            .ok_or_else(|| GrammarError::UnknownRule(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &GraphRule> {
        self.rules.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::initial_graph;

    fn lib() -> RuleLibrary {
        RuleLibrary::builtin()
    }

    /// Independent enumeration: every ordered pair of distinct nodes, kept
    /// when the pair is joined by an edge with the second node one step
    /// further from the start, both at the same level.
    fn brute_force_edge_pairs(g: &MissionGraph) -> Vec<(NodeId, NodeId)> {
        let depth = |id: NodeId| -> u32 {
            // BFS distance from start, recomputed here by relaxation.
            let mut d: BTreeMap<NodeId, u32> = BTreeMap::new();
            d.insert(g.start().unwrap().id, 0);
            for _ in 0..g.nodes().len() {
                for e in g.edges() {
                    for (x, y) in [(e.0, e.1), (e.1, e.0)] {
                        if let Some(&dx) = d.get(&x) {
                            let cand = dx + 1;
                            if d.get(&y).is_none_or(|&dy| cand < dy) {
                                d.insert(y, cand);
                            }
                        }
                    }
                }
            }
            d[&id]
        };
        let mut out = Vec::new();
        for a in g.nodes() {
            for b in g.nodes() {
                if a.id != b.id
                    && g.has_edge(a.id, b.id)
                    && depth(b.id) == depth(a.id) + 1
                    && a.access_level == b.access_level
                {
                    out.push((a.id, b.id));
                }
            }
        }
        out
    }

    #[test]
    fn add_normal_matches_initial_edge_once() {
        let g = initial_graph();
        let rule = lib().get("add_normal").unwrap().clone();
        let m = find_matches(&g, &rule);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].binding, vec![(1, 0), (2, 1)]);
        let pairs: Vec<_> = m.iter().map(|m| (m.binding[0].1, m.binding[1].1)).collect();
        assert_eq!(pairs, brute_force_edge_pairs(&g));
    }

    #[test]
    fn key_pattern_has_no_match_on_initial_graph() {
        let rule = GraphRule {
            name: "needs_key".into(),
            lhs: RuleSide {
                nodes: vec![PatternNode {
                    id: 1,
                    node_type: Some(NodeType::Key),
                    exclude: vec![],
                    level: LevelConstraint::Any,
                }],
                edges: vec![],
            },
            rhs: RuleSide {
                nodes: vec![RhsNode {
                    id: 1,
                    node_type: None,
                    level: None,
                }],
                edges: vec![],
            },
            raise: vec![],
        };
        rule.check().unwrap();
        assert!(find_matches(&initial_graph(), &rule).is_empty());
    }

    #[test]
    fn wildcard_matches_every_node() {
        let g = apply_first(&initial_graph(), "add_normal");
        let rule = GraphRule {
            name: "any".into(),
            lhs: RuleSide {
                nodes: vec![PatternNode {
                    id: 1,
                    node_type: None,
                    exclude: vec![],
                    level: LevelConstraint::Any,
                }],
                edges: vec![],
            },
            rhs: RuleSide {
                nodes: vec![RhsNode {
                    id: 1,
                    node_type: None,
                    level: None,
                }],
                edges: vec![],
            },
            raise: vec![],
        };
        let found: Vec<NodeId> = find_matches(&g, &rule)
            .iter()
            .map(|m| m.binding[0].1)
            .collect();
        assert_eq!(found, vec![0, 1, 2]);
        let types: BTreeSet<_> = found.iter().map(|id| g.node(*id).unwrap().node_type).collect();
        assert_eq!(
            types,
            BTreeSet::from([NodeType::Start, NodeType::Exit, NodeType::Normal])
        );
    }

    fn apply_first(g: &MissionGraph, name: &str) -> MissionGraph {
        let lib = lib();
        let rule = lib.get(name).unwrap();
        let m = find_matches(g, rule).into_iter().next().unwrap();
        apply_rule(g, rule, &m).unwrap()
    }

    #[test]
    fn add_normal_splits_edge() {
        let g0 = initial_graph();
        let g = apply_first(&g0, "add_normal");
        assert_eq!(g0, initial_graph(), "input must be untouched");
        assert_eq!(g.nodes().len(), 3);
        assert_eq!(g.edges(), &[Edge::new(0, 2), Edge::new(1, 2)]);
        assert_eq!(g.node(2).unwrap().node_type, NodeType::Normal);
        assert!(g.nodes().iter().all(|n| n.access_level == 0));
    }

    #[test]
    fn add_key_lock_on_initial_edge() {
        let g = apply_first(&initial_graph(), "add_key_lock");
        let key = g.nodes().iter().find(|n| n.node_type == NodeType::Key).unwrap();
        let lock = g.nodes().iter().find(|n| n.node_type == NodeType::Lock).unwrap();
        assert_eq!(key.access_level, 0);
        assert!(g.has_edge(0, key.id));
        assert_eq!(lock.access_level, 1);
        assert!(g.has_edge(0, lock.id));
        assert!(g.has_edge(lock.id, 1));
        assert!(!g.has_edge(0, 1));
        assert_eq!(g.exit().unwrap().access_level, 1);
        assert!(validate_mission_graph(&g).is_empty());
    }

    #[test]
    fn add_key_lock_raises_whole_subtree() {
        let g = apply_first(&initial_graph(), "add_normal"); // S - N - E
        let lib = lib();
        let rule = lib.get("add_key_lock").unwrap();
        // bind on S -> N so that both N and E are behind the lock
        let m = find_matches(&g, rule)
            .into_iter()
            .find(|m| m.node(1) == Some(0))
            .unwrap();
        let g2 = apply_rule(&g, rule, &m).unwrap();
        assert_eq!(g2.node(2).unwrap().access_level, 1);
        assert_eq!(g2.exit().unwrap().access_level, 1);
    }

    #[test]
    fn stale_match_rejected() {
        let lib = lib();
        let rule = lib.get("add_normal").unwrap();
        let g = initial_graph();
        let m = find_matches(&g, rule).remove(0);
        let other = apply_rule(&g, rule, &m).unwrap();
        assert_eq!(apply_rule(&other, rule, &m), Err(GrammarError::StaleMatch));
        let mut forged = find_matches(&other, rule).remove(0);
        forged.binding[0].1 = 99;
        assert_eq!(apply_rule(&other, rule, &forged), Err(GrammarError::StaleMatch));
    }

    #[test]
    fn puzzle_and_normal_key_rules() {
        let g = apply_first(&initial_graph(), "add_puzzle");
        assert_eq!(g.count(NodeType::Puzzle), 1);
        assert!(!g.has_edge(0, 1));
        let g = apply_first(&initial_graph(), "add_normal_key");
        assert_eq!(g.count(NodeType::Normal), 1);
        assert_eq!(g.count(NodeType::Key), 1);
        let key = g.nodes().iter().find(|n| n.node_type == NodeType::Key).unwrap();
        let normal = g.nodes().iter().find(|n| n.node_type == NodeType::Normal).unwrap();
        assert!(g.has_edge(key.id, normal.id));
        assert!(validate_mission_graph(&g).is_empty());
    }

    #[test]
    fn malformed_rules_rejected() {
        let bad = r#"{"rules":[{"name":"x","lhs":{"nodes":[{"id":1}]},"rhs":{"nodes":[{"id":2,"type":"normal"}]}}]}"#;
        assert!(matches!(
            RuleLibrary::from_json(bad),
            Err(GrammarError::MalformedRule { .. })
        ));
    }

    #[test]
    fn library_json_round_trip() {
        let lib = lib();
        assert_eq!(RuleLibrary::from_json(&lib.to_json()).unwrap(), lib);
    }
}
