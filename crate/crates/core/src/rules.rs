//! Rules with interface inclusions and their constructive application.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, NodeId};
use crate::morphism::{all_isomorphisms, find_morphisms, node_compatible, search, Morphism, SearchSpec};

/// Which side of a rule a diagnostic refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {rule}: interface node {id} is not included in the {side} graph")]
    NodeNotIncluded { rule: String, id: NodeId, side: Side },
    #[error("rule {rule}: interface edge {id} is not included in the {side} graph")]
    EdgeNotIncluded { rule: String, id: EdgeId, side: Side },
    #[error("rule {rule}: node {id} of the {side} graph lacks a label or rootedness")]
    NotTotal { rule: String, id: NodeId, side: Side },
    #[error("invalid match: {0}")]
    InvalidMatch(String),
    #[error("match violates the dangling condition at host node {0}")]
    DanglingViolation(NodeId),
}

/// A rule `L ← K → R` whose interface is included in both sides by id.
#[derive(Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub left: Graph,
    pub interface: Graph,
    pub right: Graph,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::print_rule(self))
    }
}

fn check_inclusion(name: &str, k: &Graph, g: &Graph, side: Side) -> Result<(), RuleError> {
    for (v, n) in k.nodes() {
        match g.node(v) {
            Some(m) if node_compatible(n, m, false) => {}
            _ => return Err(RuleError::NodeNotIncluded { rule: name.to_string(), id: v, side }),
        }
    }
    for (e, edge) in k.edges() {
        if g.edge(e) != Some(edge) {
            return Err(RuleError::EdgeNotIncluded { rule: name.to_string(), id: e, side });
        }
    }
    Ok(())
}

impl Rule {
    /// Builds a rule, checking that `interface` is included in both sides and
    /// that both sides are totally labelled and totally rooted.
    pub fn new(name: impl Into<String>, left: Graph, interface: Graph, right: Graph) -> Result<Rule, RuleError> {
        let name = name.into();
        check_inclusion(&name, &interface, &left, Side::Left)?;
        check_inclusion(&name, &interface, &right, Side::Right)?;
        for (g, side) in [(&left, Side::Left), (&right, Side::Right)] {
            if let Some((v, _)) = g.nodes().find(|(_, n)| n.label.is_none() || n.rooted.is_none()) {
                return Err(RuleError::NotTotal { rule: name, id: v, side });
            }
        }
        Ok(Rule { name, left, interface, right })
    }

    /// Nodes of `L \ K`, ascending.
    pub fn deleted_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.left.node_ids().filter(|v| !self.interface.contains_node(*v))
    }

    /// Edges of `L \ K`, ascending.
    pub fn deleted_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.left.edge_ids().filter(|e| !self.interface.contains_edge(*e))
    }

    /// Nodes of `R \ K`, ascending.
    pub fn created_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.right.node_ids().filter(|v| !self.interface.contains_node(*v))
    }

    /// Edges of `R \ K`, ascending.
    pub fn created_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.right.edge_ids().filter(|e| !self.interface.contains_edge(*e))
    }

    /// Every node of every side is unrooted and labelled, interface included.
    pub fn is_standard(&self) -> bool {
        [&self.left, &self.interface, &self.right]
            .iter()
            .all(|g| g.nodes().all(|(_, n)| n.label.is_some() && n.rooted == Some(false)))
    }

    /// Strictly fewer items on the right than on the left.
    pub fn is_size_reducing(&self) -> bool {
        self.right.size() < self.left.size()
    }
}

fn inverse_name(name: &str) -> String {
    match name.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{name}^-1"),
    }
}

/// The rule with left and right swapped.
pub fn invert(r: &Rule) -> Rule {
    Rule { name: inverse_name(&r.name), left: r.right.clone(), interface: r.interface.clone(), right: r.left.clone() }
}

/// The rule whose interface keeps only the node ids, with no edges, labels
/// or rootedness.
pub fn normalize(r: &Rule) -> Rule {
    let mut k = Graph::new();
    for v in r.interface.node_ids() {
        k.add_node(v, crate::graph::Node::blank()).unwrap();
    }
    Rule { name: r.name.clone(), left: r.left.clone(), interface: k, right: r.right.clone() }
}

/// Whether isomorphisms `f: L1 → L2` and `g: R1 → R2` exist that agree on
/// `K1` and restrict to an isomorphism `K1 → K2`.
pub fn rule_isomorphic(r1: &Rule, r2: &Rule) -> bool {
    if r1.right.node_count() != r2.right.node_count() || r1.right.edge_count() != r2.right.edge_count() {
        return false;
    }
    for f in all_isomorphisms(&r1.left, &r2.left) {
        let fk = f.restrict(&r1.interface);
        if !fk.is_isomorphism(&r1.interface, &r2.interface) {
            continue;
        }
        let spec = SearchSpec {
            injective: true,
            strict: true,
            node_pins: fk.node_map.clone(),
            edge_pins: fk.edge_map.clone(),
        };
        let mut found = false;
        search(&r1.right, &r2.right, &spec, |_| {
            found = true;
            ControlFlow::Break(())
        });
        if found {
            return true;
        }
    }
    false
}

fn validate_match(r: &Rule, host: &Graph, m: &Morphism) -> Result<(), RuleError> {
    if !m.is_morphism(&r.left, host) {
        return Err(RuleError::InvalidMatch(format!("not a morphism from the left side of {}", r.name)));
    }
    if !m.is_injective() {
        return Err(RuleError::InvalidMatch(format!("match of {} is not injective", r.name)));
    }
    Ok(())
}

/// The dangling test for an already validated injective match: every node
/// to be deleted has no host edges beyond the matched ones. Since the match
/// is injective on edges, comparing degrees suffices.
pub(crate) fn dangling_ok(r: &Rule, host: &Graph, m: &Morphism) -> Option<NodeId> {
    r.deleted_nodes().map(|v| (v, m.node(v))).find(|&(v, w)| host.degree(w) != r.left.degree(v)).map(|(_, w)| w)
}

/// Whether no host edge outside the match touches a node the rule deletes.
pub fn check_dangling(r: &Rule, host: &Graph, m: &Morphism) -> Result<bool, RuleError> {
    validate_match(r, host, m)?;
    Ok(dangling_ok(r, host, m).is_none())
}

/// Partial map from host nodes to result nodes.
pub type Track = BTreeMap<NodeId, NodeId>;

/// `first` followed by `second`, defined where both are.
pub fn compose_tracks(first: &Track, second: &Track) -> Track {
    first.iter().filter_map(|(k, v)| second.get(v).map(|w| (*k, *w))).collect()
}

/// One direct derivation `G ⇒ H` with its intermediate graph and track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub rule: Rule,
    pub matching: Morphism,
    pub host: Graph,
    pub intermediate: Graph,
    pub result: Graph,
    pub comatch: Morphism,
    pub track: Track,
}

/// Deletes the matched `L \ K` and un-defines labels and rootedness that the
/// interface leaves undefined.
pub(crate) fn delete_phase(g: &mut Graph, r: &Rule, m: &Morphism) {
    for e in r.deleted_edges() {
        g.remove_edge(m.edge(e)).expect("matched edge");
    }
    for v in r.deleted_nodes() {
        g.remove_node(m.node(v)).expect("dangling condition holds");
    }
    for (v, n) in r.interface.nodes() {
        let w = m.node(v);
        if n.label.is_none() {
            g.set_label(w, None).unwrap();
        }
        if n.rooted.is_none() {
            g.set_rooted(w, None).unwrap();
        }
    }
}

/// Adds `R \ K` with fresh ids and re-defines interface labels and
/// rootedness from `R`. Returns the comatch.
pub(crate) fn add_phase(g: &mut Graph, r: &Rule, m: &Morphism) -> Morphism {
    let mut comatch = Morphism::default();
    for (v, n) in r.interface.nodes() {
        let w = m.node(v);
        let rn = r.right.node(v).unwrap();
        if n.label.is_none() {
            g.set_label(w, rn.label.clone()).unwrap();
        }
        if n.rooted.is_none() {
            g.set_rooted(w, rn.rooted).unwrap();
        }
        comatch.node_map.insert(v, w);
    }
    for (next, v) in (g.next_node_id()..).zip(r.created_nodes()) {
        g.add_node(next, r.right.node(v).unwrap().clone()).expect("fresh node id");
        comatch.node_map.insert(v, next);
    }
    for e in r.interface.edge_ids() {
        comatch.edge_map.insert(e, m.edge(e));
    }
    for (next, e) in (g.next_edge_id()..).zip(r.created_edges()) {
        let edge = r.right.edge(e).unwrap();
        let img = Edge::new(comatch.node(edge.src), comatch.node(edge.tgt), edge.label.clone());
        g.add_edge(next, img).expect("fresh edge id");
        comatch.edge_map.insert(e, next);
    }
    comatch
}

/// Applies `r` at the injective match `m` into `host`.
pub fn apply(r: &Rule, host: &Graph, m: &Morphism) -> Result<DerivationStep, RuleError> {
    validate_match(r, host, m)?;
    if let Some(w) = dangling_ok(r, host, m) {
        return Err(RuleError::DanglingViolation(w));
    }
    let mut intermediate = host.clone();
    delete_phase(&mut intermediate, r, m);
    let mut result = intermediate.clone();
    let comatch = add_phase(&mut result, r, m);
    let track = intermediate.node_ids().map(|v| (v, v)).collect();
    Ok(DerivationStep {
        rule: r.clone(),
        matching: m.clone(),
        host: host.clone(),
        intermediate,
        result,
        comatch,
        track,
    })
}

/// Injective matches of `r` into `g` satisfying the dangling condition,
/// sorted by node map.
pub fn matches(r: &Rule, g: &Graph) -> Vec<Morphism> {
    find_morphisms(&r.left, g, true).into_iter().filter(|m| dangling_ok(r, g, m).is_none()).collect()
}

/// Every direct derivation from `g`, in rule order then match order.
pub fn successors(rules: &[Rule], g: &Graph) -> Vec<DerivationStep> {
    rules.iter().flat_map(|r| matches(r, g).into_iter().map(move |m| apply(r, g, &m).expect("valid match"))).collect()
}
