//! Graphs with partial node labels, total edge labels and partial rootedness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::label::Label;

pub type NodeId = u64;
pub type EdgeId = u64;

/// Largest id accepted for nodes and edges. Storage is indexed by id.
pub const MAX_ID: u64 = 1 << 26;

/// A node record. `label` and `rooted` are partial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub label: Option<Label>,
    pub rooted: Option<bool>,
}

impl Node {
    pub fn new(label: Option<Label>, rooted: Option<bool>) -> Self {
        Node { label, rooted }
    }

    /// A labelled node with defined rootedness.
    pub fn total(label: impl Into<Label>, rooted: bool) -> Self {
        Node { label: Some(label.into()), rooted: Some(rooted) }
    }

    /// A node with neither label nor rootedness defined.
    pub fn blank() -> Self {
        Node { label: None, rooted: None }
    }

    pub fn is_root(&self) -> bool {
        self.rooted == Some(true)
    }
}

/// An edge record. Edge labels are total.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub tgt: NodeId,
    pub label: Label,
}

impl Edge {
    pub fn new(src: NodeId, tgt: NodeId, label: impl Into<Label>) -> Self {
        Edge { src, tgt, label: label.into() }
    }

    pub fn is_loop(&self) -> bool {
        self.src == self.tgt
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} refers to missing node {node}")]
    MissingNode { edge: EdgeId, node: NodeId },
    #[error("id {0} exceeds the supported maximum")]
    IdTooLarge(u64),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeId),
    #[error("node {0} still has incident edges")]
    NodeHasEdges(NodeId),
}

/// Dense id-indexed storage. No trailing empty slots, so equal contents
/// compare equal and `next_id` is the maximum id plus one.
#[derive(Clone, PartialEq, Eq)]
struct IdMap<T> {
    slots: Vec<Option<T>>,
    len: usize,
}

impl<T> Default for IdMap<T> {
    fn default() -> Self {
        IdMap { slots: Vec::new(), len: 0 }
    }
}

impl<T> IdMap<T> {
    fn get(&self, id: u64) -> Option<&T> {
        self.slots.get(id as usize).and_then(|s| s.as_ref())
    }

    fn get_mut(&mut self, id: u64) -> Option<&mut T> {
        self.slots.get_mut(id as usize).and_then(|s| s.as_mut())
    }

    fn insert(&mut self, id: u64, value: T) {
        let i = id as usize;
        if i >= self.slots.len() {
            self.slots.resize_with(i + 1, || None);
        }
        if self.slots[i].replace(value).is_none() {
            self.len += 1;
        }
    }

    fn remove(&mut self, id: u64) -> Option<T> {
        let old = self.slots.get_mut(id as usize)?.take();
        if old.is_some() {
            self.len -= 1;
            while matches!(self.slots.last(), Some(None)) {
                self.slots.pop();
            }
        }
        old
    }

    fn next_id(&self) -> u64 {
        self.slots.len() as u64
    }

    fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, &T)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|v| (i as u64, v)))
    }
}

#[derive(Clone, PartialEq, Eq)]
struct NodeSlot {
    node: Node,
    out: Vec<EdgeId>,
    inc: Vec<EdgeId>,
}

fn insert_sorted(list: &mut Vec<EdgeId>, e: EdgeId) {
    let pos = list.partition_point(|&x| x < e);
    list.insert(pos, e);
}

fn remove_sorted(list: &mut Vec<EdgeId>, e: EdgeId) {
    if let Ok(pos) = list.binary_search(&e) {
        list.remove(pos);
    }
}

/// A finite graph. Each node keeps sorted incoming and outgoing edge lists
/// and the graph keeps a registry of its root nodes, so degree queries are
/// constant time and root lookup does not scan the node set.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Graph {
    nodes: IdMap<NodeSlot>,
    edges: IdMap<Edge>,
    roots: BTreeSet<NodeId>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len == 0
    }

    /// Number of nodes plus number of edges.
    pub fn size(&self) -> usize {
        self.nodes.len + self.edges.len
    }

    pub fn add_node(&mut self, id: NodeId, node: Node) -> Result<(), GraphError> {
        if id >= MAX_ID {
            return Err(GraphError::IdTooLarge(id));
        }
        if self.nodes.get(id).is_some() {
            return Err(GraphError::DuplicateNode(id));
        }
        if node.is_root() {
            self.roots.insert(id);
        }
        self.nodes.insert(id, NodeSlot { node, out: Vec::new(), inc: Vec::new() });
        Ok(())
    }

    pub fn add_edge(&mut self, id: EdgeId, edge: Edge) -> Result<(), GraphError> {
        if id >= MAX_ID {
            return Err(GraphError::IdTooLarge(id));
        }
        if self.edges.get(id).is_some() {
            return Err(GraphError::DuplicateEdge(id));
        }
        for n in [edge.src, edge.tgt] {
            if self.nodes.get(n).is_none() {
                return Err(GraphError::MissingNode { edge: id, node: n });
            }
        }
        insert_sorted(&mut self.nodes.get_mut(edge.src).unwrap().out, id);
        insert_sorted(&mut self.nodes.get_mut(edge.tgt).unwrap().inc, id);
        self.edges.insert(id, edge);
        Ok(())
    }

    /// Builder form of [`Graph::add_node`]; panics on a conflicting id.
    pub fn with_node(mut self, id: NodeId, node: Node) -> Self {
        self.add_node(id, node).expect("valid node");
        self
    }

    /// Builder form of [`Graph::add_edge`]; panics on a conflicting id.
    pub fn with_edge(mut self, id: EdgeId, src: NodeId, tgt: NodeId, label: impl Into<Label>) -> Self {
        self.add_edge(id, Edge::new(src, tgt, label)).expect("valid edge");
        self
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<Edge, GraphError> {
        let edge = self.edges.remove(id).ok_or(GraphError::UnknownEdge(id))?;
        remove_sorted(&mut self.nodes.get_mut(edge.src).unwrap().out, id);
        remove_sorted(&mut self.nodes.get_mut(edge.tgt).unwrap().inc, id);
        Ok(edge)
    }

    /// Removes an isolated node.
    pub fn remove_node(&mut self, id: NodeId) -> Result<Node, GraphError> {
        let slot = self.nodes.get(id).ok_or(GraphError::UnknownNode(id))?;
        if !slot.out.is_empty() || !slot.inc.is_empty() {
            return Err(GraphError::NodeHasEdges(id));
        }
        self.roots.remove(&id);
        Ok(self.nodes.remove(id).unwrap().node)
    }

    pub fn set_label(&mut self, id: NodeId, label: Option<Label>) -> Result<(), GraphError> {
        let slot = self.nodes.get_mut(id).ok_or(GraphError::UnknownNode(id))?;
        slot.node.label = label;
        Ok(())
    }

    pub fn set_rooted(&mut self, id: NodeId, rooted: Option<bool>) -> Result<(), GraphError> {
        let slot = self.nodes.get_mut(id).ok_or(GraphError::UnknownNode(id))?;
        slot.node.rooted = rooted;
        if rooted == Some(true) {
            self.roots.insert(id);
        } else {
            self.roots.remove(&id);
        }
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id).map(|s| &s.node)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.get(id).is_some()
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.get(id).is_some()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = (NodeId, &Node)> + '_ {
        self.nodes.iter().map(|(i, s)| (i, &s.node))
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> impl DoubleEndedIterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter()
    }

    pub fn node_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|(i, _)| i)
    }

    pub fn edge_ids(&self) -> impl DoubleEndedIterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|(i, _)| i)
    }

    /// Outgoing edges of `v` in ascending id order.
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        self.nodes.get(v).map(|s| s.out.as_slice()).unwrap_or(&[])
    }

    /// Incoming edges of `v` in ascending id order.
    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        self.nodes.get(v).map(|s| s.inc.as_slice()).unwrap_or(&[])
    }

    pub fn outdegree(&self, v: NodeId) -> usize {
        self.out_edges(v).len()
    }

    pub fn indegree(&self, v: NodeId) -> usize {
        self.in_edges(v).len()
    }

    /// Indegree plus outdegree; a loop counts twice.
    pub fn degree(&self, v: NodeId) -> usize {
        self.indegree(v) + self.outdegree(v)
    }

    /// Root nodes in ascending id order.
    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roots.iter().copied()
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    /// One more than the largest node id, or 0 for the empty graph.
    pub fn next_node_id(&self) -> NodeId {
        self.nodes.next_id()
    }

    /// One more than the largest edge id, or 0 when there are no edges.
    pub fn next_edge_id(&self) -> EdgeId {
        self.edges.next_id()
    }

    pub fn is_totally_labelled(&self) -> bool {
        self.nodes().all(|(_, n)| n.label.is_some())
    }

    pub fn is_totally_rooted(&self) -> bool {
        self.nodes().all(|(_, n)| n.rooted.is_some())
    }

    /// Totally labelled and totally rooted.
    pub fn is_total(&self) -> bool {
        self.is_totally_labelled() && self.is_totally_rooted()
    }

    /// Connected components ignoring edge direction, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.node_ids() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &e in self.out_edges(v).iter().chain(self.in_edges(v)) {
                    let edge = &self.edges.get(e).unwrap();
                    for w in [edge.src, edge.tgt] {
                        if seen.insert(w) {
                            comp.push(w);
                            stack.push(w);
                        }
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// The subgraph induced by a node set together with the given edges.
    /// Edges whose endpoints are missing from `nodes` are skipped.
    pub fn subgraph(&self, nodes: &BTreeSet<NodeId>, edges: &BTreeSet<EdgeId>) -> Graph {
        let mut g = Graph::new();
        for &v in nodes {
            if let Some(n) = self.node(v) {
                g.add_node(v, n.clone()).unwrap();
            }
        }
        for &e in edges {
            if let Some(edge) = self.edge(e) {
                if nodes.contains(&edge.src) && nodes.contains(&edge.tgt) {
                    g.add_edge(e, edge.clone()).unwrap();
                }
            }
        }
        g
    }

    pub fn to_data(&self) -> GraphData {
        GraphData {
            nodes: self.nodes().map(|(i, n)| (i, n.clone())).collect(),
            edges: self.edges().map(|(i, e)| (i, e.clone())).collect(),
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::print_graph_body(self, 0))
    }
}

/// Finite sets of node and edge symbols.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LabelAlphabet {
    pub node_labels: BTreeSet<Label>,
    pub edge_labels: BTreeSet<Label>,
}

impl LabelAlphabet {
    pub fn new<N, E>(nodes: N, edges: E) -> Self
    where
        N: IntoIterator,
        N::Item: Into<Label>,
        E: IntoIterator,
        E::Item: Into<Label>,
    {
        LabelAlphabet {
            node_labels: nodes.into_iter().map(Into::into).collect(),
            edge_labels: edges.into_iter().map(Into::into).collect(),
        }
    }

    /// The alphabet with the single symbol □ for nodes and edges, used for
    /// unlabelled graphs.
    pub fn singleton() -> Self {
        LabelAlphabet::new([crate::label::BOX], [crate::label::BOX])
    }

    /// The smallest alphabet covering the labels used in `graphs`.
    pub fn infer<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> Self {
        let mut a = LabelAlphabet::default();
        for g in graphs {
            a.extend_from(g);
        }
        a
    }

    pub fn extend_from(&mut self, g: &Graph) {
        for (_, n) in g.nodes() {
            if let Some(l) = &n.label {
                self.node_labels.insert(l.clone());
            }
        }
        for (_, e) in g.edges() {
            self.edge_labels.insert(e.label.clone());
        }
    }

    /// Whether every label of `g` belongs to this alphabet.
    pub fn covers(&self, g: &Graph) -> bool {
        g.nodes().all(|(_, n)| n.label.as_ref().is_none_or(|l| self.node_labels.contains(l)))
            && g.edges().all(|(_, e)| self.edge_labels.contains(&e.label))
    }
}

/// Unchecked graph records, as read from a file or assembled by hand.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphData {
    pub nodes: Vec<(NodeId, Node)>,
    pub edges: Vec<(EdgeId, Edge)>,
}

/// A reason a [`GraphData`] fails to describe a graph over an alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node id {0} appears more than once")]
    DuplicateNode(NodeId),
    #[error("edge id {0} appears more than once")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge}: source {node} is not a node")]
    MissingSource { edge: EdgeId, node: NodeId },
    #[error("edge {edge}: target {node} is not a node")]
    MissingTarget { edge: EdgeId, node: NodeId },
    #[error("node {node}: label {label} is not in the alphabet")]
    NodeLabel { node: NodeId, label: Label },
    #[error("edge {edge}: label {label} is not in the alphabet")]
    EdgeLabel { edge: EdgeId, label: Label },
    #[error("id {0} exceeds the supported maximum")]
    IdTooLarge(u64),
}

/// Checks every graph invariant over `a`. An empty result means the data
/// describes a valid graph.
pub fn validate_graph(g: &GraphData, a: &LabelAlphabet) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut node_ids = BTreeSet::new();
    for (id, n) in &g.nodes {
        if *id >= MAX_ID {
            out.push(Violation::IdTooLarge(*id));
        }
        if !node_ids.insert(*id) {
            out.push(Violation::DuplicateNode(*id));
        }
        if let Some(l) = &n.label {
            if !a.node_labels.contains(l) {
                out.push(Violation::NodeLabel { node: *id, label: l.clone() });
            }
        }
    }
    let mut edge_ids = BTreeSet::new();
    for (id, e) in &g.edges {
        if *id >= MAX_ID {
            out.push(Violation::IdTooLarge(*id));
        }
        if !edge_ids.insert(*id) {
            out.push(Violation::DuplicateEdge(*id));
        }
        if !node_ids.contains(&e.src) {
            out.push(Violation::MissingSource { edge: *id, node: e.src });
        }
        if !node_ids.contains(&e.tgt) {
            out.push(Violation::MissingTarget { edge: *id, node: e.tgt });
        }
        if !a.edge_labels.contains(&e.label) {
            out.push(Violation::EdgeLabel { edge: *id, label: e.label.clone() });
        }
    }
    out
}

impl GraphData {
    /// Builds the graph, reporting structural violations (labels are not
    /// checked against any alphabet).
    pub fn build(&self) -> Result<Graph, Vec<Violation>> {
        let alphabet = LabelAlphabet {
            node_labels: self.nodes.iter().filter_map(|(_, n)| n.label.clone()).collect(),
            edge_labels: self.edges.iter().map(|(_, e)| e.label.clone()).collect(),
        };
        let violations = validate_graph(self, &alphabet);
        if !violations.is_empty() {
            return Err(violations);
        }
        let mut g = Graph::new();
        for (id, n) in &self.nodes {
            g.add_node(*id, n.clone()).expect("validated");
        }
        for (id, e) in &self.edges {
            g.add_edge(*id, e.clone()).expect("validated");
        }
        Ok(g)
    }
}

/// Maximum degree and number of root nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeStats {
    pub max_degree: usize,
    pub root_count: usize,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    DegreeStats { max_degree: g.node_ids().map(|v| g.degree(v)).max().unwrap_or(0), root_count: g.root_count() }
}

/// Renames node ids through `f`, keeping edge ids. Used to build isomorphic
/// copies.
pub fn rename_nodes(g: &Graph, f: impl Fn(NodeId) -> NodeId) -> Graph {
    let map: BTreeMap<NodeId, NodeId> = g.node_ids().map(|v| (v, f(v))).collect();
    let mut h = Graph::new();
    for (v, n) in g.nodes() {
        h.add_node(map[&v], n.clone()).expect("renaming must be injective");
    }
    for (e, edge) in g.edges() {
        h.add_edge(e, Edge::new(map[&edge.src], map[&edge.tgt], edge.label.clone())).unwrap();
    }
    h
}
