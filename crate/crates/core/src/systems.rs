//! Built-in rule systems, graph families, structural oracles and the
//! mutations used to build test corpora.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, LabelAlphabet, Node, NodeId};
use crate::label::{Label, BOX};
use crate::rules::{invert, Rule};
use crate::text::{parse_document, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("unknown system `{0}`")]
    Unknown(String),
    #[error("bad size: {0}")]
    BadSize(String),
    #[error("mutation {0:?} cannot spoil this graph")]
    NotApplicable(Mutation),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A rule system with its alphabet and, where meaningful, the graph that
/// signals acceptance and a description of valid inputs.
#[derive(Clone, Debug)]
pub struct NamedSystem {
    pub name: String,
    pub alphabet: LabelAlphabet,
    pub rules: Vec<Rule>,
    /// Accepting normal form for recognition systems.
    pub accept: Option<Graph>,
    /// Start graph for grammars.
    pub start: Option<Graph>,
    pub input_contract: String,
}

impl NamedSystem {
    /// Parses a system file. Missing alphabets are inferred from the rules.
    pub fn parse(src: &str) -> Result<NamedSystem, SystemError> {
        let doc = parse_document(src)?;
        let alphabet = doc
            .alphabet
            .unwrap_or_else(|| LabelAlphabet::infer(doc.rules.iter().flat_map(|r| [&r.left, &r.interface, &r.right])));
        Ok(NamedSystem {
            name: doc.system.unwrap_or_else(|| "unnamed".into()),
            alphabet,
            rules: doc.rules,
            accept: doc.accept,
            start: doc.start,
            input_contract: doc.contract.unwrap_or_default(),
        })
    }

    /// The recognition system of a grammar: every rule inverted, accepting
    /// the start graph.
    pub fn inverse(&self) -> NamedSystem {
        NamedSystem {
            name: format!("{}-inverse", self.name),
            alphabet: self.alphabet.clone(),
            rules: self.rules.iter().map(invert).collect(),
            accept: self.start.clone(),
            start: None,
            input_contract: self.input_contract.clone(),
        }
    }
}

const TREE: &str = include_str!("../systems/tree.rules");
const FBT: &str = include_str!("../systems/fbt.rules");
const TREE_GRAMMAR: &str = include_str!("../systems/tree-grammar.rules");
const EFD: &str = include_str!("../systems/efd.rules");
const NONCLOSED: &str = include_str!("../systems/nonclosed.rules");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] =
    ["tree", "fbt", "tree-grammar", "tree-grammar-inverse", "efd", "efd-inverse", "nonclosed"];

fn load(src: &str) -> NamedSystem {
    NamedSystem::parse(src).expect("built-in system parses")
}

/// Rooted tree recognition: r0, r1, r2.
pub fn tree_system() -> NamedSystem {
    load(TREE)
}

/// Rooted full binary tree recognition: r0 to r4.
pub fn fbt_system() -> NamedSystem {
    load(FBT)
}

/// The unrooted grammar generating all trees from a single node.
pub fn tree_grammar() -> NamedSystem {
    load(TREE_GRAMMAR)
}

/// The grammar of extended flow diagrams.
pub fn efd_grammar() -> NamedSystem {
    load(EFD)
}

/// The terminating, locally confluent but non-confluent example system.
pub fn nonclosed_system() -> NamedSystem {
    load(NONCLOSED)
}

pub fn builtin(name: &str) -> Result<NamedSystem, SystemError> {
    Ok(match name {
        "tree" => tree_system(),
        "fbt" => fbt_system(),
        "tree-grammar" => tree_grammar(),
        "tree-grammar-inverse" => tree_grammar().inverse(),
        "efd" => efd_grammar(),
        "efd-inverse" => efd_grammar().inverse(),
        "nonclosed" => nonclosed_system(),
        other => return Err(SystemError::Unknown(other.into())),
    })
}

/// Graph families for corpora and benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    LinkedList,
    BinaryTree,
    PerfectBinaryTree,
    Grid,
    Star,
    Cycle,
}

impl std::str::FromStr for Family {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "list" | "linked_list" | "linked-list" => Family::LinkedList,
            "binary" | "binary_tree" | "binary-tree" => Family::BinaryTree,
            "tree" | "perfect" | "perfect_binary_tree" | "perfect-binary-tree" => Family::PerfectBinaryTree,
            "grid" => Family::Grid,
            "star" => Family::Star,
            "cycle" => Family::Cycle,
            other => return Err(SystemError::Unknown(format!("family {other}"))),
        })
    }
}

/// Where to put the single root of a generated graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RootPlacement {
    #[default]
    None,
    /// The lowest node id.
    First,
    Node(NodeId),
}

fn plain(n: usize) -> Graph {
    let mut g = Graph::new();
    for v in 0..n as NodeId {
        g.add_node(v, Node::total(BOX, false)).unwrap();
    }
    g
}

fn link(g: &mut Graph, src: NodeId, tgt: NodeId) {
    let id = g.next_edge_id();
    g.add_edge(id, Edge::new(src, tgt, BOX)).unwrap();
}

fn check(n: usize, what: &str) -> Result<(), SystemError> {
    if n == 0 {
        return Err(SystemError::BadSize(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// `0 → 1 → … → n-1`.
pub fn linked_list(n: usize) -> Result<Graph, SystemError> {
    check(n, "list length")?;
    let mut g = plain(n);
    for v in 1..n as NodeId {
        link(&mut g, v - 1, v);
    }
    Ok(g)
}

/// A random binary tree on `n` nodes rooted at node 0: each new node hangs
/// off a uniformly chosen earlier node with fewer than two children.
pub fn binary_tree(n: usize, seed: u64) -> Result<Graph, SystemError> {
    check(n, "tree size")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = plain(n);
    let mut open: Vec<NodeId> = vec![0];
    for v in 1..n as NodeId {
        let i = rng.gen_range(0..open.len());
        let parent = open[i];
        link(&mut g, parent, v);
        if g.outdegree(parent) == 2 {
            open.swap_remove(i);
        }
        open.push(v);
    }
    Ok(g)
}

/// The perfect binary tree of the given depth: node `i` has children
/// `2i+1` and `2i+2`. Depth 0 is a single node.
pub fn perfect_binary_tree(depth: u32) -> Result<Graph, SystemError> {
    if depth > 24 {
        return Err(SystemError::BadSize("depth must be at most 24".into()));
    }
    let n = (1usize << (depth + 1)) - 1;
    let mut g = plain(n);
    for v in 1..n as NodeId {
        link(&mut g, (v - 1) / 2, v);
    }
    Ok(g)
}

/// The largest perfect binary tree with at most `n` nodes.
pub fn perfect_binary_tree_within(n: usize) -> Result<Graph, SystemError> {
    check(n, "tree size")?;
    let depth = (usize::BITS - (n + 1).leading_zeros() - 2).min(24);
    perfect_binary_tree(depth)
}

/// `w × h` grid with edges `(i, j) → (i+1, j)` and `(i, j) → (i, j+1)`.
/// Node `(i, j)` has id `i·h + j`.
pub fn grid(w: usize, h: usize) -> Result<Graph, SystemError> {
    check(w, "grid width")?;
    check(h, "grid height")?;
    let mut g = plain(w * h);
    let id = |i: usize, j: usize| (i * h + j) as NodeId;
    for i in 0..w {
        for j in 0..h {
            if i + 1 < w {
                link(&mut g, id(i, j), id(i + 1, j));
            }
            if j + 1 < h {
                link(&mut g, id(i, j), id(i, j + 1));
            }
        }
    }
    Ok(g)
}

/// Star with centre `n` and satellites `0..n`: even satellites are targets
/// of the centre, odd ones point at it.
pub fn star(n: usize) -> Result<Graph, SystemError> {
    check(n, "star size")?;
    let mut g = plain(n + 1);
    let c = n as NodeId;
    for i in 0..c {
        if i % 2 == 0 {
            link(&mut g, c, i);
        } else {
            link(&mut g, i, c);
        }
    }
    Ok(g)
}

/// Directed cycle `0 → 1 → … → n-1 → 0`; a loop when `n = 1`.
pub fn cycle(n: usize) -> Result<Graph, SystemError> {
    check(n, "cycle length")?;
    let mut g = plain(n);
    for v in 0..n as NodeId {
        link(&mut g, v, (v + 1) % n as NodeId);
    }
    Ok(g)
}

/// One member of `family` sized by `size`: list, star and cycle lengths,
/// a random binary tree on `size` nodes, the largest perfect tree with at
/// most `size` nodes, or a `size × size` grid.
pub fn generate(family: Family, size: usize, seed: u64, root: RootPlacement) -> Result<Graph, SystemError> {
    let g = match family {
        Family::LinkedList => linked_list(size)?,
        Family::BinaryTree => binary_tree(size, seed)?,
        Family::PerfectBinaryTree => perfect_binary_tree_within(size)?,
        Family::Grid => grid(size, size)?,
        Family::Star => star(size)?,
        Family::Cycle => cycle(size)?,
    };
    place_root(g, root)
}

/// Marks one node as the root.
pub fn place_root(mut g: Graph, root: RootPlacement) -> Result<Graph, SystemError> {
    let v = match root {
        RootPlacement::None => return Ok(g),
        RootPlacement::First => g.node_ids().next().ok_or(SystemError::BadSize("graph is empty".into()))?,
        RootPlacement::Node(v) => v,
    };
    if !g.contains_node(v) {
        return Err(SystemError::BadSize(format!("no node {v} to mark as root")));
    }
    g.set_rooted(v, Some(true)).unwrap();
    Ok(g)
}

/// Shape check: a single node of indegree 0 from which every node is
/// reached, every other node of indegree 1, and one edge fewer than nodes.
pub fn oracle_is_tree(g: &Graph) -> bool {
    if g.is_empty() || g.edge_count() + 1 != g.node_count() {
        return false;
    }
    let sources: Vec<NodeId> = g.node_ids().filter(|&v| g.indegree(v) == 0).collect();
    if sources.len() != 1 || g.node_ids().any(|v| g.indegree(v) > 1) {
        return false;
    }
    let mut seen = BTreeSet::from([sources[0]]);
    let mut queue = VecDeque::from([sources[0]]);
    while let Some(v) = queue.pop_front() {
        for &e in g.out_edges(v) {
            let w = g.edge(e).unwrap().tgt;
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == g.node_count()
}

/// A tree in which every node has zero or two children.
pub fn oracle_is_fbt(g: &Graph) -> bool {
    oracle_is_tree(g) && g.node_ids().all(|v| matches!(g.outdegree(v), 0 | 2))
}

/// Every directed cycle, loops included, uses a `t`-labelled edge: the
/// graph without its `t` edges is acyclic.
pub fn oracle_cycles_have_t(g: &Graph) -> bool {
    let t = Label::from("t");
    let kept = |e: EdgeId| g.edge(e).unwrap().label != t;
    let mut indeg: std::collections::BTreeMap<NodeId, usize> =
        g.node_ids().map(|v| (v, g.in_edges(v).iter().filter(|&&e| kept(e)).count())).collect();
    let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
    let mut done = 0;
    while let Some(v) = ready.pop() {
        done += 1;
        for &e in g.out_edges(v) {
            if kept(e) {
                let w = g.edge(e).unwrap().tgt;
                let d = indeg.get_mut(&w).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(w);
                }
            }
        }
    }
    done == g.node_count()
}

/// The underlying shape: every node unrooted, every label □.
pub fn strip(g: &Graph) -> Graph {
    let mut out = Graph::new();
    for v in g.node_ids() {
        out.add_node(v, Node::total(BOX, false)).unwrap();
    }
    for (e, edge) in g.edges() {
        out.add_edge(e, Edge::new(edge.src, edge.tgt, BOX)).unwrap();
    }
    out
}

/// Structural spoilers that turn a tree into a non-tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Duplicate an edge.
    ParallelEdge,
    /// Reverse an edge whose source has a parent, giving that parent a
    /// second incoming edge.
    ReverseEdge,
    /// Add an edge into a node that already has a parent.
    CrossEdge,
    /// Remove an edge, disconnecting the graph.
    DeleteEdge,
}

impl Mutation {
    pub const ALL: [Mutation; 4] =
        [Mutation::ParallelEdge, Mutation::ReverseEdge, Mutation::CrossEdge, Mutation::DeleteEdge];
}

impl std::str::FromStr for Mutation {
    type Err = SystemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "parallel" => Mutation::ParallelEdge,
            "reverse" => Mutation::ReverseEdge,
            "cross" => Mutation::CrossEdge,
            "delete" => Mutation::DeleteEdge,
            other => return Err(SystemError::Unknown(format!("mutation {other}"))),
        })
    }
}

/// Applies `kind` at a position chosen by `seed`. Node labels and roots are
/// kept; new edges are □-labelled.
pub fn mutate(g: &Graph, kind: Mutation, seed: u64) -> Result<Graph, SystemError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = g.clone();
    let edges: Vec<EdgeId> = g.edge_ids().collect();
    let fresh = g.next_edge_id();
    match kind {
        Mutation::ParallelEdge => {
            let e = *edges.choose(&mut rng).ok_or(SystemError::NotApplicable(kind))?;
            let edge = g.edge(e).unwrap();
            out.add_edge(fresh, Edge::new(edge.src, edge.tgt, edge.label.clone())).unwrap();
        }
        Mutation::ReverseEdge => {
            let inner: Vec<EdgeId> = edges.into_iter().filter(|&e| g.indegree(g.edge(e).unwrap().src) > 0).collect();
            let e = *inner.choose(&mut rng).ok_or(SystemError::NotApplicable(kind))?;
            let edge = out.remove_edge(e).unwrap();
            out.add_edge(e, Edge::new(edge.tgt, edge.src, edge.label)).unwrap();
        }
        Mutation::CrossEdge => {
            let targets: Vec<NodeId> = g.node_ids().filter(|&v| g.indegree(v) > 0).collect();
            let v = *targets.choose(&mut rng).ok_or(SystemError::NotApplicable(kind))?;
            let parents: BTreeSet<NodeId> = g.in_edges(v).iter().map(|&e| g.edge(e).unwrap().src).collect();
            let others: Vec<NodeId> = g.node_ids().filter(|u| *u != v && !parents.contains(u)).collect();
            let u = others.choose(&mut rng).copied().unwrap_or(v);
            out.add_edge(fresh, Edge::new(u, v, BOX)).unwrap();
        }
        Mutation::DeleteEdge => {
            let e = *edges.choose(&mut rng).ok_or(SystemError::NotApplicable(kind))?;
            out.remove_edge(e).unwrap();
        }
    }
    Ok(out)
}

/// Small named graphs used by examples and tests.
pub mod fixtures {
    use super::*;
    use crate::label::TRIANGLE;

    fn n(label: &str, rooted: bool) -> Node {
        Node::total(label, rooted)
    }

    /// The five node tree with the root one level below the top.
    pub fn tree_reduction_input() -> Graph {
        Graph::new()
            .with_node(1, n(BOX, false))
            .with_node(2, n(BOX, true))
            .with_node(3, n(BOX, false))
            .with_node(4, n(BOX, false))
            .with_node(5, n(BOX, false))
            .with_edge(1, 1, 2, BOX)
            .with_edge(2, 1, 3, BOX)
            .with_edge(3, 2, 4, BOX)
            .with_edge(4, 3, 5, BOX)
    }

    /// The tree after its first step, with the root pushed to the leaf.
    pub fn tree_reduction_second() -> Graph {
        let mut g = tree_reduction_input();
        g.set_label(2, Some(Label::from(TRIANGLE))).unwrap();
        g.set_rooted(2, Some(false)).unwrap();
        g.set_rooted(4, Some(true)).unwrap();
        g
    }

    /// A directed 3-cycle with one root.
    pub fn three_cycle_input() -> Graph {
        Graph::new()
            .with_node(1, n(BOX, false))
            .with_node(2, n(BOX, true))
            .with_node(3, n(BOX, false))
            .with_edge(1, 1, 2, BOX)
            .with_edge(2, 2, 3, BOX)
            .with_edge(3, 3, 1, BOX)
    }

    /// Two disjoint edges, one of them starting at the root.
    pub fn forest_input() -> Graph {
        Graph::new()
            .with_node(1, n(BOX, true))
            .with_node(2, n(BOX, false))
            .with_node(3, n(BOX, false))
            .with_node(4, n(BOX, false))
            .with_edge(1, 1, 3, BOX)
            .with_edge(2, 2, 4, BOX)
    }

    /// The single rooted □ node.
    pub fn single_root() -> Graph {
        Graph::new().with_node(1, n(BOX, true))
    }

    /// Two nodes, a loop on the first and an edge from the second to it.
    pub fn concrete_g() -> Graph {
        Graph::new()
            .with_node(1, n(BOX, false))
            .with_node(2, n(BOX, false))
            .with_edge(1, 1, 1, BOX)
            .with_edge(2, 2, 1, BOX)
    }

    /// Three nodes: two parallel edges and a further edge into node 3,
    /// which also carries a loop.
    pub fn concrete_h() -> Graph {
        Graph::new()
            .with_node(1, n(BOX, false))
            .with_node(2, n(BOX, false))
            .with_node(3, n(BOX, false))
            .with_edge(1, 1, 3, BOX)
            .with_edge(2, 1, 3, BOX)
            .with_edge(3, 2, 3, BOX)
            .with_edge(4, 3, 3, BOX)
    }
}
