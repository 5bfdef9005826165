//! Graph morphisms, backtracking morphism search and isomorphism.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, LabelAlphabet, Node, NodeId};

/// A structure-, label- and rootedness-preserving map between two graphs.
/// The graphs themselves are passed alongside wherever they are needed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub node_map: BTreeMap<NodeId, NodeId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

/// `nodes 1->3 2->4; edges 1->5`
impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("nodes")?;
        for (a, b) in &self.node_map {
            write!(f, " {a}->{b}")?;
        }
        f.write_str("; edges")?;
        for (a, b) in &self.edge_map {
            write!(f, " {a}->{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("graphs are over different alphabets")]
    AlphabetMismatch,
}

/// Whether `a` may be mapped onto `b`: defined labels and rootedness agree.
/// With `strict`, definedness must also agree in both directions.
pub fn node_compatible(a: &Node, b: &Node, strict: bool) -> bool {
    if strict && (a.label.is_some() != b.label.is_some() || a.rooted.is_some() != b.rooted.is_some()) {
        return false;
    }
    (a.label.is_none() || a.label == b.label) && (a.rooted.is_none() || a.rooted == b.rooted)
}

impl Morphism {
    pub fn identity(g: &Graph) -> Self {
        Morphism { node_map: g.node_ids().map(|v| (v, v)).collect(), edge_map: g.edge_ids().map(|e| (e, e)).collect() }
    }

    /// Image of a node; panics if the node is outside the domain.
    pub fn node(&self, v: NodeId) -> NodeId {
        self.node_map[&v]
    }

    /// Image of an edge; panics if the edge is outside the domain.
    pub fn edge(&self, e: EdgeId) -> EdgeId {
        self.edge_map[&e]
    }

    /// `self` followed by `next`. Items whose image leaves `next`'s domain
    /// are dropped.
    pub fn then(&self, next: &Morphism) -> Morphism {
        Morphism {
            node_map: self.node_map.iter().filter_map(|(k, v)| next.node_map.get(v).map(|w| (*k, *w))).collect(),
            edge_map: self.edge_map.iter().filter_map(|(k, v)| next.edge_map.get(v).map(|w| (*k, *w))).collect(),
        }
    }

    /// Restriction to the items of `g`.
    pub fn restrict(&self, g: &Graph) -> Morphism {
        Morphism {
            node_map: g.node_ids().filter_map(|v| self.node_map.get(&v).map(|w| (v, *w))).collect(),
            edge_map: g.edge_ids().filter_map(|e| self.edge_map.get(&e).map(|w| (e, *w))).collect(),
        }
    }

    /// The inverse relation. Meaningful for injective maps.
    pub fn inverse(&self) -> Morphism {
        Morphism {
            node_map: self.node_map.iter().map(|(k, v)| (*v, *k)).collect(),
            edge_map: self.edge_map.iter().map(|(k, v)| (*v, *k)).collect(),
        }
    }

    /// Checks totality on `src` and every preservation condition into `tgt`.
    pub fn is_morphism(&self, src: &Graph, tgt: &Graph) -> bool {
        if self.node_map.len() != src.node_count() || self.edge_map.len() != src.edge_count() {
            return false;
        }
        for (v, n) in src.nodes() {
            let Some(w) = self.node_map.get(&v) else { return false };
            let Some(m) = tgt.node(*w) else { return false };
            if !node_compatible(n, m, false) {
                return false;
            }
        }
        for (e, edge) in src.edges() {
            let Some(f) = self.edge_map.get(&e) else { return false };
            let Some(img) = tgt.edge(*f) else { return false };
            if img.label != edge.label || self.node_map[&edge.src] != img.src || self.node_map[&edge.tgt] != img.tgt {
                return false;
            }
        }
        true
    }

    pub fn is_injective(&self) -> bool {
        let mut nodes: Vec<_> = self.node_map.values().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut edges: Vec<_> = self.edge_map.values().collect();
        edges.sort_unstable();
        edges.dedup();
        nodes.len() == self.node_map.len() && edges.len() == self.edge_map.len()
    }

    pub fn is_surjective(&self, tgt: &Graph) -> bool {
        let nodes: std::collections::BTreeSet<_> = self.node_map.values().collect();
        let edges: std::collections::BTreeSet<_> = self.edge_map.values().collect();
        nodes.len() == tgt.node_count() && edges.len() == tgt.edge_count()
    }

    /// Undefined labels and rootedness map to undefined ones.
    pub fn preserves_undefinedness(&self, src: &Graph, tgt: &Graph) -> bool {
        src.nodes().all(|(v, n)| {
            let m = tgt.node(self.node_map[&v]).unwrap();
            (n.label.is_some() || m.label.is_none()) && (n.rooted.is_some() || m.rooted.is_none())
        })
    }

    pub fn is_isomorphism(&self, src: &Graph, tgt: &Graph) -> bool {
        self.is_morphism(src, tgt)
            && self.is_injective()
            && self.is_surjective(tgt)
            && self.preserves_undefinedness(src, tgt)
    }
}

/// Constraints for a morphism search.
#[derive(Clone, Debug, Default)]
pub(crate) struct SearchSpec {
    pub injective: bool,
    /// Require definedness to agree (used for isomorphisms).
    pub strict: bool,
    pub node_pins: BTreeMap<NodeId, NodeId>,
    pub edge_pins: BTreeMap<EdgeId, EdgeId>,
}

enum Step {
    /// Place a node; the anchor edge connects it to an already placed node,
    /// with the flag telling whether the new node is that edge's target.
    Node {
        v: NodeId,
        anchor: Option<(EdgeId, bool)>,
    },
    Edge(EdgeId),
}

struct Search<'a, F> {
    src: &'a Graph,
    tgt: &'a Graph,
    spec: &'a SearchSpec,
    steps: Vec<Step>,
    node_img: Vec<Option<NodeId>>,
    edge_img: Vec<Option<EdgeId>>,
    node_used: Vec<bool>,
    edge_used: Vec<bool>,
    visit: F,
}

/// Placement priority of a pattern node: pinned, rooted, labelled, degree.
type Weight = (bool, bool, bool, usize);

/// Best next node so far: its index in `remaining`, its (links, weight)
/// key, and an edge tying it to an already placed node.
type Candidate = (usize, (usize, Weight), Option<(EdgeId, bool)>);

fn plan(src: &Graph, spec: &SearchSpec) -> Vec<Step> {
    let n = src.next_node_id() as usize;
    let mut placed = vec![false; n];
    let mut edge_done = vec![false; src.next_edge_id() as usize];
    let mut steps = Vec::new();
    let mut remaining: Vec<NodeId> = src.node_ids().collect();
    let weight = |v: NodeId| -> Weight {
        let node = src.node(v).unwrap();
        (spec.node_pins.contains_key(&v), node.is_root(), node.label.is_some(), src.degree(v))
    };
    while !remaining.is_empty() {
        // Prefer nodes adjacent to placed ones, then the most constrained.
        let mut best: Option<Candidate> = None;
        for (i, &v) in remaining.iter().enumerate() {
            let mut anchor = None;
            let mut links = 0;
            for &e in src.in_edges(v) {
                let s = src.edge(e).unwrap().src;
                if placed[s as usize] {
                    links += 1;
                    anchor.get_or_insert((e, true));
                }
            }
            for &e in src.out_edges(v) {
                let t = src.edge(e).unwrap().tgt;
                if placed[t as usize] {
                    links += 1;
                    anchor.get_or_insert((e, false));
                }
            }
            let key = (links, weight(v));
            if best.as_ref().is_none_or(|(_, k, _)| key > *k) {
                best = Some((i, key, anchor));
            }
        }
        let (i, _, anchor) = best.unwrap();
        let v = remaining.remove(i);
        placed[v as usize] = true;
        let anchor = if spec.node_pins.contains_key(&v) { None } else { anchor };
        steps.push(Step::Node { v, anchor });
        let mut new_edges: Vec<EdgeId> = src
            .out_edges(v)
            .iter()
            .chain(src.in_edges(v))
            .copied()
            .filter(|&e| {
                let edge = src.edge(e).unwrap();
                !edge_done[e as usize] && placed[edge.src as usize] && placed[edge.tgt as usize]
            })
            .collect();
        new_edges.sort_unstable();
        new_edges.dedup();
        for e in new_edges {
            edge_done[e as usize] = true;
            steps.push(Step::Edge(e));
        }
    }
    steps
}

impl<'a, F: FnMut(&Morphism) -> ControlFlow<()>> Search<'a, F> {
    fn node_ok(&self, v: NodeId, w: NodeId) -> bool {
        if self.spec.injective && self.node_used[w as usize] {
            return false;
        }
        let (a, b) = (self.src.node(v).unwrap(), self.tgt.node(w).unwrap());
        if !node_compatible(a, b, self.spec.strict) {
            return false;
        }
        if self.spec.injective
            && (self.src.outdegree(v) > self.tgt.outdegree(w) || self.src.indegree(v) > self.tgt.indegree(w))
        {
            return false;
        }
        if self.spec.strict
            && (self.src.outdegree(v) != self.tgt.outdegree(w) || self.src.indegree(v) != self.tgt.indegree(w))
        {
            return false;
        }
        true
    }

    fn run(&mut self, i: usize) -> ControlFlow<()> {
        if i == self.steps.len() {
            let m = Morphism {
                node_map: self.src.node_ids().map(|v| (v, self.node_img[v as usize].unwrap())).collect(),
                edge_map: self.src.edge_ids().map(|e| (e, self.edge_img[e as usize].unwrap())).collect(),
            };
            return (self.visit)(&m);
        }
        match self.steps[i] {
            Step::Node { v, anchor } => {
                let candidates: Vec<NodeId> = if let Some(&w) = self.spec.node_pins.get(&v) {
                    vec![w]
                } else if let Some((e, v_is_tgt)) = anchor {
                    let edge = self.src.edge(e).unwrap();
                    let mut c: Vec<NodeId> = if v_is_tgt {
                        let x = self.node_img[edge.src as usize].unwrap();
                        self.tgt
                            .out_edges(x)
                            .iter()
                            .map(|&f| self.tgt.edge(f).unwrap())
                            .filter(|f| f.label == edge.label)
                            .map(|f| f.tgt)
                            .collect()
                    } else {
                        let y = self.node_img[edge.tgt as usize].unwrap();
                        self.tgt
                            .in_edges(y)
                            .iter()
                            .map(|&f| self.tgt.edge(f).unwrap())
                            .filter(|f| f.label == edge.label)
                            .map(|f| f.src)
                            .collect()
                    };
                    c.sort_unstable();
                    c.dedup();
                    c
                } else {
                    self.tgt.node_ids().collect()
                };
                for w in candidates {
                    if !self.tgt.contains_node(w) || !self.node_ok(v, w) {
                        continue;
                    }
                    self.node_img[v as usize] = Some(w);
                    self.node_used[w as usize] = true;
                    let r = self.run(i + 1);
                    self.node_used[w as usize] = false;
                    self.node_img[v as usize] = None;
                    r?;
                }
            }
            Step::Edge(e) => {
                let edge = self.src.edge(e).unwrap();
                let x = self.node_img[edge.src as usize].unwrap();
                let y = self.node_img[edge.tgt as usize].unwrap();
                let candidates: Vec<EdgeId> = match self.spec.edge_pins.get(&e) {
                    Some(&f) => vec![f],
                    None => self.tgt.out_edges(x).to_vec(),
                };
                for f in candidates {
                    let Some(img) = self.tgt.edge(f) else { continue };
                    if img.src != x || img.tgt != y || img.label != edge.label {
                        continue;
                    }
                    if self.spec.injective && self.edge_used[f as usize] {
                        continue;
                    }
                    self.edge_img[e as usize] = Some(f);
                    self.edge_used[f as usize] = true;
                    let r = self.run(i + 1);
                    self.edge_used[f as usize] = false;
                    self.edge_img[e as usize] = None;
                    r?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Runs the backtracking search, calling `visit` for every morphism found
/// until it breaks.
pub(crate) fn search(src: &Graph, tgt: &Graph, spec: &SearchSpec, visit: impl FnMut(&Morphism) -> ControlFlow<()>) {
    let mut s = Search {
        src,
        tgt,
        spec,
        steps: plan(src, spec),
        node_img: vec![None; src.next_node_id() as usize],
        edge_img: vec![None; src.next_edge_id() as usize],
        node_used: vec![false; tgt.next_node_id() as usize],
        edge_used: vec![false; tgt.next_edge_id() as usize],
        visit,
    };
    let _ = s.run(0);
}

/// All morphisms `g → h` (only injective ones if asked), sorted by node map
/// then edge map.
pub fn find_morphisms(g: &Graph, h: &Graph, injective_only: bool) -> Vec<Morphism> {
    let spec = SearchSpec { injective: injective_only, ..Default::default() };
    let mut out = Vec::new();
    search(g, h, &spec, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

/// [`find_morphisms`] with the alphabet precondition checked.
pub fn find_morphisms_over(
    a: &LabelAlphabet,
    g: &Graph,
    b: &LabelAlphabet,
    h: &Graph,
    injective_only: bool,
) -> Result<Vec<Morphism>, MorphismError> {
    if a != b {
        return Err(MorphismError::AlphabetMismatch);
    }
    Ok(find_morphisms(g, h, injective_only))
}

fn node_profile(g: &Graph) -> Vec<(Node, usize, usize)> {
    let mut v: Vec<_> = g.nodes().map(|(i, n)| (n.clone(), g.indegree(i), g.outdegree(i))).collect();
    v.sort();
    v
}

fn edge_profile(g: &Graph) -> Vec<(crate::label::Label, bool)> {
    let mut v: Vec<_> = g.edges().map(|(_, e)| (e.label.clone(), e.is_loop())).collect();
    v.sort();
    v
}

/// Cheap necessary conditions for isomorphism.
fn invariants_agree(g: &Graph, h: &Graph) -> bool {
    g.node_count() == h.node_count()
        && g.edge_count() == h.edge_count()
        && node_profile(g) == node_profile(h)
        && edge_profile(g) == edge_profile(h)
}

/// An isomorphism `g → h` extending the given node pins, if one exists.
pub fn isomorphism_with(g: &Graph, h: &Graph, node_pins: &BTreeMap<NodeId, NodeId>) -> Option<Morphism> {
    if !invariants_agree(g, h) {
        return None;
    }
    let spec = SearchSpec { injective: true, strict: true, node_pins: node_pins.clone(), ..Default::default() };
    let mut found = None;
    search(g, h, &spec, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

/// A witness isomorphism `g → h`, if the graphs are isomorphic.
pub fn is_isomorphic(g: &Graph, h: &Graph) -> Option<Morphism> {
    isomorphism_with(g, h, &BTreeMap::new())
}

/// Every isomorphism `g → h`.
pub fn all_isomorphisms(g: &Graph, h: &Graph) -> Vec<Morphism> {
    if !invariants_agree(g, h) {
        return Vec::new();
    }
    let spec = SearchSpec { injective: true, strict: true, ..Default::default() };
    let mut out = Vec::new();
    search(g, h, &spec, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out.sort();
    out
}

fn hash_of(x: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

/// An isomorphism-invariant hash obtained by colour refinement. Nodes may be
/// given extra colours, which isomorphisms are then expected to respect.
pub fn signature(g: &Graph, extra: &BTreeMap<NodeId, u64>) -> u64 {
    let mut colour: BTreeMap<NodeId, u64> =
        g.nodes().map(|(v, n)| (v, hash_of((n, g.indegree(v), g.outdegree(v), extra.get(&v))))).collect();
    for _ in 0..3 {
        let mut next = BTreeMap::new();
        for v in g.node_ids() {
            let mut around: Vec<(u64, bool, &str)> = Vec::new();
            for &e in g.out_edges(v) {
                let edge = g.edge(e).unwrap();
                around.push((colour[&edge.tgt], true, edge.label.as_str()));
            }
            for &e in g.in_edges(v) {
                let edge = g.edge(e).unwrap();
                around.push((colour[&edge.src], false, edge.label.as_str()));
            }
            around.sort_unstable();
            next.insert(v, hash_of((colour[&v], around)));
        }
        colour = next;
    }
    let mut all: Vec<u64> = colour.into_values().collect();
    all.sort_unstable();
    hash_of((g.node_count(), g.edge_count(), all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rename_nodes;
    use crate::label::BOX;

    fn n() -> Node {
        Node::total(BOX, false)
    }

    #[test]
    fn identity_is_found() {
        let g = Graph::new().with_node(0, n()).with_node(1, n()).with_edge(0, 0, 1, BOX).with_edge(1, 1, 1, BOX);
        let all = find_morphisms(&g, &g, true);
        assert!(all.contains(&Morphism::identity(&g)));
    }

    #[test]
    fn labelled_vs_unlabelled_single_node() {
        let a = Graph::new().with_node(0, Node::new(Some("x".into()), None));
        let b = Graph::new().with_node(0, Node::blank());
        assert!(is_isomorphic(&a, &b).is_none());
        // The unlabelled node maps onto the labelled one injectively and
        // surjectively, yet that map is not an isomorphism.
        let m = find_morphisms(&b, &a, true);
        assert_eq!(m.len(), 1);
        assert!(m[0].is_surjective(&a) && !m[0].is_isomorphism(&b, &a));
    }

    #[test]
    fn renamed_graph_is_isomorphic() {
        let g = Graph::new()
            .with_node(0, n())
            .with_node(1, Node::total(BOX, true))
            .with_node(2, n())
            .with_edge(0, 0, 1, BOX)
            .with_edge(1, 1, 2, BOX)
            .with_edge(2, 2, 2, BOX);
        let h = rename_nodes(&g, |v| 10 - v);
        let w = is_isomorphic(&g, &h).unwrap();
        assert!(w.is_isomorphism(&g, &h));
        assert_eq!(signature(&g, &BTreeMap::new()), signature(&h, &BTreeMap::new()));
    }

    #[test]
    fn pins_are_respected() {
        let g = Graph::new().with_node(0, n()).with_node(1, n());
        let pins = BTreeMap::from([(0, 1)]);
        let m = isomorphism_with(&g, &g, &pins).unwrap();
        assert_eq!(m.node(0), 1);
        assert_eq!(m.node(1), 0);
    }
}
