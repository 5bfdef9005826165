//! Seeded generators shared by the property and acceptance suites.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rooted_gt::rules::matches;
use rooted_gt::{Edge, Graph, Label, Morphism, Node, NodeId, Rule};

pub const NODE_LABELS: [&str; 2] = ["a", "b"];
pub const EDGE_LABELS: [&str; 2] = ["x", "y"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick(rng: &mut ChaCha8Rng, from: &[&str]) -> Label {
    Label::from(*from.choose(rng).unwrap())
}

/// A totally labelled, totally rooted graph on nodes `1..=n`.
pub fn total_graph(rng: &mut ChaCha8Rng, n: usize, edges: usize) -> Graph {
    let mut g = Graph::new();
    for v in 1..=n as NodeId {
        g.add_node(v, Node::new(Some(pick(rng, &NODE_LABELS)), Some(rng.gen_bool(0.3)))).unwrap();
    }
    if n > 0 {
        for e in 1..=edges as u64 {
            let (s, t) = (rng.gen_range(1..=n as NodeId), rng.gen_range(1..=n as NodeId));
            g.add_edge(e, Edge::new(s, t, pick(rng, &EDGE_LABELS))).unwrap();
        }
    }
    g
}

/// Like [`total_graph`] but every label and rootedness value may be missing.
pub fn partial_graph(rng: &mut ChaCha8Rng, n: usize, edges: usize) -> Graph {
    let mut g = total_graph(rng, n, edges);
    for v in 1..=n as NodeId {
        if rng.gen_bool(0.3) {
            g.set_label(v, None).unwrap();
        }
        if rng.gen_bool(0.3) {
            g.set_rooted(v, None).unwrap();
        }
    }
    g
}

pub fn small_total_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(1..=4);
    let e = rng.gen_range(0..=5);
    total_graph(rng, n, e)
}

pub fn small_partial_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(1..=4);
    let e = rng.gen_range(0..=5);
    partial_graph(rng, n, e)
}

/// A random rule. The interface keeps a subset of the left nodes, possibly
/// forgetting labels or rootedness, and a subset of the edges between kept
/// nodes. The right side fills forgotten values at random and may add
/// nodes and edges, numbered from 10.
pub fn random_rule(rng: &mut ChaCha8Rng) -> Rule {
    let n = rng.gen_range(1..=3);
    let e = rng.gen_range(0..=3);
    let left = total_graph(rng, n, e);
    let mut k = Graph::new();
    for (v, node) in left.nodes() {
        if rng.gen_bool(0.6) {
            let label = if rng.gen_bool(0.7) { node.label.clone() } else { None };
            let rooted = if rng.gen_bool(0.7) { node.rooted } else { None };
            k.add_node(v, Node::new(label, rooted)).unwrap();
        }
    }
    for (id, edge) in left.edges() {
        if k.contains_node(edge.src) && k.contains_node(edge.tgt) && rng.gen_bool(0.6) {
            k.add_edge(id, edge.clone()).unwrap();
        }
    }
    let mut right = Graph::new();
    for (v, node) in k.nodes() {
        let label = node.label.clone().or_else(|| Some(pick(rng, &NODE_LABELS)));
        let rooted = node.rooted.or_else(|| Some(rng.gen_bool(0.3)));
        right.add_node(v, Node::new(label, rooted)).unwrap();
    }
    for (id, edge) in k.edges() {
        right.add_edge(id, edge.clone()).unwrap();
    }
    for v in 10..10 + rng.gen_range(0..=2) {
        right.add_node(v, Node::new(Some(pick(rng, &NODE_LABELS)), Some(rng.gen_bool(0.2)))).unwrap();
    }
    let ids: Vec<NodeId> = right.node_ids().collect();
    if !ids.is_empty() {
        for id in 10..10 + rng.gen_range(0..=2) {
            let (s, t) = (*ids.choose(rng).unwrap(), *ids.choose(rng).unwrap());
            right.add_edge(id, Edge::new(s, t, pick(rng, &EDGE_LABELS))).unwrap();
        }
    }
    Rule::new(format!("q{}", rng.gen::<u16>()), left, k, right).expect("generated rule is well formed")
}

/// A rule, a host containing a copy of its left side plus noise, and a
/// dangling-free match into it.
pub fn random_triple(rng: &mut ChaCha8Rng) -> (Rule, Graph, Morphism) {
    loop {
        let r = random_rule(rng);
        let mut host = r.left.clone();
        let offset = host.next_node_id();
        for i in 0..rng.gen_range(0..=3) {
            host.add_node(offset + i, Node::new(Some(pick(rng, &NODE_LABELS)), Some(rng.gen_bool(0.2)))).unwrap();
        }
        let ids: Vec<NodeId> = host.node_ids().collect();
        for _ in 0..rng.gen_range(0..=3) {
            let id = host.next_edge_id();
            let (s, t) = (*ids.choose(rng).unwrap(), *ids.choose(rng).unwrap());
            host.add_edge(id, Edge::new(s, t, pick(rng, &EDGE_LABELS))).unwrap();
        }
        let ms = matches(&r, &host);
        if let Some(m) = ms.choose(rng) {
            return (r.clone(), host, m.clone());
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub total: usize,
    pub injective: usize,
    pub surjective: usize,
    pub bijective: usize,
}

/// Counts morphisms `g → h` by enumerating every node map and, per node
/// map, every choice of edge images.
pub fn brute_force_counts(g: &Graph, h: &Graph) -> Counts {
    let gn: Vec<NodeId> = g.node_ids().collect();
    let hn: Vec<NodeId> = h.node_ids().collect();
    let mut counts = Counts::default();
    if hn.is_empty() {
        counts.total = usize::from(gn.is_empty());
        counts.injective = counts.total;
        counts.surjective = counts.total;
        counts.bijective = counts.total;
        return counts;
    }
    let mut assign = vec![0usize; gn.len()];
    loop {
        let node_ok = gn.iter().zip(&assign).all(|(&v, &i)| {
            let (a, b) = (g.node(v).unwrap(), h.node(hn[i]).unwrap());
            (a.label.is_none() || a.label == b.label) && (a.rooted.is_none() || a.rooted == b.rooted)
        });
        if node_ok {
            let image = |v: NodeId| hn[assign[gn.iter().position(|&x| x == v).unwrap()]];
            let options: Vec<Vec<u64>> = g
                .edges()
                .map(|(_, e)| {
                    h.edges()
                        .filter(|(_, f)| f.label == e.label && f.src == image(e.src) && f.tgt == image(e.tgt))
                        .map(|(id, _)| id)
                        .collect()
                })
                .collect();
            let mut pick = vec![0usize; options.len()];
            if options.iter().all(|o| !o.is_empty()) {
                loop {
                    let nodes: Vec<NodeId> = assign.iter().map(|&i| hn[i]).collect();
                    let edges: Vec<u64> = pick.iter().zip(&options).map(|(&i, o)| o[i]).collect();
                    let distinct = |xs: &[u64]| {
                        let mut s = xs.to_vec();
                        s.sort_unstable();
                        s.dedup();
                        s.len()
                    };
                    let injective = distinct(&nodes) == nodes.len() && distinct(&edges) == edges.len();
                    let surjective = distinct(&nodes) == hn.len() && distinct(&edges) == h.edge_count();
                    counts.total += 1;
                    counts.injective += usize::from(injective);
                    counts.surjective += usize::from(surjective);
                    counts.bijective += usize::from(injective && surjective);
                    if !advance(&mut pick, |k| options[k].len()) {
                        break;
                    }
                }
            }
        }
        if !advance(&mut assign, |_| hn.len()) {
            return counts;
        }
    }
}

/// Odometer increment; false once every position has wrapped.
fn advance(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for (k, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < base(k) {
            return true;
        }
        *d = 0;
    }
    false
}
