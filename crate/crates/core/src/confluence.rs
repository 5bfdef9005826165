//! Independence of derivations, critical pairs, joinability and analysis of
//! local confluence up to garbage.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::Encoding;
use crate::graph::{EdgeId, Graph, LabelAlphabet, NodeId};
use crate::label::Label;
use crate::morphism::{is_isomorphic, isomorphism_with, signature, Morphism};
use crate::rules::{add_phase, apply, dangling_ok, delete_phase, matches, DerivationStep, Rule};
use crate::text::print_graph_body;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfluenceError {
    #[error("host mismatch: {0}")]
    HostMismatch(String),
}

/// One piece of a graph that a derivation may read, keep or change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Item {
    Node(NodeId),
    Edge(EdgeId),
    Label(NodeId),
    Root(NodeId),
}

/// Items of the image of `part` under `m`. Labels and rootedness count only
/// where `part` defines them.
fn image_items(part: &Graph, m: &Morphism) -> BTreeSet<Item> {
    let mut out = BTreeSet::new();
    for (v, n) in part.nodes() {
        let w = m.node(v);
        out.insert(Item::Node(w));
        if n.label.is_some() {
            out.insert(Item::Label(w));
        }
        if n.rooted.is_some() {
            out.insert(Item::Root(w));
        }
    }
    for e in part.edge_ids() {
        out.insert(Item::Edge(m.edge(e)));
    }
    out
}

fn independent(
    a_all: &BTreeSet<Item>,
    a_kept: &BTreeSet<Item>,
    b_all: &BTreeSet<Item>,
    b_kept: &BTreeSet<Item>,
) -> bool {
    a_all.intersection(b_all).all(|x| a_kept.contains(x) && b_kept.contains(x))
}

fn matches_independent(r1: &Rule, m1: &Morphism, r2: &Rule, m2: &Morphism) -> bool {
    independent(
        &image_items(&r1.left, m1),
        &image_items(&r1.interface, m1),
        &image_items(&r2.left, m2),
        &image_items(&r2.interface, m2),
    )
}

/// `g1(L1) ∩ g2(L2) ⊆ g1(K1) ∩ g2(K2)`, counting labels and rootedness as
/// items of their nodes.
pub fn parallelly_independent(s1: &DerivationStep, s2: &DerivationStep) -> Result<bool, ConfluenceError> {
    if s1.host != s2.host {
        return Err(ConfluenceError::HostMismatch("steps start from different graphs".into()));
    }
    Ok(matches_independent(&s1.rule, &s1.matching, &s2.rule, &s2.matching))
}

/// `h1(R1) ∩ g2(L2) ⊆ h1(K1) ∩ g2(K2)` for consecutive steps.
pub fn sequentially_independent(s1: &DerivationStep, s2: &DerivationStep) -> Result<bool, ConfluenceError> {
    if s1.result != s2.host {
        return Err(ConfluenceError::HostMismatch("second step does not start where the first ends".into()));
    }
    Ok(independent(
        &image_items(&s1.rule.right, &s1.comatch),
        &image_items(&s1.rule.interface, &s1.comatch),
        &image_items(&s2.rule.left, &s2.matching),
        &image_items(&s2.rule.interface, &s2.matching),
    ))
}

/// Verdict of the joinability search for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    StronglyJoinable,
    JoinableNotStrong,
    NotJoinable,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::StronglyJoinable => "strongly_joinable",
            Verdict::JoinableNotStrong => "joinable_not_strong",
            Verdict::NotJoinable => "not_joinable",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Two conflicting steps from a minimal overlap of their left sides.
#[derive(Clone, Debug)]
pub struct CriticalPair {
    pub overlap: Graph,
    /// Indices of the two rules in the analysed system.
    pub rules: (usize, usize),
    pub left_step: DerivationStep,
    pub right_step: DerivationStep,
    /// Overlap nodes deleted by neither step.
    pub persistent: BTreeSet<NodeId>,
}

impl CriticalPair {
    /// Persistent nodes with their images in the two results.
    pub fn tracked(&self) -> Vec<(NodeId, NodeId)> {
        self.persistent.iter().map(|p| (self.left_step.track[p], self.right_step.track[p])).collect()
    }
}

/// Node and edge identifications `(L1 item, L2 item)` behind an overlap.
type GlueKey = (Vec<(NodeId, NodeId)>, Vec<(EdgeId, EdgeId)>);

/// `L1` and `L2` glued along a partial identification, with the two
/// inclusions.
struct Overlap {
    graph: Graph,
    m1: Morphism,
    m2: Morphism,
    /// Node and edge identifications, for removing swapped duplicates.
    key: GlueKey,
}

/// All jointly surjective overlaps of `l1` and `l2`: partial injections of
/// nodes with equal label and rootedness, then of edges with equal labels
/// whose endpoints are identified.
fn overlaps(l1: &Graph, l2: &Graph) -> Vec<Overlap> {
    let n1: Vec<NodeId> = l1.node_ids().collect();
    let mut out = Vec::new();
    let mut sigma: Vec<(NodeId, NodeId)> = Vec::new();
    node_choices(l1, l2, &n1, 0, &mut sigma, &mut out);
    out
}

fn node_choices(
    l1: &Graph,
    l2: &Graph,
    n1: &[NodeId],
    i: usize,
    sigma: &mut Vec<(NodeId, NodeId)>,
    out: &mut Vec<Overlap>,
) {
    if i == n1.len() {
        let e1: Vec<EdgeId> = l1.edge_ids().collect();
        let mut tau = Vec::new();
        edge_choices(l1, l2, sigma, &e1, 0, &mut tau, out);
        return;
    }
    node_choices(l1, l2, n1, i + 1, sigma, out);
    let v = n1[i];
    for w in l2.node_ids() {
        if sigma.iter().any(|&(_, x)| x == w) || l1.node(v) != l2.node(w) {
            continue;
        }
        sigma.push((v, w));
        node_choices(l1, l2, n1, i + 1, sigma, out);
        sigma.pop();
    }
}

fn edge_choices(
    l1: &Graph,
    l2: &Graph,
    sigma: &[(NodeId, NodeId)],
    e1: &[EdgeId],
    i: usize,
    tau: &mut Vec<(EdgeId, EdgeId)>,
    out: &mut Vec<Overlap>,
) {
    if i == e1.len() {
        out.push(glue(l1, l2, sigma, tau));
        return;
    }
    edge_choices(l1, l2, sigma, e1, i + 1, tau, out);
    let a = l1.edge(e1[i]).unwrap();
    let image = |v: NodeId| sigma.iter().find(|p| p.0 == v).map(|p| p.1);
    let (Some(src), Some(tgt)) = (image(a.src), image(a.tgt)) else {
        return;
    };
    for &f in l2.out_edges(src) {
        let b = l2.edge(f).unwrap();
        if b.tgt != tgt || b.label != a.label || tau.iter().any(|&(_, x)| x == f) {
            continue;
        }
        tau.push((e1[i], f));
        edge_choices(l1, l2, sigma, e1, i + 1, tau, out);
        tau.pop();
    }
}

fn glue(l1: &Graph, l2: &Graph, sigma: &[(NodeId, NodeId)], tau: &[(EdgeId, EdgeId)]) -> Overlap {
    let mut g = l1.clone();
    let m1 = Morphism::identity(l1);
    let mut m2 = Morphism::default();
    let mut next = l1.next_node_id();
    for (w, n) in l2.nodes() {
        let img = match sigma.iter().find(|p| p.1 == w) {
            Some(p) => p.0,
            None => {
                g.add_node(next, n.clone()).unwrap();
                next += 1;
                next - 1
            }
        };
        m2.node_map.insert(w, img);
    }
    let mut next = l1.next_edge_id();
    for (f, b) in l2.edges() {
        let img = match tau.iter().find(|p| p.1 == f) {
            Some(p) => p.0,
            None => {
                let e = crate::graph::Edge::new(m2.node(b.src), m2.node(b.tgt), b.label.clone());
                g.add_edge(next, e).unwrap();
                next += 1;
                next - 1
            }
        };
        m2.edge_map.insert(f, img);
    }
    Overlap { graph: g, m1, m2, key: (sigma.to_vec(), tau.to_vec()) }
}

fn inverse_key(key: &GlueKey) -> GlueKey {
    let mut s: Vec<_> = key.0.iter().map(|&(a, b)| (b, a)).collect();
    let mut t: Vec<_> = key.1.iter().map(|&(a, b)| (b, a)).collect();
    s.sort();
    t.sort();
    (s, t)
}

/// Overlaps of rules `i ≤ j` that form critical pairs: both matches are
/// dangling free, the steps are not parallelly independent, and for a rule
/// with itself the matches differ and swapped duplicates are dropped.
fn critical_overlaps(rules: &[Rule]) -> Vec<((usize, usize), Overlap)> {
    let mut out = Vec::new();
    for i in 0..rules.len() {
        for j in i..rules.len() {
            let (r1, r2) = (&rules[i], &rules[j]);
            for o in overlaps(&r1.left, &r2.left) {
                if i == j {
                    if o.m1 == o.m2 {
                        continue;
                    }
                    let mut key = o.key.clone();
                    key.0.sort();
                    key.1.sort();
                    if inverse_key(&o.key) < key {
                        continue;
                    }
                }
                if dangling_ok(r1, &o.graph, &o.m1).is_some() || dangling_ok(r2, &o.graph, &o.m2).is_some() {
                    continue;
                }
                if matches_independent(r1, &o.m1, r2, &o.m2) {
                    continue;
                }
                out.push(((i, j), o));
            }
        }
    }
    out
}

fn make_pair(rules: &[Rule], (i, j): (usize, usize), overlap: Graph, m1: &Morphism, m2: &Morphism) -> CriticalPair {
    let left_step = apply(&rules[i], &overlap, m1).expect("critical match applies");
    let right_step = apply(&rules[j], &overlap, m2).expect("critical match applies");
    let persistent =
        overlap.node_ids().filter(|v| left_step.track.contains_key(v) && right_step.track.contains_key(v)).collect();
    CriticalPair { overlap, rules: (i, j), left_step, right_step, persistent }
}

/// Critical pairs computed directly on the given rules.
pub fn enumerate_critical_pairs_direct(rules: &[Rule]) -> Vec<CriticalPair> {
    critical_overlaps(rules).into_iter().map(|(ij, o)| make_pair(rules, ij, o.graph, &o.m1, &o.m2)).collect()
}

/// Critical pairs computed on the encoded, totally labelled rules, keeping
/// overlaps that decode to totally labelled rooted graphs, then decoded and
/// re-derived with the original rules.
pub fn enumerate_critical_pairs_encoded(rules: &[Rule]) -> Vec<CriticalPair> {
    let alphabet = LabelAlphabet::infer(rules.iter().flat_map(|r| [&r.left, &r.interface, &r.right]));
    let enc = Encoding::for_alphabet(&alphabet);
    let encoded: Vec<Rule> = rules.iter().map(|r| enc.encode_rule(r).expect("alphabet covers rules")).collect();
    let mut out = Vec::new();
    for ((i, j), o) in critical_overlaps(&encoded) {
        let Ok((overlap, edges)) = enc.decode_graph_with_map(&o.graph) else {
            continue;
        };
        if !overlap.is_total() {
            continue;
        }
        let m1 = enc.decode_morphism(&o.m1, &rules[i].left, &edges);
        let m2 = enc.decode_morphism(&o.m2, &rules[j].left, &edges);
        out.push(make_pair(rules, (i, j), overlap, &m1, &m2));
    }
    out
}

/// One representative per critical pair, for rule pairs `i ≤ j` in order.
/// Systems of standard rules are analysed directly; systems with roots or
/// relabelling go through the encoding.
pub fn enumerate_critical_pairs(rules: &[Rule]) -> Vec<CriticalPair> {
    if rules.iter().all(Rule::is_standard) {
        enumerate_critical_pairs_direct(rules)
    } else {
        enumerate_critical_pairs_encoded(rules)
    }
}

/// A decision procedure for the non-garbage graphs, that is, for the
/// subgraph closure of the language of interest. It must be invariant
/// under isomorphism.
#[derive(Clone)]
pub struct GarbagePredicate {
    pub name: String,
    member: Arc<dyn Fn(&Graph) -> bool + Send + Sync>,
}

impl fmt::Debug for GarbagePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GarbagePredicate({})", self.name)
    }
}

impl GarbagePredicate {
    pub fn new(name: impl Into<String>, member: impl Fn(&Graph) -> bool + Send + Sync + 'static) -> Self {
        GarbagePredicate { name: name.into(), member: Arc::new(member) }
    }

    /// Whether `g` is non-garbage.
    pub fn member(&self, g: &Graph) -> bool {
        (self.member)(g)
    }

    pub fn accept_all() -> Self {
        GarbagePredicate::new("all", |_| true)
    }

    /// Subgraphs of trees with at most one root: every node has at most one
    /// incoming edge, no undirected cycle (loops and parallel edges count),
    /// and at most one root overall.
    pub fn forest_single_root() -> Self {
        GarbagePredicate::new("forest", |g| {
            g.root_count() <= 1
                && g.node_ids().all(|v| g.indegree(v) <= 1)
                && g.components().iter().all(|c| {
                    let edges: usize = c.iter().map(|&v| g.outdegree(v)).sum();
                    edges + 1 == c.len()
                })
        })
    }

    pub fn at_most_roots(k: usize) -> Self {
        GarbagePredicate::new(format!("roots<={k}"), move |g| g.root_count() <= k)
    }

    /// Every directed cycle, loops included, contains an edge labelled `l`.
    pub fn cycles_have_label(l: &str) -> Self {
        let label = Label::from(l);
        GarbagePredicate::new(format!("cycles-have-{l}"), move |g| {
            let mut indeg: BTreeMap<NodeId, usize> = g
                .node_ids()
                .map(|v| (v, g.in_edges(v).iter().filter(|&&e| g.edge(e).unwrap().label != label).count()))
                .collect();
            let mut ready: Vec<NodeId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
            let mut seen = 0;
            while let Some(v) = ready.pop() {
                seen += 1;
                for &e in g.out_edges(v) {
                    let edge = g.edge(e).unwrap();
                    if edge.label == label {
                        continue;
                    }
                    let d = indeg.get_mut(&edge.tgt).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.push(edge.tgt);
                    }
                }
            }
            seen == g.node_count()
        })
    }

    pub fn and(self, other: GarbagePredicate) -> Self {
        let name = format!("{}+{}", self.name, other.name);
        GarbagePredicate::new(name, move |g| self.member(g) && other.member(g))
    }

    /// Parses built-in names: `all`, `forest`, `roots<=k`, `cycles-have-t`
    /// or `cycles-have-<label>`, joined with `+`.
    pub fn parse(spec: &str) -> Option<Self> {
        let mut parts = spec.split('+').map(|p| {
            let p = p.trim();
            match p {
                "all" => Some(GarbagePredicate::accept_all()),
                "forest" => Some(GarbagePredicate::forest_single_root()),
                _ => {
                    if let Some(k) = p.strip_prefix("roots<=") {
                        k.parse().ok().map(GarbagePredicate::at_most_roots)
                    } else {
                        p.strip_prefix("cycles-have-")
                            .filter(|l| !l.is_empty())
                            .map(GarbagePredicate::cycles_have_label)
                    }
                }
            }
        });
        let first = parts.next()??;
        parts.try_fold(first, |acc, p| p.map(|p| acc.and(p)))
    }

    /// Samples isomorphism invariance by renumbering the nodes of each
    /// sample in reverse.
    pub fn invariant_on(&self, samples: &[Graph]) -> bool {
        samples.iter().all(|g| {
            let top = g.next_node_id();
            self.member(g) == self.member(&crate::graph::rename_nodes(g, |v| top - v))
        })
    }
}

/// Pairs whose overlap is non-garbage.
pub fn filter_non_garbage(pairs: &[CriticalPair], p: &GarbagePredicate) -> Vec<CriticalPair> {
    pairs.iter().filter(|c| p.member(&c.overlap)).cloned().collect()
}

/// Derivation sequences from both sides to a common graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinWitness {
    pub left: Vec<(usize, Morphism)>,
    pub right: Vec<(usize, Morphism)>,
    /// Isomorphism from the left end graph to the right one.
    pub iso: Morphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinResult {
    pub verdict: Verdict,
    pub witness: Option<JoinWitness>,
    /// Both searches ran out of successors within the depth.
    pub exhausted: (bool, bool),
}

/// States kept per side before the search gives up.
const STATE_CAP: usize = 20_000;

struct State {
    graph: Graph,
    track: Vec<Option<NodeId>>,
    parent: Option<(usize, usize, Morphism)>,
    depth: usize,
}

fn colours(track: &[Option<NodeId>]) -> BTreeMap<NodeId, u64> {
    track.iter().enumerate().filter_map(|(i, w)| w.map(|w| (w, i as u64 + 1))).collect()
}

fn same_state(a: &State, b_graph: &Graph, b_track: &[Option<NodeId>]) -> bool {
    if a.track.iter().zip(b_track).any(|(x, y)| x.is_some() != y.is_some()) {
        return false;
    }
    let pins = a.track.iter().zip(b_track).filter_map(|(x, y)| Some(((*x)?, (*y)?))).collect();
    isomorphism_with(&a.graph, b_graph, &pins).is_some()
}

/// Breadth-first search of everything reachable within `depth` steps,
/// merging states that agree up to an isomorphism respecting the tracks.
fn explore(rules: &[Rule], start: &Graph, track: Vec<Option<NodeId>>, depth: usize) -> (Vec<State>, bool) {
    let mut states = vec![State { graph: start.clone(), track, parent: None, depth: 0 }];
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    buckets.entry(signature(start, &colours(&states[0].track))).or_default().push(0);
    let mut exhausted = true;
    let mut next = 0;
    while next < states.len() {
        let at = next;
        next += 1;
        let mut succ = Vec::new();
        for (i, r) in rules.iter().enumerate() {
            for m in matches(r, &states[at].graph) {
                succ.push((i, m));
            }
        }
        if succ.is_empty() {
            continue;
        }
        if states[at].depth == depth || states.len() >= STATE_CAP {
            exhausted = false;
            continue;
        }
        for (i, m) in succ {
            let r = &rules[i];
            let gone: BTreeSet<NodeId> = r.deleted_nodes().map(|v| m.node(v)).collect();
            let mut h = states[at].graph.clone();
            delete_phase(&mut h, r, &m);
            add_phase(&mut h, r, &m);
            let track: Vec<Option<NodeId>> = states[at].track.iter().map(|w| w.filter(|w| !gone.contains(w))).collect();
            let sig = signature(&h, &colours(&track));
            let bucket = buckets.entry(sig).or_default();
            if bucket.iter().any(|&s| same_state(&states[s], &h, &track)) {
                continue;
            }
            bucket.push(states.len());
            let depth = states[at].depth + 1;
            states.push(State { graph: h, track, parent: Some((at, i, m)), depth });
        }
    }
    (states, exhausted)
}

fn path(states: &[State], mut at: usize) -> Vec<(usize, Morphism)> {
    let mut out = Vec::new();
    while let Some((p, i, m)) = &states[at].parent {
        out.push((*i, m.clone()));
        at = *p;
    }
    out.reverse();
    out
}

/// Searches for a common reduct of `g1` and `g2` within `depth` steps on
/// each side. `tracked` lists node pairs that a strong join must keep and
/// identify.
pub fn join_graphs(rules: &[Rule], g1: &Graph, g2: &Graph, tracked: &[(NodeId, NodeId)], depth: usize) -> JoinResult {
    let (left, ex1) = explore(rules, g1, tracked.iter().map(|p| Some(p.0)).collect(), depth);
    let (right, ex2) = explore(rules, g2, tracked.iter().map(|p| Some(p.1)).collect(), depth);
    let mut by_sig: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, s) in right.iter().enumerate() {
        by_sig.entry(signature(&s.graph, &BTreeMap::new())).or_default().push(i);
    }
    let mut plain = None;
    for (a, s) in left.iter().enumerate() {
        let Some(candidates) = by_sig.get(&signature(&s.graph, &BTreeMap::new())) else {
            continue;
        };
        for &b in candidates {
            let t = &right[b];
            let all_defined = s.track.iter().chain(&t.track).all(Option::is_some);
            if all_defined {
                let pins = s.track.iter().zip(&t.track).map(|(x, y)| (x.unwrap(), y.unwrap())).collect();
                if let Some(iso) = isomorphism_with(&s.graph, &t.graph, &pins) {
                    let witness = JoinWitness { left: path(&left, a), right: path(&right, b), iso };
                    return JoinResult {
                        verdict: Verdict::StronglyJoinable,
                        witness: Some(witness),
                        exhausted: (ex1, ex2),
                    };
                }
            }
            if plain.is_none() {
                if let Some(iso) = is_isomorphic(&s.graph, &t.graph) {
                    plain = Some(JoinWitness { left: path(&left, a), right: path(&right, b), iso });
                }
            }
        }
    }
    let verdict = match (&plain, ex1 && ex2) {
        (Some(_), _) => Verdict::JoinableNotStrong,
        (None, true) => Verdict::NotJoinable,
        (None, false) => Verdict::Unknown,
    };
    JoinResult { verdict, witness: plain, exhausted: (ex1, ex2) }
}

/// Joinability of the two results of `pair`, strong when every persistent
/// node survives on both sides and is identified by the joining
/// isomorphism.
pub fn check_joinability(pair: &CriticalPair, rules: &[Rule], depth: usize) -> JoinResult {
    join_graphs(rules, &pair.left_step.result, &pair.right_step.result, &pair.tracked(), depth)
}

/// Replays a witness and checks that it ends in isomorphic graphs and, when
/// `strong`, that the tracked nodes survive and correspond.
pub fn verify_witness(
    rules: &[Rule],
    g1: &Graph,
    g2: &Graph,
    tracked: &[(NodeId, NodeId)],
    w: &JoinWitness,
    strong: bool,
) -> bool {
    let run = |g: &Graph, seq: &[(usize, Morphism)], mut track: Vec<Option<NodeId>>| {
        let mut g = g.clone();
        for (i, m) in seq {
            let step = apply(&rules[*i], &g, m).ok()?;
            track = track.into_iter().map(|w| w.and_then(|w| step.track.get(&w).copied())).collect();
            g = step.result;
        }
        Some((g, track))
    };
    let Some((h1, t1)) = run(g1, &w.left, tracked.iter().map(|p| Some(p.0)).collect()) else {
        return false;
    };
    let Some((h2, t2)) = run(g2, &w.right, tracked.iter().map(|p| Some(p.1)).collect()) else {
        return false;
    };
    if !w.iso.is_isomorphism(&h1, &h2) {
        return false;
    }
    !strong || t1.iter().zip(&t2).all(|(a, b)| matches!((a, b), (Some(a), Some(b)) if w.iso.node(*a) == *b))
}

/// Overall outcome of an analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    /// Every critical pair is strongly joinable.
    LocallyConfluent,
    /// Every non-garbage critical pair is strongly joinable.
    LocallyConfluentUpToGarbage,
    /// A non-garbage pair is not joinable; the index is into the pair list.
    NonConfluentWitness(usize),
    /// Some non-garbage pair is only joinable or undecided.
    Inconclusive,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::LocallyConfluent => "locally_confluent",
            Conclusion::LocallyConfluentUpToGarbage => "locally_confluent_up_to_garbage",
            Conclusion::NonConfluentWitness(_) => "non_confluent_witness",
            Conclusion::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PairReport {
    pub pair: CriticalPair,
    /// The overlap fails the garbage predicate.
    pub garbage: bool,
    pub join: JoinResult,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub rule_names: Vec<String>,
    pub predicate: Option<String>,
    pub depth: usize,
    pub pairs: Vec<PairReport>,
    pub conclusion: Conclusion,
    /// Per rule, whether it has fewer nodes and edges on the right.
    pub size_reducing: Vec<bool>,
}

impl Analysis {
    /// Every rule strictly reduces size, so the system terminates.
    pub fn terminating_by_size(&self) -> bool {
        self.size_reducing.iter().all(|&b| b)
    }

    fn count(&self, v: Verdict) -> usize {
        self.pairs.iter().filter(|p| p.join.verdict == v).count()
    }

    /// `pairs=.. strong=.. joinable=.. nonjoinable=.. unknown=.. conclusion=..`,
    /// counting every enumerated pair.
    pub fn summary_line(&self) -> String {
        format!(
            "pairs={} strong={} joinable={} nonjoinable={} unknown={} conclusion={}",
            self.pairs.len(),
            self.count(Verdict::StronglyJoinable),
            self.count(Verdict::JoinableNotStrong),
            self.count(Verdict::NotJoinable),
            self.count(Verdict::Unknown),
            self.conclusion
        )
    }

    /// Per-pair blocks followed by the conclusion and the summary line.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let name = |i: usize| self.rule_names[i].as_str();
        for (k, p) in self.pairs.iter().enumerate() {
            let (i, j) = p.pair.rules;
            let _ = writeln!(s, "pair {} {} {}", k + 1, name(i), name(j));
            let _ = writeln!(s, "  overlap {{");
            s.push_str(&print_graph_body(&p.pair.overlap, 4));
            let _ = writeln!(s, "  }}");
            let persistent: Vec<String> = p.pair.persistent.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "  persistent {}", persistent.join(" "));
            let _ = writeln!(s, "  garbage {}", if p.garbage { "yes" } else { "no" });
            let _ = writeln!(s, "  verdict {}", p.join.verdict);
            if let Some(w) = &p.join.witness {
                let seq = |v: &[(usize, Morphism)]| match v {
                    [] => "-".to_string(),
                    _ => v.iter().map(|(i, _)| name(*i)).collect::<Vec<_>>().join(" "),
                };
                let _ = writeln!(s, "  left {}", seq(&w.left));
                let _ = writeln!(s, "  right {}", seq(&w.right));
            }
        }
        if self.terminating_by_size() {
            let _ = writeln!(s, "termination every rule is size reducing");
        }
        let _ = writeln!(s, "conclusion {}", self.conclusion);
        let _ = writeln!(s, "{}", self.summary_line());
        s
    }
}

/// Enumerates critical pairs, marks garbage ones, checks joinability of
/// each (in parallel) and draws a conclusion from the non-garbage pairs.
pub fn analyze(rules: &[Rule], predicate: Option<&GarbagePredicate>, depth: usize) -> Analysis {
    let pairs = enumerate_critical_pairs(rules);
    let reports: Vec<PairReport> = pairs
        .into_par_iter()
        .map(|pair| {
            let garbage = predicate.is_some_and(|p| !p.member(&pair.overlap));
            let join = check_joinability(&pair, rules, depth);
            PairReport { pair, garbage, join }
        })
        .collect();
    let relevant = || reports.iter().enumerate().filter(|(_, p)| !p.garbage);
    let conclusion = if let Some((k, _)) = relevant().find(|(_, p)| p.join.verdict == Verdict::NotJoinable) {
        Conclusion::NonConfluentWitness(k)
    } else if relevant().all(|(_, p)| p.join.verdict == Verdict::StronglyJoinable) {
        if predicate.is_some() {
            Conclusion::LocallyConfluentUpToGarbage
        } else {
            Conclusion::LocallyConfluent
        }
    } else {
        Conclusion::Inconclusive
    };
    Analysis {
        rule_names: rules.iter().map(|r| r.name.clone()).collect(),
        predicate: predicate.map(|p| p.name.clone()),
        depth,
        pairs: reports,
        conclusion,
        size_reducing: rules.iter().map(Rule::is_size_reducing).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::label::BOX;
    use crate::systems::{efd_grammar, nonclosed_system, tree_grammar, tree_system};

    fn boxes(n: u64) -> Graph {
        (1..=n).fold(Graph::new(), |g, v| g.with_node(v, Node::total(BOX, false)))
    }

    #[test]
    fn tree_grammar_inverse_has_no_pairs() {
        let sys = tree_grammar().inverse();
        let a = analyze(&sys.rules, None, 8);
        assert_eq!(a.pairs.len(), 0);
        assert_eq!(a.conclusion, Conclusion::LocallyConfluent);
        assert!(a.terminating_by_size());
    }

    #[test]
    fn tree_system_pair_with_two_root_children() {
        let sys = tree_system();
        let a = analyze(&sys.rules, Some(&GarbagePredicate::forest_single_root()), 8);
        let two_children = Graph::new()
            .with_node(1, Node::total(BOX, true))
            .with_node(2, Node::total(BOX, false))
            .with_node(3, Node::total(BOX, false))
            .with_edge(1, 1, 2, BOX)
            .with_edge(2, 1, 3, BOX);
        let hits: Vec<&PairReport> =
            a.pairs.iter().filter(|p| is_isomorphic(&p.pair.overlap, &two_children).is_some()).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].join.verdict, Verdict::JoinableNotStrong);
        assert!(!hits[0].garbage);
        assert_eq!(a.pairs.iter().filter(|p| !p.garbage).count(), 1);
        assert_eq!(a.conclusion, Conclusion::Inconclusive);
    }

    #[test]
    fn routes_agree_on_rooted_system() {
        let rules = tree_system().rules;
        let direct = enumerate_critical_pairs_direct(&rules);
        let encoded = enumerate_critical_pairs_encoded(&rules);
        assert_eq!(direct.len(), encoded.len());
        for (a, b) in direct.iter().zip(&encoded) {
            assert_eq!(a.rules, b.rules);
            assert!(is_isomorphic(&a.overlap, &b.overlap).is_some());
            assert_eq!(a.persistent.len(), b.persistent.len());
        }
    }

    #[test]
    fn pairs_are_conflicting_unions() {
        for sys in [tree_system(), efd_grammar().inverse(), nonclosed_system()] {
            for p in enumerate_critical_pairs(&sys.rules) {
                let (i, j) = p.rules;
                let mut covered: BTreeSet<NodeId> = p.left_step.matching.node_map.values().copied().collect();
                covered.extend(p.right_step.matching.node_map.values());
                assert_eq!(covered, p.overlap.node_ids().collect());
                assert!(!parallelly_independent(&p.left_step, &p.right_step).unwrap());
                assert!(i != j || p.left_step.matching != p.right_step.matching);
            }
        }
    }

    #[test]
    fn efd_inverse_pairs() {
        let sys = efd_grammar().inverse();
        let pred = GarbagePredicate::cycles_have_label("t");
        let a = analyze(&sys.rules, Some(&pred), 8);
        assert_eq!(
            a.summary_line(),
            "pairs=2 strong=2 joinable=0 nonjoinable=0 unknown=0 conclusion=locally_confluent_up_to_garbage"
        );
        assert_eq!(a.pairs.iter().filter(|p| p.garbage).count(), 1);
    }

    #[test]
    fn identical_results_join_at_depth_zero() {
        let g = boxes(2).with_edge(1, 1, 2, BOX);
        let j = join_graphs(&tree_system().rules, &g, &g, &[(1, 1), (2, 2)], 0);
        assert_eq!(j.verdict, Verdict::StronglyJoinable);
        let w = j.witness.unwrap();
        assert!(w.left.is_empty() && w.right.is_empty());
    }

    #[test]
    fn nonclosed_divergence_is_not_joinable() {
        let sys = nonclosed_system();
        let loops = |g: Graph| g.with_edge(3, 3, 3, BOX).with_edge(4, 3, 3, BOX);
        let left = loops(boxes(3).with_edge(1, 1, 2, BOX).with_edge(2, 2, 3, BOX));
        let right = loops(boxes(3).with_edge(1, 1, 2, BOX).with_edge(2, 1, 3, BOX));
        let j = join_graphs(&sys.rules, &left, &right, &[], 6);
        assert_eq!(j.verdict, Verdict::NotJoinable);
        assert_eq!(j.exhausted, (true, true));
    }

    #[test]
    fn witnesses_replay() {
        let rules = tree_system().rules;
        for p in enumerate_critical_pairs(&rules) {
            let j = check_joinability(&p, &rules, 8);
            if let Some(w) = &j.witness {
                let strong = j.verdict == Verdict::StronglyJoinable;
                assert!(verify_witness(&rules, &p.left_step.result, &p.right_step.result, &p.tracked(), w, strong));
            }
        }
    }

    #[test]
    fn predicates() {
        let path = boxes(3).with_edge(1, 1, 2, BOX).with_edge(2, 2, 3, BOX);
        let forest = GarbagePredicate::forest_single_root();
        assert!(forest.member(&path));
        assert!(!forest.member(&path.clone().with_edge(3, 1, 2, BOX)));
        assert!(!forest.member(&path.clone().with_edge(3, 3, 3, BOX)));
        assert!(!forest.member(&path.clone().with_edge(3, 1, 3, BOX)));
        let t = GarbagePredicate::cycles_have_label("t");
        assert!(t.member(&path.clone().with_edge(3, 3, 1, "t")));
        assert!(!t.member(&path.clone().with_edge(3, 3, 1, BOX)));
        assert!(forest.invariant_on(std::slice::from_ref(&path)));
        assert_eq!(GarbagePredicate::parse("forest+roots<=1").unwrap().name, "forest+roots<=1");
        assert!(GarbagePredicate::parse("nonsense").is_none());
    }

    #[test]
    fn independence_of_disjoint_steps() {
        let rules = tree_system().rules;
        let g = crate::systems::fixtures::tree_reduction_input();
        let steps = crate::rules::successors(&rules, &g);
        for a in &steps {
            for b in &steps {
                let shared = a.matching.node_map.values().any(|v| b.matching.node_map.values().any(|w| v == w));
                if !shared {
                    assert!(parallelly_independent(a, b).unwrap());
                }
            }
        }
        let other = crate::systems::fixtures::single_root();
        let s = &steps[0];
        let mut moved = s.clone();
        moved.host = other;
        assert!(parallelly_independent(s, &moved).is_err());
    }
}
