//! Fast rules, static bound checks, root-anchored matching and the
//! reduction and recognition drivers.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, NodeId};
use crate::morphism::{is_isomorphic, node_compatible, signature, Morphism};
use crate::rules::{add_phase, dangling_ok, delete_phase, matches, DerivationStep, Rule, Track};

/// How `reduce` chooses among applicable matches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Apply the first available match until none is left.
    #[default]
    FirstMatch,
    /// Explore every derivation and collect each normal form once.
    AllNormalForms,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::FirstMatch => "first_match",
            Strategy::AllNormalForms => "all_normal_forms",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineConfig {
    /// Bound `N` on node degree.
    pub degree_bound: Option<usize>,
    /// Bound `M` on the number of roots.
    pub root_bound: Option<usize>,
    pub max_steps: Option<usize>,
    pub strategy: Strategy,
    /// Keep a full copy of the working graph every this many steps so that
    /// intermediate graphs of long traces can be recovered quickly.
    pub snapshot_every: Option<usize>,
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_steps == Some(0) {
            return Err(EngineError::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.degree_bound == Some(0) || self.root_bound == Some(0) || self.snapshot_every == Some(0) {
            return Err(EngineError::InvalidConfig("bounds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error)]
pub enum EngineError {
    #[error("rule {0} is not fast: some component of its left side has no root")]
    NotFastRule(String),
    #[error("step budget of {budget} exhausted")]
    StepBudgetExceeded { budget: usize, partial: Box<Reduction> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Every connected component of the left side contains a root node.
pub fn is_fast(r: &Rule) -> bool {
    r.left.components().iter().all(|comp| comp.iter().any(|&v| r.left.node(v).unwrap().is_root()))
}

/// Outcome of the static preservation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundsReport {
    /// `None` when no degree bound is configured.
    pub degree_ok: Option<bool>,
    pub roots_ok: bool,
}

/// New nodes have degree at most `N` in `R`, interface nodes do not gain
/// degree, and `R` has no more roots than `L`.
pub fn preserves_bounds(r: &Rule, cfg: &EngineConfig) -> BoundsReport {
    let degree_ok = cfg.degree_bound.map(|n| {
        r.created_nodes().all(|v| r.right.degree(v) <= n)
            && r.interface.node_ids().all(|v| r.right.degree(v) <= r.left.degree(v))
    });
    BoundsReport { degree_ok, roots_ok: r.right.root_count() <= r.left.root_count() }
}

/// One extension step: `known` is already matched, the edge leads to
/// `other` (outgoing) or comes from it.
#[derive(Clone, Debug)]
struct Ext {
    edge: EdgeId,
    known: NodeId,
    other: NodeId,
    outgoing: bool,
}

#[derive(Clone, Debug)]
struct ComponentPlan {
    root: NodeId,
    steps: Vec<Ext>,
}

/// A compiled fast rule: per component, a root to anchor and the order in
/// which incident edges are followed from it.
#[derive(Clone, Debug)]
pub struct RootedPlan {
    components: Vec<ComponentPlan>,
    /// Deleted nodes with their degree in `L`, for the dangling test.
    deleted: Vec<(NodeId, usize)>,
    node_slots: usize,
    edge_slots: usize,
}

impl RootedPlan {
    pub fn compile(r: &Rule) -> Result<RootedPlan, EngineError> {
        if !is_fast(r) {
            return Err(EngineError::NotFastRule(r.name.clone()));
        }
        let l = &r.left;
        let mut components = Vec::new();
        for comp in l.components() {
            let root = *comp.iter().find(|&&v| l.node(v).unwrap().is_root()).unwrap();
            let mut reached = vec![root];
            let mut planned = Vec::new();
            let mut queue = VecDeque::from([root]);
            let mut steps = Vec::new();
            while let Some(u) = queue.pop_front() {
                let out = l.out_edges(u).iter().map(|&e| (e, true));
                let inc = l.in_edges(u).iter().map(|&e| (e, false));
                for (e, outgoing) in out.chain(inc) {
                    if planned.contains(&e) {
                        continue;
                    }
                    planned.push(e);
                    let edge = l.edge(e).unwrap();
                    let other = if outgoing { edge.tgt } else { edge.src };
                    steps.push(Ext { edge: e, known: u, other, outgoing });
                    if !reached.contains(&other) {
                        reached.push(other);
                        queue.push_back(other);
                    }
                }
            }
            components.push(ComponentPlan { root, steps });
        }
        Ok(RootedPlan {
            components,
            deleted: r.deleted_nodes().map(|v| (v, l.degree(v))).collect(),
            node_slots: l.next_node_id() as usize,
            edge_slots: l.next_edge_id() as usize,
        })
    }
}

/// Partial match under construction. Sized by the rule, never by the host.
struct Partial {
    node_img: Vec<Option<NodeId>>,
    edge_img: Vec<Option<EdgeId>>,
    nodes_used: Vec<NodeId>,
    edges_used: Vec<EdgeId>,
}

struct RootedSearch<'a, F> {
    rule: &'a Rule,
    plan: &'a RootedPlan,
    host: &'a Graph,
    state: Partial,
    visited: u64,
    emit: F,
}

impl<'a, F: FnMut(&Partial) -> ControlFlow<()>> RootedSearch<'a, F> {
    fn try_node(&mut self, v: NodeId, w: NodeId) -> bool {
        self.visited += 1;
        !self.state.nodes_used.contains(&w)
            && node_compatible(self.rule.left.node(v).unwrap(), self.host.node(w).unwrap(), false)
    }

    fn bind_node(&mut self, v: NodeId, w: NodeId) {
        self.state.node_img[v as usize] = Some(w);
        self.state.nodes_used.push(w);
    }

    fn unbind_node(&mut self, v: NodeId) {
        self.state.node_img[v as usize] = None;
        self.state.nodes_used.pop();
    }

    fn component(&mut self, c: usize) -> ControlFlow<()> {
        if c == self.plan.components.len() {
            for &(v, deg) in &self.plan.deleted {
                self.visited += 1;
                if self.host.degree(self.state.node_img[v as usize].unwrap()) != deg {
                    return ControlFlow::Continue(());
                }
            }
            return (self.emit)(&self.state);
        }
        let root = self.plan.components[c].root;
        let anchors: Vec<NodeId> = self.host.roots().collect();
        for w in anchors {
            if !self.try_node(root, w) {
                continue;
            }
            self.bind_node(root, w);
            let r = self.extend(c, 0);
            self.unbind_node(root);
            r?;
        }
        ControlFlow::Continue(())
    }

    fn extend(&mut self, c: usize, i: usize) -> ControlFlow<()> {
        let plan = self.plan;
        let Some(step) = plan.components[c].steps.get(i) else {
            return self.component(c + 1);
        };
        let x = self.state.node_img[step.known as usize].unwrap();
        let l_edge = self.rule.left.edge(step.edge).unwrap();
        let host = self.host;
        let incident = if step.outgoing { host.out_edges(x) } else { host.in_edges(x) };
        for &f in incident {
            self.visited += 1;
            if self.state.edges_used.contains(&f) {
                continue;
            }
            let h_edge = host.edge(f).unwrap();
            if h_edge.label != l_edge.label {
                continue;
            }
            let y = if step.outgoing { h_edge.tgt } else { h_edge.src };
            let fresh = match self.state.node_img[step.other as usize] {
                Some(bound) if bound == y => false,
                Some(_) => continue,
                None => {
                    if !self.try_node(step.other, y) {
                        continue;
                    }
                    self.bind_node(step.other, y);
                    true
                }
            };
            self.state.edge_img[step.edge as usize] = Some(f);
            self.state.edges_used.push(f);
            let r = self.extend(c, i + 1);
            self.state.edges_used.pop();
            self.state.edge_img[step.edge as usize] = None;
            if fresh {
                self.unbind_node(step.other);
            }
            r?;
        }
        ControlFlow::Continue(())
    }
}

fn to_morphism(rule: &Rule, p: &Partial) -> Morphism {
    Morphism {
        node_map: rule.left.node_ids().map(|v| (v, p.node_img[v as usize].unwrap())).collect(),
        edge_map: rule.left.edge_ids().map(|e| (e, p.edge_img[e as usize].unwrap())).collect(),
    }
}

/// Runs the anchored search, returning the number of host items visited.
fn run_rooted(
    rule: &Rule,
    plan: &RootedPlan,
    host: &Graph,
    mut on_match: impl FnMut(Morphism) -> ControlFlow<()>,
) -> u64 {
    let mut s = RootedSearch {
        rule,
        plan,
        host,
        state: Partial {
            node_img: vec![None; plan.node_slots],
            edge_img: vec![None; plan.edge_slots],
            nodes_used: Vec::new(),
            edges_used: Vec::new(),
        },
        visited: 0,
        emit: |p: &Partial| on_match(to_morphism(rule, p)),
    };
    let _ = s.component(0);
    s.visited
}

/// All dangling-free injective matches of a fast rule, found by anchoring
/// at host roots and following incident edges. Sorted by node map.
pub fn rooted_matches(r: &Rule, g: &Graph) -> Result<Vec<Morphism>, EngineError> {
    rooted_matches_counted(r, g).map(|(m, _)| m)
}

/// [`rooted_matches`] together with the number of host nodes and edges the
/// search examined.
pub fn rooted_matches_counted(r: &Rule, g: &Graph) -> Result<(Vec<Morphism>, u64), EngineError> {
    let plan = RootedPlan::compile(r)?;
    let mut out = Vec::new();
    let visited = run_rooted(r, &plan, g, |m| {
        out.push(m);
        ControlFlow::Continue(())
    });
    out.sort();
    Ok((out, visited))
}

/// A rule prepared for repeated matching.
struct Prepared<'a> {
    rule: &'a Rule,
    plan: Option<RootedPlan>,
}

fn prepare(rules: &[Rule]) -> Vec<Prepared<'_>> {
    rules.iter().map(|rule| Prepared { rule, plan: RootedPlan::compile(rule).ok() }).collect()
}

/// The first match in tie-breaking order: rules as declared, anchors by
/// ascending root id, extensions by ascending edge id. Rules that are not
/// fast fall back to the smallest match by node map.
fn first_match(prepared: &[Prepared<'_>], g: &Graph, visited: &mut u64) -> Option<(usize, Morphism)> {
    for (i, p) in prepared.iter().enumerate() {
        let found = match &p.plan {
            Some(plan) => {
                let mut found = None;
                *visited += run_rooted(p.rule, plan, g, |m| {
                    found = Some(m);
                    ControlFlow::Break(())
                });
                found
            }
            None => matches(p.rule, g).into_iter().next(),
        };
        if let Some(m) = found {
            return Some((i, m));
        }
    }
    None
}

fn all_matches(prepared: &[Prepared<'_>], g: &Graph) -> Vec<(usize, Morphism)> {
    let mut out = Vec::new();
    for (i, p) in prepared.iter().enumerate() {
        let ms = match &p.plan {
            Some(plan) => {
                let mut ms = Vec::new();
                run_rooted(p.rule, plan, g, |m| {
                    ms.push(m);
                    ControlFlow::Continue(())
                });
                ms.sort();
                ms
            }
            None => matches(p.rule, g),
        };
        out.extend(ms.into_iter().map(|m| (i, m)));
    }
    out
}

/// A compact record of one step: the rule index and, flattened, the images
/// of `L`'s nodes and edges followed by the ids created for `R \ K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: usize,
    data: Box<[u64]>,
}

/// A derivation from an initial graph, stored as compact steps plus
/// optional periodic snapshots.
#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: Graph,
    pub rules: Vec<Rule>,
    steps: Vec<TraceStep>,
    snapshots: Vec<(usize, Graph)>,
}

impl Trace {
    fn new(initial: Graph, rules: &[Rule]) -> Self {
        Trace { initial, rules: rules.to_vec(), steps: Vec::new(), snapshots: Vec::new() }
    }

    fn record(&mut self, rule: usize, m: &Morphism, comatch: &Morphism) {
        let r = &self.rules[rule];
        let mut data: Vec<u64> = m.node_map.values().chain(m.edge_map.values()).copied().collect();
        data.extend(r.created_nodes().map(|v| comatch.node(v)));
        data.extend(r.created_edges().map(|e| comatch.edge(e)));
        self.steps.push(TraceStep { rule, data: data.into_boxed_slice() });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    /// Names of the applied rules in order.
    pub fn rule_names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| self.rules[s.rule].name.as_str()).collect()
    }

    /// The match used at step `i`.
    pub fn matching(&self, i: usize) -> Morphism {
        let s = &self.steps[i];
        let r = &self.rules[s.rule];
        let n = r.left.node_count();
        Morphism {
            node_map: r.left.node_ids().zip(s.data[..n].iter().copied()).collect(),
            edge_map: r.left.edge_ids().zip(s.data[n..n + r.left.edge_count()].iter().copied()).collect(),
        }
    }

    /// Calls `f` with the index and graph before each step and finally with
    /// the last graph, replaying from the start.
    pub fn for_each_graph(&self, mut f: impl FnMut(usize, &Graph)) {
        let mut g = self.initial.clone();
        for i in 0..self.steps.len() {
            f(i, &g);
            let r = &self.rules[self.steps[i].rule];
            let m = self.matching(i);
            delete_phase(&mut g, r, &m);
            add_phase(&mut g, r, &m);
        }
        f(self.steps.len(), &g);
    }

    /// The graph after `i` steps, starting from the nearest snapshot.
    pub fn graph_at(&self, i: usize) -> Graph {
        let (start, mut g) = self
            .snapshots
            .iter()
            .rev()
            .find(|(k, _)| *k <= i)
            .map(|(k, g)| (*k, g.clone()))
            .unwrap_or((0, self.initial.clone()));
        for j in start..i {
            let r = &self.rules[self.steps[j].rule];
            let m = self.matching(j);
            delete_phase(&mut g, r, &m);
            add_phase(&mut g, r, &m);
        }
        g
    }

    /// Full derivation records, rebuilt by replaying every step.
    pub fn derivation_steps(&self) -> Vec<DerivationStep> {
        let mut g = self.initial.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for i in 0..self.steps.len() {
            let r = &self.rules[self.steps[i].rule];
            let step = crate::rules::apply(r, &g, &self.matching(i)).expect("recorded match");
            g = step.result.clone();
            out.push(step);
        }
        out
    }

    /// Composed track from the initial graph to the last one.
    pub fn track(&self) -> Track {
        let mut track: Track = self.initial.node_ids().map(|v| (v, v)).collect();
        for i in 0..self.steps.len() {
            let r = &self.rules[self.steps[i].rule];
            let m = self.matching(i);
            for v in r.deleted_nodes() {
                let gone = m.node(v);
                track.retain(|_, w| *w != gone);
            }
        }
        track
    }
}

/// Result of a reduction run.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub normal_form: Graph,
    pub trace: Trace,
    pub strategy: Strategy,
    /// Every rule was fast, so the complexity guarantees apply.
    pub fast: bool,
    /// Host items examined by rooted matching over the whole run.
    pub visited: u64,
}

/// Reduces `g` to a normal form. With [`Strategy::AllNormalForms`] this
/// returns the first normal form of [`reduce_all`].
pub fn reduce(rules: &[Rule], g: &Graph, cfg: &EngineConfig) -> Result<Reduction, EngineError> {
    cfg.validate()?;
    if cfg.strategy == Strategy::AllNormalForms {
        return reduce_all(rules, g, cfg).map(|mut v| v.remove(0));
    }
    let prepared = prepare(rules);
    let fast = prepared.iter().all(|p| p.plan.is_some());
    let mut work = g.clone();
    let mut trace = Trace::new(g.clone(), rules);
    let mut visited = 0;
    while let Some((i, m)) = first_match(&prepared, &work, &mut visited) {
        if cfg.max_steps.is_some_and(|max| trace.len() >= max) {
            let partial = Reduction { normal_form: work, trace, strategy: cfg.strategy, fast, visited };
            return Err(EngineError::StepBudgetExceeded { budget: cfg.max_steps.unwrap(), partial: Box::new(partial) });
        }
        let r = &rules[i];
        delete_phase(&mut work, r, &m);
        let comatch = add_phase(&mut work, r, &m);
        trace.record(i, &m, &comatch);
        if let Some(k) = cfg.snapshot_every {
            if trace.len().is_multiple_of(k) {
                trace.snapshots.push((trace.len(), work.clone()));
            }
        }
    }
    Ok(Reduction { normal_form: work, trace, strategy: cfg.strategy, fast, visited })
}

/// Explores all derivations breadth first, merging isomorphic graphs, and
/// returns one shortest trace per normal form up to isomorphism. The step
/// budget bounds the number of derivation steps explored.
pub fn reduce_all(rules: &[Rule], g: &Graph, cfg: &EngineConfig) -> Result<Vec<Reduction>, EngineError> {
    cfg.validate()?;
    let prepared = prepare(rules);
    let fast = prepared.iter().all(|p| p.plan.is_some());
    struct State {
        graph: Graph,
        parent: Option<(usize, usize, Morphism)>,
    }
    let mut states = vec![State { graph: g.clone(), parent: None }];
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    buckets.entry(signature(g, &BTreeMap::new())).or_default().push(0);
    let mut normal = Vec::new();
    let mut explored = 0usize;
    let mut next = 0;
    let build = |states: &Vec<State>, mut at: usize| {
        let mut path = Vec::new();
        while let Some((p, i, m)) = &states[at].parent {
            path.push((*i, m.clone()));
            at = *p;
        }
        path.reverse();
        let mut trace = Trace::new(g.clone(), rules);
        let mut work = g.clone();
        for (i, m) in path {
            delete_phase(&mut work, &rules[i], &m);
            let comatch = add_phase(&mut work, &rules[i], &m);
            trace.record(i, &m, &comatch);
        }
        Reduction { normal_form: work, trace, strategy: Strategy::AllNormalForms, fast, visited: 0 }
    };
    while next < states.len() {
        let current = next;
        next += 1;
        let succ = all_matches(&prepared, &states[current].graph);
        if succ.is_empty() {
            normal.push(current);
            continue;
        }
        for (i, m) in succ {
            explored += 1;
            if cfg.max_steps.is_some_and(|max| explored > max) {
                let partial = build(&states, current);
                return Err(EngineError::StepBudgetExceeded {
                    budget: cfg.max_steps.unwrap(),
                    partial: Box::new(partial),
                });
            }
            let mut h = states[current].graph.clone();
            delete_phase(&mut h, &rules[i], &m);
            add_phase(&mut h, &rules[i], &m);
            let sig = signature(&h, &BTreeMap::new());
            let bucket = buckets.entry(sig).or_default();
            if bucket.iter().any(|&s| is_isomorphic(&states[s].graph, &h).is_some()) {
                continue;
            }
            bucket.push(states.len());
            states.push(State { graph: h, parent: Some((current, i, m)) });
        }
    }
    Ok(normal.into_iter().map(|s| build(&states, s)).collect())
}

/// Outcome of a recognition run.
#[derive(Clone, Debug)]
pub struct Recognition {
    pub accepted: bool,
    pub strategy: Strategy,
    pub steps: usize,
    pub normal_form: Graph,
    pub fast: bool,
}

/// Reduces `g` and compares the normal form with `accept`. Under
/// first-match this decides membership only for systems that are confluent
/// on the input class; the report records the strategy used.
pub fn recognize_report(
    rules: &[Rule],
    g: &Graph,
    accept: &Graph,
    cfg: &EngineConfig,
) -> Result<Recognition, EngineError> {
    let runs = match cfg.strategy {
        Strategy::FirstMatch => vec![reduce(rules, g, cfg)?],
        Strategy::AllNormalForms => reduce_all(rules, g, cfg)?,
    };
    let hit = runs.iter().position(|r| is_isomorphic(&r.normal_form, accept).is_some());
    let chosen = &runs[hit.unwrap_or(0)];
    Ok(Recognition {
        accepted: hit.is_some(),
        strategy: cfg.strategy,
        steps: chosen.trace.len(),
        normal_form: chosen.normal_form.clone(),
        fast: chosen.fast,
    })
}

/// Whether `g` reduces to a graph isomorphic to `accept`.
pub fn recognize(rules: &[Rule], g: &Graph, accept: &Graph, cfg: &EngineConfig) -> Result<bool, EngineError> {
    recognize_report(rules, g, accept, cfg).map(|r| r.accepted)
}

/// Every direct derivation from `g`, using rooted matching for fast rules.
/// Same result as [`crate::rules::successors`].
pub fn fast_successors(rules: &[Rule], g: &Graph) -> Vec<DerivationStep> {
    let prepared = prepare(rules);
    all_matches(&prepared, g)
        .into_iter()
        .map(|(i, m)| crate::rules::apply(&rules[i], g, &m).expect("valid match"))
        .collect()
}

/// Checks that a match found by rooted search is also dangling-free under
/// the general definition. Used by tests.
#[doc(hidden)]
pub fn dangling_free(r: &Rule, g: &Graph, m: &Morphism) -> bool {
    dangling_ok(r, g, m).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{fixtures, linked_list, place_root, star, tree_system, RootPlacement};

    fn first() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn worked_reductions() {
        let sys = tree_system();
        let accept = sys.accept.clone().unwrap();
        let run = reduce(&sys.rules, &fixtures::tree_reduction_input(), &first()).unwrap();
        assert_eq!(run.trace.rule_names(), ["r2", "r1", "r0", "r2", "r2", "r1", "r1"]);
        assert!(is_isomorphic(&run.normal_form, &accept).is_some());
        assert!(run.fast);
        for input in [fixtures::three_cycle_input(), fixtures::forest_input()] {
            let run = reduce(&sys.rules, &input, &first()).unwrap();
            assert_eq!(run.trace.len(), 2);
            assert!(is_isomorphic(&run.normal_form, &accept).is_none());
        }
        let run = reduce(&sys.rules, &accept, &first()).unwrap();
        assert!(run.trace.is_empty());
    }

    #[test]
    fn trace_replays_to_normal_form() {
        let sys = tree_system();
        let cfg = EngineConfig { snapshot_every: Some(2), ..first() };
        let run = reduce(&sys.rules, &fixtures::tree_reduction_input(), &cfg).unwrap();
        assert_eq!(run.trace.graph_at(run.trace.len()), run.normal_form);
        assert!(is_isomorphic(&run.trace.graph_at(1), &fixtures::tree_reduction_second()).is_some());
        let steps = run.trace.derivation_steps();
        assert_eq!(steps.last().unwrap().result, run.normal_form);
        let mut last = None;
        run.trace.for_each_graph(|_, g| last = Some(g.clone()));
        assert_eq!(last.unwrap(), run.normal_form);
        assert_eq!(run.trace.track().keys().copied().collect::<Vec<_>>(), [1]);
    }

    #[test]
    fn rooted_matching_agrees_with_general_matching() {
        let sys = tree_system();
        let hosts = [
            fixtures::tree_reduction_input(),
            fixtures::tree_reduction_second(),
            fixtures::three_cycle_input(),
            fixtures::forest_input(),
            place_root(star(6).unwrap(), RootPlacement::Node(6)).unwrap(),
        ];
        for g in &hosts {
            for r in &sys.rules {
                assert_eq!(rooted_matches(r, g).unwrap(), matches(r, g), "{}", r.name);
            }
        }
    }

    #[test]
    fn visited_items_do_not_grow_with_the_host() {
        let r2 = &tree_system().rules[2];
        let counts: Vec<u64> = [10, 100, 1000]
            .iter()
            .map(|&n| {
                let g = place_root(linked_list(n).unwrap(), RootPlacement::First).unwrap();
                let (ms, visited) = rooted_matches_counted(r2, &g).unwrap();
                assert_eq!(ms.len(), 1);
                visited
            })
            .collect();
        assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
    }

    #[test]
    fn budget_and_config_errors() {
        let sys = tree_system();
        let cfg = EngineConfig { max_steps: Some(3), ..first() };
        match reduce(&sys.rules, &fixtures::tree_reduction_input(), &cfg) {
            Err(EngineError::StepBudgetExceeded { budget: 3, partial }) => assert_eq!(partial.trace.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = EngineConfig { max_steps: Some(7), ..first() };
        assert!(reduce(&sys.rules, &fixtures::tree_reduction_input(), &cfg).is_ok());
        let cfg = EngineConfig { max_steps: Some(0), ..first() };
        assert!(matches!(cfg.validate(), Err(EngineError::InvalidConfig(_))));
    }

    #[test]
    fn static_checks() {
        let sys = tree_system();
        let cfg = EngineConfig { degree_bound: Some(2), root_bound: Some(1), ..first() };
        for r in &sys.rules {
            assert!(is_fast(r));
            assert_eq!(preserves_bounds(r, &cfg), BoundsReport { degree_ok: Some(true), roots_ok: true });
        }
        let nonclosed = crate::systems::nonclosed_system();
        assert!(!is_fast(&nonclosed.rules[2]));
        assert!(matches!(rooted_matches(&nonclosed.rules[2], &Graph::new()), Err(EngineError::NotFastRule(_))));
        let looped = &nonclosed.rules[2];
        let n1 = EngineConfig { degree_bound: Some(1), ..first() };
        let n2 = EngineConfig { degree_bound: Some(3), ..first() };
        assert_eq!(preserves_bounds(looped, &n1).degree_ok, Some(false));
        assert_eq!(preserves_bounds(looped, &n2).degree_ok, Some(true));
    }

    #[test]
    fn all_normal_forms_on_forest() {
        let sys = tree_system();
        let cfg = EngineConfig { strategy: Strategy::AllNormalForms, ..first() };
        let runs = reduce_all(&sys.rules, &fixtures::tree_reduction_input(), &cfg).unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].trace.len(), 7);
        let accept = sys.accept.unwrap();
        assert!(recognize(&sys.rules, &fixtures::tree_reduction_input(), &accept, &cfg).unwrap());
        assert!(!recognize(&sys.rules, &fixtures::three_cycle_input(), &accept, &cfg).unwrap());
    }
}
