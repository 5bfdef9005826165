mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use common::*;
use rooted_gt::confluence::{enumerate_critical_pairs, parallelly_independent, sequentially_independent};
use rooted_gt::encoding::Encoding;
use rooted_gt::engine::{fast_successors, is_fast, rooted_matches};
use rooted_gt::graph::rename_nodes;
use rooted_gt::morphism::isomorphism_with;
use rooted_gt::rules::{compose_tracks, matches, Track};
use rooted_gt::systems::{generate, oracle_is_tree, strip, tree_system, Family, RootPlacement};
use rooted_gt::{
    apply, find_morphisms, invert, is_isomorphic, normalize, reduce, successors, Edge, EngineConfig, Graph,
    LabelAlphabet, Morphism, Node, NodeId,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// A □-labelled graph with up to five nodes and one root.
fn box_graph(seed: u64) -> Graph {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=5);
    let mut g = Graph::new();
    for v in 1..=n {
        g.add_node(v, Node::total("□", false)).unwrap();
    }
    for e in 1..=rng.gen_range(0..=5) {
        g.add_edge(e, Edge::new(rng.gen_range(1..=n), rng.gen_range(1..=n), "□")).unwrap();
    }
    g.set_rooted(rng.gen_range(1..=n), Some(true)).unwrap();
    g
}

fn fast_rule(rng: &mut rand_chacha::ChaCha8Rng) -> rooted_gt::Rule {
    loop {
        let r = random_rule(rng);
        if is_fast(&r) {
            return r;
        }
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn morphism_counts_match_brute_force(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = small_partial_graph(&mut rng);
        let h = small_partial_graph(&mut rng);
        let all = find_morphisms(&g, &h, false);
        let inj = find_morphisms(&g, &h, true);
        let oracle = brute_force_counts(&g, &h);
        prop_assert_eq!(all.len(), oracle.total);
        prop_assert_eq!(inj.len(), oracle.injective);
        prop_assert_eq!(all.iter().filter(|m| m.is_surjective(&h)).count(), oracle.surjective);
        prop_assert!(all.iter().all(|m| m.is_morphism(&g, &h)));
        prop_assert!(inj.iter().all(|m| m.is_injective()));
    }

    #[test]
    fn isomorphism_agrees_with_bijection_count(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = small_total_graph(&mut rng);
        let h = if rng.gen_bool(0.5) {
            let n = g.node_count() as NodeId;
            rename_nodes(&g, |v| n + 1 - v)
        } else {
            small_total_graph(&mut rng)
        };
        let found = is_isomorphic(&g, &h);
        prop_assert_eq!(found.is_some(), brute_force_counts(&g, &h).bijective > 0);
        if let Some(f) = found {
            prop_assert!(f.is_isomorphism(&g, &h));
            prop_assert!(f.inverse().is_isomorphism(&h, &g));
        }
    }

    #[test]
    fn rooted_matching_equals_general_matching(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let r = fast_rule(&mut rng);
        let n = rng.gen_range(1..=6);
        let e = rng.gen_range(0..=8);
        let host = total_graph(&mut rng, n, e);
        prop_assert_eq!(rooted_matches(&r, &host).unwrap(), matches(&r, &host));
        let rules = [r];
        let fast: Vec<Graph> = fast_successors(&rules, &host).into_iter().map(|s| s.result).collect();
        let slow: Vec<Graph> = successors(&rules, &host).into_iter().map(|s| s.result).collect();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn steps_invert(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (r, host, m) = random_triple(&mut rng);
        let step = apply(&r, &host, &m).unwrap();
        prop_assert!(step.comatch.is_morphism(&r.right, &step.result));
        prop_assert!(step.comatch.is_injective());
        let back = apply(&invert(&r), &step.result, &step.comatch).unwrap();
        prop_assert!(is_isomorphic(&back.result, &host).is_some());
    }

    #[test]
    fn normalized_rules_derive_isomorphic_results(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (r, host, m) = random_triple(&mut rng);
        let a = apply(&r, &host, &m).unwrap();
        let b = apply(&normalize(&r), &host, &m).unwrap();
        let pins: BTreeMap<NodeId, NodeId> = a.result.node_ids().filter(|v| host.contains_node(*v)).map(|v| (v, v)).collect();
        prop_assert!(isomorphism_with(&a.result, &b.result, &pins).is_some());
        prop_assert_eq!(matches(&r, &host), matches(&normalize(&r), &host));
    }

    #[test]
    fn independence_duality(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (r1, host, m1) = random_triple(&mut rng);
        let r2 = random_rule(&mut rng);
        let Some(m2) = matches(&r2, &host).into_iter().next() else { return Ok(()) };
        let s1 = apply(&r1, &host, &m1).unwrap();
        let s2 = apply(&r2, &host, &m2).unwrap();
        let back = apply(&invert(&r1), &s1.result, &s1.comatch).unwrap();
        // Move the second match onto the rebuilt host: kept items stay put,
        // deleted ones go to where the inverse step recreated them.
        let mut f = Morphism::identity(&s1.intermediate);
        for v in r1.deleted_nodes() {
            f.node_map.insert(m1.node(v), back.comatch.node(v));
        }
        for e in r1.deleted_edges() {
            f.edge_map.insert(m1.edge(e), back.comatch.edge(e));
        }
        prop_assert!(f.is_isomorphism(&host, &back.result));
        let s2_moved = apply(&r2, &back.result, &m2.then(&f)).unwrap();
        prop_assert_eq!(
            parallelly_independent(&s1, &s2).unwrap(),
            sequentially_independent(&back, &s2_moved).unwrap()
        );
    }

    #[test]
    fn encoding_is_a_faithful_functor(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = small_partial_graph(&mut rng);
        let h = small_partial_graph(&mut rng);
        let k = small_partial_graph(&mut rng);
        let enc = Encoding::for_alphabet(&LabelAlphabet::infer([&g, &h, &k]));
        let (eg, eh, ek) = (enc.encode_graph(&g).unwrap(), enc.encode_graph(&h).unwrap(), enc.encode_graph(&k).unwrap());
        prop_assert_eq!(enc.encode_morphism(&Morphism::identity(&g), &g), Morphism::identity(&eg));
        let gh = find_morphisms(&g, &h, false);
        prop_assert_eq!(gh.len(), find_morphisms(&eg, &eh, false).len());
        for m in &gh {
            prop_assert!(enc.encode_morphism(m, &g).is_morphism(&eg, &eh));
            for n in find_morphisms(&h, &k, false).iter().take(4) {
                prop_assert_eq!(enc.encode_morphism(&m.then(n), &g), enc.encode_morphism(m, &g).then(&enc.encode_morphism(n, &h)));
            }
        }
        let back = enc.decode_graph(&eg).unwrap();
        prop_assert!(is_isomorphic(&back, &g).is_some());
        prop_assert!(ek.is_total());
    }

    #[test]
    fn encoded_rules_are_compatible(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (r, host, _) = random_triple(&mut rng);
        let enc = Encoding::for_alphabet(&LabelAlphabet::infer([&r.left, &r.interface, &r.right, &host]));
        prop_assert!(enc.verify_compatibility(&r, &host).unwrap());
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn trace_tracks_compose(seed in any::<u64>(), size in 1usize..60) {
        let g = generate(Family::BinaryTree, size, seed, RootPlacement::First).unwrap();
        let red = reduce(&tree_system().rules, &g, &EngineConfig::default()).unwrap();
        let composed = red
            .trace
            .derivation_steps()
            .iter()
            .fold(g.node_ids().map(|v| (v, v)).collect::<Track>(), |t, s| compose_tracks(&t, &s.track));
        prop_assert_eq!(composed, red.trace.track());
    }

    #[test]
    fn tree_reductions_stay_trees(seed in any::<u64>(), size in 1usize..80) {
        let g = generate(Family::BinaryTree, size, seed, RootPlacement::First).unwrap();
        let red = reduce(&tree_system().rules, &g, &EngineConfig::default()).unwrap();
        prop_assert!(red.trace.len() <= 2 * g.node_count());
        let mut ok = true;
        red.trace.for_each_graph(|_, h| ok &= h.root_count() == 1 && oracle_is_tree(&strip(h)));
        prop_assert!(ok);
    }
}

#[test]
fn compose_tracks_is_associative() {
    let mut rng = rng(7);
    for _ in 0..200 {
        let mut t = || -> Track {
            let mut out = Track::new();
            for k in 0..6 {
                if rng.gen_bool(0.7) {
                    out.insert(k, rng.gen_range(0..6));
                }
            }
            out
        };
        let (a, b, c) = (t(), t(), t());
        assert_eq!(compose_tracks(&compose_tracks(&a, &b), &c), compose_tracks(&a, &compose_tracks(&b, &c)));
    }
}

#[test]
fn conflicts_embed_a_critical_pair() {
    let rules = tree_system().rules;
    let pairs = enumerate_critical_pairs(&rules);
    let mut conflicts = 0;
    for seed in 0..400 {
        let host = box_graph(seed);
        let steps: Vec<(usize, Morphism)> =
            rules.iter().enumerate().flat_map(|(i, r)| matches(r, &host).into_iter().map(move |m| (i, m))).collect();
        for (a, (i, m1)) in steps.iter().enumerate() {
            for (j, m2) in &steps[a + 1..] {
                let s1 = apply(&rules[*i], &host, m1).unwrap();
                let s2 = apply(&rules[*j], &host, m2).unwrap();
                if parallelly_independent(&s1, &s2).unwrap() {
                    continue;
                }
                conflicts += 1;
                let embeds = |x: usize, mx: &Morphism, y: usize, my: &Morphism| {
                    pairs.iter().filter(|p| p.rules == (x, y)).any(|p| {
                        find_morphisms(&p.overlap, &host, true)
                            .iter()
                            .any(|k| p.left_step.matching.then(k) == *mx && p.right_step.matching.then(k) == *my)
                    })
                };
                assert!(embeds(*i, m1, *j, m2) || embeds(*j, m2, *i, m1), "rules {i} {j} on {host:?}");
            }
        }
    }
    assert!(conflicts > 50, "only {conflicts} conflicts sampled");
}
