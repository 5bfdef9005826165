//! Rooted double-pushout graph rewriting with relabelling.
//!
//! Graphs carry partial node labels, total edge labels and partial
//! rootedness. Rules `L ← K → R` are applied by deleting the matched
//! `L \ K`, un-defining what the interface leaves open, and gluing in
//! `R \ K`. On top of that the crate provides root-anchored matching for
//! fast rules, recognition by reduction, critical pair analysis up to
//! garbage, and the encoding of rooted graphs as totally labelled ones.

pub mod bench;
pub mod confluence;
pub mod encoding;
pub mod engine;
pub mod graph;
pub mod label;
pub mod morphism;
pub mod rules;
pub mod systems;
pub mod text;

pub use confluence::{
    analyze, enumerate_critical_pairs, Analysis, Conclusion, CriticalPair, GarbagePredicate, Verdict,
};
pub use engine::{recognize, reduce, EngineConfig, Reduction, Strategy, Trace};
pub use graph::{
    degree_stats, validate_graph, DegreeStats, Edge, EdgeId, Graph, GraphData, LabelAlphabet, Node, NodeId,
};
pub use label::Label;
pub use morphism::{find_morphisms, is_isomorphic, Morphism};
pub use rules::{apply, check_dangling, invert, normalize, rule_isomorphic, successors, DerivationStep, Rule};

/// The chapters of the guide in `book/`, compiled as doctests.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    pub mod graphs {}
    #[doc = include_str!("../../../book/src/rules.md")]
    pub mod rules {}
    #[doc = include_str!("../../../book/src/engine.md")]
    pub mod engine {}
    #[doc = include_str!("../../../book/src/confluence.md")]
    pub mod confluence {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    pub mod encoding {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/bench.md")]
    pub mod bench {}
}
