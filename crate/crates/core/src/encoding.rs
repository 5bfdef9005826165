//! Encoding of partially labelled rooted graphs as totally labelled ones.
//!
//! Every node becomes an unrooted □ node. A defined node label becomes a
//! loop carrying that label and a defined rootedness becomes a loop labelled
//! `0` or `1`. Edge ids are spaced so decoding is positional: edge `e` maps
//! to `3e`, the label loop of node `v` to `3v + 1` and its root loop to
//! `3v + 2`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, LabelAlphabet, Node, NodeId};
use crate::label::{Label, BOX};
use crate::morphism::{is_isomorphic, Morphism};
use crate::rules::{successors, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("alphabet clash: {0}")]
    AlphabetClash(String),
    #[error("label `{0}` is not in the alphabet")]
    UnknownLabel(Label),
    #[error("node {node} is not in the image of the encoding: {reason}")]
    NotInImage { node: NodeId, reason: String },
    #[error("edge {edge} is not in the image of the encoding: {reason}")]
    EdgeNotInImage { edge: EdgeId, reason: String },
}

pub const ZERO: &str = "0";
pub const ONE: &str = "1";

/// Edge id of original edge `e`.
pub fn edge_slot(e: EdgeId) -> EdgeId {
    3 * e
}

/// Edge id of the label loop of node `v`.
pub fn label_slot(v: NodeId) -> EdgeId {
    3 * v + 1
}

/// Edge id of the rootedness loop of node `v`.
pub fn root_slot(v: NodeId) -> EdgeId {
    3 * v + 2
}

/// An encoding for one alphabet, optionally renaming labels so that node
/// and edge symbols stay apart from each other and from □, 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoding {
    alphabet: LabelAlphabet,
    node_names: BTreeMap<Label, Label>,
    edge_names: BTreeMap<Label, Label>,
}

impl Encoding {
    /// Labels are kept as they are; the alphabet must already satisfy the
    /// separation requirements.
    pub fn new(alphabet: &LabelAlphabet) -> Result<Encoding, EncodingError> {
        let reserved = [BOX, ZERO, ONE];
        if let Some(l) = alphabet.node_labels.intersection(&alphabet.edge_labels).next() {
            return Err(EncodingError::AlphabetClash(format!("`{l}` is both a node and an edge label")));
        }
        if let Some(l) =
            alphabet.node_labels.iter().chain(&alphabet.edge_labels).find(|l| reserved.contains(&l.as_str()))
        {
            return Err(EncodingError::AlphabetClash(format!("`{l}` is reserved for encoded graphs")));
        }
        let id = |s: &std::collections::BTreeSet<Label>| s.iter().map(|l| (l.clone(), l.clone())).collect();
        Ok(Encoding {
            alphabet: alphabet.clone(),
            node_names: id(&alphabet.node_labels),
            edge_names: id(&alphabet.edge_labels),
        })
    }

    /// Renames node label `x` to `n_x` and edge label `y` to `e_y`, which
    /// always separates them.
    pub fn disambiguated(alphabet: &LabelAlphabet) -> Encoding {
        let rename = |s: &std::collections::BTreeSet<Label>, prefix: &str| {
            s.iter().map(|l| (l.clone(), Label::from(format!("{prefix}{l}")))).collect()
        };
        Encoding {
            alphabet: alphabet.clone(),
            node_names: rename(&alphabet.node_labels, "n_"),
            edge_names: rename(&alphabet.edge_labels, "e_"),
        }
    }

    /// [`Encoding::new`] when possible, otherwise [`Encoding::disambiguated`].
    pub fn for_alphabet(alphabet: &LabelAlphabet) -> Encoding {
        Encoding::new(alphabet).unwrap_or_else(|_| Encoding::disambiguated(alphabet))
    }

    pub fn alphabet(&self) -> &LabelAlphabet {
        &self.alphabet
    }

    /// `({□}, edge labels ∪ node labels ∪ {0, 1})` after renaming.
    pub fn encoded_alphabet(&self) -> LabelAlphabet {
        let edges = self
            .edge_names
            .values()
            .chain(self.node_names.values())
            .cloned()
            .chain([Label::from(ZERO), Label::from(ONE)]);
        LabelAlphabet::new([Label::from(BOX)], edges)
    }

    fn node_name(&self, l: &Label) -> Result<Label, EncodingError> {
        self.node_names.get(l).cloned().ok_or_else(|| EncodingError::UnknownLabel(l.clone()))
    }

    fn edge_name(&self, l: &Label) -> Result<Label, EncodingError> {
        self.edge_names.get(l).cloned().ok_or_else(|| EncodingError::UnknownLabel(l.clone()))
    }

    pub fn encode_graph(&self, g: &Graph) -> Result<Graph, EncodingError> {
        let mut out = Graph::new();
        for v in g.node_ids() {
            out.add_node(v, Node::total(BOX, false)).map_err(id_error)?;
        }
        for (e, edge) in g.edges() {
            let label = self.edge_name(&edge.label)?;
            out.add_edge(edge_slot(e), Edge::new(edge.src, edge.tgt, label)).map_err(id_error)?;
        }
        for (v, n) in g.nodes() {
            if let Some(l) = &n.label {
                out.add_edge(label_slot(v), Edge::new(v, v, self.node_name(l)?)).map_err(id_error)?;
            }
            if let Some(r) = n.rooted {
                let l = if r { ONE } else { ZERO };
                out.add_edge(root_slot(v), Edge::new(v, v, l)).map_err(id_error)?;
            }
        }
        Ok(out)
    }

    /// Encodes `m: src → tgt`; loops move with their nodes.
    pub fn encode_morphism(&self, m: &Morphism, src: &Graph) -> Morphism {
        let mut out = Morphism { node_map: m.node_map.clone(), edge_map: BTreeMap::new() };
        for (&e, &f) in &m.edge_map {
            out.edge_map.insert(edge_slot(e), edge_slot(f));
        }
        for (v, n) in src.nodes() {
            let w = m.node(v);
            if n.label.is_some() {
                out.edge_map.insert(label_slot(v), label_slot(w));
            }
            if n.rooted.is_some() {
                out.edge_map.insert(root_slot(v), root_slot(w));
            }
        }
        out
    }

    /// Encodes `L`, `K` and `R` separately. Shared ids keep the inclusions.
    pub fn encode_rule(&self, r: &Rule) -> Result<Rule, EncodingError> {
        let l = self.encode_graph(&r.left)?;
        let k = self.encode_graph(&r.interface)?;
        let rr = self.encode_graph(&r.right)?;
        Ok(Rule::new(r.name.clone(), l, k, rr).expect("encoding keeps inclusions"))
    }

    pub fn decode_graph(&self, g: &Graph) -> Result<Graph, EncodingError> {
        self.decode_graph_with_map(g).map(|(d, _)| d)
    }

    /// Decodes a graph in the image of the encoding, also returning where
    /// each non-loop edge went. Edges at positions `3e` keep id `e`; other
    /// edges get fresh ids above those.
    pub fn decode_graph_with_map(&self, g: &Graph) -> Result<(Graph, BTreeMap<EdgeId, EdgeId>), EncodingError> {
        let node_back: BTreeMap<&Label, &Label> = self.node_names.iter().map(|(k, v)| (v, k)).collect();
        let edge_back: BTreeMap<&Label, &Label> = self.edge_names.iter().map(|(k, v)| (v, k)).collect();
        let mut nodes: BTreeMap<NodeId, Node> = BTreeMap::new();
        for (v, n) in g.nodes() {
            if n.label.as_ref().map(Label::as_str) != Some(BOX) {
                return Err(EncodingError::NotInImage { node: v, reason: "node label is not □".into() });
            }
            nodes.insert(v, Node::blank());
        }
        let mut plain = Vec::new();
        for (e, edge) in g.edges() {
            if let Some(orig) = edge_back.get(&edge.label) {
                plain.push((e, edge.src, edge.tgt, (*orig).clone()));
                continue;
            }
            let root = match edge.label.as_str() {
                ZERO => Some(false),
                ONE => Some(true),
                _ => None,
            };
            let node_label = node_back.get(&edge.label);
            if root.is_none() && node_label.is_none() {
                return Err(EncodingError::EdgeNotInImage {
                    edge: e,
                    reason: format!("unknown label `{}`", edge.label),
                });
            }
            if !edge.is_loop() {
                return Err(EncodingError::NotInImage {
                    node: edge.src,
                    reason: format!("edge {e} labelled `{}` is not a loop", edge.label),
                });
            }
            let n = nodes.get_mut(&edge.src).unwrap();
            if let Some(r) = root {
                if n.rooted.is_some() {
                    return Err(EncodingError::NotInImage { node: edge.src, reason: "two rootedness loops".into() });
                }
                n.rooted = Some(r);
            } else {
                if n.label.is_some() {
                    return Err(EncodingError::NotInImage { node: edge.src, reason: "two label loops".into() });
                }
                n.label = Some((*node_label.unwrap()).clone());
            }
        }
        let mut out = Graph::new();
        for (v, n) in nodes {
            out.add_node(v, n).map_err(id_error)?;
        }
        let mut next = plain.iter().filter(|p| p.0 % 3 == 0).map(|p| p.0 / 3 + 1).max().unwrap_or(0);
        let mut map = BTreeMap::new();
        for (e, src, tgt, label) in plain {
            let id = if e % 3 == 0 {
                e / 3
            } else {
                next += 1;
                next - 1
            };
            out.add_edge(id, Edge::new(src, tgt, label)).map_err(id_error)?;
            map.insert(e, id);
        }
        Ok((out, map))
    }

    /// Decodes `m: e(src) → tgt` where `tgt` decodes with `tgt_edges`.
    pub fn decode_morphism(&self, m: &Morphism, src: &Graph, tgt_edges: &BTreeMap<EdgeId, EdgeId>) -> Morphism {
        Morphism {
            node_map: m.node_map.clone(),
            edge_map: src.edge_ids().map(|e| (e, tgt_edges[&m.edge(edge_slot(e))])).collect(),
        }
    }

    /// Whether the successors of `g` under `r` correspond one to one, up to
    /// isomorphism after encoding, with the successors of `e(g)` under
    /// `e(r)`.
    pub fn verify_compatibility(&self, r: &Rule, g: &Graph) -> Result<bool, EncodingError> {
        let er = self.encode_rule(r)?;
        let eg = self.encode_graph(g)?;
        let mut originals = Vec::new();
        for s in successors(std::slice::from_ref(r), g) {
            originals.push(self.encode_graph(&s.result)?);
        }
        let mut encoded: Vec<Option<Graph>> =
            successors(std::slice::from_ref(&er), &eg).into_iter().map(|s| Some(s.result)).collect();
        if originals.len() != encoded.len() {
            return Ok(false);
        }
        for h in &originals {
            let Some(slot) = encoded.iter_mut().find(|s| s.as_ref().is_some_and(|x| is_isomorphic(h, x).is_some()))
            else {
                return Ok(false);
            };
            *slot = None;
        }
        Ok(true)
    }
}

fn id_error(e: crate::graph::GraphError) -> EncodingError {
    EncodingError::AlphabetClash(format!("ids out of range for encoding: {e}"))
}
