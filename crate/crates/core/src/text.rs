//! The textual format for alphabets, graphs, rules and rule systems.
//!
//! ```text
//! alphabet { nodes: a, b; edges: x, y }
//! graph {
//!   node 1 [label=a, root=1]
//!   node 2 []
//!   edge 10: 1 -> 2 [label=x]
//! }
//! rule r { left { ... } interface { ... } right { ... } }
//! ```
//!
//! `#` starts a comment. An edge without a label takes the only edge symbol
//! of the declared alphabet, or □ when no alphabet is declared.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Edge, Graph, GraphData, LabelAlphabet, Node, Violation};
use crate::label::{Label, BOX};
use crate::rules::Rule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
}

const PUNCT: [&str; 9] = ["->", "{", "}", "[", "]", ",", ";", ":", "="];

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let mut rest = raw;
        loop {
            rest = rest.trim_start();
            if rest.is_empty() || rest.starts_with('#') {
                break;
            }
            if let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) {
                out.push(Token { tok: Tok::Punct(p), line });
                rest = &rest[p.len()..];
                continue;
            }
            if let Some(body) = rest.strip_prefix('"') {
                let Some(end) = body.find('"') else {
                    return err(line, "unterminated string");
                };
                out.push(Token { tok: Tok::Str(body[..end].to_string()), line });
                rest = &body[end + 1..];
                continue;
            }
            let end = rest
                .char_indices()
                .find(|&(i, c)| c.is_whitespace() || "{}[],;:=#\"".contains(c) || rest[i..].starts_with("->"))
                .map_or(rest.len(), |(i, _)| i);
            out.push(Token { tok: Tok::Word(rest[..end].to_string()), line });
            rest = &rest[end..];
        }
    }
    Ok(out)
}

/// A parsed file: any mix of a system name, an alphabet, graphs and rules.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub system: Option<String>,
    pub alphabet: Option<LabelAlphabet>,
    pub contract: Option<String>,
    /// `graph` blocks in order.
    pub graphs: Vec<Graph>,
    pub accept: Option<Graph>,
    pub start: Option<Graph>,
    pub rules: Vec<Rule>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.line)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Punct(q)) if q == p => Ok(()),
            Some(t) => err(line, format!("expected `{p}`, found {}", show(&t))),
            None => err(line, format!("expected `{p}`, found end of input")),
        }
    }

    fn eat(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            Some(t) => err(line, format!("expected {what}, found {}", show(&t))),
            None => err(line, format!("expected {what}, found end of input")),
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), ParseError> {
        let line = self.line();
        let w = self.word(&format!("`{k}`"))?;
        if w == k {
            Ok(())
        } else {
            err(line, format!("expected `{k}`, found `{w}`"))
        }
    }

    fn id(&mut self) -> Result<u64, ParseError> {
        let line = self.line();
        let w = self.word("an id")?;
        w.parse().or_else(|_| err(line, format!("`{w}` is not a non-negative integer id")))
    }

    fn symbol_list(&mut self) -> Result<Vec<Label>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Some(Tok::Word(_))) {
            out.push(Label::from(self.word("a symbol")?));
            while self.eat(",") {
                out.push(Label::from(self.word("a symbol")?));
            }
        }
        Ok(out)
    }

    fn alphabet(&mut self) -> Result<LabelAlphabet, ParseError> {
        self.punct("{")?;
        let mut a = LabelAlphabet::default();
        loop {
            if self.eat("}") {
                return Ok(a);
            }
            let line = self.line();
            let key = self.word("`nodes` or `edges`")?;
            self.punct(":")?;
            let syms = self.symbol_list()?;
            match key.as_str() {
                "nodes" => a.node_labels.extend(syms),
                "edges" => a.edge_labels.extend(syms),
                _ => return err(line, format!("unknown alphabet section `{key}`")),
            }
            self.eat(";");
        }
    }

    fn attrs(&mut self) -> Result<Vec<(String, String, usize)>, ParseError> {
        let mut out = Vec::new();
        if !self.eat("[") {
            return Ok(out);
        }
        if self.eat("]") {
            return Ok(out);
        }
        loop {
            let line = self.line();
            let k = self.word("an attribute name")?;
            self.punct("=")?;
            let v = self.word("an attribute value")?;
            out.push((k, v, line));
            if self.eat("]") {
                return Ok(out);
            }
            self.punct(",")?;
        }
    }

    /// Parses `{ node ... edge ... }`, returning records with their lines.
    fn graph_body(&mut self, alphabet: Option<&LabelAlphabet>) -> Result<Graph, ParseError> {
        self.punct("{")?;
        let mut data = GraphData::default();
        let mut lines = Vec::new();
        loop {
            if self.eat("}") {
                break;
            }
            let line = self.line();
            match self.word("`node`, `edge` or `}`")?.as_str() {
                "node" => {
                    let id = self.id()?;
                    let mut node = Node::blank();
                    for (k, v, l) in self.attrs()? {
                        match (k.as_str(), v.as_str()) {
                            ("label", _) => node.label = Some(Label::from(v)),
                            ("root", "1") => node.rooted = Some(true),
                            ("root", "0") => node.rooted = Some(false),
                            ("root", _) => return err(l, format!("root must be 0 or 1, found `{v}`")),
                            _ => return err(l, format!("unknown node attribute `{k}`")),
                        }
                    }
                    data.nodes.push((id, node));
                    lines.push((true, id, line));
                }
                "edge" => {
                    let id = self.id()?;
                    self.punct(":")?;
                    let src = self.id()?;
                    self.punct("->")?;
                    let tgt = self.id()?;
                    let mut label = None;
                    for (k, v, l) in self.attrs()? {
                        match k.as_str() {
                            "label" => label = Some(Label::from(v)),
                            _ => return err(l, format!("unknown edge attribute `{k}`")),
                        }
                    }
                    let label = match (label, alphabet) {
                        (Some(l), _) => l,
                        (None, None) => Label::new(BOX),
                        (None, Some(a)) if a.edge_labels.len() == 1 => a.edge_labels.iter().next().unwrap().clone(),
                        (None, Some(_)) => return err(line, format!("edge {id} needs a label")),
                    };
                    data.edges.push((id, Edge::new(src, tgt, label)));
                    lines.push((false, id, line));
                }
                other => return err(line, format!("expected `node` or `edge`, found `{other}`")),
            }
        }
        let line_of = |node: bool, id: u64| {
            lines.iter().rev().find(|(n, i, _)| *n == node && *i == id).map_or(self.line(), |(_, _, l)| *l)
        };
        let violations = match alphabet {
            Some(a) => crate::graph::validate_graph(&data, a),
            None => data.build().err().unwrap_or_default(),
        };
        if let Some(v) = violations.first() {
            let line = match v {
                Violation::DuplicateNode(id) | Violation::NodeLabel { node: id, .. } => line_of(true, *id),
                Violation::IdTooLarge(id) => line_of(true, *id).min(line_of(false, *id)),
                Violation::DuplicateEdge(id)
                | Violation::MissingSource { edge: id, .. }
                | Violation::MissingTarget { edge: id, .. }
                | Violation::EdgeLabel { edge: id, .. } => line_of(false, *id),
            };
            return err(line, v.to_string());
        }
        Ok(data.build().expect("validated"))
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        let mut doc = Document::default();
        while self.peek().is_some() {
            let line = self.line();
            match self.word("a declaration")?.as_str() {
                "system" => doc.system = Some(self.word("a system name")?),
                "contract" => match self.next() {
                    Some(Tok::Str(s)) => doc.contract = Some(s),
                    _ => return err(line, "expected a quoted contract"),
                },
                "alphabet" => doc.alphabet = Some(self.alphabet()?),
                "graph" => {
                    let g = self.graph_body(doc.alphabet.as_ref())?;
                    doc.graphs.push(g);
                }
                "accept" => doc.accept = Some(self.graph_body(doc.alphabet.as_ref())?),
                "start" => doc.start = Some(self.graph_body(doc.alphabet.as_ref())?),
                "rule" => {
                    let name = self.word("a rule name")?;
                    self.punct("{")?;
                    self.keyword("left")?;
                    let l = self.graph_body(doc.alphabet.as_ref())?;
                    self.keyword("interface")?;
                    let k = self.graph_body(doc.alphabet.as_ref())?;
                    self.keyword("right")?;
                    let r = self.graph_body(doc.alphabet.as_ref())?;
                    self.punct("}")?;
                    match Rule::new(name, l, k, r) {
                        Ok(rule) => doc.rules.push(rule),
                        Err(e) => return err(line, e.to_string()),
                    }
                }
                other => return err(line, format!("unknown declaration `{other}`")),
            }
        }
        Ok(doc)
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Punct(p) => format!("`{p}`"),
    }
}

/// Parses a whole file.
pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let toks = tokenize(src)?;
    let last_line = src.lines().count().max(1);
    Parser { toks, pos: 0, last_line }.document()
}

/// Parses a file holding exactly one `graph` block.
pub fn parse_graph(src: &str) -> Result<(Option<LabelAlphabet>, Graph), ParseError> {
    let doc = parse_document(src)?;
    match doc.graphs.len() {
        1 => Ok((doc.alphabet, doc.graphs.into_iter().next().unwrap())),
        n => err(1, format!("expected one graph block, found {n}")),
    }
}

/// Parses a file holding exactly one rule.
pub fn parse_rule(src: &str) -> Result<(Option<LabelAlphabet>, Rule), ParseError> {
    let doc = parse_document(src)?;
    match doc.rules.len() {
        1 => Ok((doc.alphabet, doc.rules.into_iter().next().unwrap())),
        n => err(1, format!("expected one rule, found {n}")),
    }
}

fn node_attrs(n: &Node) -> String {
    let mut parts = Vec::new();
    if let Some(l) = &n.label {
        parts.push(format!("label={l}"));
    }
    if let Some(r) = n.rooted {
        parts.push(format!("root={}", u8::from(r)));
    }
    format!("[{}]", parts.join(", "))
}

/// The `node`/`edge` lines of a graph, indented by `indent` spaces.
pub fn print_graph_body(g: &Graph, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let mut s = String::new();
    for (v, n) in g.nodes() {
        let _ = writeln!(s, "{pad}node {v} {}", node_attrs(n));
    }
    for (e, edge) in g.edges() {
        let _ = writeln!(s, "{pad}edge {e}: {} -> {} [label={}]", edge.src, edge.tgt, edge.label);
    }
    s
}

fn block(s: &mut String, head: &str, g: &Graph, indent: usize) {
    let pad = " ".repeat(indent);
    let _ = writeln!(s, "{pad}{head} {{");
    s.push_str(&print_graph_body(g, indent + 2));
    let _ = writeln!(s, "{pad}}}");
}

pub fn print_alphabet(a: &LabelAlphabet) -> String {
    let join =
        |set: &std::collections::BTreeSet<Label>| set.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ");
    format!("alphabet {{ nodes: {}; edges: {} }}\n", join(&a.node_labels), join(&a.edge_labels))
}

/// A complete graph file.
pub fn print_graph(a: Option<&LabelAlphabet>, g: &Graph) -> String {
    let mut s = a.map(print_alphabet).unwrap_or_default();
    block(&mut s, "graph", g, 0);
    s
}

/// A rule block.
pub fn print_rule(r: &Rule) -> String {
    let mut s = format!("rule {} {{\n", r.name);
    block(&mut s, "left", &r.left, 2);
    block(&mut s, "interface", &r.interface, 2);
    block(&mut s, "right", &r.right, 2);
    s.push_str("}\n");
    s
}

/// A complete file describing a rule system.
pub fn print_system(
    name: Option<&str>,
    a: Option<&LabelAlphabet>,
    rules: &[Rule],
    accept: Option<&Graph>,
    start: Option<&Graph>,
) -> String {
    let mut s = String::new();
    if let Some(n) = name {
        let _ = writeln!(s, "system {n}");
    }
    if let Some(a) = a {
        s.push_str(&print_alphabet(a));
    }
    for r in rules {
        s.push_str(&print_rule(r));
    }
    if let Some(g) = accept {
        block(&mut s, "accept", g, 0);
    }
    if let Some(g) = start {
        block(&mut s, "start", g, 0);
    }
    s
}
