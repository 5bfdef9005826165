//! Timing harness: reduce generated graphs of increasing size and record
//! step counts, wall time and matching work.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{reduce, EngineConfig, EngineError};
use crate::rules::Rule;
use crate::systems::{generate, Family, RootPlacement, SystemError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad size range `{0}`, expected a:b:step")]
    BadRange(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One measured size. `size` is the node count of the generated graph,
/// which for perfect trees is the largest one fitting the requested size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub family: String,
    pub size: usize,
    pub steps: usize,
    /// Median over the repeats.
    pub wall_ns: u128,
    pub visited_items: u64,
}

impl BenchRow {
    pub fn ns_per_node(&self) -> f64 {
        self.wall_ns as f64 / self.size as f64
    }
}

pub const CSV_HEADER: [&str; 5] = ["family", "size", "steps", "wall_ns", "visited_items"];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    /// Measure sizes concurrently. Timings then compete for cores.
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(family: Family, sizes: Vec<usize>) -> Self {
        BenchConfig { family, sizes, repeats: 3, seed: 0, parallel: false }
    }
}

/// Parses `a:b:step` into `a, a+step, ..` up to and including `b`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, BenchError> {
    let bad = || BenchError::BadRange(s.to_string());
    let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if a == 0 || step == 0 || b < a {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::LinkedList => "list",
        Family::BinaryTree => "binary",
        Family::PerfectBinaryTree => "tree",
        Family::Grid => "grid",
        Family::Star => "star",
        Family::Cycle => "cycle",
    }
}

fn measure(rules: &[Rule], cfg: &BenchConfig, size: usize) -> Result<BenchRow, BenchError> {
    let g = generate(cfg.family, size, cfg.seed, RootPlacement::First)?;
    let engine = EngineConfig::default();
    let mut times = Vec::with_capacity(cfg.repeats);
    let mut last = None;
    for _ in 0..cfg.repeats.max(1) {
        let start = Instant::now();
        let run = reduce(rules, &g, &engine)?;
        times.push(start.elapsed().as_nanos());
        last = Some(run);
    }
    times.sort_unstable();
    let run = last.unwrap();
    Ok(BenchRow {
        family: family_name(cfg.family).to_string(),
        size: g.node_count(),
        steps: run.trace.len(),
        wall_ns: times[times.len() / 2],
        visited_items: run.visited,
    })
}

/// Reduces one generated graph per size, rooted at its lowest node id,
/// and reports the median wall time of `repeats` runs.
pub fn run(rules: &[Rule], cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.parallel {
        cfg.sizes.par_iter().map(|&n| measure(rules, cfg, n)).collect()
    } else {
        cfg.sizes.iter().map(|&n| measure(rules, cfg, n)).collect()
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.size.to_string(),
            r.steps.to_string(),
            r.wall_ns.to_string(),
            r.visited_items.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::tree_system;

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("10:30:10").unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_sizes("5:5:1").unwrap(), vec![5]);
        for bad in ["10:5:1", "0:5:1", "1:5:0", "1:5", "a:b:c"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn list_rows_and_csv() {
        let rules = tree_system().rules;
        let rows = run(&rules, &BenchConfig::new(Family::LinkedList, vec![10, 20])).unwrap();
        assert_eq!(rows.iter().map(|r| r.steps).collect::<Vec<_>>(), vec![18, 38]);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("family,size,steps,wall_ns,visited_items"));
        assert!(lines.next().unwrap().starts_with("list,10,18,"));
    }

    #[test]
    fn perfect_tree_rows_record_node_count() {
        let rules = tree_system().rules;
        let rows = run(&rules, &BenchConfig::new(Family::PerfectBinaryTree, vec![20])).unwrap();
        assert_eq!(rows[0].size, 15);
        assert_eq!(rows[0].steps, 2 * 15 - 2);
    }
}
