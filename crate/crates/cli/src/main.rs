//! `rgt`: validate, run, analyse, encode, generate and benchmark rooted
//! graph rewriting systems.
//!
//! Exit codes: 0 success or accept, 1 reject or a non-confluence finding,
//! 2 input or runtime error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use rooted_gt::bench::{self, BenchConfig};
use rooted_gt::confluence::{analyze, Conclusion, GarbagePredicate};
use rooted_gt::encoding::Encoding;
use rooted_gt::engine::{recognize_report, reduce, reduce_all, rooted_matches, EngineConfig, EngineError, Strategy};
use rooted_gt::graph::{Graph, LabelAlphabet};
use rooted_gt::rules::{apply, matches, Rule};
use rooted_gt::systems::{builtin, generate, mutate, place_root, Family, Mutation, NamedSystem, RootPlacement};
use rooted_gt::text::{parse_document, parse_graph, parse_rule, print_graph, print_rule};

#[derive(Parser)]
#[command(name = "rgt", version, about = "Rooted double-pushout graph rewriting")]
struct Cli {
    /// Output verbosity.
    #[arg(long, value_enum, default_value_t = Format::Full, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Summary,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    First,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check a graph, rule or system file.
    Validate { file: PathBuf },
    /// List the matches of a rule's left graph in a host graph.
    Match {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Use root-anchored matching; the rule must be fast.
        #[arg(long)]
        rooted: bool,
    },
    /// Apply a rule at one match, or at every match.
    Apply {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// A match index as listed by `match`, or `all`.
        #[arg(long = "match", default_value = "0")]
        at: String,
    },
    /// Reduce a graph to normal form.
    Reduce {
        /// Built-in system name or system file.
        #[arg(long)]
        system: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::First)]
        strategy: StrategyArg,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Print the rule applied at every step.
        #[arg(long)]
        trace: bool,
    },
    /// Decide membership by reduction to the system's accepting graph.
    Recognize {
        #[arg(long)]
        system: String,
        #[arg(long)]
        graph: PathBuf,
        /// Mark a node as the root first: a node id, or `first` for the
        /// lowest id.
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Critical pair analysis.
    Pairs {
        #[arg(long)]
        system: String,
        /// Non-garbage predicate: all, forest, roots<=k, cycles-have-<label>,
        /// joined with `+`.
        #[arg(long)]
        garbage: Option<String>,
        /// Joinability search depth on each side.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Encode a graph or rule as a totally labelled unrooted one.
    #[command(group(ArgGroup::new("input").required(true).args(["graph", "rule"])))]
    Encode {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        rule: Option<PathBuf>,
    },
    /// Generate a graph of a family.
    Gen {
        /// list, binary, tree, grid, star or cycle.
        #[arg(long)]
        family: Family,
        #[arg(long)]
        size: usize,
        /// A node id, or `first` for the lowest id.
        #[arg(long)]
        root: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// parallel, reverse, cross or delete.
        #[arg(long)]
        mutate: Option<Mutation>,
    },
    /// Time reductions of generated graphs and write CSV.
    Bench {
        #[arg(long, default_value = "tree")]
        system: String,
        #[arg(long)]
        family: Family,
        /// a:b:step
        #[arg(long)]
        sizes: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Measure sizes concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> Result<(Option<LabelAlphabet>, Graph)> {
    parse_graph(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_rule(path: &Path) -> Result<Rule> {
    Ok(parse_rule(&read(path)?).with_context(|| format!("in {}", path.display()))?.1)
}

fn load_system(spec: &str) -> Result<NamedSystem> {
    let path = Path::new(spec);
    if path.is_file() {
        return NamedSystem::parse(&read(path)?).with_context(|| format!("in {spec}"));
    }
    builtin(spec)
        .map_err(|e| anyhow!("{e}; expected a file or one of {}", rooted_gt::systems::BUILTIN_NAMES.join(", ")))
}

fn root_placement(arg: &str) -> Result<RootPlacement> {
    match arg {
        "first" => Ok(RootPlacement::First),
        id => {
            id.parse().map(RootPlacement::Node).map_err(|_| anyhow!("--root expects a node id or `first`, got `{id}`"))
        }
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<u8> {
    let full = cli.format == Format::Full;
    match &cli.command {
        Command::Validate { file } => {
            let src = read(file)?;
            match parse_document(&src) {
                Ok(doc) => {
                    let n = doc.graphs.len() + usize::from(doc.accept.is_some()) + usize::from(doc.start.is_some());
                    writeln!(out, "ok graphs={} rules={}", n, doc.rules.len())?;
                    if full {
                        for r in &doc.rules {
                            writeln!(
                                out,
                                "rule {} standard={} size_reducing={} fast={}",
                                r.name,
                                r.is_standard(),
                                r.is_size_reducing(),
                                rooted_gt::engine::is_fast(r)
                            )?;
                        }
                    }
                    Ok(0)
                }
                Err(e) => {
                    writeln!(out, "{}:{e}", file.display())?;
                    Ok(1)
                }
            }
        }
        Command::Match { rule, graph, rooted } => {
            let r = load_rule(rule)?;
            let (_, g) = load_graph(graph)?;
            let ms = if *rooted { rooted_matches(&r, &g)? } else { matches(&r, &g) };
            writeln!(out, "matches={}", ms.len())?;
            if full {
                for (i, m) in ms.iter().enumerate() {
                    writeln!(out, "match {i}: {m}")?;
                }
            }
            Ok(0)
        }
        Command::Apply { rule, graph, at } => {
            let r = load_rule(rule)?;
            let (alphabet, g) = load_graph(graph)?;
            let ms = matches(&r, &g);
            let chosen: Vec<usize> = match at.as_str() {
                "all" => (0..ms.len()).collect(),
                i => {
                    let i: usize = i.parse().map_err(|_| anyhow!("--match expects an index or `all`"))?;
                    if i >= ms.len() {
                        bail!("match {i} requested but the rule has {} matches", ms.len());
                    }
                    vec![i]
                }
            };
            for i in chosen {
                let step = apply(&r, &g, &ms[i])?;
                writeln!(out, "# match {i}")?;
                write!(out, "{}", print_graph(alphabet.as_ref(), &step.result))?;
            }
            Ok(0)
        }
        Command::Reduce { system, graph, strategy, max_steps, trace } => {
            let sys = load_system(system)?;
            let (_, g) = load_graph(graph)?;
            let cfg = EngineConfig {
                max_steps: *max_steps,
                strategy: match strategy {
                    StrategyArg::First => Strategy::FirstMatch,
                    StrategyArg::All => Strategy::AllNormalForms,
                },
                ..EngineConfig::default()
            };
            let runs = match cfg.strategy {
                Strategy::FirstMatch => vec![reduce(&sys.rules, &g, &cfg)?],
                Strategy::AllNormalForms => reduce_all(&sys.rules, &g, &cfg)?,
            };
            for (k, run) in runs.iter().enumerate() {
                writeln!(out, "# normal form {k}: steps={} fast={}", run.trace.len(), run.fast)?;
                if full {
                    write!(out, "{}", print_graph(Some(&sys.alphabet), &run.normal_form))?;
                }
                if *trace {
                    for (i, name) in run.trace.rule_names().iter().enumerate() {
                        writeln!(out, "# step {} {name}: {}", i + 1, run.trace.matching(i))?;
                    }
                }
            }
            Ok(0)
        }
        Command::Recognize { system, graph, root, max_steps } => {
            let sys = load_system(system)?;
            let accept = sys.accept.as_ref().ok_or_else(|| anyhow!("system {} has no accepting graph", sys.name))?;
            let (_, mut g) = load_graph(graph)?;
            if let Some(r) = root {
                g = place_root(g, root_placement(r)?)?;
            }
            let cfg = EngineConfig { max_steps: *max_steps, ..EngineConfig::default() };
            let rep = match recognize_report(&sys.rules, &g, accept, &cfg) {
                Err(EngineError::StepBudgetExceeded { budget, .. }) => bail!("no normal form within {budget} steps"),
                other => other?,
            };
            writeln!(out, "{}", if rep.accepted { "ACCEPT" } else { "REJECT" })?;
            if full {
                writeln!(out, "steps={} fast={} strategy={}", rep.steps, rep.fast, rep.strategy)?;
            }
            Ok(if rep.accepted { 0 } else { 1 })
        }
        Command::Pairs { system, garbage, depth } => {
            let sys = load_system(system)?;
            let pred = match garbage {
                Some(s) => Some(GarbagePredicate::parse(s).ok_or_else(|| anyhow!("unknown garbage predicate `{s}`"))?),
                None => None,
            };
            let a = analyze(&sys.rules, pred.as_ref(), *depth);
            if full {
                write!(out, "{}", a.report())?;
            } else {
                writeln!(out, "{}", a.summary_line())?;
            }
            Ok(match a.conclusion {
                Conclusion::NonConfluentWitness(_) => 1,
                _ => 0,
            })
        }
        Command::Encode { graph, rule } => {
            if let Some(path) = graph {
                let (alphabet, g) = load_graph(path)?;
                let alphabet = alphabet.unwrap_or_else(|| LabelAlphabet::infer([&g]));
                let enc = Encoding::for_alphabet(&alphabet);
                write!(out, "{}", print_graph(Some(&enc.encoded_alphabet()), &enc.encode_graph(&g)?))?;
            } else if let Some(path) = rule {
                let (alphabet, r) = parse_rule(&read(path)?).with_context(|| format!("in {}", path.display()))?;
                let alphabet = alphabet.unwrap_or_else(|| LabelAlphabet::infer([&r.left, &r.interface, &r.right]));
                let enc = Encoding::for_alphabet(&alphabet);
                write!(out, "{}", rooted_gt::text::print_alphabet(&enc.encoded_alphabet()))?;
                write!(out, "{}", print_rule(&enc.encode_rule(&r)?))?;
            }
            Ok(0)
        }
        Command::Gen { family, size, root, seed, mutate: kind } => {
            let placement = root.as_deref().map(root_placement).transpose()?.unwrap_or_default();
            let mut g = generate(*family, *size, *seed, placement)?;
            if let Some(kind) = kind {
                g = mutate(&g, *kind, *seed)?;
            }
            write!(out, "{}", print_graph(None, &g))?;
            Ok(0)
        }
        Command::Bench { system, family, sizes, csv, repeats, seed, parallel } => {
            let sys = load_system(system)?;
            let cfg = BenchConfig {
                family: *family,
                sizes: bench::parse_sizes(sizes)?,
                repeats: *repeats,
                seed: *seed,
                parallel: *parallel,
            };
            let rows = bench::run(&sys.rules, &cfg)?;
            match csv {
                Some(path) => {
                    let file = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
                    bench::write_csv(&rows, file)?;
                    if full {
                        writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
                    }
                }
                None => bench::write_csv(&rows, &mut *out)?,
            }
            Ok(0)
        }
    }
}
