//! `mcip` — batch analysis of Markov networks: maximal-independent-set
//! enumeration, graph reconstruction, Markov-property relation listings,
//! log-linear and Gaussian conditional-independence inference, and a
//! randomized numeric oracle over factorized distributions.
//!
//! Exit codes: 0 success, 1 input error, 2 numeric/convergence failure.

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcip_core::ci::{
    local_relations, mcip_relations, pairwise_from_mcip, pairwise_relations,
};
use mcip_core::gaussian::{ci_test_gaussian, mcip_gaussian_check, DataMatrix};
use mcip_core::io::{
    graph_to_json, graph_to_text, load_contingency_csv, load_data_matrix, load_graph,
    load_vertex_sets,
};
use mcip_core::loglinear::{fit_decomposable, fit_ipf, fit_mcip, ContingencyTable, FitResult};
use mcip_core::verify::{verify_ensemble, VerifyConfig};
use mcip_core::{Error, ErrorKind, Result, UndirectedGraph, VertexSet};

#[derive(Parser)]
#[command(
    name = "mcip",
    version,
    about = "Markov-network conditional-independence toolkit",
    long_about = None,
    arg_required_else_help = true
)]
struct Cli {
    /// Emit a machine-readable JSON document instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List all maximal independent sets of a graph
    Amis {
        /// Graph file (text `vertices:`/`edge:` format or JSON)
        graph: PathBuf,
    },
    /// Rebuild the unique graph whose maximal independent sets are given
    Reconstruct {
        /// Vertex-set listing (one comma-separated set per line, or JSON)
        sets: PathBuf,
    },
    /// List conditional-independence statements implied by a graph
    Relations {
        /// Graph file
        graph: PathBuf,
        /// Which family of statements to derive
        #[arg(long, value_enum)]
        kind: RelationKind,
    },
    /// Fit a log-linear model to a contingency table and test it
    Fit(FitArgs),
    /// Test one conditional independence on numeric data (normal model)
    Citest {
        /// Data file (CSV or whitespace-separated; header optional)
        data: PathBuf,
        /// The two variables under test, comma-separated: u,v
        #[arg(long)]
        pair: String,
        /// Conditioning variables, comma-separated
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Check mutual conditional independence on numeric data
    #[command(name = "mcip-check")]
    McipCheck {
        /// Data file (CSV or whitespace-separated; header optional)
        data: PathBuf,
        /// Block variables, comma-separated (each its own block)
        #[arg(long)]
        blocks: String,
        /// Conditioning variables, comma-separated
        #[arg(long, default_value = "")]
        given: String,
        /// Significance level for the pairwise tests
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Verify symbolic independence claims against exact random distributions
    #[command(name = "oracle-verify")]
    OracleVerify {
        /// Number of random graphs to draw
        #[arg(long, default_value_t = 100)]
        graphs: usize,
        /// Largest vertex count to draw
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
        /// Root seed for the ensemble
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-cell tolerance for the numeric checks
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Test hook: append a coupled table that must be reported as failing
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationKind {
    Pairwise,
    Local,
    Mcip,
    #[value(name = "pairwise-from-mcip")]
    PairwiseFromMcip,
}

#[derive(Args)]
struct FitArgs {
    /// Contingency table in long CSV form (last column `count`)
    table: PathBuf,
    /// Fitting method
    #[arg(long, value_enum)]
    model: FitModel,
    /// Model graph (decomposable and ipf models)
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Block variables, comma-separated, each its own block (mcip model)
    #[arg(long)]
    blocks: Option<String>,
    /// Conditioning variables, comma-separated (mcip model)
    #[arg(long, default_value = "")]
    given: String,
    /// Marginal-matching tolerance (ipf model)
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Cycle budget (ipf model)
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Mcip,
    Decomposable,
    Ipf,
}

/// A command's output in both renderings.
struct Rendered {
    human: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as ClapKind;
            let code = match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    match run(cli.command) {
        Ok((rendered, code)) => {
            let text = if json {
                let mut doc = serde_json::to_string_pretty(&rendered.json)
                    .expect("documents are plain data");
                doc.push('\n');
                doc
            } else {
                rendered.human
            };
            // a reader that hangs up early (e.g. `mcip ... | head`) is not
            // an error; stop writing and keep the success exit code
            if let Err(e) = io::Write::write_all(&mut io::stdout().lock(), text.as_bytes()) {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Input => ExitCode::from(1),
                ErrorKind::Numeric => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<(Rendered, u8)> {
    match command {
        Command::Amis { graph } => cmd_amis(&resolve(&graph)?).map(ok),
        Command::Reconstruct { sets } => cmd_reconstruct(&resolve(&sets)?).map(ok),
        Command::Relations { graph, kind } => cmd_relations(&resolve(&graph)?, kind).map(ok),
        Command::Fit(args) => cmd_fit(args).map(ok),
        Command::Citest { data, pair, given } => {
            cmd_citest(&resolve(&data)?, &pair, &given).map(ok)
        }
        Command::McipCheck {
            data,
            blocks,
            given,
            alpha,
        } => cmd_mcip_check(&resolve(&data)?, &blocks, &given, alpha).map(ok),
        Command::OracleVerify {
            graphs,
            max_vertices,
            seed,
            tol,
            inject_failure,
        } => cmd_oracle_verify(VerifyConfig {
            graphs,
            max_vertices,
            seed,
            tol,
            inject_failure,
        }),
    }
}

fn ok(rendered: Rendered) -> (Rendered, u8) {
    (rendered, 0)
}

/// Input files resolve to the literal path first, then inside the directory
/// named by MCIP_FIXTURES, then inside ./fixtures.
fn resolve(path: &Path) -> Result<PathBuf> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        if let Ok(dir) = std::env::var("MCIP_FIXTURES") {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return Ok(candidate);
            }
        }
        let candidate = Path::new("fixtures").join(path);
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Err(Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
    })
}

fn parse_names(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn name_set(list: &str) -> VertexSet {
    VertexSet::from_labels(parse_names(list))
}

fn set_to_json(s: &VertexSet) -> Value {
    Value::Array(s.iter().map(|v| Value::String(v.to_string())).collect())
}

fn cmd_amis(path: &Path) -> Result<Rendered> {
    let g = load_graph(path)?;
    let sets = g.maximal_independent_sets()?;
    let mut human = String::new();
    for s in &sets {
        human.push_str(&s.to_string());
        human.push('\n');
    }
    Ok(Rendered {
        human,
        json: json!({
            "count": sets.len(),
            "sets": sets.iter().map(set_to_json).collect::<Vec<_>>(),
        }),
    })
}

fn cmd_reconstruct(path: &Path) -> Result<Rendered> {
    let sets = load_vertex_sets(path)?;
    let g = UndirectedGraph::reconstruct_from_amis(&sets)?;
    Ok(Rendered {
        human: graph_to_text(&g),
        json: graph_to_json(&g),
    })
}

fn cmd_relations(path: &Path, kind: RelationKind) -> Result<Rendered> {
    let g = load_graph(path)?;
    let (name, statements): (&str, Vec<String>) = match kind {
        RelationKind::Pairwise => (
            "pairwise",
            pairwise_relations(&g).iter().map(|s| s.to_string()).collect(),
        ),
        RelationKind::Local => (
            "local",
            local_relations(&g).iter().map(|s| s.to_string()).collect(),
        ),
        RelationKind::Mcip => (
            "mcip",
            mcip_relations(&g)?.iter().map(|s| s.to_string()).collect(),
        ),
        RelationKind::PairwiseFromMcip => (
            "pairwise-from-mcip",
            pairwise_from_mcip(&g)?.iter().map(|s| s.to_string()).collect(),
        ),
    };
    let mut human = String::new();
    for s in &statements {
        human.push_str(s);
        human.push('\n');
    }
    Ok(Rendered {
        human,
        json: json!({
            "kind": name,
            "count": statements.len(),
            "statements": statements,
        }),
    })
}

fn cmd_fit(args: FitArgs) -> Result<Rendered> {
    let table = load_contingency_csv(&resolve(&args.table)?)?;
    let needs_graph = || -> Result<UndirectedGraph> {
        let path = args.graph.as_ref().ok_or_else(|| {
            Error::InvalidArgument("this model needs --graph <file>".into())
        })?;
        load_graph(&resolve(path)?)
    };
    let (label, fit) = match args.model {
        FitModel::Decomposable => {
            if args.blocks.is_some() {
                return Err(Error::InvalidArgument(
                    "--blocks only applies to --model mcip".into(),
                ));
            }
            ("decomposable", fit_decomposable(&table, &needs_graph()?)?)
        }
        FitModel::Ipf => {
            if args.blocks.is_some() {
                return Err(Error::InvalidArgument(
                    "--blocks only applies to --model mcip".into(),
                ));
            }
            let generators = needs_graph()?.maximal_cliques()?;
            ("ipf", fit_ipf(&table, &generators, args.tol, args.max_iter)?)
        }
        FitModel::Mcip => {
            if args.graph.is_some() {
                return Err(Error::InvalidArgument(
                    "--graph only applies to --model decomposable or ipf".into(),
                ));
            }
            let names = parse_names(args.blocks.as_deref().ok_or_else(|| {
                Error::InvalidArgument("--model mcip needs --blocks <names>".into())
            })?);
            let blocks: Vec<VertexSet> = names
                .iter()
                .map(|n| VertexSet::from_labels([n.as_str()]))
                .collect();
            ("mcip", fit_mcip(&table, &blocks, &name_set(&args.given))?)
        }
    };
    Ok(render_fit(label, &table, &fit))
}

fn render_fit(model: &str, observed: &ContingencyTable, fit: &FitResult) -> Rendered {
    let mut human = String::new();
    human.push_str(&format!("model: {model}\n"));
    human.push_str(&format!("cells: {}\n", observed.cell_count()));
    human.push_str(&format!("total: {}\n", fmt(observed.total())));
    human.push_str(&format!("x2: {}\n", fmt(fit.x2)));
    human.push_str(&format!("g2: {}\n", fmt(fit.g2)));
    human.push_str(&format!("df: {}\n", fit.df));
    human.push_str(&format!("p_value_x2: {}\n", fmt(fit.p_value_x2)));
    human.push_str(&format!("p_value_g2: {}\n", fmt(fit.p_value_g2)));
    human.push_str(&format!("iterations: {}\n", fit.iterations));
    human.push_str(&format!("converged: {}\n", fit.converged));
    human.push_str("fitted:\n");
    for (i, &value) in fit.fitted.counts().iter().enumerate() {
        human.push_str(&format!("  {}: {}\n", fit.fitted.cell_label(i), fmt(value)));
    }
    let fitted: Vec<Value> = fit
        .fitted
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &value)| json!({ "cell": fit.fitted.cell_label(i), "value": value }))
        .collect();
    Rendered {
        human,
        json: json!({
            "model": model,
            "cells": observed.cell_count(),
            "total": observed.total(),
            "x2": fit.x2,
            "g2": fit.g2,
            "df": fit.df,
            "p_value_x2": fit.p_value_x2,
            "p_value_g2": fit.p_value_g2,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "fitted": fitted,
        }),
    }
}

fn load_data(path: &Path) -> Result<(DataMatrix, Vec<String>)> {
    load_data_matrix(path)
}

fn cmd_citest(path: &Path, pair: &str, given: &str) -> Result<Rendered> {
    let names = parse_names(pair);
    let [u, v] = names.as_slice() else {
        return Err(Error::InvalidArgument(format!(
            "--pair wants exactly two comma-separated names, got {pair:?}"
        )));
    };
    let (data, warnings) = load_data(path)?;
    let given = name_set(given);
    let r = ci_test_gaussian(&data, u, v, &given)?;
    let mut human = String::new();
    for w in &warnings {
        human.push_str(&format!("note: {w}\n"));
    }
    human.push_str(&format!("test: {u} _||_ {v}{}\n", given_suffix(&given)));
    human.push_str(&format!("n: {}\n", data.n()));
    human.push_str(&format!("partial_correlation: {}\n", fmt(r.partial_correlation)));
    human.push_str(&format!("statistic: {}\n", fmt(r.statistic)));
    human.push_str(&format!("df: {}\n", r.df));
    human.push_str(&format!("p_value: {}\n", fmt(r.p_value)));
    Ok(Rendered {
        human,
        json: json!({
            "u": u,
            "v": v,
            "given": set_to_json(&given),
            "n": data.n(),
            "notes": warnings,
            "partial_correlation": r.partial_correlation,
            "statistic": r.statistic,
            "df": r.df,
            "p_value": r.p_value,
        }),
    })
}

fn cmd_mcip_check(path: &Path, blocks: &str, given: &str, alpha: f64) -> Result<Rendered> {
    let names = parse_names(blocks);
    if names.len() < 2 {
        return Err(Error::InvalidArgument(
            "--blocks wants at least two comma-separated names".into(),
        ));
    }
    let block_sets: Vec<VertexSet> = names
        .iter()
        .map(|n| VertexSet::from_labels([n.as_str()]))
        .collect();
    let (data, warnings) = load_data(path)?;
    let given = name_set(given);
    let report = mcip_gaussian_check(&data, &block_sets, &given, alpha)?;
    let mut human = String::new();
    for w in &warnings {
        human.push_str(&format!("note: {w}\n"));
    }
    human.push_str(&format!(
        "mutual statement: {}{}\n",
        names.join(" _||_ "),
        given_suffix(&given)
    ));
    human.push_str(&format!("alpha: {}\n", fmt(alpha)));
    for t in &report.tests {
        human.push_str(&format!(
            "  {} _||_ {}: statistic {} df {} p_value {}\n",
            t.u,
            t.v,
            fmt(t.result.statistic),
            t.result.df,
            fmt(t.result.p_value),
        ));
    }
    human.push_str(&format!(
        "verdict: {}\n",
        if report.consistent {
            "consistent with mutual conditional independence"
        } else {
            "inconsistent with mutual conditional independence"
        }
    ));
    human.push_str(&format!("rationale: {}\n", report.rationale));
    let tests: Vec<Value> = report
        .tests
        .iter()
        .map(|t| {
            json!({
                "u": t.u,
                "v": t.v,
                "partial_correlation": t.result.partial_correlation,
                "statistic": t.result.statistic,
                "df": t.result.df,
                "p_value": t.result.p_value,
            })
        })
        .collect();
    Ok(Rendered {
        human,
        json: json!({
            "blocks": names,
            "given": set_to_json(&given),
            "alpha": report.alpha,
            "notes": warnings,
            "tests": tests,
            "consistent": report.consistent,
            "rationale": report.rationale,
        }),
    })
}

fn cmd_oracle_verify(cfg: VerifyConfig) -> Result<(Rendered, u8)> {
    let report = verify_ensemble(&cfg)?;
    let mut human = String::new();
    human.push_str(&format!("graphs: {}\n", report.graphs.len()));
    human.push_str(&format!("total_checks: {}\n", report.total_checks));
    human.push_str(&format!("seed: {}\n", cfg.seed));
    human.push_str(&format!("tol: {}\n", fmt(cfg.tol)));
    if report.failures.is_empty() {
        human.push_str("failures: none\n");
    } else {
        human.push_str(&format!("failures: {}\n", report.failures.len()));
        for f in &report.failures {
            human.push_str(&format!("  {f}\n"));
        }
    }
    human.push_str(&format!(
        "verdict: {}\n",
        if report.passed { "pass" } else { "fail" }
    ));
    let rendered = Rendered {
        human,
        json: json!({
            "graphs": report.graphs.len(),
            "total_checks": report.total_checks,
            "seed": cfg.seed,
            "tol": cfg.tol,
            "failures": report.failures,
            "passed": report.passed,
        }),
    };
    Ok((rendered, if report.passed { 0 } else { 2 }))
}

fn given_suffix(given: &VertexSet) -> String {
    if given.is_empty() {
        String::new()
    } else {
        format!(" | {given}")
    }
}

/// Stable human-readable float: shortest round-trip form, so re-running a
/// command can never change a digit.
fn fmt(x: f64) -> String {
    let mut s = format!("{x}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}
