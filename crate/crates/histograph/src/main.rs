//! Thin command-line front end over the library; every subcommand reads the
//! documented file formats, runs one pipeline, and emits a JSON (or CSV)
//! report with the resolved configuration embedded. Exit codes: 0 success,
//! 2 validation error, 3 declared infeasibility, 4 size cap exceeded.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use histograph::bounds::{densities_size_bounds, hist_size_bounds};
use histograph::counting::{f_degree_distribution, subgraph_density};
use histograph::error::{Error, Result};
use histograph::graph::Graph;
use histograph::io;
use histograph::jacobian::EffectiveRadiusOptions;
use histograph::maxent::{solve_max_entropy, ConstraintSpec, SolverOptions};
use histograph::oracle::{
    counting_lemma_audit, enumerate_graphs, exact_densities_count, exact_hist_count,
    sandwich_check, EnumerationScope, Labeling,
};
use histograph::radii::sandwich_radii;
use histograph::szemeredi::regular_decompose;

#[derive(Parser)]
#[command(
    name = "histograph",
    version,
    about = "F-degree histograms, maximum-entropy size bounds, and exact small-n oracles"
)]
struct Cli {
    /// Cap the rayon worker count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized F-degree distribution of a graph.
    Fdeg(FdegArgs),
    /// Non-induced subgraph density t(G, H).
    Density(DensityArgs),
    /// Outer (gamma) and inner (beta) radii for a KS ball.
    Radii(RadiiArgs),
    /// Solve the constrained maximum-entropy problem.
    Maxent(MaxentArgs),
    /// Size-bound reports for histogram balls or densities sets.
    Bounds(BoundsArgs),
    /// Energy refinement to an eps-uniform partition plus type extraction.
    Szemeredi(SzemerediArgs),
    /// Exact small-n scans and audits.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Serialize)]
struct FdegArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    pattern: String,
}

#[derive(Args, Serialize)]
struct DensityArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Built-in pattern name or graph file (root ignored).
    #[arg(long)]
    subgraph: String,
}

#[derive(Args, Serialize)]
struct RadiiArgs {
    /// Distribution file, "uniform", or "point:<x>".
    #[arg(long)]
    p: String,
    #[arg(long)]
    pattern: String,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: Option<usize>,
    /// Sweep deltas "start:end:steps" and emit CSV instead of JSON.
    #[arg(long)]
    delta_grid: Option<String>,
}

#[derive(Args, Serialize)]
struct MaxentArgs {
    /// Comma-separated pattern names or graph files.
    #[arg(long)]
    family: String,
    /// Comma-separated target densities.
    #[arg(long)]
    phi: String,
    /// Comma-separated radii.
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// JSON solver config (tolerances, iteration caps, starts, seed);
    /// explicit flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    /// "hist" or "densities".
    #[arg(long)]
    target: String,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct SzemerediArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 64)]
    k_cap: usize,
    #[arg(long)]
    k_init: Option<usize>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Exact |Hist(p, F, delta, n)| by full scan.
    CountHist(CountHistArgs),
    /// Exact |B(phi, gamma)| by full scan.
    CountDensities(CountDensitiesArgs),
    /// Graph-by-graph verification of both sandwich inclusions.
    Sandwich(SandwichArgs),
    /// Block-model counting-lemma audit.
    CountingLemma(CountingLemmaArgs),
    /// Enumerate small graphs (labeled or canonical unlabeled).
    Enumerate(EnumerateArgs),
}

#[derive(Args, Serialize)]
struct CountHistArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = false)]
    unlabeled: bool,
}

#[derive(Args, Serialize)]
struct CountDensitiesArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    phi: String,
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = false)]
    unlabeled: bool,
}

#[derive(Args, Serialize)]
struct SandwichArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Override the finite-n slack added to the outer radii (default 10/n).
    #[arg(long)]
    gamma_slack: Option<f64>,
}

#[derive(Args, Serialize)]
struct CountingLemmaArgs {
    /// Type file {"k":..,"eps":..,"S":[[..]]}.
    #[arg(long)]
    stype: PathBuf,
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    g: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = false)]
    unlabeled: bool,
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{t}'")))
        })
        .collect()
}

fn parse_family(s: &str) -> Result<Vec<Graph>> {
    s.split(',')
        .map(|t| io::resolve_pattern(t.trim()).map(|p| p.graph))
        .collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn scope_for(n: usize, unlabeled: bool) -> EnumerationScope {
    EnumerationScope {
        n,
        labeling: if unlabeled {
            Labeling::Unlabeled
        } else {
            Labeling::Labeled
        },
        shard: None,
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    let started = std::time::Instant::now();
    let report = match cli.command {
        Command::Fdeg(a) => {
            let g = io::read_graph(&a.graph)?;
            let f = io::resolve_pattern(&a.pattern)?;
            let dist = f_degree_distribution(&g, &f)?;
            json!({
                "command": "fdeg",
                "config": a,
                "n": g.n(),
                "distribution": dist,
            })
            .to_string()
        }
        Command::Density(a) => {
            let g = io::read_graph(&a.graph)?;
            let h = io::resolve_pattern(&a.subgraph)?.graph;
            let t = subgraph_density(&g, &h)?;
            json!({
                "command": "density",
                "config": a,
                "density": t,
            })
            .to_string()
        }
        Command::Radii(a) => {
            let p = io::resolve_distribution(&a.p)?;
            let f = io::resolve_pattern(&a.pattern)?;
            if let Some(grid) = &a.delta_grid {
                let parts: Vec<&str> = grid.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::Parse("delta grid must be start:end:steps".into()));
                }
                let start: f64 = parts[0]
                    .parse()
                    .map_err(|_| Error::Parse("bad grid".into()))?;
                let end: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Parse("bad grid".into()))?;
                let steps: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::Parse("bad grid".into()))?;
                let mut csv = String::from("delta,m,gamma,beta,beta_feasible,t_star\n");
                for i in 0..=steps {
                    let delta = start + (end - start) * i as f64 / steps.max(1) as f64;
                    let r = sandwich_radii(&p, &f, a.d, delta, a.n)?;
                    for m in 1..=a.d {
                        csv.push_str(&format!(
                            "{delta},{m},{},{},{},{}\n",
                            r.gamma.gamma[m - 1],
                            r.beta.beta[m - 1],
                            r.beta.feasible,
                            r.beta.t_star
                        ));
                    }
                }
                emit(&cli.out, csv.trim_end())?;
                eprintln!("elapsed: {:?}", started.elapsed());
                return Ok(());
            }
            let r = sandwich_radii(&p, &f, a.d, a.delta, a.n)?;
            json!({
                "command": "radii",
                "config": a,
                "radii": r,
            })
            .to_string()
        }
        Command::Maxent(a) => {
            let family = parse_family(&a.family)?;
            let phi = parse_f64_list(&a.phi)?;
            let gamma = parse_f64_list(&a.gamma)?;
            let spec = ConstraintSpec::new(family, phi, gamma, a.k, a.eps)?;
            let mut opts = match &a.config {
                Some(path) => SolverOptions::from_config_file(path)?,
                None => SolverOptions::default(),
            };
            if let Some(seed) = a.seed {
                opts.seed = seed;
            }
            if let Some(starts) = a.starts {
                opts.n_starts = starts;
            }
            let sol = solve_max_entropy(&spec, &opts)?;
            json!({
                "command": "maxent",
                "config": a,
                "solution": sol,
            })
            .to_string()
        }
        Command::Bounds(a) => {
            let solver = SolverOptions {
                seed: a.seed,
                ..Default::default()
            };
            let ropts = EffectiveRadiusOptions {
                seed: a.seed,
                ..Default::default()
            };
            let report = match a.target.as_str() {
                "hist" => {
                    let p = io::resolve_distribution(
                        a.p.as_deref()
                            .ok_or_else(|| Error::validation("--p required"))?,
                    )?;
                    let f = io::resolve_pattern(
                        a.pattern
                            .as_deref()
                            .ok_or_else(|| Error::validation("--pattern required"))?,
                    )?;
                    let delta = a
                        .delta
                        .ok_or_else(|| Error::validation("--delta required"))?;
                    let d = a.d.ok_or_else(|| Error::validation("--d required"))?;
                    hist_size_bounds(&p, &f, delta, d, a.k, a.eps, a.n, &solver, &ropts)?
                }
                "densities" => {
                    let family = parse_family(
                        a.family
                            .as_deref()
                            .ok_or_else(|| Error::validation("--family required"))?,
                    )?;
                    let phi = parse_f64_list(
                        a.phi
                            .as_deref()
                            .ok_or_else(|| Error::validation("--phi required"))?,
                    )?;
                    let gamma = parse_f64_list(
                        a.gamma
                            .as_deref()
                            .ok_or_else(|| Error::validation("--gamma required"))?,
                    )?;
                    let spec = ConstraintSpec::new(family, phi, gamma, a.k, a.eps)?;
                    densities_size_bounds(&spec, a.n, &solver, &ropts)?
                }
                other => {
                    return Err(Error::validation(format!(
                        "unknown bounds target '{other}' (hist | densities)"
                    )))
                }
            };
            json!({
                "command": "bounds",
                "config": a,
                "report": report,
            })
            .to_string()
        }
        Command::Szemeredi(a) => {
            let g = io::read_graph(&a.graph)?;
            let k_init = a
                .k_init
                .unwrap_or_else(|| (1.0 / a.eps).ceil().max(1.0) as usize);
            let dec = regular_decompose(&g, a.eps, a.k_cap, k_init)?;
            json!({
                "command": "szemeredi",
                "config": a,
                "k_init": k_init,
                "decomposition": dec,
            })
            .to_string()
        }
        Command::Oracle(cmd) => match cmd {
            OracleCommand::CountHist(a) => {
                let p = io::resolve_distribution(&a.p)?;
                let f = io::resolve_pattern(&a.pattern)?;
                let scope = scope_for(a.n, a.unlabeled);
                let count = exact_hist_count(&p, &f, a.delta, &scope)?;
                json!({
                    "command": "oracle count-hist",
                    "config": a,
                    "scope": scope,
                    "count": count,
                    "labeling_discrepancy_per_edge": scope.labeling_discrepancy_per_edge(),
                })
                .to_string()
            }
            OracleCommand::CountDensities(a) => {
                let family = parse_family(&a.family)?;
                let phi = parse_f64_list(&a.phi)?;
                let gamma = parse_f64_list(&a.gamma)?;
                let scope = scope_for(a.n, a.unlabeled);
                let count = exact_densities_count(&phi, &gamma, &family, &scope)?;
                json!({
                    "command": "oracle count-densities",
                    "config": a,
                    "scope": scope,
                    "count": count,
                    "labeling_discrepancy_per_edge": scope.labeling_discrepancy_per_edge(),
                })
                .to_string()
            }
            OracleCommand::Sandwich(a) => {
                let p = io::resolve_distribution(&a.p)?;
                let f = io::resolve_pattern(&a.pattern)?;
                let scope = EnumerationScope::labeled(a.n);
                let rep = sandwich_check(&p, &f, a.delta, a.d, &scope, a.gamma_slack)?;
                let verdict = if rep.outer_violations == 0 && rep.inner_violations == 0 {
                    "holds"
                } else {
                    "violated"
                };
                json!({
                    "command": "oracle sandwich",
                    "config": a,
                    "verdict": verdict,
                    "report": rep,
                })
                .to_string()
            }
            OracleCommand::CountingLemma(a) => {
                let stype = io::read_type(&a.stype)?;
                let f = io::resolve_pattern(&a.pattern)?.graph;
                let eps = a.eps.unwrap_or(stype.eps);
                let rep = counting_lemma_audit(&stype, &f, a.g, a.trials, eps, a.seed)?;
                let within = rep.max_abs_deviation <= rep.bound;
                json!({
                    "command": "oracle counting-lemma",
                    "config": a,
                    "within_bound": within,
                    "report": rep,
                })
                .to_string()
            }
            OracleCommand::Enumerate(a) => {
                let scope = scope_for(a.n, a.unlabeled);
                let graphs = enumerate_graphs(&scope)?;
                json!({
                    "command": "oracle enumerate",
                    "config": a,
                    "scope": scope,
                    "count": graphs.len(),
                    "edge_masks": graphs.iter().map(|g| g.edge_mask()).collect::<Vec<_>>(),
                })
                .to_string()
            }
        },
    };
    emit(&cli.out, &report)?;
    eprintln!("elapsed: {:?}", started.elapsed());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let code = e.exit_code();
        let diag = json!({ "error": e.to_string(), "exit_code": code });
        eprintln!("{diag}");
        std::process::exit(code);
    }
}
