use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use signed_curriculum::census::{census, difficulty_scores, scores_csv};
use signed_curriculum::curriculum::PacingKind;
use signed_curriculum::eval::experiment::parse_metrics_jsonl;
use signed_curriculum::eval::{run_experiment, synth_benchmark, ExperimentConfig, Summary, SynthParams};
use signed_curriculum::graph::ingest_file;
use signed_curriculum::wl::{verify_theorems, TheoryOptions};
use signed_curriculum::SignedGraph;

/// Triangle-difficulty curriculum training for signed graph neural networks.
#[derive(Parser)]
#[command(name = "signed-curriculum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a raw `src dst weight` edge file into a canonical signed graph.
    Ingest {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Count balanced and unbalanced simple cycles of length 3..=max-n.
    Census {
        graph: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Write per-edge triangle difficulty scores as CSV.
    Score {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a planted-partition signed benchmark graph.
    Synth {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 2)]
        communities: usize,
        #[arg(long, default_value_t = 0.1)]
        p_in: f64,
        #[arg(long, default_value_t = 0.02)]
        p_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train curriculum and random-order models over several seeds.
    Train {
        graph: PathBuf,
        /// TOML experiment config; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        pacing: Option<PacingKind>,
        #[arg(long)]
        lambda0: Option<f64>,
        /// Epoch at which the whole training set is in use.
        #[arg(short = 'T', long = "full-at")]
        full_at: Option<usize>,
        /// Number of seeds; runs seeds 0..N.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarize the metrics of a finished run directory.
    Eval { rundir: PathBuf },
    /// Check the ego-tree, embedding-equality and adequacy claims on the
    /// unbalanced cycle fixtures.
    VerifyTheory {
        #[arg(long, default_value_t = 10)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read_graph(path: &Path) -> Result<SignedGraph> {
    SignedGraph::read_edge_list(path).with_context(|| {
        format!(
            "could not load graph {} (expected the canonical format written by `ingest` or `synth`)",
            path.display()
        )
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Ingest { input, output } => {
            let ing = ingest_file(&input, &output).with_context(|| format!("ingesting {}", input.display()))?;
            print!("{}", ing.report.to_text());
        }
        Command::Census { graph, max_n, json } => {
            let c = census(&read_graph(&graph)?, max_n)?;
            if json {
                println!("{}", c.to_json());
            } else {
                print!("{c}");
            }
        }
        Command::Score { graph, output } => {
            let g = read_graph(&graph)?;
            std::fs::write(&output, scores_csv(&difficulty_scores(&g)))
                .with_context(|| format!("writing {}", output.display()))?;
        }
        Command::Synth {
            n,
            noise,
            communities,
            p_in,
            p_out,
            seed,
            output,
        } => {
            let g = synth_benchmark(&SynthParams {
                n,
                communities,
                p_in,
                p_out,
                noise,
                seed,
            })?;
            g.write_edge_list(&output)?;
            let (m, pos, neg) = g.edge_counts();
            println!("nodes={} edges={m} positive={pos} negative={neg}", g.node_count());
        }
        Command::Train {
            graph,
            config,
            pacing,
            lambda0,
            full_at,
            seeds,
            epochs,
            output,
        } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    ExperimentConfig::from_toml(&text)?
                }
                None => ExperimentConfig::default(),
            };
            cfg.graph = Some(graph.display().to_string());
            if let Some(k) = pacing {
                cfg.pacing.kind = k;
            }
            if let Some(l) = lambda0 {
                cfg.pacing.lambda0 = l;
            }
            if let Some(t) = full_at {
                cfg.pacing.full_at = t;
            }
            if let Some(s) = seeds {
                if s == 0 {
                    bail!("--seeds must be at least 1");
                }
                cfg.seeds = (0..s).collect();
            }
            if let Some(e) = epochs {
                cfg.model.epochs = e;
            }
            let g = read_graph(&graph)?;
            let out = run_experiment(&g, &cfg)?;
            out.write_dir(&output)?;
            print!("{}", out.summary().to_text());
        }
        Command::Eval { rundir } => {
            let path = rundir.join("metrics.jsonl");
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let records = parse_metrics_jsonl(&text).with_context(|| format!("parsing {}", path.display()))?;
            if records.is_empty() {
                bail!("{} has no records", path.display());
            }
            let summary = Summary::from_records(&records);
            print!("{}", summary.to_text());
            if let (Some(c), Some(r)) = (summary.mean("csg_auc"), summary.mean("random_auc")) {
                println!("csg_auc - random_auc = {:+.6}", c - r);
            }
        }
        Command::VerifyTheory { draws, seed } => {
            let report = verify_theorems(&TheoryOptions {
                draws,
                seed,
                ..Default::default()
            })?;
            println!("{report}");
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
