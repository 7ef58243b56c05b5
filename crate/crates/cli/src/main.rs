use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qweyl_core::expr::normalize;
use qweyl_core::suite::{run_suite, RunConfig};
use qweyl_core::{CycField, DqAlgebra, TorusEmbedding};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "qweyl", version, about = "Exact checks for q-difference operators at roots of unity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the PBW normal form of each expression.
    Normalize {
        #[arg(long)]
        ell: u32,
        /// Number of variables (trivial torus unless --matrix is given).
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Embedding matrix as JSON, e.g. '[[1],[1]]'.
        #[arg(long)]
        matrix: Option<String>,
        /// Bilinear form as JSON; defaults to the identity.
        #[arg(long)]
        form: Option<String>,
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Run a verification config and write the JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for sampled checks.
        #[arg(long, env = "QWEYL_SEED")]
        seed: Option<u64>,
    },
    /// Summarize a report written by `verify`, one line per task.
    Report { path: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Normalize { ell, n, matrix, form, exprs } => {
            let field = CycField::new(ell as u64)?;
            let emb = match matrix {
                None => TorusEmbedding::trivial(n)?,
                Some(m) => {
                    let m: Vec<Vec<i64>> = serde_json::from_str(&m).context("parsing --matrix")?;
                    let d = m.first().map_or(0, Vec::len);
                    let form: Vec<Vec<i64>> = match form {
                        Some(f) => serde_json::from_str(&f).context("parsing --form")?,
                        None => (0..d).map(|a| (0..d).map(|b| i64::from(a == b)).collect()).collect(),
                    };
                    TorusEmbedding::new(m.len(), m, form)?
                }
            };
            let alg = DqAlgebra::new(field, emb);
            for src in &exprs {
                println!("{}", normalize(src, &alg).with_context(|| format!("in {src:?}"))?);
            }
            Ok(true)
        }
        Command::Verify { config, out, seed } => {
            let src = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = RunConfig::from_json(&src)?;
            let report = run_suite(&cfg, seed)?;
            let text = report.to_json() + "\n";
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(report.ok)
        }
        Command::Report { path } => {
            let src = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let report: Value = serde_json::from_str(&src)?;
            let tasks = report["tasks"].as_array().context("report has no task list")?;
            for (k, t) in tasks.iter().enumerate() {
                let status = if t["ok"] == Value::Bool(true) { "ok  " } else { "FAIL" };
                let detail = t.get("error").and_then(Value::as_str).unwrap_or("");
                println!("{status} {:>2} {} {detail}", k + 1, t["task"].as_str().unwrap_or("?"));
            }
            let ok = report["ok"] == Value::Bool(true);
            println!("{}", if ok { "all checks passed" } else { "some checks failed" });
            Ok(ok)
        }
    }
}
