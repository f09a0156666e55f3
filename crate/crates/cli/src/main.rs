mod commands;
mod demo;

use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commands::Outcome;

pub const SCHEMA: &str = "loja-lab/1";

#[derive(Parser, Debug)]
#[command(name = "loja", version, about = "Gradient-inequality exponents: exact bounds, flows and estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory receiving report.json and any CSV output.
    #[arg(long, global = true)]
    pub output_path: Option<PathBuf>,
    /// Ball radius.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Inner radius for the distance checks.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Sample count for the sampled checks.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Gradient-norm threshold for flow convergence.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Time horizon for the flow.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Blow-up depth limit.
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Human,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Human => "human",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal-crossing test, exponent, constants and gradient-inequality check.
    Analyze {
        /// Polynomial, builtin id (haraux, delellis) or `-` for stdin.
        input: String,
    },
    /// Blow-up tree and exponent interval for a plane curve.
    Resolve {
        input: String,
        /// Force blow-ups down to this depth.
        #[arg(long, default_value_t = 0)]
        min_depth: usize,
    },
    /// Gradient flow from a point, with length and distance checks.
    Flow {
        input: String,
        /// Start point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Sampling estimate of the exponent at a critical point.
    Estimate {
        input: String,
        /// Critical point (defaults to the origin).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        radii: Option<usize>,
        /// report.json of an earlier `resolve` run to compare against.
        #[arg(long)]
        prior: Option<PathBuf>,
    },
    /// Every applicable check on one input.
    Verify {
        input: String,
        /// Start point for a flow check.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Free coordinates (0-based, comma separated) of a critical subspace
        /// for the Morse–Bott checks; `origin` for the point itself.
        #[arg(long, value_parser = parse_subspace)]
        k: Option<Subspace>,
        /// Order for the generalized Morse–Bott check.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Reproduce the worked cusp example and compare with the golden values.
    DemoCusp,
}

#[derive(Debug, Clone)]
struct Subspace(Vec<usize>);

fn parse_subspace(s: &str) -> Result<Subspace, String> {
    if s == "origin" {
        return Ok(Subspace(vec![]));
    }
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>().map(Subspace)
}

fn read_input(text: &str) -> Result<String> {
    if text == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s.trim().to_string())
    } else {
        Ok(text.to_string())
    }
}

fn run(cli: Cli) -> Result<bool> {
    let common = cli.common.clone();
    if let Some(n) = common.workers {
        if n == 0 {
            bail!("--workers must be positive");
        }
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = common.workers {
            b = b.num_threads(n);
        }
        b.build().context("building worker pool")?
    };
    let (name, input, outcome) = pool.install(|| -> Result<(&str, Option<String>, Outcome)> {
        Ok(match &cli.command {
            Command::Analyze { input } => {
                let text = read_input(input)?;
                ("analyze", Some(text.clone()), commands::analyze(&text, &common)?)
            }
            Command::Resolve { input, min_depth } => {
                let text = read_input(input)?;
                ("resolve", Some(text.clone()), commands::resolve(&text, *min_depth, &common)?)
            }
            Command::Flow { input, point } => {
                let text = read_input(input)?;
                ("flow", Some(text.clone()), commands::flow(&text, point, &common)?)
            }
            Command::Estimate { input, point, r_min, r_max, radii, prior } => {
                let text = read_input(input)?;
                let opts =
                    commands::EstimateArgs { point: point.clone(), r_min: *r_min, r_max: *r_max, radii: *radii, prior: prior.clone() };
                ("estimate", Some(text.clone()), commands::estimate(&text, &opts, &common)?)
            }
            Command::Verify { input, point, k, order } => {
                let text = read_input(input)?;
                ("verify", Some(text.clone()), commands::verify(&text, point, k.as_ref().map(|k| k.0.as_slice()), *order, &common)?)
            }
            Command::DemoCusp => ("demo-cusp", None, demo::run(&common)?),
        })
    })?;

    let report = json!({
        "schema": SCHEMA,
        "command": name,
        "config": config_json(name, input.as_deref(), &common, &outcome.config),
        "pass": outcome.pass,
        "checks": outcome.checks.iter().map(|(n, p)| json!({"name": n, "pass": p})).collect::<Vec<_>>(),
        "result": outcome.result,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(dir) = &common.output_path {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.json"), &text).with_context(|| format!("writing {}", dir.join("report.json").display()))?;
        for (file, body) in &outcome.files {
            fs::write(dir.join(file), body).with_context(|| format!("writing {}", dir.join(file).display()))?;
        }
    }
    match common.format {
        Format::Json => print!("{text}"),
        Format::Human => {
            println!("{name}: {}", if outcome.pass { "PASS" } else { "FAIL" });
            for (n, p) in &outcome.checks {
                println!("  [{}] {n}", if *p { "ok" } else { "FAIL" });
            }
            for line in &outcome.summary {
                println!("  {line}");
            }
        }
        Format::Csv => match outcome.files.first() {
            Some((_, body)) => print!("{body}"),
            None => {
                println!("check,pass");
                for (n, p) in &outcome.checks {
                    println!("{n},{p}");
                }
            }
        },
    }
    Ok(outcome.pass)
}

fn config_json(name: &str, input: Option<&str>, c: &Common, extra: &Value) -> Value {
    let mut v = json!({
        "command": name,
        "input": input,
        "seed": c.seed,
        "format": c.format.as_str(),
        "output_path": c.output_path.as_ref().map(|p| p.display().to_string()),
    });
    if let (Some(obj), Some(add)) = (v.as_object_mut(), extra.as_object()) {
        for (k, val) in add {
            obj.insert(k.clone(), val.clone());
        }
    }
    v
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
