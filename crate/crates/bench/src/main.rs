use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynpr::graph::edge_list;
use dynpr::hard::{build_instance, Flavor, HardParams};
use dynpr::oracle::pagerank;
use dynpr_bench::hard_files::{edge_file, manifest, update_stream};
use dynpr_bench::{
    run_trials, verify_at_checkpoints, AggregateReport, EngineKind, Report, RunParams, Tolerance,
    UpdateStream,
};

#[derive(Parser)]
#[command(name = "dynpr-bench", version, about = "Replay edge streams against dynamic PageRank engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact PageRank of an edge-list graph, as `vertex,pagerank` CSV.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the adversarial instance: `<prefix>.edges`, `<prefix>.stream`
    /// and `<prefix>.manifest.csv`.
    GenHard(GenHard),
    /// Replay a stream and write a checkpoint report.
    Run(Run),
    /// Check a report against error tolerances.
    Verify {
        #[arg(long)]
        report: PathBuf,
        /// Largest allowed L1 error.
        #[arg(long)]
        max_l1: Option<f64>,
        /// Largest allowed relative deviation of any vertex.
        #[arg(long)]
        max_rel: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Additive,
    Multiplicative,
    Custom,
}

#[derive(Args)]
struct GenHard {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum)]
    flavor: FlavorArg,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Star size; defaults to n/8 for the custom flavor.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    prefix: PathBuf,
}

#[derive(Args)]
struct Run {
    #[arg(long)]
    stream: PathBuf,
    /// Starting graph; defaults to the empty graph with one self-loop per vertex.
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long, default_value = "walks-mult")]
    engine: EngineKind,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Regrow walks from their origin on deletion (biased; for comparison).
    #[arg(long)]
    naive_delete: bool,
    #[arg(long)]
    walks_per_vertex: Option<usize>,
    #[arg(long)]
    truncate: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Write 0 in the elapsed_ms column.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn oracle(graph: &Path, eps: f64, out: Option<&Path>) -> Result<()> {
    let g = edge_list::parse(&read(graph)?).with_context(|| format!("parsing {}", graph.display()))?;
    let pi = pagerank(&g, eps)?;
    let mut text = String::from("vertex,pagerank\n");
    for (v, x) in pi.iter().enumerate() {
        text.push_str(&format!("{v},{x}\n"));
    }
    emit(out, &text)
}

fn gen_hard(args: &GenHard) -> Result<()> {
    let need = |name: &str, v: Option<f64>| v.with_context(|| format!("--{name} is required for this flavor"));
    let flavor = match args.flavor {
        FlavorArg::Additive => Flavor::Additive { alpha: need("alpha", args.alpha)? },
        FlavorArg::Multiplicative => Flavor::Multiplicative { delta: need("delta", args.delta)? },
        FlavorArg::Custom => {
            let (Some(p), Some(t), Some(d)) = (args.p, args.t, args.d) else {
                bail!("the custom flavor needs --p, --t and --d");
            };
            Flavor::Custom(HardParams { p, t, d, s: args.s.unwrap_or(args.n / 8) })
        }
    };
    let spec = build_instance(args.n, args.eps, flavor)?;
    let with_ext = |ext: &str| {
        let mut name = args.prefix.clone().into_os_string();
        name.push(ext);
        PathBuf::from(name)
    };
    emit(Some(&with_ext(".edges")), &edge_file(&spec)?)?;
    emit(Some(&with_ext(".stream")), &update_stream(&spec).to_text())?;
    emit(Some(&with_ext(".manifest.csv")), &manifest(&spec))?;
    let HardParams { p, t, d, s } = spec.params;
    eprintln!(
        "n={} p={p} t={t} d={d} s={s}: {} updates, {} checkpoints",
        spec.n,
        spec.updates.len(),
        spec.checkpoints.len()
    );
    Ok(())
}

fn run(args: &Run) -> Result<()> {
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let stream = UpdateStream::parse(&read(&args.stream)?)
        .with_context(|| format!("parsing {}", args.stream.display()))?;
    let initial = match &args.initial {
        Some(path) => {
            Some(edge_list::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let params = RunParams {
        engine: args.engine,
        alpha: args.alpha,
        seed: args.seed,
        naive_delete: args.naive_delete,
        walks_per_vertex: args.walks_per_vertex,
        truncate: args.truncate,
        gamma: args.gamma,
        timing: !args.no_timing,
    };
    let reports = run_trials(&stream, initial.as_ref(), &params, args.trials)?;
    let text = if args.trials == 1 {
        reports[0].to_csv()
    } else {
        AggregateReport::from_trials(&reports)?.to_csv()
    };
    emit(args.out.as_deref(), &text)
}

fn verify(report: &Path, max_l1: Option<f64>, max_rel: Option<f64>) -> Result<bool> {
    let rep = Report::from_csv(&read(report)?)?;
    let mut tolerances = Vec::new();
    tolerances.extend(max_l1.map(Tolerance::MaxL1));
    tolerances.extend(max_rel.map(Tolerance::MaxRelative));
    if tolerances.is_empty() {
        bail!("give at least one of --max-l1, --max-rel");
    }
    let verdicts = verify_at_checkpoints(&rep, &tolerances);
    for v in &verdicts {
        println!("{v}");
    }
    Ok(verdicts.iter().all(|v| v.passed))
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Oracle { graph, eps, out } => oracle(&graph, eps, out.as_deref())?,
        Command::GenHard(args) => gen_hard(&args)?,
        Command::Run(args) => run(&args)?,
        Command::Verify { report, max_l1, max_rel } => {
            if !verify(&report, max_l1, max_rel)? {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
