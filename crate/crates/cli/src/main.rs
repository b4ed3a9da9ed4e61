//! `vne`: generators, embedders, verifier and simulator over JSON files.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::RunManifest;
use vne_core::embed::{embed, verify_embedding, Algorithm, EmbedFailure, EmbedOptions, Embedding};
use vne_core::sim::{events_to_json, run_simulation, sweep, write_csv, SimConfig, SweepRow};
use vne_core::topology::{b4_topology, generate_random_topology, ResidualState, SubstrateNetwork};
use vne_core::vnr::{generate_vnr_seeded, Vnr, VnrParams};

const EXIT_USAGE: u8 = 1;
const EXIT_FAIL_SIGNAL: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug)]
enum CliError {
    Usage(String),
    /// The request could not be embedded, or an embedding did not verify.
    Fail(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Fail(_) => EXIT_FAIL_SIGNAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Fail(m) | CliError::Io(m) => m,
        }
    }
}

impl From<EmbedFailure> for CliError {
    fn from(f: EmbedFailure) -> Self {
        CliError::Fail(f.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "vne", version, about = "Virtual network embedding with traffic-demand polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a substrate topology file.
    GenTopo(GenTopoArgs),
    /// Draw a random request over a topology's nodes.
    GenVnr(GenVnrArgs),
    /// Embed one request and verify the result.
    Embed(EmbedArgs),
    /// Check an embedding file against its topology and request.
    Verify(VerifyArgs),
    /// Run one simulation.
    Simulate(SimulateArgs),
    /// Run simulations over a bandwidth and algorithm grid.
    Sweep(SweepArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum TopoKind {
    Random,
    B4,
}

#[derive(Args, Debug, Serialize)]
struct GenTopoArgs {
    #[arg(long, value_enum)]
    kind: TopoKind,
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    /// Side of the square nodes are placed in.
    #[arg(long, default_value_t = 100.0)]
    grid: f64,
    /// Link probability per node pair.
    #[arg(long, default_value_t = 0.1)]
    prob: f64,
    #[arg(long, default_value_t = 1200.0)]
    bandwidth: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VnrArgs {
    #[arg(long, default_value_t = 2)]
    min_access: usize,
    #[arg(long, default_value_t = 10)]
    max_access: usize,
    #[arg(long, default_value_t = 0.5)]
    pair_prob: f64,
    #[arg(long, default_value_t = 1.0)]
    bound_min: f64,
    #[arg(long, default_value_t = 20.0)]
    bound_max: f64,
    /// Joint rows per request; one per pair when omitted.
    #[arg(long)]
    joint_rows: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    joint_min: f64,
    #[arg(long, default_value_t = 0.95)]
    joint_max: f64,
}

impl VnrArgs {
    fn params(&self) -> CliResult<VnrParams> {
        let p = VnrParams {
            min_access: self.min_access,
            max_access: self.max_access,
            pair_prob: self.pair_prob,
            bound_range: (self.bound_min, self.bound_max),
            joint_rows: self.joint_rows,
            joint_fraction: (self.joint_min, self.joint_max),
        };
        p.validate().map_err(CliError::Usage)?;
        Ok(p)
    }
}

#[derive(Args, Debug, Serialize)]
struct GenVnrArgs {
    #[arg(long)]
    topo: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    vnr: VnrArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EmbedArgs {
    #[arg(long)]
    topo: PathBuf,
    #[arg(long)]
    vnr: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    alg: Algorithm,
    /// Candidate paths per pair for the single-path variants.
    #[arg(long, default_value_t = vne_core::embed::DEFAULT_K)]
    k: usize,
    /// Embedding output; the verification report goes next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    topo: PathBuf,
    #[arg(long)]
    vnr: PathBuf,
    #[arg(long)]
    embedding: PathBuf,
    /// Report output; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimArgs {
    /// Topology file; the bundled B4 network when omitted.
    #[arg(long)]
    topo: Option<PathBuf>,
    #[arg(long, default_value_t = 5.0)]
    rate: f64,
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
    #[arg(long, default_value_t = 500.0)]
    horizon: f64,
    #[arg(long, default_value_t = vne_core::embed::DEFAULT_K)]
    k: usize,
    /// Sample utilization every this many time units instead of exactly.
    #[arg(long)]
    utility_interval: Option<f64>,
    /// Leave the embedding time column empty.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    vnr: VnrArgs,
}

impl SimArgs {
    fn config(&self, algorithm: Algorithm, seed: u64) -> CliResult<SimConfig> {
        let config = SimConfig {
            arrival_rate: self.rate,
            mean_duration: self.duration,
            horizon: self.horizon,
            algorithm,
            embed: EmbedOptions {
                k: self.k,
                ..EmbedOptions::default()
            },
            seed,
            vnr: self.vnr.params()?,
            utility_interval: self.utility_interval,
            record_timing: !self.no_timing,
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }

    /// The network and its label in the metrics table.
    fn network(&self) -> CliResult<(SubstrateNetwork, String)> {
        match &self.topo {
            Some(path) => {
                let sn = load_topology(path)?;
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "topology".into());
                Ok((sn, label))
            }
            None => Ok((b4_topology(1200.0).expect("bundled topology"), "b4".into())),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, value_parser = parse_algorithm, default_value = "mpar_mpor_hybrid")]
    alg: Algorithm,
    /// Sets every link to this bandwidth.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Metrics CSV (one row).
    #[arg(long)]
    out: PathBuf,
    /// Event log as JSON.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, value_delimiter = ',', default_value = "200,400,600,800,1000,1200")]
    bandwidths: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_algorithm,
        default_value = "spic,spor,mpic,mpor,mpor_fast,mpar_mpor_hybrid"
    )]
    algs: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn load_topology(path: &Path) -> CliResult<SubstrateNetwork> {
    SubstrateNetwork::load(path).map_err(|e| io_err(path, e))
}

fn load_vnr(path: &Path) -> CliResult<Vnr> {
    Vnr::load(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn cmd_gen_topo(args: &GenTopoArgs, manifest: &mut RunManifest) -> CliResult {
    let sn = match args.kind {
        TopoKind::B4 => b4_topology(args.bandwidth),
        TopoKind::Random => {
            generate_random_topology(args.nodes, args.grid, args.prob, args.bandwidth, args.seed)
        }
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    write(&args.out, &sn.to_json())?;
    manifest.output(&args.out);
    Ok(())
}

fn cmd_gen_vnr(args: &GenVnrArgs, manifest: &mut RunManifest) -> CliResult {
    let sn = load_topology(&args.topo)?;
    manifest.input(&args.topo);
    let vnr = generate_vnr_seeded(&sn, &args.vnr.params()?, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write(&args.out, &vnr.to_json())?;
    manifest.output(&args.out);
    Ok(())
}

fn cmd_embed(args: &EmbedArgs, manifest: &mut RunManifest) -> CliResult {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let sn = load_topology(&args.topo)?;
    let vnr = load_vnr(&args.vnr)?;
    manifest.input(&args.topo);
    manifest.input(&args.vnr);
    let residual = ResidualState::new(&sn);
    let options = EmbedOptions {
        k: args.k,
        ..EmbedOptions::default()
    };
    let embedding = embed(args.alg, &sn, &residual, &vnr, &options)?;
    let report = verify_embedding(&sn, &residual, &vnr, &embedding);
    write(&args.out, &embedding.to_json(&sn))?;
    let report_path = sibling(&args.out, ".verify.json");
    write(&report_path, &to_json(&report))?;
    manifest.output(&args.out);
    manifest.output(&report_path);
    if !report.ok {
        return Err(CliError::Fail(format!(
            "embedding did not verify: {}",
            report.first().map(|v| v.detail.as_str()).unwrap_or("unknown")
        )));
    }
    say(&format!("{} cost {}", embedding.algorithm, embedding.cost));
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, manifest: &mut RunManifest) -> CliResult {
    let sn = load_topology(&args.topo)?;
    let vnr = load_vnr(&args.vnr)?;
    let embedding: Embedding =
        Embedding::load(&args.embedding, &sn).map_err(|e| io_err(&args.embedding, e))?;
    for p in [&args.topo, &args.vnr, &args.embedding] {
        manifest.input(p);
    }
    let report = verify_embedding(&sn, &ResidualState::new(&sn), &vnr, &embedding);
    match &args.report {
        Some(path) => {
            write(path, &to_json(&report))?;
            manifest.output(path);
        }
        None => say(&to_json(&report)),
    }
    if report.ok {
        Ok(())
    } else {
        Err(CliError::Fail(format!("{} violation(s)", report.violations.len())))
    }
}

fn cmd_simulate(args: &SimulateArgs, manifest: &mut RunManifest) -> CliResult {
    let (sn, label) = args.sim.network()?;
    let sn = match args.bandwidth {
        Some(b) => sn.with_uniform_bandwidth(b).map_err(|e| CliError::Usage(e.to_string()))?,
        None => sn,
    };
    if let Some(p) = &args.sim.topo {
        manifest.input(p);
    }
    let config = args.sim.config(args.alg, args.seed)?;
    let run = run_simulation(&sn, &config).map_err(|e| CliError::Usage(e.to_string()))?;
    let bandwidth = args
        .bandwidth
        .unwrap_or_else(|| sn.links().first().map_or(0.0, |l| l.bandwidth));
    let row = SweepRow {
        topology: label,
        bandwidth,
        algorithm: args.alg,
        seed: args.seed,
        metrics: run.metrics,
    };
    write_table(&args.out, &[row])?;
    manifest.output(&args.out);
    if let Some(path) = &args.events {
        write(path, &events_to_json(&run.events))?;
        manifest.output(path);
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, manifest: &mut RunManifest) -> CliResult {
    let (sn, label) = args.sim.network()?;
    if let Some(p) = &args.sim.topo {
        manifest.input(p);
    }
    let config = args.sim.config(Algorithm::MparMporHybrid, 0)?;
    let rows = sweep(&label, &sn, &args.bandwidths, &args.algs, &args.seeds, &config)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write_table(&args.out, &rows)?;
    manifest.output(&args.out);
    Ok(())
}

fn write_table(path: &Path, rows: &[SweepRow]) -> CliResult {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| io_err(path, e))?;
    write(path, &String::from_utf8(buf).expect("csv is utf-8"))
}

/// Prints a line, ignoring a closed stdout.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn run(cli: &Cli) -> CliResult {
    let (name, params, seed, out): (&str, serde_json::Value, Option<u64>, &Path) = match &cli.command {
        Command::GenTopo(a) => ("gen-topo", json(a), Some(a.seed), &a.out),
        Command::GenVnr(a) => ("gen-vnr", json(a), Some(a.seed), &a.out),
        Command::Embed(a) => ("embed", json(a), None, &a.out),
        Command::Verify(a) => ("verify", json(a), None, &a.embedding),
        Command::Simulate(a) => ("simulate", json(a), Some(a.seed), &a.out),
        Command::Sweep(a) => ("sweep", json(a), None, &a.out),
    };
    let mut manifest = RunManifest::start(name, params, seed);
    let result = match &cli.command {
        Command::GenTopo(a) => cmd_gen_topo(a, &mut manifest),
        Command::GenVnr(a) => cmd_gen_vnr(a, &mut manifest),
        Command::Embed(a) => cmd_embed(a, &mut manifest),
        Command::Verify(a) => cmd_verify(a, &mut manifest),
        Command::Simulate(a) => cmd_simulate(a, &mut manifest),
        Command::Sweep(a) => cmd_sweep(a, &mut manifest),
    };
    // A manifest accompanies every output, and every failed embedding.
    let target = match &cli.command {
        Command::Verify(a) => a.report.as_deref(),
        _ => Some(out),
    };
    if let Some(target) = target {
        if !manifest.outputs.is_empty() || matches!(result, Err(CliError::Fail(_))) {
            let path = sibling(target, ".manifest.json");
            write(&path, &manifest.finish(result.as_ref().err().map(|e| e.message())))?;
        }
    }
    result
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("arguments serialize")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
