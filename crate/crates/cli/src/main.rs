use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phase_shadow::ensemble::NoiseModel;
use phase_shadow::experiment::{
    bench_postprocessing, builtin, grid_key, log_variance_slope, run_experiment, write_rows, ExperimentConfig,
};
use phase_shadow::pauli::PauliString;
use phase_shadow::prep::PrepSpec;
use phase_shadow::shadow::{aggregate, split_shots, EstimateOptions, Observable, ShadowDataset, StabObservable};
use phase_shadow::sigma::Mode;
use phase_shadow::store::{read_dataset, write_dataset};
use phase_shadow::tableau::StabState;
use phase_shadow::verify::{run_suite, write_sigma_table, SUITES};

/// Worker count for the shot loops; defaults to all cores.
const THREADS_ENV: &str = "PHASE_SHADOW_THREADS";

#[derive(Parser)]
#[command(name = "phase-shadow", version, about = "Robust phase-shadow estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate snapshots of a prepared state and write a snapshot file.
    Sample(SampleArgs),
    /// Estimate an observable from a snapshot file.
    Estimate(EstimateArgs),
    /// Run an oracle suite (or `all`).
    Verify(VerifyArgs),
    /// Run a named or JSON-configured experiment grid.
    Xp(XpArgs),
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
}

#[derive(Args)]
struct NoiseArgs {
    /// noiseless, zz or extended.
    #[arg(long, default_value = "zz")]
    noise: String,
    #[arg(long = "p-e", default_value_t = 0.0)]
    p_e: f64,
}

#[derive(Args)]
struct SampleArgs {
    /// ghz-star, cluster-1d, plus-product, random-stabilizer:<seed> or file:<path>.
    #[arg(long)]
    prep: String,
    #[arg(short, long)]
    n: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Total snapshots, split between circuit and bare shots.
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    /// Circuit shots per bare shot.
    #[arg(long, default_value_t = 3.0)]
    split: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(short, long = "in")]
    input: PathBuf,
    /// A preparation (fidelity target) or `pauli:<string>`; defaults to the
    /// dataset's own preparation.
    #[arg(long)]
    observable: Option<String>,
    #[arg(long, default_value = "robust")]
    mode: Mode,
    /// Group size for a median-of-means off-diagonal estimate.
    #[arg(long)]
    median_of_means: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// moments, noisy-moments, sigma, unbiased, postproc, channel or all.
    suite: String,
    /// Qubit count of the table dumped by `verify sigma`.
    #[arg(long, default_value_t = 6)]
    table_n: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Where `verify sigma` writes its table; standard output by default.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct XpArgs {
    /// variance-vs-n, bias-vs-pe, variance-slope or sanity; ignored with --config.
    name: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Larger qubit counts instead of desk scale.
    #[arg(long)]
    large: bool,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; overrides the config's output, standard output otherwise.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Per-snapshot post-processing time of a GHZ* fidelity estimate.
    Postproc {
        /// Qubit counts: a comma list, or `start:end:step` inclusive.
        #[arg(short, long, default_value = "15:65:5")]
        n: String,
        #[arg(long, default_value_t = 10_000)]
        snapshots: usize,
        #[arg(long = "p-e", default_value_t = 0.001)]
        p_e: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn parse_qubit_counts(text: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    if let [a, b, step] = parts[..] {
        let (a, b, step): (usize, usize, usize) = (a.parse()?, b.parse()?, step.parse()?);
        if step == 0 || a > b {
            return Err(format!("bad range {text:?}").into());
        }
        return Ok((a..=b).step_by(step).collect());
    }
    Ok(text.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?)
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sample(a: SampleArgs) -> CliResult<()> {
    let spec = PrepSpec::parse(&a.prep)?;
    let prep = StabState::from_circuit(&spec.circuit(a.n)?);
    let noise = NoiseModel::uniform(&a.noise.noise, a.noise.p_e)?;
    let (n_f, n_d) = split_shots(a.shots, a.split);
    let ds = ShadowDataset::sample(&prep, &spec.to_string(), &noise, n_f, n_d, a.seed, grid_key(a.n, a.noise.p_e))?;
    write_dataset(&ds, BufWriter::new(File::create(&a.out)?))?;
    eprintln!("wrote {} off-diagonal and {} diagonal snapshots to {}", n_f, n_d, a.out.display());
    Ok(())
}

fn observable(text: &str, n: usize) -> CliResult<Observable> {
    if let Some(p) = text.strip_prefix("pauli:") {
        let p: PauliString = p.parse()?;
        return Ok(Observable::Pauli(p));
    }
    let spec = PrepSpec::parse(text)?;
    Ok(Observable::Stabilizer(StabObservable::from_circuit(&spec.circuit(n)?)))
}

fn estimate(a: EstimateArgs) -> CliResult<()> {
    let ds = read_dataset(BufReader::new(File::open(&a.input)?))?;
    let text = a.observable.unwrap_or_else(|| ds.meta().prep.clone());
    let obs = observable(&text, ds.meta().n)?;
    let opts = EstimateOptions {
        mode: a.mode,
        median_of_means: a.median_of_means,
    };
    let est = aggregate(&ds, &obs, &opts)?;
    println!("{}", serde_json::to_string_pretty(&est)?);
    Ok(())
}

fn verify(a: VerifyArgs) -> CliResult<bool> {
    let names: Vec<&str> = if a.suite == "all" { SUITES.to_vec() } else { vec![a.suite.as_str()] };
    let mut ok = true;
    for name in names {
        let report = run_suite(name)?;
        println!("{report}");
        ok &= report.passed();
    }
    if a.suite == "sigma" {
        let model = NoiseModel::uniform(&a.noise.noise, a.noise.p_e)?;
        let mut out = output(a.csv.as_deref())?;
        write_sigma_table(a.table_n, &model, &mut out)?;
        out.flush()?;
    }
    Ok(ok)
}

fn xp(a: XpArgs) -> CliResult<()> {
    let mut cfg = match (&a.config, &a.name) {
        (Some(path), _) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => builtin(name, a.large)?,
        (None, None) => return Err("xp needs an experiment name or --config".into()),
    };
    if let Some(shots) = a.shots {
        cfg.shots = shots;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let rows = run_experiment(&cfg)?;
    let dest = a.out.or(cfg.output.clone());
    let mut out = output(dest.as_deref())?;
    write_rows(&rows, &mut out)?;
    out.flush()?;
    if cfg.p_e.len() > 1 {
        for &n in &cfg.n {
            let sub: Vec<_> = rows.iter().filter(|r| r.n == n && r.mode == Mode::Robust).cloned().collect();
            if let Some(slope) = log_variance_slope(&sub) {
                eprintln!("n={n}: slope of ln variance vs p_e = {slope:.2} (n^2/2 = {})", n * n / 2);
            }
        }
    }
    Ok(())
}

fn bench(b: BenchCommand) -> CliResult<()> {
    let BenchCommand::Postproc {
        n,
        snapshots,
        p_e,
        seed,
        out,
    } = b;
    let rows = bench_postprocessing(&parse_qubit_counts(&n)?, snapshots, p_e, seed)?;
    for r in &rows {
        eprintln!(
            "n={:3}  {:9.3} us/snapshot  mean 2^n_g = {:.3}",
            r.n,
            r.time_ms * 1e3 / r.shots as f64,
            r.ng_mean.unwrap_or(f64::NAN)
        );
    }
    let mut w = output(out.as_deref())?;
    write_rows(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        let threads: usize = text.parse().map_err(|_| format!("{THREADS_ENV} must be a count, got {text:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Sample(a) => sample(a)?,
        Command::Estimate(a) => estimate(a)?,
        Command::Verify(a) => return verify(a),
        Command::Xp(a) => xp(a)?,
        Command::Bench { which } => bench(which)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
