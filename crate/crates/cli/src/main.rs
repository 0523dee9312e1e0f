//! `modpid` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use modpid::experiment::{self, GridConfig, GridResult, OneOrMany};
use modpid::golden::GoldenSet;
use modpid::models::Model;
use modpid::pid::{self, BrojaOptions, CcsVariant, Method};
use modpid::transfer::TransferTag;
use modpid::JointDist3;

const EXIT_ERROR: u8 = 1;
const EXIT_ASSERTION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "modpid", version, about = "Partial information decompositions of two-input processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a probability array stored as JSON ({"dims": [ny, nr, nc], "p": [...]}).
    Pid(PidArgs),
    /// Simulate, bin and decompose one experiment cell.
    Simulate(SimulateArgs),
    /// Run a grid of cells described by a JSON config.
    Grid(GridArgs),
    /// Recompute the entries of a golden file and compare.
    VerifyGoldens(VerifyArgs),
}

#[derive(Args)]
struct PidArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "imin,broja,ccs", value_delimiter = ',', num_args = 1..)]
    methods: Vec<Method>,
    /// Divide every term by H(Y).
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value = "observed-joint", value_parser = parse_variant)]
    ccs_variant: CcsVariant,
    /// Iteration cap for the broja solver.
    #[arg(long, default_value_t = pid::DEFAULT_MAX_ITER)]
    broja_max_iter: usize,
    /// Duality-gap tolerance for the broja solver, in bits.
    #[arg(long, default_value_t = pid::DEFAULT_TOL)]
    broja_tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "bgm")]
    model: Model,
    #[arg(long)]
    transfer: TransferTag,
    #[arg(long)]
    scenario: u8,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = experiment::DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "imin,broja,ccs", value_delimiter = ',', num_args = 1..)]
    methods: Vec<Method>,
    #[arg(long, default_value_t = modpid::binning::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = modpid::models::DEFAULT_SIGMA)]
    sigma: f64,
    /// Force normalized spectra (default: BGM normalized, SBG in bits).
    #[arg(long, conflicts_with = "bits")]
    normalize: bool,
    /// Force spectra in bits.
    #[arg(long)]
    bits: bool,
    /// Also write the raw (r, c, y) samples to samples.csv.
    #[arg(long, requires = "out")]
    dump_samples: bool,
    /// Output directory; without it the result table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Skip the SVG figures.
    #[arg(long)]
    no_svg: bool,
    /// Run cells one at a time.
    #[arg(long)]
    serial: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    golden: PathBuf,
}

fn parse_variant(s: &str) -> Result<CcsVariant, String> {
    match s {
        "observed-joint" => Ok(CcsVariant::ObservedJoint),
        "pairwise-maxent" => Ok(CcsVariant::PairwiseMaxent),
        _ => Err(format!("unknown ccs variant `{s}` (observed-joint | pairwise-maxent)")),
    }
}

/// Formats a float the way the result tables do.
fn num(v: f64) -> String {
    v.to_string()
}

fn run_pid(args: &PidArgs) -> anyhow::Result<u8> {
    let dist = JointDist3::load(&args.input)?;
    let summary = dist.summary()?;
    let mut rows = Vec::with_capacity(args.methods.len());
    for &m in &args.methods {
        let comps = match m {
            Method::Ccs => pid::pid_ccs(&dist, args.ccs_variant)?,
            Method::Broja => {
                let opts = BrojaOptions {
                    tol: args.broja_tol,
                    max_iter: args.broja_max_iter,
                    ..BrojaOptions::default()
                };
                pid::pid_broja(&dist, &opts)?.0
            }
            other => pid::decompose(&dist, other)?,
        };
        rows.push(match pid::complete_spectrum(&comps, &summary, args.normalize) {
            Err(modpid::Error::ZeroEntropyOutput) => {
                log::warn!("H(Y) is zero; reporting an all-zero normalized spectrum");
                pid::zero_spectrum(m, summary.hy)
            }
            other => other?,
        });
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "method,UnqR,UnqC,Shd,Syn,Hres,HY")?;
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.method,
            num(s.unq_r),
            num(s.unq_c),
            num(s.shd),
            num(s.syn),
            num(s.hres),
            num(s.hy)
        )?;
    }
    Ok(0)
}

fn write_outputs(result: &GridResult, dir: &Path, svg: bool) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if !result.rows.is_empty() {
        experiment::emit_csv(result, &dir.join("results.csv"))?;
        if svg {
            experiment::emit_svg(result, dir)?;
        }
    }
    experiment::emit_metadata(result, &dir.join("metadata.json"))?;
    Ok(())
}

fn failure_code(result: &GridResult) -> u8 {
    for f in &result.failures {
        log::error!("{}: {}", f.key, f.error);
    }
    if result.failures.iter().any(|f| f.nonconvergence) {
        EXIT_NONCONVERGENCE
    } else if result.failures.is_empty() {
        0
    } else {
        EXIT_ERROR
    }
}

fn run_simulate(args: &SimulateArgs) -> anyhow::Result<u8> {
    let normalize = match (args.normalize, args.bits) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    let grid = GridConfig {
        model: OneOrMany::One(args.model),
        transfer: OneOrMany::One(args.transfer),
        scenario: OneOrMany::One(args.scenario),
        d: OneOrMany::One(args.d),
        sigma: args.sigma,
        n: args.n,
        seed: args.seed,
        methods: args.methods.clone(),
        normalize,
        bins: args.bins,
    };
    let result = experiment::run_grid_serial(&grid)?;
    match &args.out {
        Some(dir) => {
            write_outputs(&result, dir, false)?;
            if let Some(cell) = result.cells.first() {
                cell.dist.save(dir.join("dist.json"))?;
                if args.dump_samples {
                    let data = experiment::simulate_cell(&cell.config)?;
                    data.batch.write_csv(&dir.join("samples.csv"))?;
                }
            }
        }
        None => {
            experiment::write_csv(&result, std::io::stdout().lock())?;
        }
    }
    Ok(failure_code(&result))
}

fn run_grid(args: &GridArgs) -> anyhow::Result<u8> {
    let grid = GridConfig::load(&args.config)?;
    let result = if args.serial {
        experiment::run_grid_serial(&grid)?
    } else {
        experiment::run_grid(&grid)?
    };
    write_outputs(&result, &args.out, !args.no_svg)?;
    eprintln!(
        "{} rows, {} failed cells, {:.1} s -> {}",
        result.rows.len(),
        result.failures.len(),
        result.metadata.elapsed_seconds,
        args.out.display()
    );
    Ok(failure_code(&result))
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let set = GoldenSet::load(&args.golden)?;
    if set.entries.is_empty() {
        bail!("{}: golden file has no entries", args.golden.display());
    }
    let report = set.verify();
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let detail = match (&c.error, c.max_diff) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(d)) => format!(
                "max diff {d:.3e} (tol {:.0e}), golden identity error {:.1e}",
                c.tolerance,
                c.golden_consistency.unwrap_or(f64::NAN)
            ),
            (None, None) => "not computed".into(),
        };
        println!("{status} {} {}: {detail}", c.distribution, c.method);
    }
    let failed = report.failures().count();
    println!("{} of {} entries passed", report.checks.len() - failed, report.checks.len());
    Ok(if report.any_nonconvergence() {
        EXIT_NONCONVERGENCE
    } else if failed > 0 {
        EXIT_ASSERTION
    } else {
        0
    })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<modpid::Error>().map(modpid::Error::root) {
        Some(modpid::Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
        _ => EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Pid(a) => run_pid(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Grid(a) => run_grid(a),
        Command::VerifyGoldens(a) => run_verify(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
