//! `springer` — sample, transform and verify points on both sides of the
//! correspondence between the two-row Springer variety and the union of
//! subvarieties `S_a ⊂ (P^1)^{2n}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use springer_core::flagside;
use springer_core::harness::{self, rng, CheckConfig, MAX_N};
use springer_core::io;
use springer_core::matchings::{self, Matching};
use springer_core::nilspace::NilpotentSpace;
use springer_core::sphereside::{self, LineTuple};
use springer_core::{Flag, Tolerances};

/// Largest `n` swept by `verify` without `--allow-large`.
const DESK_N: usize = 4;

#[derive(Parser)]
#[command(name = "springer", version, about = "Numerical laboratory for two-row Springer fibers and (P^1)^2n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the crossingless matchings of 2n points.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = TextFormat::Parens)]
        format: TextFormat,
    },
    /// Draw a random point of a component, subvariety or flag space.
    Sample(SampleArgs),
    /// Apply one of the maps to a JSON document.
    Map(MapArgs),
    /// Run the randomized verification suite and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Parens,
    Pairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    /// Component `K_a` of the Springer variety (flag).
    Ka,
    /// Subvariety `S_a` of `(P^1)^2n` (line tuple).
    Sa,
    /// Subvariety `T_a = I(S_a)` (line tuple).
    Ta,
    /// The iterated bundle `Y_2n` (flag).
    Ym,
    /// The subvariety `X_{2n,i}` (flag).
    Xmi,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(value_enum)]
    kind: SampleKind,
    /// Number of cups; flags and tuples have length 2n.
    #[arg(long)]
    n: usize,
    /// Matching, as parentheses `(())` or pairs `(1,4),(2,3)`.
    #[arg(long)]
    matching: Option<String>,
    /// Index `i` for `xmi`, 1 <= i < 2n.
    #[arg(long)]
    i: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    /// Flag to line tuple.
    Phi,
    /// Line tuple to flag.
    PhiInv,
    /// Replace every even-position line by its orthogonal line.
    I2n,
    /// `q_{m,i}` on a flag in `X_{m,i}`.
    Q,
}

#[derive(Args)]
struct MapArgs {
    #[arg(value_enum)]
    kind: MapKind,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Index `i` for `q`.
    #[arg(long)]
    i: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Equality threshold; overrides `SPRINGER_EPS`.
    #[arg(long, env = "SPRINGER_EPS")]
    eps: Option<f64>,
    /// Relative rank cutoff.
    #[arg(long)]
    eps_rank: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run only the named checks (repeatable); all checks by default.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Report file; the report is printed to standard output when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Permit n = 5, whose sweeps are much slower.
    #[arg(long)]
    allow_large: bool,
    /// Worker threads; all cores by default.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether the command succeeded in the domain sense (for `verify`:
/// whether every check passed).
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate { n, format } => enumerate(n, format).map(|_| true),
        Command::Sample(args) => sample(&args).map(|_| true),
        Command::Map(args) => map(&args).map(|_| true),
        Command::Verify(args) => verify(&args),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn enumerate(n: usize, format: TextFormat) -> Result<()> {
    let all = matchings::enumerate(n)?;
    let mut text = String::new();
    for a in &all {
        match format {
            TextFormat::Parens => text.push_str(&a.to_parens()),
            TextFormat::Pairs => text.push_str(&a.to_pairs_string()),
        }
        text.push('\n');
    }
    print!("{text}");
    Ok(())
}

fn matching_arg(args: &SampleArgs) -> Result<Matching> {
    let Some(text) = &args.matching else { bail!("--matching is required for this sample kind") };
    let a = matchings::parse(text)?;
    if a.n() != args.n {
        bail!("matching {a} has {} cups but --n is {}", a.n(), args.n);
    }
    Ok(a)
}

fn sample(args: &SampleArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be positive");
    }
    let m = 2 * args.n;
    let tol = Tolerances::default();
    let space = NilpotentSpace::for_flags(m);
    let mut r = rng::trial_rng(args.seed, "sample", 0);
    let text = match args.kind {
        SampleKind::Ka => io::flag_to_json(&flagside::sample_ka(&matching_arg(args)?, &space, &mut r, &tol)?)?,
        SampleKind::Ym => io::flag_to_json(&flagside::sample_ym(m, &space, &mut r, &tol)?)?,
        SampleKind::Xmi => {
            let i = args.i.context("--i is required for xmi")?;
            io::flag_to_json(&flagside::sample_xmi(m, i, &space, &mut r, &tol)?)?
        }
        SampleKind::Sa => io::tuple_to_json(&sphereside::sample_sa(&matching_arg(args)?, &mut r))?,
        SampleKind::Ta => io::tuple_to_json(&sphereside::sample_ta(&matching_arg(args)?, &mut r))?,
    };
    emit(args.out.as_deref(), &text)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_flag(path: &Path) -> Result<(NilpotentSpace, Flag)> {
    let doc = io::flag_from_json(&read(path)?).with_context(|| format!("parsing flag document {}", path.display()))?;
    Ok((NilpotentSpace::with_blocks(doc.ambient_n)?, doc.flag))
}

fn read_tuple(path: &Path) -> Result<LineTuple> {
    io::tuple_from_json(&read(path)?).with_context(|| format!("parsing line tuple document {}", path.display()))
}

fn map(args: &MapArgs) -> Result<()> {
    let tol = Tolerances::default();
    let text = match args.kind {
        MapKind::Phi => {
            let (space, flag) = read_flag(&args.input)?;
            let ym = flagside::is_in_ym(&flag, &space, &tol)?;
            if !ym.holds() {
                bail!("input flag is not in Y_m: {ym}");
            }
            io::tuple_to_json(&sphereside::phi(&flag, &space, &tol)?)?
        }
        MapKind::PhiInv => {
            let t = read_tuple(&args.input)?;
            let space = NilpotentSpace::for_flags(t.len());
            io::flag_to_json(&sphereside::phi_inv(&t, &space, &tol)?)?
        }
        MapKind::I2n => io::tuple_to_json(&sphereside::i_map(&read_tuple(&args.input)?))?,
        MapKind::Q => {
            let i = args.i.context("--i is required for q")?;
            let (space, flag) = read_flag(&args.input)?;
            io::flag_to_json(&flagside::q_map(&flag, &space, i, &tol)?)?
        }
    };
    emit(args.out.as_deref(), &text)
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    if args.n > DESK_N && !args.allow_large {
        bail!("n = {} exceeds the desk-scale limit {DESK_N}; pass --allow-large (maximum {MAX_N})", args.n);
    }
    let defaults = Tolerances::default();
    let tol = Tolerances::new(args.eps_rank.unwrap_or(defaults.eps_rank), args.eps.unwrap_or(defaults.eps_eq))?;
    let cfg = CheckConfig::new(args.n, args.trials, tol, args.seed)?;
    let start = Instant::now();
    let report = harness::with_threads(args.threads, || harness::run_selected(&cfg, &args.checks))??;
    info!("verification finished in {:.2?}", start.elapsed());

    for c in &report.checks {
        eprintln!(
            "{:<14} {:>4}  {:>6} trials  {:>4} failures  max residual {:.3e}",
            c.name,
            if c.passed() { "pass" } else { "FAIL" },
            c.trials,
            c.failures,
            c.max_residual
        );
    }
    eprintln!("overall: {}", if report.passed() { "pass" } else { "FAIL" });

    let json = report.to_json();
    match &args.json {
        Some(path) => fs::write(path, format!("{json}\n")).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(report.passed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn eps_flag_parses() {
        let cli = Cli::try_parse_from(["springer", "verify", "--n", "2", "--eps", "1e-7"]).unwrap();
        let Command::Verify(v) = cli.command else { panic!("expected verify") };
        assert_eq!(v.eps, Some(1e-7));
        assert_eq!(v.trials, 100);
    }
}
