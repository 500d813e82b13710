//! `seqpack`: arrange objects for sequential printing, check schedules and
//! run plate-count benchmarks.
//!
//! Exit codes: 0 success, 1 schedule has violations (`verify`), 2 an object
//! does not fit an empty plate, 3 timeout, 4 input error, 5 internal failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use seqpack_core::benchmark::{run_benchmark, BenchmarkKind, BenchmarkSpec};
use seqpack_core::portfolio::PortfolioError;
use seqpack_core::rational::parse_rational;
use seqpack_core::schedule_file::{load_schedule, schedule_to_string};
use seqpack_core::svg::render_svg;
use seqpack_core::{
    load_scene, run_portfolio, verify_schedule, Backend, EngineConfig, EngineError, PortfolioSetup,
    Rational,
};

#[derive(Parser)]
#[command(
    name = "seqpack",
    version,
    about = "Object arrangement and scheduling for sequential 3D printing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arrange and order the objects of a scene.
    Solve(SolveArgs),
    /// Check a schedule file against a scene.
    Verify(VerifyArgs),
    /// Plate statistics over seeded random instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EngineArgs {
    /// Objects placed per bisection.
    #[arg(long, default_value_t = 4)]
    group_size: usize,
    /// Bisection tolerance on the plate shrink factor, e.g. `1/1024`.
    #[arg(long, default_value = "1/1024")]
    eps_xy: String,
    /// Minimum gap between print times.
    #[arg(long, default_value = "1")]
    eps_t: String,
    /// Wall-clock limit of one bounded solve in seconds; 0 disables it.
    #[arg(long, default_value_t = 60.0)]
    timeout_s: f64,
    /// `internal` or `external:<command>`, e.g. `external:z3 -in -smt2`.
    #[arg(long, default_value = "internal")]
    backend: String,
    /// Directory receiving the SMT-LIB2 text of every solver call.
    #[arg(long)]
    smtlib_dump: Option<PathBuf>,
    /// Worker threads for the portfolio; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scene: PathBuf,
    /// center, ordering, tactic or combined.
    #[arg(long, default_value = "center")]
    portfolio: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule file to write; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving one SVG per plate.
    #[arg(long)]
    svg_dir: Option<PathBuf>,
    /// Write the schedule even if the verifier rejects it.
    #[arg(long)]
    skip_verify: bool,
    /// Record wall-clock times in the schedule file and SVG comments.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// random-cuboids or object-pool.
    #[arg(long, default_value = "random-cuboids")]
    kind: String,
    /// Plate size as `<width>x<height>`.
    #[arg(long, default_value = "200x200")]
    plate: String,
    /// Inclusive cuboid dimension bounds `<lo>..<hi>`.
    #[arg(long, default_value = "8..64")]
    dims: String,
    /// Inclusive object counts `<lo>..<hi>` or a single count.
    #[arg(long, default_value = "1..32")]
    counts: String,
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated portfolio setups.
    #[arg(long, default_value = "center,ordering,tactic,combined")]
    setups: String,
    /// JSON report file; the summary table always goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock times.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

/// Error tagged with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(error: anyhow::Error) -> Failure {
    Failure { code: 4, error }
}

fn internal(error: anyhow::Error) -> Failure {
    Failure { code: 5, error }
}

fn rational_arg(text: &str, name: &str) -> anyhow::Result<Rational> {
    let r = parse_rational(text).with_context(|| format!("--{name}"))?;
    if r <= Rational::from_integer(0.into()) {
        bail!("--{name} must be positive");
    }
    Ok(r)
}

fn engine_config(a: &EngineArgs) -> anyhow::Result<EngineConfig> {
    if a.group_size == 0 {
        bail!("--group-size must be at least 1");
    }
    if !(a.timeout_s >= 0.0 && a.timeout_s.is_finite()) {
        bail!("--timeout-s must be a non-negative number");
    }
    let backend = Backend::parse(&a.backend)
        .ok_or_else(|| anyhow!("--backend must be `internal` or `external:<command>`"))?;
    Ok(EngineConfig {
        eps_t: rational_arg(&a.eps_t, "eps-t")?,
        eps_xy: rational_arg(&a.eps_xy, "eps-xy")?,
        group_size: a.group_size,
        timeout: (a.timeout_s > 0.0).then(|| Duration::from_secs_f64(a.timeout_s)),
        backend,
        smtlib_dump: a.smtlib_dump.clone(),
        ..EngineConfig::default()
    })
}

fn setup_arg(text: &str) -> anyhow::Result<PortfolioSetup> {
    PortfolioSetup::parse(text.trim()).ok_or_else(|| {
        anyhow!("unknown portfolio `{text}`; expected center, ordering, tactic or combined")
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(input)?;
    }
    std::fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input)
}

fn failure_of(err: PortfolioError) -> Failure {
    let outcomes = err.outcomes();
    let mut lines = Vec::new();
    let mut code = 5;
    for o in outcomes {
        if let Err(e) = &o.result {
            lines.push(format!("  {}: {e}", o.strategy));
            code = match (code, e) {
                (_, EngineError::InstanceError(_)) => 2,
                (2, _) => 2,
                (_, EngineError::Timeout) => 3,
                (c, _) => c,
            };
        }
    }
    Failure {
        code,
        error: anyhow!("no strategy produced a schedule:\n{}", lines.join("\n")),
    }
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let config = engine_config(&a.engine).map_err(input)?;
    let setup = setup_arg(&a.portfolio).map_err(input)?;
    let scene = load_scene(&a.scene)
        .with_context(|| format!("loading {}", a.scene.display()))
        .map_err(input)?;
    let outcome =
        run_portfolio(&scene, setup, &config, a.seed, a.engine.threads).map_err(failure_of)?;
    let schedule = outcome.best;
    if !a.skip_verify {
        let violations = verify_schedule(&schedule, &scene);
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
            return Err(internal(anyhow!(
                "the solved schedule failed verification:\n{}",
                text.join("\n")
            )));
        }
    }
    let text = schedule_to_string(&schedule, a.timing);
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(dir) = &a.svg_dir {
        let comment = a
            .timing
            .then(|| format!("solved in {} ms", schedule.wall_time.as_millis()));
        for (k, svg) in render_svg(&schedule, &scene, comment.as_deref())
            .iter()
            .enumerate()
        {
            write_file(&dir.join(format!("plate-{k}.svg")), svg)?;
        }
    }
    eprintln!(
        "{}: {} plate(s), objects per plate {:?}",
        schedule.strategy,
        schedule.plates.len(),
        schedule.objects_per_plate()
    );
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.scene)
        .with_context(|| format!("loading {}", a.scene.display()))
        .map_err(input)?;
    let schedule = load_schedule(&a.schedule, &scene)
        .with_context(|| format!("loading {}", a.schedule.display()))
        .map_err(input)?;
    let violations = verify_schedule(&schedule, &scene);
    if violations.is_empty() {
        println!("ok: {} plate(s), 0 violations", schedule.plates.len());
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure {
        code: 1,
        error: anyhow!("{} violation(s)", violations.len()),
    })
}

fn parse_range<T: std::str::FromStr>(text: &str, name: &str) -> anyhow::Result<(T, T)>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let (lo, hi) = text.split_once("..").unwrap_or((text, text));
    let lo = lo.trim().parse().with_context(|| format!("--{name}"))?;
    let hi = hi.trim().parse().with_context(|| format!("--{name}"))?;
    Ok((lo, hi))
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let spec = (|| -> anyhow::Result<BenchmarkSpec> {
        let kind = BenchmarkKind::parse(&a.kind)
            .ok_or_else(|| anyhow!("--kind must be random-cuboids or object-pool"))?;
        let (w, h) = a
            .plate
            .split_once('x')
            .ok_or_else(|| anyhow!("--plate must look like 200x200"))?;
        let (clo, chi) = parse_range::<usize>(&a.counts, "counts")?;
        Ok(BenchmarkSpec {
            kind,
            counts: clo..=chi,
            instances: a.instances,
            seed: a.seed,
            dims: parse_range::<i64>(&a.dims, "dims")?,
            plate: (rational_arg(w, "plate")?, rational_arg(h, "plate")?),
            ..BenchmarkSpec::default()
        })
    })()
    .map_err(input)?;
    let setups = a
        .setups
        .split(',')
        .map(setup_arg)
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(input)?;
    let config = engine_config(&a.engine).map_err(input)?;
    let report = run_benchmark(&spec, &setups, &config, a.engine.threads, a.timing)
        .map_err(|e| input(e.into()))?;
    print!("{}", report.summary());
    if let Some(path) = &a.out {
        let mut text =
            serde_json::to_string_pretty(&report.to_json()).map_err(|e| internal(e.into()))?;
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
