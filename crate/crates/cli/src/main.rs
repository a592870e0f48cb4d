//! `spfact`: factorize, verify and benchmark matrix spectral densities stored
//! as JSON coefficient files.
//!
//! Exit codes: 0 success, 1 unreadable input or bad flags, 2 precondition
//! violation, 3 numerical breakdown, 4 verification above tolerance. Failures
//! print a single `error kind=<kind> msg=<text>` line to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spectral_factor::{
    factorize, fixtures, residual_metric, CoefficientFile, FactorError, FactorizationConfig, LaurentMatrix,
    Normalization, Orders, ScalarFactorParams, Side, SolverKind,
};

#[derive(Parser)]
#[command(name = "spfact", version, about = "Matrix spectral factorization of Laurent polynomial densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a density and write the factor as a coefficient file.
    Factorize(FactorizeArgs),
    /// Check a factor against a density.
    Verify(VerifyArgs),
    /// Factorize random densities `A A^*` and print a timing table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Center,
    HighestUpper,
    None,
}

impl From<NormalizeArg> for Normalization {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::Center => Normalization::Center,
            NormalizeArg::HighestUpper => Normalization::HighestUpper,
            NormalizeArg::None => Normalization::None,
        }
    }
}

#[derive(Args)]
struct ScalarArgs {
    /// Number of grid points used by the scalar factorizations (power of two).
    #[arg(long, default_value_t = 4096)]
    scalar_grid: usize,
    /// Relative floor applied to density samples before taking logarithms.
    #[arg(long, default_value_t = 1e-12)]
    clamp: f64,
    /// Use the displacement-structured solver instead of dense Cholesky.
    #[arg(long)]
    fast_solver: bool,
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Truncation order used at every step.
    #[arg(long, conflicts_with = "orders")]
    order: Option<usize>,
    /// Per-step truncation orders N_2,...,N_r.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
    #[arg(long, value_enum, default_value = "center")]
    normalize: NormalizeArg,
    #[command(flatten)]
    scalar: ScalarArgs,
    /// Write the diagnostics as JSON to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    density: PathBuf,
    #[arg(long)]
    factor: PathBuf,
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    size: usize,
    #[arg(long)]
    degree: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 32)]
    order: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of trials run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    scalar: ScalarArgs,
}

enum Failure {
    Parse(String),
    Io(String),
    Factor(FactorError),
    Tolerance(String),
}

impl From<FactorError> for Failure {
    fn from(e: FactorError) -> Self {
        Failure::Factor(e)
    }
}

impl Failure {
    fn report(&self) -> ExitCode {
        let (code, kind, msg) = match self {
            Failure::Parse(m) => (1, "parse", m.clone()),
            Failure::Io(m) => (1, "io", m.clone()),
            Failure::Factor(e) if e.is_precondition() => (2, e.kind(), e.to_string()),
            Failure::Factor(e) => (3, e.kind(), e.to_string()),
            Failure::Tolerance(m) => (4, "tolerance", m.clone()),
        };
        let msg = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        eprintln!("error kind={kind} msg={msg}");
        ExitCode::from(code)
    }
}

type CliResult = Result<(), Failure>;

fn read_matrix(path: &Path) -> Result<LaurentMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    CoefficientFile::from_json(&text)
        .and_then(|f| f.to_matrix())
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

impl ScalarArgs {
    fn config(&self, orders: Orders) -> FactorizationConfig {
        // Only used for 1x1 densities; there the factor keeps this many powers.
        let top = match &orders {
            Orders::Single(n) => *n,
            Orders::PerStep(v) => v.iter().copied().max().unwrap_or(0),
        };
        FactorizationConfig {
            orders,
            scalar: ScalarFactorParams {
                grid_size: self.scalar_grid,
                out_degree: top.min((self.scalar_grid / 2).saturating_sub(1)),
                clamp_floor: self.clamp,
            },
            solver: if self.fast_solver { SolverKind::Structured } else { SolverKind::Dense },
            ..FactorizationConfig::default()
        }
    }
}

fn cmd_factorize(args: &FactorizeArgs) -> CliResult {
    let s = read_matrix(&args.input)?;
    let orders = match (&args.order, &args.orders) {
        (_, Some(v)) => Orders::PerStep(v.clone()),
        (Some(n), None) => Orders::Single(*n),
        (None, None) => FactorizationConfig::default().orders,
    };
    let cfg = FactorizationConfig {
        side: args.side.into(),
        normalization: args.normalize.into(),
        ..args.scalar.config(orders)
    };
    let res = factorize(&s, &cfg)?;
    write_text(&args.output, &CoefficientFile::from_matrix(&res.factor).to_json())?;
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&res.diagnostics).expect("diagnostics serialize");
        write_text(path, &json)?;
    }
    println!("residual {:.6e}", res.diagnostics.residual);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let s = read_matrix(&args.density)?;
    let f = read_matrix(&args.factor)?;
    let candidate = match Side::from(args.side) {
        Side::Left => f.clone(),
        Side::Right => f.adjoint(),
    };
    let residual = residual_metric(&candidate, &s)?;
    let defect = candidate.try_mul(&candidate.adjoint())?.try_sub(&s)?.max_abs();
    println!("residual {residual:.6e}");
    println!("max_entry_defect {defect:.6e}");
    println!("negative_mass {:.6e}", f.negative_mass());
    if residual < args.tol {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("residual {residual:.6e} not below {:e}", args.tol)))
    }
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    if args.size == 0 || args.jobs == 0 {
        return Err(Failure::Parse("--size and --jobs must be positive".into()));
    }
    let cfg = args.scalar.config(Orders::Single(args.order));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::Io(e.to_string()))?;
    let rows: Vec<_> = pool.install(|| {
        (0..args.trials)
            .into_par_iter()
            .map(|trial| {
                // One stream per trial keeps the densities independent of --jobs.
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                rng.set_stream(trial as u64);
                let (s, _) = fixtures::random_round_trip_density(&mut rng, args.size, args.degree, 10);
                let start = Instant::now();
                let res = factorize(&s, &cfg)?;
                Ok((start.elapsed().as_secs_f64(), res.diagnostics.residual))
            })
            .collect::<Result<Vec<_>, FactorError>>()
    })?;
    println!("{:>6} {:>6} {:>6} {:>10} {:>12}", "size", "degree", "trial", "time_s", "residual");
    for (trial, (secs, residual)) in rows.iter().enumerate() {
        println!(
            "{:>6} {:>6} {:>6} {:>10.4} {:>12.3e}",
            format!("{0}x{0}", args.size),
            args.degree,
            trial,
            secs,
            residual
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            return Failure::Parse(first).report();
        }
    };
    let result = match &cli.command {
        Command::Factorize(a) => cmd_factorize(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
