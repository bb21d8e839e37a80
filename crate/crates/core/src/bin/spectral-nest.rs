use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spectral_nest::brown::brown_density_grid;
use spectral_nest::config::RunConfig;
use spectral_nest::decompose::{convergence_report, decompose_with, ConvergenceParams};
use spectral_nest::ensemble::{generate, read_matrix, DiagonalLaw, EnsembleKind, EnsembleSpec};
use spectral_nest::hs::{build_nest, hs_projection, BorelSetSpec};
use spectral_nest::linalg::leading_projection;
use spectral_nest::majorization::{pinch_log_check, weyl_check, CheckRow, ConvexGauge};
use spectral_nest::report::{envelope_json, inputs_hash, write_atomic, write_csv_with_config, CheckTable};
use spectral_nest::suite::run_suite;
use spectral_nest::{ComplexMatrix, Error, C64};

#[derive(Parser)]
#[command(name = "spectral-nest", version, about = "Normal plus nilpotent decompositions and spectral checks")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RunConfig JSON; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded ensemble into a directory.
    Gen(GenArgs),
    /// Split a matrix into normal and nilpotent parts.
    Decompose(DecomposeArgs),
    /// Grid estimate of the Brown measure.
    Brown(BrownArgs),
    /// Invariant projection for a closed ball.
    Hs(HsArgs),
    /// Majorization and convergence checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ginibre,
    Jordan,
    UpperTriangular,
    NormalPlusNilpotent,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Jordan eigenvalue.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    lambda: Option<Vec<f64>>,
    /// Diagonal of upper-triangular draws: `gaussian` or `disk:R`.
    #[arg(long, default_value = "gaussian")]
    diagonal_law: String,
    #[arg(long, default_value_t = 1.0)]
    coupling: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    curve_level: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Deepest dyadic level in the report.
    #[arg(long, default_value_t = 10)]
    n_max: u32,
}

#[derive(Args)]
struct BrownArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, num_args = 3, value_names = ["RE", "IM", "R"], allow_negative_numbers = true)]
    ball: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Weyl-type inequalities for the normal part.
    Weyl {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated `pow:P` / `logshift:S`.
        #[arg(long)]
        gauges: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence report, pinching checks and determinant identities.
    Lemmas {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "full")]
    suite: Suite,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

fn emit_error(kind: &str, message: String) {
    let record = ErrorRecord { error: kind, message };
    eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit_error("usage", e.render().to_string().trim_end().to_string());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(message)) => {
            emit_error("usage", message);
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            emit_error(e.kind(), e.to_string());
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a check failed.
fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Gen(args) => gen(args, &config),
        Command::Decompose(args) => {
            if let Some(level) = args.curve_level {
                config.curve_level = level;
            }
            config.validate()?;
            decompose_cmd(args, &config)
        }
        Command::Brown(args) => {
            if let Some(g) = args.grid {
                config.grid_resolution = g;
            }
            if let Some(e) = args.eps {
                config.epsilon = e;
            }
            config.validate()?;
            brown_cmd(args, &config)
        }
        Command::Hs(args) => hs_cmd(args, &config),
        Command::Check(CheckCommand::Weyl { input, gauges, out }) => {
            if let Some(g) = gauges {
                config.gauge_battery = ConvexGauge::parse_list(&g)?.iter().map(|g| g.to_string()).collect();
            }
            config.validate()?;
            weyl_cmd(&input, out, &config)
        }
        Command::Check(CheckCommand::Lemmas { input, n_max, out }) => lemmas_cmd(&input, n_max, out, &config),
        Command::Verify(args) => verify_cmd(args, &config),
    }
}

fn output_path(flag: Option<PathBuf>, config: &RunConfig, default_name: &str) -> PathBuf {
    flag.unwrap_or_else(|| config.resolve_output_dir().join(default_name))
}

fn parse_law(text: &str) -> Result<DiagonalLaw, Failure> {
    match text.split_once(':') {
        None if text == "gaussian" => Ok(DiagonalLaw::Gaussian),
        Some(("disk", r)) => r
            .parse()
            .map(|radius| DiagonalLaw::UniformDisk { radius })
            .map_err(|_| Failure::Usage(format!("bad disk radius {r:?}"))),
        _ => Err(Failure::Usage(format!("diagonal law must be gaussian or disk:R, got {text:?}"))),
    }
}

fn gen(args: GenArgs, config: &RunConfig) -> Result<bool, Failure> {
    let kind = match args.kind {
        Kind::Ginibre => EnsembleKind::Ginibre { n: args.n },
        Kind::Jordan => {
            let l = args.lambda.unwrap_or_else(|| vec![0.0, 0.0]);
            EnsembleKind::Jordan {
                lambda: [l[0], l[1]],
                n: args.n,
            }
        }
        Kind::UpperTriangular => EnsembleKind::UpperTriangularRandom {
            n: args.n,
            diagonal_law: parse_law(&args.diagonal_law)?,
        },
        Kind::NormalPlusNilpotent => EnsembleKind::NormalPlusNilpotent {
            n: args.n,
            coupling_scale: args.coupling,
        },
    };
    let spec = EnsembleSpec::new(kind, args.seed, args.count);
    let mats = generate(&spec)?;
    let dir = args.out.unwrap_or_else(|| config.resolve_output_dir());
    let width = mats.len().saturating_sub(1).to_string().len().max(4);
    for (i, m) in mats.iter().enumerate() {
        let path = dir.join(format!("m{i:0width$}.json"));
        write_atomic(&path, format!("{}\n", m.to_json()).as_bytes())?;
    }
    let manifest = envelope_json("ensemble", config, &serde_json::json!({ "ensemble": spec }));
    write_atomic(&dir.join("ensemble.json"), manifest.as_bytes())?;
    println!("wrote {} matrices to {}", mats.len(), dir.display());
    Ok(true)
}

fn decompose_cmd(args: DecomposeArgs, config: &RunConfig) -> Result<bool, Failure> {
    let t = read_matrix(&args.input)?;
    let map = config.curve_for(&t)?;
    let result = decompose_with(&t, &map, &config.tolerances)?;
    let mut ok = result.passed();
    let mut outputs = vec![(output_path(args.out, config, "result.json"), envelope_json("decompose", config, &result))];
    if let Some(path) = args.report {
        let n_max = args.n_max.min(2 * config.curve_level);
        let report = convergence_report(&t, &map, &ConvergenceParams::defaults(&t, n_max)?)?;
        ok &= report.passed();
        outputs.push((path, report.to_csv()));
    }
    for (i, (path, text)) in outputs.iter().enumerate() {
        if i == 0 {
            write_atomic(path, text.as_bytes())?;
        } else {
            write_csv_with_config(path, text, config)?;
        }
    }
    for d in &result.diagnostics {
        println!(
            "{:<18} {:.3e} <= {:.3e}  {}",
            d.name,
            d.value,
            d.bound,
            if d.pass { "ok" } else { "FAIL" }
        );
    }
    println!("wrote {}", outputs.iter().map(|(p, _)| p.display().to_string()).collect::<Vec<_>>().join(", "));
    Ok(ok)
}

fn brown_cmd(args: BrownArgs, config: &RunConfig) -> Result<bool, Failure> {
    let t = read_matrix(&args.input)?;
    let res = config.grid_resolution;
    let grid = brown_density_grid(&t, config.grid_bounds_for(&t), (res, res), config.epsilon)?;
    let path = output_path(args.out, config, "density.csv");
    write_csv_with_config(&path, &grid.to_csv(), config)?;
    println!(
        "total mass {:.6}, {} flagged negative nodes (most negative {:.3e}); wrote {}",
        grid.total_mass,
        grid.flagged_negative,
        grid.most_negative,
        path.display()
    );
    Ok(true)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HsOutput {
    set: BorelSetSpec,
    rank: usize,
    trace: f64,
    projection: ComplexMatrix,
    inner_spectrum: Vec<[f64; 2]>,
    outer_spectrum: Vec<[f64; 2]>,
    invariance_defect: f64,
}

fn pairs(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().map(|z| [z.re, z.im]).collect()
}

fn hs_cmd(args: HsArgs, config: &RunConfig) -> Result<bool, Failure> {
    let t = read_matrix(&args.input)?;
    let set = BorelSetSpec::ball(C64::new(args.ball[0], args.ball[1]), args.ball[2])?;
    let hs = hs_projection(&t, &set)?;
    let x = t.as_matrix();
    let p = &hs.projection;
    let defect = spectral_nest::linalg::op_norm(&(x * p - p * x * p));
    let out = HsOutput {
        rank: hs.rank,
        trace: hs.trace(),
        inner_spectrum: pairs(&hs.inner_spectrum()),
        outer_spectrum: pairs(&hs.outer_spectrum()),
        projection: ComplexMatrix::new(hs.projection.clone())?,
        invariance_defect: defect,
        set,
    };
    let path = output_path(args.out, config, "proj.json");
    write_atomic(&path, envelope_json("hs", config, &out).as_bytes())?;
    println!("rank {} of {} (trace {:.6}); wrote {}", hs.rank, t.dim(), hs.trace(), path.display());
    Ok(true)
}

fn print_table_summary(name: &str, table: &CheckTable, path: &Path) {
    println!(
        "{name}: {} rows, {} failures; wrote {}",
        table.len(),
        table.failures(),
        path.display()
    );
}

fn weyl_cmd(input: &Path, out: Option<PathBuf>, config: &RunConfig) -> Result<bool, Failure> {
    let t = read_matrix(input)?;
    let report = weyl_check(&t, &config.gauges()?, &config.curve_for(&t)?)?;
    let mut table = CheckTable::new();
    table.extend(&inputs_hash(&[&t]), report.rows());
    let path = output_path(out, config, "weyl.csv");
    write_csv_with_config(&path, &table.to_csv(), config)?;
    for r in &report.inequality {
        println!("{:<14} {:.6} <= {:.6}  {}", r.key, r.lhs, r.rhs, r.pass.as_str());
    }
    print_table_summary("weyl", &table, &path);
    Ok(report.passed())
}

fn lemmas_cmd(input: &Path, n_max: u32, out: Option<PathBuf>, config: &RunConfig) -> Result<bool, Failure> {
    let t = read_matrix(input)?;
    let map = config.curve_for(&t)?;
    let n_max = n_max.min(2 * map.level());
    let report = convergence_report(&t, &map, &ConvergenceParams::defaults(&t, n_max)?)?;
    let hash = inputs_hash(&[&t]);
    let mut table = CheckTable::new();
    for r in &report.rows {
        table.push(&hash, CheckRow::from(r));
    }
    // Pinching along every subspace of the nest.
    let build = build_nest(&t, &map)?;
    let mut pinch_ok = true;
    for jump in build.nest.jumps() {
        let p = leading_projection(build.nest.basis(), jump.rank);
        let pinch = pinch_log_check(&t, &p)?;
        pinch_ok &= pinch.passed();
        for r in pinch.log_majorization.rows.iter().chain([&pinch.determinant]) {
            let mut r = r.clone();
            r.key = if r.key.is_empty() {
                format!("rank={}", jump.rank)
            } else {
                format!("rank={};{}", jump.rank, r.key)
            };
            table.push(&hash, r);
        }
    }
    let path = output_path(out, config, "lemmas.csv");
    write_csv_with_config(&path, &table.to_csv(), config)?;
    print_table_summary("lemmas", &table, &path);
    Ok(report.passed() && pinch_ok)
}

fn verify_cmd(args: VerifyArgs, config: &RunConfig) -> Result<bool, Failure> {
    let Suite::Full = args.suite;
    let report = run_suite(args.seed, config)?;
    let dir = args.out.unwrap_or_else(|| config.resolve_output_dir());
    write_atomic(&dir.join("verify.csv"), report.to_csv().as_bytes())?;
    write_atomic(&dir.join("verify.json"), report.to_json(config).as_bytes())?;
    for c in &report.criteria {
        println!("{}", c.summary());
    }
    println!(
        "suite {} (seed {}); wrote {}",
        if report.pass { "PASS" } else { "FAIL" },
        args.seed,
        dir.display()
    );
    Ok(report.pass)
}
