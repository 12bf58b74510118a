//! Command-line front end: data ingestion, test execution, simulation
//! campaigns and table emission.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (files, parsing,
//! window containment), 4 numeric or model-specification error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgg_gof::alternatives::{sps_defaults, ConParams, ContiguousSpec};
use rgg_gof::competitors::br_critical_table;
use rgg_gof::harness::{
    clt_diagnostic, contiguity_diagnostic, critical_value_grid, critical_value_grid_with,
    grid_config, power_grid_with, seed_space, simulate_statistics, MCPlan, Model,
};
use rgg_gof::io::{format_points, read_points};
use rgg_gof::stats::{empirical_pvalue, t_asym, t_exact};
use rgg_gof::table::{ResultTable, Row};
use rgg_gof::{Error, RadiusRule, RngStream, TestConfig, Variant, Window};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rgg-gof",
    about = "Goodness-of-fit tests of multivariate uniformity from random geometric graph edge statistics",
    version
)]
struct Cli {
    /// Worker threads (default: RGG_GOF_THREADS or machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a point file for uniformity on its observation window.
    Test(TestArgs),
    /// Sample a point cloud from the null or an alternative model.
    Gen(GenArgs),
    /// Simulate critical-value tables under the null.
    Crit(CritArgs),
    /// Simulate rejection-rate tables against critical values.
    Power(PowerArgs),
    /// Normality diagnostic for the standardized edge sum under the null.
    CltCheck(CltArgs),
    /// Noncentral-limit diagnostic under contiguous alternatives.
    ContigCheck(ContigArgs),
    /// Critical values of the kernel-density competitor statistic (d=2).
    BrCrit(BrCritArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Exact null-mean centering.
    E,
    /// Asymptotic null-mean centering.
    A,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::E => Variant::Exact,
            VariantArg::A => Variant::Asymptotic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Exact,
    Asym,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    H0,
    Con,
    Clu,
    Sps,
    Contiguous,
}

#[derive(Args)]
struct TestArgs {
    /// Point file: one point per line, comma-separated coordinates.
    #[arg(long)]
    input: PathBuf,
    /// Observation window: "unit:D" or "box:L1,L2[,L3]" (isotropically
    /// rescaled to unit volume; the same scale is applied to the data).
    #[arg(long)]
    window: String,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    /// Average-degree parameter of the radius rule.
    #[arg(long, conflicts_with = "radius")]
    k: Option<f64>,
    /// Radius regime: exact (k/(n kappa))^(1/d) or asym (k/(n^1.5 kappa))^(1/d).
    #[arg(long, value_enum, default_value = "exact", conflicts_with = "radius")]
    regime: RegimeArg,
    /// Explicit graph radius (alternative to --k/--regime).
    #[arg(long)]
    radius: Option<f64>,
    /// Null replications for the empirical p-value (0: asymptotic only).
    #[arg(long, default_value_t = 0)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Write the outcome as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cluster radius (clu).
    #[arg(long, default_value_t = 0.1)]
    r_clu: f64,
    /// Contamination probability (sps).
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    /// Point-source standard deviation (sps).
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Perturbation amplitude for 1 + a cos(2 pi x1) (contiguous).
    #[arg(long, default_value_t = 0.5)]
    amp: f64,
    /// Mixture weight of the first Gaussian component (con).
    #[arg(long)]
    q1: Option<f64>,
    /// Mixture weight of the second Gaussian component (con).
    #[arg(long)]
    q2: Option<f64>,
    /// Standard deviation of the first component (con).
    #[arg(long)]
    sigma1: Option<f64>,
    /// Standard deviation of the second component (con).
    #[arg(long)]
    sigma2: Option<f64>,
}

#[derive(Args)]
struct CritArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    d: usize,
    /// Comma-separated list of exponents.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Vec<f64>,
    /// Comma-separated list of sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Comma-separated list of average-degree parameters.
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// CSV output path (required).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    variant: VariantArg,
    #[arg(long)]
    d: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Critical-value CSV produced by `crit` (simulated when omitted).
    #[arg(long)]
    crit: Option<PathBuf>,
    /// Replications for on-the-fly critical values.
    #[arg(long, default_value_t = 100_000)]
    crit_reps: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    r_clu: f64,
    #[arg(long, default_value_t = 0.05)]
    p: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    amp: f64,
}

#[derive(Args)]
struct CltArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: f64,
    #[arg(long, value_enum, default_value = "exact")]
    regime: RegimeArg,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (one row per reported metric).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ContigArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    /// Sample-size schedule.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    k: f64,
    /// Noncentrality targets; the amplitude solves n r^{d/2} a^2 = gamma.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BrCritArgs {
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Comma-separated bandwidths.
    #[arg(long = "h", value_delimiter = ',')]
    bandwidths: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli.threads.or_else(|| {
        std::env::var("RGG_GOF_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} worker threads: {e}");
            return ExitCode::from(2);
        }
    }

    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Crit(args) => cmd_crit(args),
        Command::Power(args) => cmd_power(args),
        Command::CltCheck(args) => cmd_clt_check(args),
        Command::ContigCheck(args) => cmd_contig_check(args),
        Command::BrCrit(args) => cmd_br_crit(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for data problems, 4 for numeric/model-specification problems.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Io(_)
        | Error::EmptySample(_)
        | Error::NonFiniteCoordinate { .. }
        | Error::PointOutsideWindow { .. }
        | Error::TooFewPoints(..) => 3,
        _ => 4,
    }
}

fn parse_window(spec: &str) -> Result<Window, Error> {
    if let Some(d) = spec.strip_prefix("unit:") {
        let d: usize = d
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad window spec '{spec}'")))?;
        Window::unit_cube(d)
    } else if let Some(sides) = spec.strip_prefix("box:") {
        let sides: Result<Vec<f64>, _> = sides.split(',').map(|s| s.trim().parse()).collect();
        let sides =
            sides.map_err(|_| Error::InvalidParameter(format!("bad window spec '{spec}'")))?;
        Window::normalize_box(&sides)
    } else {
        Err(Error::InvalidParameter(format!(
            "window spec '{spec}' must be 'unit:D' or 'box:L1,L2[,L3]'"
        )))
    }
}

fn radius_rule(
    k: Option<f64>,
    regime: RegimeArg,
    radius: Option<f64>,
) -> Result<RadiusRule, Error> {
    match (k, radius) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter(
            "give either --k with --regime or --radius, not both".into(),
        )),
        (None, Some(r)) => Ok(RadiusRule::Fixed { r }),
        (Some(k), None) => Ok(match regime {
            RegimeArg::Exact => RadiusRule::ExactRegime { k },
            RegimeArg::Asym => RadiusRule::AsymptoticRegime { k },
        }),
        (None, None) => Err(Error::InvalidParameter(
            "a radius is required: --k [--regime] or --radius".into(),
        )),
    }
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let window = parse_window(&args.window)?;
    let raw = read_points(&args.input)?;
    if raw.dim() != window.dim() {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "file dimension {} does not match window dimension {}",
                raw.dim(),
                window.dim()
            ),
        });
    }
    if raw.len() < 2 {
        return Err(Error::TooFewPoints(raw.len(), 2));
    }
    // Containment is checked in original coordinates, then everything is
    // carried to the normalized window.
    for (i, p) in raw.iter_points().enumerate() {
        let inside = match &window {
            Window::UnitCube(d) => p.len() == *d && p.iter().all(|&x| (0.0..=1.0).contains(&x)),
            Window::Box { original, .. } => {
                p.iter().zip(original).all(|(&x, &s)| x >= 0.0 && x <= s)
            }
        };
        if !inside {
            return Err(Error::PointOutsideWindow { index: i });
        }
    }
    let cloud = raw.scaled(window.scale());
    cloud.validate_in_window(&window)?;

    let cfg = TestConfig {
        beta: args.beta,
        radius: radius_rule(args.k, args.regime, args.radius)?,
        variant: args.variant.into(),
        dim: window.dim(),
    };
    let mut outcome = match cfg.variant {
        Variant::Exact => t_exact(&cloud, &cfg, &window)?,
        Variant::Asymptotic => t_asym(&cloud, &cfg)?,
    };

    if args.reps > 0 {
        let plan = MCPlan {
            reps: args.reps,
            seed: args.seed,
            n: cloud.len(),
            config: cfg,
            model: Model::H0,
            window: window.clone(),
            level: 1.0 - args.alpha,
        };
        let draws = simulate_statistics(&plan, seed_space::DATA)?;
        outcome.p_empirical = Some(empirical_pvalue(outcome.statistic, &draws)?);
    }
    let p_decision = outcome.p_empirical.unwrap_or(outcome.p_asymptotic);
    outcome.reject_at = vec![(args.alpha, p_decision <= args.alpha)];

    println!("n = {}, d = {}", cloud.len(), window.dim());
    match &window {
        Window::UnitCube(d) => println!("window: unit cube [0,1]^{d}"),
        Window::Box {
            sides,
            original,
            scale,
        } => println!(
            "window: box {original:?} normalized to {sides:?} (scale {scale})"
        ),
    }
    println!(
        "variant: {}, beta = {}, radius = {}",
        match cfg.variant {
            Variant::Exact => "exact centering",
            Variant::Asymptotic => "asymptotic centering",
        },
        args.beta,
        outcome.radius
    );
    println!("statistic: {}", outcome.statistic);
    println!("asymptotic p-value: {}", outcome.p_asymptotic);
    match outcome.p_empirical {
        Some(p) => println!("empirical p-value ({} replications): {p}", args.reps),
        None => println!("empirical p-value: not requested (--reps 0)"),
    }
    println!(
        "decision at alpha = {}: {}",
        args.alpha,
        if outcome.reject_at[0].1 {
            "REJECT uniformity"
        } else {
            "do not reject"
        }
    );

    if let Some(path) = args.json {
        let report = serde_json::json!({
            "n": cloud.len(),
            "d": window.dim(),
            "beta": args.beta,
            "variant": match cfg.variant { Variant::Exact => "e", Variant::Asymptotic => "a" },
            "seed": args.seed,
            "reps": args.reps,
            "alpha": args.alpha,
            "window_scale": window.scale(),
            "outcome": outcome,
        });
        std::fs::write(&path, serde_json::to_string_pretty(&report).expect("json"))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn build_model(
    model: ModelArg,
    d: usize,
    r_clu: f64,
    p: f64,
    sigma: f64,
    amp: f64,
    con_overrides: (Option<f64>, Option<f64>, Option<f64>, Option<f64>),
) -> Result<Model, Error> {
    Ok(match model {
        ModelArg::H0 => Model::H0,
        ModelArg::Con => {
            let mut params = ConParams::defaults(d)?;
            let (q1, q2, sigma1, sigma2) = con_overrides;
            if let Some(v) = q1 {
                params.q1 = v;
            }
            if let Some(v) = q2 {
                params.q2 = v;
            }
            if let Some(v) = sigma1 {
                params.sigma1 = v;
            }
            if let Some(v) = sigma2 {
                params.sigma2 = v;
            }
            Model::Con(params)
        }
        ModelArg::Clu => Model::Clu { r_clu },
        ModelArg::Sps => {
            let (center, _, _) = sps_defaults(d);
            Model::Sps { center, sigma, p }
        }
        ModelArg::Contiguous => Model::Contiguous(ContiguousSpec::cos_first_coord(amp)?),
    })
}

fn model_header(model: &Model) -> String {
    match model {
        Model::H0 => "model=h0".into(),
        Model::Con(p) => format!(
            "model=con q1={} q2={} c1={:?} c2={:?} sigma1={} sigma2={}",
            p.q1, p.q2, p.c1, p.c2, p.sigma1, p.sigma2
        ),
        Model::Clu { r_clu } => format!("model=clu r_clu={r_clu}"),
        Model::Sps { center, sigma, p } => {
            format!("model=sps center={center:?} sigma={sigma} p={p}")
        }
        Model::Contiguous(spec) => format!(
            "model=contiguous g={} amplitude={}",
            spec.name, spec.amplitude
        ),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let model = build_model(
        args.model,
        args.d,
        args.r_clu,
        args.p,
        args.sigma,
        args.amp,
        (args.q1, args.q2, args.sigma1, args.sigma2),
    )?;
    let window = Window::unit_cube(args.d)?;
    let mut rng = RngStream::new(args.seed, 0).rng();
    let cloud = model.sample(args.n, &window, &mut rng)?;
    let header = vec![
        model_header(&model),
        format!("n={} d={} seed={}", args.n, args.d, args.seed),
        format!("columns: {}", (1..=args.d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")),
    ];
    let text = format_points(&cloud, &header);
    match args.out {
        Some(path) => {
            std::fs::write(&path, text)?;
            eprintln!("wrote {} points to {}", args.n, path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_table(
    table: &ResultTable,
    out: &std::path::Path,
    json: Option<&PathBuf>,
) -> Result<(), Error> {
    table.write_csv(out)?;
    println!("wrote {} rows to {}", table.rows.len(), out.display());
    if let Some(path) = json {
        table.write_json(path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_crit(args: CritArgs) -> Result<(), Error> {
    // every finished cell is flushed, so an interrupted grid keeps its rows
    let table = critical_value_grid_with(
        args.variant.into(),
        args.d,
        &args.beta,
        &args.n,
        &args.k,
        args.reps,
        args.seed,
        args.level,
        |partial| partial.write_csv(&args.out),
    )?;
    write_table(&table, &args.out, args.json.as_ref())
}

fn cmd_power(args: PowerArgs) -> Result<(), Error> {
    let model = build_model(
        args.model,
        args.d,
        args.r_clu,
        args.p,
        args.sigma,
        args.amp,
        (None, None, None, None),
    )?;
    let crit = match &args.crit {
        Some(path) => ResultTable::read_csv(path)?,
        None => critical_value_grid(
            args.variant.into(),
            args.d,
            &args.beta,
            &args.n,
            &args.k,
            args.crit_reps,
            args.seed,
            0.95,
        )?,
    };
    let table = power_grid_with(
        &model,
        args.variant.into(),
        args.d,
        &args.beta,
        &args.n,
        &args.k,
        args.reps,
        args.seed,
        &crit,
        |partial| partial.write_csv(&args.out),
    )?;
    write_table(&table, &args.out, args.json.as_ref())
}

fn cmd_clt_check(args: CltArgs) -> Result<(), Error> {
    let radius = match args.regime {
        RegimeArg::Exact => RadiusRule::ExactRegime { k: args.k },
        RegimeArg::Asym => RadiusRule::AsymptoticRegime { k: args.k },
    };
    let config = TestConfig {
        beta: args.beta,
        radius,
        variant: Variant::Exact,
        dim: args.d,
    };
    let plan = MCPlan::h0(args.n, config, args.reps, args.seed)?;
    let report = clt_diagnostic(&plan)?;
    println!(
        "standardized edge sum vs N(0,1) over {} replications:",
        args.reps
    );
    println!("  KS distance:     {}", report.ks_distance);
    println!("  sample mean:     {}", report.sample_mean);
    println!("  sample variance: {}", report.sample_variance);

    if args.out.is_some() || args.json.is_some() {
        let mut table = ResultTable::new("clt-diagnostic", args.seed, args.reps, 0.95);
        for (metric, value) in [
            ("ks", report.ks_distance),
            ("mean", report.sample_mean),
            ("variance", report.sample_variance),
        ] {
            table.rows.push(Row {
                model: metric.to_string(),
                variant: "e".into(),
                beta: Some(args.beta),
                d: args.d,
                n: args.n,
                k: Some(args.k),
                value,
                se: None,
                reps: args.reps,
                seed: args.seed,
            });
        }
        if let Some(out) = &args.out {
            write_table(&table, out, args.json.as_ref())?;
        } else if let Some(json) = &args.json {
            table.write_json(json)?;
            println!("wrote {}", json.display());
        }
    }
    Ok(())
}

fn cmd_contig_check(args: ContigArgs) -> Result<(), Error> {
    let spec = ContiguousSpec::cos_first_coord(0.0)?;
    let config = grid_config(Variant::Exact, args.d, args.beta, args.k);
    let mut table = ResultTable::new("contiguity-diagnostic", args.seed, args.reps, 0.95);
    for &gamma in &args.gamma {
        let reports = contiguity_diagnostic(&args.n, &spec, gamma, &config, args.reps, args.seed)?;
        for rep in &reports {
            println!(
                "gamma = {gamma}, n = {}: amplitude {:.6}, mean {:.4} (limit {:.4} +- {:.4}), KS to limit {:.4}",
                rep.n, rep.amplitude, rep.mean_statistic, rep.predicted_mean, rep.se_mean, rep.ks_to_limit
            );
            for (metric, value, se) in [
                ("mean", rep.mean_statistic, Some(rep.se_mean)),
                ("predicted-mean", rep.predicted_mean, None),
                ("ks", rep.ks_to_limit, None),
                ("amplitude", rep.amplitude, None),
            ] {
                table.rows.push(Row {
                    model: metric.to_string(),
                    variant: "e".into(),
                    beta: Some(args.beta),
                    d: args.d,
                    n: rep.n,
                    k: Some(gamma),
                    value,
                    se,
                    reps: args.reps,
                    seed: args.seed,
                });
            }
        }
    }
    if let Some(out) = &args.out {
        write_table(&table, out, args.json.as_ref())?;
    } else if let Some(json) = &args.json {
        table.write_json(json)?;
        println!("wrote {}", json.display());
    }
    Ok(())
}

fn cmd_br_crit(args: BrCritArgs) -> Result<(), Error> {
    let table = br_critical_table(
        &args.n,
        &args.bandwidths,
        args.reps,
        args.seed,
        args.level,
    )?;
    if args.reps < 10_000 {
        eprintln!(
            "note: {} replications give wide quantile standard errors; see the se column",
            args.reps
        );
    }
    write_table(&table, &args.out, args.json.as_ref())
}

