use clap::{Args, Parser, Subcommand};
use dpboot::config::{DataModel, Method, SimConfig};
use dpboot::curves::{emit_curve, CurveKind, CurveParams};
use dpboot::error::{HarnessError, Result};
use dpboot::ingest::read_csv;
use dpboot::methods::recovered_distribution;
use dpboot::run::{run_dataset, RunConfig};
use dpboot::simulate::simulate_coverage;
use dpboot_core::accountant::{boot_curve, compose_boot_profile, BudgetPlan, ComposeConfig};
use dpboot_core::baselines::{noisycov_ci, noisyvar_ci, BaselineConfig, NoiseMode};
use dpboot_core::diagnostics::{pld_delta_pair, renyi2_divergence, GaussianMixture1D};
use dpboot_core::inference::{percentile_ci, DeconvConfig};
use dpboot_core::mechanisms::{mix_seed, Dataset, DpBootstrapMeta, DpBootstrapOutput, StatisticId};
use dpboot_core::tradeoff::export::write_curve_csv;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "dpboot", version, about = "Private bootstrap accounting and inference")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a total GDP budget over B bootstrap releases.
    Accountant {
        #[arg(long)]
        mu: f64,
        #[arg(long = "B")]
        b: u64,
        /// Dataset size; omit for the large-n limit.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Numerically compose B bootstrap releases and print delta(eps).
    Compose {
        /// Per-release GDP parameter.
        #[arg(long)]
        mu_b: Option<f64>,
        /// Total budget; the per-release parameter is derived from it.
        #[arg(long, conflicts_with = "mu_b")]
        mu_total: Option<f64>,
        #[arg(long)]
        n: u64,
        #[arg(long = "B")]
        b: u64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,3")]
        eps: Vec<f64>,
    },
    /// Private intervals for a statistic of a CSV dataset.
    Run(RunArgs),
    /// Deconvolve noisy values (one CSV column) and write the density.
    Deconvolve {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        sigma2: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.9")]
        level: Vec<f64>,
        /// Density CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo coverage study.
    Simulate(SimArgs),
    /// NoisyVar or NoisyCov interval for a CSV dataset.
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "noisyvar")]
        method: Method,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 2000)]
        nsim: usize,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        /// budget_split or scaled_by_b.
        #[arg(long, default_value = "budget_split")]
        noise_mode: String,
        #[arg(long = "B", default_value_t = 1)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Tradeoff curves as `alpha,beta` CSV.
    Curves {
        #[arg(long)]
        kind: CurveKind,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long = "B", default_value_t = 500)]
        b: u64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
        a: Vec<f64>,
        /// Number of alpha intervals on [0, 1].
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Directory for multi-curve output; required when more than one curve.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the counterexample constants.
    Diag {
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Column names, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    /// Bounds per column as lo:hi, comma separated; default 0:1.
    #[arg(long, value_delimiter = ',')]
    bounds: Vec<String>,
    /// Reject out-of-bounds values instead of clamping.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// JSON file with run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    statistic: Option<StatisticId>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    level: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resample: Option<usize>,
    #[arg(long)]
    truth: Option<f64>,
}

#[derive(Args)]
struct SimArgs {
    /// Flat JSON config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    level: Vec<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long)]
    statistic: Option<StatisticId>,
    /// uniform01 or resample_csv.
    #[arg(long)]
    data_model: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long)]
    nsim: Option<usize>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_bounds(specs: &[String], cols: usize) -> Result<Vec<(f64, f64)>> {
    if specs.is_empty() {
        return Ok(vec![(0.0, 1.0); cols]);
    }
    if specs.len() != cols {
        return Err(HarnessError::Config(format!("{} bounds given for {cols} column(s)", specs.len())));
    }
    specs
        .iter()
        .map(|s| {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| HarnessError::Config(format!("bounds `{s}` must look like lo:hi")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| HarnessError::Config(format!("bad bound `{v}`")));
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}

fn load(data: &DataArgs) -> Result<(Dataset, usize)> {
    let table = read_csv(&data.csv, &data.columns)?;
    let bounds = parse_bounds(&data.bounds, table.columns.len())?;
    let policy = if data.strict { dpboot_core::mechanisms::BoundsPolicy::Reject } else { Default::default() };
    Ok((Dataset::new(table.columns, bounds, policy)?, table.dropped))
}

fn parse_noise_mode(s: &str) -> Result<NoiseMode> {
    serde_json::from_value(json!(s)).map_err(|_| HarnessError::Config(format!("unknown noise mode `{s}`")))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(HarnessError::Io { path: "stdout".into(), source: e })
        }
        _ => Ok(()),
    }
}

fn write_to(path: &Path, f: impl FnOnce(&mut std::fs::File) -> std::io::Result<()>) -> Result<()> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let mut file = std::fs::File::create(path).map_err(io)?;
    f(&mut file).map_err(io)
}

fn execute(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Accountant { mu, b, n } => {
            let plan = BudgetPlan::new(mu, b, n)?;
            let mut v = serde_json::to_value(&plan)?;
            if let Some(n) = n {
                let bc = boot_curve(plan.mu_per_sample, n)?;
                v["p0"] = json!(bc.p0());
                v["i_max"] = json!(bc.i_max());
                v["fixed_point"] = json!(bc.fixed_point());
            }
            print_json(&v)
        }
        Cmd::Compose { mu_b, mu_total, n, b, eps } => {
            let mu_b = match (mu_b, mu_total) {
                (Some(m), _) => m,
                (None, Some(t)) => dpboot_core::accountant::per_sample_mu(t, b)?,
                (None, None) => return Err(HarnessError::Config("give --mu-b or --mu-total".into())),
            };
            let prof = compose_boot_profile(mu_b, n, b, &ComposeConfig::default())?;
            let deltas: Vec<_> = eps.iter().map(|&e| json!({"eps": e, "delta": prof.delta(e)})).collect();
            print_json(&json!({
                "mu_b": mu_b, "n": n, "B": b,
                "grid_points": prof.grid_points,
                "self_check_gap": prof.self_check_gap,
                "deltas": deltas,
            }))
        }
        Cmd::Run(args) => {
            let mut cfg = match &args.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|source| HarnessError::Io { path: p.clone(), source })?;
                    serde_json::from_str(&text)?
                }
                None => RunConfig::default(),
            };
            if let Some(s) = args.statistic {
                cfg.statistic = s;
            }
            if let Some(m) = args.mu {
                cfg.mu = m;
            }
            if let Some(b) = args.b {
                cfg.b = b;
            }
            if !args.level.is_empty() {
                cfg.level = args.level;
            }
            if !args.methods.is_empty() {
                cfg.methods = args.methods;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            cfg.resample = args.resample.or(cfg.resample);
            cfg.truth = args.truth.or(cfg.truth);
            let (data, dropped) = load(&args.data)?;
            print_json(&run_dataset(&data, dropped, &cfg)?)
        }
        Cmd::Deconvolve { csv, column, sigma2, level, out } => {
            let table = read_csv(&csv, &[column])?;
            let y = table.columns.into_iter().next().unwrap_or_default();
            let b = y.len();
            let output = DpBootstrapOutput {
                estimates: y,
                sigma2,
                meta: DpBootstrapMeta { n: 0, b, mu: f64::NAN, statistic: StatisticId::Mean, seed: 0 },
            };
            let density = recovered_distribution(&output, &DeconvConfig::default())?;
            let cis = level.iter().map(|&l| percentile_ci(&density, l)).collect::<std::result::Result<Vec<_>, _>>()?;
            match out {
                Some(path) => {
                    write_to(&path, |f| density.write_csv(f))?;
                    print_json(&cis)
                }
                None => {
                    density.write_csv(std::io::stdout().lock()).map_err(|source| HarnessError::Io { path: "stdout".into(), source })?;
                    eprintln!("{}", serde_json::to_string(&cis)?);
                    Ok(())
                }
            }
        }
        Cmd::Simulate(args) => {
            let mut cfg = match &args.config {
                Some(p) => SimConfig::from_json_file(p)?,
                None => SimConfig::default(),
            };
            if let Some(v) = args.n {
                cfg.n = v;
            }
            if let Some(v) = args.b {
                cfg.b = v;
            }
            if !args.mu.is_empty() {
                cfg.mu = args.mu;
            }
            if !args.level.is_empty() {
                cfg.level = args.level;
            }
            if let Some(v) = args.replicates {
                cfg.replicates = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if !args.methods.is_empty() {
                cfg.methods = args.methods;
            }
            if let Some(v) = args.statistic {
                cfg.statistic = v;
            }
            if let Some(v) = args.data_model {
                cfg.data_model = serde_json::from_value::<DataModel>(json!(v))
                    .map_err(|_| HarnessError::Config(format!("unknown data model `{v}`")))?;
            }
            if args.csv.is_some() {
                cfg.csv = args.csv;
            }
            if !args.columns.is_empty() {
                cfg.columns = args.columns;
            }
            if let Some(v) = args.nsim {
                cfg.nsim = v;
            }
            let report = simulate_coverage(&cfg)?;
            match args.out {
                Some(path) => write_to(&path, |f| {
                    serde_json::to_writer_pretty(&mut *f, &report)?;
                    writeln!(f)
                }),
                None => print_json(&report),
            }
        }
        Cmd::Baseline { data, method, mu, nsim, level, noise_mode, b, seed } => {
            let (ds, _) = load(&data)?;
            let cfg = BaselineConfig { mu, nsim, level, noise_mode: parse_noise_mode(&noise_mode)?, b };
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, &[]));
            let ci = match method {
                Method::NoisyVar => noisyvar_ci(&ds, &cfg, &mut rng)?,
                Method::NoisyCov => noisycov_ci(&ds, &cfg, &mut rng)?,
                other => return Err(HarnessError::Config(format!("{other} is not a baseline method"))),
            };
            print_json(&ci)
        }
        Cmd::Curves { kind, mu, n, b, a, points, out_dir } => {
            let curves = emit_curve(kind, &CurveParams { mu, n, b, a, points })?;
            match (curves.len(), out_dir) {
                (1, None) => write_curve_csv(std::io::stdout().lock(), &curves[0].points)
                    .map_err(|source| HarnessError::Io { path: "stdout".into(), source }),
                (_, Some(dir)) => {
                    std::fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
                    for c in &curves {
                        let path = dir.join(format!("{}.csv", c.name));
                        write_to(&path, |f| write_curve_csv(f, &c.points))?;
                        eprintln!("wrote {}", path.display());
                    }
                    Ok(())
                }
                (_, None) => Err(HarnessError::Config(format!("{} curves produced; pass --out-dir", curves.len()))),
            }
        }
        Cmd::Diag { eps } => {
            let p = GaussianMixture1D::unit(&[(0.25, 0.0), (0.5, 1.0), (0.25, 2.0)])?;
            let q = GaussianMixture1D::unit(&[(1.0, 0.0)])?;
            let r = pld_delta_pair(eps)?;
            print_json(&json!({
                "renyi2": renyi2_divergence(&p, &q)?,
                "eps": eps,
                "t1": r.t1,
                "delta1": r.delta1,
                "t3": r.t3,
                "delta2": r.delta2,
            }))
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = dpboot::init_threads_from_env().and_then(|_| execute(cli.cmd)) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
