use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use coassoc_core::basegen::{generate_pool, sample_ensemble, KMeansConfig, KMeansInit};
use coassoc_core::ca::{NeeLogBase, WeightingMethod};
use coassoc_core::consensus::Linkage;
use coassoc_core::dataset::{load_dataset, CsvOptions, LabelColumn};
use coassoc_core::dissimilarity::WalkForm;
use coassoc_core::harness::{
    comparison_tsv, emit_report, init_threads_from_env, load_labeled, obtain_pool, run_ablation, run_pipeline,
    run_sweep, ConsensusParams, Method, RunConfig, RunReport, Scale, SweepGrid,
};
use coassoc_core::metrics::{cluster_precision_profile, uniform_bin_edges, NmiNorm};
use coassoc_core::pool::EnsemblePool;
use coassoc_core::solver::{DUpdateSimilarity, SolverConfig};

#[derive(Parser)]
#[command(name = "coassoc", version, about = "Co-association ensemble clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method over repeated ensemble draws.
    Run(RunArgs),
    /// Generate or subsample base-clustering pools.
    #[command(subcommand)]
    Pool(PoolCommand),
    /// Run a parameter grid and write one aggregate row per grid point.
    Sweep(SweepArgs),
    /// Run the full method next to its ablated variants on shared draws.
    Ablate(AblateArgs),
    /// Cluster precision binned by cluster size.
    Profile(ProfileArgs),
}

#[derive(Subcommand)]
enum PoolCommand {
    /// Run k-means repeatedly on a dataset and save the pool.
    Gen(PoolGenArgs),
    /// Draw a subset of partitions from a saved pool.
    Sample(PoolSampleArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with one sample per row.
    #[arg(long)]
    dataset: PathBuf,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, value_enum, default_value_t = LabelColumn::Last)]
    label_column: LabelColumn,
}

impl DataArgs {
    fn csv(&self) -> CsvOptions {
        CsvOptions {
            has_header: self.header,
            label: self.label_column,
        }
    }
}

#[derive(Args, Clone)]
struct KMeansArgs {
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    /// Defaults to floor(sqrt(n)).
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 100)]
    kmeans_max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    kmeans_tol: f64,
    #[arg(long, value_enum, default_value_t = KMeansInit::RandomSample)]
    init: KMeansInit,
    /// Cluster raw features instead of per-feature z-scores.
    #[arg(long)]
    no_standardize: bool,
}

impl KMeansArgs {
    fn config(&self, seed: u64) -> KMeansConfig {
        KMeansConfig {
            k_min: self.k_min,
            k_max: self.k_max,
            max_iters: self.kmeans_max_iters,
            tol: self.kmeans_tol,
            init: self.init,
            standardize: !self.no_standardize,
            seed,
        }
    }
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Saved pool to draw ensembles from; generated from the data otherwise.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long = "reps", default_value_t = 20)]
    repetitions: usize,
    #[arg(long, default_value_t = 20)]
    ensemble_size: usize,
    #[arg(long, default_value_t = 100)]
    pool_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clusters in the consensus; defaults to the true class count.
    #[arg(long)]
    n_clusters: Option<usize>,
    #[arg(long, default_value_t = 0.08)]
    lambda: f64,
    #[arg(long, default_value_t = 0.8)]
    eta: f64,
    #[arg(long, default_value_t = 0.8)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 20)]
    k_steps: usize,
    #[arg(long, value_enum, default_value_t = WalkForm::TransposedPowerTimesStep)]
    walk_form: WalkForm,
    #[arg(long, value_enum, default_value_t = NeeLogBase::Two)]
    nee_log_base: NeeLogBase,
    #[arg(long, value_enum, default_value_t = WeightingMethod::Nee)]
    nwca_weighting: WeightingMethod,
    #[arg(long, value_enum, default_value_t = Linkage::Average)]
    linkage: Linkage,
    #[arg(long, value_enum, default_value_t = NmiNorm::Arithmetic)]
    nmi_norm: NmiNorm,
    #[arg(long, default_value_t = 1.1)]
    rho: f64,
    #[arg(long, default_value_t = 1e6)]
    gamma_max: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_init: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = DUpdateSimilarity::LatestIterate)]
    d_update_similarity: DUpdateSimilarity,
    /// Write one solver trace file per repetition.
    #[arg(long)]
    traces: bool,
    #[arg(long, value_enum, default_value_t = Scale::Desk)]
    scale: Scale,
    #[command(flatten)]
    kmeans: KMeansArgs,
}

impl CommonArgs {
    fn config(&self, method: Method) -> RunConfig {
        RunConfig {
            dataset: self.data.dataset.clone(),
            csv: self.data.csv(),
            pool: self.pool.clone(),
            method,
            params: ConsensusParams {
                lambda: self.lambda,
                eta: self.eta,
                theta: self.theta,
                tau: self.tau,
                beta: self.beta,
                k_steps: self.k_steps,
                walk_form: self.walk_form,
                nee_log_base: self.nee_log_base,
                nwca_weighting: self.nwca_weighting,
                linkage: self.linkage,
                solver: SolverConfig {
                    rho: self.rho,
                    gamma_max: self.gamma_max,
                    epsilon: self.epsilon,
                    max_iters: self.max_iters,
                    gamma_init: self.gamma_init,
                    use_s_manifold: true,
                    use_d_manifold: true,
                    d_update_similarity: self.d_update_similarity,
                },
            },
            kmeans: self.kmeans.config(0),
            repetitions: self.repetitions,
            ensemble_size: self.ensemble_size,
            pool_size: self.pool_size,
            n_clusters: self.n_clusters,
            nmi_norm: self.nmi_norm,
            seed: self.seed,
            out_dir: self.out.clone(),
            write_traces: self.traces,
            scale: self.scale,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Method::Sdgca)]
    method: Method,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct PoolGenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Master seed; `run --seed` with the same value regenerates this pool.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    kmeans: KMeansArgs,
}

#[derive(Args)]
struct PoolSampleArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GridKind {
    EtaTheta,
    Lambda,
    EnsembleSize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Method::Sdgca)]
    method: Method,
    #[arg(long, value_enum)]
    grid: GridKind,
    /// Comma-separated eta values for the eta-theta grid.
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95")]
    etas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95")]
    thetas: Vec<f64>,
    /// Comma-separated values for the lambda or ensemble-size grid.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AblateArgs {
    /// Variants to run next to the full method; all of them by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    variants: Vec<Method>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Saved pool; generated with the k-means flags otherwise.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pool_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    bin_width: usize,
    #[command(flatten)]
    kmeans: KMeansArgs,
}

fn summarize(report: &RunReport) {
    let a = report.aggregate;
    println!(
        "{}\t{}\tnmi {:.4} ± {:.4}\tari {:.4} ± {:.4}\tf {:.4} ± {:.4}",
        report.dataset,
        report.method().name(),
        a.nmi.mean,
        a.nmi.std,
        a.ari.mean,
        a.ari.std,
        a.f.mean,
        a.f.std
    );
}

fn emit(report: &RunReport) -> anyhow::Result<()> {
    if let Some(dir) = &report.config.out_dir {
        emit_report(report, dir)?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.common.config(args.method);
            let report = run_pipeline(&cfg)?;
            emit(&report)?;
            summarize(&report);
        }
        Command::Pool(PoolCommand::Gen(args)) => {
            let ds = load_dataset(&args.data.dataset, args.data.csv())?;
            let probe = RunConfig {
                seed: args.seed,
                ..Default::default()
            };
            let km = args.kmeans.config(probe.pool_seed());
            let pool = generate_pool(&ds.features, args.count, &km)?;
            pool.save(&args.out)?;
            println!("wrote {} partitions over {} samples to {}", pool.len(), pool.n_samples(), args.out.display());
        }
        Command::Pool(PoolCommand::Sample(args)) => {
            let pool = EnsemblePool::load(&args.pool)?;
            let sub = sample_ensemble(&pool, args.m, args.seed)?;
            sub.save(&args.out)?;
            println!("wrote {} partitions to {}", sub.len(), args.out.display());
        }
        Command::Sweep(args) => {
            let cfg = args.common.config(args.method);
            let parse_f64 = |v: &[String]| -> anyhow::Result<Vec<f64>> {
                v.iter().map(|s| s.parse().with_context(|| format!("bad value `{s}`"))).collect()
            };
            let grid = match args.grid {
                GridKind::EtaTheta => SweepGrid::EtaTheta {
                    etas: args.etas.clone(),
                    thetas: args.thetas.clone(),
                },
                GridKind::Lambda => SweepGrid::Lambda(if args.values.is_empty() {
                    vec![0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14]
                } else {
                    parse_f64(&args.values)?
                }),
                GridKind::EnsembleSize => SweepGrid::EnsembleSize(if args.values.is_empty() {
                    vec![10, 20, 30, 40]
                } else {
                    args.values
                        .iter()
                        .map(|s| s.parse().with_context(|| format!("bad value `{s}`")))
                        .collect::<anyhow::Result<_>>()?
                }),
            };
            let table = run_sweep(&cfg, &grid)?;
            let tsv = table.to_tsv();
            match &cfg.out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join(format!("sweep.{}.tsv", cfg.method.name())), &tsv)?;
                }
                None => print!("{tsv}"),
            }
        }
        Command::Ablate(args) => {
            let cfg = args.common.config(Method::Sdgca);
            let variants = if args.variants.is_empty() {
                Method::ABLATIONS.to_vec()
            } else {
                args.variants
            };
            let reports = run_ablation(&cfg, &variants)?;
            for r in &reports {
                emit(r)?;
            }
            let tsv = comparison_tsv(&reports);
            match &cfg.out_dir {
                Some(dir) => std::fs::write(dir.join("ablation.tsv"), &tsv)?,
                None => print!("{tsv}"),
            }
            for r in &reports {
                summarize(r);
            }
        }
        Command::Profile(args) => {
            let cfg = RunConfig {
                dataset: args.data.dataset.clone(),
                csv: args.data.csv(),
                pool: args.pool.clone(),
                pool_size: args.pool_size,
                seed: args.seed,
                kmeans: args.kmeans.config(0),
                ensemble_size: 1,
                ..Default::default()
            };
            let (ds, truth) = load_labeled(&cfg)?;
            let pool = obtain_pool(&cfg, &ds)?;
            let max = pool.global_cluster_sizes().into_iter().max().unwrap_or(0);
            if args.bin_width == 0 {
                bail!("bin width must be positive");
            }
            let bins = cluster_precision_profile(&pool, &truth, &uniform_bin_edges(args.bin_width, max))?;
            println!("lo\thi\tcount\tmean\tmedian");
            for b in bins {
                let show = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| x.to_string());
                println!("{}\t{}\t{}\t{}\t{}", b.lo, b.hi, b.count, show(b.mean), show(b.median));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    init_threads_from_env();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
