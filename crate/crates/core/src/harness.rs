//! Experiment protocol: repeated ensemble draws from a k-means pool, one
//! consensus per draw, scored against ground truth.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basegen::{generate_pool, sample_ensemble, KMeansConfig};
use crate::ca::{
    build_ca, build_weighted_ca, cluster_weights_with, extract_high_confidence, extract_similarity, laplacian,
    NeeLogBase, WeightingMethod,
};
use crate::consensus::{agglomerate, refine_adjacency, Linkage};
use crate::dataset::{load_dataset, CsvOptions, Dataset, LabelColumn};
use crate::dissimilarity::{dissimilarity_from_pool, WalkForm};
use crate::error::{Error, Result};
use crate::metrics::{score, NmiNorm, Scores};
use crate::pool::{EnsemblePool, Partition};
use crate::seed::{derive, STREAM_ENSEMBLE, STREAM_POOL};
use crate::solver::{solve, SolverConfig, SolverTrace};

/// Consensus methods, including the ablated variants of the full method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Average linkage on the plain CA matrix.
    Eac,
    /// Average linkage on the entropy-weighted CA matrix.
    Lwca,
    /// Average linkage on the NEE-weighted CA matrix.
    Nwca,
    /// Full similarity/dissimilarity guided method.
    Sdgca,
    /// Cluster the learned S* directly.
    OnlySStar,
    /// Same computation as `nwca`, named for ablation tables.
    NwcaOnly,
    NoSManifold,
    NoDManifold,
    NoBothManifold,
}

impl Method {
    pub const ABLATIONS: [Method; 5] = [
        Method::OnlySStar,
        Method::NwcaOnly,
        Method::NoSManifold,
        Method::NoDManifold,
        Method::NoBothManifold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Eac => "eac",
            Method::Lwca => "lwca",
            Method::Nwca => "nwca",
            Method::Sdgca => "sdgca",
            Method::OnlySStar => "only-s-star",
            Method::NwcaOnly => "nwca-only",
            Method::NoSManifold => "no-s-manifold",
            Method::NoDManifold => "no-d-manifold",
            Method::NoBothManifold => "no-both-manifold",
        }
    }

    fn uses_solver(self) -> bool {
        !matches!(self, Method::Eac | Method::Lwca | Method::Nwca | Method::NwcaOnly)
    }
}

/// Above this many samples a run needs [`Scale::Full`].
pub const DESK_SCALE_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Desk,
    Full,
}

/// Hyperparameters that shape one consensus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsensusParams {
    pub lambda: f64,
    pub eta: f64,
    pub theta: f64,
    pub tau: f64,
    pub beta: f64,
    pub k_steps: usize,
    pub walk_form: WalkForm,
    pub nee_log_base: NeeLogBase,
    /// Weighting behind the NWCA matrix. `uniform` turns it into plain CA.
    pub nwca_weighting: WeightingMethod,
    pub linkage: Linkage,
    pub solver: SolverConfig,
}

impl Default for ConsensusParams {
    fn default() -> Self {
        ConsensusParams {
            lambda: 0.08,
            eta: 0.8,
            theta: 0.8,
            tau: 0.0,
            beta: 1.0,
            k_steps: 20,
            walk_form: WalkForm::default(),
            nee_log_base: NeeLogBase::default(),
            nwca_weighting: WeightingMethod::Nee,
            linkage: Linkage::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub csv: CsvOptions,
    /// Load the pool from here instead of generating it.
    pub pool: Option<PathBuf>,
    pub method: Method,
    pub params: ConsensusParams,
    pub kmeans: KMeansConfig,
    pub repetitions: usize,
    pub ensemble_size: usize,
    pub pool_size: usize,
    /// Target cluster count; defaults to the number of true classes.
    pub n_clusters: Option<usize>,
    pub nmi_norm: NmiNorm,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub write_traces: bool,
    pub scale: Scale,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::new(),
            csv: CsvOptions {
                has_header: false,
                label: LabelColumn::Last,
            },
            pool: None,
            method: Method::Sdgca,
            params: ConsensusParams::default(),
            kmeans: KMeansConfig::default(),
            repetitions: 20,
            ensemble_size: 20,
            pool_size: 100,
            n_clusters: None,
            nmi_norm: NmiNorm::default(),
            seed: 0,
            out_dir: None,
            write_traces: false,
            scale: Scale::Desk,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (name, v) in [("eta", p.eta), ("theta", p.theta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(p.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", p.lambda)));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("at least one repetition is required".into()));
        }
        if self.ensemble_size == 0 || self.ensemble_size > self.pool_size {
            return Err(Error::Config(format!(
                "ensemble size {} must lie in [1, pool size {}]",
                self.ensemble_size, self.pool_size
            )));
        }
        p.solver.validate()
    }

    /// Seed for the k-means pool, independent of the ensemble draws.
    pub fn pool_seed(&self) -> u64 {
        derive(self.seed, STREAM_POOL, 0)
    }

    pub fn ensemble_seed(&self, rep: usize) -> u64 {
        derive(self.seed, STREAM_ENSEMBLE, rep as u64)
    }
}

/// Labels from one method on one ensemble, plus the solver trace if any.
#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub labels: Partition,
    pub trace: Option<SolverTrace>,
}

/// Runs `method` on `ensemble`, producing `k` clusters.
pub fn cluster_ensemble(
    ensemble: &EnsemblePool,
    k: usize,
    method: Method,
    params: &ConsensusParams,
) -> Result<MethodOutput> {
    let ca = build_ca(ensemble);
    let weighted = |wm: WeightingMethod| -> Result<_> {
        let w = cluster_weights_with(ensemble, wm, params.lambda, params.nee_log_base)?;
        build_weighted_ca(ensemble, &w)
    };
    let plain = |m: &crate::matrix::SymMatrix| -> Result<MethodOutput> {
        Ok(MethodOutput {
            labels: agglomerate(m, k, params.linkage)?.labels,
            trace: None,
        })
    };
    match method {
        Method::Eac => return plain(&ca),
        Method::Lwca => return plain(&weighted(WeightingMethod::Eci)?),
        Method::Nwca | Method::NwcaOnly => return plain(&weighted(params.nwca_weighting)?),
        _ => {}
    }
    debug_assert!(method.uses_solver());

    let w = weighted(params.nwca_weighting)?;
    let s = extract_similarity(&w, params.eta)?;
    let h = extract_high_confidence(&ca, params.theta)?;
    let l = laplacian(&h);
    let (d, _) = dissimilarity_from_pool(ensemble, &ca, params.beta, params.k_steps, params.tau, params.walk_form)?;
    let mut solver_cfg = params.solver.clone();
    match method {
        Method::NoSManifold => solver_cfg.use_s_manifold = false,
        Method::NoDManifold => solver_cfg.use_d_manifold = false,
        Method::NoBothManifold => {
            solver_cfg.use_s_manifold = false;
            solver_cfg.use_d_manifold = false;
        }
        _ => {}
    }
    let out = solve(&s, &d, &l, &solver_cfg)?;
    let labels = if method == Method::OnlySStar {
        agglomerate(&out.s_star, k, params.linkage)?.labels
    } else {
        let w_star = refine_adjacency(&w, &out.s_star, &out.d_star)?;
        agglomerate(&w_star, k, params.linkage)?.labels
    };
    Ok(MethodOutput {
        labels,
        trace: Some(out.trace),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRow {
    pub rep: usize,
    pub seed: u64,
    pub nmi: f64,
    pub ari: f64,
    pub f: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub gap_s: Option<f64>,
    pub gap_d: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub nmi: Stat,
    pub ari: Stat,
    pub f: Stat,
}

impl Aggregate {
    pub fn of(rows: &[RepRow]) -> Aggregate {
        let col = |g: fn(&RepRow) -> f64| rows.iter().map(g).collect::<Vec<_>>();
        Aggregate {
            nmi: Stat::of(&col(|r| r.nmi)),
            ari: Stat::of(&col(|r| r.ari)),
            f: Stat::of(&col(|r| r.f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub dataset: String,
    pub n_samples: usize,
    pub n_clusters: usize,
    pub rows: Vec<RepRow>,
    pub aggregate: Aggregate,
    #[serde(skip)]
    pub traces: Vec<Option<SolverTrace>>,
}

impl RunReport {
    pub fn method(&self) -> Method {
        self.config.method
    }
}

/// Loads the dataset named by `cfg`, insisting on ground-truth labels.
pub fn load_labeled(cfg: &RunConfig) -> Result<(Dataset, Partition)> {
    let ds = load_dataset(&cfg.dataset, cfg.csv)?;
    if cfg.scale == Scale::Desk && ds.n_samples() > DESK_SCALE_LIMIT {
        return Err(Error::Config(format!(
            "{} has {} samples; runs above {DESK_SCALE_LIMIT} need --scale full",
            ds.name,
            ds.n_samples()
        )));
    }
    let truth = ds
        .labels
        .clone()
        .ok_or_else(|| Error::Config(format!("{} carries no ground-truth labels", ds.name)))?;
    Ok((ds, truth))
}

/// The configured pool: loaded from disk when `cfg.pool` is set, otherwise
/// generated from the dataset's features.
pub fn obtain_pool(cfg: &RunConfig, ds: &Dataset) -> Result<EnsemblePool> {
    let pool = match &cfg.pool {
        Some(path) => EnsemblePool::load(path)?,
        None => {
            let km = KMeansConfig {
                seed: cfg.pool_seed(),
                ..cfg.kmeans.clone()
            };
            generate_pool(&ds.features, cfg.pool_size, &km)?
        }
    };
    if pool.n_samples() != ds.n_samples() {
        return Err(Error::Dimension(format!(
            "pool covers {} samples, dataset has {}",
            pool.n_samples(),
            ds.n_samples()
        )));
    }
    Ok(pool)
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let (ds, truth) = load_labeled(cfg)?;
    let pool = obtain_pool(cfg, &ds)?;
    run_on_pool(cfg, &ds.name, &pool, &truth)
}

/// The protocol on an existing pool: `repetitions` draws of `ensemble_size`
/// partitions, each clustered by `cfg.method`.
pub fn run_on_pool(cfg: &RunConfig, name: &str, pool: &EnsemblePool, truth: &Partition) -> Result<RunReport> {
    cfg.validate()?;
    if truth.len() != pool.n_samples() {
        return Err(Error::Dimension(format!(
            "{} true labels for {} samples",
            truth.len(),
            pool.n_samples()
        )));
    }
    if cfg.ensemble_size > pool.len() {
        return Err(Error::Config(format!(
            "ensemble size {} exceeds pool of {}",
            cfg.ensemble_size,
            pool.len()
        )));
    }
    let k = cfg.n_clusters.unwrap_or(truth.n_clusters());
    let outcomes = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let seed = cfg.ensemble_seed(rep);
            let run = || -> Result<(RepRow, Option<SolverTrace>)> {
                let ensemble = sample_ensemble(pool, cfg.ensemble_size, seed)?;
                let out = cluster_ensemble(&ensemble, k, cfg.method, &cfg.params)?;
                let Scores { nmi, ari, f } = score(&out.labels, truth, cfg.nmi_norm)?;
                let last = out.trace.as_ref().and_then(|t| t.last().copied());
                let row = RepRow {
                    rep,
                    seed,
                    nmi,
                    ari,
                    f,
                    iterations: out.trace.as_ref().map(SolverTrace::iterations),
                    converged: out.trace.as_ref().map(|t| t.converged),
                    gap_s: last.map(|r| r.gap_s),
                    gap_d: last.map(|r| r.gap_d),
                };
                Ok((row, out.trace))
            };
            run().map_err(|e| e.in_repetition(rep))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, traces): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let aggregate = Aggregate::of(&rows);
    Ok(RunReport {
        config: cfg.clone(),
        dataset: name.to_owned(),
        n_samples: pool.n_samples(),
        n_clusters: k,
        rows,
        aggregate,
        traces,
    })
}

/// Runs the full method and every variant in `variants` on the same pool and
/// the same ensemble draws.
pub fn run_ablation(cfg: &RunConfig, variants: &[Method]) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    let (ds, truth) = load_labeled(cfg)?;
    let pool = obtain_pool(cfg, &ds)?;
    let mut methods = vec![Method::Sdgca];
    methods.extend(variants.iter().copied().filter(|&m| m != Method::Sdgca));
    methods
        .into_iter()
        .map(|method| {
            let c = RunConfig {
                method,
                ..cfg.clone()
            };
            run_on_pool(&c, &ds.name, &pool, &truth)
        })
        .collect()
}

/// Parameter grid for [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepGrid {
    EtaTheta { etas: Vec<f64>, thetas: Vec<f64> },
    Lambda(Vec<f64>),
    EnsembleSize(Vec<usize>),
}

impl SweepGrid {
    fn columns(&self) -> &'static [&'static str] {
        match self {
            SweepGrid::EtaTheta { .. } => &["eta", "theta"],
            SweepGrid::Lambda(_) => &["lambda"],
            SweepGrid::EnsembleSize(_) => &["ensemble_size"],
        }
    }

    /// Each grid point as `(column values, config)`.
    fn points(&self, base: &RunConfig) -> Vec<(Vec<String>, RunConfig)> {
        match self {
            SweepGrid::EtaTheta { etas, thetas } => etas
                .iter()
                .flat_map(|&eta| {
                    thetas.iter().map(move |&theta| {
                        let mut c = base.clone();
                        c.params.eta = eta;
                        c.params.theta = theta;
                        (vec![eta.to_string(), theta.to_string()], c)
                    })
                })
                .collect(),
            SweepGrid::Lambda(ls) => ls
                .iter()
                .map(|&lambda| {
                    let mut c = base.clone();
                    c.params.lambda = lambda;
                    (vec![lambda.to_string()], c)
                })
                .collect(),
            SweepGrid::EnsembleSize(ms) => ms
                .iter()
                .map(|&m| {
                    let mut c = base.clone();
                    c.ensemble_size = m;
                    (vec![m.to_string()], c)
                })
                .collect(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            SweepGrid::EtaTheta { etas, thetas } => etas.is_empty() || thetas.is_empty(),
            SweepGrid::Lambda(v) => v.is_empty(),
            SweepGrid::EnsembleSize(v) => v.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub cells: Vec<(Vec<String>, Aggregate)>,
}

impl SweepTable {
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push_str("\tnmi_mean\tnmi_std\tari_mean\tari_std\tf_mean\tf_std\n");
        for (keys, a) in &self.cells {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                keys.join("\t"),
                a.nmi.mean,
                a.nmi.std,
                a.ari.mean,
                a.ari.std,
                a.f.mean,
                a.f.std
            );
        }
        out
    }
}

pub fn run_sweep(cfg: &RunConfig, grid: &SweepGrid) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let (ds, truth) = load_labeled(cfg)?;
    let pool = obtain_pool(cfg, &ds)?;
    let mut cells = Vec::new();
    for (keys, c) in grid.points(cfg) {
        let report = run_on_pool(&c, &ds.name, &pool, &truth)?;
        cells.push((keys, report.aggregate));
    }
    Ok(SweepTable {
        columns: grid.columns().iter().map(|s| s.to_string()).collect(),
        cells,
    })
}

fn metric_tsv(report: &RunReport, get: fn(&RepRow) -> f64, stat: Stat) -> String {
    let mut out = String::from("rep\tseed\tvalue\tstd\n");
    for r in &report.rows {
        let _ = writeln!(out, "{}\t{}\t{}\t-", r.rep, r.seed, get(r));
    }
    let _ = writeln!(out, "mean\t-\t{}\t{}", stat.mean, stat.std);
    out
}

/// Per-metric TSV bodies keyed by file name.
pub fn report_files(report: &RunReport) -> Result<Vec<(String, String)>> {
    let m = report.method().name();
    let a = report.aggregate;
    let mut jsonl = serde_json::to_string(&serde_json::json!({ "config": report.config, "dataset": report.dataset, "n_samples": report.n_samples, "n_clusters": report.n_clusters }))
        .map_err(|e| Error::Format(e.to_string()))?;
    jsonl.push('\n');
    for r in &report.rows {
        jsonl.push_str(&serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?);
        jsonl.push('\n');
    }
    jsonl.push_str(
        &serde_json::to_string(&serde_json::json!({ "aggregate": a })).map_err(|e| Error::Format(e.to_string()))?,
    );
    jsonl.push('\n');
    Ok(vec![
        (format!("{m}.nmi.tsv"), metric_tsv(report, |r| r.nmi, a.nmi)),
        (format!("{m}.ari.tsv"), metric_tsv(report, |r| r.ari, a.ari)),
        (format!("{m}.f.tsv"), metric_tsv(report, |r| r.f, a.f)),
        (format!("{m}.rows.jsonl"), jsonl),
    ])
}

/// Writes the report into `dir`, creating it if needed. Returns the paths
/// written.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, body) in report_files(report)? {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if report.config.write_traces {
        let m = report.method().name();
        for (rep, trace) in report.traces.iter().enumerate() {
            if let Some(t) = trace {
                let path = dir.join(format!("{m}.trace.{rep}.tsv"));
                t.write_tsv(&path)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Summary of several reports side by side, one method per row.
pub fn comparison_tsv(reports: &[RunReport]) -> String {
    let mut out = String::from("method\tnmi_mean\tnmi_std\tari_mean\tari_std\tf_mean\tf_std\n");
    for r in reports {
        let a = r.aggregate;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.method().name(),
            a.nmi.mean,
            a.nmi.std,
            a.ari.mean,
            a.ari.std,
            a.f.mean,
            a.f.std
        );
    }
    out
}

/// Sizes rayon's global pool from `COASSOC_THREADS` when set. Safe to call
/// more than once; later calls are ignored.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("COASSOC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basegen::kmeans;
    use nalgebra::DMatrix;

    fn toy() -> (EnsemblePool, Partition) {
        let n = 40;
        let truth: Vec<usize> = (0..n).map(|i| i / 10).collect();
        let x = DMatrix::from_fn(n, 2, |i, c| {
            let g = (i / 10) as f64;
            g * 8.0 * (c as f64 + 1.0) + ((i * 7 + c * 3) % 5) as f64 * 0.3
        });
        let cfg = KMeansConfig::default();
        let parts = (0..30)
            .map(|s| kmeans(&x, 2 + s % 5, s as u64, &cfg).unwrap())
            .collect();
        (EnsemblePool::new(parts, 0).unwrap(), Partition::from_labels(&truth))
    }

    fn cfg(method: Method) -> RunConfig {
        RunConfig {
            method,
            repetitions: 3,
            ensemble_size: 10,
            pool_size: 30,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn every_method_runs() {
        let (pool, truth) = toy();
        for m in [Method::Eac, Method::Lwca, Method::Nwca, Method::Sdgca]
            .into_iter()
            .chain(Method::ABLATIONS)
        {
            let r = run_on_pool(&cfg(m), "toy", &pool, &truth).unwrap();
            assert_eq!(r.rows.len(), 3);
            assert_eq!(r.rows[0].iterations.is_some(), m.uses_solver());
            for row in &r.rows {
                assert!((0.0..=1.0).contains(&row.nmi));
            }
        }
    }

    #[test]
    fn uniform_nwca_matches_eac() {
        let (pool, truth) = toy();
        let eac = run_on_pool(&cfg(Method::Eac), "toy", &pool, &truth).unwrap();
        let mut c = cfg(Method::Nwca);
        c.params.nwca_weighting = WeightingMethod::Uniform;
        let nwca = run_on_pool(&c, "toy", &pool, &truth).unwrap();
        assert_eq!(eac.rows, nwca.rows);
    }

    #[test]
    fn report_layout() {
        let (pool, truth) = toy();
        let r = run_on_pool(&cfg(Method::Eac), "toy", &pool, &truth).unwrap();
        let files = report_files(&r).unwrap();
        let nmi = &files[0].1;
        assert_eq!(nmi.lines().count(), 1 + 3 + 1);
        assert!(nmi.lines().last().unwrap().starts_with("mean\t-\t"));
        assert_eq!(files[3].1.lines().count(), 1 + 3 + 1);
    }

    #[test]
    fn stat_sample_std() {
        let s = Stat::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(Stat::of(&[4.0]).std, 0.0);
    }

    #[test]
    fn validation() {
        let mut c = cfg(Method::Eac);
        c.params.eta = 1.0;
        assert!(c.validate().is_err());
        let mut c = cfg(Method::Eac);
        c.repetitions = 0;
        assert!(c.validate().is_err());
        let mut c = cfg(Method::Eac);
        c.ensemble_size = 31;
        assert!(c.validate().is_err());
    }
}
