//! Batch orchestration: configured runs over repeated train/test splits,
//! result persistence with a hashed manifest, and cross-repetition
//! aggregation into summary tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::{self, BaselineError};
use crate::coxcore;
use crate::data::{self, DataError, SplitSpec, SurvivalDataset};
use crate::evolve::{self, EvolutionConfig, EvolveError};
use crate::metrics::{self, EvalSplit, FrontPoint, HvConfig, ParetoFront};
use crate::multimodel::{ModelError, ModelRecord};
use crate::seed;
use crate::synth;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} repetitions failed (>10%)")]
    TooManyFailures { failed: usize, total: usize },
    #[error("result files come from different datasets (hashes {0} and {1})")]
    MixedSchema(String, String),
    #[error("no result files found in {0}")]
    NoResults(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sr,
    Cx,
    St,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sr => "sr",
            Method::Cx => "cx",
            Method::St => "st",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "sr" => Some(Method::Sr),
            "cx" => Some(Method::Cx),
            "st" => Some(Method::St),
            _ => None,
        }
    }
}

fn default_time_column() -> String {
    "time".into()
}
fn default_event_column() -> String {
    "event".into()
}
fn default_true() -> bool {
    true
}
fn default_repetitions() -> u64 {
    50
}
fn default_train_fraction() -> f64 {
    0.7
}
fn default_l1_ratio() -> f64 {
    0.5
}
fn default_n_lambdas() -> usize {
    1000
}
fn default_max_depth() -> usize {
    25
}
fn default_folds() -> usize {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CxParams {
    #[serde(default = "default_l1_ratio")]
    pub l1_ratio: f64,
    #[serde(default = "default_n_lambdas")]
    pub n_lambdas: usize,
}

impl Default for CxParams {
    fn default() -> Self {
        Self {
            l1_ratio: 0.5,
            n_lambdas: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StParams {
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

impl Default for StParams {
    fn default() -> Self {
        Self {
            max_depth: 25,
            folds: 5,
        }
    }
}

/// One batch run: dataset, method, repetition protocol, output location.
/// Serializable to TOML; a persisted config reproduces the run exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub schema: PathBuf,
    #[serde(default = "default_time_column")]
    pub time_column: String,
    #[serde(default = "default_event_column")]
    pub event_column: String,
    #[serde(default = "default_true")]
    pub normalize: bool,
    pub method: Method,
    #[serde(default = "default_repetitions")]
    pub repetitions: u64,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub cx: CxParams,
    #[serde(default)]
    pub st: StParams,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunnerError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| RunnerError::Config(e.to_string()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub dataset_hash: String,
    pub d: usize,
    pub n: usize,
    pub version: String,
    pub wall_time_secs: f64,
    /// file name -> sha256 of contents
    pub files: BTreeMap<String, String>,
    pub failed_repetitions: Vec<u64>,
}

pub struct RunSummary {
    pub n_success: usize,
    pub n_failed: usize,
    pub manifest_path: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_file(path: &Path) -> std::io::Result<String> {
    let data = std::fs::read(path)?;
    Ok(hex(&Sha256::digest(&data)))
}

/// A front point as persisted to CSV.
#[derive(Debug, Clone)]
pub struct CsvPoint {
    pub method: String,
    pub repetition: u64,
    pub split: String,
    pub dims: usize,
    pub ci: f64,
    pub n_exprs: usize,
}

fn write_front_csv(
    path: &Path,
    method: Method,
    repetition: u64,
    split: &str,
    points: &[(usize, f64, usize)],
) -> std::io::Result<()> {
    let mut out = String::from("method,repetition,split,dims,ci,n_exprs\n");
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for (dims, ci, n_exprs) in sorted {
        out.push_str(&format!(
            "{},{repetition},{split},{dims},{ci:.12e},{n_exprs}\n",
            method.name()
        ));
    }
    std::fs::write(path, out)
}

/// Median survival curve over the evaluation subjects on a time grid.
fn median_survival_curve(grid: &[f64], survival_per_subject: &[Vec<f64>]) -> Vec<(f64, f64)> {
    grid.iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut vals: Vec<f64> = survival_per_subject.iter().map(|s| s[k]).collect();
            vals.sort_by(f64::total_cmp);
            let s = if vals.is_empty() {
                1.0
            } else {
                vals[(vals.len() - 1) / 2]
            };
            (t, s)
        })
        .collect()
}

fn cox_style_curve(
    train: &SurvivalDataset,
    eta_train: &Array1<f64>,
    eta_eval: &Array1<f64>,
) -> Vec<(f64, f64)> {
    let h0 = coxcore::breslow_baseline(eta_train, &train.times, &train.events);
    let grid = h0.breakpoints.clone();
    let per_subject: Vec<Vec<f64>> = eta_eval
        .iter()
        .map(|&e| {
            grid.iter()
                .map(|&t| (-(h0.eval(t)) * e.exp()).exp())
                .collect()
        })
        .collect();
    median_survival_curve(&grid, &per_subject)
}

fn write_curve_csv(path: &Path, curve: &[(f64, f64)]) -> std::io::Result<()> {
    let mut out = String::from("t,s_median\n");
    for (t, s) in curve {
        out.push_str(&format!("{t:.12e},{s:.12e}\n"));
    }
    std::fs::write(path, out)
}

struct RepOutput {
    files: Vec<PathBuf>,
}

fn run_repetition(
    config: &RunConfig,
    full: &SurvivalDataset,
    rep: u64,
) -> Result<RepOutput, RunnerError> {
    let split_spec = SplitSpec {
        seed: config.seed,
        train_fraction: config.train_fraction,
        repetition_index: rep,
    };
    let (train_raw, test_raw) = data::split(full, &split_spec)?;
    let (train, test) = if config.normalize {
        let (train_n, stats) = data::zscore_normalize(&train_raw, None)?;
        let (test_n, _) = data::zscore_normalize(&test_raw, Some(&stats))?;
        (train_n, test_n)
    } else {
        (train_raw, test_raw)
    };
    let rep_seed = seed::repetition_seed(config.seed, rep);
    let out = &config.output_dir;
    let tag = format!("{}_rep{rep:03}", config.method.name());
    let front_train_path = out.join(format!("front_{tag}_train.csv"));
    let front_test_path = out.join(format!("front_{tag}_test.csv"));
    let models_path = out.join(format!("models_{tag}.json"));
    let curve_path = out.join(format!("survcurve_{tag}.csv"));

    match config.method {
        Method::Sr => {
            let mut evo = config.evolution.clone();
            evo.seed = seed::component_seed(rep_seed, 1);
            let result = evolve::evolve(&train, &evo)?;
            let archive = &result.archive;
            let train_pts: Vec<(usize, f64, usize)> = archive
                .points
                .iter()
                .map(|p| (p.dims, p.ci, p.model.n_trees()))
                .collect();
            let test_front = evolve::reevaluate_front(archive, &test, &train, EvalSplit::Test)?;
            let test_pts: Vec<(usize, f64, usize)> = test_front
                .points
                .iter()
                .map(|p| (p.dims, p.ci, p.model.n_trees()))
                .collect();
            write_front_csv(&front_train_path, Method::Sr, rep, "train", &train_pts)?;
            write_front_csv(&front_test_path, Method::Sr, rep, "test", &test_pts)?;
            let records: Vec<ModelRecord> = archive
                .points
                .iter()
                .map(|p| ModelRecord::from_model(&p.model))
                .collect();
            std::fs::write(&models_path, serde_json::to_string_pretty(&records).unwrap())?;
            if let Some(best) = test_front.select_max() {
                let eta_train = best.model.risk_score(&train.features)?;
                let eta_test = best.model.risk_score(&test.features)?;
                write_curve_csv(&curve_path, &cox_style_curve(&train, &eta_train, &eta_test))?;
            }
        }
        Method::Cx => {
            let bf = baselines::cx_pareto_front(
                &train,
                &test,
                EvalSplit::Test,
                config.cx.l1_ratio,
                config.cx.n_lambdas,
            )?;
            let test_pts: Vec<(usize, f64, usize)> =
                bf.raw.points.iter().map(|p| (p.dims, p.ci, 0)).collect();
            // re-evaluate the same models on the training split
            let train_pts: Vec<(usize, f64, usize)> = bf
                .raw
                .points
                .iter()
                .map(|p| {
                    let eta = p.model.risk_score(&train.features);
                    let c = coxcore::concordance_ipcw(
                        &train.times,
                        &train.events,
                        &train.times,
                        &train.events,
                        eta.as_slice().unwrap(),
                        None,
                    );
                    (p.dims, c.value, 0)
                })
                .collect();
            write_front_csv(&front_train_path, Method::Cx, rep, "train", &train_pts)?;
            write_front_csv(&front_test_path, Method::Cx, rep, "test", &test_pts)?;
            let records: Vec<&baselines::CxModel> =
                bf.raw.points.iter().map(|p| &p.model).collect();
            std::fs::write(&models_path, serde_json::to_string_pretty(&records).unwrap())?;
            if let Some(best) = bf.front.select_max() {
                let eta_train = best.model.risk_score(&train.features);
                let eta_test = best.model.risk_score(&test.features);
                write_curve_csv(&curve_path, &cox_style_curve(&train, &eta_train, &eta_test))?;
            }
        }
        Method::St => {
            let bf = baselines::st_pareto_front(
                &train,
                &test,
                EvalSplit::Test,
                1..=config.st.max_depth,
                config.st.folds,
                seed::component_seed(rep_seed, 2),
            )?;
            let t_star = train
                .times
                .iter()
                .zip(&train.events)
                .filter(|(_, &e)| e)
                .map(|(&t, _)| t)
                .fold(f64::NEG_INFINITY, f64::max);
            let test_pts: Vec<(usize, f64, usize)> =
                bf.raw.points.iter().map(|p| (p.dims, p.ci, 0)).collect();
            let train_pts: Vec<(usize, f64, usize)> = bf
                .raw
                .points
                .iter()
                .map(|p| {
                    let eta = p.model.risk_scores(&train.features, t_star);
                    let c = coxcore::concordance_ipcw(
                        &train.times,
                        &train.events,
                        &train.times,
                        &train.events,
                        eta.as_slice().unwrap(),
                        None,
                    );
                    (p.dims, c.value, 0)
                })
                .collect();
            write_front_csv(&front_train_path, Method::St, rep, "train", &train_pts)?;
            write_front_csv(&front_test_path, Method::St, rep, "test", &test_pts)?;
            let records: Vec<&baselines::STNode> =
                bf.raw.points.iter().map(|p| &p.model).collect();
            std::fs::write(&models_path, serde_json::to_string_pretty(&records).unwrap())?;
            if let Some(best) = bf.front.select_max() {
                // leaf hazards give survival directly
                let mut grid: Vec<f64> = train
                    .times
                    .iter()
                    .zip(&train.events)
                    .filter(|(_, &e)| e)
                    .map(|(&t, _)| t)
                    .collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                let per_subject: Vec<Vec<f64>> = test
                    .features
                    .rows()
                    .into_iter()
                    .map(|row| {
                        let x = row.to_owned().insert_axis(ndarray::Axis(0));
                        grid.iter()
                            .map(|&t| (-best.model.risk_scores(&x, t)[0]).exp())
                            .collect()
                    })
                    .collect();
                write_curve_csv(&curve_path, &median_survival_curve(&grid, &per_subject))?;
            }
        }
    }
    let mut files = vec![front_train_path, front_test_path, models_path];
    if curve_path.exists() {
        files.push(curve_path);
    }
    Ok(RepOutput { files })
}

/// Run the configured batch. Per-repetition failures are logged and
/// skipped; more than 10% failures is an error. Returns after writing the
/// manifest.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary, RunnerError> {
    let start = std::time::Instant::now();
    let schema = data::Schema::from_toml_file(&config.schema)?;
    let full = data::load_csv(
        &config.dataset,
        &config.time_column,
        &config.event_column,
        &schema,
    )?;
    std::fs::create_dir_all(&config.output_dir)?;
    use rayon::prelude::*;
    let reps: Vec<u64> = (0..config.repetitions).collect();
    let results: Vec<(u64, Result<RepOutput, RunnerError>)> = reps
        .par_iter()
        .map(|&rep| (rep, run_repetition(config, &full, rep)))
        .collect();
    let mut files = Vec::new();
    let mut failed = Vec::new();
    for (rep, res) in results {
        match res {
            Ok(out) => files.extend(out.files),
            Err(e) => {
                log::warn!("repetition {rep} failed: {e}");
                failed.push(rep);
            }
        }
    }
    let mut hashed = BTreeMap::new();
    for f in &files {
        hashed.insert(
            f.file_name().unwrap().to_string_lossy().into_owned(),
            sha256_file(f)?,
        );
    }
    let manifest = Manifest {
        config: config.clone(),
        dataset_hash: format!("{:016x}", full.content_hash()),
        d: full.d(),
        n: full.n(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        files: hashed,
        failed_repetitions: failed.clone(),
    };
    let manifest_path = config
        .output_dir
        .join(format!("manifest_{}.json", config.method.name()));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap())?;
    let total = config.repetitions as usize;
    if failed.len() * 10 > total {
        return Err(RunnerError::TooManyFailures {
            failed: failed.len(),
            total,
        });
    }
    Ok(RunSummary {
        n_success: total - failed.len(),
        n_failed: failed.len(),
        manifest_path,
    })
}

/// `k` column of the aggregate tables: a cap on dims, or the uncapped front.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSpec {
    UpTo(usize),
    Max,
}

impl KSpec {
    pub fn label(&self) -> String {
        match self {
            KSpec::UpTo(k) => k.to_string(),
            KSpec::Max => "max".into(),
        }
    }

    pub fn parse(s: &str) -> Option<KSpec> {
        if s == "max" {
            Some(KSpec::Max)
        } else {
            s.parse().ok().map(KSpec::UpTo)
        }
    }
}

pub const DEFAULT_KS: [KSpec; 4] = [KSpec::UpTo(3), KSpec::UpTo(5), KSpec::UpTo(7), KSpec::Max];

#[derive(Debug, Clone)]
pub struct TableRow {
    pub method: String,
    pub k: String,
    pub metric: String,
    /// None renders as "(-)": no repetition produced a model at that k.
    pub median: Option<f64>,
    pub q1: f64,
    pub q3: f64,
    pub n_reps: usize,
}

pub struct AggregateTables {
    pub hv_rows: Vec<TableRow>,
    pub ci_rows: Vec<TableRow>,
    /// per-method median Pearson correlation between expression count and
    /// dims over archive models (SR only; empty otherwise)
    pub pearson_rows: Vec<(String, f64)>,
    pub out_dir: PathBuf,
}

fn read_front_csvs(dir: &Path) -> Result<Vec<CsvPoint>, RunnerError> {
    let mut points = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if !name.starts_with("front_") || !name.ends_with(".csv") {
            continue;
        }
        let mut reader = csv::Reader::from_path(&path).map_err(|e| {
            RunnerError::Config(format!("cannot parse {}: {e}", path.display()))
        })?;
        for record in reader.records() {
            let r = record.map_err(|e| RunnerError::Config(e.to_string()))?;
            points.push(CsvPoint {
                method: r[0].to_string(),
                repetition: r[1].parse().map_err(|_| {
                    RunnerError::Config(format!("bad repetition in {name}"))
                })?,
                split: r[2].to_string(),
                dims: r[3].parse().map_err(|_| {
                    RunnerError::Config(format!("bad dims in {name}"))
                })?,
                ci: r[4].parse().map_err(|_| {
                    RunnerError::Config(format!("bad ci in {name}"))
                })?,
                n_exprs: r[5].parse().unwrap_or(0),
            });
        }
    }
    Ok(points)
}

fn summary_row(
    method: &str,
    k: &str,
    metric: &str,
    values: &[f64],
) -> TableRow {
    if values.is_empty() {
        TableRow {
            method: method.into(),
            k: k.into(),
            metric: metric.into(),
            median: None,
            q1: f64::NAN,
            q3: f64::NAN,
            n_reps: 0,
        }
    } else {
        let s = metrics::aggregate_repetitions(values);
        TableRow {
            method: method.into(),
            k: k.into(),
            metric: metric.into(),
            median: Some(s.median),
            q1: s.q1,
            q3: s.q3,
            n_reps: s.n,
        }
    }
}

fn rows_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("method,k,metric,median,q1,q3,n_reps\n");
    for r in rows {
        let median = r
            .median
            .map(|m| format!("{m:.6}"))
            .unwrap_or_else(|| "(-)".into());
        let (q1, q3) = if r.median.is_some() {
            (format!("{:.6}", r.q1), format!("{:.6}", r.q3))
        } else {
            ("(-)".into(), "(-)".into())
        };
        out.push_str(&format!(
            "{},{},{},{median},{q1},{q3},{}\n",
            r.method, r.k, r.metric, r.n_reps
        ));
    }
    out
}

/// Aggregate all runs found in `results_dir` into summary tables under
/// `results_dir/aggregate/`.
pub fn cmd_aggregate(results_dir: &Path, ks: &[KSpec]) -> Result<AggregateTables, RunnerError> {
    // manifests: schema agreement check + d for the HV normalizer
    let mut dataset_hash: Option<String> = None;
    let mut d: Option<usize> = None;
    for entry in std::fs::read_dir(results_dir)? {
        let path = entry?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("manifest_") && name.ends_with(".json") {
            let manifest: Manifest =
                serde_json::from_str(&std::fs::read_to_string(&path)?)
                    .map_err(|e| RunnerError::Config(format!("{name}: {e}")))?;
            match &dataset_hash {
                None => {
                    dataset_hash = Some(manifest.dataset_hash.clone());
                    d = Some(manifest.d);
                }
                Some(h) if *h != manifest.dataset_hash => {
                    return Err(RunnerError::MixedSchema(
                        h.clone(),
                        manifest.dataset_hash,
                    ));
                }
                _ => {}
            }
        }
    }
    let d = d.ok_or_else(|| RunnerError::NoResults(results_dir.to_path_buf()))?;
    let points = read_front_csvs(results_dir)?;
    if points.is_empty() {
        return Err(RunnerError::NoResults(results_dir.to_path_buf()));
    }
    let hv_config = HvConfig::for_dataset(d);

    // (method, rep) -> test-front points
    let mut by_run: BTreeMap<(String, u64), Vec<&CsvPoint>> = BTreeMap::new();
    for p in points.iter().filter(|p| p.split == "test") {
        by_run
            .entry((p.method.clone(), p.repetition))
            .or_default()
            .push(p);
    }
    let methods: Vec<String> = {
        let mut m: Vec<String> = by_run.keys().map(|(m, _)| m.clone()).collect();
        m.dedup();
        m
    };

    let front_of = |pts: &[&CsvPoint]| -> ParetoFront<()> {
        ParetoFront::new(
            pts.iter()
                .map(|p| FrontPoint {
                    dims: p.dims,
                    ci: p.ci,
                    model: (),
                })
                .collect(),
            EvalSplit::Test,
        )
    };

    let mut hv_rows = Vec::new();
    let mut ci_rows = Vec::new();
    let mut pearson_rows = Vec::new();
    for method in &methods {
        let runs: Vec<(&u64, &Vec<&CsvPoint>)> = by_run
            .iter()
            .filter(|((m, _), _)| m == method)
            .map(|((_, r), v)| (r, v))
            .collect();
        for k in ks {
            let mut hvs = Vec::new();
            let mut cis = Vec::new();
            for (_, pts) in &runs {
                let front = front_of(pts).filter_nondominated();
                let capped = match k {
                    KSpec::UpTo(k) => front.filter_up_to_k(*k),
                    KSpec::Max => front.clone(),
                };
                hvs.push(metrics::hypervolume2d(&capped, &hv_config));
                let selected = match k {
                    KSpec::UpTo(k) => front_of(pts).select_exactly_k(*k).map(|p| p.ci),
                    KSpec::Max => front.select_max().map(|p| p.ci),
                };
                if let Some(ci) = selected {
                    cis.push(ci);
                }
            }
            hv_rows.push(summary_row(method, &k.label(), "hv", &hvs));
            ci_rows.push(summary_row(method, &k.label(), "ci", &cis));
        }
        if method == "sr" {
            let mut per_rep = Vec::new();
            for (_, pts) in &runs {
                let xs: Vec<f64> = pts.iter().map(|p| p.n_exprs as f64).collect();
                let ys: Vec<f64> = pts.iter().map(|p| p.dims as f64).collect();
                if xs.len() >= 2 {
                    per_rep.push(metrics::pearson(&xs, &ys));
                }
            }
            if !per_rep.is_empty() {
                pearson_rows.push((
                    method.clone(),
                    metrics::aggregate_repetitions(&per_rep).median,
                ));
            }
        }
    }

    let out_dir = results_dir.join("aggregate");
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("hv_table.csv"), rows_to_csv(&hv_rows))?;
    std::fs::write(out_dir.join("ci_table.csv"), rows_to_csv(&ci_rows))?;
    {
        let mut out = String::from("method,pearson_exprcount_dims_median\n");
        for (m, p) in &pearson_rows {
            out.push_str(&format!("{m},{p:.6}\n"));
        }
        std::fs::write(out_dir.join("exprcount_pearson.csv"), out)?;
    }
    // Fig-2-style dump of every test front point
    {
        let mut out = String::from("method,repetition,dims,neg_ci\n");
        for p in points.iter().filter(|p| p.split == "test") {
            out.push_str(&format!(
                "{},{},{},{:.12e}\n",
                p.method,
                p.repetition,
                p.dims,
                1.0 - p.ci
            ));
        }
        std::fs::write(out_dir.join("fronts_dump.csv"), out)?;
    }
    // concatenated survival curves
    {
        let mut out = String::from("method,repetition,t,s_median\n");
        for entry in std::fs::read_dir(results_dir)? {
            let path = entry?.path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if !name.starts_with("survcurve_") || !name.ends_with(".csv") {
                continue;
            }
            // survcurve_{method}_rep{NNN}.csv
            let stem = name.trim_start_matches("survcurve_").trim_end_matches(".csv");
            let (method, rep) = match stem.rsplit_once("_rep") {
                Some((m, r)) => (m.to_string(), r.parse::<u64>().unwrap_or(0)),
                None => continue,
            };
            for line in std::fs::read_to_string(&path)?.lines().skip(1) {
                out.push_str(&format!("{method},{rep},{line}\n"));
            }
        }
        std::fs::write(out_dir.join("survcurves.csv"), out)?;
    }
    Ok(AggregateTables {
        hv_rows,
        ci_rows,
        pearson_rows,
        out_dir,
    })
}

/// Generate a synthetic dataset and write CSV + truth sidecar + schema.
pub fn cmd_synth(spec: &synth::SynthSpec, out_csv: &Path) -> Result<(), RunnerError> {
    let data = synth::generate(spec);
    synth::write_files(&data, out_csv)?;
    log::info!(
        "wrote {} ({} rows, realized censoring {:.3})",
        out_csv.display(),
        data.dataset.n(),
        data.realized_censoring
    );
    Ok(())
}
