//! Synthetic survival-data generator with known ground-truth risk scores.
//!
//! Features are i.i.d. standard normal; event times are exponential with
//! hazard h0 * exp(score); censoring times are independent exponentials
//! whose rate is calibrated by bisection so the realized censoring fraction
//! lands within 0.05 of the requested rate.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, SurvivalDataset};

pub const BASELINE_HAZARD: f64 = 0.1;
pub const CENSORING_TOLERANCE: f64 = 0.05;

/// Built-in generative risk functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// score = 2 * x0
    Linear,
    /// score = x0^2 - x1
    Quadratic,
    /// score = 1.5 * ln(|x0 * x1| + 1)
    LogInteraction,
}

impl Generator {
    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            Generator::Linear => 2.0 * row[0],
            Generator::Quadratic => row[0] * row[0] - row[1],
            Generator::LogInteraction => 1.5 * ((row[0] * row[1]).abs() + 1.0).ln(),
        }
    }

    /// Minimum feature count the generator needs.
    pub fn min_d(&self) -> usize {
        match self {
            Generator::Linear => 1,
            Generator::Quadratic | Generator::LogInteraction => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Linear => "linear",
            Generator::Quadratic => "quadratic",
            Generator::LogInteraction => "log-interaction",
        }
    }

    pub fn parse(s: &str) -> Option<Generator> {
        match s {
            "linear" => Some(Generator::Linear),
            "quadratic" => Some(Generator::Quadratic),
            "log-interaction" | "log_interaction" => Some(Generator::LogInteraction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub generator: Generator,
    pub n: usize,
    pub d: usize,
    /// Target fraction of censored rows, in [0, 0.9).
    pub censoring_rate: f64,
    pub seed: u64,
}

/// A generated dataset plus its ground-truth score per row and the realized
/// censoring fraction.
pub struct SynthData {
    pub dataset: SurvivalDataset,
    pub truth_scores: Vec<f64>,
    pub realized_censoring: f64,
    pub censoring_rate_param: f64,
}

/// Sample a dataset from the spec. Deterministic in the seed.
pub fn generate(spec: &SynthSpec) -> SynthData {
    assert!(spec.n >= 2, "need at least 2 rows");
    assert!(
        spec.d >= spec.generator.min_d(),
        "generator {} needs at least {} features",
        spec.generator.name(),
        spec.generator.min_d()
    );
    assert!(
        (0.0..0.9).contains(&spec.censoring_rate),
        "censoring rate must be in [0, 0.9)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let features = Array2::from_shape_fn((spec.n, spec.d), |_| {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    let truth_scores: Vec<f64> = (0..spec.n)
        .map(|i| spec.generator.score(features.row(i).as_slice().unwrap()))
        .collect();
    // event times: T ~ Exp(h0 * exp(score))
    let event_times: Vec<f64> = truth_scores
        .iter()
        .map(|&s| {
            let u: f64 = rng.random_range(1e-300..1.0);
            (-u.ln() / (BASELINE_HAZARD * s.exp())).max(1e-12)
        })
        .collect();
    // one uniform draw per row reused across candidate censoring rates, so
    // the realized fraction is a monotone function of the rate
    let cens_u: Vec<f64> = (0..spec.n).map(|_| rng.random_range(1e-300..1.0f64)).collect();
    let frac_at = |rate: f64| -> f64 {
        if rate <= 0.0 {
            return 0.0;
        }
        let censored = event_times
            .iter()
            .zip(&cens_u)
            .filter(|(&t, &u)| -u.ln() / rate < t)
            .count();
        censored as f64 / spec.n as f64
    };
    let rate = if spec.censoring_rate == 0.0 {
        0.0
    } else {
        // bracket, then bisect on the realized censoring fraction
        let mut lo = 1e-9;
        let mut hi = BASELINE_HAZARD;
        while frac_at(hi) < spec.censoring_rate && hi < 1e12 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if frac_at(mid) < spec.censoring_rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = (lo * hi).sqrt();
        [lo, mid, hi]
            .into_iter()
            .min_by(|&a, &b| {
                (frac_at(a) - spec.censoring_rate)
                    .abs()
                    .total_cmp(&(frac_at(b) - spec.censoring_rate).abs())
            })
            .unwrap()
    };
    let mut times = Vec::with_capacity(spec.n);
    let mut events = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let t = event_times[i];
        let c = if rate > 0.0 {
            -cens_u[i].ln() / rate
        } else {
            f64::INFINITY
        };
        if c < t {
            times.push(c.max(1e-12));
            events.push(false);
        } else {
            times.push(t);
            events.push(true);
        }
    }
    let realized_censoring = events.iter().filter(|&&e| !e).count() as f64 / spec.n as f64;
    let dataset = SurvivalDataset::new(
        features,
        times,
        events,
        (0..spec.d).map(|j| format!("x{j}")).collect(),
        vec![ColumnKind::Continuous; spec.d],
        vec![Vec::new(); spec.d],
    )
    .expect("generated data satisfies dataset invariants");
    SynthData {
        dataset,
        truth_scores,
        realized_censoring,
        censoring_rate_param: rate,
    }
}

/// Write the dataset CSV, the ground-truth score sidecar, and a schema file
/// next to `csv_path`.
pub fn write_files(data: &SynthData, csv_path: &std::path::Path) -> std::io::Result<()> {
    if let Some(dir) = csv_path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let ds = &data.dataset;
    let mut out = String::new();
    for name in &ds.column_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str("time,event\n");
    for i in 0..ds.n() {
        for j in 0..ds.d() {
            out.push_str(&format!("{:.17e},", ds.features[[i, j]]));
        }
        out.push_str(&format!(
            "{:.17e},{}\n",
            ds.times[i],
            if ds.events[i] { 1 } else { 0 }
        ));
    }
    std::fs::write(csv_path, out)?;

    let truth_path = csv_path.with_extension("truth.csv");
    let mut truth = String::from("row,score\n");
    for (i, s) in data.truth_scores.iter().enumerate() {
        truth.push_str(&format!("{i},{s:.17e}\n"));
    }
    std::fs::write(truth_path, truth)?;

    let schema_path = csv_path.with_extension("schema.toml");
    let mut schema = String::new();
    for name in &ds.column_names {
        schema.push_str(&format!("{name} = \"continuous\"\n"));
    }
    std::fs::write(schema_path, schema)?;
    Ok(())
}
