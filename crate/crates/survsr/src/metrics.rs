//! Pareto-front quality metrics, front filtering, and cross-repetition
//! aggregation.
//!
//! Fronts live in the (1 - CI, dims) plane, both minimized. For hypervolume
//! the dims axis is normalized by the total encoded feature count d and the
//! reference point is (1, 1); values are reported on a x100 scale. The
//! reference point and normalization are this library's convention, so
//! absolute hypervolume values are comparable only within it.

use serde::{Deserialize, Serialize};

/// Which split a front was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Train,
    Test,
}

/// One model on a front: distinct-feature count and concordance index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontPoint<M> {
    pub dims: usize,
    pub ci: f64,
    pub model: M,
}

/// A set of (model, objective) pairs. `points` is kept as produced (useful
/// for exactly-k queries after re-evaluation on a different split); use
/// [`ParetoFront::filter_nondominated`] for the dominance-filtered view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoFront<M> {
    pub points: Vec<FrontPoint<M>>,
    pub evaluation_split: EvalSplit,
}

impl<M> ParetoFront<M> {
    pub fn new(points: Vec<FrontPoint<M>>, evaluation_split: EvalSplit) -> Self {
        Self {
            points,
            evaluation_split,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keep only nondominated points under (minimize 1-ci, minimize dims).
    /// Among points with equal dims, the best ci survives.
    pub fn filter_nondominated(&self) -> ParetoFront<M>
    where
        M: Clone,
    {
        let keep: Vec<bool> = self
            .points
            .iter()
            .map(|p| {
                !self.points.iter().any(|q| {
                    (q.ci > p.ci && q.dims <= p.dims) || (q.ci >= p.ci && q.dims < p.dims)
                })
            })
            .collect();
        let mut points: Vec<FrontPoint<M>> = self
            .points
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p.clone())
            .collect();
        // drop duplicate (dims, ci) pairs, keep first
        points.sort_by(|a, b| a.dims.cmp(&b.dims).then(b.ci.total_cmp(&a.ci)));
        points.dedup_by(|a, b| a.dims == b.dims && a.ci == b.ci);
        ParetoFront {
            points,
            evaluation_split: self.evaluation_split,
        }
    }

    /// Points with dims <= k.
    pub fn filter_up_to_k(&self, k: usize) -> ParetoFront<M>
    where
        M: Clone,
    {
        ParetoFront {
            points: self
                .points
                .iter()
                .filter(|p| p.dims <= k)
                .cloned()
                .collect(),
            evaluation_split: self.evaluation_split,
        }
    }

    /// The point with dims == k, if any (best ci on ties). `None` renders as
    /// "(-)" in tables.
    pub fn select_exactly_k(&self, k: usize) -> Option<&FrontPoint<M>> {
        self.points
            .iter()
            .filter(|p| p.dims == k)
            .max_by(|a, b| a.ci.total_cmp(&b.ci))
    }

    /// The point with the highest number of dimensions (best ci on ties).
    pub fn select_max(&self) -> Option<&FrontPoint<M>> {
        self.points
            .iter()
            .max_by(|a, b| a.dims.cmp(&b.dims).then(a.ci.total_cmp(&b.ci)))
    }
}

/// Hypervolume reference configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HvConfig {
    pub ref_negci: f64,
    pub ref_dims_norm: f64,
    /// Total encoded feature count used to normalize the dims axis.
    pub dims_normalizer: usize,
}

impl HvConfig {
    pub fn for_dataset(d: usize) -> Self {
        Self {
            ref_negci: 1.0,
            ref_dims_norm: 1.0,
            dims_normalizer: d.max(1),
        }
    }
}

/// Exact 2-D hypervolume of the region dominated by the front, relative to
/// the reference point, on a x100 scale. Points outside the reference box
/// contribute nothing.
pub fn hypervolume2d<M>(front: &ParetoFront<M>, config: &HvConfig) -> f64 {
    let mut pts: Vec<(f64, f64)> = front
        .points
        .iter()
        .map(|p| {
            let neg_ci = (1.0 - p.ci).clamp(0.0, 1.0);
            let dims_norm = p.dims as f64 / config.dims_normalizer as f64;
            (neg_ci, dims_norm)
        })
        .filter(|&(a, b)| a < config.ref_negci && b < config.ref_dims_norm)
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hv = 0.0;
    let mut upper = config.ref_dims_norm;
    for &(negci, dims_norm) in &pts {
        if dims_norm < upper {
            hv += (config.ref_negci - negci) * (upper - dims_norm);
            upper = dims_norm;
        }
    }
    hv * 100.0
}

/// Median plus quartiles across repetitions. Lower median for even counts;
/// quartiles are Tukey hinges (medians of the lower/upper halves).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
}

impl Summary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Aggregate per-repetition metric values.
pub fn aggregate_repetitions(values: &[f64]) -> Summary {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = lower_median(&sorted);
    let half = n / 2;
    let (lower, upper) = if n == 1 {
        (&sorted[..], &sorted[..])
    } else if n % 2 == 0 {
        (&sorted[..half], &sorted[half..])
    } else {
        // odd: Tukey hinges include the median in both halves
        (&sorted[..=half], &sorted[half..])
    };
    Summary {
        median,
        q1: lower_median(lower),
        q3: lower_median(upper),
        n,
    }
}

/// Pearson correlation coefficient; 0 when either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
