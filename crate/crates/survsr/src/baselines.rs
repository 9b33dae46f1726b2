//! Glass-box baseline Pareto-front procedures: the Cox elastic-net
//! regularization-path front (CX) and the depth-swept survival-tree front
//! (ST).

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxcore::{self, CoxError, StepFunction};
use crate::data::SurvivalDataset;
use crate::metrics::{EvalSplit, FrontPoint, ParetoFront};
use crate::seed;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Cox(#[from] CoxError),
    #[error("need at least {folds} rows for {folds}-fold cross-validation, got {n}")]
    TooFewRows { n: usize, folds: usize },
}

/// A front together with the unfiltered evaluated points. The raw list is
/// kept for "exactly k features" queries, where a dominated point can still
/// be the requested answer.
#[derive(Debug, Clone)]
pub struct BaselineFront<M> {
    pub raw: ParetoFront<M>,
    pub front: ParetoFront<M>,
}

// ---------------------------------------------------------------------------
// CX: elastic-net Cox regularization path
// ---------------------------------------------------------------------------

/// A linear Cox model taken from the regularization path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CxModel {
    pub theta: Vec<f64>,
    pub lambda: f64,
}

impl CxModel {
    pub fn risk_score(&self, x: &Array2<f64>) -> Array1<f64> {
        x.dot(&Array1::from_vec(self.theta.clone()))
    }
}

/// Fit the λ-path on the training split, keep the median-λ fit per distinct
/// support size (lower median for even groups), and evaluate each kept model
/// on `eval_ds`.
pub fn cx_pareto_front(
    train: &SurvivalDataset,
    eval_ds: &SurvivalDataset,
    eval_split: EvalSplit,
    l1_ratio: f64,
    n_lambdas: usize,
) -> Result<BaselineFront<CxModel>, BaselineError> {
    let path = coxcore::lambda_path(
        &train.features,
        &train.times,
        &train.events,
        l1_ratio,
        n_lambdas,
    )?;
    // group path entries by support size
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (_, fit)) in path.iter().enumerate() {
        groups.entry(fit.n_nonzero()).or_default().push(i);
    }
    let mut points = Vec::new();
    for (dims, idxs) in groups {
        // the path is descending in λ; pick the lower median of the group's
        // λ values (ascending), i.e. index (len-1)/2 from the small end
        let mut lambdas: Vec<usize> = idxs;
        lambdas.sort_by(|&a, &b| path[a].0.total_cmp(&path[b].0));
        let chosen = lambdas[(lambdas.len() - 1) / 2];
        let (lambda, fit) = &path[chosen];
        let model = CxModel {
            theta: fit.theta.to_vec(),
            lambda: *lambda,
        };
        let eta = model.risk_score(&eval_ds.features);
        let c = coxcore::concordance_ipcw(
            &train.times,
            &train.events,
            &eval_ds.times,
            &eval_ds.events,
            eta.as_slice().unwrap(),
            None,
        );
        points.push(FrontPoint {
            dims,
            ci: c.value,
            model,
        });
    }
    let raw = ParetoFront::new(points, eval_split);
    let front = raw.filter_nondominated();
    Ok(BaselineFront { raw, front })
}

// ---------------------------------------------------------------------------
// ST: survival trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitter {
    Best,
    Random,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct STConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: f64,
    pub splitter: Splitter,
}

/// The Table-1 hyper-parameter grid for one depth, in deterministic order.
pub fn st_grid(max_depth: usize) -> Vec<STConfig> {
    let mut grid = Vec::new();
    for &splitter in &[Splitter::Best, Splitter::Random] {
        for &min_samples_split in &[2usize, 5, 8] {
            for &min_samples_leaf in &[1usize, 4] {
                for &max_features in &[0.5f64, 1.0] {
                    grid.push(STConfig {
                        max_depth,
                        min_samples_split,
                        min_samples_leaf,
                        max_features,
                        splitter,
                    });
                }
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum STNode {
    Leaf {
        hazard: StepFunction,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<STNode>,
        right: Box<STNode>,
    },
}

impl STNode {
    pub fn depth(&self) -> usize {
        match self {
            STNode::Leaf { .. } => 0,
            STNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn split_features(&self) -> std::collections::BTreeSet<usize> {
        let mut set = std::collections::BTreeSet::new();
        self.collect_features(&mut set);
        set
    }

    fn collect_features(&self, set: &mut std::collections::BTreeSet<usize>) {
        if let STNode::Split {
            feature,
            left,
            right,
            ..
        } = self
        {
            set.insert(*feature);
            left.collect_features(set);
            right.collect_features(set);
        }
    }

    /// Number of distinct features used in splits.
    pub fn dims(&self) -> usize {
        self.split_features().len()
    }

    fn leaf_hazard(&self, row: ndarray::ArrayView1<f64>) -> &StepFunction {
        match self {
            STNode::Leaf { hazard, .. } => hazard,
            STNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.leaf_hazard(row)
                } else {
                    right.leaf_hazard(row)
                }
            }
        }
    }

    /// Risk score per row: the leaf's cumulative hazard evaluated at
    /// `t_star` (the largest training event time).
    pub fn risk_scores(&self, x: &Array2<f64>, t_star: f64) -> Array1<f64> {
        Array1::from_iter(
            x.rows()
                .into_iter()
                .map(|row| self.leaf_hazard(row).eval(t_star)),
        )
    }
}

/// Nelson-Aalen cumulative hazard estimator.
pub fn nelson_aalen(times: &[f64], events: &[bool]) -> StepFunction {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let n = times.len();
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut h = 0.0f64;
    let mut i = 0usize;
    while i < n {
        let t = times[order[i]];
        let at_risk = n - i;
        let mut d = 0usize;
        let mut j = i;
        while j < n && times[order[j]] == t {
            if events[order[j]] {
                d += 1;
            }
            j += 1;
        }
        if d > 0 {
            h += d as f64 / at_risk as f64;
            breakpoints.push(t);
            values.push(h);
        }
        i = j;
    }
    StepFunction {
        breakpoints,
        values,
        left_value: 0.0,
    }
}

/// Two-sample log-rank statistic (chi-square form, 1 df) between the rows
/// assigned left and right. Returns 0 when the variance vanishes.
pub fn logrank_statistic(
    times: &[f64],
    events: &[bool],
    in_left: &[bool],
) -> f64 {
    let n = times.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut at_risk_total = n as f64;
    let mut at_risk_left = in_left.iter().filter(|&&b| b).count() as f64;
    let mut observed = 0.0f64;
    let mut expected = 0.0f64;
    let mut variance = 0.0f64;
    let mut i = 0usize;
    while i < n {
        let t = times[order[i]];
        let mut d_total = 0.0f64;
        let mut d_left = 0.0f64;
        let mut removed_total = 0.0f64;
        let mut removed_left = 0.0f64;
        let mut j = i;
        while j < n && times[order[j]] == t {
            let idx = order[j];
            if events[idx] {
                d_total += 1.0;
                if in_left[idx] {
                    d_left += 1.0;
                }
            }
            removed_total += 1.0;
            if in_left[idx] {
                removed_left += 1.0;
            }
            j += 1;
        }
        if d_total > 0.0 && at_risk_total > 1.0 {
            let frac = at_risk_left / at_risk_total;
            observed += d_left;
            expected += d_total * frac;
            variance += d_total
                * frac
                * (1.0 - frac)
                * (at_risk_total - d_total)
                / (at_risk_total - 1.0);
        }
        at_risk_total -= removed_total;
        at_risk_left -= removed_left;
        i = j;
    }
    if variance <= 0.0 {
        return 0.0;
    }
    let diff = observed - expected;
    diff * diff / variance
}

fn build_node<R: Rng>(
    train: &SurvivalDataset,
    rows: &[usize],
    depth: usize,
    config: &STConfig,
    rng: &mut R,
) -> STNode {
    let times: Vec<f64> = rows.iter().map(|&i| train.times[i]).collect();
    let events: Vec<bool> = rows.iter().map(|&i| train.events[i]).collect();
    let make_leaf = || STNode::Leaf {
        hazard: nelson_aalen(&times, &events),
        n_samples: rows.len(),
    };
    if depth >= config.max_depth || rows.len() < config.min_samples_split {
        return make_leaf();
    }
    let no_events = !events.iter().any(|&e| e);
    let all_same_time = times.windows(2).all(|w| w[0] == w[1]);
    if no_events || all_same_time {
        return make_leaf();
    }
    let d = train.d();
    let n_features = ((config.max_features * d as f64).ceil() as usize).clamp(1, d);
    // uniform sample of features without replacement (partial Fisher-Yates)
    let mut feats: Vec<usize> = (0..d).collect();
    for i in 0..n_features {
        let j = rng.random_range(i..d);
        feats.swap(i, j);
    }
    feats.truncate(n_features);

    let mut best: Option<(f64, usize, f64)> = None; // (score, feature, threshold)
    let mut in_left = vec![false; train.n()];
    let consider = |score: f64, feature: usize, threshold: f64, best: &mut Option<(f64, usize, f64)>| {
        if score > 0.0 && best.map_or(true, |(s, _, _)| score > s) {
            *best = Some((score, feature, threshold));
        }
    };
    for &f in &feats {
        let mut vals: Vec<f64> = rows.iter().map(|&i| train.features[[i, f]]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        if vals.len() < 2 {
            continue;
        }
        let thresholds: Vec<f64> = match config.splitter {
            Splitter::Best => vals.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            Splitter::Random => {
                vec![rng.random_range(vals[0]..vals[vals.len() - 1])]
            }
        };
        for thr in thresholds {
            let mut n_left = 0usize;
            for &i in rows {
                let l = train.features[[i, f]] <= thr;
                in_left[i] = l;
                if l {
                    n_left += 1;
                }
            }
            let n_right = rows.len() - n_left;
            if n_left < config.min_samples_leaf || n_right < config.min_samples_leaf {
                continue;
            }
            let flags: Vec<bool> = rows.iter().map(|&i| in_left[i]).collect();
            let score = logrank_statistic(&times, &events, &flags);
            consider(score, f, thr, &mut best);
        }
    }
    match best {
        None => make_leaf(),
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| train.features[[i, feature]] <= threshold);
            STNode::Split {
                feature,
                threshold,
                left: Box::new(build_node(train, &left_rows, depth + 1, config, rng)),
                right: Box::new(build_node(train, &right_rows, depth + 1, config, rng)),
            }
        }
    }
}

/// Fit one survival tree by greedy log-rank partitioning.
pub fn fit_survival_tree<R: Rng>(
    train: &SurvivalDataset,
    config: &STConfig,
    rng: &mut R,
) -> STNode {
    let rows: Vec<usize> = (0..train.n()).collect();
    build_node(train, &rows, 0, config, rng)
}

fn max_event_time(times: &[f64], events: &[bool]) -> f64 {
    times
        .iter()
        .zip(events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Deterministic event-stratified fold assignment: returns fold id per row.
pub fn stratified_folds(events: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; events.len()];
    for stratum in [true, false] {
        let mut idxs: Vec<usize> = (0..events.len()).filter(|&i| events[i] == stratum).collect();
        for i in (1..idxs.len()).rev() {
            let j = rng.random_range(0..=i);
            idxs.swap(i, j);
        }
        for (pos, &i) in idxs.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// One fitted depth-sweep winner.
#[derive(Debug, Clone)]
pub struct STWinner {
    pub depth: usize,
    pub config: STConfig,
    pub tree: STNode,
    pub cv_ci: f64,
}

fn cv_mean_ci(
    train: &SurvivalDataset,
    config: &STConfig,
    fold_of: &[usize],
    folds: usize,
    base_seed: u64,
) -> f64 {
    let mut total = 0.0;
    for fold in 0..folds {
        let tr_idx: Vec<usize> = (0..train.n()).filter(|&i| fold_of[i] != fold).collect();
        let va_idx: Vec<usize> = (0..train.n()).filter(|&i| fold_of[i] == fold).collect();
        if tr_idx.is_empty() || va_idx.is_empty() {
            total += 0.5;
            continue;
        }
        let tr = train.subset(&tr_idx);
        let va = train.subset(&va_idx);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::component_seed(base_seed, fold as u64));
        let tree = fit_survival_tree(&tr, config, &mut rng);
        let t_star = max_event_time(&tr.times, &tr.events);
        if !t_star.is_finite() {
            total += 0.5;
            continue;
        }
        let eta = tree.risk_scores(&va.features, t_star);
        let c = coxcore::concordance_ipcw(
            &tr.times,
            &tr.events,
            &va.times,
            &va.events,
            eta.as_slice().unwrap(),
            None,
        );
        total += c.value;
    }
    total / folds as f64
}

/// Depth-swept survival-tree front: per depth, a 5-fold grid search selects
/// the best hyper-parameters by mean validation CI; the winner is refit on
/// the full training split; winners are scanned in increasing depth keeping
/// the first (smallest-depth) model per distinct dims value, then evaluated
/// on `eval_ds`.
pub fn st_pareto_front(
    train: &SurvivalDataset,
    eval_ds: &SurvivalDataset,
    eval_split: EvalSplit,
    depths: std::ops::RangeInclusive<usize>,
    folds: usize,
    base_seed: u64,
) -> Result<BaselineFront<STNode>, BaselineError> {
    if train.n() < folds {
        return Err(BaselineError::TooFewRows {
            n: train.n(),
            folds,
        });
    }
    let fold_of = stratified_folds(&train.events, folds, seed::component_seed(base_seed, 0xF01D));
    let depth_list: Vec<usize> = depths.collect();
    let winners: Vec<STWinner> = depth_list
        .par_iter()
        .map(|&depth| {
            let grid = st_grid(depth);
            let mut best: Option<(f64, usize)> = None;
            for (gi, config) in grid.iter().enumerate() {
                let cfg_seed =
                    seed::component_seed(base_seed, (depth as u64) << 16 | gi as u64);
                let mean_ci = cv_mean_ci(train, config, &fold_of, folds, cfg_seed);
                if best.map_or(true, |(s, _)| mean_ci > s) {
                    best = Some((mean_ci, gi));
                }
            }
            let (cv_ci, gi) = best.unwrap();
            let config = grid[gi];
            let refit_seed = seed::component_seed(
                base_seed,
                0xBEEF_0000 ^ ((depth as u64) << 16 | gi as u64),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(refit_seed);
            let tree = fit_survival_tree(train, &config, &mut rng);
            STWinner {
                depth,
                config,
                tree,
                cv_ci,
            }
        })
        .collect();

    // increasing depth, first model per distinct dims value
    use std::collections::BTreeMap;
    let mut by_dims: BTreeMap<usize, &STWinner> = BTreeMap::new();
    for w in &winners {
        by_dims.entry(w.tree.dims()).or_insert(w);
    }
    let t_star = max_event_time(&train.times, &train.events);
    let mut points = Vec::new();
    for (dims, w) in by_dims {
        let eta = w.tree.risk_scores(&eval_ds.features, t_star);
        let c = coxcore::concordance_ipcw(
            &train.times,
            &train.events,
            &eval_ds.times,
            &eval_ds.events,
            eta.as_slice().unwrap(),
            None,
        );
        points.push(FrontPoint {
            dims,
            ci: c.value,
            model: w.tree.clone(),
        });
    }
    let raw = ParetoFront::new(points, eval_split);
    let front = raw.filter_nondominated();
    Ok(BaselineFront { raw, front })
}
