//! Multi-expression Cox model: a set of expression trees whose outputs are
//! linearly combined into the risk score theta' f(x), with theta fitted by
//! elastic-net coordinate descent on internally standardized constructed
//! features.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coxcore::{self, CoxError};
use crate::data::SurvivalDataset;
use crate::exprtree::{self, ExprTree};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model has not been fitted")]
    NotFitted,
    #[error(transparent)]
    Cox(#[from] CoxError),
    #[error(transparent)]
    Expr(#[from] exprtree::ExprError),
}

/// Default penalty applied when fitting the linear coefficients of the
/// constructed features.
pub const THETA_LAMBDA: f64 = 1e-6;
pub const THETA_L1_RATIO: f64 = 0.5;

/// List of expression trees plus fitted linear coefficients. The risk score
/// is sum_j theta_j * f_j(x) with no intercept (the partial likelihood is
/// translation-invariant).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiExprModel {
    trees: Vec<ExprTree>,
    theta: Vec<f64>,
    fitted: bool,
    converged: bool,
    train_signature: Option<u64>,
}

/// Objective vector minimized by the evolutionary search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// 1 - concordance index, in [0, 1].
    pub neg_ci: f64,
    /// Number of distinct dataset features used across all trees. One-hot
    /// sibling columns count separately.
    pub dims: usize,
    /// Set when the concordance computation found no comparable pairs.
    pub ci_degenerate: bool,
}

impl MultiExprModel {
    /// A model always holds at least one tree.
    pub fn new(trees: Vec<ExprTree>) -> Self {
        assert!(!trees.is_empty());
        let m = trees.len();
        Self {
            trees,
            theta: vec![0.0; m],
            fitted: false,
            converged: false,
            train_signature: None,
        }
    }

    pub fn trees(&self) -> &[ExprTree] {
        &self.trees
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Number of distinct feature columns used across all trees.
    pub fn dims(&self) -> usize {
        let mut set = std::collections::BTreeSet::new();
        for t in &self.trees {
            set.extend(t.feature_set().iter().copied());
        }
        set.len()
    }

    /// Replace the tree list; clears the fitted state (structure edits
    /// invalidate theta).
    pub fn with_trees(trees: Vec<ExprTree>) -> Self {
        Self::new(trees)
    }

    /// Constructed-feature matrix: column j holds f_j evaluated on every
    /// row. Zero-variance columns are flagged; they carry no
    /// partial-likelihood signal.
    pub fn construct_features(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Vec<bool>), ModelError> {
        let n = x.nrows();
        let m = self.trees.len();
        let mut f = Array2::zeros((n, m));
        let mut zero_variance = vec![false; m];
        for (j, tree) in self.trees.iter().enumerate() {
            let col = tree.evaluate(x)?;
            let first = col[0];
            zero_variance[j] = col.iter().all(|&v| v == first);
            f.column_mut(j).assign(&col);
        }
        Ok((f, zero_variance))
    }

    /// Fit theta on the training split. Constructed features are
    /// standardized for the solver and coefficients back-transformed to raw
    /// feature scale; zero-variance columns are kept in the model with
    /// theta_j = 0.
    pub fn fit_theta(
        &self,
        train: &SurvivalDataset,
        lambda: f64,
        l1_ratio: f64,
    ) -> Result<MultiExprModel, ModelError> {
        let (f, zero_variance) = self.construct_features(&train.features)?;
        let n = f.nrows() as f64;
        let m = f.ncols();
        let mut std_f = f.clone();
        let mut sigmas = vec![0.0; m];
        for j in 0..m {
            if zero_variance[j] {
                std_f.column_mut(j).fill(0.0);
                continue;
            }
            let col = f.column(j);
            let mu = col.sum() / n;
            let var = col.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sigma = var.sqrt();
            sigmas[j] = sigma;
            for v in std_f.column_mut(j) {
                *v = (*v - mu) / sigma;
            }
        }
        let fit = coxcore::fit_coxnet(&std_f, &train.times, &train.events, lambda, l1_ratio)?;
        let theta: Vec<f64> = (0..m)
            .map(|j| {
                if zero_variance[j] || sigmas[j] == 0.0 {
                    0.0
                } else {
                    fit.theta[j] / sigmas[j]
                }
            })
            .collect();
        Ok(MultiExprModel {
            trees: self.trees.clone(),
            theta,
            fitted: true,
            converged: fit.converged,
            train_signature: Some(train.content_hash()),
        })
    }

    pub fn fit_theta_default(&self, train: &SurvivalDataset) -> Result<MultiExprModel, ModelError> {
        self.fit_theta(train, THETA_LAMBDA, THETA_L1_RATIO)
    }

    /// Linear predictor eta = sum_j theta_j f_j(x).
    pub fn risk_score(&self, x: &Array2<f64>) -> Result<Array1<f64>, ModelError> {
        if !self.fitted {
            return Err(ModelError::NotFitted);
        }
        let mut eta = Array1::zeros(x.nrows());
        for (tree, &theta) in self.trees.iter().zip(&self.theta) {
            if theta != 0.0 {
                eta = eta + tree.evaluate(x)? * theta;
            }
        }
        Ok(eta)
    }

    /// Training-objective pair: (1 - IPCW concordance on the evaluation
    /// split, number of distinct features). The censoring distribution comes
    /// from the training split.
    pub fn objectives(
        &self,
        eval_ds: &SurvivalDataset,
        train_ds: &SurvivalDataset,
    ) -> Result<ObjectiveVector, ModelError> {
        let eta = self.risk_score(&eval_ds.features)?;
        let c = coxcore::concordance_ipcw(
            &train_ds.times,
            &train_ds.events,
            &eval_ds.times,
            &eval_ds.events,
            eta.as_slice().unwrap(),
            None,
        );
        Ok(ObjectiveVector {
            neg_ci: (1.0 - c.value).clamp(0.0, 1.0),
            dims: self.dims(),
            ci_degenerate: c.degenerate,
        })
    }

    /// Digest of the training risk scores rounded to 12 decimal digits.
    /// Equal digests identify numerically duplicate behavior.
    pub fn prediction_signature(&self, train_x: &Array2<f64>) -> Result<[u8; 32], ModelError> {
        let eta = self.risk_score(train_x)?;
        let mut hasher = Sha256::new();
        for &v in eta.iter() {
            let rounded = (v * 1e12).round() / 1e12;
            let canon = if rounded.is_finite() { rounded } else { v };
            // normalize -0.0 so it collides with 0.0
            let canon = if canon == 0.0 { 0.0 } else { canon };
            hasher.update(canon.to_bits().to_le_bytes());
        }
        Ok(hasher.finalize().into())
    }

    /// Report form: pretty infix of theta' f(x).
    pub fn formula(&self, column_names: &[String]) -> String {
        let mut parts = Vec::new();
        for (tree, &theta) in self.trees.iter().zip(&self.theta) {
            if self.fitted && theta == 0.0 {
                continue;
            }
            let coeff = exprtree::format_sig6(theta);
            parts.push(format!("{coeff}*[{}]", exprtree::to_infix_pretty(tree, column_names)));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// JSON export record: infix trees plus coefficients and metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRecord {
    pub trees: Vec<String>,
    pub theta: Vec<f64>,
    pub dims: usize,
    pub n_trees: usize,
    pub converged: bool,
}

impl ModelRecord {
    pub fn from_model(model: &MultiExprModel) -> Self {
        Self {
            trees: model.trees().iter().map(exprtree::to_infix).collect(),
            theta: model.theta().to_vec(),
            dims: model.dims(),
            n_trees: model.n_trees(),
            converged: model.converged(),
        }
    }
}
