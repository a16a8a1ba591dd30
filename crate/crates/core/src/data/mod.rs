//! Datasets: LIBSVM text IO, scaling, splits and the simulated generators.

pub mod generate;
pub mod libsvm;
pub mod rng;
pub mod scale;
pub mod split;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linops::{all_finite, DenseMatrix};

pub use generate::{gen_example1, gen_example3, Example3};
pub use libsvm::{load_libsvm, parse_libsvm, save_libsvm, write_libsvm};
pub use scale::{scale_features, Scaler};
pub use split::{make_folds, Fold, SplitKind, SplitSpec};

/// Labels in `{−1, 1}`: one per sample, or a `q × ℓ` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Binary(Vec<f64>),
    Multi(DenseMatrix),
}

impl Labels {
    pub fn n_labels(&self) -> usize {
        match self {
            Labels::Binary(_) => 1,
            Labels::Multi(y) => y.n_cols(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    Binary,
    Multi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DenseMatrix,
    labels: Labels,
}

impl Dataset {
    pub fn new(features: DenseMatrix, labels: Labels) -> Result<Self> {
        let q = features.n_rows();
        if q == 0 {
            return Err(Error::DegenerateData("dataset has no samples".into()));
        }
        if !all_finite(features.data()) {
            return Err(Error::NonFinite("dataset features".into()));
        }
        let values = match &labels {
            Labels::Binary(y) => {
                check_len("dataset labels", q, y.len())?;
                y.as_slice()
            }
            Labels::Multi(y) => {
                check_len("dataset label rows", q, y.n_rows())?;
                y.data()
            }
        };
        if let Some(pos) = values.iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidLabels(format!(
                "label value {} (entry {pos}) is not +1 or -1",
                values[pos]
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn label_kind(&self) -> LabelKind {
        match self.labels {
            Labels::Binary(_) => LabelKind::Binary,
            Labels::Multi(_) => LabelKind::Multi,
        }
    }

    pub fn binary_labels(&self) -> Result<&[f64]> {
        match &self.labels {
            Labels::Binary(y) => Ok(y),
            Labels::Multi(y) => Err(Error::InvalidLabels(format!(
                "expected binary labels, found {} labels per sample",
                y.n_cols()
            ))),
        }
    }

    /// Labels as a `q × ℓ` matrix; binary labels become a single column.
    pub fn label_matrix(&self) -> DenseMatrix {
        match &self.labels {
            Labels::Binary(y) => DenseMatrix::new(y.len(), 1, y.clone()).expect("q × 1"),
            Labels::Multi(y) => y.clone(),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let labels = match &self.labels {
            Labels::Binary(y) => Labels::Binary(idx.iter().map(|&i| y[i]).collect()),
            Labels::Multi(y) => Labels::Multi(y.select_rows(idx)),
        };
        Self {
            features: self.features.select_rows(idx),
            labels,
        }
    }

    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        Self::new(features, self.labels.clone())
    }

    /// Appends the all-ones bias column.
    pub fn with_bias_column(&self) -> Self {
        let (q, d) = (self.n_samples(), self.n_features());
        let mut data = Vec::with_capacity(q * (d + 1));
        for i in 0..q {
            data.extend_from_slice(self.features.row(i));
            data.push(1.0);
        }
        Self {
            features: DenseMatrix::new(q, d + 1, data).expect("q × (d+1)"),
            labels: self.labels.clone(),
        }
    }
}
