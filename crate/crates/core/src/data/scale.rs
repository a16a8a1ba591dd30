//! Column-wise affine scaling onto `[−1, 1]`.

use serde::Serialize;

use crate::linops::DenseMatrix;

use super::Dataset;
use crate::error::{check_len, Result};

/// Per-column `(min, max)` fitted on one matrix and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &DenseMatrix) -> Self {
        let d = x.n_cols();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for i in 0..x.n_rows() {
            for (j, &v) in x.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    /// `(2v − (max + min))/(max − min)`; constant columns map to 0.
    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_len("Scaler::transform columns", self.min.len(), x.n_cols())?;
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let (lo, hi) = (self.min[j], self.max[j]);
                *v = if hi > lo {
                    let t = (2.0 * *v - (hi + lo)) / (hi - lo);
                    // round-off can leave the endpoints a ulp outside [−1, 1]
                    if (lo..=hi).contains(v) {
                        t.clamp(-1.0, 1.0)
                    } else {
                        t
                    }
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

/// Fits on `ds` and transforms it.
pub fn scale_features(ds: &Dataset) -> Dataset {
    let s = Scaler::fit(ds.features());
    let x = s.transform(ds.features()).expect("same matrix");
    ds.with_features(x).expect("scaling keeps values finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DenseMatrix {
        DenseMatrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn scaling_examples() {
        let s = Scaler::fit(&col(&[0.0, 5.0, 10.0]));
        assert_eq!(
            s.transform(&col(&[0.0, 5.0, 10.0])).unwrap().data(),
            &[-1.0, 0.0, 1.0]
        );
        let s = Scaler::fit(&col(&[3.0, 3.0]));
        assert_eq!(s.transform(&col(&[3.0, 3.0])).unwrap().data(), &[0.0, 0.0]);
        let v = [-1.0, 0.1, 0.37, 1.0];
        let s = Scaler::fit(&col(&v));
        assert_eq!(s.transform(&col(&v)).unwrap().data(), &v);
    }

    #[test]
    fn test_side_may_leave_range() {
        let s = Scaler::fit(&col(&[0.0, 1.0]));
        assert_eq!(s.transform(&col(&[2.0])).unwrap().data(), &[3.0]);
    }
}
