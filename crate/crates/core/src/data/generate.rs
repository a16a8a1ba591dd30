//! Seeded simulated datasets.

use crate::error::{Error, Result};
use crate::linops::DenseMatrix;

use super::rng::SeededRng;
use super::{Dataset, Labels};

/// `⌈t⌉` and `⌊t⌋` that ignore round-off such as `0.1·30 = 3.0000000000000004`.
fn snap(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        t
    }
}

/// Two Gaussian classes in `ℝⁿ` with `q₊ = ⌈pq⌉` positives followed by
/// `q₋ = q − q₊` negatives.
///
/// Means are standard normal, the diagonal covariances have `|N(0,1)|`
/// entries, and the first `⌊rq₊⌋` samples of each class have their labels
/// flipped.
pub fn gen_example1(q: usize, n: usize, p: f64, r: f64, seed: u64) -> Result<Dataset> {
    if !(p > 0.0 && p < 1.0) || !(0.0..1.0).contains(&r) || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "binary generator needs n ≥ 1, p in (0,1) and r in [0,1) (n={n}, p={p}, r={r})"
        )));
    }
    let q_plus = snap(p * q as f64).ceil() as usize;
    if q_plus == 0 || q_plus >= q {
        return Err(Error::DegenerateData(format!(
            "binary generator with q={q}, p={p} leaves a class empty (q+ = {q_plus})"
        )));
    }
    let flips = snap(r * q_plus as f64).floor() as usize;

    let mut rng = SeededRng::new(seed);
    let mut draw = |len: usize, f: &mut dyn FnMut(&mut SeededRng) -> f64| -> Vec<f64> {
        (0..len).map(|_| f(&mut rng)).collect()
    };
    let mu1 = draw(n, &mut |r| r.normal());
    let mu2 = draw(n, &mut |r| r.normal());
    let sd1: Vec<f64> = draw(n, &mut |r| r.normal().abs().sqrt());
    let sd2: Vec<f64> = draw(n, &mut |r| r.normal().abs().sqrt());

    let mut data = Vec::with_capacity(q * n);
    let mut labels = Vec::with_capacity(q);
    for i in 0..q {
        let (mu, sd, y) = if i < q_plus {
            (&mu1, &sd1, if i < flips { -1.0 } else { 1.0 })
        } else {
            (&mu2, &sd2, if i - q_plus < flips { 1.0 } else { -1.0 })
        };
        for j in 0..n {
            data.push(mu[j] + sd[j] * rng.normal());
        }
        labels.push(y);
    }
    Dataset::new(DenseMatrix::new(q, n, data)?, Labels::Binary(labels))
}

/// Multi-label data together with the generating weights.
#[derive(Debug, Clone)]
pub struct Example3 {
    pub dataset: Dataset,
    /// `d × ℓ`, entries uniform on `(−1, 1)`.
    pub w: DenseMatrix,
}

/// `C = [C̄, e]` with standard normal `C̄ ∈ ℝ^{q×(d−1)}`, `W ~ U(−1,1)^{d×ℓ}`
/// and `Y = sgn(CW)` with `sgn(0) = −1`.
pub fn gen_example3(q: usize, d: usize, l: usize, seed: u64) -> Result<Example3> {
    if q == 0 || d == 0 || l == 0 {
        return Err(Error::InvalidConfig(format!(
            "multi-label generator needs q, d, l ≥ 1 (q={q}, d={d}, l={l})"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut c = DenseMatrix::zeros(q, d);
    for i in 0..q {
        let row = c.row_mut(i);
        for v in row[..d - 1].iter_mut() {
            *v = rng.normal();
        }
        row[d - 1] = 1.0;
    }
    let mut w = DenseMatrix::zeros(d, l);
    for i in 0..d {
        for v in w.row_mut(i) {
            *v = rng.uniform_in(-1.0, 1.0);
        }
    }
    let mut y = DenseMatrix::zeros(q, l);
    for i in 0..q {
        for k in 0..l {
            let s: f64 = (0..d).map(|j| c.get(i, j) * w.get(j, k)).sum();
            y.set(i, k, if s > 0.0 { 1.0 } else { -1.0 });
        }
    }
    Ok(Example3 {
        dataset: Dataset::new(c, Labels::Multi(y))?,
        w,
    })
}
