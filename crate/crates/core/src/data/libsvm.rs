//! Sparse LIBSVM text format.
//!
//! Each line is `<label> idx:val idx:val ...` with 1-based indices. The
//! label is `±1` (or `0`, read as `−1`) for binary data, or a comma-separated
//! list of such values for multi-label data. Blank lines and `#` comments are
//! ignored. The feature count is the largest index seen.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linops::DenseMatrix;

use super::{Dataset, Labels};

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text, path)
}

/// Parses LIBSVM text; `origin` only labels error messages.
pub fn parse_libsvm(text: &str, origin: &Path) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };

    let mut labels: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut n_features = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line");
        let label = label_tok
            .split(',')
            .map(|t| parse_label(t).ok_or_else(|| err(lineno, format!("invalid label {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = labels.first() {
            if first.len() != label.len() {
                return Err(err(
                    lineno,
                    format!("expected {} labels, found {}", first.len(), label.len()),
                ));
            }
        }

        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno, format!("expected idx:val, found {tok:?}")))?;
            let i: usize = i
                .parse()
                .map_err(|_| err(lineno, format!("invalid feature index {i:?}")))?;
            if i == 0 {
                return Err(err(lineno, "feature indices are 1-based".into()));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| err(lineno, format!("invalid feature value {v:?}")))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("non-finite feature value {v}")));
            }
            entries.push((i - 1, v));
        }
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(err(
                lineno,
                format!("duplicate feature index {}", w[0].0 + 1),
            ));
        }
        if let Some(&(last, _)) = entries.last() {
            n_features = n_features.max(last + 1);
        }
        labels.push(label);
        rows.push(entries);
    }

    if rows.is_empty() {
        return Err(Error::DegenerateData(format!(
            "{} contains no samples",
            origin.display()
        )));
    }
    let mut x = DenseMatrix::zeros(rows.len(), n_features);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            x.set(i, j, v);
        }
    }
    let n_labels = labels[0].len();
    let labels = if n_labels == 1 {
        Labels::Binary(labels.into_iter().map(|l| l[0]).collect())
    } else {
        let q = labels.len();
        Labels::Multi(DenseMatrix::new(q, n_labels, labels.concat())?)
    };
    Dataset::new(x, labels)
}

fn parse_label(tok: &str) -> Option<f64> {
    let v: f64 = tok.trim().parse().ok()?;
    if v == 1.0 {
        Some(1.0)
    } else if v == -1.0 || v == 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// Writes `ds` so that [`parse_libsvm`] reads back an equal dataset. Zero
/// entries are omitted except for the last column on the first line, which
/// pins the feature count.
pub fn write_libsvm(ds: &Dataset, out: &mut impl Write) -> Result<()> {
    let x = ds.features();
    let d = x.n_cols();
    let mut line = String::new();
    for i in 0..ds.n_samples() {
        line.clear();
        match ds.labels() {
            Labels::Binary(y) => line.push_str(sign_str(y[i])),
            Labels::Multi(y) => {
                let parts: Vec<&str> = y.row(i).iter().map(|&v| sign_str(v)).collect();
                line.push_str(&parts.join(","));
            }
        }
        for (j, &v) in x.row(i).iter().enumerate() {
            if v != 0.0 || (i == 0 && j + 1 == d) {
                write!(line, " {}:{}", j + 1, v).expect("write to string");
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_libsvm(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_libsvm(ds, &mut f)?;
    f.flush()?;
    Ok(())
}

fn sign_str(v: f64) -> &'static str {
    if v > 0.0 {
        "+1"
    } else {
        "-1"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Dataset> {
        parse_libsvm(s, Path::new("test.svm"))
    }

    #[test]
    fn parses_examples() {
        let ds = parse("+1 1:0.5 3:-2\n-1 2:1\n").unwrap();
        assert_eq!(
            ds.features().to_rows(),
            vec![vec![0.5, 0.0, -2.0], vec![0.0, 1.0, 0.0]]
        );
        assert_eq!(ds.binary_labels().unwrap(), &[1.0, -1.0]);

        let ds = parse("+1\n-1 2:3\n").unwrap();
        assert_eq!(ds.features().row(0), &[0.0, 0.0]);

        let ds = parse("0 1:1\n1 1:2\n\n# comment\n").unwrap();
        assert_eq!(ds.binary_labels().unwrap(), &[-1.0, 1.0]);
    }

    #[test]
    fn duplicate_index_reports_line() {
        match parse("+1 1:1\n-1 2:1 2:3\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_fail() {
        assert!(parse("+1 1-0.5\n").is_err());
        assert!(parse("+1 0:1\n").is_err());
        assert!(parse("2 1:1\n").is_err());
        assert!(parse("+1 1:nan\n").is_err());
        assert!(parse("+1,-1 1:1\n+1 1:1\n").is_err());
        assert!(parse("\n\n").is_err());
    }

    #[test]
    fn multi_label_round_trip() {
        let text = "+1,-1,1 1:0.25 4:-3\n-1,-1,+1 2:1e-3\n";
        let ds = parse(text).unwrap();
        assert_eq!(ds.labels().n_labels(), 3);
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn round_trip_keeps_trailing_zero_column() {
        let x = DenseMatrix::from_rows(&[vec![0.1, 0.0], vec![-0.3, 0.0]]).unwrap();
        let ds = Dataset::new(x, Labels::Binary(vec![1.0, -1.0])).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(ds, back);
    }
}
