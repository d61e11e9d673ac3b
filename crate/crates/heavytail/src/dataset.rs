//! Regression datasets: a design matrix, a response vector, and optional
//! ground truth for diagnostics. Serializes to plain CSV with header
//! `x1,...,xd,y`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ground-truth fields available for synthetic data.
#[derive(Debug, Clone)]
pub struct Truth {
    pub w_opt: DVector<f64>,
    /// Population second-moment matrix of the covariates.
    pub sigma: DMatrix<f64>,
    /// Noise variance when finite.
    pub noise_variance: Option<f64>,
}

/// Design matrix (rows are covariate vectors), response vector, and optional
/// truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub truth: Option<Truth>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset rows vs responses",
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidArgument("dataset needs d >= 1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset" });
        }
        Ok(Self { x, y, truth: None })
    }

    pub fn with_truth(mut self, truth: Truth) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn to_csv_string(&self) -> String {
        let d = self.d();
        let mut out = String::new();
        let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",y\n");
        for i in 0..self.n() {
            for j in 0..d {
                out.push_str(&format!("{},", self.x[(i, j)]));
            }
            out.push_str(&format!("{}\n", self.y[i]));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_string(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty CSV".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols.last() != Some(&"y") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `x1,...,xd,y`, got `{header}`"),
            });
        }
        let d = cols.len() - 1;
        for (j, col) in cols[..d].iter().enumerate() {
            if *col != format!("x{}", j + 1) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected column `x{}`, got `{col}`", j + 1),
                });
            }
        }
        let mut rows: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {} fields, got {}", d + 1, fields.len()),
                });
            }
            for f in &fields[..d] {
                rows.push(f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad number `{f}`"),
                })?);
            }
            ys.push(fields[d].trim().parse::<f64>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("bad number `{}`", fields[d]),
            })?);
            n += 1;
        }
        Dataset::new(
            DMatrix::from_row_slice(n, d, &rows),
            DVector::from_vec(ys),
        )
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv_string(&std::fs::read_to_string(path)?)
    }
}

/// Write a dense matrix as CSV (no header).
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse a dense matrix from headerless CSV.
pub fn matrix_from_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad number `{t}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "ragged matrix rows".into(),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty matrix".into(),
        });
    }
    let (n, d) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_slice(n, d, &rows.concat()))
}
