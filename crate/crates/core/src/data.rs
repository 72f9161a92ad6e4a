//! Tabular container for the observed variables and its CSV format.
//!
//! A [`Dataset`] holds a treatment `x`, an outcome `y`, one or more candidate
//! instruments `z` and zero or more covariates `w`, all as columns of equal
//! length. The CSV dialect is plain: comma separated, one header row, `.` as
//! the decimal separator and no quoting of numeric cells.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRoles {
    pub x_name: String,
    pub y_name: String,
    pub z_names: Vec<String>,
    pub w_names: Vec<String>,
}

impl ColumnRoles {
    pub fn new(
        x_name: impl Into<String>,
        y_name: impl Into<String>,
        z_names: Vec<String>,
        w_names: Vec<String>,
    ) -> Result<Self> {
        let roles = Self {
            x_name: x_name.into(),
            y_name: y_name.into(),
            z_names,
            w_names,
        };
        roles.validate()?;
        Ok(roles)
    }

    /// Roles named `x`, `y`, `z1..zm`, `w1..wq`.
    pub fn default_names(m: usize, q: usize) -> Self {
        Self {
            x_name: "x".into(),
            y_name: "y".into(),
            z_names: (1..=m).map(|i| format!("z{i}")).collect(),
            w_names: (1..=q).map(|i| format!("w{i}")).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_name.is_empty() || self.y_name.is_empty() {
            return Err(Error::InvalidRoles("treatment and outcome names are required".into()));
        }
        if self.z_names.is_empty() {
            return Err(Error::InvalidRoles(
                "at least one candidate instrument is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in self.all_names() {
            if !seen.insert(name) {
                return Err(Error::InvalidRoles(format!(
                    "column '{name}' is assigned more than once"
                )));
            }
        }
        Ok(())
    }

    /// Every role name: candidates, covariates, then treatment and outcome.
    pub fn all_names(&self) -> impl Iterator<Item = &str> {
        self.z_names
            .iter()
            .chain(self.w_names.iter())
            .map(String::as_str)
            .chain([self.x_name.as_str(), self.y_name.as_str()])
    }
}

/// Observed variables, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    roles: ColumnRoles,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> Result<Self> {
        let roles = ColumnRoles::default_names(z.len(), w.len());
        Self::with_roles(x, y, z, w, roles)
    }

    pub fn with_roles(
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<Vec<f64>>,
        w: Vec<Vec<f64>>,
        roles: ColumnRoles,
    ) -> Result<Self> {
        roles.validate()?;
        if roles.z_names.len() != z.len() {
            return Err(Error::DimensionMismatch {
                what: "candidate names",
                expected: z.len(),
                got: roles.z_names.len(),
            });
        }
        if roles.w_names.len() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "covariate names",
                expected: w.len(),
                got: roles.w_names.len(),
            });
        }
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset needs at least one row".into()));
        }
        let columns = std::iter::once((&roles.y_name, &y))
            .chain(roles.z_names.iter().zip(&z))
            .chain(roles.w_names.iter().zip(&w));
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "column length",
                    expected: n,
                    got: col.len(),
                });
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite value in column '{name}' at row {}",
                    i + 1
                )));
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value in column '{}' at row {}",
                roles.x_name,
                i + 1
            )));
        }
        Ok(Self { x, y, z, w, roles })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn roles(&self) -> &ColumnRoles {
        &self.roles
    }

    pub fn num_candidates(&self) -> usize {
        self.z.len()
    }

    pub fn num_covariates(&self) -> usize {
        self.w.len()
    }

    pub fn candidate(&self, index: usize) -> Result<&[f64]> {
        self.z.get(index).map(Vec::as_slice).ok_or(Error::DimensionMismatch {
            what: "candidate index",
            expected: self.z.len(),
            got: index,
        })
    }

    /// Write as CSV: candidates, covariates, treatment, outcome.
    /// Values use the shortest representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<&str> = self.roles.all_names().collect();
        writeln!(out, "{}", header.join(","))?;
        let columns: Vec<&[f64]> = self
            .z
            .iter()
            .chain(self.w.iter())
            .map(Vec::as_slice)
            .chain([self.x.as_slice(), self.y.as_slice()])
            .collect();
        let mut line = String::new();
        for i in 0..self.n() {
            line.clear();
            for (j, col) in columns.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:?}", col[i]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_csv(&mut buf)
            .and_then(|_| buf.flush())
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// Read a dataset from a CSV file, binding header columns to roles.
pub fn load_csv(path: &Path, roles: &ColumnRoles) -> Result<Dataset> {
    roles.validate()?;
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, roles)
}

pub fn parse_csv(text: &str, roles: &ColumnRoles) -> Result<Dataset> {
    roles.validate()?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let x_idx = index_of(&roles.x_name)?;
    let y_idx = index_of(&roles.y_name)?;
    let z_idx = roles.z_names.iter().map(|s| index_of(s)).collect::<Result<Vec<_>>>()?;
    let w_idx = roles.w_names.iter().map(|s| index_of(s)).collect::<Result<Vec<_>>>()?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut z = vec![Vec::new(); z_idx.len()];
    let mut w = vec![Vec::new(); w_idx.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = r + 1;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::NonNumeric {
                    row,
                    column: name.to_string(),
                    value: raw.to_string(),
                }),
            }
        };
        x.push(cell(x_idx, &roles.x_name)?);
        y.push(cell(y_idx, &roles.y_name)?);
        for ((col, &idx), name) in z.iter_mut().zip(&z_idx).zip(&roles.z_names) {
            col.push(cell(idx, name)?);
        }
        for ((col, &idx), name) in w.iter_mut().zip(&w_idx).zip(&roles.w_names) {
            col.push(cell(idx, name)?);
        }
    }
    if x.is_empty() {
        return Err(Error::EmptyFile);
    }
    Dataset::with_roles(x, y, z, w, roles.clone())
}

// The second pass removes the rounding left by the first when the mean is
// large relative to the spread, which makes centering idempotent.
fn centered(v: &[f64]) -> Vec<f64> {
    let m = stats::mean(v);
    let first: Vec<f64> = v.iter().map(|x| x - m).collect();
    let r = stats::mean(&first);
    first.iter().map(|x| x - r).collect()
}

/// Subtract each column's sample mean.
pub fn center(d: &Dataset) -> Dataset {
    Dataset {
        x: centered(&d.x),
        y: centered(&d.y),
        z: d.z.iter().map(|c| centered(c)).collect(),
        w: d.w.iter().map(|c| centered(c)).collect(),
        roles: d.roles.clone(),
    }
}
