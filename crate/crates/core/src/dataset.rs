//! Point sets and the synthetic distributions they are drawn from.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

/// A finite point set in `R^dim`, read as the empirical measure placing mass
/// `1/m` on each point. Points are stored dense and row-major; duplicates are
/// allowed and each carries its own mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Build from row-major coordinates. Requires at least one point, a
    /// positive dimension and finite coordinates.
    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dimension must be positive"));
        }
        if data.is_empty() {
            return Err(Error::validation("dataset must contain at least one point"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::validation(format!(
                "{} coordinates do not split into points of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::validation("dataset must contain at least one point"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(dim, data)
    }

    /// One-dimensional dataset from scalar values.
    pub fn from_values(values: &[T]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false: a dataset holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn mean(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.dim];
        for p in self.points() {
            for (a, &v) in acc.iter_mut().zip(p) {
                *a = *a + v;
            }
        }
        let m = T::from_count(self.len());
        acc.into_iter().map(|a| a / m).collect()
    }

    /// Subset of points by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::validation(format!(
                    "index {i} out of range for {} points",
                    self.len()
                )));
            }
            data.extend_from_slice(self.point(i));
        }
        Self::from_flat(self.dim, data)
    }

    /// Axis-aligned bounding box as `(min, max)` per coordinate.
    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.points() {
            for d in 0..self.dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Reads a header-less CSV file: one point per line, comma-separated reals.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_csv(file)
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut dim = None;
        let mut data = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if e.is_io_error() {
                    match e.into_kind() {
                        csv::ErrorKind::Io(io) => Error::Io(io),
                        _ => unreachable!(),
                    }
                } else {
                    Error::Parse {
                        line,
                        message: e.to_string(),
                    }
                }
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            match dim {
                None => dim = Some(record.len()),
                Some(d) if d != record.len() => {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {d} fields, found {}", record.len()),
                    })
                }
                Some(_) => {}
            }
            for field in record.iter() {
                let v: T = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {field:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value: {field:?}"),
                    });
                }
                data.push(v);
            }
        }
        let dim = dim.ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        Self::from_flat(dim, data).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Values are written in shortest round-trip form, so reading them back
    /// reproduces every coordinate exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for p in self.points() {
            write_row(&mut out, p)?;
        }
        Ok(())
    }
}

pub(crate) fn write_row<T: Scalar, W: Write>(out: &mut W, row: &[T]) -> std::io::Result<()> {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            out.write_all(b",")?;
        }
        write!(out, "{v}")?;
    }
    out.write_all(b"\n")
}

/// One isotropic Gaussian component of a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub center: Vec<f64>,
    pub stdev: f64,
    pub weight: f64,
}

/// Isotropic Gaussian mixture with normalized weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    components: Vec<Component>,
}

/// On-disk form of a mixture: either a grid shorthand or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixtureConfig {
    Grid {
        rows: usize,
        cols: usize,
        spacing: f64,
        stdev: f64,
    },
    Components {
        components: Vec<Component>,
    },
}

impl Default for MixtureConfig {
    /// 4×4 grid, unit spacing, stdev 0.1.
    fn default() -> Self {
        MixtureConfig::Grid {
            rows: 4,
            cols: 4,
            spacing: 1.0,
            stdev: 0.1,
        }
    }
}

impl MixtureConfig {
    pub fn build(&self) -> Result<MixtureSpec> {
        match self {
            MixtureConfig::Grid {
                rows,
                cols,
                spacing,
                stdev,
            } => MixtureSpec::grid(*rows, *cols, *spacing, *stdev),
            MixtureConfig::Components { components } => MixtureSpec::new(components.clone()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start].lines().count().max(1) as u64)
                .unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("mixture config serializes")
    }
}

impl MixtureSpec {
    /// Validates components and rescales weights to sum to one.
    pub fn new(mut components: Vec<Component>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::validation("mixture needs at least one component"))?;
        let dim = first.center.len();
        if dim == 0 {
            return Err(Error::validation("component centers must be non-empty"));
        }
        for (i, c) in components.iter().enumerate() {
            if c.center.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.center.len(),
                });
            }
            if !(c.stdev > 0.0 && c.stdev.is_finite()) {
                return Err(Error::validation(format!(
                    "component {i}: stdev must be positive, got {}",
                    c.stdev
                )));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::validation(format!(
                    "component {i}: weight must be positive, got {}",
                    c.weight
                )));
            }
            if c.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("component {i}: non-finite center")));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
        Ok(Self { components })
    }

    /// `rows × cols` equally weighted components centred at
    /// `(i·spacing, j·spacing)` for `i < rows`, `j < cols`.
    pub fn grid(rows: usize, cols: usize, spacing: f64, stdev: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::validation("grid needs at least one row and one column"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::validation(format!("spacing must be positive, got {spacing}")));
        }
        if !(stdev > 0.0 && stdev.is_finite()) {
            return Err(Error::validation(format!("stdev must be positive, got {stdev}")));
        }
        let n = (rows * cols) as f64;
        let components = (0..rows)
            .flat_map(|i| {
                (0..cols).map(move |j| Component {
                    center: vec![i as f64 * spacing, j as f64 * spacing],
                    stdev,
                    weight: 1.0 / n,
                })
            })
            .collect();
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].center.len()
    }

    /// `m` i.i.d. draws using the generator for `seed`.
    pub fn sample<T: Scalar>(&self, m: usize, seed: u64) -> Result<Dataset<T>> {
        self.sample_with(m, &mut rng::from_seed(seed))
    }

    /// Each draw picks a component by weight, then adds isotropic Gaussian
    /// noise with that component's stdev. Noise is generated in `f64`.
    pub fn sample_with<T: Scalar>(&self, m: usize, rng: &mut Rng) -> Result<Dataset<T>> {
        if m == 0 {
            return Err(Error::validation("sample size must be at least 1"));
        }
        let dim = self.dim();
        let picker = WeightedIndex::new(self.components.iter().map(|c| c.weight))
            .map_err(|e| Error::validation(e.to_string()))?;
        let mut data = Vec::with_capacity(m * dim);
        for _ in 0..m {
            let c = &self.components[picker.sample(rng)];
            for &mu in &c.center {
                let z: f64 = StandardNormal.sample(rng);
                data.push(T::of(mu + c.stdev * z));
            }
        }
        Dataset::from_flat(dim, data)
    }
}
