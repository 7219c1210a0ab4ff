use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row and column sums of a table, validated to share one total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MarginsRaw", into = "MarginsRaw")]
pub struct Margins {
    rows: Vec<u32>,
    cols: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MarginsRaw {
    rows: Vec<u32>,
    cols: Vec<u32>,
}

impl TryFrom<MarginsRaw> for Margins {
    type Error = Error;
    fn try_from(raw: MarginsRaw) -> Result<Self> {
        Margins::new(raw.rows, raw.cols)
    }
}

impl From<Margins> for MarginsRaw {
    fn from(m: Margins) -> Self {
        MarginsRaw {
            rows: m.rows,
            cols: m.cols,
        }
    }
}

impl Margins {
    pub fn new(rows: Vec<u32>, cols: Vec<u32>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidMargins(
                "need at least one row and one column".into(),
            ));
        }
        if rows.contains(&0) || cols.contains(&0) {
            return Err(Error::InvalidMargins("margins must be positive".into()));
        }
        let row_total: u64 = rows.iter().map(|&r| u64::from(r)).sum();
        let col_total: u64 = cols.iter().map(|&c| u64::from(c)).sum();
        if row_total != col_total {
            return Err(Error::InvalidMargins(format!(
                "row sums total {row_total} but column sums total {col_total}"
            )));
        }
        if row_total > u64::from(u32::MAX) {
            return Err(Error::InvalidMargins("total is too large".into()));
        }
        Ok(Margins { rows, cols })
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Common total `N`.
    pub fn total(&self) -> u32 {
        self.rows.iter().sum()
    }

    /// Largest row or column sum.
    pub fn max_marginal(&self) -> u32 {
        self.rows.iter().chain(&self.cols).copied().max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Margins {
        Margins {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Row `i` of the result is row `row_perm[i]` of `self`; likewise columns.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Margins {
        Margins {
            rows: row_perm.iter().map(|&i| self.rows[i]).collect(),
            cols: col_perm.iter().map(|&j| self.cols[j]).collect(),
        }
    }
}

/// Non-negative `m x n` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T = f64> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 {
            return Err(Error::DimensionMismatch("empty weight matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("ragged weight matrix".into()));
        }
        if rows
            .iter()
            .flatten()
            .any(|w| !w.is_finite() || w.to_f64() < 0.0)
        {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        Ok(WeightMatrix { rows })
    }

    pub fn ones(m: usize, n: usize) -> Self {
        WeightMatrix {
            rows: vec![vec![T::one(); n]; m],
        }
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn check_shape(&self, margins: &Margins) -> Result<()> {
        if self.num_rows() != margins.num_rows() || self.num_cols() != margins.num_cols() {
            return Err(Error::DimensionMismatch(format!(
                "weights are {}x{} but margins are {}x{}",
                self.num_rows(),
                self.num_cols(),
                margins.num_rows(),
                margins.num_cols()
            )));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> WeightMatrix<f64> {
        WeightMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(Scalar::to_f64).collect())
                .collect(),
        }
    }
}

/// Numerical rank cut-off for singular values, relative to `max(1, sigma_max)`.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Rank-revealing factorization `W = U V^T` with `U` of size `m x k` and
/// `V` of size `n x k`.
#[derive(Debug, Clone)]
pub struct LowRankFactors {
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

impl LowRankFactors {
    pub fn rank(&self) -> usize {
        self.left.first().map_or(0, Vec::len)
    }
}

impl WeightMatrix<f64> {
    fn svd(&self) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
        let (m, n) = (self.num_rows(), self.num_cols());
        DMatrix::from_fn(m, n, |i, j| self.rows[i][j]).svd(true, true)
    }

    fn cutoff(sv: &[f64]) -> f64 {
        RANK_TOLERANCE * sv.iter().copied().fold(1.0, f64::max)
    }

    pub fn numerical_rank(&self) -> usize {
        let svd = self.svd();
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let cut = Self::cutoff(&sv);
        sv.iter().filter(|&&s| s > cut).count()
    }

    pub fn low_rank_factors(&self) -> LowRankFactors {
        let svd = self.svd();
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let cut = Self::cutoff(&sv);
        let keep: Vec<usize> = (0..sv.len()).filter(|&t| sv[t] > cut).collect();
        let left = (0..self.num_rows())
            .map(|i| keep.iter().map(|&t| u[(i, t)] * sv[t]).collect())
            .collect();
        let right = (0..self.num_cols())
            .map(|j| keep.iter().map(|&t| vt[(t, j)]).collect())
            .collect();
        LowRankFactors { left, right }
    }
}
