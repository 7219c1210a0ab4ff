//! Exact permanents and the matrices the counting identities are evaluated on.

use crate::error::{Error, Result};
use crate::polynomial::LinearForm;
use crate::scalar::Scalar;

/// Largest matrix [`permanent_exact`] accepts unless told otherwise.
pub const DEFAULT_PERMANENT_LIMIT: usize = 22;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    size: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn new(size: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("matrix entry is not finite".into()));
        }
        Ok(SquareMatrix { size, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        if let Some(row) = rows.iter().find(|r| r.len() != size) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a matrix with {size} rows",
                row.len()
            )));
        }
        Self::new(size, rows.into_iter().flatten().collect())
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![T::zero(); size * size];
        for i in 0..size {
            entries[i * size + i] = T::one();
        }
        SquareMatrix { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.size).map(|i| self.row(i).to_vec()).collect()
    }

    /// Entry `(i, j)` of the result is entry `(row_perm[i], col_perm[j])` of `self`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let n = self.size;
        let mut entries = Vec::with_capacity(n * n);
        for &i in row_perm {
            for &j in col_perm {
                entries.push(self.get(i, j).clone());
            }
        }
        SquareMatrix { size: n, entries }
    }

    pub fn scale_row(&mut self, i: usize, t: &T) {
        let n = self.size;
        for e in &mut self.entries[i * n..(i + 1) * n] {
            *e = e.clone() * t.clone();
        }
    }
}

/// Ryser's formula with Gray-code subset order:
/// `per A = (-1)^N sum_S (-1)^|S| prod_i sum_{j in S} a_ij`.
///
/// Consecutive subsets differ in one column, so each step updates the row
/// sums in `O(N)`.
pub fn permanent_exact<T: Scalar>(m: &SquareMatrix<T>, limit: usize) -> Result<T> {
    let n = m.size;
    if n > limit || n >= 63 {
        return Err(Error::SizeLimit { size: n, limit });
    }
    if n == 0 {
        return Ok(T::one());
    }
    let mut row_sums = vec![T::zero(); n];
    let mut k: u64 = 0;
    let last: u64 = 1 << n;
    let terms = std::iter::from_fn(|| {
        k += 1;
        if k >= last {
            return None;
        }
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        let entering = gray & (1 << j) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let a = m.get(i, j).clone();
            *s = if entering { s.clone() + a } else { s.clone() - a };
        }
        let prod = row_sums
            .iter()
            .fold(T::one(), |acc, s| acc * s.clone());
        Some(if gray.count_ones() % 2 == 1 { -prod } else { prod })
    });
    let total = T::sum_terms(terms);
    Ok(if n % 2 == 1 { -total } else { total })
}

/// `B = (<f_i, g_j>)`.
pub fn gram_matrix<T: Scalar>(f: &[LinearForm<T>], g: &[LinearForm<T>]) -> Result<SquareMatrix<T>> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} forms paired against {}",
            f.len(),
            g.len()
        )));
    }
    let mut entries = Vec::with_capacity(f.len() * f.len());
    for fi in f {
        for gj in g {
            entries.push(fi.dot(gj)?);
        }
    }
    SquareMatrix::new(f.len(), entries)
}

/// `<f_1 ... f_m, g_1 ... g_m>` as the permanent of the Gram matrix.
pub fn pairing_via_permanent<T: Scalar>(f: &[LinearForm<T>], g: &[LinearForm<T>]) -> Result<T> {
    permanent_exact(&gram_matrix(f, g)?, DEFAULT_PERMANENT_LIMIT)
}

/// Partition of `N` rows into consecutive blocks of sizes `row_blocks` and of
/// `N` columns into blocks of sizes `col_blocks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    row_blocks: Vec<usize>,
    col_blocks: Vec<usize>,
}

impl BlockStructure {
    pub fn new(row_blocks: Vec<usize>, col_blocks: Vec<usize>) -> Result<Self> {
        if row_blocks.is_empty() || col_blocks.is_empty() {
            return Err(Error::DimensionMismatch("empty block partition".into()));
        }
        if row_blocks.iter().chain(&col_blocks).any(|&b| b == 0) {
            return Err(Error::DimensionMismatch("block of size zero".into()));
        }
        let (rn, cn) = (
            row_blocks.iter().sum::<usize>(),
            col_blocks.iter().sum::<usize>(),
        );
        if rn != cn {
            return Err(Error::DimensionMismatch(format!(
                "row blocks cover {rn} indices, column blocks cover {cn}"
            )));
        }
        Ok(BlockStructure {
            row_blocks,
            col_blocks,
        })
    }

    pub fn size(&self) -> usize {
        self.row_blocks.iter().sum()
    }

    pub fn row_blocks(&self) -> &[usize] {
        &self.row_blocks
    }

    pub fn col_blocks(&self) -> &[usize] {
        &self.col_blocks
    }

    /// Block index of every row (or column) position.
    fn owners(blocks: &[usize]) -> Vec<usize> {
        blocks
            .iter()
            .enumerate()
            .flat_map(|(b, &len)| std::iter::repeat(b).take(len))
            .collect()
    }
}

/// Fills block `R_i x C_j` with copies of `cells[i][j]`.
pub fn build_block_matrix<T: Scalar>(
    structure: &BlockStructure,
    cells: &[Vec<T>],
) -> Result<SquareMatrix<T>> {
    let (m, n) = (structure.row_blocks.len(), structure.col_blocks.len());
    if cells.len() != m || cells.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "cell values must be {m}x{n}"
        )));
    }
    let rows = BlockStructure::owners(&structure.row_blocks);
    let cols = BlockStructure::owners(&structure.col_blocks);
    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            entries.push(cells[i][j].clone());
        }
    }
    SquareMatrix::new(rows.len(), entries)
}
