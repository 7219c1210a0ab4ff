//! Exact table counts.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::Margins;
use crate::error::{Error, Result};

/// Default number of search nodes or memo states the exact counters may use.
pub const DEFAULT_EXACT_BUDGET: usize = 50_000_000;

/// Calls `visit` with every table (row-major, `m * n` entries) matching the
/// margins. Cells are filled one at a time; the last cell of each row and
/// column is forced by the remaining sums.
pub fn for_each_table<F>(margins: &Margins, budget: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[u32]),
{
    let (m, n) = (margins.num_rows(), margins.num_cols());
    let mut search = TableSearch {
        m,
        n,
        row_rem: margins.rows().to_vec(),
        col_rem: margins.cols().to_vec(),
        table: vec![0; m * n],
        nodes: 0,
        budget,
    };
    search.fill(0, &mut visit)
}

struct TableSearch {
    m: usize,
    n: usize,
    row_rem: Vec<u32>,
    col_rem: Vec<u32>,
    table: Vec<u32>,
    nodes: usize,
    budget: usize,
}

impl TableSearch {
    fn fill<F: FnMut(&[u32])>(&mut self, cell: usize, visit: &mut F) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget {
                what: "table enumeration",
                limit: self.budget,
                reached: self.nodes,
            });
        }
        if cell == self.m * self.n {
            if self.col_rem.iter().all(|&c| c == 0) {
                visit(&self.table);
            }
            return Ok(());
        }
        let (i, j) = (cell / self.n, cell % self.n);
        let (lo, hi) = if j + 1 == self.n {
            (self.row_rem[i], self.row_rem[i])
        } else if i + 1 == self.m {
            (self.col_rem[j], self.col_rem[j])
        } else {
            (0, self.row_rem[i].min(self.col_rem[j]))
        };
        if hi > self.row_rem[i] || hi > self.col_rem[j] {
            return Ok(());
        }
        for d in lo..=hi {
            self.table[cell] = d;
            self.row_rem[i] -= d;
            self.col_rem[j] -= d;
            let r = self.fill(cell + 1, visit);
            self.row_rem[i] += d;
            self.col_rem[j] += d;
            r?;
        }
        self.table[cell] = 0;
        Ok(())
    }
}

/// Counts tables by exhaustive enumeration.
pub fn exact_count_bruteforce(margins: &Margins, budget: usize) -> Result<BigUint> {
    let mut count: u64 = 0;
    for_each_table(margins, budget, |_| count += 1)?;
    Ok(BigUint::from(count))
}

/// Column-by-column dynamic program over the multiset of remaining row sums.
///
/// Rows are interchangeable for the columns still to be filled, so states are
/// keyed by the sorted remaining row sums.
pub fn exact_count_dp(margins: &Margins, budget: usize) -> Result<BigUint> {
    ColumnDp::new(margins, None, budget).run()
}

/// Number of 0-1 tables with the given margins. Infeasible margins give 0.
pub fn exact_count_01(margins: &Margins, budget: usize) -> Result<BigUint> {
    ColumnDp::new(margins, Some(1), budget).run()
}

struct ColumnDp<'a> {
    cols: &'a [u32],
    rows: Vec<u32>,
    cell_cap: Option<u32>,
    memo: HashMap<(usize, Vec<u32>), BigUint>,
    budget: usize,
}

impl<'a> ColumnDp<'a> {
    fn new(margins: &'a Margins, cell_cap: Option<u32>, budget: usize) -> Self {
        let mut rows = margins.rows().to_vec();
        rows.sort_unstable();
        ColumnDp {
            cols: margins.cols(),
            rows,
            cell_cap,
            memo: HashMap::new(),
            budget,
        }
    }

    fn run(mut self) -> Result<BigUint> {
        let rows = std::mem::take(&mut self.rows);
        self.count(0, rows)
    }

    fn count(&mut self, col: usize, rem: Vec<u32>) -> Result<BigUint> {
        if col == self.cols.len() {
            return Ok(if rem.iter().all(|&r| r == 0) {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        // the remaining columns must absorb exactly the remaining row mass
        let left: u64 = rem.iter().map(|&r| u64::from(r)).sum();
        let needed: u64 = self.cols[col..].iter().map(|&c| u64::from(c)).sum();
        if left != needed {
            return Ok(BigUint::zero());
        }
        let key = (col, rem);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let (col, rem) = key;
        let mut splits = Vec::new();
        let mut current = rem.clone();
        self.distribute(&rem, 0, self.cols[col], &mut current, &mut splits);
        let mut total = BigUint::zero();
        for mut next in splits {
            next.sort_unstable();
            total += self.count(col + 1, next)?;
        }
        if self.memo.len() >= self.budget {
            return Err(Error::Budget {
                what: "dynamic programming states",
                limit: self.budget,
                reached: self.memo.len() + 1,
            });
        }
        self.memo.insert((col, rem), total.clone());
        Ok(total)
    }

    /// Every way to take `left` units from the rows at positions `pos..`.
    fn distribute(
        &self,
        rem: &[u32],
        pos: usize,
        left: u32,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == rem.len() {
            if left == 0 {
                out.push(current.clone());
            }
            return;
        }
        let capacity_after: u64 = rem[pos + 1..]
            .iter()
            .map(|&r| u64::from(self.cell_cap.map_or(r, |c| r.min(c))))
            .sum();
        let mut hi = rem[pos].min(left);
        if let Some(c) = self.cell_cap {
            hi = hi.min(c);
        }
        for d in 0..=hi {
            if u64::from(left - d) > capacity_after {
                continue;
            }
            current[pos] = rem[pos] - d;
            self.distribute(rem, pos + 1, left - d, current, out);
        }
        current[pos] = rem[pos];
    }
}
