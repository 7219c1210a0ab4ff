//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// All ways to write `total` as `parts` positive integers, in lex order.
pub fn positive_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            if left >= 1 {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for first in 1..left {
            cur.push(first);
            go(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Every non-negative table with the given margins, found by trying all
/// values of each cell and filtering at the end of each row.
pub fn tables(rows: &[u32], cols: &[u32]) -> Vec<Vec<Vec<u32>>> {
    fn rows_with_sum(sum: u32, len: usize, caps: &[u32]) -> Vec<Vec<u32>> {
        if len == 0 {
            return if sum == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for v in 0..=sum.min(caps[0]) {
            for mut rest in rows_with_sum(sum - v, len - 1, &caps[1..]) {
                rest.insert(0, v);
                out.push(rest);
            }
        }
        out
    }
    fn go(i: usize, rows: &[u32], left: Vec<u32>, acc: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if i == rows.len() {
            if left.iter().all(|&c| c == 0) {
                out.push(acc.clone());
            }
            return;
        }
        for row in rows_with_sum(rows[i], left.len(), &left) {
            let next: Vec<u32> = left.iter().zip(&row).map(|(a, b)| a - b).collect();
            acc.push(row);
            go(i + 1, rows, next, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(0, rows, cols.to_vec(), &mut Vec::new(), &mut out);
    out
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).map(BigInt::from).product()
}

/// `sum over tables of prod w_ij^d_ij / d_ij!`.
pub fn weighted_fy_bruteforce(rows: &[u32], cols: &[u32], w: &[Vec<BigRational>]) -> BigRational {
    let mut total = BigRational::zero();
    for t in tables(rows, cols) {
        let mut term = BigRational::one();
        for (i, row) in t.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                term *= num_traits::pow(w[i][j].clone(), d as usize);
                term /= BigRational::from_integer(factorial(d));
            }
        }
        total += term;
    }
    total
}

/// Composite Simpson rule on `[a, b]` with `steps` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
