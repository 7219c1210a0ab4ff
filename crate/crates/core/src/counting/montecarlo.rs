//! Permanent-based Monte Carlo estimator.
//!
//! One sample draws `m * n` independent standard exponentials `g_ij` (times an
//! optional weight `w_ij`), fills block `R_i x C_j` of an `N x N` matrix with
//! copies of it, and takes the exact permanent. The mean permanent divided by
//! `prod r_i! prod c_j!` is the (weighted) number of tables.

use rayon::prelude::*;
use serde::Serialize;

use super::formulas::{margin_blocks, margin_factorials};
use super::{Margins, WeightMatrix};
use crate::error::{Error, Result};
use crate::permanent::{build_block_matrix, permanent_exact};
use crate::rng::{standard_exponential, stream};
use crate::scalar::{NeumaierSum, Scalar};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Point estimate with its sampling uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub num_samples: usize,
    pub seed: u64,
    /// The raw permanents were divided by `prod r_i! prod c_j!`.
    pub exact_divisor_applied: bool,
}

impl CountEstimate {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Exponential cell values for sample `index`, drawn row-major from stream `index`.
pub fn draw_cells(m: usize, n: usize, seed: u64, index: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, index);
    (0..m)
        .map(|_| (0..n).map(|_| standard_exponential(&mut rng)).collect())
        .collect()
}

/// Permanent of the block matrix built from `cells`.
pub fn block_permanent(margins: &Margins, cells: &[Vec<f64>], permanent_limit: usize) -> Result<f64> {
    let a = build_block_matrix(&margin_blocks(margins), cells)?;
    permanent_exact(&a, permanent_limit)
}

fn check_run(margins: &Margins, samples: usize, permanent_limit: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let size = margins.total() as usize;
    if size > permanent_limit {
        return Err(Error::SizeLimit {
            size,
            limit: permanent_limit,
        });
    }
    Ok(())
}

/// Raw permanents `alpha_s` for `s = 0..samples`, in sample order.
pub fn sample_permanents(
    margins: &Margins,
    weights: Option<&WeightMatrix<f64>>,
    samples: usize,
    seed: u64,
    permanent_limit: usize,
) -> Result<Vec<f64>> {
    check_run(margins, samples, permanent_limit)?;
    if let Some(w) = weights {
        w.check_shape(margins)?;
    }
    let (m, n) = (margins.num_rows(), margins.num_cols());
    (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut cells = draw_cells(m, n, seed, s as u64);
            if let Some(w) = weights {
                for (row, wrow) in cells.iter_mut().zip(w.rows()) {
                    for (c, wv) in row.iter_mut().zip(wrow) {
                        *c *= wv;
                    }
                }
            }
            block_permanent(margins, &cells, permanent_limit)
        })
        .collect()
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = f64::sum_terms(values.iter().copied()) / n;
    let ss = f64::sum_terms(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, ss / (n - 1.0))
}

/// Mean, standard error and 95% normal interval of `values / divisor`.
pub fn summarize(values: &[f64], divisor: f64, seed: u64) -> CountEstimate {
    let (mean, var) = mean_and_var(values);
    let mean = mean / divisor;
    let std_err = (var / values.len() as f64).sqrt() / divisor;
    CountEstimate {
        mean,
        std_err,
        ci_low: mean - Z_95 * std_err,
        ci_high: mean + Z_95 * std_err,
        num_samples: values.len(),
        seed,
        exact_divisor_applied: true,
    }
}

fn divisor(margins: &Margins) -> f64 {
    f64::from_biguint(&margin_factorials(margins))
}

/// Unbiased estimate of the number of tables.
pub fn mc_estimate_count(
    margins: &Margins,
    samples: usize,
    seed: u64,
    permanent_limit: usize,
) -> Result<CountEstimate> {
    let values = sample_permanents(margins, None, samples, seed, permanent_limit)?;
    Ok(summarize(&values, divisor(margins), seed))
}

/// Unbiased estimate of `sum over tables of prod w_ij^d_ij`.
pub fn mc_weighted_count(
    margins: &Margins,
    weights: &WeightMatrix<f64>,
    samples: usize,
    seed: u64,
    permanent_limit: usize,
) -> Result<CountEstimate> {
    let values = sample_permanents(margins, Some(weights), samples, seed, permanent_limit)?;
    Ok(summarize(&values, divisor(margins), seed))
}

/// `exp(rho^2 (2 rho)!)`, kept as its exponent once it overflows `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundedMarginBound {
    Value(f64),
    Exponent(f64),
}

pub fn bounded_margin_ratio_bound(rho: u32) -> BoundedMarginBound {
    let fact: f64 = (1..=2 * rho).map(f64::from).product();
    let exponent = f64::from(rho) * f64::from(rho) * fact;
    let value = exponent.exp();
    if value.is_finite() {
        BoundedMarginBound::Value(value)
    } else {
        BoundedMarginBound::Exponent(exponent)
    }
}

/// Second-moment diagnostics of the estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    /// `mean(alpha^2) / mean(alpha)^2`.
    pub empirical_ratio: f64,
    /// Delta-method standard error of `empirical_ratio`.
    pub ratio_std_err: f64,
    /// `2^(2N)`.
    pub bound_part2: f64,
    /// Bounded-margin constant; absent for weighted runs.
    pub bound_part3: Option<BoundedMarginBound>,
    /// `empirical_ratio - 3 * ratio_std_err <= bound_part2`.
    pub within_bound: bool,
    /// Chebyshev sample size for relative error [`CHEBYSHEV_EPSILON`] with
    /// probability [`CHEBYSHEV_CONFIDENCE`], from the empirical ratio.
    pub chebyshev_samples: u64,
    pub num_samples: usize,
    pub seed: u64,
}

pub const CHEBYSHEV_EPSILON: f64 = 0.1;
pub const CHEBYSHEV_CONFIDENCE: f64 = 2.0 / 3.0;

/// Samples needed so that the mean of i.i.d. copies of `alpha` is within
/// relative error `epsilon` with probability `p`, given
/// `E alpha^2 / E^2 alpha = ratio`.
pub fn chebyshev_sample_count(ratio: f64, epsilon: f64, p: f64) -> u64 {
    ((ratio - 1.0).max(0.0) / ((1.0 - p) * epsilon * epsilon)).ceil().max(1.0) as u64
}

/// Empirical ratio and its delta-method standard error.
pub fn moment_ratio(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut s = [NeumaierSum::default(); 4];
    for &v in values {
        let mut p = v;
        for acc in &mut s {
            acc.add(p);
            p *= v;
        }
    }
    let [m1, m2, m3, m4] = s.map(|acc| acc.value() / n);
    let ratio = m2 / (m1 * m1);
    let var_a = m2 - m1 * m1;
    let var_b = m4 - m2 * m2;
    let cov_ab = m3 - m1 * m2;
    let g_b = 1.0 / (m1 * m1);
    let g_a = -2.0 * m2 / (m1 * m1 * m1);
    let var_r = (g_b * g_b * var_b + 2.0 * g_a * g_b * cov_ab + g_a * g_a * var_a) / n;
    (ratio, var_r.max(0.0).sqrt())
}

fn report(values: &[f64], margins: &Margins, weighted: bool, seed: u64) -> VarianceReport {
    let (ratio, se) = moment_ratio(values);
    let bound_part2 = 2f64.powi(2 * margins.total() as i32);
    VarianceReport {
        empirical_ratio: ratio,
        ratio_std_err: se,
        bound_part2,
        bound_part3: (!weighted).then(|| bounded_margin_ratio_bound(margins.max_marginal())),
        within_bound: ratio - 3.0 * se <= bound_part2,
        chebyshev_samples: chebyshev_sample_count(ratio, CHEBYSHEV_EPSILON, CHEBYSHEV_CONFIDENCE),
        num_samples: values.len(),
        seed,
    }
}

pub fn variance_ratio_report(
    margins: &Margins,
    samples: usize,
    seed: u64,
    permanent_limit: usize,
) -> Result<VarianceReport> {
    let values = sample_permanents(margins, None, samples, seed, permanent_limit)?;
    Ok(report(&values, margins, false, seed))
}

pub fn weighted_variance_ratio_report(
    margins: &Margins,
    weights: &WeightMatrix<f64>,
    samples: usize,
    seed: u64,
    permanent_limit: usize,
) -> Result<VarianceReport> {
    let values = sample_permanents(margins, Some(weights), samples, seed, permanent_limit)?;
    Ok(report(&values, margins, true, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permanent::DEFAULT_PERMANENT_LIMIT;

    fn m(rows: &[u32], cols: &[u32]) -> Margins {
        Margins::new(rows.to_vec(), cols.to_vec()).unwrap()
    }

    #[test]
    fn single_sample_is_the_two_term_permanent() {
        let margins = m(&[1, 1], &[1, 1]);
        let values = sample_permanents(&margins, None, 5, 99, 22).unwrap();
        for (s, v) in values.iter().enumerate() {
            let g = draw_cells(2, 2, 99, s as u64);
            let direct = g[0][0] * g[1][1] + g[0][1] * g[1][0];
            assert!((v - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(bounded_margin_ratio_bound(1), BoundedMarginBound::Value(2f64.exp()));
        assert_eq!(bounded_margin_ratio_bound(2), BoundedMarginBound::Value(96f64.exp()));
        assert_eq!(bounded_margin_ratio_bound(3), BoundedMarginBound::Exponent(6480.0));
        let r = variance_ratio_report(&m(&[1, 2, 3], &[3, 3]), 100, 1, 22).unwrap();
        assert_eq!(r.bound_part2, 4096.0);
        assert_eq!(chebyshev_sample_count(2.5, 0.1, 2.0 / 3.0), 450);
    }

    #[test]
    fn errors() {
        let margins = m(&[12, 12], &[12, 12]);
        assert!(matches!(
            mc_estimate_count(&margins, 10, 1, DEFAULT_PERMANENT_LIMIT),
            Err(Error::SizeLimit { size: 24, .. })
        ));
        assert!(mc_estimate_count(&m(&[1], &[1]), 1, 1, 22).is_err());
        let w = WeightMatrix::<f64>::ones(2, 2);
        assert!(mc_weighted_count(&m(&[2], &[2]), &w, 10, 1, 22).is_err());
    }

    #[test]
    fn zero_weight_row_gives_zero() {
        let margins = m(&[1, 2], &[2, 1]);
        let w = WeightMatrix::new(vec![vec![0.0, 0.0], vec![1.0, 3.0]]).unwrap();
        let est = mc_weighted_count(&margins, &w, 200, 4, 22).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn delta_method_is_sane() {
        // constant samples: ratio exactly one, no spread
        let (r, se) = moment_ratio(&[2.0; 10]);
        assert!((r - 1.0).abs() < 1e-15 && se < 1e-12);
    }
}
