//! Table counting through products of low-rank symmetric polynomials.
//!
//! The number of tables is the coefficient of `x^c` in `prod_i h_{r_i}(x)`.
//! Replacing every `h_r` by a randomized low-rank approximation gives a
//! polynomial of small rank, whose pairing with `x^c` can be taken in the
//! reduced variables. Each coefficient of the approximation is within
//! `(1 +- eps)^r` of the exact one, so the count lands within `(1 +- eps)^N`.
//!
//! Two evaluation routes compute the same number:
//!
//! - [`PairingRoute::Reduced`] multiplies the row polynomials in the reduced
//!   variables and pairs against the transported target. Its cost grows
//!   with the total rank and is bounded by the term cap.
//! - [`PairingRoute::Direct`] expands every row polynomial in the `n` table
//!   columns and multiplies there, discarding monomials above the target.

use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use super::Margins;
use super::WeightMatrix;
use crate::error::{Error, Result};
use crate::polynomial::{
    expand_form_power, poly_mul, poly_mul_bounded, reduced_pairing, scalar_product,
    substitute_forms, LinearForm, Monomial, SparsePolynomial, DEFAULT_TERM_CAP,
};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::symmetric_lowrank::{
    build_e_tilde, build_h_tilde, complete_sample_plan, delta_from_epsilon, solve_threshold,
    truncated_exponential_rows, InnerPoly, LowRankPoly,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingRoute {
    /// Reduced when the total rank is below the number of columns.
    Auto,
    Reduced,
    Direct,
}

impl FromStr for PairingRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(PairingRoute::Auto),
            "reduced" => Ok(PairingRoute::Reduced),
            "direct" => Ok(PairingRoute::Direct),
            other => Err(Error::InvalidParameter(format!("unknown route `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankOptions {
    pub route: PairingRoute,
    pub term_cap: usize,
    /// Independent repetitions; the median value is reported.
    pub repeats: usize,
    /// Overrides the Azuma-derived number of sampled terms per polynomial.
    pub samples: Option<usize>,
    /// Largest numerical rank accepted for weight matrices.
    pub rank_bound: usize,
}

impl Default for LowRankOptions {
    fn default() -> Self {
        LowRankOptions {
            route: PairingRoute::Auto,
            term_cap: DEFAULT_TERM_CAP,
            repeats: 1,
            samples: None,
            rank_bound: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowRankResult {
    pub value: f64,
    /// `(1 - eps)^N`: the value is at least this multiple of the exact count
    /// with probability at least 2/3 per repetition.
    pub band_low: f64,
    /// `(1 + eps)^N`.
    pub band_high: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub route: PairingRoute,
    /// Number of reduced variables the product lives in.
    pub reduced_vars: usize,
    /// Sampled terms per distinct approximating polynomial.
    pub samples: Vec<usize>,
    pub repeat_values: Vec<f64>,
}

impl LowRankResult {
    /// Whether `value` lies within the declared band around `exact`.
    pub fn within_band(&self, exact: f64) -> bool {
        exact * self.band_low <= self.value && self.value <= exact * self.band_high
    }
}

/// What the row product is paired against.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// The monomial `x^c`; the result is its coefficient.
    Columns(Vec<u32>),
    /// `prod_k sum_{c in C_k} x_k^c / c!`; the result is the sum of the
    /// coefficients of all `x^c` with every `c_k in C_k`.
    ColumnSets(Vec<Vec<u32>>),
}

/// `H(x) = prod_rows factors[rows[i]](x)`.
///
/// Factors sharing a block id have identical forms and share reduced
/// variables.
#[derive(Debug, Clone)]
pub struct RowProduct<T> {
    num_vars: usize,
    factors: Vec<LowRankPoly<T>>,
    blocks: Vec<usize>,
    rows: Vec<usize>,
}

impl<T: Scalar> RowProduct<T> {
    pub fn new(
        num_vars: usize,
        factors: Vec<LowRankPoly<T>>,
        blocks: Vec<usize>,
        rows: Vec<usize>,
    ) -> Result<Self> {
        if blocks.len() != factors.len() {
            return Err(Error::DimensionMismatch("one block id per factor".into()));
        }
        if rows.iter().any(|&f| f >= factors.len()) {
            return Err(Error::DimensionMismatch("row refers to a missing factor".into()));
        }
        if factors.iter().any(|f| f.num_vars() != num_vars) {
            return Err(Error::DimensionMismatch(format!(
                "factors must live in {num_vars} variables"
            )));
        }
        for (a, fa) in factors.iter().enumerate() {
            for (b, fb) in factors.iter().enumerate().skip(a + 1) {
                if blocks[a] == blocks[b] && fa.forms() != fb.forms() {
                    return Err(Error::DimensionMismatch(format!(
                        "factors {a} and {b} share a block but not their forms"
                    )));
                }
            }
        }
        Ok(RowProduct {
            num_vars,
            factors,
            blocks,
            rows,
        })
    }

    /// One factor per row, each in its own block.
    pub fn per_row(num_vars: usize, factors: Vec<LowRankPoly<T>>) -> Result<Self> {
        let ids: Vec<usize> = (0..factors.len()).collect();
        Self::new(num_vars, factors, ids.clone(), ids)
    }

    /// Distinct blocks used by some row, in order of first use, with the
    /// factor that represents them.
    fn used_blocks(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &f in &self.rows {
            let b = self.blocks[f];
            if !out.iter().any(|&(ob, _)| ob == b) {
                out.push((b, f));
            }
        }
        out
    }

    pub fn reduced_vars(&self) -> usize {
        self.used_blocks()
            .iter()
            .map(|&(_, f)| self.factors[f].rank())
            .sum()
    }

    pub fn resolve(&self, route: PairingRoute) -> PairingRoute {
        match route {
            PairingRoute::Auto if self.reduced_vars() < self.num_vars => PairingRoute::Reduced,
            PairingRoute::Auto => PairingRoute::Direct,
            r => r,
        }
    }
}

fn check_target(num_vars: usize, target: &Target) -> Result<()> {
    let len = match target {
        Target::Columns(c) => c.len(),
        Target::ColumnSets(s) => s.len(),
    };
    if len != num_vars {
        return Err(Error::DimensionMismatch(format!(
            "target has {len} columns, polynomials have {num_vars} variables"
        )));
    }
    Ok(())
}

/// `<H, target>` (for `x^c`, the coefficient of `x^c`) by the chosen route.
pub fn pair_row_product<T: Scalar>(
    product: &RowProduct<T>,
    target: &Target,
    route: PairingRoute,
    term_cap: usize,
) -> Result<(T, PairingRoute)> {
    check_target(product.num_vars, target)?;
    let route = product.resolve(route);
    let value = match route {
        PairingRoute::Direct => direct_route(product, target, term_cap)?,
        _ => reduced_route(product, target, term_cap)?,
    };
    Ok((value, route))
}

fn direct_route<T: Scalar>(product: &RowProduct<T>, target: &Target, term_cap: usize) -> Result<T> {
    let caps: Vec<u32> = match target {
        Target::Columns(c) => c.clone(),
        Target::ColumnSets(sets) => {
            if sets.iter().any(Vec::is_empty) {
                return Ok(T::zero());
            }
            sets.iter().map(|s| *s.iter().max().expect("non-empty")).collect()
        }
    };
    let mut ambient: Vec<Option<SparsePolynomial<T>>> = vec![None; product.factors.len()];
    let mut h = SparsePolynomial::one(product.num_vars);
    for &f in &product.rows {
        if ambient[f].is_none() {
            ambient[f] = Some(product.factors[f].expand(term_cap)?);
        }
        h = poly_mul_bounded(&h, ambient[f].as_ref().expect("filled"), term_cap, Some(&caps))?;
    }
    Ok(match target {
        Target::Columns(c) => h.coeff(&Monomial::new(c.clone())),
        Target::ColumnSets(sets) => T::sum_terms(
            h.terms()
                .filter(|(a, _)| {
                    a.exponents()
                        .iter()
                        .zip(sets)
                        .all(|(e, s)| s.contains(e))
                })
                .map(|(_, c)| c.clone()),
        ),
    })
}

fn embed<T: Scalar>(q: &SparsePolynomial<T>, offset: usize, total: usize) -> SparsePolynomial<T> {
    let mut out = SparsePolynomial::zero(total);
    for (a, c) in q.terms() {
        let mut e = vec![0; total];
        e[offset..offset + a.num_vars()].copy_from_slice(a.exponents());
        out.add_term(Monomial::new(e), c.clone());
    }
    out
}

fn reduced_route<T: Scalar>(product: &RowProduct<T>, target: &Target, term_cap: usize) -> Result<T> {
    let used = product.used_blocks();
    let k: usize = used.iter().map(|&(_, f)| product.factors[f].rank()).sum();
    let over = |what: &'static str, reached: u128| Error::Budget {
        what,
        limit: term_cap,
        reached: usize::try_from(reached).unwrap_or(usize::MAX),
    };
    // every stored exponent vector has k entries, so memory scales with k * terms
    let terms: u128 = product
        .rows
        .iter()
        .map(|&f| product.factors[f].inner_terms() as u128)
        .fold(1u128, |acc, t| acc.saturating_mul(t));
    if terms.saturating_mul(k.max(1) as u128) > term_cap as u128 {
        return Err(over("reduced row product", terms.saturating_mul(k as u128)));
    }
    if k == 0 {
        // every factor is a constant
        let mut c = T::one();
        for &f in &product.rows {
            c = c * product.factors[f]
                .inner_polynomial()
                .coeff(&Monomial::one(0));
        }
        let degree_zero = match target {
            Target::Columns(cols) => cols.iter().all(|&x| x == 0),
            Target::ColumnSets(sets) => sets.iter().all(|s| s.contains(&0)),
        };
        return Ok(if degree_zero { c } else { T::zero() });
    }

    let mut offsets = Vec::with_capacity(used.len());
    let mut forms: Vec<LinearForm<T>> = Vec::with_capacity(k);
    for &(b, f) in &used {
        offsets.push((b, forms.len()));
        forms.extend(product.factors[f].forms().iter().cloned());
    }
    let offset_of = |f: usize| {
        let b = product.blocks[f];
        offsets.iter().find(|(ob, _)| *ob == b).expect("used block").1
    };
    let mut q = SparsePolynomial::one(k);
    for &f in &product.rows {
        let inner = embed(&product.factors[f].inner_polynomial(), offset_of(f), k);
        q = poly_mul(&q, &inner, term_cap)?;
    }

    let n = product.num_vars;
    match target {
        Target::Columns(c) => {
            let g_forms: Vec<LinearForm<T>> = c
                .iter()
                .enumerate()
                .flat_map(|(j, &cj)| {
                    std::iter::repeat_with(move || LinearForm::coordinate(n, j)).take(cj as usize)
                })
                .collect();
            let pairing = reduced_pairing(&q, &forms, &g_forms, term_cap)?;
            let fact: BigUint = c
                .iter()
                .flat_map(|&cj| (1..=cj).map(BigUint::from))
                .product();
            Ok(pairing / T::from_biguint(&fact))
        }
        Target::ColumnSets(sets) => {
            let degree = q.max_degree();
            let mut target_poly = SparsePolynomial::one(n);
            for (j, set) in sets.iter().enumerate() {
                let mut factor = SparsePolynomial::zero(n);
                for &c in set {
                    if c > degree {
                        continue;
                    }
                    let mut e = vec![0; n];
                    e[j] = c;
                    let fact: BigUint = (1..=c).map(BigUint::from).product();
                    factor.add_term(Monomial::new(e), T::one() / T::from_biguint(&fact));
                }
                target_poly = poly_mul(&target_poly, &factor, term_cap)?;
            }
            let target_poly = target_poly.homogeneous_part(degree);
            let transported: Vec<LinearForm<T>> = (0..n)
                .map(|j| LinearForm::new(forms.iter().map(|l| l.coeffs()[j].clone()).collect()))
                .collect::<Result<_>>()?;
            let q_hat = substitute_forms(&target_poly, &transported, term_cap)?;
            scalar_product(&q.homogeneous_part(degree), &q_hat)
        }
    }
}

fn distinct_in_order(values: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    for &v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Factors for `prod_i f_{r_i}` with one shared factor per distinct row sum.
fn shared_by_row_sum<T: Scalar>(
    row_sums: &[u32],
    num_vars: usize,
    mut make: impl FnMut(u32) -> Result<LowRankPoly<T>>,
) -> Result<RowProduct<T>> {
    let distinct = distinct_in_order(row_sums);
    let factors = distinct.iter().map(|&r| make(r)).collect::<Result<Vec<_>>>()?;
    let rows = row_sums
        .iter()
        .map(|r| distinct.iter().position(|d| d == r).expect("present"))
        .collect();
    RowProduct::new(num_vars, factors, (0..distinct.len()).collect(), rows)
}

fn band(epsilon: f64, total: u32) -> (f64, f64) {
    let n = total as i32;
    ((1.0 - epsilon).powi(n), (1.0 + epsilon).powi(n))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Seed of repetition `t`; the first repetition uses the seed itself.
fn repeat_seed(seed: u64, t: usize) -> u64 {
    if t == 0 {
        seed
    } else {
        derive_seed(seed, (1u64 << 32) | t as u64)
    }
}

/// Seed of the approximating polynomial for row sum `r`.
pub fn row_sum_seed(seed: u64, r: u32) -> u64 {
    derive_seed(seed, u64::from(r))
}

struct Run {
    value: f64,
    route: PairingRoute,
    reduced_vars: usize,
    samples: Vec<usize>,
}

fn repeated(
    epsilon: f64,
    seed: u64,
    total: u32,
    options: &LowRankOptions,
    mut run: impl FnMut(u64) -> Result<Run>,
) -> Result<LowRankResult> {
    if options.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let mut runs = Vec::with_capacity(options.repeats);
    for t in 0..options.repeats {
        runs.push(run(repeat_seed(seed, t))?);
    }
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let (band_low, band_high) = band(epsilon, total);
    let first = &runs[0];
    Ok(LowRankResult {
        value: median(&values),
        band_low,
        band_high,
        epsilon,
        seed,
        route: first.route,
        reduced_vars: first.reduced_vars,
        samples: first.samples.clone(),
        repeat_values: values,
    })
}

fn run_product(product: RowProduct<f64>, target: &Target, options: &LowRankOptions, samples: Vec<usize>) -> Result<Run> {
    let (value, route) = pair_row_product(&product, target, options.route, options.term_cap)?;
    Ok(Run {
        value,
        route,
        reduced_vars: product.reduced_vars(),
        samples,
    })
}

/// Approximate number of tables from randomized `h_r` approximations.
pub fn lowrank_asymptotic_count(
    margins: &Margins,
    epsilon: f64,
    seed: u64,
    options: &LowRankOptions,
) -> Result<LowRankResult> {
    let n = margins.num_cols();
    let target = Target::Columns(margins.cols().to_vec());
    repeated(epsilon, seed, margins.total(), options, |s| {
        let mut samples = Vec::new();
        let product = shared_by_row_sum(margins.rows(), n, |r| {
            let h = build_h_tilde(r, n, epsilon, row_sum_seed(s, r), options.samples)?;
            samples.push(h.samples());
            h.to_low_rank()
        })?;
        run_product(product, &target, options, samples)
    })
}

/// The same pipeline with every `h_r` replaced by the exact polynomial.
pub fn lowrank_exact_count(
    margins: &Margins,
    route: PairingRoute,
    term_cap: usize,
) -> Result<BigRational> {
    let n = margins.num_cols();
    let product = shared_by_row_sum(margins.rows(), n, |r| Ok(LowRankPoly::exact_complete(r, n)))?;
    pair_row_product(&product, &Target::Columns(margins.cols().to_vec()), route, term_cap)
        .map(|(v, _)| v)
}

fn check_row_sums(row_sums: &[u32]) -> Result<u32> {
    if row_sums.is_empty() || row_sums.contains(&0) {
        return Err(Error::InvalidMargins("row sums must be positive".into()));
    }
    Ok(row_sums.iter().sum())
}

fn check_sets(sets: &[Vec<u32>], total: u32) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::InvalidParameter("need at least one column".into()));
    }
    if let Some(c) = sets.iter().flatten().find(|&&c| c > total) {
        return Err(Error::InvalidParameter(format!(
            "column sum {c} exceeds the total {total}"
        )));
    }
    Ok(())
}

/// Approximate number of tables with the given row sums whose `k`-th column
/// sum lies in `sets[k]`.
pub fn lowrank_column_sets_count(
    row_sums: &[u32],
    sets: &[Vec<u32>],
    epsilon: f64,
    seed: u64,
    options: &LowRankOptions,
) -> Result<LowRankResult> {
    let total = check_row_sums(row_sums)?;
    check_sets(sets, total)?;
    let n = sets.len();
    let target = Target::ColumnSets(sets.to_vec());
    repeated(epsilon, seed, total, options, |s| {
        let mut samples = Vec::new();
        let product = shared_by_row_sum(row_sums, n, |r| {
            let h = build_h_tilde(r, n, epsilon, row_sum_seed(s, r), options.samples)?;
            samples.push(h.samples());
            h.to_low_rank()
        })?;
        run_product(product, &target, options, samples)
    })
}

pub fn lowrank_column_sets_exact(
    row_sums: &[u32],
    sets: &[Vec<u32>],
    route: PairingRoute,
    term_cap: usize,
) -> Result<BigRational> {
    let total = check_row_sums(row_sums)?;
    check_sets(sets, total)?;
    let n = sets.len();
    let product = shared_by_row_sum(row_sums, n, |r| Ok(LowRankPoly::exact_complete(r, n)))?;
    pair_row_product(&product, &Target::ColumnSets(sets.to_vec()), route, term_cap).map(|(v, _)| v)
}

/// Approximate number of 0-1 tables from randomized `e_r` approximations.
pub fn lowrank_01_count(
    margins: &Margins,
    epsilon: f64,
    seed: u64,
    options: &LowRankOptions,
) -> Result<LowRankResult> {
    let n = margins.num_cols();
    let target = Target::Columns(margins.cols().to_vec());
    let infeasible = margins.rows().iter().any(|&r| r as usize > n)
        || margins.cols().iter().any(|&c| c as usize > margins.num_rows());
    repeated(epsilon, seed, margins.total(), options, |s| {
        if infeasible {
            return Ok(Run {
                value: 0.0,
                route: PairingRoute::Direct,
                reduced_vars: 0,
                samples: Vec::new(),
            });
        }
        let mut samples = Vec::new();
        let product = shared_by_row_sum(margins.rows(), n, |r| {
            let e = build_e_tilde(r, n, epsilon, row_sum_seed(s, r), options.samples)?;
            samples.push(e.samples());
            e.to_low_rank()
        })?;
        run_product(product, &target, options, samples)
    })
}

pub fn lowrank_01_exact(margins: &Margins, route: PairingRoute, term_cap: usize) -> Result<BigRational> {
    let n = margins.num_cols();
    if margins.rows().iter().any(|&r| r as usize > n) {
        return Ok(BigRational::from_i64(0));
    }
    let product = shared_by_row_sum(margins.rows(), n, |r| Ok(LowRankPoly::exact_elementary(r, n)))?;
    pair_row_product(&product, &Target::Columns(margins.cols().to_vec()), route, term_cap)
        .map(|(v, _)| v)
}

/// Approximate `sum over tables of prod w_ij^d_ij`.
///
/// Row `i` uses the forms `l_{i,s}(x) = sum_j w_ij g_{s,j} x_j`, where the
/// truncated exponentials `g_{s,j}` are shared by all rows with the same row
/// sum. With `W = U V^T` of rank `k`, those forms are combinations of the
/// `k * m` forms `sum_j V_jt g_{s,j} x_j`, which is the reduced space the
/// reduced route works in.
pub fn lowrank_weighted_count(
    margins: &Margins,
    weights: &WeightMatrix<f64>,
    epsilon: f64,
    seed: u64,
    options: &LowRankOptions,
) -> Result<LowRankResult> {
    weights.check_shape(margins)?;
    let rank = weights.numerical_rank();
    if rank > options.rank_bound {
        return Err(Error::RankBound {
            rank,
            bound: options.rank_bound,
        });
    }
    let n = margins.num_cols();
    let target = Target::Columns(margins.cols().to_vec());
    let distinct = distinct_in_order(margins.rows());
    repeated(epsilon, seed, margins.total(), options, |s| {
        let mut draws = Vec::with_capacity(distinct.len());
        for &r in &distinct {
            let plan = complete_sample_plan(r, epsilon, n)?;
            let m = options.samples.unwrap_or(plan.samples);
            let spec = solve_threshold(r, delta_from_epsilon(epsilon))?;
            let r_fact: f64 = (1..=r).map(f64::from).product();
            let scale = 1.0 / (r_fact * m as f64);
            draws.push((r, scale, truncated_exponential_rows(&spec, m, n, row_sum_seed(s, r))));
        }
        let samples: Vec<usize> = draws.iter().map(|d| d.2.len()).collect();
        if rank == 0 {
            return Ok(Run {
                value: 0.0,
                route: PairingRoute::Direct,
                reduced_vars: 0,
                samples,
            });
        }
        let reduced_vars: usize = samples.iter().map(|m| m * rank).sum();
        let route = match options.route {
            PairingRoute::Auto if reduced_vars < n => PairingRoute::Reduced,
            PairingRoute::Auto => PairingRoute::Direct,
            r => r,
        };
        let row_draws = |i: usize| {
            let r = margins.rows()[i];
            draws.iter().position(|d| d.0 == r).expect("drawn")
        };
        let product = if route == PairingRoute::Direct {
            let factors = (0..margins.num_rows())
                .map(|i| {
                    let (r, scale, rows) = &draws[row_draws(i)];
                    let forms = rows
                        .iter()
                        .map(|g| {
                            LinearForm::new(
                                g.iter().zip(&weights.rows()[i]).map(|(a, b)| a * b).collect(),
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    LowRankPoly::new(n, forms, InnerPoly::PowerSum {
                        scale: *scale,
                        degree: *r,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            RowProduct::per_row(n, factors)?
        } else {
            let factors = weights.low_rank_factors();
            let mut polys = Vec::with_capacity(margins.num_rows());
            let mut blocks = Vec::with_capacity(margins.num_rows());
            for i in 0..margins.num_rows() {
                let d = row_draws(i);
                let (r, scale, rows) = &draws[d];
                let m = rows.len();
                // basis form t * m + s is sum_j V_jt g_{s,j} x_j
                let mut basis = Vec::with_capacity(rank * m);
                for t in 0..rank {
                    for g in rows {
                        basis.push(LinearForm::new(
                            (0..n).map(|j| factors.right[j][t] * g[j]).collect(),
                        )?);
                    }
                }
                let k = rank * m;
                let mut q = SparsePolynomial::zero(k);
                for s_idx in 0..m {
                    let mut mix = vec![0.0; k];
                    for t in 0..rank {
                        mix[t * m + s_idx] = factors.left[i][t];
                    }
                    let power = expand_form_power(&LinearForm::new(mix)?, *r, options.term_cap)?;
                    for (a, c) in power.terms() {
                        q.add_term(a.clone(), c * scale);
                    }
                }
                polys.push(LowRankPoly::new(n, basis, InnerPoly::General(q))?);
                blocks.push(d);
            }
            let rows = (0..margins.num_rows()).collect();
            RowProduct::new(n, polys, blocks, rows)?
        };
        let (value, route) = pair_row_product(&product, &target, route, options.term_cap)?;
        Ok(Run {
            value,
            route,
            reduced_vars,
            samples,
        })
    })
}
