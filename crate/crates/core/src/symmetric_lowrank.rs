//! Randomized low-rank approximations of the complete symmetric polynomial
//! `h_r` and the elementary symmetric polynomial `e_r`.
//!
//! `h_r` is approximated by `(1 / (r! m)) sum_i l_i^r` where the coefficients
//! of every `l_i` are independent truncated standard exponentials. `e_r` is
//! approximated by a scaled average of products `prod_t sum_{w(j) = t} x_j`
//! over random surjections `w: {1..n} -> {1..r}`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{
    compositions, monomial_count, multinomial, poly_mul, substitute_forms, LinearForm, Monomial,
    SparsePolynomial,
};
use crate::rng::{standard_exponential, stream};
use crate::scalar::Scalar;

/// Threshold `kappa` for the truncated exponential at degree `r` and loss `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub r: u32,
    pub delta: f64,
    pub kappa: f64,
}

impl TruncationSpec {
    /// Checks `e^{-kappa} sum_{i <= r} kappa^i / i! <= delta`, which makes
    /// `E trunc(gamma)^a >= (1 - delta) a!` for every `a <= r`.
    pub fn is_certified(&self) -> bool {
        poisson_tail(self.kappa, self.r) <= self.delta
    }
}

/// `e^{-kappa} sum_{i=0}^{r} kappa^i / i!`.
pub fn poisson_tail(kappa: f64, r: u32) -> f64 {
    let mut term = (-kappa).exp();
    let mut sum = term;
    for i in 1..=r {
        term *= kappa / f64::from(i);
        sum += term;
    }
    sum
}

/// `E[gamma^a ; gamma <= kappa] = a! (1 - e^{-kappa} sum_{i <= a} kappa^i / i!)`.
pub fn truncated_moment(kappa: f64, alpha: u32) -> f64 {
    let fact: f64 = (1..=alpha).map(f64::from).product();
    fact * (1.0 - poisson_tail(kappa, alpha))
}

/// Smallest `kappa` (to within `1e-6`) that certifies `(r, delta)`.
pub fn solve_threshold(r: u32, delta: f64) -> Result<TruncationSpec> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while poisson_tail(hi, r) > delta {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if poisson_tail(mid, r) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TruncationSpec {
        r,
        delta,
        kappa: hi,
    })
}

/// One draw of the truncated exponential: `gamma` if `gamma <= kappa`, else 0.
pub fn sample_truncated_exponential<R: Rng + ?Sized>(spec: &TruncationSpec, rng: &mut R) -> f64 {
    let g = standard_exponential(rng);
    if g <= spec.kappa {
        g
    } else {
        0.0
    }
}

/// Monte Carlo estimate of `E[gamma^a ; gamma <= kappa]` for `a = 0..=max_alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub means: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub draws: usize,
}

/// Estimates the retained-mass moments `E[gamma^a ; gamma <= kappa]`.
///
/// For `a >= 1` this is `E trunc(gamma)^a`. For `a = 0` it is the probability
/// of not truncating, which is what the closed form [`truncated_moment`] gives.
pub fn empirical_truncated_moments(
    spec: &TruncationSpec,
    max_alpha: u32,
    draws: usize,
    seed: u64,
) -> MomentEstimate {
    let k = max_alpha as usize + 1;
    let mut rng = stream(seed, 0);
    let mut sums = vec![0.0; k];
    let mut squares = vec![0.0; k];
    for _ in 0..draws {
        let g = standard_exponential(&mut rng);
        if g > spec.kappa {
            continue;
        }
        let mut p = 1.0;
        for a in 0..k {
            sums[a] += p;
            squares[a] += p * p;
            p *= g;
        }
    }
    let n = draws as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let std_errs = means
        .iter()
        .zip(&squares)
        .map(|(m, sq)| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    MomentEstimate {
        means,
        std_errs,
        draws,
    }
}

/// Truncation loss chosen so that `(1 - delta)^2 = 1 - epsilon`.
pub fn delta_from_epsilon(epsilon: f64) -> f64 {
    1.0 - (1.0 - epsilon).sqrt()
}

/// Ingredients of the Azuma sample-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePlan {
    pub samples: usize,
    /// Uniform bound on `|xi - E xi|` for one sampled coefficient.
    pub bound: f64,
    /// Allowed deviation of the average from its mean.
    pub tolerance: f64,
    /// Number of coefficients the union bound runs over.
    pub monomials: u128,
    pub kappa: Option<f64>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

fn azuma_samples(bound: f64, tolerance: f64, monomials: u128) -> usize {
    // 2 exp(-m t^2 / 2K^2) <= 1 / (3 M)
    let m = 2.0 * bound * bound / (tolerance * tolerance) * (6.0 * monomials as f64).ln();
    (m.ceil() as usize).max(1)
}

/// Number of forms for the `h_r` approximation in `n` variables.
pub fn complete_sample_plan(r: u32, epsilon: f64, n: usize) -> Result<SamplePlan> {
    check_epsilon(epsilon)?;
    if r == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need r >= 1 and n >= 1, got r = {r}, n = {n}"
        )));
    }
    let spec = solve_threshold(r, delta_from_epsilon(epsilon))?;
    let rf = f64::from(r);
    let bound = spec.kappa.powi(r as i32);
    let tolerance = ((1.0 - epsilon).powf(rf / 2.0) - (1.0 - epsilon).powf(rf))
        .min((1.0 + epsilon).powf(rf) - 1.0);
    let monomials = monomial_count(n, r);
    Ok(SamplePlan {
        samples: azuma_samples(bound, tolerance, monomials),
        bound,
        tolerance,
        monomials,
        kappa: Some(spec.kappa),
    })
}

pub fn choose_sample_count(r: u32, epsilon: f64, n: usize) -> Result<usize> {
    complete_sample_plan(r, epsilon, n).map(|p| p.samples)
}

/// Number of surjections for the `e_r` approximation in `n` variables.
///
/// Each sampled coefficient is `indicator / beta` with mean 1, so
/// `|xi - 1| <= 1 / beta`; the tolerance is `1 - (1 - epsilon)^r`.
pub fn elementary_sample_plan(r: u32, epsilon: f64, n: usize) -> Result<SamplePlan> {
    check_epsilon(epsilon)?;
    check_surjection_args(n, r)?;
    let rf = f64::from(r);
    let bound = 1.0 / ToPrimitive::to_f64(&elementary_normalizer(n, r)).unwrap_or(f64::NAN);
    let tolerance = (1.0 - (1.0 - epsilon).powf(rf)).min((1.0 + epsilon).powf(rf) - 1.0);
    let monomials = crate::polynomial::binomial_u128(n as u128, u128::from(r));
    Ok(SamplePlan {
        samples: azuma_samples(bound, tolerance, monomials),
        bound,
        tolerance,
        monomials,
        kappa: None,
    })
}

fn check_surjection_args(n: usize, r: u32) -> Result<()> {
    if r == 0 || r as usize > n {
        return Err(Error::InvalidParameter(format!(
            "no surjections from {n} points onto {r}"
        )));
    }
    Ok(())
}

/// Number of surjections `{1..n} -> {1..r}` by inclusion-exclusion.
pub fn surjection_count(n: usize, r: u32) -> BigUint {
    let mut total = BigInt::zero();
    let mut binom = BigInt::one();
    for k in 0..=r {
        let term = &binom * BigInt::from(r - k).pow(n as u32);
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        binom = binom * BigInt::from(r - k) / BigInt::from(k + 1);
    }
    total.to_biguint().unwrap_or_default()
}

/// `beta = r! r^(n - r) / Surj(n, r)`: the probability that a uniform
/// surjection restricted to a fixed `r`-set is a bijection. It is the
/// expected coefficient of each square-free monomial in `p_w`.
pub fn elementary_normalizer(n: usize, r: u32) -> BigRational {
    let fact: BigUint = (1..=r).map(BigUint::from).product();
    let num = fact * BigUint::from(r).pow((n - r as usize) as u32);
    BigRational::new(num.into(), surjection_count(n, r).into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxKind {
    Complete,
    Elementary,
}

/// Scaled family of linear forms approximating `h_r` or `e_r`.
///
/// For [`ApproxKind::Complete`] the polynomial is `scale * sum_i l_i^r`. For
/// [`ApproxKind::Elementary`] the forms come in consecutive groups of `r` and
/// the polynomial is `scale * sum_groups prod_{l in group} l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSymmetricPoly {
    pub kind: ApproxKind,
    pub r: u32,
    #[serde(rename = "n")]
    pub num_vars: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub scale: f64,
    pub forms: Vec<Vec<f64>>,
}

/// Draws `count` rows of `n` truncated exponentials; row `i` reads stream `i`.
pub fn truncated_exponential_rows(
    spec: &TruncationSpec,
    count: usize,
    n: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            (0..n)
                .map(|_| sample_truncated_exponential(spec, &mut rng))
                .collect()
        })
        .collect()
}

/// Largest number of form coefficients (`m * n` for `h_r`, `m * r * n` for
/// `e_r`) a builder will allocate.
pub const MAX_FORM_ENTRIES: usize = 50_000_000;

fn check_entries(m: usize, width: usize) -> Result<()> {
    let entries = m.saturating_mul(width);
    if entries > MAX_FORM_ENTRIES {
        return Err(Error::Budget {
            what: "sampled form entries",
            limit: MAX_FORM_ENTRIES,
            reached: entries,
        });
    }
    Ok(())
}

/// Randomized approximation of `h_r` in `n` variables.
///
/// `samples` overrides the Azuma-derived number of forms.
pub fn build_h_tilde(
    r: u32,
    n: usize,
    epsilon: f64,
    seed: u64,
    samples: Option<usize>,
) -> Result<ApproxSymmetricPoly> {
    let plan = complete_sample_plan(r, epsilon, n)?;
    let m = samples.unwrap_or(plan.samples);
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one form".into()));
    }
    check_entries(m, n)?;
    let spec = solve_threshold(r, delta_from_epsilon(epsilon))?;
    let r_fact: f64 = (1..=r).map(f64::from).product();
    Ok(ApproxSymmetricPoly {
        kind: ApproxKind::Complete,
        r,
        num_vars: n,
        epsilon,
        seed,
        scale: 1.0 / (r_fact * m as f64),
        forms: truncated_exponential_rows(&spec, m, n, seed),
    })
}

/// Uniform random surjection by rejection; `None` after `max_attempts`.
fn sample_surjection<R: Rng + ?Sized>(
    n: usize,
    r: u32,
    rng: &mut R,
    max_attempts: u64,
) -> Option<Vec<u32>> {
    let mut map = vec![0u32; n];
    let mut hit = vec![false; r as usize];
    for _ in 0..max_attempts {
        hit.iter_mut().for_each(|h| *h = false);
        for v in map.iter_mut() {
            *v = rng.gen_range(0..r);
            hit[*v as usize] = true;
        }
        if hit.iter().all(|&h| h) {
            return Some(map);
        }
    }
    None
}

/// Randomized approximation of `e_r` in `n` variables.
pub fn build_e_tilde(
    r: u32,
    n: usize,
    epsilon: f64,
    seed: u64,
    samples: Option<usize>,
) -> Result<ApproxSymmetricPoly> {
    let plan = elementary_sample_plan(r, epsilon, n)?;
    let m = samples.unwrap_or(plan.samples);
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one surjection".into()));
    }
    check_entries(m, r as usize * n)?;
    let beta = ToPrimitive::to_f64(&elementary_normalizer(n, r)).unwrap_or(f64::NAN);
    let success = surjection_count(n, r).to_f64().unwrap_or(f64::NAN)
        / f64::from(r).powi(n as i32);
    let max_attempts = (50.0 / success).ceil() as u64;
    let maps: Vec<Option<Vec<u32>>> = (0..m)
        .into_par_iter()
        .map(|s| sample_surjection(n, r, &mut stream(seed, s as u64), max_attempts))
        .collect();
    let mut forms = Vec::with_capacity(m * r as usize);
    for map in maps {
        let map = map.ok_or(Error::SamplingExhausted {
            attempts: max_attempts,
        })?;
        for t in 0..r {
            forms.push(map.iter().map(|&w| if w == t { 1.0 } else { 0.0 }).collect());
        }
    }
    Ok(ApproxSymmetricPoly {
        kind: ApproxKind::Elementary,
        r,
        num_vars: n,
        epsilon,
        seed,
        scale: 1.0 / (beta * m as f64),
        forms,
    })
}

impl ApproxSymmetricPoly {
    /// Number of sampled terms (forms for `h`, surjections for `e`).
    pub fn samples(&self) -> usize {
        match self.kind {
            ApproxKind::Complete => self.forms.len(),
            ApproxKind::Elementary => self.forms.len() / self.r as usize,
        }
    }

    pub fn linear_forms(&self) -> Result<Vec<LinearForm<f64>>> {
        self.forms.iter().map(|c| LinearForm::new(c.clone())).collect()
    }

    /// The same polynomial as `q(l_1, ..., l_k)`.
    pub fn to_low_rank(&self) -> Result<LowRankPoly<f64>> {
        let inner = match self.kind {
            ApproxKind::Complete => InnerPoly::PowerSum {
                scale: self.scale,
                degree: self.r,
            },
            ApproxKind::Elementary => InnerPoly::ProductSum {
                scale: self.scale,
                group: self.r,
            },
        };
        LowRankPoly::new(self.num_vars, self.linear_forms()?, inner)
    }

    /// Coefficients in the `n` ambient variables.
    pub fn expand(&self, term_cap: usize) -> Result<SparsePolynomial<f64>> {
        self.to_low_rank()?.expand(term_cap)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("approximation JSON: {e}")))?;
        if p.forms.iter().any(|f| f.len() != p.num_vars) {
            return Err(Error::DimensionMismatch("form length differs from n".into()));
        }
        if p.kind == ApproxKind::Elementary && p.forms.len() % p.r.max(1) as usize != 0 {
            return Err(Error::DimensionMismatch(
                "elementary forms must come in groups of r".into(),
            ));
        }
        Ok(p)
    }
}

/// Result of comparing an approximation's coefficients with 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub monomials_checked: usize,
    /// Monomials whose coefficient lies outside `[lower, upper]`, or that
    /// should be absent but are not.
    pub violations: Vec<Vec<u32>>,
}

impl CoefficientReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every coefficient of `approx` against the band
/// `[(1 - eps)^r, (1 + eps)^r]` around the exact value 1.
pub fn verify_coefficients(approx: &ApproxSymmetricPoly, term_cap: usize) -> Result<CoefficientReport> {
    let (n, r) = (approx.num_vars, approx.r);
    let expected: Vec<Vec<u32>> = match approx.kind {
        ApproxKind::Complete => {
            let count = monomial_count(n, r);
            if count > term_cap as u128 {
                return Err(Error::Budget {
                    what: "coefficient verification",
                    limit: term_cap,
                    reached: usize::try_from(count).unwrap_or(usize::MAX),
                });
            }
            compositions(n, r)
        }
        ApproxKind::Elementary => {
            let count = crate::polynomial::binomial_u128(n as u128, u128::from(r));
            if count > term_cap as u128 {
                return Err(Error::Budget {
                    what: "coefficient verification",
                    limit: term_cap,
                    reached: usize::try_from(count).unwrap_or(usize::MAX),
                });
            }
            compositions(n, r)
                .into_iter()
                .filter(|e| e.iter().all(|&x| x <= 1))
                .collect()
        }
    };
    let expanded = approx.expand(term_cap)?;
    Ok(compare_with_ones(approx.epsilon, r, &expected, &expanded))
}

pub(crate) fn compare_with_ones(
    epsilon: f64,
    r: u32,
    expected: &[Vec<u32>],
    expanded: &SparsePolynomial<f64>,
) -> CoefficientReport {
    let lower = (1.0 - epsilon).powi(r as i32);
    let upper = (1.0 + epsilon).powi(r as i32);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for e in expected {
        let a = Monomial::new(e.clone());
        let c = expanded.coeff(&a);
        min_ratio = min_ratio.min(c);
        max_ratio = max_ratio.max(c);
        if !(lower..=upper).contains(&c) {
            violations.push(e.clone());
        }
        seen.insert(a);
    }
    for (a, _) in expanded.terms() {
        if !seen.contains(a) {
            violations.push(a.exponents().to_vec());
        }
    }
    CoefficientReport {
        min_ratio,
        max_ratio,
        lower,
        upper,
        monomials_checked: expected.len(),
        violations,
    }
}

/// Structured polynomial `q` in the `k` reduced variables.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerPoly<T> {
    General(SparsePolynomial<T>),
    /// `scale * sum_i y_i^degree`.
    PowerSum { scale: T, degree: u32 },
    /// `scale * sum_s prod_{t < group} y_{s * group + t}`.
    ProductSum { scale: T, group: u32 },
}

/// A polynomial written as `q(l_1(x), ..., l_k(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankPoly<T> {
    num_vars: usize,
    forms: Vec<LinearForm<T>>,
    inner: InnerPoly<T>,
}

impl<T: Scalar> LowRankPoly<T> {
    pub fn new(num_vars: usize, forms: Vec<LinearForm<T>>, inner: InnerPoly<T>) -> Result<Self> {
        if forms.iter().any(|l| l.num_vars() != num_vars) {
            return Err(Error::DimensionMismatch(format!(
                "forms must have {num_vars} coefficients"
            )));
        }
        match &inner {
            InnerPoly::General(q) if q.num_vars() != forms.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "inner polynomial has {} variables for {} forms",
                    q.num_vars(),
                    forms.len()
                )))
            }
            InnerPoly::ProductSum { group, .. }
                if *group == 0 || forms.len() % *group as usize != 0 =>
            {
                return Err(Error::DimensionMismatch(
                    "product groups do not tile the forms".into(),
                ))
            }
            _ => {}
        }
        Ok(LowRankPoly {
            num_vars,
            forms,
            inner,
        })
    }

    /// Exact `h_r` through the coordinate forms (`q = h_r`, `l_i = x_i`).
    pub fn exact_complete(r: u32, n: usize) -> Self {
        let q = SparsePolynomial::from_terms(n, compositions(n, r).into_iter().map(|e| (e, T::one())))
            .expect("compositions have n entries");
        LowRankPoly {
            num_vars: n,
            forms: (0..n).map(|j| LinearForm::coordinate(n, j)).collect(),
            inner: InnerPoly::General(q),
        }
    }

    /// Exact `e_r` through the coordinate forms.
    pub fn exact_elementary(r: u32, n: usize) -> Self {
        let q = SparsePolynomial::from_terms(
            n,
            compositions(n, r)
                .into_iter()
                .filter(|e| e.iter().all(|&x| x <= 1))
                .map(|e| (e, T::one())),
        )
        .expect("compositions have n entries");
        LowRankPoly {
            num_vars: n,
            forms: (0..n).map(|j| LinearForm::coordinate(n, j)).collect(),
            inner: InnerPoly::General(q),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rank(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[LinearForm<T>] {
        &self.forms
    }

    pub fn inner(&self) -> &InnerPoly<T> {
        &self.inner
    }

    /// Upper bound on the number of terms of `q`.
    pub fn inner_terms(&self) -> usize {
        match &self.inner {
            InnerPoly::General(q) => q.len(),
            InnerPoly::PowerSum { .. } => self.forms.len(),
            InnerPoly::ProductSum { group, .. } => self.forms.len() / *group as usize,
        }
    }

    /// `q` as an explicit polynomial in `rank()` variables.
    pub fn inner_polynomial(&self) -> SparsePolynomial<T> {
        let k = self.forms.len();
        match &self.inner {
            InnerPoly::General(q) => q.clone(),
            InnerPoly::PowerSum { scale, degree } => {
                let mut q = SparsePolynomial::zero(k);
                for i in 0..k {
                    let mut e = vec![0; k];
                    e[i] = *degree;
                    q.add_term(Monomial::new(e), scale.clone());
                }
                q
            }
            InnerPoly::ProductSum { scale, group } => {
                let g = *group as usize;
                let mut q = SparsePolynomial::zero(k);
                for s in 0..k / g {
                    let mut e = vec![0; k];
                    e[s * g..(s + 1) * g].iter_mut().for_each(|x| *x = 1);
                    q.add_term(Monomial::new(e), scale.clone());
                }
                q
            }
        }
    }

    /// Expansion in the ambient variables.
    pub fn expand(&self, term_cap: usize) -> Result<SparsePolynomial<T>> {
        match &self.inner {
            InnerPoly::General(q) => substitute_forms(q, &self.forms, term_cap),
            InnerPoly::PowerSum { scale, degree } => {
                power_sum_expansion(self.num_vars, &self.forms, *degree, scale, term_cap)
            }
            InnerPoly::ProductSum { scale, group } => {
                let g = *group as usize;
                let mut out = SparsePolynomial::zero(self.num_vars);
                for chunk in self.forms.chunks(g) {
                    let mut prod = SparsePolynomial::one(self.num_vars);
                    for l in chunk {
                        prod = poly_mul(&prod, &l.to_polynomial(), term_cap)?;
                    }
                    for (a, c) in prod.terms() {
                        out.add_term(a.clone(), c.clone());
                    }
                    if out.len() > term_cap {
                        return Err(Error::Budget {
                            what: "product-sum expansion",
                            limit: term_cap,
                            reached: out.len(),
                        });
                    }
                }
                Ok(out.scale(scale))
            }
        }
    }
}

/// `scale * sum_i l_i^degree` accumulated in a dense table over all
/// monomials of that degree.
fn power_sum_expansion<T: Scalar>(
    n: usize,
    forms: &[LinearForm<T>],
    degree: u32,
    scale: &T,
    term_cap: usize,
) -> Result<SparsePolynomial<T>> {
    let count = monomial_count(n, degree);
    if count > term_cap as u128 {
        return Err(Error::Budget {
            what: "power-sum expansion",
            limit: term_cap,
            reached: usize::try_from(count).unwrap_or(usize::MAX),
        });
    }
    let monomials = compositions(n, degree);
    let weights: Vec<T> = monomials
        .iter()
        .map(|e| T::from_biguint(&multinomial(e)))
        .collect();
    let mut acc = vec![T::zero(); monomials.len()];
    let mut powers: Vec<Vec<T>> = vec![Vec::with_capacity(degree as usize + 1); n];
    for l in forms {
        for (j, p) in powers.iter_mut().enumerate() {
            p.clear();
            p.push(T::one());
            for e in 1..=degree as usize {
                let next = p[e - 1].clone() * l.coeffs()[j].clone();
                p.push(next);
            }
        }
        for (slot, (e, w)) in acc.iter_mut().zip(monomials.iter().zip(&weights)) {
            let mut term = w.clone();
            for (j, &x) in e.iter().enumerate() {
                if x > 0 {
                    term = term * powers[j][x as usize].clone();
                }
            }
            *slot = slot.clone() + term;
        }
    }
    let mut out = SparsePolynomial::zero(n);
    for (e, c) in monomials.into_iter().zip(acc) {
        out.add_term(Monomial::new(e), c * scale.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::DEFAULT_TERM_CAP;
    use crate::scalar::{rational, Rational};

    #[test]
    fn thresholds() {
        let s = solve_threshold(0, 0.5).unwrap();
        assert!((s.kappa - std::f64::consts::LN_2).abs() < 1e-6);
        let s = solve_threshold(2, 0.1).unwrap();
        assert!(s.is_certified());
        // root of e^-k (1 + k + k^2/2) = 0.1
        assert!((poisson_tail(s.kappa, 2) - 0.1).abs() < 1e-6);
        assert!((s.kappa - 5.3223).abs() < 1e-3, "{}", s.kappa);
        assert!(solve_threshold(3, 0.1).unwrap().kappa > s.kappa);
        assert!(solve_threshold(2, 0.0).is_err());
        assert!(solve_threshold(2, 1.0).is_err());
    }

    #[test]
    fn threshold_growth_is_mild() {
        // kappa = O(r ln r + ln 1/delta)
        for r in 1..12u32 {
            for &d in &[0.1, 0.01, 1e-4] {
                let k = solve_threshold(r, d).unwrap().kappa;
                let rf = f64::from(r);
                assert!(k <= 3.0 * (rf * rf.ln().max(1.0) + (1.0 / d).ln()) + 3.0, "{r} {d} {k}");
            }
        }
    }

    #[test]
    fn truncated_draws_are_bounded() {
        let spec = solve_threshold(2, 0.1).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..10_000 {
            let g = sample_truncated_exponential(&spec, &mut rng);
            assert!((0.0..=spec.kappa).contains(&g));
        }
    }

    #[test]
    fn truncated_moment_bounds() {
        for r in 1..6u32 {
            let spec = solve_threshold(r, 0.05).unwrap();
            for a in 0..=r {
                let fact: f64 = (1..=a).map(f64::from).product();
                let m = truncated_moment(spec.kappa, a);
                assert!(m <= fact && m >= (1.0 - spec.delta) * fact - 1e-12);
            }
        }
    }

    #[test]
    fn surjections() {
        assert_eq!(surjection_count(4, 2), 14u32.into());
        assert_eq!(surjection_count(3, 3), 6u32.into());
        assert_eq!(surjection_count(5, 3), 150u32.into());
        assert_eq!(surjection_count(3, 4), 0u32.into());
        assert_eq!(elementary_normalizer(4, 2), rational(4, 7));
        assert_eq!(elementary_normalizer(5, 5), rational(1, 1));
    }

    #[test]
    fn sample_count_fixture() {
        let plan = complete_sample_plan(2, 0.25, 10).unwrap();
        // delta = 1 - sqrt(0.75); t = min(0.75 - 0.5625, 0.5625)
        assert!((plan.tolerance - 0.1875).abs() < 1e-12);
        assert_eq!(plan.monomials, 55);
        let kappa = plan.kappa.unwrap();
        let expected = (2.0 * kappa.powi(4) / 0.1875f64.powi(2) * 330f64.ln()).ceil() as usize;
        assert_eq!(plan.samples, expected);
        assert_eq!(plan.samples, 189_071);
    }

    #[test]
    fn sample_count_is_logarithmic_in_n() {
        let small = choose_sample_count(2, 0.25, 10).unwrap() as f64;
        let large = choose_sample_count(2, 0.25, 1000).unwrap() as f64;
        let bound = (6.0 * 500_500f64).ln() / (6.0 * 55f64).ln();
        assert!(large / small <= bound + 1e-9);
        let plan = complete_sample_plan(1, 0.3, 5).unwrap();
        assert!((plan.tolerance - (0.7f64.sqrt() - 0.7)).abs() < 1e-12);
        assert_eq!(plan.bound, plan.kappa.unwrap());
        assert!(plan.samples > 0);
    }

    #[test]
    fn h_tilde_is_deterministic_and_scaled() {
        let a = build_h_tilde(2, 4, 0.3, 11, Some(50)).unwrap();
        let b = build_h_tilde(2, 4, 0.3, 11, Some(50)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.forms, build_h_tilde(2, 4, 0.3, 12, Some(50)).unwrap().forms);
        assert_eq!(a.samples(), 50);
        assert!((a.scale - 1.0 / 100.0).abs() < 1e-15);
        let back = ApproxSymmetricPoly::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn h_tilde_linear_coefficient_is_mean_of_draws() {
        let a = build_h_tilde(1, 2, 0.3, 5, Some(40)).unwrap();
        let p = a.expand(DEFAULT_TERM_CAP).unwrap();
        let c = p.coeff(&Monomial::new(vec![1, 0]));
        let mean = a.forms.iter().map(|f| f[0]).sum::<f64>() / 40.0;
        assert!((c - mean).abs() < 1e-12);
        let kappa = solve_threshold(1, delta_from_epsilon(0.3)).unwrap().kappa;
        assert!((0.0..=kappa).contains(&c));
    }

    #[test]
    fn e_tilde_full_degree_is_exact() {
        let a = build_e_tilde(4, 4, 0.3, 9, Some(7)).unwrap();
        let report = verify_coefficients(&a, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(report.min_ratio, 1.0);
        assert_eq!(report.max_ratio, 1.0);
        assert!(report.passed());
        assert!(build_e_tilde(5, 4, 0.3, 9, None).is_err());
    }

    #[test]
    fn e_tilde_groups_partition_variables() {
        let a = build_e_tilde(3, 7, 0.3, 2, Some(20)).unwrap();
        for group in a.forms.chunks(3) {
            for j in 0..7 {
                let hits: f64 = group.iter().map(|f| f[j]).sum();
                assert_eq!(hits, 1.0);
            }
            assert!(group.iter().all(|f| f.iter().any(|&c| c == 1.0)));
        }
    }

    #[test]
    fn exact_surrogate_has_unit_coefficients() {
        let h = LowRankPoly::<Rational>::exact_complete(3, 3);
        let p = h.expand(DEFAULT_TERM_CAP).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p.terms().all(|(_, c)| *c == Rational::from_i64(1)));
        let e = LowRankPoly::<Rational>::exact_elementary(2, 4);
        assert_eq!(e.expand(DEFAULT_TERM_CAP).unwrap().len(), 6);
    }

    #[test]
    fn verify_on_exact_float_polynomial() {
        let p = LowRankPoly::<f64>::exact_complete(2, 3).expand(DEFAULT_TERM_CAP).unwrap();
        let report = compare_with_ones(0.1, 2, &compositions(3, 2), &p);
        assert_eq!((report.min_ratio, report.max_ratio), (1.0, 1.0));
        assert!(report.passed());
    }

    #[test]
    fn power_sum_matches_generic_substitution() {
        let a = build_h_tilde(3, 3, 0.3, 4, Some(6)).unwrap();
        let lr = a.to_low_rank().unwrap();
        let fast = lr.expand(DEFAULT_TERM_CAP).unwrap();
        let slow = substitute_forms(&lr.inner_polynomial(), lr.forms(), DEFAULT_TERM_CAP).unwrap();
        for (m, c) in slow.terms() {
            assert!((fast.coeff(m) - c).abs() < 1e-9 * c.abs().max(1.0));
        }
        assert_eq!(fast.len(), slow.len());
    }
}
