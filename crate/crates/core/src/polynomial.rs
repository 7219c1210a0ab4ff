//! Sparse multivariate polynomials and the factorial-weighted scalar product.
//!
//! The scalar product pairs monomials diagonally:
//! `<x^a, x^b> = a_1! ... a_n!` when `a == b` and `0` otherwise. It extends
//! bilinearly, so pairing a polynomial with `x^c` extracts `c! * coeff_c`.
//!
//! [`reduced_pairing`] evaluates `<q(l_1, ..., l_k), g>` for a product `g` of
//! linear forms without expanding anything in the ambient `n` variables: each
//! factor of `g` is transported to a `k`-variate form and the pairing is taken
//! over `k` variables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the number of terms any intermediate polynomial may hold.
pub const DEFAULT_TERM_CAP: usize = 10_000_000;

/// Exponent vector. Ordered graded-lexicographically: lower total degree
/// first, then larger leading exponents first (`x1^2 < x1 x2 < x2^2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn unit(num_vars: usize, var: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_square_free(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> Monomial {
        let mut e = vec![0; self.0.len()];
        for (i, &p) in perm.iter().enumerate() {
            e[p] = self.0[i];
        }
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazily extended table of factorials.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigUint>,
}

impl Default for FactorialTable {
    fn default() -> Self {
        FactorialTable {
            values: vec![BigUint::one()],
        }
    }
}

impl FactorialTable {
    pub fn get(&mut self, k: u32) -> &BigUint {
        let k = k as usize;
        while self.values.len() <= k {
            let next = self.values.len();
            let v = &self.values[next - 1] * BigUint::from(next);
            self.values.push(v);
        }
        &self.values[k]
    }

    pub fn weight(&mut self, a: &Monomial) -> BigUint {
        let top = a.exponents().iter().copied().max().unwrap_or(0);
        self.get(top);
        a.exponents()
            .iter()
            .map(|&e| &self.values[e as usize])
            .product()
    }
}

/// `a_1! a_2! ... a_n!`, the squared norm of `x^a`.
pub fn monomial_weight(a: &Monomial) -> BigUint {
    FactorialTable::default().weight(a)
}

/// Multinomial coefficient `(sum a)! / prod a_i!`.
pub fn multinomial(a: &[u32]) -> BigUint {
    let mut table = FactorialTable::default();
    let total: u32 = a.iter().sum();
    let top = table.get(total).clone();
    top / table.weight(&Monomial::new(a.to_vec()))
}

/// All exponent vectors of `num_vars` entries summing to `degree`, in
/// descending lexicographic order.
pub fn compositions(num_vars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if num_vars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut current = vec![0u32; num_vars];
    fill_compositions(&mut current, 0, degree, &mut out);
    out
}

fn fill_compositions(current: &mut [u32], pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = left;
        out.push(current.to_vec());
        return;
    }
    for e in (0..=left).rev() {
        current[pos] = e;
        fill_compositions(current, pos + 1, left - e, out);
    }
    current[pos] = 0;
}

/// `C(n + k - 1, k)`: number of monomials of degree `k` in `n` variables,
/// saturating at `u128::MAX`.
pub fn monomial_count(num_vars: usize, degree: u32) -> u128 {
    if num_vars == 0 {
        return u128::from(degree == 0);
    }
    binomial_u128(num_vars as u128 + degree as u128 - 1, degree as u128)
}

pub(crate) fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Polynomial stored as a map from monomials to non-zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial<T> {
    num_vars: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> SparsePolynomial<T> {
    pub fn zero(num_vars: usize) -> Self {
        SparsePolynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: T) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c);
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, T::one())
    }

    pub fn variable(num_vars: usize, var: usize) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::unit(num_vars, var), T::one());
        p
    }

    pub fn monomial(a: Monomial, c: T) -> Self {
        let mut p = Self::zero(a.num_vars());
        p.add_term(a, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "monomial has {} exponents, polynomial has {num_vars} variables",
                    e.len()
                )));
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &Monomial) -> T {
        self.terms.get(a).cloned().unwrap_or_else(T::zero)
    }

    /// Adds `c * x^a`, removing the entry if it cancels.
    pub fn add_term(&mut self, a: Monomial, c: T) {
        debug_assert_eq!(a.num_vars(), self.num_vars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(a) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// Common degree of all terms, `None` if mixed. The zero polynomial
    /// reports `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(Monomial::degree);
        let first = it.next().unwrap_or(0);
        it.all(|d| d == first).then_some(first)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut p = Self::zero(self.num_vars);
        for (a, v) in &self.terms {
            p.add_term(a.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_vars(self.num_vars, other.num_vars)?;
        let mut p = self.clone();
        for (a, v) in &other.terms {
            p.add_term(a.clone(), v.clone());
        }
        Ok(p)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        poly_mul(self, other, DEFAULT_TERM_CAP)
    }

    /// Part of the polynomial of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        SparsePolynomial {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| a.degree() == d)
                .map(|(a, v)| (a.clone(), v.clone()))
                .collect(),
        }
    }

    /// Renames variable `i` to `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let mut p = Self::zero(self.num_vars);
        for (a, v) in &self.terms {
            p.add_term(a.permuted(perm), v.clone());
        }
        p
    }

    pub fn map_coeffs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> SparsePolynomial<U> {
        let mut p = SparsePolynomial::zero(self.num_vars);
        for (a, v) in &self.terms {
            p.add_term(a.clone(), f(v));
        }
        p
    }

    /// Canonical text: one `coeff e_1 ... e_n` line per term in graded-lex order.
    pub fn to_canonical_text(&self) -> String {
        let mut s = String::new();
        for (a, v) in &self.terms {
            s.push_str(&v.to_text());
            for e in a.exponents() {
                s.push(' ');
                s.push_str(&e.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_canonical_text(num_vars: usize, text: &str) -> Result<Self> {
        let mut p = Self::zero(num_vars);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let bad = || Error::InvalidParameter(format!("line {}: cannot parse `{line}`", lineno + 1));
            let c = fields.next().and_then(T::parse_text).ok_or_else(bad)?;
            let e: Vec<u32> = fields
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "line {}: expected {num_vars} exponents, found {}",
                    lineno + 1,
                    e.len()
                )));
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }
}

impl<T: Scalar> fmt::Display for SparsePolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_text())
    }
}

fn check_vars(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "polynomials in {a} and {b} variables"
        )));
    }
    Ok(())
}

fn budget(what: &'static str, limit: usize, reached: usize) -> Error {
    Error::Budget {
        what,
        limit,
        reached,
    }
}

/// `<f, g> = sum_a a! f_a g_a`.
pub fn scalar_product<T: Scalar>(f: &SparsePolynomial<T>, g: &SparsePolynomial<T>) -> Result<T> {
    check_vars(f.num_vars, g.num_vars)?;
    let (small, large) = if f.len() <= g.len() { (f, g) } else { (g, f) };
    let mut table = FactorialTable::default();
    let terms = small.terms.iter().filter_map(|(a, x)| {
        large
            .terms
            .get(a)
            .map(|y| T::from_biguint(&table.weight(a)) * x.clone() * y.clone())
    });
    // collect first: the closure borrows `table` mutably
    let terms: Vec<T> = terms.collect();
    Ok(T::sum_terms(terms))
}

/// Product of two polynomials, failing once the result exceeds `term_cap` terms.
pub fn poly_mul<T: Scalar>(
    f: &SparsePolynomial<T>,
    g: &SparsePolynomial<T>,
    term_cap: usize,
) -> Result<SparsePolynomial<T>> {
    poly_mul_bounded(f, g, term_cap, None)
}

/// Product keeping only monomials whose exponents stay within `caps`.
/// Dropped monomials cannot contribute to any kept one, so kept coefficients
/// are exact.
pub(crate) fn poly_mul_bounded<T: Scalar>(
    f: &SparsePolynomial<T>,
    g: &SparsePolynomial<T>,
    term_cap: usize,
    caps: Option<&[u32]>,
) -> Result<SparsePolynomial<T>> {
    check_vars(f.num_vars, g.num_vars)?;
    let mut out = SparsePolynomial::zero(f.num_vars);
    for (a, x) in &f.terms {
        for (b, y) in &g.terms {
            let ab = a.mul(b);
            if let Some(caps) = caps {
                if ab.0.iter().zip(caps).any(|(e, c)| e > c) {
                    continue;
                }
            }
            out.add_term(ab, x.clone() * y.clone());
            if out.len() > term_cap {
                return Err(budget("polynomial product", term_cap, out.len()));
            }
        }
    }
    Ok(out)
}

/// Dense linear form `l(x) = sum_j c_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> LinearForm<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "linear form coefficient {i} is not finite"
            )));
        }
        Ok(LinearForm { coeffs })
    }

    /// The coordinate form `x_var`.
    pub fn coordinate(num_vars: usize, var: usize) -> Self {
        let mut coeffs = vec![T::zero(); num_vars];
        coeffs[var] = T::one();
        LinearForm { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    /// Scalar product of two forms; degree-one monomials all have weight 1.
    pub fn dot(&self, other: &Self) -> Result<T> {
        check_vars(self.num_vars(), other.num_vars())?;
        Ok(T::sum_terms(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() * b.clone()),
        ))
    }

    pub fn to_polynomial(&self) -> SparsePolynomial<T> {
        let n = self.num_vars();
        let mut p = SparsePolynomial::zero(n);
        for (j, c) in self.coeffs.iter().enumerate() {
            p.add_term(Monomial::unit(n, j), c.clone());
        }
        p
    }

    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        for (i, &p) in perm.iter().enumerate() {
            coeffs[p] = self.coeffs[i].clone();
        }
        LinearForm { coeffs }
    }
}

/// Multinomial expansion of `l^r`.
pub fn expand_form_power<T: Scalar>(
    form: &LinearForm<T>,
    r: u32,
    term_cap: usize,
) -> Result<SparsePolynomial<T>> {
    expand_form_power_bounded(form, r, term_cap, None)
}

pub(crate) fn expand_form_power_bounded<T: Scalar>(
    form: &LinearForm<T>,
    r: u32,
    term_cap: usize,
    caps: Option<&[u32]>,
) -> Result<SparsePolynomial<T>> {
    let n = form.num_vars();
    let support: Vec<usize> = (0..n).filter(|&j| !form.coeffs[j].is_zero()).collect();
    let mut out = SparsePolynomial::zero(n);
    if support.is_empty() {
        if r == 0 {
            out.add_term(Monomial::one(n), T::one());
        }
        return Ok(out);
    }
    let estimate = monomial_count(support.len(), r);
    if caps.is_none() && estimate > term_cap as u128 {
        return Err(budget(
            "form power expansion",
            term_cap,
            usize::try_from(estimate).unwrap_or(usize::MAX),
        ));
    }
    let mut table = FactorialTable::default();
    let r_fact = T::from_biguint(table.get(r));
    // powers[s][e] = c_{support[s]}^e
    let powers: Vec<Vec<T>> = support
        .iter()
        .map(|&j| {
            let mut v = Vec::with_capacity(r as usize + 1);
            v.push(T::one());
            for e in 1..=r as usize {
                let next = v[e - 1].clone() * form.coeffs[j].clone();
                v.push(next);
            }
            v
        })
        .collect();
    let mut exps = vec![0u32; support.len()];
    let mut emit = |exps: &[u32], out: &mut SparsePolynomial<T>| -> Result<()> {
        let mut full = vec![0u32; n];
        for (s, &e) in exps.iter().enumerate() {
            full[support[s]] = e;
        }
        if let Some(caps) = caps {
            if full.iter().zip(caps).any(|(e, c)| e > c) {
                return Ok(());
            }
        }
        let a = Monomial(full);
        let mut c = r_fact.clone() / T::from_biguint(&table.weight(&a));
        for (s, &e) in exps.iter().enumerate() {
            c = c * powers[s][e as usize].clone();
        }
        out.add_term(a, c);
        if out.len() > term_cap {
            return Err(budget("form power expansion", term_cap, out.len()));
        }
        Ok(())
    };
    walk_compositions(&mut exps, 0, r, &mut |e| emit(e, &mut out))?;
    Ok(out)
}

fn walk_compositions(
    current: &mut [u32],
    pos: usize,
    left: u32,
    f: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if pos + 1 == current.len() {
        current[pos] = left;
        return f(current);
    }
    for e in (0..=left).rev() {
        current[pos] = e;
        walk_compositions(current, pos + 1, left - e, f)?;
    }
    current[pos] = 0;
    Ok(())
}

/// `f(x) = q(l_1(x), ..., l_k(x))` expanded in the ambient variables.
pub fn substitute_forms<T: Scalar>(
    q: &SparsePolynomial<T>,
    forms: &[LinearForm<T>],
    term_cap: usize,
) -> Result<SparsePolynomial<T>> {
    let n = check_forms(q.num_vars(), forms)?;
    let mut out = SparsePolynomial::zero(n);
    let mut power_cache: BTreeMap<(usize, u32), SparsePolynomial<T>> = BTreeMap::new();
    for (b, coeff) in q.terms() {
        let mut term = SparsePolynomial::constant(n, coeff.clone());
        for (i, &e) in b.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !power_cache.contains_key(&(i, e)) {
                let pw = expand_form_power(&forms[i], e, term_cap)?;
                power_cache.insert((i, e), pw);
            }
            term = poly_mul(&term, &power_cache[&(i, e)], term_cap)?;
        }
        for (a, v) in term.terms {
            out.add_term(a, v);
        }
        if out.len() > term_cap {
            return Err(budget("form substitution", term_cap, out.len()));
        }
    }
    Ok(out)
}

fn check_forms<T: Scalar>(k: usize, forms: &[LinearForm<T>]) -> Result<usize> {
    if forms.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "polynomial has {k} variables but {} forms were given",
            forms.len()
        )));
    }
    let n = forms.first().map_or(0, LinearForm::num_vars);
    if forms.iter().any(|l| l.num_vars() != n) {
        return Err(Error::DimensionMismatch(
            "linear forms over different numbers of variables".into(),
        ));
    }
    Ok(n)
}

/// `<q(l_1, ..., l_k), g_1 g_2 ... g_N>` computed in `k` variables.
///
/// Each factor `g_s` becomes the `k`-variate form `y -> sum_i <l_i, g_s> y_i`;
/// the product of those is the truncation of `g` under the change of
/// variables sending the first `k` coordinates to the `l_i`. Identical factors
/// are grouped and raised to a power in one multinomial expansion.
pub fn reduced_pairing<T: Scalar>(
    q: &SparsePolynomial<T>,
    forms: &[LinearForm<T>],
    g_forms: &[LinearForm<T>],
    term_cap: usize,
) -> Result<T> {
    let k = q.num_vars();
    let n = check_forms(k, forms)?;
    if let Some(g) = g_forms.iter().find(|g| g.num_vars() != n) {
        return Err(Error::DimensionMismatch(format!(
            "factor of g has {} variables, forms have {n}",
            g.num_vars()
        )));
    }
    let degree = g_forms.len() as u32;
    let q = q.homogeneous_part(degree);
    if q.is_empty() {
        return Ok(T::zero());
    }
    let mut caps = vec![0u32; k];
    for (b, _) in q.terms() {
        for (c, &e) in caps.iter_mut().zip(b.exponents()) {
            *c = (*c).max(e);
        }
    }

    let mut grouped: Vec<(LinearForm<T>, u32)> = Vec::new();
    for g in g_forms {
        let transported = LinearForm {
            coeffs: forms
                .iter()
                .map(|l| l.dot(g))
                .collect::<Result<Vec<T>>>()?,
        };
        match grouped.iter_mut().find(|(h, _)| *h == transported) {
            Some((_, mult)) => *mult += 1,
            None => grouped.push((transported, 1)),
        }
    }

    let mut g_hat = SparsePolynomial::one(k);
    for (form, mult) in &grouped {
        let pw = expand_form_power_bounded(form, *mult, term_cap, Some(&caps))?;
        g_hat = poly_mul_bounded(&g_hat, &pw, term_cap, Some(&caps))?;
    }
    scalar_product(&q, &g_hat)
}

/// Ambient-space oracle for [`reduced_pairing`]: expands both sides in `n`
/// variables.
pub fn direct_pairing<T: Scalar>(
    q: &SparsePolynomial<T>,
    forms: &[LinearForm<T>],
    g_forms: &[LinearForm<T>],
    term_cap: usize,
) -> Result<T> {
    let n = check_forms(q.num_vars(), forms)?;
    let f = substitute_forms(q, forms, term_cap)?;
    let mut g = SparsePolynomial::one(n);
    for gf in g_forms {
        g = poly_mul(&g, &gf.to_polynomial(), term_cap)?;
    }
    scalar_product(&f, &g)
}
