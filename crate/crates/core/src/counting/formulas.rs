//! Closed forms: the Fisher-Yates weighted count, its weighted permanent
//! generalization, and the Bekessy asymptotic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Margins, WeightMatrix};
use crate::error::Result;
use crate::permanent::{build_block_matrix, permanent_exact, BlockStructure, SquareMatrix};
use crate::scalar::Scalar;

fn factorial(k: u32) -> BigUint {
    (1..=k).map(BigUint::from).product()
}

/// `r_1! ... r_m! c_1! ... c_n!`.
pub fn margin_factorials(margins: &Margins) -> BigUint {
    margins
        .rows()
        .iter()
        .chain(margins.cols())
        .map(|&k| factorial(k))
        .product()
}

/// `N! / (r_1! ... r_m! c_1! ... c_n!)`: the total of `prod 1 / d_ij!` over
/// all tables.
pub fn fisher_yates_count(margins: &Margins) -> BigRational {
    BigRational::new(
        BigInt::from(factorial(margins.total())),
        BigInt::from(margin_factorials(margins)),
    )
}

/// `N! / (prod r_i! prod c_j!) * exp((2 / N^2) sum_ij C(r_i, 2) C(c_j, 2))`.
pub fn bekessy_estimate(margins: &Margins) -> f64 {
    let n = f64::from(margins.total());
    let pairs = |k: u32| f64::from(k) * (f64::from(k) - 1.0) / 2.0;
    let row_pairs: f64 = margins.rows().iter().map(|&r| pairs(r)).sum();
    let col_pairs: f64 = margins.cols().iter().map(|&c| pairs(c)).sum();
    let base = ToPrimitive::to_f64(&fisher_yates_count(margins)).unwrap_or(f64::INFINITY);
    base * (2.0 / (n * n) * row_pairs * col_pairs).exp()
}

/// Block structure with row blocks `r_i` and column blocks `c_j`.
pub fn margin_blocks(margins: &Margins) -> BlockStructure {
    BlockStructure::new(
        margins.rows().iter().map(|&r| r as usize).collect(),
        margins.cols().iter().map(|&c| c as usize).collect(),
    )
    .expect("validated margins give a valid partition")
}

/// The `N x N` matrix with constant `w_ij` on block `R_i x C_j`.
pub fn weighted_block_matrix<T: Scalar>(
    margins: &Margins,
    weights: &WeightMatrix<T>,
) -> Result<SquareMatrix<T>> {
    weights.check_shape(margins)?;
    build_block_matrix(&margin_blocks(margins), weights.rows())
}

/// `sum over tables of prod w_ij^d_ij / d_ij!`, computed as
/// `per A / (prod r_i! prod c_j!)` for the weighted block matrix `A`.
pub fn weighted_fy_count<T: Scalar>(
    margins: &Margins,
    weights: &WeightMatrix<T>,
    permanent_limit: usize,
) -> Result<T> {
    let a = weighted_block_matrix(margins, weights)?;
    let per = permanent_exact(&a, permanent_limit)?;
    Ok(per / T::from_biguint(&margin_factorials(margins)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permanent::DEFAULT_PERMANENT_LIMIT;
    use crate::scalar::{rational, Rational};

    fn m(rows: &[u32], cols: &[u32]) -> Margins {
        Margins::new(rows.to_vec(), cols.to_vec()).unwrap()
    }

    #[test]
    fn fisher_yates_examples() {
        assert_eq!(fisher_yates_count(&m(&[1, 1], &[1, 1])), rational(2, 1));
        assert_eq!(fisher_yates_count(&m(&[2, 2], &[2, 2])), rational(3, 2));
    }

    #[test]
    fn bekessy_examples() {
        for n in 1..=7u32 {
            let ones = vec![1; n as usize];
            let fact: f64 = (1..=n).map(f64::from).product();
            assert_eq!(bekessy_estimate(&m(&ones, &ones)), fact);
        }
        let v = bekessy_estimate(&m(&[2, 2], &[2, 2]));
        assert!((v - 1.5 * 0.5f64.exp()).abs() < 1e-12);
        assert!((v - 2.4731).abs() < 1e-4);
    }

    #[test]
    fn weighted_examples() {
        let margins = m(&[2, 1], &[1, 2]);
        let ones = WeightMatrix::<Rational>::ones(2, 2);
        assert_eq!(
            weighted_fy_count(&margins, &ones, DEFAULT_PERMANENT_LIMIT).unwrap(),
            fisher_yates_count(&margins)
        );
        let zeros = WeightMatrix::new(vec![vec![Rational::from_i64(0); 2]; 2]).unwrap();
        assert_eq!(
            weighted_fy_count(&margins, &zeros, DEFAULT_PERMANENT_LIMIT).unwrap(),
            Rational::from_i64(0)
        );
        assert!(weighted_fy_count(&margins, &WeightMatrix::<Rational>::ones(3, 2), 22).is_err());
    }
}
