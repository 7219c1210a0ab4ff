mod common;

use itertools::Itertools;
use num_bigint::BigInt;
use proptest::prelude::*;

use tablecount::counting::{
    block_permanent, draw_cells, exact_count_01, exact_count_dp, fisher_yates_count,
    lowrank_exact_count, PairingRoute, DEFAULT_EXACT_BUDGET,
};
use tablecount::permanent::{permanent_exact, SquareMatrix};
use tablecount::polynomial::{
    direct_pairing, reduced_pairing, scalar_product, LinearForm, Monomial, SparsePolynomial,
    DEFAULT_TERM_CAP,
};
use tablecount::{Margins, Rational};

fn q(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn poly(n: usize) -> impl Strategy<Value = SparsePolynomial<Rational>> {
    prop::collection::vec((prop::collection::vec(0u32..3, n), -5i64..=5), 0..6).prop_map(move |terms| {
        let mut p = SparsePolynomial::zero(n);
        for (e, c) in terms {
            p.add_term(Monomial::new(e), q(c));
        }
        p
    })
}

fn int_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, n), n)
}

fn naive_permanent(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| a[i][j]).product::<i64>())
        .sum()
}

fn rational_matrix(a: &[Vec<i64>]) -> SquareMatrix<Rational> {
    SquareMatrix::from_rows(a.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap()
}

fn margins_strategy(max_parts: usize, max_total: u32) -> impl Strategy<Value = Margins> {
    (1..=max_parts, 1..=max_parts, 1..=max_total)
        .prop_filter("room for positive parts", |(m, n, t)| *t as usize >= (*m).max(*n))
        .prop_flat_map(|(m, n, t)| {
            let rows = common::positive_compositions(t, m);
            let cols = common::positive_compositions(t, n);
            (0..rows.len(), 0..cols.len()).prop_map(move |(i, j)| {
                Margins::new(rows[i].clone(), cols[j].clone()).unwrap()
            })
        })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_product_is_bilinear(f in poly(3), g in poly(3), h in poly(3), a in -3i64..=3, b in -3i64..=3) {
        let lhs = scalar_product(&f.scale(&q(a)).add(&g.scale(&q(b))).unwrap(), &h).unwrap();
        let rhs = q(a) * scalar_product(&f, &h).unwrap() + q(b) * scalar_product(&g, &h).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(scalar_product(&f, &g).unwrap(), scalar_product(&g, &f).unwrap());
    }

    #[test]
    fn scalar_product_is_permutation_invariant(f in poly(3), g in poly(3), p in permutation(3)) {
        prop_assert_eq!(
            scalar_product(&f.permute_vars(&p), &g.permute_vars(&p)).unwrap(),
            scalar_product(&f, &g).unwrap()
        );
    }

    #[test]
    fn ryser_matches_naive_permanent(a in (1usize..=6).prop_flat_map(int_matrix)) {
        prop_assert_eq!(permanent_exact(&rational_matrix(&a), 22).unwrap(), q(naive_permanent(&a)));
        let float = SquareMatrix::from_rows(
            a.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
        ).unwrap();
        let v = permanent_exact(&float, 22).unwrap();
        prop_assert!((v - naive_permanent(&a) as f64).abs() < 1e-6);
    }

    #[test]
    fn permanent_is_linear_in_each_row(
        (a, b) in (1usize..=5).prop_flat_map(|n| (int_matrix(n), prop::collection::vec(-4i64..=4, n))),
        row in 0usize..5, s in -3i64..=3,
    ) {
        let row = row % a.len();
        let mut sum = a.clone();
        let mut other = a.clone();
        other[row] = b.clone();
        for (x, y) in sum[row].iter_mut().zip(&b) {
            *x += s * y;
        }
        let lhs = permanent_exact(&rational_matrix(&sum), 22).unwrap();
        let rhs = permanent_exact(&rational_matrix(&a), 22).unwrap()
            + q(s) * permanent_exact(&rational_matrix(&other), 22).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn permanent_ignores_row_and_column_order(
        (a, p, r) in (1usize..=5).prop_flat_map(|n| (int_matrix(n), permutation(n), permutation(n)))
    ) {
        let m = rational_matrix(&a);
        prop_assert_eq!(
            permanent_exact(&m.permuted(&p, &r), 22).unwrap(),
            permanent_exact(&m, 22).unwrap()
        );
    }

    #[test]
    fn reduction_matches_direct_expansion(
        q_poly in poly(2),
        forms in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 2),
        g in prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 0..4),
    ) {
        let to_forms = |v: &[Vec<i64>]| -> Vec<LinearForm<Rational>> {
            v.iter().map(|c| LinearForm::new(c.iter().map(|&x| q(x)).collect()).unwrap()).collect()
        };
        let (forms, g) = (to_forms(&forms), to_forms(&g));
        prop_assert_eq!(
            reduced_pairing(&q_poly, &forms, &g, DEFAULT_TERM_CAP).unwrap(),
            direct_pairing(&q_poly, &forms, &g, DEFAULT_TERM_CAP).unwrap()
        );
    }

    #[test]
    fn exact_counts_ignore_row_and_column_order(
        (mg, p, r) in margins_strategy(4, 7).prop_flat_map(|mg| {
            let (m, n) = (mg.num_rows(), mg.num_cols());
            (Just(mg), permutation(m), permutation(n))
        })
    ) {
        let permuted = mg.permuted(&p, &r);
        prop_assert_eq!(
            exact_count_dp(&permuted, DEFAULT_EXACT_BUDGET).unwrap(),
            exact_count_dp(&mg, DEFAULT_EXACT_BUDGET).unwrap()
        );
        prop_assert_eq!(
            exact_count_dp(&mg.transpose(), DEFAULT_EXACT_BUDGET).unwrap(),
            exact_count_dp(&mg, DEFAULT_EXACT_BUDGET).unwrap()
        );
        prop_assert_eq!(
            exact_count_01(&permuted, DEFAULT_EXACT_BUDGET).unwrap(),
            exact_count_01(&mg, DEFAULT_EXACT_BUDGET).unwrap()
        );
        prop_assert_eq!(fisher_yates_count(&permuted), fisher_yates_count(&mg));
    }

    #[test]
    fn sample_permanent_follows_permuted_cells(
        (mg, p, r) in margins_strategy(3, 6).prop_flat_map(|mg| {
            let (m, n) = (mg.num_rows(), mg.num_cols());
            (Just(mg), permutation(m), permutation(n))
        }),
        seed in any::<u64>(),
    ) {
        let cells = draw_cells(mg.num_rows(), mg.num_cols(), seed, 0);
        let moved: Vec<Vec<f64>> = p.iter().map(|&i| r.iter().map(|&j| cells[i][j]).collect()).collect();
        let a = block_permanent(&mg, &cells, 22).unwrap();
        let b = block_permanent(&mg.permuted(&p, &r), &moved, 22).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn exact_surrogate_pipeline_is_exact(mg in margins_strategy(3, 6)) {
        let exact = q(exact_count_dp(&mg, DEFAULT_EXACT_BUDGET).unwrap().try_into().unwrap());
        for route in [PairingRoute::Direct, PairingRoute::Reduced] {
            prop_assert_eq!(lowrank_exact_count(&mg, route, DEFAULT_TERM_CAP).unwrap(), exact.clone());
        }
    }
}
