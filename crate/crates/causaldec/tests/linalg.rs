use causaldec::linalg::{rank_mod_p, sparse_from_dense, DenseMatrix, SparseMatrix};
use causaldec::scalar::{frac, Q};
use proptest::prelude::*;

fn dense(n: usize, m: usize, e: &[(i64, i64)]) -> DenseMatrix {
    let cols: Vec<Vec<Q>> = (0..m).map(|j| (0..n).map(|i| frac(e[i * m + j].0, e[i * m + j].1)).collect()).collect();
    DenseMatrix::from_columns(n, &cols)
}

/// Cofactor expansion along the first row.
fn det_by_minors(a: &DenseMatrix) -> Q {
    let n = a.rows();
    if n == 0 {
        return Q::from(1u32);
    }
    let mut total = Q::from(0u32);
    for j in 0..n {
        let cols: Vec<Vec<Q>> = (0..n)
            .filter(|&c| c != j)
            .map(|c| (1..n).map(|r| a.get(r, c).clone()).collect())
            .collect();
        let minor = DenseMatrix::from_columns(n - 1, &cols);
        let t = a.get(0, j) * det_by_minors(&minor);
        if j % 2 == 0 {
            total += t;
        } else {
            total -= t;
        }
    }
    total
}

fn entries(len: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-3i64..4, 1i64..4), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bareiss_matches_cofactors(e in entries(16)) {
        let a = dense(4, 4, &e);
        prop_assert_eq!(a.det(), det_by_minors(&a));
    }

    #[test]
    fn rank_is_transpose_invariant(e in entries(15)) {
        let a = dense(3, 5, &e);
        prop_assert_eq!(a.rank(), a.transpose().rank());
        prop_assert_eq!(a.rank() + a.kernel().len(), 5);
    }

    #[test]
    fn modular_rank_bounds_exact_rank(e in entries(20)) {
        let a = dense(4, 5, &e);
        let rows: Vec<_> = (0..4).map(|i| sparse_from_dense(a.row(i))).collect();
        let p = rank_mod_p(&rows, 5).unwrap();
        prop_assert!(p <= a.rank());
        let s = SparseMatrix::from_rows(5, rows);
        prop_assert_eq!(s.rank(), a.rank());
    }

    #[test]
    fn singular_after_duplicate_row(e in entries(9)) {
        let a = dense(3, 3, &e);
        let r0 = a.row(0).to_vec();
        let cols: Vec<Vec<Q>> = (0..3).map(|j| vec![r0[j].clone(), a.get(1, j).clone(), r0[j].clone()]).collect();
        prop_assert_eq!(DenseMatrix::from_columns(3, &cols).det(), 0u32);
    }
}
