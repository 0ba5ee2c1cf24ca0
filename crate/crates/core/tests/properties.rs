use bossreg::linalg::{back_solve, qr_factor, RANK_TOLERANCE};
use bossreg::paths::{boss_path, fs_path};
use bossreg::Dataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(n: usize, p: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-10.0..10.0f64, n * p).prop_map(move |v| DMatrix::from_vec(n, p, v))
}

fn problem() -> impl Strategy<Value = (DMatrix<f64>, DVector<f64>)> {
    (2usize..8, 12usize..40).prop_flat_map(|(p, n)| {
        (matrix(n, p), proptest::collection::vec(-5.0..5.0f64, n).prop_map(DVector::from_vec))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_reconstructs_and_is_orthonormal(x in matrix(20, 5)) {
        let qr = qr_factor(&x).unwrap();
        prop_assume!(qr.rank() == 5);
        let q = qr.q_matrix();
        let r = qr.r_matrix();
        let gram = q.transpose() * &q;
        prop_assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-10);
        let scale = x.amax().max(1.0);
        prop_assert!((&q * &r - x.select_columns(qr.order())).amax() < 1e-9 * scale);
        for i in 0..5 {
            for j in 0..i {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
            prop_assert!(r[(i, i)].abs() > RANK_TOLERANCE);
        }
    }

    #[test]
    fn back_solve_inverts_upper_triangular(x in matrix(12, 4), b in proptest::collection::vec(-3.0..3.0f64, 4)) {
        let qr = qr_factor(&x).unwrap();
        prop_assume!(qr.rank() == 4);
        let r = qr.r_matrix();
        let b = DVector::from_vec(b);
        let sol = back_solve(&r, &b).unwrap();
        prop_assert!((&r * sol - b).amax() < 1e-8);
    }

    #[test]
    fn paths_have_monotone_rss((x, y) in problem()) {
        let data = Dataset::unnamed(x, y).unwrap();
        for path in [boss_path(&data).unwrap(), fs_path(&data).unwrap()] {
            let tol = 1e-9 * path.rss[0].max(1.0);
            for w in path.rss.as_slice().windows(2) {
                prop_assert!(w[1] <= w[0] + tol);
            }
            prop_assert!(path.supports.iter().all(|s| s.len() <= data.p()));
        }
    }

    #[test]
    fn boss_fits_the_full_model_at_the_end((x, y) in problem()) {
        let data = Dataset::unnamed(x, y).unwrap();
        let boss = boss_path(&data).unwrap();
        let fs = fs_path(&data).unwrap();
        let last = boss.len() - 1;
        prop_assert_eq!(last, fs.len() - 1);
        let scale = boss.rss[0].max(1.0);
        prop_assert!((boss.rss[last] - fs.rss[last]).abs() < 1e-8 * scale);
    }
}
