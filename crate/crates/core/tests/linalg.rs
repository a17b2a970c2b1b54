use blockspec::linalg::{
    eigh_banded, eigh_dense, log_abs_det, spd_inv_sqrt, Lu, Matrix, SymmetricBanded, SymmetricDense,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn banded_strategy() -> impl Strategy<Value = SymmetricBanded> {
    (2usize..=24).prop_flat_map(|n| {
        (0usize..n, prop::collection::vec(-10.0f64..10.0, n * n)).prop_map(move |(bw, vals)| {
            let mut m = SymmetricBanded::zeros(n, bw);
            for r in 0..n {
                for c in r..(r + bw + 1).min(n) {
                    m.set(r, c, vals[r * n + c]);
                }
            }
            m
        })
    })
}

fn symmetric_strategy(max: usize) -> impl Strategy<Value = SymmetricDense> {
    (1usize..=max).prop_flat_map(|n| {
        prop::collection::vec(-5.0f64..5.0, n * n)
            .prop_map(move |v| SymmetricDense::from_fn(n, |i, j| v[i.min(j) * n + i.max(j)]))
    })
}

fn oracle_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn banded_eigenvalues_match_reference(m in banded_strategy()) {
        let ours = eigh_banded(&m, 1e-10).unwrap();
        let reference = oracle_eigenvalues(&m.to_matrix());
        let scale = 1.0 + m.inf_norm();
        for (a, b) in ours.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-11 * scale, "{} vs {}", a, b);
        }
        prop_assert!(ours.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dense_decomposition_reconstructs_the_matrix(m in symmetric_strategy(9)) {
        let eig = eigh_dense(&m, 1e-10).unwrap();
        let v = eig.vectors.unwrap();
        let n = m.dim();
        for i in 0..n {
            for j in 0..n {
                let back: f64 = (0..n).map(|k| v[(i, k)] * eig.values[k] * v[(j, k)]).sum();
                prop_assert!((back - m.get(i, j)).abs() <= 1e-11 * (1.0 + m.inf_norm()));
            }
        }
        let reference = oracle_eigenvalues(&m.to_matrix());
        for (a, b) in eig.values.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-11 * (1.0 + m.inf_norm()));
        }
    }

    #[test]
    fn log_det_matches_eigenvalue_product(m in symmetric_strategy(7)) {
        let ev = oracle_eigenvalues(&m.to_matrix());
        prop_assume!(ev.iter().all(|l| l.abs() > 1e-3));
        let (sign, log) = log_abs_det(&m.to_matrix());
        let expected: f64 = ev.iter().map(|l| l.abs().ln()).sum();
        let neg = ev.iter().filter(|l| **l < 0.0).count();
        prop_assert_eq!(sign, if neg % 2 == 0 { 1 } else { -1 });
        prop_assert!((log - expected).abs() <= 1e-9);
    }

    #[test]
    fn lu_solve_recovers_the_right_hand_side(m in symmetric_strategy(8), x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let a = m.shifted(-20.0).to_matrix();
        let x = &x[..a.dim()];
        let b = a.mul_vec(x);
        let solved = Lu::new(&a).solve_vec(&b).unwrap();
        for (s, t) in solved.iter().zip(x) {
            prop_assert!((s - t).abs() <= 1e-10);
        }
    }

    #[test]
    fn inverse_square_root_whitens(m in symmetric_strategy(6)) {
        let spd = SymmetricDense::from_fn(m.dim(), |i, j| {
            (0..m.dim()).map(|k| m.get(i, k) * m.get(j, k)).sum::<f64>() + if i == j { 1.0 } else { 0.0 }
        });
        let s = spd_inv_sqrt(&spd, 1e-10).unwrap();
        let w = spd.congruence(&s.to_matrix());
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((w.get(i, j) - target).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn singular_matrix_is_flagged() {
    let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert!(Lu::new(&m).is_singular());
    assert!(Lu::new(&m).solve_vec(&[1.0, 1.0]).is_none());
}
