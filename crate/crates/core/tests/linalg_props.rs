use proptest::prelude::*;
use sbm_sdp::linalg::{
    eig_sym, eigenvalues_sym, eldridge_bound, improved_bound, min_eigenvalue, op_norm,
    psd_project, repaired_bound, weyl_bound, SymMatrix,
};

fn sym(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n)
            .prop_map(move |v| SymMatrix::from_fn(n, |i, j| v[i * n + j]))
    })
}

fn pair(max_n: usize) -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
    (2..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n * n),
        )
            .prop_map(move |(a, b)| {
                (
                    SymMatrix::from_fn(n, |i, j| a[i * n + j]),
                    SymMatrix::from_fn(n, |i, j| b[i * n + j]),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_sorted_and_reconstructs(m in sym(64)) {
        let e = eig_sym(&m).unwrap();
        prop_assert!(e.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(e.reconstruct().max_abs_diff(&m) < 1e-9);
    }

    #[test]
    fn psd_projection_is_psd_and_idempotent(m in sym(24)) {
        let p = psd_project(&m).unwrap();
        prop_assert!(min_eigenvalue(&p).unwrap() >= -1e-10);
        prop_assert!(psd_project(&p).unwrap().max_abs_diff(&p) < 1e-10);
        // projecting a PSD matrix leaves it alone
        let g = m.add(&m).unwrap();
        let psd = psd_project(&g).unwrap();
        prop_assert!(psd_project(&psd).unwrap().max_abs_diff(&psd) < 1e-9);
    }

    #[test]
    fn weyl_holds_both_ways((m, h) in pair(12), t_frac in 0.0f64..1.0) {
        let n = m.n();
        let t = ((n as f64 * t_frac) as usize).min(n - 1);
        let before = eigenvalues_sym(&m).unwrap()[t];
        let after = eigenvalues_sym(&m.add(&h).unwrap()).unwrap()[t];
        let w = weyl_bound(&m, &h, t).unwrap();
        prop_assert!((w - op_norm(&h).unwrap()).abs() < 1e-12);
        prop_assert!(after <= before + w + 1e-10);
        prop_assert!(after >= before - w - 1e-10);
    }

    #[test]
    fn refined_bounds_hold_when_applicable((m, h) in pair(12), t_frac in 0.0f64..1.0) {
        let n = m.n();
        let t = ((n - 1) as f64 * t_frac) as usize;
        let actual = eigenvalues_sym(&m.add(&h).unwrap()).unwrap()[t];
        let e = eldridge_bound(&m, &h, t, t).unwrap();
        let i = improved_bound(&m, &h, t, t).unwrap();
        let r = repaired_bound(&m, &h, t, t).unwrap();
        if let Some(b) = e.value() {
            prop_assert!(actual <= b + 1e-10);
        }
        if let Some(b) = r.value() {
            prop_assert!(actual <= b + 1e-10);
        }
        // the improved estimate is not a guaranteed bound (see the unit test
        // improved_estimate_can_undershoot) but never exceeds the other two
        if let Some(bi) = i.value() {
            if let Some(be) = e.value() {
                prop_assert!(bi <= be + 1e-12);
            }
            if let Some(br) = r.value() {
                prop_assert!(bi <= br + 1e-12);
            }
        }
    }

    #[test]
    fn refined_bounds_hold_for_wider_windows((m, h) in pair(12), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let n = m.n();
        let big_t = ((n - 1) as f64 * a) as usize;
        let t = (big_t as f64 * b) as usize;
        let actual = eigenvalues_sym(&m.add(&h).unwrap()).unwrap()[t];
        if let Some(v) = eldridge_bound(&m, &h, t, big_t).unwrap().value() {
            prop_assert!(actual <= v + 1e-10);
        }
        if let Some(v) = repaired_bound(&m, &h, t, big_t).unwrap().value() {
            prop_assert!(actual <= v + 1e-10);
        }
    }
}
