mod common;

use sbm_sdp::linalg::SymMatrix;
use sbm_sdp::sdp::{BoxKind, SdpProblem};

#[test]
fn reference_finds_the_clique() {
    let p = SdpProblem::new(SymMatrix::filled(4, 0.5), 1.0, BoxKind::FullBox01).unwrap();
    let r = common::reference_solve(&p);
    assert!(r.y.max_abs_diff(&SymMatrix::ones(4)) < 1e-8);
    assert!((r.objective - 4.0).abs() < 1e-8);
    assert!(r.gap() < 1e-8 && r.lower <= 4.0 + 1e-9 && r.upper >= 4.0 - 1e-9);
}

#[test]
fn reference_zero_when_penalty_dominates() {
    let p = SdpProblem::new(SymMatrix::filled(4, 0.5), 3.0, BoxKind::FullBox01).unwrap();
    let r = common::reference_solve(&p);
    assert!(r.y.max_abs() < 1e-8);
    assert!(r.gap() < 1e-8);
}

#[test]
fn reference_diag_only_is_top_eigenvector() {
    // max ⟨C − λI, Y⟩ with Y ⪰ 0, diag ≤ 1 on a rank-one C = vvᵀ
    let v = [1.0, 1.0, 0.0];
    let c = SymMatrix::from_fn(3, |i, j| v[i] * v[j]);
    let p = SdpProblem::new(c, 0.5, BoxKind::DiagOnly).unwrap();
    let r = common::reference_solve(&p);
    // Y = J on the first two coordinates gives 4 − 1 = 3
    assert!((r.objective - 3.0).abs() < 1e-7, "{}", r.objective);
    assert!(r.gap() < 1e-7);
}
