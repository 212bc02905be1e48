mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sbm_sdp::linalg::{min_eigenvalue, SymMatrix};
use sbm_sdp::sdp::{solve, BoxKind, SdpProblem, SolverConfig};

fn tight() -> SolverConfig {
    SolverConfig {
        tol_primal: 1e-8,
        tol_dual: 1e-8,
        max_iter: 50_000,
        ..SolverConfig::default()
    }
}

fn uniform_problem(n: usize, lambda: f64, bounds: BoxKind, seed: u64) -> SdpProblem {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    SdpProblem::new(c, lambda, bounds).unwrap()
}

fn solved(problem: &SdpProblem, cfg: &SolverConfig) -> sbm_sdp::sdp::SdpSolution {
    solve(problem, cfg).or_else(|e| e.into_best()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn permuting_the_input_permutes_the_solution(
        n in 3usize..14,
        lambda in 0.0f64..1.5,
        diag_only in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let bounds = if diag_only { BoxKind::DiagOnly } else { BoxKind::FullBox01 };
        let problem = uniform_problem(n, lambda, bounds, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let permuted = SdpProblem::new(problem.c.permute(&perm), lambda, bounds).unwrap();
        let cfg = tight();
        let a = solved(&problem, &cfg);
        let b = solved(&permuted, &cfg);
        prop_assert!((a.objective - b.objective).abs() < 1e-6);
        prop_assert!(a.y.permute(&perm).max_abs_diff(&b.y) < 1e-4);
    }

    #[test]
    fn solutions_are_feasible(seed in 0u64..1000) {
        let problem = common::random_problem(seed);
        let sol = solved(&problem, &SolverConfig::default());
        let y = &sol.y;
        for i in 0..y.n() {
            prop_assert!(y.get(i, i) <= 1.0 + 1e-12);
            for j in 0..y.n() {
                prop_assert_eq!(y.get(i, j), y.get(j, i));
                if problem.bounds == BoxKind::FullBox01 {
                    prop_assert!((0.0..=1.0).contains(&y.get(i, j)));
                }
            }
        }
        prop_assert!(min_eigenvalue(y).unwrap() >= -1e-4 * y.frobenius_norm().max(1.0));
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    for seed in 0..10 {
        let problem = common::random_problem(seed);
        let a = solved(&problem, &SolverConfig::default());
        let b = solved(&problem, &SolverConfig::default());
        assert_eq!(a.y.as_slice(), b.y.as_slice(), "seed {seed}");
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}

#[test]
fn objective_never_beats_the_reference_upper_bound() {
    for seed in 0..8 {
        let problem = common::random_problem(seed);
        let sol = solved(&problem, &tight());
        let r = common::reference_solve(&problem);
        assert!(sol.objective <= r.upper + 1e-6, "seed {seed}: {} > {}", sol.objective, r.upper);
    }
}
