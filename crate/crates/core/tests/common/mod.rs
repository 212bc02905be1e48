//! Test-only reference solver: long-horizon projected gradient ascent where
//! each projection onto PSD ∩ box is computed by accelerated ascent on its
//! dual. Shares nothing with the library's ADMM loop beyond the
//! eigendecomposition.

#![allow(dead_code)]

use sbm_sdp::linalg::{max_eigenvalue, psd_project, SymMatrix};
use sbm_sdp::sdp::{BoxKind, SdpProblem};

fn zip(a: &SymMatrix, b: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| f(x, y))
        .collect();
    SymMatrix::from_row_major(a.n(), data).unwrap()
}

fn dist(a: &SymMatrix, b: &SymMatrix) -> f64 {
    zip(a, b, |x, y| x - y).frobenius_norm()
}

fn bounded(bounds: BoxKind, i: usize, j: usize) -> bool {
    bounds == BoxKind::FullBox01 || i == j
}

fn box_violation(y: &SymMatrix, bounds: BoxKind) -> f64 {
    SymMatrix::from_fn(y.n(), |i, j| {
        let x = y.get(i, j);
        match bounds {
            BoxKind::FullBox01 => x - x.clamp(0.0, 1.0),
            BoxKind::DiagOnly if i == j => (x - 1.0).max(0.0),
            BoxKind::DiagOnly => 0.0,
        }
    })
    .frobenius_norm()
}

// prox of W ↦ Σ max(−W_ij, 0) restricted to the feasible multiplier signs:
// positive parts are lower-bound multipliers, unbounded entries carry none
fn prox(v: &SymMatrix, bounds: BoxKind) -> SymMatrix {
    SymMatrix::from_fn(v.n(), |i, j| {
        let x = v.get(i, j);
        if !bounded(bounds, i, j) {
            0.0
        } else if x < -1.0 {
            x + 1.0
        } else if x > 0.0 && bounds == BoxKind::FullBox01 {
            x
        } else {
            0.0
        }
    })
}

/// Projection of `z` onto PSD ∩ box, returned as `Y = (Z + W)₊` together with
/// the box multiplier `W`. FISTA on the dual `max −½‖(Z+W)₊‖² + Σ min(W, 0)`,
/// warm-started from `w0`.
pub fn project(
    z: &SymMatrix,
    bounds: BoxKind,
    w0: &SymMatrix,
    tol: f64,
    max_iter: usize,
) -> (SymMatrix, SymMatrix) {
    let mut w = w0.clone();
    let mut v = w.clone();
    let mut t = 1.0f64;
    let mut y = psd_project(&z.add(&w).unwrap()).unwrap();
    for _ in 0..max_iter {
        let grad = psd_project(&z.add(&v).unwrap()).unwrap();
        let w_next = prox(&v.sub(&grad).unwrap(), bounds);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        v = zip(&w_next, &w, |a, b| a + momentum * (a - b));
        w = w_next;
        t = t_next;
        let y_next = psd_project(&z.add(&w).unwrap()).unwrap();
        let moved = dist(&y_next, &y);
        y = y_next;
        if moved <= tol && box_violation(&y, bounds) <= tol {
            break;
        }
    }
    (y, w)
}

/// Reference iterate with certified bounds on the optimal value.
#[derive(Clone, Debug)]
pub struct Reference {
    pub y: SymMatrix,
    pub objective: f64,
    /// Objective of a strictly feasible repair of `y`.
    pub lower: f64,
    /// Weak-duality bound built from the box multipliers.
    pub upper: f64,
}

impl Reference {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Projected gradient ascent `Y ← Π(Y + ηG)` on the linear objective until
/// the iterate stops moving.
pub fn reference_solve(problem: &SdpProblem) -> Reference {
    let n = problem.n();
    let g = problem.cost();
    let eta = 10.0;
    let mut y = SymMatrix::zeros(n);
    let mut w = SymMatrix::zeros(n);
    for _ in 0..2000 {
        let z = y.add(&g.scale(eta)).unwrap();
        let (y_next, w_next) = project(&z, problem.bounds, &w, 1e-11, 50_000);
        let moved = dist(&y_next, &y);
        y = y_next;
        w = w_next;
        if moved <= 1e-10 {
            break;
        }
    }
    let objective = problem.objective(&y);

    // at the fixed point ηG = −W + (NSD part), so U − L = −W/η
    let u = w.map(|x| (-x / eta).max(0.0));
    let l = w.map(|x| (x / eta).max(0.0));
    let slack = g.sub(&u).unwrap().add(&l).unwrap();
    let upper =
        u.as_slice().iter().sum::<f64>() + n as f64 * max_eigenvalue(&slack).unwrap().max(0.0);

    // blend toward a strictly feasible point until the box holds
    let yp = psd_project(&y).unwrap();
    let y0 = SymMatrix::from_fn(n, |i, j| if i == j { 0.5 } else { 0.25 });
    let mut t = 1.0f64;
    for i in 0..n {
        for j in 0..n {
            if !bounded(problem.bounds, i, j) {
                continue;
            }
            let (a, b) = (yp.get(i, j), y0.get(i, j));
            if a > 1.0 {
                t = t.min((1.0 - b) / (a - b));
            }
            if a < 0.0 && problem.bounds == BoxKind::FullBox01 {
                t = t.min(b / (b - a));
            }
        }
    }
    let feasible = zip(&yp, &y0, |a, b| t * a + (1.0 - t) * b);
    Reference {
        y,
        objective,
        lower: problem.objective(&feasible),
        upper,
    }
}

/// Seeded random problem: a shifted SBM adjacency or a uniform symmetric
/// matrix, with λ drawn on the scale of the matrix.
pub fn random_problem(seed: u64) -> SdpProblem {
    use rand::{Rng, SeedableRng};
    use sbm_sdp::model::{generate_sbm, shift_with_center, ClusterSpec, SbmInstance};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=20);
    let bounds = if seed % 5 == 4 {
        BoxKind::DiagOnly
    } else {
        BoxKind::FullBox01
    };
    let (c, lambda) = if seed.is_multiple_of(2) {
        let k1 = rng.random_range(1..=n);
        let mut sizes = vec![k1];
        if n > k1 {
            sizes.push(n - k1);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let p = rng.random_range(0.6..0.95);
        let q = rng.random_range(0.05..0.4);
        let inst = SbmInstance::new(ClusterSpec::new(sizes).unwrap(), p, q).unwrap();
        let c = shift_with_center(&generate_sbm(&inst, seed).a, 0.5 * (p + q));
        (c, rng.random_range(0.0..0.15 * n as f64))
    } else {
        let c = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        (c, rng.random_range(0.0..2.0))
    };
    SdpProblem::new(c, lambda, bounds).unwrap()
}
