//! Unbalanced stochastic block model: instances, sampling, noise
//! decomposition and the large-cluster semirandom adversary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::ops::Range;
use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("cluster sizes must be non-empty, positive and non-increasing, got {0:?}")]
    BadSizes(Vec<usize>),
    #[error("invalid edge probabilities p={p}, q={q}: need 0 <= q < p <= 1")]
    BadProbabilities { p: f64, q: f64 },
    #[error("p={p} is below the connectivity floor log(n)/n = {floor}")]
    BelowConnectivity { p: f64, floor: f64 },
    #[error("heterogeneous probability q_{i}{j}={value} outside [0, q={q}]")]
    BadHeterogeneous { i: usize, j: usize, value: f64, q: f64 },
    #[error("illegal adversary edit at ({i}, {j}): {rule}")]
    IllegalEdit { i: usize, j: usize, rule: SemirandomRule },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Cluster sizes `s_1 ≥ s_2 ≥ … ≥ s_K`, nodes laid out contiguously by cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterSpec {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl ClusterSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self, ModelError> {
        if sizes.is_empty() || sizes.contains(&0) || sizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(ModelError::BadSizes(sizes));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in &sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self { sizes, offsets })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Node range of cluster `k` (0-based).
    pub fn range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn nodes(&self, k: usize) -> Vec<usize> {
        self.range(k).collect()
    }

    pub fn membership(&self) -> Vec<usize> {
        let mut m = Vec::with_capacity(self.n());
        for (k, &s) in self.sizes.iter().enumerate() {
            m.extend(std::iter::repeat_n(k, s));
        }
        m
    }
}

/// A block model: cluster layout plus intra/inter edge probabilities.
#[derive(Clone, Debug)]
pub struct SbmInstance {
    spec: ClusterSpec,
    p: f64,
    q: f64,
    membership: Vec<usize>,
    y_star: SymMatrix,
}

impl SbmInstance {
    pub fn new(spec: ClusterSpec, p: f64, q: f64) -> Result<Self, ModelError> {
        if !(p > 0.0 && p <= 1.0 && q >= 0.0 && q < 1.0 && q < p) {
            return Err(ModelError::BadProbabilities { p, q });
        }
        let n = spec.n();
        let floor = (n as f64).ln() / n as f64;
        if p < floor {
            return Err(ModelError::BelowConnectivity { p, floor });
        }
        let membership = spec.membership();
        let y_star = SymMatrix::from_fn(n, |i, j| {
            if membership[i] == membership[j] {
                1.0
            } else {
                0.0
            }
        });
        Ok(Self {
            spec,
            p,
            q,
            membership,
            y_star,
        })
    }

    pub fn spec(&self) -> &ClusterSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    /// Ground-truth co-membership matrix `Y*`.
    pub fn y_star(&self) -> &SymMatrix {
        &self.y_star
    }

    #[inline]
    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        self.membership[i] == self.membership[j]
    }

    /// Block signal `((p − q)/2)·s_k`.
    pub fn signal(&self, k: usize) -> f64 {
        0.5 * (self.p - self.q) * self.spec.sizes[k] as f64
    }

    /// Default center `(p + q)/2` of the shifted adjacency matrix.
    pub fn center(&self) -> f64 {
        0.5 * (self.p + self.q)
    }

    /// `E[A] = (p − q)Y* + qJ`.
    pub fn expected_adjacency(&self) -> SymMatrix {
        let (p, q) = (self.p, self.q);
        self.y_star.map(|y| (p - q) * y + q)
    }
}

/// A sampled symmetric 0/1 adjacency matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencySample {
    pub a: SymMatrix,
    pub rng_seed: u64,
}

impl AdjacencySample {
    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn principal(&self, nodes: &[usize]) -> SymMatrix {
        self.a.principal_submatrix(nodes)
    }
}

// One uniform draw per unordered pair (i ≤ j), in row-major upper-triangle
// order, from a single ChaCha stream. Any two samplers that walk the pairs
// this way and only differ in the per-pair probability share their draws.
fn sample_pairs(n: usize, seed: u64, mut prob: impl FnMut(usize, usize) -> f64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let u: f64 = rng.random();
            if u < prob(i, j) {
                a.set(i, j, 1.0);
            }
        }
    }
    a
}

/// Draws `A` with `A_ij ~ Bernoulli(p)` inside clusters (including the
/// diagonal) and `Bernoulli(q)` across clusters.
pub fn generate_sbm(instance: &SbmInstance, seed: u64) -> AdjacencySample {
    let (p, q) = (instance.p, instance.q);
    let a = sample_pairs(instance.n(), seed, |i, j| {
        if instance.same_cluster(i, j) {
            p
        } else {
            q
        }
    });
    AdjacencySample { a, rng_seed: seed }
}

/// As [`generate_sbm`] but with inter-cluster probabilities `q_ij ≤ q` read
/// from `q_matrix` (intra-cluster entries of `q_matrix` are ignored).
pub fn generate_heterogeneous(
    instance: &SbmInstance,
    q_matrix: &SymMatrix,
    seed: u64,
) -> Result<AdjacencySample, ModelError> {
    check_heterogeneous(instance, q_matrix)?;
    let p = instance.p;
    let a = sample_pairs(instance.n(), seed, |i, j| {
        if instance.same_cluster(i, j) {
            p
        } else {
            q_matrix.get(i, j)
        }
    });
    Ok(AdjacencySample { a, rng_seed: seed })
}

fn check_heterogeneous(instance: &SbmInstance, q_matrix: &SymMatrix) -> Result<(), ModelError> {
    let n = instance.n();
    if q_matrix.n() != n {
        return Err(LinalgError::DimensionMismatch {
            left: n,
            right: q_matrix.n(),
        }
        .into());
    }
    for i in 0..n {
        for j in i..n {
            if instance.same_cluster(i, j) {
                continue;
            }
            let v = q_matrix.get(i, j);
            if !(0.0..=instance.q).contains(&v) {
                return Err(ModelError::BadHeterogeneous {
                    i,
                    j,
                    value: v,
                    q: instance.q,
                });
            }
        }
    }
    Ok(())
}

/// `A − c·J`.
pub fn shift_with_center(a: &SymMatrix, center: f64) -> SymMatrix {
    a.map(|x| x - center)
}

/// Returns `(Ā, W)` with `Ā = A − ((p+q)/2)J` and `W = A − E[A]`.
pub fn shift_and_noise(
    sample: &AdjacencySample,
    instance: &SbmInstance,
) -> Result<(SymMatrix, SymMatrix), ModelError> {
    sample.a.check_same(instance.y_star())?;
    let shifted = shift_with_center(&sample.a, instance.center());
    let noise = sample.a.sub(&instance.expected_adjacency())?;
    Ok((shifted, noise))
}

/// Which semirandom rule an edit broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemirandomRule {
    /// Across clusters the adversary may only delete edges.
    InterClusterMayOnlyDelete,
    /// Inside a large cluster the adversary may only add edges.
    IntraClusterMayOnlyAdd,
    /// Inside a cluster below the signal threshold nothing may change.
    IntraClusterFrozen,
    NotBinary,
    OutOfRange,
}

impl fmt::Display for SemirandomRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::InterClusterMayOnlyDelete => "inter-cluster entries may only decrease",
            Self::IntraClusterMayOnlyAdd => "intra-cluster entries of large clusters may only increase",
            Self::IntraClusterFrozen => "intra-cluster entries of clusters below the threshold are frozen",
            Self::NotBinary => "new value must be 0 or 1",
            Self::OutOfRange => "node index out of range",
        };
        f.write_str(s)
    }
}

/// Set `A_ij = A_ji = value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edit {
    pub i: usize,
    pub j: usize,
    pub value: u8,
}

/// `(3/2)·κ·√(p n log n)`: clusters with `((p−q)/2)s_k` at or above this may
/// receive added edges.
pub fn default_adversary_threshold(instance: &SbmInstance, kappa: f64) -> f64 {
    let n = instance.n() as f64;
    1.5 * kappa * (instance.p * n * n.ln()).sqrt()
}

fn check_entry(
    instance: &SbmInstance,
    i: usize,
    j: usize,
    before: f64,
    after: f64,
    threshold: f64,
) -> Result<(), ModelError> {
    let illegal = |rule| Err(ModelError::IllegalEdit { i, j, rule });
    if after != 0.0 && after != 1.0 {
        return illegal(SemirandomRule::NotBinary);
    }
    if instance.same_cluster(i, j) {
        let k = instance.membership[i];
        if instance.signal(k) >= threshold {
            if after < before {
                return illegal(SemirandomRule::IntraClusterMayOnlyAdd);
            }
        } else if after != before {
            return illegal(SemirandomRule::IntraClusterFrozen);
        }
    } else if after > before {
        return illegal(SemirandomRule::InterClusterMayOnlyDelete);
    }
    Ok(())
}

/// Applies adversary edits to a sample, rejecting any edit the large-cluster
/// semirandom model forbids. Legality is judged against the original sample.
pub fn apply_semirandom_adversary(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    edits: &[Edit],
    threshold_signal: f64,
) -> Result<AdjacencySample, ModelError> {
    let n = sample.n();
    let mut a = sample.a.clone();
    for e in edits {
        if e.i >= n || e.j >= n {
            return Err(ModelError::IllegalEdit {
                i: e.i,
                j: e.j,
                rule: SemirandomRule::OutOfRange,
            });
        }
        let before = sample.a.get(e.i, e.j);
        check_entry(instance, e.i, e.j, before, e.value as f64, threshold_signal)?;
        a.set(e.i, e.j, e.value as f64);
    }
    Ok(AdjacencySample {
        a,
        rng_seed: sample.rng_seed,
    })
}

/// Re-checks every entry of `edited` against `original` under the two
/// semirandom rules.
pub fn audit_semirandom(
    original: &AdjacencySample,
    edited: &AdjacencySample,
    instance: &SbmInstance,
    threshold_signal: f64,
) -> Result<(), ModelError> {
    original.a.check_same(&edited.a)?;
    let n = original.n();
    for i in 0..n {
        for j in i..n {
            check_entry(
                instance,
                i,
                j,
                original.a.get(i, j),
                edited.a.get(i, j),
                threshold_signal,
            )?;
        }
    }
    Ok(())
}

/// Edits realizing heterogeneous inter-cluster probabilities by coupling:
/// each present inter-cluster edge is deleted independently with probability
/// `1 − q_ij/q`, so the result is distributed as a `Bernoulli(q_ij)` draw.
pub fn heterogeneous_coupling_edits<R: Rng>(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    q_matrix: &SymMatrix,
    rng: &mut R,
) -> Result<Vec<Edit>, ModelError> {
    check_heterogeneous(instance, q_matrix)?;
    let n = sample.n();
    let q = instance.q;
    let mut edits = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if instance.same_cluster(i, j) || sample.a.get(i, j) == 0.0 {
                continue;
            }
            let keep = if q > 0.0 { q_matrix.get(i, j) / q } else { 0.0 };
            if rng.random::<f64>() >= keep {
                edits.push(Edit { i, j, value: 0 });
            }
        }
    }
    Ok(edits)
}
