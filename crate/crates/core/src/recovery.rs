//! Turning SDP solutions into clusters: block extraction, gap-mode recovery
//! and recursive peeling.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::model::SbmInstance;
use crate::sdp::{
    leading_factor, make_lambda, make_lambda_gap, solve_recovery, SdpError, SolverConfig,
};

/// Default threshold for linking two nodes in [`extract_clusters`].
pub const DEFAULT_ENTRY_THRESHOLD: f64 = 0.25;
/// Block entries at least `1 − ALL_ONE_TOL` count as one.
pub const ALL_ONE_TOL: f64 = 1e-2;
/// Blocks with entries at most this are treated as zero by the ground-truth classifier.
pub const ZERO_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("entry threshold must lie in (0, 1], got {0}")]
    BadThreshold(f64),
    #[error("c_prime must be positive, got {0}")]
    BadCPrime(f64),
    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: SdpError,
    },
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("cannot parse cluster report line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockClass {
    AllOne,
    Critical,
    Zero,
}

impl BlockClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockClass::AllOne => "all_one",
            BlockClass::Critical => "critical",
            BlockClass::Zero => "zero",
        }
    }
}

impl fmt::Display for BlockClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all_one" => Ok(BlockClass::AllOne),
            "critical" => Ok(BlockClass::Critical),
            "zero" => Ok(BlockClass::Zero),
            other => Err(format!("unknown block class {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredCluster {
    /// Sorted node ids.
    pub nodes: Vec<usize>,
    pub class: BlockClass,
    /// Leading rank-one factor of the block, kept for critical blocks.
    pub factor: Option<Vec<f64>>,
}

impl RecoveredCluster {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    pub n: usize,
    /// Ordered by smallest member.
    pub clusters: Vec<RecoveredCluster>,
    pub unassigned: Vec<usize>,
}

impl ClusterReport {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            clusters: Vec::new(),
            unassigned: (0..n).collect(),
        }
    }

    fn from_clusters(n: usize, mut clusters: Vec<RecoveredCluster>) -> Self {
        for c in &mut clusters {
            c.nodes.sort_unstable();
        }
        clusters.sort_by_key(|c| c.nodes[0]);
        let mut assigned = vec![false; n];
        for c in &clusters {
            for &v in &c.nodes {
                assigned[v] = true;
            }
        }
        let unassigned = (0..n).filter(|&v| !assigned[v]).collect();
        Self {
            n,
            clusters,
            unassigned,
        }
    }

    pub fn recovered_nodes(&self) -> usize {
        self.n - self.unassigned.len()
    }

    pub fn all_one(&self) -> impl Iterator<Item = &RecoveredCluster> {
        self.clusters.iter().filter(|c| c.class == BlockClass::AllOne)
    }

    /// Canonical partition: node sets in sorted order.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.nodes.clone()).collect()
    }

    /// Every all-one cluster equals some ground-truth cluster.
    pub fn all_one_match_truth(&self, membership: &[usize]) -> bool {
        self.all_one().all(|c| is_true_cluster(&c.nodes, membership))
    }

    /// Set of ground-truth cluster labels recovered exactly (any class).
    pub fn exact_truth_labels(&self, membership: &[usize]) -> Vec<usize> {
        let mut labels: Vec<usize> = self
            .clusters
            .iter()
            .filter(|c| is_true_cluster(&c.nodes, membership))
            .map(|c| membership[c.nodes[0]])
            .collect();
        labels.sort_unstable();
        labels
    }

    /// `cluster <id> <class> : <nodes>` lines followed by `unassigned : <nodes>`.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        for (id, c) in self.clusters.iter().enumerate() {
            out.push_str(&format!("cluster {id} {} : {}\n", c.class, join(&c.nodes)));
        }
        out.push_str(&format!("unassigned : {}\n", join(&self.unassigned)));
        out
    }

    /// Inverse of [`to_text`](Self::to_text); factors are not serialized.
    pub fn from_text(text: &str) -> Result<Self, RecoveryError> {
        let mut clusters = Vec::new();
        let mut unassigned = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| RecoveryError::Parse {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let (head, tail) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let nodes = tail
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err("bad node id"))?;
            let words: Vec<&str> = head.split_whitespace().collect();
            match words.as_slice() {
                ["unassigned"] => unassigned = Some(nodes),
                ["cluster", _, class] => {
                    if nodes.is_empty() {
                        return Err(err("empty cluster"));
                    }
                    let class = class.parse::<BlockClass>().map_err(|e| err(&e))?;
                    clusters.push(RecoveredCluster {
                        nodes,
                        class,
                        factor: None,
                    });
                }
                _ => return Err(err("expected 'cluster <id> <class>' or 'unassigned'")),
            }
        }
        let unassigned = unassigned.ok_or(RecoveryError::Parse {
            line: 0,
            reason: "missing unassigned line".into(),
        })?;
        let n = clusters.iter().map(|c| c.len()).sum::<usize>() + unassigned.len();
        let mut seen = vec![false; n];
        for &v in clusters.iter().flat_map(|c| &c.nodes).chain(&unassigned) {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(RecoveryError::Parse {
                    line: 0,
                    reason: "clusters and unassigned do not partition 0..n".into(),
                });
            }
        }
        let report = Self::from_clusters(n, clusters);
        Ok(report)
    }
}

fn is_true_cluster(nodes: &[usize], membership: &[usize]) -> bool {
    let Some(&first) = nodes.first() else {
        return false;
    };
    let label = membership[first];
    nodes.iter().all(|&v| membership[v] == label)
        && membership.iter().filter(|&&l| l == label).count() == nodes.len()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, so results do not depend on visiting order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the graph `{ij : Ŷ_ij ≥ threshold}` with at least
/// two nodes, each classified as all-one or critical.
pub fn extract_clusters(y: &SymMatrix, entry_threshold: f64) -> Result<ClusterReport, RecoveryError> {
    if !(entry_threshold > 0.0 && entry_threshold <= 1.0) {
        return Err(RecoveryError::BadThreshold(entry_threshold));
    }
    let n = y.n();
    let mut sets = DisjointSets::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if y.get(i, j) >= entry_threshold {
                sets.union(i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = sets.find(v);
        groups[r].push(v);
    }
    let mut clusters = Vec::new();
    for nodes in groups.into_iter().filter(|g| g.len() >= 2) {
        let block = y.principal_submatrix(&nodes);
        let class = if block.min_entry() >= 1.0 - ALL_ONE_TOL {
            BlockClass::AllOne
        } else {
            BlockClass::Critical
        };
        let factor = match class {
            BlockClass::Critical => Some(leading_factor(&block)?),
            _ => None,
        };
        clusters.push(RecoveredCluster {
            nodes,
            class,
            factor,
        });
    }
    Ok(ClusterReport::from_clusters(n, clusters))
}

/// Class of each ground-truth block of `y`.
pub fn classify_truth_blocks(y: &SymMatrix, instance: &SbmInstance) -> Vec<BlockClass> {
    let spec = instance.spec();
    (0..spec.k())
        .map(|k| {
            let block = y.principal_submatrix(&spec.nodes(k));
            if block.max_abs() <= ZERO_TOL {
                BlockClass::Zero
            } else if block.min_entry() >= 1.0 - ALL_ONE_TOL {
                BlockClass::AllOne
            } else {
                BlockClass::Critical
            }
        })
        .collect()
}

/// `max |Ŷ_ij|` over pairs in different ground-truth clusters.
pub fn off_block_max(y: &SymMatrix, membership: &[usize]) -> f64 {
    let n = y.n();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if membership[i] != membership[j] {
                m = m.max(y.get(i, j).abs());
            }
        }
    }
    m
}

/// `Σ |Ŷ_ij|` over pairs in different ground-truth clusters.
pub fn off_block_mass(y: &SymMatrix, membership: &[usize]) -> f64 {
    let n = y.n();
    let mut m = 0.0;
    for i in 0..n {
        for j in 0..n {
            if membership[i] != membership[j] {
                m += y.get(i, j).abs();
            }
        }
    }
    m
}

/// Whether the split after the `k`th largest cluster (0-based) satisfies
/// `((p − q)/2)(s_k − s_{k+1}) ≥ κ√(p n log n)`.
pub fn gap_condition(instance: &SbmInstance, k: usize, kappa: f64) -> bool {
    let sizes = instance.spec().sizes();
    if k >= sizes.len() {
        return false;
    }
    let next = sizes.get(k + 1).copied().unwrap_or(0);
    let n = instance.n() as f64;
    0.5 * (instance.p() - instance.q()) * (sizes[k] - next) as f64
        >= kappa * (instance.p() * n * n.ln()).sqrt()
}

/// Solves the recovery SDP with the gap-mode penalty for a guessed size of the
/// largest unrecoverable cluster and extracts clusters.
pub fn recover_with_gap(
    a: &SymMatrix,
    p: f64,
    q: f64,
    s_small_guess: usize,
    config: &SolverConfig,
) -> Result<ClusterReport, RecoveryError> {
    let lambda = make_lambda_gap(p, q, a.n(), s_small_guess, config);
    let sol = solve_recovery(a, p, q, lambda, config)?;
    extract_clusters(&sol.y, DEFAULT_ENTRY_THRESHOLD)
}

/// `C′ = 2κ√p/(p − q)`: the size-to-`√(n log n)` ratio at which a cluster's
/// signal reaches `κ√(p n log n)`.
pub fn default_c_prime(p: f64, q: f64, kappa: f64) -> f64 {
    2.0 * kappa * p.sqrt() / (p - q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    NoneRecovered,
    MaxRounds,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::NoneRecovered => "none_recovered",
            Termination::MaxRounds => "max_rounds",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionRound {
    /// Global ids of the nodes still active at the start of the round.
    pub active: Vec<usize>,
    pub lambda: f64,
    /// Sizes of the clusters removed in this round.
    pub recovered_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionTrace {
    pub rounds: Vec<RecursionRound>,
    pub terminated: Termination,
}

impl RecursionTrace {
    /// Rounds that removed at least one cluster.
    pub fn recovery_rounds(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| !r.recovered_sizes.is_empty())
            .count()
    }

    /// `round,n_round,lambda,recovered_sizes` with sizes separated by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,n_round,lambda,recovered_sizes\n");
        for (i, r) in self.rounds.iter().enumerate() {
            let sizes: Vec<String> = r.recovered_sizes.iter().map(|s| s.to_string()).collect();
            out.push_str(&format!(
                "{},{},{:.16e},{}\n",
                i + 1,
                r.active.len(),
                r.lambda,
                sizes.join(";")
            ));
        }
        out
    }
}

/// Repeatedly solves the recovery SDP on the still-unclustered nodes,
/// removing all-one clusters of size at least `c_prime·√(n_ℓ log n)`.
///
/// λ in round ℓ is `κ√(p n_ℓ log n) + jitter`. The report holds the removed
/// clusters plus whatever the last round found but did not remove.
pub fn recursive_cluster(
    a: &SymMatrix,
    p: f64,
    q: f64,
    config: &SolverConfig,
    c_prime: f64,
    max_rounds: usize,
) -> Result<(ClusterReport, RecursionTrace), RecoveryError> {
    if !(c_prime > 0.0 && c_prime.is_finite()) {
        return Err(RecoveryError::BadCPrime(c_prime));
    }
    let n = a.n();
    let log_n = (n as f64).ln();
    let round_config = SolverConfig {
        m_param: Some(config.m_param.unwrap_or(n).max(n)),
        ..config.clone()
    };

    let mut active: Vec<usize> = (0..n).collect();
    let mut kept: Vec<RecoveredCluster> = Vec::new();
    let mut rounds = Vec::new();
    let mut leftovers: Vec<RecoveredCluster> = Vec::new();
    let mut terminated = Termination::MaxRounds;

    for round in 1..=max_rounds {
        leftovers.clear();
        let n_round = active.len();
        if n_round < 2 {
            rounds.push(RecursionRound {
                active: active.clone(),
                lambda: 0.0,
                recovered_sizes: Vec::new(),
            });
            terminated = Termination::NoneRecovered;
            break;
        }
        let lambda = make_lambda(p, n_round, &round_config)
            .map_err(|source| RecoveryError::Round { round, source })?;
        let sub = a.principal_submatrix(&active);
        let sol = solve_recovery(&sub, p, q, lambda, &round_config)
            .map_err(|source| RecoveryError::Round { round, source })?;
        let local = extract_clusters(&sol.y, DEFAULT_ENTRY_THRESHOLD)?;

        let min_size = c_prime * (n_round as f64 * log_n).sqrt();
        let mut removed = vec![false; n_round];
        let mut sizes = Vec::new();
        for c in local.clusters {
            let global = RecoveredCluster {
                nodes: c.nodes.iter().map(|&v| active[v]).collect(),
                class: c.class,
                factor: c.factor,
            };
            if c.class == BlockClass::AllOne && c.nodes.len() as f64 >= min_size {
                for &v in &c.nodes {
                    removed[v] = true;
                }
                sizes.push(global.len());
                kept.push(global);
            } else {
                leftovers.push(global);
            }
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let any = !sizes.is_empty();
        rounds.push(RecursionRound {
            active: active.clone(),
            lambda,
            recovered_sizes: sizes,
        });
        if !any {
            terminated = Termination::NoneRecovered;
            break;
        }
        active = active
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(&v, _)| v)
            .collect();
    }
    // unremoved finds are only meaningful from the final round
    if terminated == Termination::NoneRecovered {
        kept.append(&mut leftovers);
    }
    Ok((
        ClusterReport::from_clusters(n, kept),
        RecursionTrace { rounds, terminated },
    ))
}
