//! Clustering with a faulty same-cluster oracle.
//!
//! The oracle answers "are `i` and `j` in the same cluster?" correctly with
//! probability `(1 + δ)/2`. Each pair's answer comes from its own keyed
//! ChaCha stream, so answers do not depend on the order of asks, and a
//! repeated ask replays the cached bit without being counted again.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::Mutex;
use thiserror::Error;

use crate::io::KeyValues;
use crate::linalg::SymMatrix;
use crate::recovery::{extract_clusters, BlockClass, ClusterReport, RecoveredCluster, RecoveryError};
use crate::recovery::DEFAULT_ENTRY_THRESHOLD;
use crate::sdp::{make_lambda, solve_recovery, SdpError, SolverConfig};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("self query ({0}, {0})")]
    SelfQuery(usize),
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("empty voter set")]
    EmptyVoters,
    #[error("candidate {0} is one of the voters")]
    CandidateIsVoter(usize),
    #[error("delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("invalid oracle configuration: {0}")]
    BadConfig(String),
    #[error("no cluster found after {rounds} rounds")]
    NoClusterFound { rounds: usize },
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
}

/// Simulated oracle with answer cache and query counter.
#[derive(Clone, Debug)]
pub struct OracleSession {
    membership: Vec<usize>,
    delta: f64,
    seed: u64,
    cache: HashMap<(usize, usize), bool>,
    query_count: u64,
    // drives subsampling only
    session_rng: ChaCha8Rng,
}

impl OracleSession {
    pub fn new(membership: Vec<usize>, delta: f64, seed: u64) -> Result<Self, OracleError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(OracleError::BadDelta(delta));
        }
        let mut session_rng = ChaCha8Rng::seed_from_u64(seed);
        session_rng.set_stream(0);
        Ok(Self {
            membership,
            delta,
            seed,
            cache: HashMap::new(),
            query_count: 0,
            session_rng,
        })
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    fn check(&self, node: usize) -> Result<(), OracleError> {
        if node >= self.n() {
            return Err(OracleError::NodeOutOfRange { node, n: self.n() });
        }
        Ok(())
    }

    // One uniform from the stream keyed by (i, j), i ≤ j.
    fn keyed_uniform(&self, i: usize, j: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1 + (i * self.n() + j) as u64);
        rng.random()
    }

    fn answer_probability(&self, same: bool) -> f64 {
        if same {
            0.5 + 0.5 * self.delta
        } else {
            0.5 - 0.5 * self.delta
        }
    }

    /// Asks the oracle about `{i, j}`.
    pub fn query(&mut self, i: usize, j: usize) -> Result<bool, OracleError> {
        if i == j {
            return Err(OracleError::SelfQuery(i));
        }
        self.check(i)?;
        self.check(j)?;
        let key = (i.min(j), i.max(j));
        if let Some(&bit) = self.cache.get(&key) {
            return Ok(bit);
        }
        let same = self.membership[i] == self.membership[j];
        let bit = self.keyed_uniform(key.0, key.1) < self.answer_probability(same);
        self.cache.insert(key, bit);
        self.query_count += 1;
        Ok(bit)
    }

    /// Diagonal entry of an oracle-built adjacency matrix: drawn as
    /// Bernoulli((1+δ)/2) from node `i`'s own stream, matching an SBM's
    /// diagonal. Not a query.
    pub fn self_loop(&self, i: usize) -> bool {
        self.keyed_uniform(i, i) < self.answer_probability(true)
    }

    /// Includes each node of `candidates`, in order, with probability `gamma`.
    pub fn subsample(&mut self, candidates: &[usize], gamma: f64) -> Vec<usize> {
        let g = gamma.clamp(0.0, 1.0);
        candidates
            .iter()
            .copied()
            .filter(|_| self.session_rng.random::<f64>() < g)
            .collect()
    }

    /// Queries every pair in `nodes` and assembles the 0/1 matrix.
    pub fn query_all_pairs(&mut self, nodes: &[usize]) -> Result<SymMatrix, OracleError> {
        let t = nodes.len();
        let mut a = SymMatrix::zeros(t);
        for x in 0..t {
            if self.self_loop(nodes[x]) {
                a.set(x, x, 1.0);
            }
            for y in (x + 1)..t {
                if self.query(nodes[x], nodes[y])? {
                    a.set(x, y, 1.0);
                }
            }
        }
        Ok(a)
    }
}

/// Serialized access to one session from several workers.
#[derive(Debug)]
pub struct SharedOracle {
    inner: Mutex<OracleSession>,
}

impl SharedOracle {
    pub fn new(session: OracleSession) -> Self {
        Self {
            inner: Mutex::new(session),
        }
    }

    pub fn query(&self, i: usize, j: usize) -> Result<bool, OracleError> {
        self.inner.lock().expect("oracle lock poisoned").query(i, j)
    }

    pub fn query_count(&self) -> u64 {
        self.inner.lock().expect("oracle lock poisoned").query_count()
    }

    pub fn into_inner(self) -> OracleSession {
        self.inner.into_inner().expect("oracle lock poisoned")
    }
}

/// Free-function form of [`OracleSession::query`].
pub fn oracle_query(session: &mut OracleSession, i: usize, j: usize) -> Result<bool, OracleError> {
    session.query(i, j)
}

/// Asks `(candidate, v)` for every voter and admits the candidate when at
/// least half the answers are 1.
pub fn majority_vote_membership(
    session: &mut OracleSession,
    candidate: usize,
    voters: &[usize],
) -> Result<bool, OracleError> {
    if voters.is_empty() {
        return Err(OracleError::EmptyVoters);
    }
    if voters.contains(&candidate) {
        return Err(OracleError::CandidateIsVoter(candidate));
    }
    let mut yes = 0usize;
    for &v in voters {
        if session.query(candidate, v)? {
            yes += 1;
        }
    }
    Ok(2 * yes >= voters.len())
}

/// Constants of the oracle algorithms plus the SDP settings.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub solver: SolverConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            c1: 10.0,
            c2: 2.0,
            c3: 4.0,
            solver: SolverConfig::default(),
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<(), OracleError> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(OracleError::BadConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `⌈C₁ log n / δ²⌉`: voter-set size and minimum subcluster size for voting.
    pub fn voter_count(&self, n: usize, delta: f64) -> usize {
        (self.c1 * (n as f64).ln() / (delta * delta)).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryBudgetReport {
    pub queries_subsampling: u64,
    pub queries_voting: u64,
    pub total: u64,
    pub rounds: usize,
}

impl QueryBudgetReport {
    fn add_subsampling(&mut self, q: u64) {
        self.queries_subsampling += q;
        self.total += q;
    }

    fn add_voting(&mut self, q: u64) {
        self.queries_voting += q;
        self.total += q;
    }
}

/// Result of one run of an oracle algorithm.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub report: ClusterReport,
    pub budget: QueryBudgetReport,
    /// Subsample size of each round.
    pub subsample_sizes: Vec<usize>,
    /// Whether the run's parameters satisfy the algorithm's size hypothesis.
    pub within_guarantee: bool,
}

// SDP on an oracle-built matrix: an SBM with p = (1+δ)/2, q = (1−δ)/2.
fn recover_subclusters(
    a: &SymMatrix,
    n_total: usize,
    delta: f64,
    config: &OracleConfig,
) -> Result<ClusterReport, OracleError> {
    let p = 0.5 * (1.0 + delta);
    let q = 0.5 * (1.0 - delta);
    let solver = SolverConfig {
        m_param: Some(config.solver.m_param.unwrap_or(n_total).max(n_total)),
        ..config.solver.clone()
    };
    let lambda = make_lambda(p, a.n(), &solver)?;
    let sol = solve_recovery(a, p, q, lambda, &solver)?;
    Ok(extract_clusters(&sol.y, DEFAULT_ENTRY_THRESHOLD)?)
}

// Maps a subcluster found on the subsample back to global ids.
fn to_global(c: &RecoveredCluster, subsample: &[usize]) -> Vec<usize> {
    c.nodes.iter().map(|&x| subsample[x]).collect()
}

// Votes each outsider into the first cluster that accepts it; returns the
// grown clusters.
fn vote_outsiders(
    session: &mut OracleSession,
    seeds: Vec<Vec<usize>>,
    voters_per_cluster: usize,
    outsiders: &[usize],
) -> Result<Vec<Vec<usize>>, OracleError> {
    let voter_sets: Vec<Vec<usize>> = seeds
        .iter()
        .map(|s| s.iter().copied().take(voters_per_cluster.max(1)).collect())
        .collect();
    let mut grown = seeds;
    for &i in outsiders {
        for (k, voters) in voter_sets.iter().enumerate() {
            if majority_vote_membership(session, i, voters)? {
                grown[k].push(i);
                break;
            }
        }
    }
    Ok(grown)
}

fn complement(all: &[usize], excluded: &[usize], n: usize) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &v in excluded {
        mark[v] = true;
    }
    all.iter().copied().filter(|&v| !mark[v]).collect()
}

fn finish(n: usize, clusters: Vec<(Vec<usize>, BlockClass)>) -> ClusterReport {
    let mut list: Vec<RecoveredCluster> = clusters
        .into_iter()
        .filter(|(c, _)| !c.is_empty())
        .map(|(mut nodes, class)| {
            nodes.sort_unstable();
            RecoveredCluster {
                nodes,
                class,
                factor: None,
            }
        })
        .collect();
    list.sort_by_key(|c| c.nodes[0]);
    let mut assigned = vec![false; n];
    for c in &list {
        for &v in &c.nodes {
            assigned[v] = true;
        }
    }
    ClusterReport {
        n,
        clusters: list,
        unassigned: (0..n).filter(|&v| !assigned[v]).collect(),
    }
}

/// Subsampling rate `γ = C₂ n log n / (s² δ²)`, capped at 1.
pub fn size_param_gamma(n: usize, s: usize, delta: f64, c2: f64) -> f64 {
    let nf = n as f64;
    (c2 * nf * nf.ln() / ((s * s) as f64 * delta * delta)).min(1.0)
}

/// Recovers all clusters of size at least `s` from one subsample plus
/// majority voting.
pub fn cluster_by_size_param(
    session: &mut OracleSession,
    s: usize,
    config: &OracleConfig,
) -> Result<OracleOutcome, OracleError> {
    config.validate()?;
    let n = session.n();
    let delta = session.delta();
    if s == 0 {
        return Err(OracleError::BadConfig("s must be positive".into()));
    }
    let nf = n as f64;
    let within_guarantee = s as f64 >= config.c2 * (nf * nf.ln()).sqrt() / delta;
    let gamma = size_param_gamma(n, s, delta, config.c2);
    let all: Vec<usize> = (0..n).collect();
    let t = session.subsample(&all, gamma);

    let mut budget = QueryBudgetReport {
        rounds: 1,
        ..Default::default()
    };
    if t.len() < 2 {
        return Ok(OracleOutcome {
            report: ClusterReport::empty(n),
            budget,
            subsample_sizes: vec![t.len()],
            within_guarantee,
        });
    }
    let before = session.query_count();
    let a = session.query_all_pairs(&t)?;
    budget.add_subsampling(session.query_count() - before);

    let found = recover_subclusters(&a, n, delta, config)?;
    let v = config.voter_count(n, delta);
    let eligible: Vec<&RecoveredCluster> = found.clusters.iter().filter(|c| c.len() >= v).collect();
    let classes: Vec<BlockClass> = eligible.iter().map(|c| c.class).collect();
    let seeds: Vec<Vec<usize>> = eligible.iter().map(|c| to_global(c, &t)).collect();

    let outsiders = complement(&all, &t, n);
    let before = session.query_count();
    let grown = vote_outsiders(session, seeds, v, &outsiders)?;
    budget.add_voting(session.query_count() - before);

    Ok(OracleOutcome {
        report: finish(n, grown.into_iter().zip(classes).collect()),
        budget,
        subsample_sizes: vec![t.len()],
        within_guarantee,
    })
}

/// Geometric schedule `ŝ_r = n/2^{r−1}`: grows the subsample until the SDP
/// finds a subcluster, then votes out that one cluster.
///
/// The first recovered subcluster is used even when it is smaller than
/// `⌈C₁ log n/δ²⌉`; all of its nodes then vote. Once a round samples every
/// node, later rounds would replay the same answers, so the search stops.
pub fn cluster_adaptive(
    session: &mut OracleSession,
    config: &OracleConfig,
) -> Result<OracleOutcome, OracleError> {
    config.validate()?;
    let n = session.n();
    let delta = session.delta();
    let nf = n as f64;
    let all: Vec<usize> = (0..n).collect();
    let v = config.voter_count(n, delta);
    let mut budget = QueryBudgetReport::default();
    let mut sizes = Vec::new();

    let mut round = 0usize;
    loop {
        round += 1;
        let s_hat = nf / 2f64.powi(round as i32 - 1);
        if s_hat < 1.0 {
            return Err(OracleError::NoClusterFound { rounds: round - 1 });
        }
        let gamma = (config.c2 * nf * nf.ln() / (s_hat * s_hat * delta * delta)).min(1.0);
        let t = session.subsample(&all, gamma);
        sizes.push(t.len());
        budget.rounds = round;
        if t.len() >= 2 {
            let before = session.query_count();
            let a = session.query_all_pairs(&t)?;
            budget.add_subsampling(session.query_count() - before);
            let found = recover_subclusters(&a, n, delta, config)?;
            // largest recovered subcluster, first on ties
            if let Some(best) = found
                .clusters
                .iter()
                .fold(None::<&RecoveredCluster>, |acc, c| match acc {
                    Some(b) if b.len() >= c.len() => Some(b),
                    _ => Some(c),
                })
            {
                let class = best.class;
                let seed = to_global(best, &t);
                let outsiders = complement(&all, &t, n);
                let before = session.query_count();
                let grown = vote_outsiders(session, vec![seed], v, &outsiders)?;
                budget.add_voting(session.query_count() - before);
                let s1 = session_largest(session);
                return Ok(OracleOutcome {
                    report: finish(n, grown.into_iter().map(|c| (c, class)).collect()),
                    budget,
                    subsample_sizes: sizes,
                    within_guarantee: s1 as f64 >= config.c2 * (nf * nf.ln()).sqrt() / delta,
                });
            }
        }
        if gamma >= 1.0 {
            return Err(OracleError::NoClusterFound { rounds: round });
        }
    }
}

fn session_largest(session: &OracleSession) -> usize {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in session.membership() {
        *counts.entry(l).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

/// Size-threshold guard of the small-K loop: `C₂ K_r² log n / δ²`.
pub fn small_k_threshold(n: usize, k: usize, delta: f64, c2: f64) -> f64 {
    c2 * (k * k) as f64 * (n as f64).ln() / (delta * delta)
}

/// Round-based clustering for a known number of clusters `K`, with removal
/// of clusters smaller than `n_r/K_r` deferred to a later round.
///
/// Runs at most `K` rounds. Clusters that were voted out but never became
/// large enough to remove are still reported.
pub fn cluster_small_k(
    session: &mut OracleSession,
    k: usize,
    config: &OracleConfig,
) -> Result<OracleOutcome, OracleError> {
    config.validate()?;
    if k == 0 {
        return Err(OracleError::BadConfig("K must be positive".into()));
    }
    let n = session.n();
    let delta = session.delta();
    let v = config.voter_count(n, delta);

    let mut active: Vec<usize> = (0..n).collect();
    let mut k_r = k;
    let mut removed: Vec<(Vec<usize>, BlockClass)> = Vec::new();
    let mut remembered: Vec<(Vec<usize>, BlockClass)> = Vec::new();
    let mut budget = QueryBudgetReport::default();
    let mut sizes = Vec::new();

    for round in 1..=k {
        let n_r = active.len();
        if k_r == 0 || n_r == 0 {
            break;
        }
        let threshold = small_k_threshold(n, k_r, delta, config.c2);
        if (n_r as f64) < threshold {
            break;
        }
        budget.rounds = round;
        let gamma = (threshold / n_r as f64).min(1.0);
        let t = session.subsample(&active, gamma);
        sizes.push(t.len());
        if t.len() < 2 {
            continue;
        }
        let before = session.query_count();
        let a = session.query_all_pairs(&t)?;
        budget.add_subsampling(session.query_count() - before);
        let found = recover_subclusters(&a, n, delta, config)?;

        // full clusters identified this round, by voting or from memory
        let mut this_round: Vec<(Vec<usize>, BlockClass)> = Vec::new();
        let mut fresh_seeds = Vec::new();
        let mut fresh_classes = Vec::new();
        for c in found.clusters.iter().filter(|c| c.len() >= v) {
            let global = to_global(c, &t);
            let hit = remembered
                .iter()
                .position(|(r, _)| global.iter().any(|x| r.contains(x)));
            match hit {
                Some(idx) => {
                    let entry = remembered[idx].clone();
                    if !this_round.iter().any(|(r, _)| r == &entry.0) {
                        this_round.push(entry);
                    }
                }
                None => {
                    fresh_seeds.push(global);
                    fresh_classes.push(c.class);
                }
            }
        }
        if !fresh_seeds.is_empty() {
            let mut taken = t.clone();
            for (r, _) in &remembered {
                taken.extend(r.iter().copied());
            }
            let outsiders = complement(&active, &taken, n);
            let before = session.query_count();
            let grown = vote_outsiders(session, fresh_seeds, v, &outsiders)?;
            budget.add_voting(session.query_count() - before);
            for (c, class) in grown.into_iter().zip(fresh_classes) {
                remembered.push((c.clone(), class));
                this_round.push((c, class));
            }
        }

        let cutoff = n_r as f64 / k_r as f64;
        let mut gone = Vec::new();
        for (c, class) in this_round {
            if c.len() as f64 >= cutoff {
                remembered.retain(|(r, _)| r != &c);
                gone.extend(c.iter().copied());
                removed.push((c, class));
                k_r = k_r.saturating_sub(1);
            }
        }
        if !gone.is_empty() {
            active = complement(&active, &gone, n);
        }
    }
    removed.extend(remembered);
    let nf = n as f64;
    let smallest_target = small_k_threshold(n, k, delta, config.c2);
    Ok(OracleOutcome {
        report: finish(n, removed),
        budget,
        subsample_sizes: sizes,
        within_guarantee: smallest_target <= nf,
    })
}

/// Per-trial summary row.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub recovered_sizes: Vec<usize>,
    pub correct: bool,
    pub budget: QueryBudgetReport,
}

pub const TRIAL_CSV_HEADER: &str =
    "trial,recovered_sizes,correct,queries_subsampling,queries_voting,rounds";

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        let sizes: Vec<String> = self.recovered_sizes.iter().map(|s| s.to_string()).collect();
        format!(
            "{},{},{},{},{},{}",
            self.trial,
            sizes.join(";"),
            self.correct,
            self.budget.queries_subsampling,
            self.budget.queries_voting,
            self.budget.rounds
        )
    }
}

pub fn trials_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Which oracle algorithm an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleAlgorithm {
    SizeParam { s: usize },
    Adaptive,
    SmallK { k: usize },
}

/// A faulty-oracle experiment read from key-value text.
///
/// Keys: `sizes`, `delta`, `algorithm` (`size_param`, `adaptive`, `small_k`),
/// `s` for size_param, optional `k` for small_k, optional `n` (checked
/// against `sizes`), constants `c1` `c2` `c3` `kappa`, and either a `seeds`
/// list or a base `seed` with a `trials` count.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultyExperiment {
    pub sizes: Vec<usize>,
    pub delta: f64,
    pub algorithm: OracleAlgorithm,
    pub config: OracleConfig,
    pub seeds: Vec<u64>,
}

pub const FAULTY_KEYS: [&str; 13] = [
    "n", "sizes", "delta", "algorithm", "s", "k", "c1", "c2", "c3", "kappa", "seeds", "seed",
    "trials",
];

impl FaultyExperiment {
    pub fn from_text(text: &str) -> Result<Self, OracleError> {
        let bad = |e: crate::io::IoError| OracleError::BadConfig(e.to_string());
        let kv = KeyValues::parse(text).map_err(bad)?;
        kv.check_keys(&FAULTY_KEYS).map_err(bad)?;
        let sizes: Vec<usize> = kv
            .parse_list("sizes")
            .map_err(bad)?
            .ok_or_else(|| OracleError::BadConfig("missing sizes".into()))?;
        let n_total: usize = sizes.iter().sum();
        if let Some(n) = kv.parse_value::<usize>("n").map_err(bad)? {
            if n != n_total {
                return Err(OracleError::BadConfig(format!(
                    "n = {n} but sizes sum to {n_total}"
                )));
            }
        }
        let delta: f64 = kv.parse_required("delta").map_err(bad)?;
        let algorithm = match kv.require("algorithm").map_err(bad)? {
            "size_param" => OracleAlgorithm::SizeParam {
                s: kv.parse_required("s").map_err(bad)?,
            },
            "adaptive" => OracleAlgorithm::Adaptive,
            "small_k" => OracleAlgorithm::SmallK {
                k: kv.parse_value("k").map_err(bad)?.unwrap_or(sizes.len()),
            },
            other => return Err(OracleError::BadConfig(format!("unknown algorithm {other:?}"))),
        };
        let mut config = OracleConfig::default();
        for (key, slot) in [("c1", &mut config.c1), ("c2", &mut config.c2), ("c3", &mut config.c3)] {
            if let Some(v) = kv.parse_value(key).map_err(bad)? {
                *slot = v;
            }
        }
        if let Some(v) = kv.parse_value("kappa").map_err(bad)? {
            config.solver.kappa = v;
        }
        config.validate()?;
        let seeds = match kv.parse_list::<u64>("seeds").map_err(bad)? {
            Some(list) => list,
            None => {
                let base: u64 = kv.parse_value("seed").map_err(bad)?.unwrap_or(0);
                let trials: u64 = kv.parse_value("trials").map_err(bad)?.unwrap_or(1);
                (base..base + trials).collect()
            }
        };
        if seeds.is_empty() {
            return Err(OracleError::BadConfig("no trials".into()));
        }
        Ok(Self {
            sizes,
            delta,
            algorithm,
            config,
            seeds,
        })
    }

    /// True cluster labels a correct run must recover exactly.
    pub fn targets(&self) -> Vec<usize> {
        let n: usize = self.sizes.iter().sum();
        let k = self.sizes.len();
        let floor = match self.algorithm {
            OracleAlgorithm::SizeParam { s } => s as f64,
            OracleAlgorithm::SmallK { k } => small_k_threshold(n, k, self.delta, self.config.c2),
            OracleAlgorithm::Adaptive => return Vec::new(),
        };
        (0..k).filter(|&i| self.sizes[i] as f64 >= floor).collect()
    }

    /// One record per seed. A trial is correct when every target cluster is
    /// recovered exactly and nothing recovered as all-one mixes clusters; for
    /// the adaptive algorithm, when one true cluster is returned.
    pub fn run(&self) -> Result<Vec<TrialRecord>, OracleError> {
        let membership = crate::model::ClusterSpec::new(self.sizes.clone())
            .map_err(|e| OracleError::BadConfig(e.to_string()))?
            .membership();
        let targets = self.targets();
        let mut records = Vec::new();
        for (trial, &seed) in self.seeds.iter().enumerate() {
            let mut session = OracleSession::new(membership.clone(), self.delta, seed)?;
            let result = match self.algorithm {
                OracleAlgorithm::SizeParam { s } => cluster_by_size_param(&mut session, s, &self.config),
                OracleAlgorithm::Adaptive => cluster_adaptive(&mut session, &self.config),
                OracleAlgorithm::SmallK { k } => cluster_small_k(&mut session, k, &self.config),
            };
            let record = match result {
                Ok(o) => {
                    let labels = o.report.exact_truth_labels(&membership);
                    let correct = o.report.all_one_match_truth(&membership)
                        && match self.algorithm {
                            OracleAlgorithm::Adaptive => {
                                o.report.clusters.len() == 1 && labels.len() == 1
                            }
                            _ => targets.iter().all(|t| labels.contains(t)),
                        };
                    TrialRecord {
                        trial,
                        recovered_sizes: o.report.clusters.iter().map(|c| c.len()).collect(),
                        correct,
                        budget: o.budget,
                    }
                }
                Err(OracleError::NoClusterFound { rounds }) => TrialRecord {
                    trial,
                    recovered_sizes: Vec::new(),
                    correct: false,
                    budget: QueryBudgetReport {
                        total: session.query_count(),
                        rounds,
                        ..QueryBudgetReport::default()
                    },
                },
                Err(e) => return Err(e),
            };
            records.push(record);
        }
        Ok(records)
    }
}
