//! Trace-regularized SDP
//!
//! ```text
//!   maximize ⟨Y, C⟩ − λ·tr(Y)   subject to  Y ⪰ 0,  Y in a box
//! ```
//!
//! solved by two-block ADMM: one block is the PSD cone, the other the box
//! (`0 ≤ Y_ij ≤ 1` everywhere, or only `Y_ii ≤ 1`). The box multipliers of
//! the final iterate serve as the dual estimates `U`, `L` that
//! [`check_kkt`] audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

use crate::linalg::{
    eig_sym, eigenvalues_sym, max_eigenvalue, min_eigenvalue, product_max_abs, psd_project,
    rank_one_factor, LinalgError, SymMatrix,
};
use crate::model::{shift_and_noise, shift_with_center, AdjacencySample, SbmInstance};

/// Relative threshold for declaring a PSD matrix numerically rank ≤ 1:
/// `λ₂ ≤ RANK_TOL · max(λ₁, 1)`.
pub const RANK_TOL: f64 = 1e-4;

const RHO_UPDATE_EVERY: usize = 20;
const RHO_IMBALANCE: f64 = 10.0;
const RHO_STEP: f64 = 2.0;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("cluster index {k} out of range (K = {clusters})")]
    NoSuchCluster { k: usize, clusters: usize },
    #[error("node {node} is not in cluster {k}")]
    NodeNotInCluster { node: usize, k: usize },
    #[error(
        "ADMM stopped after {} iterations without converging (primal {:.3e}, dual {:.3e})",
        .best.iterations, .best.primal_residual, .best.dual_residual
    )]
    NotConverged { best: Box<SdpSolution> },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

impl SdpError {
    /// Unwraps the best iterate of a non-converged run, passing other errors
    /// through. For callers that accept approximate solutions.
    pub fn into_best(self) -> Result<SdpSolution, SdpError> {
        match self {
            SdpError::NotConverged { best } => Ok(*best),
            other => Err(other),
        }
    }
}

/// Which entrywise constraints accompany `Y ⪰ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxKind {
    /// `0 ≤ Y_ij ≤ 1` for all `i, j`.
    FullBox01,
    /// `Y_ii ≤ 1` only.
    DiagOnly,
}

impl fmt::Display for BoxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoxKind::FullBox01 => "full_box",
            BoxKind::DiagOnly => "diag_only",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub c: SymMatrix,
    pub lambda: f64,
    pub bounds: BoxKind,
}

impl SdpProblem {
    pub fn new(c: SymMatrix, lambda: f64, bounds: BoxKind) -> Result<Self, SdpError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(SdpError::InvalidProblem(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if !c.is_finite() {
            return Err(SdpError::InvalidProblem("objective matrix is not finite".into()));
        }
        Ok(Self { c, lambda, bounds })
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    /// `C − λI`, the linear cost actually maximized.
    pub fn cost(&self) -> SymMatrix {
        self.c.shift_diagonal(-self.lambda)
    }

    pub fn objective(&self, y: &SymMatrix) -> f64 {
        y.inner(&self.c) - self.lambda * y.trace()
    }

    /// Euclidean projection onto the box.
    pub fn project_box(&self, m: &SymMatrix) -> SymMatrix {
        match self.bounds {
            BoxKind::FullBox01 => m.map(|x| x.clamp(0.0, 1.0)),
            BoxKind::DiagOnly => {
                let mut out = m.clone();
                for i in 0..m.n() {
                    out.set(i, i, m.get(i, i).min(1.0));
                }
                out
            }
        }
    }
}

/// Solver settings plus the constants that parameterize λ.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Multiplier κ in `λ = κ√(p n log m) + jitter`.
    pub kappa: f64,
    /// Failure-probability parameter `m ≥ n`; `None` uses `m = n`.
    pub m_param: Option<usize>,
    pub jitter_seed: u64,
    pub max_iter: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub penalty_rho: f64,
    pub over_relaxation: f64,
    /// Replaces the default `(p + q)/2` shift when set.
    pub center: Option<f64>,
    /// Constant in the leave-one-out penalty reduction `B₈√(p log m)/√s_k`.
    pub b8: f64,
    /// Rescale ρ when one residual dominates the other.
    pub adaptive_rho: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kappa: 3.0,
            m_param: None,
            jitter_seed: 0,
            max_iter: 5000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            penalty_rho: 1.0,
            over_relaxation: 1.6,
            center: None,
            b8: 1.0,
            adaptive_rho: true,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SdpError> {
        let bad = |msg: String| Err(SdpError::InvalidConfig(msg));
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad(format!("kappa must be finite and >= 0, got {}", self.kappa));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.penalty_rho > 0.0 && self.penalty_rho.is_finite()) {
            return bad(format!("penalty_rho must be positive, got {}", self.penalty_rho));
        }
        if !(self.over_relaxation > 0.0 && self.over_relaxation < 2.0) {
            return bad(format!(
                "over_relaxation must lie in (0, 2), got {}",
                self.over_relaxation
            ));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        Ok(())
    }

    /// Resolves `m` for a problem on `n` nodes.
    pub fn m_for(&self, n: usize) -> Result<usize, SdpError> {
        match self.m_param {
            None => Ok(n),
            Some(m) if m >= n => Ok(m),
            Some(m) => Err(SdpError::InvalidConfig(format!("m_param = {m} < n = {n}"))),
        }
    }

    pub fn center_for(&self, p: f64, q: f64) -> f64 {
        self.center.unwrap_or(0.5 * (p + q))
    }
}

/// The `Uniform[0, 0.1)` tie-breaking jitter added to λ, fixed by the seed.
pub fn jitter(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random::<f64>() * 0.1
}

/// `λ = κ√(p n log m) + jitter`.
pub fn make_lambda(p: f64, n: usize, config: &SolverConfig) -> Result<f64, SdpError> {
    let m = config.m_for(n)?;
    let base = p * n as f64 * (m as f64).ln();
    if !(base > 0.0) {
        return Err(SdpError::InvalidConfig(format!(
            "p·n·log(m) must be positive (p={p}, n={n}, m={m})"
        )));
    }
    Ok(config.kappa * base.sqrt() + jitter(config.jitter_seed))
}

/// Penalty for gap-mode recovery: `κ√(p n log n) + ((p − q)/2)·s_small`.
pub fn make_lambda_gap(p: f64, q: f64, n: usize, s_small: usize, config: &SolverConfig) -> f64 {
    let n_f = n as f64;
    config.kappa * (p * n_f * n_f.ln()).max(0.0).sqrt() + 0.5 * (p - q) * s_small as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub best_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// Box-feasible consensus iterate.
    pub y: SymMatrix,
    pub objective: f64,
    /// `‖Y_psd − Y‖_F / max(1, ‖Y_psd‖_F, ‖Y‖_F)`: gap between the PSD and box iterates.
    pub primal_residual: f64,
    /// `ρ‖Y_k − Y_{k−1}‖_F / max(1, ρ‖U‖_F)`.
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Multipliers of the upper bounds (`≥ 0`).
    pub dual_u: SymMatrix,
    /// Multipliers of the lower bounds (`≥ 0`).
    pub dual_l: SymMatrix,
    pub trace: Vec<IterationRecord>,
}

impl SdpSolution {
    pub fn n(&self) -> usize {
        self.y.n()
    }
}

/// Solves from the zero starting point.
pub fn solve(problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution, SdpError> {
    solve_from(problem, config, None)
}

/// ADMM with an optional starting point for the box iterate.
pub fn solve_from(
    problem: &SdpProblem,
    config: &SolverConfig,
    start: Option<&SymMatrix>,
) -> Result<SdpSolution, SdpError> {
    config.validate()?;
    let n = problem.n();
    let mut rho = config.penalty_rho;
    let alpha = config.over_relaxation;
    let cost = problem.cost();
    let mut cost_step = cost.scale(1.0 / rho);

    let mut z = match start {
        Some(s) => {
            s.check_same(&problem.c)?;
            problem.project_box(s)
        }
        None => SymMatrix::zeros(n),
    };
    // scaled dual of the consensus constraint
    let mut u = SymMatrix::zeros(n);

    let mut best: Option<(f64, SdpSolution)> = None;
    let mut best_objective = f64::NEG_INFINITY;
    let mut trace = Vec::new();

    let tol_p = config.tol_primal;
    let tol_d = config.tol_dual;

    for it in 1..=config.max_iter {
        // PSD block
        let target = z.sub(&u)?.add(&cost_step)?;
        let y_psd = psd_project(&target)?;

        // box block with over-relaxation
        let relaxed = y_psd.scale(alpha).add(&z.scale(1.0 - alpha))?;
        let pre_box = relaxed.add(&u)?;
        let z_new = problem.project_box(&pre_box);
        let u_new = pre_box.sub(&z_new)?;

        // residuals relative to the iterate and multiplier scales
        let primal_scale = 1f64.max(y_psd.frobenius_norm()).max(z_new.frobenius_norm());
        let dual_scale = 1f64.max(rho * u_new.frobenius_norm());
        let primal = y_psd.sub(&z_new)?.frobenius_norm() / primal_scale;
        let dual = rho * z_new.sub(&z)?.frobenius_norm() / dual_scale;
        z = z_new;
        u = u_new;

        // residual balancing
        if config.adaptive_rho && it % RHO_UPDATE_EVERY == 0 {
            let factor = if primal > RHO_IMBALANCE * dual {
                RHO_STEP
            } else if dual > RHO_IMBALANCE * primal {
                1.0 / RHO_STEP
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u = u.scale(1.0 / factor);
                cost_step = cost.scale(1.0 / rho);
            }
        }

        let objective = problem.objective(&z);
        best_objective = best_objective.max(objective);
        if config.record_trace {
            trace.push(IterationRecord {
                iteration: it,
                objective,
                best_objective,
                primal_residual: primal,
                dual_residual: dual,
            });
        }

        let converged = primal <= tol_p && dual <= tol_d;
        let score = (primal / tol_p).max(dual / tol_d);
        let improves = best.as_ref().is_none_or(|(s, _)| score < *s);
        if converged || improves || it == config.max_iter {
            let (dual_u, dual_l) = split_multipliers(&u, rho);
            let sol = SdpSolution {
                y: z.clone(),
                objective,
                primal_residual: primal,
                dual_residual: dual,
                iterations: it,
                converged,
                dual_u,
                dual_l,
                trace: Vec::new(),
            };
            if converged {
                return Ok(SdpSolution { trace, ..sol });
            }
            if improves {
                best = Some((score, sol));
            }
        }
    }
    let (_, mut sol) = best.expect("max_iter > 0");
    sol.iterations = config.max_iter;
    sol.trace = trace;
    Err(SdpError::NotConverged { best: Box::new(sol) })
}

// ρ·u lies in the normal cone of the box at the current iterate; its positive
// part multiplies the upper bounds, its negative part the lower bounds.
fn split_multipliers(u: &SymMatrix, rho: f64) -> (SymMatrix, SymMatrix) {
    (u.map(|x| (rho * x).max(0.0)), u.map(|x| (-rho * x).max(0.0)))
}

/// `Ā = A − c·J` with `c` the configured center or `(p+q)/2`.
pub fn shifted_adjacency(a: &SymMatrix, p: f64, q: f64, config: &SolverConfig) -> SymMatrix {
    shift_with_center(a, config.center_for(p, q))
}

/// λ of the full recovery SDP for an instance.
pub fn recovery_lambda(instance: &SbmInstance, config: &SolverConfig) -> Result<f64, SdpError> {
    make_lambda(instance.p(), instance.n(), config)
}

/// Solves the recovery SDP on an adjacency matrix with the given λ.
pub fn solve_recovery(
    a: &SymMatrix,
    p: f64,
    q: f64,
    lambda: f64,
    config: &SolverConfig,
) -> Result<SdpSolution, SdpError> {
    let problem = SdpProblem::new(shifted_adjacency(a, p, q, config), lambda, BoxKind::FullBox01)?;
    solve(&problem, config)
}

fn cluster_block(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    k: usize,
    config: &SolverConfig,
) -> Result<(Vec<usize>, SymMatrix), SdpError> {
    let clusters = instance.spec().k();
    if k >= clusters {
        return Err(SdpError::NoSuchCluster { k, clusters });
    }
    let nodes = instance.spec().nodes(k);
    let shifted = shifted_adjacency(&sample.a, instance.p(), instance.q(), config);
    Ok((nodes.clone(), shifted.principal_submatrix(&nodes)))
}

/// The `k`th oracle SDP: the recovery SDP restricted to cluster `k`'s
/// principal submatrix of `Ā`. Needs ground truth, so it is an analysis tool.
pub fn solve_oracle_block(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    k: usize,
    lambda: f64,
    config: &SolverConfig,
) -> Result<SdpSolution, SdpError> {
    let (_, block) = cluster_block(sample, instance, k, config)?;
    solve(&SdpProblem::new(block, lambda, BoxKind::FullBox01)?, config)
}

#[derive(Clone, Debug)]
pub struct RelaxedSolution {
    pub solution: SdpSolution,
    /// `y` with `Ŷ = y yᵀ` and `1ᵀy ≥ 0` when the solution has numeric rank ≤ 1.
    pub factor: Option<Vec<f64>>,
}

fn relaxed_from(solution: SdpSolution) -> Result<RelaxedSolution, SdpError> {
    let factor = rank_one_factor(&solution.y, RANK_TOL)?;
    Ok(RelaxedSolution { solution, factor })
}

/// Oracle SDP with the lower bounds dropped and only `Y_ii ≤ 1` kept.
pub fn solve_relaxed_oracle(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    k: usize,
    lambda: f64,
    config: &SolverConfig,
) -> Result<RelaxedSolution, SdpError> {
    let (_, block) = cluster_block(sample, instance, k, config)?;
    let sol = solve(&SdpProblem::new(block, lambda, BoxKind::DiagOnly)?, config)?;
    relaxed_from(sol)
}

/// Leave-one-out relaxed oracle SDP for node `j` of cluster `k`, with the
/// diagnostics that go with it.
#[derive(Clone, Debug)]
pub struct LooSolution {
    pub relaxed: RelaxedSolution,
    /// Reduced penalty `λ − B₈√(p log m)/√s_k` (floored at 0).
    pub lambda_loo: f64,
    /// `|⟨w, ŷ⟩|` between the left-out noise column and the LOO factor.
    pub noise_inner_product: Option<f64>,
    pub top_eig_block: f64,
    pub top_eig_loo: f64,
    /// `B₈√(p log m)/√s_k`
    pub drift_bound: f64,
}

impl LooSolution {
    /// `|λ₁(Ā^(k)) − λ₁(Ā^(k,j))|`
    pub fn eig_drift(&self) -> f64 {
        (self.top_eig_block - self.top_eig_loo).abs()
    }

    pub fn drift_within_bound(&self) -> bool {
        self.eig_drift() <= self.drift_bound
    }
}

/// Zeroes the noise in row/column `j` of cluster `k`'s block and solves the
/// relaxed oracle SDP with the slightly reduced penalty.
pub fn solve_loo_relaxed(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    k: usize,
    j: usize,
    lambda: f64,
    config: &SolverConfig,
) -> Result<LooSolution, SdpError> {
    let (nodes, block) = cluster_block(sample, instance, k, config)?;
    let local = nodes
        .iter()
        .position(|&v| v == j)
        .ok_or(SdpError::NodeNotInCluster { node: j, k })?;
    let (_, noise) = shift_and_noise(sample, instance)?;
    let noise = noise.principal_submatrix(&nodes);
    let s_k = nodes.len();

    // w = column j of W^(k) with its own entry halved; subtracting e_j wᵀ + w e_jᵀ
    // removes row and column j of the noise exactly once each.
    let mut w: Vec<f64> = (0..s_k).map(|i| noise.get(i, local)).collect();
    w[local] *= 0.5;
    let mut loo = block.clone();
    for i in 0..s_k {
        let v = loo.get(local, i) - w[i] - if i == local { w[i] } else { 0.0 };
        loo.set(local, i, v);
    }

    let m = config.m_for(instance.n())?;
    let drift_bound = config.b8 * (instance.p() * (m as f64).ln()).sqrt() / (s_k as f64).sqrt();
    let lambda_loo = (lambda - drift_bound).max(0.0);

    let top_eig_block = max_eigenvalue(&block)?;
    let top_eig_loo = max_eigenvalue(&loo)?;
    let sol = solve(&SdpProblem::new(loo, lambda_loo, BoxKind::DiagOnly)?, config)?;
    let relaxed = relaxed_from(sol)?;
    let noise_inner_product = relaxed
        .factor
        .as_ref()
        .map(|y| y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs());
    Ok(LooSolution {
        relaxed,
        lambda_loo,
        noise_inner_product,
        top_eig_block,
        top_eig_loo,
        drift_bound,
    })
}

/// One optimality condition audited by [`check_kkt`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KktCondition {
    BoxFeasibility,
    PrimalPsd,
    DualSign,
    LowerSlackness,
    UpperSlackness,
    Stationarity,
    DualPsd,
}

impl KktCondition {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoxFeasibility => "box_feasibility",
            Self::PrimalPsd => "primal_psd",
            Self::DualSign => "dual_sign",
            Self::LowerSlackness => "lower_slackness",
            Self::UpperSlackness => "upper_slackness",
            Self::Stationarity => "stationarity",
            Self::DualPsd => "dual_psd",
        }
    }

    pub const ALL: [KktCondition; 7] = [
        Self::BoxFeasibility,
        Self::PrimalPsd,
        Self::DualSign,
        Self::LowerSlackness,
        Self::UpperSlackness,
        Self::Stationarity,
        Self::DualPsd,
    ];
}

/// Residual of each optimality condition; every field is a non-negative
/// violation, 0 meaning exactly satisfied.
#[derive(Clone, Debug, PartialEq)]
pub struct KktReport {
    pub box_violation: f64,
    /// `max(0, −λ_min(Ŷ))`
    pub psd_violation: f64,
    /// Negative multipliers, or multipliers on constraints the box kind does not have.
    pub dual_sign_violation: f64,
    /// `max |L_ij Ŷ_ij|`
    pub lower_slackness: f64,
    /// `max |U_ij (Ŷ_ij − 1)|`
    pub upper_slackness: f64,
    /// `‖(C − λI − U + L)Ŷ‖_max`
    pub stationarity: f64,
    /// `max(0, λ_max(C − λI − U + L))`
    pub dual_psd_violation: f64,
    pub tol: f64,
}

impl KktReport {
    pub fn residual(&self, c: KktCondition) -> f64 {
        match c {
            KktCondition::BoxFeasibility => self.box_violation,
            KktCondition::PrimalPsd => self.psd_violation,
            KktCondition::DualSign => self.dual_sign_violation,
            KktCondition::LowerSlackness => self.lower_slackness,
            KktCondition::UpperSlackness => self.upper_slackness,
            KktCondition::Stationarity => self.stationarity,
            KktCondition::DualPsd => self.dual_psd_violation,
        }
    }

    pub fn failing(&self) -> Vec<KktCondition> {
        KktCondition::ALL
            .into_iter()
            .filter(|&c| !(self.residual(c) <= self.tol))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failing().is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        KktCondition::ALL
            .into_iter()
            .map(|c| self.residual(c))
            .fold(0.0, f64::max)
    }

    /// Flat `key = value` text block.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for c in KktCondition::ALL {
            out.push_str(&format!("{} = {:.6e}\n", c.name(), self.residual(c)));
        }
        out.push_str(&format!("tol = {:.6e}\n", self.tol));
        out.push_str(&format!("passed = {}\n", self.passed()));
        let failing: Vec<&str> = self.failing().into_iter().map(KktCondition::name).collect();
        out.push_str(&format!("failing = {}\n", failing.join(",")));
        out
    }
}

/// Audits the optimality conditions of `solution` for `problem` using the
/// solver's multiplier estimates.
pub fn check_kkt(
    problem: &SdpProblem,
    solution: &SdpSolution,
    tol: f64,
) -> Result<KktReport, SdpError> {
    let y = &solution.y;
    let (u, l) = (&solution.dual_u, &solution.dual_l);
    y.check_same(&problem.c)?;
    let n = y.n();

    let mut box_violation = 0.0f64;
    let mut dual_sign_violation = 0.0f64;
    let mut lower_slackness = 0.0f64;
    let mut upper_slackness = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let (yv, uv, lv) = (y.get(i, j), u.get(i, j), l.get(i, j));
            dual_sign_violation = dual_sign_violation.max(-uv).max(-lv);
            upper_slackness = upper_slackness.max((uv * (yv - 1.0)).abs());
            match problem.bounds {
                BoxKind::FullBox01 => {
                    box_violation = box_violation.max(-yv).max(yv - 1.0);
                    lower_slackness = lower_slackness.max((lv * yv).abs());
                }
                BoxKind::DiagOnly => {
                    if i == j {
                        box_violation = box_violation.max(yv - 1.0);
                    } else {
                        dual_sign_violation = dual_sign_violation.max(uv.abs());
                    }
                    dual_sign_violation = dual_sign_violation.max(lv.abs());
                }
            }
        }
    }

    let slack = problem.cost().sub(u)?.add(l)?;
    let stationarity = product_max_abs(&slack, y)?;
    let dual_psd_violation = max_eigenvalue(&slack)?.max(0.0);
    let psd_violation = (-min_eigenvalue(y)?).max(0.0);

    Ok(KktReport {
        box_violation: box_violation.max(0.0),
        psd_violation,
        dual_sign_violation: dual_sign_violation.max(0.0),
        lower_slackness,
        upper_slackness,
        stationarity,
        dual_psd_violation,
        tol,
    })
}

/// `λ₂/max(λ₁, 1) ≤ RANK_TOL`
pub fn numeric_rank_at_most_one(y: &SymMatrix) -> Result<bool, SdpError> {
    let v = eigenvalues_sym(y)?;
    Ok(v.len() < 2 || v[1] <= RANK_TOL * v[0].max(1.0))
}

/// Second-to-first eigenvalue ratio used by the rank diagnostics.
pub fn rank_ratio(y: &SymMatrix) -> Result<f64, SdpError> {
    let v = eigenvalues_sym(y)?;
    if v.len() < 2 {
        return Ok(0.0);
    }
    Ok(v[1].max(0.0) / v[0].max(1.0))
}

/// Top eigenvector of `y` scaled to a rank-one factor, regardless of rank.
pub fn leading_factor(y: &SymMatrix) -> Result<Vec<f64>, SdpError> {
    let e = eig_sym(y)?;
    if e.n() == 0 {
        return Ok(Vec::new());
    }
    let s = e.value(0).max(0.0).sqrt();
    let v = e.vector(0);
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    Ok(v.iter().map(|x| sign * s * x).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_sbm, ClusterSpec};

    fn exact_config() -> SolverConfig {
        SolverConfig {
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            max_iter: 20_000,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn lambda_formulas() {
        let cfg = SolverConfig {
            kappa: 0.0,
            jitter_seed: 9,
            ..SolverConfig::default()
        };
        let l = make_lambda(0.5, 50, &cfg).unwrap();
        assert!((0.0..0.1).contains(&l));

        let cfg = SolverConfig {
            kappa: 2.0,
            m_param: Some(100),
            jitter_seed: 4,
            ..SolverConfig::default()
        };
        let want = 2.0 * (100.0 * 100f64.ln()).sqrt() + jitter(4);
        assert!((make_lambda(1.0, 100, &cfg).unwrap() - want).abs() < 1e-12);
        assert!(make_lambda(1.0, 200, &cfg).is_err());
        assert!(make_lambda(1.0, 1, &SolverConfig::default()).is_err());
    }

    #[test]
    fn gap_lambda_formulas() {
        let cfg = SolverConfig {
            kappa: 1.0,
            ..SolverConfig::default()
        };
        let base = (0.6 * 400.0 * 400f64.ln()).sqrt();
        assert!((make_lambda_gap(0.6, 0.2, 400, 0, &cfg) - base).abs() < 1e-12);
        let want = (240.0 * 400f64.ln()).sqrt() + 2.0;
        assert!((make_lambda_gap(0.6, 0.2, 400, 10, &cfg) - want).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for s in 0..50 {
            let l = make_lambda_gap(0.6, 0.2, 400, s, &cfg);
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(SdpProblem::new(SymMatrix::zeros(2), -1.0, BoxKind::FullBox01).is_err());
        assert!(SdpProblem::new(SymMatrix::zeros(2), f64::NAN, BoxKind::FullBox01).is_err());
        let bad = SolverConfig {
            penalty_rho: 0.0,
            ..SolverConfig::default()
        };
        let p = SdpProblem::new(SymMatrix::zeros(2), 1.0, BoxKind::FullBox01).unwrap();
        assert!(matches!(solve(&p, &bad), Err(SdpError::InvalidConfig(_))));
    }

    #[test]
    fn clique_is_recovered_below_half_n() {
        let c = SymMatrix::filled(4, 0.5);
        let p = SdpProblem::new(c, 1.0, BoxKind::FullBox01).unwrap();
        let sol = solve(&p, &exact_config()).unwrap();
        assert!(sol.y.max_abs_diff(&SymMatrix::ones(4)) < 1e-6);
        assert!((sol.objective - 4.0).abs() < 1e-5);
        let kkt = check_kkt(&p, &sol, 1e-5).unwrap();
        assert!(kkt.passed(), "{}", kkt.to_key_value());
    }

    #[test]
    fn clique_is_dropped_above_half_n() {
        let c = SymMatrix::filled(4, 0.5);
        let p = SdpProblem::new(c, 3.0, BoxKind::FullBox01).unwrap();
        let sol = solve(&p, &exact_config()).unwrap();
        assert!(sol.y.max_abs() < 1e-6);
        assert!(sol.objective.abs() < 1e-6);
    }

    #[test]
    fn perturbed_solution_fails_named_condition() {
        let c = SymMatrix::filled(4, 0.5);
        let p = SdpProblem::new(c, 1.0, BoxKind::FullBox01).unwrap();
        let mut sol = solve(&p, &exact_config()).unwrap();
        let v = sol.y.get(0, 1) + 0.1;
        sol.y.set(0, 1, v);
        let kkt = check_kkt(&p, &sol, 1e-5).unwrap();
        assert!(!kkt.passed());
        assert!(kkt.failing().contains(&KktCondition::BoxFeasibility));
        assert!(kkt.to_key_value().contains("failing = box_feasibility"));
    }

    #[test]
    fn diag_only_box_allows_negative_entries() {
        // C = -J/2 + 2 e1e1ᵀ style: negative off-diagonal signal wants negative Y_ij
        let c = SymMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let p = SdpProblem::new(c.clone(), 0.5, BoxKind::DiagOnly).unwrap();
        let sol = solve(&p, &exact_config()).unwrap();
        assert!((sol.y.get(0, 1) + 1.0).abs() < 1e-5);
        assert!(check_kkt(&p, &sol, 1e-5).unwrap().passed());
        let full = SdpProblem::new(c, 0.5, BoxKind::FullBox01).unwrap();
        let sol = solve(&full, &exact_config()).unwrap();
        assert!(sol.y.get(0, 1).abs() < 1e-5);
    }

    #[test]
    fn not_converged_carries_best_iterate() {
        let c = SymMatrix::filled(6, 0.5);
        let p = SdpProblem::new(c, 1.0, BoxKind::FullBox01).unwrap();
        let cfg = SolverConfig {
            max_iter: 3,
            ..SolverConfig::default()
        };
        match solve(&p, &cfg) {
            Err(SdpError::NotConverged { best }) => {
                assert_eq!(best.iterations, 3);
                assert!(!best.converged);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn trace_best_objective_is_monotone() {
        let spec = ClusterSpec::new(vec![8, 5, 3]).unwrap();
        let inst = SbmInstance::new(spec, 0.8, 0.2).unwrap();
        let s = generate_sbm(&inst, 3);
        let cfg = SolverConfig {
            record_trace: true,
            ..SolverConfig::default()
        };
        let c = shifted_adjacency(&s.a, 0.8, 0.2, &cfg);
        let sol = solve(&SdpProblem::new(c, 1.5, BoxKind::FullBox01).unwrap(), &cfg).unwrap();
        assert_eq!(sol.trace.len(), sol.iterations);
        for w in sol.trace.windows(2) {
            assert!(w[1].best_objective >= w[0].best_objective - 1e-9);
        }
    }

    #[test]
    fn relaxed_oracle_zero_when_lambda_dominates() {
        let spec = ClusterSpec::new(vec![6, 6]).unwrap();
        let inst = SbmInstance::new(spec, 0.9, 0.1).unwrap();
        let s = generate_sbm(&inst, 1);
        let cfg = exact_config();
        let block = shifted_adjacency(&s.a, 0.9, 0.1, &cfg).principal_submatrix(&inst.spec().nodes(0));
        let top = max_eigenvalue(&block).unwrap();
        let r = solve_relaxed_oracle(&s, &inst, 0, top + 1.0, &cfg).unwrap();
        assert!(r.solution.y.max_abs() < 1e-6);
    }

    #[test]
    fn loo_on_noiseless_instance_only_shifts_penalty() {
        let spec = ClusterSpec::new(vec![6, 4]).unwrap();
        let inst = SbmInstance::new(spec, 1.0, 0.0).unwrap();
        let s = generate_sbm(&inst, 2);
        let cfg = exact_config();
        let loo = solve_loo_relaxed(&s, &inst, 0, 2, 2.0, &cfg).unwrap();
        let expected_shift = (10f64.ln()).sqrt() / 6f64.sqrt();
        assert!((loo.lambda_loo - (2.0 - expected_shift)).abs() < 1e-12);
        assert!(loo.eig_drift() < 1e-12);
        // the problem is the plain relaxed oracle at the reduced penalty
        let direct = solve_relaxed_oracle(&s, &inst, 0, loo.lambda_loo, &cfg).unwrap();
        assert!(direct.solution.y.max_abs_diff(&loo.relaxed.solution.y) < 1e-6);
        assert_eq!(loo.noise_inner_product, Some(0.0));
        assert!(matches!(
            solve_loo_relaxed(&s, &inst, 0, 7, 2.0, &cfg),
            Err(SdpError::NodeNotInCluster { .. })
        ));
        assert!(matches!(
            solve_oracle_block(&s, &inst, 2, 1.0, &cfg),
            Err(SdpError::NoSuchCluster { .. })
        ));
    }

    #[test]
    fn multipliers_are_complementary_by_construction() {
        let spec = ClusterSpec::new(vec![7, 4, 2]).unwrap();
        let inst = SbmInstance::new(spec, 0.9, 0.1).unwrap();
        let s = generate_sbm(&inst, 8);
        let cfg = SolverConfig::default();
        let c = shifted_adjacency(&s.a, 0.9, 0.1, &cfg);
        let sol = solve(&SdpProblem::new(c, 1.0, BoxKind::FullBox01).unwrap(), &cfg).unwrap();
        for i in 0..13 {
            for j in 0..13 {
                let (y, u, l) = (sol.y.get(i, j), sol.dual_u.get(i, j), sol.dual_l.get(i, j));
                assert!(u == 0.0 || y == 1.0);
                assert!(l == 0.0 || y == 0.0);
            }
        }
    }
}
