//! Seeded experiment scenarios and their artifacts.
//!
//! Every scenario returns a list of named checks. The CLI turns them into an
//! exit status; the acceptance tests assert on them directly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

use crate::io::{join_list, write_file, IoError, KeyValues};
use crate::linalg::{
    eig_sym, eigenvalues_sym, eldridge_bound, improved_bound, repaired_bound, LinalgError, PerturbationBound,
    SymMatrix,
};
use crate::model::{
    apply_semirandom_adversary, default_adversary_threshold, generate_sbm, AdjacencySample,
    ClusterSpec, Edit, ModelError, SbmInstance,
};
use crate::oracle::{
    cluster_adaptive, cluster_by_size_param, cluster_small_k, size_param_gamma, small_k_threshold, trials_to_csv,
    OracleConfig, OracleError, OracleOutcome, OracleSession, TrialRecord,
};
use crate::recovery::{
    classify_truth_blocks, default_c_prime, extract_clusters, gap_condition, off_block_max,
    off_block_mass, recover_with_gap, recursive_cluster, BlockClass, ClusterReport,
    RecoveryError, DEFAULT_ENTRY_THRESHOLD,
};
use crate::sdp::{
    leading_factor, make_lambda, rank_ratio, shifted_adjacency, solve_from, solve_oracle_block,
    solve_recovery, BoxKind, SdpError, SdpProblem, SdpSolution, SolverConfig,
};

/// Off-block entries above this are flagged in heatmaps and count as nonzero.
pub const FLAG_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(IoError::UnknownKey(_)) => 2,
            HarnessError::Io(
                IoError::MissingKey(_)
                | IoError::BadValue { .. }
                | IoError::DuplicateKey(_)
                | IoError::Syntax { .. },
            ) => 2,
            _ => 1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Figure1,
    Theorem2Regimes,
    GapRecovery,
    Semirandom,
    Recursive,
    FaultyOracleS,
    FaultyAdaptive,
    FaultySmallK,
    PerturbBounds,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Figure1,
        Scenario::Theorem2Regimes,
        Scenario::GapRecovery,
        Scenario::Semirandom,
        Scenario::Recursive,
        Scenario::FaultyOracleS,
        Scenario::FaultyAdaptive,
        Scenario::FaultySmallK,
        Scenario::PerturbBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Figure1 => "figure1",
            Scenario::Theorem2Regimes => "theorem2_regimes",
            Scenario::GapRecovery => "gap_recovery",
            Scenario::Semirandom => "semirandom",
            Scenario::Recursive => "recursive",
            Scenario::FaultyOracleS => "faulty_oracle_s",
            Scenario::FaultyAdaptive => "faulty_adaptive",
            Scenario::FaultySmallK => "faulty_small_k",
            Scenario::PerturbBounds => "perturb_bounds",
        }
    }

    /// Parameter keys and their defaults.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Scenario::Figure1 => &[
                ("sizes", "300,150,50,50,50,50,50"),
                ("p", "0.7"),
                ("q", "0.3"),
                ("kappa_grid", "0,0.5,1,2,3,4"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::Theorem2Regimes => &[
                ("sizes", "150,100,50,50,50"),
                ("p", "0.9"),
                ("q", "0.1"),
                ("kappa", "0.85"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::GapRecovery => &[
                ("sizes", "60,5,5,5,5,5,5,5,5"),
                ("p", "0.9"),
                ("q", "0.1"),
                ("kappa", "0.5"),
                ("s_small", "5"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::Semirandom => &[
                ("sizes", "80,50,25,25,20"),
                ("p", "0.9"),
                ("q", "0.1"),
                ("kappa", "0.65"),
                ("batches", "100"),
                ("edit_fraction", "0.2"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::Recursive => &[
                ("sizes", "150,100,70,50,35,25,20"),
                ("p", "0.9"),
                ("q", "0.1"),
                ("kappa", "0.5"),
                ("c_prime", "auto"),
                ("max_rounds", "auto"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::FaultyOracleS => &[
                ("sizes", "200,150,100,50,50,50"),
                ("delta", "0.8"),
                ("s", "100"),
                ("c1", "10"),
                ("c2", "2"),
                ("kappa", "0.5"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::FaultyAdaptive => &[
                ("sizes", "128,96,80,64,48,40,32,24"),
                ("doubled_sizes", "256,96,64,48,48"),
                ("delta", "0.9"),
                ("c1", "10"),
                ("c2", "2"),
                ("c3", "4"),
                ("kappa", "0.45"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::FaultySmallK => &[
                ("sizes", "150,100,80,70"),
                ("delta", "0.8"),
                ("c1", "10"),
                ("c2", "2"),
                ("kappa", "0.45"),
                ("tol", "1e-6"),
                ("max_iter", "5000"),
            ],
            Scenario::PerturbBounds => &[("n", "12"), ("trials", "1000")],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().replace('_', "") == key)
            .ok_or_else(|| config_err(format!("unknown scenario {s:?}")))
    }
}

/// A scenario with its parameters and seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Overrides of the scenario defaults.
    pub params: KeyValues,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seeds: Vec<u64>) -> Self {
        Self {
            scenario,
            params: KeyValues::default(),
            seeds,
            output_dir: None,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key, value);
        self
    }

    /// `scenario`, `seeds`, optional `output_dir`, plus scenario parameters.
    /// `result.*` keys (as written into manifests) are ignored.
    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let kv = KeyValues::parse(text)?;
        let scenario: Scenario = kv.require("scenario")?.parse()?;
        let seeds: Vec<u64> = kv
            .parse_list("seeds")?
            .ok_or_else(|| IoError::MissingKey("seeds".into()))?;
        let output_dir = kv.get("output_dir").map(PathBuf::from);
        let mut params = KeyValues::default();
        for (k, v) in kv.iter() {
            if matches!(k, "scenario" | "seeds" | "output_dir") || k.starts_with("result.") {
                continue;
            }
            params.insert(k, v);
        }
        let cfg = Self {
            scenario,
            params,
            seeds,
            output_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(config_err("seed list is empty"));
        }
        let allowed: Vec<&str> = self.scenario.defaults().iter().map(|(k, _)| *k).collect();
        self.params.check_keys(&allowed)?;
        Ok(())
    }

    /// Defaults merged with overrides.
    pub fn resolved(&self) -> KeyValues {
        let mut kv = KeyValues::default();
        for (k, v) in self.scenario.defaults() {
            kv.insert(*k, v);
        }
        for (k, v) in self.params.iter() {
            kv.insert(k, v);
        }
        kv
    }

    pub fn to_text(&self) -> String {
        let mut kv = self.resolved();
        kv.insert("scenario", self.scenario.name());
        kv.insert("seeds", join_list(&self.seeds));
        if let Some(dir) = &self.output_dir {
            kv.insert("output_dir", dir.display());
        }
        kv.to_text()
    }
}

/// One named pass/fail check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Everything one scenario run produces.
#[derive(Clone, Debug, Default)]
pub struct ScenarioOutcome {
    pub checks: Vec<CheckResult>,
    /// Relative file name and contents.
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub manifest: KeyValues,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn record(&mut self, key: impl Into<String>, value: impl ToString) {
        self.manifest.insert(format!("result.{}", key.into()), value);
    }

    /// Writes artifacts and `manifest.txt` under `dir`.
    pub fn write_to(&self, config: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
        for (name, bytes) in &self.artifacts {
            write_file(&dir.join(name), bytes)?;
        }
        let mut manifest = KeyValues::parse(&config.to_text())?;
        for (k, v) in self.manifest.iter() {
            manifest.insert(k, v);
        }
        for c in &self.checks {
            manifest.insert(format!("result.check.{}", c.name), c.passed);
        }
        write_file(&dir.join("manifest.txt"), manifest.to_text().as_bytes())?;
        Ok(())
    }
}

// typed parameter access on resolved keys
struct Params(KeyValues);

impl Params {
    fn get<T: FromStr>(&self, key: &str) -> Result<T, HarnessError> {
        Ok(self.0.parse_required(key)?)
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, HarnessError> {
        self.0
            .parse_list(key)?
            .ok_or_else(|| config_err(format!("missing {key}")))
    }

    fn auto<T: FromStr>(&self, key: &str) -> Result<Option<T>, HarnessError> {
        match self.0.get(key) {
            Some("auto") | None => Ok(None),
            Some(_) => Ok(Some(self.get(key)?)),
        }
    }

    fn solver(&self) -> Result<SolverConfig, HarnessError> {
        let mut cfg = SolverConfig::default();
        if self.0.get("kappa").is_some() {
            cfg.kappa = self.get("kappa")?;
        }
        let tol: f64 = self.get("tol")?;
        cfg.tol_primal = tol;
        cfg.tol_dual = tol;
        cfg.max_iter = self.get("max_iter")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn instance(&self) -> Result<SbmInstance, HarnessError> {
        let sizes: Vec<usize> = self.list("sizes")?;
        Ok(SbmInstance::new(
            ClusterSpec::new(sizes)?,
            self.get("p")?,
            self.get("q")?,
        )?)
    }

    fn oracle(&self) -> Result<OracleConfig, HarnessError> {
        let mut cfg = OracleConfig {
            solver: self.solver()?,
            ..OracleConfig::default()
        };
        cfg.c1 = self.get("c1")?;
        cfg.c2 = self.get("c2")?;
        if self.0.get("c3").is_some() {
            cfg.c3 = self.get("c3")?;
        }
        Ok(cfg)
    }
}

/// Runs a scenario over all seeds and, when an output directory is set,
/// writes artifacts and the manifest there.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ScenarioOutcome, HarnessError> {
    config.validate()?;
    let params = Params(config.resolved());
    let outcome = match config.scenario {
        Scenario::Figure1 => figure1(&params, &config.seeds)?,
        Scenario::Theorem2Regimes => theorem2_regimes(&params, &config.seeds)?,
        Scenario::GapRecovery => gap_recovery(&params, &config.seeds)?,
        Scenario::Semirandom => semirandom(&params, &config.seeds)?,
        Scenario::Recursive => recursive(&params, &config.seeds)?,
        Scenario::FaultyOracleS => faulty_size_param(&params, &config.seeds)?,
        Scenario::FaultyAdaptive => faulty_adaptive(&params, &config.seeds)?,
        Scenario::FaultySmallK => faulty_small_k(&params, &config.seeds)?,
        Scenario::PerturbBounds => perturb_bounds(&params, &config.seeds)?,
    };
    if let Some(dir) = &config.output_dir {
        outcome.write_to(config, dir)?;
    }
    Ok(outcome)
}

fn count_passing(flags: &[bool]) -> usize {
    flags.iter().filter(|&&b| b).count()
}

fn rate_check(name: &str, flags: &[bool], needed: usize, what: &str) -> CheckResult {
    let ok = count_passing(flags);
    CheckResult::new(
        name,
        ok >= needed,
        format!("{what} on {ok}/{} seeds (need {needed})", flags.len()),
    )
}

/// Grayscale raster of a solution with its flagged off-block pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, `round(255·(1 − clamp(Y, 0, 1)))`.
    pub pixels: Vec<u8>,
    /// Off-block `(row, col)` with `|Y| > FLAG_TOL`.
    pub flagged: Vec<(usize, usize)>,
}

impl HeatmapImage {
    /// `membership` decides which entries are off-block; without it nothing is flagged.
    pub fn from_matrix(y: &SymMatrix, membership: Option<&[usize]>) -> Result<Self, HarnessError> {
        if !y.is_finite() {
            return Err(HarnessError::Linalg(LinalgError::NonFinite));
        }
        let n = y.n();
        let pixels = y
            .as_slice()
            .iter()
            .map(|&v| (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8)
            .collect();
        let mut flagged = Vec::new();
        if let Some(m) = membership {
            for i in 0..n {
                for j in 0..n {
                    if m[i] != m[j] && y.get(i, j).abs() > FLAG_TOL {
                        flagged.push((i, j));
                    }
                }
            }
        }
        Ok(Self {
            width: n,
            height: n,
            pixels,
            flagged,
        })
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn flagged_text(&self) -> String {
        let mut out = format!("# {} flagged off-block entries\n", self.flagged.len());
        for (i, j) in &self.flagged {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

/// Writes the raster to `path` and the flagged list to `<path>.flagged.txt`.
pub fn emit_heatmap(
    y: &SymMatrix,
    membership: Option<&[usize]>,
    path: &Path,
) -> Result<HeatmapImage, HarnessError> {
    let img = HeatmapImage::from_matrix(y, membership)?;
    write_file(path, &img.to_bytes())?;
    let mut side = path.as_os_str().to_owned();
    side.push(".flagged.txt");
    write_file(Path::new(&side), img.flagged_text().as_bytes())?;
    Ok(img)
}

/// One grid point of a λ scan.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub kappa: f64,
    pub lambda: f64,
    pub result: Result<ScanStats, String>,
}

#[derive(Clone, Debug)]
pub struct ScanStats {
    pub solution: SdpSolution,
    pub classes: Vec<BlockClass>,
    pub off_block_max: f64,
    pub off_block_mass: f64,
    pub recovered_clusters: usize,
    pub rank_ratio: f64,
}

impl ScanStats {
    pub fn converged(&self) -> bool {
        self.solution.converged
    }
}

/// Solves the recovery SDP once per κ and records per-block diagnostics.
/// Failures are kept per point and the scan continues; a run that hits the
/// iteration cap keeps its best iterate.
pub fn lambda_scan(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    kappa_grid: &[f64],
    config: &SolverConfig,
) -> Result<Vec<ScanPoint>, HarnessError> {
    if kappa_grid.is_empty() {
        return Err(config_err("kappa grid is empty"));
    }
    let (p, q) = (instance.p(), instance.q());
    let m = instance.membership();
    let mut points = Vec::new();
    for &kappa in kappa_grid {
        let cfg = SolverConfig {
            kappa,
            ..config.clone()
        };
        let lambda = match make_lambda(p, instance.n(), &cfg) {
            Ok(l) => l,
            Err(e) => {
                points.push(ScanPoint {
                    kappa,
                    lambda: f64::NAN,
                    result: Err(e.to_string()),
                });
                continue;
            }
        };
        let result = solve_recovery(&sample.a, p, q, lambda, &cfg)
            .or_else(SdpError::into_best)
            .map_err(|e| e.to_string())
            .and_then(|solution| {
                let report = extract_clusters(&solution.y, DEFAULT_ENTRY_THRESHOLD)
                    .map_err(|e| e.to_string())?;
                Ok(ScanStats {
                    classes: classify_truth_blocks(&solution.y, instance),
                    off_block_max: off_block_max(&solution.y, m),
                    off_block_mass: off_block_mass(&solution.y, m),
                    recovered_clusters: report.clusters.len(),
                    rank_ratio: rank_ratio(&solution.y).map_err(|e| e.to_string())?,
                    solution,
                })
            });
        points.push(ScanPoint {
            kappa,
            lambda,
            result,
        });
    }
    Ok(points)
}

pub fn scan_to_csv(points: &[ScanPoint]) -> String {
    let mut out = String::from(
        "kappa,lambda,converged,iterations,primal_residual,dual_residual,off_block_max,off_block_mass,recovered_clusters,rank_ratio,block_classes,error\n",
    );
    for pt in points {
        match &pt.result {
            Ok(s) => {
                let classes: Vec<&str> = s.classes.iter().map(|c| c.as_str()).collect();
                out.push_str(&format!(
                    "{},{:.16e},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e},{},\n",
                    pt.kappa,
                    pt.lambda,
                    s.solution.converged,
                    s.solution.iterations,
                    s.solution.primal_residual,
                    s.solution.dual_residual,
                    s.off_block_max,
                    s.off_block_mass,
                    s.recovered_clusters,
                    s.rank_ratio,
                    classes.join(";"),
                ));
            }
            Err(e) => out.push_str(&format!(
                "{},{:.16e},,,,,,,,,,{}\n",
                pt.kappa,
                pt.lambda,
                e.replace(',', ";")
            )),
        }
    }
    out
}

// Clean panel: no off-block entry, largest block all-one, every block of the
// smallest size zero.
fn clean_panel(stats: &ScanStats, instance: &SbmInstance) -> bool {
    let sizes = instance.spec().sizes();
    let smallest = *sizes.last().expect("non-empty spec");
    let big = stats.solution.y.principal_submatrix(&instance.spec().nodes(0));
    stats.off_block_max <= FLAG_TOL
        && big.min_entry() >= 1.0 - 1e-2
        && (0..sizes.len())
            .filter(|&k| sizes[k] == smallest)
            .all(|k| {
                stats
                    .solution
                    .y
                    .principal_submatrix(&instance.spec().nodes(k))
                    .max_abs()
                    <= FLAG_TOL
            })
}

fn figure1(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let instance = params.instance()?;
    let grid: Vec<f64> = params.list("kappa_grid")?;
    let base = params.solver()?;
    let m = instance.membership().to_vec();
    let mut out = ScenarioOutcome::default();
    let mut clean_flags = Vec::new();
    let mut small_flags = Vec::new();
    let mut flagged_flags = Vec::new();

    for &seed in seeds {
        let sample = generate_sbm(&instance, seed);
        let cfg = SolverConfig {
            jitter_seed: seed,
            ..base.clone()
        };
        let points = lambda_scan(&sample, &instance, &grid, &cfg)?;
        out.artifacts
            .push((format!("seed{seed}/scan.csv"), scan_to_csv(&points).into_bytes()));

        let clean = points.iter().find(|pt| {
            pt.result
                .as_ref()
                .map(|s| clean_panel(s, &instance))
                .unwrap_or(false)
        });
        let zero = points.iter().find(|pt| pt.kappa == 0.0);
        let zero_mass = zero
            .and_then(|pt| pt.result.as_ref().ok())
            .map(|s| s.off_block_mass);

        let truth = HeatmapImage::from_matrix(instance.y_star(), Some(&m))?;
        out.artifacts
            .push((format!("seed{seed}/ground_truth.pgm"), truth.to_bytes()));
        if let Some(pt) = clean {
            let s = pt.result.as_ref().expect("clean point solved");
            let img = HeatmapImage::from_matrix(&s.solution.y, Some(&m))?;
            out.artifacts
                .push((format!("seed{seed}/large_lambda.pgm"), img.to_bytes()));
            out.artifacts.push((
                format!("seed{seed}/large_lambda.pgm.flagged.txt"),
                img.flagged_text().into_bytes(),
            ));
            out.record(format!("seed{seed}.clean_kappa"), pt.kappa);
            out.record(format!("seed{seed}.clean_lambda"), pt.lambda);
            out.record(format!("seed{seed}.clean_flagged"), img.flagged.len());
        }
        if let Some(s) = zero.and_then(|pt| pt.result.as_ref().ok()) {
            let img = HeatmapImage::from_matrix(&s.solution.y, Some(&m))?;
            out.artifacts
                .push((format!("seed{seed}/small_lambda.pgm"), img.to_bytes()));
            out.artifacts.push((
                format!("seed{seed}/small_lambda.pgm.flagged.txt"),
                img.flagged_text().into_bytes(),
            ));
            out.record(format!("seed{seed}.small_flagged"), img.flagged.len());
            flagged_flags.push(!img.flagged.is_empty());
        } else {
            flagged_flags.push(false);
        }
        for pt in &points {
            if let Ok(s) = &pt.result {
                out.record(
                    format!("seed{seed}.kappa{}.residuals", pt.kappa),
                    format!(
                        "{:.3e};{:.3e};{}",
                        s.solution.primal_residual, s.solution.dual_residual, s.solution.iterations
                    ),
                );
            }
        }
        out.record(
            format!("seed{seed}.kappa0_off_block_mass"),
            zero_mass.map_or("n/a".to_string(), |v| format!("{v:.6e}")),
        );
        clean_flags.push(clean.is_some());
        small_flags.push(zero_mass.is_some_and(|v| v > 1e-2));
    }
    let n = seeds.len();
    out.checks.push(rate_check(
        "clean_panel_exists",
        &clean_flags,
        n,
        "some κ in the grid gives a clean block-diagonal panel",
    ));
    out.checks.push(rate_check(
        "kappa0_off_block_mass",
        &small_flags,
        n,
        "κ = 0 leaves off-block mass > 1e-2",
    ));
    out.checks.push(rate_check(
        "small_lambda_flagged_pixels",
        &flagged_flags,
        n,
        "κ = 0 heatmap has flagged off-block pixels",
    ));
    Ok(out)
}

/// Per-seed measurements of the recovery/oracle-block comparison.
#[derive(Clone, Debug)]
pub struct RegimeRecord {
    pub seed: u64,
    pub lambda: f64,
    pub diag_diff: f64,
    pub max_rank_ratio: f64,
    pub min_critical_factor: Option<f64>,
    pub classes: Vec<BlockClass>,
    /// Largest max-norm distance from the zero-start solution over solves
    /// started at random box-feasible matrices.
    pub restart_diff: f64,
}

const RESTARTS: u64 = 3;

pub fn regime_record(
    instance: &SbmInstance,
    seed: u64,
    config: &SolverConfig,
) -> Result<RegimeRecord, HarnessError> {
    let sample = generate_sbm(instance, seed);
    let cfg = SolverConfig {
        jitter_seed: seed,
        ..config.clone()
    };
    let lambda = make_lambda(instance.p(), instance.n(), &cfg)?;
    let full = solve_recovery(&sample.a, instance.p(), instance.q(), lambda, &cfg)?;
    let problem = SdpProblem::new(
        shifted_adjacency(&sample.a, instance.p(), instance.q(), &cfg),
        lambda,
        BoxKind::FullBox01,
    )?;
    let mut restart_diff = 0.0f64;
    for r in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + r);
        let start = SymMatrix::from_fn(instance.n(), |_, _| rng.random::<f64>());
        let sol = solve_from(&problem, &cfg, Some(&start))?;
        restart_diff = restart_diff.max(sol.y.max_abs_diff(&full.y));
    }
    let mut blocks = Vec::new();
    let mut max_ratio = 0.0f64;
    let mut min_factor: Option<f64> = None;
    let mut classes = Vec::new();
    for k in 0..instance.spec().k() {
        let sol = solve_oracle_block(&sample, instance, k, lambda, &cfg)?;
        max_ratio = max_ratio.max(rank_ratio(&sol.y)?);
        let class = if sol.y.max_abs() <= FLAG_TOL {
            BlockClass::Zero
        } else if sol.y.min_entry() >= 1.0 - 1e-2 {
            BlockClass::AllOne
        } else {
            BlockClass::Critical
        };
        if class == BlockClass::Critical {
            let f = leading_factor(&sol.y)?;
            let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
            min_factor = Some(min_factor.map_or(lo, |m| m.min(lo)));
        }
        classes.push(class);
        blocks.push(sol.y);
    }
    let diag = SymMatrix::block_diagonal(&blocks);
    Ok(RegimeRecord {
        seed,
        lambda,
        diag_diff: diag.max_abs_diff(&full.y),
        max_rank_ratio: max_ratio,
        min_critical_factor: min_factor,
        classes,
        restart_diff,
    })
}

fn theorem2_regimes(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let instance = params.instance()?;
    let cfg = params.solver()?;
    let mut out = ScenarioOutcome::default();
    let mut csv = String::from(
        "seed,lambda,diag_diff,max_rank_ratio,min_critical_factor,block_classes,restart_diff\n",
    );
    let (mut a, mut b, mut c, mut regimes) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut unique = Vec::new();
    for &seed in seeds {
        let r = regime_record(&instance, seed, &cfg)?;
        let classes: Vec<&str> = r.classes.iter().map(|c| c.as_str()).collect();
        csv.push_str(&format!(
            "{},{:.16e},{:.6e},{:.6e},{},{},{:.6e}\n",
            seed,
            r.lambda,
            r.diag_diff,
            r.max_rank_ratio,
            r.min_critical_factor.map_or(String::new(), |v| format!("{v:.6e}")),
            classes.join(";"),
            r.restart_diff
        ));
        out.record(format!("seed{seed}.lambda"), r.lambda);
        out.record(format!("seed{seed}.restart_diff"), format!("{:.3e}", r.restart_diff));
        unique.push(r.restart_diff <= 1e-4);
        a.push(r.diag_diff <= 1e-3);
        b.push(r.max_rank_ratio <= 1e-4);
        c.push(r.min_critical_factor.is_none_or(|f| f >= 0.5 - 1e-2));
        regimes.push(
            [BlockClass::AllOne, BlockClass::Critical, BlockClass::Zero]
                .iter()
                .all(|cl| r.classes.contains(cl)),
        );
    }
    out.artifacts.push(("regimes.csv".into(), csv.into_bytes()));
    let n = seeds.len();
    out.checks.push(rate_check(
        "diag_of_oracle_blocks",
        &a,
        n,
        "recovery solution within 1e-3 of the oracle blocks",
    ));
    out.checks.push(rate_check(
        "oracle_blocks_rank_one",
        &b,
        n,
        "every oracle block has λ₂/λ₁ ≤ 1e-4",
    ));
    out.checks.push(rate_check(
        "critical_factor_half",
        &c,
        n,
        "critical factors ≥ 0.5 − 1e-2",
    ));
    out.checks.push(rate_check(
        "all_regimes_present",
        &regimes,
        n,
        "all-one, critical and zero blocks all present",
    ));
    out.checks.push(rate_check(
        "restarts_agree",
        &unique,
        n,
        "solves from random starts within 1e-4 of the zero-start solution",
    ));
    Ok(out)
}

fn gap_recovery(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let instance = params.instance()?;
    let cfg = params.solver()?;
    let s_small: usize = params.get("s_small")?;
    let sizes = instance.spec().sizes().to_vec();
    // the split: clusters strictly larger than the guess sit above the gap
    let above: Vec<usize> = (0..sizes.len()).filter(|&k| sizes[k] > s_small).collect();
    let split = above.last().copied();
    let hypothesis = split.is_some_and(|k| {
        sizes.get(k + 1).is_none_or(|&next| next <= s_small) && gap_condition(&instance, k, cfg.kappa)
    });
    let mut out = ScenarioOutcome::default();
    out.record("gap_condition", hypothesis);
    let mut flags = Vec::new();
    for &seed in seeds {
        let sample = generate_sbm(&instance, seed);
        let c = SolverConfig {
            jitter_seed: seed,
            ..cfg.clone()
        };
        let report = recover_with_gap(&sample.a, instance.p(), instance.q(), s_small, &c)?;
        out.artifacts
            .push((format!("seed{seed}/clusters.txt"), report.to_text().into_bytes()));
        let expected: Vec<Vec<usize>> = above.iter().map(|&k| instance.spec().nodes(k)).collect();
        flags.push(report.partition() == expected && report.all_one().count() == expected.len());
    }
    out.checks.push(CheckResult::new(
        "gap_condition_holds",
        hypothesis,
        format!("gap condition at κ = {} for s_small = {s_small}", cfg.kappa),
    ));
    out.checks.push(rate_check(
        "exact_clusters_above_gap",
        &flags,
        seeds.len(),
        "recovered set equals the clusters above the gap",
    ));
    Ok(out)
}

/// A random batch of legal adversary edits: deletes a fraction of the present
/// inter-cluster edges and adds the same fraction of missing edges inside
/// clusters whose signal clears the adversary threshold.
pub fn random_legal_edits<R: Rng>(
    sample: &AdjacencySample,
    instance: &SbmInstance,
    threshold: f64,
    fraction: f64,
    rng: &mut R,
) -> Vec<Edit> {
    let n = sample.n();
    let mut edits = Vec::new();
    for i in 0..n {
        for j in i..n {
            let present = sample.a.get(i, j) == 1.0;
            if instance.same_cluster(i, j) {
                let k = instance.membership()[i];
                if !present && instance.signal(k) >= threshold && rng.random::<f64>() < fraction {
                    edits.push(Edit { i, j, value: 1 });
                }
            } else if present && rng.random::<f64>() < fraction {
                edits.push(Edit { i, j, value: 0 });
            }
        }
    }
    edits.shuffle(rng);
    edits
}

fn semirandom(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let instance = params.instance()?;
    let cfg = params.solver()?;
    let batches: usize = params.get("batches")?;
    let fraction: f64 = params.get("edit_fraction")?;
    let threshold = default_adversary_threshold(&instance, cfg.kappa);
    let mut out = ScenarioOutcome::default();
    let mut flags = Vec::new();
    let mut csv = String::from("seed,batch,edits,max_diff\n");
    for &seed in seeds {
        let sample = generate_sbm(&instance, seed);
        let c = SolverConfig {
            jitter_seed: seed,
            ..cfg.clone()
        };
        let lambda = make_lambda(instance.p(), instance.n(), &c)?;
        let problem = |a: &SymMatrix| {
            SdpProblem::new(
                shifted_adjacency(a, instance.p(), instance.q(), &c),
                lambda,
                BoxKind::FullBox01,
            )
        };
        let base = solve_from(&problem(&sample.a)?, &c, None)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ad7e);
        let mut worst = 0.0f64;
        let mut ok = 0usize;
        for b in 0..batches {
            let edits = random_legal_edits(&sample, &instance, threshold, fraction, &mut rng);
            let edited = apply_semirandom_adversary(&sample, &instance, &edits, threshold)?;
            let sol = solve_from(&problem(&edited.a)?, &c, Some(&base.y))?;
            let d = sol.y.max_abs_diff(&base.y);
            worst = worst.max(d);
            if d <= 5e-3 {
                ok += 1;
            }
            csv.push_str(&format!("{seed},{b},{},{d:.6e}\n", edits.len()));
        }
        out.record(format!("seed{seed}.worst_diff"), format!("{worst:.6e}"));
        out.record(format!("seed{seed}.classes"), {
            let cl: Vec<&str> = classify_truth_blocks(&base.y, &instance)
                .iter()
                .map(|c| c.as_str())
                .collect();
            cl.join(";")
        });
        flags.push(ok == batches);
        out.checks.push(CheckResult::new(
            format!("invariance_seed{seed}"),
            ok == batches,
            format!("{ok}/{batches} edit batches within 5e-3 (worst {worst:.2e})"),
        ));
    }
    out.artifacts.push(("semirandom.csv".into(), csv.into_bytes()));
    Ok(out)
}

fn recursive(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let instance = params.instance()?;
    let cfg = params.solver()?;
    let (p, q) = (instance.p(), instance.q());
    let k = instance.spec().k();
    let c_prime = params
        .auto("c_prime")?
        .unwrap_or_else(|| default_c_prime(p, q, cfg.kappa));
    let max_rounds = params.auto("max_rounds")?.unwrap_or(k + 1);
    let mut out = ScenarioOutcome::default();
    out.record("c_prime", c_prime);
    let (mut more, mut short, mut exact) = (Vec::new(), Vec::new(), Vec::new());
    let mut csv = String::from("seed,single_nodes,recursive_nodes,recovery_rounds\n");
    for &seed in seeds {
        let sample = generate_sbm(&instance, seed);
        let c = SolverConfig {
            jitter_seed: seed,
            ..cfg.clone()
        };
        let lambda = make_lambda(p, instance.n(), &c)?;
        let single = extract_clusters(
            &solve_recovery(&sample.a, p, q, lambda, &c)?.y,
            DEFAULT_ENTRY_THRESHOLD,
        )?;
        let (report, trace) = recursive_cluster(&sample.a, p, q, &c, c_prime, max_rounds)?;
        let count = |r: &ClusterReport| r.all_one().map(|c| c.len()).sum::<usize>();
        let (ns, nr) = (count(&single), count(&report));
        csv.push_str(&format!("{seed},{ns},{nr},{}\n", trace.recovery_rounds()));
        out.artifacts
            .push((format!("seed{seed}/trace.csv"), trace.to_csv().into_bytes()));
        out.artifacts
            .push((format!("seed{seed}/clusters.txt"), report.to_text().into_bytes()));
        out.record(format!("seed{seed}.terminated"), trace.terminated);
        more.push(nr >= ns);
        short.push(trace.recovery_rounds() <= k);
        exact.push(report.all_one_match_truth(instance.membership()));
    }
    out.artifacts.push(("recursive.csv".into(), csv.into_bytes()));
    let n = seeds.len();
    out.checks.push(rate_check(
        "recursion_recovers_more",
        &more,
        (4 * n).div_ceil(5),
        "recursion recovers at least as many nodes as one solve",
    ));
    out.checks.push(rate_check(
        "trace_length_at_most_k",
        &short,
        n,
        "recovery rounds ≤ K",
    ));
    out.checks.push(rate_check(
        "recovered_clusters_exact",
        &exact,
        n,
        "all-one clusters equal ground-truth clusters",
    ));
    Ok(out)
}

fn membership_of(sizes: &[usize]) -> Result<Vec<usize>, HarnessError> {
    Ok(ClusterSpec::new(sizes.to_vec())?.membership())
}

fn trial_record(trial: usize, outcome: &OracleOutcome, correct: bool) -> TrialRecord {
    TrialRecord {
        trial,
        recovered_sizes: outcome.report.clusters.iter().map(|c| c.len()).collect(),
        correct,
        budget: outcome.budget,
    }
}

/// True labels whose clusters appear exactly in the report.
fn exact_labels(report: &ClusterReport, membership: &[usize]) -> Vec<usize> {
    report.exact_truth_labels(membership)
}

fn faulty_size_param(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let sizes: Vec<usize> = params.list("sizes")?;
    let membership = membership_of(&sizes)?;
    let n = membership.len();
    let delta: f64 = params.get("delta")?;
    let s: usize = params.get("s")?;
    let cfg = params.oracle()?;
    let targets: Vec<usize> = (0..sizes.len()).filter(|&k| sizes[k] >= s).collect();
    let mut out = ScenarioOutcome::default();
    // at γ = 1 the query bound holds for any algorithm that asks each pair once
    out.record("gamma", size_param_gamma(n, s, delta, cfg.c2));
    let (mut recovered, mut cheap, mut accounted) = (Vec::new(), Vec::new(), Vec::new());
    let mut records = Vec::new();
    for (trial, &seed) in seeds.iter().enumerate() {
        let mut session = OracleSession::new(membership.clone(), delta, seed)?;
        let o = cluster_by_size_param(&mut session, s, &cfg)?;
        let labels = exact_labels(&o.report, &membership);
        let ok = targets.iter().all(|k| labels.contains(k))
            && o.report.all_one_match_truth(&membership);
        let t = o.subsample_sizes[0] as u64;
        let accounting = o.budget.queries_subsampling == t * t.saturating_sub(1) / 2
            && o.budget.total == o.budget.queries_subsampling + o.budget.queries_voting
            && o.budget.total == session.query_count();
        recovered.push(ok);
        cheap.push((o.budget.total as f64) < (n * n) as f64 / 2.0);
        accounted.push(accounting);
        out.record(format!("seed{seed}.within_guarantee"), o.within_guarantee);
        records.push(trial_record(trial, &o, ok));
    }
    out.artifacts
        .push(("trials.csv".into(), trials_to_csv(&records).into_bytes()));
    let k = seeds.len();
    out.checks.push(rate_check(
        "clusters_at_least_s_recovered",
        &recovered,
        (9 * k).div_ceil(10),
        "all clusters of size ≥ s recovered exactly",
    ));
    out.checks.push(rate_check(
        "queries_below_half_n_squared",
        &cheap,
        k,
        "total queries < n²/2",
    ));
    out.checks.push(rate_check(
        "query_accounting_exact",
        &accounted,
        k,
        "queries = |T|(|T|−1)/2 + voting asks",
    ));
    Ok(out)
}

fn faulty_adaptive(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let delta: f64 = params.get("delta")?;
    let cfg = params.oracle()?;
    let mut out = ScenarioOutcome::default();
    let mut totals = [0u64; 2];
    let mut found = Vec::new();
    for (variant, key) in ["sizes", "doubled_sizes"].into_iter().enumerate() {
        let sizes: Vec<usize> = params.list(key)?;
        let membership = membership_of(&sizes)?;
        let s1 = sizes[0] as f64;
        let mut records = Vec::new();
        for (trial, &seed) in seeds.iter().enumerate() {
            let mut session = OracleSession::new(membership.clone(), delta, seed)?;
            let (ok, outcome) = match cluster_adaptive(&mut session, &cfg) {
                Ok(o) => {
                    let ok = o.report.clusters.len() == 1
                        && exact_labels(&o.report, &membership).len() == 1
                        && o.report.clusters[0].len() as f64 >= s1 / cfg.c3;
                    (ok, Some(o))
                }
                Err(OracleError::NoClusterFound { .. }) => (false, None),
                Err(e) => return Err(e.into()),
            };
            totals[variant] += session.query_count();
            if variant == 0 {
                found.push(ok);
            }
            if let Some(o) = outcome {
                records.push(trial_record(trial, &o, ok));
            }
        }
        out.artifacts
            .push((format!("{key}_trials.csv"), trials_to_csv(&records).into_bytes()));
    }
    let k = seeds.len();
    let mean = |t: u64| t as f64 / k as f64;
    out.record("mean_total_queries", mean(totals[0]));
    out.record("mean_total_queries_doubled", mean(totals[1]));
    out.checks.push(rate_check(
        "large_cluster_recovered",
        &found,
        (9 * k).div_ceil(10),
        "a true cluster of size ≥ s₁/C₃ recovered",
    ));
    out.checks.push(CheckResult::new(
        "queries_drop_when_s1_doubles",
        totals[1] < totals[0],
        format!(
            "mean total queries {:.0} → {:.0} when s₁ doubles",
            mean(totals[0]),
            mean(totals[1])
        ),
    ));
    Ok(out)
}

fn faulty_small_k(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let sizes: Vec<usize> = params.list("sizes")?;
    let membership = membership_of(&sizes)?;
    let n = membership.len();
    let k = sizes.len();
    let delta: f64 = params.get("delta")?;
    let cfg = params.oracle()?;
    let threshold = small_k_threshold(n, k, delta, cfg.c2);
    let targets: Vec<usize> = (0..k).filter(|&i| sizes[i] as f64 >= threshold).collect();
    let mut out = ScenarioOutcome::default();
    out.record("size_threshold", threshold);
    out.record("targets", join_list(&targets));
    let (mut ok_flags, mut rounds_ok) = (Vec::new(), Vec::new());
    let mut records = Vec::new();
    for (trial, &seed) in seeds.iter().enumerate() {
        let mut session = OracleSession::new(membership.clone(), delta, seed)?;
        let o = cluster_small_k(&mut session, k, &cfg)?;
        let labels = exact_labels(&o.report, &membership);
        let ok = targets.iter().all(|t| labels.contains(t))
            && o.report.all_one_match_truth(&membership);
        ok_flags.push(ok && o.budget.rounds <= k);
        rounds_ok.push(o.budget.rounds <= k);
        records.push(trial_record(trial, &o, ok));
    }
    out.artifacts
        .push(("trials.csv".into(), trials_to_csv(&records).into_bytes()));
    let t = seeds.len();
    out.checks.push(rate_check(
        "clusters_above_threshold_recovered",
        &ok_flags,
        (9 * t).div_ceil(10),
        &format!(
            "all {} clusters of size ≥ {threshold:.1} recovered within K rounds",
            targets.len()
        ),
    ));
    out.checks
        .push(rate_check("rounds_at_most_k", &rounds_ok, t, "rounds ≤ K"));
    Ok(out)
}

/// A random symmetric pair `(M, H)` with a planted spectrum and a small
/// perturbation, plus rank indices `t ≤ T < n − 1`.
pub fn random_perturbation_pair<R: Rng>(
    n: usize,
    rng: &mut R,
) -> Result<(SymMatrix, SymMatrix, usize, usize), HarnessError> {
    let g = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let basis = eig_sym(&g)?;
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let big_t = rng.random_range(0..n - 1);
    let t = rng.random_range(0..=big_t);
    // open a gap below T
    let gap = rng.random_range(0.5..6.0);
    for v in values.iter_mut().skip(big_t + 1) {
        *v -= gap;
    }
    let m = SymMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| values[k] * basis.vector(k)[i] * basis.vector(k)[j])
            .sum()
    });
    let scale = rng.random_range(0.01..1.0);
    let h = SymMatrix::from_fn(n, |_, _| scale * rng.random_range(-1.0..1.0));
    Ok((m, h, t, big_t))
}

fn perturb_bounds(params: &Params, seeds: &[u64]) -> Result<ScenarioOutcome, HarnessError> {
    let n: usize = params.get("n")?;
    let trials: usize = params.get("trials")?;
    if n < 2 {
        return Err(config_err("n must be at least 2"));
    }
    let slack = 1e-10;
    let mut out = ScenarioOutcome::default();
    let (mut viol10, mut viol11, mut order_viol, mut compared) = (0usize, 0usize, 0usize, 0usize);
    let mut viol_repaired = 0usize;
    let mut csv = String::from("seed,trial,t,T,actual,eldridge,improved,repaired\n");
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = 0usize;
        let mut attempts = 0usize;
        while done < trials {
            attempts += 1;
            if attempts > trials * 1000 {
                return Err(config_err("could not draw pairs satisfying the gap conditions"));
            }
            let (m, h, t, big_t) = random_perturbation_pair(n, &mut rng)?;
            let e = eldridge_bound(&m, &h, t, big_t)?;
            let i = improved_bound(&m, &h, t, big_t)?;
            if !e.is_applicable() && !i.is_applicable() {
                continue;
            }
            let actual = eigenvalues_sym(&m.add(&h)?)?[t];
            let r = repaired_bound(&m, &h, t, big_t)?;
            if r.value().is_some_and(|b| actual > b + slack) {
                viol_repaired += 1;
            }
            if let PerturbationBound::Bound(b) = e {
                if actual > b + slack {
                    viol10 += 1;
                }
            }
            if let PerturbationBound::Bound(b) = i {
                if actual > b + slack {
                    viol11 += 1;
                }
            }
            if let (Some(be), Some(bi)) = (e.value(), i.value()) {
                if t == big_t {
                    compared += 1;
                    if bi > be + slack {
                        order_viol += 1;
                    }
                }
            }
            let fmt_b = |b: PerturbationBound| b.value().map_or(String::new(), |v| format!("{v:.12e}"));
            csv.push_str(&format!(
                "{seed},{done},{t},{big_t},{actual:.12e},{},{},{}\n",
                fmt_b(e),
                fmt_b(i),
                fmt_b(r)
            ));
            done += 1;
        }
    }
    out.artifacts.push(("bounds.csv".into(), csv.into_bytes()));
    let total = trials * seeds.len();
    out.checks.push(CheckResult::new(
        "eldridge_bound_holds",
        viol10 == 0,
        format!("{viol10} violations in {total} pairs"),
    ));
    out.checks.push(CheckResult::new(
        "improved_bound_holds",
        viol11 == 0,
        format!("{viol11} violations in {total} pairs"),
    ));
    out.checks.push(CheckResult::new(
        "improved_not_worse_when_t_equals_T",
        order_viol == 0 && compared > 0,
        format!("{order_viol} reversals in {compared} t = T comparisons"),
    ));
    out.checks.push(CheckResult::new(
        "repaired_bound_holds",
        viol_repaired == 0,
        format!("{viol_repaired} violations in {total} pairs"),
    ));
    Ok(out)
}
