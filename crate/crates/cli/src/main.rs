use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use sbm_sdp::harness::{
    emit_heatmap, lambda_scan, regime_record, run_scenario, scan_to_csv, ExperimentConfig,
    HarnessError, Scenario,
};
use sbm_sdp::io::{
    instance_from_text, instance_to_text, read_edge_list, write_edge_list, write_file,
    write_matrix_csv, IoError,
};
use sbm_sdp::model::{generate_sbm, ClusterSpec, SbmInstance};
use sbm_sdp::oracle::{trials_to_csv, FaultyExperiment};
use sbm_sdp::recovery::{
    default_c_prime, extract_clusters, recover_with_gap, recursive_cluster,
    DEFAULT_ENTRY_THRESHOLD,
};
use sbm_sdp::sdp::{
    check_kkt, make_lambda, shifted_adjacency, solve_from, BoxKind, SdpError, SdpProblem,
    SolverConfig,
};

#[derive(Parser)]
#[command(name = "sbm-sdp", version, about = "Trace-regularized SDP cluster recovery in unbalanced block models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an SBM graph and write the instance and edge list
    Generate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the recovery SDP and write the solution, clusters, heatmap and KKT audit
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Edge list to use instead of sampling from the instance
        #[arg(long)]
        adjacency: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the recovery solution with the per-cluster oracle blocks
    OracleBlocks {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Recover the clusters above a known size gap
    Gap {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        s_small: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recursive clustering
    Recursive {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        c_prime: Option<f64>,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Faulty-oracle clustering experiment from a key-value config file
    Faulty {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial CSV; printed to stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random checks of the eigenvalue perturbation bounds
    Perturb {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One recovery solve per κ on a grid
    Scan {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        kappa_grid: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named scenario from a config file or from flags
    Scenario {
        #[arg(long, conflicts_with_all = ["name", "seeds"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        name: Option<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Parameter override, repeatable
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file written by `generate`
    #[arg(long, conflicts_with_all = ["sizes", "p", "q"])]
    instance: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Sampling seed; also seeds the λ jitter
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 3.0)]
    kappa: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failed(String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.exit_code() == 2 {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

macro_rules! failed_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Failed(e.to_string())
            }
        }
    )*};
}
failed_from!(
    IoError,
    SdpError,
    sbm_sdp::model::ModelError,
    sbm_sdp::recovery::RecoveryError,
    sbm_sdp::linalg::LinalgError
);

impl From<sbm_sdp::oracle::OracleError> for CliError {
    fn from(e: sbm_sdp::oracle::OracleError) -> Self {
        match e {
            sbm_sdp::oracle::OracleError::BadConfig(_) | sbm_sdp::oracle::OracleError::BadDelta(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

type CliResult = Result<bool, CliError>;

impl InstanceArgs {
    fn load(&self) -> Result<(SbmInstance, u64), CliError> {
        let (instance, file_seed) = match &self.instance {
            Some(path) => {
                let text = read_text(path)?;
                instance_from_text(&text).map_err(|e| CliError::Usage(e.to_string()))?
            }
            None => {
                let (Some(p), Some(q)) = (self.p, self.q) else {
                    return Err(CliError::Usage("need --instance or --sizes, --p and --q".into()));
                };
                let spec = ClusterSpec::new(self.sizes.clone())
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let inst = SbmInstance::new(spec, p, q).map_err(|e| CliError::Usage(e.to_string()))?;
                (inst, None)
            }
        };
        let seed = self
            .seed
            .or(file_seed)
            .ok_or_else(|| CliError::Usage("--seed is required".into()))?;
        Ok((instance, seed))
    }
}

impl SolverArgs {
    fn config(&self, seed: u64) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            kappa: self.kappa,
            max_iter: self.max_iter,
            tol_primal: self.tol,
            tol_dual: self.tol,
            jitter_seed: seed,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn lambda(&self, instance: &SbmInstance, cfg: &SolverConfig) -> Result<f64, CliError> {
        match self.lambda {
            Some(l) => Ok(l),
            None => Ok(make_lambda(instance.p(), instance.n(), cfg)?),
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => Ok(write_file(path, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(instance: &InstanceArgs, out: &Path) -> CliResult {
    let (inst, seed) = instance.load()?;
    let sample = generate_sbm(&inst, seed);
    write_file(&out.join("instance.txt"), instance_to_text(&inst, Some(seed)).as_bytes())?;
    let mut edges = Vec::new();
    write_edge_list(&sample.a, &mut edges)?;
    write_file(&out.join("adjacency.txt"), &edges)?;
    println!("wrote n = {} instance to {}", inst.n(), out.display());
    Ok(true)
}

fn solve(instance: &InstanceArgs, solver: &SolverArgs, adjacency: Option<&Path>, out: &Path) -> CliResult {
    let (inst, seed) = instance.load()?;
    let cfg = solver.config(seed)?;
    let a = match adjacency {
        Some(path) => {
            let f = fs::File::open(path).map_err(|e| IoError::with_path(path, e))?;
            let a = read_edge_list(BufReader::new(f))?;
            if a.n() != inst.n() {
                return Err(CliError::Usage(format!(
                    "adjacency has n = {} but the instance has n = {}",
                    a.n(),
                    inst.n()
                )));
            }
            a
        }
        None => generate_sbm(&inst, seed).a,
    };
    let lambda = solver.lambda(&inst, &cfg)?;
    let problem = SdpProblem::new(shifted_adjacency(&a, inst.p(), inst.q(), &cfg), lambda, BoxKind::FullBox01)?;
    let sol = solve_from(&problem, &cfg, None).or_else(SdpError::into_best)?;
    let mut csv = Vec::new();
    write_matrix_csv(&sol.y, &mut csv)?;
    write_file(&out.join("solution.csv"), &csv)?;
    let report = extract_clusters(&sol.y, DEFAULT_ENTRY_THRESHOLD)?;
    write_file(&out.join("clusters.txt"), report.to_text().as_bytes())?;
    let img = emit_heatmap(&sol.y, Some(inst.membership()), &out.join("heatmap.pgm"))?;
    let kkt = check_kkt(&problem, &sol, 1e-3)?;
    let mut summary = format!(
        "lambda = {lambda:.16e}\nobjective = {:.16e}\niterations = {}\nconverged = {}\nprimal_residual = {:.6e}\ndual_residual = {:.6e}\nflagged_pixels = {}\n",
        sol.objective,
        sol.iterations,
        sol.converged,
        sol.primal_residual,
        sol.dual_residual,
        img.flagged.len()
    );
    summary.push_str(&kkt.to_key_value());
    write_file(&out.join("summary.txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(sol.converged)
}

fn oracle_blocks(instance: &InstanceArgs, solver: &SolverArgs) -> CliResult {
    let (inst, seed) = instance.load()?;
    let cfg = solver.config(seed)?;
    let r = regime_record(&inst, seed, &cfg)?;
    let classes: Vec<&str> = r.classes.iter().map(|c| c.as_str()).collect();
    println!("lambda = {:.16e}", r.lambda);
    println!("diag_diff = {:.6e}", r.diag_diff);
    println!("max_rank_ratio = {:.6e}", r.max_rank_ratio);
    if let Some(f) = r.min_critical_factor {
        println!("min_critical_factor = {f:.6e}");
    }
    println!("block_classes = {}", classes.join(","));
    Ok(r.diag_diff <= 1e-3)
}

fn gap(instance: &InstanceArgs, solver: &SolverArgs, s_small: usize, out: Option<&Path>) -> CliResult {
    let (inst, seed) = instance.load()?;
    let cfg = solver.config(seed)?;
    let a = generate_sbm(&inst, seed).a;
    let report = recover_with_gap(&a, inst.p(), inst.q(), s_small, &cfg)?;
    emit(out, &report.to_text())?;
    Ok(true)
}

fn recursive(
    instance: &InstanceArgs,
    solver: &SolverArgs,
    c_prime: Option<f64>,
    max_rounds: Option<usize>,
    out: Option<&Path>,
) -> CliResult {
    let (inst, seed) = instance.load()?;
    let cfg = solver.config(seed)?;
    let a = generate_sbm(&inst, seed).a;
    let c_prime = c_prime.unwrap_or_else(|| default_c_prime(inst.p(), inst.q(), cfg.kappa));
    let rounds = max_rounds.unwrap_or(inst.spec().k() + 1);
    let (report, trace) = recursive_cluster(&a, inst.p(), inst.q(), &cfg, c_prime, rounds)?;
    match out {
        Some(dir) => {
            write_file(&dir.join("clusters.txt"), report.to_text().as_bytes())?;
            write_file(&dir.join("trace.csv"), trace.to_csv().as_bytes())?;
        }
        None => print!("{}{}", report.to_text(), trace.to_csv()),
    }
    Ok(true)
}

fn faulty(config: &Path, out: Option<&Path>) -> CliResult {
    let exp = FaultyExperiment::from_text(&read_text(config)?)?;
    let records = exp.run()?;
    emit(out, &trials_to_csv(&records))?;
    let correct = records.iter().filter(|r| r.correct).count();
    eprintln!("{correct}/{} trials correct", records.len());
    Ok(true)
}

fn perturb(n: usize, trials: usize, seed: u64, out: Option<&Path>) -> CliResult {
    let cfg = ExperimentConfig::new(Scenario::PerturbBounds, vec![seed])
        .with("n", n)
        .with("trials", trials);
    let outcome = run_scenario(&cfg)?;
    if let Some(path) = out {
        for (_, bytes) in &outcome.artifacts {
            write_file(path, bytes)?;
        }
    }
    for c in &outcome.checks {
        println!("{c}");
    }
    Ok(outcome.passed())
}

fn scan(instance: &InstanceArgs, solver: &SolverArgs, grid: &[f64], out: Option<&Path>) -> CliResult {
    let (inst, seed) = instance.load()?;
    let cfg = solver.config(seed)?;
    let sample = generate_sbm(&inst, seed);
    let points = lambda_scan(&sample, &inst, grid, &cfg)?;
    emit(out, &scan_to_csv(&points))?;
    Ok(true)
}

fn scenario(
    config: Option<&Path>,
    name: Option<&str>,
    seeds: &[u64],
    set: &[String],
    output_dir: Option<&Path>,
) -> CliResult {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_text(&read_text(path)?)?,
        None => {
            let scenario: Scenario = name.unwrap_or_default().parse()?;
            ExperimentConfig::new(scenario, seeds.to_vec())
        }
    };
    for kv in set {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")));
        };
        cfg.params.insert(k.trim(), v.trim());
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = Some(dir.to_path_buf());
    }
    let outcome = run_scenario(&cfg)?;
    for c in &outcome.checks {
        println!("{c}");
    }
    Ok(outcome.passed())
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Generate { instance, out } => generate(instance, out),
        Command::Solve {
            instance,
            solver,
            adjacency,
            out,
        } => solve(instance, solver, adjacency.as_deref(), out),
        Command::OracleBlocks { instance, solver } => oracle_blocks(instance, solver),
        Command::Gap {
            instance,
            solver,
            s_small,
            out,
        } => gap(instance, solver, *s_small, out.as_deref()),
        Command::Recursive {
            instance,
            solver,
            c_prime,
            max_rounds,
            out,
        } => recursive(instance, solver, *c_prime, *max_rounds, out.as_deref()),
        Command::Faulty { config, out } => faulty(config, out.as_deref()),
        Command::Perturb {
            n,
            trials,
            seed,
            out,
        } => perturb(*n, *trials, *seed, out.as_deref()),
        Command::Scan {
            instance,
            solver,
            kappa_grid,
            out,
        } => scan(instance, solver, kappa_grid, out.as_deref()),
        Command::Scenario {
            config,
            name,
            seeds,
            set,
            output_dir,
        } => scenario(
            config.as_deref(),
            name.as_deref(),
            seeds,
            set,
            output_dir.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
