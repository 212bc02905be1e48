//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use sbm_sdp::harness::{run_scenario, CheckResult, ExperimentConfig, Scenario};
use sbm_sdp::model::ClusterSpec;
use sbm_sdp::oracle::{majority_vote_membership, OracleConfig, OracleSession};
use sbm_sdp::sdp::{check_kkt, solve, SolverConfig};

struct Criterion {
    id: &'static str,
    title: &'static str,
    run: fn() -> Vec<CheckResult>,
}

fn seeds(n: u64) -> Vec<u64> {
    (0..n).collect()
}

fn scenario(cfg: ExperimentConfig) -> Vec<CheckResult> {
    match run_scenario(&cfg) {
        Ok(out) => {
            for (k, v) in out.manifest.iter() {
                println!("    {k} = {v}");
            }
            out.checks
        }
        Err(e) => vec![CheckResult::new("run", false, e.to_string())],
    }
}

fn figure1() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::Figure1, vec![0]))
}

fn theorem2() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::Theorem2Regimes, seeds(10)))
}

fn gap() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::GapRecovery, seeds(10)))
}

fn semirandom() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::Semirandom, vec![0]).with("batches", 100))
}

fn perturb() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::PerturbBounds, vec![0]).with("trials", 1000))
}

fn recursive() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::Recursive, seeds(10)))
}

fn faulty_s() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::FaultyOracleS, seeds(10)))
}

fn faulty_adaptive() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::FaultyAdaptive, seeds(10)))
}

fn faulty_small_k() -> Vec<CheckResult> {
    scenario(ExperimentConfig::new(Scenario::FaultySmallK, seeds(10)))
}

// same instance with constants small enough that the size threshold bites
fn faulty_small_k_tight() -> Vec<CheckResult> {
    scenario(
        ExperimentConfig::new(Scenario::FaultySmallK, seeds(10))
            .with("c1", 4)
            .with("c2", 1),
    )
}

fn majority_voting() -> Vec<CheckResult> {
    let sizes = vec![200, 150, 100, 50];
    let membership = ClusterSpec::new(sizes.clone()).unwrap().membership();
    let (n, delta) = (500, 0.8);
    let v = OracleConfig::default().voter_count(n, delta);
    let mut wrong = 0usize;
    for trial in 0..1000u64 {
        let mut session = OracleSession::new(membership.clone(), delta, trial).unwrap();
        let cluster = (trial % sizes.len() as u64) as usize;
        let members: Vec<usize> = (0..n).filter(|&i| membership[i] == cluster).collect();
        let voters: Vec<usize> = members.iter().copied().cycle().skip(trial as usize).take(v.min(members.len() - 1)).collect();
        let candidate = (trial as usize * 7919) % n;
        let candidate = if voters.contains(&candidate) {
            *members.iter().find(|m| !voters.contains(m)).unwrap()
        } else {
            candidate
        };
        let said = majority_vote_membership(&mut session, candidate, &voters).unwrap();
        if said != (membership[candidate] == cluster) {
            wrong += 1;
        }
    }
    vec![
        CheckResult::new("voter_count", v == 98, format!("|S'| = {v}")),
        CheckResult::new(
            "no_misclassification",
            wrong == 0,
            format!("{wrong} misclassified in 1000 candidate trials"),
        ),
    ]
}

fn solver_reference() -> Vec<CheckResult> {
    let cfg = SolverConfig {
        tol_primal: 1e-9,
        tol_dual: 1e-9,
        max_iter: 200_000,
        ..SolverConfig::default()
    };
    let (mut worst_obj, mut worst_kkt, mut worst_gap) = (0.0f64, 0.0f64, 0.0f64);
    let (mut obj_fail, mut kkt_fail) = (0usize, 0usize);
    let mut nonzero = 0usize;
    for seed in 0..50 {
        let problem = common::random_problem(seed);
        let sol = match solve(&problem, &cfg) {
            Ok(s) => s,
            Err(e) => match e.into_best() {
                Ok(s) => s,
                Err(e) => return vec![CheckResult::new("solve", false, e.to_string())],
            },
        };
        let reference = common::reference_solve(&problem);
        worst_gap = worst_gap.max(reference.gap());
        if reference.objective.abs() > 1e-6 {
            nonzero += 1;
        }
        let d = (sol.objective - reference.objective).abs();
        worst_obj = worst_obj.max(d);
        if d > 1e-5 {
            obj_fail += 1;
        }
        let kkt = check_kkt(&problem, &sol, 1e-4).unwrap();
        worst_kkt = worst_kkt.max(kkt.max_residual());
        if !kkt.passed() {
            kkt_fail += 1;
        }
    }
    vec![
        CheckResult::new(
            "reference_certified",
            worst_gap <= 1e-7,
            format!("reference duality gap ≤ {worst_gap:.2e}; {nonzero}/50 optima nonzero"),
        ),
        CheckResult::new(
            "objective_matches_reference",
            obj_fail == 0,
            format!("{obj_fail}/50 off by > 1e-5 (worst {worst_obj:.2e})"),
        ),
        CheckResult::new(
            "kkt_at_1e-4",
            kkt_fail == 0,
            format!("{kkt_fail}/50 fail (worst residual {worst_kkt:.2e})"),
        ),
    ]
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "1", title: "figure-1 panels", run: figure1 },
    Criterion { id: "2", title: "block structure of the recovery solution", run: theorem2 },
    Criterion { id: "3", title: "gap-mode recovery", run: gap },
    Criterion { id: "4", title: "semirandom invariance", run: semirandom },
    Criterion { id: "5", title: "perturbation bounds", run: perturb },
    Criterion { id: "6", title: "recursive clustering", run: recursive },
    Criterion { id: "7", title: "faulty oracle, known size", run: faulty_s },
    Criterion { id: "8", title: "faulty oracle, adaptive", run: faulty_adaptive },
    Criterion { id: "9", title: "faulty oracle, small K", run: faulty_small_k },
    Criterion { id: "9b", title: "faulty oracle, small K with c1=4 c2=1", run: faulty_small_k_tight },
    Criterion { id: "10", title: "majority voting", run: majority_voting },
    Criterion { id: "11", title: "solver against reference", run: solver_reference },
];

fn main() -> ExitCode {
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = Vec::new();
    for c in CRITERIA {
        if !only.is_empty() && !only.iter().any(|o| o == c.id) {
            continue;
        }
        let start = Instant::now();
        let checks = (c.run)();
        let passed = !checks.is_empty() && checks.iter().all(|r| r.passed);
        for r in &checks {
            println!("    {r}");
        }
        println!(
            "criterion {} ({}): {} [{:.1}s]",
            c.id,
            c.title,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !passed {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
