use clap::{Parser, Subcommand};
use larsim_core::algorithms::{StrategySpec, SubSolver};
use larsim_core::harness::{
    evaluate_traced, records_csv, run_campaign, suite_report_csv, verify_suite, CampaignConfig, EvalOptions,
};
use larsim_core::instance::{
    fmt_num, gen_adversarial, gen_random, perturb_prediction, Adversarial, Noise, Problem, RandomParams, Scenario,
};
use larsim_core::metric::SpaceKind;
use larsim_core::sim::{position_at, Trace};
use larsim_core::{Error, Result};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "larsim", version, about = "Online routing with predictions: simulate, evaluate, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file.
    Gen {
        /// random, lb1, lb1-perfect, lb2, lb2-perfect, trust-blowup or late-tn
        #[arg(long)]
        kind: String,
        /// δ for lb1 families, M for trust-blowup and late-tn
        #[arg(long)]
        param: Option<f64>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value = "line")]
        space: String,
        #[arg(long, default_value = "tsp")]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Attach a paired prediction jittered by this release-time noise.
        #[arg(long)]
        noise_time: Option<f64>,
        /// Attach a paired prediction jittered by this position noise.
        #[arg(long)]
        noise_pos: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one strategy on a scenario and print its evaluation record.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        algo: String,
        #[arg(long, default_value = "exact")]
        subsolver: String,
        /// Write the event trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        record_runtime: bool,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, default_value = "paper")]
        suite: String,
        /// Write per-criterion results as CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a batch experiment described by a JSON config.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a stored trace, or the server position at one instant.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        at: Option<f64>,
    },
}

/// Exit code 2 marks a bound violation or failed verification.
const VIOLATION: u8 = 2;

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Gen { kind, param, n, space, problem, seed, noise_time, noise_pos, out } => {
            let scenario = if kind == "random" {
                let params = RandomParams {
                    problem: Problem::parse(&problem)?,
                    space: SpaceKind::parse(&space)?,
                    n,
                    ..Default::default()
                };
                let inst = gen_random(&params, seed);
                let prediction = match (noise_time, noise_pos) {
                    (None, None) => None,
                    (t, p) => Some(perturb_prediction(
                        &inst,
                        Noise { time: t.unwrap_or(0.0), pos: p.unwrap_or(0.0) },
                        seed.wrapping_add(1),
                    )?),
                };
                Scenario::new(inst, prediction)?
            } else {
                let needs_param = matches!(kind.as_str(), "lb1" | "lb1-perfect" | "trust-blowup" | "late-tn");
                let param = match param {
                    Some(p) => p,
                    None if needs_param => return Err(Error::invalid(format!("`{kind}` needs --param"))),
                    None => 0.0,
                };
                let (inst, pred) = gen_adversarial(Adversarial::parse(&kind, param)?)?;
                Scenario::new(inst, Some(pred))?
            };
            scenario.store(&out)?;
            Ok(0)
        }
        Command::Run { instance, algo, subsolver, trace, record_runtime } => {
            let scenario = Scenario::load(&instance)?;
            let spec = StrategySpec::parse(&algo)?;
            let solver = SubSolver::parse(&subsolver)?;
            let id = instance.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            let opts = EvalOptions { record_runtime, z_opt: None };
            let (record, tr) =
                evaluate_traced(&id, &scenario.instance, scenario.prediction.as_ref(), &spec, solver, opts)?;
            if let Some(path) = trace {
                fs::write(path, tr.to_jsonl())?;
            }
            print!("{}", records_csv(std::slice::from_ref(&record)));
            Ok(if record.bound_ok { 0 } else { VIOLATION })
        }
        Command::Verify { suite, report } => {
            if suite != "paper" {
                return Err(Error::invalid(format!("unknown suite `{suite}`")));
            }
            let outcomes = verify_suite();
            for o in &outcomes {
                println!("{}", o.line());
            }
            if let Some(path) = report {
                fs::write(path, suite_report_csv(&outcomes))?;
            }
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { VIOLATION })
        }
        Command::Campaign { config, out } => {
            let config = CampaignConfig::from_json(&fs::read_to_string(&config)?)?;
            let report = run_campaign(&config)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("records.csv"), &report.records_csv)?;
            fs::write(out.join("summary.csv"), &report.summary_csv)?;
            fs::write(out.join("violations.csv"), &report.violations_csv)?;
            println!("{} runs, {} bound violations", report.records.len(), report.violations);
            if report.violations > 0 {
                for r in report.records.iter().filter(|r| !r.bound_ok) {
                    eprintln!("violation: {} on {}", r.strategy, r.instance_id);
                }
                return Ok(VIOLATION);
            }
            Ok(0)
        }
        Command::Replay { trace, at } => {
            let trace = Trace::from_jsonl(&fs::read_to_string(&trace)?)?;
            match at {
                Some(t) => {
                    let p = position_at(&trace, t)?;
                    let coords: Vec<String> = p.coords().iter().map(|x| fmt_num(*x)).collect();
                    println!("[{}]", coords.join(","));
                }
                None => print!("{}", trace.to_jsonl()),
            }
            Ok(0)
        }
    }
}
