//! Evaluation, bound checks, campaigns, and the verification suite.

use crate::algorithms::{LarNid, Pah, StrategySpec, SubSolver};
use crate::error::{Error, Result};
use crate::instance::{
    fmt_num, gen_adversarial, gen_random, perturb_prediction, prediction_matches, Adversarial, ErrorReport, Instance,
    Noise, Prediction, PredictionModel, Problem, RandomParams, Request, Scenario,
};
use crate::metric::{Point, Space, SpaceKind};
use crate::offline::{brute_force_opt, christofides, offline_opt, ExactSolver};
use crate::sim::{find_t_back, position_at, run, Action, Strategy, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use std::time::Instant;

/// Slack on every bound comparison.
pub const BOUND_SLACK: f64 = 1e-6;

/// Absolute cost cap for `spec` given the measured errors, or `None` when the
/// strategy has no proven bound. `perfect` tells LAR-NID variants whether the
/// prediction matched the instance exactly.
pub fn bound_for(spec: &StrategySpec, solver: SubSolver, errors: &ErrorReport, z_opt: f64, perfect: bool) -> Option<f64> {
    let et = errors.eps_time.unwrap_or(0.0);
    let ep = errors.eps_pos.unwrap_or(0.0);
    let el = errors.eps_last.unwrap_or(0.0).abs();
    let z = z_opt;
    let exact = solver == SubSolver::Exact;
    Some(match *spec {
        StrategySpec::Pah | StrategySpec::PahDelayed(_) => {
            if exact {
                2.0 * z
            } else {
                3.0 * z
            }
        }
        StrategySpec::Redesign => 3.0 * z,
        StrategySpec::DarpRedesign => 2.5 * z,
        StrategySpec::FollowPred | StrategySpec::WaitThenServe => return None,
        StrategySpec::LarTrust | StrategySpec::LadarTrust => z + 2.0 * et + 4.0 * ep,
        StrategySpec::LarNid(l) => {
            if !exact {
                return None;
            }
            if perfect {
                (1.5 + l) * z
            } else {
                (3.0 + 2.0 / l) * z
            }
        }
        StrategySpec::LadarNid(l) => {
            if perfect {
                (1.5 + l) * z
            } else {
                (3.5 + 2.5 / l) * z
            }
        }
        StrategySpec::LarId | StrategySpec::LadarId => {
            if exact {
                (3.0 * z).min(z + 2.0 * et + 4.0 * ep)
            } else {
                (3.5 * z).min(2.5 * z + 3.5 * et + 7.0 * ep)
            }
        }
        StrategySpec::LarLast => (4.0 * z).min(2.5 * z + el),
        StrategySpec::LadarLast => (3.5 * z).min(2.0 * z + el),
    })
}

/// One evaluated (instance, prediction, strategy) triple.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationRecord {
    pub instance_id: String,
    pub strategy: String,
    pub lambda: Option<f64>,
    pub subsolver: SubSolver,
    pub errors: ErrorReport,
    pub z_alg: f64,
    pub z_opt: f64,
    pub ratio: f64,
    pub bound: Option<f64>,
    pub bound_ok: bool,
    pub runtime_ms: Option<f64>,
}

pub const CSV_HEADER: &str =
    "instance_id,strategy,lambda,subsolver,eps_time,eps_pos,eps_last,z_alg,z_opt,ratio,bound,bound_ok,runtime_ms";

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

impl EvaluationRecord {
    pub fn csv_row(&self) -> String {
        [
            self.instance_id.clone(),
            self.strategy.clone(),
            opt_num(self.lambda),
            self.subsolver.as_str().to_string(),
            opt_num(self.errors.eps_time),
            opt_num(self.errors.eps_pos),
            opt_num(self.errors.eps_last),
            fmt_num(self.z_alg),
            fmt_num(self.z_opt),
            fmt_num(self.ratio),
            self.bound.map_or_else(|| "none".to_string(), fmt_num),
            self.bound_ok.to_string(),
            opt_num(self.runtime_ms),
        ]
        .join(",")
    }
}

/// Header line plus one row per record, newline-terminated.
pub fn records_csv(records: &[EvaluationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn tag_instance(id: &str, err: Error) -> Error {
    match err {
        Error::Capacity(m) => Error::Capacity(format!("instance {id}: {m}")),
        other => other,
    }
}

fn ratio_of(z_alg: f64, z_opt: f64) -> f64 {
    if z_opt > 0.0 {
        z_alg / z_opt
    } else {
        1.0
    }
}

/// Options for a single evaluation.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvalOptions {
    pub record_runtime: bool,
    /// Reuse a known offline optimum instead of recomputing it.
    pub z_opt: Option<f64>,
}

/// Runs `spec` on `instance` and checks its bound. The offline optimum
/// always comes from the exact solver.
pub fn evaluate(
    instance_id: &str,
    instance: &Instance,
    prediction: Option<&Prediction>,
    spec: &StrategySpec,
    solver: SubSolver,
) -> Result<EvaluationRecord> {
    evaluate_traced(instance_id, instance, prediction, spec, solver, EvalOptions::default()).map(|(r, _)| r)
}

/// Like [`evaluate`], also returning the trace.
pub fn evaluate_traced(
    instance_id: &str,
    instance: &Instance,
    prediction: Option<&Prediction>,
    spec: &StrategySpec,
    solver: SubSolver,
    opts: EvalOptions,
) -> Result<(EvaluationRecord, Trace)> {
    if let Some(p) = prediction {
        p.validate(instance)?;
    }
    let errors = ErrorReport::measure(prediction, instance)?;
    let z_opt = match opts.z_opt {
        Some(z) => z,
        None => offline_opt(instance).map_err(|e| tag_instance(instance_id, e))?,
    };
    let started = Instant::now();
    let mut strategy = spec.build(solver, instance.problem, prediction)?;
    let trace = run(instance, strategy.as_mut()).map_err(|e| tag_instance(instance_id, e))?;
    let runtime_ms = opts.record_runtime.then(|| started.elapsed().as_secs_f64() * 1e3);
    let perfect = prediction.is_some_and(|p| prediction_matches(p, instance, 1e-9));
    let z_alg = trace.completion_time;
    let bound = bound_for(spec, solver, &errors, z_opt, perfect);
    let bound_ok = z_opt <= 0.0 || bound.is_none_or(|b| z_alg <= b + BOUND_SLACK);
    let record = EvaluationRecord {
        instance_id: instance_id.to_string(),
        strategy: spec.to_string(),
        lambda: spec.lambda(),
        subsolver: solver,
        errors,
        z_alg,
        z_opt,
        ratio: ratio_of(z_alg, z_opt),
        bound,
        bound_ok,
        runtime_ms,
    };
    Ok((record, trace))
}

/// Random-instance generator settings of a campaign.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub problem: String,
    pub space: String,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_horizon() -> f64 {
    4.0
}

fn default_radius() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseLevel {
    pub time: f64,
    pub pos: f64,
}

fn default_subsolver() -> String {
    "exact".into()
}

/// Batch experiment description, read from JSON.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub instances: usize,
    pub generator: GeneratorConfig,
    /// Strategy strings; a bare `lar-nid` or `ladar-nid` expands over `lambdas`.
    pub strategies: Vec<String>,
    #[serde(default = "default_subsolver")]
    pub subsolver: String,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub noise: Vec<NoiseLevel>,
    #[serde(default)]
    pub record_runtime: bool,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: CampaignConfig = serde_json::from_str(text).map_err(|e| Error::schema("config", e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        for (k, &l) in self.lambdas.iter().enumerate() {
            if !(l > 0.0 && l <= 1.0) {
                return Err(Error::schema(format!("lambdas[{k}]"), format!("{l} outside (0, 1]")));
            }
        }
        for (k, n) in self.noise.iter().enumerate() {
            if !(n.time >= 0.0 && n.pos >= 0.0) {
                return Err(Error::schema(format!("noise[{k}]"), "noise levels must be non-negative"));
            }
        }
        let g = &self.generator;
        if g.n_min > g.n_max {
            return Err(Error::schema("generator.n_min", "exceeds n_max"));
        }
        if !(g.horizon >= 0.0 && g.radius >= 0.0) {
            return Err(Error::schema("generator", "horizon and radius must be non-negative"));
        }
        Problem::parse(&g.problem).map_err(|e| Error::schema("generator.problem", e.to_string()))?;
        SpaceKind::parse(&g.space).map_err(|e| Error::schema("generator.space", e.to_string()))?;
        SubSolver::parse(&self.subsolver).map_err(|e| Error::schema("subsolver", e.to_string()))?;
        self.specs()?;
        Ok(())
    }

    fn specs(&self) -> Result<Vec<StrategySpec>> {
        let mut out = Vec::new();
        for (k, s) in self.strategies.iter().enumerate() {
            let field = || format!("strategies[{k}]");
            if s == "lar-nid" || s == "ladar-nid" {
                if self.lambdas.is_empty() {
                    return Err(Error::schema(field(), "needs a lambda grid"));
                }
                for l in &self.lambdas {
                    out.push(StrategySpec::parse(&format!("{s}:{l}")).map_err(|e| Error::schema(field(), e.to_string()))?);
                }
            } else {
                out.push(StrategySpec::parse(s).map_err(|e| Error::schema(field(), e.to_string()))?);
            }
        }
        Ok(out)
    }
}

/// Campaign outputs as file contents.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignReport {
    pub records: Vec<EvaluationRecord>,
    pub records_csv: String,
    pub summary_csv: String,
    pub violations_csv: String,
    pub violations: usize,
}

fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Predictions of the model `spec` consumes, derived from one paired
/// prediction. The last-arrival estimate is the latest predicted release.
fn prediction_for(model: PredictionModel, paired: &Prediction) -> Prediction {
    let reqs = paired.requests().unwrap_or(&[]);
    match model {
        PredictionModel::Nid => Prediction::Nid(reqs.to_vec()),
        PredictionModel::Id => paired.clone(),
        PredictionModel::Last => Prediction::Last(reqs.iter().map(|r| r.release).fold(0.0, f64::max)),
    }
}

struct Job {
    instance: usize,
    noise: Option<usize>,
    spec: StrategySpec,
}

/// Runs a campaign. Output is deterministic in the config unless runtimes
/// are recorded.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.check()?;
    let g = &config.generator;
    let problem = Problem::parse(&g.problem)?;
    let space = SpaceKind::parse(&g.space)?;
    let solver = SubSolver::parse(&config.subsolver)?;
    let specs = config.specs()?;
    let noise: Vec<NoiseLevel> =
        if config.noise.is_empty() { vec![NoiseLevel { time: 0.0, pos: 0.0 }] } else { config.noise.clone() };

    let instances: Vec<Instance> = (0..config.instances)
        .map(|k| {
            let s = mix(config.seed, k as u64);
            let n = g.n_min + (s % (g.n_max - g.n_min + 1) as u64) as usize;
            let params = RandomParams { problem, space, n, horizon: g.horizon, radius: g.radius };
            gen_random(&params, s)
        })
        .collect();
    let z_opts: Vec<f64> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| offline_opt(inst).map_err(|e| tag_instance(&instance_label(k, None), e)))
        .collect::<Result<_>>()?;
    let predictions: Vec<Vec<Prediction>> = instances
        .iter()
        .enumerate()
        .map(|(k, inst)| {
            noise
                .iter()
                .enumerate()
                .map(|(j, lvl)| {
                    let s = mix(mix(config.seed, k as u64), j as u64 + 1);
                    perturb_prediction(inst, Noise { time: lvl.time, pos: lvl.pos }, s)
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for k in 0..instances.len() {
        for spec in &specs {
            if spec.model().is_some() {
                for j in 0..noise.len() {
                    jobs.push(Job { instance: k, noise: Some(j), spec: *spec });
                }
            } else {
                jobs.push(Job { instance: k, noise: None, spec: *spec });
            }
        }
    }
    let opts = |k: usize| EvalOptions { record_runtime: config.record_runtime, z_opt: Some(z_opts[k]) };
    let records: Vec<EvaluationRecord> = jobs
        .par_iter()
        .map(|job| {
            let inst = &instances[job.instance];
            let pred = match (job.spec.model(), job.noise) {
                (Some(m), Some(j)) => Some(prediction_for(m, &predictions[job.instance][j])),
                _ => None,
            };
            let id = instance_label(job.instance, job.noise);
            evaluate_traced(&id, inst, pred.as_ref(), &job.spec, solver, opts(job.instance)).map(|(r, _)| r)
        })
        .collect::<Result<_>>()?;

    let mut cells: Vec<(String, Option<usize>, usize, f64, usize)> = Vec::new();
    for (job, rec) in jobs.iter().zip(&records) {
        let key = (rec.strategy.clone(), job.noise);
        let pos = match cells.iter().position(|c| (c.0.clone(), c.1) == key) {
            Some(p) => p,
            None => {
                cells.push((key.0, key.1, 0, f64::NEG_INFINITY, 0));
                cells.len() - 1
            }
        };
        let c = &mut cells[pos];
        c.2 += 1;
        c.3 = c.3.max(rec.ratio);
        c.4 += usize::from(!rec.bound_ok);
    }
    let mut summary = String::from("strategy,lambda,noise_time,noise_pos,runs,worst_ratio,violations\n");
    for (strategy, j, runs, worst, bad) in &cells {
        let lambda = StrategySpec::parse(strategy).ok().and_then(|s| s.lambda());
        let (nt, np) = j.map_or((String::new(), String::new()), |j| (fmt_num(noise[j].time), fmt_num(noise[j].pos)));
        summary.push_str(&format!("{strategy},{},{nt},{np},{runs},{},{bad}\n", opt_num(lambda), fmt_num(*worst)));
    }
    let bad: Vec<EvaluationRecord> = records.iter().filter(|r| !r.bound_ok).cloned().collect();
    Ok(CampaignReport {
        records_csv: records_csv(&records),
        summary_csv: summary,
        violations_csv: records_csv(&bad),
        violations: bad.len(),
        records,
    })
}

fn instance_label(k: usize, noise: Option<usize>) -> String {
    match noise {
        Some(j) => format!("i{k:05}-n{j}"),
        None => format!("i{k:05}"),
    }
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub number: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    /// One human-readable status line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("[{status}] {:>2} {}: {}", self.number, self.name, self.detail)
    }
}

/// Knobs for the verification suite.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    /// Swap PAH's far/near test, which the suite must detect.
    pub flip_pah: bool,
    /// Compare exact hand-derived values with zero tolerance.
    pub strict: bool,
}

pub const CRITERIA: [&str; 12] = [
    "lower-bound-lb1",
    "lower-bound-lb2",
    "pah-competitive",
    "redesign-competitive",
    "lar-nid-consistency-robustness",
    "lar-trust-smoothness",
    "lar-id-bounds",
    "lar-last-bounds",
    "darp-bounds",
    "oracle-equivalence",
    "hand-traces",
    "determinism",
];

/// Runs every acceptance criterion.
pub fn verify_suite() -> Vec<CriterionOutcome> {
    verify_suite_with(SuiteOptions::default())
}

pub fn verify_suite_with(opts: SuiteOptions) -> Vec<CriterionOutcome> {
    (1..=CRITERIA.len()).map(|k| verify_criterion(k, opts)).collect()
}

/// Runs acceptance criterion `number` (1-based).
pub fn verify_criterion(number: usize, opts: SuiteOptions) -> CriterionOutcome {
    let result = match number {
        1 => check_lb1(opts),
        2 => check_lb2(opts),
        3 => check_pah(opts),
        4 => check_redesign(),
        5 => check_lar_nid(),
        6 => check_lar_trust(),
        7 => check_lar_id(),
        8 => check_lar_last(),
        9 => check_darp(),
        10 => check_oracles(),
        11 => check_hand_traces(opts),
        12 => check_determinism(),
        _ => Err(format!("no criterion {number}")),
    };
    let name = CRITERIA.get(number.wrapping_sub(1)).copied().unwrap_or("unknown");
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionOutcome { number, name, passed, detail }
}

/// Suite outcomes as CSV.
pub fn suite_report_csv(outcomes: &[CriterionOutcome]) -> String {
    let mut out = String::from("criterion,name,status,detail\n");
    for o in outcomes {
        let detail = o.detail.replace('"', "'");
        out.push_str(&format!("{},{},{},\"{detail}\"\n", o.number, o.name, if o.passed { "pass" } else { "fail" }));
    }
    out
}

type Check = std::result::Result<String, String>;

fn fail(e: Error) -> String {
    e.to_string()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Deterministic random instance number `k` of a suite.
fn suite_instance(tag: u64, k: usize, problem: Problem, n_max: usize) -> (String, Instance) {
    let seed = mix(tag, k as u64);
    let space = if k.is_multiple_of(2) { SpaceKind::Line } else { SpaceKind::Plane };
    let n = 1 + (k / 2) % n_max;
    let horizon = [0.5, 2.0, 4.0, 8.0][(k / (2 * n_max)) % 4];
    let params = RandomParams { problem, space, n, horizon, radius: 2.0 };
    (format!("seed {seed} ({} {} n={n})", problem.as_str(), space.as_str()), gen_random(&params, seed))
}

/// Evaluates and checks the bound, reporting the instance on violation.
fn expect_bound(
    id: &str,
    inst: &Instance,
    pred: Option<&Prediction>,
    spec: &StrategySpec,
    solver: SubSolver,
    z_opt: f64,
) -> std::result::Result<EvaluationRecord, String> {
    let opts = EvalOptions { record_runtime: false, z_opt: Some(z_opt) };
    let (rec, _) = evaluate_traced(id, inst, pred, spec, solver, opts).map_err(|e| format!("{spec} on {id}: {e}"))?;
    if !rec.bound_ok {
        return Err(format!(
            "{spec} ({}) violates its bound on {id}: z_alg {} > bound {}",
            solver.as_str(),
            rec.z_alg,
            rec.bound.unwrap_or(f64::NAN)
        ));
    }
    Ok(rec)
}

fn sim_z(inst: &Instance, strategy: &mut dyn Strategy) -> std::result::Result<f64, String> {
    run(inst, strategy).map(|t| t.completion_time).map_err(fail)
}

fn check_lb1(opts: SuiteOptions) -> Check {
    let tol = if opts.strict { 0.0 } else { 1e-6 };
    let mut seen = Vec::new();
    for d in [0.5, 0.25, 0.1] {
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(d)).map_err(fail)?;
        let rec = evaluate("lb1", &inst, Some(&pred), &StrategySpec::FollowPred, SubSolver::Exact).map_err(fail)?;
        if !close(rec.ratio, 1.0 / d, tol) {
            return Err(format!("lb1({d}): ratio {} != {}", rec.ratio, 1.0 / d));
        }
        let (inst, pred) = gen_adversarial(Adversarial::Lb1Perfect(d)).map_err(fail)?;
        let perfect = evaluate("lb1-perfect", &inst, Some(&pred), &StrategySpec::FollowPred, SubSolver::Exact)
            .map_err(fail)?;
        if !close(perfect.ratio, 1.0, tol) {
            return Err(format!("lb1-perfect({d}): ratio {} != 1", perfect.ratio));
        }
        seen.push(format!("1/{}={}", fmt_num(d), fmt_num(rec.ratio)));
    }
    Ok(format!("follow-pred ratios {}; perfect ratio 1", seen.join(" ")))
}

fn check_lb2(opts: SuiteOptions) -> Check {
    let tol = if opts.strict { 0.0 } else { 1e-9 };
    for spec in [StrategySpec::LarTrust, StrategySpec::LarId] {
        let (inst, pred) = gen_adversarial(Adversarial::Lb2).map_err(fail)?;
        let rec = evaluate("lb2", &inst, Some(&pred), &spec, SubSolver::Exact).map_err(fail)?;
        if !close(rec.ratio, 2.0, tol) || !rec.bound_ok {
            return Err(format!("{spec} on lb2: ratio {}, bound_ok {}", rec.ratio, rec.bound_ok));
        }
        let (inst, pred) = gen_adversarial(Adversarial::Lb2Perfect).map_err(fail)?;
        let rec = evaluate("lb2-perfect", &inst, Some(&pred), &spec, SubSolver::Exact).map_err(fail)?;
        if !close(rec.ratio, 1.0, tol) {
            return Err(format!("{spec} on lb2-perfect: ratio {}", rec.ratio));
        }
    }
    Ok("lar-trust and lar-id: ratio 2 on lb2, 1 on lb2-perfect".into())
}

/// Line instances where turning home for near requests pays twice.
fn near_request_family() -> Vec<Instance> {
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&c| {
            let reqs = [(0.0, 1.0), (0.75, 0.0), (2.25, 0.0)]
                .iter()
                .enumerate()
                .map(|(k, &(t, x))| Request::point(k + 1, t * c, Point::line(x * c)))
                .collect();
            Instance::new(Space::line(), Problem::Tsp, reqs).expect("valid family")
        })
        .collect()
}

fn check_pah(opts: SuiteOptions) -> Check {
    let build = |solver: SubSolver, delay: f64| -> Pah {
        let pah = Pah::delayed(solver, delay).expect("non-negative delay");
        if opts.flip_pah {
            pah.with_flipped_test()
        } else {
            pah
        }
    };
    let mut cases: Vec<(String, Instance)> =
        near_request_family().into_iter().enumerate().map(|(k, i)| (format!("near-request family #{k}"), i)).collect();
    cases.extend((0..1000).map(|k| suite_instance(3, k, Problem::Tsp, 8)));
    let checked: Vec<std::result::Result<[f64; 2], String>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, (id, inst))| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            let t_n = inst.last_release().unwrap_or(0.0);
            let delay = t_n * ((mix(33, k as u64) % 1000) as f64 / 1000.0);
            let mut worst = [1.0f64; 2];
            for (slot, (solver, factor)) in [(SubSolver::Exact, 2.0), (SubSolver::Christofides, 3.0)].into_iter().enumerate() {
                for d in [0.0, delay] {
                    let z = sim_z(inst, &mut build(solver, d))?;
                    if z > factor * z_opt + BOUND_SLACK {
                        return Err(format!(
                            "pah (t0={d}, {}) exceeds {factor}·opt on {id}: {z} > {}",
                            solver.as_str(),
                            factor * z_opt
                        ));
                    }
                    worst[slot] = worst[slot].max(ratio_of(z, z_opt));
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = [1.0f64; 2];
    for r in checked {
        let w = r?;
        worst = [worst[0].max(w[0]), worst[1].max(w[1])];
    }
    Ok(format!(
        "{} instances, plain and delayed; worst ratio {} exact, {} christofides",
        cases.len(),
        fmt_num(worst[0]),
        fmt_num(worst[1])
    ))
}

fn collect_worst(results: Vec<std::result::Result<f64, String>>) -> std::result::Result<f64, String> {
    let mut worst = f64::NEG_INFINITY;
    for r in results {
        worst = worst.max(r?);
    }
    Ok(worst)
}

fn check_redesign() -> Check {
    let cases: Vec<(String, Instance)> = (0..400).map(|k| suite_instance(4, k, Problem::Tsp, 8)).collect();
    let results: Vec<std::result::Result<f64, String>> = cases
        .par_iter()
        .map(|(id, inst)| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            let mut worst: f64 = 1.0;
            for solver in [SubSolver::Christofides, SubSolver::Exact] {
                let (rec, trace) = evaluate_traced(
                    id,
                    inst,
                    None,
                    &StrategySpec::Redesign,
                    solver,
                    EvalOptions { record_runtime: false, z_opt: Some(z_opt) },
                )
                .map_err(fail)?;
                if !rec.bound_ok {
                    return Err(format!("redesign ({}) exceeds 3·opt on {id}: {}", solver.as_str(), rec.z_alg));
                }
                worst = worst.max(rec.ratio);
                for s in 0..100 {
                    let t = trace.completion_time * s as f64 / 99.0;
                    let d = position_at(&trace, t).map_err(fail)?.norm();
                    if d > 0.5 * z_opt + BOUND_SLACK {
                        return Err(format!("redesign is {d} from the origin at t={t} on {id} (opt {z_opt})"));
                    }
                }
            }
            Ok(worst)
        })
        .collect();
    let worst = collect_worst(results)?;
    Ok(format!("{} instances; worst ratio {}; distance to origin within opt/2 at 100 instants", cases.len(), fmt_num(worst)))
}

/// Predicted sequence that differs from the instance: jittered, with one
/// request dropped or a spurious one added depending on `k`.
fn mismatched_sequence(inst: &Instance, k: usize, seed: u64) -> Result<Vec<Request>> {
    let pred = perturb_prediction(inst, Noise { time: 0.5, pos: 0.5 }, seed)?;
    let mut reqs = pred.requests().unwrap_or(&[]).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match k % 3 {
        0 if !reqs.is_empty() => {
            reqs.remove(rng.random_range(0..reqs.len()));
        }
        1 => {
            let id = reqs.len() + 1;
            let t = rng.random_range(0.0..4.0);
            let p = Point::from_coords(
                &(0..inst.space.dim()).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>(),
            )?;
            let b = inst.problem.eq(&Problem::Darp).then(|| p.scaled(-1.0));
            reqs.push(Request { id, release: t, position: p, delivery: b });
        }
        _ => {}
    }
    Ok(reqs)
}

fn check_nid(problem: Problem, tag: u64, count: usize, n_max: usize) -> std::result::Result<(f64, f64), String> {
    let lambdas = [0.1, 0.5, 1.0];
    let cases: Vec<(String, Instance)> = (0..count).map(|k| suite_instance(tag, k, problem, n_max)).collect();
    let nid = |l: f64| match problem {
        Problem::Tsp => StrategySpec::LarNid(l),
        Problem::Darp => StrategySpec::LadarNid(l),
    };
    let results: Vec<std::result::Result<(f64, f64), String>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, (id, inst))| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            let perfect = Prediction::Nid(inst.requests.clone());
            let wrong = Prediction::Nid(mismatched_sequence(inst, k, mix(tag, k as u64) ^ 7).map_err(fail)?);
            let mut worst = (0.0f64, 0.0f64);
            for l in lambdas {
                let spec = nid(l);
                let rec = expect_bound(id, inst, Some(&perfect), &spec, SubSolver::Exact, z_opt)?;
                worst.0 = worst.0.max(rec.ratio - l);
                let rec = expect_bound(id, inst, Some(&wrong), &spec, SubSolver::Exact, z_opt)?;
                worst.1 = worst.1.max(rec.ratio);
            }
            Ok(worst)
        })
        .collect();
    let mut worst = (0.0f64, 0.0f64);
    for r in results {
        let (a, b) = r?;
        worst = (worst.0.max(a), worst.1.max(b));
    }
    Ok(worst)
}

fn check_lar_nid() -> Check {
    let (consistency, robust) = check_nid(Problem::Tsp, 5, 300, 7)?;
    for d in [0.5, 0.25, 0.1] {
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(d)).map_err(fail)?;
        for l in [0.1, 0.5, 1.0] {
            expect_bound("lb1", &inst, Some(&pred), &StrategySpec::LarNid(l), SubSolver::Exact, 2.0 * d)?;
        }
    }
    Ok(format!(
        "300 instances per λ in {{0.1, 0.5, 1}}; worst perfect ratio minus λ {}, worst mismatched ratio {}",
        fmt_num(consistency),
        fmt_num(robust)
    ))
}

/// Instances with paired predictions at a spread of noise levels.
fn paired_suite(tag: u64, count: usize, problem: Problem, n_max: usize) -> Result<Vec<(String, Instance, Prediction)>> {
    let levels = [0.0, 0.1, 0.5, 1.0];
    (0..count)
        .map(|k| {
            let (id, inst) = suite_instance(tag, k, problem, n_max);
            let lvl = levels[k % levels.len()];
            let pred = perturb_prediction(&inst, Noise { time: lvl, pos: lvl }, mix(tag, k as u64) ^ 11)?;
            Ok((format!("{id} noise {lvl}"), inst, pred))
        })
        .collect()
}

fn check_paired(
    cases: &[(String, Instance, Prediction)],
    runs: &[(StrategySpec, SubSolver)],
) -> std::result::Result<f64, String> {
    let results: Vec<std::result::Result<f64, String>> = cases
        .par_iter()
        .map(|(id, inst, pred)| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            let mut worst: f64 = 0.0;
            for (spec, solver) in runs {
                let rec = expect_bound(id, inst, Some(pred), spec, *solver, z_opt)?;
                worst = worst.max(rec.ratio);
            }
            Ok(worst)
        })
        .collect();
    collect_worst(results)
}

fn check_lar_trust() -> Check {
    let cases = paired_suite(6, 500, Problem::Tsp, 7).map_err(fail)?;
    let worst = check_paired(&cases, &[(StrategySpec::LarTrust, SubSolver::Exact)])?;
    let mut last = 0.0;
    let mut ratios = Vec::new();
    for m in [1.0, 10.0, 100.0, 1000.0] {
        let (inst, pred) = gen_adversarial(Adversarial::TrustBlowup(m)).map_err(fail)?;
        let rec = evaluate("trust-blowup", &inst, Some(&pred), &StrategySpec::LarTrust, SubSolver::Exact)
            .map_err(fail)?;
        if !(rec.ratio > last && rec.ratio >= m) || !rec.bound_ok {
            return Err(format!("trust-blowup({m}): ratio {} does not grow with M", rec.ratio));
        }
        last = rec.ratio;
        ratios.push(fmt_num(rec.ratio));
    }
    Ok(format!(
        "500 perturbed instances within the additive bound (worst ratio {}); trust-blowup ratios {}",
        fmt_num(worst),
        ratios.join(", ")
    ))
}

fn check_lar_id() -> Check {
    let cases = paired_suite(6, 500, Problem::Tsp, 7).map_err(fail)?;
    let worst = check_paired(
        &cases,
        &[(StrategySpec::LarId, SubSolver::Exact), (StrategySpec::LarId, SubSolver::Christofides)],
    )?;
    Ok(format!("500 perturbed instances, exact and christofides; worst ratio {}", fmt_num(worst)))
}

fn check_last(problem: Problem, tag: u64, count: usize, n_max: usize) -> std::result::Result<f64, String> {
    let (spec, solvers): (StrategySpec, &[SubSolver]) = match problem {
        Problem::Tsp => (StrategySpec::LarLast, &[SubSolver::Christofides, SubSolver::Exact]),
        Problem::Darp => (StrategySpec::LadarLast, &[SubSolver::Exact]),
    };
    let cases: Vec<(String, Instance)> = (0..count).map(|k| suite_instance(tag, k, problem, n_max)).collect();
    let results: Vec<std::result::Result<f64, String>> = cases
        .par_iter()
        .map(|(id, inst)| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            let t_n = inst.last_release().unwrap_or(0.0);
            let mut worst: f64 = 0.0;
            for s in [-0.5, 0.0, 0.5, 2.0] {
                let pred = Prediction::Last((t_n + s * z_opt).max(0.0));
                for &solver in solvers {
                    let rec = expect_bound(&format!("{id} shift {s}·opt"), inst, Some(&pred), &spec, solver, z_opt)?;
                    worst = worst.max(rec.ratio);
                }
            }
            Ok(worst)
        })
        .collect();
    collect_worst(results)
}

fn check_lar_last() -> Check {
    let worst = check_last(Problem::Tsp, 8, 500, 8)?;
    let mut ratios = Vec::new();
    let mut last = 0.0;
    for m in [10.0, 100.0, 1000.0] {
        let (inst, pred) = gen_adversarial(Adversarial::LateTn(m)).map_err(fail)?;
        let rec = evaluate("late-tn", &inst, Some(&pred), &StrategySpec::WaitThenServe, SubSolver::Christofides)
            .map_err(fail)?;
        if !(rec.ratio > last && rec.ratio >= m / 2.0) {
            return Err(format!("wait-then-serve on late-tn({m}): ratio {} does not grow", rec.ratio));
        }
        last = rec.ratio;
        ratios.push(fmt_num(rec.ratio));
    }
    Ok(format!(
        "500 instances × 4 prediction shifts (worst ratio {}); wait-then-serve on late-tn ratios {}",
        fmt_num(worst),
        ratios.join(", ")
    ))
}

fn check_darp() -> Check {
    let count = 200;
    let cases: Vec<(String, Instance)> = (0..count).map(|k| suite_instance(9, k, Problem::Darp, 5)).collect();
    let redesign: Vec<std::result::Result<f64, String>> = cases
        .par_iter()
        .map(|(id, inst)| {
            let z_opt = offline_opt(inst).map_err(fail)?;
            expect_bound(id, inst, None, &StrategySpec::DarpRedesign, SubSolver::Exact, z_opt).map(|r| r.ratio)
        })
        .collect();
    let w_redesign = collect_worst(redesign)?;
    let paired = paired_suite(9, count, Problem::Darp, 5).map_err(fail)?;
    let w_paired = check_paired(
        &paired,
        &[(StrategySpec::LadarTrust, SubSolver::Exact), (StrategySpec::LadarId, SubSolver::Exact)],
    )?;
    let (consistency, robust) = check_nid(Problem::Darp, 10, count, 5)?;
    let w_last = check_last(Problem::Darp, 11, count, 5)?;
    Ok(format!(
        "{count} instances each; worst ratios: redesign {}, trust/id {}, nid perfect minus λ {}, nid mismatched {}, last {}",
        fmt_num(w_redesign),
        fmt_num(w_paired),
        fmt_num(consistency),
        fmt_num(robust),
        fmt_num(w_last)
    ))
}

fn check_oracles() -> Check {
    let tsp: Vec<(String, Instance)> = (0..200).map(|k| suite_instance(12, k, Problem::Tsp, 7)).collect();
    let darp: Vec<(String, Instance)> = (0..100).map(|k| suite_instance(13, k, Problem::Darp, 5)).collect();
    let compare = |(id, inst): &(String, Instance)| -> std::result::Result<(), String> {
        let dp = offline_opt(inst).map_err(fail)?;
        let bf = brute_force_opt(inst).map_err(fail)?;
        if (dp - bf).abs() > 1e-9 {
            return Err(format!("exact solver {dp} differs from brute force {bf} on {id}"));
        }
        Ok(())
    };
    tsp.par_iter().chain(darp.par_iter()).map(compare).collect::<std::result::Result<Vec<()>, String>>()?;
    let solver = ExactSolver::default();
    tsp.par_iter()
        .map(|(id, inst)| {
            let pts: Vec<Point> = inst.requests.iter().map(|r| r.position).collect();
            let heuristic = christofides(inst.space, &pts).map_err(fail)?.length;
            let optimal = solver.tsp_tour(inst.space, &pts).map_err(fail)?.length;
            if heuristic > 1.5 * optimal + 1e-9 {
                return Err(format!("christofides {heuristic} > 1.5 × {optimal} on {id}"));
            }
            Ok(())
        })
        .collect::<std::result::Result<Vec<()>, String>>()?;
    Ok("200 tsp and 100 dial-a-ride optima match brute force; christofides within 1.5 on 200".into())
}

fn check_hand_traces(opts: SuiteOptions) -> Check {
    let tol = if opts.strict { 0.0 } else { 1e-9 };
    let two = Instance::new(
        Space::line(),
        Problem::Tsp,
        vec![Request::point(1, 0.5, Point::line(1.0)), Request::point(2, 1.0, Point::line(0.3))],
    )
    .map_err(fail)?;
    let expect = |what: &str, got: f64, want: f64| {
        if close(got, want, tol) {
            Ok(())
        } else {
            Err(format!("{what}: {got} != {want}"))
        }
    };
    let pah = sim_z(&two, &mut Pah::new(SubSolver::Exact))?;
    expect("pah", pah, 3.1)?;
    let redesign = sim_z(&two, &mut crate::algorithms::Redesign::new(SubSolver::Exact))?;
    expect("redesign", redesign, 3.5)?;
    let perfect = Instance::new(
        Space::line(),
        Problem::Tsp,
        vec![Request::point(1, 0.1, Point::line(0.1)), Request::point(2, 1.0, Point::line(1.0))],
    )
    .map_err(fail)?;
    let nid = sim_z(&perfect, &mut LarNid::new(perfect.requests.clone(), 0.5, SubSolver::Exact).map_err(fail)?)?;
    expect("lar-nid", nid, 3.0)?;
    let o = Point::line(0.0);
    let turn = find_t_back(o, o, 0.0, &[Action::MoveTo(Point::line(1.0)), Action::MoveTo(o)], 1.2).map_err(fail)?;
    expect("t_back", turn.time, 0.6)?;
    Ok(format!(
        "pah {}, redesign {}, lar-nid {}, t_back {}",
        fmt_num(pah),
        fmt_num(redesign),
        fmt_num(nid),
        fmt_num(turn.time)
    ))
}

fn check_determinism() -> Check {
    let config = CampaignConfig {
        seed: 12,
        instances: 12,
        generator: GeneratorConfig {
            problem: "tsp".into(),
            space: "plane".into(),
            n_min: 1,
            n_max: 6,
            horizon: 4.0,
            radius: 2.0,
        },
        strategies: ["pah", "redesign", "lar-nid", "lar-trust", "lar-id", "lar-last", "follow-pred"]
            .map(String::from)
            .to_vec(),
        subsolver: "exact".into(),
        lambdas: vec![0.5, 1.0],
        noise: vec![NoiseLevel { time: 0.0, pos: 0.0 }, NoiseLevel { time: 0.3, pos: 0.3 }],
        record_runtime: false,
    };
    let a = run_campaign(&config).map_err(fail)?;
    let b = run_campaign(&config).map_err(fail)?;
    if a != b {
        return Err("campaign reports differ between runs".into());
    }
    let params = RandomParams { problem: Problem::Darp, space: SpaceKind::Plane, n: 4, ..Default::default() };
    let scenario = |seed| -> Result<String> {
        let inst = gen_random(&params, seed);
        let pred = perturb_prediction(&inst, Noise { time: 0.2, pos: 0.2 }, seed)?;
        Ok(Scenario::new(inst, Some(pred))?.to_json())
    };
    if scenario(5).map_err(fail)? != scenario(5).map_err(fail)? {
        return Err("generated scenarios differ between runs".into());
    }
    let inst = gen_random(&params, 5);
    let trace = |_| -> Result<String> {
        let mut s = StrategySpec::DarpRedesign.build(SubSolver::Exact, Problem::Darp, None)?;
        Ok(run(&inst, s.as_mut())?.to_jsonl())
    };
    if trace(0).map_err(fail)? != trace(1).map_err(fail)? {
        return Err("traces differ between runs".into());
    }
    Ok(format!("campaign ({} rows), scenario, and trace outputs byte-identical across two runs", a.records.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errs(t: Option<f64>, p: Option<f64>, l: Option<f64>) -> ErrorReport {
        ErrorReport { eps_time: t, eps_pos: p, eps_last: l }
    }

    #[test]
    fn bound_examples() {
        let e = errs(Some(0.0), Some(1.0), None);
        assert_eq!(bound_for(&StrategySpec::LarId, SubSolver::Exact, &e, 1.0, false), Some(3.0));
        let e = errs(None, None, Some(0.0));
        assert_eq!(bound_for(&StrategySpec::LarLast, SubSolver::Christofides, &e, 2.0, false), Some(5.0));
        let e = errs(None, None, Some(3.0));
        assert_eq!(bound_for(&StrategySpec::LadarLast, SubSolver::Exact, &e, 2.0, false), Some(7.0));
        assert_eq!(bound_for(&StrategySpec::FollowPred, SubSolver::Exact, &e, 2.0, false), None);
        assert_eq!(bound_for(&StrategySpec::LarNid(0.5), SubSolver::Exact, &e, 2.0, true), Some(4.0));
        assert_eq!(bound_for(&StrategySpec::LarNid(0.5), SubSolver::Exact, &e, 2.0, false), Some(14.0));
        assert_eq!(bound_for(&StrategySpec::LarNid(0.5), SubSolver::Christofides, &e, 2.0, false), None);
    }

    #[test]
    fn evaluate_examples() {
        let (inst, pred) = gen_adversarial(Adversarial::Lb1(0.1)).unwrap();
        let rec = evaluate("lb1", &inst, Some(&pred), &StrategySpec::FollowPred, SubSolver::Exact).unwrap();
        assert!((rec.ratio - 10.0).abs() < 1e-9);
        assert!(rec.bound.is_none() && rec.bound_ok);
        assert!(rec.csv_row().contains(",none,true,"));

        let (inst, pred) = gen_adversarial(Adversarial::Lb2).unwrap();
        let rec = evaluate("lb2", &inst, Some(&pred), &StrategySpec::LarTrust, SubSolver::Exact).unwrap();
        assert!((rec.ratio - 2.0).abs() < 1e-9);
        assert_eq!(rec.bound, Some(5.0));
        assert!(rec.bound_ok);

        let empty = Instance::empty(Space::line(), Problem::Tsp);
        let rec = evaluate("empty", &empty, None, &StrategySpec::Pah, SubSolver::Exact).unwrap();
        assert_eq!((rec.z_alg, rec.z_opt, rec.ratio), (0.0, 0.0, 1.0));
        assert!(rec.bound_ok);
    }

    #[test]
    fn csv_layout() {
        let (inst, pred) = gen_adversarial(Adversarial::LateTn(100.0)).unwrap();
        let rec = evaluate("late", &inst, Some(&pred), &StrategySpec::LarLast, SubSolver::Christofides).unwrap();
        let csv = records_csv(&[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("late,lar-last,,christofides,,,99.0,3.0,2.0,1.5,8.0,true,"));
    }

    fn small_config() -> CampaignConfig {
        CampaignConfig::from_json(
            r#"{"seed": 3, "instances": 6,
                "generator": {"problem": "tsp", "space": "line", "n_min": 1, "n_max": 5},
                "strategies": ["pah", "lar-nid", "lar-id", "wait-then-serve"],
                "lambdas": [0.1, 0.5, 1.0], "noise": [{"time": 0, "pos": 0}, {"time": 0.5, "pos": 0.5}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn campaign_is_deterministic_and_clean() {
        let a = run_campaign(&small_config()).unwrap();
        let b = run_campaign(&small_config()).unwrap();
        assert_eq!(a.records_csv, b.records_csv);
        assert_eq!(a.violations, 0);
        assert_eq!(a.records.len(), 6 * (1 + 2 * 3 + 2 + 2));
        for r in a.records.iter().filter(|r| r.strategy.starts_with("lar-nid") && r.instance_id.ends_with("n0")) {
            assert!(r.ratio <= 1.5 + r.lambda.unwrap() + 1e-6);
        }
        assert!(a.summary_csv.starts_with("strategy,lambda,noise_time"));
    }

    #[test]
    fn config_errors_name_fields() {
        let bad = r#"{"seed": 1, "instances": 1, "lambdas": [1.5],
            "generator": {"problem": "tsp", "space": "line", "n_min": 1, "n_max": 2}, "strategies": ["pah"]}"#;
        match CampaignConfig::from_json(bad) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "lambdas[0]"),
            other => panic!("{other:?}"),
        }
        let bad = r#"{"seed": 1, "instances": 1,
            "generator": {"problem": "tsp", "space": "line", "n_min": 1, "n_max": 2}, "strategies": ["lar-nid"]}"#;
        assert!(matches!(CampaignConfig::from_json(bad), Err(Error::Schema { .. })));
        assert!(matches!(CampaignConfig::from_json("{"), Err(Error::Schema { .. })));
    }

    #[test]
    fn flipped_pah_is_caught() {
        let outcome = verify_criterion(3, SuiteOptions { flip_pah: true, strict: false });
        assert!(!outcome.passed, "{}", outcome.detail);
        let z = sim_z(&near_request_family()[1], &mut Pah::new(SubSolver::Exact).with_flipped_test()).unwrap();
        assert!((z - 5.0).abs() < 1e-9);
    }

    #[test]
    fn strict_tolerance_on_exact_instances() {
        let strict = SuiteOptions { flip_pah: false, strict: true };
        for k in [1, 2] {
            let o = verify_criterion(k, strict);
            assert!(o.passed, "{}", o.line());
        }
    }
}
