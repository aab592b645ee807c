//! Batch experiment runner behind the `varexp-solve` binary.
//!
//! A run reads one TOML config, executes a single task and writes
//! `run_report.json` plus CSV tables into the output directory:
//!
//! | file | header |
//! |------|--------|
//! | `solution_<k>.csv` | `x,value` (1-D) or `x,y,value` (2-D) |
//! | `trace.csv`, `trace_<k>.csv` | `iter,e0,j,total,grad_norm` |
//! | `fountain.csv` | `k,energy,grad_norm,sign_changes` |
//! | `lambda1_sweep.csv` | `scale,quotient` |
//!
//! The report lists every file written. Wall-clock timings are included only
//! when requested, so that repeated runs with one seed are byte-identical.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::energy::Problem;
use crate::error::{Error, Result};
use crate::exponent::{check_admissibility, ExponentField};
use crate::expr::FieldSpec;
use crate::mesh::{enforce_zero_trace, GridFunction, Mesh, MeshSpec};
use crate::model::{
    simon_ratio_floor, verify_kernel_hypotheses, verify_reaction_hypotheses, KernelKind, OperatorKernel,
    Reaction, ReactionParams, SamplingPlan,
};
use crate::modular::{luxemburg_norm, modular, sobolev0_norm};
use crate::solvers::{
    build_subspace_ladder, fountain_search, global_minimize_at_lambda, lambda1_minimize, mountain_pass_solve,
    verify_mp_geometry, SolveReport, SolverConfig, Status, TraceRow,
};

/// Random pairs per exponent class for the strict-monotonicity estimate.
const SIMON_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Verify,
    MountainPass,
    Fountain,
    Lambda1,
    MinimizeAtLambda,
    Norms,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Verify,
        Task::MountainPass,
        Task::Fountain,
        Task::Lambda1,
        Task::MinimizeAtLambda,
        Task::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Verify => "verify",
            Task::MountainPass => "mountain-pass",
            Task::Fountain => "fountain",
            Task::Lambda1 => "lambda1",
            Task::MinimizeAtLambda => "minimize-at-lambda",
            Task::Norms => "norms",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    pub p: FieldSpec,
    pub q: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelKind,
}

/// Power reaction `c(x)|t|^{q(x)−2}t`; omitted parameters take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    #[serde(default = "unit_field")]
    pub c: FieldSpec,
    pub growth_constant: Option<f64>,
    pub mu: Option<f64>,
    pub threshold: Option<f64>,
    pub odd: Option<bool>,
}

impl Default for ReactionConfig {
    fn default() -> Self {
        ReactionConfig {
            c: unit_field(),
            growth_constant: None,
            mu: None,
            threshold: None,
            odd: None,
        }
    }
}

fn unit_field() -> FieldSpec {
    FieldSpec::Constant(1.0)
}

/// Fields used by individual tasks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    /// Field measured by the `norms` task.
    pub u: Option<FieldSpec>,
    /// Ray direction for the mountain-pass geometry; defaults to the product
    /// of half sine waves over the box.
    pub phi: Option<FieldSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    /// Not echoed into the report, so reports from different directories match.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    /// Reaction multiplier for `minimize-at-lambda`.
    pub lambda: Option<f64>,
    pub mesh: MeshSpec,
    pub exponents: ExponentsConfig,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub reaction: ReactionConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::parse(&src).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Mesh and problem described by the config.
    pub fn problem(&self) -> Result<Problem> {
        let mesh = Arc::new(self.mesh.build()?);
        let p = ExponentField::build(&self.exponents.p, &mesh)?;
        let q = ExponentField::build(&self.exponents.q, &mesh)?;
        let kernel = OperatorKernel::new(self.kernel.family, p)?;
        let c = self.reaction.c.sample(&mesh)?;
        let reaction = Reaction::power(&mesh, q, c)?;
        let d = *reaction.params();
        let params = ReactionParams {
            growth_constant: self.reaction.growth_constant.unwrap_or(d.growth_constant),
            mu: self.reaction.mu.unwrap_or(d.mu),
            threshold: self.reaction.threshold.unwrap_or(d.threshold),
            odd: self.reaction.odd.unwrap_or(d.odd),
        };
        Problem::new(mesh, kernel, reaction.with_params(params))
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub task: Option<Task>,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report_path: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Runs the experiment in `config_path`.
///
/// Exit codes: 0 on success, 2 when a `verify` run finds a violated
/// hypothesis or an inadmissible exponent pair, 1 when a solver fails.
pub fn run(config_path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(dir) = &overrides.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(task) = overrides.task {
        cfg.task = task;
    }
    run_config(&cfg, overrides.timings)
}

/// Runs an already parsed config; the solver seed is taken from `cfg.seed`.
pub fn run_config(cfg: &ExperimentConfig, timings: bool) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    cfg.solver.seed = cfg.seed;
    let cfg = &cfg;
    fs::create_dir_all(&cfg.output_dir)?;
    let prob = cfg.problem()?;
    let mut out = Output {
        dir: cfg.output_dir.clone(),
        files: Vec::new(),
    };
    let mut report = Map::new();
    report.insert("task".into(), json!(cfg.task));
    report.insert("seed".into(), json!(cfg.seed));
    report.insert("config".into(), serde_json::to_value(cfg)?);
    info!("running task {} with seed {}", cfg.task, cfg.seed);

    let exit_code = match cfg.task {
        Task::Verify => task_verify(&prob, cfg, &mut report)?,
        Task::MountainPass => task_mountain_pass(&prob, cfg, &mut out, &mut report)?,
        Task::Fountain => task_fountain(&prob, cfg, &mut out, &mut report)?,
        Task::Lambda1 => task_lambda1(&prob, cfg, &mut out, &mut report)?,
        Task::MinimizeAtLambda => task_minimize(&prob, cfg, &mut out, &mut report)?,
        Task::Norms => task_norms(&prob, cfg, &mut report)?,
    };

    report.insert("exit_code".into(), json!(exit_code));
    let names: Vec<String> = out
        .files
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    report.insert("files".into(), json!(names));
    if timings {
        report.insert("timings".into(), json!({ "total_seconds": start.elapsed().as_secs_f64() }));
    }
    let report_path = cfg.output_dir.join("run_report.json");
    let mut text = serde_json::to_string_pretty(&Value::Object(report))?;
    text.push('\n');
    fs::write(&report_path, text)?;
    Ok(RunOutcome {
        exit_code,
        report_path,
        files: out.files,
    })
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn writer(&mut self, name: &str) -> Result<csv::Writer<fs::File>> {
        let path = self.dir.join(name);
        let w = csv::Writer::from_path(&path)?;
        self.files.push(path);
        Ok(w)
    }

    fn solution(&mut self, name: &str, mesh: &Mesh, u: &GridFunction) -> Result<String> {
        let mut w = self.writer(name)?;
        if mesh.dim() == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (c, v) in mesh.coords().iter().zip(u.values()) {
            if mesh.dim() == 1 {
                w.write_record([fmt_f64(c[0]), fmt_f64(*v)])?;
            } else {
                w.write_record([fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(*v)])?;
            }
        }
        w.flush()?;
        Ok(name.to_string())
    }

    fn trace(&mut self, name: &str, rows: &[TraceRow]) -> Result<String> {
        let mut w = self.writer(name)?;
        w.write_record(["iter", "e0", "j", "total", "grad_norm"])?;
        for r in rows {
            w.write_record([
                r.iter.to_string(),
                fmt_f64(r.e0),
                fmt_f64(r.j),
                fmt_f64(r.total),
                fmt_f64(r.grad_norm),
            ])?;
        }
        w.flush()?;
        Ok(name.to_string())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn solve_summary(r: &SolveReport, solution_file: &str, trace_file: &str) -> Value {
    json!({
        "status": r.status,
        "energy": r.energy,
        "grad_norm": r.grad_norm,
        "iterations": r.iterations,
        "max_abs": r.solution.max_abs(),
        "solution_file": solution_file,
        "trace_file": trace_file,
    })
}

fn hypotheses(prob: &Problem, cfg: &ExperimentConfig) -> Result<Value> {
    let mesh = prob.mesh();
    let plan = SamplingPlan::default();
    let kernel = verify_kernel_hypotheses(prob.kernel(), mesh, &plan)?;
    let reaction = verify_reaction_hypotheses(prob.reaction(), prob.p(), mesh, &plan)?;
    let report = kernel.merge(reaction);
    let admissibility = check_admissibility(prob.p(), prob.q(), mesh)?;
    let simon = simon_ratio_floor(prob.kernel(), mesh, SIMON_SAMPLES, cfg.seed);
    Ok(json!({
        "admissibility": admissibility,
        "any_violated": report.any_violated(),
        "checks": report.checks,
        "simon": simon,
        "simon_floor": simon.floor(),
    }))
}

fn task_verify(prob: &Problem, cfg: &ExperimentConfig, report: &mut Map<String, Value>) -> Result<i32> {
    let h = hypotheses(prob, cfg)?;
    let admissible = h["admissibility"]["c_plus_ok"] == json!(true)
        && h["admissibility"]["growth_gap_ok"] == json!(true)
        && h["admissibility"]["subcritical_ok"] == json!(true)
        && h["admissibility"]["a5_ok"] == json!(true);
    let violated = h["any_violated"] == json!(true) || h["simon"]["violations"] != json!(0);
    report.insert("hypotheses".into(), h);
    Ok(if violated || !admissible { 2 } else { 0 })
}

/// Default ray direction: `Π_d sin(π(x_d − a_d)/(b_d − a_d))`.
fn default_phi(mesh: &Mesh) -> GridFunction {
    let (lo, hi) = (mesh.lower().to_vec(), mesh.upper().to_vec());
    let g = GridFunction::from_fn(mesh, |c| {
        (0..mesh.dim())
            .map(|d| (std::f64::consts::PI * (c[d] - lo[d]) / (hi[d] - lo[d])).sin())
            .product()
    });
    enforce_zero_trace(mesh, &g)
}

fn field(mesh: &Mesh, spec: &FieldSpec) -> Result<GridFunction> {
    Ok(enforce_zero_trace(mesh, &GridFunction::from_values(mesh, spec.sample(mesh)?)?))
}

fn task_mountain_pass(
    prob: &Problem,
    cfg: &ExperimentConfig,
    out: &mut Output,
    report: &mut Map<String, Value>,
) -> Result<i32> {
    let mesh = prob.mesh();
    report.insert("hypotheses".into(), hypotheses(prob, cfg)?);
    let phi = match &cfg.fields.phi {
        Some(spec) => field(mesh, spec)?,
        None => default_phi(mesh),
    };
    let geometry = match verify_mp_geometry(prob, &phi, cfg.solver.sphere_samples, &cfg.solver) {
        Ok(g) => g,
        Err(e) => return failure(report, e),
    };
    report.insert("geometry".into(), serde_json::to_value(&geometry)?);
    let solve = match mountain_pass_solve(prob, &geometry, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return failure(report, e),
    };
    let s = out.solution("solution_1.csv", mesh, &solve.solution)?;
    let t = out.trace("trace.csv", &solve.trace)?;
    report.insert("solve".into(), solve_summary(&solve, &s, &t));
    Ok(if solve.converged() { 0 } else { 1 })
}

fn task_fountain(
    prob: &Problem,
    cfg: &ExperimentConfig,
    out: &mut Output,
    report: &mut Map<String, Value>,
) -> Result<i32> {
    let mesh = prob.mesh();
    report.insert("hypotheses".into(), hypotheses(prob, cfg)?);
    let ladder = match build_subspace_ladder(prob, cfg.solver.ladder_size, &cfg.solver) {
        Ok(l) => l,
        Err(e) => return failure(report, e),
    };
    report.insert("ladder".into(), serde_json::to_value(&ladder)?);
    let result = match fountain_search(prob, &ladder, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return failure(report, e),
    };
    let mut table = out.writer("fountain.csv")?;
    table.write_record(["k", "energy", "grad_norm", "sign_changes"])?;
    let mut solutions = Vec::new();
    for (i, sol) in result.solutions.iter().enumerate() {
        let k = i + 1;
        let r = &sol.report;
        table.write_record([
            k.to_string(),
            fmt_f64(r.energy.total),
            fmt_f64(r.grad_norm),
            sol.sign_changes.to_string(),
        ])?;
        let s = out.solution(&format!("solution_{k}.csv"), mesh, &r.solution)?;
        let t = out.trace(&format!("trace_{k}.csv"), &r.trace)?;
        let mut summary = solve_summary(r, &s, &t);
        summary["k"] = json!(k);
        summary["level"] = json!(sol.level);
        summary["start_sign"] = json!(sol.start_sign);
        summary["sign_changes"] = json!(sol.sign_changes);
        solutions.push(summary);
    }
    table.flush()?;
    report.insert("solutions".into(), json!(solutions));
    report.insert("failures".into(), serde_json::to_value(&result.failures)?);
    Ok(if result.solutions.is_empty() { 1 } else { 0 })
}

fn task_lambda1(
    prob: &Problem,
    cfg: &ExperimentConfig,
    out: &mut Output,
    report: &mut Map<String, Value>,
) -> Result<i32> {
    let result = match lambda1_minimize(prob, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return failure(report, e),
    };
    let mut table = out.writer("lambda1_sweep.csv")?;
    table.write_record(["scale", "quotient"])?;
    for p in &result.sweep {
        table.write_record([fmt_f64(p.scale), fmt_f64(p.quotient)])?;
    }
    table.flush()?;
    let mut value = serde_json::to_value(&result)?;
    value["sweep_file"] = json!("lambda1_sweep.csv");
    if let Some(u) = &result.minimizer {
        value["solution_file"] = json!(out.solution("solution_1.csv", prob.mesh(), u)?);
    }
    report.insert("lambda1".into(), value);
    Ok(0)
}

fn task_minimize(
    prob: &Problem,
    cfg: &ExperimentConfig,
    out: &mut Output,
    report: &mut Map<String, Value>,
) -> Result<i32> {
    let lambda = cfg
        .lambda
        .ok_or_else(|| Error::Config("task minimize-at-lambda needs `lambda`".into()))?;
    let solve = match global_minimize_at_lambda(prob, lambda, None, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return failure(report, e),
    };
    let s = out.solution("solution_1.csv", prob.mesh(), &solve.solution)?;
    let t = out.trace("trace.csv", &solve.trace)?;
    report.insert("lambda".into(), json!(lambda));
    report.insert("solve".into(), solve_summary(&solve, &s, &t));
    Ok(if solve.status == Status::MaxIter { 1 } else { 0 })
}

fn task_norms(prob: &Problem, cfg: &ExperimentConfig, report: &mut Map<String, Value>) -> Result<i32> {
    let spec = cfg
        .fields
        .u
        .as_ref()
        .ok_or_else(|| Error::Config("task norms needs `fields.u`".into()))?;
    let mesh = prob.mesh();
    let u = GridFunction::from_values(mesh, spec.sample(mesh)?)?;
    let mut value = json!({
        "modular_p": modular(mesh, &u, prob.p())?,
        "luxemburg_p": luxemburg_norm(mesh, &u, prob.p())?,
        "modular_q": modular(mesh, &u, prob.q())?,
        "luxemburg_q": luxemburg_norm(mesh, &u, prob.q())?,
    });
    match sobolev0_norm(mesh, &u, prob.p()) {
        Ok(n) => value["sobolev0_p"] = json!(n),
        Err(e) => value["sobolev0_p"] = json!(e.to_string()),
    }
    report.insert("norms".into(), value);
    Ok(0)
}

fn failure(report: &mut Map<String, Value>, e: Error) -> Result<i32> {
    log::error!("{e}");
    report.insert("error".into(), json!(e.to_string()));
    Ok(1)
}
