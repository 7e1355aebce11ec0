//! Experiment configuration, orchestration and reproducible output.
//!
//! A run reads an [`ExperimentConfig`] (JSON), validates it, executes the
//! named experiment, and writes CSV/JSON artifacts plus a [`RunManifest`]
//! into its output directory. Floats are written in Rust's shortest
//! round-trip form, so identical configs give byte-identical CSVs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blowdown::{annulus_error, classify_limit, rescale, LimitClass};
use crate::constants::{critical_exponents, IdentityCheck, ProblemParams, SpectralConstants};
use crate::diagnostics::{
    interp_sweep, manufactured_family, non_increasing, sweeping_ratio, uniform_constant, weighted_decay,
    InterpResult,
};
use crate::error::{Error, Result};
use crate::evolve::{quasiconvergence_experiment, EvolutionConfig, EvolutionState, InitialData, QuasiconvergenceResult, StepRecord};
use crate::grid::{GridSpec, RadialGrid, RadialProfile};
use crate::linearize::scaled_kernel;
use crate::steady::{solve_ground_profile, solve_with_center, SteadyStateSolution};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Per-step slack for the monotonicity diagnostics.
pub const MONOTONE_SLACK: f64 = 1e-8;
/// Leading fraction of steps treated as transient.
pub const TRANSIENT_FRACTION: f64 = 0.1;

fn one() -> f64 {
    1.0
}
fn zero_offsets() -> Vec<f64> {
    vec![0.0]
}
fn far_window() -> (f64, f64) {
    (20.0, 200.0)
}
fn unit_annulus() -> (f64, f64) {
    (0.5, 2.0)
}
fn default_seed() -> u64 {
    7
}
fn default_random_cases() -> usize {
    24
}
fn default_name() -> String {
    "run".into()
}

/// Parameters shared by the quasiconvergence-type experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub evolution: EvolutionConfig,
    pub alpha: f64,
    pub beta: f64,
    pub initial: InitialData,
    /// Window of the weighted-decay diagnostic.
    #[serde(default = "far_window")]
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsTableSpec {
    pub dim_min: u32,
    pub dim_max: u32,
    /// Exponents `p_c(N) + offset`; ignored when `p` is given.
    #[serde(default = "zero_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySpec {
    pub params: ProblemParams,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowdownSpec {
    pub params: ProblemParams,
    #[serde(default)]
    pub grid: GridSpec,
    /// CSV profile (`r,value`); the ground profile is solved when absent.
    #[serde(default)]
    pub input: Option<PathBuf>,
    pub scales: Vec<f64>,
    #[serde(default = "unit_annulus")]
    pub annulus: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpSpec {
    pub dim: u32,
    pub radii: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_random_cases")]
    pub random_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    ConstantsTable(ConstantsTableSpec),
    Steady(SteadySpec),
    Quasiconvergence(FlowSpec),
    LiouvilleDiagnostics(FlowSpec),
    Blowdown(BlowdownSpec),
    Interp(InterpSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub experiment: Experiment,
}

fn at(path: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { field, reason } => {
            let field = if field == "exponent" { "p" } else { field };
            Error::ConfigInvalid {
                path: format!("{path}.{field}"),
                reason,
            }
        }
        other => other,
    }
}

fn payload_error<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Option<Error> {
    serde_path_to_error::deserialize::<_, T>(value).err().map(|e| Error::ConfigInvalid {
        path: format!("experiment.{}", e.path()),
        reason: e.inner().to_string(),
    })
}

/// Tagged enums buffer their content, which hides the failing field; retry
/// the payload on its own to recover the full path.
fn experiment_error(text: &str) -> Option<Error> {
    let root: serde_json::Value = serde_json::from_str(text).ok()?;
    let mut payload = root.get("experiment")?.as_object()?.clone();
    let kind = payload.remove("kind")?;
    let payload = serde_json::Value::Object(payload);
    match kind.as_str()? {
        "constants-table" => payload_error::<ConstantsTableSpec>(payload),
        "steady" => payload_error::<SteadySpec>(payload),
        "quasiconvergence" | "liouville-diagnostics" => payload_error::<FlowSpec>(payload),
        "blowdown" => payload_error::<BlowdownSpec>(payload),
        "interp" => payload_error::<InterpSpec>(payload),
        _ => None,
    }
}

fn invalid(path: &str, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        path: path.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = match serde_path_to_error::deserialize(de) {
            Ok(cfg) => cfg,
            Err(e) => {
                let path = e.path().to_string();
                let fallback = Error::ConfigInvalid {
                    path: path.clone(),
                    reason: e.inner().to_string(),
                };
                return Err(if path == "experiment" {
                    experiment_error(text).unwrap_or(fallback)
                } else {
                    fallback
                });
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Check every module precondition before any compute.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a non-empty plain file name"));
        }
        match &self.experiment {
            Experiment::ConstantsTable(ConstantsTableSpec { dim_min, dim_max, offsets, p }) => {
                if dim_min > dim_max {
                    return Err(invalid("experiment.dim_max", "must be at least dim_min"));
                }
                for dim in *dim_min..=*dim_max {
                    match p {
                        Some(p) => {
                            let params = ProblemParams::new(dim, *p).map_err(|e| at("experiment", e))?;
                            SpectralConstants::new(params).map_err(|e| at("experiment", e))?;
                        }
                        None => {
                            if critical_exponents(dim).joseph_lundgren.finite().is_none() {
                                return Err(invalid(
                                    "experiment.dim_min",
                                    format!("p_c is infinite for N = {dim}; give an explicit p"),
                                ));
                            }
                            if offsets.iter().any(|o| !(*o >= 0.0) || !o.is_finite()) {
                                return Err(invalid("experiment.offsets", "offsets must be finite and >= 0"));
                            }
                        }
                    }
                }
            }
            Experiment::Steady(SteadySpec {
                params,
                grid,
                alpha,
                fit_window,
            }) => {
                params.validate().map_err(|e| at("experiment.params", e))?;
                SpectralConstants::new(*params).map_err(|e| at("experiment.params", e))?;
                grid.validate().map_err(|e| at("experiment.grid", e))?;
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(invalid("experiment.alpha", "must be positive"));
                }
                if let Some((lo, hi)) = fit_window {
                    if !(lo < hi) || !(*lo > 0.0) {
                        return Err(invalid("experiment.fit_window", "need 0 < lo < hi"));
                    }
                }
            }
            Experiment::Quasiconvergence(spec) | Experiment::LiouvilleDiagnostics(spec) => {
                spec.evolution.validate().map_err(|e| at("experiment.evolution", e))?;
                SpectralConstants::new(spec.evolution.params).map_err(|e| at("experiment.evolution.params", e))?;
                if !(spec.alpha > 0.0 && spec.alpha < spec.beta && spec.beta.is_finite()) {
                    return Err(invalid("experiment.beta", "need 0 < alpha < beta < inf"));
                }
                if spec.evolution.convergence_eps.is_none() {
                    return Err(invalid("experiment.evolution.convergence_eps", "required for this experiment"));
                }
                if !(spec.window.0 >= 10.0 && spec.window.0 < spec.window.1) {
                    return Err(invalid("experiment.window", "need 10 <= lo < hi"));
                }
            }
            Experiment::Blowdown(BlowdownSpec {
                params,
                grid,
                scales,
                annulus,
                ..
            }) => {
                params.validate().map_err(|e| at("experiment.params", e))?;
                SpectralConstants::new(*params).map_err(|e| at("experiment.params", e))?;
                grid.validate().map_err(|e| at("experiment.grid", e))?;
                if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                    return Err(invalid("experiment.scales", "need at least one positive scale"));
                }
                if !(annulus.0 > 0.0 && annulus.0 < annulus.1) {
                    return Err(invalid("experiment.annulus", "need 0 < lo < hi"));
                }
            }
            Experiment::Interp(InterpSpec { dim, radii, .. }) => {
                if *dim < 3 {
                    return Err(invalid("experiment.dim", "N must be at least 3"));
                }
                if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                    return Err(invalid("experiment.radii", "need at least one positive radius"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

/// Simple CSV accumulator.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &str) -> Self {
        Csv {
            text: format!("{header}\n"),
        }
    }

    fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Output<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

/// Quasiconvergence run with weighted-decay and sweeping-ratio diagnostics
/// recorded at every step (sweeping against the kernel of the upper bracket).
pub fn diagnosed_flow(spec: &FlowSpec) -> Result<(SteadyStateSolution, QuasiconvergenceResult)> {
    let c = SpectralConstants::new(spec.evolution.params)?;
    let base = solve_ground_profile(&c, &spec.evolution.grid)?;
    let grid = Arc::new(RadialGrid::stretched(&spec.evolution.grid)?);
    let z = scaled_kernel(&base, spec.beta, grid)?;
    let window = spec.window;
    let mut monitor = |s: &EvolutionState, rec: &mut StepRecord| {
        rec.weighted_decay = Some(weighted_decay(s, &c, window).weighted_sup);
        let sweep = sweeping_ratio(s, &z);
        rec.sweep_lambda_plus = Some(sweep.lambda_plus);
        rec.sweep_lambda_minus = Some(sweep.lambda_minus);
    };
    let result = quasiconvergence_experiment(&base, spec.alpha, spec.beta, &spec.initial, &spec.evolution, &mut monitor)?;
    Ok((base, result))
}

#[derive(Debug, Clone, Serialize)]
struct FlowSummary {
    gamma_est: f64,
    match_error: f64,
    gamma_in_bracket: bool,
    converged: bool,
    steps: usize,
    final_time: f64,
    final_residual: f64,
}

fn flow_outputs(spec: &FlowSpec, liouville: bool, out: &mut Output<'_>) -> Result<Vec<CheckOutcome>> {
    let (_, q) = diagnosed_flow(spec)?;
    let recs = &q.trajectory.records;
    let mut csv = Csv::new("t,dt,residual,gamma_est,weighted_decay,sweep_lambda_plus,sweep_lambda_minus,ordering_ok");
    for r in recs {
        csv.row(&[
            r.t.to_string(),
            r.dt.to_string(),
            r.residual.to_string(),
            r.gamma_est.to_string(),
            opt(r.weighted_decay),
            opt(r.sweep_lambda_plus),
            opt(r.sweep_lambda_minus),
            r.ordering_ok.map(|b| b.to_string()).unwrap_or_default(),
        ]);
    }
    out.write("diagnostics.csv", &csv.text)?;
    for (k, s) in q.trajectory.states.iter().enumerate() {
        out.write(&format!("profiles/u_{k:05}.csv"), &s.u.to_csv())?;
    }
    let last = q.trajectory.final_state();
    let summary = FlowSummary {
        gamma_est: q.gamma_est,
        match_error: q.match_error,
        gamma_in_bracket: q.gamma_in_bracket,
        converged: q.trajectory.converged,
        steps: recs.len() - 1,
        final_time: last.t,
        final_residual: last.residual(),
    };
    out.json("result.json", &summary)?;
    let ordering = recs.iter().all(|r| r.ordering_ok != Some(false));
    let mut checks = vec![
        CheckOutcome::new(
            "gamma_in_bracket",
            q.gamma_in_bracket,
            format!("gamma_est = {} in [{}, {}]", q.gamma_est, spec.alpha, spec.beta),
        ),
        CheckOutcome::new("match_error", q.match_error < 1e-3, format!("{:e} < 1e-3", q.match_error)),
        CheckOutcome::new("ordering", ordering, "phi_alpha <= u <= phi_beta at every step"),
    ];
    if liouville {
        let series = |f: fn(&StepRecord) -> Option<f64>| recs.iter().map(|r| f(r).unwrap_or(0.0)).collect::<Vec<_>>();
        for (name, values) in [
            ("weighted_decay_monotone", series(|r| r.weighted_decay)),
            ("lambda_plus_monotone", series(|r| r.sweep_lambda_plus)),
            ("lambda_minus_monotone", series(|r| r.sweep_lambda_minus)),
        ] {
            let m = non_increasing(&values, TRANSIENT_FRACTION, MONOTONE_SLACK);
            checks.push(CheckOutcome::new(
                name,
                m.holds(),
                format!("{} violations of {} steps, worst increase {:e}", m.violations, m.checked, m.worst_increase),
            ));
        }
    }
    Ok(checks)
}

fn constants_outputs(spec: &ConstantsTableSpec, out: &mut Output<'_>) -> Result<Vec<CheckOutcome>> {
    let ConstantsTableSpec { dim_min, dim_max, offsets, p } = spec;
    let mut csv = Csv::new(crate::constants::ConstantsRecord::CSV_HEADER);
    let mut failures = Vec::new();
    let mut rows = 0;
    for dim in *dim_min..=*dim_max {
        let exps: Vec<f64> = match p {
            Some(p) => vec![*p],
            None => {
                let pc = critical_exponents(dim).joseph_lundgren.finite().expect("validated");
                offsets.iter().map(|o| pc + o).collect()
            }
        };
        for p in exps {
            let c = SpectralConstants::for_pair(dim, p)?;
            csv.row(&[c.report().csv_row()]);
            rows += 1;
            if !IdentityCheck::evaluate(&c).passes(1e-10, 1e-9) {
                failures.push(format!("N={dim} p={p}"));
            }
        }
    }
    out.write("constants.csv", &csv.text)?;
    Ok(vec![CheckOutcome::new(
        "identities",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{rows} rows")
        } else {
            format!("failed: {}", failures.join("; "))
        },
    )])
}

fn steady_outputs(spec: &SteadySpec, out: &mut Output<'_>) -> Result<Vec<CheckOutcome>> {
    let c = SpectralConstants::new(spec.params)?;
    let nodes = Arc::new(RadialGrid::stretched(&spec.grid)?);
    let sol = solve_with_center(&c, spec.alpha, nodes)?;
    let fit = match spec.fit_window {
        Some(w) => sol.fit(w)?,
        None => sol.tail().clone(),
    };
    out.write("profile.csv", &sol.phi().to_csv())?;
    out.write("derivative.csv", &sol.dphi().to_csv())?;
    out.json("fit.json", &fit)?;
    let v = sol.phi().values();
    let decreasing = v.windows(2).all(|w| w[1] < w[0]) && v.iter().all(|&x| x > 0.0);
    Ok(vec![
        CheckOutcome::new("positive_decreasing", decreasing, "Phi > 0 and strictly decreasing"),
        CheckOutcome::new("tail_negative", fit.coefficient < 0.0, format!("coefficient = {}", fit.coefficient)),
    ])
}

fn blowdown_outputs(spec: &BlowdownSpec, out: &mut Output<'_>) -> Result<Vec<CheckOutcome>> {
    let c = SpectralConstants::new(spec.params)?;
    let grid = &spec.grid;
    let profile = match &spec.input {
        Some(path) => RadialProfile::from_csv(&fs::read_to_string(path)?, "input")?,
        None => solve_ground_profile(&c, grid)?.phi().clone(),
    };
    let (rows, class) = blowdown_table(&profile, &c, &spec.scales, spec.annulus)?;
    let expected = 2f64.powf(-c.lambda1);
    let mut csv = Csv::new("R,error,ratio,expected_ratio,class");
    for r in &rows {
        csv.row(&[
            r.scale.to_string(),
            r.error.to_string(),
            opt(r.ratio),
            expected.to_string(),
            r.class.to_string(),
        ]);
    }
    out.write("blowdown.csv", &csv.text)?;
    let ratios_ok = rows.iter().filter_map(|r| r.ratio).all(|q| (q / expected - 1.0).abs() <= 0.2);
    Ok(vec![
        CheckOutcome::new("limit_class", class == LimitClass::PlusL, format!("{class}")),
        CheckOutcome::new("rate", ratios_ok, format!("successive ratios within 20% of {expected}")),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowdownRow {
    pub scale: f64,
    pub error: f64,
    /// `error(R) / error(previous R)`.
    pub ratio: Option<f64>,
    pub class: LimitClass,
}

/// Annulus error of `w_R` against `L r^{−m}` for each scale, and the class of the input.
pub fn blowdown_table(
    profile: &RadialProfile,
    c: &SpectralConstants,
    scales: &[f64],
    annulus: (f64, f64),
) -> Result<(Vec<BlowdownRow>, LimitClass)> {
    let target = Arc::new(RadialGrid::uniform(annulus.1, 1500)?);
    let mut rows: Vec<BlowdownRow> = Vec::with_capacity(scales.len());
    for &scale in scales {
        let w = rescale(profile, c, scale, target.clone())?;
        let error = annulus_error(&w, c, annulus.0, annulus.1);
        let ratio = rows.last().map(|prev| error / prev.error);
        rows.push(BlowdownRow {
            scale,
            error,
            ratio,
            class: classify_limit(profile, c),
        });
    }
    Ok((rows, classify_limit(profile, c)))
}

fn interp_outputs(spec: &InterpSpec, out: &mut Output<'_>) -> Result<Vec<CheckOutcome>> {
    let dim = spec.dim;
    let cases = manufactured_family(spec.seed, spec.random_cases);
    let results: Vec<InterpResult> = interp_sweep(dim, &spec.radii, &cases);
    let c = uniform_constant(&results);
    let mut csv = Csv::new("case,R,lhs,f_norm,psi_norm,mixed,scaled,fitted_C");
    for r in &results {
        csv.row(&[
            r.case.clone(),
            r.radius.to_string(),
            r.lhs.to_string(),
            r.f_norm.to_string(),
            r.psi_norm.to_string(),
            r.mixed.to_string(),
            r.scaled.to_string(),
            r.fitted_c.to_string(),
        ]);
    }
    out.write("interp.csv", &csv.text)?;
    #[derive(Serialize)]
    struct Report<'a> {
        dim: u32,
        uniform_c: f64,
        results: &'a [InterpResult],
    }
    out.json(
        "interp.json",
        &Report {
            dim,
            uniform_c: c,
            results: &results,
        },
    )?;
    let all = results.iter().all(|r| r.holds_with(c));
    Ok(vec![CheckOutcome::new("uniform_constant", all && c.is_finite(), format!("C = {c}"))])
}

/// Execute one experiment, writing into `out_dir` (created if needed).
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut out = Output {
        dir: out_dir,
        files: Vec::new(),
    };
    let checks = match &config.experiment {
        Experiment::ConstantsTable(spec) => constants_outputs(spec, &mut out)?,
        Experiment::Steady(spec) => steady_outputs(spec, &mut out)?,
        Experiment::Quasiconvergence(spec) => flow_outputs(spec, false, &mut out)?,
        Experiment::LiouvilleDiagnostics(spec) => flow_outputs(spec, true, &mut out)?,
        Experiment::Blowdown(spec) => blowdown_outputs(spec, &mut out)?,
        Experiment::Interp(spec) => interp_outputs(spec, &mut out)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let mut manifest = RunManifest {
        config: config.clone(),
        version: VERSION.to_string(),
        duration_secs: start.elapsed().as_secs_f64(),
        outputs: out.files.clone(),
        checks,
        passed,
    };
    manifest.outputs.push("manifest.json".into());
    out.json("manifest.json", &manifest)?;
    Ok(manifest)
}

/// Run independent experiments concurrently, each in `root/<name>`.
pub fn run_batch(configs: &[ExperimentConfig], root: &Path) -> Vec<Result<RunManifest>> {
    configs
        .par_iter()
        .map(|cfg| run(cfg, &root.join(&cfg.name)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_paths() {
        let err = ExperimentConfig::from_json(r#"{"experiment":{"kind":"steady","params":{"dim":13,"p":0.5}}}"#).unwrap_err();
        match err {
            Error::ConfigInvalid { path, .. } => assert_eq!(path, "experiment.params.p"),
            other => panic!("unexpected {other}"),
        }
        let err = ExperimentConfig::from_json(r#"{"experiment":{"kind":"steady","params":{"dim":"x","p":3}}}"#).unwrap_err();
        match err {
            Error::ConfigInvalid { path, .. } => assert_eq!(path, "experiment.params.dim"),
            other => panic!("unexpected {other}"),
        }
        assert!(ExperimentConfig::from_json(r#"{"experiment":{"kind":"nope"}}"#).is_err());
    }

    #[test]
    fn subcritical_steady_is_rejected() {
        let err = ExperimentConfig::from_json(r#"{"experiment":{"kind":"steady","params":{"dim":13,"p":2.0}}}"#).unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid { .. } | Error::DiscriminantNegative { .. }), "{err}");
    }

    #[test]
    fn flow_spec_parses() {
        let text = r#"{"name":"qc","experiment":{"kind":"quasiconvergence",
            "evolution":{"params":{"dim":13,"p":3.0},"t_max":1e6,"convergence_eps":1e-6},
            "alpha":1.0,"beta":2.0,"initial":{"preset":"blend","alpha":1.0,"beta":2.0,"weight":0.5}}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.name, "qc");
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
