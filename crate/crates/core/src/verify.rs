//! The property-based verification suite.
//!
//! Each criterion returns a [`CriterionReport`] of measured values against
//! thresholds. The two long evolution runs are shared between the
//! quasiconvergence and Liouville criteria through a process-wide cache.

use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blowdown::{classify_limit, sphere_identity, LimitClass, SphereProfile};
use crate::constants::{critical_exponents, IdentityCheck, SpectralConstants};
use crate::diagnostics::{interp_sweep, manufactured_family, non_increasing, uniform_constant};
use crate::evolve::{evolve_until, EvolutionConfig, Evolver, InitialData, QuasiconvergenceResult, Scheme, StepRecord};
use crate::grid::{GridSpec, RadialGrid, RadialProfile};
use crate::linearize::{kernel_by_ode, kernel_eval, kernel_from_steady, singular_kernel, singular_kernel_residual, SingularWhich};
use crate::runner::{blowdown_table, diagnosed_flow, FlowSpec, MONOTONE_SLACK, TRANSIENT_FRACTION};
use crate::steady::{scale_family, scale_family_eval, solve_ground_profile, SteadyStateSolution};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, label: impl Into<String>, measured: f64, threshold: impl Into<String>, pass: bool) {
        self.checks.push(Check {
            label: label.into(),
            measured,
            threshold: threshold.into(),
            pass,
        });
    }

    fn below(&mut self, label: impl Into<String>, measured: f64, bound: f64) {
        self.push(label, measured, format!("< {bound:e}"), measured < bound);
    }

    fn flag(&mut self, label: impl Into<String>, ok: bool) {
        self.push(label, if ok { 1.0 } else { 0.0 }, "true", ok);
    }

    fn error(&mut self, label: impl Into<String>, err: impl fmt::Display) {
        self.push(format!("{}: {err}", label.into()), f64::NAN, "no error", false);
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "[{status}] criterion {:>2} {:<28} {:.2}s (budget {}s)",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )?;
        for c in &self.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            writeln!(f, "    {mark} {:<58} {:>14.6e}  {}", c.label, c.measured, c.threshold)?;
        }
        Ok(())
    }
}

/// Names used by `--filter`; a criterion runs when any of its names contains the filter.
pub const CRITERIA: [(u32, &str, &str); 10] = [
    (1, "exponent-identities", "constants"),
    (2, "steady-solver", "steady"),
    (3, "kernel-cross-validation", "linearize"),
    (4, "singular-kernel-residual", "linearize"),
    (5, "evolution-fixed-points", "evolve"),
    (6, "quasiconvergence", "evolve"),
    (7, "liouville-diagnostics", "diagnostics"),
    (8, "interpolation-inequality", "diagnostics"),
    (9, "blowdown-rate", "blowdown"),
    (10, "sphere-identity", "blowdown"),
];

fn report(id: u32, budget_secs: u64) -> CriterionReport {
    CriterionReport {
        id,
        name: CRITERIA[id as usize - 1].1,
        checks: Vec::new(),
        elapsed: Duration::ZERO,
        budget: Duration::from_secs(budget_secs),
    }
}

fn timed(mut rep: CriterionReport, body: impl FnOnce(&mut CriterionReport)) -> CriterionReport {
    let start = Instant::now();
    body(&mut rep);
    rep.elapsed = start.elapsed();
    rep
}

fn pc(dim: u32) -> f64 {
    critical_exponents(dim).joseph_lundgren.finite().expect("finite for N >= 11")
}

fn c13() -> SpectralConstants {
    SpectralConstants::for_pair(13, 3.0).expect("valid pair")
}

fn ground13() -> &'static std::result::Result<SteadyStateSolution, String> {
    static CELL: OnceLock<std::result::Result<SteadyStateSolution, String>> = OnceLock::new();
    CELL.get_or_init(|| solve_ground_profile(&c13(), &GridSpec::default()).map_err(|e| e.to_string()))
}

/// Exponent identities for `N = 11..100`. `perturbation` scales `λ₁` by
/// `1 + perturbation` before checking (negative control).
pub fn exponent_identities(perturbation: f64) -> CriterionReport {
    timed(report(1, 1), |rep| {
        let (mut forms, mut sum, mut prod, mut ind, mut min_l1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
        let mut failures = 0;
        for dim in 11..=100 {
            let base = pc(dim);
            for p in [base, base * 1.01, base * 1.1, base * 1.5, base * 3.0] {
                let mut c = match SpectralConstants::for_pair(dim, p) {
                    Ok(c) => c,
                    Err(_) => {
                        failures += 1;
                        continue;
                    }
                };
                c.lambda1 *= 1.0 + perturbation;
                let id = IdentityCheck::evaluate(&c);
                forms = forms.max(id.pc_forms_gap);
                sum = sum.max(id.vieta_sum_gap);
                prod = prod.max(id.vieta_product_gap);
                ind = ind.max(id.indicial_first).max(id.indicial_second);
                min_l1 = min_l1.min(id.lambda1);
            }
        }
        rep.push("constants evaluated for every pair", failures as f64, "0", failures == 0);
        rep.below("p_c closed forms gap", forms, 1e-10);
        rep.below("Vieta sum gap", sum, 1e-10);
        rep.below("Vieta product gap", prod, 1e-10);
        rep.below("indicial residual", ind, 1e-9);
        rep.push("min lambda1", min_l1, "> 2", min_l1 > 2.0);
    })
}

pub fn steady_solver() -> CriterionReport {
    timed(report(2, 10), |rep| {
        let sol = match solve_ground_profile(&c13(), &GridSpec::default()) {
            Ok(s) => s,
            Err(e) => return rep.error("solve", e),
        };
        let v = sol.phi().values();
        rep.flag("Phi > 0 on [0, 1e4]", v.iter().all(|&x| x > 0.0));
        rep.flag("Phi strictly decreasing", v.windows(2).all(|w| w[1] < w[0]));
        let l = 10f64.sqrt();
        let near = (sol.eval(50.0).0 * 50.0 - l).abs() / l;
        rep.below("|Phi(50)*50 - sqrt10|/sqrt10", near, 1e-2);
        rep.push("fitted a", sol.tail().coefficient, "< 0", sol.tail().coefficient < 0.0);
        match (sol.fit((5.0, 20.0)), sol.fit((10.0, 40.0))) {
            (Ok(a), Ok(b)) => {
                let gap = (a.coefficient - b.coefficient).abs() / b.coefficient.abs();
                rep.below("fit [5,20] vs [10,40] relative gap", gap, 0.05);
            }
            (Err(e), _) | (_, Err(e)) => rep.error("window fit", e),
        }
    })
}

pub fn kernel_cross_validation() -> CriterionReport {
    timed(report(3, 10), |rep| {
        let sol = match ground13() {
            Ok(s) => s,
            Err(e) => return rep.error("solve", e),
        };
        let (z, zo) = match (kernel_from_steady(sol), kernel_by_ode(sol.constants(), sol)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return rep.error("kernel", e),
        };
        let nodes = sol.grid().nodes();
        let inner = nodes.iter().take_while(|&&r| r <= 5e3).count();
        let sup = zo.values()[..inner].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = z.values()[..inner]
            .iter()
            .zip(&zo.values()[..inner])
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        rep.below("sup |Z_steady - Z_ode| / sup |Z| on [0,5e3]", diff / sup, 1e-3);
        rep.flag("Z > 0 everywhere", z.values().iter().all(|&v| v > 0.0));
        let c = sol.constants();
        let target = c.lambda1 / c.m * sol.tail().coefficient.abs();
        let at40 = kernel_eval(sol, 40.0) * 40f64.powf(c.kernel_decay()) / target;
        rep.push("Z(40)*40^5 / 4|a|", at40, "within 5% of 1", (at40 - 1.0).abs() < 0.05);
        let h = 1e-4;
        let fd = nodes
            .iter()
            .zip(z.values())
            .map(|(&r, &zv)| {
                let d = (scale_family_eval(sol, 1.0 + h, r).0 - scale_family_eval(sol, 1.0 - h, r).0) / (2.0 * h);
                (d - zv).abs()
            })
            .fold(0.0f64, f64::max);
        rep.below("sup |dphi/dalpha (h=1e-4) - Z|", fd, 1e-6);
    })
}

pub fn singular_kernel_residuals() -> CriterionReport {
    timed(report(4, 5), |rep| {
        for (dim, p) in [(13, 3.0), (20, 2.0), (11, pc(11))] {
            let label = format!("relative residual on [1,100], N={dim} p={p:.5}");
            let c = match SpectralConstants::for_pair(dim, p) {
                Ok(c) => c,
                Err(e) => return rep.error(label, e),
            };
            let res = RadialGrid::stretched(&GridSpec::with_r_max(400.0))
                .and_then(|g| singular_kernel(&c, Arc::new(g), SingularWhich::First))
                .map(|k| singular_kernel_residual(&c, &k, 1.0, 100.0));
            match res {
                Ok(r) => rep.below(label, r, 1e-4),
                Err(e) => rep.error(label, e),
            }
        }
    })
}

pub fn evolution_fixed_points() -> CriterionReport {
    timed(report(5, 60), |rep| {
        let sol = match ground13() {
            Ok(s) => s,
            Err(e) => return rep.error("solve", e),
        };
        let c = *sol.constants();
        let grid = sol.grid().clone();
        for alpha in [0.5, 1.0, 2.0] {
            let run = || -> crate::Result<(f64, f64)> {
                let u0 = scale_family(sol, alpha, grid.clone())?;
                let boundary = *u0.values().last().expect("nonempty grid");
                let ev = Evolver::new(&c, grid.clone(), Scheme::ImplicitEuler, boundary);
                let mut cfg = EvolutionConfig::new(c.params, 10.0);
                cfg.dt_control = 1e-6;
                let adaptive = evolve_until(&cfg, &ev, u0.clone())?.final_state().u.max_abs_diff(&u0);
                cfg.adaptive = false;
                let mut finals: Vec<RadialProfile> = Vec::new();
                for dt in [0.1, 0.05, 0.025] {
                    cfg.dt = dt;
                    finals.push(evolve_until(&cfg, &ev, u0.clone())?.final_state().u.clone());
                }
                let coarse = finals[0].max_abs_diff(&finals[1]);
                let fine = finals[1].max_abs_diff(&finals[2]);
                Ok((adaptive, fine / coarse))
            };
            match run() {
                Ok((dev, ratio)) => {
                    rep.below(format!("alpha={alpha}: sup |u(10) - phi_alpha|"), dev, 1e-4);
                    rep.push(
                        format!("alpha={alpha}: dt-halving error ratio"),
                        ratio,
                        "0.5 within 30%",
                        (ratio / 0.5 - 1.0).abs() <= 0.3,
                    );
                }
                Err(e) => rep.error(format!("alpha={alpha}"), e),
            }
        }
    })
}

/// One cached quasiconvergence run.
pub struct FlowRun {
    pub label: String,
    pub spec: FlowSpec,
    pub result: std::result::Result<QuasiconvergenceResult, String>,
}

/// The blend of `φ₁` and `φ₂` at `(13, 3)` and at `(11, p_c)`.
pub fn flow_specs() -> Vec<(String, FlowSpec)> {
    [(13, 3.0, "N=13 p=3"), (11, pc(11), "N=11 p=pc")]
        .into_iter()
        .map(|(dim, p, label)| {
            let params = crate::constants::ProblemParams { dim, p };
            let mut evolution = EvolutionConfig::new(params, 1e7);
            evolution.convergence_eps = Some(1e-6);
            let spec = FlowSpec {
                evolution,
                alpha: 1.0,
                beta: 2.0,
                initial: InitialData::Blend {
                    alpha: 1.0,
                    beta: 2.0,
                    weight: 0.5,
                },
                window: (20.0, 200.0),
            };
            (label.to_string(), spec)
        })
        .collect()
}

pub fn flow_runs() -> &'static [FlowRun] {
    static CELL: OnceLock<Vec<FlowRun>> = OnceLock::new();
    CELL.get_or_init(|| {
        use rayon::prelude::*;
        flow_specs()
            .into_par_iter()
            .map(|(label, spec)| {
                let result = diagnosed_flow(&spec).map(|(_, q)| q).map_err(|e| e.to_string());
                FlowRun { label, spec, result }
            })
            .collect()
    })
}

pub fn quasiconvergence() -> CriterionReport {
    timed(report(6, 300), |rep| {
        for run in flow_runs() {
            let q = match &run.result {
                Ok(q) => q,
                Err(e) => {
                    rep.error(&run.label, e);
                    continue;
                }
            };
            let last = q.trajectory.final_state();
            rep.flag(format!("{}: converged", run.label), q.trajectory.converged);
            rep.below(format!("{}: steady residual", run.label), last.residual(), 1e-6);
            rep.push(
                format!("{}: gamma_est", run.label),
                q.gamma_est,
                format!("in [{}, {}]", run.spec.alpha, run.spec.beta),
                q.gamma_in_bracket,
            );
            rep.below(format!("{}: relative mismatch on [0,5e3]", run.label), q.match_error, 1e-3);
            let ordering = q.trajectory.records.iter().all(|r| r.ordering_ok != Some(false));
            rep.flag(format!("{}: ordering at every step", run.label), ordering);
        }
    })
}

pub fn liouville_diagnostics() -> CriterionReport {
    timed(report(7, 300), |rep| {
        type Field = fn(&StepRecord) -> Option<f64>;
        let fields: [(&str, Field); 3] = [
            ("weighted decay on [20,200]", |r| r.weighted_decay),
            ("lambda_plus", |r| r.sweep_lambda_plus),
            ("lambda_minus", |r| r.sweep_lambda_minus),
        ];
        for run in flow_runs() {
            let q = match &run.result {
                Ok(q) => q,
                Err(e) => {
                    rep.error(&run.label, e);
                    continue;
                }
            };
            for (name, field) in fields {
                let values: Vec<f64> = q.trajectory.records.iter().map(|r| field(r).unwrap_or(f64::NAN)).collect();
                let m = non_increasing(&values, TRANSIENT_FRACTION, MONOTONE_SLACK);
                rep.push(
                    format!("{}: {name} worst step increase", run.label),
                    m.worst_increase,
                    format!("<= {MONOTONE_SLACK:e} ({} violations)", m.violations),
                    m.holds(),
                );
            }
        }
    })
}

pub fn interpolation_inequality() -> CriterionReport {
    timed(report(8, 30), |rep| {
        let cases = manufactured_family(7, 24);
        let results = interp_sweep(13, &[1.0, 2.0, 4.0, 8.0], &cases);
        let c = uniform_constant(&results);
        let covered = results.iter().filter(|r| r.holds_with(c)).count();
        rep.push("fitted C(N=13)", c, "finite", c.is_finite() && c > 0.0);
        rep.push(
            "cases satisfied with one C",
            covered as f64,
            format!("= {}", results.len()),
            covered == results.len(),
        );
        let linear = results
            .iter()
            .filter(|r| r.case == "linear")
            .map(|r| (r.fitted_c - 1.0).abs())
            .fold(0.0f64, f64::max);
        rep.below("psi = x1: |fitted_C - 1|", linear, 1e-6);
    })
}

pub fn blowdown_rate() -> CriterionReport {
    timed(report(9, 10), |rep| {
        let sol = match ground13() {
            Ok(s) => s,
            Err(e) => return rep.error("solve", e),
        };
        let c = sol.constants();
        let expected = 2f64.powf(-c.lambda1);
        for alpha in [0.5, 1.0, 2.0] {
            let profile = match scale_family(sol, alpha, sol.grid().clone()) {
                Ok(p) => p,
                Err(e) => {
                    rep.error(format!("alpha={alpha}"), e);
                    continue;
                }
            };
            match blowdown_table(&profile, c, &[2.0, 4.0, 8.0, 16.0], (0.5, 2.0)) {
                Ok((rows, class)) => {
                    for w in rows.windows(2) {
                        rep.push(
                            format!("alpha={alpha}: error ratio R={}->{}", w[0].scale, w[1].scale),
                            w[1].error / w[0].error,
                            format!("within 20% of {expected}"),
                            w[1].error < w[0].error && ((w[1].error / w[0].error) / expected - 1.0).abs() <= 0.2,
                        );
                    }
                    rep.push(format!("alpha={alpha}: class {class}"), 0.0, "plus_L", class == LimitClass::PlusL);
                }
                Err(e) => rep.error(format!("alpha={alpha}"), e),
            }
        }
        for (label, sign, want) in [("-Phi", -1.0, LimitClass::MinusL), ("zero", 0.0, LimitClass::Zero)] {
            match sol.phi().map(label, |_, v| sign * v) {
                Ok(p) => {
                    let class = classify_limit(&p, c);
                    rep.push(format!("{label}: class {class}"), 0.0, want.to_string(), class == want);
                }
                Err(e) => rep.error(label, e),
            }
        }
    })
}

pub fn sphere_identity_signs() -> CriterionReport {
    timed(report(10, 5), |rep| {
        let c = c13();
        for (label, v) in [("+L", c.amplitude), ("-L", -c.amplitude), ("0", 0.0)] {
            match sphere_identity(&SphereProfile::constant(v), &c) {
                Ok(x) => rep.below(format!("constant {label}: |value|"), x.abs(), 1e-10),
                Err(e) => rep.error(label, e),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut min = f64::INFINITY;
        let mut errors = 0;
        for _ in 0..100 {
            let f = SphereProfile::random(&mut rng, 5, c.amplitude);
            match sphere_identity(&f, &c) {
                Ok(x) => min = min.min(x),
                Err(_) => errors += 1,
            }
        }
        rep.push("random profiles rejected", errors as f64, "0", errors == 0);
        rep.push("min value over 100 random profiles", min, "> 0", min > 0.0);
    })
}

/// Run the criteria whose name or module matches `filter` (all when `None`).
pub fn verify_suite(filter: Option<&str>) -> Vec<CriterionReport> {
    let runners: [fn() -> CriterionReport; 10] = [
        || exponent_identities(0.0),
        steady_solver,
        kernel_cross_validation,
        singular_kernel_residuals,
        evolution_fixed_points,
        quasiconvergence,
        liouville_diagnostics,
        interpolation_inequality,
        blowdown_rate,
        sphere_identity_signs,
    ];
    CRITERIA
        .iter()
        .zip(runners)
        .filter(|((id, name, module), _)| match filter {
            None => true,
            Some(f) => name.contains(f) || module.contains(f) || id.to_string() == f,
        })
        .map(|(_, run)| run())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass_and_negative_control_fails() {
        assert!(exponent_identities(0.0).passed());
        let bad = exponent_identities(1e-3);
        assert!(!bad.passed());
        assert!(bad.checks.iter().any(|c| c.label == "indicial residual" && !c.pass));
    }

    #[test]
    fn filter_selects_by_module() {
        let reps = verify_suite(Some("constants"));
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].id, 1);
    }
}
