//! Implicit time stepping of the radial equation
//! `u_t = u_rr + ((N−1)/r) u_r + |u|^{p−1} u`.
//!
//! Symmetry at the origin is built into the stencils; the last node carries a
//! fixed Dirichlet value. Each step solves its nonlinear system by Newton with
//! a banded Jacobian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::constants::{ProblemParams, SpectralConstants};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RadialGrid, RadialProfile};
use crate::steady::{scale_family, SteadyStateSolution};
use crate::stencil::RadialLaplacian;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 12;
const MAX_HALVINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImplicitEuler,
    /// Trapezoidal rule (Crank–Nicolson in time).
    CrankNicolson,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }
}

/// Dirichlet data at `R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FarField {
    /// Keep the initial value at `R_max`.
    #[default]
    Hold,
    /// Pin to `φ_α(R_max)`.
    PinToProfile { alpha: f64 },
    /// Pin to `L R^{−m} + a R^{−m−λ₁}`.
    PinToAsymptotic { a: f64 },
}

fn default_dt() -> f64 {
    1e-4
}
fn default_dt_control() -> f64 {
    1e-6
}
fn default_dt_max() -> f64 {
    10.0
}
fn default_record_every() -> usize {
    50
}
fn default_max_steps() -> usize {
    2_000_000
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub params: ProblemParams,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_dt_control")]
    pub dt_control: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    /// Fixed step size when false.
    #[serde(default = "default_true")]
    pub adaptive: bool,
    pub t_max: f64,
    #[serde(default)]
    pub far_field: FarField,
    /// Stop once `‖Δu + |u|^{p−1}u‖_∞` drops below this (disabled if absent).
    #[serde(default)]
    pub convergence_eps: Option<f64>,
    /// Keep every n-th state in the trajectory (the final state is always kept).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

impl EvolutionConfig {
    pub fn new(params: ProblemParams, t_max: f64) -> Self {
        EvolutionConfig {
            params,
            grid: GridSpec::default(),
            scheme: Scheme::default(),
            dt: default_dt(),
            dt_control: default_dt_control(),
            dt_max: default_dt_max(),
            adaptive: true,
            t_max,
            far_field: FarField::default(),
            convergence_eps: None,
            record_every: default_record_every(),
            max_steps: default_max_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.validate()?;
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("dt_control", self.dt_control)?;
        positive("dt_max", self.dt_max)?;
        positive("t_max", self.t_max)?;
        if let Some(eps) = self.convergence_eps {
            positive("convergence_eps", eps)?;
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Tolerance used for ordering checks.
    pub fn ordering_tolerance(&self) -> f64 {
        10.0 * self.dt_control
    }
}

/// Initial data presets, built on a steady solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Steady {
        alpha: f64,
    },
    /// `(1 − weight) φ_α + weight φ_β`.
    Blend {
        alpha: f64,
        beta: f64,
        weight: f64,
    },
    /// `φ_α` plus a compactly supported bump, optionally capped by `φ_cap`.
    Bump {
        alpha: f64,
        center: f64,
        width: f64,
        height: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
}

/// `(1 − s²)³` on `|s| < 1`, zero outside.
pub fn bump_shape(r: f64, center: f64, width: f64) -> f64 {
    let s = (r - center) / width;
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(3)
    } else {
        0.0
    }
}

impl InitialData {
    pub fn build(&self, base: &SteadyStateSolution, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
        match *self {
            InitialData::Steady { alpha } => scale_family(base, alpha, grid),
            InitialData::Blend { alpha, beta, weight } => {
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::invalid("weight", format!("must lie in [0, 1], got {weight}")));
                }
                let a = scale_family(base, alpha, grid.clone())?;
                let b = scale_family(base, beta, grid)?;
                let values = a.values().iter().zip(b.values()).map(|(x, y)| (1.0 - weight) * x + weight * y).collect();
                RadialProfile::new(a.grid().clone(), values, format!("blend({alpha},{beta},{weight})"))
            }
            InitialData::Bump {
                alpha,
                center,
                width,
                height,
                cap,
            } => {
                if !(width > 0.0) {
                    return Err(Error::invalid("width", format!("must be positive, got {width}")));
                }
                let a = scale_family(base, alpha, grid.clone())?;
                let capped = cap.map(|beta| scale_family(base, beta, grid)).transpose()?;
                let values = a
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| {
                        let v = a.values()[i] + height * bump_shape(r, center, width);
                        match &capped {
                            Some(c) => v.min(c.values()[i]),
                            None => v,
                        }
                    })
                    .collect();
                RadialProfile::new(a.grid().clone(), values, "bump")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub u: RadialProfile,
    /// `Δ_h u + |u|^{p−1}u` at the interior nodes, zero at the Dirichlet node.
    pub u_t: RadialProfile,
}

impl EvolutionState {
    pub fn residual(&self) -> f64 {
        self.u_t.sup_norm()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub residual: f64,
    pub gamma_est: f64,
    pub newton_iters: usize,
    #[serde(default)]
    pub ordering_ok: Option<bool>,
    #[serde(default)]
    pub weighted_decay: Option<f64>,
    #[serde(default)]
    pub sweep_lambda_plus: Option<f64>,
    #[serde(default)]
    pub sweep_lambda_minus: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<EvolutionState>,
    pub records: Vec<StepRecord>,
    pub converged: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &EvolutionState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Callback run after every accepted step; may fill diagnostic fields.
pub type Monitor<'a> = dyn FnMut(&EvolutionState, &mut StepRecord) + 'a;

/// Outcome of one accepted implicit step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: EvolutionState,
    pub dt: f64,
    pub newton_iters: usize,
}

/// Discrete right-hand side and implicit solver on a fixed grid.
#[derive(Debug, Clone)]
pub struct Evolver {
    grid: Arc<RadialGrid>,
    lap: RadialLaplacian,
    p: f64,
    scheme: Scheme,
    boundary: f64,
    blowup_threshold: f64,
}

impl Evolver {
    pub fn new(c: &SpectralConstants, grid: Arc<RadialGrid>, scheme: Scheme, boundary: f64) -> Self {
        let lap = RadialLaplacian::new(&grid, c.dim());
        let blowup_threshold = 10.0 * c.singular_value(grid.nodes()[1]);
        Evolver {
            grid,
            lap,
            p: c.p(),
            scheme,
            boundary,
            blowup_threshold,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    /// `F(u) = Δ_h u + |u|^{p−1}u`, zero at the last node.
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut f: Vec<f64> = (0..n - 1)
            .map(|i| self.lap.apply_at(i, u) + u[i].abs().powf(self.p - 1.0) * u[i])
            .collect();
        f.push(0.0);
        f
    }

    pub fn state(&self, t: f64, u: RadialProfile) -> Result<EvolutionState> {
        let f = self.rhs(u.values());
        let u_t = RadialProfile::new(self.grid.clone(), f, "u_t")?;
        Ok(EvolutionState { t, u, u_t })
    }

    fn jacobian(&self, v: &[f64], scale: f64, jac: &mut BandedMatrix) {
        let n = v.len();
        jac.clear();
        for i in 0..n - 1 {
            let row = &self.lap.rows()[i];
            for (k, &w) in row.weights.iter().enumerate() {
                if w != 0.0 {
                    jac.add(i, row.start + k, -scale * w);
                }
            }
            jac.add(i, i, 1.0 - scale * self.p * v[i].abs().powf(self.p - 1.0));
        }
        jac.add(n - 1, n - 1, 1.0);
    }

    /// Newton solve of `v − θ dt F(v) = rhs`; returns the iteration count.
    fn newton(&self, v: &mut [f64], rhs: &[f64], scale: f64) -> Option<usize> {
        let n = v.len();
        let mut jac = BandedMatrix::zeros(n, 3, 2);
        for iter in 1..=NEWTON_MAX_ITERS {
            let f = self.rhs(v);
            let mut g: Vec<f64> = (0..n).map(|i| -(v[i] - scale * f[i] - rhs[i])).collect();
            g[n - 1] = self.boundary - v[n - 1];
            let res = g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if !res.is_finite() {
                return None;
            }
            if res < NEWTON_TOL && iter > 1 {
                return Some(iter - 1);
            }
            self.jacobian(v, scale, &mut jac);
            if jac.solve_in_place(&mut g).is_err() {
                return None;
            }
            let mut upd = 0.0f64;
            let mut size = 0.0f64;
            for i in 0..n {
                v[i] += g[i];
                upd = upd.max(g[i].abs());
                size = size.max(v[i].abs());
            }
            if !upd.is_finite() {
                return None;
            }
            // at the rounding floor the residual can stall just above the tolerance
            if res < 1e3 * NEWTON_TOL && upd <= 1e-14 * size.max(1.0) {
                return Some(iter);
            }
            if res < NEWTON_TOL && upd <= 1e-12 {
                return Some(iter);
            }
        }
        None
    }

    /// One implicit step of size at most `dt`; halves `dt` on Newton failure.
    pub fn step(&self, state: &EvolutionState, dt: f64) -> Result<StepOutcome> {
        let theta = self.scheme.theta();
        let u = state.u.values();
        let f = state.u_t.values();
        let mut dt = dt;
        for _ in 0..=MAX_HALVINGS {
            let rhs: Vec<f64> = (0..u.len()).map(|i| u[i] + (1.0 - theta) * dt * f[i]).collect();
            let mut v = u.to_vec();
            let n = v.len();
            v[n - 1] = self.boundary;
            if let Some(iters) = self.newton(&mut v, &rhs, theta * dt) {
                let max_abs = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                if max_abs > self.blowup_threshold {
                    return Err(Error::BlowupDetected {
                        t: state.t + dt,
                        max_abs,
                        threshold: self.blowup_threshold,
                    });
                }
                let next = self.state(state.t + dt, RadialProfile::new(self.grid.clone(), v, state.u.label())?)?;
                return Ok(StepOutcome {
                    state: next,
                    dt,
                    newton_iters: iters,
                });
            }
            dt *= 0.5;
        }
        Err(Error::NewtonDiverged {
            t: state.t,
            attempts: MAX_HALVINGS + 1,
        })
    }
}

/// Resolve the Dirichlet value for `config.far_field`.
pub fn far_field_value(
    config: &EvolutionConfig,
    c: &SpectralConstants,
    base: &SteadyStateSolution,
    u0: &RadialProfile,
) -> f64 {
    let r = u0.grid().r_max();
    match config.far_field {
        FarField::Hold => *u0.values().last().expect("non-empty profile"),
        FarField::PinToProfile { alpha } => crate::steady::scale_family_eval(base, alpha, r).0,
        FarField::PinToAsymptotic { a } => c.singular_value(r) + a * r.powf(-c.kernel_decay()),
    }
}

/// Ordered bracket `lower ≤ u ≤ upper` to flag at every step.
#[derive(Debug, Clone)]
pub struct Bracket {
    pub lower: RadialProfile,
    pub upper: RadialProfile,
    pub tol: f64,
}

impl Bracket {
    pub fn holds(&self, u: &RadialProfile) -> bool {
        u.values()
            .iter()
            .zip(self.lower.values().iter().zip(self.upper.values()))
            .all(|(v, (lo, hi))| *v >= lo - self.tol && *v <= hi + self.tol)
    }
}

/// Run until `t_max` or until the steady residual drops below `convergence_eps`.
pub fn evolve_with_monitor(
    config: &EvolutionConfig,
    evolver: &Evolver,
    u0: RadialProfile,
    bracket: Option<&Bracket>,
    monitor: &mut Monitor<'_>,
) -> Result<Trajectory> {
    config.validate()?;
    let mut state = evolver.state(0.0, u0)?;
    let mut records = Vec::new();
    let mut states = vec![state.clone()];
    let record = |step: usize, s: &EvolutionState, dt: f64, iters: usize, monitor: &mut Monitor<'_>| {
        let mut rec = StepRecord {
            step,
            t: s.t,
            dt,
            residual: s.residual(),
            gamma_est: s.u.values()[0],
            newton_iters: iters,
            ordering_ok: bracket.map(|b| b.holds(&s.u)),
            ..StepRecord::default()
        };
        monitor(s, &mut rec);
        rec
    };
    records.push(record(0, &state, 0.0, 0, monitor));
    let done = |s: &EvolutionState| config.convergence_eps.is_some_and(|eps| s.residual() < eps);
    if done(&state) {
        return Ok(Trajectory {
            states,
            records,
            converged: true,
        });
    }
    let mut dt = config.dt.min(config.t_max);
    let mut step = 0usize;
    let mut kept_last = true;
    while state.t < config.t_max * (1.0 - 1e-14) {
        if step >= config.max_steps {
            break;
        }
        let dt_try = dt.min(config.t_max - state.t);
        let out = evolver.step(&state, dt_try)?;
        if config.adaptive {
            let err = 0.5
                * out.dt
                * out
                    .state
                    .u_t
                    .values()
                    .iter()
                    .zip(state.u_t.values())
                    .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            if err > config.dt_control {
                dt = 0.5 * out.dt;
                if dt < 1e-14 * config.t_max.max(1.0) {
                    return Err(Error::NotConverged {
                        t: state.t,
                        residual: state.residual(),
                        eps: config.convergence_eps.unwrap_or(0.0),
                    });
                }
                continue;
            }
            dt = if err < 0.25 * config.dt_control {
                (2.0 * out.dt).min(config.dt_max)
            } else {
                out.dt.max(dt_try.min(dt))
            };
        } else {
            dt = config.dt;
        }
        step += 1;
        state = out.state;
        records.push(record(step, &state, out.dt, out.newton_iters, monitor));
        kept_last = step % config.record_every == 0;
        if kept_last {
            states.push(state.clone());
        }
        if done(&state) {
            if !kept_last {
                states.push(state.clone());
            }
            return Ok(Trajectory {
                states,
                records,
                converged: true,
            });
        }
    }
    if !kept_last {
        states.push(state);
    }
    Ok(Trajectory {
        states,
        records,
        converged: false,
    })
}

/// Run without diagnostics.
pub fn evolve_until(config: &EvolutionConfig, evolver: &Evolver, u0: RadialProfile) -> Result<Trajectory> {
    evolve_with_monitor(config, evolver, u0, None, &mut |_, _| {})
}

/// Per recorded state: `lower − tol ≤ u ≤ upper + tol`.
pub fn comparison_check(traj: &Trajectory, lower: &RadialProfile, upper: &RadialProfile, tol: f64) -> Vec<bool> {
    let bracket = Bracket {
        lower: lower.clone(),
        upper: upper.clone(),
        tol,
    };
    traj.states.iter().map(|s| bracket.holds(&s.u)).collect()
}

#[derive(Debug, Clone)]
pub struct QuasiconvergenceResult {
    pub gamma_est: f64,
    pub match_error: f64,
    pub gamma_in_bracket: bool,
    pub trajectory: Trajectory,
}

/// Evolve `u0` between `φ_α` and `φ_β` until the steady residual is below
/// `convergence_eps`, then identify the limit `φ_γ` through `γ = u(0, T)`.
pub fn quasiconvergence_experiment(
    base: &SteadyStateSolution,
    alpha: f64,
    beta: f64,
    u0: &InitialData,
    config: &EvolutionConfig,
    monitor: &mut Monitor<'_>,
) -> Result<QuasiconvergenceResult> {
    if !(alpha > 0.0 && alpha < beta && beta.is_finite()) {
        return Err(Error::invalid("alpha", format!("need 0 < alpha < beta < inf, got ({alpha}, {beta})")));
    }
    let eps = config
        .convergence_eps
        .ok_or_else(|| Error::invalid("convergence_eps", "required for a quasiconvergence run"))?;
    let c = base.constants();
    let grid = Arc::new(RadialGrid::stretched(&config.grid)?);
    let start = u0.build(base, grid.clone())?;
    let lower = scale_family(base, alpha, grid.clone())?;
    let upper = scale_family(base, beta, grid.clone())?;
    let tol = config.ordering_tolerance();
    let bracket = Bracket { lower, upper, tol };
    if !bracket.holds(&start) {
        return Err(Error::invalid("u0", "initial data must lie between phi_alpha and phi_beta"));
    }
    let boundary = far_field_value(config, c, base, &start);
    let evolver = Evolver::new(c, grid.clone(), config.scheme, boundary);
    let trajectory = evolve_with_monitor(config, &evolver, start, Some(&bracket), monitor)?;
    let last = trajectory.final_state();
    if !trajectory.converged {
        return Err(Error::NotConverged {
            t: last.t,
            residual: last.residual(),
            eps,
        });
    }
    let gamma_est = last.u.values()[0];
    let limit = scale_family(base, gamma_est, grid.clone())?;
    let half = 0.5 * grid.r_max();
    let match_error = last
        .u
        .nodes()
        .iter()
        .zip(last.u.values().iter().zip(limit.values()))
        .filter(|(r, _)| **r <= half)
        .map(|(_, (u, l))| ((u - l) / l).abs())
        .fold(0.0, f64::max);
    Ok(QuasiconvergenceResult {
        gamma_est,
        match_error,
        gamma_in_bracket: gamma_est >= alpha - tol && gamma_est <= beta + tol,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::solve_ground_profile;
    use std::sync::OnceLock;

    fn base() -> &'static SteadyStateSolution {
        static S: OnceLock<SteadyStateSolution> = OnceLock::new();
        S.get_or_init(|| {
            let c = SpectralConstants::for_pair(13, 3.0).unwrap();
            solve_ground_profile(&c, &GridSpec::with_r_max(1000.0)).unwrap()
        })
    }

    fn config(t_max: f64) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::new(ProblemParams::new(13, 3.0).unwrap(), t_max);
        cfg.grid = GridSpec::with_r_max(1000.0);
        cfg
    }

    #[test]
    fn steady_state_is_nearly_fixed() {
        let sol = base();
        let c = sol.constants();
        let u0 = sol.phi().clone();
        let ev = Evolver::new(c, sol.grid().clone(), Scheme::ImplicitEuler, *u0.values().last().unwrap());
        let s0 = ev.state(0.0, u0.clone()).unwrap();
        assert!(s0.residual() < 1e-6, "truncation residual {}", s0.residual());
        let s1 = ev.step(&s0, 0.01).unwrap().state;
        assert!(s1.u.max_abs_diff(&u0) < 1e-7);
    }

    #[test]
    fn linear_regime_matches_linearized_step() {
        let sol = base();
        let c = sol.constants();
        let grid = sol.grid().clone();
        let phi = sol.phi().values();
        let n = phi.len();
        let ev = Evolver::new(c, grid.clone(), Scheme::ImplicitEuler, phi[n - 1]);
        let dt = 0.01;
        let eps = 1e-6;
        let w: Vec<f64> = grid.nodes().iter().map(|&r| bump_shape(r, 3.0, 2.0)).collect();
        let pert: Vec<f64> = (0..n).map(|i| phi[i] + eps * w[i]).collect();
        let s0 = ev.state(0.0, RadialProfile::new(grid.clone(), pert, "p").unwrap()).unwrap();
        let s1 = ev.step(&s0, dt).unwrap().state;
        let base_step = ev.step(&ev.state(0.0, sol.phi().clone()).unwrap(), dt).unwrap().state;
        // linear implicit step with potential pΦ^{p−1}, built independently
        let lap = RadialLaplacian::new(&grid, c.dim());
        let mut a = BandedMatrix::zeros(n, 3, 2);
        for i in 0..n - 1 {
            let row = &lap.rows()[i];
            for (k, &wt) in row.weights.iter().enumerate() {
                if wt != 0.0 {
                    a.add(i, row.start + k, -dt * wt);
                }
            }
            a.add(i, i, 1.0 - dt * c.p() * phi[i].powf(c.p() - 1.0));
        }
        a.add(n - 1, n - 1, 1.0);
        let mut lin = w.clone();
        lin[n - 1] = 0.0;
        a.solve_in_place(&mut lin).unwrap();
        for i in 0..n {
            let diff = (s1.u.values()[i] - base_step.u.values()[i]) / eps;
            assert!((diff - lin[i]).abs() < 1e-4, "node {i}: {diff} vs {}", lin[i]);
        }
    }

    #[test]
    fn steady_start_stops_immediately() {
        let sol = base();
        let mut cfg = config(1.0);
        cfg.convergence_eps = Some(1e-6);
        let u0 = scale_family(sol, 1.0, sol.grid().clone()).unwrap();
        let ev = Evolver::new(sol.constants(), sol.grid().clone(), cfg.scheme, *u0.values().last().unwrap());
        let traj = evolve_until(&cfg, &ev, u0).unwrap();
        assert!(traj.converged);
        assert_eq!(traj.records.len(), 1);
    }

    #[test]
    fn ordering_is_preserved_and_violations_flagged() {
        let sol = base();
        let grid = sol.grid().clone();
        let cfg = config(0.5);
        let lower = scale_family(sol, 1.0, grid.clone()).unwrap();
        let upper = scale_family(sol, 2.0, grid.clone()).unwrap();
        let u0 = InitialData::Bump {
            alpha: 1.0,
            center: 2.0,
            width: 1.0,
            height: 0.3,
            cap: Some(2.0),
        }
        .build(sol, grid.clone())
        .unwrap();
        let ev = Evolver::new(sol.constants(), grid.clone(), cfg.scheme, *u0.values().last().unwrap());
        let traj = evolve_until(&cfg, &ev, u0).unwrap();
        let flags = comparison_check(&traj, &lower, &upper, cfg.ordering_tolerance());
        assert!(flags.iter().all(|&f| f));
        let above = upper.map("above", |_, v| v * 1.01).unwrap();
        let traj = evolve_until(&config(0.01), &ev, above).unwrap();
        assert!(!comparison_check(&traj, &lower, &upper, cfg.ordering_tolerance())[0]);
    }

    #[test]
    fn blowup_is_detected() {
        let sol = base();
        let grid = sol.grid().clone();
        let big = scale_family(sol, 1.0, grid.clone()).unwrap().map("big", |r, v| v + 50.0 * bump_shape(r, 0.0, 1.0)).unwrap();
        let ev = Evolver::new(sol.constants(), grid, Scheme::ImplicitEuler, *big.values().last().unwrap());
        let mut cfg = config(1.0);
        cfg.adaptive = false;
        cfg.dt = 1e-3;
        let err = evolve_until(&cfg, &ev, big).unwrap_err();
        assert!(matches!(err, Error::BlowupDetected { .. } | Error::NewtonDiverged { .. }), "{err}");
    }

    #[test]
    fn config_json_defaults() {
        let cfg: EvolutionConfig = serde_json::from_str(r#"{"params":{"dim":13,"p":3.0},"t_max":5.0}"#).unwrap();
        assert_eq!(cfg.scheme, Scheme::ImplicitEuler);
        assert_eq!(cfg.far_field, FarField::Hold);
        assert!(cfg.validate().is_ok());
        let bad: EvolutionConfig = serde_json::from_str(r#"{"params":{"dim":13,"p":3.0},"t_max":-1}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
