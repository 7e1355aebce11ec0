//! Radial steady states: the ground profile `Φ`, the scaling family `φ_α`,
//! the singular solution `φ_∞ = L r^{−m}`, and tail-coefficient fitting.
//!
//! Outward shooting starts from a three-term series at the origin. Beyond
//! [`SWITCH_RADIUS`] the solver integrates the deviation `w = Φ − φ_∞`
//! directly, so the tail correction `a r^{−m−λ₁}` keeps full relative
//! precision out to `R_max` instead of drowning in `Φ − L r^{−m}` cancellation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::SpectralConstants;
use crate::error::{Error, Result};
use crate::grid::{quintic_hermite, GridSpec, RadialGrid, RadialProfile};
use crate::ode::Dopri5;
use crate::stencil::first_derivative_rows;

/// Radius at which shooting switches from `Φ` to `w = Φ − φ_∞`.
pub const SWITCH_RADIUS: f64 = 1.0;
/// Tolerance on the discrete ODE residual of a solved profile.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Minimum number of nodes in a fit window.
pub const MIN_FIT_NODES: usize = 10;

/// `φ_∞^p · ((1 + w/φ_∞)^p − 1)`, accurate for `|w| ≪ φ_∞`.
#[inline]
pub(crate) fn power_increment(phi_inf: f64, w: f64, p: f64) -> f64 {
    phi_inf.powf(p) * (p * (w / phi_inf).ln_1p()).exp_m1()
}

/// Series start `u(r) ≈ c − c^p r²/(2N) + p c^{2p−1} r⁴/(8N(N+2))`, with `∂u/∂c`.
pub(crate) fn origin_series(c: &SpectralConstants, center: f64, r: f64) -> [f64; 4] {
    let n = c.dim() as f64;
    let p = c.p();
    let cp = center.powf(p);
    let a = -cp / (2.0 * n);
    let b = p * center.powf(2.0 * p - 1.0) / (8.0 * n * (n + 2.0));
    // d/dc of the two coefficients
    let da = -p * center.powf(p - 1.0) / (2.0 * n);
    let db = p * (2.0 * p - 1.0) * center.powf(2.0 * p - 2.0) / (8.0 * n * (n + 2.0));
    let r2 = r * r;
    [
        center + a * r2 + b * r2 * r2,
        2.0 * a * r + 4.0 * b * r2 * r,
        1.0 + da * r2 + db * r2 * r2,
        2.0 * da * r + 4.0 * db * r2 * r,
    ]
}

/// One node of an outward shot: profile, derivative and (for `r > 0`) the
/// deviation from `φ_∞` with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ShotNode {
    pub phi: f64,
    pub dphi: f64,
    pub dev: f64,
    pub ddev: f64,
    /// Kernel `∂u/∂c` and its derivative, when requested.
    pub z: f64,
    pub dz: f64,
}

/// Shoot `u″ + ((N−1)/r)u′ + u^p = 0`, `u(0) = center`, across `grid`,
/// optionally carrying the variational equation for `∂u/∂center`.
pub(crate) fn shoot(c: &SpectralConstants, center: f64, grid: &RadialGrid) -> Result<Vec<ShotNode>> {
    let nodes = grid.nodes();
    let n = c.dim() as f64;
    let p = c.p();
    let l = c.amplitude;
    let m = c.m;
    let lp = l.powf(p);
    let solver = Dopri5::default();

    // Inner variables: [u, u′, z, z′]
    let inner = |r: f64, y: &[f64; 4]| -> [f64; 4] {
        let u = y[0];
        let up = u.abs().powf(p - 1.0);
        [y[1], -(n - 1.0) / r * y[1] - up * u, y[3], -(n - 1.0) / r * y[3] - p * up * y[2]]
    };
    // Outer variables: [w, w′, z, z′] with u = L r^{−m} + w
    let outer = |r: f64, y: &[f64; 4]| -> [f64; 4] {
        let phi_inf = l * r.powf(-m);
        let u = phi_inf + y[0];
        let nonlinear = if y[0].abs() < 0.5 * phi_inf {
            power_increment(phi_inf, y[0], p)
        } else {
            u.abs().powf(p - 1.0) * u - lp * r.powf(-m - 2.0)
        };
        [
            y[1],
            -(n - 1.0) / r * y[1] - nonlinear,
            y[3],
            -(n - 1.0) / r * y[3] - p * u.abs().powf(p - 1.0) * y[2],
        ]
    };

    let mut out = Vec::with_capacity(nodes.len());
    out.push(ShotNode {
        phi: center,
        dphi: 0.0,
        dev: f64::NEG_INFINITY,
        ddev: f64::INFINITY,
        z: 1.0,
        dz: 0.0,
    });
    let r_start = (1e-6 * grid.r_max()).min(0.5 * nodes[1]);
    let mut y = origin_series(c, center, r_start);
    let mut r_prev = r_start;
    let mut outer_mode = false;
    let mut h = r_start;
    for &r in &nodes[1..] {
        if !outer_mode && r > SWITCH_RADIUS {
            // finish the inner leg exactly at the switch radius
            if r_prev < SWITCH_RADIUS {
                y = solver.advance(&inner, r_prev, y, SWITCH_RADIUS, &mut h)?;
                r_prev = SWITCH_RADIUS;
            }
            let phi_inf = l * r_prev.powf(-m);
            y = [y[0] - phi_inf, y[1] + m * phi_inf / r_prev, y[2], y[3]];
            outer_mode = true;
        }
        y = if outer_mode {
            solver.advance(&outer, r_prev, y, r, &mut h)?
        } else {
            solver.advance(&inner, r_prev, y, r, &mut h)?
        };
        r_prev = r;
        let phi_inf = l * r.powf(-m);
        let dphi_inf = -m * phi_inf / r;
        let node = if outer_mode {
            ShotNode {
                phi: phi_inf + y[0],
                dphi: dphi_inf + y[1],
                dev: y[0],
                ddev: y[1],
                z: y[2],
                dz: y[3],
            }
        } else {
            ShotNode {
                phi: y[0],
                dphi: y[1],
                dev: y[0] - phi_inf,
                ddev: y[1] - dphi_inf,
                z: y[2],
                dz: y[3],
            }
        };
        if !(node.phi > 0.0) {
            return Err(Error::NonPositiveProfile { r, value: node.phi });
        }
        out.push(node);
    }
    Ok(out)
}

/// Which expansion the tail fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `p > p_c`: leading coefficient `a` of `r^{−m−λ₁}`.
    Power,
    /// `p = p_c`: coefficient `b` of `ln r · r^{−m−λ₁}`.
    Logarithmic,
}

/// A single term `coefficient · r^{power} · (ln r)^{log_power}` of the
/// rescaled deviation `(Φ − L r^{−m}) r^{m+λ₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailTerm {
    pub power: f64,
    pub log_power: u32,
    pub coefficient: f64,
}

impl TailTerm {
    fn basis(&self, r: f64) -> f64 {
        r.powf(self.power) * r.ln().powi(self.log_power as i32)
    }

    fn basis_derivative(&self, r: f64) -> f64 {
        let lr = r.ln();
        let k = self.log_power as i32;
        let lead = self.power * lr.powi(k);
        let extra = if k > 0 { k as f64 * lr.powi(k - 1) } else { 0.0 };
        r.powf(self.power - 1.0) * (lead + extra)
    }
}

/// Result of fitting the tail expansion over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub kind: TailKind,
    /// `a` for [`TailKind::Power`], `b` for [`TailKind::Logarithmic`].
    pub coefficient: f64,
    pub window: (f64, f64),
    /// `‖residual‖₂ / ‖data‖₂` of the least-squares fit (0 for an exact leading term).
    pub residual: f64,
    pub nodes: usize,
    pub terms: Vec<TailTerm>,
}

impl TailFit {
    /// Terms of the fitted expansion.
    ///
    /// Besides the leading coefficient the model carries the second radial
    /// kernel element at `φ_∞` (`r^{−m−λ₂}`, or `r^{−m−λ₁}` beside the log)
    /// and the first quadratic corrections `r^{−m−2λ₁}`, `r^{−m−λ₁−λ₂}`.
    fn model(c: &SpectralConstants) -> (TailKind, Vec<(f64, u32)>) {
        let (l1, l2) = (c.lambda1, c.lambda2);
        if c.is_critical() {
            (
                TailKind::Logarithmic,
                vec![(0.0, 1), (0.0, 0), (-l1, 2), (-l1, 1), (-l1, 0)],
            )
        } else {
            (TailKind::Power, vec![(0.0, 0), (l1 - l2, 0), (-l1, 0), (-l2, 0)])
        }
    }

    /// Deviation `Φ(r) − L r^{−m}` predicted by the fitted expansion, and its derivative.
    pub fn deviation(&self, c: &SpectralConstants, r: f64) -> (f64, f64) {
        let k = c.kernel_decay();
        let scale = r.powf(-k);
        let dscale = -k * scale / r;
        let mut q = 0.0;
        let mut dq = 0.0;
        for t in &self.terms {
            q += t.coefficient * t.basis(r);
            dq += t.coefficient * t.basis_derivative(r);
        }
        (q * scale, dq * scale + q * dscale)
    }
}

/// Default fit window: the correction `r^{−λ₁}` spans `[1e−11, 1e−4]`
/// (clipped to `R_max/2`), scaled to the core size `center^{−1/m}`.
pub fn default_fit_window(c: &SpectralConstants, center: f64, r_max: f64) -> (f64, f64) {
    let core = center.powf(-1.0 / c.m);
    let lo = 10f64.powf(4.0 / c.lambda1) * core;
    let hi = (10f64.powf(11.0 / c.lambda1) * core).min(0.5 * r_max);
    (lo, hi)
}

/// Fit the tail expansion to `Φ − L r^{−m}` sampled at `r` with deviations `dev`.
fn fit_deviation(c: &SpectralConstants, r: &[f64], dev: &[f64], leading: &[f64], window: (f64, f64)) -> Result<TailFit> {
    let (kind, model) = TailFit::model(c);
    let idx: Vec<usize> = (0..r.len())
        .filter(|&i| r[i] >= window.0 && r[i] <= window.1 && r[i] > 0.0)
        .collect();
    if idx.len() < MIN_FIT_NODES {
        return Err(Error::WindowTooNarrow {
            nodes: idx.len(),
            required: MIN_FIT_NODES,
        });
    }
    let floor = 100.0 * f64::EPSILON;
    let below: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| dev[i].abs() < floor * leading[i].abs())
        .collect();
    let zero_fit = |residual: f64| TailFit {
        kind,
        coefficient: 0.0,
        window,
        residual,
        nodes: idx.len(),
        terms: model
            .iter()
            .map(|&(power, log_power)| TailTerm { power, log_power, coefficient: 0.0 })
            .collect(),
    };
    if below.len() == idx.len() {
        // numerically the bare leading term: nothing to fit
        return Ok(zero_fit(0.0));
    }
    if let Some(&i) = below.first() {
        return Err(Error::PrecisionLoss {
            r: r[i],
            relative: (dev[i] / leading[i]).abs(),
        });
    }
    let k = c.kernel_decay();
    let q: Vec<f64> = idx.iter().map(|&i| dev[i] * r[i].powf(k)).collect();
    let cols = model.len();
    let mut a = DMatrix::<f64>::zeros(idx.len(), cols);
    for (row, &i) in idx.iter().enumerate() {
        for (col, &(power, log_power)) in model.iter().enumerate() {
            a[(row, col)] = r[i].powf(power) * r[i].ln().powi(log_power as i32);
        }
    }
    // column scaling keeps the SVD cutoff meaningful
    let scales: Vec<f64> = (0..cols)
        .map(|j| a.column(j).amax().max(f64::MIN_POSITIVE))
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_vec(q.clone());
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::invalid("window", format!("least-squares fit failed: {e}")))?;
    let fitted = &a * &x;
    let res_norm = (&fitted - &b).norm();
    let data_norm = b.norm();
    let terms: Vec<TailTerm> = model
        .iter()
        .enumerate()
        .map(|(j, &(power, log_power))| TailTerm {
            power,
            log_power,
            coefficient: x[j] / scales[j],
        })
        .collect();
    Ok(TailFit {
        kind,
        coefficient: terms[0].coefficient,
        window,
        residual: if data_norm > 0.0 { res_norm / data_norm } else { 0.0 },
        nodes: idx.len(),
        terms,
    })
}

/// Fit the tail of an arbitrary sampled profile over `window`.
pub fn fit_tail(c: &SpectralConstants, profile: &RadialProfile, window: (f64, f64)) -> Result<TailFit> {
    let r = profile.nodes();
    let leading: Vec<f64> = r.iter().map(|&x| if x > 0.0 { c.singular_value(x) } else { 0.0 }).collect();
    let dev: Vec<f64> = profile
        .values()
        .iter()
        .zip(&leading)
        .map(|(v, l)| if v.is_finite() { v - l } else { 0.0 })
        .collect();
    fit_deviation(c, r, &dev, &leading, window)
}

/// Solution of the radial steady-state problem with `Φ(0) = center`.
#[derive(Debug, Clone)]
pub struct SteadyStateSolution {
    constants: SpectralConstants,
    center: f64,
    phi: RadialProfile,
    dphi: RadialProfile,
    /// `Φ − L r^{−m}` and its derivative (unused at `r = 0`).
    dev: Vec<f64>,
    ddev: Vec<f64>,
    tail: TailFit,
}

impl SteadyStateSolution {
    pub fn constants(&self) -> &SpectralConstants {
        &self.constants
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn phi(&self) -> &RadialProfile {
        &self.phi
    }

    pub fn dphi(&self) -> &RadialProfile {
        &self.dphi
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.phi.grid()
    }

    pub fn tail(&self) -> &TailFit {
        &self.tail
    }

    /// Deviation `Φ − L r^{−m}` at each node (meaningless at `r = 0`).
    pub fn deviation(&self) -> &[f64] {
        &self.dev
    }

    pub fn deviation_derivative(&self) -> &[f64] {
        &self.ddev
    }

    pub fn r_max(&self) -> f64 {
        self.phi.grid().r_max()
    }

    /// Refit the tail coefficient over another window.
    pub fn fit(&self, window: (f64, f64)) -> Result<TailFit> {
        let r = self.phi.nodes();
        let leading: Vec<f64> = r.iter().map(|&x| if x > 0.0 { self.constants.singular_value(x) } else { 0.0 }).collect();
        fit_deviation(&self.constants, r, &self.dev, &leading, window)
    }

    fn second_derivative(&self, r: f64, u: f64, du: f64) -> f64 {
        let n = self.constants.dim() as f64;
        let p = self.constants.p();
        if r == 0.0 {
            -u.powf(p) / n
        } else {
            -(n - 1.0) / r * du - u.abs().powf(p - 1.0) * u
        }
    }

    fn deviation_second(&self, r: f64, w: f64, dw: f64) -> f64 {
        let n = self.constants.dim() as f64;
        let phi_inf = self.constants.singular_value(r);
        -(n - 1.0) / r * dw - power_increment(phi_inf, w, self.constants.p())
    }

    /// Deviation `w = Φ − φ_∞` and `w′` at `r > 0`: quintic Hermite inside the
    /// grid's outer region, fitted expansion beyond `R_max`.
    pub fn eval_deviation(&self, r: f64) -> (f64, f64) {
        let grid = self.phi.grid();
        if r >= grid.r_max() {
            return self.tail.deviation(&self.constants, r);
        }
        let i = grid.locate(r);
        let x = grid.nodes();
        if x[i] >= SWITCH_RADIUS {
            let a = [self.dev[i], self.ddev[i], self.deviation_second(x[i], self.dev[i], self.ddev[i])];
            let b = [
                self.dev[i + 1],
                self.ddev[i + 1],
                self.deviation_second(x[i + 1], self.dev[i + 1], self.ddev[i + 1]),
            ];
            quintic_hermite(x[i], x[i + 1], a, b, r)
        } else {
            let (u, du) = self.eval(r);
            let phi_inf = self.constants.singular_value(r);
            (u - phi_inf, du + self.constants.m * phi_inf / r)
        }
    }

    /// `Φ(r)` and `Φ′(r)` for any `r ≥ 0`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let grid = self.phi.grid();
        let x = grid.nodes();
        if r >= SWITCH_RADIUS || r >= grid.r_max() {
            let (w, dw) = self.eval_deviation(r);
            let phi_inf = self.constants.singular_value(r);
            return (phi_inf + w, dw - self.constants.m * phi_inf / r);
        }
        let i = grid.locate(r);
        let u = self.phi.values();
        let du = self.dphi.values();
        let a = [u[i], du[i], self.second_derivative(x[i], u[i], du[i])];
        let b = [u[i + 1], du[i + 1], self.second_derivative(x[i + 1], u[i + 1], du[i + 1])];
        quintic_hermite(x[i], x[i + 1], a, b, r)
    }

    /// Discrete residual `D(Φ′) + ((N−1)/r)Φ′ + Φ^p` (origin: `N·D(Φ′) + Φ^p`),
    /// max-norm over nodes with `r ≤ r_limit`.
    pub fn ode_residual(&self, r_limit: f64) -> f64 {
        let grid = self.phi.grid();
        let rows = first_derivative_rows(grid);
        let n = self.constants.dim() as f64;
        let p = self.constants.p();
        let u = self.phi.values();
        let du = self.dphi.values();
        let x = grid.nodes();
        let mut worst = 0.0f64;
        for i in 0..grid.len() - 2 {
            if x[i] > r_limit {
                break;
            }
            let d2 = rows[i].apply(du);
            let res = if i == 0 {
                n * d2 + u[0].powf(p)
            } else {
                d2 + (n - 1.0) / x[i] * du[i] + u[i].powf(p)
            };
            worst = worst.max(res.abs());
        }
        worst
    }
}

/// Solve for the ground profile `Φ` (`Φ(0) = 1`) on the stretched grid.
pub fn solve_ground_profile(c: &SpectralConstants, grid: &GridSpec) -> Result<SteadyStateSolution> {
    let grid = Arc::new(RadialGrid::stretched(grid)?);
    solve_with_center(c, 1.0, grid)
}

/// Solve the steady problem with `u(0) = center` directly (no rescaling).
pub fn solve_with_center(c: &SpectralConstants, center: f64, grid: Arc<RadialGrid>) -> Result<SteadyStateSolution> {
    if !(center > 0.0) || !center.is_finite() {
        return Err(Error::invalid("alpha", format!("center value must be positive, got {center}")));
    }
    let shot = shoot(c, center, &grid)?;
    let mut phi = Vec::with_capacity(shot.len());
    let mut dphi = Vec::with_capacity(shot.len());
    let mut dev = Vec::with_capacity(shot.len());
    let mut ddev = Vec::with_capacity(shot.len());
    for node in &shot {
        phi.push(node.phi);
        dphi.push(node.dphi);
        dev.push(if node.dev.is_finite() { node.dev } else { 0.0 });
        ddev.push(if node.ddev.is_finite() { node.ddev } else { 0.0 });
    }
    let window = default_fit_window(c, center, grid.r_max());
    let r = grid.nodes();
    let leading: Vec<f64> = r.iter().map(|&x| if x > 0.0 { c.singular_value(x) } else { 0.0 }).collect();
    let tail = fit_deviation(c, r, &dev, &leading, window)?;
    let sol = SteadyStateSolution {
        constants: *c,
        center,
        phi: RadialProfile::new(grid.clone(), phi, format!("phi_{center}"))?,
        dphi: RadialProfile::new(grid.clone(), dphi, format!("dphi_{center}"))?,
        dev,
        ddev,
        tail,
    };
    let residual = sol.ode_residual(0.5 * grid.r_max());
    let tolerance = RESIDUAL_TOLERANCE * center.powf(c.p()).max(1.0);
    if residual > tolerance {
        return Err(Error::ResidualTooLarge { residual, tolerance });
    }
    Ok(sol)
}

/// `φ_∞` tail report helper: `(coefficient, window, residual)` as JSON-friendly data.
pub fn fit_asymptotic_coefficient(sol: &SteadyStateSolution, window: (f64, f64)) -> Result<TailFit> {
    sol.fit(window)
}

/// `φ_α(r) = α Φ(α^{1/m} r)` sampled on `grid`.
///
/// Uses the solver's own `Φ′` and `Φ″` (quintic Hermite), and the fitted
/// expansion beyond the base solution's `R_max`.
pub fn scale_family(base: &SteadyStateSolution, alpha: f64, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("alpha must be positive, got {alpha}")));
    }
    let rel = alpha / base.center;
    if rel == 1.0 && grid.nodes() == base.grid().nodes() {
        // exact stored values, so φ itself is never above its own bound
        return RadialProfile::new(grid, base.phi().values().to_vec(), format!("phi_alpha={alpha}"));
    }
    let stretch = rel.powf(1.0 / base.constants.m);
    RadialProfile::from_fn(grid, format!("phi_alpha={alpha}"), |r| rel * base.eval(stretch * r).0)
}

/// `(φ_α, φ_α′)` at a single radius.
pub fn scale_family_eval(base: &SteadyStateSolution, alpha: f64, r: f64) -> (f64, f64) {
    let rel = alpha / base.center;
    let stretch = rel.powf(1.0 / base.constants.m);
    let (u, du) = base.eval(stretch * r);
    (rel * u, rel * stretch * du)
}

/// `φ_∞(r) = L r^{−m}`; the origin node is flagged unbounded.
pub fn singular_profile(c: &SpectralConstants, grid: Arc<RadialGrid>) -> Result<RadialProfile> {
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| if r > 0.0 { c.singular_value(r) } else { 0.0 })
        .collect();
    RadialProfile::with_singular_origin(grid, values, "phi_inf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn ground() -> &'static SteadyStateSolution {
        static SOL: OnceLock<SteadyStateSolution> = OnceLock::new();
        SOL.get_or_init(|| {
            let c = SpectralConstants::for_pair(13, 3.0).unwrap();
            solve_ground_profile(&c, &GridSpec::default()).unwrap()
        })
    }

    #[test]
    fn origin_values() {
        let sol = ground();
        assert_eq!(sol.phi().values()[0], 1.0);
        assert_eq!(sol.dphi().values()[0], 0.0);
        // Φ″(0) = −1/N, read off the Hermite interpolant near the origin
        let h = 1e-3;
        let (u, _) = sol.eval(h);
        let second = 2.0 * (u - 1.0) / (h * h);
        assert!((second + 1.0 / 13.0).abs() < 1e-6, "Φ″(0) ≈ {second}");
    }

    #[test]
    fn leading_tail_at_fifty() {
        let (u, _) = ground().eval(50.0);
        let l = 10f64.sqrt();
        assert!((u * 50.0 - l).abs() / l < 1e-2);
    }

    #[test]
    fn positive_decreasing_and_below_singular() {
        let sol = ground();
        let c = sol.constants();
        let v = sol.phi().values();
        assert!(v.iter().all(|&x| x > 0.0));
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        // r^m Φ increases towards L from below
        let scaled: Vec<f64> = sol.phi().nodes()[1..].iter().zip(&v[1..]).map(|(r, u)| r.powf(c.m) * u).collect();
        assert!(scaled.windows(2).all(|w| w[1] > w[0]));
        assert!(scaled.iter().all(|&s| s < c.amplitude));
    }

    #[test]
    fn residual_small() {
        let sol = ground();
        assert!(sol.ode_residual(0.5 * sol.r_max()) < RESIDUAL_TOLERANCE);
    }

    #[test]
    fn tail_coefficient_is_negative_and_window_stable() {
        let sol = ground();
        assert!(sol.tail().coefficient < 0.0);
        let a1 = sol.fit((5.0, 20.0)).unwrap().coefficient;
        let a2 = sol.fit((10.0, 40.0)).unwrap().coefficient;
        assert!(((a1 - a2) / a2).abs() < 0.05, "{a1} vs {a2}");
        let wide = sol.fit((100.0, 4000.0)).unwrap().coefficient;
        assert!(((wide - sol.tail().coefficient) / wide).abs() < 1e-4);
    }

    #[test]
    fn fit_errors() {
        let sol = ground();
        assert!(matches!(sol.fit((10.0, 10.01)), Err(Error::WindowTooNarrow { .. })));
        let c = sol.constants();
        let phi_inf = singular_profile(c, sol.grid().clone()).unwrap();
        let fit = fit_tail(c, &phi_inf, (10.0, 100.0)).unwrap();
        assert_eq!(fit.coefficient, 0.0);
        // a profile whose correction vanishes in part of the window
        let mixed = phi_inf
            .map("mixed", |r, v| if r < 50.0 { v + 1e-3 * r.powf(-5.0) } else { v })
            .unwrap();
        assert!(matches!(fit_tail(c, &mixed, (10.0, 100.0)), Err(Error::PrecisionLoss { .. })));
    }

    #[test]
    fn scaling_identity_and_origin() {
        let sol = ground();
        let grid = sol.grid().clone();
        let same = scale_family(sol, 1.0, grid.clone()).unwrap();
        assert!(same.max_abs_diff(sol.phi()) < 1e-15);
        for alpha in [0.3, 2.0, 7.5] {
            let f = scale_family(sol, alpha, grid.clone()).unwrap();
            assert_eq!(f.values()[0], alpha);
        }
    }

    #[test]
    fn family_is_ordered_below_singular() {
        let sol = ground();
        let grid = sol.grid().clone();
        let c = sol.constants();
        let one = scale_family(sol, 1.0, grid.clone()).unwrap();
        let two = scale_family(sol, 2.0, grid.clone()).unwrap();
        for i in 1..grid.len() {
            let r = grid.nodes()[i];
            assert!(two.values()[i] > one.values()[i], "r = {r}");
            assert!(two.values()[i] < c.singular_value(r), "r = {r}");
        }
    }

    #[test]
    fn direct_solve_matches_rescaling() {
        let sol = ground();
        let grid = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(2000.0)).unwrap());
        for alpha in [0.5, 3.0] {
            let direct = solve_with_center(sol.constants(), alpha, grid.clone()).unwrap();
            let scaled = scale_family(sol, alpha, grid.clone()).unwrap();
            for (a, b) in direct.phi().values().iter().zip(scaled.values()) {
                assert!(((a - b) / b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn singular_profile_closed_form() {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let grid = Arc::new(RadialGrid::uniform(20.0, 20).unwrap());
        let s = singular_profile(&c, grid).unwrap();
        assert!(s.singular_origin());
        assert!(s.values()[0].is_infinite());
        assert!((s.values()[10] - 10f64.sqrt() / 10.0).abs() < 1e-15);
        for (r, v) in s.nodes()[1..].iter().zip(&s.values()[1..]) {
            assert!((v * r.powf(c.m) - c.amplitude).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        let sol = ground();
        assert!(scale_family(sol, 0.0, sol.grid().clone()).is_err());
        assert!(scale_family(sol, -1.0, sol.grid().clone()).is_err());
    }
}
