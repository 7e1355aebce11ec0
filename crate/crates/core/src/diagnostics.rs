//! Measurable consequences of the Liouville argument: weighted decay of
//! `u_t`, sweeping ratios against a positive kernel, and the parabolic
//! gradient interpolation inequality on cylinders.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::SpectralConstants;
use crate::evolve::EvolutionState;
use crate::linearize::KernelElement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub t: f64,
    pub weighted_sup: f64,
    pub window: (f64, f64),
}

/// `sup r^{m+λ₁}|u_t|` over the window nodes; at `p = p_c` the weight is
/// divided by `ln r`.
pub fn weighted_decay(state: &EvolutionState, c: &SpectralConstants, window: (f64, f64)) -> DecayRecord {
    let k = c.kernel_decay();
    let log = c.is_critical();
    let weighted_sup = state
        .u_t
        .nodes()
        .iter()
        .zip(state.u_t.values())
        .filter(|(r, _)| **r >= window.0 && **r <= window.1)
        .map(|(&r, v)| {
            let w = r.powf(k);
            v.abs() * if log { w / r.ln() } else { w }
        })
        .fold(0.0, f64::max);
    DecayRecord {
        t: state.t,
        weighted_sup,
        window,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// Smallest `λ ≥ 0` with `u_t ≤ λZ` (and `−u_t ≤ λZ`) at every node where
/// `Z` is finite and positive.
pub fn sweeping_ratio(state: &EvolutionState, z: &KernelElement) -> SweepRecord {
    let mut plus = 0.0f64;
    let mut minus = 0.0f64;
    for (v, zv) in state.u_t.values().iter().zip(z.values()) {
        if zv.is_finite() && *zv > 0.0 {
            plus = plus.max(v / zv);
            minus = minus.max(-v / zv);
        }
    }
    SweepRecord {
        t: state.t,
        lambda_plus: plus,
        lambda_minus: minus,
    }
}

/// Non-increase check on a sequence after skipping its first `skip_fraction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSummary {
    pub violations: usize,
    /// Largest single-step increase (negative when strictly decreasing).
    pub worst_increase: f64,
    pub checked: usize,
}

impl MonotoneSummary {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

pub fn non_increasing(values: &[f64], skip_fraction: f64, slack: f64) -> MonotoneSummary {
    let start = ((values.len() as f64) * skip_fraction).floor() as usize;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for i in (start + 1)..values.len() {
        let inc = values[i] - values[i - 1];
        worst = worst.max(inc);
        checked += 1;
        if inc > slack {
            violations += 1;
        }
    }
    MonotoneSummary {
        violations,
        worst_increase: if checked == 0 { 0.0 } else { worst },
        checked,
    }
}

/// Polynomial in `(x₁, x₂, t)`, keyed by exponents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly3 {
    pub terms: BTreeMap<(u32, u32, u32), f64>,
}

impl Poly3 {
    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j, k), c)| c * x1.powi(i as i32) * x2.powi(j as i32) * t.powi(k as i32))
            .sum()
    }

    fn derivative(&self, axis: usize) -> Poly3 {
        let mut out = Poly3::default();
        for (&(i, j, k), &c) in &self.terms {
            let e = [i, j, k];
            if e[axis] == 0 {
                continue;
            }
            let mut d = e;
            d[axis] -= 1;
            *out.terms.entry((d[0], d[1], d[2])).or_insert(0.0) += c * e[axis] as f64;
        }
        out
    }

    fn sub(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            *out.terms.entry(e).or_insert(0.0) -= c;
        }
        out
    }

    /// `ψ_t − Δψ` (the polynomial does not depend on `x₃..x_N`).
    pub fn heat_residual(&self) -> Poly3 {
        let dxx = self.derivative(0).derivative(0);
        let dyy = self.derivative(1).derivative(1);
        let lap = {
            let mut s = dxx;
            for (&e, &c) in &dyy.terms {
                *s.terms.entry(e).or_insert(0.0) += c;
            }
            s
        };
        self.derivative(2).sub(&lap)
    }

    pub fn gradient_at_origin(&self) -> (f64, f64) {
        let g = |e| self.terms.get(&e).copied().unwrap_or(0.0);
        (g((1, 0, 0)), g((0, 1, 0)))
    }
}

/// Manufactured pairs `(ψ, f = ψ_t − Δψ)` with `ψ` depending on `x₁, x₂, t` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum InterpCase {
    Constant,
    /// `ψ = x₁`.
    Linear,
    /// `ψ = sin(k·x) e^{−|k|²t}`.
    HeatMode { k1: f64, k2: f64 },
    /// `ψ = x₁ + σ(t + |x|²)`, `f = σ(1 − 2N)`.
    Quadratic { sigma: f64 },
    /// Space-time polynomial with `f` computed symbolically.
    Polynomial { psi: Poly3 },
}

impl InterpCase {
    pub fn name(&self) -> String {
        match self {
            InterpCase::Constant => "constant".into(),
            InterpCase::Linear => "linear".into(),
            InterpCase::HeatMode { k1, k2 } => format!("heat_mode({k1},{k2})"),
            InterpCase::Quadratic { sigma } => format!("quadratic({sigma})"),
            InterpCase::Polynomial { .. } => "polynomial".into(),
        }
    }

    fn psi(&self, dim: u32, x1: f64, x2: f64, t: f64) -> (f64, f64) {
        match self {
            InterpCase::Constant => (1.0, 0.0),
            InterpCase::Linear => (x1, 0.0),
            InterpCase::HeatMode { k1, k2 } => ((k1 * x1 + k2 * x2).sin() * (-(k1 * k1 + k2 * k2) * t).exp(), 0.0),
            InterpCase::Quadratic { sigma } => (
                x1 + sigma * (t + x1 * x1 + x2 * x2),
                sigma * (1.0 - 2.0 * dim as f64),
            ),
            InterpCase::Polynomial { psi } => (psi.eval(x1, x2, t), psi.heat_residual().eval(x1, x2, t)),
        }
    }

    fn gradient_sq(&self) -> f64 {
        match self {
            InterpCase::Constant => 0.0,
            InterpCase::Linear | InterpCase::Quadratic { .. } => 1.0,
            InterpCase::HeatMode { k1, k2 } => k1 * k1 + k2 * k2,
            InterpCase::Polynomial { psi } => {
                let (a, b) = psi.gradient_at_origin();
                a * a + b * b
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpResult {
    pub case: String,
    pub radius: f64,
    pub lhs: f64,
    pub f_norm: f64,
    pub psi_norm: f64,
    /// `‖f‖‖ψ‖`.
    pub mixed: f64,
    /// `‖ψ‖²/R²`.
    pub scaled: f64,
    pub fitted_c: f64,
}

impl InterpResult {
    pub fn holds_with(&self, c: f64) -> bool {
        self.lhs <= c * (self.mixed + self.scaled) * (1.0 + 1e-12)
    }
}

pub const SPACE_SAMPLES: usize = 41;
pub const TIME_SAMPLES: usize = 21;

/// Sup norms by sampling the cylinder `{|x| < R, |t| < R²}` on a
/// 41×41×21 lattice over the `(x₁, x₂)` disk.
pub fn interp_check(case: &InterpCase, dim: u32, radius: f64) -> InterpResult {
    let mut f_norm = 0.0f64;
    let mut psi_norm = 0.0f64;
    let step = 2.0 * radius / (SPACE_SAMPLES - 1) as f64;
    let tstep = 2.0 * radius * radius / (TIME_SAMPLES - 1) as f64;
    for a in 0..SPACE_SAMPLES {
        let x1 = -radius + a as f64 * step;
        for b in 0..SPACE_SAMPLES {
            let x2 = -radius + b as f64 * step;
            if x1 * x1 + x2 * x2 > radius * radius * (1.0 + 1e-12) {
                continue;
            }
            for k in 0..TIME_SAMPLES {
                let t = -radius * radius + k as f64 * tstep;
                let (p, f) = case.psi(dim, x1, x2, t);
                psi_norm = psi_norm.max(p.abs());
                f_norm = f_norm.max(f.abs());
            }
        }
    }
    let lhs = case.gradient_sq();
    let mixed = f_norm * psi_norm;
    let scaled = psi_norm * psi_norm / (radius * radius);
    let denom = mixed + scaled;
    let fitted_c = if lhs == 0.0 { 0.0 } else { lhs / denom };
    InterpResult {
        case: case.name(),
        radius,
        lhs,
        f_norm,
        psi_norm,
        mixed,
        scaled,
        fitted_c,
    }
}

/// Random polynomial of total degree ≤ 3 in `(x₁, x₂, t)` with unit-range coefficients.
pub fn random_polynomial(rng: &mut impl Rng) -> Poly3 {
    let mut psi = Poly3::default();
    for i in 0..=3u32 {
        for j in 0..=3 - i {
            for k in 0..=1u32 {
                if i + j + 2 * k <= 3 {
                    psi.terms.insert((i, j, k), rng.gen_range(-1.0..1.0));
                }
            }
        }
    }
    psi
}

/// The standard manufactured family: fixed cases plus `random` polynomials.
pub fn manufactured_family(seed: u64, random: usize) -> Vec<InterpCase> {
    let mut cases = vec![
        InterpCase::Constant,
        InterpCase::Linear,
        InterpCase::HeatMode { k1: 1.0, k2: 0.0 },
        InterpCase::HeatMode { k1: 0.5, k2: 0.5 },
        InterpCase::HeatMode { k1: 2.0, k2: -1.0 },
        InterpCase::Quadratic { sigma: 0.1 },
        InterpCase::Quadratic { sigma: 1.0 },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cases.extend((0..random).map(|_| InterpCase::Polynomial {
        psi: random_polynomial(&mut rng),
    }));
    cases
}

/// Run every case at every radius.
pub fn interp_sweep(dim: u32, radii: &[f64], cases: &[InterpCase]) -> Vec<InterpResult> {
    use rayon::prelude::*;
    let jobs: Vec<(usize, f64)> = (0..cases.len()).flat_map(|i| radii.iter().map(move |&r| (i, r))).collect();
    jobs.par_iter().map(|&(i, r)| interp_check(&cases[i], dim, r)).collect()
}

/// Smallest single constant covering every result.
pub fn uniform_constant(results: &[InterpResult]) -> f64 {
    results.iter().map(|r| r.fitted_c).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, RadialProfile};
    use crate::linearize::KernelKind;
    use std::sync::Arc;

    fn state_with(u_t: Vec<f64>, grid: Arc<RadialGrid>) -> EvolutionState {
        let u = RadialProfile::new(grid.clone(), vec![0.0; u_t.len()], "u").unwrap();
        EvolutionState {
            t: 0.0,
            u,
            u_t: RadialProfile::new(grid, u_t, "u_t").unwrap(),
        }
    }

    #[test]
    fn linear_case_gives_unit_constant() {
        for r in [1.0, 2.0, 4.0, 8.0] {
            let res = interp_check(&InterpCase::Linear, 13, r);
            assert!((res.fitted_c - 1.0).abs() < 1e-12, "R={r}: {}", res.fitted_c);
        }
        assert_eq!(interp_check(&InterpCase::Constant, 13, 1.0).fitted_c, 0.0);
    }

    #[test]
    fn sine_mode_values() {
        let res = interp_check(&InterpCase::HeatMode { k1: 1.0, k2: 0.0 }, 13, 1.0);
        assert_eq!(res.lhs, 1.0);
        assert_eq!(res.f_norm, 0.0);
        assert!((res.psi_norm - 1f64.sin() * 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn symbolic_residual_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_polynomial(&mut rng);
        let f = psi.heat_residual();
        let (x, y, t) = (0.3, -0.7, 0.2);
        let h = 1e-4;
        let e = |a: f64, b: f64, c: f64| psi.eval(a, b, c);
        let dt = (e(x, y, t + h) - e(x, y, t - h)) / (2.0 * h);
        let lap = (e(x + h, y, t) + e(x - h, y, t) + e(x, y + h, t) + e(x, y - h, t) - 4.0 * e(x, y, t)) / (h * h);
        assert!((f.eval(x, y, t) - (dt - lap)).abs() < 1e-5);
    }

    #[test]
    fn sweep_ratio_homogeneity() {
        let grid = Arc::new(RadialGrid::uniform(10.0, 10).unwrap());
        let z = KernelElement {
            kind: KernelKind::Regular,
            profile: RadialProfile::from_fn(grid.clone(), "z", |r| 1.0 / (1.0 + r)).unwrap(),
        };
        let v: Vec<f64> = grid.nodes().iter().map(|r| (r - 4.0) * 0.01).collect();
        let s1 = sweeping_ratio(&state_with(v.clone(), grid.clone()), &z);
        let s2 = sweeping_ratio(&state_with(v.iter().map(|x| 2.0 * x).collect(), grid.clone()), &z);
        assert_eq!(s2.lambda_plus, 2.0 * s1.lambda_plus);
        assert_eq!(s2.lambda_minus, 2.0 * s1.lambda_minus);
        let eq = sweeping_ratio(&state_with(vec![0.0; 11], grid), &z);
        assert_eq!((eq.lambda_plus, eq.lambda_minus), (0.0, 0.0));
    }

    #[test]
    fn monotone_summary() {
        let s = non_increasing(&[5.0, 6.0, 4.0, 3.0, 3.0 + 1e-9], 0.25, 1e-8);
        assert!(s.holds());
        assert_eq!(s.checked, 3);
        let s = non_increasing(&[5.0, 6.0, 4.0, 3.0, 3.1], 0.0, 1e-8);
        assert_eq!(s.violations, 2);
    }

    #[test]
    fn decay_is_zero_at_rest() {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let grid = Arc::new(RadialGrid::uniform(300.0, 300).unwrap());
        let rec = weighted_decay(&state_with(vec![0.0; 301], grid), &c, (20.0, 200.0));
        assert_eq!(rec.weighted_sup, 0.0);
    }
}
