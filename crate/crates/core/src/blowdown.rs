//! Blow-down rescaling `w_R(r) = R^m u(Rr)`, classification of far-field
//! limits, and the sphere identity for axisymmetric profiles.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::SpectralConstants;
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile};

/// `w_R(r) = R^m u(Rr)` on `target` (monotone cubic resampling of `u`).
pub fn rescale(u: &RadialProfile, c: &SpectralConstants, scale: f64, target: Arc<RadialGrid>) -> Result<RadialProfile> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid("R", format!("scale must be positive, got {scale}")));
    }
    let needed = scale * target.r_max();
    let available = u.grid().r_max();
    if needed > available * (1.0 + 1e-12) {
        return Err(Error::DomainExceeded { needed, available });
    }
    let factor = scale.powf(c.m);
    let singular = u.singular_origin();
    let values: Vec<f64> = target
        .nodes()
        .iter()
        .map(|&r| {
            if r == 0.0 && singular {
                0.0
            } else {
                factor * u.sample((scale * r).min(available))
            }
        })
        .collect();
    let label = format!("{}@R={scale}", u.label());
    if singular {
        RadialProfile::with_singular_origin(target, values, label)
    } else {
        RadialProfile::new(target, values, label)
    }
}

/// `sup_{r ∈ [lo, hi]} |w_R(r) − L r^{−m}|` evaluated on the nodes of `w`.
pub fn annulus_error(w: &RadialProfile, c: &SpectralConstants, lo: f64, hi: f64) -> f64 {
    w.nodes()
        .iter()
        .zip(w.values())
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(&r, &v)| (v - c.singular_value(r)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitClass {
    MinusL,
    Zero,
    PlusL,
    Undetermined,
}

impl std::fmt::Display for LimitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LimitClass::MinusL => "minus_L",
            LimitClass::Zero => "zero",
            LimitClass::PlusL => "plus_L",
            LimitClass::Undetermined => "undetermined",
        })
    }
}

/// Relative tolerance of [`classify_limit`], in units of `L`.
pub const CLASSIFY_TOLERANCE: f64 = 0.05;

/// Match `r^m u(r)` over the outer decade `[R_max/10, R_max]` against `−L`, `0`, `L`.
pub fn classify_limit(u: &RadialProfile, c: &SpectralConstants) -> LimitClass {
    let r_max = u.grid().r_max();
    let scaled: Vec<f64> = u
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(r, _)| **r >= 0.1 * r_max && **r > 0.0)
        .map(|(&r, &v)| r.powf(c.m) * v)
        .collect();
    if scaled.is_empty() {
        return LimitClass::Undetermined;
    }
    let tol = CLASSIFY_TOLERANCE * c.amplitude;
    for (target, class) in [
        (-c.amplitude, LimitClass::MinusL),
        (0.0, LimitClass::Zero),
        (c.amplitude, LimitClass::PlusL),
    ] {
        if scaled.iter().all(|s| (s - target).abs() <= tol) {
            return class;
        }
    }
    LimitClass::Undetermined
}

/// Axisymmetric profile on `S^{N−1}`: `f(θ) = Σ_k c_k cos(kθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereProfile {
    pub coefficients: Vec<f64>,
}

impl SphereProfile {
    pub fn constant(value: f64) -> Self {
        SphereProfile {
            coefficients: vec![value],
        }
    }

    /// `amplitude · cos θ`.
    pub fn cosine(amplitude: f64) -> Self {
        SphereProfile {
            coefficients: vec![0.0, amplitude],
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.coefficients.iter().enumerate().map(|(k, c)| c * (k as f64 * theta).cos()).sum()
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| -c * k as f64 * (k as f64 * theta).sin())
            .sum()
    }

    /// `(θ, f(θ))` at `n + 1` equispaced nodes on `[0, π]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / n as f64;
                (th, self.value(th))
            })
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0)
    }

    /// Random nonconstant profile of `modes` cosine terms with `max |f| = fraction · L`.
    pub fn random(rng: &mut impl Rng, modes: usize, amplitude: f64) -> Self {
        let mut coefficients: Vec<f64> = (0..=modes.max(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if coefficients[1..].iter().all(|c| c.abs() < 1e-3) {
            coefficients[1] = 0.5;
        }
        let raw = SphereProfile { coefficients };
        let peak = raw.sample(4000).iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let fraction = rng.gen_range(0.05..0.999);
        SphereProfile {
            coefficients: raw.coefficients.iter().map(|c| c * fraction * amplitude / peak).collect(),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub const QUADRATURE_PANELS: usize = 256;
const QUADRATURE_ORDER: usize = 8;

/// `∫₀^π {f′² + f²(L^{p−1} − |f|^{p−1})} sin^{N−2}θ dθ`.
pub fn sphere_identity(f: &SphereProfile, c: &SpectralConstants) -> Result<f64> {
    let l = c.amplitude;
    let lp = c.amplitude_pow;
    let p = c.p();
    let weight_pow = c.dim() as i32 - 2;
    let rule = gauss_legendre(QUADRATURE_ORDER);
    let width = std::f64::consts::PI / QUADRATURE_PANELS as f64;
    let mut total = 0.0;
    for panel in 0..QUADRATURE_PANELS {
        let mid = (panel as f64 + 0.5) * width;
        for &(x, w) in &rule {
            let th = mid + 0.5 * width * x;
            let v = f.value(th);
            if v.abs() > l * (1.0 + 1e-12) {
                return Err(Error::BoundViolated {
                    r: th,
                    value: v.abs(),
                    bound: l,
                });
            }
            let d = f.derivative(th);
            let integrand = d * d + v * v * (lp - v.abs().powf(p - 1.0));
            total += 0.5 * width * w * integrand * th.sin().powi(weight_pow);
        }
    }
    Ok(total)
}
