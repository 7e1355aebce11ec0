//! Kernel elements of the linearized operator at `Φ` and at `φ_∞`, and the
//! supersolution residual used by the sweeping comparisons.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::SpectralConstants;
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::steady::{shoot, SteadyStateSolution, SWITCH_RADIUS};
use crate::stencil::RadialLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `Z = Φ + rΦ′/m`.
    Regular,
    /// `Z_∞ = r^{−m−λ₁}`.
    Singular,
    /// `r^{−m−λ₂}`, or `ln r · r^{−m−λ₁}` at `p = p_c`.
    SingularSecond,
}

#[derive(Debug, Clone)]
pub struct KernelElement {
    pub kind: KernelKind,
    pub profile: RadialProfile,
}

impl KernelElement {
    fn checked(kind: KernelKind, profile: RadialProfile) -> Result<Self> {
        if kind != KernelKind::SingularSecond {
            let skip = usize::from(profile.singular_origin());
            for (r, &v) in profile.nodes().iter().zip(profile.values()).skip(skip) {
                if !(v > 0.0) {
                    return Err(Error::NonPositiveKernel { r: *r, value: v });
                }
            }
        }
        Ok(KernelElement { kind, profile })
    }

    pub fn values(&self) -> &[f64] {
        self.profile.values()
    }
}

/// `Z = Φ + rΦ′/m` from the solver's own derivative. In the far field this is
/// evaluated as `w + r w′/m` on the deviation `w = Φ − φ_∞`, which is exact
/// because `φ_∞ + rφ_∞′/m ≡ 0`.
pub fn kernel_from_steady(sol: &SteadyStateSolution) -> Result<KernelElement> {
    let m = sol.constants().m;
    let r = sol.phi().nodes();
    let (u, du) = (sol.phi().values(), sol.dphi().values());
    let (w, dw) = (sol.deviation(), sol.deviation_derivative());
    let values: Vec<f64> = (0..r.len())
        .map(|i| {
            if r[i] >= SWITCH_RADIUS {
                w[i] + r[i] * dw[i] / m
            } else {
                u[i] + r[i] * du[i] / m
            }
        })
        .collect();
    let profile = RadialProfile::new(sol.grid().clone(), values, "Z")?;
    KernelElement::checked(KernelKind::Regular, profile)
}

/// `Z` by integrating `Z″ + ((N−1)/r)Z′ + pΦ^{p−1}Z = 0` alongside `Φ`,
/// normalized so that it matches [`kernel_from_steady`] (`Z(0) = Φ(0)`).
pub fn kernel_by_ode(c: &SpectralConstants, sol: &SteadyStateSolution) -> Result<KernelElement> {
    let shot = shoot(c, sol.center(), sol.grid())?;
    let values: Vec<f64> = shot.iter().map(|n| sol.center() * n.z).collect();
    let profile = RadialProfile::new(sol.grid().clone(), values, "Z_ode")?;
    KernelElement::checked(KernelKind::Regular, profile)
}

/// `Z` at a single radius, with the Hermite/tail evaluation of the solution.
pub fn kernel_eval(sol: &SteadyStateSolution, r: f64) -> f64 {
    let m = sol.constants().m;
    if r >= SWITCH_RADIUS {
        let (w, dw) = sol.eval_deviation(r);
        w + r * dw / m
    } else {
        let (u, du) = sol.eval(r);
        u + r * du / m
    }
}

/// `Z_β(r) = β Z(β^{1/m} r)`, the kernel at the steady state `φ_β`.
pub fn scaled_kernel(sol: &SteadyStateSolution, beta: f64, grid: Arc<RadialGrid>) -> Result<KernelElement> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
    }
    let rel = beta / sol.center();
    let stretch = rel.powf(1.0 / sol.constants().m);
    let profile = RadialProfile::from_fn(grid, format!("Z_beta={beta}"), |r| rel * kernel_eval(sol, stretch * r))?;
    KernelElement::checked(KernelKind::Regular, profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularWhich {
    First,
    Second,
}

/// Closed-form kernel elements at `φ_∞`; the origin node is flagged unbounded.
pub fn singular_kernel(c: &SpectralConstants, grid: Arc<RadialGrid>, which: SingularWhich) -> Result<KernelElement> {
    let k1 = c.m + c.lambda1;
    let k2 = c.m + c.lambda2;
    let critical = c.is_critical();
    let f = |r: f64| match which {
        SingularWhich::First => r.powf(-k1),
        SingularWhich::Second if critical => r.ln() * r.powf(-k1),
        SingularWhich::Second => r.powf(-k2),
    };
    let values: Vec<f64> = grid.nodes().iter().map(|&r| if r > 0.0 { f(r) } else { 0.0 }).collect();
    let (kind, label) = match which {
        SingularWhich::First => (KernelKind::Singular, "Z_inf"),
        SingularWhich::Second => (KernelKind::SingularSecond, "Z_inf2"),
    };
    KernelElement::checked(kind, RadialProfile::with_singular_origin(grid, values, label)?)
}

/// Pointwise `Δ_h w + V w` for nodes in `[lo, hi]`, together with `|V w|`.
pub fn linear_residual(
    dim: u32,
    profile: &RadialProfile,
    potential: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Vec<(f64, f64, f64)> {
    let grid = profile.grid();
    let lap = RadialLaplacian::new(grid, dim);
    let v = profile.values();
    grid.nodes()
        .iter()
        .enumerate()
        .filter(|(i, &r)| r >= lo && r <= hi && *i + 1 < grid.len())
        .map(|(i, &r)| {
            let pot = potential(r) * v[i];
            (r, lap.apply_at(i, v) + pot, pot.abs())
        })
        .collect()
}

/// Max over `[lo, hi]` of `|Δ_h w + pφ_∞^{p−1} w| / |pφ_∞^{p−1} w|`.
pub fn singular_kernel_residual(c: &SpectralConstants, kernel: &KernelElement, lo: f64, hi: f64) -> f64 {
    let p = c.p();
    linear_residual(c.dim(), &kernel.profile, |r| p * c.singular_value(r).powf(p - 1.0), lo, hi)
        .into_iter()
        .map(|(_, res, scale)| res.abs() / scale)
        .fold(0.0, f64::max)
}

/// Max-norm of `Δ_h Z + pΦ^{p−1} Z` over nodes with `r ≤ r_limit`.
pub fn regular_kernel_residual(sol: &SteadyStateSolution, kernel: &KernelElement, r_limit: f64) -> f64 {
    let p = sol.constants().p();
    let grid = sol.grid();
    let phi = sol.phi().values();
    let lap = RadialLaplacian::new(grid, sol.constants().dim());
    let z = kernel.values();
    grid.nodes()
        .iter()
        .enumerate()
        .take(grid.len() - 1)
        .filter(|(_, &r)| r <= r_limit)
        .map(|(i, _)| (lap.apply_at(i, z) + p * phi[i].powf(p - 1.0) * z[i]).abs())
        .fold(0.0, f64::max)
}

/// `p(bound^{p−1} − |u|^{p−1}) Z`, the exact supersolution gap of `Z` along a
/// flow bounded by `bound`.
pub fn supersolution_residual(
    c: &SpectralConstants,
    z: &KernelElement,
    u: &RadialProfile,
    bound: &RadialProfile,
) -> Result<RadialProfile> {
    let p = c.p();
    let n = z.values().len();
    if u.values().len() != n || bound.values().len() != n {
        return Err(Error::invalid("u", "profiles must share the kernel's grid"));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = z.profile.nodes()[i];
        let (ui, bi, zi) = (u.values()[i].abs(), bound.values()[i], z.values()[i]);
        if !zi.is_finite() || !bi.is_finite() {
            // unbounded origin of a singular bound or kernel
            out.push(0.0);
            continue;
        }
        if ui > bi {
            return Err(Error::BoundViolated { r, value: ui, bound: bi });
        }
        out.push(p * (bi.powf(p - 1.0) - ui.powf(p - 1.0)) * zi);
    }
    RadialProfile::new(z.profile.grid().clone(), out, "supersolution_residual")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::steady::{scale_family, solve_ground_profile};
    use std::sync::OnceLock;

    fn setup() -> &'static (SteadyStateSolution, KernelElement) {
        static S: OnceLock<(SteadyStateSolution, KernelElement)> = OnceLock::new();
        S.get_or_init(|| {
            let c = SpectralConstants::for_pair(13, 3.0).unwrap();
            let sol = solve_ground_profile(&c, &GridSpec::default()).unwrap();
            let z = kernel_from_steady(&sol).unwrap();
            (sol, z)
        })
    }

    #[test]
    fn regular_kernel_basic() {
        let (sol, z) = setup();
        assert_eq!(z.values()[0], 1.0);
        assert!(z.values().iter().all(|&v| v > 0.0));
        assert!(regular_kernel_residual(sol, z, 0.5 * sol.r_max()) < 1e-6);
    }

    #[test]
    fn two_routes_agree() {
        let (sol, z) = setup();
        let zo = kernel_by_ode(sol.constants(), sol).unwrap();
        let mut worst = 0.0f64;
        for (i, &r) in sol.phi().nodes().iter().enumerate() {
            if r <= 5e3 {
                worst = worst.max(((z.values()[i] - zo.values()[i]) / zo.values()[i]).abs());
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn tail_at_window_edge() {
        let (sol, z) = setup();
        let c = sol.constants();
        let edge = sol.tail().window.1;
        let target = c.lambda1 / c.m * sol.tail().coefficient.abs();
        let got = kernel_eval(sol, edge) * edge.powf(c.kernel_decay());
        assert!((got / target - 1.0).abs() < 0.05, "{got} vs {target}");
        assert!(z.values().len() == sol.grid().len());
    }

    #[test]
    fn kernel_is_alpha_derivative() {
        let (sol, z) = setup();
        let h = 1e-4;
        let grid = sol.grid().clone();
        let up = scale_family(sol, 1.0 + h, grid.clone()).unwrap();
        let dn = scale_family(sol, 1.0 - h, grid).unwrap();
        for i in 0..z.values().len() {
            let fd = (up.values()[i] - dn.values()[i]) / (2.0 * h);
            assert!((fd - z.values()[i]).abs() < 1e-6, "node {i}");
        }
    }

    #[test]
    fn singular_kernel_values() {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        let grid = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(400.0)).unwrap());
        let k = singular_kernel(&c, grid.clone(), SingularWhich::First).unwrap();
        let i = grid.nodes().iter().position(|&r| (r - 10.0).abs() < 1e-12);
        if let Some(i) = i {
            assert!((k.values()[i] - 1e-5).abs() < 1e-18);
        }
        assert!(singular_kernel_residual(&c, &k, 1.0, 100.0) < 1e-6);
        let k2 = singular_kernel(&c, grid, SingularWhich::Second).unwrap();
        assert!(singular_kernel_residual(&c, &k2, 1.0, 100.0) < 1e-6);
    }

    #[test]
    fn critical_second_element_changes_sign() {
        let pc = crate::constants::critical_exponents(11).joseph_lundgren.finite().unwrap();
        let c = SpectralConstants::for_pair(11, pc).unwrap();
        let grid = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(50.0)).unwrap());
        let k = singular_kernel(&c, grid, SingularWhich::Second).unwrap();
        for (r, v) in k.profile.nodes()[1..].iter().zip(&k.values()[1..]) {
            assert_eq!(v.signum(), if *r < 1.0 { -1.0 } else if *r > 1.0 { 1.0 } else { v.signum() });
        }
        assert!(singular_kernel_residual(&c, &k, 2.0, 40.0) < 1e-6);
    }

    #[test]
    fn supersolution_cases() {
        let (sol, z) = setup();
        let c = sol.constants();
        let phi = sol.phi();
        let same = supersolution_residual(c, z, phi, phi).unwrap();
        assert!(same.values().iter().all(|&v| v == 0.0));
        let zero = phi.map("zero", |_, _| 0.0).unwrap();
        let full = supersolution_residual(c, z, &zero, phi).unwrap();
        assert!(full.values().iter().all(|&v| v > 0.0));
        let half = scale_family(sol, 0.5, sol.grid().clone()).unwrap();
        let gap = supersolution_residual(c, z, &half, phi).unwrap();
        assert!(gap.values().iter().all(|&v| v > 0.0));
        let two = scale_family(sol, 2.0, sol.grid().clone()).unwrap();
        assert!(matches!(supersolution_residual(c, z, &two, phi), Err(Error::BoundViolated { .. })));
    }
}
