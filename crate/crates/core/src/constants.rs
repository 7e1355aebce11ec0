//! Critical exponents and spectral constants of `Δu + |u|^{p-1}u = 0`.
//!
//! Every other module reads `m`, `L`, `λ₁`, `λ₂` from a [`SpectralConstants`]
//! built once per [`ProblemParams`]; nothing downstream re-derives them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative band around `p_c` inside which `p` is treated as exactly critical.
pub const CRITICAL_BAND: f64 = 1e-9;

/// A critical exponent that may be infinite (`p_S` for `N ≤ 2`, `p_c` for `N ≤ 10`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Unbounded,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Exponent::Unbounded)
    }

    /// Total comparison of a real number against this exponent.
    pub fn cmp_real(self, x: f64) -> Ordering {
        match self {
            Exponent::Finite(v) => v.total_cmp(&x),
            Exponent::Unbounded => Ordering::Greater,
        }
    }
}

impl Eq for Exponent {}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a.total_cmp(b),
            (Exponent::Finite(_), Exponent::Unbounded) => Ordering::Less,
            (Exponent::Unbounded, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Unbounded, Exponent::Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Unbounded => f.write_str("inf"),
        }
    }
}

// JSON has no infinity; the unbounded variant travels as the string "inf".
impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Exponent::Unbounded),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub fujita: f64,
    pub sobolev: Exponent,
    pub joseph_lundgren: Exponent,
}

/// Fujita, Sobolev and Joseph–Lundgren exponents for dimension `dim`.
pub fn critical_exponents(dim: u32) -> CriticalExponents {
    let n = dim as f64;
    let sobolev = if dim >= 3 {
        Exponent::Finite((n + 2.0) / (n - 2.0))
    } else {
        Exponent::Unbounded
    };
    let joseph_lundgren = match joseph_lundgren_forms(dim) {
        Some((rational, _)) => Exponent::Finite(rational),
        None => Exponent::Unbounded,
    };
    CriticalExponents {
        fujita: 1.0 + 2.0 / n,
        sobolev,
        joseph_lundgren,
    }
}

/// Both closed forms of `p_c(N)` for `N ≥ 11`: the rational expression and
/// `1 + 4/(N − 4 − 2√(N−1))`.
pub fn joseph_lundgren_forms(dim: u32) -> Option<(f64, f64)> {
    if dim <= 10 {
        return None;
    }
    let n = dim as f64;
    let s = (n - 1.0).sqrt();
    let rational = ((n - 2.0).powi(2) - 4.0 * n + 8.0 * s) / ((n - 2.0) * (n - 10.0));
    let shifted = 1.0 + 4.0 / (n - 4.0 - 2.0 * s);
    Some((rational, shifted))
}

/// `m = 2/(p − 1)`.
pub fn decay_rate(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::invalid("exponent", format!("p must be a finite number > 1, got {p}")));
    }
    Ok(2.0 / (p - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: u32,
    pub p: f64,
}

impl ProblemParams {
    pub fn new(dim: u32, p: f64) -> Result<Self> {
        let params = ProblemParams { dim, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::invalid("dim", format!("N must be at least 3, got {}", self.dim)));
        }
        decay_rate(self.p)?;
        Ok(())
    }

    pub fn exponents(&self) -> CriticalExponents {
        critical_exponents(self.dim)
    }

    pub fn regime(&self) -> Regime {
        match critical_exponents(self.dim).joseph_lundgren {
            Exponent::Unbounded => Regime::BelowCritical,
            Exponent::Finite(pc) => {
                if (self.p - pc).abs() <= CRITICAL_BAND * pc {
                    Regime::Critical
                } else if self.p > pc {
                    Regime::Supercritical
                } else {
                    Regime::BelowCritical
                }
            }
        }
    }

    /// True iff `p ≥ p_c(N)` (with the critical band counted as equality).
    pub fn is_supercritical(&self) -> bool {
        self.regime() != Regime::BelowCritical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowCritical,
    /// `p = p_c` within [`CRITICAL_BAND`]: repeated root, logarithmic kernel.
    Critical,
    Supercritical,
}

/// `L = (m(N − 2 − m))^{1/(p−1)}`, the amplitude of `φ_∞ = L r^{−m}`.
pub fn singular_amplitude(params: &ProblemParams) -> Result<f64> {
    params.validate()?;
    let m = decay_rate(params.p)?;
    let gap = params.dim as f64 - 2.0 - m;
    if !(gap > 0.0) {
        return Err(Error::invalid(
            "exponent",
            format!("N − 2 − m = {gap} must be positive for the singular amplitude"),
        ));
    }
    Ok((m * gap).powf(1.0 / (params.p - 1.0)))
}

/// Roots of `λ² − (N−2−2m)λ + 2(N−2−m) = 0`, ordered `λ₁ ≤ λ₂`.
pub fn lambda_roots(params: &ProblemParams) -> Result<(f64, f64)> {
    params.validate()?;
    let n = params.dim as f64;
    let m = decay_rate(params.p)?;
    let sum = n - 2.0 - 2.0 * m;
    let product = 2.0 * (n - 2.0 - m);
    match params.regime() {
        Regime::BelowCritical => Err(Error::DiscriminantNegative {
            dim: params.dim,
            p: params.p,
            pc: critical_exponents(params.dim)
                .joseph_lundgren
                .finite()
                .unwrap_or(f64::INFINITY),
        }),
        Regime::Critical => Ok((0.5 * sum, 0.5 * sum)),
        Regime::Supercritical => {
            let disc = (sum * sum - 4.0 * product).max(0.0);
            let root = disc.sqrt();
            let lambda2 = 0.5 * (sum + root);
            // product / λ₂ avoids cancellation in (sum − √disc)/2
            let lambda1 = product / lambda2;
            Ok((lambda1, lambda2))
        }
    }
}

/// All constants for one `(N, p)` with `p ≥ p_c(N)`, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    pub params: ProblemParams,
    pub exponents: CriticalExponents,
    pub regime: Regime,
    pub m: f64,
    pub amplitude: f64,
    /// `L^{p−1} = m(N − 2 − m)`, kept exact rather than re-powered.
    pub amplitude_pow: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SpectralConstants {
    pub fn new(params: ProblemParams) -> Result<Self> {
        params.validate()?;
        let m = decay_rate(params.p)?;
        let (lambda1, lambda2) = lambda_roots(&params)?;
        let amplitude = singular_amplitude(&params)?;
        Ok(SpectralConstants {
            params,
            exponents: critical_exponents(params.dim),
            regime: params.regime(),
            m,
            amplitude,
            amplitude_pow: m * (params.dim as f64 - 2.0 - m),
            lambda1,
            lambda2,
        })
    }

    pub fn for_pair(dim: u32, p: f64) -> Result<Self> {
        Self::new(ProblemParams::new(dim, p)?)
    }

    pub fn dim(&self) -> u32 {
        self.params.dim
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn is_critical(&self) -> bool {
        self.regime == Regime::Critical
    }

    /// Decay exponent `m + λ₁` of the leading kernel element at `φ_∞`.
    pub fn kernel_decay(&self) -> f64 {
        self.m + self.lambda1
    }

    /// `γ(γ − N + 2) + p L^{p−1}`: zero exactly when `r^{−γ}` is in the radial
    /// kernel of `Δ + p φ_∞^{p−1}`.
    pub fn indicial_residual(&self, gamma: f64) -> f64 {
        gamma * (gamma - self.params.dim as f64 + 2.0) + self.params.p * self.amplitude_pow
    }

    /// `φ_∞(r) = L r^{−m}`.
    pub fn singular_value(&self, r: f64) -> f64 {
        self.amplitude * r.powf(-self.m)
    }

    pub fn report(&self) -> ConstantsRecord {
        ConstantsRecord {
            dim: self.params.dim,
            p: self.params.p,
            p_fujita: self.exponents.fujita,
            p_sobolev: self.exponents.sobolev,
            p_c: self.exponents.joseph_lundgren,
            m: self.m,
            amplitude: self.amplitude,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
        }
    }
}

/// One row of the `constants` table (JSON record or CSV row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    #[serde(rename = "N")]
    pub dim: u32,
    pub p: f64,
    #[serde(rename = "pF")]
    pub p_fujita: f64,
    #[serde(rename = "pS")]
    pub p_sobolev: Exponent,
    #[serde(rename = "pc")]
    pub p_c: Exponent,
    pub m: f64,
    #[serde(rename = "L")]
    pub amplitude: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ConstantsRecord {
    pub const CSV_HEADER: &'static str = "N,p,pF,pS,pc,m,L,lambda1,lambda2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dim,
            self.p,
            self.p_fujita,
            self.p_sobolev,
            self.p_c,
            self.m,
            self.amplitude,
            self.lambda1,
            self.lambda2
        )
    }
}

/// Identity residuals for one `(N, p)`; the checks behind the exponent table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub pc_forms_gap: f64,
    pub vieta_sum_gap: f64,
    pub vieta_product_gap: f64,
    pub amplitude_gap: f64,
    pub indicial_first: f64,
    pub indicial_second: f64,
    pub lambda1: f64,
}

impl IdentityCheck {
    pub fn evaluate(c: &SpectralConstants) -> Self {
        let n = c.params.dim as f64;
        let pc_forms_gap = joseph_lundgren_forms(c.params.dim)
            .map(|(a, b)| (a - b).abs())
            .unwrap_or(f64::NAN);
        IdentityCheck {
            pc_forms_gap,
            vieta_sum_gap: (c.lambda1 + c.lambda2 - (n - 2.0 - 2.0 * c.m)).abs(),
            vieta_product_gap: (c.lambda1 * c.lambda2 - 2.0 * (n - 2.0 - c.m)).abs(),
            amplitude_gap: (c.amplitude.powf(c.params.p - 1.0) - c.amplitude_pow).abs(),
            indicial_first: c.indicial_residual(c.m + c.lambda1).abs(),
            indicial_second: c.indicial_residual(c.m + c.lambda2).abs(),
            lambda1: c.lambda1,
        }
    }

    pub fn passes(&self, tol_identity: f64, tol_indicial: f64) -> bool {
        self.pc_forms_gap < tol_identity
            && self.vieta_sum_gap < tol_identity
            && self.vieta_product_gap < tol_identity
            && self.indicial_first < tol_indicial
            && self.indicial_second < tol_indicial
            && self.lambda1 > 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_dimensions_have_unbounded_exponents() {
        let e = critical_exponents(1);
        assert_eq!(e.fujita, 3.0);
        assert!(e.sobolev.is_unbounded());
        assert!(e.joseph_lundgren.is_unbounded());
        assert!(critical_exponents(10).joseph_lundgren.is_unbounded());
        assert_eq!(critical_exponents(3).sobolev, Exponent::Finite(5.0));
    }

    #[test]
    fn pc_at_eleven() {
        let (a, b) = joseph_lundgren_forms(11).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((a - 6.92202).abs() < 1e-5, "pc(11) = {a}");
    }

    #[test]
    fn unbounded_compares_above_everything() {
        assert!(Exponent::Unbounded > Exponent::Finite(1e300));
        assert_eq!(Exponent::Unbounded.cmp_real(f64::MAX), Ordering::Greater);
        assert_eq!(Exponent::Finite(2.0).cmp_real(3.0), Ordering::Less);
    }

    #[test]
    fn decay_rate_values() {
        assert_eq!(decay_rate(3.0).unwrap(), 1.0);
        assert_eq!(decay_rate(2.0).unwrap(), 2.0);
        let ps = critical_exponents(11).sobolev.finite().unwrap();
        assert!((decay_rate(ps).unwrap() - 4.5).abs() < 1e-12);
        assert!(decay_rate(1.0).is_err());
        assert!(decay_rate(0.5).is_err());
    }

    #[test]
    fn amplitude_at_13_3() {
        let l = singular_amplitude(&ProblemParams::new(13, 3.0).unwrap()).unwrap();
        assert!((l - 10f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn amplitude_at_sobolev_exponent() {
        let ps = critical_exponents(11).sobolev.finite().unwrap();
        let l = singular_amplitude(&ProblemParams::new(11, ps).unwrap()).unwrap();
        let expected = (4.5f64 * 4.5).powf(1.0 / (ps - 1.0));
        assert!((l - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn amplitude_rejects_nonpositive_gap() {
        // N = 3, p = 2: m = 2, N − 2 − m = −1
        let err = singular_amplitude(&ProblemParams::new(3, 2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "exponent", .. }));
    }

    #[test]
    fn integer_roots_at_13_3() {
        let c = SpectralConstants::for_pair(13, 3.0).unwrap();
        assert!((c.lambda1 - 4.0).abs() < 1e-14);
        assert!((c.lambda2 - 5.0).abs() < 1e-14);
        // γ = m + λ₁ = 5: 5·(5 − 11) + 3·10 = 0
        assert!(c.indicial_residual(5.0).abs() < 1e-12);
        assert!(c.indicial_residual(6.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_root_at_pc() {
        for n in [11, 12, 20, 50] {
            let pc = critical_exponents(n).joseph_lundgren.finite().unwrap();
            let c = SpectralConstants::for_pair(n, pc).unwrap();
            assert_eq!(c.regime, Regime::Critical);
            assert_eq!(c.lambda1, c.lambda2);
            let expected = 0.5 * (n as f64 - 2.0 - 2.0 * c.m);
            assert!((c.lambda1 - expected).abs() < 1e-12);
            assert!(c.lambda1 > 2.0);
        }
    }

    #[test]
    fn discriminant_negative_below_pc() {
        let pc = critical_exponents(13).joseph_lundgren.finite().unwrap();
        let below = ProblemParams::new(13, pc * (1.0 - 2e-9)).unwrap();
        assert!(matches!(lambda_roots(&below), Err(Error::DiscriminantNegative { .. })));
        let inside = ProblemParams::new(13, pc * (1.0 - 0.5e-9)).unwrap();
        assert!(lambda_roots(&inside).is_ok());
        let low_dim = ProblemParams::new(10, 50.0).unwrap();
        assert!(matches!(lambda_roots(&low_dim), Err(Error::DiscriminantNegative { .. })));
    }

    #[test]
    fn regime_flag_requires_dimension_eleven() {
        for n in 3..=10 {
            assert!(!ProblemParams::new(n, 1e6).unwrap().is_supercritical());
        }
        assert!(ProblemParams::new(11, 7.0).unwrap().is_supercritical());
        assert!(!ProblemParams::new(11, 6.9).unwrap().is_supercritical());
    }

    #[test]
    fn exponent_json_round_trip() {
        let rec = SpectralConstants::for_pair(13, 3.0).unwrap().report();
        let text = serde_json::to_string(&rec).unwrap();
        let back: ConstantsRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(rec, back);
        let low = serde_json::to_string(&critical_exponents(2)).unwrap();
        assert!(low.contains("\"inf\""));
    }
}
