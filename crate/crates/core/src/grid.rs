//! Radial grids and sampled radial functions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layout of a stretched grid: uniform spacing on `[0, core_radius]`, then
/// geometric growth out to `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    pub core_radius: f64,
    pub core_spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        // ~2000 nodes out to 1e4
        GridSpec {
            r_max: 1e4,
            core_radius: 1.0,
            core_spacing: 0.005,
        }
    }
}

impl GridSpec {
    pub fn with_r_max(r_max: f64) -> Self {
        GridSpec {
            r_max,
            ..GridSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return Err(Error::invalid("r_max", format!("must be positive, got {}", self.r_max)));
        }
        if !(self.core_radius > 0.0) {
            return Err(Error::invalid("core_radius", "must be positive"));
        }
        if !(self.core_spacing > 0.0) || self.core_spacing > self.core_radius {
            return Err(Error::invalid(
                "core_spacing",
                "must be positive and no larger than core_radius",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    /// Geometric ratio between successive spacings beyond the core (1 if uniform).
    stretch: f64,
}

impl RadialGrid {
    pub fn stretched(spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        let core_end = spec.core_radius.min(spec.r_max);
        let n_core = (core_end / spec.core_spacing).round().max(4.0) as usize;
        let mut nodes: Vec<f64> = (0..=n_core)
            .map(|i| core_end * i as f64 / n_core as f64)
            .collect();
        let mut stretch = 1.0;
        if spec.r_max > core_end {
            let h = core_end / n_core as f64;
            let target_ratio = 1.0 + h / core_end;
            let span = (spec.r_max / core_end).ln();
            let n_geo = (span / target_ratio.ln()).ceil().max(1.0) as usize;
            stretch = (span / n_geo as f64).exp();
            for k in 1..n_geo {
                nodes.push(core_end * (span * k as f64 / n_geo as f64).exp());
            }
            nodes.push(spec.r_max);
        }
        Ok(RadialGrid { nodes, stretch })
    }

    pub fn uniform(r_max: f64, intervals: usize) -> Result<Self> {
        if !(r_max > 0.0) || intervals < 4 {
            return Err(Error::invalid("grid", "uniform grid needs r_max > 0 and at least 4 intervals"));
        }
        let nodes = (0..=intervals)
            .map(|i| r_max * i as f64 / intervals as f64)
            .collect();
        Ok(RadialGrid { nodes, stretch: 1.0 })
    }

    /// Arbitrary nodes: strictly increasing, starting at exactly 0.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 5 {
            return Err(Error::invalid("grid", "need at least 5 nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid("grid", "first node must be exactly 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.iter().all(|r| r.is_finite()) {
            return Err(Error::invalid("grid", "nodes must be finite and strictly increasing"));
        }
        Ok(RadialGrid { nodes, stretch: 1.0 })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// Indices of nodes inside `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.nodes.partition_point(|&r| r < lo);
        let end = self.nodes.partition_point(|&r| r <= hi);
        start..end.max(start)
    }

    /// Index `i` with `nodes[i] ≤ r < nodes[i+1]`, clamped to the last interval.
    pub fn locate(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= r);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }
}

/// A radial function sampled on a grid.
///
/// Values are finite at every node, except that a profile may carry a
/// singular origin (`φ_∞`, `Z_∞`), in which case `values[0]` is `+∞` and
/// [`RadialProfile::singular_origin`] is set.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    label: String,
    singular_origin: bool,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("{} values for {} nodes", values.len(), grid.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "values",
                format!("non-finite value at r = {}", grid.nodes()[i]),
            ));
        }
        Ok(RadialProfile {
            grid,
            values,
            label: label.into(),
            singular_origin: false,
        })
    }

    /// Profile with an unbounded value at `r = 0`; `values[0]` is replaced by `+∞`.
    pub fn with_singular_origin(
        grid: Arc<RadialGrid>,
        mut values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("values", "length mismatch"));
        }
        values[0] = 0.0;
        let mut profile = RadialProfile::new(grid, values, label)?;
        profile.values[0] = f64::INFINITY;
        profile.singular_origin = true;
        Ok(profile)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialProfile::new(grid, values, label)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singular_origin(&self) -> bool {
        self.singular_origin
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = self.nodes().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        if self.singular_origin {
            values[0] = 0.0;
            let mut out = RadialProfile::new(self.grid.clone(), values, label)?;
            out.values[0] = f64::INFINITY;
            out.singular_origin = true;
            return Ok(out);
        }
        RadialProfile::new(self.grid.clone(), values, label)
    }

    /// Index range of nodes with finite values.
    pub fn finite_range(&self) -> std::ops::Range<usize> {
        usize::from(self.singular_origin)..self.values.len()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values[self.finite_range()].iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Monotone cubic (PCHIP) evaluation at `r` inside the grid.
    pub fn sample(&self, r: f64) -> f64 {
        Pchip::new(self.nodes(), &self.values, self.singular_origin).eval(r)
    }

    /// Resample onto `grid` by monotone cubic interpolation.
    ///
    /// Nodes beyond this profile's range are rejected with `DomainExceeded`.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> Result<Self> {
        if grid.r_max() > self.grid.r_max() * (1.0 + 1e-12) {
            return Err(Error::DomainExceeded {
                needed: grid.r_max(),
                available: self.grid.r_max(),
            });
        }
        let interp = Pchip::new(self.nodes(), &self.values, self.singular_origin);
        let values: Vec<f64> = grid.nodes().iter().map(|&r| interp.eval(r)).collect();
        if self.singular_origin {
            RadialProfile::with_singular_origin(grid, values, self.label.clone())
        } else {
            RadialProfile::new(grid, values, self.label.clone())
        }
    }

    pub fn max_abs_diff(&self, other: &RadialProfile) -> f64 {
        let range = self.finite_range().start.max(other.finite_range().start)..self.values.len();
        range
            .map(|i| (self.values[i] - other.values[i]).abs())
            .fold(0.0, f64::max)
    }

    /// CSV text with header `r,value`, shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 40);
        out.push_str("r,value\n");
        for (r, v) in self.nodes().iter().zip(&self.values) {
            if v.is_infinite() {
                out.push_str(&format!("{r},inf\n"));
            } else {
                out.push_str(&format!("{r},{v}\n"));
            }
        }
        out
    }

    pub fn from_csv(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('r')) {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(r), Some(v)) = (parts.next(), parts.next()) else {
                return Err(Error::Csv { line: line_no + 1, reason: "expected two columns".into() });
            };
            let parse = |s: &str| -> Result<f64> {
                match s.trim() {
                    "inf" => Ok(f64::INFINITY),
                    t => t.parse::<f64>().map_err(|e| Error::Csv {
                        line: line_no + 1,
                        reason: e.to_string(),
                    }),
                }
            };
            nodes.push(parse(r)?);
            values.push(parse(v)?);
        }
        let grid = Arc::new(RadialGrid::from_nodes(nodes)?);
        if values[0].is_infinite() {
            RadialProfile::with_singular_origin(grid, values, label)
        } else {
            RadialProfile::new(grid, values, label)
        }
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolant.
pub(crate) struct Pchip<'a> {
    x: &'a [f64],
    y: &'a [f64],
    d: Vec<f64>,
    first: usize,
}

impl<'a> Pchip<'a> {
    pub(crate) fn new(x: &'a [f64], y: &'a [f64], skip_origin: bool) -> Self {
        let first = usize::from(skip_origin);
        let n = x.len();
        let mut d = vec![0.0; n];
        let xs = &x[first..];
        let ys = &y[first..];
        let k = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..k - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        for i in 1..k - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[first + i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s.signum() != d0.signum() {
                s = 0.0;
            } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
                s = 3.0 * d0;
            }
            s
        };
        if k > 2 {
            d[first] = end(h[0], h[1], delta[0], delta[1]);
            d[first + k - 1] = end(h[k - 2], h[k - 3], delta[k - 2], delta[k - 3]);
        } else {
            d[first] = delta[0];
            d[first + 1] = delta[0];
        }
        Pchip { x, y, d, first }
    }

    pub(crate) fn eval(&self, r: f64) -> f64 {
        let x = &self.x[self.first..];
        let k = x.partition_point(|&v| v <= r).saturating_sub(1).min(x.len() - 2);
        let i = self.first + k;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    }
}

/// Quintic Hermite interpolation on `[x0, x1]` from value, first and second
/// derivatives at both ends. Returns value and first derivative.
pub(crate) fn quintic_hermite(x0: f64, x1: f64, a: [f64; 3], b: [f64; 3], x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    // Basis on [0,1] for (y0, y0', y0'', y1, y1', y1'') with derivatives scaled by h.
    let (y0, d0, s0) = (a[0], a[1] * h, a[2] * h * h);
    let (y1, d1, s1) = (b[0], b[1] * h, b[2] * h * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let dh2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let dh3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let dh5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let v = h0 * y0 + h1 * d0 + h2 * s0 + h3 * y1 + h4 * d1 + h5 * s1;
    let dv = (dh0 * y0 + dh1 * d0 + dh2 * s0 + dh3 * y1 + dh4 * d1 + dh5 * s1) / h;
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_layout() {
        let g = RadialGrid::stretched(&GridSpec::default()).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.r_max(), 1e4);
        assert!(g.len() > 1800 && g.len() < 2200, "{} nodes", g.len());
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!((g.nodes()[200] - 1.0).abs() < 1e-15);
        assert!((g.stretch() - 1.005).abs() < 1e-4);
    }

    #[test]
    fn from_nodes_validates() {
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 2.0, 3.0, 4.0]).is_ok());
        assert!(RadialGrid::from_nodes(vec![0.1, 1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0, 1.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn pchip_preserves_monotone_data_and_order() {
        let g = Arc::new(RadialGrid::uniform(10.0, 20).unwrap());
        let lo = RadialProfile::from_fn(g.clone(), "lo", |r| 1.0 / (1.0 + r * r)).unwrap();
        let hi = RadialProfile::from_fn(g.clone(), "hi", |r| 2.0 / (1.0 + r * r)).unwrap();
        let fine = Arc::new(RadialGrid::uniform(10.0, 997).unwrap());
        let lo_f = lo.resample(fine.clone()).unwrap();
        let hi_f = hi.resample(fine).unwrap();
        assert!(lo_f.values().windows(2).all(|w| w[1] <= w[0]));
        assert!(lo_f.values().iter().zip(hi_f.values()).all(|(a, b)| a < b));
    }

    #[test]
    fn resample_rejects_extension() {
        let g = Arc::new(RadialGrid::uniform(10.0, 20).unwrap());
        let p = RadialProfile::from_fn(g, "x", |r| r).unwrap();
        let wide = Arc::new(RadialGrid::uniform(11.0, 20).unwrap());
        assert!(matches!(p.resample(wide), Err(Error::DomainExceeded { .. })));
    }

    #[test]
    fn quintic_hermite_exact_on_quintics() {
        let f = |x: f64| [x.powi(5) - 2.0 * x * x, 5.0 * x.powi(4) - 4.0 * x, 20.0 * x.powi(3) - 4.0];
        let (v, d) = quintic_hermite(1.0, 1.5, f(1.0), f(1.5), 1.2);
        assert!((v - f(1.2)[0]).abs() < 1e-13);
        assert!((d - f(1.2)[1]).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_keeps_bits() {
        let g = Arc::new(RadialGrid::stretched(&GridSpec::with_r_max(50.0)).unwrap());
        let p = RadialProfile::from_fn(g, "f", |r| (1.0 + r).ln().sin() / 3.0).unwrap();
        let back = RadialProfile::from_csv(&p.to_csv(), "f").unwrap();
        assert_eq!(back.values(), p.values());
        assert_eq!(back.nodes(), p.nodes());
    }
}
