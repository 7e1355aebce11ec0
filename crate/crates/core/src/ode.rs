//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-13,
            atol: 1e-30,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂ (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])], h: f64) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    /// Advance `y` from `t0` to `t1` (`t1 > t0`). `h` is the step-size guess on
    /// entry and the last accepted size on exit.
    pub fn advance<const D: usize, F>(&self, f: &F, t0: f64, y0: [f64; D], t1: f64, h: &mut f64) -> Result<[f64; D]>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        if !(*h > 0.0) {
            *h = (t1 - t0) * 1e-3;
        }
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integrator { r: t, reason: "step budget exhausted".into() });
            }
            let last = t + *h >= t1;
            let step = if last { t1 - t } else { *h };
            let k2 = f(t + C2 * step, &axpy(&y, &[(A21, &k1)], step));
            let k3 = f(t + C3 * step, &axpy(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(t + C4 * step, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
            let k5 = f(
                t + C5 * step,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step),
            );
            let k6 = f(
                t + step,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], step),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let k7 = f(t + step, &y_new);
            let mut err = 0.0f64;
            for i in 0..D {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                *h *= 0.25;
                if *h < 1e-14 * t.abs().max(1e-300) {
                    return Err(Error::Integrator { r: t, reason: "non-finite state".into() });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                y = y_new;
                k1 = k7;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || step >= *h {
                    *h = step * factor;
                }
            } else {
                *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if *h < 1e-15 * t.abs().max(1e-300) {
                    return Err(Error::Integrator { r: t, reason: "step size underflow".into() });
                }
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_to_tolerance() {
        let solver = Dopri5::default();
        let mut h = 0.01;
        let y = solver.advance(&|_t, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &mut h).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn oscillator_over_many_segments() {
        let solver = Dopri5::default();
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut y = [0.0, 1.0];
        let mut h = 0.1;
        for k in 0..100 {
            y = solver.advance(&f, k as f64 * 0.1, y, (k + 1) as f64 * 0.1, &mut h).unwrap();
        }
        assert!((y[0] - 10f64.sin()).abs() < 1e-12);
        assert!((y[1] - 10f64.cos()).abs() < 1e-12);
    }
}
