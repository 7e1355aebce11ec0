//! Banded LU with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals. Storage reserves
/// `kl` extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i},{j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside declared band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solve `A x = b` in place, destroying `A`.
    pub fn solve_in_place(&mut self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        let upper = self.ku + self.kl;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut piv = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { row: k });
            }
            let last_col = (k + upper).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let c = self.slot(piv, j);
                    self.data.swap(a, c);
                }
                b.swap(k, piv);
            }
            let d = self.get(k, k);
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let factor = self.data[s] / d;
                if factor == 0.0 {
                    continue;
                }
                self.data[s] = 0.0;
                for j in k + 1..=last_col {
                    let src = self.data[self.slot(k, j)];
                    let dst = self.slot(i, j);
                    self.data[dst] -= factor * src;
                }
                b[i] -= factor * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + upper).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last_col {
                s -= self.data[self.slot(k, j)] * b[j];
            }
            b[k] = s / self.data[self.slot(k, k)];
        }
        Ok(())
    }
}
