//! Five-point finite-difference operators on radial grids.
//!
//! Rows are stored as a window of five consecutive columns. Nodes that would
//! fall below `r = 0` are mirrored (`u(−r) = u(r)`) and folded back onto the
//! grid; at the origin the Laplacian is `N·u″(0)`.

use crate::grid::RadialGrid;

/// Fornberg's algorithm: weights for derivatives `0..=max_order` at `x0`.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilRow {
    pub start: usize,
    pub weights: [f64; 5],
}

impl StencilRow {
    pub fn apply(&self, u: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&u[self.start..self.start + 5])
            .map(|(w, v)| w * v)
            .sum()
    }
}

fn window_for(i: usize, n: usize) -> (usize, [isize; 5]) {
    let lo = i as isize - 2;
    let lo = lo.min(n as isize - 5);
    let idx = [lo, lo + 1, lo + 2, lo + 3, lo + 4];
    (lo.max(0) as usize, idx)
}

/// Build one row for node `i`: `combine(w1, w2)` maps first/second-derivative
/// weights at a point to the operator weight.
fn build_row(grid: &RadialGrid, i: usize, combine: impl Fn(f64, f64) -> f64) -> StencilRow {
    let r = grid.nodes();
    let n = r.len();
    let (start, idx) = window_for(i, n);
    let xs: Vec<f64> = idx
        .iter()
        .map(|&k| if k < 0 { -r[(-k) as usize] } else { r[k as usize] })
        .collect();
    let w = fornberg_weights(r[i], &xs, 2);
    let mut weights = [0.0; 5];
    for (slot, &k) in idx.iter().enumerate() {
        let col = k.unsigned_abs();
        weights[col - start] += combine(w[1][slot], w[2][slot]);
    }
    StencilRow { start, weights }
}

/// Discrete `u″ + ((N−1)/r) u′` with the origin row `N·u″(0)`.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    rows: Vec<StencilRow>,
}

impl RadialLaplacian {
    pub fn new(grid: &RadialGrid, dim: u32) -> Self {
        let n_dim = dim as f64;
        let r = grid.nodes();
        let rows = (0..r.len())
            .map(|i| {
                if i == 0 {
                    build_row(grid, 0, |_, w2| n_dim * w2)
                } else {
                    let coef = (n_dim - 1.0) / r[i];
                    build_row(grid, i, |w1, w2| w2 + coef * w1)
                }
            })
            .collect();
        RadialLaplacian { rows }
    }

    pub fn rows(&self) -> &[StencilRow] {
        &self.rows
    }

    pub fn apply_at(&self, i: usize, u: &[f64]) -> f64 {
        self.rows[i].apply(u)
    }
}

/// Discrete first derivative, odd-symmetric about the origin (`u′(0) = 0` data).
pub fn first_derivative_rows(grid: &RadialGrid) -> Vec<StencilRow> {
    (0..grid.len()).map(|i| build_first_row(grid, i)).collect()
}

fn build_first_row(grid: &RadialGrid, i: usize) -> StencilRow {
    // For an odd function (a radial derivative) mirrored nodes carry −u.
    let r = grid.nodes();
    let n = r.len();
    let (start, idx) = window_for(i, n);
    let xs: Vec<f64> = idx
        .iter()
        .map(|&k| if k < 0 { -r[(-k) as usize] } else { r[k as usize] })
        .collect();
    let w = fornberg_weights(r[i], &xs, 1);
    let mut weights = [0.0; 5];
    for (slot, &k) in idx.iter().enumerate() {
        let col = k.unsigned_abs();
        let sign = if k < 0 { -1.0 } else { 1.0 };
        weights[col - start] += sign * w[1][slot];
    }
    StencilRow { start, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn fornberg_central_second_derivative() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expected = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_of_even_quartic_is_exact() {
        // u = r⁴ − 3r²: Δu = 4(N+2) r² − 6N, exact for five-point stencils.
        let grid = RadialGrid::stretched(&GridSpec::with_r_max(20.0)).unwrap();
        let dim = 7;
        let lap = RadialLaplacian::new(&grid, dim);
        let u: Vec<f64> = grid.nodes().iter().map(|r| r.powi(4) - 3.0 * r * r).collect();
        for (i, &r) in grid.nodes().iter().enumerate() {
            let exact = 4.0 * (dim as f64 + 2.0) * r * r - 6.0 * dim as f64;
            let got = lap.apply_at(i, &u);
            assert!((got - exact).abs() < 1e-7 * (1.0 + exact.abs()), "r={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn first_derivative_of_odd_data() {
        let grid = RadialGrid::stretched(&GridSpec::with_r_max(5.0)).unwrap();
        let rows = first_derivative_rows(&grid);
        // v = u′ for u = r⁴: v = 4r³ (odd), v′ = 12 r².
        let v: Vec<f64> = grid.nodes().iter().map(|r| 4.0 * r.powi(3)).collect();
        for (i, &r) in grid.nodes().iter().enumerate() {
            assert!((rows[i].apply(&v) - 12.0 * r * r).abs() < 1e-8 * (1.0 + r * r));
        }
    }
}
