//! Uniform grids, composite quadrature and finite differences.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    dx: f64,
}

impl Grid {
    /// `nodes` equispaced points on `[0, length]`.
    pub fn uniform(length: f64, nodes: usize) -> Result<Self> {
        if nodes < 3 || !(length > 0.0) || !length.is_finite() {
            return Err(Error::Usage(format!(
                "grid needs >= 3 nodes and positive length (got {nodes}, {length})"
            )));
        }
        let dx = length / (nodes - 1) as f64;
        let nodes = (0..nodes).map(|i| i as f64 * dx).collect();
        Ok(Self { nodes, dx })
    }

    pub fn x(&self) -> &[f64] {
        &self.nodes
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Same node count and spacing (up to rounding in the last place).
    pub fn matches(&self, other: &Grid) -> bool {
        self.len() == other.len() && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    /// Composite Simpson rule; the last three intervals use the 3/8 rule when
    /// the interval count is odd.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        simpson(f, self.dx)
    }

    /// Second-order derivative: central inside, one-sided at the ends.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        derivative2(f, self.dx)
    }
}

pub fn simpson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * dx * (f[0] + f[1]),
        3 => dx / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        4 => 3.0 * dx / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut s = f[0] + f[simpson_end];
            for (i, v) in f.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * dx / 3.0;
            if simpson_end != n - 1 {
                let k = simpson_end;
                total += 3.0 * dx / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
            }
            total
        }
    }
}

pub fn derivative2(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / dx;
            d.fill(s);
        }
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    d
}

/// Fourth-order first derivative: five-point central stencil inside,
/// one-sided five-point stencils at the two nodes nearest each end.
pub fn derivative4(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "fourth-order stencil needs 5 nodes");
    let mut d = vec![0.0; n];
    let fwd = |k: usize| {
        (-25.0 * f[k] + 48.0 * f[k + 1] - 36.0 * f[k + 2] + 16.0 * f[k + 3] - 3.0 * f[k + 4])
            / (12.0 * dx)
    };
    let fwd1 = |k: usize| {
        (-3.0 * f[k - 1] - 10.0 * f[k] + 18.0 * f[k + 1] - 6.0 * f[k + 2] + f[k + 3]) / (12.0 * dx)
    };
    let bwd = |k: usize| {
        (25.0 * f[k] - 48.0 * f[k - 1] + 36.0 * f[k - 2] - 16.0 * f[k - 3] + 3.0 * f[k - 4])
            / (12.0 * dx)
    };
    let bwd1 = |k: usize| {
        (3.0 * f[k + 1] + 10.0 * f[k] - 18.0 * f[k - 1] + 6.0 * f[k - 2] - f[k - 3]) / (12.0 * dx)
    };
    d[0] = fwd(0);
    d[1] = fwd1(1);
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx);
    }
    d[n - 2] = bwd1(n - 2);
    d[n - 1] = bwd(n - 1);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics_for_both_parities() {
        for n in [5usize, 6, 7, 10, 11] {
            let g = Grid::uniform(2.0, n).unwrap();
            let f: Vec<f64> = g.x().iter().map(|x| x * x * x - 2.0 * x + 1.0).collect();
            let exact = 4.0 - 4.0 + 2.0;
            assert!((g.integrate(&f) - exact).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn fourth_order_derivative_converges() {
        let err = |n: usize| {
            let dx = 1.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * dx).sin()).collect();
            derivative4(&f, dx)
                .iter()
                .enumerate()
                .map(|(i, d)| (d - (i as f64 * dx).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 14.0, "ratio {ratio}");
    }

    #[test]
    fn bad_grid_rejected() {
        assert!(Grid::uniform(1.0, 2).is_err());
        assert!(Grid::uniform(-1.0, 10).is_err());
    }
}
