//! Uniform grids on intervals and rectangles, and piecewise-linear
//! discrete functions on them.
//!
//! Discretization: conforming P1 elements. In 1-D the elements are the
//! grid segments; in 2-D each grid cell is split into two triangles by
//! the diagonal from the lower-left to the upper-right corner. The
//! gradient is constant on every element, so `|∇u|^p` integrates exactly;
//! everything else (potential, source) uses one-point barycenter
//! quadrature, which never evaluates the integrand at a node.
//!
//! Node values are stored in row-major order (x fastest); coordinates are
//! derived from the index, never stored. Gradients and coordinates are
//! always `[f64; 2]`, with the second component zero in 1-D, so the
//! energy and diagnostics code is dimension-agnostic.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::det_sum;

/// Computational domain: an interval or an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rect { a: [f64; 2], b: [f64; 2] },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rect { .. } => 2,
        }
    }

    /// Side lengths per axis (second entry 0 in 1-D).
    pub fn lengths(&self) -> [f64; 2] {
        match *self {
            Domain::Interval { a, b } => [b - a, 0.0],
            Domain::Rect { a, b } => [b[0] - a[0], b[1] - a[1]],
        }
    }

    pub fn lower(&self) -> [f64; 2] {
        match *self {
            Domain::Interval { a, .. } => [a, 0.0],
            Domain::Rect { a, .. } => a,
        }
    }

    pub fn measure(&self) -> f64 {
        let l = self.lengths();
        match self {
            Domain::Interval { .. } => l[0],
            Domain::Rect { .. } => l[0] * l[1],
        }
    }

    pub fn diameter(&self) -> f64 {
        let l = self.lengths();
        (l[0] * l[0] + l[1] * l[1]).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.lengths();
        let ok = match self {
            Domain::Interval { .. } => l[0] > 0.0 && l[0].is_finite(),
            Domain::Rect { .. } => {
                l[0] > 0.0 && l[1] > 0.0 && l[0].is_finite() && l[1].is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "every axis needs strictly positive finite length, got {:?}",
                self
            )))
        }
    }

    pub fn contains(&self, x: &[f64; 2]) -> bool {
        match *self {
            Domain::Interval { a, b } => x[0] >= a && x[0] <= b,
            Domain::Rect { a, b } => {
                x[0] >= a[0] && x[0] <= b[0] && x[1] >= a[1] && x[1] <= b[1]
            }
        }
    }
}

/// Uniform grid with `n` subdivisions per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    domain: Domain,
    n: usize,
    spacing: [f64; 2],
}

impl Grid {
    /// Build a uniform grid with `n >= 2` subdivisions per axis.
    pub fn build(domain: Domain, n: usize) -> Result<Grid> {
        domain.validate()?;
        if n < 2 {
            return Err(Error::InvalidResolution(n));
        }
        let l = domain.lengths();
        let spacing = match domain {
            Domain::Interval { .. } => [l[0] / n as f64, 0.0],
            Domain::Rect { .. } => [l[0] / n as f64, l[1] / n as f64],
        };
        Ok(Grid { domain, n, spacing })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Subdivisions per axis.
    pub fn subdivisions(&self) -> usize {
        self.n
    }

    /// Spacing per axis (second entry 0 in 1-D).
    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// Largest axis spacing; the `h` used by fit-scale policies.
    pub fn h_max(&self) -> f64 {
        self.spacing[0].max(self.spacing[1])
    }

    pub fn node_count(&self) -> usize {
        match self.domain {
            Domain::Interval { .. } => self.n + 1,
            Domain::Rect { .. } => (self.n + 1) * (self.n + 1),
        }
    }

    pub fn element_count(&self) -> usize {
        match self.domain {
            Domain::Interval { .. } => self.n,
            Domain::Rect { .. } => 2 * self.n * self.n,
        }
    }

    /// Measure of one element (all elements are congruent).
    pub fn element_measure(&self) -> f64 {
        match self.domain {
            Domain::Interval { .. } => self.spacing[0],
            Domain::Rect { .. } => 0.5 * self.spacing[0] * self.spacing[1],
        }
    }

    /// 2-D lattice coordinates of a node index (i = x index, j = y index).
    pub fn node_ij(&self, idx: usize) -> (usize, usize) {
        match self.domain {
            Domain::Interval { .. } => (idx, 0),
            Domain::Rect { .. } => (idx % (self.n + 1), idx / (self.n + 1)),
        }
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        match self.domain {
            Domain::Interval { .. } => i,
            Domain::Rect { .. } => j * (self.n + 1) + i,
        }
    }

    pub fn node_coord(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(idx);
        let lo = self.domain.lower();
        match self.domain {
            Domain::Interval { .. } => [lo[0] + i as f64 * self.spacing[0], 0.0],
            Domain::Rect { .. } => [
                lo[0] + i as f64 * self.spacing[0],
                lo[1] + j as f64 * self.spacing[1],
            ],
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.node_ij(idx);
        match self.domain {
            Domain::Interval { .. } => i == 0 || i == self.n,
            Domain::Rect { .. } => i == 0 || i == self.n || j == 0 || j == self.n,
        }
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.is_boundary(i)).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_boundary(i)).collect()
    }

    /// Node indices of element `e`: two in 1-D, three in 2-D.
    /// 2-D element `2c` is the lower triangle (ll, lr, ur) of cell `c`,
    /// element `2c + 1` the upper one (ll, ur, ul).
    pub fn element_nodes(&self, e: usize) -> ([usize; 3], usize) {
        match self.domain {
            Domain::Interval { .. } => ([e, e + 1, 0], 2),
            Domain::Rect { .. } => {
                let cell = e / 2;
                let upper = e % 2 == 1;
                let (ci, cj) = (cell % self.n, cell / self.n);
                let ll = self.node_index(ci, cj);
                let lr = self.node_index(ci + 1, cj);
                let ul = self.node_index(ci, cj + 1);
                let ur = self.node_index(ci + 1, cj + 1);
                if upper {
                    ([ll, ur, ul], 3)
                } else {
                    ([ll, lr, ur], 3)
                }
            }
        }
    }

    /// Constant gradient of the P1 interpolant of `values` on element `e`.
    pub fn element_gradient(&self, values: &[f64], e: usize) -> [f64; 2] {
        let (nodes, count) = self.element_nodes(e);
        let [hx, hy] = self.spacing;
        if count == 2 {
            [(values[nodes[1]] - values[nodes[0]]) / hx, 0.0]
        } else if e % 2 == 0 {
            // (ll, lr, ur)
            [
                (values[nodes[1]] - values[nodes[0]]) / hx,
                (values[nodes[2]] - values[nodes[1]]) / hy,
            ]
        } else {
            // (ll, ur, ul)
            [
                (values[nodes[1]] - values[nodes[2]]) / hx,
                (values[nodes[2]] - values[nodes[0]]) / hy,
            ]
        }
    }

    /// d(gradient)/d(node value) for each local node of element `e`.
    pub(crate) fn element_grad_coeffs(&self, e: usize) -> [[f64; 2]; 3] {
        let [hx, hy] = self.spacing;
        match self.domain {
            Domain::Interval { .. } => [[-1.0 / hx, 0.0], [1.0 / hx, 0.0], [0.0, 0.0]],
            Domain::Rect { .. } => {
                if e % 2 == 0 {
                    // (ll, lr, ur)
                    [
                        [-1.0 / hx, 0.0],
                        [1.0 / hx, -1.0 / hy],
                        [0.0, 1.0 / hy],
                    ]
                } else {
                    // (ll, ur, ul)
                    [
                        [0.0, -1.0 / hy],
                        [1.0 / hx, 0.0],
                        [-1.0 / hx, 1.0 / hy],
                    ]
                }
            }
        }
    }

    pub fn element_barycenter(&self, e: usize) -> [f64; 2] {
        let (nodes, count) = self.element_nodes(e);
        let mut c = [0.0, 0.0];
        for &nd in &nodes[..count] {
            let x = self.node_coord(nd);
            c[0] += x[0];
            c[1] += x[1];
        }
        [c[0] / count as f64, c[1] / count as f64]
    }

    /// Mean of node values over element `e` (the barycenter value of the
    /// P1 interpolant).
    pub fn element_mean(&self, values: &[f64], e: usize) -> f64 {
        let (nodes, count) = self.element_nodes(e);
        let mut s = 0.0;
        for &nd in &nodes[..count] {
            s += values[nd];
        }
        s / count as f64
    }

    /// Number of elements touching each node (diagonal preconditioner
    /// weights for descent).
    pub fn node_element_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.node_count()];
        for e in 0..self.element_count() {
            let (nodes, k) = self.element_nodes(e);
            for &nd in &nodes[..k] {
                counts[nd] += 1;
            }
        }
        counts
    }

    /// All grid edges as node index pairs: segment edges in 1-D;
    /// horizontal, vertical and cell-diagonal edges in 2-D.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match self.domain {
            Domain::Interval { .. } => (0..self.n).map(|i| (i, i + 1)).collect(),
            Domain::Rect { .. } => {
                let m = self.n + 1;
                let mut edges = Vec::with_capacity(2 * self.n * m + self.n * self.n);
                for j in 0..m {
                    for i in 0..self.n {
                        edges.push((self.node_index(i, j), self.node_index(i + 1, j)));
                    }
                }
                for j in 0..self.n {
                    for i in 0..m {
                        edges.push((self.node_index(i, j), self.node_index(i, j + 1)));
                    }
                }
                for j in 0..self.n {
                    for i in 0..self.n {
                        edges.push((self.node_index(i, j), self.node_index(i + 1, j + 1)));
                    }
                }
                edges
            }
        }
    }

    /// All nodes within Euclidean distance `r` of `center`. May be empty.
    pub fn ball_nodes(&self, center: &[f64; 2], r: f64) -> Vec<usize> {
        let r2 = r * r;
        (0..self.node_count())
            .filter(|&idx| {
                let x = self.node_coord(idx);
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                dx * dx + dy * dy <= r2
            })
            .collect()
    }
}

/// One real value per grid node; the candidate minimizer and every other
/// field live in this representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn zeros(grid: Grid) -> DiscreteFunction {
        let count = grid.node_count();
        DiscreteFunction { grid, values: vec![0.0; count] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<DiscreteFunction> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "expected {} node values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(
                "discrete function contains a non-finite value".into(),
            ));
        }
        Ok(DiscreteFunction { grid, values })
    }

    /// Sample a pointwise function at the nodes.
    pub fn sample<F: Fn(&[f64; 2]) -> f64>(grid: Grid, f: F) -> DiscreteFunction {
        let values = (0..grid.node_count()).map(|i| f(&grid.node_coord(i))).collect();
        DiscreteFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Serialize to CSV: header `x[,y],u`, one row per node in storage order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.grid.dim() == 1 {
            out.push_str("x,u\n");
        } else {
            out.push_str("x,y,u\n");
        }
        for (idx, v) in self.values.iter().enumerate() {
            let x = self.grid.node_coord(idx);
            if self.grid.dim() == 1 {
                let _ = writeln!(out, "{},{}", x[0], v);
            } else {
                let _ = writeln!(out, "{},{},{}", x[0], x[1], v);
            }
        }
        out
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parse node values from the CSV written by [`to_csv`]; the grid must
    /// match the file's node count.
    pub fn from_csv(grid: Grid, text: &str) -> Result<DiscreteFunction> {
        let mut values = Vec::with_capacity(grid.node_count());
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().ok_or_else(|| {
                Error::Config(format!("malformed csv line {}", lineno + 1))
            })?;
            let v: f64 = last.trim().parse().map_err(|_| {
                Error::Config(format!("bad value on csv line {}", lineno + 1))
            })?;
            values.push(v);
        }
        DiscreteFunction::from_values(grid, values)
    }

    pub fn read_csv<P: AsRef<Path>>(grid: Grid, path: P) -> Result<DiscreteFunction> {
        let text = std::fs::read_to_string(path)?;
        DiscreteFunction::from_csv(grid, &text)
    }
}

/// Gradient vectors of the P1 interpolant, one per element.
pub fn cell_gradients(u: &DiscreteFunction) -> Vec<[f64; 2]> {
    let grid = u.grid();
    (0..grid.element_count())
        .map(|e| grid.element_gradient(u.values(), e))
        .collect()
}

/// Integrate per-element values: sum of value x element measure.
pub fn integrate(grid: &Grid, per_element: &[f64]) -> f64 {
    assert_eq!(per_element.len(), grid.element_count(), "one value per element");
    grid.element_measure() * det_sum(per_element)
}

/// L^q norm via barycenter quadrature; sup norm over nodes for q = infinity.
pub fn lq_norm(u: &DiscreteFunction, q: f64) -> Result<f64> {
    if q.is_infinite() {
        return Ok(u.sup_norm());
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    let grid = u.grid();
    let per_elem: Vec<f64> = (0..grid.element_count())
        .map(|e| grid.element_mean(u.values(), e).abs().powf(q))
        .collect();
    Ok(integrate(grid, &per_elem).powf(1.0 / q))
}

/// Discrete W^{1,p} norm: (∫|u|^p + ∫|∇u|^p)^{1/p}.
pub fn w1p_norm(u: &DiscreteFunction, p: f64) -> f64 {
    let grid = u.grid();
    let lp = lq_norm(u, p).expect("p >= 2");
    let grads: Vec<f64> = (0..grid.element_count())
        .map(|e| {
            let g = grid.element_gradient(u.values(), e);
            (g[0] * g[0] + g[1] * g[1]).sqrt().powf(p)
        })
        .collect();
    (lp.powf(p) + integrate(grid, &grads)).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval(n: usize) -> Grid {
        Grid::build(Domain::Interval { a: 0.0, b: 1.0 }, n).unwrap()
    }

    fn unit_square(n: usize) -> Grid {
        Grid::build(Domain::Rect { a: [0.0, 0.0], b: [1.0, 1.0] }, n).unwrap()
    }

    #[test]
    fn interval_grid_counts_and_spacing() {
        let g = unit_interval(4);
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.spacing()[0], 0.25);
    }

    #[test]
    fn square_grid_counts_boundary() {
        let g = unit_square(2);
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.boundary_nodes().len(), 8);
        assert_eq!(g.interior_nodes(), vec![4]);
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        let err = Grid::build(Domain::Interval { a: 0.0, b: 1.0 }, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidResolution(1)));
    }

    #[test]
    fn degenerate_domain_is_rejected() {
        assert!(Grid::build(Domain::Interval { a: 1.0, b: 1.0 }, 4).is_err());
        assert!(Grid::build(Domain::Rect { a: [0.0, 0.0], b: [1.0, 0.0] }, 4).is_err());
    }

    #[test]
    fn gradients_exact_for_linear_1d() {
        let g = unit_interval(7);
        let u = DiscreteFunction::sample(g, |x| x[0]);
        for grad in cell_gradients(&u) {
            assert!((grad[0] - 1.0).abs() < 1e-14);
            assert_eq!(grad[1], 0.0);
        }
    }

    #[test]
    fn gradients_zero_for_constant() {
        let g = unit_square(5);
        let u = DiscreteFunction::sample(g, |_| 3.25);
        for grad in cell_gradients(&u) {
            assert_eq!(grad, [0.0, 0.0]);
        }
    }

    #[test]
    fn gradients_exact_for_affine_2d() {
        let g = unit_square(6);
        let u = DiscreteFunction::sample(g, |x| x[0] + 2.0 * x[1]);
        for grad in cell_gradients(&u) {
            assert!((grad[0] - 1.0).abs() < 1e-13);
            assert!((grad[1] - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn integrate_measures_constants() {
        let g1 = unit_interval(9);
        assert!((integrate(&g1, &vec![1.0; 9]) - 1.0).abs() < 1e-15);
        let g2 = unit_square(4);
        assert!((integrate(&g2, &vec![3.0; 32]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn integrate_midpoint_exact_for_linear() {
        let g = unit_interval(10);
        let mids: Vec<f64> = (0..10).map(|e| g.element_barycenter(e)[0]).collect();
        assert!((integrate(&g, &mids) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lq_norm_of_constant() {
        let g = unit_interval(8);
        let u = DiscreteFunction::sample(g, |_| 2.0);
        assert!((lq_norm(&u, 3.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lq_norm_rejects_sub_one_exponent() {
        let g = unit_interval(4);
        let u = DiscreteFunction::zeros(g);
        assert!(matches!(lq_norm(&u, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn lq_norm_sup_of_zero() {
        let g = unit_square(3);
        let u = DiscreteFunction::zeros(g);
        assert_eq!(lq_norm(&u, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn lq_norm_converges_on_integrable_singularity() {
        // |x|^{-1/4} on [-1,1]: the exact L^2 norm is (∫|x|^{-1/2})^{1/2} = 2.
        // Odd n keeps the singular point off the node set.
        let mut prev_err = f64::INFINITY;
        for n in [201usize, 801, 3201] {
            let g = Grid::build(Domain::Interval { a: -1.0, b: 1.0 }, n).unwrap();
            let u = DiscreteFunction::sample(g, |x| x[0].abs().powf(-0.25));
            let err = (lq_norm(&u, 2.0).unwrap() - 2.0).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 0.02, "final error {prev_err}");
    }

    #[test]
    fn ball_nodes_examples() {
        let g = unit_interval(10);
        assert_eq!(g.ball_nodes(&[0.5, 0.0], 0.05), vec![5]);
        assert_eq!(g.ball_nodes(&[0.5, 0.0], 2.0).len(), 11);
        assert!(g.ball_nodes(&[9.0, 0.0], 1e-3).is_empty());
    }

    #[test]
    fn csv_round_trip_2d() {
        let g = unit_square(3);
        let u = DiscreteFunction::sample(g.clone(), |x| x[0] * x[1] - 0.5);
        let text = u.to_csv();
        assert!(text.starts_with("x,y,u\n"));
        let v = DiscreteFunction::from_csv(g, &text).unwrap();
        assert_eq!(u.values(), v.values());
    }

    #[test]
    fn element_counts_2d() {
        let g = unit_square(3);
        let counts = g.node_element_counts();
        // interior node of the criss-cross pattern touches 6 triangles
        assert_eq!(counts[g.node_index(1, 1)], 6);
        // corner at origin touches both triangles of its cell
        assert_eq!(counts[g.node_index(0, 0)], 2);
    }

    #[test]
    fn finite_values_enforced() {
        let g = unit_interval(4);
        assert!(DiscreteFunction::from_values(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
