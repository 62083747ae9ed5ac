//! Discretized domains and complex-valued samples on them.
//!
//! Every grid here is closed under the reflections it is used with: the 1D
//! Cartesian grids are symmetric about the origin (which is never a node),
//! and the angular grid `theta_k = 2 pi k / N` with `4 | N` is closed under
//! `theta -> -theta` and `theta -> pi - theta`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, structure, Result};
use crate::fd::{Differentiator, DEFAULT_STENCIL};

pub trait Grid: PartialEq + fmt::Debug {
    /// Number of sample points.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reflection axis: `First` is `R_1` (x -> -x), `Second` is `R_2` (y -> -y).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    First,
    Second,
}

/// Grids on which the reflections act as index permutations.
pub trait ReflectionClosed: Grid {
    /// `perm[i]` is the node that node `i` is mapped to.
    fn mirror(&self, axis: Axis) -> Result<Vec<usize>>;
}

/// Symmetric 1D node set excluding the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    diff: Differentiator,
}

impl Grid1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        Self::with_stencil(nodes, DEFAULT_STENCIL)
    }

    pub fn with_stencil(nodes: Vec<f64>, stencil: usize) -> Result<Self> {
        let n = nodes.len();
        if n < 2 || n % 2 != 0 {
            return Err(structure("a symmetric grid without the origin has an even, nonzero node count"));
        }
        let scale = nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..n {
            if nodes[i] == 0.0 {
                return Err(structure("x = 0 must not be a node"));
            }
            if (nodes[i] + nodes[n - 1 - i]).abs() > 1e-12 * scale {
                return Err(structure(format!(
                    "node {} has no mirror image (grid not reflection-closed)",
                    nodes[i]
                )));
            }
        }
        let diff = Differentiator::new(&nodes, stencil)?;
        Ok(Self { nodes, diff })
    }

    /// `n` equally spaced nodes on `(-half_width, half_width)`, offset by half a step.
    pub fn uniform(n: usize, half_width: f64) -> Result<Self> {
        if half_width <= 0.0 {
            return Err(domain("half width must be positive"));
        }
        let h = 2.0 * half_width / n as f64;
        let nodes = (0..n).map(|k| -half_width + (k as f64 + 0.5) * h).collect();
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn differentiator(&self) -> &Differentiator {
        &self.diff
    }
}

impl Grid for Grid1D {
    fn len(&self) -> usize {
        self.nodes.len()
    }
}

impl ReflectionClosed for Grid1D {
    fn mirror(&self, axis: Axis) -> Result<Vec<usize>> {
        match axis {
            Axis::First => {
                let n = self.len();
                Ok((0..n).map(|i| n - 1 - i).collect())
            }
            Axis::Second => Err(structure("a 1D grid has no second axis")),
        }
    }
}

/// Tensor product of two symmetric 1D grids; samples are stored x-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianGrid {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl CartesianGrid {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.y.len() + iy
    }
}

impl Grid for CartesianGrid {
    fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }
}

impl ReflectionClosed for CartesianGrid {
    fn mirror(&self, axis: Axis) -> Result<Vec<usize>> {
        let (nx, ny) = (self.x.len(), self.y.len());
        Ok((0..nx)
            .flat_map(|ix| (0..ny).map(move |iy| (ix, iy)))
            .map(|(ix, iy)| match axis {
                Axis::First => self.index(nx - 1 - ix, iy),
                Axis::Second => self.index(ix, ny - 1 - iy),
            })
            .collect())
    }
}

/// Uniform periodic angular grid `theta_k = 2 pi k / n`, `n` divisible by 4.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaGrid {
    n: usize,
}

impl ThetaGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 4 != 0 {
            return Err(structure(format!(
                "angular grid size must be a multiple of 4 and at least 8 (got {n})"
            )));
        }
        Ok(Self { n })
    }

    pub fn node(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    pub(crate) fn mirror_index(&self, axis: Axis, k: usize) -> usize {
        let n = self.n;
        match axis {
            Axis::First => (n + n / 2 - k) % n,
            Axis::Second => (n - k) % n,
        }
    }
}

impl Grid for ThetaGrid {
    fn len(&self) -> usize {
        self.n
    }
}

impl ReflectionClosed for ThetaGrid {
    fn mirror(&self, axis: Axis) -> Result<Vec<usize>> {
        Ok((0..self.n).map(|k| self.mirror_index(axis, k)).collect())
    }
}

/// Geometrically spaced radial nodes on `[r_min, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    log_step: f64,
    diff: Differentiator,
}

impl RadialGrid {
    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::geometric_with_stencil(r_min, r_max, n, DEFAULT_STENCIL)
    }

    pub fn geometric_with_stencil(r_min: f64, r_max: f64, n: usize, stencil: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(domain(format!("radial bounds must satisfy 0 < r_min < r_max (got {r_min}, {r_max})")));
        }
        if n < stencil.max(3) {
            return Err(domain(format!("radial grid needs at least {stencil} nodes")));
        }
        let log_step = (r_max / r_min).ln() / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| r_min * (log_step * i as f64).exp()).collect();
        let diff = Differentiator::new(&nodes, stencil)?;
        Ok(Self { nodes, log_step, diff })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    pub fn differentiator(&self) -> &Differentiator {
        &self.diff
    }

    /// Weights of `int f(r) dr`: trapezoid rule in `s = ln r`, with `dr = r ds`.
    ///
    /// Spectrally accurate for integrands that decay at both ends of the grid.
    pub fn dr_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * self.log_step * r
            })
            .collect()
    }
}

impl Grid for RadialGrid {
    fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Product of a radial and an angular grid; samples are stored radius-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub radial: RadialGrid,
    pub theta: ThetaGrid,
}

impl PolarGrid {
    pub fn new(radial: RadialGrid, theta: ThetaGrid) -> Self {
        Self { radial, theta }
    }

    pub fn n_r(&self) -> usize {
        self.radial.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn index(&self, ir: usize, k: usize) -> usize {
        ir * self.theta.len() + k
    }
}

impl Grid for PolarGrid {
    fn len(&self) -> usize {
        self.radial.len() * self.theta.len()
    }
}

impl ReflectionClosed for PolarGrid {
    fn mirror(&self, axis: Axis) -> Result<Vec<usize>> {
        let nt = self.theta.len();
        Ok((0..self.len())
            .map(|i| (i / nt) * nt + self.theta.mirror_index(axis, i % nt))
            .collect())
    }
}

/// Complex samples attached to a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<G: Grid> {
    grid: Arc<G>,
    values: Vec<Complex64>,
}

impl<G: Grid> GridFunction<G> {
    pub fn new(grid: Arc<G>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(structure(format!(
                "{} samples supplied for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<G>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<G>) -> Self {
        let n = grid.len();
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_grid<H: Grid>(&self, other: &GridFunction<H>) -> bool
    where
        G: PartialEq<H>,
    {
        std::ptr::eq(Arc::as_ptr(&self.grid) as *const u8, Arc::as_ptr(&other.grid) as *const u8)
            || *self.grid == *other.grid
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(structure("grid functions live on different grids"))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// `a * self + b * other`.
    pub fn lincomb(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lincomb(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

impl GridFunction<Grid1D> {
    pub fn from_fn(grid: Arc<Grid1D>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::from_parts(grid, values)
    }
}

impl GridFunction<CartesianGrid> {
    pub fn from_fn(grid: Arc<CartesianGrid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = grid
            .x
            .nodes()
            .iter()
            .flat_map(|&x| grid.y.nodes().iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::from_parts(grid, values)
    }
}

impl GridFunction<ThetaGrid> {
    pub fn from_fn(grid: Arc<ThetaGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node(k))).collect();
        Self::from_parts(grid, values)
    }
}

impl GridFunction<RadialGrid> {
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::from_parts(grid, values)
    }
}

impl GridFunction<PolarGrid> {
    pub fn from_fn(grid: Arc<PolarGrid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let thetas = grid.theta.nodes();
        let values = grid
            .radial
            .nodes()
            .iter()
            .flat_map(|&r| thetas.iter().map(move |&t| (r, t)))
            .map(|(r, t)| f(r, t))
            .collect();
        Self::from_parts(grid, values)
    }

    /// Product state `radial(r) * angular(theta)`.
    pub fn separable(grid: Arc<PolarGrid>, radial: &[Complex64], angular: &[Complex64]) -> Result<Self> {
        if radial.len() != grid.n_r() || angular.len() != grid.n_theta() {
            return Err(structure("separable factors do not match the polar grid"));
        }
        let values = radial
            .iter()
            .flat_map(|&u| angular.iter().map(move |&a| u * a))
            .collect();
        Ok(Self::from_parts(grid, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_grid_requires_multiple_of_four() {
        assert!(ThetaGrid::new(30).is_err());
        assert!(ThetaGrid::new(4).is_err());
        assert!(ThetaGrid::new(32).is_ok());
    }

    #[test]
    fn asymmetric_grid_is_rejected() {
        assert!(Grid1D::new(vec![-2.0, -1.0, 1.0, 2.5, 3.0, 4.0]).is_err());
        assert!(Grid1D::new(vec![-1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn theta_mirrors_match_geometry() {
        let g = ThetaGrid::new(16).unwrap();
        for k in 0..16 {
            let t = g.node(k);
            let r1 = g.node(g.mirror_index(Axis::First, k));
            let r2 = g.node(g.mirror_index(Axis::Second, k));
            assert!((r1.cos() + t.cos()).abs() < 1e-14 && (r1.sin() - t.sin()).abs() < 1e-14);
            assert!((r2.cos() - t.cos()).abs() < 1e-14 && (r2.sin() + t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn radial_weights_integrate_gaussian() {
        let g = RadialGrid::geometric(1e-4, 12.0, 400).unwrap();
        let integral: f64 = g
            .nodes()
            .iter()
            .zip(g.dr_weights())
            .map(|(&r, w)| w * r * (-r * r).exp())
            .sum();
        assert!((integral - 0.5).abs() < 1e-7);
    }

    #[test]
    fn mismatched_lengths_are_structural_errors() {
        let g = Arc::new(ThetaGrid::new(8).unwrap());
        assert!(GridFunction::new(g, vec![Complex64::new(0.0, 0.0); 7]).is_err());
    }
}
