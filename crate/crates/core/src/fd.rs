//! Finite-difference stencils on arbitrary node sets.
//!
//! Weights come from Fornberg's recursion, so the same code serves the
//! uniform Cartesian grids, the geometric radial grid and non-uniform time
//! grids. Near the ends of a node set the stencil slides inward and becomes
//! one-sided; its width never changes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};

/// Default stencil width: 13 points, twelfth order in the interior.
pub const DEFAULT_STENCIL: usize = 13;

/// Fornberg weights for derivatives `0..=max_order` at `z` from `nodes`.
///
/// Returns `w[k][j]`, the weight of `f(nodes[j])` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
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

#[derive(Clone, Debug, PartialEq)]
struct Stencil {
    start: usize,
    first: Vec<f64>,
    second: Vec<f64>,
}

/// Precomputed first- and second-derivative stencils for a node set.
#[derive(Clone, Debug, PartialEq)]
pub struct Differentiator {
    stencils: Vec<Stencil>,
}

impl Differentiator {
    pub fn new(nodes: &[f64], width: usize) -> Result<Self> {
        if width < 3 {
            return Err(domain("stencil width must be at least 3"));
        }
        if nodes.len() < width {
            return Err(domain(format!(
                "{} nodes cannot carry a {width}-point stencil",
                nodes.len()
            )));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("nodes must be strictly increasing"));
        }
        let half = width / 2;
        let stencils = (0..nodes.len())
            .map(|i| {
                let start = i.saturating_sub(half).min(nodes.len() - width);
                let w = fornberg_weights(nodes[i], &nodes[start..start + width], 2);
                Stencil {
                    start,
                    first: w[1].clone(),
                    second: w[2].clone(),
                }
            })
            .collect();
        Ok(Self { stencils })
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    fn apply(&self, values: &[Complex64], second: bool) -> Vec<Complex64> {
        self.apply_strided(values, 0, 1, second)
    }

    /// Derivative of the samples `values[offset + k * stride]`, k = 0..len.
    pub(crate) fn apply_strided(
        &self,
        values: &[Complex64],
        offset: usize,
        stride: usize,
        second: bool,
    ) -> Vec<Complex64> {
        self.stencils
            .iter()
            .map(|s| {
                let w = if second { &s.second } else { &s.first };
                w.iter()
                    .enumerate()
                    .map(|(j, &wj)| values[offset + (s.start + j) * stride] * wj)
                    .sum()
            })
            .collect()
    }

    pub fn first(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.apply(values, false)
    }

    pub fn second(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.apply(values, true)
    }

    pub fn first_real(&self, values: &[f64]) -> Vec<f64> {
        self.stencils
            .iter()
            .map(|s| s.first.iter().enumerate().map(|(j, &w)| w * values[s.start + j]).sum())
            .collect()
    }

    /// Dense differentiation matrix (`order` 1 or 2).
    pub fn matrix(&self, order: usize) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, s) in self.stencils.iter().enumerate() {
            let w = if order == 2 { &s.second } else { &s.first };
            for (j, &wj) in w.iter().enumerate() {
                m[(i, s.start + j)] = wj;
            }
        }
        m
    }
}
