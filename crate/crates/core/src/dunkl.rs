//! Reflections, Dunkl derivatives and the Dunkl angular operator on grids,
//! plus the reflection-invariant inner products.
//!
//! The angular operator is
//! `J f = i (f' + nu2 cot(theta) (1 - R2) f - nu1 tan(theta) (1 - R1) f)`
//! with `R1: theta -> pi - theta` and `R2: theta -> -theta`. Its derivative is
//! spectral; the quotients `(1 - R) f / sin` and `(1 - R) f / cos` are taken
//! on the odd parts, which vanish at the poles, with the l'Hopital limit at
//! the four singular nodes.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, structure, Result};
use crate::grid::{
    Axis, CartesianGrid, Grid, Grid1D, GridFunction, PolarGrid, RadialGrid, ReflectionClosed,
    ThetaGrid,
};
use crate::special::gauss_jacobi;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Wigner parameters of the deformation; both must exceed -1/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct DeformationParams {
    nu1: f64,
    nu2: f64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    nu1: f64,
    nu2: f64,
}

impl TryFrom<RawParams> for DeformationParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.nu1, raw.nu2)
    }
}

impl From<DeformationParams> for RawParams {
    fn from(p: DeformationParams) -> Self {
        Self { nu1: p.nu1, nu2: p.nu2 }
    }
}

impl DeformationParams {
    pub fn new(nu1: f64, nu2: f64) -> Result<Self> {
        check_nu("nu1", nu1)?;
        check_nu("nu2", nu2)?;
        Ok(Self { nu1, nu2 })
    }

    pub fn undeformed() -> Self {
        Self { nu1: 0.0, nu2: 0.0 }
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn nu(&self, axis: Axis) -> f64 {
        match axis {
            Axis::First => self.nu1,
            Axis::Second => self.nu2,
        }
    }

    /// `nu1 + nu2 + 1/2`, the shift in the radial momentum `-i (d/dr + delta / r)`.
    pub fn delta(&self) -> f64 {
        self.nu1 + self.nu2 + 0.5
    }

    /// The same deformation with the two axes exchanged.
    pub fn swapped(&self) -> Self {
        Self { nu1: self.nu2, nu2: self.nu1 }
    }
}

fn check_nu(name: &str, nu: f64) -> Result<()> {
    if nu.is_finite() && nu > -0.5 {
        Ok(())
    } else {
        Err(domain(format!("{name} must exceed -1/2 (got {nu})")))
    }
}

/// `R f` for the reflection along `axis`; an exact index permutation.
pub fn reflect<G: ReflectionClosed>(f: &GridFunction<G>, axis: Axis) -> Result<GridFunction<G>> {
    let perm = f.grid().mirror(axis)?;
    let v = f.values();
    Ok(GridFunction::from_parts(
        f.grid().clone(),
        perm.iter().map(|&j| v[j]).collect(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

fn dunkl_terms(
    x: f64,
    f: Complex64,
    reflected: Complex64,
    d1: Complex64,
    d2: Option<Complex64>,
    nu: f64,
) -> Complex64 {
    let odd = f - reflected;
    match d2 {
        None => d1 + odd * (nu / x),
        Some(d2) => d2 + d1 * (2.0 * nu / x) - odd * (nu / (x * x)),
    }
}

/// `D f = f' + (nu/x)(1 - R) f` or `D^2 f = f'' + (2 nu/x) f' - (nu/x^2)(1 - R) f`.
pub fn dunkl_derivative(f: &GridFunction<Grid1D>, nu: f64, order: Order) -> Result<GridFunction<Grid1D>> {
    check_nu("nu", nu)?;
    let grid = f.grid();
    let v = f.values();
    let n = v.len();
    let diff = grid.differentiator();
    let d1 = diff.first(v);
    let d2 = (order == Order::Second).then(|| diff.second(v));
    let out = (0..n)
        .map(|i| {
            dunkl_terms(
                grid.nodes()[i],
                v[i],
                v[n - 1 - i],
                d1[i],
                d2.as_ref().map(|d| d[i]),
                nu,
            )
        })
        .collect();
    Ok(GridFunction::from_parts(grid.clone(), out))
}

/// Dunkl derivative along one axis of a Cartesian grid.
pub fn dunkl_partial(
    f: &GridFunction<CartesianGrid>,
    axis: Axis,
    nu: f64,
    order: Order,
) -> Result<GridFunction<CartesianGrid>> {
    check_nu("nu", nu)?;
    let grid = f.grid();
    let (nx, ny) = (grid.x.len(), grid.y.len());
    let v = f.values();
    let mirror = grid.mirror(axis)?;
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    let (line_grid, lines, line_len) = match axis {
        Axis::First => (&grid.x, ny, nx),
        Axis::Second => (&grid.y, nx, ny),
    };
    let diff = line_grid.differentiator();
    for line in 0..lines {
        let (offset, stride) = match axis {
            Axis::First => (line, ny),
            Axis::Second => (line * ny, 1),
        };
        let d1 = diff.apply_strided(v, offset, stride, false);
        let d2 = (order == Order::Second).then(|| diff.apply_strided(v, offset, stride, true));
        for k in 0..line_len {
            let idx = offset + k * stride;
            out[idx] = dunkl_terms(
                line_grid.nodes()[k],
                v[idx],
                v[mirror[idx]],
                d1[k],
                d2.as_ref().map(|d| d[k]),
                nu,
            );
        }
    }
    Ok(GridFunction::from_parts(grid.clone(), out))
}

/// `sum_j [d_j^2 + (2 nu_j / x_j) d_j - (nu_j / x_j^2)(1 - R_j)] f`.
pub fn dunkl_laplacian(
    f: &GridFunction<CartesianGrid>,
    params: &DeformationParams,
) -> Result<GridFunction<CartesianGrid>> {
    let a = dunkl_partial(f, Axis::First, params.nu1, Order::Second)?;
    let b = dunkl_partial(f, Axis::Second, params.nu2, Order::Second)?;
    a.lincomb(Complex64::new(1.0, 0.0), &b, Complex64::new(1.0, 0.0))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

/// Spectral derivative of periodic samples on `[0, 2 pi)`; the Nyquist mode is dropped.
pub fn spectral_derivative(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let (fwd, inv) = plans(n);
    let mut buf = values.to_vec();
    fwd.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let m = if k < n / 2 {
            k as f64
        } else if k == n / 2 {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= I * m / n as f64;
    }
    inv.process(&mut buf);
    buf
}

/// `J f` on one ring of angular samples.
fn angular_ring(f: &[Complex64], grid: &ThetaGrid, params: &DeformationParams) -> Vec<Complex64> {
    let n = f.len();
    let df = spectral_derivative(f);
    let odd = |axis: Axis| -> Vec<Complex64> {
        (0..n)
            .map(|k| 0.5 * (f[k] - f[grid.mirror_index(axis, k)]))
            .collect()
    };
    let (odd1, odd2) = (odd(Axis::First), odd(Axis::Second));
    let (dodd1, dodd2) = (spectral_derivative(&odd1), spectral_derivative(&odd2));
    (0..n)
        .map(|k| {
            let theta = grid.node(k);
            let (s, c) = theta.sin_cos();
            // nu2 cot(theta) (1 - R2) f = 2 nu2 cos(theta) [odd2 / sin(theta)]
            let q2 = if k % (n / 2) == 0 { dodd2[k] / c } else { odd2[k] / s };
            // nu1 tan(theta) (1 - R1) f = 2 nu1 sin(theta) [odd1 / cos(theta)]
            let q1 = if k % (n / 2) == n / 4 { -dodd1[k] / s } else { odd1[k] / c };
            I * (df[k] + 2.0 * params.nu2 * c * q2 - 2.0 * params.nu1 * s * q1)
        })
        .collect()
}

/// The Dunkl angular operator on a periodic angular grid.
pub fn dunkl_angular_apply(
    f: &GridFunction<ThetaGrid>,
    params: &DeformationParams,
) -> GridFunction<ThetaGrid> {
    GridFunction::from_parts(f.grid().clone(), angular_ring(f.values(), f.grid(), params))
}

/// The Dunkl angular operator applied ring by ring on a polar grid.
pub fn dunkl_angular_apply_polar(
    f: &GridFunction<PolarGrid>,
    params: &DeformationParams,
) -> GridFunction<PolarGrid> {
    let nt = f.grid().n_theta();
    let out = f
        .values()
        .chunks(nt)
        .flat_map(|ring| angular_ring(ring, &f.grid().theta, params))
        .collect();
    GridFunction::from_parts(f.grid().clone(), out)
}

type WeightKey = (u64, u64, usize);

static THETA_WEIGHTS: LazyLock<Mutex<HashMap<WeightKey, Arc<Vec<f64>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Quadrature weights for `int_0^{2 pi} g |cos|^{2 nu1} |sin|^{2 nu2} dtheta` on
/// `theta_k = 2 pi k / n`.
///
/// The weights are exact for trigonometric polynomials of degree below
/// `n / 2`. The Fourier coefficients of the singular weight are obtained by
/// Gauss-Jacobi quadrature after the substitution `y = -cos(2 theta)`, which
/// turns them into Chebyshev moments of the Jacobi weight. For `nu = 0` the
/// rule is the trapezoid rule.
pub fn theta_weights(params: &DeformationParams, n: usize) -> Result<Arc<Vec<f64>>> {
    let key = (params.nu1.to_bits(), params.nu2.to_bits(), n);
    if let Some(w) = THETA_WEIGHTS.lock().unwrap().get(&key) {
        return Ok(w.clone());
    }
    let weights = Arc::new(compute_theta_weights(params, n)?);
    THETA_WEIGHTS.lock().unwrap().insert(key, weights.clone());
    Ok(weights)
}

fn compute_theta_weights(params: &DeformationParams, n: usize) -> Result<Vec<f64>> {
    if n % 4 != 0 {
        return Err(structure("angular weights need a grid size divisible by 4"));
    }
    let (nu1, nu2) = (params.nu1, params.nu2);
    let rule = gauss_jacobi(n / 4 + 8, nu1 - 0.5, nu2 - 0.5)?;
    let scale = 4.0 * 2f64.powf(-nu1 - nu2 - 1.0);
    // Chebyshev moments int (1-y)^(nu1-1/2) (1+y)^(nu2-1/2) T_j(y) dy, j = 0..=n/4
    let jmax = n / 4;
    let mut moments = vec![0.0; jmax + 1];
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (mut t_prev, mut t) = (1.0, y);
        moments[0] += w;
        for m in moments.iter_mut().skip(1) {
            *m += w * t;
            let next = 2.0 * y * t - t_prev;
            t_prev = t;
            t = next;
        }
    }
    // w_hat(2j) = scale * (-1)^j * moments[j]; the Nyquist mode 2j = n/2 enters with weight 1/2
    let coeff = |j: usize| -> f64 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let half = if 2 * j == n / 2 { 0.5 } else { 1.0 };
        scale * sign * moments[j] * half
    };
    Ok((0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let mut s = coeff(0);
            for j in 1..=jmax {
                s += 2.0 * coeff(j) * (2.0 * j as f64 * theta).cos();
            }
            s / n as f64
        })
        .collect())
}

/// Grids that carry the Dunkl measure.
pub trait DunklMeasure: Grid + Sized {
    /// Quadrature weights including the Dunkl density.
    fn dunkl_weights(&self, params: &DeformationParams) -> Result<Arc<Vec<f64>>>;
}

impl DunklMeasure for ThetaGrid {
    fn dunkl_weights(&self, params: &DeformationParams) -> Result<Arc<Vec<f64>>> {
        theta_weights(params, self.len())
    }
}

impl DunklMeasure for RadialGrid {
    /// `r^{2 delta} dr` with `2 delta = 2 nu1 + 2 nu2 + 1`.
    fn dunkl_weights(&self, params: &DeformationParams) -> Result<Arc<Vec<f64>>> {
        let p = 2.0 * params.delta();
        Ok(Arc::new(
            self.nodes()
                .iter()
                .zip(self.dr_weights())
                .map(|(&r, w)| w * r.powf(p))
                .collect(),
        ))
    }
}

impl DunklMeasure for PolarGrid {
    fn dunkl_weights(&self, params: &DeformationParams) -> Result<Arc<Vec<f64>>> {
        let wr = self.radial.dunkl_weights(params)?;
        let wt = self.theta.dunkl_weights(params)?;
        Ok(Arc::new(
            wr.iter()
                .flat_map(|&a| wt.iter().map(move |&b| a * b))
                .collect(),
        ))
    }
}

/// `<f, g> = int conj(f) g dmu` under the Dunkl measure of the grid.
pub fn dunkl_inner_product<G: DunklMeasure>(
    f: &GridFunction<G>,
    g: &GridFunction<G>,
    params: &DeformationParams,
) -> Result<Complex64> {
    f.check_same_grid(g)?;
    let w = f.grid().dunkl_weights(params)?;
    Ok(weighted_dot(&w, f.values(), g.values()))
}

pub(crate) fn weighted_dot(w: &[f64], f: &[Complex64], g: &[Complex64]) -> Complex64 {
    w.iter()
        .zip(f.iter().zip(g))
        .map(|(&w, (a, b))| a.conj() * b * w)
        .sum()
}

pub fn dunkl_norm<G: DunklMeasure>(f: &GridFunction<G>, params: &DeformationParams) -> Result<f64> {
    Ok(dunkl_inner_product(f, f, params)?.re.max(0.0).sqrt())
}
