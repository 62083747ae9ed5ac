//! The SL(2,R) generators on radial functions and the Lewis-Riesenfeld
//! invariant `I = (alpha T1 + beta T2 + gamma T3) / 2`.
//!
//! Radial functions `u(r)` live in `L^2(r^{2 delta} dr)` with
//! `delta = nu1 + nu2 + 1/2`, and with `P = -i (d/dr + delta / r)`:
//!
//! * `T1 = -u'' - (2 delta / r) u' + (lambda^2 - 2 nu1 nu2 (1 - eps)) u / r^2`,
//! * `T2 = r^2 u`,
//! * `T3 = (r P + P r) u = -i (2 r u' + (2 delta + 1) u)`,
//!
//! which close as `[T1, T2] = -2i T3`, `[T2, T3] = 4i T2`, `[T1, T3] = -4i T1`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::angular::{sigma_index, Sign};
use crate::dunkl::{weighted_dot, DeformationParams, DunklMeasure};
use crate::error::{domain, Error, Result};
use crate::ep::{EpSolution, EpState};
use crate::grid::{Grid, GridFunction, RadialGrid};
use crate::special::{gauss_laguerre, laguerre_unchecked};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coefficients `(alpha, beta, gamma)` of the invariant; `alpha beta - gamma^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sl2Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Sl2Coefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let c = Self { alpha, beta, gamma };
        let defect = c.identity_defect();
        if !(alpha > 0.0) || !(defect.abs() <= 1e-10 * (1.0 + (alpha * beta).abs())) {
            return Err(Error::Consistency(defect));
        }
        Ok(c)
    }

    /// `alpha = rho^2`, `beta = 1/rho^2 + m^2 rho'^2`, `gamma = -m rho rho'`.
    pub fn from_auxiliary(mass: f64, rho: f64, rho_dot: f64) -> Result<Self> {
        Self::new(
            rho * rho,
            1.0 / (rho * rho) + (mass * rho_dot).powi(2),
            -mass * rho * rho_dot,
        )
    }

    pub fn at(ep: &EpSolution, state: &EpState) -> Result<Self> {
        Self::from_auxiliary(ep.profiles.mass(state.t), state.rho, state.rho_dot)
    }

    /// `alpha beta - gamma^2 - 1`.
    pub fn identity_defect(&self) -> f64 {
        self.alpha * self.beta - self.gamma * self.gamma - 1.0
    }
}

/// One angular sector seen by the radial problem: `R1 R2` replaced by `eps`
/// and the angular operator squared by `lambda^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialSector {
    pub params: DeformationParams,
    pub eps: Sign,
    pub lambda: f64,
}

impl RadialSector {
    pub fn new(params: DeformationParams, eps: Sign, lambda: f64) -> Self {
        Self { params, eps, lambda }
    }

    pub fn delta(&self) -> f64 {
        self.params.delta()
    }

    pub fn sigma(&self) -> f64 {
        sigma_index(self.lambda, &self.params, self.eps)
    }

    /// `lambda^2 - 2 nu1 nu2 (1 - eps)`, the coefficient of `1/r^2` in `T1`.
    pub fn angular_constant(&self) -> f64 {
        let reflection = 1.0 - self.eps.value();
        self.lambda * self.lambda - 2.0 * self.params.nu1() * self.params.nu2() * reflection
    }

    /// `delta (delta - 1) - 2 nu1 nu2 (1 - eps)`, the constant left after
    /// writing `T1 = P^2 + lambda^2 / r^2 + constant / r^2`.
    pub fn centrifugal_constant(&self) -> f64 {
        let d = self.delta();
        d * (d - 1.0) - 2.0 * self.params.nu1() * self.params.nu2() * (1.0 - self.eps.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    T1,
    T2,
    T3,
}

/// `T_k u` on the radial grid.
pub fn apply_generator(
    k: Generator,
    f: &GridFunction<RadialGrid>,
    sector: &RadialSector,
) -> GridFunction<RadialGrid> {
    let grid = f.grid();
    let r = grid.nodes();
    let v = f.values();
    let delta = sector.delta();
    let out: Vec<Complex64> = match k {
        Generator::T1 => {
            let d = grid.differentiator();
            let (d1, d2) = (d.first(v), d.second(v));
            let c = sector.angular_constant();
            (0..v.len())
                .map(|i| -d2[i] - d1[i] * (2.0 * delta / r[i]) + v[i] * (c / (r[i] * r[i])))
                .collect()
        }
        Generator::T2 => v.iter().zip(r).map(|(x, r)| x * r * r).collect(),
        Generator::T3 => {
            let d1 = grid.differentiator().first(v);
            (0..v.len())
                .map(|i| -I * (d1[i] * (2.0 * r[i]) + v[i] * (2.0 * delta + 1.0)))
                .collect()
        }
    };
    GridFunction::from_parts(grid.clone(), out)
}

/// `sum_k c_k T_k u`.
fn combination(f: &GridFunction<RadialGrid>, sector: &RadialSector, c: [f64; 3]) -> GridFunction<RadialGrid> {
    let mut acc = vec![Complex64::new(0.0, 0.0); f.values().len()];
    for (k, ck) in [Generator::T1, Generator::T2, Generator::T3].into_iter().zip(c) {
        if ck != 0.0 {
            let t = apply_generator(k, f, sector);
            for (a, b) in acc.iter_mut().zip(t.values()) {
                *a += b * ck;
            }
        }
    }
    GridFunction::from_parts(f.grid().clone(), acc)
}

/// The invariant in one radial sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InvariantOperator {
    pub coeffs: Sl2Coefficients,
    pub sector: RadialSector,
}

impl InvariantOperator {
    pub fn new(coeffs: Sl2Coefficients, sector: RadialSector) -> Result<Self> {
        let defect = coeffs.identity_defect();
        if defect.abs() > 1e-10 * (1.0 + (coeffs.alpha * coeffs.beta).abs()) {
            return Err(Error::Consistency(defect));
        }
        Ok(Self { coeffs, sector })
    }

    /// Stationary form `(rho^2 T1 + T2 / rho^2) / 2`.
    pub fn stationary(rho: f64, sector: RadialSector) -> Result<Self> {
        Self::new(Sl2Coefficients::new(rho * rho, 1.0 / (rho * rho), 0.0)?, sector)
    }

    pub fn apply(&self, f: &GridFunction<RadialGrid>) -> GridFunction<RadialGrid> {
        let c = &self.coeffs;
        combination(f, &self.sector, [0.5 * c.alpha, 0.5 * c.beta, 0.5 * c.gamma])
    }

    /// Dense matrix on the interior nodes (the function vanishes at both ends).
    pub fn interior_matrix(&self, grid: &RadialGrid) -> DMatrix<Complex64> {
        let n = grid.len();
        let r = grid.nodes();
        let d1 = grid.differentiator().matrix(1);
        let d2 = grid.differentiator().matrix(2);
        let c = &self.coeffs;
        let delta = self.sector.delta();
        let ang = self.sector.angular_constant();
        DMatrix::from_fn(n - 2, n - 2, |i, j| {
            let (i, j) = (i + 1, j + 1);
            let ri = r[i];
            let diag = if i == j { 1.0 } else { 0.0 };
            let t1 = -d2[(i, j)] - 2.0 * delta / ri * d1[(i, j)] + diag * ang / (ri * ri);
            let t2 = diag * ri * ri;
            let t3 = -I * (2.0 * ri * d1[(i, j)] + diag * (2.0 * delta + 1.0));
            (t3 * c.gamma + t1 * c.alpha + t2 * c.beta) * 0.5
        })
    }

    /// The `count` lowest eigenvalues (by real part) on the interior of `grid`.
    pub fn spectrum(&self, grid: &RadialGrid, count: usize) -> Result<Vec<Complex64>> {
        let m = self.interior_matrix(grid);
        let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 0)
            .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
        let mut ev: Vec<Complex64> = schur
            .eigenvalues()
            .ok_or_else(|| Error::Numeric("complex Schur form is not triangular".into()))?
            .iter()
            .copied()
            .collect();
        if ev.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numeric("non-finite invariant eigenvalue".into()));
        }
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        ev.truncate(count);
        Ok(ev)
    }
}

/// `x^{sigma + 1/2} exp(-x^2/2) L_n^sigma(x^2)` without normalization.
pub fn radial_profile(n: u32, sigma: f64, kappa: f64) -> f64 {
    kappa.powf(sigma + 0.5) * (-0.5 * kappa * kappa).exp() * laguerre_unchecked(n, sigma, kappa * kappa)
}

/// The constant making [`radial_profile`] unit-norm under `d kappa`, from Gauss-Laguerre quadrature.
pub fn radial_normalization(n: u32, sigma: f64) -> Result<f64> {
    if !(sigma > -1.0) {
        return Err(domain(format!("sigma must exceed -1 (got {sigma})")));
    }
    // int kappa^{2 sigma + 1} e^{-kappa^2} L^2 d kappa = (1/2) int u^sigma e^{-u} L(u)^2 du
    let rule = gauss_laguerre(n as usize + 1, sigma)?;
    let integral = 0.5 * rule.integrate(|u| laguerre_unchecked(n, sigma, u).powi(2));
    Ok(integral.sqrt().recip())
}

/// `Q(r / rho)`, unit norm under `d kappa` with `kappa = r / rho`.
pub fn radial_eigenfunction(
    n: u32,
    sigma: f64,
    rho: f64,
    grid: &Arc<RadialGrid>,
) -> Result<GridFunction<RadialGrid>> {
    if !(rho > 0.0) {
        return Err(domain("rho must be positive"));
    }
    let c = radial_normalization(n, sigma)?;
    Ok(GridFunction::<RadialGrid>::from_fn(grid.clone(), |r| {
        Complex64::new(c * radial_profile(n, sigma, r / rho), 0.0)
    }))
}

/// Eigenfunction of the invariant built from `(rho, rho')`, unit norm under `r^{2 delta} dr`:
/// `exp(i m rho' r^2 / (2 rho)) rho^{-1/2} r^{-delta} Q(r / rho)`, eigenvalue `2n + sigma + 1`.
pub fn invariant_eigenfunction(
    n: u32,
    sector: &RadialSector,
    mass: f64,
    rho: f64,
    rho_dot: f64,
    grid: &Arc<RadialGrid>,
) -> Result<GridFunction<RadialGrid>> {
    let sigma = sector.sigma();
    let delta = sector.delta();
    let c = radial_normalization(n, sigma)? / rho.sqrt();
    let chirp = mass * rho_dot / (2.0 * rho);
    Ok(GridFunction::<RadialGrid>::from_fn(grid.clone(), |r| {
        Complex64::from_polar(c * r.powf(-delta) * radial_profile(n, sigma, r / rho), chirp * r * r)
    }))
}

/// `exp(i m rho' r^2 / (2 rho)) f`, the map taking eigenfunctions of the
/// stationary-form invariant to eigenfunctions of the full one.
pub fn chirp(f: &GridFunction<RadialGrid>, mass: f64, rho: f64, rho_dot: f64) -> GridFunction<RadialGrid> {
    let a = mass * rho_dot / (2.0 * rho);
    let r = f.grid().nodes();
    GridFunction::from_parts(
        f.grid().clone(),
        f.values().iter().zip(r).map(|(v, r)| v * Complex64::from_polar(1.0, a * r * r)).collect(),
    )
}

/// The radial reduced Hamiltonian `T1 / (2m) + m Omega^2 T2 / 2`.
pub fn reduced_hamiltonian(
    f: &GridFunction<RadialGrid>,
    sector: &RadialSector,
    mass: f64,
    omega_eff: f64,
) -> GridFunction<RadialGrid> {
    combination(f, sector, [0.5 / mass, 0.5 * mass * omega_eff * omega_eff, 0.0])
}

/// Maximum over probes and centre times of
/// `|d/dt <f|I|f> + <f|(1/i)[I, H]|f>|` with `H` the reduced Hamiltonian.
///
/// The time derivative is a central difference with step `dt`; the states at
/// `t +- dt` are read from `ep` (exact when those times are samples of `ep`).
/// The commutator term uses `<f|[I,H]|f> = 2i Im <I f, H f>`, valid because
/// both operators are symmetric. `coeff_map` can alter the coefficients
/// before use (identity for the physical check).
pub fn conservation_residual(
    ep: &EpSolution,
    sector: &RadialSector,
    probes: &[GridFunction<RadialGrid>],
    centres: &[f64],
    dt: f64,
    coeff_map: impl Fn(Sl2Coefficients) -> Sl2Coefficients,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Usage("at least one probe state is needed".into()));
    }
    let grid = probes[0].grid();
    let w = grid.dunkl_weights(&sector.params)?;
    let invariant_at = |t: f64| -> Result<InvariantOperator> {
        let s = ep.state_at(t)?;
        let c = coeff_map(Sl2Coefficients::at(ep, &s)?);
        InvariantOperator::new(c, *sector)
    };
    let mut worst = 0.0f64;
    for &t in centres {
        let (ip, im, ic) = (invariant_at(t + dt)?, invariant_at(t - dt)?, invariant_at(t)?);
        let mass = ep.profiles.mass(t);
        let omega = ep.profiles.omega_eff(t);
        for f in probes {
            let expect = |op: &InvariantOperator| weighted_dot(&w, f.values(), op.apply(f).values()).re;
            let d_dt = (expect(&ip) - expect(&im)) / (2.0 * dt);
            let i_f = ic.apply(f);
            let h_f = reduced_hamiltonian(f, sector, mass, omega);
            // (1/i) <f|[I,H]|f> = (1/i) 2i Im<If, Hf> = 2 Im<If, Hf>
            let comm = 2.0 * weighted_dot(&w, i_f.values(), h_f.values()).im;
            worst = worst.max((d_dt + comm).abs());
        }
    }
    Ok(worst)
}

/// Smooth probe states that vanish to round-off at both ends of `grid`,
/// unit norm under the radial Dunkl measure.
pub fn probe_states(
    grid: &Arc<RadialGrid>,
    params: &DeformationParams,
    centre: f64,
    count: usize,
) -> Result<Vec<GridFunction<RadialGrid>>> {
    let w = grid.dunkl_weights(params)?;
    (0..count)
        .map(|j| {
            let c = centre * (0.7 + 0.08 * j as f64);
            let width = 0.35 * centre * (1.0 + 0.1 * j as f64);
            let kick = 0.3 * j as f64 / centre;
            let f = GridFunction::<RadialGrid>::from_fn(grid.clone(), |r| {
                let g = (-((r - c) / width).powi(2)).exp() * (r / c).powi(2);
                Complex64::from_polar(g, kick * r)
            });
            let norm = weighted_dot(&w, f.values(), f.values()).re.sqrt();
            if !(norm > 0.0) {
                return Err(Error::Numeric("probe state has zero norm on this grid".into()));
            }
            Ok(f.scaled(Complex64::new(1.0 / norm, 0.0)))
        })
        .collect()
}
