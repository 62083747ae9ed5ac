//! Exact time-dependent solutions `psi = exp(i mu) u_n(r, t) Phi(theta) chi_{m_s}`.
//!
//! `u_n` is the eigenfunction of the invariant built from the auxiliary
//! solution, `Phi` an eigenfunction of the angular part of the cyclotron term
//! and `mu` the accumulated phase
//! `mu = -s (a / 2) int omega_c - (2n + sigma + 1) int dt / (m rho^2)`,
//! where `s = +1` for positive and `-1` for negative charge and `a` is the
//! eigenvalue of `J - (g_s/2) m_s (1 + nu1 R1 + nu2 R2)` on `Phi`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{
    build_theta, build_theta_unchecked, coupled_mode, coupled_mode_unchecked, AngularIndex, AngularMode, ClosedForm, CoupledMode, ModeSpec,
    Sector, Sign,
};
use crate::dunkl::{dunkl_norm, DeformationParams};
use crate::ep::{EpSolution, EpState};
use crate::error::{domain, Error, Result};
use crate::grid::{GridFunction, PolarGrid, RadialGrid, ThetaGrid};
use crate::invariant::{radial_normalization, radial_profile, RadialSector};

/// Labels of one exact solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: AngularIndex,
    pub m_s: Sign,
    pub sector: Sector,
    pub branch: Sign,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: AngularIndex, m_s: Sign, sector: Sector, branch: Sign) -> Result<Self> {
        l.check_ladder(sector.eps())?;
        Ok(Self { n, l, m_s, sector, branch })
    }

    pub fn mode_spec(&self) -> ModeSpec {
        ModeSpec { sector: self.sector, l: self.l, branch: self.branch }
    }
}

/// Sign of the charge in the minimal coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Charge {
    /// Cyclotron term `-(omega_c / 2)(J - g_s S_z (1 + nu1 R1 + nu2 R2))`.
    #[default]
    Negative,
    /// Cyclotron term `+(omega_c / 2)(J - g_s S_z (1 + nu1 R1 + nu2 R2))`.
    Positive,
}

impl Charge {
    pub fn sign(self) -> f64 {
        match self {
            Charge::Negative => -1.0,
            Charge::Positive => 1.0,
        }
    }
}

/// How the angular factor treats the reflections in the spin term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularBasis {
    /// Eigenfunctions of `J - (g_s/2) m_s (nu1 R1 + nu2 R2)`; exact for every deformation.
    #[default]
    Coupled,
    /// Eigenfunctions of `J` with `R_i` replaced by the labels `eps_i`; exact
    /// only when `nu1 + eps nu2 = 0` or the field vanishes.
    Bare,
}

/// Spin coupling conventions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Coupling {
    pub g_s: f64,
    pub charge: Charge,
    pub angular: AngularBasis,
}

impl Default for Coupling {
    fn default() -> Self {
        Self { g_s: 2.0, charge: Charge::Negative, angular: AngularBasis::Coupled }
    }
}

impl Coupling {
    pub fn bare() -> Self {
        Self { angular: AngularBasis::Bare, ..Self::default() }
    }
}

/// The angular factor of a solution.
#[derive(Clone, Debug)]
pub enum AngularFactor {
    Bare(AngularMode),
    Coupled(CoupledMode),
}

impl AngularFactor {
    pub fn samples(&self) -> &GridFunction<ThetaGrid> {
        match self {
            AngularFactor::Bare(m) => &m.samples,
            AngularFactor::Coupled(m) => &m.samples,
        }
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        match self {
            AngularFactor::Bare(m) => m.evaluate(theta),
            AngularFactor::Coupled(m) => m.evaluate(theta),
        }
    }
}

/// Everything about one exact solution that does not depend on time.
#[derive(Clone, Debug)]
pub struct Solution {
    pub qn: QuantumNumbers,
    pub params: DeformationParams,
    pub coupling: Coupling,
    /// `lambda` of the angular mode the construction starts from (signed by the branch).
    pub lambda: f64,
    pub sigma: f64,
    /// Eigenvalue `a` of `J - (g_s/2) m_s (1 + nu1 R1 + nu2 R2)` (with reflections
    /// replaced by their labels for the bare basis).
    pub phase_coefficient: f64,
    pub angular: AngularFactor,
}

impl Solution {
    pub fn new(
        qn: QuantumNumbers,
        params: &DeformationParams,
        coupling: Coupling,
        theta: &Arc<ThetaGrid>,
    ) -> Result<Self> {
        Self::with_form(qn, params, coupling, theta, ClosedForm::Derived)
    }

    pub fn with_form(
        qn: QuantumNumbers,
        params: &DeformationParams,
        coupling: Coupling,
        theta: &Arc<ThetaGrid>,
        form: ClosedForm,
    ) -> Result<Self> {
        Self::build(qn, params, coupling, theta, form, true)
    }

    /// Builds the solution even when the angular closed form does not fit
    /// the eigenvalue problem. Meant for negative controls.
    pub fn with_form_unchecked(
        qn: QuantumNumbers,
        params: &DeformationParams,
        coupling: Coupling,
        theta: &Arc<ThetaGrid>,
        form: ClosedForm,
    ) -> Result<Self> {
        Self::build(qn, params, coupling, theta, form, false)
    }

    fn build(
        qn: QuantumNumbers,
        params: &DeformationParams,
        coupling: Coupling,
        theta: &Arc<ThetaGrid>,
        form: ClosedForm,
        checked: bool,
    ) -> Result<Self> {
        if !(coupling.g_s.is_finite()) {
            return Err(domain("g_s must be finite"));
        }
        let qn = QuantumNumbers::new(qn.n, qn.l, qn.m_s, qn.sector, qn.branch)?;
        let eps = qn.sector.eps();
        let half_g = 0.5 * coupling.g_s * qn.m_s.value();
        let (lambda, phase_coefficient, angular) = match coupling.angular {
            AngularBasis::Bare => {
                let mode = if checked {
                    build_theta(qn.mode_spec(), params, theta, form)?
                } else {
                    build_theta_unchecked(qn.mode_spec(), params, theta, form)?
                };
                let reflections = 1.0
                    + params.nu1() * qn.sector.eps1.value()
                    + params.nu2() * qn.sector.eps2.value();
                (mode.lambda, mode.lambda - half_g * reflections, AngularFactor::Bare(mode))
            }
            AngularBasis::Coupled => {
                let kappa = params.nu1() + eps.value() * params.nu2();
                let mode = if checked {
                    coupled_mode(qn.mode_spec(), params, theta, form, half_g * kappa)?
                } else {
                    coupled_mode_unchecked(qn.mode_spec(), params, theta, form, half_g * kappa)?
                };
                let lambda = qn.branch.value() * mode.base.lambda;
                (lambda, mode.eigenvalue - half_g, AngularFactor::Coupled(mode))
            }
        };
        let sigma = crate::angular::sigma_index(lambda, params, eps);
        Ok(Self { qn, params: *params, coupling, lambda, sigma, phase_coefficient, angular })
    }

    pub fn radial_sector(&self) -> RadialSector {
        RadialSector::new(self.params, self.qn.sector.eps(), self.lambda)
    }

    /// Eigenvalue `2n + sigma + 1` of the invariant.
    pub fn invariant_eigenvalue(&self) -> f64 {
        2.0 * self.qn.n as f64 + self.sigma + 1.0
    }

    /// Total phase `mu(t)` from the integrals carried by the auxiliary solution.
    pub fn phase(&self, state: &EpState) -> f64 {
        phase_total(
            self.phase_coefficient,
            self.invariant_eigenvalue(),
            self.coupling.charge,
            state.cyclotron_integral,
            state.invariant_integral,
        )
    }

    /// Energy of the stationary state for constant `m`, `omega` and `omega_c`
    /// with `rho` at the fixed point.
    pub fn stationary_energy(&self, mass: f64, omega: f64, omega_c: f64) -> Result<f64> {
        if !(mass > 0.0) {
            return Err(domain("mass must be positive"));
        }
        let big_omega = crate::profiles::omega_eff(omega, omega_c);
        Ok(self.invariant_eigenvalue() * big_omega
            + self.coupling.charge.sign() * 0.5 * omega_c * self.phase_coefficient)
    }

    /// Radial factor at one time, with the normalization constant `C_r` it used.
    pub fn radial_factor(
        &self,
        grid: &Arc<RadialGrid>,
        mass: f64,
        rho: f64,
        rho_dot: f64,
    ) -> Result<(GridFunction<RadialGrid>, f64)> {
        let c_r = radial_normalization(self.qn.n, self.sigma)?;
        let f = GridFunction::<RadialGrid>::from_fn(grid.clone(), |r| {
            radial_value(self.qn.n, self.sigma, self.params.delta(), c_r, mass, rho, rho_dot, r)
        });
        Ok((f, c_r))
    }

    /// Assembles `psi` on `grid` at time `t` of `ep`.
    pub fn assemble(&self, grid: &Arc<PolarGrid>, ep: &EpSolution, t: f64) -> Result<SpinorState> {
        let state = ep.state_at(t)?;
        self.assemble_at(grid, ep.profiles.mass(t), &state)
    }

    pub fn assemble_at(&self, grid: &Arc<PolarGrid>, mass: f64, state: &EpState) -> Result<SpinorState> {
        if grid.theta != **self.angular.samples().grid() {
            return Err(Error::Structure("angular factor was built on a different angular grid".into()));
        }
        let (radial, c_r) = self.radial_factor(&Arc::new(grid.radial.clone()), mass, state.rho, state.rho_dot)?;
        let mu = self.phase(state);
        let phase = Complex64::from_polar(1.0, mu);
        let radial: Vec<Complex64> = radial.values().iter().map(|v| v * phase).collect();
        let spatial = GridFunction::separable(grid.clone(), &radial, self.angular.samples().values())?;
        Ok(SpinorState { qn: self.qn, t: state.t, phase: mu, c_r, spatial })
    }

    /// `psi` at a single point, independent of any grid.
    pub fn evaluate(&self, mass: f64, state: &EpState, r: f64, theta: f64) -> Result<Complex64> {
        let c_r = radial_normalization(self.qn.n, self.sigma)?;
        let radial = radial_value(
            self.qn.n,
            self.sigma,
            self.params.delta(),
            c_r,
            mass,
            state.rho,
            state.rho_dot,
            r,
        );
        Ok(radial * self.angular.evaluate(theta) * Complex64::from_polar(1.0, self.phase(state)))
    }
}

/// `C r^{sigma - delta + 1/2} / rho^{sigma + 1} exp((i m rho rho' - 1) r^2 / (2 rho^2)) L_n^sigma(r^2/rho^2)`.
#[allow(clippy::too_many_arguments)]
fn radial_value(n: u32, sigma: f64, delta: f64, c_r: f64, mass: f64, rho: f64, rho_dot: f64, r: f64) -> Complex64 {
    let kappa = r / rho;
    let modulus = c_r * r.powf(-delta) * rho.powf(-0.5) * radial_profile(n, sigma, kappa);
    Complex64::from_polar(modulus, mass * rho_dot * r * r / (2.0 * rho))
}

/// `mu = -s (a / 2) int omega_c - e int dt / (m rho^2)` with `s` the charge sign and `e` the invariant eigenvalue.
pub fn phase_total(
    phase_coefficient: f64,
    invariant_eigenvalue: f64,
    charge: Charge,
    cyclotron_integral: f64,
    invariant_integral: f64,
) -> f64 {
    -charge.sign() * 0.5 * phase_coefficient * cyclotron_integral
        - invariant_eigenvalue * invariant_integral
}

/// `E = (omega_c / 2)(2n + sigma + 1 - lambda + m_s (1 + nu1 eps1 + nu2 eps2))`:
/// the stationary energy for `omega = 0`, bare angular basis, negative charge and `g_s = 2`.
pub fn stationary_energy(qn: &QuantumNumbers, params: &DeformationParams, omega_c: f64) -> Result<f64> {
    let eps = qn.sector.eps();
    let lambda = crate::angular::lambda_eigenvalue(eps, qn.l, params, qn.branch)?;
    let sigma = crate::angular::sigma_index(lambda, params, eps);
    let reflections = 1.0 + params.nu1() * qn.sector.eps1.value() + params.nu2() * qn.sector.eps2.value();
    Ok(0.5 * omega_c * (2.0 * qn.n as f64 + sigma + 1.0 - lambda + qn.m_s.value() * reflections))
}

/// A solution sampled at one time; the spin part is `chi_{m_s}`.
#[derive(Clone, Debug)]
pub struct SpinorState {
    pub qn: QuantumNumbers,
    pub t: f64,
    /// `mu(t)`
    pub phase: f64,
    /// Radial normalization constant applied to the state.
    pub c_r: f64,
    pub spatial: GridFunction<PolarGrid>,
}

impl SpinorState {
    /// `chi_{+1} = (1, 0)`, `chi_{-1} = (0, 1)`.
    pub fn spin(&self) -> [Complex64; 2] {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match self.qn.m_s {
            Sign::Plus => [one, zero],
            Sign::Minus => [zero, one],
        }
    }

    /// Spatial samples of spinor component `k` (0 = up, 1 = down).
    pub fn component(&self, k: usize) -> GridFunction<PolarGrid> {
        let c = self.spin()[k.min(1)];
        self.spatial.scaled(c)
    }

    pub fn norm(&self, params: &DeformationParams) -> Result<f64> {
        dunkl_norm(&self.spatial, params)
    }

    /// Rescales to unit norm under the polar Dunkl measure and folds the factor into `c_r`.
    pub fn normalize(mut self, params: &DeformationParams) -> Result<Self> {
        let norm = self.norm(params)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!("cannot normalize a state of norm {norm}")));
        }
        self.spatial = self.spatial.scaled(Complex64::new(1.0 / norm, 0.0));
        self.c_r /= norm;
        Ok(self)
    }
}

/// Radial extent used for a family of states: `r_min = 1e-3 min rho`,
/// `r_max = 10 max rho sqrt(2n + sigma + 3)`.
pub fn radial_bounds(ep: &EpSolution, n: u32, sigma: f64) -> (f64, f64) {
    let (lo, hi) = ep
        .states
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(s.rho), hi.max(s.rho)));
    (1e-3 * lo, 10.0 * hi * (2.0 * n as f64 + sigma + 3.0).sqrt())
}

pub fn polar_grid_for(
    ep: &EpSolution,
    n: u32,
    sigma: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<Arc<PolarGrid>> {
    let (r_min, r_max) = radial_bounds(ep, n, sigma);
    Ok(Arc::new(PolarGrid::new(
        RadialGrid::geometric(r_min, r_max, n_r)?,
        ThetaGrid::new(n_theta)?,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qn(n: u32, l: f64, m_s: Sign, eps1: Sign, eps2: Sign, branch: Sign) -> QuantumNumbers {
        QuantumNumbers::new(n, AngularIndex::from_f64(l).unwrap(), m_s, Sector::new(eps1, eps2), branch)
            .unwrap()
    }

    #[test]
    fn energy_formula_examples() {
        use Sign::*;
        let half = DeformationParams::new(0.5, 0.5).unwrap();
        let e = stationary_energy(&qn(1, 1.0, Plus, Plus, Plus, Plus), &half, 1.0).unwrap();
        assert!((e - (4.0 - 2f64.sqrt())).abs() < 1e-14);
        let e = stationary_energy(&qn(1, 1.0, Minus, Plus, Plus, Plus), &half, 1.0).unwrap();
        assert!((e - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let free = DeformationParams::undeformed();
        let e = stationary_energy(&qn(0, 1.0, Minus, Plus, Plus, Plus), &free, 1.0).unwrap();
        assert!(e.abs() < 1e-15);
    }

    #[test]
    fn bare_and_coupled_energies() {
        use Sign::*;
        let theta = Arc::new(ThetaGrid::new(32).unwrap());
        let half = DeformationParams::new(0.5, 0.5).unwrap();
        let q = qn(1, 1.0, Plus, Plus, Plus, Plus);
        let bare = Solution::new(q, &half, Coupling::bare(), &theta).unwrap();
        assert!((bare.stationary_energy(1.0, 0.0, 1.0).unwrap() - (4.0 - 2f64.sqrt())).abs() < 1e-12);
        let coupled = Solution::new(q, &half, Coupling::default(), &theta).unwrap();
        // sqrt(8 + 1) = 3, a = 3 - 1
        assert!((coupled.phase_coefficient - 2.0).abs() < 1e-12);
        assert!((coupled.stationary_energy(1.0, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn phase_examples() {
        // nu = 0, lambda = 2, sigma = 2, m = 1, rho = sqrt 2, omega_c = 1, n = 0, m_s = 1
        let t = 3.7;
        let mu = phase_total(2.0 - 1.0, 3.0, Charge::Negative, t, t / 2.0);
        assert!((mu + t).abs() < 1e-14);
        assert_eq!(phase_total(1.0, 3.0, Charge::Negative, 0.0, 0.0), 0.0);
    }

    #[test]
    fn small_r_power() {
        // for nu = 0 the radial factor behaves like r^{2l} near the origin
        let free = DeformationParams::undeformed();
        let sigma = 2.0;
        let v1 = radial_value(0, sigma, free.delta(), 1.0, 1.0, 1.0, 0.0, 1e-4).norm();
        let v2 = radial_value(0, sigma, free.delta(), 1.0, 1.0, 1.0, 0.0, 2e-4).norm();
        assert!(((v2 / v1).log2() - 2.0).abs() < 1e-6);
    }
}
