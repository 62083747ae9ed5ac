//! The Ermakov-Pinney auxiliary equation
//! `rho'' + (m'/m) rho' + Omega^2 rho = 1 / (m^2 rho^3)`.
//!
//! The phase integrals `int omega_c dt` and `int dt / (m rho^2)` are carried
//! along as extra components of the integrated state.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fd::fornberg_weights;
use crate::ode::{integrate, OdeOptions};
use crate::profiles::TimeProfiles;

/// Initial data for `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpInitial {
    pub rho: f64,
    pub rho_dot: f64,
}

impl EpInitial {
    /// The instantaneous fixed point `rho = (m Omega)^{-1/2}`, `rho' = 0` at `t0`.
    pub fn fixed_point(profiles: &TimeProfiles, t0: f64) -> Result<Self> {
        let m = profiles.mass(t0);
        let omega = profiles.omega_eff(t0);
        if !(m > 0.0 && omega > 0.0) {
            return Err(domain(format!(
                "no fixed point at t0 = {t0} (m = {m}, Omega = {omega}); give rho0 explicitly"
            )));
        }
        Ok(Self { rho: (m * omega).powf(-0.5), rho_dot: 0.0 })
    }
}

/// Integrated quantities at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpState {
    pub t: f64,
    pub rho: f64,
    pub rho_dot: f64,
    pub rho_ddot: f64,
    /// `int_{t0}^t omega_c dt'`
    pub cyclotron_integral: f64,
    /// `int_{t0}^t dt' / (m rho^2)`
    pub invariant_integral: f64,
}

/// Solution of the auxiliary equation sampled on increasing times.
#[derive(Clone, Debug)]
pub struct EpSolution {
    pub t0: f64,
    pub profiles: TimeProfiles,
    pub states: Vec<EpState>,
}

fn acceleration(p: &TimeProfiles, t: f64, rho: f64, rho_dot: f64) -> Result<f64> {
    let m = p.mass(t);
    if !(m > 0.0) {
        return Err(Error::Singularity { t, reason: format!("mass reached {m}") });
    }
    if !(rho > 1e-150 && rho.is_finite()) {
        return Err(Error::Singularity { t, reason: format!("rho collapsed to {rho}") });
    }
    let omega = p.omega_eff(t);
    Ok(-p.mass_rate(t) / m * rho_dot - omega * omega * rho + 1.0 / (m * m * rho.powi(3)))
}

/// Integrates the auxiliary equation from `t0` and samples it at `times`
/// (increasing, first element `>= t0`).
pub fn ep_solve(
    profiles: &TimeProfiles,
    initial: EpInitial,
    t0: f64,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<EpSolution> {
    if !(initial.rho > 0.0) {
        return Err(domain("rho0 must be positive"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Usage("EP output times must be strictly increasing".into()));
    }
    if let Some(&t1) = times.last() {
        profiles.validate(t0, t1)?;
    }
    let rhs = |t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let acc = acceleration(profiles, t, y[0], y[1])?;
        Ok([y[1], acc, profiles.omega_c(t), 1.0 / (profiles.mass(t) * y[0] * y[0])])
    };
    let ys = integrate(rhs, t0, [initial.rho, initial.rho_dot, 0.0, 0.0], times, opts)?;
    let states = times
        .iter()
        .zip(ys)
        .map(|(&t, y)| {
            Ok(EpState {
                t,
                rho: y[0],
                rho_dot: y[1],
                rho_ddot: acceleration(profiles, t, y[0], y[1])?,
                cyclotron_integral: y[2],
                invariant_integral: y[3],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpSolution { t0, profiles: profiles.clone(), states })
}

impl EpSolution {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// State at an arbitrary time inside the sampled range, by cubic Hermite
    /// interpolation of each component against its exact derivative.
    pub fn state_at(&self, t: f64) -> Result<EpState> {
        let s = &self.states;
        let (first, last) = match (s.first(), s.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => return Err(Error::Usage("empty EP solution".into())),
        };
        let tol = 1e-12 * (last - first).abs().max(1.0);
        if t < first - tol || t > last + tol {
            return Err(domain(format!("t = {t} outside the solved range [{first}, {last}]")));
        }
        let i = s.partition_point(|st| st.t < t);
        if i < s.len() && (s[i].t - t).abs() <= tol {
            return Ok(s[i]);
        }
        if i > 0 && (s[i - 1].t - t).abs() <= tol {
            return Ok(s[i - 1]);
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let p = &self.profiles;
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let herm = |y0: f64, d0: f64, y1: f64, d1: f64| {
            let (u2, u3) = (u * u, u * u * u);
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                + (u3 - 2.0 * u2 + u) * h * d0
                + (-2.0 * u3 + 3.0 * u2) * y1
                + (u3 - u2) * h * d1
        };
        let rho = herm(a.rho, a.rho_dot, b.rho, b.rho_dot);
        let rho_dot = herm(a.rho_dot, a.rho_ddot, b.rho_dot, b.rho_ddot);
        let inv = |st: &EpState| 1.0 / (p.mass(st.t) * st.rho * st.rho);
        Ok(EpState {
            t,
            rho,
            rho_dot,
            rho_ddot: acceleration(p, t, rho, rho_dot)?,
            cyclotron_integral: herm(a.cyclotron_integral, p.omega_c(a.t), b.cyclotron_integral, p.omega_c(b.t)),
            invariant_integral: herm(a.invariant_integral, inv(a), b.invariant_integral, inv(b)),
        })
    }

    /// `|rho'' + (m'/m) rho' + Omega^2 rho - 1/(m^2 rho^3)| / max(1, Omega^2 rho)` per sample,
    /// with `rho''` from a seven-point finite difference of `rho'` (one-sided near the ends).
    pub fn residuals(&self) -> Vec<f64> {
        const W: usize = 7;
        let s = &self.states;
        let n = s.len();
        if n < W {
            return vec![f64::NAN; n];
        }
        let p = &self.profiles;
        (0..n)
            .map(|i| {
                let start = i.saturating_sub(W / 2).min(n - W);
                let nodes: Vec<f64> = s[start..start + W].iter().map(|x| x.t).collect();
                let w = fornberg_weights(s[i].t, &nodes, 1);
                let rho_ddot: f64 = (0..W).map(|j| w[1][j] * s[start + j].rho_dot).sum();
                let (t, rho, rho_dot) = (s[i].t, s[i].rho, s[i].rho_dot);
                let m = p.mass(t);
                let omega = p.omega_eff(t);
                let lhs = rho_ddot + p.mass_rate(t) / m * rho_dot + omega * omega * rho
                    - 1.0 / (m * m * rho.powi(3));
                lhs.abs() / (omega * omega * rho).max(1.0)
            })
            .collect()
    }
}

/// Closed-form solution for constant `m` and `Omega`: `rho = sqrt(u1^2 + u2^2)`
/// with `u1(0) = rho0, u1'(0) = rho_dot0, u2(0) = 0, u2'(0) = 1 / (m rho0)`
/// solving the classical oscillator.
pub fn pinney_oracle(profiles: &TimeProfiles, initial: EpInitial, t0: f64, t: f64) -> Result<f64> {
    if !(profiles.mass.is_constant() && profiles.omega.is_constant() && profiles.omega_c.is_constant()) {
        return Err(Error::Unsupported(
            "the closed-form Ermakov-Pinney solution needs constant coefficients".into(),
        ));
    }
    let m = profiles.mass(t0);
    let omega = profiles.omega_eff(t0);
    let tau = t - t0;
    let (s, c) = if omega > 0.0 {
        ((omega * tau).sin() / omega, (omega * tau).cos())
    } else {
        (tau, 1.0)
    };
    let u1 = initial.rho * c + initial.rho_dot * s;
    let u2 = s / (m * initial.rho);
    Ok(u1.hypot(u2))
}

/// `(1/2) [(m (rho u' - rho' u))^2 + (u / rho)^2]`, conserved for solutions of
/// `u'' + (m'/m) u' + Omega^2 u = 0`.
pub fn ermakov_invariant(m: f64, rho: f64, rho_dot: f64, u: f64, u_dot: f64) -> f64 {
    let a = m * (rho * u_dot - rho_dot * u);
    let b = u / rho;
    0.5 * (a * a + b * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Profile;
    use std::f64::consts::PI;

    fn grid(t1: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t1 * i as f64 / n as f64).collect()
    }

    #[test]
    fn fixed_points_stay_put() {
        for (m, w) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)] {
            let p = TimeProfiles::constant(m, w, 0.0);
            let ic = EpInitial::fixed_point(&p, 0.0).unwrap();
            let sol = ep_solve(&p, ic, 0.0, &grid(10.0, 100), &OdeOptions::default()).unwrap();
            let expect = (m * w).powf(-0.5);
            for s in &sol.states {
                assert!((s.rho - expect).abs() < 1e-12);
            }
            assert!((expect.powi(4) * m * m * w * w - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_closed_form() {
        let p = TimeProfiles::constant(1.0, 1.0, 0.0);
        let ic = EpInitial { rho: 2.0, rho_dot: 0.0 };
        let mut ts = grid(10.0, 200);
        ts.push(10.0 + PI / 2.0);
        let sol = ep_solve(&p, ic, 0.0, &ts, &OdeOptions::default()).unwrap();
        for s in &sol.states {
            assert!((s.rho - pinney_oracle(&p, ic, 0.0, s.t).unwrap()).abs() < 1e-9);
        }
        assert!((pinney_oracle(&p, ic, 0.0, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        let last = sol.states.last().unwrap();
        assert!((last.rho - pinney_oracle(&p, ic, 0.0, last.t).unwrap()).abs() < 1e-9);
        let fine = ep_solve(&p, ic, 0.0, &grid(2.0, 400), &OdeOptions::default()).unwrap();
        let mid = fine.state_at(PI / 2.0).unwrap();
        assert!((mid.rho - 0.5).abs() < 1e-7, "{}", mid.rho - 0.5);
        let worst = fine.residuals().into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn pinney_oracle_rejects_time_dependence() {
        let mut p = TimeProfiles::constant(1.0, 1.0, 0.0);
        p.omega_c = Profile::Sinusoidal { amplitude: 1.0, depth: 0.1, frequency: 1.0 };
        let ic = EpInitial { rho: 1.0, rho_dot: 0.0 };
        assert!(matches!(pinney_oracle(&p, ic, 0.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn vanishing_mass_is_a_singularity() {
        let mut p = TimeProfiles::constant(1.0, 1.0, 0.0);
        p.mass = Profile::Linear { offset: 1.0, slope: -0.5 };
        let ic = EpInitial { rho: 1.0, rho_dot: 0.0 };
        // validation catches it before integration
        assert!(ep_solve(&p, ic, 0.0, &[3.0], &OdeOptions::default()).is_err());
        let err = acceleration(&p, 2.5, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn interpolated_integrals_track_exact_ones() {
        let mut p = TimeProfiles::constant(1.0, 0.5, 1.0);
        p.omega_c = Profile::Sinusoidal { amplitude: 1.0, depth: 0.1, frequency: 1.0 };
        let ic = EpInitial::fixed_point(&p, 0.0).unwrap();
        let sol = ep_solve(&p, ic, 0.0, &grid(5.0, 500), &OdeOptions::default()).unwrap();
        let t = 2.345;
        let s = sol.state_at(t).unwrap();
        let exact = t + 0.1 * (1.0 - t.cos());
        assert!((s.cyclotron_integral - exact).abs() < 1e-10);
    }
}
