//! Eigenpairs of the Dunkl angular operator.
//!
//! `J` anticommutes with each reflection and commutes with their product
//! `R1 R2 (theta -> theta + pi)`, so eigenfunctions carry a definite
//! `eps = eps1 * eps2` only; `R1` maps the `lambda` eigenfunction onto the
//! `-lambda` one. With `x = -cos(2 theta)` the eigenfunctions are
//!
//! * `eps = +1`, degree `l >= 1`:
//!   `P_l^(nu1-1/2, nu2-1/2)(x) + c sin cos P_{l-1}^(nu1+1/2, nu2+1/2)(x)`,
//!   `lambda = +-2 sqrt(l (l + nu1 + nu2))`;
//! * `eps = -1`, `l = k + 1/2`:
//!   `cos P_k^(nu1+1/2, nu2-1/2)(x) + c sin P_k^(nu1-1/2, nu2+1/2)(x)`,
//!   `lambda = +-2 sqrt((l + nu1)(l + nu2))`,
//!
//! where the ratio `c` is purely imaginary and is fitted by least squares.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dunkl::{dunkl_angular_apply, dunkl_norm, theta_weights, weighted_dot, DeformationParams};
use crate::error::{domain, Error, Result};
use crate::grid::{Axis, Grid, GridFunction, ThetaGrid};
use crate::special::jacobi_unchecked;

/// Relative eigen-equation residual accepted by [`build_theta`].
pub const CONSTRUCTION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(domain(format!("expected +1 or -1, got {v}"))),
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        Self::from_i64(v as i64)
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Reflection labels `(eps1, eps2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub eps1: Sign,
    pub eps2: Sign,
}

impl Sector {
    pub const ALL: [Sector; 4] = [
        Sector { eps1: Sign::Plus, eps2: Sign::Plus },
        Sector { eps1: Sign::Plus, eps2: Sign::Minus },
        Sector { eps1: Sign::Minus, eps2: Sign::Plus },
        Sector { eps1: Sign::Minus, eps2: Sign::Minus },
    ];

    pub fn new(eps1: Sign, eps2: Sign) -> Self {
        Self { eps1, eps2 }
    }

    pub fn eps(&self) -> Sign {
        self.eps1 * self.eps2
    }

    pub fn swapped(&self) -> Self {
        Self { eps1: self.eps2, eps2: self.eps1 }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{})", self.eps1, self.eps2)
    }
}

/// Angular quantum number `l`, a positive integer or half-odd integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularIndex {
    twice: u32,
}

impl AngularIndex {
    pub fn from_f64(l: f64) -> Result<Self> {
        let twice = 2.0 * l;
        if !(l > 0.0) || (twice - twice.round()).abs() > 1e-9 || twice > u32::MAX as f64 {
            return Err(domain(format!(
                "l must be a positive integer or half-odd integer (got {l})"
            )));
        }
        Ok(Self { twice: twice.round() as u32 })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(domain("l must be positive"));
        }
        Ok(Self { twice })
    }

    /// The `i`-th (from 0) admissible value in the ladder of `eps`.
    pub fn nth(eps: Sign, i: u32) -> Self {
        match eps {
            Sign::Plus => Self { twice: 2 * (i + 1) },
            Sign::Minus => Self { twice: 2 * i + 1 },
        }
    }

    pub fn value(&self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(&self) -> u32 {
        self.twice
    }

    pub fn check_ladder(&self, eps: Sign) -> Result<()> {
        match (eps, self.twice % 2) {
            (Sign::Plus, 0) | (Sign::Minus, 1) => Ok(()),
            (Sign::Plus, _) => Err(domain(format!(
                "eps = +1 requires a positive integer l (got {self})"
            ))),
            (Sign::Minus, _) => Err(domain(format!(
                "eps = -1 requires a half-odd-integer l in {{1/2, 3/2, ...}} (got {self})"
            ))),
        }
    }
}

impl fmt::Display for AngularIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl Serialize for AngularIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for AngularIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Self::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// `+-2 sqrt(l (l + nu1 + nu2))` for `eps = +1`, `+-2 sqrt((l + nu1)(l + nu2))` for `eps = -1`.
pub fn lambda_eigenvalue(
    eps: Sign,
    l: AngularIndex,
    params: &DeformationParams,
    branch: Sign,
) -> Result<f64> {
    l.check_ladder(eps)?;
    let lv = l.value();
    let (nu1, nu2) = (params.nu1(), params.nu2());
    let sq = match eps {
        Sign::Plus => lv * (lv + nu1 + nu2),
        Sign::Minus => (lv + nu1) * (lv + nu2),
    };
    Ok(branch.value() * 2.0 * sq.sqrt())
}

/// `sqrt(lambda^2 + (nu1 + eps nu2)^2)`.
pub fn sigma_index(lambda: f64, params: &DeformationParams, eps: Sign) -> f64 {
    let k = params.nu1() + eps.value() * params.nu2();
    (lambda * lambda + k * k).sqrt()
}

/// Which two-term Jacobi ansatz [`build_theta`] fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    /// The forms in the module documentation; they solve the eigen-equation exactly.
    #[default]
    Derived,
    /// Jacobi parameters as commonly printed, `(nu1+1/2, nu2+1/2)` for both
    /// terms when `eps = +1` and no `cos` factor when `eps = -1`; argument `-cos(2 theta)`.
    Printed,
    /// As `Printed`, with the polynomial argument `-2 cos(theta)`.
    PrintedArgument,
}

/// The two basis functions `(A, B)` of the ansatz at one angle.
pub fn ansatz_terms(form: ClosedForm, eps: Sign, l: AngularIndex, params: &DeformationParams, theta: f64) -> (f64, f64) {
    let (nu1, nu2) = (params.nu1(), params.nu2());
    let (s, c) = theta.sin_cos();
    let x = match form {
        ClosedForm::PrintedArgument => -2.0 * c,
        _ => -(2.0 * theta).cos(),
    };
    let lv = l.twice() / 2;
    match (form, eps) {
        (ClosedForm::Derived, Sign::Plus) => (
            jacobi_unchecked(lv, nu1 - 0.5, nu2 - 0.5, x),
            s * c * jacobi_unchecked(lv - 1, nu1 + 0.5, nu2 + 0.5, x),
        ),
        (ClosedForm::Derived, Sign::Minus) => (
            c * jacobi_unchecked(lv, nu1 + 0.5, nu2 - 0.5, x),
            s * jacobi_unchecked(lv, nu1 - 0.5, nu2 + 0.5, x),
        ),
        (_, Sign::Plus) => (
            jacobi_unchecked(lv, nu1 + 0.5, nu2 + 0.5, x),
            s * c * jacobi_unchecked(lv - 1, nu1 + 0.5, nu2 + 0.5, x),
        ),
        (_, Sign::Minus) => (
            jacobi_unchecked(lv, nu1 + 0.5, nu2 - 0.5, x),
            s * jacobi_unchecked(lv, nu1 - 0.5, nu2 + 0.5, x),
        ),
    }
}

/// Labels of an angular eigenmode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeSpec {
    pub sector: Sector,
    pub l: AngularIndex,
    pub branch: Sign,
}

/// A sampled eigenfunction of `J` with unit Dunkl norm.
#[derive(Clone, Debug)]
pub struct AngularMode {
    pub spec: ModeSpec,
    pub params: DeformationParams,
    pub form: ClosedForm,
    pub lambda: f64,
    /// Coefficients of the two ansatz terms after normalization; the first is real and positive.
    pub coeffs: (Complex64, Complex64),
    /// `||J Theta - lambda Theta|| / ||Theta||` under the Dunkl norm.
    pub residual: f64,
    pub samples: GridFunction<ThetaGrid>,
}

impl AngularMode {
    pub fn eps(&self) -> Sign {
        self.spec.sector.eps()
    }

    pub fn sigma(&self) -> f64 {
        sigma_index(self.lambda, &self.params, self.eps())
    }

    /// The eigenfunction at an arbitrary angle.
    pub fn evaluate(&self, theta: f64) -> Complex64 {
        let (a, b) = ansatz_terms(self.form, self.eps(), self.spec.l, &self.params, theta);
        self.coeffs.0 * a + self.coeffs.1 * b
    }
}

/// Fits and normalizes the closed-form eigenfunction for `spec` on `grid`.
///
/// Fails with [`Error::Construction`] when the best fit leaves a relative
/// residual above [`CONSTRUCTION_TOLERANCE`].
pub fn build_theta(
    spec: ModeSpec,
    params: &DeformationParams,
    grid: &Arc<ThetaGrid>,
    form: ClosedForm,
) -> Result<AngularMode> {
    let mode = build_theta_unchecked(spec, params, grid, form)?;
    if mode.residual > CONSTRUCTION_TOLERANCE {
        return Err(Error::Construction {
            residual: mode.residual,
            tolerance: CONSTRUCTION_TOLERANCE,
        });
    }
    Ok(mode)
}

/// As [`build_theta`], returning the best fit whatever its residual.
pub fn build_theta_unchecked(
    spec: ModeSpec,
    params: &DeformationParams,
    grid: &Arc<ThetaGrid>,
    form: ClosedForm,
) -> Result<AngularMode> {
    let eps = spec.sector.eps();
    let lambda = lambda_eigenvalue(eps, spec.l, params, spec.branch)?;
    let n = grid.len();
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let (ak, bk) = ansatz_terms(form, eps, spec.l, params, grid.node(k));
        a.push(Complex64::new(ak, 0.0));
        b.push(Complex64::new(bk, 0.0));
    }
    let a = GridFunction::from_parts(grid.clone(), a);
    let b = GridFunction::from_parts(grid.clone(), b);
    let shift = |f: &GridFunction<ThetaGrid>| {
        dunkl_angular_apply(f, params)
            .lincomb(Complex64::new(1.0, 0.0), f, Complex64::new(-lambda, 0.0))
            .expect("same grid")
    };
    let (ra, rb) = (shift(&a), shift(&b));

    // minimize |ca ra + cb rb|^2 / |ca a + cb b|^2 with the plain discrete norm
    let gram = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
    };
    let g = Matrix2::new(
        gram(ra.values(), ra.values()),
        gram(ra.values(), rb.values()),
        gram(rb.values(), ra.values()),
        gram(rb.values(), rb.values()),
    );
    let s = Matrix2::new(
        gram(a.values(), a.values()),
        gram(a.values(), b.values()),
        gram(b.values(), a.values()),
        gram(b.values(), b.values()),
    );
    let (ca, cb) = smallest_generalized(&g, &s)?;

    let wt = theta_weights(params, n)?;
    let combine = |x: &GridFunction<ThetaGrid>, y: &GridFunction<ThetaGrid>| {
        x.lincomb(ca, y, cb).expect("same grid")
    };
    let theta = combine(&a, &b);
    let norm = weighted_dot(&wt, theta.values(), theta.values()).re.max(0.0).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Numeric("angular ansatz has zero norm on this grid".into()));
    }
    let resid = combine(&ra, &rb);
    let residual = weighted_dot(&wt, resid.values(), resid.values()).re.max(0.0).sqrt() / norm;

    // leading coefficient real and positive
    let lead = if ca.norm() > 1e-12 * cb.norm() { ca } else { cb };
    let phase = lead.conj() / lead.norm();
    let scale = phase / norm;
    let coeffs = if lead == ca {
        (Complex64::new(ca.norm() / norm, 0.0), cb * scale)
    } else {
        (ca * scale, Complex64::new(cb.norm() / norm, 0.0))
    };
    Ok(AngularMode {
        spec,
        params: *params,
        form,
        lambda,
        coeffs,
        residual,
        samples: theta.scaled(scale),
    })
}

/// Minimizer of `c^H G c / c^H S c` for Hermitian 2x2 `G` and positive `S`.
fn smallest_generalized(g: &Matrix2<Complex64>, s: &Matrix2<Complex64>) -> Result<(Complex64, Complex64)> {
    // Cholesky of S, then the ordinary Hermitian problem L^-1 G L^-H.
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Numeric("ansatz terms are linearly dependent on this grid".into()))?;
    let l = chol.l();
    let linv = l
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular ansatz Gram matrix".into()))?;
    let h = linv * g * linv.adjoint();
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let i = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let y = eig.eigenvectors.column(i).into_owned();
    let c = linv.adjoint() * y;
    Ok((c[0], c[1]))
}

/// Matrix of `-i J` on the subspace `f(theta + pi) = eps f(theta)`, indexed by the first half of the grid.
fn restricted_operator(params: &DeformationParams, grid: &Arc<ThetaGrid>, eps: Sign) -> DMatrix<f64> {
    let n = grid.len();
    let h = n / 2;
    let mut m = DMatrix::zeros(h, h);
    for j in 0..h {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[j] = Complex64::new(1.0, 0.0);
        v[j + h] = Complex64::new(eps.value(), 0.0);
        let f = GridFunction::from_parts(grid.clone(), v);
        let jf = dunkl_angular_apply(&f, params);
        for i in 0..h {
            m[(i, j)] = jf.values()[i].im;
        }
    }
    if eps == Sign::Plus {
        // The Nyquist mode (-1)^k lies in this subspace and is annihilated by
        // the discrete operator. Moving it to a large real eigenvalue of D
        // keeps it out of the low end of the spectrum and leaves the other
        // eigenvalues untouched, since its span is invariant.
        let shift = 1e6 * n as f64;
        for i in 0..h {
            for j in 0..h {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                m[(i, j)] += shift * sign / h as f64;
            }
        }
    }
    m
}

/// Numerical eigenpairs of `J` on the sector of `eps = eps1 * eps2`: the
/// `count` eigenvalues of smallest magnitude, sorted ascending, with
/// eigenfunctions of unit Dunkl norm.
pub fn solve_angular_numeric(
    params: &DeformationParams,
    sector: Sector,
    grid: &Arc<ThetaGrid>,
    count: usize,
) -> Result<Vec<(f64, GridFunction<ThetaGrid>)>> {
    if count == 0 {
        return Err(domain("count must be at least 1"));
    }
    let eps = sector.eps();
    let n = grid.len();
    let h = n / 2;
    if count > h {
        return Err(domain(format!("at most {h} eigenpairs exist on this grid")));
    }
    let d = restricted_operator(params, grid, eps);
    // J = i D, so J v = lambda v with lambda = i mu for eigenvalues mu of D.
    let mut mus: Vec<Complex64> = d.clone().complex_eigenvalues().iter().copied().collect();
    if mus.iter().any(|mu| !mu.is_finite()) {
        return Err(Error::Numeric("angular eigen-solver produced non-finite eigenvalues".into()));
    }
    mus.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(b.im.total_cmp(&a.im)));
    let mut lambdas: Vec<f64> = mus.iter().take(count).map(|mu| -mu.im).collect();
    lambdas.sort_by(f64::total_cmp);

    let j: DMatrix<Complex64> = d.map(|x| Complex64::new(0.0, x));
    lambdas
        .into_iter()
        .map(|lambda| {
            let v = inverse_iteration(&j, lambda)?;
            let mut full = vec![Complex64::new(0.0, 0.0); n];
            for k in 0..h {
                full[k] = v[k];
                full[k + h] = v[k] * eps.value();
            }
            let f = GridFunction::from_parts(grid.clone(), full);
            let norm = dunkl_norm(&f, params)?;
            Ok((lambda, f.scaled(Complex64::new(1.0 / norm, 0.0))))
        })
        .collect()
}

pub(crate) fn inverse_iteration(m: &DMatrix<Complex64>, lambda: f64) -> Result<DVector<Complex64>> {
    let n = m.nrows();
    let shift = Complex64::new(lambda + 1e-10 * lambda.abs().max(1.0), 0.0);
    let shifted = m - DMatrix::from_diagonal_element(n, n, shift);
    let lu = shifted.lu();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.0));
    for _ in 0..3 {
        v = lu
            .solve(&v)
            .ok_or_else(|| Error::Numeric("inverse iteration hit a singular matrix".into()))?;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numeric("inverse iteration diverged".into()));
        }
        v /= Complex64::new(norm, 0.0);
    }
    Ok(v)
}

/// Eigenfunction of `J - c R1` built from `Theta` (eigenvalue `|lambda|`) and
/// `R1 Theta` (eigenvalue `-|lambda|`).
///
/// On the `eps` sector `nu1 R1 + nu2 R2 = (nu1 + eps nu2) R1`, so the spin
/// term of the Hamiltonian couples the two branches with
/// `c = (g_s / 2) m_s (nu1 + eps nu2)`. The coupled eigenvalues are
/// `+-sqrt(lambda^2 + c^2)`.
#[derive(Clone, Debug)]
pub struct CoupledMode {
    /// Mode of positive `lambda` the construction starts from.
    pub base: AngularMode,
    pub coupling: f64,
    /// Signed eigenvalue of `J - c R1`.
    pub eigenvalue: f64,
    /// Weights of `Theta` and `R1 Theta`; unit norm.
    pub weights: (f64, f64),
    pub samples: GridFunction<ThetaGrid>,
}

impl CoupledMode {
    pub fn evaluate(&self, theta: f64) -> Complex64 {
        self.base.evaluate(theta) * self.weights.0
            + self.base.evaluate(std::f64::consts::PI - theta) * self.weights.1
    }
}

pub fn coupled_mode(
    spec: ModeSpec,
    params: &DeformationParams,
    grid: &Arc<ThetaGrid>,
    form: ClosedForm,
    coupling: f64,
) -> Result<CoupledMode> {
    let base = build_theta(ModeSpec { branch: Sign::Plus, ..spec }, params, grid, form)?;
    couple(spec.branch, base, coupling)
}

/// As [`coupled_mode`], without rejecting a poor closed-form fit.
pub fn coupled_mode_unchecked(
    spec: ModeSpec,
    params: &DeformationParams,
    grid: &Arc<ThetaGrid>,
    form: ClosedForm,
    coupling: f64,
) -> Result<CoupledMode> {
    let base = build_theta_unchecked(ModeSpec { branch: Sign::Plus, ..spec }, params, grid, form)?;
    couple(spec.branch, base, coupling)
}

fn couple(branch: Sign, base: AngularMode, coupling: f64) -> Result<CoupledMode> {
    let lambda = base.lambda;
    let s = (lambda * lambda + coupling * coupling).sqrt();
    let (w0, w1) = match branch {
        Sign::Plus => (lambda + s, -coupling),
        Sign::Minus => (coupling, lambda + s),
    };
    let norm = (w0 * w0 + w1 * w1).sqrt();
    let weights = (w0 / norm, w1 / norm);
    let reflected = crate::dunkl::reflect(&base.samples, Axis::First)?;
    let samples = base.samples.lincomb(
        Complex64::new(weights.0, 0.0),
        &reflected,
        Complex64::new(weights.1, 0.0),
    )?;
    Ok(CoupledMode {
        base,
        coupling,
        eigenvalue: branch.value() * s,
        weights,
        samples,
    })
}
