//! Classical orthogonal polynomials and Gauss-type quadrature rules.
//!
//! Polynomials are evaluated by their ascending three-term recurrences.
//! Quadrature rules come from the Golub-Welsch eigenvalue construction on the
//! Jacobi matrix of the corresponding weight.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};

fn check_param(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= -1.0 {
        return Err(domain(format!("{name} must exceed -1 (got {value})")));
    }
    Ok(())
}

/// Jacobi polynomial `P_l^{(a,b)}(x)`.
///
/// Valid for any real `x`; the recurrence is used outside `[-1, 1]` as well.
pub fn jacobi(l: u32, a: f64, b: f64, x: f64) -> Result<f64> {
    check_param("alpha", a)?;
    check_param("beta", b)?;
    Ok(jacobi_unchecked(l, a, b, x))
}

pub(crate) fn jacobi_unchecked(l: u32, a: f64, b: f64, x: f64) -> f64 {
    let mut p_prev = 1.0;
    if l == 0 {
        return p_prev;
    }
    let mut p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for n in 1..l {
        let n = f64::from(n);
        let s = 2.0 * n + a + b;
        let c0 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * s;
        let c1 = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let c2 = 2.0 * (n + a) * (n + b) * (s + 2.0);
        let next = (c1 * p - c2 * p_prev) / c0;
        p_prev = p;
        p = next;
    }
    p
}

/// Generalized Laguerre polynomial `L_n^{sigma}(x)`.
pub fn laguerre(n: u32, sigma: f64, x: f64) -> Result<f64> {
    check_param("sigma", sigma)?;
    Ok(laguerre_unchecked(n, sigma, x))
}

pub(crate) fn laguerre_unchecked(n: u32, sigma: f64, x: f64) -> f64 {
    let mut l_prev = 1.0;
    if n == 0 {
        return l_prev;
    }
    let mut l = 1.0 + sigma - x;
    for k in 1..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + sigma - x) * l - (k + sigma) * l_prev) / (k + 1.0);
        l_prev = l;
        l = next;
    }
    l
}

/// Nodes and weights of a Gauss rule, nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> Result<GaussRule> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::Numeric("Golub-Welsch produced non-finite nodes".into()));
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`.
///
/// Exact for polynomials of degree `2n - 1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    check_param("alpha", a)?;
    check_param("beta", b)?;
    if n == 0 {
        return Err(domain("quadrature needs at least one node"));
    }
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag.push(if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        });
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let beta2 = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(beta2.sqrt());
    }
    let mu0 = (ab + 1.0).exp2() * (libm::lgamma(a + 1.0) + libm::lgamma(b + 1.0) - libm::lgamma(ab + 2.0)).exp();
    golub_welsch(&diag, &off, mu0)
}

/// Gauss-Laguerre rule for the weight `x^alpha e^{-x}` on `[0, inf)`.
///
/// No truncation of the half-line is involved: the rule integrates
/// `x^alpha e^{-x} p(x)` exactly for polynomials `p` of degree `2n - 1`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Result<GaussRule> {
    check_param("alpha", alpha)?;
    if n == 0 {
        return Err(domain("quadrature needs at least one node"));
    }
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    golub_welsch(&diag, &off, libm::tgamma(alpha + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_low_degrees() {
        assert_eq!(jacobi(0, 0.7, -0.2, 3.1).unwrap(), 1.0);
        assert!(jacobi(1, 0.5, 0.5, 0.0).unwrap().abs() < 1e-15);
        // P_l^{(a,b)}(1) = binom(l + a, l)
        assert!((jacobi(2, 1.0, 0.0, 1.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_low_degrees() {
        assert_eq!(laguerre(0, 3.0, 5.0).unwrap(), 1.0);
        assert!((laguerre(1, 3.0, 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((laguerre(2, 0.0, 2.0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn parameter_domain_is_enforced() {
        assert!(matches!(jacobi(2, -1.0, 0.0, 0.1), Err(Error::Domain(_))));
        assert!(matches!(jacobi(2, 0.0, -1.5, 0.1), Err(Error::Domain(_))));
        assert!(matches!(laguerre(2, -1.0, 0.1), Err(Error::Domain(_))));
        assert!(gauss_jacobi(4, -1.2, 0.0).is_err());
    }

    #[test]
    fn gauss_jacobi_legendre_case() {
        let rule = gauss_jacobi(3, 0.0, 0.0).unwrap();
        let x = (0.6f64).sqrt();
        assert!((rule.nodes[0] + x).abs() < 1e-14);
        assert!((rule.nodes[2] - x).abs() < 1e-14);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_laguerre_moments() {
        // int x^alpha e^{-x} x^k dx = Gamma(alpha + k + 1)
        let alpha = 0.37;
        let rule = gauss_laguerre(12, alpha).unwrap();
        for k in 0..20 {
            let exact = libm::tgamma(alpha + k as f64 + 1.0);
            let got = rule.integrate(|x| x.powi(k));
            assert!(((got - exact) / exact).abs() < 1e-11, "k={k}: {got} vs {exact}");
        }
    }
}
