//! Adaptive Dormand-Prince 5(4) integration with steps landing on requested output times.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the first output interval when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, initial_step: None, max_steps: 5_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// `outputs` (non-decreasing, all `>= t0`).
///
/// `f` may fail, e.g. when the solution leaves the physical domain; the error
/// is propagated unchanged. A step size collapsing below round-off is reported
/// as [`Error::Singularity`] at the time it happened.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>> {
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::Usage("output times must be non-decreasing and start at or after t0".into()));
    }
    let mut out = Vec::with_capacity(outputs.len());
    let (mut t, mut y) = (t0, y0);
    let mut k1 = f(t, &y)?;
    let span = outputs.last().map_or(0.0, |&t1| t1 - t0);
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let first = outputs.iter().find(|&&s| s > t0).map_or(span, |&s| s - t0);
        (1e-3 * first.max(span * 1e-6)).max(1e-12)
    });
    let mut steps = 0usize;
    for &target in outputs {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Numeric(format!("step budget exhausted at t = {t}")));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut k = [[0.0; N]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    *v += step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                k[s] = f(t + C[s] * step, &ys)?;
            }
            let mut y5 = y;
            let mut err = 0.0;
            for i in 0..N {
                let d5: f64 = (0..7).map(|s| B5[s] * k[s][i]).sum();
                let d4: f64 = (0..7).map(|s| B4[s] * k[s][i]).sum();
                y5[i] += step * d5;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
                err += (step * (d5 - d4) / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
                h = 0.25 * step;
            } else if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                k1 = k[6];
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // keep the controller's step when the last one was shortened to hit an output
                h = if last { h.max(step * grow) } else { step * grow };
                continue;
            } else {
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Singularity {
                    t,
                    reason: "step size underflow".into(),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let ys = integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], &ts, &OdeOptions::default())
            .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn right_hand_side_errors_propagate() {
        let r = integrate(
            |t, y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::Singularity { t, reason: "test".into() })
                } else {
                    Ok([y[0]])
                }
            },
            0.0,
            [1.0],
            &[1.0],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::Singularity { .. })));
    }

    #[test]
    fn finite_time_blow_up_is_a_singularity() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], &[2.0], &OdeOptions::default());
        match r {
            Err(Error::Singularity { t, .. }) => assert!((t - 1.0).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
    }
}
