//! Time-dependent mass, trap frequency and cyclotron frequency.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A scalar function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    /// `offset + slope * t`
    Linear { offset: f64, slope: f64 },
    /// `amplitude * (1 + depth * sin(frequency * t))`
    Sinusoidal { amplitude: f64, depth: f64, frequency: f64 },
    #[serde(skip)]
    Tabulated(Spline),
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { offset, slope } => offset + slope * t,
            Profile::Sinusoidal { amplitude, depth, frequency } => {
                amplitude * (1.0 + depth * (frequency * t).sin())
            }
            Profile::Tabulated(s) => s.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { slope, .. } => *slope,
            Profile::Sinusoidal { amplitude, depth, frequency } => {
                amplitude * depth * frequency * (frequency * t).cos()
            }
            Profile::Tabulated(s) => s.derivative(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Profile::Constant { .. } => true,
            Profile::Linear { slope, .. } => *slope == 0.0,
            Profile::Sinusoidal { depth, frequency, .. } => *depth == 0.0 || *frequency == 0.0,
            Profile::Tabulated(_) => false,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Profile::Constant { value } => value.is_finite(),
            Profile::Linear { offset, slope } => offset.is_finite() && slope.is_finite(),
            Profile::Sinusoidal { amplitude, depth, frequency } => {
                amplitude.is_finite() && depth.is_finite() && frequency.is_finite()
            }
            Profile::Tabulated(_) => true,
        }
    }

    /// Lower bound of the profile on `[t0, t1]`.
    fn lower_bound(&self, t0: f64, t1: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { .. } => self.value(t0).min(self.value(t1)),
            Profile::Sinusoidal { amplitude, depth, .. } => {
                if self.is_constant() {
                    *amplitude
                } else {
                    amplitude * (1.0 - depth.abs()).min(1.0 + depth.abs())
                }
            }
            Profile::Tabulated(s) => s.lower_bound(t0, t1),
        }
    }

    fn range(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Tabulated(s) => Some((s.knots[0], *s.knots.last().unwrap())),
            _ => None,
        }
    }
}

/// Natural cubic spline through tabulated samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Spline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::Table("a spline needs at least two samples per column".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("t must be strictly increasing".into()));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Table("table contains non-finite values".into()));
        }
        // Tridiagonal system for the interior second derivatives (natural ends).
        let mut second = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0
                    * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Ok(Self { knots, values, second })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        self.knots.partition_point(|&k| k <= t).clamp(1, n - 1) - 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        (self.values[i + 1] - self.values[i]) / h
            + ((1.0 - 3.0 * a * a) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1]) * h
                / 6.0
    }

    fn lower_bound(&self, t0: f64, t1: f64) -> f64 {
        // dense sampling of each segment overlapping the window
        let mut lo = f64::INFINITY;
        for i in 0..self.knots.len() - 1 {
            let (a, b) = (self.knots[i].max(t0), self.knots[i + 1].min(t1));
            if a > b {
                continue;
            }
            for j in 0..=16 {
                lo = lo.min(self.value(a + (b - a) * j as f64 / 16.0));
            }
        }
        lo
    }
}

/// `m(t)`, `omega(t)` and `omega_c(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeProfiles {
    pub mass: Profile,
    pub omega: Profile,
    pub omega_c: Profile,
}

impl TimeProfiles {
    pub fn constant(mass: f64, omega: f64, omega_c: f64) -> Self {
        Self {
            mass: Profile::constant(mass),
            omega: Profile::constant(omega),
            omega_c: Profile::constant(omega_c),
        }
    }

    pub fn mass(&self, t: f64) -> f64 {
        self.mass.value(t)
    }

    pub fn mass_rate(&self, t: f64) -> f64 {
        self.mass.derivative(t)
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.omega.value(t)
    }

    pub fn omega_c(&self, t: f64) -> f64 {
        self.omega_c.value(t)
    }

    /// `sqrt(omega^2 + omega_c^2 / 4)`.
    pub fn omega_eff(&self, t: f64) -> f64 {
        omega_eff(self.omega(t), self.omega_c(t))
    }

    pub fn is_constant(&self) -> bool {
        self.mass.is_constant() && self.omega.is_constant() && self.omega_c.is_constant()
    }

    /// Checks that the profiles are finite, tabulated ones cover `[t0, t1]`,
    /// and the mass stays positive there.
    pub fn validate(&self, t0: f64, t1: f64) -> Result<()> {
        for (name, p) in [("mass", &self.mass), ("omega", &self.omega), ("omega_c", &self.omega_c)] {
            if !p.is_finite() {
                return Err(domain(format!("{name} profile has non-finite parameters")));
            }
            if let Some((a, b)) = p.range() {
                if t0 < a || t1 > b {
                    return Err(domain(format!(
                        "{name} table covers [{a}, {b}], which does not contain the window [{t0}, {t1}]"
                    )));
                }
            }
        }
        let lo = self.mass.lower_bound(t0, t1);
        if !(lo > 0.0) {
            return Err(domain(format!("mass must stay positive on [{t0}, {t1}] (minimum {lo})")));
        }
        Ok(())
    }

    /// Reads a table with columns `t, m, omega, omega_c` (header required).
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Table(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect::<Vec<_>>();
        let want = ["t", "m", "omega", "omega_c"];
        if headers != want {
            return Err(Error::Table(format!(
                "expected header t,m,omega,omega_c, found {}",
                headers.join(",")
            )));
        }
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
            if rec.len() != 4 {
                return Err(Error::Table(format!("row {} has {} fields", row + 2, rec.len())));
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Table(format!("row {}, column {}: cannot parse {field:?}", row + 2, want[j]))
                })?;
                cols[j].push(v);
            }
        }
        let [t, m, omega, omega_c] = cols;
        Ok(Self {
            mass: Profile::Tabulated(Spline::new(t.clone(), m)?),
            omega: Profile::Tabulated(Spline::new(t.clone(), omega)?),
            omega_c: Profile::Tabulated(Spline::new(t, omega_c)?),
        })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

/// `sqrt(omega^2 + omega_c^2 / 4)`.
pub fn omega_eff(omega: f64, omega_c: f64) -> f64 {
    omega.hypot(0.5 * omega_c)
}
