//! Scenario files: JSON, unknown keys rejected, every constraint checked at load.

use std::path::{Path, PathBuf};

use dunkl_pauli::angular::{AngularIndex, Sector, Sign};
use dunkl_pauli::dunkl::DeformationParams;
use dunkl_pauli::ep::EpInitial;
use dunkl_pauli::profiles::{Profile, TimeProfiles};
use dunkl_pauli::wavefunction::{Coupling, QuantumNumbers};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label used in reports; defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub deformation: DeformationParams,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub coupling: Coupling,
    pub profiles: ProfilesConfig,
    /// Initial `rho`, `rho_dot`; the instantaneous fixed point when absent.
    #[serde(default)]
    pub initial: Option<EpInitial>,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sweep: SweepConfig,
}

/// Quantum numbers of the state that `evolve` and `verify` work on.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    pub n: u32,
    /// Angular index; the lowest allowed value of the sector when absent.
    pub l: Option<AngularIndex>,
    pub m_s: Sign,
    pub eps1: Sign,
    pub eps2: Sign,
    pub branch: Sign,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self { n: 0, l: None, m_s: Sign::Plus, eps1: Sign::Plus, eps2: Sign::Plus, branch: Sign::Plus }
    }
}

impl StateConfig {
    pub fn sector(&self) -> Sector {
        Sector::new(self.eps1, self.eps2)
    }

    pub fn quantum_numbers(&self) -> dunkl_pauli::Result<QuantumNumbers> {
        let sector = self.sector();
        let l = self.l.unwrap_or_else(|| AngularIndex::nth(sector.eps(), 0));
        QuantumNumbers::new(self.n, l, self.m_s, sector, self.branch)
    }
}

/// Analytic profiles, or a table with columns `t, m, omega, omega_c`
/// (relative paths resolve against the scenario file).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesConfig {
    pub mass: Option<Profile>,
    pub omega: Option<Profile>,
    pub omega_c: Option<Profile>,
    pub table: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsConfig {
    pub n_r: usize,
    pub n_theta: usize,
    /// Angular resolution of `angular-spectrum`.
    pub spectrum_n_theta: usize,
    /// Explicit radial bounds; derived from the state and `rho` when absent.
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self { n_r: 512, n_theta: 64, spectrum_n_theta: 256, r_min: None, r_max: None }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t0: f64,
    pub t1: f64,
    /// Output samples of `ep-solve` and `evolve`.
    pub samples: usize,
    /// Step of the central differences used by `verify`.
    pub dt: f64,
    /// Number of times at which `verify` evaluates residuals.
    pub checks: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t0: 0.0, t1: 10.0, samples: 101, dt: 1e-3, checks: 5 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    /// Relative paths resolve against the scenario file.
    pub directory: Option<PathBuf>,
    /// Times at which `evolve` writes density snapshots.
    pub density_times: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub spectrum: f64,
    pub ep: f64,
    pub pde: f64,
    pub conservation: f64,
    pub hermiticity: f64,
    pub phase_bracket: f64,
    pub gauge_phase: f64,
    pub orthonormality: f64,
    pub energy: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: 1e-6,
            ep: 1e-6,
            pde: 1e-4,
            conservation: 1e-5,
            hermiticity: 1e-7,
            phase_bracket: 1e-6,
            gauge_phase: 1e-7,
            orthonormality: 1e-6,
            energy: 1e-6,
            norm: 1e-6,
        }
    }
}

/// Ranges covered by `angular-spectrum` and `stationary-energy`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_max: u32,
    /// Number of angular indices per sector.
    pub ladder: u32,
    pub m_s: Vec<Sign>,
    pub sectors: Vec<Sector>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { n_max: 2, ladder: 3, m_s: vec![Sign::Plus, Sign::Minus], sectors: Sector::ALL.to_vec() }
    }
}

/// A config that failed to load; `path` is the offending field, if known.
#[derive(Debug)]
pub struct ConfigError {
    pub path: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn field(path: &str, message: impl ToString) -> ConfigError {
    ConfigError { path: Some(path.to_string()), message: message.to_string() }
}

/// A parsed scenario together with what is needed to run it.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub name: String,
    pub profiles: TimeProfiles,
    pub qn: QuantumNumbers,
    pub initial: EpInitial,
    /// Hex SHA-256 of the config file bytes.
    pub config_hash: String,
}

pub fn parse_config(path: &Path) -> Result<Scenario, ConfigError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError { path: None, message: format!("cannot read {}: {e}", path.display()) })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_bytes(&bytes, path.parent().unwrap_or(Path::new(".")), &name)
}

/// Parses config text; `base` resolves relative table and output paths.
pub fn parse_bytes(bytes: &[u8], base: &Path, default_name: &str) -> Result<Scenario, ConfigError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let p = e.path().to_string();
        ConfigError { path: (p != ".").then_some(p), message: e.into_inner().to_string() }
    })?;
    let config_hash = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
    validate(config, base, default_name, config_hash)
}

fn validate(mut config: ScenarioConfig, base: &Path, default_name: &str, config_hash: String) -> Result<Scenario, ConfigError> {
    if let Some(dir) = config.outputs.directory.as_mut() {
        if dir.is_relative() {
            *dir = base.join(&*dir);
        }
    }
    let qn = config.state.quantum_numbers().map_err(|e| field("state.l", e))?;

    let p = &config.profiles;
    let profiles = match (&p.table, &p.mass, &p.omega, &p.omega_c) {
        (Some(table), None, None, None) => {
            let path = if table.is_absolute() { table.clone() } else { base.join(table) };
            TimeProfiles::from_csv_path(&path).map_err(|e| field("profiles.table", e))?
        }
        (Some(_), ..) => return Err(field("profiles", "give either a table or analytic profiles, not both")),
        (None, Some(m), Some(w), Some(wc)) => TimeProfiles { mass: m.clone(), omega: w.clone(), omega_c: wc.clone() },
        (None, m, w, _) => {
            let missing = if m.is_none() { "mass" } else if w.is_none() { "omega" } else { "omega_c" };
            return Err(field(&format!("profiles.{missing}"), "missing profile"));
        }
    };

    let t = &config.time;
    if !(t.t0.is_finite() && t.t1.is_finite() && t.t1 > t.t0) {
        return Err(field("time.t1", "t1 must exceed t0"));
    }
    if t.samples < 2 {
        return Err(field("time.samples", "at least 2 samples are needed"));
    }
    if !(t.dt > 0.0 && 8.0 * t.dt < t.t1 - t.t0) {
        return Err(field("time.dt", "dt must be positive and small against the window"));
    }
    if t.checks == 0 {
        return Err(field("time.checks", "at least one check time is needed"));
    }
    profiles.validate(t.t0, t.t1).map_err(|e| field("profiles", e))?;

    let g = &config.grids;
    if g.n_r < 64 {
        return Err(field("grids.n_r", "at least 64 radial nodes are needed"));
    }
    for (name, n) in [("grids.n_theta", g.n_theta), ("grids.spectrum_n_theta", g.spectrum_n_theta)] {
        if n < 8 || n % 4 != 0 {
            return Err(field(name, "angular node counts must be multiples of 4, at least 8"));
        }
    }
    match (g.r_min, g.r_max) {
        (None, None) => {}
        (Some(a), Some(b)) if a > 0.0 && b > a => {}
        (Some(_), Some(_)) => return Err(field("grids.r_max", "need 0 < r_min < r_max")),
        _ => return Err(field("grids", "give both r_min and r_max or neither")),
    }
    if let Some(&bad) = config.outputs.density_times.iter().find(|&&s| !(s >= t.t0 && s <= t.t1)) {
        return Err(field("outputs.density_times", format!("{bad} lies outside [t0, t1]")));
    }
    if config.sweep.ladder == 0 {
        return Err(field("sweep.ladder", "at least one angular index is needed"));
    }
    if !(config.coupling.g_s.is_finite()) {
        return Err(field("coupling.g_s", "g_s must be finite"));
    }

    let initial = match config.initial {
        Some(i) if i.rho > 0.0 && i.rho.is_finite() && i.rho_dot.is_finite() => i,
        Some(_) => return Err(field("initial.rho", "rho must be positive")),
        None => EpInitial::fixed_point(&profiles, t.t0).map_err(|e| field("initial", e))?,
    };
    let name = config.name.clone().unwrap_or_else(|| default_name.to_string());
    Ok(Scenario { config, name, profiles, qn, initial, config_hash })
}
