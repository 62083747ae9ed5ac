//! The subcommands.

use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use dunkl_pauli::angular::{
    build_theta_unchecked, lambda_eigenvalue, solve_angular_numeric, AngularIndex, ClosedForm, ModeSpec,
    Sign, CONSTRUCTION_TOLERANCE,
};
use dunkl_pauli::dunkl::DunklMeasure;
use dunkl_pauli::ep::{ep_solve, EpSolution};
use dunkl_pauli::ode::OdeOptions;
use dunkl_pauli::verification::{
    energy_expectation, gauge_phase, gram_defect, gram_matrix, hermiticity_defect, pde_residual,
    phase_rate_identities, polar_probes, six_labels, PdeCheck, ResidualReport, SpinTermMode,
};
use dunkl_pauli::invariant::{conservation_residual, probe_states};
use dunkl_pauli::wavefunction::{polar_grid_for, QuantumNumbers, Solution};
use dunkl_pauli::{PolarGrid, RadialGrid, ThetaGrid};
use serde::Serialize;

use crate::config::{ConfigError, Scenario};
use crate::output::{csv_bytes, json_bytes, num, RunOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    AngularSpectrum,
    EpSolve,
    StationaryEnergy,
    Evolve,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::AngularSpectrum => "angular-spectrum",
            Subcommand::EpSolve => "ep-solve",
            Subcommand::StationaryEnergy => "stationary-energy",
            Subcommand::Evolve => "evolve",
            Subcommand::Verify => "verify",
        }
    }

    pub const ALL: [Subcommand; 5] = [
        Subcommand::AngularSpectrum,
        Subcommand::EpSolve,
        Subcommand::StationaryEnergy,
        Subcommand::Evolve,
        Subcommand::Verify,
    ];
}

impl std::str::FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand '{s}'"))
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Core(dunkl_pauli::Error),
    Io(io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<dunkl_pauli::Error> for RunError {
    fn from(e: dunkl_pauli::Error) -> Self {
        RunError::Core(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl RunError {
    /// 2 for bad input, 3 for a collapse of the auxiliary solution, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dunkl_pauli::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Core(E::Domain(_) | E::Usage(_) | E::Table(_) | E::Unsupported(_)) => 2,
            RunError::Core(E::Singularity { .. }) => 3,
            _ => 1,
        }
    }
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunSummary {
    pub pass: bool,
    pub files: Vec<PathBuf>,
    /// One line per check, for the terminal.
    pub lines: Vec<String>,
}

pub fn run(cmd: Subcommand, s: &Scenario, out: PathBuf) -> Result<RunSummary, RunError> {
    let mut output = RunOutput::new(out);
    let (pass, lines) = match cmd {
        Subcommand::AngularSpectrum => angular_spectrum(s, &mut output)?,
        Subcommand::EpSolve => ep(s, &mut output)?,
        Subcommand::StationaryEnergy => stationary_energy(s, &mut output)?,
        Subcommand::Evolve => evolve(s, &mut output)?,
        Subcommand::Verify => verify(s, &mut output)?,
    };
    let files = output.finish(cmd.name(), &s.name, &s.config_hash)?;
    Ok(RunSummary { pass, files, lines })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn sign_str(s: Sign) -> String {
    i8::from(s).to_string()
}

fn theta_grid(n: usize) -> Result<Arc<ThetaGrid>, RunError> {
    Ok(Arc::new(ThetaGrid::new(n)?))
}

fn solve_ep(s: &Scenario, times: &[f64]) -> Result<EpSolution, RunError> {
    let t = &s.config.time;
    Ok(ep_solve(&s.profiles, s.initial, t.t0, times, &OdeOptions::default())?)
}

fn polar_grid(s: &Scenario, ep: &EpSolution, n: u32, sigma: f64, n_r: usize) -> Result<Arc<PolarGrid>, RunError> {
    let g = &s.config.grids;
    Ok(match (g.r_min, g.r_max) {
        (Some(lo), Some(hi)) => Arc::new(PolarGrid::new(RadialGrid::geometric(lo, hi, n_r)?, ThetaGrid::new(g.n_theta)?)),
        _ => polar_grid_for(ep, n, sigma, n_r, g.n_theta)?,
    })
}

fn angular_spectrum(s: &Scenario, out: &mut RunOutput) -> Result<(bool, Vec<String>), RunError> {
    let c = &s.config;
    let params = c.deformation;
    let grid = theta_grid(c.grids.spectrum_n_theta)?;
    let mut rows = Vec::new();
    let (mut worst_err, mut worst_fit) = (0.0f64, 0.0f64);
    for &sector in &c.sweep.sectors {
        let eps = sector.eps();
        // the constant mode of the even ladder is one extra eigenvalue near zero
        let count = 2 * c.sweep.ladder as usize + 1;
        let numeric: Vec<f64> = solve_angular_numeric(&params, sector, &grid, count)?.into_iter().map(|p| p.0).collect();
        for i in 0..c.sweep.ladder {
            let l = AngularIndex::nth(eps, i);
            for branch in [Sign::Plus, Sign::Minus] {
                let lambda = lambda_eigenvalue(eps, l, &params, branch)?;
                let nearest = numeric
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
                    .unwrap_or(f64::NAN);
                let fit = build_theta_unchecked(ModeSpec { sector, l, branch }, &params, &grid, ClosedForm::Derived)?.residual;
                let err = (nearest - lambda).abs();
                worst_err = worst_err.max(err);
                worst_fit = worst_fit.max(fit);
                rows.push(vec![
                    sign_str(sector.eps1),
                    sign_str(sector.eps2),
                    l.to_string(),
                    sign_str(branch),
                    num(lambda),
                    num(nearest),
                    num(err),
                    num(fit),
                ]);
            }
        }
    }
    let header = ["eps1", "eps2", "l", "branch", "lambda_analytic", "lambda_numeric", "abs_error", "fit_residual"];
    out.add("angular_spectrum.csv", csv_bytes(&header, &rows)?);
    let tol = c.tolerances.spectrum;
    let pass = worst_err <= tol && worst_fit <= CONSTRUCTION_TOLERANCE;
    Ok((
        pass,
        vec![
            format!("eigenvalue error {worst_err:.3e} (tolerance {tol:.1e})"),
            format!("closed-form fit residual {worst_fit:.3e} (tolerance {CONSTRUCTION_TOLERANCE:.1e})"),
        ],
    ))
}

fn ep(s: &Scenario, out: &mut RunOutput) -> Result<(bool, Vec<String>), RunError> {
    let t = &s.config.time;
    let times = linspace(t.t0, t.t1, t.samples);
    let sol = solve_ep(s, &times)?;
    let res = sol.residuals();
    let rows: Vec<Vec<String>> = sol
        .states
        .iter()
        .zip(&res)
        .map(|(st, r)| vec![num(st.t), num(st.rho), num(st.rho_dot), num(*r)])
        .collect();
    out.add("ep_solve.csv", csv_bytes(&["t", "rho", "rho_dot", "ep_residual"], &rows)?);
    let worst = res.iter().copied().fold(0.0, f64::max);
    let tol = s.config.tolerances.ep;
    Ok((worst <= tol, vec![format!("max auxiliary-equation residual {worst:.3e} (tolerance {tol:.1e})")]))
}

fn stationary_energy(s: &Scenario, out: &mut RunOutput) -> Result<(bool, Vec<String>), RunError> {
    let c = &s.config;
    if !s.profiles.is_constant() {
        return Err(dunkl_pauli::Error::Unsupported("stationary-energy needs constant profiles".into()).into());
    }
    let t0 = c.time.t0;
    let (m, w, wc) = (s.profiles.mass(t0), s.profiles.omega.value(t0), s.profiles.omega_c(t0));
    let grid = theta_grid(c.grids.n_theta)?;
    let mut rows = Vec::new();
    for &sector in &c.sweep.sectors {
        for i in 0..c.sweep.ladder {
            let l = AngularIndex::nth(sector.eps(), i);
            for n in 0..=c.sweep.n_max {
                for &m_s in &c.sweep.m_s {
                    for branch in [Sign::Plus, Sign::Minus] {
                        let qn = QuantumNumbers::new(n, l, m_s, sector, branch)?;
                        let sol = Solution::new(qn, &c.deformation, c.coupling, &grid)?;
                        rows.push(vec![
                            n.to_string(),
                            l.to_string(),
                            sign_str(m_s),
                            sign_str(sector.eps1),
                            sign_str(sector.eps2),
                            sign_str(branch),
                            num(sol.lambda),
                            num(sol.sigma),
                            num(sol.phase_coefficient),
                            num(sol.stationary_energy(m, w, wc)?),
                        ]);
                    }
                }
            }
        }
    }
    let header = ["n", "l", "m_s", "eps1", "eps2", "branch", "lambda", "sigma", "phase_coefficient", "energy"];
    out.add("stationary_energy.csv", csv_bytes(&header, &rows)?);
    Ok((true, vec![format!("{} levels tabulated", rows.len())]))
}

fn merged_times(base: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = base.iter().chain(extra).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

fn evolve(s: &Scenario, out: &mut RunOutput) -> Result<(bool, Vec<String>), RunError> {
    let c = &s.config;
    let t = &c.time;
    let series = linspace(t.t0, t.t1, t.samples);
    let ep = solve_ep(s, &merged_times(&series, &c.outputs.density_times))?;
    let theta = theta_grid(c.grids.n_theta)?;
    let sol = Solution::new(s.qn, &c.deformation, c.coupling, &theta)?;
    let grid = polar_grid(s, &ep, s.qn.n, sol.sigma, c.grids.n_r)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &ti in &series {
        let st = ep.state_at(ti)?;
        let psi = sol.assemble(&grid, &ep, ti)?;
        let norm = psi.norm(&c.deformation)?;
        worst = worst.max((norm - 1.0).abs());
        rows.push(vec![num(ti), num(st.rho), num(st.rho_dot), num(psi.phase), num(norm), num(psi.c_r)]);
    }
    out.add("evolve.csv", csv_bytes(&["t", "rho", "rho_dot", "phase", "norm", "c_r"], &rows)?);

    let r = grid.radial.nodes();
    let th = grid.theta.nodes();
    for (k, &ti) in c.outputs.density_times.iter().enumerate() {
        let psi = sol.assemble(&grid, &ep, ti)?;
        let v = psi.spatial.values();
        let mut rows = Vec::with_capacity(v.len());
        for (ir, &ri) in r.iter().enumerate() {
            for (kt, &tk) in th.iter().enumerate() {
                rows.push(vec![num(ti), num(ri), num(tk), num(v[grid.index(ir, kt)].norm_sqr())]);
            }
        }
        out.add(format!("density_{k:03}.csv"), csv_bytes(&["t", "r", "theta", "density"], &rows)?);
    }
    let tol = c.tolerances.norm;
    Ok((worst <= tol, vec![format!("max norm deviation {worst:.3e} (tolerance {tol:.1e})")]))
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    scenario: &'a str,
    pass: bool,
    reports: &'a [ResidualReport],
}

fn scalar(scenario: &str, value: f64, tolerance: f64) -> ResidualReport {
    ResidualReport {
        scenario: scenario.to_string(),
        tolerance,
        times: Vec::new(),
        residuals: vec![value],
        max_residual: value,
        time_slope: None,
        grid_slope: None,
        min_slope: None,
        pass: value <= tolerance,
    }
}

fn series(scenario: &str, times: &[f64], values: Vec<f64>, tolerance: f64) -> ResidualReport {
    let max = values.iter().copied().fold(0.0, f64::max);
    ResidualReport { times: times.to_vec(), residuals: values, max_residual: max, ..scalar(scenario, max, tolerance) }
}

fn verify(s: &Scenario, out: &mut RunOutput) -> Result<(bool, Vec<String>), RunError> {
    let c = &s.config;
    let t = &c.time;
    let tol = &c.tolerances;
    let params = c.deformation;
    let dt = t.dt;
    let checks = linspace(t.t0 + 4.0 * dt, t.t1 - 4.0 * dt, t.checks);
    let theta = theta_grid(c.grids.n_theta)?;
    let sol = Solution::new(s.qn, &params, c.coupling, &theta)?;
    let bounds = c.grids.r_min.zip(c.grids.r_max);
    let mut reports = Vec::new();

    let pde = PdeCheck {
        dt,
        n_r: c.grids.n_r,
        n_theta: c.grids.n_theta,
        tolerance: tol.pde,
        mode: SpinTermMode::Grid,
        r_bounds: bounds,
    };
    reports.push(pde_residual(&sol, &s.profiles, s.initial, t.t0, &checks, &pde, "schrodinger-residual")?);

    // samples for every stencil used below
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let stencil: Vec<f64> = checks.iter().flat_map(|&x| offsets.iter().map(move |o| x + o * dt)).collect();
    let ep = solve_ep(s, &merged_times(&stencil, &[t.t1]))?;
    let grid = polar_grid(s, &ep, s.qn.n, sol.sigma, c.grids.n_r)?;
    let radial = Arc::new(grid.radial.clone());

    // invariant conservation with step halving
    let sector = sol.radial_sector();
    let rho_mean = ep.states.iter().map(|x| x.rho).sum::<f64>() / ep.states.len() as f64;
    let probes = probe_states(&radial, &params, 1.5 * rho_mean, 10)?;
    let coarse = conservation_residual(&ep, &sector, &probes, &checks, 2.0 * dt, |k| k)?;
    let fine = conservation_residual(&ep, &sector, &probes, &checks, dt, |k| k)?;
    let mut cons = scalar("invariant-conservation", fine, tol.conservation);
    cons.times = checks.clone();
    cons.time_slope = (fine > 0.0 && coarse > 1e-13).then(|| (coarse / fine).log2());
    cons.min_slope = Some(dunkl_pauli::verification::MIN_SLOPE);
    cons.pass = fine <= tol.conservation && cons.time_slope.is_none_or(|x| x >= dunkl_pauli::verification::MIN_SLOPE);
    reports.push(cons);

    let polar = polar_probes(&grid, &params, 5)?;
    let herm = checks
        .iter()
        .map(|&x| hermiticity_defect(&polar, s.qn.m_s, &params, &s.profiles, &c.coupling, x))
        .collect::<dunkl_pauli::Result<Vec<_>>>()?;
    reports.push(series("hamiltonian-symmetry", &checks, herm, tol.hermiticity));

    let (mut bracket, mut full) = (Vec::new(), Vec::new());
    for &x in &checks {
        let (b, f) = phase_rate_identities(&sol, &ep, &radial, x, dt)?;
        bracket.push(b.norm());
        full.push(f.norm());
    }
    reports.push(series("phase-bracket", &checks, bracket, tol.phase_bracket));
    reports.push(series("phase-rate", &checks, full, tol.phase_bracket));

    // independent quadrature of the phase integrals on a dense grid
    let dense = solve_ep(s, &linspace(t.t0, t.t1, 2001))?;
    let gauge = (gauge_phase(&sol, &dense, t.t1)? - sol.phase(&dense.state_at(t.t1)?)).abs();
    let mut g = scalar("gauge-phase", gauge, tol.gauge_phase);
    g.times = vec![t.t1];
    reports.push(g);

    // orthonormality of six states in the configured sector
    let sector_labels = six_labels(s.qn.sector);
    let family = sector_labels
        .iter()
        .map(|&(n, i, branch)| {
            let qn = QuantumNumbers::new(n, AngularIndex::nth(s.qn.sector.eps(), i), s.qn.m_s, s.qn.sector, branch)?;
            Solution::new(qn, &params, c.coupling, &theta)
        })
        .collect::<dunkl_pauli::Result<Vec<_>>>()?;
    let n_max = sector_labels.iter().map(|x| x.0).max().unwrap_or(0);
    let sigma_max = family.iter().map(|x| x.sigma).fold(0.0, f64::max);
    let fam_grid = polar_grid(s, &ep, n_max, sigma_max, c.grids.n_r)?;
    let states = family.iter().map(|x| x.assemble(&fam_grid, &ep, t.t1)).collect::<dunkl_pauli::Result<Vec<_>>>()?;
    let mut o = scalar("orthonormality", gram_defect(&gram_matrix(&states, &params)?), tol.orthonormality);
    o.times = vec![t.t1];
    reports.push(o);

    if s.profiles.is_constant() {
        let psi = sol.assemble(&grid, &ep, t.t1)?;
        let e = energy_expectation(&psi, &params, &s.profiles, &c.coupling)?;
        let (m, w, wc) = (s.profiles.mass(t.t0), s.profiles.omega.value(t.t0), s.profiles.omega_c(t.t0));
        let want = sol.stationary_energy(m, w, wc)?;
        reports.push(scalar("stationary-energy", (e - want).abs() / want.abs().max(1.0), tol.energy));
        let drift = ep.states.iter().map(|x| (sol.phase(x) + want * (x.t - t.t0)).abs()).fold(0.0, f64::max);
        reports.push(scalar("stationary-phase", drift, 1e-8));
    }

    // grid weights are checked last so a broken measure shows up in its own line
    let w = grid.dunkl_weights(&params)?;
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(dunkl_pauli::Error::Numeric("polar weights are not finite and non-negative".into()).into());
    }

    let pass = reports.iter().all(|r| r.pass);
    let doc = VerifyDocument { scenario: &s.name, pass, reports: &reports };
    out.add("verify.json", json_bytes(&doc)?);
    let lines = reports
        .iter()
        .map(|r| {
            format!(
                "{} {}: max {:.3e} (tolerance {:.1e})",
                if r.pass { "PASS" } else { "FAIL" },
                r.scenario,
                r.max_residual,
                r.tolerance
            )
        })
        .collect();
    Ok((pass, lines))
}
