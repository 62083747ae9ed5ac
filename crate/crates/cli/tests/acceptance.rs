//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use dunkl_pauli::angular::{lambda_eigenvalue, solve_angular_numeric, AngularIndex, Sector, Sign};
use dunkl_pauli::dunkl::{
    dunkl_angular_apply, dunkl_derivative, dunkl_laplacian, dunkl_partial, DeformationParams, DunklMeasure, Order,
};
use dunkl_pauli::ep::{ep_solve, pinney_oracle, EpInitial};
use dunkl_pauli::invariant::{
    apply_generator, conservation_residual, probe_states, Generator, InvariantOperator, RadialSector,
    Sl2Coefficients,
};
use dunkl_pauli::ode::OdeOptions;
use dunkl_pauli::profiles::{Profile, TimeProfiles};
use dunkl_pauli::verification::{
    energy_expectation, hamiltonian_apply, pde_residual, suite_reductions, PdeCheck, ReductionSettings, SpinTermMode,
};
use dunkl_pauli::wavefunction::{polar_grid_for, stationary_energy, Coupling, QuantumNumbers, Solution};
use dunkl_pauli::{CartesianGrid, Grid1D, GridFunction, RadialGrid, ThetaGrid};
use num_complex::Complex64;

type Outcome = Result<(bool, String), String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn modulated() -> TimeProfiles {
    TimeProfiles {
        mass: Profile::Constant { value: 1.0 },
        omega: Profile::Constant { value: 0.5 },
        omega_c: Profile::Sinusoidal { amplitude: 1.0, depth: 0.1, frequency: 1.0 },
    }
}

fn rel_norm(w: &[f64], err: &[Complex64], reference: &[Complex64]) -> f64 {
    let n = |v: &[Complex64]| w.iter().zip(v).map(|(w, x)| w * x.norm_sqr()).sum::<f64>().sqrt();
    n(err) / n(reference)
}

fn angular_spectrum() -> Outcome {
    let grid = Arc::new(ThetaGrid::new(256).map_err(|e| e.to_string())?);
    let mut worst = 0.0f64;
    for a in [0.1, 0.5, 0.9] {
        for b in [0.1, 0.5, 0.9] {
            let p = DeformationParams::new(a, b).map_err(|e| e.to_string())?;
            for eps in [Sign::Plus, Sign::Minus] {
                let sector = Sector::new(Sign::Plus, eps);
                let numeric = solve_angular_numeric(&p, sector, &grid, 7).map_err(|e| e.to_string())?;
                for i in 0..3 {
                    for branch in [Sign::Plus, Sign::Minus] {
                        let want = lambda_eigenvalue(eps, AngularIndex::nth(eps, i), &p, branch).map_err(|e| e.to_string())?;
                        let got = numeric.iter().map(|x| (x.0 - want).abs()).fold(f64::INFINITY, f64::min);
                        worst = worst.max(got);
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-6, format!("max |lambda_num - lambda| = {worst:.2e} (tolerance 1e-6)")))
}

fn dunkl_calculus() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let line = Arc::new(Grid1D::uniform(400, 8.0).map_err(e)?);
    let probes: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|x| (-x * x).exp() * (1.0 + x + x.powi(3))),
        Box::new(|x| (-(x - 0.4).powi(2)).exp()),
        Box::new(|x| (-0.5 * x * x).exp() * (2.0 * x).sin()),
    ];
    let derivs: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|x| (-x * x).exp() * (1.0 + 3.0 * x * x - 2.0 * x * (1.0 + x + x.powi(3)))),
        Box::new(|x| -2.0 * (x - 0.4) * (-(x - 0.4).powi(2)).exp()),
        Box::new(|x| (-0.5 * x * x).exp() * (2.0 * (2.0 * x).cos() - x * (2.0 * x).sin())),
    ];
    let (mut reduction, mut composition) = (0.0f64, 0.0f64);
    for (f, df) in probes.iter().zip(&derivs) {
        let g = GridFunction::<Grid1D>::from_fn(line.clone(), |x| c(f(x)));
        let d = dunkl_derivative(&g, 0.0, Order::First).map_err(e)?;
        let exact: Vec<Complex64> = line.nodes().iter().map(|&x| c(df(x))).collect();
        let scale = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
        reduction = reduction.max(d.values().iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale);
        for nu in [0.3, 0.7, 1.4] {
            let twice = dunkl_derivative(&dunkl_derivative(&g, nu, Order::First).map_err(e)?, nu, Order::First).map_err(e)?;
            let direct = dunkl_derivative(&g, nu, Order::Second).map_err(e)?;
            composition = composition.max(twice.sub(&direct).map_err(e)?.max_abs() / direct.max_abs());
        }
    }
    // Laplacian and angular operator without deformation
    let plane = Arc::new(CartesianGrid::new(Grid1D::uniform(160, 7.0).map_err(e)?, Grid1D::uniform(160, 7.0).map_err(e)?));
    let gauss = GridFunction::<CartesianGrid>::from_fn(plane.clone(), |x, y| c((-(x * x + y * y) / 2.0).exp() * (1.0 + x)));
    let lap = dunkl_laplacian(&gauss, &DeformationParams::undeformed()).map_err(e)?;
    let exact = GridFunction::<CartesianGrid>::from_fn(plane.clone(), |x, y| {
        let r2 = x * x + y * y;
        c((-r2 / 2.0).exp() * ((r2 - 2.0) * (1.0 + x) - 2.0 * x))
    });
    reduction = reduction.max(lap.sub(&exact).map_err(e)?.max_abs() / exact.max_abs());
    let dx = dunkl_partial(&gauss, dunkl_pauli::Axis::First, 0.0, Order::First).map_err(e)?;
    let exact = GridFunction::<CartesianGrid>::from_fn(plane, |x, y| c((-(x * x + y * y) / 2.0).exp() * (1.0 - x - x * x)));
    reduction = reduction.max(dx.sub(&exact).map_err(e)?.max_abs() / exact.max_abs());
    let ring = Arc::new(ThetaGrid::new(64).map_err(e)?);
    let f = GridFunction::<ThetaGrid>::from_fn(ring.clone(), |t| Complex64::new((3.0 * t).cos(), (2.0 * t).sin()));
    let j = dunkl_angular_apply(&f, &DeformationParams::undeformed());
    let exact = GridFunction::<ThetaGrid>::from_fn(ring, |t| Complex64::new(0.0, 1.0) * Complex64::new(-3.0 * (3.0 * t).sin(), 2.0 * (2.0 * t).cos()));
    reduction = reduction.max(j.sub(&exact).map_err(e)?.max_abs() / exact.max_abs());
    Ok((
        reduction <= 1e-8 && composition <= 1e-8,
        format!("classical reduction {reduction:.2e}, second order vs composed first order {composition:.2e} (tolerance 1e-8)"),
    ))
}

fn sl2_realization() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let p = DeformationParams::new(0.3, 0.7).map_err(e)?;
    let g = Arc::new(RadialGrid::geometric(1e-3, 12.0, 512).map_err(e)?);
    let w = g.dunkl_weights(&p).map_err(e)?;
    let mut worst = [0.0f64; 3];
    for eps in [Sign::Plus, Sign::Minus] {
        let lambda = lambda_eigenvalue(eps, AngularIndex::nth(eps, 1), &p, Sign::Plus).map_err(e)?;
        let s = RadialSector::new(p, eps, lambda);
        let ap = |k, f: &GridFunction<RadialGrid>| apply_generator(k, f, &s);
        for f in &probe_states(&g, &p, 2.0, 10).map_err(e)? {
            let comm = |a, b| ap(a, &ap(b, f)).sub(&ap(b, &ap(a, f)));
            // [T1, T2] = -2i T3, [T2, T3] = 4i T2, [T1, T3] = -4i T1
            for (slot, (a, b, k, coef)) in [
                (Generator::T1, Generator::T2, Generator::T3, -2.0),
                (Generator::T2, Generator::T3, Generator::T2, 4.0),
                (Generator::T1, Generator::T3, Generator::T1, -4.0),
            ]
            .into_iter()
            .enumerate()
            {
                let lhs = comm(a, b).map_err(e)?;
                let rhs = ap(k, f).scaled(Complex64::new(0.0, coef));
                let err = lhs.sub(&rhs).map_err(e)?;
                worst[slot] = worst[slot].max(rel_norm(&w, err.values(), rhs.values()));
            }
        }
    }
    let mut identity = 0.0f64;
    let breathing = TimeProfiles { mass: Profile::Linear { offset: 1.0, slope: 0.05 }, ..modulated() };
    for (prof, init) in [(modulated(), EpInitial { rho: 1.3, rho_dot: 0.2 }), (breathing, EpInitial { rho: 0.7, rho_dot: -0.3 })] {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let ep = ep_solve(&prof, init, 0.0, &times, &OdeOptions::default()).map_err(e)?;
        for st in &ep.states {
            identity = identity.max(Sl2Coefficients::at(&ep, st).map_err(e)?.identity_defect().abs());
        }
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    Ok((
        max <= 1e-7 && identity <= 1e-10,
        format!(
            "commutators {:.2e} / {:.2e} / {:.2e} (tolerance 1e-7), |alpha beta - gamma^2 - 1| {identity:.2e} (tolerance 1e-10)",
            worst[0], worst[1], worst[2]
        ),
    ))
}

fn ermakov_pinney() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let times: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
    let mut fixed = 0.0f64;
    for (m, w, wc) in [(1.0, 0.5, 1.0), (2.3, 1.1, 0.0), (0.6, 0.0, 2.0)] {
        let prof = TimeProfiles::constant(m, w, wc);
        let ep = ep_solve(&prof, EpInitial::fixed_point(&prof, 0.0).map_err(e)?, 0.0, &times, &OdeOptions::default()).map_err(e)?;
        let want = (m * prof.omega_eff(0.0)).powf(-0.5);
        fixed = fixed.max(ep.states.iter().map(|s| (s.rho - want).abs()).fold(0.0, f64::max));
    }
    let prof = TimeProfiles::constant(1.0, 1.0, 0.0);
    let init = EpInitial { rho: 2.0, rho_dot: 0.0 };
    let half = std::f64::consts::FRAC_PI_2;
    let ep = ep_solve(&prof, init, 0.0, &[half], &OdeOptions::default()).map_err(e)?;
    let oracle = (ep.states[0].rho - 0.5).abs();
    let closed = (pinney_oracle(&prof, init, 0.0, half).map_err(e)? - 0.5).abs();
    Ok((
        fixed <= 1e-9 && oracle <= 1e-7 && closed <= 1e-12,
        format!("fixed point drift {fixed:.2e} (tolerance 1e-9), rho(pi/2) - 0.5 = {oracle:.2e} (tolerance 1e-7)"),
    ))
}

fn invariant() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let p = DeformationParams::new(0.3, 0.7).map_err(e)?;
    let coeffs = Sl2Coefficients::from_auxiliary(1.0, 1.3, 0.2).map_err(e)?;
    let mut spectrum = 0.0f64;
    for eps in [Sign::Plus, Sign::Minus] {
        let lambda = lambda_eigenvalue(eps, AngularIndex::nth(eps, 0), &p, Sign::Plus).map_err(e)?;
        let s = RadialSector::new(p, eps, lambda);
        let sigma = s.sigma();
        let g = RadialGrid::geometric(1e-3 * 1.3, 1.3 * (2.0 * 5.0 + sigma + 3.0).sqrt() * 4.0, 400).map_err(e)?;
        let op = InvariantOperator::new(coeffs, s).map_err(e)?;
        let eig = op.spectrum(&g, 6).map_err(e)?;
        for (n, z) in eig.iter().enumerate() {
            let want = 2.0 * n as f64 + sigma + 1.0;
            spectrum = spectrum.max((z - c(want)).norm());
        }
    }
    // conservation along the modulated trajectory, step halving
    let prof = modulated();
    let centres = [1.0, 2.5, 4.0, 5.5, 7.0];
    let steps = [4e-3, 2e-3, 1e-3];
    let mut times: Vec<f64> = centres.iter().flat_map(|&t| steps.iter().flat_map(move |&d| [t - d, t, t + d])).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let ep = ep_solve(&prof, EpInitial { rho: 1.2, rho_dot: 0.1 }, 0.0, &times, &OdeOptions::default()).map_err(e)?;
    let g = Arc::new(RadialGrid::geometric(1e-3, 14.0, 512).map_err(e)?);
    let lambda = lambda_eigenvalue(Sign::Minus, AngularIndex::nth(Sign::Minus, 0), &p, Sign::Plus).map_err(e)?;
    let s = RadialSector::new(p, Sign::Minus, lambda);
    let probes = probe_states(&g, &p, 1.5, 10).map_err(e)?;
    let res = steps
        .iter()
        .map(|&d| conservation_residual(&ep, &s, &probes, &centres, d, |k| k))
        .collect::<dunkl_pauli::Result<Vec<_>>>()
        .map_err(e)?;
    let slopes = [(res[0] / res[1]).log2(), (res[1] / res[2]).log2()];
    let pass = spectrum <= 1e-6 && res[2] <= 1e-5 && slopes.iter().all(|&x| x >= 1.9);
    Ok((
        pass,
        format!(
            "eigenvalue error {spectrum:.2e} (tolerance 1e-6); conservation {:.2e} / {:.2e} / {:.2e} at dt = 4e-3 / 2e-3 / 1e-3, slopes {:.2} {:.2} (tolerance 1e-5, slope >= 1.9)",
            res[0], res[1], res[2], slopes[0], slopes[1]
        ),
    ))
}

fn pde() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let p = DeformationParams::new(0.3, 0.7).map_err(e)?;
    let theta = Arc::new(ThetaGrid::new(64).map_err(e)?);
    let constant = TimeProfiles::constant(1.0, 0.5, 1.0);
    let fixed = EpInitial::fixed_point(&constant, 0.0).map_err(e)?;
    let mut stationary = (0.0f64, f64::INFINITY, f64::INFINITY);
    let mut all_pass = true;
    for sector in Sector::ALL {
        for n in 0..=2 {
            for i in 0..2 {
                for branch in [Sign::Plus, Sign::Minus] {
                    let qn = QuantumNumbers::new(n, AngularIndex::nth(sector.eps(), i), Sign::Plus, sector, branch).map_err(e)?;
                    let sol = Solution::new(qn, &p, Coupling::default(), &theta).map_err(e)?;
                    let check = PdeCheck { dt: 1.25e-4, n_r: 512, n_theta: 64, tolerance: 1e-6, mode: SpinTermMode::Grid, r_bounds: None };
                    let r = pde_residual(&sol, &constant, fixed, 0.0, &[1.0, 3.0], &check, "stationary").map_err(e)?;
                    all_pass &= r.pass;
                    stationary.0 = stationary.0.max(r.max_residual);
                    stationary.1 = stationary.1.min(r.time_slope.unwrap_or(f64::INFINITY));
                    stationary.2 = stationary.2.min(r.grid_slope.unwrap_or(0.0));
                }
            }
        }
    }
    let mut modulated_worst = (0.0f64, f64::INFINITY, f64::INFINITY);
    for sector in Sector::ALL {
        let qn = QuantumNumbers::new(1, AngularIndex::nth(sector.eps(), 1), Sign::Plus, sector, Sign::Plus).map_err(e)?;
        let sol = Solution::new(qn, &p, Coupling::default(), &theta).map_err(e)?;
        let check = PdeCheck { dt: 1e-3, n_r: 512, n_theta: 64, tolerance: 1e-4, mode: SpinTermMode::Grid, r_bounds: None };
        let init = EpInitial::fixed_point(&modulated(), 0.0).map_err(e)?;
        let r = pde_residual(&sol, &modulated(), init, 0.0, &[0.5, 2.5, 5.0, 7.5], &check, "modulated").map_err(e)?;
        all_pass &= r.pass;
        modulated_worst.0 = modulated_worst.0.max(r.max_residual);
        modulated_worst.1 = modulated_worst.1.min(r.time_slope.unwrap_or(0.0));
        modulated_worst.2 = modulated_worst.2.min(r.grid_slope.unwrap_or(0.0));
    }
    Ok((
        all_pass,
        format!(
            "constant profiles {:.2e} (tolerance 1e-6, slopes t {:.2} r {:.2}); modulated field {:.2e} at dt = 1e-3 (tolerance 1e-4, slopes t {:.2} r {:.2})",
            stationary.0, stationary.1, stationary.2, modulated_worst.0, modulated_worst.1, modulated_worst.2
        ),
    ))
}

fn stationary_limit() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let sweep: Vec<DeformationParams> = [(0.0, 0.0), (0.3, 0.7), (0.9, 0.1)]
        .iter()
        .map(|&(a, b)| DeformationParams::new(a, b))
        .collect::<dunkl_pauli::Result<_>>()
        .map_err(e)?;
    let reports = suite_reductions(&sweep, &ReductionSettings::default()).map_err(e)?;
    let pick = |prefix: &str| reports.iter().filter(|r| r.scenario.starts_with(prefix)).map(|r| r.max_residual).fold(0.0, f64::max);
    let (landau, phase) = (pick("landau"), pick("stationary-phase"));
    let mut pass = reports.iter().filter(|r| !r.scenario.starts_with("orthonormality")).all(|r| r.pass);

    // energy formula against <H> in both angular conventions, omega = 0
    let prof = TimeProfiles::constant(1.0, 0.0, 1.2);
    let ep = ep_solve(&prof, EpInitial::fixed_point(&prof, 0.0).map_err(e)?, 0.0, &[0.5], &OdeOptions::default()).map_err(e)?;
    let theta = Arc::new(ThetaGrid::new(64).map_err(e)?);
    let mut energy = 0.0f64;
    for sector in Sector::ALL {
        for m_s in [Sign::Plus, Sign::Minus] {
            let qn = QuantumNumbers::new(1, AngularIndex::nth(sector.eps(), 1), m_s, sector, Sign::Plus).map_err(e)?;
            let bare = Solution::new(qn, &sweep[1], Coupling::bare(), &theta).map_err(e)?;
            let formula = stationary_energy(&qn, &sweep[1], 1.2).map_err(e)?;
            let grid = polar_grid_for(&ep, 1, bare.sigma, 512, 64).map_err(e)?;
            let psi = bare.assemble(&grid, &ep, 0.5).map_err(e)?;
            let h = hamiltonian_apply(&psi, &sweep[1], &prof, &Coupling::bare(), SpinTermMode::SectorDiagonal(sector)).map_err(e)?;
            let w = grid.dunkl_weights(&sweep[1]).map_err(e)?;
            let num: f64 = w.iter().zip(psi.spatial.values()).zip(h.values()).map(|((w, a), b)| w * (a.conj() * b).re).sum();
            energy = energy.max((num - formula).abs() / formula.abs().max(1.0));
            let coupled = Solution::new(qn, &sweep[1], Coupling::default(), &theta).map_err(e)?;
            let psi = coupled.assemble(&grid, &ep, 0.5).map_err(e)?;
            let num = energy_expectation(&psi, &sweep[1], &prof, &Coupling::default()).map_err(e)?;
            let want = coupled.stationary_energy(1.0, 0.0, 1.2).map_err(e)?;
            energy = energy.max((num - want).abs() / want.abs().max(1.0));
        }
    }
    pass &= energy <= 1e-8;
    Ok((
        pass,
        format!("Landau levels {landau:.2e}, |mu + E t| {phase:.2e}, <H> vs E {energy:.2e} (tolerance 1e-8)"),
    ))
}

fn orthonormality() -> Outcome {
    let e = |x: dunkl_pauli::Error| x.to_string();
    let sweep: Vec<DeformationParams> = [(0.1, 0.5), (0.3, 0.7), (0.9, 0.9), (-0.3, 1.5)]
        .iter()
        .map(|&(a, b)| DeformationParams::new(a, b))
        .collect::<dunkl_pauli::Result<_>>()
        .map_err(e)?;
    let reports = suite_reductions(&sweep, &ReductionSettings::default()).map_err(e)?;
    let worst = reports.iter().filter(|r| r.scenario.starts_with("orthonormality")).map(|r| r.max_residual).fold(0.0, f64::max);
    Ok((worst <= 1e-6, format!("max |G - 1| over 6 states x 4 sectors x {} deformations = {worst:.2e} (tolerance 1e-6)", sweep.len())))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dunkl-pauli");
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.json");
    let base = std::env::temp_dir().join(format!("dunkl-pauli-acceptance-{}", std::process::id()));
    let mut outputs = Vec::new();
    for run in 0..2 {
        let dir: PathBuf = base.join(format!("run{run}"));
        let status = Command::new(bin)
            .args(["verify", "--config"])
            .arg(&scenario)
            .arg("--out")
            .arg(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        if status.status.code() != Some(0) {
            return Ok((false, format!("verify exited with {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr))));
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
            .map_err(|e| e.to_string())?
            .map(|f| {
                let f = f.map_err(|e| e.to_string())?;
                Ok((f.file_name().to_string_lossy().into_owned(), std::fs::read(f.path()).map_err(|e| e.to_string())?))
            })
            .collect::<Result<_, String>>()?;
        files.sort();
        outputs.push(files);
    }
    let _ = std::fs::remove_dir_all(&base);
    let same = outputs[0] == outputs[1];
    Ok((same, format!("two verify runs, exit 0, {} files byte-identical: {same}", outputs[0].len())))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("angular spectrum", angular_spectrum),
        ("Dunkl calculus", dunkl_calculus),
        ("SL(2,R) realization", sl2_realization),
        ("Ermakov-Pinney", ermakov_pinney),
        ("invariant spectrum and conservation", invariant),
        ("Schrodinger residual", pde),
        ("stationary limit", stationary_limit),
        ("orthonormality", orthonormality),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] {}. {name}: {detail} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
