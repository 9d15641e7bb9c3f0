//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line. The process fails if any criterion fails.

use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nlse_core::evolve::{gauss_residual, GaugeMode};
use nlse_core::fields::{decompose, recompose, relative_floor};
use nlse_core::grid::{integrate, relative_l2};
use nlse_core::potentials::{DgParams, FdOptions, GenericDensity, PotentialSpec, Slot};
use nlse_core::presets::{random_gauge, SmoothState};
use nlse_core::transforms::{build_generator, check_condition, calibrate_condition_tolerance, transformed_nonlinearity};
use nlse_core::verify::{
    calibrate_assembly_constant, calibrate_static_magnetic, commuting_diagram, conservation_suite,
    continuity_study, density_equivalence, free_path_run, observed_order, static_magnetic_change,
    transform_state, Scenario,
};
use nlse_core::{
    Equation, Evolution, EvolutionState, GaugeField, GaugePreset, IntegratorConfig, Lattice, Model,
    PhysicalConstants, Route, ScalarField,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(order: f64, lo: f64, hi: f64) -> bool {
    order >= lo && order <= hi
}

/// Criterion 1: Density invariance under route A on 50 random states per `nu`.
fn unitarity() -> Outcome {
    let lat = Lattice::line(128, TAU).unwrap();
    let c = PhysicalConstants::natural();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut all = true;
    for nu in [0.05, 0.1] {
        let model = Model::dg_gauged(nu, 0.1);
        for _ in 0..50 {
            let h = SmoothState::random(lat, &mut rng).hydro;
            let gauge = random_gauge(lat, &mut rng, 0.3);
            let w = recompose(&h, &c).map_err(|e| e.to_string())?;
            let g = build_generator(&model, &h, &gauge, f64::INFINITY).map_err(|e| e.to_string())?;
            let r = density_equivalence(&w, &g, &c);
            all &= r.all_pass();
            worst = worst.max(r.records[0].measured / r.records[0].tolerance);
        }
    }
    verdict(all, format!("100 states, worst measured/tolerance = {worst:.3e}"))
}

/// Criterion 2: Static magnetic invariance under route B in 2D.
fn field_strength() -> Outcome {
    let model = Model::dg_gauged(0.05, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let modes = SmoothState::random(Lattice::square(32, TAU).unwrap(), &mut rng).log_rho;
    let mut rows = Vec::new();
    for n in [32, 64, 128] {
        let lat = Lattice::square(n, TAU).unwrap();
        let rho = ScalarField::from_fn(lat, |x| modes.value(x).exp());
        let b = static_magnetic_change(&model, &rho, f64::INFINITY).map_err(|e| e.to_string())?;
        rows.push((lat, b));
    }
    let (lat64, b64) = rows[1];
    let c = calibrate_static_magnetic(&lat64, &model).map_err(|e| e.to_string())?;
    let dx = lat64.min_spacing();
    let h: Vec<f64> = rows.iter().map(|r| r.0.min_spacing()).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (order, se) = observed_order(&h, &e);
    verdict(
        b64 <= c * dx * dx && order >= 1.8,
        format!(
            "N = 64^2 change {b64:.3e} <= C dx^2 = {:.3e} (C = {c:.3e}); order {order:.3} +- {se:.3}",
            c * dx * dx
        ),
    )
}

/// Criterion 3: Integrability: DG converges, the counterexample fails with residual -d_2 rho.
fn integrability() -> Outcome {
    let c = PhysicalConstants::natural();
    let dg = Model::dg_gauged(0.05, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let state = SmoothState::random(Lattice::square(32, TAU).unwrap(), &mut rng);
    let hydro = |lat: Lattice| nlse_core::HydroFields {
        rho: ScalarField::from_fn(lat, |x| state.log_rho.value(x).exp()),
        phase: ScalarField::from_fn(lat, |x| state.phase.value(x)),
    };
    let mut h = Vec::new();
    let mut err = Vec::new();
    let mut dg_pass = true;
    for n in [32, 64, 128] {
        let lat = Lattice::square(n, TAU).unwrap();
        let tol = calibrate_condition_tolerance(&lat, &c).map_err(|e| e.to_string())?;
        let r = check_condition(&dg, &hydro(lat), &GaugeField::zero(lat), tol).map_err(|e| e.to_string())?;
        dg_pass &= r.pass;
        h.push(lat.min_spacing());
        err.push(r.max_abs);
    }
    let (order, se) = observed_order(&h, &err);

    let lat = Lattice::square(64, TAU).unwrap();
    let bad = Model::new(
        PotentialSpec::Generic(
            GenericDensity::catalog("rho-squared-phase-gradient", DgParams::default(), c).map_err(|e| e.to_string())?,
        ),
        c,
    );
    let hy = hydro(lat);
    let tol = calibrate_condition_tolerance(&lat, &c).map_err(|e| e.to_string())?;
    let r = check_condition(&bad, &hy, &GaugeField::zero(lat), tol).map_err(|e| e.to_string())?;
    let expect = ScalarField::from_fn(lat, |x| -state.log_rho.value(x).exp() * state.log_rho.gradient(x)[1]);
    let mismatch = relative_l2(&r.residual(0, 1).unwrap(), &expect);
    verdict(
        dg_pass && order >= 1.8 && !r.pass && mismatch <= 0.05,
        format!(
            "DG residual order {order:.3} +- {se:.3}, passes at all levels: {dg_pass}; \
             counterexample fails: {}, mismatch vs -d2 rho {mismatch:.3e}",
            !r.pass
        ),
    )
}

/// Criterion 4: Commuting diagram for both routes, with and without a static A0.
fn commuting() -> Outcome {
    let mut parts = Vec::new();
    let mut all = true;
    for gauge in [GaugePreset::Zero, GaugePreset::StaticSineA0 { e0: 0.5, wavenumber: 1 }] {
        let scenario = Scenario {
            gauge,
            ..Scenario::dg_preset()
        };
        for route in [Route::A, Route::B] {
            let r = commuting_diagram(&scenario, route, &[128, 256, 512]);
            let t = &r.tables[0];
            let ok = r.records.iter().all(|c| c.pass) && within(t.order, 1.8, 2.5);
            all &= ok;
            parts.push(format!("{gauge}/{route}: {:.3}", t.order));
        }
    }
    verdict(all, format!("density orders {}", parts.join(", ")))
}

/// Criterion 5: special point, the transformed nonlinearity vanishes and the
/// free equation reproduces path 1.
fn special_point() -> Outcome {
    let base = Scenario::dg_preset();
    let scenario = Scenario {
        model: Model::dg_gauged(0.1, 0.005),
        ..base.clone()
    };
    let lat = scenario.lattice_with(128).map_err(|e| e.to_string())?;
    let c = calibrate_assembly_constant(&base, &lat).map_err(|e| e.to_string())?;
    let s = scenario.initial_state(lat).map_err(|e| e.to_string())?;
    let m = &scenario.model;
    let h = decompose(&s.wave, relative_floor(&s.wave.density(), m.floor_rel), &m.constants)
        .map_err(|e| e.to_string())?;
    let g = build_generator(m, &h, &s.gauge, f64::INFINITY).map_err(|e| e.to_string())?;
    let w = transformed_nonlinearity(m, &h, &s.gauge, &g, Route::A).map_err(|e| e.to_string())?;
    let dx = lat.min_spacing();
    let tol = c * dx * dx;
    let max_w = w.max_abs();

    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for n in [128, 256, 512] {
        let l = scenario.lattice_with(n).map_err(|e| e.to_string())?;
        let init = scenario.initial_state(l).map_err(|e| e.to_string())?;
        let d = free_path_run(&init, m, &scenario.integrator(&l), f64::INFINITY).map_err(|e| e.to_string())?;
        hs.push(l.min_spacing());
        errs.push(d.density);
    }
    let (order, se) = observed_order(&hs, &errs);
    verdict(
        max_w <= tol && within(order, 1.8, 2.5),
        format!("max |W~| = {max_w:.3e} <= {tol:.3e}; free-path density order {order:.3} +- {se:.3}"),
    )
}

/// Criterion 6: Charge drift over 1000 steps and continuity convergence.
fn conservation() -> Outcome {
    let scenario = Scenario::dg_preset();
    let lat = scenario.lattice;
    let mut parts = Vec::new();
    let mut all = true;
    for eq in [
        Equation::Original,
        Equation::Transformed(Route::A),
        Equation::Transformed(Route::B),
    ] {
        let evo = scenario.evolution(&lat, eq).map_err(|e| e.to_string())?;
        let mut init = scenario.initial_state(lat).map_err(|e| e.to_string())?;
        if eq == Equation::Transformed(Route::A) {
            init.wave = transform_state(&scenario.model, &init, Route::A, evo.condition_tol)
                .map_err(|e| e.to_string())?
                .0;
        }
        let dt = scenario.dt(&lat, scenario.t_final);
        let cfg = IntegratorConfig {
            snapshot_stride: 100,
            ..IntegratorConfig::new(dt, 1000.0 * dt)
        };
        let mut traj = Vec::new();
        evo.run(&init, &cfg, |s, _| {
            traj.push(s.clone());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
        let last = traj.last().map_or(0, |s| s.step_count);
        let drift = conservation_suite(&traj, &evo, 1e-8);
        let study = continuity_study(&scenario, eq, &[64, 128, 256]);
        let ok = drift.all_pass() && study.all_pass() && last == 1000;
        all &= ok;
        parts.push(format!(
            "{eq:?}: drift {:.2e} over {last} steps, continuity order {:.3}",
            drift.records[0].measured, study.tables[0].order
        ));
    }
    verdict(all, parts.join("; "))
}

/// Criterion 7: Closed forms against the numeric engine at h_fd = 1e-6.
fn functional_derivatives() -> Outcome {
    let lat = Lattice::line(128, TAU).unwrap();
    let fd = FdOptions { h_rel: 1e-6 };
    let model = Model::dg_gauged(0.05, 0.1);
    let c = model.constants;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = SmoothState::random(lat, &mut rng).hydro;
        let gauge = random_gauge(lat, &mut rng, 0.3);
        let run = || -> nlse_core::Result<f64> {
            let split = model.nonlinearity_split(&h, &gauge)?;
            let w = model.numeric_functional_derivative(Slot::Density, &h, &gauge, fd)?;
            let f = c.hbar * c.light_c / (2.0 * c.charge_e);
            let w_imag = model
                .numeric_functional_derivative(Slot::Phase, &h, &gauge, fd)?
                .zip_map(&h.rho, |d, r| f * d / r);
            let mut e = relative_l2(&w, &split.w_real).max(relative_l2(&w_imag, &split.w_imag));
            for slot in [Slot::PhaseGradient(0), Slot::DensityGradient(0)] {
                let closed = model.functional_derivative(slot, &h, &gauge)?;
                let numeric = model.numeric_functional_derivative(slot, &h, &gauge, fd)?;
                e = e.max(relative_l2(&numeric, &closed));
            }
            Ok(e)
        };
        worst = worst.max(run().map_err(|e| e.to_string())?);
    }
    verdict(worst <= 1e-6, format!("20 states, worst relative L2 {worst:.3e}"))
}

/// Criterion 8: Self-consistent 1D run: Gauss law at every step, charge conserved.
fn selfconsistent() -> Outcome {
    let scenario = Scenario::dg_preset();
    let lat = scenario.lattice;
    let evo = Evolution {
        gauge_mode: GaugeMode::SelfConsistent,
        ..Evolution::new(scenario.model.clone(), Equation::Original)
    };
    let init = scenario.initial_state(lat).map_err(|e| e.to_string())?;
    let dt = scenario.dt(&lat, scenario.t_final);
    let cfg = IntegratorConfig::new(dt, 1000.0 * dt);
    let e = scenario.model.constants.charge_e;
    let mut gauss = 0.0f64;
    let mut q = Vec::new();
    let mut steps = 0;
    evo.run(&init, &cfg, |s: &EvolutionState, _| {
        gauss = gauss.max(gauss_residual(s, e).max_abs());
        q.push(integrate(&s.wave.density()));
        steps = s.step_count;
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let drift = q.iter().map(|v| ((v - q[0]) / q[0]).abs()).fold(0.0, f64::max);
    verdict(
        gauss <= 1e-10 && drift <= 1e-8 && steps == 1000,
        format!("max Gauss residual {gauss:.3e} over {steps} steps, charge drift {drift:.3e}"),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "txt")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Criterion 9: Two full-verify runs produce identical CSVs and reports.
fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("preset.toml");
    std::fs::write(&config, "mode = \"full-verify\"\n").map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_simulate"))
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("full-verify exited with {status}"));
        }
        outputs.push(files(&out));
    }
    let n = outputs[0].len();
    verdict(
        n > 2 && outputs[0] == outputs[1],
        format!("{n} CSV and report files compared byte for byte"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("density invariance under route A", unitarity),
        ("field-strength invariance under route B", field_strength),
        ("integrability condition", integrability),
        ("commuting diagram", commuting),
        ("linearization special point", special_point),
        ("conservation", conservation),
        ("functional-derivative oracle", functional_derivatives),
        ("self-consistent 1D mode", selfconsistent),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {} ({name}): {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
