//! Mode orchestration: builds the scenario, runs it and writes the artifacts.

use std::fs;
use std::path::Path;

use log::{debug, info};
use nlse_core::evolve::{gauss_residual, EvolutionState, GaugeMode};
use nlse_core::fields::{decompose, relative_floor};
use nlse_core::grid::integrate;
use nlse_core::transforms::check_condition;
use nlse_core::verify::{commuting_diagram, commuting_run, full_verify, transform_state, Discrepancy};
use nlse_core::{Equation, Evolution, IntegratorConfig, Route, VerificationReport};
use thiserror::Error;

use crate::config::{ConfigError, Mode, ScenarioConfig};
use crate::output::{combined_l2, float, write_snapshot, Columns, CsvFile, Extras, Observables};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    ChecksFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::ChecksFailed => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Runtime {
        context: String,
        source: nlse_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// 2 for configuration problems (including the stability guard), 3 for
    /// aborted runs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_)
            | Self::Runtime {
                source: nlse_core::Error::StabilityGuard { .. },
                ..
            } => 2,
            _ => 3,
        }
    }
}

pub(crate) fn runtime(context: impl Into<String>) -> impl FnOnce(nlse_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Runtime { context, source }
}

/// Runs `cfg.mode`, writing everything below `cfg.output`.
pub fn run(cfg: &ScenarioConfig) -> Result<Outcome, RunError> {
    let dir = cfg.output.as_path();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("resolved_config.toml"), cfg.to_toml())?;
    info!(
        "mode {} on {}D lattice with {} points, {}",
        cfg.mode,
        cfg.lattice.dim,
        cfg.lattice.points,
        cfg.model().potential.label()
    );
    let report = match cfg.mode {
        Mode::EvolveOriginal => evolve(cfg, dir, Equation::Original, GaugeMode::Prescribed)?,
        Mode::EvolveTransformedA => evolve(cfg, dir, Equation::Transformed(Route::A), GaugeMode::Prescribed)?,
        Mode::EvolveTransformedB => evolve(cfg, dir, Equation::Transformed(Route::B), GaugeMode::Prescribed)?,
        Mode::SelfConsistent1d => evolve(cfg, dir, Equation::Original, GaugeMode::SelfConsistent)?,
        Mode::CommutingDiagram => commuting(cfg, dir)?,
        Mode::ConditionCheck => condition(cfg, dir)?,
        Mode::FullVerify => verify_all(cfg, dir)?,
    };
    fs::write(dir.join("report.txt"), report.render())?;
    let (passed, total) = report.count();
    info!("{passed}/{total} checks passed");
    Ok(if report.all_pass() {
        Outcome::Pass
    } else {
        Outcome::ChecksFailed
    })
}

struct RunStats {
    drift: f64,
    gauss_max: f64,
    steps: u64,
}

/// Steps `init` to the final time, writing observables and snapshots every
/// `snapshot_stride` steps. Charge drift and the Gauss residual are tracked
/// at every step.
fn drive(
    evo: &Evolution,
    init: &EvolutionState,
    icfg: &IntegratorConfig,
    dir: &Path,
) -> Result<RunStats, RunError> {
    let lat = *init.lattice();
    icfg.check(&lat, &evo.model).map_err(runtime("integrator"))?;
    let selfconsistent = evo.gauge_mode == GaugeMode::SelfConsistent;
    let c = evo.model.constants;
    let mut obs = Observables::create(
        dir,
        Columns {
            maxwell: true,
            gauss: selfconsistent,
            ..Columns::default()
        },
    )?;
    let mut state = EvolutionState {
        gauge: evo
            .coupled_gauge(&init.wave.psi, &init.gauge)
            .map_err(runtime("initial gauge field"))?,
        ..init.clone()
    };
    let q0 = integrate(&state.wave.density());
    let mut stats = RunStats {
        drift: 0.0,
        gauss_max: 0.0,
        steps: icfg.steps(),
    };
    let gauss = |s: &EvolutionState| selfconsistent.then(|| gauss_residual(s, c.charge_e).max_abs());
    if let Some(g) = gauss(&state) {
        stats.gauss_max = g;
    }
    let emit = |obs: &mut Observables, s: &EvolutionState, prev: Option<&EvolutionState>| -> Result<(), RunError> {
        let maxwell = match prev {
            Some(p) => Some(combined_l2(
                &evo.maxwell_residual(p, s).map_err(runtime("Maxwell residual"))?,
            )),
            None => None,
        };
        obs.write(
            evo,
            s,
            Extras {
                maxwell,
                gauss: gauss(s),
                ..Extras::default()
            },
        )?;
        write_snapshot(dir, s, &c)?;
        debug!("step {} t = {}", s.step_count, s.time);
        Ok(())
    };
    let mut result = emit(&mut obs, &state, None);
    let stride = icfg.snapshot_stride.max(1);
    for n in 1..=stats.steps {
        if result.is_err() {
            break;
        }
        let next = match evo.step(&state, icfg.dt) {
            Ok(s) => s,
            Err(e) => {
                result = Err(runtime(format!("step {n}"))(e));
                break;
            }
        };
        stats.drift = stats
            .drift
            .max(((integrate(&next.wave.density()) - q0) / q0).abs());
        if let Some(g) = gauss(&next) {
            stats.gauss_max = stats.gauss_max.max(g);
        }
        if n % stride == 0 || n == stats.steps {
            result = emit(&mut obs, &next, Some(&state));
        }
        state = next;
    }
    obs.flush()?;
    result.map(|_| stats)
}

fn evolution(cfg: &ScenarioConfig, equation: Equation, gauge_mode: GaugeMode) -> Result<Evolution, RunError> {
    let scenario = cfg.scenario();
    Ok(Evolution {
        gauge_mode,
        condition_tol: scenario
            .condition_tol(&cfg.lattice())
            .map_err(runtime("condition tolerance"))?,
        ..Evolution::new(cfg.model(), equation)
    })
}

fn initial_state(cfg: &ScenarioConfig, equation: Equation, condition_tol: f64) -> Result<EvolutionState, RunError> {
    let init = cfg
        .scenario()
        .initial_state(cfg.lattice())
        .map_err(runtime("initial state"))?;
    Ok(match equation {
        Equation::Transformed(Route::A) => {
            let (w, _) = transform_state(&cfg.model(), &init, Route::A, condition_tol)
                .map_err(runtime("route-A transformation of the initial state"))?;
            EvolutionState { wave: w, ..init }
        }
        _ => init,
    })
}

fn evolve(
    cfg: &ScenarioConfig,
    dir: &Path,
    equation: Equation,
    gauge_mode: GaugeMode,
) -> Result<VerificationReport, RunError> {
    let evo = evolution(cfg, equation, gauge_mode)?;
    let init = initial_state(cfg, equation, evo.condition_tol)?;
    let stats = drive(&evo, &init, &cfg.integrator_config(), dir)?;
    let mut report = VerificationReport::new(format!("{}: {}", cfg.mode, evo.model.potential.label()));
    report.check(
        "charge drift",
        stats.drift,
        cfg.tolerances.charge_drift,
        format!("max |Q(t) - Q(0)| / Q(0) over {} steps", stats.steps),
    );
    if gauge_mode == GaugeMode::SelfConsistent {
        report.check(
            "Gauss-law residual",
            stats.gauss_max,
            cfg.tolerances.gauss,
            "max site residual over every step",
        );
    }
    Ok(report)
}

fn commuting(cfg: &ScenarioConfig, dir: &Path) -> Result<VerificationReport, RunError> {
    let route = cfg.verify.route;
    let evo = evolution(cfg, Equation::Original, GaugeMode::Prescribed)?;
    let init = initial_state(cfg, Equation::Original, evo.condition_tol)?;
    let icfg = cfg.integrator_config();
    icfg.check(init.lattice(), &evo.model).map_err(runtime("integrator"))?;
    let mut rows: Vec<(EvolutionState, Discrepancy)> = Vec::new();
    let result = commuting_run(&init, &evo.model, &icfg, route, evo.condition_tol, |p1, _, d| {
        rows.push((p1.clone(), d));
        Ok(())
    });
    let mut obs = Observables::create(
        dir,
        Columns {
            commuting: true,
            ..Columns::default()
        },
    )?;
    for (s, d) in &rows {
        obs.write(
            &evo,
            s,
            Extras {
                commuting: Some(d.density),
                ..Extras::default()
            },
        )?;
        write_snapshot(dir, s, &evo.model.constants)?;
    }
    obs.flush()?;
    let last = result.map_err(runtime(format!("commuting diagram, route {route}")))?;
    let mut report = commuting_diagram(&cfg.scenario(), route, &cfg.verify.levels);
    report.diagnostic(
        format!("density discrepancy at N = {}", cfg.lattice.points),
        last.density,
        "max relative L2 over the trajectory",
    );
    report.diagnostic(
        format!("field discrepancy at N = {}", cfg.lattice.points),
        last.field,
        "max relative L2 over the trajectory after global-phase alignment",
    );
    Ok(report)
}

fn condition(cfg: &ScenarioConfig, dir: &Path) -> Result<VerificationReport, RunError> {
    let lat = cfg.lattice();
    let model = cfg.model();
    let scenario = cfg.scenario();
    let tol = scenario.condition_tol(&lat).map_err(runtime("condition tolerance"))?;
    let init = scenario.initial_state(lat).map_err(runtime("initial state"))?;
    let floor = relative_floor(&init.wave.density(), model.floor_rel);
    let h = decompose(&init.wave, floor, &model.constants).map_err(runtime("initial state"))?;
    let r = check_condition(&model, &h, &init.gauge, tol).map_err(runtime("integrability condition"))?;

    let names: Vec<String> = r.pairs.iter().map(|((i, j), _)| format!("residual_{i}{j}")).collect();
    let mut header = vec!["site_index", "x"];
    if lat.dim() == 2 {
        header.push("y");
    }
    header.extend(names.iter().map(String::as_str));
    let mut f = CsvFile::create(&dir.join("condition_residual.csv"), &header)?;
    for i in 0..lat.len() {
        let x = lat.position(i);
        let mut row = vec![i.to_string(), float(x[0])];
        if lat.dim() == 2 {
            row.push(float(x[1]));
        }
        row.extend(r.pairs.iter().map(|(_, f)| float(f.get(i))));
        f.row(&row)?;
    }
    f.flush()?;

    let mut report = VerificationReport::new(format!("condition-check: {}", model.potential.label()));
    if tol.is_finite() && cfg.tolerances.condition.is_none() {
        report.calibrate("condition_tolerance", tol);
    }
    let note = if r.pairs.is_empty() {
        "no axis pairs on a line; vacuous"
    } else {
        "max antisymmetrised residual"
    };
    report.check("integrability condition", r.max_abs, r.tol, note);
    Ok(report)
}

fn verify_all(cfg: &ScenarioConfig, dir: &Path) -> Result<VerificationReport, RunError> {
    let evo = evolution(cfg, Equation::Original, GaugeMode::Prescribed)?;
    let init = initial_state(cfg, Equation::Original, evo.condition_tol)?;
    drive(&evo, &init, &cfg.integrator_config(), dir)?;
    Ok(full_verify(
        &cfg.scenario(),
        &cfg.verify.levels,
        cfg.verify.drift_steps,
        cfg.tolerances.charge_drift,
    ))
}
