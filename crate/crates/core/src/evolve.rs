//! Method-of-lines RK4 evolution of the original and transformed equations,
//! Maxwell-source and continuity diagnostics, and the 1D self-consistent
//! electrostatic mode.
//!
//! The covariant Laplacian is discretised as
//! `lap psi - i k [A . D psi + D . (A psi)] - k^2 A^2 psi` with `D` the
//! central difference and `k = e / hbar c`. The bracket is an antisymmetric
//! real operator, so the whole stencil is Hermitian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{decompose, relative_floor, GaugeField, HydroFields, WaveField};
use crate::grid::{
    central_diff, divergence, laplacian, ComplexField, Lattice, ScalarField, VectorField,
};
use crate::potentials::{dg, Model, PotentialSpec};
use crate::transforms::{
    build_generator, dg_transformed_nonlinearity, route_b_transform, transformed_nonlinearity,
    Generator, Route,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Original,
    Transformed(Route),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeMode {
    /// External gauge field held fixed in time.
    Prescribed,
    /// `A = 0`, `A0` from the periodic Poisson problem with the
    /// background-subtracted density as source (1D only).
    SelfConsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState {
    pub wave: WaveField,
    /// For route B this is the original field `A`; the shifted field is
    /// rebuilt from the state whenever it is needed.
    pub gauge: GaugeField,
    pub time: f64,
    pub step_count: u64,
}

impl EvolutionState {
    pub fn new(wave: WaveField, gauge: GaugeField) -> Self {
        Self {
            wave,
            gauge,
            time: 0.0,
            step_count: 0,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        self.wave.lattice()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: u64,
    /// `dt <= stability_c * dx_min^2 * m / hbar`
    pub stability_c: f64,
}

impl IntegratorConfig {
    pub const DEFAULT_STABILITY_C: f64 = 0.2;

    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            snapshot_stride: 1,
            stability_c: Self::DEFAULT_STABILITY_C,
        }
    }

    pub fn stability_limit(&self, lat: &Lattice, model: &Model) -> f64 {
        let dx = lat.min_spacing();
        self.stability_c * dx * dx * model.constants.mass / model.constants.hbar
    }

    pub fn check(&self, lat: &Lattice, model: &Model) -> Result<()> {
        let limit = self.stability_limit(lat, model);
        if !(self.dt > 0.0) || self.dt > limit {
            return Err(Error::StabilityGuard { dt: self.dt, limit });
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_final / self.dt).round().max(0.0) as u64
    }
}

/// Which equation is evolved, with which gauge coupling.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub model: Model,
    pub equation: Equation,
    pub gauge_mode: GaugeMode,
    /// Integrability tolerance for generators built on the fly (2D generic
    /// potentials only).
    pub condition_tol: f64,
}

impl Evolution {
    pub fn new(model: Model, equation: Equation) -> Self {
        Self {
            model,
            equation,
            gauge_mode: GaugeMode::Prescribed,
            condition_tol: f64::INFINITY,
        }
    }

    fn floor(&self, rho: &ScalarField) -> f64 {
        relative_floor(rho, self.model.floor_rel)
    }

    fn hydro(&self, w: &WaveField) -> Result<HydroFields> {
        let rho = w.density();
        decompose(w, self.floor(&rho), &self.model.constants)
    }

    /// Gauge field seen by the matter field: the solved electrostatic field in
    /// self-consistent mode, otherwise `gauge` itself.
    pub fn coupled_gauge(&self, psi: &ComplexField, gauge: &GaugeField) -> Result<GaugeField> {
        match self.gauge_mode {
            GaugeMode::Prescribed => Ok(gauge.clone()),
            GaugeMode::SelfConsistent => {
                let a0 = electrostatic_potential(&psi.norm_sqr(), self.model.constants.charge_e)?;
                Ok(GaugeField {
                    a0,
                    avec: VectorField::zeros(*psi.lattice()),
                })
            }
        }
    }

    /// Generator on the current state; route-A states are mapped back to the
    /// original phase first.
    pub fn generator(&self, w: &WaveField, gauge: &GaugeField) -> Result<(HydroFields, Generator)> {
        let h = self.hydro(w)?;
        match self.equation {
            Equation::Transformed(Route::A) => {
                let g0 = build_generator(&self.model, &h, gauge, self.condition_tol)?;
                if g0.phase_dependent {
                    return Err(Error::InversionUnavailable);
                }
                let original = HydroFields {
                    rho: h.rho,
                    phase: h.phase.sub(&g0.sigma),
                };
                let g = build_generator(&self.model, &original, gauge, self.condition_tol)?;
                Ok((original, g))
            }
            _ => {
                let g = build_generator(&self.model, &h, gauge, self.condition_tol)?;
                Ok((h, g))
            }
        }
    }

    /// `d psi / dt`.
    pub fn rhs(&self, psi: &ComplexField, gauge: &GaugeField) -> Result<ComplexField> {
        let gauge = self.coupled_gauge(psi, gauge)?;
        let rho = psi.norm_sqr();
        self.model.check_floor(&rho)?;
        let (w_re, w_im, field) = match (self.equation, self.model.potential.dg_params()) {
            (Equation::Original, Some(p)) => {
                let k = dg::DgCoefficients::new(p, &self.model.constants);
                let v = self.velocity(psi, &rho, &gauge);
                let w = dg::real_part(&k, &rho, &v);
                (w, Some(dg::imaginary_part(p, &self.model.constants, &rho)), gauge)
            }
            (Equation::Original, None) => {
                let h = self.hydro(&WaveField::new(psi.clone()))?;
                let s = self.model.nonlinearity_split(&h, &gauge)?;
                (s.w_real, Some(s.w_imag), gauge)
            }
            (Equation::Transformed(Route::A), Some(_)) => {
                (dg_transformed_nonlinearity(&self.model, &rho)?, None, gauge)
            }
            (Equation::Transformed(Route::B), Some(p)) => {
                let chi = self.dg_shifted_gauge(p, psi, &rho, &gauge);
                (dg_transformed_nonlinearity(&self.model, &rho)?, None, chi)
            }
            (Equation::Transformed(route), None) => {
                let (h, g) = self.generator(&WaveField::new(psi.clone()), &gauge)?;
                if g.phase_dependent {
                    return Err(Error::InversionUnavailable);
                }
                match route {
                    Route::A => (
                        transformed_nonlinearity(&self.model, &h, &gauge, &g, Route::A)?,
                        None,
                        gauge,
                    ),
                    Route::B => {
                        let chi = route_b_transform(&gauge, &g, &self.model.constants);
                        (
                            transformed_nonlinearity(&self.model, &h, &chi, &g, Route::B)?,
                            None,
                            chi,
                        )
                    }
                }
            }
        };
        Ok(self.assemble(psi, &field, &w_re, w_im.as_ref()))
    }

    /// `grad S - A` from `Im(psi* D psi) / rho`, with `A` dropped for the
    /// ungauged density.
    fn velocity(&self, psi: &ComplexField, rho: &ScalarField, gauge: &GaugeField) -> VectorField {
        let lat = *psi.lattice();
        let unit = self.model.constants.phase_unit();
        let gauged = !matches!(self.model.potential, PotentialSpec::DgUngauged(_));
        VectorField::from_components(
            (0..lat.dim())
                .map(|i| {
                    let d = central_diff(&lat, psi.values(), i);
                    let vals = psi
                        .values()
                        .iter()
                        .zip(&d)
                        .zip(rho.values())
                        .zip(gauge.avec.component(i).values())
                        .map(|(((p, dp), r), a)| {
                            unit * (p.conj() * dp).im / r - if gauged { *a } else { 0.0 }
                        })
                        .collect();
                    ScalarField::from_vec(lat, vals)
                })
                .collect(),
        )
    }

    /// Doebner-Goldin `chi`, `chi0` on the current field.
    fn dg_shifted_gauge(
        &self,
        p: crate::potentials::DgParams,
        psi: &ComplexField,
        rho: &ScalarField,
        gauge: &GaugeField,
    ) -> GaugeField {
        let c = &self.model.constants;
        let k = dg::DgCoefficients::new(p, c);
        let v = self.velocity(psi, rho, gauge);
        let em = c.charge_e / (c.mass * c.light_c);
        let ce = c.light_c / c.charge_e;
        let lat = *psi.lattice();
        let j_full = VectorField::from_components(
            (0..lat.dim())
                .map(|i| {
                    let slot = dg::phase_gradient_slot(&k, rho, i);
                    v.component(i)
                        .mul(rho)
                        .scaled(em)
                        .add(&slot.scaled(ce))
                })
                .collect(),
        );
        let f = -c.mass * c.light_c * p.nu / c.charge_e;
        let g = Generator {
            sigma: ScalarField::zeros(lat),
            grad_sigma: dg::log_gradient(rho).scaled(f),
            dsigma_dt: divergence(&j_full).div(rho).scaled(-f),
            phase_dependent: false,
        };
        route_b_transform(gauge, &g, c)
    }

    fn assemble(
        &self,
        psi: &ComplexField,
        gauge: &GaugeField,
        w_re: &ScalarField,
        w_im: Option<&ScalarField>,
    ) -> ComplexField {
        let c = &self.model.constants;
        let kin = covariant_laplacian(psi, &gauge.avec, c.coupling());
        let t = -c.hbar * c.hbar / (2.0 * c.mass);
        let inv = Complex64::new(0.0, -1.0 / c.hbar);
        let e = c.charge_e;
        let vals = psi
            .values()
            .iter()
            .zip(kin.values())
            .enumerate()
            .map(|(k, (p, l))| {
                let im = w_im.map_or(0.0, |w| w.get(k));
                let pot = Complex64::new(w_re.get(k) + e * gauge.a0.get(k), im);
                inv * (l * t + pot * p)
            })
            .collect();
        ComplexField::from_vec(*psi.lattice(), vals)
    }

    /// One RK4 step of size `dt`.
    pub fn step(&self, state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
        let psi = &state.wave.psi;
        let axpy = |a: &ComplexField, s: f64, b: &ComplexField| {
            let vals = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x + y * s)
                .collect();
            ComplexField::from_vec(*a.lattice(), vals)
        };
        let g = &state.gauge;
        let step_count = state.step_count + 1;
        let finite = |k: ComplexField| match k.first_non_finite() {
            Some(site) => Err(Error::NonFiniteDetected {
                step: step_count,
                site,
            }),
            None => Ok(k),
        };
        let k1 = finite(self.rhs(psi, g)?)?;
        let k2 = finite(self.rhs(&axpy(psi, 0.5 * dt, &k1), g)?)?;
        let k3 = finite(self.rhs(&axpy(psi, 0.5 * dt, &k2), g)?)?;
        let k4 = finite(self.rhs(&axpy(psi, dt, &k3), g)?)?;
        let h = dt / 6.0;
        let vals = psi
            .values()
            .iter()
            .zip(k1.values())
            .zip(k2.values())
            .zip(k3.values())
            .zip(k4.values())
            .map(|((((p, a), b), c), d)| p + (a + b * 2.0 + c * 2.0 + d) * h)
            .collect();
        let next = ComplexField::from_vec(*psi.lattice(), vals);
        if let Some(site) = next.first_non_finite() {
            return Err(Error::NonFiniteDetected {
                step: step_count,
                site,
            });
        }
        self.model.check_floor(&next.norm_sqr())?;
        let gauge = match self.gauge_mode {
            GaugeMode::Prescribed => state.gauge.clone(),
            GaugeMode::SelfConsistent => self.coupled_gauge(&next, &state.gauge)?,
        };
        Ok(EvolutionState {
            wave: WaveField::new(next),
            gauge,
            time: step_count as f64 * dt,
            step_count,
        })
    }

    /// Advances `initial` to `cfg.t_final`. `observe(state, previous)` sees the
    /// initial state, every `snapshot_stride`-th step and the final step;
    /// `previous` is the state one step earlier.
    pub fn run(
        &self,
        initial: &EvolutionState,
        cfg: &IntegratorConfig,
        mut observe: impl FnMut(&EvolutionState, Option<&EvolutionState>) -> Result<()>,
    ) -> Result<EvolutionState> {
        cfg.check(initial.lattice(), &self.model)?;
        if self.gauge_mode == GaugeMode::SelfConsistent && initial.lattice().dim() != 1 {
            return Err(Error::Unsupported("self-consistent mode needs a 1D lattice".into()));
        }
        let mut state = EvolutionState {
            gauge: self.coupled_gauge(&initial.wave.psi, &initial.gauge)?,
            ..initial.clone()
        };
        observe(&state, None)?;
        let steps = cfg.steps();
        let stride = cfg.snapshot_stride.max(1);
        for n in 1..=steps {
            let next = self.step(&state, cfg.dt)?;
            if n % stride == 0 || n == steps {
                observe(&next, Some(&state))?;
            }
            state = next;
        }
        Ok(state)
    }

    /// `d rho/dt + div J - source`, with `d rho/dt = 2 Re(psi* d psi/dt)` from
    /// the right-hand side and `J` the current of the evolved equation.
    pub fn continuity_residual(&self, state: &EvolutionState) -> Result<ScalarField> {
        let psi = &state.wave.psi;
        let gauge = self.coupled_gauge(psi, &state.gauge)?;
        let dpsi = self.rhs(psi, &gauge)?;
        let lat = *psi.lattice();
        let rho_t = ScalarField::from_vec(
            lat,
            psi.values()
                .iter()
                .zip(dpsi.values())
                .map(|(p, d)| 2.0 * (p.conj() * d).re)
                .collect(),
        );
        let (current, source) = self.current(state, &gauge)?;
        Ok(rho_t.add(&divergence(&current)).sub(&source))
    }

    /// Current and density source of the evolved equation.
    fn current(&self, state: &EvolutionState, gauge: &GaugeField) -> Result<(VectorField, ScalarField)> {
        let lat = *state.lattice();
        let h = self.hydro(&state.wave)?;
        Ok(match self.equation {
            Equation::Original => {
                let j = self.model.currents(&h, gauge)?.j_full;
                (j, self.model.continuity_source(&h, gauge))
            }
            Equation::Transformed(Route::A) => {
                (self.model.bilinear_current(&h, gauge), ScalarField::zeros(lat))
            }
            Equation::Transformed(Route::B) => {
                let chi = self.shifted_gauge(state)?;
                (self.model.bilinear_current(&h, &chi), ScalarField::zeros(lat))
            }
        })
    }

    /// The gauge field that enters the covariant derivatives: `chi` for route
    /// B, the state's field otherwise.
    pub fn shifted_gauge(&self, state: &EvolutionState) -> Result<GaugeField> {
        let psi = &state.wave.psi;
        let gauge = self.coupled_gauge(psi, &state.gauge)?;
        match (self.equation, self.model.potential.dg_params()) {
            (Equation::Transformed(Route::B), Some(p)) => {
                Ok(self.dg_shifted_gauge(p, psi, &psi.norm_sqr(), &gauge))
            }
            (Equation::Transformed(Route::B), None) => {
                let (_, g) = self.generator(&state.wave, &gauge)?;
                Ok(route_b_transform(&gauge, &g, &self.model.constants))
            }
            _ => Ok(gauge),
        }
    }

    /// `d^mu F_{mu nu} - (e/c) J_nu` for `nu = 0..=dim`, from two consecutive
    /// states. `d_t E` is the backward difference of `-grad A0`; second time
    /// derivatives of `A` are not resolved by two states and are dropped.
    pub fn maxwell_residual(
        &self,
        prev: &EvolutionState,
        cur: &EvolutionState,
    ) -> Result<Vec<ScalarField>> {
        let dt = cur.time - prev.time;
        if !(dt > 0.0) {
            return Err(Error::Unsupported("Maxwell residual needs two distinct times".into()));
        }
        let c = &self.model.constants;
        let lat = *cur.lattice();
        let g1 = self.shifted_gauge(cur)?;
        let g0 = self.shifted_gauge(prev)?;
        let rho = cur.wave.density();
        let source = match self.gauge_mode {
            GaugeMode::SelfConsistent => {
                let mean = rho.mean();
                rho.map(|r| r - mean)
            }
            GaugeMode::Prescribed => rho,
        };
        let da_dt = g1.avec.sub(&g0.avec).scaled(1.0 / dt);
        let gauss = laplacian(&g1.a0)
            .scaled(-1.0)
            .sub(&divergence(&da_dt).scaled(1.0 / c.light_c))
            .sub(&source.scaled(c.charge_e));
        let mut out = vec![gauss];

        let (current, _) = self.current(cur, &g1)?;
        let da0_dt = g1.a0.sub(&g0.a0).scaled(1.0 / dt);
        let curl_b = curl_of_magnetic(&g1.avec);
        for j in 0..lat.dim() {
            let de_dt = ScalarField::from_vec(lat, central_diff(&lat, da0_dt.values(), j)).scaled(-1.0);
            out.push(
                de_dt
                    .scaled(1.0 / c.light_c)
                    .sub(&curl_b[j])
                    .add(&current.component(j).scaled(c.charge_e / c.light_c)),
            );
        }
        Ok(out)
    }
}

/// `(curl B)_j` for the out-of-plane field `B = D_x A^y - D_y A^x`; zero on a line.
fn curl_of_magnetic(a: &VectorField) -> Vec<ScalarField> {
    let lat = *a.lattice();
    if lat.dim() == 1 {
        return vec![ScalarField::zeros(lat)];
    }
    let dxay = central_diff(&lat, a.component(1).values(), 0);
    let dyax = central_diff(&lat, a.component(0).values(), 1);
    let b: Vec<f64> = dxay.iter().zip(&dyax).map(|(p, q)| p - q).collect();
    let dyb = central_diff(&lat, &b, 1);
    let dxb = central_diff(&lat, &b, 0);
    vec![
        ScalarField::from_vec(lat, dyb),
        ScalarField::from_vec(lat, dxb.into_iter().map(|v| -v).collect()),
    ]
}

/// `lap psi - i k [A . D psi + D . (A psi)] - k^2 |A|^2 psi`.
pub fn covariant_laplacian(psi: &ComplexField, a: &VectorField, coupling: f64) -> ComplexField {
    let lat = *psi.lattice();
    let mut out = psi.laplacian();
    if a.max_abs() == 0.0 {
        return out;
    }
    let mi = Complex64::new(0.0, -coupling);
    let k2 = coupling * coupling;
    let mut a2 = vec![0.0; lat.len()];
    for i in 0..lat.dim() {
        let ai = a.component(i).values();
        let d = central_diff(&lat, psi.values(), i);
        let weighted: Vec<Complex64> = psi.values().iter().zip(ai).map(|(p, x)| p * x).collect();
        let dw = central_diff(&lat, &weighted, i);
        for (k, o) in out.values_mut().iter_mut().enumerate() {
            *o += mi * (d[k] * ai[k] + dw[k]);
        }
        for (s, x) in a2.iter_mut().zip(ai) {
            *s += x * x;
        }
    }
    for ((o, p), s) in out.values_mut().iter_mut().zip(psi.values()).zip(&a2) {
        *o -= p * (k2 * s);
    }
    out
}

/// Solves the periodic 1D problem `lap_c u = f` (compact stencil) with
/// `mean(u) = 0`. `f` must have zero mean.
pub fn solve_periodic_poisson(f: &ScalarField) -> Result<ScalarField> {
    let lat = *f.lattice();
    if lat.dim() != 1 {
        return Err(Error::Unsupported("periodic Poisson solver is 1D".into()));
    }
    let scale = f.max_abs();
    let mean = f.mean();
    if mean.abs() > 1e-12 * scale {
        return Err(Error::SolverFailure(format!(
            "source has nonzero mean {mean:.3e}"
        )));
    }
    solve_projected(f, scale)
}

/// Poisson solve on the zero-mean part of `f`; `scale` sets the acceptance
/// threshold of the final residual check.
fn solve_projected(f: &ScalarField, scale: f64) -> Result<ScalarField> {
    let lat = *f.lattice();
    let n = lat.len();
    let h2 = lat.spacing(0) * lat.spacing(0);
    let mean = f.mean();
    let fv: Vec<f64> = f.values().iter().map(|v| v - mean).collect();
    // d_k = u_{k+1} - u_k satisfies d_k - d_{k-1} = h^2 f_k
    let mut d = vec![0.0; n];
    for k in 1..n {
        d[k] = d[k - 1] + h2 * fv[k];
    }
    let shift = d.iter().sum::<f64>() / n as f64;
    let mut u = vec![0.0; n];
    for k in 1..n {
        u[k] = u[k - 1] + d[k - 1] - shift;
    }
    let mu = u.iter().sum::<f64>() / n as f64;
    let u = ScalarField::from_vec(lat, u.into_iter().map(|v| v - mu).collect());
    let res = laplacian(&u)
        .values()
        .iter()
        .zip(&fv)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if !(res <= 1e-11 * scale.max(f64::MIN_POSITIVE) + 1e-13) {
        return Err(Error::SolverFailure(format!("Poisson residual {res:.3e}")));
    }
    Ok(u)
}

/// `A0` with `-lap A0 = e (rho - mean rho)`.
pub fn electrostatic_potential(rho: &ScalarField, charge_e: f64) -> Result<ScalarField> {
    if rho.lattice().dim() != 1 {
        return Err(Error::Unsupported("periodic Poisson solver is 1D".into()));
    }
    let mean = rho.mean();
    solve_projected(&rho.map(|r| -charge_e * (r - mean)), charge_e.abs() * rho.max_abs())
}

/// Gauss-law residual `-lap A0 - e (rho - mean rho)` of a 1D electrostatic state.
pub fn gauss_residual(state: &EvolutionState, charge_e: f64) -> ScalarField {
    let rho = state.wave.density();
    let mean = rho.mean();
    laplacian(&state.gauge.a0)
        .scaled(-1.0)
        .sub(&rho.map(|r| charge_e * (r - mean)))
}

/// Self-consistent 1D electrostatic run; returns the observed snapshots.
pub fn run_selfconsistent_1d(
    initial: &EvolutionState,
    model: &Model,
    cfg: &IntegratorConfig,
) -> Result<Vec<EvolutionState>> {
    let evo = Evolution {
        gauge_mode: GaugeMode::SelfConsistent,
        ..Evolution::new(model.clone(), Equation::Original)
    };
    let mut out = Vec::new();
    evo.run(initial, cfg, |s, _| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}
