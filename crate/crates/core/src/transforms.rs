//! Generator `sigma` of the linearising transformation, the integrability
//! condition, the matter-field route (A) and the gauge-field route (B).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{GaugeField, HydroFields, WaveField};
use crate::grid::{central_diff, gradient, Lattice, PhysicalConstants, ScalarField, VectorField};
use crate::potentials::{dg, Model, PotentialSpec, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    /// Unitary map on the matter field, `phi = exp(i e sigma / hbar c) psi`.
    A,
    /// Shift of the gauge field, `chi = A - grad sigma`, `chi0 = A0 + sigma_t / c`.
    B,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "A",
            Self::B => "B",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            other => Err(Error::Unsupported(format!("unknown route `{other}`"))),
        }
    }
}

/// `sigma`, its gradient and its time derivative on one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub sigma: ScalarField,
    pub grad_sigma: VectorField,
    pub dsigma_dt: ScalarField,
    /// Set when `grad sigma` changes under a change of `S` alone.
    pub phase_dependent: bool,
}

impl Generator {
    pub fn identity(lat: Lattice) -> Self {
        Self {
            sigma: ScalarField::zeros(lat),
            grad_sigma: VectorField::zeros(lat),
            dsigma_dt: ScalarField::zeros(lat),
            phase_dependent: false,
        }
    }
}

/// Antisymmetrised residual `d_i q_j - d_j q_i`, `q_i = (1/rho) dA/d(d_i S)`,
/// stored for `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub pairs: Vec<((usize, usize), ScalarField)>,
    pub max_abs: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConditionReport {
    pub fn residual(&self, i: usize, j: usize) -> Option<ScalarField> {
        if i == j {
            return None;
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        self.pairs
            .iter()
            .find(|(p, _)| *p == (a, b))
            .map(|(_, r)| r.scaled(sign))
    }
}

fn phase_gradient_ratio(model: &Model, hydro: &HydroFields, gauge: &GaugeField) -> Result<Vec<ScalarField>> {
    (0..hydro.lattice().dim())
        .map(|i| {
            Ok(model
                .functional_derivative(Slot::PhaseGradient(i), hydro, gauge)?
                .div(&hydro.rho))
        })
        .collect()
}

fn condition_residuals(q: &[ScalarField]) -> Vec<((usize, usize), ScalarField)> {
    let mut out = Vec::new();
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let lat = *q[i].lattice();
            let di_qj = central_diff(&lat, q[j].values(), i);
            let dj_qi = central_diff(&lat, q[i].values(), j);
            let r = di_qj.iter().zip(&dj_qi).map(|(a, b)| a - b).collect();
            out.push(((i, j), ScalarField::from_vec(lat, r)));
        }
    }
    out
}

/// Evaluates the integrability condition. Vacuous on a line.
pub fn check_condition(
    model: &Model,
    hydro: &HydroFields,
    gauge: &GaugeField,
    tol: f64,
) -> Result<ConditionReport> {
    let q = phase_gradient_ratio(model, hydro, gauge)?;
    let pairs = condition_residuals(&q);
    let max_abs = pairs.iter().fold(0.0f64, |m, (_, r)| m.max(r.max_abs()));
    Ok(ConditionReport {
        pairs,
        max_abs,
        tol,
        pass: max_abs <= tol,
    })
}

/// Fixed multi-mode smooth state used for tolerance calibration.
pub fn reference_state(lat: Lattice) -> HydroFields {
    let th = |x: [f64; 2], a: usize| std::f64::consts::TAU * x[a] / lat.extent(a);
    HydroFields {
        rho: ScalarField::from_fn(lat, |x| {
            (0.3 * th(x, 0).cos() * th(x, 1).cos() + 0.2 * (2.0 * th(x, 0) + th(x, 1)).sin()
                - 0.15 * (th(x, 0) - 2.0 * th(x, 1)).cos())
            .exp()
        }),
        phase: ScalarField::from_fn(lat, |x| 0.4 * th(x, 0).sin() + 0.3 * (th(x, 0) - th(x, 1)).cos()),
    }
}

/// Default condition tolerance on `lat`: ten times the self-convergence
/// constant `max r / dx^2` of the residual of the gauged DG potential
/// (`nu = 0.1`) on a fixed multi-mode state, measured on a square lattice
/// with the spacing of `lat` and one refinement of it.
pub fn calibrate_condition_tolerance(lat: &Lattice, constants: &PhysicalConstants) -> Result<f64> {
    let n = lat.points(0);
    let l = lat.extent(0);
    let model = Model::new(
        PotentialSpec::DgGauged(crate::potentials::DgParams { nu: 0.1, alpha: 0.0 }),
        *constants,
    );
    let mut c = 0.0f64;
    for pts in [n, 2 * n] {
        let sq = Lattice::new(&[pts, pts], &[l, l])?;
        let h = reference_state(sq);
        let r = check_condition(&model, &h, &GaugeField::zero(sq), f64::INFINITY)?;
        let dx = sq.spacing(0);
        c = c.max(r.max_abs / (dx * dx));
    }
    let dx = lat.min_spacing();
    Ok(10.0 * c * dx * dx)
}

/// Result of integrating a gradient field along lattice lines.
#[derive(Clone, Debug, PartialEq)]
pub struct LineIntegral {
    /// Axis 0 first along `i1 = 0`, then axis 1 for every `i0`.
    pub sigma: ScalarField,
    /// `max |sigma - sigma'|` with `sigma'` integrated in the opposite order.
    pub path_gap: f64,
    /// Largest mismatch after a full lattice cycle.
    pub closure: f64,
}

/// Trapezoid integration of `grad` from site 0, where the value is `origin`.
pub fn integrate_gradient(grad: &VectorField, origin: f64) -> LineIntegral {
    let lat = *grad.lattice();
    let step = |k: usize, axis: usize| {
        let g = grad.component(axis).values();
        let next = lat.shift(k, axis, 1);
        (next, 0.5 * lat.spacing(axis) * (g[k] + g[next]))
    };
    let sweep = |out: &mut [f64], start: usize, axis: usize| -> f64 {
        let mut k = start;
        let mut acc = out[start];
        for _ in 0..lat.points(axis) {
            let (next, d) = step(k, axis);
            acc += d;
            if next == start {
                return (acc - out[start]).abs();
            }
            out[next] = acc;
            k = next;
        }
        0.0
    };
    let order = |first: usize| {
        let mut s = vec![0.0; lat.len()];
        s[0] = origin;
        let mut closure = sweep(&mut s, 0, first);
        if lat.dim() == 2 {
            let second = 1 - first;
            for j in 0..lat.points(first) {
                let mut c = [0usize; 2];
                c[first] = j;
                closure = closure.max(sweep(&mut s, lat.index(c), second));
            }
        }
        (s, closure)
    };
    let (s0, c0) = order(0);
    let (path_gap, closure) = if lat.dim() == 2 {
        let (s1, c1) = order(1);
        let gap = s0
            .iter()
            .zip(&s1)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        (gap, c0.max(c1))
    } else {
        (0.0, c0)
    };
    LineIntegral {
        sigma: ScalarField::from_vec(lat, s0),
        path_gap,
        closure,
    }
}

fn generic_grad_sigma(model: &Model, hydro: &HydroFields, gauge: &GaugeField) -> Result<VectorField> {
    let c = &model.constants;
    let f = c.mass * c.light_c * c.light_c / (c.charge_e * c.charge_e);
    let q = phase_gradient_ratio(model, hydro, gauge)?;
    Ok(VectorField::from_components(q.into_iter().map(|qi| qi.scaled(f)).collect()))
}

fn generic_sigma(model: &Model, hydro: &HydroFields, gauge: &GaugeField, tol: f64) -> Result<(ScalarField, VectorField)> {
    let grad = generic_grad_sigma(model, hydro, gauge)?;
    let line = integrate_gradient(&grad, 0.0);
    let c = &model.constants;
    let scale = c.mass * c.light_c * c.light_c / (c.charge_e * c.charge_e);
    let extent = (0..hydro.lattice().dim())
        .map(|a| hydro.lattice().extent(a))
        .fold(0.0f64, f64::max);
    let limit = tol * scale * extent;
    if line.path_gap > limit || line.closure > limit {
        return Err(Error::ConditionViolated {
            detail: format!(
                "sigma is path dependent: path gap {:.3e}, cycle closure {:.3e}",
                line.path_gap, line.closure
            ),
            max_abs: line.path_gap.max(line.closure),
            tol: limit,
        });
    }
    Ok((line.sigma, grad))
}

/// Builds `sigma` on `(hydro, gauge)`. Doebner-Goldin kinds use the closed
/// form `sigma = -(m c nu / e) ln rho`; generic densities integrate the
/// numeric gradient with `sigma(origin) = 0`. On a square lattice the
/// integrability condition is checked first with tolerance `tol`.
pub fn build_generator(
    model: &Model,
    hydro: &HydroFields,
    gauge: &GaugeField,
    tol: f64,
) -> Result<Generator> {
    model.check_floor(&hydro.rho)?;
    let lat = *hydro.lattice();
    if lat.dim() == 2 {
        let report = check_condition(model, hydro, gauge, tol)?;
        if !report.pass {
            let gap = match model.potential {
                PotentialSpec::Generic(_) => {
                    let grad = generic_grad_sigma(model, hydro, gauge)?;
                    format!(", path gap {:.3e}", integrate_gradient(&grad, 0.0).path_gap)
                }
                _ => String::new(),
            };
            return Err(Error::ConditionViolated {
                detail: format!("integrability residual{gap}"),
                max_abs: report.max_abs,
                tol,
            });
        }
    }
    let c = &model.constants;
    let rho_t = model.density_rate(hydro, gauge)?;
    match model.potential.dg_params() {
        Some(p) => {
            let f = -c.mass * c.light_c * p.nu / c.charge_e;
            Ok(Generator {
                sigma: hydro.rho.map(|r| f * r.ln()),
                grad_sigma: dg::log_gradient(&hydro.rho).scaled(f),
                dsigma_dt: rho_t.div(&hydro.rho).scaled(f),
                phase_dependent: false,
            })
        }
        None => {
            let (sigma, grad_sigma) = generic_sigma(model, hydro, gauge, tol)?;
            let probe = HydroFields {
                rho: hydro.rho.clone(),
                phase: hydro.phase.add(&ScalarField::from_fn(lat, |x| {
                    0.3 * (std::f64::consts::TAU * (x[0] / lat.extent(0) + x[1] / lat.extent(1))).sin()
                })),
            };
            let probed = generic_grad_sigma(model, &probe, gauge)?;
            let phase_dependent =
                probed.sub(&grad_sigma).max_abs() > 1e-7 * (1.0 + grad_sigma.max_abs());
            let eps = model.fd.h_rel * hydro.rho.max_abs() / rho_t.max_abs().max(f64::MIN_POSITIVE);
            let eps = eps.min(1e-3);
            let shifted = |s: f64| -> Result<ScalarField> {
                let h = HydroFields {
                    rho: hydro.rho.zip_map(&rho_t, |r, d| r + s * eps * d),
                    phase: hydro.phase.clone(),
                };
                Ok(generic_sigma(model, &h, gauge, f64::INFINITY)?.0)
            };
            let dsigma_dt = if rho_t.max_abs() == 0.0 {
                ScalarField::zeros(lat)
            } else {
                shifted(1.0)?.sub(&shifted(-1.0)?).scaled(0.5 / eps)
            };
            Ok(Generator {
                sigma,
                grad_sigma,
                dsigma_dt,
                phase_dependent,
            })
        }
    }
}

/// `phi = exp(i e sigma / hbar c) psi`.
pub fn route_a_transform(w: &WaveField, g: &Generator, constants: &PhysicalConstants) -> WaveField {
    let k = constants.coupling();
    let mut out = w.clone();
    for (p, s) in out.psi.values_mut().iter_mut().zip(g.sigma.values()) {
        *p *= Complex64::from_polar(1.0, k * s);
    }
    out
}

/// `chi = A - grad sigma`, `chi0 = A0 + (1/c) d sigma/dt`.
pub fn route_b_transform(gauge: &GaugeField, g: &Generator, constants: &PhysicalConstants) -> GaugeField {
    GaugeField {
        a0: gauge
            .a0
            .zip_map(&g.dsigma_dt, |a, d| a + d / constants.light_c),
        avec: gauge.avec.sub(&g.grad_sigma),
    }
}

/// Doebner-Goldin scalar potential in divergence form,
/// `chi0 = A0 + (nu / c rho) div[(grad S - chi) rho]`, with `chi` the
/// transformed vector potential.
pub fn dg_chi0_divergence_form(
    model: &Model,
    hydro: &HydroFields,
    a0: &ScalarField,
    chi: &VectorField,
) -> Result<ScalarField> {
    let p = model
        .potential
        .dg_params()
        .ok_or_else(|| Error::Unsupported("divergence form needs a Doebner-Goldin potential".into()))?;
    let flux = gradient(&hydro.phase).sub(chi).times(&hydro.rho);
    let f = p.nu / model.constants.light_c;
    Ok(crate::grid::divergence(&flux)
        .div(&hydro.rho)
        .scaled(f)
        .add(a0))
}

/// Real nonlinearity left after the transformation, assembled term by term:
/// `W + (e^2/2mc^2)|grad sigma|^2 - (e/c)(J . grad sigma)/rho - (e/c) d sigma/dt`.
///
/// Route A: `hydro` and `gauge` are the original state and field, `J` is the
/// bilinear current of the transformed phase `S + sigma`. Route B: `gauge`
/// holds `chi`, `W` is evaluated at `A = chi + grad sigma` and `J` is the
/// bilinear current with `chi`.
pub fn transformed_nonlinearity(
    model: &Model,
    hydro: &HydroFields,
    gauge: &GaugeField,
    g: &Generator,
    route: Route,
) -> Result<ScalarField> {
    let c = &model.constants;
    let (w, current) = match route {
        Route::A => {
            if g.phase_dependent {
                return Err(Error::InversionUnavailable);
            }
            let w = model.nonlinearity_split(hydro, gauge)?.w_real;
            let s = HydroFields {
                rho: hydro.rho.clone(),
                phase: hydro.phase.add(&g.sigma),
            };
            (w, model.bilinear_current(&s, gauge))
        }
        Route::B => {
            let original = GaugeField {
                a0: gauge.a0.clone(),
                avec: gauge.avec.add(&g.grad_sigma),
            };
            let w = model.nonlinearity_split(hydro, &original)?.w_real;
            (w, model.bilinear_current(hydro, gauge))
        }
    };
    let quad = c.charge_e * c.charge_e / (2.0 * c.mass * c.light_c * c.light_c);
    let ec = c.charge_e / c.light_c;
    let g2 = g.grad_sigma.norm_squared();
    let jg = current.dot(&g.grad_sigma).div(&hydro.rho);
    let mut out = w;
    for (((o, &a), &b), &d) in out
        .values_mut()
        .iter_mut()
        .zip(g2.values())
        .zip(jg.values())
        .zip(g.dsigma_dt.values())
    {
        *o += quad * a - ec * b - ec * d;
    }
    Ok(out)
}

/// Doebner-Goldin closed form of the transformed nonlinearity,
/// `(m nu^2 - 2 alpha hbar^2/m) [lap rho / rho - |grad rho / rho|^2 / 2]`.
pub fn dg_transformed_nonlinearity(model: &Model, rho: &ScalarField) -> Result<ScalarField> {
    let p = model
        .potential
        .dg_params()
        .ok_or_else(|| Error::Unsupported("closed form needs a Doebner-Goldin potential".into()))?;
    model.check_floor(rho)?;
    let k = dg::transformed_coefficient(p, &model.constants);
    Ok(dg::quantum_bracket(rho).scaled(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{decompose, field_strength, recompose};
    use crate::grid::{integrate, relative_l2};
    use crate::potentials::{DgParams, GenericDensity};
    use std::f64::consts::TAU;

    fn c1() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn line(n: usize) -> Lattice {
        Lattice::line(n, TAU).unwrap()
    }

    fn exp_sin(lat: Lattice) -> HydroFields {
        HydroFields {
            rho: ScalarField::from_fn(lat, |x| (-x[0].sin()).exp()),
            phase: ScalarField::zeros(lat),
        }
    }

    #[test]
    fn zero_diffusion_gives_identity() {
        let lat = line(64);
        let h = exp_sin(lat);
        let g = build_generator(&Model::dg_gauged(0.0, 0.3), &h, &GaugeField::zero(lat), 1.0).unwrap();
        assert_eq!(g.sigma.max_abs(), 0.0);
        assert_eq!(g.grad_sigma.max_abs(), 0.0);
        let w = recompose(&h, &c1()).unwrap();
        assert_eq!(route_a_transform(&w, &g, &c1()), w);
        let gauge = GaugeField::zero(lat);
        assert_eq!(route_b_transform(&gauge, &g, &c1()), gauge);
    }

    #[test]
    fn dg_sigma_of_exp_sine() {
        let lat = line(64);
        let g = build_generator(&Model::dg_gauged(0.1, 0.0), &exp_sin(lat), &GaugeField::zero(lat), 1.0)
            .unwrap();
        let expect = ScalarField::from_fn(lat, |x| 0.1 * x[0].sin());
        assert!(g.sigma.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn line_integration_matches_closed_form() {
        let errs: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let lat = Lattice::square(n, TAU).unwrap();
                let h = HydroFields {
                    rho: ScalarField::from_fn(lat, |x| (0.4 * x[0].sin() * x[1].cos()).exp()),
                    phase: ScalarField::zeros(lat),
                };
                let m = Model::dg_gauged(0.1, 0.0);
                let tol = calibrate_condition_tolerance(&lat, &c1()).unwrap();
                let g = build_generator(&m, &h, &GaugeField::zero(lat), tol).unwrap();
                let line = integrate_gradient(&g.grad_sigma, g.sigma.get(0));
                line.sigma.sub(&g.sigma).max_abs()
            })
            .collect();
        let dx = TAU / 64.0;
        assert!(errs[0] < 0.1 * dx * dx, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn route_a_example() {
        let lat = line(64);
        let h = exp_sin(lat);
        let w = recompose(&h, &c1()).unwrap();
        let g = build_generator(&Model::dg_gauged(0.1, 0.0), &h, &GaugeField::zero(lat), 1.0).unwrap();
        let phi = route_a_transform(&w, &g, &c1());
        for k in 0..lat.len() {
            let x = lat.coordinate(k, 0);
            let expect = Complex64::from_polar((-x.sin()).exp().sqrt(), 0.1 * x.sin());
            assert!((phi.psi.values()[k] - expect).norm() < 1e-15);
        }
        let back = decompose(&phi, 0.0, &c1()).unwrap();
        assert!(back.phase.sub(&h.phase.add(&g.sigma)).max_abs() < 1e-14);
        assert!((integrate(&phi.density()) - integrate(&w.density())).abs() < 1e-13);
    }

    #[test]
    fn route_b_chi_for_gaussian_profile() {
        // rho = exp(-x^2) truncated to [-4, 4)
        let lat = Lattice::line(512, 8.0).unwrap();
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| (-(x[0] - 4.0).powi(2)).exp()),
            phase: ScalarField::zeros(lat),
        };
        let m = Model {
            floor_rel: 0.0,
            ..Model::dg_gauged(0.1, 0.0)
        };
        let g = build_generator(&m, &h, &GaugeField::zero(lat), 1.0).unwrap();
        let chi = route_b_transform(&GaugeField::zero(lat), &g, &c1());
        let dx = lat.spacing(0);
        for k in 1..lat.len() - 1 {
            let x = lat.coordinate(k, 0) - 4.0;
            let err = chi.avec.component(0).get(k) + 0.2 * x;
            assert!(err.abs() < dx * dx * (1.0 + x.abs().powi(3)), "{k} {err}");
        }
    }

    #[test]
    fn chi0_forms_agree() {
        let lat = line(128);
        let m = Model::dg_gauged(0.1, 0.2);
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| 1.0 + 0.3 * x[0].cos()),
            phase: ScalarField::from_fn(lat, |x| 0.4 * (2.0 * x[0]).sin()),
        };
        let gauge = GaugeField::new(
            ScalarField::from_fn(lat, |x| -0.5 * x[0].sin()),
            VectorField::from_fn(lat, |x| [0.2 * x[0].cos(), 0.0]),
        )
        .unwrap();
        let g = build_generator(&m, &h, &gauge, 1.0).unwrap();
        let chi = route_b_transform(&gauge, &g, &c1());
        let alt = dg_chi0_divergence_form(&m, &h, &gauge.a0, &chi.avec).unwrap();
        assert!(alt.sub(&chi.a0).max_abs() < 1e-13);
    }

    #[test]
    fn special_point_kills_transformed_nonlinearity() {
        let lat = line(128);
        let m = Model::dg_gauged(0.1, 0.005);
        let h = exp_sin(lat);
        assert!(dg_transformed_nonlinearity(&m, &h.rho).unwrap().max_abs() < 1e-15);
        let flat = HydroFields {
            rho: ScalarField::constant(lat, 0.3),
            phase: ScalarField::from_fn(lat, |x| x[0].sin()),
        };
        let m = Model::dg_gauged(0.3, 0.7);
        assert_eq!(dg_transformed_nonlinearity(&m, &flat.rho).unwrap().max_abs(), 0.0);
    }

    fn assembled_vs_closed(n: usize) -> (f64, f64, f64) {
        let lat = Lattice::square(n, TAU).unwrap();
        let m = Model::dg_gauged(0.2, 0.1);
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| (0.3 * x[0].cos() + 0.2 * (x[0] + x[1]).sin()).exp()),
            phase: ScalarField::from_fn(lat, |x| 0.3 * x[1].sin() - 0.1 * (2.0 * x[0]).cos()),
        };
        let gauge = GaugeField::new(
            ScalarField::from_fn(lat, |x| 0.2 * x[0].sin()),
            VectorField::from_fn(lat, |x| [0.1 * x[1].cos(), -0.2 * x[0].sin()]),
        )
        .unwrap();
        let tol = calibrate_condition_tolerance(&lat, &c1()).unwrap();
        let g = build_generator(&m, &h, &gauge, tol).unwrap();
        let closed = dg_transformed_nonlinearity(&m, &h.rho).unwrap();
        let a = transformed_nonlinearity(&m, &h, &gauge, &g, Route::A).unwrap();
        let chi = route_b_transform(&gauge, &g, &c1());
        let b = transformed_nonlinearity(&m, &h, &chi, &g, Route::B).unwrap();
        (a.sub(&closed).max_abs(), b.sub(&closed).max_abs(), a.sub(&b).max_abs())
    }

    #[test]
    fn assembled_routes_converge_to_closed_form() {
        let (a1, b1, ab1) = assembled_vs_closed(32);
        let (a2, b2, ab2) = assembled_vs_closed(64);
        assert!(a1 / a2 > 3.5 && b1 / b2 > 3.5, "{a1} {a2} {b1} {b2}");
        assert!((ab1 / ab2).log2() > 1.8, "{ab1} {ab2}");
    }

    #[test]
    fn dg_condition_converges_and_counterexample_fails() {
        let res = |n: usize| {
            let lat = Lattice::square(n, TAU).unwrap();
            let h = reference_state(lat);
            check_condition(&Model::dg_gauged(0.1, 0.3), &h, &GaugeField::zero(lat), f64::INFINITY)
                .unwrap()
                .max_abs
        };
        let (r1, r2) = (res(32), res(64));
        assert!((r1 / r2).log2() > 1.8, "{r1} {r2}");

        let lat = Lattice::square(64, TAU).unwrap();
        let c = c1();
        let bad = Model::new(
            PotentialSpec::Generic(GenericDensity::catalog("rho-squared-phase-gradient", DgParams::default(), c).unwrap()),
            c,
        );
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| 1.0 + 0.3 * x[1].sin() * x[0].cos()),
            phase: ScalarField::from_fn(lat, |x| 0.2 * x[0].sin()),
        };
        let gauge = GaugeField::zero(lat);
        let tol = calibrate_condition_tolerance(&lat, &c).unwrap();
        let r = check_condition(&bad, &h, &gauge, tol).unwrap();
        assert!(!r.pass);
        let expect = ScalarField::from_vec(lat, central_diff(&lat, h.rho.values(), 1)).scaled(-1.0);
        assert!(relative_l2(&r.residual(0, 1).unwrap(), &expect) < 1e-6);
        assert_eq!(r.residual(1, 0).unwrap(), r.residual(0, 1).unwrap().scaled(-1.0));
        let err = build_generator(&bad, &h, &gauge, tol).unwrap_err();
        assert!(matches!(err, Error::ConditionViolated { .. }));
        let grad = generic_grad_sigma(&bad, &h, &gauge).unwrap();
        assert!(integrate_gradient(&grad, 0.0).path_gap > tol * TAU);
    }

    #[test]
    fn one_dimensional_condition_is_vacuous() {
        let lat = line(32);
        let r = check_condition(&Model::dg_gauged(0.1, 0.0), &exp_sin(lat), &GaugeField::zero(lat), 0.0)
            .unwrap();
        assert!(r.pass && r.pairs.is_empty());
    }

    #[test]
    fn generic_generators() {
        let lat = line(64);
        let c = c1();
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| 1.0 + 0.3 * x[0].cos()),
            phase: ScalarField::from_fn(lat, |x| 0.2 * x[0].sin()),
        };
        let gauge = GaugeField::zero(lat);
        let generic = |name| {
            Model::new(
                PotentialSpec::Generic(GenericDensity::catalog(name, DgParams { nu: 0.1, alpha: 0.2 }, c).unwrap()),
                c,
            )
        };
        let g = build_generator(&generic("rho-squared"), &h, &gauge, 1.0).unwrap();
        assert_eq!(g.sigma.max_abs(), 0.0);
        assert!(!g.phase_dependent);
        let g = build_generator(&generic("rho-phase-gradient-squared"), &h, &gauge, 1.0).unwrap();
        assert!(g.phase_dependent);
        assert_eq!(
            transformed_nonlinearity(&generic("rho-phase-gradient-squared"), &h, &gauge, &g, Route::A),
            Err(Error::InversionUnavailable)
        );

        let dg = Model::dg_gauged(0.1, 0.2);
        let replica = generic("doebner-goldin");
        let a = build_generator(&dg, &h, &gauge, 1.0).unwrap();
        let b = build_generator(&replica, &h, &gauge, 1.0).unwrap();
        assert!(!b.phase_dependent);
        let shift = a.sigma.get(0);
        let dx = lat.spacing(0);
        assert!(b.sigma.sub(&a.sigma.map(|s| s - shift)).max_abs() < dx * dx);
        // generic sigma is pinned to zero at the origin at all times
        let pinned = a.dsigma_dt.map(|d| d - a.dsigma_dt.get(0));
        let err = relative_l2(&b.dsigma_dt, &pinned);
        assert!(err < dx * dx, "{err}");
    }

    #[test]
    fn static_magnetic_invariance_is_second_order() {
        let change = |n: usize| {
            let lat = Lattice::square(n, TAU).unwrap();
            let m = Model::dg_gauged(0.1, 0.0);
            let h = HydroFields {
                rho: ScalarField::from_fn(lat, |x| (0.3 * x[0].sin() * x[1].cos()).exp()),
                phase: ScalarField::zeros(lat),
            };
            let gauge = GaugeField::zero(lat);
            let tol = calibrate_condition_tolerance(&lat, &c1()).unwrap();
            let g = build_generator(&m, &h, &gauge, tol).unwrap();
            let chi = route_b_transform(&gauge, &g, &c1());
            let b0 = field_strength(&gauge, &gauge, 0.0, &c1()).magnetic.unwrap();
            let b1 = field_strength(&chi, &chi, 0.0, &c1()).magnetic.unwrap();
            b1.sub(&b0).max_abs()
        };
        let (a, b) = (change(32), change(64));
        assert!((a / b).log2() > 1.8, "{a} {b}");
    }
}
