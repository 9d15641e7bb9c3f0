//! Nonlinear potentials `U([rho], [S], A)`, their functional derivatives,
//! the split of the nonlinearity into `W + i W_imag`, and the currents.
//!
//! Functional derivatives come in two tracks. Doebner-Goldin potentials have
//! closed forms (see [`dg`]); every potential, DG included, can also be
//! differentiated by the numeric engine, which is the oracle for the closed
//! forms.

pub mod density;
pub(crate) mod dg;
mod engine;

use std::fmt;
use std::str::FromStr;

pub use density::{Dependencies, GenericDensity, SiteArgs, CATALOG};
pub use dg::transformed_coefficient;

use crate::error::{Error, Result};
use crate::fields::{check_floor, recompose, relative_floor, GaugeField, HydroFields, DEFAULT_FLOOR_REL};
use crate::grid::{
    central_diff, divergence, gradient, integrate, PhysicalConstants, ScalarField, VectorField,
};

/// Doebner-Goldin parameters: diffusion coefficient `nu` and the
/// dimensionless coupling `alpha`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DgParams {
    pub nu: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug)]
pub enum PotentialSpec {
    /// DG density with `A` dropped from `U`.
    DgUngauged(DgParams),
    /// Gauged DG density.
    DgGauged(DgParams),
    Generic(GenericDensity),
}

impl PotentialSpec {
    pub fn dg_params(&self) -> Option<DgParams> {
        match self {
            Self::DgUngauged(p) | Self::DgGauged(p) => Some(*p),
            Self::Generic(_) => None,
        }
    }

    pub fn dependencies(&self) -> Dependencies {
        match self {
            Self::DgUngauged(_) => Dependencies {
                phase: false,
                a: false,
                da: false,
                ..Dependencies::ALL
            },
            Self::DgGauged(_) => Dependencies {
                phase: false,
                ..Dependencies::ALL
            },
            Self::Generic(g) => g.dependencies(),
        }
    }

    /// Site density `U(args)`.
    pub fn density(&self, constants: &PhysicalConstants, args: &SiteArgs) -> f64 {
        match self {
            Self::DgUngauged(p) => density::dg_density(*p, false, constants, args),
            Self::DgGauged(p) => density::dg_density(*p, true, constants, args),
            Self::Generic(g) => g.eval(args),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::DgUngauged(p) => format!("dg-ungauged(nu={}, alpha={})", p.nu, p.alpha),
            Self::DgGauged(p) => format!("dg-gauged(nu={}, alpha={})", p.nu, p.alpha),
            Self::Generic(g) => format!("generic({})", g.name()),
        }
    }
}

/// Argument of `U` a functional derivative is taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Density,
    Phase,
    /// `d_i S`
    PhaseGradient(usize),
    /// `d_i rho`
    DensityGradient(usize),
}

impl Slot {
    fn axis(self) -> Option<usize> {
        match self {
            Self::PhaseGradient(i) | Self::DensityGradient(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Density => write!(f, "rho"),
            Self::Phase => write!(f, "S"),
            Self::PhaseGradient(i) => write!(f, "dS_{i}"),
            Self::DensityGradient(i) => write!(f, "drho_{i}"),
        }
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axis = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::UnknownSlot(s.to_string()))
        };
        match s {
            "rho" => Ok(Self::Density),
            "S" => Ok(Self::Phase),
            _ => {
                if let Some(rest) = s.strip_prefix("dS_") {
                    Ok(Self::PhaseGradient(axis(rest)?))
                } else if let Some(rest) = s.strip_prefix("drho_") {
                    Ok(Self::DensityGradient(axis(rest)?))
                } else {
                    Err(Error::UnknownSlot(s.to_string()))
                }
            }
        }
    }
}

/// Step control for the numeric engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdOptions {
    /// Step relative to the largest magnitude of the perturbed array.
    pub h_rel: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h_rel: 1e-5 }
    }
}

/// Real and imaginary parts of the nonlinearity.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearitySplit {
    pub w_real: ScalarField,
    pub w_imag: ScalarField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurrentSet {
    /// `(e/mc) rho (grad S - A) + (c/e) dA/d(grad S)`
    pub j_full: VectorField,
    /// `(e/mc) rho (grad S - A)` with the phase and gauge field supplied.
    pub j_bilinear: VectorField,
    /// Gauged quantum-mechanical current built from `psi`.
    pub j_qm: VectorField,
}

/// A potential together with the constants and numeric settings it is used with.
#[derive(Clone, Debug)]
pub struct Model {
    pub potential: PotentialSpec,
    pub constants: PhysicalConstants,
    /// Density floor relative to `max(rho)`.
    pub floor_rel: f64,
    pub fd: FdOptions,
}

impl Model {
    pub fn new(potential: PotentialSpec, constants: PhysicalConstants) -> Self {
        Self {
            potential,
            constants,
            floor_rel: DEFAULT_FLOOR_REL,
            fd: FdOptions::default(),
        }
    }

    pub fn dg_gauged(nu: f64, alpha: f64) -> Self {
        Self::new(
            PotentialSpec::DgGauged(DgParams { nu, alpha }),
            PhysicalConstants::natural(),
        )
    }

    pub(crate) fn check_floor(&self, rho: &ScalarField) -> Result<()> {
        check_floor(rho, relative_floor(rho, self.floor_rel))
    }

    fn check_slot(&self, slot: Slot, hydro: &HydroFields) -> Result<()> {
        match slot.axis() {
            Some(i) if i >= hydro.lattice().dim() => Err(Error::UnknownSlot(format!(
                "{slot} on a {}-dimensional lattice",
                hydro.lattice().dim()
            ))),
            _ => Ok(()),
        }
    }

    /// `grad S - A`; the ungauged DG density ignores `A`.
    fn velocity_for_density(&self, hydro: &HydroFields, gauge: &GaugeField) -> VectorField {
        let grad = gradient(&hydro.phase);
        match self.potential {
            PotentialSpec::DgUngauged(_) => grad,
            _ => grad.sub(&gauge.avec),
        }
    }

    /// Closed form for DG kinds, numeric engine otherwise.
    pub fn functional_derivative(
        &self,
        slot: Slot,
        hydro: &HydroFields,
        gauge: &GaugeField,
    ) -> Result<ScalarField> {
        self.check_slot(slot, hydro)?;
        self.check_floor(&hydro.rho)?;
        let Some(p) = self.potential.dg_params() else {
            return Ok(self.numeric_unchecked(slot, hydro, gauge, self.fd));
        };
        let k = dg::DgCoefficients::new(p, &self.constants);
        let rho = &hydro.rho;
        Ok(match slot {
            Slot::Density => dg::real_part(&k, rho, &self.velocity_for_density(hydro, gauge)),
            Slot::Phase => dg::phase_slot(&k, rho),
            Slot::PhaseGradient(i) => dg::phase_gradient_slot(&k, rho, i),
            Slot::DensityGradient(i) => {
                dg::density_gradient_slot(&k, rho, &self.velocity_for_density(hydro, gauge), i)
            }
        })
    }

    /// Numeric Euler-Lagrange derivative for any potential.
    pub fn numeric_functional_derivative(
        &self,
        slot: Slot,
        hydro: &HydroFields,
        gauge: &GaugeField,
        fd: FdOptions,
    ) -> Result<ScalarField> {
        self.check_slot(slot, hydro)?;
        self.check_floor(&hydro.rho)?;
        Ok(self.numeric_unchecked(slot, hydro, gauge, fd))
    }

    fn numeric_unchecked(
        &self,
        slot: Slot,
        hydro: &HydroFields,
        gauge: &GaugeField,
        fd: FdOptions,
    ) -> ScalarField {
        let c = self.constants;
        let p = &self.potential;
        engine::numeric_derivative(
            &|a: &SiteArgs| p.density(&c, a),
            p.dependencies(),
            slot,
            hydro,
            gauge,
            fd.h_rel,
        )
    }

    /// `W = dA/d rho` and `W_imag = (hbar c / 2 e rho) dA/dS`.
    pub fn nonlinearity_split(
        &self,
        hydro: &HydroFields,
        gauge: &GaugeField,
    ) -> Result<NonlinearitySplit> {
        let w_real = self.functional_derivative(Slot::Density, hydro, gauge)?;
        let w_imag = match self.potential.dg_params() {
            Some(p) => dg::imaginary_part(p, &self.constants, &hydro.rho),
            None => {
                let c = &self.constants;
                let f = c.hbar * c.light_c / (2.0 * c.charge_e);
                self.functional_derivative(Slot::Phase, hydro, gauge)?
                    .zip_map(&hydro.rho, |d, r| f * d / r)
            }
        };
        Ok(NonlinearitySplit { w_real, w_imag })
    }

    /// `(e/mc) rho (grad S - A)`.
    pub fn bilinear_current(&self, hydro: &HydroFields, gauge: &GaugeField) -> VectorField {
        let c = &self.constants;
        gradient(&hydro.phase)
            .sub(&gauge.avec)
            .times(&hydro.rho)
            .scaled(c.charge_e / (c.mass * c.light_c))
    }

    pub fn currents(&self, hydro: &HydroFields, gauge: &GaugeField) -> Result<CurrentSet> {
        self.check_floor(&hydro.rho)?;
        let c = &self.constants;
        let lat = *hydro.lattice();
        let j_bilinear = self.bilinear_current(hydro, gauge);
        let mut full = Vec::with_capacity(lat.dim());
        for i in 0..lat.dim() {
            let d = self.functional_derivative(Slot::PhaseGradient(i), hydro, gauge)?;
            full.push(j_bilinear.component(i).add(&d.scaled(c.light_c / c.charge_e)));
        }
        let psi = recompose(hydro, c)?.psi;
        let hm = c.hbar / c.mass;
        let em = c.charge_e / (c.mass * c.light_c);
        let j_qm = (0..lat.dim())
            .map(|i| {
                let d = central_diff(&lat, psi.values(), i);
                let vals = psi
                    .values()
                    .iter()
                    .zip(&d)
                    .zip(gauge.avec.component(i).values())
                    .map(|((p, dp), a)| hm * (p.conj() * dp).im - em * a * p.norm_sqr())
                    .collect();
                ScalarField::from_vec(lat, vals)
            })
            .collect();
        Ok(CurrentSet {
            j_full: VectorField::from_components(full),
            j_bilinear,
            j_qm: VectorField::from_components(j_qm),
        })
    }

    /// `d rho / dt = -div j_full + source` on the current state.
    pub fn density_rate(&self, hydro: &HydroFields, gauge: &GaugeField) -> Result<ScalarField> {
        let j = self.currents(hydro, gauge)?;
        Ok(self
            .continuity_source(hydro, gauge)
            .sub(&divergence(&j.j_full)))
    }

    /// `(c/e) dU/dS` with every derivative argument held fixed: the source on
    /// the right of the continuity equation.
    pub fn continuity_source(&self, hydro: &HydroFields, gauge: &GaugeField) -> ScalarField {
        if !self.potential.dependencies().phase {
            return ScalarField::zeros(*hydro.lattice());
        }
        let c = self.constants;
        let p = &self.potential;
        engine::bare_phase_partial(&|a: &SiteArgs| p.density(&c, a), hydro, gauge, self.fd.h_rel)
            .scaled(c.light_c / c.charge_e)
    }
}

/// `Q = e * integral(rho)`.
pub fn total_charge(hydro: &HydroFields, constants: &PhysicalConstants) -> f64 {
    constants.charge_e * integrate(&hydro.rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{relative_l2, Lattice};
    use std::f64::consts::TAU;

    fn line(n: usize) -> Lattice {
        Lattice::line(n, TAU).unwrap()
    }

    fn state(lat: Lattice, rho: impl Fn(f64) -> f64, s: impl Fn(f64) -> f64) -> HydroFields {
        HydroFields {
            rho: ScalarField::from_fn(lat, |x| rho(x[0])),
            phase: ScalarField::from_fn(lat, |x| s(x[0])),
        }
    }

    #[test]
    fn slot_parsing() {
        assert_eq!("rho".parse::<Slot>().unwrap(), Slot::Density);
        assert_eq!("dS_1".parse::<Slot>().unwrap(), Slot::PhaseGradient(1));
        assert_eq!("drho_0".parse::<Slot>().unwrap(), Slot::DensityGradient(0));
        assert!(matches!("phi".parse::<Slot>(), Err(Error::UnknownSlot(_))));
        let lat = line(16);
        let h = state(lat, |_| 1.0, |_| 0.0);
        let m = Model::dg_gauged(0.1, 0.0);
        assert!(matches!(
            m.functional_derivative(Slot::PhaseGradient(1), &h, &GaugeField::zero(lat)),
            Err(Error::UnknownSlot(_))
        ));
    }

    #[test]
    fn uniform_density_kills_gradient_slot() {
        let lat = line(32);
        let h = state(lat, |_| 0.7, |x| x.sin());
        let d = Model::dg_gauged(0.3, 0.1)
            .functional_derivative(Slot::PhaseGradient(0), &h, &GaugeField::zero(lat))
            .unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn ungauged_real_part_matches_continuum_bracket() {
        let lat = line(256);
        let dx = lat.spacing(0);
        let alpha = 0.2;
        let m = Model::new(
            PotentialSpec::DgUngauged(DgParams { nu: 0.1, alpha }),
            PhysicalConstants::natural(),
        );
        let h = state(lat, |x| 1.0 + 0.5 * x.cos(), |_| 0.0);
        let w = m.functional_derivative(Slot::Density, &h, &GaugeField::zero(lat)).unwrap();
        let expect = ScalarField::from_fn(lat, |x| {
            let r = 1.0 + 0.5 * x[0].cos();
            let dr = -0.5 * x[0].sin();
            let ddr = -0.5 * x[0].cos();
            -2.0 * alpha * (ddr / r - 0.5 * (dr / r).powi(2))
        });
        assert!(w.sub(&expect).max_abs() < 2.0 * dx * dx);
    }

    #[test]
    fn generic_rho_squared() {
        let lat = line(32);
        let m = Model::new(
            PotentialSpec::Generic(
                GenericDensity::catalog("rho-squared", DgParams::default(), PhysicalConstants::natural())
                    .unwrap(),
            ),
            PhysicalConstants::natural(),
        );
        let h = state(lat, |x| 1.0 + 0.4 * x.sin(), |_| 0.0);
        let d = m.functional_derivative(Slot::Density, &h, &GaugeField::zero(lat)).unwrap();
        assert!(d.sub(&h.rho.scaled(2.0)).max_abs() < 1e-9);
    }

    #[test]
    fn imaginary_part_at_origin() {
        // 0.05 * (-0.5/1.5) = -1/60 up to the O(dx^2) stencil error
        let lat = line(256);
        let m = Model::dg_gauged(0.1, 0.0);
        let h = state(lat, |x| 1.0 + 0.5 * x.cos(), |_| 0.0);
        let split = m.nonlinearity_split(&h, &GaugeField::zero(lat)).unwrap();
        let w0 = split.w_imag.get(0);
        assert!((w0 + 1.0 / 60.0).abs() / (1.0 / 60.0) < 1e-3, "{w0}");
        assert!(split.w_real.max_abs() < 1e-12);
    }

    #[test]
    fn uniform_state_has_no_nonlinearity() {
        let lat = line(32);
        let h = state(lat, |_| 2.0, |_| 0.4);
        let s = Model::dg_gauged(0.2, 0.3)
            .nonlinearity_split(&h, &GaugeField::zero(lat))
            .unwrap();
        assert!(s.w_real.max_abs() < 1e-14 && s.w_imag.max_abs() < 1e-14);
    }

    #[test]
    fn diffusive_current_of_exp_sine() {
        let lat = line(256);
        let dx = lat.spacing(0);
        let nu = 0.1;
        let h = state(lat, |x| (-x.sin()).exp(), |_| 0.0);
        let j = Model::dg_gauged(nu, 0.0)
            .currents(&h, &GaugeField::zero(lat))
            .unwrap();
        let expect = ScalarField::from_fn(lat, |x| nu * x[0].cos() * (-x[0].sin()).exp());
        assert!(j.j_full.component(0).sub(&expect).max_abs() < dx * dx);
        assert_eq!(j.j_bilinear.max_abs(), 0.0);
    }

    #[test]
    fn currents_collapse_without_diffusion() {
        let lat = line(128);
        let dx = lat.spacing(0);
        let h = state(lat, |x| 1.0 + 0.3 * x.cos(), |x| 0.4 * x.sin());
        let g = GaugeField::new(
            ScalarField::zeros(lat),
            VectorField::from_fn(lat, |x| [0.2 * (2.0 * x[0]).cos(), 0.0]),
        )
        .unwrap();
        let j = Model::dg_gauged(0.0, 0.3).currents(&h, &g).unwrap();
        assert!(j.j_full.sub(&j.j_bilinear).max_abs() < 1e-15);
        assert!(j.j_qm.sub(&j.j_bilinear).max_abs() < dx * dx);
    }

    #[test]
    fn qm_current_of_sine_phase() {
        let lat = line(256);
        let dx = lat.spacing(0);
        let h = state(lat, |_| 1.0, |x| x.sin());
        let j = Model::dg_gauged(0.0, 0.0)
            .currents(&h, &GaugeField::zero(lat))
            .unwrap();
        let expect = ScalarField::from_fn(lat, |x| x[0].cos());
        assert!(j.j_qm.component(0).sub(&expect).max_abs() < dx * dx);
    }

    #[test]
    fn total_charge_examples() {
        let lat = line(64);
        let c = PhysicalConstants::natural();
        let h = state(lat, |_| 1.0, |_| 0.0);
        assert!((total_charge(&h, &c) - TAU).abs() < 1e-13);
        let h = state(lat, |x| (1.0 + 0.3 * x.sin()) / TAU, |_| 0.0);
        assert!((total_charge(&h, &c) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bump_charge_is_refinement_stable() {
        let q = |n| {
            let lat = line(n);
            let h = state(lat, |x| (3.0 * (x - 3.0).cos()).exp(), |_| 0.0);
            total_charge(&h, &PhysicalConstants::natural())
        };
        let (a, b) = (q(64), q(128));
        assert!((a - b).abs() / b <= 1e-10);
    }

    #[test]
    fn continuity_source_examples() {
        let lat = line(32);
        let c = PhysicalConstants::natural();
        let h = state(lat, |x| 1.0 + 0.2 * x.cos(), |x| 0.3 * x.sin() + 0.1);
        let g = GaugeField::zero(lat);
        assert_eq!(Model::dg_gauged(0.1, 0.2).continuity_source(&h, &g).max_abs(), 0.0);
        let rs = Model::new(
            PotentialSpec::Generic(
                GenericDensity::catalog("rho-times-phase", DgParams::default(), c).unwrap(),
            ),
            c,
        );
        assert!(rs.continuity_source(&h, &g).sub(&h.rho).max_abs() < 1e-9);
        let rg = Model::new(
            PotentialSpec::Generic(
                GenericDensity::catalog("rho-phase-gradient-squared", DgParams::default(), c)
                    .unwrap(),
            ),
            c,
        );
        assert_eq!(rg.continuity_source(&h, &g).max_abs(), 0.0);
    }

    #[test]
    fn generic_replica_matches_closed_form() {
        let lat = Lattice::square(16, TAU).unwrap();
        let c = PhysicalConstants::natural();
        let p = DgParams { nu: 0.2, alpha: 0.05 };
        let h = HydroFields {
            rho: ScalarField::from_fn(lat, |x| (0.3 * x[0].cos() + 0.2 * (x[1] + x[0]).sin()).exp()),
            phase: ScalarField::from_fn(lat, |x| 0.5 * x[1].sin() - 0.2 * x[0].cos()),
        };
        let g = GaugeField::new(
            ScalarField::zeros(lat),
            VectorField::from_fn(lat, |x| [0.1 * x[1].cos(), -0.3 * x[0].sin()]),
        )
        .unwrap();
        let dg = Model::new(PotentialSpec::DgGauged(p), c);
        let replica = Model::new(
            PotentialSpec::Generic(GenericDensity::catalog("doebner-goldin", p, c).unwrap()),
            c,
        );
        let a = dg.nonlinearity_split(&h, &g).unwrap();
        let b = replica.nonlinearity_split(&h, &g).unwrap();
        assert!(relative_l2(&b.w_real, &a.w_real) < 1e-7);
        assert!(relative_l2(&b.w_imag, &a.w_imag) < 1e-7);
        for slot in [Slot::PhaseGradient(1), Slot::DensityGradient(0)] {
            let x = dg.functional_derivative(slot, &h, &g).unwrap();
            let y = replica.functional_derivative(slot, &h, &g).unwrap();
            assert!(relative_l2(&y, &x) < 1e-7, "{slot}");
        }
    }
}
