//! Pointwise potential densities `U(rho, d rho, S, dS, ddS, A, dA)` and the
//! generic-density catalog.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DgParams;
use crate::error::{Error, Result};
use crate::grid::PhysicalConstants;

/// Arguments of a potential density at one lattice site.
///
/// Arrays are padded to two axes; entries beyond the lattice dimension are zero.
/// `ddphase[i][j]` is `d_j (d_i S)` and `da[i][j]` is `d_j A^i`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SiteArgs {
    pub dim: usize,
    pub rho: f64,
    pub drho: [f64; 2],
    pub phase: f64,
    pub dphase: [f64; 2],
    pub ddphase: [[f64; 2]; 2],
    pub a: [f64; 2],
    pub da: [[f64; 2]; 2],
}

/// Which [`SiteArgs`] entries a density reads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dependencies {
    pub rho: bool,
    pub drho: bool,
    pub phase: bool,
    pub dphase: bool,
    pub ddphase: bool,
    pub a: bool,
    pub da: bool,
}

impl Dependencies {
    pub const ALL: Self = Self {
        rho: true,
        drho: true,
        phase: true,
        dphase: true,
        ddphase: true,
        a: true,
        da: true,
    };
}

type DensityFn = dyn Fn(&SiteArgs) -> f64 + Send + Sync;

/// A user-supplied lattice density with its declared dependency signature.
#[derive(Clone)]
pub struct GenericDensity {
    name: String,
    deps: Dependencies,
    eval: Arc<DensityFn>,
}

impl fmt::Debug for GenericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericDensity")
            .field("name", &self.name)
            .field("deps", &self.deps)
            .finish_non_exhaustive()
    }
}

impl GenericDensity {
    /// Wraps `eval` and runs the dependency self-test: perturbing any slot the
    /// signature leaves out must not change the density.
    pub fn new(
        name: impl Into<String>,
        deps: Dependencies,
        eval: impl Fn(&SiteArgs) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let density = Self {
            name: name.into(),
            deps,
            eval: Arc::new(eval),
        };
        density.self_test()?;
        Ok(density)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dependencies(&self) -> Dependencies {
        self.deps
    }

    #[inline]
    pub fn eval(&self, args: &SiteArgs) -> f64 {
        (self.eval)(args)
    }

    fn self_test(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for dim in [1usize, 2] {
            for _ in 0..16 {
                let base = random_args(&mut rng, dim);
                let u0 = self.eval(&base);
                let tol = 1e-12 * (1.0 + u0.abs());
                let probes: [(&'static str, bool); 7] = [
                    ("rho", self.deps.rho),
                    ("drho", self.deps.drho),
                    ("phase", self.deps.phase),
                    ("dphase", self.deps.dphase),
                    ("ddphase", self.deps.ddphase),
                    ("a", self.deps.a),
                    ("da", self.deps.da),
                ];
                for (slot, declared) in probes {
                    if declared {
                        continue;
                    }
                    let mut p = base;
                    let d = rng.gen_range(0.3..1.0);
                    match slot {
                        "rho" => p.rho += d,
                        "drho" => p.drho.iter_mut().take(dim).for_each(|v| *v += d),
                        "phase" => p.phase += d,
                        "dphase" => p.dphase.iter_mut().take(dim).for_each(|v| *v += d),
                        "ddphase" => p.ddphase.iter_mut().take(dim).for_each(|r| {
                            r.iter_mut().take(dim).for_each(|v| *v += d)
                        }),
                        "a" => p.a.iter_mut().take(dim).for_each(|v| *v += d),
                        _ => p.da.iter_mut().take(dim).for_each(|r| {
                            r.iter_mut().take(dim).for_each(|v| *v += d)
                        }),
                    }
                    let u1 = self.eval(&p);
                    if !u1.is_finite() || (u1 - u0).abs() > tol {
                        return Err(Error::UndeclaredDependency {
                            name: self.name.clone(),
                            slot,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Looks up a named density: `rho-squared`, `rho-times-phase`,
    /// `rho-phase-gradient-squared`, `rho-squared-phase-gradient` or
    /// `doebner-goldin` (the gauged DG density, built from `params`).
    pub fn catalog(name: &str, params: DgParams, constants: PhysicalConstants) -> Result<Self> {
        let only = |f: fn(&mut Dependencies)| {
            let mut d = Dependencies::default();
            f(&mut d);
            d
        };
        match name {
            "rho-squared" => Self::new(name, only(|d| d.rho = true), |a| a.rho * a.rho),
            "rho-times-phase" => Self::new(
                name,
                only(|d| {
                    d.rho = true;
                    d.phase = true
                }),
                |a| a.rho * a.phase,
            ),
            "rho-phase-gradient-squared" => Self::new(
                name,
                only(|d| {
                    d.rho = true;
                    d.dphase = true
                }),
                |a| a.rho * a.dphase[0] * a.dphase[0],
            ),
            "rho-squared-phase-gradient" => Self::new(
                name,
                only(|d| {
                    d.rho = true;
                    d.dphase = true
                }),
                |a| a.rho * a.rho * a.dphase[0],
            ),
            "doebner-goldin" => Self::new(
                name,
                Dependencies {
                    phase: false,
                    ..Dependencies::ALL
                },
                move |a| dg_density(params, true, &constants, a),
            ),
            other => Err(Error::Unsupported(format!(
                "unknown generic density `{other}` (known: {})",
                CATALOG.join(", ")
            ))),
        }
    }
}

/// Names accepted by [`GenericDensity::catalog`].
pub const CATALOG: [&str; 5] = [
    "rho-squared",
    "rho-times-phase",
    "rho-phase-gradient-squared",
    "rho-squared-phase-gradient",
    "doebner-goldin",
];

fn random_args(rng: &mut ChaCha8Rng, dim: usize) -> SiteArgs {
    let mut r = || rng.gen_range(-1.0f64..1.0);
    let mut a = SiteArgs {
        dim,
        rho: 0.5,
        ..SiteArgs::default()
    };
    a.rho += r().abs();
    a.phase = r();
    for i in 0..dim {
        a.drho[i] = r();
        a.dphase[i] = r();
        a.a[i] = r();
        for j in 0..dim {
            a.ddphase[i][j] = r();
            a.da[i][j] = r();
        }
    }
    // mixed partials commute
    a.ddphase[1][0] = a.ddphase[0][1];
    a
}

/// Doebner-Goldin density
/// `(nu e / 2c) [rho div(grad S - A) - grad rho . (grad S - A)] + alpha hbar^2/m |grad rho|^2 / rho`.
/// The ungauged variant drops `A`.
pub(crate) fn dg_density(p: DgParams, gauged: bool, c: &PhysicalConstants, a: &SiteArgs) -> f64 {
    let kappa = p.nu * c.charge_e / (2.0 * c.light_c);
    let beta = p.alpha * c.hbar * c.hbar / c.mass;
    let g = if gauged { 1.0 } else { 0.0 };
    let mut div_v = 0.0;
    let mut drho_dot_v = 0.0;
    let mut drho_sq = 0.0;
    for i in 0..a.dim {
        div_v += a.ddphase[i][i] - g * a.da[i][i];
        drho_dot_v += a.drho[i] * (a.dphase[i] - g * a.a[i]);
        drho_sq += a.drho[i] * a.drho[i];
    }
    kappa * (a.rho * div_v - drho_dot_v) + beta * drho_sq / a.rho
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_pass_self_test() {
        for name in CATALOG {
            GenericDensity::catalog(name, DgParams { nu: 0.1, alpha: 0.2 }, PhysicalConstants::natural())
                .unwrap();
        }
        assert!(GenericDensity::catalog("nope", DgParams::default(), PhysicalConstants::natural()).is_err());
    }

    #[test]
    fn undeclared_sensitivity_is_rejected() {
        let err = GenericDensity::new(
            "sneaky",
            Dependencies {
                rho: true,
                ..Dependencies::default()
            },
            |a| a.rho + a.phase,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::UndeclaredDependency {
                name: "sneaky".into(),
                slot: "phase"
            }
        );
    }

    #[test]
    fn dg_density_ignores_gauge_when_ungauged() {
        let p = DgParams { nu: 0.3, alpha: 0.1 };
        let c = PhysicalConstants::natural();
        let mut a = SiteArgs {
            dim: 1,
            rho: 2.0,
            drho: [0.5, 0.0],
            dphase: [0.2, 0.0],
            ddphase: [[0.1, 0.0], [0.0, 0.0]],
            ..SiteArgs::default()
        };
        let u0 = dg_density(p, false, &c, &a);
        a.a = [3.0, 0.0];
        a.da = [[1.0, 0.0], [0.0, 0.0]];
        assert_eq!(u0, dg_density(p, false, &c, &a));
        // 0.15*(2*(0.1-1) - 0.5*(0.2-3)) + 0.1*0.25/2
        let expect = 0.15 * (2.0 * (0.1 - 1.0) - 0.5 * (0.2 - 3.0)) + 0.1 * 0.25 / 2.0;
        assert!((dg_density(p, true, &c, &a) - expect).abs() < 1e-15);
    }
}
