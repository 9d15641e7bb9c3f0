//! Named initial states and gauge fields, plus seeded random smooth states.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{recompose, GaugeField, HydroFields, WaveField};
use crate::grid::{integrate, Lattice, PhysicalConstants, ScalarField, VectorField};

/// Initial matter-field presets. Densities integrate to one over the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialPreset {
    /// `rho = 1/V`, phase zero.
    Uniform,
    /// `rho = (1 + amplitude cos(k x)) / V`, `S = phase_amplitude sin(k x)`.
    CosineDensity {
        amplitude: f64,
        wavenumber: u32,
        phase_amplitude: f64,
    },
    /// Periodic bump `exp(width^-2 (cos(x - center) - 1))` over a constant
    /// background, per axis.
    GaussianBump {
        center: f64,
        width: f64,
        background: f64,
    },
    /// Two periodic bumps at `L/4` and `3L/4` with opposite phase tilts.
    TwoBump {
        width: f64,
        background: f64,
        phase_amplitude: f64,
    },
}

impl InitialPreset {
    pub const NAMES: [(&'static str, &'static str); 4] = [
        ("uniform", "constant density, zero phase"),
        ("cosine-density", "density (1 + a cos kx)/V with phase p sin kx"),
        ("gaussian-bump", "single periodic bump over a constant background"),
        ("two-bump", "two periodic bumps with opposite phase tilts"),
    ];

    pub fn cosine_density() -> Self {
        Self::CosineDensity {
            amplitude: 0.5,
            wavenumber: 1,
            phase_amplitude: 0.2,
        }
    }

    pub fn gaussian_bump() -> Self {
        Self::GaussianBump {
            center: std::f64::consts::PI,
            width: 0.7,
            background: 0.05,
        }
    }

    pub fn two_bump() -> Self {
        Self::TwoBump {
            width: 0.6,
            background: 0.05,
            phase_amplitude: 0.3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::CosineDensity { .. } => "cosine-density",
            Self::GaussianBump { .. } => "gaussian-bump",
            Self::TwoBump { .. } => "two-bump",
        }
    }

    pub fn hydro(&self, lat: Lattice) -> HydroFields {
        let vol = lat.volume();
        let angle = |x: [f64; 2], axis: usize| TAU * x[axis] / lat.extent(axis);
        let bump = |x: [f64; 2], c: f64, w: f64| {
            (0..lat.dim())
                .map(|a| ((angle(x, a) - c).cos() - 1.0) / (w * w))
                .sum::<f64>()
                .exp()
        };
        let (rho, phase) = match *self {
            Self::Uniform => (
                ScalarField::constant(lat, 1.0 / vol),
                ScalarField::zeros(lat),
            ),
            Self::CosineDensity {
                amplitude,
                wavenumber,
                phase_amplitude,
            } => {
                let k = f64::from(wavenumber);
                (
                    ScalarField::from_fn(lat, |x| (1.0 + amplitude * (k * angle(x, 0)).cos()) / vol),
                    ScalarField::from_fn(lat, |x| phase_amplitude * (k * angle(x, 0)).sin()),
                )
            }
            Self::GaussianBump {
                center,
                width,
                background,
            } => (
                ScalarField::from_fn(lat, |x| background + bump(x, center, width)),
                ScalarField::zeros(lat),
            ),
            Self::TwoBump {
                width,
                background,
                phase_amplitude,
            } => {
                let (c1, c2) = (0.5 * std::f64::consts::PI, 1.5 * std::f64::consts::PI);
                (
                    ScalarField::from_fn(lat, |x| background + bump(x, c1, width) + bump(x, c2, width)),
                    ScalarField::from_fn(lat, |x| {
                        let t = angle(x, 0);
                        phase_amplitude * (bump(x, c1, width) - bump(x, c2, width)) * t.sin()
                    }),
                )
            }
        };
        let q = integrate(&rho);
        HydroFields {
            rho: rho.scaled(1.0 / q),
            phase,
        }
    }

    pub fn wave(&self, lat: Lattice, constants: &PhysicalConstants) -> Result<WaveField> {
        recompose(&self.hydro(lat), constants)
    }
}

impl fmt::Display for InitialPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "cosine-density" => Ok(Self::cosine_density()),
            "gaussian-bump" => Ok(Self::gaussian_bump()),
            "two-bump" => Ok(Self::two_bump()),
            other => Err(Error::Unsupported(format!("unknown initial preset `{other}`"))),
        }
    }
}

/// Prescribed external gauge-field presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaugePreset {
    Zero,
    /// `A0 = -E0 sin(k x)`, so `E_x = E0 k cos(k x)`.
    StaticSineA0 { e0: f64, wavenumber: u32 },
    /// Symmetric gauge `A = (B/2)(-y, x)` about the box centre; periodic
    /// wrap-around leaves a seam at the box edges.
    ConstantB { b0: f64 },
    /// Periodic magnetic field `B = b0 cos(k x)` from `A = (0, (b0/k) sin(k x))`.
    SineB { b0: f64, wavenumber: u32 },
}

impl GaugePreset {
    pub const NAMES: [(&'static str, &'static str); 4] = [
        ("zero", "A0 = 0, A = 0"),
        ("static-sine-a0", "electrostatic potential A0 = -E0 sin kx"),
        ("constant-b", "uniform magnetic field in symmetric gauge (2D)"),
        ("sine-b", "periodic magnetic field b0 cos kx (2D)"),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::StaticSineA0 { .. } => "static-sine-a0",
            Self::ConstantB { .. } => "constant-b",
            Self::SineB { .. } => "sine-b",
        }
    }

    pub fn field(&self, lat: Lattice) -> Result<GaugeField> {
        let kx = |w: u32| TAU * f64::from(w) / lat.extent(0);
        match *self {
            Self::Zero => Ok(GaugeField::zero(lat)),
            Self::StaticSineA0 { e0, wavenumber } => {
                let k = kx(wavenumber);
                GaugeField::new(
                    ScalarField::from_fn(lat, |x| -e0 * (k * x[0]).sin()),
                    VectorField::zeros(lat),
                )
            }
            Self::ConstantB { b0 } => {
                require_2d(lat, self.name())?;
                let (cx, cy) = (0.5 * lat.extent(0), 0.5 * lat.extent(1));
                GaugeField::new(
                    ScalarField::zeros(lat),
                    VectorField::from_fn(lat, |x| [-0.5 * b0 * (x[1] - cy), 0.5 * b0 * (x[0] - cx)]),
                )
            }
            Self::SineB { b0, wavenumber } => {
                require_2d(lat, self.name())?;
                let k = kx(wavenumber);
                GaugeField::new(
                    ScalarField::zeros(lat),
                    VectorField::from_fn(lat, |x| [0.0, b0 / k * (k * x[0]).sin()]),
                )
            }
        }
    }
}

fn require_2d(lat: Lattice, name: &str) -> Result<()> {
    if lat.dim() == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("gauge preset `{name}` needs a 2D lattice")))
    }
}

impl fmt::Display for GaugePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GaugePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "static-sine-a0" => Ok(Self::StaticSineA0 {
                e0: 0.5,
                wavenumber: 1,
            }),
            "constant-b" => Ok(Self::ConstantB { b0: 0.5 }),
            "sine-b" => Ok(Self::SineB {
                b0: 0.5,
                wavenumber: 1,
            }),
            other => Err(Error::Unsupported(format!("unknown gauge preset `{other}`"))),
        }
    }
}

/// Finite Fourier sum `sum_k a_k cos(k . theta + p_k)` with `theta` the
/// box-angle coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierModes {
    lat: Lattice,
    modes: Vec<([i32; 2], f64, f64)>,
}

impl FourierModes {
    /// Random modes with `|k_i| <= kmax`, amplitudes uniform in
    /// `[-amplitude, amplitude] / |k|^2`.
    pub fn random(lat: Lattice, rng: &mut impl Rng, kmax: i32, amplitude: f64) -> Self {
        let mut modes = Vec::new();
        let ky = if lat.dim() == 2 { kmax } else { 0 };
        for k0 in -kmax..=kmax {
            for k1 in -ky..=ky {
                if (k0, k1) <= (0, 0) {
                    continue;
                }
                let k2 = f64::from(k0 * k0 + k1 * k1);
                let a = rng.gen_range(-amplitude..=amplitude) / k2;
                let p = rng.gen_range(0.0..TAU);
                modes.push(([k0, k1], a, p));
            }
        }
        Self { lat, modes }
    }

    fn wave(&self, k: [i32; 2]) -> [f64; 2] {
        let mut w = [0.0; 2];
        for a in 0..self.lat.dim() {
            w[a] = TAU * f64::from(k[a]) / self.lat.extent(a);
        }
        w
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.modes
            .iter()
            .map(|&(k, a, p)| {
                let w = self.wave(k);
                a * (w[0] * x[0] + w[1] * x[1] + p).cos()
            })
            .sum()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(k, a, p) in &self.modes {
            let w = self.wave(k);
            let s = -a * (w[0] * x[0] + w[1] * x[1] + p).sin();
            g[0] += s * w[0];
            g[1] += s * w[1];
        }
        g
    }

    pub fn laplacian(&self, x: [f64; 2]) -> f64 {
        self.modes
            .iter()
            .map(|&(k, a, p)| {
                let w = self.wave(k);
                -a * (w[0] * w[0] + w[1] * w[1]) * (w[0] * x[0] + w[1] * x[1] + p).cos()
            })
            .sum()
    }

    pub fn field(&self) -> ScalarField {
        ScalarField::from_fn(self.lat, |x| self.value(x))
    }
}

/// Random smooth state: `rho = exp(f)`, `S = g` with `f`, `g` low-mode
/// Fourier sums. Keeps the modes for analytic oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothState {
    pub log_rho: FourierModes,
    pub phase: FourierModes,
    pub hydro: HydroFields,
}

impl SmoothState {
    pub fn random(lat: Lattice, rng: &mut impl Rng) -> Self {
        let log_rho = FourierModes::random(lat, rng, 3, 0.6);
        let phase = FourierModes::random(lat, rng, 3, 0.8);
        let hydro = HydroFields {
            rho: log_rho.field().map(f64::exp),
            phase: phase.field(),
        };
        Self {
            log_rho,
            phase,
            hydro,
        }
    }
}

/// Random smooth periodic gauge field.
pub fn random_gauge(lat: Lattice, rng: &mut impl Rng, amplitude: f64) -> GaugeField {
    let a0 = FourierModes::random(lat, rng, 2, amplitude).field();
    let comps = (0..lat.dim())
        .map(|_| FourierModes::random(lat, rng, 2, amplitude).field())
        .collect();
    GaugeField::new(a0, VectorField::new(comps).expect("components share the lattice"))
        .expect("fields share the lattice")
}
