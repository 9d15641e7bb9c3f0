//! Matter field, hydrodynamic decomposition and the gauge field.
//!
//! The phase `S` is measured in units where `psi = sqrt(rho) exp(i e S / (hbar c))`.
//! Index conventions: the metric is `diag(1, -1, ..., -1)`, `A_mu = (A0, -A)`
//! with `A` the spatial vector potential stored in [`GaugeField::avec`].

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{partial, ComplexField, Lattice, PhysicalConstants, ScalarField, VectorField};

/// Default density floor relative to `max(rho)`.
pub const DEFAULT_FLOOR_REL: f64 = 1e-12;

/// Matter field `psi` (or its transformed counterpart `phi`).
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub psi: ComplexField,
}

impl WaveField {
    pub fn new(psi: ComplexField) -> Self {
        Self { psi }
    }

    pub fn lattice(&self) -> &Lattice {
        self.psi.lattice()
    }

    pub fn density(&self) -> ScalarField {
        self.psi.norm_sqr()
    }

    /// Multiplies by `exp(i theta)` everywhere.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let f = Complex64::from_polar(1.0, theta);
        Self::new(self.psi.map(|v| v * f))
    }
}

/// Density and phase of a matter field.
#[derive(Clone, Debug, PartialEq)]
pub struct HydroFields {
    pub rho: ScalarField,
    pub phase: ScalarField,
}

impl HydroFields {
    pub fn lattice(&self) -> &Lattice {
        self.rho.lattice()
    }
}

/// Scalar potential `A0` and vector potential `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    pub a0: ScalarField,
    pub avec: VectorField,
}

impl GaugeField {
    pub fn zero(lattice: Lattice) -> Self {
        Self {
            a0: ScalarField::zeros(lattice),
            avec: VectorField::zeros(lattice),
        }
    }

    pub fn new(a0: ScalarField, avec: VectorField) -> Result<Self> {
        if a0.lattice() != avec.lattice() {
            return Err(Error::LatticeMismatch);
        }
        Ok(Self { a0, avec })
    }

    pub fn lattice(&self) -> &Lattice {
        self.a0.lattice()
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.avec.is_finite()
    }
}

/// Independent components of `F_{mu nu}`.
///
/// `electric[i] = F_{0i} = -d_i A0 - (1/c) d_t A^i`. `magnetic` holds the
/// curl `d_x A^y - d_y A^x`, which is `F^{12} = -F_{12}` in lower-index form.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldStrength {
    pub electric: VectorField,
    pub magnetic: Option<ScalarField>,
}

impl FieldStrength {
    /// Full antisymmetric tensor `F_{mu nu}` (lower indices) at one site.
    pub fn tensor(&self, index: usize) -> [[f64; 3]; 3] {
        let mut f = [[0.0; 3]; 3];
        let e = self.electric.at(index);
        for i in 0..self.electric.lattice().dim() {
            f[0][i + 1] = e[i];
            f[i + 1][0] = -e[i];
        }
        if let Some(b) = &self.magnetic {
            f[1][2] = -b.get(index);
            f[2][1] = b.get(index);
        }
        f
    }
}

/// Returns `floor_rel * max(rho)`.
pub fn relative_floor(rho: &ScalarField, floor_rel: f64) -> f64 {
    floor_rel * rho.max().max(0.0)
}

/// Fails on the first site with `rho < floor`.
pub fn check_floor(rho: &ScalarField, floor: f64) -> Result<()> {
    match rho.values().iter().position(|&v| !(v >= floor)) {
        Some(site) => Err(Error::DensityBelowFloor {
            site,
            value: rho.get(site),
            floor,
        }),
        None => Ok(()),
    }
}

#[inline]
fn wrap_angle(d: f64) -> f64 {
    let w = d - TAU * (d / TAU).round();
    // map the boundary case onto (-pi, pi]
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn winding_of(increments: f64) -> i64 {
    (increments / TAU).round() as i64
}

/// Splits `psi` into density and an unwrapped phase.
///
/// The phase is integrated from site 0 along axis 0 on the line `i1 = 0`, then
/// along axis 1 for every `i0`. Every elementary plaquette and every
/// non-contractible lattice cycle must carry zero winding.
pub fn decompose(w: &WaveField, floor: f64, constants: &PhysicalConstants) -> Result<HydroFields> {
    let lat = *w.lattice();
    let rho = w.density();
    check_floor(&rho, floor)?;

    let arg: Vec<f64> = w.psi.values().iter().map(|v| v.arg()).collect();
    let inc = |from: usize, to: usize| wrap_angle(arg[to] - arg[from]);

    // global cycles along each axis
    for axis in 0..lat.dim() {
        let other = 1 - axis;
        let lines = if lat.dim() == 2 { lat.points(other) } else { 1 };
        for j in 0..lines {
            let mut start = [0usize; 2];
            start[other] = j;
            let s = lat.index(start);
            let mut total = 0.0;
            let mut k = s;
            for _ in 0..lat.points(axis) {
                let next = lat.shift(k, axis, 1);
                total += inc(k, next);
                k = next;
            }
            let n = winding_of(total);
            if n != 0 {
                return Err(Error::WindingDetected {
                    location: format!("the axis-{axis} cycle through site {s}"),
                    winding: n,
                });
            }
        }
    }
    if lat.dim() == 2 {
        for k in 0..lat.len() {
            let k1 = lat.shift(k, 0, 1);
            let k2 = lat.shift(k1, 1, 1);
            let k3 = lat.shift(k, 1, 1);
            let n = winding_of(inc(k, k1) + inc(k1, k2) + inc(k2, k3) + inc(k3, k));
            if n != 0 {
                return Err(Error::WindingDetected {
                    location: format!("the plaquette at site {k}"),
                    winding: n,
                });
            }
        }
    }

    let mut unwrapped = vec![0.0; lat.len()];
    unwrapped[0] = arg[0];
    let mut k = 0;
    for _ in 1..lat.points(0) {
        let next = lat.shift(k, 0, 1);
        unwrapped[next] = unwrapped[k] + inc(k, next);
        k = next;
    }
    if lat.dim() == 2 {
        for i0 in 0..lat.points(0) {
            let mut k = lat.index([i0, 0]);
            for _ in 1..lat.points(1) {
                let next = lat.shift(k, 1, 1);
                unwrapped[next] = unwrapped[k] + inc(k, next);
                k = next;
            }
        }
    }
    let unit = constants.phase_unit();
    let phase = ScalarField::from_vec(lat, unwrapped.into_iter().map(|u| u * unit).collect());
    Ok(HydroFields { rho, phase })
}

/// `psi = sqrt(rho) exp(i e S / (hbar c))`.
pub fn recompose(h: &HydroFields, constants: &PhysicalConstants) -> Result<WaveField> {
    if let Some(site) = h.rho.values().iter().position(|&r| !(r > 0.0)) {
        return Err(Error::NonpositiveDensity {
            site,
            value: h.rho.get(site),
        });
    }
    let k = constants.coupling();
    let values = h
        .rho
        .values()
        .iter()
        .zip(h.phase.values())
        .map(|(&r, &s)| Complex64::from_polar(r.sqrt(), k * s))
        .collect();
    Ok(WaveField::new(ComplexField::from_vec(*h.lattice(), values)))
}

/// Field strength of `g`, with `d_t A` taken as the backward difference
/// against `g_prev`. A non-positive `dt` marks a static field and drops the
/// time-derivative term.
pub fn field_strength(
    g: &GaugeField,
    g_prev: &GaugeField,
    dt: f64,
    constants: &PhysicalConstants,
) -> FieldStrength {
    let lat = *g.lattice();
    let electric = VectorField::from_components(
        (0..lat.dim())
            .map(|i| {
                let grad = partial(&g.a0, i).expect("axis within lattice");
                if dt > 0.0 {
                    let rate = g.avec.component(i).sub(g_prev.avec.component(i));
                    let inv = 1.0 / (constants.light_c * dt);
                    grad.zip_map(&rate, |d, r| -d - r * inv)
                } else {
                    grad.scaled(-1.0)
                }
            })
            .collect(),
    );
    let magnetic = (lat.dim() == 2).then(|| {
        let dxay = partial(g.avec.component(1), 0).expect("axis 0");
        let dyax = partial(g.avec.component(0), 1).expect("axis 1");
        dxay.sub(&dyax)
    });
    FieldStrength { electric, magnetic }
}
