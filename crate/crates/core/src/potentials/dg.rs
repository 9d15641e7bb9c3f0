//! Closed-form functional derivatives of the Doebner-Goldin potential.
//!
//! Each expression is the exact gradient of the discretised DG action under
//! central differences, so the numeric engine reproduces it up to the
//! finite-difference step alone.

use super::DgParams;
use crate::grid::{
    central_diff, divergence, gradient, wide_laplacian, PhysicalConstants, ScalarField,
    VectorField,
};

pub(crate) struct DgCoefficients {
    /// `nu e / c`
    pub nu_ec: f64,
    /// `alpha hbar^2 / m`
    pub beta: f64,
}

impl DgCoefficients {
    pub fn new(p: DgParams, c: &PhysicalConstants) -> Self {
        Self {
            nu_ec: p.nu * c.charge_e / c.light_c,
            beta: p.alpha * c.hbar * c.hbar / c.mass,
        }
    }
}

/// `grad rho / rho`
pub(crate) fn log_gradient(rho: &ScalarField) -> VectorField {
    let g = gradient(rho);
    VectorField::from_components(g.components().iter().map(|c| c.div(rho)).collect())
}

/// `W = (nu e / c) div v - beta |grad rho / rho|^2 - 2 beta div(grad rho / rho)`
/// with `v = grad S - A` supplied by the caller.
pub(crate) fn real_part(k: &DgCoefficients, rho: &ScalarField, v: &VectorField) -> ScalarField {
    let lg = log_gradient(rho);
    let div_v = divergence(v);
    let div_lg = divergence(&lg);
    let lg2 = lg.norm_squared();
    let mut out = div_v.scaled(k.nu_ec);
    for ((o, &q), &d) in out
        .values_mut()
        .iter_mut()
        .zip(lg2.values())
        .zip(div_lg.values())
    {
        *o -= k.beta * q + 2.0 * k.beta * d;
    }
    out
}

/// `dA/dS = (nu e / c) lap_w rho`
pub(crate) fn phase_slot(k: &DgCoefficients, rho: &ScalarField) -> ScalarField {
    wide_laplacian(rho).scaled(k.nu_ec)
}

/// `dA/d(d_i S) = -(nu e / c) d_i rho`
pub(crate) fn phase_gradient_slot(k: &DgCoefficients, rho: &ScalarField, axis: usize) -> ScalarField {
    ScalarField::from_vec(
        *rho.lattice(),
        central_diff(rho.lattice(), rho.values(), axis),
    )
    .scaled(-k.nu_ec)
}

/// `dA/d(d_i rho) = -(nu e / 2c) v_i + 2 beta d_i rho / rho`
pub(crate) fn density_gradient_slot(
    k: &DgCoefficients,
    rho: &ScalarField,
    v: &VectorField,
    axis: usize,
) -> ScalarField {
    let d = ScalarField::from_vec(
        *rho.lattice(),
        central_diff(rho.lattice(), rho.values(), axis),
    );
    let beta2 = 2.0 * k.beta;
    let half = 0.5 * k.nu_ec;
    let tmp = d.div(rho);
    tmp.zip_map(v.component(axis), |lg, vi| beta2 * lg - half * vi)
}

/// `(hbar/2)(nu) lap_w rho / rho`, i.e. `(hbar c / 2 e rho) dA/dS`.
pub(crate) fn imaginary_part(p: DgParams, c: &PhysicalConstants, rho: &ScalarField) -> ScalarField {
    let f = 0.5 * c.hbar * p.nu;
    wide_laplacian(rho).div(rho).scaled(f)
}

/// `lap rho / rho - (1/2) |grad rho / rho|^2`, written as
/// `div(grad rho / rho) + (1/2) |grad rho / rho|^2` so that it shares its
/// stencil with the `alpha` part of [`real_part`].
pub(crate) fn quantum_bracket(rho: &ScalarField) -> ScalarField {
    let lg = log_gradient(rho);
    divergence(&lg).zip_map(&lg.norm_squared(), |a, b| a + 0.5 * b)
}

/// `(m nu^2 - 2 alpha hbar^2 / m)`: coefficient left in front of the bracket
/// once the imaginary part has been transformed away.
pub fn transformed_coefficient(p: DgParams, c: &PhysicalConstants) -> f64 {
    c.mass * p.nu * p.nu - 2.0 * p.alpha * c.hbar * c.hbar / c.mass
}
