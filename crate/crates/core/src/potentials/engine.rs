//! Numeric Euler-Lagrange engine.
//!
//! The discrete action is `sum_k U(args_k) * dV`, with every derivative in
//! `args_k` formed by central differences of the lattice arrays. The
//! functional derivative with respect to a slot at site `k` is the partial of
//! that sum with respect to the slot's value at `k`, divided by `dV`. For the
//! gradient slots the gradient arrays are promoted to independent lattice
//! fields and second derivatives are taken as differences of them, so the
//! result carries the `-d_j` Euler-Lagrange terms automatically.
//!
//! Only the sites whose stencils touch `k` change, so each derivative sums
//! the density over a small patch around `k`.

use super::density::{Dependencies, SiteArgs};
use super::Slot;
use crate::fields::{GaugeField, HydroFields};
use crate::grid::{central_diff, Lattice, ScalarField};

struct Workspace {
    lat: Lattice,
    rho: Vec<f64>,
    phase: Vec<f64>,
    grad_phase: Option<[Vec<f64>; 2]>,
    grad_rho: Option<[Vec<f64>; 2]>,
    a: [Vec<f64>; 2],
    da: [[Vec<f64>; 2]; 2],
}

impl Workspace {
    fn new(hydro: &HydroFields, gauge: &GaugeField) -> Self {
        let lat = *hydro.lattice();
        let zeros = vec![0.0; lat.len()];
        let mut a = [zeros.clone(), zeros.clone()];
        let mut da = [[zeros.clone(), zeros.clone()], [zeros.clone(), zeros]];
        for i in 0..lat.dim() {
            a[i] = gauge.avec.component(i).values().to_vec();
            for j in 0..lat.dim() {
                da[i][j] = central_diff(&lat, &a[i], j);
            }
        }
        Self {
            lat,
            rho: hydro.rho.values().to_vec(),
            phase: hydro.phase.values().to_vec(),
            grad_phase: None,
            grad_rho: None,
            a,
            da,
        }
    }

    fn promote_grad_phase(&mut self) {
        let mut g = [vec![0.0; self.lat.len()], vec![0.0; self.lat.len()]];
        for (i, gi) in g.iter_mut().enumerate().take(self.lat.dim()) {
            *gi = central_diff(&self.lat, &self.phase, i);
        }
        self.grad_phase = Some(g);
    }

    fn promote_grad_rho(&mut self) {
        let mut h = [vec![0.0; self.lat.len()], vec![0.0; self.lat.len()]];
        for (i, hi) in h.iter_mut().enumerate().take(self.lat.dim()) {
            *hi = central_diff(&self.lat, &self.rho, i);
        }
        self.grad_rho = Some(h);
    }

    #[inline]
    fn cd(&self, arr: &[f64], j: usize, axis: usize) -> f64 {
        let f = self.lat.shift(j, axis, 1);
        let b = self.lat.shift(j, axis, -1);
        (arr[f] - arr[b]) / (2.0 * self.lat.spacing(axis))
    }

    fn site_args(&self, j: usize) -> SiteArgs {
        let dim = self.lat.dim();
        let mut s = SiteArgs {
            dim,
            rho: self.rho[j],
            phase: self.phase[j],
            ..SiteArgs::default()
        };
        for i in 0..dim {
            s.drho[i] = match &self.grad_rho {
                Some(h) => h[i][j],
                None => self.cd(&self.rho, j, i),
            };
            s.dphase[i] = match &self.grad_phase {
                Some(g) => g[i][j],
                None => self.cd(&self.phase, j, i),
            };
            s.a[i] = self.a[i][j];
            for l in 0..dim {
                s.da[i][l] = self.da[i][l][j];
                s.ddphase[i][l] = match &self.grad_phase {
                    Some(g) => self.cd(&g[i], j, l),
                    None => {
                        let f = self.lat.shift(j, l, 1);
                        let b = self.lat.shift(j, l, -1);
                        (self.cd(&self.phase, f, i) - self.cd(&self.phase, b, i))
                            / (2.0 * self.lat.spacing(l))
                    }
                };
            }
        }
        s
    }

    fn target_mut(&mut self, slot: Slot) -> &mut Vec<f64> {
        match slot {
            Slot::Density => &mut self.rho,
            Slot::Phase => &mut self.phase,
            Slot::PhaseGradient(i) => &mut self.grad_phase.as_mut().expect("promoted")[i],
            Slot::DensityGradient(i) => &mut self.grad_rho.as_mut().expect("promoted")[i],
        }
    }

    fn patch(&self, k: usize, radius: isize) -> Vec<usize> {
        let mut out = Vec::new();
        if self.lat.dim() == 1 {
            for o in -radius..=radius {
                out.push(self.lat.shift(k, 0, o));
            }
        } else {
            for o0 in -radius..=radius {
                let r = self.lat.shift(k, 0, o0);
                for o1 in -radius..=radius {
                    out.push(self.lat.shift(r, 1, o1));
                }
            }
        }
        out
    }
}

/// Stencil reach of a slot perturbation given what the density reads.
fn radius(slot: Slot, deps: Dependencies) -> isize {
    match slot {
        Slot::Density => isize::from(deps.drho),
        Slot::Phase => {
            if deps.ddphase {
                2
            } else {
                isize::from(deps.dphase)
            }
        }
        Slot::PhaseGradient(_) => isize::from(deps.ddphase),
        Slot::DensityGradient(_) => 0,
    }
}

/// Central finite difference of the discrete action with respect to `slot`,
/// using step `h_rel * max|slot values|`.
pub(crate) fn numeric_derivative(
    density: &dyn Fn(&SiteArgs) -> f64,
    deps: Dependencies,
    slot: Slot,
    hydro: &HydroFields,
    gauge: &GaugeField,
    h_rel: f64,
) -> ScalarField {
    let lat = *hydro.lattice();
    let mut ws = Workspace::new(hydro, gauge);
    match slot {
        Slot::PhaseGradient(_) => ws.promote_grad_phase(),
        Slot::DensityGradient(_) => ws.promote_grad_rho(),
        _ => {}
    }
    let scale = ws.target_mut(slot).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = h_rel * if scale > 0.0 { scale } else { 1.0 };
    let r = radius(slot, deps);

    let mut out = vec![0.0; lat.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let patch = ws.patch(k, r);
        let orig = ws.target_mut(slot)[k];
        ws.target_mut(slot)[k] = orig + h;
        let plus: f64 = patch.iter().map(|&j| density(&ws.site_args(j))).sum();
        ws.target_mut(slot)[k] = orig - h;
        let minus: f64 = patch.iter().map(|&j| density(&ws.site_args(j))).sum();
        ws.target_mut(slot)[k] = orig;
        *o = (plus - minus) / (2.0 * h);
    }
    ScalarField::from_vec(lat, out)
}

/// Pointwise partial `dU/dS` with every derivative argument frozen.
pub(crate) fn bare_phase_partial(
    density: &dyn Fn(&SiteArgs) -> f64,
    hydro: &HydroFields,
    gauge: &GaugeField,
    h_rel: f64,
) -> ScalarField {
    let lat = *hydro.lattice();
    let ws = Workspace::new(hydro, gauge);
    let scale = hydro.phase.max_abs();
    let h = h_rel * if scale > 0.0 { scale } else { 1.0 };
    let out = (0..lat.len())
        .map(|k| {
            let mut args = ws.site_args(k);
            let s = args.phase;
            args.phase = s + h;
            let plus = density(&args);
            args.phase = s - h;
            let minus = density(&args);
            (plus - minus) / (2.0 * h)
        })
        .collect();
    ScalarField::from_vec(lat, out)
}
