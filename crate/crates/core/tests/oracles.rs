use std::f64::consts::TAU;

use nlse_core::evolve::{solve_periodic_poisson, Equation, Evolution, EvolutionState};
use nlse_core::grid::relative_l2;
use nlse_core::potentials::{FdOptions, Slot};
use nlse_core::presets::SmoothState;
use nlse_core::transforms::{build_generator, route_a_transform};
use nlse_core::{GaugeField, HydroFields, Lattice, Model, ScalarField, WaveField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn slots(dim: usize) -> Vec<Slot> {
    let mut s = vec![Slot::Density, Slot::Phase];
    for i in 0..dim {
        s.push(Slot::PhaseGradient(i));
        s.push(Slot::DensityGradient(i));
    }
    s
}

#[test]
fn closed_forms_match_numeric_engine() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fd = FdOptions { h_rel: 1e-6 };
    for lat in [Lattice::line(64, TAU).unwrap(), Lattice::square(32, TAU).unwrap()] {
        for _ in 0..3 {
            let h = SmoothState::random(lat, &mut rng).hydro;
            let gauge = nlse_core::presets::random_gauge(lat, &mut rng, 0.3);
            let model = Model::dg_gauged(0.07, 0.2);
            for slot in slots(lat.dim()) {
                let closed = model.functional_derivative(slot, &h, &gauge).unwrap();
                let numeric = model.numeric_functional_derivative(slot, &h, &gauge, fd).unwrap();
                let err = relative_l2(&numeric, &closed);
                assert!(err < 1e-6, "{slot} on {}D: {err:e}", lat.dim());
            }
        }
    }
}

#[test]
fn phase_slot_is_a_pure_laplacian_of_density() {
    let lat = Lattice::line(128, TAU).unwrap();
    let h = HydroFields {
        rho: ScalarField::from_fn(lat, |x| 2.0 + x[0].cos()),
        phase: ScalarField::from_fn(lat, |x| x[0].sin()),
    };
    let model = Model::dg_gauged(0.3, 0.0);
    let d = model.functional_derivative(Slot::Phase, &h, &GaugeField::zero(lat)).unwrap();
    // dA/dS = (nu e / c) Laplacian rho = -(0.3) cos x in natural units
    let exact = ScalarField::from_fn(lat, |x| -0.3 * x[0].cos());
    let dx = lat.spacing(0);
    assert!(relative_l2(&d, &exact) < dx * dx);
}

#[test]
fn poisson_solver_inverts_sine_source() {
    let lat = Lattice::line(256, TAU).unwrap();
    let f = ScalarField::from_fn(lat, |x| (2.0 * x[0]).sin());
    let u = solve_periodic_poisson(&f).unwrap();
    let exact = ScalarField::from_fn(lat, |x| -(2.0 * x[0]).sin() / 4.0);
    let dx = lat.spacing(0);
    assert!(relative_l2(&u, &exact) < dx * dx);
}

#[test]
fn generator_is_log_density_for_dg() {
    let lat = Lattice::line(64, TAU).unwrap();
    let h = HydroFields {
        rho: ScalarField::from_fn(lat, |x| (0.4 * x[0].sin()).exp()),
        phase: ScalarField::zeros(lat),
    };
    let nu = 0.2;
    let model = Model::dg_gauged(nu, 0.1);
    let g = build_generator(&model, &h, &GaugeField::zero(lat), f64::INFINITY).unwrap();
    let exact = ScalarField::from_fn(lat, |x| -nu * 0.4 * x[0].sin());
    assert!(g.sigma.sub(&exact).max_abs() < 1e-14);

    let w = WaveField::new(nlse_core::ComplexField::from_fn(lat, |x| {
        Complex64::new((0.2 * x[0].sin()).exp(), 0.0)
    }));
    let phi = route_a_transform(&w, &g, &model.constants);
    for (i, v) in phi.psi.values().iter().enumerate() {
        let x = lat.coordinate(i, 0);
        let expect = Complex64::from_polar((0.2 * x.sin()).exp(), -nu * 0.4 * x.sin());
        assert!((v - expect).norm() < 1e-13);
    }
}

#[test]
fn free_evolution_of_plane_density_mode_matches_dispersion() {
    // psi = 1 + eps e^{ikx} evolves with e^{-i k^2 t / 2} in natural units
    let lat = Lattice::line(64, TAU).unwrap();
    let (eps, k) = (0.1, 2.0);
    let psi = nlse_core::ComplexField::from_fn(lat, |x| {
        Complex64::new(1.0, 0.0) + Complex64::from_polar(eps, k * x[0])
    });
    let evo = Evolution::new(Model::dg_gauged(0.0, 0.0), Equation::Original);
    let mut s = EvolutionState::new(WaveField::new(psi), GaugeField::zero(lat));
    let dt = 1e-3;
    for _ in 0..100 {
        s = evo.step(&s, dt).unwrap();
    }
    let dx = lat.spacing(0);
    // discrete dispersion of the 3-point Laplacian
    let omega = (2.0 - 2.0 * (k * dx).cos()) / (dx * dx) / 2.0;
    let t = 0.1;
    for (i, v) in s.wave.psi.values().iter().enumerate() {
        let x = lat.coordinate(i, 0);
        let expect = Complex64::new(1.0, 0.0) + Complex64::from_polar(eps, k * x - omega * t);
        assert!((v - expect).norm() < 1e-10, "{}", (v - expect).norm());
    }
}
