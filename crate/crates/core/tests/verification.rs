use nlse_core::transforms::Generator;
use nlse_core::verify::{
    calibrate_static_magnetic, f_invariance, full_verify, static_magnetic_change, Scenario,
};
use nlse_core::{GaugeField, Lattice, Model, PhysicalConstants, ScalarField};

#[test]
fn preset_passes_full_verification_and_renders_identically() {
    let s = Scenario::dg_preset();
    let a = full_verify(&s, &[32, 64, 128], 200, 1e-8);
    assert!(a.all_pass(), "{}", a.render());
    let b = full_verify(&s, &[32, 64, 128], 200, 1e-8);
    assert_eq!(a.render(), b.render());
}

#[test]
fn identity_generator_leaves_field_strength_unchanged() {
    let lat = Lattice::square(16, 1.0).unwrap();
    let gauge = GaugeField::new(
        ScalarField::from_fn(lat, |x| x[0].sin()),
        nlse_core::VectorField::from_fn(lat, |x| [x[1].cos(), 0.0]),
    )
    .unwrap();
    let g = Generator::identity(lat);
    let r = f_invariance(&gauge, &gauge, &g, &g, 0.0, &PhysicalConstants::natural(), 0.0);
    assert!(r.all_pass());
    assert!(r.records.iter().all(|c| c.measured == 0.0));
}

#[test]
fn static_magnetic_change_is_second_order_and_within_calibration() {
    let model = Model::dg_gauged(0.1, 0.1);
    let change = |n: usize| {
        let lat = Lattice::square(n, std::f64::consts::TAU).unwrap();
        let rho = ScalarField::from_fn(lat, |x| (0.4 * x[0].cos() * x[1].sin()).exp());
        (lat, static_magnetic_change(&model, &rho, f64::INFINITY).unwrap())
    };
    let (lat, a) = change(32);
    let (_, b) = change(64);
    assert!((a / b).log2() > 1.8, "{a} {b}");
    let c = calibrate_static_magnetic(&lat, &model).unwrap();
    let dx = lat.min_spacing();
    assert!(a <= c * dx * dx);
}
