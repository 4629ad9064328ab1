mod common;

use collapsim_core::dynamics::covariance_defect_with;
use collapsim_core::{
    covariance_defect, evolve, restrict, Complex64, CovariantAmplitude, Dispersion,
    HyperplaneLabel, Normalize, Propagator, SpacetimePoint, SpatialGrid,
};
use common::*;
use rand::Rng;

#[test]
fn evolve_to_same_label_is_identity() {
    let phi = random_amplitude(&mut rng(1));
    let label = HyperplaneLabel::new(0.4, 2.0).unwrap();
    let out = evolve(&phi, &label, &label).unwrap();
    assert!(out.distance(&phi).unwrap() < 1e-15);
    assert_eq!(out.amplitudes(), phi.amplitudes());
}

#[test]
fn plane_wave_picks_up_energy_phase() {
    let g = grid();
    let mg = g.momentum_grid();
    let k0 = 17;
    let mut amps = vec![Complex64::new(0.0, 0.0); mg.len()];
    amps[k0] = Complex64::new(1.0, 0.0);
    let phi =
        CovariantAmplitude::new(mg, SpacetimePoint::ORIGIN, amps, 1.0, Dispersion::Relativistic)
            .unwrap();
    let dt = 3.7;
    let out = evolve(&phi, &HyperplaneLabel::lab(0.0), &HyperplaneLabel::lab(dt)).unwrap();
    let p = mg.p(k0);
    let expect = Complex64::from_polar(1.0, -(p * p + 1.0).sqrt() * dt);
    assert!((out.amplitudes()[k0] - expect).norm() < 1e-12);
    assert_eq!(out.origin(), SpacetimePoint::new(dt, 0.0));
}

#[test]
fn nonrelativistic_gaussian_spreads_by_closed_form() {
    let g = SpatialGrid::centered(0.0, 400.0, 2048).unwrap();
    let sigma = 1.5;
    let w = std::f64::consts::SQRT_2 * sigma;
    let phi = CovariantAmplitude::gaussian(
        &g,
        1.0,
        Dispersion::Nonrelativistic,
        SpacetimePoint::ORIGIN,
        sigma,
        0.0,
    )
    .unwrap();
    for dt in [2.0, 10.0, 30.0] {
        let to = HyperplaneLabel::lab(dt);
        let out = evolve(&phi, &HyperplaneLabel::lab(0.0), &to).unwrap();
        let psi = restrict(&out, &to, &g).unwrap();
        let measured = std::f64::consts::SQRT_2 * psi.position_variance().sqrt();
        let expect = (w * w + (dt / w).powi(2)).sqrt();
        assert!((measured / expect - 1.0).abs() < 5e-3, "dt {dt}: {measured} vs {expect}");
    }
}

#[test]
fn evolution_composes_and_is_unitary() {
    let mut r = rng(2);
    let labels = [
        HyperplaneLabel::new(0.0, 0.0).unwrap(),
        HyperplaneLabel::new(0.6, 3.0).unwrap(),
        HyperplaneLabel::new(-0.3, -1.5).unwrap(),
    ];
    for _ in 0..100 {
        let phi = random_amplitude(&mut r);
        let (a, b, c) = (&labels[0], &labels[1], &labels[2]);
        let ab = evolve(&phi, a, b).unwrap();
        let abc = evolve(&ab, b, c).unwrap();
        let ac = evolve(&phi, a, c).unwrap();
        assert!(abc.distance(&ac).unwrap() < 1e-10);
        assert!((ab.norm_sqr() - phi.norm_sqr()).abs() < 1e-12);
        for (x, y) in ab.amplitudes().iter().zip(phi.amplitudes()) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn restriction_of_evolved_amplitude_matches_surface_propagation() {
    let mut r = rng(3);
    for _ in 0..10 {
        let phi = random_amplitude(&mut r);
        let dt: f64 = r.random_range(-5.0..5.0);
        let from = HyperplaneLabel::new(0.3, 1.0).unwrap();
        let to = HyperplaneLabel::new(0.3, 1.0 + dt).unwrap();
        let evolved = evolve(&phi, &from, &to).unwrap();
        let on_to = restrict(&evolved, &to, &grid()).unwrap();
        let prop = Propagator::for_amplitude(&phi);
        let stepped = prop.advance(&restrict(&phi, &from, &grid()).unwrap(), dt).unwrap();
        assert!(on_to.distance(&stepped).unwrap() < 1e-10);
    }
}

#[test]
fn covariance_defect_vanishes_for_free_states() {
    let mut r = rng(4);
    let s1 = HyperplaneLabel::lab(0.0);
    let s2 = HyperplaneLabel::lab(5.0);
    let phi = random_amplitude(&mut r);
    assert!(covariance_defect(&phi, &s1, &s2, 0.0).unwrap() < 1e-12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let phi = random_amplitude(&mut r);
        worst = worst.max(covariance_defect(&phi, &s1, &s2, 0.5).unwrap());
    }
    assert!(worst <= 1e-8, "worst covariance defect {worst}");
}

#[test]
fn corrupted_propagator_is_detected() {
    let phi = random_amplitude(&mut rng(5));
    let prop = Propagator::for_amplitude(&phi).with_phase_skew(0.05);
    let d = covariance_defect_with(
        &prop,
        &phi,
        &HyperplaneLabel::lab(0.0),
        &HyperplaneLabel::lab(5.0),
        0.5,
    )
    .unwrap();
    assert!(d > 1e-3, "defect {d}");
}

#[test]
fn galilean_states_reject_boosted_labels() {
    let g = grid();
    let phi = CovariantAmplitude::gaussian(
        &g,
        1.0,
        Dispersion::Nonrelativistic,
        SpacetimePoint::ORIGIN,
        2.0,
        0.0,
    )
    .unwrap();
    let err = evolve(&phi, &HyperplaneLabel::lab(0.0), &HyperplaneLabel::new(0.2, 0.0).unwrap())
        .unwrap_err();
    assert_eq!(err.to_string(), "boost undefined for Galilean mode");
}
