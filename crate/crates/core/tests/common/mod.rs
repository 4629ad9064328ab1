#![allow(dead_code)]

use collapsim_core::{
    restrict, Complex64, CovariantAmplitude, Dispersion, HyperplaneLabel, Normalize,
    SpacetimePoint, SpatialGrid, SurfaceWaveFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid() -> SpatialGrid {
    SpatialGrid::default_relativistic()
}

/// Superposition of one to three Gaussians near the origin, moderate momenta.
pub fn random_amplitude(rng: &mut ChaCha8Rng) -> CovariantAmplitude {
    let g = grid();
    let n = rng.random_range(1..=3);
    let mg = g.momentum_grid();
    let mut total = vec![Complex64::new(0.0, 0.0); mg.len()];
    for _ in 0..n {
        let center: f64 = rng.random_range(-15.0..15.0);
        let width: f64 = rng.random_range(2.0..5.0);
        let p0: f64 = rng.random_range(-1.0..1.0);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let weight: f64 = rng.random_range(0.3..1.0);
        let packet = CovariantAmplitude::gaussian(
            &g,
            1.0,
            Dispersion::Relativistic,
            SpacetimePoint::new(0.0, center),
            width,
            p0,
        )
        .unwrap()
        .rebased(SpacetimePoint::ORIGIN);
        for (t, a) in total.iter_mut().zip(packet.amplitudes()) {
            *t += a * Complex64::from_polar(weight, phase);
        }
    }
    CovariantAmplitude::new(mg, SpacetimePoint::ORIGIN, total, 1.0, Dispersion::Relativistic)
        .unwrap()
        .normalized()
        .unwrap()
}

pub fn random_surface(rng: &mut ChaCha8Rng) -> SurfaceWaveFunction {
    let phi = random_amplitude(rng);
    restrict(&phi, &HyperplaneLabel::lab(0.0), &grid()).unwrap()
}
