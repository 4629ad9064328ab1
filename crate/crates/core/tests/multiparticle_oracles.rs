use collapsim_core::multiparticle::{
    no_signaling_check, relative_commutator, trace_distance, Amplification,
};
use collapsim_core::random::stream;
use collapsim_core::{
    amplification_rate, bell_state, factorization_defect, frame_comparison_defect,
    interaction_factorization_defect, product_state, Complex64, Dispersion, Error, FlashParams,
    HyperplaneLabel, InteractionSpec, Normalize, ProductState, Region, SpacetimePoint, SpatialGrid,
    SurfaceWaveFunction,
};
use nalgebra::DMatrix;
use rand::Rng;

const ALPHA: f64 = 1.0;

fn grid() -> SpatialGrid {
    SpatialGrid::centered(0.0, 64.0, 128).unwrap()
}

fn packet(g: SpatialGrid, center: f64, width: f64, p0: f64) -> SurfaceWaveFunction {
    SurfaceWaveFunction::gaussian(g, HyperplaneLabel::lab(0.0), 1.0, Dispersion::Nonrelativistic, center, width, p0)
        .unwrap()
}

fn bell() -> ProductState {
    bell_state(&packet(grid(), -10.0, 1.0, 0.0), &packet(grid(), 10.0, 1.0, 0.0)).unwrap()
}

/// `<f| rho |f>` for a grid-basis density matrix.
fn fidelity(rho: &DMatrix<Complex64>, f: &SurfaceWaveFunction) -> f64 {
    let dx = f.grid().dx();
    let v = nalgebra::DVector::from_iterator(f.amplitudes().len(), f.amplitudes().iter().map(|a| a * dx.sqrt()));
    (v.adjoint() * rho * &v)[(0, 0)].re
}

#[test]
fn product_of_two_packets_is_normalized_and_separable() {
    let psi = product_state(&[packet(grid(), -5.0, 1.5, 0.3), packet(grid(), 7.0, 2.0, -0.2)]).unwrap();
    assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(psi.is_separable());
    assert!(psi.certify_separable().unwrap());
    let sv = psi.schmidt_coefficients(&[0]).unwrap();
    assert!((sv[0] - 1.0).abs() < 1e-12 && sv[1] < 1e-10);
}

#[test]
fn three_particle_product_is_normalized() {
    let g = SpatialGrid::centered(0.0, 32.0, 64).unwrap();
    let psi = product_state(&[packet(g, -4.0, 1.0, 0.0), packet(g, 0.0, 1.5, 0.5), packet(g, 5.0, 2.0, 0.0)])
        .unwrap();
    assert_eq!(psi.n_particles(), 3);
    assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    assert!(psi.certify_separable().unwrap());
}

#[test]
fn mismatched_hyperplanes_are_rejected() {
    let a = packet(grid(), 0.0, 1.0, 0.0);
    let b = SurfaceWaveFunction::gaussian(grid(), HyperplaneLabel::lab(1.0), 1.0, Dispersion::Nonrelativistic, 0.0, 1.0, 0.0)
        .unwrap();
    assert!(matches!(product_state(&[a, b]), Err(Error::Incompatible(_))));
}

#[test]
fn bell_state_has_two_equal_schmidt_coefficients() {
    let psi = bell();
    assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    let sv = psi.schmidt_coefficients(&[0]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((sv[0] - h).abs() < 1e-9 && (sv[1] - h).abs() < 1e-9, "{:?}", &sv[..3]);
    assert!(sv[2] < 1e-10);
    assert!(!psi.certify_separable().unwrap());
    assert!((psi.fraction_below(0, 0.0).unwrap() - 0.5).abs() < 1e-9);
    assert!((psi.fraction_below(1, 0.0).unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn identical_branches_are_rejected() {
    let l = packet(grid(), -10.0, 1.0, 0.0);
    assert!(matches!(bell_state(&l, &l), Err(Error::BranchesNotDistinguishable(_))));
    let close = packet(grid(), -9.0, 1.0, 0.0);
    let err = bell_state(&l, &close).unwrap_err();
    assert!(err.to_string().contains("branches not distinguishable"), "{err}");
}

#[test]
fn collapsing_one_factor_leaves_the_other_alone() {
    let f0 = packet(grid(), -5.0, 1.5, 0.3);
    let f1 = packet(grid(), 7.0, 2.0, -0.2);
    let psi = product_state(&[f0.clone(), f1.clone()]).unwrap();
    let (after, _) = psi.collapse_particle(1, 8.0, ALPHA).unwrap();
    assert!((fidelity(&after.reduced_density(0).unwrap(), &f0) - 1.0).abs() < 1e-12);
    assert!(after.certify_separable().unwrap());
    let (after, _) = psi.collapse_particle(0, -6.0, ALPHA).unwrap();
    assert!((fidelity(&after.reduced_density(1).unwrap(), &f1) - 1.0).abs() < 1e-12);
}

#[test]
fn collapse_of_one_bell_particle_decides_the_other() {
    let psi = bell();
    let (after, weight) = psi.collapse_particle(1, 10.0, ALPHA).unwrap();
    let right = 1.0 - after.fraction_below(0, 0.0).unwrap();
    assert!(right > 0.999, "{right}");
    // Gaussian density of width s against the kernel density sqrt(a/pi) exp(-a d^2)
    let s: f64 = 1.0;
    let single = (ALPHA / std::f64::consts::PI).sqrt() / (1.0 + 2.0 * ALPHA * s * s).sqrt();
    assert!((weight / (0.5 * single) - 1.0).abs() < 0.01, "{weight} vs {}", 0.5 * single);
}

#[test]
fn collapses_on_different_particles_commute() {
    let mut rng = stream(11, 0);
    for _ in 0..20 {
        let psi = bell();
        let (x, y): (f64, f64) = (rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0));
        let (a, wa) = psi.collapse_particle(0, x, ALPHA).unwrap();
        let (ab, wab) = a.collapse_particle(1, y, ALPHA).unwrap();
        let (b, wb) = psi.collapse_particle(1, y, ALPHA).unwrap();
        let (ba, wba) = b.collapse_particle(0, x, ALPHA).unwrap();
        let diff: f64 = ab.amplitudes().iter().zip(ba.amplitudes()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        assert!(((wa * wab) / (wb * wba) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn separable_states_factorize() {
    let mut rng = stream(12, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut f = || {
            packet(grid(), rng.random_range(-15.0..15.0), rng.random_range(1.0..4.0), rng.random_range(-1.0..1.0))
        };
        let psi = product_state(&[f(), f()]).unwrap();
        let regions = [Region::Point(rng.random_range(-15.0..15.0)), Region::Point(rng.random_range(-15.0..15.0))];
        worst = worst.max(factorization_defect(&psi, &regions, ALPHA).unwrap());
        let intervals = [Region::Interval(f64::NEG_INFINITY, 0.0), Region::Interval(-3.0, 8.0)];
        worst = worst.max(factorization_defect(&psi, &intervals, ALPHA).unwrap());
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn bell_state_does_not_factorize() {
    let psi = bell();
    let left = Region::Interval(f64::NEG_INFINITY, 0.0);
    let right = Region::Interval(0.0, f64::INFINITY);
    let same = factorization_defect(&psi, &[left, left], ALPHA).unwrap();
    let opposite = factorization_defect(&psi, &[left, right], ALPHA).unwrap();
    assert!((same - 0.25).abs() < 0.01, "{same}");
    assert!((opposite - 0.25).abs() < 0.01, "{opposite}");
}

#[test]
fn trace_distance_of_orthogonal_pure_states_is_one() {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]));
    let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]));
    assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    assert!(trace_distance(&a, &a).unwrap() < 1e-15);
}

fn seeds() -> (SpacetimePoint, SpacetimePoint, HyperplaneLabel) {
    (
        SpacetimePoint::new(0.0, -10.0),
        SpacetimePoint::new(0.0, 10.0),
        HyperplaneLabel::new(0.3, 50.0).unwrap(),
    )
}

#[test]
fn frames_cannot_be_compared_for_the_bell_state() {
    let (x1, x2, sigma) = seeds();
    let params = FlashParams::new(1.0, ALPHA).unwrap();
    let out = frame_comparison_defect(&bell(), x1, x2, &sigma, &params, &mut stream(13, 0)).unwrap();
    assert!((out.trace_distance - 1.0).abs() < 1e-3, "{}", out.trace_distance);
    assert!(out.outcomes[0].x < 0.0 && out.outcomes[1].x > 0.0);
}

#[test]
fn separable_control_compares_fine() {
    let (x1, x2, sigma) = seeds();
    let params = FlashParams::new(1.0, ALPHA).unwrap();
    let psi = product_state(&[packet(grid(), -10.0, 1.0, 0.0), packet(grid(), 10.0, 2.0, 0.0)]).unwrap();
    let out = frame_comparison_defect(&psi, x1, x2, &sigma, &params, &mut stream(13, 0)).unwrap();
    assert!(out.trace_distance < 1e-6, "{}", out.trace_distance);
}

#[test]
fn foliation_must_separate_the_outcomes() {
    let (x1, x2, _) = seeds();
    let params = FlashParams::new(1.0, ALPHA).unwrap();
    let early = HyperplaneLabel::new(0.3, -50.0).unwrap();
    let err = frame_comparison_defect(&bell(), x1, x2, &early, &params, &mut stream(13, 0)).unwrap_err();
    assert!(err.to_string().contains("invalid foliation geometry"), "{err}");
    let late_seed = SpacetimePoint::new(100.0, -10.0);
    let sigma = HyperplaneLabel::new(0.3, 500.0).unwrap();
    assert!(matches!(
        frame_comparison_defect(&bell(), late_seed, x2, &sigma, &params, &mut stream(13, 0)),
        Err(Error::InvalidFoliation(_))
    ));
}

#[test]
fn particle_one_statistics_ignore_particle_two_collapses() {
    let check = no_signaling_check(&bell(), ALPHA, 2000, 14).unwrap();
    assert!(check.z.abs() < 3.0, "{check:?}");
    assert!((check.without - 0.5).abs() < 0.05);
}

fn coarse() -> SpatialGrid {
    SpatialGrid::centered(0.0, 16.0, 16).unwrap()
}

#[test]
fn free_evolution_commutes_with_collapse_in_the_interaction_picture() {
    let spec = InteractionSpec::new(0.0, 1.0).unwrap();
    for i in [0, 1] {
        let d = interaction_factorization_defect(&spec, &coarse(), 1.0, i, 0.0, 0.25, 1.0).unwrap();
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn interaction_defect_grows_with_coupling() {
    let sweep = [0.0, 0.1, 0.2, 0.4, 0.8];
    let d: Vec<f64> = sweep
        .iter()
        .map(|&g| {
            interaction_factorization_defect(&InteractionSpec::new(g, 1.0).unwrap(), &coarse(), 1.0, 0, 0.0, 0.25, 1.0)
                .unwrap()
        })
        .collect();
    assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
    assert!(d[3] > 1e-3, "{d:?}");
}

#[test]
fn an_operator_commutes_with_itself() {
    let h = DMatrix::from_fn(6, 6, |j, k| Complex64::new((j + k) as f64, j as f64 - k as f64));
    assert_eq!(relative_commutator(&h, &h), 0.0);
}

fn amplification(n: usize) -> Amplification {
    let g = SpatialGrid::centered(0.0, 64.0, 128).unwrap();
    let params = FlashParams::new(1.0, ALPHA).unwrap();
    amplification_rate(n, &g, 10.0, 1.0, &params, 500, 15 + n as u64).unwrap()
}

#[test]
fn superposition_decays_at_the_total_collapse_rate() {
    let one = amplification(1);
    assert!((one.rate - 1.0).abs() < 0.1, "{one:?}");
    for (n, tol) in [(2, 0.15), (8, 0.2)] {
        let a = amplification(n);
        assert!((a.rate / n as f64 - 1.0).abs() < tol, "{a:?}");
        assert!((a.mean_flashes - 1.0).abs() < 1e-12);
    }
}
