mod common;

use collapsim_core::collapse::transported_multiply;
use collapsim_core::flash::adaptive_location_pdf;
use collapsim_core::random::stream;
use collapsim_core::stats::{ks_exponential, mean, variance};
use collapsim_core::{
    dilation_statistic, flash_location_pdf, next_flash, sample_interval, simulate_chain,
    transported_collapse, CollapseKernel, CovariantAmplitude, Dispersion, Error, FlashEvent,
    FlashParams, Hyperboloid, SpacetimePoint, SpatialGrid,
};

fn rest(grid: &SpatialGrid, width: f64) -> CovariantAmplitude {
    CovariantAmplitude::gaussian(grid, 1.0, Dispersion::Relativistic, SpacetimePoint::ORIGIN, width, 0.0)
        .unwrap()
}

#[test]
fn intervals_are_exponential() {
    let mut rng = stream(1, 0);
    let xs: Vec<f64> = (0..100_000).map(|_| sample_interval(1.0, &mut rng)).collect();
    assert!((mean(&xs) - 1.0).abs() < 0.01);
    assert!(ks_exponential(&xs, 1.0).1 > 0.01);
    let mut rng = stream(1, 1);
    let ys: Vec<f64> = (0..100_000).map(|_| sample_interval(2.0, &mut rng)).collect();
    assert!((variance(&ys) - 4.0).abs() < 0.12);
    let again: Vec<f64> = {
        let mut rng = stream(1, 0);
        (0..100_000).map(|_| sample_interval(1.0, &mut rng)).collect()
    };
    assert_eq!(xs, again);
}

#[test]
fn rest_packet_flashes_near_zero_rapidity() {
    let g = SpatialGrid::centered(0.0, 1024.0, 1024).unwrap();
    let phi = rest(&g, 22.0);
    let chi = FlashParams::new(1.0, 0.25).unwrap().chi_grid();
    let pdf = flash_location_pdf(&phi, SpacetimePoint::ORIGIN, 1000.0, 0.25, &chi).unwrap();
    assert!((pdf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mean_abs: f64 = chi.iter().zip(&pdf).map(|(c, p)| c.abs() * p).sum();
    assert!(mean_abs < 0.05, "mean |chi| {mean_abs}");
    let peak = chi[argmax(&pdf)];
    assert!(peak.abs() < 0.015, "peak {peak}");
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap()
}

#[test]
fn moving_packet_flashes_at_its_rapidity() {
    let g = SpatialGrid::centered(0.0, 1024.0, 2048).unwrap();
    let eta0 = 0.5;
    let phi = CovariantAmplitude::boosted_gaussian(&g, 1.0, SpacetimePoint::ORIGIN, 22.0, eta0).unwrap();
    let chi = FlashParams::new(1.0, 0.25).unwrap().chi_grid();
    let pdf = flash_location_pdf(&phi, SpacetimePoint::ORIGIN, 1000.0, 0.25, &chi).unwrap();
    let peak = chi[argmax(&pdf)];
    assert!((peak - eta0).abs() <= 0.015, "peak {peak}");
}

#[test]
fn pdf_ratios_match_transported_collapse_weights() {
    let g = SpatialGrid::centered(0.0, 256.0, 512).unwrap();
    let phi = CovariantAmplitude::boosted_gaussian(&g, 1.0, SpacetimePoint::new(1.0, 3.0), 4.0, 0.3)
        .unwrap();
    let apex = SpacetimePoint::new(0.5, 2.0);
    let delta_t = 20.0;
    let alpha = 0.2;
    let chi = FlashParams::new(1.0, alpha).unwrap().chi_grid();
    let pdf = flash_location_pdf(&phi, apex, delta_t, alpha, &chi).unwrap();
    let h = Hyperboloid::new(apex, delta_t, Vec::new()).unwrap();
    let exact = |c: f64| {
        let x = h.point(c);
        transported_multiply(&phi, x, &CollapseKernel::at(x, alpha, 0.0).unwrap()).unwrap().1
    };
    let reference = chi.iter().position(|&c| (c - 0.3).abs() < 1e-9).unwrap();
    for c in [0.1, 0.2, 0.45, 0.6] {
        let k = chi.iter().position(|&x| (x - c).abs() < 1e-9).unwrap();
        let got = pdf[k] / pdf[reference];
        let want = exact(chi[k]) / exact(chi[reference]);
        assert!((got / want - 1.0).abs() < 1e-9, "chi {c}: {got} vs {want}");
    }
}

#[test]
fn galilean_state_has_no_flash_process() {
    let g = SpatialGrid::centered(0.0, 64.0, 128).unwrap();
    let phi = CovariantAmplitude::gaussian(&g, 1.0, Dispersion::Nonrelativistic, SpacetimePoint::ORIGIN, 2.0, 0.0)
        .unwrap();
    assert!(matches!(
        flash_location_pdf(&phi, SpacetimePoint::ORIGIN, 1.0, 1.0, &[0.0, 0.01]),
        Err(Error::GalileanBoost)
    ));
}

#[test]
fn short_intervals_widen_the_rapidity_range() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let phi = rest(&g, 2.0);
    let params = FlashParams::new(1.0, 0.04).unwrap();
    let err = flash_location_pdf(&phi, SpacetimePoint::ORIGIN, 0.05, 0.04, &params.chi_grid()).unwrap_err();
    assert!(err.to_string().contains("chi_max"), "{err}");
    let (chi, pdf) = adaptive_location_pdf(&phi, SpacetimePoint::ORIGIN, 0.05, &params).unwrap();
    assert!(chi[chi.len() - 1] > params.chi_max);
    assert!((pdf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(pdf[0] < 1e-10 && pdf[pdf.len() - 1] < 1e-10);
}

#[test]
fn localized_packet_flashes_nearby() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let phi = rest(&g, 2.0);
    let alpha = 0.04;
    let params = FlashParams::new(1.0, alpha).unwrap();
    let seed = FlashEvent::seed(SpacetimePoint::ORIGIN);
    let mut near = 0;
    let trials = 1000;
    for trial in 0..trials {
        let mut rng = stream(5, trial);
        let (event, _) = next_flash(&phi, &seed, &params, &mut rng).unwrap();
        assert!(seed.precedes(&event));
        if event.x.abs() < 3.0 / alpha.sqrt() {
            near += 1;
        }
    }
    assert!(near as f64 > 0.99 * trials as f64, "{near}/{trials}");
}

#[test]
fn fixed_seed_gives_identical_flash() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let phi = rest(&g, 2.0);
    let params = FlashParams::new(3.0, 0.04).unwrap();
    let seed = FlashEvent::seed(SpacetimePoint::ORIGIN);
    let a = next_flash(&phi, &seed, &params, &mut stream(6, 0)).unwrap();
    let b = next_flash(&phi, &seed, &params, &mut stream(6, 0)).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn collapsed_state_is_already_localized() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let phi = rest(&g, 2.0);
    let params = FlashParams::new(3.0, 0.01).unwrap();
    let seed = FlashEvent::seed(SpacetimePoint::ORIGIN);
    let (event, post) = next_flash(&phi, &seed, &params, &mut stream(7, 0)).unwrap();
    let x = event.point();
    let (again, _) = transported_collapse(&post, x, &CollapseKernel::at(x, params.alpha, 0.0).unwrap()).unwrap();
    let fidelity = 1.0 - post.infidelity(&again).unwrap();
    assert!(fidelity > 0.99, "{fidelity}");
}

#[test]
fn empty_chain_is_the_seed() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let seed = FlashEvent::seed(SpacetimePoint::new(2.0, -1.0));
    let chain = simulate_chain(&rest(&g, 2.0), seed, 0, &FlashParams::new(1.0, 0.04).unwrap(), 1, 0);
    assert!(chain.events.is_empty());
    assert_eq!(chain.all_events().collect::<Vec<_>>(), vec![&seed]);
}

fn rest_chain_setup() -> (CovariantAmplitude, FlashParams) {
    let g = SpatialGrid::centered(0.0, 1024.0, 1024).unwrap();
    (rest(&g, 10.0), FlashParams::new(50.0, 0.01).unwrap())
}

#[test]
fn rest_chain_intervals_average_to_tau() {
    let (phi, params) = rest_chain_setup();
    let chain = simulate_chain(&phi, FlashEvent::seed(SpacetimePoint::ORIGIN), 50, &params, 8, 0);
    assert_eq!(chain.failure, None);
    assert_eq!(chain.events.len(), 50);
    assert!(chain.is_time_ordered());
    let dts = chain.coordinate_intervals();
    let m = mean(&dts);
    let three_sigma = 3.0 * params.tau / (dts.len() as f64).sqrt();
    assert!((m - params.tau).abs() < three_sigma, "mean {m}");
    let again = simulate_chain(&phi, FlashEvent::seed(SpacetimePoint::ORIGIN), 50, &params, 8, 0);
    assert_eq!(chain, again);
}

#[test]
fn chain_continues_from_stored_state() {
    let (phi, params) = rest_chain_setup();
    let mut rng = stream(9, 3);
    let mut state = phi;
    let mut prev = FlashEvent::seed(SpacetimePoint::ORIGIN);
    for _ in 0..5 {
        (prev, state) = next_flash(&state, &prev, &params, &mut rng).unwrap();
    }
    let stored = (state.clone(), prev, rng.clone());
    let mut tail = Vec::new();
    for _ in 0..5 {
        (prev, state) = next_flash(&state, &prev, &params, &mut rng).unwrap();
        tail.push(prev);
    }
    let (mut state2, mut prev2, mut rng2) = stored;
    for expect in &tail {
        (prev2, state2) = next_flash(&state2, &prev2, &params, &mut rng2).unwrap();
        assert_eq!(&prev2, expect);
    }
}

#[test]
fn dilation_needs_enough_chains() {
    let g = SpatialGrid::centered(0.0, 200.0, 512).unwrap();
    let chain = simulate_chain(&rest(&g, 2.0), FlashEvent::seed(SpacetimePoint::ORIGIN), 2, &FlashParams::new(5.0, 0.04).unwrap(), 1, 0);
    assert!(matches!(dilation_statistic(&[chain]), Err(Error::InsufficientData(_))));
}
