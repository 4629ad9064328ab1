//! The registered experiments. Each one turns a config into metrics and
//! tables; random numbers come from counter-based streams of the run seed,
//! so results do not depend on the number of workers.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use collapsim_core::collapse::{collapse_location_pdf, transported_collapse_via};
use collapsim_core::fock::{macro_failure_report, BlobSpec};
use collapsim_core::multiparticle::{no_signaling_check, sample_position};
use collapsim_core::random::stream;
use collapsim_core::stats::{bootstrap_mean, ks_exponential, mean, ratio_bootstrap};
use collapsim_core::{
    amplification_rate, apply_collapse, bell_state, covariance_defect, dilation_statistic,
    factorization_defect, frame_comparison_defect, interaction_factorization_defect,
    microcausality_defect, product_state, sample_interval, simulate_chain, CollapseKernel,
    Complex64, CovariantAmplitude, Dispersion, Error, FlashChain, FlashEvent, FlashParams,
    HyperplaneLabel, InteractionSpec, Normalize, Propagator, Region, SpacetimePoint, SpatialGrid,
    SurfaceWaveFunction,
};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::{Cell, Metric, Outcome, Table, DILATION_HEADER, FLASHES_HEADER};

// Tags that derive independent seeds for the parts of an experiment.
const STATES: u64 = 1;
const INTERVALS: u64 = 2;
const TRAJECTORIES: u64 = 3;
const SURFACES: u64 = 4;
const CHAINS: u64 = 5;
const REST: u64 = 6;
const MOVING: u64 = 7;
const POINTS: u64 = 8;
const FRAMES: u64 = 9;
const SIGNALING: u64 = 10;
const AMPLIFICATION: u64 = 100;
const DILATION: u64 = 200;

const INTERVAL_CHUNK: usize = 1000;
const DILATION_RAPIDITIES: [f64; 3] = [0.0, 0.5, 1.0];
const SEPARATIONS: [f64; 7] = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0];
const PARTICLE_NUMBERS: [usize; 4] = [1, 2, 4, 8];

pub fn execute(c: &ExperimentConfig) -> Result<Outcome> {
    match c.experiment {
        Experiment::Grw1d => grw1d(c),
        Experiment::FlashChain => flash_chain(c),
        Experiment::Dilation => dilation(c),
        Experiment::Covariance => covariance(c),
        Experiment::Microcausality => microcausality(c),
        Experiment::BellNoncompare => bell_noncompare(c),
        Experiment::Factorization => factorization(c),
        Experiment::Amplification => amplification(c),
        Experiment::FockMacro => fock_macro(c),
    }
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    stream(seed, tag).next_u64()
}

/// `f(0..n)` on the worker pool, in index order.
fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

fn grid(c: &ExperimentConfig) -> Result<SpatialGrid> {
    Ok(SpatialGrid::centered(0.0, c.get("grid_length"), c.count("grid_points"))?)
}

fn worst(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// One to three relativistic Gaussians near the origin with moderate momenta.
pub fn random_amplitude<R: Rng + ?Sized>(rng: &mut R) -> Result<CovariantAmplitude> {
    let g = SpatialGrid::default_relativistic();
    let mg = g.momentum_grid();
    let mut total = vec![Complex64::new(0.0, 0.0); mg.len()];
    for _ in 0..rng.random_range(1..=3) {
        let center: f64 = rng.random_range(-15.0..15.0);
        let width: f64 = rng.random_range(2.0..5.0);
        let p0: f64 = rng.random_range(-1.0..1.0);
        let phase: f64 = rng.random_range(0.0..TAU);
        let weight: f64 = rng.random_range(0.3..1.0);
        let packet = CovariantAmplitude::gaussian(
            &g,
            1.0,
            Dispersion::Relativistic,
            SpacetimePoint::new(0.0, center),
            width,
            p0,
        )?
        .rebased(SpacetimePoint::ORIGIN);
        for (t, a) in total.iter_mut().zip(packet.amplitudes()) {
            *t += a * Complex64::from_polar(weight, phase);
        }
    }
    Ok(
        CovariantAmplitude::new(mg, SpacetimePoint::ORIGIN, total, 1.0, Dispersion::Relativistic)?
            .normalized()?,
    )
}

/// Lab-frame superposition of one to three nonrelativistic Gaussians.
pub fn random_surface<R: Rng + ?Sized>(grid: SpatialGrid, mass: f64, rng: &mut R) -> Result<SurfaceWaveFunction> {
    let half = grid.length() / 4.0;
    let packets: Vec<(f64, f64, f64, Complex64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            (
                rng.random_range(-half..half),
                rng.random_range(1.0..5.0),
                rng.random_range(-1.0..1.0),
                Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..TAU)),
            )
        })
        .collect();
    let psi = SurfaceWaveFunction::from_fn(grid, HyperplaneLabel::lab(0.0), mass, Dispersion::Nonrelativistic, |x| {
        packets
            .iter()
            .map(|&(c, w, p, a)| {
                let d = grid.separation(x, c);
                a * Complex64::from_polar((-d * d / (4.0 * w * w)).exp(), p * d)
            })
            .sum()
    })?;
    Ok(psi.normalized()?)
}

fn push_chain(table: &mut Table, trajectory: u64, chain: &FlashChain) {
    for e in chain.all_events() {
        table.rows.push(vec![
            Cell::Int(trajectory),
            Cell::Int(e.index as u64),
            Cell::Real(e.t),
            Cell::Real(e.x),
            Cell::Real(e.delta_t),
        ]);
    }
}

/// One record per chain that stopped early, came up short, or is out of
/// time order.
fn chain_failures(ensemble: &str, chains: &[FlashChain], n: usize) -> Vec<serde_json::Value> {
    chains
        .iter()
        .enumerate()
        .filter_map(|(k, ch)| {
            let reason = match &ch.failure {
                Some(f) => f.clone(),
                None if ch.events.len() != n => format!("{} of {n} flashes", ch.events.len()),
                None if !ch.is_time_ordered() => "flashes out of time order".to_string(),
                None => return None,
            };
            Some(serde_json::json!({
                "ensemble": ensemble,
                "chain": k,
                "flashes": ch.events.len(),
                "reason": reason,
            }))
        })
        .collect()
}

fn report_failures(out: &mut Outcome, failures: Vec<serde_json::Value>) {
    let failed = failures.len();
    out.metrics.push(Metric::check("chains_failed", failed as f64, "= 0", failed == 0));
    out.reports.push(("chain_failures.json", serde_json::Value::Array(failures)));
}

fn grw1d(c: &ExperimentConfig) -> Result<Outcome> {
    let (tau, alpha, mass) = (c.get("tau"), c.get("alpha"), c.get("mass"));
    let grid = grid(c)?;
    let mut out = Outcome::default();

    let errors = par_map(c.count("states"), |k| -> Result<f64> {
        let mut rng = stream(sub_seed(c.seed, STATES), k as u64);
        let psi = random_surface(grid, mass, &mut rng)?;
        let p = collapse_location_pdf(&psi, alpha)?;
        Ok((p.iter().sum::<f64>() * grid.dx() - 1.0).abs())
    });
    let norm_error = worst(errors.into_iter().collect::<Result<Vec<_>>>()?);
    out.metrics.push(Metric::check("pdf_normalization_error", norm_error, "< 1e-9", norm_error < 1e-9));

    let n = c.trials;
    let chunks = par_map(n.div_ceil(INTERVAL_CHUNK), |chunk| {
        let mut rng = stream(sub_seed(c.seed, INTERVALS), chunk as u64);
        let len = INTERVAL_CHUNK.min(n - chunk * INTERVAL_CHUNK);
        (0..len).map(|_| sample_interval(tau, &mut rng)).collect::<Vec<_>>()
    });
    // chunks are independent, so resampling whole chunks is enough
    let est = if chunks.len() >= 2 {
        let sums: Vec<(f64, f64)> = chunks.iter().map(|ch| (ch.iter().sum(), ch.len() as f64)).collect();
        ratio_bootstrap(&sums, c.seed)?
    } else {
        bootstrap_mean(&chunks.concat(), c.seed)?
    };
    let xs = chunks.concat();
    let z = (est.mean - tau) / (tau / (n as f64).sqrt());
    out.metrics.push(
        Metric::check("mean_interval", est.mean, format!("= {tau} within 3 sigma"), z.abs() < 3.0)
            .with_ci(est.ci_lo, est.ci_hi),
    );
    out.metrics.push(Metric::info("mean_interval_z", z));
    let (d, p) = ks_exponential(&xs, tau);
    out.metrics.push(Metric::info("ks_statistic", d));
    out.metrics.push(Metric::check("ks_p_value", p, "> 0.01", p > 0.01));

    let prop = Propagator::new(Dispersion::Nonrelativistic, mass)?;
    let collapses = c.count("collapses");
    let rows = par_map(c.count("trajectories"), |k| -> Result<Vec<Vec<Cell>>> {
        let mut rng = stream(sub_seed(c.seed, TRAJECTORIES), k as u64);
        let mut psi = SurfaceWaveFunction::gaussian(
            grid,
            HyperplaneLabel::lab(0.0),
            mass,
            Dispersion::Nonrelativistic,
            0.0,
            1.0 / alpha.sqrt(),
            0.0,
        )?;
        let mut t = 0.0;
        let mut rows = Vec::with_capacity(collapses);
        for index in 1..=collapses {
            let dt = sample_interval(tau, &mut rng);
            t += dt;
            psi = prop.advance(&psi, dt)?;
            let pdf = collapse_location_pdf(&psi, alpha)?;
            let x = sample_position(&grid, &pdf, |_| true, &mut rng).ok_or(Error::NullSupport)?;
            psi = apply_collapse(&psi, &CollapseKernel::lab(x, alpha)?)?.0;
            rows.push(vec![
                Cell::Int(k as u64),
                Cell::Int(index as u64),
                Cell::Real(t),
                Cell::Real(x),
                Cell::Real(dt),
            ]);
        }
        Ok(rows)
    });
    let mut flashes = Table::new("flashes.csv", &FLASHES_HEADER);
    for r in rows {
        flashes.rows.extend(r?);
    }
    out.metrics.push(Metric::info("trajectory_collapses", flashes.rows.len() as f64));
    out.tables.push(flashes);
    Ok(out)
}

fn flash_chain(c: &ExperimentConfig) -> Result<Outcome> {
    let params = FlashParams::new(c.get("tau"), c.get("alpha"))?;
    let grid = grid(c)?;
    let case_alpha = c.get("case_alpha");
    let mut out = Outcome::default();

    let cases = par_map(c.count("cases"), |k| -> Result<Option<(f64, f64)>> {
        let mut rng = stream(sub_seed(c.seed, SURFACES), k as u64);
        let phi = random_amplitude(&mut rng)?;
        let x = SpacetimePoint::new(rng.random_range(-3.0..3.0), rng.random_range(-10.0..10.0));
        let kernel = CollapseKernel::at(x, case_alpha, rng.random_range(-0.5..0.5))?;
        let via = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        match (
            transported_collapse_via(&phi, x, &kernel, via[0]),
            transported_collapse_via(&phi, x, &kernel, via[1]),
        ) {
            (Ok((a, wa)), Ok((b, wb))) => Ok(Some((a.phase_distance(&b)?, (wa - wb).abs()))),
            (Err(Error::NullSupport), Err(Error::NullSupport)) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e.into()),
        }
    });
    let compared: Vec<(f64, f64)> = cases.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let distance = worst(compared.iter().map(|p| p.0));
    out.metrics.push(Metric::check("surface_equivalence_max", distance, "< 1e-8", distance < 1e-8));
    out.metrics.push(Metric::info("surface_weight_difference_max", worst(compared.iter().map(|p| p.1))));
    out.metrics.push(Metric::info("surface_cases_compared", compared.len() as f64));

    let phi = CovariantAmplitude::gaussian(&grid, 1.0, Dispersion::Relativistic, SpacetimePoint::ORIGIN, c.get("width"), 0.0)?;
    let n = c.count("flashes");
    let seed = sub_seed(c.seed, CHAINS);
    let chains = par_map(c.trials, |k| {
        simulate_chain(&phi, FlashEvent::seed(SpacetimePoint::ORIGIN), n, &params, seed, k as u64)
    });
    report_failures(&mut out, chain_failures("rest", &chains, n));
    let dts: Vec<f64> = chains.iter().flat_map(|ch| ch.coordinate_intervals()).collect();
    if !dts.is_empty() {
        out.metrics.push(Metric::info("mean_dt_over_tau", mean(&dts) / params.tau));
    }
    let mut flashes = Table::new("flashes.csv", &FLASHES_HEADER);
    for (k, ch) in chains.iter().enumerate() {
        push_chain(&mut flashes, k as u64, ch);
    }
    out.tables.push(flashes);
    Ok(out)
}

fn dilation(c: &ExperimentConfig) -> Result<Outcome> {
    let params = FlashParams::new(c.get("tau"), c.get("alpha"))?;
    let grid = grid(c)?;
    let n = c.count("flashes");
    let mut out = Outcome::default();
    let mut table = Table::new("dilation.csv", &DILATION_HEADER);
    let mut flashes = Table::new("flashes.csv", &FLASHES_HEADER);
    let mut failures = Vec::new();
    for (e, &eta) in DILATION_RAPIDITIES.iter().enumerate() {
        let phi = CovariantAmplitude::boosted_gaussian(&grid, 1.0, SpacetimePoint::ORIGIN, c.get("width"), eta)?;
        let seed = sub_seed(c.seed, DILATION + e as u64);
        let chains = par_map(c.trials, |k| {
            simulate_chain(&phi, FlashEvent::seed(SpacetimePoint::ORIGIN), n, &params, seed, k as u64)
        });
        failures.extend(chain_failures(&format!("eta_{eta}"), &chains, n));
        let est = dilation_statistic(&chains)?;
        let expected = eta.cosh();
        let ratio = est.mean / params.tau;
        out.metrics.push(
            Metric::check(
                format!("dilation_eta_{eta}"),
                ratio,
                format!("= cosh({eta}) = {expected:.6} within 5%"),
                (ratio / expected - 1.0).abs() < 0.05,
            )
            .with_ci(est.ci_lo / params.tau, est.ci_hi / params.tau),
        );
        let proper: Vec<f64> = chains.iter().flat_map(|ch| ch.events.iter().map(|ev| ev.delta_t)).collect();
        let mean_proper = mean(&proper);
        out.metrics.push(Metric::info(format!("mean_delta_T_over_tau_eta_{eta}"), mean_proper / params.tau));
        out.metrics.push(Metric::info(
            format!("dt_over_sampled_delta_T_over_cosh_eta_{eta}"),
            est.mean / mean_proper / expected,
        ));
        table.rows.push(vec![Cell::Real(eta), Cell::Real(est.mean), Cell::Real(est.ci_lo), Cell::Real(est.ci_hi)]);
        for (k, ch) in chains.iter().enumerate() {
            push_chain(&mut flashes, (e * c.trials + k) as u64, ch);
        }
    }
    report_failures(&mut out, failures);
    out.tables.push(table);
    out.tables.push(flashes);
    Ok(out)
}

/// Proper intervals between consecutive flashes, from coordinates in the
/// frame of rapidity `frame`.
fn proper_intervals(chain: &FlashChain, frame: f64) -> Vec<f64> {
    let points: Vec<SpacetimePoint> = chain.all_events().map(|e| e.point().in_frame(frame)).collect();
    points
        .windows(2)
        .map(|w| ((w[1].t - w[0].t).powi(2) - (w[1].x - w[0].x).powi(2)).sqrt())
        .collect()
}

fn covariance(c: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (eta, dt) = (c.get("eta"), c.get("dt"));
    let defects = par_map(c.trials, |k| -> Result<f64> {
        let mut rng = stream(sub_seed(c.seed, STATES), k as u64);
        let phi = random_amplitude(&mut rng)?;
        Ok(covariance_defect(&phi, &HyperplaneLabel::lab(0.0), &HyperplaneLabel::lab(dt), eta)?)
    });
    let defect = worst(defects.into_iter().collect::<Result<Vec<_>>>()?);
    out.metrics.push(Metric::check("covariance_defect_max", defect, "<= 1e-8", defect <= 1e-8));

    let params = FlashParams::new(c.get("tau"), c.get("alpha"))?;
    let grid = grid(c)?;
    let (boost, n, width) = (c.get("boost"), c.count("flashes"), c.get("width"));
    let ensemble = |rapidity: f64, tag: u64| -> Result<Vec<FlashChain>> {
        let phi = CovariantAmplitude::boosted_gaussian(&grid, 1.0, SpacetimePoint::ORIGIN, width, rapidity)?;
        let seed = sub_seed(c.seed, tag);
        Ok(par_map(c.count("chains"), |k| {
            simulate_chain(&phi, FlashEvent::seed(SpacetimePoint::ORIGIN), n, &params, seed, k as u64)
        }))
    };
    let rest = ensemble(0.0, REST)?;
    let moving = ensemble(boost, MOVING)?;
    let mut failures = chain_failures("rest", &rest, n);
    failures.extend(chain_failures("boosted", &moving, n));
    report_failures(&mut out, failures);

    let rest_dt: Vec<f64> = rest.iter().flat_map(|ch| proper_intervals(ch, 0.0)).collect();
    let moving_dt: Vec<f64> = moving.iter().flat_map(|ch| proper_intervals(ch, boost)).collect();
    let recorded: Vec<f64> = moving.iter().flat_map(|ch| ch.events.iter().map(|e| e.delta_t)).collect();
    let invariance = worst(moving_dt.iter().zip(&recorded).map(|(a, b)| (a - b).abs() / b));
    out.metrics.push(Metric::info("interval_invariance_max_relative_error", invariance));

    let bins = c.count("bins");
    let edge = |j: usize| {
        if j == bins {
            f64::INFINITY
        } else {
            -params.tau * (1.0 - j as f64 / bins as f64).ln()
        }
    };
    let histogram = |xs: &[f64]| -> Vec<f64> {
        (0..bins)
            .map(|j| xs.iter().filter(|&&x| x >= edge(j) && x < edge(j + 1)).count() as f64)
            .collect()
    };
    let (h_rest, h_moving) = (histogram(&rest_dt), histogram(&moving_dt));
    // rescale the boosted counts to the rest total
    let scale = rest_dt.len() as f64 / moving_dt.len().max(1) as f64;
    let mut table = Table::new("dt_histogram.csv", &["bin_lo", "bin_hi", "rest", "boosted"]);
    let mut max_z: f64 = 0.0;
    for j in 0..bins {
        let (a, b) = (h_rest[j], h_moving[j]);
        let var = a + b * scale * scale;
        if var > 0.0 {
            max_z = max_z.max((a - b * scale).abs() / var.sqrt());
        }
        table.rows.push(vec![Cell::Real(edge(j)), Cell::Real(edge(j + 1)), Cell::Int(a as u64), Cell::Int(b as u64)]);
    }
    out.metrics.push(Metric::check("histogram_max_bin_z", max_z, "< 3", max_z < 3.0));
    out.metrics.push(Metric::info("rest_flashes", rest_dt.len() as f64));
    out.metrics.push(Metric::info("boosted_flashes", moving_dt.len() as f64));
    if !rest_dt.is_empty() && !moving_dt.is_empty() {
        out.metrics.push(Metric::info("rest_mean_delta_T_over_tau", mean(&rest_dt) / params.tau));
        out.metrics.push(Metric::info("boosted_mean_delta_T_over_tau", mean(&moving_dt) / params.tau));
    }
    out.tables.push(table);
    let mut flashes = Table::new("flashes.csv", &FLASHES_HEADER);
    for (k, ch) in rest.iter().chain(&moving).enumerate() {
        push_chain(&mut flashes, k as u64, ch);
    }
    out.tables.push(flashes);
    Ok(out)
}

fn microcausality(c: &ExperimentConfig) -> Result<Outcome> {
    let alpha = c.get("alpha");
    let grid = SpatialGrid::default_relativistic();
    let mut out = Outcome::default();
    let phi = CovariantAmplitude::gaussian(&grid, 1.0, Dispersion::Relativistic, SpacetimePoint::ORIGIN, c.get("width"), 0.0)?;
    let sweep = par_map(SEPARATIONS.len(), |i| {
        let d = SEPARATIONS[i];
        microcausality_defect(&phi, SpacetimePoint::new(0.0, -d / 2.0), SpacetimePoint::new(d / 2.0, d / 2.0), alpha)
    });
    let sweep: Vec<f64> = sweep.into_iter().collect::<std::result::Result<_, _>>()?;
    let mut table = Table::new("microcausality.csv", &["separation", "defect"]);
    for (d, v) in SEPARATIONS.iter().zip(&sweep) {
        table.rows.push(vec![Cell::Real(*d), Cell::Real(*v)]);
        out.metrics.push(Metric::info(format!("defect_at_{d}"), *v));
    }
    let far = worst(SEPARATIONS.iter().zip(&sweep).filter(|(d, _)| **d >= 20.0).map(|(_, v)| *v));
    out.metrics.push(Metric::check("far_defect_max", far, "< 1e-3 at separation >= 20", far < 1e-3));

    let galilean = par_map(c.trials, |k| -> Result<f64> {
        let mut rng = stream(sub_seed(c.seed, POINTS), k as u64);
        let center = SpacetimePoint::new(0.0, rng.random_range(-5.0..5.0));
        let phi = CovariantAmplitude::gaussian(&grid, 1.0, Dispersion::Nonrelativistic, center, rng.random_range(5.0..15.0), 0.0)?;
        // both kernels near the packet and each other, so the doubly collapsed
        // state stays far above round-off
        let x1 = rng.random_range(-5.0..0.0);
        let x2 = x1 + rng.random_range(1.0..6.0);
        Ok(microcausality_defect(&phi, SpacetimePoint::new(0.0, x1), SpacetimePoint::new(0.0, x2), alpha)?)
    });
    let exact = worst(galilean.into_iter().collect::<Result<Vec<_>>>()?);
    out.metrics.push(Metric::check("nonrelativistic_defect_max", exact, "<= 1e-12", exact <= 1e-12));
    out.tables.push(table);
    Ok(out)
}

fn packet(grid: SpatialGrid, center: f64, width: f64, p0: f64) -> Result<SurfaceWaveFunction> {
    Ok(SurfaceWaveFunction::gaussian(
        grid,
        HyperplaneLabel::lab(0.0),
        1.0,
        Dispersion::Nonrelativistic,
        center,
        width,
        p0,
    )?)
}

fn bell_noncompare(c: &ExperimentConfig) -> Result<Outcome> {
    let params = FlashParams::new(c.get("tau"), c.get("alpha"))?;
    let grid = grid(c)?;
    let (a, w) = (c.get("offset"), c.get("width"));
    let mut out = Outcome::default();
    let bell = bell_state(&packet(grid, -a, w, 0.0)?, &packet(grid, a, w, 0.0)?)?;
    let separable = product_state(&[packet(grid, -a, w, 0.0)?, packet(grid, a, 2.0 * w, 0.0)?])?;
    let (x1, x2) = (SpacetimePoint::new(0.0, -a), SpacetimePoint::new(0.0, a));
    let sigma = HyperplaneLabel::new(c.get("sigma_rapidity"), c.get("sigma_time"))?;
    let seed = sub_seed(c.seed, FRAMES);
    let entangled = frame_comparison_defect(&bell, x1, x2, &sigma, &params, &mut stream(seed, 0))?;
    let control = frame_comparison_defect(&separable, x1, x2, &sigma, &params, &mut stream(seed, 1))?;
    out.metrics.push(Metric::check(
        "bell_trace_distance",
        entangled.trace_distance,
        "> 0.9",
        entangled.trace_distance > 0.9,
    ));
    out.metrics.push(Metric::check(
        "separable_trace_distance",
        control.trace_distance,
        "< 1e-6",
        control.trace_distance < 1e-6,
    ));
    let ns = no_signaling_check(&bell, params.alpha, c.trials, sub_seed(c.seed, SIGNALING))?;
    out.metrics.push(Metric::check("no_signaling_z", ns.z, "|z| < 3", ns.z.abs() < 3.0));
    out.metrics.push(Metric::info("fraction_below_without", ns.without));
    out.metrics.push(Metric::info("fraction_below_with", ns.with));
    out.reports.push((
        "frame_comparison.json",
        serde_json::json!({ "bell": entangled, "separable": control, "no_signaling": ns }),
    ));
    Ok(out)
}

fn factorization(c: &ExperimentConfig) -> Result<Outcome> {
    let alpha = c.get("alpha");
    let grid = grid(c)?;
    let mut out = Outcome::default();
    let defects = par_map(c.trials, |k| -> Result<f64> {
        let mut rng = stream(sub_seed(c.seed, STATES), k as u64);
        let mut f = || packet(grid, rng.random_range(-15.0..15.0), rng.random_range(1.0..4.0), rng.random_range(-1.0..1.0));
        let psi = product_state(&[f()?, f()?])?;
        let points = [Region::Point(rng.random_range(-15.0..15.0)), Region::Point(rng.random_range(-15.0..15.0))];
        let intervals = [Region::Interval(f64::NEG_INFINITY, 0.0), Region::Interval(-3.0, 8.0)];
        Ok(factorization_defect(&psi, &points, alpha)?.max(factorization_defect(&psi, &intervals, alpha)?))
    });
    let separable = worst(defects.into_iter().collect::<Result<Vec<_>>>()?);
    out.metrics.push(Metric::check("separable_defect_max", separable, "< 1e-9", separable < 1e-9));

    let (a, w) = (c.get("offset"), c.get("width"));
    let bell = bell_state(&packet(grid, -a, w, 0.0)?, &packet(grid, a, w, 0.0)?)?;
    let left = Region::Interval(f64::NEG_INFINITY, 0.0);
    let right = Region::Interval(0.0, f64::INFINITY);
    let same = factorization_defect(&bell, &[left, left], alpha)?;
    let opposite = factorization_defect(&bell, &[left, right], alpha)?;
    out.metrics.push(Metric::check("bell_same_side_defect", same, "= 0.25 +- 0.01", (same - 0.25).abs() <= 0.01));
    out.metrics.push(Metric::info("bell_opposite_side_defect", opposite));

    let coarse = SpatialGrid::centered(0.0, 16.0, 16)?;
    let couplings: Vec<f64> = [0.0, 0.125, 0.25, 0.5, 1.0].iter().map(|f| f * c.get("coupling_max")).collect();
    let range = c.get("coupling_range");
    let sweep = par_map(couplings.len(), |i| -> Result<f64> {
        let spec = InteractionSpec::new(couplings[i], range)?;
        Ok(interaction_factorization_defect(&spec, &coarse, 1.0, 0, 0.0, 0.25, 1.0)?)
    });
    let sweep: Vec<f64> = sweep.into_iter().collect::<Result<_>>()?;
    let zero = interaction_factorization_defect(&InteractionSpec::new(0.0, range)?, &coarse, 1.0, 1, 0.0, 0.25, 1.0)?
        .max(sweep[0]);
    out.metrics.push(Metric::check("interaction_defect_zero_coupling", zero, "< 1e-9", zero < 1e-9));
    let step = sweep.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    out.metrics.push(Metric::check("interaction_defect_min_increase", step, "> 0 (strictly increasing)", step > 0.0));
    let mut table = Table::new("interaction.csv", &["coupling", "defect"]);
    for (g, d) in couplings.iter().zip(&sweep) {
        table.rows.push(vec![Cell::Real(*g), Cell::Real(*d)]);
    }
    out.tables.push(table);
    Ok(out)
}

fn amplification(c: &ExperimentConfig) -> Result<Outcome> {
    let params = FlashParams::new(c.get("tau"), c.get("alpha"))?;
    let grid = grid(c)?;
    let (a, w) = (c.get("offset"), c.get("width"));
    let mut out = Outcome::default();
    let runs = par_map(PARTICLE_NUMBERS.len(), |i| {
        let n = PARTICLE_NUMBERS[i];
        amplification_rate(n, &grid, a, w, &params, c.trials, sub_seed(c.seed, AMPLIFICATION + n as u64))
    });
    let runs = runs.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let base = runs[0].rate;
    out.metrics.push(
        Metric::info("rate_n1_times_tau", base * params.tau)
            .with_ci(runs[0].rate_ci.0 * params.tau, runs[0].rate_ci.1 * params.tau),
    );
    let mut table = Table::new("amplification.csv", &["n", "rate", "ci_lo", "ci_hi", "mean_flashes"]);
    for r in &runs {
        let n = r.n_particles as f64;
        let ratio = r.rate / base;
        out.metrics.push(Metric::check(
            format!("rate_ratio_n{}", r.n_particles),
            ratio,
            format!("= {n} within 20%"),
            (ratio / n - 1.0).abs() < 0.2,
        ));
        table.rows.push(vec![
            Cell::Int(r.n_particles as u64),
            Cell::Real(r.rate),
            Cell::Real(r.rate_ci.0),
            Cell::Real(r.rate_ci.1),
            Cell::Real(r.mean_flashes),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

fn fock_macro(c: &ExperimentConfig) -> Result<Outcome> {
    let spec = BlobSpec {
        d: c.get("d"),
        r: c.get("r"),
        eps: c.get("eps"),
        alpha: c.get("alpha"),
    };
    let r = macro_failure_report(&spec, c.count("modes"), c.count("fermions"))?;
    let mut out = Outcome::default();
    let m = &mut out.metrics;
    m.push(Metric::info("dimension", r.dimension as f64));
    m.push(Metric::check("total_number_residual", r.total_number.residual, "= 0", r.total_number.residual == 0.0));
    m.push(Metric::check("left_number_residual", r.left_number.residual, "= 0", r.left_number.residual == 0.0));
    m.push(Metric::check("a1_number_residual", r.a1_number_residual, "> 0.1", r.a1_number_residual > 0.1));
    m.push(Metric::check("fidelity", r.fidelity, ">= 0.99", r.fidelity >= 0.99));
    m.push(Metric::check(
        "suppressed_amplitude",
        r.suppressed_amplitude,
        "< 1e-4",
        r.suppressed_amplitude < 1e-4,
    ));
    for (i, s) in r.object2_schmidt.iter().take(2).enumerate() {
        m.push(Metric::check(
            format!("object2_schmidt_{}", i + 1),
            *s,
            "= 1/sqrt(2) within 1e-3",
            (s - FRAC_1_SQRT_2).abs() <= 1e-3,
        ));
    }
    let rank = r.object2_schmidt.iter().filter(|s| **s > 1e-3).count();
    m.push(Metric::check("object2_schmidt_rank", rank as f64, "= 2", rank == 2));
    m.push(Metric::check(
        "earliest_object2_flash_time",
        r.earliest_object2_flash_time,
        format!("= 2d = {}", 2.0 * spec.d),
        r.earliest_object2_flash_time == 2.0 * spec.d,
    ));
    m.push(Metric::info("collapse_weight", r.collapse_weight));
    out.reports.push(("fock_report.json", serde_json::to_value(&r)?));
    Ok(out)
}
