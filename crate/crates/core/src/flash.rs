//! The relativistic single-particle flash process.
//!
//! After a flash at `a`, the next flash happens at proper distance `dT ~ Exp(tau)`
//! somewhere on the future hyperboloid `a + dT (cosh chi, sinh chi)`. The
//! location weight of a candidate `x` is `||L(x) psi||^2` evaluated on the lab
//! hyperplane through `x`, times the invariant line element `dT dchi`. The
//! chosen point then collapses the state by the transported kernel, and the
//! post-collapse amplitude is re-expressed about the new flash.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::collapse::{transported_collapse, CollapseKernel};
use crate::error::{invalid, Error, Result};
use crate::geometry::{MomentumGrid, SpacetimePoint, SpatialGrid};
use crate::hilbert::{CovariantAmplitude, Dispersion, SEAM_TOLERANCE};
use crate::random::stream;
use crate::spectral::{fft_in_place, to_position};
use crate::stats::{ratio_bootstrap, Estimate};

pub const DEFAULT_CHI_MAX: f64 = 4.0;
pub const DEFAULT_D_CHI: f64 = 0.01;
/// Largest normalized weight tolerated at either end of the rapidity grid.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Minimum number of chains for a dilation estimate.
pub const MIN_CHAINS: usize = 30;

/// Hard limit for the adaptive rapidity range.
pub const MAX_CHI: f64 = 15.0;

/// Candidates further than this many standard deviations from the ballistic
/// prediction are skipped.
const PRUNE_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlashParams {
    pub tau: f64,
    pub alpha: f64,
    pub chi_max: f64,
    pub d_chi: f64,
}

impl FlashParams {
    pub fn new(tau: f64, alpha: f64) -> Result<Self> {
        Self {
            tau,
            alpha,
            chi_max: DEFAULT_CHI_MAX,
            d_chi: DEFAULT_D_CHI,
        }
        .validated()
    }

    pub fn with_chi_grid(self, chi_max: f64, d_chi: f64) -> Result<Self> {
        Self {
            chi_max,
            d_chi,
            ..self
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        for (name, v) in [
            ("tau", self.tau),
            ("alpha", self.alpha),
            ("chi_max", self.chi_max),
            ("d_chi", self.d_chi),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if self.d_chi > self.chi_max {
            return Err(invalid("d_chi", "larger than chi_max"));
        }
        Ok(self)
    }

    /// Symmetric rapidity grid `-chi_max, ..., chi_max`.
    pub fn chi_grid(&self) -> Vec<f64> {
        let half = (self.chi_max / self.d_chi).round() as i64;
        (-half..=half).map(|k| k as f64 * self.d_chi).collect()
    }
}

/// A flash in lab coordinates with its proper distance from the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlashEvent {
    pub t: f64,
    pub x: f64,
    pub delta_t: f64,
    pub index: usize,
}

impl FlashEvent {
    /// The seed flash, index 0.
    pub fn seed(point: SpacetimePoint) -> Self {
        Self {
            t: point.t,
            x: point.x,
            delta_t: 0.0,
            index: 0,
        }
    }

    pub fn point(&self) -> SpacetimePoint {
        SpacetimePoint::new(self.t, self.x)
    }

    /// Whether `next` is a valid successor: future time-like with the
    /// recorded proper distance (relative tolerance 1e-9).
    pub fn precedes(&self, next: &FlashEvent) -> bool {
        let s2 = self.point().interval_sqr(&next.point());
        let dt2 = next.delta_t * next.delta_t;
        self.point().is_future_timelike_to(&next.point())
            && (s2 - dt2).abs() <= 1e-9 * dt2.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlashChain {
    pub seed_event: FlashEvent,
    pub events: Vec<FlashEvent>,
    pub rng_seed: u64,
    pub rng_stream: u64,
    /// Why the chain stopped early, if it did.
    pub failure: Option<String>,
}

impl FlashChain {
    /// Seed followed by the generated events.
    pub fn all_events(&self) -> impl Iterator<Item = &FlashEvent> {
        std::iter::once(&self.seed_event).chain(&self.events)
    }

    /// Lab coordinate time between consecutive flashes.
    pub fn coordinate_intervals(&self) -> Vec<f64> {
        let all: Vec<_> = self.all_events().collect();
        all.windows(2).map(|w| w[1].t - w[0].t).collect()
    }

    pub fn is_time_ordered(&self) -> bool {
        let all: Vec<_> = self.all_events().collect();
        all.windows(2).all(|w| w[0].precedes(w[1]))
    }
}

/// Future hyperboloid of proper distance `delta_t` above `apex`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperboloid {
    pub apex: SpacetimePoint,
    pub delta_t: f64,
    pub chi: Vec<f64>,
}

impl Hyperboloid {
    pub fn new(apex: SpacetimePoint, delta_t: f64, chi: Vec<f64>) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(invalid("delta_T", format!("{delta_t} is not positive")));
        }
        Ok(Self { apex, delta_t, chi })
    }

    pub fn point(&self, chi: f64) -> SpacetimePoint {
        SpacetimePoint::new(
            self.apex.t + self.delta_t * chi.cosh(),
            self.apex.x + self.delta_t * chi.sinh(),
        )
    }
}

/// Exponential waiting proper time with mean `tau`.
pub fn sample_interval<R: Rng + ?Sized>(tau: f64, rng: &mut R) -> f64 {
    Exp::new(1.0 / tau)
        .expect("tau validated positive")
        .sample(rng)
}

/// The apex amplitude sampled on a decimated momentum grid.
struct Level {
    momentum: MomentumGrid,
    g: Vec<Complex64>,
    energy: Vec<f64>,
    /// Momentum indices carrying non-negligible amplitude.
    support: Vec<usize>,
}

/// Coarsest decimated grid kept, in points.
const MIN_LEVEL_POINTS: usize = 64;

/// Lab amplitude about the apex, shared by every candidate on one hyperboloid.
/// Candidates are evaluated on the shortest window that holds the packet.
struct ApexView {
    /// Level `i` is decimated by `2^i`.
    levels: Vec<Level>,
    mean_x: f64,
    sigma_x: f64,
    mean_v: f64,
    sigma_v: f64,
}

impl ApexView {
    fn new(phi: &CovariantAmplitude) -> Self {
        let mg = phi.momentum_grid();
        let n = mg.len();
        let g = phi.position_normalized();
        let window = mg.spatial(0.0);
        let psi0 = to_position(&g, &window, 0.0);

        let rho: Vec<f64> = psi0.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = rho.iter().sum();
        let mean_x = window.positions().zip(&rho).map(|(x, r)| x * r).sum::<f64>() / total;
        let var_x = window
            .positions()
            .zip(&rho)
            .map(|(x, r)| (x - mean_x).powi(2) * r)
            .sum::<f64>()
            / total;

        let d = phi.dispersion();
        let wp: Vec<f64> = g.iter().map(|c| c.norm_sqr()).collect();
        let total_p: f64 = wp.iter().sum();
        let vel = |k: usize| d.group_velocity(mg.p(k), phi.mass());
        let mean_v = (0..n).map(|k| vel(k) * wp[k]).sum::<f64>() / total_p;
        let var_v = (0..n).map(|k| (vel(k) - mean_v).powi(2) * wp[k]).sum::<f64>() / total_p;

        let peak = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut levels = Vec::new();
        let mut m = 1;
        while n / m >= MIN_LEVEL_POINTS.min(n) {
            let coarse = mg.decimated(m);
            let gk: Vec<Complex64> = (0..coarse.len())
                .map(|k| g[mg.undecimated_index(m, k)])
                .collect();
            levels.push(Level {
                momentum: coarse,
                support: (0..gk.len()).filter(|&k| gk[k].norm() > 1e-17 * peak).collect(),
                energy: (0..coarse.len()).map(|k| d.energy(coarse.p(k), phi.mass())).collect(),
                g: gk,
            });
            m *= 2;
        }
        Self {
            levels,
            mean_x,
            sigma_x: var_x.sqrt(),
            mean_v,
            sigma_v: var_v.sqrt(),
        }
    }

    /// Half-width of the ballistic envelope at lab offset `t`.
    fn envelope(&self, t: f64, alpha: f64) -> f64 {
        let spread = (self.sigma_x.powi(2) + (self.sigma_v * t).powi(2) + 0.5 / alpha).sqrt();
        PRUNE_SIGMAS * spread + 4.0 * self.levels[0].momentum.dx()
    }

    /// Whether the candidate at lab offset `(t, x)` can carry weight, judged
    /// against a ballistic envelope of the state.
    fn plausible(&self, t: f64, x: f64, alpha: f64) -> bool {
        (x - self.mean_x - self.mean_v * t).abs() <= self.envelope(t, alpha)
    }

    /// Lab density at offset `t` on the shortest window that holds the
    /// envelope, refined while the periodic seam carries more than the
    /// tolerance.
    fn lab_density(&self, t: f64, alpha: f64) -> LabDensity {
        let full = self.levels[0].momentum.dx() * self.levels[0].momentum.len() as f64;
        let needed = 2.0 * self.envelope(t, alpha) * 1.1;
        let mut i = 0;
        while i + 1 < self.levels.len() && full / (1 << (i + 1)) as f64 >= needed {
            i += 1;
        }
        let center = self.mean_x + self.mean_v * t;
        loop {
            let density = self.levels[i].density(t, center);
            if i == 0 || density.seam <= SEAM_TOLERANCE {
                return density;
            }
            i -= 1;
        }
    }

    /// Raw weights (including the line element) and their seam error bounds.
    /// Candidates at `chi` and `-chi` lie on the same lab hyperplane, so
    /// they are visited by `|chi|` and share one density.
    fn weights(&self, delta_t: f64, alpha: f64, chi: &[f64], d_chi: f64) -> Vec<(f64, f64)> {
        let mut order: Vec<usize> = (0..chi.len()).collect();
        order.sort_by(|&a, &b| chi[a].abs().total_cmp(&chi[b].abs()));
        let mut out = vec![(0.0, 0.0); chi.len()];
        let mut cached: Option<(f64, LabDensity)> = None;
        for i in order {
            let c = chi[i];
            let (t, x) = (delta_t * c.abs().cosh(), delta_t * c.sinh());
            if !self.plausible(t, x, alpha) {
                continue;
            }
            if cached.as_ref().is_none_or(|(ct, _)| *ct != t) {
                cached = Some((t, self.lab_density(t, alpha)));
            }
            let (_, density) = cached.as_ref().expect("filled above");
            let (w, err) = density.weight(x, alpha);
            out[i] = (w * delta_t * d_chi, err * delta_t * d_chi);
        }
        out
    }
}

/// Lab position density on one window.
struct LabDensity {
    window: SpatialGrid,
    rho: Vec<f64>,
    /// Share of the norm in the seam guard at either end of the window.
    seam: f64,
}

impl LabDensity {
    /// Kernel weight of the candidate `x` and a bound on its seam error (the
    /// kernel-weighted norm in the seam guard plus the weight times the
    /// guard's share of the norm).
    fn weight(&self, x: f64, alpha: f64) -> (f64, f64) {
        let norm = (alpha / PI).sqrt();
        // exp(-alpha d^2) < 1e-20 beyond this distance
        let reach = (46.0 / alpha).sqrt();
        let n = self.rho.len();
        let guard = (n / 32).max(1);
        let (x0, dx) = (self.window.x_min(), self.window.dx());
        let lo = (((x - reach - x0) / dx).floor().max(0.0) as usize).min(n);
        let hi = (((x + reach - x0) / dx).ceil().max(0.0) as usize + 1).min(n);
        let (mut weight, mut edge_weight) = (0.0, 0.0);
        for j in lo..hi {
            let (u, r) = (self.window.x(j), self.rho[j]);
            let d = u - x;
            if d.abs() < reach {
                let w = norm * (-alpha * d * d).exp() * r;
                weight += w;
                if j < guard || j >= n - guard {
                    edge_weight += w;
                }
            }
        }
        (weight * dx, (edge_weight + self.seam * weight) * dx)
    }
}

impl Level {
    /// Lab density at offset `t` on a window centred at `center`.
    fn density(&self, t: f64, center: f64) -> LabDensity {
        // evolution and the window shift folded into one phase, support only
        let window = self.momentum.spatial(center);
        let scale = self.momentum.dp() / (2.0 * PI).sqrt();
        let shift = window.x_min();
        let mut f = vec![Complex64::new(0.0, 0.0); self.g.len()];
        for &k in &self.support {
            let phase = self.momentum.p(k) * shift - self.energy[k] * t;
            f[k] = self.g[k] * Complex64::from_polar(scale, phase);
        }
        fft_in_place(&mut f, true);
        let rho: Vec<f64> = f.iter().map(|a| a.norm_sqr()).collect();
        let n = rho.len();
        let guard = (n / 32).max(1);
        let total: f64 = rho.iter().sum();
        let edge: f64 = rho[..guard].iter().chain(&rho[n - guard..]).sum();
        let seam = if total > 0.0 { edge / total } else { 0.0 };
        LabDensity { window, rho, seam }
    }
}

fn check_apex(phi: &CovariantAmplitude, delta_t: f64, alpha: f64) -> Result<()> {
    if phi.dispersion() != Dispersion::Relativistic {
        return Err(Error::GalileanBoost);
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", format!("{alpha} is not positive")));
    }
    Hyperboloid::new(SpacetimePoint::ORIGIN, delta_t, Vec::new())?;
    Ok(())
}

/// Normalizes raw weights and applies the seam and support checks.
fn finish(raw: &[(f64, f64)]) -> Result<Vec<f64>> {
    let total: f64 = raw.iter().map(|r| r.0).sum();
    if !(total > 1e-300) {
        return Err(Error::NoHyperboloidSupport);
    }
    let err = raw.iter().map(|r| r.1).sum::<f64>() / total;
    if err > SEAM_TOLERANCE {
        return Err(Error::UnderResolved(format!(
            "periodic seam affects {err:.2e} of the hyperboloid weight"
        )));
    }
    Ok(raw.iter().map(|r| r.0 / total).collect())
}

fn end_weight(w: &[f64]) -> f64 {
    w[0].max(w[w.len() - 1])
}

/// Normalized location weights over the rapidity grid `chi` (uniform) for a
/// flash at proper distance `delta_t` above `apex`. Each weight is the Born
/// factor of the lab-frame kernel on the lab hyperplane through the
/// candidate, times the line element `dT dchi`.
pub fn flash_location_pdf(
    phi: &CovariantAmplitude,
    apex: SpacetimePoint,
    delta_t: f64,
    alpha: f64,
    chi: &[f64],
) -> Result<Vec<f64>> {
    check_apex(phi, delta_t, alpha)?;
    if chi.is_empty() {
        return Err(invalid("chi", "empty rapidity grid"));
    }
    let d_chi = if chi.len() > 1 { chi[1] - chi[0] } else { 1.0 };
    let view = ApexView::new(&phi.rebased(apex));
    let w = finish(&view.weights(delta_t, alpha, chi, d_chi))?;
    let end = end_weight(&w);
    if end > TAIL_TOLERANCE {
        return Err(invalid(
            "chi_max",
            format!("hyperboloid weight {end:.2e} reaches the rapidity cutoff"),
        ));
    }
    Ok(w)
}

/// Like [`flash_location_pdf`] on the grid of `params`, but widens the
/// rapidity range in unit steps (same spacing) while weight reaches its ends.
/// Returns the grid actually used and the weights on it.
pub fn adaptive_location_pdf(
    phi: &CovariantAmplitude,
    apex: SpacetimePoint,
    delta_t: f64,
    params: &FlashParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_apex(phi, delta_t, params.alpha)?;
    let view = ApexView::new(&phi.rebased(apex));
    let d_chi = params.d_chi;
    let mut chi = params.chi_grid();
    let mut raw = view.weights(delta_t, params.alpha, &chi, d_chi);
    loop {
        let w = finish(&raw)?;
        let end = end_weight(&w);
        if end <= TAIL_TOLERANCE {
            return Ok((chi, w));
        }
        let reach = chi[chi.len() - 1];
        if reach >= MAX_CHI {
            return Err(invalid(
                "chi_max",
                format!("hyperboloid weight {end:.2e} still present at rapidity {reach:.1}"),
            ));
        }
        let steps = (1.0 / d_chi).round() as i64;
        let base = (reach / d_chi).round() as i64;
        let outer: Vec<f64> = (1..=steps).map(|k| (base + k) as f64 * d_chi).collect();
        let inner: Vec<f64> = outer.iter().rev().map(|c| -c).collect();
        let mut new_raw = view.weights(delta_t, params.alpha, &inner, d_chi);
        new_raw.extend(raw);
        new_raw.extend(view.weights(delta_t, params.alpha, &outer, d_chi));
        raw = new_raw;
        chi = inner.into_iter().chain(chi).chain(outer).collect();
    }
}

/// Draws an index from normalized weights.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// One step of the Markov chain: when, where, and the post-collapse state
/// (with its origin at the new flash).
pub fn next_flash<R: Rng + ?Sized>(
    phi: &CovariantAmplitude,
    previous: &FlashEvent,
    params: &FlashParams,
    rng: &mut R,
) -> Result<(FlashEvent, CovariantAmplitude)> {
    let delta_t = sample_interval(params.tau, rng);
    let apex = previous.point();
    let (chi, pdf) = adaptive_location_pdf(phi, apex, delta_t, params)?;
    let c = chi[sample_index(&pdf, rng)];
    let x = Hyperboloid::new(apex, delta_t, Vec::new())?.point(c);
    let kernel = CollapseKernel::at(x, params.alpha, 0.0)?;
    let (post, _) = transported_collapse(&phi.rebased(apex), x, &kernel)?;
    let event = FlashEvent {
        t: x.t,
        x: x.x,
        delta_t,
        index: previous.index + 1,
    };
    Ok((event, post))
}

/// `n` flashes after `seed_event`, driven by stream `rng_stream` of `rng_seed`.
/// A failing step ends the chain and is recorded in `failure`.
pub fn simulate_chain(
    initial: &CovariantAmplitude,
    seed_event: FlashEvent,
    n: usize,
    params: &FlashParams,
    rng_seed: u64,
    rng_stream: u64,
) -> FlashChain {
    let mut rng = stream(rng_seed, rng_stream);
    let mut chain = FlashChain {
        seed_event,
        events: Vec::with_capacity(n),
        rng_seed,
        rng_stream,
        failure: None,
    };
    let mut phi = initial.clone();
    let mut previous = seed_event;
    for _ in 0..n {
        match next_flash(&phi, &previous, params, &mut rng) {
            Ok((event, post)) => {
                if !previous.precedes(&event) {
                    chain.failure = Some(format!(
                        "flash {} is not future time-like from flash {}",
                        event.index, previous.index
                    ));
                    break;
                }
                chain.events.push(event);
                previous = event;
                phi = post;
            }
            Err(e) => {
                chain.failure = Some(e.to_string());
                break;
            }
        }
    }
    chain
}

/// Mean lab coordinate interval between consecutive flashes, pooled over
/// chains, with a bootstrap interval that resamples whole chains.
pub fn dilation_statistic(chains: &[FlashChain]) -> Result<Estimate> {
    if chains.len() < MIN_CHAINS {
        return Err(Error::InsufficientData(format!(
            "{} chains, need at least {MIN_CHAINS}",
            chains.len()
        )));
    }
    let groups: Vec<(f64, f64)> = chains
        .iter()
        .map(|c| {
            let dts = c.coordinate_intervals();
            (dts.iter().sum(), dts.len() as f64)
        })
        .collect();
    if groups.iter().map(|g| g.1).sum::<f64>() < 2.0 {
        return Err(Error::InsufficientData("fewer than 2 intervals".into()));
    }
    ratio_bootstrap(&groups, chains[0].rng_seed)
}
