//! Single-particle states: the frame-independent [`CovariantAmplitude`] and
//! its views [`SurfaceWaveFunction`] on flat hyperplanes.
//!
//! A covariant amplitude `phi(p)` is stored relative to an origin event `O`,
//! so that the positive-energy solution it describes is
//!
//! ```text
//! Phi(t, x) = int dp/(2E) phi(p) exp(i p (x - O.x) - i E (t - O.t))
//! ```
//!
//! Boosts act on momentum arguments, `(L_eta phi)(p) = phi(p cosh eta - E sinh eta)`,
//! and position space uses the Newton-Wigner factor `1/sqrt(2E)` so that
//! `|psi(x)|^2` is a normalized density on every hyperplane. In the
//! nonrelativistic mode the measure is plain `dp` and only lab hyperplanes
//! exist.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{HyperplaneLabel, MomentumGrid, SpacetimePoint, SpatialGrid};
use crate::spectral::{to_momentum, to_position, TrigInterpolant};

/// Fraction of the band (in units of the Nyquist momentum) treated as resolved.
pub const RESOLVED_BAND: f64 = 0.75;
/// Largest norm fraction tolerated outside the resolved band.
pub const ALIASING_TOLERANCE: f64 = 1e-6;
/// Largest norm fraction tolerated next to the periodic seam.
pub const SEAM_TOLERANCE: f64 = 1e-6;
/// Width of the seam guard on each side, as a fraction of the window.
const SEAM_FRACTION: f64 = 1.0 / 32.0;

const NULL_NORM: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    Relativistic,
    Nonrelativistic,
}

impl Dispersion {
    pub fn energy(self, p: f64, mass: f64) -> f64 {
        match self {
            Dispersion::Relativistic => (p * p + mass * mass).sqrt(),
            Dispersion::Nonrelativistic => p * p / (2.0 * mass),
        }
    }

    pub fn group_velocity(self, p: f64, mass: f64) -> f64 {
        match self {
            Dispersion::Relativistic => p / self.energy(p, mass),
            Dispersion::Nonrelativistic => p / mass,
        }
    }

    /// Factor taking covariant amplitudes to position-normalized ones.
    pub(crate) fn nw_factor(self, p: f64, mass: f64) -> f64 {
        match self {
            Dispersion::Relativistic => 1.0 / (2.0 * self.energy(p, mass)).sqrt(),
            Dispersion::Nonrelativistic => 1.0,
        }
    }
}

/// States that carry their own inner product.
pub trait Normalize: Sized {
    fn norm_sqr(&self) -> f64;
    fn scaled(&self, factor: f64) -> Self;

    fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > NULL_NORM) || !n2.is_finite() {
            return Err(Error::NullState);
        }
        Ok(self.scaled(1.0 / n2.sqrt()))
    }
}

/// Returns `state / ||state||`.
pub fn normalize<S: Normalize>(state: &S) -> Result<S> {
    state.normalized()
}

/// Frame-independent positive-energy momentum amplitude of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantAmplitude {
    momentum: MomentumGrid,
    origin: SpacetimePoint,
    amplitudes: Vec<Complex64>,
    mass: f64,
    dispersion: Dispersion,
}

impl CovariantAmplitude {
    /// Builds an amplitude from covariant samples `phi(p_k)` in FFT order.
    pub fn new(
        momentum: MomentumGrid,
        origin: SpacetimePoint,
        amplitudes: Vec<Complex64>,
        mass: f64,
        dispersion: Dispersion,
    ) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("{mass} is not positive")));
        }
        if amplitudes.len() != momentum.len() {
            return Err(Error::Incompatible(format!(
                "{} amplitudes for {} momenta",
                amplitudes.len(),
                momentum.len()
            )));
        }
        Ok(Self {
            momentum,
            origin,
            amplitudes,
            mass,
            dispersion,
        })
    }

    /// Builds an amplitude from position-normalized momentum samples
    /// `g(p) = phi(p) / sqrt(2E)` (relativistic) or `g = phi` (Galilean).
    pub fn from_position_normalized(
        momentum: MomentumGrid,
        origin: SpacetimePoint,
        g: Vec<Complex64>,
        mass: f64,
        dispersion: Dispersion,
    ) -> Result<Self> {
        let mut this = Self::new(momentum, origin, g, mass, dispersion)?;
        for (k, a) in this.amplitudes.iter_mut().enumerate() {
            *a /= dispersion.nw_factor(momentum.p(k), mass);
        }
        Ok(this)
    }

    /// Normalized Gaussian packet centred on `center` with density width
    /// `width` and lab-frame mean momentum `momentum`.
    pub fn gaussian(
        grid: &SpatialGrid,
        mass: f64,
        dispersion: Dispersion,
        center: SpacetimePoint,
        width: f64,
        momentum: f64,
    ) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("{width} is not positive")));
        }
        let mg = grid.momentum_grid();
        let g = (0..mg.len())
            .map(|k| {
                let dp = mg.p(k) - momentum;
                Complex64::new((-dp * dp * width * width).exp(), 0.0)
            })
            .collect();
        Self::from_position_normalized(mg, center, g, mass, dispersion)?.normalized()
    }

    /// A Gaussian at rest (density width `width`) viewed from a frame in
    /// which it moves with rapidity `rapidity`; the exact Lorentz image of
    /// the rest packet.
    pub fn boosted_gaussian(
        grid: &SpatialGrid,
        mass: f64,
        center: SpacetimePoint,
        width: f64,
        rapidity: f64,
    ) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("{width} is not positive")));
        }
        let d = Dispersion::Relativistic;
        let mg = grid.momentum_grid();
        let (s, c) = (rapidity.sinh(), rapidity.cosh());
        let phi = (0..mg.len())
            .map(|k| {
                let q = mg.p(k);
                let p = q * c - d.energy(q, mass) * s;
                let rest = (2.0 * d.energy(p, mass)).sqrt() * (-p * p * width * width).exp();
                Complex64::new(rest, 0.0)
            })
            .collect();
        Self::new(mg, center, phi, mass, d)?.normalized()
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        self.momentum
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.momentum.momenta()
    }

    pub fn origin(&self) -> SpacetimePoint {
        self.origin
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    pub fn energy(&self, p: f64) -> f64 {
        self.dispersion.energy(p, self.mass)
    }

    /// Position-normalized lab momentum amplitudes `g(p_k)` at the origin.
    pub fn position_normalized(&self) -> Vec<Complex64> {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * self.dispersion.nw_factor(self.momentum.p(k), self.mass))
            .collect()
    }

    /// Same physical state, amplitudes re-expressed about a new origin event.
    pub fn rebased(&self, origin: SpacetimePoint) -> Self {
        let dt = origin.t - self.origin.t;
        let dx = origin.x - self.origin.x;
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let p = self.momentum.p(k);
                a * Complex64::from_polar(1.0, p * dx - self.energy(p) * dt)
            })
            .collect();
        Self {
            amplitudes,
            origin,
            ..self.clone()
        }
    }

    /// Same amplitude samples attached to a different origin event.
    pub(crate) fn with_origin(&self, origin: SpacetimePoint) -> Self {
        Self {
            origin,
            ..self.clone()
        }
    }

    /// Amplitudes with every sample multiplied by `f(p)`; origin unchanged.
    pub(crate) fn map_momentum(&self, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * f(self.momentum.p(k)))
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// Expected lab momentum.
    pub fn mean_momentum(&self) -> f64 {
        let g = self.position_normalized();
        let num: f64 = g
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * self.momentum.p(k))
            .sum();
        let den: f64 = g.iter().map(|c| c.norm_sqr()).sum();
        num / den
    }

    /// Fraction of the norm outside the resolved band.
    pub fn band_leakage(&self) -> f64 {
        band_leakage(&self.position_normalized(), &self.momentum)
    }

    pub(crate) fn covariant_inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, (a, b)) in self.amplitudes.iter().zip(&other.amplitudes).enumerate() {
            let w = self.dispersion.nw_factor(self.momentum.p(k), self.mass);
            acc += a.conj() * b * w * w;
        }
        acc * self.momentum.dp()
    }

    /// Invariant inner product; `other` is rebased onto this origin first.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.momentum != other.momentum
            || self.mass != other.mass
            || self.dispersion != other.dispersion
        {
            return Err(Error::Incompatible(
                "amplitudes live on different momentum grids or mass shells".into(),
            ));
        }
        Ok(self.covariant_inner(&other.rebased(self.origin)))
    }

    /// `1 - |<a|b>|^2 / (<a|a><b|b>)`, insensitive to global phase.
    pub fn infidelity(&self, other: &Self) -> Result<f64> {
        let ab = self.inner(other)?;
        let aa = self.norm_sqr();
        let bb = other.norm_sqr();
        Ok((1.0 - ab.norm_sqr() / (aa * bb)).max(0.0))
    }

    /// Invariant-norm distance `||a - b||`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.inner(other)?;
        let other = other.rebased(self.origin);
        let diff = Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        };
        Ok(diff.norm_sqr().max(0.0).sqrt())
    }

    /// Norm distance after removing the optimal global phase.
    pub fn phase_distance(&self, other: &Self) -> Result<f64> {
        let other = other.rebased(self.origin);
        let ab = self.covariant_inner(&other);
        let phase = if ab.norm() > 0.0 {
            ab / ab.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let diff = Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a * phase - b)
                .collect(),
            ..self.clone()
        };
        Ok(diff.norm_sqr().max(0.0).sqrt())
    }

    /// Frame-`eta` momentum amplitude, position-normalized, at the origin
    /// event: `f(p) = phi(p cosh eta + E sinh eta) / sqrt(2E(p))`.
    fn boosted_position_normalized(&self, eta: f64, out: &MomentumGrid) -> Result<Vec<Complex64>> {
        let native = self.position_normalized();
        if eta == 0.0 && *out == self.momentum {
            return Ok(native);
        }
        if self.dispersion == Dispersion::Nonrelativistic && eta != 0.0 {
            return Err(Error::GalileanBoost);
        }
        let window = self.momentum.spatial(0.0);
        let interp = TrigInterpolant::new(&to_position(&native, &window, 0.0), &window, 0.0);
        let p_max = self.momentum.p_max();
        let (s, c) = (eta.sinh(), eta.cosh());
        Ok((0..out.len())
            .map(|k| {
                let p = out.p(k);
                let q = p * c + self.energy(p) * s;
                if q.abs() >= p_max {
                    return Complex64::new(0.0, 0.0);
                }
                let ratio = self.dispersion.nw_factor(p, self.mass)
                    / self.dispersion.nw_factor(q, self.mass);
                interp.eval(q) * ratio
            })
            .collect())
    }

    /// The positive-energy solution on hyperplane `label`, sampled on `grid`
    /// (frame coordinates), without renormalization.
    pub fn restrict_unnormalized(
        &self,
        label: &HyperplaneLabel,
        grid: &SpatialGrid,
    ) -> Result<SurfaceWaveFunction> {
        if self.dispersion == Dispersion::Nonrelativistic && label.rapidity != 0.0 {
            return Err(Error::GalileanBoost);
        }
        let leak = self.band_leakage();
        if leak > ALIASING_TOLERANCE {
            return Err(Error::UnderResolved(format!(
                "{leak:.2e} of the norm lies outside the resolved band"
            )));
        }
        let out = grid.momentum_grid();
        let eta = label.rapidity;
        let o = self.origin.in_frame(eta);
        let dt = label.time - o.t;
        let mut f = self.boosted_position_normalized(eta, &out)?;
        for (k, v) in f.iter_mut().enumerate() {
            let p = out.p(k);
            *v *= Complex64::from_polar(1.0, -self.energy(p) * dt);
        }
        let leak = band_leakage(&f, &out);
        if leak > ALIASING_TOLERANCE {
            return Err(Error::UnderResolved(format!(
                "{leak:.2e} of the boosted norm lies outside the resolved band"
            )));
        }
        let amplitudes = to_position(&f, grid, o.x);
        let psi = SurfaceWaveFunction {
            grid: *grid,
            hyperplane: *label,
            amplitudes,
            mass: self.mass,
            dispersion: self.dispersion,
        };
        psi.check_seam()?;
        Ok(psi)
    }
}

impl Normalize for CovariantAmplitude {
    /// `int dp/(2E) |phi|^2` (relativistic) or `int dp |phi|^2` (Galilean).
    fn norm_sqr(&self) -> f64 {
        self.covariant_inner(self).re
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }
}

fn band_leakage(g: &[Complex64], grid: &MomentumGrid) -> f64 {
    let cut = RESOLVED_BAND * grid.p_max();
    let mut total = 0.0;
    let mut outside = 0.0;
    for (k, c) in g.iter().enumerate() {
        let w = c.norm_sqr();
        total += w;
        if grid.p(k).abs() > cut {
            outside += w;
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

/// Complex amplitudes on a grid of a flat hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceWaveFunction {
    grid: SpatialGrid,
    hyperplane: HyperplaneLabel,
    amplitudes: Vec<Complex64>,
    mass: f64,
    dispersion: Dispersion,
}

impl SurfaceWaveFunction {
    pub fn new(
        grid: SpatialGrid,
        hyperplane: HyperplaneLabel,
        amplitudes: Vec<Complex64>,
        mass: f64,
        dispersion: Dispersion,
    ) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::Incompatible(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("{mass} is not positive")));
        }
        if dispersion == Dispersion::Nonrelativistic && hyperplane.rapidity != 0.0 {
            return Err(Error::GalileanBoost);
        }
        Ok(Self {
            grid,
            hyperplane,
            amplitudes,
            mass,
            dispersion,
        })
    }

    /// Samples `f(x)` on the grid.
    pub fn from_fn(
        grid: SpatialGrid,
        hyperplane: HyperplaneLabel,
        mass: f64,
        dispersion: Dispersion,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let amplitudes = grid.positions().map(f).collect();
        Self::new(grid, hyperplane, amplitudes, mass, dispersion)
    }

    /// Normalized Gaussian with density width `width` and mean momentum
    /// `momentum`, centred on `center` (minimum image on periodic grids).
    pub fn gaussian(
        grid: SpatialGrid,
        hyperplane: HyperplaneLabel,
        mass: f64,
        dispersion: Dispersion,
        center: f64,
        width: f64,
        momentum: f64,
    ) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("{width} is not positive")));
        }
        Self::from_fn(grid, hyperplane, mass, dispersion, |x| {
            let d = grid.separation(x, center);
            Complex64::from_polar((-d * d / (4.0 * width * width)).exp(), momentum * d)
        })?
        .normalized()
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn hyperplane(&self) -> HyperplaneLabel {
        self.hyperplane
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let n2 = self.norm_sqr();
        self.grid
            .positions()
            .zip(&self.amplitudes)
            .map(|(x, c)| x * c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
            / n2
    }

    pub fn position_variance(&self) -> f64 {
        let n2 = self.norm_sqr();
        let mean = self.mean_position();
        self.grid
            .positions()
            .zip(&self.amplitudes)
            .map(|(x, c)| (x - mean).powi(2) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
            / n2
    }

    /// Momentum amplitudes relative to the grid centre (FFT order).
    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        to_momentum(&self.amplitudes, &self.grid, self.grid.center())
    }

    pub fn mean_momentum(&self) -> f64 {
        let f = self.momentum_amplitudes();
        let mg = self.grid.momentum_grid();
        let num: f64 = f.iter().enumerate().map(|(k, c)| mg.p(k) * c.norm_sqr()).sum();
        let den: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        num / den
    }

    /// Conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid || !self.hyperplane.same_as(&other.hyperplane) {
            return Err(Error::Incompatible(
                "states live on different grids or hyperplanes".into(),
            ));
        }
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    /// Norm distance after removing the optimal global phase.
    pub fn phase_distance(&self, other: &Self) -> Result<f64> {
        let ab = self.inner(other)?;
        let phase = if ab.norm() > 0.0 {
            ab / ab.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let s: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a * phase - b).norm_sqr())
            .sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid || !self.hyperplane.same_as(&other.hyperplane) {
            return Err(Error::Incompatible(
                "states live on different grids or hyperplanes".into(),
            ));
        }
        let s: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    pub(crate) fn check_seam(&self) -> Result<()> {
        if !self.grid.periodic() {
            return Ok(());
        }
        let n = self.grid.len();
        let guard = ((n as f64 * SEAM_FRACTION).ceil() as usize).max(1);
        let total: f64 = self.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if total <= 0.0 {
            return Ok(());
        }
        let edge: f64 = self.amplitudes[..guard]
            .iter()
            .chain(&self.amplitudes[n - guard..])
            .map(|c| c.norm_sqr())
            .sum();
        if edge / total > SEAM_TOLERANCE {
            return Err(Error::UnderResolved(format!(
                "{:.2e} of the norm sits at the periodic seam",
                edge / total
            )));
        }
        Ok(())
    }

    fn band_leakage(&self) -> f64 {
        band_leakage(&self.momentum_amplitudes(), &self.grid.momentum_grid())
    }

    /// Lifts this hyperplane view to the covariant amplitude, preserving norm.
    pub fn lift(&self) -> Result<CovariantAmplitude> {
        lift(self)
    }
}

impl Normalize for SurfaceWaveFunction {
    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    fn scaled(&self, factor: f64) -> Self {
        self.with_amplitudes(self.amplitudes.iter().map(|a| a * factor).collect())
    }
}

/// The normalized wavefunction of `phi` on hyperplane `label`, sampled on
/// `grid` (positions in that frame).
pub fn restrict(
    phi: &CovariantAmplitude,
    label: &HyperplaneLabel,
    grid: &SpatialGrid,
) -> Result<SurfaceWaveFunction> {
    phi.restrict_unnormalized(label, grid)?.normalized()
}

/// Inverse of [`restrict`]: the covariant amplitude whose restriction to
/// `psi`'s hyperplane is `psi`. The origin is placed at the grid centre on
/// that hyperplane.
pub fn lift(psi: &SurfaceWaveFunction) -> Result<CovariantAmplitude> {
    let eta = psi.hyperplane.rapidity;
    if psi.dispersion == Dispersion::Nonrelativistic && eta != 0.0 {
        return Err(Error::GalileanBoost);
    }
    let leak = psi.band_leakage();
    if leak > ALIASING_TOLERANCE {
        return Err(Error::UnderResolved(format!(
            "{leak:.2e} of the norm lies outside the resolved band"
        )));
    }
    psi.check_seam()?;
    let grid = psi.grid;
    let center = grid.center();
    let origin = psi.hyperplane.point_at(center);
    let mg = grid.momentum_grid();
    let g = if eta == 0.0 {
        to_momentum(&psi.amplitudes, &grid, center)
    } else {
        let interp = TrigInterpolant::new(&psi.amplitudes, &grid, center);
        let p_max = mg.p_max();
        let (s, c) = (eta.sinh(), eta.cosh());
        let d = psi.dispersion;
        (0..mg.len())
            .map(|k| {
                let q = mg.p(k);
                let p = q * c - d.energy(q, psi.mass) * s;
                if p.abs() >= p_max {
                    return Complex64::new(0.0, 0.0);
                }
                interp.eval(p) * d.nw_factor(q, psi.mass) / d.nw_factor(p, psi.mass)
            })
            .collect()
    };
    CovariantAmplitude::from_position_normalized(mg, origin, g, psi.mass, psi.dispersion)
}

/// The same physical state seen from a frame boosted by `eta` relative to
/// `psi`'s frame, on the corresponding hyperplane of that frame.
pub fn boost_state(psi: &SurfaceWaveFunction, eta: f64) -> Result<SurfaceWaveFunction> {
    if psi.dispersion == Dispersion::Nonrelativistic {
        return Err(Error::GalileanBoost);
    }
    if eta == 0.0 {
        return Ok(psi.clone());
    }
    let label = HyperplaneLabel::new(psi.hyperplane.rapidity + eta, psi.hyperplane.time)?;
    restrict(&lift(psi)?, &label, &psi.grid)
}
