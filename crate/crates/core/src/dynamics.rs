//! Free unitary evolution between flat hyperplanes.
//!
//! Free evolution is diagonal in momentum, so nothing is time-stepped. A
//! covariant amplitude already describes the state on every hyperplane;
//! [`evolve`] therefore keeps the physical state and re-expresses its
//! amplitudes about the anchor of the target hyperplane, which is exactly the
//! Schrödinger-picture propagator phase `exp(-i (E dt - p dx))`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{HyperplaneLabel, SpacetimePoint, SpatialGrid};
use crate::hilbert::{restrict, CovariantAmplitude, Dispersion, SurfaceWaveFunction};
use crate::spectral::{to_momentum, to_position};

/// Diagonal free propagator for one particle species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    dispersion: Dispersion,
    mass: f64,
    phase_skew: f64,
}

impl Propagator {
    pub fn new(dispersion: Dispersion, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", format!("{mass} is not positive")));
        }
        Ok(Self {
            dispersion,
            mass,
            phase_skew: 0.0,
        })
    }

    pub fn for_amplitude(phi: &CovariantAmplitude) -> Self {
        Self {
            dispersion: phi.dispersion(),
            mass: phi.mass(),
            phase_skew: 0.0,
        }
    }

    /// Fault injection: adds `skew * p^2 * dt` to the phase, breaking covariance.
    pub fn with_phase_skew(mut self, skew: f64) -> Self {
        self.phase_skew = skew;
        self
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Phase acquired by momentum `p` under a translation by `(dt, dx)`.
    pub fn phase(&self, p: f64, dt: f64, dx: f64) -> Complex64 {
        let e = self.dispersion.energy(p, self.mass);
        Complex64::from_polar(1.0, p * dx - e * dt - self.phase_skew * p * p * dt)
    }

    /// Applies the translation phase and moves the origin by `delta`.
    pub fn translate(&self, phi: &CovariantAmplitude, delta: SpacetimePoint) -> CovariantAmplitude {
        let shifted = phi.map_momentum(|p| self.phase(p, delta.t, delta.x));
        let origin = SpacetimePoint::new(phi.origin().t + delta.t, phi.origin().x + delta.x);
        shifted.with_origin(origin)
    }

    /// Evolves a hyperplane wavefunction by frame time `dt` within its own frame.
    pub fn advance(&self, psi: &SurfaceWaveFunction, dt: f64) -> Result<SurfaceWaveFunction> {
        let grid = psi.grid();
        let mg = grid.momentum_grid();
        let mut f = to_momentum(psi.amplitudes(), grid, grid.center());
        for (k, v) in f.iter_mut().enumerate() {
            *v *= self.phase(mg.p(k), dt, 0.0);
        }
        let label = HyperplaneLabel::new(psi.hyperplane().rapidity, psi.hyperplane().time + dt)?;
        SurfaceWaveFunction::new(
            *grid,
            label,
            to_position(&f, grid, grid.center()),
            psi.mass(),
            psi.dispersion(),
        )
    }
}

/// Lab coordinates of the frame point `(t, 0)` of a hyperplane.
pub fn anchor(label: &HyperplaneLabel) -> SpacetimePoint {
    label.point_at(0.0)
}

/// Free evolution from hyperplane `from` to hyperplane `to`.
///
/// The result restricts to `to` exactly as the free evolution of the
/// restriction to `from`; its amplitudes carry the propagator phase for the
/// displacement between the two anchors.
pub fn evolve(
    phi: &CovariantAmplitude,
    from: &HyperplaneLabel,
    to: &HyperplaneLabel,
) -> Result<CovariantAmplitude> {
    if phi.dispersion() == Dispersion::Nonrelativistic
        && (from.rapidity != 0.0 || to.rapidity != 0.0)
    {
        return Err(Error::GalileanBoost);
    }
    let a = anchor(from);
    let b = anchor(to);
    let delta = SpacetimePoint::new(b.t - a.t, b.x - a.x);
    Ok(Propagator::for_amplitude(phi).translate(phi, delta))
}

/// `|| U' psi - L^-1 U L psi ||` for the free propagator; see
/// [`covariance_defect_with`].
pub fn covariance_defect(
    phi: &CovariantAmplitude,
    sigma1: &HyperplaneLabel,
    sigma2: &HyperplaneLabel,
    eta: f64,
) -> Result<f64> {
    covariance_defect_with(&Propagator::for_amplitude(phi), phi, sigma1, sigma2, eta)
}

/// Compares two ways of evolving `phi` from `sigma1` to `sigma2` (same frame):
/// directly with `prop`, and by boosting by `eta`, evolving with `prop` in
/// the boosted frame over the same frame time, and boosting back.
pub fn covariance_defect_with(
    prop: &Propagator,
    phi: &CovariantAmplitude,
    sigma1: &HyperplaneLabel,
    sigma2: &HyperplaneLabel,
    eta: f64,
) -> Result<f64> {
    if phi.dispersion() != Dispersion::Relativistic {
        return Err(Error::GalileanBoost);
    }
    if sigma1.rapidity != sigma2.rapidity {
        return Err(invalid("sigma2", "must belong to the frame of sigma1"));
    }
    let frame = sigma1.rapidity;
    let dt = sigma2.time - sigma1.time;
    let window = |rapidity: f64| -> SpatialGrid {
        phi.momentum_grid()
            .spatial(phi.origin().in_frame(rapidity).x)
    };
    let lab_grid = window(frame);
    let psi1 = restrict(phi, sigma1, &lab_grid)?;
    let direct = prop.advance(&psi1, dt)?;

    let boosted_label = HyperplaneLabel::new(frame + eta, sigma1.time)?;
    let boosted = if eta == 0.0 {
        psi1.clone()
    } else {
        restrict(&psi1.lift()?, &boosted_label, &window(frame + eta))?
    };
    let moved = prop.advance(&boosted, dt)?;
    let back = if eta == 0.0 {
        moved
    } else {
        restrict(&moved.lift()?, sigma2, &lab_grid)?
    };
    direct.distance(&back)
}
