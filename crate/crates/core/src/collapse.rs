//! The GRW localization operator and its transport between hyperplanes.
//!
//! On the constant-time hyperplanes of the kernel's frame the operator is the
//! multiplier `(alpha/pi)^(1/4) exp(-alpha (x - x_c)^2 / 2)`. On any other
//! hyperplane it is defined by transport: restrict to the kernel's hyperplane
//! through the collapse point, multiply, lift back. The lifted amplitude is
//! then the post-collapse state on every hyperplane through that point.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::geometry::{HyperplaneLabel, SpacetimePoint, SpatialGrid};
use crate::hilbert::{lift, restrict, CovariantAmplitude, Normalize, SurfaceWaveFunction};

/// Smallest kernel width accepted, in grid spacings.
pub const MIN_WIDTH_SPACINGS: f64 = 2.0;
/// Born weights below this are treated as a modeling error.
pub const NULL_WEIGHT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseKernel {
    /// Centre in the kernel frame's spatial coordinate.
    pub center: f64,
    pub alpha: f64,
    /// Rapidity of the frame whose constant-time hyperplanes carry the plain
    /// Gaussian action.
    pub frame: f64,
}

impl CollapseKernel {
    pub fn new(center: f64, alpha: f64, frame: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("{alpha} is not positive")));
        }
        if !center.is_finite() {
            return Err(invalid("center", "not finite"));
        }
        if !frame.is_finite() {
            return Err(invalid("frame", "not finite"));
        }
        Ok(Self {
            center,
            alpha,
            frame,
        })
    }

    pub fn lab(center: f64, alpha: f64) -> Result<Self> {
        Self::new(center, alpha, 0.0)
    }

    /// Kernel of frame `frame` centred on the lab event `point`.
    pub fn at(point: SpacetimePoint, alpha: f64, frame: f64) -> Result<Self> {
        Self::new(point.in_frame(frame).x, alpha, frame)
    }

    pub fn width(&self) -> f64 {
        1.0 / self.alpha.sqrt()
    }

    /// Multiplier value at distance `d` from the centre.
    pub fn profile(&self, d: f64) -> f64 {
        (self.alpha / PI).powf(0.25) * (-0.5 * self.alpha * d * d).exp()
    }

    pub(crate) fn check_resolved(&self, grid: &SpatialGrid) -> Result<()> {
        if self.width() < MIN_WIDTH_SPACINGS * grid.dx() {
            return Err(Error::UnderResolved(format!(
                "collapse width {:.3} is below {MIN_WIDTH_SPACINGS} grid spacings",
                self.width()
            )));
        }
        Ok(())
    }
}

/// `L psi` without normalization.
pub fn collapse_multiply(psi: &SurfaceWaveFunction, k: &CollapseKernel) -> Result<SurfaceWaveFunction> {
    if psi.hyperplane().rapidity != k.frame {
        return Err(Error::Incompatible(format!(
            "kernel acts in frame {} but the state lives in frame {}",
            k.frame,
            psi.hyperplane().rapidity
        )));
    }
    let grid = psi.grid();
    k.check_resolved(grid)?;
    let amplitudes = grid
        .positions()
        .zip(psi.amplitudes())
        .map(|(x, a)| a * k.profile(grid.separation(x, k.center)))
        .collect();
    SurfaceWaveFunction::new(
        *grid,
        psi.hyperplane(),
        amplitudes,
        psi.mass(),
        psi.dispersion(),
    )
}

/// Applies the kernel and normalizes; the weight is `||L psi||^2`.
pub fn apply_collapse(
    psi: &SurfaceWaveFunction,
    k: &CollapseKernel,
) -> Result<(SurfaceWaveFunction, f64)> {
    let out = collapse_multiply(psi, k)?;
    let weight = out.norm_sqr();
    if !(weight >= NULL_WEIGHT) {
        return Err(Error::NullSupport);
    }
    Ok((out.scaled(1.0 / weight.sqrt()), weight))
}

/// GRW location density `p(x_c) = ||L(x_c) psi||^2` at every grid point.
pub fn collapse_location_pdf(psi: &SurfaceWaveFunction, alpha: f64) -> Result<Vec<f64>> {
    location_pdf_from_density(&psi.density(), psi.grid(), alpha)
}

/// Location density of a collapse at every grid point for a particle whose
/// position density (per unit length) is `density`.
pub fn location_pdf_from_density(density: &[f64], grid: &SpatialGrid, alpha: f64) -> Result<Vec<f64>> {
    let k = CollapseKernel::new(0.0, alpha, 0.0)?;
    k.check_resolved(grid)?;
    if density.len() != grid.len() {
        return Err(Error::Incompatible(format!(
            "{} density samples for a grid of {} points",
            density.len(),
            grid.len()
        )));
    }
    let norm = (alpha / PI).sqrt();
    let n = grid.len();
    // kernel by index offset j - i, shifted by n - 1
    let kernel: Vec<f64> = (0..2 * n - 1)
        .map(|m| {
            let d = grid.separation((m as f64 - (n - 1) as f64) * grid.dx(), 0.0);
            (-alpha * d * d).exp()
        })
        .collect();
    Ok((0..n)
        .map(|i| {
            let row = &kernel[n - 1 - i..2 * n - 1 - i];
            row.iter().zip(density).map(|(k, r)| k * r).sum::<f64>() * norm * grid.dx()
        })
        .collect())
}

/// The kernel's hyperplane through `x` and a window of `phi`'s momentum
/// grid centred on `x`.
fn kernel_surface(
    phi: &CovariantAmplitude,
    x: SpacetimePoint,
    k: &CollapseKernel,
) -> Result<(HyperplaneLabel, SpatialGrid)> {
    let frame_x = x.in_frame(k.frame).x;
    if (frame_x - k.center).abs() > 1e-9 * (1.0 + frame_x.abs()) {
        return Err(Error::Incompatible(format!(
            "kernel centre {} is not the frame position {} of the collapse point",
            k.center, frame_x
        )));
    }
    let label = HyperplaneLabel::through(x, k.frame);
    Ok((label, phi.momentum_grid().spatial(frame_x)))
}

/// Linear transported collapse: `L(x)` on the kernel's hyperplane through `x`,
/// lifted back. Returns the unnormalized amplitude and `||L psi||^2`.
pub fn transported_multiply(
    phi: &CovariantAmplitude,
    x: SpacetimePoint,
    k: &CollapseKernel,
) -> Result<(CovariantAmplitude, f64)> {
    let (label, grid) = kernel_surface(phi, x, k)?;
    let psi = phi.restrict_unnormalized(&label, &grid)?;
    let out = collapse_multiply(&psi, k)?;
    let weight = out.norm_sqr();
    Ok((lift(&out)?, weight))
}

/// Post-collapse covariant amplitude for a collapse at event `x`, and its weight.
pub fn transported_collapse(
    phi: &CovariantAmplitude,
    x: SpacetimePoint,
    k: &CollapseKernel,
) -> Result<(CovariantAmplitude, f64)> {
    let (out, weight) = transported_multiply(phi, x, k)?;
    if !(weight >= NULL_WEIGHT) {
        return Err(Error::NullSupport);
    }
    Ok((out.scaled(1.0 / weight.sqrt()), weight))
}

/// Same collapse, computed starting from the hyperplane of frame `via`
/// through `x`: the state on that hyperplane is transported to the kernel's
/// hyperplane, collapsed, transported back and lifted from there.
pub fn transported_collapse_via(
    phi: &CovariantAmplitude,
    x: SpacetimePoint,
    k: &CollapseKernel,
    via: f64,
) -> Result<(CovariantAmplitude, f64)> {
    let omega = HyperplaneLabel::through(x, via);
    let omega_grid = phi.momentum_grid().spatial(x.in_frame(via).x);
    let on_omega = restrict(phi, &omega, &omega_grid)?;
    let (label, grid) = kernel_surface(phi, x, k)?;
    let on_sigma = lift(&on_omega)?.restrict_unnormalized(&label, &grid)?;
    let collapsed = collapse_multiply(&on_sigma, k)?;
    let weight = collapsed.norm_sqr();
    if !(weight >= NULL_WEIGHT) {
        return Err(Error::NullSupport);
    }
    let back = restrict(&lift(&collapsed)?, &omega, &omega_grid)?;
    Ok((lift(&back)?, weight))
}

/// `||(L1 L2~ - L2~ L1) phi||` with lab-frame kernels of equal `alpha` at the
/// space-like events `x1` and `x2`, the second transported to `x1`'s hyperplane.
pub fn microcausality_defect(
    phi: &CovariantAmplitude,
    x1: SpacetimePoint,
    x2: SpacetimePoint,
    alpha: f64,
) -> Result<f64> {
    if !x1.is_spacelike_to(&x2) {
        return Err(Error::NotSpaceLike);
    }
    let k1 = CollapseKernel::at(x1, alpha, 0.0)?;
    let k2 = CollapseKernel::at(x2, alpha, 0.0)?;
    let (a, _) = transported_multiply(phi, x2, &k2)?;
    let (ab, _) = transported_multiply(&a, x1, &k1)?;
    let (b, _) = transported_multiply(phi, x1, &k1)?;
    let (ba, _) = transported_multiply(&b, x2, &k2)?;
    ab.distance(&ba)
}
