//! Unitary position/momentum transforms on a [`SpatialGrid`].
//!
//! Conventions: `f(p) = dx/sqrt(2 pi) * sum_j psi_j exp(-i p (x_j - x_ref))` and
//! `psi_j = dp/sqrt(2 pi) * sum_k f_k exp(i p_k (x_j - x_ref))`, which are exact
//! inverses on the grid and preserve `sum |psi|^2 dx = sum |f|^2 dp`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::geometry::SpatialGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Momentum amplitudes `f_k` of the position samples `psi` (FFT order).
pub fn to_momentum(psi: &[Complex64], grid: &SpatialGrid, x_ref: f64) -> Vec<Complex64> {
    let mut buf = psi.to_vec();
    fft_in_place(&mut buf, false);
    let mg = grid.momentum_grid();
    let scale = grid.dx() / (2.0 * PI).sqrt();
    let shift = grid.x_min() - x_ref;
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= Complex64::from_polar(scale, -mg.p(k) * shift);
    }
    buf
}

/// Position samples from momentum amplitudes in FFT order.
pub fn to_position(f: &[Complex64], grid: &SpatialGrid, x_ref: f64) -> Vec<Complex64> {
    let mg = grid.momentum_grid();
    let scale = mg.dp() / (2.0 * PI).sqrt();
    let shift = grid.x_min() - x_ref;
    let mut buf: Vec<Complex64> = f
        .iter()
        .enumerate()
        .map(|(k, v)| v * Complex64::from_polar(scale, mg.p(k) * shift))
        .collect();
    fft_in_place(&mut buf, true);
    buf
}

/// Continuous-momentum evaluation of the transform of a sampled position
/// function, `f(p) = dx/sqrt(2 pi) sum_j psi_j exp(-i p (x_j - x_ref))`.
///
/// Samples below `1e-17` of the peak are trimmed from both ends, so the cost
/// per evaluation scales with the support of the state, not the grid.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    coeffs: Vec<Complex64>,
    x_first: f64,
    dx: f64,
    x_ref: f64,
}

impl TrigInterpolant {
    pub fn new(psi: &[Complex64], grid: &SpatialGrid, x_ref: f64) -> Self {
        let peak = psi.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = peak * 1e-17;
        let lo = psi.iter().position(|c| c.norm() > cut).unwrap_or(0);
        let hi = psi.iter().rposition(|c| c.norm() > cut).unwrap_or(0);
        let coeffs = if peak > 0.0 {
            psi[lo..=hi].to_vec()
        } else {
            Vec::new()
        };
        Self {
            coeffs,
            x_first: grid.x(lo),
            dx: grid.dx(),
            x_ref,
        }
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let z = Complex64::from_polar(1.0, -p * self.dx);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        let scale = self.dx / (2.0 * PI).sqrt();
        acc * Complex64::from_polar(scale, -p * (self.x_first - self.x_ref))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet(grid: &SpatialGrid) -> Vec<Complex64> {
        grid.positions()
            .map(|x| Complex64::from_polar((-(x - 1.0) * (x - 1.0) / 8.0).exp(), 0.7 * x))
            .collect()
    }

    #[test]
    fn transforms_are_inverse_and_unitary() {
        let grid = SpatialGrid::centered(0.5, 64.0, 256).unwrap();
        let psi = packet(&grid);
        let f = to_momentum(&psi, &grid, 0.3);
        let back = to_position(&f, &grid, 0.3);
        let err: f64 = psi.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        let nx: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx();
        let np: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.momentum_grid().dp();
        assert!((nx - np).abs() < 1e-12 * nx);
    }

    #[test]
    fn interpolant_matches_grid_values() {
        let grid = SpatialGrid::centered(0.0, 64.0, 256).unwrap();
        let psi = packet(&grid);
        let f = to_momentum(&psi, &grid, 2.0);
        let interp = TrigInterpolant::new(&psi, &grid, 2.0);
        let mg = grid.momentum_grid();
        for k in [0, 3, 17, 200, 255] {
            assert!((interp.eval(mg.p(k)) - f[k]).norm() < 1e-12);
        }
    }
}
