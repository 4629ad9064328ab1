//! Grids, spacetime points and flat hyperplane labels in 1+1 dimensions.
//!
//! Natural units throughout (`hbar = c = 1`). A frame is identified by its
//! rapidity relative to the lab; frame coordinates of a lab point are
//! `t' = t cosh(eta) - x sinh(eta)` and `x' = x cosh(eta) - t sinh(eta)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform periodic position grid used by every spectral transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    dx: f64,
    n_points: usize,
    periodic: bool,
}

impl SpatialGrid {
    pub fn new(x_min: f64, dx: f64, n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(invalid("n_points", format!("{n_points} is not a power of two >= 8")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(invalid("dx", format!("{dx} is not a positive spacing")));
        }
        if !x_min.is_finite() {
            return Err(invalid("x_min", "not finite"));
        }
        Ok(Self {
            x_min,
            dx,
            n_points,
            periodic: true,
        })
    }

    /// Grid of `n_points` with total extent `length`, centred on `center`.
    pub fn centered(center: f64, length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(invalid("length", format!("{length} is not a positive extent")));
        }
        let dx = length / n_points as f64;
        Self::new(center - 0.5 * length, dx, n_points)
    }

    /// 1024 points over 200 Compton wavelengths, centred on the origin.
    pub fn default_relativistic() -> Self {
        Self::centered(0.0, 200.0, 1024).expect("valid default grid")
    }

    pub fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n_points as f64
    }

    pub fn center(&self) -> f64 {
        self.x_min + 0.5 * self.length()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Same spacing and size, window moved to a new centre.
    pub fn recentered(&self, center: f64) -> Self {
        Self {
            x_min: center - 0.5 * self.length(),
            ..*self
        }
    }

    /// Signed separation `x - y`, minimum image when periodic.
    pub fn separation(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        if self.periodic {
            let l = self.length();
            d - l * (d / l).round()
        } else {
            d
        }
    }

    /// True when both grids sample the same momenta (same size and spacing).
    pub fn same_momenta(&self, other: &Self) -> bool {
        self.n_points == other.n_points && (self.dx - other.dx).abs() <= 1e-14 * self.dx
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        MomentumGrid {
            n_points: self.n_points,
            dx: self.dx,
        }
    }
}

/// Momenta conjugate to a [`SpatialGrid`], in FFT order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    n_points: usize,
    dx: f64,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dp(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.dx * self.n_points as f64)
    }

    /// Largest representable |p| (the Nyquist momentum).
    pub fn p_max(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    pub fn p(&self, k: usize) -> f64 {
        let n = self.n_points as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 * self.dp()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// Every `m`-th momentum (`m` a power of two dividing the size): the same
    /// band on a window `m` times shorter.
    pub fn decimated(&self, m: usize) -> MomentumGrid {
        MomentumGrid {
            n_points: self.n_points / m,
            dx: self.dx,
        }
    }

    /// Index in this grid of momentum `k` of [`Self::decimated`]`(m)`.
    pub fn undecimated_index(&self, m: usize, k: usize) -> usize {
        let coarse = self.n_points / m;
        let signed = if k < coarse / 2 { k as isize } else { k as isize - coarse as isize };
        (signed * m as isize).rem_euclid(self.n_points as isize) as usize
    }

    /// Spatial grid of the same resolution centred on `center`.
    pub fn spatial(&self, center: f64) -> SpatialGrid {
        SpatialGrid::centered(center, self.dx * self.n_points as f64, self.n_points)
            .expect("momentum grid built from a valid spatial grid")
    }
}

/// A point of 1+1 Minkowski space in lab coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: Self = Self { t: 0.0, x: 0.0 };

    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Coordinates of this lab point as seen from the frame of rapidity `eta`.
    pub fn in_frame(&self, eta: f64) -> Self {
        let (s, c) = (eta.sinh(), eta.cosh());
        Self {
            t: self.t * c - self.x * s,
            x: self.x * c - self.t * s,
        }
    }

    /// Inverse of [`in_frame`](Self::in_frame): lab coordinates of a point
    /// given in the frame of rapidity `eta`.
    pub fn from_frame(frame_point: Self, eta: f64) -> Self {
        frame_point.in_frame(-eta)
    }

    /// Minkowski interval `dt^2 - dx^2` to `other`.
    pub fn interval_sqr(&self, other: &Self) -> f64 {
        let dt = other.t - self.t;
        let dx = other.x - self.x;
        dt * dt - dx * dx
    }

    pub fn is_spacelike_to(&self, other: &Self) -> bool {
        (other.x - self.x).abs() > (other.t - self.t).abs()
    }

    /// True when `other` lies strictly inside the future light cone.
    pub fn is_future_timelike_to(&self, other: &Self) -> bool {
        other.t > self.t && (other.t - self.t) > (other.x - self.x).abs()
    }
}

/// A constant-time hyperplane `t' = time` of the frame with the given rapidity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperplaneLabel {
    pub rapidity: f64,
    pub time: f64,
}

impl HyperplaneLabel {
    pub fn new(rapidity: f64, time: f64) -> Result<Self> {
        if !rapidity.is_finite() {
            return Err(invalid("rapidity", "not finite"));
        }
        if !time.is_finite() {
            return Err(invalid("time", "not finite"));
        }
        Ok(Self { rapidity, time })
    }

    pub fn lab(time: f64) -> Self {
        Self {
            rapidity: 0.0,
            time,
        }
    }

    /// The hyperplane of frame `rapidity` that contains `point`.
    pub fn through(point: SpacetimePoint, rapidity: f64) -> Self {
        Self {
            rapidity,
            time: point.in_frame(rapidity).t,
        }
    }

    /// Signed frame-time of `point` relative to this hyperplane.
    pub fn time_offset(&self, point: SpacetimePoint) -> f64 {
        point.in_frame(self.rapidity).t - self.time
    }

    /// Lab coordinates of the point at frame position `x` on this hyperplane.
    pub fn point_at(&self, x: f64) -> SpacetimePoint {
        SpacetimePoint::from_frame(SpacetimePoint::new(self.time, x), self.rapidity)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.rapidity == other.rapidity && self.time == other.time
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(SpatialGrid::new(0.0, 1.0, 12).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 4).is_err());
        assert!(SpatialGrid::new(0.0, 0.0, 16).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 16).is_ok());
    }

    #[test]
    fn momenta_are_in_fft_order() {
        let g = SpatialGrid::centered(0.0, 8.0, 8).unwrap().momentum_grid();
        let dp = 2.0 * std::f64::consts::PI / 8.0;
        let p = g.momenta();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - dp).abs() < 1e-15);
        assert!((p[4] + 4.0 * dp).abs() < 1e-15);
        assert!((p[7] + dp).abs() < 1e-15);
    }

    #[test]
    fn frame_transform_round_trips_and_preserves_interval() {
        let a = SpacetimePoint::new(1.3, -0.4);
        let b = SpacetimePoint::new(4.0, 2.5);
        let eta = 0.77;
        let back = SpacetimePoint::from_frame(a.in_frame(eta), eta);
        assert!((back.t - a.t).abs() < 1e-14 && (back.x - a.x).abs() < 1e-14);
        let i0 = a.interval_sqr(&b);
        let i1 = a.in_frame(eta).interval_sqr(&b.in_frame(eta));
        assert!((i0 - i1).abs() < 1e-12);
    }

    #[test]
    fn rest_worldline_moves_left_in_boosted_frame() {
        let p = SpacetimePoint::new(1.0, 0.0).in_frame(0.5);
        assert!((p.x / p.t + 0.5f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn hyperplane_through_point_contains_it() {
        let p = SpacetimePoint::new(3.0, 1.0);
        let h = HyperplaneLabel::through(p, -0.3);
        assert!(h.time_offset(p).abs() < 1e-14);
        let q = h.point_at(p.in_frame(-0.3).x);
        assert!((q.t - p.t).abs() < 1e-13 && (q.x - p.x).abs() < 1e-13);
    }

    #[test]
    fn minimum_image_separation() {
        let g = SpatialGrid::centered(0.0, 10.0, 16).unwrap();
        assert!((g.separation(4.5, -4.5) + 1.0).abs() < 1e-12);
        let open = g.with_periodic(false);
        assert!((open.separation(4.5, -4.5) - 9.0).abs() < 1e-12);
    }
}
