//! Distinguishable particles on a tensor product of hyperplane grids.
//!
//! Amplitudes are stored densely in row-major order with particle 0 varying
//! slowest. All states here live on one lab-frame foliation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::collapse::{location_pdf_from_density, CollapseKernel, NULL_WEIGHT};
use crate::dynamics::Propagator;
use crate::error::{invalid, Error, Result};
use crate::flash::{sample_interval, FlashParams};
use crate::geometry::{HyperplaneLabel, SpacetimePoint, SpatialGrid};
use crate::hilbert::{Dispersion, Normalize, SurfaceWaveFunction};
use crate::random::stream;
use crate::stats::{bootstrap_mean, Estimate};

/// Largest discarded Schmidt coefficient tolerated for a product state.
pub const SEPARABLE_TOLERANCE: f64 = 1e-10;
/// Largest overlap of the two branches of a Bell state.
pub const BRANCH_OVERLAP: f64 = 1e-6;
/// Largest dense state handled, in amplitudes.
pub const MAX_AMPLITUDES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    grids: Vec<SpatialGrid>,
    hyperplane: HyperplaneLabel,
    amplitudes: Vec<Complex64>,
    mass: f64,
    dispersion: Dispersion,
    separable: bool,
}

impl ProductState {
    pub fn n_particles(&self) -> usize {
        self.grids.len()
    }

    pub fn grids(&self) -> &[SpatialGrid] {
        &self.grids
    }

    pub fn hyperplane(&self) -> HyperplaneLabel {
        self.hyperplane
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Set by [`product_state`] and kept by single-particle collapses.
    pub fn is_separable(&self) -> bool {
        self.separable
    }

    fn dims(&self) -> Vec<usize> {
        self.grids.iter().map(|g| g.len()).collect()
    }

    fn measure(&self) -> f64 {
        self.grids.iter().map(|g| g.dx()).product()
    }

    fn stride(&self, i: usize) -> usize {
        self.grids[i + 1..].iter().map(|g| g.len()).product()
    }

    /// Grid index of particle `i` in flat index `flat`.
    fn index_of(&self, flat: usize, i: usize) -> usize {
        (flat / self.stride(i)) % self.grids[i].len()
    }

    fn check_particle(&self, i: usize) -> Result<()> {
        if i >= self.n_particles() {
            return Err(invalid(
                "particle",
                format!("index {i} out of range for {} particles", self.n_particles()),
            ));
        }
        Ok(())
    }

    /// Reduced density matrix of particle `i` in the grid basis (unit trace
    /// for a normalized state).
    pub fn reduced_density(&self, i: usize) -> Result<DMatrix<Complex64>> {
        self.check_particle(i)?;
        let n = self.grids[i].len();
        let stride = self.stride(i);
        let outer = self.amplitudes.len() / (n * stride);
        let measure = self.measure();
        let mut rho = DMatrix::<Complex64>::zeros(n, n);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for j in 0..n {
                    let a = self.amplitudes[base + j * stride];
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for k in 0..n {
                        rho[(j, k)] += a * self.amplitudes[base + k * stride].conj() * measure;
                    }
                }
            }
        }
        Ok(rho)
    }

    /// Position density of particle `i` per unit length.
    pub fn marginal(&self, i: usize) -> Result<Vec<f64>> {
        self.check_particle(i)?;
        let n = self.grids[i].len();
        let mut out = vec![0.0; n];
        for (flat, a) in self.amplitudes.iter().enumerate() {
            out[self.index_of(flat, i)] += a.norm_sqr();
        }
        let scale = self.measure() / self.grids[i].dx();
        Ok(out.into_iter().map(|v| v * scale).collect())
    }

    /// Schmidt coefficients (descending) across the cut between the particles
    /// in `left` and the rest.
    pub fn schmidt_coefficients(&self, left: &[usize]) -> Result<Vec<f64>> {
        for &i in left {
            self.check_particle(i)?;
        }
        let right: Vec<usize> = (0..self.n_particles()).filter(|i| !left.contains(i)).collect();
        if left.is_empty() || right.is_empty() {
            return Err(invalid("left", "a bipartition needs particles on both sides"));
        }
        let dims = self.dims();
        let rows: usize = left.iter().map(|&i| dims[i]).product();
        let cols: usize = right.iter().map(|&i| dims[i]).product();
        let scale = self.measure().sqrt();
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for (flat, a) in self.amplitudes.iter().enumerate() {
            let r = left.iter().fold(0, |acc, &i| acc * dims[i] + self.index_of(flat, i));
            let c = right.iter().fold(0, |acc, &i| acc * dims[i] + self.index_of(flat, i));
            m[(r, c)] = a * scale;
        }
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    /// Schmidt rank 1 across every single-particle cut (which implies every
    /// bipartition), within [`SEPARABLE_TOLERANCE`].
    pub fn certify_separable(&self) -> Result<bool> {
        if self.n_particles() == 1 {
            return Ok(true);
        }
        for i in 0..self.n_particles() {
            let sv = self.schmidt_coefficients(&[i])?;
            if sv.get(1).copied().unwrap_or(0.0) >= SEPARABLE_TOLERANCE {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn kernel_for(&self, i: usize, center: f64, alpha: f64) -> Result<CollapseKernel> {
        self.check_particle(i)?;
        let k = CollapseKernel::new(center, alpha, self.hyperplane.rapidity)?;
        k.check_resolved(&self.grids[i])?;
        Ok(k)
    }

    fn multiplied(&self, i: usize, factor: &[f64]) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(flat, a)| a * factor[self.index_of(flat, i)])
            .collect();
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// `1 x ... x L(x_c) x ... x 1` on particle `i`, normalized, with its
    /// Born weight.
    pub fn collapse_particle(&self, i: usize, center: f64, alpha: f64) -> Result<(Self, f64)> {
        let k = self.kernel_for(i, center, alpha)?;
        let g = &self.grids[i];
        let profile: Vec<f64> = g.positions().map(|x| k.profile(g.separation(x, center))).collect();
        let out = self.multiplied(i, &profile);
        let weight = out.norm_sqr();
        if !(weight >= NULL_WEIGHT) {
            return Err(Error::NullSupport);
        }
        Ok((out.scaled(1.0 / weight.sqrt()), weight))
    }

    /// Probability of particle `i` lying in the half-line below `split`.
    pub fn fraction_below(&self, i: usize, split: f64) -> Result<f64> {
        let g = self.grids[i];
        Ok(g.positions()
            .zip(self.marginal(i)?)
            .filter(|(x, _)| *x < split)
            .map(|(_, r)| r * g.dx())
            .sum())
    }
}

impl Normalize for ProductState {
    fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.measure()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }
}

fn check_factors(factors: &[&SurfaceWaveFunction]) -> Result<()> {
    let first = factors
        .first()
        .ok_or_else(|| invalid("factors", "at least one particle is required"))?;
    for f in factors {
        if !f.hyperplane().same_as(&first.hyperplane()) {
            return Err(Error::Incompatible(
                "factors live on different hyperplanes".into(),
            ));
        }
        if f.mass() != first.mass() || f.dispersion() != first.dispersion() {
            return Err(Error::Incompatible("factors describe different species".into()));
        }
        let n2 = f.norm_sqr();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(invalid("factors", format!("factor has squared norm {n2}")));
        }
    }
    let size = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.grid().len()))
        .filter(|&s| s <= MAX_AMPLITUDES);
    if size.is_none() {
        return Err(invalid("factors", "tensor product too large for a dense state"));
    }
    Ok(())
}

fn kron(factors: &[&SurfaceWaveFunction]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for f in factors {
        out = out
            .iter()
            .flat_map(|a| f.amplitudes().iter().map(move |b| a * b))
            .collect();
    }
    out
}

/// Tensor product of normalized single-particle states on one hyperplane.
pub fn product_state(factors: &[SurfaceWaveFunction]) -> Result<ProductState> {
    let refs: Vec<&SurfaceWaveFunction> = factors.iter().collect();
    check_factors(&refs)?;
    Ok(ProductState {
        grids: factors.iter().map(|f| *f.grid()).collect(),
        hyperplane: factors[0].hyperplane(),
        amplitudes: kron(&refs),
        mass: factors[0].mass(),
        dispersion: factors[0].dispersion(),
        separable: true,
    })
}

/// `(|L>|L> + |R>|R>) / sqrt(2)` for two distinguishable branches.
pub fn bell_state(l: &SurfaceWaveFunction, r: &SurfaceWaveFunction) -> Result<ProductState> {
    check_factors(&[l, r])?;
    let overlap = l.inner(r)?.norm();
    if overlap >= BRANCH_OVERLAP {
        return Err(Error::BranchesNotDistinguishable(overlap));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = kron(&[l, l])
        .into_iter()
        .zip(kron(&[r, r]))
        .map(|(a, b)| (a + b) * h)
        .collect();
    Ok(ProductState {
        grids: vec![*l.grid(), *l.grid()],
        hyperplane: l.hyperplane(),
        amplitudes,
        mass: l.mass(),
        dispersion: l.dispersion(),
        separable: false,
    })
}

/// Where a particle's flash is asked to land.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Region {
    /// Density at a single location.
    Point(f64),
    /// Probability of the interval `[lo, hi]` (bounds may be infinite).
    Interval(f64, f64),
}

impl Region {
    /// Flash weight of the region given the particle at `y`.
    fn weight(&self, y: f64, alpha: f64) -> f64 {
        match *self {
            Region::Point(x) => (alpha / PI).sqrt() * (-alpha * (x - y).powi(2)).exp(),
            Region::Interval(lo, hi) => {
                let s = alpha.sqrt();
                0.5 * (libm::erf(s * (hi - y)) - libm::erf(s * (lo - y)))
            }
        }
    }
}

/// `|P(all flashes) - prod_i P(flash i)|` for one region per particle, with
/// GRW kernels of parameter `alpha` on the state's hyperplane.
pub fn factorization_defect(psi: &ProductState, flashes: &[Region], alpha: f64) -> Result<f64> {
    if flashes.len() != psi.n_particles() {
        return Err(invalid(
            "flashes",
            format!("{} regions for {} particles", flashes.len(), psi.n_particles()),
        ));
    }
    for i in 0..psi.n_particles() {
        psi.kernel_for(i, 0.0, alpha)?;
    }
    let tables: Vec<Vec<f64>> = flashes
        .iter()
        .zip(&psi.grids)
        .map(|(r, g)| g.positions().map(|y| r.weight(y, alpha)).collect())
        .collect();
    let measure = psi.measure();
    let joint: f64 = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(flat, a)| {
            let w: f64 = (0..psi.n_particles())
                .map(|i| tables[i][psi.index_of(flat, i)])
                .product();
            a.norm_sqr() * w
        })
        .sum::<f64>()
        * measure;
    let mut product = 1.0;
    for (i, table) in tables.iter().enumerate() {
        let dx = psi.grids[i].dx();
        product *= psi
            .marginal(i)?
            .iter()
            .zip(table)
            .map(|(r, w)| r * w * dx)
            .sum::<f64>();
    }
    Ok((joint - product).abs())
}

/// `(1/2) sum |eigenvalues of (a - b)|` for Hermitian matrices, computed as
/// half the sum of singular values.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Incompatible("density matrices differ in size".into()));
    }
    Ok(0.5 * (a - b).singular_values().sum())
}

/// Draws a grid position from `pdf` restricted to `keep`, if it has weight.
pub fn sample_position<R: Rng + ?Sized>(
    grid: &SpatialGrid,
    pdf: &[f64],
    keep: impl Fn(f64) -> bool,
    rng: &mut R,
) -> Option<f64> {
    let xs: Vec<f64> = grid.positions().collect();
    let w: Vec<f64> = xs.iter().zip(pdf).map(|(&x, &p)| if keep(x) { p } else { 0.0 }).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (x, p) in xs.iter().zip(&w) {
        acc += p;
        if u < acc {
            return Some(*x);
        }
    }
    xs.iter().zip(&w).rev().find(|(_, p)| **p > 0.0).map(|(x, _)| *x)
}

fn mean_of(grid: &SpatialGrid, density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum();
    grid.positions().zip(density).map(|(x, r)| x * r).sum::<f64>() / total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameComparison {
    /// Trace distance between particle 0's states after the two outcomes.
    pub trace_distance: f64,
    /// The two outcomes of particle 1's next flash.
    pub outcomes: [SpacetimePoint; 2],
    pub delta_t: f64,
}

/// Two realizations that differ only in where particle 1 (0-based) flashes
/// next after its seed `x2`: once below and once above the mean of its
/// marginal. Returns the trace distance between particle 0's resulting
/// reduced states.
///
/// `sigma_prime` must have both outcomes in its past while the lab
/// hyperplane through `x1` has them in its future.
pub fn frame_comparison_defect<R: Rng + ?Sized>(
    psi0: &ProductState,
    x1: SpacetimePoint,
    x2: SpacetimePoint,
    sigma_prime: &HyperplaneLabel,
    params: &FlashParams,
    rng: &mut R,
) -> Result<FrameComparison> {
    if psi0.n_particles() != 2 {
        return Err(invalid("psi0", "the protocol needs exactly two particles"));
    }
    let grid = psi0.grids[1];
    let density = psi0.marginal(1)?;
    let pdf = location_pdf_from_density(&density, &grid, params.alpha)?;
    let split = mean_of(&grid, &density);
    let delta_t = sample_interval(params.tau, rng);
    let lo = sample_position(&grid, &pdf, |x| x < split, rng);
    let hi = sample_position(&grid, &pdf, |x| x >= split, rng);
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::NullSupport);
    };
    let at = |x: f64| SpacetimePoint::new(x2.t + (delta_t * delta_t + (x - x2.x).powi(2)).sqrt(), x);
    let outcomes = [at(lo), at(hi)];
    for y in &outcomes {
        if y.t <= x1.t {
            return Err(Error::InvalidFoliation(format!(
                "outcome at ({:.3}, {:.3}) is not after the lab hyperplane through the first seed",
                y.t, y.x
            )));
        }
        if sigma_prime.time_offset(*y) >= 0.0 {
            return Err(Error::InvalidFoliation(format!(
                "outcome at ({:.3}, {:.3}) is not before the boosted hyperplane",
                y.t, y.x
            )));
        }
    }
    let (a, _) = psi0.collapse_particle(1, lo, params.alpha)?;
    let (b, _) = psi0.collapse_particle(1, hi, params.alpha)?;
    Ok(FrameComparison {
        trace_distance: trace_distance(&a.reduced_density(0)?, &b.reduced_density(0)?)?,
        outcomes,
        delta_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignaling {
    pub trials: usize,
    /// Fraction of particle-0 flashes below the split without a prior
    /// particle-1 collapse.
    pub without: f64,
    /// Same, after a particle-1 collapse drawn from its own law.
    pub with: f64,
    /// Two-proportion z statistic.
    pub z: f64,
}

/// Compares particle 0's flash statistics with and without a preceding
/// particle-1 collapse, each averaged over that collapse's outcomes.
pub fn no_signaling_check(psi0: &ProductState, alpha: f64, trials: usize, seed: u64) -> Result<NoSignaling> {
    if psi0.n_particles() != 2 {
        return Err(invalid("psi0", "the check needs exactly two particles"));
    }
    if trials < 2 {
        return Err(Error::InsufficientData(format!("{trials} trials")));
    }
    let g0 = psi0.grids[0];
    let g1 = psi0.grids[1];
    let m0 = psi0.marginal(0)?;
    let split = mean_of(&g0, &m0);
    let pdf0 = location_pdf_from_density(&m0, &g0, alpha)?;
    let pdf1 = location_pdf_from_density(&psi0.marginal(1)?, &g1, alpha)?;
    let mut without = 0usize;
    let mut with = 0usize;
    for k in 0..trials as u64 {
        let mut rng = stream(seed, 2 * k);
        let x = sample_position(&g0, &pdf0, |_| true, &mut rng).ok_or(Error::NullSupport)?;
        without += usize::from(x < split);

        let mut rng = stream(seed, 2 * k + 1);
        let y = sample_position(&g1, &pdf1, |_| true, &mut rng).ok_or(Error::NullSupport)?;
        let (after, _) = psi0.collapse_particle(1, y, alpha)?;
        let pdf = location_pdf_from_density(&after.marginal(0)?, &g0, alpha)?;
        let x = sample_position(&g0, &pdf, |_| true, &mut rng).ok_or(Error::NullSupport)?;
        with += usize::from(x < split);
    }
    let n = trials as f64;
    let (p1, p2) = (without as f64 / n, with as f64 / n);
    let pooled = 0.5 * (p1 + p2);
    let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
    let z = if se > 0.0 { (p1 - p2) / se } else { 0.0 };
    Ok(NoSignaling {
        trials,
        without: p1,
        with: p2,
        z,
    })
}

/// Gaussian pair potential `strength * exp(-d^2 / (2 range^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionSpec {
    pub strength: f64,
    pub range: f64,
}

impl InteractionSpec {
    pub fn new(strength: f64, range: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(invalid("strength", "not finite"));
        }
        if !(range.is_finite() && range > 0.0) {
            return Err(invalid("range", format!("{range} is not positive")));
        }
        Ok(Self { strength, range })
    }

    pub fn potential(&self, d: f64) -> f64 {
        self.strength * (-d * d / (2.0 * self.range * self.range)).exp()
    }
}

/// Largest single-particle grid for explicit two-particle matrices.
pub const MAX_MATRIX_GRID: usize = 32;

/// `||AB - BA||_F / (||A||_F ||B||_F)`.
pub fn relative_commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let c = a * b - b * a;
    c.norm() / (a.norm() * b.norm())
}

/// Dense single-particle kinetic operator `p^2 / 2m` in the grid basis.
fn kinetic_matrix(grid: &SpatialGrid, mass: f64) -> DMatrix<Complex64> {
    let n = grid.len();
    let mg = grid.momentum_grid();
    let xs: Vec<f64> = grid.positions().collect();
    DMatrix::from_fn(n, n, |j, k| {
        (0..n)
            .map(|q| {
                let p = mg.p(q);
                Complex64::from_polar(p * p / (2.0 * mass) / n as f64, p * (xs[j] - xs[k]))
            })
            .sum()
    })
}

fn unitary(h: &DMatrix<Complex64>, dt: f64) -> Result<DMatrix<Complex64>> {
    let eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Incompatible("Hamiltonian eigendecomposition failed".into()));
    }
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|l| Complex64::from_polar(1.0, -l * dt)),
    );
    Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}

fn kron_matrix(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Two nonrelativistic particles on `grid` (at most [`MAX_MATRIX_GRID`]
/// points each) with pair interaction `spec`. Returns the relative
/// commutator of the interaction-picture evolution over `dt` with the
/// collapse multiplier of particle `i` at `center`.
pub fn interaction_factorization_defect(
    spec: &InteractionSpec,
    grid: &SpatialGrid,
    mass: f64,
    i: usize,
    center: f64,
    alpha: f64,
    dt: f64,
) -> Result<f64> {
    if grid.len() > MAX_MATRIX_GRID {
        return Err(invalid(
            "grid",
            format!("{} points exceed the explicit-matrix limit {MAX_MATRIX_GRID}", grid.len()),
        ));
    }
    if i > 1 {
        return Err(invalid("particle", format!("index {i} out of range for 2 particles")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("{dt} is not positive")));
    }
    let k = CollapseKernel::new(center, alpha, 0.0)?;
    k.check_resolved(grid)?;
    let n = grid.len();
    let id = DMatrix::<Complex64>::identity(n, n);
    let t = kinetic_matrix(grid, mass);
    let h_free = kron_matrix(&t, &id) + kron_matrix(&id, &t);
    let xs: Vec<f64> = grid.positions().collect();
    let v = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n * n, |flat, _| {
        let d = grid.separation(xs[flat / n], xs[flat % n]);
        Complex64::new(spec.potential(d), 0.0)
    }));
    let w_free = unitary(&h_free, dt)?;
    let w = unitary(&(&h_free + v), dt)?;
    let w_int = w_free.adjoint() * w;
    let profile = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |j, _| {
        Complex64::new(k.profile(grid.separation(xs[j], center)), 0.0)
    }));
    let l = if i == 0 {
        kron_matrix(&profile, &id)
    } else {
        kron_matrix(&id, &profile)
    };
    Ok(relative_commutator(&w_int, &l))
}

/// A superposition of product states, exact under single-particle collapses.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    coefficients: Vec<Complex64>,
    branches: Vec<Vec<SurfaceWaveFunction>>,
}

impl BranchState {
    /// `(|left>^N + |right>^N) / sqrt(2)` (normalized with the branch overlap).
    pub fn ghz(n: usize, left: &SurfaceWaveFunction, right: &SurfaceWaveFunction) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "at least one particle is required"));
        }
        check_factors(&[left, right])?;
        let state = Self {
            coefficients: vec![Complex64::new(1.0, 0.0); 2],
            branches: vec![vec![left.clone(); n], vec![right.clone(); n]],
        };
        let norm = state.norm_sqr()?;
        Ok(state.scaled(1.0 / norm.sqrt()))
    }

    pub fn n_particles(&self) -> usize {
        self.branches[0].len()
    }

    fn scaled(mut self, factor: f64) -> Self {
        for c in &mut self.coefficients {
            *c *= factor;
        }
        self
    }

    /// `<b|b'>` products over all particles except `skip`.
    fn overlaps(&self, skip: Option<usize>) -> Result<Vec<Vec<Complex64>>> {
        let nb = self.branches.len();
        (0..nb)
            .map(|b| {
                (0..nb)
                    .map(|c| {
                        let mut o = self.coefficients[b].conj() * self.coefficients[c];
                        for j in 0..self.n_particles() {
                            if Some(j) != skip {
                                o *= self.branches[b][j].inner(&self.branches[c][j])?;
                            }
                        }
                        Ok(o)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> Result<f64> {
        Ok(self.overlaps(None)?.iter().flatten().sum::<Complex64>().re)
    }

    /// Weight of each branch, ignoring cross terms.
    pub fn branch_weights(&self) -> Result<Vec<f64>> {
        let o = self.overlaps(None)?;
        let diag: Vec<f64> = (0..o.len()).map(|b| o[b][b].re).collect();
        let total: f64 = diag.iter().sum();
        Ok(diag.into_iter().map(|w| w / total).collect())
    }

    /// Position density of particle `j` per unit length.
    pub fn marginal(&self, j: usize) -> Result<Vec<f64>> {
        let o = self.overlaps(Some(j))?;
        let n = self.branches[0][j].grid().len();
        let mut out = vec![0.0; n];
        for (b, row) in o.iter().enumerate() {
            for (c, w) in row.iter().enumerate() {
                let fb = self.branches[b][j].amplitudes();
                let fc = self.branches[c][j].amplitudes();
                for y in 0..n {
                    out[y] += (w * fb[y].conj() * fc[y]).re;
                }
            }
        }
        Ok(out)
    }

    /// Collapses particle `j` at `center`; normalized, with its weight.
    pub fn collapse(&self, j: usize, center: f64, alpha: f64) -> Result<(Self, f64)> {
        let grid = *self.branches[0][j].grid();
        let k = CollapseKernel::new(center, alpha, 0.0)?;
        k.check_resolved(&grid)?;
        let profile: Vec<f64> = grid.positions().map(|x| k.profile(grid.separation(x, center))).collect();
        let mut next = self.clone();
        for branch in &mut next.branches {
            let f = &branch[j];
            let amps = f.amplitudes().iter().zip(&profile).map(|(a, p)| a * p).collect();
            branch[j] = SurfaceWaveFunction::new(grid, f.hyperplane(), amps, f.mass(), f.dispersion())?;
        }
        let weight = next.norm_sqr()?;
        if !(weight >= NULL_WEIGHT) {
            return Err(Error::NullSupport);
        }
        Ok((next.scaled(1.0 / weight.sqrt()), weight))
    }

    /// Free evolution of every particle by `dt`.
    pub fn advance(&self, dt: f64) -> Result<Self> {
        let mut next = self.clone();
        for branch in &mut next.branches {
            for f in branch.iter_mut() {
                *f = Propagator::new(f.dispersion(), f.mass())?.advance(f, dt)?;
            }
        }
        Ok(next)
    }
}

/// Minority branch weight below which a superposition counts as decided.
pub const DECIDED_WEIGHT: f64 = 1e-6;
/// Safety limit on flashes per trial.
const MAX_FLASHES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Amplification {
    pub n_particles: usize,
    /// Decay rate of the superposition: inverse mean survival time.
    pub rate: f64,
    pub rate_ci: (f64, f64),
    pub mean_survival: Estimate,
    /// Mean number of flashes until the superposition was decided.
    pub mean_flashes: f64,
}

/// Survival time of the GHZ-type superposition under independent GRW
/// collapses of each particle (rate `1/tau` each), over `trials` streams of
/// `seed`. Branches are nonrelativistic packets of width `width` at `-a` and
/// `+a` on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn amplification_rate(
    n: usize,
    grid: &SpatialGrid,
    a: f64,
    width: f64,
    params: &FlashParams,
    trials: usize,
    seed: u64,
) -> Result<Amplification> {
    if trials < 2 {
        return Err(Error::InsufficientData(format!("{trials} trials")));
    }
    let packet = |c: f64| {
        SurfaceWaveFunction::gaussian(*grid, HyperplaneLabel::lab(0.0), 1.0, Dispersion::Nonrelativistic, c, width, 0.0)
    };
    let start = BranchState::ghz(n, &packet(-a)?, &packet(a)?)?;
    let mut times = Vec::with_capacity(trials);
    let mut flashes = 0usize;
    for trial in 0..trials as u64 {
        let mut rng = stream(seed, trial);
        let mut state = start.clone();
        let mut t = 0.0;
        let mut decided = false;
        for _ in 0..MAX_FLASHES {
            let dt = sample_interval(params.tau / n as f64, &mut rng);
            t += dt;
            state = state.advance(dt)?;
            let j = rng.random_range(0..n);
            let pdf = location_pdf_from_density(&state.marginal(j)?, grid, params.alpha)?;
            let x = sample_position(grid, &pdf, |_| true, &mut rng).ok_or(Error::NullSupport)?;
            state = state.collapse(j, x, params.alpha)?.0;
            flashes += 1;
            let w = state.branch_weights()?;
            if w.iter().cloned().fold(f64::INFINITY, f64::min) < DECIDED_WEIGHT {
                decided = true;
                break;
            }
        }
        if !decided {
            return Err(invalid("a", "superposition never decided; branches overlap too much"));
        }
        times.push(t);
    }
    let survival = bootstrap_mean(&times, seed)?;
    Ok(Amplification {
        n_particles: n,
        rate: 1.0 / survival.mean,
        rate_ci: (1.0 / survival.ci_hi, 1.0 / survival.ci_lo),
        mean_flashes: flashes as f64 / trials as f64,
        mean_survival: survival,
    })
}
