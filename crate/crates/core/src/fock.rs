//! Fermionic occupation-number model of two macroscopic objects, each in a
//! superposition of two places.
//!
//! Modes are lattice sites `0..M`; site `s` sits at position `s - M/2`.
//! Basis states are occupation bitmasks in ascending order, and creation
//! operators act in increasing-site order, so
//! `a+(k)|mask> = (-1)^(occupied sites below k) |mask + k>`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::collapse::NULL_WEIGHT;
use crate::error::{invalid, Error, Result};

/// Largest basis built explicitly.
pub const MAX_DIMENSION: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_modes: usize,
    n_fermions: usize,
    states: Vec<u64>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl FockBasis {
    /// All placements of `n_fermions` in `n_modes` modes (at most 64).
    pub fn new(n_modes: usize, n_fermions: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > 64 {
            return Err(invalid("M", format!("{n_modes} modes; 1 to 64 supported")));
        }
        let dim = binomial(n_modes, n_fermions)
            .filter(|&d| d <= MAX_DIMENSION)
            .ok_or_else(|| invalid("N", "Fock space too large to build"))?;
        let mut states = Vec::with_capacity(dim);
        if n_fermions == 0 {
            states.push(0);
        } else if n_fermions <= n_modes {
            let limit: u128 = 1u128 << n_modes;
            let mut mask: u64 = if n_fermions == 64 { u64::MAX } else { (1u64 << n_fermions) - 1 };
            loop {
                states.push(mask);
                // next mask with the same popcount (Gosper)
                let c = mask & mask.wrapping_neg();
                let (r, overflow) = mask.overflowing_add(c);
                if overflow || (r as u128) >= limit || r == 0 {
                    break;
                }
                mask = (((r ^ mask) >> 2) / c) | r;
            }
        }
        Ok(Self {
            n_modes,
            n_fermions,
            states,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_fermions(&self) -> usize {
        self.n_fermions
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(n_modes, 0)?);
        Ok(Self {
            basis,
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        })
    }

    pub fn zero(basis: Arc<FockBasis>) -> Self {
        let n = basis.dimension();
        Self {
            basis,
            amplitudes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The occupation basis vector `mask` (which must belong to `basis`).
    pub fn basis_state(basis: Arc<FockBasis>, mask: u64) -> Result<Self> {
        let i = basis
            .index_of(mask)
            .ok_or_else(|| invalid("mask", format!("{mask:#x} is not in the basis")))?;
        let mut v = Self::zero(basis);
        v.amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, mask: u64) -> Complex64 {
        self.basis
            .index_of(mask)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|a| *a == Complex64::new(0.0, 0.0))
    }

    /// Occupation masks with nonzero amplitude.
    pub fn support(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.basis
            .states
            .iter()
            .zip(&self.amplitudes)
            .filter(|(_, a)| **a != Complex64::new(0.0, 0.0))
            .map(|(m, a)| (*m, *a))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.basis.n_modes != other.basis.n_modes
            || self.basis.n_fermions != other.basis.n_fermions
        {
            return Err(Error::Incompatible(
                "vectors belong to different Fock sectors".into(),
            ));
        }
        Ok(())
    }

    /// Conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > NULL_WEIGHT) {
            return Err(Error::NullState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    /// `|<self|other>|^2` for normalized vectors.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Schmidt coefficients (descending) across the cut between sites below
    /// `cut` and the rest. Creation order puts the lower sites first, so the
    /// occupation basis factorizes without extra signs.
    pub fn schmidt_across(&self, cut: usize) -> Result<Vec<f64>> {
        if cut > self.basis.n_modes {
            return Err(invalid("cut", format!("site {cut} beyond {} modes", self.basis.n_modes)));
        }
        let low = if cut == 64 { u64::MAX } else { (1u64 << cut) - 1 };
        let mut rows: Vec<u64> = Vec::new();
        let mut cols: Vec<u64> = Vec::new();
        let entries: Vec<(u64, u64, Complex64)> = self
            .support()
            .map(|(m, a)| (m & low, m & !low, a))
            .collect();
        for (l, r, _) in &entries {
            if !rows.contains(l) {
                rows.push(*l);
            }
            if !cols.contains(r) {
                cols.push(*r);
            }
        }
        if entries.is_empty() {
            return Ok(Vec::new());
        }
        let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
        for (l, r, a) in entries {
            let i = rows.iter().position(|x| *x == l).expect("collected above");
            let j = cols.iter().position(|x| *x == r).expect("collected above");
            m[(i, j)] = a;
        }
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }
}

fn check_site(v: &FockVector, site: usize) -> Result<()> {
    if site >= v.basis.n_modes {
        return Err(invalid(
            "site",
            format!("{site} outside 0..{}", v.basis.n_modes),
        ));
    }
    Ok(())
}

fn parity_below(mask: u64, site: usize) -> f64 {
    let below = mask & ((1u64 << site) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Applies a sign-carrying map of occupation masks into the sector with
/// `n_fermions` particles.
fn map_sector(
    v: &FockVector,
    n_fermions: usize,
    f: impl Fn(u64) -> Option<(u64, f64)>,
) -> Result<FockVector> {
    let basis = Arc::new(FockBasis::new(v.basis.n_modes, n_fermions)?);
    let mut out = FockVector::zero(basis);
    for (mask, a) in v.support() {
        if let Some((target, sign)) = f(mask) {
            let i = out.basis.index_of(target).expect("target mask has the sector's popcount");
            out.amplitudes[i] += a * sign;
        }
    }
    Ok(out)
}

/// `a+(site) v`; the zero vector of the next sector when the site is full.
pub fn creation_apply(v: &FockVector, site: usize) -> Result<FockVector> {
    check_site(v, site)?;
    let n = v.basis.n_fermions + 1;
    if n > v.basis.n_modes {
        return Ok(FockVector::zero(Arc::new(FockBasis {
            n_modes: v.basis.n_modes,
            n_fermions: n,
            states: Vec::new(),
        })));
    }
    map_sector(v, n, |mask| {
        let bit = 1u64 << site;
        (mask & bit == 0).then(|| (mask | bit, parity_below(mask, site)))
    })
}

/// `a(site) v`.
pub fn annihilation_apply(v: &FockVector, site: usize) -> Result<FockVector> {
    check_site(v, site)?;
    if v.basis.n_fermions == 0 {
        return Ok(FockVector::zero(v.basis.clone()));
    }
    map_sector(v, v.basis.n_fermions - 1, |mask| {
        let bit = 1u64 << site;
        (mask & bit != 0).then(|| (mask & !bit, parity_below(mask, site)))
    })
}

/// Lattice of `n_modes` sites at positions `site - n_modes/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lattice {
    pub n_modes: usize,
}

impl Lattice {
    pub fn position(&self, site: usize) -> f64 {
        site as f64 - (self.n_modes / 2) as f64
    }

    /// Site at integer position `x`.
    pub fn site(&self, x: f64) -> Result<usize> {
        let s = x + (self.n_modes / 2) as f64;
        if s.fract() != 0.0 || s < 0.0 || s >= self.n_modes as f64 {
            return Err(invalid(
                "site",
                format!("position {x} is not a lattice site of 0..{}", self.n_modes),
            ));
        }
        Ok(s as usize)
    }
}

/// Applies the blob creator `g(c,0) g(c,1) ... g(c,count-1)` with
/// `g(c,n) = a+(c - N eps / 4 + n eps)`, where `N = 2 count`.
pub fn blob_operator(v: &FockVector, center: f64, count: usize, eps: f64) -> Result<FockVector> {
    let lattice = Lattice {
        n_modes: v.basis.n_modes,
    };
    let n_total = 2 * count;
    let sites: Vec<usize> = (0..count)
        .map(|n| lattice.site(center - n_total as f64 * eps / 4.0 + n as f64 * eps))
        .collect::<Result<_>>()?;
    let mut out = v.clone();
    for &s in sites.iter().rev() {
        out = creation_apply(&out, s)?;
    }
    Ok(out)
}

/// Blob geometry, in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlobSpec {
    /// Half the distance between the two objects.
    pub d: f64,
    /// Half the distance between the two places of one object.
    pub r: f64,
    /// Spacing of the fermions inside a blob.
    pub eps: f64,
    pub alpha: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            d: 11.0,
            r: 4.0,
            eps: 1.0,
            alpha: 1.0,
        }
    }
}

impl BlobSpec {
    /// Checks `N eps / 2 <= r / 2`, `r <= d / 2` and `1/sqrt(alpha) <= r / 4`.
    pub fn validate(&self, n_fermions: usize) -> Result<()> {
        for (name, v) in [("d", self.d), ("r", self.r), ("eps", self.eps), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if n_fermions == 0 || !n_fermions.is_multiple_of(2) {
            return Err(invalid("N", format!("{n_fermions} is not a positive even number")));
        }
        if n_fermions as f64 * self.eps / 2.0 > self.r / 2.0 {
            return Err(Error::ScaleSeparation("N eps / 2 <= r / 2"));
        }
        if self.r > self.d / 2.0 {
            return Err(Error::ScaleSeparation("r <= d / 2"));
        }
        if 1.0 / self.alpha.sqrt() > self.r / 4.0 {
            return Err(Error::ScaleSeparation("1/sqrt(alpha) <= r / 4"));
        }
        Ok(())
    }

    /// Centres of the places A1, A2 (object 1) and B1, B2 (object 2).
    pub fn centers(&self) -> [f64; 4] {
        [-self.d - self.r, -self.d + self.r, self.d - self.r, self.d + self.r]
    }

    pub fn kernel(&self, x: f64) -> f64 {
        (-0.5 * self.alpha * x * x).exp()
    }
}

/// `X Y |0>` for blobs at `x` and `y` (the `y` blob is created first).
pub fn two_blob_state(spec: &BlobSpec, n_modes: usize, n_fermions: usize, x: f64, y: f64) -> Result<FockVector> {
    let half = n_fermions / 2;
    let v = blob_operator(&FockVector::vacuum(n_modes)?, y, half, spec.eps)?;
    blob_operator(&v, x, half, spec.eps)
}

/// `(1/2) (A1 + A2)(B1 + B2) |0>`.
pub fn initial_superposition(spec: &BlobSpec, n_modes: usize, n_fermions: usize) -> Result<FockVector> {
    spec.validate(n_fermions)?;
    let [a1, a2, b1, b2] = spec.centers();
    let mut total: Option<FockVector> = None;
    for a in [a1, a2] {
        for b in [b1, b2] {
            let term = two_blob_state(spec, n_modes, n_fermions, a, b)?;
            total = Some(match total {
                None => term,
                Some(t) => t.add(&term)?,
            });
        }
    }
    Ok(total.expect("four terms").scaled(Complex64::new(0.5, 0.0)))
}

/// Particle number in the site range `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NumberOp {
    pub lo: usize,
    pub hi: usize,
}

impl NumberOp {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(invalid("region", format!("{lo}..{hi} is reversed")));
        }
        Ok(Self { lo, hi })
    }

    pub fn count(&self, mask: u64) -> u32 {
        let bits = |k: usize| if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
        (mask & bits(self.hi) & !bits(self.lo)).count_ones()
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if self.hi > v.basis.n_modes {
            return Err(invalid("region", format!("{}..{} outside 0..{}", self.lo, self.hi, v.basis.n_modes)));
        }
        let amplitudes = v
            .basis
            .states
            .iter()
            .zip(&v.amplitudes)
            .map(|(m, a)| a * self.count(*m) as f64)
            .collect();
        Ok(FockVector {
            basis: v.basis.clone(),
            amplitudes,
        })
    }

    pub fn expectation(&self, v: &FockVector) -> Result<f64> {
        Ok(v.inner(&self.apply(v)?)?.re / v.norm_sqr())
    }

    /// `||N v - <N> v||`, zero exactly for eigenvectors.
    pub fn residual(&self, v: &FockVector) -> Result<f64> {
        let mean = self.expectation(v)?;
        let nv = self.apply(v)?;
        Ok(nv
            .amplitudes
            .iter()
            .zip(&v.amplitudes)
            .map(|(a, b)| (a - b * mean).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Applies `J(x_c) = sum_y f(x_c - y) n(y)` with `f(x) = exp(-alpha x^2 / 2)`,
/// normalizes, and returns the squared norm before normalization.
pub fn collapse_j(v: &FockVector, center: f64, alpha: f64) -> Result<(FockVector, f64)> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", format!("{alpha} is not positive")));
    }
    let lattice = Lattice {
        n_modes: v.basis.n_modes,
    };
    let f: Vec<f64> = (0..lattice.n_modes)
        .map(|s| (-0.5 * alpha * (center - lattice.position(s)).powi(2)).exp())
        .collect();
    let amplitudes: Vec<Complex64> = v
        .basis
        .states
        .iter()
        .zip(&v.amplitudes)
        .map(|(m, a)| {
            let w: f64 = (0..lattice.n_modes).filter(|s| m >> s & 1 == 1).map(|s| f[s]).sum();
            a * w
        })
        .collect();
    let out = FockVector {
        basis: v.basis.clone(),
        amplitudes,
    };
    let weight = out.norm_sqr();
    if !(weight >= NULL_WEIGHT) {
        return Err(Error::NullSupport);
    }
    Ok((out.scaled(Complex64::new(1.0 / weight.sqrt(), 0.0)), weight))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCheck {
    pub expected: f64,
    pub expectation: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockReport {
    pub spec: BlobSpec,
    pub n_modes: usize,
    pub n_fermions: usize,
    pub dimension: usize,
    pub branch_count: usize,
    pub branch_moduli: Vec<f64>,
    pub total_number: EigenCheck,
    pub left_number: EigenCheck,
    /// Number operator left of `-d`: not an eigen-operator of the state.
    pub a1_number_residual: f64,
    pub collapse_center: f64,
    pub collapse_weight: f64,
    pub fidelity: f64,
    /// `|<A1 B1|J Psi>|` with both normalized.
    pub suppressed_amplitude: f64,
    /// Schmidt coefficients across `x = +d`, which splits object 2's places.
    pub object2_schmidt: Vec<f64>,
    /// Light-cone time from object 1's centre to object 2's centre.
    pub earliest_object2_flash_time: f64,
    /// Light-cone time from the collapse to object 2's nearer place.
    pub earliest_nearest_place_time: f64,
}

/// Builds the superposition, checks the number operators, collapses object 1
/// at `-d + r` and measures what is left of object 2's superposition.
pub fn macro_failure_report(spec: &BlobSpec, n_modes: usize, n_fermions: usize) -> Result<FockReport> {
    let psi = initial_superposition(spec, n_modes, n_fermions)?;
    let lattice = Lattice { n_modes };
    let [a1, a2, b1, b2] = spec.centers();
    let n = n_fermions as f64;

    let eigen = |op: NumberOp, expected: f64| -> Result<EigenCheck> {
        let expectation = op.expectation(&psi)?;
        let nv = op.apply(&psi)?;
        let residual = nv
            .amplitudes
            .iter()
            .zip(&psi.amplitudes)
            .map(|(a, b)| (a - b * expected).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(EigenCheck {
            expected,
            expectation,
            residual,
        })
    };
    let total_number = eigen(NumberOp::new(0, n_modes)?, n)?;
    let left_number = eigen(NumberOp::new(0, lattice.site(0.0)?)?, n / 2.0)?;
    let a1_number_residual = NumberOp::new(0, lattice.site(-spec.d)?)?.residual(&psi)?;

    let (collapsed, collapse_weight) = collapse_j(&psi, a2, spec.alpha)?;
    let target = two_blob_state(spec, n_modes, n_fermions, a2, b1)?
        .add(&two_blob_state(spec, n_modes, n_fermions, a2, b2)?)?
        .normalized()?;
    let suppressed = two_blob_state(spec, n_modes, n_fermions, a1, b1)?.normalized()?;

    Ok(FockReport {
        spec: *spec,
        n_modes,
        n_fermions,
        dimension: psi.basis.dimension(),
        branch_count: psi.support().count(),
        branch_moduli: psi.support().map(|(_, a)| a.norm()).collect(),
        total_number,
        left_number,
        a1_number_residual,
        collapse_center: a2,
        collapse_weight,
        fidelity: target.fidelity(&collapsed)?,
        suppressed_amplitude: suppressed.inner(&collapsed)?.norm(),
        object2_schmidt: collapsed.schmidt_across(lattice.site(spec.d)?)?,
        earliest_object2_flash_time: spec.d - (-spec.d),
        earliest_nearest_place_time: b1 - a2,
    })
}
