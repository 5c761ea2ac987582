//! Periodic sampling grids, the continuous-convention discrete Fourier
//! transform, and the quadrature descriptions for `dt/t` and dyadic sums.
//!
//! A field lives on `[-L, L)^n` (`n` is 1 or 2) sampled at
//! `x_m = -L + m h`, `h = 2L / N`. Spectral coefficients sit at
//! `xi_j = j / (2L)` and approximate
//! `f^(xi) = \int f(x) exp(-2 pi i <x, xi>) dx` by the Riemann sum
//! `h^n sum_m f(x_m) exp(-2 pi i <x_m, xi_j>)`. The inverse carries the
//! spectral measure `(2L)^{-n}`, so
//! `h^n sum |f|^2 = (2L)^{-n} sum |f^|^2` holds exactly.
//!
//! Coefficients are stored in FFT order: linear index `k` along an axis maps
//! to `j = k` for `k < N/2` and `j = k - N` otherwise.

pub mod io;

use std::f64::consts::LN_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Shape of a periodic grid: dimension, samples per axis, half-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    dim: usize,
    n: usize,
    half_length: f64,
}

impl Geometry {
    pub fn new(dim: usize, n: usize, half_length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N must be a power of two >= 8, got {n}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!("half-length must be positive, got {half_length}")));
        }
        Ok(Self { dim, n, half_length })
    }

    /// Default 1-D grid: N = 4096 on [-32, 32).
    pub fn default_1d() -> Self {
        Self { dim: 1, n: 4096, half_length: 32.0 }
    }

    /// Default 2-D grid: N = 512 per axis on [-16, 16)^2.
    pub fn default_2d() -> Self {
        Self { dim: 2, n: 512, half_length: 16.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Total number of samples, `N^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^n`, the spatial cell volume.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2L)^{-n}`, the spectral cell volume.
    pub fn spectral_cell_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(-(self.dim as i32))
    }

    /// Per-axis indices of a linear index (row-major, axis 0 slowest).
    pub fn axis_indices(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn linear_index(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] * self.n + axes[1]
        }
    }

    pub fn coordinate(&self, m: usize) -> f64 {
        -self.half_length + m as f64 * self.spacing()
    }

    /// Spatial point of a linear index; unused trailing components are zero.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let a = self.axis_indices(idx);
        if self.dim == 1 {
            [self.coordinate(a[0]), 0.0]
        } else {
            [self.coordinate(a[0]), self.coordinate(a[1])]
        }
    }

    /// Signed integer frequency index of an FFT-order position.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// FFT-order position of a signed frequency index, if representable.
    pub fn fft_position(&self, j: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if j < -half || j >= half {
            None
        } else if j >= 0 {
            Some(j as usize)
        } else {
            Some((j + self.n as i64) as usize)
        }
    }

    pub fn frequency_step(&self) -> f64 {
        1.0 / (2.0 * self.half_length)
    }

    /// Frequency vector of a linear spectral index; unused components are zero.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let a = self.axis_indices(idx);
        let d = self.frequency_step();
        if self.dim == 1 {
            [self.signed_index(a[0]) as f64 * d, 0.0]
        } else {
            [self.signed_index(a[0]) as f64 * d, self.signed_index(a[1]) as f64 * d]
        }
    }

    /// Signed integer frequency indices of a linear spectral index.
    pub fn frequency_indices(&self, idx: usize) -> [i64; 2] {
        let a = self.axis_indices(idx);
        if self.dim == 1 {
            [self.signed_index(a[0]), 0]
        } else {
            [self.signed_index(a[0]), self.signed_index(a[1])]
        }
    }

    /// Linear spectral index of signed frequency indices, if on the grid.
    pub fn spectral_index(&self, j: [i64; 2]) -> Option<usize> {
        let k0 = self.fft_position(j[0])?;
        if self.dim == 1 {
            if j[1] != 0 {
                return None;
            }
            Some(k0)
        } else {
            let k1 = self.fft_position(j[1])?;
            Some(self.linear_index([k0, k1]))
        }
    }

    /// Largest representable frequency magnitude along an axis, `(N/2 - 1) / (2L)`.
    pub fn max_frequency(&self) -> f64 {
        (self.n / 2 - 1) as f64 * self.frequency_step()
    }

    pub fn ensure_same(&self, other: &Geometry) -> Result<()> {
        if self != other {
            return Err(Error::GeometryMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Slice view of the active components of a point/frequency.
    pub fn active<'a>(&self, v: &'a [f64; 2]) -> &'a [f64] {
        &v[..self.dim]
    }
}

/// Complex samples of a function on a [`Geometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    geom: Geometry,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(geom: Geometry, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                geom.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { geom, values })
    }

    pub(crate) fn from_parts_unchecked(geom: Geometry, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), geom.len());
        Self { geom, values }
    }

    pub fn zeros(geom: Geometry) -> Self {
        Self { geom, values: vec![Complex64::new(0.0, 0.0); geom.len()] }
    }

    /// Samples `f` at every grid point. `f` receives the active coordinates.
    pub fn from_fn(geom: Geometry, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..geom.len())
            .map(|i| {
                let p = geom.point(i);
                f(geom.active(&p))
            })
            .collect();
        Self::new(geom, values)
    }

    pub fn from_real_fn(geom: Geometry, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::from_fn(geom, |x| Complex64::new(f(x), 0.0))
    }

    /// Independent standard normal real and imaginary parts, seeded.
    pub fn random(geom: Geometry, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = move || -> f64 { rng.sample(StandardNormal) };
        let values = (0..geom.len()).map(|_| Complex64::new(normal(), normal())).collect();
        Self { geom, values }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { geom: self.geom, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.geom.ensure_same(&other.geom)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { geom: self.geom, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.geom.ensure_same(&other.geom)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { geom: self.geom, values })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Riemann-sum mean over the periodic cell, `(2L)^{-n} h^n sum f`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// The field minus its grid mean; the zero-frequency coefficient vanishes.
    pub fn mean_subtracted(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Riemann-sum `L^2` norm, `(h^n sum |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.geom.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Riemann-sum `L^p` norm for `p >= 1`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (self.geom.cell_volume() * s).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Bilinear pairing `\int f g dx` (no conjugation).
    pub fn pairing(&self, other: &Self) -> Result<Complex64> {
        self.geom.ensure_same(&other.geom)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.geom.cell_volume())
    }

    /// Periodic shift by whole grid steps: `result(x) = f(x - shift*h)`.
    pub fn roll(&self, shift: [i64; 2]) -> Self {
        let n = self.geom.n as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.geom.axis_indices(i);
            let s0 = (a[0] as i64 - shift[0]).rem_euclid(n) as usize;
            let s1 = if self.geom.dim == 2 { (a[1] as i64 - shift[1]).rem_euclid(n) as usize } else { 0 };
            *slot = self.values[self.geom.linear_index([s0, s1])];
        }
        Self { geom: self.geom, values: out }
    }

    /// Real parts as a plain vector.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// Spectral coefficients in FFT order on a [`Geometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    geom: Geometry,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(geom: Geometry, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != geom.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                geom.len(),
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { geom, coeffs })
    }

    pub fn zeros(geom: Geometry) -> Self {
        Self { geom, coeffs: vec![Complex64::new(0.0, 0.0); geom.len()] }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed frequency indices.
    pub fn at(&self, j: [i64; 2]) -> Option<Complex64> {
        self.geom.spectral_index(j).map(|i| self.coeffs[i])
    }

    /// Multiplies every coefficient by `m(xi)`.
    pub fn multiplied(&self, m: impl Fn(&[f64]) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let xi = self.geom.frequency(i);
                c * m(self.geom.active(&xi))
            })
            .collect();
        Self { geom: self.geom, coeffs }
    }
}

/// Forward/inverse FFT plans for one geometry; shared across layers.
#[derive(Clone)]
pub struct SpectralPlan {
    geom: Geometry,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("geom", &self.geom).finish()
    }
}

impl SpectralPlan {
    pub fn new(geom: Geometry) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(geom.n);
        let inverse = planner.plan_fft_inverse(geom.n);
        Self { geom, forward, inverse }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn transform_in_place(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.geom.n;
        if self.geom.dim == 1 {
            fft.process(data);
            return;
        }
        for row in data.chunks_exact_mut(n) {
            fft.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                column[r] = data[r * n + c];
            }
            fft.process(&mut column);
            for r in 0..n {
                data[r * n + c] = column[r];
            }
        }
    }

    /// `(-1)^{k_0 + k_1}`: the phase from the grid origin at `-L`.
    fn alternate(&self, data: &mut [Complex64]) {
        for (i, v) in data.iter_mut().enumerate() {
            let a = self.geom.axis_indices(i);
            if (a[0] + a[1]) % 2 == 1 {
                *v = -*v;
            }
        }
    }

    pub fn forward_values(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform_in_place(&mut data, &self.forward);
        self.alternate(&mut data);
        let scale = self.geom.cell_volume();
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    pub fn inverse_values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.alternate(&mut data);
        self.transform_in_place(&mut data, &self.inverse);
        let scale = self.geom.spectral_cell_volume();
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    pub fn forward(&self, f: &SampledField) -> Result<SpectralField> {
        self.geom.ensure_same(&f.geom)?;
        Ok(SpectralField { geom: self.geom, coeffs: self.forward_values(&f.values) })
    }

    pub fn inverse(&self, spec: &SpectralField) -> Result<SampledField> {
        self.geom.ensure_same(&spec.geom)?;
        Ok(SampledField { geom: self.geom, values: self.inverse_values(&spec.coeffs) })
    }
}

/// `f^(xi_j) ~ h^n sum_m f(x_m) exp(-2 pi i <x_m, xi_j>)`.
pub fn forward_transform(f: &SampledField) -> SpectralField {
    let plan = SpectralPlan::new(f.geom);
    SpectralField { geom: f.geom, coeffs: plan.forward_values(&f.values) }
}

/// `f(x_m) = (2L)^{-n} sum_j F(xi_j) exp(2 pi i <x_m, xi_j>)`.
pub fn inverse_transform(spec: &SpectralField) -> SampledField {
    let plan = SpectralPlan::new(spec.geom);
    SampledField { geom: spec.geom, values: plan.inverse_values(&spec.coeffs) }
}

/// Midpoint rule in `log t` for `\int_{t_min}^{t_max} g(t) dt/t`.
///
/// The interval is cut into `M = ceil(J log2(t_max/t_min))` cells of equal
/// log-width `ln 2 / J`; nodes are the cell midpoints
/// `t_j = t_min 2^{(j + 1/2)/J}` and every node carries weight `ln 2 / J`.
/// When `J log2(t_max/t_min)` is not an integer the last cell overshoots
/// `t_max`; [`LogTimeGrid::t_upper`] reports the covered end.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogTimeGrid {
    t_min: f64,
    t_max: f64,
    per_octave: usize,
}

impl LogTimeGrid {
    pub fn new(t_min: f64, t_max: f64, per_octave: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_min > 0.0) {
            return Err(invalid("t_min", format!("must be positive, got {t_min}")));
        }
        if !(t_max.is_finite() && t_max > t_min) {
            return Err(invalid("t_max", format!("must exceed t_min = {t_min}, got {t_max}")));
        }
        if per_octave == 0 {
            return Err(invalid("per_octave", "must be at least 1"));
        }
        Ok(Self { t_min, t_max, per_octave })
    }

    /// Default truncation for a geometry: `[4h, L/4]`.
    pub fn for_geometry(geom: &Geometry, per_octave: usize) -> Result<Self> {
        Self::new(4.0 * geom.spacing(), geom.half_length() / 4.0, per_octave)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn cells(&self) -> usize {
        let exact = self.per_octave as f64 * (self.t_max / self.t_min).log2();
        // tolerate representation error in exact powers of two
        (exact - 1e-9).ceil().max(1.0) as usize
    }

    pub fn len(&self) -> usize {
        self.cells()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self) -> f64 {
        LN_2 / self.per_octave as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.t_min * ((j as f64 + 0.5) / self.per_octave as f64).exp2()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.cells()).map(|j| self.node(j)).collect()
    }

    pub fn t_upper(&self) -> f64 {
        self.t_min * (self.cells() as f64 / self.per_octave as f64).exp2()
    }

    /// Same grid with `J` doubled.
    pub fn refined(&self) -> Self {
        Self { per_octave: self.per_octave * 2, ..*self }
    }

    /// Same grid with both ends multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.t_min * factor, self.t_max * factor, self.per_octave)
    }
}

/// `w_q sum_j g(t_j)` over the nodes of `tg`.
pub fn quadrature_sum(g: impl Fn(f64) -> Complex64, tg: &LogTimeGrid) -> Complex64 {
    let s: Complex64 = (0..tg.len()).map(|j| g(tg.node(j))).sum();
    s * tg.weight()
}

/// Inclusive range of dyadic exponents `k_min ..= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DyadicRange {
    k_min: i32,
    k_max: i32,
}

impl DyadicRange {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(invalid("k_min", format!("empty dyadic range [{k_min}, {k_max}]")));
        }
        Ok(Self { k_min, k_max })
    }

    /// Range covering every grid frequency with `margin` extra octaves on each side.
    pub fn for_geometry(geom: &Geometry, margin: i32) -> Self {
        let lo = geom.frequency_step().log2().floor() as i32;
        let hi = (geom.max_frequency() * std::f64::consts::SQRT_2).log2().ceil() as i32;
        Self { k_min: -hi - margin, k_max: -lo + margin }
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> + Clone {
        self.k_min..=self.k_max
    }

    pub fn shifted(&self, by: i32) -> Self {
        Self { k_min: self.k_min + by, k_max: self.k_max + by }
    }

    pub fn contains(&self, k: i32) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }
}

pub(crate) fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Geometry::new(3, 64, 1.0).is_err());
        assert!(Geometry::new(1, 100, 1.0).is_err());
        assert!(Geometry::new(1, 4, 1.0).is_err());
        assert!(Geometry::new(1, 64, 0.0).is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Geometry::new(1, 8, 1.0).unwrap();
        let mut v = vec![c(0.0); 8];
        v[3] = c(f64::NAN);
        assert!(matches!(SampledField::new(g, v), Err(Error::NonFinite(3))));
    }

    #[test]
    fn zero_transforms_to_zero() {
        let g = Geometry::new(1, 64, 4.0).unwrap();
        let spec = forward_transform(&SampledField::zeros(g));
        assert!(spec.coeffs().iter().all(|v| v.norm() == 0.0));
        let back = inverse_transform(&SpectralField::zeros(g));
        assert!(back.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = Geometry::new(1, 1024, 16.0).unwrap();
        let f = SampledField::from_real_fn(g, |x| (-PI * x[0] * x[0]).exp()).unwrap();
        let spec = forward_transform(&f);
        let mut worst: f64 = 0.0;
        for (i, v) in spec.coeffs().iter().enumerate() {
            let xi = g.frequency(i)[0];
            worst = worst.max((v - c((-PI * xi * xi).exp())).norm());
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn fft_matches_direct_riemann_sum() {
        let g = Geometry::new(1, 32, 3.0).unwrap();
        let f = SampledField::random(g, 3);
        let spec = forward_transform(&f);
        let h = g.spacing();
        for i in 0..g.len() {
            let xi = g.frequency(i)[0];
            let direct: Complex64 = (0..g.len())
                .map(|m| f.values()[m] * Complex64::from_polar(h, -2.0 * PI * g.coordinate(m) * xi))
                .sum();
            assert!((direct - spec.coeffs()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn even_real_field_has_real_spectrum() {
        let g = Geometry::new(2, 32, 2.0).unwrap();
        let f = SampledField::from_real_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp()).unwrap();
        let spec = forward_transform(&f);
        let worst = spec.coeffs().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "imaginary residue {worst}");
    }

    #[test]
    fn round_trip_random_field() {
        for g in [Geometry::new(1, 256, 5.0).unwrap(), Geometry::new(2, 32, 1.5).unwrap()] {
            let f = SampledField::random(g, 7);
            let back = inverse_transform(&forward_transform(&f));
            assert!(back.max_abs_diff(&f) < 1e-12);
        }
    }

    #[test]
    fn single_frequency_inverts_to_exponential() {
        let g = Geometry::new(1, 64, 2.0).unwrap();
        let j = 5i64;
        let mut spec = SpectralField::zeros(g);
        spec.coeffs_mut()[g.fft_position(j).unwrap()] = c(1.0);
        let f = inverse_transform(&spec);
        let xi = j as f64 * g.frequency_step();
        for m in 0..g.n() {
            let x = g.coordinate(m);
            let expected = Complex64::from_polar(1.0 / (2.0 * g.half_length()), 2.0 * PI * x * xi);
            assert!((f.values()[m] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn parseval_identity() {
        let g = Geometry::new(2, 16, 3.0).unwrap();
        let f = SampledField::random(g, 21);
        let spec = forward_transform(&f);
        let lhs = f.l2_norm().powi(2);
        let rhs = g.spectral_cell_volume() * spec.coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!(((lhs - rhs) / lhs).abs() < 1e-10);
    }

    #[test]
    fn grid_translation_is_a_phase() {
        let g = Geometry::new(1, 128, 4.0).unwrap();
        let f = SampledField::random(g, 9);
        let shift = 7i64;
        let shifted = forward_transform(&f.roll([shift, 0]));
        let spec = forward_transform(&f);
        let a = shift as f64 * g.spacing();
        for i in 0..g.len() {
            let xi = g.frequency(i)[0];
            let expected = spec.coeffs()[i] * Complex64::from_polar(1.0, -2.0 * PI * a * xi);
            assert!((shifted.coeffs()[i] - expected).norm() < 1e-11);
        }
    }

    #[test]
    fn log_grid_integrates_constants_exactly() {
        let tg = LogTimeGrid::new(1.0, 2.0, 16).unwrap();
        let s = quadrature_sum(|_| c(1.0), &tg);
        assert!((s.re - LN_2).abs() < 1e-10);
        let wide = LogTimeGrid::new(1e-3, 1e3, 8).unwrap();
        assert!((wide.len() as f64 * wide.weight() - (1e6f64).ln()).abs() < wide.weight());
    }

    #[test]
    fn log_grid_linear_integrand() {
        let tg = LogTimeGrid::new(1.0, 2.0, 64).unwrap();
        let s = quadrature_sum(|t| c(t), &tg);
        assert!((s.re - 1.0).abs() < 1e-3);
    }

    #[test]
    fn log_grid_refinement_reduces_error() {
        let mut prev = f64::INFINITY;
        for j in [4usize, 8, 16, 32] {
            let tg = LogTimeGrid::new(1.0, 4.0, j).unwrap();
            // \int_1^4 t^2 dt/t = 15/2
            let err = (quadrature_sum(|t| c(t * t), &tg).re - 7.5).abs();
            assert!(err <= prev / 2.0, "J = {j}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn log_grid_rejects_bad_bounds() {
        assert!(LogTimeGrid::new(2.0, 1.0, 4).is_err());
        assert!(LogTimeGrid::new(0.0, 1.0, 4).is_err());
        assert!(LogTimeGrid::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn dyadic_range_is_nonempty() {
        assert!(DyadicRange::new(1, 0).is_err());
        let r = DyadicRange::new(-2, 2).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
    }
}
