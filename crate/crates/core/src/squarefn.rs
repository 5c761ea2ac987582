//! Square functions `g_psi`, `Delta_psi`, `mu_alpha`, and the embeddings
//! `E_psi^eps`, `L_psi^N` they are dual to.
//!
//! Every convolution is spectral: a layer is `(m_j f^)^vee` for a layer
//! symbol `m_j`. Square functions accumulate `w_j |layer_j|^2` over layers in
//! fixed-size chunks, in parallel, and add the chunk partials in order, so
//! results do not depend on the thread count.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{DyadicRange, Geometry, LogTimeGrid, SampledField, SpectralPlan};
use crate::kernels::Kernel;
use crate::multiplier::{apply_multiplier, symbol_from_nodes};
use crate::quad;

const CHUNK: usize = 8;

/// Spectral data shared by all layers of one square-function evaluation.
pub(crate) struct Spectrum {
    pub plan: SpectralPlan,
    pub coeffs: Vec<Complex64>,
    pub freqs: Vec<[f64; 2]>,
}

impl Spectrum {
    pub fn new(f: &SampledField) -> Self {
        let geom = *f.geometry();
        let plan = SpectralPlan::new(geom);
        let coeffs = plan.forward_values(f.values());
        let freqs = (0..geom.len()).map(|i| geom.frequency(i)).collect();
        Self { plan, coeffs, freqs }
    }

    pub fn geometry(&self) -> &Geometry {
        self.plan.geometry()
    }

    /// `(m f^)^vee` for a layer symbol `m`.
    pub fn layer(&self, m: impl Fn(&[f64]) -> Complex64) -> Vec<Complex64> {
        let dim = self.geometry().dim();
        let c: Vec<Complex64> =
            self.coeffs.iter().zip(&self.freqs).map(|(v, xi)| v * m(&xi[..dim])).collect();
        self.plan.inverse_values(&c)
    }

    /// `(sum_j w_j |(m_j f^)^vee|^2)^{1/2}` with `layer(j, xi) = m_j(xi)`.
    pub fn square_function(
        &self,
        weights: &[f64],
        layer: impl Fn(usize, &[f64]) -> Complex64 + Sync,
    ) -> SampledField {
        let n = self.coeffs.len();
        let partials: Vec<Vec<f64>> = (0..weights.len())
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = vec![0.0; n];
                for &j in chunk {
                    let vals = self.layer(|xi| layer(j, xi));
                    let w = weights[j];
                    acc.iter_mut().zip(&vals).for_each(|(a, v)| *a += w * v.norm_sqr());
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; n];
        for p in &partials {
            total.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        let values = total.into_iter().map(|s| Complex64::new(s.sqrt(), 0.0)).collect();
        SampledField::from_parts_unchecked(*self.geometry(), values)
    }
}

/// Layers `h(., t_j)` on the nodes of a [`LogTimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeIndexedField {
    tg: LogTimeGrid,
    layers: Vec<SampledField>,
}

impl TimeIndexedField {
    pub fn new(tg: LogTimeGrid, layers: Vec<SampledField>) -> Result<Self> {
        if layers.len() != tg.len() {
            return Err(invalid("layers", format!("expected {} layers, got {}", tg.len(), layers.len())));
        }
        check_shared_geometry(&layers)?;
        Ok(Self { tg, layers })
    }

    pub fn zeros(geom: Geometry, tg: LogTimeGrid) -> Self {
        Self { tg, layers: vec![SampledField::zeros(geom); tg.len()] }
    }

    pub fn grid(&self) -> &LogTimeGrid {
        &self.tg
    }

    pub fn layers(&self) -> &[SampledField] {
        &self.layers
    }

    /// Pointwise `||h^y||_H = (\int |h(y, t)|^2 dt/t)^{1/2}`.
    pub fn h_norm(&self) -> SampledField {
        pointwise_norm(&self.layers, self.tg.weight())
    }
}

/// Layers `l(., k)` for `k` in a [`DyadicRange`].
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicIndexedField {
    kr: DyadicRange,
    layers: Vec<SampledField>,
}

impl DyadicIndexedField {
    pub fn new(kr: DyadicRange, layers: Vec<SampledField>) -> Result<Self> {
        if layers.len() != kr.len() {
            return Err(invalid("layers", format!("expected {} layers, got {}", kr.len(), layers.len())));
        }
        check_shared_geometry(&layers)?;
        Ok(Self { kr, layers })
    }

    pub fn range(&self) -> &DyadicRange {
        &self.kr
    }

    pub fn layers(&self) -> &[SampledField] {
        &self.layers
    }

    /// Pointwise `||l^y||_K = (sum_k |l(y, k)|^2)^{1/2}`.
    pub fn k_norm(&self) -> SampledField {
        pointwise_norm(&self.layers, 1.0)
    }
}

fn check_shared_geometry(layers: &[SampledField]) -> Result<()> {
    if let Some(first) = layers.first() {
        for l in layers {
            first.geometry().ensure_same(l.geometry())?;
        }
    }
    Ok(())
}

fn pointwise_norm(layers: &[SampledField], weight: f64) -> SampledField {
    let geom = *layers[0].geometry();
    let mut acc = vec![0.0; geom.len()];
    for l in layers {
        acc.iter_mut().zip(l.values()).for_each(|(a, v)| *a += v.norm_sqr());
    }
    let values = acc.into_iter().map(|s| Complex64::new((weight * s).sqrt(), 0.0)).collect();
    SampledField::from_parts_unchecked(geom, values)
}

fn dilated(psi: &Kernel, t: f64, xi: &[f64]) -> Complex64 {
    psi.fourier_dilated(t, xi)
}

/// `F(., t_j) = f * psi_{t_j}` for every node.
pub fn convolve_levels(f: &SampledField, psi: &Kernel, tg: &LogTimeGrid) -> TimeIndexedField {
    let spec = Spectrum::new(f);
    let layers = tg
        .nodes()
        .par_iter()
        .map(|&t| SampledField::from_parts_unchecked(*f.geometry(), spec.layer(|xi| dilated(psi, t, xi))))
        .collect();
    TimeIndexedField { tg: *tg, layers }
}

/// `l(., k) = f * psi_{2^k}` for every `k`.
pub fn convolve_dyadic(f: &SampledField, psi: &Kernel, kr: &DyadicRange) -> DyadicIndexedField {
    let spec = Spectrum::new(f);
    let layers = kr
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&k| {
            let t = 2f64.powi(k);
            SampledField::from_parts_unchecked(*f.geometry(), spec.layer(|xi| dilated(psi, t, xi)))
        })
        .collect();
    DyadicIndexedField { kr: *kr, layers }
}

/// `g_psi(f)(x) = (\int |f * psi_t(x)|^2 dt/t)^{1/2}`.
pub fn g_psi(f: &SampledField, psi: &Kernel, tg: &LogTimeGrid) -> SampledField {
    let nodes = tg.nodes();
    let weights = vec![tg.weight(); nodes.len()];
    Spectrum::new(f).square_function(&weights, |j, xi| dilated(psi, nodes[j], xi))
}

/// `Delta_psi(f)(x) = (sum_k |f * psi_{2^k}(x)|^2)^{1/2}`.
pub fn delta_psi(f: &SampledField, psi: &Kernel, kr: &DyadicRange) -> SampledField {
    let scales: Vec<f64> = kr.iter().map(|k| 2f64.powi(k)).collect();
    let weights = vec![1.0; scales.len()];
    Spectrum::new(f).square_function(&weights, |j, xi| dilated(psi, scales[j], xi))
}

/// `mu_alpha(f) = (\int |S_t^alpha f|^2 dt/t)^{1/2}` with
/// `S_t^alpha f(x) = (alpha/t) \int_0^t (1 - u/t)^{alpha-1} (f(x-u) - f(x+u)) du`.
///
/// The `u` integral uses `v = (1 - u/t)^alpha`, which turns it into
/// `\int_0^1 (f(x-u) - f(x+u)) dv` with `u = t (1 - v^{1/alpha})`, then a
/// composite Gauss-Legendre rule with `u_nodes` nodes, graded towards
/// `v = 0`. Shifts by `u` act spectrally. The panel count grows with `t`
/// so the oscillation of `f(x -+ u)` over `[0, t]` stays resolved for the
/// frequencies present in `f`.
pub fn marcinkiewicz_direct(
    f: &SampledField,
    alpha: f64,
    tg: &LogTimeGrid,
    u_nodes: usize,
) -> Result<SampledField> {
    if f.geometry().dim() != 1 {
        return Err(invalid("f", "the Marcinkiewicz integral is one-dimensional"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if u_nodes < 16 {
        return Err(invalid("u_nodes", format!("need at least 16, got {u_nodes}")));
    }
    let spec = Spectrum::new(f);
    let band = effective_band(&spec);
    let base_panels = u_nodes.div_ceil(16);
    let nodes = tg.nodes();
    // (u_q, W_q) per time node
    let rules: Vec<Vec<(f64, f64)>> = nodes
        .iter()
        .map(|&t| {
            let panels = base_panels.max((2.0 * t * band).ceil() as usize);
            v_rule(panels).into_iter().map(|(v, w)| (t * (1.0 - v.powf(1.0 / alpha)), w)).collect()
        })
        .collect();
    let weights = vec![tg.weight(); nodes.len()];
    Ok(spec.square_function(&weights, |j, xi| {
        if xi[0].abs() > band {
            return Complex64::new(0.0, 0.0);
        }
        // f(x-u) - f(x+u)  ->  -2i sin(2 pi u xi) f^(xi)
        let s: f64 = rules[j].iter().map(|&(u, w)| w * (TAU * u * xi[0]).sin()).sum();
        Complex64::new(0.0, -2.0 * s)
    }))
}

/// Nodes and weights on `[0, 1]` in `v`, graded quadratically towards 0.
fn v_rule(panels: usize) -> Vec<(f64, f64)> {
    let rule = quad::gl16();
    let mut out = Vec::with_capacity(panels * 16);
    let width = 1.0 / panels as f64;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = mid + 0.5 * width * x;
            // v = s^2, dv = 2 s ds
            out.push((s * s, 2.0 * s * w * 0.5 * width));
        }
    }
    out
}

/// Largest `|xi|` carrying a coefficient above `1e-14` of the peak, which
/// sits clear of the transform's round-off floor.
fn effective_band(spec: &Spectrum) -> f64 {
    let peak = spec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    spec.coeffs
        .iter()
        .zip(&spec.freqs)
        .filter(|(c, _)| c.norm() > 1e-14 * peak)
        .map(|(_, xi)| xi[0].abs())
        .fold(0.0, f64::max)
}

/// `mu_1(f)` from the antiderivative: `S_t^1 f = -(F(x+t) + F(x-t) - 2F(x)) / t`
/// with `F^ = f^ / (2 pi i xi)`. Requires a mean-zero field.
pub fn marcinkiewicz_antiderivative(f: &SampledField, tg: &LogTimeGrid) -> Result<SampledField> {
    if f.geometry().dim() != 1 {
        return Err(invalid("f", "the Marcinkiewicz integral is one-dimensional"));
    }
    let spec = Spectrum::new(f);
    require_mean_zero(&spec, f)?;
    let nodes = tg.nodes();
    let weights = vec![tg.weight(); nodes.len()];
    Ok(spec.square_function(&weights, |j, xi| {
        let x = xi[0];
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let t = nodes[j];
        // F(x+t) + F(x-t) - 2F(x)  ->  (2 cos(2 pi t xi) - 2) F^
        let s = (PI * t * x).sin();
        let second = -4.0 * s * s;
        Complex64::new(0.0, 1.0) * (second / (TAU * x * t))
    }))
}

/// `|f^(0)| < 1e-9 ||f||_2`, the numerical stand-in for vanishing near the origin.
pub(crate) fn require_mean_zero(spec: &Spectrum, f: &SampledField) -> Result<()> {
    let dc = spec.coeffs[0].norm();
    let limit = 1e-9 * f.l2_norm();
    if dc > limit {
        return Err(Error::NotMeanZero { dc, limit });
    }
    Ok(())
}

/// `E_psi^eps(h) = \int_eps^{1/eps} psi_t * h(., t) dt/t`, summed over the
/// nodes strictly inside `(eps, 1/eps)`.
pub fn embed_adjoint(h: &TimeIndexedField, psi: &Kernel, eps: f64) -> Result<SampledField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let (lo, hi) = (eps, 1.0 / eps);
    let active: Vec<(f64, &SampledField)> = h
        .tg
        .nodes()
        .into_iter()
        .zip(&h.layers)
        .filter(|(t, _)| *t > lo && *t < hi)
        .collect();
    if active.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(sum_convolved(&active, psi, h.tg.weight()))
}

/// `L_psi^N(l) = sum_{|k| <= N} psi_{2^k} * l(., k)`.
pub fn embed_adjoint_discrete(l: &DyadicIndexedField, psi: &Kernel, n: i32) -> Result<SampledField> {
    if n < 0 {
        return Err(invalid("n", format!("must be nonnegative, got {n}")));
    }
    let terms: Vec<(f64, &SampledField)> = l
        .kr
        .iter()
        .zip(&l.layers)
        .filter(|(k, _)| k.abs() <= n)
        .map(|(k, f)| (2f64.powi(k), f))
        .collect();
    if terms.is_empty() {
        return Ok(SampledField::zeros(*l.layers[0].geometry()));
    }
    Ok(sum_convolved(&terms, psi, 1.0))
}

fn sum_convolved(terms: &[(f64, &SampledField)], psi: &Kernel, weight: f64) -> SampledField {
    let geom = *terms[0].1.geometry();
    let plan = SpectralPlan::new(geom);
    let freqs: Vec<[f64; 2]> = (0..geom.len()).map(|i| geom.frequency(i)).collect();
    let dim = geom.dim();
    let partials: Vec<Vec<Complex64>> = terms
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); geom.len()];
            for &(t, layer) in chunk {
                let c = plan.forward_values(layer.values());
                acc.iter_mut()
                    .zip(c.iter().zip(&freqs))
                    .for_each(|(a, (v, xi))| *a += v * dilated(psi, t, &xi[..dim]));
            }
            acc
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); geom.len()];
    for p in &partials {
        total.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    total.iter_mut().for_each(|v| *v *= weight);
    SampledField::from_parts_unchecked(geom, plan.inverse_values(&total))
}

/// `||E^eps_{psi~}(F) - T_{m^(eps)} f||_2 / ||f||_2` with `F(., t) = f * psi_t`,
/// `psi~(x) = conj(psi(-x))`, and `m^(eps)` the truncated continuous symbol on
/// the same nodes. Zero for `f = 0`.
pub fn duality_residual(f: &SampledField, psi: &Kernel, eps: f64, per_octave: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let tg = LogTimeGrid::new(eps, 1.0 / eps, per_octave)?;
    let big_f = convolve_levels(f, psi, &tg);
    let lhs = embed_adjoint(&big_f, &psi.reflected_conjugate(), eps)?;
    let inside: Vec<f64> = tg.nodes().into_iter().filter(|t| *t > eps && *t < 1.0 / eps).collect();
    let m = symbol_from_nodes(psi, &inside, tg.weight(), format!("cont[{}]", psi.id()));
    let rhs = apply_multiplier(&m, f);
    Ok(lhs.sub(&rhs)?.l2_norm() / norm)
}
