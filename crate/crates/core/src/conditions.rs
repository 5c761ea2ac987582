//! Numerical checks of the kernel hypotheses: integrability quantities,
//! Fourier decay, non-degeneracy, and the Hörmander-type regularity
//! integral `L(x, y)` with its scan.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::LogTimeGrid;
use crate::kernels::Kernel;
use crate::quad;

/// A quantity that is either a finite number or known to diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "state", content = "value", rename_all = "snake_case")]
pub enum Quantity {
    Finite(f64),
    Divergent,
}

impl Quantity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Quantity::Finite(v) => Some(*v),
            Quantity::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Quantity::Divergent)
    }
}

fn require_spatial(psi: &Kernel) -> Result<()> {
    if psi.has_spatial() {
        Ok(())
    } else {
        Err(Error::MissingEvaluator { kernel: psi.id().to_string(), what: "spatial evaluator" })
    }
}

/// `\int_{R^n} g(|x|) dx` for a radial profile sampled along `n` directions
/// (1-D: the two half-lines; 2-D: 32 angles).
fn radial_integral(dim: usize, g: impl Fn(&[f64]) -> f64, r_lo: f64, r_hi: f64, cuts: &[f64], panels: usize) -> f64 {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|c| *c > r_lo && *c < r_hi).collect();
    pts.insert(0, r_lo);
    pts.push(r_hi);
    let (dirs, measure) = directions(dim);
    let mut acc = 0.0;
    for d in &dirs {
        for w in pts.windows(2) {
            acc += quad::composite(
                |r| {
                    let x = [r * d[0], r * d[1]];
                    g(&x[..dim]) * if dim == 2 { r } else { 1.0 }
                },
                w[0],
                w[1],
                panels,
            );
        }
    }
    acc * measure
}

/// `B_eps(psi) = \int_{|x| > 1} |psi(x)| |x|^eps dx`.
///
/// Unbounded kernels are integrated in `log |x|` up to `|x| = 1e6`, plus the
/// tail `C R^{eps - p + n} / (p - eps - n)` fitted to the decay exponent `p`.
pub fn b_eps(psi: &Kernel, eps: f64) -> Result<Quantity> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    if let Some(r) = psi.support_radius() {
        if r <= 1.0 {
            return Ok(Quantity::Finite(0.0));
        }
    }
    require_spatial(psi)?;
    let n = psi.dim() as f64;
    let Some(p) = psi.shape().tail_exp.or(psi.support_radius().map(|_| f64::INFINITY)) else {
        return Ok(Quantity::Divergent);
    };
    if p - eps <= n {
        return Ok(Quantity::Divergent);
    }
    let reach = psi.support_radius().unwrap_or(1e6);
    let cuts: Vec<f64> = psi.shape().breakpoints.iter().map(|b| b.abs().ln()).filter(|v| v.is_finite()).collect();
    // r = e^s, r^{n-1} dr = r^n ds
    let s_hi = reach.ln();
    let mut acc = 0.0;
    let mut pts: Vec<f64> = cuts.into_iter().filter(|c| *c > 0.0 && *c < s_hi).collect();
    pts.insert(0, 0.0);
    pts.push(s_hi);
    let dirs = directions(psi.dim());
    for d in &dirs.0 {
        for w in pts.windows(2) {
            acc += quad::composite(
                |s| {
                    let r = s.exp();
                    let x = [r * d[0], r * d[1]];
                    psi.spatial(&x[..psi.dim()]).unwrap().abs() * r.powf(eps + n)
                },
                w[0],
                w[1],
                64,
            );
        }
    }
    acc *= dirs.1;
    if psi.support_radius().is_none() {
        let mut c = 0.0;
        for d in &dirs.0 {
            let x = [reach * d[0], reach * d[1]];
            c += psi.spatial(&x[..psi.dim()])?.abs() * reach.powf(p);
        }
        c *= dirs.1;
        acc += c * reach.powf(eps - p + n) / (p - eps - n);
    }
    Ok(Quantity::Finite(acc))
}

fn directions(dim: usize) -> (Vec<[f64; 2]>, f64) {
    if dim == 1 {
        (vec![[1.0, 0.0], [-1.0, 0.0]], 1.0)
    } else {
        let dirs = (0..32)
            .map(|k| {
                let th = TAU * k as f64 / 32.0;
                [th.cos(), th.sin()]
            })
            .collect();
        (dirs, TAU / 32.0)
    }
}

/// `C_u(psi) = \int_{|x| < 1} |psi(x)|^u dx`.
pub fn c_u(psi: &Kernel, u: f64) -> Result<Quantity> {
    if !(u > 1.0 && u.is_finite()) {
        return Err(invalid("u", format!("must exceed 1, got {u}")));
    }
    require_spatial(psi)?;
    let beta = psi.shape().singular_exp;
    let singular_inside = psi.shape().breakpoints.iter().any(|b| b.abs() <= 1.0);
    if beta < 0.0 && singular_inside && beta * u <= -1.0 {
        return Ok(Quantity::Divergent);
    }
    if psi.dim() == 1 {
        let f = |x: f64| psi.spatial(&[x]).unwrap().abs().powf(u);
        let v: f64 = psi.pieces_1d(-1.0, 1.0, u).into_iter().map(|(a, b, ql, qr)| quad::graded(f, a, b, ql, qr, 16)).sum();
        Ok(Quantity::Finite(v))
    } else {
        let cuts: Vec<f64> = psi.shape().breakpoints.clone();
        let v = radial_integral(2, |x| psi.spatial(x).unwrap().abs().powf(u), 0.0, 1.0, &cuts, 32);
        Ok(Quantity::Finite(v))
    }
}

/// `||H_psi||_1` for the radial majorant `H_psi(x) = sup_{|y| >= |x|} |psi(y)|`.
///
/// The radius axis is cut into cells (uniform up to the outermost breakpoint,
/// geometric beyond); `H` on a cell is the largest sample of `|psi|` taken in
/// that cell or any farther one. Unbounded kernels get the tail
/// `\int_R^inf C r^{-p}` with `C` fitted at `R = 1e6`.
pub fn h_majorant_l1(psi: &Kernel) -> Result<Quantity> {
    require_spatial(psi)?;
    if psi.shape().singular_exp < 0.0 {
        return Ok(Quantity::Divergent);
    }
    let n = psi.dim() as f64;
    let tail = psi.shape().tail_exp;
    if psi.support_radius().is_none() && tail.is_none_or(|p| p <= n) {
        return Ok(Quantity::Divergent);
    }
    let mut radii: Vec<f64> = psi.shape().breakpoints.iter().map(|b| b.abs()).filter(|b| *b > 0.0).collect();
    let outer = psi.support_radius().unwrap_or_else(|| 2.0 * radii.iter().copied().fold(1.0, f64::max));
    radii.push(outer);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut edges = vec![0.0];
    for &r in &radii {
        let lo = *edges.last().unwrap();
        let cells = ((r - lo) * 512.0).ceil().max(1.0) as usize;
        for k in 1..=cells {
            edges.push(lo + (r - lo) * k as f64 / cells as f64);
        }
    }
    let reach = 1e6;
    if psi.support_radius().is_none() {
        while *edges.last().unwrap() < reach {
            let next = (edges.last().unwrap() * 1.01).min(reach);
            edges.push(next);
        }
    }
    let dirs = directions(psi.dim());
    let profile = |r: f64| {
        dirs.0
            .iter()
            .map(|d| {
                let x = [r * d[0], r * d[1]];
                psi.spatial(&x[..psi.dim()]).unwrap().abs()
            })
            .fold(0.0, f64::max)
    };
    let cell_max: Vec<f64> = edges
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| (0..4).map(|k| profile(w[0] + (w[1] - w[0]) * (k as f64 + 0.5) / 4.0)).fold(0.0, f64::max))
        .collect();
    let mut sup = 0.0f64;
    let mut acc = 0.0;
    let shell = |a: f64, b: f64| if psi.dim() == 1 { 2.0 * (b - a) } else { std::f64::consts::PI * (b * b - a * a) };
    for (w, m) in edges.windows(2).zip(&cell_max).rev() {
        sup = sup.max(*m);
        acc += sup * shell(w[0], w[1]);
    }
    if let (None, Some(p)) = (psi.support_radius(), tail) {
        let c = profile(reach) * reach.powf(p);
        let surface = if psi.dim() == 1 { 2.0 } else { TAU };
        acc += surface * c * reach.powf(n - p) / (p - n);
    }
    Ok(Quantity::Finite(acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    pub delta: f64,
    pub c_est: f64,
    pub c_est_doubled: f64,
    pub pass: bool,
}

/// `C = max_{1 <= |xi| <= xi_max} |psi^(xi)| |xi|^delta`, and the same with
/// `xi_max` doubled; passes when the two agree within 10%.
pub fn fourier_decay_check(psi: &Kernel, delta: f64, xi_max: f64) -> Result<DecayCheck> {
    if !(xi_max > 1.0) {
        return Err(invalid("xi_max", format!("must exceed 1, got {xi_max}")));
    }
    let scan = |hi: f64| -> f64 {
        let per_octave = 1024;
        let count = (hi.log2() * per_octave as f64).ceil() as usize;
        let dirs = directions(psi.dim()).0;
        (0..=count)
            .into_par_iter()
            .map(|k| {
                let r = (k as f64 / per_octave as f64).exp2().min(hi);
                dirs.iter()
                    .map(|d| {
                        let xi = [r * d[0], r * d[1]];
                        psi.fourier(&xi[..psi.dim()]).norm() * r.powf(delta)
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    };
    let c_est = scan(xi_max);
    let c_est_doubled = scan(2.0 * xi_max);
    let pass = c_est.is_finite() && (c_est_doubled - c_est).abs() <= 0.1 * c_est.max(f64::MIN_POSITIVE);
    Ok(DecayCheck { delta, c_est, c_est_doubled, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyMode {
    Continuous,
    Dyadic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub mode: DegeneracyMode,
    pub min_value: f64,
    pub argmin: Vec<f64>,
    pub pass: bool,
}

pub const NONDEGENERACY_FLOOR: f64 = 1e-8;

/// Continuous: `min_{|xi| = 1} sup_t |psi^(t xi)|` over `t in [1e-4, 1e4]`.
/// Dyadic: `min_{1 <= |xi| <= 2} sup_{|k| <= 40} |psi^(2^k xi)|`.
pub fn nondegeneracy(psi: &Kernel, mode: DegeneracyMode) -> NondegeneracyReport {
    let dirs = directions(psi.dim()).0;
    let dim = psi.dim();
    let samples: Vec<Vec<f64>> = match mode {
        DegeneracyMode::Continuous => dirs.iter().map(|d| d[..dim].to_vec()).collect(),
        DegeneracyMode::Dyadic => dirs
            .iter()
            .flat_map(|d| (0..=512).map(move |k| 1.0 + k as f64 / 512.0).map(move |r| vec![r * d[0], r * d[1]]))
            .map(|v| v[..dim].to_vec())
            .collect(),
    };
    let scales: Vec<f64> = match mode {
        DegeneracyMode::Continuous => (-13 * 64..=13 * 64).map(|k| (k as f64 / 64.0).exp2()).collect(),
        DegeneracyMode::Dyadic => (-40..=40).map(|k| 2f64.powi(k)).collect(),
    };
    let (min_value, idx) = samples
        .par_iter()
        .enumerate()
        .map(|(i, xi)| {
            let sup = scales.iter().map(|&t| psi.fourier_dilated(t, xi).norm()).fold(0.0, f64::max);
            (sup, i)
        })
        .reduce(|| (f64::INFINITY, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    NondegeneracyReport { mode, min_value, argmin: samples[idx].clone(), pass: min_value > NONDEGENERACY_FLOOR }
}

/// `L(x, y) = \int_0^inf |psi_t(x - y) - psi_t(x)|^2 dt/t` for a 1-D kernel.
///
/// With `u = |x|/t`, `a = 1 - y/x` and `s = sgn x` this is
/// `x^{-2} \int_0^inf u |psi(s a u) - psi(s u)|^2 du`. The `u` axis is cut at
/// the rescaled breakpoints, with geometric cuts around clustered ones, and
/// each piece is integrated with Gauss-Legendre graded at singular ends. The
/// panel count per piece scales with the node density of `tg`.
pub fn hormander_l(psi: &Kernel, x: f64, y: f64, tg: &LogTimeGrid) -> Result<f64> {
    if psi.dim() != 1 {
        return Err(invalid("psi", "the regularity integral is computed for 1-D kernels"));
    }
    require_spatial(psi)?;
    if !(x.is_finite() && y.is_finite()) || x == 0.0 || y.abs() >= 0.5 * x.abs() {
        return Err(invalid("y", format!("need 0 <= |y| < |x|/2, got x = {x}, y = {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let a = 1.0 - y / x;
    let s = x.signum();
    let f = |u: f64| {
        let d = psi.spatial(&[s * a * u]).unwrap() - psi.spatial(&[s * u]).unwrap();
        u * d * d
    };
    let mut singular: Vec<f64> = psi
        .shape()
        .breakpoints
        .iter()
        .map(|b| b.abs())
        .filter(|b| *b > 0.0)
        .flat_map(|b| [b, b / a])
        .collect();
    singular.sort_by(f64::total_cmp);
    singular.dedup();
    let upper = match psi.support_radius() {
        Some(r) => r * a.max(1.0 / a),
        None => 1e4,
    };
    let gap = (1.0 / a - 1.0).abs();
    let mut cuts: Vec<f64> = vec![0.0, upper];
    for &p in &singular {
        cuts.push(p);
        let mut d = gap;
        while d < 0.5 * p {
            cuts.push(p - d);
            cuts.push(p + d);
            d *= 2.0;
        }
    }
    cuts.retain(|c| *c >= 0.0 && *c <= upper);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-15);
    let q = quad::grading_power(2.0 * psi.shape().singular_exp);
    let is_singular = |c: f64| singular.iter().any(|p| (p - c).abs() < 1e-15);
    let panels = (tg.per_octave() / 8).max(2);
    let total: f64 = cuts
        .windows(2)
        .map(|w| {
            let ql = if is_singular(w[0]) { q } else { 1.0 };
            let qr = if is_singular(w[1]) { q } else { 1.0 };
            quad::graded(f, w[0], w[1], ql, qr, panels)
        })
        .sum();
    Ok(total / (x * x))
}

/// Scan parameters: `x = +-2^{j/(4d)}` for `j in [-8d, 8d]`,
/// `y = +-2^{-m/d} |x|` for `m in [2d, 12d]`, `d` the density, restricted to
/// `|y| < |x| / margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct ScanConfig {
    pub density: usize,
    pub per_octave: usize,
    pub margin: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { density: 1, per_octave: 16, margin: 2.0 }
    }
}

impl ScanConfig {
    pub fn refined(&self) -> Self {
        Self { density: 2 * self.density, per_octave: 2 * self.per_octave, margin: self.margin }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let d = self.density as i32;
        let mut out = Vec::new();
        for sx in [1.0, -1.0] {
            for j in -8 * d..=8 * d {
                let x = sx * (j as f64 / (4 * d) as f64).exp2();
                for sy in [1.0, -1.0] {
                    for m in 2 * d..=12 * d {
                        let rho = (-(m as f64) / d as f64).exp2();
                        if rho < 1.0 / self.margin {
                            out.push((x, sy * rho * x.abs()));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub alpha: f64,
    pub max_ratio: f64,
    pub argmax: [f64; 2],
    pub refinement_delta: f64,
    pub pass: bool,
}

/// `max R(x, y) = L(x, y) |x|^{1 + 2 alpha} / |y|^{2 alpha - 1}` for the
/// generalized Marcinkiewicz kernel, and its relative change when the point
/// density and the quadrature density both double. Passes when the maximum
/// is finite and moves by less than 5%.
pub fn mar_scan(alpha: f64, cfg: &ScanConfig) -> Result<ScanReport> {
    if !(alpha > 0.5 && alpha < 1.5) {
        return Err(invalid("alpha", format!("must lie in (1/2, 3/2), got {alpha}")));
    }
    let psi = crate::kernels::make_gen_marcinkiewicz(alpha)?;
    let (max_ratio, argmax) = scan_ratio_max(&psi, alpha, cfg)?;
    let (refined, _) = scan_ratio_max(&psi, alpha, &cfg.refined())?;
    let refinement_delta = (refined - max_ratio).abs() / max_ratio;
    Ok(ScanReport {
        alpha,
        max_ratio,
        argmax,
        refinement_delta,
        pass: max_ratio.is_finite() && refinement_delta < 0.05,
    })
}

/// Largest `R(x, y)` over the scan points of `cfg`, and where it occurs.
pub fn scan_ratio_max(psi: &Kernel, alpha: f64, cfg: &ScanConfig) -> Result<(f64, [f64; 2])> {
    let tg = LogTimeGrid::new(1.0, 2.0, cfg.per_octave)?;
    let pts = cfg.points();
    if pts.is_empty() {
        return Err(invalid("margin", "no admissible scan points"));
    }
    let ratios: Vec<(f64, [f64; 2])> = pts
        .par_iter()
        .map(|&(x, y)| {
            let l = hormander_l(psi, x, y, &tg)?;
            Ok((l * x.abs().powf(1.0 + 2.0 * alpha) / y.abs().powf(2.0 * alpha - 1.0), [x, y]))
        })
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold((f64::NEG_INFINITY, [0.0, 0.0]), |a, b| if b.0 > a.0 { b } else { a }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_from_id, make_gen_marcinkiewicz, make_haar};
    use num_complex::Complex64;

    #[test]
    fn haar_quantities() {
        let h = make_haar();
        assert_eq!(b_eps(&h, 0.5).unwrap(), Quantity::Finite(0.0));
        for u in [1.5, 2.0, 4.0] {
            assert!((c_u(&h, u).unwrap().value().unwrap() - 2.0).abs() < 1e-8);
        }
        assert!((h_majorant_l1(&h).unwrap().value().unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn poisson_tail_integral() {
        let q = kernel_from_id("poisson-q").unwrap();
        // |Q| = (x^2 - 1) / (pi (x^2 + 1)^2) on |x| > 1; for eps -> oracle by substitution
        let v = b_eps(&q, 0.5).unwrap().value().unwrap();
        let oracle = 2.0
            * quad::composite(
                |s: f64| {
                    // x = 1 / w^2 maps (0, 1] onto [1, inf)
                    let w = s;
                    let x = 1.0 / (w * w);
                    let q = (x * x - 1.0) / (std::f64::consts::PI * (x * x + 1.0).powi(2));
                    q * x.powf(0.5) * 2.0 / (w * w * w)
                },
                0.0,
                1.0,
                64,
            );
        assert!((v - oracle).abs() < 1e-6 * oracle, "{v} vs {oracle}");
        assert!(b_eps(&q, 1.5).unwrap().is_divergent());
        assert!(h_majorant_l1(&q).unwrap().value().unwrap().is_finite());
    }

    #[test]
    fn gm_cu_divergence() {
        let g = make_gen_marcinkiewicz(0.75).unwrap();
        assert!(c_u(&g, 4.0).unwrap().is_divergent());
        // \int_{-1}^{1} |phi|^u = 2 alpha^u / (1 + u (alpha - 1)) for u (1 - alpha) < 1
        let v = c_u(&g, 2.0).unwrap().value().unwrap();
        let exact = 2.0 * 0.75f64.powi(2) / (1.0 - 0.5);
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
        assert!(h_majorant_l1(&g).unwrap().is_divergent());
    }

    #[test]
    fn decay_checks() {
        let h = make_haar();
        let d = fourier_decay_check(&h, 1.0, 64.0).unwrap();
        assert!(d.pass);
        assert!((d.c_est - 2.0 / std::f64::consts::PI).abs() < 1e-4);
        assert!(fourier_decay_check(&kernel_from_id("poisson-q").unwrap(), 3.0, 64.0).unwrap().pass);
        let flat = Kernel::from_fourier("flat", 1, |_| Complex64::new(1.0, 0.0));
        assert!(!fourier_decay_check(&flat, 1.0, 64.0).unwrap().pass);
    }

    #[test]
    fn nondegeneracy_checks() {
        assert!(nondegeneracy(&make_haar(), DegeneracyMode::Continuous).pass);
        assert!(nondegeneracy(&make_haar(), DegeneracyMode::Dyadic).pass);
        assert!(nondegeneracy(&kernel_from_id("riesz-diff:0.5:ball").unwrap(), DegeneracyMode::Dyadic).pass);
        let gap = Kernel::from_fourier("gap", 1, |xi: &[f64]| {
            Complex64::new(if (1.0..=1.5).contains(&xi[0].abs()) { 1.0 } else { 0.0 }, 0.0)
        });
        let r = nondegeneracy(&gap, DegeneracyMode::Dyadic);
        assert!(!r.pass);
        assert!(r.argmin[0].abs() > 1.5);
    }

    #[test]
    fn hormander_haar_spot_and_symmetry() {
        let h = make_haar();
        let tg = LogTimeGrid::new(1.0, 2.0, 16).unwrap();
        let v = hormander_l(&h, 1.0, 0.1, &tg).unwrap();
        let exact = (1.0 / 0.81 - 1.0) / 2.0;
        assert!((v - exact).abs() < 1e-12 * exact);
        assert_eq!(hormander_l(&h, 1.0, 0.0, &tg).unwrap(), 0.0);
        assert!(hormander_l(&h, 1.0, 0.6, &tg).is_err());
        let g = make_gen_marcinkiewicz(0.75).unwrap();
        for (x, y) in [(1.3, 0.2), (0.7, -0.1)] {
            let a = hormander_l(&g, x, y, &tg).unwrap();
            let b = hormander_l(&g, -x, -y, &tg).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn scan_points_cover_quadrants() {
        let pts = ScanConfig::default().points();
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            assert!(pts.iter().any(|&(x, y)| x * sx > 0.0 && y * sy > 0.0));
        }
        assert!(pts.iter().all(|&(x, y)| y.abs() < 0.5 * x.abs()));
    }
}
