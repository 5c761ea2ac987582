//! Riesz and Bessel potentials, the Sobolev square functions `U_alpha`,
//! `T_alpha`, `E_alpha`, `D_alpha`, weighted Sobolev norms, and the
//! norm-equivalence experiments run over a family of test fields.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{norm_of, DyadicRange, Geometry, LogTimeGrid, SampledField};
use crate::kernels::{make_riesz_diff, moment_class_check, AveragingProfile, Kernel};
use crate::multiplier::{apply_with_plan, bessel_symbol, riesz_symbol};
use crate::squarefn::{delta_psi, g_psi, require_mean_zero, Spectrum};
use crate::weights::{weighted_norm, Weight};

/// Largest tolerated amplification of the inverse Bessel symbol on the grid.
pub const DYNAMIC_RANGE_LIMIT: f64 = 1e12;

/// `I_alpha f`, with symbol `(2 pi |xi|)^{-alpha}`. Negative `alpha` gives
/// `I_{-alpha}`, the fractional derivative. `f` must be numerically mean-zero.
pub fn riesz_potential(f: &SampledField, alpha: f64) -> Result<SampledField> {
    let dim = f.geometry().dim() as f64;
    if !(alpha.is_finite() && alpha < dim && alpha != 0.0) {
        return Err(invalid("alpha", format!("must be nonzero and below {dim}, got {alpha}")));
    }
    let spec = Spectrum::new(f);
    require_mean_zero(&spec, f)?;
    let table = riesz_symbol(alpha).tabulate(f.geometry());
    Ok(apply_with_plan(&spec.plan, &table, f))
}

/// `J_alpha f`, with symbol `(1 + 4 pi^2 |xi|^2)^{-alpha/2}`, any real `alpha`.
pub fn bessel_potential(f: &SampledField, alpha: f64) -> Result<SampledField> {
    if !alpha.is_finite() {
        return Err(invalid("alpha", "must be finite"));
    }
    let spec = Spectrum::new(f);
    let table = bessel_symbol(alpha).tabulate(f.geometry());
    Ok(apply_with_plan(&spec.plan, &table, f))
}

fn check_profile(profile: &AveragingProfile, alpha: f64, f: &SampledField) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if profile.dim() != f.geometry().dim() {
        return Err(Error::GeometryMismatch(format!(
            "profile is {}-dimensional, field is {}-dimensional",
            profile.dim(),
            f.geometry().dim()
        )));
    }
    let report = moment_class_check(profile, alpha);
    if !report.passes {
        return Err(Error::MomentClass {
            profile: profile.id().to_string(),
            alpha,
            detail: report.failure.unwrap_or_default(),
        });
    }
    Ok(())
}

/// `U_alpha(f) = (\int |f - Phi_t * f|^2 t^{-2 alpha} dt/t)^{1/2}`.
pub fn u_alpha(f: &SampledField, alpha: f64, profile: &AveragingProfile, tg: &LogTimeGrid) -> Result<SampledField> {
    check_profile(profile, alpha, f)?;
    let nodes = tg.nodes();
    let weights: Vec<f64> = nodes.iter().map(|t| tg.weight() * t.powf(-2.0 * alpha)).collect();
    Ok(Spectrum::new(f).square_function(&weights, |j, xi| scaled_complement(profile, nodes[j], xi)))
}

fn scaled_complement(profile: &AveragingProfile, t: f64, xi: &[f64]) -> Complex64 {
    let mut y = [0.0; 2];
    for (o, v) in y.iter_mut().zip(xi) {
        *o = t * v;
    }
    profile.complement(&y[..xi.len()])
}

/// `T_alpha(f) = U_alpha(I_alpha f)`.
pub fn t_alpha(f: &SampledField, alpha: f64, profile: &AveragingProfile, tg: &LogTimeGrid) -> Result<SampledField> {
    check_profile(profile, alpha, f)?;
    u_alpha(&riesz_potential(f, alpha)?, alpha, profile, tg)
}

/// `T_alpha(f)` as a single square function with layer symbol
/// `(2 pi |xi|)^{-alpha} (1 - Phi^(t xi)) t^{-alpha}`.
pub fn t_alpha_direct(
    f: &SampledField,
    alpha: f64,
    profile: &AveragingProfile,
    tg: &LogTimeGrid,
) -> Result<SampledField> {
    check_profile(profile, alpha, f)?;
    let spec = Spectrum::new(f);
    require_mean_zero(&spec, f)?;
    let nodes = tg.nodes();
    let weights: Vec<f64> = nodes.iter().map(|t| tg.weight() * t.powf(-2.0 * alpha)).collect();
    Ok(spec.square_function(&weights, |j, xi| {
        let r = norm_of(xi);
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        scaled_complement(profile, nodes[j], xi) * (TAU * r).powf(-alpha)
    }))
}

/// `E_alpha(f) = (sum_k |f - Phi_{2^k} * f|^2 2^{-2 k alpha})^{1/2}`.
pub fn e_alpha(f: &SampledField, alpha: f64, profile: &AveragingProfile, kr: &DyadicRange) -> Result<SampledField> {
    check_profile(profile, alpha, f)?;
    let scales: Vec<f64> = kr.iter().map(|k| 2f64.powi(k)).collect();
    let weights: Vec<f64> = scales.iter().map(|s| s.powf(-2.0 * alpha)).collect();
    Ok(Spectrum::new(f).square_function(&weights, |j, xi| scaled_complement(profile, scales[j], xi)))
}

/// `D_alpha(f) = Delta_psi(f)` for `psi = L_alpha - Phi * L_alpha`.
pub fn d_alpha(f: &SampledField, alpha: f64, profile: &AveragingProfile, kr: &DyadicRange) -> Result<SampledField> {
    check_profile(profile, alpha, f)?;
    let spec = Spectrum::new(f);
    require_mean_zero(&spec, f)?;
    let psi = make_riesz_diff(alpha, profile)?;
    Ok(delta_psi(f, &psi, kr))
}

/// `||g||_{p,w}` where `f = J_alpha g`.
pub fn sobolev_norm(f: &SampledField, alpha: f64, p: f64, w: &Weight) -> Result<f64> {
    let geom = f.geometry();
    let top = geom.max_frequency() * (geom.dim() as f64).sqrt();
    let amplification = (1.0 + (TAU * top).powi(2)).powf(0.5 * alpha);
    if !(amplification <= DYNAMIC_RANGE_LIMIT) {
        return Err(Error::DynamicRange { amplification, limit: DYNAMIC_RANGE_LIMIT });
    }
    weighted_norm(&bessel_potential(f, -alpha)?, p, w)
}

/// Named, mean-subtracted test fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    members: Vec<(String, SampledField)>,
}

impl TestFamily {
    pub fn new(members: Vec<(String, SampledField)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(Self { members })
    }

    /// The 20-member family: Gaussians at 5 widths and 2 centres, Gaussians
    /// modulated at 5 frequencies, and 5 compactly supported smooth bumps.
    /// Centres, phases and bump radii are drawn from `seed`.
    pub fn standard(geom: Geometry, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = geom.dim();
        let centre = |rng: &mut ChaCha8Rng, spread: f64| -> [f64; 2] {
            [rng.random_range(-spread..spread), if dim == 2 { rng.random_range(-spread..spread) } else { 0.0 }]
        };
        let dist2 = |x: &[f64], c: &[f64; 2]| x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut members = Vec::with_capacity(20);
        for width in [0.5, 0.75, 1.0, 1.5, 2.0] {
            for side in [-1.0, 1.0] {
                let mut c = centre(&mut rng, 1.0);
                c[0] += 2.0 * side;
                let f = SampledField::from_real_fn(geom, |x| (-PI * dist2(x, &c) / (width * width)).exp())?;
                members.push((format!("gauss(w={width},c={:.3})", c[0]), f.mean_subtracted()));
            }
        }
        for freq in [0.5, 1.0, 2.0, 3.0, 4.0] {
            let c = centre(&mut rng, 2.0);
            let phase = rng.random_range(0.0..TAU);
            let f = SampledField::from_real_fn(geom, |x| {
                (-PI * dist2(x, &c) / 2.25).exp() * (TAU * freq * (x[0] - c[0]) + phase).cos()
            })?;
            members.push((format!("modulated(nu={freq})"), f.mean_subtracted()));
        }
        for i in 0..5 {
            let c = centre(&mut rng, 4.0);
            let radius = rng.random_range(1.0..4.0);
            let f = SampledField::from_real_fn(geom, |x| {
                let r2 = dist2(x, &c) / (radius * radius);
                if r2 < 1.0 {
                    (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            })?;
            members.push((format!("bump{i}(r={radius:.3})"), f.mean_subtracted()));
        }
        Self::new(members)
    }

    pub fn members(&self) -> &[(String, SampledField)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let k = Complex64::new(c, 0.0);
        Self { members: self.members.iter().map(|(n, f)| (n.clone(), f.scale(k))).collect() }
    }
}

/// The ratio measured by an equivalence experiment.
#[derive(Debug, Clone)]
pub enum Operator {
    /// `||g_psi f||_{p,w} / ||f||_{p,w}`.
    GPsi { kernel: Kernel, tg: LogTimeGrid },
    /// `||Delta_psi f||_{p,w} / ||f||_{p,w}`.
    DeltaPsi { kernel: Kernel, kr: DyadicRange },
    /// `(||E_alpha(J_alpha g)||_{p,w} + ||J_alpha g||_{p,w}) / ||g||_{p,w}`.
    SobolevChain { alpha: f64, profile: AveragingProfile, kr: DyadicRange },
}

impl Operator {
    pub fn name(&self) -> String {
        match self {
            Operator::GPsi { kernel, .. } => format!("g_psi[{}]", kernel.id()),
            Operator::DeltaPsi { kernel, .. } => format!("delta_psi[{}]", kernel.id()),
            Operator::SobolevChain { alpha, profile, .. } => format!("sobolev_chain[{alpha},{}]", profile.id()),
        }
    }

    /// The ratio for one field, or `None` when the denominator vanishes.
    pub fn ratio(&self, f: &SampledField, p: f64, w: &Weight) -> Result<Option<f64>> {
        let den = weighted_norm(f, p, w)?;
        if den == 0.0 {
            return Ok(None);
        }
        let num = match self {
            Operator::GPsi { kernel, tg } => weighted_norm(&g_psi(f, kernel, tg), p, w)?,
            Operator::DeltaPsi { kernel, kr } => weighted_norm(&delta_psi(f, kernel, kr), p, w)?,
            Operator::SobolevChain { alpha, profile, kr } => {
                let jg = bessel_potential(f, *alpha)?;
                weighted_norm(&e_alpha(&jg, *alpha, profile, kr)?, p, w)? + weighted_norm(&jg, p, w)?
            }
        };
        Ok(Some(num / den))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub operator: String,
    pub p: f64,
    pub weight: String,
    pub members: Vec<String>,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// Members whose denominator vanished.
    pub skipped: Vec<String>,
}

/// Ratios of `op` over every family member; `spread = max / min`.
pub fn equivalence_experiment(family: &TestFamily, op: &Operator, p: f64, w: &Weight) -> Result<RatioReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let results: Vec<Option<f64>> =
        family.members.par_iter().map(|(_, f)| op.ratio(f, p, w)).collect::<Result<_>>()?;
    let mut members = Vec::new();
    let mut ratios = Vec::new();
    let mut skipped = Vec::new();
    for ((name, _), r) in family.members.iter().zip(results) {
        match r {
            Some(v) => {
                members.push(name.clone());
                ratios.push(v);
            }
            None => skipped.push(name.clone()),
        }
    }
    if ratios.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioReport { operator: op.name(), p, weight: w.to_string(), members, ratios, min, max, spread: max / min, skipped })
}

/// Spectral bounds for the `p = 2`, unweighted Sobolev chain ratio.
///
/// With `e(xi) = sum_k |1 - Phi^(2^k xi)|^2 2^{-2k alpha}`,
/// `K(xi) = (1 + 4 pi^2 |xi|^2)^{-alpha/2}` and `s = K (e + 1)^{1/2}`, every
/// ratio lies in `[min s, sqrt(2) max s]` over the nonzero grid frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBound {
    pub min_s: f64,
    pub max_s: f64,
    /// `sqrt(2) max s / min s`.
    pub spread_bound: f64,
}

pub fn sobolev_chain_spectral_bound(
    geom: &Geometry,
    alpha: f64,
    profile: &AveragingProfile,
    kr: &DyadicRange,
) -> SpectralBound {
    let scales: Vec<f64> = kr.iter().map(|k| 2f64.powi(k)).collect();
    let (min_s, max_s) = (1..geom.len())
        .into_par_iter()
        .map(|i| {
            let xi = geom.frequency(i);
            let xi = geom.active(&xi);
            let e: f64 = scales
                .iter()
                .map(|&t| scaled_complement(profile, t, xi).norm_sqr() * t.powf(-2.0 * alpha))
                .sum();
            let r = TAU * norm_of(xi);
            let k = (1.0 + r * r).powf(-0.5 * alpha);
            let s = k * (e + 1.0).sqrt();
            (s, s)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    SpectralBound { min_s, max_s, spread_bound: std::f64::consts::SQRT_2 * max_s / min_s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_ball_average, make_box_average, make_haar};

    fn geom() -> Geometry {
        Geometry::new(1, 512, 16.0).unwrap()
    }

    fn mean_zero(g: Geometry) -> SampledField {
        SampledField::from_real_fn(g, |x| x[0] * (-PI * x[0] * x[0]).exp()).unwrap()
    }

    #[test]
    fn riesz_potential_gate_and_composition() {
        let g = geom();
        let f = mean_zero(g);
        assert_eq!(riesz_potential(&SampledField::zeros(g), 0.3).unwrap().max_abs(), 0.0);
        let ab = riesz_potential(&riesz_potential(&f, 0.3).unwrap(), 0.4).unwrap();
        let direct = riesz_potential(&f, 0.7).unwrap();
        assert!(ab.max_abs_diff(&direct) < 1e-10 * direct.max_abs());
        let offset = f.map(|v| v + 1.0);
        assert!(matches!(riesz_potential(&offset, 0.5), Err(Error::NotMeanZero { .. })));
        assert!(riesz_potential(&f, 1.0).is_err());
    }

    #[test]
    fn riesz_eigenfunction() {
        let g = geom();
        let xi0 = 3.0 * g.frequency_step();
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, TAU * xi0 * x[0])).unwrap();
        let out = riesz_potential(&f, 0.5).unwrap();
        assert!(out.max_abs_diff(&f.scale(Complex64::new((TAU * xi0).powf(-0.5), 0.0))) < 1e-12);
    }

    #[test]
    fn bessel_properties() {
        let g = geom();
        let c = SampledField::from_real_fn(g, |_| 2.5).unwrap();
        assert!(bessel_potential(&c, 1.2).unwrap().max_abs_diff(&c) < 1e-12);
        let f = SampledField::random(g, 8);
        let j = bessel_potential(&f, 0.8).unwrap();
        assert!(j.l2_norm() <= f.l2_norm());
        let back = bessel_potential(&j, -0.8).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn u_alpha_constant_and_eigenfunction() {
        let g = geom();
        let ball = make_ball_average(1).unwrap();
        let tg = LogTimeGrid::new(1e-3, 1e3, 16).unwrap();
        let c = SampledField::from_real_fn(g, |_| 1.0).unwrap();
        assert!(u_alpha(&c, 0.5, &ball, &tg).unwrap().max_abs() < 1e-12);
        let xi0 = 4.0 * g.frequency_step();
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, TAU * xi0 * x[0])).unwrap();
        let u = u_alpha(&f, 0.5, &ball, &tg).unwrap();
        let expect: f64 = tg
            .nodes()
            .iter()
            .map(|t| ball.complement(&[t * xi0]).norm_sqr() * t.powf(-1.0) * tg.weight())
            .sum::<f64>()
            .sqrt();
        assert!(u.values().iter().all(|v| (v.re - expect).abs() < 1e-10));
    }

    #[test]
    fn u_alpha_rejects_profile_outside_class() {
        let g = geom();
        let tg = LogTimeGrid::new(0.1, 1.0, 4).unwrap();
        let shifted = make_box_average(0.0, 2.0).unwrap();
        let f = mean_zero(g);
        assert!(matches!(u_alpha(&f, 1.5, &shifted, &tg), Err(Error::MomentClass { .. })));
    }

    #[test]
    fn t_alpha_routes_agree() {
        let g = geom();
        let ball = make_ball_average(1).unwrap();
        let tg = LogTimeGrid::new(1e-2, 1e2, 8).unwrap();
        let f = mean_zero(g);
        let a = t_alpha(&f, 0.5, &ball, &tg).unwrap();
        let b = t_alpha_direct(&f, 0.5, &ball, &tg).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10 * a.max_abs());
        assert_eq!(t_alpha(&SampledField::zeros(g), 0.5, &ball, &tg).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn d_alpha_is_e_alpha_of_riesz_potential() {
        let g = geom();
        let ball = make_ball_average(1).unwrap();
        let kr = DyadicRange::new(-8, 6).unwrap();
        let f = mean_zero(g);
        let d = d_alpha(&f, 0.5, &ball, &kr).unwrap();
        let e = e_alpha(&riesz_potential(&f, 0.5).unwrap(), 0.5, &ball, &kr).unwrap();
        assert!(d.max_abs_diff(&e) < 1e-10 * d.max_abs());
    }

    #[test]
    fn sobolev_norm_round_trip_and_limits() {
        let g = geom();
        let g0 = mean_zero(g);
        let w = Weight::power(0.3);
        let f = bessel_potential(&g0, 1.0).unwrap();
        let direct = weighted_norm(&g0, 1.5, &w).unwrap();
        assert!((sobolev_norm(&f, 1.0, 1.5, &w).unwrap() - direct).abs() < 1e-8 * direct);
        let tiny = sobolev_norm(&g0, 1e-9, 2.0, &Weight::unit()).unwrap();
        assert!((tiny - g0.l2_norm()).abs() < 1e-6);
        let mut last = 0.0;
        for a in [0.0, 0.5, 1.0, 1.5] {
            let v = sobolev_norm(&g0, a, 2.0, &Weight::unit()).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(matches!(sobolev_norm(&g0, 12.0, 2.0, &Weight::unit()), Err(Error::DynamicRange { .. })));
    }

    #[test]
    fn family_shape() {
        let fam = TestFamily::standard(geom(), 1).unwrap();
        assert_eq!(fam.len(), 20);
        for (_, f) in fam.members() {
            assert!(f.mean().norm() < 1e-15);
        }
        assert_eq!(TestFamily::standard(geom(), 1).unwrap(), fam);
        assert_ne!(TestFamily::standard(geom(), 2).unwrap(), fam);
    }

    #[test]
    fn experiment_basics() {
        let g = geom();
        let tg = LogTimeGrid::new(1e-4, 1e4, 8).unwrap();
        let op = Operator::GPsi { kernel: make_haar(), tg };
        let single = TestFamily::new(vec![("f".into(), mean_zero(g))]).unwrap();
        let r = equivalence_experiment(&single, &op, 2.0, &Weight::unit()).unwrap();
        assert_eq!(r.spread, 1.0);
        let with_zero = TestFamily::new(vec![("f".into(), mean_zero(g)), ("zero".into(), SampledField::zeros(g))])
            .unwrap();
        let r = equivalence_experiment(&with_zero, &op, 2.0, &Weight::unit()).unwrap();
        assert_eq!(r.skipped, vec!["zero".to_string()]);
        assert!(TestFamily::new(vec![]).is_err());
    }
}
