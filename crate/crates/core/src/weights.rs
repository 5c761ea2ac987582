//! Muckenhoupt weights: evaluation, ball-family `A_p` estimates, weighted
//! norms and the duality map `w -> w(-.)^{-p'/p}`.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{norm_of, Geometry, SampledField};

/// A positive weight on `R^n`.
///
/// Power weights `|x|^a` are sampled at `x + h/2` (every axis) so that no
/// sample sits on the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant { value: f64 },
    Power { exponent: f64 },
    Product { factors: Vec<Weight> },
    /// Grid samples in linear index order.
    Sampled { dim: usize, n: usize, half_length: f64, values: Vec<f64> },
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant { value } if *value == 1.0 => write!(f, "const"),
            Weight::Constant { value } => write!(f, "const:{value}"),
            Weight::Power { exponent } => write!(f, "pow:{exponent}"),
            Weight::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|w| w.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
            Weight::Sampled { n, .. } => write!(f, "sampled:{n}"),
        }
    }
}

impl Weight {
    pub fn unit() -> Self {
        Weight::Constant { value: 1.0 }
    }

    pub fn power(exponent: f64) -> Self {
        Weight::Power { exponent }
    }

    /// Weight from grid samples; every sample must be positive and finite.
    pub fn sampled(geom: &Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::InvalidGrid(format!("expected {} weight samples, got {}", geom.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            let p = geom.point(i);
            return Err(Error::NonPositiveWeight { x: geom.active(&p).to_vec(), value: values[i] });
        }
        Ok(Weight::Sampled { dim: geom.dim(), n: geom.n(), half_length: geom.half_length(), values })
    }

    /// Parses `const`, `const:<c>` or `pow:<a>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let bad = || invalid("weight", format!("unknown weight id `{id}` (expected const, const:<c> or pow:<a>)"));
        match id.split_once(':') {
            None if id == "const" => Ok(Self::unit()),
            Some(("const", c)) => Ok(Weight::Constant { value: c.parse().map_err(|_| bad())? }),
            Some(("pow", a)) => Ok(Weight::Power { exponent: a.parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }

    /// `w(x)`. Sampled weights use the nearest grid sample (periodically).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Power { exponent } => norm_of(x).powf(*exponent),
            Weight::Product { factors } => factors.iter().map(|w| w.eval(x)).product(),
            Weight::Sampled { dim, n, half_length, values } => {
                let h = 2.0 * half_length / *n as f64;
                let idx = |v: f64| (((v + half_length) / h).round() as i64).rem_euclid(*n as i64) as usize;
                let i = if *dim == 1 { idx(x[0]) } else { idx(x[0]) * n + idx(x[1]) };
                values[i]
            }
        }
    }

    /// Samples on `geom`, validated positive and finite.
    pub fn samples(&self, geom: &Geometry) -> Result<Vec<f64>> {
        let half = 0.5 * geom.spacing();
        let values: Vec<f64> = match self {
            Weight::Sampled { dim, n, half_length, values } => {
                if (*dim, *n, *half_length) != (geom.dim(), geom.n(), geom.half_length()) {
                    return Err(Error::GeometryMismatch("sampled weight lives on another grid".into()));
                }
                values.clone()
            }
            _ => (0..geom.len())
                .map(|i| {
                    let p = geom.point(i);
                    let mut q = [0.0; 2];
                    for (o, v) in q.iter_mut().zip(geom.active(&p)) {
                        *o = v + half;
                    }
                    self.eval(&q[..geom.dim()])
                })
                .collect(),
        };
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            let p = geom.point(i);
            return Err(Error::NonPositiveWeight { x: geom.active(&p).to_vec(), value: values[i] });
        }
        Ok(values)
    }
}

/// `x -> w(-x)^{-p'/p}` with `1/p + 1/p' = 1`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("must exceed 1, got {p}")));
    }
    let e = -1.0 / (p - 1.0);
    Ok(raise_reflected(w, e))
}

fn raise_reflected(w: &Weight, e: f64) -> Weight {
    match w {
        Weight::Constant { value } => Weight::Constant { value: value.powf(e) },
        Weight::Power { exponent } => Weight::Power { exponent: exponent * e },
        Weight::Product { factors } => {
            Weight::Product { factors: factors.iter().map(|f| raise_reflected(f, e)).collect() }
        }
        Weight::Sampled { dim, n, half_length, values } => {
            // x_m = -L + m h reflects to x_{N - m} (mod N)
            let r = |m: usize| (n - m) % n;
            let out = (0..values.len())
                .map(|i| {
                    let j = if *dim == 1 { r(i) } else { r(i / n) * n + r(i % n) };
                    values[j].powf(e)
                })
                .collect();
            Weight::Sampled { dim: *dim, n: *n, half_length: *half_length, values: out }
        }
    }
}

/// `(\int |f|^p w)^{1/p}` as a Riemann sum.
pub fn weighted_norm(f: &SampledField, p: f64, w: &Weight) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("must be at least 1, got {p}")));
    }
    let geom = f.geometry();
    let s: f64 = if let Weight::Constant { value } = w {
        if !(*value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveWeight { x: vec![], value: *value });
        }
        value * f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>()
    } else {
        let ws = w.samples(geom)?;
        f.values().iter().zip(&ws).map(|(v, wv)| v.norm().powf(p) * wv).sum()
    };
    Ok((geom.cell_volume() * s).powf(1.0 / p))
}

/// Balls `B(c, 2^j)` for lattice centres `c` and `j_min <= j <= j_max`.
/// Ball averages are means over the offset lattice `(k + 1/2) s` inside each
/// ball, `s` being `sample_spacing`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallFamily {
    pub dim: usize,
    pub centers: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
    pub sample_spacing: f64,
}

impl BallFamily {
    /// Centres on a lattice of spacing `center_spacing` within `[-extent, extent]^n`.
    pub fn dyadic(
        dim: usize,
        j_min: i32,
        j_max: i32,
        center_spacing: f64,
        extent: f64,
        sample_spacing: f64,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        if j_min > j_max {
            return Err(invalid("j_min", "empty radius range"));
        }
        if !(center_spacing > 0.0 && extent >= 0.0 && sample_spacing > 0.0) {
            return Err(invalid("center_spacing", "spacings must be positive"));
        }
        let k = (extent / center_spacing + 1e-9).floor() as i64;
        let axis: Vec<f64> = (-k..=k).map(|i| i as f64 * center_spacing).collect();
        let centers = if dim == 1 {
            axis.iter().map(|&c| [c, 0.0]).collect()
        } else {
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| [a, b])).collect()
        };
        let radii = (j_min..=j_max).map(|j| 2f64.powi(j)).collect();
        Ok(Self { dim, centers, radii, sample_spacing })
    }

    /// Default 1-D family: radii 1..8, unit-spaced centres in [-8, 8], samples every 1/64.
    pub fn default_1d() -> Self {
        Self::dyadic(1, 0, 3, 1.0, 8.0, 1.0 / 64.0).expect("valid defaults")
    }

    /// Centre lattice and sample spacing both halved; radii unchanged.
    pub fn refined(&self) -> Self {
        let mut centers = self.centers.clone();
        let step = self.center_step();
        if let Some(step) = step {
            let half = 0.5 * step;
            let extra: Vec<[f64; 2]> = if self.dim == 1 {
                self.centers.iter().map(|c| [c[0] + half, 0.0]).collect()
            } else {
                self.centers
                    .iter()
                    .flat_map(|c| [[c[0] + half, c[1]], [c[0], c[1] + half], [c[0] + half, c[1] + half]])
                    .collect()
            };
            let hi = self.centers.iter().map(|c| c[0]).fold(f64::MIN, f64::max);
            centers.extend(extra.into_iter().filter(|c| c[0] < hi && c[1] < hi));
        }
        Self { centers, sample_spacing: 0.5 * self.sample_spacing, ..self.clone() }
    }

    fn center_step(&self) -> Option<f64> {
        let mut xs: Vec<f64> = self.centers.iter().map(|c| c[0]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ball_samples(&self, center: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
        let s = self.sample_spacing;
        let k = (radius / s).ceil() as i64 + 1;
        let lattice = |c: f64| {
            // offset lattice (m + 1/2) s around the centre
            let base = (c / s).floor() as i64;
            (base - k..=base + k).map(move |m| (m as f64 + 0.5) * s)
        };
        let r2 = radius * radius;
        if self.dim == 1 {
            lattice(center[0]).filter(|x| (x - center[0]).powi(2) <= r2).map(|x| [x, 0.0]).collect()
        } else {
            lattice(center[0])
                .flat_map(|x| lattice(center[1]).map(move |y| [x, y]))
                .filter(|p| (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) <= r2)
                .collect()
        }
    }
}

/// Largest `A_p` product over the family, each ball average a sample mean.
/// Always a lower bound for `[w]_{A_p}`.
pub fn ap_constant_estimate(w: &Weight, p: f64, balls: &BallFamily) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("must exceed 1, got {p}")));
    }
    if balls.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let e = -1.0 / (p - 1.0);
    let mut best: f64 = 0.0;
    for &c in &balls.centers {
        for &r in &balls.radii {
            let pts = balls.ball_samples(c, r);
            if pts.is_empty() {
                continue;
            }
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for x in &pts {
                let v = w.eval(&x[..balls.dim]);
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::NonPositiveWeight { x: x[..balls.dim].to_vec(), value: v });
                }
                s1 += v;
                s2 += v.powf(e);
            }
            let k = pts.len() as f64;
            best = best.max((s1 / k) * (s2 / k).powf(p - 1.0));
        }
    }
    Ok(best)
}

/// Heuristic `A_p` verdict: the estimate and its value on the refined family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApVerdict {
    pub estimate: f64,
    pub refined_estimate: f64,
    pub relative_change: f64,
    /// `true` when refinement moves the estimate by at most `tolerance`.
    pub stable: bool,
}

pub fn ap_verdict(w: &Weight, p: f64, balls: &BallFamily, tolerance: f64) -> Result<ApVerdict> {
    let estimate = ap_constant_estimate(w, p, balls)?;
    let refined_estimate = ap_constant_estimate(w, p, &balls.refined())?;
    let relative_change = (refined_estimate - estimate).abs() / estimate;
    Ok(ApVerdict { estimate, refined_estimate, relative_change, stable: relative_change <= tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parse_ids() {
        assert_eq!(Weight::from_id("const").unwrap(), Weight::unit());
        assert_eq!(Weight::from_id("pow:0.5").unwrap(), Weight::power(0.5));
        assert!(Weight::from_id("pow:x").is_err());
        assert!(Weight::from_id("exp:1").is_err());
        assert_eq!(Weight::power(0.3).to_string(), "pow:0.3");
    }

    #[test]
    fn constant_weight_has_unit_constant() {
        let v = ap_constant_estimate(&Weight::unit(), 2.0, &BallFamily::default_1d()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn power_weight_half_is_stable_in_a2() {
        let v = ap_verdict(&Weight::power(0.5), 2.0, &BallFamily::default_1d(), 0.05).unwrap();
        assert!(v.stable, "{v:?}");
        assert!(v.estimate > 1.0 && v.estimate.is_finite());
    }

    #[test]
    fn power_weight_beyond_range_is_unstable() {
        let v = ap_verdict(&Weight::power(1.5), 2.0, &BallFamily::default_1d(), 0.05).unwrap();
        assert!(!v.stable, "{v:?}");
        assert!(v.refined_estimate > v.estimate);
    }

    #[test]
    fn gaussian_norm() {
        let g = Geometry::default_1d();
        let f = SampledField::from_real_fn(g, |x| (-std::f64::consts::PI * x[0] * x[0]).exp()).unwrap();
        let v = weighted_norm(&f, 2.0, &Weight::unit()).unwrap();
        assert!((v - 2f64.powf(-0.25)).abs() < 1e-6);
        assert_eq!(weighted_norm(&SampledField::zeros(g), 3.0, &Weight::power(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn norm_homogeneity() {
        let g = Geometry::new(1, 256, 8.0).unwrap();
        let f = SampledField::random(g, 5);
        let c = Complex64::new(-3.0, 4.0);
        for w in [Weight::unit(), Weight::power(0.3)] {
            let a = weighted_norm(&f.scale(c), 1.5, &w).unwrap();
            let b = weighted_norm(&f, 1.5, &w).unwrap();
            assert!((a - 5.0 * b).abs() < 1e-12 * a);
        }
        assert!((weighted_norm(&f, 2.0, &Weight::unit()).unwrap() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn dual_weights() {
        assert_eq!(dual_weight(&Weight::unit(), 3.0).unwrap(), Weight::unit());
        let d = dual_weight(&Weight::power(0.6), 3.0).unwrap();
        // p'/p = 1/(p-1) = 1/2
        assert_eq!(d, Weight::power(-0.3));
        assert!(dual_weight(&Weight::unit(), 1.0).is_err());
    }

    #[test]
    fn dual_of_sampled_reflects() {
        let g = Geometry::new(1, 16, 2.0).unwrap();
        let vals: Vec<f64> = (0..16).map(|i| 1.0 + i as f64).collect();
        let w = Weight::sampled(&g, vals.clone()).unwrap();
        let Weight::Sampled { values, .. } = dual_weight(&w, 2.0).unwrap() else { panic!() };
        // x_3 = -L + 3h reflects to x_13
        assert!((values[3] - 1.0 / vals[13]).abs() < 1e-15);
        assert!((values[0] - 1.0 / vals[0]).abs() < 1e-15);
        assert!(Weight::sampled(&g, vec![0.0; 16]).is_err());
    }
}
