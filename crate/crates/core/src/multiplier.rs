//! Multiplier symbols `m(xi)` and the operators `T_m f = (m f^)^vee`.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{norm_of, DyadicRange, Geometry, LogTimeGrid, SampledField, SpectralPlan};
use crate::kernels::Kernel;

type SymbolFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
type BoundFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Homogeneity {
    /// `m(s xi) = m(xi)` for all `s > 0` (up to truncation).
    Degree0,
    /// `m(2 xi) = m(xi)`.
    Dyadic,
    None,
}

/// A function of frequency with an explicit value at `xi = 0`.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    eval: SymbolFn,
    homogeneity: Homogeneity,
    dc: Complex64,
    truncation: Option<BoundFn>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("homogeneity", &self.homogeneity)
            .field("dc", &self.dc)
            .finish()
    }
}

impl Symbol {
    pub fn new(
        name: impl Into<String>,
        homogeneity: Homogeneity,
        dc: Complex64,
        eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), homogeneity, dc, truncation: None }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("const({c})"), Homogeneity::Degree0, c, move |_| c)
    }

    /// `xi -> exp(-2 pi i <a, xi>)`, translation by `a`.
    pub fn translation(a: &[f64]) -> Self {
        let a = a.to_vec();
        Self::new("translation", Homogeneity::None, Complex64::new(1.0, 0.0), move |xi: &[f64]| {
            let d: f64 = a.iter().zip(xi).map(|(x, y)| x * y).sum();
            Complex64::from_polar(1.0, -TAU * d)
        })
    }

    fn with_truncation(mut self, bound: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.truncation = Some(Arc::new(bound));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn homogeneity(&self) -> Homogeneity {
        self.homogeneity
    }

    pub fn dc(&self) -> Complex64 {
        self.dc
    }

    /// `m(xi)`, with the stored value at the origin.
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if xi.iter().all(|v| *v == 0.0) {
            self.dc
        } else {
            (self.eval)(xi)
        }
    }

    /// Upper bound on the neglected part of an infinite integral or sum,
    /// when decay metadata made one available.
    pub fn truncation_bound(&self, xi: &[f64]) -> Option<f64> {
        self.truncation.as_ref().map(|b| b(xi))
    }

    /// Pointwise product `m1 m2`.
    pub fn product(&self, other: &Symbol) -> Symbol {
        let (a, b) = (self.clone(), other.clone());
        let homogeneity = if self.homogeneity == other.homogeneity { self.homogeneity } else { Homogeneity::None };
        Symbol::new(format!("{}*{}", self.name, other.name), homogeneity, self.dc * other.dc, move |xi: &[f64]| {
            a.eval(xi) * b.eval(xi)
        })
    }

    /// Values on the spectral grid of `geom`, in FFT order.
    pub fn tabulate(&self, geom: &Geometry) -> Vec<Complex64> {
        (0..geom.len())
            .into_par_iter()
            .map(|i| {
                let xi = geom.frequency(i);
                self.eval(geom.active(&xi))
            })
            .collect()
    }
}

/// `m(xi) = \int |psi^(t xi)|^2 dt/t` by the log-time midpoint rule; `m(0) = 0`.
pub fn symbol_continuous(psi: &Kernel, tg: &LogTimeGrid) -> Symbol {
    symbol_from_nodes(psi, &tg.nodes(), tg.weight(), format!("cont[{}]", psi.id()))
        .with_truncation(continuous_tail(psi, tg.t_min(), tg.t_upper()))
}

pub(crate) fn symbol_from_nodes(psi: &Kernel, nodes: &[f64], weight: f64, name: String) -> Symbol {
    let f = psi.fourier_fn();
    let nodes = nodes.to_vec();
    Symbol::new(name, Homogeneity::Degree0, Complex64::new(0.0, 0.0), move |xi: &[f64]| {
        let mut s = 0.0;
        let mut y = [0.0; 2];
        for &t in &nodes {
            for (o, v) in y.iter_mut().zip(xi) {
                *o = t * v;
            }
            s += f(&y[..xi.len()]).norm_sqr();
        }
        Complex64::new(s * weight, 0.0)
    })
}

fn continuous_tail(psi: &Kernel, t_lo: f64, t_hi: f64) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    let env = psi.envelope();
    move |xi: &[f64]| {
        let Some(e) = env else { return f64::INFINITY };
        let r = norm_of(xi);
        let lo = (e.low_const * (r * t_lo).powf(e.low_exp)).powi(2) / (2.0 * e.low_exp);
        let hi = (e.high_const * (r * t_hi).powf(-e.high_exp)).powi(2) / (2.0 * e.high_exp);
        lo + hi
    }
}

/// `m(xi) = sum_{k in kr} |psi^(2^k xi)|^2`; `m(0) = 0`.
pub fn symbol_discrete(psi: &Kernel, kr: &DyadicRange) -> Symbol {
    let f = psi.fourier_fn();
    let scales: Vec<f64> = kr.iter().map(|k| 2f64.powi(k)).collect();
    let env = psi.envelope();
    let (k_min, k_max) = (kr.k_min(), kr.k_max());
    Symbol::new(format!("disc[{}]", psi.id()), Homogeneity::Dyadic, Complex64::new(0.0, 0.0), move |xi: &[f64]| {
        let mut s = 0.0;
        let mut y = [0.0; 2];
        for &t in &scales {
            for (o, v) in y.iter_mut().zip(xi) {
                *o = t * v;
            }
            s += f(&y[..xi.len()]).norm_sqr();
        }
        Complex64::new(s, 0.0)
    })
    .with_truncation(move |xi: &[f64]| {
        let Some(e) = env else { return f64::INFINITY };
        let r = norm_of(xi);
        let a = 2.0 * e.low_exp;
        let b = 2.0 * e.high_exp;
        let lo = e.low_const.powi(2) * (r * 2f64.powi(k_min)).powf(a) / (2f64.powf(a) - 1.0);
        let hi = e.high_const.powi(2) * (r * 2f64.powi(k_max + 1)).powf(-b) / (1.0 - 2f64.powf(-b));
        lo + hi
    })
}

/// `T_m f`.
pub fn apply_multiplier(m: &Symbol, f: &SampledField) -> SampledField {
    let plan = SpectralPlan::new(*f.geometry());
    apply_with_plan(&plan, &m.tabulate(f.geometry()), f)
}

pub(crate) fn apply_with_plan(plan: &SpectralPlan, table: &[Complex64], f: &SampledField) -> SampledField {
    let mut c = plan.forward_values(f.values());
    c.iter_mut().zip(table).for_each(|(v, m)| *v *= m);
    SampledField::from_parts_unchecked(*f.geometry(), plan.inverse_values(&c))
}

/// `1/m` with value 0 at the origin, after checking `|m| >= floor` at every
/// nonzero frequency of `geom`.
pub fn invert_multiplier(m: &Symbol, geom: &Geometry, floor: f64) -> Result<Symbol> {
    if !(floor > 0.0) {
        return Err(invalid("floor", format!("must be positive, got {floor}")));
    }
    let table = m.tabulate(geom);
    let worst = table
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| (i, v.norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((i, value)) = worst {
        if !(value >= floor) {
            let xi = geom.frequency(i);
            return Err(Error::DegenerateSymbol { frequency: geom.active(&xi).to_vec(), value, floor });
        }
    }
    let inner = m.clone();
    Ok(Symbol::new(format!("inv[{}]", m.name), m.homogeneity, Complex64::new(0.0, 0.0), move |xi: &[f64]| {
        1.0 / inner.eval(xi)
    }))
}

/// `(2 pi |xi|)^{-alpha}`, 0 at the origin. Negative `alpha` gives the
/// fractional derivative `I_{-alpha}`.
pub fn riesz_symbol(alpha: f64) -> Symbol {
    Symbol::new(format!("riesz:{alpha}"), Homogeneity::None, Complex64::new(0.0, 0.0), move |xi: &[f64]| {
        Complex64::new((TAU * norm_of(xi)).powf(-alpha), 0.0)
    })
}

/// `(1 + 4 pi^2 |xi|^2)^{-alpha/2}` for any real `alpha`.
pub fn bessel_symbol(alpha: f64) -> Symbol {
    Symbol::new(format!("bessel:{alpha}"), Homogeneity::None, Complex64::new(1.0, 0.0), move |xi: &[f64]| {
        Complex64::new(bessel_factor(xi, alpha), 0.0)
    })
}

fn bessel_factor(xi: &[f64], alpha: f64) -> f64 {
    let r = TAU * norm_of(xi);
    (1.0 + r * r).powf(-0.5 * alpha)
}

/// `l(xi) = (2 pi |xi|)^alpha / (1 + 4 pi^2 |xi|^2)^{alpha/2}`, `l(0) = 0`.
pub fn riesz_bessel_ratio(alpha: f64) -> Symbol {
    Symbol::new(format!("ell:{alpha}"), Homogeneity::None, Complex64::new(0.0, 0.0), move |xi: &[f64]| {
        let r = TAU * norm_of(xi);
        Complex64::new((r / (1.0 + r * r).sqrt()).powf(alpha), 0.0)
    })
}

/// `m(xi) = (1 + 4 pi^2 |xi|^2)^{alpha/2} / (1 + (2 pi |xi|)^alpha)`, `m(0) = 1`.
pub fn bessel_chain_ratio(alpha: f64) -> Symbol {
    Symbol::new(format!("chain:{alpha}"), Homogeneity::None, Complex64::new(1.0, 0.0), move |xi: &[f64]| {
        let r = TAU * norm_of(xi);
        Complex64::new((1.0 + r * r).powf(0.5 * alpha) / (1.0 + r.powf(alpha)), 0.0)
    })
}

/// `max |m(2 xi) - m(xi)|` over nonzero grid frequencies whose double is on the grid.
pub fn homogeneity_defect(m: &Symbol, geom: &Geometry) -> f64 {
    doubling_pairs(geom)
        .into_par_iter()
        .map(|(xi, xi2)| (m.eval(geom.active(&xi2)) - m.eval(geom.active(&xi))).norm())
        .reduce(|| 0.0, f64::max)
}

pub(crate) fn doubling_pairs(geom: &Geometry) -> Vec<([f64; 2], [f64; 2])> {
    (1..geom.len())
        .filter_map(|i| {
            let j = geom.frequency_indices(i);
            geom.spectral_index([2 * j[0], 2 * j[1]]).map(|k| (geom.frequency(i), geom.frequency(k)))
        })
        .collect()
}

/// `min |m|` over grid frequencies in the annulus `1 <= |xi| <= 2`.
pub fn annulus_min(m: &Symbol, geom: &Geometry) -> Option<f64> {
    (0..geom.len())
        .into_par_iter()
        .filter_map(|i| {
            let xi = geom.frequency(i);
            let r = norm_of(geom.active(&xi));
            (1.0..=2.0).contains(&r).then(|| m.eval(geom.active(&xi)).norm())
        })
        .reduce_with(f64::min)
}

/// `min |m|` over `samples` equally spaced points of the unit sphere.
pub fn sphere_min(m: &Symbol, dim: usize, samples: usize) -> f64 {
    if dim == 1 {
        return m.eval(&[1.0]).norm().min(m.eval(&[-1.0]).norm());
    }
    (0..samples.max(1))
        .map(|k| {
            let th = TAU * k as f64 / samples as f64;
            m.eval(&[th.cos(), th.sin()]).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// CSV of `(xi, re, im)` rows (1-D, ascending `xi`) or `(xi0, xi1, re, im)` (2-D).
pub fn write_symbol_csv(m: &Symbol, geom: &Geometry, mut w: impl Write) -> Result<()> {
    let table = m.tabulate(geom);
    let mut order: Vec<usize> = (0..geom.len()).collect();
    order.sort_by_key(|&i| geom.frequency_indices(i));
    if geom.dim() == 1 {
        writeln!(w, "xi,re,im")?;
        for i in order {
            writeln!(w, "{:?},{:?},{:?}", geom.frequency(i)[0], table[i].re, table[i].im)?;
        }
    } else {
        writeln!(w, "xi0,xi1,re,im")?;
        for i in order {
            let xi = geom.frequency(i);
            writeln!(w, "{:?},{:?},{:?},{:?}", xi[0], xi[1], table[i].re, table[i].im)?;
        }
    }
    Ok(())
}
