//! Composite Gauss-Legendre rules with optional power grading at the
//! interval ends. Used by every spatial-side quadrature in the crate.

use std::num::NonZeroUsize;
use std::ops::{AddAssign, Mul};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    fn legendre(n: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("nonzero degree"));
        let (nodes, weights) = gl.iter().map(|(x, w)| (*x, *w)).unzip();
        Self { nodes, weights }
    }
}

/// 16-point Gauss-Legendre on [-1, 1].
pub(crate) fn gl16() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::legendre(16))
}

pub(crate) trait Integrand: Copy + Default + AddAssign + Mul<f64, Output = Self> {}
impl<T: Copy + Default + AddAssign + Mul<f64, Output = T>> Integrand for T {}

/// Composite 16-point Gauss-Legendre over `panels` equal panels of `[a, b]`.
pub(crate) fn composite<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T {
    let rule = gl16();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut acc = T::default();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += f(mid + half * x) * (w * half);
        }
    }
    acc
}

/// Composite rule on `[a, b]` after the substitution `u = a + (b-a) s^q`,
/// which clusters nodes at `a` and flattens `(u-a)^beta` endpoint behaviour.
pub(crate) fn graded_left<T: Integrand>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    q: f64,
    panels: usize,
) -> T {
    if q == 1.0 {
        return composite(f, a, b, panels);
    }
    let len = b - a;
    composite(|s| f(a + len * s.powf(q)) * (len * q * s.powf(q - 1.0)), 0.0, 1.0, panels)
}

/// Mirror of [`graded_left`], clustering at `b`.
pub(crate) fn graded_right<T: Integrand>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    q: f64,
    panels: usize,
) -> T {
    if q == 1.0 {
        return composite(f, a, b, panels);
    }
    let len = b - a;
    composite(|s| f(b - len * s.powf(q)) * (len * q * s.powf(q - 1.0)), 0.0, 1.0, panels)
}

/// Integrates over `[a, b]`, grading towards whichever ends have a nonunit `q`.
pub(crate) fn graded<T: Integrand>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    q_left: f64,
    q_right: f64,
    panels: usize,
) -> T {
    if b <= a {
        return T::default();
    }
    if q_left == 1.0 && q_right == 1.0 {
        return composite(f, a, b, panels);
    }
    let mid = 0.5 * (a + b);
    let mut acc = graded_left(&f, a, mid, q_left, panels);
    acc += graded_right(&f, mid, b, q_right, panels);
    acc
}

/// Grading power that turns an endpoint factor `(u - e)^beta`, `beta > -1`,
/// into one with at least `s^1` behaviour in the new variable.
pub(crate) fn grading_power(beta: f64) -> f64 {
    if beta >= 0.0 && beta.fract() == 0.0 {
        return 1.0;
    }
    (2.0 / (beta + 1.0) - 1e-9).ceil().max(2.0)
}
