//! The kernel zoo: spatial and Fourier-side evaluators with the metadata the
//! condition checkers and truncation estimates rely on.
//!
//! Fourier transforms follow `psi^(xi) = \int psi(x) exp(-2 pi i <x, xi>) dx`
//! and dilates are `psi_t(x) = t^{-n} psi(x / t)`, so `psi_t^(xi) = psi^(t xi)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::norm_of;
use crate::quad;
use crate::special::{gamma, jinc, jinc_complement, sinc_complement};

pub type SpatialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type FourierFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierKind {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Power-law envelope `|psi^(xi)| <= low_const |xi|^low_exp` and
/// `|psi^(xi)| <= high_const |xi|^{-high_exp}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierEnvelope {
    pub low_const: f64,
    pub low_exp: f64,
    pub high_const: f64,
    pub high_exp: f64,
}

/// Where the spatial evaluator is rough, for quadrature on the spatial side.
///
/// In 1-D `breakpoints` are abscissae; in 2-D they are radii. Near every
/// breakpoint `|psi|` behaves like `|x - b|^singular_exp` (0 for plain jumps).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialShape {
    pub breakpoints: Vec<f64>,
    pub singular_exp: f64,
    /// `|psi(x)| ~ C |x|^{-tail_exp}` at infinity; `None` for compact support.
    pub tail_exp: Option<f64>,
}

#[derive(Clone)]
pub struct Kernel {
    id: String,
    dim: usize,
    spatial: Option<SpatialFn>,
    fourier: FourierFn,
    fourier_kind: FourierKind,
    support_radius: Option<f64>,
    cancellation_order: i32,
    parity: Parity,
    envelope: Option<FourierEnvelope>,
    shape: SpatialShape,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("fourier_kind", &self.fourier_kind)
            .field("support_radius", &self.support_radius)
            .field("cancellation_order", &self.cancellation_order)
            .finish()
    }
}

impl Kernel {
    /// A kernel known only on the Fourier side (test surrogates, diagnostics).
    pub fn from_fourier(
        id: impl Into<String>,
        dim: usize,
        fourier: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            dim,
            spatial: None,
            fourier: Arc::new(fourier),
            fourier_kind: FourierKind::ClosedForm,
            support_radius: None,
            cancellation_order: -1,
            parity: Parity::None,
            envelope: None,
            shape: SpatialShape { breakpoints: vec![], singular_exp: 0.0, tail_exp: None },
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fourier_kind(&self) -> FourierKind {
        self.fourier_kind
    }

    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn cancellation_order(&self) -> i32 {
        self.cancellation_order
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn envelope(&self) -> Option<FourierEnvelope> {
        self.envelope
    }

    pub fn shape(&self) -> &SpatialShape {
        &self.shape
    }

    pub fn has_spatial(&self) -> bool {
        self.spatial.is_some()
    }

    pub fn spatial(&self, x: &[f64]) -> Result<f64> {
        let s = self.spatial.as_ref().ok_or_else(|| Error::MissingEvaluator {
            kernel: self.id.clone(),
            what: "spatial evaluator",
        })?;
        Ok(s(x))
    }

    /// `psi_t(x) = t^{-n} psi(x/t)`.
    pub fn spatial_dilated(&self, t: f64, x: &[f64]) -> Result<f64> {
        let y: Vec<f64> = x.iter().map(|v| v / t).collect();
        Ok(self.spatial(&y)? * t.powi(-(self.dim as i32)))
    }

    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        (self.fourier)(xi)
    }

    /// `psi_t^(xi) = psi^(t xi)`.
    pub fn fourier_dilated(&self, t: f64, xi: &[f64]) -> Complex64 {
        let mut s = [0.0; 2];
        for (o, v) in s.iter_mut().zip(xi) {
            *o = t * v;
        }
        (self.fourier)(&s[..xi.len()])
    }

    pub(crate) fn fourier_fn(&self) -> FourierFn {
        Arc::clone(&self.fourier)
    }

    /// `x -> conj(psi(-x))`, whose transform is `conj(psi^(xi))`.
    pub fn reflected_conjugate(&self) -> Self {
        let fourier = Arc::clone(&self.fourier);
        let spatial = self.spatial.as_ref().map(|s| {
            let s = Arc::clone(s);
            Arc::new(move |x: &[f64]| {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                s(&neg)
            }) as SpatialFn
        });
        let mut shape = self.shape.clone();
        if self.dim == 1 {
            shape.breakpoints = shape.breakpoints.iter().rev().map(|b| -b).collect();
        }
        Self {
            id: format!("{}~", self.id),
            spatial,
            fourier: Arc::new(move |xi: &[f64]| fourier(xi).conj()),
            shape,
            ..self.clone()
        }
    }

    /// Integration pieces of `[lo, hi]` (1-D) split at the breakpoints, with
    /// grading powers for an integrand behaving like `|psi|^power`.
    pub(crate) fn pieces_1d(&self, lo: f64, hi: f64, power: f64) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts: Vec<f64> =
            self.shape.breakpoints.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        cuts.insert(0, lo);
        cuts.push(hi);
        let singular = |p: f64| self.shape.breakpoints.iter().any(|b| (b - p).abs() < 1e-14);
        let q = quad::grading_power(self.shape.singular_exp * power);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let ql = if singular(w[0]) && self.shape.singular_exp != 0.0 { q } else { 1.0 };
                let qr = if singular(w[1]) && self.shape.singular_exp != 0.0 { q } else { 1.0 };
                (w[0], w[1], ql, qr)
            })
            .collect()
    }

    /// `\int psi(x) exp(-2 pi i x xi) dx` by spatial quadrature (1-D only).
    ///
    /// Pieces between breakpoints are integrated with composite Gauss-Legendre,
    /// graded at singular breakpoints. Unbounded kernels are integrated on
    /// `[-X, X]` with the leading integration-by-parts tail correction.
    pub fn fourier_by_quadrature(&self, xi: f64) -> Result<Complex64> {
        if self.dim != 1 {
            return Err(Error::MissingEvaluator { kernel: self.id.clone(), what: "1-D spatial quadrature" });
        }
        let psi = self.spatial.as_ref().ok_or_else(|| Error::MissingEvaluator {
            kernel: self.id.clone(),
            what: "spatial evaluator",
        })?;
        let omega = TAU * xi;
        let integrand = |x: f64| Complex64::from_polar(psi(&[x]), -omega * x);
        let reach = self.support_radius.unwrap_or(2048.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b, ql, qr) in self.pieces_1d(-reach, reach, 1.0) {
            let panels = ((b - a) * (2.0 * xi.abs() + 1.0)).ceil() as usize * 2 + 2;
            acc += quad::graded(integrand, a, b, ql, qr, panels);
        }
        if self.support_radius.is_none() && omega != 0.0 {
            // \int_X^\infty psi e^{-i w x} ~ psi(X) e^{-i w X} / (i w) + psi'(X) e^{-i w X} / (i w)^2
            let x = reach;
            let d = 1e-3;
            for (s, sign) in [(x, 1.0), (-x, -1.0)] {
                let val = psi(&[s]);
                let deriv = (psi(&[s + d]) - psi(&[s - d])) / (2.0 * d);
                let phase = Complex64::from_polar(1.0, -omega * s);
                let io = I * omega;
                acc += phase * (val / io + deriv / (io * io)) * sign;
            }
        }
        Ok(acc)
    }

    /// `\int psi` by spatial quadrature (1-D), or the zero-frequency value.
    pub fn integral(&self) -> Result<f64> {
        if self.dim == 1 && self.has_spatial() {
            let psi = self.spatial.as_ref().unwrap();
            if let Some(r) = self.support_radius {
                let mut acc = 0.0;
                for (a, b, ql, qr) in self.pieces_1d(-r, r, 1.0) {
                    acc += quad::graded(|x| psi(&[x]), a, b, ql, qr, 8);
                }
                return Ok(acc);
            }
            // x = s / (1 - s) maps [0, 1) onto [0, inf); tails like |x|^{-2} stay regular
            let mapped = |s: f64| {
                let x = s / (1.0 - s);
                (psi(&[x]) + psi(&[-x])) / ((1.0 - s) * (1.0 - s))
            };
            let mut cuts: Vec<f64> = self
                .shape
                .breakpoints
                .iter()
                .filter(|b| **b > 0.0)
                .map(|b| b / (1.0 + b))
                .collect();
            cuts.insert(0, 0.0);
            cuts.push(1.0);
            let mut acc = 0.0;
            for w in cuts.windows(2) {
                acc += quad::composite(mapped, w[0], w[1], 64);
            }
            return Ok(acc);
        }
        Ok(self.fourier(&vec![0.0; self.dim]).re)
    }
}

/// Haar function `sgn(x) 1_{[-1,1]}(x)`, with `H^(xi) = -i (1 - cos 2 pi xi) / (pi xi)`.
pub fn make_haar() -> Kernel {
    Kernel {
        id: "haar".into(),
        dim: 1,
        spatial: Some(Arc::new(|x: &[f64]| {
            let v = x[0];
            if v.abs() <= 1.0 {
                sgn(v)
            } else {
                0.0
            }
        })),
        fourier: Arc::new(|xi: &[f64]| haar_fourier(xi[0])),
        fourier_kind: FourierKind::ClosedForm,
        support_radius: Some(1.0),
        cancellation_order: 0,
        parity: Parity::Odd,
        envelope: Some(FourierEnvelope {
            low_const: TAU,
            low_exp: 1.0,
            high_const: 2.0 / PI,
            high_exp: 1.0,
        }),
        shape: SpatialShape { breakpoints: vec![-1.0, 0.0, 1.0], singular_exp: 0.0, tail_exp: None },
    }
}

fn haar_fourier(xi: f64) -> Complex64 {
    if xi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // 1 - cos(2 pi xi) = 2 sin^2(pi xi), which avoids cancellation near 0
    let s = (PI * xi).sin();
    Complex64::new(0.0, -2.0 * s * s / (PI * xi))
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fourier side of `alpha |1-|x||^{alpha-1} sgn(x) 1_{(-1,1)}(x)`.
///
/// With `A(w) = alpha \int_0^1 y^{alpha-1} e^{i w y} dy` and `w = 2 pi xi > 0`,
/// `psi^(xi) = -2i Im(e^{i w} conj(A(w)))`. `A` comes from a 64-point
/// Gauss-Jacobi rule (weight `y^{alpha-1}`) for `w <= 40`, and otherwise from
/// `Gamma(alpha) (-i w)^{-alpha}` minus the asymptotic series of the tail
/// `\int_1^\infty y^{alpha-1} e^{i w y} dy`.
struct GenMarcinkiewiczFourier {
    alpha: f64,
    gamma_alpha: f64,
    rule: Vec<(f64, f64)>,
}

const GM_SERIES_FROM: f64 = 40.0;

impl GenMarcinkiewiczFourier {
    fn new(alpha: f64) -> Self {
        let beta = alpha - 1.0;
        let gj = GaussJacobi::new(
            NonZeroUsize::new(64).unwrap(),
            FiniteAboveNegOneF64::new(0.0).unwrap(),
            FiniteAboveNegOneF64::new(beta).expect("alpha > 0"),
        );
        // \int_0^1 y^beta g(y) dy = 2^{-beta-1} sum w_i g((x_i + 1)/2)
        let scale = alpha * 2f64.powf(-beta - 1.0);
        let rule = gj.iter().map(|(x, w)| (0.5 * (x + 1.0), w * scale)).collect();
        Self { alpha, gamma_alpha: gamma(alpha), rule }
    }

    fn moment(&self, omega: f64) -> Complex64 {
        if omega <= GM_SERIES_FROM {
            return self.rule.iter().map(|&(y, w)| Complex64::from_polar(w, omega * y)).sum();
        }
        let beta = self.alpha - 1.0;
        let io = I * omega;
        // \int_1^\infty y^beta e^{iwy} dy ~ -e^{iw} sum_k (-1)^k beta^(k) / (iw)^{k+1}
        let mut term = 1.0 / io;
        let mut sum = term;
        let mut prev = term.norm();
        for k in 1..200 {
            term = -term * (beta - (k - 1) as f64) / io;
            let size = term.norm();
            if size > prev || size < 1e-18 * sum.norm() {
                if size <= prev {
                    sum += term;
                }
                break;
            }
            sum += term;
            prev = size;
        }
        let tail = -Complex64::from_polar(1.0, omega) * sum;
        let whole = Complex64::from_polar(self.gamma_alpha * omega.powf(-self.alpha), FRAC_PI_2 * self.alpha);
        (whole - tail) * self.alpha
    }

    fn eval(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let omega = TAU * xi.abs();
        let a = self.moment(omega);
        let v = Complex64::new(0.0, -2.0 * (Complex64::from_polar(1.0, omega) * a.conj()).im);
        if xi < 0.0 {
            -v
        } else {
            v
        }
    }
}

/// `phi^(alpha)(x) = alpha |1-|x||^{alpha-1} sgn(x) 1_{(-1,1)}(x)`.
pub fn make_gen_marcinkiewicz(alpha: f64) -> Result<Kernel> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let evaluator = Arc::new(GenMarcinkiewiczFourier::new(alpha));
    let high_exp = alpha.min(1.0);
    let high_const = {
        // sampled envelope constant over |xi| in [1/4, 256], padded by 5%
        let mut c: f64 = 0.0;
        let mut xi = 0.25;
        while xi <= 256.0 {
            c = c.max(evaluator.eval(xi).norm() * xi.powf(high_exp));
            xi *= 1.005;
        }
        1.05 * c
    };
    let ev = Arc::clone(&evaluator);
    Ok(Kernel {
        id: format!("gm:{alpha}"),
        dim: 1,
        spatial: Some(Arc::new(move |x: &[f64]| {
            let v = x[0];
            if v.abs() < 1.0 && v != 0.0 {
                alpha * (1.0 - v.abs()).powf(alpha - 1.0) * sgn(v)
            } else {
                0.0
            }
        })),
        fourier: Arc::new(move |xi: &[f64]| ev.eval(xi[0])),
        fourier_kind: FourierKind::Quadrature,
        support_radius: Some(1.0),
        cancellation_order: 0,
        parity: Parity::Odd,
        envelope: Some(FourierEnvelope {
            low_const: 4.0 * PI / (alpha + 1.0),
            low_exp: 1.0,
            high_const,
            high_exp,
        }),
        shape: SpatialShape {
            breakpoints: vec![-1.0, 0.0, 1.0],
            singular_exp: alpha - 1.0,
            tail_exp: None,
        },
    })
}

/// Normalization of the Poisson kernel, `Gamma((n+1)/2) / pi^{(n+1)/2}`.
pub fn poisson_constant(dim: usize) -> f64 {
    let h = (dim as f64 + 1.0) / 2.0;
    gamma(h) / PI.powf(h)
}

/// `Q = d/dt P_t |_{t=1} = c_n (|x|^2 - n) / (|x|^2 + 1)^{(n+3)/2}`, with
/// `Q^(xi) = -2 pi |xi| e^{-2 pi |xi|}`.
pub fn make_poisson_deriv(dim: usize) -> Result<Kernel> {
    if dim != 1 && dim != 2 {
        return Err(invalid("dim", format!("must be 1 or 2, got {dim}")));
    }
    let c = poisson_constant(dim);
    let n = dim as f64;
    Ok(Kernel {
        id: format!("poisson-q:{dim}"),
        dim,
        spatial: Some(Arc::new(move |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            c * (r2 - n) / (r2 + 1.0).powf((n + 3.0) / 2.0)
        })),
        fourier: Arc::new(|xi: &[f64]| {
            let r = norm_of(xi);
            Complex64::new(-TAU * r * (-TAU * r).exp(), 0.0)
        }),
        fourier_kind: FourierKind::ClosedForm,
        support_radius: None,
        cancellation_order: 0,
        parity: Parity::Even,
        envelope: Some(FourierEnvelope {
            low_const: TAU,
            low_exp: 1.0,
            // max of 2 pi s^3 e^{-2 pi s} is 27 e^{-3} / (4 pi^2)
            high_const: 27.0 * (-3.0f64).exp() / (4.0 * PI * PI) * 1.001,
            high_exp: 2.0,
        }),
        shape: SpatialShape {
            breakpoints: if dim == 1 { vec![-1.0, 1.0] } else { vec![n.sqrt()] },
            singular_exp: 0.0,
            tail_exp: Some(n + 1.0),
        },
    })
}

/// A bounded, compactly supported averaging function with unit mass.
#[derive(Clone)]
pub struct AveragingProfile {
    id: String,
    dim: usize,
    density: SpatialFn,
    fourier: FourierFn,
    complement: FourierFn,
    support_radius: f64,
    /// 1-D: abscissae of discontinuities; 2-D: radii of discontinuities.
    breakpoints: Vec<f64>,
    /// `|1 - Phi^(xi)| <= complement_const |xi|^2` near the origin, when known.
    complement_const: Option<f64>,
}

impl fmt::Debug for AveragingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AveragingProfile")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

impl AveragingProfile {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        (self.density)(x)
    }

    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        (self.fourier)(xi)
    }

    /// `1 - Phi^(xi)`, evaluated without cancellation where possible.
    pub fn complement(&self, xi: &[f64]) -> Complex64 {
        (self.complement)(xi)
    }

    pub(crate) fn complement_fn(&self) -> FourierFn {
        Arc::clone(&self.complement)
    }

    /// `\int Phi(x) g(x) dx` by quadrature aligned with the discontinuities.
    pub fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        let r = self.support_radius;
        if self.dim == 1 {
            let mut cuts: Vec<f64> =
                self.breakpoints.iter().copied().filter(|b| *b > -r && *b < r).collect();
            cuts.insert(0, -r);
            cuts.push(r);
            cuts.windows(2)
                .map(|w| quad::composite(|x| self.density(&[x]) * g(&[x]), w[0], w[1], 8))
                .sum()
        } else {
            let mut radii: Vec<f64> =
                self.breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < r).collect();
            radii.insert(0, 0.0);
            radii.push(r);
            const ANGLES: usize = 64;
            let mut acc = 0.0;
            for k in 0..ANGLES {
                let th = TAU * k as f64 / ANGLES as f64;
                let (s, c) = th.sin_cos();
                for w in radii.windows(2) {
                    acc += quad::composite(
                        |rho| {
                            let x = [rho * c, rho * s];
                            self.density(&x) * g(&x) * rho
                        },
                        w[0],
                        w[1],
                        8,
                    );
                }
            }
            acc * TAU / ANGLES as f64
        }
    }

    /// `\int_{-inf}^x Phi` (1-D).
    fn cumulative(&self, x: f64) -> f64 {
        let r = self.support_radius;
        if x <= -r {
            return 0.0;
        }
        let hi = x.min(r);
        let mut cuts: Vec<f64> =
            self.breakpoints.iter().copied().filter(|b| *b > -r && *b < hi).collect();
        cuts.insert(0, -r);
        cuts.push(hi);
        cuts.windows(2).map(|w| quad::composite(|y| self.density(&[y]), w[0], w[1], 4)).sum()
    }
}

/// `chi_0 = 1_{B(0,1)} / |B(0,1)|` in dimension 1 or 2.
pub fn make_ball_average(dim: usize) -> Result<AveragingProfile> {
    match dim {
        1 => Ok(AveragingProfile {
            id: "ball".into(),
            dim,
            density: Arc::new(|x: &[f64]| if x[0].abs() <= 1.0 { 0.5 } else { 0.0 }),
            fourier: Arc::new(|xi: &[f64]| {
                let z = TAU * xi[0];
                Complex64::new(1.0 - sinc_complement(z), 0.0)
            }),
            complement: Arc::new(|xi: &[f64]| Complex64::new(sinc_complement(TAU * xi[0]), 0.0)),
            support_radius: 1.0,
            breakpoints: vec![-1.0, 1.0],
            complement_const: Some(TAU * TAU / 6.0),
        }),
        2 => Ok(AveragingProfile {
            id: "ball".into(),
            dim,
            density: Arc::new(|x: &[f64]| if x[0] * x[0] + x[1] * x[1] <= 1.0 { 1.0 / PI } else { 0.0 }),
            fourier: Arc::new(|xi: &[f64]| Complex64::new(jinc(TAU * norm_of(xi)), 0.0)),
            complement: Arc::new(|xi: &[f64]| Complex64::new(jinc_complement(TAU * norm_of(xi)), 0.0)),
            support_radius: 1.0,
            breakpoints: vec![1.0],
            complement_const: Some(TAU * TAU / 8.0),
        }),
        _ => Err(invalid("dim", format!("must be 1 or 2, got {dim}"))),
    }
}

/// Normalized indicator of `[a, b]` (1-D).
pub fn make_box_average(a: f64, b: f64) -> Result<AveragingProfile> {
    if !(a < b) {
        return Err(invalid("b", format!("box [{a}, {b}] is empty")));
    }
    let len = b - a;
    let centre = 0.5 * (a + b);
    let fourier = move |xi: &[f64]| {
        let z = PI * len * xi[0];
        let envelope = 1.0 - sinc_complement(z);
        Complex64::from_polar(envelope, -TAU * centre * xi[0])
    };
    Ok(AveragingProfile {
        id: format!("box:{a}:{b}"),
        dim: 1,
        density: Arc::new(move |x: &[f64]| if x[0] >= a && x[0] <= b { 1.0 / len } else { 0.0 }),
        fourier: Arc::new(fourier),
        complement: Arc::new(move |xi: &[f64]| Complex64::new(1.0, 0.0) - fourier(xi)),
        support_radius: a.abs().max(b.abs()),
        breakpoints: vec![a, b],
        complement_const: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub multi_index: Vec<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub profile: String,
    pub alpha: f64,
    pub mass: f64,
    pub moments: Vec<MomentEntry>,
    pub passes: bool,
    pub failure: Option<String>,
}

pub const MOMENT_TOLERANCE: f64 = 1e-9;

/// Membership in the moment class: unit mass and vanishing moments
/// `\int Phi(x) x^gamma dx` for `1 <= |gamma| <= floor(alpha)`.
pub fn moment_class_check(profile: &AveragingProfile, alpha: f64) -> MomentReport {
    let mass = profile.integrate(|_| 1.0);
    let mut failure = None;
    if (mass - 1.0).abs() >= MOMENT_TOLERANCE {
        failure = Some(format!("mass {mass} != 1"));
    }
    let order = if alpha >= 1.0 { alpha.floor() as u32 } else { 0 };
    let mut moments = Vec::new();
    for total in 1..=order {
        let indices: Vec<Vec<u32>> = if profile.dim == 1 {
            vec![vec![total]]
        } else {
            (0..=total).map(|i| vec![total - i, i]).collect()
        };
        for gamma in indices {
            let value = profile.integrate(|x| {
                x.iter().zip(&gamma).map(|(v, &e)| v.powi(e as i32)).product::<f64>()
            });
            if value.abs() >= MOMENT_TOLERANCE && failure.is_none() {
                failure = Some(format!("moment {gamma:?} = {value}"));
            }
            moments.push(MomentEntry { multi_index: gamma, value });
        }
    }
    MomentReport {
        profile: profile.id.clone(),
        alpha,
        mass,
        moments,
        passes: failure.is_none(),
        failure,
    }
}

fn require_moment_class(profile: &AveragingProfile, alpha: f64) -> Result<()> {
    let report = moment_class_check(profile, alpha);
    if report.passes {
        Ok(())
    } else {
        Err(Error::MomentClass {
            profile: profile.id.clone(),
            alpha,
            detail: report.failure.unwrap_or_default(),
        })
    }
}

/// `psi = L_alpha - Phi * L_alpha`, given on the Fourier side by
/// `psi^(xi) = (2 pi |xi|)^{-alpha} (1 - Phi^(xi))`, `psi^(0) = 0`.
pub fn make_riesz_diff(alpha: f64, profile: &AveragingProfile) -> Result<Kernel> {
    let dim = profile.dim;
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(invalid("alpha", format!("must lie in (0, {dim}), got {alpha}")));
    }
    require_moment_class(profile, alpha)?;
    let complement = profile.complement_fn();
    let envelope = profile.complement_const.map(|c| FourierEnvelope {
        low_const: c * TAU.powf(-alpha),
        low_exp: 2.0 - alpha,
        high_const: 2.0 * TAU.powf(-alpha),
        high_exp: alpha,
    });
    Ok(Kernel {
        id: format!("riesz-diff:{alpha}:{}{}", profile.id, if dim == 2 { ":2" } else { "" }),
        dim,
        spatial: None,
        fourier: Arc::new(move |xi: &[f64]| {
            let r = norm_of(xi);
            if r == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            complement(xi) * (TAU * r).powf(-alpha)
        }),
        fourier_kind: FourierKind::ClosedForm,
        support_radius: None,
        cancellation_order: 0,
        parity: Parity::Even,
        envelope,
        shape: SpatialShape { breakpoints: vec![], singular_exp: alpha - dim as f64, tail_exp: None },
    })
}

/// `psi = sgn - sgn * Phi` on the line, with
/// `psi^(xi) = -i (1 - Phi^(xi)) / (pi xi)`.
pub fn make_sgn_diff(profile: &AveragingProfile) -> Result<Kernel> {
    if profile.dim != 1 {
        return Err(invalid("profile", "sgn-diff is one-dimensional"));
    }
    require_moment_class(profile, 1.0)?;
    let complement = profile.complement_fn();
    let p = profile.clone();
    let radius = profile.support_radius;
    let mut breakpoints: Vec<f64> = profile.breakpoints.clone();
    breakpoints.push(0.0);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    Ok(Kernel {
        id: format!("sgn-diff:{}", profile.id),
        dim: 1,
        spatial: Some(Arc::new(move |x: &[f64]| {
            let v = x[0];
            if v.abs() > radius {
                return 0.0;
            }
            // sgn * Phi (x) = 2 \int_{-inf}^x Phi - 1
            sgn(v) - (2.0 * p.cumulative(v) - 1.0)
        })),
        fourier: Arc::new(move |xi: &[f64]| {
            if xi[0] == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            -I * complement(xi) / (PI * xi[0])
        }),
        fourier_kind: FourierKind::ClosedForm,
        support_radius: Some(radius),
        cancellation_order: 0,
        parity: Parity::Odd,
        envelope: profile.complement_const.map(|c| FourierEnvelope {
            low_const: c / PI,
            low_exp: 1.0,
            high_const: 2.0 / PI,
            high_exp: 1.0,
        }),
        shape: SpatialShape { breakpoints, singular_exp: 0.0, tail_exp: None },
    })
}

/// Builds an averaging profile from `ball` or `box:<a>:<b>` (1-D only).
pub fn profile_from_id(id: &str, dim: usize) -> Result<AveragingProfile> {
    let bad = || invalid("profile", format!("unknown averaging profile `{id}` (expected ball or box:<a>:<b>)"));
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["ball"] => make_ball_average(dim),
        ["box", a, b] if dim == 1 => {
            make_box_average(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
        }
        _ => Err(bad()),
    }
}

/// 1-D surrogate with `psi^ = 1` on `a <= |xi| <= b` and 0 elsewhere. When
/// `b < 2a` some frequencies receive no dyadic dilate of the band.
pub fn make_band(a: f64, b: f64) -> Result<Kernel> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(invalid("band", format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    Ok(Kernel::from_fourier(format!("band:{a}:{b}"), 1, move |xi: &[f64]| {
        let r = xi[0].abs();
        Complex64::new(if (a..=b).contains(&r) { 1.0 } else { 0.0 }, 0.0)
    }))
}

/// Builds a kernel from its registry id:
/// `haar`, `gm:<alpha>`, `poisson-q[:<dim>]`, `riesz-diff:<alpha>:ball[:<dim>]`,
/// `sgn-diff:ball`, `band:<a>:<b>`.
pub fn kernel_from_id(id: &str) -> Result<Kernel> {
    let unknown = || Error::UnknownKernel(id.to_string());
    let parts: Vec<&str> = id.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| unknown());
    let dim = |s: &str| s.parse::<usize>().map_err(|_| unknown());
    match parts.as_slice() {
        ["haar"] => Ok(make_haar()),
        ["gm", a] => make_gen_marcinkiewicz(num(a)?),
        ["poisson-q"] => make_poisson_deriv(1),
        ["poisson-q", d] => make_poisson_deriv(dim(d)?),
        ["riesz-diff", a, p] => make_riesz_diff(num(a)?, &profile_from_id(p, 1)?),
        ["riesz-diff", a, p, d] => make_riesz_diff(num(a)?, &profile_from_id(p, dim(d)?)?),
        ["sgn-diff", p] => make_sgn_diff(&profile_from_id(p, 1)?),
        ["band", a, b] => make_band(num(a)?, num(b)?),
        _ => Err(unknown()),
    }
}
