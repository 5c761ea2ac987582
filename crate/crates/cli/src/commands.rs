use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lpkit::conditions::{
    b_eps, c_u, fourier_decay_check, h_majorant_l1, mar_scan, nondegeneracy, DecayCheck, DegeneracyMode,
    NondegeneracyReport, Quantity, ScanConfig, ScanReport,
};
use lpkit::grid::io;
use lpkit::kernels::{kernel_from_id, profile_from_id, Kernel, Parity};
use lpkit::multiplier::{annulus_min, homogeneity_defect, sphere_min, symbol_continuous, symbol_discrete, write_symbol_csv};
use lpkit::sobolev::{equivalence_experiment, sobolev_chain_spectral_bound, Operator, RatioReport, SpectralBound, TestFamily};
use lpkit::squarefn::{delta_psi, g_psi};
use lpkit::weights::Weight;
use lpkit::{DyadicRange, Geometry, LogTimeGrid, SampledField};
use serde::Serialize;

use crate::config::{ConditionsConfig, Config, OperatorKind, SymbolMode};

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Writes `text` to `out`, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct GridInfo {
    dim: usize,
    n: usize,
    half_length: f64,
}

impl From<&Geometry> for GridInfo {
    fn from(g: &Geometry) -> Self {
        Self { dim: g.dim(), n: g.n(), half_length: g.half_length() }
    }
}

#[derive(Debug, Serialize)]
struct Cancellation {
    integral: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct CuEntry {
    u: f64,
    value: Quantity,
}

#[derive(Debug, Serialize)]
struct Hypotheses {
    eps: f64,
    b_eps: Quantity,
    c_u: Vec<CuEntry>,
    h_majorant_l1: Quantity,
}

#[derive(Debug, Serialize)]
struct Nondegeneracy {
    continuous: NondegeneracyReport,
    dyadic: NondegeneracyReport,
}

#[derive(Debug, Serialize)]
pub struct KernelReport {
    kernel: String,
    dim: usize,
    support_radius: Option<f64>,
    cancellation_order: i32,
    parity: Parity,
    /// `None` when the kernel has no spatial evaluator.
    cancellation: Option<Cancellation>,
    hypotheses: Option<Hypotheses>,
    decay: DecayCheck,
    nondegeneracy: Nondegeneracy,
    pass: bool,
}

fn kernel(id: &str) -> Result<Kernel> {
    kernel_from_id(id).with_context(|| format!("kernel `{id}`"))
}

fn kernel_report(psi: &Kernel, cfg: &ConditionsConfig) -> Result<KernelReport> {
    let cancellation = if psi.has_spatial() && psi.dim() == 1 {
        let integral = psi.integral()?;
        Some(Cancellation { integral, pass: psi.cancellation_order() < 0 || integral.abs() < 1e-10 })
    } else {
        None
    };
    let hypotheses = if psi.has_spatial() {
        let c = cfg.u.iter().map(|&u| Ok(CuEntry { u, value: c_u(psi, u)? })).collect::<lpkit::Result<_>>()?;
        Some(Hypotheses { eps: cfg.eps, b_eps: b_eps(psi, cfg.eps)?, c_u: c, h_majorant_l1: h_majorant_l1(psi)? })
    } else {
        None
    };
    let decay = fourier_decay_check(psi, cfg.delta, cfg.xi_max)?;
    let nondegeneracy = Nondegeneracy {
        continuous: nondegeneracy(psi, DegeneracyMode::Continuous),
        dyadic: nondegeneracy(psi, DegeneracyMode::Dyadic),
    };
    let pass = cancellation.as_ref().is_none_or(|c| c.pass)
        && decay.pass
        && nondegeneracy.continuous.pass
        && nondegeneracy.dyadic.pass;
    Ok(KernelReport {
        kernel: psi.id().to_string(),
        dim: psi.dim(),
        support_radius: psi.support_radius(),
        cancellation_order: psi.cancellation_order(),
        parity: psi.parity(),
        cancellation,
        hypotheses,
        decay,
        nondegeneracy,
        pass,
    })
}

/// Metadata and hypothesis checks at default parameters; informational.
pub fn kernel_info(id: &str, out: Option<&Path>) -> Result<Verdict> {
    let report = kernel_report(&kernel(id)?, &ConditionsConfig::default())?;
    emit(out, &to_json(&report)?)?;
    Ok(Verdict::Pass)
}

/// Hypothesis checks with configured parameters; fails when any check fails.
pub fn conditions(id: &str, cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let report = kernel_report(&kernel(id)?, &cfg.conditions)?;
    emit(out, &to_json(&report)?)?;
    Ok(Verdict::from(report.pass))
}

#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum SymbolRange {
    Continuous { t_min: f64, t_max: f64, per_octave: usize },
    Dyadic { k_min: i32, k_max: i32 },
}

#[derive(Debug, Serialize)]
struct SymbolSidecar {
    kernel: String,
    range: SymbolRange,
    grid: GridInfo,
    csv: String,
    homogeneity_defect: f64,
    /// Minimum of `|m|` on the grid annulus `1 <= |xi| <= 2`.
    annulus_min: Option<f64>,
    /// Minimum of `|m|` on unit-sphere samples.
    sphere_min: f64,
}

pub struct SymbolArgs<'a> {
    pub kernel: &'a str,
    pub mode: Option<SymbolMode>,
    pub k_min: Option<i32>,
    pub k_max: Option<i32>,
}

/// CSV of the symbol on the grid, plus a JSON sidecar next to it.
pub fn symbol(args: &SymbolArgs, cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let Some(out) = out else { bail!("symbol: --out <file.csv> is required") };
    let psi = kernel(args.kernel)?;
    let geom = cfg.grid.geometry()?;
    let (m, range) = match args.mode.unwrap_or(cfg.symbol.mode) {
        SymbolMode::Continuous => {
            let c = &cfg.symbol;
            let tg = LogTimeGrid::new(c.t_min, c.t_max, c.per_octave).context("symbol time range")?;
            let range = SymbolRange::Continuous { t_min: tg.t_min(), t_max: tg.t_upper(), per_octave: tg.per_octave() };
            (symbol_continuous(&psi, &tg), range)
        }
        SymbolMode::Dyadic => {
            let default = cfg.grid.dyadic_range(&geom);
            let k_min = args.k_min.or(cfg.symbol.k_min).unwrap_or(default.k_min());
            let k_max = args.k_max.or(cfg.symbol.k_max).unwrap_or(default.k_max());
            let kr = DyadicRange::new(k_min, k_max).context("symbol range")?;
            (symbol_discrete(&psi, &kr), SymbolRange::Dyadic { k_min, k_max })
        }
    };
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    write_symbol_csv(&m, &geom, &mut w).with_context(|| format!("writing {}", out.display()))?;
    w.flush().with_context(|| format!("writing {}", out.display()))?;
    let sidecar = SymbolSidecar {
        kernel: psi.id().to_string(),
        range,
        grid: GridInfo::from(&geom),
        csv: out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        homogeneity_defect: homogeneity_defect(&m, &geom),
        annulus_min: annulus_min(&m, &geom),
        sphere_min: sphere_min(&m, geom.dim(), 64),
    };
    let side = sidecar_path(out);
    emit(Some(&side), &to_json(&sidecar)?)?;
    Ok(Verdict::Pass)
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Loads a field from `.csv` or the binary format, or builds the default
/// input `x_0 exp(-pi |x|^2)`.
fn input_field(path: Option<&Path>, geom: Geometry) -> Result<SampledField> {
    let Some(path) = path else {
        return Ok(SampledField::from_real_fn(geom, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            x[0] * (-std::f64::consts::PI * r2).exp()
        })?);
    };
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    let field = if path.extension().is_some_and(|e| e == "csv") { io::read_csv(reader) } else { io::read_binary(reader) };
    field.with_context(|| format!("reading {}", path.display()))
}

/// `g_psi(f)` (or `Delta_psi(f)`) as CSV columns `x..., f_re, f_im, g`.
pub fn gfun(id: &str, dyadic: bool, input: Option<&Path>, cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let psi = kernel(id)?;
    let geom = match input {
        Some(_) => None,
        None => Some(cfg.grid.geometry()?),
    };
    let f = input_field(input, geom.unwrap_or_else(Geometry::default_1d))?;
    let geom = *f.geometry();
    if geom.dim() != psi.dim() {
        bail!("kernel `{id}` is {}-dimensional but the field is {}-dimensional", psi.dim(), geom.dim());
    }
    let g = if dyadic {
        delta_psi(&f, &psi, &cfg.grid.dyadic_range(&geom))
    } else {
        g_psi(&f, &psi, &cfg.grid.time_grid(&geom)?)
    };
    let mut text = String::new();
    text.push_str(if geom.dim() == 1 { "x,f_re,f_im,g\n" } else { "x0,x1,f_re,f_im,g\n" });
    for i in 0..geom.len() {
        let p = geom.point(i);
        let (fv, gv) = (f.values()[i], g.values()[i].re);
        if geom.dim() == 1 {
            text.push_str(&format!("{:?},{:?},{:?},{:?}\n", p[0], fv.re, fv.im, gv));
        } else {
            text.push_str(&format!("{:?},{:?},{:?},{:?},{:?}\n", p[0], p[1], fv.re, fv.im, gv));
        }
    }
    emit(out, &text)?;
    Ok(Verdict::Pass)
}

fn family(cfg: &Config, geom: Geometry, members: usize) -> Result<TestFamily> {
    if members == 0 {
        bail!("members: must be at least 1");
    }
    let full = TestFamily::standard(geom, cfg.seed)?;
    let take = members.min(full.len());
    Ok(TestFamily::new(full.members()[..take].to_vec())?)
}

#[derive(Debug, Serialize)]
struct EquivalenceReport {
    seed: u64,
    grid: GridInfo,
    kernel: String,
    /// Non-degeneracy check gating the experiment.
    gate: NondegeneracyReport,
    report: Option<RatioReport>,
    bound: f64,
    pass: bool,
}

/// Ratio spread of `g_psi` or `Delta_psi` over the test family.
pub fn equivalence(cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let c = &cfg.equivalence;
    let psi = kernel(&c.kernel)?;
    let geom = cfg.grid.geometry()?;
    let weight = Weight::from_id(&c.weight)?;
    let (mode, op) = match c.operator {
        OperatorKind::GPsi => {
            (DegeneracyMode::Continuous, Operator::GPsi { kernel: psi.clone(), tg: cfg.grid.time_grid(&geom)? })
        }
        OperatorKind::DeltaPsi => {
            (DegeneracyMode::Dyadic, Operator::DeltaPsi { kernel: psi.clone(), kr: cfg.grid.dyadic_range(&geom) })
        }
    };
    let gate = nondegeneracy(&psi, mode);
    let report = if gate.pass {
        Some(equivalence_experiment(&family(cfg, geom, c.members)?, &op, c.p, &weight)?)
    } else {
        eprintln!(
            "non-degeneracy fails for `{}`: sup of |psi^| over dilates is {:e} at xi = {:?}",
            c.kernel, gate.min_value, gate.argmin
        );
        None
    };
    let pass = report.as_ref().is_some_and(|r| r.spread <= c.bound);
    let doc = EquivalenceReport {
        seed: cfg.seed,
        grid: GridInfo::from(&geom),
        kernel: psi.id().to_string(),
        gate,
        report,
        bound: c.bound,
        pass,
    };
    emit(out, &to_json(&doc)?)?;
    Ok(Verdict::from(pass))
}

#[derive(Debug, Serialize)]
struct SobolevReport {
    seed: u64,
    grid: GridInfo,
    alpha: f64,
    profile: String,
    report: RatioReport,
    /// Spectral bound on the spread, for unweighted `p = 2`.
    spectral_bound: Option<SpectralBound>,
    bound: f64,
    pass: bool,
}

/// `(||E_alpha(J_alpha g)||_{p,w} + ||J_alpha g||_{p,w}) / ||g||_{p,w}` over the family.
pub fn sobolev(cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let c = &cfg.sobolev;
    let geom = cfg.grid.geometry()?;
    let profile = profile_from_id(&c.profile, geom.dim())?;
    let weight = Weight::from_id(&c.weight)?;
    let kr = cfg.grid.dyadic_range(&geom);
    let op = Operator::SobolevChain { alpha: c.alpha, profile: profile.clone(), kr };
    let report = equivalence_experiment(&family(cfg, geom, c.members)?, &op, c.p, &weight)?;
    let unweighted = matches!(weight, Weight::Constant { .. }) && c.p == 2.0;
    let spectral_bound = unweighted.then(|| sobolev_chain_spectral_bound(&geom, c.alpha, &profile, &kr));
    let bound = c.bound.unwrap_or_else(|| spectral_bound.map_or(50.0, |s| s.spread_bound));
    let pass = report.spread.is_finite() && report.spread <= bound;
    let doc = SobolevReport {
        seed: cfg.seed,
        grid: GridInfo::from(&geom),
        alpha: c.alpha,
        profile: profile.id().to_string(),
        report,
        spectral_bound,
        bound,
        pass,
    };
    emit(out, &to_json(&doc)?)?;
    Ok(Verdict::from(pass))
}

/// Scan of the regularity ratio for the generalized Marcinkiewicz kernel.
pub fn mar_scan_cmd(cfg: &Config, out: Option<&Path>) -> Result<Verdict> {
    let c = &cfg.mar_scan;
    if c.density == 0 || c.per_octave == 0 {
        bail!("mar_scan.density and mar_scan.per_octave must be positive");
    }
    let scan = ScanConfig { density: c.density, per_octave: c.per_octave, margin: c.margin };
    let report: ScanReport = mar_scan(c.alpha, &scan)?;
    emit(out, &to_json(&report)?)?;
    Ok(Verdict::from(report.pass))
}
