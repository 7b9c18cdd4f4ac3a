use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracpoin::domain::{rasterize, symmetrize_cylindrical, CrossShape};
use fracpoin::eigen::{estimate, EigenEstimate, RefinementStudy, StudyPlan};
use fracpoin::json::to_json;
use fracpoin::seminorm::{assemble_regional, restricted_form, seminorm_loss_sloane};
use fracpoin::specfun::{c_ns, directional_weight, reduction_residual, sphere_measure, strip_normalization, theta_mn};
use fracpoin::witness::{cutoff_rayleigh, tensor_split, window_rayleigh, CutoffFamily, TensorFamily, WindowFamily, WitnessReport};
use fracpoin::{DomainFamily, DomainMask, Error, FormKind, FracParams, ReductionParams, Result, SampledFunction, Window};
use serde::Serialize;

use crate::manifest::ExperimentManifest;
use crate::suites;

#[derive(Debug, Parser)]
#[command(name = "fracpoin", version, about = "Fractional seminorms and Poincare constants")]
pub struct Cli {
    /// Worker thread cap (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random suites, overriding the manifest.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel constants and the residuals of the two built-in identities.
    Constants(ConstantsArgs),
    /// Seminorm of a smooth test function on a domain.
    Seminorm(SeminormArgs),
    /// Eigenvalue study of P1 or P2.
    Poincare(PoincareArgs),
    /// Witness family quotients.
    Witness(WitnessArgs),
    /// Cylindrical symmetrization of a mask.
    Symmetrize(SymmetrizeArgs),
    /// Run a suite manifest and write its reports.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    All,
    C,
    Theta,
    Directional,
    Sphere,
    Normalization,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_enum, default_value = "all")]
    pub which: Which,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Interval,
    Box,
    Strip,
    Ball,
    Annuli,
    Plus,
    LShape,
}

/// Domain selection shared by the one-shot commands.
#[derive(Debug, Args)]
pub struct DomainArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Family as a JSON record, instead of --family.
    #[arg(long)]
    pub family_json: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Half-length of a strip, or arm length of a cross.
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 4)]
    pub k_max: u32,
}

impl DomainArgs {
    pub fn family(&self) -> Result<DomainFamily> {
        if let Some(text) = &self.family_json {
            let f: DomainFamily = serde_json::from_str(text).map_err(|e| Error::Config(format!("family: {e}")))?;
            f.validate()?;
            return Ok(f);
        }
        let l = self.length.unwrap_or(4.0);
        let f = match self.family.ok_or_else(|| Error::Config("need --family or --family-json".into()))? {
            FamilyName::Interval => DomainFamily::interval(self.a, self.b),
            FamilyName::Box => DomainFamily::Box {
                lo: [self.a, self.a],
                hi: [self.b, self.b],
            },
            FamilyName::Strip => DomainFamily::TruncatedStrip {
                half_width: self.half_width,
                half_length: l,
            },
            FamilyName::Ball => DomainFamily::Ball {
                center: [0.0, 0.0],
                radius: self.radius,
            },
            FamilyName::Annuli => DomainFamily::AnnuliUnion { k_max: self.k_max },
            FamilyName::Plus => DomainFamily::StripCross {
                shape: CrossShape::Plus,
                arm: l,
            },
            FamilyName::LShape => DomainFamily::StripCross {
                shape: CrossShape::LShape,
                arm: l,
            },
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Regional,
    Restricted,
}

impl From<KindArg> for FormKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Regional => FormKind::Regional,
            KindArg::Restricted => FormKind::Restricted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TestFunction {
    Bump,
    Tilted,
    Offset,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    pub h: f64,
    #[arg(long, value_enum, default_value = "regional")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "bump")]
    pub function: TestFunction,
    /// Directions for the line-integral evaluator (2D only; 0 skips it).
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoincareKind {
    P1,
    P2,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_enum, default_value = "p1")]
    pub kind: PoincareKind,
    /// Coarsest spacing.
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub h: f64,
    /// Number of halvings of h.
    #[arg(long, default_value_t = 1)]
    pub h_ladder: usize,
    /// Comma-separated truncation lengths (replaces the h ladder).
    #[arg(long = "L-ladder", value_delimiter = ',')]
    pub length_ladder: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Cutoff,
    Tensor,
    Window,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long = "witness", value_enum)]
    pub witness: WitnessKind,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub h: f64,
    /// Cutoff widths (cutoff: decreasing ladder; window: one per scale or a single value).
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Dilation ladder for the tensor witness.
    #[arg(long, value_delimiter = ',')]
    pub ells: Vec<f64>,
    /// Window scales.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value = "ball")]
    pub window: WindowArg,
    /// Also write the CSV mirror here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    Ball,
    Square,
}

#[derive(Debug, Args)]
pub struct SymmetrizeArgs {
    /// Mask JSON file; otherwise the domain flags are rasterized at --h.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub manifest: PathBuf,
    /// Write reports into this directory instead of the manifest paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Outcome of a command: printed text and whether its checks passed.
pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, pass: true }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Constants(a) => constants(a),
        Command::Seminorm(a) => seminorm(a),
        Command::Poincare(a) => poincare(a),
        Command::Witness(a) => witness(a),
        Command::Symmetrize(a) => symmetrize(a),
        Command::Verify(a) => verify(a, cli.seed),
    }
}

#[derive(Serialize, Default)]
struct Constants {
    n: u32,
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_mn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_reduced: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    directional_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere_measure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<f64>,
    reduction_residual: Option<f64>,
    normalization_residual: Option<f64>,
}

fn constants(a: &ConstantsArgs) -> Result<Outcome> {
    let p = FracParams::new(a.n, a.s)?;
    let m = a.m.unwrap_or(1);
    let reduction = if a.n >= 2 { Some(ReductionParams::new(m, a.n, a.s)?) } else { None };
    if a.m.is_some() && reduction.is_none() {
        return Err(Error::Domain("need 1 <= m < n".into()));
    }
    let norm = if a.n >= 2 { Some(strip_normalization(a.n, a.s)?) } else { None };
    let all = matches!(a.which, Which::All);
    let pick = |w: Which| all || std::mem::discriminant(&w) == std::mem::discriminant(&a.which);
    let mut out = Constants {
        n: a.n,
        s: a.s,
        reduction_residual: reduction.map(reduction_residual),
        normalization_residual: norm.map(|v| (v - 1.0).abs()),
        ..Default::default()
    };
    if pick(Which::C) {
        out.c_ns = Some(c_ns(p));
    }
    if pick(Which::Theta) {
        if let Some(r) = reduction {
            out.m = Some(m);
            out.theta_mn = Some(theta_mn(r));
            out.c_reduced = Some(c_ns(FracParams::new(a.n - m, a.s)?));
        }
    }
    if pick(Which::Directional) && a.n >= 2 {
        out.directional_weight = Some(directional_weight(a.n, a.s)?);
    }
    if pick(Which::Sphere) {
        out.sphere_measure = Some(sphere_measure(a.n)?);
    }
    if pick(Which::Normalization) {
        out.normalization = norm;
    }
    let pass = out.reduction_residual.is_none_or(|r| r < 1e-10) && out.normalization_residual.is_none_or(|r| r < 1e-10);
    Ok(Outcome { stdout: to_json(&out), pass })
}

fn test_function(f: TestFunction, mask: &DomainMask) -> impl Fn([f64; 2]) -> f64 {
    let [nx, ny] = mask.grid().extents;
    let g = mask.grid().clone();
    let dim = mask.dim();
    // bounding box of the active cells
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for k in mask.active_indices() {
        let (i, j) = g.coords(k);
        let c = g.cell_center(i, j);
        for d in 0..dim {
            lo[d] = lo[d].min(c[d] - 0.5 * g.h);
            hi[d] = hi[d].max(c[d] + 0.5 * g.h);
        }
    }
    let _ = (nx, ny);
    move |x: [f64; 2]| {
        let mut v = 1.0;
        let mut xi = [0.0; 2];
        for d in 0..dim {
            xi[d] = (2.0 * x[d] - lo[d] - hi[d]) / (hi[d] - lo[d]);
            v *= (1.0 - xi[d] * xi[d]).max(0.0).powi(2);
        }
        match f {
            TestFunction::Bump => v,
            TestFunction::Tilted => v * (1.0 + 0.5 * xi[0]),
            TestFunction::Offset => v * (-2.0 * ((xi[0] - 0.3).powi(2) + (xi[1] + 0.2).powi(2))).exp(),
        }
    }
}

#[derive(Serialize)]
struct SeminormOut {
    family: String,
    s: f64,
    h: f64,
    kind: FormKind,
    energy: f64,
    l2_norm2: f64,
    quotient: f64,
    loss_sloane: Option<f64>,
}

fn seminorm(a: &SeminormArgs) -> Result<Outcome> {
    let family = a.domain.family()?;
    let p = FracParams::new(family.dim() as u32, a.s)?;
    let mask = Arc::new(rasterize(&family, a.h)?);
    let kind: FormKind = a.kind.into();
    let form = match kind {
        FormKind::Regional => assemble_regional(&mask, p)?,
        FormKind::Restricted => restricted_form(&mask, p)?,
    };
    let u = SampledFunction::compactly_supported(mask.clone(), test_function(a.function, &mask))?;
    let x = form.restrict(&u)?;
    let (energy, l2) = (form.energy(&x), form.mass_norm2(&x));
    let ls = if family.dim() == 2 && a.directions > 0 {
        Some(seminorm_loss_sloane(&u, p, a.directions, kind)?)
    } else {
        None
    };
    let out = SeminormOut {
        family: family.name().into(),
        s: a.s,
        h: a.h,
        kind,
        energy,
        l2_norm2: l2,
        quotient: energy / l2,
        loss_sloane: ls,
    };
    Ok(Outcome::ok(to_json(&out)))
}

#[derive(Serialize)]
struct PoincareOut {
    study: RefinementStudy,
    /// Cross-section interval at the finest h, for strips.
    cross_section: Option<EigenEstimate>,
}

fn poincare(a: &PoincareArgs) -> Result<Outcome> {
    let family = a.domain.family()?;
    let p = FracParams::new(family.dim() as u32, a.s)?;
    let kind = match a.kind {
        PoincareKind::P1 => FormKind::Regional,
        PoincareKind::P2 => FormKind::Restricted,
    };
    let strip = matches!(family, DomainFamily::TruncatedStrip { .. });
    let plan = if a.length_ladder.is_empty() {
        StudyPlan::h_ladder(a.h, a.h_ladder, None)
    } else {
        if !strip {
            return Err(Error::Config("--L-ladder needs a strip family".into()));
        }
        StudyPlan::length_ladder(a.h, &a.length_ladder)
    };
    let study = estimate(&family, p, &plan, kind)?;
    let cross_section = match family {
        DomainFamily::TruncatedStrip { half_width, .. } => {
            let h = study.ladder.iter().map(|e| e.h).fold(f64::INFINITY, f64::min);
            let one = estimate(&DomainFamily::interval(-half_width, half_width), p.with_dim(1)?, &StudyPlan::h_ladder(h, 1, None), kind)?;
            one.ladder.into_iter().next()
        }
        _ => None,
    };
    let pass = study.verdicts.iter().all(|v| v.pass);
    Ok(Outcome {
        stdout: to_json(&PoincareOut { study, cross_section }),
        pass,
    })
}

fn witness(a: &WitnessArgs) -> Result<Outcome> {
    let p = |n: u32| FracParams::new(n, a.s);
    let rep: WitnessReport = match a.witness {
        WitnessKind::Cutoff => {
            let family = a.domain.family()?;
            let mask = Arc::new(rasterize(&family, a.h)?);
            let deltas = if a.deltas.is_empty() { (3..=6).map(|k| 2f64.powi(-k)).collect() } else { a.deltas.clone() };
            cutoff_rayleigh(&CutoffFamily::new(mask, deltas)?, p(family.dim() as u32)?)?.witness_rows()
        }
        WitnessKind::Tensor => {
            let strip = match a.domain.family() {
                Ok(f @ DomainFamily::TruncatedStrip { .. }) => f,
                Ok(_) => return Err(Error::Config("tensor witness needs a strip family".into())),
                Err(_) => DomainFamily::strip(a.domain.length.unwrap_or(4.0)),
            };
            let hw = match strip {
                DomainFamily::TruncatedStrip { half_width, .. } => half_width,
                _ => 1.0,
            };
            let cross = Arc::new(rasterize(&DomainFamily::interval(-hw, hw), a.h)?);
            let form = assemble_regional(&cross, p(1)?)?;
            let pair = fracpoin::eigen::smallest_eigenpair(&form, &Default::default())?;
            let w = form.extend(cross, &pair.vector)?;
            let ells = if a.ells.is_empty() { vec![0.125, 0.25, 0.5] } else { a.ells.clone() };
            tensor_split(&TensorFamily::new(w, ells)?, &strip, p(2)?)?.witness_rows()
        }
        WitnessKind::Window => {
            let family = a.domain.family()?;
            let omega = Arc::new(rasterize(&family, a.h)?);
            let lambdas = if a.lambdas.is_empty() { vec![4.0, 8.0] } else { a.lambdas.clone() };
            let deltas = match a.deltas.len() {
                0 => vec![4.0 * a.h; lambdas.len()],
                1 => vec![a.deltas[0]; lambdas.len()],
                _ => a.deltas.clone(),
            };
            let window = match a.window {
                WindowArg::Ball => Window::Ball,
                WindowArg::Square => Window::Square,
            };
            window_rayleigh(&WindowFamily::new(omega, window, lambdas, deltas)?, p(2)?)?.witness_rows()
        }
    };
    if let Some(path) = &a.csv {
        std::fs::write(path, rep.to_csv())?;
    }
    Ok(Outcome {
        pass: rep.pass(),
        stdout: rep.to_json(),
    })
}

fn symmetrize(a: &SymmetrizeArgs) -> Result<Outcome> {
    let mask = match &a.mask {
        Some(path) => DomainMask::from_json(&std::fs::read_to_string(path)?)?,
        None => rasterize(&a.domain.family()?, a.h)?,
    };
    let sym = symmetrize_cylindrical(&mask)?;
    let pass = sym.column_counts() == mask.column_counts();
    let text = sym.to_json();
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            Ok(Outcome {
                stdout: format!("{} columns, {} cells, slice counts preserved: {pass}", mask.grid().extents[0], sym.active_count()),
                pass,
            })
        }
        None => Ok(Outcome { stdout: text, pass }),
    }
}

fn verify(a: &VerifyArgs, seed: Option<u64>) -> Result<Outcome> {
    let mut m = ExperimentManifest::load(&a.manifest)?;
    if seed.is_some() {
        m.seed = seed;
    }
    if let Some(dir) = &a.out_dir {
        let stem = m.suite.clone();
        let place = |p: &Option<PathBuf>, ext: &str| {
            let name = p.as_ref().and_then(|p| p.file_name()).map(PathBuf::from);
            dir.join(name.unwrap_or_else(|| format!("{stem}.{ext}").into()))
        };
        m.outputs.json = Some(place(&m.outputs.json, "json"));
        m.outputs.csv = Some(place(&m.outputs.csv, "csv"));
    }
    let rep = suites::run(&m)?;
    rep.write(m.outputs.json.as_deref(), m.outputs.csv.as_deref())?;
    let mut lines = vec![format!("suite {}: {}", rep.suite, if rep.pass { "PASS" } else { "FAIL" })];
    for c in &rep.checks {
        lines.push(format!("  [{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail));
    }
    if !rep.pass {
        let names: Vec<&str> = rep.failing().iter().map(|c| c.name.as_str()).collect();
        lines.push(format!("failing checks: {}", names.join(", ")));
    }
    Ok(Outcome {
        stdout: lines.join("\n"),
        pass: rep.pass,
    })
}
