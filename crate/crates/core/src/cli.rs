//! Batch front end: representation files in, CSV/JSON experiment records out.
//!
//! Every command prints a one-line summary on success. Exit codes: 2 for file
//! errors, 3 for violated preconditions (including bad flags), 4 for
//! numerical failures. Files written by a failing command are removed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::counting::{
    asymptotic_cone, critical_exponent_direct, exponent_from_classes, growth_indicator_from,
    limit_cone_from, orbit_count_ratio_from, HullShape, Mode, PsiMethod,
};
use crate::error::{Error, ErrorClass, Result};
use crate::growth::{boundary_curve_from, boundary_point_from, continuity_scan, psi_from_duality};
use crate::pressure::{
    entropy_of_state_from, extrapolated_gibbs_mean, pressure_root_from, PressureTable,
};
use crate::repgen::{dual_rep, fmt_f64, make_schottky, perturb, sym_power_embed, Representation};
use crate::sample::{word_spectra, ElementData, PeriodData};
use crate::spectra::{plane, CartanVector, Functional};

#[derive(Debug, Parser)]
#[command(name = "conelab", version, about = "Limit cones, growth indicators and pressure of free-group representations")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cartan and Jordan projections of every reduced word.
    Spectra(SpectraArgs),
    /// Limit cone (Jordan) or asymptotic cone (Cartan) hull.
    Cone(ConeArgs),
    /// Critical exponent of a functional by direct counting.
    Exponent(ExponentArgs),
    /// Pressure root of a functional, or the pressure table at fixed t.
    Pressure(PressureArgs),
    /// Boundary points of the dual body.
    Boundary(BoundaryArgs),
    /// Growth indicator at probe directions, by duality and by counting.
    Psi(PsiArgs),
    /// Entropy and Gibbs direction of the equilibrium state of a functional.
    Entropy(EntropyArgs),
    /// Pressure root against direct counting, optionally with the orbit-count ratio.
    CountingCheck(CountingCheckArgs),
    /// Continuity of cone, growth indicator and growth form under perturbation.
    PerturbScan(PerturbScanArgs),
    /// Write a representation file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct RepArg {
    /// Representation file (text or JSON).
    #[arg(long)]
    pub rep: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[arg(long = "max-len", visible_alias = "n-max", default_value_t = 8)]
    pub max_len: usize,
    #[arg(long, default_value = "spectra.csv")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConeKind {
    Limit,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[arg(long = "max-len", visible_alias = "n-max", default_value_t = 12)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = ConeKind::Limit)]
    pub kind: ConeKind,
    /// Cartan vectors shorter than this are skipped (asymptotic cone only).
    #[arg(long, default_value_t = 1.0)]
    pub norm_floor: f64,
    #[arg(long, default_value = "cone.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhiArg {
    /// Functional coefficients, one per diagonal entry.
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    pub phi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CountMode {
    Conjugacy,
    Element,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[command(flatten)]
    pub phi: PhiArg,
    #[arg(long = "max-len", visible_alias = "n-max", default_value_t = 12)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = CountMode::Conjugacy)]
    pub mode: CountMode,
    #[arg(long, default_value = "exponent.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PressureArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[command(flatten)]
    pub phi: PhiArg,
    #[arg(long = "n-max", visible_alias = "max-len", default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Write the table `n,t,P_n` at this t instead of solving for the root.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value = "pressure.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[arg(long = "n-max", visible_alias = "max-len", default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,
    /// Single direction to scale onto the boundary instead of a traced curve.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub direction: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value = "boundary.json")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PsiMethodArg {
    Duality,
    Direct,
    Both,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[arg(long = "n-max", visible_alias = "max-len", default_value_t = 12)]
    pub n_max: usize,
    /// Probe vector as comma-separated coordinates; repeat for several.
    #[arg(long = "v", required = true, allow_hyphen_values = true)]
    pub probes: Vec<String>,
    #[arg(long, value_enum, default_value_t = PsiMethodArg::Both)]
    pub method: PsiMethodArg,
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,
    /// Half-angle of the counting cone.
    #[arg(long, default_value_t = 0.15)]
    pub half_angle: f64,
    #[arg(long, default_value = "psi.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[command(flatten)]
    pub phi: PhiArg,
    #[arg(long = "n-max", visible_alias = "max-len", default_value_t = 12)]
    pub n_max: usize,
    /// Scale phi onto the boundary of the dual body first.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value = "entropy.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CountingCheckArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[command(flatten)]
    pub phi: PhiArg,
    #[arg(long = "max-len", visible_alias = "n-max", default_value_t = 12)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "counting-check.json")]
    pub out: PathBuf,
    /// Simple root index for the orbit-count ratio table.
    #[arg(long, requires = "ratio_out")]
    pub orbit_index: Option<usize>,
    #[arg(long, requires = "orbit_index")]
    pub ratio_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbScanArgs {
    #[command(flatten)]
    pub rep: RepArg,
    #[arg(long, num_args = 1.., default_values_t = [0.0, 1e-4, 1e-3, 1e-2, 5e-2])]
    pub epsilons: Vec<f64>,
    /// Probe vector as comma-separated coordinates; repeat for several.
    /// Defaults to the centre of the limit cone.
    #[arg(long = "probe", allow_hyphen_values = true)]
    pub probes: Vec<String>,
    #[arg(long = "n-max", visible_alias = "max-len", default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,
    #[arg(long, default_value = "perturb-scan.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenerateKind,
    /// Output file; a `.json` extension selects the JSON form.
    #[arg(long, global = true, default_value = "rep.txt")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Hyperbolic generators in SL(2, R) with given translation lengths and axis angles.
    Schottky {
        #[arg(long, num_args = 1.., required = true)]
        lengths: Vec<f64>,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        angles: Vec<f64>,
    },
    /// Irreducible symmetric-power embedding of a 2-dimensional representation.
    SymPower {
        #[command(flatten)]
        rep: RepArg,
        #[arg(long)]
        dim: usize,
    },
    /// Random perturbation of size epsilon (uses --seed).
    Perturb {
        #[command(flatten)]
        rep: RepArg,
        #[arg(long)]
        epsilon: f64,
    },
    /// Inverse-transpose representation.
    Dual {
        #[command(flatten)]
        rep: RepArg,
    },
}

/// Files written by the running command, removed again if it fails.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        self.0.push(path.to_path_buf());
        fs::write(path, contents)?;
        Ok(())
    }

    fn discard(&self) {
        for p in &self.0 {
            let _ = fs::remove_file(p);
        }
    }
}

fn load(path: &Path) -> Result<Representation> {
    Representation::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn functional(rep: &Representation, coeffs: &[f64]) -> Result<Functional> {
    if coeffs.len() != rep.dim() {
        return Err(Error::InvalidParameter(format!(
            "expected {} coefficients, got {}",
            rep.dim(),
            coeffs.len()
        )));
    }
    Ok(Functional::new(coeffs.to_vec()))
}

fn parse_vectors(items: &[String], d: usize) -> Result<Vec<CartanVector>> {
    items
        .iter()
        .map(|s| {
            let coords = s
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad number {x:?} in vector {s:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != d {
                return Err(Error::InvalidParameter(format!("vector {s:?} needs {d} coordinates")));
            }
            // psi is homogeneous, so probes are taken as directions
            CartanVector::projected(coords)
                .normalized()
                .ok_or_else(|| Error::InvalidParameter(format!("vector {s:?} has no sum-zero part")))
        })
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn spectra(a: &SpectraArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let rows = word_spectra(&rep, a.max_len)?;
    let d = rep.dim();
    let mut csv = String::from("word,len");
    for i in 1..=d {
        let _ = write!(csv, ",a{i}");
    }
    for i in 1..=d {
        let _ = write!(csv, ",l{i}");
    }
    csv.push('\n');
    let labels = rep.labels();
    for r in &rows {
        let word = crate::words::Word::from_reduced(r.word.clone());
        let _ = write!(csv, "{},{}", word.display(labels), r.word.len());
        for x in r.cartan.coords().iter().chain(r.jordan.coords()) {
            let _ = write!(csv, ",{}", fmt_f64(*x));
        }
        csv.push('\n');
    }
    out.write(&a.out, &csv)?;
    Ok(format!("{} words up to length {} -> {}", rows.len(), a.max_len, a.out.display()))
}

fn cone(a: &ConeArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let (hull, kind) = match a.kind {
        ConeKind::Limit => (limit_cone_from(&PeriodData::from_rep(&rep, a.max_len)?, a.max_len)?, "limit"),
        ConeKind::Asymptotic => (asymptotic_cone(&rep, a.max_len, a.norm_floor)?, "asymptotic"),
    };
    let extreme: Vec<&[f64]> = hull.extreme_directions().iter().map(|v| v.coords()).collect();
    let record = json!({
        "kind": kind,
        "dim": hull.dim(),
        "max_len": a.max_len,
        "extreme_directions": extreme,
        "shape": hull.shape(),
        "width": hull.width(),
        "area": hull.area(),
        "degenerate": hull.is_degenerate(),
        "wall_margins": hull.wall_margins(),
        "sample_count": hull.sample_count(),
        "max_norm_used": hull.max_norm_used(),
    });
    out.write(&a.out, &json_text(&record))?;
    let shape = match hull.shape() {
        HullShape::Arc { min, max } => format!(", angles [{min:.6}, {max:.6}]"),
        _ => String::new(),
    };
    Ok(format!(
        "{kind} cone: {} extreme direction(s){shape}, first ({})",
        extreme.len(),
        fmt_vec(extreme[0])
    ))
}

fn exponent(a: &ExponentArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let phi = functional(&rep, &a.phi.phi)?;
    let mode = match a.mode {
        CountMode::Conjugacy => Mode::Conjugacy,
        CountMode::Element => Mode::Element,
    };
    let fit = critical_exponent_direct(&rep, &phi, a.max_len, mode)?;
    out.write(&a.out, &fit.to_csv())?;
    Ok(format!("h = {} (se {})", fmt_f64(fit.exponent), fmt_f64(fit.std_error)))
}

fn pressure(a: &PressureArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let phi = functional(&rep, &a.phi.phi)?;
    let data = PeriodData::from_rep(&rep, a.n_max)?;
    match a.t {
        Some(t) => {
            let table = PressureTable::build(&data, &phi, t)?;
            out.write(&a.out, &table.to_csv())?;
            Ok(format!(
                "P({}) = {}{}",
                fmt_f64(t),
                fmt_f64(table.extrapolated),
                if table.extrapolation_flag { " (fallback)" } else { "" }
            ))
        }
        None => {
            let root = pressure_root_from(&data, &phi, a.tol)?;
            out.write(&a.out, &(root.to_json() + "\n"))?;
            Ok(format!(
                "root = {}{}",
                fmt_f64(root.root),
                if root.extrapolation_flag { " (fallback)" } else { "" }
            ))
        }
    }
}

fn boundary(a: &BoundaryArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let data = PeriodData::from_rep(&rep, a.n_max)?;
    let points = match &a.direction {
        Some(u) => vec![boundary_point_from(&data, &functional(&rep, u)?, a.tol)?],
        None => boundary_curve_from(&data, a.resolution)?.boundary().to_vec(),
    };
    let records: Vec<_> = points.iter().map(|p| p.to_json()).collect();
    out.write(&a.out, &json_text(&serde_json::Value::Array(records)))?;
    let s_min = points.iter().map(|p| p.s_star).fold(f64::INFINITY, f64::min);
    Ok(format!("{} boundary point(s), min s* = {}", points.len(), fmt_f64(s_min)))
}

fn psi(a: &PsiArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let probes = parse_vectors(&a.probes, rep.dim())?;
    let d = rep.dim();
    let mut rows: Vec<(CartanVector, String, PsiMethod)> = Vec::new();
    if matches!(a.method, PsiMethodArg::Duality | PsiMethodArg::Both) {
        let body = boundary_curve_from(&PeriodData::from_rep(&rep, a.n_max)?, a.resolution)?;
        for v in &probes {
            rows.push((v.clone(), psi_from_duality(&body, v).to_field(), PsiMethod::Duality));
        }
    }
    if matches!(a.method, PsiMethodArg::Direct | PsiMethodArg::Both) {
        let elements = ElementData::from_rep(&rep, a.n_max)?;
        for v in &probes {
            let s = growth_indicator_from(&elements, v, a.half_angle, a.n_max)?;
            rows.push((v.clone(), s.value.to_field(), PsiMethod::DirectCount));
        }
    }
    let mut csv = String::new();
    for i in 1..=d {
        let _ = write!(csv, "v{i},");
    }
    csv.push_str("psi,method\n");
    for (v, value, method) in &rows {
        for x in v.coords() {
            let _ = write!(csv, "{},", fmt_f64(*x));
        }
        let _ = writeln!(csv, "{value},{}", method.as_str());
    }
    out.write(&a.out, &csv)?;
    Ok(format!("psi at {} probe(s): {}", probes.len(), rows.iter().map(|r| r.1.as_str()).collect::<Vec<_>>().join(" ")))
}

fn entropy(a: &EntropyArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let mut phi = functional(&rep, &a.phi.phi)?;
    let data = PeriodData::from_rep(&rep, a.n_max)?;
    if a.normalize {
        phi = phi.scaled(pressure_root_from(&data, &phi, 1e-9)?.root);
    }
    let h = entropy_of_state_from(&data, &phi)?;
    let mean = extrapolated_gibbs_mean(&data, &phi)?;
    let record = json!({
        "phi": phi.coeffs(),
        "entropy": h,
        "gibbs_mean": mean.coords(),
        "n_max": a.n_max,
    });
    out.write(&a.out, &json_text(&record))?;
    Ok(format!("entropy = {}", fmt_f64(h)))
}

fn counting_check(a: &CountingCheckArgs, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let phi = functional(&rep, &a.phi.phi)?;
    let data = PeriodData::from_rep(&rep, a.max_len)?;
    let root = pressure_root_from(&data, &phi, a.tol)?;
    let fit = exponent_from_classes(&data, &phi, a.max_len)?;
    let difference = (root.root - fit.exponent).abs();
    let tolerance = (0.07 * root.root).max(2.0 * fit.std_error);
    let agree = difference <= tolerance;
    let record = json!({
        "phi": phi.coeffs(),
        "root": root.root,
        "extrapolation_flag": root.extrapolation_flag,
        "exponent": fit.exponent,
        "std_error": fit.std_error,
        "difference": difference,
        "tolerance": tolerance,
        "agree": agree,
        "n_max": a.max_len,
    });
    out.write(&a.out, &json_text(&record))?;
    if let (Some(i), Some(path)) = (a.orbit_index, &a.ratio_out) {
        out.write(path, &orbit_count_ratio_from(&data, i, a.max_len)?.to_csv())?;
    }
    Ok(format!(
        "root {} vs count {} ({})",
        fmt_f64(root.root),
        fmt_f64(fit.exponent),
        if agree { "agree" } else { "disagree" }
    ))
}

fn perturb_scan(a: &PerturbScanArgs, seed: u64, out: &mut Outputs) -> Result<String> {
    let rep = load(&a.rep.rep)?;
    let probes = if a.probes.is_empty() {
        let cone = limit_cone_from(&PeriodData::from_rep(&rep, a.n_max)?, a.n_max)?;
        match cone.shape() {
            HullShape::Arc { min, max } => vec![plane::unit_vector(0.5 * (min + max))],
            _ => vec![cone.extreme_directions()[0].clone()],
        }
    } else {
        parse_vectors(&a.probes, rep.dim())?
    };
    let table = continuity_scan(&rep, &a.epsilons, seed, &probes, a.resolution, a.n_max)?;
    out.write(&a.out, &table.to_csv())?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    let last = table.rows.last().map_or(f64::NAN, |r| r.aggregate());
    Ok(format!(
        "{} epsilon(s), {failed} failed, aggregate delta at largest epsilon {}",
        table.rows.len(),
        fmt_f64(last)
    ))
}

fn generate(a: &GenerateArgs, seed: u64, out: &mut Outputs) -> Result<String> {
    let rep = match &a.kind {
        GenerateKind::Schottky { lengths, angles } => make_schottky(lengths, angles)?,
        GenerateKind::SymPower { rep, dim } => sym_power_embed(&load(&rep.rep)?, *dim)?,
        GenerateKind::Perturb { rep, epsilon } => perturb(&load(&rep.rep)?, *epsilon, seed)?,
        GenerateKind::Dual { rep } => dual_rep(&load(&rep.rep)?)?,
    };
    let json = a.out.extension().is_some_and(|e| e == "json");
    out.write(&a.out, &if json { rep.to_json() } else { rep.to_text() })?;
    Ok(format!("dim {} with {} generators -> {}", rep.dim(), rep.rank(), a.out.display()))
}

fn dispatch(cli: &Cli, out: &mut Outputs) -> Result<String> {
    match &cli.command {
        Command::Spectra(a) => spectra(a, out),
        Command::Cone(a) => cone(a, out),
        Command::Exponent(a) => exponent(a, out),
        Command::Pressure(a) => pressure(a, out),
        Command::Boundary(a) => boundary(a, out),
        Command::Psi(a) => psi(a, out),
        Command::Entropy(a) => entropy(a, out),
        Command::CountingCheck(a) => counting_check(a, out),
        Command::PerturbScan(a) => perturb_scan(a, cli.seed, out),
        Command::Generate(a) => generate(a, cli.seed, out),
    }
}

/// Runs a parsed command and returns its summary line. On error every
/// file the command wrote is removed.
pub fn run(cli: &Cli) -> Result<String> {
    let mut out = Outputs::default();
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(cli, &mut out))),
        None => dispatch(cli, &mut out),
    };
    if result.is_err() {
        out.discard();
    }
    result
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::File => 2,
        ErrorClass::Precondition => 3,
        ErrorClass::Numerical => 4,
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
