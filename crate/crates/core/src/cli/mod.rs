//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument error,
//! 3 model precondition (equivariance, domain or target) error.

mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{bounds_report, constant_c, constant_d, prop5_ratio, thm1_ratio, HomotopyClassData};
use crate::deformations::{deformed_energy, equator_restriction, retraction_limit_energy};
use crate::estimators::{croke_energy, direct_energy, slice_energy, Domain, EnergyEstimate};
use crate::geometry::sigma;
use crate::maps::{catalog, MapId};
use crate::{Error, Result};

pub use verify::{run_suite, CheckResult, Suite, VerifyReport, DEFAULT_SAMPLES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

const SAMPLES_PER_PLANE: u64 = 100;

#[derive(Parser, Debug)]
#[command(name = "rpn-energy", version, about = "Energies of maps of spheres and real projective spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volumes and bound constants for one dimension.
    Constants(ConstantsArgs),
    /// Estimate the energy of a catalog map on RP^n.
    Energy(EnergyArgs),
    /// Energy of F∘Θ_t along a grid of t, with the t → ∞ limit.
    Deform(DeformArgs),
    /// Energy bounds from homotopy invariants.
    Bounds(BoundsArgs),
    /// Run an invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Write to PATH instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Croke,
    Slice,
}

fn dimension(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a dimension"))?;
    if !(2..=12).contains(&n) {
        return Err(format!("n must lie in 2..=12, got {n}"));
    }
    Ok(n)
}

fn map_id(s: &str) -> std::result::Result<MapId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn positive_samples(s: &str) -> std::result::Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("samples must be >= 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a sample count")),
    }
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long, value_parser = dimension)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct EnergyArgs {
    #[arg(long, value_parser = dimension)]
    n: usize,
    #[arg(long, value_parser = map_id, default_value = "identity")]
    map: MapId,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    /// Slice dimension (default: domain dimension minus one).
    #[arg(long)]
    k: Option<usize>,
    /// Default: 100000 for n <= 3, 400000 otherwise.
    #[arg(long, value_parser = positive_samples)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DeformArgs {
    #[arg(long, value_parser = dimension)]
    n: usize,
    #[arg(long, value_parser = map_id, default_value = "identity")]
    map: MapId,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,50")]
    t_grid: Vec<f64>,
    #[arg(long, value_parser = positive_samples)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_parser = dimension)]
    n: usize,
    #[arg(long)]
    area_star: Option<f64>,
    #[arg(long)]
    length_star: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Base sample count of the statistical checks.
    #[arg(long, value_parser = positive_samples, default_value_t = verify::DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGUMENT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (text, path, code) = match execute(cli.command) {
        Ok(done) => done,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    match path {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_ARGUMENT;
            }
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    code
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) => EXIT_ARGUMENT,
        _ => EXIT_PRECONDITION,
    }
}

fn execute(command: Command) -> Result<(String, Option<PathBuf>, i32)> {
    match command {
        Command::Constants(a) => Ok((constants(a.n, a.output.output)?, a.output.out, EXIT_OK)),
        Command::Energy(a) => {
            let path = a.output.out.clone();
            Ok((energy(&a)?, path, EXIT_OK))
        }
        Command::Deform(a) => {
            let path = a.output.out.clone();
            Ok((deform(&a)?, path, EXIT_OK))
        }
        Command::Bounds(a) => {
            let data = HomotopyClassData { n: a.n, area_star: a.area_star, length_star: a.length_star, beta: a.beta };
            let report = bounds_report(&data)?;
            let text = match a.output.output {
                Output::Json => to_json(&report),
                Output::Csv => csv_pairs(&report)?,
            };
            Ok((text, a.output.out, EXIT_OK))
        }
        Command::Verify(a) => {
            let report = run_suite(a.suite, a.samples, a.seed);
            let code = if report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED };
            Ok((report.render(), a.out, code))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_table<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::arg(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::arg(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Flat `field,value` listing of a JSON object.
fn csv_pairs<T: Serialize>(value: &T) -> Result<String> {
    fn flatten(prefix: &str, v: &serde_json::Value, rows: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    flatten(&key, v, rows);
                }
            }
            serde_json::Value::String(s) => rows.push((prefix.to_string(), s.clone())),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let json = serde_json::to_value(value).expect("report types serialize");
    let mut rows = Vec::new();
    flatten("", &json, &mut rows);
    #[derive(Serialize)]
    struct Pair {
        field: String,
        value: String,
    }
    csv_table(&rows.into_iter().map(|(field, value)| Pair { field, value }).collect::<Vec<_>>())
}

#[derive(Serialize)]
struct ConstantsRow {
    n: usize,
    sigma_n: f64,
    #[serde(rename = "C_n")]
    c_n: f64,
    #[serde(rename = "D_n")]
    d_n: Option<f64>,
    thm1_ratio: f64,
    prop5_ratio: Option<f64>,
}

fn constants(n: usize, output: Output) -> Result<String> {
    let row = ConstantsRow {
        n,
        sigma_n: sigma(n),
        c_n: constant_c(n)?,
        d_n: constant_d(n).ok(),
        thm1_ratio: thm1_ratio(n),
        prop5_ratio: prop5_ratio(n).ok(),
    };
    match output {
        Output::Json => Ok(to_json(&row)),
        Output::Csv => csv_table(&[row]),
    }
}

fn default_samples(n: usize) -> u64 {
    if n <= 3 {
        100_000
    } else {
        400_000
    }
}

#[derive(Serialize)]
struct EnergyRow {
    value: f64,
    std_error: f64,
    samples: u64,
    method: String,
    map: String,
    n: usize,
    k: Option<usize>,
    seed: u64,
}

fn energy(a: &EnergyArgs) -> Result<String> {
    let f = catalog(&a.map, a.n)?;
    let samples = a.samples.unwrap_or_else(|| default_samples(a.n));
    let (est, k): (EnergyEstimate, Option<usize>) = match a.method {
        MethodArg::Direct => (direct_energy(&f, Domain::Projective, samples, a.seed)?, None),
        MethodArg::Croke => (croke_energy(&f, Domain::Projective, samples, a.seed)?, None),
        MethodArg::Slice => {
            let k = a.k.unwrap_or(f.domain_dim().saturating_sub(1));
            let per_plane = SAMPLES_PER_PLANE.min(samples);
            let planes = (samples / per_plane).max(1);
            (slice_energy(&f, k, planes, per_plane, a.seed)?, Some(k))
        }
    };
    let row = EnergyRow {
        value: est.value,
        std_error: est.std_error,
        samples: est.samples,
        method: est.method.to_string(),
        map: a.map.to_string(),
        n: a.n,
        k,
        seed: a.seed,
    };
    match a.output.output {
        Output::Json => Ok(to_json(&row)),
        Output::Csv => csv_table(&[row]),
    }
}

#[derive(Serialize)]
struct DeformRow {
    t: String,
    #[serde(rename = "E_total")]
    e_total: f64,
    #[serde(rename = "E_cap")]
    e_cap: Option<f64>,
    #[serde(rename = "E_retract")]
    e_retract: Option<f64>,
    se_total: f64,
}

fn deform(a: &DeformArgs) -> Result<String> {
    if a.n < 3 {
        return Err(Error::arg("the retraction limit needs n >= 3"));
    }
    let f = catalog(&a.map, a.n)?;
    if f.domain_dim() != a.n {
        return Err(Error::arg(format!("map {} is not defined on RP^{}", a.map, a.n)));
    }
    let samples = a.samples.unwrap_or_else(|| default_samples(a.n));
    let mut rows = Vec::with_capacity(a.t_grid.len() + 1);
    for (i, &t) in a.t_grid.iter().enumerate() {
        let d = deformed_energy(&f, t, samples, crate::geometry::rng::derive_seed(a.seed, i as u64))?;
        rows.push(DeformRow {
            t: t.to_string(),
            e_total: d.total.value,
            e_cap: Some(d.cap.value),
            e_retract: Some(d.retract.value),
            se_total: d.total.std_error,
        });
    }
    let limit = retraction_limit_energy(&equator_restriction(&f)?, a.n, samples, a.seed)?;
    rows.push(DeformRow {
        t: "limit".into(),
        e_total: limit.closed_form.value,
        e_cap: None,
        e_retract: None,
        se_total: limit.closed_form.std_error,
    });
    match a.output.output {
        Output::Json => Ok(to_json(&rows)),
        Output::Csv => csv_table(&rows),
    }
}
