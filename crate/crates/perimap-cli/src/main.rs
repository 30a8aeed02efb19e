//! perimap: census and conformance tooling for the z^(p^l) + c and
//! z^((p-1)^l) + c map families over finite fields.
//!
//! Exit codes: 0 success, 2 invalid input, 3 resource limit exceeded.
//! All output is deterministic; sweeps sort before writing, so any
//! `--threads` setting produces byte-identical files.

use clap::{Args, Parser, Subcommand};
use perimap::dynamics::{self, DynError, Family, Limits, MapSpec};
use perimap::ffield::{self, IntPoly};
use perimap::predictors::CoeffClass;
use perimap::stats::{self, Convention, DensityPredicate, StatsError, SweepSpec};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const LIMIT_ENV: &str = "PERIMAP_LIMIT_Q";

#[derive(Parser)]
#[command(
    name = "perimap",
    version,
    about = "Periodic-point census over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field utilities: modulus construction and inert-prime checks
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Census of one (field, map) cell, printed as a CSV row
    Census(CensusArgs),
    /// Full conformance sweep: claims vs. oracle, CSV + summary + manifest
    Verify(VerifyArgs),
    /// Finite-cutoff average of a census count over (p, c) pairs
    Avg(AvgArgs),
    /// Finite-cutoff density of a coefficient condition over (p, c) pairs
    Density(DensityArgs),
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Print the deterministic modulus of F_{p^n} as a coefficient list
    Make {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
    },
    /// Check whether p is inert in the field defined by a monic polynomial
    Inert {
        /// Comma-separated integer coefficients, constant term first
        #[arg(long)]
        poly: String,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Args)]
struct CensusArgs {
    /// Map family: pl (degree p^l) or pm1l (degree (p-1)^l)
    #[arg(long)]
    family: String,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: i64,
    /// Also emit the full cycle-length histogram as a JSON column
    #[arg(long)]
    orbit: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    pmax: u64,
    #[arg(long)]
    ellmax: u32,
    #[arg(long)]
    nmax: usize,
    /// Worker cap; 1 is the reference behavior
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Directory for conformance.csv, summary.csv, manifest.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AvgArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    ell: u32,
    #[arg(long)]
    n: usize,
    /// Coefficient class filter: zero, plus-one, minus-one, other, all
    #[arg(long)]
    class: String,
    /// Census convention to average: e.g. div2_sub, exact2_full
    #[arg(long)]
    convention: String,
    /// One or more cutoffs bounding both p and c
    #[arg(long, required = true)]
    cutoff: Vec<u64>,
    /// Also compare each cutoff against half the cutoff and flag the average
    /// as diverging when it grew by at least this factor (e.g. 1.5)
    #[arg(long)]
    divergence_factor: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    /// n-equals-p, n-in-interval, m-equals-1, m-equals-2, or count-zero
    #[arg(long)]
    predicate: String,
    #[arg(long, required = true)]
    cutoff: Vec<u64>,
    /// Family the predicate refers to (count-zero differs per family)
    #[arg(long, default_value = "pl")]
    family: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Limit(String),
    Io(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn field_error(flag: &str, e: ffield::FieldError) -> CliError {
    use ffield::FieldError::*;
    match e {
        NonPrime(p) => CliError::usage(format!("{flag}: p must be prime, got {p}")),
        Overflow { p, n } => CliError::usage(format!("{flag}: order {p}^{n} overflows 64 bits")),
        other => CliError::usage(format!("{flag}: {other}")),
    }
}

fn dyn_error(e: DynError) -> CliError {
    match e {
        DynError::EnumerationLimitExceeded { .. } | DynError::DegreeLimitExceeded { .. } => {
            CliError::Limit(e.to_string())
        }
        other => CliError::usage(other.to_string()),
    }
}

fn stats_error(e: StatsError) -> CliError {
    match e {
        StatsError::Dynamics(d) => dyn_error(d),
        StatsError::Field(f) => field_error("--p", f),
        other => CliError::usage(other.to_string()),
    }
}

fn parse_family(s: &str) -> Result<Family, CliError> {
    match s {
        "pl" => Ok(Family::PrimePower),
        "pm1l" => Ok(Family::PMinusOnePower),
        _ => Err(CliError::usage(format!(
            "--family must be pl or pm1l, got {s}"
        ))),
    }
}

fn parse_class(s: &str) -> Result<Option<CoeffClass>, CliError> {
    match s {
        "all" => Ok(None),
        "zero" => Ok(Some(CoeffClass::Zero)),
        "plus-one" => Ok(Some(CoeffClass::PlusOne)),
        "minus-one" => Ok(Some(CoeffClass::MinusOne)),
        "other" => Ok(Some(CoeffClass::Other)),
        _ => Err(CliError::usage(format!(
            "--class must be zero, plus-one, minus-one, other, or all, got {s}"
        ))),
    }
}

fn parse_convention(s: &str) -> Result<Convention, CliError> {
    Convention::parse(s).ok_or_else(|| {
        CliError::usage(format!(
            "--convention must be one of fixed_full, div2_full, exact2_full, fixed_sub, div2_sub, exact2_sub; got {s}"
        ))
    })
}

fn parse_poly(s: &str) -> Result<IntPoly, CliError> {
    let coeffs: Result<Vec<i128>, _> = s.split(',').map(|t| t.trim().parse::<i128>()).collect();
    match coeffs {
        Ok(c) if !c.is_empty() => Ok(IntPoly::new(c)),
        _ => Err(CliError::usage(format!(
            "--poly must be a comma-separated integer list, constant term first; got {s:?}"
        ))),
    }
}

fn limits_from_env() -> Result<Limits, CliError> {
    let mut limits = Limits::default();
    if let Ok(raw) = std::env::var(LIMIT_ENV) {
        let q = raw.parse::<u64>().map_err(|_| {
            CliError::usage(format!(
                "{LIMIT_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
        limits.max_q = q;
    }
    Ok(limits)
}

fn map_spec(family: Family, p: u64, ell: u32, c: i64) -> Result<MapSpec, CliError> {
    match family {
        Family::PrimePower => MapSpec::prime_power(p, ell, c),
        Family::PMinusOnePower => MapSpec::p_minus_one_power(p, ell, c),
        Family::RawExponent => unreachable!(),
    }
    .map_err(|e| CliError::usage(format!("--family/--p: {e}")))
}

/// Exact value rendered as a decimal: integers keep one decimal place, other
/// ratios use the shortest f64 form.
fn render_decimal(num: u64, den: u64) -> String {
    if den != 0 && num.is_multiple_of(den) {
        format!("{}.0", num / den)
    } else {
        format!("{}", num as f64 / den as f64)
    }
}

#[derive(Serialize)]
struct ManifestFile {
    name: String,
    rows: u64,
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    args: Vec<String>,
    deterministic: bool,
    duration_ms: u128,
    files: Vec<ManifestFile>,
}

fn write_manifest(out: &Path, started: Instant, files: Vec<ManifestFile>) -> Result<(), CliError> {
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        args: std::env::args().skip(1).collect(),
        deterministic: true,
        duration_ms: started.elapsed().as_millis(),
        files,
    };
    let path = out.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    body.push('\n');
    std::fs::write(path, body)?;
    Ok(())
}

fn run_field(cmd: FieldCmd) -> Result<(), CliError> {
    match cmd {
        FieldCmd::Make { p, n } => {
            let ctx = ffield::make_field(p, n).map_err(|e| field_error("--p/--n", e))?;
            let rendered: Vec<String> = ctx.modulus().iter().map(|c| c.to_string()).collect();
            println!("{}", rendered.join(","));
        }
        FieldCmd::Inert { poly, p } => {
            let h = parse_poly(&poly)?;
            let report = ffield::inert_check(&h, p).map_err(|e| field_error("--poly/--p", e))?;
            match report.verdict {
                ffield::Inertness::Inert => println!("Inert"),
                ffield::Inertness::NotInert => println!("NotInert"),
            }
            if report.index_warning {
                println!("IndexWarning: reduction has a repeated factor; irreducibility mod p certifies inertness only away from index divisors");
            }
        }
    }
    Ok(())
}

const CENSUS_HEADER: [&str; 12] = [
    "family",
    "p",
    "ell",
    "n",
    "c",
    "q",
    "fixed_full",
    "div2_full",
    "exact2_full",
    "fixed_sub",
    "div2_sub",
    "exact2_sub",
];

fn run_census(args: CensusArgs) -> Result<(), CliError> {
    let limits = limits_from_env()?;
    let family = parse_family(&args.family)?;
    let m = map_spec(family, args.p, args.ell, args.c)?;
    let ctx = ffield::make_field(args.p, args.n).map_err(|e| field_error("--p/--n", e))?;
    let engine = dynamics::CensusEngine::new(&ctx, &limits).map_err(dyn_error)?;
    let r = engine.census(&m).map_err(dyn_error)?;

    let mut w = csv::Writer::from_writer(std::io::stdout());
    let mut header: Vec<String> = CENSUS_HEADER.iter().map(|s| s.to_string()).collect();
    let mut row = vec![
        family.label().to_string(),
        args.p.to_string(),
        args.ell.to_string(),
        args.n.to_string(),
        args.c.to_string(),
        r.q.to_string(),
        r.fixed_full.to_string(),
        r.div2_full.to_string(),
        r.exact2_full.to_string(),
        r.fixed_sub.to_string(),
        r.div2_sub.to_string(),
        r.exact2_sub.to_string(),
    ];
    if args.orbit {
        let o = engine.orbit_census(&m).map_err(dyn_error)?;
        header.push("orbit".to_string());
        row.push(
            serde_json::json!({
                "histogram": o.cycle_length_histogram,
                "tail_points": o.tail_point_count,
            })
            .to_string(),
        );
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let limits = limits_from_env()?;
    if args.pmax < 3 {
        return Err(CliError::usage(format!(
            "--pmax must be at least 3, got {}",
            args.pmax
        )));
    }
    if args.ellmax < 1 || args.nmax < 1 {
        return Err(CliError::usage(
            "--ellmax and --nmax must be at least 1".to_string(),
        ));
    }
    let p_set: Vec<u64> = stats::primes_up_to(args.pmax)
        .into_iter()
        .filter(|&p| p >= 3)
        .collect();
    let ell_set: Vec<u32> = (1..=args.ellmax).collect();
    let n_set: Vec<usize> = (1..=args.nmax).collect();
    let cells = stats::conformance_matrix(&p_set, &ell_set, &n_set, None, &limits, args.threads)
        .map_err(stats_error)?;

    std::fs::create_dir_all(&args.out)?;
    let conf_path = args.out.join("conformance.csv");
    let mut w = csv::Writer::from_path(&conf_path)?;
    w.write_record([
        "family",
        "p",
        "ell",
        "n",
        "c",
        "branch",
        "convention",
        "predicted",
        "observed",
        "verdict",
        "source",
        "note",
    ])?;
    for cell in &cells {
        w.write_record([
            cell.family.label(),
            &cell.p.to_string(),
            &cell.ell.to_string(),
            &cell.n.to_string(),
            &cell.c.to_string(),
            &cell.branch,
            cell.convention.label(),
            &cell.predicted.render(),
            &cell.observed.to_string(),
            cell.verdict.label(),
            cell.predicted.source.label(),
            cell.predicted.convention_note,
        ])?;
    }
    w.flush()?;

    let summary = stats::summarize(&cells);
    let sum_path = args.out.join("summary.csv");
    let mut w = csv::Writer::from_path(&sum_path)?;
    w.write_record(["branch", "convention", "cells", "matches", "rate"])?;
    for row in &summary {
        w.write_record([
            &row.branch,
            row.convention.label(),
            &row.cells.to_string(),
            &row.matches.to_string(),
            &render_decimal(row.matches, row.cells),
        ])?;
    }
    w.flush()?;

    println!("branch,convention,cells,matches,rate");
    for row in &summary {
        println!(
            "{},{},{},{},{}/{} ({})",
            row.branch,
            row.convention.label(),
            row.cells,
            row.matches,
            row.matches,
            row.cells,
            render_decimal(row.matches, row.cells),
        );
    }

    write_manifest(
        &args.out,
        started,
        vec![
            ManifestFile {
                name: "conformance.csv".into(),
                rows: cells.len() as u64,
            },
            ManifestFile {
                name: "summary.csv".into(),
                rows: summary.len() as u64,
            },
        ],
    )
}

/// Parses a decimal like "1.5" into an exact rational (15, 10).
fn parse_factor(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || {
        CliError::usage(format!(
            "--divergence-factor must be a decimal >= 1, got {s:?}"
        ))
    };
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let mut num: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| bad())?
    };
    let mut den = 1u64;
    for ch in frac.chars() {
        let digit = ch.to_digit(10).ok_or_else(bad)?;
        num = num.checked_mul(10).ok_or_else(bad)? + digit as u64;
        den = den.checked_mul(10).ok_or_else(bad)?;
    }
    if num < den {
        return Err(bad());
    }
    Ok((num, den))
}

fn run_avg(args: AvgArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let limits = limits_from_env()?;
    let family = parse_family(&args.family)?;
    let coeff_filter = parse_class(&args.class)?;
    let convention = parse_convention(&args.convention)?;
    let factor = args
        .divergence_factor
        .as_deref()
        .map(parse_factor)
        .transpose()?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for &cutoff in &args.cutoff {
        let spec = SweepSpec {
            family,
            ell: args.ell,
            convention,
            cutoff,
            coeff_filter,
        };
        let est = stats::avg_estimate(&spec, args.n, &limits).map_err(stats_error)?;
        let (num, den) = est.reduced();
        let mut row = vec![
            family.label().to_string(),
            args.ell.to_string(),
            args.n.to_string(),
            args.class.clone(),
            convention.label().to_string(),
            cutoff.to_string(),
            est.denominator.to_string(),
            est.numerator.to_string(),
            format!("{num}/{den}"),
            render_decimal(est.numerator, est.denominator),
        ];
        if let Some((fnum, fden)) = factor {
            let report =
                stats::divergence_check(&spec, args.n, &limits, fnum, fden).map_err(stats_error)?;
            let half = report.at_half_cutoff;
            let (hnum, hden) = half.reduced();
            row.push(half.cutoff.to_string());
            row.push(format!("{hnum}/{hden}"));
            row.push(report.diverging.to_string());
        }
        rows.push(row);
    }

    let mut header = vec![
        "family",
        "ell",
        "n",
        "class",
        "convention",
        "cutoff",
        "pairs",
        "sum",
        "value",
        "value_decimal",
    ];
    if factor.is_some() {
        header.extend(["half_cutoff", "half_value", "diverging"]);
    }
    let header = header;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("avg.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&header)?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(&header)?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;

    write_manifest(
        &args.out,
        started,
        vec![ManifestFile {
            name: "avg.csv".into(),
            rows: rows.len() as u64,
        }],
    )
}

fn run_density(args: DensityArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let family = parse_family(&args.family)?;
    let predicate = DensityPredicate::parse(&args.predicate).ok_or_else(|| {
        CliError::usage(format!(
            "--predicate must be n-equals-p, n-in-interval, m-equals-1, m-equals-2, or count-zero; got {}",
            args.predicate
        ))
    })?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for &cutoff in &args.cutoff {
        let spec = SweepSpec {
            family,
            ell: 1,
            convention: Convention::Div2Sub,
            cutoff,
            coeff_filter: None,
        };
        let est = stats::density_estimate(&spec, predicate).map_err(stats_error)?;
        rows.push(vec![
            args.predicate.clone(),
            family.label().to_string(),
            cutoff.to_string(),
            est.hits.to_string(),
            est.total.to_string(),
            render_decimal(est.hits, est.total),
            est.condition.clone(),
        ]);
    }

    let header = [
        "predicate",
        "family",
        "cutoff",
        "hits",
        "total",
        "value",
        "condition",
    ];
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("density.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(header)?;
    for row in &rows {
        w.write_record(row)?;
    }
    w.flush()?;

    write_manifest(
        &args.out,
        started,
        vec![ManifestFile {
            name: "density.csv".into(),
            rows: rows.len() as u64,
        }],
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Field { cmd } => run_field(cmd),
        Cmd::Census(args) => run_census(args),
        Cmd::Verify(args) => run_verify(args),
        Cmd::Avg(args) => run_avg(args),
        Cmd::Density(args) => run_density(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Limit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
