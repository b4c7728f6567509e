//! Front end for the eigenvalue solver: argument handling, the four
//! workflows and their text output. `main.rs` only maps errors to exit codes.

pub mod config;

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use mps_core::disc_oracle::{self, CheckRow};
use mps_core::scanner::{self, EigCertificate, ModeGrid, Problem, ScanResult, SolveRecord};
use mps_core::Exec;
use serde::Serialize;

pub use config::{BasisKind, BcArg, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "mps",
    version,
    about = "Particular-solution eigenvalue solver for planar Laplace problems"
)]
pub struct Cli {
    /// TOML run configuration; flags below override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub e_lo: Option<f64>,
    #[arg(long, global = true)]
    pub e_hi: Option<f64>,
    #[arg(long, global = true)]
    pub n_grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub bc: Option<BcArg>,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the smallest tensions over an energy grid.
    Scan,
    /// Locate, refine and certify every tension minimum in the window.
    Solve,
    /// Run the unit-disc consistency checks.
    VerifyDisc {
        #[arg(long)]
        freq_max: Option<f64>,
    },
    /// Solve the window and write the density of one located mode.
    Mode {
        /// Pick the located eigenvalue nearest this energy (default: smallest tension).
        #[arg(long)]
        e_star: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Numerical(e) => write!(f, "{e:#}"),
            CliError::Verification(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

fn numerical(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Numerical(e.into())
}

/// Config file merged with flag overrides, then validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.out {
        c.out = Some(v.clone());
    }
    if let Some(v) = cli.format {
        c.format = Some(v);
    }
    if let Some(v) = cli.e_lo {
        c.e_lo = v;
    }
    if let Some(v) = cli.e_hi {
        c.e_hi = v;
    }
    if let Some(v) = cli.n_grid {
        c.n_grid = v;
    }
    if let Some(v) = cli.bc {
        c.bc = v;
    }
    if let Some(v) = cli.threads {
        c.threads = Some(v);
    }
    match cli.command {
        Command::VerifyDisc { freq_max: Some(f) } => c.freq_max = f,
        Command::Mode { e_star, grid_n } => {
            if e_star.is_some() {
                c.e_star = e_star;
            }
            if let Some(g) = grid_n {
                c.grid_n = g;
            }
        }
        _ => {}
    }
    c.validate().map_err(usage)?;
    Ok(c)
}

fn executor(c: &RunConfig) -> Exec {
    match c.threads {
        Some(1) => Exec::Sequential,
        Some(n) => {
            // A second build in the same process fails harmlessly; the
            // existing pool is kept.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
            Exec::Parallel
        }
        None => Exec::Parallel,
    }
}

fn prepare(c: &RunConfig) -> Result<Problem, CliError> {
    c.problem().prepare(executor(c)).map_err(numerical)
}

/// Parses `args`, runs the command and writes its output.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(usage(anyhow!(e.to_string()))),
    };
    let c = resolve_config(&cli)?;
    let (text, outcome) = match cli.command {
        Command::Scan => (cmd_scan(&c)?, Ok(())),
        Command::Solve => (cmd_solve(&c)?, Ok(())),
        Command::VerifyDisc { .. } => cmd_verify_disc(&c)?,
        Command::Mode { .. } => (cmd_mode(&c)?, Ok(())),
    };
    emit(&c, &text)?;
    outcome
}

fn emit(c: &RunConfig, text: &str) -> Result<(), CliError> {
    match &c.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(numerical)?;
    s.push('\n');
    Ok(s)
}

fn warn_failures(s: &ScanResult) {
    for f in &s.failures {
        eprintln!(
            "warning: evaluation failed at E = {}: {}",
            f.energy, f.message
        );
    }
}

pub fn cmd_scan(c: &RunConfig) -> Result<String, CliError> {
    let p = prepare(c)?;
    let s = scanner::scan(&p, c.e_lo, c.e_hi, c.n_grid).map_err(numerical)?;
    warn_failures(&s);
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&s),
        Format::Csv => Ok(scan_csv(&s, c.n_higher)),
    }
}

/// One row per grid energy; missing higher tensions (rank-deficient
/// bases) are written as NaN so every row has the same width.
pub fn scan_csv(s: &ScanResult, n_higher: usize) -> String {
    let mut out = String::from("E,t_min");
    for k in 0..n_higher {
        let _ = write!(out, ",tau{}", k + 2);
    }
    out.push('\n');
    for ((e, t), hi) in s.energies.iter().zip(&s.tensions).zip(&s.higher_tensions) {
        let _ = write!(out, "{e},{t}");
        for k in 0..n_higher {
            let _ = write!(out, ",{}", hi.get(k).copied().unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    window: [f64; 2],
    n_grid: usize,
    problem: &'a mps_core::scanner::ProblemSpec,
    records: &'a [SolveRecord],
}

pub fn cmd_solve(c: &RunConfig) -> Result<String, CliError> {
    let p = prepare(c)?;
    let report = scanner::solve(&p, c.e_lo, c.e_hi, c.n_grid).map_err(numerical)?;
    warn_failures(&report.scan);
    for r in &report.records {
        if let Some(e) = &r.error {
            eprintln!(
                "warning: minimum near E = {} not certified: {e}",
                r.bracket.mid
            );
        }
    }
    match c.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&SolveOutput {
            window: [c.e_lo, c.e_hi],
            n_grid: c.n_grid,
            problem: &p.spec,
            records: &report.records,
        }),
        Format::Csv => Ok(solve_csv(&report.records)),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn solve_csv(records: &[SolveRecord]) -> String {
    let mut out = String::from(
        "e_star,t_star,slope,c_est,lo,hi,mp_lo,mp_hi,angle_bound,multiplicity,evaluations,converged,error\n",
    );
    for r in records {
        match &r.certificate {
            Some(cert) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},",
                    cert.e_star,
                    cert.t_star,
                    cert.slope,
                    cert.c_est,
                    cert.interval[0],
                    cert.interval[1],
                    opt(cert.moler_payne_interval.map(|i| i[0])),
                    opt(cert.moler_payne_interval.map(|i| i[1])),
                    opt(cert.angle_bound),
                    r.multiplicity,
                    r.evaluations,
                    r.converged
                );
            }
            None => {
                let msg = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
                let _ = writeln!(out, ",,,,,,,,,0,{},false,\"{msg}\"", r.evaluations);
            }
        }
    }
    out
}

pub fn cmd_verify_disc(c: &RunConfig) -> Result<(String, Result<(), CliError>), CliError> {
    let rows = disc_oracle::verify_disc(c.freq_max).map_err(numerical)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let text = match c.format {
        Some(Format::Json) => to_json(&rows)?,
        Some(Format::Csv) => {
            let mut s = String::from("check,measured,expected,pass\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "\"{}\",{},\"{}\",{}",
                    r.name, r.measured, r.expected, r.pass
                );
            }
            s
        }
        None => check_table(&rows),
    };
    let outcome = if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{failed} of {} disc checks failed",
            rows.len()
        )))
    };
    Ok((text, outcome))
}

pub fn check_table(rows: &[CheckRow]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut s = format!(
        "{:<w$}  {:>22}  {:<28}  result\n",
        "check", "measured", "expected"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<w$}  {:>22.15e}  {:<28}  {}",
            r.name,
            r.measured,
            r.expected,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

#[derive(Serialize)]
struct ModeOutput<'a> {
    certificate: &'a EigCertificate,
    multiplicity: usize,
    grid: &'a ModeGrid,
}

pub fn cmd_mode(c: &RunConfig) -> Result<String, CliError> {
    let p = prepare(c)?;
    let report = scanner::solve(&p, c.e_lo, c.e_hi, c.n_grid).map_err(numerical)?;
    let located: Vec<(&SolveRecord, &EigCertificate)> = report
        .records
        .iter()
        .filter_map(|r| r.certificate.as_ref().map(|cert| (r, cert)))
        .collect();
    let key = |cert: &EigCertificate| match c.e_star {
        Some(target) => (cert.e_star - target).abs(),
        None => cert.t_star,
    };
    let (record, cert) = located
        .into_iter()
        .min_by(|a, b| key(a.1).total_cmp(&key(b.1)))
        .ok_or_else(|| numerical(anyhow!("no certified minimum in [{}, {}]", c.e_lo, c.e_hi)))?;
    let grid =
        scanner::render_mode(&p, cert.e_star, &record.coeffs, c.grid_n).map_err(numerical)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&ModeOutput {
            certificate: cert,
            multiplicity: record.multiplicity,
            grid: &grid,
        }),
        Format::Csv => Ok(mode_csv(cert, &grid)),
    }
}

/// Metadata as `#` lines, then `grid_n` rows of `grid_n` densities
/// (row `j` at `y_j`), NaN outside the domain.
pub fn mode_csv(cert: &EigCertificate, g: &ModeGrid) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# e_star={}", cert.e_star);
    let _ = writeln!(s, "# t_star={}", cert.t_star);
    let _ = writeln!(s, "# interval={},{}", cert.interval[0], cert.interval[1]);
    let _ = writeln!(s, "# grid_n={}", g.grid_n);
    let _ = writeln!(
        s,
        "# bbox={},{},{},{}",
        g.bbox[0], g.bbox[1], g.bbox[2], g.bbox[3]
    );
    for j in 0..g.grid_n {
        let row: Vec<String> = (0..g.grid_n)
            .map(|i| {
                let k = j * g.grid_n + i;
                if g.inside[k] {
                    g.density[k].to_string()
                } else {
                    "NaN".to_string()
                }
            })
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
