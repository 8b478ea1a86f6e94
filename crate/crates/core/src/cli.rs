//! The `quadproj` command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;
use serde_json::json;

use crate::bench::{self, BenchConfig};
use crate::error::Error;
use crate::io::{self as qio, IoError};
use crate::oracle;
use crate::projection::{ProjectionOptions, Projector, DEFAULT_AXIS_TOL};
use crate::quadric::{Quadric, DEFAULT_FEAS_TOL};
use crate::sample::{self, SampleOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Largest dimension accepted by `project --oracle`.
pub const CLI_ORACLE_MAX_DIM: usize = 8;

/// KKT residual bound enforced by `project --check`.
pub const CHECK_KKT_TOL: f64 = 1e-8;

/// Relative distance tolerance enforced by `project --oracle`.
pub const ORACLE_DIST_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "quadproj", version, about = "Exact projection onto central quadrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the type, ranks and eigenvalue signature of a quadric.
    Classify {
        quadric: PathBuf,
        /// Exit with status 3 unless the quadric is central, non-cylindrical and nonempty.
        #[arg(long)]
        require_supported: bool,
    },
    /// Project points onto a quadric.
    Project {
        quadric: PathBuf,
        /// JSON array of points, or CSV rows when the file ends in `.csv`.
        #[arg(long)]
        points: PathBuf,
        /// Verify feasibility and KKT residual of every result (exit 4 on failure).
        #[arg(long)]
        check: bool,
        /// Cross-check distances against the brute-force solver (n <= 8).
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_FEAS_TOL)]
        tol_feas: f64,
        /// Relative threshold under which a standardized coordinate counts as zero.
        #[arg(long, default_value_t = DEFAULT_AXIS_TOL)]
        tol_axis: f64,
    },
    /// Emit boundary points of a 2D or 3D quadric as CSV.
    Sample {
        quadric: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the eigendecomposition against the rest of the projection.
    Bench {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Classify {
            quadric,
            require_supported,
        } => classify(&quadric, require_supported, out),
        Command::Project {
            quadric,
            points,
            check,
            oracle,
            format,
            tol_feas,
            tol_axis,
        } => project(
            &quadric,
            &points,
            &ProjectArgs {
                check,
                oracle,
                format,
                tol_feas,
                tol_axis,
            },
            out,
            err,
        ),
        Command::Sample {
            quadric,
            count,
            out: path,
        } => sample_cmd(&quadric, count, path, out),
        Command::Bench { n, count, seed } => bench_cmd(BenchConfig { n, count, seed }, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Write(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(IoError::Quadric(_)) => EXIT_UNSUPPORTED,
            CliError::Io(_) | CliError::Write(_) | CliError::Usage(_) => EXIT_IO,
            CliError::Solver(e) if e.is_unsupported_quadric() => EXIT_UNSUPPORTED,
            CliError::Solver(Error::DimensionMismatch { .. }) => EXIT_IO,
            CliError::Solver(_) => EXIT_VERIFY,
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn list(v: &DVector<f64>) -> String {
    let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", items.join(", "))
}

fn classify(path: &Path, require_supported: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let q = qio::read_quadric(path)?;
    let class = q.classify();
    writeln!(out, "{class}")?;
    writeln!(out, "kind: {}", class.kind)?;
    writeln!(out, "cylindrical: {}", class.cylindrical)?;
    writeln!(out, "dimension: {}", class.dim)?;
    writeln!(out, "rank_A: {}", class.rank_a)?;
    writeln!(out, "rank_Ab: {}", class.rank_ab)?;
    writeln!(out, "rank_Astar: {}", class.rank_astar)?;
    writeln!(out, "signature: +{} -{}", class.positives, class.negatives)?;
    if let Ok(eig) = crate::spectral::eig_sym(q.a()) {
        writeln!(out, "eigenvalues: {}", list(&eig.values))?;
    }
    let supported = if class.is_supported() {
        match q.standardize() {
            Ok(sf) => {
                let gamma = if sf.flipped { -sf.gamma } else { sf.gamma };
                writeln!(out, "center: {}", list(&sf.center))?;
                writeln!(out, "gamma: {}", num(gamma))?;
                writeln!(out, "supported: true")?;
                true
            }
            Err(e) => {
                writeln!(out, "supported: false ({e})")?;
                false
            }
        }
    } else {
        writeln!(out, "supported: false")?;
        false
    };
    Ok(if require_supported && !supported {
        EXIT_UNSUPPORTED
    } else {
        EXIT_OK
    })
}

struct ProjectArgs {
    check: bool,
    oracle: bool,
    format: Format,
    tol_feas: f64,
    tol_axis: f64,
}

struct Record {
    point: DVector<f64>,
    distance: f64,
    multiplier: f64,
    degenerate: bool,
    iterations: usize,
    root_found: bool,
    candidates: usize,
    check: Option<(bool, f64)>,
    oracle: Option<f64>,
}

impl Record {
    fn passed(&self, tol_kkt: f64) -> bool {
        let check_ok = self.check.is_none_or(|(feas, kkt)| feas && kkt <= tol_kkt);
        let oracle_ok = self
            .oracle
            .is_none_or(|d| (self.distance - d).abs() <= ORACLE_DIST_TOL * (1.0 + d));
        check_ok && oracle_ok
    }
}

fn project(
    quadric: &Path,
    points: &Path,
    args: &ProjectArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let q = qio::read_quadric(quadric)?;
    let pts = qio::read_points(points)?;
    let n = q.dim();
    if let Some((i, p)) = pts.iter().enumerate().find(|(_, p)| p.len() != n) {
        return Err(CliError::Usage(format!(
            "point {i} has dimension {}, quadric has {n}",
            p.len()
        )));
    }
    if args.oracle && n > CLI_ORACLE_MAX_DIM {
        return Err(CliError::Usage(format!(
            "--oracle supports n <= {CLI_ORACLE_MAX_DIM}, got {n}"
        )));
    }
    let options = ProjectionOptions {
        axis_tol: args.tol_axis,
        ..ProjectionOptions::default()
    };
    let projector = Projector::with_options(q, options)?;

    let records: Vec<Result<Record, Error>> = pts
        .par_iter()
        .map(|x0| project_one(&projector, x0, args))
        .collect();

    let mut out = BufWriter::new(out);
    if args.format == Format::Csv {
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.insert(0, "index".into());
        header.extend(
            ["distance", "multiplier", "degenerate", "newton_iterations"]
                .iter()
                .map(|s| s.to_string()),
        );
        if args.check {
            header.extend(["feasible".to_string(), "kkt_residual".to_string()]);
        }
        if args.oracle {
            header.push("oracle_distance".into());
        }
        writeln!(out, "{}", header.join(","))?;
    }

    let mut failures = 0;
    for (index, record) in records.into_iter().enumerate() {
        let r = record?;
        if !r.passed(CHECK_KKT_TOL) {
            failures += 1;
        }
        match args.format {
            Format::Json => {
                let mut obj = json!({
                    "index": index,
                    "point": r.point.as_slice(),
                    "distance": r.distance,
                    "multiplier": r.multiplier,
                    "degenerate": r.degenerate,
                    "newton_iterations": r.iterations,
                    "root_found": r.root_found,
                    "candidates": r.candidates,
                });
                if let Some((feasible, kkt)) = r.check {
                    obj["feasible"] = json!(feasible);
                    obj["kkt_residual"] = json!(kkt);
                }
                if let Some(d) = r.oracle {
                    obj["oracle_distance"] = json!(d);
                }
                writeln!(out, "{obj}")?;
            }
            Format::Csv => {
                let mut row: Vec<String> = vec![index.to_string()];
                row.extend(r.point.iter().map(|&v| num(v)));
                row.push(num(r.distance));
                row.push(num(r.multiplier));
                row.push(r.degenerate.to_string());
                row.push(r.iterations.to_string());
                if let Some((feasible, kkt)) = r.check {
                    row.push(feasible.to_string());
                    row.push(num(kkt));
                }
                if let Some(d) = r.oracle {
                    row.push(num(d));
                }
                writeln!(out, "{}", row.join(","))?;
            }
        }
    }
    out.flush()?;
    if failures > 0 {
        writeln!(err, "verification failed for {failures} point(s)")?;
        return Ok(EXIT_VERIFY);
    }
    Ok(EXIT_OK)
}

fn project_one(projector: &Projector, x0: &DVector<f64>, args: &ProjectArgs) -> Result<Record, Error> {
    let res = projector.project(x0)?;
    let check = if args.check {
        let sp = projector.secular_problem(x0)?;
        let best = res.selected();
        let kkt = sp.kkt_residual(&best.y, best.mu);
        let feasible = projector.quadric().is_feasible(&res.point, args.tol_feas);
        Some((feasible, kkt))
    } else {
        None
    };
    let oracle = if args.oracle {
        let sp = projector.secular_problem(x0)?;
        let sol = oracle::oracle_project_secular(&sp)?;
        Some(sol.dist2.sqrt() * projector.standard_form().scale)
    } else {
        None
    };
    Ok(Record {
        distance: res.distance,
        multiplier: res.multiplier,
        degenerate: res.degenerate,
        iterations: res.newton_iterations,
        root_found: res.root_found,
        candidates: res.candidates.len(),
        point: res.point,
        check,
        oracle,
    })
}

fn sample_cmd(quadric: &Path, count: usize, path: Option<PathBuf>, out: &mut dyn Write) -> Result<i32, CliError> {
    let q: Quadric = qio::read_quadric(quadric)?;
    let samples = sample::sample_boundary(&q, count, &SampleOptions::default())?;
    let mut sink: Box<dyn Write + '_> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).map_err(|source| {
            IoError::Read {
                path: p.display().to_string(),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(out)),
    };
    let mut header: Vec<String> = (1..=q.dim()).map(|i| format!("x{i}")).collect();
    header.push("branch".into());
    writeln!(sink, "{}", header.join(","))?;
    for s in samples {
        let mut row: Vec<String> = s.point.iter().map(|&v| num(v)).collect();
        row.push(s.branch.to_string());
        writeln!(sink, "{}", row.join(","))?;
    }
    sink.flush()?;
    Ok(EXIT_OK)
}

fn bench_cmd(config: BenchConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    if config.n == 0 || config.count == 0 {
        return Err(CliError::Usage("--n and --count must be positive".into()));
    }
    let report = bench::run_bench(config)?;
    writeln!(out, "{report}")?;
    Ok(if report.infeasible > 0 {
        EXIT_VERIFY
    } else {
        EXIT_OK
    })
}
