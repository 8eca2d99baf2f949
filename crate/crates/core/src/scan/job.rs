//! Job orchestration: compute on a worker pool, then emit from one thread.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::correspondence::{counterexample_suite, critical_line};
use crate::error::{Error, Result};
use crate::fidelity::{fidelity_ising_k, fidelity_map, Beta};
use crate::grid::{Grid2D, GridSpec, GAPLESS_SENTINEL};
use crate::model::{ModelSpec, Momentum, GAPLESS_TOLERANCE};
use crate::spectrum::{chern_number, gap_map, gapless_on_segment, z2_strong};

use super::config::{Command, OutputKind, ScanJob};
use super::output::{fmt_sig9, grid_csv, grid_pgm, sha256_hex, write_atomic};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Prefix for relative output paths.
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub kind: OutputKind,
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug)]
pub struct JobResult {
    pub report: String,
    pub artifacts: Vec<Artifact>,
    /// The main grid of grid commands.
    pub grid: Option<Grid2D>,
}

/// Everything a job produces before anything touches the disk.
struct Products {
    report: String,
    csv: Option<String>,
    pgm: Option<String>,
    grid: Option<Grid2D>,
}

/// Runs `job` and writes every requested output.
pub fn run_job(job: &ScanJob, opts: &RunOptions) -> Result<JobResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let products = pool.install(|| compute(job))?;

    let mut artifacts = Vec::new();
    for (kind, rel) in &job.outputs {
        let path = match &opts.out_dir {
            Some(dir) if Path::new(rel).is_relative() => dir.join(rel),
            _ => PathBuf::from(rel),
        };
        let text = match kind {
            OutputKind::Csv => products.csv.as_deref(),
            OutputKind::Pgm => products.pgm.as_deref(),
            OutputKind::Report => Some(products.report.as_str()),
        }
        .ok_or_else(|| {
            Error::InvalidArgument(format!("`{}` cannot emit {}", job.command, kind.name()))
        })?;
        write_atomic(&path, text.as_bytes())?;
        artifacts.push(Artifact {
            kind: *kind,
            path,
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    Ok(JobResult {
        report: products.report,
        artifacts,
        grid: products.grid,
    })
}

fn model(job: &ScanJob) -> Result<ModelSpec> {
    job.model_spec()
        .ok_or_else(|| Error::InvalidArgument(format!("`{}` needs a model", job.command)))
}

fn q2(job: &ScanJob) -> Result<&crate::model::ParamPoint> {
    job.q2
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("`{}` needs q2", job.command)))
}

fn grid_spec(job: &ScanJob, m: &ModelSpec) -> Result<GridSpec> {
    let mut g = GridSpec::for_model(m, job.grid.0, job.grid.1)?;
    if let Some(r) = job.kx_range {
        g.bounds[0] = r;
        g.periodic = false;
    }
    if let Some(r) = job.ky_range {
        if m.dim_k == 1 {
            return Err(Error::InvalidArgument(format!(
                "1D model `{}` has no ky",
                m.name()
            )));
        }
        g.bounds[1] = r;
        g.periodic = false;
    }
    Ok(g.with_kz(job.kz))
}

fn header(job: &ScanJob) -> String {
    let mut out = format!("command = {}\n", job.command);
    if let Some(m) = job.model {
        let _ = writeln!(out, "model = {m}");
    }
    if !job.q1.is_empty() {
        let _ = writeln!(out, "q1 = {}", job.q1);
    }
    if let Some(q2) = &job.q2 {
        let _ = writeln!(out, "q2 = {q2}");
    }
    out
}

fn beta_text(beta: &Beta) -> String {
    match beta {
        Beta::Infinite => "inf".into(),
        Beta::Finite(ctx) => fmt_sig9(ctx.beta()),
    }
}

fn momentum_text(g: &Grid2D, idx: usize, dim_k: usize, kz: f64) -> String {
    let kx = fmt_sig9(g.coord(0, idx % g.nx));
    match dim_k {
        1 => format!("({kx})"),
        2 => format!("({kx}, {})", fmt_sig9(g.coord(1, idx / g.nx))),
        _ => format!(
            "({kx}, {}, {})",
            fmt_sig9(g.coord(1, idx / g.nx)),
            fmt_sig9(kz)
        ),
    }
}

fn flag_gapless(out: &mut String, g: &Grid2D, gapless: &[usize], dim_k: usize, kz: f64) {
    let _ = writeln!(out, "gapless points = {}", gapless.len());
    for &idx in gapless {
        let _ = writeln!(out, "gapless k = {}", momentum_text(g, idx, dim_k, kz));
    }
}

fn compute(job: &ScanJob) -> Result<Products> {
    let mut report = header(job);
    let mut products = Products {
        report: String::new(),
        csv: None,
        pgm: None,
        grid: None,
    };
    match job.command {
        Command::FidelityMap => {
            let m = model(job)?;
            let g = grid_spec(job, &m)?;
            let f = fidelity_map(&m, &job.q1, q2(job)?, &g, &job.beta)?;
            let _ = writeln!(report, "beta = {}", beta_text(&job.beta));
            let _ = writeln!(report, "grid = {}x{}", f.nx, f.ny);
            match f.min_defined() {
                Some((idx, v)) => {
                    let _ = writeln!(
                        report,
                        "min F = {} at k = {}",
                        fmt_sig9(v),
                        momentum_text(&f, idx, m.dim_k, job.kz)
                    );
                }
                None => report.push_str("min F = undefined\n"),
            }
            let gapless: Vec<usize> = (0..f.values.len())
                .filter(|&i| f.values[i] == GAPLESS_SENTINEL)
                .collect();
            flag_gapless(&mut report, &f, &gapless, m.dim_k, job.kz);
            products.csv = Some(grid_csv(&f));
            products.pgm = Some(grid_pgm(&f)?);
            products.grid = Some(f);
        }
        Command::GapMap => {
            let m = model(job)?;
            let g = grid_spec(job, &m)?;
            let gaps = gap_map(&m, &job.q1, &g)?;
            let max = gaps.values.iter().copied().fold(0.0, f64::max);
            let (imin, min) =
                gaps.values
                    .iter()
                    .copied()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                    );
            let _ = writeln!(report, "grid = {}x{}", gaps.nx, gaps.ny);
            let _ = writeln!(
                report,
                "min gap = {} at k = {}",
                fmt_sig9(min),
                momentum_text(&gaps, imin, m.dim_k, job.kz)
            );
            let _ = writeln!(report, "max gap = {}", fmt_sig9(max));
            let gapless: Vec<usize> = (0..gaps.values.len())
                .filter(|&i| gaps.values[i] <= 2.0 * GAPLESS_TOLERANCE)
                .collect();
            flag_gapless(&mut report, &gaps, &gapless, m.dim_k, job.kz);
            products.csv = Some(grid_csv(&gaps));
            // the heatmap is scaled so the largest gap is white
            let scaled = Grid2D {
                values: gaps
                    .values
                    .iter()
                    .map(|v| if max > 0.0 { (v / max).min(1.0) } else { 0.0 })
                    .collect(),
                ..gaps.clone()
            };
            products.pgm = Some(grid_pgm(&scaled)?);
            products.grid = Some(gaps);
        }
        Command::Chern => {
            let m = model(job)?;
            let c = chern_number(&m, &job.q1, job.grid.0)?;
            let _ = writeln!(report, "grid = {}", job.grid.0);
            let _ = writeln!(report, "C = {c}");
        }
        Command::Z2 => {
            let m = model(job)?;
            let nu = z2_strong(&m, &job.q1)?;
            let _ = writeln!(report, "nu = {nu}");
        }
        Command::Segment => {
            let m = model(job)?;
            let g = grid_spec(job, &m)?;
            let seg = gapless_on_segment(&m, &job.q1, q2(job)?, &g, job.n_s, job.tol)?;
            let _ = writeln!(report, "n_s = {}", job.n_s);
            let _ = writeln!(report, "tol = {}", fmt_sig9(job.tol));
            let _ = writeln!(report, "events = {}", seg.events.len());
            let mut csv = String::from("s,k,gap,sector\n");
            for e in &seg.events {
                let k: Vec<String> = e.k.components().iter().map(|v| fmt_sig9(*v)).collect();
                let _ = writeln!(
                    report,
                    "event s = {} k = ({}) gap = {} sector = {}",
                    fmt_sig9(e.s),
                    k.join(", "),
                    fmt_sig9(e.gap),
                    e.sector
                );
                let _ = writeln!(
                    csv,
                    "{},\"{}\",{},{}",
                    fmt_sig9(e.s),
                    k.join(" "),
                    fmt_sig9(e.gap),
                    e.sector
                );
            }
            products.csv = Some(csv);
        }
        Command::CriticalLine => {
            let m = model(job)?;
            let k = job
                .k
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("critical-line needs k".into()))?;
            let k = Momentum::new(k)?;
            let line = critical_line(&m, &job.q1, q2(job)?, &k, job.tol)?;
            let _ = writeln!(report, "k = {}", line.k);
            let _ = writeln!(report, "sector = {}", line.sector);
            let _ = writeln!(report, "lambda = {}", fmt_sig9(line.lambda));
            let _ = writeln!(report, "direction = {}", line.direction);
            let _ = writeln!(report, "verified gap = {}", fmt_sig9(line.verified_gap));
        }
        Command::Counterexamples => {
            let suite = counterexample_suite()?;
            report.push_str(&suite.to_text());
            products.csv = Some(suite.to_csv());
        }
        Command::Ising => {
            let h1 = job
                .q1
                .get("h")
                .ok_or_else(|| Error::InvalidArgument("ising needs q1.h".into()))?;
            let h2 = q2(job)?
                .get("h")
                .ok_or_else(|| Error::InvalidArgument("ising needs q2.h".into()))?;
            let n = job.grid.0;
            let spec = GridSpec::new(n, 1, [[0.0, PI], [0.0, 0.0]])?;
            let values = spec.evaluate(1, |k| match fidelity_ising_k(k.components()[0], h1, h2) {
                Ok(f) => f.value(),
                Err(_) => GAPLESS_SENTINEL,
            });
            let f = Grid2D::new(&spec, values)?;
            let log_total: f64 = f.defined().map(|(_, v)| v.ln()).sum();
            let _ = writeln!(report, "grid = {n} points on [0, pi]");
            let _ = writeln!(report, "ln F = {}", fmt_sig9(log_total));
            let _ = writeln!(report, "F = {}", fmt_sig9(log_total.exp()));
            let gapless: Vec<usize> = (0..f.values.len())
                .filter(|&i| f.values[i] == GAPLESS_SENTINEL)
                .collect();
            flag_gapless(&mut report, &f, &gapless, 1, 0.0);
            products.csv = Some(grid_csv(&f));
            products.grid = Some(f);
        }
    }
    products.report = report;
    Ok(products)
}
