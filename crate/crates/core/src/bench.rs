//! Benchmark suite runner and reports: run records in CSV, cactus series,
//! speedup tables, scatter data and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generate::{self, GenerateError};
use crate::graph::{parse_metis, validate_path, GraphError, Instance, Weight};
use crate::oracle::{exhaustive_dfs, Status};
use crate::solver::{self, LpdpConfig};

/// Fraction of the time limit a run may overshoot before it counts as timed out.
pub const GRACE: f64 = 0.05;

pub const CSV_HEADER: &str = "instance,solver,status,seconds,weight,partition_seconds,seed,config_hash";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no instance was solved by both {baseline} and {subject}")]
    NoCommonInstances { baseline: String, subject: String },
    #[error("nothing to plot")]
    EmptySeries,
    #[error("bad instance spec '{spec}': {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("unknown solver '{0}'")]
    UnknownSolver(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RunStatus {
    Solved,
    Timeout,
    NoPath,
    Error,
}

impl From<Status> for RunStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Solved => RunStatus::Solved,
            Status::NoPath => RunStatus::NoPath,
            Status::Timeout => RunStatus::Timeout,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub solver: String,
    pub status: RunStatus,
    pub seconds: f64,
    pub weight: Option<Weight>,
    pub partition_seconds: Option<f64>,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverSpec {
    Lpdp(LpdpConfig),
    ExhDfs,
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::Lpdp(_) => "lpdp",
            SolverSpec::ExhDfs => "exhdfs",
        }
    }

    /// `lpdp` (with `base` as its configuration) or `exhdfs`.
    pub fn parse(name: &str, base: &LpdpConfig) -> Result<SolverSpec, BenchError> {
        match name {
            "lpdp" => Ok(SolverSpec::Lpdp(base.clone())),
            "exhdfs" => Ok(SolverSpec::ExhDfs),
            other => Err(BenchError::UnknownSolver(other.to_string())),
        }
    }

    fn seed(&self) -> u64 {
        match self {
            SolverSpec::Lpdp(c) => c.seed,
            SolverSpec::ExhDfs => 0,
        }
    }

    /// First 16 hex digits of the SHA-256 of the configuration's debug form.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Where an instance comes from:
/// `maze:N:FILL:SEED`, `random:N:P:SEED`, `subgraph:PATH:SIZE:SEED` or
/// `metis:PATH:S:T` (1-based endpoints).
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Maze { side: usize, fill: f64, seed: u64 },
    Random { n: usize, p: f64, seed: u64 },
    Subgraph { path: PathBuf, size: usize, seed: u64 },
    Metis { path: PathBuf, source: usize, target: usize },
}

impl InstanceSpec {
    pub fn parse(spec: &str) -> Result<InstanceSpec, BenchError> {
        let bad = |reason: &str| BenchError::BadSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |i: usize| -> Result<u64, BenchError> {
            parts
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(&format!("field {} is not a nonnegative integer", i + 1)))
        };
        let frac = |i: usize| -> Result<f64, BenchError> {
            parts
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(&format!("field {} is not a number", i + 1)))
        };
        if parts.len() != 4 {
            return Err(bad("expected four ':'-separated fields"));
        }
        match parts[0] {
            "maze" => Ok(InstanceSpec::Maze {
                side: num(1)? as usize,
                fill: frac(2)?,
                seed: num(3)?,
            }),
            "random" => Ok(InstanceSpec::Random {
                n: num(1)? as usize,
                p: frac(2)?,
                seed: num(3)?,
            }),
            "subgraph" => Ok(InstanceSpec::Subgraph {
                path: PathBuf::from(parts[1]),
                size: num(2)? as usize,
                seed: num(3)?,
            }),
            "metis" => {
                let (s, t) = (num(2)? as usize, num(3)? as usize);
                if s == 0 || t == 0 {
                    return Err(bad("endpoints are 1-based"));
                }
                Ok(InstanceSpec::Metis {
                    path: PathBuf::from(parts[1]),
                    source: s - 1,
                    target: t - 1,
                })
            }
            _ => Err(bad("unknown kind")),
        }
    }

    pub fn load(&self) -> Result<Instance, BenchError> {
        match self {
            InstanceSpec::Maze { side, fill, seed } => Ok(generate::maze_to_instance(
                &generate::generate_maze(*side, *fill, *seed)?,
            )),
            InstanceSpec::Random { n, p, seed } => {
                if *n < 2 {
                    return Err(BenchError::BadSpec {
                        spec: format!("{self:?}"),
                        reason: "need at least 2 vertices".into(),
                    });
                }
                Ok(generate::random_instance(*n, *p, 10, *seed))
            }
            InstanceSpec::Subgraph { path, size, seed } => {
                let g = parse_metis(&read(path)?)?;
                Ok(generate::extract_bfs_subgraph(&g, *size, *seed)?)
            }
            InstanceSpec::Metis {
                path,
                source,
                target,
            } => {
                let g = parse_metis(&read(path)?)?;
                Instance::new(g, *source, *target).map_err(|e| BenchError::BadSpec {
                    spec: path.display().to_string(),
                    reason: e.to_string(),
                })
            }
        }
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>, BenchError> {
    std::fs::read(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub instances: Vec<(String, Instance)>,
    pub solvers: Vec<SolverSpec>,
    pub time_limit: Duration,
    pub repetitions: usize,
    /// Instances run concurrently; 1 keeps timings clean.
    pub jobs: usize,
}

/// Runs one solver on one instance and classifies the outcome.
pub fn run_one(id: &str, inst: &Instance, solver: &SolverSpec, limit: Duration) -> RunRecord {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| match solver {
        SolverSpec::Lpdp(cfg) => solver::solve(inst, cfg, None, Some(limit))
            .map(|s| {
                let part = s.stats.partition_time.as_secs_f64();
                (s, Some(part))
            })
            .map_err(|e| e.to_string()),
        SolverSpec::ExhDfs => Ok((exhaustive_dfs(inst, Some(limit)), None)),
    }));
    let seconds = start.elapsed().as_secs_f64();
    let mut record = RunRecord {
        instance: id.to_string(),
        solver: solver.name().to_string(),
        status: RunStatus::Error,
        seconds,
        weight: None,
        partition_seconds: None,
        seed: solver.seed(),
        config_hash: solver.config_hash(),
    };
    let Ok(Ok((sol, part))) = outcome else {
        return record;
    };
    record.partition_seconds = part;
    record.status = sol.status.into();
    if sol.status == Status::Solved {
        let v = validate_path(&inst.graph, &sol.path, inst.source, inst.target);
        if !v.valid || v.weight != sol.weight {
            record.status = RunStatus::Error;
            return record;
        }
        record.weight = Some(sol.weight);
    }
    if seconds > limit.as_secs_f64() * (1.0 + GRACE) {
        record.status = RunStatus::Timeout;
        record.weight = None;
    }
    record
}

/// One record per (instance, solver, repetition), ordered by instance, then
/// solver, then repetition, whatever the number of jobs.
pub fn run_suite(spec: &SuiteSpec) -> Vec<RunRecord> {
    let per_instance = |(id, inst): &(String, Instance)| -> Vec<RunRecord> {
        let mut out = Vec::new();
        for solver in &spec.solvers {
            for _ in 0..spec.repetitions.max(1) {
                out.push(run_one(id, inst, solver, spec.time_limit));
            }
        }
        out
    };
    if spec.jobs <= 1 {
        return spec.instances.iter().flat_map(per_instance).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .expect("thread pool");
    pool.install(|| {
        spec.instances
            .par_iter()
            .map(per_instance)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })
}

/// Collapses repetitions to the median-time run of each (instance, solver).
pub fn median_records(records: &[RunRecord]) -> Vec<RunRecord> {
    let mut groups: Vec<((String, String), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (r.instance.clone(), r.solver.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, list)) => list.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(_, mut list)| {
            list.sort_by(|a, b| a.seconds.total_cmp(&b.seconds));
            list[(list.len() - 1) / 2].clone()
        })
        .collect()
}

pub fn write_csv(records: &[RunRecord]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.into_inner().map_err(|e| BenchError::Io {
        path: PathBuf::from("<memory>"),
        source: e.into_error(),
    })
}

pub fn read_csv(bytes: &[u8]) -> Result<Vec<RunRecord>, BenchError> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(BenchError::from)
}

/// `(rank, seconds)` of the solver's solved runs, fastest first.
pub fn cactus_data(records: &[RunRecord], solver: &str) -> Vec<(usize, f64)> {
    let mut times: Vec<f64> = records
        .iter()
        .filter(|r| r.solver == solver && r.status == RunStatus::Solved)
        .map(|r| r.seconds)
        .collect();
    times.sort_by(f64::total_cmp);
    times.into_iter().enumerate().map(|(i, t)| (i + 1, t)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupReport {
    /// `(instance, baseline seconds / subject seconds)` per commonly solved instance.
    pub ratios: Vec<(String, f64)>,
    pub arithmetic_mean: f64,
    pub geometric_mean: f64,
}

pub fn speedup_report(
    records: &[RunRecord],
    baseline: &str,
    subject: &str,
) -> Result<SpeedupReport, BenchError> {
    let solved = |name: &str| -> BTreeMap<&str, f64> {
        records
            .iter()
            .filter(|r| r.solver == name && r.status == RunStatus::Solved)
            .map(|r| (r.instance.as_str(), r.seconds))
            .collect()
    };
    let (base, subj) = (solved(baseline), solved(subject));
    let ratios: Vec<(String, f64)> = base
        .iter()
        .filter_map(|(id, &b)| subj.get(id).map(|&s| (id.to_string(), b / s.max(1e-9))))
        .collect();
    if ratios.is_empty() {
        return Err(BenchError::NoCommonInstances {
            baseline: baseline.to_string(),
            subject: subject.to_string(),
        });
    }
    let k = ratios.len() as f64;
    let arithmetic_mean = ratios.iter().map(|r| r.1).sum::<f64>() / k;
    let geometric_mean = (ratios.iter().map(|r| r.1.ln()).sum::<f64>() / k).exp();
    Ok(SpeedupReport {
        ratios,
        arithmetic_mean,
        geometric_mean,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub instance: String,
    pub a: f64,
    pub b: f64,
    /// The run did not finish within the limit (or failed) and sits on the rail.
    pub a_rail: bool,
    pub b_rail: bool,
}

/// One point per instance run by both solvers; unfinished runs are clamped
/// to `limit` and flagged.
pub fn scatter_data(records: &[RunRecord], a: &str, b: &str, limit: f64) -> Vec<ScatterPoint> {
    let times = |name: &str| -> BTreeMap<&str, (f64, bool)> {
        records
            .iter()
            .filter(|r| r.solver == name)
            .map(|r| {
                let rail = matches!(r.status, RunStatus::Timeout | RunStatus::Error);
                let t = if rail { limit } else { r.seconds.min(limit) };
                (r.instance.as_str(), (t, rail))
            })
            .collect()
    };
    let (ta, tb) = (times(a), times(b));
    ta.iter()
        .filter_map(|(id, &(x, ra))| {
            tb.get(id).map(|&(y, rb)| ScatterPoint {
                instance: id.to_string(),
                a: x,
                b: y,
                a_rail: ra,
                b_rail: rb,
            })
        })
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct LogAxis {
    lo: f64,
    hi: f64,
}

impl LogAxis {
    fn new(values: impl Iterator<Item = f64>) -> LogAxis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let l = v.max(1e-6).log10();
            lo = lo.min(l.floor());
            hi = hi.max(l.ceil());
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        LogAxis { lo, hi }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        (v.max(1e-6).log10() - self.lo) / (self.hi - self.lo)
    }

    fn decades(&self) -> impl Iterator<Item = i32> {
        (self.lo as i32)..=(self.hi as i32)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn y_log_axis(out: &mut String, axis: &LogAxis, label: &str) {
    for d in axis.decades() {
        let y = H - MARGIN - axis.frac(10f64.powi(d)) * (H - 2.0 * MARGIN);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#ddd"/><text x="{:.1}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">1e{d}</text>"##,
            W - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(label)
    );
}

/// Cactus plot: one curve per solver, rank on x, log-scale seconds on y.
pub fn cactus_svg(series: &[(String, Vec<(usize, f64)>)]) -> Result<String, BenchError> {
    let points: usize = series.iter().map(|(_, s)| s.len()).sum();
    if points == 0 {
        return Err(BenchError::EmptySeries);
    }
    let max_rank = series.iter().flat_map(|(_, s)| s.iter().map(|p| p.0)).max().unwrap_or(1);
    let axis = LogAxis::new(series.iter().flat_map(|(_, s)| s.iter().map(|p| p.1)));
    let x_of = |rank: usize| MARGIN + (rank as f64 / max_rank as f64) * (W - 2.0 * MARGIN);
    let y_of = |t: f64| H - MARGIN - axis.frac(t) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    svg_open(&mut out, "Solved instances by running time");
    y_log_axis(&mut out, &axis, "seconds");
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">instances solved</text>"#,
        W / 2.0,
        H - 20.0
    );
    for (i, (name, s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = s.iter().map(|&(r, t)| format!("{:.2},{:.2}", x_of(r), y_of(t))).collect();
        if path.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        for &(r, t) in s {
            let _ = writeln!(
                out,
                r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x_of(r),
                y_of(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Scatter plot of solver A (x) against solver B (y), both log-scaled, with
/// the diagonal and the time-limit rails.
pub fn scatter_svg(points: &[ScatterPoint], a: &str, b: &str, limit: f64) -> Result<String, BenchError> {
    if points.is_empty() {
        return Err(BenchError::EmptySeries);
    }
    let axis = LogAxis::new(points.iter().flat_map(|p| [p.a, p.b]).chain([limit]));
    let span = W.min(H) - 2.0 * MARGIN;
    let x_of = |t: f64| MARGIN + axis.frac(t) * span;
    let y_of = |t: f64| MARGIN + span - axis.frac(t) * span;

    let mut out = String::new();
    svg_open(&mut out, &format!("{a} vs {b} (seconds)"));
    let (lo, hi) = (10f64.powf(axis.lo), 10f64.powf(axis.hi));
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2ca02c"/>"##,
        x_of(lo),
        y_of(lo),
        x_of(hi),
        y_of(hi)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f77b4"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f77b4"/>"##,
        x_of(limit),
        y_of(lo),
        x_of(limit),
        y_of(hi),
        x_of(lo),
        y_of(limit),
        x_of(hi),
        y_of(limit)
    );
    for p in points {
        let class = if p.a_rail || p.b_rail { "point rail" } else { "point" };
        let _ = writeln!(
            out,
            r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
            x_of(p.a),
            y_of(p.b)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN + span / 2.0,
        MARGIN + span + 36.0,
        escape(a)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
        MARGIN + span + 10.0,
        MARGIN + 12.0,
        escape(&format!("y: {b}"))
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, solver: &str, status: RunStatus, seconds: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            solver: solver.into(),
            status,
            seconds,
            weight: (status == RunStatus::Solved).then_some(1),
            partition_seconds: None,
            seed: 0,
            config_hash: "0".into(),
        }
    }

    #[test]
    fn two_solvers_agree_on_one_instance() {
        let inst = generate::maze_to_instance(&generate::generate_maze(5, 0.3, 1).unwrap());
        let spec = SuiteSpec {
            instances: vec![("m".into(), inst)],
            solvers: vec![SolverSpec::Lpdp(LpdpConfig::default()), SolverSpec::ExhDfs],
            time_limit: Duration::from_secs(30),
            repetitions: 1,
            jobs: 1,
        };
        let records = run_suite(&spec);
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.status == RunStatus::Solved));
        assert_eq!(records[0].weight, records[1].weight);
        assert!(records[0].partition_seconds.is_some());
    }

    #[test]
    fn tiny_limit_times_out() {
        let inst = generate::maze_to_instance(&generate::generate_maze(30, 0.0, 1).unwrap());
        let r = run_one("m", &inst, &SolverSpec::ExhDfs, Duration::from_millis(1));
        assert_eq!(r.status, RunStatus::Timeout);
        assert_eq!(r.weight, None);
    }

    #[test]
    fn csv_round_trip() {
        let mut records = vec![
            rec("a", "lpdp", RunStatus::Solved, 0.125),
            rec("b", "exhdfs", RunStatus::Timeout, 60.000_001),
            rec("c", "lpdp", RunStatus::Error, 1e-7),
        ];
        records[0].partition_seconds = Some(0.01);
        let bytes = write_csv(&records).unwrap();
        assert!(String::from_utf8_lossy(&bytes).starts_with(CSV_HEADER));
        assert_eq!(read_csv(&bytes).unwrap(), records);
        assert_eq!(write_csv(&read_csv(&bytes).unwrap()).unwrap(), bytes);
        let empty = write_csv(&[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn cactus_drops_unsolved_and_sorts() {
        let records = vec![
            rec("a", "x", RunStatus::Solved, 3.0),
            rec("b", "x", RunStatus::Solved, 1.0),
            rec("c", "x", RunStatus::Timeout, 60.0),
        ];
        assert_eq!(cactus_data(&records, "x"), vec![(1, 1.0), (2, 3.0)]);
        assert!(cactus_data(&records, "y").is_empty());
    }

    #[test]
    fn speedup_over_common_instances() {
        let records = vec![
            rec("a", "base", RunStatus::Solved, 2.0),
            rec("b", "base", RunStatus::Solved, 8.0),
            rec("c", "base", RunStatus::Timeout, 60.0),
            rec("a", "new", RunStatus::Solved, 1.0),
            rec("b", "new", RunStatus::Solved, 2.0),
            rec("c", "new", RunStatus::Solved, 5.0),
        ];
        let r = speedup_report(&records, "base", "new").unwrap();
        assert_eq!(r.ratios, vec![("a".into(), 2.0), ("b".into(), 4.0)]);
        assert_eq!(r.arithmetic_mean, 3.0);
        assert!((r.geometric_mean - 8f64.sqrt()).abs() < 1e-12);
        let same = speedup_report(&records, "new", "new").unwrap();
        assert!(same.ratios.iter().all(|r| r.1 == 1.0));
        let none = vec![rec("a", "base", RunStatus::Timeout, 60.0), rec("a", "new", RunStatus::Solved, 1.0)];
        assert!(matches!(
            speedup_report(&none, "base", "new"),
            Err(BenchError::NoCommonInstances { .. })
        ));
    }

    #[test]
    fn scatter_rails() {
        let records = vec![
            rec("a", "A", RunStatus::Solved, 1.0),
            rec("a", "B", RunStatus::Solved, 2.0),
            rec("b", "A", RunStatus::Timeout, 61.0),
            rec("b", "B", RunStatus::Solved, 5.0),
        ];
        let pts = scatter_data(&records, "A", "B", 60.0);
        assert_eq!(pts.len(), 2);
        assert!(pts[0].b > pts[0].a && !pts[0].a_rail);
        assert_eq!((pts[1].a, pts[1].b, pts[1].a_rail, pts[1].b_rail), (60.0, 5.0, true, false));
        let svg = scatter_svg(&pts, "A", "B", 60.0).unwrap();
        assert_eq!(svg.matches(r#"class="point rail""#).count(), 1);
        assert_eq!(svg.matches(r#"class="point"#).count(), 2);
    }

    #[test]
    fn cactus_svg_markers_and_determinism() {
        let series = vec![("lpdp".to_string(), vec![(1, 0.5), (2, 4.0)])];
        let a = cactus_svg(&series).unwrap();
        assert_eq!(a.matches(r#"class="point""#).count(), 2);
        assert_eq!(a, cactus_svg(&series).unwrap());
        assert!(matches!(cactus_svg(&[]), Err(BenchError::EmptySeries)));
        assert!(matches!(
            cactus_svg(&[("x".into(), vec![])]),
            Err(BenchError::EmptySeries)
        ));
    }

    #[test]
    fn medians_of_repetitions() {
        let records = vec![
            rec("a", "x", RunStatus::Solved, 3.0),
            rec("a", "x", RunStatus::Solved, 1.0),
            rec("a", "x", RunStatus::Solved, 2.0),
            rec("b", "x", RunStatus::Solved, 7.0),
        ];
        let m = median_records(&records);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].seconds, 2.0);
        assert_eq!(m[1].seconds, 7.0);
    }

    #[test]
    fn instance_specs() {
        assert_eq!(
            InstanceSpec::parse("maze:10:0.3:7").unwrap(),
            InstanceSpec::Maze { side: 10, fill: 0.3, seed: 7 }
        );
        assert!(InstanceSpec::parse("maze:10:0.3").is_err());
        assert!(InstanceSpec::parse("metis:g.graph:0:2").is_err());
        assert!(InstanceSpec::parse("cube:1:2:3").is_err());
        let inst = InstanceSpec::parse("random:8:0.5:1").unwrap().load().unwrap();
        assert_eq!(inst.graph.vertex_count(), 8);
    }

    #[test]
    fn config_hash_is_stable_and_distinguishes() {
        let a = SolverSpec::Lpdp(LpdpConfig::default());
        let b = SolverSpec::Lpdp(LpdpConfig { seed: 1, ..LpdpConfig::default() });
        assert_eq!(a.config_hash(), a.config_hash());
        assert_eq!(a.config_hash().len(), 16);
        assert_ne!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), SolverSpec::ExhDfs.config_hash());
    }
}
