//! Benchmark orchestration: build graph, hierarchy, expanded system and
//! preconditioners, solve with the paper-style low-frequency right-hand
//! side, and record one result row per preconditioner.

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use lapcond::aggregation::{build_hierarchy, composite_prolongation, LevelSpec};
use lapcond::expansion::{expand_laplacian, extract_msp, project_rhs, ExpandedSystem};
use lapcond::graph::{build_laplacian, WeightedGraph};
use lapcond::solver::{
    fgmres, msp_elimination_order, FgmresOptions, Preconditioner, PreconditionerKind,
};
use lapcond::spectral::expanded_pencil;

use crate::error::{BenchError, Result};
use crate::generators::{gen_grid2d, gen_ring, gen_watts_strogatz};
use crate::mtx::ingest_mtx;

/// Where the benchmark graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Grid2d { n: usize },
    Ring { n: usize, deg: usize },
    WattsStrogatz { n: usize, deg: usize, beta: Option<f64> },
    Mtx { path: PathBuf },
}

impl GraphSource {
    /// Parse a spec string: `grid2d:N`, `ring:N[:DEG]`, `ws:N[:DEG[:BETA]]`,
    /// `mtx:PATH`, or a bare path ending in `.mtx`.
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("mtx:") {
            return Ok(GraphSource::Mtx { path: path.into() });
        }
        if s.ends_with(".mtx") {
            return Ok(GraphSource::Mtx { path: s.into() });
        }
        let parts: Vec<&str> = s.split(':').collect();
        let parse_usize = |t: &str, what: &str| {
            t.parse::<usize>()
                .map_err(|_| BenchError::BadCase(format!("bad {what} in graph spec `{s}`")))
        };
        match parts[0] {
            "grid2d" if parts.len() == 2 => Ok(GraphSource::Grid2d {
                n: parse_usize(parts[1], "node count")?,
            }),
            "ring" if (2..=3).contains(&parts.len()) => Ok(GraphSource::Ring {
                n: parse_usize(parts[1], "node count")?,
                deg: if parts.len() == 3 {
                    parse_usize(parts[2], "degree")?
                } else {
                    4
                },
            }),
            "ws" if (2..=4).contains(&parts.len()) => Ok(GraphSource::WattsStrogatz {
                n: parse_usize(parts[1], "node count")?,
                deg: if parts.len() >= 3 {
                    parse_usize(parts[2], "degree")?
                } else {
                    4
                },
                beta: if parts.len() == 4 {
                    Some(parts[3].parse::<f64>().map_err(|_| {
                        BenchError::BadCase(format!("bad beta in graph spec `{s}`"))
                    })?)
                } else {
                    None
                },
            }),
            _ => Err(BenchError::BadCase(format!(
                "unrecognized graph spec `{s}` (expected grid2d:N, ring:N[:DEG], ws:N[:DEG[:BETA]], or a .mtx path)"
            ))),
        }
    }

    pub fn build(&self, seed: u64) -> Result<WeightedGraph<f64>> {
        match self {
            GraphSource::Grid2d { n } => {
                let side = (*n as f64).sqrt().round() as usize;
                if side * side != *n {
                    return Err(BenchError::BadGenerator(format!(
                        "grid2d requires a square node count, got {n}"
                    )));
                }
                gen_grid2d(side)
            }
            GraphSource::Ring { n, deg } => gen_ring(*n, *deg),
            GraphSource::WattsStrogatz { n, deg, beta } => {
                let beta = beta.unwrap_or(1.0 / (*n as f64).sqrt());
                gen_watts_strogatz(*n, *deg, beta, seed)
            }
            GraphSource::Mtx { path } => ingest_mtx(path),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Grid2d { n } => write!(f, "grid2d:{n}"),
            GraphSource::Ring { n, deg } => write!(f, "ring:{n}:{deg}"),
            GraphSource::WattsStrogatz { n, deg, beta } => match beta {
                Some(b) => write!(f, "ws:{n}:{deg}:{b}"),
                None => write!(f, "ws:{n}:{deg}"),
            },
            GraphSource::Mtx { path } => write!(f, "mtx:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    Fixed(f64),
    InvSqrtN,
}

impl MuRule {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "inv-sqrt-n" {
            return Ok(MuRule::InvSqrtN);
        }
        s.parse::<f64>()
            .map(MuRule::Fixed)
            .map_err(|_| BenchError::BadCase(format!("bad mu `{s}` (float or inv-sqrt-n)")))
    }

    pub fn resolve(&self, n: usize) -> f64 {
        match self {
            MuRule::Fixed(v) => *v,
            MuRule::InvSqrtN => 1.0 / (n as f64).sqrt(),
        }
    }
}

pub fn parse_levels(s: &str) -> Result<LevelSpec> {
    if s == "max" {
        return Ok(LevelSpec::Max);
    }
    s.parse::<usize>()
        .map(LevelSpec::Count)
        .map_err(|_| BenchError::BadCase(format!("bad levels `{s}` (integer or max)")))
}

pub fn parse_precond(s: &str) -> Result<PreconditionerKind> {
    match s {
        "pegp" => Ok(PreconditionerKind::Pegp),
        "msp" => Ok(PreconditionerKind::Msp),
        "none" => Ok(PreconditionerKind::None),
        other => Err(BenchError::BadCase(format!(
            "unknown preconditioner `{other}` (pegp, msp, none)"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub source: GraphSource,
    pub mu: MuRule,
    pub levels: LevelSpec,
    pub preconditioners: Vec<PreconditionerKind>,
    pub tol: f64,
    pub seed: u64,
    /// Compute the dense condition number when the expanded system is small
    /// enough (n_tilde <= 4000).
    pub compute_kappa: bool,
}

impl BenchmarkCase {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(BenchError::BadCase(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tol
            )));
        }
        if self.preconditioners.is_empty() {
            return Err(BenchError::BadCase("no preconditioner requested".into()));
        }
        Ok(())
    }

    fn label(&self) -> String {
        let levels = match self.levels {
            LevelSpec::Max => "max".to_string(),
            LevelSpec::Count(c) => c.to_string(),
        };
        let mu = match self.mu {
            MuRule::InvSqrtN => "inv-sqrt-n".to_string(),
            MuRule::Fixed(v) => v.to_string(),
        };
        format!("{}|mu={}|levels={}|seed={}", self.source, mu, levels, self.seed)
    }
}

/// One emitted result line. Field order is the emission column order.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    #[serde(rename = "case")]
    pub case_id: String,
    pub n: usize,
    pub n_tilde: usize,
    pub levels: usize,
    pub mu: f64,
    pub preconditioner: String,
    pub steps: usize,
    #[serde(rename = "time")]
    pub wall_time_s: f64,
    pub kappa: Option<f64>,
    pub converged: bool,
}

const KAPPA_DENSE_LIMIT: usize = 4000;

/// Run one benchmark case: one row per requested preconditioner. Setup
/// failures surface as non-converged rows rather than aborting the batch.
pub fn run_benchmark(case: &BenchmarkCase) -> Result<Vec<ResultRow>> {
    case.validate()?;
    let label = case.label();
    match prepare_system(case) {
        Ok(prep) => Ok(run_prepared(case, &label, &prep)),
        Err(err) => {
            eprintln!("case `{label}` failed during setup: {err}");
            Ok(case
                .preconditioners
                .iter()
                .map(|kind| ResultRow {
                    case_id: label.clone(),
                    n: 0,
                    n_tilde: 0,
                    levels: 0,
                    mu: f64::NAN,
                    preconditioner: kind.to_string(),
                    steps: 0,
                    wall_time_s: 0.0,
                    kappa: None,
                    converged: false,
                })
                .collect())
        }
    }
}

struct PreparedSystem {
    sys: ExpandedSystem<f64>,
    hierarchy: lapcond::aggregation::AggregationHierarchy<f64>,
    b_tilde: Vec<f64>,
    mu: f64,
}

fn prepare_system(case: &BenchmarkCase) -> Result<PreparedSystem> {
    let g = case.source.build(case.seed)?;
    let n = g.n();
    let hierarchy = build_hierarchy(&g, case.levels, case.seed)?;
    let mu = case.mu.resolve(n);
    let p = composite_prolongation(&hierarchy, mu)?;
    let l = build_laplacian(&g);
    let sys = expand_laplacian(&l, p)?;

    // low-frequency right-hand side b = [1, ..., 1, 1-n]^T projected into
    // expanded coordinates
    let mut b = vec![1.0; n];
    b[n - 1] = 1.0 - n as f64;
    let b_tilde = project_rhs(&sys.p_comp, &b)?;
    Ok(PreparedSystem {
        sys,
        hierarchy,
        b_tilde,
        mu,
    })
}

fn run_prepared(case: &BenchmarkCase, label: &str, prep: &PreparedSystem) -> Vec<ResultRow> {
    let sys = &prep.sys;
    let kappa = if case.compute_kappa && sys.n_tilde() <= KAPPA_DENSE_LIMIT {
        match expanded_pencil(sys) {
            Ok(spec) => Some(spec.kappa),
            Err(err) => {
                eprintln!("case `{label}`: kappa computation failed: {err}");
                None
            }
        }
    } else {
        None
    };

    let mut rows = Vec::with_capacity(case.preconditioners.len());
    for &kind in &case.preconditioners {
        let row = run_one(case, label, prep, kind, kappa);
        rows.push(row);
    }
    rows
}

fn run_one(
    case: &BenchmarkCase,
    label: &str,
    prep: &PreparedSystem,
    kind: PreconditionerKind,
    kappa: Option<f64>,
) -> ResultRow {
    let sys = &prep.sys;
    let failed_row = |msg: &str| {
        eprintln!("case `{label}` [{kind}]: {msg}");
        ResultRow {
            case_id: label.to_string(),
            n: sys.base_n(),
            n_tilde: sys.n_tilde(),
            levels: sys.levels(),
            mu: prep.mu,
            preconditioner: kind.to_string(),
            steps: 0,
            wall_time_s: 0.0,
            kappa,
            converged: false,
        }
    };

    let setup = Instant::now();
    let precond = match kind {
        PreconditionerKind::None => None,
        PreconditionerKind::Pegp | PreconditionerKind::Custom => {
            match Preconditioner::pegp(&sys.l_pegp) {
                Ok(p) => Some(p),
                Err(err) => return failed_row(&format!("preconditioner build failed: {err}")),
            }
        }
        PreconditionerKind::Msp => {
            let msp = match extract_msp(sys, &prep.hierarchy) {
                Ok(m) => m,
                Err(err) => return failed_row(&format!("msp extraction failed: {err}")),
            };
            let order = msp_elimination_order(sys, &msp, &prep.hierarchy);
            match Preconditioner::msp(&msp.laplacian(), order) {
                Ok(p) => Some(p),
                Err(err) => return failed_row(&format!("msp factorization failed: {err}")),
            }
        }
    };
    let setup_time = setup.elapsed().as_secs_f64();

    let mut opts = FgmresOptions::new(case.tol);
    opts.project_ones = true;
    let (_, report) = match fgmres(&sys.l_expanded, &prep.b_tilde, precond.as_ref(), &opts) {
        Ok(r) => r,
        Err(err) => return failed_row(&format!("solve failed: {err}")),
    };
    println!(
        "case `{label}` [{kind}]: steps={} solve={:.4}s setup={:.4}s converged={}",
        report.iterations, report.wall_time, setup_time, report.converged
    );
    ResultRow {
        case_id: label.to_string(),
        n: sys.base_n(),
        n_tilde: sys.n_tilde(),
        levels: sys.levels(),
        mu: prep.mu,
        preconditioner: kind.to_string(),
        steps: report.iterations,
        wall_time_s: report.wall_time,
        kappa,
        converged: report.converged,
    }
}

/// A spectral-analysis row for the `analyze` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeRow {
    pub graph: String,
    pub n: usize,
    pub levels: usize,
    pub n_tilde: usize,
    pub kappa: Option<f64>,
}

pub fn analyze_graph(
    source: &GraphSource,
    mu: MuRule,
    levels: LevelSpec,
    seed: u64,
    dense_kappa: bool,
) -> Result<AnalyzeRow> {
    let g = source.build(seed)?;
    let hierarchy = build_hierarchy(&g, levels, seed)?;
    let mu_val = mu.resolve(g.n());
    let p = composite_prolongation(&hierarchy, mu_val)?;
    let l = build_laplacian(&g);
    let sys = expand_laplacian(&l, p)?;
    let kappa = if dense_kappa {
        Some(expanded_pencil(&sys)?.kappa)
    } else {
        None
    };
    Ok(AnalyzeRow {
        graph: source.to_string(),
        n: g.n(),
        levels: hierarchy.levels(),
        n_tilde: sys.n_tilde(),
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_graph_specs() {
        assert_eq!(
            GraphSource::parse("grid2d:256").unwrap(),
            GraphSource::Grid2d { n: 256 }
        );
        assert_eq!(
            GraphSource::parse("ring:64:4").unwrap(),
            GraphSource::Ring { n: 64, deg: 4 }
        );
        assert_eq!(
            GraphSource::parse("ws:128").unwrap(),
            GraphSource::WattsStrogatz {
                n: 128,
                deg: 4,
                beta: None
            }
        );
        assert_eq!(
            GraphSource::parse("ws:128:6:0.25").unwrap(),
            GraphSource::WattsStrogatz {
                n: 128,
                deg: 6,
                beta: Some(0.25)
            }
        );
        assert!(matches!(
            GraphSource::parse("data/graph.mtx").unwrap(),
            GraphSource::Mtx { .. }
        ));
        assert!(GraphSource::parse("trellis:9").is_err());
    }

    #[test]
    fn grid_requires_square() {
        let src = GraphSource::Grid2d { n: 20 };
        assert!(src.build(0).is_err());
        let src = GraphSource::Grid2d { n: 16 };
        assert_eq!(src.build(0).unwrap().n(), 16);
    }

    #[test]
    fn mu_rules() {
        assert_eq!(MuRule::parse("0.8").unwrap(), MuRule::Fixed(0.8));
        assert_eq!(MuRule::parse("inv-sqrt-n").unwrap(), MuRule::InvSqrtN);
        assert!(MuRule::parse("eleven").is_err());
        assert_eq!(MuRule::InvSqrtN.resolve(256), 1.0 / 16.0);
    }

    #[test]
    fn benchmark_rhs_is_compatible() {
        let n = 16;
        let mut b = vec![1.0; n];
        b[n - 1] = 1.0 - n as f64;
        assert_eq!(b.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn run_small_grid_case() {
        let case = BenchmarkCase {
            source: GraphSource::Grid2d { n: 64 },
            mu: MuRule::InvSqrtN,
            levels: LevelSpec::Count(2),
            preconditioners: vec![
                PreconditionerKind::Pegp,
                PreconditionerKind::Msp,
                PreconditionerKind::None,
            ],
            tol: 1e-8,
            seed: 0,
            compute_kappa: true,
        };
        let rows = run_benchmark(&case).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert!(row.converged, "{}: did not converge", row.preconditioner);
            assert!(row.steps <= 1000);
            assert!(row.kappa.is_some());
        }
        let pegp = rows.iter().find(|r| r.preconditioner == "pegp").unwrap();
        let none = rows.iter().find(|r| r.preconditioner == "none").unwrap();
        assert!(pegp.steps <= none.steps);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let case = BenchmarkCase {
            source: GraphSource::Grid2d { n: 16 },
            mu: MuRule::Fixed(0.5),
            levels: LevelSpec::Count(2),
            preconditioners: vec![PreconditionerKind::None],
            tol: 1.5,
            seed: 0,
            compute_kappa: false,
        };
        assert!(run_benchmark(&case).is_err());
    }

    #[test]
    fn setup_failure_yields_failed_rows() {
        let case = BenchmarkCase {
            source: GraphSource::Mtx {
                path: "/does/not/exist.mtx".into(),
            },
            mu: MuRule::Fixed(0.5),
            levels: LevelSpec::Max,
            preconditioners: vec![PreconditionerKind::Pegp, PreconditionerKind::Msp],
            tol: 1e-6,
            seed: 0,
            compute_kappa: false,
        };
        let rows = run_benchmark(&case).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| !r.converged));
    }

    #[test]
    fn analyze_reports_kappa() {
        let row = analyze_graph(
            &GraphSource::Grid2d { n: 16 },
            MuRule::InvSqrtN,
            LevelSpec::Max,
            1,
            true,
        )
        .unwrap();
        assert_eq!(row.n, 16);
        assert!(row.n_tilde > 16);
        let kappa = row.kappa.unwrap();
        assert!(kappa >= 1.0 - 1e-12);
    }
}
