use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lapcond_cli::benchmark::{
    analyze_graph, parse_levels, parse_precond, run_benchmark, BenchmarkCase, GraphSource, MuRule,
};
use lapcond_cli::emit::{emit_results, emit_results_to, OutputFormat};
use lapcond_cli::generators::{gen_grid2d, gen_ring, gen_watts_strogatz};
use lapcond_cli::mtx::write_mtx;
use lapcond_cli::{resolve_seed, Result};

/// Multilevel expanded-graph preconditioners for graph Laplacians:
/// generators, benchmarks and spectral tables.
#[derive(Parser)]
#[command(name = "lapcond", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark graph and write it as a Matrix Market file.
    Gen(GenArgs),
    /// Solve a graph Laplacian benchmark case and emit result rows.
    Bench(BenchArgs),
    /// Spectral analysis: hierarchy sizes and dense condition numbers.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Grid2d,
    Ring,
    Ws,
}

#[derive(Args)]
struct GenArgs {
    /// Graph family.
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Node count (grid2d requires a perfect square).
    #[arg(long)]
    n: usize,
    /// Node degree for ring and ws (default 4).
    #[arg(long)]
    deg: Option<usize>,
    /// Rewiring probability for ws (default 1/sqrt(n)).
    #[arg(long)]
    beta: Option<f64>,
    /// RNG seed (default: LAPCOND_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (.mtx).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Json,
    Csv,
}

impl From<EmitFormat> for OutputFormat {
    fn from(f: EmitFormat) -> Self {
        match f {
            EmitFormat::Json => OutputFormat::Json,
            EmitFormat::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Graph: a .mtx path or a generator spec
    /// (grid2d:N | ring:N[:DEG] | ws:N[:DEG[:BETA]]).
    #[arg(long)]
    graph: String,
    /// Scaling parameter: a float or `inv-sqrt-n`.
    #[arg(long)]
    mu: String,
    /// Hierarchy depth: an integer or `max`.
    #[arg(long)]
    levels: String,
    /// Preconditioners to run, comma separated subset of pegp,msp,none.
    #[arg(long, value_delimiter = ',')]
    precond: Vec<String>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: f64,
    /// RNG seed (default: LAPCOND_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: EmitFormat,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the dense condition number when n_tilde <= 4000.
    #[arg(long)]
    dense_kappa: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph spec; may be given several times for a table.
    #[arg(long, required = true)]
    graph: Vec<String>,
    /// Scaling parameter: a float or `inv-sqrt-n`.
    #[arg(long)]
    mu: String,
    /// Hierarchy depth: an integer or `max`.
    #[arg(long)]
    levels: String,
    /// Compute the dense condition number of the preconditioned pencil.
    #[arg(long)]
    dense_kappa: bool,
    /// RNG seed (default: LAPCOND_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Bench(args) => run_bench(args),
        Command::Analyze(args) => run_analyze(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run_gen(args: GenArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let graph = match args.kind {
        GenKind::Grid2d => {
            let side = (args.n as f64).sqrt().round() as usize;
            if side * side != args.n {
                return Err(lapcond_cli::BenchError::BadGenerator(format!(
                    "grid2d requires a square node count, got {}",
                    args.n
                )));
            }
            gen_grid2d(side)?
        }
        GenKind::Ring => gen_ring(args.n, args.deg.unwrap_or(4))?,
        GenKind::Ws => {
            let beta = args.beta.unwrap_or(1.0 / (args.n as f64).sqrt());
            gen_watts_strogatz(args.n, args.deg.unwrap_or(4), beta, seed)?
        }
    };
    write_mtx(&graph, &args.out)?;
    println!(
        "wrote {} ({} nodes, {} edges)",
        args.out.display(),
        graph.n(),
        graph.m()
    );
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let preconditioners = args
        .precond
        .iter()
        .map(|s| parse_precond(s))
        .collect::<Result<Vec<_>>>()?;
    let case = BenchmarkCase {
        source: GraphSource::parse(&args.graph)?,
        mu: MuRule::parse(&args.mu)?,
        levels: parse_levels(&args.levels)?,
        preconditioners,
        tol: args.tol,
        seed: resolve_seed(args.seed),
        compute_kappa: args.dense_kappa,
    };
    let rows = run_benchmark(&case)?;
    match args.out {
        Some(path) => emit_results(&rows, args.format.into(), path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit_results_to(&rows, args.format.into(), &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let mu = MuRule::parse(&args.mu)?;
    let levels = parse_levels(&args.levels)?;
    let seed = resolve_seed(args.seed);
    println!("{:<24} {:>8} {:>7} {:>9} {:>12}", "graph", "n", "levels", "n_tilde", "kappa");
    for spec in &args.graph {
        let source = GraphSource::parse(spec)?;
        let row = analyze_graph(&source, mu, levels, seed, args.dense_kappa)?;
        let kappa = row
            .kappa
            .map_or("-".to_string(), |k| format!("{k:.4}"));
        println!(
            "{:<24} {:>8} {:>7} {:>9} {:>12}",
            row.graph, row.n, row.levels, row.n_tilde, kappa
        );
    }
    Ok(())
}
