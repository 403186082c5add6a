//! `lpdp`: generate instances, partition, solve, verify and benchmark.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lpdp::bench::{self, InstanceSpec, RunStatus, SolverSpec, SuiteSpec};
use lpdp::generate;
use lpdp::graph::{emit_metis, parse_metis, validate_path, Instance};
use lpdp::oracle::{exhaustive_dfs, Solution, Status};
use lpdp::partition::{self, load_partition, DEFAULT_IMBALANCE};
use lpdp::solver::{self, LpdpConfig, SearchOptions};

const EXIT_NO_PATH: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "lpdp", version, about = "Exact longest simple paths by partition-based dynamic programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Partition a graph into k balanced blocks.
    Partition(PartitionArgs),
    /// Find a longest simple path between two vertices.
    Solve(SolveArgs),
    /// Check a path against a graph.
    Verify(VerifyArgs),
    /// Run suites and summarize results.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Random grid maze from the top-left to the bottom-right cell.
    Maze {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        fill: f64,
        #[arg(long, env = "LPDP_SEED", default_value_t = 0)]
        seed: u64,
        /// METIS output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the grid as text.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Induced subgraph grown by breadth-first search from a random vertex.
    Subgraph {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, env = "LPDP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Number of blocks, a power of two (default: about 64 vertices per block).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_IMBALANCE)]
    imbalance: f64,
    #[arg(long, env = "LPDP_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverName {
    Lpdp,
    Exhdfs,
}

#[derive(Args, Clone)]
struct LpdpArgs {
    /// Number of leaf blocks, a power of two.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_IMBALANCE)]
    imbalance: f64,
    #[arg(long, default_value_t = 12)]
    boundary_cap: usize,
    #[arg(long, env = "LPDP_SEED", default_value_t = 0)]
    seed: u64,
    /// Attach every leaf block directly to the root.
    #[arg(long)]
    flat: bool,
    /// Disable the id-ordering rules of the segment search.
    #[arg(long)]
    no_symmetry_pruning: bool,
}

impl LpdpArgs {
    fn config(&self) -> LpdpConfig {
        LpdpConfig {
            k: self.k,
            imbalance: self.imbalance,
            boundary_cap: self.boundary_cap,
            seed: self.seed,
            flat: self.flat,
            search: SearchOptions {
                symmetry_pruning: !self.no_symmetry_pruning,
                ..SearchOptions::default()
            },
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// METIS graph file.
    #[arg(long, conflicts_with = "instance")]
    graph: Option<PathBuf>,
    /// 1-based source vertex.
    #[arg(long, requires = "graph")]
    source: Option<usize>,
    /// 1-based target vertex.
    #[arg(long, requires = "graph")]
    target: Option<usize>,
    /// Generated instance, e.g. `maze:20:0.3:7` or `random:14:0.3:1`.
    #[arg(long)]
    instance: Option<String>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        if let Some(spec) = &self.instance {
            return Ok(InstanceSpec::parse(spec)?.load()?);
        }
        let Some(path) = &self.graph else {
            bail!(UsageError("either --graph or --instance is required".into()));
        };
        let (Some(s), Some(t)) = (self.source, self.target) else {
            bail!(UsageError("--graph needs --source and --target".into()));
        };
        if s == 0 || t == 0 {
            bail!(UsageError("vertex ids are 1-based".into()));
        }
        let g = read_graph(path)?;
        Ok(Instance::new(g, s - 1, t - 1)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[arg(long, value_enum, default_value = "lpdp")]
    solver: SolverName,
    #[command(flatten)]
    lpdp: LpdpArgs,
    /// Externally computed partition, one block id per line.
    #[arg(long)]
    partition_file: Option<PathBuf>,
    /// Accept a partition file that violates the balance bound.
    #[arg(long)]
    allow_imbalance: bool,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Write the solution here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InstanceArgs,
    /// Solution file as written by `solve`, or a bare line of 1-based ids.
    #[arg(long)]
    path_file: PathBuf,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run solvers over instances and write a results CSV.
    Run {
        /// Instance spec; repeatable.
        #[arg(long = "instance")]
        instances: Vec<String>,
        /// File with one instance spec per line.
        #[arg(long)]
        instance_list: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "lpdp,exhdfs")]
        solvers: Vec<String>,
        /// Seconds per run.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        lpdp: LpdpArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the cactus series of one solver.
    Cactus {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        solver: String,
    },
    /// Print paired running times with timeout rails.
    Scatter {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
    /// Speedup of a solver over a baseline on commonly solved instances.
    Speedup {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "exhdfs")]
        baseline: String,
        #[arg(long, default_value = "lpdp")]
        subject: String,
    },
    /// Write cactus.svg and, for two or more solvers, scatter.svg.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(cmd) => generate_cmd(cmd),
        Command::Partition(args) => partition_cmd(args),
        Command::Solve(args) => solve_cmd(args),
        Command::Verify(args) => verify_cmd(args),
        Command::Bench(cmd) => bench_cmd(cmd),
    }
}

fn read_graph(path: &Path) -> Result<lpdp::Graph> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_metis(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn print_endpoints(inst: &Instance) {
    println!("s {}", inst.source + 1);
    println!("t {}", inst.target + 1);
}

fn generate_cmd(cmd: GenerateCmd) -> Result<ExitCode> {
    match cmd {
        GenerateCmd::Maze {
            n,
            fill,
            seed,
            out,
            grid,
        } => {
            let m = generate::generate_maze(n, fill, seed)?;
            let inst = generate::maze_to_instance(&m);
            if let Some(g) = grid {
                fs::write(&g, m.to_text()).with_context(|| format!("writing {}", g.display()))?;
            }
            write_out(out.as_deref(), &emit_metis(&inst.graph))?;
            if out.is_some() {
                print_endpoints(&inst);
            }
        }
        GenerateCmd::Subgraph {
            graph,
            size,
            seed,
            out,
        } => {
            let g = read_graph(&graph)?;
            let inst = generate::extract_bfs_subgraph(&g, size, seed)?;
            write_out(out.as_deref(), &emit_metis(&inst.graph))?;
            if out.is_some() {
                print_endpoints(&inst);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn partition_cmd(args: PartitionArgs) -> Result<ExitCode> {
    let g = read_graph(&args.graph)?;
    let k = args.k.unwrap_or_else(|| partition::default_k(g.vertex_count()));
    let (p, _) = partition::partition_hier(&g, k, args.imbalance, args.seed)?;
    write_out(args.out.as_deref(), &partition::emit_partition(&p))?;
    eprintln!(
        "k {} cut {} max block {} (limit {})",
        p.k,
        partition::cut_weight(&g, &p),
        p.max_block_size(),
        partition::max_block_size(g.vertex_count(), p.k, p.epsilon)
    );
    Ok(ExitCode::SUCCESS)
}

fn format_solution(sol: &Solution) -> String {
    let ids: Vec<String> = sol.path.iter().map(|v| (v + 1).to_string()).collect();
    let weight = if sol.status == Status::Solved {
        sol.weight.to_string()
    } else {
        "-".to_string()
    };
    format!("status {}\nweight {}\n{}\n", sol.status, weight, ids.join(" "))
}

fn solve_cmd(args: SolveArgs) -> Result<ExitCode> {
    let inst = args.input.load()?;
    let limit = args.time_limit.map(Duration::from_secs_f64);
    let sol = match args.solver {
        SolverName::Exhdfs => exhaustive_dfs(&inst, limit),
        SolverName::Lpdp => {
            let cfg = args.lpdp.config();
            let part = match &args.partition_file {
                Some(path) => {
                    let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                    Some(load_partition(&text, &inst.graph, cfg.imbalance, args.allow_imbalance)?)
                }
                None => None,
            };
            solver::solve(&inst, &cfg, part.as_ref(), limit)?
        }
    };
    write_out(args.out.as_deref(), format_solution(&sol).as_bytes())?;
    eprintln!("elapsed {:.6}s", sol.elapsed.as_secs_f64());
    Ok(match sol.status {
        Status::Solved => ExitCode::SUCCESS,
        Status::NoPath => ExitCode::from(EXIT_NO_PATH),
        Status::Timeout => ExitCode::from(EXIT_TIMEOUT),
    })
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode> {
    let inst = args.input.load()?;
    let text = fs::read_to_string(&args.path_file)
        .with_context(|| format!("reading {}", args.path_file.display()))?;
    let mut claimed = None;
    let mut ids_line = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(w) = line.strip_prefix("weight ") {
            claimed = w.trim().parse::<u64>().ok();
        } else if !line.is_empty() && !line.starts_with("status") {
            ids_line = Some(line);
        }
    }
    let mut path = Vec::new();
    for tok in ids_line.unwrap_or("").split_whitespace() {
        let id: usize = tok.parse().with_context(|| format!("bad vertex id '{tok}'"))?;
        if id == 0 {
            bail!("vertex ids are 1-based");
        }
        path.push(id - 1);
    }
    let v = validate_path(&inst.graph, &path, inst.source, inst.target);
    if !v.valid {
        println!("invalid {:?}", v.failure.expect("invalid verdicts carry a reason"));
        return Ok(ExitCode::FAILURE);
    }
    if let Some(w) = claimed.filter(|&w| w != v.weight) {
        println!("invalid weight: claimed {w}, actual {}", v.weight);
        return Ok(ExitCode::FAILURE);
    }
    println!("valid weight {}", v.weight);
    Ok(ExitCode::SUCCESS)
}

fn load_records(path: &Path) -> Result<Vec<bench::RunRecord>> {
    let bytes = bench::read(path)?;
    Ok(bench::median_records(&bench::read_csv(&bytes)?))
}

fn bench_cmd(cmd: BenchCmd) -> Result<ExitCode> {
    match cmd {
        BenchCmd::Run {
            mut instances,
            instance_list,
            solvers,
            time_limit,
            repetitions,
            jobs,
            lpdp,
            out,
        } => {
            if let Some(list) = instance_list {
                let text = fs::read_to_string(&list).with_context(|| format!("reading {}", list.display()))?;
                instances.extend(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(String::from),
                );
            }
            if instances.is_empty() {
                bail!(UsageError("no instances given".into()));
            }
            if time_limit <= 0.0 {
                bail!(UsageError("--time-limit must be positive".into()));
            }
            let cfg = lpdp.config();
            let solvers = solvers
                .iter()
                .map(|s| SolverSpec::parse(s, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let loaded = instances
                .iter()
                .map(|spec| Ok((spec.clone(), InstanceSpec::parse(spec)?.load()?)))
                .collect::<Result<Vec<_>>>()?;
            let spec = SuiteSpec {
                instances: loaded,
                solvers,
                time_limit: Duration::from_secs_f64(time_limit),
                repetitions,
                jobs,
            };
            let records = bench::run_suite(&spec);
            fs::write(&out, bench::write_csv(&records)?).with_context(|| format!("writing {}", out.display()))?;
            for r in &records {
                eprintln!("{} {} {:?} {:.3}s", r.instance, r.solver, r.status, r.seconds);
            }
            let errors = records.iter().filter(|r| r.status == RunStatus::Error).count();
            if errors > 0 {
                eprintln!("{errors} runs ended in an error");
            }
        }
        BenchCmd::Cactus { csv, solver } => {
            println!("rank,seconds");
            for (rank, t) in bench::cactus_data(&load_records(&csv)?, &solver) {
                println!("{rank},{t}");
            }
        }
        BenchCmd::Scatter {
            csv,
            a,
            b,
            time_limit,
        } => {
            println!("instance,{a},{b},{a}_rail,{b}_rail");
            for p in bench::scatter_data(&load_records(&csv)?, &a, &b, time_limit) {
                println!("{},{},{},{},{}", p.instance, p.a, p.b, p.a_rail, p.b_rail);
            }
        }
        BenchCmd::Speedup {
            csv,
            baseline,
            subject,
        } => {
            let r = bench::speedup_report(&load_records(&csv)?, &baseline, &subject)?;
            println!("instance,speedup");
            for (id, ratio) in &r.ratios {
                println!("{id},{ratio}");
            }
            println!("arithmetic mean {:.4}", r.arithmetic_mean);
            println!("geometric mean {:.4}", r.geometric_mean);
        }
        BenchCmd::Plot {
            csv,
            out_dir,
            time_limit,
        } => {
            let records = load_records(&csv)?;
            let mut names: Vec<String> = records.iter().map(|r| r.solver.clone()).collect();
            names.sort();
            names.dedup();
            let series: Vec<(String, Vec<(usize, f64)>)> = names
                .iter()
                .map(|n| (n.clone(), bench::cactus_data(&records, n)))
                .collect();
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("cactus.svg"), bench::cactus_svg(&series)?)?;
            if let [a, b, ..] = names.as_slice() {
                let points = bench::scatter_data(&records, a, b, time_limit);
                fs::write(out_dir.join("scatter.svg"), bench::scatter_svg(&points, a, b, time_limit)?)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
