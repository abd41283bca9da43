//! Batch driver behind the `sachi` binary.
//!
//! Every subcommand writes plain files into `--out-dir` and echoes a short
//! summary to stdout. Identical arguments give byte-identical files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::arch::{analyze, prefetch_threshold, solve_arch, ArchConfig, Design, IterationStats, TraceLevel};
use crate::cost::{
    compare, compare_csv, estimate_run, loading_cost, scale_stats, sachi_cost, BaselineParams, CompareInput,
    TechParams,
};
use crate::ising::graph::check_resolution;
use crate::ising::{load_graph, solve, store_graph, AnnealConfig, IsingGraph, SolveResult};
use crate::workloads::Benchmark;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;

/// Spins above which `solve` uses one simulated iteration to extrapolate
/// architectural statistics instead of simulating every iteration.
pub const FULL_SIM_CAP: usize = 100_000;

#[derive(Parser, Debug)]
#[command(name = "sachi", version, about = "Near-memory Ising machine simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance and write its per-iteration trace.
    Solve(SolveArgs),
    /// CPI, reuse and energy over a grid of sizes, resolutions and designs.
    Sweep(SweepArgs),
    /// Every design against the baseline machines.
    Compare(CompareArgs),
    /// Write a benchmark instance as a graph file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BenchArg {
    Assets,
    Image,
    Tsp,
    Molecular,
    File,
}

impl BenchArg {
    fn benchmark(self) -> Option<Benchmark> {
        match self {
            BenchArg::Assets => Some(Benchmark::Assets),
            BenchArg::Image => Some(Benchmark::Image),
            BenchArg::Tsp => Some(Benchmark::Tsp),
            BenchArg::Molecular => Some(Benchmark::Molecular),
            BenchArg::File => None,
        }
    }

    fn name(self) -> &'static str {
        self.benchmark().map_or("file", Benchmark::name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DesignArg {
    N1a,
    N1b,
    N2,
    N3,
    Reference,
}

impl DesignArg {
    fn design(self) -> Option<Design> {
        match self {
            DesignArg::N1a => Some(Design::N1a),
            DesignArg::N1b => Some(Design::N1b),
            DesignArg::N2 => Some(Design::N2),
            DesignArg::N3 => Some(Design::N3),
            DesignArg::Reference => None,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "molecular")]
    benchmark: BenchArg,
    /// Graph file, for `--benchmark file`.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    spins: usize,
    #[arg(long, default_value_t = 4)]
    r: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct MachineArgs {
    #[arg(long)]
    tiles: Option<usize>,
    #[arg(long)]
    tile_rows: Option<usize>,
    #[arg(long)]
    cycle_ns: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct LoadingArgs {
    /// Include the one-time DRAM load.
    #[arg(long, overrides_with = "no_loading")]
    with_loading: bool,
    #[arg(long, overrides_with = "with_loading")]
    no_loading: bool,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "n3")]
    design: DesignArg,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    init_temp: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[command(flatten)]
    machine: MachineArgs,
    #[command(flatten)]
    loading: LoadingArgs,
    /// Also write the cycle-level schedule of the first iteration.
    #[arg(long)]
    full_trace: bool,
    /// Simulate every iteration even above the size cap.
    #[arg(long)]
    force_full: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// key=value file; flags on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "molecular")]
    benchmark: BenchArg,
    #[arg(long, value_delimiter = ',', default_values_t = [100, 1000, 10000])]
    spins: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8])]
    r: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["n1a", "n1b", "n2", "n3"])]
    design: Vec<DesignArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iterations the energy and time columns are scaled to.
    #[arg(long, default_value_t = 100)]
    iters: u64,
    #[command(flatten)]
    machine: MachineArgs,
    #[command(flatten)]
    loading: LoadingArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    /// Simulated iterations the run is extrapolated from.
    #[arg(long, default_value_t = 2)]
    sample_iters: u64,
    #[arg(long)]
    init_temp: Option<f64>,
    #[command(flatten)]
    machine: MachineArgs,
    #[command(flatten)]
    loading: LoadingArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `args` (without the program name). Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.0);
            return EXIT_ERROR;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("sachi")).chain(args)) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_CONVERGED;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.0);
            EXIT_ERROR
        }
    }
}

/// Expands `--config FILE` into flags placed right after the subcommand, so
/// any flag given on the command line comes later and wins.
fn splice_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| CliError("--config needs a path".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("reading {}: {e}", Path::new(path).display())))?;
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => flags.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                flags.push(OsString::from(format!("--{key}")));
                flags.push(OsString::from(value));
            }
        }
    }
    let mut rest = args;
    rest.drain(pos..pos + 2);
    let mut out = Vec::with_capacity(rest.len() + flags.len());
    let mut it = rest.into_iter();
    if let Some(sub) = it.next() {
        out.push(sub);
    }
    out.extend(flags);
    out.extend(it);
    Ok(out)
}

fn arch_config(m: &MachineArgs) -> ArchConfig {
    let mut cfg = ArchConfig::default();
    if let Some(t) = m.tiles {
        cfg.tiles = t;
    }
    if let Some(r) = m.tile_rows {
        cfg.tile_rows = r;
    }
    if let Some(ns) = m.cycle_ns {
        cfg.prefetch_threshold = prefetch_threshold(20.0, 100.0, ns);
    }
    cfg
}

fn tech_params(m: &MachineArgs) -> CliResult<TechParams> {
    let mut tech = TechParams::default();
    if let Some(ns) = m.cycle_ns {
        if !(ns > 0.0 && ns.is_finite()) {
            return Err(CliError(format!("--cycle-ns must be positive, got {ns}")));
        }
        tech.cycle_time_s = ns * 1e-9;
    }
    Ok(tech)
}

fn build_graph(p: &ProblemArgs) -> CliResult<IsingGraph> {
    let mut g = match p.benchmark.benchmark() {
        Some(b) => b.generate(p.spins, p.r, p.seed)?,
        None => {
            let path = p
                .graph
                .as_ref()
                .ok_or_else(|| CliError("--benchmark file needs --graph".into()))?;
            load_graph(path)?
        }
    };
    check_resolution(g.resolution())?;
    g.randomize_spins(p.seed.wrapping_add(1000));
    Ok(g)
}

fn anneal_config(g: &IsingGraph, seed: u64, iters: Option<usize>, temp: Option<f64>, window: Option<usize>) -> CliResult<AnnealConfig> {
    let mut cfg = AnnealConfig::for_graph(g, seed);
    if let Some(i) = iters {
        cfg.max_iterations = i;
    }
    if let Some(t) = temp {
        cfg.init_temp = t;
    }
    if let Some(w) = window {
        cfg.convergence_window = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.6e}")
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    benchmark: &'a str,
    design: &'a str,
    spins: usize,
    edges: usize,
    resolution: u32,
    seed: u64,
    init_temp: f64,
    iterations: usize,
    converged: bool,
    initial_hamiltonian: i64,
    final_hamiltonian: i64,
    best_hamiltonian: i64,
    last_hamiltonian: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    arch: Option<ArchSummary>,
}

#[derive(Serialize)]
struct ArchSummary {
    cpi: f64,
    cycles: u64,
    time_s: f64,
    energy_j: f64,
    reuse: f64,
    rounds: u64,
    loading_cycles: u64,
    extrapolated: bool,
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult<i32> {
    let g = build_graph(&a.problem)?;
    let anneal = anneal_config(&g, a.problem.seed, a.iters, a.init_temp, a.window)?;
    let arch_cfg = arch_config(&a.machine);
    let tech = tech_params(&a.machine)?;
    let with_loading = a.loading.with_loading && !a.loading.no_loading;
    let load = loading_cost(&g, &tech, arch_cfg.storage_bytes);

    let mut csv = String::from("iteration,H,flips,cpi,cumulative_energy\n");
    let (result, arch): (SolveResult, Option<ArchSummary>) = match a.design.design() {
        None => {
            let r = solve(&g, &anneal)?;
            for (k, (h, f)) in r.hamiltonian_trace.iter().zip(&r.spin_flips).enumerate() {
                let _ = writeln!(csv, "{},{},{},,", k + 1, h, f);
            }
            (r, None)
        }
        Some(design) if g.num_spins() > FULL_SIM_CAP && !a.force_full => {
            let r = solve(&g, &anneal)?;
            let per_iter = analyze(&g, design, arch_cfg.clone())?.totals;
            let iter_cost = sachi_cost(&per_iter, &tech, None).total_energy;
            let mut energy = if with_loading { load.energy } else { 0.0 };
            for (k, (h, f)) in r.hamiltonian_trace.iter().zip(&r.spin_flips).enumerate() {
                energy += iter_cost;
                let _ = writeln!(csv, "{},{},{},{},{}", k + 1, h, f, per_iter.cycles, fmt_f(energy));
            }
            let n = r.iterations_run as u64;
            let total = scale_stats(&per_iter, n, 1);
            let rep = sachi_cost(&IterationStats { drain_cycles: per_iter.drain_cycles, ..total }, &tech, with_loading.then_some(&load));
            let summary = ArchSummary {
                cpi: per_iter.cycles as f64,
                cycles: rep.cycles,
                time_s: rep.execution_time,
                energy_j: rep.total_energy,
                reuse: per_iter.reuse(),
                rounds: per_iter.rounds,
                loading_cycles: if with_loading { load.cycles } else { 0 },
                extrapolated: true,
            };
            (r, Some(summary))
        }
        Some(design) => {
            let cfg = ArchConfig {
                trace: if a.full_trace { TraceLevel::Full } else { TraceLevel::Summary },
                ..arch_cfg.clone()
            };
            if a.full_trace {
                let t = analyze(&g, design, cfg.clone())?;
                write_file(&a.out_dir, "schedule.csv", &t.to_csv())?;
            }
            let s = solve_arch(&g, design, ArchConfig { trace: TraceLevel::Summary, ..cfg }, &anneal)?;
            let mut energy = if with_loading { load.energy } else { 0.0 };
            let mut total = IterationStats::default();
            for (k, st) in s.iterations.iter().enumerate() {
                energy += sachi_cost(&IterationStats { drain_cycles: 0, ..*st }, &tech, None).total_energy;
                total += *st;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    k + 1,
                    s.result.hamiltonian_trace[k],
                    s.result.spin_flips[k],
                    st.cycles,
                    fmt_f(energy)
                );
            }
            if let Some(last) = s.iterations.last() {
                total.drain_cycles = last.drain_cycles;
            }
            let rep = sachi_cost(&total, &tech, with_loading.then_some(&load));
            let n = s.iterations.len().max(1) as f64;
            let summary = ArchSummary {
                cpi: total.cycles as f64 / n,
                cycles: rep.cycles,
                time_s: rep.execution_time,
                energy_j: rep.total_energy,
                reuse: total.reuse(),
                rounds: s.rounds as u64,
                loading_cycles: if with_loading { load.cycles } else { 0 },
                extrapolated: false,
            };
            (s.result, Some(summary))
        }
    };

    let design_name = match a.design.design() {
        Some(d) => d.name(),
        None => "reference",
    };
    let summary = SolveSummary {
        benchmark: a.problem.benchmark.name(),
        design: design_name,
        spins: g.num_spins(),
        edges: g.num_edges(),
        resolution: g.resolution(),
        seed: a.problem.seed,
        init_temp: anneal.init_temp,
        iterations: result.iterations_run,
        converged: result.converged,
        initial_hamiltonian: result.initial_hamiltonian,
        final_hamiltonian: result.final_hamiltonian,
        best_hamiltonian: result.best_hamiltonian,
        last_hamiltonian: result.last_hamiltonian,
        arch,
    };
    let json = serde_json::to_string_pretty(&summary)? + "\n";
    write_file(&a.out_dir, "solve.csv", &csv)?;
    write_file(&a.out_dir, "summary.json", &json)?;
    out.write_all(json.as_bytes())?;
    Ok(if result.converged { EXIT_CONVERGED } else { EXIT_BUDGET })
}


pub const SWEEP_HEADER: &str = "design,benchmark,spins,R,cpi,reuse,energy_J,iterations,time_s,status";

fn sweep_point(
    bench: Benchmark,
    spins: usize,
    r: u32,
    design: Design,
    seed: u64,
    iters: u64,
    arch: &ArchConfig,
    tech: &TechParams,
    with_loading: bool,
) -> CliResult<(u64, f64, f64, f64)> {
    let mut g = bench.generate(spins, r, seed)?;
    g.randomize_spins(seed.wrapping_add(1000));
    let cpi_trace = analyze(&g, design, arch.clone())?;
    let anneal = AnnealConfig::for_graph(&g, seed);
    let stats = estimate_run(&g, design, arch.clone(), &anneal, 2, iters)?;
    let load = loading_cost(&g, tech, arch.storage_bytes);
    let rep = sachi_cost(&stats, tech, with_loading.then_some(&load));
    Ok((cpi_trace.totals.cycles, cpi_trace.reuse_factor(), rep.total_energy, rep.execution_time))
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult<i32> {
    let bench = a
        .benchmark
        .benchmark()
        .ok_or_else(|| CliError("sweep needs a generated benchmark".into()))?;
    let mut designs = Vec::new();
    for d in &a.design {
        designs.push(d.design().ok_or_else(|| CliError("sweep runs architectural designs only".into()))?);
    }
    for &r in &a.r {
        check_resolution(r)?;
    }
    let arch = arch_config(&a.machine);
    let tech = tech_params(&a.machine)?;
    let with_loading = a.loading.with_loading && !a.loading.no_loading;
    let mut points = Vec::new();
    for &spins in &a.spins {
        for &r in &a.r {
            for &d in &designs {
                points.push((spins, r, d));
            }
        }
    }
    let rows: Vec<String> = points
        .par_iter()
        .map(|&(spins, r, d)| {
            match sweep_point(bench, spins, r, d, a.seed, a.iters, &arch, &tech, with_loading) {
                Ok((cpi, reuse, energy, time)) => format!(
                    "{},{},{},{},{},{:.3},{},{},{},ok",
                    d.name(),
                    bench.name(),
                    spins,
                    r,
                    cpi,
                    reuse,
                    fmt_f(energy),
                    a.iters,
                    fmt_f(time)
                ),
                Err(e) => format!(
                    "{},{},{},{},,,,{},,\"error: {}\"",
                    d.name(),
                    bench.name(),
                    spins,
                    r,
                    a.iters,
                    e.0.replace('"', "'")
                ),
            }
        })
        .collect();
    let mut csv = format!("{SWEEP_HEADER}\n");
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    write_file(&a.out_dir, "sweep.csv", &csv)?;
    out.write_all(csv.as_bytes())?;
    Ok(EXIT_CONVERGED)
}

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> CliResult<i32> {
    let g = build_graph(&a.problem)?;
    let seed = a.problem.seed;
    let anneal = anneal_config(&g, seed, None, a.init_temp, None)?;
    let input = CompareInput {
        graph: &g,
        benchmark: a.problem.benchmark.name(),
        iterations: a.iters,
        sample_iterations: a.sample_iters,
        arch: arch_config(&a.machine),
        anneal,
        tech: tech_params(&a.machine)?,
        baselines: BaselineParams::default(),
    };
    let mut rows = compare(&input)?;
    if a.loading.with_loading {
        rows.retain(|r| r.loading);
    } else if a.loading.no_loading {
        rows.retain(|r| !r.loading);
    }
    let csv = compare_csv(&rows);
    write_file(&a.out_dir, "compare.csv", &csv)?;
    out.write_all(csv.as_bytes())?;
    Ok(EXIT_CONVERGED)
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CliResult<i32> {
    let p = &a.problem;
    let bench = p
        .benchmark
        .benchmark()
        .ok_or_else(|| CliError("gen needs a generated benchmark".into()))?;
    let g = bench.generate(p.spins, p.r, p.seed)?;
    fs::create_dir_all(&a.out_dir)?;
    let path = a
        .out_dir
        .join(format!("{}_{}_r{}_s{}.ising", bench.name(), p.spins, p.r, p.seed));
    store_graph(&g, &path)?;
    writeln!(out, "{}", path.display())?;
    Ok(EXIT_CONVERGED)
}
