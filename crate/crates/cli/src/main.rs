use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use rosdyn::analysis::{bistability_scan_from, classify_orbit, lambda_sweep, random_projection, random_starts, OrbitSettings};
use rosdyn::builders::{build_coupled, build_cycle, build_repressilator, CouplingSpec, RepressionGraph};
use rosdyn::circuit::{build_clock, compile_network, default_gate_params, BooleanNetwork, CircuitMode};
use rosdyn::export::{read_trajectory_csv, write_orbit_svg, write_trajectory_csv};
use rosdyn::linear::{simulate_linear, EmbeddingMode, LinearSystem};
use rosdyn::seed::derive_seed;
use rosdyn::{fundamental_identity_residual, integrate, save_instance, Method, Settings, Trajectory};

mod gallery;
mod source;

use source::{parse_list, parse_matrix, resolve, Source};

/// Simulate and compile return-over-spend autobidding dynamics.
#[derive(Parser)]
#[command(name = "rosdyn", version)]
struct Cli {
    /// Global seed; each random operation derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an instance and write the trajectory.
    Simulate(SimulateArgs),
    /// Build a repressilator instance from a graph, a cycle or a coupling preset.
    BuildRepressilator(BuildArgs),
    /// Compile dx/dt = Ax into an instance and write the predicted trajectory.
    CompileLinear(LinearArgs),
    /// Compile a NOR network into an instance.
    CompileCircuit(CircuitArgs),
    /// Classify a trajectory CSV.
    Analyze(AnalyzeArgs),
    /// Sweep the auction's lambda and report whether the dynamics settle.
    SweepLambda(SweepArgs),
    /// Integrate from many starts and cluster the equilibria reached.
    ScanBistability(ScanArgs),
    /// Run every standard scenario into an output directory.
    Gallery(GalleryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rkf45,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simplified,
    Full,
}

impl From<ModeArg> for CircuitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Simplified => CircuitMode::Simplified,
            ModeArg::Full => CircuitMode::Full,
        }
    }
}

/// Instance selection shared by the commands that integrate.
#[derive(Args)]
struct InstanceArgs {
    /// JSON file, or cycle:<n>, coupling:<A|B|two-cycles>, circle, three-nor,
    /// clock:<n>, circuit:<network file>.
    #[arg(long)]
    instance: String,
    /// Sharpness of repressilator items.
    #[arg(long, default_value_t = 7)]
    c: u32,
    /// Circuit compilation mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Overrides the instance's lambda.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    method: MethodArg,
    #[arg(long)]
    sample_every: Option<f64>,
}

impl RunArgs {
    fn settings(&self, horizon: f64, dt: f64, sample_every: f64) -> Settings {
        let method = match self.method {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Rkf45 => Method::rkf45(),
        };
        Settings::new(self.horizon.unwrap_or(horizon))
            .dt(self.dt.unwrap_or(dt))
            .sample_every(self.sample_every.unwrap_or(sample_every))
            .method(method)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Comma list, or random:<seed>.
    #[arg(long)]
    m0: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write orbit.svg.
    #[arg(long)]
    svg: bool,
    /// Bidder indices to plot, e.g. 0,1; a random projection otherwise.
    #[arg(long)]
    plot: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "graph_source")]
struct GraphSource {
    /// Edge list, one `a b` pair per line, nodes numbered from 1.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    cycle: Option<usize>,
    /// coupling-A, coupling-B or two-cycles.
    #[arg(long)]
    coupling: Option<String>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value_t = 7)]
    c: u32,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct LinearArgs {
    /// File with one row per line, or inline rows separated by ';'.
    #[arg(long)]
    matrix: String,
    #[arg(long)]
    x0: String,
    #[arg(long)]
    horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    sample_every: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "network_source")]
struct NetworkSource {
    /// Lines `X = NOR(A, B)` or `X = NOT(A)`.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Odd NOT cycle of this length.
    #[arg(long)]
    clock: Option<usize>,
}

#[derive(Args)]
struct CircuitArgs {
    #[command(flatten)]
    source: NetworkSource,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trajectory CSV written by `simulate`.
    trajectory: PathBuf,
    /// Directory for report.txt; the report is printed either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "coupling:A")]
    instance: String,
    #[arg(long, default_value_t = 7)]
    c: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    #[arg(long, default_value = "0,0.5,0.7,0.8,0.85,0.9,0.95,1")]
    grid: String,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    m0: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value = "cycle:4")]
    instance: String,
    #[arg(long, default_value_t = 7)]
    c: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Start box `lo,hi`; circuits use their own box when omitted.
    #[arg(long = "box")]
    box_: Option<String>,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GalleryArgs {
    #[arg(long, default_value = "gallery")]
    out: PathBuf,
    /// Shorter horizons, for smoke tests.
    #[arg(long)]
    quick: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(a) => simulate(a, cli.seed),
        Command::BuildRepressilator(a) => build(a),
        Command::CompileLinear(a) => compile_linear(a),
        Command::CompileCircuit(a) => compile_circuit(a),
        Command::Analyze(a) => analyze(a),
        Command::SweepLambda(a) => sweep(a, cli.seed),
        Command::ScanBistability(a) => scan(a, cli.seed),
        Command::Gallery(a) => gallery::run(&a.out, cli.seed, if a.quick { 0.1 } else { 1.0 }),
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn check_lambda(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        bail!("--lambda must lie in [0, 1], got {lambda}");
    }
    Ok(lambda)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn simulate(a: SimulateArgs, seed: u64) -> Result<()> {
    let mut r = resolve(&Source::parse(&a.instance.instance)?, a.instance.c, a.instance.mode.into())?;
    if let Some(l) = a.instance.lambda {
        r.instance.lambda = check_lambda(l)?;
    }
    let m0 = r.start(a.m0.as_deref(), seed, "simulate.m0")?;
    let settings = a.run.settings(100.0, 0.01, 0.1);
    let traj = integrate(&r.instance, &m0, &settings)?;
    out_dir(&a.out)?;
    let csv = a.out.join("trajectory.csv");
    write_trajectory_csv(&traj, &csv)?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    println!("bidders: {}", traj.dim());
    println!("rows: {}", traj.len());
    if let Some(res) = fundamental_identity_residual(&traj) {
        println!("identity_residual: {:e}", max_abs(&res));
    }
    println!("wrote {}", csv.display());
    if a.svg || a.plot.is_some() {
        let path = plot_path(&traj, a.plot.as_deref(), derive_seed(seed, "simulate.projection"))?;
        let svg = a.out.join("orbit.svg");
        write_orbit_svg(&path, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn plot_path(traj: &Trajectory, plot: Option<&str>, seed: u64) -> Result<Vec<[f64; 2]>> {
    let coords = match plot {
        Some(s) => {
            let ix: Vec<usize> = s
                .split(',')
                .map(|x| x.trim().parse::<usize>().with_context(|| format!("--plot: '{x}' is not an index")))
                .collect::<Result<_>>()?;
            match ix[..] {
                [i, j] if i < traj.dim() && j < traj.dim() => Some((i, j)),
                _ => bail!("--plot needs two bidder indices below {}", traj.dim()),
            }
        }
        None if traj.dim() == 2 => Some((0, 1)),
        None => None,
    };
    Ok(match coords {
        Some((i, j)) => traj.states.iter().map(|s| [s[i], s[j]]).collect(),
        None => random_projection(traj, seed),
    })
}

fn build(a: BuildArgs) -> Result<()> {
    let s = &a.source;
    let mut inst = if let Some(path) = &s.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let g = RepressionGraph::parse_edge_list(&text, a.c).with_context(|| format!("parsing {}", path.display()))?;
        build_repressilator(&g)?
    } else if let Some(n) = s.cycle {
        build_cycle(n, a.c)?
    } else if let Some(name) = &s.coupling {
        build_coupled(&CouplingSpec::preset(name)?, a.c)?
    } else {
        unreachable!("clap requires one graph source")
    };
    if let Some(l) = a.lambda {
        inst.lambda = check_lambda(l)?;
    }
    out_dir(&a.out)?;
    let path = a.out.join("instance.json");
    save_instance(&inst, &path)?;
    println!("bidders: {}", inst.n_bidders());
    println!("items: {}", inst.items.len());
    println!("wrote {}", path.display());
    Ok(())
}

fn compile_linear(a: LinearArgs) -> Result<()> {
    let text = if Path::new(&a.matrix).is_file() {
        fs::read_to_string(&a.matrix).with_context(|| format!("reading {}", a.matrix))?
    } else {
        a.matrix.clone()
    };
    let rows = parse_matrix(&text).with_context(|| format!("--matrix {}", a.matrix))?;
    let n = rows.len();
    let sys = LinearSystem {
        a: DMatrix::from_row_iterator(n, n, rows.into_iter().flatten()),
        x0: parse_list(&a.x0).context("--x0")?,
        horizon: a.horizon,
    };
    let sim = simulate_linear(&sys, &EmbeddingMode::Numeric)?;
    out_dir(&a.out)?;
    let inst_path = a.out.join("instance.json");
    save_instance(&sim.instance, &inst_path)?;
    let pred = a.out.join("predicted.csv");
    write_trajectory_csv(&sim.predicted_trajectory(a.sample_every), &pred)?;
    println!("bidders: {}", sim.instance.n_bidders());
    println!("items: {}", sim.instance.items.len());
    println!("intertwining_residual: {:e}", sim.embedding.residual(&sys.a));
    println!("m0: {}", join(&sim.m0));
    println!("wrote {}", inst_path.display());
    println!("wrote {}", pred.display());
    Ok(())
}

fn compile_circuit(a: CircuitArgs) -> Result<()> {
    let params = default_gate_params();
    let mode: CircuitMode = a.mode.into();
    let c = if let Some(path) = &a.source.network {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let net = BooleanNetwork::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        compile_network(&net, &params, mode)?
    } else if let Some(n) = a.source.clock {
        build_clock(n, &params, mode)?
    } else {
        unreachable!("clap requires one network source")
    };
    out_dir(&a.out)?;
    let path = a.out.join("instance.json");
    save_instance(&c.instance, &path)?;
    let names = |ix: &mut dyn Iterator<Item = usize>| ix.map(|b| c.instance.bidders[b].clone()).collect::<Vec<_>>().join(",");
    println!("bidders: {}", c.instance.n_bidders());
    println!("items: {}", c.instance.items.len());
    println!("variables: {}", names(&mut c.variables.iter().copied()));
    if !c.aux.is_empty() {
        println!("auxiliary: {} (rest at 1)", c.aux.len());
    }
    // Every variable low, auxiliaries at rest: a valid --m0 for simulate.
    println!("m0: {}", join(&c.state(&vec![c.params.low; c.variables.len()])));
    println!("wrote {}", path.display());
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let traj = read_trajectory_csv(&a.trajectory)?;
    if traj.len() < 2 {
        bail!("{}: need at least two samples", a.trajectory.display());
    }
    let class = classify_orbit(&traj, &OrbitSettings::default());
    let mut report = format!("samples: {}\n{class}", traj.len());
    if let Some(res) = fundamental_identity_residual(&traj) {
        report.push_str(&format!("identity_residual: {:e}\n", max_abs(&res)));
    }
    print!("{report}");
    if let Some(dir) = &a.out {
        out_dir(dir)?;
        let path = dir.join("report.txt");
        fs::write(&path, &report).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sweep(a: SweepArgs, seed: u64) -> Result<()> {
    let source = Source::parse(&a.instance)?;
    let base = resolve(&source, a.c, a.mode.into())?;
    let grid = parse_list(&a.grid).context("--grid")?;
    let m0 = base.start(a.m0.as_deref(), seed, "sweep-lambda.m0")?;
    let settings = a.run.settings(300.0, 0.01, 0.05);
    let rows = lambda_sweep(|l| Ok(base.instance.clone().with_lambda(l)), &grid, &m0, &settings, 0.5)?;
    out_dir(&a.out)?;
    let path = a.out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["lambda", "min", "max", "width", "converged"])?;
    for r in &rows {
        w.write_record([r.lambda.to_string(), r.min.to_string(), r.max.to_string(), r.width().to_string(), r.converged.to_string()])?;
        println!("lambda {}: width {:e}, converged {}", r.lambda, r.width(), r.converged);
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn scan(a: ScanArgs, seed: u64) -> Result<()> {
    if a.count == 0 {
        bail!("--count must be positive");
    }
    let mut r = resolve(&Source::parse(&a.instance)?, a.c, a.mode.into())?;
    if let Some(l) = a.lambda {
        r.instance.lambda = check_lambda(l)?;
    }
    let starts: Vec<Vec<f64>> = match &a.box_ {
        Some(b) => {
            let v = parse_list(b).context("--box")?;
            let [lo, hi] = v[..] else { bail!("--box needs lo,hi") };
            if !(lo < hi) {
                bail!("--box: lo must be below hi");
            }
            random_starts(r.instance.n_bidders(), a.count, lo, hi, derive_seed(seed, "scan-bistability"))
        }
        None => (0..a.count as u64)
            .map(|k| r.random_start(derive_seed(seed, &format!("scan-bistability.{k}"))))
            .collect(),
    };
    let settings = a.run.settings(200.0, 0.01, 0.05);
    let report = bistability_scan_from(&r.instance, &starts, &settings, 1e-6, 10.0)?;
    out_dir(&a.out)?;
    let path = a.out.join("clusters.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["count".to_string()];
    header.extend(r.instance.bidders.iter().map(|b| format!("m_{b}")));
    w.write_record(&header)?;
    for c in &report.clusters {
        let mut row = vec![c.count.to_string()];
        row.extend(c.point.iter().map(f64::to_string));
        w.write_record(&row)?;
        println!("{} starts -> {}", c.count, join(&c.point));
    }
    w.flush()?;
    println!("clusters: {}", report.clusters.len());
    println!("unconverged: {}", report.unconverged);
    println!("wrote {}", path.display());
    Ok(())
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}
