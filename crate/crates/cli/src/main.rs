//! `covloc`: solvers for minmax-regret maximal covering location on
//! networks with edge demand. Machine output is JSON/CSV/TSV; the human
//! summary goes to standard output. Exit codes: 0 ok, 1 internal error,
//! 2 invalid input.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use covloc_core::baselines;
use covloc_core::bench::{self, ExperimentConfig};
use covloc_core::breakpoints;
use covloc_core::constant;
use covloc_core::coverage::CoverageTables;
use covloc_core::instance::{DemandBounds, DemandModel, Instance, SolutionOut};
use covloc_core::linear::{self, LinearCtx};
use covloc_core::oracle;
use covloc_core::{Network, PointOnEdge};

#[derive(Parser)]
#[command(name = "covloc", version, about = "Minmax-regret maximal covering location on networks")]
struct Cli {
    /// Worker threads for the parallel solver loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Constant,
    Linear,
}

impl From<ModelArg> for DemandModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Constant => DemandModel::Constant,
            ModelArg::Linear => DemandModel::Linear,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMode {
    NodeRestricted,
    Deterministic,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpWhat {
    /// Partition points (deduplicated nodes plus interior points).
    Pp,
    /// Per-edge counts of partition and identical coverage points.
    Ppcounts,
    /// Constant-demand regret envelope of one edge (plot-ready TSV).
    Envelope,
    /// Cell subdivision of one edge pair under linear demand (TSV).
    Cells,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Tsv,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (canonical JSON format).
    #[arg(long)]
    instance: PathBuf,
    /// Override the instance's demand model.
    #[arg(long)]
    demand: Option<ModelArg>,
}

impl InstanceArgs {
    fn load(&self) -> anyhow::Result<(Instance, Network, f64, DemandBounds)> {
        let text = std::fs::read_to_string(&self.instance)
            .with_context(|| format!("reading {}", self.instance.display()))?;
        let mut inst = Instance::from_json(&text)?;
        if let Some(model) = self.demand {
            inst.demand_model = model.into();
        }
        let (net, r, bounds) = inst.parts()?;
        Ok((inst, net, r, bounds))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the minmax-regret location problem.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Parameter-space tolerance of the linear solver.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Write the solution JSON here ('-' for stdout, suppressing the summary).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the maximal regret of a given point.
    Eval {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Edge id of the point.
        #[arg(long)]
        edge: usize,
        /// Relative position on the edge in [0,1].
        #[arg(long)]
        t: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a comparison solver.
    Baseline {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        mode: BaselineMode,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Brute-force grid validation of the solver.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Grid points per edge.
        #[arg(long, default_value_t = 600)]
        grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        nodes: usize,
        /// Edge density as a fraction of the complete graph.
        #[arg(long)]
        density: f64,
        /// Demand bound scale UB.
        #[arg(long, default_value_t = 50.0)]
        ub: f64,
        /// Coverage radius as a fraction of the graph diameter.
        #[arg(long, default_value_t = 0.2)]
        radius_frac: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Constant)]
        demand: ModelArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Load a street-graph edge list and emit a canonical instance with
    /// randomly drawn demand bounds.
    Street {
        /// Edge-list file: one `k l length` triple per line.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value_t = 50.0)]
        ub: f64,
        #[arg(long, default_value_t = 0.2)]
        radius_frac: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the comparison experiment and emit CSV tables.
    Bench {
        /// Use the full protocol scale (n in {40,...,100}) instead of the
        /// desk-scale default (n in {10,15}).
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        replications: usize,
        /// Suppress wall-clock columns for byte-identical reruns.
        #[arg(long)]
        no_times: bool,
        /// Aggregated CSV destination (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-row CSV destination.
        #[arg(long)]
        rows: Option<PathBuf>,
    },
    /// Dump solver internals in plot-ready form.
    Dump {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum)]
        what: DumpWhat,
        /// Host edge for `envelope`.
        #[arg(long)]
        edge: Option<usize>,
        /// Facility edge for `cells`.
        #[arg(long)]
        ex: Option<usize>,
        /// Alternative edge for `cells`.
        #[arg(long)]
        ey: Option<usize>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn write_or_print(output: &Option<PathBuf>, text: &str) -> anyhow::Result<bool> {
    match output {
        Some(path) if path.as_os_str() == "-" => {
            println!("{text}");
            Ok(true)
        }
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(false)
        }
        None => Ok(false),
    }
}

fn edge_label(net: &Network, e: usize) -> String {
    let edge = net.edge(e);
    format!("[{},{}]", edge.k, edge.l)
}

fn print_solution_summary(net: &Network, model: &str, sol: &constant::RegretSolution) {
    println!("model: {model}");
    println!(
        "optimum: edge {} (id {}), t = {:.6}",
        edge_label(net, sol.optimum.edge),
        sol.optimum.edge,
        sol.optimum.t
    );
    println!("regret = {:.6}", sol.regret);
    if !sol.per_edge.is_empty() {
        println!("per-edge minima:");
        for m in &sol.per_edge {
            println!(
                "  edge {} (id {}): t = {:.6}, regret = {:.6}",
                edge_label(net, m.edge),
                m.edge,
                m.t,
                m.value
            );
        }
    }
    println!(
        "worst-case alternative: edge {} (id {}), t = {:.6}",
        edge_label(net, sol.alternative.edge),
        sol.alternative.edge,
        sol.alternative.t
    );
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Solve { inst, tol, output } => {
            let (_, net, r, bounds) = inst.load()?;
            let sol = match &bounds {
                DemandBounds::Constant(cb) => constant::solve_constant(&net, r, cb)?,
                DemandBounds::Linear(lb) => linear::solve_linear(&net, r, lb, tol)?,
            };
            let model = format!("max-regret ({} demand)", bounds.model());
            let doc = SolutionOut::from_solution(&model, &sol);
            if !write_or_print(&output, &doc.to_json())? {
                print_solution_summary(&net, &model, &sol);
            }
        }
        Command::Eval { inst, edge, t, output } => {
            let (_, net, r, bounds) = inst.load()?;
            if edge >= net.edge_count() || !(0.0..=1.0).contains(&t) {
                bail!(covloc_core::Error::input(format!(
                    "point (edge {edge}, t {t}) is not on the network"
                )));
            }
            let x = PointOnEdge::new(edge, t);
            let sol = match &bounds {
                DemandBounds::Constant(cb) => {
                    let (value, alt, w) = constant::max_regret_at(&net, r, cb, x)?;
                    constant::RegretSolution {
                        optimum: x,
                        regret: value,
                        per_edge: Vec::new(),
                        alternative: alt,
                        worst_demand: w
                            .into_iter()
                            .map(covloc_core::coverage::AffineDemand::constant)
                            .collect(),
                    }
                }
                DemandBounds::Linear(lb) => {
                    let ctx = LinearCtx::build(&net, r, lb)?;
                    let (value, alt) = linear::max_regret_at_linear_with(&ctx, x);
                    constant::RegretSolution {
                        optimum: x,
                        regret: value,
                        per_edge: Vec::new(),
                        alternative: alt,
                        worst_demand: ctx.worst_realisation(x, alt),
                    }
                }
            };
            let model = format!("eval ({} demand)", bounds.model());
            let doc = SolutionOut::from_solution(&model, &sol);
            if !write_or_print(&output, &doc.to_json())? {
                println!(
                    "r(edge {} (id {}), t = {:.6}) = {:.6}",
                    edge_label(&net, edge),
                    edge,
                    t,
                    sol.regret
                );
                println!(
                    "worst-case alternative: edge {} (id {}), t = {:.6}",
                    edge_label(&net, sol.alternative.edge),
                    sol.alternative.edge,
                    sol.alternative.t
                );
                let demands: Vec<String> = sol
                    .worst_demand
                    .iter()
                    .enumerate()
                    .map(|(e, d)| {
                        if d.b == 0.0 {
                            format!("{e}: {:.4}", d.a)
                        } else {
                            format!("{e}: {:.4}{:+.4}t", d.a, d.b)
                        }
                    })
                    .collect();
                println!("worst-case demand: {{{}}}", demands.join(", "));
            }
        }
        Command::Baseline { inst, mode, output } => {
            let (_, net, r, bounds) = inst.load()?;
            let (model, sol, covered) = match mode {
                BaselineMode::NodeRestricted => {
                    let sol = baselines::solve_node_restricted(&net, r, &bounds)?;
                    ("node-restricted".to_string(), sol, None)
                }
                BaselineMode::Deterministic => {
                    let (sol, covered) = baselines::deterministic_as_regret(&net, r, &bounds)?;
                    ("deterministic".to_string(), sol, Some(covered))
                }
            };
            let doc = SolutionOut::from_solution(&model, &sol);
            if !write_or_print(&output, &doc.to_json())? {
                print_solution_summary(&net, &model, &sol);
                if let Some(covered) = covered {
                    println!("covered demand (mean realisation) = {:.6}", covered);
                }
            }
        }
        Command::Oracle { inst, grid, tol, output } => {
            let (_, net, r, bounds) = inst.load()?;
            if grid < 2 {
                bail!(covloc_core::Error::input("--grid must be at least 2"));
            }
            let (x_hat, r_hat) = oracle::grid_optimum(&net, r, &bounds, grid)?;
            let delta = oracle::certified_gap(&net, &bounds, grid);
            let sol = match &bounds {
                DemandBounds::Constant(cb) => constant::solve_constant(&net, r, cb)?,
                DemandBounds::Linear(lb) => linear::solve_linear(&net, r, lb, tol)?,
            };
            let grid_at_opt = oracle::grid_regret(&net, r, &bounds, sol.optimum, grid)?;
            let doc = serde_json::json!({
                "grid": grid,
                "certified_gap": delta,
                "grid_optimum": { "edge": x_hat.edge, "t": x_hat.t },
                "grid_regret": r_hat,
                "solver_regret": sol.regret,
                "grid_regret_at_solver_optimum": grid_at_opt,
                "agreement": (r_hat - sol.regret).abs() <= delta,
            });
            let text = serde_json::to_string_pretty(&doc).expect("report serializes");
            if !write_or_print(&output, &text)? {
                println!(
                    "grid optimum: edge {} (id {}), t = {:.6}, regret = {:.9}",
                    edge_label(&net, x_hat.edge),
                    x_hat.edge,
                    x_hat.t,
                    r_hat
                );
                println!("solver regret = {:.9}", sol.regret);
                println!("certified gap delta(K) = {:.3e}", delta);
                println!(
                    "|grid - solver| = {:.3e} ({})",
                    (r_hat - sol.regret).abs(),
                    if (r_hat - sol.regret).abs() <= delta { "within gap" } else { "EXCEEDS GAP" }
                );
            }
        }
        Command::Gen { nodes, density, ub, radius_frac, seed, demand, output } => {
            let inst = match demand {
                ModelArg::Constant => bench::generate_instance(nodes, density, ub, radius_frac, seed)?,
                ModelArg::Linear => {
                    bench::generate_linear_instance(nodes, density, ub, radius_frac, seed)?
                }
            };
            let text = inst.to_json();
            if !write_or_print(&output, &text)? && output.is_none() {
                println!("{text}");
            }
        }
        Command::Street { edges, ub, radius_frac, seed, output } => {
            let text = std::fs::read_to_string(&edges)
                .with_context(|| format!("reading {}", edges.display()))?;
            let net = bench::load_street_graph(&text)?;
            let bounds = bench::attach_random_bounds(&net, ub, seed);
            let inst = Instance {
                nodes: net.node_count(),
                radius: radius_frac * net.diameter(),
                demand_model: DemandModel::Constant,
                edges: net
                    .edges()
                    .iter()
                    .zip(bounds)
                    .map(|(e, (lb, ub))| covloc_core::instance::EdgeSpec {
                        k: e.k,
                        l: e.l,
                        length: e.len,
                        lb,
                        ub,
                    })
                    .collect(),
            };
            let text = inst.to_json();
            if !write_or_print(&output, &text)? && output.is_none() {
                println!("{text}");
            }
        }
        Command::Bench { full, seed, replications, no_times, output, rows } => {
            let mut config =
                if full { ExperimentConfig::default() } else { ExperimentConfig::desk_scale() };
            config.seed = seed;
            config.replications = replications;
            config.record_times = !no_times;
            let result = bench::run_experiment(&config)?;
            let agg = bench::aggregated_csv(&result);
            if let Some(path) = rows {
                std::fs::write(&path, bench::rows_csv(&result))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !write_or_print(&output, &agg)? && output.is_none() {
                print!("{agg}");
            }
        }
        Command::Dump { inst, what, edge, ex, ey, format, output } => {
            let (_, net, r, bounds) = inst.load()?;
            let sep = match format {
                FormatArg::Tsv => "\t",
                _ => ",",
            };
            let text = match what {
                DumpWhat::Pp => {
                    let tables = CoverageTables::build(&net, r)?;
                    let mut out = format!("kind{sep}node{sep}edge{sep}t\n");
                    for &p in &tables.pp.global {
                        let e = net.edge(p.edge);
                        if p.t <= covloc_core::EPS || p.t >= 1.0 - covloc_core::EPS {
                            let node = if p.t <= covloc_core::EPS { e.k } else { e.l };
                            out.push_str(&format!("node{sep}{node}{sep}{}{sep}{:.9}\n", p.edge, p.t));
                        } else {
                            out.push_str(&format!("interior{sep}{sep}{}{sep}{:.9}\n", p.edge, p.t));
                        }
                    }
                    out
                }
                DumpWhat::Ppcounts => {
                    let tables = CoverageTables::build(&net, r)?;
                    let counts = breakpoints::edge_point_counts(&tables);
                    let mut out = format!("edge{sep}n_bp{sep}n_nip{sep}n_ep{sep}n_ic\n");
                    for (e, c) in counts.iter().enumerate() {
                        out.push_str(&format!(
                            "{e}{sep}{}{sep}{}{sep}{}{sep}{}\n",
                            c.n_bp, c.n_nip, c.n_ep, c.n_ic
                        ));
                    }
                    out
                }
                DumpWhat::Envelope => {
                    let host = edge.ok_or_else(|| {
                        covloc_core::Error::input("--edge is required for the envelope dump")
                    })?;
                    let cb = match &bounds {
                        DemandBounds::Constant(cb) => cb.clone(),
                        DemandBounds::Linear(_) => bail!(covloc_core::Error::input(
                            "envelope dump supports the constant demand model"
                        )),
                    };
                    if host >= net.edge_count() {
                        bail!(covloc_core::Error::input(format!("edge {host} out of range")));
                    }
                    let tables = CoverageTables::build(&net, r)?;
                    let env = constant::regret_envelope(&tables, &cb, host)?;
                    let mut out = format!("t_lo{sep}t_hi{sep}intercept{sep}slope{sep}label\n");
                    for p in env.pieces() {
                        let y = tables.pp.global[p.label];
                        out.push_str(&format!(
                            "{:.9}{sep}{:.9}{sep}{:.9}{sep}{:.9}{sep}y=({},{:.6})\n",
                            p.lo, p.hi, p.p, p.q, y.edge, y.t
                        ));
                    }
                    out
                }
                DumpWhat::Cells => {
                    let (e_x, e_y) = match (ex, ey) {
                        (Some(a), Some(b)) => (a, b),
                        _ => bail!(covloc_core::Error::input(
                            "--ex and --ey are required for the cells dump"
                        )),
                    };
                    if e_x >= net.edge_count() || e_y >= net.edge_count() {
                        bail!(covloc_core::Error::input("edge id out of range"));
                    }
                    let lb = bounds.as_linear();
                    let cells = linear::cell_subdivision(&net, r, &lb, e_x, e_y)?;
                    let mut out = format!(
                        "x_lo{sep}x_hi{sep}lower{sep}upper{sep}corners{sep}k0{sep}kx{sep}kxx{sep}ky{sep}kyy\n"
                    );
                    for c in &cells {
                        let corners: Vec<&str> =
                            c.corners.iter().map(|c| c.short_name()).collect();
                        out.push_str(&format!(
                            "{:.9}{sep}{:.9}{sep}{}{sep}{}{sep}{}{sep}{:.9}{sep}{:.9}{sep}{:.9}{sep}{:.9}{sep}{:.9}\n",
                            c.x_lo,
                            c.x_hi,
                            c.lower,
                            c.upper,
                            corners.join("|"),
                            c.quad.k0,
                            c.quad.kx,
                            c.quad.kxx,
                            c.quad.ky,
                            c.quad.kyy
                        ));
                    }
                    out
                }
            };
            if !write_or_print(&output, &text)? && output.is_none() {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let is_input = err
                .chain()
                .any(|c| c.downcast_ref::<covloc_core::Error>().is_some_and(|e| e.is_input()))
                || err.downcast_ref::<std::io::Error>().is_some();
            if is_input {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
