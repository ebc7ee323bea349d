use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hedonic::experiment::{plot_data, write_plot_data_csv, InstanceSize};
use hedonic::metagraph::{to_json, write_dot};
use hedonic::metrics::write_records_csv;
use hedonic::{
    build_metagraph, detect, edge_density, equilibrium_gamma_range, partition_potential, partition_robustness,
    perturb, run_grid, DynamicsConfig, Error, ExperimentGrid, Graph, Method, NodeRule, NoiseSpec, Partition,
    QueueInit, Resolution, RobustnessReport, SappmSpec, Selection, TieBreak,
};
use serde_json::json;

/// Constant Potts Model community detection as a hedonic game.
#[derive(Parser)]
#[command(name = "hedonic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted-partition graph and its ground truth.
    Generate(GenerateArgs),
    /// Run a detection method from an initial partition.
    Detect(DetectArgs),
    /// Per-node robustness report as JSON.
    Robustness(PartitionArgs),
    /// Exact range of resolutions for which a partition is an equilibrium.
    GammaRange(GammaRangeArgs),
    /// Export the metagraph of all partitions of a small graph.
    Metagraph(MetagraphArgs),
    /// Sweep an experiment grid and write one CSV row per run.
    Track(TrackArgs),
    /// Adjusted Rand index of two partition files.
    Ari(AriArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of communities.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 50)]
    n_per_community: usize,
    /// Intra-community edge probability.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Difficulty q/p.
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    /// Also write a copy of the ground truth with this fraction of labels shuffled.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes PREFIX.edges, PREFIX.truth and, with --eta, PREFIX.init.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Partition file: one community index per line, or a JSON array.
    #[arg(long)]
    partition: PathBuf,
    /// Number of community slots (at least the file's).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct GammaRangeArgs {
    #[command(flatten)]
    part: PartitionArgs,
    /// Keep the slot count as given. By default an empty slot is added when
    /// none exists, so every node may also leave to form its own community.
    #[arg(long)]
    fixed_k: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Best,
    Better,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    Queue,
    GlobalBest,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    DynamicsQueue,
    DynamicsBest,
    OnePass,
    Mirror,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::DynamicsQueue => Method::DynamicsQueue,
            MethodArg::DynamicsBest => Method::DynamicsBest,
            MethodArg::OnePass => Method::OnePass,
            MethodArg::Mirror => Method::Mirror,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    part: PartitionArgs,
    /// Resolution as b/c or a decimal; defaults to the edge density.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, value_enum, default_value = "dynamics-queue")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "best")]
    node_rule: RuleArg,
    #[arg(long, value_enum, default_value = "queue")]
    selection: SelectionArg,
    /// Shuffle the queue with the seed instead of visiting nodes in id order.
    #[arg(long)]
    shuffle: bool,
    /// Pick a random improving slot under --node-rule better.
    #[arg(long)]
    random_ties: bool,
    /// Forbid moves into empty slots.
    #[arg(long)]
    no_empty_target: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the final partition here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the applied moves as CSV here.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
}

#[derive(Args)]
struct MetagraphArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Orient edges at this resolution.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrackArgs {
    /// Comma-separated intra-community probabilities.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Comma-separated community counts.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Nodes per community.
    #[arg(long, conflicts_with = "nodes")]
    n_per_community: Option<usize>,
    /// Total nodes; each community gets floor(nodes / K).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    method: Option<Vec<MethodArg>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start from the full published grid instead of the desk-scale default.
    #[arg(long)]
    full_grid: bool,
    /// Worker threads.
    #[arg(long, env = "HEDONIC_JOBS")]
    jobs: Option<usize>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-cell means and 95% intervals here.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct AriArgs {
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    reference: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Parse { .. }
        | Error::SelfLoop { .. }
        | Error::IdOverflow { .. }
        | Error::InvalidResolution(_)
        | Error::Json(_)
        | Error::Csv(_) => 4,
        _ => 5,
    }
}

fn io_context(path: &Path, err: io::Error) -> Error {
    Error::Io(io::Error::new(err.kind(), format!("{}: {err}", path.display())))
}

fn read_text(path: &Path) -> hedonic::Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_context(path, e))
}

fn create(path: &Path) -> hedonic::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_context(path, e))
}

fn load_graph(path: &Path) -> hedonic::Result<Graph> {
    Graph::parse_edge_list(&read_text(path)?, None)
}

fn load_partition(path: &Path, graph: Option<&Graph>, k: Option<usize>) -> hedonic::Result<Partition> {
    let part = Partition::parse(&read_text(path)?)?;
    if let Some(g) = graph {
        if g.node_count() != part.node_count() {
            return Err(Error::LengthMismatch { left: g.node_count(), right: part.node_count() });
        }
    }
    match k {
        Some(k) if k < part.slot_count() => Err(Error::InvalidPartition(format!(
            "--k {k} is below the {} slots of the partition file",
            part.slot_count()
        ))),
        Some(k) => part.with_slot_count(k),
        None => Ok(part),
    }
}

fn parse_gamma(arg: Option<&str>, graph: &Graph) -> hedonic::Result<Resolution> {
    match arg {
        Some(s) => s.parse(),
        None => edge_density(graph),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> hedonic::Result<()> {
    match out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> hedonic::Result<()> {
    let spec = SappmSpec { k: a.k, n_per_community: a.n_per_community, p: a.p, lambda: a.lambda, seed: a.seed };
    let (graph, truth) = hedonic::generate(&spec)?;
    let with_ext = |ext: &str| {
        let mut s = a.out.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    let mut f = create(&with_ext(".edges"))?;
    graph.write_edge_list(&mut f)?;
    f.flush()?;
    let mut f = create(&with_ext(".truth"))?;
    truth.write(&mut f)?;
    f.flush()?;
    if let Some(eta) = a.eta {
        let init = perturb(&truth, &NoiseSpec { eta, seed: a.seed })?;
        let mut f = create(&with_ext(".init"))?;
        init.write(&mut f)?;
        f.flush()?;
    }
    println!("{}", json!({ "nodes": graph.node_count(), "edges": graph.edge_count(), "spec": spec }));
    Ok(())
}

fn cmd_detect(a: &DetectArgs) -> hedonic::Result<()> {
    let graph = load_graph(&a.part.input.graph)?;
    let start = load_partition(&a.part.partition, Some(&graph), a.part.k)?;
    let gamma = parse_gamma(a.gamma.as_deref(), &graph)?;
    let config = DynamicsConfig {
        node_rule: match a.node_rule {
            RuleArg::Best => NodeRule::Best,
            RuleArg::Better => NodeRule::Better,
        },
        selection: match a.selection {
            SelectionArg::Queue => Selection::Queue,
            SelectionArg::GlobalBest => Selection::GlobalBest,
        },
        queue_init: if a.shuffle { QueueInit::Shuffled } else { QueueInit::IdOrder },
        tie_break: if a.random_ties { TieBreak::Seeded } else { TieBreak::LowestIndex },
        allow_empty_target: !a.no_empty_target,
        seed: a.seed,
        record_trajectory: a.trajectory.is_some(),
    };
    let method = Method::from(a.method);
    let clock = Instant::now();
    let (partition, moves, evals, trajectory) = match method {
        Method::DynamicsQueue | Method::DynamicsBest => {
            let config = if method == Method::DynamicsBest {
                DynamicsConfig { selection: Selection::GlobalBest, node_rule: NodeRule::Best, ..config }
            } else {
                config
            };
            let (p, stats) = hedonic::run_dynamics(&graph, &start, gamma, &config)?;
            (p, stats.moves, stats.node_evaluations, stats.trajectory)
        }
        _ => {
            let found = detect(method, &graph, &start, gamma, &config)?;
            (found.partition, found.moves, found.evals, None)
        }
    };
    let runtime_ms = clock.elapsed().as_secs_f64() * 1e3;
    if let (Some(path), Some(steps)) = (&a.trajectory, &trajectory) {
        let mut f = create(path)?;
        hedonic::dynamics::write_trajectory_csv(steps, gamma, &mut f)?;
        f.flush()?;
    }
    if let Some(path) = &a.out {
        let mut f = create(path)?;
        partition.write(&mut f)?;
        f.flush()?;
    }
    let potential = partition_potential(&graph, &partition, gamma)?;
    let robustness = partition_robustness(&graph, &partition)?;
    let record = json!({
        "method": method.name(),
        "gamma": gamma.to_string(),
        "moves": moves,
        "evals": evals,
        "runtime_ms": runtime_ms,
        "potential": potential.to_string(),
        "potential_value": potential.to_f64(),
        "robustness": hedonic::resolution::fraction_string(&robustness),
        "partition": partition.to_string(),
        "membership": partition.membership(),
    });
    println!("{record}");
    Ok(())
}

fn cmd_robustness(a: &PartitionArgs) -> hedonic::Result<()> {
    let graph = load_graph(&a.input.graph)?;
    let part = load_partition(&a.partition, Some(&graph), a.k)?;
    println!("{}", RobustnessReport::new(&graph, &part)?.to_json()?);
    Ok(())
}

fn cmd_gamma_range(a: &GammaRangeArgs) -> hedonic::Result<()> {
    let graph = load_graph(&a.part.input.graph)?;
    let mut part = load_partition(&a.part.partition, Some(&graph), a.part.k)?;
    if !a.fixed_k && part.first_empty_slot().is_none() {
        part = part.with_slot_count(part.slot_count() + 1)?;
    }
    println!("{}", equilibrium_gamma_range(&graph, &part)?);
    Ok(())
}

fn cmd_metagraph(a: &MetagraphArgs) -> hedonic::Result<()> {
    let graph = load_graph(&a.input.graph)?;
    let gamma = a.gamma.as_deref().map(str::parse).transpose()?;
    let meta = build_metagraph(&graph)?;
    let text = match a.format {
        FormatArg::Json => to_json(&meta, gamma)? + "\n",
        FormatArg::Dot => {
            let mut buf = Vec::new();
            write_dot(&meta, gamma, &mut buf)?;
            String::from_utf8(buf).expect("DOT output is UTF-8")
        }
    };
    write_output(a.out.as_deref(), &text)
}

fn cmd_track(a: &TrackArgs) -> hedonic::Result<()> {
    let mut grid = if a.full_grid { ExperimentGrid::full() } else { ExperimentGrid::default() };
    if let Some(v) = &a.p {
        grid.ps = v.clone();
    }
    if let Some(v) = &a.lambda {
        grid.lambdas = v.clone();
    }
    if let Some(v) = &a.k {
        grid.ks = v.clone();
    }
    if let Some(v) = &a.eta {
        grid.etas = v.clone();
    }
    if let Some(n) = a.n_per_community {
        grid.size = InstanceSize::PerCommunity(n);
    }
    if let Some(n) = a.nodes {
        grid.size = InstanceSize::Total(n);
    }
    if let Some(s) = a.samples {
        grid.samples = s;
    }
    if let Some(m) = &a.method {
        grid.methods = m.iter().map(|&m| Method::from(m)).collect();
    }
    grid.base_seed = a.seed;
    let records = run_grid(&grid, a.jobs)?;
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            write_records_csv(&records, &mut f)?;
            f.flush()?;
        }
        None => write_records_csv(&records, io::stdout().lock())?,
    }
    if let Some(path) = &a.emit_plot_data {
        let mut f = create(path)?;
        write_plot_data_csv(&plot_data(&records), &mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn cmd_ari(a: &AriArgs) -> hedonic::Result<()> {
    let part = load_partition(&a.partition, None, None)?;
    let reference = load_partition(&a.reference, None, None)?;
    println!("{}", hedonic::ari(&part, &reference)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Robustness(a) => cmd_robustness(a),
        Command::GammaRange(a) => cmd_gamma_range(a),
        Command::Metagraph(a) => cmd_metagraph(a),
        Command::Track(a) => cmd_track(a),
        Command::Ari(a) => cmd_ari(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
