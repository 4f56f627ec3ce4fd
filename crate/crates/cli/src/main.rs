//! Command-line interface: graph generation, feasibility checks, admissible
//! time search, certificate construction, single recoveries and full
//! experiment runs.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 when an
//! experiment completed but some trials recorded failures.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use heatsparse::bounds::{self, GraphConstants, SupportProfile};
use heatsparse::certificate::{self, Certificate, CertificateRecord, SignPattern};
use heatsparse::error::Error;
use heatsparse::experiment::{self, ExperimentConfig};
use heatsparse::generate::{self, GraphSpec, WeightSpec};
use heatsparse::graph_file;
use heatsparse::heat::HeatOperator;
use heatsparse::metric::CompatibleMetric;
use heatsparse::recovery::{self, ErrorBudget, Observation, SolverOptions};
use heatsparse::spectral::SpectralData;
use heatsparse::WeightedGraph;

#[derive(Parser)]
#[command(
    name = "heatsparse",
    about = "Sparse recovery of point masses on weighted graphs from heat-smoothed observations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it in the text format
    GenGraph(GenGraphArgs),
    /// Evaluate both feasibility conditions at a fixed time
    Check(CheckArgs),
    /// Largest admissible time T* for a graph and support
    MaxTime(MaxTimeArgs),
    /// Construct and verify a dual certificate
    Certificate(CertificateArgs),
    /// Solve the l1 recovery program for one observation
    Recover(RecoverArgs),
    /// Run a config-driven experiment grid, emitting CSV/JSON records
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Path,
    Cycle,
    Grid,
    Complete,
    ErdosRenyi,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Vertex count (path, cycle, complete, erdos-renyi)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Edge probability (erdos-renyi)
    #[arg(long)]
    p: Option<f64>,
    /// Structure seed (erdos-renyi)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant edge weight
    #[arg(long, conflicts_with_all = ["weight_lo", "weight_hi"])]
    weight: Option<f64>,
    /// Lower end of a per-edge uniform weight range
    #[arg(long, requires = "weight_hi")]
    weight_lo: Option<f64>,
    #[arg(long, requires = "weight_lo")]
    weight_hi: Option<f64>,
    #[arg(long, default_value_t = 0)]
    weight_seed: u64,
    /// Append the derived compatible metric as a `metric` section
    #[arg(long)]
    with_metric: bool,
    /// Output path; stdout when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SupportArgs {
    /// Explicit support vertices, comma-separated (e.g. "0,4,9")
    #[arg(long, conflicts_with_all = ["support_size", "support_seed"])]
    support: Option<String>,
    /// Greedy farthest-point placement of this many vertices
    #[arg(long)]
    support_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    support_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct CheckArgs {
    /// Graph file (optionally with a metric section)
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    support: SupportArgs,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    /// Write the heat kernel K(t) at this time as an N×N CSV matrix
    #[arg(long)]
    dump_kernel: Option<PathBuf>,
}

#[derive(Args)]
struct MaxTimeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    support: SupportArgs,
}

#[derive(Args)]
struct CertificateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    support: SupportArgs,
    /// Sign pattern, e.g. "+,-,+" or "+-+"; defaults to all +1
    #[arg(long)]
    signs: Option<String>,
    /// Evaluation time
    #[arg(long, conflicts_with = "t_frac")]
    t: Option<f64>,
    /// Evaluation time as a fraction of T*
    #[arg(long)]
    t_frac: Option<f64>,
    /// Write h as `vertex,value` CSV to this path
    #[arg(long)]
    dump_h: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseModelArg {
    Sphere,
    Gaussian,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    t: f64,
    /// Noise tolerance of the recovery program
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 1e-8)]
    gap_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    /// Observation file: one value per line, N lines
    #[arg(long, conflicts_with_all = ["support", "support_size"])]
    f_file: Option<PathBuf>,
    #[command(flatten)]
    support: SupportArgs,
    /// Coefficients on the support, comma-separated; random when omitted
    #[arg(long)]
    coeffs: Option<String>,
    /// Seed for random coefficients
    #[arg(long, default_value_t = 0)]
    signal_seed: u64,
    #[arg(long, value_enum, default_value = "sphere")]
    noise_model: NoiseModelArg,
    /// Seed for synthesized noise
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the recovered signal as `vertex,value` CSV
    #[arg(long)]
    dump_g: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's CSV output path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the config's JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(trial_failures) => {
            if trial_failures {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(command: Command) -> Result<bool, Error> {
    match command {
        Command::GenGraph(args) => gen_graph(args).map(|_| false),
        Command::Check(args) => check(args).map(|_| false),
        Command::MaxTime(args) => max_time(args).map(|_| false),
        Command::Certificate(args) => certificate_cmd(args).map(|_| false),
        Command::Recover(args) => recover(args).map(|_| false),
        Command::Experiment(args) => experiment_cmd(args),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

fn gen_graph(args: GenGraphArgs) -> Result<(), Error> {
    let need_n = |n: Option<usize>| n.ok_or_else(|| invalid("--n is required for this kind"));
    let spec = match args.kind {
        GraphKind::Path => GraphSpec::Path { n: need_n(args.n)? },
        GraphKind::Cycle => GraphSpec::Cycle { n: need_n(args.n)? },
        GraphKind::Complete => GraphSpec::Complete { n: need_n(args.n)? },
        GraphKind::Grid => GraphSpec::Grid {
            rows: args
                .rows
                .ok_or_else(|| invalid("--rows is required for grid"))?,
            cols: args
                .cols
                .ok_or_else(|| invalid("--cols is required for grid"))?,
        },
        GraphKind::ErdosRenyi => GraphSpec::ErdosRenyi {
            n: need_n(args.n)?,
            p: args
                .p
                .ok_or_else(|| invalid("--p is required for erdos-renyi"))?,
            seed: args.seed,
        },
    };
    let weights = match (args.weight, args.weight_lo, args.weight_hi) {
        (Some(value), _, _) => WeightSpec::Constant { value },
        (None, Some(lo), Some(hi)) => WeightSpec::Uniform {
            lo,
            hi,
            seed: args.weight_seed,
        },
        _ => WeightSpec::default(),
    };
    let graph = generate::generate_graph(&spec, &weights)?;
    let metric = args
        .with_metric
        .then(|| CompatibleMetric::for_graph(&graph));
    let text = graph_file::write_graph(&graph, metric.as_ref());
    emit(args.output.as_deref(), &text)
}

struct Instance {
    spectral: SpectralData,
    constants: GraphConstants,
    support: Vec<usize>,
    profile: SupportProfile,
}

fn load_instance(path: &std::path::Path, support: &SupportArgs) -> Result<Instance, Error> {
    let parsed = graph_file::read_graph_path(path)?;
    let metric = parsed.metric_or_default();
    let graph: WeightedGraph = parsed.graph;
    let spectral = SpectralData::decompose(&graph.laplacian())?;
    let constants = GraphConstants::from_parts(&spectral, &metric)?;
    let support = resolve_support(support, &metric)?;
    let profile = SupportProfile::from_support(&metric, &support)?;
    Ok(Instance {
        spectral,
        constants,
        support,
        profile,
    })
}

fn resolve_support(args: &SupportArgs, metric: &CompatibleMetric) -> Result<Vec<usize>, Error> {
    match (&args.support, args.support_size) {
        (Some(list), None) => {
            let vertices = parse_index_list(list)?;
            for &v in &vertices {
                if v >= metric.n() {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        n: metric.n(),
                    });
                }
            }
            Ok(vertices)
        }
        (None, Some(size)) => generate::place_support(metric, size, args.support_seed),
        (None, None) => Err(invalid("provide --support or --support-size")),
        (Some(_), Some(_)) => Err(invalid("use either --support or --support-size, not both")),
    }
}

fn parse_index_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("bad vertex index `{tok}`")))
        })
        .collect()
}

fn parse_float_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number `{tok}`")))
        })
        .collect()
}

fn parse_signs(text: &str, j: usize) -> Result<SignPattern, Error> {
    let raw: Vec<char> = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .collect();
    if raw.len() != j {
        return Err(invalid(format!("expected {j} signs, got {}", raw.len())));
    }
    let signs = raw
        .into_iter()
        .map(|c| match c {
            '+' => Ok(1.0),
            '-' => Ok(-1.0),
            other => Err(invalid(format!("bad sign `{other}`, use + or -"))),
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    SignPattern::new(signs)
}

fn emit(path: Option<&std::path::Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn check(args: CheckArgs) -> Result<(), Error> {
    let inst = load_instance(&args.graph, &args.support)?;
    let report = bounds::check_certificate_condition(&inst.constants, &inst.profile, args.t)?;
    if let Some(path) = &args.dump_kernel {
        let h_op = HeatOperator::new(&inst.spectral, args.t)?;
        let mut csv = String::new();
        for x in 0..h_op.n() {
            let row: Vec<String> = (0..h_op.n())
                .map(|y| h_op.entry(x, y).to_string())
                .collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        std::fs::write(path, csv)?;
    }
    match args.format {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        ReportFormat::Csv => {
            println!("{}", heatsparse::FeasibilityReport::CSV_HEADER);
            println!("{}", report.csv_row());
        }
    }
    Ok(())
}

fn max_time(args: MaxTimeArgs) -> Result<(), Error> {
    let inst = load_instance(&args.graph, &args.support)?;
    let t_star = bounds::max_admissible_time(&inst.constants, &inst.profile);
    let payload = serde_json::json!({
        "t_star": t_star,
        "support": inst.support,
        "j": inst.profile.j,
        "d_min": inst.profile.d_min,
        "zeta": inst.constants.zeta,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

fn certificate_cmd(args: CertificateArgs) -> Result<(), Error> {
    let inst = load_instance(&args.graph, &args.support)?;
    let t = match (args.t, args.t_frac) {
        (Some(t), None) => t,
        (None, Some(frac)) => {
            let t_star = bounds::max_admissible_time(&inst.constants, &inst.profile);
            if t_star <= 0.0 {
                return Err(invalid("no admissible time exists; pass --t explicitly"));
            }
            frac * t_star
        }
        _ => return Err(invalid("provide exactly one of --t, --t-frac")),
    };
    let signs = match &args.signs {
        Some(text) => parse_signs(text, inst.support.len())?,
        None => SignPattern::all_plus(inst.support.len()),
    };
    let h_op = HeatOperator::new(&inst.spectral, t)?;
    let cert = Certificate::construct(&h_op, &inst.support, &signs)?;
    let verdict = certificate::verify(&cert, &signs, certificate::DEFAULT_TOL);
    if let Some(path) = &args.dump_h {
        std::fs::write(path, cert.values_csv())?;
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&CertificateRecord::new(&cert, verdict))?
    );
    Ok(())
}

fn recover(args: RecoverArgs) -> Result<(), Error> {
    let parsed = graph_file::read_graph_path(&args.graph)?;
    let metric = parsed.metric_or_default();
    let graph = parsed.graph;
    let n = graph.n_vertices();
    let spectral = SpectralData::decompose(&graph.laplacian())?;
    let h_op = HeatOperator::new(&spectral, args.t)?;
    let options = SolverOptions {
        gap_tol: args.gap_tol,
        max_iter: args.max_iter,
        ..SolverOptions::default()
    };

    // observation: from file, or synthesized from a sparse truth
    type Truth = Option<(Vec<usize>, DVector<f64>)>;
    let (f, truth): (DVector<f64>, Truth) = match &args.f_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let values = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| {
                    l.parse::<f64>()
                        .map_err(|_| invalid(format!("bad value `{l}` in f file")))
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            if values.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: values.len(),
                });
            }
            (DVector::from_vec(values), None)
        }
        None => {
            let support = resolve_support(&args.support, &metric)?;
            let coeffs = match &args.coeffs {
                Some(text) => {
                    let c = parse_float_list(text)?;
                    if c.len() != support.len() {
                        return Err(Error::DimensionMismatch {
                            expected: support.len(),
                            got: c.len(),
                        });
                    }
                    c
                }
                None => {
                    use rand::Rng;
                    let mut rng = ChaCha20Rng::seed_from_u64(args.signal_seed);
                    (0..support.len())
                        .map(|_| {
                            let m = rng.gen_range(0.5..=2.0);
                            if rng.gen::<bool>() {
                                m
                            } else {
                                -m
                            }
                        })
                        .collect()
                }
            };
            let mut g_true = DVector::zeros(n);
            for (slot, &v) in support.iter().enumerate() {
                g_true[v] = coeffs[slot];
            }
            let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
            let w = match args.noise_model {
                NoiseModelArg::Sphere => recovery::sphere_noise(n, args.eps, &mut rng),
                NoiseModelArg::Gaussian => recovery::gaussian_noise_capped(n, args.eps, &mut rng),
            };
            let f = h_op.apply(&g_true)? + w;
            (f, Some((support, g_true)))
        }
    };

    let obs = Observation::new(f, args.t, args.eps)?;
    let result = recovery::solve(&h_op, &obs, &options)?;

    let audit = match &truth {
        Some((support, g_true)) => {
            let inv = h_op.restrict(support)?.invert()?;
            let delta = recovery::delta_from_inverse(&inv);
            let budget = ErrorBudget::new(support.len(), delta, args.eps)?;
            let signs =
                SignPattern::of_nonzero(&support.iter().map(|&v| g_true[v]).collect::<Vec<f64>>())?;
            let cert = Certificate::construct(&h_op, support, &signs).ok();
            Some(recovery::audit_recovery(
                g_true,
                support,
                &result,
                &budget,
                cert.as_ref(),
            )?)
        }
        None => None,
    };

    if let Some(path) = &args.dump_g {
        let mut csv = String::from("vertex,value\n");
        for (v, value) in result.g_hat.iter().enumerate() {
            csv.push_str(&format!("{v},{value}\n"));
        }
        std::fs::write(path, csv)?;
    }

    let payload = serde_json::json!({
        "result": result,
        "audit": audit,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = ExperimentConfig::from_json(&text)?;
    let run = experiment::run_experiment(&config)?;

    let csv_path = args.csv.or_else(|| run.config.output.csv.clone());
    let json_path = args.json.or_else(|| run.config.output.json.clone());
    if csv_path.is_none() && json_path.is_none() {
        print!("{}", run.to_csv());
    }
    if let Some(path) = csv_path {
        std::fs::write(&path, run.to_csv())?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = json_path {
        std::fs::write(&path, run.to_json()?)?;
        eprintln!("wrote {}", path.display());
    }

    let failed = run.any_trial_failed();
    if failed {
        eprintln!(
            "{} of {} trials recorded failures",
            run.records.iter().filter(|r| r.status != "ok").count(),
            run.records.len()
        );
    }
    Ok(failed)
}
