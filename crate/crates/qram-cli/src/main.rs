//! `qram` — experiment runner for the bucket-brigade qRAM simulator.
//!
//! Every command is deterministic for a fixed `--seed` (independent of
//! worker count) and writes CSV or aligned text to stdout or `--out`.
//! Exit codes: 0 success, 1 usage or runtime error, 2 property violation
//! (a statistical or structural check failed), so runs can gate CI.
//!
//! Output formats are documented in FORMATS.md at the workspace root.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use num_complex::Complex64;

use qram_sim::bb_circuit::{build_bucket_brigade, MemoryContents};
use qram_sim::grover::{
    grover_exact, grover_trajectories, optimal_iterations, scaling_experiment, GroverConfig,
    NoiseModel,
};
use qram_sim::oracle_channels::{parse_oracle_spec, toy_oracle_channel, MemoryFunction};
use qram_sim::path_model::{
    analytic_probs, estimate_probs, required_eps_for_fidelity, ToyModelParams,
};
use qram_sim::qec::{
    self, encoded_grover_experiment, rep_code_rs_demo, rep_code_toy_demo, RepetitionExperiment,
    RepetitionNoise,
};
use qram_sim::simcore::QuantumState;

/// Seed used whenever `--seed` is not given.
const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(
    name = "qram",
    version,
    about = "Bucket-brigade quantum RAM lookups, routing-noise statistics, noisy Grover search and query error correction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic vs Monte Carlo routing-outcome probabilities.
    Paths(PathsArgs),
    /// Plot-ready sweeps of the routing-error curves.
    Figs(FigsArgs),
    /// Run the lookup circuit on a basis or uniform address.
    Lookup(LookupArgs),
    /// Gate-activation accounting for basis-state lookups.
    Activations(ActivationsArgs),
    /// Grover search through perfect or faulty oracles.
    Grover(GroverArgs),
    /// Repetition-code query-error-correction experiments.
    Qec(QecArgs),
    /// CSS codestate expansion and excitation balance.
    Css(CssArgs),
}

#[derive(Args)]
struct OutArg {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathsArgs {
    /// Tree depth (address bits).
    #[arg(long)]
    n: usize,
    /// Per-node per-interval flip probability.
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FigKind {
    /// Outcome probabilities against n at fixed ε.
    Fig6,
    /// Outcome probabilities against ε at fixed n.
    Fig7,
    /// Required ε for a fixed right-path fidelity, with the 1/n² curve.
    Fig8,
}

#[derive(Args)]
struct FigsArgs {
    #[arg(long, value_enum)]
    kind: FigKind,
    /// Fixed ε (fig6).
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Fixed n (fig7).
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Fixed right-path fidelity target (fig8).
    #[arg(long, default_value_t = 0.99)]
    fidelity: f64,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    #[arg(long, default_value_t = 0.0)]
    eps_min: f64,
    #[arg(long, default_value_t = 0.2)]
    eps_max: f64,
    #[arg(long, default_value_t = 21)]
    eps_steps: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct MemoryArg {
    /// Memory file: 2^n characters '0'/'1', whitespace ignored.
    #[arg(long, conflicts_with = "memory_bits")]
    memory: Option<PathBuf>,
    /// Memory given inline as a bit string.
    #[arg(long)]
    memory_bits: Option<String>,
}

impl MemoryArg {
    fn load(&self, n: usize) -> Result<MemoryContents, AppError> {
        let text = match (&self.memory, &self.memory_bits) {
            (Some(path), None) => std::fs::read_to_string(path)
                .map_err(|e| AppError::usage(format!("cannot read {}: {e}", path.display())))?,
            (None, Some(bits)) => bits.clone(),
            _ => {
                return Err(AppError::usage(
                    "exactly one of --memory or --memory-bits is required".into(),
                ))
            }
        };
        let contents =
            MemoryContents::from_text(&text).map_err(|e| AppError::usage(e.to_string()))?;
        if contents.len() != 1 << n {
            return Err(AppError::usage(format!(
                "memory holds {} bits but n={n} needs {}",
                contents.len(),
                1usize << n
            )));
        }
        Ok(contents)
    }
}

#[derive(Args)]
struct LookupArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    memory: MemoryArg,
    /// Basis address to read (bit string).
    #[arg(long, conflicts_with = "uniform")]
    address: Option<String>,
    /// Query the uniform superposition of all addresses instead.
    #[arg(long)]
    uniform: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ActivationsArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    memory: MemoryArg,
    /// Single basis address (bit string).
    #[arg(long, conflicts_with = "all")]
    address: Option<String>,
    /// Tabulate every address and report the maximum.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Perfect,
    Rs,
    Toy,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Trajectories,
}

#[derive(Args)]
struct GroverArgs {
    /// Address width for a single run (ignored by --scaling).
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Marked address (defaults to 2^n − 1).
    #[arg(long)]
    marked: Option<usize>,
    /// Query count; defaults to the ⌊(π/4)√N⌋ schedule.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModelArg::Perfect)]
    model: ModelArg,
    /// Lost-query probability (model rs).
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Per-node flip rate feeding the routing-noise weights (model toy).
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Oracle channel spec file overriding --model.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Scan query counts until reaching --target instead of one run.
    #[arg(long)]
    scaling: bool,
    #[arg(long, default_value_t = 0.9)]
    target: f64,
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DemoArg {
    Rs,
    Toy,
}

#[derive(Args)]
struct QecArgs {
    /// Replay a fixed encoded-query failure scenario.
    #[arg(long, value_enum)]
    demo: Option<DemoArg>,
    /// Logical error of the flip-before-oracle model at distance --d.
    #[arg(long)]
    logical_error: bool,
    /// Smallest odd distance for a --delta target at rate --p.
    #[arg(long)]
    required_distance: bool,
    /// Encoded search at the 1/√N budget.
    #[arg(long)]
    encoded_grover: bool,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct CssArgs {
    /// Built-in code: rep3, rep5, steane, rm15.
    #[arg(long, conflicts_with = "file")]
    code: Option<String>,
    /// Parity-check file (X block, blank line, Z block).
    #[arg(long)]
    file: Option<PathBuf>,
    /// Per-position excitation counts of every logical basis state.
    #[arg(long)]
    balance: bool,
    /// Expand the codestate of this Z-codeword (bit string).
    #[arg(long)]
    expand: Option<String>,
    /// Just validate and print the code dimensions.
    #[arg(long)]
    validate: bool,
    #[command(flatten)]
    out: OutArg,
}

enum AppError {
    /// Bad arguments or runtime failure: exit 1.
    Usage(String),
    /// A checked property failed: exit 2.
    Violation(String),
}

impl AppError {
    fn usage(msg: String) -> Self {
        AppError::Usage(msg)
    }
}

impl<E: std::error::Error> From<E> for AppError {
    fn from(e: E) -> Self {
        AppError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let (result, out) = run(cli);
    match result {
        Ok(text) => {
            if let Err(e) = emit(&out, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn run(cli: Cli) -> (Result<String, AppError>, Option<PathBuf>) {
    match cli.command {
        Command::Paths(args) => (cmd_paths(&args), args.out.out),
        Command::Figs(args) => (cmd_figs(&args), args.out.out),
        Command::Lookup(args) => (cmd_lookup(&args), args.out.out),
        Command::Activations(args) => (cmd_activations(&args), args.out.out),
        Command::Grover(args) => (cmd_grover(&args), args.out.out),
        Command::Qec(args) => (cmd_qec(&args), args.out.out),
        Command::Css(args) => (cmd_css(&args), args.out.out),
    }
}

fn cmd_paths(args: &PathsArgs) -> Result<String, AppError> {
    let params = ToyModelParams::new(args.n, args.eps)?;
    let analytic = analytic_probs(params);
    let mc = estimate_probs(params, args.trials, args.seed)?;
    let mut text = String::new();
    writeln!(text, "{}", qram_sim::path_model::CSV_HEADER).unwrap();
    writeln!(
        text,
        "{}",
        qram_sim::path_model::csv_row(params, &analytic, "analytic", 0)
    )
    .unwrap();
    writeln!(
        text,
        "{}",
        qram_sim::path_model::csv_row(params, &mc, "mc", args.trials)
    )
    .unwrap();

    let checks = [
        (mc.p_rp, analytic.p_rp, mc.stderr_rp, "p_rp"),
        (mc.p_wp, analytic.p_wp, mc.stderr_wp, "p_wp"),
        (mc.p_np, analytic.p_np, mc.stderr_np, "p_np"),
    ];
    for (est, exact, stderr, name) in checks {
        let diff = (est - exact).abs();
        if diff > 4.0 * stderr.max(f64::EPSILON) {
            return Err(AppError::Violation(format!(
                "{name} off by {diff} (> 4 sigma = {})",
                4.0 * stderr
            )));
        }
    }
    Ok(text)
}

fn cmd_figs(args: &FigsArgs) -> Result<String, AppError> {
    let mut text = String::new();
    match args.kind {
        FigKind::Fig6 => {
            if args.n_min > args.n_max {
                return Err(AppError::usage("empty n range".into()));
            }
            writeln!(text, "{}", qram_sim::path_model::CSV_HEADER).unwrap();
            let mut crossover = None;
            for n in args.n_min..=args.n_max {
                let params = ToyModelParams::new(n, args.eps)?;
                let probs = analytic_probs(params);
                if crossover.is_none() && probs.p_np > probs.p_wp {
                    crossover = Some(n);
                }
                writeln!(
                    text,
                    "{}",
                    qram_sim::path_model::csv_row(params, &probs, "analytic", 0)
                )
                .unwrap();
            }
            match crossover {
                Some(n) => writeln!(text, "# crossover_n={n}").unwrap(),
                None => writeln!(text, "# crossover_n=none").unwrap(),
            }
        }
        FigKind::Fig7 => {
            if args.eps_steps < 2 || args.eps_min > args.eps_max {
                return Err(AppError::usage("empty eps range".into()));
            }
            writeln!(text, "{}", qram_sim::path_model::CSV_HEADER).unwrap();
            for step in 0..args.eps_steps {
                let eps = args.eps_min
                    + (args.eps_max - args.eps_min) * step as f64 / (args.eps_steps - 1) as f64;
                let params = ToyModelParams::new(args.n, eps)?;
                let probs = analytic_probs(params);
                writeln!(
                    text,
                    "{}",
                    qram_sim::path_model::csv_row(params, &probs, "analytic", 0)
                )
                .unwrap();
            }
        }
        FigKind::Fig8 => {
            if args.n_min > args.n_max {
                return Err(AppError::usage("empty n range".into()));
            }
            writeln!(text, "n,eps_required,glm_one_over_n2").unwrap();
            for n in args.n_min..=args.n_max {
                let eps = required_eps_for_fidelity(n, args.fidelity)?;
                let glm = 1.0 / (n as f64 * n as f64);
                writeln!(text, "{n},{eps},{glm}").unwrap();
            }
        }
    }
    Ok(text)
}

fn format_amplitude(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

fn cmd_lookup(args: &LookupArgs) -> Result<String, AppError> {
    let memory = args.memory.load(args.n)?;
    let circuit = build_bucket_brigade(args.n, memory)?;
    let mut text = String::new();
    if args.uniform {
        let dim = 1usize << args.n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        let state = QuantumState::pure_from_amplitudes(args.n, Array1::from_elem(dim, amp))?;
        let out = circuit.run_lookup_superposition(&state)?;
        let amps = out.amplitudes()?;
        writeln!(text, "address,bus,re,im").unwrap();
        for a in 0..dim {
            for bus in 0..2usize {
                let z = amps[(a << 1) | bus];
                if z.norm_sqr() > 1e-24 {
                    writeln!(
                        text,
                        "{:0width$b},{bus},{}",
                        a,
                        format_amplitude(z),
                        width = args.n
                    )
                    .unwrap();
                }
            }
        }
    } else {
        let address = args
            .address
            .as_deref()
            .ok_or_else(|| AppError::usage("--address or --uniform is required".into()))?;
        let (bus, decoupled) = circuit.run_lookup(address)?;
        writeln!(text, "address,bus,decoupled").unwrap();
        writeln!(text, "{address},{bus},{decoupled}").unwrap();
        if !decoupled {
            return Err(AppError::Violation(
                "routing ancillas failed to decouple".into(),
            ));
        }
    }
    Ok(text)
}

fn cmd_activations(args: &ActivationsArgs) -> Result<String, AppError> {
    let memory = args.memory.load(args.n)?;
    let circuit = build_bucket_brigade(args.n, memory)?;
    let mut text = String::new();
    writeln!(
        text,
        "n,address,total,activated,routing_copy,routing_node,coupling,uncompute"
    )
    .unwrap();
    let mut report_row = |address: &str| -> Result<usize, AppError> {
        let report = circuit.count_activations(address)?;
        let by_role: Vec<usize> = report.per_role.iter().map(|(_, act, _)| *act).collect();
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            args.n,
            address,
            report.total_gates,
            report.activated,
            by_role[0],
            by_role[1],
            by_role[2],
            by_role[3]
        )
        .unwrap();
        Ok(report.activated)
    };
    if args.all {
        let mut max = 0usize;
        for a in 0..1usize << args.n {
            let address = format!("{:0width$b}", a, width = args.n);
            max = max.max(report_row(&address)?);
        }
        writeln!(text, "# max_activated={max}").unwrap();
    } else {
        let address = args
            .address
            .as_deref()
            .ok_or_else(|| AppError::usage("--address or --all is required".into()))?;
        report_row(address)?;
    }
    Ok(text)
}

fn cmd_grover(args: &GroverArgs) -> Result<String, AppError> {
    let mut text = String::new();
    let model = match args.model {
        ModelArg::Perfect => NoiseModel::Perfect,
        ModelArg::Rs => NoiseModel::RegevSchiff { p: args.p },
        ModelArg::Toy => NoiseModel::Toy {
            eps: args.eps,
            hist_trials: 100_000,
            seed: args.seed,
        },
    };
    let p_column = match args.model {
        ModelArg::Perfect => 0.0,
        ModelArg::Rs => args.p,
        ModelArg::Toy => args.eps,
    };

    if args.scaling {
        if args.n_min > args.n_max {
            return Err(AppError::usage("empty n range".into()));
        }
        writeln!(text, "{}", qram_sim::grover::CSV_HEADER).unwrap();
        let rows = scaling_experiment(&model, args.n_min..=args.n_max, args.target)?;
        for row in rows {
            let t = row
                .queries_needed
                .map(|t| t.to_string())
                .unwrap_or_else(|| "saturated".into());
            writeln!(
                text,
                "{},{},{},{},{},0,0",
                row.n,
                p_column,
                model.name(),
                t,
                row.best_success
            )
            .unwrap();
        }
        return Ok(text);
    }

    let marked = args.marked.unwrap_or((1usize << args.n) - 1);
    let iterations = match args.t {
        Some(t) => t,
        None => optimal_iterations(1u64 << args.n, 1)?,
    };
    let oracle = match &args.spec {
        Some(path) => {
            let spec_text = std::fs::read_to_string(path)
                .map_err(|e| AppError::usage(format!("cannot read {}: {e}", path.display())))?;
            let spec = parse_oracle_spec(&spec_text)?;
            toy_oracle_channel(&spec, MemoryFunction::marked(args.n, &[marked])?)?
        }
        None => model.channel(args.n, &[marked])?,
    };
    let config = GroverConfig::new(args.n, [marked], iterations, oracle)?;
    let stats = match args.method {
        MethodArg::Exact => grover_exact(&config)?,
        MethodArg::Trajectories => grover_trajectories(&config, args.trials, args.seed)?,
    };
    let (model_name, p_column) = if args.spec.is_some() {
        ("spec", 0.0)
    } else {
        (model.name(), p_column)
    };
    writeln!(text, "{}", qram_sim::grover::CSV_HEADER).unwrap();
    writeln!(
        text,
        "{}",
        qram_sim::grover::csv_row(args.n, p_column, model_name, iterations, &stats)
    )
    .unwrap();
    Ok(text)
}

fn write_state_terms(text: &mut String, label: &str, state: &QuantumState) -> Result<(), AppError> {
    let amps = state.amplitudes()?;
    let width = state.width();
    write!(text, "{label}:").unwrap();
    for (i, z) in amps.iter().enumerate() {
        if z.norm_sqr() > 1e-24 {
            write!(text, " {:+.6}|{:0w$b}>", z.re, i, w = width).unwrap();
            if z.im.abs() > 1e-12 {
                write!(text, "(im {:+.6})", z.im).unwrap();
            }
        }
    }
    writeln!(text).unwrap();
    Ok(())
}

fn cmd_qec(args: &QecArgs) -> Result<String, AppError> {
    let mut text = String::new();
    let selected = usize::from(args.demo.is_some())
        + usize::from(args.logical_error)
        + usize::from(args.required_distance)
        + usize::from(args.encoded_grover);
    if selected != 1 {
        return Err(AppError::usage(
            "choose exactly one of --demo, --logical-error, --required-distance, --encoded-grover"
                .into(),
        ));
    }

    if let Some(demo) = args.demo {
        match demo {
            DemoArg::Rs => {
                let record = rep_code_rs_demo(args.shots, args.seed)?;
                write_state_terms(&mut text, "pre_measurement", &record.pre_measurement)?;
                writeln!(
                    text,
                    "syndrome_probabilities: {}",
                    record
                        .syndrome_probabilities
                        .iter()
                        .map(f64::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
                .unwrap();
                writeln!(
                    text,
                    "syndrome_counts({} shots): {}",
                    record.shots,
                    record
                        .syndrome_counts
                        .iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
                .unwrap();
                for (i, state) in record.corrected.iter().enumerate() {
                    write_state_terms(&mut text, &format!("corrected[{i}]"), state)?;
                }
                writeln!(text, "mixture_fidelity: {}", record.mixture_fidelity).unwrap();
            }
            DemoArg::Toy => {
                let record = rep_code_toy_demo(0, 1, args.shots, args.seed)?;
                for (i, (w, state)) in record.branches.iter().enumerate() {
                    write_state_terms(&mut text, &format!("branch[{i}] weight {w}"), state)?;
                }
                writeln!(
                    text,
                    "branch_counts({} shots): {}",
                    record.shots,
                    record
                        .branch_counts
                        .iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
                .unwrap();
                writeln!(text, "corrected_fidelity: {}", record.corrected_fidelity).unwrap();
            }
        }
        return Ok(text);
    }

    if args.logical_error {
        let exp = RepetitionExperiment::new(
            args.d,
            args.p,
            RepetitionNoise::FlipBeforeOracle,
            MemoryFunction::identity_bit(),
        )?;
        let report = if args.d <= qec::ENUMERATION_MAX_D {
            qec::encoded_oracle_flip_model(&exp)?
        } else {
            qec::encoded_oracle_flip_model_mc(&exp, args.trials, args.seed)?
        };
        writeln!(text, "d,p,p_logical,envelope,trials").unwrap();
        writeln!(
            text,
            "{},{},{},{},{}",
            args.d, args.p, report.p_logical, report.envelope, report.trials
        )
        .unwrap();
        return Ok(text);
    }

    if args.required_distance {
        let d = qec::required_distance(args.delta, args.p)?;
        writeln!(text, "delta,p,d").unwrap();
        writeln!(text, "{},{},{}", args.delta, args.p, d).unwrap();
        return Ok(text);
    }

    // Encoded search.
    let report = encoded_grover_experiment(args.n, args.p)?;
    writeln!(
        text,
        "n,d,p_logical,T,noisy_success,perfect_success,query_overhead"
    )
    .unwrap();
    writeln!(
        text,
        "{},{},{},{},{},{},{}",
        report.n,
        report.d,
        report.p_logical,
        report.iterations,
        report.noisy_success,
        report.perfect_success,
        report.query_overhead
    )
    .unwrap();
    Ok(text)
}

fn cmd_css(args: &CssArgs) -> Result<String, AppError> {
    let code = match (&args.code, &args.file) {
        (Some(name), None) => qec::builtin_code(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::usage(format!("cannot read {}: {e}", path.display())))?;
            qec::parse_parity_check_file(&text)?
        }
        _ => {
            return Err(AppError::usage(
                "exactly one of --code or --file is required".into(),
            ))
        }
    };

    let mut text = String::new();
    if args.validate || (!args.balance && args.expand.is_none()) {
        writeln!(
            text,
            "n={} k_x={} k_z={} logical_qubits={} deduplicated={}",
            code.n_code(),
            code.k_x(),
            code.k_z(),
            code.logical_count(),
            code.deduplicated
        )
        .unwrap();
    }
    if let Some(bits) = &args.expand {
        if bits.len() != code.n_code() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(AppError::usage(format!(
                "--expand wants a {}-bit string",
                code.n_code()
            )));
        }
        let c = bits
            .chars()
            .enumerate()
            .fold(0u64, |acc, (i, ch)| acc | ((ch == '1') as u64) << i);
        let expansion = code.codestate(c)?;
        writeln!(
            text,
            "terms={} amplitude={}",
            expansion.terms.len(),
            expansion.amplitude
        )
        .unwrap();
        for term in &expansion.terms {
            let bits: String = (0..code.n_code())
                .map(|i| if term >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            writeln!(text, "{bits}").unwrap();
        }
    }
    if args.balance {
        let report = code.balance_report()?;
        writeln!(
            text,
            "logicals={} uncovered_positions={}",
            report.logicals.len(),
            if report.uncovered_positions.is_empty() {
                "none".to_string()
            } else {
                report
                    .uncovered_positions
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(";")
            }
        )
        .unwrap();
        for pos in 0..code.n_code() {
            let cells: Vec<String> = report
                .logicals
                .iter()
                .map(|l| format!("{} of {}", l.excitations[pos], l.term_count))
                .collect();
            writeln!(text, "position {pos}: {}", cells.join(" | ")).unwrap();
        }
    }
    Ok(text)
}
