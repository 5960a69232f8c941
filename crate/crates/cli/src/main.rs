mod render;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dtc_core::analysis::{
    AnalysisConfig, VisibilityReport, DEFAULT_SPAM_TOLERANCE, DEFAULT_THRESHOLD,
};
use dtc_core::coverage::{greedy_cover, CoverOptions, DEFAULT_PATH_CAP, DEFAULT_RESTARTS};
use dtc_core::dtc::{CircuitFamily, DtcParams, DEFAULT_G, DEFAULT_N_MAX};
use dtc_core::harness::{
    export_for_hardware, import_counts, load_bundle_runs, resolve_map, resolve_noise,
    run_characterization, scan_faulty, write_report, Backend, RunConfig, ScanPolicy,
};
use dtc_core::noise::InteractionNoise;
use dtc_core::par::Schedule;
use dtc_core::qasm::{export_family, ExportFormat};
use dtc_core::{Error, Result};

use render::Format;

#[derive(Parser)]
#[command(
    name = "dtcbench",
    version,
    about = "Characterize quantum processors with discrete-time-crystal circuits"
)]
struct Cli {
    /// Seed of the DTC phase sampler.
    #[arg(long, global = true, default_value_t = 12345)]
    seed: u64,
    /// Seed for shot sampling and trajectories.
    #[arg(long, global = true, default_value_t = 0)]
    exec_seed: u64,
    /// Directory for written artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of what is printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a circuit family and optionally write its OpenQASM files.
    Gen(GenArgs),
    /// Describe a coupling map.
    Topo(TopoArgs),
    /// Build a covering set of chain layouts.
    Cover(CoverArgs),
    /// Run a full characterization.
    Run(RunArgs),
    /// Adaptive scan for faulty qubits.
    Scan(ScanArgs),
    /// Write per-layout circuits for an external device.
    Export(RunArgs),
    /// Analyze counts produced externally for an export.
    ImportCounts(ImportArgs),
    /// Re-analyze the traces of a bundle.
    Analyze(AnalyzeArgs),
    /// Print the report stored in a bundle.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, default_value_t = DEFAULT_G)]
    g: f64,
    /// Largest cycle count in the family.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    cycles: usize,
    #[arg(long, default_value = "qasm3")]
    export_format: String,
}

#[derive(Args)]
struct TopoArgs {
    /// Builtin topology (falcon-27, hummingbird-65, eagle-127, line-N, ring-N) or a JSON file.
    #[arg(long)]
    map: String,
}

#[derive(Args)]
struct CoverFlags {
    /// Path-enumeration cap before switching to the randomized builder.
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: usize,
    /// Randomized candidates per greedy round.
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Seed of the randomized layout builder.
    #[arg(long, default_value_t = 0)]
    cover_seed: u64,
}

impl CoverFlags {
    fn options(&self, schedule: Schedule) -> CoverOptions {
        CoverOptions {
            cap: self.cap,
            seed: self.cover_seed,
            restarts: self.restarts,
            schedule,
        }
    }
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    map: String,
    /// Chain length.
    #[arg(long)]
    chain: usize,
    #[command(flatten)]
    cover: CoverFlags,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    map: String,
    /// Chain length.
    #[arg(long, alias = "qubits")]
    chain: usize,
    #[arg(long, default_value_t = DEFAULT_G)]
    g: f64,
    /// Horizon: largest cycle count executed.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    cycles: usize,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// Shots per circuit; omit for exact expectation values.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trajectories: u64,
    /// Noise file or `uniform:EPS[,GAMMA]`.
    #[arg(long, default_value = "uniform:0")]
    noise: String,
    /// Override where two-qubit noise attaches.
    #[arg(long, value_enum)]
    interaction: Option<InteractionArg>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SPAM_TOLERANCE)]
    spam_tolerance: f64,
    /// Draw separate phases per layout instead of one shared unitary.
    #[arg(long)]
    reseed_per_layout: bool,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    cover: CoverFlags,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Cycles per batch.
    #[arg(long, default_value_t = 10)]
    batch: usize,
    /// Qubits with at most this many visible cycles are faulty.
    #[arg(long)]
    fault_cutoff: usize,
    /// Keep extending layouts until every qubit crosses the threshold.
    #[arg(long)]
    no_stop_on_fault: bool,
}

#[derive(Args)]
struct ImportArgs {
    /// Directory written by `export`.
    #[arg(long)]
    export: PathBuf,
    /// Directory holding `layout_{k}/n_{n}.json` counts.
    #[arg(long)]
    counts: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SPAM_TOLERANCE)]
    spam_tolerance: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Bundle directory written by `run` or `import-counts`.
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_SPAM_TOLERANCE)]
    spam_tolerance: f64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    bundle: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Trajectory,
    Export,
}

#[derive(Clone, Copy, ValueEnum)]
enum InteractionArg {
    Aggregate,
    PerCnot,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dtcbench: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Uncoverable { .. } => 3,
        Error::Executor(_) => 4,
        _ => 2,
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => gen(cli, args),
        Command::Topo(args) => {
            let map = resolve_map(&args.map)?;
            if let Some(out) = &cli.out {
                write(&out.join(format!("{}.json", map.name)), &map.to_json())?;
            }
            print(render::topology(&map, cli.format));
            Ok(())
        }
        Command::Cover(args) => {
            let map = resolve_map(&args.map)?;
            let cover = greedy_cover(
                &map,
                args.chain,
                &args.cover.options(schedule(args.sequential)),
            )?;
            if let Some(out) = &cli.out {
                write(&out.join("cover.json"), &cover.to_json())?;
            }
            print(render::cover(&map, &cover, cli.format));
            cover.require_complete()
        }
        Command::Run(args) => {
            let config = run_config(cli, args)?;
            if config.backend == Backend::Export {
                return export(cli, &config);
            }
            let outcome = run_characterization(&config, cli.out.as_deref())?;
            print(render::report(&outcome.report, cli.format));
            Ok(())
        }
        Command::Export(args) => {
            let mut config = run_config(cli, args)?;
            config.backend = Backend::Export;
            export(cli, &config)
        }
        Command::Scan(args) => {
            let config = run_config(cli, &args.run)?;
            let mut policy = ScanPolicy::new(args.fault_cutoff);
            policy.batch = args.batch;
            policy.stop_on_fault = !args.no_stop_on_fault;
            let report = scan_faulty(&config, &policy, cli.out.as_deref())?;
            print(match cli.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Md => report.to_markdown(),
            });
            Ok(())
        }
        Command::ImportCounts(args) => {
            let analysis = analysis(args.threshold, args.spam_tolerance);
            let (_, report) =
                import_counts(&args.export, &args.counts, &analysis, cli.out.as_deref())?;
            print(render::report(&report, cli.format));
            Ok(())
        }
        Command::Analyze(args) => {
            let runs = load_bundle_runs(&args.bundle)?;
            let report =
                VisibilityReport::build(&runs, &analysis(args.threshold, args.spam_tolerance))?;
            if let Some(out) = &cli.out {
                write_report(out, &runs, &report)?;
            }
            print(render::report(&report, cli.format));
            Ok(())
        }
        Command::Report(args) => {
            let name = match cli.format {
                Format::Json => "report.json",
                Format::Csv => "report.csv",
                Format::Md => "report.md",
            };
            let path = args.bundle.join(name);
            print(fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?);
            Ok(())
        }
    }
}

fn gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    let format: ExportFormat = args.export_format.parse()?;
    let params = DtcParams::new(args.qubits, cli.seed)
        .with_g(args.g)
        .with_n_max(args.cycles);
    let family = CircuitFamily::generate(&params)?;
    if let Some(out) = &cli.out {
        export_family(&family, format, out)?;
    }
    print(render::family(&family, cli.format));
    Ok(())
}

fn export(cli: &Cli, config: &RunConfig) -> Result<()> {
    let out = cli.out.as_deref().ok_or_else(|| Error::Invalid {
        what: "output directory",
        reason: "export needs --out".into(),
    })?;
    let manifest = export_for_hardware(config, out)?;
    print(match cli.format {
        Format::Json => manifest.to_json(),
        _ => render::export_summary(&manifest, out),
    });
    Ok(())
}

fn schedule(sequential: bool) -> Schedule {
    if sequential {
        Schedule::Sequential
    } else {
        Schedule::default()
    }
}

fn analysis(threshold: f64, spam_tolerance: f64) -> AnalysisConfig {
    AnalysisConfig {
        spam_tolerance,
        ..AnalysisConfig::default().with_threshold(threshold)
    }
}

fn run_config(cli: &Cli, args: &RunArgs) -> Result<RunConfig> {
    let params = DtcParams::new(args.chain, cli.seed)
        .with_g(args.g)
        .with_n_max(args.cycles);
    let mut noise = resolve_noise(&args.noise)?;
    if let Some(i) = args.interaction {
        noise = noise.with_interaction(match i {
            InteractionArg::Aggregate => InteractionNoise::Aggregate,
            InteractionArg::PerCnot => InteractionNoise::PerCnot,
        });
    }
    let mut config = RunConfig::new(params, resolve_map(&args.map)?);
    config.noise = noise;
    config.backend = match args.backend {
        BackendArg::Exact => Backend::Exact,
        BackendArg::Trajectory => Backend::Trajectory,
        BackendArg::Export => Backend::Export,
    };
    config.shots = args.shots;
    config.trajectories = args.trajectories;
    config.exec_seed = cli.exec_seed;
    config.analysis = analysis(args.threshold, args.spam_tolerance);
    config.schedule = schedule(args.sequential);
    config.cover = args.cover.options(config.schedule);
    config.reseed_per_layout = args.reseed_per_layout;
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print(mut text: String) {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    // A closed pipe (`dtcbench ... | head`) is not an error.
    let _ = io::stdout().lock().write_all(text.as_bytes());
}
