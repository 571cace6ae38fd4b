//! `pdlcomp`: single evaluations and parameter sweeps from the command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use pdlcomp::detector::{Detector, DetectorSpec};
use pdlcomp::fock::{PolarizationQubit, DEFAULT_CUTOFF};
use pdlcomp::metrics::t_h_from_db;
use pdlcomp::schemes::{Scheme, SchemeConfig, TSetting, TStrategy};
use pdlcomp::sweep::{self, OutputFormat, SweepSpec, SweepVariable};
use pdlcomp::Error;

/// Environment variable naming the directory sweeps are written to when
/// `--out` is not given.
const OUT_DIR_VAR: &str = "PDLCOMP_OUT_DIR";

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pdlcomp",
    version,
    about = "Polarization-dependent loss compensation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scheme at one operating point and print a JSON record.
    Single(SingleArgs),
    /// Sweep PDL or detector efficiency and write CSV or JSON.
    Sweep(SweepArgs),
    /// List the built-in sweeps.
    Presets,
}

#[derive(Args, Default)]
struct Common {
    /// Horizontal amplitude, `re,im` or a real number.
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<String>,
    /// Vertical amplitude, `re,im` or a real number.
    #[arg(long, allow_hyphen_values = true)]
    c2: Option<String>,
    /// Detector efficiency; omit for ideal detectors.
    #[arg(long)]
    eta: Option<f64>,
    /// Dark-count probability per detection window.
    #[arg(long)]
    dark: Option<f64>,
    /// Correction parameter: a number in [0, 1] or `auto`.
    #[arg(long = "T")]
    t: Option<String>,
    /// How `auto` picks the amplifier T with imperfect detectors.
    #[arg(long, value_parser = ["fidelity", "balance", "fixed-ideal"])]
    t_strategy: Option<String>,
    /// Occupation levels kept per optical mode.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Output file (`-` for stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SingleArgs {
    #[arg(long, value_parser = ["uncorrected", "passive", "noiseless-att", "amplification"])]
    scheme: String,
    /// PDL in dB (sets t_h = 10^(-dB/10)).
    #[arg(long, conflicts_with = "t_h", allow_hyphen_values = true)]
    pdl_db: Option<f64>,
    /// Horizontal transmission.
    #[arg(long)]
    t_h: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    preset: Option<String>,
    /// `key = value` file applied after the preset and before flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["pdl_db", "eta"])]
    variable: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated scheme names.
    #[arg(long)]
    schemes: Option<String>,
    /// Fixed PDL when sweeping efficiency.
    #[arg(long, allow_hyphen_values = true)]
    pdl_db: Option<f64>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Also write a gnuplot script for this column next to the output.
    #[arg(long, value_parser = ["acceptance", "fidelity"])]
    plot_script: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Single(args) => cmd_single(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Presets => cmd_presets(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidState(_)
            | Error::ZeroProbabilityEvent(_)
            | Error::DivergentThermalMean { .. }
            | Error::CutoffExceeded { .. }
            | Error::DegenerateState,
        ) => EXIT_NUMERIC,
        Some(Error::Io(_)) => 1,
        _ => EXIT_USAGE,
    }
}

fn qubit(common: &Common) -> anyhow::Result<PolarizationQubit> {
    let default = PolarizationQubit::balanced();
    let c1 = common
        .c1
        .as_deref()
        .map(sweep::parse_complex)
        .transpose()?
        .unwrap_or(default.c1);
    let c2 = common
        .c2
        .as_deref()
        .map(sweep::parse_complex)
        .transpose()?
        .unwrap_or(default.c2);
    Ok(PolarizationQubit::normalized(c1, c2)?)
}

fn cmd_single(args: SingleArgs) -> anyhow::Result<()> {
    let c = &args.common;
    let t_h = match (args.pdl_db, args.t_h) {
        (_, Some(t_h)) => t_h,
        (Some(db), None) => t_h_from_db(db)?,
        (None, None) => 1.0,
    };
    let detector = match (c.eta, c.dark) {
        (Some(eta), dark) => Detector::Imperfect(DetectorSpec::new(eta, dark.unwrap_or(0.0))?),
        (None, Some(_)) => bail!(Error::InvalidParameter("--dark needs --eta".into())),
        (None, None) => Detector::Ideal,
    };
    let mut config = SchemeConfig::new(qubit(c)?, t_h)
        .with_detector(detector)
        .with_cutoff(c.cutoff.unwrap_or(DEFAULT_CUTOFF));
    if let Some(t) = &c.t {
        config = config.with_t(t.parse::<TSetting>()?);
    }
    if let Some(s) = &c.t_strategy {
        config = config.with_strategy(s.parse::<TStrategy>()?);
    }
    let scheme: Scheme = args.scheme.parse()?;
    let record = sweep::single_record(scheme, &config)?;
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    emit(c.out.as_deref(), &text)
}

fn build_spec(args: &SweepArgs) -> anyhow::Result<SweepSpec> {
    let mut spec = match &args.preset {
        Some(name) => sweep::preset(name)?,
        None => SweepSpec::default(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        spec = sweep::parse_config(&text, spec)?;
    }
    let c = &args.common;
    let mut set = |key: &str, value: Option<String>| -> anyhow::Result<()> {
        if let Some(v) = value {
            spec.set(key, &v)?;
        }
        Ok(())
    };
    set("variable", args.variable.clone())?;
    set("start", args.start.map(|v| v.to_string()))?;
    set("stop", args.stop.map(|v| v.to_string()))?;
    set("steps", args.steps.map(|v| v.to_string()))?;
    set("schemes", args.schemes.clone())?;
    set("pdl_db", args.pdl_db.map(|v| v.to_string()))?;
    set("format", args.format.clone())?;
    set("c1", c.c1.clone())?;
    set("c2", c.c2.clone())?;
    set("eta", c.eta.map(|v| v.to_string()))?;
    set("dark", c.dark.map(|v| v.to_string()))?;
    set("T", c.t.clone())?;
    set("t_strategy", c.t_strategy.clone())?;
    set("cutoff", c.cutoff.map(|v| v.to_string()))?;
    if let Some(out) = &c.out {
        spec.output = Some(out.clone());
    }
    spec.normalize_qubit()?;
    if spec.variable == SweepVariable::Eta && spec.eta.is_some() {
        bail!(Error::InvalidParameter(
            "--eta is fixed by the sweep variable `eta`".into()
        ));
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let spec = build_spec(&args)?;
    let rows = sweep::run_sweep(&spec)?;
    let text = sweep::render(&rows, spec.format)?;
    let target = spec.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_VAR).map(|dir| {
            let stem = args.preset.as_deref().unwrap_or("sweep");
            Path::new(&dir).join(format!("{stem}.{}", spec.format.extension()))
        })
    });
    emit(target.as_deref(), &text)?;
    if let Some(column) = &args.plot_script {
        let Some(data) = target.as_deref().filter(|p| *p != Path::new("-")) else {
            bail!(Error::InvalidParameter("--plot-script needs an output file".into()));
        };
        if spec.format != OutputFormat::Csv {
            bail!(Error::InvalidParameter("--plot-script needs CSV output".into()));
        }
        let script = sweep::gnuplot_script(&spec, data, column)?;
        let path = data.with_extension("gp");
        sweep::write_output(&path, &script)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_presets() -> anyhow::Result<()> {
    for name in sweep::PRESETS {
        println!("{name:6} {}", sweep::preset_description(name));
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
        Some(p) if p == Path::new("-") => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
        Some(p) => {
            sweep::write_output(p, text)?;
            eprintln!("wrote {}", p.display());
            Ok(())
        }
    }
}
