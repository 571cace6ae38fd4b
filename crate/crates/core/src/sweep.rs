//! Parameter sweeps over PDL or detector efficiency, with deterministic CSV
//! and JSON output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::detector::{Detector, DetectorSpec};
use crate::error::{invalid, Error, Result};
use crate::fock::{PolarizationQubit, C64, DEFAULT_CUTOFF};
use crate::metrics::t_h_from_db;
use crate::schemes::{oracle_delta, run, Scheme, SchemeConfig, TSetting, TStrategy};

pub const CSV_HEADER: &str = "x,scheme,acceptance,fidelity,T_used,oracle_delta,flag";

/// Significant digits of every number written to CSV.
pub const CSV_DIGITS: usize = 12;

/// Dark-count probability used by the efficiency preset.
pub const PRESET_DARK_COUNT: f64 = 4e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    PdlDb,
    Eta,
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdl_db" | "pdl-db" => Ok(SweepVariable::PdlDb),
            "eta" => Ok(SweepVariable::Eta),
            _ => Err(invalid(format!("unknown sweep variable `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(invalid(format!("unknown output format `{s}`"))),
        }
    }
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub qubit: PolarizationQubit,
    /// PDL when sweeping efficiency.
    pub pdl_db: f64,
    /// Detector efficiency when sweeping PDL; `None` means ideal detectors.
    pub eta: Option<f64>,
    pub dark_count: f64,
    pub t: TSetting,
    pub strategy: TStrategy,
    pub cutoff: usize,
    pub schemes: Vec<Scheme>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            variable: SweepVariable::PdlDb,
            start: 0.0,
            stop: 10.0,
            steps: 101,
            qubit: PolarizationQubit::balanced(),
            pdl_db: 3.0,
            eta: None,
            dark_count: 0.0,
            t: TSetting::Auto,
            strategy: TStrategy::default(),
            cutoff: DEFAULT_CUTOFF,
            schemes: Scheme::ALL.to_vec(),
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

pub const PRESETS: [&str; 3] = ["fig3", "fig4", "fig6"];

/// Built-in sweeps: acceptance and fidelity versus PDL with ideal
/// detectors, and fidelity versus detector efficiency at 3 dB.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let base = SweepSpec::default();
    match name {
        "fig3" => Ok(SweepSpec {
            schemes: vec![Scheme::Passive, Scheme::NoiselessAttenuation, Scheme::Amplification],
            ..base
        }),
        "fig4" => Ok(base),
        "fig6" => Ok(SweepSpec {
            variable: SweepVariable::Eta,
            start: 0.01,
            stop: 1.0 - 1e-4,
            steps: 100,
            pdl_db: 3.0,
            dark_count: PRESET_DARK_COUNT,
            schemes: vec![Scheme::Passive, Scheme::NoiselessAttenuation, Scheme::Amplification],
            ..base
        }),
        _ => Err(invalid(format!(
            "unknown preset `{name}` (known: {})",
            PRESETS.join(", ")
        ))),
    }
}

pub fn preset_description(name: &str) -> &'static str {
    match name {
        "fig3" => "acceptance vs PDL 0-10 dB, passive / noiseless-att / amplification, ideal detectors",
        "fig4" => "fidelity vs PDL 0-10 dB, all four schemes, ideal detectors",
        "fig6" => "fidelity vs detector efficiency 0.01-0.9999 at 3 dB, dark count 4e-5",
        _ => "",
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(invalid(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start > self.stop {
            return Err(invalid(format!("bad range [{}, {}]", self.start, self.stop)));
        }
        if self.schemes.is_empty() {
            return Err(invalid("no schemes selected"));
        }
        match self.variable {
            SweepVariable::PdlDb => {
                if self.start < 0.0 {
                    return Err(invalid("PDL range must be non-negative"));
                }
                if let Some(eta) = self.eta {
                    DetectorSpec::new(eta, self.dark_count)?;
                }
            }
            SweepVariable::Eta => {
                t_h_from_db(self.pdl_db)?;
                DetectorSpec::new(self.start, self.dark_count)?;
                DetectorSpec::new(self.stop, self.dark_count)?;
            }
        }
        Ok(())
    }

    /// Abscissae in ascending order; the last one is exactly `stop`.
    pub fn xs(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Scheme configuration at abscissa `x`.
    pub fn config_at(&self, x: f64) -> Result<SchemeConfig> {
        let (pdl_db, eta) = match self.variable {
            SweepVariable::PdlDb => (x, self.eta),
            SweepVariable::Eta => (self.pdl_db, Some(x)),
        };
        let detector = match eta {
            Some(eta) => Detector::Imperfect(DetectorSpec::new(eta, self.dark_count)?),
            None => Detector::Ideal,
        };
        Ok(SchemeConfig::new(self.qubit, t_h_from_db(pdl_db)?)
            .with_t(self.t)
            .with_detector(detector)
            .with_cutoff(self.cutoff)
            .with_strategy(self.strategy))
    }

    /// Sets one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: Error| invalid(format!("bad value for `{key}`: {e}"));
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| invalid(format!("bad value for `{key}`: `{v}` is not a number")))
        };
        match key {
            "variable" => self.variable = value.parse().map_err(bad)?,
            "start" => self.start = num(value)?,
            "stop" => self.stop = num(value)?,
            "steps" => {
                self.steps = value
                    .parse()
                    .map_err(|_| invalid(format!("bad value for `{key}`: `{value}` is not a count")))?
            }
            "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(|s| s.trim().parse::<Scheme>())
                    .collect::<Result<_>>()
                    .map_err(bad)?
            }
            "c1" => {
                let c = parse_complex(value).map_err(bad)?;
                self.qubit.c1 = c;
            }
            "c2" => {
                let c = parse_complex(value).map_err(bad)?;
                self.qubit.c2 = c;
            }
            "pdl_db" => self.pdl_db = num(value)?,
            "eta" => {
                self.eta = match value {
                    "ideal" => None,
                    v => Some(num(v)?),
                }
            }
            "dark" => self.dark_count = num(value)?,
            "T" => self.t = value.parse().map_err(bad)?,
            "t_strategy" => self.strategy = value.parse().map_err(bad)?,
            "cutoff" => {
                self.cutoff = value
                    .parse()
                    .map_err(|_| invalid(format!("bad value for `{key}`: `{value}` is not a count")))?
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = value.parse().map_err(bad)?,
            _ => return Err(invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Rescales the qubit amplitudes after `c1`/`c2` were set separately.
    pub fn normalize_qubit(&mut self) -> Result<()> {
        self.qubit = PolarizationQubit::normalized(self.qubit.c1, self.qubit.c2)?;
        Ok(())
    }
}

/// Parses `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<C64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| invalid(format!("`{s}` is not `re,im`")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(invalid(format!("`{s}` is not `re,im`"))),
    }
}

/// Parses `key = value` lines on top of `base`. Blank lines and `#`
/// comments are ignored; a `preset` key replaces everything set so far.
pub fn parse_config(text: &str, base: SweepSpec) -> Result<SweepSpec> {
    let mut spec = base;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line: n + 1, message };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected `key = value`, got `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "preset" {
            spec = preset(value).map_err(|e| err(e.to_string()))?;
            continue;
        }
        spec.set(key, value).map_err(|e| err(strip_prefix(e)))?;
    }
    spec.normalize_qubit()?;
    Ok(spec)
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::InvalidParameter(m) => m,
        other => other.to_string(),
    }
}

pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, SweepSpec::default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub scheme: Scheme,
    pub acceptance: Option<f64>,
    pub fidelity: Option<f64>,
    #[serde(rename = "T_used")]
    pub t_used: Option<f64>,
    pub oracle_delta: Option<f64>,
    pub flag: Option<String>,
}

fn evaluate(spec: &SweepSpec, x: f64, scheme: Scheme) -> Result<SweepRow> {
    let config = spec.config_at(x)?;
    match run(scheme, &config) {
        Ok(r) => Ok(SweepRow {
            x,
            scheme,
            acceptance: Some(r.acceptance_probability),
            fidelity: Some(r.fidelity),
            t_used: r.t_used,
            oracle_delta: oracle_delta(&r, &config)?,
            flag: r.flag.clone(),
        }),
        Err(Error::ZeroProbabilityEvent(p)) => Ok(SweepRow {
            x,
            scheme,
            acceptance: Some(p.max(0.0)),
            fidelity: None,
            t_used: None,
            oracle_delta: None,
            flag: Some("zero-probability".into()),
        }),
        Err(e) => Err(e),
    }
}

/// Evaluates every `(x, scheme)` pair in parallel; rows come back ordered by
/// `x`, then by the order of `spec.schemes`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let jobs: Vec<(f64, Scheme)> = spec
        .xs()
        .into_iter()
        .flat_map(|x| spec.schemes.iter().map(move |&s| (x, s)))
        .collect();
    jobs.into_par_iter().map(|(x, s)| evaluate(spec, x, s)).collect()
}

/// `%g`-style rendering with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format_sig(v, CSV_DIGITS)).unwrap_or_default()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            format_sig(r.x, CSV_DIGITS),
            r.scheme,
            cell(r.acceptance),
            cell(r.fidelity),
            cell(r.t_used),
            cell(r.oracle_delta),
            r.flag.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn to_json(rows: &[SweepRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Io(e.to_string()))
}

pub fn render(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(rows)),
        OutputFormat::Json => to_json(rows).map(|mut s| {
            s.push('\n');
            s
        }),
    }
}

pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// gnuplot script plotting `column` (`acceptance` or `fidelity`) of a sweep
/// CSV, one curve per scheme.
pub fn gnuplot_script(spec: &SweepSpec, csv: &Path, column: &str) -> Result<String> {
    let col = match column {
        "acceptance" => 3,
        "fidelity" => 4,
        _ => return Err(invalid(format!("cannot plot column `{column}`"))),
    };
    let xlabel = match spec.variable {
        SweepVariable::PdlDb => "PDL (dB)",
        SweepVariable::Eta => "detector efficiency",
    };
    let file = csv.display();
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel '{column}'");
    let curves: Vec<String> = spec
        .schemes
        .iter()
        .map(|sc| format!("'{file}' using 1:(strcol(2) eq '{sc}' ? ${col} : 1/0) with lines title '{sc}'"))
        .collect();
    let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
    Ok(s)
}

/// Record printed by a single evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleRecord {
    pub scheme: Scheme,
    pub t_h: f64,
    #[serde(rename = "T_used")]
    pub t_used: Option<f64>,
    pub acceptance: f64,
    pub fidelity: f64,
    pub vacuum_weight: f64,
    pub two_photon_weight: f64,
    pub oracle_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

pub fn single_record(scheme: Scheme, config: &SchemeConfig) -> Result<SingleRecord> {
    let r = run(scheme, config)?;
    Ok(SingleRecord {
        scheme,
        t_h: config.t_h,
        t_used: r.t_used,
        acceptance: r.acceptance_probability,
        fidelity: r.fidelity,
        vacuum_weight: r.vacuum_weight(),
        two_photon_weight: r.two_photon_weight(),
        oracle_delta: oracle_delta(&r, config)?,
        flag: r.flag.clone(),
    })
}
