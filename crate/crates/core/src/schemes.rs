//! End-to-end pipelines: PDL on the horizontal mode, optionally followed by
//! one of three corrections.
//!
//! Amplifier wiring: an ancilla photon enters mode `kept` and vacuum enters
//! `arm`; BS(T) couples `kept` and `arm`; a 50:50 splitter couples the
//! attenuated `H` with `arm`; the heralding pattern is one photon on `arm`
//! and none on `H`. The transmitted ancilla mode `kept` becomes the new `H`,
//! and `V` bypasses the whole module.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::detector::Detector;
use crate::error::{invalid, Error, Result};
use crate::fock::{
    DensityOperator, OccupationBasisState as Occ, PolarizationQubit, C64, DEFAULT_CUTOFF, MODE_H, MODE_V,
    PROBABILITY_EPSILON,
};
use crate::metrics::fidelity;
use crate::optics::{apply_pdl, beam_splitter_unitary, scratch_label, PdlElement};
use crate::oracle::{self, OracleState};
use crate::search::{bisect, golden_section_max, SEARCH_TOL};

/// Smallest detector efficiency for which the amplifier closed form is
/// evaluated.
pub const AMP_ORACLE_MIN_EFFICIENCY: f64 = 0.01;

/// Occupation levels that hold every photon the circuits can produce.
const EXACT_CUTOFF: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Uncorrected,
    Passive,
    #[serde(rename = "noiseless-att")]
    NoiselessAttenuation,
    Amplification,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Uncorrected,
        Scheme::Passive,
        Scheme::NoiselessAttenuation,
        Scheme::Amplification,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Uncorrected => "uncorrected",
            Scheme::Passive => "passive",
            Scheme::NoiselessAttenuation => "noiseless-att",
            Scheme::Amplification => "amplification",
        }
    }

    pub fn is_heralded(&self) -> bool {
        matches!(self, Scheme::NoiselessAttenuation | Scheme::Amplification)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown scheme `{s}`")))
    }
}

/// Correction parameter `T`: chosen by the scheme's rule, or given.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum TSetting {
    #[default]
    Auto,
    Explicit(f64),
}

impl FromStr for TSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(TSetting::Auto);
        }
        s.parse::<f64>()
            .map(TSetting::Explicit)
            .map_err(|_| invalid(format!("T must be a number or `auto`, got `{s}`")))
    }
}

/// How the amplifier's `T` is chosen when it is `auto` and the detectors are
/// imperfect. With ideal detectors every strategy gives `1 / (1 + t_h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TStrategy {
    /// Maximize the conditioned fidelity.
    Fidelity,
    /// Equalize the heralded single-photon weights of `|H>` and `|V>` inputs.
    #[default]
    Balance,
    /// Keep the ideal-detector value.
    FixedIdeal,
}

impl TStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            TStrategy::Fidelity => "fidelity",
            TStrategy::Balance => "balance",
            TStrategy::FixedIdeal => "fixed-ideal",
        }
    }
}

impl FromStr for TStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TStrategy::Fidelity, TStrategy::Balance, TStrategy::FixedIdeal]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown T strategy `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub qubit: PolarizationQubit,
    pub t_h: f64,
    pub t: TSetting,
    pub detector: Detector,
    pub cutoff: usize,
    pub strategy: TStrategy,
}

impl SchemeConfig {
    /// Ideal detectors, automatic `T`, default cutoff.
    pub fn new(qubit: PolarizationQubit, t_h: f64) -> Self {
        Self {
            qubit,
            t_h,
            t: TSetting::Auto,
            detector: Detector::Ideal,
            cutoff: DEFAULT_CUTOFF,
            strategy: TStrategy::default(),
        }
    }

    pub fn with_t(mut self, t: TSetting) -> Self {
        self.t = t;
        self
    }

    pub fn with_detector(mut self, detector: Detector) -> Self {
        self.detector = detector;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_strategy(mut self, strategy: TStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_h > 0.0 && self.t_h <= 1.0) {
            return Err(invalid(format!("t_h = {} outside (0, 1]", self.t_h)));
        }
        if let TSetting::Explicit(t) = self.t {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid(format!("T = {t} outside [0, 1]")));
            }
        }
        if self.cutoff < EXACT_CUTOFF {
            return Err(invalid(format!("cutoff {} is below {EXACT_CUTOFF}", self.cutoff)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SchemeResult {
    pub scheme: Scheme,
    /// `None` for the uncorrected pipeline.
    pub t_used: Option<f64>,
    pub unnormalized_output: DensityOperator,
    pub acceptance_probability: f64,
    pub conditioned_output: DensityOperator,
    pub fidelity: f64,
    /// Diagnostic from the `T` search, if any.
    pub flag: Option<String>,
}

impl SchemeResult {
    pub fn vacuum_weight(&self) -> f64 {
        self.conditioned_output
            .element(&Occ::from([0, 0]), &Occ::from([0, 0]))
            .map_or(0.0, |z| z.re)
    }

    /// Weight of one horizontal plus one vertical photon.
    pub fn two_photon_weight(&self) -> f64 {
        self.conditioned_output
            .element(&Occ::from([1, 1]), &Occ::from([1, 1]))
            .map_or(0.0, |z| z.re)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TChoice {
    pub t: f64,
    pub flag: Option<String>,
}

pub fn run(scheme: Scheme, config: &SchemeConfig) -> Result<SchemeResult> {
    match scheme {
        Scheme::Uncorrected => run_uncorrected(config),
        Scheme::Passive => run_passive_attenuation(config),
        Scheme::NoiselessAttenuation => run_noiseless_attenuation(config),
        Scheme::Amplification => run_noiseless_amplification(config),
    }
}

fn after_pdl(qubit: &PolarizationQubit, t_h: f64, cutoff: usize) -> Result<DensityOperator> {
    apply_pdl(&qubit.density(cutoff)?, MODE_H, MODE_V, &PdlElement::horizontal(t_h)?)
}

fn finish(
    scheme: Scheme,
    config: &SchemeConfig,
    t_used: Option<f64>,
    output: DensityOperator,
    flag: Option<String>,
) -> Result<SchemeResult> {
    let acceptance = if scheme.is_heralded() {
        let p = output.trace();
        if p <= PROBABILITY_EPSILON {
            return Err(Error::ZeroProbabilityEvent(p));
        }
        p
    } else {
        1.0
    };
    let conditioned = output.normalize()?;
    let f = fidelity(&conditioned, &config.qubit.density(config.cutoff)?)?.fidelity;
    Ok(SchemeResult {
        scheme,
        t_used,
        unnormalized_output: output,
        acceptance_probability: acceptance,
        conditioned_output: conditioned,
        fidelity: f,
        flag,
    })
}

pub fn run_uncorrected(config: &SchemeConfig) -> Result<SchemeResult> {
    config.validate()?;
    let out = after_pdl(&config.qubit, config.t_h, config.cutoff)?;
    finish(Scheme::Uncorrected, config, None, out, None)
}

pub fn run_passive_attenuation(config: &SchemeConfig) -> Result<SchemeResult> {
    config.validate()?;
    let t = match config.t {
        TSetting::Auto => choose_t_attenuation(config.t_h)?,
        TSetting::Explicit(t) => t,
    };
    let out = apply_pdl(
        &config.qubit.density(config.cutoff)?,
        MODE_H,
        MODE_V,
        &PdlElement::new(config.t_h, t)?,
    )?;
    finish(Scheme::Passive, config, Some(t), out, None)
}

pub fn run_noiseless_attenuation(config: &SchemeConfig) -> Result<SchemeResult> {
    config.validate()?;
    let t = match config.t {
        TSetting::Auto => choose_t_attenuation(config.t_h)?,
        TSetting::Explicit(t) => t,
    };
    let state = after_pdl(&config.qubit, config.t_h, config.cutoff)?;
    let out = attenuator_circuit(&state, t, &config.detector)?;
    finish(Scheme::NoiselessAttenuation, config, Some(t), out, None)
}

pub fn run_noiseless_amplification(config: &SchemeConfig) -> Result<SchemeResult> {
    config.validate()?;
    let choice = match config.t {
        TSetting::Auto => choose_t_amplifier(config)?,
        TSetting::Explicit(t) => TChoice { t, flag: None },
    };
    let state = after_pdl(&config.qubit, config.t_h, config.cutoff)?;
    let out = amplifier_circuit(&state, choice.t, &config.detector)?;
    finish(Scheme::Amplification, config, Some(choice.t), out, choice.flag)
}

/// BS(T) between `V` and a vacuum ancilla, heralded on an empty ancilla.
pub fn attenuator_circuit(state: &DensityOperator, t: f64, detector: &Detector) -> Result<DensityOperator> {
    let cutoff = state.registry().cutoff(MODE_V)?;
    let anc = scratch_label(state, "att");
    let s = state
        .attach_mode(&anc, &DensityOperator::fock(&anc, cutoff, 0)?)?
        .apply_two_mode_unitary(MODE_V, &anc, &beam_splitter_unitary(t, cutoff)?)?;
    Ok(detector.detect(&s, &anc, 0)?.0)
}

/// Single-photon teleportation amplifier on `H`; output on `[H, V]`.
pub fn amplifier_circuit(state: &DensityOperator, t: f64, detector: &Detector) -> Result<DensityOperator> {
    let cutoff = state.registry().cutoff(MODE_H)?;
    let kept = scratch_label(state, "kept");
    let arm = scratch_label(state, "arm");
    let s = state
        .attach_mode(&kept, &DensityOperator::fock(&kept, cutoff, 1)?)?
        .attach_mode(&arm, &DensityOperator::fock(&arm, cutoff, 0)?)?
        .apply_two_mode_unitary(&kept, &arm, &beam_splitter_unitary(t, cutoff)?)?
        .apply_two_mode_unitary(MODE_H, &arm, &beam_splitter_unitary(0.5, cutoff)?)?;
    let (s, _) = detector.detect(&s, &arm, 1)?;
    let (s, _) = detector.detect(&s, MODE_H, 0)?;
    s.relabel(&kept, MODE_H)?.reorder(&[MODE_H, MODE_V])
}

/// Attenuation setting that rebalances the qubit: `T = t_h`.
pub fn choose_t_attenuation(t_h: f64) -> Result<f64> {
    if !(t_h > 0.0 && t_h <= 1.0) {
        return Err(invalid(format!("t_h = {t_h} outside (0, 1]")));
    }
    Ok(t_h)
}

/// Amplifier setting. Ideal detectors (or `fixed-ideal`) give
/// `1 / (1 + t_h)`; otherwise the configured strategy decides.
pub fn choose_t_amplifier(config: &SchemeConfig) -> Result<TChoice> {
    let t_h = config.t_h;
    choose_t_attenuation(t_h)?;
    let ideal = TChoice {
        t: 1.0 / (1.0 + t_h),
        flag: None,
    };
    if config.detector.is_ideal() {
        return Ok(ideal);
    }
    match config.strategy {
        TStrategy::FixedIdeal => Ok(ideal),
        TStrategy::Balance => {
            let h = after_pdl(
                &PolarizationQubit::new(C64::from(1.0), C64::default())?,
                t_h,
                EXACT_CUTOFF,
            )?;
            let v = after_pdl(
                &PolarizationQubit::new(C64::default(), C64::from(1.0))?,
                t_h,
                EXACT_CUTOFF,
            )?;
            let one_h = Occ::from([1, 0]);
            let one_v = Occ::from([0, 1]);
            let t = bisect(
                |t| {
                    let wh = amplifier_circuit(&h, t, &config.detector)?.element(&one_h, &one_h)?.re;
                    let wv = amplifier_circuit(&v, t, &config.detector)?.element(&one_v, &one_v)?.re;
                    Ok(wh - wv)
                },
                0.0,
                1.0,
                1e-13,
            )?;
            Ok(TChoice { t, flag: None })
        }
        TStrategy::Fidelity => {
            let state = after_pdl(&config.qubit, t_h, config.cutoff)?;
            let reference = config.qubit.density(config.cutoff)?;
            let best = golden_section_max(
                |t| {
                    let out = amplifier_circuit(&state, t, &config.detector)?;
                    if out.trace() <= PROBABILITY_EPSILON {
                        return Ok(0.0);
                    }
                    Ok(fidelity(&out.normalize()?, &reference)?.fidelity)
                },
                0.0,
                1.0,
                SEARCH_TOL,
            )?;
            Ok(TChoice {
                t: best.x,
                flag: (!best.unimodal).then(|| "non-unimodal".to_string()),
            })
        }
    }
}

/// Closed-form counterpart of a result's unnormalized output, when one
/// exists for its parameters.
pub fn oracle_for(result: &SchemeResult, config: &SchemeConfig) -> Result<Option<OracleState>> {
    let (c1, c2, t_h) = (config.qubit.c1, config.qubit.c2, config.t_h);
    let t = result.t_used;
    let state = match (result.scheme, &config.detector) {
        (Scheme::Uncorrected, _) => Some(oracle::oracle_pdl(c1, c2, t_h)?),
        (Scheme::Passive, _) => match t {
            Some(t) if t == t_h => Some(oracle::oracle_passive(c1, c2, t_h)?),
            _ => None,
        },
        (Scheme::NoiselessAttenuation, Detector::Ideal) => {
            Some(oracle::oracle_noiseless_att(c1, c2, t_h, t.unwrap_or(t_h))?.0)
        }
        (Scheme::NoiselessAttenuation, Detector::Imperfect(spec)) => Some(oracle::oracle_att_imperfect(
            c1,
            c2,
            t_h,
            t.unwrap_or(t_h),
            spec.efficiency(),
            spec.nu(),
        )?),
        (Scheme::Amplification, Detector::Ideal) => {
            Some(oracle::oracle_amp(c1, c2, t_h, t.unwrap_or(oracle::amp_balancing_t(t_h)))?.0)
        }
        (Scheme::Amplification, Detector::Imperfect(spec)) => {
            if spec.efficiency() < AMP_ORACLE_MIN_EFFICIENCY || spec.efficiency() >= 1.0 {
                None
            } else {
                Some(oracle::oracle_amp_imperfect(
                    c1,
                    c2,
                    t_h,
                    t.unwrap_or(oracle::amp_balancing_t(t_h)),
                    spec.efficiency(),
                    spec.nu(),
                )?)
            }
        }
    };
    Ok(state)
}

/// Closed form laid out on the registry of `like` (which must hold `H` and
/// `V` in that order).
pub fn oracle_matrix(state: &OracleState, like: &DensityOperator) -> Result<DMatrix<C64>> {
    let reg = like.registry();
    let at = |occ: [usize; 2]| reg.index_of(&Occ::from(occ));
    let (o, h, v, two) = (at([0, 0])?, at([1, 0])?, at([0, 1])?, at([1, 1])?);
    let mut m = DMatrix::zeros(reg.dim(), reg.dim());
    m[(o, o)] = state.vacuum;
    m[(h, h)] = state.hh;
    m[(h, v)] = state.hv;
    m[(v, h)] = state.vh;
    m[(v, v)] = state.vv;
    m[(two, two)] = state.two;
    Ok(m)
}

/// Largest elementwise `|simulated - closed form|` over the full output
/// matrix, or `None` when no closed form applies.
pub fn oracle_delta(result: &SchemeResult, config: &SchemeConfig) -> Result<Option<f64>> {
    let Some(state) = oracle_for(result, config)? else {
        return Ok(None);
    };
    let out = &result.unnormalized_output;
    if out.registry().labels() != [MODE_H, MODE_V] {
        return Err(Error::InvalidState(format!(
            "unexpected output registry {}",
            out.registry()
        )));
    }
    let expected = oracle_matrix(&state, out)?;
    Ok(Some(
        (out.matrix() - expected).iter().map(|z| z.norm()).fold(0.0, f64::max),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorSpec;
    use crate::metrics::t_h_from_db;

    fn qubits() -> Vec<PolarizationQubit> {
        [
            (C64::from(1.0), C64::default()),
            (C64::default(), C64::from(1.0)),
            (C64::from(0.6), C64::new(0.0, 0.8)),
            (C64::new(0.3, -0.4), C64::new(0.5, 0.5f64.sqrt())),
            (
                C64::from(std::f64::consts::FRAC_1_SQRT_2),
                C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2),
            ),
        ]
        .into_iter()
        .map(|(a, b)| PolarizationQubit::new(a, b).unwrap())
        .collect()
    }

    #[test]
    fn amplifier_wiring_matches_closed_form() {
        for q in qubits() {
            for &t_h in &[0.2, 0.5, 1.0] {
                for &t in &[0.3, 0.5, 0.8] {
                    let cfg = SchemeConfig::new(q, t_h).with_t(TSetting::Explicit(t));
                    let r = run_noiseless_amplification(&cfg).unwrap();
                    let d = oracle_delta(&r, &cfg).unwrap().unwrap();
                    assert!(d < 1e-12, "delta {d} at t_h={t_h}, T={t}");
                }
            }
        }
    }

    #[test]
    fn amplifier_coherence_sign_is_locked() {
        let cfg = SchemeConfig::new(PolarizationQubit::balanced(), 0.5).with_t(TSetting::Explicit(0.5));
        let r = run_noiseless_amplification(&cfg).unwrap();
        let hv = r
            .unnormalized_output
            .element(&Occ::from([1, 0]), &Occ::from([0, 1]))
            .unwrap();
        assert!((hv - C64::from(0.25 * (0.5f64 * 0.25).sqrt())).norm() < 1e-14);
    }

    #[test]
    fn no_pdl_amplifier() {
        let cfg = SchemeConfig::new(PolarizationQubit::balanced(), 1.0);
        let r = run_noiseless_amplification(&cfg).unwrap();
        assert_eq!(r.t_used, Some(0.5));
        assert!((r.acceptance_probability - 0.25).abs() < 1e-14);
        assert!((r.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_db_values() {
        let t_h = t_h_from_db(3.0).unwrap();
        let cfg = SchemeConfig::new(PolarizationQubit::balanced(), t_h);
        let f = |s| run(s, &cfg).unwrap().fidelity;
        assert!((f(Scheme::Passive) - t_h).abs() < 1e-12);
        assert!((f(Scheme::Uncorrected) - ((t_h.sqrt() + 1.0) / 2.0).powi(2)).abs() < 1e-12);
        assert!((f(Scheme::NoiselessAttenuation) - t_h / (t_h + 0.5 * (1.0 - t_h))).abs() < 1e-12);
        assert!((f(Scheme::Amplification) - 1.0 / (1.0 + 0.5 * (1.0 - t_h))).abs() < 1e-12);
    }

    #[test]
    fn auto_t_rebalances_every_qubit() {
        for q in qubits() {
            for &t_h in &[0.1, 0.5, 0.9] {
                let cfg = SchemeConfig::new(q, t_h);
                let reference = q.density(cfg.cutoff).unwrap();
                for s in [Scheme::Passive, Scheme::NoiselessAttenuation, Scheme::Amplification] {
                    let r = run(s, &cfg).unwrap();
                    let one = r.unnormalized_output.photon_number_weight(1);
                    let delta = r.unnormalized_output.matrix().clone() - reference.matrix() * C64::from(one);
                    let block_delta = [[1, 0], [0, 1]]
                        .iter()
                        .flat_map(|a| [[1, 0], [0, 1]].map(|b| (*a, b)))
                        .map(|(a, b)| {
                            let reg = r.unnormalized_output.registry();
                            let i = reg.index_of(&Occ::from(a)).unwrap();
                            let j = reg.index_of(&Occ::from(b)).unwrap();
                            delta[(i, j)].norm()
                        })
                        .fold(0.0, f64::max);
                    assert!(block_delta < 1e-10, "{s} t_h={t_h}: {block_delta}");
                }
            }
        }
    }

    #[test]
    fn heralded_bookkeeping() {
        let cfg = SchemeConfig::new(PolarizationQubit::balanced(), 0.5);
        let r = run_noiseless_attenuation(&cfg).unwrap();
        assert!((r.acceptance_probability - 0.75).abs() < 1e-14);
        assert!((r.unnormalized_output.trace() - r.acceptance_probability).abs() < 1e-12);
        assert_eq!(run_passive_attenuation(&cfg).unwrap().acceptance_probability, 1.0);
    }

    #[test]
    fn vacuum_weight_is_reduced() {
        for &t_h in &[0.05, 0.4, 0.95] {
            let cfg = SchemeConfig::new(PolarizationQubit::new(C64::from(0.8), C64::from(0.6)).unwrap(), t_h);
            let natt = run_noiseless_attenuation(&cfg).unwrap().vacuum_weight();
            let pass = run_passive_attenuation(&cfg).unwrap().vacuum_weight();
            assert!(natt < pass);
        }
    }

    #[test]
    fn ideal_detectors_ignore_strategy() {
        for s in [TStrategy::Fidelity, TStrategy::Balance, TStrategy::FixedIdeal] {
            let cfg = SchemeConfig::new(PolarizationQubit::balanced(), 0.5).with_strategy(s);
            assert_eq!(choose_t_amplifier(&cfg).unwrap().t, 1.0 / 1.5);
        }
    }

    #[test]
    fn balance_tends_to_ideal_setting() {
        let t_h = t_h_from_db(3.0).unwrap();
        let det = Detector::Imperfect(DetectorSpec::new(1.0 - 1e-9, 0.0).unwrap());
        let cfg = SchemeConfig::new(PolarizationQubit::balanced(), t_h).with_detector(det);
        let t = choose_t_amplifier(&cfg).unwrap().t;
        assert!((t - 1.0 / (1.0 + t_h)).abs() < 1e-6);
    }

    #[test]
    fn fidelity_strategy_beats_other_settings() {
        let t_h = t_h_from_db(3.0).unwrap();
        let det = Detector::Imperfect(DetectorSpec::new(0.6, 4e-5).unwrap());
        let base = SchemeConfig::new(PolarizationQubit::balanced(), t_h).with_detector(det);
        let best = run_noiseless_amplification(&base.with_strategy(TStrategy::Fidelity)).unwrap();
        for s in [TStrategy::Balance, TStrategy::FixedIdeal] {
            let other = run_noiseless_amplification(&base.with_strategy(s)).unwrap();
            assert!(best.fidelity >= other.fidelity - 1e-12);
        }
        assert!(best.flag.is_none());
        assert_eq!(
            choose_t_amplifier(&base.with_strategy(TStrategy::FixedIdeal))
                .unwrap()
                .t,
            1.0 / (1.0 + t_h)
        );
    }

    #[test]
    fn imperfect_attenuation_matches_closed_form() {
        let t_h = t_h_from_db(3.0).unwrap();
        for &eta in &[0.0, 0.5, 0.99] {
            let det = Detector::Imperfect(DetectorSpec::new(eta, 4e-5).unwrap());
            let cfg = SchemeConfig::new(PolarizationQubit::balanced(), t_h).with_detector(det);
            let r = run_noiseless_attenuation(&cfg).unwrap();
            assert!(oracle_delta(&r, &cfg).unwrap().unwrap() < 1e-8);
        }
    }

    #[test]
    fn imperfect_attenuation_vacuum_splits_by_polarization() {
        let q = PolarizationQubit::new(C64::from(0.6), C64::new(0.0, 0.8)).unwrap();
        let (t_h, t, eta) = (0.4, 0.7, 0.6);
        let spec = DetectorSpec::new(eta, 1e-3).unwrap();
        let cfg = SchemeConfig::new(q, t_h)
            .with_detector(Detector::Imperfect(spec))
            .with_t(TSetting::Explicit(t));
        let r = run_noiseless_attenuation(&cfg).unwrap();
        let g = 1.0 + spec.nu() * (1.0 - eta);
        let vacuum = (1.0 - t_h) / g * 0.36 + (1.0 - t) * (g - eta) / (g * g) * 0.64;
        let sim = r
            .unnormalized_output
            .element(&Occ::from([0, 0]), &Occ::from([0, 0]))
            .unwrap();
        assert!((sim.re - vacuum).abs() < 1e-12);
    }

    #[test]
    fn config_errors() {
        let q = PolarizationQubit::balanced();
        assert!(run_uncorrected(&SchemeConfig::new(q, 0.0)).is_err());
        assert!(run_passive_attenuation(&SchemeConfig::new(q, 0.5).with_t(TSetting::Explicit(1.5))).is_err());
        assert!(run_uncorrected(&SchemeConfig::new(q, 0.5).with_cutoff(2)).is_err());
        assert_eq!("noiseless-att".parse::<Scheme>().unwrap(), Scheme::NoiselessAttenuation);
        assert!("bogus".parse::<Scheme>().is_err());
        assert_eq!("auto".parse::<TSetting>().unwrap(), TSetting::Auto);
        assert_eq!("0.25".parse::<TSetting>().unwrap(), TSetting::Explicit(0.25));
    }

    #[test]
    fn amplifier_at_unit_gain_setting_has_no_heralds() {
        let cfg = SchemeConfig::new(PolarizationQubit::new(C64::default(), C64::from(1.0)).unwrap(), 0.5)
            .with_t(TSetting::Explicit(1.0));
        assert!(matches!(
            run_noiseless_amplification(&cfg),
            Err(Error::ZeroProbabilityEvent(_))
        ));
    }
}
