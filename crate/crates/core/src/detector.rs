//! Photon-number detection, ideal and imperfect.
//!
//! An imperfect detector is an ideal number-resolving detector behind a beam
//! splitter of transmission `η` whose second input carries thermal light of
//! mean `ν`. The detector reads the output port that transmits the signal
//! with amplitude `√η`; the other output is discarded. `ν` is fixed by the
//! dark-count probability per time step, `ν = P_d / ((1 - P_d)(1 - η))`.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::fock::{DensityOperator, C64};
use crate::optics::{self, scratch_label, thermal_cutoff_for, thermal_weights, BeamSplitter};

/// Thermal tail mass tolerated when truncating the dark-count mode.
pub const THERMAL_TAIL_TOL: f64 = 1e-15;
const MAX_THERMAL_CUTOFF: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorSpec {
    efficiency: f64,
    dark_count: f64,
}

impl DetectorSpec {
    pub fn new(efficiency: f64, dark_count: f64) -> Result<Self> {
        nu_from_dark_count(dark_count, efficiency)?;
        Ok(Self { efficiency, dark_count })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn dark_count(&self) -> f64 {
        self.dark_count
    }

    /// Thermal mean occupation of the dark-count mode.
    pub fn nu(&self) -> f64 {
        nu_from_dark_count(self.dark_count, self.efficiency).expect("validated at construction")
    }

    /// Cutoff used for the thermal mode and the mass it leaves out.
    pub fn thermal_truncation(&self) -> (usize, f64) {
        let nu = self.nu();
        let cutoff = thermal_cutoff_for(nu, THERMAL_TAIL_TOL, MAX_THERMAL_CUTOFF);
        (cutoff, (nu / (1.0 + nu)).powi(cutoff as i32))
    }
}

/// Either a perfect number-resolving detector or the thermal-mixing model.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Detector {
    #[default]
    Ideal,
    Imperfect(DetectorSpec),
}

impl Detector {
    pub fn detect(&self, state: &DensityOperator, mode: &str, outcome: usize) -> Result<(DensityOperator, f64)> {
        match self {
            Detector::Ideal => ideal_detect(state, mode, outcome),
            Detector::Imperfect(spec) => imperfect_detect(state, mode, spec, outcome),
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, Detector::Ideal)
    }
}

/// `ν = P_d / ((1 - P_d)(1 - η))`.
pub fn nu_from_dark_count(dark_count: f64, efficiency: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&dark_count) {
        return Err(invalid(format!(
            "dark-count probability must lie in [0, 1), got {dark_count}"
        )));
    }
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(invalid(format!(
            "detector efficiency must lie in [0, 1], got {efficiency}"
        )));
    }
    if dark_count == 0.0 {
        return Ok(0.0);
    }
    if efficiency >= 1.0 {
        return Err(Error::DivergentThermalMean { efficiency, dark_count });
    }
    Ok(dark_count / ((1.0 - dark_count) * (1.0 - efficiency)))
}

/// Ideal number-resolving detection: projection onto `|outcome>`.
pub fn ideal_detect(state: &DensityOperator, mode: &str, outcome: usize) -> Result<(DensityOperator, f64)> {
    state.project_mode(mode, outcome)
}

/// Detection with the thermal-mixing model. Returns the unnormalized
/// post-measurement operator (mode removed) and its trace.
pub fn imperfect_detect(
    state: &DensityOperator,
    mode: &str,
    spec: &DetectorSpec,
    outcome: usize,
) -> Result<(DensityOperator, f64)> {
    let cutoff = state.registry().cutoff(mode)?;
    let effect = detector_effect(spec, cutoff, outcome)?;
    let out = state.contract_mode(mode, &effect)?;
    let p = out.trace();
    Ok((out, p))
}

/// POVM effect of reading `outcome` on a signal mode of local dimension
/// `signal_cutoff`:
/// `E[j, j] = Σ_m p_m |<outcome, j + m - outcome| U_η |j, m>|²`
/// with `p_m` the thermal weights. The beam splitter conserves photon
/// number and the thermal state is number-diagonal, so `E` is diagonal.
pub fn detector_effect(spec: &DetectorSpec, signal_cutoff: usize, outcome: usize) -> Result<DMatrix<C64>> {
    let (thermal_cutoff, deficit) = spec.thermal_truncation();
    if deficit > 1e-12 {
        return Err(invalid(format!(
            "thermal mean {} needs more than {MAX_THERMAL_CUTOFF} levels",
            spec.nu()
        )));
    }
    let weights = thermal_weights(spec.nu(), thermal_cutoff);
    let bs = BeamSplitter::new(spec.efficiency)?;
    let blocks: Vec<DMatrix<C64>> = (0..signal_cutoff + thermal_cutoff - 1)
        .map(|total| bs.number_block(total))
        .collect();
    let mut effect = DMatrix::<C64>::zeros(signal_cutoff, signal_cutoff);
    for j in 0..signal_cutoff {
        let mut acc = 0.0;
        for (m, &p) in weights.iter().enumerate() {
            let total = j + m;
            if total < outcome {
                continue;
            }
            acc += p * blocks[total][(outcome, j)].norm_sqr();
        }
        effect[(j, j)] = C64::from(acc);
    }
    Ok(effect)
}

/// Thermal-mixing detection carried out literally on the joint space: the
/// signal mode is widened so every beam-splitter block it reaches is
/// complete, a thermal mode of `thermal_cutoff` levels is attached, the
/// beam splitter acts, the signal mode is projected and the thermal port
/// traced out. Only practical for small states.
pub fn imperfect_detect_literal(
    state: &DensityOperator,
    mode: &str,
    spec: &DetectorSpec,
    outcome: usize,
    thermal_cutoff: usize,
) -> Result<(DensityOperator, f64)> {
    let cutoff = state.registry().cutoff(mode)?;
    let wide = cutoff + thermal_cutoff - 1;
    let label = scratch_label(state, &format!("{mode}~thermal"));
    let thermal = optics::thermal_state(&label, spec.nu(), thermal_cutoff)?
        .operator
        .extend_cutoff(&label, wide)?;
    let joint = state
        .extend_cutoff(mode, wide)?
        .attach_mode(&label, &thermal)?
        .apply_two_mode_unitary(mode, &label, &BeamSplitter::new(spec.efficiency)?.unitary(wide, wide)?)?;
    let (projected, _) = joint.project_mode(mode, outcome)?;
    let out = projected.partial_trace(&label)?;
    let p = out.trace();
    Ok((out, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{PolarizationQubit, MODE_H, MODE_V};
    use crate::optics::{loss_channel, PdlElement};

    #[test]
    fn nu_values() {
        assert_eq!(nu_from_dark_count(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(nu_from_dark_count(0.0, 1.0).unwrap(), 0.0);
        let nu = nu_from_dark_count(4e-5, 0.5).unwrap();
        assert!((nu - 8.000_320_012_800_512e-5).abs() < 1e-18);
        let nu0 = nu_from_dark_count(4e-5, 0.0).unwrap();
        assert!((nu0 - 4.000_160_006_400_256e-5).abs() < 1e-18);
        assert!(matches!(
            nu_from_dark_count(4e-5, 1.0),
            Err(Error::DivergentThermalMean { .. })
        ));
        assert!(DetectorSpec::new(1.0, 1e-3).is_err());
        assert!(DetectorSpec::new(0.5, 1.0).is_err());
    }

    #[test]
    fn ideal_detection_on_vacuum() {
        let vac = DensityOperator::fock("d", 4, 0).unwrap();
        let q = PolarizationQubit::balanced()
            .density(4)
            .unwrap()
            .attach_mode("d", &vac)
            .unwrap();
        assert!((ideal_detect(&q, "d", 0).unwrap().1 - 1.0).abs() < 1e-15);
        assert_eq!(ideal_detect(&q, "d", 1).unwrap().1, 0.0);
    }

    #[test]
    fn perfect_spec_equals_ideal() {
        let spec = DetectorSpec::new(1.0, 0.0).unwrap();
        let rho = DensityOperator::diagonal("d", &[0.2, 0.5, 0.3, 0.0]).unwrap();
        let q = PolarizationQubit::balanced()
            .density(4)
            .unwrap()
            .attach_mode("d", &rho)
            .unwrap();
        for n in 0..3 {
            let (a, pa) = imperfect_detect(&q, "d", &spec, n).unwrap();
            let (b, pb) = ideal_detect(&q, "d", n).unwrap();
            assert!((pa - pb).abs() < 1e-14);
            assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
        }
    }

    #[test]
    fn blind_detector_sees_nothing() {
        let spec = DetectorSpec::new(0.0, 0.0).unwrap();
        let one = DensityOperator::fock("d", 4, 1).unwrap();
        let q = PolarizationQubit::balanced()
            .density(4)
            .unwrap()
            .attach_mode("d", &one)
            .unwrap();
        let (out, p) = imperfect_detect(&q, "d", &spec, 0).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        let expected = q.partial_trace("d").unwrap();
        assert!(out.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn click_probability_equals_efficiency() {
        let one = DensityOperator::fock("d", 4, 1).unwrap();
        for &eta in &[0.0, 0.1, 0.45, 0.85, 1.0] {
            let spec = DetectorSpec::new(eta, 0.0).unwrap();
            let (_, p1) = imperfect_detect(&one, "d", &spec, 1).unwrap();
            assert!((p1 - eta).abs() < 1e-14, "eta={eta}");
        }
    }

    #[test]
    fn outcomes_sum_to_trace_minus_deficit() {
        let spec = DetectorSpec::new(0.6, 0.05).unwrap();
        let (thermal_cutoff, deficit) = spec.thermal_truncation();
        let rho = DensityOperator::diagonal("d", &[0.3, 0.4, 0.2, 0.1]).unwrap();
        let total: f64 = (0..4 + thermal_cutoff - 1)
            .map(|n| imperfect_detect(&rho, "d", &spec, n).unwrap().1)
            .sum();
        assert!((total - (1.0 - deficit)).abs() < 1e-10);
    }

    #[test]
    fn no_dark_counts_matches_loss_then_projection() {
        let eta = 0.7;
        let spec = DetectorSpec::new(eta, 0.0).unwrap();
        let q = PolarizationQubit::balanced().density(4).unwrap();
        let lossy = crate::optics::apply_pdl(&q, MODE_H, MODE_V, &PdlElement::horizontal(0.4).unwrap()).unwrap();
        let (a, _) = imperfect_detect(&lossy, MODE_V, &spec, 0).unwrap();
        let (b, _) = ideal_detect(&loss_channel(&lossy, MODE_V, eta).unwrap(), MODE_V, 0).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn effect_route_matches_literal_pipeline() {
        let spec = DetectorSpec::new(0.55, 0.02).unwrap();
        let q = PolarizationQubit::new(C64::from(0.6), C64::new(0.0, 0.8))
            .unwrap()
            .density(3)
            .unwrap();
        let lossy = loss_channel(&q, MODE_H, 0.5).unwrap();
        let (thermal_cutoff, _) = spec.thermal_truncation();
        for n in 0..3 {
            let (a, pa) = imperfect_detect(&lossy, MODE_V, &spec, n).unwrap();
            let (b, pb) = imperfect_detect_literal(&lossy, MODE_V, &spec, n, thermal_cutoff).unwrap();
            assert!((pa - pb).abs() < 1e-12, "n={n}");
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12, "n={n}");
        }
    }
}
