//! Beam splitters, loss, polarization-dependent loss and thermal light.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};
use crate::fock::{DensityOperator, TwoModeUnitary, C64};

/// Beam splitter of power transmission `T`, acting as
/// `exp(i * arccos(sqrt(T)) * (a† b + a b†))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitter {
    transmission: f64,
}

impl BeamSplitter {
    pub fn new(transmission: f64) -> Result<Self> {
        check_unit_interval("beam splitter transmission", transmission)?;
        Ok(Self { transmission })
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    /// Mixing angle `arccos(sqrt(T))`.
    pub fn angle(&self) -> f64 {
        self.transmission.sqrt().clamp(0.0, 1.0).acos()
    }

    /// Unitary restricted to the complete `total`-photon block, indexed by the
    /// first mode's occupation `0..=total`.
    pub fn number_block(&self, total: usize) -> DMatrix<C64> {
        let n = total + 1;
        let mut g = DMatrix::<f64>::zeros(n, n);
        for a in 0..total {
            // <a + 1, total - a - 1| a† b |a, total - a>
            let amp = (((a + 1) * (total - a)) as f64).sqrt();
            g[(a + 1, a)] = amp;
            g[(a, a + 1)] = amp;
        }
        let eig = SymmetricEigen::new(g);
        let v = eig.eigenvectors.map(C64::from);
        let phases = DMatrix::from_diagonal(
            &eig.eigenvalues
                .map(|lambda| C64::from_polar(1.0, self.angle() * lambda)),
        );
        &v * phases * v.adjoint()
    }

    pub fn unitary(&self, cutoff_a: usize, cutoff_b: usize) -> Result<TwoModeUnitary> {
        TwoModeUnitary::exp_i_generator(cutoff_a, cutoff_b, &hopping_generator(cutoff_a, cutoff_b), self.angle())
    }
}

/// Horizontal and vertical power transmissions of a PDL element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdlElement {
    pub t_h: f64,
    pub t_v: f64,
}

impl PdlElement {
    pub fn new(t_h: f64, t_v: f64) -> Result<Self> {
        check_unit_interval("t_h", t_h)?;
        check_unit_interval("t_v", t_v)?;
        Ok(Self { t_h, t_v })
    }

    /// Loss on the horizontal mode only.
    pub fn horizontal(t_h: f64) -> Result<Self> {
        Self::new(t_h, 1.0)
    }
}

pub(crate) fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

/// `a† b + a b†` on the local two-mode basis `a * cutoff_b + b`.
fn hopping_generator(cutoff_a: usize, cutoff_b: usize) -> DMatrix<C64> {
    let dim = cutoff_a * cutoff_b;
    let mut g = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..cutoff_a {
        for m in 0..cutoff_b {
            // a† b |n, m> = sqrt((n + 1) m) |n + 1, m - 1>
            if n + 1 < cutoff_a && m > 0 {
                let from = n * cutoff_b + m;
                let to = (n + 1) * cutoff_b + (m - 1);
                let amp = (((n + 1) * m) as f64).sqrt();
                g[(to, from)] += C64::from(amp);
                g[(from, to)] += C64::from(amp);
            }
        }
    }
    g
}

/// Two-mode beam-splitter unitary for transmission `T` on a `cutoff x cutoff`
/// local space.
pub fn beam_splitter_unitary(transmission: f64, cutoff: usize) -> Result<TwoModeUnitary> {
    BeamSplitter::new(transmission)?.unitary(cutoff, cutoff)
}

/// Couples `mode` to a vacuum environment through a beam splitter of
/// transmission `t` and discards the environment.
pub fn loss_channel(state: &DensityOperator, mode: &str, transmission: f64) -> Result<DensityOperator> {
    let bs = BeamSplitter::new(transmission)?;
    let cutoff = state.registry().cutoff(mode)?;
    let env = scratch_label(state, &format!("{mode}~env"));
    let vacuum = DensityOperator::fock(&env, cutoff, 0)?;
    state
        .attach_mode(&env, &vacuum)?
        .apply_two_mode_unitary(mode, &env, &bs.unitary(cutoff, cutoff)?)?
        .partial_trace(&env)
}

/// Loss `t_h` on `mode_h`, then `t_v` on `mode_v`.
pub fn apply_pdl(state: &DensityOperator, mode_h: &str, mode_v: &str, element: &PdlElement) -> Result<DensityOperator> {
    state.registry().position(mode_h)?;
    state.registry().position(mode_v)?;
    let after_h = loss_channel(state, mode_h, element.t_h)?;
    loss_channel(&after_h, mode_v, element.t_v)
}

/// Label derived from `stem` that is not yet used in `state`.
pub(crate) fn scratch_label(state: &DensityOperator, stem: &str) -> String {
    let mut label = stem.to_string();
    let mut k = 0;
    while state.registry().contains(&label) {
        k += 1;
        label = format!("{stem}{k}");
    }
    label
}

/// Truncated thermal state together with the probability mass cut off.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub operator: DensityOperator,
    pub mean: f64,
    /// `1 - trace`: weight of the untruncated law beyond the cutoff.
    pub deficit: f64,
}

/// Thermal state of mean occupation `mean` on a single mode named `label`,
/// truncated at `cutoff` and deliberately left unrenormalized.
pub fn thermal_state(label: &str, mean: f64, cutoff: usize) -> Result<ThermalState> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(invalid(format!(
            "thermal mean must be finite and non-negative, got {mean}"
        )));
    }
    let weights = thermal_weights(mean, cutoff);
    let deficit = thermal_ratio(mean).powi(cutoff as i32);
    Ok(ThermalState {
        operator: DensityOperator::diagonal(label, &weights)?,
        mean,
        deficit,
    })
}

fn thermal_ratio(mean: f64) -> f64 {
    mean / (1.0 + mean)
}

/// `P(n) = (1 / (1 + nu)) (nu / (1 + nu))^n` for `n < cutoff`.
pub fn thermal_weights(mean: f64, cutoff: usize) -> Vec<f64> {
    let ratio = thermal_ratio(mean);
    let mut w = Vec::with_capacity(cutoff);
    let mut p = 1.0 / (1.0 + mean);
    for _ in 0..cutoff {
        w.push(p);
        p *= ratio;
    }
    w
}

/// Smallest cutoff (at least 2) whose truncation deficit is below `tol`.
pub fn thermal_cutoff_for(mean: f64, tol: f64, max_cutoff: usize) -> usize {
    let ratio = thermal_ratio(mean);
    let mut cutoff = 2;
    while cutoff < max_cutoff && ratio.powi(cutoff as i32) > tol {
        cutoff += 1;
    }
    cutoff
}
