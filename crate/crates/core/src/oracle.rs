//! Closed-form output states of the compensation schemes.
//!
//! Every function here is a direct transcription of an analytic expression
//! for the output density operator on the span of `|0>` (vacuum), `|H>`,
//! `|V>` and `|2>` (one horizontal plus one vertical photon). Nothing is
//! simplified and nothing is shared with the circuit simulator, so these
//! values serve as independent ground truth.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fock::C64;

/// Operator `Σ coeff |row><col|` on `{|0>, |H>, |V>, |2>}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OracleState {
    pub vacuum: C64,
    pub hh: C64,
    /// Coefficient of `|H><V|`.
    pub hv: C64,
    /// Coefficient of `|V><H|`.
    pub vh: C64,
    pub vv: C64,
    /// Coefficient of `|2><2|`.
    pub two: C64,
    pub normalized: bool,
}

impl OracleState {
    pub fn trace(&self) -> f64 {
        (self.vacuum + self.hh + self.vv + self.two).re
    }

    pub fn normalize(&self) -> Self {
        let s = C64::from(1.0 / self.trace());
        Self {
            vacuum: self.vacuum * s,
            hh: self.hh * s,
            hv: self.hv * s,
            vh: self.vh * s,
            vv: self.vv * s,
            two: self.two * s,
            normalized: true,
        }
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coefficients()
            .iter()
            .zip(other.coefficients().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn coefficients(&self) -> [C64; 6] {
        [self.vacuum, self.hh, self.hv, self.vh, self.vv, self.two]
    }

    /// `|<H><V| coefficient - conj(<V><H| coefficient)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.hv - self.vh.conj()).norm()
    }
}

fn check_qubit(c1: C64, c2: C64) -> Result<()> {
    let norm = c1.norm_sqr() + c2.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("|c1|^2 + |c2|^2 = {norm}, expected 1")));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_detector(eta: f64, nu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eta) {
        return Err(invalid(format!("eta = {eta} outside [0, 1)")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(invalid(format!("nu = {nu} must be finite and non-negative")));
    }
    Ok(())
}

fn r(x: f64) -> C64 {
    C64::from(x)
}

/// State after PDL on the horizontal mode.
pub fn oracle_pdl(c1: C64, c2: C64, t_h: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    Ok(OracleState {
        vacuum: r(p1 * (1.0 - t_h)),
        hh: r(p1 * t_h),
        hv: c2.conj() * c1 * t_h.sqrt(),
        vh: c1.conj() * c2 * t_h.sqrt(),
        vv: r(p2),
        two: C64::default(),
        normalized: false,
    })
}

/// PDL followed by passive attenuation of the vertical mode with `T = t_h`.
pub fn oracle_passive(c1: C64, c2: C64, t_h: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    Ok(OracleState {
        vacuum: r(1.0 - t_h),
        hh: r(t_h * c1.norm_sqr()),
        hv: c2.conj() * c1 * t_h,
        vh: c1.conj() * c2 * t_h,
        vv: r(t_h * c2.norm_sqr()),
        two: C64::default(),
        normalized: false,
    })
}

/// PDL then noiseless attenuation with ideal detector: unnormalized state and
/// its trace, the heralding probability.
pub fn oracle_noiseless_att(c1: C64, c2: C64, t_h: f64, t: f64) -> Result<(OracleState, f64)> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    check_unit("T", t)?;
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    let s = OracleState {
        vacuum: r(p1 * (1.0 - t_h)),
        hh: r(p1 * t_h),
        hv: c2.conj() * c1 * (t_h * t).sqrt(),
        vh: c1.conj() * c2 * (t_h * t).sqrt(),
        vv: r(p2 * t),
        two: C64::default(),
        normalized: false,
    };
    let p = s.trace();
    Ok((s, p))
}

/// Heralding probability of noiseless attenuation at `T = t_h`.
pub fn noiseless_att_success(c1: C64, t_h: f64) -> f64 {
    t_h + c1.norm_sqr() * (1.0 - t_h)
}

/// Conditioned noiseless-attenuation output at `T = t_h`, in explicit form.
pub fn noiseless_att_conditioned(c1: C64, c2: C64, t_h: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    let k = 1.0 / (t_h + c1.norm_sqr() * (1.0 - t_h));
    Ok(OracleState {
        vacuum: r(k * c1.norm_sqr() * (1.0 - t_h)),
        hh: r(k * t_h * c1.norm_sqr()),
        hv: c2.conj() * c1 * (k * t_h),
        vh: c1.conj() * c2 * (k * t_h),
        vv: r(k * t_h * c2.norm_sqr()),
        two: C64::default(),
        normalized: true,
    })
}

/// PDL then noiseless amplification of the horizontal mode with ideal
/// detectors: unnormalized state and heralding probability.
pub fn oracle_amp(c1: C64, c2: C64, t_h: f64, t: f64) -> Result<(OracleState, f64)> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    check_unit("T", t)?;
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    let coh = (t_h * t * (1.0 - t)).sqrt();
    let s = OracleState {
        vacuum: r(0.5 * p1 * (1.0 - t_h) * (1.0 - t)),
        hh: r(0.5 * p1 * t * t_h),
        hv: c2.conj() * c1 * (0.5 * coh),
        vh: c1.conj() * c2 * (0.5 * coh),
        vv: r(0.5 * p2 * (1.0 - t)),
        two: C64::default(),
        normalized: false,
    };
    let p = s.trace();
    Ok((s, p))
}

/// Gain setting `T = 1 / (1 + t_h)` that rebalances the amplified qubit.
pub fn amp_balancing_t(t_h: f64) -> f64 {
    1.0 / (1.0 + t_h)
}

/// Amplifier output at `T = 1 / (1 + t_h)`, unnormalized, in explicit form.
pub fn amp_rebalanced(c1: C64, c2: C64, t_h: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    let k = t_h / (2.0 * (1.0 + t_h));
    Ok(OracleState {
        vacuum: r(k * c1.norm_sqr() * (1.0 - t_h)),
        hh: r(k * c1.norm_sqr()),
        hv: c2.conj() * c1 * k,
        vh: c1.conj() * c2 * k,
        vv: r(k * c2.norm_sqr()),
        two: C64::default(),
        normalized: false,
    })
}

/// Heralding probability of the amplifier at `T = 1 / (1 + t_h)`.
pub fn amp_success(c1: C64, t_h: f64) -> f64 {
    t_h / (2.0 * (1.0 + t_h)) * (1.0 + c1.norm_sqr() * (1.0 - t_h))
}

/// Conditioned amplifier output at `T = 1 / (1 + t_h)`, in explicit form.
pub fn amp_conditioned(c1: C64, c2: C64, t_h: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    let k = 1.0 / (1.0 + c1.norm_sqr() * (1.0 - t_h));
    Ok(OracleState {
        vacuum: r(k * c1.norm_sqr() * (1.0 - t_h)),
        hh: r(k * c1.norm_sqr()),
        hv: c2.conj() * c1 * k,
        vh: c1.conj() * c2 * k,
        vv: r(k * c2.norm_sqr()),
        two: C64::default(),
        normalized: true,
    })
}

/// Noiseless attenuation with an imperfect detector (efficiency `eta`,
/// thermal mean `nu`), unnormalized.
pub fn oracle_att_imperfect(c1: C64, c2: C64, t_h: f64, t: f64, eta: f64, nu: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    check_unit("T", t)?;
    check_detector(eta, nu)?;
    let g = 1.0 + nu - eta * nu;
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());
    Ok(OracleState {
        vacuum: r(((2.0 - t - t_h) * g - eta * (1.0 - t)) / (g * g) * p1),
        hh: r(t_h / g * p1),
        hv: c2.conj() * c1 * ((t_h * t).sqrt() / g),
        vh: c1.conj() * c2 * ((t_h * t).sqrt() / g),
        vv: r(t / g * p2),
        two: C64::default(),
        normalized: false,
    })
}

/// Imperfect noiseless attenuation at `T = t_h`, in explicit form.
pub fn att_imperfect_rebalanced(c1: C64, c2: C64, t_h: f64, eta: f64, nu: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    check_detector(eta, nu)?;
    let g = 1.0 + nu - eta * nu;
    Ok(OracleState {
        vacuum: r((1.0 - t_h) * (2.0 + 2.0 * nu - 2.0 * nu * eta - eta) / (g * g) * c1.norm_sqr()),
        hh: r(t_h / g * c1.norm_sqr()),
        hv: c2.conj() * c1 * (t_h / g),
        vh: c1.conj() * c2 * (t_h / g),
        vv: r(t_h / g * c2.norm_sqr()),
        two: C64::default(),
        normalized: false,
    })
}

/// Noiseless amplification with two identical imperfect detectors,
/// unnormalized, transcribed as published. Requires `eta > 0`.
pub fn oracle_amp_imperfect(c1: C64, c2: C64, t_h: f64, t: f64, eta: f64, nu: f64) -> Result<OracleState> {
    check_qubit(c1, c2)?;
    check_unit("t_h", t_h)?;
    check_unit("T", t)?;
    check_detector(eta, nu)?;
    if eta <= 0.0 {
        return Err(invalid("the amplifier closed form is singular at eta = 0"));
    }
    let g = 1.0 + nu - eta * nu;
    let se = eta.sqrt();
    let sen = (eta * nu).sqrt();
    let (p1, p2) = (c1.norm_sqr(), c2.norm_sqr());

    let x = eta * eta
        + eta * nu * (1.0 - se).powi(2) * (1.0 - eta) * (1.0 + nu) / g.powi(3)
        + sen * (1.0 - eta) * (1.0 + nu + eta * nu) / g.powi(2);
    let y = eta * ((1.0 - se).powi(2) + (1.0 - eta)) / g
        + 2.0 * eta * nu * (1.0 - se).powi(2) * (1.0 - eta) * (1.0 + nu) / g.powi(4)
        + sen * (1.0 - eta) * (1.0 + nu + eta * nu) / g.powi(3);

    let vacuum = (1.0 - t) / (4.0 * eta * g * g) * (2.0 * (1.0 - t_h) * x + t_h * (1.0 - eta) * (1.0 + nu) * y) * p1;
    let hh = t * (nu * (2.0 - t_h) * (1.0 - eta) + t_h) / (2.0 * g.powi(3)) * p1;
    let two = t * nu * (1.0 - eta).powi(2) * (1.0 + nu) / (2.0 * g.powi(4)) * p1;
    let vv = (1.0 - t) / (2.0 * eta * g * g) * x * p2;

    // sign = +1 for |H><V|, -1 for |V><H|
    let coherence = |sign: f64| {
        let i = C64::new(0.0, sign);
        let e32 = eta.powf(1.5);
        (r(se)
            + (r(1.0) + (r(2.0) + i) * se - r(2.0 * eta) - (r(2.0) + i) * e32 + r(eta * eta)) * nu
            + (r(1.0) + (r(1.0) + i) * se) * ((1.0 - eta * eta) * nu * nu))
            / (2.0 * g.powi(4))
    };
    let pre = ((1.0 - t) * t).sqrt() * t_h;
    Ok(OracleState {
        vacuum: r(vacuum),
        hh: r(hh),
        hv: coherence(1.0) * pre * c2.conj() * c1,
        vh: coherence(-1.0) * pre * c1.conj() * c2,
        vv: r(vv),
        two: r(two),
        normalized: false,
    })
}
