//! Fidelity and PDL bookkeeping.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fock::{DensityOperator, C64, PSD_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityMethod {
    Uhlmann,
    PureShortcut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub method: FidelityMethod,
    /// Registry both operators were compared on.
    pub embedding: String,
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2`.
///
/// Both operators must have unit trace and carry the same mode labels; if
/// their cutoffs differ, both are embedded into the larger per-mode cutoff.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<FidelityReport> {
    let (a, b) = reconcile(rho, sigma)?;
    check_unit_trace(&a)?;
    check_unit_trace(&b)?;
    Ok(FidelityReport {
        fidelity: uhlmann(a.matrix(), b.matrix())?,
        method: FidelityMethod::Uhlmann,
        embedding: a.registry().to_string(),
    })
}

/// `<psi|rho|psi>` where `reference = |psi><psi|` must be pure.
pub fn fidelity_pure(rho: &DensityOperator, reference: &DensityOperator) -> Result<FidelityReport> {
    let (a, b) = reconcile(rho, reference)?;
    check_unit_trace(&a)?;
    check_unit_trace(&b)?;
    let purity = (b.matrix() * b.matrix()).trace().re;
    if (purity - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "pure-state shortcut needs a pure reference (purity {purity})"
        )));
    }
    let eig = SymmetricEigen::new(b.matrix().clone());
    let (top, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let psi = eig.eigenvectors.column(top);
    let overlap = (psi.adjoint() * a.matrix() * psi)[(0, 0)].re;
    Ok(FidelityReport {
        fidelity: overlap.clamp(0.0, 1.0),
        method: FidelityMethod::PureShortcut,
        embedding: a.registry().to_string(),
    })
}

fn check_unit_trace(rho: &DensityOperator) -> Result<()> {
    if (rho.trace() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "fidelity needs unit-trace operators, got trace {}",
            rho.trace()
        )));
    }
    Ok(())
}

/// Brings both operators onto one registry: same label order as `rho`,
/// each mode at the larger of the two cutoffs.
fn reconcile(rho: &DensityOperator, sigma: &DensityOperator) -> Result<(DensityOperator, DensityOperator)> {
    let ra = rho.registry();
    let rb = sigma.registry();
    if ra.len() != rb.len() || ra.labels().iter().any(|l| !rb.contains(l)) {
        return Err(Error::InvalidState(format!(
            "cannot compare operators on {ra} and {rb}"
        )));
    }
    let order: Vec<&str> = ra.labels().iter().map(String::as_str).collect();
    let mut a = rho.clone();
    let mut b = sigma.reorder(&order)?;
    for label in &order {
        let ca = a.registry().cutoff(label)?;
        let cb = b.registry().cutoff(label)?;
        if ca < cb {
            a = a.extend_cutoff(label, cb)?;
        } else if cb < ca {
            b = b.extend_cutoff(label, ca)?;
        }
    }
    Ok((a, b))
}

/// Square root of a Hermitian PSD matrix. Eigenvalues in `[-PSD_TOL, 0)` are
/// clipped; anything more negative is an error. Positive eigenvalues below
/// the eigensolver's resolution (`dim * eps * max eigenvalue`) are zeroed.
pub fn psd_sqrt(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let herm = (m + m.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(herm);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let floor = m.nrows() as f64 * f64::EPSILON * top;
    let roots = eig
        .eigenvalues
        .iter()
        .map(|&l| clip_eigenvalue(l).map(|l| if l <= floor { 0.0 } else { l.sqrt() }))
        .collect::<Result<Vec<_>>>()?;
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        roots.len(),
        roots.into_iter().map(C64::from),
    ));
    Ok(v * d * v.adjoint())
}

fn clip_eigenvalue(l: f64) -> Result<f64> {
    if l < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "operator is not positive semidefinite (eigenvalue {l:e})"
        )));
    }
    Ok(l.max(0.0))
}

/// Uhlmann fidelity of two unit-trace PSD matrices, clipped to `[0, 1]`.
///
/// Evaluated as the squared trace norm of `sqrt(rho) sqrt(sigma)`. Taking
/// singular values of that product, instead of square roots of the
/// eigenvalues of `sqrt(rho) sigma sqrt(rho)`, keeps round-off eigenvalues
/// near zero from contributing their square roots.
pub fn uhlmann(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    let product = psd_sqrt(rho)? * psd_sqrt(sigma)?;
    let trace_norm: f64 = product.singular_values().iter().sum();
    Ok((trace_norm * trace_norm).clamp(0.0, 1.0))
}

/// `10 log10(t_max / t_min)`.
pub fn pdl_db(t_max: f64, t_min: f64) -> Result<f64> {
    if !(t_min > 0.0) || !(t_max >= t_min) || !t_max.is_finite() {
        return Err(invalid(format!(
            "PDL needs 0 < t_min <= t_max, got t_max={t_max}, t_min={t_min}"
        )));
    }
    Ok(10.0 * (t_max / t_min).log10())
}

/// Horizontal transmission for a PDL of `db` decibels with `t_max = 1`.
pub fn t_h_from_db(db: f64) -> Result<f64> {
    if !(db >= 0.0) || !db.is_finite() {
        return Err(invalid(format!(
            "PDL must be a finite, non-negative dB value, got {db}"
        )));
    }
    Ok(10f64.powf(-db / 10.0))
}
