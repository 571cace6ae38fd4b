//! Truncated multi-mode Fock space.
//!
//! A [`ModeRegistry`] names the optical modes and fixes their local cutoffs.
//! Basis states are enumerated lexicographically over occupation vectors in
//! registry order, so the first registered mode is the most significant digit
//! of a flat basis index. [`DensityOperator`] values are immutable: every
//! operation returns a new operator.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Label of the horizontal polarization mode.
pub const MODE_H: &str = "H";
/// Label of the vertical polarization mode.
pub const MODE_V: &str = "V";

/// Default local cutoff: occupations 0..=3.
pub const DEFAULT_CUTOFF: usize = 4;

/// Traces at or below this value cannot be conditioned on.
pub const PROBABILITY_EPSILON: f64 = 1e-14;

/// Elementwise Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Most negative eigenvalue still treated as numerical noise.
pub const PSD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModeRegistry {
    labels: Vec<String>,
    cutoffs: Vec<usize>,
}

impl ModeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_modes<I, S>(modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut reg = Self::new();
        for (label, cutoff) in modes {
            reg.push(label, cutoff)?;
        }
        Ok(reg)
    }

    pub fn push(&mut self, label: impl Into<String>, cutoff: usize) -> Result<()> {
        let label = label.into();
        if self.labels.contains(&label) {
            return Err(Error::ModeExists(label));
        }
        if cutoff < 2 {
            return Err(invalid(format!(
                "cutoff of mode `{label}` must be at least 2, got {cutoff}"
            )));
        }
        self.labels.push(label);
        self.cutoffs.push(cutoff);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn cutoff(&self, label: &str) -> Result<usize> {
        Ok(self.cutoffs[self.position(label)?])
    }

    /// Hilbert-space dimension (product of cutoffs; 1 for an empty registry).
    pub fn dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    /// Flat-index stride of every mode; the last mode has stride 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.cutoffs[k + 1];
        }
        strides
    }

    pub fn index_of(&self, state: &OccupationBasisState) -> Result<usize> {
        if state.0.len() != self.len() {
            return Err(invalid(format!(
                "occupation vector has {} entries for {} modes",
                state.0.len(),
                self.len()
            )));
        }
        let mut index = 0;
        for (k, &n) in state.0.iter().enumerate() {
            if n >= self.cutoffs[k] {
                return Err(Error::CutoffExceeded {
                    mode: self.labels[k].clone(),
                    occupation: n,
                    cutoff: self.cutoffs[k],
                });
            }
            index = index * self.cutoffs[k] + n;
        }
        Ok(index)
    }

    pub fn state_at(&self, mut index: usize) -> OccupationBasisState {
        let mut occ = vec![0; self.len()];
        for k in (0..self.len()).rev() {
            occ[k] = index % self.cutoffs[k];
            index /= self.cutoffs[k];
        }
        OccupationBasisState(occ)
    }

    /// All basis states in enumeration order.
    pub fn basis(&self) -> impl Iterator<Item = OccupationBasisState> + '_ {
        (0..self.dim()).map(move |i| self.state_at(i))
    }

    /// Registry with `label` removed, plus the removed mode's position.
    fn without(&self, label: &str) -> Result<(ModeRegistry, usize)> {
        let pos = self.position(label)?;
        let mut reduced = self.clone();
        reduced.labels.remove(pos);
        reduced.cutoffs.remove(pos);
        Ok((reduced, pos))
    }

    /// For each index of `reduced` (this registry minus the mode at `pos`),
    /// the full index with that mode in vacuum.
    fn embed_indices(&self, reduced: &ModeRegistry, pos: usize) -> Vec<usize> {
        let strides = self.strides();
        (0..reduced.dim())
            .map(|r| {
                let occ = reduced.state_at(r);
                occ.0
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| {
                        let full = if k < pos { k } else { k + 1 };
                        n * strides[full]
                    })
                    .sum()
            })
            .collect()
    }
}

impl fmt::Display for ModeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .labels
            .iter()
            .zip(&self.cutoffs)
            .map(|(l, c)| format!("{l}[{c}]"))
            .collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}

/// Photon occupation per registry mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationBasisState(pub Vec<usize>);

impl OccupationBasisState {
    pub fn new(occupation: impl Into<Vec<usize>>) -> Self {
        Self(occupation.into())
    }

    pub fn total_photons(&self) -> usize {
        self.0.iter().sum()
    }
}

impl<const N: usize> From<[usize; N]> for OccupationBasisState {
    fn from(occ: [usize; N]) -> Self {
        Self(occ.to_vec())
    }
}

/// Unitary on two modes, stored densely over the local basis `a * cutoff_b + b`.
#[derive(Clone, Debug)]
pub struct TwoModeUnitary {
    cutoff_a: usize,
    cutoff_b: usize,
    matrix: DMatrix<C64>,
}

impl TwoModeUnitary {
    pub fn identity(cutoff_a: usize, cutoff_b: usize) -> Self {
        Self {
            cutoff_a,
            cutoff_b,
            matrix: DMatrix::identity(cutoff_a * cutoff_b, cutoff_a * cutoff_b),
        }
    }

    /// Wraps a dense matrix; it must conserve the total photon number of the
    /// two modes.
    pub fn from_matrix(cutoff_a: usize, cutoff_b: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = cutoff_a * cutoff_b;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(invalid(format!(
                "two-mode unitary must be {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let ni = i / cutoff_b + i % cutoff_b;
                let nj = j / cutoff_b + j % cutoff_b;
                if ni != nj && matrix[(i, j)].norm() > HERMITIAN_TOL {
                    return Err(invalid("two-mode unitary couples different total photon numbers"));
                }
            }
        }
        Ok(Self {
            cutoff_a,
            cutoff_b,
            matrix,
        })
    }

    /// `exp(i * angle * G)` for a Hermitian generator `G` that conserves total
    /// photon number. Each number block is exponentiated separately through
    /// its eigendecomposition.
    pub fn exp_i_generator(cutoff_a: usize, cutoff_b: usize, generator: &DMatrix<C64>, angle: f64) -> Result<Self> {
        // validates block structure
        let g = Self::from_matrix(cutoff_a, cutoff_b, generator.clone())?;
        let dim = cutoff_a * cutoff_b;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for total in 0..=(cutoff_a + cutoff_b - 2) {
            let block = g.block_indices(total);
            let n = block.len();
            let sub = DMatrix::from_fn(n, n, |r, c| g.matrix[(block[r], block[c])]);
            let eig = SymmetricEigen::new(sub);
            let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|lambda| C64::from_polar(1.0, angle * lambda)));
            let v = &eig.eigenvectors;
            let exp_block = v * phases * v.adjoint();
            for r in 0..n {
                for c in 0..n {
                    out[(block[r], block[c])] = exp_block[(r, c)];
                }
            }
        }
        Ok(Self {
            cutoff_a,
            cutoff_b,
            matrix: out,
        })
    }

    /// Local indices of the states with `a + b == total`, ordered by `a`.
    pub fn block_indices(&self, total: usize) -> Vec<usize> {
        (0..self.cutoff_a)
            .filter(|&a| total >= a && total - a < self.cutoff_b)
            .map(|a| a * self.cutoff_b + (total - a))
            .collect()
    }

    /// True when the `total`-photon block contains every split `(a, total - a)`.
    pub fn block_is_complete(&self, total: usize) -> bool {
        total < self.cutoff_a && total < self.cutoff_b
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.cutoff_a, self.cutoff_b)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `<out_a, out_b| U |in_a, in_b>`.
    pub fn amplitude(&self, out: (usize, usize), input: (usize, usize)) -> C64 {
        self.matrix[(out.0 * self.cutoff_b + out.1, input.0 * self.cutoff_b + input.1)]
    }
}

/// Polarization qubit `c1 |H> + c2 |V>` carried by a single photon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationQubit {
    pub c1: C64,
    pub c2: C64,
}

impl PolarizationQubit {
    pub fn new(c1: C64, c2: C64) -> Result<Self> {
        let norm = c1.norm_sqr() + c2.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("|c1|^2 + |c2|^2 must be 1, got {norm}")));
        }
        Ok(Self { c1, c2 })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(c1: C64, c2: C64) -> Result<Self> {
        let norm = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            c1: c1 / norm,
            c2: c2 / norm,
        })
    }

    /// `(|H> + |V>) / sqrt(2)`.
    pub fn balanced() -> Self {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { c1: a, c2: a }
    }

    /// Registry `[H, V]` with both modes at `cutoff`.
    pub fn registry(cutoff: usize) -> Result<ModeRegistry> {
        ModeRegistry::with_modes([(MODE_H, cutoff), (MODE_V, cutoff)])
    }

    /// `|psi0><psi0|` on the `[H, V]` registry.
    pub fn density(&self, cutoff: usize) -> Result<DensityOperator> {
        DensityOperator::pure(
            Self::registry(cutoff)?,
            [
                (OccupationBasisState::from([1, 0]), self.c1),
                (OccupationBasisState::from([0, 1]), self.c2),
            ],
        )
    }
}

#[derive(Clone, Debug)]
pub struct DensityOperator {
    registry: ModeRegistry,
    matrix: DMatrix<C64>,
    trace: f64,
}

impl DensityOperator {
    pub fn from_matrix(registry: ModeRegistry, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = registry.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(invalid(format!(
                "matrix is {}x{}, registry {registry} needs {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let trace = matrix.diagonal().iter().map(|z| z.re).sum();
        Ok(Self {
            registry,
            matrix,
            trace,
        })
    }

    pub fn zero(registry: ModeRegistry) -> Self {
        let dim = registry.dim();
        Self {
            registry,
            matrix: DMatrix::zeros(dim, dim),
            trace: 0.0,
        }
    }

    /// `|psi><psi|` for the normalized amplitude vector. Repeated basis
    /// states accumulate.
    pub fn pure<I>(registry: ModeRegistry, amplitudes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationBasisState, C64)>,
    {
        let mut psi = nalgebra::DVector::<C64>::zeros(registry.dim());
        for (state, amp) in amplitudes {
            psi[registry.index_of(&state)?] += amp;
        }
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        psi /= C64::from(norm);
        let matrix = &psi * psi.adjoint();
        Self::from_matrix(registry, matrix)
    }

    pub fn vacuum(registry: ModeRegistry) -> Self {
        let mut out = Self::zero(registry);
        out.matrix[(0, 0)] = C64::from(1.0);
        out.trace = 1.0;
        out
    }

    /// Single-mode number state `|n><n|`.
    pub fn fock(label: &str, cutoff: usize, n: usize) -> Result<Self> {
        let registry = ModeRegistry::with_modes([(label, cutoff)])?;
        Self::pure(registry, [(OccupationBasisState::new(vec![n]), C64::from(1.0))])
    }

    /// Single-mode operator diagonal in the number basis.
    pub fn diagonal(label: &str, weights: &[f64]) -> Result<Self> {
        let registry = ModeRegistry::with_modes([(label, weights.len())])?;
        let matrix = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            weights.len(),
            weights.iter().map(|&w| C64::from(w)),
        ));
        Self::from_matrix(registry, matrix)
    }

    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `<row| rho |col>`.
    pub fn element(&self, row: &OccupationBasisState, col: &OccupationBasisState) -> Result<C64> {
        Ok(self.matrix[(self.registry.index_of(row)?, self.registry.index_of(col)?)])
    }

    /// `rho ⊗ ancilla`, with the ancilla's single mode appended under `label`.
    pub fn attach_mode(&self, label: &str, ancilla: &DensityOperator) -> Result<Self> {
        if ancilla.registry.len() != 1 {
            return Err(invalid("ancilla must be a single-mode operator"));
        }
        let mut registry = self.registry.clone();
        registry.push(label, ancilla.registry.cutoffs[0])?;
        let matrix = self.matrix.kronecker(&ancilla.matrix);
        Self::from_matrix(registry, matrix)
    }

    /// `U rho U†` with `U` acting on modes `(mode_a, mode_b)` in that order.
    pub fn apply_two_mode_unitary(&self, mode_a: &str, mode_b: &str, unitary: &TwoModeUnitary) -> Result<Self> {
        let pa = self.registry.position(mode_a)?;
        let pb = self.registry.position(mode_b)?;
        if pa == pb {
            return Err(invalid("two-mode unitary needs two distinct modes"));
        }
        let (ca, cb) = unitary.cutoffs();
        if self.registry.cutoffs[pa] != ca || self.registry.cutoffs[pb] != cb {
            return Err(invalid(format!(
                "unitary cutoffs ({ca}, {cb}) do not match modes `{mode_a}`, `{mode_b}`"
            )));
        }
        let strides = self.registry.strides();
        let local: Vec<usize> = (0..ca * cb)
            .map(|k| (k / cb) * strides[pa] + (k % cb) * strides[pb])
            .collect();
        let bases: Vec<usize> = (0..self.dim())
            .filter(|&i| (i / strides[pa]).is_multiple_of(ca) && (i / strides[pb]).is_multiple_of(cb))
            .collect();
        let u = unitary.matrix();
        let nloc = local.len();
        let dim = self.dim();

        // rho -> U rho
        let mut left = self.matrix.clone();
        let mut v = vec![C64::default(); nloc];
        for c in 0..dim {
            for &base in &bases {
                for k in 0..nloc {
                    v[k] = self.matrix[(base + local[k], c)];
                }
                for r in 0..nloc {
                    let mut acc = C64::default();
                    for k in 0..nloc {
                        acc += u[(r, k)] * v[k];
                    }
                    left[(base + local[r], c)] = acc;
                }
            }
        }
        // (U rho) -> (U rho) U†
        let mut out = left.clone();
        for r in 0..dim {
            for &base in &bases {
                for k in 0..nloc {
                    v[k] = left[(r, base + local[k])];
                }
                for c in 0..nloc {
                    let mut acc = C64::default();
                    for k in 0..nloc {
                        acc += v[k] * u[(c, k)].conj();
                    }
                    out[(r, base + local[c])] = acc;
                }
            }
        }
        Self::from_matrix(self.registry.clone(), out)
    }

    /// Projects `mode` onto `|outcome>` and removes it. The returned operator
    /// is not renormalized; its trace is the returned probability.
    pub fn project_mode(&self, mode: &str, outcome: usize) -> Result<(Self, f64)> {
        let cutoff = self.registry.cutoff(mode)?;
        if outcome >= cutoff {
            return Err(Error::CutoffExceeded {
                mode: mode.to_string(),
                occupation: outcome,
                cutoff,
            });
        }
        let (reduced, pos) = self.registry.without(mode)?;
        let base = self.registry.embed_indices(&reduced, pos);
        let shift = outcome * self.registry.strides()[pos];
        let n = reduced.dim();
        let matrix = DMatrix::from_fn(n, n, |r, c| self.matrix[(base[r] + shift, base[c] + shift)]);
        let out = Self::from_matrix(reduced, matrix)?;
        let p = out.trace;
        Ok((out, p))
    }

    pub fn partial_trace(&self, mode: &str) -> Result<Self> {
        let cutoff = self.registry.cutoff(mode)?;
        let effect = DMatrix::<C64>::identity(cutoff, cutoff);
        self.contract_mode(mode, &effect)
    }

    /// `Tr_mode[(E ⊗ 1) rho]` for a single-mode operator `E` (a POVM effect,
    /// a projector, or the identity for a plain partial trace).
    pub fn contract_mode(&self, mode: &str, effect: &DMatrix<C64>) -> Result<Self> {
        let cutoff = self.registry.cutoff(mode)?;
        if effect.nrows() != cutoff || effect.ncols() != cutoff {
            return Err(invalid(format!("effect on `{mode}` must be {cutoff}x{cutoff}")));
        }
        let (reduced, pos) = self.registry.without(mode)?;
        let base = self.registry.embed_indices(&reduced, pos);
        let stride = self.registry.strides()[pos];
        let terms: Vec<(usize, usize, C64)> = (0..cutoff)
            .flat_map(|j| (0..cutoff).map(move |k| (j, k)))
            .filter_map(|(j, k)| {
                let e = effect[(j, k)];
                (e != C64::default()).then_some((j, k, e))
            })
            .collect();
        let n = reduced.dim();
        let matrix = DMatrix::from_fn(n, n, |r, c| {
            terms
                .iter()
                .map(|&(j, k, e)| e * self.matrix[(base[r] + k * stride, base[c] + j * stride)])
                .sum()
        });
        Self::from_matrix(reduced, matrix)
    }

    pub fn normalize(&self) -> Result<Self> {
        if !(self.trace > PROBABILITY_EPSILON) {
            return Err(Error::ZeroProbabilityEvent(self.trace));
        }
        Ok(self.scaled(1.0 / self.trace))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            registry: self.registry.clone(),
            matrix: &self.matrix * C64::from(factor),
            trace: self.trace * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.registry != other.registry {
            return Err(invalid("cannot add operators on different registries"));
        }
        Self::from_matrix(self.registry.clone(), &self.matrix + &other.matrix)
    }

    /// Permutes the registry into `labels` order.
    pub fn reorder(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.registry.len() {
            return Err(invalid("reorder must list every mode exactly once"));
        }
        let perm: Vec<usize> = labels
            .iter()
            .map(|l| self.registry.position(l))
            .collect::<Result<_>>()?;
        let mut registry = ModeRegistry::new();
        for &p in &perm {
            registry.push(self.registry.labels[p].clone(), self.registry.cutoffs[p])?;
        }
        let map: Vec<usize> = (0..self.dim())
            .map(|i| {
                let occ = self.registry.state_at(i);
                let permuted = OccupationBasisState(perm.iter().map(|&p| occ.0[p]).collect());
                registry
                    .index_of(&permuted)
                    .expect("permuted occupation within cutoffs")
            })
            .collect();
        let mut matrix = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                matrix[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Self::from_matrix(registry, matrix)
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.registry.position(from)?;
        if from != to && self.registry.contains(to) {
            return Err(Error::ModeExists(to.to_string()));
        }
        let mut out = self.clone();
        out.registry.labels[pos] = to.to_string();
        Ok(out)
    }

    /// Embeds the operator into a larger cutoff on `mode` (zero padding).
    pub fn extend_cutoff(&self, mode: &str, cutoff: usize) -> Result<Self> {
        let pos = self.registry.position(mode)?;
        let old = self.registry.cutoffs[pos];
        if cutoff < old {
            return Err(invalid(format!(
                "cannot shrink cutoff of `{mode}` from {old} to {cutoff}"
            )));
        }
        let mut registry = self.registry.clone();
        registry.cutoffs[pos] = cutoff;
        let map: Vec<usize> = (0..self.dim())
            .map(|i| registry.index_of(&self.registry.state_at(i)).expect("embedding"))
            .collect();
        let mut matrix = DMatrix::zeros(registry.dim(), registry.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                matrix[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Self::from_matrix(registry, matrix)
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Hermitian, PSD and trace within `[0, 1]`, all up to the module tolerances.
    pub fn check_physical(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        if self.trace < -PSD_TOL || self.trace > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("trace {} outside [0, 1]", self.trace)));
        }
        Ok(())
    }

    /// Elementwise `max |a - b|` over operators on the same registry.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.registry != other.registry {
            return Err(invalid("cannot compare operators on different registries"));
        }
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Total weight on basis states carrying `photons` photons in total.
    pub fn photon_number_weight(&self, photons: usize) -> f64 {
        self.registry
            .basis()
            .enumerate()
            .filter(|(_, s)| s.total_photons() == photons)
            .map(|(i, _)| self.matrix[(i, i)].re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_modes() -> ModeRegistry {
        ModeRegistry::with_modes([("a", 3), ("b", 4)]).unwrap()
    }

    #[test]
    fn registry_rejects_duplicates_and_small_cutoffs() {
        let mut reg = ModeRegistry::new();
        reg.push("H", 4).unwrap();
        assert_eq!(reg.push("H", 4), Err(Error::ModeExists("H".into())));
        assert!(matches!(reg.push("x", 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn basis_enumeration_is_lexicographic() {
        let reg = two_modes();
        let states: Vec<_> = reg.basis().take(5).collect();
        assert_eq!(states[0], OccupationBasisState::from([0, 0]));
        assert_eq!(states[1], OccupationBasisState::from([0, 1]));
        assert_eq!(states[4], OccupationBasisState::from([1, 0]));
        for (i, s) in reg.basis().enumerate() {
            assert_eq!(reg.index_of(&s).unwrap(), i);
        }
    }

    #[test]
    fn make_state_vacuum_and_normalization() {
        let reg = two_modes();
        let vac = DensityOperator::pure(reg.clone(), [(OccupationBasisState::from([0, 0]), c(1.0))]).unwrap();
        assert!((vac.trace() - 1.0).abs() < 1e-15);
        assert_eq!(vac.matrix()[(0, 0)], c(1.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = DensityOperator::pure(
            reg.clone(),
            [
                (OccupationBasisState::from([1, 0]), c(h)),
                (OccupationBasisState::from([0, 1]), c(h)),
            ],
        )
        .unwrap();
        let b = DensityOperator::pure(
            reg,
            [
                (OccupationBasisState::from([1, 0]), c(2.0)),
                (OccupationBasisState::from([0, 1]), c(2.0)),
            ],
        )
        .unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
        let hv = a
            .element(&OccupationBasisState::from([1, 0]), &OccupationBasisState::from([0, 1]))
            .unwrap();
        assert!((hv - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn make_state_errors() {
        let reg = two_modes();
        assert!(matches!(
            DensityOperator::pure(reg.clone(), [(OccupationBasisState::from([3, 0]), c(1.0))]),
            Err(Error::CutoffExceeded { .. })
        ));
        assert_eq!(
            DensityOperator::pure(reg, [(OccupationBasisState::from([1, 0]), c(0.0))]).unwrap_err(),
            Error::DegenerateState
        );
    }

    #[test]
    fn attach_then_trace_restores_state() {
        let q = PolarizationQubit::balanced().density(4).unwrap();
        let vac = DensityOperator::fock("e", 4, 0).unwrap();
        let one = DensityOperator::fock("p", 3, 1).unwrap();
        let with_e = q.attach_mode("e", &vac).unwrap();
        assert_eq!(with_e.registry().labels(), &["H", "V", "e"]);
        assert!((with_e.trace() - 1.0).abs() < 1e-15);
        assert!(matches!(with_e.attach_mode("e", &vac), Err(Error::ModeExists(_))));
        let with_p = with_e.attach_mode("p", &one).unwrap();
        let (_, p1) = with_p.project_mode("p", 1).unwrap();
        assert!((p1 - 1.0).abs() < 1e-15);
        let back = with_p.partial_trace("p").unwrap().partial_trace("e").unwrap();
        assert!(back.max_abs_diff(&q).unwrap() < 1e-15);
    }

    #[test]
    fn projection_outcomes() {
        let q = PolarizationQubit::balanced().density(4).unwrap();
        let with_e = q.attach_mode("e", &DensityOperator::fock("e", 4, 0).unwrap()).unwrap();
        let (proj, p) = with_e.project_mode("e", 0).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(proj.max_abs_diff(&q).unwrap() < 1e-15);
        let one = DensityOperator::fock("p", 4, 1).unwrap();
        let (zero, p0) = q.attach_mode("p", &one).unwrap().project_mode("p", 0).unwrap();
        assert_eq!(p0, 0.0);
        assert_eq!(zero.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
        assert!(matches!(q.project_mode("nope", 0), Err(Error::UnknownMode(_))));
        assert!(matches!(q.partial_trace("nope"), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn tracing_a_bell_like_state_gives_maximally_mixed_marginal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let reg = ModeRegistry::with_modes([("a", 2), ("b", 2)]).unwrap();
        let bell = DensityOperator::pure(
            reg,
            [
                (OccupationBasisState::from([1, 0]), c(h)),
                (OccupationBasisState::from([0, 1]), c(h)),
            ],
        )
        .unwrap();
        let marginal = bell.partial_trace("b").unwrap();
        let expected = DensityOperator::diagonal("a", &[0.5, 0.5]).unwrap();
        assert!(marginal.max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn normalize_rules() {
        let q = PolarizationQubit::balanced().density(4).unwrap();
        assert!(q.normalize().unwrap().max_abs_diff(&q).unwrap() < 1e-15);
        let z = DensityOperator::zero(q.registry().clone());
        assert!(matches!(z.normalize(), Err(Error::ZeroProbabilityEvent(_))));
        let half = q.scaled(0.5).normalize().unwrap();
        assert!((half.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_unitary_leaves_state_unchanged() {
        let q = PolarizationQubit::new(c(0.6), C64::new(0.0, 0.8))
            .unwrap()
            .density(4)
            .unwrap();
        let out = q
            .apply_two_mode_unitary("H", "V", &TwoModeUnitary::identity(4, 4))
            .unwrap();
        assert!(out.max_abs_diff(&q).unwrap() < 1e-15);
        assert!(matches!(
            q.apply_two_mode_unitary("H", "X", &TwoModeUnitary::identity(4, 4)),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn unitary_must_conserve_photon_number() {
        let mut m = DMatrix::<C64>::identity(4, 4);
        m[(0, 1)] = c(0.1);
        assert!(TwoModeUnitary::from_matrix(2, 2, m).is_err());
    }

    #[test]
    fn reorder_and_back_is_identity() {
        let reg = ModeRegistry::with_modes([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let rho = DensityOperator::pure(
            reg,
            [
                (OccupationBasisState::from([1, 2, 0]), C64::new(0.3, 0.1)),
                (OccupationBasisState::from([0, 1, 1]), c(0.7)),
                (OccupationBasisState::from([1, 0, 1]), C64::new(0.0, -0.4)),
            ],
        )
        .unwrap();
        let permuted = rho.reorder(&["c", "a", "b"]).unwrap();
        assert_eq!(permuted.registry().labels(), &["c", "a", "b"]);
        let e = permuted
            .element(
                &OccupationBasisState::from([0, 1, 2]),
                &OccupationBasisState::from([1, 0, 1]),
            )
            .unwrap();
        let e0 = rho
            .element(
                &OccupationBasisState::from([1, 2, 0]),
                &OccupationBasisState::from([0, 1, 1]),
            )
            .unwrap();
        assert_eq!(e, e0);
        let back = permuted.reorder(&["a", "b", "c"]).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn extend_cutoff_pads_with_zeros() {
        let q = PolarizationQubit::balanced().density(2).unwrap();
        let big = q.extend_cutoff("H", 5).unwrap();
        assert_eq!(big.registry().cutoffs(), &[5, 2]);
        let hv = big
            .element(&OccupationBasisState::from([1, 0]), &OccupationBasisState::from([0, 1]))
            .unwrap();
        assert!((hv - c(0.5)).norm() < 1e-15);
        assert!((big.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qubit_norm_is_enforced() {
        assert!(PolarizationQubit::new(c(1.0), c(1.0)).is_err());
        let q = PolarizationQubit::normalized(c(2.0), c(2.0)).unwrap();
        assert!((q.c1.norm_sqr() - 0.5).abs() < 1e-15);
        assert_eq!(
            PolarizationQubit::normalized(c(0.0), c(0.0)).unwrap_err(),
            Error::DegenerateState
        );
    }
}
