//! Two-photon state algebra on a small discrete mode space.
//!
//! A pure state is a complex amplitude table over (signal mode) x (idler
//! mode), at most 4 x 2 here. Signal modes are either the two interferometer
//! paths or the four analyzer output ports; idler modes are polarizations.
//! Mixed states are convex combinations of pure states sharing the same
//! bases, which is all the decoherence model downstream ever produces.
//!
//! Global phase is kept as-is: a state and its phase-rotated copy compare
//! equal only through [`BiPhotonPureState::overlap_magnitude`].

use num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// Signal-side mode label: an interferometer path or an analyzer port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalMode {
    Path1,
    Path2,
    H,
    V,
    D,
    A,
}

impl SignalMode {
    /// True for interferometer-path labels, false for port labels.
    pub fn is_path(self) -> bool {
        matches!(self, SignalMode::Path1 | SignalMode::Path2)
    }

    pub fn label(self) -> &'static str {
        match self {
            SignalMode::Path1 => "path1",
            SignalMode::Path2 => "path2",
            SignalMode::H => "H",
            SignalMode::V => "V",
            SignalMode::D => "D",
            SignalMode::A => "A",
        }
    }
}

/// Idler-side polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdlerMode {
    H,
    V,
    D,
    A,
}

impl IdlerMode {
    pub fn label(self) -> &'static str {
        match self {
            IdlerMode::H => "H",
            IdlerMode::V => "V",
            IdlerMode::D => "D",
            IdlerMode::A => "A",
        }
    }
}

/// Unitarity tolerance for transform matrices fed to the state ops.
pub const TRANSFORM_UNITARITY_TOL: f64 = 1e-10;

/// Norm deviation above which construction records a rescue factor.
const NORM_RESCUE_THRESHOLD: f64 = 1e-6;

/// Pure two-photon state: row-major amplitude table, rows indexed by the
/// signal basis, columns by the idler basis. Always unit-norm after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPhotonPureState<T: Scalar> {
    signal_basis: Vec<SignalMode>,
    idler_basis: Vec<IdlerMode>,
    amp: Vec<Complex<T>>,
    norm_correction: Option<T>,
}

fn validate_signal_basis(basis: &[SignalMode]) -> Result<()> {
    if basis.is_empty() {
        return Err(CoreError::BasisMismatch("empty signal basis".into()));
    }
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            if a == b {
                return Err(CoreError::BasisMismatch(format!(
                    "duplicate signal mode {}",
                    a.label()
                )));
            }
        }
    }
    let paths = basis.iter().filter(|m| m.is_path()).count();
    if paths != 0 && paths != basis.len() {
        return Err(CoreError::MixedSignalBasis);
    }
    Ok(())
}

fn validate_idler_basis(basis: &[IdlerMode]) -> Result<()> {
    if basis.is_empty() {
        return Err(CoreError::BasisMismatch("empty idler basis".into()));
    }
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            if a == b {
                return Err(CoreError::BasisMismatch(format!(
                    "duplicate idler mode {}",
                    a.label()
                )));
            }
        }
    }
    Ok(())
}

/// Checks that `u` is square with dimension `dim` and unitary within
/// [`TRANSFORM_UNITARITY_TOL`] (max deviation of U^dagger U from identity).
fn check_unitary<T: Scalar>(u: &[Vec<Complex<T>>], dim: usize) -> Result<()> {
    if u.len() != dim || u.iter().any(|row| row.len() != dim) {
        return Err(CoreError::BasisMismatch(format!(
            "transform must be {dim}x{dim} to match the basis"
        )));
    }
    let mut worst = T::zero();
    for i in 0..dim {
        for j in 0..dim {
            let mut sum = Complex::new(T::zero(), T::zero());
            for row in u.iter() {
                sum = sum + row[i].conj() * row[j];
            }
            let target = if i == j { T::one() } else { T::zero() };
            let dev = (sum - Complex::new(target, T::zero())).norm();
            if dev > worst {
                worst = dev;
            }
        }
    }
    if worst > T::of(TRANSFORM_UNITARITY_TOL) {
        return Err(CoreError::NonUnitary {
            deviation: worst.as_f64(),
            tolerance: TRANSFORM_UNITARITY_TOL,
        });
    }
    Ok(())
}

/// Builds a pure state from a nested amplitude table (rows follow the signal
/// basis, row entries follow the idler basis). The result is normalized; if
/// the input norm deviated from one by more than 1e-6 the applied factor is
/// recorded and queryable via [`BiPhotonPureState::norm_correction`].
pub fn pure_from_amplitudes<T: Scalar>(
    signal_basis: Vec<SignalMode>,
    idler_basis: Vec<IdlerMode>,
    amplitudes: Vec<Vec<Complex<T>>>,
) -> Result<BiPhotonPureState<T>> {
    validate_signal_basis(&signal_basis)?;
    validate_idler_basis(&idler_basis)?;
    if amplitudes.len() != signal_basis.len()
        || amplitudes.iter().any(|row| row.len() != idler_basis.len())
    {
        return Err(CoreError::BasisMismatch(format!(
            "amplitude table must be {}x{}",
            signal_basis.len(),
            idler_basis.len()
        )));
    }
    let mut amp: Vec<Complex<T>> = amplitudes.into_iter().flatten().collect();
    let norm_sq: T = amp.iter().map(|a| a.norm_sqr()).sum();
    if norm_sq <= T::zero() {
        return Err(CoreError::DegenerateState);
    }
    let norm = norm_sq.sqrt();
    for a in &mut amp {
        *a = Complex::new(a.re / norm, a.im / norm);
    }
    let correction = if (norm - T::one()).abs() > T::of(NORM_RESCUE_THRESHOLD) {
        Some(norm)
    } else {
        None
    };
    Ok(BiPhotonPureState {
        signal_basis,
        idler_basis,
        amp,
        norm_correction: correction,
    })
}

impl<T: Scalar> BiPhotonPureState<T> {
    pub fn signal_basis(&self) -> &[SignalMode] {
        &self.signal_basis
    }

    pub fn idler_basis(&self) -> &[IdlerMode] {
        &self.idler_basis
    }

    /// Factor the input amplitudes were divided by at construction, when the
    /// deviation from unit norm exceeded 1e-6.
    pub fn norm_correction(&self) -> Option<T> {
        self.norm_correction
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_basis.len()
    }

    pub fn idler_dim(&self) -> usize {
        self.idler_basis.len()
    }

    fn signal_index(&self, mode: SignalMode) -> Result<usize> {
        self.signal_basis
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| CoreError::UnknownMode(mode.label().into()))
    }

    fn idler_index(&self, mode: IdlerMode) -> Result<usize> {
        self.idler_basis
            .iter()
            .position(|&m| m == mode)
            .ok_or_else(|| CoreError::UnknownMode(mode.label().into()))
    }

    /// Amplitude at (row, col) in basis order.
    pub fn amplitude_at(&self, row: usize, col: usize) -> Complex<T> {
        self.amp[row * self.idler_dim() + col]
    }

    pub fn amplitude(&self, signal: SignalMode, idler: IdlerMode) -> Result<Complex<T>> {
        Ok(self.amplitude_at(self.signal_index(signal)?, self.idler_index(idler)?))
    }

    /// Joint detection probability |amplitude|^2 for one (signal, idler)
    /// mode pair.
    pub fn joint_probability(&self, signal: SignalMode, idler: IdlerMode) -> Result<T> {
        Ok(self.amplitude(signal, idler)?.norm_sqr())
    }

    /// Applies a unitary to the signal side (left-multiplication of the
    /// amplitude table) and relabels the signal basis.
    pub fn apply_signal_transform(
        &self,
        u: &[Vec<Complex<T>>],
        new_basis: &[SignalMode],
    ) -> Result<Self> {
        let n = self.signal_dim();
        validate_signal_basis(new_basis)?;
        if new_basis.len() != n {
            return Err(CoreError::BasisMismatch(format!(
                "new signal basis must have {n} modes"
            )));
        }
        check_unitary(u, n)?;
        let cols = self.idler_dim();
        let mut amp = vec![Complex::new(T::zero(), T::zero()); n * cols];
        for d in 0..n {
            for j in 0..cols {
                let mut sum = Complex::new(T::zero(), T::zero());
                for s in 0..n {
                    sum = sum + u[d][s] * self.amplitude_at(s, j);
                }
                amp[d * cols + j] = sum;
            }
        }
        Ok(Self {
            signal_basis: new_basis.to_vec(),
            idler_basis: self.idler_basis.clone(),
            amp,
            norm_correction: self.norm_correction,
        })
    }

    /// Applies a unitary to the idler side (right-multiplication of the
    /// amplitude table by U transposed) and relabels the idler basis.
    pub fn apply_idler_transform(
        &self,
        u: &[Vec<Complex<T>>],
        new_basis: &[IdlerMode],
    ) -> Result<Self> {
        let n = self.idler_dim();
        validate_idler_basis(new_basis)?;
        if new_basis.len() != n {
            return Err(CoreError::BasisMismatch(format!(
                "new idler basis must have {n} modes"
            )));
        }
        check_unitary(u, n)?;
        let rows = self.signal_dim();
        let mut amp = vec![Complex::new(T::zero(), T::zero()); rows * n];
        for s in 0..rows {
            for d in 0..n {
                let mut sum = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    sum = sum + self.amplitude_at(s, j) * u[d][j];
                }
                amp[s * n + d] = sum;
            }
        }
        Ok(Self {
            signal_basis: self.signal_basis.clone(),
            idler_basis: new_basis.to_vec(),
            amp,
            norm_correction: self.norm_correction,
        })
    }

    /// |<self|other>| for states on identical bases. Equals one exactly when
    /// the states differ by at most a global phase.
    pub fn overlap_magnitude(&self, other: &Self) -> Result<T> {
        if self.signal_basis != other.signal_basis || self.idler_basis != other.idler_basis {
            return Err(CoreError::BasisMismatch(
                "overlap requires identical bases".into(),
            ));
        }
        let mut sum = Complex::new(T::zero(), T::zero());
        for (a, b) in self.amp.iter().zip(other.amp.iter()) {
            sum = sum + a.conj() * *b;
        }
        Ok(sum.norm())
    }
}

/// Convex combination of pure states on identical bases. Weights are stored
/// normalized to unit sum in the order given at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPhotonMixedState<T: Scalar> {
    components: Vec<(T, BiPhotonPureState<T>)>,
}

/// Builds a mixed state from `(weight, pure state)` pairs. Weights must be
/// nonnegative with a positive sum and are renormalized to sum to one; all
/// components must share the same bases.
pub fn mixture<T: Scalar>(
    components: Vec<(T, BiPhotonPureState<T>)>,
) -> Result<BiPhotonMixedState<T>> {
    if components.is_empty() {
        return Err(CoreError::EmptyMixture);
    }
    if components.iter().any(|(w, _)| *w < T::zero() || !w.is_finite()) {
        return Err(CoreError::BadWeights);
    }
    let total: T = components.iter().map(|(w, _)| *w).sum();
    if total <= T::zero() {
        return Err(CoreError::BadWeights);
    }
    let first = &components[0].1;
    for (_, state) in &components[1..] {
        if state.signal_basis() != first.signal_basis()
            || state.idler_basis() != first.idler_basis()
        {
            return Err(CoreError::BasisMismatch(
                "mixture components must share bases".into(),
            ));
        }
    }
    Ok(BiPhotonMixedState {
        components: components
            .into_iter()
            .map(|(w, s)| (w / total, s))
            .collect(),
    })
}

impl<T: Scalar> BiPhotonMixedState<T> {
    pub fn components(&self) -> &[(T, BiPhotonPureState<T>)] {
        &self.components
    }

    pub fn signal_basis(&self) -> &[SignalMode] {
        self.components[0].1.signal_basis()
    }

    pub fn idler_basis(&self) -> &[IdlerMode] {
        self.components[0].1.idler_basis()
    }

    /// Weighted joint detection probability for one mode pair.
    pub fn joint_probability(&self, signal: SignalMode, idler: IdlerMode) -> Result<T> {
        let mut p = T::zero();
        for (w, state) in &self.components {
            p = p + *w * state.joint_probability(signal, idler)?;
        }
        Ok(p)
    }

    /// Applies a signal-side unitary to every component.
    pub fn apply_signal_transform(
        &self,
        u: &[Vec<Complex<T>>],
        new_basis: &[SignalMode],
    ) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|(w, s)| Ok((*w, s.apply_signal_transform(u, new_basis)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    /// Applies an idler-side unitary to every component.
    pub fn apply_idler_transform(
        &self,
        u: &[Vec<Complex<T>>],
        new_basis: &[IdlerMode],
    ) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|(w, s)| Ok((*w, s.apply_idler_transform(u, new_basis)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }
}

impl<T: Scalar> From<BiPhotonPureState<T>> for BiPhotonMixedState<T> {
    fn from(state: BiPhotonPureState<T>) -> Self {
        BiPhotonMixedState {
            components: vec![(T::one(), state)],
        }
    }
}
