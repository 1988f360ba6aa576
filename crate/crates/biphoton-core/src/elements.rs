//! Optical-element matrices with frozen phase conventions.
//!
//! Every two-port element is a 2x2 complex Jones matrix. The conventions are
//! fixed so downstream algebra is deterministic:
//!
//! * the symmetric lossless beam splitter has its transmitted amplitude
//!   leading the reflected one by pi/2 (t = i * sqrt(1 - r^2) for real r),
//! * the half-wave plate is the reflection matrix
//!   [[cos 2t, sin 2t], [sin 2t, -cos 2t]] on (H, V),
//! * the quarter-wave plate reduces to diag(1, i) at t = 0 with no extra
//!   global phase,
//! * a propagation delay of dL at wavelength lambda multiplies the mode by
//!   exp(i 2 pi dL / lambda).
//!
//! The polarizing beam splitter is deterministic routing, not a rotation, so
//! it is exposed as a mode map rather than a matrix.

use num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// Element vocabulary covered by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    SymmetricBs,
    Hwp,
    Qwp,
    Pbs,
    PhaseShift,
}

/// A constructed two-port element: its kind, the defining parameters, and
/// the resulting Jones matrix (rows and columns in the element's own port
/// order; waveplates act on (H, V)).
#[derive(Debug, Clone, PartialEq)]
pub struct ElementSpec<T: Scalar> {
    pub kind: ElementKind,
    /// Defining parameters as (name, value) pairs, e.g. ("theta_rad", t).
    pub parameters: Vec<(&'static str, T)>,
    pub matrix: [[Complex<T>; 2]; 2],
}

impl<T: Scalar> ElementSpec<T> {
    /// Matrix as nested rows, the shape the state transforms consume.
    pub fn rows(&self) -> Vec<Vec<Complex<T>>> {
        self.matrix.iter().map(|r| r.to_vec()).collect()
    }

    /// Max-norm deviation of U^dagger U from the identity.
    pub fn unitarity_deviation(&self) -> T {
        let u = &self.matrix;
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let sum = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
                let target = if i == j { T::one() } else { T::zero() };
                let dev = (sum - Complex::new(target, T::zero())).norm();
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }
}

/// Lossless symmetric beam splitter with real reflection amplitude `r`:
/// U = [[r, it], [it, r]] with t = sqrt(1 - r^2), so arg(t) - arg(r) = pi/2
/// by construction. `r = 1/sqrt(2)` is the 50-50 case.
pub fn symmetric_bs<T: Scalar>(r: T) -> Result<ElementSpec<T>> {
    if !(r > T::zero() && r < T::one()) {
        return Err(CoreError::InvalidParameter(format!(
            "beam splitter reflection amplitude must lie strictly in (0, 1), got {r}"
        )));
    }
    let t = (T::one() - r * r).sqrt();
    let zero = T::zero();
    Ok(ElementSpec {
        kind: ElementKind::SymmetricBs,
        parameters: vec![("r", r)],
        matrix: [
            [Complex::new(r, zero), Complex::new(zero, t)],
            [Complex::new(zero, t), Complex::new(r, zero)],
        ],
    })
}

/// Half-wave plate with fast axis at `theta` to horizontal:
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]] on (H, V). Involutive.
pub fn hwp<T: Scalar>(theta_rad: T) -> ElementSpec<T> {
    let two = T::of(2.0);
    let c = (two * theta_rad).cos();
    let s = (two * theta_rad).sin();
    let zero = T::zero();
    ElementSpec {
        kind: ElementKind::Hwp,
        parameters: vec![("theta_rad", theta_rad)],
        matrix: [
            [Complex::new(c, zero), Complex::new(s, zero)],
            [Complex::new(s, zero), Complex::new(-c, zero)],
        ],
    }
}

/// Quarter-wave plate with fast axis at `theta`: R(t) diag(1, i) R(-t),
/// which is diag(1, i) at t = 0.
pub fn qwp<T: Scalar>(theta_rad: T) -> ElementSpec<T> {
    let c = theta_rad.cos();
    let s = theta_rad.sin();
    let zero = T::zero();
    let one = Complex::new(T::one(), zero);
    let i = Complex::new(zero, T::one());
    // R(t) diag(1, i) R(-t) expanded entrywise.
    let cc = Complex::new(c * c, zero);
    let ss = Complex::new(s * s, zero);
    let cs = Complex::new(c * s, zero);
    ElementSpec {
        kind: ElementKind::Qwp,
        parameters: vec![("theta_rad", theta_rad)],
        matrix: [
            [cc + i * ss, cs * (one - i)],
            [cs * (one - i), ss + i * cc],
        ],
    }
}

/// Which output arm of a polarizing beam splitter a photon takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbsPort {
    Transmitted,
    Reflected,
}

/// Deterministic polarization routing: H transmits, V reflects. Superposition
/// inputs split according to their H/V weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PbsRouting;

impl PbsRouting {
    /// The definite output arm for an H or V input; `None` for D/A inputs,
    /// which have no definite arm.
    pub fn route(&self, mode: crate::state::IdlerMode) -> Option<PbsPort> {
        use crate::state::IdlerMode;
        match mode {
            IdlerMode::H => Some(PbsPort::Transmitted),
            IdlerMode::V => Some(PbsPort::Reflected),
            IdlerMode::D | IdlerMode::A => None,
        }
    }

    /// (transmit, reflect) probabilities from the H/V decomposition of the
    /// input mode.
    pub fn split_probabilities<T: Scalar>(&self, mode: crate::state::IdlerMode) -> (T, T) {
        use crate::state::IdlerMode;
        let half = T::of(0.5);
        match mode {
            IdlerMode::H => (T::one(), T::zero()),
            IdlerMode::V => (T::zero(), T::one()),
            IdlerMode::D | IdlerMode::A => (half, half),
        }
    }
}

/// The polarizing beam splitter as a mode map.
pub fn pbs() -> PbsRouting {
    PbsRouting
}

/// Phase factor exp(i 2 pi dL / lambda) picked up by a delay of `delta_l_nm`
/// at wavelength `lambda_nm`.
pub fn phase_shift<T: Scalar>(lambda_nm: T, delta_l_nm: T) -> Result<Complex<T>> {
    if lambda_nm <= T::zero() {
        return Err(CoreError::InvalidParameter(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    let phase = T::of(2.0) * T::PI() * delta_l_nm / lambda_nm;
    Ok(Complex::from_polar(T::one(), phase))
}

/// Proper rotation taking the H/V idler basis to D/A: H -> (D - A)/sqrt(2),
/// V -> (D + A)/sqrt(2). Rows are (D, A), columns (H, V).
pub fn hv_to_da_rotation<T: Scalar>() -> Vec<Vec<Complex<T>>> {
    let isq = Complex::new(T::of(1.0 / std::f64::consts::SQRT_2), T::zero());
    vec![vec![isq, isq], vec![-isq, isq]]
}

/// 50-50 symmetric splitter matrix for interfering the two source paths:
/// path1 -> (D + iA)/sqrt(2), path2 -> (iD + A)/sqrt(2). Rows are the output
/// ports (D, A), columns the input paths.
pub fn path_interference_splitter<T: Scalar>() -> Vec<Vec<Complex<T>>> {
    symmetric_bs(T::of(1.0 / std::f64::consts::SQRT_2))
        .expect("1/sqrt(2) lies in (0,1)")
        .rows()
}
