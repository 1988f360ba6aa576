//! Active stabilization of the pump interferometer phase.
//!
//! A weak reference beam at the pump wavelength traverses the same
//! interferometer and lands on a pair of complementary monitor ports, so
//! one fringe period in the monitor signal corresponds to one pump
//! wavelength of path mismatch — a much finer ruler than the signal
//! wavelength that sets the emitted phase. The loop holds the monitor
//! intensity at the value corresponding to the requested emitted phase.
//!
//! Control is a sampled PI loop on a piezo-mounted mirror: each step the
//! environment drifts (a random walk plus an optional slow sine), the
//! monitor fringe is read at the drifted position, the intensity error is
//! converted to a displacement estimate through the local fringe slope, and
//! the piezo is stepped against it. The integrator is clamped to half a
//! monitor fringe so a transient cannot wind it past the adjacent fringe.
//! Acquisition is not the loop's job: the run starts by slewing the piezo
//! so the mismatch sits at the setpoint (the counterpart of an initial
//! coarse alignment), after which small-signal linearization around the
//! setpoint is valid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::source::{phase_for_mismatch_nm, wrap_phase};

/// Minimum usable fringe slope (per nm); below this the error signal has no
/// defined sign and the setpoint is rejected.
const MIN_LOCKABLE_SLOPE_PER_NM: f64 = 1e-12;

/// Proportional and integral gains of the piezo loop. The error signal is a
/// displacement estimate in nm, so `kp` is dimensionless and `ki` is per
/// second.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    pub kp: f64,
    pub ki: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains { kp: 0.5, ki: 5.0 }
    }
}

/// Environmental path-length disturbance: a Gaussian random walk plus an
/// optional deterministic sine (thermal breathing of the table).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftModel {
    /// Random-walk strength: standard deviation grows as this times
    /// sqrt(elapsed seconds).
    pub random_walk_nm_per_sqrt_s: f64,
    pub sine_amplitude_nm: f64,
    pub sine_period_s: f64,
}

impl Default for DriftModel {
    fn default() -> Self {
        DriftModel {
            random_walk_nm_per_sqrt_s: 50.0,
            sine_amplitude_nm: 0.0,
            sine_period_s: 60.0,
        }
    }
}

impl DriftModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.random_walk_nm_per_sqrt_s >= 0.0) || !self.random_walk_nm_per_sqrt_s.is_finite()
        {
            return Err(CoreError::InvalidParameter(format!(
                "random_walk_nm_per_sqrt_s must be nonnegative, got {}",
                self.random_walk_nm_per_sqrt_s
            )));
        }
        if !(self.sine_amplitude_nm >= 0.0) || !self.sine_amplitude_nm.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "sine_amplitude_nm must be nonnegative, got {}",
                self.sine_amplitude_nm
            )));
        }
        if !(self.sine_period_s > 0.0) || !self.sine_period_s.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "sine_period_s must be positive, got {}",
                self.sine_period_s
            )));
        }
        Ok(())
    }

    /// Deterministic component at time `t_s` (does not include the walk).
    fn sine_offset_nm(&self, t_s: f64) -> f64 {
        if self.sine_amplitude_nm == 0.0 {
            return 0.0;
        }
        self.sine_amplitude_nm * (2.0 * std::f64::consts::PI * t_s / self.sine_period_s).sin()
    }
}

/// Complementary monitor-port intensities for a reference beam at
/// `lambda_p_nm` and total path mismatch `mismatch_nm`; normalized so the
/// two ports always sum to one.
pub fn mzi_intensities(mismatch_nm: f64, lambda_p_nm: f64) -> Result<(f64, f64)> {
    if !(lambda_p_nm > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "monitor wavelength must be positive, got {lambda_p_nm}"
        )));
    }
    let c = (std::f64::consts::PI * mismatch_nm / lambda_p_nm).cos();
    let i1 = c * c;
    Ok((i1, 1.0 - i1))
}

/// Derivative of the first monitor intensity with respect to mismatch
/// (per nm).
pub fn fringe_slope_per_nm(mismatch_nm: f64, lambda_p_nm: f64) -> Result<f64> {
    if !(lambda_p_nm > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "monitor wavelength must be positive, got {lambda_p_nm}"
        )));
    }
    let k = std::f64::consts::PI / lambda_p_nm;
    Ok(-k * (2.0 * k * mismatch_nm).sin())
}

/// A lock target: the mismatch realizing the requested emitted phase, with
/// the monitor intensities expected there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockSetpoint {
    pub target_phi_rad: f64,
    pub mismatch_nm: f64,
    pub intensity_1: f64,
    pub intensity_2: f64,
    pub lambda_p_nm: f64,
}

/// Maps a requested emitted phase (|phi| <= pi) to the smallest-magnitude
/// path mismatch that realizes it, and records the monitor intensities
/// there. Fails if the monitor fringe is flat at that mismatch (fringe top
/// or bottom), where no error signal exists.
pub fn setpoint_for_phi(
    target_phi_rad: f64,
    lambda_s_nm: f64,
    lambda_p_nm: f64,
) -> Result<LockSetpoint> {
    if !target_phi_rad.is_finite() || target_phi_rad.abs() > std::f64::consts::PI {
        return Err(CoreError::InvalidParameter(format!(
            "target phase must lie in [-pi, pi], got {target_phi_rad}"
        )));
    }
    if !(lambda_s_nm > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "signal wavelength must be positive, got {lambda_s_nm}"
        )));
    }
    let mismatch_nm = target_phi_rad / (2.0 * std::f64::consts::PI) * lambda_s_nm;
    let slope = fringe_slope_per_nm(mismatch_nm, lambda_p_nm)?;
    if slope.abs() < MIN_LOCKABLE_SLOPE_PER_NM {
        return Err(CoreError::UnlockableSetpoint { mismatch_nm });
    }
    let (intensity_1, intensity_2) = mzi_intensities(mismatch_nm, lambda_p_nm)?;
    Ok(LockSetpoint {
        target_phi_rad,
        mismatch_nm,
        intensity_1,
        intensity_2,
        lambda_p_nm,
    })
}

/// Displacement estimate (nm) from a measured first-port intensity:
/// the intensity error divided by the fringe slope at the setpoint.
/// Positive output means the mismatch sits beyond the setpoint by that
/// many nm, to first order.
pub fn error_signal(measured_intensity_1: f64, setpoint: &LockSetpoint) -> Result<f64> {
    let slope = fringe_slope_per_nm(setpoint.mismatch_nm, setpoint.lambda_p_nm)?;
    if slope.abs() < MIN_LOCKABLE_SLOPE_PER_NM {
        return Err(CoreError::UnlockableSetpoint {
            mismatch_nm: setpoint.mismatch_nm,
        });
    }
    Ok((measured_intensity_1 - setpoint.intensity_1) / slope)
}

/// Instantaneous loop state. Positions are in nm; the total mismatch seen
/// by the light is `environmental_offset_nm + piezo_position_nm`.
#[derive(Debug, Clone, PartialEq)]
pub struct LockState {
    pub piezo_position_nm: f64,
    pub environmental_offset_nm: f64,
    pub intensity_1: f64,
    pub intensity_2: f64,
    pub integrator: f64,
    pub time_s: f64,
    /// Random-walk part of the environmental offset (the sine part is
    /// recomputed from the time, so it must not be accumulated here).
    walk_nm: f64,
}

impl LockState {
    /// State at time zero with the given positions and a settled monitor
    /// reading; the integrator starts empty.
    pub fn with_positions(
        piezo_position_nm: f64,
        environmental_offset_nm: f64,
        lambda_p_nm: f64,
    ) -> Result<LockState> {
        let (intensity_1, intensity_2) =
            mzi_intensities(environmental_offset_nm + piezo_position_nm, lambda_p_nm)?;
        Ok(LockState {
            piezo_position_nm,
            environmental_offset_nm,
            intensity_1,
            intensity_2,
            integrator: 0.0,
            time_s: 0.0,
            walk_nm: environmental_offset_nm,
        })
    }

    pub fn mismatch_nm(&self) -> f64 {
        self.environmental_offset_nm + self.piezo_position_nm
    }
}

/// One sampled loop iteration: advance the drift by `dt_s`, read the
/// monitor fringe at the drifted position, and apply the PI correction to
/// the piezo. The returned state carries the post-correction monitor
/// reading.
pub fn controller_step(
    state: &LockState,
    gains: &Gains,
    dt_s: f64,
    drift: &DriftModel,
    setpoint: &LockSetpoint,
    rng: &mut impl Rng,
) -> Result<LockState> {
    if !(dt_s > 0.0) || !dt_s.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "controller step needs a positive dt, got {dt_s}"
        )));
    }
    drift.validate()?;
    let time_s = state.time_s + dt_s;
    let kick: f64 = rng.sample(StandardNormal);
    let walk_nm = state.walk_nm + kick * drift.random_walk_nm_per_sqrt_s * dt_s.sqrt();
    let environmental_offset_nm = walk_nm + drift.sine_offset_nm(time_s);

    let (measured_1, _) =
        mzi_intensities(environmental_offset_nm + state.piezo_position_nm, setpoint.lambda_p_nm)?;
    let error_nm = error_signal(measured_1, setpoint)?;

    let mut integrator = state.integrator + error_nm * dt_s;
    if gains.ki > 0.0 {
        let clamp = setpoint.lambda_p_nm / (2.0 * gains.ki);
        integrator = integrator.clamp(-clamp, clamp);
    }
    let piezo_position_nm =
        state.piezo_position_nm - (gains.kp * error_nm + gains.ki * integrator * dt_s);

    let (intensity_1, intensity_2) =
        mzi_intensities(environmental_offset_nm + piezo_position_nm, setpoint.lambda_p_nm)?;
    Ok(LockState {
        piezo_position_nm,
        environmental_offset_nm,
        intensity_1,
        intensity_2,
        integrator,
        time_s,
        walk_nm,
    })
}

/// One record of a lock run, taken after the correction of its step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockSample {
    pub time_s: f64,
    pub mismatch_nm: f64,
    pub phi_rad: f64,
    pub intensity_1: f64,
    pub intensity_2: f64,
}

/// Full lock-run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LockConfig {
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub target_phi_rad: f64,
    /// Environmental mismatch before the initial piezo slew.
    pub initial_mismatch_nm: f64,
    pub gains: Gains,
    pub drift: DriftModel,
}

impl Default for LockConfig {
    fn default() -> Self {
        LockConfig {
            lambda_p_nm: 532.0,
            lambda_s_nm: 810.0,
            target_phi_rad: -std::f64::consts::FRAC_PI_2,
            initial_mismatch_nm: 0.0,
            gains: Gains::default(),
            drift: DriftModel::default(),
        }
    }
}

/// Runs the loop for `duration_s` at step `dt_s` (duration of at least one
/// step) and returns one sample per step. The run first slews the piezo so
/// the starting mismatch equals the setpoint, then closes the loop.
/// Deterministic for a given seed.
pub fn run_lock(cfg: &LockConfig, duration_s: f64, dt_s: f64, seed: u64) -> Result<Vec<LockSample>> {
    if !(dt_s > 0.0) || !dt_s.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "lock step must be positive, got {dt_s}"
        )));
    }
    if !duration_s.is_finite() || duration_s < dt_s {
        return Err(CoreError::InvalidParameter(format!(
            "lock duration must cover at least one step, got {duration_s} s at dt {dt_s} s"
        )));
    }
    cfg.drift.validate()?;
    let setpoint = setpoint_for_phi(cfg.target_phi_rad, cfg.lambda_s_nm, cfg.lambda_p_nm)?;
    let initial_piezo = setpoint.mismatch_nm - cfg.initial_mismatch_nm;
    let mut state = LockState::with_positions(initial_piezo, cfg.initial_mismatch_nm, cfg.lambda_p_nm)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let steps = ((duration_s / dt_s).round() as usize).max(1);
    let mut samples = Vec::with_capacity(steps);
    for _ in 0..steps {
        state = controller_step(&state, &cfg.gains, dt_s, &cfg.drift, &setpoint, &mut rng)?;
        let mismatch = state.mismatch_nm();
        samples.push(LockSample {
            time_s: state.time_s,
            mismatch_nm: mismatch,
            phi_rad: phase_for_mismatch_nm(mismatch, cfg.lambda_s_nm),
            intensity_1: state.intensity_1,
            intensity_2: state.intensity_2,
        });
    }
    Ok(samples)
}

/// Fraction of samples after `settle_s` whose phase sits within
/// `band_rad` of the target (shortest angular distance). Zero if no sample
/// survives the settling cut.
pub fn in_band_fraction(
    samples: &[LockSample],
    target_phi_rad: f64,
    band_rad: f64,
    settle_s: f64,
) -> f64 {
    let mut kept = 0usize;
    let mut hit = 0usize;
    for s in samples {
        if s.time_s <= settle_s {
            continue;
        }
        kept += 1;
        if wrap_phase(s.phi_rad - target_phi_rad).abs() <= band_rad {
            hit += 1;
        }
    }
    if kept == 0 {
        0.0
    } else {
        hit as f64 / kept as f64
    }
}
