//! Desk-scale model of a bidirectionally pumped photon-pair source with a
//! path-encoded signal photon and a polarization-encoded idler.
//!
//! A green pump runs through a nonlinear crystal in both directions;
//! whichever direction converts, the long-wavelength signal ends up in one
//! of two paths and the short-wavelength idler in the matching
//! polarization, so the pair leaves in a superposition of
//! |path1 H> and |path2 V> whose relative phase is set by the
//! interferometer path mismatch. The crate models that state and the chain
//! that measures it: a passive four-port signal analyzer, a rotatable
//! idler analyzer, rate-based coincidence counting with accidentals, and
//! the piezo loop that holds the mismatch (and with it the phase) against
//! drift.
//!
//! Modules:
//! - [`state`]: two-photon amplitude tables and the transforms on them.
//! - [`elements`]: frozen matrix conventions of the optical elements.
//! - [`source`]: emitted state vs mismatch, coherence, and pump settings.
//! - [`detection`]: port probabilities, count rates, and derived metrics.
//! - [`lock`]: monitor fringe, PI controller, and lock-run statistics.
//!
//! Everything that carries amplitudes or probabilities is generic over the
//! float width through [`Scalar`]; the `*32` aliases pick `f32`, the plain
//! ones `f64`. Rates, configs, and the lock loop stay `f64` — they hold
//! calibration constants, not per-event amplitudes.

pub mod detection;
pub mod elements;
pub mod error;
pub mod lock;
pub mod scalar;
pub mod source;
pub mod state;

pub use error::{CoreError, Result};
pub use scalar::Scalar;

pub use detection::{
    expected_rates, fringe_scan, qber, simulate_counts, spectral_brightness, visibility,
    CountRecord, DetectorConfig, PORT_ORDER,
};
pub use lock::{in_band_fraction, run_lock, setpoint_for_phi, LockConfig, LockSample};
pub use source::{effective_state, ideal_state, output_phase, SourceConfig};
pub use state::{IdlerMode, SignalMode};

/// Two-photon pure state over `f64` amplitudes.
pub type PureState = state::BiPhotonPureState<f64>;
/// Two-photon mixed state over `f64` amplitudes.
pub type MixedState = state::BiPhotonMixedState<f64>;
/// Two-photon pure state over `f32` amplitudes.
pub type PureState32 = state::BiPhotonPureState<f32>;
/// Two-photon mixed state over `f32` amplitudes.
pub type MixedState32 = state::BiPhotonMixedState<f32>;
/// Optical element over `f64` amplitudes.
pub type Element = elements::ElementSpec<f64>;
/// Optical element over `f32` amplitudes.
pub type Element32 = elements::ElementSpec<f32>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_precision_states_agree_with_double_to_float_accuracy() {
        let phi = -std::f32::consts::FRAC_PI_2;
        let narrow = source::ideal_state::<f32>(phi);
        let wide = source::ideal_state::<f64>(f64::from(phi));
        for (s, sw) in [(SignalMode::Path1, 0), (SignalMode::Path2, 1)] {
            for i in [IdlerMode::H, IdlerMode::V] {
                let a32 = narrow.amplitude(s, i).unwrap();
                let a64 = wide.amplitude(s, i).unwrap();
                assert!(
                    (f64::from(a32.re) - a64.re).abs() < 1e-6
                        && (f64::from(a32.im) - a64.im).abs() < 1e-6,
                    "row {sw} amplitudes diverge between widths"
                );
            }
        }
    }

    #[test]
    fn element_aliases_expose_both_widths() {
        let wide: Element = elements::hwp(0.5_f64);
        let narrow: Element32 = elements::hwp(0.5_f32);
        assert!(wide.unitarity_deviation() < 1e-12);
        assert!(f64::from(narrow.unitarity_deviation()) < 1e-5);
    }
}
