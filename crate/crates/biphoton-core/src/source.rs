//! Emitted two-photon state as a function of the physical source settings.
//!
//! The interferometer geometry enters through a single number, the signal
//! minus idler path mismatch. It fixes the relative phase of the emitted
//! superposition (one signal wavelength of mismatch is one full turn) and,
//! on a much longer scale, the temporal overlap of the two emission
//! processes: once the mismatch approaches the idler coherence length
//! lambda^2 / d_lambda, the cross term decays and the state degrades toward
//! a classical correlated mixture. The decay profile is modeled as a
//! Gaussian whose FWHM equals the coherence length.
//!
//! Pump-arm balance is a minimal model: the pump half-wave plate at angle a
//! splits the pump with amplitudes (cos 2a, sin 2a) between the two
//! directions, which weight the two superposition terms, and the usable
//! (interfering) pair rate scales with sin^2 of twice the arm angle.

use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::state::{
    mixture, pure_from_amplitudes, BiPhotonMixedState, BiPhotonPureState, IdlerMode, SignalMode,
};
use num_complex::Complex;

/// Singles-rate calibration constant (generated pairs per second per mW of
/// pump, balanced arms) chosen so the default configuration peaks at
/// 1.1e4 coincidences per second per analyzer port: with efficiencies 0.6
/// and 0.18, 1.2 mW of pump, and a per-port marginal of 1/4, this equals
/// 1.1e4 / (0.25 * 0.6 * 0.18 * 1.2).
pub const DEFAULT_PAIR_RATE_COEFF: f64 = 339_506.172_839_506_17;

/// Tolerance on the energy-conservation residual enforced by strict-mode
/// validation, wide enough to admit rounded nanometer wavelength triples.
pub const ENERGY_RESIDUAL_TOL_PER_NM: f64 = 1e-7;

/// Physical configuration of the pair source.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Pump wavelength (nm).
    pub lambda_p_nm: f64,
    /// Signal wavelength (nm); sets the phase scale of the mismatch.
    pub lambda_s_nm: f64,
    /// Idler wavelength (nm); sets the coherence length together with the
    /// idler bandwidth.
    pub lambda_i_nm: f64,
    /// Signal interferometer path-length difference (nm).
    pub delta_l_s_nm: f64,
    /// Idler interferometer path-length difference (nm).
    pub delta_l_i_nm: f64,
    /// Pump power (mW). Zero is allowed and means the pump is blocked.
    pub pump_power_mw: f64,
    /// Pump half-wave-plate angle (rad) balancing the two pump directions;
    /// arms carry amplitudes cos(2a) and sin(2a), balanced at pi/8.
    pub pump_hwp_angle_rad: f64,
    /// Idler FWHM bandwidth (nm).
    pub bandwidth_i_nm: f64,
    /// Crystal length (mm); only enters focusing diagnostics.
    pub crystal_length_mm: f64,
    /// Pump waist radius in the crystal (um).
    pub waist_radius_um: f64,
    /// Generated singles per second per mW at balanced arms.
    pub pair_rate_coeff: f64,
    /// When true, validation rejects wavelength triples whose inverse sum
    /// residual exceeds [`ENERGY_RESIDUAL_TOL_PER_NM`].
    pub strict_energy: bool,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            lambda_p_nm: 532.0,
            lambda_s_nm: 810.0,
            lambda_i_nm: 1550.0,
            delta_l_s_nm: -202.5,
            delta_l_i_nm: 0.0,
            pump_power_mw: 1.2,
            pump_hwp_angle_rad: std::f64::consts::FRAC_PI_8,
            bandwidth_i_nm: 0.8,
            crystal_length_mm: 50.0,
            waist_radius_um: 125.0,
            pair_rate_coeff: DEFAULT_PAIR_RATE_COEFF,
            strict_energy: true,
        }
    }
}

impl SourceConfig {
    /// Checks positivity requirements and, in strict mode, the
    /// energy-conservation residual. Messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_p_nm", self.lambda_p_nm),
            ("lambda_s_nm", self.lambda_s_nm),
            ("lambda_i_nm", self.lambda_i_nm),
            ("bandwidth_i_nm", self.bandwidth_i_nm),
            ("crystal_length_mm", self.crystal_length_mm),
            ("waist_radius_um", self.waist_radius_um),
            ("pair_rate_coeff", self.pair_rate_coeff),
        ];
        for (key, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "{key} must be positive, got {value}"
                )));
            }
        }
        for (key, value) in [
            ("delta_l_s_nm", self.delta_l_s_nm),
            ("delta_l_i_nm", self.delta_l_i_nm),
            ("pump_hwp_angle_rad", self.pump_hwp_angle_rad),
        ] {
            if !value.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "{key} must be finite, got {value}"
                )));
            }
        }
        if !(self.pump_power_mw >= 0.0) || !self.pump_power_mw.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "pump_power_mw must be nonnegative, got {}",
                self.pump_power_mw
            )));
        }
        if self.strict_energy {
            let residual =
                energy_conservation_residual(self.lambda_p_nm, self.lambda_s_nm, self.lambda_i_nm)?;
            if residual.abs() > ENERGY_RESIDUAL_TOL_PER_NM {
                return Err(CoreError::InvalidParameter(format!(
                    "wavelength triple violates energy conservation: residual \
                     {residual:.3e} nm^-1 exceeds {ENERGY_RESIDUAL_TOL_PER_NM:.0e} \
                     (set strict_energy = false to allow)"
                )));
            }
        }
        Ok(())
    }

    /// Signal-minus-idler path mismatch (nm), the one number the emitted
    /// phase and the coherence weight depend on.
    pub fn path_mismatch_nm(&self) -> f64 {
        self.delta_l_s_nm - self.delta_l_i_nm
    }

    /// Arm-amplitude angle: the pump waveplate at `a` yields arm amplitudes
    /// (cos 2a, sin 2a).
    pub fn arm_balance_angle_rad(&self) -> f64 {
        2.0 * self.pump_hwp_angle_rad
    }
}

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_phase<T: Scalar>(rad: T) -> T {
    let two_pi = T::of(2.0) * T::PI();
    let mut x = rad % two_pi;
    if x <= -T::PI() {
        x += two_pi;
    } else if x > T::PI() {
        x -= two_pi;
    }
    x
}

/// Phase of the emitted superposition for a given path mismatch:
/// 2 pi * mismatch / lambda_signal, wrapped to (-pi, pi].
pub fn phase_for_mismatch_nm<T: Scalar>(mismatch_nm: T, lambda_s_nm: T) -> T {
    wrap_phase(T::of(2.0) * T::PI() * (mismatch_nm / lambda_s_nm))
}

/// Emitted-state phase for a full source configuration.
pub fn output_phase(cfg: &SourceConfig) -> f64 {
    phase_for_mismatch_nm(cfg.path_mismatch_nm(), cfg.lambda_s_nm)
}

/// Balanced two-photon superposition (|path1 H> + e^{i phi} |path2 V>) /
/// sqrt(2): the signal is path-encoded, with path 1 accompanying an H idler
/// and path 2 a V idler.
pub fn ideal_state<T: Scalar>(phi: T) -> BiPhotonPureState<T> {
    ideal_state_with_balance(phi, T::FRAC_PI_4())
}

/// Arm-weighted superposition
/// cos(beta) |path1 H> + e^{i phi} sin(beta) |path2 V>.
pub fn ideal_state_with_balance<T: Scalar>(phi: T, beta: T) -> BiPhotonPureState<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let first = Complex::new(beta.cos(), T::zero());
    let second = Complex::from_polar(T::one(), phi) * beta.sin();
    pure_from_amplitudes(
        vec![SignalMode::Path1, SignalMode::Path2],
        vec![IdlerMode::H, IdlerMode::V],
        vec![vec![first, zero], vec![zero, second]],
    )
    .expect("weighted superposition amplitudes are well formed")
}

/// Coherence length lambda^2 / d_lambda (nm).
pub fn coherence_length_nm<T: Scalar>(lambda_nm: T, bandwidth_nm: T) -> Result<T> {
    if lambda_nm <= T::zero() || bandwidth_nm <= T::zero() {
        return Err(CoreError::InvalidParameter(
            "coherence length needs positive wavelength and bandwidth".into(),
        ));
    }
    Ok(lambda_nm * lambda_nm / bandwidth_nm)
}

/// Temporal-overlap weight of the interfering term: a Gaussian in the path
/// mismatch, equal to one at zero and one half at half the coherence length
/// (i.e. its FWHM is the coherence length).
pub fn coherence_weight<T: Scalar>(mismatch_nm: T, coherence_length_nm: T) -> Result<T> {
    if coherence_length_nm <= T::zero() {
        return Err(CoreError::InvalidParameter(
            "coherence length must be positive".into(),
        ));
    }
    let x = mismatch_nm / coherence_length_nm;
    Ok((-T::of(4.0 * std::f64::consts::LN_2) * x * x).exp())
}

/// The emitted state with partial temporal distinguishability: the coherent
/// superposition weighted by the coherence factor mu, plus the classically
/// correlated remainder split between |path1 H> and |path2 V> with the arm
/// weights cos^2(beta) and sin^2(beta), so which-path correlations are
/// independent of mu.
pub fn effective_state<T: Scalar>(cfg: &SourceConfig) -> Result<BiPhotonMixedState<T>> {
    let phi = T::of(output_phase(cfg));
    let beta = T::of(cfg.arm_balance_angle_rad());
    let l_c = coherence_length_nm(T::of(cfg.lambda_i_nm), T::of(cfg.bandwidth_i_nm))?;
    let mu = coherence_weight(T::of(cfg.path_mismatch_nm()), l_c)?;
    let pure = ideal_state_with_balance(phi, beta);
    let leak = T::one() - mu;
    if leak <= T::zero() {
        return mixture(vec![(T::one(), pure)]);
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let first_arm = pure_from_amplitudes(
        vec![SignalMode::Path1, SignalMode::Path2],
        vec![IdlerMode::H, IdlerMode::V],
        vec![vec![one, zero], vec![zero, zero]],
    )?;
    let second_arm = pure_from_amplitudes(
        vec![SignalMode::Path1, SignalMode::Path2],
        vec![IdlerMode::H, IdlerMode::V],
        vec![vec![zero, zero], vec![zero, one]],
    )?;
    let (c, s) = (beta.cos(), beta.sin());
    mixture(vec![
        (mu, pure),
        (leak * c * c, first_arm),
        (leak * s * s, second_arm),
    ])
}

/// Energy-conservation residual 1/lambda_p - 1/lambda_s - 1/lambda_i
/// (nm^-1); zero when the three wavelengths share one pump quantum.
pub fn energy_conservation_residual(
    lambda_p_nm: f64,
    lambda_s_nm: f64,
    lambda_i_nm: f64,
) -> Result<f64> {
    if lambda_p_nm <= 0.0 || lambda_s_nm <= 0.0 || lambda_i_nm <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "energy residual needs positive wavelengths".into(),
        ));
    }
    Ok(1.0 / lambda_p_nm - 1.0 / lambda_s_nm - 1.0 / lambda_i_nm)
}

/// Rayleigh range pi w0^2 / lambda, returned in mm for a waist in um and a
/// vacuum wavelength in nm (the unit factors cancel exactly).
pub fn rayleigh_range_mm<T: Scalar>(waist_radius_um: T, lambda_nm: T) -> Result<T> {
    if waist_radius_um <= T::zero() || lambda_nm <= T::zero() {
        return Err(CoreError::InvalidParameter(
            "Rayleigh range needs positive waist and wavelength".into(),
        ));
    }
    Ok(T::PI() * waist_radius_um * waist_radius_um / lambda_nm)
}

/// Generated interfering-singles rate (s^-1): rate coefficient times pump
/// power times the arm-balance factor sin^2(2 beta), which is one for
/// balanced arms and zero when all pump power travels one direction.
pub fn singles_rate(cfg: &SourceConfig) -> f64 {
    let beta = cfg.arm_balance_angle_rad();
    let balance = (2.0 * beta).sin().powi(2);
    cfg.pair_rate_coeff * cfg.pump_power_mw * balance
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn balanced_paths_give_zero_phase() {
        let cfg = SourceConfig {
            delta_l_s_nm: 125.0,
            delta_l_i_nm: 125.0,
            ..SourceConfig::default()
        };
        assert_eq!(output_phase(&cfg), 0.0);
    }

    #[test]
    fn quarter_wavelength_lag_gives_minus_quarter_turn() {
        let cfg = SourceConfig::default();
        assert!((output_phase(&cfg) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn full_wavelength_mismatch_wraps_to_zero() {
        let phi: f64 = phase_for_mismatch_nm(810.0, 810.0);
        assert!(phi.abs() < 1e-12);
    }

    #[test]
    fn ideal_state_places_equal_weight_on_both_terms() {
        let s = ideal_state(0.0_f64);
        let isq = 1.0 / 2.0_f64.sqrt();
        let first = s.amplitude(SignalMode::Path1, IdlerMode::H).unwrap();
        let second = s.amplitude(SignalMode::Path2, IdlerMode::V).unwrap();
        assert!((first.re - isq).abs() < 1e-15 && first.im.abs() < 1e-15);
        assert!((second.re - isq).abs() < 1e-15 && second.im.abs() < 1e-15);
        assert!(s.amplitude(SignalMode::Path1, IdlerMode::V).unwrap().norm() < 1e-15);
    }

    #[test]
    fn half_turn_phase_flips_the_second_term() {
        let s = ideal_state(PI);
        let second = s.amplitude(SignalMode::Path2, IdlerMode::V).unwrap();
        let isq = 1.0 / 2.0_f64.sqrt();
        assert!((second + num_complex::Complex::new(isq, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coherence_length_reproduces_known_values() {
        let lc = coherence_length_nm(1550.0_f64, 0.8).unwrap();
        assert!((lc - 3_003_125.0).abs() < 1e-6);
        let half = coherence_length_nm(1550.0_f64, 1.6).unwrap();
        assert!((half - 1_501_562.5).abs() < 1e-6);
        let degenerate = coherence_length_nm(1550.0_f64, 1550.0).unwrap();
        assert!((degenerate - 1550.0).abs() < 1e-9);
    }

    #[test]
    fn coherence_weight_has_unit_peak_and_half_width() {
        assert_eq!(coherence_weight(0.0_f64, 3.0e6).unwrap(), 1.0);
        let half = coherence_weight(1.5e6_f64, 3.0e6).unwrap();
        assert!((half - 0.5).abs() < 1e-12);
        let near = coherence_weight(200.0_f64, 3.0e6).unwrap();
        assert!(1.0 - near < 1e-7);
        assert!(coherence_weight(1.0_f64, 0.0).is_err());
    }

    #[test]
    fn coherence_weight_decreases_with_mismatch_magnitude() {
        let lc = 3.0e6;
        let mut prev = coherence_weight(0.0, lc).unwrap();
        for m in [1e3, 1e5, 1e6, 5e6, 1e7] {
            let w = coherence_weight(m, lc).unwrap();
            assert!(w < prev, "weight must fall as mismatch grows");
            prev = w;
        }
    }

    #[test]
    fn effective_state_is_essentially_pure_at_small_mismatch() {
        let cfg = SourceConfig::default();
        let state = effective_state::<f64>(&cfg).unwrap();
        assert!(state.components()[0].0 > 1.0 - 1e-7);
        let p_first = state
            .joint_probability(SignalMode::Path1, IdlerMode::H)
            .unwrap();
        assert!((p_first - 0.5).abs() < 1e-10);
    }

    #[test]
    fn effective_state_is_pure_at_zero_mismatch() {
        let cfg = SourceConfig {
            delta_l_s_nm: 0.0,
            ..SourceConfig::default()
        };
        let state = effective_state::<f64>(&cfg).unwrap();
        assert_eq!(state.components().len(), 1);
        assert_eq!(output_phase(&cfg), 0.0);
    }

    #[test]
    fn large_mismatch_keeps_polarization_correlations_but_kills_coherence() {
        let cfg = SourceConfig {
            delta_l_s_nm: 1.0e7,
            ..SourceConfig::default()
        };
        let state = effective_state::<f64>(&cfg).unwrap();
        assert!(state.components()[0].0 < 1e-4);
        let p_matched = state
            .joint_probability(SignalMode::Path1, IdlerMode::H)
            .unwrap();
        let p_crossed = state
            .joint_probability(SignalMode::Path1, IdlerMode::V)
            .unwrap();
        assert!((p_matched - 0.5).abs() < 1e-10);
        assert!(p_crossed.abs() < 1e-12);
    }

    #[test]
    fn energy_residual_matches_reference_triples() {
        let near = energy_conservation_residual(532.0, 810.0, 1550.0).unwrap();
        assert!(near.abs() < 5e-8);
        let exact = energy_conservation_residual(400.0, 800.0, 800.0).unwrap();
        assert_eq!(exact, 0.0);
        let off = energy_conservation_residual(532.0, 810.0, 1600.0).unwrap();
        assert!(off > 0.0 && (off - 2.0131e-5).abs() < 1e-8);
    }

    #[test]
    fn rayleigh_range_matches_reference_geometry() {
        let z0 = rayleigh_range_mm(125.0_f64, 532.0).unwrap();
        assert!((z0 - 92.2695).abs() < 1e-3);
        let ratio = z0 / SourceConfig::default().crystal_length_mm;
        assert!((ratio - 1.8).abs() < 0.1);
        let doubled = rayleigh_range_mm(250.0, 532.0).unwrap();
        assert!((doubled / z0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singles_rate_is_linear_in_power_and_balance() {
        let cfg = SourceConfig {
            pair_rate_coeff: 2.5e5,
            ..SourceConfig::default()
        };
        assert!((singles_rate(&cfg) - 3.0e5).abs() < 1e-6);
        let half_power = SourceConfig {
            pump_power_mw: 0.6,
            ..cfg.clone()
        };
        assert!((singles_rate(&half_power) - 1.5e5).abs() < 1e-6);
        let blocked = SourceConfig {
            pump_power_mw: 0.0,
            ..cfg.clone()
        };
        assert_eq!(singles_rate(&blocked), 0.0);
        let lopsided = SourceConfig {
            pump_hwp_angle_rad: std::f64::consts::FRAC_PI_8 / 2.0,
            ..cfg
        };
        assert!((singles_rate(&lopsided) - 1.5e5).abs() < 1e-6);
    }

    #[test]
    fn validation_names_the_offending_key() {
        let cfg = SourceConfig {
            lambda_s_nm: -810.0,
            ..SourceConfig::default()
        };
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("lambda_s_nm"), "got message: {msg}");

        let power = SourceConfig {
            pump_power_mw: -1.0,
            ..SourceConfig::default()
        };
        assert!(power
            .validate()
            .unwrap_err()
            .to_string()
            .contains("pump_power_mw"));

        let strict = SourceConfig {
            lambda_i_nm: 1600.0,
            ..SourceConfig::default()
        };
        let msg = strict.validate().unwrap_err().to_string();
        assert!(msg.contains("energy conservation"), "got message: {msg}");
        let relaxed = SourceConfig {
            strict_energy: false,
            ..strict
        };
        assert!(relaxed.validate().is_ok());

        assert!(SourceConfig::default().validate().is_ok());
        let blocked = SourceConfig {
            pump_power_mw: 0.0,
            ..SourceConfig::default()
        };
        assert!(blocked.validate().is_ok());
    }

    proptest! {
        #[test]
        fn phase_is_periodic_in_one_signal_wavelength(m in -10_000.0f64..10_000.0) {
            let base = phase_for_mismatch_nm(m, 810.0);
            let shifted = phase_for_mismatch_nm(m + 810.0, 810.0);
            let diff = wrap_phase(base - shifted).abs();
            prop_assert!(diff < 1e-12);
        }

        #[test]
        fn wrapped_phase_stays_in_half_open_interval(x in -100.0f64..100.0) {
            let w = wrap_phase(x);
            prop_assert!(w > -PI - 1e-15 && w <= PI + 1e-15);
        }

        #[test]
        fn effective_state_probabilities_sum_to_one(mismatch in -1.0e7f64..1.0e7) {
            let cfg = SourceConfig { delta_l_s_nm: mismatch, ..SourceConfig::default() };
            let state = effective_state::<f64>(&cfg).unwrap();
            let mut total = 0.0;
            for s in [SignalMode::Path1, SignalMode::Path2] {
                for i in [IdlerMode::H, IdlerMode::V] {
                    total += state.joint_probability(s, i).unwrap();
                }
            }
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
