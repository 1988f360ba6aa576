//! Click statistics at the four signal analyzer ports.
//!
//! The signal qubit is analyzed passively: each of its two modes is tapped
//! 50/50, the tapped halves go straight to which-mode detectors (ports H
//! and V), and the untapped halves interfere on a symmetric 50-50 splitter
//! whose outputs are ports D and A. The resulting 4x2 embedding is an
//! isometry, so every port carries a 1/4 marginal for a balanced source and
//! the D/A ports inherit the splitter's quarter-turn phase convention —
//! which is why the quarter-turn source phase, not zero, maximizes D/A
//! correlations.
//!
//! The idler is analyzed by a rotatable half-wave plate followed by a
//! polarizing splitter; only its transmitted arm is detected. Counting is
//! rate-based: singles are Poisson in the duration, and true coincidences
//! and accidentals are binomial thinnings of the singles, which keeps
//! per-port coincidences bounded by singles sample-by-sample. Accidentals
//! model uncorrelated light reaching the idler detector within the
//! coincidence gate and scale with the idler efficiency like any other
//! idler click.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use crate::source::{effective_state, singles_rate, SourceConfig};
use crate::state::{mixture, pure_from_amplitudes, BiPhotonMixedState, IdlerMode, SignalMode};

/// Canonical analyzer-port order used by tables, records, and CSV output.
pub const PORT_ORDER: [SignalMode; 4] = [SignalMode::H, SignalMode::V, SignalMode::D, SignalMode::A];

/// Index of a port in [`PORT_ORDER`].
pub fn port_index(port: SignalMode) -> Result<usize> {
    PORT_ORDER
        .iter()
        .position(|&p| p == port)
        .ok_or_else(|| CoreError::UnknownMode(port.label().into()))
}

/// Detector chain parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Signal detection efficiency, in (0, 1].
    pub eta_s: f64,
    /// Idler detection efficiency (fiber transmission folded in), in (0, 1].
    pub eta_i: f64,
    /// Coincidence gate width (ns).
    pub gate_ns: f64,
    /// Rate of idler-side light uncorrelated with the trigger (Hz); together
    /// with the gate and the idler efficiency it sets the accidental rate.
    pub uncorrelated_idler_rate_hz: f64,
    /// Frequency-per-wavelength conversion at the idler (THz per nm).
    pub thz_per_nm: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            eta_s: 0.6,
            eta_i: 0.18,
            gate_ns: 2.5,
            // Calibrated so the default source yields 0.5e3 accidentals/s
            // per port: 0.5e3 / (1.1e4 * 2.5e-9).
            uncorrelated_idler_rate_hz: 1.818_181_818_181_818_2e7,
            thz_per_nm: 0.125,
        }
    }
}

impl DetectorConfig {
    /// Checks ranges; messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [("eta_s", self.eta_s), ("eta_i", self.eta_i)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "{key} must lie in (0, 1], got {value}"
                )));
            }
        }
        if !(self.gate_ns > 0.0) || !self.gate_ns.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "gate_ns must be positive, got {}",
                self.gate_ns
            )));
        }
        if !(self.uncorrelated_idler_rate_hz >= 0.0) || !self.uncorrelated_idler_rate_hz.is_finite()
        {
            return Err(CoreError::InvalidParameter(format!(
                "uncorrelated_idler_rate_hz must be nonnegative, got {}",
                self.uncorrelated_idler_rate_hz
            )));
        }
        if !(self.thz_per_nm > 0.0) || !self.thz_per_nm.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "thz_per_nm must be positive, got {}",
                self.thz_per_nm
            )));
        }
        Ok(())
    }

    /// Gate width in seconds.
    pub fn gate_s(&self) -> f64 {
        self.gate_ns * 1e-9
    }
}

/// Which arm of the idler analyzer's polarizing splitter fired. Only the
/// transmitted arm carries a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzerOutcome {
    Transmitted,
    Reflected,
}

/// Projection rows of the idler analyzer at waveplate angle `theta`: row 0
/// is the transmitted-arm projector, row 1 the reflected-arm projector,
/// both over (H, V). The measurement direction rotates by 2 theta.
pub fn analyzer_projectors<T: Scalar>(hwp_angle_rad: T) -> [[T; 2]; 2] {
    let c = (T::of(2.0) * hwp_angle_rad).cos();
    let s = (T::of(2.0) * hwp_angle_rad).sin();
    [[c, s], [s, -c]]
}

/// The 4x2 isometry from the two signal modes onto the analyzer ports
/// (rows in [`PORT_ORDER`]): 50/50 taps feed H and V directly and the
/// remaining halves interfere on the symmetric splitter into D and A.
pub fn four_port_embedding<T: Scalar>() -> [[Complex<T>; 2]; 4] {
    let isq = T::of(1.0 / std::f64::consts::SQRT_2);
    let half = T::of(0.5);
    let zero = T::zero();
    [
        [Complex::new(isq, zero), Complex::new(zero, zero)],
        [Complex::new(zero, zero), Complex::new(isq, zero)],
        [Complex::new(half, zero), Complex::new(zero, half)],
        [Complex::new(zero, half), Complex::new(half, zero)],
    ]
}

/// Routes a two-mode signal state through the passive four-port analyzer,
/// returning the same mixture over the port basis {H, V, D, A}.
pub fn expand_to_ports<T: Scalar>(state: &BiPhotonMixedState<T>) -> Result<BiPhotonMixedState<T>> {
    if state.signal_basis().len() != 2 {
        return Err(CoreError::BasisMismatch(
            "four-port expansion needs a two-mode signal basis".into(),
        ));
    }
    let k = four_port_embedding::<T>();
    let idler = state.idler_basis().to_vec();
    let ports = PORT_ORDER.to_vec();
    let mut components = Vec::with_capacity(state.components().len());
    for (w, pure) in state.components() {
        let cols = pure.idler_dim();
        let mut rows = Vec::with_capacity(4);
        for k_row in &k {
            let mut row = Vec::with_capacity(cols);
            for j in 0..cols {
                row.push(k_row[0] * pure.amplitude_at(0, j) + k_row[1] * pure.amplitude_at(1, j));
            }
            rows.push(row);
        }
        components.push((*w, pure_from_amplitudes(ports.clone(), idler.clone(), rows)?));
    }
    mixture(components)
}

/// Joint probability table over (analyzer port, idler analyzer outcome).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable<T: Scalar> {
    /// Rows follow [`PORT_ORDER`]; columns are (transmitted, reflected).
    pub probs: [[T; 2]; 4],
}

impl<T: Scalar> ProbabilityTable<T> {
    pub fn get(&self, port: SignalMode, outcome: AnalyzerOutcome) -> Result<T> {
        let col = match outcome {
            AnalyzerOutcome::Transmitted => 0,
            AnalyzerOutcome::Reflected => 1,
        };
        Ok(self.probs[port_index(port)?][col])
    }

    /// Probability that the signal photon exits through `port` at all.
    pub fn port_marginal(&self, port: SignalMode) -> Result<T> {
        let row = self.probs[port_index(port)?];
        Ok(row[0] + row[1])
    }

    pub fn total(&self) -> T {
        self.probs.iter().flatten().copied().sum()
    }
}

/// Click probabilities for a four-port state against the idler analyzer at
/// `hwp_angle_rad`. Requires the signal basis {H, V, D, A} (in order) and
/// the idler basis {H, V}.
pub fn coincidence_probabilities<T: Scalar>(
    state: &BiPhotonMixedState<T>,
    hwp_angle_rad: T,
) -> Result<ProbabilityTable<T>> {
    if state.signal_basis() != PORT_ORDER {
        return Err(CoreError::BasisMismatch(
            "coincidence table needs the four-port signal basis H, V, D, A".into(),
        ));
    }
    if state.idler_basis() != [IdlerMode::H, IdlerMode::V] {
        return Err(CoreError::BasisMismatch(
            "coincidence table needs the idler basis H, V".into(),
        ));
    }
    let proj = analyzer_projectors(hwp_angle_rad);
    let mut probs = [[T::zero(); 2]; 4];
    for (w, pure) in state.components() {
        for (p, row) in probs.iter_mut().enumerate() {
            for (o, cell) in row.iter_mut().enumerate() {
                let mut amp = Complex::new(T::zero(), T::zero());
                for j in 0..2 {
                    amp = amp + pure.amplitude_at(p, j) * proj[o][j];
                }
                *cell = *cell + *w * amp.norm_sqr();
            }
        }
    }
    Ok(ProbabilityTable { probs })
}

/// Singles, true-coincidence, and accidental rates per analyzer port, with
/// the settings they were taken at. Rates are per second; for analytic
/// records the duration is infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub analyzer_angle_rad: f64,
    pub duration_s: f64,
    pub pump_power_mw: f64,
    /// Per-port rates in [`PORT_ORDER`].
    pub singles_hz: [f64; 4],
    pub coincidences_hz: [f64; 4],
    pub accidentals_hz: [f64; 4],
}

impl CountRecord {
    /// (true coincidences, accidentals) per port in [`PORT_ORDER`].
    pub fn rate_pairs(&self) -> [(f64, f64); 4] {
        let mut out = [(0.0, 0.0); 4];
        for i in 0..4 {
            out[i] = (self.coincidences_hz[i], self.accidentals_hz[i]);
        }
        out
    }
}

/// Per-port detection parameters derived from a source/detector pair at one
/// analyzer angle: singles rate plus the two thinning probabilities.
struct PortModel {
    singles_hz: [f64; 4],
    coincidence_prob: [f64; 4],
    accidental_prob: f64,
}

fn port_model(cfg: &SourceConfig, det: &DetectorConfig, hwp_angle_rad: f64) -> Result<PortModel> {
    let state = effective_state::<f64>(cfg)?;
    let table = coincidence_probabilities(&expand_to_ports(&state)?, hwp_angle_rad)?;
    let generated = singles_rate(cfg);
    let mut singles = [0.0; 4];
    let mut cond = [0.0; 4];
    for (i, &port) in PORT_ORDER.iter().enumerate() {
        let marginal = table.port_marginal(port)?;
        singles[i] = generated * det.eta_s * marginal;
        cond[i] = if marginal > 0.0 {
            (det.eta_i * table.get(port, AnalyzerOutcome::Transmitted)? / marginal).clamp(0.0, 1.0)
        } else {
            0.0
        };
    }
    let accidental_prob = (det.eta_i * det.uncorrelated_idler_rate_hz * det.gate_s()).clamp(0.0, 1.0);
    Ok(PortModel {
        singles_hz: singles,
        coincidence_prob: cond,
        accidental_prob,
    })
}

/// Analytic expectation of the count rates at one analyzer angle: singles
/// from the port marginal and signal efficiency, true coincidences from the
/// conditional idler outcome and idler efficiency, and accidentals from
/// uncorrelated idler light in the gate (the gate factor is applied last so
/// halving the gate halves the accidental rate exactly).
pub fn expected_rates(
    cfg: &SourceConfig,
    det: &DetectorConfig,
    hwp_angle_rad: f64,
) -> Result<CountRecord> {
    let model = port_model(cfg, det, hwp_angle_rad)?;
    let mut coincidences = [0.0; 4];
    let mut accidentals = [0.0; 4];
    for i in 0..4 {
        coincidences[i] = model.singles_hz[i] * model.coincidence_prob[i];
        accidentals[i] =
            model.singles_hz[i] * det.eta_i * det.uncorrelated_idler_rate_hz * det.gate_s();
    }
    Ok(CountRecord {
        analyzer_angle_rad: hwp_angle_rad,
        duration_s: f64::INFINITY,
        pump_power_mw: cfg.pump_power_mw,
        singles_hz: model.singles_hz,
        coincidences_hz: coincidences,
        accidentals_hz: accidentals,
    })
}

/// One Monte Carlo counting run: Poisson singles per port over the duration,
/// with true coincidences and accidentals drawn as binomial thinnings of the
/// singles. Deterministic for a given seed; sample means converge to
/// [`expected_rates`] with duration.
pub fn simulate_counts(
    cfg: &SourceConfig,
    det: &DetectorConfig,
    hwp_angle_rad: f64,
    duration_s: f64,
    seed: u64,
) -> Result<CountRecord> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "counting duration must be positive, got {duration_s}"
        )));
    }
    let model = port_model(cfg, det, hwp_angle_rad)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut singles = [0.0; 4];
    let mut coincidences = [0.0; 4];
    let mut accidentals = [0.0; 4];
    for i in 0..4 {
        let mean = model.singles_hz[i] * duration_s;
        let n_singles: u64 = if mean > 0.0 {
            Poisson::new(mean)
                .expect("positive Poisson mean")
                .sample(&mut rng) as u64
        } else {
            0
        };
        let n_coinc = Binomial::new(n_singles, model.coincidence_prob[i])
            .expect("thinning probability lies in [0, 1]")
            .sample(&mut rng);
        let n_acc = Binomial::new(n_singles, model.accidental_prob)
            .expect("thinning probability lies in [0, 1]")
            .sample(&mut rng);
        singles[i] = n_singles as f64 / duration_s;
        coincidences[i] = n_coinc as f64 / duration_s;
        accidentals[i] = n_acc as f64 / duration_s;
    }
    Ok(CountRecord {
        analyzer_angle_rad: hwp_angle_rad,
        duration_s,
        pump_power_mw: cfg.pump_power_mw,
        singles_hz: singles,
        coincidences_hz: coincidences,
        accidentals_hz: accidentals,
    })
}

/// Interference contrast (r_c - r_a) / (r_c + r_a).
pub fn visibility<T: Scalar>(r_c: T, r_a: T) -> Result<T> {
    let total = r_c + r_a;
    if total <= T::zero() {
        return Err(CoreError::VisibilityUndefined);
    }
    Ok((r_c - r_a) / total)
}

/// Error rate: the mean accidental-to-coincidence ratio over the ports,
/// given (r_c, r_a) pairs in [`PORT_ORDER`].
pub fn qber<T: Scalar>(rate_pairs: &[(T, T)]) -> Result<T> {
    if rate_pairs.is_empty() {
        return Err(CoreError::InvalidParameter(
            "error-rate average needs at least one port".into(),
        ));
    }
    let mut sum = T::zero();
    for (i, &(r_c, r_a)) in rate_pairs.iter().enumerate() {
        if r_c <= T::zero() {
            let label = PORT_ORDER
                .get(i)
                .map(|p| p.label())
                .unwrap_or("beyond the four analyzer ports");
            return Err(CoreError::ZeroCoincidenceRate(label));
        }
        sum = sum + r_a / r_c;
    }
    Ok(sum / T::of(rate_pairs.len() as f64))
}

/// Generated pair rate per unit bandwidth and pump power, inferred from one
/// port's coincidence rate: 4 r_c / (eta_s eta_i P k d_lambda), in
/// s^-1 THz^-1 mW^-1. The factor of four undoes the four-way port split.
pub fn spectral_brightness<T: Scalar>(
    r_c_per_port: T,
    eta_s: T,
    eta_i: T,
    pump_power_mw: T,
    bandwidth_nm: T,
    thz_per_nm: T,
) -> Result<T> {
    for (name, v) in [
        ("coincidence rate", r_c_per_port),
        ("signal efficiency", eta_s),
        ("idler efficiency", eta_i),
        ("pump power", pump_power_mw),
        ("bandwidth", bandwidth_nm),
        ("frequency conversion factor", thz_per_nm),
    ] {
        if v <= T::zero() {
            return Err(CoreError::InvalidParameter(format!(
                "spectral brightness needs positive inputs; {name} was {v}"
            )));
        }
    }
    Ok(T::of(4.0) * r_c_per_port / (eta_s * eta_i * pump_power_mw * (thz_per_nm * bandwidth_nm)))
}

/// Stateless per-index seed derivation (a splitmix64 mix of the master seed
/// and index), so scan points are reproducible independent of evaluation
/// order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monte Carlo fringe scan: one counting run per analyzer angle, each with
/// its own seed derived from the master seed and the angle index.
pub fn fringe_scan(
    cfg: &SourceConfig,
    det: &DetectorConfig,
    angles_rad: &[f64],
    duration_per_point_s: f64,
    master_seed: u64,
) -> Result<Vec<CountRecord>> {
    if angles_rad.is_empty() {
        return Err(CoreError::InvalidParameter(
            "fringe scan needs at least one analyzer angle".into(),
        ));
    }
    angles_rad
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            simulate_counts(cfg, det, theta, duration_per_point_s, derive_seed(master_seed, i as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::ideal_state;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn default_port_state() -> BiPhotonMixedState<f64> {
        let cfg = SourceConfig::default();
        expand_to_ports(&effective_state::<f64>(&cfg).unwrap()).unwrap()
    }

    #[test]
    fn analyzer_rotates_at_twice_the_waveplate_angle() {
        let hv = analyzer_projectors(0.0_f64);
        assert_eq!(hv, [[1.0, 0.0], [0.0, -1.0]]);
        let da = analyzer_projectors(FRAC_PI_8);
        let isq = 1.0 / 2.0_f64.sqrt();
        assert!((da[0][0] - isq).abs() < 1e-15 && (da[0][1] - isq).abs() < 1e-15);
        let swapped = analyzer_projectors(FRAC_PI_4);
        assert!(swapped[0][0].abs() < 1e-15 && (swapped[0][1] - 1.0).abs() < 1e-15);
        assert!((swapped[1][0] - 1.0).abs() < 1e-15 && swapped[1][1].abs() < 1e-15);
    }

    #[test]
    fn embedding_columns_are_orthonormal() {
        let k = four_port_embedding::<f64>();
        for a in 0..2 {
            for b in 0..2 {
                let mut sum = Complex::new(0.0, 0.0);
                for row in &k {
                    sum += row[a].conj() * row[b];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((sum - Complex::new(target, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn balanced_source_spreads_quarter_marginal_per_port() {
        let table = coincidence_probabilities(&default_port_state(), 0.0).unwrap();
        for port in PORT_ORDER {
            assert!((table.port_marginal(port).unwrap() - 0.25).abs() < 1e-10);
        }
        assert!((table.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quarter_turn_state_has_no_cross_clicks_in_the_rotated_basis() {
        let table = coincidence_probabilities(&default_port_state(), FRAC_PI_8).unwrap();
        let p_da = table.get(SignalMode::D, AnalyzerOutcome::Reflected).unwrap();
        let p_ad = table.get(SignalMode::A, AnalyzerOutcome::Transmitted).unwrap();
        assert!(p_da < 1e-7, "D-port cross click should vanish, got {p_da}");
        assert!(p_ad < 1e-7, "A-port cross click should vanish, got {p_ad}");
        let p_dd = table.get(SignalMode::D, AnalyzerOutcome::Transmitted).unwrap();
        assert!((p_dd - 0.25).abs() < 1e-7);
    }

    #[test]
    fn quarter_turn_state_has_no_cross_clicks_in_the_polarization_basis() {
        let table = coincidence_probabilities(&default_port_state(), 0.0).unwrap();
        let p_hv = table.get(SignalMode::H, AnalyzerOutcome::Reflected).unwrap();
        assert!(p_hv < 1e-12);
        let p_hh = table.get(SignalMode::H, AnalyzerOutcome::Transmitted).unwrap();
        assert!((p_hh - 0.25).abs() < 1e-10);
    }

    #[test]
    fn decohered_source_clicks_evenly_across_the_interference_ports() {
        let cfg = SourceConfig {
            delta_l_s_nm: 1.0e7,
            ..SourceConfig::default()
        };
        let state = expand_to_ports(&effective_state::<f64>(&cfg).unwrap()).unwrap();
        let table = coincidence_probabilities(&state, FRAC_PI_8).unwrap();
        for port in [SignalMode::D, SignalMode::A] {
            for outcome in [AnalyzerOutcome::Transmitted, AnalyzerOutcome::Reflected] {
                let p = table.get(port, outcome).unwrap();
                assert!((p - 0.125).abs() < 1e-6, "port {port:?} outcome {outcome:?}: {p}");
            }
        }
    }

    #[test]
    fn expansion_requires_a_two_mode_signal() {
        let four_port = default_port_state();
        assert!(matches!(
            expand_to_ports(&four_port),
            Err(CoreError::BasisMismatch(_))
        ));
    }

    #[test]
    fn table_requires_the_port_basis() {
        let two_mode: BiPhotonMixedState<f64> = ideal_state(0.0).into();
        assert!(matches!(
            coincidence_probabilities(&two_mode, 0.0),
            Err(CoreError::BasisMismatch(_))
        ));
    }

    #[test]
    fn default_calibration_reproduces_reference_rates() {
        let rates = expected_rates(&SourceConfig::default(), &DetectorConfig::default(), 0.0).unwrap();
        let h = port_index(SignalMode::H).unwrap();
        assert!((rates.singles_hz[h] - 61_111.111).abs() < 0.1);
        assert!((rates.coincidences_hz[h] - 1.1e4).abs() < 0.1);
        assert!((rates.accidentals_hz[h] - 0.5e3).abs() < 0.1);
    }

    #[test]
    fn dead_idler_detector_kills_all_coincidence_terms() {
        let det = DetectorConfig {
            eta_i: 0.0,
            ..DetectorConfig::default()
        };
        let rates = expected_rates(&SourceConfig::default(), &det, 0.0).unwrap();
        assert_eq!(rates.coincidences_hz, [0.0; 4]);
        assert_eq!(rates.accidentals_hz, [0.0; 4]);
        assert!(rates.singles_hz.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn halving_the_gate_halves_accidentals_exactly() {
        let det = DetectorConfig::default();
        let narrow = DetectorConfig {
            gate_ns: det.gate_ns / 2.0,
            ..det.clone()
        };
        let wide = expected_rates(&SourceConfig::default(), &det, 0.3).unwrap();
        let half = expected_rates(&SourceConfig::default(), &narrow, 0.3).unwrap();
        for i in 0..4 {
            assert_eq!(half.accidentals_hz[i], wide.accidentals_hz[i] / 2.0);
            assert_eq!(half.coincidences_hz[i], wide.coincidences_hz[i]);
        }
    }

    #[test]
    fn same_seed_reproduces_the_same_counts() {
        let cfg = SourceConfig::default();
        let det = DetectorConfig::default();
        let a = simulate_counts(&cfg, &det, 0.2, 5.0, 7).unwrap();
        let b = simulate_counts(&cfg, &det, 0.2, 5.0, 7).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(&cfg, &det, 0.2, 5.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_counts_track_the_analytic_rates() {
        let cfg = SourceConfig::default();
        let det = DetectorConfig::default();
        let duration = 100.0;
        let analytic = expected_rates(&cfg, &det, 0.0).unwrap();
        let sampled = simulate_counts(&cfg, &det, 0.0, duration, 42).unwrap();
        for i in 0..4 {
            let sigma = (analytic.coincidences_hz[i].max(1.0) * duration).sqrt() / duration;
            assert!(
                (sampled.coincidences_hz[i] - analytic.coincidences_hz[i]).abs() < 5.0 * sigma,
                "port {i}: sampled {} vs analytic {}",
                sampled.coincidences_hz[i],
                analytic.coincidences_hz[i]
            );
            assert!(sampled.coincidences_hz[i] <= sampled.singles_hz[i]);
        }
    }

    #[test]
    fn blocked_pump_counts_nothing() {
        let cfg = SourceConfig {
            pump_power_mw: 0.0,
            ..SourceConfig::default()
        };
        let rec = simulate_counts(&cfg, &DetectorConfig::default(), 0.0, 1.0, 3).unwrap();
        assert_eq!(rec.singles_hz, [0.0; 4]);
        assert_eq!(rec.coincidences_hz, [0.0; 4]);
        assert_eq!(rec.accidentals_hz, [0.0; 4]);
    }

    #[test]
    fn visibility_matches_reference_arithmetic() {
        let v = visibility(1.1e4_f64, 0.5e3).unwrap();
        assert!((v - 0.9130434782608695).abs() < 1e-12);
        assert_eq!(visibility(42.0, 0.0).unwrap(), 1.0);
        assert_eq!(visibility(42.0, 42.0).unwrap(), 0.0);
        assert!(matches!(
            visibility(0.0, 0.0),
            Err(CoreError::VisibilityUndefined)
        ));
    }

    #[test]
    fn error_rate_averages_the_port_ratios() {
        let uniform = [(1.1e4_f64, 0.5e3); 4];
        let q = qber(&uniform).unwrap();
        assert!((q - 0.5e3 / 1.1e4).abs() < 1e-12);

        let one_doubled = [
            (1.1e4_f64, 0.5e3),
            (1.1e4, 0.5e3),
            (1.1e4, 0.5e3),
            (1.1e4, 1.0e3),
        ];
        let q = qber(&one_doubled).unwrap();
        assert!((q - 2500.0 / 44_000.0).abs() < 1e-12);

        let clean = [(1.0e4, 0.0); 4];
        assert_eq!(qber(&clean).unwrap(), 0.0);

        let dead = [(1.1e4, 0.5e3), (0.0, 0.5e3), (1.1e4, 0.5e3), (1.1e4, 0.5e3)];
        assert_eq!(
            qber(&dead).unwrap_err(),
            CoreError::ZeroCoincidenceRate("V")
        );
    }

    #[test]
    fn brightness_matches_reference_arithmetic() {
        let b = spectral_brightness(1.1e4_f64, 0.6, 0.18, 1.2, 0.8, 0.125).unwrap();
        assert!((b - 3.395e6).abs() < 1e3);
        let wider = spectral_brightness(1.1e4_f64, 0.6, 0.18, 1.2, 1.6, 0.125).unwrap();
        assert!((wider - b / 2.0).abs() < 1e-6);
        assert_eq!(spectral_brightness(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 4.0);
        assert!(spectral_brightness(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scan_seeds_are_stable_per_index() {
        let cfg = SourceConfig::default();
        let det = DetectorConfig::default();
        let angles = [0.0, FRAC_PI_8, FRAC_PI_4];
        let scan = fringe_scan(&cfg, &det, &angles, 2.0, 11).unwrap();
        assert_eq!(scan.len(), 3);
        let direct = simulate_counts(&cfg, &det, FRAC_PI_8, 2.0, derive_seed(11, 1)).unwrap();
        assert_eq!(scan[1], direct);
        assert!(fringe_scan(&cfg, &det, &[], 2.0, 11).is_err());
    }

    proptest! {
        #[test]
        fn probability_tables_are_normalized_for_any_angle_and_mismatch(
            theta in -6.4f64..6.4,
            mismatch in -1.0e7f64..1.0e7,
        ) {
            let cfg = SourceConfig { delta_l_s_nm: mismatch, ..SourceConfig::default() };
            let state = expand_to_ports(&effective_state::<f64>(&cfg).unwrap()).unwrap();
            let table = coincidence_probabilities(&state, theta).unwrap();
            prop_assert!(table.probs.iter().flatten().all(|&p| p >= -1e-15));
            prop_assert!((table.total() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn error_rate_and_visibility_are_consistent_for_shared_rates(
            r_c in 1.0f64..1e6,
            accidental_fraction in 0.0f64..1.0,
        ) {
            // Accidentals at or below the true rate, where (1 + v) suffers
            // no cancellation and the identity is exact to rounding.
            let r_a = accidental_fraction * r_c;
            let v = visibility(r_c, r_a).unwrap();
            let q = qber(&[(r_c, r_a); 4]).unwrap();
            prop_assert!((q - (1.0 - v) / (1.0 + v)).abs() < 1e-12);
        }
    }
}
