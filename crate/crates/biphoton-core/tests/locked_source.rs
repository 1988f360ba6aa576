//! End-to-end run: the phase lock steers the interferometer, and every
//! locked mismatch sample is pushed through the source and detection chain
//! to confirm the emitted state actually delivers its interference contrast
//! while the loop reports itself in band.

use std::f64::consts::FRAC_PI_8;

use biphoton_core::detection::{coincidence_probabilities, expand_to_ports, AnalyzerOutcome};
use biphoton_core::lock::{run_lock, LockConfig};
use biphoton_core::source::{effective_state, SourceConfig};
use biphoton_core::SignalMode;

/// D-port fringe contrast of the source at one frozen mismatch.
fn contrast_at_mismatch(mismatch_nm: f64) -> f64 {
    let cfg = SourceConfig {
        delta_l_s_nm: mismatch_nm,
        ..SourceConfig::default()
    };
    let ports = expand_to_ports(&effective_state::<f64>(&cfg).unwrap()).unwrap();
    let lo = coincidence_probabilities(&ports, FRAC_PI_8).unwrap();
    let hi = coincidence_probabilities(&ports, 3.0 * FRAC_PI_8).unwrap();
    let a = lo.get(SignalMode::D, AnalyzerOutcome::Transmitted).unwrap();
    let b = hi.get(SignalMode::D, AnalyzerOutcome::Transmitted).unwrap();
    (a - b).abs() / (a + b)
}

#[test]
fn locked_interferometer_sustains_interference_contrast() {
    let samples = run_lock(&LockConfig::default(), 10.0, 1e-3, 2024).unwrap();

    // Freeze the source at every 100th post-settling mismatch and measure
    // the contrast the analyzer would see there.
    let contrasts: Vec<f64> = samples
        .iter()
        .filter(|s| s.time_s > 1.0)
        .step_by(100)
        .map(|s| contrast_at_mismatch(s.mismatch_nm))
        .collect();
    assert!(
        contrasts.len() >= 80,
        "expected at least 80 settled probe points, got {}",
        contrasts.len()
    );

    // In band means the phase sits within 0.05 rad of the quarter turn, so
    // the contrast can dip at most to cos(0.05) of full scale.
    let floor = 0.05_f64.cos() - 1e-6;
    let good = contrasts.iter().filter(|&&v| v >= floor).count();
    let fraction = good as f64 / contrasts.len() as f64;
    assert!(
        fraction >= 0.95,
        "only {fraction:.3} of locked samples hold contrast {floor:.5}, want 0.95"
    );

    let mean = contrasts.iter().sum::<f64>() / contrasts.len() as f64;
    assert!(
        mean >= 0.995,
        "mean locked contrast {mean:.5} fell under 0.995"
    );
}
