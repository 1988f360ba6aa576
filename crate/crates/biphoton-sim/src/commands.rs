//! The four subcommands. Everything here is deterministic given the parsed
//! configuration: seeds come from the config (or the --seed override), and
//! CSV floats go through the shortest-round-trip formatter, so repeated
//! runs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use biphoton_core::detection::{
    coincidence_probabilities, expand_to_ports, expected_rates, fringe_scan, port_index, qber,
    spectral_brightness, visibility, AnalyzerOutcome, CountRecord, PORT_ORDER,
};
use biphoton_core::source::{
    coherence_length_nm, coherence_weight, effective_state, output_phase, wrap_phase,
};
use biphoton_core::{run_lock, CoreError};

use crate::config::RunConfig;
use crate::svg;
use crate::AppError;

fn runtime(e: impl std::fmt::Display) -> AppError {
    AppError::Runtime(e.to_string())
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf, AppError> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir)
        .map_err(|e| AppError::Runtime(format!("cannot create output dir {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Prints the emitted state (phase, coherence, amplitudes) and the click
/// probability tables in the which-path and interference analyzer settings.
pub fn cmd_state(cfg: &RunConfig) -> Result<(), AppError> {
    let source = &cfg.source;
    let mismatch = source.path_mismatch_nm();
    let phi = output_phase(source);
    let l_c = coherence_length_nm(source.lambda_i_nm, source.bandwidth_i_nm).map_err(runtime)?;
    let mu = coherence_weight(mismatch, l_c).map_err(runtime)?;
    let state = effective_state::<f64>(source).map_err(runtime)?;

    println!("emitted state");
    println!("  path mismatch: {mismatch} nm");
    println!("  phase phi: {phi:.6} rad");
    println!("  coherence weight mu: {mu:.9e}");
    let (weight, coherent) = &state.components()[0];
    println!("  coherent component weight: {weight:.9}");
    println!("  amplitudes (signal path x idler polarization):");
    for (row, s) in coherent.signal_basis().iter().enumerate() {
        for (col, i) in coherent.idler_basis().iter().enumerate() {
            let a = coherent.amplitude_at(row, col);
            println!("    {} {}: {:+.6} {:+.6}i", s.label(), i.label(), a.re, a.im);
        }
    }

    let ports = expand_to_ports(&state).map_err(runtime)?;
    for (label, theta) in [("0", 0.0), ("22.5", std::f64::consts::FRAC_PI_8)] {
        println!("click probabilities at analyzer angle {label} deg:");
        let table = coincidence_probabilities(&ports, theta).map_err(runtime)?;
        print_table(&table)?;
    }
    Ok(())
}

fn print_table(
    table: &biphoton_core::detection::ProbabilityTable<f64>,
) -> Result<(), AppError> {
    for port in PORT_ORDER {
        let t = table.get(port, AnalyzerOutcome::Transmitted).map_err(runtime)?;
        let r = table.get(port, AnalyzerOutcome::Reflected).map_err(runtime)?;
        println!("  port {}: T {t:.6}  R {r:.6}", port.label());
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanRow<'a> {
    angle_deg: f64,
    port: &'a str,
    coincidences_hz: f64,
    accidentals_hz: f64,
    analytic_hz: f64,
}

/// Monte Carlo fringe scan over the configured angle grid; writes
/// `scan.csv` (and optionally `scan.svg`) into the output directory.
pub fn cmd_scan(cfg: &RunConfig) -> Result<(), AppError> {
    let dir = ensure_out_dir(cfg)?;
    let angles_deg = cfg.scan.angles_deg();
    let angles_rad: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();

    let sampled = fringe_scan(
        &cfg.source,
        &cfg.detector,
        &angles_rad,
        cfg.run.duration_s,
        cfg.run.seed,
    )
    .map_err(runtime)?;
    let analytic: Vec<CountRecord> = angles_rad
        .iter()
        .map(|&t| expected_rates(&cfg.source, &cfg.detector, t))
        .collect::<Result<_, CoreError>>()
        .map_err(runtime)?;

    let csv_path = dir.join("scan.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    for ((angle, mc), ideal) in angles_deg.iter().zip(&sampled).zip(&analytic) {
        for port in PORT_ORDER {
            let p = port_index(port).map_err(runtime)?;
            writer
                .serialize(ScanRow {
                    angle_deg: *angle,
                    port: port.label(),
                    coincidences_hz: mc.coincidences_hz[p],
                    accidentals_hz: mc.accidentals_hz[p],
                    analytic_hz: ideal.coincidences_hz[p],
                })
                .map_err(runtime)?;
        }
    }
    writer.flush().map_err(runtime)?;
    println!(
        "wrote {} ({} angles x {} ports)",
        csv_path.display(),
        angles_deg.len(),
        PORT_ORDER.len()
    );

    if cfg.output.emit_svg {
        let to_rows = |recs: &[CountRecord]| -> Vec<[f64; 4]> {
            recs.iter().map(|r| r.coincidences_hz).collect()
        };
        let svg_path = dir.join("scan.svg");
        fs::write(
            &svg_path,
            svg::scan_svg(&angles_deg, &to_rows(&analytic), &to_rows(&sampled)),
        )
        .map_err(runtime)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct LockRow {
    time_s: f64,
    mismatch_nm: f64,
    phi_rad: f64,
    i1: f64,
    i2: f64,
}

/// Runs the phase lock, writes `lock_trace.csv` (optionally `lock.svg`),
/// and prints a settled-phase summary.
pub fn cmd_lock(cfg: &RunConfig) -> Result<(), AppError> {
    let dir = ensure_out_dir(cfg)?;
    let lock_cfg = cfg.lock_config();
    let samples = run_lock(&lock_cfg, cfg.run.duration_s, cfg.run.dt_s, cfg.run.seed)
        .map_err(runtime)?;

    let csv_path = dir.join("lock_trace.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    for s in &samples {
        writer
            .serialize(LockRow {
                time_s: s.time_s,
                mismatch_nm: s.mismatch_nm,
                phi_rad: s.phi_rad,
                i1: s.intensity_1,
                i2: s.intensity_2,
            })
            .map_err(runtime)?;
    }
    writer.flush().map_err(runtime)?;
    println!("wrote {} ({} samples)", csv_path.display(), samples.len());

    let settle_s = if cfg.run.duration_s > 2.0 { 1.0 } else { 0.0 };
    let target = lock_cfg.target_phi_rad;
    let deviations: Vec<f64> = samples
        .iter()
        .filter(|s| s.time_s > settle_s)
        .map(|s| wrap_phase(s.phi_rad - target))
        .collect();
    let n = deviations.len().max(1) as f64;
    let mean_dev = deviations.iter().sum::<f64>() / n;
    let variance = deviations
        .iter()
        .map(|d| (d - mean_dev) * (d - mean_dev))
        .sum::<f64>()
        / n;
    let band = 0.05;
    let frac = biphoton_core::in_band_fraction(&samples, target, band, settle_s);
    println!(
        "lock summary: mean phase {:.6} rad, stddev {:.6e} rad, in-band fraction {:.4} (band {band} rad after {settle_s} s)",
        target + mean_dev,
        variance.sqrt(),
        frac
    );

    if cfg.output.emit_svg {
        let times: Vec<f64> = samples.iter().map(|s| s.time_s).collect();
        let phis: Vec<f64> = samples.iter().map(|s| s.phi_rad).collect();
        let svg_path = dir.join("lock.svg");
        fs::write(&svg_path, svg::lock_svg(&times, &phis, target, band)).map_err(runtime)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Per-port (coincidence, accidental) rates at each port's own fringe peak,
/// plus the location of the global peak.
struct PeakRates {
    pairs: [(f64, f64); 4],
    best_port: usize,
    best_angle_rad: f64,
}

impl PeakRates {
    fn r_c(&self) -> f64 {
        self.pairs[self.best_port].0
    }

    fn r_a(&self) -> f64 {
        self.pairs[self.best_port].1
    }
}

fn peaks_from_records(angles_rad: &[f64], records: &[CountRecord]) -> PeakRates {
    let mut pairs = [(f64::MIN, 0.0); 4];
    let mut best_angle = [0.0; 4];
    for (rec, &angle) in records.iter().zip(angles_rad) {
        for p in 0..4 {
            if rec.coincidences_hz[p] > pairs[p].0 {
                pairs[p] = (rec.coincidences_hz[p], rec.accidentals_hz[p]);
                best_angle[p] = angle;
            }
        }
    }
    let best_port = (0..4)
        .max_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0))
        .unwrap_or(0);
    PeakRates {
        pairs,
        best_port,
        best_angle_rad: best_angle[best_port],
    }
}

fn read_counts_csv(path: &Path) -> Result<(Vec<f64>, Vec<CountRecord>), AppError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| AppError::Config(format!("cannot read counts {}: {e}", path.display())))?;
    let expected = ["angle_deg", "port", "coincidences_hz", "accidentals_hz", "analytic_hz"];
    let headers = reader
        .headers()
        .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
    if headers != expected.as_slice() {
        return Err(AppError::Config(format!(
            "{} line 1: expected header {}, got {}",
            path.display(),
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    // One record per (angle, port); rebuilt into per-angle count records.
    let mut angles_rad: Vec<f64> = Vec::new();
    let mut records: Vec<CountRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".into());
            AppError::Config(format!("{} line {line}: {e}", path.display()))
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &str| -> Result<f64, AppError> {
            let raw = row.get(idx).ok_or_else(|| {
                AppError::Config(format!(
                    "{} line {line}: missing column {name}",
                    path.display()
                ))
            })?;
            raw.trim().parse::<f64>().map_err(|_| {
                AppError::Config(format!(
                    "{} line {line}: bad number {raw:?} in column {name}",
                    path.display()
                ))
            })
        };
        let angle_rad = field(0, "angle_deg")?.to_radians();
        let port_label = row.get(1).unwrap_or("");
        let port = PORT_ORDER
            .iter()
            .position(|p| p.label() == port_label)
            .ok_or_else(|| {
                AppError::Config(format!(
                    "{} line {line}: unknown port {port_label:?}",
                    path.display()
                ))
            })?;
        let coincidences = field(2, "coincidences_hz")?;
        let accidentals = field(3, "accidentals_hz")?;
        field(4, "analytic_hz")?;

        let slot = angles_rad
            .iter()
            .position(|&a| a == angle_rad)
            .unwrap_or_else(|| {
                angles_rad.push(angle_rad);
                records.push(CountRecord {
                    analyzer_angle_rad: angle_rad,
                    duration_s: f64::NAN,
                    pump_power_mw: f64::NAN,
                    singles_hz: [0.0; 4],
                    coincidences_hz: [0.0; 4],
                    accidentals_hz: [0.0; 4],
                });
                angles_rad.len() - 1
            });
        records[slot].coincidences_hz[port] = coincidences;
        records[slot].accidentals_hz[port] = accidentals;
    }
    if records.is_empty() {
        return Err(AppError::Config(format!(
            "{}: no data rows after the header",
            path.display()
        )));
    }
    Ok((angles_rad, records))
}

/// Computes visibility, error rate, conditional detection probabilities,
/// and spectral brightness — either from the analytic model over the scan
/// grid or from a previously written counts CSV. Singles are not part of
/// the counts schema, so the conditional ratios always quote the
/// configured source model at the peak angle.
pub fn cmd_metrics(cfg: &RunConfig, counts: Option<&Path>) -> Result<(), AppError> {
    let (peaks, origin) = match counts {
        None => {
            let angles_rad: Vec<f64> = cfg
                .scan
                .angles_deg()
                .iter()
                .map(|a| a.to_radians())
                .collect();
            let recs: Vec<CountRecord> = angles_rad
                .iter()
                .map(|&t| expected_rates(&cfg.source, &cfg.detector, t))
                .collect::<Result<_, CoreError>>()
                .map_err(runtime)?;
            (peaks_from_records(&angles_rad, &recs), "analytic model".to_string())
        }
        Some(path) => {
            let (angles_rad, recs) = read_counts_csv(path)?;
            let n_rows = recs.len() * 4;
            (
                peaks_from_records(&angles_rad, &recs),
                format!("{} ({n_rows} count entries)", path.display()),
            )
        }
    };

    let model = expected_rates(&cfg.source, &cfg.detector, peaks.best_angle_rad).map_err(runtime)?;
    let singles_peak = model.singles_hz[peaks.best_port];
    let singles_total: f64 = model.singles_hz.iter().sum();

    let r_c = peaks.r_c();
    let r_a = peaks.r_a();
    let v = visibility(r_c, r_a).map_err(runtime)?;
    let q = qber(&peaks.pairs).map_err(runtime)?;
    let det = &cfg.detector;
    let brightness = spectral_brightness(
        r_c,
        det.eta_s,
        det.eta_i,
        cfg.source.pump_power_mw,
        cfg.source.bandwidth_i_nm,
        det.thz_per_nm,
    )
    .map_err(runtime)?;

    println!("metrics from {origin}");
    println!(
        "inputs: r_c {:.6e} /s, r_a {:.6e} /s at port {}, angle {:.2} deg",
        r_c,
        r_a,
        PORT_ORDER[peaks.best_port].label(),
        peaks.best_angle_rad.to_degrees()
    );
    println!(
        "inputs: singles (model, peak port) {singles_peak:.6e} /s, singles (model, all ports) {singles_total:.6e} /s"
    );
    println!(
        "inputs: eta_s {}, eta_i {}, pump {} mW, bandwidth {} nm x {} THz/nm",
        det.eta_s, det.eta_i, cfg.source.pump_power_mw, cfg.source.bandwidth_i_nm, det.thz_per_nm
    );
    println!("visibility: {v:.6}");
    println!("qber: {q:.6}");
    println!("conditional idler probability (peak port): {:.6}", r_c / singles_peak);
    println!("conditional idler probability (all ports): {:.6}", r_c / singles_total);
    println!("spectral brightness: {brightness:.6e} /(s THz mW)");
    Ok(())
}
