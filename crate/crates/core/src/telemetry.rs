//! Per-stage energy and emissions accounting.
//!
//! Durations come from stage execution, average power from backend
//! configuration (or a sampling hook). Energy follows the defining
//! identity `kWh = W * min / 60 / 1000`, emissions multiply by a grid
//! carbon intensity plus an optional underestimation correction for
//! software meters that under-read true draw. Internal math is full
//! precision; rounding to two decimals happens at render time only.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stage::StageKind;

/// Default grid carbon intensity in kg CO2-equivalent per kWh.
pub const DEFAULT_CARBON_INTENSITY: f64 = 0.380;

/// Allowed range for the underestimation correction multiplier.
pub const CORRECTION_RANGE: (f64, f64) = (1.0, 1.3);

/// One energy measurement for a stage execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub stage: StageKind,
    /// Attribution label (e.g. `party/source`); absent for fixture rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub duration_min: f64,
    pub avg_power_w: f64,
    pub energy_kwh: f64,
    pub emissions_kg: f64,
}

/// Conversion factors for the emissions computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionsConfig {
    pub carbon_intensity_kg_per_kwh: f64,
    pub underestimation_correction: f64,
}

impl Default for EmissionsConfig {
    fn default() -> Self {
        EmissionsConfig {
            carbon_intensity_kg_per_kwh: DEFAULT_CARBON_INTENSITY,
            underestimation_correction: 1.0,
        }
    }
}

impl EmissionsConfig {
    pub fn validate(&self) -> Result<(), TelemetryError> {
        if self.carbon_intensity_kg_per_kwh <= 0.0 {
            return Err(TelemetryError::InvalidConfig {
                detail: format!(
                    "carbon intensity must be positive, got {}",
                    self.carbon_intensity_kg_per_kwh
                ),
            });
        }
        let (lo, hi) = CORRECTION_RANGE;
        if self.underestimation_correction < lo || self.underestimation_correction > hi {
            return Err(TelemetryError::InvalidConfig {
                detail: format!(
                    "underestimation correction must be in [{lo}, {hi}], got {}",
                    self.underestimation_correction
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("negative input: {detail}")]
    NegativeInput { detail: String },
    #[error("ledger is empty")]
    EmptyLedger,
    #[error("invalid emissions config: {detail}")]
    InvalidConfig { detail: String },
}

/// `kWh = W * min / 60 / 1000`.
pub fn energy_from_power_duration(
    avg_power_w: f64,
    duration_min: f64,
) -> Result<f64, TelemetryError> {
    if avg_power_w < 0.0 || duration_min < 0.0 {
        return Err(TelemetryError::NegativeInput {
            detail: format!("power {avg_power_w} W, duration {duration_min} min"),
        });
    }
    Ok(avg_power_w * duration_min / 60.0 / 1000.0)
}

/// `kg = kWh * intensity * correction`.
pub fn emissions_from_energy(
    energy_kwh: f64,
    cfg: &EmissionsConfig,
) -> Result<f64, TelemetryError> {
    if energy_kwh < 0.0 {
        return Err(TelemetryError::NegativeInput {
            detail: format!("energy {energy_kwh} kWh"),
        });
    }
    cfg.validate()?;
    Ok(energy_kwh * cfg.carbon_intensity_kg_per_kwh * cfg.underestimation_correction)
}

/// Single-writer append log of energy records. Readers snapshot a
/// prefix-consistent copy at any time.
#[derive(Debug, Default)]
pub struct EnergyLedger {
    rows: Mutex<Vec<EnergyRecord>>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a record for an executed stage and return a copy of it.
    pub fn record_stage(
        &self,
        stage: StageKind,
        duration: Duration,
        avg_power_w: f64,
        cfg: &EmissionsConfig,
    ) -> EnergyRecord {
        self.record_stage_scoped(stage, None, duration, avg_power_w, cfg)
    }

    pub fn record_stage_scoped(
        &self,
        stage: StageKind,
        scope: Option<String>,
        duration: Duration,
        avg_power_w: f64,
        cfg: &EmissionsConfig,
    ) -> EnergyRecord {
        let duration_min = duration.as_secs_f64() / 60.0;
        let energy_kwh = energy_from_power_duration(avg_power_w.max(0.0), duration_min)
            .expect("non-negative by construction");
        let emissions_kg = energy_kwh
            * cfg.carbon_intensity_kg_per_kwh.max(0.0)
            * cfg.underestimation_correction;
        let record = EnergyRecord {
            stage,
            scope,
            duration_min,
            avg_power_w,
            energy_kwh,
            emissions_kg,
        };
        self.rows.lock().unwrap().push(record.clone());
        record
    }

    /// Append an already-computed record, e.g. carried over from a
    /// previous run during resume.
    pub fn append(&self, record: EnergyRecord) {
        self.rows.lock().unwrap().push(record);
    }

    /// Append an externally measured row, e.g. fixture data.
    pub fn record_measured(
        &self,
        stage: StageKind,
        duration_min: f64,
        avg_power_w: f64,
        cfg: &EmissionsConfig,
    ) -> Result<EnergyRecord, TelemetryError> {
        let energy_kwh = energy_from_power_duration(avg_power_w, duration_min)?;
        let emissions_kg = emissions_from_energy(energy_kwh, cfg)?;
        let record = EnergyRecord {
            stage,
            scope: None,
            duration_min,
            avg_power_w,
            energy_kwh,
            emissions_kg,
        };
        self.rows.lock().unwrap().push(record.clone());
        Ok(record)
    }

    pub fn snapshot(&self) -> Vec<EnergyRecord> {
        self.rows.lock().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.rows.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One aggregated report row; power is absent on the total row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub step: String,
    pub duration_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_power_w: Option<f64>,
    pub energy_kwh: f64,
    pub emissions_kg: f64,
}

/// The rendered emissions report: one row per stage plus a total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionsReport {
    pub rows: Vec<ReportRow>,
    pub total: ReportRow,
}

/// Round half-up to two decimals, for rendering.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Aggregate ledger rows per stage (in stage order), recompute emissions
/// under `cfg`, and render the report.
///
/// Emissions are derived from each row's energy so that a correction
/// multiplier can be applied to an existing ledger after the fact.
pub fn render_report(
    rows: &[EnergyRecord],
    cfg: &EmissionsConfig,
) -> Result<EmissionsReport, TelemetryError> {
    if rows.is_empty() {
        return Err(TelemetryError::EmptyLedger);
    }
    cfg.validate()?;

    let mut report_rows = Vec::new();
    let mut total_duration = 0.0;
    let mut total_energy = 0.0;
    for stage in StageKind::ALL {
        let stage_rows: Vec<&EnergyRecord> = rows.iter().filter(|r| r.stage == stage).collect();
        if stage_rows.is_empty() {
            continue;
        }
        let duration_min: f64 = stage_rows.iter().map(|r| r.duration_min).sum();
        let energy_kwh: f64 = stage_rows.iter().map(|r| r.energy_kwh).sum();
        // Duration-weighted average power; falls back to the plain mean
        // for zero-duration rows.
        let avg_power_w = if duration_min > 0.0 {
            energy_kwh / duration_min * 60.0 * 1000.0
        } else {
            stage_rows.iter().map(|r| r.avg_power_w).sum::<f64>() / stage_rows.len() as f64
        };
        let emissions_kg = emissions_from_energy(energy_kwh, cfg)?;
        total_duration += duration_min;
        total_energy += energy_kwh;
        report_rows.push(ReportRow {
            step: stage.display_name().to_string(),
            duration_min,
            avg_power_w: Some(avg_power_w),
            energy_kwh,
            emissions_kg,
        });
    }
    let total = ReportRow {
        step: "Total".to_string(),
        duration_min: total_duration,
        avg_power_w: None,
        energy_kwh: total_energy,
        emissions_kg: emissions_from_energy(total_energy, cfg)?,
    };
    Ok(EmissionsReport {
        rows: report_rows,
        total,
    })
}

/// Format the report as an aligned text table with two-decimal cells.
pub fn format_report(report: &EmissionsReport) -> String {
    let mut lines = Vec::new();
    lines.push(format!(
        "{:<22} {:>14} {:>12} {:>10} {:>14}",
        "Processing Step", "Duration (min)", "Energy (kWh)", "Power (W)", "Emissions (kg)"
    ));
    let fmt_row = |r: &ReportRow| {
        format!(
            "{:<22} {:>14.2} {:>12.2} {:>10} {:>14.2}",
            r.step,
            round2(r.duration_min),
            round2(r.energy_kwh),
            r.avg_power_w
                .map(|p| format!("{:.2}", round2(p)))
                .unwrap_or_else(|| "--".to_string()),
            round2(r.emissions_kg),
        )
    };
    for row in &report.rows {
        lines.push(fmt_row(row));
    }
    lines.push(fmt_row(&report.total));
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 0.005;

    #[test]
    fn energy_identity() {
        let e = energy_from_power_duration(322.58, 132.06).unwrap();
        assert!((e - 0.710).abs() < TOL, "got {e}");
        let e = energy_from_power_duration(234.84, 360.24).unwrap();
        assert!((e - 1.410).abs() < TOL, "got {e}");
        assert_eq!(energy_from_power_duration(0.0, 99.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(energy_from_power_duration(-1.0, 1.0).is_err());
        assert!(emissions_from_energy(-0.1, &EmissionsConfig::default()).is_err());
    }

    #[test]
    fn emissions_conversion() {
        let cfg = EmissionsConfig::default();
        let kg = emissions_from_energy(0.71, &cfg).unwrap();
        assert!((kg - 0.270).abs() < TOL, "got {kg}");
        let kg = emissions_from_energy(2.37, &cfg).unwrap();
        assert!((kg - 0.90).abs() < 0.01, "got {kg}");
    }

    #[test]
    fn correction_is_multiplicative() {
        let cfg = EmissionsConfig {
            carbon_intensity_kg_per_kwh: 0.380,
            underestimation_correction: 1.25,
        };
        let kg = emissions_from_energy(1.0, &cfg).unwrap();
        assert!((kg - 0.475).abs() < 1e-9, "got {kg}");
    }

    #[test]
    fn correction_range_enforced() {
        let cfg = EmissionsConfig {
            carbon_intensity_kg_per_kwh: 0.380,
            underestimation_correction: 1.5,
        };
        assert!(cfg.validate().is_err());
        let cfg = EmissionsConfig {
            carbon_intensity_kg_per_kwh: -0.1,
            underestimation_correction: 1.0,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn record_stage_appends_complete_record() {
        let ledger = EnergyLedger::new();
        let rec = ledger.record_measured(
            StageKind::Summarize,
            5.04,
            238.10,
            &EmissionsConfig::default(),
        )
        .unwrap();
        assert!((rec.energy_kwh - 0.020).abs() < TOL);
        assert!((rec.emissions_kg - 0.008).abs() < TOL);
        assert_eq!(ledger.len(), 1);
    }

    #[test]
    fn zero_duration_yields_zero_energy() {
        let ledger = EnergyLedger::new();
        let rec = ledger.record_stage(
            StageKind::Reason,
            Duration::ZERO,
            300.0,
            &EmissionsConfig::default(),
        );
        assert_eq!(rec.energy_kwh, 0.0);
        assert_eq!(rec.emissions_kg, 0.0);
    }

    #[test]
    fn concurrent_appends_both_land() {
        let ledger = std::sync::Arc::new(EnergyLedger::new());
        let cfg = EmissionsConfig::default();
        let handles: Vec<_> = (0..2)
            .map(|_| {
                let ledger = ledger.clone();
                std::thread::spawn(move || {
                    ledger.record_stage(
                        StageKind::ImageGen,
                        Duration::from_millis(10),
                        100.0,
                        &EmissionsConfig::default(),
                    );
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let _ = cfg;
        assert_eq!(ledger.len(), 2);
    }

    fn table_fixture_ledger() -> EnergyLedger {
        let ledger = EnergyLedger::new();
        let cfg = EmissionsConfig::default();
        let pairs = [
            (StageKind::TranslateDeEn, 132.06, 322.58),
            (StageKind::Summarize, 5.04, 238.10),
            (StageKind::Reason, 360.24, 234.84),
            (StageKind::TranslateEnDe, 18.96, 316.46),
            (StageKind::ImageGen, 22.45, 320.71),
        ];
        for (stage, dur, watts) in pairs {
            ledger.record_measured(stage, dur, watts, &cfg).unwrap();
        }
        ledger
    }

    #[test]
    fn report_totals_from_fixture_pairs() {
        let ledger = table_fixture_ledger();
        let report = render_report(&ledger.snapshot(), &EmissionsConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 5);
        assert!((report.total.duration_min - 538.75).abs() < 0.01);
        assert!((round2(report.total.energy_kwh) - 2.37).abs() < 0.01 + 1e-9);
        assert!((round2(report.total.emissions_kg) - 0.90).abs() < 0.01 + 1e-9);
    }

    #[test]
    fn single_row_total_equals_row() {
        let ledger = EnergyLedger::new();
        let cfg = EmissionsConfig::default();
        ledger.record_measured(StageKind::Reason, 10.0, 200.0, &cfg).unwrap();
        let report = render_report(&ledger.snapshot(), &cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!((report.total.energy_kwh - report.rows[0].energy_kwh).abs() < 1e-12);
        assert!((report.total.duration_min - report.rows[0].duration_min).abs() < 1e-12);
    }

    #[test]
    fn correction_rescales_totals() {
        let ledger = table_fixture_ledger();
        let cfg = EmissionsConfig {
            carbon_intensity_kg_per_kwh: 0.380,
            underestimation_correction: 1.25,
        };
        let report = render_report(&ledger.snapshot(), &cfg).unwrap();
        assert!((round2(report.total.emissions_kg) - 1.13).abs() < 0.01 + 1e-9,
            "got {}", report.total.emissions_kg);
    }

    #[test]
    fn emissions_monotone_in_intensity() {
        for i in 1..10 {
            let lo = EmissionsConfig {
                carbon_intensity_kg_per_kwh: 0.1 * i as f64,
                underestimation_correction: 1.0,
            };
            let hi = EmissionsConfig {
                carbon_intensity_kg_per_kwh: 0.1 * (i + 1) as f64,
                underestimation_correction: 1.0,
            };
            assert!(
                emissions_from_energy(1.5, &lo).unwrap() < emissions_from_energy(1.5, &hi).unwrap()
            );
        }
    }

    #[test]
    fn empty_ledger_rejected() {
        assert!(matches!(
            render_report(&[], &EmissionsConfig::default()),
            Err(TelemetryError::EmptyLedger)
        ));
    }

    #[test]
    fn formatted_table_has_all_rows() {
        let ledger = table_fixture_ledger();
        let report = render_report(&ledger.snapshot(), &EmissionsConfig::default()).unwrap();
        let text = format_report(&report);
        for step in ["Translate (DE -> EN)", "Summarize", "Reason", "Translate (EN -> DE)",
                     "Generate Images", "Total"] {
            assert!(text.contains(step), "missing {step} in:\n{text}");
        }
        assert!(text.contains("538.75"));
        assert!(text.contains("--"));
    }
}
