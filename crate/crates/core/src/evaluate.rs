//! Prediction-accuracy evaluation against measured runs, and scaling
//! sweeps over thread counts and image/epoch grids.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::hardware::{ContentionProfile, HardwareProfile};
use crate::predict::{
    predict_a, predict_b, ModelParamsA, ModelParamsB, PredictError, Strategy, Workload,
};

/// One measured training run to compare a prediction against.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MeasuredRun {
    pub architecture: String,
    pub threads: u32,
    pub images: u64,
    pub test_images: u64,
    pub epochs: u32,
    pub measured_s: f64,
}

/// One evaluated run: measured vs predicted seconds and the accuracy
/// delta in percent.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct AccuracyRow {
    pub architecture: String,
    pub threads: u32,
    pub measured_s: f64,
    pub predicted_s: f64,
    pub delta_percent: f64,
}

/// Evaluated runs plus the unweighted mean of the per-row deltas.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
    pub average_delta_percent: f64,
}

/// Everything model-specific about one architecture: both parameter sets
/// and its contention curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ArchModel {
    pub name: String,
    pub params_a: ModelParamsA,
    pub params_b: ModelParamsB,
    pub contention: ContentionProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    NonPositiveMeasured { row: usize },
    NonPositivePredicted,
    UnknownArchitecture { row: usize, architecture: String },
    Predict { row: usize, source: PredictError },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NonPositiveMeasured { row } => {
                write!(f, "row {row}: measured time must be positive")
            }
            EvalError::NonPositivePredicted => {
                write!(
                    f,
                    "predicted time must be positive to compute an accuracy delta"
                )
            }
            EvalError::UnknownArchitecture { row, architecture } => {
                write!(
                    f,
                    "row {row}: no model parameters for architecture '{architecture}'"
                )
            }
            EvalError::Predict { row, source } => write!(f, "row {row}: {source}"),
        }
    }
}

impl core::error::Error for EvalError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            EvalError::Predict { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Prediction-accuracy delta in percent: `|measured - predicted| / predicted * 100`.
pub fn accuracy_delta(measured_s: f64, predicted_s: f64) -> Result<f64, EvalError> {
    if !crate::num::positive(predicted_s) {
        return Err(EvalError::NonPositivePredicted);
    }
    if !crate::num::positive(measured_s) {
        return Err(EvalError::NonPositiveMeasured { row: 0 });
    }
    let diff = measured_s - predicted_s;
    let diff = if diff < 0.0 { -diff } else { diff };
    Ok(diff / predicted_s * 100.0)
}

/// Predict every measured run with the chosen strategy and report the
/// per-row and average accuracy deltas.
pub fn evaluate(
    runs: &[MeasuredRun],
    strategy: Strategy,
    models: &[ArchModel],
    hw: &HardwareProfile,
) -> Result<AccuracyReport, EvalError> {
    let mut rows = Vec::with_capacity(runs.len());
    for (index, run) in runs.iter().enumerate() {
        if !crate::num::positive(run.measured_s) {
            return Err(EvalError::NonPositiveMeasured { row: index });
        }
        let model = models
            .iter()
            .find(|m| m.name == run.architecture)
            .ok_or_else(|| EvalError::UnknownArchitecture {
                row: index,
                architecture: run.architecture.clone(),
            })?;
        let workload = Workload::new(
            run.architecture.clone(),
            run.images,
            run.test_images,
            run.epochs,
            run.threads,
        );
        let prediction = match strategy {
            Strategy::A => predict_a(&workload, &model.params_a, hw, &model.contention),
            Strategy::B => predict_b(&workload, &model.params_b, hw, &model.contention),
        }
        .map_err(|source| EvalError::Predict { row: index, source })?;
        let delta =
            accuracy_delta(run.measured_s, prediction.total_s).map_err(|e| reindex(e, index))?;
        rows.push(AccuracyRow {
            architecture: run.architecture.clone(),
            threads: run.threads,
            measured_s: run.measured_s,
            predicted_s: prediction.total_s,
            delta_percent: delta,
        });
    }
    let average = if rows.is_empty() {
        0.0
    } else {
        rows.iter().map(|r| r.delta_percent).sum::<f64>() / rows.len() as f64
    };
    Ok(AccuracyReport {
        rows,
        average_delta_percent: average,
    })
}

fn reindex(e: EvalError, row: usize) -> EvalError {
    match e {
        EvalError::NonPositiveMeasured { .. } => EvalError::NonPositiveMeasured { row },
        other => other,
    }
}

/// One row of a thread-scaling sweep: both strategies at one thread
/// count, in raw seconds and in presentation-rounded minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ThreadSweepRow {
    pub threads: u32,
    pub seconds_a: f64,
    pub seconds_b: f64,
    pub minutes_a: f64,
    pub minutes_b: f64,
}

/// Evaluate both strategies at each thread count, holding the rest of
/// the workload template fixed.
pub fn sweep_threads(
    thread_counts: &[u32],
    template: &Workload,
    params_a: &ModelParamsA,
    params_b: &ModelParamsB,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
) -> Result<Vec<ThreadSweepRow>, EvalError> {
    let mut rows = Vec::with_capacity(thread_counts.len());
    for (index, &threads) in thread_counts.iter().enumerate() {
        let workload = Workload {
            threads,
            network_instances: threads,
            ..template.clone()
        };
        let a = predict_a(&workload, params_a, hw, contention)
            .map_err(|source| EvalError::Predict { row: index, source })?;
        let b = predict_b(&workload, params_b, hw, contention)
            .map_err(|source| EvalError::Predict { row: index, source })?;
        rows.push(ThreadSweepRow {
            threads,
            seconds_a: a.total_s,
            seconds_b: b.total_s,
            minutes_a: round_tenth(a.total_s / 60.0),
            minutes_b: round_tenth(b.total_s / 60.0),
        });
    }
    Ok(rows)
}

/// One cell of an image/epoch scaling grid (strategy (a)).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ScaleCell {
    pub images: u64,
    pub test_images: u64,
    pub epochs: u32,
    pub threads: u32,
    pub seconds: f64,
    pub minutes: f64,
}

/// Evaluate strategy (a) over the cross product of image pairs, epoch
/// counts and thread counts. Rows are emitted in grid order: image pair,
/// then epochs, then threads.
pub fn sweep_scale(
    image_grid: &[(u64, u64)],
    epoch_grid: &[u32],
    thread_counts: &[u32],
    template: &Workload,
    params_a: &ModelParamsA,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
) -> Result<Vec<ScaleCell>, EvalError> {
    let mut cells = Vec::with_capacity(image_grid.len() * epoch_grid.len() * thread_counts.len());
    for &(images, test_images) in image_grid {
        for &epochs in epoch_grid {
            for &threads in thread_counts {
                let workload = Workload {
                    images,
                    test_images,
                    epochs,
                    threads,
                    network_instances: threads,
                    ..template.clone()
                };
                let p = predict_a(&workload, params_a, hw, contention).map_err(|source| {
                    EvalError::Predict {
                        row: cells.len(),
                        source,
                    }
                })?;
                cells.push(ScaleCell {
                    images,
                    test_images,
                    epochs,
                    threads,
                    seconds: p.total_s,
                    minutes: round_tenth(p.total_s / 60.0),
                });
            }
        }
    }
    Ok(cells)
}

/// Round half-up to one decimal place, for non-negative values. Used
/// only at presentation time; comparisons should use raw seconds.
pub fn round_tenth(value: f64) -> f64 {
    ((value * 10.0 + 0.5) as u64) as f64 / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use approx::assert_relative_eq;

    #[test]
    fn delta_identity_and_arithmetic() {
        assert_eq!(accuracy_delta(100.0, 100.0).unwrap(), 0.0);
        assert_relative_eq!(
            accuracy_delta(110.0, 100.0).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        // under-prediction and over-prediction are both positive deltas
        assert_relative_eq!(
            accuracy_delta(90.0, 100.0).unwrap(),
            10.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn delta_is_scale_invariant() {
        let base = accuracy_delta(110.0, 100.0).unwrap();
        for k in [0.5, 2.0, 1000.0] {
            assert_relative_eq!(
                accuracy_delta(k * 110.0, k * 100.0).unwrap(),
                base,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn delta_rejects_non_positive_inputs() {
        assert_eq!(
            accuracy_delta(100.0, 0.0).unwrap_err(),
            EvalError::NonPositivePredicted
        );
        assert!(accuracy_delta(0.0, 100.0).is_err());
    }

    #[test]
    fn evaluate_on_own_predictions_is_exact() {
        let data = Dataset::reference();
        let models = data.arch_models();
        let mut runs = Vec::new();
        for entry in &data.entries {
            for threads in [15, 60, 240] {
                let workload = Workload::new(
                    entry.model.name.clone(),
                    entry.defaults.images,
                    entry.defaults.test_images,
                    entry.defaults.epochs,
                    threads,
                );
                let p = predict_a(
                    &workload,
                    &entry.model.params_a,
                    &data.hardware,
                    &entry.model.contention,
                )
                .unwrap();
                runs.push(MeasuredRun {
                    architecture: entry.model.name.clone(),
                    threads,
                    images: workload.images,
                    test_images: workload.test_images,
                    epochs: workload.epochs,
                    measured_s: p.total_s,
                });
            }
        }
        let report = evaluate(&runs, Strategy::A, &models, &data.hardware).unwrap();
        assert_eq!(report.rows.len(), 9);
        for row in &report.rows {
            assert_eq!(row.delta_percent, 0.0);
        }
        assert_eq!(report.average_delta_percent, 0.0);
    }

    #[test]
    fn evaluate_reports_ten_percent_overshoot() {
        let data = Dataset::reference();
        let models = data.arch_models();
        let entry = data.entry("small").unwrap();
        let workload = Workload::new("small", 60_000, 10_000, 70, 240);
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let runs = [MeasuredRun {
            architecture: "small".into(),
            threads: 240,
            images: 60_000,
            test_images: 10_000,
            epochs: 70,
            measured_s: 1.1 * p.total_s,
        }];
        let report = evaluate(&runs, Strategy::A, &models, &data.hardware).unwrap();
        assert_relative_eq!(report.average_delta_percent, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn evaluate_names_the_failing_row() {
        let data = Dataset::reference();
        let models = data.arch_models();
        let runs = [
            MeasuredRun {
                architecture: "small".into(),
                threads: 240,
                images: 60_000,
                test_images: 10_000,
                epochs: 70,
                measured_s: 600.0,
            },
            MeasuredRun {
                architecture: "unknown".into(),
                threads: 240,
                images: 60_000,
                test_images: 10_000,
                epochs: 70,
                measured_s: 600.0,
            },
        ];
        let err = evaluate(&runs, Strategy::A, &models, &data.hardware).unwrap_err();
        assert_eq!(
            err,
            EvalError::UnknownArchitecture {
                row: 1,
                architecture: "unknown".into()
            }
        );
    }

    #[test]
    fn empty_sweep_is_empty() {
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let template = Workload::new("small", 60_000, 10_000, 70, 240);
        let rows = sweep_threads(
            &[],
            &template,
            &entry.model.params_a,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn sweep_single_thread_count_matches_direct_prediction() {
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let template = Workload::new("small", 60_000, 10_000, 70, 1);
        let rows = sweep_threads(
            &[240],
            &template,
            &entry.model.params_a,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let direct = predict_a(
            &Workload::new("small", 60_000, 10_000, 70, 240),
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_eq!(rows[0].seconds_a, direct.total_s);
        // published value for this configuration
        assert_eq!(rows[0].minutes_a, 8.9);
    }

    #[test]
    fn single_cell_grid_equals_direct_prediction() {
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let template = Workload::new("small", 1, 1, 1, 1);
        let cells = sweep_scale(
            &[(60_000, 10_000)],
            &[70],
            &[240],
            &template,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_eq!(cells.len(), 1);
        let direct = predict_a(
            &Workload::new("small", 60_000, 10_000, 70, 240),
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_eq!(cells[0].seconds, direct.total_s);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let template = Workload::new("small", 60_000, 10_000, 70, 1);
        let a = sweep_threads(
            &[480, 960, 1920, 3840],
            &template,
            &entry.model.params_a,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let b = sweep_threads(
            &[480, 960, 1920, 3840],
            &template,
            &entry.model.params_a,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].threads, 480);
        assert_eq!(a[3].threads, 3840);
    }

    #[test]
    fn rounding_is_half_up_to_one_decimal() {
        assert_eq!(round_tenth(8.8770), 8.9);
        assert_eq!(round_tenth(8.84999), 8.8);
        assert_eq!(round_tenth(34.95), 35.0);
        assert_eq!(round_tenth(0.0), 0.0);
        assert_eq!(round_tenth(139.00344), 139.0);
    }
}
