//! The two closed-form execution-time models.
//!
//! Strategy (a) prices preparation, training, validation and testing in
//! operation counts, scales the parallel phases by the CPI penalty, and
//! multiplies the whole compute term by a calibrated `OperationFactor`:
//!
//! ```text
//! T = (prep + (train + validate + test) * CPI) * OperationFactor + T_mem
//! prep     = (prep_ops + 4*i + 2*it + 10*ep) / s
//! train    = ((fprop_ops + bprop_ops) / s) * (i/p) * ep
//! validate = (fprop_ops / s) * (i/p) * ep
//! test     = (fprop_ops / s) * (it/p) * ep
//! ```
//!
//! Strategy (b) replaces the operation counts with measured per-image
//! times; the measured preparation time sits outside the CPI penalty and
//! there is no operation factor:
//!
//! ```text
//! T = prep_s + ((fprop_s + bprop_s)*(i/p)*ep + fprop_s*(i/p)*ep + fprop_s*(it/p)*ep) * CPI + T_mem
//! ```
//!
//! Both share the memory-overhead term
//! `T_mem = contention * ep * i / p`, where the contention value comes
//! from the architecture's [`ContentionProfile`](crate::hardware::ContentionProfile)
//! at the workload's thread count.

use alloc::string::String;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::hardware::{ContentionProfile, HardwareError, HardwareProfile};

/// Which of the two prediction models to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    A,
    B,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::A => "a",
            Strategy::B => "b",
        })
    }
}

/// A training job to predict: image counts, epochs, and the parallel
/// execution context.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Workload {
    pub architecture: String,
    /// Training/validation image count (`i`).
    pub images: u64,
    /// Test image count (`it`).
    pub test_images: u64,
    /// Epoch count (`ep`).
    pub epochs: u32,
    /// Processing-unit (thread) count (`p`).
    pub threads: u32,
    /// Network-instance count (`ns`); one per thread by default. Kept for
    /// validation and reporting only, it appears in no formula.
    pub network_instances: u32,
}

impl Workload {
    pub fn new(
        architecture: impl Into<String>,
        images: u64,
        test_images: u64,
        epochs: u32,
        threads: u32,
    ) -> Self {
        Workload {
            architecture: architecture.into(),
            images,
            test_images,
            epochs,
            threads,
            network_instances: threads,
        }
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        for (field, value) in [
            ("images", self.images),
            ("test_images", self.test_images),
            ("epochs", self.epochs as u64),
            ("threads", self.threads as u64),
            ("network_instances", self.network_instances as u64),
        ] {
            if value == 0 {
                return Err(PredictError::InvalidWorkload { field });
            }
        }
        Ok(())
    }
}

/// How per-thread image shares are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChunkMode {
    /// Real-valued `n / p`. Reproduces the published prediction tables.
    #[default]
    Exact,
    /// `ceil(n / p)`: the share of the slowest worker when images cannot
    /// be divided evenly.
    Ceil,
}

/// Per-thread share of `n` images across `p` threads.
pub fn chunk(n: u64, p: u32, mode: ChunkMode) -> f64 {
    match mode {
        ChunkMode::Exact => n as f64 / p as f64,
        ChunkMode::Ceil => n.div_ceil(p as u64) as f64,
    }
}

/// Memory overhead in seconds: `contention * ep * i / p`, the measured
/// per-image, per-epoch contention penalty divided across threads.
pub fn t_mem(contention_s: f64, epochs: u32, images: u64, threads: u32) -> f64 {
    contention_s * epochs as f64 * images as f64 / threads as f64
}

/// Strategy (a) parameters: operation counts plus the calibration factor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModelParamsA {
    /// Operations to create network instances, prepare weights and images.
    pub prep_ops: f64,
    /// Operations to forward-propagate one image.
    pub fprop_ops: f64,
    /// Operations to back-propagate one image.
    pub bprop_ops: f64,
    /// Dimensionless multiplier absorbing instruction-count approximation
    /// and vectorization effects; fitted to one measured run.
    pub operation_factor: f64,
}

impl ModelParamsA {
    pub fn validate(&self) -> Result<(), PredictError> {
        for (field, value) in [
            ("prep_ops", self.prep_ops),
            ("fprop_ops", self.fprop_ops),
            ("bprop_ops", self.bprop_ops),
            ("operation_factor", self.operation_factor),
        ] {
            if !crate::num::positive(value) {
                return Err(PredictError::InvalidParams { field });
            }
        }
        Ok(())
    }
}

/// Strategy (b) parameters: measured wall times, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModelParamsB {
    /// Measured preparation time.
    pub prep_s: f64,
    /// Measured forward propagation time per image.
    pub fprop_s: f64,
    /// Measured back-propagation time per image.
    pub bprop_s: f64,
}

impl ModelParamsB {
    pub fn validate(&self) -> Result<(), PredictError> {
        for (field, value) in [
            ("prep_s", self.prep_s),
            ("fprop_s", self.fprop_s),
            ("bprop_s", self.bprop_s),
        ] {
            if !crate::num::positive(value) {
                return Err(PredictError::InvalidParams { field });
            }
        }
        Ok(())
    }
}

/// Predicted seconds per algorithm phase, each after its multipliers
/// (CPI and, for strategy (a), the operation factor).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct PhaseBreakdown {
    pub prep_s: f64,
    pub train_s: f64,
    pub validate_s: f64,
    pub test_s: f64,
    pub mem_s: f64,
}

impl PhaseBreakdown {
    pub fn total(&self) -> f64 {
        self.prep_s + self.train_s + self.validate_s + self.test_s + self.mem_s
    }
}

/// A model evaluation: total predicted seconds, the phase breakdown, and
/// the derived quantities that went into it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Prediction {
    pub total_s: f64,
    pub breakdown: PhaseBreakdown,
    pub cpi_used: f64,
    pub contention_used: f64,
    pub chunk_i: f64,
    pub chunk_it: f64,
}

impl Prediction {
    pub fn minutes(&self) -> f64 {
        self.total_s / 60.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictError {
    InvalidWorkload { field: &'static str },
    InvalidParams { field: &'static str },
    ArchitectureMismatch { workload: String, profile: String },
    Hardware(HardwareError),
    Calibration(&'static str),
}

impl fmt::Display for PredictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictError::InvalidWorkload { field } => {
                write!(f, "workload field '{field}' must be at least 1")
            }
            PredictError::InvalidParams { field } => {
                write!(f, "model parameter '{field}' must be positive")
            }
            PredictError::ArchitectureMismatch { workload, profile } => {
                write!(
                    f,
                    "workload is for architecture '{workload}' but the contention profile describes '{profile}'"
                )
            }
            PredictError::Hardware(e) => write!(f, "{e}"),
            PredictError::Calibration(reason) => write!(f, "cannot calibrate: {reason}"),
        }
    }
}

impl core::error::Error for PredictError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            PredictError::Hardware(e) => Some(e),
            _ => None,
        }
    }
}

impl From<HardwareError> for PredictError {
    fn from(e: HardwareError) -> Self {
        PredictError::Hardware(e)
    }
}

struct EvalContext {
    cpi: f64,
    contention: f64,
    chunk_i: f64,
    chunk_it: f64,
    mem_s: f64,
}

fn eval_context(
    workload: &Workload,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
    mode: ChunkMode,
) -> Result<EvalContext, PredictError> {
    workload.validate()?;
    hw.validate()?;
    if workload.architecture != contention.architecture {
        return Err(PredictError::ArchitectureMismatch {
            workload: workload.architecture.clone(),
            profile: contention.architecture.clone(),
        });
    }
    let cpi = hw.cpi_for(workload.threads);
    let contention = contention.contention_at(workload.threads)?;
    Ok(EvalContext {
        cpi,
        contention,
        chunk_i: chunk(workload.images, workload.threads, mode),
        chunk_it: chunk(workload.test_images, workload.threads, mode),
        mem_s: t_mem(
            contention,
            workload.epochs,
            workload.images,
            workload.threads,
        ),
    })
}

/// Evaluate strategy (a) with the given per-thread chunking mode.
pub fn predict_a_chunked(
    workload: &Workload,
    params: &ModelParamsA,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
    mode: ChunkMode,
) -> Result<Prediction, PredictError> {
    params.validate()?;
    let ctx = eval_context(workload, hw, contention, mode)?;
    let s = hw.clock_speed_hz;
    let ep = workload.epochs as f64;
    let of = params.operation_factor;

    let prep = (params.prep_ops
        + 4.0 * workload.images as f64
        + 2.0 * workload.test_images as f64
        + 10.0 * ep)
        / s;
    let train = ((params.fprop_ops + params.bprop_ops) / s) * ctx.chunk_i * ep;
    let validate = (params.fprop_ops / s) * ctx.chunk_i * ep;
    let test = (params.fprop_ops / s) * ctx.chunk_it * ep;

    let breakdown = PhaseBreakdown {
        prep_s: prep * of,
        train_s: train * ctx.cpi * of,
        validate_s: validate * ctx.cpi * of,
        test_s: test * ctx.cpi * of,
        mem_s: ctx.mem_s,
    };
    Ok(Prediction {
        total_s: breakdown.total(),
        breakdown,
        cpi_used: ctx.cpi,
        contention_used: ctx.contention,
        chunk_i: ctx.chunk_i,
        chunk_it: ctx.chunk_it,
    })
}

/// Evaluate strategy (a): operation-count model with a calibrated
/// operation factor. Chunks are exact real-valued shares.
pub fn predict_a(
    workload: &Workload,
    params: &ModelParamsA,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
) -> Result<Prediction, PredictError> {
    predict_a_chunked(workload, params, hw, contention, ChunkMode::Exact)
}

/// Evaluate strategy (b) with the given per-thread chunking mode.
pub fn predict_b_chunked(
    workload: &Workload,
    params: &ModelParamsB,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
    mode: ChunkMode,
) -> Result<Prediction, PredictError> {
    params.validate()?;
    let ctx = eval_context(workload, hw, contention, mode)?;
    let ep = workload.epochs as f64;

    let breakdown = PhaseBreakdown {
        prep_s: params.prep_s,
        train_s: (params.fprop_s + params.bprop_s) * ctx.chunk_i * ep * ctx.cpi,
        validate_s: params.fprop_s * ctx.chunk_i * ep * ctx.cpi,
        test_s: params.fprop_s * ctx.chunk_it * ep * ctx.cpi,
        mem_s: ctx.mem_s,
    };
    Ok(Prediction {
        total_s: breakdown.total(),
        breakdown,
        cpi_used: ctx.cpi,
        contention_used: ctx.contention,
        chunk_i: ctx.chunk_i,
        chunk_it: ctx.chunk_it,
    })
}

/// Evaluate strategy (b): measurement-seeded model. The preparation time
/// sits outside the CPI penalty and there is no operation factor.
pub fn predict_b(
    workload: &Workload,
    params: &ModelParamsB,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
) -> Result<Prediction, PredictError> {
    predict_b_chunked(workload, params, hw, contention, ChunkMode::Exact)
}

/// Solve strategy (a) for the operation factor given one measured total:
/// `(measured - mem) / (prep + (train + validate + test) * CPI)`.
///
/// `params.operation_factor` is ignored.
pub fn calibrate_operation_factor(
    measured_total_s: f64,
    workload: &Workload,
    params: &ModelParamsA,
    hw: &HardwareProfile,
    contention: &ContentionProfile,
) -> Result<f64, PredictError> {
    if !crate::num::positive(measured_total_s) {
        return Err(PredictError::Calibration("measured time must be positive"));
    }
    let unit = ModelParamsA {
        operation_factor: 1.0,
        ..*params
    };
    let prediction = predict_a(workload, &unit, hw, contention)?;
    let mem = prediction.breakdown.mem_s;
    let compute = prediction.total_s - mem;
    if !crate::num::positive(compute) {
        return Err(PredictError::Calibration(
            "the compute term is not positive",
        ));
    }
    if measured_total_s <= mem {
        return Err(PredictError::Calibration(
            "measured time does not exceed the memory-overhead term",
        ));
    }
    Ok((measured_total_s - mem) / compute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use approx::assert_relative_eq;

    fn setup() -> (Dataset, Workload) {
        let data = Dataset::reference();
        let workload = Workload::new("small", 60_000, 10_000, 70, 240);
        (data, workload)
    }

    #[test]
    fn t_mem_spot_values() {
        assert_relative_eq!(t_mem(1.40e-2, 70, 60_000, 240), 245.0, max_relative = 1e-12);
        assert_relative_eq!(
            t_mem(2.78e-2, 70, 60_000, 480),
            243.25,
            max_relative = 1e-12
        );
        assert_eq!(t_mem(0.0, 70, 60_000, 240), 0.0);
    }

    #[test]
    fn chunk_modes() {
        assert_eq!(chunk(60_000, 240, ChunkMode::Exact), 250.0);
        assert_relative_eq!(
            chunk(10_000, 480, ChunkMode::Exact),
            20.833333333333332,
            max_relative = 1e-15
        );
        assert_eq!(chunk(10_000, 480, ChunkMode::Ceil), 21.0);
        assert_eq!(chunk(60_000, 240, ChunkMode::Ceil), 250.0);
    }

    #[test]
    fn strategy_a_worked_example() {
        // small CNN at 240 threads; frozen from a hand evaluation of the
        // strategy-(a) formula with the bundled constants
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_relative_eq!(p.total_s, 532.6243218901, max_relative = 1e-10);
        assert_relative_eq!(p.breakdown.prep_s, 12.1194753635, max_relative = 1e-10);
        assert_relative_eq!(p.breakdown.train_s, 246.8093699515, max_relative = 1e-10);
        assert_relative_eq!(p.breakdown.validate_s, 24.5961227787, max_relative = 1e-10);
        assert_relative_eq!(p.breakdown.test_s, 4.0993537964, max_relative = 1e-10);
        assert_relative_eq!(p.breakdown.mem_s, 245.0, max_relative = 1e-12);
        assert_eq!(p.cpi_used, 2.0);
        assert_eq!(p.chunk_i, 250.0);
    }

    #[test]
    fn strategy_b_matches_published_rows() {
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let workload = Workload::new("small", 60_000, 10_000, 70, 480);
        let p = predict_b(
            &workload,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        // published value rounds to 6.7 minutes
        assert_relative_eq!(p.total_s, 403.5391666667, max_relative = 1e-10);

        let entry = data.entry("large").unwrap();
        let workload = Workload::new("large", 60_000, 10_000, 15, 480);
        let p = predict_b(
            &workload,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        // published value rounds to 82.6 minutes
        assert_relative_eq!(p.total_s, 4956.9875, max_relative = 1e-10);
    }

    #[test]
    fn breakdown_sums_to_total() {
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_eq!(p.total_s, p.breakdown.total());
    }

    #[test]
    fn epochs_scale_compute_terms_linearly() {
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let doubled = Workload {
            epochs: 140,
            ..workload.clone()
        };
        let p1 = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let p2 = predict_a(
            &doubled,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_relative_eq!(
            p2.breakdown.train_s,
            2.0 * p1.breakdown.train_s,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p2.breakdown.validate_s,
            2.0 * p1.breakdown.validate_s,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p2.breakdown.test_s,
            2.0 * p1.breakdown.test_s,
            max_relative = 1e-12
        );

        let b1 = predict_b(
            &workload,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let b2 = predict_b(
            &doubled,
            &entry.model.params_b,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_relative_eq!(
            b2.breakdown.train_s,
            2.0 * b1.breakdown.train_s,
            max_relative = 1e-12
        );
        assert_eq!(b1.breakdown.prep_s, b2.breakdown.prep_s);
    }

    #[test]
    fn dimensional_sanity_with_unit_multipliers() {
        // operation_factor 1, CPI 1, zero contention, vanishing prep:
        // the training term reduces to (ops/s) * images * epochs at p = 1
        let hw = HardwareProfile {
            name: "unit".into(),
            clock_speed_hz: 1.238e9,
            cores: 60,
            max_threads_per_core: 4,
            cpi_schedule: vec![1.0, 1.0, 1.0, 1.0],
        };
        let contention = ContentionProfile::new(
            "small",
            vec![
                crate::hardware::ContentionSample::measured(1, 0.0),
                crate::hardware::ContentionSample::measured(4000, 0.0),
            ],
        )
        .unwrap();
        let params = ModelParamsA {
            prep_ops: 1e-300,
            fprop_ops: 58_000.0,
            bprop_ops: 524_000.0,
            operation_factor: 1.0,
        };
        let workload = Workload::new("small", 60_000, 10_000, 70, 1);
        let p = predict_a(&workload, &params, &hw, &contention).unwrap();
        let expected_train = (582_000.0 / 1.238e9) * 60_000.0 * 70.0;
        assert_relative_eq!(p.breakdown.train_s, expected_train, max_relative = 1e-12);
        assert_eq!(p.breakdown.mem_s, 0.0);
    }

    #[test]
    fn calibration_round_trip_recovers_factor() {
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let factor = calibrate_operation_factor(
            p.total_s,
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_relative_eq!(factor, 15.0, max_relative = 1e-9);
    }

    #[test]
    fn calibration_doubles_with_doubled_compute() {
        // synthetic measurement of 2x the compute term at 15 threads
        let data = Dataset::reference();
        let entry = data.entry("small").unwrap();
        let workload = Workload::new("small", 60_000, 10_000, 70, 15);
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let mem = p.breakdown.mem_s;
        let measured = 2.0 * (p.total_s - mem) + mem;
        let factor = calibrate_operation_factor(
            measured,
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        assert_relative_eq!(factor, 30.0, max_relative = 1e-9);
    }

    #[test]
    fn calibration_rejects_measured_below_memory_term() {
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let p = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap();
        let err = calibrate_operation_factor(
            p.breakdown.mem_s,
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap_err();
        assert!(matches!(err, PredictError::Calibration(_)));
    }

    #[test]
    fn degenerate_workloads_are_rejected() {
        let (data, workload) = setup();
        let entry = data.entry("small").unwrap();
        let zero_threads = Workload {
            threads: 0,
            ..workload
        };
        let err = predict_a(
            &zero_threads,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap_err();
        assert_eq!(err, PredictError::InvalidWorkload { field: "threads" });
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let (data, workload) = setup();
        let entry = data.entry("medium").unwrap();
        let err = predict_a(
            &workload,
            &entry.model.params_a,
            &data.hardware,
            &entry.model.contention,
        )
        .unwrap_err();
        assert!(matches!(err, PredictError::ArchitectureMismatch { .. }));
    }
}
