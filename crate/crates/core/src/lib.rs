//! Analytical execution-time models for training convolutional neural
//! networks on many-core processors.
//!
//! The crate predicts how long CNN training takes for a given workload
//! (training/test image counts, epochs, thread count) on a many-core
//! processor described by a clock speed, a core/thread topology and a
//! CPI penalty schedule. Two closed-form models are provided:
//!
//! * **strategy (a)** works from per-image operation counts and a single
//!   calibrated `OperationFactor`, requiring measurements only for the
//!   memory-contention curve;
//! * **strategy (b)** is seeded with measured per-image forward- and
//!   back-propagation times and a measured preparation time.
//!
//! Both models add a memory-overhead term driven by a per-architecture
//! contention curve that is interpolated between measured thread counts
//! and extrapolated by an ordinary least-squares line beyond them.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats and the
//! command-line front end live in the companion `traincast` crate.
//!
//! ```
//! use traincast_core::dataset::Dataset;
//! use traincast_core::predict::{predict_a, Workload};
//!
//! let data = Dataset::reference();
//! let entry = data.entry("small").unwrap();
//! let workload = Workload::new("small", 60_000, 10_000, 70, 240);
//! let prediction = predict_a(
//!     &workload,
//!     &entry.model.params_a,
//!     &data.hardware,
//!     &entry.model.contention,
//! )
//! .unwrap();
//! assert!((prediction.total_s - 532.62).abs() < 0.01);
//! ```

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arch;
pub mod dataset;
pub mod evaluate;
pub mod hardware;
pub mod predict;

/// NaN-rejecting numeric guards used by the validation paths.
mod num {
    pub(crate) fn positive(value: f64) -> bool {
        value.is_finite() && value > 0.0
    }

    pub(crate) fn non_negative(value: f64) -> bool {
        value.is_finite() && value >= 0.0
    }
}

pub use arch::{CnnArchitecture, LayerKind, LayerSpec, OpCounts};
pub use dataset::Dataset;
pub use evaluate::{evaluate, sweep_scale, sweep_threads, AccuracyReport, ArchModel, MeasuredRun};
pub use hardware::{ContentionProfile, ContentionSample, HardwareProfile, LinearFit};
pub use predict::{
    calibrate_operation_factor, predict_a, predict_b, ChunkMode, ModelParamsA, ModelParamsB,
    Prediction, Strategy, Workload,
};
