//! The bundled reference dataset: an Intel Xeon Phi 7120P hardware
//! profile and three CNN architectures (small, medium, large) with model
//! parameters and contention curves taken from the published study this
//! engine reproduces. Every constant carries a citation naming the
//! source table.
//!
//! Two presets exist. [`Dataset::reference`] carries the published
//! parameter tables verbatim. [`Dataset::reference_table_ix`] applies
//! one documented override: the published thread-scaling predictions for
//! the medium network are only reproducible with `prep_ops = 1e9`,
//! although the parameter table lists `1e10` (see the dataset notes).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::Serialize;

use crate::arch::{CnnArchitecture, LayerSpec};
use crate::evaluate::ArchModel;
use crate::hardware::{ContentionProfile, ContentionSample, HardwareProfile};
use crate::predict::{ModelParamsA, ModelParamsB};

/// Default workload for one architecture: image counts and epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct WorkloadDefaults {
    pub images: u64,
    pub test_images: u64,
    pub epochs: u32,
}

/// Reference per-image operation totals, by layer type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct OpTypeTotals {
    pub max_pooling: u64,
    pub fully_connected: u64,
    pub convolution: u64,
    pub total: u64,
}

/// Published per-image operation totals for one architecture. These are
/// the authoritative constants behind the strategy-(a) parameters; the
/// counting engine in [`crate::arch`] serves user-defined architectures
/// and its totals for the reconstructed layer lists differ (see the
/// dataset notes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ReferenceOps {
    pub fprop: OpTypeTotals,
    pub bprop: OpTypeTotals,
}

/// One bundled architecture: model inputs, defaults, a reconstructed
/// layer list (absent for user-supplied entries that only predict) and
/// the published operation totals.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct DatasetEntry {
    pub model: ArchModel,
    pub architecture: Option<CnnArchitecture>,
    pub defaults: WorkloadDefaults,
    pub reference_ops: Option<ReferenceOps>,
}

/// A constant with the citation that sources it.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Citation {
    pub constant: String,
    pub value: String,
    pub source: String,
}

/// A hardware profile plus per-architecture model inputs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Dataset {
    pub hardware: HardwareProfile,
    pub entries: Vec<DatasetEntry>,
    pub notes: Vec<String>,
}

const CONTENTION_THREADS: [u32; 11] = [1, 15, 30, 60, 120, 180, 240, 480, 960, 1920, 3840];
const MEASURED_ROWS: usize = 7;

const CONTENTION_SMALL: [f64; 11] = [
    7.10e-6, 6.40e-4, 1.36e-3, 3.07e-3, 6.76e-3, 9.95e-3, 1.40e-2, 2.78e-2, 5.60e-2, 1.12e-1,
    2.25e-1,
];
const CONTENTION_MEDIUM: [f64; 11] = [
    1.56e-4, 2.00e-3, 3.97e-3, 8.03e-3, 1.65e-2, 2.50e-2, 3.83e-2, 7.31e-2, 1.47e-1, 2.95e-1,
    5.91e-1,
];
const CONTENTION_LARGE: [f64; 11] = [
    8.83e-4, 8.75e-3, 1.67e-2, 3.22e-2, 6.74e-2, 1.00e-1, 1.38e-1, 2.73e-1, 5.46e-1, 1.09, 2.19,
];

fn contention_profile(architecture: &str, values: &[f64; 11]) -> ContentionProfile {
    let samples = CONTENTION_THREADS
        .iter()
        .zip(values.iter())
        .enumerate()
        .map(|(i, (&threads, &seconds))| ContentionSample {
            threads,
            seconds,
            measured: i < MEASURED_ROWS,
        })
        .collect();
    ContentionProfile {
        architecture: architecture.to_string(),
        samples,
    }
}

fn xeon_phi_7120p() -> HardwareProfile {
    HardwareProfile {
        name: "xeon-phi-7120p".to_string(),
        clock_speed_hz: 1.238e9,
        cores: 60,
        max_threads_per_core: 4,
        cpi_schedule: vec![1.0, 1.0, 1.5, 2.0],
    }
}

/// Reconstructed small CNN. The published description fixes the input
/// (841 neurons on a 29x29 grid), the first convolutional layer (5 maps
/// of 26x26, 4x4 kernel, 85 weights) and the 10-neuron output; the rest
/// is a best-effort reconstruction in the same style.
pub fn small_cnn() -> CnnArchitecture {
    CnnArchitecture {
        name: "small".to_string(),
        layers: vec![
            LayerSpec::input(1, 29, 29),
            LayerSpec::convolutional(5, 26, 26, 4, 4, 1),
            LayerSpec::max_pooling(5, 13, 13, 2),
            LayerSpec::fully_connected(50, 5),
            LayerSpec::output(10, 50),
        ],
    }
}

/// Reconstructed medium CNN: same fixed boundary layers, with the first
/// convolutional layer widened to 20 maps (340 weights) as published.
pub fn medium_cnn() -> CnnArchitecture {
    CnnArchitecture {
        name: "medium".to_string(),
        layers: vec![
            LayerSpec::input(1, 29, 29),
            LayerSpec::convolutional(20, 26, 26, 4, 4, 1),
            LayerSpec::max_pooling(20, 13, 13, 2),
            LayerSpec::convolutional(40, 9, 9, 5, 5, 20),
            LayerSpec::max_pooling(40, 3, 3, 3),
            LayerSpec::fully_connected(150, 40),
            LayerSpec::output(10, 150),
        ],
    }
}

/// Reconstructed large CNN. The published description fixes the last
/// convolutional layer: 100 maps of 6x6 with a 6x6 kernel over 60
/// previous maps, 216,100 weights.
pub fn large_cnn() -> CnnArchitecture {
    CnnArchitecture {
        name: "large".to_string(),
        layers: vec![
            LayerSpec::input(1, 29, 29),
            LayerSpec::convolutional(60, 22, 22, 8, 8, 1),
            LayerSpec::max_pooling(60, 11, 11, 2),
            LayerSpec::convolutional(100, 6, 6, 6, 6, 60),
            LayerSpec::max_pooling(100, 3, 3, 2),
            LayerSpec::fully_connected(150, 100),
            LayerSpec::output(10, 150),
        ],
    }
}

struct EntrySpec {
    name: &'static str,
    prep_ops: f64,
    fprop_ops: f64,
    bprop_ops: f64,
    operation_factor: f64,
    prep_s: f64,
    fprop_ms: f64,
    bprop_ms: f64,
    epochs: u32,
    fprop_components: [u64; 3],
    bprop_components: [u64; 3],
}

const ENTRIES: [EntrySpec; 3] = [
    EntrySpec {
        name: "small",
        prep_ops: 1e9,
        fprop_ops: 58_000.0,
        bprop_ops: 524_000.0,
        operation_factor: 15.0,
        prep_s: 12.56,
        fprop_ms: 1.45,
        bprop_ms: 5.3,
        epochs: 70,
        fprop_components: [7_000, 5_000, 46_000],
        bprop_components: [2_000, 10_000, 512_000],
    },
    EntrySpec {
        name: "medium",
        prep_ops: 1e10,
        fprop_ops: 559_000.0,
        bprop_ops: 6_119_000.0,
        operation_factor: 15.0,
        prep_s: 12.7,
        fprop_ms: 12.55,
        bprop_ms: 69.73,
        epochs: 70,
        fprop_components: [29_000, 56_000, 474_000],
        bprop_components: [4_000, 112_000, 6_003_000],
    },
    EntrySpec {
        name: "large",
        prep_ops: 1e11,
        fprop_ops: 5_349_000.0,
        bprop_ops: 73_178_000.0,
        operation_factor: 15.0,
        prep_s: 13.5,
        fprop_ms: 148.88,
        bprop_ms: 859.19,
        epochs: 15,
        fprop_components: [99_000, 137_000, 5_113_000],
        bprop_components: [8_000, 274_000, 72_896_000],
    },
];

/// Override applied by the `paper-tableIX` preset: the medium column of
/// the published thread-scaling table is only reproducible with this
/// preparation count.
pub const MEDIUM_PREP_OPS_TABLE_IX: f64 = 1e9;

impl Dataset {
    /// The bundled dataset with the published parameter tables verbatim.
    pub fn reference() -> Dataset {
        let contention = [
            ("small", &CONTENTION_SMALL),
            ("medium", &CONTENTION_MEDIUM),
            ("large", &CONTENTION_LARGE),
        ];
        let architectures = [small_cnn(), medium_cnn(), large_cnn()];
        let entries = ENTRIES
            .iter()
            .zip(contention.iter())
            .zip(architectures)
            .map(|((spec, (arch_name, values)), architecture)| {
                debug_assert_eq!(spec.name, *arch_name);
                let [pool_f, fc_f, conv_f] = spec.fprop_components;
                let [pool_b, fc_b, conv_b] = spec.bprop_components;
                DatasetEntry {
                    model: ArchModel {
                        name: spec.name.to_string(),
                        params_a: ModelParamsA {
                            prep_ops: spec.prep_ops,
                            fprop_ops: spec.fprop_ops,
                            bprop_ops: spec.bprop_ops,
                            operation_factor: spec.operation_factor,
                        },
                        params_b: ModelParamsB {
                            prep_s: spec.prep_s,
                            fprop_s: spec.fprop_ms * 1e-3,
                            bprop_s: spec.bprop_ms * 1e-3,
                        },
                        contention: contention_profile(spec.name, values),
                    },
                    architecture: Some(architecture),
                    defaults: WorkloadDefaults {
                        images: 60_000,
                        test_images: 10_000,
                        epochs: spec.epochs,
                    },
                    reference_ops: Some(ReferenceOps {
                        fprop: OpTypeTotals {
                            max_pooling: pool_f,
                            fully_connected: fc_f,
                            convolution: conv_f,
                            total: pool_f + fc_f + conv_f,
                        },
                        bprop: OpTypeTotals {
                            max_pooling: pool_b,
                            fully_connected: fc_b,
                            convolution: conv_b,
                            total: pool_b + fc_b + conv_b,
                        },
                    }),
                }
            })
            .collect();
        Dataset {
            hardware: xeon_phi_7120p(),
            entries,
            notes: notes(),
        }
    }

    /// The bundled dataset with the medium `prep_ops` override that
    /// reproduces the published thread-scaling predictions.
    pub fn reference_table_ix() -> Dataset {
        let mut data = Dataset::reference();
        for entry in &mut data.entries {
            if entry.model.name == "medium" {
                entry.model.params_a.prep_ops = MEDIUM_PREP_OPS_TABLE_IX;
            }
        }
        data.notes.push(
            "This dataset variant applies the medium prep_ops = 1e9 override (preset paper-tableIX)."
                .to_string(),
        );
        data
    }

    pub fn entry(&self, name: &str) -> Option<&DatasetEntry> {
        self.entries.iter().find(|e| e.model.name == name)
    }

    /// Clone the per-architecture model inputs, e.g. for [`crate::evaluate::evaluate`].
    pub fn arch_models(&self) -> Vec<ArchModel> {
        self.entries.iter().map(|e| e.model.clone()).collect()
    }

    /// Every bundled constant with the citation that sources it.
    pub fn citations(&self) -> Vec<Citation> {
        let mut rows = Vec::new();
        let mut push = |constant: String, value: String, source: &str| {
            rows.push(Citation {
                constant,
                value,
                source: source.to_string(),
            });
        };
        push(
            "hardware.clock_speed_hz".to_string(),
            format!("{:e}", self.hardware.clock_speed_hz),
            "Table III: s = 1.238 GHz",
        );
        push(
            "hardware.cores x max_threads_per_core".to_string(),
            format!(
                "{} x {}",
                self.hardware.cores, self.hardware.max_threads_per_core
            ),
            "Table III: max processing units 244 (240 used for prediction)",
        );
        push(
            "hardware.cpi_schedule".to_string(),
            format!("{:?}", self.hardware.cpi_schedule),
            "Table III: CPI = 1 for 1-2 threads/core, 1.5 for 3, 2 for 4",
        );
        for entry in &self.entries {
            let name = &entry.model.name;
            push(
                format!("{name}.params_a.prep_ops"),
                format!("{:e}", entry.model.params_a.prep_ops),
                "Table II: Prep (1e9 / 1e10 / 1e11)",
            );
            push(
                format!("{name}.params_a.fprop_ops"),
                format!("{}", entry.model.params_a.fprop_ops),
                "Table VII: FProp total",
            );
            push(
                format!("{name}.params_a.bprop_ops"),
                format!("{}", entry.model.params_a.bprop_ops),
                "Table VIII: BProp total",
            );
            push(
                format!("{name}.params_a.operation_factor"),
                format!("{}", entry.model.params_a.operation_factor),
                "Table III: OperationFactor (calibrated at 15 threads)",
            );
            push(
                format!("{name}.params_b.prep_s"),
                format!("{}", entry.model.params_b.prep_s),
                "Table III: T_Prep",
            );
            push(
                format!("{name}.params_b.fprop_s"),
                format!("{}", entry.model.params_b.fprop_s),
                "Table III: T_Fprop (converted from ms)",
            );
            push(
                format!("{name}.params_b.bprop_s"),
                format!("{}", entry.model.params_b.bprop_s),
                "Table III: T_Bprop (converted from ms)",
            );
            push(
                format!("{name}.defaults"),
                format!(
                    "i={} it={} ep={}",
                    entry.defaults.images, entry.defaults.test_images, entry.defaults.epochs
                ),
                "Table II: Images / Epochs",
            );
            for sample in &entry.model.contention.samples {
                push(
                    format!("{name}.contention[{}]", sample.threads),
                    format!("{:e}", sample.seconds),
                    if sample.measured {
                        "Table IV: measured memory contention"
                    } else {
                        "Table IV: predicted memory contention (starred rows)"
                    },
                );
            }
            if let Some(ops) = &entry.reference_ops {
                push(
                    format!("{name}.reference_ops.fprop"),
                    format!(
                        "pool={} fc={} conv={} total={}",
                        ops.fprop.max_pooling,
                        ops.fprop.fully_connected,
                        ops.fprop.convolution,
                        ops.fprop.total
                    ),
                    "Table VII: per-type FProp operations",
                );
                push(
                    format!("{name}.reference_ops.bprop"),
                    format!(
                        "pool={} fc={} conv={} total={}",
                        ops.bprop.max_pooling,
                        ops.bprop.fully_connected,
                        ops.bprop.convolution,
                        ops.bprop.total
                    ),
                    "Table VIII: per-type BProp operations",
                );
            }
        }
        rows
    }
}

fn notes() -> Vec<String> {
    vec![
        "Table II lists prep_ops = 1e10 for the medium network, but the published \
         thread-scaling predictions (Table IX, medium, strategy a) are only reproducible \
         with 1e9; with 1e10 every row comes out about 1.8 minutes high. The preset \
         paper-tableIX applies the 1e9 override; the plain preset keeps the table value."
            .to_string(),
        "Contention rows above 240 threads (Table IV starred rows) are fitted predictions, \
         not measurements. They are bundled as profile samples tagged as predicted so that \
         lookups reproduce the table exactly; least-squares fits use only the measured rows."
            .to_string(),
        "The bundled layer lists are reconstructions: the published figures fix the input \
         and output layers and one convolutional layer per architecture, and the \
         reconstructions reproduce those exactly. The published operation totals (Tables \
         VII-VIII) do not state their counting rules and cannot be derived from the \
         reconstructed layers; they are bundled as authoritative constants, while the \
         counting engine serves user-defined architectures with documented formulas."
            .to_string(),
        "The extrapolation mechanism behind the starred contention rows is not stated; \
         ordinary least squares with intercept over the seven measured rows reproduces all \
         twelve starred values within 2% and is adopted here."
            .to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_loads_and_validates() {
        let data = Dataset::reference();
        data.hardware.validate().unwrap();
        assert_eq!(data.entries.len(), 3);
        for entry in &data.entries {
            entry.model.params_a.validate().unwrap();
            entry.model.params_b.validate().unwrap();
            entry.model.contention.validate().unwrap();
            let architecture = entry.architecture.as_ref().unwrap();
            architecture.validate().unwrap();
            assert_eq!(entry.model.name, architecture.name);
            assert_eq!(entry.model.name, entry.model.contention.architecture);
            let measured = entry
                .model
                .contention
                .samples
                .iter()
                .filter(|s| s.measured)
                .count();
            assert_eq!(measured, 7);
            assert_eq!(entry.model.contention.samples.len(), 11);
        }
        assert!(!data.notes.is_empty());
    }

    #[test]
    fn table_ix_preset_overrides_medium_prep() {
        let data = Dataset::reference_table_ix();
        assert_eq!(data.entry("medium").unwrap().model.params_a.prep_ops, 1e9);
        assert_eq!(data.entry("small").unwrap().model.params_a.prep_ops, 1e9);
        assert_eq!(data.entry("large").unwrap().model.params_a.prep_ops, 1e11);
    }

    #[test]
    fn reference_op_components_sum_to_totals() {
        let data = Dataset::reference();
        for entry in &data.entries {
            let ops = entry.reference_ops.as_ref().unwrap();
            assert_eq!(
                ops.fprop.total,
                ops.fprop.max_pooling + ops.fprop.fully_connected + ops.fprop.convolution
            );
            assert_eq!(
                ops.bprop.total,
                ops.bprop.max_pooling + ops.bprop.fully_connected + ops.bprop.convolution
            );
            assert_eq!(ops.fprop.total as f64, entry.model.params_a.fprop_ops);
            assert_eq!(ops.bprop.total as f64, entry.model.params_a.bprop_ops);
        }
    }

    #[test]
    fn reconstructions_reproduce_published_layer_figures() {
        let small = small_cnn().layer_stats().unwrap();
        assert_eq!(small[0].neurons, 841);
        assert_eq!(small[1].neurons, 3380);
        assert_eq!(small[1].weights, 85);

        let medium = medium_cnn().layer_stats().unwrap();
        assert_eq!(medium[1].neurons, 13_520);
        assert_eq!(medium[1].weights, 340);

        let large = large_cnn().layer_stats().unwrap();
        assert_eq!(large[3].neurons, 3600);
        assert_eq!(large[3].weights, 216_100);
        let output = large.last().unwrap();
        assert_eq!(output.neurons, 10);
    }

    #[test]
    fn every_constant_has_a_citation() {
        let data = Dataset::reference();
        let citations = data.citations();
        assert!(citations.len() > 40);
        for c in &citations {
            assert!(!c.source.is_empty());
            assert!(c.source.contains("Table"), "{}", c.source);
        }
    }

    /// Diagnostic only: how the counting engine's totals for the
    /// reconstructed layer lists compare with the published totals. The
    /// published counting rules are unknown, so this prints the gap
    /// rather than asserting on it.
    #[test]
    fn diagnostic_engine_totals_vs_reference_totals() {
        let data = Dataset::reference();
        for entry in &data.entries {
            let ops = entry.architecture.as_ref().unwrap().count_ops().unwrap();
            let reference = entry.reference_ops.as_ref().unwrap();
            std::println!(
                "{}: engine fprop {} vs reference {} (x{:.2}); engine bprop {} vs reference {} (x{:.2})",
                entry.model.name,
                ops.fprop_ops,
                reference.fprop.total,
                ops.fprop_ops as f64 / reference.fprop.total as f64,
                ops.bprop_ops,
                reference.bprop.total,
                ops.bprop_ops as f64 / reference.bprop.total as f64,
            );
        }
    }
}
