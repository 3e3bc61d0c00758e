//! Configuration ingestion: TOML dataset documents, standalone
//! architecture files, and measured-run CSVs.
//!
//! A dataset document can replace the bundled hardware profile and
//! replace or add architecture entries. The `dataset --format toml`
//! command emits the bundled dataset in exactly this schema, so a config
//! file can start as a copy of it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use traincast_core::arch::{CnnArchitecture, LayerKind, LayerSpec};
use traincast_core::dataset::{Dataset, DatasetEntry, WorkloadDefaults};
use traincast_core::evaluate::{ArchModel, MeasuredRun};
use traincast_core::hardware::{ContentionProfile, ContentionSample, HardwareProfile};
use traincast_core::predict::{ModelParamsA, ModelParamsB};

use crate::error::AppError;

/// The on-disk dataset schema.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<HardwareProfile>,
    #[serde(default)]
    pub architectures: Vec<ArchDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArchDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_a: Option<ModelParamsA>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_b: Option<ModelParamsB>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contention: Vec<ContentionSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WorkloadDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_images: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u32>,
}

/// A layer as written in a file; geometry fields default to 1 and the
/// previous-layer connectivity defaults by layer kind (input: 0,
/// convolutional: all previous maps, max-pooling: 1, dense layers: 0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LayerDoc {
    pub kind: LayerKind,
    pub maps: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connected_prev_maps: Option<u32>,
}

impl LayerDoc {
    pub fn from_spec(spec: &LayerSpec) -> Self {
        LayerDoc {
            kind: spec.kind,
            maps: spec.maps,
            map_height: Some(spec.map_height),
            map_width: Some(spec.map_width),
            kernel_height: Some(spec.kernel_height),
            kernel_width: Some(spec.kernel_width),
            connected_prev_maps: Some(spec.connected_prev_maps),
        }
    }
}

/// A standalone architecture document: a name and an ordered layer list.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArchFile {
    pub name: String,
    pub layers: Vec<LayerDoc>,
}

fn resolve_layers(name: &str, docs: &[LayerDoc]) -> Result<CnnArchitecture, AppError> {
    let mut layers = Vec::with_capacity(docs.len());
    let mut prev_maps = 0u32;
    for doc in docs {
        let connected = doc.connected_prev_maps.unwrap_or(match doc.kind {
            LayerKind::Input | LayerKind::FullyConnected | LayerKind::Output => 0,
            LayerKind::Convolutional => prev_maps,
            LayerKind::MaxPooling => 1,
        });
        layers.push(LayerSpec {
            kind: doc.kind,
            maps: doc.maps,
            map_height: doc.map_height.unwrap_or(1),
            map_width: doc.map_width.unwrap_or(1),
            kernel_height: doc.kernel_height.unwrap_or(1),
            kernel_width: doc.kernel_width.unwrap_or(1),
            connected_prev_maps: connected,
        });
        prev_maps = doc.maps;
    }
    let arch = CnnArchitecture {
        name: name.to_string(),
        layers,
    };
    arch.validate()
        .map_err(|e| AppError::validation(format!("architecture '{name}': {e}")))?;
    Ok(arch)
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::read(path, e))?;
    toml::from_str(&text).map_err(|e| AppError::validation(format!("{}: {e}", path.display())))
}

/// Load a preset dataset and merge an optional config document over it.
pub fn load_dataset(preset: &str, config: Option<&Path>) -> Result<Dataset, AppError> {
    let mut dataset = match preset {
        "paper" => Dataset::reference(),
        "paper-tableIX" => {
            eprintln!(
                "preset paper-tableIX: medium prep_ops overridden to 1e9 (see `traincast dataset` notes)"
            );
            Dataset::reference_table_ix()
        }
        other => {
            return Err(AppError::validation(format!(
                "unknown preset '{other}' for --preset; expected 'paper' or 'paper-tableIX'"
            )))
        }
    };
    if let Some(path) = config {
        let doc: ConfigDoc = read_toml(path)?;
        merge(&mut dataset, doc)?;
    }
    Ok(dataset)
}

fn merge(dataset: &mut Dataset, doc: ConfigDoc) -> Result<(), AppError> {
    if let Some(hardware) = doc.hardware {
        hardware.validate()?;
        dataset.hardware = hardware;
    }
    for arch in doc.architectures {
        let name = arch.name.clone();
        let architecture = if arch.layers.is_empty() {
            None
        } else {
            Some(resolve_layers(&name, &arch.layers)?)
        };
        let contention = if arch.contention.is_empty() {
            None
        } else {
            Some(ContentionProfile::new(
                name.clone(),
                arch.contention.clone(),
            )?)
        };
        if let Some(entry) = dataset.entries.iter_mut().find(|e| e.model.name == name) {
            if let Some(params) = arch.params_a {
                params.validate()?;
                entry.model.params_a = params;
            }
            if let Some(params) = arch.params_b {
                params.validate()?;
                entry.model.params_b = params;
            }
            if let Some(profile) = contention {
                entry.model.contention = profile;
            }
            if let Some(architecture) = architecture {
                entry.architecture = Some(architecture);
            }
            if let Some(w) = arch.workload {
                apply_workload(&mut entry.defaults, w);
            }
            // user-provided parameters supersede the bundled citations
            entry.reference_ops = None;
        } else {
            let params_a = arch.params_a.ok_or_else(|| {
                AppError::validation(format!("architecture '{name}': params_a is required"))
            })?;
            let params_b = arch.params_b.ok_or_else(|| {
                AppError::validation(format!("architecture '{name}': params_b is required"))
            })?;
            params_a.validate()?;
            params_b.validate()?;
            let contention = contention.ok_or_else(|| {
                AppError::validation(format!(
                    "architecture '{name}': at least one contention sample is required"
                ))
            })?;
            let mut defaults = WorkloadDefaults {
                images: 60_000,
                test_images: 10_000,
                epochs: 70,
            };
            if let Some(w) = arch.workload {
                apply_workload(&mut defaults, w);
            }
            dataset.entries.push(DatasetEntry {
                model: ArchModel {
                    name,
                    params_a,
                    params_b,
                    contention,
                },
                architecture,
                defaults,
                reference_ops: None,
            });
        }
    }
    Ok(())
}

fn apply_workload(defaults: &mut WorkloadDefaults, doc: WorkloadDoc) {
    if let Some(images) = doc.images {
        defaults.images = images;
    }
    if let Some(test_images) = doc.test_images {
        defaults.test_images = test_images;
    }
    if let Some(epochs) = doc.epochs {
        defaults.epochs = epochs;
    }
}

/// Load a standalone architecture file.
pub fn load_architecture(path: &Path) -> Result<CnnArchitecture, AppError> {
    let doc: ArchFile = read_toml(path)?;
    resolve_layers(&doc.name, &doc.layers)
}

/// Serialize a dataset in the config schema, so the output can be edited
/// and fed back through `--config`.
pub fn dataset_to_config(dataset: &Dataset) -> ConfigDoc {
    ConfigDoc {
        hardware: Some(dataset.hardware.clone()),
        architectures: dataset
            .entries
            .iter()
            .map(|entry| ArchDoc {
                name: entry.model.name.clone(),
                params_a: Some(entry.model.params_a),
                params_b: Some(entry.model.params_b),
                contention: entry.model.contention.samples.clone(),
                workload: Some(WorkloadDoc {
                    images: Some(entry.defaults.images),
                    test_images: Some(entry.defaults.test_images),
                    epochs: Some(entry.defaults.epochs),
                }),
                layers: entry
                    .architecture
                    .iter()
                    .flat_map(|a| a.layers.iter().map(LayerDoc::from_spec))
                    .collect(),
            })
            .collect(),
    }
}

pub const MEASURED_CSV_HEADER: &str = "arch,p,i,it,ep,measured_s";

/// Parse a measured-runs CSV (`arch,p,i,it,ep,measured_s`), reporting
/// the row and column of the first offending cell.
pub fn parse_measured_csv(path: &Path) -> Result<Vec<MeasuredRun>, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::read(path, e))?;
    let mut runs = Vec::new();
    let mut saw_header = false;
    for (line_index, line) in text.lines().enumerate() {
        let row = line_index + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            let normalized: Vec<&str> = line.split(',').map(str::trim).collect();
            if normalized != MEASURED_CSV_HEADER.split(',').collect::<Vec<_>>() {
                return Err(AppError::validation(format!(
                    "{}: row {row}: expected header '{MEASURED_CSV_HEADER}', got '{line}'",
                    path.display()
                )));
            }
            saw_header = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 6 {
            return Err(AppError::validation(format!(
                "{}: row {row}: expected 6 columns, got {}",
                path.display(),
                cells.len()
            )));
        }
        let bad_cell = |column: usize, name: &str| {
            AppError::validation(format!(
                "{}: row {row}, column {column} ({name}): invalid value '{}'",
                path.display(),
                cells[column - 1]
            ))
        };
        let architecture = cells[0].to_string();
        if architecture.is_empty() {
            return Err(bad_cell(1, "arch"));
        }
        let threads: u32 = cells[1].parse().map_err(|_| bad_cell(2, "p"))?;
        let images: u64 = cells[2].parse().map_err(|_| bad_cell(3, "i"))?;
        let test_images: u64 = cells[3].parse().map_err(|_| bad_cell(4, "it"))?;
        let epochs: u32 = cells[4].parse().map_err(|_| bad_cell(5, "ep"))?;
        let measured_s: f64 = cells[5].parse().map_err(|_| bad_cell(6, "measured_s"))?;
        runs.push(MeasuredRun {
            architecture,
            threads,
            images,
            test_images,
            epochs,
            measured_s,
        });
    }
    if !saw_header {
        return Err(AppError::validation(format!(
            "{}: empty file; expected header '{MEASURED_CSV_HEADER}'",
            path.display()
        )));
    }
    Ok(runs)
}
