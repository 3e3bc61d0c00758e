//! Implementations of the CLI commands, each producing a
//! [`CommandOutput`] for the shared renderer.

use serde::Serialize;
use serde_json::json;

use traincast_core::dataset::{Dataset, DatasetEntry};
use traincast_core::evaluate::{evaluate, round_tenth, sweep_scale, sweep_threads, MeasuredRun};
use traincast_core::predict::{
    calibrate_operation_factor, predict_a_chunked, predict_b_chunked, ChunkMode, ModelParamsA,
    ModelParamsB, PredictError, Prediction, Strategy, Workload,
};

use crate::config;
use crate::error::AppError;
use crate::output::{fmt_contention, fmt_minutes, fmt_seconds, CommandOutput};

fn lookup<'a>(dataset: &'a Dataset, arch: &str) -> Result<&'a DatasetEntry, AppError> {
    dataset.entry(arch).ok_or_else(|| {
        let known: Vec<&str> = dataset
            .entries
            .iter()
            .map(|e| e.model.name.as_str())
            .collect();
        AppError::validation(format!(
            "unknown architecture '{arch}' for --arch; available: {}",
            known.join(", ")
        ))
    })
}

/// Rephrase workload validation errors in terms of the flags that set
/// the offending fields.
fn flag_for_field(err: PredictError) -> AppError {
    if let PredictError::InvalidWorkload { field } = err {
        let flag = match field {
            "images" => "--i",
            "test_images" => "--it",
            "epochs" => "--ep",
            "threads" => "--p",
            "network_instances" => "--ns",
            _ => return AppError::validation(err.to_string()),
        };
        return AppError::validation(format!("invalid value for {flag}: must be at least 1"));
    }
    AppError::Validation(err.to_string())
}

pub struct WorkloadOverrides {
    pub images: Option<u64>,
    pub test_images: Option<u64>,
    pub epochs: Option<u32>,
}

impl WorkloadOverrides {
    fn apply(&self, entry: &DatasetEntry, arch: &str, threads: u32) -> Workload {
        let mut w = Workload::new(
            arch,
            self.images.unwrap_or(entry.defaults.images),
            self.test_images.unwrap_or(entry.defaults.test_images),
            self.epochs.unwrap_or(entry.defaults.epochs),
            threads,
        );
        w.network_instances = threads;
        w
    }
}

pub struct ParamOverridesA {
    pub prep_ops: Option<f64>,
    pub fprop_ops: Option<f64>,
    pub bprop_ops: Option<f64>,
    pub operation_factor: Option<f64>,
}

impl ParamOverridesA {
    fn apply(&self, base: ModelParamsA) -> ModelParamsA {
        ModelParamsA {
            prep_ops: self.prep_ops.unwrap_or(base.prep_ops),
            fprop_ops: self.fprop_ops.unwrap_or(base.fprop_ops),
            bprop_ops: self.bprop_ops.unwrap_or(base.bprop_ops),
            operation_factor: self.operation_factor.unwrap_or(base.operation_factor),
        }
    }

    fn any(&self) -> Option<&'static str> {
        if self.prep_ops.is_some() {
            Some("--prep-ops")
        } else if self.fprop_ops.is_some() {
            Some("--fprop-ops")
        } else if self.bprop_ops.is_some() {
            Some("--bprop-ops")
        } else if self.operation_factor.is_some() {
            Some("--operation-factor")
        } else {
            None
        }
    }
}

pub struct ParamOverridesB {
    pub prep_s: Option<f64>,
    pub fprop_s: Option<f64>,
    pub bprop_s: Option<f64>,
}

impl ParamOverridesB {
    fn apply(&self, base: ModelParamsB) -> ModelParamsB {
        ModelParamsB {
            prep_s: self.prep_s.unwrap_or(base.prep_s),
            fprop_s: self.fprop_s.unwrap_or(base.fprop_s),
            bprop_s: self.bprop_s.unwrap_or(base.bprop_s),
        }
    }

    fn any(&self) -> Option<&'static str> {
        if self.prep_s.is_some() {
            Some("--prep-s")
        } else if self.fprop_s.is_some() {
            Some("--fprop-s")
        } else if self.bprop_s.is_some() {
            Some("--bprop-s")
        } else {
            None
        }
    }
}

#[derive(Serialize)]
struct PredictReport {
    architecture: String,
    strategy: String,
    workload: Workload,
    prediction: Prediction,
    total_minutes: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_predict(
    dataset: &Dataset,
    strategy: Strategy,
    arch: &str,
    threads: u32,
    ns: Option<u32>,
    chunk: ChunkMode,
    workload_overrides: &WorkloadOverrides,
    a_overrides: &ParamOverridesA,
    b_overrides: &ParamOverridesB,
) -> Result<CommandOutput, AppError> {
    let entry = lookup(dataset, arch)?;
    match strategy {
        Strategy::A => {
            if let Some(flag) = b_overrides.any() {
                return Err(AppError::validation(format!(
                    "{flag} applies to strategy b, but --strategy a was selected"
                )));
            }
        }
        Strategy::B => {
            if let Some(flag) = a_overrides.any() {
                return Err(AppError::validation(format!(
                    "{flag} applies to strategy a, but --strategy b was selected"
                )));
            }
        }
    }
    let mut workload = workload_overrides.apply(entry, arch, threads);
    if let Some(ns) = ns {
        workload.network_instances = ns;
    }
    let prediction = match strategy {
        Strategy::A => predict_a_chunked(
            &workload,
            &a_overrides.apply(entry.model.params_a),
            &dataset.hardware,
            &entry.model.contention,
            chunk,
        ),
        Strategy::B => predict_b_chunked(
            &workload,
            &b_overrides.apply(entry.model.params_b),
            &dataset.hardware,
            &entry.model.contention,
            chunk,
        ),
    }
    .map_err(flag_for_field)?;

    let report = PredictReport {
        architecture: arch.to_string(),
        strategy: strategy.to_string(),
        workload: workload.clone(),
        prediction,
        total_minutes: round_tenth(prediction.minutes()),
    };
    let mut output = CommandOutput::new(
        vec!["quantity", "value"],
        serde_json::to_value(&report).expect("serializable"),
    );
    let rows: Vec<(&str, String)> = vec![
        ("architecture", arch.to_string()),
        ("strategy", strategy.to_string()),
        ("threads", workload.threads.to_string()),
        ("network_instances", workload.network_instances.to_string()),
        ("images", workload.images.to_string()),
        ("test_images", workload.test_images.to_string()),
        ("epochs", workload.epochs.to_string()),
        ("cpi", format!("{:.3}", prediction.cpi_used)),
        ("contention_s", fmt_contention(prediction.contention_used)),
        ("total_s", fmt_seconds(prediction.total_s)),
        ("total_min", fmt_minutes(prediction.minutes())),
        ("prep_s", fmt_seconds(prediction.breakdown.prep_s)),
        ("train_s", fmt_seconds(prediction.breakdown.train_s)),
        ("validate_s", fmt_seconds(prediction.breakdown.validate_s)),
        ("test_s", fmt_seconds(prediction.breakdown.test_s)),
        ("mem_s", fmt_seconds(prediction.breakdown.mem_s)),
    ];
    output.rows = rows
        .into_iter()
        .map(|(k, v)| vec![k.to_string(), v])
        .collect();
    Ok(output)
}

#[derive(Serialize)]
struct SweepRowOut {
    arch: String,
    threads: u32,
    seconds_a: f64,
    minutes_a: f64,
    seconds_b: f64,
    minutes_b: f64,
}

pub fn cmd_sweep(
    dataset: &Dataset,
    thread_counts: &[u32],
    archs: &[String],
    workload_overrides: &WorkloadOverrides,
) -> Result<CommandOutput, AppError> {
    let arch_names: Vec<String> = if archs.is_empty() {
        dataset
            .entries
            .iter()
            .map(|e| e.model.name.clone())
            .collect()
    } else {
        archs.to_vec()
    };
    let mut rows_out = Vec::new();
    for arch in &arch_names {
        let entry = lookup(dataset, arch)?;
        let template = workload_overrides.apply(entry, arch, 1);
        let rows = sweep_threads(
            thread_counts,
            &template,
            &entry.model.params_a,
            &entry.model.params_b,
            &dataset.hardware,
            &entry.model.contention,
        )?;
        for row in rows {
            rows_out.push(SweepRowOut {
                arch: arch.clone(),
                threads: row.threads,
                seconds_a: row.seconds_a,
                minutes_a: row.minutes_a,
                seconds_b: row.seconds_b,
                minutes_b: row.minutes_b,
            });
        }
    }
    let mut output = CommandOutput::new(
        vec![
            "arch",
            "p",
            "seconds_a",
            "minutes_a",
            "seconds_b",
            "minutes_b",
        ],
        serde_json::to_value(&rows_out).expect("serializable"),
    );
    output.rows = rows_out
        .iter()
        .map(|r| {
            vec![
                r.arch.clone(),
                r.threads.to_string(),
                fmt_seconds(r.seconds_a),
                format!("{:.1}", r.minutes_a),
                fmt_seconds(r.seconds_b),
                format!("{:.1}", r.minutes_b),
            ]
        })
        .collect();
    Ok(output)
}

pub fn cmd_scale_grid(
    dataset: &Dataset,
    arch: &str,
    image_grid: &[(u64, u64)],
    epoch_grid: &[u32],
    thread_counts: &[u32],
) -> Result<CommandOutput, AppError> {
    let entry = lookup(dataset, arch)?;
    let template = Workload::new(arch, 1, 1, 1, 1);
    let cells = sweep_scale(
        image_grid,
        epoch_grid,
        thread_counts,
        &template,
        &entry.model.params_a,
        &dataset.hardware,
        &entry.model.contention,
    )?;
    let mut output = CommandOutput::new(
        vec!["i", "it", "ep", "p", "seconds", "minutes"],
        serde_json::to_value(&cells).expect("serializable"),
    );
    output.preamble = vec![format!("architecture: {arch} (strategy a)")];
    output.rows = cells
        .iter()
        .map(|c| {
            vec![
                c.images.to_string(),
                c.test_images.to_string(),
                c.epochs.to_string(),
                c.threads.to_string(),
                fmt_seconds(c.seconds),
                format!("{:.1}", c.minutes),
            ]
        })
        .collect();
    Ok(output)
}

#[derive(Serialize)]
struct FitRowOut {
    p: u32,
    contention_seconds: f64,
    source: &'static str,
}

pub fn cmd_fit_contention(
    dataset: &Dataset,
    arch: &str,
    predict_at: &[u32],
    fit_range: Option<u32>,
) -> Result<CommandOutput, AppError> {
    let entry = lookup(dataset, arch)?;
    let measured = entry.model.contention.measured_only();
    if measured.samples.is_empty() {
        return Err(AppError::validation(format!(
            "architecture '{arch}' has no measured contention samples"
        )));
    }
    let fit = measured.fit(fit_range)?;
    let max_measured = measured.samples.last().map(|s| s.threads).unwrap_or(0);

    let mut rows_out = Vec::new();
    for &p in predict_at {
        if p == 0 {
            return Err(AppError::validation(
                "invalid value for --predict: must be at least 1",
            ));
        }
        let (value, source) = if measured.samples.iter().any(|s| s.threads == p) {
            (measured.contention_at(p)?, "measured")
        } else if p < max_measured {
            (measured.contention_at(p)?, "interpolated")
        } else {
            (fit.eval(p).max(0.0), "extrapolated")
        };
        rows_out.push(FitRowOut {
            p,
            contention_seconds: value,
            source,
        });
    }

    let json = json!({
        "architecture": arch,
        "fit": { "slope": fit.slope, "intercept": fit.intercept },
        "measured_samples": measured.samples.len(),
        "rows": rows_out,
    });
    let mut output = CommandOutput::new(vec!["p", "contention_seconds", "source"], json);
    output.preamble = vec![
        format!("architecture: {arch}"),
        format!(
            "fit: slope {} s/thread, intercept {} s ({} measured samples{})",
            fmt_contention(fit.slope),
            fmt_contention(fit.intercept),
            measured
                .samples
                .iter()
                .filter(|s| fit_range.is_none_or(|b| s.threads <= b))
                .count(),
            match fit_range {
                Some(bound) => format!(", p <= {bound}"),
                None => String::new(),
            }
        ),
    ];
    output.rows = rows_out
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                fmt_contention(r.contention_seconds),
                r.source.to_string(),
            ]
        })
        .collect();
    Ok(output)
}

pub fn cmd_count_ops(
    dataset: &Dataset,
    arch: Option<&str>,
    file: Option<&std::path::Path>,
) -> Result<CommandOutput, AppError> {
    let (architecture, reference) = match (arch, file) {
        (Some(name), None) => {
            let entry = lookup(dataset, name)?;
            let architecture = entry.architecture.clone().ok_or_else(|| {
                AppError::validation(format!("architecture '{name}' has no layer list"))
            })?;
            (architecture, entry.reference_ops)
        }
        (None, Some(path)) => (config::load_architecture(path)?, None),
        _ => {
            return Err(AppError::validation(
                "count-ops needs exactly one of --arch or --file",
            ))
        }
    };
    let stats = architecture.layer_stats()?;
    let ops = architecture.count_ops()?;

    let json = json!({
        "architecture": architecture.name,
        "layers": stats.iter().zip(&ops.per_layer).map(|(s, o)| json!({
            "index": s.index,
            "kind": s.kind.label(),
            "maps": s.maps,
            "neurons": s.neurons,
            "weights": s.weights,
            "fprop_ops": o.fprop,
            "bprop_ops": o.bprop,
        })).collect::<Vec<_>>(),
        "totals": {
            "neurons": architecture.total_neurons(),
            "weights": architecture.total_weights(),
            "fprop_ops": ops.fprop_ops,
            "bprop_ops": ops.bprop_ops,
        },
    });
    let mut output = CommandOutput::new(
        vec![
            "index",
            "kind",
            "maps",
            "neurons",
            "weights",
            "fprop_ops",
            "bprop_ops",
        ],
        json,
    );
    output.preamble = vec![format!("architecture: {}", architecture.name)];
    output.rows = stats
        .iter()
        .zip(&ops.per_layer)
        .map(|(s, o)| {
            vec![
                s.index.to_string(),
                s.kind.label().to_string(),
                s.maps.to_string(),
                s.neurons.to_string(),
                s.weights.to_string(),
                o.fprop.to_string(),
                o.bprop.to_string(),
            ]
        })
        .collect();
    output.postscript = vec![format!(
        "totals: {} neurons, {} weights, {} fprop ops, {} bprop ops per image",
        architecture.total_neurons(),
        architecture.total_weights(),
        ops.fprop_ops,
        ops.bprop_ops
    )];
    if let Some(reference) = reference {
        output.postscript.push(format!(
            "bundled reference totals: {} fprop, {} bprop; the engine counts the reconstructed \
             layers with documented formulas, so totals differ (x{:.2} / x{:.2})",
            reference.fprop.total,
            reference.bprop.total,
            ops.fprop_ops as f64 / reference.fprop.total as f64,
            ops.bprop_ops as f64 / reference.bprop.total as f64,
        ));
    }
    Ok(output)
}

pub fn cmd_validate(
    dataset: &Dataset,
    strategy: Strategy,
    runs: &[MeasuredRun],
) -> Result<CommandOutput, AppError> {
    let models = dataset.arch_models();
    let report = evaluate(runs, strategy, &models, &dataset.hardware)?;
    let mut output = CommandOutput::new(
        vec!["arch", "p", "measured_s", "predicted_s", "delta_percent"],
        serde_json::to_value(&report).expect("serializable"),
    );
    output.preamble = vec![format!(
        "strategy: {strategy}; {} run(s)",
        report.rows.len()
    )];
    output.rows = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.architecture.clone(),
                r.threads.to_string(),
                fmt_seconds(r.measured_s),
                fmt_seconds(r.predicted_s),
                format!("{:.2}", r.delta_percent),
            ]
        })
        .collect();
    output.postscript = vec![format!(
        "average delta: {:.2}%",
        report.average_delta_percent
    )];
    Ok(output)
}

/// Back-solve the strategy-(a) operation factor from one measured total.
pub fn cmd_calibrate(
    dataset: &Dataset,
    arch: &str,
    threads: u32,
    measured_s: f64,
    workload_overrides: &WorkloadOverrides,
) -> Result<CommandOutput, AppError> {
    let entry = lookup(dataset, arch)?;
    let workload = workload_overrides.apply(entry, arch, threads);
    let factor = calibrate_operation_factor(
        measured_s,
        &workload,
        &entry.model.params_a,
        &dataset.hardware,
        &entry.model.contention,
    )
    .map_err(flag_for_field)?;
    let json = json!({
        "architecture": arch,
        "workload": workload,
        "measured_s": measured_s,
        "operation_factor": factor,
        "bundled_operation_factor": entry.model.params_a.operation_factor,
    });
    let mut output = CommandOutput::new(vec!["quantity", "value"], json);
    output.rows = vec![
        vec!["architecture".to_string(), arch.to_string()],
        vec!["threads".to_string(), threads.to_string()],
        vec!["measured_s".to_string(), fmt_seconds(measured_s)],
        vec!["operation_factor".to_string(), format!("{factor:.6}")],
        vec![
            "bundled_operation_factor".to_string(),
            format!("{}", entry.model.params_a.operation_factor),
        ],
    ];
    Ok(output)
}

pub fn cmd_dataset(dataset: &Dataset) -> Result<(CommandOutput, String), AppError> {
    let citations = dataset.citations();
    let mut output = CommandOutput::new(
        vec!["constant", "value", "source"],
        serde_json::to_value(dataset).expect("serializable"),
    );
    output.preamble = vec![format!("hardware profile: {}", dataset.hardware.name)];
    output.rows = citations
        .iter()
        .map(|c| vec![c.constant.clone(), c.value.clone(), c.source.clone()])
        .collect();
    output.postscript = dataset.notes.iter().map(|n| format!("note: {n}")).collect();

    let config = config::dataset_to_config(dataset);
    let toml_payload = toml::to_string_pretty(&config)
        .map_err(|e| AppError::validation(format!("cannot serialize dataset: {e}")))?;
    Ok((output, toml_payload))
}
