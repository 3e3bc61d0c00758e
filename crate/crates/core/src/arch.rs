//! CNN architectures as ordered layer specifications, with per-layer
//! neuron/weight statistics and forward/backward operation counting.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// The layer types understood by the statistics and op-counting engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LayerKind {
    Input,
    Convolutional,
    MaxPooling,
    FullyConnected,
    Output,
}

impl LayerKind {
    pub fn label(&self) -> &'static str {
        match self {
            LayerKind::Input => "input",
            LayerKind::Convolutional => "convolutional",
            LayerKind::MaxPooling => "max_pooling",
            LayerKind::FullyConnected => "fully_connected",
            LayerKind::Output => "output",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One layer of a CNN: feature-map count and geometry, receptive-field
/// (kernel) geometry, and how many maps of the previous layer each map
/// connects to.
///
/// Fully-connected and output layers are expressed as `maps` neurons on a
/// 1x1 map with a 1x1 kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub maps: u32,
    pub map_height: u32,
    pub map_width: u32,
    pub kernel_height: u32,
    pub kernel_width: u32,
    pub connected_prev_maps: u32,
}

impl LayerSpec {
    pub fn input(maps: u32, map_height: u32, map_width: u32) -> Self {
        LayerSpec {
            kind: LayerKind::Input,
            maps,
            map_height,
            map_width,
            kernel_height: 1,
            kernel_width: 1,
            connected_prev_maps: 0,
        }
    }

    pub fn convolutional(
        maps: u32,
        map_height: u32,
        map_width: u32,
        kernel_height: u32,
        kernel_width: u32,
        connected_prev_maps: u32,
    ) -> Self {
        LayerSpec {
            kind: LayerKind::Convolutional,
            maps,
            map_height,
            map_width,
            kernel_height,
            kernel_width,
            connected_prev_maps,
        }
    }

    pub fn max_pooling(maps: u32, map_height: u32, map_width: u32, kernel: u32) -> Self {
        LayerSpec {
            kind: LayerKind::MaxPooling,
            maps,
            map_height,
            map_width,
            kernel_height: kernel,
            kernel_width: kernel,
            connected_prev_maps: 1,
        }
    }

    pub fn fully_connected(neurons: u32, connected_prev_maps: u32) -> Self {
        LayerSpec {
            kind: LayerKind::FullyConnected,
            maps: neurons,
            map_height: 1,
            map_width: 1,
            kernel_height: 1,
            kernel_width: 1,
            connected_prev_maps,
        }
    }

    pub fn output(neurons: u32, connected_prev_maps: u32) -> Self {
        LayerSpec {
            kind: LayerKind::Output,
            maps: neurons,
            map_height: 1,
            map_width: 1,
            kernel_height: 1,
            kernel_width: 1,
            connected_prev_maps,
        }
    }

    /// Neurons in this layer: `maps * map_height * map_width`.
    pub fn neurons(&self) -> u64 {
        self.maps as u64 * self.map_height as u64 * self.map_width as u64
    }

    fn kernel_area(&self) -> u64 {
        self.kernel_height as u64 * self.kernel_width as u64
    }

    /// Trainable weights in this layer.
    ///
    /// Convolutional layers share one kernel (plus one bias) per map:
    /// `maps * (kernel_area * connected_prev_maps + 1)`. Fully-connected
    /// and output layers connect every neuron to every previous neuron
    /// plus a bias: `neurons * (prev_neurons + 1)`. Input and max-pooling
    /// layers carry no weights.
    pub fn weights(&self, prev_neurons: u64) -> u64 {
        match self.kind {
            LayerKind::Input | LayerKind::MaxPooling => 0,
            LayerKind::Convolutional => {
                self.maps as u64 * (self.kernel_area() * self.connected_prev_maps as u64 + 1)
            }
            LayerKind::FullyConnected | LayerKind::Output => self.neurons() * (prev_neurons + 1),
        }
    }

    /// Operations to forward-propagate one image through this layer.
    ///
    /// Convolution: one multiply and one add per kernel tap, plus a bias
    /// add and an activation per neuron. Max pooling: one comparison per
    /// kernel cell per output neuron. Fully connected: multiply-add per
    /// input neuron plus bias and activation.
    pub fn fprop_ops(&self, prev_neurons: u64) -> u64 {
        match self.kind {
            LayerKind::Input => 0,
            LayerKind::Convolutional => {
                self.neurons() * (2 * self.kernel_area() * self.connected_prev_maps as u64 + 2)
            }
            LayerKind::MaxPooling => self.neurons() * self.kernel_area(),
            LayerKind::FullyConnected | LayerKind::Output => {
                self.neurons() * (2 * prev_neurons + 2)
            }
        }
    }

    /// Operations to back-propagate one image through this layer:
    /// weight-gradient plus delta-propagation work, approximated as twice
    /// the forward cost for weighted layers; pooling only routes deltas
    /// through the kernel window.
    pub fn bprop_ops(&self, prev_neurons: u64) -> u64 {
        match self.kind {
            LayerKind::Input => 0,
            LayerKind::MaxPooling => self.neurons() * self.kernel_area(),
            _ => 2 * self.fprop_ops(prev_neurons),
        }
    }
}

/// An ordered stack of layers, from the input layer to the output layer.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CnnArchitecture {
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

/// Per-layer statistics: neurons and trainable weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LayerStats {
    pub index: usize,
    pub kind: LayerKind,
    pub maps: u32,
    pub neurons: u64,
    pub weights: u64,
}

/// Per-layer forward/backward operation counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LayerOps {
    pub index: usize,
    pub fprop: u64,
    pub bprop: u64,
}

/// Total operations to forward- and back-propagate one image, with the
/// per-layer contributions.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct OpCounts {
    pub fprop_ops: u64,
    pub bprop_ops: u64,
    pub per_layer: Vec<LayerOps>,
}

/// Architecture validation failure, naming the offending layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchError {
    TooFewLayers {
        count: usize,
    },
    FirstNotInput {
        kind: LayerKind,
    },
    LastNotOutput {
        kind: LayerKind,
    },
    MisplacedLayer {
        layer: usize,
        kind: LayerKind,
    },
    ZeroField {
        layer: usize,
        field: &'static str,
    },
    KernelNotUnit {
        layer: usize,
        kind: LayerKind,
    },
    InputHasConnectivity {
        layer: usize,
    },
    ConnectivityExceedsPrev {
        layer: usize,
        connected: u32,
        prev_maps: u32,
    },
}

impl fmt::Display for ArchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchError::TooFewLayers { count } => {
                write!(
                    f,
                    "architecture needs at least an input and an output layer, got {count}"
                )
            }
            ArchError::FirstNotInput { kind } => {
                write!(f, "layer 0 must be an input layer, got {kind}")
            }
            ArchError::LastNotOutput { kind } => {
                write!(f, "the last layer must be an output layer, got {kind}")
            }
            ArchError::MisplacedLayer { layer, kind } => {
                write!(
                    f,
                    "layer {layer}: {kind} layer is only allowed at the architecture boundary"
                )
            }
            ArchError::ZeroField { layer, field } => {
                write!(f, "layer {layer}: {field} must be at least 1")
            }
            ArchError::KernelNotUnit { layer, kind } => {
                write!(f, "layer {layer}: {kind} layers use a 1x1 kernel")
            }
            ArchError::InputHasConnectivity { layer } => {
                write!(
                    f,
                    "layer {layer}: input layers have connected_prev_maps = 0"
                )
            }
            ArchError::ConnectivityExceedsPrev {
                layer,
                connected,
                prev_maps,
            } => {
                write!(
                    f,
                    "layer {layer}: connected_prev_maps {connected} exceeds the {prev_maps} maps of layer {}",
                    layer - 1
                )
            }
        }
    }
}

impl core::error::Error for ArchError {}

impl CnnArchitecture {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Result<Self, ArchError> {
        let arch = CnnArchitecture {
            name: name.into(),
            layers,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<(), ArchError> {
        if self.layers.len() < 2 {
            return Err(ArchError::TooFewLayers {
                count: self.layers.len(),
            });
        }
        if self.layers[0].kind != LayerKind::Input {
            return Err(ArchError::FirstNotInput {
                kind: self.layers[0].kind,
            });
        }
        let last = self.layers.len() - 1;
        if self.layers[last].kind != LayerKind::Output {
            return Err(ArchError::LastNotOutput {
                kind: self.layers[last].kind,
            });
        }
        for (index, layer) in self.layers.iter().enumerate() {
            if index > 0 && layer.kind == LayerKind::Input
                || index < last && layer.kind == LayerKind::Output
            {
                return Err(ArchError::MisplacedLayer {
                    layer: index,
                    kind: layer.kind,
                });
            }
            for (field, value) in [
                ("maps", layer.maps),
                ("map_height", layer.map_height),
                ("map_width", layer.map_width),
                ("kernel_height", layer.kernel_height),
                ("kernel_width", layer.kernel_width),
            ] {
                if value == 0 {
                    return Err(ArchError::ZeroField {
                        layer: index,
                        field,
                    });
                }
            }
            let unit_kernel_kind = matches!(
                layer.kind,
                LayerKind::Input | LayerKind::FullyConnected | LayerKind::Output
            );
            if unit_kernel_kind && (layer.kernel_height != 1 || layer.kernel_width != 1) {
                return Err(ArchError::KernelNotUnit {
                    layer: index,
                    kind: layer.kind,
                });
            }
            if layer.kind == LayerKind::Input {
                if layer.connected_prev_maps != 0 {
                    return Err(ArchError::InputHasConnectivity { layer: index });
                }
            } else {
                let prev_maps = self.layers[index - 1].maps;
                if layer.connected_prev_maps > prev_maps {
                    return Err(ArchError::ConnectivityExceedsPrev {
                        layer: index,
                        connected: layer.connected_prev_maps,
                        prev_maps,
                    });
                }
            }
        }
        Ok(())
    }

    /// Neurons and weights per layer, in layer order.
    pub fn layer_stats(&self) -> Result<Vec<LayerStats>, ArchError> {
        self.validate()?;
        let mut prev_neurons = 0u64;
        let mut rows = Vec::with_capacity(self.layers.len());
        for (index, layer) in self.layers.iter().enumerate() {
            rows.push(LayerStats {
                index,
                kind: layer.kind,
                maps: layer.maps,
                neurons: layer.neurons(),
                weights: layer.weights(prev_neurons),
            });
            prev_neurons = layer.neurons();
        }
        Ok(rows)
    }

    /// Per-layer and total forward/backward operation counts for one image.
    pub fn count_ops(&self) -> Result<OpCounts, ArchError> {
        self.validate()?;
        let mut prev_neurons = 0u64;
        let mut per_layer = Vec::with_capacity(self.layers.len());
        let mut fprop_ops = 0u64;
        let mut bprop_ops = 0u64;
        for (index, layer) in self.layers.iter().enumerate() {
            let fprop = layer.fprop_ops(prev_neurons);
            let bprop = layer.bprop_ops(prev_neurons);
            fprop_ops += fprop;
            bprop_ops += bprop;
            per_layer.push(LayerOps {
                index,
                fprop,
                bprop,
            });
            prev_neurons = layer.neurons();
        }
        Ok(OpCounts {
            fprop_ops,
            bprop_ops,
            per_layer,
        })
    }

    /// Total neurons across all layers.
    pub fn total_neurons(&self) -> u64 {
        self.layers.iter().map(LayerSpec::neurons).sum()
    }

    /// Total trainable weights across all layers.
    pub fn total_weights(&self) -> u64 {
        let mut prev_neurons = 0u64;
        let mut total = 0u64;
        for layer in &self.layers {
            total += layer.weights(prev_neurons);
            prev_neurons = layer.neurons();
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn small_conv() -> LayerSpec {
        LayerSpec::convolutional(5, 26, 26, 4, 4, 1)
    }

    #[test]
    fn conv_layer_stats_match_published_figures() {
        // small: 5 maps, 26x26, 4x4 kernel, 1 connected map
        let layer = small_conv();
        assert_eq!(layer.neurons(), 3380);
        assert_eq!(layer.weights(841), 85);

        // medium: 20 maps, otherwise identical geometry
        let layer = LayerSpec::convolutional(20, 26, 26, 4, 4, 1);
        assert_eq!(layer.neurons(), 13_520);
        assert_eq!(layer.weights(841), 340);

        // large, last convolutional layer: 100 maps of 6x6, 6x6 kernel over 60 maps
        let layer = LayerSpec::convolutional(100, 6, 6, 6, 6, 60);
        assert_eq!(layer.neurons(), 3600);
        assert_eq!(layer.weights(7260), 216_100);
    }

    #[test]
    fn input_layer_stats() {
        let layer = LayerSpec::input(1, 29, 29);
        assert_eq!(layer.neurons(), 841);
        assert_eq!(layer.weights(0), 0);
        assert_eq!(layer.fprop_ops(0), 0);
        assert_eq!(layer.bprop_ops(0), 0);
    }

    #[test]
    fn fully_connected_weights_use_previous_neurons() {
        let layer = LayerSpec::output(10, 100);
        assert_eq!(layer.neurons(), 10);
        assert_eq!(layer.weights(100), 10 * 101);
    }

    #[test]
    fn max_pooling_has_zero_weights() {
        let layer = LayerSpec::max_pooling(5, 13, 13, 2);
        assert_eq!(layer.weights(3380), 0);
        assert_eq!(layer.fprop_ops(3380), 845 * 4);
        assert_eq!(layer.bprop_ops(3380), 845 * 4);
    }

    #[test]
    fn minimal_network_ops_are_positive() {
        let arch = CnnArchitecture::new(
            "minimal",
            vec![LayerSpec::input(1, 1, 1), LayerSpec::output(1, 1)],
        )
        .unwrap();
        let ops = arch.count_ops().unwrap();
        // single 1x1 fully-connected output neuron: 2*prev + 2 forward ops
        assert_eq!(ops.fprop_ops, 4);
        assert_eq!(ops.bprop_ops, 8);
        assert_eq!(ops.per_layer[0].fprop, 0);
    }

    #[test]
    fn conv_ops_scale_linearly_in_maps() {
        let base = CnnArchitecture::new(
            "conv-only",
            vec![
                LayerSpec::input(1, 29, 29),
                LayerSpec::convolutional(5, 26, 26, 4, 4, 1),
                LayerSpec::output(10, 5),
            ],
        )
        .unwrap();
        let doubled = CnnArchitecture::new(
            "conv-only-2x",
            vec![
                LayerSpec::input(1, 29, 29),
                LayerSpec::convolutional(10, 26, 26, 4, 4, 1),
                LayerSpec::output(10, 10),
            ],
        )
        .unwrap();
        let conv_base = base.count_ops().unwrap().per_layer[1].fprop;
        let conv_doubled = doubled.count_ops().unwrap().per_layer[1].fprop;
        assert_eq!(conv_doubled, 2 * conv_base);
    }

    #[test]
    fn adding_a_layer_never_decreases_totals() {
        let base = CnnArchitecture::new(
            "base",
            vec![
                LayerSpec::input(1, 29, 29),
                small_conv(),
                LayerSpec::output(10, 5),
            ],
        )
        .unwrap();
        let extended = CnnArchitecture::new(
            "extended",
            vec![
                LayerSpec::input(1, 29, 29),
                small_conv(),
                LayerSpec::fully_connected(50, 5),
                LayerSpec::output(10, 50),
            ],
        )
        .unwrap();
        let a = base.count_ops().unwrap();
        let b = extended.count_ops().unwrap();
        assert!(b.fprop_ops > a.fprop_ops);
        assert!(b.bprop_ops > a.bprop_ops);
    }

    #[test]
    fn per_layer_ops_sum_to_totals() {
        let arch = CnnArchitecture::new(
            "sums",
            vec![
                LayerSpec::input(1, 29, 29),
                small_conv(),
                LayerSpec::max_pooling(5, 13, 13, 2),
                LayerSpec::output(10, 5),
            ],
        )
        .unwrap();
        let ops = arch.count_ops().unwrap();
        assert_eq!(
            ops.fprop_ops,
            ops.per_layer.iter().map(|l| l.fprop).sum::<u64>()
        );
        assert_eq!(
            ops.bprop_ops,
            ops.per_layer.iter().map(|l| l.bprop).sum::<u64>()
        );
    }

    #[test]
    fn validation_names_the_offending_layer() {
        let arch = CnnArchitecture {
            name: "bad".into(),
            layers: vec![
                LayerSpec::input(1, 29, 29),
                LayerSpec::convolutional(5, 26, 26, 4, 4, 3),
                LayerSpec::output(10, 5),
            ],
        };
        let err = arch.validate().unwrap_err();
        assert_eq!(
            err,
            ArchError::ConnectivityExceedsPrev {
                layer: 1,
                connected: 3,
                prev_maps: 1
            }
        );
        let msg = alloc::format!("{err}");
        assert!(msg.contains("layer 1"), "{msg}");
    }

    #[test]
    fn validation_rejects_wrong_boundary_layers() {
        let arch = CnnArchitecture {
            name: "no-input".into(),
            layers: vec![small_conv(), LayerSpec::output(10, 5)],
        };
        assert_eq!(
            arch.validate().unwrap_err(),
            ArchError::FirstNotInput {
                kind: LayerKind::Convolutional
            }
        );

        let arch = CnnArchitecture {
            name: "no-output".into(),
            layers: vec![LayerSpec::input(1, 29, 29), small_conv()],
        };
        assert_eq!(
            arch.validate().unwrap_err(),
            ArchError::LastNotOutput {
                kind: LayerKind::Convolutional
            }
        );
    }
}
