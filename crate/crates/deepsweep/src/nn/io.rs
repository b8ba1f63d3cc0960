//! JSON weight files.
//!
//! Layout: a `format_version`, the model [`ModelMeta`], and one entry per
//! layer carrying its config, its parameter-block shapes, and all parameter
//! values flattened row-major (weights first, then bias). Files are refused
//! with typed errors when the version is unknown, the JSON is corrupt, or
//! the declared shapes do not match the value count.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::{Activation, Conv1d, Dense, Dropout, Layer, MaxPool1d, Padding};
use super::{Model, ModelMeta};
use crate::error::{Error, Result};

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WeightsFile {
    format_version: u32,
    metadata: ModelMeta,
    layers: Vec<LayerEntry>,
}

#[derive(Serialize, Deserialize)]
struct LayerEntry {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    config: serde_json::Value,
    #[serde(default)]
    shapes: Vec<Vec<usize>>,
    #[serde(default)]
    values: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct ConvCfg {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    padding: Padding,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct DenseCfg {
    in_features: usize,
    out_features: usize,
    activation: Activation,
}

fn to_entry(layer: &Layer) -> Result<LayerEntry> {
    let config = match layer {
        Layer::Conv1d(l) => serde_json::to_value(ConvCfg {
            in_channels: l.in_channels,
            out_channels: l.out_channels,
            kernel: l.kernel,
            padding: l.padding,
            activation: l.activation,
        }),
        Layer::MaxPool1d(l) => serde_json::to_value(l),
        Layer::Dense(l) => serde_json::to_value(DenseCfg {
            in_features: l.in_features,
            out_features: l.out_features,
            activation: l.activation,
        }),
        Layer::Dropout(l) => serde_json::to_value(l),
        Layer::Flatten | Layer::Softmax => Ok(serde_json::Value::Object(Default::default())),
    }
    .map_err(|e| Error::format(format!("could not encode layer config: {e}")))?;
    let mut values = Vec::new();
    for block in layer.param_blocks() {
        values.extend_from_slice(block);
    }
    Ok(LayerEntry {
        kind: layer.kind_name().to_string(),
        config,
        shapes: layer.param_shapes(),
        values,
    })
}

fn from_entry(entry: &LayerEntry) -> Result<Layer> {
    let parse_cfg = |what: &str, v: &serde_json::Value| -> Result<serde_json::Value> {
        if v.is_object() {
            Ok(v.clone())
        } else {
            Err(Error::format(format!("{what} layer config must be an object")))
        }
    };
    let mut layer = match entry.kind.as_str() {
        "conv1d" => {
            let cfg: ConvCfg = serde_json::from_value(parse_cfg("conv1d", &entry.config)?)
                .map_err(|e| Error::format(format!("bad conv1d config: {e}")))?;
            Layer::Conv1d(Conv1d {
                in_channels: cfg.in_channels,
                out_channels: cfg.out_channels,
                kernel: cfg.kernel,
                padding: cfg.padding,
                activation: cfg.activation,
                weights: Vec::new(),
                bias: Vec::new(),
            })
        }
        "max_pool1d" => {
            let cfg: MaxPool1d = serde_json::from_value(parse_cfg("max_pool1d", &entry.config)?)
                .map_err(|e| Error::format(format!("bad max_pool1d config: {e}")))?;
            Layer::MaxPool1d(cfg)
        }
        "flatten" => Layer::Flatten,
        "dense" => {
            let cfg: DenseCfg = serde_json::from_value(parse_cfg("dense", &entry.config)?)
                .map_err(|e| Error::format(format!("bad dense config: {e}")))?;
            Layer::Dense(Dense {
                in_features: cfg.in_features,
                out_features: cfg.out_features,
                activation: cfg.activation,
                weights: Vec::new(),
                bias: Vec::new(),
            })
        }
        "dropout" => {
            let cfg: Dropout = serde_json::from_value(parse_cfg("dropout", &entry.config)?)
                .map_err(|e| Error::format(format!("bad dropout config: {e}")))?;
            Layer::Dropout(cfg)
        }
        "softmax" => Layer::Softmax,
        other => return Err(Error::format(format!("unknown layer type \"{other}\""))),
    };

    // Check the declared shapes against the config before touching values.
    let expect_shapes = match &mut layer {
        Layer::Conv1d(l) => {
            l.weights = vec![0.0; l.out_channels * l.in_channels * l.kernel];
            l.bias = vec![0.0; l.out_channels];
            Layer::Conv1d(l.clone()).param_shapes()
        }
        Layer::Dense(l) => {
            l.weights = vec![0.0; l.out_features * l.in_features];
            l.bias = vec![0.0; l.out_features];
            Layer::Dense(l.clone()).param_shapes()
        }
        _ => Vec::new(),
    };
    if entry.shapes != expect_shapes {
        return Err(Error::format(format!(
            "{} layer declares shapes {:?}, expected {:?}",
            entry.kind, entry.shapes, expect_shapes
        )));
    }
    let total: usize = expect_shapes
        .iter()
        .map(|s| s.iter().product::<usize>())
        .sum();
    if entry.values.len() != total {
        return Err(Error::format(format!(
            "{} layer carries {} values, shapes require {total}",
            entry.kind,
            entry.values.len()
        )));
    }
    if entry.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::format(format!(
            "{} layer contains non-finite values",
            entry.kind
        )));
    }
    let mut offset = 0;
    for block in layer.param_blocks_mut() {
        block.copy_from_slice(&entry.values[offset..offset + block.len()]);
        offset += block.len();
    }
    Ok(layer)
}

/// Write `model` to `path` as a JSON weight file.
pub fn save_weights(model: &Model, path: &Path) -> Result<()> {
    model.validate()?;
    for block in model.param_blocks() {
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(
                "model contains non-finite weights; refusing to save",
            ));
        }
    }
    let file = WeightsFile {
        format_version: WEIGHTS_FORMAT_VERSION,
        metadata: model.meta.clone(),
        layers: model
            .layers
            .iter()
            .map(to_entry)
            .collect::<Result<Vec<_>>>()?,
    };
    crate::fsio::replace_file(path, |w| {
        serde_json::to_writer(w, &file)
            .map_err(|e| Error::format(format!("could not serialize weights: {e}")))
    })
}

/// Load a model from a JSON weight file, validating version, shapes,
/// value counts, finiteness, and layer compatibility.
pub fn load_weights(path: &Path) -> Result<Model> {
    let file = File::open(path)?;
    let parsed: WeightsFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::format(format!("invalid weight file: {e}")))?;
    if parsed.format_version != WEIGHTS_FORMAT_VERSION {
        return Err(Error::format(format!(
            "unsupported weight format version {} (expected {WEIGHTS_FORMAT_VERSION})",
            parsed.format_version
        )));
    }
    let layers = parsed
        .layers
        .iter()
        .map(from_entry)
        .collect::<Result<Vec<_>>>()?;
    let model = Model {
        meta: parsed.metadata,
        layers,
    };
    model
        .validate()
        .map_err(|e| Error::format(format!("weight file describes an invalid model: {e}")))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{build_reference_model, Tensor};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("deepsweep-nn-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn weights_round_trip_bit_exact() {
        let model = build_reference_model(32, 9, 42).unwrap();
        let path = tmp("roundtrip.json");
        save_weights(&model, &path).unwrap();
        let loaded = load_weights(&path).unwrap();
        assert_eq!(loaded, model, "weights and configs must survive the trip");
        let x = Tensor::from_vec(
            &[1, 2, 32],
            (0..64).map(|i| (i as f32 * 0.1).sin()).collect(),
        )
        .unwrap();
        assert_eq!(model.forward(&x).unwrap(), loaded.forward(&x).unwrap());
    }

    #[test]
    fn wrong_version_is_a_format_error() {
        let model = build_reference_model(32, 9, 0).unwrap();
        let path = tmp("version.json");
        save_weights(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":9");
        std::fs::write(&path, text).unwrap();
        let err = load_weights(&path).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "got {err:?}");
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let model = build_reference_model(32, 9, 0).unwrap();
        let path = tmp("truncated.json");
        save_weights(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_weights(&path), Err(Error::Format(_))));
    }

    #[test]
    fn shape_value_mismatch_is_a_format_error() {
        let model = build_reference_model(32, 9, 0).unwrap();
        let path = tmp("shapes.json");
        save_weights(&model, &path).unwrap();
        // Claim the conv kernel is 5 while the values stay sized for 7.
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"kernel\":7", "\"kernel\":5");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(load_weights(&path), Err(Error::Format(_))));
    }

    #[test]
    fn unknown_layer_type_is_a_format_error() {
        let model = build_reference_model(32, 9, 0).unwrap();
        let path = tmp("unknown.json");
        save_weights(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"type\":\"flatten\"", "\"type\":\"mystery\"");
        std::fs::write(&path, text).unwrap();
        let err = load_weights(&path).unwrap_err();
        assert!(err.to_string().contains("mystery"));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_weights(Path::new("/nonexistent/weights.json")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn non_finite_weights_refuse_to_save() {
        let mut model = build_reference_model(32, 9, 0).unwrap();
        model.param_blocks_mut()[0][0] = f32::NAN;
        let path = tmp("nan.json");
        assert!(matches!(save_weights(&model, &path), Err(Error::Data(_))));
    }
}
