use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::loss::LossSpec;
use super::model::{HybridConfig, HybridModel, WindowSpec};
use crate::error::{Error, Result};

pub const PARAMETER_ORDER: &str =
    "ar_head.weights (h x T row-major), ar_head.bias, dense[i].weights (out x in row-major) then dense[i].bias for each layer, t2v.omega, t2v.phi";

/// JSON side of a checkpoint; the parameters live in a sibling binary file
/// of little-endian f64 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub spec: WindowSpec,
    pub config: HybridConfig,
    pub layer_sizes: Vec<usize>,
    pub loss: LossSpec,
    pub n_params: usize,
    pub parameter_order: String,
    pub params_file: String,
}

/// Writes `<stem>.json` and `<stem>.bin`; returns both paths.
pub fn save_checkpoint(model: &HybridModel, loss: &LossSpec, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let json_path = stem.with_extension("json");
    let bin_path = stem.with_extension("bin");
    let manifest = CheckpointManifest {
        format: "tailcast-hybrid-v1".into(),
        spec: model.spec().clone(),
        config: model.config().clone(),
        layer_sizes: model.layer_sizes(),
        loss: *loss,
        n_params: model.n_params(),
        parameter_order: PARAMETER_ORDER.into(),
        params_file: bin_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let bytes: Vec<u8> = model.params().iter().flat_map(|p| p.to_le_bytes()).collect();
    fs::write(&bin_path, bytes).map_err(|e| Error::io(&bin_path, e))?;
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok((json_path, bin_path))
}

/// Reads a checkpoint from its JSON manifest path.
pub fn load_checkpoint(manifest_path: &Path) -> Result<(HybridModel, LossSpec)> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: CheckpointManifest = serde_json::from_str(&text)?;
    let bin_path = manifest_path.with_file_name(&manifest.params_file);
    let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    if bytes.len() != manifest.n_params * 8 {
        return Err(Error::ShapeMismatch {
            expected: manifest.n_params * 8,
            got: bytes.len(),
        });
    }
    let params = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let model = HybridModel::from_params(manifest.spec, manifest.config, params)?;
    Ok((model, manifest.loss))
}
