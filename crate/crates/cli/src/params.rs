//! `--param key=value` overrides for the pipeline parameters.

use platetrace_core::extraction::ExtractionParams;
use platetrace_core::segmentation::SegmentationParams;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineParams {
    pub extraction: ExtractionParams,
    pub segmentation: SegmentationParams,
}

fn try_set<T: Serialize + DeserializeOwned>(params: &mut T, key: &str, value: &str) -> Result<bool> {
    let mut v = serde_json::to_value(&*params).expect("params serialise");
    let Some(slot) = v.get_mut(key) else {
        return Ok(false);
    };
    let parsed: Value = serde_json::from_str(value).map_err(|_| CliError::Usage(format!("--param {key}: {value:?} is not a number")))?;
    *slot = parsed;
    *params = serde_json::from_value(v).map_err(|e| CliError::Usage(format!("--param {key}={value}: {e}")))?;
    Ok(true)
}

impl PipelineParams {
    /// Applies `key=value` pairs; keys are the parameter field names.
    pub fn with_overrides<S: AsRef<str>>(mut self, pairs: &[S]) -> Result<Self> {
        for pair in pairs {
            let pair = pair.as_ref();
            let (k, v) = pair.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects key=value, got {pair:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if !(try_set(&mut self.extraction, k, v)? || try_set(&mut self.segmentation, k, v)?) {
                return Err(CliError::Usage(format!("unknown parameter {k:?}")));
            }
        }
        self.extraction.validate()?;
        self.segmentation.validate()?;
        Ok(self)
    }
}
