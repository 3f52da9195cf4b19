use convnorm::bounds::Timings;
use convnorm::{ConvConfig, HopmConfig, PowerSettings};
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command and get the same numbers.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConvConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hopm: Option<HopmConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSettings>,
    pub seed: u64,
    /// Wall-clock per stage; only filled on request since it varies run to run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION,
            config: None,
            hopm: None,
            power: None,
            seed,
            timings: None,
        }
    }
}
