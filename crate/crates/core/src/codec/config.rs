use serde::Serialize;

use crate::bitstream::{validate_level, DEFAULT_ZSTD_LEVEL};
use crate::compaction::CompactionConfig;
use crate::error::{Error, Result};
use crate::pruning::{PruneConfig, DEFAULT_ITERATIONS, DEFAULT_MAPPING_SHAPE};
use crate::quant::{QuantParams, DEFAULT_MAX_DEPTH};
use crate::scene::sigmoid;

pub const DEFAULT_Q: f64 = 0.5;
/// Pruning iteration after which interleaved compaction runs by default.
pub const INTERLEAVED_ITERATION: usize = 24;

/// When SH compaction runs relative to pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactionPlacement {
    AfterPruning,
    /// After this many pruning iterations; the remaining iterations see the
    /// refit colors.
    Interleaved(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodeConfig {
    pub q: f64,
    pub lambda: f64,
    pub alpha_par: f64,
    pub max_delta_mse: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sf_sh: f64,
    pub sf_opacity: f64,
    pub sf_rotation: f64,
    pub sf_scale: f64,
    /// Zero disables pruning.
    pub iterations: usize,
    pub mapping_shape: f64,
    pub compaction: bool,
    pub placement: CompactionPlacement,
    pub zstd_level: i32,
    pub max_depth: u8,
}

impl Default for EncodeConfig {
    fn default() -> Self {
        Self::from_q(DEFAULT_Q).expect("default q is in range")
    }
}

impl EncodeConfig {
    pub fn from_q(q: f64) -> Result<EncodeConfig> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Argument(format!("q must lie in [0, 1], got {q}")));
        }
        Ok(EncodeConfig {
            q,
            lambda: 10f64.powf(-q),
            alpha_par: sigmoid(3.0 * q),
            max_delta_mse: 10f64.powf(-8.8 - 2.0 * q),
            beta: 1.4e-4 * q,
            gamma: 5.0 * 10f64.powf(-3.0 - 5.0 * q),
            sf_sh: 1.0 + 100.0 * q,
            sf_opacity: 1.0 + 200.0 * q,
            sf_rotation: 1.0 + 400.0 * q,
            sf_scale: 1.0 + 4000.0 * q,
            iterations: DEFAULT_ITERATIONS,
            mapping_shape: DEFAULT_MAPPING_SHAPE,
            compaction: true,
            placement: CompactionPlacement::AfterPruning,
            zstd_level: DEFAULT_ZSTD_LEVEL,
            max_depth: DEFAULT_MAX_DEPTH,
        })
    }

    /// Apply one `key=value` override.
    pub fn apply_override(&mut self, entry: &str) -> Result<()> {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("override `{entry}` is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let float = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("override {key}: `{value}` is not a number")))
        };
        let int = || -> Result<u64> {
            value
                .parse::<u64>()
                .map_err(|_| Error::Argument(format!("override {key}: `{value}` is not a non-negative integer")))
        };
        match key {
            "lambda" => self.lambda = float()?,
            "alpha_par" | "alpha" => self.alpha_par = float()?,
            "max_delta_mse" => self.max_delta_mse = float()?,
            "beta" => self.beta = float()?,
            "gamma" => self.gamma = float()?,
            "sf_sh" => self.sf_sh = float()?,
            "sf_opacity" => self.sf_opacity = float()?,
            "sf_rotation" => self.sf_rotation = float()?,
            "sf_scale" => self.sf_scale = float()?,
            "iterations" => self.iterations = int()? as usize,
            "a" | "mapping_shape" => self.mapping_shape = float()?,
            "zstd_level" => self.zstd_level = int()?.min(i32::MAX as u64) as i32,
            "max_depth" => {
                self.max_depth = u8::try_from(int()?)
                    .map_err(|_| Error::Argument(format!("max_depth {value} is too large")))?
            }
            "compaction" => {
                self.compaction = match value {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => return Err(Error::Argument(format!("compaction: expected on/off, got `{value}`"))),
                }
            }
            "placement" => {
                self.placement = match value {
                    "after" | "after_pruning" => CompactionPlacement::AfterPruning,
                    "interleaved" => CompactionPlacement::Interleaved(INTERLEAVED_ITERATION),
                    v => match v.strip_prefix("interleaved:").map(str::parse::<usize>) {
                        Some(Ok(n)) => CompactionPlacement::Interleaved(n),
                        _ => {
                            return Err(Error::Argument(format!(
                                "placement: expected after, interleaved or interleaved:N, got `{value}`"
                            )))
                        }
                    },
                }
            }
            _ => return Err(Error::Argument(format!("unknown override key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Argument(format!("{what} = {v} is out of range")));
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", self.beta);
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma", self.gamma);
        }
        if !(0.0..=1.0).contains(&self.q) {
            return bad("q", self.q);
        }
        self.quant_params().validate()?;
        self.compaction_config().validate()?;
        if let Some(p) = self.prune_config() {
            p.validate()?;
        }
        validate_level(self.zstd_level)?;
        if self.max_depth == 0 {
            return Err(Error::Argument("max_depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Scale factors as stored in the container.
    pub fn quant_params(&self) -> QuantParams {
        QuantParams {
            sf_sh: self.sf_sh as f32,
            sf_opacity: self.sf_opacity as f32,
            sf_rotation: self.sf_rotation as f32,
            sf_scale: self.sf_scale as f32,
        }
    }

    pub fn prune_config(&self) -> Option<PruneConfig> {
        (self.iterations > 0).then_some(PruneConfig {
            max_delta_mse: self.max_delta_mse,
            a: self.mapping_shape,
            iterations: self.iterations,
        })
    }

    /// The zero threshold is the SH quantizer's dead zone.
    pub fn compaction_config(&self) -> CompactionConfig {
        CompactionConfig {
            lambda: self.lambda,
            alpha_par: self.alpha_par,
            zero_threshold: self.quant_params().sh_zero_threshold(),
        }
    }
}
