//! Layered configuration: built-in defaults, then a config file, then
//! `--set key=value` flags.

use std::fs;

use anyhow::{Context, Result};
use neotrack_core::synthgen::SynthConfig;
use neotrack_core::PipelineConfig;

use crate::{PipelineArgs, UsageError};

fn split_assignment(raw: &str) -> Result<(&str, &str)> {
    raw.split_once('=')
        .ok_or_else(|| UsageError(format!("--set expects KEY=VALUE, got `{raw}`")).into())
}

pub fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))?;
    }
    for raw in &args.set {
        let (k, v) = split_assignment(raw)?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn synth_config(
    file: Option<&std::path::Path>,
    sets: &[String],
    seed: Option<u64>,
) -> Result<SynthConfig> {
    let mut cfg = SynthConfig::default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))?;
    }
    for raw in sets {
        let (k, v) = split_assignment(raw)?;
        cfg.set(k, v)?;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}
