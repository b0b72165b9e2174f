//! Pipeline thresholds and their plain-text `key = value` form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::ObjectClass;

/// How the per-frame position is read off the objectness field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidMode {
    /// Centroid of the pixels attaining the field maximum, gated by the threshold.
    Max,
    /// Centroid of every pixel whose value exceeds the threshold.
    AboveThreshold,
}

impl FromStr for CentroidMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(CentroidMode::Max),
            "above_threshold" => Ok(CentroidMode::AboveThreshold),
            _ => Err(Error::config("centroid_mode", format!("expected `max` or `above_threshold`, got `{s}`"))),
        }
    }
}

impl CentroidMode {
    fn as_str(self) -> &'static str {
        match self {
            CentroidMode::Max => "max",
            CentroidMode::AboveThreshold => "above_threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// Objectness floor for non-maximum suppression.
    pub t_o: f64,
    /// Same-class overlap above which the weaker detection is suppressed.
    pub t_iou: f64,
    /// Field-maximum thresholds for BMR, SP and HRS, in that order.
    pub t_obj: [f64; 3],
    pub t_hcph: f64,
    pub t_peak: f64,
    pub t_stable: f64,
    pub peak_lookahead: usize,
    pub n_f1: usize,
    pub n_f2: usize,
    pub t_zero: f64,
    pub t_one: f64,
    pub t_two: f64,
    pub track_box_size: u32,
    /// Apply non-maximum suppression while ingesting streams.
    pub nms: bool,
    pub centroid_mode: CentroidMode,
    /// Integer factor by which the objectness raster is coarsened. Values
    /// above 1 trade exactness of the centroid for speed.
    pub raster_downscale: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            t_o: 0.05,
            t_iou: 0.45,
            t_obj: [0.1, 0.05, 0.1],
            t_hcph: 0.1,
            t_peak: 200.0,
            t_stable: 50.0,
            peak_lookahead: 10,
            n_f1: 5,
            n_f2: 40,
            t_zero: 0.2,
            t_one: 2.0,
            t_two: 4.0,
            track_box_size: 500,
            nms: true,
            centroid_mode: CentroidMode::Max,
            raster_downscale: 1,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "t_o",
    "t_iou",
    "t_obj",
    "t_obj_bmr",
    "t_obj_sp",
    "t_obj_hrs",
    "t_hcph",
    "t_peak",
    "t_stable",
    "peak_lookahead",
    "n_f1",
    "n_f2",
    "t_zero",
    "t_one",
    "t_two",
    "track_box_size",
    "nms",
    "centroid_mode",
    "raster_downscale",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("`{value}`: {e}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

impl PipelineConfig {
    /// Threshold on the objectness maximum for a tracked class.
    pub fn obj_threshold(&self, class: ObjectClass) -> f64 {
        match class.tracked_index() {
            Some(i) => self.t_obj[i],
            None => self.t_hcph,
        }
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "t_o" => self.t_o = num(key, value)?,
            "t_iou" => self.t_iou = num(key, value)?,
            "t_obj" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| num(key, p.trim()))
                    .collect::<Result<_>>()?;
                self.t_obj = parts
                    .try_into()
                    .map_err(|_| Error::config(key, "expected three comma-separated values (BMR,SP,HRS)"))?;
            }
            "t_obj_bmr" => self.t_obj[0] = num(key, value)?,
            "t_obj_sp" => self.t_obj[1] = num(key, value)?,
            "t_obj_hrs" => self.t_obj[2] = num(key, value)?,
            "t_hcph" => self.t_hcph = num(key, value)?,
            "t_peak" => self.t_peak = num(key, value)?,
            "t_stable" => self.t_stable = num(key, value)?,
            "peak_lookahead" => self.peak_lookahead = num(key, value)?,
            "n_f1" => self.n_f1 = num(key, value)?,
            "n_f2" => self.n_f2 = num(key, value)?,
            "t_zero" => self.t_zero = num(key, value)?,
            "t_one" => self.t_one = num(key, value)?,
            "t_two" => self.t_two = num(key, value)?,
            "track_box_size" => self.track_box_size = num(key, value)?,
            "nms" => self.nms = flag(key, value)?,
            "centroid_mode" => self.centroid_mode = value.parse()?,
            "raster_downscale" => self.raster_downscale = num(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of the current values.
    /// Blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected `key = value`, got `{line}`")))?;
            self.set(key, value).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("t_o", self.t_o),
            ("t_iou", self.t_iou),
            ("t_obj_bmr", self.t_obj[0]),
            ("t_obj_sp", self.t_obj[1]),
            ("t_obj_hrs", self.t_obj[2]),
            ("t_hcph", self.t_hcph),
            ("t_peak", self.t_peak),
            ("t_stable", self.t_stable),
            ("t_zero", self.t_zero),
            ("t_one", self.t_one),
            ("t_two", self.t_two),
        ];
        for (key, v) in non_negative {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(key, format!("must be a finite value >= 0, got {v}")));
            }
        }
        if !(self.t_zero < self.t_one && self.t_one < self.t_two) {
            return Err(Error::config("t_zero", "requires t_zero < t_one < t_two"));
        }
        if self.n_f1 == 0 {
            return Err(Error::config("n_f1", "must be >= 1"));
        }
        if self.n_f2 == 0 {
            return Err(Error::config("n_f2", "must be >= 1"));
        }
        if self.track_box_size == 0 {
            return Err(Error::config("track_box_size", "must be > 0"));
        }
        if self.raster_downscale == 0 {
            return Err(Error::config("raster_downscale", "must be >= 1"));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; `from_text(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "t_o = {}", self.t_o);
        let _ = writeln!(s, "t_iou = {}", self.t_iou);
        let _ = writeln!(s, "t_obj = {},{},{}", self.t_obj[0], self.t_obj[1], self.t_obj[2]);
        let _ = writeln!(s, "t_hcph = {}", self.t_hcph);
        let _ = writeln!(s, "t_peak = {}", self.t_peak);
        let _ = writeln!(s, "t_stable = {}", self.t_stable);
        let _ = writeln!(s, "peak_lookahead = {}", self.peak_lookahead);
        let _ = writeln!(s, "n_f1 = {}", self.n_f1);
        let _ = writeln!(s, "n_f2 = {}", self.n_f2);
        let _ = writeln!(s, "t_zero = {}", self.t_zero);
        let _ = writeln!(s, "t_one = {}", self.t_one);
        let _ = writeln!(s, "t_two = {}", self.t_two);
        let _ = writeln!(s, "track_box_size = {}", self.track_box_size);
        let _ = writeln!(s, "nms = {}", self.nms);
        let _ = writeln!(s, "centroid_mode = {}", self.centroid_mode.as_str());
        let _ = writeln!(s, "raster_downscale = {}", self.raster_downscale);
        s
    }
}
