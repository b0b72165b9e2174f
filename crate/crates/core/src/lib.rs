//! Post-processing of per-frame object detections from resuscitation video:
//! single-object localization and tracking regions, provider counting from
//! hand detections, evaluation against reference timelines, synthetic
//! training scenes and scripted test episodes.

pub mod annotation;
pub mod config;
pub mod error;
pub mod geometry;
pub mod hcp;
pub mod locate;
pub mod metrics;
pub mod plot;
pub mod report;
pub mod simulate;
pub mod stream;
pub mod synthgen;
pub mod timelines;
pub mod trackpost;
pub mod types;

pub use config::{CentroidMode, PipelineConfig};
pub use error::{Error, Result};
pub use types::{BBox, Detection, Episode, FrameDetections, ObjectClass, Point};
