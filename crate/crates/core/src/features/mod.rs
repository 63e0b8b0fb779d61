//! Dense feature pyramids and the candidate scoring functions.
//!
//! All scores are "lower is better" and non-negative.

mod dense;
mod external;
mod implicit;
mod keypoints;
mod pyramid;
mod tensor_file;

use std::fmt;

use crate::error::{Error, Result};
use crate::renderer::Image;

pub use dense::{dense_distance, dense_score, MAX_DENSE_DISTANCE};
pub use external::{image_digest, ExternalFeatures};
pub use implicit::{implicit_match_distance, implicit_match_score};
pub use keypoints::{
    detect_keypoints, detect_keypoints_with, match_score_exhaustive, match_score_patchwise,
    HarrisConfig, KeypointSet,
};
pub use pyramid::{extract_pyramid, ChannelSpec, PyramidConfig};
pub use tensor_file::{decode_pyramid, encode_pyramid, load_external_features, save_pyramid};

/// Candidate score; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Score(f64);

impl Score {
    /// Sentinel for candidates that have never been scored.
    pub const WORST: Score = Score(f64::MAX);

    pub fn new(value: f64) -> Result<Score> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "score must be finite and non-negative, got {value}"
            )));
        }
        Ok(Score(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One dense feature map, channel-major (`c * H * W + h * W + w`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVolume {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureVolume {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::ShapeMismatch(format!(
                "feature volume dimensions must be positive, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {channels}x{height}x{width} volume",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature value at flat index {i}"
            )));
        }
        Ok(FeatureVolume {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, height, width)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn at(&self, c: usize, h: usize, w: usize) -> f32 {
        self.data[(c * self.height + h) * self.width + w]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Builtin,
    External,
}

/// Levels `1..=L` with strictly shrinking spatial size.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    levels: Vec<FeatureVolume>,
    provenance: Provenance,
}

impl FeaturePyramid {
    pub fn new(levels: Vec<FeatureVolume>, provenance: Provenance) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::ShapeMismatch("pyramid has no levels".into()));
        }
        for (i, pair) in levels.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.height >= a.height || b.width >= a.width {
                return Err(Error::ShapeMismatch(format!(
                    "level {} is {}x{} but level {} is {}x{}; spatial size must strictly decrease",
                    i + 1,
                    a.height,
                    a.width,
                    i + 2,
                    b.height,
                    b.width
                )));
            }
        }
        Ok(FeaturePyramid { levels, provenance })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// 1-based level access.
    pub fn level(&self, level: usize) -> Result<&FeatureVolume> {
        if level == 0 || level > self.levels.len() {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels.len(),
            });
        }
        Ok(&self.levels[level - 1])
    }

    pub fn levels(&self) -> &[FeatureVolume] {
        &self.levels
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn into_levels(self) -> Vec<FeatureVolume> {
        self.levels
    }
}

/// Source of feature pyramids for rendered and query images.
pub trait FeatureExtractor: Send + Sync {
    fn num_levels(&self) -> usize;

    fn extract(&self, image: &Image) -> Result<FeaturePyramid>;

    /// A single 1-based level; implementations may skip the other levels.
    fn extract_level(&self, image: &Image, level: usize) -> Result<FeatureVolume> {
        let pyr = self.extract(image)?;
        Ok(pyr.level(level)?.clone())
    }

    /// Short human-readable description for provenance headers.
    fn describe(&self) -> String;
}
