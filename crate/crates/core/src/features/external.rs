//! Precomputed features looked up by image content.
//!
//! A directory holds one `<digest>.fpyr` file per image, where `<digest>`
//! is [`image_digest`] of the exact float image the features were computed
//! from. An external network can populate it offline for the renders and
//! queries a run will touch.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{load_external_features, FeatureExtractor, FeaturePyramid};
use crate::error::{Error, Result};
use crate::renderer::Image;

/// Hex SHA-256 over width, height and the little-endian `f32` pixels.
pub fn image_digest(image: &Image) -> String {
    let mut h = Sha256::new();
    h.update(image.width().to_le_bytes());
    h.update(image.height().to_le_bytes());
    for v in image.as_raw() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone)]
pub struct ExternalFeatures {
    dir: PathBuf,
    levels: usize,
}

impl ExternalFeatures {
    /// Opens a feature directory; the level count is read from the first
    /// `.fpyr` file found (in name order).
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "fpyr"))
            .collect();
        files.sort();
        let first = files.first().ok_or_else(|| {
            Error::External(format!("no .fpyr files in {}", dir.display()))
        })?;
        let levels = load_external_features(first)?.num_levels();
        Ok(ExternalFeatures { dir, levels })
    }

    pub fn path_for(&self, image: &Image) -> PathBuf {
        self.dir.join(format!("{}.fpyr", image_digest(image)))
    }
}

impl FeatureExtractor for ExternalFeatures {
    fn num_levels(&self) -> usize {
        self.levels
    }

    fn extract(&self, image: &Image) -> Result<FeaturePyramid> {
        let path = self.path_for(image);
        if !path.exists() {
            return Err(Error::External(format!(
                "no precomputed features for {}x{} image (expected {})",
                image.width(),
                image.height(),
                path.display()
            )));
        }
        let pyr = load_external_features(&path)?;
        if pyr.num_levels() != self.levels {
            return Err(Error::External(format!(
                "{} has {} levels, directory uses {}",
                path.display(),
                pyr.num_levels(),
                self.levels
            )));
        }
        Ok(pyr)
    }

    fn describe(&self) -> String {
        format!("external({})", self.dir.display())
    }
}
