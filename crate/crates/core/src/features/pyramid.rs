//! Built-in feature pyramid: Gaussian scale space with per-color intensity
//! and gradient channels.
//!
//! Level `l` blurs the image with `sigma = 2^(l-1)` and samples it on a grid
//! of stride `2^l`. Each color channel contributes four maps: intensity
//! (centered on the level mean), horizontal and vertical central
//! differences, and gradient magnitude.

use super::{FeatureExtractor, FeaturePyramid, FeatureVolume, Provenance};
use crate::error::{Error, Result};
use crate::renderer::Image;

pub const MIN_IMAGE_SIZE: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSpec {
    /// Four maps per RGB channel (12 channels).
    Color,
    /// Four maps on the mean of RGB (4 channels).
    Gray,
}

impl ChannelSpec {
    pub fn channels(self) -> usize {
        match self {
            ChannelSpec::Color => 12,
            ChannelSpec::Gray => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PyramidConfig {
    pub levels: usize,
    pub channels: ChannelSpec,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig {
            levels: 3,
            channels: ChannelSpec::Color,
        }
    }
}

/// Per output sample: first source index and normalized weights, already
/// border-clamped into `(index, weight)` pairs.
fn blur_taps(src_len: usize, dst_len: usize, stride: usize, sigma: f64) -> Vec<Vec<(usize, f32)>> {
    let radius = (3.0 * sigma).ceil() as i64;
    (0..dst_len)
        .map(|j| {
            let center = (j as f64 + 0.5) * stride as f64 - 0.5;
            let lo = center.floor() as i64 - radius;
            let hi = center.ceil() as i64 + radius;
            let raw: Vec<(usize, f64)> = (lo..=hi)
                .map(|k| {
                    let d = k as f64 - center;
                    let w = (-d * d / (2.0 * sigma * sigma)).exp();
                    (k.clamp(0, src_len as i64 - 1) as usize, w)
                })
                .collect();
            let total: f64 = raw.iter().map(|t| t.1).sum();
            raw.into_iter().map(|(k, w)| (k, (w / total) as f32)).collect()
        })
        .collect()
}

/// Blurred and subsampled planes, one per input plane.
fn blur_subsample(planes: &[Vec<f32>], width: usize, height: usize, level: usize) -> (Vec<Vec<f32>>, usize, usize) {
    let stride = 1usize << level;
    let sigma = (1u64 << (level - 1)) as f64;
    let (ow, oh) = (width / stride, height / stride);
    let cols = blur_taps(width, ow, stride, sigma);
    let rows = blur_taps(height, oh, stride, sigma);
    let out = planes
        .iter()
        .map(|plane| {
            let mut tmp = vec![0.0f32; height * ow];
            for y in 0..height {
                let src = &plane[y * width..(y + 1) * width];
                let dst = &mut tmp[y * ow..(y + 1) * ow];
                for (d, taps) in dst.iter_mut().zip(&cols) {
                    *d = taps.iter().map(|&(k, w)| w * src[k]).sum();
                }
            }
            let mut res = vec![0.0f32; oh * ow];
            for (i, taps) in rows.iter().enumerate() {
                let dst = &mut res[i * ow..(i + 1) * ow];
                for &(k, w) in taps {
                    let src = &tmp[k * ow..(k + 1) * ow];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
            res
        })
        .collect();
    (out, ow, oh)
}

fn input_planes(image: &Image, spec: ChannelSpec) -> Vec<Vec<f32>> {
    let raw = image.as_raw();
    match spec {
        ChannelSpec::Color => (0..3)
            .map(|c| raw.iter().skip(c).step_by(3).copied().collect())
            .collect(),
        ChannelSpec::Gray => vec![raw
            .chunks_exact(3)
            .map(|p| (p[0] + p[1] + p[2]) / 3.0)
            .collect()],
    }
}

fn level_volume(planes: &[Vec<f32>], ow: usize, oh: usize) -> FeatureVolume {
    let n = ow * oh;
    let mut data = Vec::with_capacity(planes.len() * 4 * n);
    for plane in planes {
        let mean = (plane.iter().map(|&v| v as f64).sum::<f64>() / n as f64) as f32;
        data.extend(plane.iter().map(|&v| v - mean));
        let mut gx = vec![0.0f32; n];
        let mut gy = vec![0.0f32; n];
        for y in 0..oh {
            let up = y.saturating_sub(1);
            let down = (y + 1).min(oh - 1);
            for x in 0..ow {
                let left = x.saturating_sub(1);
                let right = (x + 1).min(ow - 1);
                gx[y * ow + x] = 0.5 * (plane[y * ow + right] - plane[y * ow + left]);
                gy[y * ow + x] = 0.5 * (plane[down * ow + x] - plane[up * ow + x]);
            }
        }
        let mag: Vec<f32> = gx.iter().zip(&gy).map(|(a, b)| (a * a + b * b).sqrt()).collect();
        data.extend(gx);
        data.extend(gy);
        data.extend(mag);
    }
    FeatureVolume {
        channels: planes.len() * 4,
        height: oh,
        width: ow,
        data,
    }
}

impl PyramidConfig {
    fn check(&self, image: &Image) -> Result<()> {
        let (w, h) = image.dimensions();
        if w < MIN_IMAGE_SIZE || h < MIN_IMAGE_SIZE {
            return Err(Error::ImageTooSmall(format!(
                "{w}x{h} image, feature extraction needs at least {MIN_IMAGE_SIZE}x{MIN_IMAGE_SIZE}"
            )));
        }
        if self.levels == 0 || self.levels > 16 || (w >> self.levels) == 0 || (h >> self.levels) == 0 {
            return Err(Error::ImageTooSmall(format!(
                "{w}x{h} image cannot hold {} pyramid levels",
                self.levels
            )));
        }
        if image.as_raw().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("image contains non-finite values".into()));
        }
        Ok(())
    }

    fn level_from_planes(&self, planes: &[Vec<f32>], image: &Image, level: usize) -> FeatureVolume {
        let (w, h) = image.dimensions();
        let (blurred, ow, oh) = blur_subsample(planes, w as usize, h as usize, level);
        level_volume(&blurred, ow, oh)
    }
}

pub fn extract_pyramid(image: &Image, config: &PyramidConfig) -> Result<FeaturePyramid> {
    config.check(image)?;
    let planes = input_planes(image, config.channels);
    let levels = (1..=config.levels)
        .map(|l| config.level_from_planes(&planes, image, l))
        .collect();
    FeaturePyramid::new(levels, Provenance::Builtin)
}

impl FeatureExtractor for PyramidConfig {
    fn num_levels(&self) -> usize {
        self.levels
    }

    fn extract(&self, image: &Image) -> Result<FeaturePyramid> {
        extract_pyramid(image, self)
    }

    fn extract_level(&self, image: &Image, level: usize) -> Result<FeatureVolume> {
        self.check(image)?;
        if level == 0 || level > self.levels {
            return Err(Error::LevelOutOfRange {
                level,
                levels: self.levels,
            });
        }
        let planes = input_planes(image, self.channels);
        Ok(self.level_from_planes(&planes, image, level))
    }

    fn describe(&self) -> String {
        format!("builtin(levels={},channels={:?})", self.levels, self.channels)
    }
}
