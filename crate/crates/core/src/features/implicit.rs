//! Implicit matching: compare the location of each channel's strongest
//! response after Gaussian smoothing.

use super::{FeaturePyramid, FeatureVolume, Score};
use crate::error::{Error, Result};

/// Smooths a channel with a `window x window` Gaussian (`sigma = window / 6`)
/// and returns the `(h, w)` of its maximum, first occurrence in row-major order.
fn smoothed_argmax(map: &[f32], h: usize, w: usize, window: usize) -> (usize, usize) {
    let smoothed: Vec<f64> = if window <= 1 {
        map.iter().map(|&v| v as f64).collect()
    } else {
        let radius = (window / 2) as isize;
        let sigma = window as f64 / 6.0;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
        let mut tmp = vec![0.0f64; h * w];
        for y in 0..h {
            for x in 0..w {
                tmp[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, k)| k * map[y * w + clamp(x as isize + i as isize - radius, w)] as f64)
                    .sum::<f64>()
                    / total;
            }
        }
        let mut out = vec![0.0f64; h * w];
        for y in 0..h {
            for x in 0..w {
                out[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(i, k)| k * tmp[clamp(y as isize + i as isize - radius, h) * w + x])
                    .sum::<f64>()
                    / total;
            }
        }
        out
    };
    let mut best = 0;
    for (i, &v) in smoothed.iter().enumerate() {
        if v > smoothed[best] {
            best = i;
        }
    }
    (best / w, best % w)
}

/// Mean over channels of the squared displacement between per-channel maxima.
pub fn implicit_match_distance(query: &FeatureVolume, candidate: &FeatureVolume, window: usize) -> Result<Score> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing window must be odd and >= 1, got {window}"
        )));
    }
    if query.shape() != candidate.shape() {
        return Err(Error::ShapeMismatch(format!(
            "query level is {:?}, candidate level is {:?}",
            query.shape(),
            candidate.shape()
        )));
    }
    let (c, h, w) = query.shape();
    let total: f64 = (0..c)
        .map(|ch| {
            let (qh, qw) = smoothed_argmax(query.channel(ch), h, w, window);
            let (th, tw) = smoothed_argmax(candidate.channel(ch), h, w, window);
            let dh = qh as f64 - th as f64;
            let dw = qw as f64 - tw as f64;
            dh * dh + dw * dw
        })
        .sum();
    Score::new(total / c as f64)
}

pub fn implicit_match_score(
    query: &FeaturePyramid,
    candidate: &FeaturePyramid,
    level: usize,
    window: usize,
) -> Result<Score> {
    implicit_match_distance(query.level(level)?, candidate.level(level)?, window)
}
