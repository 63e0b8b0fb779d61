//! Harris corners with normalized intensity-patch descriptors, and the two
//! keypoint-matching scores (exhaustive and spatially windowed).

use super::Score;
use crate::error::{Error, Result};
use crate::renderer::Image;

const PATCH: usize = 8;
const HARRIS_K: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarrisConfig {
    pub max_keypoints: usize,
    /// Responses below this fraction of the strongest response are dropped.
    pub relative_threshold: f64,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        HarrisConfig {
            max_keypoints: 512,
            relative_threshold: 1e-3,
        }
    }
}

/// Keypoint positions (pixel coordinates of pixel centers) with unit-norm
/// descriptors, plus the image size they were detected in.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    keypoints: Vec<[f64; 2]>,
    descriptors: Vec<Vec<f32>>,
    width: u32,
    height: u32,
}

impl KeypointSet {
    pub fn new(keypoints: Vec<[f64; 2]>, descriptors: Vec<Vec<f32>>, width: u32, height: u32) -> Result<Self> {
        if keypoints.len() != descriptors.len() {
            return Err(Error::LengthMismatch(format!(
                "{} keypoints but {} descriptors",
                keypoints.len(),
                descriptors.len()
            )));
        }
        for (i, k) in keypoints.iter().enumerate() {
            if !(k[0] >= 0.0 && k[0] <= width as f64 && k[1] >= 0.0 && k[1] <= height as f64) {
                return Err(Error::InvalidArgument(format!(
                    "keypoint {i} at {k:?} outside {width}x{height} image"
                )));
            }
        }
        let dim = descriptors.first().map(Vec::len);
        for (i, d) in descriptors.iter().enumerate() {
            if Some(d.len()) != dim {
                return Err(Error::ShapeMismatch(format!("descriptor {i} has length {}", d.len())));
            }
            let n = d.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!("descriptor {i} has norm {n}")));
            }
        }
        Ok(KeypointSet {
            keypoints,
            descriptors,
            width,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    pub fn keypoints(&self) -> &[[f64; 2]] {
        &self.keypoints
    }

    pub fn descriptors(&self) -> &[Vec<f32>] {
        &self.descriptors
    }

    /// Score returned when no matches exist: squared image diagonal.
    pub fn worst_score(&self) -> f64 {
        let (w, h) = (self.width as f64, self.height as f64);
        w * w + h * h
    }
}

fn gray(image: &Image) -> Vec<f64> {
    image
        .as_raw()
        .chunks_exact(3)
        .map(|p| (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0)
        .collect()
}

fn gaussian_smooth(src: &[f64], w: usize, h: usize, sigma: f64, radius: usize) -> Vec<f64> {
    let kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|k| k / total).collect();
    let r = radius as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * src[y * w + clamp(x as isize + i as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[clamp(y as isize + i as isize - r, h) * w + x])
                .sum();
        }
    }
    out
}

/// Harris response: Sobel gradients, structure tensor smoothed over a 5x5
/// Gaussian window, `det - k * trace^2`.
pub(crate) fn harris_response(image: &Image) -> Vec<f64> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let g = gray(image);
    let at = |x: isize, y: isize| g[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize];
    let mut ixx = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let sxx = gaussian_smooth(&ixx, w, h, 1.0, 2);
    let syy = gaussian_smooth(&iyy, w, h, 1.0, 2);
    let sxy = gaussian_smooth(&ixy, w, h, 1.0, 2);
    (0..w * h)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let tr = sxx[i] + syy[i];
            det - HARRIS_K * tr * tr
        })
        .collect()
}

fn patch_descriptor(g: &[f64], w: usize, h: usize, x: usize, y: usize) -> Option<Vec<f32>> {
    let half = (PATCH / 2) as isize;
    let mut patch = Vec::with_capacity(PATCH * PATCH);
    for dy in -half..half {
        for dx in -half..half {
            let px = (x as isize + dx).clamp(0, w as isize - 1) as usize;
            let py = (y as isize + dy).clamp(0, h as isize - 1) as usize;
            patch.push(g[py * w + px]);
        }
    }
    let mean = patch.iter().sum::<f64>() / patch.len() as f64;
    patch.iter_mut().for_each(|v| *v -= mean);
    let norm = patch.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return None;
    }
    Some(patch.iter().map(|v| (v / norm) as f32).collect())
}

pub fn detect_keypoints(image: &Image) -> Result<KeypointSet> {
    detect_keypoints_with(image, &HarrisConfig::default())
}

/// Top-N local maxima of the Harris response, strongest first (ties in
/// row-major order).
pub fn detect_keypoints_with(image: &Image, config: &HarrisConfig) -> Result<KeypointSet> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    if w < 32 || h < 32 {
        return Err(Error::ImageTooSmall(format!(
            "{w}x{h} image, keypoint detection needs at least 32x32"
        )));
    }
    let response = harris_response(image);
    let max = response.iter().copied().fold(0.0f64, f64::max);
    let threshold = (max * config.relative_threshold).max(1e-12);
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let r = response[y * w + x];
            if r <= threshold {
                continue;
            }
            let is_max = (y.saturating_sub(1)..=(y + 1).min(h - 1)).all(|ny| {
                (x.saturating_sub(1)..=(x + 1).min(w - 1)).all(|nx| {
                    let o = response[ny * w + nx];
                    // earlier pixels must be strictly lower so plateaus keep one point
                    if ny * w + nx < y * w + x {
                        o < r
                    } else {
                        o <= r
                    }
                })
            });
            if is_max {
                candidates.push((r, y * w + x));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let g = gray(image);
    let mut keypoints = Vec::new();
    let mut descriptors = Vec::new();
    for &(_, idx) in &candidates {
        if keypoints.len() >= config.max_keypoints {
            break;
        }
        let (x, y) = (idx % w, idx / w);
        if let Some(d) = patch_descriptor(&g, w, h, x, y) {
            keypoints.push([x as f64 + 0.5, y as f64 + 0.5]);
            descriptors.push(d);
        }
    }
    KeypointSet::new(keypoints, descriptors, w as u32, h as u32)
}

fn descriptor_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

fn spatial_sq(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Nearest neighbor in descriptor space among admissible targets; ties go
/// to the lower index.
fn nearest(
    from: &KeypointSet,
    to: &KeypointSet,
    i: usize,
    admissible: &dyn Fn(&[f64; 2], &[f64; 2]) -> bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..to.len() {
        if !admissible(&from.keypoints[i], &to.keypoints[j]) {
            continue;
        }
        let d = descriptor_distance(&from.descriptors[i], &to.descriptors[j]);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.map(|b| b.0)
}

fn mutual_match_score(
    query: &KeypointSet,
    target: &KeypointSet,
    admissible: &dyn Fn(&[f64; 2], &[f64; 2]) -> bool,
) -> Result<Score> {
    let forward: Vec<Option<usize>> = (0..query.len()).map(|i| nearest(query, target, i, admissible)).collect();
    let backward: Vec<Option<usize>> = (0..target.len()).map(|j| nearest(target, query, j, admissible)).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, f) in forward.iter().enumerate() {
        if let Some(j) = *f {
            if backward[j] == Some(i) {
                total += spatial_sq(&query.keypoints[i], &target.keypoints[j]);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Score::new(query.worst_score().max(target.worst_score()));
    }
    Score::new(total / count as f64)
}

/// Mean squared pixel displacement over mutual nearest-neighbor descriptor matches.
pub fn match_score_exhaustive(query: &KeypointSet, target: &KeypointSet) -> Result<Score> {
    mutual_match_score(query, target, &|_, _| true)
}

/// As [`match_score_exhaustive`], restricted to pairs at most `window`
/// pixels apart.
pub fn match_score_patchwise(query: &KeypointSet, target: &KeypointSet, window: f64) -> Result<Score> {
    if !(window > 0.0) {
        return Err(Error::InvalidArgument(format!("window must be positive, got {window}")));
    }
    let w2 = window * window;
    mutual_match_score(query, target, &|a, b| spatial_sq(a, b) <= w2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f32> {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| (x / n) as f32).collect()
    }

    pub(crate) fn random_set(rng: &mut ChaCha8Rng, n: usize, offset: [f64; 2]) -> KeypointSet {
        let mut kps = Vec::new();
        let mut descs = Vec::new();
        for _ in 0..n {
            kps.push([rng.random_range(10.0..100.0) + offset[0], rng.random_range(10.0..80.0) + offset[1]]);
            descs.push(random_unit(rng, 16));
        }
        KeypointSet::new(kps, descs, 128, 96).unwrap()
    }

    fn shifted(set: &KeypointSet, off: [f64; 2]) -> KeypointSet {
        let kps = set.keypoints().iter().map(|k| [k[0] + off[0], k[1] + off[1]]).collect();
        KeypointSet::new(kps, set.descriptors().to_vec(), 128, 96).unwrap()
    }

    #[test]
    fn uniform_image_has_no_keypoints() {
        let img = Image::from_pixel(48, 48, image::Rgb([0.5; 3]));
        assert!(detect_keypoints(&img).unwrap().is_empty());
    }

    #[test]
    fn white_pixel_detected_nearby() {
        let mut img = Image::new(48, 48);
        img.put_pixel(20, 30, image::Rgb([1.0; 3]));
        let set = detect_keypoints(&img).unwrap();
        assert!(!set.is_empty());
        // independent check: the Harris response peaks within the 5x5 neighborhood
        let resp = harris_response(&img);
        let (mut best, mut arg) = (f64::MIN, 0);
        for (i, &r) in resp.iter().enumerate() {
            if r > best {
                best = r;
                arg = i;
            }
        }
        let (ax, ay) = ((arg % 48) as f64, (arg / 48) as f64);
        assert!((ax - 20.0).abs() <= 2.0 && (ay - 30.0).abs() <= 2.0);
        let k = set.keypoints()[0];
        assert!((k[0] - 20.5).abs() <= 2.0 && (k[1] - 30.5).abs() <= 2.0, "{k:?}");
    }

    #[test]
    fn detection_is_deterministic() {
        let img = Image::from_fn(64, 64, |x, y| image::Rgb([((x / 8 + y / 8) % 2) as f32, 0.3, (x % 3) as f32 / 3.0]));
        assert_eq!(detect_keypoints(&img).unwrap(), detect_keypoints(&img).unwrap());
    }

    #[test]
    fn exhaustive_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_set(&mut rng, 20, [0.0, 0.0]);
        assert_eq!(match_score_exhaustive(&a, &a).unwrap().value(), 0.0);
        let b = shifted(&a, [3.0, 4.0]);
        assert!((match_score_exhaustive(&a, &b).unwrap().value() - 25.0).abs() < 1e-9);
        let empty = KeypointSet::new(vec![], vec![], 128, 96).unwrap();
        assert_eq!(match_score_exhaustive(&a, &empty).unwrap().value(), 128.0 * 128.0 + 96.0 * 96.0);
    }

    #[test]
    fn patchwise_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_set(&mut rng, 15, [0.0, 0.0]);
        let b = shifted(&a, [3.0, 4.0]);
        assert!((match_score_patchwise(&a, &b, 8.0).unwrap().value() - 25.0).abs() < 1e-9);
        let diag = (128.0f64).hypot(96.0);
        assert_eq!(
            match_score_patchwise(&a, &b, diag).unwrap(),
            match_score_exhaustive(&a, &b).unwrap()
        );
        // every pair is separated by 2W = 10 > W
        let far = shifted(&a, [6.0, 8.0]);
        let single = KeypointSet::new(vec![a.keypoints()[0]], vec![a.descriptors()[0].clone()], 128, 96).unwrap();
        let single_far = shifted(&single, [6.0, 8.0]);
        assert_eq!(
            match_score_patchwise(&single, &single_far, 5.0).unwrap().value(),
            single.worst_score()
        );
        assert!(match_score_patchwise(&a, &far, 0.0).is_err());
    }

    #[test]
    fn keypoint_set_validation() {
        assert!(KeypointSet::new(vec![[1.0, 1.0]], vec![], 10, 10).is_err());
        assert!(KeypointSet::new(vec![[11.0, 1.0]], vec![vec![1.0]], 10, 10).is_err());
        assert!(KeypointSet::new(vec![[1.0, 1.0]], vec![vec![0.5]], 10, 10).is_err());
    }
}
