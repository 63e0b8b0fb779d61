use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{dense_distance, FeatureExtractor};
use crate::geometry::{exp_rotation, random_unit_vector, Intrinsics, Pose};
use crate::renderer::{render, Scene, ShadingMode};
use crate::seed;

/// One-dimensional slice through pose space. Rotations are in degrees,
/// translations in meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinAxis {
    /// Rotation about the world vertical.
    Yaw,
    /// Rotation about the camera's horizontal axis.
    Pitch,
    Tx,
    Ty,
    Tz,
    /// Translation along a seeded random direction.
    Random(u64),
}

impl BasinAxis {
    pub fn is_rotation(self) -> bool {
        matches!(self, BasinAxis::Yaw | BasinAxis::Pitch)
    }
}

impl fmt::Display for BasinAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasinAxis::Yaw => f.write_str("yaw"),
            BasinAxis::Pitch => f.write_str("pitch"),
            BasinAxis::Tx => f.write_str("tx"),
            BasinAxis::Ty => f.write_str("ty"),
            BasinAxis::Tz => f.write_str("tz"),
            BasinAxis::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl FromStr for BasinAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "yaw" => BasinAxis::Yaw,
            "pitch" => BasinAxis::Pitch,
            "tx" => BasinAxis::Tx,
            "ty" => BasinAxis::Ty,
            "tz" => BasinAxis::Tz,
            "random" => BasinAxis::Random(0),
            _ => match s.strip_prefix("random:").map(str::parse) {
                Some(Ok(seed)) => BasinAxis::Random(seed),
                _ => {
                    return Err(Error::config(
                        "axis",
                        format!("unknown axis `{s}` (valid: yaw, pitch, tx, ty, tz, random[:SEED])"),
                    ))
                }
            },
        })
    }
}

/// `pose` moved by `offset` along `axis`.
pub fn apply_offset(pose: &Pose, axis: BasinAxis, offset: f64) -> Pose {
    let rotate = |axis_world: Vector3<f64>| {
        let delta = exp_rotation(axis_world.normalize(), offset.to_radians()).expect("unit axis");
        pose.rotated(delta)
    };
    match axis {
        BasinAxis::Yaw => rotate(Vector3::y()),
        BasinAxis::Pitch => rotate(pose.rotation().row(0).transpose()),
        BasinAxis::Tx => pose.translated(Vector3::x() * offset),
        BasinAxis::Ty => pose.translated(Vector3::y() * offset),
        BasinAxis::Tz => pose.translated(Vector3::z() * offset),
        BasinAxis::Random(s) => {
            let dir = random_unit_vector(&mut seed::stream(s, &[]));
            pose.translated(dir * offset)
        }
    }
}

/// `n` evenly spaced offsets in `[-half_range, half_range]`; the middle one is exactly 0.
pub fn basin_offsets(half_range: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::config("samples", format!("must be odd so that offset 0 is sampled, got {n}")));
    }
    if !(half_range > 0.0 && half_range.is_finite()) {
        return Err(Error::config("range", format!("must be positive, got {half_range}")));
    }
    let m = (n / 2) as f64;
    Ok((0..n)
        .map(|i| if m == 0.0 { 0.0 } else { half_range * (i as f64 - m) / m })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinProfile {
    pub axis: BasinAxis,
    pub offsets: Vec<f64>,
    /// `scores[l][i]`: dense score at pyramid level `l + 1` and `offsets[i]`.
    pub scores: Vec<Vec<f64>>,
}

impl BasinProfile {
    pub fn num_levels(&self) -> usize {
        self.scores.len()
    }

    pub fn level_scores(&self, level: usize) -> Result<&[f64]> {
        self.scores
            .get(level.wrapping_sub(1))
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level,
                levels: self.scores.len(),
            })
    }

    /// Offset with the lowest score at `level` (first one on ties).
    pub fn argmin(&self, level: usize) -> Result<f64> {
        let s = self.level_scores(level)?;
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v < s[best] {
                best = i;
            }
        }
        Ok(self.offsets[best])
    }

    fn index_of(&self, offset: f64) -> Result<usize> {
        self.offsets
            .iter()
            .position(|o| (o - offset).abs() < 1e-9)
            .ok_or_else(|| Error::InvalidArgument(format!("offset {offset} was not sampled")))
    }

    /// `(score(offset) - score(0)) / |offset|`.
    pub fn slope_at(&self, level: usize, offset: f64) -> Result<f64> {
        let s = self.level_scores(level)?;
        let i = self.index_of(offset)?;
        let z = self.index_of(0.0)?;
        Ok((s[i] - s[z]) / offset.abs())
    }

    /// `offset,score` rows for one level after a `# comment` line.
    pub fn level_csv(&self, level: usize, comment: &str) -> Result<String> {
        let s = self.level_scores(level)?;
        let mut out = format!("# {comment}\noffset,score\n");
        for (o, v) in self.offsets.iter().zip(s) {
            let _ = writeln!(out, "{o},{v}");
        }
        Ok(out)
    }
}

/// Dense-score profile of views offset from `gt` along `axis` against the
/// view at `gt`, both rendered in `shading`.
#[allow(clippy::too_many_arguments)]
pub fn basin_profile(
    scene: &Scene,
    gt: &Pose,
    intr: &Intrinsics,
    axis: BasinAxis,
    half_range: f64,
    n_samples: usize,
    extractor: &dyn FeatureExtractor,
    shading: ShadingMode,
) -> Result<BasinProfile> {
    profile_between(scene, gt, intr, axis, half_range, n_samples, extractor, shading, shading)
}

#[allow(clippy::too_many_arguments)]
fn profile_between(
    scene: &Scene,
    gt: &Pose,
    intr: &Intrinsics,
    axis: BasinAxis,
    half_range: f64,
    n_samples: usize,
    extractor: &dyn FeatureExtractor,
    query_mode: ShadingMode,
    candidate_mode: ShadingMode,
) -> Result<BasinProfile> {
    let offsets = basin_offsets(half_range, n_samples)?;
    let query = extractor.extract(&render(scene, gt, intr, query_mode)?.image)?;
    let per_offset: Vec<Vec<f64>> = offsets
        .par_iter()
        .map(|&o| {
            let view = render(scene, &apply_offset(gt, axis, o), intr, candidate_mode)?;
            let cand = extractor.extract(&view.image)?;
            query
                .levels()
                .iter()
                .zip(cand.levels())
                .map(|(q, c)| dense_distance(q, c).map(|s| s.value()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let scores = (0..query.num_levels())
        .map(|l| per_offset.iter().map(|s| s[l]).collect())
        .collect();
    Ok(BasinProfile { axis, offsets, scores })
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("correlation needs at least two values".into()));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    if ra == rb {
        return Ok(if ra.iter().all(|r| *r == ra[0]) { 0.0 } else { 1.0 });
    }
    let mean = (a.len() - 1) as f64 / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Textured query against candidates rendered in every shading mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainShiftReport {
    pub modes: Vec<ShadingMode>,
    pub profiles: Vec<BasinProfile>,
    /// `correlations[m][l]`: Spearman correlation between the mode-`m`
    /// profile and the textured profile at level `l + 1`.
    pub correlations: Vec<Vec<f64>>,
}

impl DomainShiftReport {
    pub fn profile(&self, mode: ShadingMode) -> Option<&BasinProfile> {
        self.modes.iter().position(|m| *m == mode).map(|i| &self.profiles[i])
    }

    pub fn correlation(&self, mode: ShadingMode, level: usize) -> Option<f64> {
        let i = self.modes.iter().position(|m| *m == mode)?;
        self.correlations[i].get(level.checked_sub(1)?).copied()
    }

    /// Long-form `offset,mode,score,spearman` rows for one level.
    pub fn level_csv(&self, level: usize, comment: &str) -> Result<String> {
        let mut out = format!("# {comment}\noffset,mode,score,spearman\n");
        for (m, p) in self.modes.iter().zip(&self.profiles) {
            let s = p.level_scores(level)?;
            let rho = self.correlation(*m, level).unwrap_or(f64::NAN);
            for (o, v) in p.offsets.iter().zip(s) {
                let _ = writeln!(out, "{o},{m},{v},{rho}");
            }
        }
        Ok(out)
    }
}

/// Basin profiles for a textured query against every candidate shading mode.
#[allow(clippy::too_many_arguments)]
pub fn domain_shift_profile(
    scene: &Scene,
    gt: &Pose,
    intr: &Intrinsics,
    axis: BasinAxis,
    half_range: f64,
    n_samples: usize,
    extractor: &dyn FeatureExtractor,
) -> Result<DomainShiftReport> {
    let modes = ShadingMode::ALL.to_vec();
    let profiles = modes
        .iter()
        .map(|&m| profile_between(scene, gt, intr, axis, half_range, n_samples, extractor, ShadingMode::Textured, m))
        .collect::<Result<Vec<_>>>()?;
    let reference = &profiles[modes.iter().position(|m| *m == ShadingMode::Textured).expect("textured mode")];
    let correlations = profiles
        .iter()
        .map(|p| {
            (0..p.num_levels())
                .map(|l| spearman(&reference.scores[l], &p.scores[l]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DomainShiftReport {
        modes,
        profiles,
        correlations,
    })
}
