//! The per-query refinement loop.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{
    dense_distance, detect_keypoints, implicit_match_distance, match_score_exhaustive,
    match_score_patchwise, FeatureExtractor, FeatureVolume, KeypointSet, Score,
};
use crate::filter::{best_of, resample_beams, Beam, LevelStage, Schedule, StepPlan};
use crate::geometry::{Intrinsics, Pose};
use crate::renderer::{render, resize_image, Image, Scene, ShadingMode};
use crate::seed;

/// Relative aspect-ratio mismatch tolerated between query and camera.
const ASPECT_TOLERANCE: f64 = 0.02;

/// How rendered candidates are compared with the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scorer {
    /// Dense feature distance at the scheduled pyramid level.
    Dense,
    /// Harris keypoints matched over the whole image.
    Exhaustive,
    /// Harris keypoints matched within a window, in pixels.
    Patchwise(f64),
    /// Smoothed per-channel argmax displacement with an odd window.
    Implicit(usize),
}

impl Scorer {
    fn uses_features(self) -> bool {
        matches!(self, Scorer::Dense | Scorer::Implicit(_))
    }
}

impl fmt::Display for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scorer::Dense => f.write_str("dense"),
            Scorer::Exhaustive => f.write_str("exhaustive"),
            Scorer::Patchwise(w) => write!(f, "patchwise:{w}"),
            Scorer::Implicit(w) => write!(f, "implicit:{w}"),
        }
    }
}

impl FromStr for Scorer {
    type Err = Error;

    /// `dense`, `exhaustive`, `patchwise[:W]` (default 16) or `implicit[:W]` (default 5).
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad_arg = |a: &str| Error::config("scorer", format!("invalid window `{a}` in `{s}`"));
        match (name, arg) {
            ("dense", None) => Ok(Scorer::Dense),
            ("exhaustive", None) => Ok(Scorer::Exhaustive),
            ("patchwise", None) => Ok(Scorer::Patchwise(16.0)),
            ("patchwise", Some(a)) => match a.parse::<f64>() {
                Ok(w) if w > 0.0 && w.is_finite() => Ok(Scorer::Patchwise(w)),
                _ => Err(bad_arg(a)),
            },
            ("implicit", None) => Ok(Scorer::Implicit(5)),
            ("implicit", Some(a)) => match a.parse::<usize>() {
                Ok(w) if w % 2 == 1 => Ok(Scorer::Implicit(w)),
                _ => Err(bad_arg(a)),
            },
            _ => Err(Error::config(
                "scorer",
                format!("unknown scorer `{s}` (valid: dense, exhaustive, patchwise[:W], implicit[:W])"),
            )),
        }
    }
}

/// Best hypothesis across beams after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub pose: Pose,
    pub score: Score,
    pub level: LevelStage,
    /// `(height, width)` of the renders used at this step.
    pub resolution: (u32, u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub final_pose: Pose,
    pub trajectory: Vec<TrajectoryStep>,
    /// Seconds.
    pub wall_time: f64,
}

pub const TRAJECTORY_HEADER: &str = "step,level,resolution_h,resolution_w,score,qw,qx,qy,qz,cx,cy,cz";

impl RefineResult {
    /// Trajectory CSV with a leading `# comment` line. Wall time is left out
    /// so that repeated runs produce identical bytes.
    pub fn trajectory_csv(&self, comment: &str) -> String {
        let mut out = format!("# {comment}\n{TRAJECTORY_HEADER}\n");
        for t in &self.trajectory {
            let q = t.pose.quat();
            let c = t.pose.center();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t.step,
                t.level,
                t.resolution.0,
                t.resolution.1,
                t.score.value(),
                q.w,
                q.x,
                q.y,
                q.z,
                c.x,
                c.y,
                c.z
            );
        }
        out
    }
}

/// A named query image.
#[derive(Debug, Clone)]
pub struct Query {
    pub name: String,
    pub image: Image,
}

/// Seed used for a query inside a batch run.
pub fn query_seed(master: u64, name: &str) -> u64 {
    seed::derive_seed(master, &[seed::name_id(name)])
}

enum QueryRepr {
    Features(FeatureVolume),
    Keypoints(KeypointSet),
}

/// Everything needed to refine queries against one scene.
#[derive(Clone, Copy)]
pub struct Refiner<'a> {
    pub scene: &'a Scene,
    pub intrinsics: &'a Intrinsics,
    pub schedule: &'a Schedule,
    pub scorer: Scorer,
    pub extractor: &'a dyn FeatureExtractor,
    pub shading: ShadingMode,
}

impl<'a> Refiner<'a> {
    fn check(&self, query: &Image) -> Result<()> {
        self.schedule.validate()?;
        self.intrinsics.validate()?;
        if self.scene.is_empty() {
            return Err(Error::InvalidScene("scene has no triangles".into()));
        }
        let aspect = query.width() as f64 / query.height() as f64;
        let expected = self.intrinsics.aspect();
        if (aspect / expected - 1.0).abs() > ASPECT_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "query is {}x{} (aspect {aspect:.4}) but the camera aspect is {expected:.4}",
                query.width(),
                query.height()
            )));
        }
        Ok(())
    }

    fn represent(&self, image: &Image, level: usize) -> Result<QueryRepr> {
        Ok(if self.scorer.uses_features() {
            QueryRepr::Features(self.extractor.extract_level(image, level)?)
        } else {
            QueryRepr::Keypoints(detect_keypoints(image)?)
        })
    }

    fn score_candidate(&self, query: &QueryRepr, pose: &Pose, intr: &Intrinsics, level: usize) -> Result<Score> {
        let view = render(self.scene, pose, intr, self.shading)?;
        let cand = self.represent(&view.image, level)?;
        match (query, cand, self.scorer) {
            (QueryRepr::Features(q), QueryRepr::Features(c), Scorer::Implicit(w)) => implicit_match_distance(q, &c, w),
            (QueryRepr::Features(q), QueryRepr::Features(c), _) => dense_distance(q, &c),
            (QueryRepr::Keypoints(q), QueryRepr::Keypoints(c), Scorer::Patchwise(w)) => match_score_patchwise(q, &c, w),
            (QueryRepr::Keypoints(q), QueryRepr::Keypoints(c), _) => match_score_exhaustive(q, &c),
            _ => unreachable!("query and candidate representations always agree"),
        }
    }

    /// Refines `init` against `query` following the schedule.
    pub fn refine(&self, query: &Image, init: &Pose) -> Result<RefineResult> {
        self.check(query)?;
        let started = Instant::now();
        let sched = self.schedule;
        let levels = self.extractor.num_levels();
        let mut cache: HashMap<(u32, usize), QueryRepr> = HashMap::new();
        let mut beams: Vec<Beam> = (0..sched.beams).map(|b| Beam::new(b, *init, sched.seed)).collect();
        let mut trajectory = Vec::with_capacity(sched.total_steps);

        for step in 0..sched.total_steps {
            let plan: StepPlan = sched.schedule_at(step)?;
            if sched.is_resample_step(step) {
                let epoch = (step / sched.resample_interval) as u64;
                beams = resample_beams(beams, sched.seed, epoch)?;
            }
            // never render above the query's own resolution
            let height = plan.res_height.min((query.height() / 8 * 8).max(8));
            let intr = self.intrinsics.at_height(height);
            let level = plan.level.level_index(levels);
            let key = (height, level);
            if !cache.contains_key(&key) {
                let resized = resize_image(query, intr.width, intr.height);
                cache.insert(key, self.represent(&resized, level)?);
            }
            let query_repr = &cache[&key];

            let candidates: Vec<Vec<Pose>> = beams.iter_mut().map(|b| b.sample_candidates(&plan)).collect();
            let scores: Vec<Vec<Score>> = candidates
                .par_iter()
                .map(|cands| {
                    cands
                        .par_iter()
                        .map(|p| self.score_candidate(query_repr, p, &intr, level))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            for ((beam, cands), s) in beams.iter_mut().zip(&candidates).zip(&scores) {
                beam.rank_and_update(cands, s)?;
            }

            let best = best_of(&beams).expect("at least one beam");
            log::debug!("step {step} {} {}x{} best {}", plan.level, intr.height, intr.width, best.weight);
            trajectory.push(TrajectoryStep {
                step,
                pose: best.pose,
                score: best.weight,
                level: plan.level,
                resolution: (intr.height, intr.width),
            });
        }

        let final_pose = trajectory.last().map(|t| t.pose).unwrap_or(*init);
        Ok(RefineResult {
            final_pose,
            trajectory,
            wall_time: started.elapsed().as_secs_f64(),
        })
    }

    /// Refines each query from its initial pose, in parallel. Query `i` runs
    /// with seed [`query_seed`]`(schedule.seed, name_i)`, so results do not
    /// depend on the order of the batch.
    pub fn refine_batch(&self, queries: &[Query], inits: &[Pose]) -> Result<Vec<RefineResult>> {
        if queries.len() != inits.len() {
            return Err(Error::LengthMismatch(format!(
                "{} queries but {} initial poses",
                queries.len(),
                inits.len()
            )));
        }
        queries
            .par_iter()
            .zip(inits.par_iter())
            .map(|(q, init)| {
                let schedule = Schedule {
                    seed: query_seed(self.schedule.seed, &q.name),
                    ..self.schedule.clone()
                };
                Refiner {
                    schedule: &schedule,
                    ..*self
                }
                .refine(&q.image, init)
            })
            .collect()
    }
}
