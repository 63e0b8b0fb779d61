//! Particle-filter machinery: particles, beams, candidate sampling, ranking
//! and cross-beam resampling.
//!
//! A beam keeps its incumbent best particle and, every step, draws
//! candidates around it. The incumbent itself always occupies the first
//! candidate slot, so within a segment of constant feature level and
//! resolution the best score never increases. Every `resample_interval`
//! steps the beams' bests are pooled, sorted, and used to reseed the beams
//! with fresh random streams.

mod schedule;

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::Score;
use crate::geometry::{perturb_pose, Pose};
use crate::seed;

pub use schedule::{LevelStage, Preset, Schedule, StepPlan, CONFIG_KEYS, VERTICAL_DAMPING};

/// A pose hypothesis and its score (lower is better).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub pose: Pose,
    pub weight: Score,
}

impl Particle {
    pub fn unscored(pose: Pose) -> Particle {
        Particle {
            pose,
            weight: Score::WORST,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseState {
    pub trans_sigma: Vector3<f64>,
    pub rot_mag: f64,
}

/// An independently evolving particle set with its own random stream.
#[derive(Debug, Clone)]
pub struct Beam {
    pub particles: Vec<Particle>,
    pub best: Particle,
    pub noise: Option<NoiseState>,
    rng: ChaCha8Rng,
    index: usize,
    epoch: u64,
}

impl Beam {
    /// Beam `index` seeded at `pose`, with the stream for resampling epoch 0.
    pub fn new(index: usize, pose: Pose, master_seed: u64) -> Beam {
        Beam::seeded(index, 0, Particle::unscored(pose), master_seed)
    }

    fn seeded(index: usize, epoch: u64, best: Particle, master_seed: u64) -> Beam {
        Beam {
            particles: Vec::new(),
            best,
            noise: None,
            rng: seed::stream(master_seed, &[index as u64, epoch]),
            index,
            epoch,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// `plan.n_candidates` poses: the incumbent best first, then perturbed copies of it.
    pub fn sample_candidates(&mut self, plan: &StepPlan) -> Vec<Pose> {
        self.noise = Some(NoiseState {
            trans_sigma: plan.trans_sigma,
            rot_mag: plan.rot_mag,
        });
        let n = plan.n_candidates.max(1);
        let base = self.best.pose;
        let mut out = Vec::with_capacity(n);
        out.push(base);
        for _ in 1..n {
            out.push(perturb_pose(&base, plan.trans_sigma, plan.rot_mag, &mut self.rng));
        }
        out
    }

    /// Replaces the particle set with the scored candidates and takes the
    /// lowest score as the new best (earliest index wins ties).
    pub fn rank_and_update(&mut self, candidates: &[Pose], scores: &[Score]) -> Result<()> {
        if candidates.len() != scores.len() {
            return Err(Error::LengthMismatch(format!(
                "{} candidates but {} scores",
                candidates.len(),
                scores.len()
            )));
        }
        if candidates.is_empty() {
            return Err(Error::EmptyInput("no candidates to rank".into()));
        }
        self.particles = candidates
            .iter()
            .zip(scores)
            .map(|(&pose, &weight)| Particle { pose, weight })
            .collect();
        let mut best = self.particles[0];
        for p in &self.particles[1..] {
            if p.weight.value() < best.weight.value() {
                best = *p;
            }
        }
        self.best = best;
        Ok(())
    }
}

/// Pools the beams' best particles, sorts them by score (stable), and
/// reseeds beam `k` with the `k`-th best. Each new beam gets a fresh stream
/// derived from `(master_seed, k, epoch)` and a cleared noise state.
pub fn resample_beams(beams: Vec<Beam>, master_seed: u64, epoch: u64) -> Result<Vec<Beam>> {
    if beams.is_empty() {
        return Err(Error::EmptyInput("no beams to resample".into()));
    }
    let mut pool: Vec<Particle> = beams.iter().map(|b| b.best).collect();
    pool.sort_by(|a, b| a.weight.value().total_cmp(&b.weight.value()));
    Ok((0..beams.len())
        .map(|k| Beam::seeded(k, epoch, pool[k % pool.len()], master_seed))
        .collect())
}

/// Lowest-score best across beams; the lowest beam index wins ties.
pub fn best_of(beams: &[Beam]) -> Option<&Particle> {
    beams
        .iter()
        .map(|b| &b.best)
        .reduce(|acc, p| if p.weight.value() < acc.weight.value() { p } else { acc })
}
