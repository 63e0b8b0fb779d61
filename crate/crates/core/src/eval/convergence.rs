use std::fmt::Write as _;

use rayon::prelude::*;

use super::lower_median;
use crate::error::{Error, Result};
use crate::filter::{Schedule, VERTICAL_DAMPING};
use crate::geometry::{perturb_pose_exact, pose_error, Pose};
use crate::refiner::Refiner;
use crate::renderer::{render, ShadingMode};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub median_trans: f64,
    pub median_rot: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceMatrix {
    pub trans_mags: Vec<f64>,
    pub rot_mags: Vec<f64>,
    /// `cells[i][j]` for `trans_mags[i]` and `rot_mags[j]`.
    pub cells: Vec<Vec<CellSummary>>,
}

impl ConvergenceMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.trans_mags.len(), self.rot_mags.len())
    }

    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = format!("# {comment}\ntrans_mag,rot_mag,median_trans_err,median_rot_err,runs\n");
        for (t, row) in self.trans_mags.iter().zip(&self.cells) {
            for (r, c) in self.rot_mags.iter().zip(row) {
                let _ = writeln!(out, "{t},{r},{},{},{}", c.median_trans, c.median_rot, c.runs);
            }
        }
        out
    }
}

/// For every `(t, r)` cell, perturbs each ground-truth pose `repeats` times
/// by exactly `t` meters and `r` degrees, refines from there against a
/// textured render of the ground truth, and records the median final error.
///
/// Run `(i, j, g, k)` uses perturbation stream `(seed, i, j, g, k)` and
/// refinement seed `(seed, i, j, g, k, 1)`, where `seed` is the refiner's
/// schedule seed, so cells are reproducible and independent.
pub fn convergence_study(
    refiner: &Refiner<'_>,
    gt_poses: &[Pose],
    trans_mags: &[f64],
    rot_mags: &[f64],
    repeats: usize,
) -> Result<ConvergenceMatrix> {
    if repeats == 0 {
        return Err(Error::config("repeats", "must be at least 1"));
    }
    if gt_poses.is_empty() {
        return Err(Error::EmptyInput("no ground-truth poses".into()));
    }
    for &m in trans_mags.iter().chain(rot_mags) {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::config("magnitudes", format!("must be finite and >= 0, got {m}")));
        }
    }
    let master = refiner.schedule.seed;
    let queries = gt_poses
        .par_iter()
        .map(|gt| Ok(render(refiner.scene, gt, refiner.intrinsics, ShadingMode::Textured)?.image))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for i in 0..trans_mags.len() {
        for j in 0..rot_mags.len() {
            for g in 0..gt_poses.len() {
                for k in 0..repeats {
                    jobs.push((i, j, g, k));
                }
            }
        }
    }
    let errors = jobs
        .par_iter()
        .map(|&(i, j, g, k)| {
            let path = [i as u64, j as u64, g as u64, k as u64];
            let mut rng = seed::stream(master, &path);
            let init = perturb_pose_exact(&gt_poses[g], trans_mags[i], rot_mags[j], VERTICAL_DAMPING, &mut rng);
            let schedule = Schedule {
                seed: seed::derive_seed(master, &[path[0], path[1], path[2], path[3], 1]),
                ..refiner.schedule.clone()
            };
            let run = Refiner {
                schedule: &schedule,
                ..*refiner
            };
            let res = run.refine(&queries[g], &init)?;
            Ok(pose_error(&res.final_pose, &gt_poses[g]))
        })
        .collect::<Result<Vec<_>>>()?;

    let per_cell = gt_poses.len() * repeats;
    let mut cells = Vec::with_capacity(trans_mags.len());
    for i in 0..trans_mags.len() {
        let mut row = Vec::with_capacity(rot_mags.len());
        for j in 0..rot_mags.len() {
            let start = (i * rot_mags.len() + j) * per_cell;
            let errs = &errors[start..start + per_cell];
            let t: Vec<f64> = errs.iter().map(|e| e.trans_err).collect();
            let r: Vec<f64> = errs.iter().map(|e| e.rot_err).collect();
            row.push(CellSummary {
                median_trans: lower_median(&t)?,
                median_rot: lower_median(&r)?,
                runs: per_cell,
            });
        }
        cells.push(row);
    }
    Ok(ConvergenceMatrix {
        trans_mags: trans_mags.to_vec(),
        rot_mags: rot_mags.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::PyramidConfig;
    use crate::geometry::Intrinsics;
    use crate::refiner::Scorer;
    use crate::renderer::{RoomLayout, SyntheticSpec};
    use nalgebra::Vector3;

    #[test]
    fn zero_magnitudes_are_a_fixed_point_and_shape_matches() {
        let layout = RoomLayout::generate(&SyntheticSpec {
            seed: 2,
            dims: [6.0, 3.0, 6.0],
            objects: 3,
        })
        .unwrap();
        let intr = Intrinsics::new(48.0, 48.0, 32.0, 24.0, 64, 48).unwrap();
        let gt = Pose::look_at(Vector3::new(1.0, 1.4, 1.0), Vector3::new(5.0, 1.2, 5.0)).unwrap();
        let sched = Schedule {
            total_steps: 2,
            resample_interval: 2,
            n1: 1,
            fine_tail: 1,
            beams: 1,
            candidates_start: 3,
            candidates_end: 3,
            res_low: 32,
            res_high: 32,
            trans_sigma: 0.1,
            rot_mag: 1.0,
            seed: 4,
        };
        let ext = PyramidConfig::default();
        let r = Refiner {
            scene: &layout.scene,
            intrinsics: &intr,
            schedule: &sched,
            scorer: Scorer::Dense,
            extractor: &ext,
            shading: ShadingMode::Textured,
        };
        let m = convergence_study(&r, &[gt], &[0.0, 0.3], &[0.0, 2.0, 4.0], 2).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.cells[0][0].median_trans, 0.0);
        assert_eq!(m.cells[0][0].median_rot, 0.0);
        assert_eq!(m.cells[1][2].runs, 2);
        assert_eq!(m.to_csv("c").lines().count(), 2 + 6);
        assert_eq!(m, convergence_study(&r, &[gt], &[0.0, 0.3], &[0.0, 2.0, 4.0], 2).unwrap());
        assert!(convergence_study(&r, &[gt], &[0.1], &[1.0], 0).is_err());
    }
}
