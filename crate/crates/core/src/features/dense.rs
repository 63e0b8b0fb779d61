use super::{FeaturePyramid, FeatureVolume, Score};
use crate::error::{Error, Result};

/// Largest possible per-pixel distance between two unit vectors.
pub const MAX_DENSE_DISTANCE: f64 = 4.0;

const ZERO_NORM: f64 = 1e-12;

/// Mean over pixels of the squared distance between channel-normalized
/// feature vectors. A pixel whose vector vanishes in either volume counts as
/// maximally dissimilar.
pub fn dense_distance(query: &FeatureVolume, candidate: &FeatureVolume) -> Result<Score> {
    if query.shape() != candidate.shape() {
        return Err(Error::ShapeMismatch(format!(
            "query level is {:?}, candidate level is {:?}",
            query.shape(),
            candidate.shape()
        )));
    }
    let n = query.height() * query.width();
    let inv_norms = |vol: &FeatureVolume| -> Vec<f64> {
        let mut sq = vec![0.0f64; n];
        for c in 0..vol.channels() {
            for (acc, &v) in sq.iter_mut().zip(vol.channel(c)) {
                *acc += v as f64 * v as f64;
            }
        }
        sq.into_iter()
            .map(|s| {
                let norm = s.sqrt();
                if norm < ZERO_NORM {
                    0.0
                } else {
                    1.0 / norm
                }
            })
            .collect()
    };
    let iq = inv_norms(query);
    let it = inv_norms(candidate);

    let mut dist = vec![0.0f64; n];
    for c in 0..query.channels() {
        let (a, b) = (query.channel(c), candidate.channel(c));
        for p in 0..n {
            let d = a[p] as f64 * iq[p] - b[p] as f64 * it[p];
            dist[p] += d * d;
        }
    }
    let total: f64 = dist
        .iter()
        .zip(iq.iter().zip(&it))
        .map(|(&d, (&x, &y))| {
            if x == 0.0 || y == 0.0 {
                MAX_DENSE_DISTANCE
            } else {
                d.min(MAX_DENSE_DISTANCE)
            }
        })
        .sum();
    Score::new((total / n as f64).clamp(0.0, MAX_DENSE_DISTANCE))
}

/// Dense score at 1-based pyramid `level`.
pub fn dense_score(query: &FeaturePyramid, candidate: &FeaturePyramid, level: usize) -> Result<Score> {
    dense_distance(query.level(level)?, candidate.level(level)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Provenance;
    use proptest::prelude::*;

    fn vol(c: usize, h: usize, w: usize, data: Vec<f32>) -> FeatureVolume {
        FeatureVolume::new(c, h, w, data).unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let v = vol(3, 2, 2, (0..12).map(|i| (i as f32 * 0.7).cos()).collect());
        let p = FeaturePyramid::new(vec![v], Provenance::Builtin).unwrap();
        assert_eq!(dense_score(&p, &p, 1).unwrap().value(), 0.0);
    }

    #[test]
    fn antipodal_is_four() {
        let data: Vec<f32> = (0..12).map(|i| 0.3 + i as f32).collect();
        let a = vol(3, 2, 2, data.clone());
        let b = vol(3, 2, 2, data.iter().map(|v| -2.0 * v).collect());
        assert!((dense_distance(&a, &b).unwrap().value() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_vectors_are_maximal() {
        let a = vol(2, 1, 2, vec![0.0, 1.0, 0.0, 1.0]);
        let b = vol(2, 1, 2, vec![1.0, 1.0, 0.0, 1.0]);
        // pixel 0: a is zero -> 4; pixel 1: identical -> 0
        assert!((dense_distance(&a, &b).unwrap().value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shape_and_level_errors() {
        let a = vol(2, 2, 2, vec![1.0; 8]);
        let b = vol(2, 1, 4, vec![1.0; 8]);
        assert!(dense_distance(&a, &b).is_err());
        let p = FeaturePyramid::new(vec![a], Provenance::Builtin).unwrap();
        assert!(matches!(dense_score(&p, &p, 2), Err(Error::LevelOutOfRange { .. })));
        assert!(dense_score(&p, &p, 0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in proptest::collection::vec(-10f32..10.0, 4 * 3 * 5),
            b in proptest::collection::vec(-10f32..10.0, 4 * 3 * 5),
        ) {
            let va = vol(4, 3, 5, a);
            let vb = vol(4, 3, 5, b);
            let ab = dense_distance(&va, &vb).unwrap().value();
            let ba = dense_distance(&vb, &va).unwrap().value();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=4.0).contains(&ab));
        }
    }
}
