//! k-means clustering with k-means++ seeding, used to build bag-of-words
//! codebooks and to initialize Gaussian mixtures.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;
use crate::seed;

const MAX_ITERS: usize = 100;
const REL_INERTIA_TOL: f64 = 1e-4;

/// A trained visual vocabulary: K cluster centers in descriptor space.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<F> {
    centers: Matrix<F>,
}

impl<F: Real> Codebook<F> {
    /// Wraps externally supplied centers (must be finite, K >= 1).
    pub fn from_centers(centers: Matrix<F>) -> Result<Self> {
        if centers.rows() == 0 {
            return Err(Error::EmptySequence);
        }
        if centers.cols() == 0 {
            return Err(Error::ZeroDimension);
        }
        for (r, row) in centers.row_iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        context: "codebook centers".to_string(),
                        row: r,
                        col: c,
                    });
                }
            }
        }
        Ok(Codebook { centers })
    }

    pub fn k(&self) -> usize {
        self.centers.rows()
    }

    pub fn dim(&self) -> usize {
        self.centers.cols()
    }

    pub fn centers(&self) -> &Matrix<F> {
        &self.centers
    }

    pub fn center(&self, k: usize) -> &[F] {
        self.centers.row(k)
    }

    /// Index of the nearest center (squared Euclidean; ties break toward
    /// the lowest index).
    pub fn nearest(&self, point: &[F]) -> usize {
        let mut best = 0usize;
        let mut best_d = squared_distance(self.center(0), point);
        for k in 1..self.k() {
            let d = squared_distance(self.center(k), point);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }
}

fn squared_distance<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc = acc + d * d;
    }
    acc
}

/// Counts distinct rows by lexicographic sort (exact comparison).
fn distinct_rows<F: Real>(points: &Matrix<F>) -> usize {
    let mut order: Vec<usize> = (0..points.rows()).collect();
    order.sort_by(|&a, &b| {
        points
            .row(a)
            .partial_cmp(points.row(b))
            .expect("finite values are totally ordered")
    });
    let mut distinct = if points.rows() > 0 { 1 } else { 0 };
    for w in order.windows(2) {
        if points.row(w[0]) != points.row(w[1]) {
            distinct += 1;
        }
    }
    distinct
}

/// k-means++ seeding: the first center is uniform over points, each further
/// center is sampled with probability proportional to its squared distance
/// from the nearest chosen center.
fn seed_centers<F: Real>(
    points: &Matrix<F>,
    k: usize,
    rng: &mut impl Rng,
) -> Matrix<F> {
    let n_points = points.rows();
    let mut centers = Matrix::filled(k, points.cols(), F::zero());
    let first = rng.gen_range(0..n_points);
    centers.row_mut(0).copy_from_slice(points.row(first));

    let mut min_d: Vec<f64> = (0..n_points)
        .map(|i| squared_distance(points.row(i), centers.row(0)).as_f64())
        .collect();
    for c in 1..k {
        let total: f64 = min_d.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.gen_range(0.0..total);
            let mut acc = 0.0;
            let mut pick = n_points - 1;
            for (i, &d) in min_d.iter().enumerate() {
                acc += d;
                if target < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // All points coincide with chosen centers; caller guarantees
            // enough distinct points, so this only happens transiently on
            // pathological rounding. Fall back to a uniform draw.
            rng.gen_range(0..n_points)
        };
        centers.row_mut(c).copy_from_slice(points.row(chosen));
        for (i, slot) in min_d.iter_mut().enumerate() {
            let d = squared_distance(points.row(i), centers.row(c)).as_f64();
            if d < *slot {
                *slot = d;
            }
        }
    }
    centers
}

/// Trains a K-word codebook over descriptor rows.
///
/// Lloyd iterations run until the relative inertia change drops below 1e-4
/// or 100 iterations elapse. Point-to-center assignment is parallel; all
/// accumulation is sequential in point order, so results are deterministic
/// for a fixed seed. A cluster left empty after an update is re-seeded with
/// the point farthest from its assigned center.
pub fn train_codebook<F: Real>(points: &Matrix<F>, k: usize, seed_val: u64) -> Result<Codebook<F>> {
    assert!(k >= 1, "codebook needs at least one word");
    assert!(points.cols() >= 1, "points need at least one dimension");
    let n_points = points.rows();
    let distinct = distinct_rows(points);
    if distinct < k {
        return Err(Error::TooFewDistinctPoints {
            needed: k,
            got: distinct,
        });
    }
    let mut rng = seed::rng(seed_val, "kmeans", 0);
    let mut centers = seed_centers(points, k, &mut rng);

    let mut prev_inertia = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        // Assignment (parallel, index-stable).
        let snapshot = Codebook {
            centers: centers.clone(),
        };
        let assign: Vec<usize> = (0..n_points)
            .into_par_iter()
            .map(|i| snapshot.nearest(points.row(i)))
            .collect();

        // Update (sequential accumulation for determinism).
        let mut sums = Matrix::filled(k, points.cols(), F::zero());
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            let row = sums.row_mut(a);
            for (s, v) in row.iter_mut().zip(points.row(i)) {
                *s = *s + *v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = F::one() / F::of_usize(counts[c]);
                let (sum_row, center_row) = (sums.row(c).to_vec(), centers.row_mut(c));
                for (slot, s) in center_row.iter_mut().zip(sum_row) {
                    *slot = s * inv;
                }
            }
        }
        // Re-seed empty clusters from the farthest points (ties toward the
        // lowest point index), one distinct point per empty cluster.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        let mut stolen: Vec<usize> = Vec::new();
        for c in empties {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..n_points {
                if stolen.contains(&i) {
                    continue;
                }
                let d = squared_distance(points.row(i), centers.row(assign[i])).as_f64();
                if best.map_or(true, |(bd, _)| d > bd) {
                    best = Some((d, i));
                }
            }
            let (_, i) = best.expect("nonempty point set");
            centers.row_mut(c).copy_from_slice(points.row(i));
            stolen.push(i);
        }

        // Inertia under the new centers.
        let snapshot = Codebook {
            centers: centers.clone(),
        };
        let inertia: f64 = (0..n_points)
            .map(|i| squared_distance(points.row(i), snapshot.center(snapshot.nearest(points.row(i)))).as_f64())
            .sum();
        if prev_inertia.is_finite() {
            let denom = prev_inertia.max(f64::MIN_POSITIVE);
            if ((prev_inertia - inertia).abs() / denom) < REL_INERTIA_TOL {
                break;
            }
        }
        prev_inertia = inertia;
    }
    Ok(Codebook { centers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    /// Standard normal via Box-Muller.
    fn normal(rng: &mut impl Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn clouds(means: &[[f64; 2]], per_cloud: usize, spread: f64, seed_ix: u64) -> Matrix<f64> {
        let mut rng = seed::rng(17, "clouds", seed_ix);
        let mut rows = Vec::new();
        for m in means {
            for _ in 0..per_cloud {
                rows.push(vec![m[0] + spread * normal(&mut rng), m[1] + spread * normal(&mut rng)]);
            }
        }
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn recovers_well_separated_clouds() {
        let true_means = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let points = clouds(&true_means, 120, 0.3, 1);
        let cb = train_codebook(&points, 3, 42).unwrap();
        // Match each true mean to its nearest center.
        for m in &true_means {
            let k = cb.nearest(&[m[0], m[1]]);
            let c = cb.center(k);
            let d = ((c[0] - m[0]).powi(2) + (c[1] - m[1]).powi(2)).sqrt();
            assert!(d < 0.1, "center {c:?} is {d} from mean {m:?}");
        }
        // Centers are pairwise distinct.
        for a in 0..3 {
            for b in a + 1..3 {
                assert_ne!(cb.center(a), cb.center(b));
            }
        }
    }

    #[test]
    fn k1_center_is_the_global_mean() {
        let points =
            Matrix::from_rows(&[vec![1.0f64, 2.0], vec![3.0, 4.0], vec![5.0, 0.0]]).unwrap();
        let cb = train_codebook(&points, 1, 7).unwrap();
        let c = cb.center(0);
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_gives_identical_codebooks() {
        let points = clouds(&[[0.0, 0.0], [5.0, 5.0]], 60, 0.5, 2);
        let a = train_codebook(&points, 4, 99).unwrap();
        let b = train_codebook(&points, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = train_codebook(&points, 4, 100).unwrap();
        assert_ne!(a, c, "different seeds should explore different seedings");
    }

    #[test]
    fn too_few_distinct_points_is_an_error() {
        let points = Matrix::from_rows(&[
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![2.0, 2.0],
        ])
        .unwrap();
        assert!(matches!(
            train_codebook(&points, 3, 1),
            Err(Error::TooFewDistinctPoints { needed: 3, got: 2 })
        ));
        assert!(train_codebook(&points, 2, 1).is_ok());
    }

    #[test]
    fn nearest_breaks_ties_toward_lowest_index() {
        let cb = Codebook::from_centers(
            Matrix::from_rows(&[vec![0.0], vec![2.0], vec![0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(cb.nearest(&[1.0]), 0); // equidistant from centers 0 and 1
        assert_eq!(cb.nearest(&[0.1]), 0); // centers 0 and 2 coincide
    }
}
