//! Lloyd's k-means with seeded k-means++ initialization.
//!
//! Distances are squared Euclidean. Iteration stops when no centroid
//! moves more than [`TOLERANCE`] or after [`MAX_ITERATIONS`] rounds.
//! Clusters emptied by an assignment round are reseeded with the point
//! currently farthest from its own centroid, which keeps every cluster
//! populated and never increases the objective.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Convergence threshold on the largest centroid displacement.
pub const TOLERANCE: f64 = 1e-6;

/// Hard cap on Lloyd rounds.
pub const MAX_ITERATIONS: u32 = 300;

/// Outcome of one clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Total within-cluster squared distance at the final assignment.
    pub inertia: f64,
    pub iterations: u32,
    /// Objective value after each assignment phase, for monotonicity
    /// checks; never increases from one entry to the next.
    pub inertia_history: Vec<f64>,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(point, c);
        // Strict comparison keeps ties at the lowest centroid index.
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first centroid uniform, the rest D^2-weighted.
/// When every remaining distance is zero (duplicate points), the draw
/// falls back to uniform.
fn init_plusplus(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.next_below(n as u64) as usize;
    centroids.push(points[first].clone());

    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let r = rng.next_f64() * total;
            let mut cum = 0.0;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                cum += d;
                if cum > r {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.next_below(n as u64) as usize
        };
        centroids.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            let d = dist2(p, centroids.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// Clusters `points` into `k` groups using the given seed.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult> {
    let mut rng = Rng::seed_from_u64(seed);
    kmeans_with_rng(points, k, &mut rng)
}

/// Like [`kmeans`] but drawing from a caller-owned stream, so several
/// clustering runs can share one deterministic sequence.
pub fn kmeans_with_rng(points: &[Vec<f64>], k: usize, rng: &mut Rng) -> Result<KMeansResult> {
    if k == 0 || points.len() < k {
        return Err(Error::InfeasibleClustering {
            points: points.len(),
            k,
        });
    }
    let n = points.len();
    debug_assert!(points.iter().all(|p| p.len() == points[0].len()));

    let mut centroids = init_plusplus(points, k, rng);
    let mut assignments = vec![0usize; n];
    let mut inertia_history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;

        // Assignment phase.
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let (c, _) = nearest(p, &centroids);
            assignments[i] = c;
            counts[c] += 1;
        }

        // Reseed empty clusters with the globally farthest point whose
        // cluster can spare it. Scanning in index order with a strict
        // comparison makes the choice deterministic.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far_point = None;
            let mut far_d = -1.0;
            for (i, p) in points.iter().enumerate() {
                if counts[assignments[i]] <= 1 {
                    continue;
                }
                let d = dist2(p, &centroids[assignments[i]]);
                if d > far_d {
                    far_d = d;
                    far_point = Some(i);
                }
            }
            if let Some(i) = far_point {
                centroids[c] = points[i].clone();
                counts[assignments[i]] -= 1;
                assignments[i] = c;
                counts[c] = 1;
            }
        }

        let inertia: f64 = points
            .iter()
            .zip(assignments.iter())
            .map(|(p, c)| dist2(p, &centroids[*c]))
            .sum();
        inertia_history.push(inertia);

        // Update phase.
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, c) in points.iter().zip(assignments.iter()) {
            for (s, v) in sums[*c].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        let mut displacement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            displacement = displacement.max(dist2(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }

        if displacement < TOLERANCE || iterations >= MAX_ITERATIONS {
            break;
        }
    }

    // Sync assignments with the final centroid positions.
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (c, d) = nearest(p, &centroids);
        assignments[i] = c;
        inertia += d;
    }

    Ok(KMeansResult {
        centroids,
        assignments,
        inertia,
        iterations,
        inertia_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|v| vec![*v]).collect()
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let points = scalars(&[0.0, 1.0, 2.0, 5.0, 9.0]);
        let result = kmeans(&points, 5, 3).unwrap();
        assert!(result.inertia < 1e-18);
        let mut seen = result.assignments.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn two_tight_groups_recover_their_values() {
        let mut points = scalars(&[0.0; 4]);
        points.extend(scalars(&[10.0; 4]));
        let result = kmeans(&points, 2, 8).unwrap();
        assert!(result.inertia < 1e-18);
        let mut values: Vec<f64> = result.centroids.iter().map(|c| c[0]).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, vec![0.0, 10.0]);
    }

    #[test]
    fn gap_partition_matches_brute_force() {
        let values = [0.0, 0.01, 0.02, 0.03, 1.0, 1.01, 1.02, 1.03];
        let points = scalars(&values);

        // Brute-force best 2-partition by within-cluster SSE.
        let mut best_mask = 0u32;
        let mut best_sse = f64::INFINITY;
        for mask in 1..(1u32 << values.len()) - 1 {
            let mut sse = 0.0;
            for side in 0..2 {
                let members: Vec<f64> = values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| ((mask >> i) & 1) as usize == side)
                    .map(|(_, v)| *v)
                    .collect();
                if members.is_empty() {
                    sse = f64::INFINITY;
                    break;
                }
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                sse += members.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            }
            if sse < best_sse {
                best_sse = sse;
                best_mask = mask;
            }
        }
        // The optimum splits at the gap: first four on one side.
        assert!(best_mask == 0b0000_1111 || best_mask == 0b1111_0000);

        for seed in 0..10 {
            let result = kmeans(&points, 2, seed).unwrap();
            let first = result.assignments[0];
            assert!(result.assignments[..4].iter().all(|a| *a == first));
            assert!(result.assignments[4..].iter().all(|a| *a != first));
            assert!((result.inertia - best_sse).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_history_never_increases() {
        let mut rng = Rng::seed_from_u64(77);
        for case in 0..20 {
            let n = 20 + rng.next_below(50) as usize;
            let dim = 1 + rng.next_below(8) as usize;
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.next_f64()).collect())
                .collect();
            let result = kmeans(&points, 4, case).unwrap();
            for pair in result.inertia_history.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "inertia rose from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
            assert!(result.iterations <= MAX_ITERATIONS);
            assert!(result.inertia >= 0.0);
        }
    }

    #[test]
    fn identical_points_converge_with_zero_inertia() {
        // Duplicate inputs collapse every distance to zero. The run must
        // still terminate quickly and report a zero objective; distinct
        // representatives are the selection layer's job, not ours.
        let points = scalars(&[0.5; 10]);
        let result = kmeans(&points, 10, 4).unwrap();
        assert!(result.inertia < 1e-18);
        assert_eq!(result.centroids.len(), 10);
        assert!(result.iterations <= 3);
    }

    #[test]
    fn too_few_points_error() {
        let points = scalars(&[1.0, 2.0]);
        assert!(matches!(
            kmeans(&points, 3, 0),
            Err(Error::InfeasibleClustering { points: 2, k: 3 })
        ));
    }

    #[test]
    fn same_seed_same_result() {
        let mut rng = Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.next_f64(), rng.next_f64()]).collect();
        let a = kmeans(&points, 5, 123).unwrap();
        let b = kmeans(&points, 5, 123).unwrap();
        assert_eq!(a, b);
    }
}
