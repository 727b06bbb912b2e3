//! Lloyd's k-means over sparse tf-idf vectors with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tfidf::TfidfVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansParams {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering<T> {
    pub k: usize,
    /// Dense centroids, `k` rows of the input dimension.
    pub centroids: Vec<Vec<T>>,
    /// Cluster index per input vector, in input order.
    pub assignment: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared distances to the assigned centroid, recorded after
    /// the initial assignment and after every Lloyd iteration.
    pub objective_history: Vec<T>,
}

impl<T: Scalar> Clustering<T> {
    pub fn objective(&self) -> T {
        *self.objective_history.last().expect("at least one objective value")
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(i, _)| i)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

struct Centroids<T> {
    rows: Vec<Vec<T>>,
    norms: Vec<T>,
}

impl<T: Scalar> Centroids<T> {
    fn set(&mut self, idx: usize, row: Vec<T>) {
        self.norms[idx] = row.iter().map(|&x| x * x).sum();
        self.rows[idx] = row;
    }

    fn push(&mut self, row: Vec<T>) {
        self.norms.push(row.iter().map(|&x| x * x).sum());
        self.rows.push(row);
    }

    fn distance(&self, idx: usize, v: &TfidfVector<T>) -> T {
        v.distance_squared(&self.rows[idx], self.norms[idx])
    }
}

fn dimension<T>(vectors: &[TfidfVector<T>]) -> usize {
    vectors
        .iter()
        .filter_map(|v| v.entries.last().map(|&(c, _)| c + 1))
        .max()
        .unwrap_or(0)
}

/// Draws one index with probability proportional to `weights`.
fn weighted_pick(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &d) in weights.iter().enumerate() {
        if d <= 0.0 {
            continue;
        }
        acc += d;
        pick = Some(i);
        if acc > target {
            break;
        }
    }
    pick.expect("positive total has a positive entry")
}

/// Greedy k-means++: each new centre is the best of a few D²-weighted
/// candidates, judged by the potential it leaves behind.
fn plus_plus_init<T: Scalar>(
    vectors: &[TfidfVector<T>],
    k: usize,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Centroids<T> {
    let n = vectors.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = vec![false; n];
    let mut centroids = Centroids {
        rows: Vec::with_capacity(k),
        norms: Vec::with_capacity(k),
    };

    let first = rng.random_range(0..n);
    chosen[first] = true;
    centroids.push(vectors[first].to_dense(dim));
    let mut nearest: Vec<f64> = vectors
        .iter()
        .map(|v| centroids.distance(0, v).to_f64_lossy())
        .collect();

    while centroids.rows.len() < k {
        let total: f64 = nearest.iter().sum();
        if total <= 0.0 {
            // every remaining point coincides with a centroid
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            let pick = free[rng.random_range(0..free.len())];
            chosen[pick] = true;
            centroids.push(vectors[pick].to_dense(dim));
            continue;
        }
        let mut best: Option<(f64, usize, Vec<T>, Vec<f64>)> = None;
        for _ in 0..trials {
            let cand = weighted_pick(&nearest, total, rng);
            let row = vectors[cand].to_dense(dim);
            let norm: T = row.iter().map(|&x| x * x).sum();
            let updated: Vec<f64> = vectors
                .iter()
                .zip(&nearest)
                .map(|(v, &d)| d.min(v.distance_squared(&row, norm).to_f64_lossy()))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, cand, row, updated));
            }
        }
        let (_, pick, row, updated) = best.expect("at least one trial");
        chosen[pick] = true;
        centroids.push(row);
        nearest = updated;
    }
    centroids
}

/// Moves every point to its nearest centroid. A point stays put when its
/// current centroid is among the nearest, so ties never increase the
/// objective. Returns per-point distances.
fn assign<T: Scalar>(
    vectors: &[TfidfVector<T>],
    centroids: &Centroids<T>,
    assignment: &mut [usize],
    initial: bool,
) -> Vec<T> {
    let mut dists = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        let mut best = 0;
        let mut best_d = centroids.distance(0, v);
        for c in 1..centroids.rows.len() {
            let d = centroids.distance(c, v);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        if !initial {
            let current = assignment[i];
            let current_d = centroids.distance(current, v);
            if current_d <= best_d {
                best = current;
                best_d = current_d;
            }
        }
        assignment[i] = best;
        dists.push(best_d);
    }
    dists
}

/// Re-seeds each empty cluster with the point farthest from its own
/// centroid, taken from a cluster that can spare it.
fn reseed_empty<T: Scalar>(
    vectors: &[TfidfVector<T>],
    centroids: &mut Centroids<T>,
    assignment: &mut [usize],
    dists: &mut [T],
    dim: usize,
) {
    let k = centroids.rows.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let donor = (0..vectors.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a cluster with two members");
        centroids.set(empty, vectors[donor].to_dense(dim));
        assignment[donor] = empty;
        dists[donor] = T::zero();
    }
}

pub fn kmeans<T: Scalar>(vectors: &[TfidfVector<T>], params: KMeansParams) -> Result<Clustering<T>> {
    let n = vectors.len();
    let k = params.k;
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, points: n });
    }
    if params.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let dim = dimension(vectors);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = plus_plus_init(vectors, k, dim, &mut rng);

    let mut assignment = vec![0usize; n];
    let mut dists = assign(vectors, &centroids, &mut assignment, true);
    reseed_empty(vectors, &mut centroids, &mut assignment, &mut dists, dim);
    let mut history = vec![dists.iter().copied().sum::<T>()];

    let tol = T::from_f64_lossy(params.tol);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;

        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (v, &c) in vectors.iter().zip(&assignment) {
            v.add_to(&mut sums[c]);
            counts[c] += 1;
        }
        let mut shift = T::zero();
        for (c, mut row) in sums.into_iter().enumerate() {
            let count = T::from_usize_lossy(counts[c]);
            for x in &mut row {
                *x = *x / count;
            }
            let moved = row
                .iter()
                .zip(&centroids.rows[c])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum::<T>()
                .sqrt();
            shift = shift.max(moved);
            centroids.set(c, row);
        }

        dists = assign(vectors, &centroids, &mut assignment, false);
        reseed_empty(vectors, &mut centroids, &mut assignment, &mut dists, dim);
        history.push(dists.iter().copied().sum::<T>());

        if shift < tol || shift.is_zero() {
            converged = true;
            break;
        }
    }

    Ok(Clustering {
        k,
        centroids: centroids.rows,
        assignment,
        iterations,
        converged,
        objective_history: history,
    })
}
