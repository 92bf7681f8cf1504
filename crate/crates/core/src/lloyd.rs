//! Lloyd refinement.
//!
//! Each iteration moves every center to the mean of its cluster and then
//! reassigns points to their nearest center (ties to the lowest index). A
//! center whose cluster is empty is moved to the point farthest from the
//! current centers (lowest point index on ties); with several empty clusters
//! the farthest-point search is repeated after each relocation. Neither step
//! can raise the cost.

use serde::{Deserialize, Serialize};

use crate::cost::{assign, Assignment, CenterSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{sq_dist, stable_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub max_iters: usize,
    /// Absolute bound on the largest center displacement.
    pub tol: f64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Iteration<T> {
    /// Normalized cost after the update and reassignment.
    pub cost: T,
    /// Largest Euclidean displacement of any center in this iteration.
    pub moved: T,
}

#[derive(Debug, Clone)]
pub struct LloydTrace<T> {
    pub initial_cost: T,
    pub iterations: Vec<Iteration<T>>,
    pub converged: bool,
    pub final_centers: CenterSet<T>,
    pub final_assignment: Assignment,
}

impl<T: Scalar> LloydTrace<T> {
    pub fn final_cost(&self) -> T {
        self.iterations.last().map_or(self.initial_cost, |it| it.cost)
    }
}

fn cost_of<T: Scalar>(dataset: &Dataset<T>, labels: &Assignment, centers: &CenterSet<T>) -> T {
    let d2: Vec<T> = dataset
        .points()
        .zip(labels.labels())
        .map(|(p, &l)| sq_dist(p, centers.center(l)))
        .collect();
    stable_sum(&d2) / T::from_count(dataset.len())
}

/// Cluster means for `labels`; empty clusters keep their previous center and
/// are reported in the second return value.
fn centroids<T: Scalar>(
    dataset: &Dataset<T>,
    labels: &Assignment,
    previous: &CenterSet<T>,
) -> (CenterSet<T>, Vec<usize>) {
    let dim = dataset.dim();
    let k = previous.len();
    let mut sums = vec![T::zero(); k * dim];
    let mut counts = vec![0usize; k];
    for (p, &l) in dataset.points().zip(labels.labels()) {
        counts[l] += 1;
        for (s, &v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
            *s = *s + v;
        }
    }
    let mut next = previous.clone();
    let mut empty = Vec::new();
    for j in 0..k {
        if counts[j] == 0 {
            empty.push(j);
            continue;
        }
        let n = T::from_count(counts[j]);
        for (c, &s) in next.center_mut(j).iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
            *c = s / n;
        }
    }
    (next, empty)
}

fn reseed_empty<T: Scalar>(dataset: &Dataset<T>, centers: &mut CenterSet<T>, empty: &[usize]) {
    let mut d2: Vec<T> = dataset.points().map(|p| centers.nearest(p).1).collect();
    for &j in empty {
        let mut far = 0;
        for (i, &d) in d2.iter().enumerate() {
            if d > d2[far] {
                far = i;
            }
        }
        let target = dataset.point(far).to_vec();
        centers.center_mut(j).copy_from_slice(&target);
        for (slot, p) in d2.iter_mut().zip(dataset.points()) {
            let d = sq_dist(p, &target);
            if d < *slot {
                *slot = d;
            }
        }
    }
}

/// Refines `init` until the assignment stops changing, the largest center
/// displacement drops to `tol` or below, or `max_iters` iterations have run.
pub fn lloyd_refine<T: Scalar>(
    dataset: &Dataset<T>,
    init: &CenterSet<T>,
    config: &LloydConfig,
) -> Result<LloydTrace<T>> {
    if config.max_iters == 0 {
        return Err(Error::validation("max_iters must be at least 1"));
    }
    if !(config.tol >= 0.0) {
        return Err(Error::validation("tol must be non-negative"));
    }
    let mut labels = assign(dataset, init)?;
    let mut centers = init.clone();
    let initial_cost = cost_of(dataset, &labels, &centers);
    let tol = T::of(config.tol);
    let mut iterations = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iters {
        let (mut next, empty) = centroids(dataset, &labels, &centers);
        if !empty.is_empty() {
            reseed_empty(dataset, &mut next, &empty);
        }
        let moved = centers
            .iter()
            .zip(next.iter())
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(T::zero(), T::max);
        let next_labels = assign(dataset, &next)?;
        let stable = next_labels == labels;
        centers = next;
        labels = next_labels;
        iterations.push(Iteration {
            cost: cost_of(dataset, &labels, &centers),
            moved,
        });
        if stable || moved <= tol {
            converged = true;
            break;
        }
    }

    Ok(LloydTrace {
        initial_cost,
        iterations,
        converged,
        final_centers: centers,
        final_assignment: labels,
    })
}
