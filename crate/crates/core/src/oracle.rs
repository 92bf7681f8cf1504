//! Exact answers for small instances.
//!
//! [`enumerate_seedings`] lists every ordered k-means++ outcome with its chain
//! probability `P(μ_1)·Π_j P(μ_j | μ_1..μ_{j-1})`, where `μ_1` is uniform over
//! the points and each later draw has probability `D(μ_j, M)² / Σ_x D(x, M)²`.
//! [`brute_force_optimum`] scores every partition into at most `k` clusters
//! with centroid centers, which is exact for the k-means objective.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::cost::{cost_empirical, Assignment, CenterSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lloyd::{lloyd_refine, LloydConfig};
use crate::scalar::{sq_dist, Scalar};

/// Largest point count accepted by either oracle.
pub const MAX_ORACLE_POINTS: usize = 12;
/// Largest `k` for seeding enumeration (12·11·10·9 = 11880 sequences).
pub const MAX_ENUM_K: usize = 4;
/// Largest `k` for the partition search.
pub const MAX_PARTITION_K: usize = 3;

/// `8(ln k + 2)`, the k-means++ approximation factor.
pub fn bound_constant(k: usize) -> f64 {
    8.0 * ((k as f64).ln() + 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedingOutcome<T> {
    /// Dataset indices of the centers in draw order.
    pub indices: Vec<usize>,
    pub centers: CenterSet<T>,
    pub probability: T,
    /// `cost_empirical` of the full center set.
    pub cost: T,
}

fn check_enum_size(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::validation(format!("k = {k} must lie in 1..={m}")));
    }
    if m > MAX_ORACLE_POINTS || k > MAX_ENUM_K {
        return Err(Error::SizeLimit {
            what: "seeding enumeration",
            detail: format!("m = {m}, k = {k} (limits m <= {MAX_ORACLE_POINTS}, k <= {MAX_ENUM_K})"),
        });
    }
    Ok(())
}

/// Depth-first walk over the seeding tree below a fixed prefix. `visit` sees
/// every node (prefix, probability, running D² array) including leaves.
struct Walker<'a, T> {
    dataset: &'a Dataset<T>,
    k: usize,
}

impl<T: Scalar> Walker<'_, T> {
    fn walk(
        &self,
        prefix: &mut Vec<usize>,
        prob: T,
        d2: &[T],
        visit: &mut dyn FnMut(&[usize], T) -> Result<()>,
    ) -> Result<()> {
        visit(prefix, prob)?;
        if prefix.len() == self.k {
            return Ok(());
        }
        let total = d2.iter().copied().fold(T::zero(), |a, b| a + b);
        if !(total > T::zero()) {
            return Err(Error::Degenerate(format!(
                "k = {} but the points occupy only {} distinct locations",
                self.k,
                prefix.len()
            )));
        }
        let mut next_d2 = vec![T::zero(); d2.len()];
        for (i, &w) in d2.iter().enumerate() {
            if !(w > T::zero()) {
                continue;
            }
            let c = self.dataset.point(i);
            for ((slot, &old), p) in next_d2.iter_mut().zip(d2).zip(self.dataset.points()) {
                *slot = old.min(sq_dist(p, c));
            }
            prefix.push(i);
            self.walk(prefix, prob * (w / total), &next_d2, visit)?;
            prefix.pop();
        }
        Ok(())
    }

    /// Runs `per_first` for every first center in parallel, results in index order.
    fn for_each_first<R: Send>(
        &self,
        per_first: impl Fn(usize, &mut dyn FnMut(&mut dyn FnMut(&[usize], T) -> Result<()>) -> Result<()>) -> Result<R>
            + Sync,
    ) -> Result<Vec<R>> {
        let m = self.dataset.len();
        let p0 = T::one() / T::from_count(m);
        (0..m)
            .into_par_iter()
            .map(|first| {
                let anchor = self.dataset.point(first);
                let d2: Vec<T> = self.dataset.points().map(|p| sq_dist(p, anchor)).collect();
                let mut run =
                    |visit: &mut dyn FnMut(&[usize], T) -> Result<()>| self.walk(&mut vec![first], p0, &d2, visit);
                per_first(first, &mut run)
            })
            .collect()
    }
}

/// Every ordered k-means++ outcome with nonzero probability, in lexicographic
/// order of index sequences.
pub fn enumerate_seedings<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<Vec<SeedingOutcome<T>>> {
    check_enum_size(dataset.len(), k)?;
    let walker = Walker { dataset, k };
    let groups = walker.for_each_first(|_, run| {
        let mut out = Vec::new();
        run(&mut |prefix, prob| {
            if prefix.len() == k {
                let centers = CenterSet::from_indices(dataset, prefix);
                let cost = cost_empirical(dataset, &centers)?;
                out.push(SeedingOutcome {
                    indices: prefix.to_vec(),
                    centers,
                    probability: prob,
                    cost,
                });
            }
            Ok(())
        })?;
        Ok(out)
    })?;
    Ok(groups.into_iter().flatten().collect())
}

/// `E[cost]` of k-means++ seeding, summed exactly over the enumeration.
pub fn exact_expected_cost<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<T> {
    exact_expected_cost_with(dataset, k, None)
}

/// As [`exact_expected_cost`], optionally running Lloyd on every outcome first.
pub fn exact_expected_cost_with<T: Scalar>(dataset: &Dataset<T>, k: usize, refine: Option<&LloydConfig>) -> Result<T> {
    let outcomes = enumerate_seedings(dataset, k)?;
    let mut total = T::zero();
    for o in &outcomes {
        let cost = match refine {
            Some(cfg) => lloyd_refine(dataset, &o.centers, cfg)?.final_cost(),
            None => o.cost,
        };
        total = total + o.probability * cost;
    }
    Ok(total)
}

/// `E[cost(M[..j])]` for `j = 1..=k`: the expected cost after each seeding step.
pub fn expected_prefix_costs<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<Vec<T>> {
    check_enum_size(dataset.len(), k)?;
    let walker = Walker { dataset, k };
    let per_first = walker.for_each_first(|_, run| {
        let mut acc = vec![T::zero(); k];
        run(&mut |prefix, prob| {
            let centers = CenterSet::from_indices(dataset, prefix);
            let j = prefix.len() - 1;
            acc[j] = acc[j] + prob * cost_empirical(dataset, &centers)?;
            Ok(())
        })?;
        Ok(acc)
    })?;
    let mut out = vec![T::zero(); k];
    for acc in per_first {
        for (o, a) in out.iter_mut().zip(acc) {
            *o = *o + a;
        }
    }
    Ok(out)
}

/// Writes `indices,probability,cost` rows; indices are `;`-separated.
pub fn write_outcomes_csv<T: Scalar, W: Write>(outcomes: &[SeedingOutcome<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "indices,probability,cost")?;
    for o in outcomes {
        let idx: Vec<String> = o.indices.iter().map(usize::to_string).collect();
        writeln!(out, "{},{},{}", idx.join(";"), o.probability, o.cost)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalClustering<T> {
    /// Minimum normalized cost over partitions into at most `k` clusters.
    pub best_cost: T,
    pub best_partition: Assignment,
    /// Means of the clusters of `best_partition`.
    #[serde(skip)]
    pub centers: CenterSet<T>,
    /// `per_prefix[j - 1]` is the optimum with at most `j` clusters.
    pub per_prefix: Vec<T>,
}

fn partition_cost<T: Scalar>(dataset: &Dataset<T>, labels: &[usize], blocks: usize) -> (T, CenterSet<T>) {
    let dim = dataset.dim();
    let mut sums = vec![T::zero(); blocks * dim];
    let mut counts = vec![0usize; blocks];
    for (p, &l) in dataset.points().zip(labels) {
        counts[l] += 1;
        for (s, &v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
            *s = *s + v;
        }
    }
    for (b, &n) in counts.iter().enumerate() {
        let n = T::from_count(n);
        for s in &mut sums[b * dim..(b + 1) * dim] {
            *s = *s / n;
        }
    }
    let means = CenterSet::from_flat(dim, sums).expect("finite means");
    let total = dataset
        .points()
        .zip(labels)
        .fold(T::zero(), |acc, (p, &l)| acc + sq_dist(p, means.center(l)));
    (total / T::from_count(dataset.len()), means)
}

/// Exhaustive search over set partitions into at most `k` nonempty blocks
/// (restricted growth strings), scoring each with its centroid centers.
pub fn brute_force_optimum<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<OptimalClustering<T>> {
    let m = dataset.len();
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if m > MAX_ORACLE_POINTS || k > MAX_PARTITION_K {
        return Err(Error::SizeLimit {
            what: "partition search",
            detail: format!("m = {m}, k = {k} (limits m <= {MAX_ORACLE_POINTS}, k <= {MAX_PARTITION_K})"),
        });
    }

    // best[b - 1] = (cost, labels) over partitions with exactly b blocks
    let mut best: Vec<Option<(T, Vec<usize>)>> = vec![None; k];
    let mut labels = vec![0usize; m];
    // growth[i] = number of blocks used by labels[..=i]
    let mut growth = vec![1usize; m];

    loop {
        let blocks = growth[m - 1];
        let (cost, _) = partition_cost(dataset, &labels, blocks);
        let slot = &mut best[blocks - 1];
        if slot.as_ref().is_none_or(|(c, _)| cost < *c) {
            *slot = Some((cost, labels.clone()));
        }

        // next restricted growth string with at most k blocks
        let mut i = m - 1;
        loop {
            if i == 0 {
                return finish(dataset, best);
            }
            let limit = growth[i - 1].min(k - 1);
            if labels[i] < limit {
                labels[i] += 1;
                growth[i] = growth[i - 1].max(labels[i] + 1);
                for t in i + 1..m {
                    labels[t] = 0;
                    growth[t] = growth[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

fn finish<T: Scalar>(dataset: &Dataset<T>, best: Vec<Option<(T, Vec<usize>)>>) -> Result<OptimalClustering<T>> {
    let mut per_prefix = Vec::with_capacity(best.len());
    let mut running: Option<(T, Vec<usize>, usize)> = None;
    for (b, entry) in best.into_iter().enumerate() {
        if let Some((cost, labels)) = entry {
            if running.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                running = Some((cost, labels, b + 1));
            }
        }
        per_prefix.push(running.as_ref().expect("one block is always feasible").0);
    }
    let (best_cost, labels, blocks) = running.expect("one block is always feasible");
    let (_, centers) = partition_cost(dataset, &labels, blocks);
    Ok(OptimalClustering {
        best_cost,
        best_partition: Assignment::new(labels, blocks)?,
        centers,
        per_prefix,
    })
}

/// Expected k-means++ cost against the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationCheck<T> {
    /// `None` when seeding itself is degenerate (too few distinct points).
    pub expected: Option<T>,
    pub optimum: T,
    /// `expected / optimum`; `1` when both are zero; `None` for degenerate
    /// instances (zero optimum with nonzero or undefined expectation).
    pub ratio: Option<T>,
    pub bound: f64,
}

impl<T: Scalar> ApproximationCheck<T> {
    pub fn is_degenerate(&self) -> bool {
        self.ratio.is_none()
    }

    /// `Some(ratio <= bound)`, or `None` for degenerate instances.
    pub fn passes(&self) -> Option<bool> {
        self.ratio.map(|r| r.as_f64() <= self.bound)
    }
}

pub fn approximation_ratio<T: Scalar>(dataset: &Dataset<T>, k: usize) -> Result<ApproximationCheck<T>> {
    let optimum = brute_force_optimum(dataset, k)?.best_cost;
    let expected = match exact_expected_cost(dataset, k) {
        Ok(e) => Some(e),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let ratio = match expected {
        Some(e) if optimum > T::zero() => Some(e / optimum),
        Some(e) if e == T::zero() => Some(T::one()),
        _ => None,
    };
    Ok(ApproximationCheck {
        expected,
        optimum,
        ratio,
        bound: bound_constant(k),
    })
}
