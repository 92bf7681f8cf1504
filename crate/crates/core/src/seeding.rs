//! k-means++ D² seeding and uniform random seeding.
//!
//! Both strategies return distinct dataset points in draw order. k-means++
//! keeps a running array of squared distances to the nearest chosen center,
//! so selecting `k` centers costs `O(m·k)` distance evaluations, and draws each
//! new center by inverting the cumulative D² mass.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cost::CenterSet;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::{sq_dist, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// D² sampling (k-means++).
    #[serde(rename = "plusplus", alias = "plus_plus")]
    PlusPlus,
    /// Uniform sampling without replacement (k-means-random).
    #[serde(rename = "random", alias = "uniform", alias = "uniform_random")]
    UniformRandom,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::PlusPlus => "plusplus",
            Strategy::UniformRandom => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plusplus" | "kmeans++" | "plus_plus" => Ok(Strategy::PlusPlus),
            "random" | "uniform" | "uniform_random" => Ok(Strategy::UniformRandom),
            other => Err(Error::validation(format!(
                "unknown strategy {other:?} (expected plusplus or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedingConfig {
    pub k: usize,
    pub strategy: Strategy,
    pub seed: u64,
}

impl SeedingConfig {
    /// Runs the configured strategy with the generator for `seed`.
    pub fn run<T: Scalar>(&self, dataset: &Dataset<T>) -> Result<CenterSet<T>> {
        let mut rng = rng::from_seed(self.seed);
        seed_with(self.strategy, dataset, self.k, &mut rng)
    }
}

pub fn seed_with<T: Scalar>(strategy: Strategy, dataset: &Dataset<T>, k: usize, rng: &mut Rng) -> Result<CenterSet<T>> {
    let idx = seed_indices(strategy, dataset, k, rng)?;
    Ok(CenterSet::from_indices(dataset, &idx))
}

pub fn seed_indices<T: Scalar>(
    strategy: Strategy,
    dataset: &Dataset<T>,
    k: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    match strategy {
        Strategy::PlusPlus => plusplus_indices(dataset, k, rng),
        Strategy::UniformRandom => uniform_indices(dataset, k, rng),
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if k > m {
        return Err(Error::validation(format!("k = {k} exceeds the {m} available points")));
    }
    Ok(())
}

/// k-means++ seeding: the first center is uniform over the points, every
/// later one is drawn with probability `D(x, M)² / Σ_y D(y, M)²`.
pub fn seed_plusplus<T: Scalar>(dataset: &Dataset<T>, k: usize, rng: &mut Rng) -> Result<CenterSet<T>> {
    seed_with(Strategy::PlusPlus, dataset, k, rng)
}

/// Indices of the k-means++ centers in draw order.
pub fn plusplus_indices<T: Scalar>(dataset: &Dataset<T>, k: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    let m = dataset.len();
    check_k(k, m)?;
    let first = rng.random_range(0..m);
    let mut chosen = Vec::with_capacity(k);
    chosen.push(first);
    let anchor = dataset.point(first);
    let mut d2: Vec<T> = dataset.points().map(|p| sq_dist(p, anchor)).collect();

    while chosen.len() < k {
        let next = draw_d2(&d2, rng).ok_or_else(|| {
            Error::Degenerate(format!(
                "k = {k} but the {m} points occupy only {} distinct locations",
                chosen.len()
            ))
        })?;
        chosen.push(next);
        let c = dataset.point(next);
        for (slot, p) in d2.iter_mut().zip(dataset.points()) {
            let d = sq_dist(p, c);
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(chosen)
}

/// Inverse-CDF draw proportional to `weights`; `None` when the total is zero.
/// Zero-weight entries are never returned.
fn draw_d2<T: Scalar>(weights: &[T], rng: &mut Rng) -> Option<usize> {
    let total = weights.iter().copied().fold(T::zero(), |a, b| a + b);
    if !(total > T::zero()) {
        return None;
    }
    let target = T::of(rng.random::<f64>()) * total;
    let mut acc = T::zero();
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > T::zero() {
            acc = acc + w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    // rounding left `target` at or past the accumulated total
    last_positive
}

/// Uniform seeding: `k` distinct indices without replacement, in draw order.
pub fn seed_uniform<T: Scalar>(dataset: &Dataset<T>, k: usize, rng: &mut Rng) -> Result<CenterSet<T>> {
    seed_with(Strategy::UniformRandom, dataset, k, rng)
}

pub fn uniform_indices<T: Scalar>(dataset: &Dataset<T>, k: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    check_k(k, dataset.len())?;
    Ok(index::sample(rng, dataset.len(), k).into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_empirical;
    use std::collections::HashMap;

    fn toy() -> Dataset<f64> {
        Dataset::from_values(&[0.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn k_out_of_range() {
        let mut r = rng::from_seed(0);
        assert!(matches!(plusplus_indices(&toy(), 4, &mut r), Err(Error::Validation(_))));
        assert!(matches!(uniform_indices(&toy(), 4, &mut r), Err(Error::Validation(_))));
        assert!(matches!(plusplus_indices(&toy(), 0, &mut r), Err(Error::Validation(_))));
    }

    #[test]
    fn duplicate_locations_are_degenerate() {
        let d = Dataset::from_values(&[2.0, 2.0, 2.0, 5.0]).unwrap();
        let mut r = rng::from_seed(3);
        // two locations suffice for k = 2
        for _ in 0..50 {
            plusplus_indices(&d, 2, &mut r).unwrap();
        }
        let err = plusplus_indices(&d, 3, &mut r).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "{err}");
    }

    #[test]
    fn full_seeding_is_a_permutation() {
        let d = Dataset::from_values(&[0.0, 1.0, 3.0, 7.0, -2.0]).unwrap();
        for seed in 0..20 {
            for strategy in [Strategy::PlusPlus, Strategy::UniformRandom] {
                let mut idx = seed_indices(strategy, &d, 5, &mut rng::from_seed(seed)).unwrap();
                let cs = CenterSet::from_indices(&d, &idx);
                assert_eq!(cost_empirical(&d, &cs).unwrap(), 0.0);
                idx.sort();
                assert_eq!(idx, vec![0, 1, 2, 3, 4]);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let d = Dataset::from_values(&[0.0, 1.0, 3.0, 7.0, -2.0, 4.5]).unwrap();
        for strategy in [Strategy::PlusPlus, Strategy::UniformRandom] {
            let cfg = SeedingConfig {
                k: 3,
                strategy,
                seed: 99,
            };
            assert_eq!(cfg.run(&d).unwrap(), cfg.run(&d).unwrap());
        }
    }

    #[test]
    fn first_center_is_uniform() {
        let n = 60_000;
        let mut counts = [0usize; 3];
        let mut r = rng::from_seed(17);
        for _ in 0..n {
            counts[plusplus_indices(&toy(), 1, &mut r).unwrap()[0]] += 1;
        }
        let se = (1.0 / 3.0 * (2.0 / 3.0) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 4.0 * se);
        }
    }

    #[test]
    fn uniform_pairs_equally_likely() {
        let n = 60_000;
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        let mut r = rng::from_seed(5);
        for _ in 0..n {
            let idx = uniform_indices(&toy(), 2, &mut r).unwrap();
            let key = (idx[0].min(idx[1]), idx[0].max(idx[1]));
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        for (_, c) in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() <= 0.01);
        }
    }

    #[test]
    fn conditional_second_draw_after_zero() {
        // With μ_1 = 0, D² is {0, 1, 9}: P(1) = 1/10, P(3) = 9/10.
        let d2 = [0.0f64, 1.0, 9.0];
        let n = 100_000;
        let mut r = rng::from_seed(8);
        let mut hits = [0usize; 3];
        for _ in 0..n {
            hits[draw_d2(&d2, &mut r).unwrap()] += 1;
        }
        assert_eq!(hits[0], 0);
        let p = hits[2] as f64 / n as f64;
        let se = (0.9f64 * 0.1 / n as f64).sqrt();
        assert!((p - 0.9).abs() < 3.0 * se, "p = {p}");
    }

    #[test]
    fn draw_never_returns_zero_weight() {
        let mut r = rng::from_seed(1);
        let w = [0.0f64, 0.0, 1e-300, 0.0];
        for _ in 0..1000 {
            assert_eq!(draw_d2(&w, &mut r), Some(2));
        }
        assert_eq!(draw_d2(&[0.0f64; 3], &mut r), None);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("plusplus".parse::<Strategy>().unwrap(), Strategy::PlusPlus);
        assert_eq!("random".parse::<Strategy>().unwrap(), Strategy::UniformRandom);
        assert!("greedy".parse::<Strategy>().is_err());
    }
}
