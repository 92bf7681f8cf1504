//! Monte Carlo harness.
//!
//! Repetition `r` of any estimate draws from its own child stream (see
//! [`crate::rng`]), repetitions run in parallel, and results are reduced in
//! repetition order. Outputs are therefore identical for any thread count.
//!
//! The convergence study stands in for the population with one large frozen
//! reference sample. For each sample size `m` it seeds on fresh samples of
//! size `m`, evaluates those centers on the reference, and compares the mean
//! with the expected seeding cost computed on the reference itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{assign, cost_empirical, Assignment, CenterSet};
use crate::dataset::{Dataset, MixtureConfig};
use crate::error::{Error, Result};
use crate::lloyd::{lloyd_refine, LloydConfig};
use crate::oracle::approximation_ratio;
use crate::rng::{self, domain};
use crate::scalar::{stable_sum, Scalar};
use crate::seeding::{seed_with, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub reps: usize,
    pub master_seed: u64,
    pub strategy: Strategy,
    /// Run Lloyd after seeding when set.
    pub refine: Option<LloydConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `√reps`; reported as 0 when `reps == 1`.
    pub stderr: T,
    /// False when `reps == 1` and the standard error is undefined.
    pub stderr_defined: bool,
    pub samples: Vec<T>,
}

impl<T: Scalar> McEstimate<T> {
    pub fn from_samples(samples: Vec<T>) -> Self {
        let (mean, stderr, defined) = mean_stderr(&samples);
        Self {
            mean,
            stderr,
            stderr_defined: defined,
            samples,
        }
    }
}

fn mean_stderr<T: Scalar>(samples: &[T]) -> (T, T, bool) {
    let n = samples.len();
    let mean = stable_sum(samples) / T::from_count(n);
    if n < 2 {
        return (mean, T::zero(), false);
    }
    let dev: Vec<T> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = stable_sum(&dev) / T::from_count(n - 1);
    (mean, (var / T::from_count(n)).sqrt(), true)
}

fn seed_and_score<T: Scalar>(
    dataset: &Dataset<T>,
    k: usize,
    strategy: Strategy,
    refine: Option<&LloydConfig>,
    rng: &mut rng::Rng,
) -> Result<(CenterSet<T>, T)> {
    let seeded = seed_with(strategy, dataset, k, rng)?;
    match refine {
        Some(cfg) => {
            let trace = lloyd_refine(dataset, &seeded, cfg)?;
            let cost = trace.final_cost();
            Ok((trace.final_centers, cost))
        }
        None => {
            let cost = cost_empirical(dataset, &seeded)?;
            Ok((seeded, cost))
        }
    }
}

/// Monte Carlo estimate of the expected k-means++ cost on `dataset`, with
/// optional default Lloyd refinement.
pub fn mc_expected_cost<T: Scalar>(
    dataset: &Dataset<T>,
    k: usize,
    reps: usize,
    master_seed: u64,
    refine: bool,
) -> Result<McEstimate<T>> {
    mc_expected_cost_with(
        dataset,
        k,
        &McConfig {
            reps,
            master_seed,
            strategy: Strategy::PlusPlus,
            refine: refine.then(LloydConfig::default),
        },
    )
}

pub fn mc_expected_cost_with<T: Scalar>(dataset: &Dataset<T>, k: usize, cfg: &McConfig) -> Result<McEstimate<T>> {
    if cfg.reps == 0 {
        return Err(Error::validation("reps must be at least 1"));
    }
    let samples = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::child(cfg.master_seed, domain::MC_SEEDING, r as u64);
            seed_and_score(dataset, k, cfg.strategy, cfg.refine.as_ref(), &mut rng).map(|(_, c)| c)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(McEstimate::from_samples(samples))
}

/// Cost of centers chosen on one dataset, measured on another.
pub fn cross_evaluate<T: Scalar>(centers: &CenterSet<T>, other: &Dataset<T>) -> Result<T> {
    cost_empirical(other, centers)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceStudySpec {
    #[serde(default)]
    pub mixture: MixtureConfig,
    pub k: usize,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    /// Independent seedings per fresh sample; their mean estimates the
    /// expectation over seedings for that sample.
    #[serde(default = "default_seedings_per_sample")]
    pub seedings_per_sample: usize,
    /// Seedings used for the expectation on the reference sample.
    #[serde(default = "default_ref_reps")]
    pub ref_reps: usize,
    #[serde(default = "default_ref_size")]
    pub ref_size: usize,
    pub master_seed: u64,
    /// Also record a Lloyd-refined track next to the seeding-only one.
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub lloyd: LloydConfig,
}

pub const DEFAULT_SEEDINGS_PER_SAMPLE: usize = 20;
pub const DEFAULT_REF_REPS: usize = 1000;

fn default_seedings_per_sample() -> usize {
    DEFAULT_SEEDINGS_PER_SAMPLE
}

fn default_ref_reps() -> usize {
    DEFAULT_REF_REPS
}

fn default_ref_size() -> usize {
    100_000
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::PlusPlus]
}

pub const MIN_REPS: usize = 30;
pub const REF_SIZE_FACTOR: usize = 10;

impl ConvergenceStudySpec {
    /// The figure setup: 4×4 grid (spacing 1, stdev 0.1), `k = 16`, sample
    /// sizes 100, 330, 1000 and 3300, 50 repetitions, a 100 000-point reference,
    /// k-means++ only, seeding-only.
    pub fn grid_figure(master_seed: u64) -> Self {
        Self {
            mixture: MixtureConfig::default(),
            k: 16,
            sample_sizes: vec![100, 330, 1000, 3300],
            reps: 50,
            seedings_per_sample: DEFAULT_SEEDINGS_PER_SAMPLE,
            ref_reps: DEFAULT_REF_REPS,
            ref_size: default_ref_size(),
            master_seed,
            refine: false,
            strategies: default_strategies(),
            lloyd: LloydConfig::default(),
        }
    }

    /// Checks everything except the reference-size rule.
    fn validate_sizes(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::validation("sample_sizes must not be empty"));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("sample_sizes must be strictly increasing"));
        }
        if self.sample_sizes[0] < self.k {
            return Err(Error::validation(format!(
                "smallest sample size {} is below k = {}",
                self.sample_sizes[0], self.k
            )));
        }
        if self.reps < MIN_REPS {
            return Err(Error::validation(format!(
                "reps = {} is below the minimum of {MIN_REPS}",
                self.reps
            )));
        }
        if self.seedings_per_sample == 0 {
            return Err(Error::validation("seedings_per_sample must be at least 1"));
        }
        if self.ref_reps < MIN_REPS {
            return Err(Error::validation(format!(
                "ref_reps is below the minimum of {MIN_REPS}"
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::validation("at least one strategy is required"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_sizes()?;
        let largest = *self.sample_sizes.last().expect("non-empty");
        if self.ref_size < REF_SIZE_FACTOR * largest {
            return Err(Error::validation(format!(
                "ref_size = {} must be at least {REF_SIZE_FACTOR} x the largest sample size {largest}",
                self.ref_size
            )));
        }
        Ok(())
    }

    fn tracks(&self) -> Vec<(Strategy, bool)> {
        let mut out = Vec::new();
        for &s in &self.strategies {
            out.push((s, false));
            if self.refine {
                out.push((s, true));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub m: usize,
    /// Mean cost of the centers on their own sample.
    pub mean_cost: f64,
    pub stderr: f64,
    /// Mean cost of the same centers on the reference sample.
    pub mean_ref_cost: f64,
    pub ref_cost_stderr: f64,
    /// `|mean_ref_cost − ref_expectation|`.
    pub gap: f64,
    /// Standard error of the difference inside `gap`.
    pub gap_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    /// Last gap divided by the first.
    pub final_over_initial: f64,
    /// Spearman correlation between `m` and gap.
    pub rank_correlation: f64,
    /// `final_over_initial <= 0.5` and `rank_correlation < 0`.
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackResult {
    pub strategy: Strategy,
    pub refined: bool,
    /// Expected cost of seeding on the reference itself.
    pub ref_expectation: f64,
    pub ref_expectation_stderr: f64,
    pub per_m: Vec<SizeSummary>,
    pub trend: Trend,
}

/// Mean seeded cost of uniform seeding minus k-means++ at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRow {
    pub m: usize,
    pub refined: bool,
    pub difference: f64,
    /// `difference` in units of its standard error.
    pub separation: f64,
    /// `separation >= 3`; weaker separations are only reported.
    pub significant: bool,
}

/// Repetition-0 clustering kept for figures.
#[derive(Debug, Clone)]
pub struct Exemplar {
    pub m: usize,
    pub strategy: Strategy,
    pub refined: bool,
    pub dataset: Dataset<f64>,
    pub centers: CenterSet<f64>,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub spec: ConvergenceStudySpec,
    pub tracks: Vec<TrackResult>,
    pub dominance: Vec<DominanceRow>,
    pub bound_checks: Vec<BoundCheck>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub exemplars: Vec<Exemplar>,
}

impl ExperimentResult {
    pub fn track(&self, strategy: Strategy, refined: bool) -> Option<&TrackResult> {
        self.tracks
            .iter()
            .find(|t| t.strategy == strategy && t.refined == refined)
    }
}

pub const TREND_NOTE: &str =
    "convergence is judged by trend (final gap <= 0.5 x initial gap, negative rank correlation); no rate is asserted";

/// Draws the reference sample and runs the study on fresh mixture samples.
pub fn run_convergence_study(spec: &ConvergenceStudySpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let mixture = spec.mixture.build()?;
    let reference: Dataset<f64> = mixture.sample_with(
        spec.ref_size,
        &mut rng::child(spec.master_seed, domain::REFERENCE_SAMPLE, 0),
    )?;
    study_against_reference(spec, &reference, |size_idx, rep| {
        let m = spec.sample_sizes[size_idx];
        let mut r = rng::child(spec.master_seed, domain::SAMPLE_BASE + size_idx as u64, rep as u64);
        mixture.sample_with(m, &mut r)
    })
}

/// Study core with a caller-supplied reference and sample source. `sampler`
/// receives `(size index, repetition)`. The reference-size rule is not
/// enforced here, so a sample may be the reference itself.
pub fn study_against_reference<F>(
    spec: &ConvergenceStudySpec,
    reference: &Dataset<f64>,
    sampler: F,
) -> Result<ExperimentResult>
where
    F: Fn(usize, usize) -> Result<Dataset<f64>> + Sync,
{
    spec.validate_sizes()?;
    let tracks = spec.tracks();
    let lloyd = spec.lloyd;

    // One seeding per (rep, strategy); a refined track continues from it.
    let score = |data: &Dataset<f64>, strategy: Strategy, rng: &mut rng::Rng, refine: bool| {
        let seeded = seed_with(strategy, data, spec.k, rng)?;
        let seeded_cost = cost_empirical(data, &seeded)?;
        let refined = if refine {
            Some(lloyd_refine(data, &seeded, &lloyd)?)
        } else {
            None
        };
        Ok::<_, Error>((seeded, seeded_cost, refined))
    };

    // Expected cost on the reference, per track.
    let ref_runs = (0..spec.ref_reps)
        .into_par_iter()
        .map(|r| {
            let mut costs = Vec::with_capacity(tracks.len());
            for &s in &spec.strategies {
                let mut rng = rng::child(spec.master_seed, domain::REFERENCE_SEEDING, r as u64);
                let (_, c, refined) = score(reference, s, &mut rng, spec.refine)?;
                costs.push(c);
                if let Some(t) = refined {
                    costs.push(t.final_cost());
                }
            }
            Ok(costs)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let mut per_track: Vec<Vec<SizeSummary>> = vec![Vec::new(); tracks.len()];
    let mut exemplars = Vec::new();

    for (si, &m) in spec.sample_sizes.iter().enumerate() {
        // per rep: for each track (own cost, reference cost), plus rep-0 exemplars
        let runs = (0..spec.reps)
            .into_par_iter()
            .map(|r| {
                let sample = sampler(si, r)?;
                if sample.dim() != reference.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: reference.dim(),
                        found: sample.dim(),
                    });
                }
                // per track: (own cost, reference cost) averaged over the inner seedings
                let mut costs = vec![(0.0, 0.0); tracks.len()];
                let mut kept = Vec::new();
                let inner = spec.seedings_per_sample;
                for rep_inner in 0..inner {
                    let stream = (r * inner + rep_inner) as u64;
                    let mut ti = 0;
                    for &s in &spec.strategies {
                        let mut rng = rng::child(spec.master_seed, domain::SEEDING_BASE + si as u64, stream);
                        let (seeded, c, refined) = score(&sample, s, &mut rng, spec.refine)?;
                        let on_ref = cross_evaluate(&seeded, reference)?;
                        costs[ti].0 += c;
                        costs[ti].1 += on_ref;
                        ti += 1;
                        if stream == 0 {
                            kept.push((s, false, seeded));
                        }
                        if let Some(t) = refined {
                            costs[ti].0 += t.final_cost();
                            costs[ti].1 += cross_evaluate(&t.final_centers, reference)?;
                            ti += 1;
                            if stream == 0 {
                                kept.push((s, true, t.final_centers));
                            }
                        }
                    }
                }
                for c in &mut costs {
                    c.0 /= inner as f64;
                    c.1 /= inner as f64;
                }
                let kept = if r == 0 {
                    kept.into_iter()
                        .map(|(s, refined, centers)| {
                            let assignment = assign(&sample, &centers)?;
                            Ok(Exemplar {
                                m,
                                strategy: s,
                                refined,
                                dataset: sample.clone(),
                                centers,
                                assignment,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?
                } else {
                    Vec::new()
                };
                Ok((costs, kept))
            })
            .collect::<Result<Vec<_>>>()?;

        for (ti, summaries) in per_track.iter_mut().enumerate() {
            let own: Vec<f64> = runs.iter().map(|(c, _)| c[ti].0).collect();
            let on_ref: Vec<f64> = runs.iter().map(|(c, _)| c[ti].1).collect();
            let ref_exp: Vec<f64> = ref_runs.iter().map(|c| c[ti]).collect();
            let (mean_cost, stderr, _) = mean_stderr(&own);
            let (mean_ref_cost, ref_cost_stderr, _) = mean_stderr(&on_ref);
            let (expectation, expectation_se, _) = mean_stderr(&ref_exp);
            summaries.push(SizeSummary {
                m,
                mean_cost,
                stderr,
                mean_ref_cost,
                ref_cost_stderr,
                gap: (mean_ref_cost - expectation).abs(),
                gap_stderr: ref_cost_stderr.hypot(expectation_se),
            });
        }
        for (_, kept) in runs.into_iter().take(1) {
            exemplars.extend(kept);
        }
    }

    let results: Vec<TrackResult> = tracks
        .iter()
        .zip(per_track)
        .enumerate()
        .map(|(ti, (&(strategy, refined), per_m))| {
            let ref_exp: Vec<f64> = ref_runs.iter().map(|c| c[ti]).collect();
            let (ref_expectation, ref_expectation_stderr, _) = mean_stderr(&ref_exp);
            let gaps: Vec<f64> = per_m.iter().map(|s| s.gap).collect();
            TrackResult {
                strategy,
                refined,
                ref_expectation,
                ref_expectation_stderr,
                trend: trend(&gaps),
                per_m,
            }
        })
        .collect();

    let dominance = dominance_rows(&results);
    Ok(ExperimentResult {
        spec: spec.clone(),
        tracks: results,
        dominance,
        bound_checks: Vec::new(),
        notes: vec![TREND_NOTE.to_string()],
        exemplars,
    })
}

pub fn trend(gaps: &[f64]) -> Trend {
    let (first, last) = match (gaps.first(), gaps.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => {
            return Trend {
                final_over_initial: f64::NAN,
                rank_correlation: f64::NAN,
                passes: false,
            }
        }
    };
    let order: Vec<f64> = (0..gaps.len()).map(|i| i as f64).collect();
    let rho = spearman(&order, gaps);
    let ratio = last / first;
    Trend {
        final_over_initial: ratio,
        rank_correlation: rho,
        passes: last <= 0.5 * first && rho < 0.0,
    }
}

/// Average ranks (1-based), ties share the mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            out[t] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; NaN when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn dominance_rows(tracks: &[TrackResult]) -> Vec<DominanceRow> {
    let mut rows = Vec::new();
    for refined in [false, true] {
        let pp = tracks
            .iter()
            .find(|t| t.strategy == Strategy::PlusPlus && t.refined == refined);
        let ur = tracks
            .iter()
            .find(|t| t.strategy == Strategy::UniformRandom && t.refined == refined);
        if let (Some(pp), Some(ur)) = (pp, ur) {
            for (a, b) in pp.per_m.iter().zip(&ur.per_m) {
                let difference = b.mean_cost - a.mean_cost;
                let se = a.stderr.hypot(b.stderr);
                let separation = if se > 0.0 {
                    difference / se
                } else {
                    f64::INFINITY * difference.signum()
                };
                rows.push(DominanceRow {
                    m: a.m,
                    refined,
                    difference,
                    separation,
                    significant: separation >= 3.0,
                });
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum BoundStatus {
    Pass,
    Fail,
    /// Zero optimum; excluded from pass/fail.
    Degenerate,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub instance: usize,
    pub m: usize,
    pub k: usize,
    pub expected: Option<f64>,
    pub optimum: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: f64,
    pub status: BoundStatus,
}

/// Checks `E[cost] <= 8(ln k + 2)·optimum` exactly on each instance. Errors on
/// one instance are recorded and the suite continues.
pub fn run_bound_suite<T: Scalar>(instances: &[(Dataset<T>, usize)]) -> Vec<BoundCheck> {
    instances
        .iter()
        .enumerate()
        .map(|(i, (d, k))| {
            let bound = crate::oracle::bound_constant(*k);
            match approximation_ratio(d, *k) {
                Ok(check) => BoundCheck {
                    instance: i,
                    m: d.len(),
                    k: *k,
                    expected: check.expected.map(T::as_f64),
                    optimum: Some(check.optimum.as_f64()),
                    ratio: check.ratio.map(T::as_f64),
                    bound,
                    status: match check.passes() {
                        Some(true) => BoundStatus::Pass,
                        Some(false) => BoundStatus::Fail,
                        None => BoundStatus::Degenerate,
                    },
                },
                Err(e) => BoundCheck {
                    instance: i,
                    m: d.len(),
                    k: *k,
                    expected: None,
                    optimum: None,
                    ratio: None,
                    bound,
                    status: BoundStatus::Error(e.to_string()),
                },
            }
        })
        .collect()
}

/// The "small-random" preset: `m` uniform in `4..=10`, `k` in `{2, 3}`, points
/// i.i.d. standard normal in 2-D. Instance `i` uses child stream `i`.
pub fn small_random_instances(count: usize, seed: u64) -> Vec<(Dataset<f64>, usize)> {
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};
    (0..count)
        .map(|i| {
            let mut r = rng::child(seed, domain::INSTANCES, i as u64);
            let m = r.random_range(4..=10);
            let k = r.random_range(2..=3);
            let data: Vec<f64> = (0..2 * m).map(|_| StandardNormal.sample(&mut r)).collect();
            (Dataset::from_flat(2, data).expect("finite normals"), k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_single_rep_is_flagged() {
        let d = Dataset::from_values(&[0.0, 1.0, 3.0]).unwrap();
        let est = mc_expected_cost(&d, 2, 1, 4, false).unwrap();
        assert_eq!(est.stderr, 0.0);
        assert!(!est.stderr_defined);
        assert_eq!(est.samples.len(), 1);
    }

    #[test]
    fn full_seeding_has_zero_mean() {
        let d = Dataset::from_values(&[0.0, 1.0, 3.0, 8.0]).unwrap();
        let est = mc_expected_cost(&d, 4, 200, 4, false).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn cross_evaluate_examples() {
        let d = Dataset::from_values(&[0.0, 1.0, 3.0]).unwrap();
        let m = CenterSet::from_values(&[0.5, 3.0]).unwrap();
        assert!((cross_evaluate(&m, &d).unwrap() - 1.0f64 / 6.0).abs() < 1e-15);
        let support = CenterSet::from_values(&[0.0, 1.0, 3.0]).unwrap();
        assert_eq!(cross_evaluate(&support, &d).unwrap(), 0.0);
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]) - 1.0).abs() < 1e-12);
        // ties: ranks of y are [1.5, 1.5, 3]
        let rho = spearman(&[1.0, 2.0, 3.0], &[2.0, 2.0, 7.0]);
        assert!((rho - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn trend_rule() {
        assert!(trend(&[0.1, 0.08, 0.03, 0.01]).passes);
        assert!(!trend(&[0.1, 0.08, 0.06, 0.06]).passes);
        // ratio 0.5 but zero rank correlation
        assert!(!trend(&[0.1, 0.01, 0.2, 0.05]).passes);
    }

    fn small_spec() -> ConvergenceStudySpec {
        ConvergenceStudySpec {
            mixture: MixtureConfig::Grid {
                rows: 2,
                cols: 2,
                spacing: 1.0,
                stdev: 0.1,
            },
            k: 4,
            sample_sizes: vec![20, 40],
            reps: 30,
            seedings_per_sample: 2,
            ref_reps: 30,
            ref_size: 400,
            master_seed: 1,
            refine: false,
            strategies: vec![Strategy::PlusPlus],
            lloyd: LloydConfig::default(),
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec();
        s.reps = 29;
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
        let mut s = small_spec();
        s.sample_sizes = vec![40, 20];
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.ref_size = 399;
        assert!(s.validate().is_err());
        assert!(small_spec().validate().is_ok());
        assert!(run_convergence_study(&ConvergenceStudySpec {
            reps: 5,
            ..small_spec()
        })
        .is_err());
    }

    #[test]
    fn study_shapes() {
        let mut s = small_spec();
        s.refine = true;
        s.strategies = vec![Strategy::PlusPlus, Strategy::UniformRandom];
        let r = run_convergence_study(&s).unwrap();
        assert_eq!(r.tracks.len(), 4);
        assert!(r.tracks.iter().all(|t| t.per_m.len() == 2));
        assert_eq!(r.exemplars.len(), 8);
        assert_eq!(r.dominance.len(), 4);
        for t in &r.tracks {
            for s in &t.per_m {
                assert!((s.gap - (s.mean_ref_cost - t.ref_expectation).abs()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bound_suite_reports_errors_without_aborting() {
        let too_big = Dataset::from_values(&(0..13).map(f64::from).collect::<Vec<_>>()).unwrap();
        let ok = Dataset::from_values(&[0.0, 1.0, 3.0]).unwrap();
        let same = Dataset::from_values(&[1.0, 1.0, 1.0]).unwrap();
        let rows = run_bound_suite(&[(too_big, 2), (ok, 2), (same, 2)]);
        assert!(matches!(rows[0].status, BoundStatus::Error(_)));
        assert_eq!(rows[1].status, BoundStatus::Pass);
        assert!((rows[1].ratio.unwrap() - 2.6).abs() < 1e-12);
        assert_eq!(rows[2].status, BoundStatus::Degenerate);
    }

    #[test]
    fn instance_preset_ranges() {
        let inst = small_random_instances(100, 9);
        assert!(inst
            .iter()
            .all(|(d, k)| (4..=10).contains(&d.len()) && (2..=3).contains(k) && d.dim() == 2));
        assert_eq!(small_random_instances(3, 9)[2].0, inst[2].0);
    }
}
