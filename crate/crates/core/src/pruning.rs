//! Iterative pruning under an importance budget.
//!
//! Every iteration re-measures each splat's `delta_mse` (the exact change in
//! MSE against the fixed targets if it alone were removed) and its
//! importance, then removes the most harmless splats until the removed
//! importance reaches the iteration's budget.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::raster::{analyze, compute_importance, mse_against, render_all};
use crate::scene::{Camera, Splat};

/// Shape of the score mapping `m`; larger values discount negative
/// `delta_mse` more strongly.
pub const DEFAULT_MAPPING_SHAPE: f64 = 10.0;
pub const DEFAULT_ITERATIONS: usize = 48;

/// `m(x) = x` for `x >= 0`, `(sqrt(1 - 2 a x) - 1) / a` below zero.
///
/// Not monotone: both branches are non-negative with a minimum at zero, so
/// ranking by `m` prefers small changes while penalizing negative changes
/// less than positive ones of the same size.
pub fn mapping_m(x: f64, a: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        ((1.0 - 2.0 * a * x).sqrt() - 1.0) / a
    }
}

/// `B = sum of I_k over {k : delta_mse_k < max}`, spread over the remaining
/// iterations.
pub fn compute_budget(delta_mse: &[f64], importance: &[f64], max: f64, remaining: usize) -> f64 {
    assert!(remaining >= 1, "remaining iterations must be at least 1");
    let eligible: f64 = delta_mse
        .iter()
        .zip(importance)
        .filter(|(d, _)| **d < max)
        .map(|(_, i)| *i)
        .sum();
    eligible / remaining as f64
}

/// Indices with `delta_mse < bound`, ordered by `m(delta_mse / max)` with
/// ties by index.
fn ranked_candidates(delta_mse: &[f64], max: f64, a: f64, bound: f64) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = delta_mse
        .iter()
        .enumerate()
        .filter(|(_, d)| **d < bound)
        .map(|(k, d)| (k, mapping_m(d / max, a)))
        .collect();
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    ranked
}

/// Removal set for one iteration, in selection order.
///
/// Candidates with positive importance are added in ascending score order
/// until their importance sum reaches `budget` (the crossing splat is
/// included). Candidates with zero importance cost nothing and are always
/// included.
pub fn select_removal_set(delta_mse: &[f64], importance: &[f64], budget: f64, max: f64, a: f64) -> Vec<usize> {
    select_from(&ranked_candidates(delta_mse, max, a, max), importance, budget)
}

fn select_from(ranked: &[(usize, f64)], importance: &[f64], budget: f64) -> Vec<usize> {
    let mut selected = Vec::new();
    let mut sum = 0.0;
    for &(k, _) in ranked {
        if importance[k] == 0.0 {
            selected.push(k);
        } else if budget > 0.0 && sum < budget {
            selected.push(k);
            sum += importance[k];
        }
    }
    selected
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruneConfig {
    pub max_delta_mse: f64,
    /// Shape of the score mapping.
    pub a: f64,
    pub iterations: usize,
}

impl PruneConfig {
    pub fn new(max_delta_mse: f64) -> Self {
        Self {
            max_delta_mse,
            a: DEFAULT_MAPPING_SHAPE,
            iterations: DEFAULT_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_delta_mse > 0.0) || !(self.a > 0.0) || self.iterations == 0 {
            return Err(Error::Argument(format!(
                "invalid pruning config: max_delta_mse={}, a={}, iterations={}",
                self.max_delta_mse, self.a, self.iterations
            )));
        }
        Ok(())
    }
}

/// What decides eligibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneTarget {
    /// Splats with `delta_mse < max_delta_mse`.
    Threshold,
    /// The lowest-scoring splats above this many survivors. The final
    /// iteration removes all of them, so the survivor count is exact.
    Keep(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneIterationReport {
    pub iteration: usize,
    pub budget: f64,
    pub eligible: usize,
    pub removed_count: usize,
    /// Indices into the original splat list.
    #[serde(skip)]
    pub removed: Vec<u32>,
    pub removed_importance: f64,
    pub cumulative_removed_importance: f64,
    /// Highest `m` score among removed splats.
    pub max_removed_score: Option<f64>,
    pub splats_before: usize,
    pub splats_after: usize,
    /// MSE against the targets before this iteration's removal.
    pub mse: f64,
}

/// Stateful controller; one [`Pruner::step`] per iteration.
pub struct Pruner<'a> {
    cameras: &'a [Camera],
    targets: &'a [Image],
    config: PruneConfig,
    target: PruneTarget,
    splats: Vec<Splat>,
    ids: Vec<u32>,
    iteration: usize,
    cumulative: f64,
    finished: bool,
    pub reports: Vec<PruneIterationReport>,
}

impl<'a> Pruner<'a> {
    pub fn new(
        splats: Vec<Splat>,
        cameras: &'a [Camera],
        targets: &'a [Image],
        config: PruneConfig,
        target: PruneTarget,
    ) -> Result<Self> {
        config.validate()?;
        let ids = (0..splats.len() as u32).collect();
        Ok(Self {
            cameras,
            targets,
            config,
            target,
            splats,
            ids,
            iteration: 0,
            cumulative: 0.0,
            finished: false,
            reports: Vec::new(),
        })
    }

    pub fn splats(&self) -> &[Splat] {
        &self.splats
    }

    /// Replace the current splats in place (same count and order), e.g.
    /// after refitting their colors mid-run.
    pub fn replace_splats(&mut self, splats: Vec<Splat>) {
        assert_eq!(splats.len(), self.splats.len());
        self.splats = splats;
    }

    /// Original indices of the surviving splats.
    pub fn surviving_ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn iterations_done(&self) -> usize {
        self.iteration
    }

    pub fn is_finished(&self) -> bool {
        self.finished || self.iteration >= self.config.iterations
    }

    /// Run one iteration. Returns `false` once finished.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        self.iteration += 1;
        let remaining = self.config.iterations - self.iteration + 1;
        let analysis = analyze(&self.splats, self.cameras, Some(self.targets))?;
        let (dmse, imp) = (&analysis.delta_mse, &analysis.importance);
        let (max, a) = (self.config.max_delta_mse, self.config.a);

        let ranked = match self.target {
            PruneTarget::Threshold => ranked_candidates(dmse, max, a, max),
            PruneTarget::Keep(n) => {
                let mut all = ranked_candidates(dmse, max, a, f64::INFINITY);
                all.truncate(self.splats.len().saturating_sub(n));
                all
            }
        };
        let eligible_importance: f64 = ranked.iter().map(|(k, _)| imp[*k]).sum();
        let budget = eligible_importance / remaining as f64;
        let selected = if remaining == 1 && matches!(self.target, PruneTarget::Keep(_)) {
            ranked.iter().map(|(k, _)| *k).collect()
        } else {
            select_from(&ranked, imp, budget)
        };

        let removed_importance: f64 = selected.iter().map(|&k| imp[k]).sum();
        let scores: std::collections::HashMap<usize, f64> = ranked.iter().copied().collect();
        let max_removed_score = selected.iter().map(|k| scores[k]).reduce(f64::max);
        self.cumulative += removed_importance;
        let before = self.splats.len();

        let mut remove = vec![false; before];
        for &k in &selected {
            remove[k] = true;
        }
        let removed: Vec<u32> = selected.iter().map(|&k| self.ids[k]).collect();
        let mut keep = remove.iter().map(|r| !r);
        self.splats.retain(|_| keep.next().unwrap());
        let mut keep = remove.iter().map(|r| !r);
        self.ids.retain(|_| keep.next().unwrap());

        let report = PruneIterationReport {
            iteration: self.iteration,
            budget,
            eligible: ranked.len(),
            removed_count: removed.len(),
            removed,
            removed_importance,
            cumulative_removed_importance: self.cumulative,
            max_removed_score,
            splats_before: before,
            splats_after: self.splats.len(),
            mse: analysis.mse,
        };
        log::debug!(
            "prune iteration {}: budget {:.3e}, removed {} of {} eligible, mse {:.3e}",
            report.iteration,
            report.budget,
            report.removed_count,
            report.eligible,
            report.mse
        );
        if selected.is_empty() {
            self.finished = true;
        }
        self.reports.push(report);
        Ok(true)
    }

    pub fn finish(self) -> PruneOutcome {
        PruneOutcome {
            splats: self.splats,
            surviving_ids: self.ids,
            reports: self.reports,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PruneOutcome {
    pub splats: Vec<Splat>,
    pub surviving_ids: Vec<u32>,
    pub reports: Vec<PruneIterationReport>,
}

/// Run all pruning iterations against the fixed target renders.
pub fn run_pruning(
    splats: Vec<Splat>,
    cameras: &[Camera],
    targets: &[Image],
    config: PruneConfig,
    target: PruneTarget,
) -> Result<PruneOutcome> {
    let mut pruner = Pruner::new(splats, cameras, targets, config, target)?;
    while pruner.step()? {}
    Ok(pruner.finish())
}

/// Single-shot baseline: keep the `keep` most important splats of the
/// original model (ties broken by index).
pub fn importance_baseline(splats: &[Splat], cameras: &[Camera], keep: usize) -> Vec<Splat> {
    let imp = compute_importance(splats, cameras).importance;
    let mut order: Vec<usize> = (0..splats.len()).collect();
    order.sort_by(|&x, &y| imp[x].total_cmp(&imp[y]).then(x.cmp(&y)));
    let mut remove = vec![false; splats.len()];
    for &k in order.iter().take(splats.len().saturating_sub(keep)) {
        remove[k] = true;
    }
    splats
        .iter()
        .zip(&remove)
        .filter(|(_, r)| !**r)
        .map(|(s, _)| s.clone())
        .collect()
}

/// MSE of a model's renders against the targets.
pub fn model_mse(splats: &[Splat], cameras: &[Camera], targets: &[Image]) -> Result<f64> {
    mse_against(&render_all(splats, cameras), targets)
}
