//! Monte Carlo experiment drivers. Each trial derives its own seed from the
//! base seed through a splitting function, so trials share no RNG state and
//! results are identical at any worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ergg_core::cliques::{all_edge_clique_numbers, ClassStats, CliqueStats};
use ergg_core::filtering::{apply_filter, FilteredGraph};
use ergg_core::graphgen::{build_rgg, classify_edges, perturb, EdgeLabel, PerturbedGraph, Provenance};
use ergg_core::metrics::recovery_stretch;
use ergg_core::rng::{substream_seed, trial_seed};
use ergg_core::space::sample_points;

use crate::config::ResolvedConfig;
use crate::{HarnessError, HarnessResult};

pub const CLOUD_STREAM: u64 = 0;
pub const PERTURB_STREAM: u64 = 1;

/// Per-class filter outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct FilterOutcome {
    pub good_removed: usize,
    pub bad_kept: usize,
    pub indeterminate_kept: usize,
    pub indeterminate_removed: usize,
    pub survivors: usize,
}

/// One Monte Carlo trial. Gap experiments fill the omega statistics; recovery
/// experiments fill the filter outcome, events and stretch. Wall-clock time
/// is kept out of trials.csv so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub truth_edges: usize,
    pub observed_edges: usize,
    pub kept_edges: usize,
    pub inserted_edges: usize,
    pub good_edges: usize,
    pub bad_edges: usize,
    pub indeterminate_edges: usize,
    pub omega_good: Option<ClassStats>,
    pub omega_bad: Option<ClassStats>,
    pub omega_indeterminate: Option<ClassStats>,
    /// max bad omega < min good omega; vacuously true when no bad edges;
    /// None when the good class is empty or omega was not computed.
    pub gap_holds: Option<bool>,
    /// min good omega - max bad omega, when both classes are nonempty.
    pub gap: Option<f64>,
    pub filter: Option<FilterOutcome>,
    pub e1: Option<bool>,
    pub e2: Option<bool>,
    pub e3: Option<bool>,
    pub alpha: Option<f64>,
    /// The filter removed every observed edge.
    pub degenerate: Option<bool>,
    pub wall_clock_ms: u128,
}

impl TrialRecord {
    fn new(index: usize, seed: u64, pg: &PerturbedGraph, labels: &[EdgeLabel]) -> Self {
        let kept = pg
            .edges
            .iter()
            .filter(|&&(_, _, p)| p == Provenance::KeptOriginal)
            .count();
        let count = |want: EdgeLabel| labels.iter().filter(|&&l| l == want).count();
        let record = TrialRecord {
            index,
            seed,
            truth_edges: pg.truth.edges.len(),
            observed_edges: pg.edges.len(),
            kept_edges: kept,
            inserted_edges: pg.edges.len() - kept,
            good_edges: count(EdgeLabel::Good),
            bad_edges: count(EdgeLabel::Bad),
            indeterminate_edges: count(EdgeLabel::Indeterminate),
            omega_good: None,
            omega_bad: None,
            omega_indeterminate: None,
            gap_holds: None,
            gap: None,
            filter: None,
            e1: None,
            e2: None,
            e3: None,
            alpha: None,
            degenerate: None,
            wall_clock_ms: 0,
        };
        debug_assert_eq!(
            record.good_edges + record.bad_edges + record.indeterminate_edges,
            record.observed_edges
        );
        record
    }
}

/// Generate, perturb and classify trial `index` of the configured model.
pub fn generate_trial(
    resolved: &ResolvedConfig,
    index: usize,
) -> HarnessResult<(PerturbedGraph, Vec<EdgeLabel>, u64)> {
    let seed = trial_seed(resolved.config.base_seed, index as u64);
    let cloud = sample_points(
        &resolved.space,
        resolved.config.n,
        substream_seed(seed, CLOUD_STREAM),
    )?;
    let truth = build_rgg(cloud, resolved.r)?;
    let pg = perturb(
        truth,
        resolved.config.p,
        resolved.config.q,
        substream_seed(seed, PERTURB_STREAM),
    )?;
    let labels = classify_edges(&pg);
    Ok((pg, labels, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub trials: usize,
    /// Trials where max bad omega < min good omega (vacuous truths included).
    pub gap_holds_count: usize,
    pub gap_holds_fraction: f64,
    /// Per-trial gaps where both classes were nonempty, in trial order.
    pub gaps: Vec<f64>,
    pub median_gap: Option<f64>,
    pub trials_with_bad_edges: usize,
    pub min_good_omega: Option<u32>,
    pub max_bad_omega: Option<u32>,
}

fn run_trials<F>(resolved: &ResolvedConfig, run_one: F) -> HarnessResult<Vec<TrialRecord>>
where
    F: Fn(usize) -> HarnessResult<TrialRecord> + Sync,
{
    let trials = resolved.config.trials;
    let run_all = || -> Vec<HarnessResult<TrialRecord>> {
        (0..trials).into_par_iter().map(|i| run_one(i)).collect()
    };
    let results = match resolved.config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| HarnessError::Other(e.to_string()))?
            .install(run_all),
        None => run_all(),
    };
    let mut records = Vec::with_capacity(trials);
    for (i, result) in results.into_iter().enumerate() {
        records.push(result.map_err(|e| match e {
            HarnessError::Infeasible(m) => HarnessError::Infeasible(format!("trial {i}: {m}")),
            HarnessError::Config(m) => HarnessError::Config(format!("trial {i}: {m}")),
            HarnessError::Other(m) => HarnessError::Other(format!("trial {i}: {m}")),
        })?);
    }
    Ok(records)
}

/// Per trial: generate, perturb, classify, compute exact per-edge clique
/// statistics.
pub fn run_gap_experiment(
    resolved: &ResolvedConfig,
) -> HarnessResult<(Vec<TrialRecord>, GapSummary)> {
    let records = run_trials(resolved, |index| {
        let start = Instant::now();
        let (pg, labels, seed) = generate_trial(resolved, index)?;
        let stats: CliqueStats =
            all_edge_clique_numbers(&pg, &labels, resolved.config.clique_budget)?;
        if resolved.config.keep_artifacts {
            let tdir = crate::report::trial_dir(&resolved.out_dir(), index);
            std::fs::create_dir_all(&tdir)?;
            ergg_core::space::write_points_file(&pg.truth.cloud, &tdir.join("points.csv"))?;
            ergg_core::graphgen::write_edge_list_file(&pg, &labels, &tdir.join("edges.txt"))?;
            ergg_core::cliques::write_clique_stats_files(
                &stats,
                &tdir.join("cliquestats.csv"),
                &tdir.join("cliquestats_summary.json"),
            )?;
        }
        let mut record = TrialRecord::new(index, seed, &pg, &labels);
        record.gap_holds = match (stats.good.min, stats.bad.max) {
            (Some(g), Some(b)) => Some(b < g),
            (Some(_), None) => Some(true),
            (None, _) => None,
        };
        record.gap = match (stats.good.min, stats.bad.max) {
            (Some(g), Some(b)) => Some(g as f64 - b as f64),
            _ => None,
        };
        record.omega_good = Some(stats.good);
        record.omega_bad = Some(stats.bad);
        record.omega_indeterminate = Some(stats.indeterminate);
        record.wall_clock_ms = start.elapsed().as_millis();
        Ok(record)
    })?;
    let summary = summarize_gap(&records);
    Ok((records, summary))
}

pub fn summarize_gap(records: &[TrialRecord]) -> GapSummary {
    let gap_holds_count = records
        .iter()
        .filter(|r| r.gap_holds == Some(true))
        .count();
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.gap).collect();
    let median_gap = median(&gaps);
    GapSummary {
        trials: records.len(),
        gap_holds_count,
        gap_holds_fraction: gap_holds_count as f64 / records.len() as f64,
        median_gap,
        trials_with_bad_edges: records.iter().filter(|r| r.bad_edges > 0).count(),
        min_good_omega: records
            .iter()
            .filter_map(|r| r.omega_good.and_then(|s| s.min))
            .min(),
        max_bad_omega: records
            .iter()
            .filter_map(|r| r.omega_bad.and_then(|s| s.max))
            .max(),
        gaps,
    }
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub trials: usize,
    pub alpha_le_3_count: usize,
    pub alpha_le_3_fraction: f64,
    pub events_all_hold_count: usize,
    pub events_all_hold_fraction: f64,
    /// Trials where E1, E2, E3 all held yet alpha > 3. The recovery argument
    /// makes this impossible; any nonzero count is a defect.
    pub implication_violations: usize,
    pub degenerate_trials: usize,
    pub good_removed_total: usize,
    pub bad_kept_total: usize,
}

/// Per trial: generate, perturb, filter with the configured strategy, and
/// measure the stretch of the filtered metric against the hidden one.
pub fn run_recovery_experiment(
    resolved: &ResolvedConfig,
) -> HarnessResult<(Vec<TrialRecord>, RecoverySummary)> {
    let filter = resolved
        .filter_config()
        .resolve()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let records = run_trials(resolved, |index| {
        let start = Instant::now();
        let (pg, labels, seed) = generate_trial(resolved, index)?;
        let filtered: FilteredGraph = apply_filter(
            &pg,
            filter,
            resolved.config.tau,
            resolved.config.clique_budget,
            false,
        )?;
        let stretch = recovery_stretch(&pg, &labels, &filtered)?;
        if resolved.config.keep_artifacts {
            let tdir = crate::report::trial_dir(&resolved.out_dir(), index);
            std::fs::create_dir_all(&tdir)?;
            ergg_core::space::write_points_file(&pg.truth.cloud, &tdir.join("points.csv"))?;
            ergg_core::graphgen::write_edge_list_file(&pg, &labels, &tdir.join("edges.txt"))?;
            ergg_core::filtering::write_filtered_file(&filtered, &tdir.join("filtered.txt"))?;
        }
        let mut record = TrialRecord::new(index, seed, &pg, &labels);
        let mut outcome = FilterOutcome {
            survivors: filtered.kept_count(),
            ..FilterOutcome::default()
        };
        for (rec, label) in filtered.records.iter().zip(&labels) {
            match (label, rec.kept) {
                (EdgeLabel::Good, false) => outcome.good_removed += 1,
                (EdgeLabel::Bad, true) => outcome.bad_kept += 1,
                (EdgeLabel::Indeterminate, true) => outcome.indeterminate_kept += 1,
                (EdgeLabel::Indeterminate, false) => outcome.indeterminate_removed += 1,
                _ => {}
            }
        }
        record.filter = Some(outcome);
        record.e1 = Some(stretch.e1);
        record.e2 = Some(stretch.e2);
        record.e3 = Some(stretch.e3);
        record.alpha = Some(stretch.approx.alpha);
        record.degenerate = Some(filtered.kept_count() == 0 && !pg.edges.is_empty());
        record.wall_clock_ms = start.elapsed().as_millis();
        Ok(record)
    })?;
    let summary = summarize_recovery(&records);
    Ok((records, summary))
}

pub fn summarize_recovery(records: &[TrialRecord]) -> RecoverySummary {
    let alpha_le_3 = records
        .iter()
        .filter(|r| r.alpha.is_some_and(|a| a <= 3.0))
        .count();
    let events_all = records
        .iter()
        .filter(|r| r.e1 == Some(true) && r.e2 == Some(true) && r.e3 == Some(true))
        .count();
    let violations = records
        .iter()
        .filter(|r| {
            r.e1 == Some(true)
                && r.e2 == Some(true)
                && r.e3 == Some(true)
                && r.alpha.is_some_and(|a| a > 3.0)
        })
        .count();
    RecoverySummary {
        trials: records.len(),
        alpha_le_3_count: alpha_le_3,
        alpha_le_3_fraction: alpha_le_3 as f64 / records.len() as f64,
        events_all_hold_count: events_all,
        events_all_hold_fraction: events_all as f64 / records.len() as f64,
        implication_violations: violations,
        degenerate_trials: records
            .iter()
            .filter(|r| r.degenerate == Some(true))
            .count(),
        good_removed_total: records
            .iter()
            .filter_map(|r| r.filter.map(|f| f.good_removed))
            .sum(),
        bad_kept_total: records
            .iter()
            .filter_map(|r| r.filter.map(|f| f.bad_kept))
            .sum(),
    }
}
