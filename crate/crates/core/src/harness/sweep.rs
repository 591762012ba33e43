use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{altruistic_preference, pearson, Correlation};
use super::train::{converged_summary, run_training, windowed_altruism, TrainingRun};
use crate::empathy::{Calibrator, EmpathyLevel};
use crate::env::TASK_REWARD;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// One empathy level of a sweep, summarised over the converged episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub proportion: f64,
    pub f_e: f64,
    pub seed: u64,
    pub o_emp: i8,
    pub negative_emotion_hz: f64,
    pub mirror_hz: f64,
    /// Learned weight summed over the negative-category links.
    pub pathway_weight: f64,
    pub window_counts: Vec<usize>,
    pub altruistic_per_window: f64,
    pub altruism_rate: f64,
    pub mean_cost: f64,
    /// Mean dopamine reward on relief steps; 0 when no converged episode helped.
    pub mean_relief_da: f64,
    /// Relief dopamine once the predictor has adapted to distress.
    pub da_in_emp: f64,
    pub r_self_task: f64,
    pub preference: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Between `F_e` and converged altruistic counts.
    pub correlation: Correlation,
    /// Full runs, in point order.
    pub runs: Vec<TrainingRun>,
}

/// Evenly spaced targets over `[lo, hi]`.
pub fn fe_targets(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Proportions for a sweep: the configured list, or proportions calibrated to
/// evenly spaced `F_e` targets. Targets that land on an already chosen
/// proportion are dropped, so the result can be shorter than `points`.
pub fn sweep_levels(config: &ExperimentConfig, calibrator: &Calibrator) -> Result<Vec<EmpathyLevel>> {
    if !config.sweep.proportions.is_empty() {
        return config
            .sweep
            .proportions
            .iter()
            .map(|&p| calibrator.level(p).map(|(_, l)| l))
            .collect();
    }
    let (lo, hi) = config.sweep.fe_range;
    let mut levels: Vec<EmpathyLevel> = Vec::new();
    for target in fe_targets(lo, hi, config.sweep.points) {
        let (_, level) = calibrator.find_proportion(target)?;
        if !levels
            .iter()
            .any(|l| l.inhibitory_proportion == level.inhibitory_proportion)
        {
            levels.push(level);
        }
    }
    Ok(levels)
}

/// Trains one agent per proportion. Point `i` runs under master seed
/// `derive_seed(seed, "sweep-point", i)`, so adding points leaves earlier ones
/// untouched. All points share the empathy seed and thus one calibration reference.
pub fn sweep_empathy_levels(config: &ExperimentConfig, proportions: &[f64]) -> Result<SweepResult> {
    config.validate()?;
    check_proportions(proportions)?;
    let calibrator = Calibrator::new(config.empathy)?;
    sweep_with(config, &calibrator, proportions)
}

fn check_proportions(proportions: &[f64]) -> Result<()> {
    if proportions.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: proportions.len(),
        });
    }
    for (i, &p) in proportions.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProportion(p));
        }
        if proportions[..i].contains(&p) {
            return Err(Error::DuplicateProportion(p));
        }
    }
    Ok(())
}

pub(crate) fn sweep_with(
    config: &ExperimentConfig,
    calibrator: &Calibrator,
    proportions: &[f64],
) -> Result<SweepResult> {
    check_proportions(proportions)?;
    let outcomes: Vec<Result<(SweepPoint, TrainingRun)>> = proportions
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let (net, level) = calibrator.level(p)?;
            let seed = derive_seed(config.seed, "sweep-point", i as u64);
            let point_config = config.seeded(seed);
            let run = run_training(&point_config, net, level)?;
            let point = summarise(config, i, seed, &run)?;
            Ok((point, run))
        })
        .collect();
    let mut points = Vec::with_capacity(outcomes.len());
    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (p, r) = o?;
        points.push(p);
        runs.push(r);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.f_e).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.altruistic_per_window).collect();
    let correlation = pearson(&xs, &ys)?;
    Ok(SweepResult {
        points,
        correlation,
        runs,
    })
}

pub(crate) fn summarise(config: &ExperimentConfig, index: usize, seed: u64, run: &TrainingRun) -> Result<SweepPoint> {
    let t = &config.training;
    let summary = converged_summary(&run.metrics, t.converged_episodes, t.window);
    let tail = &run.metrics[run.metrics.len().saturating_sub(t.converged_episodes)..];
    let reliefs: Vec<f64> = tail.iter().filter(|m| m.altruistic).map(|m| m.da_relief).collect();
    let mean_relief_da = if reliefs.is_empty() {
        0.0
    } else {
        reliefs.iter().sum::<f64>() / reliefs.len() as f64
    };
    let agent = &run.agent;
    let da_in_emp = agent.peak_relief_da();
    Ok(SweepPoint {
        index,
        proportion: agent.level.inhibitory_proportion,
        f_e: agent.level.f_e,
        seed,
        o_emp: agent.red.o_emp,
        negative_emotion_hz: agent.red.negative_emotion_hz,
        mirror_hz: agent.red.mirror_hz,
        pathway_weight: agent.empathy.negative_pathway_weight(),
        window_counts: windowed_altruism(&run.metrics, t.window),
        altruistic_per_window: summary.altruistic_per_window,
        altruism_rate: summary.altruism_rate,
        mean_cost: summary.mean_cost,
        mean_relief_da,
        da_in_emp,
        r_self_task: TASK_REWARD,
        preference: altruistic_preference(da_in_emp, TASK_REWARD)?,
    })
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "index,proportion,f_e,seed,altruistic_per_window,altruism_rate,mean_cost,mean_relief_da,da_in_emp,preference\n",
    );
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.index,
            p.proportion,
            p.f_e,
            p.seed,
            p.altruistic_per_window,
            p.altruism_rate,
            p.mean_cost,
            p.mean_relief_da,
            p.da_in_emp,
            p.preference
        );
    }
    out
}

/// Per-window altruistic counts, one column per point.
pub fn sweep_windows_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("window");
    for p in points {
        let _ = write!(out, ",fe_{}", p.f_e);
    }
    out.push('\n');
    let rows = points.iter().map(|p| p.window_counts.len()).max().unwrap_or(0);
    for w in 0..rows {
        let _ = write!(out, "{w}");
        for p in points {
            match p.window_counts.get(w) {
                Some(c) => {
                    let _ = write!(out, ",{c}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn firing_rate_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("f_e,negative_emotion_hz,mirror_hz,pathway_weight,da_in_emp\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.f_e, p.negative_emotion_hz, p.mirror_hz, p.pathway_weight, p.da_in_emp
        );
    }
    out
}

pub fn preference_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("f_e,da_in_emp,r_self_task,preference,altruistic_per_window\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.f_e, p.da_in_emp, p.r_self_task, p.preference, p.altruistic_per_window
        );
    }
    out
}

/// Converged count per 10 distressed episodes that marks altruism as present.
/// Anything below rounds to zero and is left to exploration noise.
pub const ONSET_COUNT: f64 = 0.5;

/// Smallest preference among points whose converged altruism reaches [`ONSET_COUNT`].
pub fn onset_preference(points: &[SweepPoint]) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.altruistic_per_window >= ONSET_COUNT)
        .map(|p| p.preference)
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_are_evenly_spaced() {
        let t = fe_targets(5.0, 100.0, 20);
        assert_eq!(t.len(), 20);
        assert_eq!(t[0], 5.0);
        assert_eq!(t[19], 100.0);
        assert!((t[1] - 10.0).abs() < 1e-12);
        assert_eq!(fe_targets(5.0, 100.0, 1), vec![100.0]);
        assert!(fe_targets(5.0, 100.0, 0).is_empty());
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            sweep_empathy_levels(&cfg, &[0.2]),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        ));
        assert!(matches!(
            sweep_empathy_levels(&cfg, &[0.2, 0.5, 0.2]),
            Err(Error::DuplicateProportion(p)) if p == 0.2
        ));
        assert!(matches!(
            sweep_empathy_levels(&cfg, &[0.2, 1.5]),
            Err(Error::InvalidProportion(_))
        ));
    }
}
