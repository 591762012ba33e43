use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{distance_analysis, distance_csv, DistanceRow};
use super::sweep::{
    firing_rate_csv, preference_csv, summarise, sweep_csv, sweep_levels, sweep_windows_csv, sweep_with, SweepResult,
};
use super::train::{episodes_csv, run_training, steps_csv, TrainingRun};
use crate::empathy::{calibration_csv, Calibrator, EmpathyLevel};
use crate::env::{AgentId, OutwardCue};
use crate::error::{Error, Result};
use crate::snn::SpikeLog;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Train,
    Sweep,
    Calibrate,
    Distance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Distance => "distance",
        }
    }
}

/// Everything needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub package_version: String,
    pub config_hash: String,
    pub seed: u64,
    /// Requested `F_e` for single-agent runs.
    pub target_fe: Option<f64>,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
}

struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, command: Command, config: &ExperimentConfig, target_fe: Option<f64>) -> Result<Manifest> {
        self.files.push(MANIFEST_FILE.to_string());
        let manifest = Manifest {
            command,
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            target_fe,
            config: config.clone(),
            files: self.files.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Serde(e.to_string()))?;
        let path = self.root.join(MANIFEST_FILE);
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Spike raster of the empathy network answering a red cue.
fn red_cue_raster(run: &TrainingRun) -> Result<String> {
    let mut log = SpikeLog::new();
    run.agent
        .empathy
        .present_cue(OutwardCue::red(AgentId::B), true, Some(&mut log))?;
    Ok(log.to_csv())
}

/// Writes the artifacts of one training run into `out`.
pub fn emit_training(
    out: &Path,
    config: &ExperimentConfig,
    target_fe: Option<f64>,
    run: &TrainingRun,
) -> Result<Manifest> {
    let mut dir = OutDir::create(out)?;
    let point = summarise(config, 0, config.seed, run)?;
    let points = std::slice::from_ref(&point);
    dir.write("episodes.csv", &episodes_csv(&run.metrics))?;
    dir.write("steps.csv", &steps_csv(&run.steps))?;
    dir.write("policy_map.csv", &run.agent.decision.policy_map_csv())?;
    dir.write("firing_rates.csv", &firing_rate_csv(points))?;
    dir.write("preference.csv", &preference_csv(points))?;
    dir.write("spikes.csv", &red_cue_raster(run)?)?;
    dir.write("scenario.txt", &run.scenario.to_text())?;
    dir.write("empathy_snapshot.json", &run.agent.empathy.to_snapshot_json()?)?;
    dir.finish(Command::Train, config, target_fe)
}

fn write_sweep(dir: &mut OutDir, result: &SweepResult) -> Result<()> {
    let points = &result.points;
    dir.write("sweep.csv", &sweep_csv(points))?;
    dir.write("sweep_windows.csv", &sweep_windows_csv(points))?;
    dir.write("firing_rates.csv", &firing_rate_csv(points))?;
    dir.write("preference.csv", &preference_csv(points))?;
    let levels: Vec<EmpathyLevel> = result.runs.iter().map(|r| r.agent.level).collect();
    dir.write("calibration.csv", &calibration_csv(&levels))?;
    let correlation = serde_json::to_string_pretty(&result.correlation).map_err(|e| Error::Serde(e.to_string()))?;
    dir.write("correlation.json", &(correlation + "\n"))?;
    for (p, run) in points.iter().zip(&result.runs) {
        let stem = format!("points/{:02}", p.index);
        dir.write(&format!("{stem}/episodes.csv"), &episodes_csv(&run.metrics))?;
        dir.write(&format!("{stem}/policy_map.csv"), &run.agent.decision.policy_map_csv())?;
        dir.write(&format!("{stem}/scenario.txt"), &run.scenario.to_text())?;
        dir.write(
            &format!("{stem}/empathy_snapshot.json"),
            &run.agent.empathy.to_snapshot_json()?,
        )?;
    }
    Ok(())
}

pub fn emit_sweep(out: &Path, config: &ExperimentConfig, result: &SweepResult) -> Result<Manifest> {
    let mut dir = OutDir::create(out)?;
    write_sweep(&mut dir, result)?;
    dir.finish(Command::Sweep, config, None)
}

/// Converged-window distance table of a sweep.
pub fn sweep_distance_table(config: &ExperimentConfig, result: &SweepResult) -> Vec<DistanceRow> {
    let n = config.training.converged_episodes;
    let runs: Vec<(f64, &[_])> = result
        .runs
        .iter()
        .map(|r| (r.agent.level.f_e, &r.metrics[r.metrics.len().saturating_sub(n)..]))
        .collect();
    distance_analysis(&runs, &config.distance.bands, config.distance.min_support)
}

pub fn emit_distance(out: &Path, config: &ExperimentConfig, result: &SweepResult) -> Result<Manifest> {
    let mut dir = OutDir::create(out)?;
    write_sweep(&mut dir, result)?;
    dir.write("distance.csv", &distance_csv(&sweep_distance_table(config, result)))?;
    dir.finish(Command::Distance, config, None)
}

pub fn emit_calibration(out: &Path, config: &ExperimentConfig, levels: &[EmpathyLevel]) -> Result<Manifest> {
    let mut dir = OutDir::create(out)?;
    dir.write("calibration.csv", &calibration_csv(levels))?;
    dir.finish(Command::Calibrate, config, None)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
    manifest.config.validate()?;
    if manifest.config.hash() != manifest.config_hash {
        return Err(Error::Config(format!(
            "{}: config hash does not match its config",
            path.display()
        )));
    }
    Ok(manifest)
}

/// Proportions probed by `calibrate`: the configured list, or 0 to 1 in steps of 0.05.
fn calibration_grid(config: &ExperimentConfig) -> Vec<f64> {
    if config.sweep.proportions.is_empty() {
        (0..=20).map(|i| f64::from(i) * 0.05).collect()
    } else {
        config.sweep.proportions.clone()
    }
}

/// Runs `command` and writes its artifacts into `out`.
pub fn execute(command: Command, config: &ExperimentConfig, target_fe: Option<f64>, out: &Path) -> Result<Manifest> {
    config.validate()?;
    let calibrator = Calibrator::new(config.empathy)?;
    match command {
        Command::Train => {
            let (net, level) = calibrator.find_proportion(target_fe.unwrap_or(100.0))?;
            let run = run_training(config, net, level)?;
            emit_training(out, config, target_fe, &run)
        }
        Command::Sweep | Command::Distance => {
            let props: Vec<f64> = sweep_levels(config, &calibrator)?
                .iter()
                .map(|l| l.inhibitory_proportion)
                .collect();
            let result = sweep_with(config, &calibrator, &props)?;
            if command == Command::Sweep {
                emit_sweep(out, config, &result)
            } else {
                emit_distance(out, config, &result)
            }
        }
        Command::Calibrate => {
            let levels = calibration_grid(config)
                .into_iter()
                .map(|p| calibrator.level(p).map(|(_, l)| l))
                .collect::<Result<Vec<_>>>()?;
            emit_calibration(out, config, &levels)
        }
    }
}

/// Re-runs the experiment recorded in a manifest, writing into `out`.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<Manifest> {
    let m = read_manifest(manifest_path)?;
    execute(m.command, &m.config, m.target_fe, out)
}
