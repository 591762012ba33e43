//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any fails. The two sweeps dominate the runtime.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use empathy_snn::empathy::{Calibrator, EmpathyNetwork, EmpathyParams, InferenceDiagnostic};
use empathy_snn::env::{self, AgentId, EnvConfig, GridWorld, LayoutMode, OutwardCue, Scenario, TASK_REWARD};
use empathy_snn::harness::{
    altruistic_preference, converged_summary, count_inversions, emit_training, onset_preference, run_training,
    significant_increases, sweep_distance_table, sweep_empathy_levels, sweep_levels, DistanceRow, ExperimentConfig,
    SweepResult, ONSET_COUNT,
};
use empathy_snn::neuromodulation::RpePredictor;
use empathy_snn::rng::stream;
use empathy_snn::snn::{ltp_update, stdp_bidirectional, EligibilityTrace, PlasticityParams, SpikeTrain};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn learning_rules() -> Outcome {
    let p = PlasticityParams::default();
    let pre = SpikeTrain::new(0, vec![10.0]);
    let post = SpikeTrain::new(1, vec![30.0]);
    let ltp = ltp_update(&pre, &post, &p);
    let causal = stdp_bidirectional(&pre, &post, &p);
    let acausal = stdp_bidirectional(&post, &pre, &p);
    let e1 = (-1.0f64).exp();

    let mut trace = EligibilityTrace::new(1, 1, 10.0);
    trace.update(&[1.0], 1.0).map_err(|e| e.to_string())?;
    trace.update(&[0.0], 1.0).map_err(|e| e.to_string())?;
    let one_step = trace.values()[0];
    let mut trace = EligibilityTrace::new(1, 1, 10.0);
    trace.update(&[0.5 * e1], 1.0).map_err(|e| e.to_string())?;
    for _ in 0..10 {
        trace.update(&[0.0], 1.0).map_err(|e| e.to_string())?;
    }
    let decayed = trace.values()[0];

    let mut rpe = RpePredictor::new(30.0, 0.2);
    let da_first = rpe.update(1.0);
    let p_after = rpe.prediction;
    let mut relief = RpePredictor::new(30.0, 0.2);
    relief.prediction = 0.1;
    let da_relief = relief.update(1.0);

    let ok = close(ltp, 0.5 * e1, 1e-9)
        && close(causal, 0.5 * e1, 1e-9)
        && close(acausal, -0.45 * e1, 1e-9)
        && close(one_step, 0.9, 1e-12)
        && close(decayed, 0.5 * e1 * 0.9f64.powi(10), 1e-9)
        && close(da_first, 30.0, 1e-9)
        && close(p_after, 0.2, 1e-12)
        && close(da_relief, 27.0, 1e-9);
    check(
        ok,
        format!(
            "ltp {ltp:.5}, stdp +{causal:.5}/{acausal:.5}, trace 10-step {decayed:.5}, DA {da_first} / {da_relief}"
        ),
    )
}

fn rpe_convergence() -> Outcome {
    let s = 0.37;
    let mut rpe = RpePredictor::new(30.0, 0.2);
    rpe.prediction = 0.9;
    let mut gap = (rpe.prediction - s).abs();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        rpe.update(s);
        let next = (rpe.prediction - s).abs();
        worst = worst.max((next - 0.8 * gap).abs());
        gap = next;
    }
    check(
        worst <= 1e-12,
        format!("max deviation from 0.8x contraction over 50 steps: {worst:e}"),
    )
}

fn mirror_emergence() -> Outcome {
    let params = EmpathyParams::default();
    let mut net = EmpathyNetwork::new(params).map_err(|e| e.to_string())?;
    let untrained = net
        .infer_emotion(OutwardCue::red(AgentId::B))
        .map_err(|e| e.to_string())?;
    net.self_experience_train(params.training_trials)
        .map_err(|e| e.to_string())?;
    let trained = net
        .infer_emotion(OutwardCue::red(AgentId::B))
        .map_err(|e| e.to_string())?;
    let [negative, normal] = trained.rates.emotion;
    let silent = untrained.o_emp == 0
        && untrained.rates.emotion == [0.0, 0.0]
        && untrained.diagnostic == Some(InferenceDiagnostic::NoMirrorResponse);
    check(
        trained.o_emp == -1 && negative >= 2.0 * normal && negative > 0.0 && silent,
        format!(
            "trained red cue: negative {negative} Hz vs normal {normal} Hz; untrained: o_emp {} with {:?}",
            untrained.o_emp, untrained.diagnostic
        ),
    )
}

fn behaviour_contrast() -> Outcome {
    let cfg = ExperimentConfig::default();
    let cal = Calibrator::new(cfg.empathy).map_err(|e| e.to_string())?;
    let (high_net, high) = cal.level(0.0).map_err(|e| e.to_string())?;
    let (low_net, low) = cal.level(1.0).map_err(|e| e.to_string())?;
    let n = cfg.training.converged_episodes;
    let hi = converged_summary(
        &run_training(&cfg, high_net, high).map_err(|e| e.to_string())?.metrics,
        n,
        10,
    );
    let low_run = run_training(&cfg, low_net, low).map_err(|e| e.to_string())?;
    let lo = converged_summary(&low_run.metrics, n, 10);
    let s = &low_run.scenario;
    let bfs = s.shortest_path_cost(s.a_start, s.t_goal).map_err(|e| e.to_string())? as f64;
    check(
        high.f_e == 100.0
            && low.f_e == 0.0
            && hi.altruism_rate >= 0.9
            && lo.altruistic == 0
            && close(lo.mean_cost, -bfs, 1.0),
        format!(
            "F_e 100: altruism {:.1}% of distressed episodes; F_e {}: {} altruistic, cost {:.2} vs BFS -{bfs}",
            100.0 * hi.altruism_rate,
            low.f_e,
            lo.altruistic,
            lo.mean_cost
        ),
    )
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, String> {
    let cal = Calibrator::new(cfg.empathy).map_err(|e| e.to_string())?;
    let props: Vec<f64> = sweep_levels(cfg, &cal)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|l| l.inhibitory_proportion)
        .collect();
    sweep_empathy_levels(cfg, &props).map_err(|e| e.to_string())
}

fn sweep_config(layout: LayoutMode) -> ExperimentConfig {
    ExperimentConfig {
        env: EnvConfig {
            layout,
            random_a_start: true,
            ..EnvConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

fn sweep_shape(sweep: &SweepResult) -> Outcome {
    let pts = &sweep.points;
    let counts: Vec<f64> = pts.iter().map(|p| p.altruistic_per_window).collect();
    let low_ok = pts
        .iter()
        .filter(|p| p.f_e <= 20.0)
        .all(|p| p.altruistic_per_window <= 1.0);
    let high_ok = pts
        .iter()
        .filter(|p| p.f_e >= 95.0)
        .all(|p| p.altruistic_per_window >= 9.0);
    let mid: Vec<f64> = pts
        .iter()
        .filter(|p| p.f_e > 25.0 && p.f_e < 50.0)
        .map(|p| p.altruistic_per_window)
        .collect();
    let mid_ok = !mid.is_empty() && mid.iter().all(|&c| c > 1.0 && c < 9.0);
    let has_low = pts.iter().any(|p| p.f_e <= 20.0);
    let has_high = pts.iter().any(|p| p.f_e >= 95.0);
    // Drops within one count are stochastic tolerance.
    let trend_ok = counts.windows(2).filter(|w| w[1] < w[0] - 1.0).count() <= 1;
    let (r, p) = (sweep.correlation.r(), sweep.correlation.p_value());
    let corr_ok = matches!((r, p), (Some(r), Some(p)) if r > 0.0 && p < 0.05);
    let table: Vec<String> = pts
        .iter()
        .map(|p| format!("{:.0}:{:.1}", p.f_e, p.altruistic_per_window))
        .collect();
    check(
        pts.len() >= 8 && has_low && has_high && low_ok && high_ok && mid_ok && trend_ok && corr_ok,
        format!(
            "{} points [{}], r {:.3}, p {:.2e}",
            pts.len(),
            table.join(" "),
            r.unwrap_or(f64::NAN),
            p.unwrap_or(f64::NAN)
        ),
    )
}

fn firing_chain(sweep: &SweepResult) -> Outcome {
    let pts = &sweep.points;
    let series: [(&str, Vec<f64>); 4] = [
        ("emotion", pts.iter().map(|p| p.negative_emotion_hz).collect()),
        ("mirror", pts.iter().map(|p| p.mirror_hz).collect()),
        ("weights", pts.iter().map(|p| p.pathway_weight).collect()),
        ("peak DA", pts.iter().map(|p| p.da_in_emp).collect()),
    ];
    let sorted = pts.windows(2).all(|w| w[0].f_e <= w[1].f_e);
    let inv: Vec<(&str, usize)> = series.iter().map(|(n, v)| (*n, count_inversions(v))).collect();
    check(
        sorted && inv.iter().all(|(_, k)| *k <= 1),
        format!("inversions along F_e: {inv:?}"),
    )
}

fn preference_threshold(sweep: &SweepResult) -> Outcome {
    let pts = &sweep.points;
    let identity = pts.iter().all(|p| {
        p.r_self_task == TASK_REWARD
            && altruistic_preference(p.da_in_emp, p.r_self_task).is_ok_and(|q| close(q, p.preference, 1e-12))
    });
    let prefs: Vec<f64> = pts.iter().map(|p| p.preference).collect();
    let monotone = count_inversions(&prefs) == 0;
    let onset = onset_preference(pts);
    let onset_ok = onset.is_some_and(|q| close(q, 0.473, 0.08));
    check(
        identity && monotone && onset_ok,
        format!(
            "onset preference {} (target 0.473 +- 0.08), curve non-decreasing: {monotone}, identity holds: {identity}",
            onset.map_or("none".into(), |q| format!("{q:.4}"))
        ),
    )
}

fn distance_table(cfg: &ExperimentConfig, sweep: &SweepResult) -> Outcome {
    let rows = sweep_distance_table(cfg, sweep);
    let mut bands: BTreeMap<(u64, u64), Vec<DistanceRow>> = BTreeMap::new();
    for r in rows {
        bands
            .entry((r.band_lo.to_bits(), r.band_hi.to_bits()))
            .or_default()
            .push(r);
    }
    let bands: Vec<Vec<DistanceRow>> = bands.into_values().collect();
    if bands.len() != cfg.distance.bands.len() || bands.iter().any(|b| b.len() < 2) {
        return Err(format!("only {} populated bands", bands.len()));
    }
    let counts = |b: &[DistanceRow]| b.iter().map(|r| r.count).collect::<Vec<f64>>();
    let high = counts(bands.last().unwrap());
    let spread = high.iter().cloned().fold(f64::MIN, f64::max) - high.iter().cloned().fold(f64::MAX, f64::min);
    // A cell counts as nonzero when it rounds to at least one altruistic episode per 10.
    let low_far = bands[0]
        .iter()
        .filter(|r| r.distance > 2)
        .map(|r| r.count)
        .fold(0.0, f64::max);
    let mids = &bands[1..bands.len() - 1];
    let raw: Vec<usize> = mids.iter().map(|b| count_inversions(&counts(b))).collect();
    let significant: Vec<usize> = mids.iter().map(|b| significant_increases(b, 2.0)).collect();
    check(
        spread <= 1.0 && low_far < ONSET_COUNT && significant.iter().all(|&k| k <= 1),
        format!(
            "high-band spread {spread:.2}; low band max beyond distance 2 {low_far:.2}; mid-band inversions {significant:?} beyond 2 SE ({raw:?} raw)"
        ),
    )
}

fn files_equal(a: &Path, b: &Path, names: &[String]) -> Result<(), String> {
    for n in names {
        let x = std::fs::read(a.join(n)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(n)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{n} differs between runs"));
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let mut cfg = sweep_config(LayoutMode::Randomized);
    cfg.training.episodes = 60;
    cfg.training.converged_episodes = 20;
    cfg.seed = 11;
    let cal = Calibrator::new(cfg.empathy).map_err(|e| e.to_string())?;
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    let mut manifests = Vec::new();
    for d in &dirs {
        let (net, level) = cal.level(0.3).map_err(|e| e.to_string())?;
        let run = run_training(&cfg, net, level).map_err(|e| e.to_string())?;
        manifests.push(emit_training(d.path(), &cfg, Some(level.f_e), &run).map_err(|e| e.to_string())?);
    }
    let csvs: Vec<String> = manifests[0]
        .files
        .iter()
        .filter(|f| f.ends_with(".csv"))
        .cloned()
        .collect();
    files_equal(dirs[0].path(), dirs[1].path(), &manifests[0].files)?;

    let mut scenarios = vec![Scenario::demo()];
    let env_cfg = EnvConfig {
        layout: LayoutMode::Randomized,
        ..EnvConfig::default()
    };
    for i in 0..20 {
        scenarios.push(
            env::reset(&mut stream(5, "acceptance-layout", i), &env_cfg)
                .map_err(|e| e.to_string())?
                .0,
        );
    }
    let scenarios_ok = scenarios
        .iter()
        .all(|s| Scenario::from_text(&s.to_text()).is_ok_and(|t| &t == s && GridWorld::new(t).is_ok()));

    let (net, _) = cal.level(0.45).map_err(|e| e.to_string())?;
    let json = net.to_snapshot_json().map_err(|e| e.to_string())?;
    let back = EmpathyNetwork::from_snapshot_json(&json).map_err(|e| e.to_string())?;
    let snapshot_ok = back.to_snapshot_json().map_err(|e| e.to_string())? == json
        && back
            .infer_emotion(OutwardCue::red(AgentId::B))
            .map_err(|e| e.to_string())?
            .rates
            == net
                .infer_emotion(OutwardCue::red(AgentId::B))
                .map_err(|e| e.to_string())?
                .rates;
    check(
        scenarios_ok && snapshot_ok,
        format!(
            "{} CSVs byte-identical across reruns; {} scenarios round-trip: {scenarios_ok}; snapshot round-trip: {snapshot_ok}",
            csvs.len(),
            scenarios.len()
        ),
    )
}

fn report(id: usize, name: &str, started: Instant, outcome: Outcome) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS {id} {name}: {detail} [{secs:.1}s]");
            true
        }
        Err(detail) => {
            println!("FAIL {id} {name}: {detail} [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    let t = Instant::now();
    ok &= report(1, "learning-rule oracles", t, learning_rules());
    let t = Instant::now();
    ok &= report(2, "prediction-error convergence", t, rpe_convergence());
    let t = Instant::now();
    ok &= report(3, "mirror pathway emergence", t, mirror_emergence());
    let t = Instant::now();
    ok &= report(4, "behaviour contrast on the demo layout", t, behaviour_contrast());

    let t = Instant::now();
    let demo = run_sweep(&sweep_config(LayoutMode::Demo));
    match &demo {
        Ok(sweep) => {
            ok &= report(5, "empathy sweep shape", t, sweep_shape(sweep));
            let t = Instant::now();
            ok &= report(6, "firing-rate chain", t, firing_chain(sweep));
            ok &= report(7, "altruistic preference threshold", t, preference_threshold(sweep));
        }
        Err(e) => {
            for (id, name) in [
                (5, "empathy sweep shape"),
                (6, "firing-rate chain"),
                (7, "altruistic preference threshold"),
            ] {
                ok &= report(id, name, t, Err(format!("sweep failed: {e}")));
            }
        }
    }

    let t = Instant::now();
    let cfg = sweep_config(LayoutMode::Randomized);
    let outcome = run_sweep(&cfg).and_then(|s| distance_table(&cfg, &s));
    ok &= report(8, "distance table on randomized scenarios", t, outcome);
    let t = Instant::now();
    ok &= report(9, "determinism and persistence", t, determinism());

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
