//! Train one agent on the demo layout and print its learning curve.
//!
//! cargo run --release --example moral_agent -- [F_e percent] [episodes]

use empathy_snn::empathy::Calibrator;
use empathy_snn::harness::{converged_summary, run_training, windowed_altruism, ExperimentConfig};

fn main() -> empathy_snn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let fe: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(100.0);
    let mut cfg = ExperimentConfig::default();
    if let Some(n) = args.get(2).and_then(|s| s.parse().ok()) {
        cfg.training.episodes = n;
        cfg.training.converged_episodes = cfg.training.converged_episodes.min(n);
    }

    let cal = Calibrator::new(cfg.empathy)?;
    let (net, level) = cal.find_proportion(fe)?;
    let run = run_training(&cfg, net, level)?;
    println!(
        "F_e {:.1}% (proportion {:.4}), relief DA {:.2}",
        level.f_e,
        level.inhibitory_proportion,
        run.agent.peak_relief_da()
    );

    let windows = windowed_altruism(&run.metrics, 100);
    println!("altruistic episodes per 100: {windows:?}");
    let s = converged_summary(&run.metrics, cfg.training.converged_episodes, cfg.training.window);
    println!(
        "converged: {:.2} per 10 episodes, rate {:.2}, mean cost {:.2}",
        s.altruistic_per_window, s.altruism_rate, s.mean_cost
    );
    print!(
        "{}",
        run.agent
            .decision
            .policy_map_csv()
            .lines()
            .take(6)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("\n...");
    Ok(())
}
