//! Sweep empathy levels on the demo layout with random starts and report the
//! altruism trend and the preference curve. Takes a few minutes.
//!
//! cargo run --release --example empathy_sweep -- [points]

use empathy_snn::empathy::Calibrator;
use empathy_snn::env::{EnvConfig, LayoutMode};
use empathy_snn::harness::{onset_preference, sweep_empathy_levels, sweep_levels, ExperimentConfig};

fn main() -> empathy_snn::Result<()> {
    let mut cfg = ExperimentConfig {
        env: EnvConfig {
            layout: LayoutMode::Demo,
            random_a_start: true,
            ..EnvConfig::default()
        },
        ..ExperimentConfig::default()
    };
    if let Some(n) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        cfg.sweep.points = n;
    }
    let cal = Calibrator::new(cfg.empathy)?;
    let props: Vec<f64> = sweep_levels(&cfg, &cal)?
        .iter()
        .map(|l| l.inhibitory_proportion)
        .collect();
    let result = sweep_empathy_levels(&cfg, &props)?;

    println!("  f_e  per_10  cost    da    preference");
    for p in &result.points {
        println!(
            "{:>5.1}  {:>6.2}  {:>6.2}  {:>5.2}  {:.3}",
            p.f_e, p.altruistic_per_window, p.mean_cost, p.da_in_emp, p.preference
        );
    }
    println!("correlation: {:?}", result.correlation);
    println!("onset preference: {:?}", onset_preference(&result.points));
    Ok(())
}
