//! Altruism against the distance to H at distress onset, per empathy band,
//! on randomized layouts. Takes a few minutes.
//!
//! cargo run --release --example distance_analysis

use empathy_snn::empathy::Calibrator;
use empathy_snn::env::{EnvConfig, LayoutMode};
use empathy_snn::harness::{sweep_distance_table, sweep_empathy_levels, sweep_levels, ExperimentConfig};

fn main() -> empathy_snn::Result<()> {
    let cfg = ExperimentConfig {
        env: EnvConfig {
            layout: LayoutMode::Randomized,
            random_a_start: true,
            ..EnvConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let cal = Calibrator::new(cfg.empathy)?;
    let props: Vec<f64> = sweep_levels(&cfg, &cal)?
        .iter()
        .map(|l| l.inhibitory_proportion)
        .collect();
    let result = sweep_empathy_levels(&cfg, &props)?;
    let rows = sweep_distance_table(&cfg, &result);

    for &(lo, hi) in &cfg.distance.bands {
        let cells: Vec<String> = rows
            .iter()
            .filter(|r| r.band_lo == lo && r.band_hi == hi)
            .map(|r| format!("{}:{:.1}", r.distance, r.count))
            .collect();
        println!("F_e {lo:>3}-{hi:<3} {}", cells.join("  "));
    }
    Ok(())
}
