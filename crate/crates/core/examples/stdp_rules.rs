//! The two plasticity kernels and the eligibility trace they feed.
//!
//! cargo run --release --example stdp_rules

use empathy_snn::snn::{ltp_update, stdp_bidirectional, EligibilityTrace, PlasticityParams, SpikeTrain};

fn main() -> empathy_snn::Result<()> {
    let p = PlasticityParams::default();
    let post = SpikeTrain::new(1, vec![50.0]);
    println!("lag_ms  ltp      stdp");
    for lag in [-40.0, -20.0, -5.0, -1.0, 1.0, 5.0, 20.0, 40.0] {
        // lag = t_pre - t_post
        let pre = SpikeTrain::new(0, vec![50.0 + lag]);
        println!(
            "{lag:>6}  {:.5}  {:+.5}",
            ltp_update(&pre, &post, &p),
            stdp_bidirectional(&pre, &post, &p)
        );
    }

    let mut trace = EligibilityTrace::new(1, 1, 10.0);
    let pre = SpikeTrain::new(0, vec![30.0]);
    trace.update(&[stdp_bidirectional(&pre, &post, &p)], 1.0)?;
    print!("\ntrace after a causal pair:");
    for _ in 0..5 {
        print!(" {:.4}", trace.values()[0]);
        trace.update(&[0.0], 1.0)?;
    }
    println!();
    Ok(())
}
