//! Empathy level F_e as a function of the inhibitory proportion, and the
//! proportion found for a few target levels.
//!
//! cargo run --release --example empathy_calibration

use empathy_snn::empathy::{Calibrator, EmpathyParams};

fn main() -> empathy_snn::Result<()> {
    let cal = Calibrator::new(EmpathyParams::default())?;
    println!("baseline negative-emotion rate: {:.1} Hz", cal.baseline_hz());
    println!("proportion  f_e");
    for i in 0..=10 {
        let p = f64::from(i) * 0.1;
        let (_, level) = cal.level(p)?;
        println!("{p:>10.1}  {:.1}", level.f_e);
    }
    for target in [90.0, 45.0, 10.0] {
        let (_, level) = cal.find_proportion(target)?;
        println!(
            "target {target}% -> proportion {:.4}, F_e {:.1}",
            level.inhibitory_proportion, level.f_e
        );
    }
    Ok(())
}
