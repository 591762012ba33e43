//! Dopamine readout of the empathy network and the prediction-error signal
//! over one distress episode: onset, sustained distress, relief.
//!
//! cargo run --release --example dopamine_rpe

use empathy_snn::empathy::Calibrator;
use empathy_snn::env::{AgentId, OutwardCue};
use empathy_snn::neuromodulation::{DopamineCircuit, DopamineParams, RpePredictor};

fn main() -> empathy_snn::Result<()> {
    let cal = Calibrator::new(Default::default())?;
    for p in [0.0, 0.45, 0.51] {
        let (net, level) = cal.level(p)?;
        let per = net.params.neurons_per_category;
        let circuit = DopamineCircuit::new(DopamineParams::default(), per)?;
        let inf = net.infer_emotion(OutwardCue::red(AgentId::B))?;
        let s_red = circuit.measure_da_rate(&inf.trains.emotion[..per], net.params.inference_ms)?;

        let mut rpe = RpePredictor::default();
        rpe.reset();
        let calm: Vec<f64> = (0..3).map(|_| rpe.update(1.0)).collect();
        let distress: Vec<f64> = (0..6).map(|_| rpe.update(s_red)).collect();
        let relief = rpe.update(1.0);
        let fmt = |v: &[f64]| v.iter().map(|d| format!("{d:+.2}")).collect::<Vec<_>>().join(" ");
        println!("F_e {:>5.1}%  S {:.3}", level.f_e, s_red);
        println!("  calm     {}", fmt(&calm));
        println!("  distress {}", fmt(&distress));
        println!("  relief   {relief:+.2}");
    }
    Ok(())
}
