//! Self-experience training of the three-region empathy network, then
//! inference on the two outward cues.
//!
//! cargo run --release --example mirror_empathy

use empathy_snn::empathy::{EmpathyNetwork, EmpathyParams};
use empathy_snn::env::{AgentId, OutwardCue};

fn main() -> empathy_snn::Result<()> {
    let params = EmpathyParams::default();
    let mut net = EmpathyNetwork::new(params)?;
    let before = net.infer_emotion(OutwardCue::red(AgentId::B))?;
    println!("untrained, red cue: o_emp {} {:?}", before.o_emp, before.diagnostic);

    net.self_experience_train(params.training_trials)?;
    println!(
        "negative pathway weight after {} trials: {:.1}",
        params.training_trials,
        net.negative_pathway_weight()
    );
    for (name, cue) in [
        ("red", OutwardCue::red(AgentId::B)),
        ("green", OutwardCue::green(AgentId::B)),
    ] {
        let inf = net.infer_emotion(cue)?;
        let r = inf.rates;
        println!(
            "{name:>5} cue: o_emp {:>2}  emotion {:>5.1}/{:>5.1} Hz  mirror {:>5.1}/{:>5.1} Hz  (negative/normal)",
            inf.o_emp, r.emotion[0], r.emotion[1], r.mirror[0], r.mirror[1]
        );
    }
    Ok(())
}
