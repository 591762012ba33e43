//! Drive one LIF neuron with constant currents and report its firing rate.
//!
//! cargo run --release --example lif_neuron

use empathy_snn::snn::{current_for_rate, LifParameters, NeuronPopulation};

fn main() -> empathy_snn::Result<()> {
    let params = LifParameters::default();
    println!("target_hz  current  measured_hz");
    for target in [10.0, 25.0, 50.0, 100.0, 200.0] {
        let current = current_for_rate(&params, target);
        let mut pop = NeuronPopulation::new(0, 1, params)?;
        let mut spikes = 0;
        for _ in 0..1000 {
            spikes += pop.step(&[current])?.len();
        }
        println!("{target:>9}  {current:>7.4}  {spikes:>11}");
    }
    Ok(())
}
