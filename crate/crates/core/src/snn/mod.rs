//! Spiking-network kernels shared by every higher module.

pub mod lif;
pub mod plasticity;
pub mod spikes;
pub mod synapse;

pub use lif::{current_for_rate, LifParameters, NeuronPopulation};
pub use plasticity::{ltp_update, stdp_bidirectional, Pairing, PlasticityParams};
pub use spikes::{firing_rate, FiringRate, SpikeEvent, SpikeLog, SpikeTrain};
pub use synapse::{apply_reward, EligibilityTrace, SynapseSign, SynapticMatrix, TraceDecay};
