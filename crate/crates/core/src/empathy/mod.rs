//! Affective empathy: a three-region loop (emotion, mirror, perception) that
//! learns self-experience associations with an LTP-only rule and later maps an
//! observed cue back onto the observer's own emotion neurons.
//!
//! The empathy level is set by tonic inhibitory input onto the emotion region.
//! Each network is trained with its own inhibition, and `F_e` is its
//! negative-emotion rate under a red cue as a percentage of an uninhibited
//! network's rate.

mod calibration;
mod network;

pub use calibration::{calibrate_empathy_level, calibration_csv, Calibrator, EmpathyLevel};
pub use network::{
    category_index, cue_category, EmpathyNetwork, EmpathyParams, Inference, InferenceDiagnostic, Region, RegionRates,
    RegionTrains, EMOTION_POP_ID, MIRROR_POP_ID, PERCEPTION_POP_ID, SNAPSHOT_VERSION,
};
