//! Straight-line pairwise encounters, closed-loop simulation with
//! perception in the loop, and safety metrics.

mod model;
mod sim;

pub use model::{
    build_encounter, is_nmac, sample_encounter, Encounter, EncounterFeatures, CPA_TIME, DURATION,
    HORIZONTAL_NMAC, PRE_ALERT_RATE_SIGMA, VERTICAL_NMAC,
};
pub use sim::{
    encounter_seed, evaluate_suite, occupancy_weights, run_encounters, simulate, Perceiver,
    PerceiverReport, SimResult, TrialOutcome,
};
