//! Behavioral model of the analog accelerator: sequential MAC units, the
//! EKGNet dataflow on node voltages, the hardware R-peak detector, gain
//! control, and MAC characterization.

mod agc;
mod characterize;
mod forward;
mod mac;
mod rpeak;
mod simulate;

pub use agc::{agc, AgcResult};
pub use characterize::{characterize_mac, CharacterizationReport, Interval, NrmseCi, MIN_TRIALS};
pub use forward::{analog_forward, AnalogNetwork, ChipMismatch, HardwareOutput};
pub use mac::{draw_mismatch, mac_centered, mac_sequence, MacConfig};
pub use rpeak::{
    hardware_rpeak_detect, Hysteresis, DEFAULT_THRESHOLD_FRACTION, REFRACTORY_SAMPLES,
};
pub use simulate::{simulate, simulate_seed, SimulationSummary};
