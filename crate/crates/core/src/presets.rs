//! Reference parameter sets.
//!
//! 10 MHz bandwidth at 2.4 GHz, 6 dBi antennas at both ends, 10 m links,
//! a 20 dBm source, harvest and transmit efficiencies of 0.6 and a -20 dBm
//! transmit power cap. The inverse noise ratio `γ` is not a published
//! quantity; [`DEFAULT_GAMMA`] is an assumption.

use crate::model::{NetworkConfig, SensorParams};
use crate::rf_link::{dbi_to_linear, dbm_to_watts, wavelength_from_frequency, LinkParams, SourceParams};

pub const BANDWIDTH_HZ: f64 = 10e6;
pub const CARRIER_HZ: f64 = 2.4e9;
pub const ANTENNA_GAIN_DBI: f64 = 6.0;
pub const DISTANCE_M: f64 = 10.0;
pub const SOURCE_POWER_DBM: f64 = 20.0;
pub const HARVEST_EFFICIENCY: f64 = 0.6;
pub const TX_EFFICIENCY: f64 = 0.6;
pub const POWER_CAP_DBM: f64 = -20.0;
pub const BACKSCATTER_RATE: f64 = 5000.0;
pub const BACKSCATTER_EFFICIENCY: f64 = 1.0;
/// Assumed `g / N0`, in W⁻¹.
pub const DEFAULT_GAMMA: f64 = 1e6;

pub fn source() -> SourceParams {
    SourceParams {
        transmit_power: dbm_to_watts(SOURCE_POWER_DBM),
        antenna_gain: dbi_to_linear(ANTENNA_GAIN_DBI),
        wavelength: wavelength_from_frequency(CARRIER_HZ).expect("positive carrier"),
    }
}

pub fn sensor() -> SensorParams {
    SensorParams {
        link: LinkParams {
            harvest_efficiency: HARVEST_EFFICIENCY,
            rx_antenna_gain: dbi_to_linear(ANTENNA_GAIN_DBI),
            distance: DISTANCE_M,
        },
        backscatter_efficiency: BACKSCATTER_EFFICIENCY,
        backscatter_rate: BACKSCATTER_RATE,
        tx_efficiency: TX_EFFICIENCY,
        noise_channel_ratio: 1.0 / DEFAULT_GAMMA,
        power_cap: dbm_to_watts(POWER_CAP_DBM),
        energy_floor: 0.0,
    }
}

/// `n` identical default sensors.
pub fn network(n: usize, shared_slot: bool) -> NetworkConfig {
    NetworkConfig {
        source: source(),
        bandwidth: BANDWIDTH_HZ,
        sensors: vec![sensor(); n],
        shared_harvest_slot_enabled: shared_slot,
    }
}

/// Single-sensor feasible-region setup: 1.8 W source, 4 kbps backscatter,
/// 1e-5 W cap and a 1e-6 J energy floor, with the shared slot enabled.
pub fn fig2_network(harvest_efficiency: f64) -> NetworkConfig {
    let mut config = network(1, true);
    config.source.transmit_power = 1.8;
    let s = &mut config.sensors[0];
    s.link.harvest_efficiency = harvest_efficiency;
    s.backscatter_rate = 4000.0;
    s.power_cap = 1e-5;
    s.energy_floor = 1e-6;
    config
}
