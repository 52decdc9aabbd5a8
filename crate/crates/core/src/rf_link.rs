//! Link-budget arithmetic: unit conversions and free-space received power.
//!
//! Everything past the configuration boundary is in linear units (watts,
//! linear antenna gain, meters).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used for every wavelength computation, in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

pub fn dbm_to_watts(level_dbm: f64) -> f64 {
    10f64.powf((level_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn dbi_to_linear(gain_dbi: f64) -> f64 {
    10f64.powf(gain_dbi / 10.0)
}

pub fn wavelength_from_frequency(freq_hz: f64) -> Result<f64> {
    if freq_hz <= 0.0 || !freq_hz.is_finite() {
        return Err(Error::invalid(
            "frequency",
            format!("must be positive and finite, got {freq_hz}"),
        ));
    }
    Ok(SPEED_OF_LIGHT / freq_hz)
}

/// The dedicated RF energy source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Watts.
    pub transmit_power: f64,
    /// Linear gain.
    pub antenna_gain: f64,
    /// Meters.
    pub wavelength: f64,
}

impl SourceParams {
    pub fn new(transmit_power: f64, antenna_gain: f64, wavelength: f64) -> Result<Self> {
        let source = SourceParams {
            transmit_power,
            antenna_gain,
            wavelength,
        };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        positive("transmit_power", self.transmit_power)?;
        positive("antenna_gain", self.antenna_gain)?;
        positive("wavelength", self.wavelength)
    }
}

/// Source-to-sensor link as seen by the sensor's rectifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Fraction of incident RF power converted to stored energy, in [0, 1].
    pub harvest_efficiency: f64,
    /// Linear gain.
    pub rx_antenna_gain: f64,
    /// Meters.
    pub distance: f64,
}

impl LinkParams {
    pub fn new(harvest_efficiency: f64, rx_antenna_gain: f64, distance: f64) -> Result<Self> {
        let link = LinkParams {
            harvest_efficiency,
            rx_antenna_gain,
            distance,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        unit_interval("harvest_efficiency", self.harvest_efficiency)?;
        positive("rx_antenna_gain", self.rx_antenna_gain)?;
        positive("distance", self.distance)
    }
}

/// Harvestable power at the sensor under the free-space Friis law,
/// `δ·P·Gt·Gr·λ² / (4πd)²`.
pub fn received_power(source: &SourceParams, link: &LinkParams) -> f64 {
    let spreading = 4.0 * PI * link.distance;
    link.harvest_efficiency
        * source.transmit_power
        * source.antenna_gain
        * link.rx_antenna_gain
        * source.wavelength
        * source.wavelength
        / (spreading * spreading)
}

pub(crate) fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

pub(crate) fn non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be non-negative and finite, got {value}"),
        ))
    }
}

pub(crate) fn unit_interval(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {value}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_source(power: f64) -> SourceParams {
        SourceParams::new(power, dbi_to_linear(6.0), wavelength_from_frequency(2.4e9).unwrap()).unwrap()
    }

    fn link(distance: f64) -> LinkParams {
        LinkParams::new(0.6, dbi_to_linear(6.0), distance).unwrap()
    }

    #[test]
    fn dbm_reference_points() {
        assert_relative_eq!(dbm_to_watts(20.0), 0.1, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(0.0), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(-20.0), 1e-5, max_relative = 1e-12);
    }

    #[test]
    fn dbi_reference_points() {
        assert_eq!(dbi_to_linear(0.0), 1.0);
        assert_relative_eq!(dbi_to_linear(6.0), 3.9811, max_relative = 1e-4);
        assert_relative_eq!(dbi_to_linear(10.0), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn wavelengths() {
        assert_relative_eq!(wavelength_from_frequency(2.4e9).unwrap(), 0.12492, max_relative = 1e-4);
        assert_relative_eq!(wavelength_from_frequency(2.998e8).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(wavelength_from_frequency(1.2e9).unwrap(), 0.24983, max_relative = 1e-4);
        assert!(wavelength_from_frequency(0.0).is_err());
        assert!(wavelength_from_frequency(-1.0).is_err());
    }

    #[test]
    fn friis_link_budget() {
        // frozen from an independent evaluation of the Friis formula
        assert_relative_eq!(
            received_power(&paper_source(0.1), &link(10.0)),
            9.396633666302901e-7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            received_power(&paper_source(0.1), &link(20.0)),
            2.3491584165757252e-7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            received_power(&paper_source(1.8), &link(10.0)),
            1.691394059934522e-5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn invariants_rejected() {
        assert!(SourceParams::new(0.0, 1.0, 1.0).is_err());
        assert!(SourceParams::new(1.0, -1.0, 1.0).is_err());
        assert!(LinkParams::new(1.5, 1.0, 1.0).is_err());
        assert!(LinkParams::new(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn distance_law() {
        let source = paper_source(0.1);
        let reference = received_power(&source, &link(1.0));
        for d in [1.0, 2.0, 5.0, 10.0, 50.0] {
            assert_relative_eq!(
                received_power(&source, &link(d)) * d * d,
                reference,
                max_relative = 1e-12
            );
        }
    }

    proptest! {
        #[test]
        fn dbm_round_trip(x in -100.0f64..60.0) {
            prop_assert!((watts_to_dbm(dbm_to_watts(x)) - x).abs() <= 1e-9);
        }

        #[test]
        fn homogeneous_in_each_factor(
            delta in 0.01f64..1.0,
            power in 1e-3f64..10.0,
            gt in 0.1f64..20.0,
            gr in 0.1f64..20.0,
        ) {
            let source = SourceParams { transmit_power: power, antenna_gain: gt, wavelength: 0.125 };
            let link = LinkParams { harvest_efficiency: delta, rx_antenna_gain: gr, distance: 7.0 };
            let base = received_power(&source, &link);
            let doubled = [
                received_power(&source, &LinkParams { harvest_efficiency: delta * 2.0, ..link }),
                received_power(&SourceParams { transmit_power: power * 2.0, ..source }, &link),
                received_power(&SourceParams { antenna_gain: gt * 2.0, ..source }, &link),
                received_power(&source, &LinkParams { rx_antenna_gain: gr * 2.0, ..link }),
            ];
            for value in doubled {
                prop_assert!((value / base - 2.0).abs() <= 1e-12);
            }
        }
    }
}
