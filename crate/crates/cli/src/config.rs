//! TOML network configuration.
//!
//! Every physical quantity is either a bare number in its base unit (W,
//! linear gain, Hz, m, bit/s, J, 1/W) or a tagged table such as
//! `{ value = 20, unit = "dBm" }`. Omitted fields take the reference
//! defaults, and every defaulted field is recorded in [`LoadedConfig::assumed`]
//! so outputs can echo what was not stated explicitly.
//!
//! ```toml
//! [network]
//! sensor_count = 2
//! shared_harvest_slot = true
//! bandwidth = { value = 10, unit = "MHz" }
//! carrier_frequency = { value = 2.4, unit = "GHz" }
//!
//! [source]
//! transmit_power = { value = 20, unit = "dBm" }
//! antenna_gain = { value = 6, unit = "dBi" }
//!
//! [sensor_defaults]
//! harvest_efficiency = 0.6
//! gamma = { value = 1e6, unit = "1/W" }
//!
//! [[sensors]]
//! distance = { value = 12, unit = "m" }
//!
//! [solver]
//! kkt_tolerance = 1e-6
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::de::{self, Error as _, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use toml::Spanned;
use wpbs_core::rf_link::{dbi_to_linear, dbm_to_watts, wavelength_from_frequency};
use wpbs_core::{presets, LinkParams, NetworkConfig, SensorParams, SolverSettings, SourceParams};

/// A configuration problem, anchored to a position in the file when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    /// 1-based line and column.
    pub position: Option<(usize, usize)>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some((line, column)) = self.position {
            write!(f, ":{line}:{column}")?;
        }
        write!(f, ": ")?;
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A defaulted value echoed into outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumed {
    pub value: f64,
    pub unit: &'static str,
    /// Why the value is what it is.
    pub note: &'static str,
}

const REFERENCE_DEFAULT: &str = "reference default";
const GAMMA_ASSUMPTION: &str = "assumed; the inverse noise ratio is not a published quantity";

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub network: NetworkConfig,
    pub settings: SolverSettings,
    /// Field path to defaulted value, in base units.
    pub assumed: BTreeMap<String, Assumed>,
}

impl LoadedConfig {
    /// Applies the `--extension` override and records it.
    pub fn with_extension(mut self, enabled: Option<bool>) -> Self {
        if let Some(on) = enabled {
            self.network.shared_harvest_slot_enabled = on;
            self.assumed.remove("network.shared_harvest_slot");
        }
        self
    }
}

/// A number with an optional unit tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Option<Unit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Watt,
    Milliwatt,
    Microwatt,
    Dbm,
    Linear,
    Dbi,
    Hertz,
    Kilohertz,
    Megahertz,
    Gigahertz,
    Meter,
    Kilometer,
    BitPerSecond,
    KilobitPerSecond,
    MegabitPerSecond,
    Joule,
    Millijoule,
    Microjoule,
    PerWatt,
}

impl Unit {
    fn parse(tag: &str) -> Option<Unit> {
        Some(match tag {
            "W" => Unit::Watt,
            "mW" => Unit::Milliwatt,
            "uW" | "µW" => Unit::Microwatt,
            "dBm" => Unit::Dbm,
            "linear" => Unit::Linear,
            "dBi" | "dB" => Unit::Dbi,
            "Hz" => Unit::Hertz,
            "kHz" => Unit::Kilohertz,
            "MHz" => Unit::Megahertz,
            "GHz" => Unit::Gigahertz,
            "m" => Unit::Meter,
            "km" => Unit::Kilometer,
            "bps" | "bit/s" => Unit::BitPerSecond,
            "kbps" => Unit::KilobitPerSecond,
            "Mbps" => Unit::MegabitPerSecond,
            "J" => Unit::Joule,
            "mJ" => Unit::Millijoule,
            "uJ" | "µJ" => Unit::Microjoule,
            "1/W" | "W^-1" => Unit::PerWatt,
            _ => return None,
        })
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct QuantityVisitor;

        impl<'de> Visitor<'de> for QuantityVisitor {
            type Value = Quantity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a table `{ value = <number>, unit = \"<unit>\" }`")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity { value: v, unit: None })
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                Ok(Quantity {
                    value: v as f64,
                    unit: None,
                })
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                Ok(Quantity {
                    value: v as f64,
                    unit: None,
                })
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Quantity, A::Error> {
                let mut value = None;
                let mut unit = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "value" => value = Some(map.next_value::<f64>()?),
                        "unit" => {
                            let tag = map.next_value::<String>()?;
                            unit = Some(
                                Unit::parse(&tag).ok_or_else(|| A::Error::custom(format!("unknown unit `{tag}`")))?,
                            );
                        }
                        other => return Err(A::Error::unknown_field(other, &["value", "unit"])),
                    }
                }
                Ok(Quantity {
                    value: value.ok_or_else(|| A::Error::missing_field("value"))?,
                    unit,
                })
            }
        }

        deserializer.deserialize_any(QuantityVisitor)
    }
}

type Field = Option<Spanned<Quantity>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    network: RawNetwork,
    #[serde(default)]
    source: RawSource,
    #[serde(default)]
    sensor_defaults: RawSensor,
    #[serde(default)]
    sensors: Vec<Spanned<RawSensor>>,
    #[serde(default)]
    solver: Option<Spanned<SolverSettings>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    sensor_count: Option<Spanned<i64>>,
    shared_harvest_slot: Option<bool>,
    bandwidth: Field,
    carrier_frequency: Field,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    transmit_power: Field,
    antenna_gain: Field,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    harvest_efficiency: Field,
    rx_antenna_gain: Field,
    distance: Field,
    backscatter_efficiency: Field,
    backscatter_rate: Field,
    tx_efficiency: Field,
    gamma: Field,
    noise_channel_ratio: Field,
    power_cap: Field,
    energy_floor: Field,
}

#[derive(Clone, Copy)]
enum Dimension {
    Power,
    Gain,
    Frequency,
    Length,
    Rate,
    Energy,
    InversePower,
    Ratio,
}

impl Dimension {
    fn base_unit(self) -> &'static str {
        match self {
            Dimension::Power => "W",
            Dimension::Gain => "linear",
            Dimension::Frequency => "Hz",
            Dimension::Length => "m",
            Dimension::Rate => "bit/s",
            Dimension::Energy => "J",
            Dimension::InversePower => "1/W",
            Dimension::Ratio => "",
        }
    }

    fn convert(self, q: Quantity) -> Result<f64, String> {
        let Some(unit) = q.unit else { return Ok(q.value) };
        let v = q.value;
        let converted = match (self, unit) {
            (Dimension::Power, Unit::Watt) => v,
            (Dimension::Power, Unit::Milliwatt) => v * 1e-3,
            (Dimension::Power, Unit::Microwatt) => v * 1e-6,
            (Dimension::Power, Unit::Dbm) => dbm_to_watts(v),
            (Dimension::Gain, Unit::Linear) => v,
            (Dimension::Gain, Unit::Dbi) => dbi_to_linear(v),
            (Dimension::Frequency, Unit::Hertz) => v,
            (Dimension::Frequency, Unit::Kilohertz) => v * 1e3,
            (Dimension::Frequency, Unit::Megahertz) => v * 1e6,
            (Dimension::Frequency, Unit::Gigahertz) => v * 1e9,
            (Dimension::Length, Unit::Meter) => v,
            (Dimension::Length, Unit::Kilometer) => v * 1e3,
            (Dimension::Rate, Unit::BitPerSecond) => v,
            (Dimension::Rate, Unit::KilobitPerSecond) => v * 1e3,
            (Dimension::Rate, Unit::MegabitPerSecond) => v * 1e6,
            (Dimension::Energy, Unit::Joule) => v,
            (Dimension::Energy, Unit::Millijoule) => v * 1e-3,
            (Dimension::Energy, Unit::Microjoule) => v * 1e-6,
            (Dimension::InversePower, Unit::PerWatt) => v,
            (Dimension::Ratio, Unit::Linear) => v,
            _ => return Err(format!("unit not allowed here; expected {}", self.describe())),
        };
        Ok(converted)
    }

    fn describe(self) -> &'static str {
        match self {
            Dimension::Power => "W, mW, uW or dBm",
            Dimension::Gain => "linear or dBi",
            Dimension::Frequency => "Hz, kHz, MHz or GHz",
            Dimension::Length => "m or km",
            Dimension::Rate => "bps, kbps or Mbps",
            Dimension::Energy => "J, mJ or uJ",
            Dimension::InversePower => "1/W",
            Dimension::Ratio => "a plain number",
        }
    }
}

#[derive(Clone, Copy)]
enum Range_ {
    Positive,
    NonNegative,
    Unit,
    UnitOpenBelow,
}

impl Range_ {
    fn check(self, v: f64) -> Result<(), &'static str> {
        let ok = v.is_finite()
            && match self {
                Range_::Positive => v > 0.0,
                Range_::NonNegative => v >= 0.0,
                Range_::Unit => (0.0..=1.0).contains(&v),
                Range_::UnitOpenBelow => v > 0.0 && v <= 1.0,
            };
        if ok {
            Ok(())
        } else {
            Err(match self {
                Range_::Positive => "must be finite and > 0",
                Range_::NonNegative => "must be finite and >= 0",
                Range_::Unit => "must lie in [0, 1]",
                Range_::UnitOpenBelow => "must lie in (0, 1]",
            })
        }
    }
}

struct Reader<'a> {
    file: &'a str,
    text: &'a str,
    assumed: BTreeMap<String, Assumed>,
}

impl Reader<'_> {
    fn error(&self, span: Option<Range<usize>>, field: Option<String>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.file.to_string(),
            position: span.map(|s| line_column(self.text, s.start)),
            field,
            message: message.into(),
        }
    }

    /// Reads a quantity, falling back to `default` (recorded as assumed).
    fn quantity(
        &mut self,
        path: &str,
        field: &Field,
        dimension: Dimension,
        range: Range_,
        default: f64,
        note: &'static str,
    ) -> Result<f64, ConfigError> {
        let Some(spanned) = field else {
            self.assumed.insert(
                path.to_string(),
                Assumed {
                    value: default,
                    unit: dimension.base_unit(),
                    note,
                },
            );
            return Ok(default);
        };
        let span = Some(spanned.span());
        let value = dimension
            .convert(*spanned.get_ref())
            .map_err(|m| self.error(span.clone(), Some(path.to_string()), m))?;
        range
            .check(value)
            .map_err(|m| self.error(span, Some(path.to_string()), m))?;
        Ok(value)
    }
}

/// Offset of the first line after `from` that assigns `key`.
fn key_offset(text: &str, from: usize, key: &str) -> Option<usize> {
    if key.is_empty() {
        return None;
    }
    let mut offset = from;
    for line in text[from.min(text.len())..].split_inclusive('\n') {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(offset + line.len() - trimmed.len());
            }
        }
        offset += line.len();
    }
    None
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: file.clone(),
        position: None,
        field: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config(&text, &file)
}

/// Parses configuration text; `file` names the source in error messages.
pub fn parse_config(text: &str, file: &str) -> Result<LoadedConfig, ConfigError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| ConfigError {
        file: file.to_string(),
        position: e.span().map(|s| line_column(text, s.start)),
        field: None,
        message: e.message().trim().to_string(),
    })?;
    let mut reader = Reader {
        file,
        text,
        assumed: BTreeMap::new(),
    };

    let count = match &raw.network.sensor_count {
        Some(c) => {
            let n = *c.get_ref();
            if n < 1 {
                return Err(reader.error(
                    Some(c.span()),
                    Some("network.sensor_count".into()),
                    "must be at least 1",
                ));
            }
            if !raw.sensors.is_empty() && raw.sensors.len() as i64 != n {
                return Err(reader.error(
                    Some(c.span()),
                    Some("network.sensor_count".into()),
                    format!("is {n} but {} [[sensors]] entries are given", raw.sensors.len()),
                ));
            }
            n as usize
        }
        None if !raw.sensors.is_empty() => raw.sensors.len(),
        None => {
            return Err(reader.error(
                None,
                Some("network.sensor_count".into()),
                "is required when no [[sensors]] are given",
            ));
        }
    };
    let shared = match raw.network.shared_harvest_slot {
        Some(on) => on,
        None => {
            reader.assumed.insert(
                "network.shared_harvest_slot".into(),
                Assumed {
                    value: 0.0,
                    unit: "bool",
                    note: "off unless enabled",
                },
            );
            false
        }
    };
    let bandwidth = reader.quantity(
        "network.bandwidth",
        &raw.network.bandwidth,
        Dimension::Frequency,
        Range_::Positive,
        presets::BANDWIDTH_HZ,
        REFERENCE_DEFAULT,
    )?;
    let carrier = reader.quantity(
        "network.carrier_frequency",
        &raw.network.carrier_frequency,
        Dimension::Frequency,
        Range_::Positive,
        presets::CARRIER_HZ,
        REFERENCE_DEFAULT,
    )?;
    let transmit_power = reader.quantity(
        "source.transmit_power",
        &raw.source.transmit_power,
        Dimension::Power,
        Range_::Positive,
        dbm_to_watts(presets::SOURCE_POWER_DBM),
        REFERENCE_DEFAULT,
    )?;
    let antenna_gain = reader.quantity(
        "source.antenna_gain",
        &raw.source.antenna_gain,
        Dimension::Gain,
        Range_::Positive,
        dbi_to_linear(presets::ANTENNA_GAIN_DBI),
        REFERENCE_DEFAULT,
    )?;
    let source = SourceParams {
        transmit_power,
        antenna_gain,
        wavelength: wavelength_from_frequency(carrier).expect("carrier validated positive"),
    };

    let mut sensors = Vec::with_capacity(count);
    for i in 0..count {
        let overrides = raw.sensors.get(i).map(|s| s.get_ref().clone()).unwrap_or_default();
        sensors.push(read_sensor(
            &mut reader,
            &raw.sensor_defaults,
            &overrides,
            i,
            raw.sensors.is_empty(),
        )?);
    }

    let settings = match &raw.solver {
        Some(s) => {
            let settings = *s.get_ref();
            settings.validate().map_err(|e| {
                let (key, reason) = match &e {
                    wpbs_core::Error::InvalidParameter { name, reason } => (name.clone(), reason.clone()),
                    other => (String::new(), other.to_string()),
                };
                let at = key_offset(text, s.span().start, &key).unwrap_or(s.span().start);
                reader.error(Some(at..at), Some(format!("solver.{key}")), reason)
            })?;
            settings
        }
        None => SolverSettings::default(),
    };

    let network = NetworkConfig {
        source,
        bandwidth,
        sensors,
        shared_harvest_slot_enabled: shared,
    };
    network
        .validate()
        .map_err(|e| reader.error(None, None, e.to_string()))?;
    Ok(LoadedConfig {
        network,
        settings,
        assumed: reader.assumed,
    })
}

fn read_sensor(
    reader: &mut Reader<'_>,
    defaults: &RawSensor,
    overrides: &RawSensor,
    index: usize,
    uniform: bool,
) -> Result<SensorParams, ConfigError> {
    // a field set on the sensor wins over `sensor_defaults`, which wins over
    // the reference value; only the last case is an assumption
    let pick = |own: &Field, shared: &Field| -> (Field, String) {
        match (own, shared) {
            (Some(_), _) => (own.clone(), format!("sensors[{index}]")),
            (None, Some(_)) => (shared.clone(), "sensor_defaults".to_string()),
            (None, None) => (
                None,
                if uniform {
                    "sensor_defaults".to_string()
                } else {
                    format!("sensors[{index}]")
                },
            ),
        }
    };
    let mut read = |name: &str, own: &Field, shared: &Field, dimension, range, default, note| {
        let (field, prefix) = pick(own, shared);
        reader.quantity(&format!("{prefix}.{name}"), &field, dimension, range, default, note)
    };
    let d = defaults;
    let o = overrides;
    let harvest_efficiency = read(
        "harvest_efficiency",
        &o.harvest_efficiency,
        &d.harvest_efficiency,
        Dimension::Ratio,
        Range_::Unit,
        presets::HARVEST_EFFICIENCY,
        REFERENCE_DEFAULT,
    )?;
    let rx_antenna_gain = read(
        "rx_antenna_gain",
        &o.rx_antenna_gain,
        &d.rx_antenna_gain,
        Dimension::Gain,
        Range_::Positive,
        dbi_to_linear(presets::ANTENNA_GAIN_DBI),
        REFERENCE_DEFAULT,
    )?;
    let distance = read(
        "distance",
        &o.distance,
        &d.distance,
        Dimension::Length,
        Range_::Positive,
        presets::DISTANCE_M,
        REFERENCE_DEFAULT,
    )?;
    let backscatter_efficiency = read(
        "backscatter_efficiency",
        &o.backscatter_efficiency,
        &d.backscatter_efficiency,
        Dimension::Ratio,
        Range_::Unit,
        presets::BACKSCATTER_EFFICIENCY,
        REFERENCE_DEFAULT,
    )?;
    let backscatter_rate = read(
        "backscatter_rate",
        &o.backscatter_rate,
        &d.backscatter_rate,
        Dimension::Rate,
        Range_::NonNegative,
        presets::BACKSCATTER_RATE,
        REFERENCE_DEFAULT,
    )?;
    let tx_efficiency = read(
        "tx_efficiency",
        &o.tx_efficiency,
        &d.tx_efficiency,
        Dimension::Ratio,
        Range_::UnitOpenBelow,
        presets::TX_EFFICIENCY,
        REFERENCE_DEFAULT,
    )?;
    let power_cap = read(
        "power_cap",
        &o.power_cap,
        &d.power_cap,
        Dimension::Power,
        Range_::Positive,
        dbm_to_watts(presets::POWER_CAP_DBM),
        REFERENCE_DEFAULT,
    )?;
    let energy_floor = read(
        "energy_floor",
        &o.energy_floor,
        &d.energy_floor,
        Dimension::Energy,
        Range_::NonNegative,
        0.0,
        REFERENCE_DEFAULT,
    )?;

    // γ may be given directly or as its reciprocal, but not both
    let gamma_field = o.gamma.as_ref().or(d.gamma.as_ref());
    let ratio_field = o.noise_channel_ratio.as_ref().or(d.noise_channel_ratio.as_ref());
    let noise_channel_ratio = match (gamma_field, ratio_field) {
        (Some(g), Some(_)) => {
            return Err(reader.error(
                Some(g.span()),
                Some("gamma".into()),
                "give either gamma or noise_channel_ratio, not both",
            ))
        }
        (None, Some(_)) => read(
            "noise_channel_ratio",
            &o.noise_channel_ratio,
            &d.noise_channel_ratio,
            Dimension::Power,
            Range_::Positive,
            1.0 / presets::DEFAULT_GAMMA,
            REFERENCE_DEFAULT,
        )?,
        _ => {
            let gamma = read(
                "gamma",
                &o.gamma,
                &d.gamma,
                Dimension::InversePower,
                Range_::Positive,
                presets::DEFAULT_GAMMA,
                GAMMA_ASSUMPTION,
            )?;
            1.0 / gamma
        }
    };

    Ok(SensorParams {
        link: LinkParams {
            harvest_efficiency,
            rx_antenna_gain,
            distance,
        },
        backscatter_efficiency,
        backscatter_rate,
        tx_efficiency,
        noise_channel_ratio,
        power_cap,
        energy_floor,
    })
}
