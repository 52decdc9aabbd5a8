//! Throughput of a wireless-powered backscatter network.
//!
//! A normalized frame is split into per-sensor backscatter slots `t_b[n]`,
//! per-sensor active transmission slots `t_a[n]`, and (optionally) a shared
//! slot `t_0` in which the source transmits and every sensor harvests.
//! While sensor `n` backscatters, every other sensor harvests. Sensor `n`
//! then spends all of its harvested energy during `t_a[n]`.
//!
//! Decision vectors are laid out as `[t_b[0..N], t_a[0..N], t_0]`, so the
//! gradient and Hessian always have `2N + 1` coordinates.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rf_link::{self, LinkParams, SourceParams};

/// Transmit times below this are treated as this value when a derivative
/// is requested at the `t_a = 0` boundary.
pub const MIN_TRANSMIT_TIME: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub link: LinkParams,
    /// η, in [0, 1].
    pub backscatter_efficiency: f64,
    /// Bits per normalized frame when backscattering the whole frame.
    pub backscatter_rate: f64,
    /// ε, in (0, 1].
    pub tx_efficiency: f64,
    /// Noise power over channel gain, `N0 / g`, in watts.
    pub noise_channel_ratio: f64,
    /// Maximum active transmit power, watts.
    pub power_cap: f64,
    /// Minimum harvested energy per frame, joules per normalized frame.
    pub energy_floor: f64,
}

impl SensorParams {
    /// Inverse noise-to-channel ratio, `g / N0`.
    pub fn gamma(&self) -> f64 {
        1.0 / self.noise_channel_ratio
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        rf_link::unit_interval("backscatter_efficiency", self.backscatter_efficiency)?;
        rf_link::non_negative("backscatter_rate", self.backscatter_rate)?;
        if !(self.tx_efficiency > 0.0 && self.tx_efficiency <= 1.0) {
            return Err(Error::invalid(
                "tx_efficiency",
                format!("must lie in (0, 1], got {}", self.tx_efficiency),
            ));
        }
        rf_link::positive("noise_channel_ratio", self.noise_channel_ratio)?;
        rf_link::positive("power_cap", self.power_cap)?;
        rf_link::non_negative("energy_floor", self.energy_floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub source: SourceParams,
    /// Sensor-to-gateway channel bandwidth, Hz.
    pub bandwidth: f64,
    pub sensors: Vec<SensorParams>,
    /// Enables the shared harvest slot `t_0`.
    pub shared_harvest_slot_enabled: bool,
}

impl NetworkConfig {
    pub fn new(
        source: SourceParams,
        bandwidth: f64,
        sensors: Vec<SensorParams>,
        shared_harvest_slot_enabled: bool,
    ) -> Result<Self> {
        let config = NetworkConfig {
            source,
            bandwidth,
            sensors,
            shared_harvest_slot_enabled,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        rf_link::positive("bandwidth", self.bandwidth)?;
        if self.sensors.is_empty() {
            return Err(Error::invalid("sensors", "at least one sensor is required"));
        }
        for (n, sensor) in self.sensors.iter().enumerate() {
            sensor.validate().map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::InvalidParameter {
                    name: format!("sensors[{n}].{name}"),
                    reason,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Length of the decision vector, `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.len() + 1
    }

    pub fn with_extension(mut self, enabled: bool) -> Self {
        self.shared_harvest_slot_enabled = enabled;
        self
    }

    /// `ψ_n = ε_n W`.
    pub fn psi(&self, n: usize) -> f64 {
        self.sensors[n].tx_efficiency * self.bandwidth
    }

    pub fn received_power(&self, n: usize) -> f64 {
        rf_link::received_power(&self.source, &self.sensors[n].link)
    }

    pub(crate) fn sensor(&self, n: usize) -> Result<&SensorParams> {
        self.sensors.get(n).ok_or(Error::IndexOutOfRange {
            index: n,
            len: self.len(),
        })
    }

    pub(crate) fn coefficients(&self) -> Vec<SensorCoefficients> {
        (0..self.len())
            .map(|n| {
                let sensor = &self.sensors[n];
                let rx_power = self.received_power(n);
                SensorCoefficients {
                    backscatter: sensor.backscatter_efficiency * sensor.backscatter_rate,
                    psi: self.psi(n),
                    snr_per_joule: sensor.gamma() * rx_power,
                }
            })
            .collect()
    }
}

/// Per-sensor constants of the objective.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SensorCoefficients {
    /// `η B`.
    pub backscatter: f64,
    pub psi: f64,
    /// `γ P_R`: SNR gained per unit of harvest time per unit of transmit time.
    pub snr_per_joule: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAllocation {
    pub backscatter_times: Vec<f64>,
    pub transmit_times: Vec<f64>,
    pub shared_harvest_time: f64,
}

impl TimeAllocation {
    pub fn zeros(n: usize) -> Self {
        TimeAllocation {
            backscatter_times: vec![0.0; n],
            transmit_times: vec![0.0; n],
            shared_harvest_time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.backscatter_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backscatter_times.is_empty()
    }

    pub fn total_backscatter(&self) -> f64 {
        self.backscatter_times.iter().sum()
    }

    pub fn total_transmit(&self) -> f64 {
        self.transmit_times.iter().sum()
    }

    /// Occupied share of the frame, `t_0 + Σ t_b + Σ t_a`.
    pub fn total(&self) -> f64 {
        self.shared_harvest_time + self.total_backscatter() + self.total_transmit()
    }

    /// Flattens to `[t_b, t_a, t_0]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.len() + 1);
        v.extend_from_slice(&self.backscatter_times);
        v.extend_from_slice(&self.transmit_times);
        v.push(self.shared_harvest_time);
        v
    }

    pub fn from_vector(v: &[f64]) -> Result<Self> {
        if v.len() < 3 || v.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2 * (v.len() / 2).max(1) + 1,
                found: v.len(),
            });
        }
        let n = v.len() / 2;
        Ok(TimeAllocation {
            backscatter_times: v[..n].to_vec(),
            transmit_times: v[n..2 * n].to_vec(),
            shared_harvest_time: v[2 * n],
        })
    }

    pub(crate) fn check_dims(&self, config: &NetworkConfig) -> Result<()> {
        for found in [self.backscatter_times.len(), self.transmit_times.len()] {
            if found != config.len() {
                return Err(Error::DimensionMismatch {
                    expected: config.len(),
                    found,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub backscatter_bits: Vec<f64>,
    pub htt_bits: Vec<f64>,
    pub per_sensor_total: Vec<f64>,
    pub network_total: f64,
}

impl RateBreakdown {
    pub fn total_backscatter(&self) -> f64 {
        self.backscatter_bits.iter().sum()
    }

    pub fn total_htt(&self) -> f64 {
        self.htt_bits.iter().sum()
    }
}

/// `ψ t log2(1 + γE / t)`, extended by continuity to 0 at `t = 0`.
pub fn htt_term(psi: f64, gamma: f64, energy: f64, transmit_time: f64) -> f64 {
    if transmit_time <= 0.0 || energy <= 0.0 {
        return 0.0;
    }
    psi * transmit_time * (gamma * energy / transmit_time).ln_1p() / LN_2
}

pub fn harvest_time(alloc: &TimeAllocation, n: usize) -> Result<f64> {
    let own = *alloc.backscatter_times.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: alloc.len(),
    })?;
    Ok(alloc.shared_harvest_time + alloc.total_backscatter() - own)
}

pub fn harvested_energy(alloc: &TimeAllocation, n: usize, config: &NetworkConfig) -> Result<f64> {
    config.sensor(n)?;
    Ok(harvest_time(alloc, n)? * config.received_power(n))
}

pub fn backscatter_bits(alloc: &TimeAllocation, n: usize, config: &NetworkConfig) -> Result<f64> {
    let sensor = config.sensor(n)?;
    let t_b = alloc.backscatter_times.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: alloc.len(),
    })?;
    Ok(sensor.backscatter_efficiency * t_b * sensor.backscatter_rate)
}

pub fn htt_bits(alloc: &TimeAllocation, n: usize, config: &NetworkConfig) -> Result<f64> {
    let sensor = config.sensor(n)?;
    let energy = harvested_energy(alloc, n, config)?;
    let t_a = alloc.transmit_times.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: alloc.len(),
    })?;
    Ok(htt_term(config.psi(n), sensor.gamma(), energy, *t_a))
}

pub fn network_throughput(alloc: &TimeAllocation, config: &NetworkConfig) -> Result<RateBreakdown> {
    alloc.check_dims(config)?;
    let n = config.len();
    let mut backscatter = Vec::with_capacity(n);
    let mut htt = Vec::with_capacity(n);
    for i in 0..n {
        backscatter.push(backscatter_bits(alloc, i, config)?);
        htt.push(htt_bits(alloc, i, config)?);
    }
    let per_sensor: Vec<f64> = backscatter.iter().zip(&htt).map(|(b, a)| b + a).collect();
    let network_total = per_sensor.iter().sum();
    Ok(RateBreakdown {
        backscatter_bits: backscatter,
        htt_bits: htt,
        per_sensor_total: per_sensor,
        network_total,
    })
}

/// Typical magnitude of the objective: what every sensor would deliver
/// backscattering a whole frame plus transmitting a whole frame at the
/// received power. Used to normalize the objective inside the solver.
pub fn throughput_scale(config: &NetworkConfig) -> f64 {
    let scale: f64 = config
        .coefficients()
        .iter()
        .map(|c| c.backscatter + c.psi * c.snr_per_joule.ln_1p() / LN_2)
        .sum();
    if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    }
}

/// Partial derivatives of one sensor's HTT term with respect to its
/// harvest time `s` and its transmit time `t`, plus `w = γ P_R s / t`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HttPartials {
    pub d_harvest: f64,
    pub d_transmit: f64,
    pub w: f64,
    pub t: f64,
}

pub(crate) fn htt_partials(coef: &SensorCoefficients, harvest: f64, transmit: f64) -> HttPartials {
    let t = transmit.max(MIN_TRANSMIT_TIME);
    let w = coef.snr_per_joule * harvest / t;
    HttPartials {
        d_harvest: coef.psi * coef.snr_per_joule / ((1.0 + w) * LN_2),
        d_transmit: coef.psi * (w.ln_1p() - w / (1.0 + w)) / LN_2,
        w,
        t,
    }
}

/// Analytic gradient of the network throughput over `[t_b, t_a, t_0]`.
///
/// At `t_a[n] = 0` the transmit-time partial is evaluated at
/// [`MIN_TRANSMIT_TIME`], i.e. the right limit clamped to a finite value.
pub fn gradient(alloc: &TimeAllocation, config: &NetworkConfig) -> Result<Vec<f64>> {
    alloc.check_dims(config)?;
    Ok(gradient_raw(&config.coefficients(), &alloc.to_vector(), None))
}

/// Analytic Hessian of the network throughput over `[t_b, t_a, t_0]`.
///
/// Each sensor contributes a rank-one negative semidefinite block
/// `-ψ/(t (1+w)² ln 2) · u uᵀ` with `u = γ P_R ∇s − w ∇t_a`.
pub fn hessian(alloc: &TimeAllocation, config: &NetworkConfig) -> Result<DMatrix<f64>> {
    alloc.check_dims(config)?;
    Ok(hessian_raw(&config.coefficients(), &alloc.to_vector(), None))
}

fn harvest_times(n: usize, x: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let total_b: f64 = x[..n].iter().sum();
    let shared = x[2 * n];
    x[..n].iter().map(move |own| shared + total_b - own)
}

/// Objective value on a flat `[t_b, t_a, t_0]` vector. Sensors flagged in
/// `skip` contribute only their backscatter bits.
pub(crate) fn value_raw(coefs: &[SensorCoefficients], x: &[f64], skip: Option<&[bool]>) -> f64 {
    let n = coefs.len();
    harvest_times(n, x)
        .zip(coefs)
        .enumerate()
        .map(|(i, (harvest, c))| {
            let htt = if skip.is_some_and(|s| s[i]) {
                0.0
            } else {
                htt_term(c.psi, c.snr_per_joule, harvest, x[n + i])
            };
            c.backscatter * x[i] + htt
        })
        .sum()
}

pub(crate) fn gradient_raw(coefs: &[SensorCoefficients], x: &[f64], skip: Option<&[bool]>) -> Vec<f64> {
    let n = coefs.len();
    let mut grad = vec![0.0; 2 * n + 1];
    let mut d_harvest = vec![0.0; n];
    for (i, (harvest, coef)) in harvest_times(n, x).zip(coefs).enumerate() {
        if skip.is_some_and(|s| s[i]) {
            continue;
        }
        let p = htt_partials(coef, harvest, x[n + i]);
        d_harvest[i] = p.d_harvest;
        grad[n + i] = p.d_transmit;
    }
    let harvest_sum: f64 = d_harvest.iter().sum();
    for i in 0..n {
        // every other sensor harvests while sensor i backscatters
        grad[i] = coefs[i].backscatter + harvest_sum - d_harvest[i];
    }
    grad[2 * n] = harvest_sum;
    grad
}

pub(crate) fn hessian_raw(coefs: &[SensorCoefficients], x: &[f64], skip: Option<&[bool]>) -> DMatrix<f64> {
    let n = coefs.len();
    let dim = 2 * n + 1;
    let mut h = DMatrix::zeros(dim, dim);
    let mut u = vec![0.0; dim];
    for (i, (harvest, coef)) in harvest_times(n, x).zip(coefs).enumerate() {
        if skip.is_some_and(|s| s[i]) || coef.snr_per_joule == 0.0 || coef.psi == 0.0 {
            continue;
        }
        let p = htt_partials(coef, harvest, x[n + i]);
        let weight = -coef.psi / (p.t * (1.0 + p.w).powi(2) * LN_2);
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = if j < n && j != i || j == 2 * n {
                coef.snr_per_joule
            } else {
                0.0
            };
        }
        u[n + i] = -p.w;
        for c in 0..dim {
            if u[c] == 0.0 {
                continue;
            }
            let wc = weight * u[c];
            for r in 0..dim {
                h[(r, c)] += wc * u[r];
            }
        }
    }
    h
}

/// Curvature `vᵀ H_n v` of sensor `n`'s throughput along a direction whose
/// harvest-time component is `v_s` and transmit-time component is `v_t`:
///
/// `-ψ (v_s γ P_R − v_t w)² / (t_a (1 + w)² ln 2)`, `w = γ E_h / t_a`.
pub fn quadratic_form(alloc: &TimeAllocation, n: usize, config: &NetworkConfig, v_s: f64, v_t: f64) -> Result<f64> {
    let sensor = config.sensor(n)?;
    let t_a = *alloc.transmit_times.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: alloc.len(),
    })?;
    if t_a <= 0.0 {
        return Err(Error::Boundary { sensor: n });
    }
    let gamma = sensor.gamma();
    let rx_power = config.received_power(n);
    let w = gamma * harvested_energy(alloc, n, config)? / t_a;
    let psi = config.psi(n);
    let lin = v_s * gamma * rx_power - v_t * w;
    Ok(-psi * lin * lin / (t_a * (1.0 + w).powi(2) * LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    fn alloc(t_b: &[f64], t_a: &[f64], t_0: f64) -> TimeAllocation {
        TimeAllocation {
            backscatter_times: t_b.to_vec(),
            transmit_times: t_a.to_vec(),
            shared_harvest_time: t_0,
        }
    }

    #[test]
    fn harvest_time_examples() {
        assert_relative_eq!(harvest_time(&alloc(&[0.3, 0.2], &[0.0, 0.0], 0.0), 1).unwrap(), 0.3);
        assert_eq!(harvest_time(&alloc(&[0.4], &[0.0], 0.0), 0).unwrap(), 0.0);
        assert_relative_eq!(harvest_time(&alloc(&[0.4], &[0.0], 0.3), 0).unwrap(), 0.3);
        assert!(matches!(
            harvest_time(&alloc(&[0.4], &[0.0], 0.0), 1),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn harvest_time_is_the_other_sensors_slots() {
        // N=2, t_b=[0.3, 0.2]: sensor 1 harvests while sensor 0 backscatters
        let a = alloc(&[0.3, 0.2], &[0.0, 0.0], 0.0);
        assert_relative_eq!(harvest_time(&a, 0).unwrap(), 0.2);
    }

    #[test]
    fn harvested_energy_examples() {
        let config = presets::network(2, false);
        let p_r = config.received_power(1);
        assert_relative_eq!(p_r, 9.396633666302901e-7, max_relative = 1e-12);
        assert_eq!(
            harvested_energy(&alloc(&[0.0, 0.0], &[0.5, 0.5], 0.0), 1, &config).unwrap(),
            0.0
        );
        let e = harvested_energy(&alloc(&[0.2, 0.0], &[0.0, 0.0], 0.0), 1, &config).unwrap();
        assert_relative_eq!(e, 1.88e-7, max_relative = 1e-3);

        let fig2 = presets::fig2_network(0.6);
        let e = harvested_energy(&alloc(&[0.0], &[0.0], 1.0), 0, &fig2).unwrap();
        assert_relative_eq!(e, 1.69e-5, max_relative = 1e-3);
    }

    #[test]
    fn backscatter_bits_examples() {
        let mut config = presets::network(1, false);
        config.sensors[0].backscatter_efficiency = 1.0;
        config.sensors[0].backscatter_rate = 4000.0;
        assert_eq!(backscatter_bits(&alloc(&[0.0], &[0.0], 0.0), 0, &config).unwrap(), 0.0);
        assert_relative_eq!(
            backscatter_bits(&alloc(&[1.0], &[0.0], 0.0), 0, &config).unwrap(),
            4000.0
        );
        config.sensors[0].backscatter_efficiency = 0.5;
        config.sensors[0].backscatter_rate = 5000.0;
        assert_relative_eq!(
            backscatter_bits(&alloc(&[0.4], &[0.0], 0.0), 0, &config).unwrap(),
            1000.0
        );
    }

    #[test]
    fn htt_term_examples() {
        assert_eq!(htt_term(1.0, 2.0, 0.0, 0.7), 0.0);
        assert_eq!(htt_term(1.0, 2.0, 3.0, 0.0), 0.0);
        assert_relative_eq!(htt_term(1.0, 2.0, 3.0, 1.0), 2.807354922057604, max_relative = 1e-14);
    }

    #[test]
    fn htt_bits_vanish_at_the_boundary() {
        let config = presets::network(1, true);
        let at = |t_a: f64| htt_bits(&alloc(&[0.0], &[t_a], 0.5), 0, &config).unwrap();
        let reference = at(0.1);
        let mut previous = reference;
        for t in [1e-3, 1e-6, 1e-9] {
            let value = at(t);
            assert!(value < previous);
            previous = value;
        }
        assert!(previous < 1e-6 * reference);
        assert_eq!(at(0.0), 0.0);
    }

    #[test]
    fn network_throughput_examples() {
        let config = presets::network(3, true);
        let zero = network_throughput(&TimeAllocation::zeros(3), &config).unwrap();
        assert_eq!(zero.network_total, 0.0);
        assert!(zero.per_sensor_total.iter().all(|&x| x == 0.0));

        let mut single = presets::network(1, false);
        single.sensors[0].backscatter_efficiency = 1.0;
        single.sensors[0].backscatter_rate = 4000.0;
        let corner = network_throughput(&alloc(&[1.0], &[0.0], 0.0), &single).unwrap();
        assert_relative_eq!(corner.network_total, 4000.0);
        assert_eq!(corner.htt_bits[0], 0.0);

        let config = presets::network(2, false);
        let a = alloc(&[0.15, 0.25], &[0.3, 0.2], 0.0);
        let rates = network_throughput(&a, &config).unwrap();
        let direct: f64 = (0..2)
            .map(|n| backscatter_bits(&a, n, &config).unwrap() + htt_bits(&a, n, &config).unwrap())
            .sum();
        assert_relative_eq!(rates.network_total, direct, max_relative = 1e-12);

        assert!(matches!(
            network_throughput(&TimeAllocation::zeros(2), &presets::network(3, false)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn zero_energy_gradient_is_backscatter_only() {
        let mut config = presets::network(3, true);
        for s in &mut config.sensors {
            s.link.harvest_efficiency = 0.0;
        }
        let a = alloc(&[0.1, 0.2, 0.1], &[0.2, 0.1, 0.1], 0.1);
        let g = gradient(&a, &config).unwrap();
        for n in 0..3 {
            let s = &config.sensors[n];
            assert_eq!(g[n], s.backscatter_efficiency * s.backscatter_rate);
            assert_eq!(g[3 + n], 0.0);
        }
        assert_eq!(g[6], 0.0);
    }

    #[test]
    fn quadratic_form_null_directions() {
        let config = presets::network(2, true);
        let a = alloc(&[0.1, 0.2], &[0.3, 0.1], 0.1);
        assert_eq!(quadratic_form(&a, 0, &config, 0.0, 0.0).unwrap(), 0.0);

        let gamma = config.sensors[0].gamma();
        let p_r = config.received_power(0);
        let w = gamma * harvested_energy(&a, 0, &config).unwrap() / 0.3;
        // v_s γ P_R = v_t w
        let v_t = 1.0;
        let v_s = w / (gamma * p_r);
        let q = quadratic_form(&a, 0, &config, v_s, v_t).unwrap();
        assert!(q.abs() <= 1e-9 * config.psi(0));
        assert!(quadratic_form(&a, 0, &config, 1.0, -2.0).unwrap() < 0.0);

        let boundary = alloc(&[0.1, 0.2], &[0.0, 0.1], 0.1);
        assert_eq!(
            quadratic_form(&boundary, 0, &config, 1.0, 1.0),
            Err(Error::Boundary { sensor: 0 })
        );
    }

    #[test]
    fn hessian_matches_quadratic_form() {
        let config = presets::network(3, true);
        let a = alloc(&[0.1, 0.05, 0.2], &[0.2, 0.1, 0.15], 0.1);
        let h = hessian(&a, &config).unwrap();
        let v = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.7];
        let vhv: f64 = (0..7)
            .map(|i| (0..7).map(|j| v[i] * h[(i, j)] * v[j]).sum::<f64>())
            .sum();
        let total_vb: f64 = v[..3].iter().sum();
        let expected: f64 = (0..3)
            .map(|n| quadratic_form(&a, n, &config, total_vb - v[n] + v[6], v[3 + n]).unwrap())
            .sum();
        assert_relative_eq!(vhv, expected, max_relative = 1e-10);
    }

    #[test]
    fn vector_round_trip() {
        let a = alloc(&[0.1, 0.2], &[0.3, 0.05], 0.15);
        assert_eq!(TimeAllocation::from_vector(&a.to_vector()).unwrap(), a);
        assert!(TimeAllocation::from_vector(&[0.0; 4]).is_err());
    }
}
