//! Parameter sweeps across policies.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use wpbs_core::rf_link::dbm_to_watts;
use wpbs_core::{
    solve_bm, solve_hm, solve_seeded, Error, NetworkConfig, Policy, SolveStatus, SolverSettings, TimeAllocation,
};

use crate::output::{number, RateScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Every sensor's backscatter rate, bit/s.
    BackscatterRate,
    /// Number of sensors; extra sensors copy the first one.
    SensorCount,
    /// Source transmit power, dBm.
    SourcePowerDbm,
    /// Every sensor's harvest efficiency.
    HarvestEfficiency,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::BackscatterRate => "backscatter_rate",
            SweepParameter::SensorCount => "sensor_count",
            SweepParameter::SourcePowerDbm => "source_power_dbm",
            SweepParameter::HarvestEfficiency => "harvest_efficiency",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "backscatter_rate" => SweepParameter::BackscatterRate,
            "sensor_count" => SweepParameter::SensorCount,
            "source_power_dbm" | "source_power" => SweepParameter::SourcePowerDbm,
            "harvest_efficiency" => SweepParameter::HarvestEfficiency,
            other => {
                return Err(format!(
                    "unknown sweep parameter `{other}` (expected backscatter_rate, sensor_count, source_power_dbm or harvest_efficiency)"
                ))
            }
        })
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// Sorted by name, which is the row order within a point.
    pub policies: Vec<Policy>,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        from: f64,
        to: f64,
        steps: usize,
        policies: &[Policy],
    ) -> Result<Self, String> {
        if steps < 2 {
            return Err(format!("steps must be at least 2, got {steps}"));
        }
        if !(from.is_finite() && to.is_finite()) || from > to {
            return Err(format!("need finite from <= to, got {from} and {to}"));
        }
        if policies.is_empty() {
            return Err("at least one policy is required".into());
        }
        let mut policies = policies.to_vec();
        policies.sort_by_key(|p| p.name());
        policies.dedup();
        let spec = SweepSpec {
            parameter,
            from,
            to,
            steps,
            policies,
        };
        if parameter == SweepParameter::SensorCount {
            for v in spec.values() {
                if v < 1.0 || (v - v.round()).abs() > 1e-9 {
                    return Err(format!(
                        "sensor_count sweeps need integer steps; {from}..{to} in {steps} steps gives {v}"
                    ));
                }
            }
        }
        Ok(spec)
    }

    /// Evenly spaced values, both ends included.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / last
                }
            })
            .collect()
    }

    /// The base network with the swept parameter set to `value`.
    pub fn apply(&self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig, Error> {
        let mut config = base.clone();
        match self.parameter {
            SweepParameter::BackscatterRate => config.sensors.iter_mut().for_each(|s| s.backscatter_rate = value),
            SweepParameter::HarvestEfficiency => config
                .sensors
                .iter_mut()
                .for_each(|s| s.link.harvest_efficiency = value),
            SweepParameter::SourcePowerDbm => config.source.transmit_power = dbm_to_watts(value),
            SweepParameter::SensorCount => {
                let first = config.sensors[0];
                config.sensors = vec![first; value.round() as usize];
            }
        }
        config.validate()?;
        Ok(config)
    }
}

/// One policy at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub policy: Policy,
    /// Bits per frame; `NaN` when the policy could not run.
    pub objective: f64,
    pub r_b: f64,
    pub r_h: f64,
    /// Solver status, or `error` when the policy could not run.
    pub status: &'static str,
    pub allocation: TimeAllocation,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: f64, policy: Policy, n: usize, error: &Error) -> Self {
        let status = match error {
            Error::InfeasibleUnderBackscatterOnly { .. } => SolveStatus::Infeasible.as_str(),
            _ => "error",
        };
        let missing = if status == "error" { f64::NAN } else { 0.0 };
        SweepRow {
            value,
            policy,
            objective: missing,
            r_b: missing,
            r_h: missing,
            status,
            allocation: TimeAllocation::zeros(n),
            error: Some(error.to_string()),
        }
    }
}

pub const SWEEP_HEADER: &str = "param,value,policy,objective,r_b,r_h,status";

/// Runs every point. With `warm_start` the points run in order and each
/// proposed solve starts from the previous optimum; otherwise the points
/// run concurrently from cold. Rows come back ordered by value, then
/// policy name, either way.
pub fn run(
    base: &NetworkConfig,
    settings: &SolverSettings,
    spec: &SweepSpec,
    warm_start: bool,
) -> Result<Vec<SweepRow>, Error> {
    let points: Vec<(f64, NetworkConfig)> = spec
        .values()
        .into_iter()
        .map(|v| spec.apply(base, v).map(|c| (v, c)))
        .collect::<Result<_, _>>()?;
    settings.validate()?;

    let rows: Vec<Vec<SweepRow>> = if warm_start {
        let mut seed: Option<TimeAllocation> = None;
        points
            .iter()
            .map(|(value, config)| {
                let (rows, optimum) = evaluate(*value, config, settings, &spec.policies, seed.as_ref());
                if optimum.is_some() {
                    seed = optimum;
                }
                rows
            })
            .collect()
    } else {
        points
            .par_iter()
            .map(|(value, config)| evaluate(*value, config, settings, &spec.policies, None).0)
            .collect()
    };
    Ok(rows.into_iter().flatten().collect())
}

fn evaluate(
    value: f64,
    config: &NetworkConfig,
    settings: &SolverSettings,
    policies: &[Policy],
    seed: Option<&TimeAllocation>,
) -> (Vec<SweepRow>, Option<TimeAllocation>) {
    let n = config.len();
    let mut optimum = None;
    let rows = policies
        .iter()
        .map(|&policy| {
            let result = match policy {
                Policy::Proposed => solve_seeded(config, settings, seed).map(|s| {
                    if s.is_optimal() {
                        optimum = Some(s.allocation.clone());
                    }
                    (
                        s.objective,
                        s.breakdown,
                        s.status,
                        s.allocation,
                        s.infeasibility.map(|id| format!("infeasible: {id}")),
                    )
                }),
                Policy::HarvestThenTransmit => {
                    solve_hm(config, settings).map(|r| (r.objective, r.breakdown, r.status, r.allocation, r.error))
                }
                Policy::Backscatter => {
                    solve_bm(config).map(|r| (r.objective, r.breakdown, r.status, r.allocation, r.error))
                }
            };
            match result {
                Ok((objective, breakdown, status, allocation, error)) => SweepRow {
                    value,
                    policy,
                    objective,
                    r_b: breakdown.total_backscatter(),
                    r_h: breakdown.total_htt(),
                    status: status.as_str(),
                    allocation,
                    error,
                },
                Err(e) => SweepRow::failed(value, policy, n, &e),
            }
        })
        .collect();
    (rows, optimum)
}

pub fn to_csv(rows: &[SweepRow], parameter: SweepParameter, scale: RateScale) -> String {
    let mut out = String::with_capacity(rows.len() * 110);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            parameter.name().to_string(),
            number(row.value),
            row.policy.name().to_string(),
            number(scale.apply(row.objective)),
            number(scale.apply(row.r_b)),
            number(scale.apply(row.r_h)),
            row.status.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use wpbs_core::presets;

    #[test]
    fn values_include_both_ends() {
        let spec = SweepSpec::new(SweepParameter::BackscatterRate, 1000.0, 10000.0, 10, &Policy::ALL).unwrap();
        let values = spec.values();
        assert_eq!(values.len(), 10);
        assert_eq!(values[0], 1000.0);
        assert_eq!(values[1], 2000.0);
        assert_eq!(values[9], 10000.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SweepSpec::new(SweepParameter::BackscatterRate, 1.0, 2.0, 1, &Policy::ALL).is_err());
        assert!(SweepSpec::new(SweepParameter::BackscatterRate, 2.0, 1.0, 3, &Policy::ALL).is_err());
        assert!(SweepSpec::new(SweepParameter::SensorCount, 2.0, 100.0, 4, &Policy::ALL).is_err());
        assert!(SweepSpec::new(SweepParameter::SensorCount, 2.0, 100.0, 50, &Policy::ALL).is_ok());
        assert!(SweepSpec::new(SweepParameter::BackscatterRate, 1.0, 2.0, 2, &[]).is_err());
    }

    #[test]
    fn policies_are_sorted_by_name() {
        let spec = SweepSpec::new(
            SweepParameter::BackscatterRate,
            1.0,
            2.0,
            2,
            &[Policy::Proposed, Policy::HarvestThenTransmit, Policy::Backscatter],
        )
        .unwrap();
        let names: Vec<_> = spec.policies.iter().map(|p| p.name()).collect();
        assert_eq!(names, ["BM", "HM", "proposed"]);
    }

    #[test]
    fn sensor_count_replicates_the_first_sensor() {
        let mut base = presets::network(2, true);
        base.sensors[0].link.distance = 7.0;
        let spec = SweepSpec::new(SweepParameter::SensorCount, 1.0, 5.0, 5, &Policy::ALL).unwrap();
        let config = spec.apply(&base, 4.0).unwrap();
        assert_eq!(config.len(), 4);
        assert!(config.sensors.iter().all(|s| s.link.distance == 7.0));
    }

    #[test]
    fn out_of_range_values_are_rejected_up_front() {
        let spec = SweepSpec::new(SweepParameter::HarvestEfficiency, 0.5, 1.5, 3, &Policy::ALL).unwrap();
        let err = run(&presets::network(1, true), &SolverSettings::default(), &spec, true).unwrap_err();
        assert!(err.to_string().contains("harvest_efficiency"), "{err}");
    }

    #[test]
    fn rows_are_ordered_and_components_add_up() {
        let spec = SweepSpec::new(SweepParameter::BackscatterRate, 1000.0, 10000.0, 4, &Policy::ALL).unwrap();
        let rows = run(&presets::network(3, true), &SolverSettings::default(), &spec, true).unwrap();
        assert_eq!(rows.len(), 12);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.value, spec.values()[i / 3]);
            assert_eq!(row.policy, spec.policies[i % 3]);
            let sum = row.r_b + row.r_h;
            assert!((sum - row.objective).abs() <= 1e-9 * row.objective.abs().max(1.0));
        }
        let csv = to_csv(&rows, spec.parameter, RateScale::new(None));
        assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 13);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("backscatter_rate,1.0000000000000000e3,BM,"));
    }

    #[test]
    fn floors_make_backscatter_only_rows_infeasible_not_fatal() {
        let mut base = presets::network(1, true);
        base.sensors[0].energy_floor = 1e-8;
        let spec = SweepSpec::new(
            SweepParameter::BackscatterRate,
            1000.0,
            2000.0,
            2,
            &[Policy::Backscatter],
        )
        .unwrap();
        let rows = run(&base, &SolverSettings::default(), &spec, false).unwrap();
        assert!(rows.iter().all(|r| r.status == "infeasible" && r.error.is_some()));
    }
}
