//! Deterministic JSON and CSV emission.
//!
//! Every float is written with 17 significant digits in scientific
//! notation (`{:.16e}`), so output files round-trip exactly and are
//! byte-identical across runs. Lines end in `\n`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use wpbs_core::{PolicyResult, RateBreakdown, RegionPoint, Solution, TimeAllocation};

use crate::config::Assumed;

/// 17 significant digits, with negative zero folded into zero.
pub fn number(value: f64) -> String {
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.16e}")
}

/// Pretty printer that writes floats through [`number`].
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(number(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` as indented JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buffer = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut buffer, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut serializer)
        .expect("in-memory JSON serialization cannot fail");
    buffer.push(b'\n');
    String::from_utf8(buffer).expect("serde_json emits UTF-8")
}

/// Unit label for rates: bits per normalized frame, or bit/s when a frame
/// length is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateScale {
    frame_seconds: Option<f64>,
}

impl RateScale {
    pub fn new(frame_seconds: Option<f64>) -> Self {
        RateScale { frame_seconds }
    }

    pub fn apply(&self, bits: f64) -> f64 {
        match self.frame_seconds {
            Some(t) => bits / t,
            None => bits,
        }
    }

    pub fn unit(&self) -> &'static str {
        match self.frame_seconds {
            Some(_) => "bit/s",
            None => "bit/frame",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AllocationDoc {
    pub t_b: Vec<f64>,
    pub t_a: Vec<f64>,
    pub t_0: f64,
}

impl From<&TimeAllocation> for AllocationDoc {
    fn from(a: &TimeAllocation) -> Self {
        AllocationDoc {
            t_b: a.backscatter_times.clone(),
            t_a: a.transmit_times.clone(),
            t_0: a.shared_harvest_time,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BreakdownDoc {
    pub r_b: Vec<f64>,
    pub r_a: Vec<f64>,
}

impl BreakdownDoc {
    fn new(b: &RateBreakdown, scale: RateScale) -> Self {
        BreakdownDoc {
            r_b: b.backscatter_bits.iter().map(|&v| scale.apply(v)).collect(),
            r_a: b.htt_bits.iter().map(|&v| scale.apply(v)).collect(),
        }
    }
}

/// The document written by `solve` and `oracle`.
#[derive(Debug, Serialize)]
pub struct SolutionDoc<'a> {
    pub status: &'static str,
    pub objective: f64,
    pub allocation: AllocationDoc,
    pub breakdown: BreakdownDoc,
    pub kkt_residual: Option<f64>,
    pub iterations: usize,
    /// The constraint that cannot be met, when infeasible.
    pub witness: Option<String>,
    pub rate_unit: &'static str,
    pub assumed: &'a BTreeMap<String, Assumed>,
}

impl<'a> SolutionDoc<'a> {
    pub fn new(solution: &Solution, scale: RateScale, assumed: &'a BTreeMap<String, Assumed>) -> Self {
        SolutionDoc {
            status: solution.status.as_str(),
            objective: scale.apply(solution.objective),
            allocation: AllocationDoc::from(&solution.allocation),
            breakdown: BreakdownDoc::new(&solution.breakdown, scale),
            kkt_residual: solution.kkt_residual,
            iterations: solution.iterations,
            witness: solution.infeasibility.map(|id| id.to_string()),
            rate_unit: scale.unit(),
            assumed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PolicyDoc {
    pub policy: &'static str,
    pub status: &'static str,
    pub objective: f64,
    pub allocation: AllocationDoc,
    pub breakdown: BreakdownDoc,
    pub kkt_residual: Option<f64>,
    pub error: Option<String>,
}

/// The document written by `compare`.
#[derive(Debug, Serialize)]
pub struct CompareDoc<'a> {
    pub policies: Vec<PolicyDoc>,
    pub rate_unit: &'static str,
    pub assumed: &'a BTreeMap<String, Assumed>,
}

impl<'a> CompareDoc<'a> {
    pub fn new(results: &[PolicyResult], scale: RateScale, assumed: &'a BTreeMap<String, Assumed>) -> Self {
        let policies = results
            .iter()
            .map(|r| PolicyDoc {
                policy: r.policy.name(),
                status: r.status.as_str(),
                objective: scale.apply(r.objective),
                allocation: AllocationDoc::from(&r.allocation),
                breakdown: BreakdownDoc::new(&r.breakdown, scale),
                kkt_residual: r.kkt_residual,
                error: r.error.clone(),
            })
            .collect();
        CompareDoc {
            policies,
            rate_unit: scale.unit(),
            assumed,
        }
    }
}

pub const REGION_HEADER: &str = "t_b,t_a,t_0,feasible,c0_ok,c1_ok,c2_ok,r_sum";

pub fn region_csv(points: &[RegionPoint], scale: RateScale) -> String {
    let mut out = String::with_capacity(points.len() * 120);
    out.push_str(REGION_HEADER);
    out.push('\n');
    for p in points {
        let row = [
            number(p.t_b),
            number(p.t_a),
            number(p.t_0),
            p.feasible.to_string(),
            p.c0_ok.to_string(),
            p.c1_ok.to_string(),
            p.c2_ok.to_string(),
            number(scale.apply(p.r_sum)),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Where a command's primary output goes.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Self {
        match path {
            Some(p) if p != Path::new("-") => Sink::File(p.to_path_buf()),
            _ => Sink::Stdout,
        }
    }

    pub fn write(&self, text: &str) -> io::Result<()> {
        match self {
            Sink::Stdout => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
            Sink::File(path) => fs::write(path, text),
        }
    }

    /// CSV has no room for the assumed block, so it goes to a sidecar
    /// `<out>.assumed.json` next to the file (or stderr for stdout).
    pub fn write_assumed(&self, assumed: &BTreeMap<String, Assumed>) -> io::Result<()> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            assumed: &'a BTreeMap<String, Assumed>,
        }
        match self {
            Sink::Stdout => {
                if !assumed.is_empty() {
                    let line =
                        serde_json::to_string(&Sidecar { assumed }).expect("in-memory JSON serialization cannot fail");
                    eprintln!("assumed values: {line}");
                }
                Ok(())
            }
            Sink::File(path) => fs::write(sidecar_path(path), to_json(&Sidecar { assumed })),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".assumed.json");
    path.with_file_name(name)
}
