//! Machine-readable trace and report files.
//!
//! Both kinds are line-delimited: one header object, then one record per
//! sample, either as JSON lines or as CSV behind a `# key=value` comment
//! header. All numbers in CSV output are printed with 17 significant digits,
//! which round-trips `f64` bit-exactly; map keys are ordered, so identical
//! inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("trace parameters must be strictly increasing in s (index {0})")]
    NonMonotone(usize),
    #[error("record arity {got} does not match kind {kind} (expected {want})")]
    Arity {
        kind: &'static str,
        want: usize,
        got: usize,
    },
    #[error("unknown output format '{0}' (expected json or csv)")]
    UnknownFormat(String),
}

/// `f64` in decimal with 17 significant digits; parses back bit-exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Geodesic,
    KernelFlow,
    Sky,
    GreatCircle,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::Geodesic => "geodesic",
            TraceKind::KernelFlow => "kernel_flow",
            TraceKind::Sky => "sky",
            TraceKind::GreatCircle => "great_circle",
        }
    }

    /// Numbers of coordinate and velocity entries per record.
    pub fn arity(&self) -> (usize, usize) {
        match self {
            TraceKind::Geodesic => (3, 3),
            TraceKind::KernelFlow => (4, 4),
            TraceKind::Sky => (6, 6),
            TraceKind::GreatCircle => (3, 3),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub s: f64,
    pub coords: Vec<f64>,
    pub vel: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct TraceHeader<'a> {
    kind: TraceKind,
    metric_id: &'a str,
    params: &'a BTreeMap<String, String>,
}

/// A sampled curve with its provenance parameters.
#[derive(Debug, Clone)]
pub struct TraceFile {
    pub kind: TraceKind,
    pub metric_id: String,
    pub params: BTreeMap<String, String>,
    pub samples: Vec<TraceRecord>,
}

impl TraceFile {
    pub fn validate(&self) -> Result<(), ReportError> {
        let (nc, nv) = self.kind.arity();
        for (i, r) in self.samples.iter().enumerate() {
            if r.coords.len() != nc || r.vel.len() != nv {
                return Err(ReportError::Arity {
                    kind: self.kind.as_str(),
                    want: nc,
                    got: r.coords.len(),
                });
            }
            if i > 0 && r.s <= self.samples[i - 1].s {
                return Err(ReportError::NonMonotone(i));
            }
        }
        Ok(())
    }

    pub fn write(&self, w: &mut impl Write, format: OutputFormat) -> io::Result<()> {
        match format {
            OutputFormat::Json => self.write_json(w),
            OutputFormat::Csv => self.write_csv(w),
        }
    }

    fn write_json(&self, w: &mut impl Write) -> io::Result<()> {
        let header = TraceHeader {
            kind: self.kind,
            metric_id: &self.metric_id,
            params: &self.params,
        };
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        for r in &self.samples {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    }

    fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        write!(w, "# kind={} metric_id={}", self.kind.as_str(), self.metric_id)?;
        for (k, v) in &self.params {
            write!(w, " {k}={v}")?;
        }
        writeln!(w)?;
        let (nc, nv) = self.kind.arity();
        let mut cols = vec!["s".to_string()];
        cols.extend((1..=nc).map(|i| format!("c{i}")));
        cols.extend((1..=nv).map(|i| format!("v{i}")));
        writeln!(w, "{}", cols.join(","))?;
        for r in &self.samples {
            let mut fields = vec![fmt17(r.s)];
            fields.extend(r.coords.iter().map(|&x| fmt17(x)));
            fields.extend(r.vel.iter().map(|&x| fmt17(x)));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format).expect("writing to memory");
        String::from_utf8(buf).expect("output is utf-8")
    }
}

/// One worst offender of a verification sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Offender {
    pub point: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ReportHeader<'a> {
    check_id: &'a str,
    n_samples: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<u32>,
    tolerance: f64,
    max_residual: f64,
    pass: bool,
}

/// Result of one verification sweep: the declared tolerance, the worst
/// residual, the verdict, and the worst offenders. The verdict is
/// recomputable from the details and the tolerance alone.
#[derive(Debug, Clone)]
pub struct ReportFile {
    pub check_id: String,
    pub n_samples: usize,
    pub seed: u64,
    pub c: Option<u32>,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub details: Vec<Offender>,
}

impl ReportFile {
    /// Assembles a report from scored samples; `details` keeps the five
    /// worst, which always include the maximum.
    pub fn from_scores(
        check_id: impl Into<String>,
        c: Option<u32>,
        seed: u64,
        tolerance: f64,
        mut scores: Vec<Offender>,
    ) -> Self {
        let n_samples = scores.len();
        scores.sort_by(|a, b| b.residual.partial_cmp(&a.residual).unwrap());
        let max_residual = scores.first().map(|o| o.residual).unwrap_or(0.0);
        scores.truncate(5);
        ReportFile {
            check_id: check_id.into(),
            n_samples,
            seed,
            c,
            tolerance,
            max_residual,
            pass: max_residual < tolerance,
            details: scores,
        }
    }

    /// Recomputes the verdict from the recorded offenders and tolerance.
    pub fn recompute_pass(&self) -> bool {
        self.details
            .iter()
            .map(|o| o.residual)
            .fold(0.0f64, f64::max)
            < self.tolerance
    }

    pub fn write(&self, w: &mut impl Write, format: OutputFormat) -> io::Result<()> {
        match format {
            OutputFormat::Json => {
                let header = ReportHeader {
                    check_id: &self.check_id,
                    n_samples: self.n_samples,
                    seed: self.seed,
                    c: self.c,
                    tolerance: self.tolerance,
                    max_residual: self.max_residual,
                    pass: self.pass,
                };
                writeln!(w, "{}", serde_json::to_string(&header)?)?;
                for o in &self.details {
                    writeln!(w, "{}", serde_json::to_string(o)?)?;
                }
            }
            OutputFormat::Csv => {
                write!(
                    w,
                    "# check_id={} n_samples={} seed={}",
                    self.check_id, self.n_samples, self.seed
                )?;
                if let Some(c) = self.c {
                    write!(w, " c={c}")?;
                }
                writeln!(
                    w,
                    " tolerance={} max_residual={} pass={}",
                    fmt17(self.tolerance),
                    fmt17(self.max_residual),
                    self.pass
                )?;
                writeln!(w, "point,residual")?;
                for o in &self.details {
                    let pt = o
                        .point
                        .iter()
                        .map(|&x| fmt17(x))
                        .collect::<Vec<_>>()
                        .join(";");
                    writeln!(w, "{},{}", pt, fmt17(o.residual))?;
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format).expect("writing to memory");
        String::from_utf8(buf).expect("output is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_trace() -> TraceFile {
        let mut params = BTreeMap::new();
        params.insert("step".to_string(), fmt17(1e-3));
        params.insert("smax".to_string(), fmt17(1.0));
        TraceFile {
            kind: TraceKind::Geodesic,
            metric_id: "minkowski3".to_string(),
            params,
            samples: vec![
                TraceRecord {
                    s: 0.0,
                    coords: vec![0.0, 0.0, 0.0],
                    vel: vec![1.0, 0.0, 1.0],
                },
                TraceRecord {
                    s: 0.5,
                    coords: vec![0.5, 0.0, 0.5],
                    vel: vec![1.0, 0.0, 1.0],
                },
            ],
        }
    }

    #[test]
    fn trace_validation() {
        let t = sample_trace();
        t.validate().unwrap();

        let mut bad = t.clone();
        bad.samples[1].s = 0.0;
        assert!(matches!(bad.validate(), Err(ReportError::NonMonotone(1))));

        let mut bad = t.clone();
        bad.samples[0].coords.pop();
        assert!(matches!(bad.validate(), Err(ReportError::Arity { .. })));

        let mut bad = t;
        bad.kind = TraceKind::KernelFlow;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let t = sample_trace();
        assert_eq!(t.render(OutputFormat::Json), t.render(OutputFormat::Json));
        assert_eq!(t.render(OutputFormat::Csv), t.render(OutputFormat::Csv));
        let json = t.render(OutputFormat::Json);
        let first = json.lines().next().unwrap();
        assert!(first.contains("\"kind\":\"geodesic\""));
        assert!(first.contains("\"metric_id\":\"minkowski3\""));
        assert_eq!(json.lines().count(), 3);

        let csv = t.render(OutputFormat::Csv);
        assert!(csv.starts_with("# kind=geodesic"));
        assert!(csv.lines().nth(1).unwrap().starts_with("s,c1,c2,c3,v1"));
    }

    #[test]
    fn report_pass_recomputable() {
        let scores = (0..20)
            .map(|i| Offender {
                point: vec![i as f64],
                residual: 1e-12 * (i as f64 + 1.0),
            })
            .collect();
        let r = ReportFile::from_scores("demo", Some(2), 0, 1e-10, scores);
        assert_eq!(r.n_samples, 20);
        assert_eq!(r.details.len(), 5);
        assert_eq!(r.max_residual, 2e-11);
        assert!(r.pass);
        assert_eq!(r.pass, r.recompute_pass());

        let scores = vec![Offender {
            point: vec![0.0],
            residual: 1.0,
        }];
        let r = ReportFile::from_scores("demo", None, 0, 1e-10, scores);
        assert!(!r.pass);
        assert_eq!(r.pass, r.recompute_pass());
    }

    #[test]
    fn format_parsing() {
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert_eq!("CSV".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }

    proptest! {
        #[test]
        fn fmt17_round_trips_bitwise(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = fmt17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
