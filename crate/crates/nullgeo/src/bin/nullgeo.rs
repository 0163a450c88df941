//! Command-line surface: geodesic traces, verification sweeps, and
//! deprolongation comparisons, written as machine-readable line-delimited
//! files.
//!
//! Exit codes: 0 on success (and passing verification), 1 on a failed
//! verification, 2 on usage or configuration errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nullgeo::config::resolve_metric;
use nullgeo::engel::{integrate_kernel_flow, kernel_z_separable, ProlongationPoint};
use nullgeo::geodesic::integrate_geodesic;
use nullgeo::metric::{norm_sq, null_cone_vector, ChartPoint, TangentVector};
use nullgeo::report::{fmt17, OutputFormat, TraceFile, TraceKind, TraceRecord};
use nullgeo::verify::{deprolong_comparison, has_constant_g33, run_check, CheckId, SweepConfig};

#[derive(Parser)]
#[command(name = "nullgeo", version, about = "null geodesic toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutputArgs {
    /// Output path (deprolong treats it as a prefix).
    #[arg(long)]
    out: PathBuf,
    /// Output format: json (line-delimited) or csv.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a geodesic and write its trace.
    Geodesic {
        /// minkowski3, s2s1:c=<n>, file:<path>, or a config path.
        #[arg(long)]
        metric: String,
        /// Start point "x1,x2,x3".
        #[arg(long)]
        x0: String,
        /// Initial velocity "v1,v2,v3" (alternative to --theta).
        #[arg(long)]
        v0: Option<String>,
        /// Launch along the null cone direction at this angle.
        #[arg(long)]
        theta: Option<f64>,
        /// Parameter range.
        #[arg(long, default_value_t = 1.0)]
        smax: f64,
        /// Integration step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification sweep and write its report.
    Verify {
        /// intersections, lens-descent, commuting-diagram, contact-nc,
        /// kernel-invariance, or deprolongation.
        #[arg(long)]
        check: String,
        /// Cyclic order of the quotient.
        #[arg(long, default_value_t = 1)]
        c: u32,
        /// Number of samples.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Seed of the sample generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance override (defaults to the check's declared tolerance).
        #[arg(long)]
        tol: Option<f64>,
        /// Metric for the chart-based checks.
        #[arg(long)]
        metric: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the kernel flow and the matching null geodesic, writing both
    /// traces and the pointwise distance series.
    Deprolong {
        /// Separable metric id or config path.
        #[arg(long)]
        metric: String,
        /// Start point "x1,x2,x3,theta" on the projectivized cone bundle.
        #[arg(long)]
        p0: String,
        /// Parameter range.
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        smax: f64,
        /// Integration step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_tuple<const N: usize>(s: &str, what: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("{what} must have {N} comma-separated components"));
    }
    let mut out = [0.0; N];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse()
            .map_err(|_| format!("{what}: invalid number '{p}'"))?;
    }
    Ok(out)
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn with_suffix(prefix: &PathBuf, suffix: &str, format: OutputFormat) -> PathBuf {
    let ext = match format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };
    let mut name = prefix.as_os_str().to_os_string();
    name.push(format!(".{suffix}.{ext}"));
    PathBuf::from(name)
}

fn cmd_geodesic(
    metric: &str,
    x0: &str,
    v0: Option<&str>,
    theta: Option<f64>,
    smax: f64,
    step: f64,
    output: &OutputArgs,
) -> Result<ExitCode, String> {
    let m = resolve_metric(metric).map_err(|e| e.to_string())?;
    let format = parse_format(&output.format)?;
    let x0v = parse_tuple::<3>(x0, "--x0")?;
    let x0p = ChartPoint::from_array(x0v);

    let mut params: BTreeMap<String, String> = BTreeMap::new();
    params.insert("x0".into(), x0.to_string());
    params.insert("smax".into(), fmt17(smax));
    params.insert("step".into(), fmt17(step));

    let v0t = match (v0, theta) {
        (Some(v), None) => {
            let a = parse_tuple::<3>(v, "--v0")?;
            params.insert("v0".into(), v.to_string());
            TangentVector::from_array(a)
        }
        (None, Some(t)) => {
            params.insert("theta".into(), fmt17(t));
            null_cone_vector(&m, &x0p, t).map_err(|e| e.to_string())?
        }
        _ => return Err("exactly one of --v0 or --theta is required".into()),
    };

    let trace = integrate_geodesic(&m, &x0p, &v0t, smax, step).map_err(|e| e.to_string())?;
    params.insert("exited".into(), trace.exited.to_string());
    if theta.is_some() {
        let mut worst = 0.0f64;
        for s in &trace.samples {
            worst = worst.max(norm_sq(&m, &s.x, &s.v).map_err(|e| e.to_string())?.abs());
        }
        params.insert("null_residual_max".into(), fmt17(worst));
    }

    let file = TraceFile {
        kind: TraceKind::Geodesic,
        metric_id: m.id().to_string(),
        params,
        samples: trace
            .samples
            .iter()
            .map(|s| TraceRecord {
                s: s.s,
                coords: s.x.as_array().to_vec(),
                vel: s.v.as_array().to_vec(),
            })
            .collect(),
    };
    file.validate().map_err(|e| e.to_string())?;
    write_file(&output.out, &file.render(format))?;
    println!(
        "geodesic: {} samples on {}, exited={}",
        file.samples.len(),
        m.id(),
        trace.exited
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    check: &str,
    c: u32,
    n: usize,
    seed: u64,
    tol: Option<f64>,
    metric: Option<&str>,
    output: &OutputArgs,
) -> Result<ExitCode, String> {
    let check: CheckId = check.parse().map_err(|e| format!("{e}"))?;
    let format = parse_format(&output.format)?;
    let m = match metric {
        Some(spec) => Some(resolve_metric(spec).map_err(|e| e.to_string())?),
        None => None,
    };
    let cfg = SweepConfig { c, n, seed, tol };
    let report = run_check(check, &cfg, m.as_ref()).map_err(|e| e.to_string())?;
    write_file(&output.out, &report.render(format))?;
    println!(
        "{}: {} over {} samples (max residual {:.3e}, tolerance {:.3e})",
        report.check_id,
        if report.pass { "pass" } else { "FAIL" },
        report.n_samples,
        report.max_residual,
        report.tolerance
    );
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_deprolong(
    metric: &str,
    p0: &str,
    smax: f64,
    step: f64,
    output: &OutputArgs,
) -> Result<ExitCode, String> {
    let m = resolve_metric(metric).map_err(|e| e.to_string())?;
    if !m.is_separable() {
        return Err(format!("metric '{}' is not separable", m.id()));
    }
    let format = parse_format(&output.format)?;
    let a = parse_tuple::<4>(p0, "--p0")?;
    let p = ProlongationPoint::from_array(a);

    let flow = integrate_kernel_flow(&m, &p, smax, step).map_err(|e| e.to_string())?;
    let v0 = null_cone_vector(&m, &p.x, p.theta).map_err(|e| e.to_string())?;
    let geo = integrate_geodesic(&m, &p.x, &v0, smax, step).map_err(|e| e.to_string())?;
    let cmp = deprolong_comparison(&m, &p, smax, step).map_err(|e| e.to_string())?;

    let mut params: BTreeMap<String, String> = BTreeMap::new();
    params.insert("p0".into(), p0.to_string());
    params.insert("smax".into(), fmt17(smax));
    params.insert("step".into(), fmt17(step));
    params.insert("exited".into(), flow.exited.to_string());

    let flow_file = TraceFile {
        kind: TraceKind::KernelFlow,
        metric_id: m.id().to_string(),
        params: params.clone(),
        samples: flow
            .samples
            .iter()
            .map(|s| {
                let z = kernel_z_separable(&m, &s.p)
                    .map(|z| z.to_vec())
                    .unwrap_or_else(|_| vec![f64::NAN; 4]);
                TraceRecord {
                    s: s.s,
                    coords: s.p.as_array().to_vec(),
                    vel: z,
                }
            })
            .collect(),
    };
    flow_file.validate().map_err(|e| e.to_string())?;

    let geo_file = TraceFile {
        kind: TraceKind::Geodesic,
        metric_id: m.id().to_string(),
        params,
        samples: geo
            .samples
            .iter()
            .map(|s| TraceRecord {
                s: s.s,
                coords: s.x.as_array().to_vec(),
                vel: s.v.as_array().to_vec(),
            })
            .collect(),
    };
    geo_file.validate().map_err(|e| e.to_string())?;

    write_file(
        &with_suffix(&output.out, "flow", format),
        &flow_file.render(format),
    )?;
    write_file(
        &with_suffix(&output.out, "geo", format),
        &geo_file.render(format),
    )?;

    // distance series with the summary metrics in its header
    let mut dist = String::new();
    let pregeodesic = !has_constant_g33(&m);
    match format {
        OutputFormat::Json => {
            dist.push_str(&format!(
                "{{\"kind\":\"distance_series\",\"metric_id\":{},\"max_pointwise\":{},\"hausdorff\":{},\"pregeodesic_mode\":{}}}\n",
                serde_json::to_string(m.id()).unwrap(),
                serde_json::to_string(&cmp.max_pointwise).unwrap(),
                serde_json::to_string(&cmp.hausdorff).unwrap(),
                pregeodesic
            ));
            for (s, d) in &cmp.distances {
                dist.push_str(&format!(
                    "{{\"s\":{},\"distance\":{}}}\n",
                    serde_json::to_string(s).unwrap(),
                    serde_json::to_string(d).unwrap()
                ));
            }
        }
        OutputFormat::Csv => {
            dist.push_str(&format!(
                "# kind=distance_series metric_id={} max_pointwise={} hausdorff={} pregeodesic_mode={}\n",
                m.id(),
                fmt17(cmp.max_pointwise),
                fmt17(cmp.hausdorff),
                pregeodesic
            ));
            dist.push_str("s,distance\n");
            for (s, d) in &cmp.distances {
                dist.push_str(&format!("{},{}\n", fmt17(*s), fmt17(*d)));
            }
        }
    }
    write_file(&with_suffix(&output.out, "dist", format), &dist)?;

    println!(
        "deprolong on {}: max pointwise {:.3e}, hausdorff {:.3e}{}",
        m.id(),
        cmp.max_pointwise,
        cmp.hausdorff,
        if pregeodesic {
            " (varying time component: image comparison applies)"
        } else {
            ""
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Geodesic {
            metric,
            x0,
            v0,
            theta,
            smax,
            step,
            output,
        } => cmd_geodesic(metric, x0, v0.as_deref(), *theta, *smax, *step, output),
        Cmd::Verify {
            check,
            c,
            n,
            seed,
            tol,
            metric,
            output,
        } => cmd_verify(check, *c, *n, *seed, *tol, metric.as_deref(), output),
        Cmd::Deprolong {
            metric,
            p0,
            smax,
            step,
            output,
        } => cmd_deprolong(metric, p0, *smax, *step, output),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
