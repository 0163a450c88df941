//! Seeded, reproducible verification sweeps tying the three routes together,
//! packaged as [`ReportFile`]s for the command-line surface.
//!
//! Sample inputs are drawn sequentially from a seeded generator and evaluated
//! on a worker pool (capped by the `NULLGEO_THREADS` environment variable);
//! results are reduced in input order, so identical seeds give identical
//! reports.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::engel::{
    integrate_kernel_flow, kernel_invariance_residual, EngelError, ProlongationPoint,
};
use crate::geodesic::integrate_geodesic;
use crate::metric::{null_cone_vector, ChartPoint, DiagonalMetric, MetricError};
use crate::model::{self, ModelError, UnitTangent};
use crate::quat::{hopf_commutes, lens_descends, phi, FramePair, LensGenerator, QuatError, Quaternion};
use crate::report::{Offender, ReportFile};

pub const TOL_INTERSECTIONS: f64 = 1e-9;
pub const TOL_LENS_DESCENT: f64 = 1e-10;
pub const TOL_COMMUTING_DIAGRAM: f64 = 1e-12;
pub const TOL_CONTACT_NC: f64 = 1e-5;
pub const TOL_KERNEL_INVARIANCE: f64 = 1e-4;
pub const TOL_DEPROLONG_POINTWISE: f64 = 1e-6;
pub const TOL_DEPROLONG_HAUSDORFF: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown check '{0}' (expected intersections, lens-descent, commuting-diagram, contact-nc, kernel-invariance or deprolongation)")]
    UnknownCheck(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Engel(#[from] EngelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quat(#[from] QuatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    Intersections,
    LensDescent,
    CommutingDiagram,
    ContactNc,
    KernelInvariance,
    Deprolongation,
}

impl CheckId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::Intersections => "intersections",
            CheckId::LensDescent => "lens-descent",
            CheckId::CommutingDiagram => "commuting-diagram",
            CheckId::ContactNc => "contact-nc",
            CheckId::KernelInvariance => "kernel-invariance",
            CheckId::Deprolongation => "deprolongation",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            CheckId::Intersections => TOL_INTERSECTIONS,
            CheckId::LensDescent => TOL_LENS_DESCENT,
            CheckId::CommutingDiagram => TOL_COMMUTING_DIAGRAM,
            CheckId::ContactNc => TOL_CONTACT_NC,
            CheckId::KernelInvariance => TOL_KERNEL_INVARIANCE,
            CheckId::Deprolongation => TOL_DEPROLONG_POINTWISE,
        }
    }

    pub const ALL: [CheckId; 6] = [
        CheckId::Intersections,
        CheckId::LensDescent,
        CheckId::CommutingDiagram,
        CheckId::ContactNc,
        CheckId::KernelInvariance,
        CheckId::Deprolongation,
    ];
}

impl FromStr for CheckId {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "intersections" => Ok(CheckId::Intersections),
            "lens-descent" => Ok(CheckId::LensDescent),
            "commuting-diagram" => Ok(CheckId::CommutingDiagram),
            "contact-nc" => Ok(CheckId::ContactNc),
            "kernel-invariance" => Ok(CheckId::KernelInvariance),
            "deprolongation" => Ok(CheckId::Deprolongation),
            other => Err(VerifyError::UnknownCheck(other.to_string())),
        }
    }
}

/// Sweep parameters: the cyclic order, the sample count, the seed, and an
/// optional tolerance override.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub c: u32,
    pub n: usize,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            c: 1,
            n: 100,
            seed: 0,
            tol: None,
        }
    }
}

/// Worker pool capped by `NULLGEO_THREADS` (all cores when unset).
pub fn worker_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("NULLGEO_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("worker pool")
}

fn random_unit_quaternions(n: usize, seed: u64) -> Vec<Quaternion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| loop {
            let q = Quaternion::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            );
            if q.norm() > 0.1 {
                break q.normalize();
            }
        })
        .collect()
}

/// Sampling box inside the metric chart: centered, at most 1.5 wide per axis.
fn sample_box(m: &DiagonalMetric) -> ([f64; 3], [f64; 3]) {
    let d = m.domain();
    let mut lo = [0.0f64; 3];
    let mut hi = [0.0f64; 3];
    for i in 0..3 {
        let center = 0.5 * (d.min[i] + d.max[i]);
        let half = (0.25 * (d.max[i] - d.min[i])).min(1.5);
        lo[i] = center - half;
        hi[i] = center + half;
    }
    (lo, hi)
}

fn random_prolongation_points(
    m: &DiagonalMetric,
    n: usize,
    seed: u64,
) -> Vec<ProlongationPoint> {
    let (lo, hi) = sample_box(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            ProlongationPoint::new(
                lo[0] + (hi[0] - lo[0]) * rng.gen::<f64>(),
                lo[1] + (hi[1] - lo[1]) * rng.gen::<f64>(),
                lo[2] + (hi[2] - lo[2]) * rng.gen::<f64>(),
                rng.gen::<f64>() * TAU,
            )
        })
        .collect()
}

fn distance_point_segment(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ap = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

fn directed_hausdorff(from: &[[f64; 3]], to: &[[f64; 3]]) -> f64 {
    let mut worst = 0.0f64;
    for p in from.iter().step_by(4) {
        let mut best = f64::INFINITY;
        for w in to.windows(2) {
            best = best.min(distance_point_segment(p, &w[0], &w[1]));
            if best < worst {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between two sampled curves, with
/// point-to-segment distances so the result is insensitive to sampling
/// phase.
pub fn trace_hausdorff(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    if b.len() < 2 || a.len() < 2 {
        return directed_hausdorff(a, b).max(directed_hausdorff(b, a));
    }
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Kernel-flow projection versus direct null-geodesic integration from the
/// same cone point: pointwise distance series at matched parameters, plus
/// the Hausdorff distance of the images. If either trace leaves the chart,
/// both are compared over the common covered prefix and flagged.
pub struct DeprolongComparison {
    pub distances: Vec<(f64, f64)>,
    pub max_pointwise: f64,
    pub hausdorff: f64,
    pub flow_exited: bool,
}

pub fn deprolong_comparison(
    m: &DiagonalMetric,
    p0: &ProlongationPoint,
    s_max: f64,
    h: f64,
) -> Result<DeprolongComparison, VerifyError> {
    let flow = integrate_kernel_flow(m, p0, s_max, h)?;
    let v0 = null_cone_vector(m, &p0.x, p0.theta)?;
    let geo = integrate_geodesic(m, &p0.x, &v0, s_max, h)?;

    let len = flow.samples.len().min(geo.samples.len());
    let mut distances = Vec::with_capacity(len);
    let mut max_pointwise = 0.0f64;
    for i in 0..len {
        let fp = flow.samples[i].p.x;
        let gp = geo.samples[i].x;
        let d = fp.distance(&gp);
        max_pointwise = max_pointwise.max(d);
        distances.push((flow.samples[i].s, d));
    }
    let fa: Vec<[f64; 3]> = flow.samples[..len].iter().map(|s| s.p.x.as_array()).collect();
    let ga: Vec<[f64; 3]> = geo.samples[..len].iter().map(|s| s.x.as_array()).collect();
    Ok(DeprolongComparison {
        distances,
        max_pointwise,
        hausdorff: trace_hausdorff(&fa, &ga),
        flow_exited: flow.exited || geo.exited,
    })
}

/// Whether the time component of the metric is constant over the sampling
/// box (decides pointwise versus image comparison for deprolongation).
pub fn has_constant_g33(m: &DiagonalMetric) -> bool {
    let (lo, hi) = sample_box(m);
    for k in 0..5 {
        let x3 = lo[2] + (hi[2] - lo[2]) * (k as f64 + 0.5) / 5.0;
        let p = ChartPoint::new(
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
            x3,
        );
        if m.partial(2, 2, &p).abs() > 1e-10 {
            return false;
        }
    }
    true
}

fn check_intersections(cfg: &SweepConfig) -> Result<Vec<Offender>, VerifyError> {
    let points = model::random_unit_tangents(cfg.n, cfg.seed);
    let want = TAU / f64::from(cfg.c);
    let pool = worker_pool();
    let scores: Vec<Result<Offender, VerifyError>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let (count, gaps) = model::intersection_count(p, cfg.c)?;
                let residual = if count == cfg.c as usize {
                    gaps.iter().map(|g| (g - want).abs()).fold(0.0f64, f64::max)
                } else {
                    1.0 + (count as f64 - f64::from(cfg.c)).abs()
                };
                Ok(Offender {
                    point: p.as_array().to_vec(),
                    residual,
                })
            })
            .collect()
    });
    scores.into_iter().collect()
}

fn check_lens_descent(cfg: &SweepConfig) -> Result<Vec<Offender>, VerifyError> {
    let quats = random_unit_quaternions(cfg.n, cfg.seed);
    let frame = FramePair::jk();
    let lens = LensGenerator::new(2 * cfg.c)?;
    let pool = worker_pool();
    let scores: Vec<Result<Offender, VerifyError>> = pool.install(|| {
        quats
            .par_iter()
            .map(|&q| {
                let mut residual = lens_descends(q, cfg.c)?;

                // the projected quaternion orbit must be the block-rotation
                // orbit: c distinct elements, matching as sets
                let base = UnitTangent::from_frame_pair(&phi(q, &frame))?;
                let zc_orbit = model::orbit(&base, cfg.c)?;
                let mut projected: Vec<UnitTangent> = Vec::new();
                for qq in lens.orbit(q) {
                    let ut = UnitTangent::from_frame_pair(&phi(qq, &frame))?;
                    if projected.iter().all(|e| e.distance(&ut) > 1e-6) {
                        projected.push(ut);
                    }
                }
                if projected.len() != cfg.c as usize {
                    residual = residual.max(1.0);
                } else {
                    for e in &projected {
                        let best = zc_orbit
                            .iter()
                            .map(|z| z.distance(e))
                            .fold(f64::INFINITY, f64::min);
                        residual = residual.max(best);
                    }
                }
                Ok(Offender {
                    point: vec![q.w, q.x, q.y, q.z],
                    residual,
                })
            })
            .collect()
    });
    scores.into_iter().collect()
}

fn check_commuting_diagram(cfg: &SweepConfig) -> Result<Vec<Offender>, VerifyError> {
    let quats = random_unit_quaternions(cfg.n, cfg.seed);
    let frame = FramePair::jk();
    let pool = worker_pool();
    Ok(pool.install(|| {
        quats
            .par_iter()
            .map(|&q| Offender {
                point: vec![q.w, q.x, q.y, q.z],
                residual: hopf_commutes(q, &frame),
            })
            .collect()
    }))
}

fn check_kernel_invariance(
    cfg: &SweepConfig,
    m: &DiagonalMetric,
) -> Result<Vec<Offender>, VerifyError> {
    let points = random_prolongation_points(m, cfg.n, cfg.seed);
    let pool = worker_pool();
    let scores: Vec<Result<Offender, VerifyError>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let residual = kernel_invariance_residual(m, p, 1e-5)?;
                Ok(Offender {
                    point: p.as_array().to_vec(),
                    residual,
                })
            })
            .collect()
    });
    scores.into_iter().collect()
}

fn check_deprolongation(
    cfg: &SweepConfig,
    m: &DiagonalMetric,
) -> Result<(Vec<Offender>, f64), VerifyError> {
    let constant_time = has_constant_g33(m);
    let tolerance = if constant_time {
        TOL_DEPROLONG_POINTWISE
    } else {
        TOL_DEPROLONG_HAUSDORFF
    };
    let points = random_prolongation_points(m, cfg.n, cfg.seed);
    let pool = worker_pool();
    let scores: Vec<Result<Offender, VerifyError>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let cmp = deprolong_comparison(m, p, TAU, 1e-3)?;
                let residual = if constant_time {
                    cmp.max_pointwise
                } else {
                    cmp.hausdorff
                };
                Ok(Offender {
                    point: p.as_array().to_vec(),
                    residual,
                })
            })
            .collect()
    });
    Ok((scores.into_iter().collect::<Result<_, _>>()?, tolerance))
}

/// Runs one named check. `metric` is consulted by the kernel-invariance and
/// deprolongation sweeps and defaults to the product chart of order `c`.
pub fn run_check(
    check: CheckId,
    cfg: &SweepConfig,
    metric: Option<&DiagonalMetric>,
) -> Result<ReportFile, VerifyError> {
    let default_metric;
    let m = match metric {
        Some(m) => m,
        None => {
            default_metric = DiagonalMetric::s2s1_chart(cfg.c.max(1));
            &default_metric
        }
    };
    let id = check.as_str();
    let mut tolerance = cfg.tol.unwrap_or_else(|| check.default_tolerance());

    let scores = match check {
        CheckId::Intersections => check_intersections(cfg)?,
        CheckId::LensDescent => check_lens_descent(cfg)?,
        CheckId::CommutingDiagram => check_commuting_diagram(cfg)?,
        CheckId::KernelInvariance => check_kernel_invariance(cfg, m)?,
        CheckId::Deprolongation => {
            let (scores, default_tol) = check_deprolongation(cfg, m)?;
            tolerance = cfg.tol.unwrap_or(default_tol);
            scores
        }
        CheckId::ContactNc => {
            let report = model::verify_contact_on_nc(cfg.c, cfg.n, cfg.seed)?;
            let details: Vec<Offender> = report
                .worst
                .iter()
                .map(|(pt, r)| Offender {
                    point: pt.to_vec(),
                    residual: *r,
                })
                .collect();
            let max_residual = report.max_residual();
            return Ok(ReportFile {
                check_id: id.to_string(),
                n_samples: report.n_samples,
                seed: report.seed,
                c: Some(cfg.c),
                tolerance,
                max_residual,
                pass: max_residual < tolerance,
                details,
            });
        }
    };
    Ok(ReportFile::from_scores(
        id,
        Some(cfg.c),
        cfg.seed,
        tolerance,
        scores,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(c: u32, n: usize) -> SweepConfig {
        SweepConfig {
            c,
            n,
            seed: 0,
            tol: None,
        }
    }

    #[test]
    fn check_ids_parse() {
        for id in CheckId::ALL {
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
        }
        assert!(matches!(
            "bogus".parse::<CheckId>(),
            Err(VerifyError::UnknownCheck(_))
        ));
    }

    #[test]
    fn all_checks_pass_at_small_n() {
        for check in CheckId::ALL {
            let report = run_check(check, &cfg(2, 8), None).unwrap();
            assert!(
                report.pass,
                "{} failed with max residual {}",
                report.check_id, report.max_residual
            );
            assert_eq!(report.pass, report.recompute_pass());
            assert_eq!(report.n_samples, 8);
        }
    }

    #[test]
    fn tolerance_override_can_fail_a_check() {
        let mut c = cfg(2, 4);
        c.tol = Some(1e-30);
        let report = run_check(CheckId::CommutingDiagram, &c, None).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_check(CheckId::LensDescent, &cfg(3, 16), None).unwrap();
        let b = run_check(CheckId::LensDescent, &cfg(3, 16), None).unwrap();
        assert_eq!(
            a.render(crate::report::OutputFormat::Json),
            b.render(crate::report::OutputFormat::Json)
        );
    }

    #[test]
    fn deprolongation_modes() {
        // constant g33: pointwise comparison at 1e-6
        let m = DiagonalMetric::s2s1_chart(1);
        assert!(has_constant_g33(&m));
        let report = run_check(CheckId::Deprolongation, &cfg(1, 4), Some(&m)).unwrap();
        assert_eq!(report.tolerance, TOL_DEPROLONG_POINTWISE);
        assert!(report.pass, "max {}", report.max_residual);

        // varying g33: image comparison at 1e-5
        let w = DiagonalMetric::warped_chart();
        assert!(!has_constant_g33(&w));
        let report = run_check(CheckId::Deprolongation, &cfg(1, 4), Some(&w)).unwrap();
        assert_eq!(report.tolerance, TOL_DEPROLONG_HAUSDORFF);
        assert!(report.pass, "max {}", report.max_residual);
    }

    #[test]
    fn hausdorff_basics() {
        let a: Vec<[f64; 3]> = (0..100)
            .map(|i| [i as f64 / 99.0, 0.0, 0.0])
            .collect();
        let mut b = a.clone();
        for p in &mut b {
            p[1] = 0.25;
        }
        let d = trace_hausdorff(&a, &b);
        assert!((d - 0.25).abs() < 1e-12);
        // insensitive to sampling phase: shifted samples of the same segment
        let c: Vec<[f64; 3]> = (0..37)
            .map(|i| [0.013 + 0.97 * i as f64 / 36.0, 0.0, 0.0])
            .collect();
        let d = trace_hausdorff(&a, &c);
        assert!(d < 0.014, "phase sensitivity {d}");
    }
}
