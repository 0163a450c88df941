//! The Engel flag of the projectivized null-cone bundle of a diagonal
//! 3-metric, on the chart `(x1, x2, x3, theta)`.
//!
//! The rank-2 distribution is `D = <X, d_theta>` with
//! `X = (cos(theta)/sqrt(g11), sin(theta)/sqrt(g22), 1/sqrt(-g33), 0)`; its
//! square `E = <X, Xdot, d_theta>` carries a characteristic line field `W`
//! spanned by an explicit vector field `Z` (general and separable closed
//! forms below). Integrating `Z` and quotienting deprolongs the bundle back
//! to the space of null geodesics; pushing `E` forward along the quotient
//! yields its contact plane field.

use std::f64::consts::TAU;

use nalgebra::{Matrix3x2, Vector3};
use thiserror::Error;

use crate::contact::lie_bracket_numeric;
use crate::metric::{ChartPoint, DiagonalMetric, MetricError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngelError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("flow left the chart before the decision could be made (closest approach {0})")]
    Indeterminate(f64),
    #[error("kernel field tangent to the quotient slice")]
    Transversality,
    #[error("frame vectors are degenerate at the base point")]
    RankError,
}

/// A point of the projectivized cone bundle chart: a chart point of the base
/// and the cone angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlongationPoint {
    pub x: ChartPoint,
    pub theta: f64,
}

impl ProlongationPoint {
    pub fn new(x1: f64, x2: f64, x3: f64, theta: f64) -> Self {
        Self {
            x: ChartPoint::new(x1, x2, x3),
            theta,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x.x1, self.x.x2, self.x.x3, self.theta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// 4-distance with the angle difference taken on the circle.
    pub fn distance(&self, o: &ProlongationPoint) -> f64 {
        let dx = self.x.distance(&o.x);
        let mut dt = (self.theta - o.theta).rem_euclid(TAU);
        if dt > TAU / 2.0 {
            dt = TAU - dt;
        }
        (dx * dx + dt * dt).sqrt()
    }
}

/// The Engel flag data at a point: the cone direction `X`, its angular
/// derivative `Xdot`, the fiber direction, and the kernel vector `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngelFlag {
    pub x_dir: [f64; 4],
    pub xdot_dir: [f64; 4],
    pub theta_dir: [f64; 4],
    pub z_dir: [f64; 4],
}

impl EngelFlag {
    /// Norm of the component of `Z` off `span(X, d_theta)`; zero for a valid
    /// flag since the kernel always lies in the rank-2 distribution.
    pub fn z_off_d_residual(&self) -> f64 {
        let frame = vec![self.x_dir.to_vec(), self.theta_dir.to_vec()];
        crate::contact::off_span_residual(&frame, &self.z_dir).unwrap_or(f64::INFINITY)
    }
}

/// The cone direction `X` at `p`.
pub fn lorentz_x(m: &DiagonalMetric, p: &ProlongationPoint) -> Result<[f64; 4], EngelError> {
    let g = m.check_point(&p.x)?;
    let (s, c) = p.theta.sin_cos();
    Ok([c / g[0].sqrt(), s / g[1].sqrt(), 1.0 / (-g[2]).sqrt(), 0.0])
}

/// `Xdot = [d_theta, X]`, the angular derivative of the cone direction.
pub fn lorentz_xdot(m: &DiagonalMetric, p: &ProlongationPoint) -> Result<[f64; 4], EngelError> {
    let g = m.check_point(&p.x)?;
    let (s, c) = p.theta.sin_cos();
    Ok([-s / g[0].sqrt(), c / g[1].sqrt(), 0.0, 0.0])
}

/// Coefficient of `d_theta` in the kernel field, general form: the functions
/// `A, B, C` below are the components of `[X, Xdot]` on the base directions.
fn theta_coefficient_general(m: &DiagonalMetric, p: &ProlongationPoint, g: &[f64; 3]) -> f64 {
    let (s, c) = p.theta.sin_cos();
    let (g11, g22, g33) = (g[0], g[1], g[2]);
    let dg = |i: usize, j: usize| m.partial(i, j, &p.x);

    let a = dg(0, 1) / (2.0 * g11 * (g11 * g22).sqrt())
        + s * dg(0, 2) / (2.0 * g11 * (-g11 * g33).sqrt());
    let b = -dg(1, 0) / (2.0 * g22 * (g11 * g22).sqrt())
        - c * dg(1, 2) / (2.0 * g22 * (-g22 * g33).sqrt());
    let cc = -s * dg(2, 0) / (2.0 * g33 * (-g11 * g33).sqrt())
        + c * dg(2, 1) / (2.0 * g33 * (-g22 * g33).sqrt());

    a * g11.sqrt() * c + b * g22.sqrt() * s - cc * (-g33).sqrt()
}

/// Coefficient of `d_theta` in the kernel field for a separable metric.
fn theta_coefficient_separable(m: &DiagonalMetric, p: &ProlongationPoint, g: &[f64; 3]) -> f64 {
    let (s, c) = p.theta.sin_cos();
    c * m.partial(0, 1, &p.x) / (2.0 * g[0] * g[1].sqrt())
        - s * m.partial(1, 0, &p.x) / (2.0 * g[1] * g[0].sqrt())
}

/// The kernel field in its general closed form,
/// `Z = X + (A sqrt(g11) cos + B sqrt(g22) sin - C sqrt(-g33)) d_theta`.
/// Well defined at every point of the chart.
pub fn kernel_z_general(m: &DiagonalMetric, p: &ProlongationPoint) -> Result<[f64; 4], EngelError> {
    let g = m.check_point(&p.x)?;
    let mut z = lorentz_x(m, p)?;
    z[3] = theta_coefficient_general(m, p, &g);
    Ok(z)
}

/// The kernel field for a separable metric:
/// `Z = X + (cos/(2 g11 sqrt(g22)) dg11/dx2 - sin/(2 g22 sqrt(g11)) dg22/dx1) d_theta`.
pub fn kernel_z_separable(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
) -> Result<[f64; 4], EngelError> {
    if !m.is_separable() {
        return Err(MetricError::NotSeparable.into());
    }
    let g = m.check_point(&p.x)?;
    let mut z = lorentz_x(m, p)?;
    z[3] = theta_coefficient_separable(m, p, &g);
    Ok(z)
}

/// The full flag at `p`, with `Z` from the general formula.
pub fn lorentz_flag(m: &DiagonalMetric, p: &ProlongationPoint) -> Result<EngelFlag, EngelError> {
    Ok(EngelFlag {
        x_dir: lorentz_x(m, p)?,
        xdot_dir: lorentz_xdot(m, p)?,
        theta_dir: [0.0, 0.0, 0.0, 1.0],
        z_dir: kernel_z_general(m, p)?,
    })
}

fn field_closure(
    m: &DiagonalMetric,
    eval: impl Fn(&DiagonalMetric, &ProlongationPoint) -> Result<[f64; 4], EngelError>
        + Send
        + Sync
        + 'static,
) -> impl Fn(&[f64]) -> Vec<f64> {
    let m = m.clone();
    move |s: &[f64]| {
        let p = ProlongationPoint::new(s[0], s[1], s[2], s[3]);
        eval(&m, &p)
            .map(|v| v.to_vec())
            .unwrap_or_else(|_| vec![f64::NAN; 4])
    }
}

/// Max norm, over `V` in `{X, Xdot, d_theta}`, of the component of the
/// numerical bracket `[Z, V]` off `span(X, Xdot, d_theta)`. Small residuals
/// certify the defining property of the characteristic line field.
pub fn kernel_invariance_residual(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
    h: f64,
) -> Result<f64, EngelError> {
    kernel_invariance_residual_of(m, p, h, &field_closure(m, kernel_z_general))
}

/// Same residual for an arbitrary candidate kernel field; used as a negative
/// control with deliberately wrong theta coefficients.
pub fn kernel_invariance_residual_of(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
    h: f64,
    z_field: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<f64, EngelError> {
    let flag = lorentz_flag(m, p)?;
    let e_frame = vec![
        flag.x_dir.to_vec(),
        flag.xdot_dir.to_vec(),
        flag.theta_dir.to_vec(),
    ];
    let state = p.as_array();
    let fields: [Box<dyn Fn(&[f64]) -> Vec<f64>>; 3] = [
        Box::new(field_closure(m, lorentz_x)),
        Box::new(field_closure(m, lorentz_xdot)),
        Box::new(|_: &[f64]| vec![0.0, 0.0, 0.0, 1.0]),
    ];
    let mut worst = 0.0f64;
    for f in &fields {
        let br = lie_bracket_numeric(z_field, f.as_ref(), &state, h);
        if br.iter().any(|c| !c.is_finite()) {
            return Err(MetricError::OutsideDomain(p.x.x1, p.x.x2, p.x.x3).into());
        }
        worst = worst.max(
            crate::contact::off_span_residual(&e_frame, &br)
                .map_err(|_| EngelError::RankError)?,
        );
    }
    Ok(worst)
}

/// Numerical ranks of the Engel ladder at `p`: the spans of `D`,
/// `D + [D, D]` and `E + [E, E]`, with brackets formed by central differences
/// and rank counted by singular values above `sv_threshold`.
pub fn engel_rank_ladder(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
    h: f64,
    sv_threshold: f64,
) -> Result<(usize, usize, usize), EngelError> {
    let state = p.as_array();
    let fx = field_closure(m, lorentz_x);
    let fxd = field_closure(m, lorentz_xdot);
    let ft = |_: &[f64]| vec![0.0, 0.0, 0.0, 1.0];

    let x = fx(&state);
    let xd = fxd(&state);
    let t = ft(&state);
    if x.iter().any(|c| !c.is_finite()) {
        return Err(MetricError::OutsideDomain(p.x.x1, p.x.x2, p.x.x3).into());
    }

    let rank = |cols: &[Vec<f64>]| {
        let mat = nalgebra::DMatrix::from_fn(4, cols.len(), |r, c| cols[c][r]);
        mat.svd(false, false)
            .singular_values
            .iter()
            .filter(|&&s| s > sv_threshold)
            .count()
    };

    let r_d = rank(&[x.clone(), t.clone()]);

    let br_xt = lie_bracket_numeric(&fx, &ft, &state, h);
    let r_d2 = rank(&[x.clone(), t.clone(), br_xt]);

    let e2 = vec![
        x.clone(),
        xd.clone(),
        t.clone(),
        lie_bracket_numeric(&fx, &fxd, &state, h),
        lie_bracket_numeric(&fx, &ft, &state, h),
        lie_bracket_numeric(&fxd, &ft, &state, h),
    ];
    let r_e2 = rank(&e2);

    Ok((r_d, r_d2, r_e2))
}

fn z_rhs(m: &DiagonalMetric, state: &[f64; 4]) -> Result<[f64; 4], EngelError> {
    let p = ProlongationPoint::from_array(*state);
    kernel_z_separable(m, &p)
}

fn rk4_step4(m: &DiagonalMetric, state: &[f64; 4], h: f64) -> Result<[f64; 4], EngelError> {
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| {
        let mut out = *a;
        for i in 0..4 {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = z_rhs(m, state)?;
    let k2 = z_rhs(m, &add(state, &k1, h / 2.0))?;
    let k3 = z_rhs(m, &add(state, &k2, h / 2.0))?;
    let k4 = z_rhs(m, &add(state, &k3, h))?;
    let mut out = *state;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrates the kernel flow from `state` for (signed) time `s` with steps
/// of magnitude at most `h`.
fn flow_state(
    m: &DiagonalMetric,
    mut state: [f64; 4],
    s: f64,
    h: f64,
) -> Result<[f64; 4], EngelError> {
    if s == 0.0 {
        return Ok(state);
    }
    let n = (s.abs() / h).ceil().max(1.0) as usize;
    let step = s / n as f64;
    for _ in 0..n {
        state = rk4_step4(m, &state, step)?;
    }
    Ok(state)
}

/// One sample of a kernel-flow trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub s: f64,
    pub p: ProlongationPoint,
}

/// A sampled integral curve of the kernel field. The angle is integrated
/// unwrapped and reduced mod `2 pi` only here, on output.
#[derive(Debug, Clone)]
pub struct KernelFlowTrace {
    pub samples: Vec<FlowSample>,
    pub step: f64,
    pub exited: bool,
}

impl KernelFlowTrace {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trace never empty")
    }
}

/// RK4 trace of the kernel flow of a separable metric from `p0`, sampled
/// every `h` up to `s_max` (which may be negative). Truncates with a flag if
/// the trajectory leaves the chart.
pub fn integrate_kernel_flow(
    m: &DiagonalMetric,
    p0: &ProlongationPoint,
    s_max: f64,
    h: f64,
) -> Result<KernelFlowTrace, EngelError> {
    if !m.is_separable() {
        return Err(MetricError::NotSeparable.into());
    }
    m.check_point(&p0.x)?;
    let reduce = |raw: [f64; 4], s: f64| FlowSample {
        s,
        p: ProlongationPoint::new(raw[0], raw[1], raw[2], raw[3].rem_euclid(TAU)),
    };
    let samples = vec![reduce(p0.as_array(), 0.0)];
    if s_max == 0.0 {
        return Ok(KernelFlowTrace {
            samples,
            step: h,
            exited: false,
        });
    }
    if h <= 0.0 {
        return Err(MetricError::InvalidStep(h).into());
    }
    let mut samples = samples;
    let dir = s_max.signum();
    let mut state = p0.as_array();
    let mut s = 0.0f64;
    let mut exited = false;
    while s.abs() < s_max.abs() - 1e-12 {
        let step = dir * h.min(s_max.abs() - s.abs());
        match rk4_step4(m, &state, step) {
            Ok(next) => {
                let pt = ChartPoint::new(next[0], next[1], next[2]);
                if !m.domain().contains(&pt) {
                    exited = true;
                    break;
                }
                state = next;
                s += step;
                samples.push(reduce(state, s));
            }
            Err(EngelError::Metric(MetricError::OutsideDomain(..))) => {
                exited = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(KernelFlowTrace {
        samples,
        step: h,
        exited,
    })
}

/// Whether `q` lies on the kernel-flow orbit through `p`, decided by dense
/// sampling of the flow over `[-s_window, s_window]` at step `h` followed by
/// golden-section refinement of the closest approach. Errors with
/// [`EngelError::Indeterminate`] if the flow leaves the chart in both
/// directions before the window is covered and no approach within `tol` was
/// found.
pub fn deprolong_equivalent(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
    q: &ProlongationPoint,
    s_window: f64,
    tol: f64,
    h: f64,
) -> Result<bool, EngelError> {
    let fwd = integrate_kernel_flow(m, p, s_window, h)?;
    let bwd = integrate_kernel_flow(m, p, -s_window, h)?;

    let mut best: (f64, [f64; 4]) = (f64::INFINITY, p.as_array());
    for sample in fwd.samples.iter().chain(bwd.samples.iter()) {
        let d = sample.p.distance(q);
        if d < best.0 {
            best = (d, sample.p.as_array());
        }
    }

    // refine around the best sample: golden-section over +-h
    let dist_at = |ds: f64| -> f64 {
        flow_state(m, best.1, ds, h)
            .map(|st| ProlongationPoint::from_array(st).distance(q))
            .unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (-h, h);
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - golden * (hi - lo);
    let mut d = lo + golden * (hi - lo);
    let (mut fc, mut fd) = (dist_at(c), dist_at(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - golden * (hi - lo);
            fc = dist_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + golden * (hi - lo);
            fd = dist_at(d);
        }
    }
    let refined = best.0.min(fc).min(fd);

    if refined <= tol {
        return Ok(true);
    }
    if fwd.exited && bwd.exited {
        return Err(EngelError::Indeterminate(refined));
    }
    Ok(false)
}

fn slice_project(v: &[f64; 4], z: &[f64; 4]) -> Result<Vector3<f64>, EngelError> {
    if z[2].abs() < 1e-12 {
        return Err(EngelError::Transversality);
    }
    let t = v[2] / z[2];
    Ok(Vector3::new(v[0] - t * z[0], v[1] - t * z[1], v[3] - t * z[3]))
}

fn orthonormal_plane(a: Vector3<f64>, b: Vector3<f64>) -> Result<Matrix3x2<f64>, EngelError> {
    let mat = Matrix3x2::from_columns(&[a, b]);
    let svd = mat.svd(true, false);
    if svd.singular_values[1] < 1e-10 {
        return Err(EngelError::RankError);
    }
    let u = svd.u.expect("u requested");
    Ok(Matrix3x2::from_columns(&[
        u.column(0).into_owned(),
        u.column(1).into_owned(),
    ]))
}

/// Pushforward of the even-contact plane to the quotient slice
/// `{x3 = const}`: projects `span(X, Xdot, d_theta)` along `Z` onto the slice
/// tangent space with coordinates `(x1, x2, theta)` and returns an
/// orthonormal 2-frame. The projection of `X` falls inside the span of the
/// other two, so the image is a plane.
pub fn pushforward_contact_plane(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
) -> Result<Matrix3x2<f64>, EngelError> {
    let flag = lorentz_flag(m, p)?;
    let z = flag.z_dir;
    let px = slice_project(&flag.x_dir, &z)?;
    let pxd = slice_project(&flag.xdot_dir, &z)?;
    let pt = slice_project(&flag.theta_dir, &z)?;
    let plane = orthonormal_plane(pxd, pt)?;
    // consistency: the projection of X must already lie in the plane
    let resid = (px - plane * (plane.transpose() * px)).norm();
    debug_assert!(resid < 1e-9, "projected X off plane by {resid}");
    Ok(plane)
}

/// The contact plane at `p` built the way the deprolongation theorem builds
/// it: the sky direction `d_theta` together with the difference quotient of
/// its transport along the kernel flow over `[-s, s]`, projected onto the
/// quotient slice. `eps` is the step of the flow-Jacobian finite difference.
pub fn sky_transport_plane(
    m: &DiagonalMetric,
    p: &ProlongationPoint,
    s: f64,
    eps: f64,
) -> Result<Matrix3x2<f64>, EngelError> {
    let h_flow = s / 16.0;
    let state = p.as_array();
    let q_fwd = flow_state(m, state, s, h_flow)?;
    let q_bwd = flow_state(m, state, -s, h_flow)?;

    // transport of d_theta from the flow endpoints back to p, by a central
    // finite-difference Jacobian-vector product of the flow map
    let transport = |from: [f64; 4], time: f64| -> Result<[f64; 4], EngelError> {
        let mut plus = from;
        let mut minus = from;
        plus[3] += eps;
        minus[3] -= eps;
        let a = flow_state(m, plus, time, h_flow)?;
        let b = flow_state(m, minus, time, h_flow)?;
        Ok([
            (a[0] - b[0]) / (2.0 * eps),
            (a[1] - b[1]) / (2.0 * eps),
            (a[2] - b[2]) / (2.0 * eps),
            (a[3] - b[3]) / (2.0 * eps),
        ])
    };
    let t_fwd = transport(q_fwd, -s)?;
    let t_bwd = transport(q_bwd, s)?;
    let dq = [
        (t_fwd[0] - t_bwd[0]) / (2.0 * s),
        (t_fwd[1] - t_bwd[1]) / (2.0 * s),
        (t_fwd[2] - t_bwd[2]) / (2.0 * s),
        (t_fwd[3] - t_bwd[3]) / (2.0 * s),
    ];

    let z = kernel_z_general(m, p)?;
    let sky = slice_project(&[0.0, 0.0, 0.0, 1.0], &z)?;
    let moved = slice_project(&dq, &z)?;
    orthonormal_plane(sky, moved)
}

/// The Engel flag of a Cartan prolongation over a contact frame `(Y, Zc)` on
/// a 3-dimensional chart: at fiber angle `t`, the rank-2 distribution is
/// spanned by `d_t` and `X(t) = Y cos t + Zc sin t`, and the kernel is `d_t`
/// itself.
pub fn cartan_prolongation_frame(
    y_field: &dyn Fn(&[f64]) -> Vec<f64>,
    zc_field: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64; 3],
    t: f64,
) -> Result<EngelFlag, EngelError> {
    let y = y_field(x);
    let z = zc_field(x);
    let cr = crate::quat::cross([y[0], y[1], y[2]], [z[0], z[1], z[2]]);
    let yn = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let zn = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
    let crn = (cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]).sqrt();
    if yn < 1e-12 || zn < 1e-12 || crn < 1e-8 * yn * zn {
        return Err(EngelError::RankError);
    }
    let (st, ct) = t.sin_cos();
    let mix = |a: f64, b: f64| a * ct + b * st;
    let mixdot = |a: f64, b: f64| -a * st + b * ct;
    Ok(EngelFlag {
        x_dir: [mix(y[0], z[0]), mix(y[1], z[1]), mix(y[2], z[2]), 0.0],
        xdot_dir: [
            mixdot(y[0], z[0]),
            mixdot(y[1], z[1]),
            mixdot(y[2], z[2]),
            0.0,
        ],
        theta_dir: [0.0, 0.0, 0.0, 1.0],
        z_dir: [0.0, 0.0, 0.0, 1.0],
    })
}
