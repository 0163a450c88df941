//! Fixed-step RK4 geodesic integration and the geodesic-spray / Euler-field
//! bracket check on the tangent bundle.

use crate::contact::lie_bracket_numeric;
use crate::metric::{christoffel, ChartPoint, DiagonalMetric, MetricError, TangentVector};

/// One sample of an integrated geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub s: f64,
    pub x: ChartPoint,
    pub v: TangentVector,
}

/// A sampled geodesic `(s, x(s), v(s))`. `exited` flags truncation at the
/// chart boundary.
#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub samples: Vec<TraceSample>,
    pub step: f64,
    pub exited: bool,
}

impl GeodesicTrace {
    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("trace never empty")
    }

    /// Worst drift of `g(v, v)` from its initial value along the trace.
    pub fn length_drift(&self, m: &DiagonalMetric) -> Result<f64, MetricError> {
        let first = self.samples.first().expect("trace never empty");
        let base = crate::metric::norm_sq(m, &first.x, &first.v)?;
        let mut worst = 0.0f64;
        for s in &self.samples {
            let n = crate::metric::norm_sq(m, &s.x, &s.v)?;
            worst = worst.max((n - base).abs());
        }
        Ok(worst)
    }
}

/// Right-hand side of the geodesic equation:
/// `(dx/ds, dv/ds) = (v, -G(v, v))`.
pub fn geodesic_rhs(
    m: &DiagonalMetric,
    x: &ChartPoint,
    v: &TangentVector,
) -> Result<(TangentVector, TangentVector), MetricError> {
    let gamma = christoffel(m, x)?.g;
    let va = v.as_array();
    let mut acc = [0.0f64; 3];
    for (k, a) in acc.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += va[i] * va[j] * gamma[k][i][j];
            }
        }
        *a = -s;
    }
    Ok((*v, TangentVector::from_array(acc)))
}

fn rhs6(m: &DiagonalMetric, state: &[f64; 6]) -> Result<[f64; 6], MetricError> {
    let x = ChartPoint::new(state[0], state[1], state[2]);
    let v = TangentVector::new(state[3], state[4], state[5]);
    let (dx, dv) = geodesic_rhs(m, &x, &v)?;
    Ok([dx.v1, dx.v2, dx.v3, dv.v1, dv.v2, dv.v3])
}

fn rk4_step(m: &DiagonalMetric, state: &[f64; 6], h: f64) -> Result<[f64; 6], MetricError> {
    let add = |a: &[f64; 6], b: &[f64; 6], s: f64| {
        let mut out = *a;
        for i in 0..6 {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = rhs6(m, state)?;
    let k2 = rhs6(m, &add(state, &k1, h / 2.0))?;
    let k3 = rhs6(m, &add(state, &k2, h / 2.0))?;
    let k4 = rhs6(m, &add(state, &k3, h))?;
    let mut out = *state;
    for i in 0..6 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Classical fixed-step RK4 trace of the geodesic with initial data
/// `(x0, v0)`, sampled every `h` up to `s_max`. If the trajectory leaves the
/// chart domain the trace is truncated and flagged.
pub fn integrate_geodesic(
    m: &DiagonalMetric,
    x0: &ChartPoint,
    v0: &TangentVector,
    s_max: f64,
    h: f64,
) -> Result<GeodesicTrace, MetricError> {
    m.check_point(x0)?;
    let first = TraceSample {
        s: 0.0,
        x: *x0,
        v: *v0,
    };
    if s_max == 0.0 {
        return Ok(GeodesicTrace {
            samples: vec![first],
            step: h,
            exited: false,
        });
    }
    if h <= 0.0 || s_max < 0.0 {
        return Err(MetricError::InvalidStep(h));
    }

    let mut samples = vec![first];
    let mut state = [x0.x1, x0.x2, x0.x3, v0.v1, v0.v2, v0.v3];
    let mut s = 0.0f64;
    let mut exited = false;
    while s < s_max - 1e-12 {
        let step = h.min(s_max - s);
        match rk4_step(m, &state, step) {
            Ok(next) => {
                let p = ChartPoint::new(next[0], next[1], next[2]);
                if !m.domain().contains(&p) {
                    exited = true;
                    break;
                }
                state = next;
                s += step;
                samples.push(TraceSample {
                    s,
                    x: p,
                    v: TangentVector::new(next[3], next[4], next[5]),
                });
            }
            Err(MetricError::OutsideDomain(..)) => {
                exited = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(GeodesicTrace {
        samples,
        step: h,
        exited,
    })
}

/// Residual of the spray/Euler commutation relation on the tangent bundle.
///
/// With the geodesic spray `X_g(x, v) = (v, -G(v, v))` and the Euler field
/// `D(x, v) = (0, v)`, the bracket `[D, X_g]` (convention `[X, Y] = XY - YX`)
/// equals `X_g`. Both Jacobians are formed by central differences with step
/// `h`; the max-norm of `[D, X_g] - X_g` is returned.
pub fn spray_euler_bracket(
    m: &DiagonalMetric,
    x: &ChartPoint,
    v: &TangentVector,
    h: f64,
) -> Result<f64, MetricError> {
    m.check_point(x)?;
    let mc = m.clone();
    let spray = move |s: &[f64]| -> Vec<f64> {
        let st = [s[0], s[1], s[2], s[3], s[4], s[5]];
        rhs6(&mc, &st).map(|r| r.to_vec()).unwrap_or_else(|_| vec![f64::NAN; 6])
    };
    let euler = |s: &[f64]| -> Vec<f64> { vec![0.0, 0.0, 0.0, s[3], s[4], s[5]] };

    let state = [x.x1, x.x2, x.x3, v.v1, v.v2, v.v3];
    let bracket = lie_bracket_numeric(&euler, &spray, &state, h);
    let expect = rhs6(m, &state)?;
    let mut worst = 0.0f64;
    for i in 0..6 {
        worst = worst.max((bracket[i] - expect[i]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{null_cone_vector, ChartBox, ComponentFn};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;
    use std::sync::Arc;

    /// Stereographic projection from the north pole onto the equatorial
    /// plane; inverse of the chart whose metric is `4/(1+r^2)^2 I`.
    fn stereo(p: [f64; 3]) -> [f64; 2] {
        [p[0] / (1.0 - p[2]), p[1] / (1.0 - p[2])]
    }

    fn great_circle(x: [f64; 3], u: [f64; 3], t: f64) -> [f64; 3] {
        let (s, c) = t.sin_cos();
        [
            x[0] * c + u[0] * s,
            x[1] * c + u[1] * s,
            x[2] * c + u[2] * s,
        ]
    }

    /// Chart velocity of the projected great circle at time t.
    fn stereo_velocity(x: [f64; 3], u: [f64; 3], t: f64) -> [f64; 2] {
        let p = great_circle(x, u, t);
        let dp = great_circle(x, u, t + std::f64::consts::FRAC_PI_2); // derivative of cos/sin pair
        let d = 1.0 - p[2];
        [
            (dp[0] * d + p[0] * dp[2]) / (d * d),
            (dp[1] * d + p[1] * dp[2]) / (d * d),
        ]
    }

    #[test]
    fn minkowski_straight_lines() {
        let m = DiagonalMetric::minkowski3();
        let x0 = ChartPoint::new(0.0, 0.0, 0.0);
        let v0 = TangentVector::new(1.0, 0.0, 1.0);
        let tr = integrate_geodesic(&m, &x0, &v0, 1.0, 1e-3).unwrap();
        assert!(!tr.exited);
        let end = tr.last();
        assert_abs_diff_eq!(end.s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.x.x1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.x.x2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(end.x.x3, 1.0, epsilon = 1e-12);
        assert_eq!(end.v.as_array(), v0.as_array());
    }

    #[test]
    fn zero_smax_single_sample() {
        let m = DiagonalMetric::minkowski3();
        let tr = integrate_geodesic(
            &m,
            &ChartPoint::new(0.5, 0.0, 0.0),
            &TangentVector::new(0.0, 1.0, 1.0),
            0.0,
            1e-2,
        )
        .unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.samples[0].s, 0.0);
    }

    #[test]
    fn rest_point_stays() {
        let m = DiagonalMetric::round_sphere_chart();
        let x = ChartPoint::new(0.2, -0.1, 0.0);
        let (dx, dv) = geodesic_rhs(&m, &x, &TangentVector::zero()).unwrap();
        assert_eq!(dx.as_array(), [0.0; 3]);
        assert_eq!(dv.as_array(), [0.0; 3]);
    }

    #[test]
    fn round_sphere_matches_great_circle_oracle() {
        // Great circle through (1,0,0) tilted out of the equator; stays away
        // from the projection pole.
        let m = DiagonalMetric::round_sphere_chart();
        let x = [1.0, 0.0, 0.0];
        let phi = 0.3f64;
        let u = [0.0, phi.cos(), phi.sin()];

        let x0c = stereo(x);
        let v0c = stereo_velocity(x, u, 0.0);
        let x0 = ChartPoint::new(x0c[0], x0c[1], 0.0);
        let v0 = TangentVector::new(v0c[0], v0c[1], 0.0);

        let tr = integrate_geodesic(&m, &x0, &v0, TAU, 1e-3).unwrap();
        assert!(!tr.exited);
        let mut worst = 0.0f64;
        for sample in tr.samples.iter().step_by(100) {
            let want = stereo(great_circle(x, u, sample.s));
            worst = worst
                .max((sample.x.x1 - want[0]).abs())
                .max((sample.x.x2 - want[1]).abs());
        }
        assert!(worst < 1e-7, "worst chart error {worst}");
    }

    #[test]
    fn acceleration_matches_great_circle_second_derivative() {
        // FD second derivative of the projected great circle vs geodesic_rhs.
        let m = DiagonalMetric::round_sphere_chart();
        let x = [1.0, 0.0, 0.0];
        let u = [0.0, 0.9553364891256061f64.cos(), 0.9553364891256061f64.sin()];
        let h = 1e-4;
        for &t in &[0.0, 0.5, 1.2] {
            let pm = stereo(great_circle(x, u, t - h));
            let p0 = stereo(great_circle(x, u, t));
            let pp = stereo(great_circle(x, u, t + h));
            let acc_fd = [
                (pp[0] - 2.0 * p0[0] + pm[0]) / (h * h),
                (pp[1] - 2.0 * p0[1] + pm[1]) / (h * h),
            ];
            let vc = stereo_velocity(x, u, t);
            let (_, acc) = geodesic_rhs(
                &m,
                &ChartPoint::new(p0[0], p0[1], 0.0),
                &TangentVector::new(vc[0], vc[1], 0.0),
            )
            .unwrap();
            assert_abs_diff_eq!(acc.v1, acc_fd[0], epsilon = 1e-5);
            assert_abs_diff_eq!(acc.v2, acc_fd[1], epsilon = 1e-5);
        }
    }

    #[test]
    fn constant_length_and_null_preservation() {
        let m = DiagonalMetric::s2s1_chart(2);
        let x0 = ChartPoint::new(0.3, -0.2, 0.0);

        // generic (non-null) initial data
        let v0 = TangentVector::new(0.4, 0.1, 0.8);
        let tr = integrate_geodesic(&m, &x0, &v0, TAU, 1e-3).unwrap();
        assert!(tr.length_drift(&m).unwrap() < 1e-8);

        // null initial data stays null
        let vn = null_cone_vector(&m, &x0, 1.1).unwrap();
        let tr = integrate_geodesic(&m, &x0, &vn, TAU, 1e-3).unwrap();
        let mut worst = 0.0f64;
        for s in &tr.samples {
            worst = worst.max(crate::metric::norm_sq(&m, &s.x, &s.v).unwrap().abs());
        }
        assert!(worst < 1e-8);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let m = DiagonalMetric::round_sphere_chart();
        let x = [1.0, 0.0, 0.0];
        let u = [0.0, 0.3f64.cos(), 0.3f64.sin()];
        let x0c = stereo(x);
        let v0c = stereo_velocity(x, u, 0.0);
        let x0 = ChartPoint::new(x0c[0], x0c[1], 0.0);
        let v0 = TangentVector::new(v0c[0], v0c[1], 0.0);

        let endpoint_err = |h: f64| {
            let tr = integrate_geodesic(&m, &x0, &v0, 1.0, h).unwrap();
            let want = stereo(great_circle(x, u, 1.0));
            let e = tr.last();
            ((e.x.x1 - want[0]).powi(2) + (e.x.x2 - want[1]).powi(2)).sqrt()
        };
        let e1 = endpoint_err(2e-3);
        let e2 = endpoint_err(1e-3);
        let factor = e1 / e2;
        assert!(
            (12.0..=20.0).contains(&factor),
            "halving h gave error factor {factor} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn chart_exit_truncates_with_flag() {
        let comps: [ComponentFn; 3] = [
            Arc::new(|_: &ChartPoint| 1.0),
            Arc::new(|_: &ChartPoint| 1.0),
            Arc::new(|_: &ChartPoint| -1.0),
        ];
        let narrow = DiagonalMetric::new(
            "narrow",
            comps,
            true,
            ChartBox::new([-0.5, -0.5, -0.5], [0.5, 0.5, 0.5]),
        );
        let tr = integrate_geodesic(
            &narrow,
            &ChartPoint::new(0.0, 0.0, 0.0),
            &TangentVector::new(1.0, 0.0, 1.0),
            10.0,
            1e-2,
        )
        .unwrap();
        assert!(tr.exited);
        let end = tr.last();
        assert!(end.x.x1 <= 0.5 && end.s < 1.0);
    }

    #[test]
    fn spray_euler_examples() {
        let mk = DiagonalMetric::minkowski3();
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..10 {
            let x = ChartPoint::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let v = TangentVector::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            );
            assert!(spray_euler_bracket(&mk, &x, &v, 1e-5).unwrap() < 1e-10);
        }

        let rs = DiagonalMetric::round_sphere_chart();
        for _ in 0..10 {
            let x = ChartPoint::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, 0.0);
            let v = TangentVector::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            );
            assert!(spray_euler_bracket(&rs, &x, &v, 1e-5).unwrap() < 1e-4);
        }

        // v = 0: both fields vanish on the zero section fiber direction
        let r = spray_euler_bracket(&rs, &ChartPoint::new(0.1, 0.2, 0.0), &TangentVector::zero(), 1e-5)
            .unwrap();
        assert!(r < 1e-10);
    }
}
