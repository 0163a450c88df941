//! Null geodesics on the product chart: constant length along RK4 traces,
//! null-cone launches staying null, and the integrator's convergence order.

use nullgeo::geodesic::integrate_geodesic;
use nullgeo::metric::{norm_sq, null_cone_vector, ChartPoint, DiagonalMetric, TangentVector};
use std::f64::consts::TAU;

fn main() {
    for c in [1u32, 2, 3] {
        let m = DiagonalMetric::s2s1_chart(c);
        let x0 = ChartPoint::new(0.3, -0.2, 0.0);

        let v0 = null_cone_vector(&m, &x0, 0.8).unwrap();
        let trace = integrate_geodesic(&m, &x0, &v0, TAU, 1e-3).unwrap();
        let mut null_drift = 0.0f64;
        for s in &trace.samples {
            null_drift = null_drift.max(norm_sq(&m, &s.x, &s.v).unwrap().abs());
        }
        println!(
            "c = {c}: {} samples, null drift over s in [0, 2 pi]: {null_drift:.3e}",
            trace.samples.len()
        );

        let vg = TangentVector::new(0.4, 0.1, 0.9);
        let trace = integrate_geodesic(&m, &x0, &vg, TAU, 1e-3).unwrap();
        println!(
            "c = {c}: generic initial data, g(v,v) drift: {:.3e}",
            trace.length_drift(&m).unwrap()
        );
    }

    // convergence against the analytic great circle, mapped through the
    // stereographic chart: halving the step shrinks the endpoint error ~16x
    let m = DiagonalMetric::round_sphere_chart();
    let circle = |t: f64| {
        let x = [1.0f64, 0.0, 0.0];
        let u = [0.0f64, 0.3f64.cos(), 0.3f64.sin()];
        let (s, c) = t.sin_cos();
        let p = [x[0] * c + u[0] * s, x[1] * c + u[1] * s, x[2] * c + u[2] * s];
        [p[0] / (1.0 - p[2]), p[1] / (1.0 - p[2])]
    };
    let x0c = circle(0.0);
    // chart velocity of the circle at t = 0: the start sits at the equator
    // point (1,0,0) with tangent (0, cos 0.3, sin 0.3)
    let v0 = TangentVector::new(0.3f64.sin(), 0.3f64.cos(), 0.0);
    let x0 = ChartPoint::new(x0c[0], x0c[1], 0.0);
    let endpoint_err = |h: f64| {
        let t = integrate_geodesic(&m, &x0, &v0, 1.0, h).unwrap();
        let want = circle(1.0);
        let e = t.last();
        ((e.x.x1 - want[0]).powi(2) + (e.x.x2 - want[1]).powi(2)).sqrt()
    };
    println!(
        "RK4 endpoint error factor under step halving: {:.1}",
        endpoint_err(2e-3) / endpoint_err(1e-3)
    );
}
