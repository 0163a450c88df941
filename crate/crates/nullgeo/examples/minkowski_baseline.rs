//! Flat-space baseline: vanishing Christoffel symbols, straight null
//! geodesics, and the cone parametrization.

use nullgeo::geodesic::integrate_geodesic;
use nullgeo::metric::{christoffel, norm_sq, null_cone_vector, ChartPoint, DiagonalMetric};

fn main() {
    let m = DiagonalMetric::minkowski3();
    let mfd = DiagonalMetric::minkowski3_fd();
    let p = ChartPoint::new(0.3, -1.2, 0.7);

    let analytic = christoffel(&m, &p).unwrap().max_abs();
    let fd = christoffel(&mfd, &p).unwrap().max_abs();
    println!("max |Christoffel| (analytic partials): {analytic:.3e}");
    println!("max |Christoffel| (FD partials):       {fd:.3e}");

    let x0 = ChartPoint::new(0.0, 0.0, 0.0);
    for theta in [0.0, 1.0, 2.5] {
        let v0 = null_cone_vector(&m, &x0, theta).unwrap();
        let trace = integrate_geodesic(&m, &x0, &v0, 2.0, 1e-3).unwrap();
        let end = trace.last();
        let straight = [2.0 * v0.v1, 2.0 * v0.v2, 2.0 * v0.v3];
        let dev = (end.x.x1 - straight[0])
            .abs()
            .max((end.x.x2 - straight[1]).abs())
            .max((end.x.x3 - straight[2]).abs());
        println!(
            "theta = {theta:.1}: endpoint deviation from the straight line {dev:.3e}, \
             g(v,v) = {:.3e}",
            norm_sq(&m, &end.x, &end.v).unwrap()
        );
    }
}
