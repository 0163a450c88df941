//! Acceptance suite: every release-gating property at its declared
//! tolerance, one pass/fail line per criterion (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nullgeo::cone::{metric_from_cone, ConeError, ConeQuadric};
use nullgeo::contact::{max_principal_angle, wedge_coefficient_3d, OneFormField};
use nullgeo::engel::{
    engel_rank_ladder, kernel_invariance_residual, kernel_invariance_residual_of,
    kernel_z_general, kernel_z_separable, lorentz_x, pushforward_contact_plane,
    sky_transport_plane, ProlongationPoint,
};
use nullgeo::geodesic::integrate_geodesic;
use nullgeo::metric::{christoffel, ChartPoint, DiagonalMetric, TangentVector};
use nullgeo::model::{
    canonical_class, intersection_count, orbit, random_unit_tangents, verify_contact_on_nc,
};
use nullgeo::quat::{
    exp_pure, hopf_commutes, lens_descends, phi, phi_inverse, FramePair, LensGenerator,
    Quaternion, UnitImaginary,
};
use nullgeo::verify::deprolong_comparison;

fn criterion(n: u32, ok: bool, detail: &str) {
    println!(
        "[{}] criterion {n}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
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

#[test]
fn c01_intersection_structure() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut counts_ok = true;
    for c in 1..=4u32 {
        let want = TAU / f64::from(c);
        for p in random_unit_tangents(50, 1) {
            let (count, gaps) = intersection_count(&p, c).unwrap();
            counts_ok &= count == c as usize;
            for g in gaps {
                worst_gap = worst_gap.max((g - want).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        counts_ok && worst_gap < 1e-9 && elapsed < 1.0,
        &format!(
            "c crossings for c in 1..=4, 50 samples each; worst gap deviation {worst_gap:.3e} \
             (tol 1e-9), {elapsed:.2} s (budget 1 s)"
        ),
    );
}

#[test]
fn c02_quotient_consistency() {
    let start = Instant::now();
    let points = random_unit_tangents(1000, 2);

    // constant on orbits: bitwise where the cyclic rotation is exact
    // sign/swap arithmetic (orders 1, 2, 4), and at the arithmetic floor for
    // order 3 where quarter-turn trigonometry is inexact
    let mut exact_ok = true;
    let mut spread3 = 0.0f64;
    for p in points.iter().take(250) {
        for c in [1u32, 2, 4] {
            let base = canonical_class(p, c).unwrap();
            for e in orbit(p, c).unwrap() {
                exact_ok &=
                    canonical_class(&e, c).unwrap().rep().as_array() == base.rep().as_array();
            }
        }
        let base = canonical_class(p, 3).unwrap();
        for e in orbit(p, 3).unwrap() {
            spread3 = spread3.max(canonical_class(&e, 3).unwrap().distance(&base));
        }
    }

    // collision-free across distinct orbits at 1e-6 resolution
    let reps: Vec<[f64; 6]> = points
        .iter()
        .map(|p| canonical_class(p, 3).unwrap().rep().as_array())
        .collect();
    let mut min_dist = f64::INFINITY;
    for (i, a) in reps.iter().enumerate() {
        for b in reps.iter().skip(i + 1) {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            min_dist = min_dist.min(d2.sqrt());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        2,
        exact_ok && spread3 < 1e-13 && min_dist > 1e-6 && elapsed < 5.0,
        &format!(
            "constant on orbits (bitwise for orders 1/2/4; order-3 spread {spread3:.3e}); \
             1000 random orbits separated by {min_dist:.3e} (floor 1e-6), {elapsed:.2} s (budget 5 s)"
        ),
    );
}

#[test]
fn c03_double_cover_round_trip() {
    let start = Instant::now();
    let frame = FramePair::jk();
    let i_axis = UnitImaginary::new([1.0, 0.0, 0.0]).unwrap();
    // forced colinear branches: aligned, anti-aligned in both stages, fibers
    let forced = vec![
        Quaternion::one(),
        Quaternion::i(),
        Quaternion::j(),
        Quaternion::k(),
        exp_pure(1.2, i_axis),
    ];
    let mut worst = 0.0f64;
    for q in forced.into_iter().chain(random_unit_quaternions(1000, 3)) {
        let target = phi(q, &frame);
        let r = phi_inverse(&target, &frame);
        worst = worst.max(r.distance(q).min(r.distance(-q)));
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        3,
        worst < 1e-10 && elapsed < 1.0,
        &format!(
            "phi_inverse . phi lands on a preimage within {worst:.3e} (tol 1e-10) over 1000 \
             samples plus forced branches, {elapsed:.2} s (budget 1 s)"
        ),
    );
}

#[test]
fn c04_commuting_diagram() {
    let frame = FramePair::jk();
    let mut worst = 0.0f64;
    for q in random_unit_quaternions(1000, 4) {
        worst = worst.max(hopf_commutes(q, &frame));
    }
    criterion(
        4,
        worst < 1e-12,
        &format!("f . phi = tau residual {worst:.3e} over 1000 samples (tol 1e-12)"),
    );
}

#[test]
fn c05_lens_descent_and_orbit_projection() {
    let frame = FramePair::jk();
    let mut worst_descent = 0.0f64;
    let mut orbits_ok = true;
    let mut worst_match = 0.0f64;
    for c in 1..=6u32 {
        let lens = LensGenerator::new(2 * c).unwrap();
        for q in random_unit_quaternions(100, 5 + u64::from(c)) {
            worst_descent = worst_descent.max(lens_descends(q, c).unwrap());

            // project the order-2c orbit and match it with the rotation orbit
            let base =
                nullgeo::model::UnitTangent::from_frame_pair(&phi(q, &frame)).unwrap();
            let zc_orbit = orbit(&base, c).unwrap();
            let mut projected: Vec<nullgeo::model::UnitTangent> = Vec::new();
            for qq in lens.orbit(q) {
                let ut = nullgeo::model::UnitTangent::from_frame_pair(&phi(qq, &frame)).unwrap();
                if projected.iter().all(|e| e.distance(&ut) > 1e-6) {
                    projected.push(ut);
                }
            }
            orbits_ok &= projected.len() == c as usize;
            for e in &projected {
                let best = zc_orbit
                    .iter()
                    .map(|z| z.distance(e))
                    .fold(f64::INFINITY, f64::min);
                worst_match = worst_match.max(best);
            }
        }
    }
    criterion(
        5,
        worst_descent < 1e-10 && orbits_ok && worst_match < 1e-12,
        &format!(
            "descent residual {worst_descent:.3e} (tol 1e-10) for c in 1..=6; order-2c orbits \
             project to c elements matching the rotation orbits within {worst_match:.3e}"
        ),
    );
}

#[test]
fn c06_contact_nondegeneracy_isothermal() {
    let conf = |x1: f64, x2: f64| {
        let r2 = x1 * x1 + x2 * x2;
        4.0 / ((1.0 + r2) * (1.0 + r2))
    };
    let alpha = OneFormField::unbounded(
        3,
        Arc::new(move |p: &[f64]| {
            let g = conf(p[0], p[1]).sqrt();
            vec![g * p[2].cos(), g * p[2].sin(), 0.0]
        }),
    );
    let mut worst = 0.0f64;
    for a in 0..10 {
        for b in 0..10 {
            for k in 0..10 {
                let x = vec![
                    -1.0 + 2.0 * a as f64 / 9.0,
                    -1.0 + 2.0 * b as f64 / 9.0,
                    TAU * k as f64 / 10.0,
                ];
                let coeff = wedge_coefficient_3d(&alpha, &x, 1e-5).unwrap();
                // the analytic coefficient is -1/(||dx1|| ||dx2||) = -sqrt(g11 g22)
                worst = worst.max((coeff + conf(x[0], x[1])).abs());
            }
        }
    }

    let dz = OneFormField::unbounded(3, Arc::new(|_: &[f64]| vec![0.0, 0.0, 1.0]));
    let mut control = 0.0f64;
    for a in 0..5 {
        let x = vec![-1.0 + 0.5 * a as f64, 0.3, 0.1];
        control = control.max(wedge_coefficient_3d(&dz, &x, 1e-5).unwrap().abs());
    }
    criterion(
        6,
        worst < 1e-6 && control < 1e-10,
        &format!(
            "isothermal coefficient error {worst:.3e} on the 1000-point grid (tol 1e-6); \
             integrable control {control:.3e} (tol 1e-10)"
        ),
    );
}

#[test]
fn c07_sky_tangency_and_pushforward() {
    let start = Instant::now();
    let mut worst_sky = 0.0f64;
    let mut worst_plane = 0.0f64;
    let mut worst_welldef = 0.0f64;
    for c in [1u32, 2, 3] {
        let report = verify_contact_on_nc(c, 100, 0).unwrap();
        worst_sky = worst_sky.max(report.max_sky_residual);
        worst_plane = worst_plane.max(report.max_plane_angle);
        worst_welldef = worst_welldef.max(report.max_welldef_angle);
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        7,
        worst_sky < 1e-6 && worst_plane < 1e-5 && worst_welldef < 1e-5 && elapsed < 30.0,
        &format!(
            "sky tangency residual {worst_sky:.3e} (tol 1e-6); two-sky plane vs pushed-forward \
             plane {worst_plane:.3e} (tol 1e-5); chart independence {worst_welldef:.3e} \
             (tol 1e-5); c in 1..=3, 100 classes each, {elapsed:.2} s (budget 30 s)"
        ),
    );
}

#[test]
fn c08_engel_flag_and_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut random_point = |extent: f64| {
        ProlongationPoint::new(
            (rng.gen::<f64>() - 0.5) * 2.0 * extent,
            (rng.gen::<f64>() - 0.5) * 2.0 * extent,
            (rng.gen::<f64>() - 0.5) * 2.0 * extent,
            rng.gen::<f64>() * TAU,
        )
    };
    let mut ladders_ok = true;
    let mut worst_inv = 0.0f64;
    let mut worst_split = 0.0f64;
    for m in [
        DiagonalMetric::minkowski3(),
        DiagonalMetric::s2s1_chart(2),
        DiagonalMetric::warped_chart(),
    ] {
        for _ in 0..200 {
            let p = random_point(1.0);
            ladders_ok &= engel_rank_ladder(&m, &p, 1e-5, 1e-6).unwrap() == (2, 3, 4);
            worst_inv = worst_inv.max(kernel_invariance_residual(&m, &p, 1e-5).unwrap());
            if m.is_separable() {
                let zg = kernel_z_general(&m, &p).unwrap();
                let zs = kernel_z_separable(&m, &p).unwrap();
                for i in 0..4 {
                    worst_split = worst_split.max((zg[i] - zs[i]).abs());
                }
            }
        }
    }

    // negative control: wrong fiber coefficient
    let m = DiagonalMetric::s2s1_chart(2);
    let m2 = m.clone();
    let wrong = move |s: &[f64]| {
        let p = ProlongationPoint::new(s[0], s[1], s[2], s[3]);
        match lorentz_x(&m2, &p) {
            Ok(mut x) => {
                x[3] = 1.0;
                x.to_vec()
            }
            Err(_) => vec![f64::NAN; 4],
        }
    };
    let control = kernel_invariance_residual_of(
        &m,
        &ProlongationPoint::new(0.0, 0.0, 0.0, 0.4),
        1e-5,
        &wrong,
    )
    .unwrap();

    criterion(
        8,
        ladders_ok && worst_inv < 1e-4 && worst_split < 1e-12 && control > 1e-2,
        &format!(
            "rank ladder 2/3/4 at 200 points per metric; [Z,E] residual {worst_inv:.3e} \
             (tol 1e-4); general vs separable kernel {worst_split:.3e} (tol 1e-12); \
             negative control {control:.3} (> 1e-2)"
        ),
    );
}

#[test]
fn c09_deprolongation() {
    // starts whose spatial circle stays inside the chart: geodesics through
    // points taken too close to the chart origin pass through the projection
    // pole, so exiting draws are rejected and redrawn
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut full_range_comparisons = |m: &DiagonalMetric, n: usize| {
        let mut out = Vec::new();
        let mut attempts = 0;
        while out.len() < n && attempts < 100 {
            attempts += 1;
            let p = ProlongationPoint::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() * TAU,
            );
            let cmp = deprolong_comparison(m, &p, TAU, 1e-3).unwrap();
            if !cmp.flow_exited {
                out.push(cmp);
            }
        }
        assert_eq!(out.len(), n, "not enough chart-covered geodesics");
        out
    };

    // constant time component: pointwise agreement of the parametrized curves
    let mut worst_pointwise = 0.0f64;
    for m in [DiagonalMetric::minkowski3(), DiagonalMetric::s2s1_chart(1)] {
        for cmp in full_range_comparisons(&m, 10) {
            worst_pointwise = worst_pointwise.max(cmp.max_pointwise);
        }
    }

    // varying time component: the asserted bound is on the images
    let warped = DiagonalMetric::warped_chart();
    let mut worst_hausdorff = 0.0f64;
    let mut observed_pointwise = 0.0f64;
    for cmp in full_range_comparisons(&warped, 10) {
        worst_hausdorff = worst_hausdorff.max(cmp.hausdorff);
        observed_pointwise = observed_pointwise.max(cmp.max_pointwise);
    }
    println!(
        "  note: varying-g33 flows also matched pointwise at {observed_pointwise:.3e}, i.e. the \
         kernel-flow projection ran as an affinely parametrized geodesic; logged, not asserted"
    );
    criterion(
        9,
        worst_pointwise < 1e-6 && worst_hausdorff < 1e-5,
        &format!(
            "constant-g33 pointwise distance {worst_pointwise:.3e} (tol 1e-6) over s in [0, 2 pi] \
             at h = 1e-3; varying-g33 image Hausdorff {worst_hausdorff:.3e} (tol 1e-5)"
        ),
    );
}

#[test]
fn c10_pushforward_contact_via_prolongation() {
    let m = DiagonalMetric::s2s1_chart(2);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = ProlongationPoint::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * TAU,
        );
        let direct = pushforward_contact_plane(&m, &p).unwrap();
        let transported = sky_transport_plane(&m, &p, 5e-4, 1e-6).unwrap();
        let a: Vec<Vec<f64>> = (0..2)
            .map(|k| direct.column(k).iter().copied().collect())
            .collect();
        let b: Vec<Vec<f64>> = (0..2)
            .map(|k| transported.column(k).iter().copied().collect())
            .collect();
        worst = worst.max(max_principal_angle(&a, &b).unwrap());
    }
    criterion(
        10,
        worst < 1e-5,
        &format!(
            "pushforward plane vs difference-quotient sky transport: max principal angle \
             {worst:.3e} at 100 prolongation points (tol 1e-5)"
        ),
    );
}

#[test]
fn c11_cone_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = Matrix3::from_fn(|_, _| rng.gen::<f64>() - 0.5);
        let q = a.qr().q();
        let d = Matrix3::from_diagonal(&Vector3::new(
            0.5 + 1.5 * rng.gen::<f64>(),
            0.5 + 1.5 * rng.gen::<f64>(),
            -(0.5 + 1.5 * rng.gen::<f64>()),
        ));
        let g = q * d * q.transpose();
        let g = g / g.determinant().abs().cbrt();
        let g0 = ConeQuadric::new((g + g.transpose()) * 0.5).unwrap();
        let rec = metric_from_cone(&g0.sample_directions(8)).unwrap();
        worst = worst.max((rec.matrix() - g0.matrix()).abs().max());
    }

    let four: Vec<TangentVector> = (0..4)
        .map(|k| {
            let t = TAU * k as f64 / 4.0;
            TangentVector::new(t.cos(), t.sin(), 1.0)
        })
        .collect();
    let undersampled_errors = matches!(
        metric_from_cone(&four),
        Err(ConeError::DegenerateCone(4, _))
    );
    criterion(
        11,
        worst < 1e-8 && undersampled_errors,
        &format!(
            "100 random unit-determinant cones recovered from 8 directions within {worst:.3e} \
             (tol 1e-8); 4-sample input rejected cleanly"
        ),
    );
}

#[test]
fn c12_minkowski_baseline() {
    let analytic = DiagonalMetric::minkowski3();
    let fd = DiagonalMetric::minkowski3_fd();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_analytic = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_straight = 0.0f64;
    for _ in 0..20 {
        let p = ChartPoint::new(
            rng.gen::<f64>() * 4.0 - 2.0,
            rng.gen::<f64>() * 4.0 - 2.0,
            rng.gen::<f64>() * 4.0 - 2.0,
        );
        worst_analytic = worst_analytic.max(christoffel(&analytic, &p).unwrap().max_abs());
        worst_fd = worst_fd.max(christoffel(&fd, &p).unwrap().max_abs());

        let v = TangentVector::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        let tr = integrate_geodesic(&analytic, &p, &v, 1.0, 1e-3).unwrap();
        let end = tr.last();
        worst_straight = worst_straight
            .max((end.x.x1 - (p.x1 + v.v1)).abs())
            .max((end.x.x2 - (p.x2 + v.v2)).abs())
            .max((end.x.x3 - (p.x3 + v.v3)).abs())
            .max((end.v.v1 - v.v1).abs())
            .max((end.v.v2 - v.v2).abs())
            .max((end.v.v3 - v.v3).abs());
    }
    criterion(
        12,
        worst_analytic < 1e-10 && worst_fd < 1e-6 && worst_straight < 1e-12,
        &format!(
            "Christoffel symbols: {worst_analytic:.3e} analytic (tol 1e-10), {worst_fd:.3e} FD \
             (tol 1e-6); straight-line deviation {worst_straight:.3e} (tol 1e-12)"
        ),
    );
}
