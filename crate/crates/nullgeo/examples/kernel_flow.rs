//! The Engel flag on the projectivized cone bundle: rank ladder 2/3/4,
//! invariance of the even-contact plane under the kernel field, and a
//! negative control with a deliberately wrong kernel.

use nullgeo::engel::{
    engel_rank_ladder, kernel_invariance_residual, kernel_invariance_residual_of, kernel_z_general,
    kernel_z_separable, lorentz_x, ProlongationPoint,
};
use nullgeo::metric::DiagonalMetric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for m in [
        DiagonalMetric::minkowski3(),
        DiagonalMetric::s2s1_chart(2),
        DiagonalMetric::warped_chart(),
    ] {
        let mut worst_inv = 0.0f64;
        let mut worst_split = 0.0f64;
        let mut ladders_ok = true;
        for _ in 0..50 {
            let p = ProlongationPoint::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * TAU,
            );
            let ladder = engel_rank_ladder(&m, &p, 1e-5, 1e-6).unwrap();
            ladders_ok &= ladder == (2, 3, 4);
            worst_inv = worst_inv.max(kernel_invariance_residual(&m, &p, 1e-5).unwrap());
            let zg = kernel_z_general(&m, &p).unwrap();
            let zs = kernel_z_separable(&m, &p).unwrap();
            for i in 0..4 {
                worst_split = worst_split.max((zg[i] - zs[i]).abs());
            }
        }
        println!(
            "{:<12} rank ladder 2/3/4: {}, [Z,E] in E residual: {:.3e}, general vs separable Z: {:.3e}",
            m.id(),
            if ladders_ok { "yes" } else { "NO" },
            worst_inv,
            worst_split
        );
    }

    // replacing the kernel's fiber coefficient by 1 must break invariance
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
    let p = ProlongationPoint::new(0.0, 0.0, 0.0, 0.4);
    println!(
        "negative control (wrong fiber coefficient): residual {:.3}",
        kernel_invariance_residual_of(&m, &p, 1e-5, &wrong).unwrap()
    );
}
