//! Recovering a Lorentz metric from its cone: fit the unique normalized
//! quadric through sampled null directions and round-trip random cones.

use nalgebra::{Matrix3, Vector3};
use nullgeo::cone::{metric_from_cone, ConeQuadric};
use nullgeo::metric::TangentVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    // the flat cone from eight directions
    let samples: Vec<TangentVector> = (0..8)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 8.0;
            TangentVector::new(t.cos(), t.sin(), 1.0)
        })
        .collect();
    let q = metric_from_cone(&samples).unwrap();
    println!("flat cone recovered as:\n{:.6}", q.matrix());

    // round trip over random well-conditioned quadrics
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = Matrix3::from_fn(|_, _| rng.gen::<f64>() - 0.5);
        let basis = a.qr().q();
        let d = Matrix3::from_diagonal(&Vector3::new(
            0.5 + 1.5 * rng.gen::<f64>(),
            0.5 + 1.5 * rng.gen::<f64>(),
            -(0.5 + 1.5 * rng.gen::<f64>()),
        ));
        let g = basis * d * basis.transpose();
        let g = g / g.determinant().abs().cbrt();
        let g0 = ConeQuadric::new((g + g.transpose()) * 0.5).unwrap();
        let rec = metric_from_cone(&g0.sample_directions(8)).unwrap();
        worst = worst.max((rec.matrix() - g0.matrix()).abs().max());
    }
    println!("worst componentwise recovery error over 100 random cones: {worst:.3e}");

    // under-determined and inconsistent inputs fail loudly
    println!(
        "4 samples:      {:?}",
        metric_from_cone(&samples[..4]).unwrap_err()
    );
    let off_cone: Vec<TangentVector> = (0..8)
        .map(|_| {
            TangentVector::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                1.0 + rng.gen::<f64>(),
            )
        })
        .collect();
    println!(
        "off-cone cloud: {:?}",
        metric_from_cone(&off_cone).unwrap_err()
    );
}
