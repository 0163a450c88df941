//! Cyclic quotients: the order-2c quaternion action, its descent to the
//! block rotation on the unit tangent bundle, and canonical orbit
//! representatives.

use nullgeo::model::{canonical_class, orbit, UnitTangent};
use nullgeo::quat::{lens_descends, phi, FramePair, LensGenerator, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let frame = FramePair::jk();

    for c in 1..=6u32 {
        let mut worst_descent = 0.0f64;
        let mut worst_class = 0.0f64;
        for _ in 0..100 {
            let q = loop {
                let q = Quaternion::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                );
                if q.norm() > 0.1 {
                    break q.normalize();
                }
            };
            worst_descent = worst_descent.max(lens_descends(q, c).unwrap());

            // the whole quaternion orbit lands in one geodesic class
            let lens = LensGenerator::new(2 * c).unwrap();
            let mut first = None;
            for qq in lens.orbit(q) {
                let ut = UnitTangent::from_frame_pair(&phi(qq, &frame)).unwrap();
                let k = canonical_class(&ut, c).unwrap();
                match &first {
                    None => first = Some(k),
                    Some(f) => worst_class = worst_class.max(f.distance(&k)),
                }
            }
        }
        println!(
            "c = {c}: descent residual {worst_descent:.3e}, class spread over quaternion orbits {worst_class:.3e}"
        );
    }

    // one explicit orbit
    let p = UnitTangent::new(
        nalgebra::Vector3::new(1.0, 0.0, 0.0),
        nalgebra::Vector3::new(0.0, 1.0, 0.0),
    )
    .unwrap();
    println!("order-4 orbit of the equatorial frame:");
    for (j, e) in orbit(&p, 4).unwrap().iter().enumerate() {
        let a = e.as_array();
        println!(
            "  j = {j}: x = ({:+.1}, {:+.1}, {:+.1}), u = ({:+.1}, {:+.1}, {:+.1})",
            a[0], a[1], a[2], a[3], a[4], a[5]
        );
    }
}
