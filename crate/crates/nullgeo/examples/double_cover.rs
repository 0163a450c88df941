//! The two-to-one cover of the unit tangent bundle by unit quaternions:
//! inversion round trips (including the anti-aligned branches) and the
//! commuting triangle with the Hopf fibration.

use nullgeo::quat::{
    exp_pure, hopf_commutes, phi, phi_inverse, FramePair, Quaternion, UnitImaginary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        if q.norm() > 0.1 {
            return q.normalize();
        }
    }
}

fn main() {
    let frame = FramePair::jk();
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let branch_probes = [
        ("identity", Quaternion::one()),
        ("half turn about i", Quaternion::i()),
        ("half turn about j", Quaternion::j()),
        ("half turn about k", Quaternion::k()),
        (
            "fiber rotation",
            exp_pure(0.7, UnitImaginary::new([1.0, 0.0, 0.0]).unwrap()),
        ),
    ];
    for (label, q) in branch_probes {
        let target = phi(q, &frame);
        let r = phi_inverse(&target, &frame);
        let dev = phi(r, &frame).distance(target);
        let pre = r.distance(q).min(r.distance(-q));
        println!("{label:>18}: reapplication error {dev:.3e}, preimage error {pre:.3e}");
    }

    let mut worst_round = 0.0f64;
    let mut worst_comm = 0.0f64;
    for _ in 0..1000 {
        let q = random_unit(&mut rng);
        let target = phi(q, &frame);
        let r = phi_inverse(&target, &frame);
        worst_round = worst_round.max(r.distance(q).min(r.distance(-q)));
        worst_comm = worst_comm.max(hopf_commutes(q, &frame));
    }
    println!("worst preimage error over 1000 random covers: {worst_round:.3e}");
    println!("worst commuting-triangle residual:            {worst_comm:.3e}");
}
