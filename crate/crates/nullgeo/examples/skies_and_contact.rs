//! Skies and the contact plane on the quotient: tangency of sky curves,
//! the plane spanned by two skies against the canonical plane, and
//! independence of the orbit chart.

use nullgeo::model::verify_contact_on_nc;

fn main() {
    for c in [1u32, 2, 3] {
        let report = verify_contact_on_nc(c, 100, 0).unwrap();
        println!(
            "c = {c}: sky tangency residual {:.3e}, two-sky vs canonical plane angle {:.3e}, \
             chart independence {:.3e} ({} classes)",
            report.max_sky_residual,
            report.max_plane_angle,
            report.max_welldef_angle,
            report.n_samples
        );
    }
    println!("(all angles in radians; the quotient plane is the pushforward of the");
    println!(" canonical plane of the unit tangent bundle along the covering map)");
}
