//! Wedge nondegeneracy and Frobenius residuals: the standard contact form
//! against an integrable control, the unit-cotangent form of the round
//! sphere in an isothermal chart, and kernel frames under the bracket test.

use nullgeo::contact::{
    contact_condition_3d, frobenius_check, wedge_coefficient_3d, DistributionFrame, OneFormField,
};
use std::sync::Arc;

fn grid(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let t = |k: usize| -1.0 + 2.0 * k as f64 / (n - 1) as f64;
                out.push(vec![t(a), t(b), t(c)]);
            }
        }
    }
    out
}

fn main() {
    let h = 1e-5;
    let samples = grid(6);

    let standard = OneFormField::unbounded(3, Arc::new(|p: &[f64]| vec![0.0, p[0], 1.0]));
    let report = contact_condition_3d(&standard, &samples, h).unwrap();
    println!(
        "standard contact form: min |coefficient| = {:.6} over {} samples",
        report.min_abs, report.n_samples
    );

    let integrable = OneFormField::unbounded(3, Arc::new(|_: &[f64]| vec![0.0, 0.0, 1.0]));
    let report = contact_condition_3d(&integrable, &samples, h).unwrap();
    println!("integrable control (dz): min |coefficient| = {:.3e}", report.min_abs);

    // unit cotangent bundle of the round sphere, isothermal chart: the
    // coefficient is -g11 pointwise
    let conf = |x1: f64, x2: f64| {
        let r2 = x1 * x1 + x2 * x2;
        4.0 / ((1.0 + r2) * (1.0 + r2))
    };
    let utb = OneFormField::unbounded(
        3,
        Arc::new(move |p: &[f64]| {
            let g = conf(p[0], p[1]).sqrt();
            vec![g * p[2].cos(), g * p[2].sin(), 0.0]
        }),
    );
    let mut worst = 0.0f64;
    for s in &samples {
        let coeff = wedge_coefficient_3d(&utb, s, h).unwrap();
        worst = worst.max((coeff + conf(s[0], s[1])).abs());
    }
    println!("unit-cotangent isothermal form: |coefficient + sqrt(g11 g22)| <= {worst:.3e}");

    let flat = DistributionFrame::new(
        3,
        2,
        Arc::new(|_: &[f64]| vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]),
    );
    let contact_kernel = DistributionFrame::new(
        3,
        2,
        Arc::new(|p: &[f64]| vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, -p[0]]]),
    );
    let small = grid(4);
    println!(
        "Frobenius residual, integrable frame:     {:.3e}",
        frobenius_check(&flat, &small, h).unwrap()
    );
    println!(
        "Frobenius residual, contact kernel frame: {:.3}",
        frobenius_check(&contact_kernel, &small, h).unwrap()
    );
}
