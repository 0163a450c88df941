//! Recovery of a Lorentz metric at a point from sampled null directions: the
//! unique symmetric matrix with `|det| = 1` and signature `(2, 1)` whose cone
//! contains the samples.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use thiserror::Error;

use crate::metric::TangentVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("need at least 5 pairwise independent null directions, got {0} (rank {1})")]
    DegenerateCone(usize, usize),
    #[error("samples do not lie on a common quadric cone (worst residual {0})")]
    NotACone(f64),
    #[error("recovered quadric has eigenvalue signs {0:?}, not a Lorentz cone")]
    NotLorentz([f64; 3]),
}

/// A symmetric 3x3 quadric with `|det| = 1` and eigenvalue signs `(+, +, -)`;
/// its zero set is the null cone of a Lorentz metric normalized to
/// determinant -1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeQuadric {
    g: Matrix3<f64>,
}

impl ConeQuadric {
    /// Validates the normalization and the signature.
    pub fn new(g: Matrix3<f64>) -> Result<Self, ConeError> {
        let det: f64 = g.determinant();
        if (det.abs() - 1.0).abs() > 1e-10 {
            return Err(ConeError::NotACone((det.abs() - 1.0).abs()));
        }
        let eig = SymmetricEigen::new(g);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !(ev[0] < 0.0 && ev[1] > 0.0 && ev[2] > 0.0) {
            return Err(ConeError::NotLorentz([ev[0], ev[1], ev[2]]));
        }
        Ok(Self { g })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.g
    }

    /// `v^T G v`.
    pub fn evaluate(&self, v: &TangentVector) -> f64 {
        let w = nalgebra::Vector3::new(v.v1, v.v2, v.v3);
        (w.transpose() * self.g * w)[0]
    }

    /// `n` equally spaced directions on the future hemicone, computed from
    /// the eigendecomposition and polished onto the quadric by Newton steps
    /// (the eigensolver alone degrades when eigenvalues cluster).
    pub fn sample_directions(&self, n: usize) -> Vec<TangentVector> {
        let eig = SymmetricEigen::new(self.g);
        // sort eigenpairs: two positive first, negative last
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap()
        });
        let (l1, l2, l3) = (
            eig.eigenvalues[idx[0]],
            eig.eigenvalues[idx[1]],
            eig.eigenvalues[idx[2]],
        );
        let (q1, q2, q3) = (
            eig.eigenvectors.column(idx[0]).into_owned(),
            eig.eigenvectors.column(idx[1]).into_owned(),
            eig.eigenvectors.column(idx[2]).into_owned(),
        );
        (0..n)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / n as f64;
                let mut v = q1 * (theta.cos() / l1.sqrt())
                    + q2 * (theta.sin() / l2.sqrt())
                    + q3 * (1.0 / (-l3).sqrt());
                for _ in 0..3 {
                    let grad = self.g * v;
                    let f = v.dot(&grad);
                    let g2 = grad.norm_squared();
                    if g2 < 1e-30 {
                        break;
                    }
                    v -= grad * (f / (2.0 * g2));
                }
                TangentVector::new(v[0], v[1], v[2])
            })
            .collect()
    }
}

/// Fits the null cone through `samples`: solves the homogeneous system
/// `v^T G v = 0` for the six symmetric coefficients by SVD null space,
/// rescales to `|det G| = 1`, and fixes the overall sign so the signature is
/// `(2, 1)`.
pub fn metric_from_cone(samples: &[TangentVector]) -> Result<ConeQuadric, ConeError> {
    if samples.len() < 5 {
        return Err(ConeError::DegenerateCone(samples.len(), 0));
    }
    let mut rows = DMatrix::zeros(samples.len(), 6);
    for (r, v) in samples.iter().enumerate() {
        let raw = [
            v.v1 * v.v1,
            v.v2 * v.v2,
            v.v3 * v.v3,
            2.0 * v.v1 * v.v2,
            2.0 * v.v1 * v.v3,
            2.0 * v.v2 * v.v3,
        ];
        let scale = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        if scale < 1e-300 {
            return Err(ConeError::DegenerateCone(samples.len(), 0));
        }
        for (c, val) in raw.iter().enumerate() {
            rows[(r, c)] = val / scale;
        }
    }

    let svd = rows.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // a nondegenerate cone determines the coefficients up to scale: exactly
    // five independent constraints
    let rank = sv.iter().filter(|&&s| s > 1e-8 * sv[0]).count();
    if rank < 5 {
        return Err(ConeError::DegenerateCone(samples.len(), rank));
    }
    let vt = svd.v_t.as_ref().expect("svd with v requested");
    let coeffs = vt.row(vt.nrows() - 1);

    let g_raw = Matrix3::new(
        coeffs[0], coeffs[3], coeffs[4],
        coeffs[3], coeffs[1], coeffs[5],
        coeffs[4], coeffs[5], coeffs[2],
    );
    let det: f64 = g_raw.determinant();
    if det.abs() < 1e-12 {
        return Err(ConeError::DegenerateCone(samples.len(), rank));
    }
    let mut g = g_raw / det.abs().cbrt();

    let eig = SymmetricEigen::new(g);
    let pos = eig.eigenvalues.iter().filter(|&&e| e > 0.0).count();
    match pos {
        2 => {}
        1 => g = -g,
        _ => {
            let mut ev = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Err(ConeError::NotLorentz(ev));
        }
    }

    let quadric = ConeQuadric::new(g)?;
    let mut worst = 0.0f64;
    for v in samples {
        let n2 = v.v1 * v.v1 + v.v2 * v.v2 + v.v3 * v.v3;
        worst = worst.max(quadric.evaluate(v).abs() / n2.max(1e-300));
    }
    if worst > 1e-9 {
        return Err(ConeError::NotACone(worst));
    }
    Ok(quadric)
}
