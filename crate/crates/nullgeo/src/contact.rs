//! Numerical contact and integrability checks for one-form fields and
//! distributions given as callables on a box chart.
//!
//! Exterior derivatives and Lie brackets are formed by central differences.
//! The bracket convention throughout is `[X, Y] = XY - YX`, so that
//! `d(alpha)(X, Y) = X alpha(Y) - Y alpha(X) - alpha([X, Y])`.

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("point within margin {0} of the domain boundary")]
    Margin(f64),
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("empty sample list")]
    NoSamples,
    #[error("frame is numerically degenerate (min singular value {0})")]
    DegenerateFrame(f64),
}

pub type FieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A one-form field `alpha` on a box in `R^dim`, evaluated as a covector of
/// components in the coordinate basis.
#[derive(Clone)]
pub struct OneFormField {
    pub dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    form: FieldFn,
}

impl OneFormField {
    pub fn new(dim: usize, lo: Vec<f64>, hi: Vec<f64>, form: FieldFn) -> Self {
        assert_eq!(lo.len(), dim);
        assert_eq!(hi.len(), dim);
        Self { dim, lo, hi, form }
    }

    /// A form on all of `R^dim` (no boundary margin checks ever fire).
    pub fn unbounded(dim: usize, form: FieldFn) -> Self {
        Self::new(dim, vec![f64::MIN; dim], vec![f64::MAX; dim], form)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.form)(x)
    }

    fn check_interior(&self, x: &[f64], margin: f64) -> Result<(), ContactError> {
        if x.len() != self.dim {
            return Err(ContactError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        for i in 0..self.dim {
            if x[i] - margin < self.lo[i] || x[i] + margin > self.hi[i] {
                return Err(ContactError::Margin(margin));
            }
        }
        Ok(())
    }
}

/// `(d alpha)_{ij} = d_i alpha_j - d_j alpha_i` by central differences;
/// antisymmetric exactly by construction.
pub fn exterior_d(alpha: &OneFormField, x: &[f64], h: f64) -> Result<DMatrix<f64>, ContactError> {
    alpha.check_interior(x, h)?;
    let n = alpha.dim;
    // jac[i][j] = d_i alpha_j
    let mut jac = DMatrix::zeros(n, n);
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    for i in 0..n {
        hi[i] = x[i] + h;
        lo[i] = x[i] - h;
        let fp = alpha.eval(&hi);
        let fm = alpha.eval(&lo);
        for j in 0..n {
            jac[(i, j)] = (fp[j] - fm[j]) / (2.0 * h);
        }
        hi[i] = x[i];
        lo[i] = x[i];
    }
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = jac[(i, j)] - jac[(j, i)];
            d[(i, j)] = v;
            d[(j, i)] = -v;
        }
    }
    Ok(d)
}

/// Report of a wedge-coefficient sweep: the minimum of `|coefficient|` over
/// the samples and where it was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeReport {
    pub min_abs: f64,
    pub argmin: Vec<f64>,
    pub n_samples: usize,
}

/// The coefficient of `alpha ^ d(alpha)` against `dx1 ^ dx2 ^ dx3` at `x`.
pub fn wedge_coefficient_3d(
    alpha: &OneFormField,
    x: &[f64],
    h: f64,
) -> Result<f64, ContactError> {
    if alpha.dim != 3 {
        return Err(ContactError::Dimension {
            expected: 3,
            got: alpha.dim,
        });
    }
    let a = alpha.eval(x);
    let d = exterior_d(alpha, x, h)?;
    Ok(a[0] * d[(1, 2)] - a[1] * d[(0, 2)] + a[2] * d[(0, 1)])
}

/// Evaluates the 3-form coefficient of `alpha ^ d(alpha)` at every sample and
/// reports the minimum absolute value: zero means integrable, bounded away
/// from zero means contact.
pub fn contact_condition_3d(
    alpha: &OneFormField,
    samples: &[Vec<f64>],
    h: f64,
) -> Result<WedgeReport, ContactError> {
    if samples.is_empty() {
        return Err(ContactError::NoSamples);
    }
    let mut min_abs = f64::INFINITY;
    let mut argmin = samples[0].clone();
    for s in samples {
        let c = wedge_coefficient_3d(alpha, s, h)?.abs();
        if c < min_abs {
            min_abs = c;
            argmin = s.clone();
        }
    }
    Ok(WedgeReport {
        min_abs,
        argmin,
        n_samples: samples.len(),
    })
}

/// `[X, Y] = (DY) X - (DX) Y` with central-difference Jacobians; exact to
/// roundoff for linear fields.
pub fn lie_bracket_numeric(
    x_field: &dyn Fn(&[f64]) -> Vec<f64>,
    y_field: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    h: f64,
) -> Vec<f64> {
    let n = x.len();
    let xv = x_field(x);
    let yv = y_field(x);
    let mut out = vec![0.0; n];
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    for j in 0..n {
        hi[j] = x[j] + h;
        lo[j] = x[j] - h;
        let yp = y_field(&hi);
        let ym = y_field(&lo);
        let xp = x_field(&hi);
        let xm = x_field(&lo);
        for i in 0..n {
            // (d_j Y_i) X_j - (d_j X_i) Y_j
            out[i] += (yp[i] - ym[i]) / (2.0 * h) * xv[j] - (xp[i] - xm[i]) / (2.0 * h) * yv[j];
        }
        hi[j] = x[j];
        lo[j] = x[j];
    }
    out
}

/// A rank-`rank` distribution on a box in `R^dim`, given by a spanning frame
/// callable.
#[derive(Clone)]
pub struct DistributionFrame {
    pub dim: usize,
    pub rank: usize,
    frame: Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>,
}

impl DistributionFrame {
    pub fn new(
        dim: usize,
        rank: usize,
        frame: Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>,
    ) -> Self {
        Self { dim, rank, frame }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (self.frame)(x)
    }
}

/// Norm of the component of `v` orthogonal to the span of `basis` (columns
/// orthonormalized internally). Errors if the basis is numerically rank
/// deficient.
pub fn off_span_residual(basis: &[Vec<f64>], v: &[f64]) -> Result<f64, ContactError> {
    let n = v.len();
    let mat = DMatrix::from_fn(n, basis.len(), |r, c| basis[c][r]);
    let svd = mat.clone().svd(true, false);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if smin < 1e-8 {
        return Err(ContactError::DegenerateFrame(smin));
    }
    let q = svd.u.expect("u requested");
    let vv = DMatrix::from_column_slice(n, 1, v);
    let proj = &q * (q.transpose() * &vv);
    Ok((vv - proj).norm())
}

/// Largest principal angle (radians) between the subspaces spanned by `a`
/// and `b`, via the singular values of the product of their orthonormalized
/// bases. Both spans must have equal dimension.
pub fn max_principal_angle(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, ContactError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(ContactError::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a[0].len();
    let ortho = |cols: &[Vec<f64>]| -> Result<DMatrix<f64>, ContactError> {
        let mat = DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
        let svd = mat.svd(true, false);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if smin < 1e-10 {
            return Err(ContactError::DegenerateFrame(smin));
        }
        let u = svd.u.expect("u requested");
        Ok(u.columns(0, cols.len()).into_owned())
    };
    let qa = ortho(a)?;
    let qb = ortho(b)?;
    let prod = qa.transpose() * qb;
    let sv = prod.svd(false, false).singular_values;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(smin.clamp(-1.0, 1.0).acos())
}

/// Frobenius integrability residual: for every sample and every frame pair,
/// the numerical bracket is projected off the frame span; the max residual is
/// returned. Zero (to tolerance) means involutive, large means
/// non-integrable.
pub fn frobenius_check(
    d: &DistributionFrame,
    samples: &[Vec<f64>],
    h: f64,
) -> Result<f64, ContactError> {
    if samples.is_empty() {
        return Err(ContactError::NoSamples);
    }
    let mut worst = 0.0f64;
    for x in samples {
        if x.len() != d.dim {
            return Err(ContactError::Dimension {
                expected: d.dim,
                got: x.len(),
            });
        }
        let frame_here = d.eval(x);
        for a in 0..d.rank {
            for b in (a + 1)..d.rank {
                let fa = |p: &[f64]| d.eval(p)[a].clone();
                let fb = |p: &[f64]| d.eval(p)[b].clone();
                let br = lie_bracket_numeric(&fa, &fb, x, h);
                worst = worst.max(off_span_residual(&frame_here, &br)?);
            }
        }
    }
    Ok(worst)
}
