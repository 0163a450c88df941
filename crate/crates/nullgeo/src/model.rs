//! The worked model: null geodesics of the product of the round 2-sphere
//! with a time circle of circumference `2 pi / c`, the cyclic quotient of
//! `ST S^2` that realizes their space, skies, and the canonical contact
//! plane field.
//!
//! Everything is extrinsic: points of `ST S^2` are orthonormal pairs
//! `(x, u)` in `R^3 x R^3`, renormalized after every generic arithmetic
//! operation. Quarter-turn multiples of the cyclic action are applied as
//! exact sign/swap arithmetic so that orbits of order 1, 2 and 4 close
//! bitwise.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::contact::max_principal_angle;

/// Comparison tolerance of the lexicographic orbit representative.
const LEX_TOL: f64 = 1e-12;

/// Downstream parameter separating the two sky events of the plane checks.
pub const SKY_TAU: f64 = std::f64::consts::FRAC_PI_4;

/// Jump threshold for detecting a representative branch switch inside a
/// finite-difference stencil; smooth sky curves move at speed below 2.
const BRANCH_JUMP: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate data: |x| or the component of u orthogonal to x is numerically zero")]
    Degenerate,
    #[error("cyclic order must be positive")]
    InvalidOrder,
    #[error("representative switched lexicographic branch inside the stencil (jump {0})")]
    BranchSwitch(f64),
}

/// A point of `ST S^2`: a unit base point and a unit tangent direction,
/// orthogonal to it. The constructor renormalizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent {
    x: Vector3<f64>,
    u: Vector3<f64>,
}

impl UnitTangent {
    /// Projects `x` to the sphere and Gram-Schmidts `u` against it.
    pub fn new(x: Vector3<f64>, u: Vector3<f64>) -> Result<Self, ModelError> {
        let xn = x.norm();
        if xn < 1e-12 {
            return Err(ModelError::Degenerate);
        }
        let x = x / xn;
        let u_perp = u - x * x.dot(&u);
        let un = u_perp.norm();
        if un < 1e-9 {
            return Err(ModelError::Degenerate);
        }
        Ok(Self { x, u: u_perp / un })
    }

    const fn unchecked(x: Vector3<f64>, u: Vector3<f64>) -> Self {
        Self { x, u }
    }

    pub fn x(&self) -> Vector3<f64> {
        self.x
    }

    pub fn u(&self) -> Vector3<f64> {
        self.u
    }

    /// `x cross u`, the axis of the great circle the pair generates.
    pub fn normal(&self) -> Vector3<f64> {
        self.x.cross(&self.u)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.x[0], self.x[1], self.x[2], self.u[0], self.u[1], self.u[2],
        ]
    }

    /// Worst deviation from the three defining constraints.
    pub fn defect(&self) -> f64 {
        (self.x.norm_squared() - 1.0)
            .abs()
            .max((self.u.norm_squared() - 1.0).abs())
            .max(self.x.dot(&self.u).abs())
    }

    /// Euclidean distance in `R^6`.
    pub fn distance(&self, o: &UnitTangent) -> f64 {
        ((self.x - o.x).norm_squared() + (self.u - o.u).norm_squared()).sqrt()
    }

    /// Interprets an orthogonal pair of unit imaginaries as a point of
    /// `ST S^2`.
    pub fn from_frame_pair(f: &crate::quat::FramePair) -> Result<Self, ModelError> {
        let u = f.u.components();
        let v = f.v.components();
        Self::new(
            Vector3::new(u[0], u[1], u[2]),
            Vector3::new(v[0], v[1], v[2]),
        )
    }
}

/// An event of the spacetime: a point of the sphere and a time angle reduced
/// mod `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventPoint {
    x: Vector3<f64>,
    t: f64,
}

impl EventPoint {
    pub fn new(x: Vector3<f64>, t: f64) -> Result<Self, ModelError> {
        let xn = x.norm();
        if xn < 1e-12 {
            return Err(ModelError::Degenerate);
        }
        Ok(Self {
            x: x / xn,
            t: t.rem_euclid(TAU),
        })
    }

    pub fn x(&self) -> Vector3<f64> {
        self.x
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// An unparametrized null geodesic, stored as the lexicographically smallest
/// element of its cyclic orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullGeodesicClass {
    rep: UnitTangent,
    c: u32,
}

impl NullGeodesicClass {
    pub fn rep(&self) -> UnitTangent {
        self.rep
    }

    pub fn order(&self) -> u32 {
        self.c
    }

    pub fn distance(&self, o: &NullGeodesicClass) -> f64 {
        self.rep.distance(&o.rep)
    }
}

/// An extrinsic tangent vector of `ST S^2` at `(x, u)`: the linearized
/// constraints are `<x,a> = 0`, `<u,b> = 0`, `<x,b> + <u,a> = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentToSTS2 {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
}

impl TangentToSTS2 {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.a[0], self.a[1], self.a[2], self.b[0], self.b[1], self.b[2],
        ]
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_squared() + self.b.norm_squared()).sqrt()
    }

    /// Worst violation of the three linearized constraints at `base`.
    pub fn constraint_residual(&self, base: &UnitTangent) -> f64 {
        base.x()
            .dot(&self.a)
            .abs()
            .max(base.u().dot(&self.b).abs())
            .max((base.x().dot(&self.b) + base.u().dot(&self.a)).abs())
    }
}

/// `gamma(t) = x cos t + u sin t`, the arc-length great circle generated by
/// the pair.
pub fn great_circle(p: &UnitTangent, t: f64) -> Vector3<f64> {
    let (s, c) = t.sin_cos();
    p.x() * c + p.u() * s
}

/// Velocity of [`great_circle`] at `t`.
pub fn great_circle_velocity(p: &UnitTangent, t: f64) -> Vector3<f64> {
    let (s, c) = t.sin_cos();
    -p.x() * s + p.u() * c
}

/// The null geodesic determined by `p` at parameter `s`: the great circle in
/// space, time advancing at rate `c`.
pub fn null_geodesic(p: &UnitTangent, c: u32, s: f64) -> EventPoint {
    EventPoint {
        x: great_circle(p, s),
        t: (f64::from(c) * s).rem_euclid(TAU),
    }
}

/// The generator-power `j` of the cyclic action of order `c`: the block
/// rotation of `(x, u)` by `2 pi j / c`. Quarter-turn multiples are exact.
pub fn zc_action(p: &UnitTangent, c: u32, j: i64) -> Result<UnitTangent, ModelError> {
    if c == 0 {
        return Err(ModelError::InvalidOrder);
    }
    let jr = j.rem_euclid(i64::from(c)) as u32;
    if jr == 0 {
        return Ok(*p);
    }
    // exact sign/swap arithmetic at quarter turns
    if 4 * jr == c {
        return Ok(UnitTangent::unchecked(p.u, -p.x));
    }
    if 2 * jr == c {
        return Ok(UnitTangent::unchecked(-p.x, -p.u));
    }
    if 4 * jr == 3 * c {
        return Ok(UnitTangent::unchecked(-p.u, p.x));
    }
    let angle = TAU * f64::from(jr) / f64::from(c);
    let (s, co) = angle.sin_cos();
    UnitTangent::new(p.x * co + p.u * s, -p.x * s + p.u * co)
}

/// All `c` images of `p` under the cyclic action, `j = 0 .. c-1`.
pub fn orbit(p: &UnitTangent, c: u32) -> Result<Vec<UnitTangent>, ModelError> {
    (0..i64::from(c)).map(|j| zc_action(p, c, j)).collect()
}

fn lex_less(a: &[f64; 6], b: &[f64; 6]) -> bool {
    for i in 0..6 {
        if (a[i] - b[i]).abs() <= LEX_TOL {
            continue;
        }
        return a[i] < b[i];
    }
    false
}

/// The canonical representative of the orbit of `p`: lexicographically
/// smallest element under componentwise comparison with tolerance
/// [`LEX_TOL`], ties resolved toward the smaller generator power.
pub fn canonical_class(p: &UnitTangent, c: u32) -> Result<NullGeodesicClass, ModelError> {
    if c == 0 {
        return Err(ModelError::InvalidOrder);
    }
    let mut best = *p;
    let mut best_arr = p.as_array();
    for j in 1..i64::from(c) {
        let e = zc_action(p, c, j)?;
        let arr = e.as_array();
        if lex_less(&arr, &best_arr) {
            best = e;
            best_arr = arr;
        }
    }
    Ok(NullGeodesicClass { rep: best, c })
}

/// The fixed orthonormal basis of the plane orthogonal to `x`: the two
/// standard axes least aligned with `x`, Gram-Schmidted in index order.
pub fn sky_basis(x: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let mut axes = [0usize, 1, 2];
    axes.sort_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap());
    let (a, b) = if axes[0] < axes[1] {
        (axes[0], axes[1])
    } else {
        (axes[1], axes[0])
    };
    let mut e1 = Vector3::zeros();
    e1[a] = 1.0;
    let mut e2 = Vector3::zeros();
    e2[b] = 1.0;
    let b1 = (e1 - x * x.dot(&e1)).normalize();
    let b2v = e2 - x * x.dot(&e2);
    let b2 = (b2v - b1 * b1.dot(&b2v)).normalize();
    (b1, b2)
}

/// Spatial direction at angle `theta` in the sky basis at `x`.
pub fn sky_direction(x: &Vector3<f64>, theta: f64) -> Vector3<f64> {
    let (b1, b2) = sky_basis(x);
    let (s, c) = theta.sin_cos();
    b1 * c + b2 * s
}

/// Angle of a unit direction `w` orthogonal to `x` in the sky basis at `x`.
pub fn sky_angle_of(x: &Vector3<f64>, w: &Vector3<f64>) -> f64 {
    let (b1, b2) = sky_basis(x);
    w.dot(&b2).atan2(w.dot(&b1))
}

/// The class of the null geodesic through the event `e` whose spatial
/// direction at `e` makes angle `theta` in the sky basis: the geodesic is
/// tracked back to its time-zero crossing and canonicalized.
pub fn sky(e: &EventPoint, c: u32, theta: f64) -> Result<NullGeodesicClass, ModelError> {
    if c == 0 {
        return Err(ModelError::InvalidOrder);
    }
    let w = sky_direction(&e.x, theta);
    let seed = UnitTangent::new(e.x, w)?;
    let s0 = -e.t / f64::from(c);
    let crossing = UnitTangent::new(great_circle(&seed, s0), great_circle_velocity(&seed, s0))?;
    canonical_class(&crossing, c)
}

/// Orthonormal frame of the canonical contact plane at `p`: with
/// `n = x cross u`, the plane is spanned by `(n, 0)` and `(0, n)` inside the
/// tangent space of `ST S^2`.
pub fn chi_plane(p: &UnitTangent) -> (TangentToSTS2, TangentToSTS2) {
    let n = p.normal();
    (
        TangentToSTS2 {
            a: n,
            b: Vector3::zeros(),
        },
        TangentToSTS2 {
            a: Vector3::zeros(),
            b: n,
        },
    )
}

/// Norm of the component of `t` off the contact plane at `p`.
pub fn off_chi_residual(p: &UnitTangent, t: &TangentToSTS2) -> f64 {
    let n = p.normal();
    let ca = t.a.dot(&n);
    let cb = t.b.dot(&n);
    ((t.a - n * ca).norm_squared() + (t.b - n * cb).norm_squared()).sqrt()
}

fn project_to_tangent(base: &UnitTangent, d: [f64; 6]) -> TangentToSTS2 {
    // orthogonal rows of the constraint matrix: (x,0), (0,u), (u,x)/sqrt(2)
    let x = base.x();
    let u = base.u();
    let mut a = Vector3::new(d[0], d[1], d[2]);
    let mut b = Vector3::new(d[3], d[4], d[5]);
    let c1 = x.dot(&a);
    a -= x * c1;
    let c2 = u.dot(&b);
    b -= u * c2;
    let c3 = (u.dot(&a) + x.dot(&b)) / 2.0;
    a -= u * c3;
    b -= x * c3;
    TangentToSTS2 { a, b }
}

/// Central-difference tangent of the sky curve `theta -> sky(e, c, theta)`
/// at its canonical representative. Errors if the representative jumps
/// lexicographic branch inside the stencil; retry with smaller `h` or a
/// shifted `theta`.
pub fn sky_tangent(
    e: &EventPoint,
    c: u32,
    theta: f64,
    h: f64,
) -> Result<TangentToSTS2, ModelError> {
    let r0 = sky(e, c, theta)?.rep();
    let rp = sky(e, c, theta + h)?.rep();
    let rm = sky(e, c, theta - h)?.rep();
    let jump = rp.distance(&r0).max(rm.distance(&r0));
    if jump > BRANCH_JUMP.max(100.0 * h) {
        return Err(ModelError::BranchSwitch(jump));
    }
    let ap = rp.as_array();
    let am = rm.as_array();
    let mut d = [0.0f64; 6];
    for (i, di) in d.iter_mut().enumerate() {
        *di = (ap[i] - am[i]) / (2.0 * h);
    }
    Ok(project_to_tangent(&r0, d))
}

/// Crossings of the time coordinate through zero along one spatial period of
/// the geodesic: root-finds `t(s) = 0 mod 2 pi` on `s` in `[0, 2 pi)` and
/// returns the crossing parameters' count together with the gaps between
/// consecutive crossings (wrapping around).
pub fn intersection_count(p: &UnitTangent, c: u32) -> Result<(usize, Vec<f64>), ModelError> {
    if c == 0 {
        return Err(ModelError::InvalidOrder);
    }
    // signed angular offset of the time coordinate, zero exactly at crossings
    let wrapped = |s: f64| {
        let t = null_geodesic(p, c, s).t;
        if t > PI {
            t - TAU
        } else {
            t
        }
    };
    let delta = PI / (2.0 * f64::from(c));
    let (lo, hi) = (-delta, TAU - delta);
    // the seam-jump filter needs c * step < pi, i.e. c < n/4
    let n = 1024usize;
    let step = (hi - lo) / n as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_s = lo;
    let mut prev_w = wrapped(lo);
    if prev_w == 0.0 {
        roots.push(prev_s);
    }
    for i in 1..=n {
        let s = lo + step * i as f64;
        let w = wrapped(s);
        if w == 0.0 {
            roots.push(s);
        } else if prev_w != 0.0 && (w - prev_w).abs() < PI && prev_w.signum() != w.signum() {
            // genuine sign change away from the wrap seam of the angle
            let (mut a, mut b) = (prev_s, s);
            let mut fa = prev_w;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = wrapped(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa.signum() != fm.signum() {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_s = s;
        prev_w = w;
    }
    let mut roots: Vec<f64> = roots
        .into_iter()
        .map(|r| {
            let r = r.rem_euclid(TAU);
            if r > TAU - 1e-9 {
                0.0
            } else {
                r
            }
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let gaps = if roots.len() < 2 {
        vec![TAU]
    } else {
        let mut g: Vec<f64> = roots.windows(2).map(|w| w[1] - w[0]).collect();
        g.push(roots[0] + TAU - roots[roots.len() - 1]);
        g
    };
    Ok((roots.len(), gaps))
}

fn random_unit_tangent(rng: &mut impl Rng) -> UnitTangent {
    loop {
        let x = Vector3::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        let u = Vector3::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        if x.norm() > 0.1 {
            if let Ok(p) = UnitTangent::new(x, u) {
                return p;
            }
        }
    }
}

/// Draws `n` seeded random points of `ST S^2`.
pub fn random_unit_tangents(n: usize, seed: u64) -> Vec<UnitTangent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_unit_tangent(&mut rng)).collect()
}

/// The two sky tangents of the class of `via` at its canonical
/// representative: one from the time-zero event of `via`, one from the event
/// `tau` downstream. Used with `via` ranging over a whole orbit to test that
/// the construction does not depend on the chart.
pub fn class_sky_tangents(
    via: &UnitTangent,
    c: u32,
    tau: f64,
    h: f64,
) -> Result<(TangentToSTS2, TangentToSTS2), ModelError> {
    let e_a = EventPoint::new(via.x(), 0.0)?;
    let theta_a = sky_angle_of(&via.x(), &via.u());
    let t_a = sky_tangent(&e_a, c, theta_a, h)?;

    let y = great_circle(via, tau);
    let e_b = EventPoint::new(y, f64::from(c) * tau)?;
    let wdir = great_circle_velocity(via, tau);
    let theta_b = sky_angle_of(&y, &wdir);
    let t_b = sky_tangent(&e_b, c, theta_b, h)?;
    Ok((t_a, t_b))
}

/// Worst-case residuals of one verification sweep of the contact structure
/// on the quotient space.
#[derive(Debug, Clone)]
pub struct ContactNcReport {
    pub c: u32,
    pub n_samples: usize,
    pub seed: u64,
    /// Worst component of a sky tangent off the contact plane.
    pub max_sky_residual: f64,
    /// Worst principal angle between the two-sky plane and the contact plane.
    pub max_plane_angle: f64,
    /// Worst disagreement across orbit charts (both the two-sky plane and the
    /// deck-transported contact plane).
    pub max_welldef_angle: f64,
    /// The five worst samples: representative coordinates and their combined
    /// residual.
    pub worst: Vec<([f64; 6], f64)>,
}

impl ContactNcReport {
    pub fn max_residual(&self) -> f64 {
        self.max_sky_residual
            .max(self.max_plane_angle)
            .max(self.max_welldef_angle)
    }
}

fn plane_of(t1: &TangentToSTS2, t2: &TangentToSTS2) -> Vec<Vec<f64>> {
    vec![t1.as_array().to_vec(), t2.as_array().to_vec()]
}

fn sky_tangents_retrying(
    via: &UnitTangent,
    c: u32,
    tau: f64,
) -> Result<(TangentToSTS2, TangentToSTS2), ModelError> {
    let mut err = ModelError::Degenerate;
    for h in [1e-4, 1e-5, 1e-6] {
        match class_sky_tangents(via, c, tau, h) {
            Ok(t) => return Ok(t),
            Err(e) => err = e,
        }
    }
    Err(err)
}

/// For `n_samples` seeded random geodesic classes, builds the contact plane
/// from two sky tangents and compares it with the pushed-forward canonical
/// plane, including the chart-independence comparison across orbit
/// representatives.
pub fn verify_contact_on_nc(
    c: u32,
    n_samples: usize,
    seed: u64,
) -> Result<ContactNcReport, ModelError> {
    if c == 0 {
        return Err(ModelError::InvalidOrder);
    }
    let points = random_unit_tangents(n_samples, seed);
    let mut report = ContactNcReport {
        c,
        n_samples,
        seed,
        max_sky_residual: 0.0,
        max_plane_angle: 0.0,
        max_welldef_angle: 0.0,
        worst: Vec::new(),
    };
    let mut scored: Vec<([f64; 6], f64)> = Vec::new();

    for p in &points {
        let rep = canonical_class(p, c)?.rep();
        let (t_a, t_b) = sky_tangents_retrying(&rep, c, SKY_TAU)?;
        let sky_res = off_chi_residual(&rep, &t_a).max(off_chi_residual(&rep, &t_b));

        let (q1, q2) = chi_plane(&rep);
        let chi = plane_of(&q1, &q2);
        let h_plane = plane_of(&t_a, &t_b);
        let angle = max_principal_angle(&h_plane, &chi).map_err(|_| ModelError::Degenerate)?;

        let mut welldef = 0.0f64;
        if c > 1 {
            let other = zc_action(&rep, c, 1)?;
            let (s_a, s_b) = sky_tangents_retrying(&other, c, SKY_TAU)?;
            let h_other = plane_of(&s_a, &s_b);
            welldef = max_principal_angle(&h_other, &h_plane)
                .map_err(|_| ModelError::Degenerate)?
                .max(max_principal_angle(&h_other, &chi).map_err(|_| ModelError::Degenerate)?);
            // the contact plane of the other chart, carried back through the
            // deck transformation (the inverse block rotation)
            let (o1, o2) = chi_plane(&other);
            let angle_back = -TAU / f64::from(c);
            let (s, co) = angle_back.sin_cos();
            let carry = |t: &TangentToSTS2| TangentToSTS2 {
                a: t.a * co + t.b * s,
                b: -t.a * s + t.b * co,
            };
            let chi_other = plane_of(&carry(&o1), &carry(&o2));
            welldef = welldef
                .max(max_principal_angle(&chi_other, &chi).map_err(|_| ModelError::Degenerate)?);
        }

        report.max_sky_residual = report.max_sky_residual.max(sky_res);
        report.max_plane_angle = report.max_plane_angle.max(angle);
        report.max_welldef_angle = report.max_welldef_angle.max(welldef);
        scored.push((rep.as_array(), sky_res.max(angle).max(welldef)));
    }

    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    scored.truncate(5);
    report.worst = scored;
    Ok(report)
}
