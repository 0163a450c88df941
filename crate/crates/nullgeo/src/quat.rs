//! Quaternion algebra, the double covers of the unit tangent bundle of the
//! 2-sphere, the family of Hopf fibrations, and cyclic lens-space actions.
//!
//! Pure imaginary quaternions are identified with `R^3` throughout, so the
//! sphere of unit imaginaries plays the role of `S^2` and orthogonal unit
//! pairs `(u, v)` play the role of points of `ST S^2`.

use std::f64::consts::{FRAC_PI_2, TAU};

use thiserror::Error;

/// Tolerance for unit-norm and orthogonality validation.
pub const QUAT_EPS: f64 = 1e-12;

/// Inner products within `1 - COLINEAR_TOL` of `+-1` are treated as colinear
/// when inverting the double cover; arccos is badly conditioned there.
const COLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuatError {
    #[error("axis is not unit length (|v| = {0})")]
    NotUnitAxis(f64),
    #[error("frame vectors are not orthogonal (<u,v> = {0})")]
    NotOrthogonal(f64),
    #[error("cyclic group order must be positive")]
    InvalidOrder,
}

/// A quaternion `w + x i + y j + z k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn one() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub const fn i() -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0)
    }

    pub const fn j() -> Self {
        Self::new(0.0, 0.0, 1.0, 0.0)
    }

    pub const fn k() -> Self {
        Self::new(0.0, 0.0, 0.0, 1.0)
    }

    /// Embed a vector of `R^3` as a pure imaginary quaternion.
    pub const fn pure(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inverse(self) -> Self {
        let n2 = self.norm_sq();
        let c = self.conjugate();
        Self::new(c.w / n2, c.x / n2, c.y / n2, c.z / n2)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.w, s * self.x, s * self.y, s * self.z)
    }

    pub fn normalize(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn imag(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Euclidean distance in `R^4`.
    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self, o)
    }
}

/// Hamilton product.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

/// Cross product on pure imaginaries, `u x v = (uv - vu)/2`.
pub fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Inner product on pure imaginaries, `<u,v> = -(uv + vu)/2`; agrees with the
/// Euclidean dot product.
pub fn inner(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm3(v: [f64; 3]) -> f64 {
    inner(v, v).sqrt()
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// A unit-length pure imaginary quaternion; a point of `S^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitImaginary {
    v: [f64; 3],
}

impl UnitImaginary {
    /// Validates unit length to within [`QUAT_EPS`].
    pub fn new(v: [f64; 3]) -> Result<Self, QuatError> {
        let n = norm3(v);
        if (n - 1.0).abs() > QUAT_EPS {
            return Err(QuatError::NotUnitAxis(n));
        }
        Ok(Self { v })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self, QuatError> {
        let n = norm3(v);
        if n < 1e-14 {
            return Err(QuatError::NotUnitAxis(n));
        }
        Ok(Self {
            v: [v[0] / n, v[1] / n, v[2] / n],
        })
    }

    pub fn components(self) -> [f64; 3] {
        self.v
    }

    pub fn as_quaternion(self) -> Quaternion {
        Quaternion::pure(self.v)
    }
}

/// An orthogonal pair of unit imaginaries; a point of `ST S^2` in the
/// quaternionic picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePair {
    pub u: UnitImaginary,
    pub v: UnitImaginary,
}

impl FramePair {
    pub fn new(u: UnitImaginary, v: UnitImaginary) -> Result<Self, QuatError> {
        let d = inner(u.components(), v.components());
        if d.abs() > QUAT_EPS {
            return Err(QuatError::NotOrthogonal(d));
        }
        Ok(Self { u, v })
    }

    /// The pair `(j, k)`, the reference frame used for the lens-space descent.
    pub fn jk() -> Self {
        Self {
            u: UnitImaginary { v: [0.0, 1.0, 0.0] },
            v: UnitImaginary { v: [0.0, 0.0, 1.0] },
        }
    }

    /// `u x v`, the axis of the fibration the pair sits over.
    pub fn normal(self) -> UnitImaginary {
        UnitImaginary {
            v: cross(self.u.components(), self.v.components()),
        }
    }

    /// Componentwise max-norm distance in `R^6`.
    pub fn distance_max(self, o: FramePair) -> f64 {
        let du = sub3(self.u.components(), o.u.components());
        let dv = sub3(self.v.components(), o.v.components());
        du.iter()
            .chain(dv.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Euclidean distance in `R^6`.
    pub fn distance(self, o: FramePair) -> f64 {
        let du = sub3(self.u.components(), o.u.components());
        let dv = sub3(self.v.components(), o.v.components());
        (inner(du, du) + inner(dv, dv)).sqrt()
    }

    /// Orthonormality defect: worst deviation of `|u|`, `|v|` from 1 and of
    /// `<u,v>` from 0.
    pub fn defect(self) -> f64 {
        let u = self.u.components();
        let v = self.v.components();
        (inner(u, u) - 1.0)
            .abs()
            .max((inner(v, v) - 1.0).abs())
            .max(inner(u, v).abs())
    }

    fn unchecked(u: [f64; 3], v: [f64; 3]) -> Self {
        Self {
            u: UnitImaginary { v: u },
            v: UnitImaginary { v },
        }
    }
}

/// `e^{alpha z} = cos(alpha) + z sin(alpha)` for a unit imaginary axis `z`.
pub fn exp_pure(alpha: f64, z: UnitImaginary) -> Quaternion {
    let (s, c) = alpha.sin_cos();
    let a = z.components();
    Quaternion::new(c, s * a[0], s * a[1], s * a[2])
}

/// Conjugation `s r s^{-1}` of a pure imaginary `r` by a unit quaternion `s`,
/// i.e. the rotation of `R^3` that `s` represents.
pub fn rotate(s: Quaternion, r: [f64; 3]) -> [f64; 3] {
    (s * Quaternion::pure(r) * s.inverse()).imag()
}

/// The double cover `q -> (q u q^{-1}, q v q^{-1})` of `ST S^2` by the unit
/// quaternions. Exactly even: `phi(-q, f) == phi(q, f)` bitwise.
pub fn phi(q: Quaternion, frame: &FramePair) -> FramePair {
    let fu = rotate(q, frame.u.components());
    let fv = rotate(q, frame.v.components());
    debug_assert!(FramePair::unchecked(fu, fv).defect() < 1e-9);
    FramePair::unchecked(fu, fv)
}

/// Canonical representative of `{q, -q}`: nonnegative real part, ties broken
/// by the first nonzero imaginary component positive in `(x, y, z)` order.
pub fn canonical_sign(q: Quaternion) -> Quaternion {
    if q.w > 0.0 {
        return q;
    }
    if q.w < 0.0 {
        return -q;
    }
    for c in [q.x, q.y, q.z] {
        if c > 0.0 {
            return q;
        }
        if c < 0.0 {
            return -q;
        }
    }
    q
}

/// Rotation taking `from` to `to`, following the constructive branches of the
/// double-cover surjectivity proof: identity if already aligned, a half-turn
/// about `fallback_axis` if anti-aligned, otherwise the half-angle rotation
/// about `from x to`.
fn aligning_rotation(
    from: [f64; 3],
    to: [f64; 3],
    fallback_axis: [f64; 3],
) -> Quaternion {
    let d = inner(from, to);
    if d > 1.0 - COLINEAR_TOL {
        Quaternion::one()
    } else if d < -(1.0 - COLINEAR_TOL) {
        exp_pure(
            FRAC_PI_2,
            UnitImaginary::normalized(fallback_axis).expect("degenerate fallback axis"),
        )
    } else {
        let theta = d.clamp(-1.0, 1.0).acos();
        let axis = UnitImaginary::normalized(cross(from, to)).expect("colinear untrapped");
        exp_pure(theta / 2.0, axis)
    }
}

/// Inverse of the double cover: a unit quaternion mapping `frame` to `target`
/// under [`phi`], canonicalized by [`canonical_sign`]. Both preimages are
/// `+-` the returned value.
pub fn phi_inverse(target: &FramePair, frame: &FramePair) -> Quaternion {
    let u = frame.u.components();
    let v = frame.v.components();
    let w = target.u.components();
    let z = target.v.components();

    // First align u with w; when w = -u the half-turn axis is z (which is
    // orthogonal to both).
    let q1 = aligning_rotation(u, w, z);
    // Then align the image of v with z by a rotation fixing w; when
    // anti-aligned the half-turn axis is w itself.
    let v1 = rotate(q1, v);
    let q2 = aligning_rotation(v1, z, w);

    canonical_sign((q2 * q1).normalize())
}

/// The Hopf fibration `tau_w(q) = q w q^{-1}` associated with the unit
/// imaginary `w`. Constant on fibers `q e^{theta w}`.
pub fn hopf(q: Quaternion, w: UnitImaginary) -> UnitImaginary {
    UnitImaginary {
        v: rotate(q, w.components()),
    }
}

/// Residual of the commuting diagram `f . phi = tau_{u x v}`: the Euclidean
/// distance between `phi(q).u x phi(q).v` and `hopf(q, u x v)`.
pub fn hopf_commutes(q: Quaternion, frame: &FramePair) -> f64 {
    let through_phi = phi(q, frame).normal();
    let direct = hopf(q, frame.normal());
    norm3(sub3(through_phi.components(), direct.components()))
}

/// Generator `q -> q e^{2 pi i / p}` of the cyclic action on the unit
/// quaternions whose quotient is the lens space `L(p, p-1)`.
#[derive(Debug, Clone, Copy)]
pub struct LensGenerator {
    step: Quaternion,
    order: u32,
}

impl LensGenerator {
    pub fn new(p: u32) -> Result<Self, QuatError> {
        if p == 0 {
            return Err(QuatError::InvalidOrder);
        }
        Ok(Self {
            step: exp_pure(TAU / f64::from(p), UnitImaginary { v: [1.0, 0.0, 0.0] }),
            order: p,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn apply(&self, q: Quaternion) -> Quaternion {
        q * self.step
    }

    /// The whole orbit `q, q g, ..., q g^{p-1}`.
    pub fn orbit(&self, q: Quaternion) -> Vec<Quaternion> {
        let mut out = Vec::with_capacity(self.order as usize);
        let mut cur = q;
        for _ in 0..self.order {
            out.push(cur);
            cur = self.apply(cur);
        }
        out
    }
}

/// Residual of the descent of the order-`2c` lens action to the order-`c`
/// block rotation on `ST S^2`: compares `phi(q e^{pi i / c})` against the
/// rotation matrix applied to `phi(q)`, in the reference frame `(j, k)`.
/// Returns the max component difference.
pub fn lens_descends(q: Quaternion, c: u32) -> Result<f64, QuatError> {
    if c == 0 {
        return Err(QuatError::InvalidOrder);
    }
    let frame = FramePair::jk();
    let half_step = exp_pure(
        std::f64::consts::PI / f64::from(c),
        UnitImaginary { v: [1.0, 0.0, 0.0] },
    );
    let lhs = phi(q * half_step, &frame);

    let (uu, vv) = {
        let p = phi(q, &frame);
        (p.u.components(), p.v.components())
    };
    let (s, co) = (TAU / f64::from(c)).sin_cos();
    let rot_u = [
        co * uu[0] + s * vv[0],
        co * uu[1] + s * vv[1],
        co * uu[2] + s * vv[2],
    ];
    let rot_v = [
        -s * uu[0] + co * vv[0],
        -s * uu[1] + co * vv[1],
        -s * uu[2] + co * vv[2],
    ];
    Ok(lhs.distance_max(FramePair::unchecked(rot_u, rot_v)))
}
