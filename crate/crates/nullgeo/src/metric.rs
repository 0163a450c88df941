//! Diagonal 3-metrics given as chart-component callables, their Christoffel
//! symbols, and the parametrization of the future null cone.
//!
//! A metric here is always a single diagonal chart with `g11, g22 > 0` and
//! `g33 < 0`; multi-chart objects are handled extrinsically by the callers.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Central-difference step used for metric partials when no analytic partial
/// is supplied, and as the default for all finite-difference verifiers.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("point ({0}, {1}, {2}) outside the chart domain")]
    OutsideDomain(f64, f64, f64),
    #[error("metric signature violated at ({x1}, {x2}, {x3}): g = ({g11}, {g22}, {g33})")]
    Signature {
        x1: f64,
        x2: f64,
        x3: f64,
        g11: f64,
        g22: f64,
        g33: f64,
    },
    #[error("integration step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("metric is not flagged separable")]
    NotSeparable,
}

/// A point of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl ChartPoint {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn coord(&self, i: usize) -> f64 {
        [self.x1, self.x2, self.x3][i]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn distance(&self, o: &ChartPoint) -> f64 {
        let d = [self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// A tangent vector in the coordinate frame of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl TangentVector {
    pub const fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Self { v1, v2, v3 }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> f64 {
        (self.v1 * self.v1 + self.v2 * self.v2 + self.v3 * self.v3).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.v1, s * self.v2, s * self.v3)
    }
}

/// An axis-aligned box in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl ChartBox {
    pub const fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &ChartPoint) -> bool {
        let a = p.as_array();
        (0..3).all(|i| a[i] >= self.min[i] && a[i] <= self.max[i])
    }

    /// Interior with margin `m` on every side.
    pub fn contains_with_margin(&self, p: &ChartPoint, m: f64) -> bool {
        let a = p.as_array();
        (0..3).all(|i| a[i] >= self.min[i] + m && a[i] <= self.max[i] - m)
    }
}

pub type ComponentFn = Arc<dyn Fn(&ChartPoint) -> f64 + Send + Sync>;

/// A diagonal metric on a single chart: three component callables with signs
/// `(+, +, -)`, optional analytic partials, a separability flag, and the
/// chart domain.
#[derive(Clone)]
pub struct DiagonalMetric {
    id: String,
    comps: [ComponentFn; 3],
    /// `partials[i][j]` is `d g_ii / d x_j`; entries left `None` fall back to
    /// central differences with [`FD_STEP`].
    partials: [[Option<ComponentFn>; 3]; 3],
    separable: bool,
    domain: ChartBox,
}

impl fmt::Debug for DiagonalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalMetric")
            .field("id", &self.id)
            .field("separable", &self.separable)
            .field("domain", &self.domain)
            .finish()
    }
}

const NO_PARTIALS: [[Option<ComponentFn>; 3]; 3] = [
    [None, None, None],
    [None, None, None],
    [None, None, None],
];

impl DiagonalMetric {
    pub fn new(
        id: impl Into<String>,
        comps: [ComponentFn; 3],
        separable: bool,
        domain: ChartBox,
    ) -> Self {
        Self {
            id: id.into(),
            comps,
            partials: NO_PARTIALS,
            separable,
            domain,
        }
    }

    pub fn with_partials(mut self, partials: [[Option<ComponentFn>; 3]; 3]) -> Self {
        self.partials = partials;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_separable(&self) -> bool {
        self.separable
    }

    pub fn domain(&self) -> &ChartBox {
        &self.domain
    }

    pub fn has_analytic_partial(&self, i: usize, j: usize) -> bool {
        self.partials[i][j].is_some()
    }

    /// `g_ii` at `p`, `i` in `0..3`.
    pub fn component(&self, i: usize, p: &ChartPoint) -> f64 {
        (self.comps[i])(p)
    }

    /// `d g_ii / d x_j` at `p`: analytic when supplied, otherwise central
    /// differences with step [`FD_STEP`].
    pub fn partial(&self, i: usize, j: usize, p: &ChartPoint) -> f64 {
        if let Some(f) = &self.partials[i][j] {
            return f(p);
        }
        let mut hi = p.as_array();
        let mut lo = p.as_array();
        hi[j] += FD_STEP;
        lo[j] -= FD_STEP;
        ((self.comps[i])(&ChartPoint::from_array(hi)) - (self.comps[i])(&ChartPoint::from_array(lo)))
            / (2.0 * FD_STEP)
    }

    /// Checks the domain and the `(+, +, -)` signs at `p`.
    pub fn check_point(&self, p: &ChartPoint) -> Result<[f64; 3], MetricError> {
        if !self.domain.contains(p) {
            return Err(MetricError::OutsideDomain(p.x1, p.x2, p.x3));
        }
        let g = [
            self.component(0, p),
            self.component(1, p),
            self.component(2, p),
        ];
        if g[0] <= 0.0 || g[1] <= 0.0 || g[2] >= 0.0 {
            return Err(MetricError::Signature {
                x1: p.x1,
                x2: p.x2,
                x3: p.x3,
                g11: g[0],
                g22: g[1],
                g33: g[2],
            });
        }
        Ok(g)
    }

    /// Flat metric `diag(1, 1, -1)` on a large box.
    pub fn minkowski3() -> Self {
        Self::constant_diag("minkowski3", 1.0, 1.0, -1.0)
    }

    /// Same as [`minkowski3`](Self::minkowski3) but without analytic partials,
    /// to exercise the finite-difference path.
    pub fn minkowski3_fd() -> Self {
        let comps: [ComponentFn; 3] = [
            Arc::new(|_: &ChartPoint| 1.0),
            Arc::new(|_: &ChartPoint| 1.0),
            Arc::new(|_: &ChartPoint| -1.0),
        ];
        Self::new(
            "minkowski3-fd",
            comps,
            true,
            ChartBox::new([-1e6; 3], [1e6; 3]),
        )
    }

    fn constant_diag(id: &str, a: f64, b: f64, c: f64) -> Self {
        let comps: [ComponentFn; 3] = [
            Arc::new(move |_: &ChartPoint| a),
            Arc::new(move |_: &ChartPoint| b),
            Arc::new(move |_: &ChartPoint| c),
        ];
        let zero: ComponentFn = Arc::new(|_: &ChartPoint| 0.0);
        let partials = std::array::from_fn(|_| std::array::from_fn(|_| Some(zero.clone())));
        Self::new(id, comps, true, ChartBox::new([-1e6; 3], [1e6; 3])).with_partials(partials)
    }

    /// Stereographic chart of the round 2-sphere crossed with a flat time
    /// line: `g11 = g22 = 4/(1 + x1^2 + x2^2)^2`, `g33 = -1`.
    pub fn round_sphere_chart() -> Self {
        Self::sphere_time_chart("round-sphere", 1)
    }

    /// Stereographic chart of `S^2 x S^1` with time scale `1/c`:
    /// `g11 = g22 = 4/(1 + r^2)^2`, `g33 = -1/c^2`. Covers the sphere minus
    /// one pole; the time circle is unrolled.
    pub fn s2s1_chart(c: u32) -> Self {
        Self::sphere_time_chart(&format!("s2s1:c={c}"), c)
    }

    fn sphere_time_chart(id: &str, c: u32) -> Self {
        let conf = |p: &ChartPoint| {
            let r2 = p.x1 * p.x1 + p.x2 * p.x2;
            4.0 / ((1.0 + r2) * (1.0 + r2))
        };
        // d/dx_a [4 (1+r^2)^-2] = -16 x_a / (1+r^2)^3
        let dconf = move |p: &ChartPoint, a: usize| {
            let r2 = p.x1 * p.x1 + p.x2 * p.x2;
            let xa = if a == 0 { p.x1 } else { p.x2 };
            -16.0 * xa / ((1.0 + r2) * (1.0 + r2) * (1.0 + r2))
        };
        let g33 = -1.0 / f64::from(c * c);
        let comps: [ComponentFn; 3] = [
            Arc::new(conf),
            Arc::new(conf),
            Arc::new(move |_: &ChartPoint| g33),
        ];
        let zero: ComponentFn = Arc::new(|_: &ChartPoint| 0.0);
        let partials: [[Option<ComponentFn>; 3]; 3] = [
            [
                Some(Arc::new(move |p: &ChartPoint| dconf(p, 0))),
                Some(Arc::new(move |p: &ChartPoint| dconf(p, 1))),
                Some(zero.clone()),
            ],
            [
                Some(Arc::new(move |p: &ChartPoint| dconf(p, 0))),
                Some(Arc::new(move |p: &ChartPoint| dconf(p, 1))),
                Some(zero.clone()),
            ],
            [Some(zero.clone()), Some(zero.clone()), Some(zero)],
        ];
        Self::new(
            id,
            comps,
            true,
            ChartBox::new([-8.0, -8.0, -1e6], [8.0, 8.0, 1e6]),
        )
        .with_partials(partials)
    }

    /// Separable test metric with a varying time component: the stereographic
    /// sphere in space, `g33 = -(1 + 0.3 cos x3)` in time.
    pub fn warped_chart() -> Self {
        let base = Self::sphere_time_chart("warped", 1);
        let comps: [ComponentFn; 3] = [
            base.comps[0].clone(),
            base.comps[1].clone(),
            Arc::new(|p: &ChartPoint| -(1.0 + 0.3 * p.x3.cos())),
        ];
        let zero: ComponentFn = Arc::new(|_: &ChartPoint| 0.0);
        let mut partials = base.partials.clone();
        partials[2] = [
            Some(zero.clone()),
            Some(zero),
            Some(Arc::new(|p: &ChartPoint| 0.3 * p.x3.sin())),
        ];
        Self::new("warped", comps, true, base.domain).with_partials(partials)
    }
}

/// Christoffel symbols `G[k][i][j]` of the Levi-Civita connection at a point,
/// symmetric in `(i, j)` exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelTensor {
    pub g: [[[f64; 3]; 3]; 3],
}

impl ChristoffelTensor {
    pub fn max_abs(&self) -> f64 {
        self.g
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// Christoffel symbols of a diagonal metric,
/// `G^k_ij = g^{kk} (d_i g_jk + d_j g_ik - d_k g_ij) / 2`
/// with the diagonal inverse `g^{kk} = 1/g_kk`.
pub fn christoffel(m: &DiagonalMetric, p: &ChartPoint) -> Result<ChristoffelTensor, MetricError> {
    let g = m.check_point(p)?;
    // cache d g_ii / d x_j
    let mut dg = [[0.0f64; 3]; 3];
    for (i, row) in dg.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = m.partial(i, j, p);
        }
    }
    let mut out = [[[0.0f64; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..=i {
                let t1 = if j == k { dg[k][i] } else { 0.0 };
                let t2 = if i == k { dg[k][j] } else { 0.0 };
                let t3 = if i == j { dg[i][k] } else { 0.0 };
                let val = (t1 + t2 - t3) / (2.0 * g[k]);
                out[k][i][j] = val;
                out[k][j][i] = val;
            }
        }
    }
    Ok(ChristoffelTensor { g: out })
}

/// `g(v, v) = g11 v1^2 + g22 v2^2 + g33 v3^2`.
pub fn norm_sq(m: &DiagonalMetric, p: &ChartPoint, v: &TangentVector) -> Result<f64, MetricError> {
    let g = m.check_point(p)?;
    Ok(g[0] * v.v1 * v.v1 + g[1] * v.v2 * v.v2 + g[2] * v.v3 * v.v3)
}

/// The future null direction at angle `theta`,
/// `(cos(theta)/sqrt(g11), sin(theta)/sqrt(g22), 1/sqrt(-g33))`.
pub fn null_cone_vector(
    m: &DiagonalMetric,
    p: &ChartPoint,
    theta: f64,
) -> Result<TangentVector, MetricError> {
    let g = m.check_point(p)?;
    let (s, c) = theta.sin_cos();
    Ok(TangentVector::new(
        c / g[0].sqrt(),
        s / g[1].sqrt(),
        1.0 / (-g[2]).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: the full Christoffel formula with a matrix-free
    /// diagonal inverse and explicit central-difference partials of the raw
    /// component callables.
    fn christoffel_fd_oracle(m: &DiagonalMetric, p: &ChartPoint, h: f64) -> [[[f64; 3]; 3]; 3] {
        let comp = |i: usize, q: [f64; 3]| m.component(i, &ChartPoint::from_array(q));
        let dg = |i: usize, j: usize| {
            let mut hi = p.as_array();
            let mut lo = p.as_array();
            hi[j] += h;
            lo[j] -= h;
            (comp(i, hi) - comp(i, lo)) / (2.0 * h)
        };
        let gval = [
            m.component(0, p),
            m.component(1, p),
            m.component(2, p),
        ];
        let mut out = [[[0.0f64; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    // sum over n collapses to n = k for a diagonal metric
                    let t1 = if j == k { dg(k, i) } else { 0.0 };
                    let t2 = if i == k { dg(k, j) } else { 0.0 };
                    let t3 = if i == j { dg(i, k) } else { 0.0 };
                    out[k][i][j] = (t1 + t2 - t3) / (2.0 * gval[k]);
                }
            }
        }
        out
    }

    #[test]
    fn minkowski_christoffels_vanish() {
        let m = DiagonalMetric::minkowski3();
        let gamma = christoffel(&m, &ChartPoint::new(0.3, -1.0, 2.0)).unwrap();
        assert!(gamma.max_abs() < 1e-10);

        let mfd = DiagonalMetric::minkowski3_fd();
        let gamma = christoffel(&mfd, &ChartPoint::new(0.3, -1.0, 2.0)).unwrap();
        assert!(gamma.max_abs() < 1e-6);
    }

    #[test]
    fn round_sphere_matches_fd_oracle() {
        let m = DiagonalMetric::round_sphere_chart();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let p = ChartPoint::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            );
            let got = christoffel(&m, &p).unwrap().g;
            let want = christoffel_fd_oracle(&m, &p, 1e-5);
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_abs_diff_eq!(got[k][i][j], want[k][i][j], epsilon = 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn separable_structure_of_symbols() {
        // For a separable metric every symbol with an index equal to 3
        // vanishes except G^3_33.
        let m = DiagonalMetric::warped_chart();
        let p = ChartPoint::new(0.4, -0.7, 1.3);
        let gamma = christoffel(&m, &p).unwrap().g;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if (k == 2 || i == 2 || j == 2) && !(k == 2 && i == 2 && j == 2) {
                        assert!(
                            gamma[k][i][j].abs() < 1e-12,
                            "G^{k}_{i}{j} = {} should vanish",
                            gamma[k][i][j]
                        );
                    }
                }
            }
        }
        // G^3_33 = g33'/(2 g33), nonzero for the warped chart
        let g33 = m.component(2, &p);
        let dg33 = 0.3 * p.x3.sin();
        assert_abs_diff_eq!(gamma[2][2][2], dg33 / (2.0 * g33), epsilon = 1e-12);
    }

    #[test]
    fn christoffel_symmetry_exact() {
        let m = DiagonalMetric::warped_chart();
        let gamma = christoffel(&m, &ChartPoint::new(0.9, 0.2, -0.4)).unwrap().g;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(gamma[k][i][j], gamma[k][j][i]);
                }
            }
        }
    }

    #[test]
    fn analytic_vs_fd_partials_agree() {
        let m = DiagonalMetric::s2s1_chart(2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let p = ChartPoint::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>(),
            );
            for i in 0..3 {
                for j in 0..3 {
                    assert!(m.has_analytic_partial(i, j));
                    let analytic = m.partial(i, j, &p);
                    let mut hi = p.as_array();
                    let mut lo = p.as_array();
                    hi[j] += FD_STEP;
                    lo[j] -= FD_STEP;
                    let fd = (m.component(i, &ChartPoint::from_array(hi))
                        - m.component(i, &ChartPoint::from_array(lo)))
                        / (2.0 * FD_STEP);
                    assert_abs_diff_eq!(analytic, fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn domain_and_signature_errors() {
        let m = DiagonalMetric::round_sphere_chart();
        let far = ChartPoint::new(100.0, 0.0, 0.0);
        assert!(matches!(
            christoffel(&m, &far),
            Err(MetricError::OutsideDomain(..))
        ));

        let comps: [ComponentFn; 3] = [
            Arc::new(|p: &ChartPoint| 1.0 - p.x1),
            Arc::new(|_| 1.0),
            Arc::new(|_| -1.0),
        ];
        let bad = DiagonalMetric::new("bad", comps, true, ChartBox::new([-10.0; 3], [10.0; 3]));
        assert!(matches!(
            christoffel(&bad, &ChartPoint::new(2.0, 0.0, 0.0)),
            Err(MetricError::Signature { .. })
        ));
    }

    #[test]
    fn null_cone_examples() {
        let mk = DiagonalMetric::minkowski3();
        let origin = ChartPoint::new(0.0, 0.0, 0.0);
        let v = null_cone_vector(&mk, &origin, 0.0).unwrap();
        assert_eq!(v.as_array(), [1.0, 0.0, 1.0]);
        let v = null_cone_vector(&mk, &origin, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(v.v1.abs() < 1e-16 && (v.v2 - 1.0).abs() < 1e-15 && v.v3 == 1.0);

        // g_c chart at the stereographic origin: g11 = g22 = 4, g33 = -1/c^2
        for c in [1u32, 2, 3] {
            let m = DiagonalMetric::s2s1_chart(c);
            let v = null_cone_vector(&m, &origin, 0.0).unwrap();
            assert_abs_diff_eq!(v.v1, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(v.v2, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.v3, f64::from(c), epsilon = 1e-12);
            assert!(norm_sq(&m, &origin, &v).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn norm_sq_examples() {
        let m = DiagonalMetric::minkowski3();
        let p = ChartPoint::new(0.0, 0.0, 0.0);
        assert_eq!(norm_sq(&m, &p, &TangentVector::new(1.0, 0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(norm_sq(&m, &p, &TangentVector::new(0.0, 0.0, 1.0)).unwrap(), -1.0);
        assert_eq!(norm_sq(&m, &p, &TangentVector::zero()).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn null_cone_vectors_have_zero_length(
            x1 in -1.5f64..1.5, x2 in -1.5f64..1.5, x3 in -3.0f64..3.0,
            theta in 0.0f64..std::f64::consts::TAU,
            c in 1u32..5,
        ) {
            let m = DiagonalMetric::s2s1_chart(c);
            let p = ChartPoint::new(x1, x2, x3);
            let v = null_cone_vector(&m, &p, theta).unwrap();
            prop_assert!(norm_sq(&m, &p, &v).unwrap().abs() < 1e-12);
        }

        #[test]
        fn warped_null_cone_zero_length(
            x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, x3 in -3.0f64..3.0,
            theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let m = DiagonalMetric::warped_chart();
            let p = ChartPoint::new(x1, x2, x3);
            let v = null_cone_vector(&m, &p, theta).unwrap();
            prop_assert!(norm_sq(&m, &p, &v).unwrap().abs() < 1e-12);
        }
    }
}
