//! Metric resolution for the command-line surface: builtin identifiers
//! (`minkowski3`, `s2s1:c=<n>`) and TOML config files declaring the three
//! diagonal components as expressions over `x1, x2, x3`.
//!
//! ```toml
//! id = "warped"
//! separable = true
//!
//! [components]
//! g11 = "4/(1+x1^2+x2^2)^2"
//! g22 = "4/(1+x1^2+x2^2)^2"
//! g33 = "-(1+0.3*cos(x3))"
//!
//! [partials]            # optional; missing entries fall back to
//! dg33_dx3 = "0.3*sin(x3)"   # central differences
//!
//! [domain]              # optional box, defaults to [-2,2]^2 x [-10,10]
//! x1 = [-2.0, 2.0]
//! x2 = [-2.0, 2.0]
//! x3 = [-10.0, 10.0]
//! ```
//!
//! Declared signs and separability are spot-checked on a sampling grid at
//! load time.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{self, Expr};
use crate::metric::{ChartBox, ChartPoint, ComponentFn, DiagonalMetric, FD_STEP};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown metric '{0}' (expected minkowski3, s2s1:c=<n>, file:<path> or a config path)")]
    UnknownMetric(String),
    #[error("cannot read metric config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed metric config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("in component {field}: {source}")]
    Expr {
        field: String,
        source: expr::ParseError,
    },
    #[error("unknown partial key '{0}' (expected dg{{11|22|33}}_dx{{1|2|3}})")]
    BadPartialKey(String),
    #[error("component signs violated at grid point ({0}, {1}, {2}): g = ({3}, {4}, {5})")]
    Signature(f64, f64, f64, f64, f64, f64),
    #[error("metric declared separable but partial {name} has residual {residual} on the grid")]
    NotSeparable { name: &'static str, residual: f64 },
    #[error("invalid cyclic order in '{0}'")]
    BadOrder(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    id: Option<String>,
    separable: Option<bool>,
    components: RawComponents,
    partials: Option<BTreeMap<String, String>>,
    domain: Option<RawDomain>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponents {
    g11: String,
    g22: String,
    g33: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    x1: [f64; 2],
    x2: [f64; 2],
    x3: [f64; 2],
}

fn compile(field: &str, src: &str) -> Result<Expr, ConfigError> {
    expr::parse(src).map_err(|source| ConfigError::Expr {
        field: field.to_string(),
        source,
    })
}

fn component_fn(e: Expr) -> ComponentFn {
    Arc::new(move |p: &ChartPoint| e.eval(&p.as_array()))
}

fn partial_index(key: &str) -> Option<(usize, usize)> {
    let key = key.replace('/', "_");
    let rest = key.strip_prefix("dg")?;
    let (comp, var) = rest.split_once("_dx")?;
    let i = match comp {
        "11" => 0,
        "22" => 1,
        "33" => 2,
        _ => return None,
    };
    let j = match var {
        "1" => 0,
        "2" => 1,
        "3" => 2,
        _ => return None,
    };
    Some((i, j))
}

fn grid(domain: &ChartBox, n: usize) -> Vec<ChartPoint> {
    let mut out = Vec::with_capacity(n * n * n);
    let coord = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push(ChartPoint::new(
                    coord(domain.min[0], domain.max[0], a),
                    coord(domain.min[1], domain.max[1], b),
                    coord(domain.min[2], domain.max[2], c),
                ));
            }
        }
    }
    out
}

/// Builds a [`DiagonalMetric`] from TOML text, validating signs and (when
/// declared) separability on a sampling grid.
pub fn metric_from_config_str(text: &str) -> Result<DiagonalMetric, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let comps: [ComponentFn; 3] = [
        component_fn(compile("g11", &raw.components.g11)?),
        component_fn(compile("g22", &raw.components.g22)?),
        component_fn(compile("g33", &raw.components.g33)?),
    ];

    let mut partials: [[Option<ComponentFn>; 3]; 3] = Default::default();
    if let Some(map) = &raw.partials {
        for (key, src) in map {
            let (i, j) =
                partial_index(key).ok_or_else(|| ConfigError::BadPartialKey(key.clone()))?;
            partials[i][j] = Some(component_fn(compile(key, src)?));
        }
    }

    let domain = match &raw.domain {
        Some(d) => ChartBox::new(
            [d.x1[0], d.x2[0], d.x3[0]],
            [d.x1[1], d.x2[1], d.x3[1]],
        ),
        None => ChartBox::new([-2.0, -2.0, -10.0], [2.0, 2.0, 10.0]),
    };

    let separable = raw.separable.unwrap_or(false);
    let id = raw.id.unwrap_or_else(|| "file-metric".to_string());
    let metric = DiagonalMetric::new(id, comps, separable, domain).with_partials(partials);

    for p in grid(&domain, 5) {
        let g = [
            metric.component(0, &p),
            metric.component(1, &p),
            metric.component(2, &p),
        ];
        if !(g[0] > 0.0 && g[1] > 0.0 && g[2] < 0.0) {
            return Err(ConfigError::Signature(p.x1, p.x2, p.x3, g[0], g[1], g[2]));
        }
        if separable {
            let checks: [(&'static str, usize, usize); 4] = [
                ("dg11_dx3", 0, 2),
                ("dg22_dx3", 1, 2),
                ("dg33_dx1", 2, 0),
                ("dg33_dx2", 2, 1),
            ];
            for (name, i, j) in checks {
                // finite differences of the raw component regardless of any
                // declared analytic partial
                let mut hi = p.as_array();
                let mut lo = p.as_array();
                hi[j] += FD_STEP;
                lo[j] -= FD_STEP;
                let fd = (metric.component(i, &ChartPoint::from_array(hi))
                    - metric.component(i, &ChartPoint::from_array(lo)))
                    / (2.0 * FD_STEP);
                if fd.abs() > 1e-8 {
                    return Err(ConfigError::NotSeparable {
                        name,
                        residual: fd.abs(),
                    });
                }
            }
        }
    }
    Ok(metric)
}

/// Loads a metric config from a file path.
pub fn metric_from_config_file(path: impl AsRef<Path>) -> Result<DiagonalMetric, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    metric_from_config_str(&text)
}

/// Resolves a metric identifier: `minkowski3`, `s2s1:c=<n>`, `file:<path>`,
/// or a bare path to a config file.
pub fn resolve_metric(spec: &str) -> Result<DiagonalMetric, ConfigError> {
    if spec == "minkowski3" {
        return Ok(DiagonalMetric::minkowski3());
    }
    if let Some(rest) = spec.strip_prefix("s2s1:c=") {
        let c: u32 = rest
            .parse()
            .map_err(|_| ConfigError::BadOrder(spec.to_string()))?;
        if c == 0 {
            return Err(ConfigError::BadOrder(spec.to_string()));
        }
        return Ok(DiagonalMetric::s2s1_chart(c));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return metric_from_config_file(path);
    }
    if Path::new(spec).is_file() {
        return metric_from_config_file(spec);
    }
    Err(ConfigError::UnknownMetric(spec.to_string()))
}
