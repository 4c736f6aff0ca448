//! TOML configuration schemas for single runs and sweeps.

use fermi_causality::{QuadratureSpec, Regularization, SystemParams};
use serde::Deserialize;
use std::collections::BTreeMap;

fn default_scenarios() -> Vec<u8> {
    vec![1, 2, 3]
}

fn default_true() -> bool {
    true
}

fn default_max_points() -> usize {
    100_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    #[serde(default)]
    pub regularization: Option<Regularization>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<u8>,
    #[serde(default = "default_true")]
    pub include_r_independent: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| e.to_string())?;
        if self.scenarios.is_empty() {
            return Err("scenarios must be non-empty".into());
        }
        if let Some(bad) = self.scenarios.iter().find(|s| !(1..=3).contains(*s)) {
            return Err(format!("unknown scenario {bad}; expected 1, 2 or 3"));
        }
        if let Some(q) = &self.quadrature {
            QuadratureSpec::new(q.rel_tol, q.abs_tol, q.max_subdivisions, q.gauss_nodes)
                .map_err(|e| e.to_string())?;
        }
        if let Some(r) = &self.regularization {
            Regularization::new(r.eps, r.schedule.clone(), r.extrapolation_order)
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization.clone().unwrap_or_default()
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature.clone().unwrap_or_default()
    }
}

/// One sweep axis: an explicit list or a geometric range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(default)]
    pub list: Option<Vec<f64>>,
    #[serde(default)]
    pub geometric: Option<GeometricRange>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match (&self.list, &self.geometric) {
            (Some(l), None) => {
                if l.is_empty() {
                    Err("axis list must be non-empty".into())
                } else {
                    Ok(l.clone())
                }
            }
            (None, Some(g)) => {
                if !(g.start > 0.0) || !(g.stop > 0.0) || g.count < 2 {
                    return Err("geometric range needs start, stop > 0 and count >= 2".into());
                }
                let ratio = (g.stop / g.start).powf(1.0 / (g.count - 1) as f64);
                Ok((0..g.count).map(|k| g.start * ratio.powi(k as i32)).collect())
            }
            _ => Err("axis must specify exactly one of `list` or `geometric`".into()),
        }
    }
}

/// Canonical axis iteration order; rows are emitted in lexicographic grid
/// order over the axes present, nested in this sequence.
pub const AXIS_ORDER: [&str; 6] = ["omega0", "r", "sigma2", "dtau", "lambda", "tau0"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Fixed parameter values; swept axes override these per point.
    pub fixed: FixedParams,
    pub axes: BTreeMap<String, AxisSpec>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<u8>,
    #[serde(default)]
    pub regularization: Option<Regularization>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Sweeps parameterize the window by its length dtau (with tau0 fixed)
/// rather than by tau.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub omega0: f64,
    pub r: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub tau0: f64,
    pub dtau: f64,
    #[serde(default)]
    pub sigma2: f64,
}

fn one() -> f64 {
    1.0
}

impl SweepConfig {
    /// Axis names in canonical order, their value lists, and the grid points
    /// as full parameter sets in lexicographic order.
    pub fn grid(&self) -> Result<Vec<SystemParams>, String> {
        if self.axes.is_empty() {
            return Err("axes must be non-empty".into());
        }
        let mut names: Vec<&str> = Vec::new();
        for n in AXIS_ORDER {
            if self.axes.contains_key(n) {
                names.push(n);
            }
        }
        if names.len() != self.axes.len() {
            let unknown: Vec<&String> = self
                .axes
                .keys()
                .filter(|k| !AXIS_ORDER.contains(&k.as_str()))
                .collect();
            return Err(format!("unknown sweep axes {unknown:?}; valid axes: {AXIS_ORDER:?}"));
        }
        let lists: Vec<Vec<f64>> = names
            .iter()
            .map(|n| self.axes[*n].values())
            .collect::<Result<_, _>>()?;
        let total: usize = lists.iter().map(Vec::len).product();
        if total > self.max_points {
            return Err(format!("grid has {total} points, cap is {}", self.max_points));
        }
        if let Some(bad) = self.scenarios.iter().find(|s| !(1..=3).contains(*s)) {
            return Err(format!("unknown scenario {bad}; expected 1, 2 or 3"));
        }
        if self.scenarios.is_empty() {
            return Err("scenarios must be non-empty".into());
        }

        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; lists.len()];
        loop {
            let f = &self.fixed;
            let mut v = [f.omega0, f.r, f.sigma2, f.dtau, f.lambda, f.tau0];
            for (k, name) in names.iter().enumerate() {
                let pos = AXIS_ORDER.iter().position(|n| n == name).unwrap();
                v[pos] = lists[k][idx[k]];
            }
            let [omega0, r, sigma2, dtau, lambda, tau0] = v;
            let p = SystemParams::new(omega0, r, lambda, tau0, tau0 + dtau, sigma2)
                .map_err(|e| e.to_string())?;
            out.push(p);
            // lexicographic increment, last axis fastest
            let mut k = lists.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization.clone().unwrap_or_default()
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature.clone().unwrap_or_default()
    }
}
