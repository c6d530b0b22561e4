//! Scenario configuration: JSON descriptors for potentials, damping, initial
//! data, tolerances, and output schedules.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::damping::DampingSpec;
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::{Matrix, Vector};

/// Potential descriptor as it appears in scenario configs. Matrices are given
/// row-major as arrays of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDescriptor {
    Quadratic {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    LeastSquares {
        m: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
    LogSumExp {
        rows: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Huber {
        delta: f64,
        center: Vec<f64>,
    },
    Zero {
        dim: usize,
    },
}

fn to_matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(Error::Config(format!(
            "{what}: matrix needs at least one row"
        )));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!(
            "{what}: rows must share a positive length"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

impl PotentialDescriptor {
    pub fn build(&self) -> Result<PotentialSpec> {
        match self {
            Self::Quadratic { a, b } => {
                PotentialSpec::quadratic(to_matrix(a, "quadratic.a")?, Vector::from_row_slice(b))
            }
            Self::LeastSquares { m, y } => PotentialSpec::least_squares(
                to_matrix(m, "least_squares.m")?,
                Vector::from_row_slice(y),
            ),
            Self::LogSumExp { rows, offsets } => PotentialSpec::log_sum_exp(
                to_matrix(rows, "log_sum_exp.rows")?,
                Vector::from_row_slice(offsets),
            ),
            Self::Huber { delta, center } => {
                PotentialSpec::huber(*delta, Vector::from_row_slice(center))
            }
            Self::Zero { dim } => PotentialSpec::zero(*dim),
        }
    }
}

/// Damping descriptor, e.g. `{"kind":"shifted","K":5.0,"a":1.0}`. Tabulated
/// damping reads `(t, gamma)` pairs from a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingDescriptor {
    OverT {
        #[serde(rename = "K")]
        k: f64,
    },
    Shifted {
        #[serde(rename = "K")]
        k: f64,
        a: f64,
    },
    PowerLaw {
        #[serde(rename = "K")]
        k: f64,
        alpha: f64,
    },
    Tabulated {
        csv: String,
    },
}

impl DampingDescriptor {
    pub fn build(&self, t0: f64) -> Result<DampingSpec> {
        match self {
            Self::OverT { k } => DampingSpec::over_t(*k, t0),
            Self::Shifted { k, a } => DampingSpec::shifted(*k, *a, t0),
            Self::PowerLaw { k, alpha } => DampingSpec::power_law(*k, *alpha, t0),
            Self::Tabulated { csv } => DampingSpec::tabulated(read_gamma_csv(Path::new(csv))?, t0),
        }
    }

    /// Same family with the constant replaced (sweeps).
    pub fn with_k(&self, k: f64) -> Result<Self> {
        match self {
            Self::OverT { .. } => Ok(Self::OverT { k }),
            Self::Shifted { a, .. } => Ok(Self::Shifted { k, a: *a }),
            Self::PowerLaw { alpha, .. } => Ok(Self::PowerLaw { k, alpha: *alpha }),
            Self::Tabulated { .. } => Err(Error::RejectedInput(
                "tabulated damping has no K parameter to sweep".into(),
            )),
        }
    }
}

/// Parses a `t,gamma` CSV. Lines starting with `#` and a non-numeric header
/// line are skipped.
pub fn read_gamma_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    let mut knots = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (t, g) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (a.parse::<f64>(), b.parse::<f64>()),
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: expected `t,gamma`",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        match (t, g) {
            (Ok(t), Ok(g)) => knots.push((t, g)),
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(Error::Config(format!(
                    "{}:{}: expected numeric `t,gamma`",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(knots)
}

/// Anchor selection: the literal string `"auto"` derives anchors from the
/// potential's argmin description; otherwise an explicit list of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorsSpec {
    Keyword(String),
    Explicit(Vec<Vec<f64>>),
}

impl Default for AnchorsSpec {
    fn default() -> Self {
        Self::Keyword("auto".into())
    }
}

impl AnchorsSpec {
    pub fn resolve(&self, p: &PotentialSpec) -> Result<Vec<Vector>> {
        match self {
            Self::Keyword(s) if s == "auto" => Ok(p.auto_anchors()),
            Self::Keyword(s) => Err(Error::Config(format!(
                "anchors: expected \"auto\" or a list, got {s:?}"
            ))),
            Self::Explicit(list) => Ok(list.iter().map(|v| Vector::from_row_slice(v)).collect()),
        }
    }
}

fn default_t0() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    1e4
}
fn default_rel_tol() -> f64 {
    1e-9
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_points_per_decade() -> usize {
    200
}
fn default_window() -> f64 {
    0.25
}

/// One scenario: what to integrate, how accurately, and how to evaluate it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub potential: PotentialDescriptor,
    pub damping: DampingDescriptor,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(rename = "T", default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default)]
    pub anchors: AnchorsSpec,
    #[serde(default = "default_points_per_decade")]
    pub points_per_decade: usize,
    /// Trailing log-time fraction used by the decay indicators.
    #[serde(default = "default_window")]
    pub decay_window: f64,
    /// Trailing log-time fraction used by the convergence check.
    #[serde(default = "default_window")]
    pub opial_window: f64,
    /// Override for the proof epsilon; defaults to `(K_inf - 3)/6`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Where artifacts go when the caller does not pick a directory.
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("parsing {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "scenario id {:?} is not a simple name",
                self.id
            )));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::Config(format!("t0 must be > 0, got {}", self.t0)));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::Config(format!(
                "T must exceed t0, got T = {}, t0 = {}",
                self.t_end, self.t0
            )));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.x0.len() != self.v0.len() {
            return Err(Error::Config(format!(
                "x0 and v0 lengths differ ({} vs {})",
                self.x0.len(),
                self.v0.len()
            )));
        }
        if self.points_per_decade == 0 {
            return Err(Error::Config("points_per_decade must be >= 1".into()));
        }
        for (name, w) in [
            ("decay_window", self.decay_window),
            ("opial_window", self.opial_window),
        ] {
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {w}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_scenario() {
        let cfg = ScenarioConfig::from_json(
            r#"{
                "id": "mini",
                "potential": {"kind": "quadratic", "a": [[1.0]], "b": [0.0]},
                "damping": {"kind": "shifted", "K": 5.0, "a": 1.0},
                "x0": [1.0],
                "v0": [0.0]
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.t0, 1.0);
        assert_eq!(cfg.t_end, 1e4);
        assert_eq!(cfg.rel_tol, 1e-9);
        let p = cfg.potential.build().unwrap();
        assert_eq!(p.dim(), 1);
        let d = cfg.damping.build(cfg.t0).unwrap();
        assert_eq!(d.gamma(9.0).unwrap(), 0.5);
        assert!(matches!(cfg.anchors, AnchorsSpec::Keyword(ref s) if s == "auto"));
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let bad_t = r#"{
            "id": "bad", "potential": {"kind": "zero", "dim": 1},
            "damping": {"kind": "over_t", "K": 4.0},
            "x0": [0.0], "v0": [0.0], "t0": 2.0, "T": 1.0
        }"#;
        assert!(ScenarioConfig::from_json(bad_t).is_err());

        let bad_dims = r#"{
            "id": "bad", "potential": {"kind": "zero", "dim": 1},
            "damping": {"kind": "over_t", "K": 4.0},
            "x0": [0.0, 1.0], "v0": [0.0]
        }"#;
        assert!(ScenarioConfig::from_json(bad_dims).is_err());
    }

    #[test]
    fn explicit_anchor_lists_resolve() {
        let cfg = ScenarioConfig::from_json(
            r#"{
                "id": "mini",
                "potential": {"kind": "zero", "dim": 2},
                "damping": {"kind": "over_t", "K": 4.0},
                "x0": [0.0, 0.0], "v0": [0.0, 0.0],
                "anchors": [[0.0, 0.0], [1.0, 0.0]]
            }"#,
        )
        .unwrap();
        let p = cfg.potential.build().unwrap();
        let anchors = cfg.anchors.resolve(&p).unwrap();
        assert_eq!(anchors.len(), 2);
        assert_eq!(anchors[1][0], 1.0);
    }

    #[test]
    fn tabulated_csv_round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gamma.csv");
        std::fs::write(&path, "t,gamma\n1.0,4.0\n2.0,3.0\n# comment\n4.0,2.0\n").unwrap();
        let knots = read_gamma_csv(&path).unwrap();
        assert_eq!(knots, vec![(1.0, 4.0), (2.0, 3.0), (4.0, 2.0)]);
        let d = DampingDescriptor::Tabulated {
            csv: path.to_string_lossy().into_owned(),
        }
        .build(1.0)
        .unwrap();
        assert_eq!(d.gamma(1.5).unwrap(), 3.5);
    }
}
