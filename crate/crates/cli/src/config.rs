use std::path::{Path, PathBuf};

use pingpong_core::contraction::{DEFAULT_GAP_TOL, DEFAULT_SAMPLES};
use pingpong_core::flag::{Flag, OppositeFlag};
use pingpong_core::orbit::{Cone, DEFAULT_NODE_CAP};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Anchor<T> {
    Auto(AutoTag),
    Explicit(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl<T> Default for Anchor<T> {
    fn default() -> Self {
        Anchor::Auto(AutoTag::Auto)
    }
}

impl<T> Anchor<T> {
    pub fn explicit(&self) -> Option<&T> {
        match self {
            Anchor::Auto(_) => None,
            Anchor::Explicit(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Flag samples per contraction check.
    pub samples: usize,
    pub node_cap: u64,
    /// Probes per element for the symmetric-space calibration and inclusion checks.
    pub probes: usize,
    /// Candidates used to calibrate R.
    pub calibration_elements: usize,
    pub pair_budget: usize,
    pub max_retries: usize,
    /// Longest word of the selected generators used by the post-checks.
    pub check_len: usize,
    /// Word count cap for those post-checks.
    pub check_words: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            node_cap: DEFAULT_NODE_CAP,
            probes: 48,
            calibration_elements: 12,
            pair_budget: 20_000,
            max_retries: 5,
            check_len: 8,
            check_words: 20_000,
        }
    }
}

fn default_radius() -> usize {
    8
}

fn default_width() -> Option<f64> {
    Some(2.0)
}

fn default_angles() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
}

fn default_floor() -> f64 {
    pingpong_core::growth::DEFAULT_LIMIT_FLOOR
}

fn default_gap_tol() -> f64 {
    DEFAULT_GAP_TOL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub generators_path: PathBuf,
    /// Checked against the generators when present.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub target_delta: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub cone: Option<Cone>,
    #[serde(default)]
    pub anchor_x: Anchor<Flag>,
    #[serde(default)]
    pub anchor_y: Anchor<OppositeFlag>,
    /// Inner radius of the annulus; defaults to the median candidate norm.
    #[serde(default)]
    pub n_min: Option<f64>,
    #[serde(default = "default_width")]
    pub width: Option<f64>,
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub exact_check: Option<usize>,
    /// Words (in generator letters) forced into the packing, at most two.
    #[serde(default)]
    pub pinned: Vec<Vec<usize>>,
    /// Direction for the growth-indicator curve; barycentric by default.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    #[serde(default = "default_angles")]
    pub angles: Vec<f64>,
    #[serde(default)]
    pub bin_width: Option<f64>,
    #[serde(default = "default_floor")]
    pub limit_floor: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
}

impl PipelineConfig {
    pub fn minimal(generators_path: PathBuf, epsilon: f64) -> Self {
        Self {
            generators_path,
            n: None,
            target_delta: 0.0,
            epsilon,
            cone: None,
            anchor_x: Anchor::default(),
            anchor_y: Anchor::default(),
            n_min: None,
            width: default_width(),
            radius: default_radius(),
            symmetric: false,
            budgets: Budgets::default(),
            seed: 0,
            output_dir: None,
            exact_check: None,
            pinned: Vec::new(),
            direction: None,
            angles: default_angles(),
            bin_width: None,
            limit_floor: default_floor(),
            gap_tol: default_gap_tol(),
        }
    }

    /// Parses a config; a relative `generators_path` is resolved against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if let Some(base) = base {
            if cfg.generators_path.is_relative() {
                cfg.generators_path = base.join(&cfg.generators_path);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad("epsilon must lie in (0, 0.5)");
        }
        if !(self.target_delta >= 0.0) || !self.target_delta.is_finite() {
            return bad("target_delta must be a finite nonnegative number");
        }
        if self.radius == 0 {
            return bad("radius must be at least 1");
        }
        if let Some(w) = self.width {
            if !(w > 0.0) {
                return bad("width must be positive");
            }
        }
        if let Some(m) = self.n_min {
            if !m.is_finite() {
                return bad("n_min must be finite");
            }
        }
        if self.pinned.len() > 2 || self.pinned.iter().any(|w| w.is_empty()) {
            return bad("at most two nonempty pinned words");
        }
        if self.budgets.samples < pingpong_core::contraction::MIN_SAMPLES {
            return bad("budgets.samples below the contraction floor");
        }
        if self.budgets.probes == 0 || self.budgets.calibration_elements == 0 || self.budgets.pair_budget == 0 {
            return bad("budgets must be positive");
        }
        if self.angles.iter().any(|a| !(*a > 0.0 && *a <= std::f64::consts::FRAC_PI_2)) {
            return bad("cone angles must lie in (0, π/2]");
        }
        if let Some(b) = self.bin_width {
            if !(b > 0.0) {
                return bad("bin_width must be positive");
            }
        }
        if !(self.gap_tol > 0.0) {
            return bad("gap_tol must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json() {
        let cfg = PipelineConfig::from_json(r#"{"generators_path": "g.json", "epsilon": 0.1}"#, Some(Path::new("/tmp/x"))).unwrap();
        assert_eq!(cfg.generators_path, PathBuf::from("/tmp/x/g.json"));
        assert!(matches!(cfg.anchor_x, Anchor::Auto(AutoTag::Auto)));
        assert_eq!(cfg.radius, 8);
        cfg.validate().unwrap();
    }

    #[test]
    fn explicit_anchor() {
        let text = r#"{"generators_path": "g.json", "epsilon": 0.01,
            "anchor_x": {"frame": [[1, 0], [0, 1]], "kind": "flag"}, "anchor_y": "auto"}"#;
        let cfg = PipelineConfig::from_json(text, None).unwrap();
        assert!(cfg.anchor_x.explicit().is_some());
        assert!(cfg.anchor_y.explicit().is_none());
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(PipelineConfig::from_json(r#"{"generators_path": "g", "epsilon": 0.1, "eps": 1}"#, None).is_err());
        assert!(PipelineConfig::from_json(r#"{"generators_path": "g", "epsilon": 0.1, "anchor_x": "manual"}"#, None).is_err());
        let cfg = PipelineConfig::from_json(r#"{"generators_path": "g", "epsilon": 0.7}"#, None).unwrap();
        assert!(cfg.validate().is_err());
    }
}
