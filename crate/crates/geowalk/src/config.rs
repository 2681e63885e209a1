//! Run configuration files.
//!
//! Configs are TOML: a handful of top-level keys plus one flat section per
//! concern. Unknown keys are errors. See the README for the full grammar.
//!
//! ```toml
//! seed = 7
//! mode = "sample"
//! manifold = "sphere:2"
//! body = "cap:north:1.0471975511965976"
//! output = "out"
//!
//! [walk]
//! delta = 0.3
//! max_steps = 10000
//! thin = 10
//! ```

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sample,
    Anneal,
    Diagnose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub mode: Mode,
    pub manifold: String,
    pub body: String,
    #[serde(default = "default_output")]
    pub output: String,
    /// Overrides the manifold's declared curvature bound `R`.
    pub curvature_bound: Option<f64>,
    /// Overrides the declared injectivity radius (SO(n) only).
    pub injectivity_radius: Option<f64>,
    #[serde(default)]
    pub walk: WalkSection,
    pub gibbs: Option<GibbsSection>,
    pub anneal: Option<AnnealSection>,
    #[serde(default)]
    pub diagnose: DiagnoseSection,
}

fn default_output() -> String {
    "geowalk-out".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    /// Step size; defaults to the admissible bound with `s = 0.5`.
    pub delta: Option<f64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    /// Defaults to `⌈10n²/δ²⌉`.
    pub burn_in: Option<u64>,
    #[serde(default = "one")]
    pub thin: u64,
    #[serde(default = "one")]
    pub chains: u64,
    /// "uniform", "center" or a point spec.
    #[serde(default = "default_start")]
    pub start: String,
    #[serde(default = "yes")]
    pub record_rejections: bool,
    #[serde(default)]
    pub override_delta: bool,
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            delta: None,
            max_steps: default_max_steps(),
            burn_in: None,
            thin: 1,
            chains: 1,
            start: default_start(),
            record_rejections: true,
            override_delta: false,
        }
    }
}

fn default_max_steps() -> u64 {
    10_000
}
fn one() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn default_start() -> String {
    "uniform".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsSection {
    pub target: String,
    pub temperature: f64,
    pub lipschitz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepsSetting {
    Fixed(u64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSection {
    /// Falls back to `gibbs.target`.
    pub target: Option<String>,
    #[serde(default = "tenth")]
    pub epsilon: f64,
    #[serde(default = "tenth")]
    pub fail_prob: f64,
    /// "auto" or a positive integer.
    pub steps_per_phase: Option<StepsSetting>,
    pub lipschitz: Option<f64>,
    #[serde(default = "unit")]
    pub budget_constant: f64,
    #[serde(default = "default_global_budget")]
    pub global_budget: u64,
    #[serde(default = "one")]
    pub trials: u64,
    pub t0: Option<f64>,
}

impl Default for AnnealSection {
    fn default() -> Self {
        Self {
            target: None,
            epsilon: 0.1,
            fail_prob: 0.1,
            steps_per_phase: None,
            lipschitz: None,
            budget_constant: 1.0,
            global_budget: default_global_budget(),
            trials: 1,
            t0: None,
        }
    }
}

fn tenth() -> f64 {
    0.1
}
fn unit() -> f64 {
    1.0
}
fn default_global_budget() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    /// Check names; empty means all.
    #[serde(default)]
    pub checks: Vec<String>,
    /// Randomized instances per quadrature check.
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default = "default_mc")]
    pub mc_samples: u64,
    /// Proposals per local-conductance estimate.
    #[serde(default = "default_conductance_trials")]
    pub conductance_trials: u64,
    /// Interior-volume ε; defaults to `r/(2n)`.
    pub interior_eps: Option<f64>,
    /// Temperature of the low-temperature check; defaults to `gibbs.temperature` or 0.05.
    pub temperature: Option<f64>,
    #[serde(default = "default_chain_steps")]
    pub chain_steps: u64,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<u64>,
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        Self {
            checks: Vec::new(),
            instances: default_instances(),
            mc_samples: default_mc(),
            conductance_trials: default_conductance_trials(),
            interior_eps: None,
            temperature: None,
            chain_steps: default_chain_steps(),
            replicas: default_replicas(),
            checkpoints: default_checkpoints(),
        }
    }
}

fn default_instances() -> u64 {
    100
}
fn default_mc() -> u64 {
    20_000
}
fn default_conductance_trials() -> u64 {
    10_000
}
fn default_chain_steps() -> u64 {
    100_000
}
fn default_replicas() -> u64 {
    2_000
}
fn default_checkpoints() -> Vec<u64> {
    vec![0, 25, 100, 400, 1600]
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, crate::Error> {
        toml::from_str(text).map_err(|e| crate::Error::Config(e.to_string()))
    }

    /// Hex digest identifying the effective configuration; written on every
    /// output row. The output location is not part of it.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output.clear();
        let canonical = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml("mode = \"sample\"\nmanifold = \"sphere:2\"\nbody = \"cap:north:1\"\n").unwrap();
        assert_eq!(c.walk.thin, 1);
        assert_eq!(c.diagnose.checkpoints, vec![0, 25, 100, 400, 1600]);
        assert_eq!(c.hash().len(), 16);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let e = RunConfig::from_toml("mode = \"sample\"\nmanifold = \"sphere:2\"\nbody = \"cap:north:1\"\n[walk]\nstep = 3\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("step"), "{e}");
        assert!(e.contains("line 5") || e.contains("5 |"), "{e}");
    }

    #[test]
    fn steps_per_phase_accepts_auto_and_numbers() {
        let base = "mode = \"anneal\"\nmanifold = \"sphere:2\"\nbody = \"cap:north:1\"\n[anneal]\n";
        let a = RunConfig::from_toml(&format!("{base}steps_per_phase = \"auto\"\n")).unwrap();
        assert_eq!(a.anneal.unwrap().steps_per_phase, Some(StepsSetting::Named("auto".into())));
        let b = RunConfig::from_toml(&format!("{base}steps_per_phase = 500\n")).unwrap();
        assert_eq!(b.anneal.unwrap().steps_per_phase, Some(StepsSetting::Fixed(500)));
    }
}
