//! Experiment configuration.
//!
//! Configs are TOML files whose keys match the struct fields below
//! verbatim; unknown keys are rejected so typos never silently change an
//! experiment. A minimal sweep:
//!
//! ```toml
//! b = 0.7
//! budgets = [400, 800]
//! replications = 100
//! root_seed = 7
//!
//! [instance]
//! kind = "recipe"
//! k = 100
//! mean_range = [0.6, 0.8]
//! half_width_range = [0.15, 0.25]
//! distribution = "uniform"
//!
//! [[policies]]
//! kind = "evt"
//!
//! [[delays]]
//! kind = "none"
//! ```

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::complexity::summarize;
use crate::env::{ArmModel, DelayModel};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};

/// A full sweep description: one instance source crossed with policies,
/// budgets, and delay models, replicated under a root seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Classification threshold shared by every cell.
    pub b: f64,
    pub policies: Vec<PolicySpec>,
    /// Budgets `n`; each cell needs `n > 2K`.
    pub budgets: Vec<u64>,
    pub delays: Vec<DelayModel>,
    pub replications: u32,
    pub root_seed: u64,
    /// Success-rate target used by round-to-accuracy lookups.
    #[serde(default = "default_target_accuracy")]
    pub target_accuracy: f64,
    /// Draw the instance once and share it across replications instead of
    /// redrawing per replication.
    #[serde(default)]
    pub fixed_instance: bool,
}

fn default_target_accuracy() -> f64 {
    0.95
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: "<inline>".to_string(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigIo {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::ConfigParse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Structural validation. Per-cell conditions such as `n > 2K` are
    /// deliberately left to the sweep, which reports them cell by cell.
    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        if !self.b.is_finite() {
            return Err(Error::InvalidConfig(format!("b = {} is not finite", self.b)));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("policies must be non-empty".into()));
        }
        for policy in &self.policies {
            policy.validate()?;
        }
        if self.budgets.is_empty() {
            return Err(Error::InvalidConfig("budgets must be non-empty".into()));
        }
        if self.delays.is_empty() {
            return Err(Error::InvalidConfig("delays must be non-empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if !(self.target_accuracy > 0.0 && self.target_accuracy <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target_accuracy = {} outside (0,1]",
                self.target_accuracy
            )));
        }
        Ok(())
    }
}

/// Where the arms of each replication come from.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// A fixed, explicit arm list.
    Explicit { arms: Vec<ArmModel> },
    /// `k` arms with means drawn uniformly from `mean_range`. For the
    /// `uniform` distribution each arm also draws a half-width from
    /// `half_width_range`, clamped so the support stays inside `[0,1]`.
    Recipe {
        k: usize,
        mean_range: [f64; 2],
        #[serde(default)]
        half_width_range: Option<[f64; 2]>,
        distribution: RecipeDistribution,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeDistribution {
    Uniform,
    Bernoulli,
    PointMass,
}

impl InstanceSpec {
    pub fn k(&self) -> usize {
        match self {
            InstanceSpec::Explicit { arms } => arms.len(),
            InstanceSpec::Recipe { k, .. } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InstanceSpec::Explicit { arms } => {
                if arms.is_empty() {
                    return Err(Error::InvalidConfig("explicit instance has no arms".into()));
                }
                for arm in arms {
                    arm.validate()?;
                }
            }
            InstanceSpec::Recipe {
                k,
                mean_range,
                half_width_range,
                distribution,
            } => {
                if *k == 0 {
                    return Err(Error::InvalidConfig("recipe k must be >= 1".into()));
                }
                let [lo, hi] = *mean_range;
                if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "mean_range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1"
                    )));
                }
                match (distribution, half_width_range) {
                    (RecipeDistribution::Uniform, Some([rlo, rhi])) => {
                        if !(0.0 <= *rlo && rlo <= rhi) {
                            return Err(Error::InvalidConfig(format!(
                                "half_width_range [{rlo}, {rhi}] must satisfy 0 <= rlo <= rhi"
                            )));
                        }
                    }
                    (RecipeDistribution::Uniform, None) => {
                        return Err(Error::InvalidConfig(
                            "uniform recipe requires half_width_range".into(),
                        ));
                    }
                    (_, Some(_)) => {
                        return Err(Error::InvalidConfig(
                            "half_width_range only applies to the uniform distribution".into(),
                        ));
                    }
                    (_, None) => {}
                }
            }
        }
        Ok(())
    }

    /// Draws the concrete arms of one replication. Explicit instances are
    /// returned as-is; recipes consume the generator deterministically, one
    /// arm at a time.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<ArmModel> {
        match self {
            InstanceSpec::Explicit { arms } => arms.clone(),
            InstanceSpec::Recipe {
                k,
                mean_range: [lo, hi],
                half_width_range,
                distribution,
            } => (0..*k)
                .map(|_| {
                    let mu = lo + (hi - lo) * rng.gen::<f64>();
                    match distribution {
                        RecipeDistribution::Uniform => {
                            let [rlo, rhi] = half_width_range.expect("validated");
                            let r = rlo + (rhi - rlo) * rng.gen::<f64>();
                            // Clamp so the support stays inside [0,1]; the
                            // mean is preserved.
                            let r = r.min(mu).min(1.0 - mu);
                            ArmModel::UniformInterval { mu, r }
                        }
                        RecipeDistribution::Bernoulli => ArmModel::Bernoulli { p: mu },
                        RecipeDistribution::PointMass => ArmModel::PointMass { value: mu },
                    }
                })
                .collect(),
        }
    }
}

/// One policy entry of a sweep. The exploration parameter may be pinned
/// with `a`, or derived per budget with `a_rule`; the default rule is
/// `n_over_k`. `delta` defaults to 0.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub a_rule: Option<ARule>,
}

/// Rule deriving the exploration parameter for one cell: `n / K`, or
/// `n / h_evt` computed from the replication's true instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ARule {
    NOverK,
    NOverHEvt,
}

impl PolicySpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!(
                "policy {}: delta = {} outside [0,1]",
                self.kind, self.delta
            )));
        }
        if self.a.is_some() && self.a_rule.is_some() {
            return Err(Error::InvalidConfig(format!(
                "policy {}: a and a_rule are mutually exclusive",
                self.kind
            )));
        }
        if let Some(a) = self.a {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "policy {}: a = {a} must be finite and positive",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    /// Stable label used in CSV rows and round-to-accuracy lookups; only
    /// parameters the kind actually uses appear.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.kind.uses_a() {
            match (self.a, self.a_rule) {
                (Some(a), _) => parts.push(format!("a={a}")),
                (None, Some(ARule::NOverHEvt)) => parts.push("a=n_over_h_evt".to_string()),
                _ => {}
            }
        }
        if self.kind.uses_delta() && self.delta != 0.0 {
            parts.push(format!("delta={}", self.delta));
        }
        if parts.is_empty() {
            self.kind.name().to_string()
        } else {
            format!("{}[{}]", self.kind.name(), parts.join(","))
        }
    }

    /// Resolves the concrete policy for one cell: `n` and the drawn arms
    /// decide the effective exploration parameter.
    pub fn build(&self, b: f64, n: u64, arms: &[ArmModel]) -> Result<PolicyConfig> {
        let a = if self.kind.uses_a() {
            match (self.a, self.a_rule) {
                (Some(a), _) => a,
                (None, Some(ARule::NOverHEvt)) => {
                    let h_evt = summarize(arms, b)?.h_evt;
                    n as f64 / h_evt
                }
                (None, Some(ARule::NOverK)) | (None, None) => n as f64 / arms.len() as f64,
            }
        } else {
            0.0
        };
        let config = PolicyConfig {
            kind: self.kind,
            b,
            a,
            delta: if self.kind.uses_delta() { self.delta } else { 0.0 },
        };
        config.validate()?;
        Ok(config)
    }
}
