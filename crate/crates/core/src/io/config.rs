//! TOML run configuration. Unknown keys are errors; every omitted key takes
//! the default listed on its field, and [`RunConfig::echo`] prints the fully
//! resolved document.
//!
//! ```toml
//! [game]
//! dim = 3
//! mode = "rational"
//! episodes = 200
//!
//! [action]
//! c1 = ["-1", "-1/2", "0", "1/2"]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::read_text;
use crate::error::{Error, Result};
use crate::factor::NormConvention;
use crate::refconfigs::GeneratorId;
use crate::scalar::ArithMode;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameSection,
    #[serde(default)]
    pub seed: SeedSection,
    pub action: ActionSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub corrector: CorrectorSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_mode() -> ArithMode {
    ArithMode::Float
}
fn default_rounds() -> usize {
    5
}
fn default_stagnation() -> usize {
    10
}
fn default_exploration() -> f64 {
    std::f64::consts::SQRT_2
}
fn default_cap() -> usize {
    4096
}
fn default_episodes() -> u64 {
    200
}
fn default_checkpoint_every() -> u64 {
    10
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub dim: usize,
    /// `float` (default) or `rational`.
    #[serde(default = "default_mode")]
    pub mode: ArithMode,
    /// Fill/correct rounds per episode (default 5).
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    /// Additions per fill phase; absent means "until stuck".
    #[serde(default)]
    pub fill_budget: Option<usize>,
    /// Candidates offered to UCB per move; 0 means all (default).
    #[serde(default)]
    pub rollouts_per_move: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Rounds without improvement before an episode stops (default 10).
    #[serde(default = "default_stagnation")]
    pub stagnation_window: usize,
    /// UCB exploration constant (default √2).
    #[serde(default = "default_exploration")]
    pub exploration: f64,
    /// Reservoir size for candidate enumeration (default 4096).
    #[serde(default = "default_cap")]
    pub candidate_cap: usize,
    /// Training episodes (default 200).
    #[serde(default = "default_episodes")]
    pub episodes: u64,
    /// Stop training once this reward is reached.
    #[serde(default)]
    pub target: Option<usize>,
    /// Checkpoint period in episodes (default 10).
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub norm_convention: NormConvention,
    /// Frame detection between rounds; default on only for `dim > 8`.
    #[serde(default)]
    pub reassemble: Option<bool>,
    /// Revalidate every state after each move (slow; for testing).
    #[serde(default)]
    pub revalidate: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    #[default]
    Scratch,
    File,
    Generator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default)]
    pub kind: SeedKind,
    /// Vector or Gram file for `kind = "file"`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Generator name for `kind = "generator"`, e.g. `E8Roots`.
    #[serde(default)]
    pub generator: Option<String>,
    /// Keep only the first rows of the seed.
    #[serde(default)]
    pub rows: Option<usize>,
    /// Seed rows are never deleted (default true).
    #[serde(default = "default_true")]
    pub protect: bool,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            kind: SeedKind::Scratch,
            path: None,
            generator: None,
            rows: None,
            protect: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSection {
    /// Head cosines, as `p/q` or decimals (decimals only in float mode).
    pub c1: Vec<String>,
    /// Tail cosines; absent means `C₂ = C₁`.
    #[serde(default)]
    pub c2: Option<Vec<String>>,
    /// Cap-only tail constraint; exclusive with `c2`.
    #[serde(default)]
    pub c2_cap: Option<String>,
    /// Membership constraint: rows of this generator's Gram matrix.
    #[serde(default)]
    pub cstar: Option<String>,
}

fn default_temperature() -> f64 {
    1.0
}
fn default_delete_fraction() -> f64 {
    0.2
}
fn default_base_rate() -> f64 {
    0.1
}
fn default_learning_rate() -> f64 {
    0.05
}
fn default_decay() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectorSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_delete_fraction")]
    pub max_delete_fraction: f64,
    #[serde(default = "default_base_rate")]
    pub base_rate: f64,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_decay")]
    pub baseline_decay: f64,
}

impl Default for CorrectorSection {
    fn default() -> Self {
        Self {
            enabled: true,
            temperature: default_temperature(),
            max_delete_fraction: default_delete_fraction(),
            base_rate: default_base_rate(),
            learning_rate: default_learning_rate(),
            baseline_decay: default_decay(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Best configuration as a vector file.
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    /// Best configuration as a Gram file.
    #[serde(default)]
    pub gram: Option<PathBuf>,
    #[serde(default)]
    pub certificate: Option<PathBuf>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    /// Progress log, one line per episode.
    #[serde(default)]
    pub log: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&read_text(path)?)?;
        // relative paths resolve against the config file's directory
        if let Some(base) = path.parent() {
            let fix = |p: &mut Option<PathBuf>| {
                if let Some(q) = p.as_mut() {
                    if q.is_relative() {
                        *q = base.join(&*q);
                    }
                }
            };
            fix(&mut cfg.seed.path);
            fix(&mut cfg.output.vectors);
            fix(&mut cfg.output.gram);
            fix(&mut cfg.output.certificate);
            fix(&mut cfg.output.checkpoint);
            fix(&mut cfg.output.log);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        let g = &self.game;
        if g.dim == 0 {
            return bad("game.dim must be at least 1");
        }
        if g.rounds == 0 {
            return bad("game.rounds must be at least 1");
        }
        if g.episodes == 0 {
            return bad("game.episodes must be at least 1");
        }
        if g.checkpoint_every == 0 {
            return bad("game.checkpoint_every must be at least 1");
        }
        if !(g.exploration >= 0.0 && g.exploration.is_finite()) {
            return bad("game.exploration must be a nonnegative number");
        }
        if g.mode == ArithMode::Rational && g.norm_convention != NormConvention::Verbatim {
            return bad("the inverse-transpose norm convention is float-only");
        }
        if self.action.c2.is_some() && self.action.c2_cap.is_some() {
            return bad("action.c2 and action.c2_cap are exclusive");
        }
        match self.seed.kind {
            SeedKind::Scratch if self.seed.path.is_some() || self.seed.generator.is_some() => {
                return bad("scratch seeds take no path or generator")
            }
            SeedKind::File if self.seed.path.is_none() => return bad("seed.path is required"),
            SeedKind::Generator => {
                let name = match &self.seed.generator {
                    Some(n) => n,
                    None => return bad("seed.generator is required"),
                };
                name.parse::<GeneratorId>()?;
            }
            _ => {}
        }
        if let Some(name) = &self.action.cstar {
            name.parse::<GeneratorId>()?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("psd", t.psd),
            ("rank", t.rank),
            ("cosine_cap", t.cosine_cap),
            ("snap", t.snap),
            ("unit_norm", t.unit_norm),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "tolerances.{name} must be a nonnegative number"
                )));
            }
        }
        let c = &self.corrector;
        if !(c.max_delete_fraction > 0.0 && c.max_delete_fraction < 1.0) {
            return bad("corrector.max_delete_fraction must lie in (0, 1)");
        }
        if !(c.temperature > 0.0) {
            return bad("corrector.temperature must be positive");
        }
        if !(0.0..=1.0).contains(&c.base_rate) {
            return bad("corrector.base_rate must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&c.baseline_decay) {
            return bad("corrector.baseline_decay must lie in [0, 1)");
        }
        Ok(())
    }

    /// Fully resolved configuration, defaults included.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn reassemble(&self) -> bool {
        self.game.reassemble.unwrap_or(self.game.dim > 8)
    }
}
