//! Parameter ingestion: an optional TOML file overridden by `--set` flags.

use std::fs;
use std::path::Path;

use mussel_bif::ModelParams;
use serde::Deserialize;

use crate::failure::{Failure, Outcome};

pub const KEYS: [&str; 6] = ["r", "alpha", "gamma", "d", "tau", "l"];

/// Parameter values before validation; absent keys fall back to the
/// reference set `r = 2, alpha = 0.1, gamma = 0.5, d = 1, tau = 0, l = 1`.
#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub tau: Option<f64>,
    pub l: Option<f64>,
}

impl ParamFile {
    pub fn parse(text: &str, origin: &str) -> Outcome<Self> {
        toml::from_str(text).map_err(|e| Failure::Usage(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "r" => &mut self.r,
            "alpha" => &mut self.alpha,
            "gamma" => &mut self.gamma,
            "d" => &mut self.d,
            "tau" => &mut self.tau,
            "l" => &mut self.l,
            _ => return None,
        })
    }

    /// Applies one `key=value` override.
    pub fn apply(&mut self, assignment: &str) -> Outcome<()> {
        let bad = |why: String| Failure::Usage(format!("--set {assignment}: {why}"));
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| bad("expected key=value".into()))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| bad(format!("value is not a number ({e})")))?;
        let slot = self
            .slot(key)
            .ok_or_else(|| bad(format!("unknown key, expected one of {}", KEYS.join(", "))))?;
        *slot = Some(value);
        Ok(())
    }

    pub fn resolve(&self) -> Outcome<ModelParams> {
        let reference = ModelParams::reference(0.0);
        ModelParams::new(
            self.r.unwrap_or(reference.r()),
            self.alpha.unwrap_or(reference.alpha()),
            self.gamma.unwrap_or(reference.gamma()),
            self.d.unwrap_or(reference.d()),
            self.tau.unwrap_or(reference.tau()),
            self.l.unwrap_or(reference.l()),
        )
        .map_err(Failure::from)
    }
}

/// File values (if any) with `overrides` applied in order; flags win.
pub fn load_params(path: Option<&Path>, overrides: &[String]) -> Outcome<ModelParams> {
    let mut file = match path {
        Some(p) => ParamFile::load(p)?,
        None => ParamFile::default(),
    };
    for assignment in overrides {
        file.apply(assignment)?;
    }
    file.resolve()
}
