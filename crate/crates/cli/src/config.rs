//! Flat key-value run configuration.
//!
//! ```toml
//! xi = "rank 2 of 3"        # or [0, 1, 0]
//! alpha = -0.75
//! steps = 100000
//! seed = 7
//! n0 = 2                    # optional
//! initial_locations = "random"   # or [0.25, 0.75]
//! grid_points = 201         # or grid = [0.0, 0.5, 1.0]
//! checkpoints = [10, 100]   # or checkpoint_start / checkpoint_ratio
//! tracked = [0, 1]
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use rankpa::model::{uniform_grid, CheckpointSchedule, DEFAULT_CHECKPOINT_RATIO, DEFAULT_CHECKPOINT_START};
use rankpa::{ChoiceVector, InitialLocations, ModelConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum XiSpec {
    Weights(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LocationsSpec {
    Explicit(Vec<f64>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub r: Option<usize>,
    pub xi: XiSpec,
    pub alpha: f64,
    pub n0: Option<usize>,
    pub initial_locations: Option<LocationsSpec>,
    pub steps: u64,
    pub seed: u64,
    pub grid: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub checkpoint_start: Option<u64>,
    pub checkpoint_ratio: Option<f64>,
    pub tracked: Option<Vec<usize>>,
}

/// Parse `"rank k of r"`, `"[a, b, c]"` or `"a,b,c"`.
pub fn parse_xi(text: &str) -> Result<ChoiceVector> {
    let t = text.trim();
    let words: Vec<&str> = t.split_whitespace().collect();
    if let ["rank", k, "of", r] = words[..] {
        let k: usize = k.parse().with_context(|| format!("rank `{k}` is not an integer"))?;
        let r: usize = r.parse().with_context(|| format!("sample size `{r}` is not an integer"))?;
        return Ok(ChoiceVector::basis(k, r)?);
    }
    let inner = t.trim_start_matches('[').trim_end_matches(']');
    let weights = inner
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .with_context(|| format!("xi entry `{}` is not a number", w.trim()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChoiceVector::new(weights)?)
}

impl XiSpec {
    fn resolve(&self) -> Result<ChoiceVector> {
        match self {
            XiSpec::Weights(w) => Ok(ChoiceVector::new(w.clone())?),
            XiSpec::Text(t) => parse_xi(t),
        }
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn into_model(self) -> Result<ModelConfig> {
        let xi = self.xi.resolve().context("field `xi`")?;
        if let Some(r) = self.r {
            if r != xi.r() {
                bail!("field `r` = {r} does not match the {} entries of `xi`", xi.r());
            }
        }
        let mut config = ModelConfig::new(xi, self.alpha, self.steps, self.seed);
        if let Some(n0) = self.n0 {
            config.n0 = n0;
            config.tracked.retain(|&v| v < n0);
        }
        config.initial_locations = match self.initial_locations {
            None => InitialLocations::Random,
            Some(LocationsSpec::Explicit(l)) => InitialLocations::Explicit(l),
            Some(LocationsSpec::Keyword(k)) if k == "random" => InitialLocations::Random,
            Some(LocationsSpec::Keyword(k)) => {
                bail!("field `initial_locations`: expected \"random\" or a list, got \"{k}\"")
            }
        };
        match (self.grid, self.grid_points) {
            (Some(_), Some(_)) => bail!("give either `grid` or `grid_points`, not both"),
            (Some(grid), None) => config.grid = grid,
            (None, Some(points)) => config.grid = grid_of(points)?,
            (None, None) => {}
        }
        config.checkpoints = match (self.checkpoints, self.checkpoint_start, self.checkpoint_ratio) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                bail!("give either `checkpoints` or `checkpoint_start`/`checkpoint_ratio`, not both")
            }
            (Some(list), None, None) => CheckpointSchedule::Explicit(list),
            (None, start, ratio) => CheckpointSchedule::Geometric {
                start: start.unwrap_or(DEFAULT_CHECKPOINT_START),
                ratio: ratio.unwrap_or(DEFAULT_CHECKPOINT_RATIO),
            },
        };
        if let Some(tracked) = self.tracked {
            config.tracked = tracked;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn grid_of(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        bail!("a grid needs at least 2 points (got {points})");
    }
    Ok(uniform_grid(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = FileConfig::parse("r = 3\nxi = [0, 1, 0]\nalpha = 0.0\nsteps = 1000\nseed = 1\n")
            .unwrap()
            .into_model()
            .unwrap();
        assert_eq!(c.xi, ChoiceVector::basis(2, 3).unwrap());
        assert_eq!(c.grid.len(), 201);
        assert_eq!(c.n0, 2);
    }

    #[test]
    fn shorthand_and_overrides() {
        let text = r#"
xi = "rank 1 of 2"
alpha = -0.5
steps = 10
seed = 3
n0 = 3
initial_locations = [0.1, 0.5, 0.9]
grid_points = 11
checkpoint_start = 2
checkpoint_ratio = 2.0
tracked = [2]
"#;
        let c = FileConfig::parse(text).unwrap().into_model().unwrap();
        assert_eq!(c.xi, ChoiceVector::basis(1, 2).unwrap());
        assert_eq!(c.grid.len(), 11);
        assert_eq!(c.checkpoints.resolve(10), vec![0, 2, 4, 8, 10]);
        assert_eq!(c.initial_locations, InitialLocations::Explicit(vec![0.1, 0.5, 0.9]));
    }

    #[test]
    fn errors_name_the_problem() {
        let bad_alpha = FileConfig::parse("xi = [0, 1, 0]\nalpha = -1.5\nsteps = 1\nseed = 1\n")
            .unwrap()
            .into_model()
            .unwrap_err();
        assert!(format!("{bad_alpha:#}").contains("alpha must exceed -1"));

        let unknown = FileConfig::parse("xi = [0, 1, 0]\nalpha = 0\nsteps = 1\nseed = 1\nbeta = 2\n").unwrap_err();
        let msg = format!("{unknown:#}");
        assert!(msg.contains("beta") && msg.contains("line 5"), "{msg}");

        let wrong_type = FileConfig::parse("xi = [0, 1, 0]\nalpha = 0\nsteps = \"many\"\nseed = 1\n").unwrap_err();
        let msg = format!("{wrong_type:#}");
        assert!(msg.contains("steps") && msg.contains("line 3"), "{msg}");

        let mismatch = FileConfig::parse("r = 2\nxi = [0, 1, 0]\nalpha = 0\nsteps = 1\nseed = 1\n")
            .unwrap()
            .into_model()
            .unwrap_err();
        assert!(format!("{mismatch:#}").contains("`r`"));
    }

    #[test]
    fn xi_text_forms() {
        assert_eq!(parse_xi("rank 2 of 3").unwrap(), ChoiceVector::basis(2, 3).unwrap());
        assert_eq!(parse_xi("[0.5, 0, 0.5]").unwrap().weights(), &[0.5, 0.0, 0.5]);
        assert_eq!(parse_xi("0,1").unwrap(), ChoiceVector::basis(2, 2).unwrap());
        assert!(parse_xi("rank 4 of 3").is_err());
        assert!(parse_xi("0.5, 0.6").is_err());
    }
}
