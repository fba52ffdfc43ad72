//! The JSON run document used by the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_LAGS;
use crate::error::{Error, Result};
use crate::eval::{PrequentialOptions, DEFAULT_WARMUP, DEFAULT_WINDOW};
use crate::generator::GeneratorConfig;
use crate::presets;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub lags: usize,
    pub batch_size: usize,
    /// Append the label column to the MMD embedding.
    pub include_label: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            lags: DEFAULT_LAGS,
            batch_size: 500,
            include_label: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationOptions {
    pub learner: Option<String>,
    pub window: usize,
    pub warmup: usize,
    pub delay: u64,
    pub label_fraction: f64,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions {
            learner: None,
            window: DEFAULT_WINDOW,
            warmup: DEFAULT_WARMUP,
            delay: 0,
            label_fraction: 1.0,
        }
    }
}

impl EvaluationOptions {
    pub fn prequential(&self, seed: u64) -> PrequentialOptions {
        PrequentialOptions {
            window: self.window,
            warmup: self.warmup,
            delay: self.delay,
            label_fraction: self.label_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub data: Option<PathBuf>,
    /// Defaults to the data path with a `.meta.json` suffix.
    pub sidecar: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Real"))]
pub struct RunConfig<F> {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Name of a built-in preset; exclusive with `generator`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub generator: Option<GeneratorConfig<F>>,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub evaluation: EvaluationOptions,
    #[serde(default)]
    pub output: OutputPaths,
}

impl<F: Real> RunConfig<F> {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn for_preset(name: &str, seed: Option<u64>) -> Result<Self> {
        presets::summary(name)?;
        Ok(RunConfig {
            seed,
            preset: Some(name.to_string()),
            generator: None,
            analysis: AnalysisOptions::default(),
            evaluation: EvaluationOptions::default(),
            output: OutputPaths::default(),
        })
    }

    /// The generator configuration this run describes.
    pub fn resolve_generator(&self) -> Result<GeneratorConfig<F>> {
        let cfg = match (&self.preset, &self.generator) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("`preset` and `generator` are exclusive".into()))
            }
            (Some(name), None) => presets::preset(name)?,
            (None, Some(g)) => g.clone(),
            (None, None) => return Err(Error::Config("a `preset` or a `generator` is required".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required to generate a stream".into()))
    }
}

/// Default sidecar location next to a data file.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::<f64>::from_json(r#"{"seed": 1, "preset": "dataset1", "bogus": 2}"#).is_err());
        assert!(RunConfig::<f64>::from_json(r#"{"preset": "dataset1", "analysis": {"lag": 3}}"#).is_err());
    }

    #[test]
    fn minimal_generator_document() {
        let doc = r#"{
            "seed": 7,
            "generator": {
                "dataset_size": 100,
                "p_m": 0.1,
                "dag": {"features": 4, "roots": 2, "min_parents": 1, "max_parents": 2},
                "temporal": {"alpha": 0.5, "rho": 0.2, "sigma": 0.1},
                "concept": {"n_classes": 3, "pins": {"0": {"mapper": "root", "kind": "uniform"}}}
            }
        }"#;
        let rc = RunConfig::<f64>::from_json(doc).unwrap();
        let g = rc.resolve_generator().unwrap();
        assert_eq!(g.dataset_size, 100);
        assert_eq!(g.concept.n_classes, 3);
        assert_eq!(rc.require_seed().unwrap(), 7);
    }

    #[test]
    fn preset_and_generator_are_exclusive() {
        let mut rc = RunConfig::<f64>::for_preset("dataset1", None).unwrap();
        assert!(rc.require_seed().is_err());
        assert!(rc.resolve_generator().is_ok());
        rc.generator = Some(presets::preset("dataset2").unwrap());
        assert!(rc.resolve_generator().is_err());
        assert!(RunConfig::<f64>::for_preset("nope", None).is_err());
    }

    #[test]
    fn sidecar_suffix() {
        assert_eq!(sidecar_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.meta.json"));
    }
}
