//! Synthetic time-dependent data streams from structural causal models, with
//! scheduled concept drift, interventions and missing values, plus diagnostics and a
//! prequential evaluation harness.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32` or `f64`). Aliases for
//! both precisions are exported below.

pub mod analysis;
pub mod concept;
pub mod config;
pub mod csvio;
pub mod drift;
pub mod error;
pub mod eval;
pub mod generator;
pub mod graph;
pub mod mappers;
pub mod presets;
pub mod rng;
pub mod scalar;
pub mod temporal;

pub use analysis::{acf, chi_square_upper_tail, ljung_box, mmd2_rbf, mmd_heatmap, AcfResult, LjungBoxResult, MmdMatrix};
pub use concept::{init_concept, Concept, ConceptSettings, ConceptSnapshot, NodeMapper, NodePin};
pub use config::RunConfig;
pub use drift::{
    DriftRate, DriftSchedule, InterventionPolicy, Mechanism, RootChange, ShiftKind, ShiftSpec,
};
pub use error::{Error, Result};
pub use eval::{
    drift_response, prequential_run, DriftResponse, OnlineLearner, PrequentialCurve,
    PrequentialOptions,
};
pub use generator::{generate, FeatureValue, GeneratorConfig, Instance, Label, Sidecar, StreamGenerator};
pub use graph::{build_dag, CausalGraph, DagParams, NodeId, NodeKind, Task};
pub use scalar::Real;
pub use temporal::TemporalParams;

pub type Concept32 = Concept<f32>;
pub type Concept64 = Concept<f64>;
pub type GeneratorConfig32 = GeneratorConfig<f32>;
pub type GeneratorConfig64 = GeneratorConfig<f64>;
pub type StreamGenerator32 = StreamGenerator<f32>;
pub type StreamGenerator64 = StreamGenerator<f64>;
pub type Instance32 = Instance<f32>;
pub type Instance64 = Instance<f64>;
pub type DriftSchedule32 = DriftSchedule<f32>;
pub type DriftSchedule64 = DriftSchedule<f64>;
pub type RunConfig32 = RunConfig<f32>;
pub type RunConfig64 = RunConfig<f64>;
