//! Value-assignment machinery: root distributions, continuous effect mappers, the
//! analytic functions they learn, and categorical mappers for class nodes.

pub mod categorical;
pub mod continuous;
pub mod linear;
pub mod mlp;
pub mod root;
pub mod standardize;
pub mod target;
pub mod tree;

pub use categorical::{
    init_categorical_mapper, CategoricalKind, CategoricalMapper, Centroid, CentroidRange, Distance,
    Hyperplane, ParentStats,
};
pub use continuous::{
    fit_continuous_mapper, init_random_mlp, ContinuousKind, ContinuousMapper, ContinuousModel,
};
pub use root::{RootDistribution, RootKind, RootRanges};
pub use standardize::Standardizer;
pub use target::{TargetFunction, TargetKind, TargetShape};
