//! Metric families on flat n-space and the scalar-field expression language.

mod expr;
mod field;
mod instance;
mod metric;
mod schwarzschild;
mod spacetime;
mod surface;

pub use expr::{parse_field, polynomial_source, ExprField};
pub use field::{FieldRef, PiecewiseRadial, ScalarField, SingularSet};
pub use instance::{build_instance, load_instance, Family, FieldSpec, Instance, InstanceFile, RegionSpec, Shape};
pub use metric::{ConformalMetric, GraphMetric, MetricInstance, MetricJet, ZasResolution};
pub use schwarzschild::{
    embedding_induced_metric_residual, embedding_profile_residual, inversion_pullback_residual,
    schwarzschild_conformal_factor, schwarzschild_geometry, EmbeddingProfile, Horizon, SchwarzschildInstance,
};
pub use spacetime::{spacetime_components, SpacetimeInstance};
pub use surface::{SurfacePoint, SurfaceSpec};
pub(crate) use surface::ray_root;
