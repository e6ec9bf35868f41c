//! Walls, chain systems and median duals of finite graphs and of subspaces
//! of products, with exhaustive verifiers for the quantitative lemmas and a
//! global stability certificate for cylinders.

pub mod chain;
pub mod cylinders;
pub mod dual;
pub mod error;
pub mod gate;
pub mod generators;
pub mod geometry;
pub mod graph;
pub mod half;
pub mod instance;
pub mod metric;
pub mod product;
pub mod quasitree;
pub mod system;
pub mod ultrafilter;
pub mod verify;
pub mod wall;

pub use error::{Error, Result};
pub use graph::{GraphJson, MetricGraph, VertexLabel};
pub use half::Half;
pub use metric::{DistTable, FiniteMetric};
pub use ultrafilter::Ultrafilter;
pub use wall::{Wall, WallSet};
