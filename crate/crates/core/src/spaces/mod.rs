//! Deterministic generators for the test spaces: the antenna graph and its
//! closed forms, lattices, trees, random geometric graphs, horosphere clouds
//! and the tube surface around the antenna.

mod antenna;
mod horosphere;
mod lattice;
mod tube;

pub use antenna::{antenna_graph, antenna_height_field, antenna_oracles, AntennaOracles, AntennaSpec, Truncation};
pub use horosphere::{horosphere_cloud, HorosphereParams};
pub use lattice::{grid_graph, random_geometric_graph, tree_graph, RandomGeometricGraph};
pub use tube::{tube_surface_cloud, MetricErrorReport, TubeAxis, TubeSurface, TubeSurfaceSpec};
