//! Geometry of the unit sphere: points, rotations, band-limited quadrature
//! grids, and diameter-certified partitions.

pub mod partition;
pub mod point;
pub mod quadrature;

pub use partition::{build_partition, Cell, Partition, PartitionRing, C0_ACHIEVABLE, DELTA0_DEFAULT};
pub use point::{geodesic_distance, rotate_point, Rotation, UnitPoint};
pub use quadrature::QuadratureGrid;
