//! The fiber-group abstraction shared by the nilpotent and compact cases.

use std::fmt::Debug;

/// A Lie group `G` acting on a homogeneous fiber `P` by left multiplication.
///
/// Points are stored as group elements; [`FiberGroup::canonical`] maps a
/// representative to the normal form of its class in `P` (lattice reduction
/// for nilmanifolds, renormalization for `SU(2)`).
pub trait FiberGroup: Clone + Send + Sync + 'static {
    type Point: Clone + Debug + Send + Sync + 'static;

    fn identity(&self) -> Self::Point;
    fn mul(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn inv(&self, a: &Self::Point) -> Self::Point;
    /// Exponential of the Lie algebra element with coordinates `v`.
    fn exp(&self, v: &[f64]) -> Self::Point;
    fn algebra_dim(&self) -> usize;
    fn canonical(&self, p: &Self::Point) -> Self::Point;
    /// Discrepancy between the classes of `a` and `b` in the fiber.
    fn fiber_distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
    fn compatible(&self, other: &Self) -> bool;
}
