//! Indexed structures behind [`build_fast`].
//!
//! * [`LeafCoordinateIndex`]: per leaf and dimension, the members ordered by
//!   coordinate, split by moving the shorter side.
//! * [`DimensionIntervalIndex`]: per dimension, a coverage segment tree over
//!   the elementary intervals holding each open leaf's extent. It gives the
//!   union length of the extents, samples uniformly from that union, and
//!   reports intervals that stop being covered.
//! * [`SplitHierarchy`]: the center extents of every tree node, which answer
//!   "which leaves does this cut split".
//! * [`WeightedIntervalSegTree`]: per dimension, a sum tree of the live
//!   `D_p` interval weights, fed by the coverage trees.

mod builder;
mod coverage;
mod hierarchy;
mod leaf_index;
mod weighted;

pub use builder::{build_fast, FastOptions, FastVariant};
pub use coverage::{CoverageTree, DimensionIntervalIndex};
pub use hierarchy::SplitHierarchy;
pub use leaf_index::{CoordKey, LeafCoordinateIndex, LeafId, LeafSplit};
pub use weighted::{sample_dp_fast, weighted_trees, WeightedIntervalSegTree};
