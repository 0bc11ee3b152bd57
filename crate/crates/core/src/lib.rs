//! Certified computation of thickness-style invariants for planar dynamical
//! Cantor sets defined by contracting IFSs on a square, together with two
//! independent ways to certify that two such Cantor sets intersect: a
//! constructive chain built from the gap-lemma induction, and an exact
//! best-first overlap oracle for affine systems.
//!
//! Everything the crate certifies is reported as a closed interval `[lo, hi]`
//! that is guaranteed to contain the true value; decisions (well-balanced,
//! robust intersection, case selection) are taken only when the relevant
//! interval lies strictly on one side of the threshold.

pub mod error;
pub mod gap;
pub mod geometry;
pub mod grid;
pub mod ifs;
pub mod interval;
pub mod invariants;
pub mod io;
pub mod newhouse1d;
pub mod perturb;
pub mod render;

pub use error::Error;
pub use gap::{intersect_constructive, intersect_oracle, robust_check, IntersectionCertificate};
pub use geometry::{dist, overlap_exact, quarter_disk_in_square, Disk, OrientedSquare, Point};
pub use ifs::{ContractionMap, IfsSpec, Piece, Word};
pub use interval::Interval;
pub use invariants::{thickness, well_balanced, InvariantReport};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
