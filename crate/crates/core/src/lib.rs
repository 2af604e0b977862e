//! Exact homology of mapping class groups from the parallel slit complex.

pub mod cells;
pub mod complex;
pub mod exactlin;
pub mod homology;
pub mod orientation;
pub mod perm;
