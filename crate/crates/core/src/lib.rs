pub mod constrained;
pub mod continuation;
pub mod format;
pub mod metrics;
pub mod problems;
pub mod refinement;
pub mod tessellation;
