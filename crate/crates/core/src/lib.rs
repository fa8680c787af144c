//! Desk-scale laboratory for self-consuming training loops on boolean
//! expressions: verifiable data generation, from-scratch sequence models,
//! data-cycle policies, and quality/diversity metrics.

pub mod datacycle;
pub mod expr;
pub mod metrics;
pub mod seeds;
