//! Auxiliary constructions: the `φ_m` and `β_j` families, the operators `S`
//! and `R`, and the partition-cutting plan.

mod families;
mod operators;
mod plan;

pub use families::{
    build_beta_family, build_phi_family, eta, BetaFamily, BetaPoly, DecayProbe, PhiFamily, DEFAULT_XI,
};
pub use operators::{op_r, op_s};
pub use plan::{
    default_a, execute_plan, execute_signed, regularize_partition, regularize_partition_with, regularize_signed,
    Branch, DecompositionPlan, Direction, Group, GroupKind, Item, LongCut, PlanReport, PlanSummary, SignedPlan,
    Source, CLASSES, MAX_COLORS, SHORT_MAX,
};
