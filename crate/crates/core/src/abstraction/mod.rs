//! Finite bisimulation quotient of the switched system on `X`.
//!
//! The embedding system moves `x` to `A_σx` outside the target `D` and
//! freezes it inside. The partition starts from regions, filler and `D`
//! cut by the Lyapunov slices, then every class of slice `i` splits the
//! classes above it by its preimages, slice by slice.

mod check;
mod quotient;
mod refine;
mod spec;

pub use check::{check_bisimulation, check_partition, locate, BisimReport, BisimViolation, PartitionReport};
pub use quotient::{arbitrary_switching_view, QuotientState, QuotientTS};
pub use refine::{
    build_quotient, compute_pre, initial_partition, Abstraction, AbstractionError,
    AbstractionOptions, RefineStats, Refinement,
};
pub use spec::{observation_of, OutsideDomain, ProblemSpec, SpecError, RESERVED_LABELS};

/// Observation of a class: one letter of the specification alphabet.
pub type Observation = crate::logic::Letter;
