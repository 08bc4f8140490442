//! Finite bisimulation quotients of discrete-time switched linear systems
//! with an infinity-norm polyhedral Lyapunov function, plus synthesis and
//! verification of syntactically co-safe LTL specifications on top of them.

pub mod geometry;
pub mod lp;
pub mod lyapunov;
pub mod logic;
pub mod abstraction;
pub mod analysis;
pub mod io;
