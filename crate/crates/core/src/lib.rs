//! Quantification and detection of (k+1)-partite entanglement in N-qubit states.
//!
//! The crate is organised bottom-up:
//!
//! - [`qstate`]: dense pure states and density matrices, partial traces,
//!   purity, qubit permutations, local unitaries and the JSON state format.
//! - [`partitions`]: streaming enumeration of set partitions with bounded
//!   block size.
//! - [`concurrence`]: the exact (k+1)-PE concurrence of pure states.
//! - [`convexroof`]: seeded upper bounds on the mixed-state convex roof.
//! - [`pisym`]: permutationally invariant parts and the local-unitary
//!   lower-bound search built on them.
//! - [`detect`]: element functionals, criterion margins and detection degrees.
//! - [`families`]: GHZ / W / Dicke / product families with white noise,
//!   analytic element oracles, closed-form degree curves and random samplers.

pub mod concurrence;
pub mod convexroof;
pub mod detect;
mod error;
pub mod families;
pub mod optim;
pub mod partitions;
pub mod pisym;
pub mod qstate;

pub use error::{Error, Result};
