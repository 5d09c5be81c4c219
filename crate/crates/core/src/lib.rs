//! Pre- and post-selected quantum ensembles, weak measurements with a von
//! Neumann pointer, and the superposed-evolutions time-translation machine.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`] dense complex state/operator algebra and exact unitary evolution,
//! * [`weakmeas`] weak values, exact pointer distributions and the
//!   measure / post-select / discard / average Monte Carlo procedure,
//! * [`timemachine`] coefficient design, effective kernels, fidelities and the
//!   classical (convex) time bound,
//! * [`suter`] Jones-calculus retarder with polarization filters, its two-branch
//!   machine mapping and the wave-packet distortion test,
//! * [`cli`] scenario parsing, dispatch and CSV/JSON emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod qcore;
pub mod rng;
pub mod suter;
pub mod timemachine;
pub mod weakmeas;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
