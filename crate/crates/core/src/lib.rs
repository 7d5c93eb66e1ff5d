//! Stable sets of assignments (SSAs), the SemStr procedure and complete test
//! sets for combinational circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`formula`]: CNF clause database with resolution provenance and DIMACS I/O.
//! - [`ssa`]: neighbourhoods, SSA construction and certificate checking.
//! - [`sas`]: SemStr, a DPLL-style search over the exclude set that proves the
//!   remaining keep-set clauses unsatisfiable by building SSAs.
//! - [`circuit`]: gate-level circuits, Tseitin encoding, miters, bug injection.
//! - [`cts`]: complete test sets extracted from certificates.
//! - [`harness`]: experiment drivers, reports and the command implementations
//!   behind the `sas` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod circuit;
pub mod cts;
pub mod formula;
pub mod harness;
pub mod sas;
pub mod ssa;
