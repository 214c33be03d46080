//! Test support shared by the integration and acceptance suites.
//!
//! * [`interp`]: a concrete interpreter that checks properties at run time.
//! * [`oracle`]: reference consolidation and runtime-error site counting.
//! * [`corpus`]: small programs with bounded inputs.

pub mod corpus;
pub mod interp;
pub mod oracle;
