//! Compiler for a small DSP language.
//!
//! Source text is parsed ([`frontend`]) into a DSP operation graph
//! ([`graph`]), optimized with signal-processing rewrite patterns
//! ([`rewrite`]), lowered to an explicit loop IR ([`lowering`]) and executed
//! by an instrumented interpreter that counts loop trips, memory traffic and
//! arithmetic. [`kernels`] holds the reference semantics every stage is
//! checked against.

pub mod bench;
pub mod corpus;
pub mod frontend;
pub mod graph;
pub mod kernels;
pub mod lowering;
pub mod pipeline;
pub mod rewrite;
pub mod synth;
