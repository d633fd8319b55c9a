//! dagsmith: evolves linear genomes into typed expression DAGs.
//!
//! The pipeline: a linear genome of expression genes and OPEN/CLOSE markers is
//! translated into a nested program, compiled through a type-directed stack
//! process into a reified expression DAG, evaluated against benchmark cases,
//! and finally emitted as readable source text.

pub mod bench;
pub mod cli;
pub mod codegen;
pub mod dag;
pub mod evolve;
pub mod expr;
pub mod library;
pub mod push;
pub mod reify;
pub mod types;
pub mod value;
