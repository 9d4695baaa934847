//! Building and scoring compositional-generalization benchmarks for
//! context-dependent text-to-SQL.

pub mod dataset;
pub mod drafter;
pub mod eval;
pub mod hash;
pub mod linker;
pub mod patterns;
pub mod recombine;
pub mod review;
pub mod schema;
pub mod sql;
