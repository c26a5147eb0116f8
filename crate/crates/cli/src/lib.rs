//! Library half of the `rgcost` command: input loading, analyses, output
//! encoding and the experiment runner.

pub mod analyses;
pub mod error;
pub mod experiment;
pub mod inputs;
pub mod output;
