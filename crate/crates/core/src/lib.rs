//! Tools for mining the proto-taxonomy hidden in chatbot intent identifiers
//! and putting it to work in intent recognizers.
//!
//! The pipeline: load a workspace of intents ([`corpus`]), recover the concept
//! structure of its intent identifiers ([`miner`]), turn that structure into a
//! graph ([`graph`]), embed the classes ([`embedders`]), train recognizers
//! that map utterances into the class-embedding space ([`recognizer`]), and
//! measure in-scope accuracy and out-of-scope rejection ([`eval`]).

mod util;

pub mod corpus;
pub mod embedders;
pub mod encoders;
pub mod eval;
pub mod graph;
pub mod miner;
pub mod nn;
pub mod recognizer;

pub mod cli;

pub use corpus::{Intent, Workspace};
pub use miner::{MiningReport, SeparatorKind};
