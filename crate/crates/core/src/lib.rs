//! Unification, dismatching and local disunification for the description
//! logic EL.

pub mod cli;
pub mod dismatch;
pub mod engine;
pub mod error;
pub mod goal;
pub mod local;
pub mod normalize;
pub mod parse;
pub mod problem;
pub mod sat;
pub mod term;
