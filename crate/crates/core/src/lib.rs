//! Toolkit for the nu-calculus and its program logic with fresh names.
//!
//! The crate is layered bottom-up: [`term`] and [`reduce`] give the calculus,
//! [`logic`] and [`subst`] the assertion language, [`model`] and [`sat`] a bounded
//! semantic oracle, [`classify`] the syntactic side conditions, and [`kernel`]
//! the proof checker.

pub mod classify;
pub mod enumerate;
pub mod equiv;
pub mod eval;
pub mod fol;
pub mod kernel;
pub mod logic;
pub mod model;
pub mod parse;
pub mod reduce;
pub mod sat;
pub mod subst;
pub mod term;
