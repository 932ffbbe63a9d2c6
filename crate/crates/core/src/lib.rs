//! Instance-dependent proportionality quotas for approval-based committee
//! elections.
//!
//! For a committee `W` and an axiom (JR, EJR or EJR+), the α-value is the
//! smallest scaling of the Hare quota `n/k` at which `W` satisfies the axiom.
//! This crate computes those values exactly, finds committees minimizing
//! them, implements common voting rules, exploits party-list and interval
//! structure, and runs the batch experiments comparing rules against the
//! optimum.

pub mod bitset;
pub mod domains;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod instance;
pub mod optimize;
pub mod rational;
pub mod rules;
pub mod sampling;
pub mod verify;

pub use bitset::{CandidateSet, VoterSet, MAX_CANDIDATES};
pub use error::{Error, Result};
pub use instance::{quota, Axiom, Committee, Format, Instance, Violation};
pub use optimize::{AlphaGrid, Method, OptimizationOutcome};
pub use rational::Rational;
pub use rules::{Rule, RuleOptions, RuleOutcome};
pub use verify::{AxiomResult, EjrEvaluator};
