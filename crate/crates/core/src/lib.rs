//! Toolchain for temporal properties of finite AsmetaL specifications.
//!
//! The pipeline mirrors how a designer works with an abstract state machine:
//! [`lang`] parses models, scenarios and properties; [`signature`] resolves
//! names and types; [`interp`] executes the machine; [`checker`] explores
//! its state space and decides CTL/LTL properties; [`smv`] emits a NuSMV
//! model; [`bridge`] turns traces into Avalla scenarios and embeds new
//! properties; [`agent`] drives a language model through elicitation,
//! formalization and explanation with checker feedback.

pub mod agent;
pub mod bridge;
pub mod checker;
pub mod cli;
pub mod diag;
pub mod lang;
pub mod interp;
pub mod signature;
pub mod smv;
