//! Synthesis and verification of multilevel coordination control for
//! modular discrete-event systems.
//!
//! The crate is layered:
//!
//! * [`generator`] and [`ops`]: deterministic finite automata with marked
//!   states and the language operations on them (product, projection,
//!   closure, comparison);
//! * [`props`] and [`observer`]: decision procedures with witnesses for
//!   controllability, observability, normality, nonconflict and the
//!   observer property;
//! * [`supremal`]: supremal controllable and/or normal sublanguages;
//! * [`coordination`]: coordinator alphabets and group coordinators, and the
//!   flat and three-level conditional properties;
//! * [`multilevel`]: the combined top-down/bottom-up synthesis procedure;
//! * [`oracle`]: independent brute-force checks and random instances.

pub mod alphabet;
pub mod config;
pub mod coordination;
pub mod error;
pub mod generator;
pub mod io;
pub mod multilevel;
pub mod observer;
pub mod ops;
pub mod oracle;
pub mod props;
pub mod supremal;

pub use alphabet::{event_set, Alphabet, Event, EventSet, Word};
pub use config::{Config, CoordinatorScope, Limits, NormalityMode};
pub use error::{Error, Result};
pub use generator::{Acceptance, Generator, StateId};
pub use props::{ControlContext, Verdict, Witness};
