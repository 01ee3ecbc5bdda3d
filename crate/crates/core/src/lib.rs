//! Executable abstract semantics for ACT-R production systems, a translation
//! of models into Constraint Handling Rules, a small CHR engine, and a
//! bisimulation checker relating the two.

pub mod ast;
pub mod bisim;
pub mod chr;
pub mod engine;
pub mod parser;
pub mod store;
#[cfg(feature = "testing")]
pub mod testing;
pub mod translate;

pub use ast::{validate, AbstractState, Model, Rule};
pub use parser::{parse_model, print_model};
