//! A small CHR engine with the built-in theory needed by translated models.

pub mod equiv;
pub mod program;
pub mod solver;
pub mod step;
pub mod term;

pub use equiv::{normal_equiv, normalize, state_equiv, Normal, SolvedState};
pub use program::{print_program, Builtin, ChrRule, ChrState, UserConstraint};
pub use solver::{solve_builtins, ChrContext, Env, SolveError};
pub use step::{chr_step, StepResult};
pub use term::{Bindings, Term};
