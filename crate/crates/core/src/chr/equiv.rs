//! Equivalence of CHR states over the decidable fragment used by translated
//! programs.

use crate::ast::Atom;
use crate::chr::program::{ChrState, UserConstraint};
use crate::chr::solver::{solve_builtins, ChrContext, Env, SolveError};
use crate::chr::term::Term;
use crate::engine::isomorphic;
use crate::translate::state_of_goal;

/// A state in solved form: ground goal and the atoms that hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvedState {
    pub goal: Vec<UserConstraint>,
    pub facts: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normal {
    Failed,
    State(SolvedState),
}

/// Applies the equalities, evaluates every other built-in and keeps the
/// resulting atoms. Fails if a built-in is unsatisfiable; reports
/// `Undecided` if variables remain or the constraints are disjunctive.
pub fn normalize(state: &ChrState, ctx: &ChrContext) -> Result<Normal, SolveError> {
    let envs = solve_builtins(&state.builtins, Env::default(), ctx)?;
    let mut solved: Option<SolvedState> = None;
    for env in envs {
        let goal: Vec<UserConstraint> = state
            .goal
            .iter()
            .map(|c| c.map_terms(&|t| env.bindings.resolve(t)))
            .collect();
        if let Some(c) = goal.iter().find(|c| !c.args.iter().all(Term::is_ground)) {
            return Err(SolveError::Undecided(vec![
                crate::chr::program::Builtin::Fact(c.as_term()),
            ]));
        }
        let s = SolvedState {
            goal,
            facts: env.facts,
        };
        match &solved {
            None => solved = Some(s),
            Some(prev) if *prev == s => {}
            Some(_) => return Err(SolveError::Fault("state has several solutions".into())),
        }
    }
    Ok(match solved {
        None => Normal::Failed,
        Some(s) => Normal::State(s),
    })
}

fn sorted_goal(goal: &[UserConstraint]) -> Vec<UserConstraint> {
    let mut out: Vec<UserConstraint> = goal
        .iter()
        .map(|c| match (c.pred.as_str(), c.args.as_slice()) {
            ("delta", [Term::List(items)]) => {
                let mut items = items.clone();
                items.sort();
                UserConstraint::new("delta", vec![Term::List(items)])
            }
            _ => c.clone(),
        })
        .collect();
    out.sort();
    out
}

/// Equality of solved forms up to permutation of store lists and renaming
/// of generated chunk ids.
pub fn normal_equiv(a: &Normal, b: &Normal) -> bool {
    match (a, b) {
        (Normal::Failed, Normal::Failed) => true,
        (Normal::State(x), Normal::State(y)) => {
            match (
                state_of_goal(&x.goal, &x.facts),
                state_of_goal(&y.goal, &y.facts),
            ) {
                (Some(sx), Some(sy)) => isomorphic(&sx, &sy),
                _ => x.facts == y.facts && sorted_goal(&x.goal) == sorted_goal(&y.goal),
            }
        }
        _ => false,
    }
}

pub fn state_equiv(a: &ChrState, b: &ChrState, ctx: &ChrContext) -> Result<bool, SolveError> {
    Ok(normal_equiv(&normalize(a, ctx)?, &normalize(b, ctx)?))
}
