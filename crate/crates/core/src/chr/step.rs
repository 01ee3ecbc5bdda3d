//! One transition of the abstract CHR semantics.

use crate::chr::equiv::{normalize, Normal};
use crate::chr::program::{Builtin, ChrRule, ChrState, UserConstraint};
use crate::chr::solver::{solve_builtins, ChrContext, Env, SolveError};
use crate::chr::term::{Bindings, Term};
use crate::translate::atom_term;

#[derive(Debug, Clone, Default)]
pub struct StepResult {
    /// Successor states labelled with the rule that produced them.
    pub successors: Vec<(String, ChrState)>,
    /// The input state was failed.
    pub failed: bool,
}

/// Every injective assignment of `heads` to distinct goal constraints.
fn match_heads(
    heads: &[UserConstraint],
    goal: &[UserConstraint],
    used: &mut Vec<usize>,
    bindings: &Bindings,
    out: &mut Vec<(Bindings, Vec<usize>)>,
) {
    let Some((head, rest)) = heads.split_first() else {
        out.push((bindings.clone(), used.clone()));
        return;
    };
    for (i, c) in goal.iter().enumerate() {
        if used.contains(&i) || c.pred != head.pred || c.args.len() != head.args.len() {
            continue;
        }
        let mut b = bindings.clone();
        if head.args.iter().zip(&c.args).all(|(h, g)| b.unify(h, g)) {
            used.push(i);
            match_heads(rest, goal, used, &b, out);
            used.pop();
        }
    }
}

/// All successors of `state` under `program`. The input is first brought
/// into solved form; successors carry the rule's guard and body built-ins
/// together with the bindings of the rule's variables.
pub fn chr_step(
    state: &ChrState,
    program: &[ChrRule],
    ctx: &ChrContext,
) -> Result<StepResult, SolveError> {
    let solved = match normalize(state, ctx)? {
        Normal::Failed => {
            return Ok(StepResult {
                successors: vec![],
                failed: true,
            })
        }
        Normal::State(s) => s,
    };
    let goal = &solved.goal;
    let facts: Vec<Builtin> = solved
        .facts
        .iter()
        .map(|a| Builtin::Fact(atom_term(a)))
        .collect();
    let mut successors = Vec::new();
    for (k, rule) in program.iter().enumerate() {
        let rule = rule.renamed(&|v| format!("{v}@{k}"));
        let rule_vars = rule.vars();
        let heads: Vec<UserConstraint> = rule.kept.iter().chain(&rule.removed).cloned().collect();
        let mut matches = Vec::new();
        match_heads(
            &heads,
            goal,
            &mut Vec::new(),
            &Bindings::new(),
            &mut matches,
        );
        for (bindings, used) in matches {
            let removed: Vec<usize> = used[rule.kept.len()..].to_vec();
            let env = Env {
                bindings,
                facts: solved.facts.clone(),
                ids: Default::default(),
            };
            for guard_env in solve_builtins(&rule.guard, env, ctx)? {
                let body_envs = solve_builtins(&rule.body_builtins, guard_env.clone(), ctx)?;
                let remaining = goal
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !removed.contains(i))
                    .map(|(_, c)| c.clone());
                let new_goal: Vec<UserConstraint> =
                    remaining.chain(rule.body_user.iter().cloned()).collect();
                let mut raw = |env: &Env, failed: bool| {
                    let mut builtins: Vec<Builtin> = rule_vars
                        .iter()
                        .filter_map(|v| {
                            let value = env.bindings.resolve(&Term::var(v.clone()));
                            value
                                .is_ground()
                                .then(|| Builtin::Eq(Term::var(v.clone()), value))
                        })
                        .collect();
                    builtins.extend(rule.guard.iter().cloned());
                    builtins.extend(rule.body_builtins.iter().cloned());
                    builtins.extend(facts.iter().cloned());
                    if failed {
                        builtins.push(Builtin::False);
                    }
                    successors.push((
                        rule.name.clone(),
                        ChrState {
                            goal: new_goal.clone(),
                            builtins,
                            globals: Default::default(),
                        },
                    ));
                };
                if body_envs.is_empty() {
                    raw(&guard_env, true);
                }
                for env in &body_envs {
                    raw(env, false);
                }
            }
        }
    }
    Ok(StepResult {
        successors,
        failed: false,
    })
}
