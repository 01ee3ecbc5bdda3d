//! Stepwise bisimulation between the engine and the translated CHR program.

use std::fmt::{self, Write as _};

use serde_json::json;

use crate::ast::{AbstractState, BufferContent, Delay, Rule, Value};
use crate::chr::{
    chr_step, normal_equiv, normalize, solve_builtins, ChrContext, ChrRule, Env, Normal, Term,
};
use crate::engine::{
    apply_transition, canonical, explore, interpret_rule, isomorphic, match_rule, state_hash,
    Dedup, Program,
};
use crate::translate::{
    chr_of_program, chr_of_rule, chr_of_state, chr_of_store, decode_store, VarPlan,
    MERGED_STORE_VAR, STORE_VAR,
};

/// Maximum bipartite matching (Kuhn's algorithm). Returns, for every left
/// vertex, the matched right vertex.
pub fn max_matching(
    left: usize,
    right: usize,
    edge: impl Fn(usize, usize) -> bool,
) -> Vec<Option<usize>> {
    let adj: Vec<Vec<usize>> = (0..left)
        .map(|i| (0..right).filter(|&j| edge(i, j)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; right];
    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..left {
        let mut seen = vec![false; right];
        augment(i, &adj, &mut seen, &mut owner);
    }
    let mut out = vec![None; left];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            out[*i] = Some(j);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// An engine transition without a CHR counterpart.
    Forward,
    /// A CHR transition without an engine counterpart.
    Backward,
    /// A CHR state could not be decided.
    Undecided,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub state_hash: String,
    pub state: String,
    pub direction: Direction,
    /// Label and rendering of the transition that has no counterpart.
    pub label: String,
    pub missing: String,
    /// The closest transition on the other side, if any.
    pub nearest: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BisimReport {
    pub depth: usize,
    pub nodes: usize,
    pub transitions: usize,
    pub counterexamples: Vec<Counterexample>,
    pub effect_checks: usize,
    /// CHR successors that normalized to the failed state.
    pub failed_branches: usize,
    pub effect_failures: Vec<String>,
}

impl BisimReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.effect_failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "bisimulation {}: depth {}, {} states, {} transitions, {} effect checks, {} failed CHR branches",
            if self.passed() { "PASS" } else { "FAIL" },
            self.depth,
            self.nodes,
            self.transitions,
            self.effect_checks,
            self.failed_branches
        );
        for c in &self.counterexamples {
            let _ = writeln!(
                out,
                "{} counterexample at state {} via {}:",
                c.direction, c.state_hash, c.label
            );
            for line in c.state.lines() {
                let _ = writeln!(out, "  {line}");
            }
            let _ = writeln!(out, "  missing: {}", c.missing);
            if let Some(n) = &c.nearest {
                let _ = writeln!(out, "  nearest: {n}");
            }
        }
        for f in &self.effect_failures {
            let _ = writeln!(out, "effect mismatch: {f}");
        }
        out
    }

    /// One JSON object per line: a summary record, then one per finding.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let summary = json!({
            "kind": "summary",
            "verdict": if self.passed() { "pass" } else { "fail" },
            "depth": self.depth,
            "nodes": self.nodes,
            "transitions": self.transitions,
            "effect_checks": self.effect_checks,
            "failed_branches": self.failed_branches,
            "counterexamples": self.counterexamples.len(),
        });
        let _ = writeln!(out, "{summary}");
        for c in &self.counterexamples {
            let rec = json!({
                "kind": "counterexample",
                "direction": c.direction.to_string(),
                "state": c.state_hash,
                "label": c.label,
                "missing": c.missing,
                "nearest": c.nearest,
            });
            let _ = writeln!(out, "{rec}");
        }
        for f in &self.effect_failures {
            let _ = writeln!(out, "{}", json!({"kind": "effect_mismatch", "detail": f}));
        }
        out
    }
}

pub fn context(program: &Program) -> ChrContext {
    ChrContext::new(program.types.clone(), program.config.clone())
}

/// Checks the translated program of `program` against the engine.
pub fn bisim_check(program: &Program, initial: &AbstractState, depth: usize) -> BisimReport {
    match chr_of_program(program) {
        Ok(rules) => bisim_check_with(program, &rules, initial, depth),
        Err(e) => BisimReport {
            depth,
            effect_failures: vec![format!("translation failed: {e}")],
            ..BisimReport::default()
        },
    }
}

fn goal_distance(a: &Normal, b: &Normal) -> usize {
    match (a, b) {
        (Normal::State(x), Normal::State(y)) => {
            x.goal.iter().filter(|c| !y.goal.contains(c)).count()
                + y.goal.iter().filter(|c| !x.goal.contains(c)).count()
        }
        (Normal::Failed, Normal::Failed) => 0,
        _ => usize::MAX,
    }
}

fn render(n: &Normal) -> String {
    match n {
        Normal::Failed => "failed".into(),
        Normal::State(s) => {
            let goal: Vec<String> = s.goal.iter().map(|c| c.to_string()).collect();
            goal.join(", ")
        }
    }
}

/// Like [`bisim_check`] with an explicit CHR program, so that altered
/// translations can be tested.
pub fn bisim_check_with(
    program: &Program,
    chr_rules: &[ChrRule],
    initial: &AbstractState,
    depth: usize,
) -> BisimReport {
    let ctx = context(program);
    let mut report = BisimReport {
        depth,
        ..BisimReport::default()
    };
    let graph = match explore(program, initial, depth, Dedup::Canonical) {
        Ok(g) => g,
        Err(e) => {
            report.effect_failures.push(format!("engine error: {e}"));
            return report;
        }
    };
    report.nodes = graph.nodes.len();
    for sigma in &graph.nodes {
        check_node(program, chr_rules, &ctx, sigma, &mut report);
    }
    report
}

fn check_node(
    program: &Program,
    chr_rules: &[ChrRule],
    ctx: &ChrContext,
    sigma: &AbstractState,
    report: &mut BisimReport,
) {
    let hash = state_hash(sigma);
    let undecided = |report: &mut BisimReport, what: String| {
        report.counterexamples.push(Counterexample {
            state_hash: hash.clone(),
            state: sigma.to_string(),
            direction: Direction::Undecided,
            label: "-".into(),
            missing: what,
            nearest: None,
        })
    };

    let engine = match program.successors(sigma) {
        Ok(s) => s,
        Err(e) => return undecided(report, format!("engine error: {e}")),
    };
    let chr = match chr_step(&chr_of_state(sigma), chr_rules, ctx) {
        Ok(r) => r.successors,
        Err(e) => return undecided(report, e.to_string()),
    };
    report.transitions += engine.len() + chr.len();

    // engine successors, one per class
    let mut left: Vec<(String, Normal)> = Vec::new();
    for (label, s) in &engine {
        let n = match normalize(&chr_of_state(s), ctx) {
            Ok(n) => n,
            Err(e) => return undecided(report, e.to_string()),
        };
        let label = label.rule_name().to_string();
        if !left.iter().any(|(l, m)| *l == label && normal_equiv(m, &n)) {
            left.push((label, n));
        }
    }
    let mut right: Vec<(String, Normal)> = Vec::new();
    for (label, s) in &chr {
        let n = match normalize(s, ctx) {
            Ok(n) => n,
            Err(e) => return undecided(report, e.to_string()),
        };
        // a rule instance whose body fails has no effect, like a stuck request
        if n == Normal::Failed {
            report.failed_branches += 1;
            continue;
        }
        if !right.iter().any(|(l, m)| l == label && normal_equiv(m, &n)) {
            right.push((label.clone(), n));
        }
    }

    let matching = max_matching(left.len(), right.len(), |i, j| {
        left[i].0 == right[j].0 && normal_equiv(&left[i].1, &right[j].1)
    });
    let mut matched_right = vec![false; right.len()];
    for m in matching.iter().flatten() {
        matched_right[*m] = true;
    }
    let nearest = |n: &Normal, others: &[(String, Normal)], label: &str| {
        others
            .iter()
            .filter(|(l, _)| l == label)
            .min_by_key(|(_, m)| goal_distance(n, m))
            .or_else(|| others.first())
            .map(|(l, m)| format!("{l}: {}", render(m)))
    };
    for (i, m) in matching.iter().enumerate() {
        if m.is_none() {
            let (label, n) = &left[i];
            report.counterexamples.push(Counterexample {
                state_hash: hash.clone(),
                state: sigma.to_string(),
                direction: Direction::Forward,
                label: label.clone(),
                missing: render(n),
                nearest: nearest(n, &right, label),
            });
        }
    }
    for (j, seen) in matched_right.iter().enumerate() {
        if !seen {
            let (label, n) = &right[j];
            report.counterexamples.push(Counterexample {
                state_hash: hash.clone(),
                state: sigma.to_string(),
                direction: Direction::Backward,
                label: label.clone(),
                missing: render(n),
                nearest: nearest(n, &left, label),
            });
        }
    }

    for rule in &program.rules {
        match effect_lemma_check(program, rule, sigma) {
            EffectVerdict::NotApplicable => {}
            EffectVerdict::Match(_) => report.effect_checks += 1,
            EffectVerdict::Mismatch(why) => {
                report.effect_checks += 1;
                report
                    .effect_failures
                    .push(format!("rule {} at state {hash}: {why}", rule.name));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffectVerdict {
    /// The rule does not match the state.
    NotApplicable,
    /// Both sides produced this many effects, matched one-to-one.
    Match(usize),
    Mismatch(String),
}

/// Compares the solutions of the translated body built-ins of `rule` with
/// the effects the engine computes, via the states they lead to.
pub fn effect_lemma_check(program: &Program, rule: &Rule, state: &AbstractState) -> EffectVerdict {
    let Some(theta) = match_rule(rule, state) else {
        return EffectVerdict::NotApplicable;
    };
    let ctx = context(program);
    let effects = match interpret_rule(rule, &theta, state, &program.types, &program.config) {
        Ok(e) => e,
        Err(e) => return EffectVerdict::Mismatch(format!("engine error: {e}")),
    };
    let engine_states: Vec<AbstractState> =
        match effects.iter().map(|e| apply_transition(state, e)).collect() {
            Ok(s) => s,
            Err(e) => return EffectVerdict::Mismatch(format!("engine error: {e}")),
        };

    let mut buffers = program.buffers.clone();
    buffers.sort();
    let chr_rule = match chr_of_rule(rule, &program.types, &buffers) {
        Ok(r) => r,
        Err(e) => return EffectVerdict::Mismatch(e.to_string()),
    };
    let plan = VarPlan::new(rule, &buffers);
    let mut env = Env::with_facts(state.upsilon.clone());
    let mut ok = env
        .bindings
        .unify(&Term::var(STORE_VAR), &chr_of_store(&state.store));
    for (b, c) in &state.gamma {
        ok &= env
            .bindings
            .unify(&Term::var(plan.cvar(b)), &Term::Sym(c.chunk.clone()));
        ok &= env
            .bindings
            .unify(&Term::var(plan.dvar(b)), &Term::Num(c.delay.as_number()));
    }
    for (v, c) in theta.iter() {
        ok &= env
            .bindings
            .unify(&plan.value(&Value::Var(v.clone())), &Term::Sym(c.clone()));
    }
    if !ok {
        return EffectVerdict::Mismatch("inconsistent bindings".into());
    }
    let envs = match solve_builtins(&chr_rule.body_builtins, env, &ctx) {
        Ok(e) => e,
        Err(e) => return EffectVerdict::Mismatch(e.to_string()),
    };
    let chr_states: Result<Vec<AbstractState>, String> = envs
        .iter()
        .map(|env| post_state(env, rule, state, &plan))
        .collect();
    let chr_states = match chr_states {
        Ok(s) => s,
        Err(e) => return EffectVerdict::Mismatch(e),
    };
    if chr_states.len() != engine_states.len() {
        return EffectVerdict::Mismatch(format!(
            "{} engine effects, {} built-in solutions",
            engine_states.len(),
            chr_states.len()
        ));
    }
    let m = max_matching(engine_states.len(), chr_states.len(), |i, j| {
        isomorphic(&engine_states[i], &chr_states[j])
    });
    if m.iter().all(Option::is_some) {
        EffectVerdict::Match(engine_states.len())
    } else {
        let i = m.iter().position(Option::is_none).unwrap_or(0);
        EffectVerdict::Mismatch(format!(
            "no built-in solution for engine effect leading to\n{}",
            canonical(&engine_states[i])
        ))
    }
}

fn post_state(
    env: &Env,
    rule: &Rule,
    state: &AbstractState,
    plan: &VarPlan,
) -> Result<AbstractState, String> {
    let store = decode_store(&env.bindings.resolve(&Term::var(MERGED_STORE_VAR)))?;
    let mut gamma = state.gamma.clone();
    for a in &rule.rhs {
        let id = match env.bindings.resolve(&Term::var(plan.mergeid(&a.buffer))) {
            Term::Sym(s) => s,
            other => return Err(format!("unbound merge id `{other}`")),
        };
        let delay = match env.bindings.resolve(&Term::var(plan.resdelay(&a.buffer))) {
            Term::Num(n) => Delay::from_number(n).ok_or("bad delay")?,
            other => return Err(format!("unbound delay `{other}`")),
        };
        gamma.insert(a.buffer.clone(), BufferContent::new(id, delay));
    }
    Ok(AbstractState::new(store, gamma, env.facts.clone()))
}
