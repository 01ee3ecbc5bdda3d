use actr_chr::ast::{AbstractState, Delay};
use actr_chr::bisim::{bisim_check, effect_lemma_check, EffectVerdict};
use actr_chr::chr::{chr_step, normalize, state_equiv, Normal};
use actr_chr::engine::{isomorphic, match_rule, select, Label, Program, Substitution};
use actr_chr::parse_model;
use actr_chr::store::{Symbol, Variable};
use actr_chr::translate::{chr_of_program, chr_of_state};

const COUNTING: &str = include_str!("../../cli/fixtures/counting.actr");

fn setup() -> (Program, AbstractState) {
    let model = parse_model(COUNTING).unwrap();
    let s0 = model.initial_state().unwrap();
    (Program::new(&model).unwrap(), s0)
}

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

#[test]
fn sigma0_only_allows_the_no_rule() {
    let (p, s0) = setup();
    assert!(select(&s0, &p.rules).is_empty());
    let succ = p.successors(&s0).unwrap();
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].0, Label::No);
    assert_eq!(succ[0].1.gamma[&sym("retrieval")].delay, Delay::Visible);
    assert_eq!(succ[0].1.gamma[&sym("retrieval")].chunk, sym("b"));
}

#[test]
fn sigma1_fires_inc() {
    let (p, s0) = setup();
    let s1 = p.successors(&s0).unwrap().remove(0).1;
    let theta = match_rule(&p.rules[0], &s1).unwrap();
    let expected: Substitution = [
        (Variable::new("X"), sym("1")),
        (Variable::new("Y"), sym("2")),
    ]
    .into_iter()
    .collect();
    assert_eq!(theta, expected);
    let succ = p.successors(&s1).unwrap();
    assert_eq!(succ.len(), 1);
    let (label, s2) = &succ[0];
    assert_eq!(label.to_string(), "apply(inc)");
    let goal = s2.buffer_chunk(&sym("goal")).unwrap();
    assert_eq!(goal.ty, sym("g"));
    assert_eq!(goal.value(&sym("current")), Some(&sym("2")));
    let retrieval = &s2.gamma[&sym("retrieval")];
    assert_eq!(retrieval.delay, Delay::Pending);
    let r = s2.store.get(&retrieval.chunk).unwrap();
    assert_eq!(r.ty, sym("succ"));
    assert_eq!(r.value(&sym("number")), Some(&sym("2")));
    assert_eq!(r.value(&sym("successor")), Some(&sym("3")));
}

#[test]
fn chr_side_follows_the_same_derivation() {
    let (p, s0) = setup();
    let ctx = actr_chr::bisim::context(&p);
    let rules = chr_of_program(&p).unwrap();
    let step0 = chr_step(&chr_of_state(&s0), &rules, &ctx).unwrap();
    assert_eq!(step0.successors.len(), 1);
    assert_eq!(step0.successors[0].0, "no");
    let s1 = p.successors(&s0).unwrap().remove(0).1;
    assert!(state_equiv(&step0.successors[0].1, &chr_of_state(&s1), &ctx).unwrap());

    let step1 = chr_step(&chr_of_state(&s1), &rules, &ctx).unwrap();
    assert_eq!(step1.successors.len(), 1);
    assert_eq!(step1.successors[0].0, "inc");
    let s2 = p.successors(&s1).unwrap().remove(0).1;
    assert!(state_equiv(&step1.successors[0].1, &chr_of_state(&s2), &ctx).unwrap());
    let Normal::State(solved) = normalize(&step1.successors[0].1, &ctx).unwrap() else {
        panic!("failed successor");
    };
    let back = actr_chr::translate::state_of_goal(&solved.goal, &solved.facts).unwrap();
    assert!(isomorphic(&back, &s2));
}

#[test]
fn effect_lemma_on_sigma1() {
    let (p, s0) = setup();
    let s1 = p.successors(&s0).unwrap().remove(0).1;
    assert_eq!(
        effect_lemma_check(&p, &p.rules[0], &s1),
        EffectVerdict::Match(1)
    );
    assert_eq!(
        effect_lemma_check(&p, &p.rules[0], &s0),
        EffectVerdict::NotApplicable
    );
}

#[test]
fn bisimulation_to_depth_six() {
    let (p, s0) = setup();
    let report = bisim_check(&p, &s0, 6);
    assert!(report.passed(), "{}", report.to_text());
    assert!(report.nodes >= 4);
}
