use actr_chr::ast::{BufferTest, Delay, DiagnosticKind};
use actr_chr::chr::{chr_step, normal_equiv, normalize, print_program, Normal};
use actr_chr::engine::{explore, isomorphic, Dedup, Program};
use actr_chr::store::Symbol;
use actr_chr::testing::{random_model, GenConfig};
use actr_chr::translate::{chr_of_model, chr_of_state};
use actr_chr::{parse_model, print_model, validate, AbstractState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64) -> actr_chr::Model {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

fn reachable(seed: u64, depth: usize) -> (Program, Vec<AbstractState>) {
    let m = model(seed);
    let p = Program::new(&m).unwrap();
    let g = explore(&p, &m.initial_state().unwrap(), depth, Dedup::Canonical).unwrap();
    (p, g.nodes)
}

fn well_formed(s: &AbstractState) -> bool {
    s.gamma.values().all(|c| s.store.contains(&c.chunk))
        && s.store
            .iter()
            .all(|c| c.slots.iter().all(|(_, v)| s.store.contains(v)))
        && s.upsilon
            .iter()
            .all(|a| a.args.iter().all(|x| s.store.contains(x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>()) {
        let m = model(seed);
        let text = print_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print_model(&back), text);
    }

    #[test]
    fn validation_survives_a_round_trip(seed in any::<u64>(), broken in 0usize..3) {
        let mut m = model(seed);
        let rule = &mut m.rules[0];
        match broken {
            0 => {}
            1 => rule.lhs.push(BufferTest {
                buffer: Symbol::new("visual"),
                ty: rule.lhs.first().map(|t| t.ty.clone()).unwrap_or_else(|| Symbol::new("t0")),
                pairs: vec![],
                span: Default::default(),
            }),
            _ => m.dm.push(actr_chr::ast::DmEntry { id: Symbol::new("ghost"), span: Default::default() }),
        }
        let diags = validate(&m);
        prop_assert_eq!(diags.is_empty(), broken == 0);
        let kinds = |d: &[actr_chr::ast::Diagnostic]| d.iter().map(|d| d.kind.clone()).collect::<Vec<DiagnosticKind>>();
        let again = validate(&parse_model(&print_model(&m)).unwrap());
        prop_assert_eq!(kinds(&again), kinds(&diags));
        prop_assert_eq!(kinds(&validate(&m)), kinds(&diags));
    }

    #[test]
    fn engine_successors_stay_well_formed(seed in any::<u64>()) {
        let (p, nodes) = reachable(seed, 3);
        for s in &nodes {
            prop_assert!(well_formed(s), "{s}");
            for (label, t) in p.successors(s).unwrap() {
                prop_assert!(well_formed(&t), "{t}");
                // the old store is kept verbatim
                for c in s.store.iter() {
                    prop_assert_eq!(t.store.get(&c.id), Some(c));
                }
                if label.rule_name() == "no" {
                    let revealed: Vec<&Symbol> = s.gamma.keys().filter(|b| s.gamma[*b] != t.gamma[*b]).collect();
                    prop_assert_eq!(revealed.len(), 1);
                    prop_assert_eq!(s.gamma[revealed[0]].delay, Delay::Pending);
                    prop_assert_eq!(t.gamma[revealed[0]].delay, Delay::Visible);
                }
            }
        }
    }

    #[test]
    fn translation_has_the_expected_shape(seed in any::<u64>()) {
        let m = model(seed);
        let (p, nodes) = reachable(seed, 2);
        for s in &nodes {
            let c = chr_of_state(s);
            prop_assert_eq!(c.goal.iter().filter(|u| u.pred == "delta" && u.args.len() == 1).count(), 1);
            prop_assert_eq!(c.goal.iter().filter(|u| u.pred == "gamma" && u.args.len() == 3).count(), p.buffers.len());
            prop_assert_eq!(c.goal.len(), 1 + p.buffers.len());
        }
        let rules = chr_of_model(&m).unwrap();
        prop_assert_eq!(rules.len(), m.rules.len() + 1);
        let text = print_program(&rules);
        prop_assert_eq!(text.lines().last().unwrap(), "no @ gamma(B,C,D) <=> D > 0 | gamma(B,C,0).");
    }

    #[test]
    fn chr_successors_are_ground_user_states(seed in any::<u64>()) {
        let m = model(seed);
        let (p, nodes) = reachable(seed, 2);
        let ctx = actr_chr::bisim::context(&p);
        let rules = chr_of_model(&m).unwrap();
        for s in &nodes {
            let step = chr_step(&chr_of_state(s), &rules, &ctx).unwrap();
            prop_assert!(!step.failed);
            for (_, succ) in &step.successors {
                prop_assert!(succ.goal.iter().all(|u| u.pred == "delta" || u.pred == "gamma"));
                match normalize(succ, &ctx).unwrap() {
                    Normal::Failed => {}
                    Normal::State(solved) => {
                        prop_assert!(solved.goal.iter().all(|u| u.args.iter().all(|a| a.is_ground())));
                        let back = actr_chr::translate::state_of_goal(&solved.goal, &solved.facts);
                        prop_assert!(back.as_ref().is_some_and(well_formed));
                    }
                }
            }
        }
    }

    #[test]
    fn state_equivalence_is_an_equivalence(seed in any::<u64>()) {
        let (p, nodes) = reachable(seed, 3);
        let ctx = actr_chr::bisim::context(&p);
        let normals: Vec<Normal> = nodes.iter().map(|s| normalize(&chr_of_state(s), &ctx).unwrap()).collect();
        let n = normals.len().min(8);
        for i in 0..n {
            prop_assert!(normal_equiv(&normals[i], &normals[i]));
            for j in 0..n {
                let eq = normal_equiv(&normals[i], &normals[j]);
                prop_assert_eq!(eq, normal_equiv(&normals[j], &normals[i]));
                prop_assert_eq!(eq, isomorphic(&nodes[i], &nodes[j]));
                for k in 0..n {
                    if eq && normal_equiv(&normals[j], &normals[k]) {
                        prop_assert!(normal_equiv(&normals[i], &normals[k]));
                    }
                }
            }
        }
    }

    #[test]
    fn renaming_generated_ids_preserves_equivalence(seed in any::<u64>()) {
        let (p, nodes) = reachable(seed, 3);
        let ctx = actr_chr::bisim::context(&p);
        for s in &nodes {
            let shifted = s.renamed(&|id| {
                match id.as_str().strip_prefix("c#") {
                    Some(n) => Symbol::new(format!("c#{}", 100 + n.parse::<u64>().unwrap())),
                    None => id.clone(),
                }
            });
            prop_assert!(isomorphic(s, &shifted));
            let a = normalize(&chr_of_state(s), &ctx).unwrap();
            let b = normalize(&chr_of_state(&shifted), &ctx).unwrap();
            prop_assert!(normal_equiv(&a, &b));
        }
    }
}
