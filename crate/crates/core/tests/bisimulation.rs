use actr_chr::bisim::{bisim_check, bisim_check_with, Direction};
use actr_chr::engine::{explore, Dedup, FailRequest, Label, Program};
use actr_chr::testing::{drop_body_gamma, random_model, GenConfig};
use actr_chr::translate::chr_of_program;
use actr_chr::{parse_model, print_model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const COUNTING: &str = include_str!("../../cli/fixtures/counting.actr");

#[test]
fn random_models_match_their_translation() {
    let cfg = GenConfig::default();
    let mut effect_checks = 0;
    for seed in 0..60u64 {
        let model = random_model(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let program = Program::new(&model).unwrap();
        let report = bisim_check(&program, &model.initial_state().unwrap(), 3);
        assert!(
            report.passed(),
            "seed {seed}\n{}\n{}",
            print_model(&model),
            report.to_text()
        );
        effect_checks += report.effect_checks;
    }
    assert!(effect_checks > 100);
}

#[test]
fn dropping_a_gamma_breaks_the_counting_model() {
    let model = parse_model(COUNTING).unwrap();
    let program = Program::new(&model).unwrap();
    let broken = drop_body_gamma(&chr_of_program(&program).unwrap()).unwrap();
    let report = bisim_check_with(&program, &broken, &model.initial_state().unwrap(), 3);
    assert!(!report.passed());
    let back = report
        .counterexamples
        .iter()
        .find(|c| c.direction == Direction::Backward)
        .expect("a backward counterexample");
    assert_eq!(back.label, "inc");
    assert!(back.nearest.is_some());
    assert!(report.to_text().contains("backward counterexample"));
    assert!(report
        .to_json_lines()
        .lines()
        .any(|l| l.contains("\"direction\":\"backward\"")));
}

#[test]
fn dropping_a_gamma_breaks_random_models_where_the_rule_fires() {
    let cfg = GenConfig::default();
    let mut broken_runs = 0;
    for seed in 0..80u64 {
        let model = random_model(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let program = Program::new(&model).unwrap();
        let rules = chr_of_program(&program).unwrap();
        let Some(broken) = drop_body_gamma(&rules) else {
            continue;
        };
        let changed = rules
            .iter()
            .zip(&broken)
            .find(|(a, b)| a != b)
            .unwrap()
            .0
            .name
            .clone();
        let s0 = model.initial_state().unwrap();
        let graph = explore(&program, &s0, 2, Dedup::Canonical).unwrap();
        let fires = graph
            .edges
            .iter()
            .any(|e| e.label == Label::Apply(changed.as_str().into()));
        if !fires {
            continue;
        }
        broken_runs += 1;
        let report = bisim_check_with(&program, &broken, &s0, 3);
        assert!(
            report
                .counterexamples
                .iter()
                .any(|c| c.direction == Direction::Backward && c.label == changed),
            "seed {seed}\n{}",
            report.to_text()
        );
    }
    assert!(broken_runs > 20, "{broken_runs}");
}

#[test]
fn stuck_requests_leave_only_failed_chr_branches() {
    // A failed request has no engine successor and a failing CHR successor;
    // both sides agree that the rule does not fire.
    let model = parse_model(COUNTING).unwrap();
    let config =
        actr_chr::engine::ArchitectureConfig::default().with_fail_request(FailRequest::Stuck);
    let program = Program::with_config(&model, config).unwrap();
    let report = bisim_check(&program, &model.initial_state().unwrap(), 6);
    assert!(report.passed(), "{}", report.to_text());
    assert!(report.failed_branches > 0);
}
