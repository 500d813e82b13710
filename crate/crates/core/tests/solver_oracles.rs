mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seqpack_core::model::Formula;
use seqpack_core::solver::{emit_smtlib, internal_decide, solve_formula};
use seqpack_core::{Backend, SolveResult};
use support::*;

fn check_against_enumeration(f: &Formula) -> bool {
    let expected = enumerate_verdict(f);
    match internal_decide(f, None).unwrap() {
        SolveResult::Sat(m) => {
            assert!(
                expected,
                "solver claims sat, enumeration says unsat:\n{}",
                emit_smtlib(f)
            );
            assert_eq!(
                f.eval(&m),
                Some(true),
                "model does not satisfy:\n{}",
                emit_smtlib(f)
            );
            true
        }
        SolveResult::Unsat => {
            assert!(
                !expected,
                "solver claims unsat, enumeration says sat:\n{}",
                emit_smtlib(f)
            );
            false
        }
        SolveResult::Timeout => panic!("no deadline was set"),
    }
}

#[test]
fn verdicts_match_enumeration_on_200_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x534f_4c56);
    let mut sat = 0;
    for _ in 0..200 {
        let f = random_formula(&mut rng, 3, 6, 3);
        sat += check_against_enumeration(&f) as usize;
    }
    // both verdicts must be well represented for the comparison to mean anything
    assert!((20..=180).contains(&sat), "{sat} of 200 satisfiable");
}

#[test]
fn larger_formulas_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c41_5247);
    for _ in 0..60 {
        let f = random_formula(&mut rng, 4, 9, 3);
        check_against_enumeration(&f);
    }
}

fn z3_available() -> bool {
    std::process::Command::new("z3")
        .arg("-version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn external_bridge_agrees_with_internal() {
    if !z3_available() {
        eprintln!("z3 not found, external bridge comparison skipped");
        return;
    }
    let backend = Backend::External("z3 -in -smt2".into());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a33);
    for _ in 0..40 {
        let f = random_formula(&mut rng, 3, 6, 3);
        let internal = internal_decide(&f, None).unwrap().is_sat();
        match solve_formula(&backend, &f, None).unwrap() {
            SolveResult::Sat(m) => {
                assert!(internal, "{}", emit_smtlib(&f));
                assert_eq!(f.eval(&m), Some(true));
            }
            SolveResult::Unsat => assert!(!internal, "{}", emit_smtlib(&f)),
            SolveResult::Timeout => panic!("no deadline was set"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn seeded_formulas_match_enumeration(seed in any::<u64>(), vars in 1usize..4, clauses in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, vars, clauses, 3);
        check_against_enumeration(&f);
    }
}
