use proptest::prelude::*;

use qraise_core::abduction::{self, AbductionInstance};
use qraise_core::default_logic::{self, DefaultTheory};
use qraise_core::harness::{
    generate_qbfs, reduce, solve, Instance, PrefixPattern, QbfGenSpec, Target,
};
use qraise_core::logic::{parse_qbf, serialize_qbf, Assignment, Formula, Qbf, Quantifier};
use qraise_core::planning::{self, PlanningInstance};

fn truth(q: &Qbf) -> bool {
    // enumerate the prefix as a binary counter, innermost variable fastest
    let vars: Vec<_> = q.prefix().iter().map(|(_, v)| v.clone()).collect();
    let n = vars.len();
    let mut values: Vec<bool> = (0..1usize << n)
        .map(|row| {
            let a: Assignment = vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), row >> (n - 1 - i) & 1 == 1))
                .collect();
            q.matrix().evaluate(&a).unwrap()
        })
        .collect();
    for (quant, _) in q.prefix().iter().rev() {
        values = values
            .chunks(2)
            .map(|p| match quant {
                Quantifier::Exists => p[0] || p[1],
                Quantifier::Forall => p[0] && p[1],
            })
            .collect();
    }
    values[0]
}

fn decide(target: Target, text: &str) -> bool {
    solve(&reduce(target, &parse_qbf(text).unwrap()).unwrap())
        .unwrap()
        .answer
}

#[test]
fn abduction_examples() {
    assert!(!decide(Target::Abduction, "forall y; : y"));
    assert!(decide(Target::Abduction, "exists x; : x <-> x"));
    assert!(decide(Target::Abduction, "exists x; forall y; : x | y"));
    assert!(!decide(Target::Abduction, "exists x; forall y; : x <-> y"));
}

#[test]
fn default_examples() {
    assert!(decide(Target::Default, "forall x; exists y; : x <-> y"));
    assert!(!decide(Target::Default, "forall x; exists y; : x & y"));
    assert!(decide(Target::Default, "exists y; : y"));
}

#[test]
fn planning_examples() {
    assert!(decide(Target::Planning, "forall x; exists y; : x <-> y"));
    assert!(!decide(Target::Planning, "exists x; forall y; : x <-> y"));
    assert!(decide(Target::Planning, ": true"));
    assert!(!decide(Target::Planning, ": false"));
    assert!(decide(
        Target::Planning,
        "forall x; exists y; forall z; : (x <-> y) | z | !z"
    ));
}

#[test]
fn reduced_instances_round_trip_through_files() {
    let qbfs = generate_qbfs(&QbfGenSpec::random(5, 3, PrefixPattern::Arbitrary, 60)).unwrap();
    for q in &qbfs {
        for target in Target::ALL {
            let Ok(instance) = reduce(target, q) else {
                continue;
            };
            let text = instance.to_text();
            let back = Instance::parse(target, &text).unwrap();
            assert_eq!(back, instance, "{target}: {text}");
        }
        assert_eq!(&parse_qbf(&serialize_qbf(q)).unwrap(), q);
    }
}

#[test]
fn instance_parsers_report_positions() {
    let e = AbductionInstance::parse("H: h\nM: m\nT: h -> \n").unwrap_err();
    assert_eq!(e.code(), "E_SYNTAX");
    assert!(e.to_string().starts_with("syntax error at 3:"), "{e}");
    let e = DefaultTheory::parse(": a\n").unwrap_err();
    assert_eq!(e.code(), "E_SYNTAX");
    let e = PlanningInstance::parse("fluents: a\ngoal: b\naction m: true => a\n").unwrap_err();
    assert_eq!(e.code(), "E_CONTRACT");
}

#[test]
fn reductions_reject_wrong_prefix_shapes() {
    let ae = parse_qbf("forall x; exists y; : x | y").unwrap();
    let ea = parse_qbf("exists x; forall y; : x | y").unwrap();
    assert_eq!(abduction::reduce_qbf(&ae).unwrap_err().code(), "E_SHAPE");
    assert_eq!(
        default_logic::reduce_qbf(&ea).unwrap_err().code(),
        "E_SHAPE"
    );
    assert!(planning::reduce_qbf(&ae).is_ok() && planning::reduce_qbf(&ea).is_ok());
}

#[test]
fn reserved_base_name_collides() {
    let q = parse_qbf("exists a; : a").unwrap();
    for target in Target::ALL {
        assert_eq!(reduce(target, &q).unwrap_err().code(), "E_COLLISION");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_supported_target_matches_truth(seed in any::<u64>()) {
        for q in generate_qbfs(&QbfGenSpec::random(seed, 4, PrefixPattern::Arbitrary, 4)).unwrap() {
            let expected = truth(&q);
            for target in Target::ALL {
                let supported = match target {
                    Target::Abduction => q.has_shape(Quantifier::Exists, Quantifier::Forall),
                    Target::Default => q.has_shape(Quantifier::Forall, Quantifier::Exists),
                    Target::Planning => true,
                };
                if supported {
                    let answer = solve(&reduce(target, &q).unwrap()).unwrap().answer;
                    prop_assert_eq!(answer, expected, "{} on {}", target, q);
                }
            }
        }
    }

    #[test]
    fn planning_witness_replays(seed in any::<u64>()) {
        for q in generate_qbfs(&QbfGenSpec::random(seed, 3, PrefixPattern::Arbitrary, 3)).unwrap() {
            let i = planning::reduce_qbf(&q).unwrap();
            if let Some(plan) = planning::plan_exists(&i).unwrap() {
                prop_assert!(planning::validate_plan(&i, &plan).unwrap());
                let last = *plan.0.last().unwrap();
                prop_assert!(i.actions()[last].effects.contains(&(i.goal().clone(), true)));
            }
        }
    }

    #[test]
    fn matrix_only_in_matrix_action(seed in any::<u64>()) {
        for q in generate_qbfs(&QbfGenSpec::random(seed, 4, PrefixPattern::Arbitrary, 2)).unwrap() {
            let i = planning::reduce_qbf(&q).unwrap();
            prop_assert_eq!(i.goal_setters().len(), 1);
            let m = i.matrix_action();
            let mut core = m.precondition.clone();
            // stripping the guards added by the raises recovers the matrix
            while let Formula::And(l, r) = &core {
                match &**r {
                    Formula::Var(v) if v.is_reserved() => core = (**l).clone(),
                    _ => break,
                }
            }
            prop_assert_eq!(&core, q.matrix());
        }
    }
}
