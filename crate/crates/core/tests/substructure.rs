mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use tartarus_core::pattern::{
    apply_filter_bank, compile_pattern, count_unique_matches, emitter_bank, find_match, has_match, FilterBank, Rule,
};

use common::{all_alerts, brute_force_has_match, small};

#[test]
fn matcher_agrees_with_brute_force_on_a_sample() {
    let alerts = all_alerts();
    for m in small().iter().step_by(4) {
        for p in &alerts {
            assert_eq!(has_match(m, p), brute_force_has_match(m, p), "{}", p.source());
        }
    }
}

#[test]
fn found_mappings_are_consistent_with_counts() {
    let alerts = all_alerts();
    for m in small().iter().take(60) {
        for p in &alerts {
            let found = find_match(m, p);
            assert_eq!(found.is_some(), has_match(m, p));
            assert_eq!(count_unique_matches(m, p) > 0, found.is_some(), "{}", p.source());
            if let Some(map) = found {
                let mut sorted = map.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), map.len(), "mapping must be injective");
            }
        }
    }
}

#[test]
fn empty_bank_passes_everything() {
    let bank = FilterBank::empty("none");
    for m in small() {
        assert!(apply_filter_bank(m, &bank, &BTreeMap::new()).unwrap().pass);
    }
}

fn with_extra_forbid(bank: &FilterBank, pattern: &str) -> FilterBank {
    let mut b = bank.clone();
    b.rules.push(Rule::Forbid {
        label: pattern.to_string(),
        pattern: compile_pattern(pattern).unwrap(),
    });
    b
}

const EXTRA: &[&str] = &["[N]", "C=C", "[OH]", "c1ccccc1", "[R2]", "C~C~C~C", "[!#6;!#1]", "[CH3]"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adding_a_forbid_never_turns_fail_into_pass(idx in 0usize..200, extra in 0usize..EXTRA.len()) {
        let m = &small()[idx];
        let base = emitter_bank();
        let empty = BTreeMap::new();
        let before = apply_filter_bank(m, &base, &empty).unwrap();
        let after = apply_filter_bank(m, &with_extra_forbid(&base, EXTRA[extra]), &empty).unwrap();
        prop_assert!(before.pass || !after.pass);
        prop_assert!(after.violations.len() >= before.violations.len());
    }

    #[test]
    fn verdicts_are_pure(idx in 0usize..200) {
        let m = &small()[idx];
        let bank = emitter_bank();
        let empty = BTreeMap::new();
        prop_assert_eq!(apply_filter_bank(m, &bank, &empty), apply_filter_bank(m, &bank, &empty));
    }

    #[test]
    fn match_is_invariant_under_renumbering(idx in 0usize..200, k in 0usize..64, seed in any::<u64>()) {
        let alerts = all_alerts();
        let p = &alerts[k % alerts.len()];
        let m = &small()[idx];
        let q = m.permuted(&common::random_order(m.atom_count(), seed));
        prop_assert_eq!(has_match(m, p), has_match(&q, p));
    }
}
