mod common;

use proptest::prelude::*;
use tartarus_core::mol::canonical_key;
use tartarus_core::selfies::{crossover, decode, default_alphabet, encode, mutate, randomized_smiles, SelfiesSequence};

use common::{corpus, within_valence};

fn random_sequence() -> impl Strategy<Value = SelfiesSequence> {
    let alphabet = default_alphabet();
    let n = alphabet.len();
    prop::collection::vec(0..n, 0..40)
        .prop_map(move |idx| SelfiesSequence::new(idx.into_iter().map(|i| alphabet[i]).collect()))
}

#[test]
fn corpus_round_trip_is_isomorphic() {
    for m in corpus() {
        let s = encode(m).unwrap();
        assert_eq!(canonical_key(&decode(&s)), canonical_key(m), "{s}");
    }
}

#[test]
fn text_form_round_trips() {
    for m in corpus().iter().take(200) {
        let s = encode(m).unwrap();
        let parsed: SelfiesSequence = s.to_string().parse().unwrap();
        assert_eq!(parsed, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn decoding_is_total_and_valence_safe(s in random_sequence()) {
        let m = decode(&s);
        prop_assert!(within_valence(&m), "{}", s);
        // Whatever comes out is itself encodable and stable.
        if !m.is_empty() {
            let again = decode(&encode(&m).unwrap());
            prop_assert_eq!(canonical_key(&again), canonical_key(&m));
        }
    }

    #[test]
    fn randomized_operations_are_pure(a in random_sequence(), b in random_sequence(), seed in any::<u64>()) {
        prop_assert_eq!(mutate(&a, seed), mutate(&a, seed));
        prop_assert_eq!(crossover(&a, &b, seed), crossover(&a, &b, seed));
        let m = decode(&a);
        prop_assert_eq!(randomized_smiles(&m, 3, seed), randomized_smiles(&m, 3, seed));
    }

    #[test]
    fn mutants_decode_within_valence(idx in 0usize..1000, seed in any::<u64>()) {
        let s = encode(&corpus()[idx]).unwrap();
        prop_assert!(within_valence(&decode(&mutate(&s, seed))));
    }
}
