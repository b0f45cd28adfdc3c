use std::collections::BTreeMap;

use proptest::prelude::*;
use tartarus_bench::protocol::{to_line, Handshake, Request, Response, ResponseStatus, TaggedValue};
use tartarus_bench::store::EvaluationRecord;
use tartarus_bench::RecordStatus;

fn text() -> impl Strategy<Value = String> {
    // Quotes, backslashes, control and non-ASCII characters included.
    "[a-zA-Z0-9\\[\\]()=#@+\\-\"\\\\\n\t é→]{0,24}"
}

fn values() -> impl Strategy<Value = BTreeMap<String, TaggedValue>> {
    prop::collection::btree_map(text(), (-1e300f64..1e300, text()).prop_map(|(v, u)| TaggedValue { v, u }), 0..6)
}

proptest! {
    #[test]
    fn messages_survive_one_line(id in text(), smiles in text(), props in prop::collection::vec(text(), 0..5),
                                 vals in values(), error in prop::option::of(text()), ok in any::<bool>()) {
        let req = Request { id: id.clone(), smiles, props: props.clone() };
        let line = to_line(&req);
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(serde_json::from_str::<Request>(&line).unwrap(), req);

        let hs = Handshake { protocol: 1, props };
        prop_assert_eq!(serde_json::from_str::<Handshake>(&to_line(&hs)).unwrap(), hs);

        let status = if ok { ResponseStatus::Ok } else { ResponseStatus::Error };
        let resp = Response { id, status, values: vals, error };
        let line = to_line(&resp);
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(serde_json::from_str::<Response>(&line).unwrap(), resp);
    }

    #[test]
    fn store_records_round_trip(run in text(), key in text(), vals in values(), fitness in -1e4f64..1e4,
                                wall in 0.0f64..1e3, seq in any::<u64>(), budget in any::<u64>(), status in 0usize..4) {
        let status = [RecordStatus::Ok, RecordStatus::ConstraintFail, RecordStatus::ProviderError, RecordStatus::Timeout][status];
        let r = EvaluationRecord {
            seq,
            run,
            canonical_key: key,
            fingerprint: "00ff".into(),
            values: vals,
            status,
            fitness,
            passes_filters: status == RecordStatus::Ok,
            error: None,
            wall_seconds: wall,
            cache_hit: false,
            budget_after: budget,
        };
        let line = serde_json::to_string(&r).unwrap();
        let tag = format!("\"status\":\"{}\"", status.as_str());
        prop_assert!(line.contains(&tag));
        prop_assert_eq!(serde_json::from_str::<EvaluationRecord>(&line).unwrap(), r);
    }
}
