mod common;

use canet_core::model::{
    events_to_csv, events_to_jsonl, parse_events_csv, parse_events_jsonl, parse_profiles_csv,
    parse_profiles_jsonl, profiles_to_csv, profiles_to_jsonl,
};
use canet_core::{canonicalize_dataset, validate_dataset};
use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn canonicalize_is_idempotent(ds in arb_dataset()) {
        let once = canonicalize_dataset(&ds);
        prop_assert_eq!(canonicalize_dataset(&once), once);
    }

    #[test]
    fn canonicalize_ignores_row_order(ds in arb_dataset(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = ds.clone();
        shuffled.events.shuffle(&mut rng(seed));
        prop_assert_eq!(canonicalize_dataset(&shuffled), canonicalize_dataset(&ds));
    }

    #[test]
    fn canonical_output_has_no_fixable_diagnostics(ds in arb_dataset()) {
        prop_assert!(validate_dataset(&canonicalize_dataset(&ds)).is_empty());
    }

    #[test]
    fn jsonl_round_trip(ds in arb_dataset()) {
        let c = canonicalize_dataset(&ds);
        prop_assert_eq!(parse_events_jsonl(&events_to_jsonl(&c.events)).unwrap(), c.events.clone());
        prop_assert_eq!(parse_profiles_jsonl(&profiles_to_jsonl(&c.profiles)).unwrap(), c.profiles);
    }

    #[test]
    fn csv_round_trip(ds in arb_dataset()) {
        let c = canonicalize_dataset(&ds);
        prop_assert_eq!(parse_events_csv(&events_to_csv(&c.events)).unwrap(), c.events.clone());
        prop_assert_eq!(parse_profiles_csv(&profiles_to_csv(&c.profiles)).unwrap(), c.profiles);
    }
}
