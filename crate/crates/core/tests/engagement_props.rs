mod common;

use canet_core::engagement::{timeline_bins, BinWidth};
use canet_core::{
    canonicalize_dataset, classify_tweet, compute_exposure, lifespan_report, summarize_engagement,
    TweetKind,
};
use chrono::Duration;
use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn kinds_partition_the_tweets(ds in arb_dataset()) {
        let s = summarize_engagement(&ds).unwrap();
        prop_assert_eq!(s.regular_count + s.mention_count + s.retweet_count, s.total_tweets);
        let sum = s.sharing_degree + s.recommendation_level + s.spreading_degree;
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!((s.ct_index + s.it_index - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn classification_is_pure(ds in arb_dataset()) {
        for ev in &ds.events {
            let kind = classify_tweet(ev);
            prop_assert_eq!(kind, classify_tweet(&ev.clone()));
            if ev.retweet_of_user_id.is_some() {
                prop_assert_eq!(kind, TweetKind::Retweet);
            }
        }
    }

    #[test]
    fn exposure_ignores_duplicated_events(ds in arb_dataset(), pick in any::<prop::sample::Index>(), times in 1usize..4) {
        let base = compute_exposure(&ds);
        let who = ds.events[pick.index(ds.events.len())].user_id.clone();
        let mut dup = ds.clone();
        let extra: Vec<_> = ds.events.iter().filter(|e| e.user_id == who).cloned().collect();
        for t in 0..times {
            for e in &extra {
                let mut e = e.clone();
                e.event_id = format!("{}-dup{t}", e.event_id);
                dup.events.push(e);
            }
        }
        prop_assert_eq!(compute_exposure(&dup), base);
    }

    #[test]
    fn lifespan_and_dormancies(ds in arb_dataset(), days in 1u32..800) {
        let ds = canonicalize_dataset(&ds);
        let r = lifespan_report(&ds, days).unwrap();
        let all_same = ds.events.iter().all(|e| e.timestamp == ds.events[0].timestamp);
        prop_assert_eq!(r.lifespan_days == 0, all_same);
        for d in &r.dormancy_intervals {
            prop_assert!(d.end - d.start >= Duration::days(days as i64));
        }
        for w in r.dormancy_intervals.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
        prop_assert_eq!(r.awakening_events.len(), r.dormancy_intervals.len());
    }

    #[test]
    fn timeline_counts_sum_to_total(ds in arb_dataset()) {
        for width in [BinWidth::Day, BinWidth::Week, BinWidth::Month] {
            let bins = timeline_bins(&ds, width).unwrap();
            prop_assert_eq!(bins.iter().map(|b| b.count).sum::<u64>(), ds.events.len() as u64);
        }
    }
}
