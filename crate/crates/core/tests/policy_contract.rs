//! Property tests for the uniform policy contract: every eviction algorithm
//! must keep the cache structurally valid, change the resident set by at
//! most {+requested key, -one evicted key} per request, and replay
//! bit-identically.

use cachesim::types::{PolicyConfig, PolicyKind, PolicyOutcome, RequestRecord};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn any_kind() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(PolicyKind::ALL.to_vec())
}

fn config_for(kind: PolicyKind, capacity: usize) -> PolicyConfig {
    if kind == PolicyKind::DynamicAdaptiveClimb {
        // Tight bounds so both resize directions are reachable in short runs.
        PolicyConfig::dynamic(capacity.max(2), 0.5, 2, 4 * capacity.max(2))
    } else {
        PolicyConfig::new(kind, capacity)
    }
}

fn replay(config: &PolicyConfig, keys: &[u64]) -> Vec<PolicyOutcome> {
    let mut policy = cachesim::build_policy(config).unwrap();
    keys.iter()
        .enumerate()
        .map(|(i, &key)| policy.on_request(&RequestRecord::new(i as u64, key, 1)))
        .collect()
}

proptest! {
    #[test]
    fn resident_set_changes_are_bounded(
        kind in any_kind(),
        capacity in 1usize..12,
        keys in prop::collection::vec(0u64..24, 1..300),
    ) {
        let config = config_for(kind, capacity);
        let mut policy = cachesim::build_policy(&config).unwrap();
        let mut previous: BTreeSet<u64> = BTreeSet::new();
        for (i, &key) in keys.iter().enumerate() {
            let out = policy.on_request(&RequestRecord::new(i as u64, key, 1));
            policy.cache().validate();
            let now: BTreeSet<u64> = policy.cache().keys().iter().copied().collect();

            // Hits never evict and never change the resident set.
            if out.hit {
                prop_assert!(out.evicted.is_none());
                prop_assert!(previous.contains(&key));
            } else {
                prop_assert!(now.contains(&key));
            }

            let added: Vec<u64> = now.difference(&previous).copied().collect();
            let removed: Vec<u64> = previous.difference(&now).copied().collect();
            prop_assert!(added.is_empty() || added == vec![key]);
            let shrink_discards = out.resize.map_or(0, |r| r.discarded) as usize;
            if shrink_discards == 0 {
                prop_assert!(removed.len() <= 1);
                if let Some(evicted) = out.evicted {
                    prop_assert_eq!(removed, vec![evicted]);
                }
            } else {
                // A halving may discard the bottom half on top of a
                // regular eviction.
                prop_assert!(removed.len() <= 1 + shrink_discards);
            }
            previous = now;
        }
    }

    #[test]
    fn outcome_streams_replay_bit_identically(
        kind in any_kind(),
        capacity in 1usize..10,
        keys in prop::collection::vec(0u64..20, 1..200),
    ) {
        let config = config_for(kind, capacity);
        prop_assert_eq!(replay(&config, &keys), replay(&config, &keys));
    }

    #[test]
    fn shifts_are_zero_when_order_is_unchanged(
        kind in any_kind(),
        capacity in 1usize..10,
        keys in prop::collection::vec(0u64..20, 1..200),
    ) {
        let config = config_for(kind, capacity);
        let mut policy = cachesim::build_policy(&config).unwrap();
        let mut previous: Vec<u64> = Vec::new();
        for (i, &key) in keys.iter().enumerate() {
            let out = policy.on_request(&RequestRecord::new(i as u64, key, 1));
            let now = policy.cache().keys().to_vec();
            if now == previous {
                prop_assert_eq!(out.shifts, 0);
            }
            previous = now;
        }
    }
}
