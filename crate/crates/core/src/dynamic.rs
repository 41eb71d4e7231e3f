//! DynamicAdaptiveClimb: AdaptiveClimb with an extended jump range, a second
//! counter tracking top-half hits, and capacity doubling/halving.
//!
//! `jump` may fall to `-floor(K/2)` and grow without bound between resizes.
//! `jump'` stays in `[-floor(K/2), 0]` and moves down on top-half hits, up on
//! bottom-half hits and misses. After every request:
//!
//! - `jump == 0` resets `jump'` to 0;
//! - `jump >= 2K` doubles the capacity (existing objects keep their
//!   positions) when `2K <= k_max`;
//! - `jump <= -floor(K/2)` together with `jump' <= -ceil(floor(K/2)*epsilon)`
//!   halves the capacity when `K/2 >= k_min`, keeping the top half and
//!   discarding the rest as shrink-evictions.
//!
//! Out-of-bounds triggers are suppressed but still reported. Threshold
//! comparisons are `<=`/`>=` rather than exact equality so a counter that
//! lands past the trigger point after a resize cannot deadlock it. After a
//! halving, `jump` is clamped to the new floor and `jump'` restarts at 0;
//! after a doubling `jump` is left alone (it numerically equals the new K,
//! which is exactly a fresh AdaptiveClimb initialization).

use crate::types::{
    CacheState, Policy, PolicyKind, PolicyOutcome, RequestRecord, ResizeEvent, ResizeKind,
    Telemetry,
};

#[derive(Debug)]
pub struct DynamicAdaptiveClimb {
    cache: CacheState,
    jump: i64,
    jump_prime: i64,
    epsilon: f64,
    k_min: usize,
    k_max: usize,
}

impl DynamicAdaptiveClimb {
    /// `capacity` must satisfy `2 <= k_min <= capacity <= k_max` and
    /// `epsilon` must lie in (0, 1]; use [`crate::PolicyConfig::validate`]
    /// for error reporting instead of panics.
    pub fn new(capacity: usize, epsilon: f64, k_min: usize, k_max: usize) -> Self {
        assert!(epsilon > 0.0 && epsilon <= 1.0, "epsilon must be in (0, 1]");
        assert!(
            2 <= k_min && k_min <= capacity && capacity <= k_max,
            "capacity bounds must satisfy 2 <= k_min <= capacity <= k_max"
        );
        Self {
            cache: CacheState::new(capacity),
            jump: capacity as i64,
            jump_prime: 0,
            epsilon,
            k_min,
            k_max,
        }
    }

    pub fn jump(&self) -> i64 {
        self.jump
    }

    pub fn jump_prime(&self) -> i64 {
        self.jump_prime
    }

    pub fn capacity(&self) -> usize {
        self.cache.capacity()
    }

    fn half(&self) -> i64 {
        (self.cache.capacity() / 2) as i64
    }

    /// `-ceil(floor(K/2) * epsilon)`: rounding toward the stricter (more
    /// negative) requirement.
    fn shrink_threshold(&self) -> i64 {
        -(((self.cache.capacity() / 2) as f64 * self.epsilon).ceil() as i64)
    }

    fn resize_check(&mut self) -> Option<ResizeEvent> {
        if self.jump == 0 {
            self.jump_prime = 0;
        }
        let k = self.cache.capacity();
        if self.jump >= 2 * k as i64 {
            let doubled = 2 * k;
            return Some(if doubled <= self.k_max {
                self.cache.grow(doubled);
                ResizeEvent {
                    kind: ResizeKind::Grow,
                    old_capacity: k,
                    new_capacity: doubled,
                    suppressed: false,
                    discarded: 0,
                }
            } else {
                ResizeEvent {
                    kind: ResizeKind::Grow,
                    old_capacity: k,
                    new_capacity: k,
                    suppressed: true,
                    discarded: 0,
                }
            });
        }
        if self.jump <= -self.half() && self.jump_prime <= self.shrink_threshold() {
            let halved = k / 2;
            return Some(if halved >= self.k_min {
                let discarded = self.cache.shrink(halved);
                self.jump = -self.half();
                self.jump_prime = 0;
                ResizeEvent {
                    kind: ResizeKind::Shrink,
                    old_capacity: k,
                    new_capacity: halved,
                    suppressed: false,
                    discarded,
                }
            } else {
                ResizeEvent {
                    kind: ResizeKind::Shrink,
                    old_capacity: k,
                    new_capacity: k,
                    suppressed: true,
                    discarded: 0,
                }
            });
        }
        None
    }

    fn telemetry(&self) -> Telemetry {
        Telemetry {
            jump: Some(self.jump),
            jump_prime: Some(self.jump_prime),
            capacity: Some(self.cache.capacity() as u64),
        }
    }
}

impl Policy for DynamicAdaptiveClimb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::DynamicAdaptiveClimb
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        let outcome = if let Some(position) = self.cache.position_of(request.key) {
            let k = self.cache.capacity();
            if self.jump > -self.half() {
                self.jump -= 1;
            }
            if position <= k / 2 {
                if self.jump_prime > -self.half() {
                    self.jump_prime -= 1;
                }
            } else if self.jump_prime < 0 {
                self.jump_prime += 1;
            }
            let shifts = if position > 1 {
                let actual_jump = self.jump.min(position as i64 - 1).max(1) as usize;
                self.cache.promote(position, position - actual_jump)
            } else {
                0
            };
            PolicyOutcome::hit_at(position, shifts)
        } else {
            let k = self.cache.capacity();
            self.jump += 1;
            if self.jump_prime < 0 {
                self.jump_prime += 1;
            }
            let actual_jump = self.jump.min(k as i64 - 1).max(1) as usize;
            let insert_position = k - actual_jump + 1;
            if self.cache.is_full() {
                let (evicted, shifts) = self.cache.replace(k, insert_position, request.key);
                PolicyOutcome::miss(Some(evicted), shifts)
            } else {
                let shifts = self.cache.insert_with_room(request.key, insert_position);
                PolicyOutcome::miss(None, shifts)
            }
        };
        let resize = self.resize_check();
        PolicyOutcome {
            telemetry: self.telemetry(),
            resize,
            ..outcome
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::SplitMix64;

    fn req(key: u64) -> RequestRecord {
        RequestRecord::new(0, key, 1)
    }

    fn with_state(
        capacity: usize,
        keys: &[u64],
        jump: i64,
        jump_prime: i64,
        k_min: usize,
        k_max: usize,
    ) -> DynamicAdaptiveClimb {
        let mut dac = DynamicAdaptiveClimb::new(capacity, 0.5, k_min, k_max);
        for (i, &k) in keys.iter().enumerate() {
            dac.cache.insert_with_room(k, i + 1);
        }
        dac.jump = jump;
        dac.jump_prime = jump_prime;
        dac
    }

    #[test]
    fn top_half_hit_decrements_both_counters() {
        let mut dac = with_state(8, &[1, 2, 3, 4, 5, 6, 7, 8], 3, -1, 2, 16);
        let out = dac.on_request(&req(2));
        assert!(out.hit);
        assert_eq!(dac.jump(), 2);
        assert_eq!(dac.jump_prime(), -2);
        // actualJump = max(1, min(2, 1)) = 1: a single-step promotion.
        assert_eq!(dac.cache().keys(), &[2, 1, 3, 4, 5, 6, 7, 8]);
        assert_eq!(out.shifts, 1);
    }

    #[test]
    fn floored_jump_forces_transpose_promotion() {
        let mut dac = with_state(8, &[1, 2, 3, 4, 5, 6, 7, 8], -4, 0, 2, 16);
        let out = dac.on_request(&req(6));
        assert!(out.hit);
        assert_eq!(dac.jump(), -4); // already at -K/2
        assert_eq!(dac.jump_prime(), 0); // bottom-half hit, already at cap
        assert_eq!(dac.cache().keys(), &[1, 2, 3, 4, 6, 5, 7, 8]);
        assert_eq!(out.shifts, 1);
    }

    #[test]
    fn top_position_hit_never_moves() {
        let mut dac = with_state(4, &[1, 2, 3, 4], 2, 0, 2, 8);
        let out = dac.on_request(&req(1));
        assert!(out.hit);
        assert_eq!(dac.cache().keys(), &[1, 2, 3, 4]);
        assert_eq!(out.shifts, 0);
    }

    #[test]
    fn negative_jump_miss_inserts_at_bottom() {
        let mut dac = with_state(4, &[1, 2, 3, 4], -2, 0, 2, 8);
        let out = dac.on_request(&req(9));
        assert_eq!(dac.jump(), -1);
        assert_eq!(out.evicted, Some(4));
        // actualJump = max(1, min(3, -1)) = 1: CLIMB-like bottom insertion.
        assert_eq!(dac.cache().keys(), &[1, 2, 3, 9]);
        assert_eq!(out.shifts, 0);
    }

    #[test]
    fn large_jump_miss_inserts_high() {
        let mut dac = with_state(4, &[1, 2, 3, 4], 5, 0, 2, 16);
        let out = dac.on_request(&req(9));
        assert_eq!(dac.jump(), 6);
        // actualJump = max(1, min(3, 6)) = 3: insert at position 2.
        assert_eq!(dac.cache().keys(), &[1, 9, 2, 3]);
        assert_eq!(out.evicted, Some(4));
        assert_eq!(out.shifts, 2);
    }

    #[test]
    fn doubling_fires_at_twice_capacity() {
        let mut dac = with_state(4, &[1, 2, 3, 4], 7, 0, 2, 16);
        let out = dac.on_request(&req(9));
        assert_eq!(dac.jump(), 8); // 2 * old K: trigger
        let resize = out.resize.expect("doubling expected");
        assert_eq!(resize.kind, ResizeKind::Grow);
        assert!(!resize.suppressed);
        assert_eq!((resize.old_capacity, resize.new_capacity), (4, 8));
        assert_eq!(dac.capacity(), 8);
        // jump equals the new K: a fresh AdaptiveClimb initialization.
        assert_eq!(dac.jump(), dac.capacity() as i64);
        assert_eq!(dac.cache().occupancy(), 4);
        dac.cache().validate();
    }

    #[test]
    fn sustained_misses_double_within_budget() {
        // Starting from jump = 0, at most 2K consecutive misses reach the
        // jump = 2K trigger.
        let mut dac = with_state(4, &[1, 2, 3, 4], 0, 0, 2, 64);
        let mut key = 100;
        let mut misses = 0;
        let doubled = loop {
            key += 1;
            misses += 1;
            if let Some(resize) = dac.on_request(&req(key)).resize {
                assert_eq!(resize.kind, ResizeKind::Grow);
                break true;
            }
            if misses == 8 {
                break false;
            }
        };
        assert!(doubled, "doubling did not fire within 2K misses");
        assert_eq!(misses, 8); // exactly 2K: jump walks 0 -> 2K
    }

    #[test]
    fn shrink_requires_both_thresholds_and_keeps_top_half() {
        // K=8, epsilon=0.5: shrink needs jump <= -4 and jump' <= -2.
        let mut dac = with_state(8, &[1, 2, 3, 4, 5, 6, 7, 8], -3, -2, 2, 16);
        // Top-half hit: jump -4, jump' -3 -> both thresholds met.
        let out = dac.on_request(&req(1));
        let resize = out.resize.expect("shrink expected");
        assert_eq!(resize.kind, ResizeKind::Shrink);
        assert!(!resize.suppressed);
        assert_eq!((resize.old_capacity, resize.new_capacity), (8, 4));
        assert_eq!(resize.discarded, 4);
        assert_eq!(dac.capacity(), 4);
        assert_eq!(dac.cache().keys(), &[1, 2, 3, 4]);
        // Counters restart for the new geometry.
        assert_eq!(dac.jump(), -2);
        assert_eq!(dac.jump_prime(), 0);
        dac.cache().validate();
    }

    #[test]
    fn jump_prime_above_threshold_blocks_shrink() {
        let mut dac = with_state(8, &[1, 2, 3, 4, 5, 6, 7, 8], -3, 0, 2, 16);
        let out = dac.on_request(&req(1));
        assert_eq!(dac.jump(), -4);
        assert_eq!(dac.jump_prime(), -1); // above the -2 threshold
        assert!(out.resize.is_none());
        assert_eq!(dac.capacity(), 8);
    }

    #[test]
    fn shrink_at_floor_is_suppressed() {
        let mut dac = with_state(4, &[1, 2, 3, 4], -1, -1, 4, 16);
        let out = dac.on_request(&req(1));
        assert_eq!(dac.jump(), -2);
        assert_eq!(dac.jump_prime(), -2);
        let resize = out.resize.expect("suppressed shrink reported");
        assert_eq!(resize.kind, ResizeKind::Shrink);
        assert!(resize.suppressed);
        assert_eq!(resize.new_capacity, 4);
        assert_eq!(dac.capacity(), 4);
        assert_eq!(dac.cache().keys(), &[1, 2, 3, 4]);
    }

    #[test]
    fn growth_at_cap_is_suppressed() {
        let mut dac = with_state(4, &[1, 2, 3, 4], 7, 0, 2, 4);
        let out = dac.on_request(&req(9));
        let resize = out.resize.expect("suppressed grow reported");
        assert_eq!(resize.kind, ResizeKind::Grow);
        assert!(resize.suppressed);
        assert_eq!(dac.capacity(), 4);
        // jump keeps growing past 2K while saturated at k_max.
        let out = dac.on_request(&req(10));
        assert_eq!(dac.jump(), 9);
        assert!(out.resize.unwrap().suppressed);
    }

    #[test]
    fn zero_jump_resets_jump_prime() {
        let mut dac = with_state(4, &[1, 2, 3, 4], 1, -2, 2, 8);
        dac.on_request(&req(1)); // hit: jump 1 -> 0
        assert_eq!(dac.jump(), 0);
        assert_eq!(dac.jump_prime(), 0);
    }

    #[test]
    fn counters_and_capacity_stay_in_range_on_random_streams() {
        let mut rng = SplitMix64::new(0xD1CE);
        for _ in 0..20 {
            let k0 = 4 + 2 * (rng.next_u64() % 5) as usize;
            let k_min = 2;
            let k_max = 8 * k0;
            let mut dac = DynamicAdaptiveClimb::new(k0, 0.5, k_min, k_max);
            for _ in 0..2_000 {
                let key = rng.next_u64() % 40;
                dac.on_request(&req(key));
                let k = dac.capacity();
                assert!(dac.jump() >= -((k / 2) as i64));
                assert!((-((k / 2) as i64)..=0).contains(&dac.jump_prime()));
                assert!((k_min..=k_max).contains(&k));
                // Capacity only moves by powers of two from the initial K.
                let (hi, lo) = if k >= k0 { (k, k0) } else { (k0, k) };
                assert!(hi % lo == 0 && (hi / lo).is_power_of_two());
                assert!(dac.cache().occupancy() <= k);
            }
            dac.cache().validate();
        }
    }

    #[test]
    fn shrink_needs_top_half_dominance() {
        // Counting from a jump' reset, the shrink threshold is only reachable
        // once top-half hits outnumber bottom-half hits plus misses by the
        // threshold amount.
        let mut dac = with_state(8, &[1, 2, 3, 4, 5, 6, 7, 8], 0, 0, 2, 16);
        // jump == 0 resets jump' every request until jump moves away.
        dac.on_request(&req(5)); // bottom-half hit: jump -1, jump' 0 (reset path)
        let mut top_minus_rest = 0i64;
        let mut fired = false;
        for key in [1u64, 2, 1, 2].iter().cycle().take(12) {
            let out = dac.on_request(&req(*key));
            top_minus_rest += 1;
            if out.resize.is_some_and(|r| !r.suppressed) {
                fired = true;
                break;
            }
        }
        assert!(fired);
        // Threshold -2 needed at least 2 net top-half decrements.
        assert!(top_minus_rest >= 2);
    }
}
