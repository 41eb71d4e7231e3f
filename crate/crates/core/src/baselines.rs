//! Reference eviction policies: FIFO, LRU, CLIMB, LFU, CLOCK and SIEVE.
//!
//! All of them share the warmup rule from [`crate::types`]: while the cache
//! has free slots a miss never evicts, and the policy's insert position is
//! clamped to the first free slot.

use crate::types::{CacheState, Policy, PolicyKind, PolicyOutcome, RequestRecord};
use rustc_hash::FxHashMap;

/// Queue semantics materialized over slots: misses insert at position 1 and
/// evict position K; hits never reorder.
#[derive(Debug)]
pub struct Fifo {
    cache: CacheState,
}

impl Fifo {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
        }
    }
}

impl Policy for Fifo {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Fifo
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            return PolicyOutcome::hit_at(position, 0);
        }
        if self.cache.is_full() {
            let (evicted, shifts) = self.cache.replace(self.cache.capacity(), 1, request.key);
            PolicyOutcome::miss(Some(evicted), shifts)
        } else {
            let shifts = self.cache.insert_with_room(request.key, 1);
            PolicyOutcome::miss(None, shifts)
        }
    }
}

/// Move-to-front on hit; misses insert at position 1 and evict position K.
#[derive(Debug)]
pub struct Lru {
    cache: CacheState,
}

impl Lru {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
        }
    }
}

impl Policy for Lru {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Lru
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            let shifts = self.cache.promote(position, 1);
            return PolicyOutcome::hit_at(position, shifts);
        }
        if self.cache.is_full() {
            let (evicted, shifts) = self.cache.replace(self.cache.capacity(), 1, request.key);
            PolicyOutcome::miss(Some(evicted), shifts)
        } else {
            let shifts = self.cache.insert_with_room(request.key, 1);
            PolicyOutcome::miss(None, shifts)
        }
    }
}

/// Transpose on hit (swap with the neighbor above); misses replace the last
/// position.
#[derive(Debug)]
pub struct Climb {
    cache: CacheState,
}

impl Climb {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
        }
    }
}

impl Policy for Climb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Climb
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            let shifts = if position > 1 {
                self.cache.promote(position, position - 1)
            } else {
                0
            };
            return PolicyOutcome::hit_at(position, shifts);
        }
        if self.cache.is_full() {
            let k = self.cache.capacity();
            let (evicted, shifts) = self.cache.replace(k, k, request.key);
            PolicyOutcome::miss(Some(evicted), shifts)
        } else {
            let shifts = self
                .cache
                .insert_with_room(request.key, self.cache.capacity());
            PolicyOutcome::miss(None, shifts)
        }
    }
}

/// Hit counts for resident keys plus insertion sequence for tie-breaking.
/// Entries are dropped on eviction, so counts only reflect the current
/// residency.
#[derive(Debug, Default)]
struct FrequencyTable {
    counts: FxHashMap<u64, (u64, u64)>,
    next_seq: u64,
}

impl FrequencyTable {
    fn admit(&mut self, key: u64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.counts.insert(key, (1, seq));
    }

    fn bump(&mut self, key: u64) {
        self.counts
            .get_mut(&key)
            .expect("resident key must be counted")
            .0 += 1;
    }

    fn drop_key(&mut self, key: u64) {
        self.counts.remove(&key);
    }

    fn count(&self, key: u64) -> Option<u64> {
        self.counts.get(&key).map(|&(c, _)| c)
    }
}

/// Evicts the minimum-count resident key; ties go to the least recently
/// inserted. Replacement happens in place, so the slot order is stable.
#[derive(Debug)]
pub struct Lfu {
    cache: CacheState,
    frequency: FrequencyTable,
}

impl Lfu {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
            frequency: FrequencyTable::default(),
        }
    }

    /// Hit count of a resident key (test hook).
    pub fn count(&self, key: u64) -> Option<u64> {
        self.frequency.count(key)
    }

    fn victim_position(&self) -> usize {
        let mut best: Option<(u64, u64, usize)> = None;
        for (i, &key) in self.cache.keys().iter().enumerate() {
            let &(count, seq) = self
                .frequency
                .counts
                .get(&key)
                .expect("resident key must be counted");
            if best.is_none_or(|(bc, bs, _)| (count, seq) < (bc, bs)) {
                best = Some((count, seq, i + 1));
            }
        }
        best.expect("victim lookup on a non-empty cache").2
    }
}

impl Policy for Lfu {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Lfu
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            self.frequency.bump(request.key);
            return PolicyOutcome::hit_at(position, 0);
        }
        if self.cache.is_full() {
            let victim = self.victim_position();
            let (evicted, shifts) = self.cache.replace(victim, victim, request.key);
            self.frequency.drop_key(evicted);
            self.frequency.admit(request.key);
            PolicyOutcome::miss(Some(evicted), shifts)
        } else {
            let position = self.cache.occupancy() + 1;
            let shifts = self.cache.insert_with_room(request.key, position);
            self.frequency.admit(request.key);
            PolicyOutcome::miss(None, shifts)
        }
    }
}

/// Second-chance ring over the slots. Hits set the visited bit; eviction
/// scans forward from the hand, clearing bits, and replaces the first
/// unvisited slot in place.
#[derive(Debug)]
pub struct Clock {
    cache: CacheState,
    visited: Vec<bool>,
    hand: usize, // 0-based slot index
}

impl Clock {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
            visited: Vec::with_capacity(capacity),
            hand: 0,
        }
    }
}

impl Policy for Clock {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Clock
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            self.visited[position - 1] = true;
            return PolicyOutcome::hit_at(position, 0);
        }
        if !self.cache.is_full() {
            let position = self.cache.occupancy() + 1;
            let shifts = self.cache.insert_with_room(request.key, position);
            self.visited.push(false);
            return PolicyOutcome::miss(None, shifts);
        }
        let k = self.cache.capacity();
        while self.visited[self.hand] {
            self.visited[self.hand] = false;
            self.hand = (self.hand + 1) % k;
        }
        let victim = self.hand + 1;
        let (evicted, shifts) = self.cache.replace(victim, victim, request.key);
        self.visited[self.hand] = false;
        self.hand = (self.hand + 1) % k;
        PolicyOutcome::miss(Some(evicted), shifts)
    }
}

/// Lazy promotion / quick demotion: hits set the visited bit without moving
/// the object, new objects enter at the head, and eviction scans from the
/// hand toward the head for the first unvisited object.
#[derive(Debug)]
pub struct Sieve {
    cache: CacheState,
    visited: Vec<bool>,
    hand: usize, // 0-based slot index; starts at the tail
}

impl Sieve {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: CacheState::new(capacity),
            visited: Vec::with_capacity(capacity),
            hand: 0,
        }
    }

    fn step_toward_head(&self, index: usize) -> usize {
        if index == 0 {
            self.cache.occupancy() - 1
        } else {
            index - 1
        }
    }
}

impl Policy for Sieve {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Sieve
    }

    fn cache(&self) -> &CacheState {
        &self.cache
    }

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome {
        if let Some(position) = self.cache.position_of(request.key) {
            self.visited[position - 1] = true;
            return PolicyOutcome::hit_at(position, 0);
        }
        if !self.cache.is_full() {
            // Head insertion during warmup; the hand keeps tracking the tail
            // object, which every insertion pushes down one slot.
            let occ = self.cache.occupancy();
            let shifts = self.cache.insert_with_room(request.key, 1);
            self.visited.insert(0, false);
            if occ > 0 {
                self.hand += 1;
            }
            return PolicyOutcome::miss(None, shifts);
        }
        while self.visited[self.hand] {
            self.visited[self.hand] = false;
            self.hand = self.step_toward_head(self.hand);
        }
        let victim = self.hand + 1;
        let (evicted, shifts) = self.cache.replace(victim, 1, request.key);
        self.visited.remove(victim - 1);
        self.visited.insert(0, false);
        // The object that sat just above the victim lands on the victim's old
        // index after the shift, which is exactly the next scan candidate.
        if victim == 1 {
            self.hand = self.cache.occupancy() - 1;
        }
        PolicyOutcome::miss(Some(evicted), shifts)
    }
}
