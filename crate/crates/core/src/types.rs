//! Domain types shared by every policy and the request-handling contract.
//!
//! A cache is modeled as an ordered sequence of slots; position 1 is the top.
//! Capacity counts slots (objects), not bytes — byte sizes flow only into
//! metrics. Positions are 1-based throughout the public API.

use rustc_hash::FxHashMap;
use std::fmt;
use std::str::FromStr;

/// One trace event: a request for object `key` at logical time `timestamp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestRecord {
    pub timestamp: u64,
    pub key: u64,
    /// Object size in bytes. Must be >= 1; zero-size records are rejected at
    /// ingestion (trace readers and generators).
    pub size: u32,
}

impl RequestRecord {
    pub fn new(timestamp: u64, key: u64, size: u32) -> Self {
        Self {
            timestamp,
            key,
            size,
        }
    }
}

/// Per-request counters reported by adaptive policies; empty for static ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Telemetry {
    pub jump: Option<i64>,
    pub jump_prime: Option<i64>,
    pub capacity: Option<u64>,
}

impl Telemetry {
    pub fn is_empty(&self) -> bool {
        self.jump.is_none() && self.jump_prime.is_none() && self.capacity.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeKind {
    Grow,
    Shrink,
}

/// A capacity change (or a suppressed trigger) reported by a resizing policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeEvent {
    pub kind: ResizeKind,
    pub old_capacity: usize,
    /// Equals `old_capacity` when the trigger was suppressed by a bound.
    pub new_capacity: usize,
    pub suppressed: bool,
    /// Number of resident objects discarded by a shrink (never counted as
    /// ordinary evictions).
    pub discarded: u64,
}

/// The result of handling one request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolicyOutcome {
    pub hit: bool,
    /// 1-based position at which the key was found; `None` on a miss.
    pub position: Option<usize>,
    /// Key evicted to make room; `None` on hits and warmup misses.
    pub evicted: Option<u64>,
    /// Number of resident objects displaced by exactly one slot.
    pub shifts: u64,
    pub telemetry: Telemetry,
    pub resize: Option<ResizeEvent>,
}

impl PolicyOutcome {
    pub(crate) fn hit_at(position: usize, shifts: u64) -> Self {
        Self {
            hit: true,
            position: Some(position),
            shifts,
            ..Self::default()
        }
    }

    pub(crate) fn miss(evicted: Option<u64>, shifts: u64) -> Self {
        Self {
            evicted,
            shifts,
            ..Self::default()
        }
    }
}

/// Ordered cache slots plus an inverse key-to-position index.
///
/// Invariants: all resident keys are distinct, `index` is exactly the inverse
/// of the slot order, and occupancy never exceeds capacity.
#[derive(Debug, Clone)]
pub struct CacheState {
    slots: Vec<u64>,
    index: FxHashMap<u64, u32>,
    capacity: usize,
}

impl CacheState {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "cache capacity must be at least 1");
        Self {
            slots: Vec::with_capacity(capacity),
            index: FxHashMap::default(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn occupancy(&self) -> usize {
        self.slots.len()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    /// Resident keys in position order; `keys()[0]` is position 1.
    pub fn keys(&self) -> &[u64] {
        &self.slots
    }

    pub fn contains(&self, key: u64) -> bool {
        self.index.contains_key(&key)
    }

    /// 1-based position of `key`, if resident.
    pub fn position_of(&self, key: u64) -> Option<usize> {
        self.index.get(&key).map(|&i| i as usize + 1)
    }

    /// Key at 1-based `position`, if occupied.
    pub fn key_at(&self, position: usize) -> Option<u64> {
        if position == 0 {
            return None;
        }
        self.slots.get(position - 1).copied()
    }

    /// Moves the key at `position` up to `target` (both 1-based,
    /// `target <= position`); the keys in `[target, position)` each move down
    /// one slot. Returns the number of displaced keys.
    pub fn promote(&mut self, position: usize, target: usize) -> u64 {
        debug_assert!(1 <= target && target <= position && position <= self.slots.len());
        if target == position {
            return 0;
        }
        let moving = self.slots[position - 1];
        for i in (target..position).rev() {
            let shifted = self.slots[i - 1];
            self.slots[i] = shifted;
            self.index.insert(shifted, i as u32);
        }
        self.slots[target - 1] = moving;
        self.index.insert(moving, target as u32 - 1);
        (position - target) as u64
    }

    /// Inserts `key` at `position` while there is room, clamping the position
    /// to `occupancy + 1`; the keys from the insert position downward each
    /// move down one slot. Returns the number of displaced keys.
    pub fn insert_with_room(&mut self, key: u64, position: usize) -> u64 {
        debug_assert!(!self.is_full());
        debug_assert!(!self.index.contains_key(&key));
        debug_assert!(position >= 1);
        let occ = self.slots.len();
        let pos = position.min(occ + 1);
        self.slots.insert(pos - 1, key);
        for i in pos - 1..self.slots.len() {
            self.index.insert(self.slots[i], i as u32);
        }
        (occ + 1 - pos) as u64
    }

    /// Full-cache miss path: removes the key at `evict_position` and inserts
    /// `key` at `insert_position` (1-based, `insert_position <=
    /// evict_position`); the keys in `[insert_position, evict_position)` each
    /// move down one slot. Returns the evicted key and the shift count.
    pub fn replace(
        &mut self,
        evict_position: usize,
        insert_position: usize,
        key: u64,
    ) -> (u64, u64) {
        debug_assert!(1 <= insert_position && insert_position <= evict_position);
        debug_assert!(evict_position <= self.slots.len());
        debug_assert!(!self.index.contains_key(&key));
        let evicted = self.slots[evict_position - 1];
        self.index.remove(&evicted);
        for i in (insert_position..evict_position).rev() {
            let shifted = self.slots[i - 1];
            self.slots[i] = shifted;
            self.index.insert(shifted, i as u32);
        }
        self.slots[insert_position - 1] = key;
        self.index.insert(key, insert_position as u32 - 1);
        (evicted, (evict_position - insert_position) as u64)
    }

    /// Raises the capacity; resident keys keep their positions and the new
    /// slots start free.
    pub fn grow(&mut self, new_capacity: usize) {
        debug_assert!(new_capacity >= self.capacity);
        self.capacity = new_capacity;
    }

    /// Lowers the capacity, discarding any keys below the new bound (top
    /// positions are retained). Returns the number of discarded keys.
    pub fn shrink(&mut self, new_capacity: usize) -> u64 {
        debug_assert!(new_capacity >= 1);
        let discarded = self.slots.len().saturating_sub(new_capacity);
        for key in self.slots.drain(new_capacity.min(self.slots.len())..) {
            self.index.remove(&key);
        }
        self.capacity = new_capacity;
        discarded as u64
    }

    /// Panics unless the structural invariants hold. Used by tests.
    pub fn validate(&self) {
        assert!(
            self.slots.len() <= self.capacity,
            "occupancy exceeds capacity"
        );
        assert_eq!(self.slots.len(), self.index.len(), "index size mismatch");
        for (i, &key) in self.slots.iter().enumerate() {
            assert_eq!(
                self.index.get(&key).copied(),
                Some(i as u32),
                "index is not the inverse of the slot order at position {}",
                i + 1
            );
        }
    }
}

/// The eviction policies the toolkit implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Fifo,
    Lru,
    Climb,
    Lfu,
    Clock,
    Sieve,
    AdaptiveClimb,
    DynamicAdaptiveClimb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::Fifo,
        PolicyKind::Lru,
        PolicyKind::Climb,
        PolicyKind::Lfu,
        PolicyKind::Clock,
        PolicyKind::Sieve,
        PolicyKind::AdaptiveClimb,
        PolicyKind::DynamicAdaptiveClimb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Fifo => "FIFO",
            PolicyKind::Lru => "LRU",
            PolicyKind::Climb => "CLIMB",
            PolicyKind::Lfu => "LFU",
            PolicyKind::Clock => "CLOCK",
            PolicyKind::Sieve => "SIEVE",
            PolicyKind::AdaptiveClimb => "AdaptiveClimb",
            PolicyKind::DynamicAdaptiveClimb => "DynamicAdaptiveClimb",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match lower.as_str() {
            "fifo" => PolicyKind::Fifo,
            "lru" => PolicyKind::Lru,
            "climb" => PolicyKind::Climb,
            "lfu" => PolicyKind::Lfu,
            "clock" => PolicyKind::Clock,
            "sieve" => PolicyKind::Sieve,
            "adaptiveclimb" | "ac" => PolicyKind::AdaptiveClimb,
            "dynamicadaptiveclimb" | "dac" => PolicyKind::DynamicAdaptiveClimb,
            _ => return Err(format!("unknown policy: {s}")),
        })
    }
}

/// A validated policy selection. `epsilon`, `k_min` and `k_max` are only
/// legal for DynamicAdaptiveClimb.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Initial capacity `K` in slots.
    pub capacity: usize,
    /// Shrink sensitivity threshold in (0, 1].
    pub epsilon: Option<f64>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, capacity: usize) -> Self {
        Self {
            kind,
            capacity,
            epsilon: None,
            k_min: None,
            k_max: None,
        }
    }

    pub fn dynamic(capacity: usize, epsilon: f64, k_min: usize, k_max: usize) -> Self {
        Self {
            kind: PolicyKind::DynamicAdaptiveClimb,
            capacity,
            epsilon: Some(epsilon),
            k_min: Some(k_min),
            k_max: Some(k_max),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.capacity == 0 {
            return Err(ConfigError::ZeroCapacity);
        }
        if self.kind != PolicyKind::DynamicAdaptiveClimb {
            if self.epsilon.is_some() {
                return Err(ConfigError::DynamicOnlyOption("epsilon"));
            }
            if self.k_min.is_some() {
                return Err(ConfigError::DynamicOnlyOption("k-min"));
            }
            if self.k_max.is_some() {
                return Err(ConfigError::DynamicOnlyOption("k-max"));
            }
            return Ok(());
        }
        let epsilon = self.epsilon.unwrap_or(0.5);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ConfigError::EpsilonOutOfRange(epsilon));
        }
        let k_min = self.k_min.unwrap_or(2);
        let k_max = self.k_max.unwrap_or(self.capacity);
        if k_min < 2 || k_min > self.capacity || self.capacity > k_max {
            return Err(ConfigError::CapacityBounds {
                k_min,
                capacity: self.capacity,
                k_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    ZeroCapacity,
    EpsilonOutOfRange(f64),
    /// A DynamicAdaptiveClimb-only option was supplied for a static policy.
    DynamicOnlyOption(&'static str),
    CapacityBounds {
        k_min: usize,
        capacity: usize,
        k_max: usize,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ZeroCapacity => write!(f, "capacity must be at least 1"),
            ConfigError::EpsilonOutOfRange(e) => {
                write!(f, "epsilon must be in (0, 1], got {e}")
            }
            ConfigError::DynamicOnlyOption(opt) => {
                write!(f, "{opt} is only valid with DynamicAdaptiveClimb")
            }
            ConfigError::CapacityBounds {
                k_min,
                capacity,
                k_max,
            } => write!(
                f,
                "capacity bounds must satisfy 2 <= k_min <= capacity <= k_max, \
                 got k_min={k_min} capacity={capacity} k_max={k_max}"
            ),
        }
    }
}

impl std::error::Error for ConfigError {}

/// The uniform contract every eviction algorithm implements: given the next
/// request, update the cache (and any private counters) and report what
/// happened. Every well-formed request is handled; there is no error path.
///
/// A policy and its cache form a single-owner unit; `Send` lets independent
/// units run in parallel.
pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    fn cache(&self) -> &CacheState;

    fn on_request(&mut self, request: &RequestRecord) -> PolicyOutcome;
}
