//! Synthetic workload generation: Zipf-distributed independent-request
//! streams and phase-shift workloads for adaptation studies.
//!
//! All randomness comes from SplitMix64 seeded explicitly, so a stream
//! replays bit-identically for a given spec on any platform. Keys are
//! `1..=N` in rank order: key 1 is the most probable item (before any phase
//! rank remapping).

use crate::analytics::ProbabilityVector;
use crate::types::RequestRecord;

/// SplitMix64 (Steele, Lea, Flood): a fixed, portable 64-bit generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, bound)` without modulo bias.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % bound;
            }
        }
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Rank probabilities `p_i = i^-alpha / sum_j j^-alpha`, non-increasing in
/// the rank.
pub fn zipf_probabilities(n: usize, alpha: f64) -> ProbabilityVector {
    assert!(n >= 2, "need at least two items");
    assert!(alpha >= 0.0 && alpha.is_finite(), "alpha must be >= 0");
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
    ProbabilityVector::from_weights(&weights).expect("zipf weights are positive")
}

/// Object size assignment for synthetic streams. Sizes are a deterministic
/// function of (seed, key), so an object keeps its size across phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeModel {
    Constant(u32),
    /// Log-uniform in `[min, max]`.
    LogUniform {
        min: u32,
        max: u32,
    },
}

impl Default for SizeModel {
    fn default() -> Self {
        SizeModel::Constant(1)
    }
}

impl SizeModel {
    pub fn size_of(&self, seed: u64, key: u64) -> u32 {
        match *self {
            SizeModel::Constant(bytes) => {
                debug_assert!(bytes >= 1);
                bytes
            }
            SizeModel::LogUniform { min, max } => {
                debug_assert!(1 <= min && min <= max);
                let mut rng =
                    SplitMix64::new(seed ^ key.wrapping_mul(0xA24B_AED4_963E_E407) ^ 0x5153);
                let lo = (min as f64).ln();
                let hi = (max as f64).ln();
                let value = (lo + rng.next_f64() * (hi - lo)).exp().round() as u32;
                value.clamp(min, max).max(1)
            }
        }
    }
}

/// One synthetic Zipf stream: `length` i.i.d. draws over `n` ranked items.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfSpec {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub length: u64,
    pub sizes: SizeModel,
}

impl ZipfSpec {
    pub fn new(n: usize, alpha: f64, seed: u64, length: u64) -> Self {
        assert!(n >= 2, "need at least two items");
        assert!(length >= 1, "need at least one request");
        assert!(alpha >= 0.0 && alpha.is_finite(), "alpha must be >= 0");
        Self {
            n,
            alpha,
            seed,
            length,
            sizes: SizeModel::default(),
        }
    }

    pub fn with_sizes(mut self, sizes: SizeModel) -> Self {
        self.sizes = sizes;
        self
    }

    pub fn probabilities(&self) -> ProbabilityVector {
        zipf_probabilities(self.n, self.alpha)
    }
}

/// Draws 0-based items i.i.d. from a fixed probability vector by inverting
/// the cumulative distribution.
#[derive(Debug, Clone)]
pub struct IrSampler {
    cdf: Vec<f64>,
    rng: SplitMix64,
}

impl IrSampler {
    pub fn new(p: &ProbabilityVector, seed: u64) -> Self {
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for &value in p.values() {
            acc += value;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self {
            cdf,
            rng: SplitMix64::new(seed),
        }
    }

    pub fn next_item(&mut self) -> usize {
        let u = self.rng.next_f64();
        let item = self.cdf.partition_point(|&c| c <= u);
        item.min(self.cdf.len() - 1)
    }
}

/// Identity mapping from ranks (0-based) to keys (1-based rank order).
fn rank_to_key(rank: usize) -> u64 {
    rank as u64 + 1
}

/// Streaming form of [`generate_ir_stream`].
#[derive(Debug, Clone)]
pub struct IrStream {
    sampler: IrSampler,
    sizes: SizeModel,
    seed: u64,
    timestamp: u64,
    remaining: u64,
}

impl IrStream {
    pub fn new(spec: &ZipfSpec) -> Self {
        Self {
            sampler: IrSampler::new(&spec.probabilities(), spec.seed),
            sizes: spec.sizes,
            seed: spec.seed,
            timestamp: 0,
            remaining: spec.length,
        }
    }
}

impl Iterator for IrStream {
    type Item = RequestRecord;

    fn next(&mut self) -> Option<RequestRecord> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.timestamp += 1;
        let key = rank_to_key(self.sampler.next_item());
        let size = self.sizes.size_of(self.seed, key);
        Some(RequestRecord::new(self.timestamp, key, size))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// Materializes the i.i.d. Zipf stream; timestamps are `1..=length`.
pub fn generate_ir_stream(spec: &ZipfSpec) -> Vec<RequestRecord> {
    IrStream::new(spec).collect()
}

/// How a phase maps item ranks to object keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMap {
    /// Key = rank + 1.
    Identity,
    /// Key of rank r is `((r + offset) mod n) + 1`; guarantees top ranks land
    /// on a disjoint key range when the offset exceeds the hot-set size.
    Rotate(usize),
    /// Ranks are sent through a seeded random permutation of the key space.
    Shuffled(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub spec: ZipfSpec,
    pub rank_map: RankMap,
}

/// An ordered list of phases; streams concatenate without gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlan {
    pub phases: Vec<Phase>,
}

impl PhasePlan {
    pub fn new(phases: Vec<Phase>) -> Self {
        assert!(!phases.is_empty(), "a plan needs at least one phase");
        Self { phases }
    }

    pub fn single(spec: ZipfSpec) -> Self {
        Self::new(vec![Phase {
            spec,
            rank_map: RankMap::Identity,
        }])
    }

    pub fn total_length(&self) -> u64 {
        self.phases.iter().map(|p| p.spec.length).sum()
    }
}

/// Sidecar index entry: where each phase starts in the concatenated stream
/// (0-based request index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseBoundary {
    pub phase: usize,
    pub start: u64,
    pub length: u64,
}

fn rank_mapper(map: RankMap, n: usize) -> Box<dyn Fn(usize) -> u64> {
    match map {
        RankMap::Identity => Box::new(rank_to_key),
        RankMap::Rotate(offset) => Box::new(move |rank| rank_to_key((rank + offset) % n)),
        RankMap::Shuffled(seed) => {
            let mut perm: Vec<usize> = (0..n).collect();
            SplitMix64::new(seed).shuffle(&mut perm);
            Box::new(move |rank| rank_to_key(perm[rank]))
        }
    }
}

/// Concatenates per-phase IR streams under their rank maps. Object sizes are
/// keyed off the first phase's seed so a key keeps its size across phases.
pub fn generate_phase_stream(plan: &PhasePlan) -> (Vec<RequestRecord>, Vec<PhaseBoundary>) {
    let size_seed = plan.phases[0].spec.seed;
    let mut records = Vec::with_capacity(plan.total_length() as usize);
    let mut boundaries = Vec::with_capacity(plan.phases.len());
    let mut timestamp = 0u64;
    for (phase_no, phase) in plan.phases.iter().enumerate() {
        boundaries.push(PhaseBoundary {
            phase: phase_no,
            start: records.len() as u64,
            length: phase.spec.length,
        });
        let map = rank_mapper(phase.rank_map, phase.spec.n);
        let mut sampler = IrSampler::new(&phase.spec.probabilities(), phase.spec.seed);
        for _ in 0..phase.spec.length {
            timestamp += 1;
            let key = map(sampler.next_item());
            let size = phase.spec.sizes.size_of(size_seed, key);
            records.push(RequestRecord::new(timestamp, key, size));
        }
    }
    (records, boundaries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_is_uniform() {
        let p = zipf_probabilities(5, 0.0);
        for &value in p.values() {
            assert!((value - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn harmonic_probabilities_for_three_items() {
        // H = 1 + 1/2 + 1/3 = 11/6, so p = (6/11, 3/11, 2/11).
        let p = zipf_probabilities(3, 1.0);
        assert!((p.get(0) - 6.0 / 11.0).abs() < 1e-15);
        assert!((p.get(1) - 3.0 / 11.0).abs() < 1e-15);
        assert!((p.get(2) - 2.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn extreme_skew_concentrates_on_rank_one() {
        let p = zipf_probabilities(2, 40.0);
        assert!(p.get(0) > 1.0 - 1e-9);
    }

    #[test]
    fn probabilities_normalized_and_non_increasing() {
        for &(n, alpha) in &[(2usize, 0.0), (10, 0.5), (100, 1.0), (1000, 1.4), (17, 2.5)] {
            let p = zipf_probabilities(n, alpha);
            let sum: f64 = p.values().iter().sum();
            assert!(
                (sum - 1.0).abs() < 1e-12,
                "sum {sum} for n={n} alpha={alpha}"
            );
            for pair in p.values().windows(2) {
                assert!(pair[0] >= pair[1]);
            }
        }
    }

    #[test]
    fn streams_replay_bit_identically() {
        let spec = ZipfSpec::new(100, 1.0, 7, 5_000);
        assert_eq!(generate_ir_stream(&spec), generate_ir_stream(&spec));
        let other = ZipfSpec::new(100, 1.0, 8, 5_000);
        assert_ne!(generate_ir_stream(&spec), generate_ir_stream(&other));
    }

    #[test]
    fn timestamps_count_up_from_one() {
        let spec = ZipfSpec::new(10, 0.5, 3, 100);
        let stream = generate_ir_stream(&spec);
        for (i, record) in stream.iter().enumerate() {
            assert_eq!(record.timestamp, i as u64 + 1);
            assert_eq!(record.size, 1);
            assert!((1..=10).contains(&record.key));
        }
    }

    #[test]
    fn uniform_two_item_frequency_concentrates() {
        let spec = ZipfSpec::new(2, 0.0, 99, 1_000_000);
        let ones = IrStream::new(&spec).filter(|r| r.key == 1).count();
        let freq = ones as f64 / 1e6;
        assert!((freq - 0.5).abs() < 0.002, "frequency {freq}");
    }

    #[test]
    fn rank_frequency_slope_matches_skew() {
        let spec = ZipfSpec::new(1000, 1.0, 0x51, 1_000_000);
        let mut counts = vec![0u64; 1001];
        for record in IrStream::new(&spec) {
            counts[record.key as usize] += 1;
        }
        // Least-squares slope of log(count) on log(rank) over ranks 1..=100.
        let points: Vec<(f64, f64)> = (1..=100)
            .map(|rank| ((rank as f64).ln(), (counts[rank] as f64).ln()))
            .collect();
        let n = points.len() as f64;
        let mean_x: f64 = points.iter().map(|(x, _)| x).sum::<f64>() / n;
        let mean_y: f64 = points.iter().map(|(_, y)| y).sum::<f64>() / n;
        let cov: f64 = points
            .iter()
            .map(|(x, y)| (x - mean_x) * (y - mean_y))
            .sum();
        let var: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
        let slope = cov / var;
        assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn log_uniform_sizes_are_stable_per_key() {
        let model = SizeModel::LogUniform { min: 16, max: 4096 };
        for key in 1..200u64 {
            let size = model.size_of(42, key);
            assert!((16..=4096).contains(&size));
            assert_eq!(size, model.size_of(42, key));
        }
    }

    #[test]
    fn single_phase_plan_equals_ir_stream() {
        let spec = ZipfSpec::new(50, 0.8, 5, 2_000);
        let (stream, boundaries) = generate_phase_stream(&PhasePlan::single(spec.clone()));
        assert_eq!(stream, generate_ir_stream(&spec));
        assert_eq!(boundaries.len(), 1);
        assert_eq!(boundaries[0].start, 0);
        assert_eq!(boundaries[0].length, 2_000);
    }

    #[test]
    fn identity_phases_concatenate_seamlessly() {
        let spec = ZipfSpec::new(50, 1.0, 5, 1_000);
        let plan = PhasePlan::new(vec![
            Phase {
                spec: spec.clone(),
                rank_map: RankMap::Identity,
            },
            Phase {
                spec: spec.clone(),
                rank_map: RankMap::Identity,
            },
        ]);
        let (stream, boundaries) = generate_phase_stream(&plan);
        assert_eq!(stream.len(), 2_000);
        assert_eq!(boundaries[1].start, 1_000);
        // Same spec and seed: the two halves sample the same key sequence,
        // with timestamps continuing across the boundary.
        let keys_a: Vec<u64> = stream[..1000].iter().map(|r| r.key).collect();
        let keys_b: Vec<u64> = stream[1000..].iter().map(|r| r.key).collect();
        assert_eq!(keys_a, keys_b);
        assert_eq!(stream[1000].timestamp, 1001);
    }

    #[test]
    fn rotated_phase_starves_a_frozen_cache() {
        let n = 1000;
        let hot = 50usize;
        let spec = ZipfSpec::new(n, 1.0, 11, 20_000);
        let plan = PhasePlan::new(vec![
            Phase {
                spec: spec.clone(),
                rank_map: RankMap::Identity,
            },
            Phase {
                spec,
                rank_map: RankMap::Rotate(n / 2),
            },
        ]);
        let (stream, boundaries) = generate_phase_stream(&plan);
        let boundary = boundaries[1].start as usize;
        // Freeze the phase-1 hot set and count how often each phase hits it.
        let frozen: std::collections::HashSet<u64> = (1..=hot as u64).collect();
        let hits = |slice: &[RequestRecord]| {
            slice.iter().filter(|r| frozen.contains(&r.key)).count() as f64 / slice.len() as f64
        };
        let before = hits(&stream[..boundary]);
        let after = hits(&stream[boundary..]);
        assert!(before > 0.5, "phase 1 hot-set mass {before}");
        assert!(
            after < 0.1 * before,
            "phase 2 still hits the old hot set: {after}"
        );
    }

    #[test]
    fn shuffled_rank_map_is_a_permutation() {
        let n = 200;
        let map = rank_mapper(RankMap::Shuffled(9), n);
        let mut seen = vec![false; n + 1];
        for rank in 0..n {
            let key = map(rank) as usize;
            assert!((1..=n).contains(&key));
            assert!(!seen[key], "key {key} repeated");
            seen[key] = true;
        }
    }
}
