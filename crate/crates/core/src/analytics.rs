//! Independent-requests model analytics.
//!
//! Under the IR model each request is drawn i.i.d. from a fixed probability
//! vector `p_1..p_N`. For a cache of K slots the long-run behavior of LRU and
//! CLIMB is a Markov chain over ordered configurations (K-tuples of distinct
//! items, position 1 on top) with known closed-form stationary distributions:
//!
//! - LRU: `pi(sigma) = prod_i p_{sigma_i} / (1 - sum_{r<i} p_{sigma_r})`
//! - CLIMB: `pi(sigma) = C * prod_i p_{sigma_i}^(K-i+1)` with `C` normalizing
//!   over all K-permutations.
//!
//! `markov_stationary` is an independent brute-force oracle: it builds the
//! exact transition matrix of the chain (for AdaptiveClimb the state space is
//! configuration x jump) and power-iterates to a stationary vector. It is
//! restricted to small instances and to strictly positive probabilities,
//! which make the chain over full-cache configurations irreducible.

use rustc_hash::FxHashMap;
use std::collections::BTreeMap;
use std::fmt;

/// Tolerance for validating that a probability vector sums to 1.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;
/// Power iteration stops once the L1 distance between successive iterates
/// falls below this residual.
pub const POWER_ITERATION_RESIDUAL: f64 = 1e-12;
/// Iteration cap for the oracle.
pub const POWER_ITERATION_CAP: usize = 1_000_000;
/// State-space guards for the oracle: at most `N!/(N-K)!` configurations
/// (times K jump values for AdaptiveClimb).
pub const ORACLE_MAX_ITEMS: usize = 7;
pub const ORACLE_MAX_SLOTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticsError {
    NegativeProbability {
        index: usize,
    },
    NotNormalized {
        sum: f64,
    },
    /// Configuration items must be distinct, in range, and fewer than N.
    InvalidConfiguration(String),
    /// A prefix of the configuration exhausts the total probability mass, so
    /// the LRU closed form has a zero denominator.
    ExhaustedMass {
        position: usize,
    },
    /// Every K-permutation has zero CLIMB weight.
    DegenerateWeight,
    /// The oracle requires N <= 7 and K <= 4.
    StateSpaceTooLarge {
        items: usize,
        slots: usize,
    },
    /// The oracle requires strictly positive probabilities.
    ZeroProbability {
        index: usize,
    },
    NoConvergence {
        residual: f64,
    },
}

impl fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticsError::NegativeProbability { index } => {
                write!(f, "probability at index {index} is negative")
            }
            AnalyticsError::NotNormalized { sum } => {
                write!(f, "probabilities sum to {sum}, expected 1")
            }
            AnalyticsError::InvalidConfiguration(msg) => {
                write!(f, "invalid configuration: {msg}")
            }
            AnalyticsError::ExhaustedMass { position } => write!(
                f,
                "prefix before position {position} exhausts the probability mass"
            ),
            AnalyticsError::DegenerateWeight => {
                write!(f, "all configurations have zero weight")
            }
            AnalyticsError::StateSpaceTooLarge { items, slots } => write!(
                f,
                "oracle state space too large: N={items} K={slots} \
                 (limits N<={ORACLE_MAX_ITEMS}, K<={ORACLE_MAX_SLOTS})"
            ),
            AnalyticsError::ZeroProbability { index } => {
                write!(f, "oracle requires p[{index}] > 0")
            }
            AnalyticsError::NoConvergence { residual } => {
                write!(f, "power iteration did not converge; residual {residual}")
            }
        }
    }
}

impl std::error::Error for AnalyticsError {}

/// `p_1..p_N` with non-negative entries summing to 1 (tolerance 1e-12).
/// Items are indexed 0-based in code; displays are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self, AnalyticsError> {
        for (index, &value) in p.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(AnalyticsError::NegativeProbability { index });
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(AnalyticsError::NotNormalized { sum });
        }
        Ok(Self { p })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self, AnalyticsError> {
        for (index, &value) in weights.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(AnalyticsError::NegativeProbability { index });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(AnalyticsError::NotNormalized { sum });
        }
        Ok(Self {
            p: weights.iter().map(|w| w / sum).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, item: usize) -> f64 {
        self.p[item]
    }
}

/// An ordered K-tuple of distinct item indices; `items[0]` is the top slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    items: Vec<usize>,
}

impl Configuration {
    pub fn new(items: Vec<usize>, n: usize) -> Result<Self, AnalyticsError> {
        if items.is_empty() {
            return Err(AnalyticsError::InvalidConfiguration(
                "configuration is empty".into(),
            ));
        }
        if items.len() >= n {
            return Err(AnalyticsError::InvalidConfiguration(format!(
                "K={} must be smaller than N={n}",
                items.len()
            )));
        }
        let mut seen = vec![false; n];
        for &item in &items {
            if item >= n {
                return Err(AnalyticsError::InvalidConfiguration(format!(
                    "item {item} out of range for N={n}"
                )));
            }
            if seen[item] {
                return Err(AnalyticsError::InvalidConfiguration(format!(
                    "item {item} repeated"
                )));
            }
            seen[item] = true;
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }
}

/// LRU stationary probability of one configuration.
pub fn pi_lru(p: &ProbabilityVector, sigma: &Configuration) -> Result<f64, AnalyticsError> {
    let mut value = 1.0;
    let mut prefix = 0.0;
    for (i, &item) in sigma.items().iter().enumerate() {
        let denominator = 1.0 - prefix;
        if denominator <= 0.0 {
            return Err(AnalyticsError::ExhaustedMass { position: i + 1 });
        }
        value *= p.get(item) / denominator;
        prefix += p.get(item);
    }
    Ok(value)
}

/// CLIMB stationary probability of one configuration: the geometric weight
/// `prod p_{sigma_i}^(K-i+1)` normalized over all K-permutations.
pub fn pi_climb(p: &ProbabilityVector, sigma: &Configuration) -> Result<f64, AnalyticsError> {
    let k = sigma.items().len();
    let total = climb_total_weight(p, k);
    if total <= 0.0 {
        return Err(AnalyticsError::DegenerateWeight);
    }
    Ok(climb_weight(p, sigma.items()) / total)
}

fn climb_weight(p: &ProbabilityVector, items: &[usize]) -> f64 {
    let k = items.len();
    items
        .iter()
        .enumerate()
        .map(|(i, &item)| p.get(item).powi((k - i) as i32))
        .product()
}

fn climb_total_weight(p: &ProbabilityVector, k: usize) -> f64 {
    k_permutations(p.len(), k)
        .iter()
        .map(|perm| climb_weight(p, perm))
        .sum()
}

/// A probability for every K-permutation of the N items.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probs: BTreeMap<Vec<usize>, f64>,
}

impl StationaryDistribution {
    fn new(probs: BTreeMap<Vec<usize>, f64>) -> Self {
        Self { probs }
    }

    pub fn probability(&self, config: &[usize]) -> f64 {
        self.probs.get(config).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.probs.iter().map(|(c, &p)| (c, p))
    }

    pub fn sum(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn max_abs_diff(&self, other: &StationaryDistribution) -> f64 {
        let mut worst = 0.0f64;
        for (config, p) in self.iter() {
            worst = worst.max((p - other.probability(config)).abs());
        }
        for (config, p) in other.iter() {
            worst = worst.max((p - self.probability(config)).abs());
        }
        worst
    }

    pub fn total_variation(&self, other: &StationaryDistribution) -> f64 {
        let mut sum = 0.0;
        for (config, p) in self.iter() {
            sum += (p - other.probability(config)).abs();
        }
        for (config, p) in other.iter() {
            if !self.probs.contains_key(config) {
                sum += p.abs();
            }
        }
        sum / 2.0
    }
}

/// Evaluates a closed form over every K-permutation.
pub fn lru_distribution(
    p: &ProbabilityVector,
    k: usize,
) -> Result<StationaryDistribution, AnalyticsError> {
    check_dimensions(p.len(), k)?;
    let mut probs = BTreeMap::new();
    for items in k_permutations(p.len(), k) {
        let sigma = Configuration { items };
        let value = pi_lru(p, &sigma)?;
        probs.insert(sigma.items, value);
    }
    Ok(StationaryDistribution::new(probs))
}

pub fn climb_distribution(
    p: &ProbabilityVector,
    k: usize,
) -> Result<StationaryDistribution, AnalyticsError> {
    check_dimensions(p.len(), k)?;
    let total = climb_total_weight(p, k);
    if total <= 0.0 {
        return Err(AnalyticsError::DegenerateWeight);
    }
    let mut probs = BTreeMap::new();
    for items in k_permutations(p.len(), k) {
        let value = climb_weight(p, &items) / total;
        probs.insert(items, value);
    }
    Ok(StationaryDistribution::new(probs))
}

fn check_dimensions(n: usize, k: usize) -> Result<(), AnalyticsError> {
    if k == 0 || k >= n {
        return Err(AnalyticsError::InvalidConfiguration(format!(
            "need 1 <= K < N, got K={k} N={n}"
        )));
    }
    Ok(())
}

/// Expected stationary hit probability: `sum_sigma pi(sigma) * sum_i
/// p_{sigma_i}`.
pub fn expected_hit_ratio(dist: &StationaryDistribution, p: &ProbabilityVector) -> f64 {
    dist.iter()
        .map(|(config, prob)| {
            let resident: f64 = config.iter().map(|&item| p.get(item)).sum();
            prob * resident
        })
        .sum()
}

/// Chains the oracle can solve exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleModel {
    Lru,
    Climb,
    AdaptiveClimb,
}

/// Exact stationary distribution of the policy's chain over full-cache
/// configurations, via power iteration on the transition matrix. For
/// AdaptiveClimb the jump dimension is marginalized out of the result.
pub fn markov_stationary(
    model: OracleModel,
    p: &ProbabilityVector,
    k: usize,
) -> Result<StationaryDistribution, AnalyticsError> {
    let n = p.len();
    check_dimensions(n, k)?;
    if n > ORACLE_MAX_ITEMS || k > ORACLE_MAX_SLOTS {
        return Err(AnalyticsError::StateSpaceTooLarge { items: n, slots: k });
    }
    if let Some(index) = p.values().iter().position(|&v| v <= 0.0) {
        return Err(AnalyticsError::ZeroProbability { index });
    }

    let configs = k_permutations(n, k);
    let config_index: FxHashMap<Vec<usize>, usize> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();

    let jump_states = if model == OracleModel::AdaptiveClimb {
        k
    } else {
        1
    };
    let state_count = configs.len() * jump_states;
    let mut transitions: Vec<(usize, f64)> = Vec::with_capacity(state_count * n);
    let mut row_offsets = Vec::with_capacity(state_count + 1);
    row_offsets.push(0);

    for state in 0..state_count {
        let config = &configs[state / jump_states];
        // Jump values are 1..=K; only meaningful for AdaptiveClimb.
        let jump = state % jump_states + 1;
        for item in 0..n {
            let (next_config, next_jump) = step(model, config, jump, k, item);
            let next_state = config_index[&next_config] * jump_states
                + if jump_states > 1 { next_jump - 1 } else { 0 };
            transitions.push((next_state, p.get(item)));
        }
        row_offsets.push(transitions.len());
    }

    let pi = power_iterate(state_count, &row_offsets, &transitions)?;

    let mut probs: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (state, &mass) in pi.iter().enumerate() {
        *probs
            .entry(configs[state / jump_states].clone())
            .or_insert(0.0) += mass;
    }
    Ok(StationaryDistribution::new(probs))
}

/// One transition of the policy chain on a full cache.
fn step(
    model: OracleModel,
    config: &[usize],
    jump: usize,
    k: usize,
    item: usize,
) -> (Vec<usize>, usize) {
    let mut next: Vec<usize> = config.to_vec();
    match model {
        OracleModel::Lru => {
            if let Some(pos) = config.iter().position(|&x| x == item) {
                next[..=pos].rotate_right(1);
            } else {
                next.rotate_right(1);
                next[0] = item;
            }
            (next, jump)
        }
        OracleModel::Climb => {
            if let Some(pos) = config.iter().position(|&x| x == item) {
                if pos > 0 {
                    next.swap(pos, pos - 1);
                }
            } else {
                next[k - 1] = item;
            }
            (next, jump)
        }
        OracleModel::AdaptiveClimb => {
            if let Some(pos) = config.iter().position(|&x| x == item) {
                let next_jump = if jump > 1 { jump - 1 } else { jump };
                if pos > 0 {
                    let target = pos.saturating_sub(next_jump);
                    next[target..=pos].rotate_right(1);
                }
                (next, next_jump)
            } else {
                let next_jump = if jump < k { jump + 1 } else { jump };
                let insert = k - next_jump; // 0-based K - jump + 1
                next[insert..].rotate_right(1);
                next[insert] = item;
                (next, next_jump)
            }
        }
    }
}

fn power_iterate(
    states: usize,
    row_offsets: &[usize],
    transitions: &[(usize, f64)],
) -> Result<Vec<f64>, AnalyticsError> {
    let mut current = vec![1.0 / states as f64; states];
    let mut next = vec![0.0; states];
    for _ in 0..POWER_ITERATION_CAP {
        next.iter_mut().for_each(|v| *v = 0.0);
        for state in 0..states {
            let mass = current[state];
            if mass == 0.0 {
                continue;
            }
            for &(dest, prob) in &transitions[row_offsets[state]..row_offsets[state + 1]] {
                next[dest] += mass * prob;
            }
        }
        let residual: f64 = current
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut current, &mut next);
        if residual < POWER_ITERATION_RESIDUAL {
            return Ok(current);
        }
    }
    let residual: f64 = current
        .iter()
        .zip(next.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Err(AnalyticsError::NoConvergence { residual })
}

/// All ordered K-tuples of distinct items from `0..n`, in lexicographic
/// order.
pub fn k_permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn recurse(
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for item in 0..n {
            if !used[item] {
                used[item] = true;
                current.push(item);
                recurse(n, k, current, used, out);
                current.pop();
                used[item] = false;
            }
        }
    }
    recurse(n, k, &mut current, &mut used, &mut out);
    out
}
