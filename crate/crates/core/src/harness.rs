//! Simulation driver and metrics: replays a workload through a policy,
//! accumulates counters, computes miss-ratio reduction against a FIFO run,
//! and emits reports.
//!
//! Shrink-evictions (objects discarded by a capacity halving) are counted
//! separately and never enter the miss ratio. MRR is only computed between
//! runs sharing the workload, seed and initial capacity; [`sweep`] always
//! includes FIFO so the denominator exists.

use crate::trace::TraceError;
use crate::types::{ConfigError, PolicyConfig, PolicyKind, RequestRecord};
use crate::workload::{generate_ir_stream, ZipfSpec};
use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt;

/// Rolling-window length used for adaptation (recovery-time) measurements;
/// echoed in reports.
pub const ADAPTATION_WINDOW: usize = 10_000;

/// Trajectories are thinned to stay between this many and twice this many
/// points regardless of trace length.
pub const TRAJECTORY_POINT_BUDGET: usize = 10_000;

#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    EmptyWorkload,
    /// An I/O or format error from the workload source, with the 0-based
    /// request position where it surfaced.
    Workload {
        position: u64,
        source: TraceError,
    },
    EmptyAxis,
    EmptyCollection,
    /// An alpha sweep needs a synthetic workload.
    AxisNeedsZipf,
    RatioOutOfRange(f64),
    /// The applicable MRR denominator is zero.
    UndefinedMrr,
    BoundaryOutOfRange {
        boundary: usize,
        window: usize,
        len: usize,
    },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(err) => write!(f, "invalid policy config: {err}"),
            HarnessError::EmptyWorkload => write!(f, "workload yielded no records"),
            HarnessError::Workload { position, source } => {
                write!(f, "workload error at request {position}: {source}")
            }
            HarnessError::EmptyAxis => write!(f, "sweep axis is empty"),
            HarnessError::EmptyCollection => write!(f, "no reports to emit"),
            HarnessError::AxisNeedsZipf => {
                write!(f, "an alpha sweep requires a synthetic zipf workload")
            }
            HarnessError::RatioOutOfRange(r) => {
                write!(f, "miss ratio {r} outside [0, 1]")
            }
            HarnessError::UndefinedMrr => write!(f, "MRR undefined: denominator is zero"),
            HarnessError::BoundaryOutOfRange {
                boundary,
                window,
                len,
            } => write!(
                f,
                "phase boundary {boundary} incompatible with window {window} and length {len}"
            ),
        }
    }
}

impl std::error::Error for HarnessError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            HarnessError::Config(err) => Some(err),
            HarnessError::Workload { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<ConfigError> for HarnessError {
    fn from(err: ConfigError) -> Self {
        HarnessError::Config(err)
    }
}

/// Echo of the workload a run consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadInfo {
    pub description: String,
    pub seed: Option<u64>,
}

impl WorkloadInfo {
    pub fn new(description: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            description: description.into(),
            seed,
        }
    }

    pub fn for_zipf(spec: &ZipfSpec) -> Self {
        Self::new(
            format!(
                "zipf n={} alpha={:.3} length={}",
                spec.n, spec.alpha, spec.length
            ),
            Some(spec.seed),
        )
    }
}

/// One down-sampled telemetry sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// 1-based request number.
    pub step: u64,
    pub jump: Option<i64>,
    pub jump_prime: Option<i64>,
    pub capacity: usize,
    /// Cumulative hits up to and including `step`.
    pub hits: u64,
}

/// Accumulated metrics for one (policy, workload, capacity) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Resolved policy configuration (defaults filled in).
    pub policy: PolicyConfig,
    pub workload: WorkloadInfo,
    pub requests: u64,
    pub hits: u64,
    pub misses: u64,
    pub bytes_requested: u64,
    pub bytes_missed: u64,
    pub total_shifts: u64,
    /// Objects discarded by capacity halvings; excluded from the miss ratio.
    pub shrink_evictions: u64,
    pub resizes: u64,
    pub suppressed_resizes: u64,
    pub final_capacity: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl RunReport {
    pub fn hit_ratio(&self) -> f64 {
        self.hits as f64 / self.requests as f64
    }

    pub fn miss_ratio(&self) -> f64 {
        self.misses as f64 / self.requests as f64
    }

    pub fn byte_miss_ratio(&self) -> f64 {
        if self.bytes_requested == 0 {
            0.0
        } else {
            self.bytes_missed as f64 / self.bytes_requested as f64
        }
    }

    pub fn shifts_per_request(&self) -> f64 {
        self.total_shifts as f64 / self.requests as f64
    }
}

fn resolved_config(config: &PolicyConfig) -> PolicyConfig {
    let mut resolved = config.clone();
    if config.kind == PolicyKind::DynamicAdaptiveClimb {
        resolved.epsilon = Some(config.epsilon.unwrap_or(0.5));
        resolved.k_min = Some(config.k_min.unwrap_or(2));
        resolved.k_max = Some(config.k_max.unwrap_or(config.capacity));
    }
    resolved
}

/// Replays `workload` through the configured policy. Deterministic for a
/// fixed workload; I/O errors propagate with their request position.
pub fn simulate<I>(
    config: &PolicyConfig,
    workload: I,
    info: WorkloadInfo,
) -> Result<RunReport, HarnessError>
where
    I: IntoIterator<Item = Result<RequestRecord, TraceError>>,
{
    let mut policy = crate::build_policy(config)?;
    let mut report = RunReport {
        policy: resolved_config(config),
        workload: info,
        requests: 0,
        hits: 0,
        misses: 0,
        bytes_requested: 0,
        bytes_missed: 0,
        total_shifts: 0,
        shrink_evictions: 0,
        resizes: 0,
        suppressed_resizes: 0,
        final_capacity: config.capacity,
        trajectory: Vec::new(),
    };
    let mut interval = 1u64;
    for (position, item) in workload.into_iter().enumerate() {
        let record = item.map_err(|source| HarnessError::Workload {
            position: position as u64,
            source,
        })?;
        let outcome = policy.on_request(&record);
        report.requests += 1;
        report.bytes_requested += record.size as u64;
        if outcome.hit {
            report.hits += 1;
        } else {
            report.misses += 1;
            report.bytes_missed += record.size as u64;
        }
        report.total_shifts += outcome.shifts;
        if let Some(resize) = outcome.resize {
            if resize.suppressed {
                report.suppressed_resizes += 1;
            } else {
                report.resizes += 1;
                report.shrink_evictions += resize.discarded;
            }
        }
        let cache = policy.cache();
        assert!(
            cache.occupancy() <= cache.capacity(),
            "resident objects exceed capacity"
        );
        if report.requests.is_multiple_of(interval) {
            report.trajectory.push(TrajectoryPoint {
                step: report.requests,
                jump: outcome.telemetry.jump,
                jump_prime: outcome.telemetry.jump_prime,
                capacity: cache.capacity(),
                hits: report.hits,
            });
            if report.trajectory.len() >= 2 * TRAJECTORY_POINT_BUDGET {
                interval *= 2;
                report.trajectory.retain(|p| p.step % interval == 0);
            }
        }
    }
    if report.requests == 0 {
        return Err(HarnessError::EmptyWorkload);
    }
    assert_eq!(report.hits + report.misses, report.requests);
    report.final_capacity = policy.cache().capacity();
    Ok(report)
}

/// [`simulate`] over an in-memory record slice.
pub fn simulate_records(
    config: &PolicyConfig,
    records: &[RequestRecord],
    info: WorkloadInfo,
) -> Result<RunReport, HarnessError> {
    simulate(config, records.iter().copied().map(Ok), info)
}

/// Miss-ratio reduction relative to a FIFO baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrrResult {
    pub mr_algo: f64,
    pub mr_fifo: f64,
    pub mrr: f64,
}

/// Piecewise MRR: `(mr_fifo - mr_algo) / mr_fifo` when the algorithm is at
/// least as good as FIFO, otherwise `(mr_fifo - mr_algo) / mr_algo`.
pub fn compute_mrr(mr_algo: f64, mr_fifo: f64) -> Result<MrrResult, HarnessError> {
    for ratio in [mr_algo, mr_fifo] {
        if !(0.0..=1.0).contains(&ratio) || !ratio.is_finite() {
            return Err(HarnessError::RatioOutOfRange(ratio));
        }
    }
    let denominator = if mr_algo <= mr_fifo { mr_fifo } else { mr_algo };
    if denominator == 0.0 {
        return Err(HarnessError::UndefinedMrr);
    }
    Ok(MrrResult {
        mr_algo,
        mr_fifo,
        mrr: (mr_fifo - mr_algo) / denominator,
    })
}

/// What a sweep varies: cache sizes at a fixed workload, or Zipf skew at a
/// fixed capacity.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Capacities(Vec<usize>),
    Alphas { alphas: Vec<f64>, capacity: usize },
}

/// The workload a sweep replays.
#[derive(Debug, Clone)]
pub enum SweepWorkload {
    Zipf(ZipfSpec),
    Trace {
        records: Vec<RequestRecord>,
        description: String,
    },
}

/// One (policy, axis point) result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis: String,
    pub report: RunReport,
    /// `None` for the FIFO baseline itself.
    pub mrr: Option<MrrResult>,
}

/// DynamicAdaptiveClimb settings used by sweeps: the point capacity is the
/// shrink floor and growth headroom is a fixed multiple, so every policy
/// starts from the same budget.
pub const SWEEP_DAC_GROWTH_HEADROOM: usize = 16;

fn sweep_config(kind: PolicyKind, capacity: usize, dac_epsilon: f64) -> PolicyConfig {
    if kind == PolicyKind::DynamicAdaptiveClimb {
        PolicyConfig::dynamic(
            capacity,
            dac_epsilon,
            capacity.max(2),
            capacity.saturating_mul(SWEEP_DAC_GROWTH_HEADROOM),
        )
    } else {
        PolicyConfig::new(kind, capacity)
    }
}

/// Runs every requested policy at every axis point. FIFO is added when
/// absent (it is the MRR denominator) and duplicate policies collapse to
/// their first occurrence.
pub fn sweep(
    kinds: &[PolicyKind],
    axis: &SweepAxis,
    workload: &SweepWorkload,
    dac_epsilon: f64,
) -> Result<Vec<SweepPoint>, HarnessError> {
    // FIFO always runs first at each point: it is the MRR denominator.
    let mut ordered = vec![PolicyKind::Fifo];
    for &kind in kinds {
        if !ordered.contains(&kind) {
            ordered.push(kind);
        }
    }

    // (axis label, capacity, records, workload echo) per point.
    let mut points: Vec<(String, usize, Vec<RequestRecord>, WorkloadInfo)> = Vec::new();
    match axis {
        SweepAxis::Capacities(capacities) => {
            if capacities.is_empty() {
                return Err(HarnessError::EmptyAxis);
            }
            let (records, info) = match workload {
                SweepWorkload::Zipf(spec) => {
                    (generate_ir_stream(spec), WorkloadInfo::for_zipf(spec))
                }
                SweepWorkload::Trace {
                    records,
                    description,
                } => (
                    records.clone(),
                    WorkloadInfo::new(description.clone(), None),
                ),
            };
            for &capacity in capacities {
                points.push((
                    format!("K={capacity}"),
                    capacity,
                    records.clone(),
                    info.clone(),
                ));
            }
        }
        SweepAxis::Alphas { alphas, capacity } => {
            if alphas.is_empty() {
                return Err(HarnessError::EmptyAxis);
            }
            let base = match workload {
                SweepWorkload::Zipf(spec) => spec,
                SweepWorkload::Trace { .. } => return Err(HarnessError::AxisNeedsZipf),
            };
            for &alpha in alphas {
                let spec = ZipfSpec {
                    alpha,
                    ..base.clone()
                };
                let info = WorkloadInfo::for_zipf(&spec);
                points.push((
                    format!("alpha={alpha:.3}"),
                    *capacity,
                    generate_ir_stream(&spec),
                    info,
                ));
            }
        }
    }

    let mut out = Vec::with_capacity(points.len() * ordered.len());
    for (label, capacity, records, info) in &points {
        let mut fifo_miss_ratio = None;
        for &kind in &ordered {
            let config = sweep_config(kind, *capacity, dac_epsilon);
            let report = simulate_records(&config, records, info.clone())?;
            let mrr = match kind {
                PolicyKind::Fifo => {
                    fifo_miss_ratio = Some(report.miss_ratio());
                    None
                }
                _ => Some(compute_mrr(
                    report.miss_ratio(),
                    fifo_miss_ratio.expect("FIFO runs first"),
                )?),
            };
            out.push(SweepPoint {
                axis: label.clone(),
                report,
                mrr,
            });
        }
    }
    Ok(out)
}

/// Stable column order of the machine-readable row format.
pub const ROW_COLUMNS: &str = "axis,policy,capacity,epsilon,k_min,k_max,workload,seed,requests,\
hits,misses,hit_ratio,miss_ratio,bytes_requested,bytes_missed,byte_miss_ratio,total_shifts,\
shifts_per_request,shrink_evictions,resizes,final_capacity,mr_fifo,mrr";

fn sanitize(field: &str) -> String {
    field.replace(',', ";")
}

/// One CSV row per report, preceded by [`ROW_COLUMNS`]; byte-for-byte
/// reproducible for identical inputs.
pub fn emit_rows(points: &[SweepPoint]) -> Result<String, HarnessError> {
    if points.is_empty() {
        return Err(HarnessError::EmptyCollection);
    }
    let mut out = String::from(ROW_COLUMNS);
    out.push('\n');
    for point in points {
        let report = &point.report;
        let policy = &report.policy;
        let epsilon = policy
            .epsilon
            .map(|e| format!("{e:.6}"))
            .unwrap_or_default();
        let k_min = policy.k_min.map(|k| k.to_string()).unwrap_or_default();
        let k_max = policy.k_max.map(|k| k.to_string()).unwrap_or_default();
        let seed = report
            .workload
            .seed
            .map(|s| s.to_string())
            .unwrap_or_default();
        let (mr_fifo, mrr) = match point.mrr {
            Some(m) => (format!("{:.6}", m.mr_fifo), format!("{:.6}", m.mrr)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{axis},{policy},{capacity},{epsilon},{k_min},{k_max},{workload},{seed},{requests},\
             {hits},{misses},{hit_ratio:.6},{miss_ratio:.6},{bytes_requested},{bytes_missed},\
             {byte_miss_ratio:.6},{total_shifts},{shifts_per_request:.6},{shrink_evictions},\
             {resizes},{final_capacity},{mr_fifo},{mrr}\n",
            axis = sanitize(&point.axis),
            policy = policy.kind,
            capacity = policy.capacity,
            workload = sanitize(&report.workload.description),
            requests = report.requests,
            hits = report.hits,
            misses = report.misses,
            hit_ratio = report.hit_ratio(),
            miss_ratio = report.miss_ratio(),
            bytes_requested = report.bytes_requested,
            bytes_missed = report.bytes_missed,
            byte_miss_ratio = report.byte_miss_ratio(),
            total_shifts = report.total_shifts,
            shifts_per_request = report.shifts_per_request(),
            shrink_evictions = report.shrink_evictions,
            resizes = report.resizes,
            final_capacity = report.final_capacity,
        ));
    }
    Ok(out)
}

/// Aligned text table, policies sorted by miss ratio ascending.
pub fn emit_table(points: &[SweepPoint]) -> Result<String, HarnessError> {
    if points.is_empty() {
        return Err(HarnessError::EmptyCollection);
    }
    let mut rows: Vec<&SweepPoint> = points.iter().collect();
    rows.sort_by(|a, b| {
        a.report
            .miss_ratio()
            .total_cmp(&b.report.miss_ratio())
            .then_with(|| a.report.policy.kind.name().cmp(b.report.policy.kind.name()))
            .then_with(|| a.axis.cmp(&b.axis))
    });
    let mut out = format!(
        "{:<12} {:<22} {:>9} {:>11} {:>11} {:>12} {:>9}\n",
        "axis", "policy", "capacity", "hit_ratio", "miss_ratio", "shifts/req", "mrr"
    );
    for point in rows {
        let report = &point.report;
        let mrr = point
            .mrr
            .map(|m| format!("{:+.4}", m.mrr))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<12} {:<22} {:>9} {:>11.6} {:>11.6} {:>12.4} {:>9}\n",
            point.axis,
            report.policy.kind.name(),
            report.policy.capacity,
            report.hit_ratio(),
            report.miss_ratio(),
            report.shifts_per_request(),
            mrr
        ));
    }
    Ok(out)
}

/// Trailing hit/miss window for adaptation measurements.
#[derive(Debug, Clone)]
pub struct RollingHitWindow {
    window: VecDeque<bool>,
    capacity: usize,
    hits: usize,
}

impl RollingHitWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Self {
            window: VecDeque::with_capacity(capacity),
            capacity,
            hits: 0,
        }
    }

    pub fn push(&mut self, hit: bool) {
        if self.window.len() == self.capacity && self.window.pop_front() == Some(true) {
            self.hits -= 1;
        }
        self.window.push_back(hit);
        if hit {
            self.hits += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.window.len() == self.capacity
    }

    pub fn ratio(&self) -> f64 {
        if self.window.is_empty() {
            0.0
        } else {
            self.hits as f64 / self.window.len() as f64
        }
    }
}

/// Replays `records`, measuring how long after `boundary` the rolling
/// `window` hit ratio takes to re-reach `fraction` of its pre-boundary
/// value. The window restarts empty at the boundary and is consulted only
/// once it has refilled, so leftover pre-boundary hits cannot fake a
/// recovery. Returns the number of post-boundary requests, or `None` when
/// the stream ends first.
pub fn recovery_time(
    config: &PolicyConfig,
    records: &[RequestRecord],
    boundary: usize,
    window: usize,
    fraction: f64,
) -> Result<Option<u64>, HarnessError> {
    if boundary < window || boundary >= records.len() {
        return Err(HarnessError::BoundaryOutOfRange {
            boundary,
            window,
            len: records.len(),
        });
    }
    let mut policy = crate::build_policy(config)?;
    let mut rolling = RollingHitWindow::new(window);
    for record in &records[..boundary] {
        rolling.push(policy.on_request(record).hit);
    }
    let target = fraction * rolling.ratio();
    let mut rolling = RollingHitWindow::new(window);
    for (i, record) in records[boundary..].iter().enumerate() {
        rolling.push(policy.on_request(record).hit);
        if rolling.is_full() && rolling.ratio() >= target {
            return Ok(Some(i as u64 + 1));
        }
    }
    Ok(None)
}

/// Empirical configuration frequencies: the fraction of post-warmup steps
/// the cache spent in each exact slot order. Supports the IR-model
/// stationary-distribution comparison.
pub fn configuration_frequencies(
    config: &PolicyConfig,
    records: &[RequestRecord],
) -> Result<BTreeMap<Vec<u64>, f64>, HarnessError> {
    let mut policy = crate::build_policy(config)?;
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut samples = 0u64;
    for record in records {
        policy.on_request(record);
        if policy.cache().is_full() {
            *counts.entry(policy.cache().keys().to_vec()).or_insert(0) += 1;
            samples += 1;
        }
    }
    if samples == 0 {
        return Err(HarnessError::EmptyWorkload);
    }
    Ok(counts
        .into_iter()
        .map(|(config, count)| (config, count as f64 / samples as f64))
        .collect())
}
