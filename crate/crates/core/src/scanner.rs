//! Segment-parallel sweep of every jump of S(x) up to a limit, maintaining
//! signed running records of E(x)/√x.
//!
//! The jumps of S are exactly the integers l with ρ₁(l) > 0; between jumps E
//! decreases linearly, so evaluating both one-sided limits at the jumps
//! captures every extremum over the reals. The sweep runs in two passes:
//!
//! 1. each segment computes its ρ₁ total and jump count in parallel;
//! 2. a sequential prefix sum fixes each segment's starting S and jump index,
//!    then segments are scanned in parallel with known offsets.
//!
//! Segment results are folded in range order, so records, per-decade stats and
//! emitted rows are identical for any thread count and any segment length.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, isqrt_floor, r2_sieve, ArithError, R2Table, MAX_SEGMENT_LEN};
use crate::counting::{jump_sample, CountSample};
use crate::fmt::sig10;
use crate::riesz::q_value;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    Config(String),
    #[error("running count would overflow 64 bits")]
    CountOverflow,
    #[error("segment [{lo}, {hi}) density total disagrees with its prefix total")]
    SegmentMismatch { lo: u64, hi: u64 },
    #[error("no complete decade scanned")]
    EmptyRange,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Sweep parameters. `sample_stride` thins the emitted rows (every k-th jump);
/// records are kept regardless of the stride.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub x_max: u64,
    pub segment_len: u64,
    pub sample_stride: u64,
    pub threads: usize,
}

impl ScanConfig {
    pub fn new(x_max: u64) -> Self {
        ScanConfig {
            x_max,
            segment_len: 1 << 20,
            sample_stride: 1,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    fn validate(&self) -> Result<(), ScanError> {
        if self.x_max < 2 {
            return Err(ScanError::Config("x_max must be at least 2".into()));
        }
        if self.segment_len == 0 || self.segment_len > MAX_SEGMENT_LEN {
            return Err(ScanError::Config(format!(
                "segment_len must be in 1..={MAX_SEGMENT_LEN}"
            )));
        }
        if self.sample_stride == 0 {
            return Err(ScanError::Config("sample_stride must be positive".into()));
        }
        if self.threads == 0 {
            return Err(ScanError::Config("threads must be positive".into()));
        }
        // S(x) ≈ 4.94·x; stay clear of 2^63.
        if self.x_max > 1_800_000_000_000_000_000 {
            return Err(ScanError::CountOverflow);
        }
        Ok(())
    }
}

/// A running extremum of E(x)/√x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordEntry {
    pub x: u64,
    pub value: f64,
}

/// Extremes of E(x)/√x over one decade [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecadeStats {
    pub lo: u64,
    pub hi: u64,
    pub jumps: u64,
    /// Largest right limit of E/√x in the decade, and where.
    pub max_e_norm: f64,
    pub argmax: u64,
    /// Smallest left limit of E/√x in the decade, and where.
    pub min_e_norm: f64,
    pub argmin: u64,
    /// Largest |Q(√x)| seen at the decade's extremal abscissae; filled by
    /// [`decade_summary`], `None` straight out of the scan.
    pub max_abs_q: Option<f64>,
}

impl DecadeStats {
    fn first(l: u64, sample: &CountSample) -> Self {
        let lo = 10u64.pow(l.ilog10());
        DecadeStats {
            lo,
            hi: lo.saturating_mul(10),
            jumps: 1,
            max_e_norm: sample.e_norm_right,
            argmax: l,
            min_e_norm: sample.e_norm_left,
            argmin: l,
            max_abs_q: None,
        }
    }

    fn absorb(&mut self, l: u64, sample: &CountSample) {
        self.jumps += 1;
        if sample.e_norm_right > self.max_e_norm {
            self.max_e_norm = sample.e_norm_right;
            self.argmax = l;
        }
        if sample.e_norm_left < self.min_e_norm {
            self.min_e_norm = sample.e_norm_left;
            self.argmin = l;
        }
    }

    /// Earlier-range stats win ties, so folding in range order is stable.
    fn combine(&mut self, other: &DecadeStats) {
        debug_assert_eq!(self.lo, other.lo);
        self.jumps += other.jumps;
        if other.max_e_norm > self.max_e_norm {
            self.max_e_norm = other.max_e_norm;
            self.argmax = other.argmax;
        }
        if other.min_e_norm < self.min_e_norm {
            self.min_e_norm = other.min_e_norm;
            self.argmin = other.argmin;
        }
    }
}

/// Running signed records of E(x)/√x plus per-decade summaries. Tables over
/// adjacent ranges merge associatively.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordTable {
    /// Strictly increasing right-limit records.
    pub max_records: Vec<RecordEntry>,
    /// Strictly decreasing left-limit records.
    pub min_records: Vec<RecordEntry>,
    /// Per-decade extremes, ascending by decade.
    pub decades: Vec<DecadeStats>,
}

impl RecordTable {
    pub fn current_max(&self) -> f64 {
        self.max_records
            .last()
            .map_or(f64::NEG_INFINITY, |r| r.value)
    }

    pub fn current_min(&self) -> f64 {
        self.min_records.last().map_or(f64::INFINITY, |r| r.value)
    }

    /// Merges a table covering the adjacent range to the right of `self`.
    pub fn merge(mut self, right: RecordTable) -> RecordTable {
        for r in right.max_records {
            if r.value > self.current_max() {
                self.max_records.push(r);
            }
        }
        for r in right.min_records {
            if r.value < self.current_min() {
                self.min_records.push(r);
            }
        }
        self.decades = merge_decades(self.decades, right.decades);
        self
    }
}

fn merge_decades(left: Vec<DecadeStats>, right: Vec<DecadeStats>) -> Vec<DecadeStats> {
    let mut out: Vec<DecadeStats> = left;
    for r in right {
        match out.iter_mut().find(|d| d.lo == r.lo) {
            Some(d) => d.combine(&r),
            None => out.push(r),
        }
    }
    out.sort_by_key(|d| d.lo);
    out
}

/// Consumer of emitted jump samples.
pub trait SampleSink {
    fn emit(&mut self, sample: &CountSample) -> io::Result<()>;
}

/// Discards every sample; use when only the records matter.
pub struct NullSink;

impl SampleSink for NullSink {
    fn emit(&mut self, _sample: &CountSample) -> io::Result<()> {
        Ok(())
    }
}

/// Collects samples in memory.
#[derive(Default)]
pub struct VecSink(pub Vec<CountSample>);

impl SampleSink for VecSink {
    fn emit(&mut self, sample: &CountSample) -> io::Result<()> {
        self.0.push(*sample);
        Ok(())
    }
}

pub const CSV_HEADER: &str = "x,s_left,s_right,e_left,e_right,e_norm_left,e_norm_right";

/// Writes samples as CSV: decimal notation, 10 significant digits, LF endings.
pub struct CsvSink<W: Write> {
    writer: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut writer: W) -> io::Result<Self> {
        writeln!(writer, "{CSV_HEADER}")?;
        Ok(CsvSink { writer })
    }

    pub fn into_inner(self) -> W {
        self.writer
    }
}

pub fn csv_row(s: &CountSample) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.x,
        s.s_left,
        s.s_right,
        sig10(s.e_left),
        sig10(s.e_right),
        sig10(s.e_norm_left),
        sig10(s.e_norm_right)
    )
}

impl<W: Write> SampleSink for CsvSink<W> {
    fn emit(&mut self, sample: &CountSample) -> io::Result<()> {
        writeln!(self.writer, "{}", csv_row(sample))
    }
}

/// Scan output: the record table plus exactness counters.
#[derive(Debug)]
pub struct ScanReport {
    pub records: RecordTable,
    /// S(x_max), accumulated jump by jump.
    pub final_count: u64,
    /// Number of jumps in [1, x_max).
    pub jump_count: u64,
    /// Largest |E(x)|/(√x·ln x) over jumps with x ≥ 100, and where.
    pub corollary_max: Option<RecordEntry>,
}

struct EmitRow {
    sample: CountSample,
    strided: bool,
    max_candidate: bool,
    min_candidate: bool,
}

struct SegmentScan {
    rows: Vec<EmitRow>,
    decades: Vec<DecadeStats>,
    corollary: Option<RecordEntry>,
    rho_total: u64,
}

/// Per-segment ρ₁ totals and jump counts, plus their prefix sums.
pub(crate) struct SegmentGrid {
    pub segments: Vec<(u64, u64)>,
    /// S at each segment's lower edge (index k), plus S(x_max) at the end.
    pub s_offsets: Vec<u64>,
    /// Jumps before each segment, plus the total at the end.
    pub jump_offsets: Vec<u64>,
}

pub(crate) fn split_range(x_max: u64, segment_len: u64) -> Vec<(u64, u64)> {
    let mut segments = Vec::new();
    let mut k = 0u64;
    loop {
        let lo = (k * segment_len).max(1);
        let hi = ((k + 1) * segment_len).min(x_max);
        if lo >= x_max {
            break;
        }
        segments.push((lo, hi));
        k += 1;
    }
    segments
}

/// Pass 1: totals per segment in parallel, then the sequential prefix sums.
pub(crate) fn segment_grid(
    x_max: u64,
    segment_len: u64,
    entries: &[(u64, u32)],
) -> Result<SegmentGrid, ScanError> {
    let segments = split_range(x_max, segment_len);
    let totals: Vec<(u64, u64)> = segments
        .par_iter()
        .map_init(Vec::<u64>::new, |buf, &(lo, hi)| {
            let len = (hi - lo) as usize;
            buf.clear();
            buf.resize(len, 0);
            arith::fill_density(lo, entries, buf);
            let mut total = 0u64;
            let mut jumps = 0u64;
            for &d in buf.iter() {
                if d > 0 {
                    total += d;
                    jumps += 1;
                }
            }
            (total, jumps)
        })
        .collect();

    let mut s_offsets = Vec::with_capacity(segments.len() + 1);
    let mut jump_offsets = Vec::with_capacity(segments.len() + 1);
    let mut s = 1u64; // ρ₁(0)
    let mut j = 0u64;
    s_offsets.push(s);
    jump_offsets.push(j);
    for &(total, jumps) in &totals {
        s = s.checked_add(total).ok_or(ScanError::CountOverflow)?;
        j += jumps;
        s_offsets.push(s);
        jump_offsets.push(j);
    }
    Ok(SegmentGrid {
        segments,
        s_offsets,
        jump_offsets,
    })
}

fn scan_segment(
    lo: u64,
    hi: u64,
    s_offset: u64,
    jump_offset: u64,
    stride: u64,
    entries: &[(u64, u32)],
    buf: &mut Vec<u64>,
) -> SegmentScan {
    let len = (hi - lo) as usize;
    buf.clear();
    buf.resize(len, 0);
    arith::fill_density(lo, entries, buf);

    let mut rows = Vec::new();
    let mut decades: Vec<DecadeStats> = Vec::new();
    let mut corollary: Option<RecordEntry> = None;
    let mut running = s_offset;
    let mut rho_total = 0u64;
    let mut jumps = 0u64;
    let mut local_max = f64::NEG_INFINITY;
    let mut local_min = f64::INFINITY;
    let ln_floor = (lo.max(100) as f64).ln();

    for (i, &d) in buf.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let l = lo + i as u64;
        let sample = jump_sample(l, running, d);
        running += d;
        rho_total += d;

        match decades.last_mut() {
            Some(dec) if l < dec.hi => dec.absorb(l, &sample),
            _ => decades.push(DecadeStats::first(l, &sample)),
        }

        if l >= 100 {
            let e_abs = sample.e_norm_left.abs().max(sample.e_norm_right.abs());
            let floor = corollary.map_or(0.0, |c| c.value);
            // ln is monotone; only divide when the candidate can win.
            if e_abs > floor * ln_floor {
                let ratio = e_abs / (l as f64).ln();
                if ratio > floor {
                    corollary = Some(RecordEntry { x: l, value: ratio });
                }
            }
        }

        let max_candidate = sample.e_norm_right > local_max;
        if max_candidate {
            local_max = sample.e_norm_right;
        }
        let min_candidate = sample.e_norm_left < local_min;
        if min_candidate {
            local_min = sample.e_norm_left;
        }
        let strided = (jump_offset + jumps).is_multiple_of(stride);
        jumps += 1;
        if strided || max_candidate || min_candidate {
            rows.push(EmitRow {
                sample,
                strided,
                max_candidate,
                min_candidate,
            });
        }
    }
    SegmentScan {
        rows,
        decades,
        corollary,
        rho_total,
    }
}

/// Sweeps every jump in [1, x_max), updating records and emitting the strided
/// samples plus every new record, in ascending x. Output is a pure function
/// of (x_max, segment_len, sample_stride) — thread count never changes it.
pub fn scan<S: SampleSink>(cfg: &ScanConfig, sink: &mut S) -> Result<ScanReport, ScanError> {
    cfg.validate()?;
    let r2 = r2_sieve(0, isqrt_floor((cfg.x_max - 1) as u128) + 1)?;
    let entries = r2.nonzero_entries();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ScanError::Config(e.to_string()))?;

    let (grid, segment_scans) = pool.install(|| -> Result<_, ScanError> {
        let grid = segment_grid(cfg.x_max, cfg.segment_len, &entries)?;
        let scans: Vec<SegmentScan> = grid
            .segments
            .par_iter()
            .enumerate()
            .map_init(Vec::<u64>::new, |buf, (k, &(lo, hi))| {
                scan_segment(
                    lo,
                    hi,
                    grid.s_offsets[k],
                    grid.jump_offsets[k],
                    cfg.sample_stride,
                    &entries,
                    buf,
                )
            })
            .collect();
        Ok((grid, scans))
    })?;

    let mut records = RecordTable::default();
    let mut corollary: Option<RecordEntry> = None;
    for (k, seg) in segment_scans.iter().enumerate() {
        let expected = grid.s_offsets[k + 1] - grid.s_offsets[k];
        if seg.rho_total != expected {
            let (lo, hi) = grid.segments[k];
            return Err(ScanError::SegmentMismatch { lo, hi });
        }
        for row in &seg.rows {
            let mut is_record = false;
            if row.max_candidate && row.sample.e_norm_right > records.current_max() {
                records.max_records.push(RecordEntry {
                    x: row.sample.x,
                    value: row.sample.e_norm_right,
                });
                is_record = true;
            }
            if row.min_candidate && row.sample.e_norm_left < records.current_min() {
                records.min_records.push(RecordEntry {
                    x: row.sample.x,
                    value: row.sample.e_norm_left,
                });
                is_record = true;
            }
            if row.strided || is_record {
                sink.emit(&row.sample)?;
            }
        }
        records.decades = merge_decades(std::mem::take(&mut records.decades), seg.decades.clone());
        if let Some(c) = seg.corollary {
            if corollary.is_none_or(|cur| c.value > cur.value) {
                corollary = Some(c);
            }
        }
    }

    Ok(ScanReport {
        records,
        final_count: *grid.s_offsets.last().unwrap(),
        jump_count: *grid.jump_offsets.last().unwrap(),
        corollary_max: corollary,
    })
}

/// Per-decade summary with |Q| sampled at the decade's extremal abscissae.
/// The r₂ table must cover ⌊√x⌋ for the largest recorded abscissa.
pub fn decade_summary(rt: &RecordTable, r2: &R2Table) -> Result<Vec<DecadeStats>, ScanError> {
    if rt.decades.is_empty() {
        return Err(ScanError::EmptyRange);
    }
    Ok(rt
        .decades
        .iter()
        .map(|d| {
            let q_hi = q_value(d.argmax as f64, r2).q_val.abs();
            let q_lo = q_value(d.argmin as f64, r2).q_val.abs();
            DecadeStats {
                max_abs_q: Some(q_hi.max(q_lo)),
                ..*d
            }
        })
        .collect())
}

pub const DECADE_CSV_HEADER: &str =
    "decade_lo,decade_hi,jumps,max_e_norm,argmax,min_e_norm,argmin,max_abs_q";

/// Renders decade stats as CSV (same numeric conventions as the sample CSV).
pub fn decade_summary_csv(stats: &[DecadeStats]) -> String {
    let mut out = String::from(DECADE_CSV_HEADER);
    out.push('\n');
    for d in stats {
        let q = d.max_abs_q.map_or_else(|| "".to_string(), sig10);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            d.lo,
            d.hi,
            d.jumps,
            sig10(d.max_e_norm),
            d.argmax,
            sig10(d.min_e_norm),
            d.argmin,
            q
        ));
    }
    out
}

#[derive(Serialize)]
struct RecordRow {
    x: u64,
    value: f64,
    kind: &'static str,
}

/// Records as a JSON array of {"x", "value", "kind"} rows, ascending in x,
/// "max" before "min" at equal x.
pub fn records_json(rt: &RecordTable) -> String {
    let mut rows: Vec<RecordRow> = rt
        .max_records
        .iter()
        .map(|r| RecordRow {
            x: r.x,
            value: r.value,
            kind: "max",
        })
        .chain(rt.min_records.iter().map(|r| RecordRow {
            x: r.x,
            value: r.value,
            kind: "min",
        }))
        .collect();
    rows.sort_by_key(|r| (r.x, r.kind != "max"));
    serde_json::to_string(&rows).expect("record serialization cannot fail")
}
