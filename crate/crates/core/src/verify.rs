//! The release checks. Each criterion runs with its tolerance pinned in code,
//! prints one pass/fail line, and reports the observed constant so bound
//! checks double as measurements.

use std::fmt;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::arith::{self, isqrt_floor, r2_sieve, rho_segment};
use crate::counting::{ball_count, jump_sample};
use crate::gauge::{
    brute_count_exact, dilate, gauge_distance, gauge_norm, group_mul, mc_volume, sample_point,
    GaugeParams, HPoint,
};
use crate::num::Kahan;
use crate::riesz::{
    remainder_ratio, riesz_error, series_partial_sum, sqrt_series, taylor_coeff, SERIES_TERMS,
};
use crate::rng::SplitMix64;
use crate::scanner::{
    records_json, scan, segment_grid, CsvSink, NullSink, RecordEntry, ScanConfig,
};

const PI2_HALF: f64 = 4.934802200544679;
const PI2_QUARTER: f64 = 2.4674011002723395;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    /// Observed constants, tolerances and timings, human-readable.
    pub observed: String,
    /// Anomaly worth surfacing even when the criterion passes.
    pub finding: Option<String>,
}

impl CriterionReport {
    fn new(id: u32, name: &'static str, pass: bool, observed: String) -> Self {
        CriterionReport {
            id,
            name,
            pass,
            observed,
            finding: None,
        }
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:2}] {} — {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.observed
        )?;
        if let Some(note) = &self.finding {
            write!(f, "\n     FINDING: {note}")?;
        }
        Ok(())
    }
}

/// Which criteria to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Arith,
    Gauge,
    Identities,
    Scan,
}

impl Suite {
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13],
            Suite::Arith => &[1, 2],
            Suite::Identities => &[3, 4, 5, 6, 7, 9],
            Suite::Gauge => &[11, 12],
            Suite::Scan => &[8, 10, 13],
        }
    }
}

/// Runs a suite in criterion order.
pub fn run(suite: Suite) -> Vec<CriterionReport> {
    suite
        .criteria()
        .iter()
        .map(|&id| run_criterion(id))
        .collect()
}

pub fn run_criterion(id: u32) -> CriterionReport {
    match id {
        1 => c01_oracle_equivalence(),
        2 => c02_density_totals(),
        3 => c03_coefficient_identity(),
        4 => c04_sqrt_expansion(),
        5 => c05_remainder_absoluteness(),
        6 => c06_sharp_smoothed_gap(),
        7 => c07_error_tracks_q(),
        8 => c08_log_bound(),
        9 => c09_riesz_three_halves(),
        10 => c10_oscillation_evidence(),
        11 => c11_gauge_properties(),
        12 => c12_volume(),
        13 => c13_scan_determinism(),
        _ => panic!("unknown criterion {id}"),
    }
}

pub fn all_passed(reports: &[CriterionReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// --- criterion 1 -----------------------------------------------------------

/// Histogram of (a² + b²)² + w² over ℤ³, pure integer compares, no square
/// roots: the independent oracle for the sieve-based count.
fn z3_value_histogram(limit: u64) -> Vec<u64> {
    let lim = limit as u128;
    let mut hist = vec![0u64; limit as usize];
    let mut a = 0u64;
    while (a * a) as u128 * (a * a) as u128 <= lim {
        let wa = if a > 0 { 2u64 } else { 1 };
        let mut b = 0u64;
        loop {
            let m = a * a + b * b;
            let m2 = m as u128 * m as u128;
            if m2 >= lim {
                break;
            }
            let wb = wa * if b > 0 { 2 } else { 1 };
            let mut w = 0u64;
            loop {
                let v = m2 + (w as u128 * w as u128);
                if v >= lim {
                    break;
                }
                hist[v as usize] += wb * if w > 0 { 2 } else { 1 };
                w += 1;
            }
            b += 1;
        }
        a += 1;
    }
    hist
}

pub fn c01_oracle_equivalence() -> CriterionReport {
    const LIMIT: u64 = 20_000;
    let start = Instant::now();
    let hist = z3_value_histogram(LIMIT);
    let r2 = r2_sieve(0, isqrt_floor((LIMIT - 1) as u128) + 1).unwrap();
    let mut prefix = 0u64;
    let mut mismatches = 0u64;
    for x in 1..=LIMIT {
        prefix += hist[(x - 1) as usize];
        if ball_count(x, &r2) != prefix {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(30);
    CriterionReport::new(
        1,
        "exact count equals integer-point enumeration",
        pass,
        format!(
            "{mismatches} mismatches over x in [1, {LIMIT}], {} (budget 30s, single thread)",
            secs(elapsed)
        ),
    )
}

// --- criterion 2 -----------------------------------------------------------

pub fn c02_density_totals() -> CriterionReport {
    const X_MAX: u64 = 1_000_000;
    let start = Instant::now();
    let r2 = r2_sieve(0, 1_001).unwrap();
    let mut rng = SplitMix64::new(0xD0_2200);
    let mut targets: Vec<u64> = (0..100).map(|_| 1 + rng.next_below(X_MAX)).collect();
    targets.sort_unstable();
    targets.dedup();

    let seg = rho_segment(0, X_MAX, &r2).unwrap();
    let mut prefix = 0u64;
    let mut next = 0usize;
    let mut mismatches = 0u64;
    for l in 0..X_MAX {
        while next < targets.len() && targets[next] == l {
            if ball_count(l, &r2) != prefix {
                mismatches += 1;
            }
            next += 1;
        }
        prefix += seg.get(l);
    }
    while next < targets.len() {
        if ball_count(targets[next], &r2) != prefix {
            mismatches += 1;
        }
        next += 1;
    }
    CriterionReport::new(
        2,
        "jump-density prefix sums equal the count",
        mismatches == 0,
        format!(
            "{mismatches} mismatches at {} random x <= 1e6, {}",
            targets.len(),
            secs(start.elapsed())
        ),
    )
}

// --- criterion 3 -----------------------------------------------------------

pub fn c03_coefficient_identity() -> CriterionReport {
    let diff = (series_partial_sum(64) - PI2_QUARTER).abs();
    CriterionReport::new(
        3,
        "coefficient series sums to pi^2/4",
        diff < 1e-9,
        format!("|partial(64) - pi^2/4| = {diff:.3e} (tolerance 1e-9)"),
    )
}

// --- criterion 4 -----------------------------------------------------------

pub fn c04_sqrt_expansion() -> CriterionReport {
    let mut rng = SplitMix64::new(0xACC4);
    let mut max_rel = 0.0f64;
    let mut max_floor_units = 0.0f64;
    let mut failures = 0u32;
    for _ in 0..100 {
        let x = 10f64.powf(rng.next_in(1.0, 8.0));
        let sqrt_x = x.sqrt();
        let m = rng.next_below(sqrt_x.floor() as u64 + 1);
        let truth = (x - (m * m) as f64).sqrt();
        let s = sqrt_series(x, m, SERIES_TERMS);
        let diff = (s.value - truth).abs();

        // The mathematical tail at 40 terms sits far below binary64
        // resolution for most m, so the comparison carries an explicit
        // measurement floor of 128 eps times the leading scales.
        let base = sqrt_x - m as f64;
        let scale = taylor_coeff(0, x) * base.sqrt() + truth;
        let floor = 128.0 * f64::EPSILON * scale;
        if diff > s.tail_bound + floor {
            failures += 1;
        }
        if floor > 0.0 {
            max_floor_units = max_floor_units.max((diff - s.tail_bound).max(0.0) / floor);
        }

        if m as f64 <= 0.99 * sqrt_x && truth > 0.0 {
            let rel = diff / truth;
            max_rel = max_rel.max(rel);
            if rel >= 1e-6 {
                failures += 1;
            }
        }

        // At low orders the majorant dwarfs float noise; check it raw.
        if m as f64 <= 0.5 * sqrt_x {
            for terms in [4u32, 8] {
                let low = sqrt_series(x, m, terms);
                if (low.value - truth).abs() > low.tail_bound {
                    failures += 1;
                }
            }
        }
    }
    CriterionReport::new(
        4,
        "square-root expansion within its tail bound",
        failures == 0,
        format!(
            "{failures} failures over 100 samples; max rel err {max_rel:.2e} (tol 1e-6), \
             worst noise {max_floor_units:.2} of the 128-eps floor"
        ),
    )
}

// --- criterion 5 -----------------------------------------------------------

pub fn c05_remainder_absoluteness() -> CriterionReport {
    let start = Instant::now();
    let r2 = r2_sieve(0, 100_001).unwrap();
    let mut worst = 0.0f64;
    let mut worst_at = (0.0f64, 0u32);
    let mut per_n_max = [0.0f64; 9];
    for k in 4..=10u32 {
        let x = 10f64.powi(k as i32);
        for n in 1..=8u32 {
            let ratio = remainder_ratio(x, n, &r2);
            per_n_max[n as usize] = per_n_max[n as usize].max(ratio);
            if ratio > worst {
                worst = ratio;
                worst_at = (x, n);
            }
        }
    }
    CriterionReport::new(
        5,
        "decomposed-sum remainders uniformly bounded",
        worst.is_finite() && worst <= 100.0,
        format!(
            "max ratio {worst:.4} at (x, n) = ({:.0e}, {}) over n in [1,8], x in 1e4..1e10 \
             (tolerance 100); uniformity in n: max at n=2 is {:.2e}, at n=8 is {:.2e}; {}",
            worst_at.0,
            worst_at.1,
            per_n_max[2],
            per_n_max[8],
            secs(start.elapsed())
        ),
    )
}

// --- criteria 6 and 7 (shared sweep) ----------------------------------------

struct SweepOutcome {
    max_gap: RecordEntry,
    max_identity: RecordEntry,
    jumps: u64,
    elapsed: Duration,
}

/// One pass over every jump in [1, 1e7): the sharp/smoothed gap at all jumps
/// and the E/√x vs 2Q deviation for x ≥ 1e3.
fn jump_sweep() -> &'static SweepOutcome {
    static SWEEP: OnceLock<SweepOutcome> = OnceLock::new();
    SWEEP.get_or_init(|| {
        const X_MAX: u64 = 10_000_000;
        let start = Instant::now();
        let r2 = r2_sieve(0, isqrt_floor((X_MAX - 1) as u128) + 1).unwrap();
        let entries = r2.nonzero_entries();
        let m_f: Vec<f64> = entries.iter().map(|&(m, _)| m as f64).collect();
        let m2_f: Vec<f64> = entries.iter().map(|&(m, _)| (m * m) as f64).collect();
        let w_f: Vec<f64> = entries.iter().map(|&(_, w)| w as f64).collect();

        let grid = segment_grid(X_MAX, 1 << 19, &entries).unwrap();
        let per_segment: Vec<(RecordEntry, RecordEntry, u64)> = grid
            .segments
            .par_iter()
            .enumerate()
            .map_init(Vec::<u64>::new, |buf, (k, &(lo, hi))| {
                buf.clear();
                buf.resize((hi - lo) as usize, 0);
                arith::fill_density(lo, &entries, buf);
                let mut running = grid.s_offsets[k];
                let mut gap_best = RecordEntry {
                    x: 0,
                    value: f64::NEG_INFINITY,
                };
                let mut id_best = RecordEntry {
                    x: 0,
                    value: f64::NEG_INFINITY,
                };
                let mut jumps = 0u64;
                for (i, &d) in buf.iter().enumerate() {
                    if d == 0 {
                        continue;
                    }
                    let l = lo + i as u64;
                    jumps += 1;
                    let xf = l as f64;
                    let y = xf.sqrt();
                    let mut smooth = Kahan::default();
                    let mut half = Kahan::default();
                    for j in 0..m_f.len() {
                        if m2_f[j] > xf {
                            break;
                        }
                        smooth.add(w_f[j] * (xf - m2_f[j]).sqrt());
                        half.add(w_f[j] * (y - m_f[j]).sqrt());
                    }
                    let gap = (running as f64 - 2.0 * smooth.value()).abs() / y;
                    if gap > gap_best.value {
                        gap_best = RecordEntry { x: l, value: gap };
                    }
                    if l >= 1_000 {
                        let e_half = half.value() - std::f64::consts::PI * y * y.sqrt() / 1.5;
                        let q = std::f64::consts::SQRT_2 * e_half / y.sqrt();
                        let sample = jump_sample(l, running, d);
                        let dev = (sample.e_norm_left - 2.0 * q).abs();
                        if dev > id_best.value {
                            id_best = RecordEntry { x: l, value: dev };
                        }
                    }
                    running += d;
                }
                (gap_best, id_best, jumps)
            })
            .collect();

        let mut max_gap = RecordEntry {
            x: 0,
            value: f64::NEG_INFINITY,
        };
        let mut max_identity = RecordEntry {
            x: 0,
            value: f64::NEG_INFINITY,
        };
        let mut jumps = 0u64;
        for (gap, id, j) in per_segment {
            if gap.value > max_gap.value {
                max_gap = gap;
            }
            if id.value > max_identity.value {
                max_identity = id;
            }
            jumps += j;
        }
        SweepOutcome {
            max_gap,
            max_identity,
            jumps,
            elapsed: start.elapsed(),
        }
    })
}

pub fn c06_sharp_smoothed_gap() -> CriterionReport {
    let sweep = jump_sweep();
    CriterionReport::new(
        6,
        "sharp vs smoothed count gap below 4 sqrt x",
        sweep.max_gap.value <= 4.0,
        format!(
            "max |S - 2M|/sqrt(x) = {:.6} at x = {} over {} jumps < 1e7 (tolerance 4), {}",
            sweep.max_gap.value,
            sweep.max_gap.x,
            sweep.jumps,
            secs(sweep.elapsed)
        ),
    )
}

pub fn c07_error_tracks_q() -> CriterionReport {
    let sweep = jump_sweep();
    CriterionReport::new(
        7,
        "normalized error tracks twice the oscillation",
        sweep.max_identity.value <= 8.0,
        format!(
            "max |E/sqrt(x) - 2Q| = {:.6} at x = {} over jumps in [1e3, 1e7) (tolerance 8)",
            sweep.max_identity.value, sweep.max_identity.x
        ),
    )
}

// --- criterion 8 -----------------------------------------------------------

pub fn c08_log_bound() -> CriterionReport {
    let start = Instant::now();
    let mut cfg = ScanConfig::new(100_000_001);
    cfg.sample_stride = u64::MAX;
    let report = scan(&cfg, &mut NullSink).expect("scan to 1e8");
    let c = report.corollary_max.expect("jumps past 100 exist");
    CriterionReport::new(
        8,
        "error bounded by 2 sqrt(x) ln x",
        c.value <= 2.0,
        format!(
            "max |E|/(sqrt(x) ln x) = {:.6} at x = {} over jumps in [1e2, 1e8] (tolerance 2), {}",
            c.value,
            c.x,
            secs(start.elapsed())
        ),
    )
}

// --- criterion 9 -----------------------------------------------------------

pub fn c09_riesz_three_halves() -> CriterionReport {
    let start = Instant::now();
    let r2 = r2_sieve(0, 10_001).unwrap();
    // Geometric grid over [1e4, 1e8], endpoints included.
    const POINTS: usize = 513;
    let worst = (0..POINTS)
        .into_par_iter()
        .map(|k| {
            let x = 1e4 * (1e4f64).powf(k as f64 / (POINTS - 1) as f64);
            let e = riesz_error(x.sqrt(), 1.5, &r2).e_rho;
            (e.abs() / x.sqrt(), x)
        })
        .reduce(
            || (f64::NEG_INFINITY, 0.0),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    CriterionReport::new(
        9,
        "order-3/2 Riesz error below 10 sqrt x",
        worst.0 <= 10.0,
        format!(
            "max |E_3/2(sqrt x)|/sqrt(x) = {:.6} at x = {:.4e} on a {POINTS}-point grid over \
             [1e4, 1e8] (tolerance 10), {}",
            worst.0,
            worst.1,
            secs(start.elapsed())
        ),
    )
}

// --- criterion 10 ----------------------------------------------------------

pub fn c10_oscillation_evidence() -> CriterionReport {
    let start = Instant::now();
    let mut cfg = ScanConfig::new(1_000_000_000);
    cfg.sample_stride = u64::MAX;
    let report = scan(&cfg, &mut NullSink).expect("scan to 1e9");
    let elapsed = start.elapsed();

    let decades: Vec<_> = report
        .records
        .decades
        .iter()
        .filter(|d| (10_000..=100_000_000).contains(&d.lo))
        .collect();
    let mut both_signs = true;
    let mut monotone = true;
    let mut table = String::new();
    for (i, d) in decades.iter().enumerate() {
        both_signs &= d.max_e_norm > 0.0 && d.min_e_norm < 0.0;
        if i > 0 {
            monotone &= d.max_e_norm >= decades[i - 1].max_e_norm
                && d.min_e_norm.abs() >= decades[i - 1].min_e_norm.abs();
        }
        table.push_str(&format!(
            "[1e{},1e{}): max {:+.4} at {}, min {:+.4} at {}; ",
            d.lo.ilog10(),
            d.lo.ilog10() + 1,
            d.max_e_norm,
            d.argmax,
            d.min_e_norm,
            d.argmin
        ));
    }
    let in_budget = elapsed < Duration::from_secs(300);
    let pass = both_signs && in_budget && decades.len() == 5;
    let mut rep = CriterionReport::new(
        10,
        "signed oscillation in every decade to 1e9",
        pass,
        format!(
            "both signs in all {} decades: {both_signs}; {} jumps; scan {} (budget 300s); {}",
            decades.len(),
            report.jump_count,
            secs(elapsed),
            table.trim_end_matches("; ")
        ),
    );
    if !monotone {
        rep.finding = Some(
            "per-decade extremes of E/sqrt(x) are NOT weakly non-decreasing across decades; \
             records grow, but not decade by decade"
                .into(),
        );
    }
    rep
}

// --- criterion 11 ----------------------------------------------------------

pub fn c11_gauge_properties() -> CriterionReport {
    let start = Instant::now();
    let p1 = GaugeParams::cygan_koranyi(1);
    let mut rng = SplitMix64::new(0x6A06E);
    let mut homogeneity = 0.0f64;
    let mut radiality = 0.0f64;
    for _ in 0..10_000 {
        let u = sample_point(&mut rng, 1, 10.0);
        let a = rng.next_in(0.01, 100.0);
        let n = gauge_norm(&p1, &u);
        homogeneity = homogeneity
            .max((gauge_norm(&p1, &dilate(a, &u)) - a * n).abs() / (a * n).max(f64::MIN_POSITIVE));
        let theta = rng.next_in(0.0, std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        let rot = HPoint::new(
            vec![c * u.z()[0] - s * u.z()[1], s * u.z()[0] + c * u.z()[1]],
            u.w(),
        );
        radiality = radiality.max((gauge_norm(&p1, &rot) - n).abs() / n.max(f64::MIN_POSITIVE));
    }

    let mut triangle_excess = f64::NEG_INFINITY;
    for q in [1u32, 2] {
        let p = GaugeParams::cygan_koranyi(q);
        let mut rng = SplitMix64::new(0x7121A + q as u64);
        for _ in 0..100_000 {
            let u = sample_point(&mut rng, q, 5.0);
            let v = sample_point(&mut rng, q, 5.0);
            let excess =
                gauge_norm(&p, &group_mul(&u, &v)) - gauge_norm(&p, &u) - gauge_norm(&p, &v);
            triangle_excess = triangle_excess.max(excess);
        }
    }

    let mut invariance = 0.0f64;
    let mut rng = SplitMix64::new(0x1EF7);
    for _ in 0..100_000 {
        let g = sample_point(&mut rng, 1, 4.0);
        let u = sample_point(&mut rng, 1, 4.0);
        let v = sample_point(&mut rng, 1, 4.0);
        let d = gauge_distance(&p1, &u, &v);
        let shifted = gauge_distance(&p1, &group_mul(&g, &u), &group_mul(&g, &v));
        invariance = invariance.max((d - shifted).abs() / d.max(1.0));
    }

    let pass =
        homogeneity <= 1e-12 && radiality <= 1e-12 && triangle_excess <= 1e-9 && invariance <= 1e-9;
    CriterionReport::new(
        11,
        "gauge homogeneity, radiality, triangle, left-invariance",
        pass,
        format!(
            "homogeneity {homogeneity:.2e} (tol 1e-12), radiality {radiality:.2e} (tol 1e-12), \
             triangle excess {triangle_excess:.2e} (tol 1e-9), invariance {invariance:.2e} \
             (tol 1e-9), {}",
            secs(start.elapsed())
        ),
    )
}

// --- criterion 12 ----------------------------------------------------------

pub fn c12_volume() -> CriterionReport {
    let start = Instant::now();
    let p = GaugeParams::cygan_koranyi(1);
    let mc = mc_volume(&p, 10_000_000, 0x48C0FFEE);
    let mc_rel = (mc.estimate - PI2_HALF).abs() / PI2_HALF;
    let ratio = brute_count_exact(1, 1_000_000).unwrap() as f64 / 1e6;
    let brute_rel = (ratio - PI2_HALF).abs() / PI2_HALF;
    CriterionReport::new(
        12,
        "unit-ball volume from sampling and enumeration",
        mc_rel < 0.01 && brute_rel < 0.05,
        format!(
            "MC {:.6} +- {:.1e} vs pi^2/2 = {PI2_HALF:.6} ({:.3}%, tol 1%); \
             count/x at x=1e6: {ratio:.6} ({:.3}%, tol 5%), {}",
            mc.estimate,
            mc.std_err,
            100.0 * mc_rel,
            100.0 * brute_rel,
            secs(start.elapsed())
        ),
    )
}

// --- criterion 13 ----------------------------------------------------------

pub fn c13_scan_determinism() -> CriterionReport {
    let start = Instant::now();
    let mut outputs = Vec::new();
    for threads in [1usize, 8] {
        let mut cfg = ScanConfig::new(1_000_000);
        cfg.threads = threads;
        let mut sink = CsvSink::new(Vec::new()).unwrap();
        let report = scan(&cfg, &mut sink).expect("scan to 1e6");
        outputs.push((sink.into_inner(), records_json(&report.records)));
    }
    let identical = outputs[0] == outputs[1];
    CriterionReport::new(
        13,
        "scan output identical for 1 and 8 threads",
        identical,
        format!(
            "CSV {} bytes, records {} bytes, byte-identical: {identical}, {}",
            outputs[0].0.len(),
            outputs[0].1.len(),
            secs(start.elapsed())
        ),
    )
}
