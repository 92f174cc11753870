//! Exact integer kernels: integer square roots, a windowed sieve for the
//! sum-of-squares function r₂, and segmented generation of the jump density
//! ρ₁(l) = Σ_{m²+n²=l, m≥0, n∈ℤ} r₂(m).
//!
//! Everything here is computed by direct enumeration of lattice points whose
//! value lands in a half-open window, which keeps each entry exact, avoids
//! factorization entirely, and lets disjoint windows run on separate threads
//! with no shared state. Counts are held in 64-bit unsigned accumulators;
//! S(x) ≈ 4.94·x stays below 2⁶³ for x ≤ 10¹⁸.

use thiserror::Error;

/// Hard cap on a single sieve or density window, in table entries.
pub const MAX_SEGMENT_LEN: u64 = 1 << 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("segment of {requested} entries exceeds the {budget}-entry budget")]
    SegmentBudget { requested: u64, budget: u64 },
    #[error("r2 table covers [0, {covered}) but coverage of [0, {needed}] is required")]
    TableTooShort { needed: u64, covered: u64 },
    #[error("window end {0} exceeds 2^63")]
    RangeOverflow(u128),
}

/// Largest k ≥ 0 with k² ≤ v.
#[inline]
pub fn isqrt_floor(v: u128) -> u64 {
    // The root of a u128 always fits in 64 bits.
    v.isqrt() as u64
}

/// Largest k ≥ 0 with k² < v, or `None` when v ≤ 0 (no integer qualifies).
#[inline]
pub fn isqrt_strict(v: i128) -> Option<u64> {
    if v <= 0 {
        None
    } else {
        Some(isqrt_floor((v - 1) as u128))
    }
}

/// Number of integers n with n² < v, i.e. 2·isqrt_strict(v) + 1, or 0 for v ≤ 0.
#[inline]
pub fn strict_width(v: i128) -> u64 {
    match isqrt_strict(v) {
        Some(k) => 2 * k + 1,
        None => 0,
    }
}

/// Smallest k ≥ 0 with k² ≥ v (v ≥ 0).
#[inline]
fn ceil_sqrt(v: u64) -> u64 {
    if v == 0 {
        0
    } else {
        isqrt_floor((v - 1) as u128) + 1
    }
}

/// Contiguous table of r₂(m) over [start, start + len).
///
/// r₂(m) counts ordered signed pairs (a, b) ∈ ℤ² with a² + b² = m, so
/// r₂(0) = 1 (the origin) and r₂(m) ≡ 0 (mod 4) for m ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct R2Table {
    start: u64,
    values: Vec<u32>,
}

impl R2Table {
    pub fn start(&self) -> u64 {
        self.start
    }

    /// One past the largest m in the window.
    pub fn end(&self) -> u64 {
        self.start + self.values.len() as u64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// r₂(m); panics if m is outside the window.
    #[inline]
    pub fn get(&self, m: u64) -> u32 {
        assert!(
            m >= self.start && m < self.end(),
            "r2 table covers [{}, {}), asked for {}",
            self.start,
            self.end(),
            m
        );
        self.values[(m - self.start) as usize]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// True when the table starts at 0 and covers m.
    pub fn covers(&self, m: u64) -> bool {
        self.start == 0 && self.end() > m
    }

    /// The (m, r₂(m)) pairs with r₂(m) > 0, in increasing m.
    pub fn nonzero_entries(&self) -> Vec<(u64, u32)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (self.start + i as u64, v))
            .collect()
    }

    fn require_coverage(&self, needed: u64) -> Result<(), ArithError> {
        if self.covers(needed) {
            Ok(())
        } else {
            Err(ArithError::TableTooShort {
                needed,
                covered: if self.start == 0 { self.end() } else { 0 },
            })
        }
    }
}

/// Exact r₂ over [start, start + len) by enumerating the pairs (a, b) with
/// a, b ≥ 0 whose a² + b² lands in the window; sign combinations are counted
/// with weight (a>0 ? 2 : 1)·(b>0 ? 2 : 1).
pub fn r2_sieve(start: u64, len: u64) -> Result<R2Table, ArithError> {
    if len > MAX_SEGMENT_LEN {
        return Err(ArithError::SegmentBudget {
            requested: len,
            budget: MAX_SEGMENT_LEN,
        });
    }
    let end = start as u128 + len as u128;
    if end > 1 << 63 {
        return Err(ArithError::RangeOverflow(end));
    }
    let mut values = vec![0u32; len as usize];
    if len == 0 {
        return Ok(R2Table { start, values });
    }
    let top = start + len - 1;
    let a_max = isqrt_floor(top as u128);
    for a in 0..=a_max {
        let a2 = a * a;
        let b_min = if a2 >= start {
            0
        } else {
            ceil_sqrt(start - a2)
        };
        let b_max = isqrt_floor((top - a2) as u128);
        let wa = if a > 0 { 2u32 } else { 1 };
        for b in b_min..=b_max {
            let m = a2 + b * b;
            let wb = if b > 0 { 2u32 } else { 1 };
            values[(m - start) as usize] += wa * wb;
        }
    }
    Ok(R2Table { start, values })
}

/// Density of the jumps of S over a half-open window [lo, hi):
/// `density[l - lo]` = ρ₁(l) = Σ over m ≥ 0, n ∈ ℤ with m² + n² = l of r₂(m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoSegment {
    lo: u64,
    hi: u64,
    density: Vec<u64>,
}

impl RhoSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn density(&self) -> &[u64] {
        &self.density
    }

    /// ρ₁(l); panics if l is outside the window.
    #[inline]
    pub fn get(&self, l: u64) -> u64 {
        assert!(
            l >= self.lo && l < self.hi,
            "l outside [{}, {})",
            self.lo,
            self.hi
        );
        self.density[(l - self.lo) as usize]
    }

    /// The jumps in the window: (l, ρ₁(l)) with ρ₁(l) > 0, in increasing l.
    pub fn jumps(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.density
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(i, &d)| (self.lo + i as u64, d))
    }
}

/// Adds every (m, n) contribution with m² + n² ∈ [lo, lo + buf.len()) into
/// `buf`. `entries` must hold the nonzero (m, r₂(m)) pairs covering the
/// window, in increasing m. The caller zeroes `buf`.
pub(crate) fn fill_density(lo: u64, entries: &[(u64, u32)], buf: &mut [u64]) {
    let hi = lo + buf.len() as u64;
    for &(m, w) in entries {
        let m2 = m * m;
        if m2 >= hi {
            break;
        }
        let w1 = w as u64;
        let n_max = isqrt_strict((hi - m2) as i128).unwrap_or(0);
        let mut n = if m2 >= lo { 0 } else { ceil_sqrt(lo - m2) };
        if n == 0 {
            buf[(m2 - lo) as usize] += w1; // n = 0 counted once
            n = 1;
        }
        let w2 = 2 * w1;
        let mut l = m2 + n * n;
        while n <= n_max {
            buf[(l - lo) as usize] += w2;
            l += 2 * n + 1;
            n += 1;
        }
    }
}

/// ρ₁ over [lo, hi). The r₂ table must start at 0 and cover ⌊√(hi−1)⌋.
pub fn rho_segment(lo: u64, hi: u64, r2: &R2Table) -> Result<RhoSegment, ArithError> {
    assert!(lo <= hi, "inverted window [{lo}, {hi})");
    let len = hi - lo;
    if len > MAX_SEGMENT_LEN {
        return Err(ArithError::SegmentBudget {
            requested: len,
            budget: MAX_SEGMENT_LEN,
        });
    }
    let mut density = vec![0u64; len as usize];
    if len > 0 {
        r2.require_coverage(isqrt_floor((hi - 1) as u128))?;
        let entries = r2.nonzero_entries();
        fill_density(lo, &entries, &mut density);
    }
    Ok(RhoSegment { lo, hi, density })
}

/// ρ₁(l) at a single point: Σ r₂(m) over m ≥ 0 with l − m² a perfect square,
/// weighting n ≠ 0 twice. The table must cover ⌊√l⌋.
pub fn rho_value(l: u64, r2: &R2Table) -> Result<u64, ArithError> {
    r2.require_coverage(isqrt_floor(l as u128))?;
    let mut total = 0u64;
    let mut m = 0u64;
    while m * m <= l {
        let w = r2.get(m) as u64;
        if w > 0 {
            let n2 = l - m * m;
            let n = isqrt_floor(n2 as u128);
            if n * n == n2 {
                total += w * if n > 0 { 2 } else { 1 };
            }
        }
        m += 1;
    }
    Ok(total)
}
