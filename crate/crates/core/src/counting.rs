//! Exact evaluation of the ball count S(x), the smoothed sum M(x), and the
//! error term E(x) = S(x) − (π²/2)x.
//!
//! S(x) = Σ_{m²+n²<x} r₂(m) over m ≥ 0, n ∈ ℤ equals the number of integer
//! points in the Cygan-Koranyi ball of radius x^{1/4}. S is a step function
//! whose jumps sit exactly at the integers l with ρ₁(l) > 0; between jumps E
//! decreases linearly with slope −π²/2, so the one-sided values at jumps
//! capture every extremum of E over the reals.

use serde::Serialize;

use crate::arith::{strict_width, R2Table};
use crate::num::{two_product, Kahan};

/// π²/2 split into a double-double; the pair carries ~31 significant digits
/// so the main term keeps absolute error ≪ 10⁻³ up to x = 10¹⁵.
pub const MAIN_COEF_HI: f64 = 4.934802200544679;
pub const MAIN_COEF_LO: f64 = 3.1326477543698557e-16;

/// S(x) and both one-sided error values at a jump abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountSample {
    /// Jump abscissa.
    pub x: u64,
    /// S(x): the strict count, excluding l = x.
    pub s_left: u64,
    /// S(x⁺): including the jump ρ₁(x).
    pub s_right: u64,
    /// Main term (π²/2)·x.
    pub main: f64,
    pub e_left: f64,
    pub e_right: f64,
    /// E(x)/√x, left limit.
    pub e_norm_left: f64,
    /// E(x⁺)/√x, right limit.
    pub e_norm_right: f64,
}

/// (π²/2)·x rounded to the nearest f64.
#[inline]
pub fn main_term(x: u64) -> f64 {
    let xf = x as f64;
    MAIN_COEF_HI * xf + MAIN_COEF_LO * xf
}

/// s − (π²/2)·x with the main term compensated, so the small difference is
/// not drowned by the rounding of the product.
#[inline]
pub fn error_term(s: u64, x: u64) -> f64 {
    let xf = x as f64;
    let sf = s as f64;
    let (p, p_err) = two_product(MAIN_COEF_HI, xf);
    ((sf - p) - p_err) - MAIN_COEF_LO * xf
}

/// S(x) = Σ_{m ≥ 0, m² < x} r₂(m)·(2·isqrt_strict(x − m²) + 1).
///
/// The r₂ table must start at 0 and cover ⌊√(x−1)⌋ (for x ≥ 1).
pub fn ball_count(x: u64, r2: &R2Table) -> u64 {
    if x == 0 {
        return 0;
    }
    assert!(
        r2.covers(crate::arith::isqrt_strict(x as i128).unwrap_or(0)),
        "r2 table too short for ball_count({x})"
    );
    let mut total = 0u64;
    let mut m = 0u64;
    while m * m < x {
        let w = r2.get(m) as u64;
        if w > 0 {
            total += w * strict_width(x as i128 - (m * m) as i128);
        }
        m += 1;
    }
    total
}

/// M(x) = Σ_{0 ≤ m ≤ √x} r₂(m)·(x − m²)^{1/2} at an integer abscissa,
/// accumulated from the smallest terms upward.
pub fn smoothed_sum(x: u64, r2: &R2Table) -> f64 {
    smoothed_sum_f(x as f64, r2)
}

/// M at a real abscissa; used when comparing against the term-wise series.
pub fn smoothed_sum_f(x: f64, r2: &R2Table) -> f64 {
    assert!(x >= 0.0 && x.is_finite());
    let top = x.sqrt().floor() as u64;
    assert!(
        r2.covers(top) || x == 0.0,
        "r2 table too short for smoothed_sum({x})"
    );
    let mut acc = Kahan::default();
    for m in (0..=top).rev() {
        let w = r2.get(m) as f64;
        if w > 0.0 {
            let d = x - (m * m) as f64;
            if d > 0.0 {
                acc.add(w * d.sqrt());
            }
        }
    }
    acc.value()
}

/// Both one-sided limits of S and E at a jump. `s_left` must be S(x) and
/// `rho_x` must be ρ₁(x).
pub fn jump_sample(x: u64, s_left: u64, rho_x: u64) -> CountSample {
    let s_right = s_left + rho_x;
    if x == 0 {
        return CountSample {
            x,
            s_left,
            s_right,
            main: 0.0,
            e_left: 0.0,
            e_right: rho_x as f64,
            e_norm_left: 0.0,
            e_norm_right: 0.0,
        };
    }
    let e_left = error_term(s_left, x);
    let e_right = error_term(s_right, x);
    let sqrt_x = (x as f64).sqrt();
    CountSample {
        x,
        s_left,
        s_right,
        main: main_term(x),
        e_left,
        e_right,
        e_norm_left: e_left / sqrt_x,
        e_norm_right: e_right / sqrt_x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{r2_sieve, rho_segment};

    const PI2_HALF: f64 = 4.934802200544679;

    #[test]
    fn main_coef_pair_is_pi_squared_over_two() {
        let via_pi = std::f64::consts::PI * std::f64::consts::PI / 2.0;
        assert!((MAIN_COEF_HI - via_pi).abs() < 1e-14);
        assert!(MAIN_COEF_LO.abs() < 5e-16);
        assert_eq!(MAIN_COEF_HI + MAIN_COEF_LO, MAIN_COEF_HI); // lo below one ulp of hi
    }

    #[test]
    fn ball_count_small_values() {
        let r2 = r2_sieve(0, 200).unwrap();
        assert_eq!(ball_count(0, &r2), 0);
        assert_eq!(ball_count(1, &r2), 1);
        assert_eq!(ball_count(2, &r2), 7);
        assert_eq!(ball_count(3, &r2), 15);
        assert_eq!(ball_count(10, &r2), 47);
        assert_eq!(ball_count(100, &r2), 463);
        assert_eq!(ball_count(1_000, &r2), 4_927);
        assert_eq!(ball_count(10_000, &r2), 48_911);
        assert_eq!(ball_count(20_000, &r2), 98_591);
    }

    #[test]
    fn ball_count_matches_rho_prefix() {
        let r2 = r2_sieve(0, 101).unwrap();
        let seg = rho_segment(0, 10_000, &r2).unwrap();
        let mut running = 0u64;
        let mut checked = 0;
        for l in 0..10_000u64 {
            if l > 0 && l % 379 == 0 {
                assert_eq!(ball_count(l, &r2), running, "x = {l}");
                checked += 1;
            }
            running += seg.get(l);
        }
        assert!(checked > 20);
    }

    #[test]
    fn smoothed_sum_small_values() {
        let r2 = r2_sieve(0, 10).unwrap();
        assert_eq!(smoothed_sum(1, &r2), 1.0);
        let m4 = smoothed_sum(4, &r2);
        assert!((m4 - 8.928203230275509).abs() < 1e-12, "M(4) = {m4}");
    }

    #[test]
    fn sharp_and_smoothed_stay_close() {
        // |S(x) − 2M(x)| ≤ 4√x; per-m rounding is ≤ 1 and Σ r₂ ≈ π√x.
        let r2 = r2_sieve(0, 400).unwrap();
        let mut worst = 0.0f64;
        for x in (1..100_000u64).step_by(271) {
            let gap = (ball_count(x, &r2) as f64 - 2.0 * smoothed_sum(x, &r2)).abs();
            worst = worst.max(gap / (x as f64).sqrt());
        }
        assert!(worst <= 4.0, "worst ratio {worst}");
    }

    #[test]
    fn error_term_precision_at_1e15() {
        // A bare f64 product (pi^2/2)*1e15 is only accurate to half an ulp
        // (~0.25 absolute); the compensated path must do far better than the
        // 1e-3 contract. Reference values computed at 40 digits.
        let e = error_term(4_934_802_200_544_679, 1_000_000_000_000_000);
        assert!((e - (-0.30941724549993807557)).abs() < 1e-6, "e = {e}");

        let e = error_term(609_223_569_843_586, 123_456_789_012_345);
        assert!((e - (-11_264_246_714.291741115)).abs() < 1e-3, "e = {e}");
    }

    #[test]
    fn jump_sample_at_one() {
        let s = jump_sample(1, 1, 6);
        assert_eq!(s.s_right, 7);
        assert!((s.e_left - (1.0 - PI2_HALF)).abs() < 1e-12);
        assert!((s.e_right - (7.0 - PI2_HALF)).abs() < 1e-12);
        assert_eq!(s.e_norm_left, s.e_left);
        assert!(s.e_right >= s.e_left);
    }

    #[test]
    fn jump_sample_at_zero() {
        let s = jump_sample(0, 0, 1);
        assert_eq!(s.e_left, 0.0);
        assert_eq!(s.e_norm_left, 0.0);
        assert_eq!(s.s_right, 1);
    }

    #[test]
    fn error_decreases_linearly_between_jumps() {
        // e_left(next) = e_right(prev) − (π²/2)·Δx.
        let r2 = r2_sieve(0, 101).unwrap();
        let seg = rho_segment(0, 10_000, &r2).unwrap();
        let mut running = 1u64; // ρ₁(0)
        let mut prev: Option<CountSample> = None;
        for l in 1..10_000u64 {
            let d = seg.get(l);
            if d == 0 {
                continue;
            }
            let s = jump_sample(l, running, d);
            if let Some(p) = prev {
                let predicted = p.e_right - PI2_HALF * (l - p.x) as f64;
                assert!((s.e_left - predicted).abs() < 1e-6, "x = {l}");
            }
            prev = Some(s);
            running += d;
        }
    }

    #[test]
    fn error_vanishes_relative_to_x() {
        let r2 = r2_sieve(0, 3_163).unwrap();
        let mut rng = crate::rng::SplitMix64::new(0x5EED);
        for _ in 0..60 {
            let x = 1_000_000 + rng.next_below(9_000_000);
            let e = error_term(ball_count(x, &r2), x).abs();
            assert!(e / x as f64 <= 0.01, "x = {x}, e = {e}");
        }
    }

    #[test]
    #[should_panic(expected = "too short")]
    fn ball_count_requires_coverage() {
        let r2 = r2_sieve(0, 5).unwrap();
        ball_count(10_000, &r2);
    }
}
