//! Riesz means of r₂, the normalized oscillation Q, and the coefficient
//! series that decomposes the smoothed sum M(x).
//!
//! The Riesz mean of order ϱ is Σ_{0≤m≤y} r₂(m)(y−m)^ϱ with main term
//! π·y^{ϱ+1}/(ϱ+1); its error E_ϱ(y) drives everything else. Expanding
//! f(t) = t^{1/2} around 2√x turns (x−m²)^{1/2} into the series
//! Σ_n a_n(x)·(√x−m)^{n+1/2} with a geometric tail of ratio
//! (√x−m)/(2√x) ≤ 1/2, and summing against r₂ gives the decomposition
//! M(x) = Σ_n S(√x; n) whose per-n main terms are cₙ·x. The cₙ sum to π²/4,
//! and the leftover of the n = 0 piece is x^{1/2}·Q(√x) with
//! Q(√x) = √2·x^{−1/4}·E_{1/2}(√x).

use serde::Serialize;

use crate::arith::R2Table;
use crate::num::Kahan;

use std::f64::consts::{PI, SQRT_2};

/// Terms kept when the square-root series is summed to convergence; the tail
/// is below 2⁻⁴⁰ of the leading scale.
pub const SERIES_TERMS: u32 = 40;

/// One evaluation of a Riesz mean: the exact weighted sum, its main term,
/// and the error E_ϱ(y) = sum − main.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszSample {
    pub y: f64,
    pub rho: f64,
    pub sum: f64,
    pub main: f64,
    pub e_rho: f64,
}

/// The normalized oscillation Q(√x) = √2·x^{−1/4}·E_{1/2}(√x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QSample {
    pub x: f64,
    pub q_val: f64,
}

/// The series coefficients c₀..c_{n_max} and their prefix sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    pub c: Vec<f64>,
    pub partials: Vec<f64>,
}

impl CoefficientTable {
    pub fn n_max(&self) -> u32 {
        self.c.len() as u32 - 1
    }
}

/// ∏_{k=1}^{n−1} (1 − 1/(2k)); empty product for n ≤ 1.
fn half_product(n: u32) -> f64 {
    let mut prod = 1.0;
    for k in 1..n {
        prod *= 1.0 - 1.0 / (2.0 * k as f64);
    }
    prod
}

/// c₀ = 2^{3/2}π/3; for n ≥ 1,
/// cₙ = −π·∏_{k=1}^{n−1}(1 − 1/(2k)) / (√2·2ⁿ·n·(n + 3/2)).
pub fn series_coeff(n: u32) -> f64 {
    if n == 0 {
        return SQRT_2 * 2.0 * PI / 3.0;
    }
    let nf = n as f64;
    -PI * half_product(n) / (SQRT_2 * 2f64.powi(n as i32) * nf * (nf + 1.5))
}

/// Σ_{n=0}^{n_max} cₙ. Converges to π²/4.
pub fn series_partial_sum(n_max: u32) -> f64 {
    let mut acc = Kahan::default();
    for n in 0..=n_max {
        acc.add(series_coeff(n));
    }
    acc.value()
}

pub fn coefficient_table(n_max: u32) -> CoefficientTable {
    let mut c = Vec::with_capacity(n_max as usize + 1);
    let mut partials = Vec::with_capacity(n_max as usize + 1);
    let mut acc = Kahan::default();
    for n in 0..=n_max {
        let v = series_coeff(n);
        acc.add(v);
        c.push(v);
        partials.push(acc.value());
    }
    CoefficientTable { c, partials }
}

/// (−1)ⁿ/n!·f⁽ⁿ⁾(2√x) for f(t) = t^{1/2}: √2·x^{1/4} at n = 0, and
/// −∏_{k=1}^{n−1}(1 − 1/(2k)) / (√2·2ⁿ·n) · x^{1/4 − n/2} for n ≥ 1.
pub fn taylor_coeff(n: u32, x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let sqrt_x = x.sqrt();
    let fourth_root = sqrt_x.sqrt();
    if n == 0 {
        return SQRT_2 * fourth_root;
    }
    let nf = n as f64;
    let power = fourth_root / sqrt_x.powi(n as i32);
    -half_product(n) / (SQRT_2 * 2f64.powi(n as i32) * nf) * power
}

/// t^{n + 1/2}. Small n uses one square root and repeated multiplication;
/// n ≥ 8 switches to the exp/log path.
#[inline]
fn pow_half_int(t: f64, n: u32) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if n < 8 {
        t.sqrt() * t.powi(n as i32)
    } else {
        t.powf(n as f64 + 0.5)
    }
}

/// Truncated expansion of (x − m²)^{1/2} in powers of (√x − m)^{n+1/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtSeries {
    /// Σ_{n=0}^{terms} aₙ(x)·(√x − m)^{n+1/2}.
    pub value: f64,
    /// Geometric majorant of the truncation error:
    /// 2·|a_{terms+1}(x)|·(√x − m)^{terms+3/2}.
    pub tail_bound: f64,
}

/// Evaluates the square-root expansion at integer m with 0 ≤ m ≤ √x.
pub fn sqrt_series(x: f64, m: u64, terms: u32) -> SqrtSeries {
    assert!(x > 0.0 && x.is_finite());
    let base = x.sqrt() - m as f64;
    assert!(base >= 0.0, "m = {m} exceeds sqrt({x})");
    let mut acc = Kahan::default();
    for n in 0..=terms {
        acc.add(taylor_coeff(n, x) * pow_half_int(base, n));
    }
    SqrtSeries {
        value: acc.value(),
        tail_bound: 2.0 * taylor_coeff(terms + 1, x).abs() * pow_half_int(base, terms + 1),
    }
}

/// The Riesz mean of order ϱ at y: exact sum (ascending term magnitude,
/// compensated), main term π·y^{ϱ+1}/(ϱ+1), and their difference.
/// ϱ ∈ {1/2, 3/2} take the square-root fast paths; any ϱ > 0 is allowed.
pub fn riesz_error(y: f64, rho: f64, r2: &R2Table) -> RieszSample {
    assert!(y >= 0.0 && y.is_finite());
    assert!(rho > 0.0);
    let top = y.floor() as u64;
    assert!(
        r2.covers(top) || y == 0.0,
        "r2 table too short for riesz_error(y = {y})"
    );
    let mut acc = Kahan::default();
    for m in (0..=top).rev() {
        let w = r2.get(m) as f64;
        if w == 0.0 {
            continue;
        }
        let t = y - m as f64;
        let term = if rho == 0.5 {
            t.sqrt()
        } else if rho == 1.5 {
            t * t.sqrt()
        } else if t > 0.0 {
            t.powf(rho)
        } else {
            0.0
        };
        acc.add(w * term);
    }
    let main = if rho == 0.5 {
        PI * y * y.sqrt() / 1.5
    } else if rho == 1.5 {
        PI * y * y * y.sqrt() / 2.5
    } else {
        PI * y.powf(rho + 1.0) / (rho + 1.0)
    };
    let sum = acc.value();
    RieszSample {
        y,
        rho,
        sum,
        main,
        e_rho: sum - main,
    }
}

/// Q(√x) = √2·x^{−1/4}·E_{1/2}(√x).
pub fn q_value(x: f64, r2: &R2Table) -> QSample {
    assert!(x > 0.0 && x.is_finite());
    let e = riesz_error(x.sqrt(), 0.5, r2).e_rho;
    QSample {
        x,
        q_val: SQRT_2 * e / x.sqrt().sqrt(),
    }
}

/// The n-th piece of the smoothed-sum decomposition:
/// S(√x; n) = aₙ(x)·Σ_{0≤m≤√x} r₂(m)·(√x − m)^{n+1/2}.
pub fn decomposed_sum(x: f64, n: u32, r2: &R2Table) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let y = x.sqrt();
    let top = y.floor() as u64;
    assert!(
        r2.covers(top),
        "r2 table too short for decomposed_sum(x = {x})"
    );
    let mut acc = Kahan::default();
    for m in (0..=top).rev() {
        let w = r2.get(m) as f64;
        if w > 0.0 {
            acc.add(w * pow_half_int(y - m as f64, n));
        }
    }
    taylor_coeff(n, x) * acc.value()
}

/// Majorant for truncating Σ_n S(√x; n) after `terms`:
/// Σ_m r₂(m)·2·|a_{terms+1}(x)|·(√x − m)^{terms+3/2}.
pub fn decomposition_tail(x: f64, terms: u32, r2: &R2Table) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let y = x.sqrt();
    let top = y.floor() as u64;
    assert!(r2.covers(top));
    let mut acc = Kahan::default();
    for m in (0..=top).rev() {
        let w = r2.get(m) as f64;
        if w > 0.0 {
            acc.add(w * pow_half_int(y - m as f64, terms + 1));
        }
    }
    2.0 * taylor_coeff(terms + 1, x).abs() * acc.value()
}

/// The normalized remainder |S(√x; n) − cₙ·x| / (2⁻ⁿ·x^{1/4}) for n ≥ 1:
/// the observed constant of the uniform linear approximation at (x, n).
pub fn remainder_ratio(x: f64, n: u32, r2: &R2Table) -> f64 {
    assert!(n >= 1, "the normalized remainder is defined for n >= 1");
    let s = decomposed_sum(x, n, r2);
    (s - series_coeff(n) * x).abs() / (2f64.powi(-(n as i32)) * x.sqrt().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::r2_sieve;
    use crate::counting::smoothed_sum_f;

    const PI2_QUARTER: f64 = 2.4674011002723395;

    #[test]
    fn coefficient_values() {
        assert!((series_coeff(0) - 2.961921958772244).abs() < 1e-14);
        assert!((series_coeff(1) - (-PI / (5.0 * SQRT_2))).abs() < 1e-16);
        assert!((series_coeff(1) + 0.4442882938158366).abs() < 1e-14);
        assert!((series_coeff(2) + 0.03966859766212827).abs() < 1e-14);
    }

    #[test]
    fn partial_sums_reach_pi_squared_over_four() {
        assert!((series_partial_sum(0) - 2.961921958772244).abs() < 1e-14);
        assert!((series_partial_sum(1) - 2.5176336649564075).abs() < 1e-14);
        assert!((series_partial_sum(64) - PI2_QUARTER).abs() < 1e-9);
    }

    #[test]
    fn coefficient_table_invariants() {
        let t = coefficient_table(64);
        assert_eq!(t.n_max(), 64);
        assert!(t.c[0] > 0.0);
        for n in 1..=64usize {
            assert!(t.c[n] < 0.0, "n = {n}");
        }
        for n in 2..64usize {
            assert!(t.c[n + 1].abs() < t.c[n].abs() / 2.0, "n = {n}");
        }
        // Successive partial differences are the coefficients themselves;
        // past n ≈ 30 they approach one ulp of the sum, so check the decay
        // where binary64 still resolves it.
        for n in 2..30usize {
            assert!(
                (t.partials[n + 1] - t.partials[n]).abs()
                    <= (t.partials[n] - t.partials[n - 1]).abs() / 2.0,
                "n = {n}"
            );
        }
    }

    #[test]
    fn taylor_coeff_values() {
        assert!((taylor_coeff(0, 1.0) - SQRT_2).abs() < 1e-16);
        assert!((taylor_coeff(1, 1.0) + 1.0 / (2.0 * SQRT_2)).abs() < 1e-16);
        assert!((taylor_coeff(1, 16.0) + 0.176_776_695_296_636_9).abs() < 1e-15);
    }

    #[test]
    fn sqrt_series_examples() {
        // Perfect square: every term carries (√x − m)^{n+1/2} = 0.
        let s = sqrt_series(16.0, 4, 7);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.tail_bound, 0.0);

        let s = sqrt_series(16.0, 2, SERIES_TERMS);
        assert!((s.value - 12f64.sqrt()).abs() < 1e-12, "value {}", s.value);

        let s = sqrt_series(100.0, 0, SERIES_TERMS);
        assert!((s.value - 10.0).abs() < 1e-12, "value {}", s.value);
    }

    #[test]
    fn sqrt_series_majorant_dominates_at_low_order() {
        // At small term counts the geometric majorant is far above binary64
        // noise, so the raw inequality must hold.
        let mut rng = crate::rng::SplitMix64::new(0x11AA);
        for _ in 0..500 {
            let x = 10f64.powf(rng.next_in(1.0, 8.0));
            let m = rng.next_below((0.5 * x.sqrt()).max(1.0) as u64);
            let truth = (x - (m * m) as f64).sqrt();
            for terms in [4u32, 8] {
                let s = sqrt_series(x, m, terms);
                assert!(
                    (s.value - truth).abs() <= s.tail_bound,
                    "x = {x}, m = {m}, terms = {terms}"
                );
            }
        }
    }

    #[test]
    fn riesz_samples() {
        let r2 = r2_sieve(0, 10).unwrap();
        let s = riesz_error(2.0, 0.5, &r2);
        assert!((s.sum - (SQRT_2 + 4.0)).abs() < 1e-14);
        assert!((s.main - 5.923843917544488).abs() < 1e-12);
        assert!((s.e_rho + 0.5096303551713933).abs() < 1e-12);

        let z = riesz_error(0.0, 1.5, &r2);
        assert_eq!((z.sum, z.main, z.e_rho), (0.0, 0.0, 0.0));

        let one = riesz_error(1.0, 0.5, &r2);
        assert_eq!(one.sum, 1.0);
        assert!((one.main - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((one.e_rho - (1.0 - 2.0 * PI / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn q_value_examples() {
        let r2 = r2_sieve(0, 10).unwrap();
        let q = q_value(4.0, &r2);
        // 4^{-1/4} cancels the √2, leaving E_{1/2}(2) itself.
        assert!((q.q_val + 0.5096303551713933).abs() < 1e-12);
        assert_eq!(q.q_val.signum(), riesz_error(2.0, 0.5, &r2).e_rho.signum());
    }

    #[test]
    fn q_easy_bound() {
        let r2 = r2_sieve(0, 1_001).unwrap();
        for k in 0..50 {
            let x = 1e4 + (1e6 - 1e4) * k as f64 / 49.0;
            let q = q_value(x, &r2).q_val;
            assert!(q.abs() <= 10.0 * x.sqrt().sqrt(), "x = {x}");
        }
    }

    #[test]
    fn riesz_three_halves_bound() {
        let r2 = r2_sieve(0, 1_001).unwrap();
        for k in 0..50 {
            let x = 1e4 * (1e6f64 / 1e4).powf(k as f64 / 49.0);
            let e = riesz_error(x.sqrt(), 1.5, &r2).e_rho;
            assert!(e.abs() / x.sqrt() <= 10.0, "x = {x}");
        }
    }

    #[test]
    fn zeroth_piece_recovers_q() {
        // S(√x; 0) − c₀·x = x^{1/2}·Q(√x), two routes.
        let r2 = r2_sieve(0, 1_001).unwrap();
        for x in [1e4, 123_456.789, 9.7e5] {
            let lhs = decomposed_sum(x, 0, &r2) - series_coeff(0) * x;
            let rhs = x.sqrt() * q_value(x, &r2).q_val;
            assert!(
                (lhs - rhs).abs() <= 1e-6 * rhs.abs().max(1e-9),
                "x = {x}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn first_piece_tracks_its_main_term() {
        let r2 = r2_sieve(0, 1_001).unwrap();
        for x in [1e4, 1e5, 1e6] {
            let dev = (decomposed_sum(x, 1, &r2) - series_coeff(1) * x).abs();
            assert!(dev / x.sqrt().sqrt() <= 10.0, "x = {x}");
        }
    }

    #[test]
    fn decomposition_sums_to_smoothed() {
        let r2 = r2_sieve(0, 101).unwrap();
        for x in [100.0, 1_234.0, 10_000.0] {
            let mut total = Kahan::default();
            for n in 0..=SERIES_TERMS {
                total.add(decomposed_sum(x, n, &r2));
            }
            let m = smoothed_sum_f(x, &r2);
            let tail = decomposition_tail(x, SERIES_TERMS, &r2);
            // The 1e-9·M floor covers binary64 noise, which exceeds the
            // mathematical tail at this term count.
            assert!(
                (total.value() - m).abs() <= tail + 1e-9 * m,
                "x = {x}: {} vs {m}, tail {tail}",
                total.value()
            );
        }
    }

    #[test]
    fn remainder_ratio_small_and_continuous() {
        let r2 = r2_sieve(0, 1_100).unwrap();
        for n in 1..=4 {
            let r = remainder_ratio(1e6, n, &r2);
            assert!(r.is_finite() && r < 1.0, "n = {n}: {r}");
        }
        // Perfect fourth power vs neighbor: no jump in the ratio.
        let a = remainder_ratio(10_000.0, 1, &r2);
        let b = remainder_ratio(10_001.0, 1, &r2);
        assert!((a - b).abs() < 0.5, "{a} vs {b}");
    }
}
