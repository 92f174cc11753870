//! Heisenberg group structure and the gauge family N_{α,A}, together with the
//! two oracles the counting pipeline is validated against: exact enumeration
//! of integer points and Monte-Carlo volume estimation.
//!
//! Points live in the complex realization ℂ^q × ℝ with the group law
//! (z, w)(z', w') = (z + z', w + w' + 2·Im(z·z̄')). The gauge
//! N_{α,A}(z, w) = (|z|^α + A·|w|^{α/2})^{1/α} is radial and homogeneous of
//! degree 1 under the dilations (z, w) ↦ (az, a²w); for α = 4, A = 1 it also
//! satisfies the triangle inequality, making δ(u, v) = N(v⁻¹u) a
//! left-invariant distance.

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{isqrt_floor, isqrt_strict, strict_width};
use crate::rng::SplitMix64;

/// Cap on the number of lattice vectors an exact enumeration may visit.
pub const BRUTE_CELL_BUDGET: u128 = 1 << 33;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaugeError {
    #[error("enumeration box of {cells} cells exceeds the {budget}-cell budget")]
    BudgetExceeded { cells: u128, budget: u128 },
}

/// Gauge parameters: exponent α > 0, weight A > 0, Heisenberg index q ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeParams {
    pub alpha: f64,
    pub coef_a: f64,
    pub q: u32,
}

impl GaugeParams {
    pub fn new(alpha: f64, coef_a: f64, q: u32) -> Self {
        assert!(
            alpha > 0.0 && coef_a > 0.0 && q >= 1,
            "parameters must be positive"
        );
        GaugeParams { alpha, coef_a, q }
    }

    /// The Cygan-Koranyi gauge N_{4,1} on H_q.
    pub fn cygan_koranyi(q: u32) -> Self {
        Self::new(4.0, 1.0, q)
    }
}

/// A point of H_q: z holds the q complex coordinates as interleaved
/// (re, im) pairs, w is the central coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    z: Vec<f64>,
    w: f64,
}

impl HPoint {
    /// `z` must have length 2q, interleaved (re₀, im₀, re₁, im₁, …).
    pub fn new(z: Vec<f64>, w: f64) -> Self {
        assert!(
            !z.is_empty() && z.len().is_multiple_of(2),
            "z must have length 2q"
        );
        HPoint { z, w }
    }

    pub fn identity(q: u32) -> Self {
        assert!(q >= 1);
        HPoint {
            z: vec![0.0; 2 * q as usize],
            w: 0.0,
        }
    }

    pub fn q(&self) -> u32 {
        (self.z.len() / 2) as u32
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Group inverse (−z, −w).
    pub fn inverse(&self) -> HPoint {
        HPoint {
            z: self.z.iter().map(|v| -v).collect(),
            w: -self.w,
        }
    }

    fn z_norm_sq(&self) -> f64 {
        self.z.iter().map(|v| v * v).sum()
    }
}

/// N_{α,A}(u) = (|z|^α + A·|w|^{α/2})^{1/α}.
pub fn gauge_norm(p: &GaugeParams, u: &HPoint) -> f64 {
    assert_eq!(
        u.q(),
        p.q,
        "dimension mismatch: point has q = {}, gauge has q = {}",
        u.q(),
        p.q
    );
    let z_part = u.z_norm_sq().powf(p.alpha / 2.0);
    let w_part = p.coef_a * u.w.abs().powf(p.alpha / 2.0);
    (z_part + w_part).powf(1.0 / p.alpha)
}

/// Product under the complex-realization group law.
pub fn group_mul(u: &HPoint, v: &HPoint) -> HPoint {
    assert_eq!(u.q(), v.q(), "dimension mismatch");
    let z = u.z.iter().zip(&v.z).map(|(a, b)| a + b).collect();
    // Im(z·z̄') = Σ im_j·re'_j − re_j·im'_j
    let mut sym = 0.0;
    for j in 0..u.q() as usize {
        sym += u.z[2 * j + 1] * v.z[2 * j] - u.z[2 * j] * v.z[2 * j + 1];
    }
    HPoint {
        z,
        w: u.w + v.w + 2.0 * sym,
    }
}

/// Heisenberg dilation (z, w) ↦ (az, a²w), a > 0.
pub fn dilate(a: f64, u: &HPoint) -> HPoint {
    assert!(a > 0.0);
    HPoint {
        z: u.z.iter().map(|v| a * v).collect(),
        w: a * a * u.w,
    }
}

/// Left-invariant distance δ(u, v) = N(v⁻¹·u).
pub fn gauge_distance(p: &GaugeParams, u: &HPoint, v: &HPoint) -> f64 {
    gauge_norm(p, &group_mul(&v.inverse(), u))
}

/// Exact |ℤ^{2q+1} ∩ B_t| for the Cygan-Koranyi gauge at integral t⁴ = x:
/// counts integer points with (|z|²)² + w² < x using pure integer compares.
pub fn brute_count_exact(q: u32, x: u64) -> Result<u64, GaugeError> {
    assert!(q >= 1);
    if x == 0 {
        return Ok(0);
    }
    // |z|² can be at most the largest k with k² < x.
    let cap = isqrt_strict(x as i128).unwrap_or(0);
    check_budget(isqrt_floor(cap as u128), 2 * q)?;
    let c_max = isqrt_floor(cap as u128);
    let total = (0..=c_max)
        .into_par_iter()
        .map(|c| {
            let weight = if c > 0 { 2 } else { 1 };
            weight * count_tail(2 * q - 1, c * c, x, cap)
        })
        .sum();
    Ok(total)
}

/// Integer points of the remaining `coords` z-coordinates on top of squared
/// norm `s`, each completed by the exact number of admissible w values.
fn count_tail(coords: u32, s: u64, x: u64, cap: u64) -> u64 {
    if coords == 0 {
        return strict_width(x as i128 - (s as i128) * (s as i128));
    }
    let mut total = 0u64;
    let c_max = isqrt_floor((cap - s) as u128);
    for c in 0..=c_max {
        let weight = if c > 0 { 2 } else { 1 };
        total += weight * count_tail(coords - 1, s + c * c, x, cap);
    }
    total
}

/// |ℤ^{2q+1} ∩ B^{α,A}_t| by enumeration. Dispatches to the exact integer
/// path for α = 4, A = 1 with integral t⁴; otherwise uses binary64 with a
/// boundary tolerance of order 10⁻¹²·t (points that close to the sphere may
/// land on either side).
pub fn brute_count(p: &GaugeParams, t: f64) -> Result<u64, GaugeError> {
    assert!(t > 0.0 && t.is_finite());
    if p.alpha == 4.0 && p.coef_a == 1.0 {
        let x = t * t * t * t;
        let rounded = x.round();
        if (x - rounded).abs() < 1e-6 && (0.0..1.8e18).contains(&rounded) {
            return brute_count_exact(p.q, rounded as u64);
        }
    }
    let dim = 2 * p.q;
    check_budget(t.floor() as u64, dim)?;
    let t_alpha = t.powf(p.alpha);
    let z_cap = t.floor() as i64;
    let total = (-z_cap..=z_cap)
        .into_par_iter()
        .map(|c| float_tail(p, dim - 1, (c * c) as f64, t_alpha))
        .sum();
    Ok(total)
}

fn float_tail(p: &GaugeParams, coords: u32, z_sq: f64, t_alpha: f64) -> u64 {
    let head = z_sq.powf(p.alpha / 2.0);
    if head >= t_alpha {
        return 0;
    }
    if coords == 0 {
        // Number of integer w with A·|w|^{α/2} < t^α − |z|^α.
        let w_sup = ((t_alpha - head) / p.coef_a).powf(2.0 / p.alpha);
        let mut k = w_sup.floor();
        if k == w_sup {
            k -= 1.0;
        }
        return if k < 0.0 { 0 } else { 2 * k as u64 + 1 };
    }
    let c_cap = (t_alpha - head).powf(1.0 / p.alpha).floor() as i64;
    let mut total = 0u64;
    for c in -c_cap..=c_cap {
        total += float_tail(p, coords - 1, z_sq + (c * c) as f64, t_alpha);
    }
    total
}

fn check_budget(half_extent: u64, dim: u32) -> Result<(), GaugeError> {
    let side = 2u128 * half_extent as u128 + 1;
    let mut cells = 1u128;
    for _ in 0..dim {
        cells = cells.saturating_mul(side);
    }
    if cells > BRUTE_CELL_BUDGET {
        return Err(GaugeError::BudgetExceeded {
            cells,
            budget: BRUTE_CELL_BUDGET,
        });
    }
    Ok(())
}

/// Monte-Carlo estimate of λ(B₁^{α,A}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McVolume {
    pub estimate: f64,
    pub std_err: f64,
    pub hits: u64,
    pub samples: u64,
    /// Volume of the sampling box [−1,1]^{2q} × [−A^{−2/α}, A^{−2/α}].
    pub box_volume: f64,
}

/// Uniform rejection sampling in the bounding box of the unit ball.
/// Counter-based streams make the result a pure function of the seed,
/// independent of how the sample range is split across threads.
pub fn mc_volume(p: &GaugeParams, samples: u64, seed: u64) -> McVolume {
    assert!(samples >= 1);
    let dim = 2 * p.q as usize;
    let w_half = p.coef_a.powf(-2.0 / p.alpha);
    let box_volume = 2f64.powi(dim as i32) * 2.0 * w_half;
    let hits: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::stream(seed, i);
            let mut z_sq = 0.0;
            for _ in 0..dim {
                let c = rng.next_in(-1.0, 1.0);
                z_sq += c * c;
            }
            let w = rng.next_in(-w_half, w_half);
            let inside = z_sq.powf(p.alpha / 2.0) + p.coef_a * w.abs().powf(p.alpha / 2.0) < 1.0;
            inside as u64
        })
        .sum();
    let frac = hits as f64 / samples as f64;
    McVolume {
        estimate: box_volume * frac,
        std_err: box_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
        hits,
        samples,
        box_volume,
    }
}

/// Random point with coordinates uniform in [−scale, scale); w gets scale².
pub(crate) fn sample_point(rng: &mut SplitMix64, q: u32, scale: f64) -> HPoint {
    let z = (0..2 * q as usize)
        .map(|_| rng.next_in(-scale, scale))
        .collect();
    let w = rng.next_in(-scale * scale, scale * scale);
    HPoint::new(z, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::r2_sieve;
    use crate::counting::ball_count;

    const PI2_HALF: f64 = 4.934802200544679;

    fn ck1() -> GaugeParams {
        GaugeParams::cygan_koranyi(1)
    }

    #[test]
    fn norm_examples() {
        let p = ck1();
        assert_eq!(gauge_norm(&p, &HPoint::new(vec![1.0, 0.0], 0.0)), 1.0);
        assert_eq!(gauge_norm(&p, &HPoint::new(vec![0.0, 0.0], 1.0)), 1.0);
        let n = gauge_norm(&p, &HPoint::new(vec![1.0, 1.0], 3.0));
        assert!((n - 13f64.powf(0.25)).abs() < 1e-14);
        assert!((n - 1.8988).abs() < 1e-4);
    }

    #[test]
    fn group_law_examples() {
        let id = HPoint::identity(1);
        let v = HPoint::new(vec![0.5, -2.0], 3.0);
        assert_eq!(group_mul(&id, &v), v);
        assert_eq!(group_mul(&v, &id), v);

        // (i, 0)·(1, 0) = (1 + i, 2)
        let u = HPoint::new(vec![0.0, 1.0], 0.0);
        let one = HPoint::new(vec![1.0, 0.0], 0.0);
        let prod = group_mul(&u, &one);
        assert_eq!(prod.z(), &[1.0, 1.0]);
        assert_eq!(prod.w(), 2.0);

        let back = group_mul(&v, &v.inverse());
        assert_eq!(back.z(), &[0.0, 0.0]);
        assert_eq!(back.w(), 0.0);
    }

    #[test]
    fn dilation_examples() {
        let u = HPoint::new(vec![1.0, 0.0], 1.0);
        assert_eq!(dilate(1.0, &u), u);
        let d = dilate(2.0, &u);
        assert_eq!(d.z(), &[2.0, 0.0]);
        assert_eq!(d.w(), 4.0);
    }

    #[test]
    fn homogeneity_and_radiality() {
        let p = ck1();
        let mut rng = SplitMix64::new(0xD11A7E);
        for _ in 0..10_000 {
            let u = sample_point(&mut rng, 1, 10.0);
            let a = rng.next_in(0.01, 100.0);
            let lhs = gauge_norm(&p, &dilate(a, &u));
            let rhs = a * gauge_norm(&p, &u);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300),
                "a = {a}"
            );

            let theta = rng.next_in(0.0, std::f64::consts::TAU);
            let (c, s) = (theta.cos(), theta.sin());
            let rotated = HPoint::new(
                vec![c * u.z()[0] - s * u.z()[1], s * u.z()[0] + c * u.z()[1]],
                u.w(),
            );
            let n0 = gauge_norm(&p, &u);
            assert!((gauge_norm(&p, &rotated) - n0).abs() <= 1e-12 * n0.max(1e-300));
        }
    }

    #[test]
    fn triangle_inequality_quick() {
        for q in [1u32, 2] {
            let p = GaugeParams::cygan_koranyi(q);
            let mut rng = SplitMix64::new(0x7121A + q as u64);
            for _ in 0..5_000 {
                let u = sample_point(&mut rng, q, 5.0);
                let v = sample_point(&mut rng, q, 5.0);
                let lhs = gauge_norm(&p, &group_mul(&u, &v));
                let rhs = gauge_norm(&p, &u) + gauge_norm(&p, &v);
                assert!(lhs <= rhs + 1e-9, "q = {q}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn left_invariance_quick() {
        let p = ck1();
        let mut rng = SplitMix64::new(0x1EF7);
        for _ in 0..2_000 {
            let g = sample_point(&mut rng, 1, 4.0);
            let u = sample_point(&mut rng, 1, 4.0);
            let v = sample_point(&mut rng, 1, 4.0);
            let d = gauge_distance(&p, &u, &v);
            let d_shifted = gauge_distance(&p, &group_mul(&g, &u), &group_mul(&g, &v));
            assert!((d - d_shifted).abs() <= 1e-9 * d.max(1.0));
        }
    }

    #[test]
    fn brute_count_small() {
        assert_eq!(brute_count_exact(1, 1).unwrap(), 1);
        assert_eq!(brute_count_exact(1, 2).unwrap(), 7);
        assert_eq!(brute_count_exact(1, 0).unwrap(), 0);
    }

    #[test]
    fn brute_count_matches_ball_count() {
        let r2 = r2_sieve(0, 150).unwrap();
        for x in 1..=20_000u64 {
            assert_eq!(
                brute_count_exact(1, x).unwrap(),
                ball_count(x, &r2),
                "x = {x}"
            );
        }
    }

    #[test]
    fn float_path_agrees_with_exact() {
        let p = ck1();
        for x in [2u64, 7, 100, 5_000] {
            let t = (x as f64).powf(0.25);
            assert_eq!(
                brute_count(&p, t).unwrap(),
                brute_count_exact(1, x).unwrap(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn volume_scaling_toward_pi2_half() {
        // brute(t)/t⁴ approaches λ(B₁) = π²/2 for q = 1, α = 4, A = 1.
        let ratio = brute_count_exact(1, 10_000).unwrap() as f64 / 10_000.0;
        assert!((ratio - PI2_HALF).abs() / PI2_HALF < 0.05, "ratio {ratio}");
    }

    #[test]
    fn mc_volume_deterministic_and_sane() {
        let p = ck1();
        let a = mc_volume(&p, 100_000, 99);
        let b = mc_volume(&p, 100_000, 99);
        assert_eq!(a, b);
        assert!(
            (a.estimate - PI2_HALF).abs() / PI2_HALF < 0.05,
            "estimate {}",
            a.estimate
        );
        assert!(a.std_err > 0.0);

        let flat = GaugeParams::new(2.0, 3.5, 1);
        let v = mc_volume(&flat, 50_000, 5);
        assert!(v.estimate > 0.0 && v.estimate < v.box_volume);
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            brute_count_exact(2, u64::MAX / 2),
            Err(GaugeError::BudgetExceeded { .. })
        ));
    }
}
