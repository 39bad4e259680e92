//! Small numeric toolbox shared across the crate.
//!
//! Everything here is deterministic: the adaptive quadrature always splits
//! intervals at their midpoint, sums are accumulated pairwise in slice
//! order, and the sampler is a fixed-seed SplitMix64. Transcendentals
//! dispatch to `std` float methods when available and to `libm` otherwise,
//! so results are identical across the crate's two build modes on any
//! platform where both wrap the same implementations.

use alloc::vec::Vec;

#[cfg(feature = "std")]
mod ffi {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
    #[inline]
    pub fn exp_m1(x: f64) -> f64 {
        x.exp_m1()
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        x.ln_1p()
    }
}

#[cfg(not(feature = "std"))]
mod ffi {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
    #[inline]
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
}

pub use ffi::{abs, ceil, exp, exp_m1, floor, ln, ln_1p, powf, sqrt};

/// Quadrature failed to reach the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    /// Subinterval on which refinement bottomed out.
    pub interval: (f64, f64),
    /// Error estimate at the deepest refinement level.
    pub estimate: f64,
}

impl core::fmt::Display for QuadratureFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "adaptive quadrature stalled on [{}, {}] (error estimate {:e})",
            self.interval.0, self.interval.1, self.estimate
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QuadratureFailure {}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadratureFailure> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if abs(delta) <= 15.0 * tol || b - a < 1e-14 * (abs(a) + abs(b) + 1.0) {
        // Richardson extrapolation of the two half-interval rules.
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadratureFailure {
            interval: (a, b),
            estimate: abs(delta) / 15.0,
        });
    }
    let l = adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`, splitting first at the listed interior kink locations so each
/// piece sees a smooth integrand. Kinks outside `(a, b)` are ignored.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    kinks: &[f64],
) -> Result<f64, QuadratureFailure> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_adaptive(f, b, a, tol, kinks).map(|v| -v);
    }
    let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&k| k > a && k < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    let pieces = cuts.len() + 1;
    let piece_tol = tol / pieces as f64;
    for hi in cuts.into_iter().chain(core::iter::once(b)) {
        if hi <= lo {
            continue;
        }
        let m = 0.5 * (lo + hi);
        let (fa, fm, fb) = (f(lo), f(m), f(hi));
        let whole = simpson(fa, fm, fb, hi - lo);
        total += adaptive_step(&f, lo, hi, fa, fm, fb, whole, piece_tol, 52)?;
        lo = hi;
    }
    Ok(total)
}

/// Locate `x` in `[lo, hi]` with `f(x) = target` by bisection, assuming `f`
/// is nondecreasing and the target is bracketed. Stops when the bracket
/// width falls below `xtol` (absolute) or after 200 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, target: f64, xtol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pairwise (cascade) summation: deterministic for a fixed slice order and
/// substantially more accurate than a running sum on long series.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// SplitMix64: a tiny, seedable, allocation-free generator used where the
/// crate needs reproducible sampling (triple checks on large distance
/// matrices). Not a statistical-quality or cryptographic source.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` (`bound > 0`).
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Uniform draw from `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = integrate_adaptive(|t| t * t * t - 2.0 * t + 1.0, 0.0, 2.0, 1e-12, &[]).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_exponential() {
        let eps = ln(2.0);
        let v = integrate_adaptive(|t| exp(-eps * t), 0.0, 3.0, 1e-12, &[]).unwrap();
        assert!((v - (1.0 - 0.125) / eps).abs() < 1e-11);
    }

    #[test]
    fn kink_splitting_handles_piecewise_integrands() {
        // |t - 1/2| has a kink; with the split the result is exact.
        let v = integrate_adaptive(|t| abs(t - 0.5), 0.0, 1.0, 1e-13, &[0.5]).unwrap();
        assert!((v - 0.25).abs() < 1e-13);
    }

    #[test]
    fn bisect_inverts_monotone_maps() {
        let x = bisect(|t| t * t, 0.0, 4.0, 2.0, 1e-14);
        assert!((x - sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_short_slices() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>());
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = SplitMix64::new(7);
        for _ in 0..1000 {
            let u = c.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
