//! Modulus probes for weights with interior singularities.
//!
//! The trace theory needs the derived integrand `W` to be locally
//! integrable (for `p > 1`; locally bounded ratio for `p = 1`).  When
//! that admissibility condition fails at some interior height, the
//! family of geodesic rays crossing that height carries zero
//! `p`-modulus, and this module constructs the explicit witness: a
//! sequence of nested shells approaching the singular height, each
//! carrying an admissible density with unit line contribution whose
//! energy shrinks geometrically.  Averaging `m` shells scales the
//! admissible density by `1/m` and the energy by `m^(-p)` times a
//! convergent sum, so the modulus upper bound collapses as shells are
//! added.
//!
//! The shell densities realize the sharp Hoelder pairing: on a shell
//! `S`, the density `g = W e^(eps h) / int_S W` has line integral
//! `int_S g e^(-eps h) dh = 1` and energy `int_S g^p rho dh` equal to
//! `(int_S W)^(1-p)` exactly, which is the minimum possible.  The
//! same pairing in inequality form (`line^p <= energy * (int W)^(p-1)`)
//! is exposed as [`radial_holder_check`] for arbitrary densities on
//! height intervals, and as [`holder_bound_check`] for densities
//! sampled along an explicit edge curve of a filling, where the lifted
//! measure's per-edge ball masses enter both sides.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::filling::{EdgeId, EdgeKind, Filling, FillingError};
use crate::geometry::EdgePoint;
use crate::math::{self, QuadratureFailure};
use crate::measure::{RadialFamily, RadialWeight};
use crate::params::{
    fp_membership, p1_ratio, rp_integrand, FpReport, DEFAULT_T_MAX, OVERFLOW_GUARD,
};

/// Most shells a witness will ever build.
pub const MAX_SHELLS: usize = 48;
/// Shells narrower than this are beyond trustworthy quadrature.
const MIN_SHELL_WIDTH: f64 = 1e-11;

/// Why a zero-modulus witness could not be produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulusError {
    /// The admissibility condition holds; no witness exists.
    ConditionHolds(String),
    /// The singular height leaves no room for the requested shells.
    NotEnoughRoom(String),
    Quadrature(QuadratureFailure),
    /// A curve referenced an edge the filling does not have.
    Filling(FillingError),
}

impl From<QuadratureFailure> for ModulusError {
    fn from(e: QuadratureFailure) -> Self {
        ModulusError::Quadrature(e)
    }
}

impl From<FillingError> for ModulusError {
    fn from(e: FillingError) -> Self {
        ModulusError::Filling(e)
    }
}

impl core::fmt::Display for ModulusError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModulusError::ConditionHolds(cert) => {
                write!(f, "admissibility condition holds ({cert}); no zero-modulus witness")
            }
            ModulusError::NotEnoughRoom(detail) => write!(f, "not enough room: {detail}"),
            ModulusError::Quadrature(e) => write!(f, "quadrature failure: {e}"),
            ModulusError::Filling(e) => write!(f, "bad curve: {e}"),
        }
    }
}

impl core::error::Error for ModulusError {}

/// Admissibility of the weight, shared with the parameter machinery:
/// local integrability of `W` for `p > 1`, local boundedness of the
/// ratio `e^(-eps t)/rho` for `p = 1`.
pub fn check_condition1(rho: &RadialWeight, p: f64, eps: f64, horizon: f64) -> FpReport {
    fp_membership(rho, p, eps, horizon)
}

/// One shell of the witness: a height interval with its `W`-mass, the
/// line contribution of its density, and the density's energy.
#[derive(Debug, Clone, Copy)]
pub struct Shell {
    pub lo: f64,
    pub hi: f64,
    /// `int_S W dh` (for `p = 1`: the smallest ratio seen on the shell).
    pub w_integral: f64,
    /// `int_S g e^(-eps h) dh`; equals 1 exactly by construction.
    pub line_contribution: f64,
    /// `int_S g^p rho dh`; `(int_S W)^(1-p)` for `p > 1`.
    pub energy: f64,
}

/// Zero-modulus witness for the rays crossing a singular height.
#[derive(Debug, Clone)]
pub struct ZeroModulusWitness {
    /// The singular height the shells approach.
    pub center: f64,
    /// Whether the shells approach from below or above.
    pub from_below: bool,
    pub shells: Vec<Shell>,
    /// Sum of the line contributions (the shell count).
    pub line_total: f64,
    /// Sum of the shell energies.
    pub energy_total: f64,
    /// `energy_total / line_total^p`: the energy of the averaged
    /// density, which is admissible for the crossing family.
    pub modulus_upper_bound: f64,
}

/// Locate the singular height from an admissibility failure.
fn singular_height(rho: &RadialWeight, report: &FpReport) -> Option<f64> {
    if let RadialFamily::Dip { center, .. } = rho.family() {
        return Some(*center);
    }
    report.failure.map(|cell| 0.5 * (cell.lo + cell.hi))
}

/// Build a zero-modulus witness with `shells` nested shells.
///
/// Fails when the admissibility condition holds (no witness exists),
/// and reports fewer shells than requested when the remaining room
/// shrinks below quadrature resolution.
pub fn witness_zero_modulus(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    shells: usize,
) -> Result<ZeroModulusWitness, ModulusError> {
    assert!(p >= 1.0 && eps > 0.0 && shells >= 1);
    let report = check_condition1(rho, p, eps, DEFAULT_T_MAX);
    if report.member {
        return Err(ModulusError::ConditionHolds(report.certificate));
    }
    let center = singular_height(rho, &report).ok_or_else(|| {
        ModulusError::NotEnoughRoom(String::from(
            "admissibility fails but no failing interval was located",
        ))
    })?;

    // Approach the singular height from whichever side has room.
    let from_below = center >= 0.1;
    let base = if from_below { center.min(1.0) * 0.5 } else { 0.5 };

    let wanted = shells.min(MAX_SHELLS);
    let mut built: Vec<Shell> = Vec::with_capacity(wanted);
    for k in 0..wanted {
        let outer = base * math::powf(0.5, k as f64);
        let inner = 0.5 * outer;
        if inner < MIN_SHELL_WIDTH {
            break;
        }
        let (lo, hi) = if from_below {
            (center - outer, center - inner)
        } else {
            (center + inner, center + outer)
        };
        if lo < 0.0 {
            break;
        }
        let shell = if p > 1.0 {
            let kinks = rho.kinks_in(lo, hi);
            // Shell integrals grow geometrically toward the singular
            // height, so the tolerance must scale with a rough size
            // estimate rather than stay absolute.
            let f = |t: f64| rp_integrand(rho, p, eps, t);
            let rough = (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi)) / 6.0 * (hi - lo);
            let tol = 1e-9 * math::abs(rough) + 1e-15;
            let w = math::integrate_adaptive(f, lo, hi, tol, &kinks)?;
            if !(w > 0.0) || w > OVERFLOW_GUARD {
                break;
            }
            // Density g = W e^(eps h) / w: line contribution 1, energy
            // w^(1-p), both exact.
            Shell {
                lo,
                hi,
                w_integral: w,
                line_contribution: 1.0,
                energy: math::powf(w, 1.0 - p),
            }
        } else {
            // p = 1: the density g = e^(eps h)/(hi - lo) has line
            // contribution 1; its energy int g rho dh is at most the
            // largest rho e^(eps h) = 1/ratio on the shell.
            let kinks = rho.kinks_in(lo, hi);
            let f = |t: f64| rho.eval(t) * math::exp(eps * t) / (hi - lo);
            let rough = (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi)) / 6.0 * (hi - lo);
            let tol = 1e-9 * math::abs(rough) + 1e-15;
            let energy = math::integrate_adaptive(f, lo, hi, tol, &kinks)?;
            let ratio_floor = {
                let n = 256;
                (0..=n)
                    .map(|i| p1_ratio(rho, eps, lo + (hi - lo) * i as f64 / n as f64))
                    .fold(f64::INFINITY, f64::min)
            };
            Shell { lo, hi, w_integral: ratio_floor, line_contribution: 1.0, energy }
        };
        built.push(shell);
    }
    if built.is_empty() {
        return Err(ModulusError::NotEnoughRoom(format!(
            "no shell of width >= {MIN_SHELL_WIDTH:e} fits beside height {center}"
        )));
    }

    let line_total: f64 = built.iter().map(|s| s.line_contribution).sum();
    let energies: Vec<f64> = built.iter().map(|s| s.energy).collect();
    let energy_total = math::pairwise_sum(&energies);
    let modulus_upper_bound = energy_total / math::powf(line_total, p);
    Ok(ZeroModulusWitness {
        center,
        from_below,
        shells: built,
        line_total,
        energy_total,
        modulus_upper_bound,
    })
}

/// Both sides of the Hoelder pairing for a density `g` on `[lo, hi]`:
/// `lhs = (int g e^(-eps h) dh)^p` against
/// `rhs = (int g^p rho dh) * (int W dh)^(p-1)`.
#[derive(Debug, Clone, Copy)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs / lhs`; at least 1 up to quadrature noise, and invariant
    /// under scaling of `g`.
    pub ratio: f64,
}

/// Evaluate the Hoelder pairing for an arbitrary density on a height
/// interval.
pub fn radial_holder_check<G: Fn(f64) -> f64>(
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    g: G,
    lo: f64,
    hi: f64,
) -> Result<HolderCheck, ModulusError> {
    assert!(p > 1.0, "the pairing needs a finite conjugate exponent");
    assert!(hi > lo && lo >= 0.0);
    let kinks = rho.kinks_in(lo, hi);
    let line = math::integrate_adaptive(
        |t| g(t) * math::exp(-eps * t),
        lo,
        hi,
        1e-12,
        &kinks,
    )?;
    let energy = math::integrate_adaptive(
        |t| math::powf(g(t), p) * rho.eval(t),
        lo,
        hi,
        1e-12,
        &kinks,
    )?;
    let w_mass = math::integrate_adaptive(
        |t| rp_integrand(rho, p, eps, t),
        lo,
        hi,
        1e-12,
        &kinks,
    )?;
    let lhs = math::powf(line, p);
    let rhs = energy * math::powf(w_mass, p - 1.0);
    Ok(HolderCheck { lhs, rhs, ratio: rhs / lhs })
}

/// The Hoelder pairing along an explicit curve of edges in a filling:
/// `lhs = int_curve phi ds` (uniformized length), `rhs = (int_curve
/// phi^p dmu)^(1/p)`, and the empirical `constant` collecting the
/// curve's own `W`-mass so that `lhs <= constant * rhs` is exact
/// Hoelder duality, not an estimate.
#[derive(Debug, Clone, Copy)]
pub struct CurveHolderCheck {
    /// `int_curve phi e^(-eps h) dt` summed over the curve's edges.
    pub lhs: f64,
    /// `(sum_e (m_a + m_b) int phi^p rho(h) dt)^(1/p)`.
    pub rhs: f64,
    /// `(sum_e (m_a + m_b)^(1/(1-p)) int W(h) dt)^((p-1)/p)`.
    pub constant: f64,
    /// `constant * rhs / lhs`; at least 1 up to quadrature noise,
    /// invariant under positive scaling of `phi` and under uniform
    /// scaling of the vertex masses.
    pub ratio: f64,
}

/// Check the Hoelder pairing for a nonnegative density `phi` sampled
/// along the given edges. Each edge contributes its uniformized line
/// element `e^(-eps h(t)) dt` to the left side and its lifted measure
/// `(m_a + m_b) rho(h(t)) dt` to the right; the reported constant is
/// the curve's dual `W`-mass, so `ratio >= 1` is forced by Hoelder's
/// inequality alone.
pub fn holder_bound_check<F: Fn(&EdgePoint) -> f64>(
    filling: &Filling,
    rho: &RadialWeight,
    p: f64,
    curve: &[EdgeId],
    phi: F,
) -> Result<CurveHolderCheck, ModulusError> {
    assert!(p > 1.0, "the pairing needs a finite conjugate exponent");
    assert!(!curve.is_empty(), "the curve needs at least one edge");
    let eps = filling.eps();
    let mut lines = Vec::with_capacity(curve.len());
    let mut energies = Vec::with_capacity(curve.len());
    let mut w_factors = Vec::with_capacity(curve.len());
    for &e in curve {
        let edge = filling.edge(e)?;
        let (va, vb) = (filling.vertex(edge.a)?, filling.vertex(edge.b)?);
        let (la, lb) = (va.level as f64, vb.level as f64);
        let mass = va.mass + vb.mass;
        let height = |t: f64| (la + t).min(lb + 1.0 - t);
        // Integrand kinks in edge-parameter coordinates: the sample
        // weight's features, plus the horizontal midpoint fold.
        let mut kinks: Vec<f64> = Vec::new();
        if edge.kind == EdgeKind::Horizontal {
            kinks.push(0.5);
        }
        let (h_lo, h_hi) = match edge.kind {
            EdgeKind::Vertical => (la.min(lb), la.max(lb)),
            EdgeKind::Horizontal => (la, la + 0.5),
        };
        for h in rho.kinks_in(h_lo, h_hi) {
            match edge.kind {
                EdgeKind::Vertical => {
                    let t = h - h_lo;
                    if t > 0.0 && t < 1.0 {
                        kinks.push(t);
                    }
                }
                EdgeKind::Horizontal => {
                    let t = h - la;
                    if t > 0.0 && t < 0.5 {
                        kinks.push(t);
                        kinks.push(1.0 - t);
                    }
                }
            }
        }
        let scaled = |f: &dyn Fn(f64) -> f64| -> Result<f64, ModulusError> {
            let rough = (f(0.0) + 4.0 * f(0.5) + f(1.0)) / 6.0;
            let tol = 1e-9 * math::abs(rough) + 1e-15;
            Ok(math::integrate_adaptive(f, 0.0, 1.0, tol, &kinks)?)
        };
        let pt = |t: f64| EdgePoint { edge: e, t };
        lines.push(scaled(&|t| phi(&pt(t)) * math::exp(-eps * height(t)))?);
        energies.push(mass * scaled(&|t| math::powf(phi(&pt(t)), p) * rho.eval(height(t)))?);
        w_factors.push(
            math::powf(mass, 1.0 / (1.0 - p))
                * scaled(&|t| rp_integrand(rho, p, eps, height(t)))?,
        );
    }
    let lhs = math::pairwise_sum(&lines);
    let rhs = math::powf(math::pairwise_sum(&energies), 1.0 / p);
    let constant = math::powf(math::pairwise_sum(&w_factors), (p - 1.0) / p);
    Ok(CurveHolderCheck { lhs, rhs, constant, ratio: constant * rhs / lhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::SplitMix64;

    const EPS: f64 = core::f64::consts::LN_2;

    #[test]
    fn dip_shells_match_the_dyadic_oracle() {
        // rho = |t - 1|^(2(p-1)) e^(-eps p t) at p = 2 gives
        // W = |t - 1|^(-2) exactly; the shell [1 - 2^(-k-1), 1 - 2^(-k-2)]
        // carries int W = 2^(k+1) and energy 2^(-k-1).
        let p = 2.0;
        let rho = RadialWeight::dip(1.0, 2.0 * (p - 1.0), EPS * p).unwrap();
        let witness = witness_zero_modulus(&rho, p, EPS, 10).unwrap();
        assert_eq!(witness.center, 1.0);
        assert!(witness.from_below);
        assert!(witness.shells.len() >= 8, "only {} shells", witness.shells.len());
        for (k, shell) in witness.shells.iter().enumerate() {
            let expect_w = math::powf(2.0, k as f64 + 1.0);
            assert!(
                math::abs(shell.w_integral / expect_w - 1.0) < 1e-6,
                "shell {k}: int W = {} vs {expect_w}",
                shell.w_integral
            );
            assert_eq!(shell.line_contribution, 1.0);
            assert!(math::abs(shell.energy * expect_w - 1.0) < 1e-6);
            assert!(shell.hi < 1.0 && shell.lo < shell.hi);
        }
        assert!(witness.line_total >= 8.0);
        assert!(witness.energy_total < 1.0, "energy {}", witness.energy_total);
        assert!(witness.modulus_upper_bound < 0.01);
    }

    #[test]
    fn averaging_more_shells_collapses_the_bound() {
        let p = 2.0;
        let rho = RadialWeight::dip(1.0, 2.0, 2.0 * EPS).unwrap();
        let small = witness_zero_modulus(&rho, p, EPS, 8).unwrap();
        let large = witness_zero_modulus(&rho, p, EPS, 16).unwrap();
        assert!(large.shells.len() > small.shells.len());
        assert!(
            large.modulus_upper_bound < 0.5 * small.modulus_upper_bound,
            "bound should collapse: {} vs {}",
            large.modulus_upper_bound,
            small.modulus_upper_bound
        );
    }

    #[test]
    fn admissible_weights_admit_no_witness() {
        let p = 2.0;
        for rho in [
            RadialWeight::bbs(0.5, p, EPS).unwrap(),
            RadialWeight::constant(1.0).unwrap(),
            RadialWeight::exp_rate(EPS).unwrap(),
        ] {
            match witness_zero_modulus(&rho, p, EPS, 8) {
                Err(ModulusError::ConditionHolds(_)) => {}
                other => panic!("expected the condition to hold, got {other:?}"),
            }
        }
    }

    #[test]
    fn condition_and_witness_are_a_dichotomy() {
        let p = 2.0;
        let weights = [
            RadialWeight::bbs(0.25, p, EPS).unwrap(),
            RadialWeight::bbs(0.75, p, EPS).unwrap(),
            RadialWeight::constant(2.0).unwrap(),
            RadialWeight::exp_rate(0.4).unwrap(),
            RadialWeight::example11(p, EPS).unwrap(),
            RadialWeight::dip(1.0, 2.0, 2.0 * EPS).unwrap(),
            RadialWeight::dip(0.5, 3.0, EPS).unwrap(),
            RadialWeight::dip(2.0, 0.5, EPS).unwrap(),
        ];
        for rho in &weights {
            let holds = check_condition1(rho, p, EPS, 40.0).member;
            let witness = witness_zero_modulus(rho, p, EPS, 8);
            assert_eq!(
                holds,
                matches!(witness, Err(ModulusError::ConditionHolds(_))),
                "condition and witness disagree for {}",
                rho.describe()
            );
        }
    }

    #[test]
    fn shallow_dips_stay_admissible() {
        // |t - c|^q is locally integrable after the W-exponent
        // 1/(1 - p) exactly when q < p - 1.
        let p = 2.0;
        let rho = RadialWeight::dip(1.0, 0.5, 2.0 * EPS).unwrap();
        assert!(check_condition1(&rho, p, EPS, 40.0).member);
        assert!(matches!(
            witness_zero_modulus(&rho, p, EPS, 8),
            Err(ModulusError::ConditionHolds(_))
        ));
    }

    #[test]
    fn p1_bands_ride_the_pinch() {
        // Any pinch makes the p = 1 ratio blow up beside it: bands
        // hugging the pinch have unit line contribution and energy
        // bounded by the inverse ratio.
        let rho = RadialWeight::dip(1.0, 2.0, EPS).unwrap();
        let witness = witness_zero_modulus(&rho, 1.0, EPS, 12).unwrap();
        assert!(witness.shells.len() >= 8);
        for shell in &witness.shells {
            assert_eq!(shell.line_contribution, 1.0);
            assert!(shell.energy > 0.0);
            assert!(
                shell.energy <= 1.0 / shell.w_integral + 1e-12,
                "energy {} should be below the inverse ratio {}",
                shell.energy,
                1.0 / shell.w_integral
            );
        }
        // The deepest bands sit where the ratio explodes, so their
        // energies collapse.
        let first = witness.shells.first().unwrap().energy;
        let last = witness.shells.last().unwrap().energy;
        assert!(last < 1e-3 * first, "energies should collapse: {first} -> {last}");
        assert!(witness.energy_total.is_finite());
    }

    #[test]
    fn holder_ratio_is_scale_invariant_and_finite() {
        let p = 2.0;
        let rho = RadialWeight::bbs(0.5, p, EPS).unwrap();
        let mut rng = SplitMix64::new(0x5eed_cafe);
        for trial in 0..100 {
            let c1 = 0.1 + rng.next_f64();
            let c2 = 0.1 + rng.next_f64();
            let d1 = 0.2 + 2.0 * rng.next_f64();
            let g = move |t: f64| c1 * math::exp(-d1 * t) + c2;
            let check = radial_holder_check(&rho, p, EPS, g, 0.0, 10.0).unwrap();
            assert!(
                check.ratio >= 1.0 - 1e-9,
                "trial {trial}: Hoelder inequality violated, ratio {}",
                check.ratio
            );
            assert!(check.ratio.is_finite() && check.ratio < OVERFLOW_GUARD);

            let scaled = move |t: f64| 7.0 * (c1 * math::exp(-d1 * t) + c2);
            let check7 = radial_holder_check(&rho, p, EPS, scaled, 0.0, 10.0).unwrap();
            assert!(
                math::abs(check7.ratio / check.ratio - 1.0) < 1e-9,
                "homogeneity broken: {} vs {}",
                check7.ratio,
                check.ratio
            );
            assert!(math::abs(check7.lhs / check.lhs - 49.0) < 1e-6 * 49.0);
        }
    }

    #[test]
    fn sharp_density_attains_the_holder_bound() {
        // The witness density g = W e^(eps h)/int W turns the
        // inequality into an equality.
        let p = 2.0;
        let rho = RadialWeight::dip(1.0, 2.0, 2.0 * EPS).unwrap();
        let (lo, hi) = (0.5, 0.75);
        let g = {
            let rho = rho.clone();
            move |t: f64| rp_integrand(&rho, p, EPS, t) * math::exp(EPS * t)
        };
        let check = radial_holder_check(&rho, p, EPS, g, lo, hi).unwrap();
        assert!(
            math::abs(check.ratio - 1.0) < 1e-8,
            "sharp density should attain ratio 1, got {}",
            check.ratio
        );
    }

    fn tower_filling(levels: u32) -> Filling {
        let space = crate::space::MetricSpaceSample::from_line_points(
            alloc::vec![0.0],
            alloc::vec![1.0],
            0,
        )
        .unwrap();
        Filling::construct(space, 2.0, 1.5, levels).unwrap()
    }

    #[test]
    fn single_edge_curve_pairing_matches_closed_forms() {
        // On a one-point space the filling is a vertical tower; with
        // phi = 1 and rho = 1 every factor of the pairing has a closed
        // form in eps and the edge's level.
        let p = 2.0;
        let filling = tower_filling(6);
        let eps = filling.eps();
        let rho = RadialWeight::constant(1.0).unwrap();
        let e = filling
            .edge_between(crate::filling::VertexId(2), crate::filling::VertexId(3))
            .unwrap();
        let edge = filling.edge(e).unwrap();
        let n = filling.vertex(edge.a).unwrap().level as f64;
        let mass = filling.vertex(edge.a).unwrap().mass + filling.vertex(edge.b).unwrap().mass;

        let check = holder_bound_check(&filling, &rho, p, &[e], |_| 1.0).unwrap();
        let line = (math::exp(-eps * n) - math::exp(-eps * (n + 1.0))) / eps;
        let w_mass = (math::exp(-2.0 * eps * n) - math::exp(-2.0 * eps * (n + 1.0)))
            / (2.0 * eps);
        assert!(math::abs(check.lhs - line) < 1e-12);
        assert!(math::abs(check.rhs - math::powf(mass, 0.5)) < 1e-12);
        assert!(math::abs(check.constant - math::powf(w_mass / mass, 0.5)) < 1e-12);
        assert!(check.ratio >= 1.0 - 1e-9);
    }

    #[test]
    fn curve_pairing_is_invariant_under_scalings() {
        // Scaling phi by a positive constant and scaling every vertex
        // mass uniformly both leave the ratio unchanged.
        let p = 2.0;
        let rho = RadialWeight::bbs(0.5, p, EPS).unwrap();
        let filling = tower_filling(8);
        let ray = filling.enumerate_rays(0, 1).unwrap().remove(0);
        let curve: Vec<EdgeId> =
            filling.ray_edges(&ray).unwrap().into_iter().take(3).collect();
        assert_eq!(curve.len(), 3);
        let phi = |pt: &EdgePoint| 0.3 + pt.t * (1.0 - pt.t);

        let base = holder_bound_check(&filling, &rho, p, &curve, phi).unwrap();
        let scaled_phi =
            holder_bound_check(&filling, &rho, p, &curve, |pt| 7.0 * phi(pt)).unwrap();
        assert!(math::abs(scaled_phi.ratio - base.ratio) < 1e-9);
        assert!(math::abs(scaled_phi.lhs - 7.0 * base.lhs) < 1e-9 * base.lhs);

        let heavier = {
            let space = crate::space::MetricSpaceSample::from_line_points(
                alloc::vec![0.0],
                alloc::vec![3.0],
                0,
            )
            .unwrap();
            Filling::construct(space, 2.0, 1.5, 8).unwrap()
        };
        let scaled_nu = holder_bound_check(&heavier, &rho, p, &curve, phi).unwrap();
        assert!(math::abs(scaled_nu.ratio - base.ratio) < 1e-9);
    }

    #[test]
    fn random_curve_densities_never_violate_the_pairing() {
        // 100 seeded densities on a three-edge curve: the ratio stays
        // at least 1 and bounded.
        let p = 2.0;
        let rho = RadialWeight::bbs(0.25, p, EPS).unwrap();
        let filling = tower_filling(10);
        let ray = filling.enumerate_rays(0, 1).unwrap().remove(0);
        let curve: Vec<EdgeId> =
            filling.ray_edges(&ray).unwrap().into_iter().skip(1).take(3).collect();
        let mut rng = SplitMix64::new(0x00d1_ce00);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let c1 = 0.1 + rng.next_f64();
            let c2 = 0.1 + rng.next_f64();
            let d = 2.0 * rng.next_f64();
            let check = holder_bound_check(&filling, &rho, p, &curve, |pt: &EdgePoint| {
                c1 + c2 * math::exp(-d * pt.t)
            })
            .unwrap();
            assert!(check.ratio >= 1.0 - 1e-9, "violated: {}", check.ratio);
            assert!(check.ratio.is_finite());
            worst = worst.max(check.ratio);
        }
        assert!(worst < OVERFLOW_GUARD);
    }
}
