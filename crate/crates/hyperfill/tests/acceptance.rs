//! Acceptance suite: one test per criterion, each printing a single
//! PASS line with its measured numbers (visible with `--nocapture`;
//! the harness itself prints the per-criterion ok/FAILED line).
//!
//! Every oracle here is computed independently of the library paths it
//! checks: nets are re-verified by exhaustive double loops, integrals
//! by composite Simpson rules on explicit grids, and closed forms by
//! direct evaluation.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use hyperfill::hyperfill_core as hc;

use hc::math::SplitMix64;
use hc::measure::{lemma28_ratio, total_mass};
use hc::modulus::{check_condition1, holder_bound_check, witness_zero_modulus};
use hc::params::{param_r, partition_unit_mass};
use hc::profile::{build_divergent, build_example11};
use hc::trace::{sobolev_norms, trace_t, trace_tilde};
use hc::{
    DetectorConfig, EdgeId, EdgePoint, Filling, GeodesicRay, MetricSpaceSample, ParamValue,
    RadialFunction, RadialWeight,
};

const LN2: f64 = std::f64::consts::LN_2;

fn big_space() -> &'static MetricSpaceSample {
    static SPACE: OnceLock<MetricSpaceSample> = OnceLock::new();
    SPACE.get_or_init(|| MetricSpaceSample::gen_cantor(8, 0.9).expect("valid generator"))
}

fn small_space() -> &'static MetricSpaceSample {
    static SPACE: OnceLock<MetricSpaceSample> = OnceLock::new();
    SPACE.get_or_init(|| MetricSpaceSample::gen_cantor(4, 0.9).expect("valid generator"))
}

fn build(space: &MetricSpaceSample, alpha: f64, levels: u32) -> Filling {
    Filling::construct(space.clone(), alpha, 1.5, levels).expect("valid parameters")
}

/// Composite Simpson rule with `n` (even) subintervals.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Simpson with splits at the integrand's interior kinks.
fn simpson_split(f: &dyn Fn(f64) -> f64, a: f64, b: f64, mut kinks: Vec<f64>, n: usize) -> f64 {
    kinks.retain(|t| *t > a && *t < b);
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let mut nodes = vec![a];
    nodes.extend(kinks);
    nodes.push(b);
    nodes.windows(2).map(|w| simpson(f, w[0], w[1], n)).sum()
}

#[test]
fn criterion_01_net_validity() {
    let space = big_space();
    let t0 = Instant::now();
    for alpha in [2.0, 3.0] {
        let filling = build(space, alpha, 8);
        for n in 0..=8u32 {
            let net: Vec<usize> =
                filling.level_vertices(n).map(|v| filling.vertices()[v.0].center).collect();
            let r = alpha.powi(-(n as i32));
            for (i, &z) in net.iter().enumerate() {
                for &w in &net[i + 1..] {
                    assert!(
                        space.dist(z, w) >= r,
                        "alpha {alpha} level {n}: points {z} and {w} are closer than {r}"
                    );
                }
            }
            for point in 0..space.len() {
                assert!(
                    net.iter().any(|&z| space.dist(point, z) < r),
                    "alpha {alpha} level {n}: point {point} is not covered"
                );
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "net validation took {elapsed:?}");
    println!(
        "criterion 01 (net validity): PASS — separation and covering hold exhaustively \
         on {} points, alpha 2 and 3, levels 0..=8, in {elapsed:?}",
        space.len()
    );
}

#[test]
fn criterion_02_degree_plateau() {
    let space = big_space();
    let mut plateaus = Vec::new();
    for alpha in [2.0, 3.0] {
        let mut maxima = Vec::new();
        for levels in 4..=8u32 {
            let filling = build(space, alpha, levels);
            let mut global_max = 0usize;
            let mut global_min = usize::MAX;
            for v in 0..filling.vertex_count() {
                let d = filling.neighbors(hc::VertexId(v)).len();
                global_max = global_max.max(d);
                global_min = global_min.min(d);
            }
            assert!(global_min >= 1, "alpha {alpha} levels {levels}: an isolated vertex");
            maxima.push(global_max);
        }
        assert!(
            maxima.windows(2).all(|w| w[0] == w[1]),
            "alpha {alpha}: max degree should not move across truncations, got {maxima:?}"
        );
        plateaus.push((alpha, maxima[0]));
    }
    println!(
        "criterion 02 (degree plateau): PASS — max degree {} at alpha 2 and {} at alpha 3, \
         identical for truncations 4..=8, every vertex connected",
        plateaus[0].1, plateaus[1].1
    );
}

#[test]
fn criterion_03_ray_length_identity() {
    let space = big_space();
    let mut worst = 0.0f64;
    for alpha in [2.0, 3.0] {
        let filling = build(space, alpha, 8);
        let eps = filling.eps();
        for xi in 0..space.len() {
            for ray in filling.enumerate_rays(xi, 4).expect("rays exist") {
                let len = filling.ray_length(&ray);
                let expect = (1.0 - (-eps * ray.depth() as f64).exp()) / eps;
                worst = worst.max((len - expect).abs());
                assert!(
                    (len - expect).abs() <= 1e-12,
                    "alpha {alpha} xi {xi}: length {len} vs {expect}"
                );
                if alpha == 2.0 {
                    assert!(len <= 1.0 / LN2, "alpha 2 ray length {len} exceeds 1/log 2");
                }
            }
        }
    }
    println!(
        "criterion 03 (ray length identity): PASS — worst deviation {worst:.3e}, \
         alpha-2 lengths stay below 1/log 2 = {:.6}",
        1.0 / LN2
    );
}

#[test]
fn criterion_04_parameter_closed_form() {
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        for theta in [0.25, 0.5, 0.75] {
            for alpha in [2.0f64, 3.0] {
                let eps = alpha.ln();
                let rho = RadialWeight::bbs(theta, p, eps).expect("valid weight");
                let expect = (p - 1.0) / (eps * p * theta);
                match param_r(&rho, p, eps, 80.0) {
                    ParamValue::Finite(v) => {
                        worst = worst.max((v - expect).abs());
                        assert!(
                            (v - expect).abs() <= 1e-6,
                            "p {p} theta {theta} alpha {alpha}: {v} vs {expect}"
                        );
                    }
                    other => panic!("p {p} theta {theta} alpha {alpha}: expected finite, got {other:?}"),
                }
            }
        }
    }
    // The anchor value itself.
    let rho = RadialWeight::bbs(0.5, 2.0, LN2).unwrap();
    let ParamValue::Finite(v) = param_r(&rho, 2.0, LN2, 80.0) else {
        panic!("anchor should be finite")
    };
    assert!((v - 1.0 / LN2).abs() <= 1e-6, "anchor {v} vs {}", 1.0 / LN2);
    println!(
        "criterion 04 (closed-form parameter): PASS — 18-point grid within {worst:.3e}, \
         anchor {v:.9} vs 1/log 2 = {:.9}",
        1.0 / LN2
    );
}

#[test]
fn criterion_05_partition_breakpoints() {
    let cases: [(&str, RadialWeight, Box<dyn Fn(usize) -> f64>); 3] = [
        ("rho = 1", RadialWeight::constant(1.0).unwrap(), Box::new(|k| k as f64)),
        ("rho = 2", RadialWeight::constant(2.0).unwrap(), Box::new(|k| k as f64 / 2.0)),
        ("rho = e^t", RadialWeight::exp_rate(-1.0).unwrap(), Box::new(|k| ((k + 1) as f64).ln())),
    ];
    let mut summary = Vec::new();
    for (name, rho, expected) in &cases {
        let partition = partition_unit_mass(rho, 200, 80.0, 1e-12).expect("enough mass");
        assert!(partition.len() >= 20, "{name}: only {} cells", partition.len());
        let mut worst_break = 0.0f64;
        for (k, t) in partition.breakpoints().iter().enumerate() {
            let err = (t - expected(k)).abs();
            worst_break = worst_break.max(err);
            assert!(err <= 1e-10, "{name}: breakpoint {k} is {t}, expected {}", expected(k));
        }
        let mut worst_mass = 0.0f64;
        for (k, m) in partition.cell_masses().iter().enumerate() {
            let err = (m - 1.0).abs();
            worst_mass = worst_mass.max(err);
            assert!(err <= 1e-12, "{name}: cell {k} has mass {m}");
        }
        summary.push(format!(
            "{name}: {} cells, breaks within {worst_break:.2e}, masses within {worst_mass:.2e}",
            partition.len()
        ));
    }
    println!("criterion 05 (unit-mass partition): PASS — {}", summary.join("; "));
}

#[test]
fn criterion_06_mass_comparability() {
    let ln3 = 3.0f64.ln();
    let filling = build(big_space(), 3.0, 8);
    let weights = [
        ("bbs(0.5, 2)", RadialWeight::bbs(0.5, 2.0, ln3).unwrap()),
        ("gaussian-tail", RadialWeight::example11(2.0, ln3).unwrap()),
    ];
    let mut summary = Vec::new();
    for (name, rho) in &weights {
        let mut ratios = Vec::new();
        for n in 4..=8u32 {
            let report = total_mass(&filling, rho, n).expect("mass integrates");
            assert!(
                (0.1..=10.0).contains(&report.ratio),
                "{name} N={n}: ratio {} leaves [1/10, 10]",
                report.ratio
            );
            ratios.push(report.ratio);
        }
        let (r6, r8) = (ratios[2], ratios[4]);
        let drift = (r8 - r6).abs() / r6;
        assert!(drift < 0.2, "{name}: ratio drifts {:.1}% from N=6 to N=8", drift * 100.0);
        summary.push(format!("{name}: ratios {:.3}..{:.3}, drift {:.4}%", ratios[0], ratios[4], drift * 100.0));
    }
    println!("criterion 06 (mass comparability): PASS — {}", summary.join("; "));
}

#[test]
fn criterion_07_ray_average_stability() {
    let ln3 = 3.0f64.ln();
    let rho = RadialWeight::bbs(0.5, 2.0, ln3).unwrap();
    let mut ratios = Vec::new();
    for levels in 4..=8u32 {
        let filling = build(big_space(), 3.0, levels);
        let report = lemma28_ratio(&filling, &rho, |t: f64| (-t).exp(), 2.0).expect("quadrature");
        assert!(report.ratio.is_finite() && report.ratio > 0.0);
        ratios.push(report.ratio);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    assert!(hi / lo < 2.0, "ratio spread {lo}..{hi} exceeds a factor of 2");
    println!(
        "criterion 07 (ray-average comparability): PASS — ratios {lo:.6}..{hi:.6} across \
         truncations 4..=8, spread factor {:.7}",
        hi / lo
    );
}

#[test]
fn criterion_08_oscillator_end_to_end() {
    let t0 = Instant::now();
    let filling = build(small_space(), 2.0, 14);
    let cfg = DetectorConfig::default();
    let mut summary = Vec::new();
    for p in [1.0, 2.0] {
        let (rho, u1) = build_example11(p, LN2, 14.0);

        // Cone averages vanish identically: the profile is 0 at every
        // integer height, hence at every vertex.
        for xi in 0..small_space().len() {
            let tilde = trace_tilde(&filling, &u1, xi, &cfg).expect("tilde trace");
            for (level, mean) in tilde.means.iter().enumerate() {
                assert!(*mean == 0.0, "p={p} xi={xi}: cone average {mean} at level {level}");
            }
        }

        // Every ray trace oscillates with span >= 0.9 at depth 14.
        let mut worst_span = f64::INFINITY;
        for xi in 0..small_space().len() {
            let rays = filling.enumerate_rays(xi, 4).expect("rays exist");
            assert!(rays.iter().all(|r| r.depth() >= 12));
            let report = trace_t(&filling, &u1, xi, 4, &cfg).expect("ray trace");
            assert!(report.rays >= 1);
            for verdict in &report.per_ray {
                assert!(verdict.is_oscillating(), "p={p} xi={xi}: {verdict:?}");
                let span = verdict.oscillation_span().expect("span for oscillation");
                worst_span = worst_span.min(span);
                assert!(span >= 0.9, "p={p} xi={xi}: span {span}");
            }
        }

        // The gradient's band energies sit under 2^p e^(-n^2) term by
        // term, so their partial sums stay under the full series.
        let mut worst_ratio = 0.0f64;
        for n in 0..=14usize {
            let (a, b) = (n as f64, (n + 1) as f64);
            let f = |t: f64| u1.gradient_density(t).powf(p) * rho.eval(t);
            let increment = simpson_split(&f, a, b, u1.critical_heights(a, b), 2048);
            let term = (p * LN2 - ((n * n) as f64)).exp();
            worst_ratio = worst_ratio.max(increment / term);
            assert!(
                increment <= term * (1.0 + 1e-6),
                "p={p} band {n}: increment {increment:.6e} exceeds term {term:.6e}"
            );
        }

        // The function and its gradient have finite energy on the graph.
        let norms = sobolev_norms(&filling, &rho, &u1, p).expect("norms integrate");
        assert!(norms.full.is_finite() && norms.full > 0.0);
        summary.push(format!(
            "p={p}: spans >= {worst_span:.3}, cone averages exactly 0, band/term <= {worst_ratio:.3}, \
             graph norm {:.4}",
            norms.full
        ));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "end-to-end run took {elapsed:?}");
    println!("criterion 08 (oscillator end-to-end): PASS — {} in {elapsed:?}", summary.join("; "));
}

#[test]
fn criterion_09_trace_consistency() {
    let filling = build(small_space(), 2.0, 12);
    let rho = RadialWeight::bbs(0.5, 2.0, LN2).unwrap();
    let cfg = DetectorConfig::default();
    let mut rng = SplitMix64::new(0x5EED_CAFE);
    let mut converged = 0usize;
    let mut total = 0usize;
    let mut worst_gap = 0.0f64;
    for _ in 0..20 {
        let c0 = 2.5 * rng.next_f64();
        let terms: Vec<(f64, f64)> =
            (0..3).map(|_| (0.2 + rng.next_f64(), 0.5 + 2.0 * rng.next_f64())).collect();
        let u = RadialFunction::exp_mix(LN2, c0, terms);
        let norms = sobolev_norms(&filling, &rho, &u, 2.0).expect("norms integrate");
        assert!(norms.full.is_finite());
        for xi in 0..small_space().len() {
            total += 1;
            let report = trace_t(&filling, &u, xi, 4, &cfg).expect("ray trace");
            let Some(t_value) = report.verdict.converged_limit() else {
                continue;
            };
            converged += 1;
            let tilde = trace_tilde(&filling, &u, xi, &cfg).expect("tilde trace");
            let tilde_value = tilde
                .verdict
                .converged_limit()
                .unwrap_or_else(|| panic!("ray trace converged but the cone average did not"));
            let gap = (t_value - tilde_value).abs();
            worst_gap = worst_gap.max(gap);
            assert!(gap <= 1e-3, "profile trace {t_value} vs cone average {tilde_value}");
        }
    }
    assert!(
        converged * 2 >= total,
        "only {converged} of {total} traces converged — the check would be vacuous"
    );
    println!(
        "criterion 09 (trace consistency): PASS — {converged}/{total} traces converged, \
         worst |ray - cone| gap {worst_gap:.3e}, zero counterexamples"
    );
}

#[test]
fn criterion_10_verification_matrix() {
    let out = Command::new(env!("CARGO_BIN_EXE_hyperfill"))
        .arg("verify")
        .output()
        .expect("the binary should spawn");
    assert_eq!(
        out.status.code(),
        Some(0),
        "verify exited nonzero:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("verify prints one JSON document");
    assert_eq!(doc["all_agree"].as_bool(), Some(true));
    let rows = doc["scenarios"].as_array().expect("scenario rows");
    assert!(rows.len() >= 5, "only {} scenarios", rows.len());

    // Independent re-run of the flat-weight scenario: every trace of a
    // decaying profile converges to 0.
    let filling = build(small_space(), 2.0, 12);
    let rho = RadialWeight::constant(1.0).unwrap();
    let cfg = DetectorConfig::default();
    let mut rng = SplitMix64::new(0xFEED_F00D);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let terms: Vec<(f64, f64)> =
            (0..3).map(|_| (0.2 + rng.next_f64(), 0.5 + 2.0 * rng.next_f64())).collect();
        let u = RadialFunction::exp_mix(LN2, 0.0, terms);
        let norms = sobolev_norms(&filling, &rho, &u, 2.0).expect("norms integrate");
        assert!(norms.full.is_finite());
        for xi in [0, small_space().len() / 2, small_space().len() - 1] {
            let report = trace_t(&filling, &u, xi, 4, &cfg).expect("ray trace");
            let value = report.verdict.converged_limit().expect("decaying profile converges");
            worst = worst.max(value.abs());
            assert!(value.abs() <= 1e-3, "xi {xi}: trace value {value}");
        }
    }
    println!(
        "criterion 10 (verification matrix): PASS — {} scenarios all agree, exit 0; \
         flat-weight traces vanish within {worst:.3e}",
        rows.len()
    );
}

#[test]
fn criterion_11_modulus_dichotomy() {
    let p = 2.0;
    // Pinched weight: admissibility fails and an explicit null witness
    // exists for the curves crossing the pinch.
    let dip = RadialWeight::dip(1.0, 2.0 * (p - 1.0), LN2 * p).unwrap();
    let report = check_condition1(&dip, p, LN2, 40.0);
    assert!(!report.member, "the pinched weight should fail the admissibility condition");
    let witness = witness_zero_modulus(&dip, p, LN2, 8).expect("witness exists");
    assert!(witness.shells.len() >= 8, "only {} shells", witness.shells.len());
    assert!(witness.line_total >= 8.0 - 1e-9, "line total {}", witness.line_total);
    assert!(witness.energy_total < 1.0, "energy total {}", witness.energy_total);

    // Smooth weight: admissibility holds and the pairing bound is finite
    // for randomized densities along randomized rays.
    let rho = RadialWeight::bbs(0.5, p, LN2).unwrap();
    assert!(check_condition1(&rho, p, LN2, 40.0).member);
    let filling = build(small_space(), 2.0, 10);
    let mut rng = SplitMix64::new(0xB0B5_1ED5);
    let mut hi_ratio = 0.0f64;
    let mut lo_ratio = f64::INFINITY;
    for trial in 0..100 {
        let xi = rng.next_below(small_space().len());
        let rays = filling.enumerate_rays(xi, 2).expect("rays exist");
        let ray = &rays[rng.next_below(rays.len())];
        let curve = ray_edges(&filling, ray);
        let (a, b) = (0.1 + rng.next_f64(), 2.0 * rng.next_f64());
        let check = holder_bound_check(&filling, &rho, p, &curve, |pt: &EdgePoint| a + b * pt.t)
            .expect("pairing integrates");
        assert!(
            check.ratio.is_finite() && check.ratio > 0.0,
            "trial {trial}: ratio {}",
            check.ratio
        );
        assert!(check.ratio >= 1.0 - 1e-9, "trial {trial}: duality violated, ratio {}", check.ratio);
        hi_ratio = hi_ratio.max(check.ratio);
        lo_ratio = lo_ratio.min(check.ratio);
    }
    println!(
        "criterion 11 (modulus dichotomy): PASS — pinched weight: {} shells, line {:.3}, \
         energy {:.3e}; smooth weight admissible with pairing ratios {lo_ratio:.4}..{hi_ratio:.4} \
         over 100 trials",
        witness.shells.len(),
        witness.line_total,
        witness.energy_total
    );
}

/// The edge ids joining consecutive vertices of a ray.
fn ray_edges(filling: &Filling, ray: &GeodesicRay) -> Vec<EdgeId> {
    ray.vertices()
        .windows(2)
        .map(|w| {
            filling
                .neighbors(w[0])
                .iter()
                .find(|(v, _)| *v == w[1])
                .map(|(_, e)| *e)
                .expect("consecutive ray vertices are adjacent")
        })
        .collect()
}

#[test]
fn criterion_12_divergent_construction() {
    let p = 2.0;
    let rho = RadialWeight::exp_rate(2.0 * LN2).unwrap();
    let u = build_divergent(&rho, p, LN2, 80.0).expect("this weight keeps the integral infinite");

    // Logarithmic growth along the ray.
    let (u10, u20, u40) = (u.value(10.0), u.value(20.0), u.value(40.0));
    assert!(u40 > u20 && u20 > u10, "{u10} {u20} {u40}");
    assert!(u40 >= u10 + 0.5, "growth {u10} -> {u40} is too slow");

    // Gradient energy saturates: the tail beyond height 40 adds < 10%.
    let energy = |hi: f64| {
        simpson(&|t: f64| u.gradient_density(t).powf(p) * rho.eval(t), 0.0, hi, 1 << 14)
    };
    let (e40, e80) = (energy(40.0), energy(80.0));
    assert!(e80 < 1.1 * e40, "energy {e40} -> {e80} keeps growing");

    // The homogeneous norm on the graph is finite.
    let filling = build(small_space(), 2.0, 12);
    let norms = sobolev_norms(&filling, &rho, &u, p).expect("norms integrate");
    assert!(norms.homogeneous.is_finite() && norms.homogeneous > 0.0);

    println!(
        "criterion 12 (divergent construction): PASS — U(10) {u10:.4} < U(20) {u20:.4} < \
         U(40) {u40:.4}; energy [0,40] {e40:.6} vs [0,80] {e80:.6} (ratio {:.4}); \
         homogeneous norm {:.4}",
        e80 / e40,
        norms.homogeneous
    );
}
