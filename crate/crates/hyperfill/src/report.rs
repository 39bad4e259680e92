//! Serializable command outputs.
//!
//! Every command prints exactly one JSON document on stdout; these are
//! the document types. Human-readable summaries go to stderr and are
//! produced by the `human_*` helpers so the two streams never mix.

use hyperfill_core::{
    CalRReport, Filling, HolderCheck, ParamValue, RegimeReport, Shell, SobolevNorms, TildeTrace,
    TraceReport, TraceVerdict, Trilean, ZeroModulusWitness,
};
use serde::Serialize;

/// A trace parameter value: finite, a lower bound with an unresolved
/// tail, or infinite with the certificate that proves it.
#[derive(Debug, Clone, Serialize)]
pub struct ParamValueDoc {
    /// `"finite"`, `"lower_bound"`, or `"infinite"`.
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&ParamValue> for ParamValueDoc {
    fn from(v: &ParamValue) -> Self {
        match v {
            ParamValue::Finite(x) => ParamValueDoc {
                state: "finite".into(),
                value: Some(*x),
                detail: None,
            },
            ParamValue::LowerBound { value, reason } => ParamValueDoc {
                state: "lower_bound".into(),
                value: Some(*value),
                detail: Some(reason.clone()),
            },
            ParamValue::Infinite { certificate } => ParamValueDoc {
                state: "infinite".into(),
                value: None,
                detail: Some(certificate.clone()),
            },
        }
    }
}

fn trilean_str(t: Trilean) -> String {
    match t {
        Trilean::Yes => "yes",
        Trilean::No => "no",
        Trilean::Unknown => "unknown",
    }
    .into()
}

#[derive(Debug, Clone, Serialize)]
pub struct CalRDoc {
    pub value: ParamValueDoc,
    /// Per-cell integrals of `W` over the unit-mass partition (empty
    /// when the parameter defaulted to `R`).
    pub per_cell: Vec<f64>,
    pub eventually_monotone: bool,
    pub used_partition: bool,
}

impl From<&CalRReport> for CalRDoc {
    fn from(r: &CalRReport) -> Self {
        CalRDoc {
            value: (&r.value).into(),
            per_cell: r.per_cell.clone(),
            eventually_monotone: r.eventually_monotone,
            used_partition: r.used_partition,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionDoc {
    pub inhomogeneous_traces: Option<bool>,
    pub homogeneous_traces: Option<bool>,
    pub traces_vanish_ae: Option<bool>,
}

/// Output of `hyperfill params`: the weight's regime and what the
/// dichotomy predicts. `admissible: false` reports the failure of the
/// standing hypotheses instead of a regime.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeDoc {
    pub rho: String,
    pub p: f64,
    pub eps: f64,
    pub admissible: bool,
    pub certificate: String,
    pub mu_finite: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_value: Option<f64>,
    pub r: ParamValueDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cal_r: Option<CalRDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictionDoc>,
}

impl RegimeDoc {
    pub fn from_report(report: &RegimeReport, certificate: String) -> Self {
        RegimeDoc {
            rho: report.rho.clone(),
            p: report.p,
            eps: report.eps,
            admissible: true,
            certificate,
            mu_finite: trilean_str(report.mu_finite),
            mu_value: report.mu_value,
            r: (&report.r_value).into(),
            cal_r: Some((&report.cal_r).into()),
            prediction: Some(PredictionDoc {
                inhomogeneous_traces: report.prediction.inhomogeneous_traces,
                homogeneous_traces: report.prediction.homogeneous_traces,
                traces_vanish_ae: report.prediction.traces_vanish_ae,
            }),
        }
    }
}

/// One classified tail: the verdict kind plus whichever fields it
/// carries.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictDoc {
    /// `"converged"`, `"oscillating"`, `"escaping"`, or `"undetermined"`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&TraceVerdict> for VerdictDoc {
    fn from(v: &TraceVerdict) -> Self {
        let mut doc = VerdictDoc {
            kind: String::new(),
            limit: None,
            lower: None,
            upper: None,
            last: None,
            detail: None,
        };
        match v {
            TraceVerdict::Converged { limit } => {
                doc.kind = "converged".into();
                doc.limit = Some(*limit);
            }
            TraceVerdict::Oscillating { lower, upper } => {
                doc.kind = "oscillating".into();
                doc.lower = Some(*lower);
                doc.upper = Some(*upper);
            }
            TraceVerdict::Escaping { last } => {
                doc.kind = "escaping".into();
                doc.last = Some(*last);
            }
            TraceVerdict::Undetermined { detail } => {
                doc.kind = "undetermined".into();
                doc.detail = Some(detail.clone());
            }
        }
        doc
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TildeDoc {
    pub verdict: VerdictDoc,
    /// Cone averages at integer heights, root first.
    pub means: Vec<f64>,
}

impl From<&TildeTrace> for TildeDoc {
    fn from(t: &TildeTrace) -> Self {
        TildeDoc { verdict: (&t.verdict).into(), means: t.means.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormsDoc {
    pub p: f64,
    pub lp_u: f64,
    pub lp_g: f64,
    pub full: f64,
    pub homogeneous: f64,
}

impl From<&SobolevNorms> for NormsDoc {
    fn from(n: &SobolevNorms) -> Self {
        NormsDoc { p: n.p, lp_u: n.lp_u, lp_g: n.lp_g, full: n.full, homogeneous: n.homogeneous }
    }
}

/// Traces of one function at one boundary point: the ray-limit trace
/// over every enumerated geodesic ray (plus pairwise interleavings) and
/// the cone-averaged trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceResultDoc {
    pub xi: usize,
    pub verdict: VerdictDoc,
    pub per_ray: Vec<VerdictDoc>,
    pub rays: usize,
    pub interleavings: usize,
    pub tilde: TildeDoc,
}

impl TraceResultDoc {
    pub fn new(xi: usize, report: &TraceReport, tilde: &TildeTrace) -> Self {
        TraceResultDoc {
            xi,
            verdict: (&report.verdict).into(),
            per_ray: report.per_ray.iter().map(VerdictDoc::from).collect(),
            rays: report.rays,
            interleavings: report.interleavings,
            tilde: tilde.into(),
        }
    }
}

/// Output of `hyperfill trace`.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRunDoc {
    pub alpha: f64,
    pub tau: f64,
    pub levels: u32,
    pub rho: String,
    pub u: String,
    pub norms: NormsDoc,
    pub results: Vec<TraceResultDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellDoc {
    pub lo: f64,
    pub hi: f64,
    pub w_integral: f64,
    pub line_contribution: f64,
    pub energy: f64,
}

impl From<&Shell> for ShellDoc {
    fn from(s: &Shell) -> Self {
        ShellDoc {
            lo: s.lo,
            hi: s.hi,
            w_integral: s.w_integral,
            line_contribution: s.line_contribution,
            energy: s.energy,
        }
    }
}

/// The averaged-density witness that the crossing family is null.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessDoc {
    pub center: f64,
    pub from_below: bool,
    /// The admissible density: the average of the per-shell unit-line
    /// densities.
    pub phi: String,
    pub shells: Vec<ShellDoc>,
    pub line_total: f64,
    pub energy_total: f64,
    pub modulus_upper_bound: f64,
}

impl From<&ZeroModulusWitness> for WitnessDoc {
    fn from(w: &ZeroModulusWitness) -> Self {
        let side = if w.from_below { "below" } else { "above" };
        WitnessDoc {
            center: w.center,
            from_below: w.from_below,
            phi: format!(
                "phi = (1/{}) * sum of the {} shell densities (each normalized to unit line \
                 integral) on nested intervals approaching t = {} from {}",
                w.shells.len(),
                w.shells.len(),
                w.center,
                side
            ),
            shells: w.shells.iter().map(ShellDoc::from).collect(),
            line_total: w.line_total,
            energy_total: w.energy_total,
            modulus_upper_bound: w.modulus_upper_bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderDoc {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl From<&HolderCheck> for HolderDoc {
    fn from(h: &HolderCheck) -> Self {
        HolderDoc { lhs: h.lhs, rhs: h.rhs, ratio: h.ratio }
    }
}

/// Output of `hyperfill modulus`: a certificate for the `p`-modulus of
/// the family of curves crossing the height band.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusDoc {
    /// `"positive_bound"` or `"zero_witness"`.
    pub verdict: String,
    pub p: f64,
    pub eps: f64,
    pub rho: String,
    pub interval: (f64, f64),
    /// The curve family the certificate is about.
    pub curves: String,
    pub condition1: bool,
    pub certificate: String,
    /// Lower bound on the modulus (positive verdicts).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// `int W` over the interval (positive verdicts with `p > 1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_mass: Option<f64>,
    /// Pairing evaluated at the extremal density (positive verdicts
    /// with `p > 1`); its ratio is 1 up to quadrature noise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorBody {
    kind: String,
    detail: String,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorDoc {
    error: ErrorBody,
}

/// The machine-readable error document printed on stdout when a command
/// fails.
pub fn error_json(kind: &str, detail: &str) -> String {
    let doc = ErrorDoc {
        error: ErrorBody { kind: kind.into(), detail: detail.into() },
    };
    serde_json::to_string_pretty(&doc).expect("error documents always serialize")
}

/// One scenario row of `hyperfill verify`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRowDoc {
    pub index: usize,
    pub name: String,
    pub rho: String,
    pub p: f64,
    /// What the parameter side predicts.
    pub predicted: String,
    /// What the numerical experiment observed.
    pub observed: String,
    pub agree: bool,
    pub detail: String,
    pub ms: u128,
}

/// Output of `hyperfill verify`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyDoc {
    pub scenarios: Vec<VerifyRowDoc>,
    pub all_agree: bool,
}

/// Degree and size statistics for a freshly built filling, for stderr.
pub fn human_degree_stats(filling: &Filling) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "filling: {} vertices, {} edges, levels 0..={}, eps = {:.6}",
        filling.vertex_count(),
        filling.edge_count(),
        filling.max_level(),
        filling.eps()
    );
    let mut max_degree = 0usize;
    let mut min_degree = usize::MAX;
    for n in 0..=filling.max_level() {
        let mut level_max = 0usize;
        let mut count = 0usize;
        for v in filling.level_vertices(n) {
            let d = filling.neighbors(v).len();
            level_max = level_max.max(d);
            max_degree = max_degree.max(d);
            min_degree = min_degree.min(d);
            count += 1;
        }
        let _ = writeln!(out, "  level {n}: {count} vertices, max degree {level_max}");
    }
    let _ = writeln!(out, "degree range: {min_degree}..={max_degree}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_serialize_their_own_fields_only() {
        let doc: VerdictDoc = (&TraceVerdict::Converged { limit: 0.5 }).into();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"converged\"") && json.contains("\"limit\""));
        assert!(!json.contains("lower") && !json.contains("detail"));

        let doc: VerdictDoc = (&TraceVerdict::Oscillating { lower: 0.0, upper: 1.0 }).into();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"oscillating\"") && json.contains("\"upper\":1.0"));
    }

    #[test]
    fn error_documents_have_the_stable_shape() {
        let json = error_json("invalid_parameter", "tau must exceed 1");
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["error"]["kind"], "invalid_parameter");
        assert_eq!(v["error"]["detail"], "tau must exceed 1");
    }
}
