//! JSON documents for spaces, fillings, rays, weights, and profiles.
//!
//! Every document is plain serde data. Loading a document never trusts
//! derived fields: a filling document is reconstructed from its embedded
//! space and parameters, and the stored vertices and edges are then
//! checked against the reconstruction (integers exactly, reals to a
//! relative `1e-15`). A document that fails this check is rejected
//! rather than repaired, so a filling loaded from disk is always one the
//! library itself would have built.

use hyperfill_core::{
    Filling, FillingError, GeodesicRay, MetricSpaceSample, RadialFamily, RadialFunction,
    RadialWeight, SpaceError, TailBehavior, WeightError,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Relative tolerance for comparing stored reals against reconstructed
/// ones. Stored values come from the same arithmetic, so anything above
/// round-off in the last place means the document was edited.
pub const REAL_TOL: f64 = 1e-15;

/// Document-layer failures.
#[derive(Debug, Error)]
pub enum DocError {
    /// The document is structurally or semantically invalid.
    #[error("invalid document: {0}")]
    Invalid(String),
    /// The document's stored data disagrees with its reconstruction.
    #[error("document does not match its reconstruction: {0}")]
    Mismatch(String),
    #[error("space: {0}")]
    Space(#[from] SpaceError),
    #[error("filling: {0}")]
    Filling(#[from] FillingError),
    #[error("weight: {0}")]
    Weight(#[from] WeightError),
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REAL_TOL * a.abs().max(b.abs())
}

/// A finitely sampled metric space: either coordinates in the line or
/// plane, or an explicit distance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    /// `"euclidean"` (with `points`) or `"matrix"` (with `matrix`).
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
    pub base_index: usize,
}

impl SpaceDoc {
    pub fn from_sample(space: &MetricSpaceSample) -> Self {
        if space.is_matrix() {
            let n = space.len();
            let matrix = (0..n)
                .map(|i| (0..n).map(|j| space.dist(i, j)).collect())
                .collect();
            SpaceDoc {
                metric: "matrix".into(),
                points: None,
                matrix: Some(matrix),
                weights: space.weights().to_vec(),
                base_index: space.base_index(),
            }
        } else {
            let dim = space.coord_dim().expect("euclidean samples carry coordinates") as usize;
            let points = (0..space.len())
                .map(|i| {
                    let c = space.coords(i).expect("euclidean samples carry coordinates");
                    c[..dim].to_vec()
                })
                .collect();
            SpaceDoc {
                metric: "euclidean".into(),
                points: Some(points),
                matrix: None,
                weights: space.weights().to_vec(),
                base_index: space.base_index(),
            }
        }
    }

    pub fn to_sample(&self) -> Result<MetricSpaceSample, DocError> {
        match self.metric.as_str() {
            "euclidean" => {
                let points = self.points.as_ref().ok_or_else(|| {
                    DocError::Invalid("euclidean space needs a \"points\" field".into())
                })?;
                if points.is_empty() {
                    return Err(DocError::Invalid("empty point list".into()));
                }
                let dim = points[0].len();
                if points.iter().any(|p| p.len() != dim) {
                    return Err(DocError::Invalid(
                        "all points must have the same number of coordinates".into(),
                    ));
                }
                match dim {
                    1 => Ok(MetricSpaceSample::from_line_points(
                        points.iter().map(|p| p[0]).collect(),
                        self.weights.clone(),
                        self.base_index,
                    )?),
                    2 => Ok(MetricSpaceSample::from_plane_points(
                        points.iter().map(|p| [p[0], p[1]]).collect(),
                        self.weights.clone(),
                        self.base_index,
                    )?),
                    d => Err(DocError::Invalid(format!(
                        "points must have 1 or 2 coordinates, got {d}"
                    ))),
                }
            }
            "matrix" => {
                let matrix = self.matrix.as_ref().ok_or_else(|| {
                    DocError::Invalid("matrix space needs a \"matrix\" field".into())
                })?;
                Ok(MetricSpaceSample::from_matrix(
                    matrix,
                    self.weights.clone(),
                    self.base_index,
                )?)
            }
            other => Err(DocError::Invalid(format!(
                "unknown metric kind {other:?}; expected \"euclidean\" or \"matrix\""
            ))),
        }
    }
}

/// One filling vertex: the index of its net point, its level, and the
/// ball it represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub center: usize,
    pub level: u32,
    pub radius: f64,
    pub mass: f64,
}

/// A hyperbolic filling together with the space and parameters that
/// produced it. Edges are `[a, b, "H"|"V"]` triples of vertex indices
/// with the horizontal/vertical tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingDoc {
    pub alpha: f64,
    pub tau: f64,
    pub levels: u32,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<(usize, usize, String)>,
    pub space: SpaceDoc,
}

impl FillingDoc {
    pub fn from_filling(filling: &Filling) -> Self {
        let vertices = filling
            .vertices()
            .iter()
            .map(|v| VertexDoc {
                center: v.center,
                level: v.level,
                radius: v.radius,
                mass: v.mass,
            })
            .collect();
        let edges = filling
            .edges()
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    hyperfill_core::EdgeKind::Horizontal => "H",
                    hyperfill_core::EdgeKind::Vertical => "V",
                };
                (e.a.0, e.b.0, kind.to_string())
            })
            .collect();
        FillingDoc {
            alpha: filling.alpha(),
            tau: filling.tau(),
            levels: filling.max_level(),
            vertices,
            edges,
            space: SpaceDoc::from_sample(filling.space()),
        }
    }

    /// Rebuild the filling from the embedded space and check the stored
    /// vertices and edges against the reconstruction.
    pub fn reconstruct(&self) -> Result<Filling, DocError> {
        let space = self.space.to_sample()?;
        let filling = Filling::construct(space, self.alpha, self.tau, self.levels)?;
        if filling.vertex_count() != self.vertices.len() {
            return Err(DocError::Mismatch(format!(
                "document stores {} vertices, reconstruction has {}",
                self.vertices.len(),
                filling.vertex_count()
            )));
        }
        for (i, (doc, built)) in self.vertices.iter().zip(filling.vertices()).enumerate() {
            if doc.center != built.center || doc.level != built.level {
                return Err(DocError::Mismatch(format!(
                    "vertex {i}: stored (center {}, level {}), rebuilt (center {}, level {})",
                    doc.center, doc.level, built.center, built.level
                )));
            }
            if !close(doc.radius, built.radius) || !close(doc.mass, built.mass) {
                return Err(DocError::Mismatch(format!(
                    "vertex {i}: stored radius/mass differ from the reconstruction beyond 1e-15"
                )));
            }
        }
        if filling.edge_count() != self.edges.len() {
            return Err(DocError::Mismatch(format!(
                "document stores {} edges, reconstruction has {}",
                self.edges.len(),
                filling.edge_count()
            )));
        }
        for (i, (doc, built)) in self.edges.iter().zip(filling.edges()).enumerate() {
            let kind = match built.kind {
                hyperfill_core::EdgeKind::Horizontal => "H",
                hyperfill_core::EdgeKind::Vertical => "V",
            };
            if doc.0 != built.a.0 || doc.1 != built.b.0 || doc.2 != kind {
                return Err(DocError::Mismatch(format!(
                    "edge {i}: stored [{}, {}, {:?}], rebuilt [{}, {}, {:?}]",
                    doc.0, doc.1, doc.2, built.a.0, built.b.0, kind
                )));
            }
        }
        Ok(filling)
    }
}

/// A geodesic ray to a boundary point: the target sample index and the
/// vertex at each level, root first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayDoc {
    pub xi: usize,
    pub vertices: Vec<usize>,
}

impl RayDoc {
    pub fn from_ray(ray: &GeodesicRay) -> Self {
        RayDoc {
            xi: ray.target(),
            vertices: ray.vertices().iter().map(|v| v.0).collect(),
        }
    }
}

/// A radial weight: a named family with its parameters and the declared
/// tail behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoDoc {
    pub family: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    pub tail: String,
}

fn tail_str(tail: TailBehavior) -> &'static str {
    match tail {
        TailBehavior::Integrable => "integrable",
        TailBehavior::Nonintegrable => "nonintegrable",
        TailBehavior::Unknown => "unknown",
    }
}

fn num(params: &Map<String, Value>, key: &str) -> Result<f64, DocError> {
    opt_num(params, key)?
        .ok_or_else(|| DocError::Invalid(format!("missing numeric parameter {key:?}")))
}

fn opt_num(params: &Map<String, Value>, key: &str) -> Result<Option<f64>, DocError> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| DocError::Invalid(format!("parameter {key:?} must be a number"))),
    }
}

fn num_list(params: &Map<String, Value>, key: &str) -> Result<Vec<f64>, DocError> {
    let v = params
        .get(key)
        .ok_or_else(|| DocError::Invalid(format!("missing list parameter {key:?}")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| DocError::Invalid(format!("parameter {key:?} must be a list")))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| DocError::Invalid(format!("parameter {key:?} must hold numbers")))
        })
        .collect()
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn json_list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| json_num(*x)).collect())
}

impl RhoDoc {
    pub fn from_weight(rho: &RadialWeight) -> Self {
        let mut params = Map::new();
        let family = match rho.family() {
            RadialFamily::Constant { value } => {
                params.insert("value".into(), json_num(*value));
                "constant"
            }
            RadialFamily::ExpRate { lambda } => {
                params.insert("lambda".into(), json_num(*lambda));
                "exp_rate"
            }
            RadialFamily::Bbs { theta, p, eps } => {
                params.insert("theta".into(), json_num(*theta));
                params.insert("p".into(), json_num(*p));
                params.insert("eps".into(), json_num(*eps));
                "bbs"
            }
            RadialFamily::Example11 { p, eps } => {
                params.insert("p".into(), json_num(*p));
                params.insert("eps".into(), json_num(*eps));
                "example11"
            }
            RadialFamily::Dip { center, power, rate, .. } => {
                params.insert("center".into(), json_num(*center));
                params.insert("power".into(), json_num(*power));
                params.insert("rate".into(), json_num(*rate));
                "dip"
            }
            RadialFamily::Piecewise { breaks, values, rates } => {
                params.insert("breaks".into(), json_list(breaks));
                params.insert("values".into(), json_list(values));
                params.insert("rates".into(), json_list(rates));
                "piecewise"
            }
            RadialFamily::Custom { start, step, samples, .. } => {
                params.insert("start".into(), json_num(*start));
                params.insert("step".into(), json_num(*step));
                params.insert("samples".into(), json_list(samples));
                "custom"
            }
        };
        RhoDoc {
            family: family.into(),
            params,
            tail: tail_str(rho.tail_behavior()).into(),
        }
    }

    /// Build the weight. `eps` and `p` from the calling context fill in
    /// when the document omits them (the exponential families are
    /// usually written relative to the filling at hand).
    pub fn to_weight(&self, eps: f64, p: f64) -> Result<RadialWeight, DocError> {
        let ps = &self.params;
        let rho = match self.family.as_str() {
            "constant" => RadialWeight::constant(opt_num(ps, "value")?.unwrap_or(1.0))?,
            "exp_rate" => RadialWeight::exp_rate(num(ps, "lambda")?)?,
            "bbs" => RadialWeight::bbs(
                num(ps, "theta")?,
                opt_num(ps, "p")?.unwrap_or(p),
                opt_num(ps, "eps")?.unwrap_or(eps),
            )?,
            "example11" => RadialWeight::example11(
                opt_num(ps, "p")?.unwrap_or(p),
                opt_num(ps, "eps")?.unwrap_or(eps),
            )?,
            "dip" => RadialWeight::dip(
                num(ps, "center")?,
                num(ps, "power")?,
                opt_num(ps, "rate")?.unwrap_or(eps * p),
            )?,
            "piecewise" => RadialWeight::piecewise(
                num_list(ps, "breaks")?,
                num_list(ps, "values")?,
                num_list(ps, "rates")?,
            )?,
            "custom" => {
                let tail = match self.tail.as_str() {
                    "integrable" => TailBehavior::Integrable,
                    "nonintegrable" => TailBehavior::Nonintegrable,
                    "unknown" => TailBehavior::Unknown,
                    other => {
                        return Err(DocError::Invalid(format!(
                            "unknown tail kind {other:?}; expected \"integrable\", \
                             \"nonintegrable\", or \"unknown\""
                        )))
                    }
                };
                RadialWeight::custom(
                    num(ps, "start")?,
                    num(ps, "step")?,
                    num_list(ps, "samples")?,
                    tail,
                )?
            }
            other => {
                return Err(DocError::Invalid(format!(
                    "unknown weight family {other:?}; expected one of \"constant\", \
                     \"exp_rate\", \"bbs\", \"example11\", \"dip\", \"piecewise\", \"custom\""
                )))
            }
        };
        Ok(rho)
    }
}

/// A tabulated radial profile for `trace --u`: samples at
/// `start + k * step`, linearly interpolated. When `eps` is omitted the
/// filling's own `eps` is used for the gradient bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTableDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl ProfileTableDoc {
    pub fn to_profile(&self, eps: f64) -> Result<RadialFunction, DocError> {
        if self.values.len() < 2 {
            return Err(DocError::Invalid("profile table needs at least 2 values".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(DocError::Invalid("profile table step must be positive".into()));
        }
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return Err(DocError::Invalid("profile table start must be >= 0".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(DocError::Invalid("profile table values must be finite".into()));
        }
        Ok(RadialFunction::table(
            self.eps.unwrap_or(eps),
            self.start,
            self.step,
            self.values.clone(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor_filling() -> Filling {
        let space = MetricSpaceSample::gen_cantor(3, 0.9).unwrap();
        Filling::construct(space, 2.0, 1.5, 5).unwrap()
    }

    #[test]
    fn filling_documents_round_trip_exactly() {
        let filling = cantor_filling();
        let doc = FillingDoc::from_filling(&filling);
        let json = serde_json::to_string(&doc).unwrap();
        let back: FillingDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, back);
        let rebuilt = back.reconstruct().unwrap();
        assert_eq!(rebuilt.vertex_count(), filling.vertex_count());
        assert_eq!(rebuilt.edge_count(), filling.edge_count());
    }

    #[test]
    fn tampered_documents_are_rejected() {
        let filling = cantor_filling();
        let mut doc = FillingDoc::from_filling(&filling);
        doc.vertices[0].mass += 1e-6;
        match doc.reconstruct() {
            Err(DocError::Mismatch(_)) => {}
            other => panic!("tampered document should be rejected, got {other:?}"),
        }
    }

    #[test]
    fn edge_tag_corruption_is_rejected() {
        let filling = cantor_filling();
        let mut doc = FillingDoc::from_filling(&filling);
        let flipped = if doc.edges[0].2 == "H" { "V" } else { "H" };
        doc.edges[0].2 = flipped.into();
        assert!(matches!(doc.reconstruct(), Err(DocError::Mismatch(_))));
    }

    #[test]
    fn matrix_spaces_round_trip() {
        let matrix = vec![
            vec![0.0, 0.5, 0.9],
            vec![0.5, 0.0, 0.6],
            vec![0.9, 0.6, 0.0],
        ];
        let space = MetricSpaceSample::from_matrix(&matrix, vec![1.0, 2.0, 1.0], 0).unwrap();
        let doc = SpaceDoc::from_sample(&space);
        assert_eq!(doc.metric, "matrix");
        let back = doc.to_sample().unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.dist(0, 2), 0.9);
        assert_eq!(back.weights(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn weight_documents_round_trip_every_family() {
        let eps = std::f64::consts::LN_2;
        let weights = vec![
            RadialWeight::constant(2.5).unwrap(),
            RadialWeight::exp_rate(0.7).unwrap(),
            RadialWeight::bbs(0.5, 2.0, eps).unwrap(),
            RadialWeight::example11(2.0, eps).unwrap(),
            RadialWeight::dip(1.0, 2.0, 2.0 * eps).unwrap(),
            RadialWeight::piecewise(
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.5, 0.25],
                vec![0.0, 1.0, 0.5],
            )
            .unwrap(),
            RadialWeight::custom(0.0, 0.5, vec![1.0, 2.0, 1.5], TailBehavior::Integrable)
                .unwrap(),
        ];
        for rho in &weights {
            let doc = RhoDoc::from_weight(rho);
            let json = serde_json::to_string(&doc).unwrap();
            let back: RhoDoc = serde_json::from_str(&json).unwrap();
            let rebuilt = back.to_weight(eps, 2.0).unwrap();
            assert_eq!(rebuilt.describe(), rho.describe(), "family {}", doc.family);
            for i in 0..=40 {
                let t = 0.1 * i as f64;
                assert_eq!(rebuilt.eval(t), rho.eval(t), "family {} at t={t}", doc.family);
            }
        }
    }

    #[test]
    fn context_fills_in_omitted_exponents() {
        let doc: RhoDoc = serde_json::from_str(
            r#"{ "family": "bbs", "params": { "theta": 0.5 }, "tail": "integrable" }"#,
        )
        .unwrap();
        let eps = std::f64::consts::LN_2;
        let rho = doc.to_weight(eps, 2.0).unwrap();
        let reference = RadialWeight::bbs(0.5, 2.0, eps).unwrap();
        assert_eq!(rho.describe(), reference.describe());
    }

    #[test]
    fn unknown_families_are_rejected_with_the_expected_list() {
        let doc: RhoDoc = serde_json::from_str(
            r#"{ "family": "gaussian", "params": {}, "tail": "unknown" }"#,
        )
        .unwrap();
        let err = doc.to_weight(1.0, 2.0).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("gaussian") && msg.contains("bbs"), "got: {msg}");
    }
}
