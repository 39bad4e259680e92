//! Command-line spec strings.
//!
//! Weights, profiles, and spaces can be given inline as
//! `family:key=value,key=value` strings (lists use `;` separators), or
//! loaded from a JSON document by passing `@path` or any path ending in
//! `.json`.

use std::collections::BTreeMap;
use std::path::Path;

use hyperfill_core::{
    MetricSpaceSample, ParamOptions, ProfileError, RadialFamily, RadialFunction, RadialWeight,
};
use thiserror::Error;

use crate::docs::{DocError, ProfileTableDoc, RhoDoc, SpaceDoc};

/// Spec-string failures.
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("bad {what} spec {spec:?}: {detail}")]
    Bad { what: &'static str, spec: String, detail: String },
    #[error("cannot read {path:?}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path:?}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("profile: {0}")]
    Profile(#[from] ProfileError),
}

fn bad(what: &'static str, spec: &str, detail: impl Into<String>) -> SpecError {
    SpecError::Bad { what, spec: spec.into(), detail: detail.into() }
}

/// `@path` or a path ending in `.json` refers to a document file.
fn file_path(spec: &str) -> Option<&str> {
    if let Some(path) = spec.strip_prefix('@') {
        Some(path)
    } else if spec.ends_with(".json") {
        Some(spec)
    } else {
        None
    }
}

fn read_doc<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, SpecError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|source| SpecError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| SpecError::Json { path: path.into(), source })
}

/// Split `family:key=value,...` into the family name and its arguments.
fn split_spec<'s>(
    what: &'static str,
    spec: &'s str,
) -> Result<(&'s str, BTreeMap<&'s str, &'s str>), SpecError> {
    let (family, rest) = match spec.split_once(':') {
        Some((f, r)) => (f.trim(), r),
        None => (spec.trim(), ""),
    };
    if family.is_empty() {
        return Err(bad(what, spec, "empty family name"));
    }
    let mut args = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad(what, spec, format!("expected key=value, got {part:?}")))?;
        if args.insert(k.trim(), v.trim()).is_some() {
            return Err(bad(what, spec, format!("duplicate key {:?}", k.trim())));
        }
    }
    Ok((family, args))
}

struct Args<'s> {
    what: &'static str,
    spec: &'s str,
    map: BTreeMap<&'s str, &'s str>,
}

impl<'s> Args<'s> {
    fn num(&self, key: &str) -> Result<f64, SpecError> {
        self.opt_num(key)?
            .ok_or_else(|| bad(self.what, self.spec, format!("missing key {key:?}")))
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>, SpecError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| bad(self.what, self.spec, format!("{key}={v} is not a number"))),
        }
    }

    fn opt_usize(&self, key: &str) -> Result<Option<usize>, SpecError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| bad(self.what, self.spec, format!("{key}={v} is not an integer"))),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, SpecError> {
        self.opt_list(key)?
            .ok_or_else(|| bad(self.what, self.spec, format!("missing list {key:?}")))
    }

    fn opt_list(&self, key: &str) -> Result<Option<Vec<f64>>, SpecError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(';')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map(Some)
                .map_err(|_| {
                    bad(self.what, self.spec, format!("{key}={v} is not a ;-separated list"))
                }),
        }
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<(), SpecError> {
        for k in self.map.keys() {
            if !known.contains(k) {
                return Err(bad(
                    self.what,
                    self.spec,
                    format!("unknown key {k:?} (expected one of {known:?})"),
                ));
            }
        }
        Ok(())
    }
}

/// Parse a `--rho` spec. `eps` and `p` fill in the exponential families'
/// omitted parameters; the `dip` rate defaults to `eps * p`, the pinch
/// rate of the counterexample weights.
pub fn parse_rho_spec(spec: &str, eps: f64, p: f64) -> Result<RadialWeight, SpecError> {
    if let Some(path) = file_path(spec) {
        let doc: RhoDoc = read_doc(path)?;
        return Ok(doc.to_weight(eps, p)?);
    }
    let (family, map) = split_spec("rho", spec)?;
    let args = Args { what: "rho", spec, map };
    let wrap = |r: Result<RadialWeight, hyperfill_core::WeightError>| {
        r.map_err(|e| bad("rho", spec, format!("{e}")))
    };
    match family {
        "constant" => {
            args.reject_unknown(&["value"])?;
            wrap(RadialWeight::constant(args.opt_num("value")?.unwrap_or(1.0)))
        }
        "exp_rate" => {
            args.reject_unknown(&["lambda"])?;
            wrap(RadialWeight::exp_rate(args.num("lambda")?))
        }
        "bbs" => {
            args.reject_unknown(&["theta", "p", "eps"])?;
            wrap(RadialWeight::bbs(
                args.num("theta")?,
                args.opt_num("p")?.unwrap_or(p),
                args.opt_num("eps")?.unwrap_or(eps),
            ))
        }
        "example11" => {
            args.reject_unknown(&["p", "eps"])?;
            wrap(RadialWeight::example11(
                args.opt_num("p")?.unwrap_or(p),
                args.opt_num("eps")?.unwrap_or(eps),
            ))
        }
        "dip" => {
            args.reject_unknown(&["center", "power", "rate"])?;
            wrap(RadialWeight::dip(
                args.num("center")?,
                args.num("power")?,
                args.opt_num("rate")?.unwrap_or(eps * p),
            ))
        }
        "piecewise" => {
            args.reject_unknown(&["breaks", "values", "rates"])?;
            wrap(RadialWeight::piecewise(
                args.list("breaks")?,
                args.list("values")?,
                args.list("rates")?,
            ))
        }
        other => Err(bad(
            "rho",
            spec,
            format!(
                "unknown family {other:?}; expected constant, exp_rate, bbs, example11, dip, \
                 piecewise, or a .json document (custom weights load from documents only)"
            ),
        )),
    }
}

/// Parse a `--u` spec into a radial profile. The built-in names pull
/// their structure from the weight and exponents in effect.
pub fn parse_u_spec(
    spec: &str,
    rho: &RadialWeight,
    p: f64,
    eps: f64,
    t_max: f64,
    opts: &ParamOptions,
) -> Result<RadialFunction, SpecError> {
    if let Some(path) = file_path(spec) {
        let doc: ProfileTableDoc = read_doc(path)?;
        return Ok(doc.to_profile(eps)?);
    }
    let (family, map) = split_spec("u", spec)?;
    let args = Args { what: "u", spec, map };
    match family {
        "constant" => {
            args.reject_unknown(&["value"])?;
            Ok(RadialFunction::exp_mix(eps, args.opt_num("value")?.unwrap_or(1.0), Vec::new()))
        }
        "expmix" => {
            args.reject_unknown(&["c0", "terms"])?;
            let c0 = args.opt_num("c0")?.unwrap_or(0.0);
            let raw = args.map.get("terms").copied().unwrap_or("");
            let mut terms = Vec::new();
            for part in raw.split(';').filter(|s| !s.trim().is_empty()) {
                let (c, r) = part.split_once('@').ok_or_else(|| {
                    bad("u", spec, format!("expected coeff@rate, got {part:?}"))
                })?;
                let c: f64 = c.trim().parse().map_err(|_| {
                    bad("u", spec, format!("coefficient {c:?} is not a number"))
                })?;
                let r: f64 = r.trim().parse().map_err(|_| {
                    bad("u", spec, format!("rate {r:?} is not a number"))
                })?;
                terms.push((c, r));
            }
            Ok(RadialFunction::exp_mix(eps, c0, terms))
        }
        "divergent" => {
            args.reject_unknown(&[])?;
            Ok(hyperfill_core::profile::build_divergent(rho, p, eps, t_max)?)
        }
        "oscillator" => {
            args.reject_unknown(&[])?;
            if p == 1.0 {
                Ok(hyperfill_core::profile::build_oscillator_p1(rho, eps, t_max)?)
            } else {
                Ok(hyperfill_core::profile::build_oscillator_pg1(rho, p, eps, t_max)?)
            }
        }
        "calr" => {
            args.reject_unknown(&[])?;
            Ok(hyperfill_core::profile::build_oscillator_calr(rho, p, eps, opts)?)
        }
        "example11" => {
            args.reject_unknown(&[])?;
            if !matches!(rho.family(), RadialFamily::Example11 { .. }) {
                return Err(bad(
                    "u",
                    spec,
                    format!(
                        "the example11 profile is built for the example11 weight; \
                         --rho is {}",
                        rho.describe()
                    ),
                ));
            }
            Ok(hyperfill_core::profile::build_example11(p, eps, t_max).1)
        }
        other => Err(bad(
            "u",
            spec,
            format!(
                "unknown profile {other:?}; expected constant, expmix, divergent, oscillator, \
                 calr, example11, or a .json profile table"
            ),
        )),
    }
}

/// Parse a `--space` spec.
pub fn parse_space_spec(spec: &str) -> Result<MetricSpaceSample, SpecError> {
    if let Some(path) = file_path(spec) {
        let doc: SpaceDoc = read_doc(path)?;
        return Ok(doc.to_sample()?);
    }
    let (family, map) = split_spec("space", spec)?;
    let args = Args { what: "space", spec, map };
    let wrap = |r: Result<MetricSpaceSample, hyperfill_core::SpaceError>| {
        r.map_err(|e| bad("space", spec, format!("{e}")))
    };
    match family {
        "cantor" => {
            args.reject_unknown(&["depth", "scale"])?;
            let depth = args.opt_usize("depth")?.unwrap_or(5) as u32;
            let scale = args.opt_num("scale")?.unwrap_or(0.9);
            wrap(MetricSpaceSample::gen_cantor(depth, scale))
        }
        "grid" => {
            args.reject_unknown(&["dim", "resolution", "scale"])?;
            let dim = args.opt_usize("dim")?.unwrap_or(1) as u32;
            let resolution = args.opt_usize("resolution")?.unwrap_or(16);
            let scale = args.opt_num("scale")?.unwrap_or(0.9);
            wrap(MetricSpaceSample::gen_grid(dim, resolution, scale))
        }
        "line" => {
            args.reject_unknown(&["points", "weights", "base"])?;
            let points = args.list("points")?;
            let weights = match args.opt_list("weights")? {
                Some(w) => w,
                None => vec![1.0; points.len()],
            };
            let base = args.opt_usize("base")?.unwrap_or(0);
            wrap(MetricSpaceSample::from_line_points(points, weights, base))
        }
        other => Err(bad(
            "space",
            spec,
            format!("unknown space {other:?}; expected cantor, grid, line, or a .json document"),
        )),
    }
}

/// Parse `--interval a,b`.
pub fn parse_interval(spec: &str) -> Result<(f64, f64), SpecError> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| bad("interval", spec, "expected two numbers a,b"))?;
    let a: f64 = a.trim().parse().map_err(|_| bad("interval", spec, "bad left endpoint"))?;
    let b: f64 = b.trim().parse().map_err(|_| bad("interval", spec, "bad right endpoint"))?;
    if !(a.is_finite() && b.is_finite() && b > a && a >= 0.0) {
        return Err(bad("interval", spec, "need 0 <= a < b"));
    }
    Ok((a, b))
}
