//! Command-line interface.
//!
//! Every command prints one JSON document on stdout (or to `--out`) and
//! a human-readable summary on stderr, so pipelines can consume stdout
//! without scraping. Failures print a machine-readable error document
//! on stdout and exit 1.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hyperfill_core::{
    DetectorConfig, Filling, FillingError, MassEstimate, ModulusError, ParamError, ParamOptions,
    ParamValue, TraceError,
};
use thiserror::Error;

use crate::docs::{DocError, FillingDoc};
use crate::report::{
    self, HolderDoc, ModulusDoc, NormsDoc, RegimeDoc, TraceResultDoc, TraceRunDoc, VerifyDoc,
    WitnessDoc,
};
use crate::spec::{parse_interval, parse_rho_spec, parse_space_spec, parse_u_spec, SpecError};
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "hyperfill",
    version,
    about = "Hyperbolic fillings of finitely sampled metric spaces: construction, \
             uniformized geometry, lifted measures, trace parameters, and boundary traces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Net ratio alpha > 1; eps = log(alpha) drives the uniformized
    /// metric. Commands that load a filling use the filling's own alpha.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub alpha: f64,

    /// Edge slack tau > 1 for ball-intersection edges.
    #[arg(long, global = true, default_value_t = 1.5)]
    pub tau: f64,

    /// Integrability exponent p >= 1.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub p: f64,

    /// Radial horizon for parameter integrals and built profiles.
    #[arg(long, global = true, default_value_t = 80.0)]
    pub tmax: f64,

    /// Tolerance for the unit-mass partition breakpoints.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,

    /// Seed for the seeded verification scenarios.
    #[arg(long, global = true, default_value_t = 0xA11CE)]
    pub seed: u64,

    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a hyperbolic filling over a sampled space.
    Build {
        /// Space spec: `cantor:depth=8,scale=0.9`, `grid:dim=2,resolution=8,scale=0.9`,
        /// `line:points=0;0.2;0.5`, or a space document (`@space.json`).
        #[arg(long)]
        space: String,
        /// Deepest level of the filling.
        #[arg(long, default_value_t = 8)]
        levels: u32,
    },
    /// Classify a weight's trace regime from its parameters alone.
    Params {
        /// Weight spec: `bbs:theta=0.5`, `constant:value=1`, `exp_rate:lambda=0.7`,
        /// `example11`, `dip:center=1,power=2`, `piecewise:...`, or `@rho.json`.
        #[arg(long)]
        rho: String,
        /// Cap on unit-mass partition cells.
        #[arg(long, default_value_t = 200)]
        cells: usize,
    },
    /// Trace a function along the geodesic rays of a saved filling.
    Trace {
        /// Filling document produced by `build`.
        #[arg(long)]
        filling: PathBuf,
        /// Weight spec (as in `params`).
        #[arg(long)]
        rho: String,
        /// Profile spec: `constant:value=1`, `expmix:c0=0.5,terms=0.3@1;0.2@2`,
        /// `divergent`, `oscillator`, `calr`, `example11`, or `@table.json`.
        #[arg(long)]
        u: String,
        /// Boundary point index, or `all`.
        #[arg(long, default_value = "all")]
        xi: String,
        /// Rebuild the filling to this depth before tracing.
        #[arg(long)]
        depth: Option<u32>,
        /// Geodesic rays to enumerate per boundary point.
        #[arg(long, default_value_t = 6)]
        max_rays: usize,
    },
    /// Certify the p-modulus of the radial curves crossing a height band.
    Modulus {
        /// Weight spec (as in `params`).
        #[arg(long)]
        rho: String,
        /// Height band `a,b`.
        #[arg(long)]
        interval: String,
        /// Shells for the zero-modulus witness.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Run the verification matrix: regime predictions against traces.
    Verify {
        /// Comma-separated scenario names (default: all).
        #[arg(long)]
        scenarios: Option<String>,
    },
}

/// Command failures, each with a stable machine-readable kind.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error("filling: {0}")]
    Filling(#[from] FillingError),
    #[error("trace: {0}")]
    Trace(#[from] TraceError),
    #[error("modulus: {0}")]
    Modulus(#[from] ModulusError),
    #[error("params: {0}")]
    Params(#[from] ParamError),
    #[error("numerics: {0}")]
    Numeric(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Spec(SpecError::Io { .. }) => "io",
            CliError::Spec(SpecError::Json { .. }) => "invalid_document",
            CliError::Spec(_) => "invalid_parameter",
            CliError::Doc(DocError::Mismatch(_)) => "document_mismatch",
            CliError::Doc(_) => "invalid_document",
            CliError::Filling(_) | CliError::Invalid(_) => "invalid_parameter",
            CliError::Trace(_) | CliError::Modulus(_) | CliError::Params(_) => "computation",
            CliError::Numeric(_) => "numerics",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "invalid_document",
        }
    }
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, format!("{json}\n")).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("output documents always serialize")
}

/// Run one parsed invocation; the return value is the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    if !(cli.alpha > 1.0 && cli.alpha.is_finite()) {
        return Err(CliError::Invalid(format!(
            "alpha must be a finite number exceeding 1, got {}",
            cli.alpha
        )));
    }
    if !(cli.tau > 1.0 && cli.tau.is_finite()) {
        return Err(CliError::Invalid(format!(
            "tau must be a finite number exceeding 1, got {}",
            cli.tau
        )));
    }
    if !(cli.p >= 1.0 && cli.p.is_finite()) {
        return Err(CliError::Invalid(format!("p must be at least 1, got {}", cli.p)));
    }
    if !(cli.tmax > 0.0 && cli.tmax.is_finite()) {
        return Err(CliError::Invalid(format!("tmax must be positive, got {}", cli.tmax)));
    }
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Invalid(format!("tol must be positive, got {}", cli.tol)));
    }

    match &cli.command {
        Command::Build { space, levels } => cmd_build(&cli, space, *levels),
        Command::Params { rho, cells } => cmd_params(&cli, rho, *cells),
        Command::Trace { filling, rho, u, xi, depth, max_rays } => {
            cmd_trace(&cli, filling, rho, u, xi, *depth, *max_rays)
        }
        Command::Modulus { rho, interval, depth } => cmd_modulus(&cli, rho, interval, *depth),
        Command::Verify { scenarios } => cmd_verify(&cli, scenarios.as_deref()),
    }
}

fn cmd_build(cli: &Cli, space_spec: &str, levels: u32) -> Result<i32, CliError> {
    let space = parse_space_spec(space_spec)?;
    let filling = Filling::construct(space, cli.alpha, cli.tau, levels)?;
    let doc = FillingDoc::from_filling(&filling);
    emit(&cli.out, &to_json(&doc))?;
    eprint!("{}", report::human_degree_stats(&filling));
    Ok(0)
}

fn param_value_line(v: &ParamValue) -> String {
    match v {
        ParamValue::Finite(x) => format!("finite ({x:.6})"),
        ParamValue::LowerBound { value, reason } => format!(">= {value:.6} ({reason})"),
        ParamValue::Infinite { certificate } => format!("infinite ({certificate})"),
    }
}

fn cmd_params(cli: &Cli, rho_spec: &str, cells: usize) -> Result<i32, CliError> {
    let eps = cli.alpha.ln();
    let rho = parse_rho_spec(rho_spec, eps, cli.p)?;
    let opts = ParamOptions { t_max: cli.tmax, max_cells: cells, partition_tol: cli.tol };
    let fp = hyperfill_core::params::fp_membership(&rho, cli.p, eps, cli.tmax);
    let doc = if fp.member {
        let regime = hyperfill_core::params::classify_regime(&rho, cli.p, eps, &opts)?;
        eprintln!("rho = {}, p = {}, eps = {:.6}", regime.rho, regime.p, regime.eps);
        eprintln!(
            "mu finite: {:?}{}",
            regime.mu_finite,
            regime.mu_value.map(|v| format!(" ({v:.6})")).unwrap_or_default()
        );
        eprintln!("R: {}", param_value_line(&regime.r_value));
        eprintln!(
            "refined: {} (partition used: {})",
            param_value_line(&regime.cal_r.value),
            regime.cal_r.used_partition
        );
        eprintln!(
            "prediction: inhomogeneous traces {:?}, homogeneous {:?}, vanish a.e. {:?}",
            regime.prediction.inhomogeneous_traces,
            regime.prediction.homogeneous_traces,
            regime.prediction.traces_vanish_ae
        );
        RegimeDoc::from_report(&regime, fp.certificate)
    } else {
        let (mu_finite, mu_value) = match rho.total_mass_estimate(cli.tmax) {
            MassEstimate::Exact(v) => ("yes".to_string(), Some(v)),
            MassEstimate::LowerBound(v) => ("unknown".to_string(), Some(v)),
            MassEstimate::Infinite { .. } => ("no".to_string(), None),
        };
        let r = hyperfill_core::params::param_r(&rho, cli.p, eps, cli.tmax);
        eprintln!("rho = {}, p = {}, eps = {eps:.6}", rho.describe(), cli.p);
        eprintln!("not admissible: {}", fp.certificate);
        eprintln!("R: {}", param_value_line(&r));
        RegimeDoc {
            rho: rho.describe(),
            p: cli.p,
            eps,
            admissible: false,
            certificate: fp.certificate,
            mu_finite,
            mu_value,
            r: (&r).into(),
            cal_r: None,
            prediction: None,
        }
    };
    emit(&cli.out, &to_json(&doc))?;
    Ok(0)
}

fn cmd_trace(
    cli: &Cli,
    filling_path: &PathBuf,
    rho_spec: &str,
    u_spec: &str,
    xi_spec: &str,
    depth: Option<u32>,
    max_rays: usize,
) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(filling_path).map_err(|source| CliError::Io {
        path: filling_path.display().to_string(),
        source,
    })?;
    let doc: FillingDoc = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: filling_path.display().to_string(),
        source,
    })?;
    let mut filling = doc.reconstruct()?;
    if let Some(d) = depth {
        if d != doc.levels {
            filling = Filling::construct(doc.space.to_sample()?, doc.alpha, doc.tau, d)?;
        }
    }
    let eps = filling.eps();
    let t_max = cli.tmax.max(filling.max_level() as f64 + 2.0);
    let rho = parse_rho_spec(rho_spec, eps, cli.p)?;
    let opts = ParamOptions { t_max, partition_tol: cli.tol, ..ParamOptions::default() };
    let u = parse_u_spec(u_spec, &rho, cli.p, eps, t_max, &opts)?;

    let n = filling.space().len();
    let xis: Vec<usize> = if xi_spec == "all" {
        (0..n).collect()
    } else {
        let xi: usize = xi_spec.parse().map_err(|_| {
            CliError::Invalid(format!("--xi must be a boundary point index or \"all\", got {xi_spec:?}"))
        })?;
        if xi >= n {
            return Err(CliError::Invalid(format!(
                "boundary point {xi} out of range (space has {n} points)"
            )));
        }
        vec![xi]
    };

    let cfg = DetectorConfig::default();
    let norms = hyperfill_core::trace::sobolev_norms(&filling, &rho, &u, cli.p)?;
    let mut results = Vec::with_capacity(xis.len());
    for xi in xis {
        let report = hyperfill_core::trace::trace_t(&filling, &u, xi, max_rays, &cfg)?;
        let tilde = hyperfill_core::trace::trace_tilde(&filling, &u, xi, &cfg)?;
        eprintln!("xi {xi}: T {}, tilde {}", report.verdict, tilde.verdict);
        results.push(TraceResultDoc::new(xi, &report, &tilde));
    }
    let run_doc = TraceRunDoc {
        alpha: filling.alpha(),
        tau: filling.tau(),
        levels: filling.max_level(),
        rho: rho.describe(),
        u: u.describe(),
        norms: NormsDoc::from(&norms),
        results,
    };
    emit(&cli.out, &to_json(&run_doc))?;
    Ok(0)
}

fn cmd_modulus(cli: &Cli, rho_spec: &str, interval: &str, depth: usize) -> Result<i32, CliError> {
    let eps = cli.alpha.ln();
    let p = cli.p;
    let (a, b) = parse_interval(interval)?;
    let rho = parse_rho_spec(rho_spec, eps, p)?;
    let horizon = cli.tmax.max(b + 1.0);
    let fp = hyperfill_core::modulus::check_condition1(&rho, p, eps, horizon);
    let curves = format!(
        "all curves containing a full radial segment across heights [{a}, {b}]"
    );
    let failure_in_band = fp
        .failure
        .as_ref()
        .map(|c| c.lo <= b && c.hi >= a)
        .unwrap_or(false);

    let doc = if fp.member || !failure_in_band {
        let certificate = if fp.member {
            fp.certificate.clone()
        } else {
            format!(
                "{}; the failure lies outside the requested band, where the W-mass is finite",
                fp.certificate
            )
        };
        let (bound, w_mass, holder) = if p > 1.0 {
            let w = hyperfill_core::params::rp_mass(&rho, p, eps, a, b)
                .map_err(CliError::Numeric)?;
            // The extremal density (e^{-eps t}/rho)^{1/(p-1)} turns the
            // pairing into an identity; its ratio doubles as a
            // quadrature cross-check.
            let g = |t: f64| ((-eps * t - rho.log_eval(t)) / (p - 1.0)).exp();
            let check = hyperfill_core::modulus::radial_holder_check(&rho, p, eps, g, a, b)?;
            (w.powf(1.0 - p), Some(w), Some(HolderDoc::from(&check)))
        } else {
            let n = ((b - a) * 4096.0).ceil() as usize + 1;
            let mut sup = 0.0f64;
            for i in 0..=n {
                let t = a + (b - a) * i as f64 / n as f64;
                sup = sup.max(hyperfill_core::params::p1_ratio(&rho, eps, t));
            }
            if !(sup.is_finite() && sup > 0.0) {
                return Err(CliError::Numeric(format!(
                    "the ratio e^(-eps t)/rho is not representable on [{a}, {b}]"
                )));
            }
            (1.0 / sup, None, None)
        };
        eprintln!(
            "positive bound: Mod_{p} >= {bound:.6e} for {curves}"
        );
        ModulusDoc {
            verdict: "positive_bound".into(),
            p,
            eps,
            rho: rho.describe(),
            interval: (a, b),
            curves,
            condition1: fp.member,
            certificate,
            bound: Some(bound),
            w_mass,
            holder,
            witness: None,
        }
    } else {
        let witness = hyperfill_core::modulus::witness_zero_modulus(&rho, p, eps, depth)?;
        eprintln!(
            "zero-modulus witness: {} shells around t = {} give energy {:.3e} over line \
             total {:.1}, bounding the modulus by {:.3e}",
            witness.shells.len(),
            witness.center,
            witness.energy_total,
            witness.line_total,
            witness.modulus_upper_bound
        );
        ModulusDoc {
            verdict: "zero_witness".into(),
            p,
            eps,
            rho: rho.describe(),
            interval: (a, b),
            curves,
            condition1: false,
            certificate: fp.certificate,
            bound: None,
            w_mass: None,
            holder: None,
            witness: Some(WitnessDoc::from(&witness)),
        }
    };
    emit(&cli.out, &to_json(&doc))?;
    Ok(0)
}

fn cmd_verify(cli: &Cli, scenarios: Option<&str>) -> Result<i32, CliError> {
    let filter: Vec<String> = scenarios
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let doc: VerifyDoc = verify::run_matrix(cli.seed, &filter).map_err(CliError::Invalid)?;
    for row in &doc.scenarios {
        let mark = if row.agree { "ok      " } else { "MISMATCH" };
        eprintln!("{mark} {} ({} ms): {}", row.name, row.ms, row.detail);
    }
    eprintln!(
        "{} of {} scenarios agree",
        doc.scenarios.iter().filter(|r| r.agree).count(),
        doc.scenarios.len()
    );
    emit(&cli.out, &to_json(&doc))?;
    Ok(if doc.all_agree { 0 } else { 1 })
}
