//! Randomized verification of the flattening theorem and the dual identities.

use std::collections::BTreeMap;
use std::time::Instant;

use centroaffine::duality::{
    coplanarity_concurrency_check, dual_invariants, dual_pair, flattening_vertex_correspondence, involution_error,
};
use centroaffine::generators::{derive_seed, random_radial_instance, GenConfig};
use centroaffine::pedal::{is_convex, planar_vertices};
use centroaffine::{Error, ToleranceConfig};
use serde::Serialize;

use crate::document::render;
use crate::{Failure, Output};

pub struct Settings {
    pub instances: u64,
    /// Inclusive range of node counts.
    pub n_range: (usize, usize),
    pub seed: u64,
    pub lambda_range: (f64, f64),
    pub cfg: ToleranceConfig,
}

const CHECKS: [&str; 9] = [
    "flattening_count",
    "flattening_vertex_correspondence",
    "coplanarity_concurrency",
    "involution",
    "dual_volume_identities",
    "delta_lambda_identity",
    "dual_curvature_sign",
    "planar_dual_convex",
    "planar_dual_vertices",
];

#[derive(Debug, Serialize)]
struct CheckFailure {
    seed: u64,
    n: usize,
    check: &'static str,
    /// Measured value or residual; `null` when the check could not run.
    residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerificationReport {
    instances: u64,
    checks_per_instance: usize,
    passes: u64,
    failures: Vec<CheckFailure>,
    flattening_histogram: BTreeMap<usize, u64>,
    sigma_observed: Vec<i8>,
    elapsed_seconds: f64,
}

/// Outcome of one check: pass flag and the value reported on failure.
type Check = Result<(bool, f64), Error>;

fn within(residual: f64, cfg: &ToleranceConfig) -> (bool, f64) {
    (residual <= cfg.tol_residual, residual)
}

/// Runs every check on one instance; returns the flattening count and σ when available.
fn run_instance(
    gen: &GenConfig,
    failures: &mut Vec<CheckFailure>,
) -> (u64, Option<usize>, Option<i8>) {
    let cfg = gen.tolerances;
    let mut fail = |check: &'static str, residual: Option<f64>| {
        failures.push(CheckFailure { seed: gen.seed, n: gen.n, check, residual });
    };
    let inst = match random_radial_instance(gen) {
        Ok(inst) => inst,
        Err(_) => {
            fail("generation", None);
            return (0, None, None);
        }
    };
    let p = match inst.framed(cfg) {
        Ok(p) => p,
        Err(_) => {
            fail("generation", None);
            return (0, None, None);
        }
    };

    let flattenings = p.flattening_nodes().ok();
    let mut sigma = None;
    let mut results: Vec<(&'static str, Check)> = Vec::with_capacity(CHECKS.len());

    results.push((
        CHECKS[0],
        match &flattenings {
            Some(f) => Ok((f.len() >= 4 && f.len() % 2 == 0, f.len() as f64)),
            None => p.flattening_nodes().map(|_| (false, f64::NAN)),
        },
    ));
    results.push((CHECKS[1], flattening_vertex_correspondence(&p).map(|c| (c.agree(), 0.0))));
    results.push((
        CHECKS[2],
        coplanarity_concurrency_check(&p).map(|r| {
            let disagreements = r.agreement().iter().filter(|a| !**a).count();
            (disagreements == 0, disagreements as f64)
        }),
    ));
    results.push((CHECKS[3], involution_error(&p).map(|e| within(e, &cfg))));

    match dual_pair(&p).and_then(|d| dual_invariants(&p, &d)) {
        Ok(r) => {
            sigma = Some(r.sign_sigma);
            results.push((CHECKS[4], Ok(within(r.beta_dual_residual.max(r.alpha_dual_residual), &cfg))));
            results.push((CHECKS[5], p.delta_lambda_residual().map(|e| within(e, &cfg))));
            results.push((CHECKS[6], Ok(within(r.sigma_residual.max(r.wparallel_residual), &cfg))));
        }
        Err(e) => {
            results.push((CHECKS[4], Err(e.clone())));
            results.push((CHECKS[5], p.delta_lambda_residual().map(|e| within(e, &cfg))));
            results.push((CHECKS[6], Err(e)));
        }
    }

    match inst.planar_dual(cfg) {
        Ok((y, v)) => {
            results.push((CHECKS[7], is_convex(&y, &cfg).map(|c| (c, 0.0))));
            let n = y.n();
            results.push((
                CHECKS[8],
                planar_vertices(&y, &v, &cfg).map(|vs| {
                    let mut by_node: Vec<usize> = vs.iter().map(|j| (j + 1) % n).collect();
                    by_node.sort_unstable();
                    let ok = by_node.len() >= 4 && Some(&by_node) == flattenings.as_ref();
                    (ok, vs.len() as f64)
                }),
            ));
        }
        Err(e) => {
            results.push((CHECKS[7], Err(e.clone())));
            results.push((CHECKS[8], Err(e)));
        }
    }

    let mut passes = 0;
    for (check, outcome) in results {
        match outcome {
            Ok((true, _)) => passes += 1,
            Ok((false, r)) => fail(check, r.is_finite().then_some(r)),
            Err(_) => fail(check, None),
        }
    }
    (passes, flattenings.map(|f| f.len()), sigma)
}

pub fn run(s: &Settings, report_path: Option<&str>) -> Result<Output, Failure> {
    let (lo, hi) = s.n_range;
    if lo < 5 || lo > hi {
        return Err(Failure::input(format!("--n-range must satisfy 5 <= lo <= hi, got {lo}..{hi}")));
    }
    if s.instances == 0 {
        return Err(Failure::input("--instances must be positive"));
    }
    let base = GenConfig {
        lambda_range: s.lambda_range,
        tolerances: s.cfg,
        ..GenConfig::default()
    };
    base.validate()?;

    let start = Instant::now();
    let mut failures = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut sigmas = Vec::new();
    let mut passes = 0;
    for i in 0..s.instances {
        let seed = derive_seed(s.seed, i);
        let n = lo + (seed % (hi - lo + 1) as u64) as usize;
        let gen = GenConfig { seed, n, ..base.clone() };
        let (ok, count, sigma) = run_instance(&gen, &mut failures);
        passes += ok;
        if let Some(c) = count {
            *histogram.entry(c).or_insert(0) += 1;
        }
        if let Some(sg) = sigma {
            if !sigmas.contains(&sg) {
                sigmas.push(sg);
            }
        }
    }
    sigmas.sort_unstable();
    if sigmas.iter().any(|&sg| sg != -1) {
        eprintln!("notice: observed dual curvature sign {sigmas:?}, expected [-1]");
    }

    let report = VerificationReport {
        instances: s.instances,
        checks_per_instance: CHECKS.len(),
        passes,
        failures,
        flattening_histogram: histogram,
        sigma_observed: sigmas,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    let text = render(&report) + "\n";
    if let Some(path) = report_path {
        std::fs::write(path, &text).map_err(|e| Failure::input(format!("writing {path}: {e}")))?;
    }
    let code = if report.failures.is_empty() { 0 } else { 1 };
    Ok(Output { text, code })
}
