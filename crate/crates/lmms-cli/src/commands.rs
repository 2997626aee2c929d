//! Subcommand implementations. Each returns the machine-readable `result`
//! payload plus the hashed inputs for the manifest; `main` wraps them in the
//! output envelope and maps failures to exit codes.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use anyhow::{anyhow, bail, Context, Result};
use lmms_core::boxdist::{solve_box, BoxOutcome};
use lmms_core::coupling::Coupling;
use lmms_core::gh::solve_lgh;
use lmms_core::reconstruct::{
    exact_matrix_law, isomorphy_test, reconstruction_experiment, sample_matrix_law, MatrixLaw,
    ReconstructionReport, ENUMERATION_CAP,
};
use lmms_core::solvers::{
    intrinsic_d, solve_l0, solve_linf, solve_lp, Budget, DistanceResult, Method,
    EXACT_SUPPORT_CAP,
};
use lmms_core::space::{self, FiniteLmms};
use lmms_core::sprinkle::{sprinkle, SprinkleConfig, SprinkleMode};
use serde_json::{json, Value};

use crate::format::{load_instance, write_instance, InputHash, InstanceDto, LoadedInstance};

/// Marks a failure as the caller's fault (malformed flag values); `main`
/// maps it to exit code 2 instead of 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Successful command outcome: the `result` payload, the hashed inputs, the
/// seed echoed into the manifest, and the process exit code.
pub struct CmdOut {
    pub result: Value,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub exit: i32,
    /// CSV rows replacing the JSON body on stdout (distance --csv).
    pub csv: Option<String>,
}

impl CmdOut {
    fn ok(result: Value, inputs: Vec<InputHash>, seed: Option<u64>) -> Self {
        CmdOut {
            result,
            inputs,
            seed,
            exit: 0,
            csv: None,
        }
    }
}

fn hash_of(loaded: &LoadedInstance) -> InputHash {
    InputHash {
        path: loaded.path.clone(),
        sha256: loaded.sha256.clone(),
    }
}

// ---------------------------------------------------------------------------
// validate / quotient / union / isomorphic
// ---------------------------------------------------------------------------

/// Axiom check. Reader rejections (malformed JSON, NaN/negative entries,
/// structural errors) are reported as violations too: the instance is
/// invalid either way, and exit code 1 signals it.
pub fn cmd_validate(file: &Path, tol: f64) -> Result<CmdOut> {
    let bytes = std::fs::read(file)
        .with_context(|| format!("cannot read {}", file.display()))?;
    let inputs = vec![InputHash {
        path: file.display().to_string(),
        sha256: crate::format::sha256_hex(&bytes),
    }];
    let parsed: std::result::Result<FiniteLmms, String> =
        serde_json::from_slice::<InstanceDto>(&bytes)
            .map_err(|e| format!("reader: {e}"))
            .and_then(|dto| dto.to_space().map_err(|e| format!("reader: {e}")));
    let (valid, violations, warnings) = match parsed {
        Err(msg) => (false, vec![msg], Vec::new()),
        Ok(space) => {
            let report = space::validate(&space, tol);
            (
                report.is_valid(),
                report.errors.iter().map(|v| v.to_string()).collect(),
                report.warnings.iter().map(|v| v.to_string()).collect(),
            )
        }
    };
    Ok(CmdOut {
        result: json!({"valid": valid, "violations": violations, "warnings": warnings}),
        inputs,
        seed: None,
        exit: if valid { 0 } else { 1 },
        csv: None,
    })
}

pub fn cmd_quotient(file: &Path, tol: f64, out: Option<&Path>) -> Result<CmdOut> {
    let loaded = load_instance(file, true)?;
    let quotient = space::distance_quotient(&loaded.space, tol);
    let dto = InstanceDto::from_space(&quotient.space);
    if let Some(path) = out {
        write_instance(path, &dto)?;
    }
    let class_of: Vec<Value> = quotient
        .class_of
        .iter()
        .map(|c| match c {
            Some(k) => json!(k),
            None => Value::Null,
        })
        .collect();
    Ok(CmdOut::ok(
        json!({"space": dto, "class_of": class_of}),
        vec![hash_of(&loaded)],
        None,
    ))
}

pub fn cmd_union(a: &Path, b: &Path, alpha: f64, out: Option<&Path>) -> Result<CmdOut> {
    let la = load_instance(a, true)?;
    let lb = load_instance(b, true)?;
    let merged = space::disjoint_union(&la.space, &lb.space, alpha)
        .map_err(|e| anyhow!("{e}"))?;
    let dto = InstanceDto::from_space(&merged);
    if let Some(path) = out {
        write_instance(path, &dto)?;
    }
    Ok(CmdOut::ok(
        json!({"space": dto, "alpha": alpha}),
        vec![hash_of(&la), hash_of(&lb)],
        None,
    ))
}

pub fn cmd_isomorphic(a: &Path, b: &Path, tol: f64) -> Result<CmdOut> {
    let la = load_instance(a, true)?;
    let lb = load_instance(b, true)?;
    let report = isomorphy_test(&la.space, &lb.space, tol);
    Ok(CmdOut::ok(
        json!({"isomorphic": report.isomorphic, "witness": report.witness}),
        vec![hash_of(&la), hash_of(&lb)],
        None,
    ))
}

// ---------------------------------------------------------------------------
// matrix-law / reconstruct / sprinkle
// ---------------------------------------------------------------------------

fn law_to_json(law: &MatrixLaw) -> Vec<Value> {
    law.atoms()
        .map(|(_, mat, mass)| {
            let k = mat.n();
            let rows: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| mat.get(i, j)).collect())
                .collect();
            json!({"matrix": rows, "mass": mass})
        })
        .collect()
}

pub fn cmd_matrix_law(
    file: &Path,
    k: usize,
    samples: Option<usize>,
    seed: u64,
) -> Result<CmdOut> {
    let loaded = load_instance(file, true)?;
    let (law, exact) = match samples {
        Some(s) => (sample_matrix_law(&loaded.space, k, s, seed), false),
        None => (
            exact_matrix_law(&loaded.space, k).map_err(|e| {
                anyhow!("{e}; pass --samples to estimate the law instead")
            })?,
            true,
        ),
    };
    let mut result = json!({"k": k, "exact": exact, "atoms": law_to_json(&law)});
    if let Some(s) = samples {
        result["samples"] = json!(s);
    }
    Ok(CmdOut::ok(result, vec![hash_of(&loaded)], Some(seed)))
}

fn report_to_json(report: &ReconstructionReport) -> Value {
    let per_k: Vec<Value> = report
        .per_k
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "exact": r.exact,
                "tv_gap": r.tv_gap,
                "family_gap": r.family_gap,
                "equal": r.equal,
            })
        })
        .collect();
    json!({
        "per_k": per_k,
        "intrinsic_estimate": report.intrinsic_estimate,
        "isomorphic": report.isomorphic,
        "laws_equal": report.laws_equal,
        "verdicts_agree": report.verdicts_agree,
    })
}

pub fn cmd_reconstruct(
    a: &Path,
    b: &Path,
    kmax: usize,
    samples: usize,
    seed: u64,
) -> Result<CmdOut> {
    let la = load_instance(a, true)?;
    let lb = load_instance(b, true)?;
    let report = reconstruction_experiment(&la.space, &lb.space, kmax, samples, seed);
    Ok(CmdOut::ok(
        report_to_json(&report),
        vec![hash_of(&la), hash_of(&lb)],
        Some(seed),
    ))
}

/// `dim` is the spatial dimension (d in a 1+d diamond); the generator's
/// spacetime dimension is d+1.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sprinkle(
    dim: usize,
    half_height: f64,
    n: Option<usize>,
    intensity: Option<f64>,
    seed: u64,
    drop_boundary: bool,
    out: Option<&Path>,
) -> Result<CmdOut> {
    let (mode, mode_json) = match (n, intensity) {
        (Some(count), None) => (SprinkleMode::Iid(count), json!({"iid": count})),
        (None, Some(rho)) => (SprinkleMode::Poisson(rho), json!({"poisson": rho})),
        _ => return Err(UsageError("pass exactly one of --n or --intensity".into()).into()),
    };
    if dim == 0 {
        return Err(
            UsageError("--dim is the spatial dimension and must be at least 1".into()).into(),
        );
    }
    let config = SprinkleConfig {
        dim: dim + 1,
        half_height,
        mode,
        seed,
        drop_boundary,
    };
    let sprinkled = sprinkle(&config).map_err(|e| anyhow!("{e}"))?;
    let dto = InstanceDto::from_space(&sprinkled.space);
    if let Some(path) = out {
        write_instance(path, &dto)?;
    }
    let coordinates: Vec<&[f64]> = sprinkled.events.iter().map(|e| e.coords.as_slice()).collect();
    let result = json!({
        "space": dto,
        "sidecar": {
            "config": {
                "dim": dim,
                "half_height": half_height,
                "mode": mode_json,
                "seed": seed,
                "drop_boundary": drop_boundary,
            },
            "coordinates": coordinates,
        }
    });
    Ok(CmdOut::ok(result, Vec::new(), Some(seed)))
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricArg {
    L0,
    Lp,
    Linf,
    Box,
    Lgh,
    Intrinsic,
}

impl MetricArg {
    fn name(self) -> &'static str {
        match self {
            MetricArg::L0 => "l0",
            MetricArg::Lp => "lp",
            MetricArg::Linf => "linf",
            MetricArg::Box => "box",
            MetricArg::Lgh => "lgh",
            MetricArg::Intrinsic => "intrinsic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverArg {
    /// Exact when both supports are small enough, Frank–Wolfe otherwise.
    Auto,
    Exact,
    FrankWolfe,
    Anneal,
    Grid,
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Exact => "exact",
        Method::FrankWolfe => "frank-wolfe",
        Method::Anneal => "anneal",
        Method::Grid => "grid",
    }
}

/// Parses `--budget key=value,...`; keys: restarts, iter-cap, node-cap,
/// grid-step, bnb-gap (dashes and underscores interchangeable).
pub fn parse_budget(text: Option<&str>) -> Result<Budget> {
    let mut budget = Budget::default();
    let Some(text) = text else {
        return Ok(budget);
    };
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| UsageError(format!("budget entry {part:?} is not key=value")))?;
        let key = key.trim().replace('_', "-");
        let val = val.trim();
        let bad = |what: &str| UsageError(format!("budget {what} value {val:?} is invalid"));
        match key.as_str() {
            "restarts" => budget.restarts = val.parse().map_err(|_| bad("restarts"))?,
            "iter-cap" => budget.iter_cap = val.parse().map_err(|_| bad("iter-cap"))?,
            "node-cap" => budget.node_cap = val.parse().map_err(|_| bad("node-cap"))?,
            "grid-step" => budget.grid_step = val.parse().map_err(|_| bad("grid-step"))?,
            "bnb-gap" => budget.bnb_gap = val.parse().map_err(|_| bad("bnb-gap"))?,
            other => {
                return Err(UsageError(format!(
                    "unknown budget key {other:?} (expected restarts, iter-cap, node-cap, grid-step, bnb-gap)"
                ))
                .into())
            }
        }
    }
    Ok(budget)
}

/// All knobs of one distance evaluation.
pub struct DistanceJob {
    pub metric: MetricArg,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub solver: SolverArg,
    pub budget: Budget,
    pub seed: u64,
    pub kmax: usize,
    pub family: usize,
}

struct PairOut {
    value: f64,
    method: String,
    certified: bool,
    iterations: usize,
    witness: Value,
}

fn coupling_witness(witness: &Coupling, ha: &str, hb: &str) -> Value {
    let rows: Vec<Vec<f64>> = (0..witness.rows())
        .map(|i| (0..witness.cols()).map(|j| witness.get(i, j)).collect())
        .collect();
    json!({"pi": rows, "hash_a": ha, "hash_b": hb})
}

fn pick_method(solver: SolverArg, a: &FiniteLmms, b: &FiniteLmms) -> Method {
    match solver {
        SolverArg::Exact => Method::Exact,
        SolverArg::FrankWolfe => Method::FrankWolfe,
        SolverArg::Anneal => Method::Anneal,
        SolverArg::Grid => Method::Grid,
        SolverArg::Auto => {
            if a.support().len() <= EXACT_SUPPORT_CAP && b.support().len() <= EXACT_SUPPORT_CAP
            {
                Method::Exact
            } else {
                Method::FrankWolfe
            }
        }
    }
}

fn box_witness(outcome: &BoxOutcome, a: &FiniteLmms, b: &FiniteLmms) -> Value {
    let labels_a: Vec<&str> = outcome.order_a.iter().map(|&i| a.labels()[i].as_str()).collect();
    let labels_b: Vec<&str> = outcome.order_b.iter().map(|&i| b.labels()[i].as_str()).collect();
    json!({
        "order_a": labels_a,
        "order_b": labels_b,
        "deleted": outcome.deleted,
    })
}

fn run_pair(job: &DistanceJob, la: &LoadedInstance, lb: &LoadedInstance) -> Result<PairOut> {
    let (a, b) = (&la.space, &lb.space);
    let as_pair = |r: DistanceResult| PairOut {
        value: r.value,
        method: method_name(r.method).to_string(),
        certified: r.certified,
        iterations: r.iterations,
        witness: coupling_witness(&r.witness, &la.sha256, &lb.sha256),
    };
    let out = match job.metric {
        MetricArg::L0 => as_pair(solve_l0(
            a,
            b,
            job.q,
            pick_method(job.solver, a, b),
            &job.budget,
            job.seed,
        )?),
        MetricArg::Lp => as_pair(solve_lp(
            a,
            b,
            job.p,
            job.q,
            pick_method(job.solver, a, b),
            &job.budget,
            job.seed,
        )?),
        MetricArg::Linf => as_pair(solve_linf(
            a,
            b,
            job.q,
            pick_method(job.solver, a, b),
            &job.budget,
            job.seed,
        )?),
        MetricArg::Box => {
            let outcome = solve_box(a, b, job.lambda, &job.budget, job.seed)?;
            PairOut {
                value: outcome.value,
                method: if outcome.certified { "exhaustive" } else { "local-search" }.to_string(),
                certified: outcome.certified,
                iterations: 0,
                witness: box_witness(&outcome, a, b),
            }
        }
        MetricArg::Lgh => {
            let outcome = solve_lgh(a, b, &job.budget);
            PairOut {
                value: outcome.value,
                method: if outcome.certified { "exhaustive" } else { "greedy" }.to_string(),
                certified: outcome.certified,
                iterations: 0,
                witness: json!(outcome.pairs),
            }
        }
        MetricArg::Intrinsic => {
            let value = intrinsic_d(a, b, job.kmax, job.family, job.seed);
            // Certified when every k-law on both sides was enumerable
            // exactly (no Monte-Carlo fallback).
            let exact_all = (1..=job.kmax).all(|k| {
                let fits = |s: &FiniteLmms| {
                    (s.n() as u128)
                        .checked_pow(k as u32)
                        .is_some_and(|t| t <= ENUMERATION_CAP)
                };
                fits(a) && fits(b)
            });
            PairOut {
                value,
                method: "series".to_string(),
                certified: exact_all,
                iterations: 0,
                witness: Value::Null,
            }
        }
    };
    Ok(out)
}

fn pair_json(job: &DistanceJob, la: &LoadedInstance, lb: &LoadedInstance, out: &PairOut) -> Value {
    json!({
        "value": out.value,
        "method": out.method,
        "certified": out.certified,
        "witness": out.witness,
        "seed": job.seed,
        "metric": job.metric.name(),
        "a": la.path,
        "b": lb.path,
        "p": if job.metric == MetricArg::Lp { json!(job.p) } else { Value::Null },
        "q": job.q,
        "lambda": if job.metric == MetricArg::Box { json!(job.lambda) } else { Value::Null },
        "iterations": out.iterations,
    })
}

/// Distance between two files, or all unordered pairs of three or more
/// (batch mode, optionally as CSV). Pairs are distributed over `threads`
/// workers; the output order is by pair index, so thread count never
/// changes the result.
pub fn cmd_distance(
    files: &[PathBuf],
    job: &DistanceJob,
    csv: bool,
    threads: usize,
) -> Result<CmdOut> {
    if files.len() < 2 {
        bail!("distance needs at least two instance files");
    }
    let loaded: Vec<LoadedInstance> = files
        .iter()
        .map(|f| load_instance(f, true))
        .collect::<Result<_>>()?;
    let inputs: Vec<InputHash> = loaded.iter().map(hash_of).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..loaded.len() {
        for j in (i + 1)..loaded.len() {
            pairs.push((i, j));
        }
    }

    // Fixed slots + an atomic cursor: workers claim pair indices, results
    // land by index, so the merge is deterministic for any thread count.
    let slots: Vec<OnceLock<Result<PairOut>>> =
        (0..pairs.len()).map(|_| OnceLock::new()).collect();
    let cursor = AtomicUsize::new(0);
    let workers = threads.max(1).min(pairs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = cursor.fetch_add(1, Ordering::Relaxed);
                if k >= pairs.len() {
                    break;
                }
                let (i, j) = pairs[k];
                let out = run_pair(job, &loaded[i], &loaded[j]);
                let _ = slots[k].set(out);
            });
        }
    });

    let mut results: Vec<(usize, usize, PairOut)> = Vec::with_capacity(pairs.len());
    for (slot, &(i, j)) in slots.into_iter().zip(&pairs) {
        let out = slot
            .into_inner()
            .expect("every pair slot is filled")
            .map_err(|e| {
                anyhow!("{} vs {}: {e}", loaded[i].path, loaded[j].path)
            })?;
        results.push((i, j, out));
    }

    if csv {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record([
            "a", "b", "metric", "p", "q", "lambda", "value", "method", "certified", "seed",
        ])?;
        for (i, j, out) in &results {
            writer.write_record([
                loaded[*i].path.clone(),
                loaded[*j].path.clone(),
                job.metric.name().to_string(),
                job.p.to_string(),
                job.q.to_string(),
                job.lambda.to_string(),
                out.value.to_string(),
                out.method.clone(),
                out.certified.to_string(),
                job.seed.to_string(),
            ])?;
        }
        let body = String::from_utf8(writer.into_inner()?)?;
        return Ok(CmdOut {
            result: Value::Null,
            inputs,
            seed: Some(job.seed),
            exit: 0,
            csv: Some(body),
        });
    }

    let result = if results.len() == 1 {
        let (i, j, out) = &results[0];
        pair_json(job, &loaded[*i], &loaded[*j], out)
    } else {
        let rows: Vec<Value> = results
            .iter()
            .map(|(i, j, out)| pair_json(job, &loaded[*i], &loaded[*j], out))
            .collect();
        json!({"pairs": rows})
    };
    Ok(CmdOut::ok(result, inputs, Some(job.seed)))
}
