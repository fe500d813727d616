//! Perturbation ensembles.
//!
//! Each seed draws `d`, `n` and `γ` from the configured ranges, a random frame
//! `F`, a Gaussian `K` and a perturbed family `G` satisfying the three-constant
//! condition with `(α, β, γ)`, then compares predicted and empirical bounds.
//! Rows run in parallel and are returned in seed order.

use kframe::generators::{gaussian_matrix, pw_perturb_family, random_frame, seeded_rng, GenSpec};
use kframe::{verify_perturbed_kframe, Frame, Operator, PerturbationSpec, Tol};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::SweepArgs;
use crate::io::InputError;

/// Streams used by the sweep on top of the generator streams.
const DRAW_STREAM: u64 = 64;
const K_STREAM: u64 = 65;

/// Parses `a`, `a..b` (half-open) or `a..=b` into an inclusive pair.
pub fn parse_int_range(field: &str, raw: &str) -> Result<(u64, u64), InputError> {
    let bad = |msg: String| InputError::field(field, msg);
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| bad(format!("`{s}` is not a non-negative integer")))
    };
    let (lo, hi) = if let Some((a, b)) = raw.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = raw.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if b == 0 {
            return Err(bad(format!("range `{raw}` is empty")));
        }
        (a, b - 1)
    } else {
        let a = num(raw)?;
        (a, a)
    };
    if lo > hi {
        return Err(bad(format!("range `{raw}` is empty")));
    }
    Ok((lo, hi))
}

/// Parses `x` or `a..b` / `a..=b` into a closed interval of non-negative reals.
pub fn parse_float_range(field: &str, raw: &str) -> Result<(f64, f64), InputError> {
    let bad = |msg: String| InputError::field(field, msg);
    let num = |s: &str| match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(bad(format!("`{s}` is not a non-negative number"))),
    };
    let (lo, hi) = match raw.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let a = num(raw)?;
            (a, a)
        }
    };
    if lo > hi {
        return Err(bad(format!("range `{raw}` is empty")));
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub seeds: (u64, u64),
    pub d: (usize, usize),
    pub n: (usize, usize),
    pub gamma: (f64, f64),
    pub alpha: f64,
    pub beta: f64,
}

impl SweepConfig {
    pub fn parse(args: &SweepArgs) -> Result<Self, InputError> {
        let seeds = parse_int_range("--seeds", &args.seeds)?;
        let (d_lo, d_hi) = parse_int_range("--d", &args.d)?;
        let (n_lo, n_hi) = parse_int_range("--n", &args.n)?;
        if d_lo == 0 || d_hi > 64 {
            return Err(InputError::field("--d", format!("`{}` must lie within 1..=64", args.d)));
        }
        if n_hi > 256 {
            return Err(InputError::field(
                "--n",
                format!("`{}` must lie within 1..=256", args.n),
            ));
        }
        let gamma = parse_float_range("--gamma", &args.gamma)?;
        if !(args.alpha.is_finite() && args.alpha >= 0.0) {
            return Err(InputError::field("--alpha", "must be a non-negative number"));
        }
        if !(args.beta.is_finite() && args.beta >= 0.0 && args.beta < 1.0) {
            return Err(InputError::field("--beta", "must lie in [0, 1)"));
        }
        Ok(Self {
            seeds,
            d: (d_lo as usize, d_hi as usize),
            n: (n_lo as usize, n_hi as usize),
            gamma,
            alpha: args.alpha,
            beta: args.beta,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub d: usize,
    pub n: usize,
    pub gamma: f64,
    pub e_norm: Option<f64>,
    pub gate: Option<f64>,
    pub admissible: bool,
    pub original_lower: Option<f64>,
    pub original_upper: Option<f64>,
    pub predicted_lower: Option<f64>,
    pub predicted_upper: Option<f64>,
    pub empirical_lower: Option<f64>,
    pub empirical_upper: Option<f64>,
    pub margin: Option<f64>,
    pub violation: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub admissible: usize,
    pub violations: usize,
    pub errors: usize,
}

impl Summary {
    pub fn of(rows: &[SweepRow]) -> Self {
        Self {
            rows: rows.len(),
            admissible: rows.iter().filter(|r| r.admissible).count(),
            violations: rows.iter().filter(|r| r.violation).count(),
            errors: rows.iter().filter(|r| r.error.is_some()).count(),
        }
    }
}

/// The seeded instance behind one row: `(F, K, G, constants)`.
pub fn instance(cfg: &SweepConfig, seed: u64) -> kframe::Result<(Frame, Operator, Frame, PerturbationSpec<f64>)> {
    let mut rng = seeded_rng(seed, DRAW_STREAM);
    let d = rng.random_range(cfg.d.0..=cfg.d.1);
    let n = rng.random_range(cfg.n.0..=cfg.n.1).max(d);
    let gamma = if cfg.gamma.0 < cfg.gamma.1 {
        rng.random_range(cfg.gamma.0..=cfg.gamma.1)
    } else {
        cfg.gamma.0
    };
    let f = random_frame(&GenSpec::new(d, n, seed, 1.0)?)?;
    let k = gaussian_matrix(d, d, &mut seeded_rng(seed, K_STREAM));
    let g = pw_perturb_family(&f, cfg.alpha, cfg.beta, gamma, seed)?;
    let (a, b, c) = g.constants;
    Ok((f, k, g.family, PerturbationSpec::new(a, b, c)?))
}

fn row(cfg: &SweepConfig, seed: u64, tol: &Tol, trials: usize) -> SweepRow {
    let mut out = SweepRow {
        seed,
        d: 0,
        n: 0,
        gamma: 0.0,
        e_norm: None,
        gate: None,
        admissible: false,
        original_lower: None,
        original_upper: None,
        predicted_lower: None,
        predicted_upper: None,
        empirical_lower: None,
        empirical_upper: None,
        margin: None,
        violation: false,
        error: None,
    };
    let (f, k, g, spec) = match instance(cfg, seed) {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.d = f.dim();
    out.n = f.len();
    out.gamma = spec.gamma;
    match verify_perturbed_kframe(&f, &g, &k, &spec, tol, trials, seed) {
        Ok(rep) => {
            out.e_norm = Some(rep.e_norm);
            out.gate = Some(rep.prediction.gate_value);
            out.admissible = rep.prediction.admissible;
            out.original_lower = Some(rep.original.lower);
            out.original_upper = Some(rep.original.upper);
            out.predicted_lower = rep.prediction.bounds.map(|b| b.lower);
            out.predicted_upper = rep.prediction.bounds.map(|b| b.upper);
            out.empirical_lower = Some(rep.empirical.lower);
            out.empirical_upper = Some(rep.empirical.upper);
            out.margin = rep.prediction.admissible.then_some(rep.margin);
            out.violation = rep.violation;
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

pub fn sweep_rows(cfg: &SweepConfig, tol: &Tol, trials: usize) -> Vec<SweepRow> {
    let seeds: Vec<u64> = (cfg.seeds.0..=cfg.seeds.1).collect();
    seeds.par_iter().map(|&s| row(cfg, s, tol, trials)).collect()
}

/// Rows followed by one summary line; its `seed` column reads `summary`.
pub fn to_csv(rows: &[SweepRow], summary: &Summary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    if rows.is_empty() {
        w.write_record(HEADER).expect("in-memory write");
    }
    let mut last = vec![String::new(); HEADER.len()];
    let col = |name: &str| HEADER.iter().position(|h| *h == name).expect("known column");
    last[col("seed")] = "summary".into();
    last[col("d")] = summary.rows.to_string();
    last[col("admissible")] = summary.admissible.to_string();
    last[col("violation")] = summary.violations.to_string();
    last[col("error")] = summary.errors.to_string();
    w.write_record(&last).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

const HEADER: [&str; 16] = [
    "seed",
    "d",
    "n",
    "gamma",
    "e_norm",
    "gate",
    "admissible",
    "original_lower",
    "original_upper",
    "predicted_lower",
    "predicted_upper",
    "empirical_lower",
    "empirical_upper",
    "margin",
    "violation",
    "error",
];
