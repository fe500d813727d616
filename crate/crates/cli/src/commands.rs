//! Command dispatch and exit-code mapping.

use std::path::{Path, PathBuf};

use kframe::generators::{commuting_pair, graded_frame, joint_instance, random_frame, GenSpec};
use kframe::{
    certify_controlled_frame, certify_controlled_kframe, certify_kframe, certify_perturbed_controlled, is_frame,
    jacobi_control, kframe_perturb_predict, optimal_controlled_kframe_bounds, optimal_frame_bounds,
    optimal_kframe_bounds, preconditioned_frame_algorithm, transfer_controlled_to_k, transfer_k_to_controlled,
    verify_perturbed_kframe, Bounds, Controlled, FrameError, KFrame, Operator, PerturbationSpec, SolveTrace, Tol,
    Vector,
};
use num_complex::Complex;
use serde_json::json;

use crate::args::{Cli, Command, Direction, Format, GenKind};
use crate::io::{self, InputError};
use crate::report::{witness, BoundsOut, Report};
use crate::sweep;

/// Environment variable holding the default relative tolerance.
pub const TOL_ENV: &str = "KFRAME_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Rendered output and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub text: String,
}

/// Tolerance from `--tol`, then the environment, then the default.
pub fn resolve_tol(flag: Option<f64>, env: Option<&str>) -> Result<(Tol, &'static str), InputError> {
    let base = Tol::default();
    if let Some(v) = flag {
        return base
            .with_rel_eps(v)
            .map(|t| (t, "flag"))
            .map_err(|e| InputError::field("--tol", e.to_string()));
    }
    match env {
        Some(raw) if !raw.trim().is_empty() => {
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| InputError::field(TOL_ENV, format!("`{raw}` is not a number")))?;
            base.with_rel_eps(v)
                .map(|t| (t, "env"))
                .map_err(|e| InputError::field(TOL_ENV, e.to_string()))
        }
        _ => Ok((base, "default")),
    }
}

fn at(field: &'static str) -> impl Fn(FrameError) -> InputError {
    move |e| InputError::field(field, e.to_string())
}

fn bounds_json(b: &Bounds) -> serde_json::Value {
    serde_json::to_value(BoundsOut::from(*b)).expect("bounds serialize")
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn check_bound_flags(lower: f64, upper: f64) -> Result<(), InputError> {
    if !(lower.is_finite() && lower > 0.0) {
        return Err(InputError::field(
            "--lower",
            format!("{lower} must be positive and finite"),
        ));
    }
    if !(upper.is_finite() && upper > 0.0) {
        return Err(InputError::field(
            "--upper",
            format!("{upper} must be positive and finite"),
        ));
    }
    Ok(())
}

fn kframe_problem(input: &Path, k: &Path) -> Result<KFrame, InputError> {
    let f = io::load_frame(input, "--input")?;
    let k = io::load_matrix(k, "--k")?;
    KFrame::new(f, k).map_err(at("--k"))
}

fn controlled_problem(input: &Path, k: &Path, c: &Path, tol: &Tol) -> Result<Controlled, InputError> {
    let f = io::load_frame(input, "--input")?;
    let k = io::load_matrix(k, "--k")?;
    let c = io::load_matrix(c, "--c")?;
    Controlled::new(f, k, c, tol).map_err(at("--c"))
}

/// Runs one command and renders its output; does not touch `--out`.
pub fn run(cli: &Cli, env_tol: Option<&str>) -> Result<Outcome, InputError> {
    let (tol, tol_source) = resolve_tol(cli.common.tol, env_tol)?;
    let seed = cli.common.seed;
    let new_report = |command: &str, result: &'static str| Report::new(command, result, &tol, tol_source, seed);
    let default_format = match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    };
    let format = cli.common.format.unwrap_or(default_format);

    let report = match &cli.command {
        Command::Bounds { input, k, c } => {
            let f = io::load_frame(input, "--input")?;
            let fb = optimal_frame_bounds(&f, &tol);
            let mut r = new_report("bounds", "optimal-frame-bounds");
            r.inputs.insert("input".into(), path_str(input));
            let mut details = json!({
                "frame": bounds_json(&fb),
                "is_frame": is_frame(&fb, &tol),
                "dim": f.dim(),
                "count": f.len(),
            });
            r.bounds = Some(fb.into());
            r.set_verdict(
                if is_frame(&fb, &tol) { "Certified" } else { "Refuted" },
                is_frame(&fb, &tol),
            );
            if let Some(kp) = k {
                r.inputs.insert("k".into(), path_str(kp));
                let p = KFrame::new(f.clone(), io::load_matrix(kp, "--k")?).map_err(at("--k"))?;
                r.result = "optimal-k-frame-bounds";
                match optimal_kframe_bounds(&p, &tol) {
                    Ok(kb) => {
                        details["k_frame"] = bounds_json(&kb);
                        r.bounds = Some(kb.into());
                        let ok = kb.lower > 0.0;
                        r.set_verdict(if ok { "Certified" } else { "Refuted" }, ok);
                    }
                    Err(FrameError::ZeroK { .. }) => r.set_verdict("Degenerate", false),
                    Err(e) => return Err(at("--k")(e)),
                }
            }
            if let Some(cp) = c {
                r.inputs.insert("c".into(), path_str(cp));
                let cm = io::load_matrix(cp, "--c")?;
                let cert = certify_controlled_frame(&f, &cm, &tol).map_err(at("--c"))?;
                details["controlled"] = json!({
                    "bounds": bounds_json(&cert.bounds),
                    "verdict": cert.verdict.as_str(),
                    "anti_hermitian_residual": cert.anti_hermitian_residual,
                });
                if let Some(kp) = k {
                    r.result = "optimal-controlled-k-frame-bounds";
                    let p = Controlled::new(f.clone(), io::load_matrix(kp, "--k")?, cm, &tol).map_err(at("--c"))?;
                    details["commute_residual"] = json!(p.commute_residual());
                    match optimal_controlled_kframe_bounds(&p, &tol) {
                        Ok(cb) => {
                            details["controlled_k_frame"] = bounds_json(&cb);
                            r.bounds = Some(cb.into());
                            let ok = cb.lower > 0.0;
                            r.set_verdict(if ok { "Certified" } else { "Refuted" }, ok);
                        }
                        Err(FrameError::ZeroK { .. }) => r.set_verdict("Degenerate", false),
                        Err(e) => return Err(at("--c")(e)),
                    }
                } else {
                    r.result = "optimal-controlled-frame-bounds";
                    r.bounds = Some(cert.bounds.into());
                    r.set_verdict(cert.verdict.as_str(), cert.verdict.is_certified());
                }
            }
            r.details = details;
            r
        }

        Command::CertifyK { input, k, lower, upper } => {
            check_bound_flags(*lower, *upper)?;
            let p = kframe_problem(input, k)?;
            let cert = certify_kframe(&p, *lower, *upper, &tol).map_err(at("--lower"))?;
            let mut r = new_report("certify-k", "k-frame-operator-criterion").with_cert(&cert);
            r.inputs.insert("input".into(), path_str(input));
            r.inputs.insert("k".into(), path_str(k));
            r.details = json!({
                "requested": {"lower": lower, "upper": upper},
                "optimal": optimal_kframe_bounds(&p, &tol).ok().map(|b| bounds_json(&b)),
            });
            r
        }

        Command::CertifyControlled {
            input,
            k,
            c,
            lower,
            upper,
        } => {
            check_bound_flags(*lower, *upper)?;
            let mut r;
            if let Some(kp) = k {
                let p = controlled_problem(input, kp, c, &tol)?;
                let cert = certify_controlled_kframe(&p, *lower, *upper, &tol).map_err(at("--c"))?;
                r = new_report("certify-controlled", "controlled-k-frame-inequality").with_cert(&cert);
                r.inputs.insert("k".into(), path_str(kp));
                r.details = json!({
                    "requested": {"lower": lower, "upper": upper},
                    "optimal": optimal_controlled_kframe_bounds(&p, &tol).ok().map(|b| bounds_json(&b)),
                    "commute_residual": p.commute_residual(),
                    "anti_hermitian_residual": cert.anti_hermitian_residual,
                });
            } else {
                let f = io::load_frame(input, "--input")?;
                let cm = io::load_matrix(c, "--c")?;
                let opt = certify_controlled_frame(&f, &cm, &tol).map_err(at("--c"))?;
                // requested (m, M) against the sharp pair
                let scale = opt.bounds.upper.max(*upper);
                let margin = (opt.bounds.lower - lower).min(upper - opt.bounds.upper);
                let ok = opt.verdict.is_certified() && margin >= -tol.rel_eps * scale;
                r = new_report("certify-controlled", "controlled-frame-inequality");
                r.set_verdict(if ok { "Certified" } else { "Refuted" }, ok);
                r.bounds = Some(BoundsOut {
                    lower: *lower,
                    upper: *upper,
                    lower_optimal: false,
                    upper_optimal: false,
                });
                r.margin = Some(margin);
                r.witness = Some(witness(&opt.witness));
                r.details = json!({
                    "requested": {"lower": lower, "upper": upper},
                    "optimal": bounds_json(&opt.bounds),
                    "anti_hermitian_residual": opt.anti_hermitian_residual,
                });
            }
            r.inputs.insert("input".into(), path_str(input));
            r.inputs.insert("c".into(), path_str(c));
            r
        }

        Command::Transfer {
            direction,
            c,
            lower,
            upper,
            input,
            k,
        } => {
            check_bound_flags(*lower, *upper)?;
            let cm = io::load_matrix(c, "--c")?;
            let source = Bounds::feasible(*lower, *upper);
            let (result, moved) = match direction {
                Direction::C2k => (
                    "controlled-to-k-frame-transfer",
                    transfer_controlled_to_k(&source, &cm, &tol).map_err(at("--c"))?,
                ),
                Direction::K2c => (
                    "k-frame-to-controlled-transfer",
                    transfer_k_to_controlled(&source, &cm, &tol).map_err(at("--c"))?,
                ),
            };
            let mut r = new_report("transfer", result);
            r.inputs.insert("c".into(), path_str(c));
            r.details = json!({
                "direction": match direction { Direction::C2k => "c2k", Direction::K2c => "k2c" },
                "source": {"lower": lower, "upper": upper},
            });
            match (input, k) {
                (Some(input), Some(kp)) => {
                    r.inputs.insert("input".into(), path_str(input));
                    r.inputs.insert("k".into(), path_str(kp));
                    let cert = match direction {
                        Direction::C2k => certify_kframe(&kframe_problem(input, kp)?, moved.lower, moved.upper, &tol)
                            .map_err(at("--k"))?,
                        Direction::K2c => {
                            let p = controlled_problem(input, kp, c, &tol)?;
                            certify_controlled_kframe(&p, moved.lower, moved.upper, &tol).map_err(at("--c"))?
                        }
                    };
                    r = r.with_cert(&cert);
                }
                _ => r.set_verdict("Computed", true),
            }
            r.bounds = Some(moved.into());
            r
        }

        Command::PerturbPredict {
            k,
            lower,
            upper,
            alpha,
            beta,
            gamma,
        } => {
            check_bound_flags(*lower, *upper)?;
            let km = io::load_matrix(k, "--k")?;
            let spec = PerturbationSpec::new(*alpha, *beta, *gamma).map_err(at("--beta"))?;
            let pred = kframe_perturb_predict(*lower, *upper, &km, &spec, &tol).map_err(at("--k"))?;
            let mut r = new_report("perturb-predict", "perturbed-k-frame-prediction");
            r.inputs.insert("k".into(), path_str(k));
            r.set_verdict(if pred.admissible { "Admissible" } else { "Refuted" }, pred.admissible);
            r.bounds = pred.bounds.map(Into::into);
            r.details = json!({
                "gate_value": pred.gate_value,
                "constants": {"alpha": alpha, "beta": beta, "gamma": gamma},
                "original": {"lower": lower, "upper": upper},
            });
            r
        }

        Command::PerturbVerify {
            input,
            perturbed,
            k,
            c,
            alpha,
            beta,
            gamma,
        } => {
            let g = io::load_frame(perturbed, "--perturbed")?;
            let mut r;
            if let Some(cp) = c {
                let p = controlled_problem(input, k, cp, &tol)?;
                let rep = certify_perturbed_controlled(&p, &g, &tol).map_err(at("--perturbed"))?;
                r = new_report("perturb-verify", "compact-perturbation-of-controlled-k-frame");
                let ok = rep.verdict.is_certified() && rep.bessel_holds;
                r.set_verdict(
                    if rep.bessel_holds {
                        rep.verdict.as_str()
                    } else {
                        "Violation"
                    },
                    ok,
                );
                r.bounds = Some(rep.bounds.into());
                r.margin = Some(rep.bessel_bound - rep.empirical_upper);
                r.inputs.insert("c".into(), path_str(cp));
                r.details = json!({
                    "b_f": rep.b_f,
                    "e_norm": rep.e_norm,
                    "bessel_bound": rep.bessel_bound,
                    "empirical_upper": rep.empirical_upper,
                    "bessel_holds": rep.bessel_holds,
                    "span_rank": rep.projector_rank,
                    "spans_space": rep.spans_space,
                    "commute_residual": rep.commute_residual,
                    "anti_hermitian_residual": rep.anti_hermitian_residual,
                });
            } else {
                let p = kframe_problem(input, k)?;
                let spec = PerturbationSpec::new(*alpha, *beta, *gamma).map_err(at("--beta"))?;
                r = new_report("perturb-verify", "perturbed-k-frame-prediction");
                r.trials = Some(cli.common.trials);
                match verify_perturbed_kframe(p.family(), &g, p.k(), &spec, &tol, cli.common.trials, seed) {
                    Ok(rep) => {
                        let verdict = if rep.violation {
                            "Violation"
                        } else if rep.prediction.admissible {
                            "Certified"
                        } else {
                            "Inadmissible"
                        };
                        r.set_verdict(verdict, rep.prediction.admissible && !rep.violation);
                        r.bounds = Some(rep.empirical.into());
                        r.margin = Some(rep.margin);
                        r.details = json!({
                            "condition": {
                                "mode": rep.condition.mode.as_str(),
                                "trials": rep.condition.trials,
                                "worst_slack": rep.condition.worst_slack,
                            },
                            "e_norm": rep.e_norm,
                            "gate_value": rep.prediction.gate_value,
                            "original": bounds_json(&rep.original),
                            "predicted": rep.prediction.bounds.map(|b| bounds_json(&b)),
                            "empirical": bounds_json(&rep.empirical),
                            "projector_rank": rep.projector_rank,
                            "violation": rep.violation,
                        });
                    }
                    Err(e @ (FrameError::ConditionFailed(_) | FrameError::NotCertified(_))) => {
                        r.set_verdict("Refuted", false);
                        r.details = json!({"reason": e.to_string()});
                    }
                    Err(FrameError::DegenerateProjector) => {
                        r.set_verdict("Degenerate", false);
                        r.details = json!({"reason": FrameError::DegenerateProjector.to_string()});
                    }
                    Err(e) => return Err(at("--perturbed")(e)),
                }
            }
            r.inputs.insert("input".into(), path_str(input));
            r.inputs.insert("perturbed".into(), path_str(perturbed));
            r.inputs.insert("k".into(), path_str(k));
            r
        }

        Command::Solve {
            input,
            rhs,
            c,
            tol_res,
            max_iter,
        } => {
            if !(tol_res.is_finite() && *tol_res > 0.0) {
                return Err(InputError::field("--tol-res", format!("{tol_res} must be positive")));
            }
            let f = io::load_frame(input, "--input")?;
            let g: Vector<f64> = match rhs {
                Some(p) => io::load_vector(p, "--rhs")?,
                None => vec![Complex::new(1.0, 0.0); f.dim()],
            };
            if g.len() != f.dim() {
                return Err(InputError::field(
                    "--rhs",
                    format!("length {} but the frame lives in dimension {}", g.len(), f.dim()),
                ));
            }
            let mut r = new_report("solve", "frame-algorithm");
            r.inputs.insert("input".into(), path_str(input));
            if let Some(p) = rhs {
                r.inputs.insert("rhs".into(), path_str(p));
            }
            let control: Operator = match c.as_deref() {
                None => Operator::identity(f.dim()),
                Some("jacobi") => jacobi_control(&f).map_err(at("--c"))?,
                Some(p) => io::load_matrix(&PathBuf::from(p), "--c")?,
            };
            if let Some(name) = c {
                r.result = "preconditioned-frame-algorithm";
                r.inputs.insert("c".into(), name.clone());
            }
            let solved = if c.is_some() {
                preconditioned_frame_algorithm(&f, &control, &g, *tol_res, *max_iter, &tol)
            } else {
                kframe::frame_algorithm(&f, &g, *tol_res, *max_iter, &tol)
            };
            match solved {
                Ok((x, trace)) => solve_details(&mut r, &x, &trace),
                Err(e @ (FrameError::NotAFrame { .. } | FrameError::NotPositive { .. })) => {
                    r.set_verdict("Refuted", false);
                    r.details = json!({"reason": e.to_string()});
                }
                Err(e) => return Err(at("--c")(e)),
            }
            r.bounds = Some(optimal_frame_bounds(&f, &tol).into());
            r
        }

        Command::Sweep(args) => {
            let cfg = sweep::SweepConfig::parse(args)?;
            let rows = sweep::sweep_rows(&cfg, &tol, cli.common.trials);
            let summary = sweep::Summary::of(&rows);
            let text = match format {
                Format::Csv => sweep::to_csv(&rows, &summary),
                Format::Json => {
                    serde_json::to_string_pretty(&json!({"rows": rows, "summary": summary})).expect("rows serialize")
                        + "\n"
                }
            };
            let exit_code = if summary.violations == 0 { EXIT_OK } else { EXIT_REFUTED };
            return Ok(Outcome { exit_code, text });
        }

        Command::Gen {
            kind,
            dim,
            count,
            rank,
            kappa,
            coupling,
        } => {
            if format == Format::Csv {
                return Err(InputError::field("--format", "gen writes JSON only"));
            }
            let count = count.unwrap_or(dim + 2);
            let spec = GenSpec::new(*dim, count, seed, 1.0).map_err(at("--dim"))?;
            let rank = rank.unwrap_or(*dim);
            let text = match kind {
                GenKind::Frame => io::frame_json(&random_frame(&spec).map_err(at("--seed"))?),
                GenKind::JointFrame => io::frame_json(&joint_instance(&spec, rank, true).map_err(at("--rank"))?.family),
                GenKind::GradedFrame => io::frame_json(&graded_frame(&spec, *kappa, *coupling).map_err(at("--kappa"))?),
                GenKind::K => io::matrix_json(&commuting_pair(&spec, rank).map_err(at("--rank"))?.k),
                GenKind::C => io::matrix_json(&commuting_pair(&spec, rank).map_err(at("--rank"))?.c),
            };
            return Ok(Outcome {
                exit_code: EXIT_OK,
                text,
            });
        }
    };
    Ok(Outcome {
        exit_code: report.exit_code,
        text: report.render(format),
    })
}

fn solve_details(r: &mut Report, x: &Vector<f64>, trace: &SolveTrace<f64>) {
    let verdict = if trace.converged {
        "Converged"
    } else if trace.diverged {
        "Diverged"
    } else {
        "NotConverged"
    };
    r.set_verdict(verdict, trace.converged);
    r.margin = trace.residual_history.last().copied();
    r.details = json!({
        "iterates": trace.iterates,
        "relaxation": trace.relaxation,
        "contraction_bound": trace.contraction_bound,
        "rate_estimate": trace.rate_estimate,
        "residual_history": trace.residual_history,
        "weighted_history": trace.weighted_history,
        "solution": witness(x),
    });
}

/// Runs, writes the output to `--out` (or stdout) and returns the exit code.
/// Input errors go to stderr.
pub fn execute(cli: &Cli) -> i32 {
    let env = std::env::var(TOL_ENV).ok();
    let outcome = match run(cli, env.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = io::save(path, &outcome.text) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        }
        None => print!("{}", outcome.text),
    }
    outcome.exit_code
}
