//! The four subcommands. Each one resolves to a generic core parameterized
//! by the arithmetic scalar, so float and exact runs share a single code
//! path and differ only in the numbers they carry.

use num_rational::BigRational;
use serde_json::{json, Value};

use bd_core::operators::{
    defect_profile_sq, demo_contradiction, op_norm_sq, DefectProfile, FiniteOperator,
    OperatorError, WitnessBlock,
};
use bd_core::params::{self, solve_alpha, AlphaResult, Params, ParamsError};
use bd_core::sequences::{
    bd_growth_experiment, best_subsequence_fit, growth_exponent, make_l2_blocks,
    partial_sum_norms, partial_sum_sq_norms, partial_sum_sup_norms, BdCandidate, GrowthFit,
    NormChoice, SequenceError,
};
use bd_core::stages::{StageError, StageLedger};
use bd_core::{find_block_witness, Convention, Scalar};

use crate::cli::{Command, GrowArgs, ProbeArgs};
use crate::config::{ConfigScalar, Mode, OutputFormat, RunConfig};
use crate::opio::read_matrix;
use crate::report::{f64_cell, f64_value, render_csv, render_json, scalar_cell, scalar_value};
use crate::{CliError, CommandOutput};

/// Tolerance for the growth-exponent equation solver.
const ALPHA_TOL: f64 = 1e-12;

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match (command, cfg.mode) {
        (Command::Validate, Mode::Float) => validate_core::<f64>(cfg),
        (Command::Validate, Mode::Exact) => validate_core::<BigRational>(cfg),
        (Command::Build, Mode::Float) => build_core::<f64>(cfg),
        (Command::Build, Mode::Exact) => build_core::<BigRational>(cfg),
        (Command::Grow(args), Mode::Float) => grow_core::<f64>(cfg, args),
        (Command::Grow(args), Mode::Exact) => grow_core::<BigRational>(cfg, args),
        (Command::Probe(args), Mode::Float) => probe_core::<f64>(cfg, args),
        (Command::Probe(args), Mode::Exact) => probe_core::<BigRational>(cfg, args),
    }
}

// ---- error mapping ------------------------------------------------------

fn params_error(e: ParamsError) -> CliError {
    match e {
        ParamsError::Infeasible(_) => CliError::Semantic(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn stage_error(e: StageError) -> CliError {
    match e {
        StageError::CapExceeded { .. } => CliError::Resource(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn sequence_error(e: SequenceError) -> CliError {
    match e {
        SequenceError::Stage(inner) => stage_error(inner),
        other => CliError::Usage(other.to_string()),
    }
}

fn operator_error(e: OperatorError) -> CliError {
    match e {
        OperatorError::Stage(inner) => stage_error(inner),
        other => CliError::Usage(other.to_string()),
    }
}

// ---- shared report pieces -----------------------------------------------

fn params_json<S: ConfigScalar>(cfg: &RunConfig) -> Value {
    let a: S = S::from_big_rational(&cfg.a);
    let b: S = S::from_big_rational(&cfg.b);
    let lambda: S = S::from_big_rational(&cfg.lambda);
    json!({
        "a": scalar_value(&a),
        "b": scalar_value(&b),
        "lambda": scalar_value(&lambda),
        "convention": cfg.convention.name(),
        "mode": S::MODE_NAME,
        "seed": cfg.seed,
        "stages": cfg.stages,
    })
}

fn alpha_json(alpha: &Result<AlphaResult, ParamsError>) -> Value {
    match alpha {
        Ok(r) => json!({
            "alpha": f64_value(r.alpha),
            "p": f64_value(r.p),
            "residual": f64_value(r.residual),
        }),
        Err(e) => json!({
            "alpha": Value::Null,
            "p": Value::Null,
            "residual": Value::Null,
            "note": e.to_string(),
        }),
    }
}

fn cube_residual_of<S: Scalar>(a: &S, b: &S) -> S {
    let cube = |s: &S| s.clone() * s.clone() * s.clone();
    (cube(a) + cube(b) - S::one()).abs()
}

fn build_ledger<S: ConfigScalar>(cfg: &RunConfig) -> Result<StageLedger<S>, CliError> {
    let params = Params::new(
        S::from_big_rational(&cfg.a),
        S::from_big_rational(&cfg.b),
        S::from_big_rational(&cfg.lambda),
        cfg.convention,
    )
    .map_err(params_error)?;
    StageLedger::build_with_cap(params, cfg.stages, cfg.cap).map_err(stage_error)
}

// ---- validate ------------------------------------------------------------

fn validate_core<S: ConfigScalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let a: S = S::from_big_rational(&cfg.a);
    let b: S = S::from_big_rational(&cfg.b);
    let lambda: S = S::from_big_rational(&cfg.lambda);

    let report = params::validate(&a, &b, &lambda).map_err(params_error)?;
    let alpha = solve_alpha(Scalar::to_f64(&a), Scalar::to_f64(&b), ALPHA_TOL);
    let cube = cube_residual_of(&a, &b);
    let exit = if report.verdict { 0 } else { 1 };

    let rendered = match cfg.format {
        OutputFormat::Json => {
            let conditions: Vec<Value> = report
                .conditions
                .iter()
                .map(|c| json!({"id": c.id, "statement": c.statement, "holds": c.holds}))
                .collect();
            let (alpha_v, p_v, residual_v, note) = match &alpha {
                Ok(r) => (
                    f64_value(r.alpha),
                    f64_value(r.p),
                    f64_value(r.residual),
                    None,
                ),
                Err(e) => (Value::Null, Value::Null, Value::Null, Some(e.to_string())),
            };
            let mut doc = json!({
                "command": "validate",
                "verdict": report.verdict,
                "conditions": conditions,
                "one_minus_two_b": scalar_value(&report.one_minus_two_b),
                "a_plus_two_b_lambda": scalar_value(&report.a_plus_two_b_lambda),
                "min_lambda": report.min_lambda.as_ref().map_or(Value::Null, scalar_value),
                "alpha": alpha_v,
                "p": p_v,
                "residual": residual_v,
                "cube_residual": scalar_value(&cube),
                "params": params_json::<S>(cfg),
            });
            if let Some(n) = note {
                doc["alpha_note"] = json!(n);
            }
            render_json(&doc)
        }
        OutputFormat::Csv => {
            let mut rows: Vec<Vec<String>> = Vec::new();
            let mut push = |k: &str, v: String| rows.push(vec![k.to_string(), v]);
            push("verdict", report.verdict.to_string());
            for c in &report.conditions {
                push(&format!("condition_{}", c.id), c.holds.to_string());
            }
            push("one_minus_two_b", scalar_cell(&report.one_minus_two_b));
            push("a_plus_two_b_lambda", scalar_cell(&report.a_plus_two_b_lambda));
            push(
                "min_lambda",
                report.min_lambda.as_ref().map(scalar_cell).unwrap_or_default(),
            );
            let (al, p, res) = match &alpha {
                Ok(r) => (f64_cell(r.alpha), f64_cell(r.p), f64_cell(r.residual)),
                Err(_) => (String::new(), String::new(), String::new()),
            };
            push("alpha", al);
            push("p", p);
            push("residual", res);
            push("cube_residual", scalar_cell(&cube));
            render_csv("key,value", &rows)
        }
    };

    Ok(CommandOutput {
        report: rendered,
        warnings: Vec::new(),
        exit,
    })
}

// ---- build ----------------------------------------------------------------

fn build_core<S: ConfigScalar>(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let ledger = build_ledger::<S>(cfg)?;
    let dims = ledger.dims().to_vec();
    let counts: Vec<usize> = (1..ledger.top_stage())
        .map(|n| ledger.gamma_count(n).expect("stage below top is recorded"))
        .collect();

    let mut warnings = Vec::new();
    if cfg.convention == Convention::PaperStrict && dims.iter().all(|d| *d == 1) {
        warnings.push(String::from(
            "paper-strict index ranges leave every extension-tuple set empty, so all \
             dimensions stay at 1 (degenerate construction); use --convention inclusive \
             for the growing stages",
        ));
    }

    let rendered = match cfg.format {
        OutputFormat::Json => render_json(&json!({
            "command": "build",
            "stages": cfg.stages,
            "dims": dims,
            "gamma_counts": counts,
            "cap": cfg.cap,
            "warnings": warnings,
            "params": params_json::<S>(cfg),
        })),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = (1..=ledger.top_stage())
                .map(|n| {
                    vec![
                        n.to_string(),
                        dims[n - 1].to_string(),
                        counts.get(n - 1).map(ToString::to_string).unwrap_or_default(),
                    ]
                })
                .collect();
            render_csv("stage,dim,gamma_count", &rows)
        }
    };

    Ok(CommandOutput {
        report: rendered,
        warnings,
        exit: 0,
    })
}

// ---- grow -----------------------------------------------------------------

fn refuse_small_count(count: usize, hint: &str) -> Result<(), CliError> {
    if count < 3 {
        return Err(CliError::Usage(format!(
            "a growth fit needs at least 3 blocks, got {count}; {hint}"
        )));
    }
    Ok(())
}

fn parse_widths(text: &str) -> Result<Vec<usize>, CliError> {
    let mut widths = Vec::new();
    for part in text.split(',') {
        let trimmed = part.trim();
        let w: usize = trimmed.parse().map_err(|_| {
            CliError::Usage(format!("--widths: \"{trimmed}\" is not a positive integer"))
        })?;
        if w == 0 {
            return Err(CliError::Usage(String::from(
                "--widths: every width must be at least 1",
            )));
        }
        widths.push(w);
    }
    Ok(widths)
}

fn fit_json(fit: &GrowthFit) -> Value {
    json!({
        "exponent": f64_value(fit.exponent),
        "constant": f64_value(fit.constant),
    })
}

fn norms_csv(norms: &[f64]) -> String {
    let rows: Vec<Vec<String>> = norms
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), f64_cell(*v)])
        .collect();
    render_csv("n,norm", &rows)
}

fn grow_core<S: ConfigScalar>(cfg: &RunConfig, args: &GrowArgs) -> Result<CommandOutput, CliError> {
    match args.candidate.as_str() {
        "l2" => grow_l2::<S>(cfg, args),
        "bd" => grow_bd::<S>(cfg, args),
        other => Err(CliError::Usage(format!(
            "--candidate must be \"bd\" or \"l2\", got \"{other}\""
        ))),
    }
}

fn grow_l2<S: ConfigScalar>(cfg: &RunConfig, args: &GrowArgs) -> Result<CommandOutput, CliError> {
    let widths = parse_widths(&args.widths)?;
    let count = args.count.unwrap_or(16);
    refuse_small_count(count, "pass --count 3 or more")?;

    let seq = make_l2_blocks::<S>(count, &widths, cfg.seed).map_err(sequence_error)?;
    let norms = partial_sum_norms(&seq, NormChoice::L2).map_err(sequence_error)?;
    let fit = growth_exponent(&norms).map_err(sequence_error)?;

    let rendered = match cfg.format {
        OutputFormat::Json => {
            let mut doc = json!({
                "command": "grow",
                "candidate": "l2-blocks",
                "count": count,
                "widths": widths,
                "seed": cfg.seed,
                "norms": norms.iter().map(|v| f64_value(*v)).collect::<Vec<_>>(),
                "fit": fit_json(&fit),
                "params": params_json::<S>(cfg),
            });
            if S::EXACT {
                let sq = partial_sum_sq_norms(&seq).map_err(sequence_error)?;
                doc["partial_sum_sq_exact"] =
                    Value::Array(sq.iter().map(scalar_value).collect());
            }
            render_json(&doc)
        }
        OutputFormat::Csv => norms_csv(&norms),
    };

    Ok(CommandOutput {
        report: rendered,
        warnings: Vec::new(),
        exit: 0,
    })
}

fn grow_bd<S: ConfigScalar>(cfg: &RunConfig, args: &GrowArgs) -> Result<CommandOutput, CliError> {
    let ledger = build_ledger::<S>(cfg)?;
    let dims = ledger.dims();
    let available = (1..dims.len()).filter(|i| dims[*i] > dims[*i - 1]).count();
    let count = args.count.unwrap_or(available);
    refuse_small_count(
        count,
        "build more stages (--stages) or pass --count 3 or more",
    )?;

    let experiment =
        bd_growth_experiment(&ledger, BdCandidate::FreshIndicators, count).map_err(sequence_error)?;
    let fit = experiment
        .fit
        .clone()
        .expect("three or more blocks always produce a fit");
    let alpha = solve_alpha(
        Scalar::to_f64(ledger.params().a()),
        Scalar::to_f64(ledger.params().b()),
        ALPHA_TOL,
    );
    let top = ledger.top_stage();
    let best = best_subsequence_fit(&experiment.sequence, &ledger, top).map_err(sequence_error)?;

    let rendered = match cfg.format {
        OutputFormat::Json => {
            let comparison = match &alpha {
                Ok(r) => json!({
                    "fit_exponent": f64_value(fit.exponent),
                    "alpha": f64_value(r.alpha),
                    "difference": f64_value(fit.exponent - r.alpha),
                }),
                Err(_) => Value::Null,
            };
            let best_json = match &best {
                Some(sel) => json!({
                    "indices": sel.indices,
                    "exponent": f64_value(sel.fit.exponent),
                    "constant": f64_value(sel.fit.constant),
                }),
                None => Value::Null,
            };
            let mut doc = json!({
                "command": "grow",
                "candidate": experiment.sequence.space_name(),
                "blocks": BdCandidate::FreshIndicators.name(),
                "count": count,
                "extension_stage": top,
                "norms": experiment.norms.iter().map(|v| f64_value(*v)).collect::<Vec<_>>(),
                "fit": fit_json(&fit),
                "alpha": alpha_json(&alpha),
                "comparison": comparison,
                "best_subsequence": best_json,
                "note": "finite-scale data: the fit describes these partial sums only",
                "params": params_json::<S>(cfg),
            });
            if S::EXACT {
                let exact =
                    partial_sum_sup_norms(&experiment.sequence, &ledger, top).map_err(sequence_error)?;
                doc["norms_exact"] = Value::Array(exact.iter().map(scalar_value).collect());
            }
            render_json(&doc)
        }
        OutputFormat::Csv => norms_csv(&experiment.norms),
    };

    Ok(CommandOutput {
        report: rendered,
        warnings: Vec::new(),
        exit: 0,
    })
}

// ---- probe ----------------------------------------------------------------

fn require_positive_flag(name: &str, v: f64) -> Result<(), CliError> {
    if !v.is_finite() || v <= 0.0 {
        return Err(CliError::Usage(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn witness_json<S: Scalar>(w: &WitnessBlock<S>) -> Value {
    json!({
        "achieved": f64_value(w.achieved),
        "window": [w.window.0, w.window.1],
        "vector": w.vector.iter().map(scalar_value).collect::<Vec<_>>(),
    })
}

fn contradiction_json(norm_t: f64, c1: f64, c2: f64, alpha: Option<f64>) -> Value {
    let mut doc = json!({
        "norm_t": f64_value(norm_t),
        "c1": f64_value(c1),
        "c2": f64_value(c2),
        "alpha": alpha.map_or(Value::Null, f64_value),
        "bound": Value::Null,
    });
    match alpha {
        None => {
            doc["note"] = json!(
                "growth exponent unavailable; pass --alpha or parameters whose exponent \
                 equation is solvable"
            );
        }
        Some(al) if al <= 0.5 => {
            doc["note"] =
                json!("alpha <= 1/2: the growth bound never crosses sqrt(n), nothing to contradict");
        }
        Some(_) if norm_t <= 0.0 => {
            doc["note"] = json!("the operator norm lower bound is zero; the bound is vacuous");
        }
        Some(al) => match demo_contradiction(norm_t, c1, c2, al) {
            Ok(bound) => doc["bound"] = json!(bound),
            Err(OperatorError::BoundOverflow { approx }) => {
                doc["overflow"] = json!(true);
                doc["note"] = json!(format!(
                    "bound ~{approx:.3e} exceeds the 64-bit range"
                ));
            }
            Err(e) => {
                doc["note"] = json!(e.to_string());
            }
        },
    }
    doc
}

fn probe_core<S: ConfigScalar>(cfg: &RunConfig, args: &ProbeArgs) -> Result<CommandOutput, CliError> {
    require_positive_flag("--c1", args.c1)?;
    require_positive_flag("--c2", args.c2)?;
    require_positive_flag("--compact-threshold", args.compact_threshold)?;
    if let Some(d) = args.delta {
        if !d.is_finite() {
            return Err(CliError::Usage(format!("--delta must be finite, got {d}")));
        }
    }
    if let Some(al) = args.alpha {
        if !al.is_finite() {
            return Err(CliError::Usage(format!("--alpha must be finite, got {al}")));
        }
    }

    let ledger = build_ledger::<S>(cfg)?;
    let top = ledger.top_stage();
    let dims = ledger.dims().to_vec();

    let raw = read_matrix(&args.operator)?;
    let rows: Vec<Vec<S>> = raw
        .iter()
        .map(|row| row.iter().map(S::from_big_rational).collect())
        .collect();
    let row_count = rows.len();

    let target = match args.target_stage {
        Some(t) => {
            if t == 0 || t > top {
                return Err(CliError::Usage(format!(
                    "--target-stage must lie in 1..={top}, got {t}"
                )));
            }
            t
        }
        None => dims
            .iter()
            .position(|d| *d == row_count)
            .map(|i| i + 1)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "no built stage has dimension {row_count} (dims: {dims:?}); \
                     pass --target-stage explicitly"
                ))
            })?,
    };
    let operator = FiniteOperator::new(&ledger, target, rows).map_err(operator_error)?;

    let ext = match args.extension_stage {
        Some(e) => {
            if e < target || e > top {
                return Err(CliError::Usage(format!(
                    "--extension-stage must lie between the target stage {target} and the \
                     built top stage {top}, got {e}"
                )));
            }
            e
        }
        None => (target + 2).min(top),
    };

    let (lower_sq, upper_sq) = op_norm_sq(&operator, &ledger, ext).map_err(operator_error)?;
    let lower = Scalar::to_f64(&lower_sq).sqrt();
    let upper = Scalar::to_f64(&upper_sq).sqrt();

    let defect_sq = defect_profile_sq(&operator, &ledger, ext).map_err(operator_error)?;
    let defect_values: Vec<f64> = defect_sq.iter().map(|s| Scalar::to_f64(s).sqrt()).collect();
    let profile = DefectProfile {
        values: defect_values.clone(),
        extension_stage: ext,
    };
    let compact = profile.numerically_compact(args.compact_threshold);

    let delta = args.delta.unwrap_or(lower / 2.0);
    let witness =
        find_block_witness(&operator, &ledger, ext, delta, args.beyond).map_err(operator_error)?;

    let alpha_solved = solve_alpha(
        Scalar::to_f64(ledger.params().a()),
        Scalar::to_f64(ledger.params().b()),
        ALPHA_TOL,
    )
    .ok();
    let alpha_used = args.alpha.or(alpha_solved.map(|r| r.alpha));
    let contradiction = contradiction_json(lower, args.c1, args.c2, alpha_used);
    let cube = ledger.params().cube_residual();

    let rendered = match cfg.format {
        OutputFormat::Json => {
            let mut doc = json!({
                "command": "probe",
                "operator": {
                    "source_dim": operator.source_dim(),
                    "rows": row_count,
                    "target_stage": target,
                    "extension_stage": ext,
                },
                "norm": {
                    "lower": f64_value(lower),
                    "upper": f64_value(upper),
                },
                "defect": {
                    "values": defect_values.iter().map(|v| f64_value(*v)).collect::<Vec<_>>(),
                    "threshold": f64_value(args.compact_threshold),
                    "numerically_compact": compact,
                },
                "witness_query": {
                    "delta": f64_value(delta),
                    "beyond": args.beyond,
                },
                "witness": witness.as_ref().map_or(Value::Null, witness_json),
                "contradiction": contradiction,
                "cube_residual": scalar_value(&cube),
                "params": params_json::<S>(cfg),
            });
            if S::EXACT {
                doc["norm"]["lower_sq_exact"] = scalar_value(&lower_sq);
                doc["norm"]["upper_sq_exact"] = scalar_value(&upper_sq);
                doc["defect"]["values_sq_exact"] =
                    Value::Array(defect_sq.iter().map(scalar_value).collect());
            }
            render_json(&doc)
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = defect_values
                .iter()
                .enumerate()
                .map(|(k, v)| vec![k.to_string(), f64_cell(*v)])
                .collect();
            render_csv("k,delta_k", &rows)
        }
    };

    Ok(CommandOutput {
        report: rendered,
        warnings: Vec::new(),
        exit: 0,
    })
}
