use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use ttcone::io::{read_cone, read_dense, read_tt, write_cone, write_dense, write_tt};
use ttcone::verify::{verify, Verification, INVARIANT_TOL};
use ttcone::{
    random_base, random_cone_vector, random_dense, retract, tc_evaluate, tc_extract,
    tc_membership, ConeMembership, SplitCertificate, Tolerance,
};

use crate::report::{digest_file, emit, RunReport, Tolerances};
use crate::{CheckArgs, Cli, Command, EvalArgs, ExtractArgs, RandomArgs, VerifyArgs};

pub const EXIT_NEGATIVE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    error: ttcone::Error,
    path: Option<String>,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self.error {
            ttcone::Error::NotInCone { .. } => EXIT_NEGATIVE,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.error),
            None => self.error.fmt(f),
        }
    }
}

impl From<ttcone::Error> for CliError {
    fn from(error: ttcone::Error) -> Self {
        CliError { error, path: None }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::from(ttcone::Error::from(e))
    }
}

/// Attaches the offending file to an I/O or format error.
fn at<T>(path: &str, r: ttcone::Result<T>) -> Result<T, CliError> {
    r.map_err(|error| CliError {
        error,
        path: Some(path.to_string()),
    })
}

type Outcome = Result<u8, CliError>;

struct Context {
    tol: Tolerance,
    timing: bool,
    start: Instant,
}

impl Context {
    fn report(
        &self,
        command: &str,
        inputs: &[(&str, &str)],
        outcome: &str,
        exit_code: u8,
        details: Value,
    ) -> Result<RunReport, CliError> {
        let mut digests = BTreeMap::new();
        for (name, path) in inputs {
            digests.insert(name.to_string(), digest_file(Path::new(path))?);
        }
        Ok(RunReport {
            command: command.to_string(),
            inputs: digests,
            tolerances: Tolerances {
                rank: self.tol.rank,
                orthogonality: self.tol.orthogonality,
            },
            outcome: outcome.to_string(),
            exit_code,
            details,
            wall_time_seconds: self.timing.then(|| self.start.elapsed().as_secs_f64()),
        })
    }
}

pub fn run(cli: &Cli) -> Outcome {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(ttcone::Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {}",
            cli.tol
        ))
        .into());
    }
    let ctx = Context {
        tol: Tolerance::with_rank(cli.tol),
        timing: cli.timing,
        start: Instant::now(),
    };
    match &cli.command {
        Command::Random(a) => random(a),
        Command::Extract(a) => extract(&ctx, a),
        Command::Eval(a) => eval(a),
        Command::Retract(a) => retract_cmd(a),
        Command::Check(a) => check(&ctx, a),
        Command::Verify(a) => verify_cmd(&ctx, a),
    }
}

fn random(a: &RandomArgs) -> Outcome {
    let base = random_base(&a.dims, &a.ranks, a.seed)?;
    let v = random_cone_vector(&base, &a.slack, a.seed)?;
    let mut x = tc_evaluate(&v);
    if a.perturb != 0.0 {
        x = x.axpy(a.perturb, &random_dense(&a.dims, a.seed)?)?;
    }
    at(&a.out_base, write_tt(&a.out_base, &base))?;
    at(&a.out_vec, write_dense(&a.out_vec, &x))?;
    if let Some(path) = &a.out_tcv {
        at(path, write_cone(path, &v))?;
    }
    Ok(0)
}

fn certificate_json(c: &SplitCertificate) -> Value {
    json!({
        "split": c.split,
        "slack": c.slack,
        "rank": c.rank,
        "threshold": c.threshold,
        "spectrum": c.spectrum,
        "member": c.member(),
    })
}

fn membership_json(m: &ConeMembership) -> Value {
    Value::Array(m.splits.iter().map(certificate_json).collect())
}

fn extract(ctx: &Context, a: &ExtractArgs) -> Outcome {
    let base = at(&a.base, read_tt(&a.base))?;
    let x = at(&a.vec, read_dense(&a.vec))?;
    let inputs = [("base", a.base.as_str()), ("vec", a.vec.as_str())];
    match tc_extract(&base, &x, &a.slack, &ctx.tol) {
        Ok(v) => {
            at(&a.out, write_cone(&a.out, &v))?;
            if let Some(target) = &a.report {
                let back = tc_evaluate(&v);
                let details = json!({
                    "effective_slack": v.effective_slack(),
                    "relative_error": back.relative_error(&x)?,
                    "invariant_residual": v.invariant_residuals().max(),
                });
                emit(&ctx.report("extract", &inputs, "extracted", 0, details)?, target)?;
            }
            Ok(0)
        }
        Err(e @ ttcone::Error::NotInCone { .. }) => {
            if let Some(target) = &a.report {
                let m = tc_membership(&base, &x, &a.slack, &ctx.tol)?;
                let details = json!({ "splits": membership_json(&m), "error": e.to_string() });
                emit(
                    &ctx.report("extract", &inputs, "not_in_cone", EXIT_NEGATIVE, details)?,
                    target,
                )?;
            }
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn eval(a: &EvalArgs) -> Outcome {
    let v = at(&a.tcv, read_cone(&a.tcv))?;
    at(&a.out, write_dense(&a.out, &tc_evaluate(&v)))?;
    Ok(0)
}

fn retract_cmd(a: &EvalArgs) -> Outcome {
    let v = at(&a.tcv, read_cone(&a.tcv))?;
    at(&a.out, write_tt(&a.out, &retract(&v)))?;
    Ok(0)
}

fn check(ctx: &Context, a: &CheckArgs) -> Outcome {
    let base = at(&a.base, read_tt(&a.base))?;
    let x = at(&a.vec, read_dense(&a.vec))?;
    let m = tc_membership(&base, &x, &a.slack, &ctx.tol)?;
    let (outcome, code) = if m.member() {
        ("member", 0)
    } else {
        ("not_in_cone", EXIT_NEGATIVE)
    };
    let details = json!({ "member": m.member(), "splits": membership_json(&m) });
    let inputs = [("base", a.base.as_str()), ("vec", a.vec.as_str())];
    emit(&ctx.report("check", &inputs, outcome, code, details)?, &a.report)?;
    Ok(code)
}

fn verification_json(r: &Verification) -> Value {
    let inv = &r.invariants;
    json!({
        "secant": {
            "errors": r.secant.errors,
            "ratios": r.secant.ratios(),
            "rate": r.secant.rate,
            "verdict": r.secant.verdict,
        },
        "retraction_order": {
            "t_grid": r.order.t_grid,
            "errors": r.order.errors,
            "slope": r.order.slope,
            "degenerate": r.order.degenerate(),
        },
        "invariants": {
            "u": inv.constraints.u,
            "x": inv.constraints.x,
            "v": inv.constraints.v,
            "term_coherence": inv.term_coherence,
            "term_sum_gap": inv.term_sum_gap,
            "tolerance": INVARIANT_TOL,
            "passes": inv.passes(INVARIANT_TOL),
        },
        "curve": {
            "bound": r.certificate.bound,
            "samples": r.certificate.samples,
            "contained": r.certificate.contained,
            "certified": r.certificate.holds(),
        },
    })
}

fn verify_cmd(ctx: &Context, a: &VerifyArgs) -> Outcome {
    let v = at(&a.tcv, read_cone(&a.tcv))?;
    let r = verify(&v, &ctx.tol)?;
    let (outcome, code) = if r.passes() {
        ("pass", 0)
    } else {
        ("fail", EXIT_NEGATIVE)
    };
    let inputs = [("tcv", a.tcv.as_str())];
    emit(
        &ctx.report("verify", &inputs, outcome, code, verification_json(&r))?,
        &a.report,
    )?;
    Ok(code)
}
