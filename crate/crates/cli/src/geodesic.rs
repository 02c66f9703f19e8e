use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand};
use maxplus_core::geodesics::{lemma_b_gap, min_parameter_at, GeodesicError};
use maxplus_core::{
    finite_martin_space, min_parameter_kernel, min_parameter_u, rebase, witness_geodesic, BoundaryFamily, ExtReal,
    GeodesicCertificate, GeodesicKind, KappaEvaluator, Locator, MartinInstance, MpVector, PointSet, WitnessConfig,
};
use serde_json::{json, Value};

use crate::input::{instance, labels, read_json, vector};
use crate::{Outcome, RunConfig};

#[derive(Subcommand, Debug)]
pub enum GeodesicCommand {
    /// Least almost-geodesic parameter of a path.
    Certify(CertifyArgs),
    /// Transports a kernel parameter to another basepoint.
    Rebase(RebaseArgs),
    /// Builds a `u`-relative almost-geodesic from a state.
    Witness(WitnessArgs),
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    pub kernel: PathBuf,
    /// Comma-separated state labels.
    #[arg(long)]
    pub path: String,
    /// Certify relative to this vector instead of the kernel.
    #[arg(long)]
    pub u: Option<PathBuf>,
    /// Boundary family used to name the limit point.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Required bound on the parameter.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub basepoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct RebaseArgs {
    pub kernel: PathBuf,
    #[arg(long)]
    pub path: String,
    /// New basepoint.
    #[arg(long)]
    pub to: String,
    /// Parameter to transport; the least one at the current basepoint when absent.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub basepoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    pub kernel: PathBuf,
    pub u: PathBuf,
    /// Starting state.
    #[arg(long)]
    pub j0: String,
    #[arg(long, default_value_t = 0.5)]
    pub delta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long)]
    pub basepoint: Option<String>,
}

pub fn run(cmd: &GeodesicCommand, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        GeodesicCommand::Certify(a) => certify(a, cfg),
        GeodesicCommand::Rebase(a) => rebase_cmd(a, cfg),
        GeodesicCommand::Witness(a) => witness(a, cfg),
    }
}

fn points(inst: &MartinInstance, family: Option<&PathBuf>) -> Result<PointSet> {
    Ok(match family {
        Some(path) => read_json::<BoundaryFamily>(path)?.resolve(inst)?,
        None => finite_martin_space(inst),
    })
}

/// The point a path ending at `state` approaches: the isolated point
/// witnessed by `state`, or the limit point whose sequence ends there.
fn target(set: &PointSet, state: usize) -> Option<usize> {
    set.points().iter().position(|p| match &p.locator {
        Locator::Witnesses(w) => w.contains(&state),
        Locator::Sequence(s) => s.last() == Some(&state),
    })
}

/// `(target name, lemma gap)` for a `u`-relative path.
fn limit_checks(inst: &MartinInstance, u: &MpVector, set: &PointSet, path: &[usize]) -> Result<(Value, Value)> {
    let Some(xi) = target(set, *path.last().unwrap()) else {
        return Ok((Value::Null, Value::Null));
    };
    let eval = KappaEvaluator::new(inst, u, set)?;
    let gap = match lemma_b_gap(&eval, path[0], xi) {
        Ok(g) => json!(g),
        Err(GeodesicError::OffWindow) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok((json!(set.point(xi).name), gap))
}

fn certificate_json(cert: &GeodesicCertificate, checks: Value) -> Value {
    let mut v = json!(cert);
    v["checks"] = checks;
    v
}

fn certify(args: &CertifyArgs, cfg: &RunConfig) -> Result<Outcome> {
    let inst = instance(&args.kernel, args.basepoint.as_deref(), cfg.tol)?;
    let path = labels(&args.path, inst.states())?;
    let tol = cfg.tol;
    let u = args.u.as_ref().map(|p| vector(p, inst.states())).transpose()?;
    let param = |p: &[usize]| match &u {
        Some(u) => min_parameter_u(inst.a(), u, p),
        None => min_parameter_kernel(&inst, p),
    };
    let beta = match param(&path) {
        Ok(b) => b,
        Err(e @ (GeodesicError::BrokenPath { .. } | GeodesicError::Unreachable { .. } | GeodesicError::Unbounded { .. })) => {
            return Ok(Outcome { report: json!({"path": args.path.split(',').collect::<Vec<_>>(), "error": e.to_string()}), pass: false });
        }
        Err(e) => return Err(e.into()),
    };
    let mut prefix_ok = true;
    for k in 1..=path.len() {
        let b = param(&path[..k])?;
        prefix_ok &= b.residual(beta) <= tol;
    }
    let (kind, reference) = match &args.u {
        Some(p) => (GeodesicKind::URelative, p.display().to_string()),
        None => (GeodesicKind::Kernel, inst.states().label(inst.basepoint()).to_string()),
    };
    let cert = GeodesicCertificate::new(inst.states(), &path, kind, beta, &reference);
    let (target_point, gap) = match &u {
        Some(u) => limit_checks(&inst, u, &points(&inst, args.family.as_ref())?, &path)?,
        None => (Value::Null, Value::Null),
    };
    let within = args.delta.map(|d| beta.value() <= d + tol);
    let pass = beta.is_finite() && prefix_ok && within.unwrap_or(true);
    let checks = json!({"prefix_ok": prefix_ok, "target_point": target_point, "gap": gap, "within_delta": within});
    Ok(Outcome { report: certificate_json(&cert, checks), pass })
}

fn rebase_cmd(args: &RebaseArgs, cfg: &RunConfig) -> Result<Outcome> {
    let inst = instance(&args.kernel, args.basepoint.as_deref(), cfg.tol)?;
    let path = labels(&args.path, inst.states())?;
    let to = inst.states().resolve(&args.to)?;
    let least = min_parameter_kernel(&inst, &path)?;
    let beta = match args.beta {
        Some(b) => ExtReal::from_f64(b)?,
        None => least,
    };
    let transported = rebase(&inst, &path, beta, to)?;
    let recomputed = min_parameter_at(inst.a(), inst.a_star(), to, &path)?;
    let bound_ok = beta.residual(least) >= -cfg.tol && transported.residual(recomputed) >= -cfg.tol;
    Ok(Outcome {
        report: json!({
            "path": path.iter().map(|&s| inst.states().label(s)).collect::<Vec<_>>(),
            "basepoint": inst.states().label(inst.basepoint()),
            "new_basepoint": args.to,
            "beta": beta,
            "least_beta": least,
            "transported": transported,
            "recomputed": recomputed,
            "bound_ok": bound_ok,
        }),
        pass: bound_ok,
    })
}

fn witness(args: &WitnessArgs, cfg: &RunConfig) -> Result<Outcome> {
    let inst = instance(&args.kernel, args.basepoint.as_deref(), cfg.tol)?;
    let u = vector(&args.u, inst.states())?;
    let wc = WitnessConfig {
        j0: inst.states().resolve(&args.j0)?,
        delta0: args.delta0,
        eps0: args.eps0,
        horizon: cfg.horizon,
        visit_order: None,
    };
    let (w, exhausted) = match witness_geodesic(&inst, &u, &wc) {
        Ok(w) => (w, false),
        Err(GeodesicError::HorizonExhausted(w)) => (*w, true),
        Err(GeodesicError::NotHarmonic(r)) => {
            return Ok(Outcome {
                report: json!({"error": "not harmonic", "harmonic": crate::output::residuals(inst.states(), &r)}),
                pass: false,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let set = points(&inst, args.family.as_ref())?;
    let (target_point, gap) = limit_checks(&inst, &u, &set, &w.path)?;
    let gap_ok = gap.as_f64().map(|g| g <= args.delta0 + cfg.tol);
    let guarantee = w.guarantee_holds();
    let st = inst.states();
    let mut report = certificate_json(
        &w.certificate(st, &args.u.display().to_string()),
        json!({"guarantee": guarantee, "target_point": target_point, "gap": gap, "gap_ok": gap_ok}),
    );
    report["targets"] = json!(w.targets.iter().map(|&s| st.label(s)).collect::<Vec<_>>());
    report["epsilons"] = json!(w.epsilons);
    report["deltas"] = json!(w.deltas);
    report["delta0"] = json!(w.delta0);
    report["horizon_exhausted"] = json!(exhausted);
    Ok(Outcome { report, pass: guarantee && gap_ok.unwrap_or(true) })
}
