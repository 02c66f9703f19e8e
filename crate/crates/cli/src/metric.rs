use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use maxplus_core::io::{nu_from_file, nu_to_file, HorofamilyFile, JsonReal, VectorFile};
use maxplus_core::{
    greatest_nu, horofunction_limit, inf_representation_check, is_distance_like, rieffel_check, ExtReal,
    HorofunctionWindow, MetricError, MetricInstance, MpVector,
};
use serde_json::{json, Value};
use std::collections::BTreeMap;

use crate::input::{labels, metric, read_json, reals};
use crate::output::residuals;
use crate::{Outcome, RunConfig};

#[derive(Subcommand, Debug)]
pub enum MetricCommand {
    /// Checks the level-set identity of a function on a window.
    DistanceLike(DistanceLikeArgs),
    /// Horofunctions along sequences, as a family file.
    Horolimit(HorolimitArgs),
    /// Rieffel almost-geodesic test of a sampled path.
    Rieffel(RieffelArgs),
    /// Checks `f = min_h h + ν(h)` on the family window.
    Represent(MetricRepresentArgs),
    /// The greatest `ν` representing `f` over a family.
    GreatestNu(GreatestNuArgs),
}

#[derive(Args, Debug)]
pub struct GraphArg {
    /// Graph file.
    pub graph: PathBuf,
    #[arg(long)]
    pub basepoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct DistanceLikeArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    /// Function file; its labels form the window.
    pub f: PathBuf,
    /// Comma-separated levels; the values of `f` when absent.
    #[arg(long)]
    pub t_grid: Option<String>,
}

#[derive(Args, Debug)]
pub struct HorolimitArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    /// `NAME=a,b,c`: a named sequence of states; repeatable.
    #[arg(long = "ray", required = true)]
    pub rays: Vec<String>,
    /// Comma-separated window; all states when absent.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Args, Debug)]
pub struct RieffelArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long)]
    pub path: String,
    /// Sample times; `0, 1, 2, ...` when absent.
    #[arg(long)]
    pub times: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct MetricRepresentArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    pub f: PathBuf,
    /// Horofunction family file.
    pub family: PathBuf,
    /// `ν` file: point name to value, `"+inf"` allowed.
    pub nu: PathBuf,
}

#[derive(Args, Debug)]
pub struct GreatestNuArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    /// Function file covering every state.
    pub f: PathBuf,
    pub family: PathBuf,
}

pub fn run(cmd: &MetricCommand, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        MetricCommand::DistanceLike(a) => distance_like(a, cfg),
        MetricCommand::Horolimit(a) => horolimit(a, cfg),
        MetricCommand::Rieffel(a) => rieffel(a, cfg),
        MetricCommand::Represent(a) => represent(a, cfg),
        MetricCommand::GreatestNu(a) => greatest(a, cfg),
    }
}

/// Graph windows are geodesic only up to discretization.
const SURROGATE: &str = "discrete surrogate: graph metrics are geodesic only at vertices";

fn load(g: &GraphArg, cfg: &RunConfig) -> Result<MetricInstance> {
    metric(&g.graph, g.basepoint.as_deref(), cfg.tol)
}

/// Finite function values keyed by label, in state order.
fn function(path: &Path, m: &MetricInstance) -> Result<(Vec<usize>, Vec<f64>)> {
    let file: VectorFile = read_json(path)?;
    let mut pairs = Vec::with_capacity(file.len());
    for (l, v) in &file {
        if !v.is_finite() {
            bail!("`{l}` is not finite in {}", path.display());
        }
        pairs.push((m.states().resolve(l)?, v.value()));
    }
    pairs.sort_by_key(|p| p.0);
    Ok(pairs.into_iter().unzip())
}

fn on(m: &MetricInstance, window: &[usize], f: &(Vec<usize>, Vec<f64>)) -> Result<MpVector> {
    window
        .iter()
        .map(|&x| match f.0.binary_search(&x) {
            Ok(k) => Ok(ExtReal::real(f.1[k])),
            Err(_) => bail!("function has no value at `{}`", m.states().label(x)),
        })
        .collect()
}

fn distance_like(args: &DistanceLikeArgs, cfg: &RunConfig) -> Result<Outcome> {
    let m = load(&args.graph, cfg)?;
    let (window, f) = function(&args.f, &m)?;
    let grid = args.t_grid.as_deref().map(reals).transpose()?;
    let r = is_distance_like(&m, &window, &f, grid.as_deref(), cfg.window_margin as f64, cfg.tol)?;
    let st = m.states();
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| json!({"x": st.label(v.x), "t": v.t, "expected": v.expected, "found": v.found}))
        .collect();
    Ok(Outcome {
        report: json!({
            "distance_like": r.holds(),
            "checked": r.checked,
            "near_boundary": r.near_boundary,
            "empty_level_sets": r.empty_level_sets,
            "violations": violations,
            "caveat": SURROGATE,
        }),
        pass: r.holds(),
    })
}

fn horolimit(args: &HorolimitArgs, cfg: &RunConfig) -> Result<Outcome> {
    let m = load(&args.graph, cfg)?;
    let window = match &args.window {
        Some(w) => labels(w, m.states())?,
        None => (0..m.n()).collect(),
    };
    let mut family = Vec::new();
    for spec in &args.rays {
        let (name, seq) = spec.split_once('=').with_context(|| format!("expected NAME=a,b,c, got `{spec}`"))?;
        let seq = labels(seq, m.states())?;
        family.push(horofunction_limit(&m, name, &window, &seq, cfg.tol)?);
    }
    let excess: BTreeMap<&str, f64> = family.iter().map(|h| (h.name.as_str(), h.lipschitz_excess(&m))).collect();
    let pass = excess.values().all(|&e| e <= cfg.tol);
    let mut report = json!(HorofamilyFile::from_windows(&m, &family));
    report["lipschitz_excess"] = json!(excess);
    Ok(Outcome { report, pass })
}

fn rieffel(args: &RieffelArgs, cfg: &RunConfig) -> Result<Outcome> {
    let m = load(&args.graph, cfg)?;
    let path = labels(&args.path, m.states())?;
    let times = args.times.as_deref().map(reals).transpose()?;
    if let Some(t) = &times {
        if t.len() != path.len() {
            bail!("{} times for {} samples", t.len(), path.len());
        }
    }
    let r = rieffel_check(&m, &path, times.as_deref(), args.eps);
    let report = json!({
        "threshold": r.threshold,
        "worst": JsonReal(r.worst),
        "eps": r.eps,
        "passes": r.passes,
    });
    Ok(Outcome { report, pass: r.passes })
}

fn family(path: &Path, m: &MetricInstance) -> Result<Vec<HorofunctionWindow>> {
    let file: HorofamilyFile = read_json(path)?;
    let fam = file.resolve(m)?;
    if fam.is_empty() {
        bail!("{} has no points", path.display());
    }
    Ok(fam)
}

fn represent(args: &MetricRepresentArgs, cfg: &RunConfig) -> Result<Outcome> {
    let m = load(&args.graph, cfg)?;
    let fam = family(&args.family, &m)?;
    let f = on(&m, &fam[0].window, &function(&args.f, &m)?)?;
    let nu = nu_from_file(&read_json::<BTreeMap<String, JsonReal>>(&args.nu)?);
    match inf_representation_check(&f, &fam, &nu, cfg.tol) {
        Ok(r) => {
            let pass = r.holds();
            Ok(Outcome { report: json!({"represents": residuals(m.states(), &r), "caveat": SURROGATE}), pass })
        }
        Err(MetricError::EmptySupport) => {
            Ok(Outcome { report: json!({"represents": {"holds": false, "error": "empty support"}}), pass: false })
        }
        Err(e) => Err(e.into()),
    }
}

fn greatest(args: &GreatestNuArgs, cfg: &RunConfig) -> Result<Outcome> {
    let m = load(&args.graph, cfg)?;
    let fam = family(&args.family, &m)?;
    let values = function(&args.f, &m)?;
    let everywhere: Vec<usize> = (0..m.n()).collect();
    let f_all = on(&m, &everywhere, &values)?;
    let nu = greatest_nu(&m, &f_all, &fam, Vec::new(), cfg.tol)?;
    let f_window = f_all.restrict(&fam[0].window);
    let check = match inf_representation_check(&f_window, &fam, &nu, cfg.tol) {
        Ok(r) => residuals(m.states(), &r),
        Err(MetricError::EmptySupport) => json!({"holds": false, "error": "empty support"}),
        Err(e) => return Err(e.into()),
    };
    let pass = check["holds"] == json!(true);
    Ok(Outcome { report: json!({"nu": nu_to_file(&nu), "represents": check, "caveat": SURROGATE}), pass })
}
