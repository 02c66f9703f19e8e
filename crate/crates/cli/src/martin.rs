use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use maxplus_core::io::{KernelFile, VectorFile};
use maxplus_core::{
    finite_martin_space, h_flat, kleene_plus, kleene_star, minimal_martin_space, mu_min, represents,
    BoundaryFamily, ExtReal, MartinInstance, Measure, MeasureDomain, MeasureError, MpVector, PointSet,
    SemiringError,
};
use serde_json::{json, Map, Value};

use crate::input::{instance, read_json, vector};
use crate::output::residuals;
use crate::{Outcome, RunConfig};

#[derive(Args, Debug)]
pub struct StarArgs {
    /// Kernel file.
    pub kernel: PathBuf,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    pub kernel: PathBuf,
    /// Overrides the basepoint of the kernel file.
    #[arg(long)]
    pub basepoint: Option<String>,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Boundary family file; the finite Martin space when absent.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub space: FamilyArgs,
    /// Vector file for `u`.
    pub u: PathBuf,
}

#[derive(Args, Debug)]
pub struct RepresentArgs {
    #[command(flatten)]
    pub space: FamilyArgs,
    pub u: PathBuf,
    /// Measure file: point name to density, absent points at `-inf`.
    pub measure: PathBuf,
}

fn entries(k: &maxplus_core::Kernel) -> Value {
    json!(KernelFile::from_kernel(k).entries)
}

pub fn star(args: &StarArgs, _cfg: &RunConfig) -> Result<Outcome> {
    let file: KernelFile = read_json(&args.kernel)?;
    let a = file.to_kernel()?;
    match (kleene_star(&a), kleene_plus(&a)) {
        (Ok(star), Ok(plus)) => Ok(Outcome {
            report: json!({
                "states": a.states().labels(),
                "a_star": entries(&star),
                "a_plus": entries(&plus),
                "convergent": true,
            }),
            pass: true,
        }),
        (Err(SemiringError::DivergentStar { cycle, weight }), _) | (_, Err(SemiringError::DivergentStar { cycle, weight })) => {
            Ok(Outcome {
                report: json!({
                    "states": a.states().labels(),
                    "convergent": false,
                    "divergent": {"cycle": cycle, "weight": weight},
                }),
                pass: false,
            })
        }
        (Err(e), _) | (_, Err(e)) => Err(e.into()),
    }
}

pub fn martin(args: &KernelArgs, cfg: &RunConfig) -> Result<Outcome> {
    let inst = instance(&args.kernel, args.basepoint.as_deref(), cfg.tol)?;
    Ok(Outcome {
        report: json!({
            "states": inst.states().labels(),
            "basepoint": inst.states().label(inst.basepoint()),
            "martin_kernel": entries(inst.martin_kernel()),
        }),
        pass: true,
    })
}

struct Space {
    inst: MartinInstance,
    family: Option<BoundaryFamily>,
    points: PointSet,
    domain: MeasureDomain,
}

fn space(args: &FamilyArgs, cfg: &RunConfig) -> Result<Space> {
    let inst = instance(&args.kernel.kernel, args.kernel.basepoint.as_deref(), cfg.tol)?;
    let (family, points, domain) = match &args.family {
        Some(path) => {
            let family: BoundaryFamily = read_json(path)?;
            let points = family.resolve(&inst)?;
            (Some(family), points, MeasureDomain::BoundaryFamily)
        }
        None => {
            let points = finite_martin_space(&inst);
            (None, points, MeasureDomain::FiniteMartinSpace)
        }
    };
    Ok(Space { inst, family, points, domain })
}

impl Space {
    /// The point set and `u` on the states where representation is judged.
    fn representation(&self, u: &MpVector) -> Result<(PointSet, MpVector)> {
        let on = match &self.family {
            Some(f) if !f.represent_on.is_empty() => f
                .represent_on
                .iter()
                .map(|l| self.inst.states().resolve(l))
                .collect::<Result<Vec<_>, _>>()?,
            _ => self.points.window().to_vec(),
        };
        let sub = self.points.sub_window(&on);
        Ok((sub, u.restrict(&on)))
    }

    fn verdict(&self, sub: &PointSet, mu: &Measure, u: &MpVector, tol: f64) -> Result<Value> {
        match represents(sub, mu, u, tol) {
            Ok(r) => Ok(residuals(self.inst.states(), &r.excluding(self.inst.edge()))),
            Err(maxplus_core::harmonic::HarmonicError::EmptySupport) => {
                Ok(json!({"holds": false, "error": "empty support"}))
            }
            Err(e) => Err(e.into()),
        }
    }
}

pub fn minimal_space(args: &FamilyArgs, cfg: &RunConfig) -> Result<Outcome> {
    let s = space(args, cfg)?;
    let minimal = minimal_martin_space(&s.inst, &s.points)?;
    let mut points = Map::new();
    for (p, pt) in s.points.points().iter().enumerate() {
        let diag = h_flat(&s.inst, &s.points, p, p)?;
        points.insert(pt.name.clone(), json!({"h_flat": diag, "minimal": minimal[p]}));
    }
    Ok(Outcome { report: json!({"points": points}), pass: true })
}

pub fn measures(args: &MeasuresArgs, cfg: &RunConfig) -> Result<Outcome> {
    let s = space(&args.space, cfg)?;
    let u = vector(&args.u, s.inst.states())?;
    let mm = match mu_min(&s.inst, &u, &s.points, s.domain) {
        Ok(mm) => mm,
        Err(MeasureError::NotSuperharmonic(r)) => {
            return Ok(Outcome {
                report: json!({"error": "not superharmonic", "superharmonic": residuals(s.inst.states(), &r)}),
                pass: false,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut points = Map::new();
    for (p, pt) in s.points.points().iter().enumerate() {
        let name = pt.name.as_str();
        let dominators: Vec<&str> = mm.order.dominators(p).iter().map(|&q| mm.order.name(q)).collect();
        points.insert(
            name.to_string(),
            json!({
                "mumax": mm.mumax.get(name),
                "m_u": mm.m_u.get(name),
                "mumin": mm.mumin.get(name),
                "maximal": mm.order.is_maximal(p),
                "minimal": mm.minimal[p],
                "dominators": dominators,
            }),
        );
    }
    let (sub, u_on) = s.representation(&u)?;
    let by_max = s.verdict(&sub, &mm.mumax, &u_on, cfg.tol)?;
    let by_min = s.verdict(&sub, &mm.mumin, &u_on, cfg.tol)?;
    let pass = by_max["holds"] == json!(true) && by_min["holds"] == json!(true);
    let mut report = json!({
        "points": points,
        "harmonic": mm.harmonic,
        "represents": {"mumax": by_max, "mumin": by_min},
    });
    if let Some(r) = &mm.restricted {
        report["restricted"] = json!(r.density);
    }
    Ok(Outcome { report, pass })
}

pub fn represent(args: &RepresentArgs, cfg: &RunConfig) -> Result<Outcome> {
    let s = space(&args.space, cfg)?;
    let u = vector(&args.u, s.inst.states())?;
    let file: VectorFile = read_json(&args.measure)?;
    let known: BTreeMap<&str, ()> = s.points.names().map(|n| (n, ())).collect();
    if let Some(unknown) = file.keys().find(|k| !known.contains_key(k.as_str())) {
        bail!("unknown point `{unknown}` in {}", args.measure.display());
    }
    let values: Vec<ExtReal> = s
        .points
        .names()
        .map(|n| file.get(n).copied().unwrap_or(ExtReal::NEG_INF))
        .collect();
    let mu = Measure::from_values(s.domain, &s.points, &values);
    let (sub, u_on) = s.representation(&u)?;
    let verdict = s.verdict(&sub, &mu, &u_on, cfg.tol)?;
    let pass = verdict["holds"] == json!(true);
    Ok(Outcome { report: json!({"represents": verdict}), pass })
}
