use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use maxplus_core::io::{to_stable_json, vector_to_file, HorofamilyFile, KernelFile};
use maxplus_core::{example1, example2, horofunction_limit, metric_template, MartinCorpus};
use serde::Serialize;
use serde_json::json;

use crate::input::GraphFile;
use crate::{Outcome, RunConfig};

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    /// Writes a built-in instance as input files.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// `example1 [X Y N]`, `example2 [J]`, or a metric template
    /// (`half_line`, `z_line`, `grid`, `star_tree`, `comb`) with its size.
    pub name: String,
    pub params: Vec<usize>,
    /// Directory receiving the files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(cmd: &CorpusCommand, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        CorpusCommand::Export(a) => export(a, cfg),
    }
}

fn write<T: Serialize>(dir: &Path, name: &str, value: &T, written: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, to_stable_json(value)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    written.push(path.display().to_string());
    Ok(())
}

fn params<const K: usize>(name: &str, given: &[usize], defaults: [usize; K]) -> Result<[usize; K]> {
    match given.len() {
        0 => Ok(defaults),
        n if n == K => Ok(given.try_into().unwrap()),
        n => bail!("{name} takes {K} parameters, got {n}"),
    }
}

fn martin_files(c: &MartinCorpus, dir: &Path, written: &mut Vec<String>) -> Result<()> {
    let st = c.inst.states();
    let mut kernel = KernelFile::from_kernel(c.inst.a());
    kernel.basepoint = Some(st.label(c.inst.basepoint()).to_string());
    kernel.edge_states = (0..c.inst.n()).filter(|&s| c.inst.edge()[s]).map(|s| st.label(s).to_string()).collect();
    write(dir, "kernel.json", &kernel, written)?;
    write(dir, "u.json", &vector_to_file(st, &c.u), written)?;
    write(dir, "family.json", &c.family, written)
}

fn export(args: &ExportArgs, cfg: &RunConfig) -> Result<Outcome> {
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let dir = args.out_dir.as_path();
    let mut written = Vec::new();
    match args.name.as_str() {
        "example1" => {
            let [x, y, n] = params("example1", &args.params, [40, 40, 25])?;
            martin_files(&example1(x, y, n, cfg.tol)?, dir, &mut written)?;
        }
        "example2" => {
            let [j] = params("example2", &args.params, [100])?;
            martin_files(&example2(j, cfg.tol)?, dir, &mut written)?;
        }
        name => {
            let [size] = params(name, &args.params, [20])?;
            let t = metric_template(name, size)?;
            let st = t.metric.states();
            let graph = GraphFile {
                graph: t.graph.clone(),
                basepoint: Some(st.label(t.metric.basepoint()).to_string()),
                truncated: (0..t.metric.n())
                    .filter(|&s| t.metric.truncated()[s])
                    .map(|s| st.label(s).to_string())
                    .collect(),
            };
            write(dir, "graph.json", &graph, &mut written)?;
            let family = t
                .rays
                .iter()
                .map(|r| horofunction_limit(&t.metric, &r.name, &t.window, &r.states, cfg.tol))
                .collect::<Result<Vec<_>, _>>()?;
            write(dir, "family.json", &HorofamilyFile::from_windows(&t.metric, &family), &mut written)?;
        }
    }
    Ok(Outcome { report: json!({"name": args.name, "files": written}), pass: true })
}
