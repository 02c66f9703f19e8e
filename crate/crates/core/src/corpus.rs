//! Generators for the two worked boundary examples and for metric
//! templates, each truncated to a finite window, with closed forms.

use std::sync::Arc;

use thiserror::Error;

use crate::kernels::{AccumulationSpec, BoundaryFamily, KernelError, MartinInstance, PointSet};
use crate::metric::{graph_metric, MetricError, MetricInstance, WeightedGraph};
use crate::semiring::{ExtReal, Kernel, MpVector, StateSpace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("unknown template `{0}` (expected half_line, z_line, grid, star_tree or comb)")]
    UnknownTemplate(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A kernel instance with a vector and a boundary family on a window.
#[derive(Debug)]
pub struct MartinCorpus {
    pub name: String,
    pub inst: MartinInstance,
    pub u: MpVector,
    pub family: BoundaryFamily,
    pub points: PointSet,
    /// States on which the family is expected to represent `u`.
    pub representation_window: Vec<usize>,
}

fn delta(a: i64, b: i64) -> i64 {
    (a == b) as i64
}

/// `a^n(x, y)` of the comb example.
pub fn comb_a(n: i64, x: i64, y: i64) -> f64 {
    (-(x - n).abs() + (2 * delta(x, n) - 1) * (y - 1).abs() - 2 * delta(x, n) * delta(y, 0) + n + 1) as f64
}

/// `b^0(x, y) = x - y`.
pub fn comb_b0(x: i64, y: i64) -> f64 {
    (x - y) as f64
}

/// `b^1(x, y) = x - |y - 1| + 1`.
pub fn comb_b1(x: i64, y: i64) -> f64 {
    (x - (y - 1).abs() + 1) as f64
}

/// The superharmonic vector of the comb example.
pub fn comb_u(x: i64, y: i64) -> f64 {
    if y <= 1 {
        (x - y) as f64
    } else {
        (x + y - 4) as f64
    }
}

fn grid_label(x: i64, y: i64) -> String {
    format!("{x},{y}")
}

/// Parses a `"x,y"` label.
pub fn parse_grid_label(l: &str) -> Option<(i64, i64)> {
    let (x, y) = l.split_once(',')?;
    Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
}

/// Comb of unit steps on `{0..=X} x {0..=Y}`: vertical moves everywhere,
/// horizontal moves on rows 0 and 1. Basepoint `(0, 0)`. The family holds
/// `a^0..a^N`, `b^0`, `b^1`; the `a^n` accumulate at `b^1`.
pub fn example1(x_max: usize, y_max: usize, n_max: usize, tol: f64) -> Result<MartinCorpus, CorpusError> {
    if x_max < n_max + 2 || y_max < 3 {
        return Err(CorpusError::InvalidParameters(format!(
            "need X >= N + 2 and Y >= 3, got X={x_max}, Y={y_max}, N={n_max}"
        )));
    }
    let (xm, ym, nm) = (x_max as i64, y_max as i64, n_max as i64);
    let coords: Vec<(i64, i64)> = (0..=xm).flat_map(|x| (0..=ym).map(move |y| (x, y))).collect();
    let states = Arc::new(
        StateSpace::new(coords.iter().map(|&(x, y)| grid_label(x, y))).expect("labels are distinct"),
    );
    let idx = |x: i64, y: i64| (x * (ym + 1) + y) as usize;
    let mut a = Kernel::empty(states.clone());
    for &(x, y) in &coords {
        let mut link = |w: i64, z: i64| {
            if (0..=xm).contains(&w) && (0..=ym).contains(&z) {
                a.set(idx(x, y), idx(w, z), ExtReal::real(-1.0));
            }
        };
        link(x, y + 1);
        link(x, y - 1);
        if y <= 1 {
            link(x + 1, y);
            link(x - 1, y);
        }
    }
    let edge = coords.iter().map(|&(x, y)| x == xm || y == ym).collect();
    let inst = MartinInstance::new(a, "0,0", tol)?.with_edge_states(edge);
    let u: MpVector = coords.iter().map(|&(x, y)| ExtReal::real(comb_u(x, y))).collect();

    let tabulate = |f: &dyn Fn(i64, i64) -> f64| coords.iter().map(|&(x, y)| ExtReal::real(f(x, y))).collect();
    let mut family = BoundaryFamily {
        window: states.labels().to_vec(),
        points: Default::default(),
        rep_sequences: Default::default(),
        accumulation: Vec::new(),
        tol: None,
        represent_on: coords.iter().filter(|&&(x, _)| x <= nm).map(|&(x, y)| grid_label(x, y)).collect(),
    };
    for n in 0..=nm {
        let name = format!("a{n}");
        family.points.insert(name.clone(), tabulate(&|x, y| comb_a(n, x, y)));
        family
            .rep_sequences
            .insert(name, (0..=ym).map(|y| grid_label(n, y)).collect());
    }
    family.points.insert("b0".into(), tabulate(&comb_b0));
    family.points.insert("b1".into(), tabulate(&comb_b1));
    family
        .rep_sequences
        .insert("b0".into(), (0..=xm).map(|x| grid_label(x, 0)).collect());
    family
        .rep_sequences
        .insert("b1".into(), (0..=xm).map(|x| grid_label(x, 1)).collect());
    family.accumulation.push(AccumulationSpec {
        sequence: (0..=nm).map(|n| format!("a{n}")).collect(),
        limit: "b1".into(),
    });
    let points = family.resolve(&inst)?;
    let representation_window = coords
        .iter()
        .filter(|&&(x, _)| x <= nm)
        .map(|&(x, y)| idx(x, y))
        .collect();
    Ok(MartinCorpus {
        name: "example1".into(),
        inst,
        u,
        family,
        points,
        representation_window,
    })
}

/// States `1..=J` and `inf` (the basepoint), with `A_ij = 1/i - 1/j` for
/// finite `j <= i` and `A_{1,inf} = -1`; `u = 0`. The family is every
/// Martin column, the finite ones accumulating at the column of `inf`.
pub fn example2(j_max: usize, tol: f64) -> Result<MartinCorpus, CorpusError> {
    if j_max < 3 {
        return Err(CorpusError::InvalidParameters(format!("need J >= 3, got {j_max}")));
    }
    let mut labels: Vec<String> = (1..=j_max).map(|j| j.to_string()).collect();
    labels.push("inf".into());
    let states = Arc::new(StateSpace::new(labels.iter().cloned()).expect("labels are distinct"));
    let inf = j_max;
    let recip = |i: usize| if i == inf { 0.0 } else { 1.0 / (i + 1) as f64 };
    let a = Kernel::from_fn(states.clone(), |i, j| {
        if j != inf && (i == inf || j <= i) {
            ExtReal::real(recip(i) - recip(j))
        } else if i == 0 && j == inf {
            ExtReal::real(-1.0)
        } else {
            ExtReal::NEG_INF
        }
    });
    // u is harmonic at inf only in the limit; the columns of the last three
    // states have not reached their limit at those coordinates
    let mut edge = vec![false; j_max + 1];
    for e in &mut edge[j_max - 3..] {
        *e = true;
    }
    let inst = MartinInstance::new(a, "inf", tol)?.with_edge_states(edge);
    let u = MpVector::constant(j_max + 1, ExtReal::ZERO);
    let family_tol = tol.max(4.0 / ((j_max - 2) * (j_max - 2)) as f64);
    let mut family = BoundaryFamily {
        window: labels.clone(),
        points: Default::default(),
        rep_sequences: Default::default(),
        accumulation: Vec::new(),
        tol: Some(family_tol),
        represent_on: Vec::new(),
    };
    for (j, l) in labels.iter().enumerate() {
        let name = format!("K[{l}]");
        family.points.insert(name.clone(), inst.martin_column(j).as_slice().to_vec());
        family.rep_sequences.insert(name, vec![l.clone()]);
    }
    family.accumulation.push(AccumulationSpec {
        sequence: labels[..j_max].iter().map(|l| format!("K[{l}]")).collect(),
        limit: "K[inf]".into(),
    });
    let points = family.resolve(&inst)?;
    Ok(MartinCorpus {
        name: "example2".into(),
        inst,
        u,
        family,
        points,
        representation_window: (0..=j_max).collect(),
    })
}

/// A geodesic ray of a template with its Busemann function on the window.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateRay {
    pub name: String,
    pub states: Vec<usize>,
    pub busemann: Vec<f64>,
}

/// A graph truncated at twice the window size, so that rays can run
/// past the window.
#[derive(Debug, Clone)]
pub struct MetricTemplate {
    pub name: String,
    pub graph: WeightedGraph,
    pub metric: MetricInstance,
    pub window: Vec<usize>,
    pub rays: Vec<TemplateRay>,
}

impl MetricTemplate {
    pub fn ray(&self, name: &str) -> Option<&TemplateRay> {
        self.rays.iter().find(|r| r.name == name)
    }
}

struct Builder {
    nodes: Vec<String>,
    edges: Vec<(String, String, f64)>,
    truncated: Vec<String>,
}

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new(), edges: Vec::new(), truncated: Vec::new() }
    }

    fn edge(&mut self, a: &str, b: &str) {
        self.edges.push((a.to_string(), b.to_string(), 1.0));
    }

    fn finish(
        self,
        name: &str,
        base: &str,
        window: &[String],
        rays: Vec<(String, Vec<String>, Vec<f64>)>,
    ) -> Result<MetricTemplate, CorpusError> {
        let graph = WeightedGraph { nodes: self.nodes, edges: self.edges };
        let m = graph_metric(&graph, base, 1e-9)?;
        let st = m.states();
        let mut cut = vec![false; st.len()];
        for l in &self.truncated {
            cut[st.index_of(l).unwrap()] = true;
        }
        let find = |l: &String| st.index_of(l).unwrap();
        let window = window.iter().map(find).collect();
        let rays = rays
            .into_iter()
            .map(|(name, seq, busemann)| TemplateRay { name, states: seq.iter().map(find).collect(), busemann })
            .collect();
        Ok(MetricTemplate {
            name: name.to_string(),
            graph,
            metric: m.with_truncated(cut),
            window,
            rays,
        })
    }
}

/// Half-line `0..=2N`, window `0..=N`; one ray with `h(x) = -x`.
pub fn half_line(n: usize) -> Result<MetricTemplate, CorpusError> {
    let n = n as i64;
    let mut b = Builder::new();
    b.nodes = (0..=2 * n).map(|x| x.to_string()).collect();
    for x in 1..=2 * n {
        b.edge(&(x - 1).to_string(), &x.to_string());
    }
    b.truncated.push((2 * n).to_string());
    let window: Vec<String> = (0..=n).map(|x| x.to_string()).collect();
    let ray = (0..=2 * n).map(|x| x.to_string()).collect();
    let h = (0..=n).map(|x| -x as f64).collect();
    b.finish("half_line", "0", &window, vec![("ray".into(), ray, h)])
}

/// Line `-2N..=2N`, window `-N..=N`; rays `plus` (`h = -x`) and `minus` (`h = x`).
pub fn z_line(n: usize) -> Result<MetricTemplate, CorpusError> {
    let n = n as i64;
    let mut b = Builder::new();
    b.nodes = (-2 * n..=2 * n).map(|x| x.to_string()).collect();
    for x in -2 * n + 1..=2 * n {
        b.edge(&(x - 1).to_string(), &x.to_string());
    }
    b.truncated.extend([(-2 * n).to_string(), (2 * n).to_string()]);
    let window: Vec<String> = (-n..=n).map(|x| x.to_string()).collect();
    let plus = (0..=2 * n).map(|x| x.to_string()).collect();
    let minus = (0..=2 * n).map(|x| (-x).to_string()).collect();
    let rays = vec![
        ("plus".into(), plus, (-n..=n).map(|x| -x as f64).collect()),
        ("minus".into(), minus, (-n..=n).map(|x| x as f64).collect()),
    ];
    b.finish("z_line", "0", &window, rays)
}

/// Star with `arms` arms of length `2N` around `c`, window depth `<= N`.
/// Arm `a` has nodes `a1, a2, ...`; its ray gives `h = -depth` on arm `a`
/// and `+depth` elsewhere.
pub fn star_tree(arms: usize, n: usize) -> Result<MetricTemplate, CorpusError> {
    if arms == 0 || arms > 26 {
        return Err(CorpusError::InvalidParameters(format!("arms must be in 1..=26, got {arms}")));
    }
    let letters: Vec<char> = (b'a'..b'a' + arms as u8).map(char::from).collect();
    let label = |arm: char, d: usize| if d == 0 { "c".to_string() } else { format!("{arm}{d}") };
    let mut b = Builder::new();
    b.nodes.push("c".into());
    let mut window = vec!["c".to_string()];
    for &arm in &letters {
        for d in 1..=2 * n {
            b.nodes.push(label(arm, d));
            b.edge(&label(arm, d - 1), &label(arm, d));
        }
        b.truncated.push(label(arm, 2 * n));
        window.extend((1..=n).map(|d| label(arm, d)));
    }
    let rays = letters
        .iter()
        .map(|&arm| {
            let seq = (0..=2 * n).map(|d| label(arm, d)).collect();
            let mut h = vec![0.0];
            for &other in &letters {
                let sign = if other == arm { -1.0 } else { 1.0 };
                h.extend((1..=n).map(|d| sign * d as f64));
            }
            (arm.to_string(), seq, h)
        })
        .collect();
    b.finish("star_tree", "c", &window, rays)
}

/// Quadrant grid `{0..=2N}^2`, window `{0..=N}^2`; rays along the two
/// axes and the diagonal staircase.
pub fn grid(n: usize) -> Result<MetricTemplate, CorpusError> {
    let n = n as i64;
    let mut b = Builder::new();
    for x in 0..=2 * n {
        for y in 0..=2 * n {
            b.nodes.push(grid_label(x, y));
            if x > 0 {
                b.edge(&grid_label(x - 1, y), &grid_label(x, y));
            }
            if y > 0 {
                b.edge(&grid_label(x, y - 1), &grid_label(x, y));
            }
            if x == 2 * n || y == 2 * n {
                b.truncated.push(grid_label(x, y));
            }
        }
    }
    let win: Vec<(i64, i64)> = (0..=n).flat_map(|x| (0..=n).map(move |y| (x, y))).collect();
    let window: Vec<String> = win.iter().map(|&(x, y)| grid_label(x, y)).collect();
    let on_window = |f: &dyn Fn(i64, i64) -> i64| win.iter().map(|&(x, y)| f(x, y) as f64).collect::<Vec<_>>();
    let mut stairs = vec![grid_label(0, 0)];
    for k in 1..=2 * n {
        stairs.push(grid_label(k, k - 1));
        stairs.push(grid_label(k, k));
    }
    let rays = vec![
        ("x_axis".into(), (0..=2 * n).map(|k| grid_label(k, 0)).collect(), on_window(&|x, y| y - x)),
        ("y_axis".into(), (0..=2 * n).map(|k| grid_label(0, k)).collect(), on_window(&|x, y| x - y)),
        ("diagonal".into(), stairs, on_window(&|x, y| -x - y)),
    ];
    b.finish("grid", "0,0", &window, rays)
}

/// The comb of [`example1`] as an undirected unit-length graph on
/// `{0..=2N}^2`, window `{0..=N}^2`. Column rays give `-a^n`, rows 0 and 1
/// give `-b^0` and `-b^1`.
pub fn comb(n: usize) -> Result<MetricTemplate, CorpusError> {
    let n = n as i64;
    let mut b = Builder::new();
    for x in 0..=2 * n {
        for y in 0..=2 * n {
            b.nodes.push(grid_label(x, y));
            if y > 0 {
                b.edge(&grid_label(x, y - 1), &grid_label(x, y));
            }
            if x > 0 && y <= 1 {
                b.edge(&grid_label(x - 1, y), &grid_label(x, y));
            }
            if x == 2 * n || y == 2 * n {
                b.truncated.push(grid_label(x, y));
            }
        }
    }
    let win: Vec<(i64, i64)> = (0..=n).flat_map(|x| (0..=n).map(move |y| (x, y))).collect();
    let window: Vec<String> = win.iter().map(|&(x, y)| grid_label(x, y)).collect();
    let on_window = |f: &dyn Fn(i64, i64) -> f64| win.iter().map(|&(x, y)| -f(x, y)).collect::<Vec<_>>();
    let mut rays: Vec<(String, Vec<String>, Vec<f64>)> = (0..=n)
        .map(|c| {
            let seq = (0..=2 * n).map(|y| grid_label(c, y)).collect();
            (format!("a{c}"), seq, on_window(&|x, y| comb_a(c, x, y)))
        })
        .collect();
    rays.push(("b0".into(), (0..=2 * n).map(|k| grid_label(k, 0)).collect(), on_window(&comb_b0)));
    rays.push(("b1".into(), (0..=2 * n).map(|k| grid_label(k, 1)).collect(), on_window(&comb_b1)));
    b.finish("comb", "0,0", &window, rays)
}

/// Template by name; `star_tree` uses three arms.
pub fn metric_template(name: &str, size: usize) -> Result<MetricTemplate, CorpusError> {
    if size < 2 {
        return Err(CorpusError::InvalidParameters(format!("size must be >= 2, got {size}")));
    }
    match name {
        "half_line" => half_line(size),
        "z_line" => z_line(size),
        "grid" => grid(size),
        "star_tree" => star_tree(3, size),
        "comb" => comb(size),
        other => Err(CorpusError::UnknownTemplate(other.to_string())),
    }
}
