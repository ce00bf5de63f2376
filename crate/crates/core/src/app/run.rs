//! Configured runs and gamma1 sweeps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{time_index, RunConfig};
use super::sim::Simulation;
use crate::diagnostics::{
    applicable_laws, cl_residual_field, delta_eps_field, relative_energy_error, ConservationLawId, DELTA_EPS_FORM,
};
use crate::error::{Error, Result};
use crate::par;
use crate::params::SchemeKind;
use crate::state::StateWindow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scheme: SchemeKind,
    pub m_count: usize,
    pub steps: usize,
    pub h0: f64,
    /// `(t_n, e_R(n))` for `n = 0..=steps`.
    pub e_r: Vec<(f64, f64)>,
    /// Largest scaled residual of each law over all steps and enforced nodes.
    pub max_law_residual: Vec<(String, f64)>,
    pub max_delta_eps: Option<f64>,
    pub max_iterations: usize,
    /// Largest `|u|` on the last output layer.
    pub max_speed: f64,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn max_residual(&self, label: &str) -> Option<f64> {
        self.max_law_residual.iter().find(|(l, _)| l == label).map(|&(_, v)| v)
    }

    pub fn final_e_r(&self) -> f64 {
        self.e_r.last().map_or(0.0, |&(_, e)| e)
    }
}

/// Columns shared by snapshot rows; the law set depends on the bottom only.
struct Columns {
    laws: Vec<ConservationLawId>,
    delta_eps: bool,
}

impl Columns {
    fn header(&self) -> String {
        let mut h = String::from("t,m,s,x,u,rho");
        for id in &self.laws {
            h.push(',');
            h.push_str(&id.label());
        }
        if self.delta_eps {
            h.push_str(",delta_eps");
        }
        h.push_str(",H,e_R");
        h
    }
}

/// Residual fields at the solver's enforced nodes `2..M-2`.
struct Fields {
    laws: Vec<Vec<f64>>,
    delta_eps: Option<Vec<f64>>,
}

const FIRST: usize = 2;

fn metadata(out: &mut impl Write, cfg: &RunConfig) -> std::io::Result<()> {
    writeln!(out, "# mswe {}", env!("CARGO_PKG_VERSION"))?;
    for line in cfg.to_toml().lines().filter(|l| !l.trim().is_empty()) {
        writeln!(out, "# {line}")?;
    }
    if cfg.scheme == SchemeKind::Naive {
        writeln!(out, "# delta_eps = {DELTA_EPS_FORM}")?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    out: &mut impl Write,
    sim: &Simulation,
    n: usize,
    x: &[f64],
    x_next: &[f64],
    fields: Option<&Fields>,
    h_n: f64,
    e_r: f64,
    stride: usize,
) -> std::io::Result<()> {
    let mesh = &sim.mesh;
    let xp = sim.physical_positions(x, n);
    let xq = sim.physical_positions(x_next, n + 1);
    let t = mesh.t(n);
    for m in (0..mesh.m_count).step_by(stride) {
        let u = (xq[m] - xp[m]) / mesh.tau;
        let rho = if m + 1 < mesh.m_count { Some(mesh.h / (x[m + 1] - x[m])) } else { None };
        write!(out, "{t},{m},{},{:.15e},{u:e},{}", mesh.s(m), xp[m], fmt_opt(rho))?;
        let at = |f: &Vec<f64>| if m >= FIRST && m - FIRST < f.len() { Some(f[m - FIRST]) } else { None };
        if let Some(f) = fields {
            for law in &f.laws {
                write!(out, ",{}", fmt_opt(at(law)))?;
            }
            if let Some(d) = &f.delta_eps {
                write!(out, ",{}", fmt_opt(at(d)))?;
            }
        } else {
            let blanks = sim_columns(sim).laws.len() + usize::from(sim.scheme == SchemeKind::Naive);
            write!(out, "{}", ",".repeat(blanks))?;
        }
        writeln!(out, ",{h_n:e},{e_r:e}")?;
    }
    Ok(())
}

fn sim_columns(sim: &Simulation) -> Columns {
    Columns { laws: applicable_laws(sim.bottom()), delta_eps: sim.scheme == SchemeKind::Naive }
}

fn fields_for(sim: &Simulation, cols: &Columns, w: &StateWindow) -> Result<Fields> {
    let nodes = FIRST..sim.mesh.m_count - 2;
    let laws = cols
        .laws
        .iter()
        .map(|&id| cl_residual_field(id, w, &sim.mesh, &sim.spec.params, sim.bottom(), sim.scheme, nodes.clone()))
        .collect::<Result<_>>()?;
    let delta_eps = if cols.delta_eps { Some(delta_eps_field(w, &sim.mesh, &sim.spec.params, nodes)?) } else { None };
    Ok(Fields { laws, delta_eps })
}

fn dump_layers(path: &Path, sim: &Simulation) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let (a, b) = sim.layers();
    let n = sim.newest();
    writeln!(out, "# last computed layers n = {} and n = {n}", n - 1)?;
    writeln!(out, "m,s,x_prev,x_curr")?;
    for m in 0..a.len() {
        writeln!(out, "{m},{},{:.17e},{:.17e}", sim.mesh.s(m), a[m], b[m])?;
    }
    out.flush()
}

/// Steps the configured problem to `t_end`, writing the requested snapshot
/// and series files. A failed step dumps the last two good layers and
/// returns [`Error::RunFailed`].
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let spec = cfg.validate()?;
    let steps = cfg.mesh.steps()?;
    let mut sim = Simulation::new(spec, cfg.scheme, cfg.mesh.tau, cfg.mesh.h, cfg.solver)?;
    let cols = sim_columns(&sim);

    let mut snapshots = Vec::new();
    let mut files = Vec::new();
    for o in &cfg.outputs {
        let path = cfg.resolve(&o.path);
        let mut w = BufWriter::new(File::create(&path)?);
        metadata(&mut w, cfg)?;
        writeln!(w, "{}", cols.header())?;
        let times: Vec<usize> = o.times.iter().map(|&t| time_index(t, cfg.mesh.tau)).collect::<Result<_>>()?;
        snapshots.push((w, times, o.stride));
        files.push(path);
    }
    let mut series = match &cfg.series {
        Some(p) => {
            let path = cfg.resolve(p);
            let mut w = BufWriter::new(File::create(&path)?);
            metadata(&mut w, cfg)?;
            write!(w, "step,t,H,e_R,iterations,last_change")?;
            for id in &cols.laws {
                write!(w, ",max_{}", id.label())?;
            }
            writeln!(w, "{}", if cols.delta_eps { ",max_delta_eps" } else { "" })?;
            files.push(path);
            Some(w)
        }
        None => None,
    };

    let h0 = sim.energy()?;
    let mut e_r = vec![(sim.mesh.t(0), 0.0)];
    {
        let (x0, x1) = sim.layers();
        let (x0, x1) = (x0.to_vec(), x1.to_vec());
        for (w, times, stride) in snapshots.iter_mut() {
            if times.contains(&0) {
                snapshot(w, &sim, 0, &x0, &x1, None, h0, 0.0, *stride)?;
            }
        }
    }

    let mut max_law = vec![0.0f64; cols.laws.len()];
    let mut max_de: Option<f64> = None;
    let mut max_iterations = 0;
    let mut last_layers = None;
    for n in 1..=steps {
        let (w, stats) = match sim.advance() {
            Ok(v) => v,
            Err(e) => {
                let dump = cfg.resolve(cfg.failure_dump.as_deref().unwrap_or(Path::new("mswe_last_good.csv")));
                dump_layers(&dump, &sim)?;
                return Err(Error::RunFailed { t: sim.mesh.t(sim.newest()), dump, source: Box::new(e) });
            }
        };
        max_iterations = max_iterations.max(stats.iterations);
        let fields = fields_for(&sim, &cols, &w)?;
        let h_n = sim.energy()?;
        let er = relative_energy_error(h_n, h0)?;
        e_r.push((sim.mesh.t(n), er));

        let maxima: Vec<f64> = fields.laws.iter().map(|f| f.iter().fold(0.0f64, |a, b| a.max(b.abs()))).collect();
        for (acc, v) in max_law.iter_mut().zip(&maxima) {
            *acc = acc.max(*v);
        }
        let de = fields.delta_eps.as_ref().map(|d| d.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        if let Some(d) = de {
            max_de = Some(max_de.unwrap_or(0.0).max(d));
        }
        if let Some(s) = series.as_mut() {
            write!(s, "{n},{},{h_n:e},{er:e},{},{:e}", sim.mesh.t(n), stats.iterations, stats.last_change)?;
            for v in &maxima {
                write!(s, ",{v:e}")?;
            }
            if let Some(d) = de {
                write!(s, ",{d:e}")?;
            }
            writeln!(s)?;
        }
        for (out, times, stride) in snapshots.iter_mut() {
            if times.contains(&n) {
                snapshot(out, &sim, n, &w.x_curr, &w.x_next, Some(&fields), h_n, er, *stride)?;
            }
        }
        if n == steps {
            last_layers = Some(w);
        }
    }
    for (mut w, _, _) in snapshots {
        w.flush()?;
    }
    if let Some(mut s) = series {
        s.flush()?;
    }

    let w = last_layers.expect("at least one step");
    let n = sim.newest() - 1;
    let xp = sim.physical_positions(&w.x_curr, n);
    let xq = sim.physical_positions(&w.x_next, n + 1);
    let max_speed = xp.iter().zip(&xq).map(|(a, b)| ((b - a) / sim.mesh.tau).abs()).fold(0.0, f64::max);

    Ok(RunSummary {
        scheme: cfg.scheme,
        m_count: sim.mesh.m_count,
        steps,
        h0,
        e_r,
        max_law_residual: cols.laws.iter().map(|id| id.label()).zip(max_law).collect(),
        max_delta_eps: max_de,
        max_iterations,
        max_speed,
        files,
    })
}

/// Largest `|u|` at `t_end` without any diagnostics.
fn max_speed_at(cfg: &RunConfig, t_end: f64) -> Result<f64> {
    let spec = cfg.validate()?;
    let steps = time_index(t_end, cfg.mesh.tau)?;
    let mut sim = Simulation::new(spec, cfg.scheme, cfg.mesh.tau, cfg.mesh.h, cfg.solver)?;
    for _ in 0..steps {
        sim.advance()?;
    }
    let n = sim.newest();
    let (a, b) = sim.layers();
    let xp = sim.physical_positions(a, n - 1);
    let xq = sim.physical_positions(b, n);
    Ok(xp.iter().zip(&xq).map(|(a, b)| ((b - a) / sim.mesh.tau).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma1: f64,
    pub max_speed: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub t_end: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }

    fn sorted_points(&self) -> Vec<(f64, f64)> {
        let mut p: Vec<(f64, f64)> = self.rows.iter().filter_map(|r| r.max_speed.map(|u| (r.gamma1, u))).collect();
        p.sort_by(|a, b| a.0.total_cmp(&b.0));
        p
    }

    /// Max speed strictly increasing in gamma1 over the completed runs.
    pub fn strictly_increasing(&self) -> bool {
        self.sorted_points().windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
    }

    /// `R^2` of the least-squares line through `(gamma1, max speed)`.
    pub fn r_squared(&self) -> Option<f64> {
        let p = self.sorted_points();
        if p.len() < 3 {
            return None;
        }
        let n = p.len() as f64;
        let (mx, my) = (p.iter().map(|v| v.0).sum::<f64>() / n, p.iter().map(|v| v.1).sum::<f64>() / n);
        let sxx: f64 = p.iter().map(|v| (v.0 - mx).powi(2)).sum();
        let sxy: f64 = p.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
        let syy: f64 = p.iter().map(|v| (v.1 - my).powi(2)).sum();
        if sxx == 0.0 || syy == 0.0 {
            return None;
        }
        Some(sxy * sxy / (sxx * syy))
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# t = {}", self.t_end)?;
        writeln!(out, "# strictly_increasing = {}", self.strictly_increasing())?;
        if let Some(r2) = self.r_squared() {
            writeln!(out, "# r_squared = {r2}")?;
        }
        writeln!(out, "gamma1,model,max_u,status")?;
        for r in &self.rows {
            let model = if r.gamma1 == 0.0 { "shallow_water" } else { "modified" };
            let status = r.error.as_deref().unwrap_or("ok").replace(',', ";");
            writeln!(out, "{},{model},{},{status}", r.gamma1, fmt_opt(r.max_speed))?;
        }
        Ok(())
    }
}

/// Runs the configured problem once per `gamma1` value up to the sweep time
/// (0.2 unless configured), in parallel. Failed runs keep their error in
/// the row; the others are still reported.
pub fn sweep_gamma1(cfg: &RunConfig, values: &[f64]) -> Result<SweepSummary> {
    let t_end = cfg.sweep.as_ref().map_or(0.2, |s| s.t_end);
    time_index(t_end, cfg.mesh.tau)?;
    if let Some(g) = values.iter().find(|g| !g.is_finite()) {
        return Err(Error::Config(format!("sweep value {g} is not finite")));
    }
    let rows = par::map_jobs(values, |&g| {
        let mut c = cfg.clone();
        c.problem.gamma1 = g;
        c.mesh.t_end = t_end;
        c.outputs.clear();
        match max_speed_at(&c, t_end) {
            Ok(u) => SweepRow { gamma1: g, max_speed: Some(u), error: None },
            Err(e) => SweepRow { gamma1: g, max_speed: None, error: Some(e.to_string()) },
        }
    });
    Ok(SweepSummary { t_end, rows })
}
