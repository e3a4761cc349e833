//! Solves a request and writes `solution.csv`, `cpd.csv`, `report.json`
//! and convergence tables.

use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use log::info;
use mood1d::metrics::{convergence_order, error_norms, region_e1};
use mood1d::solvers::solve_steady;
use mood1d::stencil::encode_cells;
use mood1d::{FieldVector, Mesh, SolveReport};
use serde::Serialize;

use crate::request::RunRequest;

#[derive(Debug, Serialize)]
pub struct RegionError {
    pub from: f64,
    pub to: f64,
    pub e1: Vec<f64>,
}

/// Structured summary written to `report.json`.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub case: String,
    pub cells: usize,
    pub solver: String,
    pub mode: String,
    pub d_max: usize,
    pub termination: String,
    pub e1: Vec<f64>,
    pub einf: Vec<f64>,
    pub regions: Vec<RegionError>,
    pub mood_iterations: usize,
    pub as_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub residual_norm: f64,
    pub residual_history: Vec<f64>,
    pub source_shift: f64,
    /// `(l, d, r)` code of every cell.
    pub cells_code: Vec<String>,
}

pub struct Outcome {
    pub mesh: Mesh,
    pub exact: FieldVector,
    pub report: SolveReport,
    pub summary: RunSummary,
}

pub fn solve(req: &RunRequest) -> Result<Outcome> {
    let mesh = req.case.mesh(req.cells)?;
    let phi0 = req.case.initial_means(&mesh);
    info!("solving {} on {} cells with {}/{}", req.case.id, req.cells, req.method.name(), req.mode.as_str());
    let report = solve_steady(&*req.case.problem, &mesh, &req.config, req.method, req.mode, &phi0)
        .with_context(|| format!("{} solve of {} on {} cells failed", req.method.name(), req.case.id, req.cells))?;
    let exact = req.case.exact_means(&mesh);
    let norms = error_norms(&report.phi, &exact, &mesh);
    let regions = req
        .case
        .regions
        .iter()
        .map(|&r| RegionError {
            from: r.0,
            to: r.1,
            e1: region_e1(&report.phi, &exact, &mesh, r),
        })
        .collect();
    let summary = RunSummary {
        case: req.case.id.to_string(),
        cells: req.cells,
        solver: req.method.name().to_owned(),
        mode: req.mode.as_str().to_owned(),
        d_max: req.d_max(),
        termination: report.termination.as_str().to_owned(),
        e1: norms.e1,
        einf: norms.einf,
        regions,
        mood_iterations: report.mood_iterations,
        as_iterations: report.as_iterations,
        inner_iterations: report.inner_iterations.clone(),
        residual_norm: report.residual_norm,
        residual_history: report.residual_history.clone(),
        source_shift: report.source_shift,
        cells_code: encode_cells(&report.cpd, &report.stencils).iter().map(|c| c.to_string()).collect(),
    };
    Ok(Outcome { mesh, exact, report, summary })
}

pub fn solution_header(n_components: usize) -> Vec<String> {
    let mut header = vec!["i".to_owned(), "x_center".to_owned()];
    for prefix in ["phi", "exact", "abs_err"] {
        header.extend((1..=n_components).map(|c| format!("{prefix}_{c}")));
    }
    header
}

/// Shortest representation that reads back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub const CPD_HEADER: [&str; 4] = ["i", "degree", "left_count", "right_count"];

fn write_solution(path: &Path, out: &Outcome) -> Result<()> {
    let nc = out.report.phi.n_components();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(solution_header(nc))?;
    for i in out.mesh.cells() {
        let mut row = vec![i.to_string(), num(out.mesh.center(i))];
        row.extend((0..nc).map(|c| num(out.report.phi.get(c, i))));
        row.extend((0..nc).map(|c| num(out.exact.get(c, i))));
        row.extend((0..nc).map(|c| num((out.report.phi.get(c, i) - out.exact.get(c, i)).abs())));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_cpd(path: &Path, out: &Outcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CPD_HEADER)?;
    for code in encode_cells(&out.report.cpd, &out.report.stencils) {
        w.write_record([code.cell, code.degree, code.left, code.right].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the three run files into `dir`, creating it if needed.
pub fn write_run(dir: &Path, out: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_solution(&dir.join("solution.csv"), out)?;
    write_cpd(&dir.join("cpd.csv"), out)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    Ok(())
}

/// One row of a convergence table; orders are `None` on the first mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub e1: f64,
    pub order_e1: Option<f64>,
    pub einf: f64,
    pub order_einf: Option<f64>,
    pub regions: Vec<(f64, Option<f64>)>,
}

fn order(coarse: (f64, usize), fine: (f64, usize)) -> Result<Option<f64>> {
    Ok(Some(convergence_order(coarse, fine)?.rate().unwrap_or(f64::INFINITY)))
}

/// Errors of component `component` and their orders between consecutive
/// meshes.
pub fn convergence_table(outcomes: &[Outcome], component: usize) -> Result<Vec<ConvergenceRow>> {
    ensure!(outcomes.len() >= 2, "a convergence study needs at least two meshes");
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for out in outcomes {
        let s = &out.summary;
        let mut row = ConvergenceRow {
            cells: s.cells,
            e1: s.e1[component],
            order_e1: None,
            einf: s.einf[component],
            order_einf: None,
            regions: s.regions.iter().map(|r| (r.e1[component], None)).collect(),
        };
        if let Some(prev) = rows.last() {
            row.order_e1 = order((prev.e1, prev.cells), (row.e1, row.cells))?;
            row.order_einf = order((prev.einf, prev.cells), (row.einf, row.cells))?;
            for (r, p) in row.regions.iter_mut().zip(&prev.regions) {
                r.1 = order((p.0, prev.cells), (r.0, row.cells))?;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn convergence_header(n_regions: usize) -> Vec<String> {
    let mut header: Vec<String> = ["cells", "e1", "order_e1", "einf", "order_einf"].map(String::from).to_vec();
    for r in 1..=n_regions {
        header.push(format!("region_{r}_e1"));
        header.push(format!("region_{r}_order"));
    }
    header
}

fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(convergence_header(rows[0].regions.len()))?;
    for row in rows {
        let mut rec = vec![row.cells.to_string(), num(row.e1), cell(row.order_e1), num(row.einf), cell(row.order_einf)];
        for &(e, o) in &row.regions {
            rec.push(num(e));
            rec.push(cell(o));
        }
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text rendering with `---` in place of the first row's orders.
pub fn format_convergence(rows: &[ConvergenceRow]) -> String {
    let rate = |o: Option<f64>| o.map(|o| format!("{o:.2}")).unwrap_or_else(|| "---".into());
    let mut text = String::new();
    for row in rows {
        text += &format!("{:>6}  {:.2e} {:>5}  {:.2e} {:>5}", row.cells, row.e1, rate(row.order_e1), row.einf, rate(row.order_einf));
        for &(e, o) in &row.regions {
            text += &format!("  {e:.2e} {:>5}", rate(o));
        }
        text.push('\n');
    }
    text
}
