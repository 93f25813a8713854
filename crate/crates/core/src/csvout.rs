//! CSV tables for every trace type. Floats are written with 17 significant
//! digits (`{:.16e}`), so parsing a cell gives back the exact f64.
//!
//! Column layouts:
//! - `spectrum.csv`: t, E0..E{k-1}, stage
//! - `bare.csv`: t, x, jxx, E_LM, E_GM, E_AS0
//! - `localization.csv`: t, wL0, wR_cum_1..wR_cum_k
//! - `negativity.csv`: t, fraction
//! - `v3.csv`: t, x, jxx, alpha, beta, sp_comp_<label> x6, sp_ang_<label> x6
//! - `stage0.csv`: t, gap
//! - `bounds.csv`: name, value
//! - `iterate_<n>.csv`: t, E0..E{k-1}, bare_L1.., bare_GM

use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::{BareCurves, IterRun, LocalizationTrace, SpectrumTrace, V3Bundle, V3_ANG_LABELS, V3_COMP_LABELS};
use crate::bounds::BoundsReport;
use crate::error::{invalid, Result};
use crate::hamiltonian::Stage0Scan;

/// Round-trip float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: vec![] }
    }

    pub fn push_floats(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(fmt_f64).collect());
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            if r.len() != self.header.len() {
                return invalid(format!("row has {} cells, header has {}", r.len(), self.header.len()));
            }
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.iter().map(String::from).collect();
        let rows = rd
            .records()
            .map(|rec| Ok(rec?.iter().map(String::from).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { header, rows })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }

    /// Parsed float column by header name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let Some(c) = self.header.iter().position(|h| h == name) else {
            return invalid(format!("no column named {name}"));
        };
        self.rows
            .iter()
            .map(|r| r[c].parse::<f64>().or_else(|_| invalid(format!("column {name}: not a number: {}", r[c]))))
            .collect()
    }
}

fn levels_header(k: usize) -> impl Iterator<Item = String> {
    (0..k).map(|i| format!("E{i}"))
}

/// `stage` is 1 before `t_sep`, 2 from it on.
pub fn spectrum_table(trace: &SpectrumTrace, t_sep: f64) -> Table {
    let k = trace.levels.first().map_or(0, |l| l.len());
    let mut tab = Table::new(std::iter::once("t".to_string()).chain(levels_header(k)).chain(["stage".to_string()]));
    for (t, l) in trace.grid.iter().zip(&trace.levels) {
        let mut row: Vec<String> = std::iter::once(*t).chain(l.iter().copied()).map(fmt_f64).collect();
        row.push(if *t < t_sep { "1" } else { "2" }.into());
        tab.rows.push(row);
    }
    tab
}

pub fn bare_table(b: &BareCurves) -> Table {
    let mut tab = Table::new(["t", "x", "jxx", "E_LM", "E_GM", "E_AS0"]);
    for i in 0..b.grid.len() {
        tab.push_floats([b.grid[i], b.x[i], b.jxx[i], b.lm[i], b.gm[i], b.as0[i]]);
    }
    tab
}

pub fn localization_table(tr: &LocalizationTrace) -> Table {
    let k = tr.depth();
    let mut tab = Table::new(["t".to_string(), "wL0".to_string()].into_iter().chain((1..=k).map(|j| format!("wR_cum_{j}"))));
    for i in 0..tr.grid.len() {
        tab.push_floats([tr.grid[i], tr.w_l0[i]].into_iter().chain(tr.w_r_cum[i].iter().copied()));
    }
    tab
}

pub fn negativity_table(points: &[(f64, f64)]) -> Table {
    let mut tab = Table::new(["t", "fraction"]);
    for &(t, f) in points {
        tab.push_floats([t, f]);
    }
    tab
}

pub fn v3_table(b: &V3Bundle) -> Table {
    let header = ["t", "x", "jxx", "alpha", "beta"]
        .into_iter()
        .map(String::from)
        .chain(V3_COMP_LABELS.iter().map(|l| format!("sp_comp_{l}")))
        .chain(V3_ANG_LABELS.iter().map(|l| format!("sp_ang_{l}")));
    let mut tab = Table::new(header);
    for p in &b.points {
        tab.push_floats(
            [p.t, p.x, p.jxx, p.alpha, p.beta]
                .into_iter()
                .chain(p.signed_comp)
                .chain(p.signed_ang),
        );
    }
    tab
}

pub fn stage0_table(scan: &Stage0Scan) -> Table {
    let mut tab = Table::new(["t", "gap"]);
    for &(t, g) in &scan.points {
        tab.push_floats([t, g]);
    }
    tab
}

/// One row per reported quantity; the window endpoints are NaN when empty.
pub fn bounds_table(r: &BoundsReport) -> Table {
    let (lo, hi) = r.window.unwrap_or((f64::NAN, f64::NAN));
    let mut tab = Table::new(["name", "value"]);
    for (name, v) in [
        ("lift", r.lift),
        ("steer", r.steer),
        ("sep", r.sep),
        ("sink", r.sink),
        ("jzz_steer", r.jzz_steer.value),
        ("jzz_over_m", r.jzz_over_m),
        ("window_lo", lo),
        ("window_hi", hi),
        ("witness", r.witness),
    ] {
        tab.rows.push(vec![name.into(), fmt_f64(v)]);
    }
    tab
}

pub fn iterate_table(run: &IterRun) -> Table {
    let k = run.trace.levels.first().map_or(0, |l| l.len());
    let groups = run.bare.first().map_or(1, |b| b.len()) - 1;
    let header = std::iter::once("t".to_string())
        .chain(levels_header(k))
        .chain((1..=groups).map(|g| format!("bare_L{g}")))
        .chain(["bare_GM".to_string()]);
    let mut tab = Table::new(header);
    for i in 0..run.trace.grid.len() {
        tab.push_floats(
            std::iter::once(run.trace.grid[i])
                .chain(run.trace.levels[i].iter().copied())
                .chain(run.bare[i].iter().copied()),
        );
    }
    tab
}
