use crate::blocks::{b_eigen, clique_reduce, f_q};
use crate::error::{invalid, Result};
use crate::instance::{GicInstance, Structure};
use crate::schedule::StageConfig;

use super::check_grid;

/// Closed-form bare ground energies along the main schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BareCurves {
    pub grid: Vec<f64>,
    pub x: Vec<f64>,
    pub jxx: Vec<f64>,
    /// L subsystem (R empty): sum of same-sign clique ground levels.
    pub lm: Vec<f64>,
    /// GM vertices alone, each a free two-level block.
    pub gm: Vec<f64>,
    /// All cliques in spin-0 states, R shifted by the clique overlap.
    pub as0: Vec<f64>,
}

/// (E_LM, E_GM, E_AS0) at one (x, jxx).
pub(crate) fn bare_at(inst: &GicInstance, x: f64, jxx: f64) -> Result<(f64, f64, f64)> {
    let mut lm = 0.0;
    let mut theta_sum = 0.0;
    let mut r_shift = 0.0;
    for (i, c) in inst.cliques.iter().enumerate() {
        let r = clique_reduce(c.size, c.weight, x, jxx)?;
        lm += r.eigen().beta0;
        theta_sum += r.theta;
        let st = if inst.shared_vertex(i).is_some() { Structure::Shared } else { Structure::Disjoint };
        r_shift += inst.jzz * f_q(st, c.size);
    }
    let gm_clique: f64 = (0..inst.m_l())
        .filter(|&i| inst.shared_vertex(i).is_some())
        .map(|i| b_eigen(inst.cliques[i].weight, x).beta0)
        .sum();
    let gm = gm_clique + inst.r_count as f64 * b_eigen(inst.r_weight, x).beta0;
    let as0 = theta_sum + inst.r_count as f64 * b_eigen(inst.r_weight - r_shift, x).beta0;
    Ok((lm, gm, as0))
}

pub fn bare_curves(inst: &GicInstance, cfg: &StageConfig, grid: &[f64]) -> Result<BareCurves> {
    check_grid(grid)?;
    if inst.uniform_weight().is_none() {
        return invalid("bare curves assume uniform vertex weights");
    }
    let mut out = BareCurves {
        grid: grid.to_vec(),
        x: vec![],
        jxx: vec![],
        lm: vec![],
        gm: vec![],
        as0: vec![],
    };
    for &t in grid {
        let (x, j) = cfg.main_params(t)?;
        let (lm, gm, as0) = bare_at(inst, x, j)?;
        out.x.push(x);
        out.jxx.push(j);
        out.lm.push(lm);
        out.gm.push(gm);
        out.as0.push(as0);
    }
    Ok(out)
}
