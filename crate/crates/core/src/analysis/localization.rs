use crate::blocks::{sym_same_sign, InnerOrder, SymSameSign};
use crate::error::{invalid, Result};
use crate::instance::GicInstance;
use crate::linalg::sym_eigen;
use crate::schedule::StageConfig;

use super::{par_map, sweep};

/// Ground-state weights of the symmetric same-sign block along the main schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationTrace {
    pub grid: Vec<f64>,
    /// Weight on H_L^(0) (R empty).
    pub w_l0: Vec<f64>,
    /// `w_r_cum[i][j]`: weight on the lowest j+1 R-blocks at `grid[i]`.
    pub w_r_cum: Vec<Vec<f64>>,
    /// L count of each R-block in energy order at each grid point.
    pub r_order: Vec<Vec<usize>>,
    /// Weight on every (l, r) occupation pair, `w_lr[i][l][r]`.
    pub w_lr: Vec<Vec<Vec<f64>>>,
}

impl LocalizationTrace {
    pub fn depth(&self) -> usize {
        self.w_r_cum.first().map_or(0, |v| v.len())
    }

    /// Index of the grid point closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        (0..self.grid.len())
            .min_by(|&a, &b| (self.grid[a] - t).abs().partial_cmp(&(self.grid[b] - t).abs()).unwrap())
            .unwrap_or(0)
    }
}

/// R-localization of the tracked same-sign ground state up to depth `k`.
pub fn localization(inst: &GicInstance, cfg: &StageConfig, grid: &[f64], k: usize) -> Result<LocalizationTrace> {
    localization_with(inst, cfg, grid, k, InnerOrder::RInner)
}

/// As [`localization`], diagonalizing in either inner ordering. Both orderings
/// describe the same matrix up to a permutation, so the traces agree.
pub fn localization_with(
    inst: &GicInstance,
    cfg: &StageConfig,
    grid: &[f64],
    k: usize,
    order: InnerOrder,
) -> Result<LocalizationTrace> {
    if k == 0 || k > inst.m_l() + 1 {
        return invalid(format!("depth must be in 1..={}", inst.m_l() + 1));
    }
    let build = |t: f64| -> Result<SymSameSign> {
        let (x, j) = cfg.main_params(t)?;
        sym_same_sign(inst, x, j, order)
    };
    let sw = sweep(|t| Ok(build(t)?.op), grid, 2)?;
    let (m, m_r) = (inst.m_l(), inst.r_count);
    // Lowest eigenvalue of every H_R^(l) at every grid point; structure only
    // depends on t, so rebuild cheaply.
    let block_mins = par_map(grid, |t| {
        let h = build(t)?;
        (0..=m)
            .map(|l| Ok(sym_eigen(&h.op.restrict(&h.r_block(l)), Some(1))?.values[0]))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut out = LocalizationTrace {
        grid: grid.to_vec(),
        w_l0: vec![],
        w_r_cum: vec![],
        r_order: vec![],
        w_lr: vec![],
    };
    let layout = build(grid[0])?;
    for (psi, mins) in sw.ground.iter().zip(&block_mins) {
        let w: Vec<Vec<f64>> = (0..=m)
            .map(|l| (0..=m_r).map(|r| psi[layout.index(l, r)].powi(2)).collect())
            .collect();
        let mut ord: Vec<usize> = (0..=m).collect();
        ord.sort_by(|&a, &b| mins[a].partial_cmp(&mins[b]).unwrap().then(a.cmp(&b)));
        let mut cum = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &l in ord.iter().take(k) {
            acc += w[l].iter().sum::<f64>();
            cum.push(acc.min(1.0));
        }
        out.w_l0.push((0..=m).map(|l| w[l][0]).sum::<f64>().min(1.0));
        out.w_r_cum.push(cum);
        out.r_order.push(ord);
        out.w_lr.push(w);
    }
    Ok(out)
}
