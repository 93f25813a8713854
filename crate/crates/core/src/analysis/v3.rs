use nalgebra::{DMatrix, DVector};

use crate::blocks::block_hamiltonians;
use crate::error::{invalid, Result};
use crate::hamiltonian::Convention;
use crate::instance::{make_gshare, GicInstance};
use crate::linalg::{max_abs_diff, BasisTag, DenseOperator};
use crate::schedule::StageConfig;
use crate::sector::SectorBasis;

use super::sweep;

/// Computational labels of the three-vertex model: a is the merged block of
/// the n - 1 unshared clique vertices, b the shared vertex, r the R vertex.
pub const V3_COMP_LABELS: [&str; 6] = ["1a0b1r", "1a0b0r", "0a1b1r", "0a1b0r", "0a0b1r", "0a0b0r"];
pub const V3_ANG_LABELS: [&str; 6] = ["1c1r", "1c0r", "0c1r", "0c0r", "q1r", "q0r"];
pub const V3_EFF_ANG_LABELS: [&str; 3] = ["1c1r", "0c1r", "q1r"];
pub const V3_EFF_COMP_LABELS: [&str; 2] = ["0a1b1r", "1a0b1r"];

/// Sector indices of the computational labels above.
const COMP_ORDER: [usize; 6] = [3, 2, 5, 4, 1, 0];
/// Positions of the effective states inside the angular and computational orders.
const EFF_ANG: [usize; 3] = [0, 2, 4];
const EFF_COMP: [usize; 2] = [2, 0];

#[derive(Debug, Clone)]
pub struct V3Point {
    pub t: f64,
    pub x: f64,
    pub jxx: f64,
    pub h_comp: DMatrix<f64>,
    pub h_ang: DMatrix<f64>,
    pub h_eff_ang: DMatrix<f64>,
    pub h_eff_comp: DMatrix<f64>,
    /// Tracked ground state of `h_eff_ang`: (psi_cr, psi_0r, psi_qr).
    pub psi3: [f64; 3],
    /// Amplitude on 0a1b1r (GM-supporting).
    pub alpha: f64,
    /// Amplitude on 1a0b1r (dependent set).
    pub beta: f64,
    /// sign(psi) psi^2 of the full ground state, computational order.
    pub signed_comp: [f64; 6],
    /// Same state in the angular order.
    pub signed_ang: [f64; 6],
    /// max |H_ang - U^T H_comp U|.
    pub identity_error: f64,
}

#[derive(Debug, Clone)]
pub struct V3Bundle {
    pub n_c: usize,
    pub w: f64,
    pub jzz: f64,
    pub cfg: StageConfig,
    pub points: Vec<V3Point>,
}

/// Columns: angular states; rows: computational states, both in label order.
pub fn v3_rotation(n_c: usize) -> DMatrix<f64> {
    let n = n_c as f64;
    let (big, small) = (((n - 1.0) / n).sqrt(), (1.0 / n).sqrt());
    let mut u = DMatrix::zeros(6, 6);
    for r in 0..2 {
        // 1c = big |a> + small |b>; q = -small |a> + big |b>.
        u[(r, r)] = big;
        u[(2 + r, r)] = small;
        u[(4 + r, 2 + r)] = 1.0;
        u[(r, 4 + r)] = -small;
        u[(2 + r, 4 + r)] = big;
    }
    u
}

/// The three-vertex model as a one-clique shared instance.
pub fn v3_instance(n_c: usize, w: f64, jzz: f64) -> Result<GicInstance> {
    if n_c < 2 {
        return invalid("the three-vertex model needs clique size >= 2");
    }
    make_gshare(1, &[n_c], 1, w, Some(jzz), None)
}

fn signed(v: &DVector<f64>) -> [f64; 6] {
    let mut s = [0.0; 6];
    for i in 0..6 {
        s[i] = v[i].signum() * v[i] * v[i];
    }
    s
}

/// Builds all V3 matrices on the grid and tracks their ground states.
pub fn v3_model(n_c: usize, w: f64, jzz: f64, cfg: &StageConfig, grid: &[f64]) -> Result<V3Bundle> {
    let inst = v3_instance(n_c, w, jzz)?;
    let graph = inst.expand();
    let sector = SectorBasis::from_instance(&inst)?;
    if sector.dim() != 6 {
        return invalid("unexpected sector dimension for the three-vertex model");
    }
    let u = v3_rotation(n_c);
    let mats = |t: f64| -> Result<(f64, f64, DMatrix<f64>, DMatrix<f64>)> {
        let (x, j) = cfg.main_params(t)?;
        let hs = sector.hamiltonian(&graph, x, j, 1.0, Convention::Spin)?;
        let h_comp = DMatrix::from_fn(6, 6, |a, b| hs.mat[(COMP_ORDER[a], COMP_ORDER[b])]);
        let h_ang = block_hamiltonians(&inst, x, j)?.assembled().mat;
        Ok((x, j, h_comp, h_ang))
    };
    let full = sweep(|t| Ok(DenseOperator::new(mats(t)?.2, BasisTag::Computational)), grid, 2)?;
    let eff = sweep(
        |t| {
            let h = mats(t)?.3;
            Ok(DenseOperator::new(h.select_rows(&EFF_ANG).select_columns(&EFF_ANG), BasisTag::Angular))
        },
        grid,
        2,
    )?;
    let sn = (1.0 / n_c as f64).sqrt();
    let sb = ((n_c as f64 - 1.0) / n_c as f64).sqrt();
    let mut points = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let (x, jxx, h_comp, h_ang) = mats(t)?;
        let h_eff_ang = h_ang.select_rows(&EFF_ANG).select_columns(&EFF_ANG);
        let h_eff_comp = h_comp.select_rows(&EFF_COMP).select_columns(&EFF_COMP);
        let g = &eff.ground[i];
        let psi3 = [g[0], g[1], g[2]];
        let (cr, qr) = (psi3[0], psi3[2]);
        let psi6 = &full.ground[i];
        let identity_error = max_abs_diff(&h_ang, &(u.transpose() * &h_comp * &u));
        points.push(V3Point {
            t,
            x,
            jxx,
            alpha: cr * sn + qr * sb,
            beta: cr * sb - qr * sn,
            signed_comp: signed(psi6),
            signed_ang: signed(&(u.transpose() * psi6)),
            psi3,
            identity_error,
            h_comp,
            h_ang,
            h_eff_ang,
            h_eff_comp,
        });
    }
    Ok(V3Bundle { n_c, w, jzz, cfg: *cfg, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn rotation_is_orthogonal() {
        assert!(orthonormality_defect(&v3_rotation(9)) < 1e-15);
    }

    #[test]
    fn identity_and_normalization() {
        let cfg = StageConfig::from_factor(1.0, 2.0, 0.6).unwrap();
        let b = v3_model(9, 1.0, 3.0, &cfg, &crate::schedule::uniform_grid(21)).unwrap();
        for p in &b.points {
            assert!(p.identity_error < 1e-12);
            let s: f64 = p.signed_comp.iter().map(|v| v.abs()).sum();
            assert!((s - 1.0).abs() < 1e-12);
            let s: f64 = p.signed_ang.iter().map(|v| v.abs()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
