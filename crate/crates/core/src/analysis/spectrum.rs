use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::hamiltonian::{build_full, build_low_energy_on, Convention, LowEnergyBasis};
use crate::instance::{ExplicitGraph, GicInstance};
use crate::linalg::DenseOperator;
use crate::schedule::StageConfig;
use crate::sector::SectorBasis;

use super::bare::{bare_at, bare_curves, BareCurves};
use super::crossing::{detect_anticrossing, CrossingOptions, CrossingReport, GapTrace};
use super::{refine_grid, sweep, SpectrumTrace, Sweep};

/// Basis the system Hamiltonian is diagonalized in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumProvider {
    /// All 2^N configurations, clique penalty sized from the schedule.
    Full,
    /// At most one vertex per clique.
    LowEnergy,
    /// Clique-symmetric sector of the low-energy space. Holds the tracked
    /// ground state exactly; levels outside the sector are not seen.
    #[default]
    Sector,
}

impl SpectrumProvider {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumProvider::Full => "full",
            SpectrumProvider::LowEnergy => "low-energy",
            SpectrumProvider::Sector => "sector",
        }
    }
}

/// Prebuilt pieces for one instance and provider.
pub(crate) struct Model {
    pub kind: SpectrumProvider,
    pub graph: ExplicitGraph,
    pub basis: LowEnergyBasis,
    pub sector: Option<SectorBasis>,
}

impl Model {
    pub fn new(inst: &GicInstance, cfg: &StageConfig, kind: SpectrumProvider) -> Result<Self> {
        let basis = LowEnergyBasis::from_instance(inst);
        let graph = match kind {
            SpectrumProvider::Full => inst.expand_with(inst.jzz_clique_for(cfg.gamma1, cfg.jxx())),
            _ => inst.expand(),
        };
        let sector = match kind {
            SpectrumProvider::Sector => Some(SectorBasis::new(&graph, basis.clone())?),
            _ => None,
        };
        Ok(Self { kind, graph, basis, sector })
    }

    pub fn operator(&self, x: f64, jxx: f64) -> Result<DenseOperator> {
        let conv = Convention::Spin;
        match (&self.kind, &self.sector) {
            (SpectrumProvider::Full, _) => build_full(&self.graph, x, jxx, 1.0, conv),
            (SpectrumProvider::LowEnergy, _) => build_low_energy_on(&self.graph, &self.basis, x, jxx, 1.0, conv),
            (SpectrumProvider::Sector, Some(s)) => s.hamiltonian(&self.graph, x, jxx, 1.0, conv),
            (SpectrumProvider::Sector, None) => unreachable!("sector model without a sector basis"),
        }
    }

    /// Amplitudes on computational configurations (low-energy order for the
    /// reduced providers). Sector amplitudes are spread over their classes
    /// with positive weights, so signs carry over.
    pub fn lift(&self, psi: &DVector<f64>) -> DVector<f64> {
        match &self.sector {
            Some(s) => s.lift(psi),
            None => psi.clone(),
        }
    }

    /// Isometry onto the same-sign block, in this provider's basis.
    pub fn same_sign(&self) -> DMatrix<f64> {
        let low = same_sign_projector(&self.basis);
        match (&self.kind, &self.sector) {
            (SpectrumProvider::Sector, Some(s)) => s.embedding().transpose() * low,
            (SpectrumProvider::Full, _) => {
                let rows = self.basis.full_indices();
                let mut p = DMatrix::zeros(1usize << self.basis.vertex_count, low.ncols());
                for (i, &r) in rows.iter().enumerate() {
                    p.row_mut(r).copy_from(&low.row(i));
                }
                p
            }
            _ => low,
        }
    }
}

/// Isometry from the same-sign block (every clique empty or uniformly
/// occupied, leftover bits free) into the low-energy space. Columns are
/// ordered with clique 0 most significant, 1c before 0c, then leftover bits
/// with 1 before 0.
pub fn same_sign_projector(basis: &LowEnergyBasis) -> DMatrix<f64> {
    let nc = basis.cliques.len();
    let factors = nc + basis.leftover.len();
    let cols = 1usize << factors;
    let mut p = DMatrix::zeros(basis.dim(), cols);
    for i in 0..basis.dim() {
        let d = basis.digits(i);
        let mut col = 0usize;
        let mut amp = 1.0;
        for (k, &dk) in d.iter().enumerate() {
            let occupied = dk > 0;
            if k < nc {
                if occupied {
                    amp /= (basis.cliques[k].len() as f64).sqrt();
                }
            }
            col = (col << 1) | (!occupied) as usize;
        }
        p[(i, col)] = amp;
    }
    p
}

/// Everything a spectrum analysis produces.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub provider: SpectrumProvider,
    pub trace: SpectrumTrace,
    pub bare: BareCurves,
    /// LM versus GM, both in the same-sign block.
    pub lm_gm: CrossingReport,
    /// AS0 versus GM, opposite-sign versus same-sign block.
    pub as0_gm: CrossingReport,
    /// Smallest E1 - E0 for t >= t_sep, with its location.
    pub stage2_min_gap: (f64, f64),
    /// Weight of the first excited state on the same-sign block per grid point.
    pub excited_same_sign: Vec<f64>,
    pub sweep: Sweep,
}

/// Sweeps the instance along the main schedule, refines the grid around the
/// deepest Stage-2 gap minima, and reports bare-level crossings in Stage 2.
pub fn spectrum_run(
    inst: &GicInstance,
    cfg: &StageConfig,
    grid: &[f64],
    k: usize,
    provider: SpectrumProvider,
    opts: &CrossingOptions,
) -> Result<SpectrumRun> {
    if inst.uniform_weight().is_none() {
        return invalid("spectrum analysis assumes uniform vertex weights");
    }
    let model = Model::new(inst, cfg, provider)?;
    let op_at = |t: f64| {
        let (x, j) = cfg.main_params(t)?;
        model.operator(x, j)
    };
    let k = k.max(3);
    let coarse = sweep(op_at, grid, k)?;
    let t_sep = cfg.t_sep();
    let gaps: Vec<f64> = coarse
        .trace
        .gaps()
        .iter()
        .zip(grid)
        .map(|(g, &t)| if t >= t_sep { *g } else { f64::INFINITY })
        .collect();
    let fine = refine_grid(grid, &gaps, opts.gap_window, 3);
    let sw = if fine.len() > grid.len() { sweep(op_at, &fine, k)? } else { coarse };
    let grid = sw.trace.grid.clone();

    let bare = bare_curves(inst, cfg, &grid)?;
    let cs = model.same_sign();
    let excited_same_sign: Vec<f64> = sw.excited.iter().map(|v| (cs.transpose() * v).norm_squared()).collect();
    let weights: Vec<(f64, f64)> = excited_same_sign.iter().map(|&c| (c, (1.0 - c).max(0.0))).collect();
    let gaps = sw.trace.gaps();
    let spacing = sw.trace.spacings();
    let gt = GapTrace { grid: &grid, gaps: &gaps, spacing: spacing.as_deref(), excited_weights: Some(&weights) };

    let diff = |pick: fn(&(f64, f64, f64)) -> f64| {
        move |t: f64| {
            let (x, j) = cfg.main_params(t).expect("t in [0, 1]");
            let b = bare_at(inst, x, j).expect("validated instance");
            pick(&b)
        }
    };
    let lm_gm = detect_anticrossing(&diff(|b| b.0 - b.1), &grid, (t_sep, 1.0), ("C", "C"), Some(&gt), opts);
    // AS0 lives in the opposite-sign block; GM in the same-sign block.
    let as0_gm = detect_anticrossing(&diff(|b| b.2 - b.1), &grid, (t_sep, 1.0), ("Q", "C"), Some(&gt), opts);

    let stage2_min_gap = grid
        .iter()
        .zip(&gaps)
        .filter(|(t, _)| **t >= t_sep)
        .map(|(t, g)| (*t, *g))
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });

    Ok(SpectrumRun {
        provider,
        trace: SpectrumTrace { tags: (0..k).map(|i| format!("E{i}")).collect(), ..sw.trace.clone() },
        bare,
        lm_gm,
        as0_gm,
        stage2_min_gap,
        excited_same_sign,
        sweep: sw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::make_gshare;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn same_sign_projector_is_isometry() {
        let inst = make_gshare(2, &[3, 2], 1, 1.0, None, None).unwrap();
        let b = LowEnergyBasis::from_instance(&inst);
        let p = same_sign_projector(&b);
        assert_eq!(p.ncols(), 8);
        assert!(orthonormality_defect(&p) < 1e-14);
    }

    #[test]
    fn providers_agree_on_ground_energy() {
        let inst = make_gshare(2, &[3, 2], 1, 1.0, Some(2.0), None).unwrap();
        let cfg = StageConfig::defaults(2).unwrap();
        let (x, j) = cfg.main_params(0.6).unwrap();
        let mut e = vec![];
        for kind in [SpectrumProvider::Full, SpectrumProvider::LowEnergy, SpectrumProvider::Sector] {
            let m = Model::new(&inst, &cfg, kind).unwrap();
            let es = crate::linalg::sym_eigen(&m.operator(x, j).unwrap(), Some(1)).unwrap();
            e.push(es.values[0]);
        }
        assert!((e[1] - e[2]).abs() < 1e-10);
        // The full basis differs by the finite clique penalty only.
        assert!((e[0] - e[1]).abs() < 1e-2);
    }
}
