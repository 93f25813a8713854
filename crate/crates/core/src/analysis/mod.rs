//! Spectral sweeps and the diagnostics built on them.

mod bare;
mod crossing;
mod iterate;
mod localization;
mod md;
mod negativity;
mod spectrum;
mod v3;

pub use bare::{bare_curves, BareCurves};
pub use crossing::{detect_anticrossing, Crossing, CrossingClass, CrossingOptions, CrossingReport, GapTrace};
pub use iterate::{iterate_demo, CompositeSpec, IterRun, IterateDemo};
pub use localization::{localization, localization_with, LocalizationTrace};
pub use md::{md_block_form, MdBlockForm};
pub use negativity::{negative_fraction, negativity, negativity_run, NEGATIVE_CUTOFF};
pub use spectrum::{same_sign_projector, spectrum_run, SpectrumProvider, SpectrumRun};
pub use v3::{
    v3_instance, v3_model, v3_rotation, V3Bundle, V3Point, V3_ANG_LABELS, V3_COMP_LABELS, V3_EFF_ANG_LABELS,
    V3_EFF_COMP_LABELS,
};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{select_ground, sym_eigen, DenseOperator};

/// Default number of grid points on [0, 1].
pub const DEFAULT_GRID: usize = 401;

/// Worker count from `ANNEAL_THREADS`, if set to a positive integer.
pub fn thread_count() -> Option<usize> {
    std::env::var("ANNEAL_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluates `f` on every grid point in parallel; results come back in grid order.
pub fn par_map<T, F>(grid: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    let run = || grid.par_iter().map(|&t| f(t)).collect::<Result<Vec<T>>>();
    match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Lowest levels per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub grid: Vec<f64>,
    /// `levels[i][k]`: k-th level at `grid[i]`, ascending.
    pub levels: Vec<Vec<f64>>,
    pub tags: Vec<String>,
}

impl SpectrumTrace {
    /// E1 - E0 per grid point.
    pub fn gaps(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l[1] - l[0]).collect()
    }

    /// E2 - E1 per grid point, when at least three levels are stored.
    pub fn spacings(&self) -> Option<Vec<f64>> {
        self.levels.iter().map(|l| l.get(2).map(|e2| e2 - l[1])).collect()
    }
}

/// Spectrum plus tracked ground and first-excited vectors.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub trace: SpectrumTrace,
    pub ground: Vec<DVector<f64>>,
    pub excited: Vec<DVector<f64>>,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("grid is empty");
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return invalid("grid points must lie in [0, 1]");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("grid must be strictly increasing");
    }
    Ok(())
}

/// Lowest `k` levels of `provider(t)` on the grid.
///
/// Points are diagonalized in parallel; ground vectors are then chosen in a
/// sequential pass so that inside a degenerate level each one follows the
/// previous point's vector.
pub fn sweep<F>(provider: F, grid: &[f64], k: usize) -> Result<Sweep>
where
    F: Fn(f64) -> Result<DenseOperator> + Sync,
{
    check_grid(grid)?;
    if k < 2 {
        return invalid("a sweep needs at least two levels");
    }
    let systems = par_map(grid, |t| sym_eigen(&provider(t)?, Some(k)))?;
    let mut levels = Vec::with_capacity(grid.len());
    let mut ground: Vec<DVector<f64>> = Vec::with_capacity(grid.len());
    let mut excited = Vec::with_capacity(grid.len());
    for es in &systems {
        if es.len() < 2 {
            return invalid("operator has fewer than two levels");
        }
        let (_, v) = select_ground(es, ground.last());
        ground.push(v);
        excited.push(es.vector(1));
        levels.push(es.values.clone());
    }
    Ok(Sweep {
        trace: SpectrumTrace { grid: grid.to_vec(), levels, tags: vec![] },
        ground,
        excited,
    })
}

/// Adds points at one tenth of the local spacing within +-`halfwidth` of the
/// deepest local minima of `gaps` (at most `max_minima` of them).
pub fn refine_grid(grid: &[f64], gaps: &[f64], halfwidth: f64, max_minima: usize) -> Vec<f64> {
    let n = grid.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || gaps[i] <= gaps[i - 1]) && (i + 1 == n || gaps[i] <= gaps[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| gaps[a].partial_cmp(&gaps[b]).unwrap());
    minima.truncate(max_minima);
    let mut out = grid.to_vec();
    for i in minima {
        let h = if n > 1 {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            (grid[hi] - grid[lo]) / (hi - lo) as f64
        } else {
            0.0
        };
        if h <= 0.0 {
            continue;
        }
        let step = h / 10.0;
        let count = (halfwidth / step).round() as i64;
        for j in -count..=count {
            let t = grid[i] + j as f64 * step;
            if (0.0..=1.0).contains(&t) {
                out.push(t);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BasisTag;
    use nalgebra::DMatrix;

    #[test]
    fn constant_provider_is_flat() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        let grid = crate::schedule::uniform_grid(5);
        let s = sweep(|_| Ok(DenseOperator::new(m.clone(), BasisTag::Custom)), &grid, 2).unwrap();
        assert!(s.trace.levels.iter().all(|l| l == &vec![-1.0, 1.0]));
    }

    #[test]
    fn rejects_bad_grids() {
        let p = |_| Ok(DenseOperator::new(DMatrix::identity(2, 2), BasisTag::Custom));
        assert!(sweep(p, &[0.5, 0.5], 2).is_err());
        assert!(sweep(p, &[0.5, 1.5], 2).is_err());
        assert!(sweep(p, &[0.5], 1).is_err());
    }

    #[test]
    fn refinement_adds_points_near_minimum() {
        let grid = crate::schedule::uniform_grid(101);
        let gaps: Vec<f64> = grid.iter().map(|t| (t - 0.42f64).abs() + 0.1).collect();
        let fine = refine_grid(&grid, &gaps, 0.02, 3);
        let near = fine.iter().filter(|t| (**t - 0.42).abs() <= 0.0201).count();
        assert_eq!(near, 41);
        assert!(fine.windows(2).all(|w| w[1] > w[0]));
    }
}
