use nalgebra::DVector;

use crate::error::Result;
use crate::instance::GicInstance;
use crate::linalg::DenseOperator;
use crate::schedule::StageConfig;

use super::spectrum::{Model, SpectrumProvider};
use super::sweep;

/// Amplitudes below this count as negative.
pub const NEGATIVE_CUTOFF: f64 = -1e-12;

/// Squared-amplitude mass on negative entries, with the sign chosen so that
/// the amplitudes sum to a nonnegative number.
pub fn negative_fraction(psi: &DVector<f64>) -> f64 {
    let flip = psi.sum() < 0.0;
    let norm = psi.norm_squared();
    if norm == 0.0 {
        return 0.0;
    }
    let neg: f64 = psi
        .iter()
        .map(|&a| if flip { -a } else { a })
        .filter(|&a| a < NEGATIVE_CUTOFF)
        .map(|a| a * a)
        .sum();
    // An empty float sum is -0.0; adding 0.0 normalizes it.
    (neg / norm).clamp(0.0, 1.0) + 0.0
}

/// (t, negative fraction) of the tracked ground state of a provider whose
/// basis states are configurations.
pub fn negativity<F>(provider: F, grid: &[f64]) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<DenseOperator> + Sync,
{
    let sw = sweep(provider, grid, 2)?;
    Ok(grid.iter().zip(&sw.ground).map(|(&t, v)| (t, negative_fraction(v))).collect())
}

/// Negativity of an instance along the main schedule. Sector ground states
/// are lifted back to configurations before measuring.
pub fn negativity_run(
    inst: &GicInstance,
    cfg: &StageConfig,
    grid: &[f64],
    provider: SpectrumProvider,
) -> Result<Vec<(f64, f64)>> {
    let model = Model::new(inst, cfg, provider)?;
    let sw = sweep(
        |t| {
            let (x, j) = cfg.main_params(t)?;
            model.operator(x, j)
        },
        grid,
        2,
    )?;
    Ok(grid.iter().zip(&sw.ground).map(|(&t, v)| (t, negative_fraction(&model.lift(v)))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_examples() {
        assert_eq!(negative_fraction(&DVector::from_vec(vec![0.6, 0.8])), 0.0);
        let v = DVector::from_vec(vec![0.8, -0.6]);
        assert!((negative_fraction(&v) - 0.36).abs() < 1e-15);
        // Global sign does not matter.
        assert!((negative_fraction(&(-v)) - 0.36).abs() < 1e-15);
    }
}
