use crate::blocks::{b_eigen, SymGroup, SymmetricModel};
use crate::error::{invalid, Result};
use crate::instance::default_jzz;
use crate::schedule::IterationConfig;

use super::crossing::{detect_anticrossing, CrossingOptions, CrossingReport};
use super::{sweep, SpectrumTrace};

/// Several local-minimum structures (groups of equal cliques) competing with
/// one R set. Every clique is joined to every R vertex and to every clique of
/// the other groups, all with coupling `jzz`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpec {
    /// (clique count, clique size) per group.
    pub groups: Vec<(usize, usize)>,
    pub r_count: usize,
    pub w: f64,
    pub jzz: f64,
}

impl CompositeSpec {
    /// Two cliques of 30 and three cliques of 10 against five R vertices.
    pub fn two_lm() -> Self {
        Self { groups: vec![(2, 30), (3, 10)], r_count: 5, w: 1.0, jzz: default_jzz(30) }
    }

    fn model(&self) -> SymmetricModel {
        let mut groups: Vec<SymGroup> = self
            .groups
            .iter()
            .enumerate()
            .map(|(k, &(m, n))| SymGroup {
                label: format!("L{}_", k + 1),
                count: m,
                weight: self.w,
                x_scale: (n as f64).sqrt(),
            })
            .collect();
        groups.push(SymGroup { label: "R".into(), count: self.r_count, weight: self.w, x_scale: 1.0 });
        let g = groups.len();
        let couplings = (0..g).flat_map(|a| (a + 1..g).map(move |b| (a, b, self.jzz))).collect();
        SymmetricModel { groups, couplings }
    }

    /// Effective weight of each group (R last) when `drivers` are active.
    fn weights(&self, icfg: &IterationConfig, drivers: &[usize], t: f64) -> Result<Vec<f64>> {
        let mut w = vec![self.w; self.groups.len() + 1];
        for &k in drivers {
            let (_, j) = icfg.iter_params(t, k)?;
            for &g in &icfg.stages[k].driver {
                let n = self.groups[g].1 as f64;
                w[g] -= (n - 1.0) / 4.0 * j;
            }
        }
        Ok(w)
    }

    /// Bare ground energies: one per LM group, then GM (the R set alone).
    pub fn bare(&self, icfg: &IterationConfig, drivers: &[usize], t: f64) -> Result<Vec<f64>> {
        let x = icfg.x(t)?;
        let w = self.weights(icfg, drivers, t)?;
        let mut out: Vec<f64> = self
            .groups
            .iter()
            .enumerate()
            .map(|(g, &(m, n))| m as f64 * b_eigen(w[g], (n as f64).sqrt() * x).beta0)
            .collect();
        out.push(self.r_count as f64 * b_eigen(self.w, x).beta0);
        Ok(out)
    }
}

/// One run with a fixed set of active drivers.
#[derive(Debug, Clone)]
pub struct IterRun {
    pub drivers: Vec<usize>,
    pub trace: SpectrumTrace,
    /// Per grid point: bare LM energies per group, then GM.
    pub bare: Vec<Vec<f64>>,
    /// LM_k versus GM crossings inside the window, per group.
    pub crossings: Vec<CrossingReport>,
}

impl IterRun {
    pub fn crossing_count(&self) -> usize {
        self.crossings.iter().map(|r| r.crossings.len()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct IterateDemo {
    pub spec: CompositeSpec,
    /// Crossings are only counted for x <= the largest gamma2.
    pub window: (f64, f64),
    pub runs: Vec<IterRun>,
}

/// Runs with no driver, then with the first 1, 2, ... iterations' drivers.
pub fn iterate_demo(spec: &CompositeSpec, icfg: &IterationConfig, grid: &[f64]) -> Result<IterateDemo> {
    if spec.groups.len() < 2 {
        return invalid("the iteration demo needs at least two LM groups");
    }
    if icfg.stages.iter().flat_map(|s| &s.driver).any(|&g| g >= spec.groups.len()) {
        return invalid("driver refers to a missing group");
    }
    let model = spec.model();
    let g_max = icfg.stages.iter().map(|s| s.gamma2).fold(0.0, f64::max);
    let window = (1.0 - g_max / icfg.gamma1, 1.0);
    let opts = CrossingOptions::default();
    let mut runs = vec![];
    for n_active in 0..=icfg.stages.len() {
        let drivers: Vec<usize> = (0..n_active).collect();
        let sw = sweep(
            |t| {
                let w = spec.weights(icfg, &drivers, t)?;
                model.hamiltonian_with(icfg.x(t)?, &w)
            },
            grid,
            3,
        )?;
        let bare = grid.iter().map(|&t| spec.bare(icfg, &drivers, t)).collect::<Result<Vec<_>>>()?;
        let gm = spec.groups.len();
        let crossings = (0..spec.groups.len())
            .map(|g| {
                let diff = |t: f64| {
                    let b = spec.bare(icfg, &drivers, t).expect("t in [0, 1]");
                    b[g] - b[gm]
                };
                detect_anticrossing(&diff, grid, window, ("C", "C"), None, &opts)
            })
            .collect();
        let mut trace = sw.trace;
        trace.tags = (0..trace.levels[0].len()).map(|i| format!("E{i}")).collect();
        runs.push(IterRun { drivers, trace, bare, crossings });
    }
    Ok(IterateDemo { spec: spec.clone(), window, runs })
}
