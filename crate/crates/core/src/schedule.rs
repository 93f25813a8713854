//! Annealing schedules: the Stage-0 ramp, the two-stage main schedule, and
//! multi-driver iterations that share one transverse-field profile.

use crate::error::{invalid, Result};

/// Stage constants. The XX strength during Stage 1 is `alpha * gamma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageConfig {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha: f64,
}

impl StageConfig {
    pub fn new(gamma0: f64, gamma1: f64, gamma2: f64, alpha: f64) -> Result<Self> {
        if !(gamma2 > 0.0 && gamma1 > gamma2 && gamma0 > gamma1) {
            return invalid(format!(
                "need gamma0 > gamma1 > gamma2 > 0, got ({gamma0}, {gamma1}, {gamma2})"
            ));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return invalid(format!("alpha must be nonnegative, got {alpha}"));
        }
        Ok(Self { gamma0, gamma1, gamma2, alpha })
    }

    /// gamma1 = k * gamma2, gamma0 = 2 * gamma1.
    pub fn from_factor(gamma2: f64, k: f64, alpha: f64) -> Result<Self> {
        Self::new(2.0 * k * gamma2, k * gamma2, gamma2, alpha)
    }

    /// Same, parameterized by the Stage-1 coupling instead of alpha.
    pub fn from_jxx(gamma2: f64, k: f64, jxx: f64) -> Result<Self> {
        if !(gamma2 > 0.0) {
            return invalid(format!("gamma2 must be positive, got {gamma2}"));
        }
        Self::from_factor(gamma2, k, jxx / gamma2)
    }

    /// Defaults for `m` cliques: gamma2 = m, gamma1 = 2 gamma2, gamma0 = 2 gamma1,
    /// alpha = 2 (m - 1) / m, so the Stage-1 coupling is 2 (m - 1).
    pub fn defaults(m: usize) -> Result<Self> {
        let m = m as f64;
        Self::from_factor(m, 2.0, 2.0 * (m - 1.0) / m)
    }

    pub fn jxx(&self) -> f64 {
        self.alpha * self.gamma2
    }

    /// Time at which x(t) reaches gamma2.
    pub fn t_sep(&self) -> f64 {
        1.0 - self.gamma2 / self.gamma1
    }

    /// Stage 0: (x, jxx, p) with the problem term scaled by p = t.
    pub fn stage0_params(&self, t: f64) -> Result<(f64, f64, f64)> {
        check_t(t)?;
        let x = (1.0 - t) * (self.gamma0 - self.gamma1) + self.gamma1;
        Ok((x, t * self.jxx(), t))
    }

    /// Stages 1 and 2: x = (1 - t) gamma1; jxx constant until x = gamma2, then alpha x.
    pub fn main_params(&self, t: f64) -> Result<(f64, f64)> {
        check_t(t)?;
        let x = (1.0 - t) * self.gamma1;
        Ok((x, self.jxx_at_x(x)))
    }

    /// The main-schedule coupling as a function of x.
    pub fn jxx_at_x(&self, x: f64) -> f64 {
        if x >= self.gamma2 {
            self.jxx()
        } else {
            self.alpha * x
        }
    }

    /// Inverse of x(t) on the main schedule.
    pub fn t_of_x(&self, x: f64) -> f64 {
        1.0 - x / self.gamma1
    }

    /// Stage-1 clock s in [0, 0.5]: x falls linearly from gamma1 (s = 0) to
    /// gamma2 (s = 0.5). Localization plots are read on this axis. Returns the
    /// main-schedule t with the same x.
    pub fn t_of_stage1_clock(&self, s: f64) -> Result<f64> {
        if !(0.0..=0.5).contains(&s) {
            return invalid(format!("Stage-1 clock must lie in [0, 0.5], got {s}"));
        }
        Ok(self.t_of_x(self.gamma1 - 2.0 * s * (self.gamma1 - self.gamma2)))
    }

    /// Inverse of [`Self::t_of_stage1_clock`]; only meaningful for t <= t_sep.
    pub fn stage1_clock(&self, t: f64) -> f64 {
        let x = (1.0 - t) * self.gamma1;
        0.5 * (self.gamma1 - x) / (self.gamma1 - self.gamma2)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("t must lie in [0, 1], got {t}"));
    }
    Ok(())
}

/// One driver iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterStage {
    pub gamma2: f64,
    pub alpha: f64,
    pub jzz: f64,
    /// Indices of the clique groups that receive XX couplers in this iteration.
    pub driver: Vec<usize>,
}

impl IterStage {
    pub fn jxx(&self) -> f64 {
        self.alpha * self.gamma2
    }
}

/// Iterations that share the transverse profile x = (1 - t) gamma1.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    pub factor: f64,
    pub gamma1: f64,
    pub stages: Vec<IterStage>,
}

impl IterationConfig {
    /// gamma1 = factor * max gamma2.
    pub fn new(factor: f64, stages: Vec<IterStage>) -> Result<Self> {
        if !(factor >= 2.0) {
            return invalid(format!("iteration factor must be at least 2, got {factor}"));
        }
        if stages.is_empty() {
            return invalid("at least one iteration is required");
        }
        if stages.iter().any(|s| !(s.gamma2 > 0.0) || !(s.alpha >= 0.0)) {
            return invalid("each iteration needs gamma2 > 0 and alpha >= 0");
        }
        let g = stages.iter().map(|s| s.gamma2).fold(0.0, f64::max);
        Ok(Self { factor, gamma1: factor * g, stages })
    }

    /// Per-iteration defaults for structures with `m_k` cliques of size `n_k`:
    /// gamma2 = m_k, alpha_k = 2 (gamma2 - 1) / gamma2, jzz_k = 1 + (sqrt(n_k) + 1) / 2.
    pub fn defaults(factor: f64, structures: &[(usize, usize)]) -> Result<Self> {
        let stages = structures
            .iter()
            .enumerate()
            .map(|(k, &(m, n))| {
                let g = m as f64;
                IterStage {
                    gamma2: g,
                    alpha: 2.0 * (g - 1.0) / g,
                    jzz: crate::instance::default_jzz(n),
                    driver: vec![k],
                }
            })
            .collect();
        Self::new(factor, stages)
    }

    pub fn x(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok((1.0 - t) * self.gamma1)
    }

    /// (x, jxx_k) at time t.
    pub fn iter_params(&self, t: f64, k: usize) -> Result<(f64, f64)> {
        let s = match self.stages.get(k) {
            Some(s) => s,
            None => return invalid(format!("iteration {k} out of range ({} total)", self.stages.len())),
        };
        let x = self.x(t)?;
        let j = if x >= s.gamma2 { s.jxx() } else { s.alpha * x };
        Ok((x, j))
    }

    /// Transition time of iteration k.
    pub fn t_k(&self, k: usize) -> f64 {
        1.0 - self.stages[k].gamma2 / self.gamma1
    }
}

/// Uniform grid of `n` points on [0, 1].
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}
