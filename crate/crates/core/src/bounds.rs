//! Analytic bounds on the XX coupling and the resulting feasibility window.

use crate::error::{invalid, Result};
use crate::instance::{GicInstance, Structure};
use crate::schedule::StageConfig;

/// Relative slack used when comparing a bound against the witness. At the
/// steering threshold the steer bound equals the witness exactly in real
/// arithmetic, so a strict float comparison would be decided by rounding.
pub const BOUND_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsInput {
    pub m: usize,
    pub m_r: usize,
    pub m_g: usize,
    /// Clique size used by the steer bound (smallest clique when sizes differ).
    pub n_steer: usize,
    /// Clique size used by the sink bound (largest clique when sizes differ).
    pub n_sink: usize,
    pub gamma2: f64,
    pub jzz: f64,
    pub structure: Structure,
    /// Replace m_r by sqrt(n) m in the steer bound, for when m_r is not known.
    pub conservative: bool,
}

impl BoundsInput {
    pub fn uniform(m: usize, m_r: usize, m_g: usize, n_c: usize, gamma2: f64, jzz: f64, structure: Structure) -> Self {
        Self { m, m_r, m_g, n_steer: n_c, n_sink: n_c, gamma2, jzz, structure, conservative: false }
    }

    pub fn from_instance(inst: &GicInstance, gamma2: f64) -> Self {
        Self {
            m: inst.m_l(),
            m_r: inst.r_count,
            m_g: inst.m_g(),
            n_steer: inst.min_size(),
            n_sink: inst.max_size(),
            gamma2,
            jzz: inst.jzz,
            structure: inst.structure,
            conservative: false,
        }
    }
}

/// Steering threshold on J_zz. `advisory` is set outside m >= 3, m_r >= 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JzzSteer {
    pub value: f64,
    pub advisory: bool,
}

pub fn jzz_steer_bound(m: usize, m_r: usize, n_c: usize) -> Result<JzzSteer> {
    if m_r == 0 {
        return invalid("J_zz steering threshold needs m_r >= 1");
    }
    let value = 1.0 + ((n_c as f64 - 1.0) * (m as f64 - 1.0) - 2.0) / (2.0 * m_r as f64);
    Ok(JzzSteer { value, advisory: m < 3 || m_r < 2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub lift: f64,
    pub steer: f64,
    pub sep: f64,
    /// +inf for the disjoint structure.
    pub sink: f64,
    pub jzz_steer: JzzSteer,
    /// J_zz <= J_zz^steer.
    pub jzz_inter_ok: bool,
    /// J_zz / m, reported for judging "J_zz much smaller than m".
    pub jzz_over_m: f64,
    /// [max(lift, steer), min(sep, sink)] when nonempty.
    pub window: Option<(f64, f64)>,
    /// 2 (m - 1).
    pub witness: f64,
}

impl BoundsReport {
    /// Names of the bounds violated by a coupling value.
    pub fn violations(&self, jxx: f64) -> Vec<&'static str> {
        let mut v = vec![];
        let tol = |b: f64| BOUND_RTOL * b.abs().max(1.0);
        if jxx < self.lift - tol(self.lift) {
            v.push("lift");
        }
        if jxx < self.steer - tol(self.steer) {
            v.push("steer");
        }
        if jxx > self.sep + tol(self.sep) {
            v.push("sep");
        }
        if jxx > self.sink + tol(self.sink) {
            v.push("sink");
        }
        v
    }

    pub fn admits(&self, jxx: f64) -> bool {
        self.violations(jxx).is_empty()
    }
}

pub fn jxx_bounds(inp: &BoundsInput) -> Result<BoundsReport> {
    if inp.m == 0 || inp.m_g == 0 {
        return invalid("m and m_g must be positive");
    }
    if inp.n_steer < 2 {
        return invalid("steer bound is undefined for clique size 1");
    }
    if !(inp.gamma2 > 0.0) || !(inp.jzz > 0.0) {
        return invalid("gamma2 and jzz must be positive");
    }
    let m = inp.m as f64;
    let r_eff = if inp.conservative { (inp.n_steer as f64).sqrt() * m } else { inp.m_r as f64 };
    let lift = 2.0 * m / inp.m_g as f64 * inp.gamma2;
    let steer = 4.0 / (inp.n_steer as f64 - 1.0) * (r_eff * (inp.jzz - 1.0) + 1.0);
    let sep = 2.0 * (inp.gamma2 - 1.0);
    let sink = match inp.structure {
        Structure::Disjoint => f64::INFINITY,
        Structure::Shared => sep + 2.0 * inp.m_r as f64 * inp.jzz / inp.n_sink as f64,
    };
    let jzz_steer = if inp.m_r == 0 {
        JzzSteer { value: f64::NAN, advisory: true }
    } else {
        jzz_steer_bound(inp.m, inp.m_r, inp.n_steer)?
    };
    let lo = lift.max(steer);
    let hi = sep.min(sink);
    let window = (lo <= hi + BOUND_RTOL * hi.abs().max(1.0)).then_some((lo, hi));
    Ok(BoundsReport {
        lift,
        steer,
        sep,
        sink,
        jzz_steer,
        jzz_inter_ok: inp.jzz <= jzz_steer.value,
        jzz_over_m: inp.jzz / m,
        window,
        witness: 2.0 * (m - 1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub report: BoundsReport,
    pub jxx: f64,
    pub jxx_violations: Vec<&'static str>,
    pub witness_in_window: bool,
    pub feasible: bool,
}

/// Bounds for an instance under a schedule; checks both the configured coupling
/// and the witness 2 (m - 1).
pub fn feasibility_check(inst: &GicInstance, cfg: &StageConfig) -> Result<Verdict> {
    let report = jxx_bounds(&BoundsInput::from_instance(inst, cfg.gamma2))?;
    let jxx = cfg.jxx();
    let jxx_violations = report.violations(jxx);
    let witness_in_window = report.admits(report.witness);
    Ok(Verdict { feasible: report.window.is_some(), jxx_violations, witness_in_window, jxx, report })
}
