/// Kind of a detected bare-level crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingClass {
    None,
    /// Both bare levels live in the same block.
    Tunneling,
    /// The bare levels live in different blocks.
    BlockLevel,
    /// Block-level, and the first excited state is a mixture of both blocks.
    InterferenceInvolved,
}

impl CrossingClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CrossingClass::None => "none",
            CrossingClass::Tunneling => "tunneling",
            CrossingClass::BlockLevel => "block-level",
            CrossingClass::InterferenceInvolved => "interference-involved",
        }
    }
}

/// Thresholds. Neither number comes from an analytic argument; both are
/// engineering choices and are echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingOptions {
    /// A gap is "small" when below this fraction of E2 - E1.
    pub gap_ratio: f64,
    /// Minimum weight of the first excited state in each block for interference.
    pub overlap: f64,
    /// Half-width of the window around t* searched for the gap minimum.
    pub gap_window: f64,
    /// Bisection tolerance on t*.
    pub t_tol: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { gap_ratio: 0.1, overlap: 0.1, gap_window: 0.02, t_tol: 1e-6 }
    }
}

/// Spectral data on the sweep grid used to annotate a crossing.
#[derive(Debug, Clone, Copy)]
pub struct GapTrace<'a> {
    pub grid: &'a [f64],
    /// E1 - E0.
    pub gaps: &'a [f64],
    /// E2 - E1.
    pub spacing: Option<&'a [f64]>,
    /// Weight of the first excited state in (block A, block B).
    pub excited_weights: Option<&'a [(f64, f64)]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub t_star: f64,
    pub min_gap: Option<f64>,
    pub t_min_gap: Option<f64>,
    pub small_gap: Option<bool>,
    pub class: CrossingClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    pub options: CrossingOptions,
}

impl CrossingReport {
    /// Class of the first crossing, `None` if there is none.
    pub fn classification(&self) -> CrossingClass {
        self.crossings.first().map_or(CrossingClass::None, |c| c.class)
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign changes of `diff` (bare level A minus bare level B) on the grid
/// points inside `window`, refined by bisection on `diff` itself.
///
/// `blocks` names the block each bare level belongs to; equal names mean a
/// tunneling crossing.
pub fn detect_anticrossing(
    diff: &dyn Fn(f64) -> f64,
    grid: &[f64],
    window: (f64, f64),
    blocks: (&str, &str),
    gaps: Option<&GapTrace>,
    opts: &CrossingOptions,
) -> CrossingReport {
    let pts: Vec<f64> = grid.iter().copied().filter(|t| *t >= window.0 && *t <= window.1).collect();
    let mut crossings = vec![];
    let mut last: Option<(f64, i8)> = None;
    for &t in &pts {
        let s = sign(diff(t));
        if s == 0 {
            continue;
        }
        if let Some((t0, s0)) = last {
            if s != s0 {
                let (mut lo, mut hi) = (t0, t);
                while hi - lo > opts.t_tol {
                    let mid = 0.5 * (lo + hi);
                    let sm = sign(diff(mid));
                    if sm == 0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if sm == s0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                crossings.push(annotate(0.5 * (lo + hi), blocks, gaps, opts));
            }
        }
        last = Some((t, s));
    }
    CrossingReport { crossings, options: *opts }
}

fn annotate(t_star: f64, blocks: (&str, &str), gaps: Option<&GapTrace>, opts: &CrossingOptions) -> Crossing {
    let same_block = blocks.0 == blocks.1;
    let mut c = Crossing {
        t_star,
        min_gap: None,
        t_min_gap: None,
        small_gap: None,
        class: if same_block { CrossingClass::Tunneling } else { CrossingClass::BlockLevel },
    };
    let g = match gaps {
        Some(g) if !g.grid.is_empty() => g,
        _ => return c,
    };
    let near: Vec<usize> = (0..g.grid.len())
        .filter(|&i| (g.grid[i] - t_star).abs() <= opts.gap_window)
        .collect();
    let candidates = if near.is_empty() {
        let nearest = (0..g.grid.len())
            .min_by(|&a, &b| (g.grid[a] - t_star).abs().partial_cmp(&(g.grid[b] - t_star).abs()).unwrap())
            .unwrap();
        vec![nearest]
    } else {
        near
    };
    let i = *candidates
        .iter()
        .min_by(|&&a, &&b| g.gaps[a].partial_cmp(&g.gaps[b]).unwrap())
        .unwrap();
    c.min_gap = Some(g.gaps[i]);
    c.t_min_gap = Some(g.grid[i]);
    c.small_gap = g.spacing.map(|s| g.gaps[i] < opts.gap_ratio * s[i]);
    if !same_block {
        if let Some(w) = g.excited_weights {
            if w[i].0 > opts.overlap && w[i].1 > opts.overlap {
                c.class = CrossingClass::InterferenceInvolved;
            }
        }
    }
    c
}
