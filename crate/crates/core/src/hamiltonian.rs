//! System Hamiltonians in the computational basis and in the low-energy
//! (at most one vertex per clique) basis, plus the Stage-0 gap scan.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::instance::{EdgeClass, ExplicitGraph, GicInstance};
use crate::linalg::{sym_eigen, BasisTag, DenseOperator, DIM_CAP};
use crate::schedule::StageConfig;

/// Largest vertex count accepted by [`build_full`].
pub const FULL_VERTEX_CAP: usize = 14;

/// Normalization of the driver terms.
///
/// `Spin` uses spin operators: the transverse term is -x sum sigma^x / 2 and the
/// XX term is jxx sum sigma^x sigma^x / 4. This matches the two-level block
/// B(w, x) and all block decompositions. `Pauli` uses bare Pauli operators
/// (-x sum sigma^x, jxx sum sigma^x sigma^x); every x is effectively doubled and
/// every jxx quadrupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Spin,
    Pauli,
}

impl Convention {
    /// Coefficient multiplying x on each sigma^x.
    pub fn x_coeff(self) -> f64 {
        match self {
            Convention::Spin => 0.5,
            Convention::Pauli => 1.0,
        }
    }

    /// Coefficient multiplying jxx on each sigma^x sigma^x.
    pub fn xx_coeff(self) -> f64 {
        match self {
            Convention::Spin => 0.25,
            Convention::Pauli => 1.0,
        }
    }

    /// Gap of a free spin in transverse field x.
    pub fn free_gap(self, x: f64) -> f64 {
        2.0 * self.x_coeff() * x
    }
}

/// Problem energy of an occupation pattern: -sum w_i n_i + sum J n_i n_j.
pub fn problem_energy(graph: &ExplicitGraph, occ: &[bool]) -> f64 {
    let mut e = 0.0;
    for (v, &o) in occ.iter().enumerate() {
        if o {
            e -= graph.weights[v];
        }
    }
    for &(a, b, class) in &graph.edges {
        if occ[a] && occ[b] {
            e += graph.coupling(class);
        }
    }
    e
}

/// Bit string label in vertex order, vertex 0 first.
pub fn bit_label(occ: &[bool]) -> String {
    occ.iter().map(|&o| if o { '1' } else { '0' }).collect()
}

fn occupation(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|v| (index >> (n - 1 - v)) & 1 == 1).collect()
}

fn full_index(occ: &[bool]) -> usize {
    occ.iter().fold(0, |acc, &o| (acc << 1) | o as usize)
}

/// H = x H_X + jxx H_XX + p H_problem on all 2^N configurations.
///
/// Basis index bits read in vertex order with vertex 0 most significant.
pub fn build_full(graph: &ExplicitGraph, x: f64, jxx: f64, p: f64, conv: Convention) -> Result<DenseOperator> {
    graph.validate()?;
    let n = graph.vertex_count();
    if n > FULL_VERTEX_CAP {
        return Err(Error::DimensionCap { dim: 1 << n, cap: 1 << FULL_VERTEX_CAP });
    }
    let dim = 1usize << n;
    let tx = -x * conv.x_coeff();
    let txx = jxx * conv.xx_coeff();
    let mut h = DMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    for s in 0..dim {
        let occ = occupation(s, n);
        h[(s, s)] = p * problem_energy(graph, &occ);
        labels.push(bit_label(&occ));
        for v in 0..n {
            h[(s ^ (1 << (n - 1 - v)), s)] += tx;
        }
        for &(a, b) in &graph.xx_edges {
            let t = s ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b));
            h[(t, s)] += txx;
        }
    }
    DenseOperator::with_labels(h, BasisTag::Computational, labels)
}

/// Configurations with at most one occupied vertex per clique, times free
/// bits on the leftover vertices.
///
/// Ordering is lexicographic in (clique-0 singleton index, ..., leftover bits),
/// where singleton index 0 is the empty clique and index k occupies the k-th
/// clique vertex in ascending vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowEnergyBasis {
    pub cliques: Vec<Vec<usize>>,
    pub leftover: Vec<usize>,
    pub vertex_count: usize,
}

impl LowEnergyBasis {
    pub fn new(mut cliques: Vec<Vec<usize>>, mut leftover: Vec<usize>, vertex_count: usize) -> Result<Self> {
        for c in &mut cliques {
            c.sort_unstable();
        }
        leftover.sort_unstable();
        let mut seen = BTreeSet::new();
        for &v in cliques.iter().flatten().chain(leftover.iter()) {
            if v >= vertex_count || !seen.insert(v) {
                return invalid(format!("vertex {v} repeated or out of range in basis partition"));
            }
        }
        if seen.len() != vertex_count {
            return invalid("basis partition does not cover every vertex");
        }
        let b = Self { cliques, leftover, vertex_count };
        if b.dim_checked().is_none() {
            return Err(Error::DimensionCap { dim: usize::MAX, cap: DIM_CAP });
        }
        Ok(b)
    }

    /// Cliques of the instance in order, R as leftover.
    pub fn from_instance(inst: &GicInstance) -> Self {
        let (offs, r0) = inst.offsets();
        let cliques = inst
            .cliques
            .iter()
            .zip(&offs)
            .map(|(c, &o)| (o..o + c.size).collect())
            .collect();
        Self { cliques, leftover: (r0..r0 + inst.r_count).collect(), vertex_count: r0 + inst.r_count }
    }

    /// Cliques read off the clique-class edges (connected components, which
    /// must be complete); vertices without clique edges are leftover.
    pub fn from_graph(graph: &ExplicitGraph) -> Result<Self> {
        let n = graph.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], v: usize) -> usize {
            let mut r = v;
            while p[r] != r {
                r = p[r];
            }
            let mut c = v;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut clique_edges = BTreeSet::new();
        for &(a, b, class) in &graph.edges {
            if class == EdgeClass::Clique {
                clique_edges.insert((a.min(b), a.max(b)));
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![vec![]; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            groups[r].push(v);
        }
        let mut cliques = vec![];
        let mut leftover = vec![];
        for g in groups.into_iter().filter(|g| !g.is_empty()) {
            if g.len() == 1 {
                leftover.push(g[0]);
                continue;
            }
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    if !clique_edges.contains(&(a, b)) {
                        return invalid(format!(
                            "clique edges around vertex {a} do not form a complete clique"
                        ));
                    }
                }
            }
            cliques.push(g);
        }
        Self::new(cliques, leftover, n)
    }

    fn dim_checked(&self) -> Option<usize> {
        let mut d: usize = 1;
        for c in &self.cliques {
            d = d.checked_mul(c.len() + 1)?;
        }
        for _ in &self.leftover {
            d = d.checked_mul(2)?;
        }
        Some(d)
    }

    pub fn dim(&self) -> usize {
        self.dim_checked().unwrap()
    }

    /// Mixed-radix digits: clique singleton indices, then leftover bits.
    pub fn radices(&self) -> Vec<usize> {
        self.cliques
            .iter()
            .map(|c| c.len() + 1)
            .chain(self.leftover.iter().map(|_| 2))
            .collect()
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let r = self.radices();
        let mut d = vec![0; r.len()];
        for k in (0..r.len()).rev() {
            d[k] = index % r[k];
            index /= r[k];
        }
        d
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        self.radices().iter().zip(digits).fold(0, |acc, (&r, &d)| acc * r + d)
    }

    pub fn occupation(&self, digits: &[usize]) -> Vec<bool> {
        let mut occ = vec![false; self.vertex_count];
        for (c, &d) in self.cliques.iter().zip(digits) {
            if d > 0 {
                occ[c[d - 1]] = true;
            }
        }
        let nc = self.cliques.len();
        for (k, &v) in self.leftover.iter().enumerate() {
            occ[v] = digits[nc + k] == 1;
        }
        occ
    }

    /// Computational-basis index of every low-energy state, in basis order.
    pub fn full_indices(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| full_index(&self.occupation(&self.digits(i)))).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| bit_label(&self.occupation(&self.digits(i)))).collect()
    }

    /// Position of vertex `v`: (clique index, 1-based slot) if it is a clique vertex.
    pub fn clique_slot(&self, v: usize) -> Option<(usize, usize)> {
        self.cliques
            .iter()
            .enumerate()
            .find_map(|(c, vs)| vs.iter().position(|&u| u == v).map(|k| (c, k + 1)))
    }
}

/// Low-energy Hamiltonian built directly on the restricted basis.
///
/// Transverse flips that would doubly occupy a clique are dropped, as are
/// XX moves out of an empty clique; the clique penalty never enters.
pub fn build_low_energy_on(
    graph: &ExplicitGraph,
    basis: &LowEnergyBasis,
    x: f64,
    jxx: f64,
    p: f64,
    conv: Convention,
) -> Result<DenseOperator> {
    graph.validate()?;
    if basis.vertex_count != graph.vertex_count() {
        return invalid("basis and graph vertex counts differ");
    }
    let dim = basis.dim();
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    let tx = -x * conv.x_coeff();
    let txx = jxx * conv.xx_coeff();
    let nc = basis.cliques.len();
    let mut xx_by_clique: Vec<Vec<(usize, usize)>> = vec![vec![]; nc];
    for &(a, b) in &graph.xx_edges {
        match (basis.clique_slot(a), basis.clique_slot(b)) {
            (Some((ca, ka)), Some((cb, kb))) if ca == cb => xx_by_clique[ca].push((ka, kb)),
            _ => return invalid(format!("XX edge ({a},{b}) does not lie inside one basis clique")),
        }
    }
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let d = basis.digits(s);
        h[(s, s)] = p * problem_energy(graph, &basis.occupation(&d));
        let mut e = d.clone();
        for c in 0..nc {
            let orig = d[c];
            if orig == 0 {
                for k in 1..=basis.cliques[c].len() {
                    e[c] = k;
                    h[(basis.index(&e), s)] += tx;
                }
            } else {
                e[c] = 0;
                h[(basis.index(&e), s)] += tx;
                for &(ka, kb) in &xx_by_clique[c] {
                    let target = if orig == ka {
                        kb
                    } else if orig == kb {
                        ka
                    } else {
                        continue;
                    };
                    e[c] = target;
                    h[(basis.index(&e), s)] += txx;
                }
            }
            e[c] = orig;
        }
        for k in 0..basis.leftover.len() {
            let slot = nc + k;
            e[slot] = 1 - d[slot];
            h[(basis.index(&e), s)] += tx;
            e[slot] = d[slot];
        }
    }
    DenseOperator::with_labels(h, BasisTag::LowEnergy, basis.labels())
}

/// Low-energy Hamiltonian of an instance with the problem term at full strength.
pub fn build_low_energy(inst: &GicInstance, x: f64, jxx: f64, conv: Convention) -> Result<DenseOperator> {
    build_low_energy_p(inst, x, jxx, 1.0, conv)
}

/// As [`build_low_energy`] with the problem term scaled by `p`.
pub fn build_low_energy_p(inst: &GicInstance, x: f64, jxx: f64, p: f64, conv: Convention) -> Result<DenseOperator> {
    let basis = LowEnergyBasis::from_instance(inst);
    let dim = basis.dim_checked().unwrap_or(usize::MAX);
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    build_low_energy_on(&inst.expand(), &basis, x, jxx, p, conv)
}

/// Restriction of a computational-basis operator to the low-energy basis, in basis order.
pub fn project_low_energy(full: &DenseOperator, basis: &LowEnergyBasis) -> Result<DenseOperator> {
    if full.dim() != 1usize << basis.vertex_count {
        return invalid("operator dimension does not match 2^N for the basis");
    }
    let mut op = full.restrict(&basis.full_indices());
    op.basis = BasisTag::LowEnergy;
    Ok(op)
}

/// Crude operator-norm bound of the low-energy perturbation divided by the clique penalty.
///
/// This is the closeness parameter of the low-energy reduction; it is a
/// diagnostic, not a gate.
pub fn reduction_epsilon(graph: &ExplicitGraph, x: f64, jxx: f64, conv: Convention) -> f64 {
    let n = graph.vertex_count() as f64;
    let plain = graph.edges.iter().filter(|e| e.2 == EdgeClass::Plain).count() as f64;
    let wsum: f64 = graph.weights.iter().map(|w| w.abs()).sum();
    let m = x.abs() * conv.x_coeff() * n
        + jxx.abs() * conv.xx_coeff() * graph.xx_edges.len() as f64
        + wsum
        + graph.jzz * plain;
    m * m / graph.jzz_clique
}

/// Spectral gap along the Stage-0 ramp.
#[derive(Debug, Clone)]
pub struct Stage0Scan {
    pub points: Vec<(f64, f64)>,
    pub min_gap: f64,
    pub t_min: f64,
    /// Half the free-spin gap at gamma1.
    pub threshold: f64,
    pub ok: bool,
}

/// Gap E1 - E0 of the Stage-0 Hamiltonian on the full computational basis.
pub fn stage0_gap_scan(inst: &GicInstance, cfg: &StageConfig, grid: &[f64], conv: Convention) -> Result<Stage0Scan> {
    let graph = inst.expand_with(inst.jzz_clique_for(cfg.gamma1, cfg.jxx()));
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let (x, jxx, p) = cfg.stage0_params(t)?;
        let h = build_full(&graph, x, jxx, p, conv)?;
        let es = sym_eigen(&h, Some(2))?;
        if es.len() < 2 {
            return invalid("Stage-0 scan needs at least two levels");
        }
        points.push((t, es.values[1] - es.values[0]));
    }
    let (t_min, min_gap) = points
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let threshold = 0.5 * conv.free_gap(cfg.gamma1);
    Ok(Stage0Scan { points, min_gap, t_min, threshold, ok: min_gap >= threshold })
}
