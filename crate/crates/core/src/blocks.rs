//! Angular-momentum block machinery.
//!
//! Everything here uses the spin-1/2 normalization: a vertex in transverse
//! field x contributes -x/2 sigma^x, an XX pair jxx/4 sigma^x sigma^x. Two-level
//! blocks are written in the order (|1>, |0>).

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::hamiltonian::LowEnergyBasis;
use crate::instance::{GicInstance, Structure};
use crate::linalg::{embed, embed_pair, BasisTag, DenseOperator, DIM_CAP};

/// B(w, x) = [[-w, -x/2], [-x/2, 0]] on (|1>, |0>).
pub fn b_matrix(w: f64, x: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-w, -0.5 * x, -0.5 * x, 0.0])
}

/// Occupation projector diag(1, 0) on (|1>, |0>).
pub fn shz() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
}

/// Closed-form eigensystem of B(w, x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BEigen {
    pub beta0: f64,
    pub beta1: f64,
    /// Mixing ratio of the ground state, (gamma |0> + |1>) / sqrt(1 + gamma^2).
    /// `+inf` when x = 0 and w <= 0: the ground state is then |0>.
    pub gamma: f64,
    /// True when the ground state is |0> rather than |1> at x = 0 (w < 0).
    pub flipped: bool,
}

pub fn b_eigen(w: f64, x: f64) -> BEigen {
    let r = w.hypot(x);
    let denom = w + r;
    let (gamma, flipped) = if denom > 0.0 {
        (x / denom, false)
    } else if x == 0.0 {
        (f64::INFINITY, w < 0.0)
    } else {
        // w < 0 with |x| tiny relative to w: use the algebraically equal (r - w) / x.
        ((r - w) / x, false)
    };
    BEigen { beta0: -0.5 * (w + r), beta1: -0.5 * (w - r), gamma, flipped }
}

/// Ground vector of B(w, x) in (|1>, |0>) order.
pub fn b_ground_vector(w: f64, x: f64) -> [f64; 2] {
    let g = b_eigen(w, x).gamma;
    if g.is_infinite() {
        [0.0, 1.0]
    } else {
        let n = (1.0 + g * g).sqrt();
        [1.0 / n, g / n]
    }
}

/// Single-clique reduction: same-sign two-level block plus n - 1 spin-0 levels at theta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliqueReduction {
    pub n: usize,
    pub w: f64,
    pub w_eff: f64,
    /// Transverse field seen by the same-sign block, sqrt(n) x.
    pub x_eff: f64,
    pub theta: f64,
    pub spin0_multiplicity: usize,
}

impl CliqueReduction {
    pub fn same_sign(&self) -> DMatrix<f64> {
        b_matrix(self.w_eff, self.x_eff)
    }

    pub fn eigen(&self) -> BEigen {
        b_eigen(self.w_eff, self.x_eff)
    }

    /// Full spectrum {beta0, beta1, theta x (n - 1)}, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let e = self.eigen();
        let mut v = vec![e.beta0, e.beta1];
        v.extend(std::iter::repeat(self.theta).take(self.spin0_multiplicity));
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

pub fn clique_reduce(n: usize, w: f64, x: f64, jxx: f64) -> Result<CliqueReduction> {
    if n == 0 {
        return invalid("clique size must be at least 1");
    }
    let nf = n as f64;
    Ok(CliqueReduction {
        n,
        w,
        w_eff: w - (nf - 1.0) / 4.0 * jxx,
        x_eff: nf.sqrt() * x,
        theta: -(w + jxx / 4.0),
        spin0_multiplicity: n - 1,
    })
}

/// x at which the same-sign ground level meets theta for a unit-weight clique
/// on the Stage-2 line jxx = alpha x. Independent of the clique size.
pub fn crossover_x(alpha: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&alpha) {
        return invalid(format!("crossover needs 0 <= alpha < 2, got {alpha}"));
    }
    Ok(4.0 * alpha / (4.0 - alpha * alpha))
}

/// Largest alpha whose crossover stays at or below gamma2.
pub fn alpha_max(gamma2: f64) -> Result<f64> {
    if !(gamma2 > 0.0) {
        return invalid(format!("gamma2 must be positive, got {gamma2}"));
    }
    Ok((-2.0 + 2.0 * (1.0 + gamma2 * gamma2).sqrt()) / gamma2)
}

/// Two subcliques of one clique merged into the clique's angular basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    /// Restricted Hamiltonian on (|1a0b>, |0a1b>, |0a0b>).
    pub d_c: DMatrix<f64>,
    /// Columns (|1c>, |0c>, |q>) in the rows of `d_c`.
    pub u_merge: DMatrix<f64>,
    /// U^T D U: B(w_eff, sqrt(n_c) x) on (1c, 0c), then -(w + jxx/4) on q.
    pub merged: DMatrix<f64>,
}

pub fn merge_subcliques(n_a: usize, n_b: usize, w: f64, x: f64, jxx: f64) -> Result<Merge> {
    if n_a == 0 || n_b == 0 {
        return invalid("subclique sizes must be at least 1");
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let nc = na + nb;
    let j4 = jxx / 4.0;
    let d_c = DMatrix::from_row_slice(
        3,
        3,
        &[
            -w + (na - 1.0) * j4,
            (na * nb).sqrt() * j4,
            -0.5 * na.sqrt() * x,
            (na * nb).sqrt() * j4,
            -w + (nb - 1.0) * j4,
            -0.5 * nb.sqrt() * x,
            -0.5 * na.sqrt() * x,
            -0.5 * nb.sqrt() * x,
            0.0,
        ],
    );
    let (sa, sb) = ((na / nc).sqrt(), (nb / nc).sqrt());
    let u_merge = DMatrix::from_row_slice(3, 3, &[sa, 0.0, -sb, sb, 0.0, sa, 0.0, 1.0, 0.0]);
    let merged = u_merge.transpose() * &d_c * &u_merge;
    Ok(Merge { d_c, u_merge, merged })
}

/// Partial coupling of an external vertex to all but one vertex of a clique,
/// written on (1c, 0c, q).
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCoupling {
    pub t: DMatrix<f64>,
    /// -1 at the (1c, q) corners.
    pub t_cq: DMatrix<f64>,
    /// (n-1)/n on 1c.
    pub f_c: f64,
    /// 1/n on q.
    pub f_q: f64,
    /// sqrt(n-1)/n, the corner strength.
    pub f_cq: f64,
}

pub fn partial_coupling_t(n_c: usize) -> Result<PartialCoupling> {
    if n_c < 2 {
        return invalid("partial coupling needs a clique of size at least 2");
    }
    let n = n_c as f64;
    let (f_c, f_q, f_cq) = ((n - 1.0) / n, 1.0 / n, (n - 1.0).sqrt() / n);
    let mut t_cq = DMatrix::zeros(3, 3);
    t_cq[(0, 2)] = -1.0;
    t_cq[(2, 0)] = -1.0;
    let mut t = &t_cq * f_cq;
    t[(0, 0)] = f_c;
    t[(2, 2)] = f_q;
    Ok(PartialCoupling { t, t_cq, f_c, f_q, f_cq })
}

/// Spectrum of the bare L subsystem: independent same-sign cliques.
#[derive(Debug, Clone, PartialEq)]
pub struct BareSpectrum {
    pub ground: f64,
    /// E_z = sum_i beta_{z_i}, z read with clique 0 as the most significant bit.
    /// `None` for more than 20 cliques.
    pub energies: Option<Vec<f64>>,
    /// -sum_i (w + jxx/4).
    pub theta_sum: f64,
}

pub fn bare_spectrum(sizes: &[usize], w: f64, x: f64, jxx: f64) -> Result<BareSpectrum> {
    if sizes.is_empty() {
        return invalid("need at least one clique");
    }
    let reds = sizes
        .iter()
        .map(|&n| clique_reduce(n, w, x, jxx).map(|r| r.eigen()))
        .collect::<Result<Vec<_>>>()?;
    let ground = reds.iter().map(|e| e.beta0).sum();
    let theta_sum = -(sizes.len() as f64) * (w + jxx / 4.0);
    let m = sizes.len();
    let energies = (m <= 20).then(|| {
        (0..1usize << m)
            .map(|z| {
                reds.iter()
                    .enumerate()
                    .map(|(i, e)| if (z >> (m - 1 - i)) & 1 == 1 { e.beta1 } else { e.beta0 })
                    .sum()
            })
            .collect()
    });
    Ok(BareSpectrum { ground, energies, theta_sum })
}

/// Collective occupation and transverse operators on the symmetric subspace of
/// m spins, basis ordered by occupation m, m-1, ..., 0.
pub fn dicke_ops(m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = m + 1;
    let csz = DMatrix::from_fn(d, d, |i, j| if i == j { (m - i) as f64 } else { 0.0 });
    let mut csx = DMatrix::zeros(d, d);
    for a in 0..m {
        let v = 0.5 * (((m - a) * (a + 1)) as f64).sqrt();
        csx[(a, a + 1)] = v;
        csx[(a + 1, a)] = v;
    }
    (csz, csx)
}

/// -sqrt(n_c) x CSX(m) - w_eff CSZ(m).
pub fn symmetric_same_sign(m: usize, n_c: usize, w_eff: f64, x: f64) -> DenseOperator {
    let (csz, csx) = dicke_ops(m);
    let mat = csx * (-(n_c as f64).sqrt() * x) - csz * w_eff;
    let labels = (0..=m).map(|a| format!("{}", m - a)).collect();
    DenseOperator::with_labels(mat, BasisTag::Dicke, labels).unwrap()
}

/// Spectrum of -x CSX(m) - w CSZ(m): -(m/2) w + m_s sqrt(w^2 + x^2), ascending.
pub fn closed_tridiag_eigs(m: usize, w: f64, x: f64) -> Vec<f64> {
    let r = w.hypot(x);
    let half = m as f64 / 2.0;
    (0..=m).map(|k| -half * w + (k as f64 - half) * r).collect()
}

/// A group of identical spin-1/2 factors reduced to its symmetric subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SymGroup {
    pub label: String,
    pub count: usize,
    pub weight: f64,
    /// Transverse multiplier (sqrt(n) for contracted cliques, 1 for bare vertices).
    pub x_scale: f64,
}

/// Same-sign Hamiltonian over several symmetric groups with pairwise ZZ couplings
/// between their occupations. The first group is the outermost tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricModel {
    pub groups: Vec<SymGroup>,
    pub couplings: Vec<(usize, usize, f64)>,
}

impl SymmetricModel {
    pub fn dims(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.count + 1).collect()
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Hamiltonian at transverse field x with per-group effective weights.
    pub fn hamiltonian_with(&self, x: f64, weights: &[f64]) -> Result<DenseOperator> {
        let dims = self.dims();
        let dim = self.dim();
        if dim > DIM_CAP {
            return invalid(format!("symmetric model dimension {dim} exceeds {DIM_CAP}"));
        }
        let mut h = DMatrix::zeros(dim, dim);
        for (k, g) in self.groups.iter().enumerate() {
            let (csz, csx) = dicke_ops(g.count);
            let local = csx * (-g.x_scale * x) - csz * weights[k];
            h += embed(&local, k, &dims);
        }
        for &(a, b, j) in &self.couplings {
            let (za, _) = dicke_ops(self.groups[a].count);
            let (zb, _) = dicke_ops(self.groups[b].count);
            h += embed_pair(&za, a, &zb, b, &dims) * j;
        }
        let labels = (0..dim).map(|i| self.label(i)).collect();
        DenseOperator::with_labels(h, BasisTag::Dicke, labels)
    }

    pub fn hamiltonian(&self, x: f64) -> Result<DenseOperator> {
        let w: Vec<f64> = self.groups.iter().map(|g| g.weight).collect();
        self.hamiltonian_with(x, &w)
    }

    /// Occupation count of each group for a basis index.
    pub fn counts(&self, mut index: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut c = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            c[k] = self.groups[k].count - index % dims[k];
            index /= dims[k];
        }
        c
    }

    fn label(&self, index: usize) -> String {
        self.groups
            .iter()
            .zip(self.counts(index))
            .map(|(g, c)| format!("{}{}", g.label, c))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Which subsystem forms the inner (fast) index of the symmetric same-sign block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerOrder {
    /// Outer R count, inner L count (blocks H_L^(r)).
    LInner,
    /// Outer L count, inner R count (blocks H_R^(l)).
    RInner,
}

/// Symmetric-subspace same-sign block of a uniform instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSameSign {
    pub op: DenseOperator,
    pub order: InnerOrder,
    pub m: usize,
    pub m_r: usize,
    pub w: f64,
    pub w_eff: f64,
    /// ZZ coupling between the L and R collective occupations.
    pub jzz_c: f64,
}

impl SymSameSign {
    /// Basis index of (L count, R count).
    pub fn index(&self, l: usize, r: usize) -> usize {
        match self.order {
            InnerOrder::LInner => (self.m_r - r) * (self.m + 1) + (self.m - l),
            InnerOrder::RInner => (self.m - l) * (self.m_r + 1) + (self.m_r - r),
        }
    }

    /// Indices with L count `l`, R count descending.
    pub fn r_block(&self, l: usize) -> Vec<usize> {
        (0..=self.m_r).rev().map(|r| self.index(l, r)).collect()
    }

    /// Indices with R count `r`, L count descending.
    pub fn l_block(&self, r: usize) -> Vec<usize> {
        (0..=self.m).rev().map(|l| self.index(l, r)).collect()
    }

    /// Permutation taking this ordering to the other one (new -> old).
    pub fn reorder_perm(&self) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.op.dim());
        match self.order {
            InnerOrder::LInner => {
                for l in (0..=self.m).rev() {
                    p.extend(self.r_block(l));
                }
            }
            InnerOrder::RInner => {
                for r in (0..=self.m_r).rev() {
                    p.extend(self.l_block(r));
                }
            }
        }
        p
    }
}

/// Same-sign block of a uniform instance restricted to the symmetric subspace.
pub fn sym_same_sign(inst: &GicInstance, x: f64, jxx: f64, order: InnerOrder) -> Result<SymSameSign> {
    let n = match inst.uniform_size() {
        Some(n) => n,
        None => return invalid("symmetric reduction needs uniform clique sizes"),
    };
    let w = match inst.uniform_weight() {
        Some(w) => w,
        None => return invalid("symmetric reduction needs uniform weights"),
    };
    let (m, m_r) = (inst.m_l(), inst.r_count);
    let nf = n as f64;
    let w_eff = w - (nf - 1.0) / 4.0 * jxx;
    let jzz_c = inst.jzz * f_c(inst.structure, n);
    let l = SymGroup { label: "L".into(), count: m, weight: w_eff, x_scale: nf.sqrt() };
    let r = SymGroup { label: "R".into(), count: m_r, weight: w, x_scale: 1.0 };
    let model = match order {
        InnerOrder::LInner => SymmetricModel { groups: vec![r, l], couplings: vec![(0, 1, jzz_c)] },
        InnerOrder::RInner => SymmetricModel { groups: vec![l, r], couplings: vec![(0, 1, jzz_c)] },
    };
    let op = model.hamiltonian(x)?;
    Ok(SymSameSign { op, order, m, m_r, w, w_eff, jzz_c })
}

/// Inner blocks of the symmetric same-sign block.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerBlocks {
    /// Block at outer count 0.
    pub base: DMatrix<f64>,
    /// Diagonal shift added per unit of outer count.
    pub shift: DMatrix<f64>,
    /// Blocks indexed by outer count 0, 1, ...
    pub blocks: Vec<DMatrix<f64>>,
}

/// `which = LInner` returns the H_L^(r) blocks, `RInner` the H_R^(l) blocks.
pub fn inner_blocks(h: &SymSameSign, which: InnerOrder) -> InnerBlocks {
    let outer = match which {
        InnerOrder::LInner => h.m_r,
        InnerOrder::RInner => h.m,
    };
    let blocks: Vec<DMatrix<f64>> = (0..=outer)
        .map(|k| {
            let idx = match which {
                InnerOrder::LInner => h.l_block(k),
                InnerOrder::RInner => h.r_block(k),
            };
            h.op.restrict(&idx).mat
        })
        .collect();
    let (inner, own_w) = match which {
        InnerOrder::LInner => (h.m, h.w),
        InnerOrder::RInner => (h.m_r, h.w_eff),
    };
    let shift = DMatrix::from_fn(inner + 1, inner + 1, |i, j| {
        if i == j {
            (inner - i) as f64 * h.jzz_c - own_w
        } else {
            0.0
        }
    });
    InnerBlocks { base: blocks[0].clone(), shift, blocks }
}

/// f^C: share of a clique's 1c occupation seen by an R vertex.
pub fn f_c(structure: Structure, n: usize) -> f64 {
    match structure {
        Structure::Disjoint => 1.0,
        Structure::Shared => (n as f64 - 1.0) / n as f64,
    }
}

/// f^Q: share of the q state seen by an R vertex.
pub fn f_q(structure: Structure, n: usize) -> f64 {
    match structure {
        Structure::Disjoint => 1.0,
        Structure::Shared => 1.0 / n as f64,
    }
}

/// Orthogonal change of basis for one clique's singleton space.
///
/// Rows: empty, then the clique vertices in order (shared vertex last).
/// Columns: 0c (empty), 1c (uniform), then spin-0 states. In the shared
/// structure the first spin-0 state is q, the one that overlaps the shared vertex.
pub fn clique_transform(n: usize, shared: bool) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(n + 1, n + 1);
    u[(0, 0)] = 1.0;
    let nf = n as f64;
    for v in 1..=n {
        u[(v, 1)] = 1.0 / nf.sqrt();
    }
    let mut col = 2;
    let helmert_over = if shared && n >= 2 {
        let inner = (nf - 1.0).sqrt();
        for v in 1..n {
            u[(v, 2)] = -(1.0 / nf).sqrt() / inner;
        }
        u[(n, 2)] = ((nf - 1.0) / nf).sqrt();
        col = 3;
        n - 1
    } else {
        n
    };
    for k in 1..helmert_over {
        let kf = k as f64;
        let norm = (kf * (kf + 1.0)).sqrt();
        for v in 1..=k {
            u[(v, col)] = 1.0 / norm;
        }
        u[(k + 1, col)] = -kf / norm;
        col += 1;
    }
    u
}

/// (x) U_i (x) I_R on the low-energy basis of the instance.
pub fn angular_transform(inst: &GicInstance) -> Result<DMatrix<f64>> {
    let dim = LowEnergyBasis::from_instance(inst).dim();
    if dim > DIM_CAP {
        return invalid(format!("low-energy dimension {dim} exceeds {DIM_CAP}"));
    }
    let mut u = DMatrix::identity(1, 1);
    for (i, c) in inst.cliques.iter().enumerate() {
        u = u.kronecker(&clique_transform(c.size, inst.shared_vertex(i).is_some()));
    }
    Ok(u.kronecker(&DMatrix::identity(1 << inst.r_count, 1 << inst.r_count)))
}

struct CliqueConsts {
    n: f64,
    w_eff: f64,
    theta: f64,
    fc: f64,
    fq: f64,
    shared: bool,
}

fn clique_consts(inst: &GicInstance, x: f64, jxx: f64) -> Vec<CliqueConsts> {
    let _ = x;
    inst.cliques
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let n = c.size as f64;
            let shared = inst.shared_vertex(i).is_some();
            let st = if shared { Structure::Shared } else { Structure::Disjoint };
            CliqueConsts {
                n,
                w_eff: c.weight - (n - 1.0) / 4.0 * jxx,
                theta: -(c.weight + jxx / 4.0),
                fc: f_c(st, c.size),
                fq: f_q(st, c.size),
                shared,
            }
        })
        .collect()
}

/// Low-energy Hamiltonian in the per-clique angular basis, assembled from the
/// closed-form block entries (no transform is applied).
pub fn assemble_angular(inst: &GicInstance, x: f64, jxx: f64) -> Result<DenseOperator> {
    let basis = LowEnergyBasis::from_instance(inst);
    let dim = basis.dim();
    if dim > DIM_CAP {
        return invalid(format!("low-energy dimension {dim} exceeds {DIM_CAP}"));
    }
    let consts = clique_consts(inst, x, jxx);
    let m = inst.m_l();
    let jzz = inst.jzz;
    let mut h = DMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    for s in 0..dim {
        let d = basis.digits(s);
        let r_occ = d[m..].iter().filter(|&&b| b == 1).count() as f64;
        let mut diag = 0.0;
        let mut attach = 0.0;
        for (i, c) in consts.iter().enumerate() {
            match d[i] {
                0 => {}
                1 => {
                    diag -= c.w_eff;
                    attach += c.fc;
                }
                2 if c.shared => {
                    diag += c.theta;
                    attach += c.fq;
                }
                _ => {
                    diag += c.theta;
                    attach += 1.0;
                }
            }
        }
        diag -= inst.r_weight * r_occ;
        diag += jzz * r_occ * attach;
        h[(s, s)] = diag;
        let mut e = d.clone();
        for (i, c) in consts.iter().enumerate() {
            let orig = d[i];
            match orig {
                0 | 1 => {
                    e[i] = 1 - orig;
                    h[(basis.index(&e), s)] += -0.5 * c.n.sqrt() * x;
                }
                _ => {}
            }
            if c.shared && c.n >= 2.0 && (orig == 1 || orig == 2) {
                e[i] = 3 - orig;
                h[(basis.index(&e), s)] += -jzz * (c.n - 1.0).sqrt() / c.n * r_occ;
            }
            e[i] = orig;
        }
        for k in m..d.len() {
            e[k] = 1 - d[k];
            h[(basis.index(&e), s)] += -0.5 * x;
            e[k] = d[k];
        }
        labels.push(angular_label(inst, &d));
    }
    DenseOperator::with_labels(h, BasisTag::Angular, labels)
}

fn local_label(shared: bool, k: usize) -> String {
    match k {
        0 => "0c".into(),
        1 => "1c".into(),
        2 if shared => "q".into(),
        _ => format!("s{}", if shared { k - 2 } else { k - 1 }),
    }
}

fn angular_label(inst: &GicInstance, d: &[usize]) -> String {
    let m = inst.m_l();
    let l: Vec<String> = (0..m)
        .map(|i| local_label(inst.shared_vertex(i).is_some(), d[i]))
        .collect();
    let r: String = d[m..].iter().map(|b| b.to_string()).collect();
    format!("{}|{}", l.join(","), r)
}

/// Sector layout of the contracted angular space: every clique in {1c, 0c} or
/// in its representative spin-0 state q, R bits free.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedLayout {
    /// Columns of [`angular_transform`] in layout order.
    pub columns: Vec<usize>,
    pub labels: Vec<String>,
    /// (cliques in q, start, length), C first, then intermediate sectors by size, Q last.
    pub sectors: Vec<(Vec<usize>, usize, usize)>,
}

impl ContractedLayout {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn sector(&self, in_q: &[usize]) -> Option<(usize, usize)> {
        self.sectors.iter().find(|s| s.0 == in_q).map(|s| (s.1, s.2))
    }
}

fn subsets_by_size(items: &[usize]) -> Vec<Vec<usize>> {
    let k = items.len();
    let mut all: Vec<Vec<usize>> = (0..1usize << k)
        .map(|mask| (0..k).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect())
        .collect();
    all.sort_by(|a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then(a.cmp(b)));
    all
}

pub fn contracted_layout(inst: &GicInstance) -> ContractedLayout {
    let basis = LowEnergyBasis::from_instance(inst);
    let m = inst.m_l();
    let with_q: Vec<usize> = (0..m).filter(|&i| inst.cliques[i].size >= 2).collect();
    let mut columns = vec![];
    let mut labels = vec![];
    let mut sectors = vec![];
    for s in subsets_by_size(&with_q) {
        let start = columns.len();
        let choices: Vec<Vec<usize>> = (0..m)
            .map(|i| if s.contains(&i) { vec![2] } else { vec![1, 0] })
            .chain((0..inst.r_count).map(|_| vec![1, 0]))
            .collect();
        let total: usize = choices.iter().map(|c| c.len()).product();
        let mut digits = vec![0; choices.len()];
        for mut idx in 0..total {
            for k in (0..choices.len()).rev() {
                digits[k] = choices[k][idx % choices[k].len()];
                idx /= choices[k].len();
            }
            columns.push(basis.index(&digits));
            labels.push(angular_label(inst, &digits));
        }
        sectors.push((s, start, columns.len() - start));
    }
    ContractedLayout { columns, labels, sectors }
}

/// Block-structured Hamiltonian on the contracted angular space.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSet {
    /// Same-sign block: every clique in {1c, 0c}.
    pub h_c: DenseOperator,
    /// All-spin-0 block, absent when some clique has size 1.
    pub h_q: Option<DenseOperator>,
    /// Intermediate blocks keyed by the cliques sitting in q.
    pub h_w: Vec<(Vec<usize>, DenseOperator)>,
    /// Off-diagonal coupling between sectors, on the full contracted space
    /// in layout order. Exactly zero for the disjoint structure.
    pub h_inter: DenseOperator,
    pub f_c: Vec<f64>,
    pub f_q: Vec<f64>,
    pub layout: ContractedLayout,
}

impl BlockSet {
    /// Direct sum of the sector blocks plus the inter-sector coupling.
    pub fn assembled(&self) -> DenseOperator {
        let dim = self.layout.dim();
        let mut h = self.h_inter.mat.clone();
        for (s, start, len) in &self.layout.sectors {
            let block = self.block(s).unwrap();
            h.view_mut((*start, *start), (*len, *len)).copy_from(&block.mat);
        }
        debug_assert_eq!(h.nrows(), dim);
        DenseOperator::with_labels(h, BasisTag::Angular, self.layout.labels.clone()).unwrap()
    }

    pub fn block(&self, in_q: &[usize]) -> Option<&DenseOperator> {
        if in_q.is_empty() {
            return Some(&self.h_c);
        }
        if let Some((s, op)) = self.h_w.iter().find(|(s, _)| s == in_q) {
            let _ = s;
            return Some(op);
        }
        match &self.h_q {
            Some(q) if in_q.len() == self.f_c.len() => Some(q),
            _ => None,
        }
    }
}

/// Sector block: cliques in `in_q` contribute theta and an R shift, the rest
/// are two-level factors; R vertices are two-level factors.
fn sector_block(inst: &GicInstance, consts: &[CliqueConsts], in_q: &[usize], x: f64) -> DMatrix<f64> {
    let free: Vec<usize> = (0..inst.m_l()).filter(|i| !in_q.contains(i)).collect();
    let dims = vec![2; free.len() + inst.r_count];
    let dim: usize = dims.iter().product();
    let mut h = DMatrix::zeros(dim, dim);
    let offset: f64 = in_q.iter().map(|&i| consts[i].theta).sum();
    let r_shift: f64 = in_q.iter().map(|&i| inst.jzz * consts[i].fq).sum();
    for (k, &i) in free.iter().enumerate() {
        let c = &consts[i];
        h += embed(&b_matrix(c.w_eff, c.n.sqrt() * x), k, &dims);
    }
    let z = shz();
    for j in 0..inst.r_count {
        let site = free.len() + j;
        h += embed(&b_matrix(inst.r_weight - r_shift, x), site, &dims);
        for (k, &i) in free.iter().enumerate() {
            h += embed_pair(&z, k, &z, site, &dims) * (inst.jzz * consts[i].fc);
        }
    }
    for d in 0..dim {
        h[(d, d)] += offset;
    }
    h
}

/// Block decomposition of the instance's low-energy Hamiltonian.
pub fn block_hamiltonians(inst: &GicInstance, x: f64, jxx: f64) -> Result<BlockSet> {
    let c_dim = 1usize.checked_shl((inst.m_l() + inst.r_count) as u32).unwrap_or(usize::MAX);
    if inst.m_l() + inst.r_count >= 64 || c_dim > DIM_CAP {
        return invalid(format!("contracted dimension 2^{} exceeds {DIM_CAP}", inst.m_l() + inst.r_count));
    }
    let layout = contracted_layout(inst);
    if layout.dim() > DIM_CAP {
        return invalid(format!("contracted dimension {} exceeds {DIM_CAP}", layout.dim()));
    }
    let consts = clique_consts(inst, x, jxx);
    let mut h_c = None;
    let mut h_q = None;
    let mut h_w = vec![];
    let m = inst.m_l();
    let all_q = inst.cliques.iter().all(|c| c.size >= 2);
    for (s, start, len) in &layout.sectors {
        let labels = layout.labels[*start..start + len].to_vec();
        let op = DenseOperator::with_labels(sector_block(inst, &consts, s, x), BasisTag::Angular, labels)?;
        if s.is_empty() {
            h_c = Some(op);
        } else if all_q && s.len() == m {
            h_q = Some(op);
        } else {
            h_w.push((s.clone(), op));
        }
    }
    // Inter-sector coupling: 1c <-> q on one clique, weighted by the R occupation.
    let dim = layout.dim();
    let mut inter = DMatrix::zeros(dim, dim);
    let basis = LowEnergyBasis::from_instance(inst);
    let pos: std::collections::HashMap<usize, usize> =
        layout.columns.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    for (p, &col) in layout.columns.iter().enumerate() {
        let d = basis.digits(col);
        let r_occ = d[m..].iter().filter(|&&b| b == 1).count() as f64;
        for (i, c) in consts.iter().enumerate() {
            if c.shared && c.n >= 2.0 && d[i] == 1 {
                let mut e = d.clone();
                e[i] = 2;
                let q = pos[&basis.index(&e)];
                let v = -inst.jzz * (c.n - 1.0).sqrt() / c.n * r_occ;
                inter[(p, q)] = v;
                inter[(q, p)] = v;
            }
        }
    }
    let h_inter = DenseOperator::with_labels(inter, BasisTag::Angular, layout.labels.clone())?;
    Ok(BlockSet {
        h_c: h_c.expect("layout always has the same-sign sector"),
        h_q,
        h_w,
        h_inter,
        f_c: consts.iter().map(|c| c.fc).collect(),
        f_q: consts.iter().map(|c| c.fq).collect(),
        layout,
    })
}

/// Position of the spin-1/2 versus spin-0 levels of one clique along the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOrderReport {
    /// Stage-2 crossover of beta0 and theta; `None` when alpha = 0 (never reverses).
    pub x_c: Option<f64>,
    /// True when the reversal happens during Stage 1 (x_c > gamma2).
    pub in_stage1: Option<bool>,
    /// (x, beta0, theta) per requested x on the main schedule.
    pub samples: Vec<(f64, f64, f64)>,
    /// Lowest energy of each sector with k cliques in spin-0 states, k = 0..=m,
    /// at the last sample (bare L subsystem, R empty).
    pub sector_energies: Vec<f64>,
}

pub fn block_order(sizes: &[usize], w: f64, xs: &[f64], gamma2: f64, alpha: f64) -> Result<BlockOrderReport> {
    let n = match sizes.first() {
        Some(&n) if sizes.iter().all(|&s| s == n) => n,
        _ => return invalid("block ordering needs uniform clique sizes"),
    };
    let x_c = if alpha == 0.0 { None } else { Some(w * crossover_x(alpha)?) };
    let in_stage1 = x_c.map(|xc| xc > gamma2);
    let jxx_at = |x: f64| if x >= gamma2 { alpha * gamma2 } else { alpha * x };
    let mut samples = vec![];
    for &x in xs {
        let r = clique_reduce(n, w, x, jxx_at(x))?;
        samples.push((x, r.eigen().beta0, r.theta));
    }
    let m = sizes.len() as f64;
    let sector_energies = match samples.last() {
        Some(&(_, b, t)) => (0..=sizes.len()).map(|k| k as f64 * t + (m - k as f64) * b).collect(),
        None => vec![],
    };
    Ok(BlockOrderReport { x_c, in_stage1, samples, sector_energies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, orthonormality_defect, sym_eigen};

    #[test]
    fn b_eigen_examples() {
        let e = b_eigen(1.0, 0.0);
        assert_eq!((e.beta0, e.beta1, e.gamma), (-1.0, 0.0, 0.0));
        let e = b_eigen(0.0, 2.0);
        assert_eq!((e.beta0, e.beta1, e.gamma), (-1.0, 1.0, 1.0));
        let e = b_eigen(-1.0, 0.0);
        assert!(e.gamma.is_infinite() && e.flipped);
        assert_eq!(b_ground_vector(-1.0, 0.0), [0.0, 1.0]);
    }

    #[test]
    fn ground_vector_is_eigenvector() {
        for &(w, x) in &[(1.0, 1.0), (-2.0, 0.3), (0.5, -1.0), (-1e-9, 1e-12)] {
            let v = b_ground_vector(w, x);
            let b = b_matrix(w, x);
            let e = b_eigen(w, x).beta0;
            let r0 = b[(0, 0)] * v[0] + b[(0, 1)] * v[1] - e * v[0];
            let r1 = b[(1, 0)] * v[0] + b[(1, 1)] * v[1] - e * v[1];
            assert!(r0.abs() < 1e-12 && r1.abs() < 1e-12, "{w} {x}");
        }
    }

    #[test]
    fn clique_transform_is_orthogonal() {
        for n in 1..7 {
            for shared in [false, true] {
                let u = clique_transform(n, shared);
                assert!(orthonormality_defect(&u) < 1e-14, "n={n} shared={shared}");
            }
        }
    }

    #[test]
    fn crossover_limits() {
        assert_eq!(crossover_x(0.0).unwrap(), 0.0);
        assert!(crossover_x(2.0).is_err());
        assert!((alpha_max(1.0).unwrap() - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_same_sign_m1_is_b() {
        let op = symmetric_same_sign(1, 4, 0.3, 0.7);
        assert!(max_abs_diff(&op.mat, &b_matrix(0.3, 1.4)) < 1e-15);
    }

    #[test]
    fn inner_orders_share_spectrum() {
        let inst = crate::instance::make_gdis(2, &[4, 4], 3, 1.0, Some(2.5), None).unwrap();
        let a = sym_same_sign(&inst, 0.8, 1.1, InnerOrder::LInner).unwrap();
        let b = sym_same_sign(&inst, 0.8, 1.1, InnerOrder::RInner).unwrap();
        let ea = sym_eigen(&a.op, None).unwrap().values;
        let eb = sym_eigen(&b.op, None).unwrap().values;
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-12);
        }
        let p = a.reorder_perm();
        assert!(max_abs_diff(&a.op.restrict(&p).mat, &b.op.mat) < 1e-15);
    }

    #[test]
    fn contracted_layout_v3() {
        let inst = crate::instance::make_gshare(1, &[3], 1, 1.0, None, None).unwrap();
        let l = contracted_layout(&inst);
        assert_eq!(l.labels, vec!["1c|1", "1c|0", "0c|1", "0c|0", "q|1", "q|0"]);
        assert_eq!(l.sectors.len(), 2);
    }
}
