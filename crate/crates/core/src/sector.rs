//! Clique-symmetric sector of the low-energy space.
//!
//! Inside each clique, vertices with equal weight and identical neighbours
//! outside the clique are interchangeable. When the XX couplers are uniform
//! between every pair of such classes, the span of "empty or uniform over one
//! class" states per clique (times free leftover bits) is invariant under the
//! low-energy Hamiltonian. The all-empty initial state lies in it, so the
//! tracked ground state never leaves it.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{bit_label, problem_energy, Convention, LowEnergyBasis};
use crate::instance::{EdgeClass, ExplicitGraph, GicInstance};
use crate::linalg::{BasisTag, DenseOperator, DIM_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub basis: LowEnergyBasis,
    /// Per clique, its vertex classes ordered by smallest vertex.
    pub classes: Vec<Vec<Vec<usize>>>,
    /// Per clique, whether each ordered class pair carries XX couplers.
    xx_full: Vec<Vec<Vec<bool>>>,
}

impl SectorBasis {
    pub fn new(graph: &ExplicitGraph, basis: LowEnergyBasis) -> Result<Self> {
        graph.validate()?;
        if basis.vertex_count != graph.vertex_count() {
            return invalid("basis and graph vertex counts differ");
        }
        let adj = graph.adjacency();
        let class_of = |e: (usize, usize)| -> Option<EdgeClass> {
            graph
                .edges
                .iter()
                .find(|&&(a, b, _)| (a, b) == e || (b, a) == e)
                .map(|t| t.2)
        };
        let mut classes = vec![];
        let mut xx_full = vec![];
        for clique in &basis.cliques {
            let mut groups: BTreeMap<(u64, Vec<(usize, EdgeClass)>), Vec<usize>> = BTreeMap::new();
            for &v in clique {
                let ext: Vec<(usize, EdgeClass)> = (0..graph.vertex_count())
                    .filter(|u| adj[v][*u] && !clique.contains(u))
                    .map(|u| (u, class_of((v, u)).unwrap()))
                    .collect();
                groups.entry((graph.weights[v].to_bits(), ext)).or_default().push(v);
            }
            let mut cls: Vec<Vec<usize>> = groups.into_values().collect();
            cls.sort_by_key(|c| c[0]);
            let k = cls.len();
            let mut full = vec![vec![false; k]; k];
            for a in 0..k {
                for b in a..k {
                    let count = graph
                        .xx_edges
                        .iter()
                        .filter(|&&(u, v)| {
                            (cls[a].contains(&u) && cls[b].contains(&v))
                                || (cls[a].contains(&v) && cls[b].contains(&u))
                        })
                        .count();
                    let pairs = if a == b {
                        cls[a].len() * (cls[a].len() - 1) / 2
                    } else {
                        cls[a].len() * cls[b].len()
                    };
                    if count != 0 && count != pairs {
                        return invalid("XX couplers are not uniform between vertex classes of a clique");
                    }
                    full[a][b] = count != 0;
                    full[b][a] = count != 0;
                }
            }
            classes.push(cls);
            xx_full.push(full);
        }
        let s = Self { basis, classes, xx_full };
        let dim = s.radices().iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        match dim {
            Some(d) if d <= DIM_CAP => Ok(s),
            _ => Err(Error::DimensionCap { dim: dim.unwrap_or(usize::MAX), cap: DIM_CAP }),
        }
    }

    pub fn from_instance(inst: &GicInstance) -> Result<Self> {
        Self::new(&inst.expand(), LowEnergyBasis::from_instance(inst))
    }

    pub fn radices(&self) -> Vec<usize> {
        self.classes
            .iter()
            .map(|c| c.len() + 1)
            .chain(self.basis.leftover.iter().map(|_| 2))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.radices().iter().product()
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

    /// Occupation of a representative configuration (first vertex of each class).
    pub fn representative(&self, digits: &[usize]) -> Vec<bool> {
        let mut occ = vec![false; self.basis.vertex_count];
        for (c, &d) in self.classes.iter().zip(digits) {
            if d > 0 {
                occ[c[d - 1][0]] = true;
            }
        }
        let nc = self.classes.len();
        for (k, &v) in self.basis.leftover.iter().enumerate() {
            occ[v] = digits[nc + k] == 1;
        }
        occ
    }

    /// Labels: one token per clique (`-` empty, `cK` class K), then leftover bits.
    pub fn labels(&self) -> Vec<String> {
        let nc = self.classes.len();
        (0..self.dim())
            .map(|i| {
                let d = self.digits(i);
                let cl: Vec<String> = d[..nc]
                    .iter()
                    .map(|&k| if k == 0 { "-".to_string() } else { format!("c{}", k - 1) })
                    .collect();
                let bits: String = d[nc..].iter().map(|b| b.to_string()).collect();
                format!("{}|{}", cl.join(","), bits)
            })
            .collect()
    }

    /// Low-energy Hamiltonian restricted to the sector, built directly.
    pub fn hamiltonian(&self, graph: &ExplicitGraph, x: f64, jxx: f64, p: f64, conv: Convention) -> Result<DenseOperator> {
        let dim = self.dim();
        let tx = -x * conv.x_coeff();
        let txx = jxx * conv.xx_coeff();
        let nc = self.classes.len();
        let mut h = DMatrix::zeros(dim, dim);
        for s in 0..dim {
            let d = self.digits(s);
            let mut diag = p * problem_energy(graph, &self.representative(&d));
            for (c, &k) in d[..nc].iter().enumerate() {
                if k > 0 && self.xx_full[c][k - 1][k - 1] {
                    diag += txx * (self.classes[c][k - 1].len() as f64 - 1.0);
                }
            }
            h[(s, s)] = diag;
            let mut e = d.clone();
            for c in 0..nc {
                let orig = d[c];
                if orig == 0 {
                    for k in 1..=self.classes[c].len() {
                        e[c] = k;
                        h[(self.index(&e), s)] += tx * (self.classes[c][k - 1].len() as f64).sqrt();
                    }
                } else {
                    let size = self.classes[c][orig - 1].len() as f64;
                    e[c] = 0;
                    h[(self.index(&e), s)] += tx * size.sqrt();
                    for k in 1..=self.classes[c].len() {
                        if k != orig && self.xx_full[c][orig - 1][k - 1] {
                            e[c] = k;
                            let other = self.classes[c][k - 1].len() as f64;
                            h[(self.index(&e), s)] += txx * (size * other).sqrt();
                        }
                    }
                }
                e[c] = orig;
            }
            for k in nc..d.len() {
                e[k] = 1 - d[k];
                h[(self.index(&e), s)] += tx;
                e[k] = d[k];
            }
        }
        DenseOperator::with_labels(h, BasisTag::Custom, self.labels())
    }

    /// For each low-energy state: its sector index and the amplitude of the
    /// sector basis vector on it. Every low-energy state belongs to exactly one.
    pub fn low_energy_map(&self) -> Vec<(usize, f64)> {
        let nc = self.classes.len();
        let mut which: Vec<Vec<(usize, f64)>> = self
            .basis
            .cliques
            .iter()
            .map(|c| vec![(0, 1.0); c.len() + 1])
            .collect();
        for (c, cls) in self.classes.iter().enumerate() {
            for (k, members) in cls.iter().enumerate() {
                let amp = 1.0 / (members.len() as f64).sqrt();
                for &v in members {
                    let slot = self.basis.cliques[c].iter().position(|&u| u == v).unwrap() + 1;
                    which[c][slot] = (k + 1, amp);
                }
            }
        }
        (0..self.basis.dim())
            .map(|i| {
                let d = self.basis.digits(i);
                let mut sd = d.clone();
                let mut amp = 1.0;
                for c in 0..nc {
                    let (k, a) = which[c][d[c]];
                    sd[c] = k;
                    amp *= a;
                }
                (self.index(&sd), amp)
            })
            .collect()
    }

    /// Isometry from the sector into the low-energy space (columns = sector states).
    pub fn embedding(&self) -> DMatrix<f64> {
        let map = self.low_energy_map();
        let mut u = DMatrix::zeros(map.len(), self.dim());
        for (i, &(s, a)) in map.iter().enumerate() {
            u[(i, s)] = a;
        }
        u
    }

    /// Low-energy amplitudes of a sector vector.
    pub fn lift(&self, psi: &DVector<f64>) -> DVector<f64> {
        let map = self.low_energy_map();
        DVector::from_iterator(map.len(), map.iter().map(|&(s, a)| a * psi[s]))
    }

    /// Representative bit-string label (vertex order) of each sector state.
    pub fn representative_labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| bit_label(&self.representative(&self.digits(i)))).collect()
    }
}
