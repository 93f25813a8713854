//! Structured MIS instances (independent cliques against a right-hand vertex set),
//! their explicit graphs, and seed-based clique identification.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// How the cliques attach to the right-hand vertex set R.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Every clique vertex is adjacent to every R vertex.
    Disjoint,
    /// One vertex per clique is left unattached to R and belongs to the global minimum.
    Shared,
}

impl Structure {
    pub fn as_str(self) -> &'static str {
        match self {
            Structure::Disjoint => "disjoint",
            Structure::Shared => "shared",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "disjoint" | "dis" => Ok(Structure::Disjoint),
            "shared" | "share" => Ok(Structure::Shared),
            _ => invalid(format!("unknown structure '{s}' (expected disjoint or shared)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliqueSpec {
    pub size: usize,
    pub weight: f64,
    pub shares_with_gm: bool,
}

/// An instance built from `m_l` independent cliques and `m_r` extra vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct GicInstance {
    pub cliques: Vec<CliqueSpec>,
    pub r_count: usize,
    pub r_weight: f64,
    pub structure: Structure,
    pub jzz: f64,
    /// Penalty on intra-clique edges. `None` means "derive from the schedule",
    /// see [`GicInstance::jzz_clique_for`].
    pub jzz_clique: Option<f64>,
}

/// 1 + (sqrt(n_c) + 1) / 2.
pub fn default_jzz(n_c: usize) -> f64 {
    1.0 + ((n_c as f64).sqrt() + 1.0) / 2.0
}

fn build(
    structure: Structure,
    m_l: usize,
    sizes: &[usize],
    m_r: usize,
    w: f64,
    jzz: Option<f64>,
    jzz_clique: Option<f64>,
) -> Result<GicInstance> {
    if m_l == 0 {
        return invalid("m_l must be at least 1");
    }
    if sizes.len() != m_l {
        return invalid(format!("expected {m_l} clique sizes, got {}", sizes.len()));
    }
    if sizes.iter().any(|&n| n == 0) {
        return invalid("clique sizes must be at least 1");
    }
    if !(w > 0.0) || !w.is_finite() {
        return invalid(format!("weight must be positive, got {w}"));
    }
    let n_c = *sizes.iter().max().unwrap();
    let jzz = jzz.unwrap_or_else(|| default_jzz(n_c));
    if !(jzz > 0.0) {
        return invalid(format!("jzz must be positive, got {jzz}"));
    }
    if let Some(p) = jzz_clique {
        if !(p > 0.0) {
            return invalid(format!("jzz_clique must be positive, got {p}"));
        }
    }
    let shares = structure == Structure::Shared;
    Ok(GicInstance {
        cliques: sizes
            .iter()
            .map(|&size| CliqueSpec { size, weight: w, shares_with_gm: shares })
            .collect(),
        r_count: m_r,
        r_weight: w,
        structure,
        jzz,
        jzz_clique,
    })
}

/// Disjoint-structure instance. `jzz = None` selects [`default_jzz`] of the largest clique.
pub fn make_gdis(
    m_l: usize,
    sizes: &[usize],
    m_r: usize,
    w: f64,
    jzz: Option<f64>,
    jzz_clique: Option<f64>,
) -> Result<GicInstance> {
    build(Structure::Disjoint, m_l, sizes, m_r, w, jzz, jzz_clique)
}

/// Shared-structure instance: the last vertex of each clique is not attached to R.
pub fn make_gshare(
    m_l: usize,
    sizes: &[usize],
    m_r: usize,
    w: f64,
    jzz: Option<f64>,
    jzz_clique: Option<f64>,
) -> Result<GicInstance> {
    build(Structure::Shared, m_l, sizes, m_r, w, jzz, jzz_clique)
}

impl GicInstance {
    pub fn m_l(&self) -> usize {
        self.cliques.len()
    }

    /// Size of the global minimum.
    pub fn m_g(&self) -> usize {
        match self.structure {
            Structure::Disjoint => self.r_count,
            Structure::Shared => self.m_l() + self.r_count,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cliques.iter().map(|c| c.size).collect()
    }

    pub fn max_size(&self) -> usize {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    pub fn min_size(&self) -> usize {
        self.sizes().into_iter().min().unwrap_or(0)
    }

    /// Common clique size, if all cliques agree.
    pub fn uniform_size(&self) -> Option<usize> {
        let n = self.cliques.first()?.size;
        self.cliques.iter().all(|c| c.size == n).then_some(n)
    }

    /// Common vertex weight, if every vertex has the same weight.
    pub fn uniform_weight(&self) -> Option<f64> {
        let w = self.r_weight;
        self.cliques.iter().all(|c| c.weight == w).then_some(w)
    }

    /// Number of degenerate local minima (one vertex picked per clique).
    pub fn degeneracy(&self) -> u128 {
        self.cliques.iter().map(|c| c.size as u128).product()
    }

    pub fn vertex_count(&self) -> usize {
        self.cliques.iter().map(|c| c.size).sum::<usize>() + self.r_count
    }

    /// Sum of sqrt(n_i) exceeds m_g: the transverse-field-only schedule meets an anti-crossing.
    pub fn anti_crossing_bearing(&self) -> bool {
        let s: f64 = self.cliques.iter().map(|c| (c.size as f64).sqrt()).sum();
        s > self.m_g() as f64
    }

    /// Clique penalty: the stored value, or 50 (gamma1 + jxx + m_g).
    pub fn jzz_clique_for(&self, gamma1: f64, jxx: f64) -> f64 {
        self.jzz_clique
            .unwrap_or(50.0 * (gamma1 + jxx + self.m_g() as f64))
    }

    /// First vertex index of each clique, then the first R index.
    pub fn offsets(&self) -> (Vec<usize>, usize) {
        let mut offs = Vec::with_capacity(self.m_l());
        let mut at = 0;
        for c in &self.cliques {
            offs.push(at);
            at += c.size;
        }
        (offs, at)
    }

    /// Index of the shared vertex of clique `i` (last in its clique), shared structure only.
    pub fn shared_vertex(&self, i: usize) -> Option<usize> {
        let (offs, _) = self.offsets();
        let c = &self.cliques[i];
        (self.structure == Structure::Shared && c.shares_with_gm).then(|| offs[i] + c.size - 1)
    }

    /// Vertices of the global minimum: shared vertices (shared structure) then R.
    pub fn gm_vertices(&self) -> Vec<usize> {
        let (_, r0) = self.offsets();
        let mut gm: Vec<usize> = (0..self.m_l()).filter_map(|i| self.shared_vertex(i)).collect();
        gm.extend(r0..r0 + self.r_count);
        gm
    }

    /// Explicit graph with the given clique penalty.
    pub fn expand_with(&self, jzz_clique: f64) -> ExplicitGraph {
        let (offs, r0) = self.offsets();
        let n = r0 + self.r_count;
        let mut weights = Vec::with_capacity(n);
        for c in &self.cliques {
            weights.extend(std::iter::repeat(c.weight).take(c.size));
        }
        weights.extend(std::iter::repeat(self.r_weight).take(self.r_count));

        let mut edges = Vec::new();
        let mut xx_edges = Vec::new();
        for (i, c) in self.cliques.iter().enumerate() {
            for a in 0..c.size {
                for b in a + 1..c.size {
                    edges.push((offs[i] + a, offs[i] + b, EdgeClass::Clique));
                    xx_edges.push((offs[i] + a, offs[i] + b));
                }
            }
        }
        for (i, c) in self.cliques.iter().enumerate() {
            let attached = if self.shared_vertex(i).is_some() { c.size - 1 } else { c.size };
            for a in 0..attached {
                for r in 0..self.r_count {
                    edges.push((offs[i] + a, r0 + r, EdgeClass::Plain));
                }
            }
        }
        ExplicitGraph { weights, edges, xx_edges, jzz: self.jzz, jzz_clique }
    }

    /// Explicit graph; an unset clique penalty falls back to `50 (jzz + m_g)`,
    /// which only matters for full computational-basis builds.
    pub fn expand(&self) -> ExplicitGraph {
        let p = self.jzz_clique.unwrap_or(50.0 * (self.jzz + self.m_g() as f64));
        self.expand_with(p)
    }
}

/// Coupling class of an edge: intra-clique penalty or ordinary MIS edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeClass {
    Clique,
    Plain,
}

/// Vertex/edge lists with ZZ couplings and the XX driver edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitGraph {
    pub weights: Vec<f64>,
    pub edges: Vec<(usize, usize, EdgeClass)>,
    pub xx_edges: Vec<(usize, usize)>,
    /// ZZ coupling on plain edges.
    pub jzz: f64,
    /// ZZ coupling on clique edges.
    pub jzz_clique: f64,
}

impl ExplicitGraph {
    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn coupling(&self, class: EdgeClass) -> f64 {
        match class {
            EdgeClass::Clique => self.jzz_clique,
            EdgeClass::Plain => self.jzz,
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.vertex_count();
        let mut adj = vec![vec![false; n]; n];
        for &(a, b, _) in &self.edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        adj
    }

    /// Checks the structural invariants: no self-loops, indices in range,
    /// and every XX edge is a clique edge.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        for &(a, b, _) in &self.edges {
            if a == b {
                return invalid(format!("self-loop on vertex {a}"));
            }
            if a >= n || b >= n {
                return invalid(format!("edge ({a},{b}) out of range for {n} vertices"));
            }
        }
        let clique: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .filter(|e| e.2 == EdgeClass::Clique)
            .map(|&(a, b, _)| (a.min(b), a.max(b)))
            .collect();
        for &(a, b) in &self.xx_edges {
            if !clique.contains(&(a.min(b), a.max(b))) {
                return invalid(format!("XX edge ({a},{b}) is not a clique edge"));
            }
        }
        Ok(())
    }

    /// Copy with the XX driver removed.
    pub fn without_driver(&self) -> ExplicitGraph {
        ExplicitGraph { xx_edges: vec![], ..self.clone() }
    }
}

/// Cliques recovered from a seed plus the vertices left over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriverPartition {
    pub cliques: Vec<Vec<usize>>,
    pub leftover: Vec<usize>,
}

/// Recovers one clique per seed vertex: the seed vertex plus every neighbour of it
/// that is not adjacent to any other seed vertex.
pub fn identify_cliques(graph: &ExplicitGraph, seed: &[usize]) -> Result<DriverPartition> {
    let n = graph.vertex_count();
    let adj = graph.adjacency();
    if let Some(&v) = seed.iter().find(|&&v| v >= n) {
        return invalid(format!("seed vertex {v} out of range"));
    }
    let seed_set: BTreeSet<usize> = seed.iter().copied().collect();
    if seed_set.len() != seed.len() {
        return invalid("seed contains repeated vertices");
    }
    for (i, &a) in seed.iter().enumerate() {
        for &b in &seed[i + 1..] {
            if adj[a][b] {
                return invalid(format!("seed is not independent: {a} and {b} are adjacent"));
            }
        }
    }
    if let Some(u) = (0..n).find(|&u| !seed_set.contains(&u) && !seed.iter().any(|&s| adj[u][s])) {
        return invalid(format!("seed is not maximal: vertex {u} could be added"));
    }

    let mut cliques = Vec::with_capacity(seed.len());
    for &v in seed {
        let mut c: Vec<usize> = (0..n)
            .filter(|&u| {
                u == v || (adj[u][v] && seed.iter().all(|&s| s == v || !adj[u][s]))
            })
            .collect();
        c.sort_unstable();
        cliques.push(c);
    }
    let mut used = BTreeSet::new();
    for c in &cliques {
        for (i, &a) in c.iter().enumerate() {
            if !used.insert(a) {
                return Err(Error::DependentCliques);
            }
            if c[i + 1..].iter().any(|&b| !adj[a][b]) {
                return Err(Error::DependentCliques);
            }
        }
    }
    for (i, ci) in cliques.iter().enumerate() {
        for cj in &cliques[i + 1..] {
            if ci.iter().any(|&a| cj.iter().any(|&b| adj[a][b])) {
                return Err(Error::DependentCliques);
            }
        }
    }
    let leftover = (0..n).filter(|u| !used.contains(u)).collect();
    Ok(DriverPartition { cliques, leftover })
}

/// Line-oriented `key = value` text form of an instance.
///
/// Only uniform-weight instances are representable. Floats are written in
/// Rust's shortest round-trip form, so `parse(write(x)) == x` bit-for-bit.
pub fn write_instance(inst: &GicInstance) -> Result<String> {
    let w = inst
        .uniform_weight()
        .ok_or_else(|| Error::Validation("text format requires uniform weights".into()))?;
    let mut s = String::new();
    let sizes: Vec<String> = inst.cliques.iter().map(|c| c.size.to_string()).collect();
    writeln!(s, "structure = {}", inst.structure.as_str()).unwrap();
    writeln!(s, "cliques = {}", sizes.join(",")).unwrap();
    writeln!(s, "m_r = {}", inst.r_count).unwrap();
    writeln!(s, "w = {w:?}").unwrap();
    writeln!(s, "jzz = {:?}", inst.jzz).unwrap();
    match inst.jzz_clique {
        Some(p) => writeln!(s, "jzz_clique = {p:?}").unwrap(),
        None => writeln!(s, "jzz_clique = auto").unwrap(),
    }
    Ok(s)
}

/// Parses the format produced by [`write_instance`]. `#` starts a comment;
/// `jzz` and `jzz_clique` may be omitted or set to `auto`.
pub fn parse_instance(text: &str) -> Result<GicInstance> {
    let mut structure = None;
    let mut sizes: Option<Vec<usize>> = None;
    let mut m_r = None;
    let mut w = None;
    let mut jzz = None;
    let mut jzz_clique = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let float = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|e| perr(format!("bad number '{v}': {e}")))
        };
        let opt_float = |v: &str| -> Result<Option<f64>> {
            if v == "auto" {
                Ok(None)
            } else {
                float(v).map(Some)
            }
        };
        match key {
            "structure" => {
                structure = Some(Structure::parse(value).map_err(|e| perr(e.to_string()))?)
            }
            "cliques" => {
                let v = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| perr(format!("bad clique list '{value}': {e}")))?;
                sizes = Some(v);
            }
            "m_r" => {
                m_r = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| perr(format!("bad m_r '{value}': {e}")))?,
                )
            }
            "w" => w = Some(float(value)?),
            "jzz" => jzz = opt_float(value)?,
            "jzz_clique" => jzz_clique = opt_float(value)?,
            _ => return Err(perr(format!("unknown key '{key}'"))),
        }
    }
    let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing key '{k}'") };
    let structure = structure.ok_or_else(|| missing("structure"))?;
    let sizes = sizes.ok_or_else(|| missing("cliques"))?;
    let m_r = m_r.ok_or_else(|| missing("m_r"))?;
    let w = w.ok_or_else(|| missing("w"))?;
    build(structure, sizes.len(), &sizes, m_r, w, jzz, jzz_clique)
}
