//! Dense real-symmetric operators with labeled bases.
//!
//! Eigendecomposition is delegated to faer's self-adjoint solver; nalgebra
//! carries the matrices everywhere else. This module adds the
//! contract the rest of the crate relies on: ascending order, a fixed sign
//! gauge, degeneracy-aware ground-state selection, and checked transforms.

use faer::Side;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension accepted by [`sym_eigen`].
pub const DIM_CAP: usize = 16384;

/// Relative asymmetry tolerated before an operator is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues closer than this to the lowest one count as degenerate with it.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Which basis the rows/columns of an operator refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Computational,
    LowEnergy,
    Angular,
    Dicke,
    Custom,
}

/// Real symmetric matrix with one label per basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub mat: DMatrix<f64>,
    pub basis: BasisTag,
    pub labels: Vec<String>,
}

impl DenseOperator {
    /// Wraps a matrix; labels default to the basis index.
    pub fn new(mat: DMatrix<f64>, basis: BasisTag) -> Self {
        let labels = (0..mat.nrows()).map(|i| i.to_string()).collect();
        Self { mat, basis, labels }
    }

    pub fn with_labels(mat: DMatrix<f64>, basis: BasisTag, labels: Vec<String>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Validation(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if labels.len() != mat.nrows() {
            return Err(Error::Validation(format!(
                "{} labels for dimension {}",
                labels.len(),
                mat.nrows()
            )));
        }
        Ok(Self { mat, basis, labels })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> f64 {
        max_abs_diff(&self.mat, &self.mat.transpose())
    }

    /// Rejects operators whose asymmetry exceeds [`SYMMETRY_TOL`] relative to the largest entry.
    pub fn check_symmetric(&self) -> Result<()> {
        if self.mat.nrows() != self.mat.ncols() {
            return Err(Error::Validation("operator must be square".into()));
        }
        let scale = self.mat.amax().max(1.0);
        let asym = self.asymmetry();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric(asym));
        }
        Ok(())
    }

    /// Submatrix on the listed basis indices (in the given order).
    pub fn restrict(&self, idx: &[usize]) -> DenseOperator {
        let n = idx.len();
        let mat = DMatrix::from_fn(n, n, |i, j| self.mat[(idx[i], idx[j])]);
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        DenseOperator { mat, basis: self.basis, labels }
    }

    /// True when every off-diagonal entry is <= `tol`.
    pub fn is_stoquastic(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.mat[(i, j)] <= tol))
    }
}

/// Ascending eigenvalues and matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }

    /// Largest residual ||A v - lambda v|| over the stored pairs.
    pub fn max_residual(&self, op: &DenseOperator) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.vectors.column(k);
                (&op.mat * v - v * self.values[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of V^T V from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        max_abs_diff(&g, &DMatrix::identity(g.nrows(), g.ncols()))
    }
}

/// Lowest `k` eigenpairs (all when `k` is `None`), ascending, gauge-fixed.
pub fn sym_eigen(op: &DenseOperator, k: Option<usize>) -> Result<EigenSystem> {
    let n = op.dim();
    if n > DIM_CAP {
        return Err(Error::DimensionCap { dim: n, cap: DIM_CAP });
    }
    op.check_symmetric()?;
    if n == 0 {
        return Ok(EigenSystem { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let sym = symmetrized(&op.mat);
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| sym[(i, j)]);
    let eig = fm.selfadjoint_eigendecomposition(Side::Lower);
    let (s, u) = (eig.s().column_vector(), eig.u());
    if (0..n).any(|i| !s.read(i).is_finite()) {
        return Err(Error::Numeric("eigensolver produced non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).partial_cmp(&s.read(b)).unwrap().then(a.cmp(&b)));
    let keep = k.unwrap_or(n).min(n);
    let values: Vec<f64> = order[..keep].iter().map(|&i| s.read(i)).collect();
    let mut vectors = DMatrix::zeros(n, keep);
    for (c, &i) in order[..keep].iter().enumerate() {
        let mut v = DVector::from_fn(n, |r, _| u.read(r, i));
        fix_gauge(&mut v);
        vectors.set_column(c, &v);
    }
    Ok(EigenSystem { values, vectors })
}

/// Lowest eigenpair.
///
/// Inside a degenerate lowest level the returned vector is the normalized
/// projection of `reference` onto that level, so sweeps stay continuous.
pub fn ground_state(op: &DenseOperator, reference: Option<&DVector<f64>>) -> Result<(f64, DVector<f64>)> {
    let es = sym_eigen(op, None)?;
    if es.is_empty() {
        return Err(Error::Validation("empty operator".into()));
    }
    Ok(select_ground(&es, reference))
}

/// Ground pair from an existing decomposition, using the degeneracy rule of [`ground_state`].
pub fn select_ground(es: &EigenSystem, reference: Option<&DVector<f64>>) -> (f64, DVector<f64>) {
    let e0 = es.values[0];
    let cluster = es.values.iter().take_while(|&&v| v - e0 <= DEGENERACY_TOL).count();
    let mut v = es.vector(0);
    if cluster > 1 {
        if let Some(r) = reference {
            let mut p = DVector::zeros(es.vectors.nrows());
            for c in 0..cluster {
                let col = es.vectors.column(c);
                p += col * col.dot(r);
            }
            let norm = p.norm();
            if norm > 1e-8 {
                v = p / norm;
            }
        }
    }
    fix_gauge(&mut v);
    (e0, v)
}

/// Makes the largest-magnitude entry positive; ties go to the lowest index.
pub fn fix_gauge(v: &mut DVector<f64>) {
    let amax = v.amax();
    if amax == 0.0 {
        return;
    }
    let tol = 1e-12 * amax;
    if let Some(i) = v.iter().position(|x| x.abs() >= amax - tol) {
        if v[i] < 0.0 {
            v.neg_mut();
        }
    }
}

/// U^T A U for U with orthonormal columns.
pub fn conjugate(op: &DenseOperator, u: &DMatrix<f64>) -> Result<DenseOperator> {
    if u.nrows() != op.dim() {
        return Err(Error::Validation(format!(
            "transform has {} rows, operator dimension is {}",
            u.nrows(),
            op.dim()
        )));
    }
    let err = orthonormality_defect(u);
    if err > 1e-10 {
        return Err(Error::NotOrthonormal(err));
    }
    let m = u.transpose() * &op.mat * u;
    Ok(DenseOperator::new(symmetrized(&m), BasisTag::Custom))
}

/// max |U^T U - I|.
pub fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let g = u.transpose() * u;
    max_abs_diff(&g, &DMatrix::identity(g.nrows(), g.ncols()))
}

/// Kronecker product a (x) b.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Places `local` on tensor factor `site` of a product space with factor dimensions `dims`.
pub fn embed(local: &DMatrix<f64>, site: usize, dims: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::identity(1, 1);
    for (s, &d) in dims.iter().enumerate() {
        let f = if s == site { local.clone() } else { DMatrix::identity(d, d) };
        out = out.kronecker(&f);
    }
    out
}

/// Places `a` on factor `i` and `b` on factor `j` (i != j).
pub fn embed_pair(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize, dims: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::identity(1, 1);
    for (s, &d) in dims.iter().enumerate() {
        let f = if s == i {
            a.clone()
        } else if s == j {
            b.clone()
        } else {
            DMatrix::identity(d, d)
        };
        out = out.kronecker(&f);
    }
    out
}

/// Permutation matrix P with P[old, new] = 1 where `perm[new] = old`.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    let mut p = DMatrix::zeros(n, n);
    for (new, &old) in perm.iter().enumerate() {
        p[(old, new)] = 1.0;
    }
    p
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
