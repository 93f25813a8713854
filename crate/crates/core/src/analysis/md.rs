use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Convention;
use crate::instance::{GicInstance, Structure};
use crate::linalg::{sym_eigen, DenseOperator};
use crate::schedule::StageConfig;
use crate::sector::SectorBasis;

/// Restriction of the Stage-2 Hamiltonian to GM-supporting states (M) and
/// their XX partners (D), in the clique-symmetric sector.
///
/// M holds every state with all of R occupied, each clique empty or on its
/// shared vertex, and at least one clique occupied. Each D state moves exactly
/// one occupied clique from its shared vertex onto the uniform state of the
/// remaining clique vertices.
#[derive(Debug, Clone)]
pub struct MdBlockForm {
    pub h_m: DMatrix<f64>,
    pub h_d: DMatrix<f64>,
    /// Rows M, columns D.
    pub v: DMatrix<f64>,
    /// Ground energy of the combined M/D matrix.
    pub e_ref: f64,
    pub labels_m: Vec<String>,
    pub labels_d: Vec<String>,
    pub m_stoquastic: bool,
    pub d_stoquastic: bool,
    /// V carries transverse entries (negative) besides the XX ones. Happens
    /// whenever some M state has an empty clique, i.e. for two or more cliques.
    pub v_has_negative: bool,
}

impl MdBlockForm {
    /// The D part minimizing the Rayleigh quotient at energy `e_ref` for a
    /// fixed M part: -(H_D - e_ref)^-1 V^T u_M.
    pub fn u_d(&self, u_m: &DVector<f64>) -> Result<DVector<f64>> {
        if u_m.len() != self.h_m.nrows() {
            return invalid("u_M has the wrong length");
        }
        let shifted = &self.h_d - DMatrix::identity(self.h_d.nrows(), self.h_d.ncols()) * self.e_ref;
        let chol = shifted
            .cholesky()
            .ok_or_else(|| Error::Numeric("H_D - E is not positive definite".into()))?;
        Ok(-chol.solve(&(self.v.transpose() * u_m)))
    }

    pub fn combined(&self) -> DMatrix<f64> {
        let (a, b) = (self.h_m.nrows(), self.h_d.nrows());
        let mut h = DMatrix::zeros(a + b, a + b);
        h.view_mut((0, 0), (a, a)).copy_from(&self.h_m);
        h.view_mut((a, a), (b, b)).copy_from(&self.h_d);
        h.view_mut((0, a), (a, b)).copy_from(&self.v);
        h.view_mut((a, 0), (b, a)).copy_from(&self.v.transpose());
        h
    }
}

fn stoquastic(m: &DMatrix<f64>) -> bool {
    DenseOperator::new(m.clone(), crate::linalg::BasisTag::Custom).is_stoquastic(0.0)
}

/// M/D block form at time `t` of the main schedule.
pub fn md_block_form(inst: &GicInstance, cfg: &StageConfig, t: f64) -> Result<MdBlockForm> {
    if inst.structure != Structure::Shared {
        return invalid("M/D block form needs the shared structure");
    }
    if t < cfg.t_sep() {
        return invalid(format!("M/D block form is a Stage-2 object; t = {t} < t_sep = {}", cfg.t_sep()));
    }
    let graph = inst.expand();
    let sector = SectorBasis::from_instance(inst)?;
    let m = inst.m_l();
    // Per clique: digit of the shared vertex and of its partner class.
    let mut shared_digit = vec![];
    let mut partner_digit = vec![];
    for c in 0..m {
        let sv = inst.shared_vertex(c).expect("shared structure");
        let cls = &sector.classes[c];
        let s = cls.iter().position(|k| k.contains(&sv)).unwrap();
        if cls[s].len() != 1 {
            return invalid("shared vertex is not alone in its vertex class");
        }
        let others: Vec<usize> = (0..cls.len()).filter(|&k| k != s).collect();
        if others.len() > 1 {
            return invalid("non-shared clique vertices split into several classes");
        }
        shared_digit.push(s + 1);
        partner_digit.push(others.first().map(|k| k + 1));
    }
    let labels = sector.labels();
    let mut ms = vec![];
    let mut ds = vec![];
    for i in 0..sector.dim() {
        let d = sector.digits(i);
        if d[m..].iter().any(|&b| b != 1) {
            continue;
        }
        let on_shared = (0..m).filter(|&c| d[c] == shared_digit[c]).count();
        let on_partner = (0..m).filter(|&c| partner_digit[c] == Some(d[c])).count();
        let empty = (0..m).filter(|&c| d[c] == 0).count();
        if on_shared + empty == m && on_shared >= 1 {
            ms.push(i);
        } else if on_partner == 1 && on_shared + empty + 1 == m {
            ds.push(i);
        }
    }
    let (x, jxx) = cfg.main_params(t)?;
    let h = sector.hamiltonian(&graph, x, jxx, 1.0, Convention::Spin)?;
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |a, b| h.mat[(rows[a], cols[b])]);
    let h_m = pick(&ms, &ms);
    let h_d = pick(&ds, &ds);
    let v = pick(&ms, &ds);
    let mut form = MdBlockForm {
        m_stoquastic: stoquastic(&h_m),
        d_stoquastic: stoquastic(&h_d),
        v_has_negative: v.iter().any(|&e| e < 0.0),
        h_m,
        h_d,
        v,
        e_ref: 0.0,
        labels_m: ms.iter().map(|&i| labels[i].clone()).collect(),
        labels_d: ds.iter().map(|&i| labels[i].clone()).collect(),
    };
    let all = DenseOperator::new(form.combined(), crate::linalg::BasisTag::Custom);
    form.e_ref = sym_eigen(&all, Some(1))?.values[0];
    Ok(form)
}
