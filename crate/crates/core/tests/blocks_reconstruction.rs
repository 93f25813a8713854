use anneal_core::blocks::{angular_transform, assemble_angular, block_hamiltonians};
use anneal_core::hamiltonian::{build_low_energy, Convention};
use anneal_core::instance::{make_gdis, make_gshare, GicInstance};
use anneal_core::linalg::{conjugate, max_abs_diff};

fn instances() -> Vec<GicInstance> {
    let mut out = vec![];
    for m in 1..=2usize {
        for m_r in 0..=2usize {
            let mut size_lists: Vec<Vec<usize>> = vec![vec![]];
            for _ in 0..m {
                size_lists = size_lists
                    .into_iter()
                    .flat_map(|s| (1..=4).map(move |n| [s.clone(), vec![n]].concat()))
                    .collect();
            }
            for sizes in size_lists {
                out.push(make_gdis(m, &sizes, m_r, 1.0, Some(2.3), None).unwrap());
                out.push(make_gshare(m, &sizes, m_r, 1.0, Some(2.3), None).unwrap());
            }
        }
    }
    out
}

#[test]
fn conjugated_low_energy_matches_closed_form_assembly() {
    let (x, jxx) = (0.83, 1.37);
    for inst in instances() {
        let h = build_low_energy(&inst, x, jxx, Convention::Spin).unwrap();
        let u = angular_transform(&inst).unwrap();
        let conj = conjugate(&h, &u).unwrap();
        let direct = assemble_angular(&inst, x, jxx).unwrap();
        let err = max_abs_diff(&conj.mat, &direct.mat);
        assert!(err <= 1e-12, "{inst:?}: {err}");
    }
}

#[test]
fn contracted_blocks_match_conjugation() {
    let (x, jxx) = (0.61, 0.9);
    for inst in instances() {
        let h = build_low_energy(&inst, x, jxx, Convention::Spin).unwrap();
        let bs = block_hamiltonians(&inst, x, jxx).unwrap();
        let u = angular_transform(&inst).unwrap();
        let cols = u.select_columns(&bs.layout.columns);
        let conj = conjugate(&h, &cols).unwrap();
        let err = max_abs_diff(&conj.mat, &bs.assembled().mat);
        assert!(err <= 1e-12, "{inst:?}: {err}");
    }
}
