use anneal_core::analysis::{
    iterate_demo, localization, md_block_form, negativity_run, v3_instance, v3_model, CompositeSpec, SpectrumProvider,
};
use anneal_core::blocks::{dicke_ops, inner_blocks, sym_same_sign, symmetric_same_sign, InnerOrder};
use anneal_core::csvout::{self, Table};
use anneal_core::hamiltonian::{build_low_energy, stage0_gap_scan, Convention};
use anneal_core::instance::{make_gdis, make_gshare};
use anneal_core::linalg::{max_abs_diff, sym_eigen, BasisTag, DenseOperator};
use anneal_core::schedule::{uniform_grid, IterationConfig, StageConfig};
use anneal_core::sector::SectorBasis;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The two printed 12x12 layouts for m = 2, m_r = 3, written entry by entry.
/// `jz` is the L-R coupling seen by the same-sign block.
fn printed_inner(nc: f64, w: f64, we: f64, jz: f64, x: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = -(nc.sqrt()) * x / 2f64.sqrt();
    let b = -0.5 * 3f64.sqrt() * x;
    let c = -x;
    // Diagonal energy of (l occupied cliques, r occupied R vertices).
    let d = |l: usize, r: usize| (l * r) as f64 * jz - r as f64 * w - l as f64 * we;
    let mut lin = DMatrix::zeros(12, 12);
    let mut rin = DMatrix::zeros(12, 12);
    let li = |l: usize, r: usize| (3 - r) * 3 + (2 - l);
    let ri = |l: usize, r: usize| (2 - l) * 4 + (3 - r);
    let r_hop = [b, c, b]; // between r and r - 1, for r = 3, 2, 1
    for l in 0..=2 {
        for r in 0..=3 {
            lin[(li(l, r), li(l, r))] = d(l, r);
            rin[(ri(l, r), ri(l, r))] = d(l, r);
            if l > 0 {
                for (m, idx) in [(&mut lin, li as fn(usize, usize) -> usize), (&mut rin, ri)] {
                    m[(idx(l, r), idx(l - 1, r))] = a;
                    m[(idx(l - 1, r), idx(l, r))] = a;
                }
            }
            if r > 0 {
                let h = r_hop[3 - r];
                for (m, idx) in [(&mut lin, li as fn(usize, usize) -> usize), (&mut rin, ri)] {
                    m[(idx(l, r), idx(l, r - 1))] = h;
                    m[(idx(l, r - 1), idx(l, r))] = h;
                }
            }
        }
    }
    // Spot entries copied from the printed layouts.
    assert_eq!(lin[(0, 0)], 6.0 * jz - 3.0 * w - 2.0 * we);
    assert_eq!(lin[(4, 4)], 2.0 * jz - 2.0 * w - we);
    assert_eq!(lin[(3, 6)], -x);
    assert_eq!(rin[(6, 6)], jz - w - we);
    assert_eq!(rin[(9, 10)], -x);
    assert_eq!(rin[(3, 3)], -2.0 * we);
    (lin, rin)
}

#[test]
fn inner_blocks_match_printed_layouts() {
    let (n, w, jzz, x, jxx) = (4usize, 1.0, 2.2, 0.9, 0.8);
    let inst = make_gdis(2, &[n; 2], 3, w, Some(jzz), None).unwrap();
    let hl = sym_same_sign(&inst, x, jxx, InnerOrder::LInner).unwrap();
    let hr = sym_same_sign(&inst, x, jxx, InnerOrder::RInner).unwrap();
    let (lin, rin) = printed_inner(n as f64, w, hl.w_eff, hl.jzz_c, x);
    assert!(max_abs_diff(&hl.op.mat, &lin) < 1e-12);
    assert!(max_abs_diff(&hr.op.mat, &rin) < 1e-12);

    let bl = inner_blocks(&hl, InnerOrder::LInner);
    let br = inner_blocks(&hr, InnerOrder::RInner);
    for (k, blk) in bl.blocks.iter().enumerate() {
        assert!(max_abs_diff(blk, &(&bl.base + &bl.shift * k as f64)) < 1e-12);
    }
    for (k, blk) in br.blocks.iter().enumerate() {
        assert!(max_abs_diff(blk, &(&br.base + &br.shift * k as f64)) < 1e-12);
    }
    // Zero-index blocks are the bare subsystems.
    assert!(max_abs_diff(&bl.base, &symmetric_same_sign(2, n, hl.w_eff, x).mat) < 1e-12);
    let (csz, csx) = dicke_ops(3);
    assert!(max_abs_diff(&br.base, &(csx * -x - csz * w)) < 1e-12);
    let el = sym_eigen(&hl.op, None).unwrap().values;
    let er = sym_eigen(&hr.op, None).unwrap().values;
    assert!(el.iter().zip(&er).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn sector_spectrum_inside_low_energy_spectrum() {
    let inst = make_gshare(3, &[4, 4, 4], 2, 1.0, None, None).unwrap();
    let g = inst.expand();
    let sector = SectorBasis::from_instance(&inst).unwrap();
    for (x, jxx) in [(3.0, 4.0), (1.2, 1.6), (0.4, 0.0)] {
        let low = build_low_energy(&inst, x, jxx, Convention::Spin).unwrap();
        assert_eq!(low.dim(), 500);
        let full = sym_eigen(&low, None).unwrap().values;
        let sec = sym_eigen(&sector.hamiltonian(&g, x, jxx, 1.0, Convention::Spin).unwrap(), None).unwrap().values;
        assert!((sec[0] - full[0]).abs() < 1e-10);
        for e in sec {
            let d = full.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-9, "sector level {e} missing ({d})");
        }
    }
}

#[test]
fn v3_matches_printed_computational_matrix() {
    let (n, w, jzz) = (9usize, 1.0, 3.0);
    let cfg = StageConfig::from_jxx(1.0, 2.0, 0.6).unwrap();
    let b = v3_model(n, w, jzz, &cfg, &uniform_grid(11)).unwrap();
    let nf = n as f64;
    let s1 = (nf - 1.0).sqrt();
    for p in &b.points {
        let (x, j) = (p.x, p.jxx);
        // Rows 0a1b1r, 1a0b1r of the printed effective computational matrix.
        let eff = DMatrix::from_row_slice(2, 2, &[-2.0 * w, s1 / 4.0 * j, s1 / 4.0 * j, -2.0 * w + (nf - 2.0) / 4.0 * j + jzz]);
        assert!(max_abs_diff(&p.h_eff_comp, &eff) < 1e-12);
        assert!((p.h_comp[(0, 1)] + x / 2.0).abs() < 1e-15);
        assert!((p.h_comp[(0, 4)] + s1 / 2.0 * x).abs() < 1e-12);
    }
}

#[test]
fn md_form_of_v3_is_the_effective_computational_block() {
    let inst = v3_instance(9, 1.0, 3.0).unwrap();
    let cfg = StageConfig::from_jxx(1.0, 2.0, 0.6).unwrap();
    let grid: Vec<f64> = (0..6).map(|i| 0.5 + 0.1 * i as f64).collect();
    let b = v3_model(9, 1.0, 3.0, &cfg, &grid).unwrap();
    for p in &b.points {
        let f = md_block_form(&inst, &cfg, p.t).unwrap();
        assert_eq!(f.labels_m.len(), 1);
        assert_eq!(f.labels_d.len(), 1);
        assert!(max_abs_diff(&f.combined(), &p.h_eff_comp) < 1e-12);
    }
}

#[test]
fn md_sign_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cases = [
        (v3_instance(9, 1.0, 3.0).unwrap(), StageConfig::from_jxx(1.0, 2.0, 0.6).unwrap()),
        (make_gshare(1, &[5], 3, 1.0, None, None).unwrap(), StageConfig::from_jxx(1.0, 2.0, 0.0).unwrap()),
        (make_gshare(1, &[4], 2, 1.0, None, None).unwrap(), StageConfig::from_jxx(1.0, 2.0, 1.5).unwrap()),
    ];
    for (inst, cfg) in &cases {
        for t in [cfg.t_sep(), 0.7, 0.9, 1.0] {
            let f = md_block_form(inst, cfg, t).unwrap();
            assert!(f.m_stoquastic && f.d_stoquastic && !f.v_has_negative);
            for _ in 0..100 {
                let u = DVector::from_fn(f.h_m.nrows(), |_, _| rng.gen_range(0.0..1.0));
                let ud = f.u_d(&u).unwrap();
                assert!(ud.iter().all(|&v| v <= 1e-15), "{ud}");
            }
        }
    }
}

#[test]
fn gm_bare_unchanged_by_drivers() {
    let spec = CompositeSpec::two_lm();
    let icfg = IterationConfig::defaults(2.0, &spec.groups).unwrap();
    let grid = uniform_grid(41);
    let demo = iterate_demo(&spec, &icfg, &grid).unwrap();
    let gm = |r: usize| demo.runs[r].bare.iter().map(|b| *b.last().unwrap()).collect::<Vec<_>>();
    assert_eq!(gm(0), gm(1));
    assert_eq!(gm(0), gm(2));
    // A driver only moves its own group.
    for (i, _) in grid.iter().enumerate() {
        assert_eq!(demo.runs[0].bare[i][1], demo.runs[1].bare[i][1]);
        assert!(demo.runs[1].bare[i][0] >= demo.runs[0].bare[i][0]);
    }
}

#[test]
fn stage0_gap_examples() {
    let cfg = StageConfig::from_jxx(1.0, 2.0, 0.6).unwrap();
    // One free vertex: H = -x sigma^x - p w shz, gap sqrt(p^2 w^2 + 4 x^2).
    let one = make_gdis(1, &[1], 0, 1.0, None, None).unwrap();
    let grid = uniform_grid(11);
    let s = stage0_gap_scan(&one, &cfg, &grid, Convention::Pauli).unwrap();
    for &(t, gap) in &s.points {
        let (x, _, p) = cfg.stage0_params(t).unwrap();
        assert!((gap - (p * p + 4.0 * x * x).sqrt()).abs() < 1e-12);
    }
    assert!((s.points[0].1 - 2.0 * cfg.gamma0).abs() < 1e-12);
    // Default three-vertex model: clique of 9, jzz 3.
    let v3 = v3_instance(9, 1.0, 3.0).unwrap();
    let s = stage0_gap_scan(&v3, &cfg, &uniform_grid(41), Convention::Pauli).unwrap();
    assert!((s.points[0].1 - 2.0 * cfg.gamma0).abs() < 1e-9);
    assert!(s.points.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
    assert!(s.min_gap >= cfg.gamma1 && s.min_gap <= 2.0 * cfg.gamma0 && s.ok);
}

#[test]
fn localization_csv_round_trips_exactly() {
    let inst = make_gdis(4, &[4; 4], 5, 1.0, None, None).unwrap();
    let cfg = StageConfig::from_jxx(4.0, 2.0, 6.0).unwrap();
    let tr = localization(&inst, &cfg, &uniform_grid(21), 3).unwrap();
    let mut buf = vec![];
    csvout::localization_table(&tr).write_to(&mut buf).unwrap();
    let back = Table::read_from(buf.as_slice()).unwrap();
    assert_eq!(back.header, ["t", "wL0", "wR_cum_1", "wR_cum_2", "wR_cum_3"]);
    assert_eq!(back.column("t").unwrap(), tr.grid);
    assert_eq!(back.column("wL0").unwrap(), tr.w_l0);
    let c3: Vec<f64> = tr.w_r_cum.iter().map(|v| v[2]).collect();
    assert_eq!(back.column("wR_cum_3").unwrap(), c3);
}

#[test]
fn negativity_csv_round_trips_exactly() {
    let inst = make_gshare(2, &[3, 3], 2, 1.0, None, None).unwrap();
    let cfg = StageConfig::from_jxx(2.0, 2.0, 2.0).unwrap();
    let pts = negativity_run(&inst, &cfg, &uniform_grid(31), SpectrumProvider::Sector).unwrap();
    let mut buf = vec![];
    csvout::negativity_table(&pts).write_to(&mut buf).unwrap();
    let back = Table::read_from(buf.as_slice()).unwrap();
    let f: Vec<f64> = pts.iter().map(|p| p.1).collect();
    assert_eq!(back.column("fraction").unwrap(), f);
    assert!(back.rows.iter().all(|r| !r[1].starts_with('-')));
}

#[test]
fn stoquastic_schedule_has_nonnegative_ground_state() {
    let inst = make_gshare(2, &[3, 3], 2, 1.0, None, None).unwrap();
    let cfg = StageConfig::from_jxx(2.0, 2.0, 0.0).unwrap();
    let pts = negativity_run(&inst, &cfg, &uniform_grid(21), SpectrumProvider::LowEnergy).unwrap();
    assert!(pts.iter().all(|p| p.1 == 0.0));
    let h = build_low_energy(&inst, 1.0, -0.5, Convention::Spin).unwrap();
    assert!(DenseOperator::new(h.mat, BasisTag::LowEnergy).is_stoquastic(0.0));
}
