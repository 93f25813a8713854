//! `anneal`: runs one analysis per invocation and writes its CSV tables.
//!
//! Exit codes: 0 success, 2 invalid input, 1 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anneal_core::analysis::{
    iterate_demo, localization, negativity_run, spectrum_run, v3_model, CompositeSpec, CrossingOptions,
    CrossingReport, SpectrumProvider, DEFAULT_GRID,
};
use anneal_core::bounds::{feasibility_check, jxx_bounds, BoundsInput, BoundsReport};
use anneal_core::csvout::{self, Table};
use anneal_core::hamiltonian::{stage0_gap_scan, Convention};
use anneal_core::instance::{make_gdis, make_gshare, parse_instance, GicInstance, Structure};
use anneal_core::schedule::{uniform_grid, IterationConfig, StageConfig};
use anneal_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "anneal", version, about = "Spectral analyses of XX-driven annealing on clique-structured MIS instances")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Low-lying spectrum, bare curves and Stage-2 crossing report.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Provider::Sector)]
        provider: Provider,
    },
    /// XX-coupling bounds and the feasibility window.
    Bounds(BoundsArgs),
    /// Stage-1 localization of the same-sign ground state onto R-blocks.
    Steering(RunArgs),
    /// Negative-amplitude fraction of the ground state.
    Negativity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Provider::Sector)]
        provider: Provider,
    },
    /// Three-vertex interference model.
    V3(V3Args),
    /// Two-LM composite with one driver per iteration.
    Iterate(IterArgs),
    /// Gap along the Stage-0 ramp on the full basis.
    Stage0 {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Conv::Spin)]
        convention: Conv,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Provider {
    Full,
    LowEnergy,
    Sector,
}

impl From<Provider> for SpectrumProvider {
    fn from(p: Provider) -> Self {
        match p {
            Provider::Full => SpectrumProvider::Full,
            Provider::LowEnergy => SpectrumProvider::LowEnergy,
            Provider::Sector => SpectrumProvider::Sector,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Conv {
    Spin,
    Pauli,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StructureArg {
    Disjoint,
    Shared,
}

impl From<StructureArg> for Structure {
    fn from(s: StructureArg) -> Self {
        match s {
            StructureArg::Disjoint => Structure::Disjoint,
            StructureArg::Shared => Structure::Shared,
        }
    }
}

/// Instance from a file, or built from the structure flags.
#[derive(Args, Debug)]
struct InstanceArgs {
    #[arg(long, conflicts_with_all = ["m", "nc", "mr", "structure"])]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    structure: Option<StructureArg>,
    /// Number of cliques.
    #[arg(long)]
    m: Option<usize>,
    /// Clique size (uniform).
    #[arg(long)]
    nc: Option<usize>,
    /// Size of the right-hand vertex set R.
    #[arg(long)]
    mr: Option<usize>,
    /// Overrides the instance's J_zz.
    #[arg(long)]
    jzz: Option<f64>,
}

impl InstanceArgs {
    fn load(&self) -> Result<GicInstance> {
        let mut inst = match &self.instance {
            Some(p) => parse_instance(&read_input(p)?)?,
            None => {
                let (Some(s), Some(m), Some(nc), Some(mr)) = (self.structure, self.m, self.nc, self.mr) else {
                    return Err(Error::Validation(
                        "give --instance, or all of --structure, --m, --nc and --mr".into(),
                    ));
                };
                let sizes = vec![nc; m];
                match s.into() {
                    Structure::Disjoint => make_gdis(m, &sizes, mr, 1.0, self.jzz, None)?,
                    Structure::Shared => make_gshare(m, &sizes, mr, 1.0, self.jzz, None)?,
                }
            }
        };
        if let Some(j) = self.jzz {
            if !(j > 0.0) {
                return Err(Error::Validation(format!("jzz must be positive, got {j}")));
            }
            inst.jzz = j;
        }
        Ok(inst)
    }
}

#[derive(Args, Debug)]
struct ScheduleArgs {
    /// Defaults to the number of cliques.
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    gamma1_factor: f64,
    #[arg(long, conflicts_with = "jxx")]
    alpha: Option<f64>,
    /// Stage-1 XX coupling; defaults to 2 (m - 1).
    #[arg(long)]
    jxx: Option<f64>,
}

impl ScheduleArgs {
    fn config(&self, m: usize) -> Result<StageConfig> {
        let g2 = self.gamma2.unwrap_or(m as f64);
        match (self.alpha, self.jxx) {
            (Some(a), _) => StageConfig::from_factor(g2, self.gamma1_factor, a),
            (None, Some(j)) => StageConfig::from_jxx(g2, self.gamma1_factor, j),
            (None, None) => StageConfig::from_jxx(g2, self.gamma1_factor, 2.0 * (m as f64 - 1.0)),
        }
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Number of levels (spectrum) or block depth (steering).
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[command(flatten)]
    sched: ScheduleArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, conflicts_with_all = ["m", "mr", "mg", "nc"])]
    instance: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mr: Option<usize>,
    /// Defaults to m_r (disjoint) or m + m_r (shared).
    #[arg(long)]
    mg: Option<usize>,
    #[arg(long)]
    nc: Option<usize>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    jzz: Option<f64>,
    #[arg(long, value_enum, default_value_t = StructureArg::Shared)]
    structure: StructureArg,
    /// Coupling to test against the window; defaults to 2 (m - 1).
    #[arg(long)]
    jxx: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct V3Args {
    #[arg(long, default_value_t = 9)]
    nc: usize,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Defaults to 1 + (sqrt(n_c) + 1) / 2.
    #[arg(long)]
    jzz: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
    #[arg(long, default_value_t = 2.0)]
    gamma1_factor: f64,
    #[arg(long, conflicts_with = "jxx")]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    jxx: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct IterArgs {
    #[arg(long, default_value_t = 2.0)]
    gamma1_factor: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn read_input(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))
}

fn grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Validation(format!("grid needs at least 2 points, got {n}")));
    }
    Ok(uniform_grid(n))
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    table.write_path(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn print_crossings(name: &str, r: &CrossingReport) {
    println!("{name}: {} crossing(s), class {}", r.crossings.len(), r.classification().as_str());
    for c in &r.crossings {
        print!("  t* = {:.6}", c.t_star);
        if let (Some(g), Some(t)) = (c.min_gap, c.t_min_gap) {
            print!(", min gap {g:.6e} at t = {t:.6}");
        }
        let small = c.small_gap.map_or("n/a", |s| if s { "yes" } else { "no" });
        println!(", small gap: {small}, class {}", c.class.as_str());
    }
    let o = &r.options;
    println!(
        "  thresholds: gap ratio {}, overlap {}, gap window {}",
        o.gap_ratio, o.overlap, o.gap_window
    );
}

fn print_bounds(r: &BoundsReport) {
    println!("lift   {:>12.6}", r.lift);
    println!("steer  {:>12.6}", r.steer);
    println!("sep    {:>12.6}", r.sep);
    println!("sink   {:>12.6}", r.sink);
    println!(
        "jzz_steer {:.6}{}  (jzz within: {}, jzz/m = {:.4})",
        r.jzz_steer.value,
        if r.jzz_steer.advisory { " [advisory]" } else { "" },
        r.jzz_inter_ok,
        r.jzz_over_m
    );
    match r.window {
        Some((lo, hi)) => println!("window [{lo:.6}, {hi:.6}]"),
        None => println!("window empty"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Spectrum { run, provider } => {
            let inst = run.inst.load()?;
            let cfg = run.sched.config(inst.m_l())?;
            let g = grid(run.out.grid)?;
            let r = spectrum_run(&inst, &cfg, &g, run.out.k, provider.into(), &CrossingOptions::default())?;
            write(&csvout::spectrum_table(&r.trace, cfg.t_sep()), &run.out.out, "spectrum.csv")?;
            write(&csvout::bare_table(&r.bare), &run.out.out, "bare.csv")?;
            println!("provider {}, t_sep = {:.6}", r.provider.as_str(), cfg.t_sep());
            println!("min Stage-2 gap {:.6e} at t = {:.6}", r.stage2_min_gap.1, r.stage2_min_gap.0);
            print_crossings("LM/GM", &r.lm_gm);
            print_crossings("AS0/GM", &r.as0_gm);
        }
        Cmd::Bounds(a) => {
            let input = match &a.instance {
                Some(p) => {
                    let inst = parse_instance(&read_input(p)?)?;
                    let mut inp = BoundsInput::from_instance(&inst, a.gamma2.unwrap_or(inst.m_l() as f64));
                    if let Some(j) = a.jzz {
                        inp.jzz = j;
                    }
                    inp
                }
                None => {
                    let (Some(m), Some(mr), Some(nc)) = (a.m, a.mr, a.nc) else {
                        return Err(Error::Validation("give --instance, or all of --m, --mr and --nc".into()));
                    };
                    let structure: Structure = a.structure.into();
                    let mg = a.mg.unwrap_or(match structure {
                        Structure::Disjoint => mr,
                        Structure::Shared => m + mr,
                    });
                    let jzz = a.jzz.unwrap_or_else(|| anneal_core::instance::default_jzz(nc));
                    BoundsInput::uniform(m, mr, mg, nc, a.gamma2.unwrap_or(m as f64), jzz, structure)
                }
            };
            let r = jxx_bounds(&input)?;
            print_bounds(&r);
            let jxx = a.jxx.unwrap_or(r.witness);
            let v = r.violations(jxx);
            println!(
                "jxx {jxx:.6}: {}",
                if v.is_empty() { "inside".to_string() } else { format!("violates {}", v.join(", ")) }
            );
            if let Some(dir) = &a.out {
                write(&csvout::bounds_table(&r), dir, "bounds.csv")?;
            }
        }
        Cmd::Steering(run) => {
            let inst = run.inst.load()?;
            let cfg = run.sched.config(inst.m_l())?;
            let g = grid(run.out.grid)?;
            let tr = localization(&inst, &cfg, &g, run.out.k)?;
            write(&csvout::localization_table(&tr), &run.out.out, "localization.csv")?;
            let end = tr.nearest(cfg.t_sep());
            println!(
                "Stage-1 end t = {:.6}: wL0 {:.6}, weight on lowest {} R-blocks {:.6}",
                cfg.t_sep(),
                tr.w_l0[end],
                run.out.k,
                tr.w_r_cum[end][run.out.k - 1]
            );
            let v = feasibility_check(&inst, &cfg)?;
            if !v.jxx_violations.is_empty() {
                println!("note: jxx {:.6} violates {}", v.jxx, v.jxx_violations.join(", "));
            }
        }
        Cmd::Negativity { run, provider } => {
            let inst = run.inst.load()?;
            let cfg = run.sched.config(inst.m_l())?;
            let g = grid(run.out.grid)?;
            let pts = negativity_run(&inst, &cfg, &g, provider.into())?;
            write(&csvout::negativity_table(&pts), &run.out.out, "negativity.csv")?;
            match pts.iter().find(|p| p.1 > 0.0) {
                Some(p) => println!("first negative amplitude at t = {:.6}", p.0),
                None => println!("ground state nonnegative on the whole grid"),
            }
        }
        Cmd::V3(a) => {
            let jzz = a.jzz.unwrap_or_else(|| anneal_core::instance::default_jzz(a.nc));
            let cfg = match a.alpha {
                Some(al) => StageConfig::from_factor(a.gamma2, a.gamma1_factor, al)?,
                None => StageConfig::from_jxx(a.gamma2, a.gamma1_factor, a.jxx)?,
            };
            let b = v3_model(a.nc, a.w, jzz, &cfg, &grid(a.grid)?)?;
            write(&csvout::v3_table(&b), &a.out, "v3.csv")?;
            match b.points.iter().find(|p| p.beta < 0.0) {
                Some(p) => println!("beta turns negative at t = {:.6}", p.t),
                None => println!("beta stays nonnegative"),
            }
        }
        Cmd::Iterate(a) => {
            let spec = CompositeSpec::two_lm();
            let structures: Vec<(usize, usize)> = spec.groups.clone();
            let icfg = IterationConfig::defaults(a.gamma1_factor, &structures)?;
            let demo = iterate_demo(&spec, &icfg, &grid(a.grid)?)?;
            for (i, r) in demo.runs.iter().enumerate() {
                write(&csvout::iterate_table(r), &a.out, &format!("iterate_{i}.csv"))?;
                println!("drivers {:?}: {} LM/GM crossing(s)", r.drivers, r.crossing_count());
            }
        }
        Cmd::Stage0 { run, convention } => {
            let inst = run.inst.load()?;
            let cfg = run.sched.config(inst.m_l())?;
            let conv = match convention {
                Conv::Spin => Convention::Spin,
                Conv::Pauli => Convention::Pauli,
            };
            let scan = stage0_gap_scan(&inst, &cfg, &grid(run.out.grid)?, conv)?;
            write(&csvout::stage0_table(&scan), &run.out.out, "stage0.csv")?;
            println!(
                "min gap {:.6e} at t = {:.6}; threshold {:.6e}: {}",
                scan.min_gap,
                scan.t_min,
                scan.threshold,
                if scan.ok { "ok" } else { "below" }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
