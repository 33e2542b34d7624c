use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use wavefront::compare::{space_time_l1, tracker_vs_godunov};
use wavefront::output;
use wavefront::riemann::{audit_solution, constrained_riemann, CaseLabel};
use wavefront::scenario::{random_scenario, RandomSpec, DEMO};
use wavefront::tracker::validate_solution;
use wavefront::{Error, FluxFamily, FluxModel, Grids, Result, Scenario};

#[derive(Parser)]
#[command(
    name = "wavefront",
    version,
    about = "Front tracking for LWR traffic with a moving bottleneck"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tracker and write fronts, trajectory, ledger and snapshot CSVs.
    Solve {
        /// Scenario file; the bundled demo is used when omitted.
        scenario: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
        /// Override the scenario's refinement index.
        #[arg(long)]
        nu: Option<u32>,
        /// Also write diagram.svg.
        #[arg(long)]
        diagram: bool,
    },
    /// Solve one constrained Riemann problem; prints JSON and writes riemann.svg.
    Riemann {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        left: f64,
        #[arg(long)]
        right: f64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Print the density and speed grids for a refinement index as JSON.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        nu: u32,
    },
    /// Re-check a stored run against its scenario.
    Validate {
        scenario: PathBuf,
        /// Directory holding the CSVs; defaults to the output directory.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// L¹ distance between the tracker and the finite-volume oracle at t_end
    /// under simultaneous refinement.
    Compare {
        scenario: PathBuf,
        /// Cell width at the coarsest level; halved at each further level.
        #[arg(long, default_value_t = 4e-3)]
        dx: f64,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Refinement study over random scenarios: space-time L¹ distance to a
    /// fine reference for several nu, plus a validation of every run.
    Sweep {
        #[arg(long, default_value_t = 5)]
        scenarios: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
        nu: Vec<u32>,
        #[arg(long, default_value_t = 8)]
        reference: u32,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        /// Cell widths for an additional finite-volume comparison at t_end.
        #[arg(long, value_delimiter = ',')]
        dx: Vec<f64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "WAVEFRONT_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "greenshields")]
    flux: String,
    /// Skew parameter of the skewed_cubic family.
    #[arg(long)]
    flux_c: Option<f64>,
    #[arg(long = "rho-max", default_value_t = 1.0)]
    rho_max: f64,
    #[arg(long = "v-max", default_value_t = 1.0)]
    v_max: f64,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<FluxModel> {
        let family = match (self.flux.as_str(), self.flux_c) {
            ("greenshields", _) => FluxFamily::Greenshields,
            ("skewed_cubic", Some(skew)) => FluxFamily::SkewedCubic { skew },
            ("skewed_cubic", None) => return Err(Error::Scenario("skewed_cubic needs --flux-c".into())),
            (other, _) => return Err(Error::Scenario(format!("unknown flux family {other}"))),
        };
        FluxModel::new(family, self.rho_max, self.v_max, self.alpha)
    }
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
}

fn json_out(v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    writeln!(std::io::stdout().lock(), "{text}")?;
    Ok(())
}

fn solve(scenario: Option<PathBuf>, out: &Path, nu: Option<u32>, diagram: bool) -> Result<ExitCode> {
    let mut sc = match scenario {
        Some(p) => load(&p)?,
        None => Scenario::parse(DEMO)?,
    };
    if let Some(nu) = nu {
        sc.nu = nu;
    }
    let h = sc.solve()?;
    let files = output::write_run(out, &sc, &h, diagram)?;
    let last = h.ledger.last().expect("ledger starts with the initial entry");
    println!("scenario {}", sc.hash());
    println!(
        "nu={} events={} fronts={} upsilon0={:.6} upsilon_end={:.6} y(T)={:.6}",
        sc.nu,
        h.ledger.len() - 1,
        h.fronts.len(),
        h.upsilon0(),
        last.upsilon,
        h.av_position(h.t_end)?
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn riemann(model: &ModelArgs, u: f64, left: f64, right: f64, out: &Path) -> Result<ExitCode> {
    let m = model.build()?;
    let sol = constrained_riemann(&m, u, left, right)?;
    let label = CaseLabel::classify(&m, u, left, right)?;
    let g = m.geometry_at(u)?;
    let audit = audit_solution(&m, u, &sol);
    fs::create_dir_all(out)?;
    let svg = out.join("riemann.svg");
    fs::write(&svg, output::riemann_svg(&sol))?;
    json_out(&json!({
        "u": u,
        "left": left,
        "right": right,
        "case": label,
        "expected": format!("{:?}", label.expected(&m, u)),
        "geometry": {
            "tilde_rho": g.tilde_rho, "check_rho": g.check_rho, "hat_rho": g.hat_rho,
            "star_rho": g.star_rho, "capacity": g.capacity,
        },
        "solution": sol,
        "audit": audit,
        "svg": svg.display().to_string(),
    }))?;
    Ok(if audit.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn grid(model: &ModelArgs, nu: u32) -> Result<ExitCode> {
    let g = Grids::build(&model.build()?, nu)?;
    let s = g.stats();
    json_out(&json!({
        "nu": nu,
        "densities": g.densities(),
        "speeds": g.speeds(),
        "j_nu": g.j_nu(),
        "clipped": g.clipped(),
        "stats": {
            "delta_rho": s.delta_rho, "eps_rho": s.eps_rho, "delta_u": s.delta_u, "eps_u": s.eps_u,
            "c_rho": s.c_rho, "C_rho": s.big_c_rho, "c_u": s.c_u, "C_u": s.big_c_u,
        },
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn validate(scenario: &Path, dir: &Path, samples: usize) -> Result<ExitCode> {
    let sc = load(scenario)?;
    let h = output::read_history(dir, &sc)?;
    let rep = validate_solution(&h, samples);
    println!(
        "fronts={} segments={} samples={} upsilon0={:.6} max_tv={:.6} max_mass_defect={:.3e}",
        rep.fronts_checked, rep.segments_checked, rep.samples_checked, rep.upsilon0, rep.max_tv, rep.max_mass_defect
    );
    for v in &rep.violations {
        println!("VIOLATION {} t={} {}", v.check, v.t, v.detail);
    }
    if rep.is_clean() {
        println!("clean");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} violation(s)", rep.violations.len());
        Ok(ExitCode::FAILURE)
    }
}

/// Tracker and finite-volume snapshots at `t_end`, on a window wide enough that
/// nothing reaches the finite-volume boundary.
fn compare(scenario: &Path, dx: f64, cfl: f64, levels: u32) -> Result<ExitCode> {
    let sc = load(scenario)?;
    println!("{:>4} {:>12} {:>14}", "nu", "dx", "L1(t_end)");
    let mut dists = Vec::new();
    for k in 0..levels {
        let nu = sc.nu + k;
        let dxk = dx / f64::from(1u32 << k);
        let d = tracker_vs_godunov(&sc, nu, dxk, cfl)?;
        println!("{nu:>4} {dxk:>12.3e} {d:>14.6e}");
        dists.push(d);
    }
    let monotone = dists.windows(2).all(|w| w[1] < w[0]);
    println!("monotone: {}", if monotone { "yes" } else { "no" });
    Ok(ExitCode::SUCCESS)
}

struct SweepRow {
    seed: u64,
    dists: Vec<f64>,
    fv: Vec<f64>,
    violations: usize,
}

fn sweep_one(seed: u64, nus: &[u32], reference: u32, t_end: f64, dxs: &[f64]) -> Result<SweepRow> {
    let spec = RandomSpec {
        t_end,
        max_jumps: 10,
        max_control_jumps: 5,
        ..RandomSpec::default()
    };
    let sc = random_scenario(&spec, seed);
    let fine = sc.solve_at(reference)?;
    let mut violations = validate_solution(&fine, 200).violations.len();
    let (lo, hi) = fine.spatial_extent();
    let window = (lo - 1.0, hi + 1.0);
    let mut dists = Vec::new();
    for &nu in nus {
        let h = sc.solve_at(nu)?;
        violations += validate_solution(&h, 200).violations.len();
        dists.push(space_time_l1(&h, &fine, window, 200)?);
    }
    let fv = dxs
        .iter()
        .map(|&dx| tracker_vs_godunov(&sc, reference, dx, 0.9))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepRow {
        seed,
        dists,
        fv,
        violations,
    })
}

fn sweep(
    scenarios: u64,
    first_seed: u64,
    nus: &[u32],
    reference: u32,
    t_end: f64,
    dxs: &[f64],
    threads: Option<usize>,
) -> Result<ExitCode> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let rows: Vec<Result<SweepRow>> = pool.install(|| {
        (first_seed..first_seed + scenarios)
            .into_par_iter()
            .map(|seed| sweep_one(seed, nus, reference, t_end, dxs))
            .collect()
    });
    let mut header = format!("{:>6}", "seed");
    for nu in nus {
        header += &format!(" {:>12}", format!("nu={nu}"));
    }
    for dx in dxs {
        header += &format!(" {:>12}", format!("fv dx={dx}"));
    }
    println!("{header} {:>10}", "violations");
    let mut failed = false;
    for row in rows {
        let row = row?;
        let mut line = format!("{:>6}", row.seed);
        for d in row.dists.iter().chain(&row.fv) {
            line += &format!(" {d:>12.4e}");
        }
        println!("{line} {:>10}", row.violations);
        failed |= row.violations > 0;
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            scenario,
            out,
            nu,
            diagram,
        } => solve(scenario, &out.out, nu, diagram),
        Command::Riemann {
            model,
            u,
            left,
            right,
            out,
        } => riemann(&model, u, left, right, &out.out),
        Command::Grid { model, nu } => grid(&model, nu),
        Command::Validate {
            scenario,
            dir,
            out,
            samples,
        } => validate(&scenario, dir.as_deref().unwrap_or(&out.out), samples),
        Command::Compare {
            scenario,
            dx,
            cfl,
            levels,
        } => compare(&scenario, dx, cfl, levels),
        Command::Sweep {
            scenarios,
            first_seed,
            nu,
            reference,
            t_end,
            dx,
            threads,
        } => sweep(scenarios, first_seed, &nu, reference, t_end, &dx, threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
