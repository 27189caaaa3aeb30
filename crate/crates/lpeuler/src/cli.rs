//! Command-line front end: `norms`, `verify`, `simulate`, `iterate`,
//! `weights`.
//!
//! Exit codes: 0 on success, 1 on assertion-style violations (an inequality
//! or identity the run asserts failed, or the numerics broke down), 2 on
//! configuration errors. The environment variable `LPEULER_THREADS` caps
//! worker parallelism.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::calculus::{self, SuiteId, SuiteParams};
use crate::config::{IterateExperiment, KvConfig, SimulateExperiment};
use crate::error::{Error, Result};
use crate::euler;
use crate::field::FrequencyGrid;
use crate::io::read_field_file;
use crate::iteration::{self, T0Gate};
use crate::lp::build_partition;
use crate::spaces::{self, SpaceSpec};
use crate::weights::{self, SlowlyVaryingWeight};

#[derive(Parser)]
#[command(
    name = "lpeuler",
    about = "Littlewood-Paley analysis toolkit and 2D Euler laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a weighted Besov / Triebel-Lizorkin norm of a field file.
    Norms {
        /// Field file (LPF1 binary or x,y,value CSV).
        #[arg(long)]
        input: PathBuf,
        /// Space spec, e.g. B:s=2,p=2,q=2 or F:s=2,p=2,q=2,hom.
        #[arg(long)]
        space: String,
        /// Weight spec: log:alpha=<f> or table:<path>.
        #[arg(long, default_value = "log:alpha=1")]
        weight: String,
    },
    /// Run an inequality-verification suite over seeded random fields.
    Verify {
        /// One of: paraproduct, leibniz, commutator-b, commutator-tl,
        /// remainder, multiplier, maximal, embedding, bernstein.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base Besov spec for the estimates.
        #[arg(long, default_value = "B:s=2,p=2,q=2")]
        space: String,
        #[arg(long, default_value = "log:alpha=1")]
        weight: String,
        /// Extra grid sizes for a resolution sweep, e.g. --sweep 128,256.
        #[arg(long)]
        sweep: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the 2D Euler equations and record diagnostics.
    Simulate {
        /// key = value config file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the local-existence iteration and record contraction data.
    Iterate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Inspect a slowly varying weight: values, defects, admissibility.
    Weights {
        #[arg(long)]
        weight: String,
        /// Admissibility exponent r.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 1e8)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn parse_and_dispatch<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    init_thread_pool();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit-code policy: assertion-style violations and numeric breakdowns exit
/// 1, configuration problems exit 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Violation(_) | Error::Numeric(_) => 1,
        Error::Config(_)
        | Error::Parse(_)
        | Error::Domain(_)
        | Error::Range(_)
        | Error::Precondition(_)
        | Error::StepSize { .. }
        | Error::Io(_) => 2,
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("LPEULER_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
}

fn run_command(cmd: Command) -> Result<()> {
    match cmd {
        Command::Norms {
            input,
            space,
            weight,
        } => cmd_norms(&input, &space, &weight),
        Command::Verify {
            suite,
            samples,
            grid,
            seed,
            space,
            weight,
            sweep,
            out,
        } => cmd_verify(&suite, samples, grid, seed, &space, &weight, sweep, out),
        Command::Simulate { config } => cmd_simulate(&config),
        Command::Iterate { config } => cmd_iterate(&config),
        Command::Weights {
            weight,
            r,
            t_max,
            out,
        } => cmd_weights(&weight, r, t_max, out),
    }
}

fn cmd_norms(input: &Path, space: &str, weight: &str) -> Result<()> {
    let w = SlowlyVaryingWeight::parse_spec(weight)?;
    let spec = SpaceSpec::parse(space, w)?;
    let file = read_field_file(input)?;
    let grid = FrequencyGrid::new(file.n, file.l)?;
    let part = build_partition(&grid)?;
    let value = match file.components.len() {
        1 => spaces::norm(&file.to_scalar(&grid)?, &spec, &part)?,
        2 => spaces::norm_vector(&file.to_vector(&grid)?, &spec, &part)?,
        other => {
            return Err(Error::Config(format!(
                "unsupported component count {other}"
            )))
        }
    };
    println!("{value:.12e}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    suite: &str,
    samples: usize,
    grid: usize,
    seed: u64,
    space: &str,
    weight: &str,
    sweep: Option<String>,
    out: Option<PathBuf>,
) -> Result<()> {
    let id = SuiteId::parse(suite)?;
    let w = SlowlyVaryingWeight::parse_spec(weight)?;
    let spec = SpaceSpec::parse(space, w)?;
    let params = SuiteParams::new(samples, grid, seed, spec);
    let grids: Vec<usize> = match &sweep {
        None => vec![grid],
        Some(text) => {
            let mut gs = vec![grid];
            for part in text.split(',') {
                gs.push(
                    part.trim()
                        .parse()
                        .map_err(|e| Error::Parse(format!("bad sweep entry {part}: {e}")))?,
                );
            }
            gs
        }
    };
    let reports = calculus::run_suite_sweep(id, &params, &grids)?;

    let mut body = Vec::new();
    write_config_header(
        &mut body,
        "verify",
        &[
            ("grid".into(), format!("{grid}")),
            ("samples".into(), format!("{samples}")),
            ("seed".into(), format!("{seed}")),
            ("space".into(), params.space.spec_string()),
            ("suite".into(), suite.to_string()),
            (
                "sweep".into(),
                grids
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("weight".into(), params.space.weight.spec_string()),
        ],
    )?;
    for report in &reports {
        writeln!(body, "# estimate_id = {}", report.estimate_id)?;
        report.write_csv(&mut body)?;
    }
    emit(out.as_deref(), &body)?;

    let mut violated = false;
    for report in &reports {
        let sweep_note = if report.sweep.len() > 1 {
            format!(", sweep spread {:.3}", report.sweep_spread())
        } else {
            String::new()
        };
        println!(
            "{}: samples {}, empirical constant {:.6e}{}",
            report.estimate_id,
            report.samples(),
            report.empirical_constant(),
            sweep_note
        );
        if report.exceeded_threshold() {
            violated = true;
        }
    }
    if violated {
        return Err(Error::Violation(format!(
            "suite {suite} exceeded its acceptance threshold"
        )));
    }
    Ok(())
}

fn cmd_simulate(config: &Path) -> Result<()> {
    let kv = KvConfig::parse(&std::fs::read_to_string(config)?)?;
    let exp = SimulateExperiment::from_kv(&kv)?;
    let series = euler::run(&exp.run)?;

    let mut body = Vec::new();
    write_config_header(&mut body, "simulate", &exp.resolved())?;
    writeln!(
        body,
        "t,energy,enstrophy,linf_vorticity,lp2_vorticity,grad_u_linf,bkm_integrand,bkm_integral,space_norm,apriori_bound,bkm_bound"
    )?;
    for r in &series.records {
        let lp2 = r.lp(2.0).unwrap_or(0.0);
        writeln!(
            body,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.t,
            r.energy,
            r.enstrophy,
            r.linf_vorticity,
            lp2,
            r.grad_u_linf,
            r.bkm_integrand,
            r.bkm_integral,
            r.space_norm,
            r.apriori_bound,
            r.bkm_bound
        )?;
    }
    emit(exp.out.as_deref().map(Path::new), &body)?;

    let f = &series.fitted;
    println!(
        "simulate: {} samples to t = {:.4}; fitted constants: apriori {:.4}, bkm-chain {:.4}, global {:.4}, reverse-bkm {:.4}",
        series.records.len(),
        series.records.last().map(|r| r.t).unwrap_or(0.0),
        f.c_apriori,
        f.c_bkm_chain,
        f.c_global,
        f.c_reverse_bkm
    );
    series.check_apriori()?;
    series.check_bkm_chain()?;
    series.check_global_bound()?;
    println!("simulate: a priori, BKM-chain, and 2-D global bounds hold");
    Ok(())
}

fn cmd_iterate(config: &Path) -> Result<()> {
    let kv = KvConfig::parse(&std::fs::read_to_string(config)?)?;
    let mut exp = IterateExperiment::from_kv(&kv)?;
    let grid = FrequencyGrid::new(exp.grid_n, exp.domain_l)?;
    let part = build_partition(&grid)?;
    let omega0 = euler::initial_vorticity(&exp.init, &grid, exp.seed)?;
    let u0 = euler::biot_savart(&omega0)?;

    if exp.c_empirical_given.is_none() && exp.iteration.enforce_t0 {
        // fit the a priori constant from a short nonlinear run on this data
        let fit = euler::RunConfig {
            grid_n: exp.grid_n,
            domain_l: exp.domain_l,
            dt: exp.iteration.dt,
            t_end: (20.0 * exp.iteration.dt).max(0.99 * exp.iteration.t_horizon.min(0.2)),
            cfl: exp.iteration.cfl,
            dealias: true,
            init: exp.init.clone(),
            space: exp.iteration.space.clone(),
            lp_exponents: vec![2.0],
            sample_every: 1,
            seed: exp.seed,
        };
        let series = euler::run_with(&part, omega0.clone(), &fit)?;
        let c = series.fitted.c_apriori.max(1e-3);
        println!("iterate: fitted c_empirical = {c:.6} from a nonlinear pilot run");
        exp.iteration.c_empirical = c;
    }

    let out = iteration::iterate(&u0, &exp.iteration, &part)?;
    let mut body = Vec::new();
    write_config_header(&mut body, "iterate", &exp.resolved())?;
    writeln!(body, "n,sup_norm,delta_n,rho_n,uniform_ok")?;
    for r in &out.records {
        writeln!(
            body,
            "{},{:.12e},{:.12e},{},{}",
            r.n,
            r.sup_norm,
            r.delta_n,
            r.rho_n.map(|v| format!("{v:.12e}")).unwrap_or_default(),
            r.uniform_ok
        )?;
    }
    emit(exp.out.as_deref().map(Path::new), &body)?;

    match &out.gate {
        T0Gate::Applied { t0 } => {
            println!("iterate: horizon {} (T0 = {t0:.6}), ||u0|| = {:.6}", out.t_used, out.u0_norm)
        }
        T0Gate::Inapplicable { reason } => {
            println!("iterate: T0 gate inapplicable ({reason}); horizon {}", out.t_used)
        }
        T0Gate::NotRequested => println!("iterate: horizon {}", out.t_used),
    }
    for r in &out.records {
        println!(
            "n = {}: sup {:.6e}, delta {:.6e}, rho {}, uniform_ok {}",
            r.n,
            r.sup_norm,
            r.delta_n,
            r.rho_n.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
            r.uniform_ok
        );
    }
    match out.contraction_ratio(out.noise_floor()) {
        Some(rho) => println!("iterate: contraction ratio {rho:.4} (noise floor excluded)"),
        None => println!("iterate: increments at the noise floor from the start"),
    }
    if matches!(out.gate, T0Gate::Applied { .. }) && out.records.iter().any(|r| !r.uniform_ok) {
        return Err(Error::Violation(
            "uniform bound sup ||u_n|| <= 2 ||u_0|| failed inside the T0 horizon".into(),
        ));
    }
    Ok(())
}

fn cmd_weights(weight: &str, r: f64, t_max: f64, out: Option<PathBuf>) -> Result<()> {
    let w = SlowlyVaryingWeight::parse_spec(weight)?;
    let report = weights::is_admissible(&w, r)?;
    let adm = weights::admissibility_integral(&w, r, t_max)?;
    println!("weight {}: non-decreasing {}", w.spec_string(), w.is_non_decreasing());
    println!(
        "admissible for r = {r}: {} ({}{})",
        report.admissible,
        report.detail,
        if report.empirical { "; empirical" } else { "" }
    );
    if adm.diverged {
        println!("admissibility integral to t_max = {t_max:.3e}: divergent (psi vanishes)");
    } else {
        println!(
            "admissibility integral to t_max = {t_max:.3e}: {:.6e}, dyadic proxy {:.6e}, equivalence ratio {:.4}",
            adm.integral,
            adm.dyadic_sum,
            adm.equivalence_ratio()
        );
    }
    let grid: Vec<f64> = (2..=8).map(|k| 10f64.powi(k)).collect();
    let defects = w.slow_variation_defect(2.0, &grid)?;
    println!("slow-variation defects (lambda = 2): {:?}", defects);

    let mut body = Vec::new();
    write_config_header(
        &mut body,
        "weights",
        &[
            ("r".into(), format!("{r}")),
            ("t_max".into(), format!("{t_max}")),
            ("weight".into(), w.spec_string()),
        ],
    )?;
    writeln!(body, "j,t,psi")?;
    for j in -1..=40 {
        let t = 2f64.powi(j);
        writeln!(body, "{j},{t:.12e},{:.12e}", w.at(t))?;
    }
    emit(out.as_deref(), &body)?;
    Ok(())
}

/// Write the resolved-config comment header shared by every output CSV.
/// The `generated_at` line is the only part excluded from determinism
/// comparisons.
fn write_config_header<W: Write>(
    w: &mut W,
    subcommand: &str,
    pairs: &[(String, String)],
) -> Result<()> {
    writeln!(w, "# lpeuler {subcommand}")?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(w, "# generated_at = {stamp}")?;
    for (k, v) in pairs {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn emit(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, body)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(body)?;
            Ok(())
        }
    }
}

/// Re-exported for tests: strip the timestamp line from a CSV body.
pub fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
}
