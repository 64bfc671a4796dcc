//! Command definitions and dispatch. All randomness flows from `--seed`
//! (or `SVL_SEED`); identical invocations produce byte-identical outputs.

use crate::fmt::{
    boundary_spec_string, parse_domain, parse_entrance_spec, parse_exit_spec, parse_f64_list,
    parse_full_boundary, parse_stochastic, parse_weights_f64, parse_weights_rational,
    rational_string,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use svl_core::exact::{self, Caps};
use svl_core::extend::{extend, ExtensionProblem};
use svl_core::lattice::{boundary_of, Ensemble, Rect};
use svl_core::regularity::{psi_values, slope_estimate, theta_event, GridSpec};
use svl_core::restrict::{restrict_boundary, restrict_ensemble, RestrictionParams};
use svl_core::rng::replica_seed;
use svl_core::sampler::{sample, sample_mu_window, EntranceKind, SamplerSpec};
use svl_core::weights::{SlopePair, StochasticParams, WeightSystem};

#[derive(Parser)]
#[command(
    name = "svl",
    version,
    about = "Six-vertex lattice toolkit: phase geometry, exact enumeration, stochastic sampling, sparsification, extension"
)]
pub struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, env = "SVL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for replicated sampling and verification.
    #[arg(long, global = true, env = "SVL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Phase-diagram quantities: anisotropy, classification, hyperbolas.
    Phase(PhaseArgs),
    /// Seeded sampling of the stochastic model.
    Sample(SampleArgs),
    /// Exact enumeration / transfer-matrix partition functions.
    Exact(ExactArgs),
    /// (L; K)-restriction of ensembles or boundary data.
    Restrict(RestrictArgs),
    /// Constructive extension of an inner ensemble to outer boundary data.
    Extend(ExtendArgs),
    /// Shift-average, tile-regularity and slope statistics.
    Stats(StatsArgs),
    /// Round-trip an ensemble file (parse, validate, re-emit).
    Convert(ConvertArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct PhaseArgs {
    /// Six weights a1,a2,b1,b2,c1,c2.
    #[arg(long, conflicts_with = "stochastic")]
    pub weights: Option<String>,
    /// Stochastic parameters B1,B2 (weights 1,1,B1,B2,1-B1,1-B2).
    #[arg(long)]
    pub stochastic: Option<String>,
    /// Slope s,t to classify against the lens region.
    #[arg(long)]
    pub slope: Option<String>,
    /// Emit n+1 sample points of each hyperbola as CSV `s,t,curve`.
    #[arg(long)]
    pub curve_samples: Option<u32>,
    /// Classification tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long = "B1")]
    pub b1: f64,
    #[arg(long = "B2")]
    pub b2: f64,
    /// Domain size WxH.
    #[arg(long)]
    pub domain: String,
    /// `explicit:<S:.. W:..>` | `bernoulli:rho1,rho2` | `mu:rho`.
    #[arg(long)]
    pub entrance: String,
    /// Number of replicas; one emits the ensemble, several emit statistics.
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// Output path or `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Float,
    Rational,
    Transfer,
}

#[derive(Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub domain: String,
    /// Entrance spec `S:x1,x2 W:y1,...`.
    #[arg(long)]
    pub entrance: String,
    /// Exit spec `N:x1,... E:y1,...`; omitted means free exit.
    #[arg(long)]
    pub exit: Option<String>,
    /// Six weights; exact rationals (`3/10` or decimals) for the rational backend.
    #[arg(long, conflicts_with = "stochastic")]
    pub weights: Option<String>,
    /// Stochastic parameters B1,B2.
    #[arg(long)]
    pub stochastic: Option<String>,
    #[arg(long, value_enum, default_value_t = Backend::Float)]
    pub backend: Backend,
    /// Enumeration cap (vertices).
    #[arg(long, default_value_t = 36)]
    pub enum_cap: usize,
    /// Transfer-matrix width cap.
    #[arg(long, default_value_t = 24)]
    pub transfer_cap: i64,
}

#[derive(Args)]
pub struct RestrictArgs {
    /// Input ensemble file.
    #[arg(long, required_unless_present = "boundary_only")]
    pub r#in: Option<PathBuf>,
    #[arg(long = "L")]
    pub l: u64,
    #[arg(long = "K")]
    pub k: u64,
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Operate on a boundary spec string instead of an ensemble file.
    #[arg(long)]
    pub boundary_only: bool,
    /// Boundary spec (with --boundary-only).
    #[arg(long, requires = "boundary_only")]
    pub data: Option<String>,
    /// Domain WxH (with --boundary-only).
    #[arg(long, requires = "boundary_only")]
    pub domain: Option<String>,
}

#[derive(Args)]
pub struct ExtendArgs {
    /// Outer boundary spec on [1, N+2W]^2.
    #[arg(long)]
    pub outer: String,
    /// Inner ensemble file on [W+1, N+W]^2.
    #[arg(long)]
    pub inner: PathBuf,
    #[arg(long = "N")]
    pub n: i64,
    #[arg(long = "W")]
    pub w: i64,
    /// Slope s,t used for the frame flows and the advisory check.
    #[arg(long)]
    pub slope: String,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long = "R", default_value_t = 1)]
    pub r: u64,
    /// Extended ensemble output path or `-`.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// JSON diagnostics path (`-` for stdout, default).
    #[arg(long, default_value = "-")]
    pub diagnostics: String,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Input ensemble files.
    #[arg(long, num_args = 1.., required = true)]
    pub r#in: Vec<PathBuf>,
    /// Pattern ensemble file on [-k, k]^2 (grid mode).
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Grid K,M,Y,k.
    #[arg(long)]
    pub grid: Option<String>,
    /// Tile-regularity tolerance eta for the theta column.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Tile-regularity slope for the theta column.
    #[arg(long, default_value_t = 0.5)]
    pub slope_s: f64,
    /// Emit window slope estimates instead of grid statistics.
    #[arg(long)]
    pub slope: bool,
    /// Window x1,x2,y1,y2 (slope mode).
    #[arg(long, requires = "slope")]
    pub window: Option<String>,
}

#[derive(Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub r#in: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyLevel::Fast)]
    pub level: VerifyLevel,
}

/// Entry point: returns the process exit code (0 success, 1 domain error,
/// 2 usage error).
pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Phase(a) => cmd_phase(a),
        Command::Sample(a) => cmd_sample(a, cli.seed),
        Command::Exact(a) => cmd_exact(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Extend(a) => cmd_extend(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Verify(a) => {
            let level = match a.level {
                VerifyLevel::Fast => crate::verify::Level::Fast,
                VerifyLevel::Full => crate::verify::Level::Full,
            };
            let report = crate::verify::run_suite(level, cli.seed);
            print!("{}", crate::verify::render(&report));
            Ok(if report.iter().all(|c| c.pass) { 0 } else { 1 })
        }
    }
}

fn write_output(target: &str, content: &str) -> Result<()> {
    if target == "-" {
        print!("{content}");
        std::io::stdout().flush()?;
    } else {
        fs::write(target, content).with_context(|| format!("writing {target}"))?;
    }
    Ok(())
}

fn read_ensemble(path: &Path) -> Result<Ensemble> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let e = Ensemble::from_text(&text)?;
    e.ensure_valid()?;
    Ok(e)
}

fn phase_weights(weights: &Option<String>, stochastic: &Option<String>) -> Result<WeightSystem<f64>> {
    match (weights, stochastic) {
        (Some(w), None) => parse_weights_f64(w),
        (None, Some(s)) => Ok(WeightSystem::stochastic(&parse_stochastic(s)?)),
        _ => bail!("give exactly one of --weights or --stochastic"),
    }
}

fn cmd_phase(a: &PhaseArgs) -> Result<i32> {
    let w = phase_weights(&a.weights, &a.stochastic)?;
    let mut out = String::new();
    if let Some(slope) = &a.slope {
        let [s, t] = parse_f64_list::<2>(slope, "--slope")?;
        let st = SlopePair::new(s, t)?;
        let class = w.classify_slope(&st, a.tol)?;
        out.push_str(&format!("{class}\n"));
        if let Ok((params, _)) = w.to_stochastic() {
            if params.b1 < params.b2 {
                if let Ok((st0, vartheta)) = params.project_to_boundary(&st) {
                    out.push_str(&format!("s0={} t0={} vartheta={}\n", st0.s, st0.t, vartheta));
                }
            }
        }
    } else if let Some(n) = a.curve_samples {
        if n == 0 {
            bail!("--curve-samples must be positive");
        }
        out.push_str("s,t,curve\n");
        for curve in [1u8, 2] {
            for i in 0..=n {
                let x = i as f64 / n as f64;
                let t = if curve == 1 { w.h1_curve(x)? } else { w.h2_curve(x)? };
                out.push_str(&format!("{x},{t},{curve}\n"));
            }
        }
    } else {
        out.push_str(&format!("delta={}\n", w.delta()));
        out.push_str(&format!("ferroelectric={}\n", w.is_ferroelectric()));
        if let Ok((p, _)) = w.to_stochastic() {
            out.push_str(&format!("B1={} B2={}\n", p.b1, p.b2));
        }
    }
    print!("{out}");
    Ok(0)
}

fn cmd_sample(a: &SampleArgs, seed: u64) -> Result<i32> {
    let params = StochasticParams::new(a.b1, a.b2)?;
    let domain = parse_domain(&a.domain)?;
    enum Mode {
        Spec(EntranceKind),
        Mu(f64),
    }
    let mode = if let Some(rest) = a.entrance.strip_prefix("explicit:") {
        Mode::Spec(EntranceKind::Explicit(parse_entrance_spec(rest)?))
    } else if let Some(rest) = a.entrance.strip_prefix("bernoulli:") {
        let [rho1, rho2] = parse_f64_list::<2>(rest, "bernoulli entrance")?;
        Mode::Spec(EntranceKind::DoubleSidedBernoulli { rho1, rho2 })
    } else if let Some(rest) = a.entrance.strip_prefix("mu:") {
        Mode::Mu(rest.trim().parse().context("mu entrance density")?)
    } else {
        bail!("--entrance must start with explicit:, bernoulli: or mu:");
    };
    let one = |rep: u64| -> Result<Ensemble> {
        let s = replica_seed(seed, rep);
        match &mode {
            Mode::Spec(kind) => Ok(sample(&SamplerSpec {
                params,
                domain,
                entrance: kind.clone(),
                seed: s,
            })?),
            Mode::Mu(rho) => Ok(sample_mu_window(&params, *rho, domain, s)?),
        }
    };
    if a.reps == 1 {
        let e = one(0)?;
        write_output(&a.out, &e.to_text()?)?;
    } else {
        use rayon::prelude::*;
        let rows: Vec<Result<String>> = (0..a.reps)
            .into_par_iter()
            .map(|rep| {
                let e = one(rep)?;
                let st = slope_estimate(&e, e.domain())?;
                Ok(format!("{rep},{},{}\n", st.s, st.t))
            })
            .collect();
        let mut csv = String::from("rep,slope_v,slope_h\n");
        for r in rows {
            csv.push_str(&r?);
        }
        write_output(&a.out, &csv)?;
    }
    Ok(0)
}

fn cmd_exact(a: &ExactArgs) -> Result<i32> {
    let domain = parse_domain(&a.domain)?;
    let entrance = parse_entrance_spec(&a.entrance)?;
    let exit = a.exit.as_deref().map(parse_exit_spec).transpose()?;
    let caps = Caps { max_enum_vertices: a.enum_cap, max_transfer_width: a.transfer_cap };
    let (log_z, count, z_exact) = match a.backend {
        Backend::Rational => {
            let w = match (&a.weights, &a.stochastic) {
                (Some(ws), None) => parse_weights_rational(ws)?,
                (None, Some(s)) => {
                    let parts: Vec<num::BigRational> = s
                        .split(',')
                        .map(crate::fmt::parse_rational)
                        .collect::<Result<_>>()?;
                    if parts.len() != 2 {
                        bail!("--stochastic expects B1,B2");
                    }
                    let p = StochasticParams::new(parts[0].clone(), parts[1].clone())?;
                    WeightSystem::stochastic(&p)
                }
                _ => bail!("give exactly one of --weights or --stochastic"),
            };
            let (z, count) = exact::z_enumerate(domain, &w, &entrance, exit.as_ref(), &caps)?;
            let log_z = z.to_f64().map(|v| v.ln()).unwrap_or(f64::NEG_INFINITY);
            (log_z, count, Some(rational_string(&z)))
        }
        Backend::Float | Backend::Transfer => {
            let w = phase_weights(&a.weights, &a.stochastic)?;
            let (z, count) = if a.backend == Backend::Float {
                exact::z_enumerate(domain, &w, &entrance, exit.as_ref(), &caps)?
            } else {
                exact::z_transfer(domain, &w, &entrance, exit.as_ref(), &caps)?
            };
            (z.ln(), count, None)
        }
    };
    println!("log_Z={log_z}");
    println!("count={count}");
    if let Some(z) = z_exact {
        println!("Z={z}");
    }
    Ok(0)
}

fn cmd_restrict(a: &RestrictArgs) -> Result<i32> {
    let params = RestrictionParams::new(a.l, a.k)?;
    if a.boundary_only {
        let domain = parse_domain(
            a.domain.as_deref().ok_or_else(|| anyhow!("--boundary-only needs --domain"))?,
        )?;
        let spec = a.data.as_deref().ok_or_else(|| anyhow!("--boundary-only needs --data"))?;
        let bd = parse_full_boundary(spec, domain)?;
        let restricted = restrict_boundary(&bd, &params);
        println!("{}", boundary_spec_string(&restricted, domain));
        return Ok(0);
    }
    let e = read_ensemble(a.r#in.as_deref().unwrap())?;
    let restricted = restrict_ensemble(&e, &params)?;
    write_output(&a.out, &restricted.to_text()?)?;
    Ok(0)
}

fn cmd_extend(a: &ExtendArgs) -> Result<i32> {
    let [s, t] = parse_f64_list::<2>(&a.slope, "--slope")?;
    let inner = read_ensemble(&a.inner)?;
    let outer_domain = Rect::of_size(a.n + 2 * a.w, a.n + 2 * a.w);
    let outer_bd = parse_full_boundary(&a.outer, outer_domain)?;
    let problem = ExtensionProblem {
        n: a.n,
        w: a.w,
        outer_bd,
        inner,
        r: a.r,
        eta: a.eta,
        st: SlopePair::new(s, t)?,
    };
    let t0 = std::time::Instant::now();
    let result = extend(&problem)?;
    let elapsed = t0.elapsed().as_secs_f64();
    write_output(&a.out, &result.ensemble.to_text()?)?;
    let diag = serde_json::json!({
        "K1": result.plan.flows[0],
        "K2": result.plan.flows[1],
        "K3": result.plan.flows[2],
        "K4": result.plan.flows[3],
        "nwr_satisfied": result.nwr_satisfied,
        "stage_timings": { "extend_seconds": elapsed },
    });
    let rendered = format!("{}\n", serde_json::to_string_pretty(&diag)?);
    if a.diagnostics == "-" && a.out == "-" {
        eprint!("{rendered}");
    } else {
        write_output(&a.diagnostics, &rendered)?;
    }
    Ok(0)
}

fn cmd_stats(a: &StatsArgs) -> Result<i32> {
    if a.slope {
        let spec = a.window.as_deref().ok_or_else(|| anyhow!("--slope needs --window"))?;
        let [x1, x2, y1, y2] = parse_f64_list::<4>(spec, "--window")?;
        let window = Rect::new(x1 as i64, x2 as i64, y1 as i64, y2 as i64);
        let mut out = String::from("slope_v,slope_h\n");
        for path in &a.r#in {
            let e = read_ensemble(path)?;
            let st = slope_estimate(&e, window)?;
            out.push_str(&format!("{},{}\n", st.s, st.t));
        }
        print!("{out}");
        return Ok(0);
    }
    let grid_spec = a.grid.as_deref().ok_or_else(|| anyhow!("grid mode needs --grid K,M,Y,k"))?;
    let nums: Vec<i64> = grid_spec
        .split(',')
        .map(|p| p.trim().parse::<i64>().context("--grid"))
        .collect::<Result<_>>()?;
    if nums.len() != 4 {
        bail!("--grid expects K,M,Y,k");
    }
    let grid = GridSpec::new(nums[0] as u64, nums[1] as u64, nums[2], nums[3] as u64)?;
    let pattern_path =
        a.pattern.as_deref().ok_or_else(|| anyhow!("grid mode needs --pattern"))?;
    let pattern = {
        let text = fs::read_to_string(pattern_path)
            .with_context(|| format!("reading {}", pattern_path.display()))?;
        Ensemble::from_text(&text)?
    };
    let mut out = String::from("i,psi,theta\n");
    for path in &a.r#in {
        let e = read_ensemble(path)?;
        let psis = psi_values(&e, &pattern, &grid)?;
        for (idx, psi) in psis.iter().enumerate() {
            let i = idx as u64 + 1;
            let theta = theta_event(&e, i, &grid, a.eta, a.slope_s)?;
            out.push_str(&format!("{i},{},{}\n", *psi as u8, theta as u8));
        }
    }
    print!("{out}");
    Ok(0)
}

fn cmd_convert(a: &ConvertArgs) -> Result<i32> {
    let e = read_ensemble(&a.r#in)?;
    write_output(&a.out, &e.to_text()?)?;
    Ok(0)
}

/// Boundary data of an ensemble rendered as a spec string (used in tests).
pub fn boundary_spec_of(e: &Ensemble) -> Result<String> {
    let bd = boundary_of(e)?;
    Ok(boundary_spec_string(&bd, e.domain()))
}
