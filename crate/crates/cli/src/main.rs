use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ljmayer::lsbound::rmin_certificate;
use ljmayer::oracle::{
    c2_exact, c3_monte_carlo, minimize_energy, probe_local_minimum, check_prop1, McParams,
    MinimizeParams,
};
use ljmayer::quad::{c_beta, tilde_c_beta};
use ljmayer::radius::{
    a_grid, coefficient_bound, optimize_radius, BoundInputs, EllPolicy, RadiusReport, Variant,
};
use ljmayer::verify::{bounds, curve, verify_paper, CurveKind, RunConfig};
use ljmayer::{Error, PotentialSpec};
use serde::Serialize;

/// Certified lower bounds on the Mayer-series convergence radius of the
/// Lennard-Jones gas.
#[derive(Parser, Debug)]
#[command(name = "ljmayer", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Inverse temperature.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Cut-off radius.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Cube side of the covering argument.
    #[arg(long, global = true)]
    ell: Option<f64>,
    /// Stability constant B.
    #[arg(long, global = true)]
    stability: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON result to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write CSV rows to this path instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Line-oriented `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the full check suite and write a report.
    VerifyPaper {
        /// Monte-Carlo samples for C_3.
        #[arg(long)]
        samples: Option<usize>,
        /// Multistart count per cluster size.
        #[arg(long)]
        starts: Option<usize>,
        /// Largest cluster size.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Print both radius bounds, their ratio and the coefficient table.
    Bounds,
    /// Sweep the cut-off radius and report the largest certified radius.
    Optimize {
        #[arg(long, default_value_t = 0.30)]
        from: f64,
        #[arg(long, default_value_t = 0.3637)]
        to: f64,
        #[arg(long, default_value_t = 0.0025)]
        step: f64,
        /// Use the configured ell for every point instead of ell = 2a/sqrt(3).
        #[arg(long)]
        fixed_ell: bool,
    },
    /// Emit (x, y) rows of a curve for plotting.
    Curve {
        #[arg(value_enum)]
        what: CurveArg,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Brute-force consistency checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Multistart minimisation of an N-particle cluster.
    Minimize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, value_enum, default_value_t = PotentialArg::Lj)]
        potential: PotentialArg,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
        /// Write the best configuration as `x y z` lines.
        #[arg(long, value_name = "PATH")]
        xyz: Option<PathBuf>,
    },
    /// Low-order Mayer coefficient against its bounds.
    Mayer {
        #[arg(long)]
        order: u32,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Radius of the sampling ball for order 3.
        #[arg(long, default_value_t = 5.0)]
        cutoff_radius: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CurveArg {
    #[value(name = "F", alias = "f")]
    F,
    Case1,
    Case2,
    RadiusVsA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PotentialArg {
    Lj,
    Cutoff,
}

/// Exit status with a message.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

/// Parameter errors are usage errors; anything else is a failed run.
fn classify(e: Error) -> Failure {
    match e {
        Error::Domain(_) | Error::Cap { .. } => usage(e.to_string()),
        _ => failed(e.to_string()),
    }
}

fn build_config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &global.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    if let Some(v) = global.beta {
        cfg.beta = v;
    }
    if let Some(v) = global.a {
        cfg.a = v;
    }
    if let Some(v) = global.ell {
        cfg.ell = v;
    }
    if let Some(v) = global.stability {
        cfg.stability_b = v;
    }
    if let Some(v) = global.seed {
        cfg.seed = v;
    }
    if let Some(p) = &global.json {
        cfg.json = Some(p.display().to_string());
    }
    if let Some(p) = &global.csv {
        cfg.csv = Some(p.display().to_string());
    }
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| failed(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<(), Failure> {
    if let Some(path) = &cfg.json {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| failed(format!("serialisation failed: {e}")))?;
        write_file(Path::new(path), &(text + "\n"))?;
    }
    Ok(())
}

fn emit_csv(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.csv {
        Some(path) => write_file(Path::new(path), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Returns whether every executed check passed.
fn run(cli: Cli) -> Result<bool, Failure> {
    let mut cfg = build_config(&cli.global)?;
    match cli.command {
        Command::VerifyPaper {
            samples,
            starts,
            n_max,
        } => {
            if let Some(v) = samples {
                cfg.mc_samples = v;
            }
            if let Some(v) = starts {
                cfg.starts = v;
            }
            if let Some(v) = n_max {
                cfg.n_max = v;
            }
            cfg.validate().map_err(classify)?;
            cmd_verify_paper(&cfg)
        }
        Command::Bounds => {
            cfg.validate().map_err(classify)?;
            cmd_bounds(&cfg)
        }
        Command::Optimize {
            from,
            to,
            step,
            fixed_ell,
        } => {
            cfg.validate().map_err(classify)?;
            cmd_optimize(&cfg, from, to, step, fixed_ell)
        }
        Command::Curve {
            what,
            from,
            to,
            step,
        } => {
            cfg.validate().map_err(classify)?;
            let kind = match what {
                CurveArg::F => CurveKind::F,
                CurveArg::Case1 => CurveKind::Case1,
                CurveArg::Case2 => CurveKind::Case2,
                CurveArg::RadiusVsA => CurveKind::RadiusVsA,
            };
            cmd_curve(&cfg, kind, from, to, step)
        }
        Command::Oracle(OracleCommand::Minimize {
            n,
            starts,
            potential,
            max_iters,
            xyz,
        }) => {
            cfg.validate().map_err(classify)?;
            cmd_minimize(&cfg, n, starts, potential, max_iters, xyz.as_deref())
        }
        Command::Oracle(OracleCommand::Mayer {
            order,
            samples,
            cutoff_radius,
        }) => {
            cfg.validate().map_err(classify)?;
            cmd_mayer(&cfg, order, samples, cutoff_radius)
        }
    }
}

fn cmd_verify_paper(cfg: &RunConfig) -> Result<bool, Failure> {
    let report = verify_paper(cfg).map_err(|e| failed(e.to_string()))?;
    for check in &report.checks {
        println!("{}", check.summary());
    }
    if let Some(reason) = &report.certificate.certificate.failure_reason {
        println!("certificate failure: {reason}");
    }
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        println!("all {} checks passed", report.checks.len());
    } else {
        println!("{} of {} checks failed:", failures.len(), report.checks.len());
        for f in &failures {
            println!("  {}", f.id);
        }
    }
    write_json(cfg, &report)?;
    Ok(report.passed)
}

fn print_radius_report(r: &RadiusReport) {
    let i = &r.inputs;
    println!(
        "beta = {}  B = {}  a = {}  C = {:.10}  C~ = {:.10}",
        i.beta, i.stability_b, i.a, i.c, i.c_tilde
    );
    println!("rho_PR  = {:.6e}  (ln {:.6})", r.rho_pr, r.ln_rho_pr);
    println!("rho_new = {:.6e}  (ln {:.6})", r.rho_new, r.ln_rho_new);
    println!("ratio rho_new / rho_PR = {:.6e}  (ln {:.6})", r.ratio, r.ratio.ln());
    println!(
        "conservative ratio lower bound e^(beta B) 7.89/50000 = {:.6e}  (ln {:.6})",
        r.ratio_lower_bound,
        r.ratio_lower_bound.ln()
    );
    if let Some(c) = &r.certificate {
        match &c.failure_reason {
            None => println!(
                "certificate at ell = {}: valid, r_min >= {:.6}",
                c.ell, c.rmin_lower
            ),
            Some(reason) => println!("certificate at ell = {}: invalid ({reason})", c.ell),
        }
    }
    println!("{:>3} {:>14} {:>14}", "n", "|C_n| PR", "|C_n| new");
    for row in &r.coefficient_bounds {
        println!("{:>3} {:>14.6e} {:>14.6e}", row.n, row.pr, row.new);
    }
}

fn cmd_bounds(cfg: &RunConfig) -> Result<bool, Failure> {
    let report = bounds(cfg).map_err(classify)?;
    print_radius_report(&report);
    write_json(cfg, &report)?;
    Ok(true)
}

fn cmd_optimize(
    cfg: &RunConfig,
    from: f64,
    to: f64,
    step: f64,
    fixed_ell: bool,
) -> Result<bool, Failure> {
    let zero = ljmayer::potentials::LJ_ZERO;
    if !(from > 0.0 && to < zero) {
        return Err(usage(format!("a range must lie inside (0, {zero})")));
    }
    let grid = a_grid(from, to, step).map_err(classify)?;
    let policy = if fixed_ell {
        EllPolicy::Fixed(cfg.ell)
    } else {
        EllPolicy::Tight
    };
    let out = optimize_radius(cfg.beta, cfg.stability_b, &grid, policy, &cfg.quadrature())
        .map_err(classify)?;
    let mut csv = String::from("a,ell,c_tilde,rho_new,valid\n");
    for r in &out.rows {
        let _ = writeln!(csv, "{},{},{},{:e},{}", r.a, r.ell, r.c_tilde, r.rho_new, r.valid);
    }
    emit_csv(cfg, &csv)?;
    write_json(cfg, &out)?;
    match &out.best {
        Some((row, cert)) => {
            eprintln!(
                "best: a = {}, ell = {}, rho_new = {:e}, r_min >= {:.6}",
                row.a, row.ell, row.rho_new, cert.rmin_lower
            );
            Ok(true)
        }
        None => Err(failed("no admissible cut-off radius in the sweep")),
    }
}

fn cmd_curve(cfg: &RunConfig, kind: CurveKind, from: f64, to: f64, step: f64) -> Result<bool, Failure> {
    let points = curve(kind, from, to, step, cfg).map_err(classify)?;
    let mut csv = String::from("x,y,flag\n");
    for p in &points {
        match (p.y, &p.flag) {
            (Some(y), _) => {
                let _ = writeln!(csv, "{},{},", p.x, y);
            }
            (None, flag) => {
                let flag = flag.as_deref().unwrap_or("undefined").replace(',', ";");
                let _ = writeln!(csv, "{},,\"{}\"", p.x, flag.replace('"', "'"));
            }
        }
    }
    emit_csv(cfg, &csv)?;
    write_json(cfg, &points)?;
    Ok(true)
}

fn cmd_minimize(
    cfg: &RunConfig,
    n: usize,
    starts: usize,
    potential: PotentialArg,
    max_iters: usize,
    xyz: Option<&Path>,
) -> Result<bool, Failure> {
    let pot = match potential {
        PotentialArg::Lj => PotentialSpec::Lj,
        PotentialArg::Cutoff => PotentialSpec::CutoffLj { a: cfg.a },
    };
    let mut params = MinimizeParams::new(n, pot, starts, cfg.seed);
    params.max_iters = max_iters;
    let out = minimize_energy(&params).map_err(classify)?;
    let best = &out.best;
    let prop1 = check_prop1(best);
    let local = probe_local_minimum(best, &pot, 100, 1e-4, 1e-8, cfg.seed)
        .map_err(|e| failed(e.to_string()))?;
    let cert = rmin_certificate(cfg.a, cfg.ell);
    println!("N = {n}  potential = {pot:?}  starts = {starts}  seed = {}", cfg.seed);
    println!("energy = {:.10}", best.energy);
    println!("-U/N = {:.10}", -best.energy / n as f64);
    println!("r_min = {:.10}", best.rmin_emp);
    println!("|grad| = {:.3e} (converged: {})", out.gradient_norm, out.converged);
    println!("W(i) < 0 for all i: {}", prop1.passed);
    println!("local-minimum probe: {}", local);
    if cert.valid {
        println!(
            "r_min >= certified bound {:.6}: {}",
            cert.rmin_lower,
            best.rmin_emp >= cert.rmin_lower
        );
    }
    if let Some(path) = xyz {
        write_file(path, &best.to_xyz())?;
    }
    write_json(cfg, &out)?;
    Ok(out.converged && prop1.passed && local)
}

#[derive(Serialize)]
struct MayerOutput {
    estimate: ljmayer::oracle::MayerCoefficientEstimate,
    bound_pr: Option<f64>,
    bound_new: f64,
    within_bounds: bool,
}

fn cmd_mayer(cfg: &RunConfig, order: u32, samples: usize, cutoff_radius: f64) -> Result<bool, Failure> {
    if !(2..=3).contains(&order) {
        return Err(usage(format!("order must be 2 or 3, got {order}")));
    }
    let spec = cfg.quadrature();
    let c = c_beta(cfg.beta, &PotentialSpec::Lj, &spec).map_err(classify)?;
    let c_tilde = tilde_c_beta(cfg.beta, cfg.a, &spec).map_err(classify)?;
    let inputs = BoundInputs {
        beta: cfg.beta,
        stability_b: cfg.stability_b,
        c: c.value,
        c_tilde: c_tilde.value,
        a: cfg.a,
    };
    let bound_new = coefficient_bound(order, Variant::New, &inputs).map_err(classify)?;
    let output = if order == 2 {
        let est = c2_exact(cfg.beta, &PotentialSpec::Lj, &spec).map_err(classify)?;
        let pr = coefficient_bound(2, Variant::PenroseRuelle, &inputs).map_err(classify)?;
        let size = est.value.abs() + est.truncation_error;
        println!("C_2 = {:.12} (quadrature error {:.2e})", est.value, est.truncation_error);
        println!("bound PR  = {pr:.6e}");
        println!("bound new = {bound_new:.6e}");
        MayerOutput {
            within_bounds: size <= pr && size <= bound_new,
            estimate: est,
            bound_pr: Some(pr),
            bound_new,
        }
    } else {
        let mut params = McParams::new(cfg.beta, PotentialSpec::Lj, samples, cfg.seed);
        params.cutoff_radius = cutoff_radius;
        let est = c3_monte_carlo(&params).map_err(classify)?;
        println!(
            "C_3 = {:.6} +- {:.6} (1 sigma, {} samples); truncation bound {:.3e}",
            est.value, est.statistical_error, est.samples, est.truncation_error
        );
        println!("bound new = {bound_new:.6e}");
        let size = est.value.abs() + 3.0 * est.statistical_error + est.truncation_error;
        MayerOutput {
            within_bounds: size <= bound_new,
            estimate: est,
            bound_pr: None,
            bound_new,
        }
    };
    println!("within bounds: {}", output.within_bounds);
    write_json(cfg, &output)?;
    Ok(output.within_bounds)
}
