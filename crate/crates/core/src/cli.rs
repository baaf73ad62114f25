//! Command-line front end for the `symred` binary.
//!
//! Exit codes: 0 when everything came out as expected, 1 for a verdict that
//! differs from the catalog, 2 for a disagreement between verification
//! routes, 3 for bad input (flags or expressions), 4 when a numerical
//! pipeline stops on a crossing, blow-up or singular coefficient.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog::{self, CatalogEntry};
use crate::detsys::{determining_residual_tau0, determining_system_tau1, split_laurent_ansatz, LaurentAnsatz};
use crate::expr::{parse, Context, Expr, Interval, ZeroTestPolicy};
use crate::model::{Pde, ReductionOperator};
use crate::numcheck::{characteristic_residual, convergence_study, pde_residual, ResidualStats};
use crate::reduce::{preset, GridMeta, GridSolution, GridSpec, InitialProfile, PipelineOptions, Preset};
use crate::verify::verify_selected;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_ROUTES: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Finest-grid residual below which a reduced solution is reported as PASS.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;

/// Environment variable that overrides the default sampling seed.
pub const SEED_ENV: &str = "SYMRED_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "symred",
    version,
    about = "Nonclassical symmetry verification and reduction for u_t = u_xx + k(x) u^2 (1 - u)"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check catalog entries symbolically and write a JSON report.
    Verify(VerifyArgs),
    /// Print the determining system for a given k, xi, eta.
    Detsys(DetsysArgs),
    /// Build a reduced solution on a grid and measure its residual.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Verify every entry (the default when no --case is given).
    #[arg(long)]
    pub all: bool,
    /// Entry id, or a prefix such as `thm2` or `tau0.item3`.
    #[arg(long = "case", value_name = "ID")]
    pub cases: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetsysArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub tau: u8,
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Split a Laurent ansatz `eta = sum phi_p u^p`, `-m <= p <= n` (tau = 0).
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    pub split: Option<Vec<u32>>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long = "case", value_name = "ID")]
    pub case: String,
    /// Value of the parameter `c`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub df0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// Grid size as `NTxNX`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_hi: Option<f64>,
    /// Skip the reduced ODE and use a constant field (negative control).
    #[arg(long)]
    pub no_ode: bool,
    /// Number of grid levels for a convergence study (1 = single grid).
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NTxNX")?;
    let nt = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let nx = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    Ok((nt, nx))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CharacteristicCrossing { .. }
        | Error::BlowUp { .. }
        | Error::StepUnderflow { .. }
        | Error::CorridorExit { .. }
        | Error::SingularCoefficient { .. } => EXIT_NUMERIC,
        Error::Io(_) => EXIT_VERDICT,
        _ => EXIT_INPUT,
    }
}

fn resolve_seed(flag: Option<u64>, env: Option<String>) -> Result<u64, Error> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("{SEED_ENV} is not an unsigned integer: `{v}`"))),
        None => Ok(ZeroTestPolicy::default().seed),
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let result = match &config.command {
        Command::Verify(a) => run_verify(a, env_seed, out, err),
        Command::Detsys(a) => run_detsys(a, out),
        Command::Reduce(a) => run_reduce(a, env_seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn matches_case(id: &str, patterns: &[String]) -> bool {
    patterns
        .iter()
        .any(|p| id == p || (id.starts_with(p.as_str()) && id[p.len()..].starts_with(['.', '+', '-'])))
}

fn run_verify(
    a: &VerifyArgs,
    env_seed: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let mut policy = ZeroTestPolicy::default().with_seed(resolve_seed(a.seed, env_seed)?);
    if let Some(tol) = a.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Invalid(format!("--tol must be positive, got {tol}")));
        }
        policy.tol = tol;
    }
    if let Some(n) = a.samples {
        if n == 0 {
            return Err(Error::Invalid("--samples must be positive".into()));
        }
        policy.samples = n;
    }
    let all = a.all || a.cases.is_empty();
    let cases = a.cases.clone();
    let report = verify_selected(&policy, &move |id: &str| all || matches_case(id, &cases));
    if report.reports.is_empty() {
        writeln!(err, "warning: no catalog entry matches {:?}", a.cases)?;
    }
    let json = report.to_json();
    match &a.out {
        Some(path) => std::fs::write(path, &json)?,
        None => out.write_all(json.as_bytes())?,
    }
    let s = report.summary();
    writeln!(
        err,
        "operators {}/{}, ode solutions {}/{}, branches {}/{}, closures {}/{}, controls failed {}/{} (seed {}, tol {:e})",
        s.operators_passed,
        s.operators_total,
        s.ode_solutions_passed,
        s.ode_solutions_total,
        s.branches_passed,
        s.branches_total,
        s.closures_passed,
        s.closures_total,
        s.controls_failed,
        s.controls_total,
        policy.seed,
        policy.tol
    )?;
    if s.tolerance_sensitive {
        writeln!(err, "warning: some verdicts lie close to the tolerance")?;
    }
    for id in &s.unexpected {
        writeln!(err, "unexpected verdict: {id}")?;
    }
    for id in &s.route_disagreements {
        writeln!(err, "routes disagree: {id}")?;
    }
    Ok(if !s.route_disagreements.is_empty() {
        EXIT_ROUTES
    } else if !s.unexpected.is_empty() {
        EXIT_VERDICT
    } else {
        EXIT_OK
    })
}

fn run_detsys(a: &DetsysArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let ctx = Context::permissive();
    let read = |s: &Option<String>| -> Result<Expr, Error> {
        match s {
            Some(s) => parse(s, &ctx),
            None => Ok(Expr::zero()),
        }
    };
    let pde = Pde::new(parse(&a.k, &ctx)?)?;
    let eta = read(&a.eta)?;
    if a.tau == 1 {
        if a.split.is_some() {
            return Err(Error::Invalid("--split applies to tau = 0 only".into()));
        }
        let sys = determining_system_tau1(&pde, &read(&a.xi)?, &eta);
        write!(out, "{}", sys.try_map(|e| Ok(e.simplify()))?)?;
        return Ok(EXIT_OK);
    }
    if a.xi.is_some() {
        return Err(Error::Invalid("--xi does not apply to tau = 0".into()));
    }
    match &a.split {
        Some(mn) => {
            let ansatz = LaurentAnsatz::symbolic(mn[0], mn[1]);
            let sys = split_laurent_ansatz(&pde, &ansatz)?;
            write!(out, "{}", sys.try_map(|e| Ok(e.simplify()))?)?;
        }
        None => {
            let r = determining_residual_tau0(&pde, &eta).simplify();
            writeln!(
                out,
                "# tau0: eta_xx + 2 eta eta_xu + eta^2 eta_uu = f_u eta - f eta_u + 2 eta_u (eta_x + eta eta_u)"
            )?;
            writeln!(out, "{r}")?;
        }
    }
    Ok(EXIT_OK)
}

/// Settings for entries without a tuned preset: the entry's x window, a
/// short time window starting at the lower end of its t range, c = 1.
fn fallback_preset(entry: &CatalogEntry, op: &ReductionOperator) -> Preset {
    let d = &entry.domain;
    let grid = GridSpec {
        nt: 201,
        nx: 201,
        t: Interval::new(d.t.lo, d.t.lo + 0.2),
        x: d.x,
    };
    let mut params = BTreeMap::new();
    if entry.params.contains_key("c") {
        params.insert("c".to_string(), 1.0);
    }
    match op {
        ReductionOperator::Tau1 { .. } => Preset::Tau1 {
            grid,
            profile: InitialProfile::Shooting {
                anchor: d.x.lo,
                f0: 0.3,
                df0: 0.0,
            },
            params,
        },
        ReductionOperator::Tau0 { .. } => Preset::Tau0 {
            grid,
            anchor: 0.5 * (d.x.lo + d.x.hi),
            v0: 0.5,
            params,
        },
    }
}

fn apply_overrides(p: &mut Preset, a: &ReduceArgs) -> Result<(), Error> {
    if let Some(c) = a.c {
        p.params_mut().insert("c".into(), c);
    }
    if let Some((nt, nx)) = a.grid {
        let g = p.grid_mut();
        g.nt = nt;
        g.nx = nx;
    }
    {
        let g = p.grid_mut();
        if let Some(t) = a.t_end {
            g.t.hi = t;
        }
        if let Some(x) = a.x_lo {
            g.x.lo = x;
        }
        if let Some(x) = a.x_hi {
            g.x.hi = x;
        }
        g.validate()?;
    }
    match p {
        Preset::Tau1 { profile, .. } => {
            let (mut anchor, mut f0, mut df0) = match *profile {
                InitialProfile::Shooting { anchor, f0, df0 } => (anchor, f0, df0),
                InitialProfile::Constant(v) => (0.0, v, 0.0),
            };
            anchor = a.anchor.unwrap_or(anchor);
            f0 = a.f0.unwrap_or(f0);
            df0 = a.df0.unwrap_or(df0);
            *profile = if a.no_ode {
                InitialProfile::Constant(f0)
            } else {
                InitialProfile::Shooting { anchor, f0, df0 }
            };
            if a.v0.is_some() {
                return Err(Error::Invalid("--v0 applies to tau = 0 entries".into()));
            }
        }
        Preset::Tau0 { anchor, v0, .. } => {
            *anchor = a.anchor.unwrap_or(*anchor);
            *v0 = a.v0.unwrap_or(*v0);
            if a.f0.is_some() || a.df0.is_some() {
                return Err(Error::Invalid("--f0/--df0 apply to tau = 1 entries".into()));
            }
        }
    }
    Ok(())
}

fn build(
    p: &Preset,
    pde: &Pde,
    op: &ReductionOperator,
    grid: &GridSpec,
    id: &str,
    no_ode: bool,
) -> Result<GridSolution, Error> {
    if let (true, Preset::Tau0 { v0, .. }) = (no_ode, p) {
        let meta = GridMeta {
            entry_id: id.to_string(),
            params: p.params().clone(),
            route: "constant".into(),
        };
        return Ok(GridSolution::from_fn(grid, meta, |_, _| *v0));
    }
    p.solve(pde, op, grid, &PipelineOptions::default().with_entry(id))
}

#[derive(Serialize)]
struct RunRecord<'a> {
    case: &'a str,
    seed: u64,
    nt: usize,
    nx: usize,
    t: [f64; 2],
    x: [f64; 2],
    params: &'a BTreeMap<String, f64>,
    rtol: f64,
    atol: f64,
    reduced_ode: bool,
    levels: usize,
    pde_linf: f64,
    pde_l2: f64,
    characteristic_linf: f64,
    fitted_order: Option<f64>,
    threshold: f64,
    verdict: &'static str,
}

fn stats_csv(s: &ResidualStats) -> String {
    format!(
        "level,h_t,h_x,linf,l2,order\n0,{:.16e},{:.16e},{:.16e},{:.16e},\n",
        s.h_t, s.h_x, s.linf, s.l2
    )
}

fn run_reduce(a: &ReduceArgs, env_seed: Option<String>, out: &mut dyn Write) -> Result<i32, Error> {
    let seed = resolve_seed(a.seed, env_seed)?;
    let entry = catalog::find(&a.case).ok_or_else(|| Error::Invalid(format!("unknown case `{}`", a.case)))?;
    let mut p = match preset(&entry.id) {
        Some(p) => p,
        None => fallback_preset(&entry, &entry.operator),
    };
    apply_overrides(&mut p, a)?;
    let (pde, op) = entry.concrete()?;
    if pde.k().has_functions() || op.eta().has_functions() || op.xi().has_functions() {
        return Err(Error::Invalid(format!(
            "`{}` leaves an arbitrary function unspecified",
            entry.id
        )));
    }
    let grid = *p.grid();
    let (finest, csv_stats, order) = if a.levels >= 3 {
        let levels = grid.levels_ending_here(a.levels)?;
        let study = convergence_study(|g| build(&p, &pde, &op, g, &entry.id, a.no_ode), &levels, &pde, &op)?;
        let sol = build(&p, &pde, &op, &grid, &entry.id, a.no_ode)?;
        (sol, study.to_csv(), study.fitted_order)
    } else if a.levels <= 1 {
        let sol = build(&p, &pde, &op, &grid, &entry.id, a.no_ode)?;
        let s = pde_residual(&sol, &pde)?;
        (sol, stats_csv(&s), None)
    } else {
        return Err(Error::Invalid("--levels must be 1 or at least 3".into()));
    };
    let r = pde_residual(&finest, &pde)?;
    let ch = characteristic_residual(&finest, &op)?;
    let ode = crate::ode::OdeOptions::default();
    let verdict = if r.linf <= RESIDUAL_THRESHOLD { "PASS" } else { "FAIL" };
    let record = RunRecord {
        case: &entry.id,
        seed,
        nt: grid.nt,
        nx: grid.nx,
        t: [grid.t.lo, grid.t.hi],
        x: [grid.x.lo, grid.x.hi],
        params: p.params(),
        rtol: ode.rtol,
        atol: ode.atol,
        reduced_ode: !a.no_ode,
        levels: a.levels.max(1),
        pde_linf: r.linf,
        pde_l2: r.l2,
        characteristic_linf: ch.linf,
        fitted_order: order,
        threshold: RESIDUAL_THRESHOLD,
        verdict,
    };
    writeln!(
        out,
        "{}: grid {}x{} t [{}, {}] x [{}, {}] seed {}",
        entry.id, grid.nt, grid.nx, grid.t.lo, grid.t.hi, grid.x.lo, grid.x.hi, seed
    )?;
    writeln!(
        out,
        "pde residual linf {:.3e} l2 {:.3e} ({verdict}, threshold {:e})",
        r.linf, r.l2, RESIDUAL_THRESHOLD
    )?;
    writeln!(out, "invariant surface residual linf {:.3e}", ch.linf)?;
    if let Some(o) = order {
        writeln!(out, "observed order {o:.3}")?;
    }
    if let Some(dir) = &a.out_dir {
        write_outputs(dir, &entry.id, &finest, &csv_stats, &record)?;
        writeln!(out, "wrote {}", dir.display())?;
    }
    Ok(EXIT_OK)
}

fn write_outputs(dir: &Path, id: &str, sol: &GridSolution, stats: &str, record: &RunRecord) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{id}.csv")), sol.to_csv())?;
    std::fs::write(dir.join(format!("{id}.stats.csv")), stats)?;
    let mut json = serde_json::to_string_pretty(record).map_err(|e| Error::Io(e.to_string()))?;
    json.push('\n');
    std::fs::write(dir.join(format!("{id}.json")), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("symred").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("201x101"), Ok((201, 101)));
        assert!(parse_grid("201").is_err());
    }

    #[test]
    fn seed_resolution() {
        assert_eq!(resolve_seed(Some(7), Some("3".into())).unwrap(), 7);
        assert_eq!(resolve_seed(None, Some("3".into())).unwrap(), 3);
        assert_eq!(resolve_seed(None, None).unwrap(), 0);
        assert!(resolve_seed(None, Some("x".into())).is_err());
    }

    #[test]
    fn case_patterns() {
        let p = vec!["thm2.case5".to_string()];
        assert!(matches_case("thm2.case5+", &p));
        assert!(!matches_case("thm2.case4", &p));
        assert!(matches_case("tau0.item3", &["tau0".to_string()]));
        assert!(!matches_case("tau0.item10", &["tau0.item1".to_string()]));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["verify", "--bogus"]).0, EXIT_INPUT);
        assert_eq!(call(&["detsys", "--tau", "2", "--k", "1"]).0, EXIT_INPUT);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn detsys_lie_case() {
        let (code, out, _) = call(&["detsys", "--tau", "1", "--k", "x^2", "--xi", "-1/x", "--eta", "0"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 4);
        assert!(out.lines().filter(|l| !l.starts_with('#')).all(|l| l == "0"), "{out}");
        let (code, out, _) = call(&["detsys", "--tau", "1", "--k", "k(x)", "--xi", "1", "--eta", "0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("k'(x)"), "{out}");
    }

    #[test]
    fn detsys_parse_error() {
        let (code, _, err) = call(&["detsys", "--tau", "1", "--k", "x^", "--xi", "0"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("syntax"), "{err}");
    }

    #[test]
    fn verify_single_case() {
        let (code, out, _) = call(&["verify", "--case", "thm2.case6", "--seed", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"seed\": 1"));
        let (code, out, err) = call(&["verify", "--case", "nope"]);
        assert_eq!(code, EXIT_OK);
        assert!(err.contains("warning"));
        assert!(out.contains("\"records\": []"));
    }

    #[test]
    fn reduce_without_ode_is_flagged() {
        let (code, out, _) = call(&["reduce", "--case", "thm2.case4", "--no-ode", "--grid", "51x51"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("FAIL"), "{out}");
    }

    #[test]
    fn reduce_unknown_case() {
        assert_eq!(call(&["reduce", "--case", "nope"]).0, EXIT_INPUT);
    }
}
