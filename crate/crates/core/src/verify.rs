//! Pass/fail certification of catalog entries.
//!
//! Every operator is checked twice, once against the transcribed determining
//! equations and once against the prolongation route, and the two verdicts
//! must agree.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, CatalogEntry, EquivalenceTransform, Expected};
use crate::detsys::{
    case_ii_closure_with, conditional_invariance_residual, determining_residual_tau0, determining_system_tau1,
    reduced_system_ansatz, split_tau1_residual,
};
use crate::expr::{eval_numeric, is_zero, Env, Expr, Interval, Var, Witness, ZeroTestOutcome, ZeroTestPolicy};
use crate::model::{Pde, ReductionOperator};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Transcribed determining equations.
    Transcribed,
    /// Prolongation of the operator restricted to the jet manifold.
    Prolongation,
    /// Stated particular solution of an ODE.
    OdeSolution,
    /// Riccati branch of the `phi = 0` case.
    Branch,
    /// Closed form of the `phi != 0` case.
    Closure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One line of the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub id: String,
    pub route: Route,
    pub residual_index: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Failures whose relative size stays below this look like rounding noise.
const MARGINAL_RATIO: f64 = 1.5e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub id: String,
    pub expected: Expected,
    pub records: Vec<ResidualRecord>,
    pub policy: ZeroTestPolicy,
    /// Every residual of every route passed.
    pub passed: bool,
    /// Verdicts of the two operator routes coincide (always true for the
    /// single-route checks).
    pub routes_agree: bool,
    /// Some failure is small enough to be explained by the tolerance alone.
    pub tolerance_sensitive: bool,
    /// Set when a check could not run (starved sampling, pole...).
    pub error: Option<String>,
    pub wall_time: Duration,
}

impl VerificationReport {
    fn new(id: &str, expected: Expected, policy: &ZeroTestPolicy) -> Self {
        VerificationReport {
            id: id.to_string(),
            expected,
            records: Vec::new(),
            policy: policy.clone(),
            passed: true,
            routes_agree: true,
            tolerance_sensitive: false,
            error: None,
            wall_time: Duration::ZERO,
        }
    }

    fn push(&mut self, route: Route, index: usize, outcome: &ZeroTestOutcome) {
        if !outcome.is_zero {
            self.passed = false;
            if outcome
                .witness
                .as_ref()
                .is_some_and(|w| w.value.abs() / (1.0 + w.scale) < MARGINAL_RATIO)
            {
                self.tolerance_sensitive = true;
            }
        }
        self.records.push(ResidualRecord {
            id: self.id.clone(),
            route,
            residual_index: index,
            verdict: Verdict::from_bool(outcome.is_zero),
            witness: outcome.witness.clone(),
        });
    }

    fn push_structural(&mut self, route: Route, index: usize, ok: bool) {
        self.passed &= ok;
        self.records.push(ResidualRecord {
            id: self.id.clone(),
            route,
            residual_index: index,
            verdict: Verdict::from_bool(ok),
            witness: None,
        });
    }

    fn fail_with(&mut self, e: Error) {
        self.passed = false;
        self.error = Some(e.to_string());
    }

    fn route_passed(&self, route: Route) -> bool {
        self.records
            .iter()
            .filter(|r| r.route == route)
            .all(|r| r.verdict == Verdict::Pass)
    }

    /// The verdict matches the expectation.
    pub fn as_expected(&self) -> bool {
        match self.expected {
            Expected::Pass => self.passed,
            Expected::Fail => !self.passed && self.error.is_none(),
        }
    }

    /// Largest `|value|` among failure witnesses.
    pub fn max_witness_value(&self) -> f64 {
        self.records
            .iter()
            .filter_map(|r| r.witness.as_ref())
            .map(|w| w.value.abs())
            .fold(0.0, f64::max)
    }
}

fn timed(report: &mut VerificationReport, start: Instant) {
    report.wall_time = start.elapsed();
}

fn check_all(report: &mut VerificationReport, route: Route, exprs: &[Expr], policy: &ZeroTestPolicy) -> Result<()> {
    for (i, e) in exprs.iter().enumerate() {
        let outcome = is_zero(e, policy)?;
        report.push(route, i, &outcome);
    }
    Ok(())
}

fn operator_routes(
    report: &mut VerificationReport,
    pde: &Pde,
    op: &ReductionOperator,
    policy: &ZeroTestPolicy,
) -> Result<()> {
    let transcribed: Vec<Expr> = match op {
        ReductionOperator::Tau1 { xi, eta } => determining_system_tau1(pde, xi, eta).exprs().cloned().collect(),
        ReductionOperator::Tau0 { eta } => vec![determining_residual_tau0(pde, eta)],
    };
    let prolonged = conditional_invariance_residual(pde, op);
    let prolonged: Vec<Expr> = match op {
        ReductionOperator::Tau1 { .. } => split_tau1_residual(&prolonged)?.to_vec(),
        ReductionOperator::Tau0 { .. } => vec![prolonged],
    };
    check_all(report, Route::Transcribed, &transcribed, policy)?;
    check_all(report, Route::Prolongation, &prolonged, policy)?;
    report.routes_agree = report.route_passed(Route::Transcribed) == report.route_passed(Route::Prolongation);
    Ok(())
}

/// Check `op` against `pde` by both routes.
pub fn verify_operator(pde: &Pde, op: &ReductionOperator, policy: &ZeroTestPolicy) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut report = VerificationReport::new("operator", Expected::Pass, policy);
    operator_routes(&mut report, pde, op, policy)?;
    timed(&mut report, start);
    Ok(report)
}

/// Substitute `function(x) := candidate` into `ode` and test the result for
/// zero on `domain`. The candidate is first scanned for poles on a grid finer
/// than the pole margin.
pub fn verify_ode_solution(
    ode: &Expr,
    function: &str,
    candidate: &Expr,
    domain: Interval,
    policy: &ZeroTestPolicy,
) -> Result<ZeroTestOutcome> {
    if !domain.is_valid() || domain.lo >= domain.hi {
        return Err(Error::Invalid("empty domain".into()));
    }
    let n = (((domain.hi - domain.lo) / (0.5 * policy.margin)).ceil() as usize).max(2000);
    let mut env = Env::new().with_margin(policy.margin);
    for i in 0..=n {
        let x = domain.lo + (domain.hi - domain.lo) * i as f64 / n as f64;
        env.set(Var::X, x);
        match eval_numeric(candidate, &env) {
            Ok(_) => {}
            Err(Error::Pole(_)) | Err(Error::NonFinite(_)) => {
                return Err(Error::Pole(format!("{function}(x) = {candidate} near x = {x}")))
            }
            Err(e) => return Err(e),
        }
    }
    let b =
        crate::expr::Bindings::new().function(function, crate::expr::FunctionDef::new(vec![Var::X], candidate.clone()));
    let residual = ode.substitute(&b)?;
    is_zero(&residual, &policy.clone().with_x(domain))
}

/// Verify a catalog entry (positive or control) under its own window.
pub fn verify_entry(entry: &CatalogEntry, base: &ZeroTestPolicy) -> VerificationReport {
    let start = Instant::now();
    let policy = entry.policy(base);
    let mut report = VerificationReport::new(&entry.id, entry.expected, &policy);
    let result = entry
        .concrete()
        .and_then(|(pde, op)| operator_routes(&mut report, &pde, &op, &policy));
    if let Err(e) = result {
        report.fail_with(e);
    }
    timed(&mut report, start);
    report
}

/// Windows on which the stated particular solutions are pole free.
fn ode_domain(entry: &CatalogEntry) -> Interval {
    if entry.id == "tau0.item1" {
        Interval::new(0.2, std::f64::consts::FRAC_PI_2 - 0.2)
    } else {
        entry.domain.x
    }
}

fn verify_particular(entry: &CatalogEntry, base: &ZeroTestPolicy) -> Option<VerificationReport> {
    let ps = entry.particular.as_ref()?;
    let start = Instant::now();
    let mut report = VerificationReport::new(&format!("{}.ode", entry.id), Expected::Pass, base);
    match verify_ode_solution(&ps.ode, &ps.function, &ps.solution, ode_domain(entry), base) {
        Ok(outcome) => report.push(Route::OdeSolution, 0, &outcome),
        Err(e) => report.fail_with(e),
    }
    timed(&mut report, start);
    Some(report)
}

fn verify_branch(branch: &catalog::CaseIBranch, base: &ZeroTestPolicy) -> VerificationReport {
    let start = Instant::now();
    let policy = branch.domain.policy(base);
    let mut report = VerificationReport::new(&format!("branch.{}", branch.entry_id), Expected::Pass, &policy);
    let run = |report: &mut VerificationReport| -> Result<()> {
        report.push(Route::Branch, 0, &is_zero(&branch.riccati_residual(), &policy)?);
        report.push(Route::Branch, 1, &is_zero(&(branch.k_from_psi() - &branch.k), &policy)?);
        let entry = catalog::find(branch.entry_id).ok_or_else(|| Error::Invalid(branch.entry_id.into()))?;
        let same = entry.pde.k().to_string() == branch.k.to_string() && entry.operator == branch.operator();
        report.push_structural(Route::Branch, 2, same);
        Ok(())
    };
    if let Err(e) = run(&mut report) {
        report.fail_with(e);
    }
    timed(&mut report, start);
    report
}

fn verify_closure(
    id: &str,
    phi: &str,
    rescale: Option<Expr>,
    target: &str,
    base: &ZeroTestPolicy,
) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport::new(id, Expected::Pass, base);
    let run = |report: &mut VerificationReport| -> Result<()> {
        let entry = catalog::find(target).ok_or_else(|| Error::Invalid(target.into()))?;
        let policy = entry.policy(base);
        report.policy = policy.clone();
        let phi = crate::expr::parse(phi, &catalog::context())?;
        let cl = case_ii_closure_with(&phi, &policy)?;
        let system = reduced_system_ansatz(&cl.pde, &cl.ansatz);
        let b = match &rescale {
            Some(c) => crate::expr::Bindings::new().param("c", c.clone()),
            None => crate::expr::Bindings::new(),
        };
        let k = cl.pde.k().substitute(&b)?;
        let xi = cl.ansatz.xi().substitute(&b)?;
        let eta = cl.ansatz.eta().substitute(&b)?;
        let mut exprs = vec![
            k - entry.pde.k(),
            xi - entry.operator.xi(),
            eta - entry.operator.eta(),
            cl.constraint.clone(),
        ];
        exprs.extend(system.exprs().cloned());
        check_all(report, Route::Closure, &exprs, &policy)
    };
    if let Err(e) = run(&mut report) {
        report.fail_with(e);
    }
    timed(&mut report, start);
    report
}

/// A randomized `(k, xi, eta)` triple for the route-equivalence check.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomInstance {
    pub label: String,
    pub pde: Pde,
    pub operator: ReductionOperator,
    pub policy: ZeroTestPolicy,
}

fn small_rational(rng: &mut ChaCha8Rng) -> crate::expr::Rational {
    let n = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
    crate::expr::rat(n, rng.gen_range(1..=4))
}

/// `q x^p` with a random nonzero `q` and `p` in `-2..=2`.
fn monomial(rng: &mut ChaCha8Rng) -> Expr {
    Expr::constant(small_rational(rng)) * Expr::x().powi(rng.gen_range(-2..=2))
}

/// Polynomial in `u` of degree `deg` with monomial coefficients, each term
/// present with probability 2/3.
fn u_poly(rng: &mut ChaCha8Rng, deg: i128) -> Expr {
    let mut e = Expr::zero();
    for j in 0..=deg {
        if rng.gen_bool(2.0 / 3.0) {
            e = e + monomial(rng) * Expr::u().powi(j);
        }
    }
    e
}

/// Small random transform: `e1 = +-n/8`, `e2, e3 = m/8`.
pub fn random_transform(rng: &mut impl Rng) -> EquivalenceTransform {
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let e1 = crate::expr::rat(sign * rng.gen_range(4..=12), 8);
    let e2 = crate::expr::rat(rng.gen_range(0..=4), 8);
    let e3 = crate::expr::rat(rng.gen_range(-4..=4), 8);
    EquivalenceTransform::new(e1, e2, e3).expect("e1 is nonzero")
}

/// `n` seeded instances. Every fourth one is the image of a catalog entry
/// under a random equivalence transform, so passing verdicts are exercised
/// too; the rest are random and almost surely fail.
pub fn random_instances(seed: u64, n: usize, base: &ZeroTestPolicy) -> Result<Vec<RandomInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = catalog::all_cases();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i % 4 == 3 {
            let entry = &positives[rng.gen_range(0..positives.len())];
            let g = random_transform(&mut rng);
            let image = catalog::transform_entry(&g, entry)?;
            let (pde, operator) = image.concrete()?;
            out.push(RandomInstance {
                label: format!("random.{i}.{}", entry.id),
                pde,
                operator,
                policy: image.policy(base),
            });
            continue;
        }
        let mut k = monomial(&mut rng);
        if rng.gen_bool(0.5) {
            k = k + monomial(&mut rng);
        }
        let pde = Pde::new(k)?;
        let operator = if i % 2 == 0 {
            ReductionOperator::tau1(u_poly(&mut rng, 1), u_poly(&mut rng, 3))
        } else {
            ReductionOperator::tau0(u_poly(&mut rng, 2))
        };
        out.push(RandomInstance {
            label: format!("random.{i}"),
            pde,
            operator,
            policy: base.clone(),
        });
    }
    Ok(out)
}

/// Run both routes on each instance.
pub fn verify_random(instances: &[RandomInstance]) -> Vec<VerificationReport> {
    instances
        .par_iter()
        .map(|inst| {
            let mut r = verify_operator(&inst.pde, &inst.operator, &inst.policy).unwrap_or_else(|e| {
                let mut r = VerificationReport::new(&inst.label, Expected::Pass, &inst.policy);
                r.fail_with(e);
                r
            });
            r.id = inst.label.clone();
            for rec in &mut r.records {
                rec.id = inst.label.clone();
            }
            r
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct Summary {
    pub operators_passed: usize,
    pub operators_total: usize,
    pub ode_solutions_passed: usize,
    pub ode_solutions_total: usize,
    pub branches_passed: usize,
    pub branches_total: usize,
    pub closures_passed: usize,
    pub closures_total: usize,
    pub controls_failed: usize,
    pub controls_total: usize,
    pub route_disagreements: Vec<String>,
    pub unexpected: Vec<String>,
    pub tolerance_sensitive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogReport {
    pub reports: Vec<VerificationReport>,
    pub policy: ZeroTestPolicy,
}

#[derive(Serialize)]
struct PolicyEcho {
    seed: u64,
    samples: usize,
    param_draws: usize,
    tol: f64,
    margin: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    policy: PolicyEcho,
    summary: Summary,
    records: Vec<&'a ResidualRecord>,
    errors: Vec<(&'a str, &'a str)>,
}

impl CatalogReport {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.reports {
            let (passed, total) = if r.expected == Expected::Fail {
                (&mut s.controls_failed, &mut s.controls_total)
            } else if r.id.starts_with("branch.") {
                (&mut s.branches_passed, &mut s.branches_total)
            } else if r.id.starts_with("closure.") {
                (&mut s.closures_passed, &mut s.closures_total)
            } else if r.id.ends_with(".ode") {
                (&mut s.ode_solutions_passed, &mut s.ode_solutions_total)
            } else {
                (&mut s.operators_passed, &mut s.operators_total)
            };
            *total += 1;
            if r.as_expected() {
                *passed += 1;
            } else {
                s.unexpected.push(r.id.clone());
            }
            if !r.routes_agree {
                s.route_disagreements.push(r.id.clone());
            }
            s.tolerance_sensitive |= r.tolerance_sensitive;
        }
        s
    }

    pub fn all_as_expected(&self) -> bool {
        self.reports.iter().all(VerificationReport::as_expected)
    }

    /// JSON with a fixed field order; wall times are left out so reruns are
    /// byte identical.
    pub fn to_json(&self) -> String {
        let p = &self.policy;
        let json = JsonReport {
            policy: PolicyEcho {
                seed: p.seed,
                samples: p.samples,
                param_draws: p.param_draws,
                tol: p.tol,
                margin: p.margin,
            },
            summary: self.summary(),
            records: self.reports.iter().flat_map(|r| &r.records).collect(),
            errors: self
                .reports
                .iter()
                .filter_map(|r| r.error.as_deref().map(|e| (r.id.as_str(), e)))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&json).expect("report serializes");
        s.push('\n');
        s
    }
}

enum Job {
    Entry(CatalogEntry),
    Particular(CatalogEntry),
    Branch(catalog::CaseIBranch),
    Closure(&'static str, &'static str, Option<Expr>, &'static str),
}

fn run_job(job: &Job, policy: &ZeroTestPolicy) -> Option<VerificationReport> {
    match job {
        Job::Entry(e) => Some(verify_entry(e, policy)),
        Job::Particular(e) => verify_particular(e, policy),
        Job::Branch(b) => Some(verify_branch(b, policy)),
        Job::Closure(id, phi, rescale, target) => Some(verify_closure(id, phi, rescale.clone(), target, policy)),
    }
}

fn jobs(filter: &dyn Fn(&str) -> bool) -> Vec<Job> {
    let mut jobs = Vec::new();
    for e in catalog::all_cases() {
        if filter(&e.id) {
            if e.particular.is_some() {
                jobs.push(Job::Particular(e.clone()));
            }
            jobs.push(Job::Entry(e));
        }
    }
    for b in catalog::case_i_branches() {
        if filter(b.entry_id) {
            jobs.push(Job::Branch(b));
        }
    }
    let three_halves_c = Expr::constant(crate::expr::rat(3, 2)) * Expr::param("c");
    let closures = [
        ("closure.phi=3/x", "3/x", None, "thm2.case6"),
        ("closure.phi=c", "c", Some(three_halves_c), "thm2.case5+"),
    ];
    for (id, phi, rescale, target) in closures {
        if filter(target) {
            jobs.push(Job::Closure(id, phi, rescale, target));
        }
    }
    for e in catalog::negative_controls() {
        if filter(&e.id) || filter(e.id.trim_start_matches("control.")) {
            jobs.push(Job::Entry(e));
        }
    }
    jobs
}

/// Verify the whole catalog with its companion checks and the negative
/// controls. Reports are sorted by id.
pub fn verify_catalog(policy: &ZeroTestPolicy) -> CatalogReport {
    verify_selected(policy, &|_| true)
}

/// Like [`verify_catalog`], restricted to entries whose id passes `filter`.
/// Companion checks follow their entry; a control follows the entry it
/// perturbs.
pub fn verify_selected(policy: &ZeroTestPolicy, filter: &(dyn Fn(&str) -> bool + Sync)) -> CatalogReport {
    let jobs = jobs(filter);
    let mut reports: Vec<VerificationReport> = jobs.par_iter().filter_map(|j| run_job(j, policy)).collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    CatalogReport {
        reports,
        policy: policy.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn p(s: &str) -> Expr {
        parse(
            s,
            &Context::new()
                .with_param("c")
                .with_function("B", 1)
                .with_function("k", 1),
        )
        .unwrap()
    }

    #[test]
    fn single_operators() {
        let policy = ZeroTestPolicy::default();
        let pde = Pde::new(p("c*coth(x)^2")).unwrap();
        let r = verify_operator(&pde, &ReductionOperator::tau1(p("-tanh(x)"), Expr::zero()), &policy).unwrap();
        assert!(r.passed && r.routes_agree);
        let r = verify_operator(&pde, &ReductionOperator::tau1(p("-2*tanh(x)"), Expr::zero()), &policy).unwrap();
        assert!(!r.passed && r.routes_agree);
        assert!(r.records.iter().any(|rec| rec.witness.is_some()));
        let pde = Pde::new(p("k(x)")).unwrap();
        let r = verify_operator(&pde, &ReductionOperator::tau1(Expr::zero(), Expr::zero()), &policy).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn ode_solutions() {
        let policy = ZeroTestPolicy::default();
        let item4 = p("4*x*B(x)*B'(x) + 4*B'(x) + x*B''(x) + 2*B(x)^2");
        let dom = Interval::new(0.5, 3.0);
        assert!(
            verify_ode_solution(&item4, "B", &p("-1/x"), dom, &policy)
                .unwrap()
                .is_zero
        );
        assert!(
            !verify_ode_solution(&item4, "B", &Expr::x(), dom, &policy)
                .unwrap()
                .is_zero
        );
        let item1 = p("-4*B(x)*B'(x) + 4*B'(x)*tan(x) - B''(x) + 2*B(x) + 2*B(x)^2*tan(x)");
        let dom = Interval::new(0.2, std::f64::consts::FRAC_PI_2 - 0.2);
        assert!(
            verify_ode_solution(&item1, "B", &p("tan(x)"), dom, &policy)
                .unwrap()
                .is_zero
        );
        let across_pole = Interval::new(0.2, std::f64::consts::PI - 0.2);
        assert!(matches!(
            verify_ode_solution(&item1, "B", &p("tan(x)"), across_pole, &policy),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn filtered_runs() {
        let policy = ZeroTestPolicy::default();
        let r = verify_selected(&policy, &|id| id == "nosuch");
        assert!(r.reports.is_empty());
        let r = verify_selected(&policy, &|id| id == "thm2.case5+");
        let ids: Vec<_> = r.reports.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["closure.phi=c", "control.thm2.case5+", "thm2.case5+"]);
        assert!(r.all_as_expected());
    }

    #[test]
    fn tight_tolerance_is_flagged() {
        let policy = ZeroTestPolicy::default().with_tol(1e-15);
        let r = verify_selected(&policy, &|id| id == "thm2.case6" || id == "tau0.item1");
        let s = r.summary();
        if !s.unexpected.is_empty() {
            assert!(s.tolerance_sensitive, "{s:?}");
        }
    }
}
