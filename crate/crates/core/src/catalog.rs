//! Classified cases of the family, the case (i) solution branches of the
//! `tau = 1` analysis and the equivalence group `t' = e1^2 t + e2`,
//! `x' = e1 x + e3`, `k' = k / e1^2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::expr::{
    parse, rat, Bindings, Context, Expr, FunctionDef, Interval, ParamRange, Rational, Var, ZeroTestPolicy,
};
use crate::model::{Pde, ReductionOperator};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Lie symmetries, written as a single operator for verification.
    Lie,
    Tau1,
    Tau0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Pass,
    Fail,
}

/// Sampling window attached to an entry.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Domain {
    pub t: Interval,
    pub x: Interval,
    pub u: Interval,
}

impl Domain {
    pub const fn new(t: Interval, x: Interval) -> Self {
        Domain {
            t,
            x,
            u: Interval::new(-2.0, 2.0),
        }
    }

    pub fn standard() -> Self {
        Domain::new(Interval::new(0.1, 1.0), Interval::new(0.5, 3.0))
    }

    pub fn trigonometric() -> Self {
        Domain::new(Interval::new(0.1, 1.0), Interval::new(0.2, PI - 0.2))
    }

    /// Zero-test policy sampling this window.
    pub fn policy(&self, base: &ZeroTestPolicy) -> ZeroTestPolicy {
        let mut p = base.clone();
        p.sample_box.t = self.t;
        p.sample_box.x = self.x;
        p.sample_box.u = self.u;
        p
    }
}

/// A free function `name(x)` in the entry together with the ordinary
/// differential equation it has to satisfy and a stated solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticularSolution {
    pub function: String,
    pub ode: Expr,
    pub solution: Expr,
}

impl ParticularSolution {
    pub fn bindings(&self) -> Bindings {
        Bindings::new().function(&self.function, FunctionDef::new(vec![Var::X], self.solution.clone()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub family: Family,
    pub pde: Pde,
    pub operator: ReductionOperator,
    /// Basis of the Lie invariance algebra, for `Family::Lie` entries.
    pub lie_algebra: Vec<String>,
    pub params: BTreeMap<String, ParamRange>,
    pub domain: Domain,
    pub citation: String,
    pub note: Option<String>,
    pub particular: Option<ParticularSolution>,
    pub expected: Expected,
}

impl CatalogEntry {
    /// The `(pde, operator)` pair with any free function replaced by its
    /// stated particular solution.
    pub fn concrete(&self) -> Result<(Pde, ReductionOperator)> {
        match &self.particular {
            None => Ok((self.pde.clone(), self.operator.clone())),
            Some(ps) => {
                let b = ps.bindings();
                let k = self.pde.k().substitute(&b)?;
                let op = self.operator.try_map(|e| e.substitute(&b))?;
                Ok((Pde::new(k)?, op))
            }
        }
    }

    /// Zero-test policy for this entry's window and parameter ranges.
    pub fn policy(&self, base: &ZeroTestPolicy) -> ZeroTestPolicy {
        let mut p = self.domain.policy(base);
        p.param_ranges.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
        p
    }

    pub fn exprs(&self) -> Vec<Expr> {
        let mut v = vec![
            self.pde.k().clone(),
            self.operator.tau(),
            self.operator.xi(),
            self.operator.eta().clone(),
        ];
        if let Some(ps) = &self.particular {
            v.push(ps.ode.clone());
            v.push(ps.solution.clone());
        }
        v
    }
}

pub(crate) fn context() -> Context {
    Context::new()
        .with_param("c")
        .with_function("k", 1)
        .with_function("B", 1)
}

fn p(s: &str) -> Expr {
    parse(s, &context()).unwrap_or_else(|e| panic!("catalog expression `{s}`: {e}"))
}

struct Builder {
    entry: CatalogEntry,
}

impl Builder {
    fn new(id: &str, family: Family, k: &str, op: ReductionOperator, citation: &str) -> Self {
        let pde = Pde::new(p(k)).unwrap_or_else(|e| panic!("catalog k for {id}: {e}"));
        let mut params = BTreeMap::new();
        for e in [pde.k(), &op.xi(), op.eta()] {
            for name in e.params() {
                params.insert(name, ParamRange::DEFAULT);
            }
        }
        Builder {
            entry: CatalogEntry {
                id: id.to_string(),
                family,
                pde,
                operator: op,
                lie_algebra: Vec::new(),
                params,
                domain: Domain::standard(),
                citation: citation.to_string(),
                note: None,
                particular: None,
                expected: Expected::Pass,
            },
        }
    }

    fn tau1(id: &str, k: &str, xi: &str, eta: &str, citation: &str) -> Self {
        Self::new(id, Family::Tau1, k, ReductionOperator::tau1(p(xi), p(eta)), citation)
    }

    fn tau0(id: &str, k: &str, eta: &str, citation: &str) -> Self {
        Self::new(id, Family::Tau0, k, ReductionOperator::tau0(p(eta)), citation)
    }

    fn domain(mut self, d: Domain) -> Self {
        self.entry.domain = d;
        self
    }

    fn range(mut self, name: &str, r: ParamRange) -> Self {
        self.entry.params.insert(name.to_string(), r);
        self
    }

    fn lie(mut self, basis: &[&str]) -> Self {
        self.entry.family = Family::Lie;
        self.entry.lie_algebra = basis.iter().map(|s| s.to_string()).collect();
        self
    }

    fn note(mut self, n: &str) -> Self {
        self.entry.note = Some(n.to_string());
        self
    }

    fn particular(mut self, ode: &str, solution: &str) -> Self {
        self.entry.particular = Some(ParticularSolution {
            function: "B".into(),
            ode: p(ode),
            solution: p(solution),
        });
        self
    }

    fn done(self) -> CatalogEntry {
        self.entry
    }
}

const SIGN_NOTE: &str = "admissible signs of c are not stated for every case; c<0 is reported as new for the \
                         tan^2, tanh^2 and x^2 cases, so every nonzero c is allowed";

/// Equations with a nontrivial Lie invariance algebra.
pub fn lie_cases() -> Vec<CatalogEntry> {
    vec![
        Builder::tau1("thm1.case1", "k(x)", "0", "0", "arbitrary k: <d_t>")
            .lie(&["d_t"])
            .done(),
        Builder::tau0("thm1.case2", "c", "0", "k = c: <d_t, d_x>")
            .lie(&["d_t", "d_x"])
            .done(),
        Builder::tau1(
            "thm1.case3",
            "c*x^(-2)",
            "x/(2*t)",
            "0",
            "k = c x^-2: <d_t, 2t d_t + x d_x>",
        )
        .lie(&["d_t", "2*t d_t + x d_x"])
        .note("the scaling generator is normalized by 2t, so t > 0 is required")
        .done(),
    ]
}

/// Reduction operators with `tau = 1`.
pub fn tau1_cases() -> Vec<CatalogEntry> {
    let positive = ParamRange::Within(Interval::new(0.1, 3.0));
    vec![
        Builder::tau1(
            "thm2.case1",
            "c*tan(x)^2",
            "-cot(x)",
            "0",
            "k = c tan^2 x: Q = d_t - cot x d_x",
        )
        .domain(Domain::trigonometric())
        .note(SIGN_NOTE)
        .done(),
        Builder::tau1(
            "thm2.case2",
            "c*tanh(x)^2",
            "-coth(x)",
            "0",
            "k = c tanh^2 x: Q = d_t - coth x d_x",
        )
        .note(SIGN_NOTE)
        .done(),
        Builder::tau1(
            "thm2.case3",
            "c*coth(x)^2",
            "-tanh(x)",
            "0",
            "k = c coth^2 x: Q = d_t - tanh x d_x",
        )
        .done(),
        Builder::tau1("thm2.case4", "c*x^2", "-1/x", "0", "k = c x^2: Q = d_t - 1/x d_x")
            .note(SIGN_NOTE)
            .done(),
        Builder::tau1(
            "thm2.case5+",
            "c^2/2",
            "c/2*(3*u - 1)",
            "-3*c^2/4*u^2*(u - 1)",
            "k = c^2/2 (c > 0): Q = d_t + c/2 (3u - 1) d_x - 3c^2/4 u^2 (u - 1) d_u",
        )
        .range("c", positive)
        .done(),
        Builder::tau1(
            "thm2.case5-",
            "c^2/2",
            "-c/2*(3*u - 1)",
            "-3*c^2/4*u^2*(u - 1)",
            "k = c^2/2 (c > 0): Q = d_t - c/2 (3u - 1) d_x - 3c^2/4 u^2 (u - 1) d_u",
        )
        .range("c", positive)
        .done(),
        Builder::tau1(
            "thm2.case6",
            "2*x^(-2)",
            "3/x*(u - 1)",
            "-3/x^2*u*(u - 1)^2",
            "k = 2 x^-2: Q = d_t + 3/x (u - 1) d_x - 3/x^2 u (u - 1)^2 d_u",
        )
        .note("the translation in phi = 3/(x + c) is normalized to zero")
        .done(),
    ]
}

/// Reduction operators `d_x + eta d_u` with `eta` a Laurent polynomial in `u`.
pub fn tau0_cases() -> Vec<CatalogEntry> {
    vec![
        Builder::tau0(
            "tau0.item1",
            "2*B(x)^2",
            "B(x)*u^2 - tan(x)*u",
            "k = 2B^2, eta = B u^2 - tan x u",
        )
        .particular(
            "-4*B(x)*B'(x) + 4*B'(x)*tan(x) - B''(x) + 2*B(x) + 2*B(x)^2*tan(x)",
            "tan(x)",
        )
        .domain(Domain::trigonometric())
        .done(),
        Builder::tau0(
            "tau0.item2",
            "2*B(x)^2",
            "B(x)*u^2 + tanh(x)*u",
            "k = 2B^2, eta = B u^2 + tanh x u",
        )
        .particular(
            "4*B(x)*B'(x) + 4*B'(x)*tanh(x) + B''(x) + 2*B(x) + 2*B(x)^2*tanh(x)",
            "-tanh(x)",
        )
        .done(),
        Builder::tau0(
            "tau0.item3",
            "2*B(x)^2",
            "B(x)*u^2 + coth(x)*u",
            "k = 2B^2, eta = B u^2 + coth x u",
        )
        .particular(
            "4*B(x)*B'(x) + 4*B'(x)*coth(x) + B''(x) + 2*B(x) + 2*B(x)^2*coth(x)",
            "-coth(x)",
        )
        .done(),
        Builder::tau0(
            "tau0.item4",
            "2*B(x)^2",
            "B(x)*u^2 + u/x",
            "k = 2B^2, eta = B u^2 + u/x",
        )
        .particular("4*x*B(x)*B'(x) + 4*B'(x) + x*B''(x) + 2*B(x)^2", "-1/x")
        .done(),
        Builder::tau0("tau0.item5", "2/x^2", "(u^2 - 1)/x", "k = 2/x^2, eta = (u^2 - 1)/x").done(),
        Builder::tau0("tau0.item6", "1/(2*x^2)", "u^2/(2*x)", "k = 1/(2x^2), eta = u^2/(2x)").done(),
        Builder::tau0(
            "tau0.item7",
            "2*tan(2*x)^2",
            "-u^2*tan(2*x)",
            "k = 2 tan^2 2x, eta = -u^2 tan 2x",
        )
        .domain(Domain::trigonometric())
        .done(),
        Builder::tau0(
            "tau0.item8",
            "2*tanh(2*x)^2",
            "u^2*tanh(2*x)",
            "k = 2 tanh^2 2x, eta = u^2 tanh 2x",
        )
        .done(),
    ]
}

/// Perturbed entries that must fail verification.
pub fn negative_controls() -> Vec<CatalogEntry> {
    let mut v = vec![
        Builder::tau1("control.thm2.case3", "c*coth(x)^2", "-2*tanh(x)", "0", "xi doubled").done(),
        Builder::tau1(
            "control.thm2.case5+",
            "c^2/2",
            "c/2*(3*u - 1)",
            "3*c^2/4*u^2*(u - 1)",
            "eta with flipped sign",
        )
        .range("c", ParamRange::Within(Interval::new(0.1, 3.0)))
        .done(),
        Builder::tau1(
            "control.thm2.case6",
            "2*x^(-2) + 1",
            "3/x*(u - 1)",
            "-3/x^2*u*(u - 1)^2",
            "k shifted by 1",
        )
        .done(),
        Builder::tau0("control.tau0.item5", "2/x^2", "2*(u^2 - 1)/x", "eta doubled").done(),
        Builder::tau0("control.tau0.item6", "1/(2*x^2)", "-u^2/(2*x)", "eta with flipped sign").done(),
    ];
    for e in &mut v {
        e.expected = Expected::Fail;
    }
    v
}

/// Every positive entry, in id order.
pub fn all_cases() -> Vec<CatalogEntry> {
    let mut v = lie_cases();
    v.extend(tau1_cases());
    v.extend(tau0_cases());
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

pub fn find(id: &str) -> Option<CatalogEntry> {
    all_cases().into_iter().chain(negative_controls()).find(|e| e.id == id)
}

/// A solution branch of `psi' = psi^2 + a` with `k = c / psi^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseIBranch {
    pub a: i32,
    pub psi: Expr,
    pub k: Expr,
    pub domain: Domain,
    /// The `tau = 1` entry this branch reconstructs.
    pub entry_id: &'static str,
}

impl CaseIBranch {
    /// `psi' - psi^2 - a`
    pub fn riccati_residual(&self) -> Expr {
        self.psi.differentiate(Var::X) - self.psi.clone().powi(2) - Expr::int(self.a as i128)
    }

    /// `c / psi^2`, before rewriting in the printed form of `k`.
    pub fn k_from_psi(&self) -> Expr {
        Expr::param("c") / self.psi.clone().powi(2)
    }

    pub fn pde(&self) -> Result<Pde> {
        Pde::new(self.k.clone())
    }

    pub fn operator(&self) -> ReductionOperator {
        ReductionOperator::tau1(self.psi.clone(), Expr::zero())
    }
}

pub fn case_i_branches() -> Vec<CaseIBranch> {
    let b = |a, psi: &str, k: &str, domain, entry_id| CaseIBranch {
        a,
        psi: p(psi),
        k: p(k),
        domain,
        entry_id,
    };
    vec![
        b(1, "-cot(x)", "c*tan(x)^2", Domain::trigonometric(), "thm2.case1"),
        b(-1, "-coth(x)", "c*tanh(x)^2", Domain::standard(), "thm2.case2"),
        b(-1, "-tanh(x)", "c*coth(x)^2", Domain::standard(), "thm2.case3"),
        b(0, "-1/x", "c*x^2", Domain::standard(), "thm2.case4"),
    ]
}

/// `t' = e1^2 t + e2`, `x' = e1 x + e3`, `u' = u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivalenceTransform {
    e1: Rational,
    e2: Rational,
    e3: Rational,
}

impl EquivalenceTransform {
    pub fn new(e1: Rational, e2: Rational, e3: Rational) -> Result<Self> {
        if e1 == rat(0, 1) {
            return Err(Error::Invalid("e1 must be nonzero".into()));
        }
        Ok(EquivalenceTransform { e1, e2, e3 })
    }

    pub fn identity() -> Self {
        EquivalenceTransform {
            e1: rat(1, 1),
            e2: rat(0, 1),
            e3: rat(0, 1),
        }
    }

    pub fn e1(&self) -> Rational {
        self.e1
    }

    pub fn e2(&self) -> Rational {
        self.e2
    }

    pub fn e3(&self) -> Rational {
        self.e3
    }

    /// Old variables in terms of new ones: `t = (t' - e2)/e1^2`, `x = (x' - e3)/e1`.
    fn pullback(&self, e: &Expr) -> Expr {
        let c = Expr::constant;
        let t = (Expr::t() - c(self.e2)) / c(self.e1 * self.e1);
        let x = (Expr::x() - c(self.e3)) / c(self.e1);
        e.subs_vars(&[(Var::T, t), (Var::X, x)])
    }

    fn map_interval(i: Interval, scale: f64, shift: f64) -> Interval {
        let (a, b) = (scale * i.lo + shift, scale * i.hi + shift);
        Interval::new(a.min(b), a.max(b))
    }

    pub fn domain(&self, d: &Domain) -> Domain {
        let f = crate::expr::rational_to_f64;
        let e1 = f(&self.e1);
        Domain {
            t: Self::map_interval(d.t, e1 * e1, f(&self.e2)),
            x: Self::map_interval(d.x, e1, f(&self.e3)),
            u: d.u,
        }
    }
}

pub fn apply_equivalence(
    g: &EquivalenceTransform,
    pde: &Pde,
    op: &ReductionOperator,
) -> Result<(Pde, ReductionOperator)> {
    let inv = Expr::constant(rat(1, 1) / g.e1);
    let k = (inv.clone().powi(2) * g.pullback(pde.k())).simplify();
    let op = match op {
        ReductionOperator::Tau1 { xi, eta } => ReductionOperator::tau1(
            (&inv * g.pullback(xi)).simplify(),
            (inv.clone().powi(2) * g.pullback(eta)).simplify(),
        ),
        ReductionOperator::Tau0 { eta } => ReductionOperator::tau0((&inv * g.pullback(eta)).simplify()),
    };
    Ok((Pde::new(k)?, op))
}

/// Transform an entry, including its sampling window. Entries with a free
/// function are transformed after substituting the particular solution.
pub fn transform_entry(g: &EquivalenceTransform, entry: &CatalogEntry) -> Result<CatalogEntry> {
    let (pde, op) = entry.concrete()?;
    let (pde, operator) = apply_equivalence(g, &pde, &op)?;
    Ok(CatalogEntry {
        pde,
        operator,
        domain: g.domain(&entry.domain),
        particular: None,
        ..entry.clone()
    })
}

fn fmt_interval(i: &Interval) -> String {
    format!("[{}, {}]", i.lo, i.hi)
}

fn fmt_range(r: &ParamRange) -> String {
    match r {
        ParamRange::NonZero { lo, hi } => format!("nonzero |.| in [{lo}, {hi}]"),
        ParamRange::Within(i) => format!("in {}", fmt_interval(i)),
    }
}

/// Structured text export, one record per entry.
pub fn export(entries: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "[{}]", e.id);
        let _ = writeln!(out, "k = {}", e.pde.k());
        let _ = writeln!(out, "tau = {}", e.operator.tau());
        let _ = writeln!(out, "xi = {}", e.operator.xi());
        let _ = writeln!(out, "eta = {}", e.operator.eta());
        if !e.lie_algebra.is_empty() {
            let _ = writeln!(out, "lie = {}", e.lie_algebra.join("; "));
        }
        if let Some(ps) = &e.particular {
            let _ = writeln!(out, "ode = {}", ps.ode);
            let _ = writeln!(out, "solution = {}(x) = {}", ps.function, ps.solution);
        }
        let d = &e.domain;
        let _ = writeln!(
            out,
            "domain = t {} x {} u {}",
            fmt_interval(&d.t),
            fmt_interval(&d.x),
            fmt_interval(&d.u)
        );
        let params: Vec<String> = e.params.iter().map(|(k, r)| format!("{k} {}", fmt_range(r))).collect();
        if params.is_empty() {
            let _ = writeln!(out, "params = none");
        } else {
            let _ = writeln!(out, "params = {}", params.join("; "));
        }
        let _ = writeln!(out, "citation = {}", e.citation);
        if let Some(n) = &e.note {
            let _ = writeln!(out, "note = {n}");
        }
        let _ = writeln!(
            out,
            "expected = {}",
            if e.expected == Expected::Pass { "pass" } else { "fail" }
        );
        out.push('\n');
    }
    out
}
