//! Determining equations for reduction operators of the family.
//!
//! Two independent derivations are provided: transcribed systems
//! ([`determining_system_tau1`], [`determining_residual_tau0`],
//! [`reduced_system_ansatz`]) and the prolongation route
//! ([`conditional_invariance_residual`]) which works directly from the jet.
//! Every residual is stored as `lhs - rhs`.

use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{is_zero, rat, split_powers, Expr, Var, ZeroTestPolicy};
use crate::model::{Pde, ReductionOperator};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// Short stable label, e.g. `tau1.c` or `u^2`.
    pub label: String,
    /// Which equation of the derivation this residual instantiates.
    pub provenance: String,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub residuals: Vec<Residual>,
    /// Function symbols left in the residuals, with their arities.
    pub unknowns: BTreeMap<String, usize>,
}

impl DeterminingSystem {
    fn new(residuals: Vec<Residual>) -> Self {
        let mut unknowns = BTreeMap::new();
        for r in &residuals {
            unknowns.extend(r.expr.functions());
        }
        DeterminingSystem { residuals, unknowns }
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn exprs(&self) -> impl Iterator<Item = &Expr> {
        self.residuals.iter().map(|r| &r.expr)
    }

    pub fn get(&self, label: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.label == label)
    }

    /// Run the zero test on every residual, in order.
    pub fn check(&self, policy: &ZeroTestPolicy) -> Result<Vec<crate::expr::ZeroTestOutcome>> {
        self.exprs().map(|e| is_zero(e, policy)).collect()
    }

    /// Apply `f` to every residual.
    pub fn try_map(&self, mut f: impl FnMut(&Expr) -> Result<Expr>) -> Result<Self> {
        let residuals = self
            .residuals
            .iter()
            .map(|r| {
                Ok(Residual {
                    label: r.label.clone(),
                    provenance: r.provenance.clone(),
                    expr: f(&r.expr)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DeterminingSystem::new(residuals))
    }
}

impl fmt::Display for DeterminingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.residuals {
            writeln!(f, "# {}: {}", r.label, r.provenance)?;
            writeln!(f, "{}", r.expr)?;
        }
        Ok(())
    }
}

fn residual(label: &str, provenance: &str, expr: Expr) -> Residual {
    Residual {
        label: label.to_string(),
        provenance: provenance.to_string(),
        expr,
    }
}

fn q(n: i128, d: i128) -> Expr {
    Expr::constant(rat(n, d))
}

/// The four determining equations for `Q = d_t + xi d_x + eta d_u`.
pub fn determining_system_tau1(pde: &Pde, xi: &Expr, eta: &Expr) -> DeterminingSystem {
    use Var::{T, U, X};
    let k = pde.k();
    let k_x = pde.k_x();
    let u = Expr::u();
    let u2 = u.clone().powi(2);
    let u3 = u.clone().powi(3);
    let u2_1mu = &u2 * (1 - u.clone());

    let xi_u = xi.d(&[U]);
    let xi_x = xi.d(&[X]);

    let a = xi.d(&[U, U]);
    let b = 2 * xi * &xi_u - 2 * xi.d(&[X, U]) + eta.d(&[U, U]);
    let c = 2 * xi * &xi_x - 2 * eta * &xi_u - 3 * k * &xi_u * &u3 + 3 * k * &xi_u * &u2 + 2 * eta.d(&[X, U])
        - xi.d(&[X, X])
        + xi.d(&[T]);
    let lhs = -(k * eta.d(&[U]) * &u2_1mu) + 2 * k * &xi_x * &u2_1mu + eta.d(&[X, X]) - 2 * &xi_x * eta;
    let rhs = eta.d(&[T]) - &k_x * xi * &u2_1mu - 2 * k * eta * &u + 3 * k * eta * &u2;
    DeterminingSystem::new(vec![
        residual("tau1.a", "xi_uu = 0", a),
        residual("tau1.b", "2 xi xi_u - 2 xi_xu + eta_uu = 0", b),
        residual("tau1.c", "first-order equation in xi, linear in eta_xu", c),
        residual("tau1.d", "equation for eta, moved to one side", lhs - rhs),
    ])
}

/// The single determining equation for `Q = d_x + eta d_u`.
pub fn determining_residual_tau0(pde: &Pde, eta: &Expr) -> Expr {
    use Var::{T, U, X};
    let k = pde.k();
    let k_x = pde.k_x();
    let u = Expr::u();
    let u2 = u.clone().powi(2);
    let u3 = u.clone().powi(3);
    let eta_u = eta.d(&[U]);
    -eta.d(&[X, X]) - 2 * eta * eta.d(&[X, U]) - eta.clone().powi(2) * eta.d(&[U, U]) + k * &eta_u * &u2
        - k * &eta_u * &u3
        + eta.d(&[T])
        + &k_x * &u3
        - &k_x * &u2
        - 2 * k * eta * &u
        + 3 * k * eta * &u2
}

fn total_t(e: &Expr) -> Expr {
    use Var::*;
    e.differentiate(T)
        + e.differentiate(U) * Expr::var(Ut)
        + e.differentiate(Ux) * Expr::var(Utx)
        + e.differentiate(Ut) * Expr::var(Utt)
}

fn total_x(e: &Expr) -> Expr {
    use Var::*;
    e.differentiate(X)
        + e.differentiate(U) * Expr::var(Ux)
        + e.differentiate(Ux) * Expr::var(Uxx)
        + e.differentiate(Ut) * Expr::var(Utx)
}

/// Second prolongation of the operator applied to the equation, restricted to
/// the equation and the invariant surface condition with its differential
/// consequences. For `Tau0` the result depends on `(t, x, u)` only; for `Tau1`
/// it is a polynomial in the slot `u_x` (see [`split_tau1_residual`]).
pub fn conditional_invariance_residual(pde: &Pde, op: &ReductionOperator) -> Expr {
    use Var::*;
    let tau = op.tau();
    let xi = op.xi();
    let eta = op.eta();
    let (ut, ux, utx, uxx) = (Expr::var(Ut), Expr::var(Ux), Expr::var(Utx), Expr::var(Uxx));

    let eta_t = total_t(eta) - &ut * total_t(&tau) - &ux * total_t(&xi);
    let eta_x = total_x(eta) - &ut * total_x(&tau) - &ux * total_x(&xi);
    let eta_xx = total_x(&eta_x) - &utx * total_x(&tau) - &uxx * total_x(&xi);

    let reaction = pde.rhs();
    let prolonged = eta_t - eta_xx - &xi * reaction.differentiate(X) - eta * reaction.differentiate(U);

    match op {
        ReductionOperator::Tau1 { .. } => {
            // tau = 1 keeps u_tx out of the prolongation.
            let on_equation = prolonged.subs_vars(&[(Uxx, ut.clone() - &reaction)]);
            on_equation.subs_vars(&[(Ut, eta - &xi * &ux)])
        }
        ReductionOperator::Tau0 { .. } => {
            let u_xx = total_x(eta).subs_vars(&[(Ux, eta.clone())]);
            let u_t = &u_xx + &reaction;
            prolonged.subs_vars(&[(Uxx, u_xx), (Ut, u_t), (Ux, eta.clone())])
        }
    }
}

/// Coefficients of `u_x^3, u_x^2, u_x, 1` in a `Tau1` prolongation residual,
/// in that order. They coincide with `+a, -b, -c, -d` of
/// [`determining_system_tau1`].
pub fn split_tau1_residual(e: &Expr) -> Result<[Expr; 4]> {
    let by_power = split_powers(e, Var::Ux)?;
    if let Some(p) = by_power.keys().find(|p| !(0..=3).contains(*p)) {
        return Err(Error::Invalid(format!(
            "unexpected power u_x^{p} in the prolonged residual"
        )));
    }
    let c = |p| by_power.get(&p).cloned().unwrap_or_else(Expr::zero);
    Ok([c(3), c(2), c(1), c(0)])
}

/// `xi = phi u + psi`, `eta = -phi^2 u^3 / 3 - phi psi u^2 + phi_x u^2 + A u + B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau1Ansatz {
    pub phi: Expr,
    pub psi: Expr,
    pub a: Expr,
    pub b: Expr,
}

impl Tau1Ansatz {
    pub fn new(phi: Expr, psi: Expr, a: Expr, b: Expr) -> Self {
        Tau1Ansatz { phi, psi, a, b }
    }

    /// Unknown functions `phi(t, x)`, `psi(t, x)`, `A(t, x)`, `B(t, x)`.
    pub fn symbolic() -> Self {
        let f = |n: &str| Expr::call(n, vec![Expr::t(), Expr::x()]);
        Tau1Ansatz::new(f("phi"), f("psi"), f("A"), f("B"))
    }

    pub fn xi(&self) -> Expr {
        &self.phi * Expr::u() + &self.psi
    }

    pub fn eta(&self) -> Expr {
        let u = Expr::u();
        let phi = &self.phi;
        -(q(1, 3) * phi.clone().powi(2) * u.clone().powi(3)) - phi * &self.psi * u.clone().powi(2)
            + phi.differentiate(Var::X) * u.clone().powi(2)
            + &self.a * &u
            + &self.b
    }

    pub fn operator(&self) -> ReductionOperator {
        ReductionOperator::tau1(self.xi(), self.eta())
    }
}

/// Residuals for the coefficients `phi, psi, A, B` of [`Tau1Ansatz`], in
/// display order. The fifth residual uses `+2/3 phi^2 phi_x`, which is what
/// the splitting of the four-equation system produces.
pub fn reduced_system_ansatz(pde: &Pde, ansatz: &Tau1Ansatz) -> DeterminingSystem {
    use Var::{T, X};
    let k = pde.k();
    let k_x = pde.k_x();
    let Tau1Ansatz { phi, psi, a, b } = ansatz;
    let d = |e: &Expr, vs: &[Var]| e.d(vs);
    let (phi_x, phi_t, phi_xx) = (d(phi, &[X]), d(phi, &[T]), d(phi, &[X, X]));
    let (psi_x, psi_t, psi_xx) = (d(psi, &[X]), d(psi, &[T]), d(psi, &[X, X]));
    let phi2 = phi.clone().powi(2);

    let e1 = q(2, 3) * phi.clone().powi(3) - 3 * k * phi;
    let e2 = -4 * phi * &phi_x + 2 * &phi2 * psi + 3 * k * phi;
    let e3 = -2 * &phi_x * psi + &phi_t - 2 * phi * &psi_x - 2 * phi * a + 3 * &phi_xx;
    let e4 = 2 * psi * &psi_x - 2 * phi * b + 2 * d(a, &[X]) - &psi_xx + &psi_t;
    let e5 = q(2, 3) * &phi2 * &phi_x + q(1, 3) * k * &phi2 + k * phi * psi - (3 * k * &phi_x + &k_x * phi);
    let e6 = q(2, 3) * &phi2 * &psi_x
        - q(2, 3) * phi * &phi_xx
        - q(8, 3) * phi_x.clone().powi(2)
        - 2 * k * &psi_x
        - 2 * k * a
        + 2 * phi * &phi_x * psi
        - (-(q(2, 3) * phi * &phi_t) - 2 * k * &phi_x - &k_x * phi + &k_x * psi);
    let e7 = -2 * &phi_x * a + d(phi, &[X, X, X]) + 2 * phi * psi * &psi_x + k * a
        - &phi_xx * psi
        - 4 * &phi_x * &psi_x
        - phi * &psi_xx
        + 2 * k * &psi_x
        - (d(phi, &[T, X]) - &phi_t * psi - phi * &psi_t - &k_x * psi + 3 * k * b);
    let e8 = d(a, &[X, X]) - 2 * &psi_x * a - (d(a, &[T]) + 2 * &phi_x * b - 2 * k * b);
    let e9 = -2 * &psi_x * b + d(b, &[X, X]) - d(b, &[T]);

    let labels = [
        ("reduced.1", "u^3 coefficient of tau1.c", e1),
        ("reduced.2", "u^2 coefficient of tau1.c", e2),
        ("reduced.3", "u^1 coefficient of tau1.c", e3),
        ("reduced.4", "u^0 coefficient of tau1.c", e4),
        ("reduced.5", "u^4 coefficient of tau1.d", e5),
        ("reduced.6", "u^3 coefficient of tau1.d", e6),
        ("reduced.7", "u^2 coefficient of tau1.d", e7),
        ("reduced.8", "u^1 coefficient of tau1.d", e8),
        ("reduced.9", "u^0 coefficient of tau1.d", e9),
    ];
    DeterminingSystem::new(labels.into_iter().map(|(l, p, e)| residual(l, p, e)).collect())
}

/// Closed form of the ansatz when `phi = phi(x)` is nonzero, together with
/// the remaining first-order constraint on `phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseIIClosure {
    pub ansatz: Tau1Ansatz,
    pub pde: Pde,
    /// `3 phi_x^2 + phi^2 phi_x`
    pub constraint: Expr,
}

pub fn case_ii_closure(phi: &Expr) -> Result<CaseIIClosure> {
    case_ii_closure_with(phi, &ZeroTestPolicy::default())
}

pub fn case_ii_closure_with(phi: &Expr, policy: &ZeroTestPolicy) -> Result<CaseIIClosure> {
    use Var::X;
    if let Some(v) = Var::ALL.into_iter().find(|&v| v != X && phi.contains_var(v)) {
        return Err(Error::Invalid(format!(
            "phi must depend on x only, found `{}`",
            v.name()
        )));
    }
    if is_zero(phi, policy)?.is_zero {
        return Err(Error::DivisionByZero("phi vanishes identically".into()));
    }
    let phi_x = phi.d(&[X]);
    let phi_xx = phi.d(&[X, X]);
    let phi2 = phi.clone().powi(2);
    let denom = 2 * (2 * &phi2 - 9 * &phi_x);
    if is_zero(&denom, policy)?.is_zero {
        return Err(Error::DivisionByZero("2 phi^2 - 9 phi_x vanishes identically".into()));
    }
    let k = q(2, 9) * &phi2;
    let psi = ((6 * &phi_x - &phi2) / (3 * phi)).simplify();
    let a = ((4 * phi * &phi_x - 3 * &phi_xx) / (6 * phi)).simplify();
    let b = (9 * (2 * psi.d(&[X]) * &a - a.d(&[X, X])) / denom).simplify();
    let constraint = (3 * phi_x.clone().powi(2) + &phi2 * &phi_x).simplify();
    Ok(CaseIIClosure {
        ansatz: Tau1Ansatz::new(phi.clone(), psi, a, b),
        pde: Pde::with_policy(k.simplify(), policy)?,
        constraint,
    })
}

/// `eta = sum_{p=-m}^{n} phi_p u^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentAnsatz {
    pub m: u32,
    pub n: u32,
    coeffs: BTreeMap<i64, Expr>,
}

impl LaurentAnsatz {
    /// Missing powers default to zero.
    pub fn new(m: u32, n: u32, coeffs: BTreeMap<i64, Expr>) -> Result<Self> {
        let range = -(m as i64)..=n as i64;
        if let Some(p) = coeffs.keys().find(|p| !range.contains(*p)) {
            return Err(Error::Invalid(format!("power {p} outside -{m}..={n}")));
        }
        if coeffs.values().all(|c| c.simplify().is_zero_literal()) {
            return Err(Error::Invalid("at least one coefficient must be nonzero".into()));
        }
        Ok(LaurentAnsatz { m, n, coeffs })
    }

    /// Unknown coefficients `phi_p(t, x)`, named `phi_2`, `phi_0`, `phi_m1`...
    pub fn symbolic(m: u32, n: u32) -> Self {
        let coeffs = (-(m as i64)..=n as i64)
            .map(|p| (p, Expr::call(&Self::symbol(p), vec![Expr::t(), Expr::x()])))
            .collect();
        LaurentAnsatz { m, n, coeffs }
    }

    pub fn symbol(p: i64) -> String {
        if p < 0 {
            format!("phi_m{}", -p)
        } else {
            format!("phi_{p}")
        }
    }

    pub fn coeff(&self, p: i64) -> Expr {
        self.coeffs.get(&p).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn eta(&self) -> Expr {
        self.coeffs
            .iter()
            .map(|(p, c)| c * Expr::u().powi(*p as i128))
            .fold(Expr::zero(), |a, b| a + b)
    }
}

/// One residual per power of `u` of the `tau = 0` equation under the ansatz.
pub fn split_laurent_ansatz(pde: &Pde, ansatz: &LaurentAnsatz) -> Result<DeterminingSystem> {
    let residual_expr = determining_residual_tau0(pde, &ansatz.eta());
    let by_power = split_powers(&residual_expr, Var::U)?;
    Ok(DeterminingSystem::new(
        by_power
            .into_iter()
            .rev()
            .map(|(p, e)| residual(&format!("u^{p}"), "coefficient of the tau0 equation", e))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context, Interval};

    fn ctx() -> Context {
        Context::new()
            .with_param("c")
            .with_function("k", 1)
            .with_function("B", 1)
            .with_function("phi_0", 1)
    }

    fn p(s: &str) -> Expr {
        parse(s, &ctx()).unwrap()
    }

    fn zero(e: &Expr) -> bool {
        is_zero(e, &ZeroTestPolicy::default()).unwrap().is_zero
    }

    fn zero_on(e: &Expr, x: Interval) -> bool {
        is_zero(e, &ZeroTestPolicy::default().with_x(x)).unwrap().is_zero
    }

    #[test]
    fn trivial_operator_gives_zero_system() {
        let pde = Pde::new(p("k(x)")).unwrap();
        let sys = determining_system_tau1(&pde, &Expr::zero(), &Expr::zero());
        assert_eq!(sys.len(), 4);
        assert!(sys.exprs().all(zero));
        let r = conditional_invariance_residual(&pde, &ReductionOperator::tau1(Expr::zero(), Expr::zero()));
        assert!(zero(&r));
    }

    #[test]
    fn constant_coefficient_case() {
        let pde = Pde::new(p("c^2/2")).unwrap();
        let sys = determining_system_tau1(&pde, &p("c/2*(3*u-1)"), &p("-3*c^2/4*u^2*(u-1)"));
        assert!(sys.exprs().all(zero), "{sys}");
    }

    #[test]
    fn translation_needs_constant_k() {
        let pde = Pde::new(p("k(x)")).unwrap();
        let sys = determining_system_tau1(&pde, &Expr::one(), &Expr::zero());
        assert!(sys.get("tau1.d").unwrap().expr.same_normal_form(&p("k'(x)*u^2*(1-u)")));
        assert!(!zero(&sys.get("tau1.d").unwrap().expr));
    }

    #[test]
    fn tau0_examples() {
        let pde = Pde::new(p("1/(2*x^2)")).unwrap();
        assert!(zero(&determining_residual_tau0(&pde, &p("u^2/(2*x)"))));
        let pde = Pde::new(p("2/x^2")).unwrap();
        assert!(zero(&determining_residual_tau0(&pde, &p("(u^2-1)/x"))));
        let pde = Pde::new(p("c")).unwrap();
        assert!(determining_residual_tau0(&pde, &Expr::zero())
            .simplify()
            .is_zero_literal());
        let pde = Pde::new(p("2/x^2")).unwrap();
        assert!(!zero(&determining_residual_tau0(&pde, &p("(u^2+1)/x"))));
    }

    #[test]
    fn prolongation_route_tau0_matches() {
        let pde = Pde::new(p("1/(2*x^2)")).unwrap();
        let eta = p("u^2/(2*x)");
        let r = conditional_invariance_residual(&pde, &ReductionOperator::tau0(eta.clone()));
        assert!(!r.contains_var(Var::Ux) && !r.contains_var(Var::Ut));
        assert!(zero(&r));
        let pde = Pde::new(p("k(x)")).unwrap();
        let eta = Expr::call("e", vec![Expr::t(), Expr::x(), Expr::u()]);
        let r = conditional_invariance_residual(&pde, &ReductionOperator::tau0(eta.clone()));
        assert!(zero(&(r - determining_residual_tau0(&pde, &eta))));
    }

    #[test]
    fn prolongation_route_tau1_matches_transcription() {
        let pde = Pde::new(p("k(x)")).unwrap();
        let f = |n: &str| Expr::call(n, vec![Expr::t(), Expr::x()]);
        let u = Expr::u();
        let xi = f("x0") + f("x1") * &u + f("x2") * u.clone().powi(2);
        let eta = f("e0") + f("e1") * &u + f("e2") * u.clone().powi(2) + f("e3") * u.clone().powi(3);
        let r = conditional_invariance_residual(&pde, &ReductionOperator::tau1(xi.clone(), eta.clone()));
        let split = split_tau1_residual(&r).unwrap();
        let sys = determining_system_tau1(&pde, &xi, &eta);
        let signs = [1, -1, -1, -1];
        for ((s, route), transcribed) in signs.iter().zip(&split).zip(sys.exprs()) {
            assert!(zero(&(route - *s * transcribed)), "{route}\nvs\n{transcribed}");
        }
    }

    #[test]
    fn derivation_chain_to_reduced_system() {
        let pde = Pde::new(p("k(x)")).unwrap();
        let ans = Tau1Ansatz::symbolic();
        let sys = determining_system_tau1(&pde, &ans.xi(), &ans.eta());
        assert!(zero(&sys.residuals[0].expr));
        assert!(zero(&sys.residuals[1].expr));
        let c = split_powers(&sys.residuals[2].expr, Var::U).unwrap();
        let d = split_powers(&sys.residuals[3].expr, Var::U).unwrap();
        let reduced = reduced_system_ansatz(&pde, &ans);
        assert_eq!(reduced.len(), 9);
        let get = |m: &BTreeMap<i64, Expr>, p: i64| m.get(&p).cloned().unwrap_or_else(Expr::zero);
        let from_split = [
            get(&c, 3),
            get(&c, 2),
            get(&c, 1),
            get(&c, 0),
            get(&d, 4),
            get(&d, 3),
            get(&d, 2),
            get(&d, 1),
            get(&d, 0),
        ];
        assert!(d.keys().all(|p| *p <= 4) && c.keys().all(|p| *p <= 3));
        for (i, (s, r)) in from_split.iter().zip(reduced.exprs()).enumerate() {
            let ok = zero(&(s - r)) || zero(&(s + r));
            assert!(ok, "equation {}: {s}\nvs\n{r}", i + 1);
        }
    }

    #[test]
    fn reduced_system_examples() {
        let pde = Pde::new(p("2/x^2")).unwrap();
        let ans = Tau1Ansatz::new(p("3/x"), p("-3/x"), p("-3/x^2"), Expr::zero());
        let sys = reduced_system_ansatz(&pde, &ans);
        assert!(sys.exprs().all(zero), "{sys}");
        assert!(ans.xi().same_normal_form(&p("3/x*(u-1)")));
        assert!(ans.eta().same_normal_form(&p("-3/x^2*u*(u-1)^2")));

        let pde = Pde::new(p("c*tan(x)^2")).unwrap();
        let ans = Tau1Ansatz::new(Expr::zero(), p("-cot(x)"), Expr::zero(), Expr::zero());
        let dom = Interval::new(0.2, std::f64::consts::PI - 0.2);
        assert!(reduced_system_ansatz(&pde, &ans).exprs().all(|e| zero_on(e, dom)));

        let pde = Pde::new(p("k(x)")).unwrap();
        let z = Tau1Ansatz::new(Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero());
        assert!(reduced_system_ansatz(&pde, &z)
            .exprs()
            .all(|e| e.simplify().is_zero_literal()));
    }

    #[test]
    fn closure_examples() {
        let cl = case_ii_closure(&p("3/x")).unwrap();
        assert!(cl.ansatz.psi.same_normal_form(&p("-3/x")));
        assert!(cl.ansatz.a.same_normal_form(&p("-3/x^2")));
        assert!(zero(&cl.ansatz.b));
        assert!(cl.pde.k().same_normal_form(&p("2/x^2")));
        assert!(zero(&cl.constraint));
        assert!(reduced_system_ansatz(&cl.pde, &cl.ansatz).exprs().all(zero));

        let cl = case_ii_closure(&p("c")).unwrap();
        assert!(cl.ansatz.psi.same_normal_form(&p("-c/3")));
        assert!(zero(&cl.ansatz.a) && zero(&cl.ansatz.b));
        assert!(cl.pde.k().same_normal_form(&p("2*c^2/9")));
        assert!(zero(&cl.constraint));

        let cl = case_ii_closure(&p("x")).unwrap();
        assert!(!zero(&cl.constraint));
        assert!(matches!(case_ii_closure(&Expr::zero()), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn laurent_splitting() {
        let pde = Pde::new(p("k(x)")).unwrap();
        let ans = LaurentAnsatz::new(0, 0, [(0, p("phi_0(x)"))].into()).unwrap();
        let sys = split_laurent_ansatz(&pde, &ans).unwrap();
        let expect = [
            ("u^3", "k'(x)"),
            ("u^2", "-k'(x) + 3*k(x)*phi_0(x)"),
            ("u^1", "-2*k(x)*phi_0(x)"),
            ("u^0", "-phi_0''(x)"),
        ];
        assert_eq!(sys.len(), 4);
        for (label, e) in expect {
            assert!(sys.get(label).unwrap().expr.same_normal_form(&p(e)), "{label}");
        }

        let pde = Pde::new(p("2*tan(2*x)^2")).unwrap();
        let ans = LaurentAnsatz::new(0, 2, [(2, p("-tan(2*x)"))].into()).unwrap();
        let dom = Interval::new(0.05, 0.7);
        assert!(split_laurent_ansatz(&pde, &ans)
            .unwrap()
            .exprs()
            .all(|e| zero_on(e, dom)));

        assert!(LaurentAnsatz::new(1, 1, [(0, Expr::zero())].into()).is_err());
        assert!(LaurentAnsatz::new(0, 1, [(2, Expr::one())].into()).is_err());
    }

    #[test]
    fn laurent_item_with_free_b() {
        let pde = Pde::new(p("2*B(x)^2")).unwrap();
        let ans = LaurentAnsatz::new(0, 2, [(2, p("B(x)")), (1, p("-tan(x)"))].into()).unwrap();
        let sys = split_laurent_ansatz(&pde, &ans).unwrap();
        let ode = p("-4*B(x)*B'(x) + 4*B'(x)*tan(x) - B''(x) + 2*B(x) + 2*B(x)^2*tan(x)");
        let dom = Interval::new(0.2, 1.3);
        let nonzero: Vec<_> = sys.residuals.iter().filter(|r| !zero_on(&r.expr, dom)).collect();
        assert_eq!(nonzero.len(), 1, "{sys}");
        assert_eq!(nonzero[0].label, "u^2");
        assert!(zero_on(&(&nonzero[0].expr - &ode), dom));
    }

    #[test]
    fn display_has_one_line_per_residual() {
        let pde = Pde::new(p("c")).unwrap();
        let s = determining_system_tau1(&pde, &Expr::one(), &Expr::zero()).to_string();
        assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 4);
    }
}
