//! The equation family `u_t = u_xx + k(x) u^2 (1 - u)`, its reduction
//! operators `Q = tau d_t + xi d_x + eta d_u` and their characteristics.

use crate::expr::{is_zero, Expr, Var, ZeroTestPolicy};
use crate::{Error, Result};

/// A member of the family, identified by its coefficient `k(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pde {
    k: Expr,
}

impl Pde {
    /// `k` must be free of `t`, `u` and the derivative slots, and must not
    /// vanish identically. A `k` containing an unknown function symbol is
    /// tested with random instances of that function.
    pub fn new(k: Expr) -> Result<Self> {
        Self::with_policy(k, &ZeroTestPolicy::default())
    }

    pub fn with_policy(k: Expr, policy: &ZeroTestPolicy) -> Result<Self> {
        if let Some(v) = Var::ALL.into_iter().find(|&v| v != Var::X && k.contains_var(v)) {
            return Err(Error::Invalid(format!(
                "k must depend on x only, found `{}` in {k}",
                v.name()
            )));
        }
        if is_zero(&k, policy)?.is_zero {
            return Err(Error::ZeroCoefficient);
        }
        Ok(Pde { k })
    }

    pub fn k(&self) -> &Expr {
        &self.k
    }

    /// `k_x`
    pub fn k_x(&self) -> Expr {
        self.k.differentiate(Var::X)
    }

    /// Reaction term `k(x) u^2 (1 - u)`; the `u_xx` part of the equation is
    /// handled by the consumers.
    pub fn rhs(&self) -> Expr {
        let u = Expr::u();
        &self.k * u.clone().powi(2) * (1 - u)
    }

    /// `u_t - u_xx - k u^2 (1 - u)` over the jet slots.
    pub fn equation(&self) -> Expr {
        Expr::var(Var::Ut) - Expr::var(Var::Uxx) - self.rhs()
    }
}

/// Reduction operator, normalized either to `tau = 1` or to `tau = 0, xi = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum ReductionOperator {
    Tau1 { xi: Expr, eta: Expr },
    Tau0 { eta: Expr },
}

impl ReductionOperator {
    pub fn tau1(xi: Expr, eta: Expr) -> Self {
        ReductionOperator::Tau1 { xi, eta }
    }

    pub fn tau0(eta: Expr) -> Self {
        ReductionOperator::Tau0 { eta }
    }

    pub fn tau(&self) -> Expr {
        match self {
            ReductionOperator::Tau1 { .. } => Expr::one(),
            ReductionOperator::Tau0 { .. } => Expr::zero(),
        }
    }

    pub fn xi(&self) -> Expr {
        match self {
            ReductionOperator::Tau1 { xi, .. } => xi.clone(),
            ReductionOperator::Tau0 { .. } => Expr::one(),
        }
    }

    pub fn eta(&self) -> &Expr {
        match self {
            ReductionOperator::Tau1 { eta, .. } | ReductionOperator::Tau0 { eta } => eta,
        }
    }

    pub fn is_tau1(&self) -> bool {
        matches!(self, ReductionOperator::Tau1 { .. })
    }

    /// Apply `f` to every coefficient.
    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Self {
        match self {
            ReductionOperator::Tau1 { xi, eta } => ReductionOperator::Tau1 { xi: f(xi), eta: f(eta) },
            ReductionOperator::Tau0 { eta } => ReductionOperator::Tau0 { eta: f(eta) },
        }
    }

    pub fn try_map(&self, mut f: impl FnMut(&Expr) -> Result<Expr>) -> Result<Self> {
        Ok(match self {
            ReductionOperator::Tau1 { xi, eta } => ReductionOperator::Tau1 {
                xi: f(xi)?,
                eta: f(eta)?,
            },
            ReductionOperator::Tau0 { eta } => ReductionOperator::Tau0 { eta: f(eta)? },
        })
    }

    pub fn characteristic(&self) -> Characteristic {
        Characteristic::new(self)
    }
}

/// `Q[u] = eta - tau u_t - xi u_x`, with `u_t`, `u_x` as formal slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    expr: Expr,
    coeff_ut: Expr,
    coeff_ux: Expr,
}

impl Characteristic {
    fn new(op: &ReductionOperator) -> Self {
        let coeff_ut = -op.tau();
        let coeff_ux = -op.xi();
        let expr = op.eta() + &coeff_ut * Expr::var(Var::Ut) + &coeff_ux * Expr::var(Var::Ux);
        Characteristic {
            expr,
            coeff_ut,
            coeff_ux,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Coefficient of `u_t` (that is `-tau`).
    pub fn coeff_ut(&self) -> &Expr {
        &self.coeff_ut
    }

    /// Coefficient of `u_x` (that is `-xi`).
    pub fn coeff_ux(&self) -> &Expr {
        &self.coeff_ux
    }
}

pub fn characteristic(op: &ReductionOperator) -> Characteristic {
    op.characteristic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, split_powers, Context};

    fn p(s: &str) -> Expr {
        parse(s, &Context::new().with_param("c").with_function("k", 1)).unwrap()
    }

    #[test]
    fn reaction_term() {
        let pde = Pde::new(p("2/x^2")).unwrap();
        assert!(pde.rhs().same_normal_form(&p("2*u^2*(1-u)/x^2")));
        let pde = Pde::new(p("c*tan(x)^2")).unwrap();
        assert!(pde.rhs().same_normal_form(&p("c*tan(x)^2*u^2*(1-u)")));
        let pde = Pde::new(p("c")).unwrap();
        assert!(pde.rhs().same_normal_form(&p("c*u^2 - c*u^3")));
    }

    #[test]
    fn coefficient_checks() {
        assert!(matches!(Pde::new(p("x - x")), Err(Error::ZeroCoefficient)));
        assert!(matches!(Pde::new(p("x*t")), Err(Error::Invalid(_))));
        assert!(matches!(Pde::new(p("u")), Err(Error::Invalid(_))));
        assert!(Pde::new(p("k(x)")).is_ok());
    }

    #[test]
    fn characteristics() {
        let ut = Expr::var(Var::Ut);
        let ux = Expr::var(Var::Ux);
        let q = ReductionOperator::tau1(p("-1/x"), Expr::zero()).characteristic();
        assert!(q.expr().same_normal_form(&(-ut.clone() + &ux / Expr::x())));
        let q = ReductionOperator::tau0(p("(u^2-1)/x")).characteristic();
        assert!(q.expr().same_normal_form(&(p("(u^2-1)/x") - &ux)));
        let q = ReductionOperator::tau1(Expr::zero(), Expr::zero()).characteristic();
        assert_eq!(q.expr().simplify(), (-ut).simplify());
    }

    #[test]
    fn characteristic_is_linear_in_slots() {
        let op = ReductionOperator::tau1(p("3*(u-1)/x"), p("-3*u*(u-1)^2/x^2"));
        let q = op.characteristic();
        let by_ux = split_powers(q.expr(), Var::Ux).unwrap();
        assert!(by_ux.keys().all(|p| *p <= 1));
        assert!(by_ux[&1].same_normal_form(q.coeff_ux()));
        let by_ut = split_powers(q.expr(), Var::Ut).unwrap();
        assert!(by_ut[&1].same_normal_form(&Expr::int(-1)));
    }
}
