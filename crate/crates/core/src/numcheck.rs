//! Finite-difference certification of grid solutions.
//!
//! Residuals use second-order central differences on interior nodes only.
//! Norms are accumulated with a fixed pairwise summation tree so that the
//! parallel evaluation order never changes the result.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::{eval_numeric, Env, Expr, Var};
use crate::model::{Pde, ReductionOperator};
use crate::reduce::{GridSolution, GridSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualStats {
    pub linf: f64,
    pub l2: f64,
    pub h_t: f64,
    pub h_x: f64,
    pub interior: usize,
}

/// Sum with a fixed binary tree over blocks of 8.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn stats(sol: &GridSolution, values: &[f64]) -> ResidualStats {
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let n = values.len();
    ResidualStats {
        linf: values.iter().fold(0.0, |m, v| m.max(v.abs())),
        l2: if n == 0 {
            0.0
        } else {
            (pairwise_sum(&squares) / n as f64).sqrt()
        },
        h_t: sol.t[1] - sol.t[0],
        h_x: sol.x[1] - sol.x[0],
        interior: n,
    }
}

fn check_shape(sol: &GridSolution) -> Result<()> {
    if sol.nt() < 3 || sol.nx() < 3 {
        return Err(Error::Invalid("residuals need at least 3 nodes per direction".into()));
    }
    sol.validate()
}

/// Evaluate `f(i, j)` on every interior node, row-major.
fn interior<F>(sol: &GridSolution, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let rows: Vec<Vec<f64>> = (1..sol.nt() - 1)
        .into_par_iter()
        .map(|i| (1..sol.nx() - 1).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// `(D_t u, D_x u, D_xx u)` at an interior node of a uniform grid.
fn differences(sol: &GridSolution, i: usize, j: usize) -> (f64, f64, f64) {
    let two_ht = sol.t[i + 1] - sol.t[i - 1];
    let two_hx = sol.x[j + 1] - sol.x[j - 1];
    let hx = 0.5 * two_hx;
    let (ux0, u, ux1) = (sol.at(i, j - 1), sol.at(i, j), sol.at(i, j + 1));
    let d_t = (sol.at(i + 1, j) - sol.at(i - 1, j)) / two_ht;
    let d_x = (ux1 - ux0) / two_hx;
    let d_xx = (ux1 - 2.0 * u + ux0) / (hx * hx);
    (d_t, d_x, d_xx)
}

fn param_env(params: &std::collections::BTreeMap<String, f64>) -> Env {
    let mut env = Env::new();
    env.params = params.clone();
    env
}

/// `D_t u - D_xx u - k(x) u^2 (1 - u)` on interior nodes. Parameters are
/// taken from the solution metadata.
pub fn pde_residual(sol: &GridSolution, pde: &Pde) -> Result<ResidualStats> {
    check_shape(sol)?;
    let env = param_env(&sol.meta.params);
    let k: Vec<f64> = sol
        .x
        .iter()
        .map(|&x| eval_numeric(pde.k(), &env.clone().with(Var::X, x)))
        .collect::<Result<_>>()?;
    let values = interior(sol, |i, j| {
        let (d_t, _, d_xx) = differences(sol, i, j);
        let u = sol.at(i, j);
        Ok(d_t - d_xx - k[j] * u * u * (1.0 - u))
    })?;
    Ok(stats(sol, &values))
}

/// Discrete characteristic `eta - tau D_t u - xi D_x u` on interior nodes.
pub fn characteristic_residual(sol: &GridSolution, op: &ReductionOperator) -> Result<ResidualStats> {
    check_shape(sol)?;
    let env = param_env(&sol.meta.params);
    let xi = op.xi();
    let eta = op.eta().clone();
    let tau1 = op.is_tau1();
    let values = interior(sol, |i, j| {
        let (d_t, d_x, _) = differences(sol, i, j);
        let env = env
            .clone()
            .with(Var::T, sol.t[i])
            .with(Var::X, sol.x[j])
            .with(Var::U, sol.at(i, j));
        let eta_v = eval_numeric(&eta, &env)?;
        let xi_v = eval_numeric(&xi, &env)?;
        Ok(eta_v - if tau1 { d_t } else { 0.0 } - xi_v * d_x)
    })?;
    Ok(stats(sol, &values))
}

/// Residuals of one refinement level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub nt: usize,
    pub nx: usize,
    pub pde: ResidualStats,
    pub characteristic: ResidualStats,
    /// `log2` of the L-infinity ratio to the previous level.
    pub observed_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<LevelStats>,
    /// Least-squares slope of `log linf` against `log h_x`.
    pub fitted_order: Option<f64>,
    /// Every level sits at the rounding floor; no order can be fitted.
    pub floor_reached: bool,
    /// Residuals do not decrease monotonically; the fit is unreliable.
    pub non_monotone: bool,
}

/// L-infinity values below this are treated as rounding noise.
pub const FLOOR: f64 = 1e-11;

impl ConvergenceStudy {
    /// CSV with header `level,h_t,h_x,linf,l2,order`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h_t,h_x,linf,l2,order\n");
        for l in &self.levels {
            let order = l.observed_order.map(|o| format!("{o:.6}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:.6e},{:.6e},{:.6e},{:.6e},{}",
                l.level, l.pde.h_t, l.pde.h_x, l.pde.linf, l.pde.l2, order
            );
        }
        s
    }
}

/// Build a solution on every level and fit the convergence order of the PDE
/// residual.
pub fn convergence_study<B>(
    builder: B,
    levels: &[GridSpec],
    pde: &Pde,
    op: &ReductionOperator,
) -> Result<ConvergenceStudy>
where
    B: Fn(&GridSpec) -> Result<GridSolution>,
{
    if levels.len() < 3 {
        return Err(Error::Invalid("a convergence study needs at least 3 levels".into()));
    }
    let mut out: Vec<LevelStats> = Vec::with_capacity(levels.len());
    for (n, g) in levels.iter().enumerate() {
        if let Some(prev) = n.checked_sub(1).map(|p| &levels[p]) {
            let ratio = prev.h_x() / g.h_x();
            if (ratio - 2.0).abs() > 1e-9 || ((prev.h_t() / g.h_t()) - 2.0).abs() > 1e-9 {
                return Err(Error::Invalid("levels must refine both steps by a factor of 2".into()));
            }
        }
        let sol = builder(g)?;
        let p = pde_residual(&sol, pde)?;
        let c = characteristic_residual(&sol, op)?;
        let observed_order = out.last().and_then(|prev: &LevelStats| {
            (prev.pde.linf > FLOOR && p.linf > FLOOR).then(|| (prev.pde.linf / p.linf).log2())
        });
        out.push(LevelStats {
            level: n,
            nt: g.nt,
            nx: g.nx,
            pde: p,
            characteristic: c,
            observed_order,
        });
    }
    let floor_reached = out.iter().all(|l| l.pde.linf <= FLOOR);
    let non_monotone = !floor_reached && out.windows(2).any(|w| w[1].pde.linf >= w[0].pde.linf);
    let fitted_order = if floor_reached {
        None
    } else {
        let pts: Vec<(f64, f64)> = out
            .iter()
            .filter(|l| l.pde.linf > FLOOR)
            .map(|l| (l.pde.h_x.ln(), l.pde.linf.ln()))
            .collect();
        least_squares_slope(&pts)
    };
    Ok(ConvergenceStudy {
        levels: out,
        fitted_order,
        floor_reached,
        non_monotone,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `(u - 1)/(u + 1) / x^2` on every node, for the `eta = (u^2 - 1)/x`
/// reconstruction; each row should be constant.
pub fn separability_ratios(sol: &GridSolution) -> Vec<Vec<f64>> {
    (0..sol.nt())
        .map(|i| {
            sol.x
                .iter()
                .zip(sol.row(i))
                .map(|(x, u)| (u - 1.0) / (u + 1.0) / (x * x))
                .collect()
        })
        .collect()
}

/// Largest per-row `variance / mean^2` of [`separability_ratios`].
pub fn separability_defect(sol: &GridSolution) -> f64 {
    separability_ratios(sol)
        .iter()
        .map(|row| {
            let n = row.len() as f64;
            let mean = pairwise_sum(row) / n;
            let dev: Vec<f64> = row.iter().map(|g| (g - mean).powi(2)).collect();
            pairwise_sum(&dev) / n / (mean * mean)
        })
        .fold(0.0, f64::max)
}

/// Evaluate an expression in `(t, x)` on a grid (manufactured solutions).
pub fn sample_expr(e: &Expr, grid: &GridSpec, meta: crate::reduce::GridMeta) -> Result<GridSolution> {
    let env = param_env(&meta.params);
    let (t, x) = (grid.t_nodes(), grid.x_nodes());
    let mut u = Vec::with_capacity(t.len() * x.len());
    for &ti in &t {
        for &xj in &x {
            u.push(eval_numeric(e, &env.clone().with(Var::T, ti).with(Var::X, xj))?);
        }
    }
    Ok(GridSolution { t, x, u, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context, Interval};
    use crate::reduce::GridMeta;
    use rand::{Rng, SeedableRng};

    fn p(s: &str) -> Expr {
        parse(s, &Context::new().with_param("c")).unwrap()
    }

    fn meta() -> GridMeta {
        GridMeta {
            entry_id: "test".into(),
            params: [("c".to_string(), 1.0)].into(),
            route: "manufactured".into(),
        }
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, Interval::new(0.0, 1.0), Interval::new(0.5, 2.0)).unwrap()
    }

    #[test]
    fn constant_solutions_are_exact() {
        let pde = Pde::new(p("c*x^2")).unwrap();
        for v in [0.0, 1.0] {
            let sol = GridSolution::from_fn(&grid(21), meta(), |_, _| v);
            assert_eq!(pde_residual(&sol, &pde).unwrap().linf, 0.0);
        }
        let sol = GridSolution::from_fn(&grid(21), meta(), |_, _| 0.3);
        let op = ReductionOperator::tau1(p("-1/x"), Expr::zero());
        assert_eq!(characteristic_residual(&sol, &op).unwrap().linf, 0.0);
    }

    #[test]
    fn manufactured_solution() {
        let pde = Pde::new(p("1")).unwrap();
        let exact = |t: f64, x: f64| {
            // u = e^-t sin x: u_t - u_xx = 0, so the defect is -u^2 (1 - u).
            let u = (-t).exp() * x.sin();
            -u * u * (1.0 - u)
        };
        let mut prev = f64::INFINITY;
        for n in [21, 41, 81] {
            let g = grid(n);
            let sol = sample_expr(&p("exp(-t)*sin(x)"), &g, meta()).unwrap();
            let defect: Vec<f64> = (1..n - 1)
                .flat_map(|i| (1..n - 1).map(move |j| (i, j)))
                .map(|(i, j)| exact(sol.t[i], sol.x[j]))
                .collect();
            let r = pde_residual(&sol, &pde).unwrap();
            let want = defect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = (r.linf - want).abs();
            assert!(gap < 0.1 * g.h_x().powi(2) + 0.1 * g.h_t().powi(2), "{gap}");
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn noise_scales_like_inverse_step() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = grid(101);
        let noise: Vec<f64> = (0..g.nt * g.nx).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sol = GridSolution {
            t: g.t_nodes(),
            x: g.x_nodes(),
            u: noise,
            meta: meta(),
        };
        let op = ReductionOperator::tau1(p("-1/x"), Expr::zero());
        let r = characteristic_residual(&sol, &op).unwrap();
        assert!(r.linf > 0.1 / g.h_t());
    }

    #[test]
    fn floor_is_flagged() {
        let pde = Pde::new(p("c")).unwrap();
        let op = ReductionOperator::tau0(Expr::zero());
        let levels = grid(41).levels_ending_here(3).unwrap();
        let study =
            convergence_study(|g| Ok(GridSolution::from_fn(g, meta(), |_, _| 1.0)), &levels, &pde, &op).unwrap();
        assert!(study.floor_reached);
        assert!(study.fitted_order.is_none());
        assert!(study.to_csv().starts_with("level,h_t,h_x,linf,l2,order\n"));
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }
}
