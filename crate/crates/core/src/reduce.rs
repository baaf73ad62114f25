//! Numerical invariant solutions.
//!
//! `tau = 1`: the invariant surface condition and the equation together give
//! a second order ODE for the profile `f(x) = u(t0, x)`; the solution is then
//! carried along the characteristics `x' = xi`, `u' = eta`.
//!
//! `tau = 0`: the value at an anchor abscissa evolves by
//! `v' = eta eta_u + eta_x + k v^2 (1 - v)`, and every time slice is
//! recovered by integrating `u_x = eta` in `x`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::expr::{eval_numeric, rational_from_f64, Env, Expr, Interval, Var};
use crate::model::{Pde, ReductionOperator};
use crate::ode::{solve_ivp, OdeOptions, Trajectory};
use crate::{Error, Result};

/// Uniform tensor grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nt: usize,
    pub nx: usize,
    pub t: Interval,
    pub x: Interval,
}

impl GridSpec {
    pub fn new(nt: usize, nx: usize, t: Interval, x: Interval) -> Result<Self> {
        let g = GridSpec { nt, nx, t, x };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt < 3 || self.nx < 3 {
            return Err(Error::Invalid("grids need at least 3 nodes per direction".into()));
        }
        if !(self.t.is_valid() && self.x.is_valid() && self.t.lo < self.t.hi && self.x.lo < self.x.hi) {
            return Err(Error::Invalid("grid intervals must be nondegenerate".into()));
        }
        Ok(())
    }

    fn nodes(i: Interval, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    i.hi
                } else {
                    i.lo + (i.hi - i.lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        Self::nodes(self.t, self.nt)
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        Self::nodes(self.x, self.nx)
    }

    pub fn h_t(&self) -> f64 {
        (self.t.hi - self.t.lo) / (self.nt - 1) as f64
    }

    pub fn h_x(&self) -> f64 {
        (self.x.hi - self.x.lo) / (self.nx - 1) as f64
    }

    /// Same window with both steps halved.
    pub fn refined(&self) -> Self {
        GridSpec {
            nt: 2 * self.nt - 1,
            nx: 2 * self.nx - 1,
            ..*self
        }
    }

    /// `levels` grids, each refining the previous one by 2, ending at `self`.
    pub fn levels_ending_here(&self, levels: usize) -> Result<Vec<GridSpec>> {
        let mut out = vec![*self];
        for _ in 1..levels {
            let g = out[0];
            if (g.nt - 1) % 2 != 0 || (g.nx - 1) % 2 != 0 {
                return Err(Error::Invalid("grid cannot be coarsened by 2".into()));
            }
            let coarse = GridSpec {
                nt: (g.nt - 1) / 2 + 1,
                nx: (g.nx - 1) / 2 + 1,
                ..g
            };
            coarse.validate()?;
            out.insert(0, coarse);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridMeta {
    pub entry_id: String,
    pub params: BTreeMap<String, f64>,
    pub route: String,
}

/// `u[i * nx + j] = u(t_i, x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub meta: GridMeta,
}

impl GridSolution {
    /// Sample `f(t, x)` on a grid.
    pub fn from_fn(grid: &GridSpec, meta: GridMeta, f: impl Fn(f64, f64) -> f64) -> Self {
        let (t, x) = (grid.t_nodes(), grid.x_nodes());
        let u = t
            .iter()
            .flat_map(|&ti| x.iter().map(move |&xj| (ti, xj)))
            .map(|(a, b)| f(a, b))
            .collect();
        GridSolution { t, x, u, meta }
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.x.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nx = self.x.len();
        &self.u[i * nx..(i + 1) * nx]
    }

    pub fn validate(&self) -> Result<()> {
        let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !monotone(&self.t) || !monotone(&self.x) || self.u.len() != self.t.len() * self.x.len() {
            return Err(Error::Invalid("malformed grid".into()));
        }
        if let Some(k) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("u at node {k}")));
        }
        Ok(())
    }

    /// CSV with header `t,x,u`, rows ordered by time then space, 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.u.len() * 72 + 8);
        s.push_str("t,x,u\n");
        for (i, t) in self.t.iter().enumerate() {
            for (j, x) in self.x.iter().enumerate() {
                let _ = writeln!(s, "{t:.16e},{x:.16e},{:.16e}", self.at(i, j));
            }
        }
        s
    }
}

/// Numeric evaluator for a fixed list of expressions.
#[derive(Clone, Debug)]
struct Evaluator {
    exprs: Vec<Expr>,
    env: Env,
}

impl Evaluator {
    fn new(exprs: Vec<Expr>, params: &BTreeMap<String, f64>) -> Self {
        let mut env = Env::new();
        env.params = params.clone();
        Evaluator { exprs, env }
    }

    fn set(&mut self, v: Var, value: f64) {
        self.env.set(v, value);
    }

    fn eval(&self, i: usize, at: Var) -> Result<f64> {
        eval_numeric(&self.exprs[i], &self.env).map_err(|e| match e {
            Error::Pole(d) | Error::NonFinite(d) => Error::SingularCoefficient {
                var: at.name(),
                at: self.env.get(at).unwrap_or(f64::NAN),
                detail: d,
            },
            other => other,
        })
    }
}

/// First-order system `y' = rhs(s, y)` with the independent variable `s`
/// and the state bound to expression variables.
#[derive(Clone, Debug)]
pub struct OdeProblem {
    pub independent: Var,
    pub state: Vec<Var>,
    pub rhs: Vec<Expr>,
    /// Variables held fixed during the integration.
    pub fixed: Vec<(Var, f64)>,
    pub params: BTreeMap<String, f64>,
    pub start: f64,
    pub initial: Vec<f64>,
    pub span: Interval,
    pub options: OdeOptions,
}

impl OdeProblem {
    pub fn validate(&self) -> Result<()> {
        self.options.validate()?;
        if !(self.span.is_valid() && self.span.lo < self.span.hi && self.span.contains(self.start)) {
            return Err(Error::Invalid(
                "ODE span must be nondegenerate and contain the start".into(),
            ));
        }
        if self.state.len() != self.rhs.len() || self.state.len() != self.initial.len() {
            return Err(Error::Invalid("state, rhs and initial values differ in length".into()));
        }
        Ok(())
    }

    /// States at every requested stop (each must lie in the span), in the
    /// order given.
    pub fn solve_at(&self, stops: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        if let Some(s) = stops.iter().find(|s| !self.span.contains(**s)) {
            return Err(Error::Invalid(format!("stop {s} outside the ODE span")));
        }
        let mut ev = Evaluator::new(self.rhs.clone(), &self.params);
        for (v, val) in &self.fixed {
            ev.set(*v, *val);
        }
        let mut rhs = |s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            ev.set(self.independent, s);
            for (v, val) in self.state.iter().zip(y) {
                ev.set(*v, *val);
            }
            for (i, d) in dy.iter_mut().enumerate() {
                *d = ev.eval(i, self.independent)?;
            }
            Ok(())
        };
        let mut trajectories: Vec<Trajectory> = Vec::new();
        for end in [self.span.lo, self.span.hi] {
            if end != self.start && stops.iter().any(|s| (s - self.start) * (end - self.start) > 0.0) {
                trajectories.push(solve_ivp(
                    &mut rhs,
                    self.start,
                    &self.initial,
                    end,
                    stops,
                    &self.options,
                )?);
            }
        }
        stops
            .iter()
            .map(|&s| {
                if s == self.start {
                    return Ok(self.initial.clone());
                }
                trajectories
                    .iter()
                    .find_map(|tr| tr.at_node(s))
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::Invalid(format!("stop {s} was not reached")))
            })
            .collect()
    }
}

/// `f'' = eta(t0, x, f) - xi(t0, x, f) f' - k(x) f^2 (1 - f)` with
/// `f = u`, `f' = u_x`.
pub fn reduced_initial_ode_expr(pde: &Pde, xi: &Expr, eta: &Expr, t0: f64) -> Expr {
    let at_t0 = |e: &Expr| e.subs_vars(&[(Var::T, Expr::constant(rational_from_f64(t0)))]);
    at_t0(eta) - at_t0(xi) * Expr::var(Var::Ux) - pde.rhs()
}

/// Initial data for the `tau = 1` pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialProfile {
    /// Solve the reduced ODE from `f(anchor) = f0`, `f'(anchor) = df0`.
    Shooting { anchor: f64, f0: f64, df0: f64 },
    /// A constant profile that ignores the reduced ODE (negative control).
    Constant(f64),
}

#[allow(clippy::too_many_arguments)]
pub fn reduced_initial_ode_tau1(
    pde: &Pde,
    xi: &Expr,
    eta: &Expr,
    t0: f64,
    anchor: f64,
    f0: f64,
    df0: f64,
    span: Interval,
    params: &BTreeMap<String, f64>,
    options: OdeOptions,
) -> Result<OdeProblem> {
    let problem = OdeProblem {
        independent: Var::X,
        state: vec![Var::U, Var::Ux],
        rhs: vec![Expr::var(Var::Ux), reduced_initial_ode_expr(pde, xi, eta, t0)],
        fixed: vec![(Var::T, t0)],
        params: params.clone(),
        start: anchor,
        initial: vec![f0, df0],
        span,
        options,
    };
    problem.validate()?;
    let ev = Evaluator::new(vec![pde.k().clone(), xi.clone(), eta.clone()], params);
    let mut ev = ev;
    ev.set(Var::T, t0);
    ev.set(Var::U, f0);
    for k in 0..=100 {
        let x = span.lo + (span.hi - span.lo) * k as f64 / 100.0;
        ev.set(Var::X, x);
        for i in 0..3 {
            ev.eval(i, Var::X)?;
        }
    }
    Ok(problem)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub ode: OdeOptions,
    /// Characteristics launched per output node across the window.
    pub oversample: usize,
    pub params: BTreeMap<String, f64>,
    pub entry_id: String,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            ode: OdeOptions::default(),
            oversample: 4,
            params: BTreeMap::new(),
            entry_id: String::new(),
        }
    }
}

impl PipelineOptions {
    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_entry(mut self, id: &str) -> Self {
        self.entry_id = id.to_string();
        self
    }
}

struct Launched {
    /// `(X, U, X_s, U_s)` at every output time.
    states: Vec<[f64; 4]>,
}

fn hermite(x0: f64, x1: f64, u0: f64, u1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
        s * (1.0 - s) * (1.0 - s),
        s * s * (3.0 - 2.0 * s),
        s * s * (s - 1.0),
    );
    h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1
}

/// Build an invariant solution for `Q = d_t + xi d_x + eta d_u` by forward
/// characteristics. Each characteristic carries its sensitivity to the launch
/// abscissa, which gives exact slopes for the cubic Hermite interpolation
/// onto the grid and detects crossings (`X_s <= 0`).
pub fn characteristics_solution_tau1(
    pde: &Pde,
    xi: &Expr,
    eta: &Expr,
    profile: &InitialProfile,
    grid: &GridSpec,
    opts: &PipelineOptions,
) -> Result<GridSolution> {
    grid.validate()?;
    let mut widen = 1.25;
    for _ in 0..4 {
        match characteristics_attempt(pde, xi, eta, profile, grid, opts, widen) {
            Err(Error::CorridorExit { .. }) => widen *= 2.0,
            other => return other,
        }
    }
    characteristics_attempt(pde, xi, eta, profile, grid, opts, widen)
}

fn characteristics_attempt(
    pde: &Pde,
    xi: &Expr,
    eta: &Expr,
    profile: &InitialProfile,
    grid: &GridSpec,
    opts: &PipelineOptions,
    widen: f64,
) -> Result<GridSolution> {
    use Var::{T, U, X};
    let t_nodes = grid.t_nodes();
    let x_nodes = grid.x_nodes();
    let t0 = grid.t.lo;
    let duration = grid.t.hi - grid.t.lo;

    let profile_at = |span: Interval, xs: &[f64]| -> Result<Vec<(f64, f64)>> {
        match *profile {
            InitialProfile::Constant(c) => Ok(xs.iter().map(|_| (c, 0.0)).collect()),
            InitialProfile::Shooting { anchor, f0, df0 } => {
                let span = Interval::new(span.lo.min(anchor), span.hi.max(anchor));
                let problem =
                    reduced_initial_ode_tau1(pde, xi, eta, t0, anchor, f0, df0, span, &opts.params, opts.ode)?;
                Ok(problem.solve_at(xs)?.into_iter().map(|y| (y[0], y[1])).collect())
            }
        }
    };

    // Drift of the characteristics over the window decides how far outside
    // it they have to start.
    let initial = profile_at(grid.x, &x_nodes)?;
    let mut speed = Evaluator::new(vec![xi.clone()], &opts.params);
    speed.set(T, t0);
    let (mut right, mut left) = (0.0f64, 0.0f64);
    for (x, (f, _)) in x_nodes.iter().zip(&initial) {
        speed.set(X, *x);
        speed.set(U, *f);
        let v = speed.eval(0, X)?;
        right = right.max(v);
        left = left.max(-v);
    }
    let lo = grid.x.lo - widen * duration * right - 2.0 * grid.h_x();
    let hi = grid.x.hi + widen * duration * left + 2.0 * grid.h_x();
    let density = opts.oversample.max(1) as f64 * (grid.nx - 1) as f64 / (grid.x.hi - grid.x.lo);
    let n_launch = ((hi - lo) * density).ceil() as usize + 1;
    let launch: Vec<f64> = GridSpec::nodes(Interval::new(lo, hi), n_launch);
    let start = profile_at(Interval::new(lo, hi), &launch)?;

    let derived = vec![
        xi.clone(),
        eta.clone(),
        xi.differentiate(X),
        xi.differentiate(U),
        eta.differentiate(X),
        eta.differentiate(U),
    ];
    let base = Evaluator::new(derived, &opts.params);
    let options = OdeOptions {
        max_step: Some(grid.h_t()),
        ..opts.ode
    };

    let launched: Vec<Launched> = launch
        .par_iter()
        .zip(start.par_iter())
        .map(|(&s, &(f, df))| {
            let mut ev = base.clone();
            let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
                ev.set(T, t);
                ev.set(X, y[0]);
                ev.set(U, y[1]);
                let v: [f64; 6] = [
                    ev.eval(0, X)?,
                    ev.eval(1, X)?,
                    ev.eval(2, X)?,
                    ev.eval(3, X)?,
                    ev.eval(4, X)?,
                    ev.eval(5, X)?,
                ];
                dy[0] = v[0];
                dy[1] = v[1];
                dy[2] = v[2] * y[2] + v[3] * y[3];
                dy[3] = v[4] * y[2] + v[5] * y[3];
                Ok(())
            };
            let y0 = [s, f, 1.0, df];
            let tr = solve_ivp(rhs, t0, &y0, grid.t.hi, &t_nodes, &options)?;
            let states = t_nodes
                .iter()
                .map(|&t| {
                    let y = if t == t0 {
                        &y0[..]
                    } else {
                        tr.at_node(t).expect("stop reached")
                    };
                    [y[0], y[1], y[2], y[3]]
                })
                .collect();
            Ok(Launched { states })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut u = Vec::with_capacity(grid.nt * grid.nx);
    for (i, &t) in t_nodes.iter().enumerate() {
        let arrived: Vec<[f64; 4]> = launched.iter().map(|l| l.states[i]).collect();
        let crossed = arrived.iter().any(|s| s[2] <= 0.0) || arrived.windows(2).any(|w| w[1][0] <= w[0][0]);
        if crossed {
            return Err(Error::CharacteristicCrossing { t });
        }
        let (first, last) = (arrived[0][0], arrived[arrived.len() - 1][0]);
        if first > grid.x.lo || last < grid.x.hi {
            return Err(Error::CorridorExit { t, lo: first, hi: last });
        }
        let mut k = 0;
        for &x in &x_nodes {
            while k + 2 < arrived.len() && arrived[k + 1][0] <= x {
                k += 1;
            }
            let (a, b) = (arrived[k], arrived[k + 1]);
            u.push(hermite(a[0], b[0], a[1], b[1], a[3] / a[2], b[3] / b[2], x));
        }
    }
    let sol = GridSolution {
        t: t_nodes,
        x: x_nodes,
        u,
        meta: GridMeta {
            entry_id: opts.entry_id.clone(),
            params: opts.params.clone(),
            route: match profile {
                InitialProfile::Shooting { .. } => "characteristics".into(),
                InitialProfile::Constant(_) => "characteristics, constant profile".into(),
            },
        },
    };
    sol.validate()?;
    Ok(sol)
}

/// `eta eta_u + eta_x + k u^2 (1 - u)`, the time derivative on solutions of
/// `u_x = eta`.
pub fn tau0_time_rhs(pde: &Pde, eta: &Expr) -> Expr {
    eta * eta.differentiate(Var::U) + eta.differentiate(Var::X) + pde.rhs()
}

/// Build an invariant solution for `Q = d_x + eta d_u` from the anchor value
/// `u(t0, x0) = v0`.
pub fn tau0_solution(
    pde: &Pde,
    eta: &Expr,
    anchor: f64,
    v0: f64,
    grid: &GridSpec,
    opts: &PipelineOptions,
) -> Result<GridSolution> {
    use Var::{T, U, X};
    grid.validate()?;
    let t_nodes = grid.t_nodes();
    let x_nodes = grid.x_nodes();
    let anchor_ode = OdeProblem {
        independent: T,
        state: vec![U],
        rhs: vec![tau0_time_rhs(pde, eta)],
        fixed: vec![(X, anchor)],
        params: opts.params.clone(),
        start: grid.t.lo,
        initial: vec![v0],
        span: grid.t,
        options: opts.ode,
    };
    let v: Vec<f64> = anchor_ode.solve_at(&t_nodes)?.into_iter().map(|y| y[0]).collect();

    let span = Interval::new(grid.x.lo.min(anchor), grid.x.hi.max(anchor));
    let rows = t_nodes
        .par_iter()
        .zip(v.par_iter())
        .map(|(&t, &v)| {
            let slice = OdeProblem {
                independent: X,
                state: vec![U],
                rhs: vec![eta.clone()],
                fixed: vec![(T, t)],
                params: opts.params.clone(),
                start: anchor,
                initial: vec![v],
                span,
                options: opts.ode,
            };
            let row = slice.solve_at(&x_nodes).map_err(|e| match e {
                Error::BlowUp { t: x, magnitude } => Error::BlowUp { t: x, magnitude },
                other => other,
            })?;
            Ok(row.into_iter().map(|y| y[0]).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let sol = GridSolution {
        t: t_nodes,
        x: x_nodes,
        u: rows.concat(),
        meta: GridMeta {
            entry_id: opts.entry_id.clone(),
            params: opts.params.clone(),
            route: "anchor".into(),
        },
    };
    sol.validate()?;
    Ok(sol)
}

/// Pipeline settings for the catalog entries that have them.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    Tau1 {
        grid: GridSpec,
        profile: InitialProfile,
        params: BTreeMap<String, f64>,
    },
    Tau0 {
        grid: GridSpec,
        anchor: f64,
        v0: f64,
        params: BTreeMap<String, f64>,
    },
}

impl Preset {
    pub fn grid(&self) -> &GridSpec {
        match self {
            Preset::Tau1 { grid, .. } | Preset::Tau0 { grid, .. } => grid,
        }
    }

    pub fn grid_mut(&mut self) -> &mut GridSpec {
        match self {
            Preset::Tau1 { grid, .. } | Preset::Tau0 { grid, .. } => grid,
        }
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        match self {
            Preset::Tau1 { params, .. } | Preset::Tau0 { params, .. } => params,
        }
    }

    pub fn params_mut(&mut self) -> &mut BTreeMap<String, f64> {
        match self {
            Preset::Tau1 { params, .. } | Preset::Tau0 { params, .. } => params,
        }
    }

    /// Run the pipeline on `grid`. `opts.params` is overwritten by the preset
    /// parameters.
    pub fn solve(
        &self,
        pde: &Pde,
        op: &ReductionOperator,
        grid: &GridSpec,
        opts: &PipelineOptions,
    ) -> Result<GridSolution> {
        let opts = PipelineOptions {
            params: self.params().clone(),
            ..opts.clone()
        };
        match (self, op) {
            (Preset::Tau1 { profile, .. }, ReductionOperator::Tau1 { xi, eta }) => {
                characteristics_solution_tau1(pde, xi, eta, profile, grid, &opts)
            }
            (Preset::Tau0 { anchor, v0, .. }, ReductionOperator::Tau0 { eta }) => {
                tau0_solution(pde, eta, *anchor, *v0, grid, &opts)
            }
            _ => Err(Error::Invalid("preset does not match the operator family".into())),
        }
    }
}

/// Default windows and initial data (201 x 201 grids).
pub fn preset(id: &str) -> Option<Preset> {
    let g = |t: f64, lo: f64, hi: f64| GridSpec {
        nt: 201,
        nx: 201,
        t: Interval::new(0.0, t),
        x: Interval::new(lo, hi),
    };
    let c = |v: f64| BTreeMap::from([("c".to_string(), v)]);
    Some(match id {
        "thm2.case4" => Preset::Tau1 {
            grid: g(0.2, 1.0, 2.0),
            profile: InitialProfile::Shooting {
                anchor: 1.0,
                f0: 0.3,
                df0: 0.0,
            },
            params: c(1.0),
        },
        "thm2.case5+" | "thm2.case5-" => Preset::Tau1 {
            grid: g(0.2, 0.0, 1.0),
            profile: InitialProfile::Shooting {
                anchor: 0.0,
                f0: 0.3,
                df0: 0.0,
            },
            params: c(2.0),
        },
        "thm2.case6" => Preset::Tau1 {
            grid: g(0.2, 1.0, 2.0),
            profile: InitialProfile::Shooting {
                anchor: 1.0,
                f0: 0.3,
                df0: 0.0,
            },
            params: BTreeMap::new(),
        },
        "tau0.item5" | "tau0.item6" => Preset::Tau0 {
            grid: g(0.3, 0.5, 2.0),
            anchor: 1.0,
            v0: 0.5,
            params: BTreeMap::new(),
        },
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};

    fn p(s: &str) -> Expr {
        parse(s, &Context::new().with_param("c").with_function("k", 1)).unwrap()
    }

    /// `w` stands for the slot `u_x`.
    fn pw(s: &str) -> Expr {
        let e = parse(s, &Context::new().with_param("w").with_function("k", 1)).unwrap();
        e.substitute(&crate::expr::Bindings::new().param("w", Expr::var(Var::Ux)))
            .unwrap()
    }

    #[test]
    fn reduced_ode_forms() {
        let pde = Pde::new(p("x^2")).unwrap();
        let f = reduced_initial_ode_expr(&pde, &p("-1/x"), &Expr::zero(), 0.0);
        assert!(f.same_normal_form(&pw("w/x - x^2*u^2*(1-u)")), "{f}");
        let pde = Pde::new(p("k(x)")).unwrap();
        let f = reduced_initial_ode_expr(&pde, &Expr::zero(), &Expr::zero(), 0.0);
        assert!(f.same_normal_form(&p("-k(x)*u^2*(1-u)")));
        let pde = Pde::new(p("2")).unwrap();
        let f = reduced_initial_ode_expr(&pde, &p("3*u-1"), &p("-3*u^2*(u-1)"), 0.0);
        assert!(f.same_normal_form(&pw("-3*u^2*(u-1) - (3*u-1)*w - 2*u^2*(1-u)")));
    }

    #[test]
    fn singular_profile_coefficient() {
        let pde = Pde::new(p("c/x^2")).unwrap();
        let r = reduced_initial_ode_tau1(
            &pde,
            &p("x/(2*t)"),
            &Expr::zero(),
            0.0,
            1.0,
            0.3,
            0.0,
            Interval::new(1.0, 2.0),
            &BTreeMap::from([("c".into(), 1.0)]),
            OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::SingularCoefficient { .. })), "{r:?}");
    }

    #[test]
    fn grid_helpers() {
        let g = GridSpec::new(201, 201, Interval::new(0.0, 0.2), Interval::new(1.0, 2.0)).unwrap();
        let levels = g.levels_ending_here(3).unwrap();
        assert_eq!(levels.iter().map(|l| l.nx).collect::<Vec<_>>(), [51, 101, 201]);
        assert_eq!(levels[0].refined(), levels[1]);
        assert_eq!(*g.x_nodes().last().unwrap(), 2.0);
        assert!(GridSpec::new(2, 5, g.t, g.x).is_err());
        let sol = GridSolution::from_fn(
            &GridSpec::new(3, 3, g.t, g.x).unwrap(),
            GridMeta {
                entry_id: "x".into(),
                params: BTreeMap::new(),
                route: "test".into(),
            },
            |t, x| t + x,
        );
        let csv = sol.to_csv();
        assert_eq!(csv.lines().count(), 10);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0"
        );
    }

    #[test]
    fn uniform_tau0_solution() {
        let pde = Pde::new(p("c")).unwrap();
        let grid = GridSpec::new(11, 11, Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)).unwrap();
        let opts = PipelineOptions::default().with_param("c", 1.5);
        let sol = tau0_solution(&pde, &Expr::zero(), 0.5, 0.5, &grid, &opts).unwrap();
        for i in 0..sol.nt() {
            assert!(sol.row(i).iter().all(|&v| v == sol.at(i, 0)));
        }
        assert!(sol.at(10, 0) > 0.5 && sol.at(10, 0) < 1.0);
    }
}
