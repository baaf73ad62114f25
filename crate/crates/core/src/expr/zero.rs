//! Probabilistic identity testing by random evaluation.
//!
//! An expression is declared identically zero when, for every parameter
//! draw, it vanishes at every accepted sample point up to a tolerance that
//! is relative to the largest additive term of its expanded form at that
//! point. Unknown function symbols are replaced by random smooth test
//! functions (one fresh instance per draw), so identities that must hold for
//! arbitrary functions are tested as well.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::Env;
use super::normal::{CompiledPoly, Poly};
use super::subst::{Bindings, FunctionDef};
use super::{rat, Expr, Var};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}

/// Admissible values for a symbolic constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ParamRange {
    /// `[-hi, -lo] ∪ [lo, hi]`
    NonZero {
        lo: f64,
        hi: f64,
    },
    Within(Interval),
}

impl ParamRange {
    pub const DEFAULT: ParamRange = ParamRange::NonZero { lo: 0.1, hi: 3.0 };

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            ParamRange::NonZero { lo, hi } => {
                let m = lo + (hi - lo) * rng.gen::<f64>();
                if rng.gen::<bool>() {
                    m
                } else {
                    -m
                }
            }
            ParamRange::Within(i) => i.sample(rng),
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            ParamRange::NonZero { lo, hi } => *lo > 0.0 && lo <= hi && hi.is_finite(),
            ParamRange::Within(i) => i.is_valid(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleBox {
    pub t: Interval,
    pub x: Interval,
    pub u: Interval,
    /// Shared box for the derivative slots `u_t, u_x, ...`.
    pub slots: Interval,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            t: Interval::new(0.1, 1.0),
            x: Interval::new(0.5, 3.0),
            u: Interval::new(-2.0, 2.0),
            slots: Interval::new(-2.0, 2.0),
        }
    }
}

impl SampleBox {
    fn interval(&self, v: Var) -> Interval {
        match v {
            Var::T => self.t,
            Var::X => self.x,
            Var::U => self.u,
            _ => self.slots,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTestPolicy {
    pub samples: usize,
    pub param_draws: usize,
    pub sample_box: SampleBox,
    pub margin: f64,
    pub tol: f64,
    pub seed: u64,
    pub default_range: ParamRange,
    pub param_ranges: BTreeMap<String, ParamRange>,
}

impl Default for ZeroTestPolicy {
    fn default() -> Self {
        ZeroTestPolicy {
            samples: 200,
            param_draws: 5,
            sample_box: SampleBox::default(),
            margin: 1e-3,
            tol: 1e-9,
            seed: 0,
            default_range: ParamRange::DEFAULT,
            param_ranges: BTreeMap::new(),
        }
    }
}

impl ZeroTestPolicy {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_x(mut self, x: Interval) -> Self {
        self.sample_box.x = x;
        self
    }

    pub fn with_t(mut self, t: Interval) -> Self {
        self.sample_box.t = t;
        self
    }

    pub fn with_range(mut self, param: &str, range: ParamRange) -> Self {
        self.param_ranges.insert(param.to_string(), range);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.sample_box;
        let boxes_ok = [b.t, b.x, b.u, b.slots].iter().all(Interval::is_valid);
        let ranges_ok = self.default_range.is_valid() && self.param_ranges.values().all(ParamRange::is_valid);
        if self.samples == 0 || self.param_draws == 0 {
            return Err(Error::Invalid("sample and draw counts must be positive".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.margin.is_nan() || self.margin <= 0.0 {
            return Err(Error::Invalid("tolerance and margin must be positive".into()));
        }
        if !boxes_ok || !ranges_ok {
            return Err(Error::Invalid("empty sampling interval or parameter range".into()));
        }
        Ok(())
    }

    fn range(&self, param: &str) -> ParamRange {
        self.param_ranges.get(param).copied().unwrap_or(self.default_range)
    }
}

/// A sample point at which the expression failed to vanish.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    /// Parameter values, plus any derivative-slot coordinates.
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTestOutcome {
    pub is_zero: bool,
    pub witness: Option<Witness>,
    /// Vanishes after expansion, no sampling needed.
    pub syntactic: bool,
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `|value| / (1 + scale)` over accepted points.
    pub max_ratio: f64,
}

const MAX_ATTEMPT_FACTOR: usize = 20;

pub fn is_zero(e: &Expr, policy: &ZeroTestPolicy) -> Result<ZeroTestOutcome> {
    policy.validate()?;
    let functions = e.functions();
    let fixed = if functions.is_empty() {
        Some(Poly::from_expr(e))
    } else {
        None
    };
    if fixed.as_ref().is_some_and(Poly::is_zero) {
        return Ok(ZeroTestOutcome {
            is_zero: true,
            witness: None,
            syntactic: true,
            accepted: 0,
            rejected: 0,
            max_ratio: 0.0,
        });
    }

    let params = e.params();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut outcome = ZeroTestOutcome {
        is_zero: true,
        witness: None,
        syntactic: false,
        accepted: 0,
        rejected: 0,
        max_ratio: 0.0,
    };
    let mut all_draws_vanish = true;
    let mut terms = Vec::new();

    for _ in 0..policy.param_draws {
        let mut env = Env::new().with_margin(policy.margin);
        for p in &params {
            env.params.insert(p.clone(), policy.range(p).sample(&mut rng));
        }
        let poly = match &fixed {
            Some(p) => p.clone(),
            None => {
                let mut b = Bindings::new();
                for (name, arity) in &functions {
                    b = b.function(name, random_function(*arity, &mut rng));
                }
                Poly::from_expr(&e.substitute(&b)?)
            }
        };
        if poly.is_zero() {
            continue;
        }
        all_draws_vanish = false;
        let compiled = CompiledPoly::new(&poly);

        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < policy.samples && attempts < MAX_ATTEMPT_FACTOR * policy.samples {
            attempts += 1;
            for v in Var::ALL {
                env.set(v, policy.sample_box.interval(v).sample(&mut rng));
            }
            if compiled.term_values(&env, &mut terms).is_err() {
                outcome.rejected += 1;
                continue;
            }
            accepted += 1;
            let value: f64 = terms.iter().sum();
            let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let ratio = value.abs() / (1.0 + scale);
            outcome.max_ratio = outcome.max_ratio.max(ratio);
            if value.abs() > policy.tol * (1.0 + scale) {
                outcome.is_zero = false;
                if outcome.witness.is_none() {
                    outcome.witness = Some(witness(&env, value, scale));
                }
            }
        }
        outcome.accepted += accepted;
    }

    if all_draws_vanish {
        outcome.syntactic = true;
        return Ok(outcome);
    }
    if outcome.accepted == 0 {
        return Err(Error::SamplingStarved {
            attempts: outcome.rejected,
        });
    }
    Ok(outcome)
}

fn witness(env: &Env, value: f64, scale: f64) -> Witness {
    let mut params = env.params.clone();
    for v in Var::ALL.into_iter().filter(|v| v.is_slot()) {
        if let Some(val) = env.get(v) {
            params.insert(v.name().to_string(), val);
        }
    }
    Witness {
        t: env.get(Var::T).unwrap_or(f64::NAN),
        x: env.get(Var::X).unwrap_or(f64::NAN),
        u: env.get(Var::U).unwrap_or(f64::NAN),
        params,
        value,
        scale,
    }
}

/// `a0 + sum_i a_i sin(b_i v_i + g_i) + m cos(sum_i n_i v_i + w)` with small
/// random rational coefficients; the last term couples all arguments so that
/// mixed partial derivatives do not vanish.
fn random_function<R: Rng>(arity: usize, rng: &mut R) -> FunctionDef {
    let formal: Vec<Var> = Var::ALL.into_iter().take(arity).collect();
    let signed = |rng: &mut R| {
        let k = rng.gen_range(1..=8i128);
        if rng.gen::<bool>() {
            rat(k, 4)
        } else {
            rat(-k, 4)
        }
    };
    let mut body = Expr::constant(signed(rng));
    let mut coupled = Expr::constant(rat(rng.gen_range(0..8), 4));
    for v in &formal {
        let amp = signed(rng);
        let freq = rat(rng.gen_range(1..=6), 4);
        let phase = rat(rng.gen_range(0..8), 4);
        let arg = Expr::constant(freq) * Expr::var(*v) + Expr::constant(phase);
        body = body + Expr::constant(amp) * arg.sin();
        coupled = coupled + Expr::constant(signed(rng)) * Expr::var(*v);
    }
    body = body + Expr::constant(signed(rng)) * coupled.cos();
    FunctionDef::new(formal, body)
}
