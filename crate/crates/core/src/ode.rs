//! Adaptive Dormand-Prince 5(4) integrator with cubic Hermite dense output.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Any component exceeding this magnitude is reported as blow-up.
    pub blowup: f64,
    /// Upper bound on the step size; `None` leaves it to the controller.
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            blowup: 1e8,
            max_step: None,
        }
    }
}

impl OdeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.blowup > 0.0) {
            return Err(Error::Invalid("ODE tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Accepted steps with states and derivatives at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dy: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> (f64, &[f64]) {
        let n = self.t.len() - 1;
        (self.t[n], &self.y[n])
    }

    /// State at a node hit exactly (a requested stop).
    pub fn at_node(&self, t: f64) -> Option<&[f64]> {
        self.t.iter().position(|&s| s == t).map(|i| self.y[i].as_slice())
    }

    /// Cubic Hermite interpolation between the bracketing nodes.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let forward = self.t.len() < 2 || self.t[1] >= self.t[0];
        let key = |s: f64| if forward { s } else { -s };
        let (first, last) = (key(self.t[0]), key(*self.t.last()?));
        let kt = key(t);
        if kt < first || kt > last {
            return None;
        }
        let i = self
            .t
            .partition_point(|&s| key(s) <= kt)
            .saturating_sub(1)
            .min(self.t.len().saturating_sub(2));
        if self.t.len() == 1 {
            return Some(self.y[0].clone());
        }
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Some(
            (0..self.y[i].len())
                .map(|j| {
                    h00 * self.y[i][j] + h10 * h * self.dy[i][j] + h01 * self.y[i + 1][j] + h11 * h * self.dy[i + 1][j]
                })
                .collect(),
        )
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (either direction). Every
/// value of `stops` inside the span is hit exactly by an accepted step.
pub fn solve_ivp<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, stops: &[f64], opts: &OdeOptions) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    opts.validate()?;
    if !(t0.is_finite() && t_end.is_finite()) || t0 == t_end {
        return Err(Error::Invalid("degenerate integration span".into()));
    }
    let dir = (t_end - t0).signum();
    let n = y0.len();
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| (s - t0) * dir > 0.0 && (t_end - s) * dir > 0.0)
        .collect();
    targets.push(t_end);
    targets.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    targets.dedup();

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    f(t, &y, &mut k[0])?;
    let mut traj = Trajectory {
        t: vec![t],
        y: vec![y.clone()],
        dy: vec![k[0].clone()],
    };

    let span = (t_end - t0).abs();
    let max_step = opts.max_step.unwrap_or(span).min(span);
    let mut h = initial_step(&mut f, t, &y, &k[0], dir, opts)?.min(max_step);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut target_idx = 0;
    let mut steps = 0;

    while target_idx < targets.len() {
        let target = targets[target_idx];
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        let remaining = (target - t).abs();
        if remaining <= 1e-14 * t.abs().max(1.0) {
            // A stop within rounding distance of the current node.
            traj.t.push(target);
            traj.y.push(y.clone());
            traj.dy.push(k[0].clone());
            t = target;
            target_idx += 1;
            continue;
        }
        let lands = h >= remaining * (1.0 - 1e-12);
        let step = if lands { remaining } else { h };
        if step <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let hs = dir * step;

        for s in 1..7 {
            for j in 0..n {
                let mut acc = 0.0;
                for (r, kr) in k.iter().enumerate().take(s) {
                    acc += A[s][r] * kr[j];
                }
                stage[j] = y[j] + hs * acc;
            }
            let (_, rest) = k.split_at_mut(s);
            let ts = if s == 6 { t + hs } else { t + C[s] * hs };
            f(ts, &stage, &mut rest[0])?;
        }
        // Stage 7 was evaluated at the fifth-order solution.
        y_new.copy_from_slice(&stage);

        let mut err = 0.0;
        for j in 0..n {
            let mut e = 0.0;
            for (r, kr) in k.iter().enumerate() {
                e += E[r] * kr[j];
            }
            let sc = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
            err += (hs * e / sc).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            h = step * 0.2;
            continue;
        }

        if err <= 1.0 {
            t = if lands { target } else { t + hs };
            y.copy_from_slice(&y_new);
            let k7 = k[6].clone();
            k[0].copy_from_slice(&k7);
            if let Some(m) = y.iter().map(|v| v.abs()).reduce(f64::max) {
                if m > opts.blowup || !m.is_finite() {
                    return Err(Error::BlowUp { t, magnitude: m });
                }
            }
            traj.t.push(t);
            traj.y.push(y.clone());
            traj.dy.push(k[0].clone());
            if lands {
                target_idx += 1;
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = if lands { h.max(step * fac) } else { step * fac }.min(max_step);
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(traj)
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], dy: &[f64], dir: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm =
        |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt();
    let (d0, d1) = (norm(y), norm(dy));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(dy).map(|(a, b)| a + dir * h0 * b).collect();
    let mut dy1 = vec![0.0; y.len()];
    f(t + dir * h0, &y1, &mut dy1)?;
    let diff: Vec<f64> = dy1.iter().zip(dy).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function() {
        let tr = solve_ivp(
            |_, y, d| {
                d[0] = y[1];
                d[1] = 0.0;
                Ok(())
            },
            1.0,
            &[0.0, 1.0],
            2.0,
            &[],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((tr.last().1[0] - 1.0).abs() <= 1e-9);
        assert_eq!(tr.last().0, 2.0);
    }

    #[test]
    fn logistic_type() {
        let opts = OdeOptions::default();
        let stops: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        let tr = solve_ivp(
            |_, y, d| {
                d[0] = y[0] * y[0] * (1.0 - y[0]);
                Ok(())
            },
            0.0,
            &[0.5],
            5.0,
            &stops,
            &opts,
        )
        .unwrap();
        let v: Vec<f64> = stops.iter().map(|&s| tr.at_node(s).unwrap()[0]).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
        let v5 = tr.last().1[0];
        assert!(v5 > 0.98 && v5 < 1.0, "{v5}");
        // Implicit closed form: ln(v/(1-v)) - 1/v = t + ln 1 - 2.
        let g = |v: f64| (v / (1.0 - v)).ln() - 1.0 / v;
        assert!((g(v5) - (5.0 - 2.0)).abs() < 1e-7);
    }

    #[test]
    fn blow_up_near_pole() {
        let r = solve_ivp(
            |_, y, d| {
                d[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            &[],
            &OdeOptions::default(),
        );
        match r {
            Err(Error::BlowUp { t, .. }) => assert!((t - 1.0).abs() < 1e-6, "{t}"),
            Err(Error::StepUnderflow { t }) => assert!((t - 1.0).abs() < 1e-6, "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backward_with_stops_and_dense_output() {
        let stops = [0.75, 0.5, 0.25];
        let tr = solve_ivp(
            |_, y, d| {
                d[0] = y[0];
                Ok(())
            },
            1.0,
            &[1.0],
            0.0,
            &stops,
            &OdeOptions::default(),
        )
        .unwrap();
        for s in stops {
            let v = tr.at_node(s).unwrap()[0];
            assert!((v - (s - 1.0f64).exp()).abs() < 1e-10);
        }
        let mid = tr.eval(0.3).unwrap()[0];
        assert!((mid - (-0.7f64).exp()).abs() < 1e-6);
        assert!(tr.eval(1.5).is_none());
    }
}
