//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems, with
//! the standard fourth-order continuous extension for dense output.

use crate::error::{Error, Result};
use crate::fock::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

/// Right-hand side dy/dt = f(t, y), written into `dy`.
pub trait System {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

impl<F: FnMut(f64, &[C64], &mut [C64])> System for F {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self(t, y, dy)
    }
}

/// Single-step driver. After each accepted step the interval
/// `[t_prev, t]` can be sampled with [`Dopri5::dense`].
pub struct Dopri5 {
    tol: Tolerances,
    t: f64,
    t_prev: f64,
    h: f64,
    y: Vec<C64>,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    cont: [Vec<C64>; 5],
    fresh: bool,
    pub accepted: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<C64>, tol: Tolerances) -> Self {
        let n = y0.len();
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            tol,
            t: t0,
            t_prev: t0,
            h: 0.0,
            y: y0,
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            cont: [z(), z(), z(), z(), z()],
            fresh: true,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn y(&self) -> &[C64] {
        &self.y
    }

    fn rms(&self, v: &[C64], reference: &[C64]) -> f64 {
        let n = v.len().max(1) as f64;
        let s: f64 = v
            .iter()
            .zip(reference)
            .map(|(x, r)| {
                let sc = self.tol.atol + self.tol.rtol * r.norm();
                (x.norm() / sc).powi(2)
            })
            .sum();
        (s / n).sqrt()
    }

    // Hairer & Wanner's starting step heuristic.
    fn initial_step<S: System>(&mut self, sys: &mut S, span: f64) -> f64 {
        sys.eval(self.t, &self.y, &mut self.k[0]);
        let d0 = self.rms(&self.y, &self.y);
        let d1 = self.rms(&self.k[0], &self.y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span.abs());
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + self.k[0][i] * h0;
        }
        sys.eval(self.t + h0, &self.ytmp, &mut self.k[1]);
        let diff: Vec<C64> = self.k[1].iter().zip(&self.k[0]).map(|(a, b)| a - b).collect();
        let d2 = self.rms(&diff, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }

    /// Take one accepted step without passing `t_limit`.
    pub fn step<S: System>(&mut self, sys: &mut S, t_limit: f64) -> Result<()> {
        let span = t_limit - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        if self.fresh {
            self.h = self.initial_step(sys, span);
            sys.eval(self.t, &self.y, &mut self.k[0]);
            self.fresh = false;
        }
        let n = self.y.len();
        loop {
            let mut h = self.h.min(span);
            let last = h >= span * (1.0 - 1e-12);
            if last {
                h = span;
            }
            if h.abs() <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::Stiffness { time: self.t });
            }
            let t = self.t;
            let y = &self.y;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            let ytmp = &mut self.ytmp;

            for i in 0..n {
                ytmp[i] = y[i] + k1[i] * (h * A21);
            }
            sys.eval(t + C2 * h, ytmp, k2);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
            sys.eval(t + C3 * h, ytmp, k3);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
            sys.eval(t + C4 * h, ytmp, k4);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
            sys.eval(t + C5 * h, ytmp, k5);
            for i in 0..n {
                ytmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
            sys.eval(t + h, ytmp, k6);
            for i in 0..n {
                self.ynew[i] =
                    y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
            }
            sys.eval(t + h, &self.ynew, k7);

            let mut err = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.tol.atol + self.tol.rtol * y[i].norm().max(self.ynew[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            let err = (err / n.max(1) as f64).sqrt();

            if !err.is_finite() {
                self.h = h * FAC_MIN;
                self.rejected += 1;
                continue;
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if err <= 1.0 {
                // continuous extension coefficients
                for i in 0..n {
                    let ydiff = self.ynew[i] - y[i];
                    let bspl = k1[i] * h - ydiff;
                    self.cont[0][i] = y[i];
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - k7[i] * h - bspl;
                    self.cont[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                std::mem::swap(k1, k7);
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.t_prev = t;
                self.t = if last { t_limit } else { t + h };
                // a long final step should not shrink the next one
                self.h = if last { self.h.max(h) } else { h * fac };
                self.accepted += 1;
                return Ok(());
            }
            self.h = h * fac.min(1.0);
            self.rejected += 1;
        }
    }

    /// Dense output on the last accepted step.
    pub fn dense(&self, t: f64, out: &mut [C64]) {
        let h = self.t - self.t_prev;
        if h == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let th = (t - self.t_prev) / h;
        let th1 = 1.0 - th;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cont[0][i]
                + (self.cont[1][i] + (self.cont[2][i] + (self.cont[3][i] + self.cont[4][i] * th1) * th) * th1) * th;
        }
    }

    /// Restart from a new state, e.g. after a quantum jump.
    pub fn reset(&mut self, t: f64, y: &[C64]) {
        self.t = t;
        self.t_prev = t;
        self.y.copy_from_slice(y);
        self.fresh = true;
    }
}

/// Integrate from `times[0]` and hand each requested sample to `sample`.
pub fn integrate<S: System>(
    sys: &mut S,
    y0: Vec<C64>,
    times: &[f64],
    tol: Tolerances,
    mut sample: impl FnMut(usize, &[C64]) -> Result<()>,
) -> Result<()> {
    if times.is_empty() {
        return Ok(());
    }
    let mut solver = Dopri5::new(times[0], y0, tol);
    sample(0, solver.y())?;
    let mut buf = vec![C64::new(0.0, 0.0); solver.y().len()];
    let t_end = *times.last().unwrap();
    let mut next = 1;
    while next < times.len() {
        solver.step(sys, t_end)?;
        while next < times.len() && times[next] <= solver.t() {
            if times[next] == solver.t() {
                buf.copy_from_slice(solver.y());
            } else {
                solver.dense(times[next], &mut buf);
            }
            sample(next, &buf)?;
            next += 1;
        }
    }
    Ok(())
}
