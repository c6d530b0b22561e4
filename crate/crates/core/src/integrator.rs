//! Numerical solution of `x'' + gamma(t) x' + grad Phi(x) = 0` as a
//! first-order system on `[t0, T]`.
//!
//! The main path is an embedded Dormand-Prince 5(4) pair with PI step-size
//! control and a quartic dense-output interpolant per accepted step; the
//! interpolant is retained so diagnostics can place quadrature nodes anywhere
//! without touching step acceptance. A classical fixed-step RK4
//! ([`reference_integrate`]) serves as an independent oracle in tests and
//! `oracle` comparisons only.

use crate::damping::DampingSpec;
use crate::error::{Error, IntegrationFailureKind, Result};
use crate::potential::PotentialSpec;
use crate::Vector;

/// Position/velocity pair at a time point.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub x: Vector,
    pub v: Vector,
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// One accepted step with its dense-output polynomial over the packed state
/// `y = [x; v]`. Coefficients are stored flat (5 blocks of `2n`) to keep
/// long trajectories cheap.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t: f64,
    pub h: f64,
    cont: Box<[f64]>,
}

impl DenseStep {
    /// Interpolated packed state at `t` within `[self.t, self.t + self.h]`.
    pub fn eval(&self, t: f64) -> Vector {
        let n2 = self.cont.len() / 5;
        let theta = ((t - self.t) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        Vector::from_iterator(
            n2,
            (0..n2).map(|i| {
                let c = &self.cont;
                c[i] + theta
                    * (c[n2 + i]
                        + theta1
                            * (c[2 * n2 + i] + theta * (c[3 * n2 + i] + theta1 * c[4 * n2 + i])))
            }),
        )
    }

    pub fn end(&self) -> f64 {
        self.t + self.h
    }
}

/// Solution samples at the output schedule plus, for the adaptive path, the
/// dense-output steps covering `[t0, T]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub stats: StepStats,
    pub rel_tol: f64,
    pub abs_tol: f64,
    dim: usize,
    steps: Vec<DenseStep>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t0(&self) -> f64 {
        self.samples.first().map(|s| s.t).unwrap_or(f64::NAN)
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(f64::NAN)
    }

    /// Accepted steps with dense coefficients; empty for the fixed-step
    /// reference.
    pub fn dense_steps(&self) -> &[DenseStep] {
        &self.steps
    }

    /// Frees the dense-output storage, keeping samples and statistics. Long
    /// runs carry hundreds of thousands of steps; callers that are done with
    /// quadrature drop them to keep cached trajectories small.
    pub fn discard_dense_output(&mut self) {
        self.steps = Vec::new();
    }

    /// Dense-output state at an arbitrary `t` within the integration span.
    pub fn eval(&self, t: f64) -> Result<State> {
        if self.steps.is_empty() {
            return Err(Error::UnsupportedQuery(
                "trajectory carries no dense output (fixed-step reference)".into(),
            ));
        }
        let lo = self.steps[0].t;
        let hi = self.steps[self.steps.len() - 1].end();
        if t < lo - 1e-12 * lo.abs().max(1.0) || t > hi + 1e-12 * hi.abs().max(1.0) {
            return Err(Error::RejectedInput(format!(
                "t = {t} outside the integrated span [{lo}, {hi}]"
            )));
        }
        let idx = self
            .steps
            .partition_point(|s| s.end() < t)
            .min(self.steps.len() - 1);
        let y = self.steps[idx].eval(t);
        let (x, v) = unpack(&y, self.dim);
        Ok(State { t, x, v })
    }

    /// Sample nearest to `t`.
    pub fn sample_nearest(&self, t: f64) -> &State {
        let idx = self.samples.partition_point(|s| s.t < t);
        if idx == 0 {
            return &self.samples[0];
        }
        if idx >= self.samples.len() {
            return &self.samples[self.samples.len() - 1];
        }
        let (a, b) = (&self.samples[idx - 1], &self.samples[idx]);
        if (t - a.t).abs() <= (b.t - t).abs() {
            a
        } else {
            b
        }
    }
}

/// Log-spaced output schedule.
#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub points_per_decade: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            points_per_decade: 200,
        }
    }
}

impl Schedule {
    /// Strictly increasing times from `t0` to `t_end` inclusive.
    pub fn times(&self, t0: f64, t_end: f64) -> Vec<f64> {
        let decades = (t_end / t0).log10();
        let n = ((self.points_per_decade as f64 * decades).ceil() as usize).max(1) + 1;
        let mut times: Vec<f64> = (0..n)
            .map(|i| t0 * 10f64.powf(decades * i as f64 / (n - 1) as f64))
            .collect();
        times[0] = t0;
        let last = times.len() - 1;
        times[last] = t_end;
        times.dedup_by(|a, b| *a <= *b);
        times
    }
}

/// Right-hand side of the first-order system: `dx = v`,
/// `dv = -gamma(t) v - grad Phi(x)`.
pub fn rhs(s: &State, p: &PotentialSpec, d: &DampingSpec) -> Result<(Vector, Vector)> {
    if s.v.len() != s.x.len() {
        return Err(Error::DimensionMismatch {
            expected: s.x.len(),
            got: s.v.len(),
        });
    }
    let g = p.gradient(&s.x)?;
    let gamma = d.gamma(s.t)?;
    let dv = -&s.v * gamma - g;
    Ok((s.v.clone(), dv))
}

// Dormand-Prince 5(4) coefficients.
#[rustfmt::skip]
mod dp {
    pub const C2: f64 = 1.0 / 5.0;
    pub const C3: f64 = 3.0 / 10.0;
    pub const C4: f64 = 4.0 / 5.0;
    pub const C5: f64 = 8.0 / 9.0;

    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;       pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;      pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0; pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0; pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;  pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0; pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;
    pub const A71: f64 = 35.0 / 384.0;     pub const A73: f64 = 500.0 / 1113.0;
    pub const A74: f64 = 125.0 / 192.0;    pub const A75: f64 = -2187.0 / 6784.0;
    pub const A76: f64 = 11.0 / 84.0;

    // b - b_hat: weights of the embedded error estimate.
    pub const E1: f64 = 71.0 / 57600.0;
    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;
    pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;
    pub const E7: f64 = -1.0 / 40.0;

    // Dense-output weights.
    pub const D1: f64 = -12715105075.0 / 11282082432.0;
    pub const D3: f64 = 87487479700.0 / 32700410799.0;
    pub const D4: f64 = -10690763975.0 / 1880347072.0;
    pub const D5: f64 = 701980252875.0 / 199316789632.0;
    pub const D6: f64 = -1453857185.0 / 822651844.0;
    pub const D7: f64 = 69997945.0 / 29380423.0;
}

const SAFETY: f64 = 0.9;
const SHRINK_MIN: f64 = 0.2;
const GROWTH_MAX: f64 = 5.0;
// PI control: beta = 0.04, alpha = 1/5 - 0.75 beta.
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;
const MAX_STEPS: usize = 50_000_000;
const MAX_REFERENCE_STEPS: f64 = 2.0e8;

fn pack(x: &Vector, v: &Vector) -> Vector {
    let n = x.len();
    Vector::from_iterator(2 * n, x.iter().chain(v.iter()).copied())
}

fn unpack(y: &Vector, n: usize) -> (Vector, Vector) {
    (Vector::from(y.rows(0, n)), Vector::from(y.rows(n, n)))
}

fn all_finite(y: &Vector) -> bool {
    y.iter().all(|a| a.is_finite())
}

fn lincomb(y: &Vector, h: f64, terms: &[(f64, &Vector)]) -> Vector {
    let mut out = y.clone();
    for (c, k) in terms {
        out.axpy(h * c, k, 1.0);
    }
    out
}

struct System<'a> {
    p: &'a PotentialSpec,
    d: &'a DampingSpec,
    n: usize,
    evals: usize,
}

impl<'a> System<'a> {
    fn deriv(&mut self, t: f64, y: &Vector) -> Result<Vector> {
        self.evals += 1;
        let (x, v) = unpack(y, self.n);
        let g = self.p.gradient(&x)?;
        let gamma = self.d.gamma(t)?;
        let mut out = Vector::zeros(2 * self.n);
        for i in 0..self.n {
            out[i] = v[i];
            out[self.n + i] = -gamma * v[i] - g[i];
        }
        Ok(out)
    }
}

fn validate_common(
    p: &PotentialSpec,
    d: &DampingSpec,
    x0: &Vector,
    v0: &Vector,
    t0: f64,
    t_end: f64,
) -> Result<()> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x0.len(),
        });
    }
    if v0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: v0.len(),
        });
    }
    if !(t0 > 0.0) {
        return Err(Error::RejectedInput(format!("t0 must be > 0, got {t0}")));
    }
    if t0 < d.t0() {
        return Err(Error::RejectedInput(format!(
            "t0 = {t0} is left of the damping domain start {}",
            d.t0()
        )));
    }
    if !(t_end > t0) {
        return Err(Error::RejectedInput(format!(
            "need T > t0, got T = {t_end}, t0 = {t0}"
        )));
    }
    Ok(())
}

/// Weighted RMS error norm with per-component mixed absolute/relative scale.
fn error_norm(e: &Vector, y: &Vector, y_new: &Vector, abs_tol: f64, rel_tol: f64) -> f64 {
    let n = e.len();
    let mut acc = 0.0;
    for i in 0..n {
        let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        let q = if e[i] == 0.0 { 0.0 } else { e[i] / sc };
        acc += q * q;
    }
    (acc / n as f64).sqrt()
}

fn initial_step(
    sys: &mut System,
    t0: f64,
    t_end: f64,
    y0: &Vector,
    f0: &Vector,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let n = y0.len();
    let rms = |v: &Vector, scale: &dyn Fn(usize) -> f64| -> f64 {
        let s: f64 = (0..n)
            .map(|i| {
                let q = v[i] / scale(i);
                q * q
            })
            .sum();
        (s / n as f64).sqrt()
    };
    let sc = |i: usize| abs_tol + rel_tol * y0[i].abs();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t_end - t0);
    let y1 = lincomb(y0, h0, &[(1.0, f0)]);
    let f1 = sys.deriv(t0 + h0, &y1)?;
    let diff = &f1 - f0;
    let d2 = rms(&diff, &sc) / h0;
    let mx = d1.max(d2);
    let h1 = if mx <= 1e-15 {
        1e-6_f64.max(h0 * 1e-3)
    } else {
        (0.01 / mx).powf(0.2)
    };
    // A too-small guess only costs growth steps, but it must clear the
    // underflow guard; tiny abs_tol with zero components can drive the
    // heuristic arbitrarily low.
    let floor = 1e-13 * t0.max(1.0);
    Ok((100.0 * h0).min(h1).min(t_end - t0).max(floor))
}

/// Adaptive Dormand-Prince 5(4) with dense output evaluated at the requested
/// schedule. The first sample is the initial condition exactly.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    p: &PotentialSpec,
    d: &DampingSpec,
    x0: &Vector,
    v0: &Vector,
    t0: f64,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    schedule: Schedule,
) -> Result<Trajectory> {
    validate_common(p, d, x0, v0, t0, t_end)?;
    if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
        return Err(Error::RejectedInput(format!(
            "tolerances must be positive, got rel = {rel_tol}, abs = {abs_tol}"
        )));
    }
    let n = p.dim();
    let mut sys = System { p, d, n, evals: 0 };
    let times = schedule.times(t0, t_end);

    let mut t = t0;
    let mut y = pack(x0, v0);
    let mut k1 = sys.deriv(t, &y)?;
    if !all_finite(&k1) {
        return Err(Error::Integration {
            t,
            kind: IntegrationFailureKind::NonFiniteState,
        });
    }
    let mut h = initial_step(&mut sys, t0, t_end, &y, &k1, abs_tol, rel_tol)?;

    let mut samples = Vec::with_capacity(times.len());
    samples.push(State {
        t: t0,
        x: x0.clone(),
        v: v0.clone(),
    });
    let mut next_out = 1usize;

    let mut steps: Vec<DenseStep> = Vec::new();
    let mut stats = StepStats::default();
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let mut saw_nonfinite = false;

    while t < t_end {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::Integration {
                t,
                kind: IntegrationFailureKind::StepLimit,
            });
        }
        if h < 1e-14 * t {
            let kind = if saw_nonfinite {
                IntegrationFailureKind::NonFiniteState
            } else {
                IntegrationFailureKind::StepUnderflow
            };
            return Err(Error::Integration { t, kind });
        }
        let mut final_step = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            final_step = true;
        }

        use dp::*;
        let k2 = sys.deriv(t + C2 * h, &lincomb(&y, h, &[(A21, &k1)]))?;
        let k3 = sys.deriv(t + C3 * h, &lincomb(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = sys.deriv(
            t + C4 * h,
            &lincomb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = sys.deriv(
            t + C5 * h,
            &lincomb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = sys.deriv(
            t + h,
            &lincomb(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = lincomb(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = sys.deriv(t + h, &y_new)?;
        let err_vec = lincomb(
            &Vector::zeros(2 * n),
            h,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let err = error_norm(&err_vec, &y, &y_new, abs_tol, rel_tol);

        if !err.is_finite() || !all_finite(&y_new) {
            stats.rejected += 1;
            saw_nonfinite = true;
            last_rejected = true;
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            // Accept: store the dense polynomial, then emit due samples.
            let n2 = 2 * n;
            let mut cont = vec![0.0; 5 * n2];
            for i in 0..n2 {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[i] = y[i];
                cont[n2 + i] = ydiff;
                cont[2 * n2 + i] = bspl;
                cont[3 * n2 + i] = ydiff - h * k7[i] - bspl;
                cont[4 * n2 + i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = DenseStep {
                t,
                h,
                cont: cont.into_boxed_slice(),
            };
            let step_end = if final_step { t_end } else { t + h };
            while next_out < times.len() && times[next_out] <= step_end {
                let tau = times[next_out];
                let (x, v) = if tau == step_end && final_step {
                    unpack(&y_new, n)
                } else {
                    unpack(&step.eval(tau), n)
                };
                samples.push(State { t: tau, x, v });
                next_out += 1;
            }
            steps.push(step);
            stats.accepted += 1;
            t = step_end;
            y = y_new;
            k1 = k7; // FSAL

            let ratio = if err == 0.0 {
                GROWTH_MAX
            } else {
                SAFETY * err.powf(-PI_ALPHA) * facold.powf(PI_BETA)
            };
            let mut ratio = ratio.clamp(SHRINK_MIN, GROWTH_MAX);
            if last_rejected {
                ratio = ratio.min(1.0);
            }
            facold = err.max(1e-4);
            last_rejected = false;
            h *= ratio;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let ratio = (SAFETY * err.powf(-0.2)).clamp(SHRINK_MIN, 1.0);
            h *= ratio;
        }
    }

    stats.rhs_evals = sys.evals;
    Ok(Trajectory {
        samples,
        stats,
        rel_tol,
        abs_tol,
        dim: n,
        steps,
    })
}

/// Classical fixed-step RK4 landing exactly on the schedule times.
/// Deterministic; used only as an independent oracle.
#[allow(clippy::too_many_arguments)]
pub fn reference_integrate(
    p: &PotentialSpec,
    d: &DampingSpec,
    x0: &Vector,
    v0: &Vector,
    t0: f64,
    t_end: f64,
    h: f64,
    schedule: Schedule,
) -> Result<Trajectory> {
    validate_common(p, d, x0, v0, t0, t_end)?;
    if !(h > 0.0) {
        return Err(Error::RejectedInput(format!("step must be > 0, got {h}")));
    }
    let est = (t_end - t0) / h;
    if est > MAX_REFERENCE_STEPS {
        return Err(Error::RejectedInput(format!(
            "reference run would need ~{est:.1e} steps (budget {MAX_REFERENCE_STEPS:.0e})"
        )));
    }
    let n = p.dim();
    let mut sys = System { p, d, n, evals: 0 };
    let times = schedule.times(t0, t_end);

    let mut t = t0;
    let mut y = pack(x0, v0);
    let mut samples = Vec::with_capacity(times.len());
    samples.push(State {
        t: t0,
        x: x0.clone(),
        v: v0.clone(),
    });
    let mut stats = StepStats::default();

    for &target in &times[1..] {
        while t < target {
            let step = h.min(target - t);
            let k1 = sys.deriv(t, &y)?;
            let k2 = sys.deriv(t + 0.5 * step, &lincomb(&y, 0.5 * step, &[(1.0, &k1)]))?;
            let k3 = sys.deriv(t + 0.5 * step, &lincomb(&y, 0.5 * step, &[(1.0, &k2)]))?;
            let k4 = sys.deriv(t + step, &lincomb(&y, step, &[(1.0, &k3)]))?;
            y = lincomb(
                &y,
                step / 6.0,
                &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
            );
            t += step;
            if target - t < 1e-13 * target {
                t = target;
            }
            stats.accepted += 1;
        }
        if !all_finite(&y) {
            return Err(Error::Integration {
                t,
                kind: IntegrationFailureKind::NonFiniteState,
            });
        }
        let (x, v) = unpack(&y, n);
        samples.push(State { t: target, x, v });
    }

    stats.rhs_evals = sys.evals;
    Ok(Trajectory {
        samples,
        stats,
        rel_tol: 0.0,
        abs_tol: 0.0,
        dim: n,
        steps: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Matrix;

    fn quadratic_1d() -> PotentialSpec {
        PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap()
    }

    fn free_flow_x(t: f64) -> f64 {
        1.0 + (1.0 - t.powi(-3)) / 3.0
    }

    #[test]
    fn rhs_matches_hand_values() {
        let p = quadratic_1d();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let s = State {
            t: 2.0,
            x: Vector::from_row_slice(&[1.0]),
            v: Vector::from_row_slice(&[0.0]),
        };
        let (dx, dv) = rhs(&s, &p, &d).unwrap();
        assert_eq!(dx[0], 0.0);
        assert_eq!(dv[0], -1.0);

        let zero = PotentialSpec::zero(1).unwrap();
        let s = State {
            t: 1.0,
            x: Vector::from_row_slice(&[0.0]),
            v: Vector::from_row_slice(&[1.0]),
        };
        let (dx, dv) = rhs(&s, &zero, &d).unwrap();
        assert_eq!(dx[0], 1.0);
        assert_eq!(dv[0], -4.0);
    }

    #[test]
    fn rhs_is_zero_at_equilibrium() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let s = State {
            t: 3.0,
            x: p.argmin_witness().unwrap().clone(),
            v: Vector::zeros(2),
        };
        let (dx, dv) = rhs(&s, &p, &d).unwrap();
        assert_eq!(dx.norm(), 0.0);
        assert_eq!(dv.norm(), 0.0);
    }

    #[test]
    fn schedule_times_are_strictly_increasing_with_exact_endpoints() {
        let times = Schedule {
            points_per_decade: 200,
        }
        .times(1.0, 1e3);
        assert_eq!(times[0], 1.0);
        assert_eq!(*times.last().unwrap(), 1e3);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(times.len() > 600);
    }

    #[test]
    fn stationary_initial_data_stays_at_the_minimizer() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let traj = integrate(
            &p,
            &d,
            &Vector::zeros(2),
            &Vector::zeros(2),
            1.0,
            1e3,
            1e-9,
            1e-12,
            Schedule::default(),
        )
        .unwrap();
        let worst = traj.samples.iter().map(|s| s.x.norm()).fold(0.0, f64::max);
        assert!(worst <= 1e-9, "drift {worst}");
        assert_eq!(traj.samples[0].t, 1.0);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn free_flow_matches_the_closed_form() {
        // Phi = 0, K = 4: v(t) = t^-4, x(t) = 1 + (1 - t^-3)/3 -> 4/3.
        let p = PotentialSpec::zero(1).unwrap();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let traj = integrate(
            &p,
            &d,
            &Vector::from_row_slice(&[1.0]),
            &Vector::from_row_slice(&[1.0]),
            1.0,
            1e3,
            1e-11,
            1e-30,
            Schedule::default(),
        )
        .unwrap();
        let mut worst = 0.0_f64;
        for s in &traj.samples {
            worst = worst.max((s.x[0] - free_flow_x(s.t)).abs());
        }
        assert!(worst <= 1e-8, "sup error {worst:.3e}");
        let last = traj.samples.last().unwrap();
        assert!((last.x[0] - 4.0 / 3.0).abs() < 1e-6);
        // velocity keeps relative accuracy deep into the decay
        assert!(
            (last.v[0] - 1e-12).abs() < 1e-17,
            "v(T) = {:.3e}",
            last.v[0]
        );
    }

    #[test]
    fn dense_output_agrees_with_samples_between_nodes() {
        let p = quadratic_1d();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let x0 = Vector::from_row_slice(&[1.0]);
        let v0 = Vector::zeros(1);
        let traj = integrate(
            &p,
            &d,
            &x0,
            &v0,
            1.0,
            100.0,
            1e-9,
            1e-30,
            Schedule::default(),
        )
        .unwrap();
        for s in traj.samples.iter().step_by(17) {
            let e = traj.eval(s.t).unwrap();
            assert!((e.x[0] - s.x[0]).abs() <= 1e-12 * (1.0 + s.x[0].abs()));
        }
    }

    #[test]
    fn adaptive_agrees_with_reference_rk4() {
        let p = quadratic_1d();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let x0 = Vector::from_row_slice(&[1.0]);
        let v0 = Vector::zeros(1);
        let sched = Schedule {
            points_per_decade: 50,
        };
        let a = integrate(&p, &d, &x0, &v0, 1.0, 100.0, 1e-9, 1e-12, sched).unwrap();
        let r = reference_integrate(&p, &d, &x0, &v0, 1.0, 100.0, 1e-4, sched).unwrap();
        assert_eq!(a.samples.len(), r.samples.len());
        let mut worst = 0.0_f64;
        for (sa, sr) in a.samples.iter().zip(&r.samples) {
            assert_eq!(sa.t, sr.t);
            worst = worst.max((&sa.x - &sr.x).amax().max((&sa.v - &sr.v).amax()));
        }
        assert!(worst <= 1e-7, "sup discrepancy {worst:.3e}");
    }

    #[test]
    fn reference_rk4_decays_at_fourth_order() {
        let p = PotentialSpec::zero(1).unwrap();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let x0 = Vector::from_row_slice(&[1.0]);
        let v0 = Vector::from_row_slice(&[1.0]);
        let sched = Schedule {
            points_per_decade: 10,
        };
        let sup_err = |h: f64| -> f64 {
            let traj = reference_integrate(&p, &d, &x0, &v0, 1.0, 10.0, h, sched).unwrap();
            traj.samples
                .iter()
                .map(|s| (s.x[0] - free_flow_x(s.t)).abs())
                .fold(0.0, f64::max)
        };
        // Steps large enough that truncation error dominates rounding.
        let e_coarse = sup_err(2e-2);
        let e_fine = sup_err(1e-2);
        let ratio = e_coarse / e_fine;
        assert!(
            (ratio - 16.0).abs() <= 0.2 * 16.0,
            "order ratio {ratio} (coarse {e_coarse:.3e}, fine {e_fine:.3e})"
        );
        // absolute accuracy example at h = 1e-4
        let e = sup_err(1e-4);
        assert!(e <= 1e-10, "closed-form error {e:.3e}");
    }

    #[test]
    fn reference_step_budget_is_enforced() {
        let p = quadratic_1d();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let x0 = Vector::from_row_slice(&[1.0]);
        let v0 = Vector::zeros(1);
        let r = reference_integrate(&p, &d, &x0, &v0, 1.0, 1e4, 1e-12, Schedule::default());
        assert!(matches!(r, Err(Error::RejectedInput(_))));
    }

    #[test]
    fn nonfinite_rhs_is_reported_as_divergence() {
        // Gradient overflows immediately: 1e300 * 1e10 is not representable.
        let p = PotentialSpec::quadratic(Matrix::from_row_slice(1, 1, &[1e300]), Vector::zeros(1))
            .unwrap();
        let d = DampingSpec::over_t(4.0, 1.0).unwrap();
        let r = integrate(
            &p,
            &d,
            &Vector::from_row_slice(&[1e10]),
            &Vector::zeros(1),
            1.0,
            10.0,
            1e-9,
            1e-12,
            Schedule::default(),
        );
        match r {
            Err(Error::Integration { kind, .. }) => {
                assert_eq!(kind, IntegrationFailureKind::NonFiniteState)
            }
            other => panic!("expected divergence report, got {other:?}"),
        }
    }
}
