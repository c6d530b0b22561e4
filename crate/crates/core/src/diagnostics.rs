//! Diagnostic series and checks along a trajectory.
//!
//! For a solution `x(t)` with velocity `v = x'`, a convex potential `Phi`
//! with minimum `min Phi`, and a minimizer anchor `x*`:
//!
//! ```text
//! W(t) = 1/2 |v|^2 + Phi(x) - min Phi        (energy)
//! h(t) = 1/2 |x - x*|^2                      (anchored half-squared distance)
//! h'(t) = <v, x - x*>
//! ```
//!
//! Identities checked in integrated form (pointwise second derivatives are
//! never formed numerically; `h''` is eliminated through the equation of
//! motion):
//!
//! - `W' = -gamma |v|^2`
//! - `h'' + gamma h' = |v|^2 + <grad Phi(x), x* - x>`
//! - `(t^2 W)' = 2 t W - t^2 gamma |v|^2`
//!
//! Inequalities checked with certified constants `K = K_inf`,
//! `0 < eps < (K-3)/3`, `A = 1 - 3/K`, `B = 3/(2K) - 1/(K-1-eps)`:
//!
//! - `W <= 3/2 |v|^2 - h'' - gamma h'`
//! - `A int s W + B t^2 W + eps h <= C + int [(s gamma)']_+ h`
//! - Gronwall bound on `sup h`, kernel tail bound, and the positive-part
//!   integral bound on `int [h']_+`.
//!
//! All running integrals use composite Simpson with nodes placed on the
//! dense-output interpolant, refined within each accepted step so that
//! oscillatory integrands stay resolved independently of the sample schedule.

use serde::Serialize;

use crate::damping::DampingSpec;
use crate::error::{Error, Result};
use crate::integrator::{State, Trajectory};
use crate::potential::PotentialSpec;
use crate::Vector;

/// Residual tolerance for the integrated identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Pointwise energy-bound margin tolerance, scaled by `1 + W`.
pub const ENERGY_BOUND_TOL: f64 = 1e-8;
/// Combined-inequality margin tolerance, scaled by `1 + |C0|`.
pub const LYAPUNOV_TOL: f64 = 1e-6;
/// Kernel bound relative slack.
pub const KERNEL_TOL: f64 = 1e-8;
/// Per-step slack for energy monotonicity, scaled by `1 + W`.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Gronwall and positive-part tail bounds relative slack.
pub const BOUND_TOL: f64 = 1e-6;
/// Anchors must satisfy `|grad Phi(x*)| <=` this.
pub const ANCHOR_GRADIENT_TOL: f64 = 1e-8;
/// Oscillation tolerance for the convergence check, scaled by `1 + |x*|`.
pub const OPIAL_OSCILLATION_TOL: f64 = 1e-4;
pub const OPIAL_PHI_GAP_TOL: f64 = 1e-6;
pub const OPIAL_DISPLACEMENT_TOL: f64 = 1e-4;

/// Simpson subdivisions per accepted integrator step.
const QUAD_SUBDIVISIONS: usize = 8;

/// Per-sample diagnostic quantities and running integrals.
///
/// Anchored fields (`h`, `h_prime`, `int_eqh`, `int_hp_pos`,
/// `int_anchored_rhs`) are empty when the series was built without an anchor.
#[derive(Debug, Clone)]
pub struct DiagnosticSeries {
    pub anchor: Option<Vector>,
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub t2w: Vec<f64>,
    pub speed2: Vec<f64>,
    pub h: Vec<f64>,
    pub h_prime: Vec<f64>,
    /// `int s W ds`
    pub int_sw: Vec<f64>,
    /// `int [(s gamma)']_+ h ds`
    pub int_eqh: Vec<f64>,
    /// `int [h']_+ ds`
    pub int_hp_pos: Vec<f64>,
    /// `int gamma |v|^2 ds`
    pub int_gamma_speed2: Vec<f64>,
    /// `int s^2 gamma |v|^2 ds`
    pub int_s2_gamma_speed2: Vec<f64>,
    /// `int s |v|^2 ds`
    pub int_s_speed2: Vec<f64>,
    /// `int (|v|^2 + <grad Phi, x* - x> - gamma h') ds`
    pub int_anchored_rhs: Vec<f64>,
}

impl DiagnosticSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Index of the sample nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let idx = self.t.partition_point(|&s| s < t);
        if idx == 0 {
            return 0;
        }
        if idx >= self.t.len() {
            return self.t.len() - 1;
        }
        if (t - self.t[idx - 1]).abs() <= (self.t[idx] - t).abs() {
            idx - 1
        } else {
            idx
        }
    }
}

/// `W = 1/2 |v|^2 + Phi(x) - min Phi`, clamped to 0 when within rounding of 0.
pub fn energy(s: &State, p: &PotentialSpec) -> Result<f64> {
    let w = 0.5 * s.v.norm_squared() + p.value(&s.x)? - p.min_value();
    Ok(clamp_energy(w))
}

fn clamp_energy(w: f64) -> f64 {
    if (-1e-12..0.0).contains(&w) {
        0.0
    } else {
        w
    }
}

/// Builds the anchored diagnostic series. The anchor must satisfy the argmin
/// check `|grad Phi(x*)| <= 1e-8`.
pub fn anchored_series(
    traj: &Trajectory,
    p: &PotentialSpec,
    d: &DampingSpec,
    anchor: &Vector,
) -> Result<DiagnosticSeries> {
    let g = p.gradient(anchor)?;
    if g.norm() > ANCHOR_GRADIENT_TOL {
        return Err(Error::RejectedInput(format!(
            "anchor fails the argmin check: |grad Phi| = {:.3e}",
            g.norm()
        )));
    }
    build_series(traj, p, d, Some(anchor.clone()))
}

/// Anchor-free series: energy quantities and their running integrals only.
pub fn energy_series(
    traj: &Trajectory,
    p: &PotentialSpec,
    d: &DampingSpec,
) -> Result<DiagnosticSeries> {
    build_series(traj, p, d, None)
}

// Integrand slots accumulated along the trajectory.
const I_GAMMA_V2: usize = 0;
const I_SW: usize = 1;
const I_S2_GAMMA_V2: usize = 2;
const I_EQH: usize = 3;
const I_HP_POS: usize = 4;
const I_ANCH_RHS: usize = 5;
const I_S_V2: usize = 6;
const N_INTEGRANDS: usize = 7;

fn build_series(
    traj: &Trajectory,
    p: &PotentialSpec,
    d: &DampingSpec,
    anchor: Option<Vector>,
) -> Result<DiagnosticSeries> {
    let steps = traj.dense_steps();
    if steps.is_empty() {
        return Err(Error::UnsupportedQuery(
            "diagnostics need a dense-output trajectory".into(),
        ));
    }
    let n = traj.dim();
    let min_phi = p.min_value();

    let node_values = |tau: f64, y: &Vector| -> Result<[f64; N_INTEGRANDS]> {
        let x = Vector::from(y.rows(0, n));
        let v = Vector::from(y.rows(n, n));
        let speed2 = v.norm_squared();
        let gamma = d.gamma_unchecked(tau.max(d.t0()));
        let w = clamp_energy(0.5 * speed2 + p.value(&x)? - min_phi);
        let mut out = [0.0; N_INTEGRANDS];
        out[I_GAMMA_V2] = gamma * speed2;
        out[I_SW] = tau * w;
        out[I_S2_GAMMA_V2] = tau * tau * gamma * speed2;
        out[I_S_V2] = tau * speed2;
        if let Some(a) = &anchor {
            let diff = &x - a;
            let h = 0.5 * diff.norm_squared();
            let hp = v.dot(&diff);
            let g = p.gradient(&x)?;
            out[I_EQH] = d.t_gamma_prime_pos_unchecked(tau) * h;
            out[I_HP_POS] = hp.max(0.0);
            out[I_ANCH_RHS] = speed2 - g.dot(&diff) - gamma * hp;
        }
        Ok(out)
    };

    // Composite Simpson over [a, b] with nodes on one dense step.
    let simpson_on =
        |step: &crate::integrator::DenseStep, a: f64, b: f64| -> Result<[f64; N_INTEGRANDS]> {
            let mut acc = [0.0; N_INTEGRANDS];
            if b <= a {
                return Ok(acc);
            }
            let m = QUAD_SUBDIVISIONS;
            let hsub = (b - a) / m as f64;
            for j in 0..=m {
                let tau = if j == m { b } else { a + j as f64 * hsub };
                let weight = if j == 0 || j == m {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let vals = node_values(tau, &step.eval(tau))?;
                for (slot, v) in acc.iter_mut().zip(vals) {
                    *slot += weight * v;
                }
            }
            for slot in &mut acc {
                *slot *= hsub / 3.0;
            }
            Ok(acc)
        };

    // Accumulate between consecutive sample points (splitting at step
    // boundaries), so increments of non-negative integrands are themselves
    // non-negative and the running integrals are monotone by construction.
    let times: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let mut running = vec![[0.0; N_INTEGRANDS]; times.len()];
    let mut acc = [0.0; N_INTEGRANDS];
    let mut si = 1usize; // times[0] = t0 has zero integrals
    for step in steps {
        let (a, b) = (step.t, step.end());
        let mut mark = a;
        while si < times.len() && times[si] <= b * (1.0 + 1e-14) {
            let tau = times[si].min(b);
            let piece = simpson_on(step, mark, tau)?;
            for k in 0..N_INTEGRANDS {
                acc[k] += piece[k];
            }
            running[si] = acc;
            mark = tau;
            si += 1;
        }
        let rest = simpson_on(step, mark, b)?;
        for k in 0..N_INTEGRANDS {
            acc[k] += rest[k];
        }
    }
    // Rounding of the final step end can leave the last sample unassigned.
    while si < times.len() {
        running[si] = acc;
        si += 1;
    }

    let mut series = DiagnosticSeries {
        anchor: anchor.clone(),
        t: times,
        w: Vec::new(),
        t2w: Vec::new(),
        speed2: Vec::new(),
        h: Vec::new(),
        h_prime: Vec::new(),
        int_sw: Vec::new(),
        int_eqh: Vec::new(),
        int_hp_pos: Vec::new(),
        int_gamma_speed2: Vec::new(),
        int_s2_gamma_speed2: Vec::new(),
        int_s_speed2: Vec::new(),
        int_anchored_rhs: Vec::new(),
    };
    for (s, integrals) in traj.samples.iter().zip(&running) {
        let w = energy(s, p)?;
        series.w.push(w);
        series.t2w.push(s.t * s.t * w);
        series.speed2.push(s.v.norm_squared());
        if let Some(a) = &anchor {
            let diff = &s.x - a;
            series.h.push(0.5 * diff.norm_squared());
            series.h_prime.push(s.v.dot(&diff));
            series.int_eqh.push(integrals[I_EQH]);
            series.int_hp_pos.push(integrals[I_HP_POS]);
            series.int_anchored_rhs.push(integrals[I_ANCH_RHS]);
        }
        series.int_sw.push(integrals[I_SW]);
        series.int_gamma_speed2.push(integrals[I_GAMMA_V2]);
        series.int_s2_gamma_speed2.push(integrals[I_S2_GAMMA_V2]);
        series.int_s_speed2.push(integrals[I_S_V2]);
    }
    Ok(series)
}

// ---- identities --------------------------------------------------------------

/// Max over consecutive samples of
/// `|W(t_{i+1}) - W(t_i) + int gamma |v|^2| / (1 + W(t_i))`.
pub fn energy_dissipation_residual(series: &DiagnosticSeries) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..series.len() - 1 {
        let drop = series.int_gamma_speed2[i + 1] - series.int_gamma_speed2[i];
        let r = (series.w[i + 1] - series.w[i] + drop).abs() / (1.0 + series.w[i]);
        worst = worst.max(r);
    }
    worst
}

/// Max per-step upward drift of `W`, normalized by `1 + W`; dissipation makes
/// the true series non-increasing.
pub fn energy_monotonicity_violation(series: &DiagnosticSeries) -> f64 {
    let mut worst = f64::MIN;
    for i in 0..series.len() - 1 {
        worst = worst.max((series.w[i + 1] - series.w[i]) / (1.0 + series.w[i]));
    }
    worst.max(0.0)
}

/// Integrated second-derivative identity for the anchored distance:
/// `h'(t) - h'(t0) = int (|v|^2 + <grad Phi, x* - x> - gamma h') ds`.
pub fn anchored_identity_residual(series: &DiagnosticSeries) -> Result<f64> {
    require_anchor(series)?;
    let hp0 = series.h_prime[0];
    let mut worst = 0.0_f64;
    for i in 0..series.len() {
        let lhs = series.h_prime[i] - hp0;
        let rhs = series.int_anchored_rhs[i];
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs())));
    }
    Ok(worst)
}

/// Integrated identity `t^2 W(t) - t0^2 W(t0) = int (2 s W - s^2 gamma |v|^2) ds`.
pub fn scaled_energy_identity_residual(series: &DiagnosticSeries) -> f64 {
    let base = series.t2w[0];
    let mut worst = 0.0_f64;
    for i in 0..series.len() {
        let lhs = series.t2w[i] - base;
        let rhs = 2.0 * series.int_sw[i] - series.int_s2_gamma_speed2[i];
        worst = worst.max((lhs - rhs).abs() / (1.0 + base + lhs.abs().max(rhs.abs())));
    }
    worst
}

// ---- inequalities -------------------------------------------------------------

/// Certified constants entering the combined inequality. `c0` is the
/// reported constant `(3/2K) t0^2 W(t0) + t0 h'(t0) - h(t0)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProofConstants {
    pub k: f64,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    pub c0: f64,
}

impl ProofConstants {
    /// `epsilon` defaults to `(k - 3)/6`, keeping both `a` and `b` strictly
    /// positive with margin. Requires `k > 3`.
    pub fn new(k: f64, epsilon: Option<f64>, series: &DiagnosticSeries) -> Result<Self> {
        require_anchor(series)?;
        if !(k > 3.0) {
            return Err(Error::UnsupportedQuery(format!(
                "proof constants need k > 3, got {k}"
            )));
        }
        let epsilon = epsilon.unwrap_or((k - 3.0) / 6.0);
        if !(epsilon > 0.0) || epsilon >= (k - 3.0) / 3.0 {
            return Err(Error::RejectedInput(format!(
                "epsilon must lie in (0, (k-3)/3), got {epsilon}"
            )));
        }
        let a = 1.0 - 3.0 / k;
        let b = 3.0 / (2.0 * k) - 1.0 / (k - 1.0 - epsilon);
        let t0 = series.t0();
        let c0 = 3.0 / (2.0 * k) * series.t2w[0] + t0 * series.h_prime[0] - series.h[0];
        Ok(Self {
            k,
            epsilon,
            a,
            b,
            c0,
        })
    }
}

/// Pointwise margin of `W <= 3/2 |v|^2 - h'' - gamma h'`, with `h''`
/// substituted analytically from the equation of motion. Returns the raw
/// minimum margin and the minimum of `margin / (1 + W)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBoundMargin {
    pub min_margin: f64,
    pub min_margin_normalized: f64,
}

pub fn energy_bound_margin(
    traj: &Trajectory,
    p: &PotentialSpec,
    d: &DampingSpec,
    series: &DiagnosticSeries,
) -> Result<EnergyBoundMargin> {
    require_anchor(series)?;
    let anchor = series.anchor.as_ref().unwrap();
    let mut min_margin = f64::INFINITY;
    let mut min_norm = f64::INFINITY;
    for (i, s) in traj.samples.iter().enumerate() {
        let gamma = d.gamma(s.t)?;
        let g = p.gradient(&s.x)?;
        let diff = &s.x - anchor;
        // h'' = |v|^2 + <x'', x - x*> with x'' = -gamma v - grad Phi(x)
        let hpp = series.speed2[i] + (-&s.v * gamma - &g).dot(&diff);
        let margin = 1.5 * series.speed2[i] - hpp - gamma * series.h_prime[i] - series.w[i];
        min_margin = min_margin.min(margin);
        min_norm = min_norm.min(margin / (1.0 + series.w[i]));
    }
    Ok(EnergyBoundMargin {
        min_margin,
        min_margin_normalized: min_norm,
    })
}

/// Minimum margin of the combined inequality
/// `A int sW + B t^2 W + eps h <= C + int [(s gamma)']_+ h` over the samples.
///
/// The right-hand constant is `c0 + t0 gamma(t0) h(t0)`: integrating
/// `-s gamma(s) h'(s)` by parts leaves the boundary term
/// `t0 gamma(t0) h(t0)` behind, which the reported `c0` does not include.
/// Without it the inequality is violated from `t0` on whenever `h(t0) > 0`.
pub fn lyapunov_margin(
    series: &DiagnosticSeries,
    c: &ProofConstants,
    d: &DampingSpec,
) -> Result<f64> {
    require_anchor(series)?;
    let t0 = series.t0();
    let rhs_const = c.c0 + t0 * d.gamma(t0)? * series.h[0];
    let mut min_margin = f64::INFINITY;
    for i in 0..series.len() {
        let lhs = c.a * series.int_sw[i] + c.b * series.t2w[i] + c.epsilon * series.h[i];
        let rhs = rhs_const + series.int_eqh[i];
        min_margin = min_margin.min(rhs - lhs);
    }
    Ok(min_margin)
}

/// `sup h` against the Gronwall bound `(C0/eps) exp(int [(s gamma)']_+ / eps)`.
/// The printed bound is vacuous for `C0 < 0`; the verdict is then
/// "inapplicable" and both numbers are still reported.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GronwallOutcome {
    pub sup_h: f64,
    pub bound: f64,
    pub applicable: bool,
    pub pass: bool,
}

pub fn gronwall_bound_check(
    series: &DiagnosticSeries,
    c: &ProofConstants,
    eq_integral: f64,
) -> Result<GronwallOutcome> {
    require_anchor(series)?;
    let sup_h = series.h.iter().copied().fold(0.0, f64::max);
    let bound = c.c0 / c.epsilon * (eq_integral / c.epsilon).exp();
    if c.c0 < 0.0 {
        return Ok(GronwallOutcome {
            sup_h,
            bound,
            applicable: false,
            pass: false,
        });
    }
    Ok(GronwallOutcome {
        sup_h,
        bound,
        applicable: true,
        pass: sup_h <= bound * (1.0 + BOUND_TOL),
    })
}

/// Positive-part tail bound
/// `int [h']_+ <= t0 |h'(t0)|/(K-1) + (1/(K-1)) int tau |v|^2 dtau`,
/// evaluated over the integrated span.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FubiniOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn fubini_tail_check(series: &DiagnosticSeries, c: &ProofConstants) -> Result<FubiniOutcome> {
    require_anchor(series)?;
    let t0 = series.t0();
    let lhs = *series.int_hp_pos.last().unwrap();
    let rhs = (t0 * series.h_prime[0].abs() + series.int_s_speed2.last().unwrap()) / (c.k - 1.0);
    Ok(FubiniOutcome {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + BOUND_TOL),
    })
}

// ---- trend indicators ----------------------------------------------------------

/// Desk-scale indicators for `t^2 W(t) -> 0`: the log-log slope of `W` over
/// the trailing window, the ratio `t^2W(T) / t^2W(T/10)`, the tail share of
/// `int sW`, and the end value `t^2 W(T)` as the limit estimate.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// `None` when `W` vanishes identically over the window.
    pub slope: Option<f64>,
    pub t2w_end: f64,
    pub t2w_ratio: f64,
    pub sw_tail_ratio: f64,
    pub m_estimate: f64,
}

pub fn decay_report(series: &DiagnosticSeries, window: f64) -> Result<DecayReport> {
    let t0 = series.t0();
    let t_end = series.t_end();
    let decades = (t_end / t0).log10();
    if decades < 2.0 - 1e-9 {
        return Err(Error::RejectedInput(format!(
            "decay report needs >= 2 decades of samples, got {decades:.2}"
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::RejectedInput(format!(
            "window must be a fraction in (0, 1], got {window}"
        )));
    }
    let t_lo = t0 * (t_end / t0).powf(1.0 - window);
    let in_window: Vec<usize> = (0..series.len())
        .filter(|&i| series.t[i] >= t_lo * (1.0 - 1e-12))
        .collect();
    if in_window.len() < 2 {
        return Err(Error::RejectedInput(
            "window too short: fewer than 2 samples".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|&&i| series.w[i] > 0.0)
        .map(|&i| (series.t[i].log10(), series.w[i].log10()))
        .collect();
    let slope = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    });

    let t2w_end = *series.t2w.last().unwrap();
    let i_tenth = series.nearest_index(t_end / 10.0);
    let t2w_ratio = ratio_or_zero(t2w_end, series.t2w[i_tenth]);
    let i_half = series.nearest_index(t_end / 2.0);
    let total = *series.int_sw.last().unwrap();
    let head = series.int_sw[i_half];
    let sw_tail_ratio = ratio_or_zero(total - head, head);
    Ok(DecayReport {
        slope,
        t2w_end,
        t2w_ratio,
        sw_tail_ratio,
        m_estimate: t2w_end,
    })
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Convergence evidence in the sense of Opial's lemma, finite-dimensional
/// reading: anchored distances settle (condition ii) and the end state
/// minimizes up to tolerance (condition i surrogate).
#[derive(Debug, Clone, Serialize)]
pub struct OpialOutcome {
    pub limit_candidate: Vec<f64>,
    pub per_anchor_oscillation: Vec<f64>,
    pub phi_gap: f64,
    pub displacement: f64,
    /// Distance from the limit candidate to the known argmin set, when one is
    /// described.
    pub distance_to_argmin: Option<f64>,
    pub pass: bool,
}

pub fn opial_convergence_check(
    traj: &Trajectory,
    p: &PotentialSpec,
    anchored: &[DiagnosticSeries],
    window: f64,
) -> Result<OpialOutcome> {
    let required = if p.argmin_affine().is_some() { 2 } else { 1 };
    let with_anchor = anchored.iter().filter(|s| s.anchor.is_some()).count();
    if with_anchor < required {
        return Err(Error::RejectedInput(format!(
            "convergence check needs >= {required} anchors, got {with_anchor}"
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::RejectedInput(format!(
            "window must be a fraction in (0, 1], got {window}"
        )));
    }

    let mut pass = true;
    let mut oscillations = Vec::new();
    for series in anchored.iter().filter(|s| s.anchor.is_some()) {
        let t0 = series.t0();
        let t_end = series.t_end();
        let t_lo = t0 * (t_end / t0).powf(1.0 - window);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..series.len() {
            if series.t[i] >= t_lo * (1.0 - 1e-12) {
                let dist = (2.0 * series.h[i]).sqrt();
                lo = lo.min(dist);
                hi = hi.max(dist);
            }
        }
        let osc = hi - lo;
        let tol = OPIAL_OSCILLATION_TOL * (1.0 + series.anchor.as_ref().unwrap().norm());
        pass &= osc <= tol;
        oscillations.push(osc);
    }

    let last = traj.samples.last().unwrap();
    let half = traj.sample_nearest(last.t / 2.0);
    let phi_gap = p.value(&last.x)? - p.min_value();
    let displacement = (&last.x - &half.x).norm();
    pass &= phi_gap <= OPIAL_PHI_GAP_TOL;
    pass &= displacement <= OPIAL_DISPLACEMENT_TOL;
    let distance = p.distance_to_argmin(&last.x).ok();

    Ok(OpialOutcome {
        limit_candidate: last.x.iter().copied().collect(),
        per_anchor_oscillation: oscillations,
        phi_gap,
        displacement,
        distance_to_argmin: distance,
        pass,
    })
}

fn require_anchor(series: &DiagnosticSeries) -> Result<()> {
    if series.anchor.is_none() {
        return Err(Error::UnsupportedQuery(
            "this check needs an anchored series".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, Schedule};
    use crate::Matrix;

    fn over_t(k: f64) -> DampingSpec {
        DampingSpec::over_t(k, 1.0).unwrap()
    }

    fn run(
        p: &PotentialSpec,
        d: &DampingSpec,
        x0: &[f64],
        v0: &[f64],
        t_end: f64,
        rel: f64,
        abs: f64,
    ) -> Trajectory {
        integrate(
            p,
            d,
            &Vector::from_row_slice(x0),
            &Vector::from_row_slice(v0),
            1.0,
            t_end,
            rel,
            abs,
            Schedule::default(),
        )
        .unwrap()
    }

    #[test]
    fn energy_hand_values() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let s = State {
            t: 1.0,
            x: Vector::from_row_slice(&[3.0, 4.0]),
            v: Vector::zeros(2),
        };
        assert_eq!(energy(&s, &p).unwrap(), 12.5);

        let zero = PotentialSpec::zero(2).unwrap();
        let s = State {
            t: 1.0,
            x: Vector::zeros(2),
            v: Vector::from_row_slice(&[1.0, 0.0]),
        };
        assert_eq!(energy(&s, &zero).unwrap(), 0.5);
    }

    #[test]
    fn stationary_series_is_identically_zero() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[0.0, 0.0], &[0.0, 0.0], 100.0, 1e-9, 1e-12);
        let anchor = Vector::zeros(2);
        let s = anchored_series(&traj, &p, &d, &anchor).unwrap();
        assert!(s.w.iter().all(|&w| w == 0.0));
        assert!(s.h.iter().all(|&h| h == 0.0));
        assert!(s.int_sw.iter().all(|&v| v == 0.0));
        assert!(s.int_hp_pos.iter().all(|&v| v == 0.0));
        assert_eq!(energy_dissipation_residual(&s), 0.0);
        assert_eq!(scaled_energy_identity_residual(&s), 0.0);
        assert_eq!(anchored_identity_residual(&s).unwrap(), 0.0);
    }

    #[test]
    fn anchor_away_from_argmin_is_rejected() {
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[0.0], 10.0, 1e-9, 1e-12);
        let bad = Vector::from_row_slice(&[0.5]);
        assert!(anchored_series(&traj, &p, &d, &bad).is_err());
    }

    #[test]
    fn free_flow_series_matches_closed_forms() {
        // x(t) = 1 + (1 - t^-3)/3, v = t^-4, anchor 0:
        // h = x^2/2, h' = t^-4 x, W = t^-8/2.
        let p = PotentialSpec::zero(1).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[1.0], 1e3, 1e-11, 1e-30);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        for i in (0..s.len()).step_by(50) {
            let t: f64 = s.t[i];
            let x = 1.0 + (1.0 - t.powi(-3)) / 3.0;
            assert!((s.h[i] - 0.5 * x * x).abs() < 1e-8, "h at {t}");
            assert!((s.h_prime[i] - t.powi(-4) * x).abs() < 1e-10, "h' at {t}");
            assert!(
                (s.w[i] - 0.5 * t.powi(-8)).abs() < 1e-10 * (1.0 + s.w[i]),
                "W at {t}"
            );
        }
        assert!(energy_dissipation_residual(&s) <= 1e-9);
        assert!(anchored_identity_residual(&s).unwrap() <= 1e-8);
        assert!(scaled_energy_identity_residual(&s) <= 1e-8);
    }

    #[test]
    fn free_flow_fubini_sides_agree_with_hand_integrals() {
        // lhs = h(T) - h(1) -> 7/18, rhs -> 1/3 + 1/18, equal in the limit
        // and ordered lhs <= rhs at any finite horizon.
        let p = PotentialSpec::zero(1).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[1.0], 1e3, 1e-11, 1e-30);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let c = ProofConstants::new(4.0, None, &s).unwrap();
        let f = fubini_tail_check(&s, &c).unwrap();
        assert!((f.lhs - 7.0 / 18.0).abs() < 1e-4, "lhs {}", f.lhs);
        assert!((f.rhs - 7.0 / 18.0).abs() < 1e-4, "rhs {}", f.rhs);
        assert!(f.pass, "lhs {} rhs {}", f.lhs, f.rhs);
    }

    #[test]
    fn energy_bound_margin_equals_convexity_gap_on_quadratic() {
        // For Phi = x^2/2 anchored at 0 the margin reduces to x^2/2.
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[0.0], 100.0, 1e-10, 1e-30);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let m = energy_bound_margin(&traj, &p, &d, &s).unwrap();
        assert!(m.min_margin >= -1e-10, "min margin {}", m.min_margin);
        // pointwise identification on a few samples
        for (i, st) in traj.samples.iter().enumerate().step_by(100) {
            let gamma = d.gamma(st.t).unwrap();
            let g = p.gradient(&st.x).unwrap();
            let hpp = s.speed2[i] + (-&st.v * gamma - &g).dot(&st.x);
            let margin = 1.5 * s.speed2[i] - hpp - gamma * s.h_prime[i] - s.w[i];
            let expected = 0.5 * st.x[0] * st.x[0];
            assert!(
                (margin - expected).abs() <= 1e-9 * (1.0 + expected),
                "margin {margin} vs x^2/2 = {expected}"
            );
        }
    }

    #[test]
    fn proof_constants_match_hand_computation() {
        // K = 4, eps = 1/6: A = 1/4, B = 3/8 - 6/17.
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[0.0], 100.0, 1e-9, 1e-12);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let c = ProofConstants::new(4.0, None, &s).unwrap();
        assert!((c.epsilon - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.a - 0.25).abs() < 1e-15);
        assert!((c.b - (3.0 / 8.0 - 6.0 / 17.0)).abs() < 1e-15);
        assert!((c.b - 0.02205882352941177).abs() < 1e-15);
        // W(1) = 1/2, h(1) = 1/2, h'(1) = 0 -> c0 = 3/16 - 1/2
        assert!((c.c0 - (-0.3125)).abs() < 1e-12, "c0 {}", c.c0);
    }

    #[test]
    fn lyapunov_margin_stays_nonnegative_with_boundary_term() {
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[0.0], 1e3, 1e-10, 1e-30);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let c = ProofConstants::new(4.0, None, &s).unwrap();
        let margin = lyapunov_margin(&s, &c, &d).unwrap();
        assert!(
            margin >= -LYAPUNOV_TOL * (1.0 + c.c0.abs()),
            "combined-inequality margin {margin}"
        );
    }

    #[test]
    fn gronwall_examples() {
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);

        // x0 = 1, v0 = 0: c0 = -0.3125 < 0 -> inapplicable, sup h reported.
        let traj = run(&p, &d, &[1.0], &[0.0], 100.0, 1e-9, 1e-12);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let c = ProofConstants::new(4.0, None, &s).unwrap();
        let g = gronwall_bound_check(&s, &c, 0.0).unwrap();
        assert!(!g.applicable);
        assert!(g.sup_h.is_finite() && g.sup_h > 0.0);

        // x0 = 1, v0 = 2: W(1) = 2.5, h'(1) = 2 -> c0 = 2.4375, bound 14.625.
        let traj = run(&p, &d, &[1.0], &[2.0], 100.0, 1e-9, 1e-12);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let c = ProofConstants::new(4.0, None, &s).unwrap();
        assert!((c.c0 - 2.4375).abs() < 1e-12, "c0 {}", c.c0);
        let g = gronwall_bound_check(&s, &c, 0.0).unwrap();
        assert!(g.applicable);
        assert!((g.bound - 14.625).abs() < 1e-10, "bound {}", g.bound);
        assert!(g.pass, "sup h {} vs bound {}", g.sup_h, g.bound);
    }

    #[test]
    fn decay_report_reads_the_free_flow_rate() {
        let p = PotentialSpec::zero(1).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[1.0], 1e3, 1e-11, 1e-30);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(1)).unwrap();
        let r = decay_report(&s, 0.25).unwrap();
        let slope = r.slope.unwrap();
        assert!((slope + 8.0).abs() <= 0.01, "slope {slope}");
        assert!(r.t2w_ratio < 0.9);
    }

    #[test]
    fn decay_report_on_stationary_data_has_no_slope() {
        let p = PotentialSpec::quadratic(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[0.0, 0.0], &[0.0, 0.0], 100.0, 1e-9, 1e-12);
        let s = energy_series(&traj, &p, &d).unwrap();
        let r = decay_report(&s, 0.25).unwrap();
        assert!(r.slope.is_none());
        assert_eq!(r.t2w_end, 0.0);
        assert_eq!(r.t2w_ratio, 0.0);
        assert_eq!(r.sw_tail_ratio, 0.0);
    }

    #[test]
    fn decay_report_rejects_short_spans() {
        let p = PotentialSpec::quadratic(Matrix::identity(1, 1), Vector::zeros(1)).unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0], &[0.0], 10.0, 1e-9, 1e-12);
        let s = energy_series(&traj, &p, &d).unwrap();
        assert!(decay_report(&s, 0.25).is_err());
    }

    #[test]
    fn opial_check_requires_enough_anchors() {
        let p = PotentialSpec::quadratic(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Vector::zeros(2),
        )
        .unwrap();
        let d = over_t(4.0);
        let traj = run(&p, &d, &[1.0, 1.0], &[0.0, 0.0], 100.0, 1e-9, 1e-12);
        let s = anchored_series(&traj, &p, &d, &Vector::zeros(2)).unwrap();
        // affine argmin -> needs at least two anchors
        assert!(opial_convergence_check(&traj, &p, &[s], 0.25).is_err());
    }
}
