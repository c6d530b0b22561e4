//! Scenario execution: certify, integrate, build series per anchor, evaluate
//! every check, persist artifacts.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::damping::DampingSpec;
use crate::diagnostics::{
    anchored_identity_residual, anchored_series, decay_report, energy_bound_margin,
    energy_dissipation_residual, energy_monotonicity_violation, energy_series, fubini_tail_check,
    gronwall_bound_check, lyapunov_margin, opial_convergence_check,
    scaled_energy_identity_residual, DiagnosticSeries, ProofConstants, BOUND_TOL, ENERGY_BOUND_TOL,
    IDENTITY_TOL, KERNEL_TOL, LYAPUNOV_TOL, MONOTONE_TOL,
};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::report::{persist, CheckResult, RunReport, RunStats, Verdict};
use crate::integrator::{integrate, reference_integrate, Schedule, Trajectory};
use crate::potential::PotentialSpec;

const CHECK_NAMES: [&str; 10] = [
    "energy_monotone",
    "energy_dissipation",
    "anchored_identity",
    "scaled_energy_identity",
    "energy_bound",
    "lyapunov_inequality",
    "gronwall_bound",
    "fubini_tail",
    "tail_kernel",
    "opial_convergence",
];

fn reference_of(name: &str) -> &'static str {
    match name {
        "energy_monotone" => "W' = -gamma |x'|^2 <= 0",
        "energy_dissipation" => "W(t) - W(s) = -int_s^t gamma |x'|^2",
        "anchored_identity" => "h'' + gamma h' = |x'|^2 + <grad Phi(x), x* - x>",
        "scaled_energy_identity" => "(t^2 W)' = 2 t W - t^2 gamma |x'|^2",
        "energy_bound" => "W <= 3/2 |x'|^2 - h'' - gamma h'",
        "lyapunov_inequality" => "A int sW + B t^2 W + eps h <= C + int [(s gamma)']_+ h",
        "gronwall_bound" => "sup h <= (C0/eps) exp(int [(s gamma)']_+ / eps)",
        "fubini_tail" => "int [h']_+ <= t0|h'(t0)|/(K-1) + int tau |x'|^2 / (K-1)",
        "tail_kernel" => "int_s^inf e^{-Gamma(t,s)} dt <= s/(K-1)",
        "opial_convergence" => "anchored distances settle and the limit minimizes Phi",
        _ => "",
    }
}

/// Everything a scenario run produces, artifacts aside.
#[derive(Debug)]
pub struct RunOutcome {
    pub cfg: ScenarioConfig,
    pub report: RunReport,
    pub trajectory: Option<Trajectory>,
    /// One anchored series per anchor; a single anchor-free series when the
    /// potential exposes no argmin description.
    pub series: Vec<DiagnosticSeries>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleComparison {
    pub sup_error: f64,
    pub at_t: f64,
    pub horizon: f64,
}

/// Runs a scenario end to end; with `out_dir` set, persists
/// `trajectory.csv`, `diagnostics.ndjson`, and `report.json` under
/// `out_dir/<id>/`. Deterministic given the config.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    run_scenario_with_banner(cfg, out_dir, None)
}

pub(crate) fn run_scenario_with_banner(
    cfg: &ScenarioConfig,
    out_dir: Option<&Path>,
    banner: Option<String>,
) -> Result<RunOutcome> {
    cfg.validate()?;
    let p = cfg.potential.build()?;
    let d = cfg.damping.build(cfg.t0)?;
    if cfg.x0.len() != p.dim() {
        return Err(Error::Config(format!(
            "x0 has {} entries but the potential lives in dimension {}",
            cfg.x0.len(),
            p.dim()
        )));
    }
    let cert = d.certify()?;
    let banner = banner.or_else(|| {
        (!cert.is_admissible()).then(|| "exploratory: damping hypotheses not certified".to_string())
    });

    let clock = Instant::now();
    let x0 = crate::Vector::from_row_slice(&cfg.x0);
    let v0 = crate::Vector::from_row_slice(&cfg.v0);
    let schedule = Schedule {
        points_per_decade: cfg.points_per_decade,
    };
    let mut traj = match integrate(
        &p,
        &d,
        &x0,
        &v0,
        cfg.t0,
        cfg.t_end,
        cfg.rel_tol,
        cfg.abs_tol,
        schedule,
    ) {
        Ok(t) => t,
        Err(Error::Integration { t, kind }) => {
            // Report with nothing evaluated; callers map this to exit code 3.
            let checks = CHECK_NAMES
                .iter()
                .map(|n| CheckResult::new(n, None, None, Verdict::NotEvaluated, reference_of(n)))
                .collect();
            let report = RunReport {
                scenario_id: cfg.id.clone(),
                banner,
                failure: Some(format!("{kind} at t = {t}")),
                certificate: cert,
                constants: None,
                anchors: Vec::new(),
                checks,
                decay: None,
                opial: None,
                gronwall: None,
                fubini: None,
                kernel: None,
                stats: RunStats::from_steps(Default::default(), clock.elapsed().as_millis()),
            };
            if let Some(dir) = out_dir {
                persist(dir, &report, None, None)?;
            }
            return Ok(RunOutcome {
                cfg: cfg.clone(),
                report,
                trajectory: None,
                series: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };

    let anchors = cfg.anchors.resolve(&p)?;
    let mut series: Vec<DiagnosticSeries> = Vec::new();
    for a in &anchors {
        series.push(anchored_series(&traj, &p, &d, a)?);
    }
    if series.is_empty() {
        series.push(energy_series(&traj, &p, &d)?);
    }
    // Quadrature is done with the interpolant; the remaining checks only read
    // samples. Dropping the dense storage keeps long runs lightweight.
    traj.discard_dense_output();
    let primary = &series[0];
    let anchored: Vec<&DiagnosticSeries> = series.iter().filter(|s| s.anchor.is_some()).collect();

    let mut checks: Vec<CheckResult> = Vec::new();
    let skipped_no_anchor = || Verdict::Skipped("no argmin description for an anchor".to_string());
    let skipped_uncertified = || Verdict::Skipped("hypothesis unmet".to_string());

    // energy_monotone
    let mono = energy_monotonicity_violation(primary);
    checks.push(CheckResult::new(
        "energy_monotone",
        Some(mono),
        Some(MONOTONE_TOL),
        if mono <= MONOTONE_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        reference_of("energy_monotone"),
    ));

    // energy_dissipation
    let diss = energy_dissipation_residual(primary);
    checks.push(CheckResult::new(
        "energy_dissipation",
        Some(diss),
        Some(IDENTITY_TOL),
        if diss <= IDENTITY_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        reference_of("energy_dissipation"),
    ));

    // anchored_identity (worst anchor)
    if anchored.is_empty() {
        checks.push(CheckResult::new(
            "anchored_identity",
            None,
            Some(IDENTITY_TOL),
            skipped_no_anchor(),
            reference_of("anchored_identity"),
        ));
    } else {
        let mut worst = 0.0_f64;
        for s in &anchored {
            worst = worst.max(anchored_identity_residual(s)?);
        }
        checks.push(CheckResult::new(
            "anchored_identity",
            Some(worst),
            Some(IDENTITY_TOL),
            if worst <= IDENTITY_TOL {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            reference_of("anchored_identity"),
        ));
    }

    // scaled_energy_identity
    let eq6 = scaled_energy_identity_residual(primary);
    checks.push(CheckResult::new(
        "scaled_energy_identity",
        Some(eq6),
        Some(IDENTITY_TOL),
        if eq6 <= IDENTITY_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        reference_of("scaled_energy_identity"),
    ));

    // energy_bound (worst anchor, normalized margin)
    if anchored.is_empty() {
        checks.push(CheckResult::new(
            "energy_bound",
            None,
            Some(-ENERGY_BOUND_TOL),
            skipped_no_anchor(),
            reference_of("energy_bound"),
        ));
    } else {
        let mut worst = f64::INFINITY;
        for s in &anchored {
            worst = worst.min(energy_bound_margin(&traj, &p, &d, s)?.min_margin_normalized);
        }
        checks.push(CheckResult::new(
            "energy_bound",
            Some(worst),
            Some(-ENERGY_BOUND_TOL),
            if worst >= -ENERGY_BOUND_TOL {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            reference_of("energy_bound"),
        ));
    }

    // Certified constants: per anchor; the report carries the primary one.
    let mut constants: Option<ProofConstants> = None;
    if cert.k_condition {
        if let Some(s) = anchored.first() {
            constants = Some(ProofConstants::new(cert.k_inf, cfg.epsilon, s)?);
        }
    }

    // lyapunov_inequality (worst anchor, margin over 1 + |C0|)
    if !cert.k_condition {
        checks.push(CheckResult::new(
            "lyapunov_inequality",
            None,
            Some(-LYAPUNOV_TOL),
            skipped_uncertified(),
            reference_of("lyapunov_inequality"),
        ));
    } else if anchored.is_empty() {
        checks.push(CheckResult::new(
            "lyapunov_inequality",
            None,
            Some(-LYAPUNOV_TOL),
            skipped_no_anchor(),
            reference_of("lyapunov_inequality"),
        ));
    } else {
        let mut worst = f64::INFINITY;
        for s in &anchored {
            let c = ProofConstants::new(cert.k_inf, cfg.epsilon, s)?;
            let margin = lyapunov_margin(s, &c, &d)?;
            worst = worst.min(margin / (1.0 + c.c0.abs()));
        }
        checks.push(CheckResult::new(
            "lyapunov_inequality",
            Some(worst),
            Some(-LYAPUNOV_TOL),
            if worst >= -LYAPUNOV_TOL {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            reference_of("lyapunov_inequality"),
        ));
    }

    // gronwall_bound (primary anchor)
    let mut gronwall = None;
    if !cert.is_admissible() {
        checks.push(CheckResult::new(
            "gronwall_bound",
            None,
            None,
            skipped_uncertified(),
            reference_of("gronwall_bound"),
        ));
    } else if let (Some(c), Some(s)) = (&constants, anchored.first()) {
        let g = gronwall_bound_check(s, c, cert.positive_part_integral)?;
        let verdict = if !g.applicable {
            Verdict::Inapplicable("C0 <= 0".into())
        } else if g.pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        checks.push(CheckResult::new(
            "gronwall_bound",
            Some(g.sup_h),
            Some(g.bound),
            verdict,
            reference_of("gronwall_bound"),
        ));
        gronwall = Some(g);
    } else {
        checks.push(CheckResult::new(
            "gronwall_bound",
            None,
            None,
            skipped_no_anchor(),
            reference_of("gronwall_bound"),
        ));
    }

    // fubini_tail (worst anchor)
    let mut fubini = None;
    if !cert.k_condition {
        checks.push(CheckResult::new(
            "fubini_tail",
            None,
            Some(BOUND_TOL),
            skipped_uncertified(),
            reference_of("fubini_tail"),
        ));
    } else if anchored.is_empty() {
        checks.push(CheckResult::new(
            "fubini_tail",
            None,
            Some(BOUND_TOL),
            skipped_no_anchor(),
            reference_of("fubini_tail"),
        ));
    } else {
        let mut worst = f64::NEG_INFINITY;
        let mut all_pass = true;
        let mut primary_outcome = None;
        for s in &anchored {
            let c = ProofConstants::new(cert.k_inf, cfg.epsilon, s)?;
            let f = fubini_tail_check(s, &c)?;
            let excess = if f.rhs == 0.0 {
                if f.lhs == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                f.lhs / f.rhs - 1.0
            };
            worst = worst.max(excess);
            all_pass &= f.pass;
            if primary_outcome.is_none() {
                primary_outcome = Some(f);
            }
        }
        checks.push(CheckResult::new(
            "fubini_tail",
            Some(worst),
            Some(BOUND_TOL),
            if all_pass {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            reference_of("fubini_tail"),
        ));
        fubini = primary_outcome;
    }

    // tail_kernel at s = t0
    let mut kernel = None;
    if cert.k_inf > 1.0 {
        let kb = d.tail_kernel_check(cfg.t0, cert.k_inf)?;
        let excess = kb.numeric / kb.bound - 1.0;
        checks.push(CheckResult::new(
            "tail_kernel",
            Some(excess),
            Some(KERNEL_TOL),
            if excess <= KERNEL_TOL {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            reference_of("tail_kernel"),
        ));
        kernel = Some(kb);
    } else {
        checks.push(CheckResult::new(
            "tail_kernel",
            None,
            Some(KERNEL_TOL),
            Verdict::Skipped("k_inf <= 1, bound meaningless".into()),
            reference_of("tail_kernel"),
        ));
    }

    // opial_convergence
    let required_anchors = if p.argmin_affine().is_some() { 2 } else { 1 };
    let opial = if anchored.len() >= required_anchors {
        let o = opial_convergence_check(&traj, &p, &series, cfg.opial_window)?;
        checks.push(CheckResult::new(
            "opial_convergence",
            Some(o.per_anchor_oscillation.iter().copied().fold(0.0, f64::max)),
            Some(crate::diagnostics::OPIAL_OSCILLATION_TOL),
            if o.pass { Verdict::Pass } else { Verdict::Fail },
            reference_of("opial_convergence"),
        ));
        Some(o)
    } else {
        checks.push(CheckResult::new(
            "opial_convergence",
            None,
            None,
            skipped_no_anchor(),
            reference_of("opial_convergence"),
        ));
        None
    };

    // decay indicators (informational; acceptance thresholds live with the
    // acceptance suite)
    let decay = decay_report(primary, cfg.decay_window).ok();

    let report = RunReport {
        scenario_id: cfg.id.clone(),
        banner,
        failure: None,
        certificate: cert,
        constants,
        anchors: anchors
            .iter()
            .map(|a| a.iter().copied().collect())
            .collect(),
        checks,
        decay,
        opial,
        gronwall,
        fubini,
        kernel,
        stats: RunStats::from_steps(traj.stats, clock.elapsed().as_millis()),
    };

    if let Some(dir) = out_dir {
        persist(dir, &report, Some(&traj), Some(primary))?;
    }
    Ok(RunOutcome {
        cfg: cfg.clone(),
        report,
        trajectory: Some(traj),
        series,
    })
}

/// Runs the scenario with `K = 3` exactly. Everything is evaluated, but the
/// report carries an exploratory banner and the combined inequality is
/// skipped (its hypothesis needs `K_inf > 3`).
pub fn explore_limit_case(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let mut limit = cfg.clone();
    limit.damping = cfg.damping.with_k(3.0)?;
    limit.id = format!("{}-limit-k3", cfg.id);
    run_scenario_with_banner(
        &limit,
        out_dir,
        Some("exploratory: K = 3 limit case, outside certified hypotheses".into()),
    )
}

/// Sup-norm discrepancy between the adaptive trajectory and the fixed-step
/// RK4 reference at shared sample times, on `[t0, min(T, 100)]`.
pub fn compare_oracle(cfg: &ScenarioConfig, h: f64) -> Result<OracleComparison> {
    cfg.validate()?;
    let p = cfg.potential.build()?;
    let d = cfg.damping.build(cfg.t0)?;
    let horizon = cfg.t_end.min(100.0);
    if horizon <= cfg.t0 {
        return Err(Error::RejectedInput(format!(
            "oracle horizon min(T, 100) = {horizon} does not exceed t0 = {}",
            cfg.t0
        )));
    }
    let x0 = crate::Vector::from_row_slice(&cfg.x0);
    let v0 = crate::Vector::from_row_slice(&cfg.v0);
    let schedule = Schedule {
        points_per_decade: cfg.points_per_decade,
    };
    let adaptive = integrate(
        &p,
        &d,
        &x0,
        &v0,
        cfg.t0,
        horizon,
        cfg.rel_tol,
        cfg.abs_tol,
        schedule,
    )?;
    let reference = reference_integrate(&p, &d, &x0, &v0, cfg.t0, horizon, h, schedule)?;
    debug_assert_eq!(adaptive.samples.len(), reference.samples.len());
    let mut sup = 0.0_f64;
    let mut at_t = cfg.t0;
    for (a, r) in adaptive.samples.iter().zip(&reference.samples) {
        let dx = (&a.x - &r.x).amax();
        let dv = (&a.v - &r.v).amax();
        let e = dx.max(dv);
        if e > sup {
            sup = e;
            at_t = a.t;
        }
    }
    Ok(OracleComparison {
        sup_error: sup,
        at_t,
        horizon,
    })
}

/// Deterministic helper used by tests and the acceptance suite: run a
/// scenario by value, without artifacts.
pub fn run_in_memory(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    run_scenario(cfg, None)
}

/// The potential/damping pair a config describes.
pub fn build_specs(cfg: &ScenarioConfig) -> Result<(PotentialSpec, DampingSpec)> {
    Ok((cfg.potential.build()?, cfg.damping.build(cfg.t0)?))
}
