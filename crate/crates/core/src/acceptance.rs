//! Bundled acceptance suite: ten criteria over the in-repo scenarios, shared
//! by the `acceptance` integration tests and the `selftest` CLI subcommand.
//!
//! Scenario runs are cached so the criteria can share them; everything is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;

use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::damping::DampingSpec;
use crate::harness::runner::{compare_oracle, run_in_memory, OracleComparison, RunOutcome};
use crate::harness::scenarios::all_bundled;
use crate::harness::{diagnostics_ndjson, load_bundled, trajectory_csv};
use crate::integrator::{reference_integrate, Schedule};
use crate::potential::{catalog, sample_points};
use crate::Vector;

pub struct CriterionOutcome {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:2} [{}] {}: {}",
            self.index,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

/// One entry per bundled scenario, computed once (in parallel) on first use.
static RUNS: Lazy<BTreeMap<String, Result<RunOutcome, String>>> = Lazy::new(|| {
    let configs = all_bundled().expect("bundled scenarios parse");
    configs
        .into_par_iter()
        .map(|cfg| {
            let id = cfg.id.clone();
            let run = run_in_memory(&cfg).map_err(|e| e.to_string());
            (id, run)
        })
        .collect()
});

static ORACLES: Lazy<BTreeMap<String, Result<OracleComparison, String>>> = Lazy::new(|| {
    let configs = all_bundled().expect("bundled scenarios parse");
    configs
        .into_par_iter()
        .map(|cfg| {
            let id = cfg.id.clone();
            let cmp = compare_oracle(&cfg, 1e-5).map_err(|e| e.to_string());
            (id, cmp)
        })
        .collect()
});

fn run(id: &str) -> Result<&'static RunOutcome, String> {
    match RUNS.get(id) {
        Some(Ok(outcome)) => Ok(outcome),
        Some(Err(e)) => Err(format!("{id}: {e}")),
        None => Err(format!("{id}: not a bundled scenario")),
    }
}

struct Gate {
    passed: bool,
    details: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.passed = false;
            self.details.push(format!("FAILED: {what}"));
        } else {
            self.details.push(what);
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.passed = false;
        self.details.push(format!("FAILED: {}", what.into()));
    }

    fn outcome(self, index: usize, name: &'static str) -> CriterionOutcome {
        CriterionOutcome {
            index,
            name,
            passed: self.passed,
            details: self.details.join("; "),
        }
    }
}

/// Criterion 1: stationary initial data stays at the minimizer with zero
/// energy.
pub fn criterion_1_stationary() -> CriterionOutcome {
    let mut g = Gate::new();
    match run("stationary") {
        Ok(o) => {
            let traj = o.trajectory.as_ref().unwrap();
            let max_x = traj.samples.iter().map(|s| s.x.norm()).fold(0.0, f64::max);
            g.check(max_x <= 1e-9, format!("max|x| = {max_x:.3e} <= 1e-9"));
            let max_w = o.series[0].w.iter().map(|w| w.abs()).fold(0.0, f64::max);
            g.check(max_w <= 1e-12, format!("max W = {max_w:.3e} <= 1e-12"));
        }
        Err(e) => g.fail(e),
    }
    g.outcome(1, "stationary invariance")
}

/// Criterion 2: the damping-only run follows its closed form; the energy
/// decay slope reads -8.00 and the positive-part tail bound is tight.
pub fn criterion_2_free_flow() -> CriterionOutcome {
    let mut g = Gate::new();
    match run("free-flow-K4") {
        Ok(o) => {
            let traj = o.trajectory.as_ref().unwrap();
            let closed = |t: f64| 1.0 + (1.0 - t.powi(-3)) / 3.0;
            let sup = traj
                .samples
                .iter()
                .map(|s| (s.x[0] - closed(s.t)).abs())
                .fold(0.0, f64::max);
            g.check(
                sup <= 1e-8,
                format!("sup |x - closed form| = {sup:.3e} <= 1e-8"),
            );
            let x_end = traj.samples.last().unwrap().x[0];
            g.check(
                (x_end - 4.0 / 3.0).abs() <= 1e-6,
                format!("x(T) = {x_end:.9} within 1e-6 of 4/3"),
            );
            match o.report.decay.as_ref().and_then(|d| d.slope) {
                Some(slope) => g.check(
                    (slope + 8.0).abs() <= 0.01,
                    format!("decay slope {slope:.4} = -8.00 +- 0.01"),
                ),
                None => g.fail("decay slope undefined"),
            }
            match o.report.fubini.as_ref() {
                Some(f) => {
                    g.check(
                        (f.lhs - 7.0 / 18.0).abs() <= 1e-3 && (f.rhs - 7.0 / 18.0).abs() <= 1e-3,
                        format!(
                            "tail-bound sides lhs {:.6}, rhs {:.6} near 0.38889",
                            f.lhs, f.rhs
                        ),
                    );
                    g.check(
                        f.lhs <= f.rhs * (1.0 + 1e-6),
                        format!("lhs <= rhs (1 + 1e-6): {:.9} vs {:.9}", f.lhs, f.rhs),
                    );
                }
                None => g.fail("tail bound not evaluated"),
            }
        }
        Err(e) => g.fail(e),
    }
    g.outcome(2, "closed-form free flow")
}

/// Criterion 3: energy is non-increasing and the dissipation identity holds
/// on every bundled scenario.
pub fn criterion_3_dissipation() -> CriterionOutcome {
    let mut g = Gate::new();
    for (id, outcome) in RUNS.iter() {
        match outcome {
            Ok(o) => {
                let mono = o.report.check("energy_monotone").unwrap();
                let diss = o.report.check("energy_dissipation").unwrap();
                g.check(
                    mono.verdict.is_pass() && diss.verdict.is_pass(),
                    format!(
                        "{id}: monotone drift {:.1e}, dissipation residual {:.1e}",
                        mono.value.unwrap_or(f64::NAN),
                        diss.value.unwrap_or(f64::NAN)
                    ),
                );
            }
            Err(e) => g.fail(e.clone()),
        }
    }
    g.outcome(3, "dissipation")
}

/// Criterion 4: both integrated identities hold to 1e-6 on every bundled
/// scenario.
pub fn criterion_4_identities() -> CriterionOutcome {
    let mut g = Gate::new();
    for (id, outcome) in RUNS.iter() {
        match outcome {
            Ok(o) => {
                let anch = o.report.check("anchored_identity").unwrap();
                let scaled = o.report.check("scaled_energy_identity").unwrap();
                g.check(
                    anch.verdict.is_pass() && scaled.verdict.is_pass(),
                    format!(
                        "{id}: anchored {:.1e}, scaled-energy {:.1e}",
                        anch.value.unwrap_or(f64::NAN),
                        scaled.value.unwrap_or(f64::NAN)
                    ),
                );
            }
            Err(e) => g.fail(e.clone()),
        }
    }
    g.outcome(4, "proof-identity suite")
}

/// Criterion 5: inequality suite — pointwise energy bound everywhere, the
/// combined inequality and kernel bound wherever the certificate passes, and
/// exact kernel equality for gamma = K/t.
pub fn criterion_5_inequalities() -> CriterionOutcome {
    let mut g = Gate::new();
    for (id, outcome) in RUNS.iter() {
        let o = match outcome {
            Ok(o) => o,
            Err(e) => {
                g.fail(e.clone());
                continue;
            }
        };
        let eb = o.report.check("energy_bound").unwrap();
        g.check(
            eb.verdict.is_pass(),
            format!(
                "{id}: energy-bound margin {:.1e}",
                eb.value.unwrap_or(f64::NAN)
            ),
        );
        if o.report.certificate.k_condition {
            let ly = o.report.check("lyapunov_inequality").unwrap();
            g.check(
                ly.verdict.is_pass(),
                format!(
                    "{id}: combined-inequality margin {:.1e}",
                    ly.value.unwrap_or(f64::NAN)
                ),
            );
            let kn = o.report.check("tail_kernel").unwrap();
            g.check(
                kn.verdict.is_pass(),
                format!("{id}: kernel excess {:.1e}", kn.value.unwrap_or(f64::NAN)),
            );
        }
    }
    // The shifted family exercises a nonzero positive-part integral term.
    match run("shifted-t0-10") {
        Ok(o) => {
            let eqh_end = *o.series[0].int_eqh.last().unwrap();
            g.check(
                eqh_end > 0.0,
                format!("shifted-t0-10 int_EQh(T) = {eqh_end:.3e} > 0"),
            );
        }
        Err(e) => g.fail(e),
    }
    // Exact equality of the kernel integral for gamma = K/t.
    match run("quadratic-K4") {
        Ok(o) => match o.report.kernel.as_ref() {
            Some(kb) => g.check(
                (kb.numeric - kb.bound).abs() <= 1e-8 * kb.bound,
                format!(
                    "kernel equality for K/t: |{:.9} - {:.9}|",
                    kb.numeric, kb.bound
                ),
            ),
            None => g.fail("kernel bound missing on quadratic-K4"),
        },
        Err(e) => g.fail(e),
    }
    g.outcome(5, "proof-inequality suite")
}

const CONCLUSION_IDS: [&str; 8] = [
    "quadratic-K4",
    "quadratic-K10",
    "degenerate-quadratic-K4",
    "degenerate-quadratic-K10",
    "least-squares-K4",
    "least-squares-K10",
    "logsumexp-K4",
    "logsumexp-K10",
];

/// Criterion 6: decay and convergence indicators on the convex catalog with
/// K in {4, 10}.
pub fn criterion_6_conclusion_indicators() -> CriterionOutcome {
    let mut g = Gate::new();
    for id in CONCLUSION_IDS {
        let o = match run(id) {
            Ok(o) => o,
            Err(e) => {
                g.fail(e);
                continue;
            }
        };
        let decay = match o.report.decay.as_ref() {
            Some(d) => d,
            None => {
                g.fail(format!("{id}: decay report missing"));
                continue;
            }
        };
        match decay.slope {
            Some(s) => g.check(s <= -2.05, format!("{id}: slope {s:.2} <= -2.05")),
            None => g.fail(format!("{id}: slope undefined")),
        }
        g.check(
            decay.t2w_ratio <= 0.9,
            format!("{id}: t2W ratio {:.2e} <= 0.9", decay.t2w_ratio),
        );
        g.check(
            decay.sw_tail_ratio <= 0.2,
            format!("{id}: sW tail ratio {:.2e} <= 0.2", decay.sw_tail_ratio),
        );
        match o.report.opial.as_ref() {
            Some(op) => {
                g.check(
                    op.pass,
                    format!("{id}: convergence check (phi gap {:.1e})", op.phi_gap),
                );
                if id.starts_with("degenerate") {
                    match op.distance_to_argmin {
                        Some(dist) => g.check(
                            dist <= 1e-4,
                            format!("{id}: limit-to-argmin distance {dist:.2e} <= 1e-4"),
                        ),
                        None => g.fail(format!("{id}: argmin distance unavailable")),
                    }
                }
            }
            None => g.fail(format!("{id}: convergence check missing")),
        }
    }
    g.outcome(6, "conclusion indicators")
}

/// Criterion 7: damping certification closed forms and flags.
pub fn criterion_7_certification() -> CriterionOutcome {
    let mut g = Gate::new();
    let c = DampingSpec::over_t(4.0, 1.0).unwrap().certify().unwrap();
    g.check(
        c.k_inf == 4.0 && c.positive_part_integral == 0.0 && c.is_admissible(),
        format!(
            "K/t with K=4: k_inf {}, integral {}",
            c.k_inf, c.positive_part_integral
        ),
    );
    let c = DampingSpec::shifted(5.0, 1.0, 10.0)
        .unwrap()
        .certify()
        .unwrap();
    g.check(
        (c.k_inf - 50.0 / 11.0).abs() <= 1e-9,
        format!("shifted: k_inf {} within 1e-9 of 50/11", c.k_inf),
    );
    g.check(
        (c.positive_part_integral - 5.0 / 11.0).abs() <= 1e-9,
        format!(
            "shifted: integral {} within 1e-9 of 5/11",
            c.positive_part_integral
        ),
    );
    let c = DampingSpec::power_law(2.0, 0.5, 1.0)
        .unwrap()
        .certify()
        .unwrap();
    g.check(
        !c.integrability_condition,
        "power law fails the integrability condition",
    );
    let c = DampingSpec::over_t(2.0, 1.0).unwrap().certify().unwrap();
    g.check(!c.k_condition, "K/t with K=2 fails the K > 3 condition");
    g.outcome(7, "certification")
}

/// Criterion 8: adaptive-vs-RK4 oracle agreement on [t0, 100] for every
/// bundled scenario, plus fourth-order error decay of the reference.
pub fn criterion_8_oracle() -> CriterionOutcome {
    let mut g = Gate::new();
    for (id, cmp) in ORACLES.iter() {
        match cmp {
            Ok(c) => g.check(
                c.sup_error <= 1e-7,
                format!(
                    "{id}: oracle sup error {:.2e} at t = {:.2}",
                    c.sup_error, c.at_t
                ),
            ),
            Err(e) => g.fail(format!("{id}: {e}")),
        }
    }
    // Order measurement against the free-flow closed form on [1, 10].
    let p = crate::potential::PotentialSpec::zero(1).unwrap();
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
            .map(|s| (s.x[0] - (1.0 + (1.0 - s.t.powi(-3)) / 3.0)).abs())
            .fold(0.0, f64::max)
    };
    // Steps where truncation error sits well above the rounding floor.
    let ratio = sup_err(2e-2) / sup_err(1e-2);
    g.check(
        (ratio - 16.0).abs() <= 0.2 * 16.0,
        format!("reference halving ratio {ratio:.2} = 16 +- 20%"),
    );
    g.outcome(8, "oracle agreement")
}

/// Criterion 9: analytic gradients agree with finite differences and
/// first-order convexity holds at seeded random points, for every catalog
/// entry.
pub fn criterion_9_gradient_oracle() -> CriterionOutcome {
    let mut g = Gate::new();
    for (name, p) in catalog() {
        let mut worst_fd = 0.0_f64;
        for x in sample_points(p.dim(), 10, 2.0, 0xfd) {
            worst_fd = worst_fd.max(p.check_gradient_fd(&x, 1e-5).unwrap());
        }
        g.check(
            worst_fd <= 1e-6,
            format!("{name}: fd error {worst_fd:.2e} <= 1e-6"),
        );

        let xs = sample_points(p.dim(), 100, 3.0, 0xc0);
        let ys = sample_points(p.dim(), 100, 3.0, 0xc1);
        let mut ok = true;
        let mut worst_gap = f64::INFINITY;
        for (x, y) in xs.iter().zip(&ys) {
            let gap = p.check_convexity_gap(x, y).unwrap();
            let phi_y = p.value(y).unwrap();
            let floor = -1e-10 * (1.0 + phi_y.abs());
            worst_gap = worst_gap.min(gap);
            ok &= gap >= floor;
        }
        g.check(ok, format!("{name}: min convexity gap {worst_gap:.2e}"));
    }
    g.outcome(9, "gradient oracle")
}

/// Criterion 10: repeated runs yield byte-identical CSV/NDJSON artifacts.
pub fn criterion_10_determinism() -> CriterionOutcome {
    let mut g = Gate::new();
    for id in ["stationary", "quadratic-1d-K4"] {
        let cfg = match load_bundled(id) {
            Some(Ok(cfg)) => cfg,
            _ => {
                g.fail(format!("{id}: missing bundled config"));
                continue;
            }
        };
        let render = || -> Result<(String, String), String> {
            let o = run_in_memory(&cfg).map_err(|e| e.to_string())?;
            let traj = o.trajectory.as_ref().ok_or("no trajectory")?;
            Ok((trajectory_csv(traj), diagnostics_ndjson(&o.series[0])))
        };
        match (render(), render()) {
            (Ok((csv_a, nd_a)), Ok((csv_b, nd_b))) => {
                g.check(
                    csv_a == csv_b && nd_a == nd_b,
                    format!(
                        "{id}: {} CSV bytes, {} NDJSON bytes identical",
                        csv_a.len(),
                        nd_a.len()
                    ),
                );
            }
            (Err(e), _) | (_, Err(e)) => g.fail(format!("{id}: {e}")),
        }
    }
    g.outcome(10, "determinism")
}

/// Every criterion, in order.
pub fn all_criteria() -> Vec<CriterionOutcome> {
    vec![
        criterion_1_stationary(),
        criterion_2_free_flow(),
        criterion_3_dissipation(),
        criterion_4_identities(),
        criterion_5_inequalities(),
        criterion_6_conclusion_indicators(),
        criterion_7_certification(),
        criterion_8_oracle(),
        criterion_9_gradient_oracle(),
        criterion_10_determinism(),
    ]
}

/// Runs the full suite, printing one line per criterion. Returns true when
/// everything passed.
pub fn run_selftest() -> bool {
    let mut all = true;
    for c in all_criteria() {
        println!("{c}");
        all &= c.passed;
    }
    all
}
