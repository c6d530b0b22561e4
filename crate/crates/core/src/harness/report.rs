//! Run reports and persisted artifacts (trajectory CSV, diagnostics NDJSON,
//! report JSON).

use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::damping::{AdmissibilityCertificate, KernelBound};
use crate::diagnostics::{
    DecayReport, DiagnosticSeries, FubiniOutcome, GronwallOutcome, OpialOutcome, ProofConstants,
};
use crate::error::Result;
use crate::integrator::{StepStats, Trajectory};

/// Check verdicts. Skipped checks carry the unmet precondition, inapplicable
/// ones the reason the stated bound is vacuous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped(String),
    Inapplicable(String),
    NotEvaluated,
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail)
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Skipped(why) => write!(f, "skipped({why})"),
            Verdict::Inapplicable(why) => write!(f, "inapplicable ({why})"),
            Verdict::NotEvaluated => write!(f, "not evaluated"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    pub paper_ref: String,
}

impl CheckResult {
    pub fn new(
        name: &str,
        value: Option<f64>,
        tolerance: Option<f64>,
        verdict: Verdict,
        reference: &str,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            verdict,
            paper_ref: reference.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
    pub wall_ms: u128,
}

impl RunStats {
    pub fn from_steps(stats: StepStats, wall_ms: u128) -> Self {
        Self {
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            rhs_evals: stats.rhs_evals,
            wall_ms,
        }
    }
}

/// Per-scenario verdicts for every monitored identity/inequality plus decay
/// and convergence indicators.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario_id: String,
    /// Set for exploratory runs (uncertified damping, limit-case studies).
    pub banner: Option<String>,
    /// Set when integration did not reach the horizon; checks are then
    /// "not evaluated".
    pub failure: Option<String>,
    pub certificate: AdmissibilityCertificate,
    pub constants: Option<ProofConstants>,
    pub anchors: Vec<Vec<f64>>,
    pub checks: Vec<CheckResult>,
    pub decay: Option<DecayReport>,
    pub opial: Option<OpialOutcome>,
    pub gronwall: Option<GronwallOutcome>,
    pub fubini: Option<FubiniOutcome>,
    pub kernel: Option<KernelBound>,
    pub stats: RunStats,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict.is_fail())
    }

    /// CI contract: 0 all evaluated checks pass, 2 any check fails,
    /// 3 integration failure.
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            3
        } else if self.any_failed() {
            2
        } else {
            0
        }
    }

    /// One line per check, human readable.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        if let Some(b) = &self.banner {
            out.push_str(&format!("[{b}]\n"));
        }
        if let Some(f) = &self.failure {
            out.push_str(&format!("integration failure: {f}\n"));
        }
        for c in &self.checks {
            let value = c
                .value
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<24} {:<28} value {}\n",
                c.name,
                c.verdict.to_string(),
                value
            ));
        }
        out
    }
}

/// `t,x_0..x_{n-1},v_0..v_{n-1}` rows at the sample schedule. Shortest
/// round-trip float formatting keeps the artifact byte-deterministic.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.dim();
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",x_{i}"));
    }
    for i in 0..n {
        out.push_str(&format!(",v_{i}"));
    }
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&format!("{:?}", s.t));
        for i in 0..n {
            out.push_str(&format!(",{:?}", s.x[i]));
        }
        for i in 0..n {
            out.push_str(&format!(",{:?}", s.v[i]));
        }
        out.push('\n');
    }
    out
}

/// One JSON object per sample with keys
/// `{t, W, t2W, h, h_prime, speed2, int_sW, int_EQh, int_hp_pos}`.
/// Anchored keys are null for an anchor-free series.
pub fn diagnostics_ndjson(series: &DiagnosticSeries) -> String {
    let mut out = String::new();
    let anchored = series.anchor.is_some();
    let field = |v: f64| -> String { format!("{v:?}") };
    for i in 0..series.len() {
        let h = if anchored {
            field(series.h[i])
        } else {
            "null".into()
        };
        let hp = if anchored {
            field(series.h_prime[i])
        } else {
            "null".into()
        };
        let eqh = if anchored {
            field(series.int_eqh[i])
        } else {
            "null".into()
        };
        let hpp = if anchored {
            field(series.int_hp_pos[i])
        } else {
            "null".into()
        };
        out.push_str(&format!(
            "{{\"t\":{},\"W\":{},\"t2W\":{},\"h\":{},\"h_prime\":{},\"speed2\":{},\"int_sW\":{},\"int_EQh\":{},\"int_hp_pos\":{}}}\n",
            field(series.t[i]),
            field(series.w[i]),
            field(series.t2w[i]),
            h,
            hp,
            field(series.speed2[i]),
            field(series.int_sw[i]),
            eqh,
            hpp,
        ));
    }
    out
}

/// Writes `trajectory.csv`, `diagnostics.ndjson` (primary anchor), and
/// `report.json` into `dir/<scenario_id>/`.
pub fn persist(
    dir: &Path,
    report: &RunReport,
    traj: Option<&Trajectory>,
    primary_series: Option<&DiagnosticSeries>,
) -> Result<()> {
    let out = dir.join(&report.scenario_id);
    std::fs::create_dir_all(&out)?;
    if let Some(traj) = traj {
        std::fs::write(out.join("trajectory.csv"), trajectory_csv(traj))?;
    }
    if let Some(series) = primary_series {
        std::fs::write(out.join("diagnostics.ndjson"), diagnostics_ndjson(series))?;
    }
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(out.join("report.json"), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_strings_match_the_reporting_contract() {
        assert_eq!(Verdict::Pass.to_string(), "pass");
        assert_eq!(Verdict::Fail.to_string(), "fail");
        assert_eq!(
            Verdict::Skipped("hypothesis unmet".into()).to_string(),
            "skipped(hypothesis unmet)"
        );
        assert_eq!(
            Verdict::Inapplicable("C0 <= 0".into()).to_string(),
            "inapplicable (C0 <= 0)"
        );
        assert_eq!(Verdict::NotEvaluated.to_string(), "not evaluated");
    }

    #[test]
    fn csv_floats_round_trip() {
        // {:?} must print shortest round-trip forms, exponents included.
        assert_eq!(format!("{:?}", 1.0_f64), "1.0");
        assert_eq!(format!("{:?}", 1e-30_f64), "1e-30");
        let x = 0.1 + 0.2;
        let s = format!("{x:?}");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
