//! Damping-constant sweeps: one run per K, reusing a base scenario.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::runner::run_scenario;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub slope: Option<f64>,
    pub t2w_end: Option<f64>,
    pub sw_tail_ratio: Option<f64>,
    pub displacement: Option<f64>,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub base_id: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `K,slope,t2W_end,sW_tail_ratio,displacement,label`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,slope,t2W_end,sW_tail_ratio,displacement,label\n");
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{},{},{},{},{}\n",
                r.k,
                num(r.slope),
                num(r.t2w_end),
                num(r.sw_tail_ratio),
                num(r.displacement),
                r.label
            ));
        }
        out
    }
}

/// One run per K (in parallel), rows in input order. Rows whose certificate
/// fails the `K_inf > 3` condition are labeled as outside the hypotheses but
/// still executed; per-row integration failures are recorded and the sweep
/// continues.
pub fn sweep_k(
    base: &ScenarioConfig,
    k_values: &[f64],
    out_dir: Option<&Path>,
) -> Result<SweepTable> {
    if k_values.is_empty() {
        return Err(Error::RejectedInput("sweep needs at least one K".into()));
    }
    if let Some(&bad) = k_values.iter().find(|&&k| !(k > 0.0)) {
        return Err(Error::RejectedInput(format!(
            "sweep needs K > 0, got {bad}"
        )));
    }
    // Fail early on non-sweepable damping.
    base.damping.with_k(k_values[0])?;

    let rows: Vec<SweepRow> = k_values
        .par_iter()
        .map(|&k| -> SweepRow {
            let mut cfg = base.clone();
            cfg.id = format!("{}-K{}", base.id, k);
            cfg.damping = match base.damping.with_k(k) {
                Ok(d) => d,
                Err(e) => {
                    return SweepRow {
                        k,
                        slope: None,
                        t2w_end: None,
                        sw_tail_ratio: None,
                        displacement: None,
                        label: format!("error: {e}"),
                    }
                }
            };
            match run_scenario(&cfg, out_dir) {
                Ok(outcome) => {
                    if let Some(failure) = &outcome.report.failure {
                        return SweepRow {
                            k,
                            slope: None,
                            t2w_end: None,
                            sw_tail_ratio: None,
                            displacement: None,
                            label: format!("integration failure: {failure}"),
                        };
                    }
                    let decay = outcome.report.decay.as_ref();
                    let displacement = outcome.trajectory.as_ref().map(|traj| {
                        let last = traj.samples.last().unwrap();
                        let half = traj.sample_nearest(last.t / 2.0);
                        (&last.x - &half.x).norm()
                    });
                    let label = if outcome.report.certificate.k_condition {
                        "certified".to_string()
                    } else {
                        "outside hypotheses (K_inf <= 3)".to_string()
                    };
                    SweepRow {
                        k,
                        slope: decay.and_then(|d| d.slope),
                        t2w_end: decay.map(|d| d.t2w_end),
                        sw_tail_ratio: decay.map(|d| d.sw_tail_ratio),
                        displacement,
                        label,
                    }
                }
                Err(e) => SweepRow {
                    k,
                    slope: None,
                    t2w_end: None,
                    sw_tail_ratio: None,
                    displacement: None,
                    label: format!("error: {e}"),
                },
            }
        })
        .collect();

    let table = SweepTable {
        base_id: base.id.clone(),
        rows,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}-sweep.csv", base.id)), table.to_csv())?;
    }
    Ok(table)
}
