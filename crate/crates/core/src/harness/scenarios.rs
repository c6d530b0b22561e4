//! Bundled reference scenarios. They ship in-repo and double as the
//! acceptance fixtures; `selftest` and the acceptance suite run all of them.

use crate::error::Result;
use crate::harness::config::ScenarioConfig;

pub const BUNDLED: &[(&str, &str)] = &[
    (
        "stationary",
        include_str!("../../scenarios/stationary.json"),
    ),
    (
        "free-flow-K4",
        include_str!("../../scenarios/free-flow-K4.json"),
    ),
    (
        "quadratic-1d-K4",
        include_str!("../../scenarios/quadratic-1d-K4.json"),
    ),
    (
        "quadratic-K4",
        include_str!("../../scenarios/quadratic-K4.json"),
    ),
    (
        "quadratic-K10",
        include_str!("../../scenarios/quadratic-K10.json"),
    ),
    (
        "degenerate-quadratic-K4",
        include_str!("../../scenarios/degenerate-quadratic-K4.json"),
    ),
    (
        "degenerate-quadratic-K10",
        include_str!("../../scenarios/degenerate-quadratic-K10.json"),
    ),
    (
        "least-squares-K4",
        include_str!("../../scenarios/least-squares-K4.json"),
    ),
    (
        "least-squares-K10",
        include_str!("../../scenarios/least-squares-K10.json"),
    ),
    (
        "logsumexp-K4",
        include_str!("../../scenarios/logsumexp-K4.json"),
    ),
    (
        "logsumexp-K10",
        include_str!("../../scenarios/logsumexp-K10.json"),
    ),
    (
        "shifted-t0-10",
        include_str!("../../scenarios/shifted-t0-10.json"),
    ),
    (
        "powerlaw-exploratory",
        include_str!("../../scenarios/powerlaw-exploratory.json"),
    ),
];

pub fn bundled_ids() -> Vec<&'static str> {
    BUNDLED.iter().map(|(id, _)| *id).collect()
}

pub fn load_bundled(id: &str) -> Option<Result<ScenarioConfig>> {
    BUNDLED
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| ScenarioConfig::from_json(text))
}

/// All bundled configs, in registry order.
pub fn all_bundled() -> Result<Vec<ScenarioConfig>> {
    BUNDLED
        .iter()
        .map(|(_, text)| ScenarioConfig::from_json(text))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_parses_and_builds() {
        for cfg in all_bundled().unwrap() {
            let p = cfg
                .potential
                .build()
                .unwrap_or_else(|e| panic!("{}: {e}", cfg.id));
            let d = cfg
                .damping
                .build(cfg.t0)
                .unwrap_or_else(|e| panic!("{}: {e}", cfg.id));
            assert_eq!(p.dim(), cfg.x0.len(), "{}", cfg.id);
            d.certify().unwrap_or_else(|e| panic!("{}: {e}", cfg.id));
        }
    }

    #[test]
    fn registry_ids_match_config_ids() {
        for (id, text) in BUNDLED {
            let cfg = ScenarioConfig::from_json(text).unwrap();
            assert_eq!(&cfg.id, id);
        }
    }
}
