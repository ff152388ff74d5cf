//! Deterministic node layouts for the experiment families.

use std::f64::consts::PI;

use confsr::model::{validate_cluster_config, ClusterParams, NodeVector};
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleCluster,
    MultiCluster,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::SingleCluster => "single_cluster",
            ScenarioKind::MultiCluster => "multi_cluster",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub s: usize,
    /// Largest cluster size; for multi-cluster layouts this is max(ell1, ell2).
    pub ell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell2: Option<usize>,
    pub delta: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn single(s: usize, ell: usize, delta: f64, n: usize, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::SingleCluster,
            s,
            ell,
            ell1: None,
            ell2: None,
            delta,
            n,
            seed,
        }
    }

    pub fn multi(s: usize, ell1: usize, ell2: usize, delta: f64, n: usize, seed: u64) -> Self {
        Self {
            kind: ScenarioKind::MultiCluster,
            s,
            ell: ell1.max(ell2),
            ell1: Some(ell1),
            ell2: Some(ell2),
            delta,
            n,
            seed,
        }
    }

    /// SRF = 1/(NΔ).
    pub fn srf(&self) -> f64 {
        1.0 / (self.n as f64 * self.delta)
    }
}

fn infeasible<T>(msg: String) -> Result<T> {
    Err(ExpError::Infeasible(msg))
}

/// Builds the node layout and the cluster parameters it satisfies.
///
/// Single cluster: ℓ nodes at −π/2 + kΔ, the other s − ℓ equally spaced along the
/// remaining arc of the circle. Multi cluster: ℓ₁ nodes from −π/2 upwards, ℓ₂ nodes
/// ending at π/2, the rest equally spaced strictly between the two clusters.
pub fn generate_scenario(sc: &Scenario) -> Result<(NodeVector, ClusterParams)> {
    let delta = sc.delta;
    if !(delta > 0.0 && delta.is_finite()) {
        return infeasible(format!("delta must be positive, got {delta}"));
    }
    let (nodes, rho, ell) = match sc.kind {
        ScenarioKind::SingleCluster => {
            let ell = sc.ell;
            if ell < 2 || ell > sc.s {
                return infeasible(format!("need 2 <= ell <= s, got ell={ell} s={}", sc.s));
            }
            if ell as f64 * delta >= PI {
                return infeasible(format!("cluster of {ell} nodes at spacing {delta} does not fit"));
            }
            let mut x: Vec<f64> = (0..ell).map(|k| -PI / 2.0 + k as f64 * delta).collect();
            let rest = sc.s - ell;
            let lo = x[ell - 1];
            let h = (2.0 * PI - (ell - 1) as f64 * delta) / (rest + 1) as f64;
            x.extend((1..=rest).map(|k| lo + k as f64 * h));
            let rho = if rest == 0 { PI } else { h };
            (x, rho, ell)
        }
        ScenarioKind::MultiCluster => {
            let (Some(l1), Some(l2)) = (sc.ell1, sc.ell2) else {
                return infeasible("multi_cluster needs ell1 and ell2".into());
            };
            let ell = l1.max(l2);
            if l1 == 0 || l2 == 0 || ell < 2 || l1 + l2 > sc.s {
                return infeasible(format!("need 1 <= ell1, ell2, max >= 2, ell1+ell2 <= s; got {l1}, {l2}, s={}", sc.s));
            }
            let lo = -PI / 2.0 + (l1 - 1) as f64 * delta;
            let hi = PI / 2.0 - (l2 - 1) as f64 * delta;
            if hi <= lo {
                return infeasible(format!("clusters of {l1} and {l2} nodes overlap at spacing {delta}"));
            }
            let rest = sc.s - l1 - l2;
            let h = (hi - lo) / (rest + 1) as f64;
            let mut x: Vec<f64> = (0..l1).map(|k| -PI / 2.0 + k as f64 * delta).collect();
            x.extend((1..=rest).map(|k| lo + k as f64 * h));
            x.extend((0..l2).map(|k| hi + k as f64 * delta));
            (x, h.min(PI), ell)
        }
    };
    let tau = ell as f64 - 1.0;
    if rho <= tau * delta * (1.0 + 1e-6) {
        return infeasible(format!(
            "gap {rho} between clusters does not exceed the cluster width {}",
            tau * delta
        ));
    }
    let params = ClusterParams::new(delta, rho, sc.s, ell, tau)?;
    let x = NodeVector::new(nodes)?;
    let report = validate_cluster_config(&x, &params);
    if !report.is_valid() {
        return infeasible(format!("layout fails validation: {:?}", report.violations));
    }
    Ok((x, params))
}
