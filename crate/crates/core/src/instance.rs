//! Canonical instance and solution file formats (JSON-structured text).
//!
//! An instance holds the node count, coverage radius, demand model and the
//! edge list with per-edge demand bound coefficients `[a, b]` meaning
//! `a + b*t`; constant demand uses `b = 0`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::constant::{ConstantBounds, EdgeMinimum, RegretSolution};
use crate::coverage::AffineDemand;
use crate::error::{Error, Result};
use crate::linear::LinearBounds;
use crate::net::{Network, PointOnEdge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandModel {
    Constant,
    Linear,
}

impl std::fmt::Display for DemandModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DemandModel::Constant => write!(f, "constant"),
            DemandModel::Linear => write!(f, "linear"),
        }
    }
}

/// Demand bounds for either model.
#[derive(Debug, Clone)]
pub enum DemandBounds {
    Constant(ConstantBounds),
    Linear(LinearBounds),
}

impl DemandBounds {
    pub fn model(&self) -> DemandModel {
        match self {
            DemandBounds::Constant(_) => DemandModel::Constant,
            DemandBounds::Linear(_) => DemandModel::Linear,
        }
    }

    /// Bounds in the linear representation regardless of model.
    pub fn as_linear(&self) -> LinearBounds {
        match self {
            DemandBounds::Constant(c) => LinearBounds::from_constant(c),
            DemandBounds::Linear(l) => l.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeSpec {
    pub k: usize,
    pub l: usize,
    pub length: f64,
    pub lb: [f64; 2],
    pub ub: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Instance {
    pub nodes: usize,
    pub radius: f64,
    pub demand_model: DemandModel,
    pub edges: Vec<EdgeSpec>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("instance JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn network(&self) -> Result<Network> {
        let edges: Vec<(usize, usize, f64)> =
            self.edges.iter().map(|e| (e.k, e.l, e.length)).collect();
        Network::new(self.nodes, &edges)
    }

    pub fn bounds(&self) -> Result<DemandBounds> {
        match self.demand_model {
            DemandModel::Constant => {
                for (i, e) in self.edges.iter().enumerate() {
                    if e.lb[1] != 0.0 || e.ub[1] != 0.0 {
                        return Err(Error::input(format!(
                            "edge {i}: constant demand model requires zero slopes"
                        )));
                    }
                }
                let lb = self.edges.iter().map(|e| e.lb[0]).collect();
                let ub = self.edges.iter().map(|e| e.ub[0]).collect();
                Ok(DemandBounds::Constant(ConstantBounds::new(lb, ub)?))
            }
            DemandModel::Linear => {
                let lb =
                    self.edges.iter().map(|e| AffineDemand { a: e.lb[0], b: e.lb[1] }).collect();
                let ub =
                    self.edges.iter().map(|e| AffineDemand { a: e.ub[0], b: e.ub[1] }).collect();
                Ok(DemandBounds::Linear(LinearBounds::new(lb, ub)?))
            }
        }
    }

    /// Network, radius and validated bounds in one call.
    pub fn parts(&self) -> Result<(Network, f64, DemandBounds)> {
        if !(self.radius > 0.0) {
            return Err(Error::input("radius must be positive"));
        }
        Ok((self.network()?, self.radius, self.bounds()?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointOut {
    pub edge: usize,
    pub t: f64,
}

impl From<PointOnEdge> for PointOut {
    fn from(p: PointOnEdge) -> Self {
        PointOut { edge: p.edge, t: p.t }
    }
}

/// Solution output document shared by all solvers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionOut {
    pub model: String,
    pub optimum: PointOut,
    pub regret: f64,
    pub per_edge_minima: Vec<EdgeMinimum>,
    pub worst_case_alternative: PointOut,
    /// Map from edge id to the worst-case demand: a number for constant
    /// demand, `[a, b]` for linear.
    pub worst_case_demand: BTreeMap<String, serde_json::Value>,
}

impl SolutionOut {
    pub fn from_solution(model: &str, sol: &RegretSolution) -> Self {
        let worst_case_demand = sol
            .worst_demand
            .iter()
            .enumerate()
            .map(|(e, d)| {
                let v = if d.b == 0.0 {
                    serde_json::json!(d.a)
                } else {
                    serde_json::json!([d.a, d.b])
                };
                (e.to_string(), v)
            })
            .collect();
        SolutionOut {
            model: model.to_string(),
            optimum: sol.optimum.into(),
            regret: sol.regret,
            per_edge_minima: sol.per_edge.clone(),
            worst_case_alternative: sol.alternative.into(),
            worst_case_demand,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}

/// The triangle fixture used across tests and docs: three nodes, edge
/// lengths 1, 2, 3, radius 1.
pub fn triangle_instance(model: DemandModel) -> Instance {
    let (lb, ub): (Vec<[f64; 2]>, Vec<[f64; 2]>) = match model {
        DemandModel::Constant => (
            vec![[3.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![[15.0, 0.0], [7.0, 0.0], [8.0, 0.0]],
        ),
        DemandModel::Linear => (
            vec![[3.0, -3.0], [0.0, 3.0], [2.0, 3.0]],
            vec![[15.0, 7.0], [7.0, 3.0], [8.0, 10.0]],
        ),
    };
    Instance {
        nodes: 3,
        radius: 1.0,
        demand_model: model,
        edges: vec![
            EdgeSpec { k: 1, l: 2, length: 1.0, lb: lb[0], ub: ub[0] },
            EdgeSpec { k: 2, l: 3, length: 2.0, lb: lb[1], ub: ub[1] },
            EdgeSpec { k: 1, l: 3, length: 3.0, lb: lb[2], ub: ub[2] },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let inst = triangle_instance(DemandModel::Constant);
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        assert_eq!(inst, back);
        let (net, r, bounds) = back.parts().unwrap();
        assert_eq!(net.edge_count(), 3);
        assert_eq!(r, 1.0);
        assert_eq!(bounds.model(), DemandModel::Constant);
    }

    #[test]
    fn malformed_json_is_input_error() {
        let err = Instance::from_json("{\"nodes\": 3").unwrap_err();
        assert!(err.is_input());
        let err = Instance::from_json("{\"nodes\": 3}").unwrap_err();
        assert!(err.to_string().contains("radius"), "{err}");
    }

    #[test]
    fn constant_model_rejects_slopes() {
        let mut inst = triangle_instance(DemandModel::Constant);
        inst.edges[0].lb[1] = 1.0;
        assert!(inst.bounds().is_err());
    }

    #[test]
    fn linear_bounds_violation_detected() {
        let mut inst = triangle_instance(DemandModel::Linear);
        // lb(1) > ub(1)
        inst.edges[0].lb = [3.0, 20.0];
        assert!(inst.bounds().is_err());
    }
}
