//! Comparison solvers: the node-restricted minmax-regret variant (facility
//! forced onto a node) and the deterministic solver that assumes the demand
//! equals the mean of the bound functions.

use crate::constant::{self, EdgeMinimum, RegretSolution};
use crate::coverage::{AffineDemand, CoverageTables};
use crate::error::{Error, Result};
use crate::instance::DemandBounds;
use crate::linear::{self, LinearCtx};
use crate::net::{Network, PointOnEdge, EPS};
use crate::pwl::PiecewiseFn;

/// Coefficient-wise mean of the lower and upper bound functions.
pub fn mean_demand(bounds: &DemandBounds) -> Vec<AffineDemand> {
    let lin = bounds.as_linear();
    lin.lb
        .iter()
        .zip(lin.ub.iter())
        .map(|(l, u)| AffineDemand { a: 0.5 * (l.a + u.a), b: 0.5 * (l.b + u.b) })
        .collect()
}

/// Minimizes the maximal regret over the nodes only. Ties resolve to the
/// smallest node id.
pub fn solve_node_restricted(net: &Network, r: f64, bounds: &DemandBounds) -> Result<RegretSolution> {
    if net.node_count() < 2 {
        return Err(Error::input("node-restricted solver needs at least two nodes"));
    }
    match bounds {
        DemandBounds::Constant(cb) => {
            let tables = CoverageTables::build(net, r)?;
            let mut best: Option<(f64, PointOnEdge, PointOnEdge, Vec<f64>)> = None;
            for v in 1..=net.node_count() {
                let x = net.node_point(v);
                let (value, alt, w) = constant::max_regret_at_with(&tables, cb, x);
                if best.as_ref().map_or(true, |b| value < b.0 - 1e-12) {
                    best = Some((value, x, alt, w));
                }
            }
            let (regret, optimum, alternative, w) = best.unwrap();
            Ok(RegretSolution {
                optimum,
                regret,
                per_edge: Vec::new(),
                alternative,
                worst_demand: w.into_iter().map(AffineDemand::constant).collect(),
            })
        }
        DemandBounds::Linear(lb) => {
            let ctx = LinearCtx::build(net, r, lb)?;
            let mut best: Option<(f64, PointOnEdge, PointOnEdge)> = None;
            for v in 1..=net.node_count() {
                let x = net.node_point(v);
                let (value, alt) = linear::max_regret_at_linear_with(&ctx, x);
                if best.as_ref().map_or(true, |b| value < b.0 - 1e-12) {
                    best = Some((value, x, alt));
                }
            }
            let (regret, optimum, alternative) = best.unwrap();
            let worst_demand = ctx.worst_realisation(optimum, alternative);
            Ok(RegretSolution { optimum, regret, per_edge: Vec::new(), alternative, worst_demand })
        }
    }
}

/// Maximizes the covered demand `g(x, w)` for a known demand realisation
/// `w`. Per host edge `g` is piecewise affine (constant demand) or quadratic
/// (linear demand) on the partition intervals; each piece is maximized over
/// its endpoints and interior stationary point. Ties resolve to the smallest
/// edge id, then the smallest `t`.
pub fn solve_deterministic(
    net: &Network,
    r: f64,
    w: &[AffineDemand],
) -> Result<(PointOnEdge, f64)> {
    if w.len() != net.edge_count() {
        return Err(Error::input("demand vector length does not match edge count"));
    }
    for (e, d) in w.iter().enumerate() {
        if d.eval(0.0) < -EPS || d.eval(1.0) < -EPS {
            return Err(Error::input(format!("negative demand on edge {e}")));
        }
    }
    let tables = CoverageTables::build(net, r)?;
    let mut best: Option<(f64, usize, f64)> = None;
    for host in 0..net.edge_count() {
        let parts: Vec<PiecewiseFn> = (0..net.edge_count())
            .flat_map(|e| {
                let c = tables.c_profile(host, e).clone().scaled(w[e].a);
                let cb = tables.cbar_profile(host, e).clone().scaled(0.5 * w[e].b);
                [c, cb]
            })
            .collect();
        let refs: Vec<&PiecewiseFn> = parts.iter().collect();
        let g = PiecewiseFn::sum(&refs)?;
        for piece in g.pieces() {
            let mut candidates = vec![piece.lo, piece.hi];
            let c2 = piece.coef[2];
            if c2.abs() > EPS {
                let v = -piece.coef[1] / (2.0 * c2);
                if v > piece.lo && v < piece.hi {
                    candidates.push(v);
                }
            }
            for t in candidates {
                let value = piece.eval(t);
                let better = match &best {
                    None => true,
                    Some((bv, be, bt)) => {
                        value > bv + 1e-12
                            || ((value - bv).abs() <= 1e-12 && (host, t) < (*be, *bt))
                    }
                };
                if better {
                    best = Some((value, host, t));
                }
            }
        }
    }
    let (value, edge, t) = best.expect("at least one edge");
    Ok((PointOnEdge::new(edge, t), value))
}

/// Deterministic baseline evaluated as a regret solution: solves the
/// mean-demand problem and reports the maximal regret of its optimum.
pub fn deterministic_as_regret(
    net: &Network,
    r: f64,
    bounds: &DemandBounds,
) -> Result<(RegretSolution, f64)> {
    let w = mean_demand(bounds);
    let (x, covered) = solve_deterministic(net, r, &w)?;
    let (regret, alternative, worst) = match bounds {
        DemandBounds::Constant(cb) => {
            let (v, alt, wd) = constant::max_regret_at(net, r, cb, x)?;
            (v, alt, wd.into_iter().map(AffineDemand::constant).collect())
        }
        DemandBounds::Linear(lb) => {
            let ctx = LinearCtx::build(net, r, lb)?;
            let (v, alt) = linear::max_regret_at_linear_with(&ctx, x);
            (v, alt, ctx.worst_realisation(x, alt))
        }
    };
    Ok((
        RegretSolution {
            optimum: x,
            regret,
            per_edge: vec![EdgeMinimum { edge: x.edge, t: x.t, value: regret }],
            alternative,
            worst_demand: worst,
        },
        covered,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constant::ConstantBounds;
    use crate::coverage::covered_demand;
    use crate::instance::{triangle_instance, DemandModel};

    fn triangle() -> Network {
        Network::new(3, &[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 3.0)]).unwrap()
    }

    #[test]
    fn mean_demand_coefficients() {
        let cb = ConstantBounds::new(vec![3.0], vec![15.0]).unwrap();
        let m = mean_demand(&DemandBounds::Constant(cb));
        assert_eq!(m[0], AffineDemand { a: 9.0, b: 0.0 });
        let inst = triangle_instance(DemandModel::Linear);
        let (_, _, bounds) = inst.parts().unwrap();
        let m = mean_demand(&bounds);
        assert_eq!(m[0], AffineDemand { a: 9.0, b: 2.0 });
        assert_eq!(m[1], AffineDemand { a: 3.5, b: 3.0 });
        assert_eq!(m[2], AffineDemand { a: 5.0, b: 6.5 });
        // lb = ub stays put
        let tight = ConstantBounds::new(vec![4.0], vec![4.0]).unwrap();
        let m = mean_demand(&DemandBounds::Constant(tight));
        assert_eq!(m[0].a, 4.0);
    }

    #[test]
    fn deterministic_example_constant() {
        let net = triangle();
        let w = vec![
            AffineDemand::constant(9.0),
            AffineDemand::constant(4.0),
            AffineDemand::constant(5.0),
        ];
        let (x, covered) = solve_deterministic(&net, 1.0, &w).unwrap();
        // vertex 2 reported on the lowest-id edge
        assert_eq!(x.edge, 0);
        assert!((x.t - 1.0).abs() < 1e-9);
        assert!((covered - 11.0).abs() < 1e-9);
        assert!((covered_demand(&net, 1.0, x, &w).unwrap() - covered).abs() < 1e-9);
    }

    #[test]
    fn deterministic_example_linear() {
        let net = triangle();
        let inst = triangle_instance(DemandModel::Linear);
        let (_, _, bounds) = inst.parts().unwrap();
        let w = mean_demand(&bounds);
        let (x, covered) = solve_deterministic(&net, 1.0, &w).unwrap();
        assert_eq!(x.edge, 0);
        assert!((x.t - 1.0).abs() < 1e-9);
        assert!((covered - 12.125).abs() < 1e-6);
    }

    #[test]
    fn deterministic_beats_every_node() {
        let net = triangle();
        let w = vec![
            AffineDemand::constant(9.0),
            AffineDemand::constant(4.0),
            AffineDemand::constant(5.0),
        ];
        let (_, covered) = solve_deterministic(&net, 1.0, &w).unwrap();
        for v in 1..=3 {
            let g = covered_demand(&net, 1.0, net.node_point(v), &w).unwrap();
            assert!(covered >= g - 1e-9);
        }
    }

    #[test]
    fn zero_demand_tie_breaks_to_first_edge_start() {
        let net = triangle();
        let w = vec![AffineDemand::constant(0.0); 3];
        let (x, covered) = solve_deterministic(&net, 1.0, &w).unwrap();
        assert_eq!(covered, 0.0);
        assert_eq!(x.edge, 0);
        assert_eq!(x.t, 0.0);
    }

    #[test]
    fn node_restricted_example() {
        let net = triangle();
        let inst = triangle_instance(DemandModel::Constant);
        let (_, _, bounds) = inst.parts().unwrap();
        let sol = solve_node_restricted(&net, 1.0, &bounds).unwrap();
        // vertex 2 with regret 13/6
        assert!((sol.regret - 13.0 / 6.0).abs() < 1e-9);
        let v2 = net.node_point(2);
        assert_eq!((sol.optimum.edge, sol.optimum.t), (v2.edge, v2.t));
    }

    #[test]
    fn node_restricted_never_beats_continuous() {
        let net = triangle();
        let inst = triangle_instance(DemandModel::Constant);
        let (_, _, bounds) = inst.parts().unwrap();
        let nr = solve_node_restricted(&net, 1.0, &bounds).unwrap();
        if let DemandBounds::Constant(cb) = &bounds {
            let full = crate::constant::solve_constant(&net, 1.0, cb).unwrap();
            assert!(nr.regret >= full.regret - 1e-9);
        }
    }
}
