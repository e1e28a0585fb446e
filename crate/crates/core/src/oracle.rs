//! Brute-force validation of regret values and optima on a dense grid.
//!
//! The alternative location `y` is discretized (K uniform points per edge
//! plus all partition points); the demand maximization stays exact because
//! the per-edge worst case is attained at a bound (constant demand) or at a
//! corner of the feasible parallelogram (linear demand). The remaining
//! discretization error in `y` and `x` is certified by a Lipschitz bound.

use rayon::prelude::*;

use crate::breakpoints;
use crate::coverage::{c_value, cbar_value};
use crate::error::Result;
use crate::instance::DemandBounds;
use crate::linear::ParallelogramCorners;
use crate::net::{Network, PointOnEdge};

/// All grid candidates: K uniform parameters per edge plus the partition
/// points of that edge.
fn grid_points(net: &Network, r: f64, k: usize) -> Result<Vec<PointOnEdge>> {
    let pp = breakpoints::partition_points(net, r)?;
    let mut pts = Vec::with_capacity(net.edge_count() * (k + 4));
    for e in 0..net.edge_count() {
        for i in 0..k {
            pts.push(PointOnEdge::new(e, i as f64 / (k - 1) as f64));
        }
        for t in pp.cuts(e) {
            pts.push(PointOnEdge::new(e, t));
        }
    }
    Ok(pts)
}

/// Per-candidate coverage values, exact in the demand dimension.
struct GridTables {
    pts: Vec<PointOnEdge>,
    /// `c_e(p)` for every candidate point, row-major `[pt][edge]`.
    c: Vec<f64>,
    /// `cbar_e(p)` likewise (empty for constant demand).
    cbar: Vec<f64>,
    m: usize,
}

fn build_grid(net: &Network, r: f64, bounds: &DemandBounds, k: usize) -> Result<GridTables> {
    let pts = grid_points(net, r, k)?;
    let m = net.edge_count();
    let mut c = Vec::with_capacity(pts.len() * m);
    let mut cbar = Vec::new();
    let linear = matches!(bounds, DemandBounds::Linear(_));
    if linear {
        cbar.reserve(pts.len() * m);
    }
    for &p in &pts {
        for e in 0..m {
            c.push(c_value(net, r, e, p));
            if linear {
                cbar.push(cbar_value(net, r, e, p));
            }
        }
    }
    Ok(GridTables { pts, c, cbar, m })
}

fn regret_against(
    grid: &GridTables,
    bounds: &DemandBounds,
    corners: &[ParallelogramCorners],
    cx: &[f64],
    cbx: &[f64],
    yi: usize,
) -> f64 {
    let m = grid.m;
    let cy = &grid.c[yi * m..(yi + 1) * m];
    match bounds {
        DemandBounds::Constant(cb) => {
            let mut total = 0.0;
            for e in 0..m {
                let d = cy[e] - cx[e];
                total += if d >= 0.0 { cb.ub[e] * d } else { cb.lb[e] * d };
            }
            total
        }
        DemandBounds::Linear(_) => {
            let cby = &grid.cbar[yi * m..(yi + 1) * m];
            let mut total = 0.0;
            for e in 0..m {
                let dc = cy[e] - cx[e];
                let dcbar = cby[e] - cbx[e];
                // exact in the demand: enumerate the parallelogram corners
                let best = corners[e]
                    .pts
                    .iter()
                    .map(|(a, b)| a * dc + 0.5 * b * dcbar)
                    .fold(f64::NEG_INFINITY, f64::max);
                total += best;
            }
            total
        }
    }
}

fn corner_sets(bounds: &DemandBounds) -> Vec<ParallelogramCorners> {
    let lin = bounds.as_linear();
    lin.lb
        .iter()
        .zip(lin.ub.iter())
        .map(|(&l, &u)| ParallelogramCorners::from_bounds(l, u))
        .collect()
}

/// Grid lower bound on the maximal regret of `x`: exact in the demand,
/// discretized only in the alternative location.
pub fn grid_regret(
    net: &Network,
    r: f64,
    bounds: &DemandBounds,
    x: PointOnEdge,
    k: usize,
) -> Result<f64> {
    let grid = build_grid(net, r, bounds, k)?;
    let corners = corner_sets(bounds);
    let m = grid.m;
    let cx: Vec<f64> = (0..m).map(|e| c_value(net, r, e, x)).collect();
    let cbx: Vec<f64> = (0..m).map(|e| cbar_value(net, r, e, x)).collect();
    let best = (0..grid.pts.len())
        .map(|yi| regret_against(&grid, bounds, &corners, &cx, &cbx, yi))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// Minimizes the grid regret over the same grid of facility positions;
/// returns the approximate optimum for cross-checking the solvers.
pub fn grid_optimum(
    net: &Network,
    r: f64,
    bounds: &DemandBounds,
    k: usize,
) -> Result<(PointOnEdge, f64)> {
    let grid = build_grid(net, r, bounds, k)?;
    let corners = corner_sets(bounds);
    let m = grid.m;
    let evaluated: Vec<f64> = (0..grid.pts.len())
        .into_par_iter()
        .map(|xi| {
            let cx = &grid.c[xi * m..(xi + 1) * m];
            let cbx: &[f64] = if grid.cbar.is_empty() {
                &[]
            } else {
                &grid.cbar[xi * m..(xi + 1) * m]
            };
            (0..grid.pts.len())
                .map(|yi| regret_against(&grid, bounds, &corners, cx, cbx, yi))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut best = (f64::INFINITY, 0usize);
    for (i, &v) in evaluated.iter().enumerate() {
        let p = grid.pts[i];
        let b = grid.pts[best.1];
        if v < best.0 - 1e-15 || (v <= best.0 + 1e-15 && (p.edge, p.t) < (b.edge, b.t)) {
            best = (v.min(best.0), i);
        }
    }
    Ok((grid.pts[best.1], best.0))
}

/// Certified discretization gap of the K-point grid: a Lipschitz constant
/// for the regret along any edge parameter.
///
/// Per edge `e` the coverage fraction seen from a host edge `h` changes at
/// rate at most `2*max(1, len_h/len_e)` in `t`, its squared counterpart at
/// twice that; multiplying by the largest admissible demand magnitudes and
/// summing over edges bounds the slope of every `r(., y)` and `r(x, .)`.
pub fn certified_gap(net: &Network, bounds: &DemandBounds, k: usize) -> f64 {
    let lin = bounds.as_linear();
    let weights: Vec<f64> = match bounds {
        DemandBounds::Constant(cb) => cb.ub.clone(),
        DemandBounds::Linear(_) => lin
            .lb
            .iter()
            .zip(lin.ub.iter())
            .map(|(&l, &u)| {
                ParallelogramCorners::from_bounds(l, u)
                    .pts
                    .iter()
                    .map(|(a, b)| a.abs() + b.abs())
                    .fold(0.0, f64::max)
            })
            .collect(),
    };
    let mut worst = 0.0f64;
    for h in 0..net.edge_count() {
        let len_h = net.edge(h).len;
        let mut slope = 0.0;
        for e in 0..net.edge_count() {
            let kappa = 2.0 * (len_h / net.edge(e).len).max(1.0);
            slope += weights[e] * kappa;
        }
        worst = worst.max(slope);
    }
    worst / (k - 1) as f64
}
