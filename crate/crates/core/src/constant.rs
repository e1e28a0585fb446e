//! Solver for the unknown-constant-demand case.
//!
//! With constant demand per edge the partition points form a finite
//! dominating set, so the maximal regret of `x` is `max_{y in PP} r(x, y)`
//! with the per-edge worst case picking `ub_e` where `y` covers at least as
//! much of `e` as `x` and `lb_e` otherwise. Per host edge, `r(x, y)` is
//! piecewise affine; the solver assembles all of them, takes the upper
//! envelope over `y` and minimizes it.

use rayon::prelude::*;

use crate::breakpoints::{self, ic_points_on_profile};
use crate::coverage::{self, AffineDemand, CoverageTables};
use crate::envelope::{minimize_envelope, upper_envelope_segments, Segment};
use crate::error::{Error, Result};
use crate::net::{EdgeId, Network, PointOnEdge, EPS};
use crate::pwl::{Piece, PiecewiseFn};

/// Per-edge constant demand bounds `0 <= lb_e <= ub_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantBounds {
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

impl ConstantBounds {
    pub fn new(lb: Vec<f64>, ub: Vec<f64>) -> Result<Self> {
        if lb.len() != ub.len() {
            return Err(Error::input("demand bound vectors differ in length"));
        }
        for (e, (&l, &u)) in lb.iter().zip(ub.iter()).enumerate() {
            if l < 0.0 || u < l {
                return Err(Error::input(format!(
                    "edge {e}: need 0 <= lb <= ub, got lb={l}, ub={u}"
                )));
            }
        }
        Ok(ConstantBounds { lb, ub })
    }

    pub fn edge_count(&self) -> usize {
        self.lb.len()
    }
}

/// Local minimum of the regret envelope on one edge.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdgeMinimum {
    pub edge: EdgeId,
    pub t: f64,
    pub value: f64,
}

/// Result of a regret minimization: the optimal point, its regret, the
/// per-edge local minima and the worst-case witness at the optimum.
#[derive(Debug, Clone)]
pub struct RegretSolution {
    pub optimum: PointOnEdge,
    pub regret: f64,
    pub per_edge: Vec<EdgeMinimum>,
    pub alternative: PointOnEdge,
    pub worst_demand: Vec<AffineDemand>,
}

/// Counters reported by the benchmark harness.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    /// Deduplicated partition points on the whole network.
    pub pp_count: usize,
    /// Identical coverage points that are not also partition points.
    pub ic_count: usize,
}

/// Worst-case constant demand realisation for the pair `(x, y)`:
/// `ub_e` where `c_e(y) >= c_e(x)`, else `lb_e`.
pub fn worst_case_demand(
    net: &Network,
    r: f64,
    bounds: &ConstantBounds,
    x: PointOnEdge,
    y: PointOnEdge,
) -> Vec<f64> {
    (0..net.edge_count())
        .map(|e| {
            if coverage::c_value(net, r, e, y) >= coverage::c_value(net, r, e, x) {
                bounds.ub[e]
            } else {
                bounds.lb[e]
            }
        })
        .collect()
}

/// Piecewise-affine `r_e(x, y)` over the host edge for fixed `y` and `e`,
/// with pieces split at the identical coverage points of `(y, e)`.
fn regret_edge_pieces_with(
    tables: &CoverageTables,
    bounds: &ConstantBounds,
    host: EdgeId,
    y: PointOnEdge,
    e: EdgeId,
    ic_sink: Option<&mut Vec<f64>>,
) -> Result<PiecewiseFn> {
    let c_prof = tables.c_profile(host, e);
    let vc = tables.c_at(e, y);
    let ics = ic_points_on_profile(c_prof, vc);
    if let Some(sink) = ic_sink {
        sink.extend(ics.iter().copied());
    }
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(c_prof.breakpoints());
    cuts.extend(ics.iter().copied());
    breakpoints::dedup_sorted(&mut cuts);
    let mut pieces = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= EPS {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let p = c_prof.piece_at(mid);
        let w_e = if vc >= p.eval(mid) { bounds.ub[e] } else { bounds.lb[e] };
        pieces.push(Piece::affine(lo, hi, w_e * (vc - p.coef[0]), -w_e * p.coef[1]));
    }
    PiecewiseFn::new(pieces)
}

/// Public form of the per-edge regret pieces.
pub fn regret_edge_pieces(
    net: &Network,
    r: f64,
    bounds: &ConstantBounds,
    host: EdgeId,
    y: PointOnEdge,
    e: EdgeId,
) -> Result<PiecewiseFn> {
    let tables = CoverageTables::build(net, r)?;
    regret_edge_pieces_with(&tables, bounds, host, y, e, None)
}

/// `r(x, y) = sum_e r_e(x, y)` over the host edge as a piecewise-affine
/// function with O(m) pieces.
pub fn regret_xy(
    tables: &CoverageTables,
    bounds: &ConstantBounds,
    host: EdgeId,
    y: PointOnEdge,
) -> Result<PiecewiseFn> {
    let per_edge: Vec<PiecewiseFn> = (0..tables.net.edge_count())
        .map(|e| regret_edge_pieces_with(tables, bounds, host, y, e, None))
        .collect::<Result<_>>()?;
    let refs: Vec<&PiecewiseFn> = per_edge.iter().collect();
    Ok(PiecewiseFn::sum(&refs)?.simplified())
}

/// Maximal regret of `x` over all constant realisations, with the
/// worst-case alternative and realisation as witnesses.
pub fn max_regret_at_with(
    tables: &CoverageTables,
    bounds: &ConstantBounds,
    x: PointOnEdge,
) -> (f64, PointOnEdge, Vec<f64>) {
    let m = tables.net.edge_count();
    let cx: Vec<f64> = (0..m).map(|e| tables.c_at(e, x)).collect();
    let mut best = (f64::NEG_INFINITY, PointOnEdge::new(x.edge, x.t));
    for &y in &tables.pp.global {
        let mut total = 0.0;
        for e in 0..m {
            let delta = tables.c_at(e, y) - cx[e];
            total += if delta >= 0.0 { bounds.ub[e] * delta } else { bounds.lb[e] * delta };
        }
        if total > best.0 + 1e-15 {
            best = (total, y);
        }
    }
    let w = (0..m)
        .map(|e| {
            if tables.c_at(e, best.1) >= cx[e] {
                bounds.ub[e]
            } else {
                bounds.lb[e]
            }
        })
        .collect();
    (best.0, best.1, w)
}

/// Standalone maximal-regret evaluation at a point.
pub fn max_regret_at(
    net: &Network,
    r: f64,
    bounds: &ConstantBounds,
    x: PointOnEdge,
) -> Result<(f64, PointOnEdge, Vec<f64>)> {
    validate(net, bounds)?;
    let tables = CoverageTables::build(net, r)?;
    Ok(max_regret_at_with(&tables, bounds, x))
}

fn validate(net: &Network, bounds: &ConstantBounds) -> Result<()> {
    if bounds.edge_count() != net.edge_count() {
        return Err(Error::input("demand bounds do not match the edge count"));
    }
    Ok(())
}

/// Regret envelope `r(x) = max_y r(x, y)` over one host edge, with piece
/// labels indexing into the global partition point list.
pub fn regret_envelope(
    tables: &CoverageTables,
    bounds: &ConstantBounds,
    host: EdgeId,
) -> Result<crate::envelope::EnvelopeFn> {
    let m = tables.net.edge_count();
    let mut segments: Vec<Segment> = Vec::new();
    for (yi, &y) in tables.pp.global.iter().enumerate() {
        let per_edge: Vec<PiecewiseFn> = (0..m)
            .map(|e| regret_edge_pieces_with(tables, bounds, host, y, e, None))
            .collect::<Result<_>>()?;
        let refs: Vec<&PiecewiseFn> = per_edge.iter().collect();
        let rxy = PiecewiseFn::sum(&refs)?.simplified();
        for p in rxy.pieces() {
            segments.push(Segment { lo: p.lo, hi: p.hi, p: p.coef[0], q: p.coef[1], label: yi });
        }
    }
    upper_envelope_segments(&segments)
}

/// Minimizes the maximal regret over the whole network (constant demand).
pub fn solve_constant(net: &Network, r: f64, bounds: &ConstantBounds) -> Result<RegretSolution> {
    solve_constant_with_stats(net, r, bounds).map(|(sol, _)| sol)
}

/// As `solve_constant`, also returning partition/identical coverage point
/// counters for reporting.
pub fn solve_constant_with_stats(
    net: &Network,
    r: f64,
    bounds: &ConstantBounds,
) -> Result<(RegretSolution, SolveStats)> {
    validate(net, bounds)?;
    let tables = CoverageTables::build(net, r)?;
    let m = net.edge_count();

    struct HostResult {
        minimum: EdgeMinimum,
        ic_extra: usize,
    }

    let host_results: Vec<Result<HostResult>> = (0..m)
        .into_par_iter()
        .map(|host| {
            let mut segments: Vec<Segment> = Vec::new();
            let mut ic_points: Vec<f64> = Vec::new();
            for (yi, &y) in tables.pp.global.iter().enumerate() {
                let per_edge: Vec<PiecewiseFn> = (0..m)
                    .map(|e| {
                        regret_edge_pieces_with(&tables, bounds, host, y, e, Some(&mut ic_points))
                    })
                    .collect::<Result<_>>()?;
                let refs: Vec<&PiecewiseFn> = per_edge.iter().collect();
                let rxy = PiecewiseFn::sum(&refs)?.simplified();
                for p in rxy.pieces() {
                    segments.push(Segment {
                        lo: p.lo,
                        hi: p.hi,
                        p: p.coef[0],
                        q: p.coef[1],
                        label: yi,
                    });
                }
            }
            let env = upper_envelope_segments(&segments)?;
            let (t, value, _) = minimize_envelope(&env);
            breakpoints::dedup_sorted(&mut ic_points);
            let pp_cuts = tables.pp.cuts(host);
            let ic_extra = ic_points
                .iter()
                .filter(|t| !pp_cuts.iter().any(|p| (*p - **t).abs() <= EPS))
                .count();
            Ok(HostResult { minimum: EdgeMinimum { edge: host, t, value }, ic_extra })
        })
        .collect();

    let mut per_edge = Vec::with_capacity(m);
    let mut ic_count = 0usize;
    for hr in host_results {
        let hr = hr?;
        ic_count += hr.ic_extra;
        per_edge.push(hr.minimum);
    }

    let best = per_edge
        .iter()
        .copied()
        .min_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(a.edge.cmp(&b.edge))
                .then(a.t.partial_cmp(&b.t).unwrap())
        })
        .expect("at least one edge");
    let optimum = PointOnEdge::new(best.edge, best.t);
    let (_, alternative, w) = max_regret_at_with(&tables, bounds, optimum);
    let solution = RegretSolution {
        optimum,
        regret: best.value,
        per_edge,
        alternative,
        worst_demand: w.into_iter().map(AffineDemand::constant).collect(),
    };
    let stats = SolveStats { pp_count: tables.pp.total_global(), ic_count };
    Ok((solution, stats))
}
