//! Edge coverage functions and covered demand.
//!
//! For a facility at `x` and an edge `e = [i,j]`, the coverage functions
//! bound the covered portion of `e`:
//!
//! * off the host edge, `s+ = min(1, max(0, (R - d(x,i)) / len))` and
//!   `s- = max(0, min(1, 1 - (R - d(x,j)) / len))`; `e` is covered on
//!   `[0, s+] ∪ [s-, 1]`,
//! * on the host edge, `s+ = max(0, (d(x,k) - R) / len)` and
//!   `s- = min(1, 1 - (d(x,l) - R) / len)`; the host is covered on
//!   `[s+, s-]`.
//!
//! `c_e(x)` is the covered fraction of `e` and `cbar_e(x)` its
//! squared-coordinate counterpart, the two quantities through which every
//! demand integral in this crate is expressed.

use crate::breakpoints;
use crate::error::{Error, Result};
use crate::net::{EdgeId, Network, PointOnEdge, Subedge, EPS};
use crate::pwl::{Piece, PiecewiseFn};

/// Demand intensity `a + b*t` along an edge (constant demand has `b = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineDemand {
    pub a: f64,
    pub b: f64,
}

impl AffineDemand {
    pub fn constant(a: f64) -> Self {
        AffineDemand { a, b: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

/// Classification of all edges other than the host into covered, uncovered
/// and partially covered.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageClass {
    pub covered: Vec<EdgeId>,
    pub uncovered: Vec<EdgeId>,
    pub partial: Vec<EdgeId>,
    pub host: EdgeId,
}

impl CoverageClass {
    pub fn is_covered(&self, e: EdgeId) -> bool {
        self.covered.contains(&e)
    }
}

/// Lower coverage bound `s+` of edge `e` seen from `x`.
pub fn s_plus(net: &Network, r: f64, e: EdgeId, x: PointOnEdge) -> f64 {
    let edge = net.edge(e);
    if e == x.edge {
        let dk = net.point_node_distance(x, edge.k);
        ((dk - r) / edge.len).max(0.0)
    } else {
        ((r - net.point_node_distance(x, edge.k)) / edge.len).clamp(0.0, 1.0)
    }
}

/// Upper coverage bound `s-` of edge `e` seen from `x`.
pub fn s_minus(net: &Network, r: f64, e: EdgeId, x: PointOnEdge) -> f64 {
    let edge = net.edge(e);
    if e == x.edge {
        let dl = net.point_node_distance(x, edge.l);
        (1.0 - (dl - r) / edge.len).min(1.0)
    } else {
        (1.0 - (r - net.point_node_distance(x, edge.l)) / edge.len).clamp(0.0, 1.0)
    }
}

/// Classifies all non-host edges by their coverage status.
pub fn classify(net: &Network, r: f64, x: PointOnEdge) -> CoverageClass {
    let mut class = CoverageClass {
        covered: Vec::new(),
        uncovered: Vec::new(),
        partial: Vec::new(),
        host: x.edge,
    };
    for e in 0..net.edge_count() {
        if e == x.edge {
            continue;
        }
        let sp = s_plus(net, r, e, x);
        let sm = s_minus(net, r, e, x);
        if sm <= sp + EPS {
            class.covered.push(e);
        } else if sp <= EPS && sm >= 1.0 - EPS {
            class.uncovered.push(e);
        } else {
            class.partial.push(e);
        }
    }
    class
}

/// Covered interval of the host edge, `(e_x, [s+, s-])`.
pub fn host_covered_subedge(net: &Network, r: f64, x: PointOnEdge) -> Subedge {
    let sp = s_plus(net, r, x.edge, x);
    let sm = s_minus(net, r, x.edge, x);
    Subedge::new(x.edge, sp, sm).expect("host coverage interval is nonempty for R > 0")
}

/// Covered fraction of edge `e` for a facility at `x`.
pub fn c_value(net: &Network, r: f64, e: EdgeId, x: PointOnEdge) -> f64 {
    let sp = s_plus(net, r, e, x);
    let sm = s_minus(net, r, e, x);
    if e == x.edge {
        (sm - sp).clamp(0.0, 1.0)
    } else {
        // covered (sm <= sp), partial and uncovered collapse into one form
        (1.0 - sm + sp).clamp(0.0, 1.0)
    }
}

/// Squared-coordinate coverage of edge `e`, the weight of the slope term in
/// linear demand integrals.
pub fn cbar_value(net: &Network, r: f64, e: EdgeId, x: PointOnEdge) -> f64 {
    let sp = s_plus(net, r, e, x);
    let sm = s_minus(net, r, e, x);
    if e == x.edge {
        (sm * sm - sp * sp).clamp(0.0, 1.0)
    } else {
        (1.0 - sm * sm + sp * sp).clamp(0.0, 1.0)
    }
}

/// Total covered demand `g(x, w)` as the exact closed-form integral
/// `sum_e a_e c_e(x) + b_e/2 cbar_e(x)`.
pub fn covered_demand(net: &Network, r: f64, x: PointOnEdge, w: &[AffineDemand]) -> Result<f64> {
    if w.len() != net.edge_count() {
        return Err(Error::input("demand vector length does not match edge count"));
    }
    for (e, d) in w.iter().enumerate() {
        if d.eval(0.0) < -EPS || d.eval(1.0) < -EPS {
            return Err(Error::input(format!("negative demand on edge {e}")));
        }
    }
    let mut total = 0.0;
    for (e, d) in w.iter().enumerate() {
        total += d.a * c_value(net, r, e, x) + 0.5 * d.b * cbar_value(net, r, e, x);
    }
    Ok(total)
}

/// Reconstructs a piecewise-affine function over the host edge from
/// pointwise samples at the given cut parameters, verifying affinity with
/// two interior probes per piece.
fn affine_profile(cuts: &[f64], f: impl Fn(f64) -> f64, what: &str) -> Result<PiecewiseFn> {
    let mut pieces = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= EPS {
            continue;
        }
        let (vlo, vhi) = (f(lo), f(hi));
        let slope = (vhi - vlo) / (hi - lo);
        let piece = Piece::affine(lo, hi, vlo - slope * lo, slope);
        for frac in [1.0 / 3.0, 2.0 / 3.0] {
            let t = lo + frac * (hi - lo);
            if (piece.eval(t) - f(t)).abs() > 1e-7 {
                return Err(Error::internal(format!(
                    "{what}: missed breakpoint in [{lo}, {hi}]"
                )));
            }
        }
        pieces.push(piece);
    }
    PiecewiseFn::new(pieces)
}

/// Piecewise-affine representations of `t -> s±_e((host, t))`.
///
/// Breakpoints come from the bottleneck and network intersect points of the
/// host edge, plus the full-coverage parameters at distance `R - len_e` from
/// the endpoints of `e`, where the clamps of `s+` at 1 and of `s-` at 0
/// activate (those kinks lie inside fully covered regions, so they affect
/// the raw coverage functions but never `c_e`). Coincident pieces are merged
/// afterwards so the remaining breakpoints are genuine.
pub fn coverage_profile(
    net: &Network,
    r: f64,
    e: EdgeId,
    host: EdgeId,
) -> Result<(PiecewiseFn, PiecewiseFn)> {
    let mut cuts = breakpoints::coverage_cuts(net, r, host);
    let edge = net.edge(e);
    if e != host && r - edge.len > EPS {
        for i in [edge.k, edge.l] {
            cuts.extend(breakpoints::distance_level_points(net, host, i, r - edge.len));
        }
        breakpoints::dedup_sorted(&mut cuts);
    }
    let sp = affine_profile(&cuts, |t| s_plus(net, r, e, PointOnEdge::new(host, t)), "s+")?;
    let sm = affine_profile(&cuts, |t| s_minus(net, r, e, PointOnEdge::new(host, t)), "s-")?;
    Ok((sp.simplified(), sm.simplified()))
}

/// Piecewise forms of `c_e` (affine) and `cbar_e` (quadratic) over the host
/// edge, built on the full partition-point grid so each piece has a fixed
/// coverage case.
pub fn c_profiles(
    net: &Network,
    r: f64,
    e: EdgeId,
    host: EdgeId,
    host_cuts: &[f64],
) -> Result<(PiecewiseFn, PiecewiseFn)> {
    let (sp, sm) = coverage_profile(net, r, e, host)?;
    let mut c_pieces = Vec::new();
    let mut cbar_pieces = Vec::new();
    for w in host_cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= EPS {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let pp = sp.piece_at(mid);
        let pm = sm.piece_at(mid);
        let (ap, bp) = (pp.coef[0], pp.coef[1]);
        let (am, bm) = (pm.coef[0], pm.coef[1]);
        let x_mid = PointOnEdge::new(host, mid);
        let (c, cbar) = if e == host {
            // covered part [s+, s-]
            (
                [am - ap, bm - bp, 0.0],
                [am * am - ap * ap, 2.0 * (am * bm - ap * bp), bm * bm - bp * bp],
            )
        } else {
            let sp_mid = pp.eval(mid);
            let sm_mid = pm.eval(mid);
            if sm_mid <= sp_mid + EPS {
                // fully covered on this piece
                ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0])
            } else if sp_mid <= EPS && sm_mid >= 1.0 - EPS {
                ([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
            } else {
                (
                    [1.0 - am + ap, bp - bm, 0.0],
                    [
                        1.0 - am * am + ap * ap,
                        2.0 * (ap * bp - am * bm),
                        bp * bp - bm * bm,
                    ],
                )
            }
        };
        debug_assert!((c[0] + c[1] * mid - c_value(net, r, e, x_mid)).abs() < 1e-7);
        c_pieces.push(Piece { lo, hi, coef: c });
        cbar_pieces.push(Piece { lo, hi, coef: cbar });
    }
    Ok((
        PiecewiseFn::new(c_pieces)?.simplified(),
        PiecewiseFn::new(cbar_pieces)?.simplified(),
    ))
}

/// Precomputed partition points plus `c`/`cbar` profiles for every
/// (edge, host edge) pair. Built once per instance and shared by the
/// solvers; evaluation goes through the profiles so solver arithmetic is
/// consistent with the piecewise forms used for subdivision.
#[derive(Debug)]
pub struct CoverageTables<'a> {
    pub net: &'a Network,
    pub r: f64,
    pub pp: crate::breakpoints::PartitionPointSet,
    c: Vec<Vec<PiecewiseFn>>,
    cbar: Vec<Vec<PiecewiseFn>>,
}

impl<'a> CoverageTables<'a> {
    pub fn build(net: &'a Network, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::input(format!("coverage radius must be positive, got {r}")));
        }
        let pp = crate::breakpoints::partition_points(net, r)?;
        let m = net.edge_count();
        let mut c = Vec::with_capacity(m);
        let mut cbar = Vec::with_capacity(m);
        for host in 0..m {
            let cuts = pp.cuts(host);
            let mut c_row = Vec::with_capacity(m);
            let mut cbar_row = Vec::with_capacity(m);
            for e in 0..m {
                let (cp, cb) = c_profiles(net, r, e, host, &cuts)?;
                c_row.push(cp);
                cbar_row.push(cb);
            }
            c.push(c_row);
            cbar.push(cbar_row);
        }
        Ok(CoverageTables { net, r, pp, c, cbar })
    }

    pub fn c_profile(&self, host: EdgeId, e: EdgeId) -> &PiecewiseFn {
        &self.c[host][e]
    }

    pub fn cbar_profile(&self, host: EdgeId, e: EdgeId) -> &PiecewiseFn {
        &self.cbar[host][e]
    }

    pub fn c_at(&self, e: EdgeId, x: PointOnEdge) -> f64 {
        self.c[x.edge][e].eval(x.t)
    }

    pub fn cbar_at(&self, e: EdgeId, x: PointOnEdge) -> f64 {
        self.cbar[x.edge][e].eval(x.t)
    }
}
