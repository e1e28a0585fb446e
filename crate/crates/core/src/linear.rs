//! Solver for the unknown-linear-demand case.
//!
//! Admissible realisations on an edge form a parallelogram in
//! (intercept, slope) space; the per-edge worst case sits at one of its four
//! corners, selected by the signs of `dc = c_e(y) - c_e(x)`,
//! `dcbar = cbar_e(y) - cbar_e(x)` and `dcbar - 2 dc`. Those sign conditions
//! carve each square `e_x x e_y` into cells on which `r(x,y)` is a single
//! quadratic without a cross term. The maximum over `y` for fixed `x` is
//! attained on cell boundaries or on the horizontal stationary lines of
//! cells concave in `y`; the solver takes the upper envelope of `r` along
//! all those arcs and minimizes it.

use rayon::prelude::*;

use crate::constant::{ConstantBounds, EdgeMinimum, RegretSolution};
use crate::coverage::{AffineDemand, CoverageTables};
use crate::envelope::{minimize_envelope_on_arcs, upper_envelope_arcs, Arc};
use crate::error::{Error, Result};
use crate::net::{EdgeId, Network, PointOnEdge, EPS};
use crate::poly;

/// Per-edge linear demand bounds `lb_e(t) = a + b t <= ub_e(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBounds {
    pub lb: Vec<AffineDemand>,
    pub ub: Vec<AffineDemand>,
}

impl LinearBounds {
    pub fn new(lb: Vec<AffineDemand>, ub: Vec<AffineDemand>) -> Result<Self> {
        if lb.len() != ub.len() {
            return Err(Error::input("demand bound vectors differ in length"));
        }
        for (e, (l, u)) in lb.iter().zip(ub.iter()).enumerate() {
            for t in [0.0, 1.0] {
                if l.eval(t) < -EPS {
                    return Err(Error::input(format!("edge {e}: lb({t}) < 0")));
                }
                if u.eval(t) < l.eval(t) - EPS {
                    return Err(Error::input(format!("edge {e}: ub({t}) < lb({t})")));
                }
            }
        }
        Ok(LinearBounds { lb, ub })
    }

    pub fn edge_count(&self) -> usize {
        self.lb.len()
    }

    pub fn from_constant(bounds: &ConstantBounds) -> Self {
        LinearBounds {
            lb: bounds.lb.iter().map(|&a| AffineDemand::constant(a)).collect(),
            ub: bounds.ub.iter().map(|&a| AffineDemand::constant(a)).collect(),
        }
    }
}

/// Corner of the feasible parallelogram `F_e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    /// `(a_lb, b_lb)`: the lower bound function.
    Lower,
    /// `(a_lb, a_ub + b_ub - a_lb)`: from `lb(0)` up to `ub(1)`.
    Rising,
    /// `(a_ub, b_ub)`: the upper bound function.
    Upper,
    /// `(a_ub, a_lb + b_lb - a_ub)`: from `ub(0)` down to `lb(1)`.
    Falling,
}

impl Corner {
    pub fn index(self) -> usize {
        match self {
            Corner::Lower => 0,
            Corner::Rising => 1,
            Corner::Upper => 2,
            Corner::Falling => 3,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Corner::Lower => "lb",
            Corner::Rising => "rise",
            Corner::Upper => "ub",
            Corner::Falling => "fall",
        }
    }
}

/// The four corners of `F_e` as (intercept, slope) pairs, in the order
/// Lower, Rising, Upper, Falling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelogramCorners {
    pub pts: [(f64, f64); 4],
}

impl ParallelogramCorners {
    pub fn from_bounds(lb: AffineDemand, ub: AffineDemand) -> Self {
        ParallelogramCorners {
            pts: [
                (lb.a, lb.b),
                (lb.a, ub.a + ub.b - lb.a),
                (ub.a, ub.b),
                (ub.a, lb.a + lb.b - ub.a),
            ],
        }
    }

    pub fn corner(&self, c: Corner) -> (f64, f64) {
        self.pts[c.index()]
    }
}

/// Selects the corner of `F_e` maximizing `a*dc + b/2*dcbar` by the sign
/// conditions on `dc`, `dcbar` and `dcbar - 2 dc`; returns the corner and
/// its objective value.
pub fn worst_case_corner(dc: f64, dcbar: f64, corners: &ParallelogramCorners) -> (Corner, f64) {
    let diff = dcbar - 2.0 * dc;
    let corner = if dc <= 0.0 && dcbar <= 0.0 && diff >= 0.0 {
        Corner::Lower
    } else if (dc >= 0.0 && dcbar >= 0.0 && diff >= 0.0) || (dc <= 0.0 && dcbar >= 0.0) {
        Corner::Rising
    } else if dc >= 0.0 && dcbar >= 0.0 {
        Corner::Upper
    } else {
        Corner::Falling
    };
    let (a, b) = corners.corner(corner);
    (corner, a * dc + 0.5 * b * dcbar)
}

/// Shared context for the linear solver.
pub struct LinearCtx<'a> {
    pub tables: CoverageTables<'a>,
    pub bounds: &'a LinearBounds,
    pub corners: Vec<ParallelogramCorners>,
}

impl<'a> LinearCtx<'a> {
    pub fn build(net: &'a Network, r: f64, bounds: &'a LinearBounds) -> Result<Self> {
        if bounds.edge_count() != net.edge_count() {
            return Err(Error::input("demand bounds do not match the edge count"));
        }
        let tables = CoverageTables::build(net, r)?;
        let corners = bounds
            .lb
            .iter()
            .zip(bounds.ub.iter())
            .map(|(&l, &u)| ParallelogramCorners::from_bounds(l, u))
            .collect();
        Ok(LinearCtx { tables, bounds, corners })
    }

    /// Exact `r(x, y)` for a concrete pair of points.
    pub fn regret_pair(&self, x: PointOnEdge, y: PointOnEdge) -> f64 {
        let mut total = 0.0;
        for e in 0..self.tables.net.edge_count() {
            let dc = self.tables.c_at(e, y) - self.tables.c_at(e, x);
            let dcbar = self.tables.cbar_at(e, y) - self.tables.cbar_at(e, x);
            total += worst_case_corner(dc, dcbar, &self.corners[e]).1;
        }
        total
    }

    /// Worst-case realisation per edge for a fixed pair.
    pub fn worst_realisation(&self, x: PointOnEdge, y: PointOnEdge) -> Vec<AffineDemand> {
        (0..self.tables.net.edge_count())
            .map(|e| {
                let dc = self.tables.c_at(e, y) - self.tables.c_at(e, x);
                let dcbar = self.tables.cbar_at(e, y) - self.tables.cbar_at(e, x);
                let (corner, _) = worst_case_corner(dc, dcbar, &self.corners[e]);
                let (a, b) = self.corners[e].corner(corner);
                AffineDemand { a, b }
            })
            .collect()
    }
}

/// Separable quadratic `k0 + kx tx + kxx tx^2 + ky ty + kyy ty^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadXY {
    pub k0: f64,
    pub kx: f64,
    pub kxx: f64,
    pub ky: f64,
    pub kyy: f64,
}

impl QuadXY {
    pub fn eval(&self, tx: f64, ty: f64) -> f64 {
        self.k0 + tx * (self.kx + tx * self.kxx) + ty * (self.ky + ty * self.kyy)
    }

    /// Exact value range over a rectangle (the parts are separable).
    fn range_on(&self, rect: &RectBox) -> (f64, f64) {
        let (xmin, xmax) = poly::quad_range(0.0, self.kx, self.kxx, rect.xa, rect.xb);
        let (ymin, ymax) = poly::quad_range(0.0, self.ky, self.kyy, rect.ya, rect.yb);
        (self.k0 + xmin + ymin, self.k0 + xmax + ymax)
    }

    /// Univariate coefficients in `tx` after fixing `ty`.
    fn at_fixed_y(&self, ty: f64) -> [f64; 3] {
        [self.k0 + ty * (self.ky + ty * self.kyy), self.kx, self.kxx]
    }

    /// Univariate coefficients in `ty` after fixing `tx`.
    fn at_fixed_x(&self, tx: f64) -> [f64; 3] {
        [self.k0 + tx * (self.kx + tx * self.kxx), self.ky, self.kyy]
    }
}

#[derive(Debug, Clone, Copy)]
struct RectBox {
    xa: f64,
    xb: f64,
    ya: f64,
    yb: f64,
}

/// A curve solvable for `ty` given `tx`.
#[derive(Debug, Clone, PartialEq)]
pub enum YCurve {
    Const(f64),
    /// `ty = c0 + c1 tx + c2 tx^2`
    Poly([f64; 3]),
    /// `ty = (-ky + sign*sqrt(disc(tx))) / (2 kyy)`
    Sqrt { ky: f64, kyy: f64, disc: [f64; 3], sign: f64 },
}

impl YCurve {
    pub fn y_at(&self, tx: f64) -> f64 {
        match self {
            YCurve::Const(y) => *y,
            YCurve::Poly(c) => c[0] + tx * (c[1] + tx * c[2]),
            YCurve::Sqrt { ky, kyy, disc, sign } => {
                let d = (disc[0] + tx * (disc[1] + tx * disc[2])).max(0.0);
                (-ky + sign * d.sqrt()) / (2.0 * kyy)
            }
        }
    }
}

impl std::fmt::Display for YCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            YCurve::Const(y) => write!(f, "y={y:.6}"),
            YCurve::Poly(c) => write!(f, "y={:.6}+{:.6}x+{:.6}x^2", c[0], c[1], c[2]),
            YCurve::Sqrt { ky, kyy, disc, sign } => write!(
                f,
                "y=(-({ky:.6}){}sqrt({:.6}+{:.6}x+{:.6}x^2))/(2*{kyy:.6})",
                if *sign > 0.0 { "+" } else { "-" },
                disc[0],
                disc[1],
                disc[2]
            ),
        }
    }
}

/// An x-monotone boundary piece: a curve restricted to an x-interval.
#[derive(Debug, Clone)]
pub struct CurvePiece {
    pub curve: YCurve,
    pub lo: f64,
    pub hi: f64,
}

/// One cell of the subdivision of `e_x x e_y`: a vertical slab bounded below
/// and above by boundary curves, with the per-edge worst-case corner and the
/// quadratic form of `r` fixed on it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub x_lo: f64,
    pub x_hi: f64,
    pub lower: YCurve,
    pub upper: YCurve,
    pub corners: Vec<Corner>,
    pub quad: QuadXY,
    /// Probe point used to fix corners and the quadratic.
    pub probe: (f64, f64),
}

/// Zero-set pieces of a `QuadXY` within a rectangle, plus abscissae of
/// degenerate vertical-line components.
fn extract_branches(q: &QuadXY, rect: &RectBox) -> (Vec<CurvePiece>, Vec<f64>) {
    const ZERO: f64 = 1e-12;
    let mut pieces = Vec::new();
    let mut splits = Vec::new();
    let cx = [q.k0, q.kx, q.kxx];
    if q.kyy.abs() <= ZERO && q.ky.abs() <= ZERO {
        // no ty dependence: vertical lines at the roots in tx
        splits.extend(poly::real_roots_in(&cx, rect.xa, rect.xb));
        return (pieces, splits);
    }
    if q.kyy.abs() <= ZERO {
        let s = -1.0 / q.ky;
        pieces.push(CurvePiece {
            curve: YCurve::Poly([cx[0] * s, cx[1] * s, cx[2] * s]),
            lo: rect.xa,
            hi: rect.xb,
        });
        return (pieces, splits);
    }
    // disc(tx) = ky^2 - 4 kyy (k0 + kx tx + kxx tx^2)
    let disc = [
        q.ky * q.ky - 4.0 * q.kyy * q.k0,
        -4.0 * q.kyy * q.kx,
        -4.0 * q.kyy * q.kxx,
    ];
    let mut cuts = vec![rect.xa, rect.xb];
    cuts.extend(poly::real_roots_in(&disc, rect.xa, rect.xb));
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 1e-12 {
            continue;
        }
        if poly::eval(&disc, 0.5 * (lo + hi)) <= 1e-14 {
            continue;
        }
        for sign in [-1.0, 1.0] {
            pieces.push(CurvePiece {
                curve: YCurve::Sqrt { ky: q.ky, kyy: q.kyy, disc, sign },
                lo,
                hi,
            });
        }
    }
    (pieces, splits)
}

/// Resultant in `ty` of two separable conics, as a polynomial in `tx`;
/// its real roots contain every crossing abscissa of the two curves.
fn crossing_poly(q1: &QuadXY, q2: &QuadXY) -> Vec<f64> {
    let c1 = [q1.k0, q1.kx, q1.kxx];
    let c2 = [q2.k0, q2.kx, q2.kxx];
    let scaled = |c: &[f64; 3], s: f64| [c[0] * s, c[1] * s, c[2] * s];
    if q1.kyy.abs() <= 1e-12 && q2.kyy.abs() <= 1e-12 {
        // two lines in ty: b1 c2 - b2 c1
        return poly::sub_scaled(&scaled(&c2, q1.ky), &c1, q2.ky);
    }
    // (a1 c2 - a2 c1)^2 - (a1 b2 - a2 b1)(b1 c2 - b2 c1)
    let u = poly::sub_scaled(&scaled(&c2, q1.kyy), &c1, q2.kyy);
    let v = poly::sub_scaled(&scaled(&c2, q1.ky), &c1, q2.ky);
    poly::sub_scaled(&poly::mul(&u, &u), &v, q1.kyy * q2.ky - q2.kyy * q1.ky)
}

/// Per-edge condition polynomials on one grid rectangle.
struct EdgeConditions {
    /// `dc`, `dcbar`, `dcbar - 2 dc`.
    polys: [QuadXY; 3],
    cx: [f64; 2],
    cbx: [f64; 3],
    cy: [f64; 2],
    cby: [f64; 3],
}

fn edge_conditions(
    tables: &CoverageTables,
    e: EdgeId,
    e_x: EdgeId,
    e_y: EdgeId,
    rect: &RectBox,
) -> EdgeConditions {
    let xm = 0.5 * (rect.xa + rect.xb);
    let ym = 0.5 * (rect.ya + rect.yb);
    let px = tables.c_profile(e_x, e).piece_at(xm).coef;
    let pbx = tables.cbar_profile(e_x, e).piece_at(xm).coef;
    let py = tables.c_profile(e_y, e).piece_at(ym).coef;
    let pby = tables.cbar_profile(e_y, e).piece_at(ym).coef;
    let dc = QuadXY { k0: py[0] - px[0], kx: -px[1], kxx: 0.0, ky: py[1], kyy: 0.0 };
    let dcbar =
        QuadXY { k0: pby[0] - pbx[0], kx: -pbx[1], kxx: -pbx[2], ky: pby[1], kyy: pby[2] };
    let diff = QuadXY {
        k0: dcbar.k0 - 2.0 * dc.k0,
        kx: dcbar.kx - 2.0 * dc.kx,
        kxx: dcbar.kxx,
        ky: dcbar.ky - 2.0 * dc.ky,
        kyy: dcbar.kyy,
    };
    EdgeConditions {
        polys: [dc, dcbar, diff],
        cx: [px[0], px[1]],
        cbx: pbx,
        cy: [py[0], py[1]],
        cby: pby,
    }
}

/// Subdivides the square `e_x x e_y` into cells with a unique quadratic
/// representation of `r(x, y)`. The grid rectangles come from the partition
/// points of both edges; within a rectangle the arrangement of the active
/// sign curves is built by sorting curve values along vertical probe lines
/// between consecutive critical abscissae.
pub fn cell_subdivision_with(ctx: &LinearCtx, e_x: EdgeId, e_y: EdgeId) -> Result<Vec<Cell>> {
    let m = ctx.tables.net.edge_count();
    let x_cuts = ctx.tables.pp.cuts(e_x);
    let y_cuts = ctx.tables.pp.cuts(e_y);
    let mut cells = Vec::new();

    for wy in y_cuts.windows(2) {
        let (ya, yb) = (wy[0], wy[1]);
        if yb - ya <= EPS {
            continue;
        }
        for wx in x_cuts.windows(2) {
            let (xa, xb) = (wx[0], wx[1]);
            if xb - xa <= EPS {
                continue;
            }
            let rect = RectBox { xa, xb, ya, yb };
            let conds: Vec<EdgeConditions> =
                (0..m).map(|e| edge_conditions(&ctx.tables, e, e_x, e_y, &rect)).collect();

            // sign curves that actually change sign within this rectangle
            let mut branches: Vec<(QuadXY, CurvePiece)> = Vec::new();
            let mut splits: Vec<f64> = vec![xa, xb];
            for cond in &conds {
                for q in &cond.polys {
                    let (lo_val, hi_val) = q.range_on(&rect);
                    if lo_val > 1e-12 || hi_val < -1e-12 || hi_val - lo_val <= 1e-12 {
                        continue;
                    }
                    let (pieces, vertical) = extract_branches(q, &rect);
                    splits.extend(vertical);
                    for p in pieces {
                        branches.push((*q, p));
                    }
                }
            }

            // critical abscissae: branch domain ends (folds), crossings with
            // the rectangle's horizontal edges, and mutual curve crossings
            for (q, p) in &branches {
                splits.push(p.lo);
                splits.push(p.hi);
                for y0 in [ya, yb] {
                    splits.extend(poly::real_roots_in(&q.at_fixed_y(y0), p.lo, p.hi));
                }
            }
            for i in 0..branches.len() {
                for j in i + 1..branches.len() {
                    let (qi, pi) = &branches[i];
                    let (qj, pj) = &branches[j];
                    if qi == qj {
                        continue;
                    }
                    let lo = pi.lo.max(pj.lo);
                    let hi = pi.hi.min(pj.hi);
                    if lo >= hi {
                        continue;
                    }
                    splits.extend(poly::real_roots_in(&crossing_poly(qi, qj), lo, hi));
                }
            }
            splits.retain(|t| *t >= xa - 1e-12 && *t <= xb + 1e-12);
            splits.sort_by(|a, b| a.total_cmp(b));
            splits.dedup_by(|a, b| (*a - *b).abs() <= 1e-11);

            for ws in splits.windows(2) {
                let (u, v) = (ws[0], ws[1]);
                if v - u <= 1e-11 {
                    continue;
                }
                let xm = 0.5 * (u + v);
                let mut bounds: Vec<(f64, YCurve)> = vec![(ya, YCurve::Const(ya))];
                for (_, p) in &branches {
                    if p.lo <= xm && xm <= p.hi {
                        let y = p.curve.y_at(xm);
                        if y > ya + 1e-11 && y < yb - 1e-11 {
                            bounds.push((y, p.curve.clone()));
                        }
                    }
                }
                bounds.push((yb, YCurve::Const(yb)));
                bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
                bounds.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-11);

                for bi in 0..bounds.len() - 1 {
                    let (ylo, yhi) = (bounds[bi].0, bounds[bi + 1].0);
                    if yhi - ylo <= 1e-11 {
                        continue;
                    }
                    let ym = 0.5 * (ylo + yhi);
                    let mut corners = Vec::with_capacity(m);
                    let mut quad = QuadXY::default();
                    for (e, cond) in conds.iter().enumerate() {
                        let dc = cond.polys[0].eval(xm, ym);
                        let dcbar = cond.polys[1].eval(xm, ym);
                        let (corner, _) = worst_case_corner(dc, dcbar, &ctx.corners[e]);
                        let (a, b) = ctx.corners[e].corner(corner);
                        corners.push(corner);
                        quad.k0 +=
                            a * (cond.cy[0] - cond.cx[0]) + 0.5 * b * (cond.cby[0] - cond.cbx[0]);
                        quad.kx += -a * cond.cx[1] - 0.5 * b * cond.cbx[1];
                        quad.kxx += -0.5 * b * cond.cbx[2];
                        quad.ky += a * cond.cy[1] + 0.5 * b * cond.cby[1];
                        quad.kyy += 0.5 * b * cond.cby[2];
                    }
                    cells.push(Cell {
                        x_lo: u,
                        x_hi: v,
                        lower: bounds[bi].1.clone(),
                        upper: bounds[bi + 1].1.clone(),
                        corners,
                        quad,
                        probe: (xm, ym),
                    });
                }
            }
        }
    }
    Ok(cells)
}

/// Public form of the cell subdivision.
pub fn cell_subdivision(
    net: &Network,
    r: f64,
    bounds: &LinearBounds,
    e_x: EdgeId,
    e_y: EdgeId,
) -> Result<Vec<Cell>> {
    let ctx = LinearCtx::build(net, r, bounds)?;
    cell_subdivision_with(&ctx, e_x, e_y)
}

/// An arc of the candidate set for one square: a curve piece on `e_x x e_y`
/// along which the regret can be evaluated as a function of `tx`.
#[derive(Debug, Clone)]
pub struct ArcSpec {
    pub e_y: EdgeId,
    pub piece: CurvePiece,
}

/// Candidate arcs for the square `e_x x e_y`: every cell boundary
/// (horizontal grid lines and sign-curve branches) plus the horizontal
/// stationary line of each cell that is concave in `ty`, clipped to the
/// cell.
pub fn candidate_arcs_with(ctx: &LinearCtx, e_x: EdgeId, e_y: EdgeId) -> Result<Vec<ArcSpec>> {
    let cells = cell_subdivision_with(ctx, e_x, e_y)?;
    let mut arcs: Vec<ArcSpec> = Vec::new();

    for cut in ctx.tables.pp.cuts(e_y) {
        arcs.push(ArcSpec {
            e_y,
            piece: CurvePiece { curve: YCurve::Const(cut), lo: 0.0, hi: 1.0 },
        });
    }

    for cell in &cells {
        for curve in [&cell.lower, &cell.upper] {
            if !matches!(curve, YCurve::Const(_)) {
                arcs.push(ArcSpec {
                    e_y,
                    piece: CurvePiece { curve: curve.clone(), lo: cell.x_lo, hi: cell.x_hi },
                });
            }
        }
        if cell.quad.kyy < -1e-12 {
            let ty = -cell.quad.ky / (2.0 * cell.quad.kyy);
            for (lo, hi) in clip_horizontal_to_cell(cell, ty) {
                arcs.push(ArcSpec {
                    e_y,
                    piece: CurvePiece { curve: YCurve::Const(ty), lo, hi },
                });
            }
        }
    }
    Ok(arcs)
}

/// Public form of the candidate arcs.
pub fn candidate_arcs(
    net: &Network,
    r: f64,
    bounds: &LinearBounds,
    e_x: EdgeId,
    e_y: EdgeId,
) -> Result<Vec<ArcSpec>> {
    let ctx = LinearCtx::build(net, r, bounds)?;
    candidate_arcs_with(&ctx, e_x, e_y)
}

/// Sub-intervals of the cell's slab on which `lower <= ty <= upper`,
/// found by bracketing the crossings of the bound curves with `ty`.
fn clip_horizontal_to_cell(cell: &Cell, ty: f64) -> Vec<(f64, f64)> {
    const SAMPLES: usize = 16;
    let mut cuts = vec![cell.x_lo, cell.x_hi];
    for bound in [&cell.lower, &cell.upper] {
        let g = |tx: f64| bound.y_at(tx) - ty;
        let mut prev = (cell.x_lo, g(cell.x_lo));
        for i in 1..=SAMPLES {
            let tx = cell.x_lo + (cell.x_hi - cell.x_lo) * i as f64 / SAMPLES as f64;
            let val = g(tx);
            if (prev.1 < 0.0) != (val < 0.0) {
                let (mut a, mut b) = (prev.0, tx);
                let mut ga = prev.1;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let gm = g(mid);
                    if (ga < 0.0) == (gm < 0.0) {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                cuts.push(0.5 * (a + b));
            }
            prev = (tx, val);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 1e-12 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if cell.lower.y_at(mid) - 1e-12 <= ty && ty <= cell.upper.y_at(mid) + 1e-12 {
            out.push((lo, hi));
        }
    }
    out
}

struct HostOutcome {
    minimum: EdgeMinimum,
    alternative: PointOnEdge,
}

/// All candidate arcs for one host edge, across every alternative edge,
/// paired with their evaluable regret-along-the-arc functions.
pub fn host_arcs<'c>(ctx: &'c LinearCtx, e_x: EdgeId) -> Result<(Vec<ArcSpec>, Vec<Arc<'c>>)> {
    let m = ctx.tables.net.edge_count();
    let mut specs: Vec<ArcSpec> = Vec::new();
    for e_y in 0..m {
        specs.extend(candidate_arcs_with(ctx, e_x, e_y)?);
    }
    let arcs: Vec<Arc> = specs
        .iter()
        .enumerate()
        .map(|(idx, spec)| {
            let e_y = spec.e_y;
            let curve = spec.piece.curve.clone();
            Arc::new(spec.piece.lo, spec.piece.hi, idx, move |tx| {
                let ty = curve.y_at(tx).clamp(0.0, 1.0);
                ctx.regret_pair(PointOnEdge::new(e_x, tx), PointOnEdge::new(e_y, ty))
            })
        })
        .collect();
    Ok((specs, arcs))
}

fn solve_host(ctx: &LinearCtx, e_x: EdgeId, tol: f64) -> Result<HostOutcome> {
    let (specs, arcs) = host_arcs(ctx, e_x)?;
    let env = upper_envelope_arcs(&arcs, tol)?;
    let (t, value, label) = minimize_envelope_on_arcs(&env, &arcs, tol);
    let spec = &specs[label];
    let alternative = PointOnEdge::new(spec.e_y, spec.piece.curve.y_at(t).clamp(0.0, 1.0));
    Ok(HostOutcome { minimum: EdgeMinimum { edge: e_x, t, value }, alternative })
}

/// Minimizes the maximal regret over the whole network (linear demand).
pub fn solve_linear(
    net: &Network,
    r: f64,
    bounds: &LinearBounds,
    tol: f64,
) -> Result<RegretSolution> {
    if !(tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let ctx = LinearCtx::build(net, r, bounds)?;
    let outcomes: Vec<Result<HostOutcome>> = (0..net.edge_count())
        .into_par_iter()
        .map(|e_x| solve_host(&ctx, e_x, tol))
        .collect();
    let mut per_edge = Vec::with_capacity(net.edge_count());
    let mut best: Option<HostOutcome> = None;
    for outcome in outcomes {
        let outcome = outcome?;
        let better = match &best {
            None => true,
            Some(b) => {
                outcome.minimum.value < b.minimum.value - 1e-12
                    || ((outcome.minimum.value - b.minimum.value).abs() <= 1e-12
                        && (outcome.minimum.edge, outcome.minimum.t)
                            < (b.minimum.edge, b.minimum.t))
            }
        };
        per_edge.push(outcome.minimum);
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one edge");
    let optimum = PointOnEdge::new(best.minimum.edge, best.minimum.t);
    let worst_demand = ctx.worst_realisation(optimum, best.alternative);
    Ok(RegretSolution {
        optimum,
        regret: best.minimum.value,
        per_edge,
        alternative: best.alternative,
        worst_demand,
    })
}

/// Maximal regret of a fixed `x` under linear demand, by exact quadratic
/// maximization of `r(x, .)` along every edge: on each segment the vertical
/// line at `x` cuts through the subdivision, the univariate quadratic is
/// maximized over its endpoints and stationary point.
pub fn max_regret_at_linear_with(ctx: &LinearCtx, x: PointOnEdge) -> (f64, PointOnEdge) {
    let m = ctx.tables.net.edge_count();
    let mut best = (f64::NEG_INFINITY, x);
    for e_y in 0..m {
        let y_cuts = ctx.tables.pp.cuts(e_y);
        for wy in y_cuts.windows(2) {
            let (ya, yb) = (wy[0], wy[1]);
            if yb - ya <= EPS {
                continue;
            }
            let mut cuts = vec![ya, yb];
            let rect = RectBox { xa: x.t, xb: x.t, ya, yb };
            for e in 0..m {
                let cond = edge_conditions(&ctx.tables, e, x.edge, e_y, &rect);
                for q in &cond.polys {
                    cuts.extend(poly::real_roots_in(&q.at_fixed_x(x.t), ya, yb));
                }
            }
            cuts.sort_by(|a, b| a.total_cmp(b));
            cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi - lo <= 1e-12 {
                    continue;
                }
                // r(x, .) is a single quadratic on [lo, hi]; recover it from
                // three samples and check the stationary point as well
                let mid = 0.5 * (lo + hi);
                let f = |ty: f64| ctx.regret_pair(x, PointOnEdge::new(e_y, ty));
                let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
                let a2 = 2.0 * (flo - 2.0 * fmid + fhi) / ((hi - lo) * (hi - lo));
                let mut candidates = vec![(flo, lo), (fhi, hi)];
                if a2 < -1e-12 {
                    let slope_mid = (fhi - flo) / (hi - lo);
                    let vertex = mid - slope_mid / (2.0 * a2);
                    if vertex > lo && vertex < hi {
                        candidates.push((f(vertex), vertex));
                    }
                }
                for (v, ty) in candidates {
                    if v > best.0 + 1e-15 {
                        best = (v, PointOnEdge::new(e_y, ty));
                    }
                }
            }
        }
    }
    best
}

/// Standalone maximal-regret evaluation for linear demand.
pub fn max_regret_at_linear(
    net: &Network,
    r: f64,
    bounds: &LinearBounds,
    x: PointOnEdge,
) -> Result<(f64, PointOnEdge)> {
    let ctx = LinearCtx::build(net, r, bounds)?;
    Ok(max_regret_at_linear_with(&ctx, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn triangle() -> Network {
        Network::new(3, &[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 3.0)]).unwrap()
    }

    fn example_bounds() -> LinearBounds {
        LinearBounds::new(
            vec![
                AffineDemand { a: 3.0, b: -3.0 },
                AffineDemand { a: 0.0, b: 3.0 },
                AffineDemand { a: 2.0, b: 3.0 },
            ],
            vec![
                AffineDemand { a: 15.0, b: 7.0 },
                AffineDemand { a: 7.0, b: 3.0 },
                AffineDemand { a: 8.0, b: 10.0 },
            ],
        )
        .unwrap()
    }

    const E12: EdgeId = 0;
    const E23: EdgeId = 1;
    const E13: EdgeId = 2;

    #[test]
    fn bounds_validation() {
        assert!(LinearBounds::new(
            vec![AffineDemand { a: 1.0, b: -2.0 }],
            vec![AffineDemand { a: 3.0, b: 0.0 }],
        )
        .is_err());
        assert!(LinearBounds::new(
            vec![AffineDemand { a: 1.0, b: 0.0 }],
            vec![AffineDemand { a: 2.0, b: -1.5 }],
        )
        .is_err());
    }

    #[test]
    fn corner_table_simple_cases() {
        let c = ParallelogramCorners::from_bounds(
            AffineDemand { a: 1.0, b: 1.0 },
            AffineDemand { a: 3.0, b: 2.0 },
        );
        // dc < 0, dcbar > 0: rising corner (a_lb, a_ub + b_ub - a_lb)
        let (corner, _) = worst_case_corner(-0.5, 0.5, &c);
        assert_eq!(corner, Corner::Rising);
        assert_eq!(c.corner(corner), (1.0, 4.0));
        // dc = dcbar = 0: lower corner by tie-break, value 0
        let (corner, v) = worst_case_corner(0.0, 0.0, &c);
        assert_eq!(corner, Corner::Lower);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn corner_table_matches_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let a_lb: f64 = rng.gen_range(0.0..5.0);
            let a_ub: f64 = a_lb + rng.gen_range(0.0..5.0);
            let b_lb: f64 = rng.gen_range(-a_lb..5.0);
            let b_ub: f64 = (a_lb + b_lb - a_ub) + rng.gen_range(0.0..6.0);
            let c = ParallelogramCorners::from_bounds(
                AffineDemand { a: a_lb, b: b_lb },
                AffineDemand { a: a_ub, b: b_ub },
            );
            let dc: f64 = rng.gen_range(-1.0..1.0);
            let dcbar: f64 = rng.gen_range(-1.0..1.0);
            let (_, got) = worst_case_corner(dc, dcbar, &c);
            let want = c
                .pts
                .iter()
                .map(|(a, b)| a * dc + 0.5 * b * dcbar)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
        }
    }

    #[test]
    fn example_regret_values_for_edge_12() {
        // r_[1,2] on [1,2]x[2,3]: -6ty + 6ty^2 below ty=1/2, -3/2 above
        let net = triangle();
        let bounds = example_bounds();
        let ctx = LinearCtx::build(&net, 1.0, &bounds).unwrap();
        let x = PointOnEdge::new(E12, 0.3);
        for (ty, want) in [(0.2, -6.0 * 0.2 + 6.0 * 0.04), (0.7, -1.5), (0.5, -1.5)] {
            let y = PointOnEdge::new(E23, ty);
            let dc = ctx.tables.c_at(E12, y) - ctx.tables.c_at(E12, x);
            let dcbar = ctx.tables.cbar_at(E12, y) - ctx.tables.cbar_at(E12, x);
            let (_, v) = worst_case_corner(dc, dcbar, &ctx.corners[E12]);
            assert!((v - want).abs() < 1e-9, "ty={ty}: {v} vs {want}");
        }
    }

    #[test]
    fn example_square_has_parametric_curve_cells() {
        // the sign curve for edge [2,3] on [1,2]x[2,3] is
        // ty = 3/2 - sqrt(4 tx - tx^2)/2 for tx in [2 - sqrt(3), 1]
        let net = triangle();
        let bounds = example_bounds();
        let cells = cell_subdivision(&net, 1.0, &bounds, E12, E23).unwrap();
        assert!(!cells.is_empty());
        let tx = 0.9_f64;
        let want = 1.5 - 0.5 * (4.0 * tx - tx * tx).sqrt();
        let found = cells.iter().any(|c| {
            [&c.lower, &c.upper].iter().any(|b| {
                matches!(b, YCurve::Sqrt { .. }) && (b.y_at(tx) - want).abs() < 1e-7
            })
        });
        assert!(found, "parametric boundary curve not found at tx={tx}");
    }

    #[test]
    fn cell_quadratics_match_pointwise_probes() {
        let net = triangle();
        let bounds = example_bounds();
        let ctx = LinearCtx::build(&net, 1.0, &bounds).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for e_x in 0..3 {
            for e_y in 0..3 {
                let cells = cell_subdivision_with(&ctx, e_x, e_y).unwrap();
                for cell in &cells {
                    for _ in 0..5 {
                        let tx = rng.gen_range(cell.x_lo..=cell.x_hi);
                        let ylo = cell.lower.y_at(tx);
                        let yhi = cell.upper.y_at(tx);
                        if yhi - ylo < 1e-9 {
                            continue;
                        }
                        let ty = rng.gen_range(ylo.max(0.0)..=yhi.min(1.0));
                        let want =
                            ctx.regret_pair(PointOnEdge::new(e_x, tx), PointOnEdge::new(e_y, ty));
                        let got = cell.quad.eval(tx, ty);
                        assert!(
                            (got - want).abs() < 1e-7,
                            "cell ({e_x},{e_y}) at ({tx},{ty}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn no_cross_term_in_cells() {
        let net = triangle();
        let bounds = example_bounds();
        let ctx = LinearCtx::build(&net, 1.0, &bounds).unwrap();
        let cells = cell_subdivision_with(&ctx, E12, E23).unwrap();
        for cell in cells.iter() {
            let (xm, ym) = cell.probe;
            // second differences are exact for quadratics, so a wide step
            // keeps rounding noise far below the threshold
            let h = 0.1;
            let q = &cell.quad;
            let mixed = (q.eval(xm + h, ym + h) - q.eval(xm + h, ym - h)
                - q.eval(xm - h, ym + h)
                + q.eval(xm - h, ym - h))
                / (4.0 * h * h);
            assert!(mixed.abs() < 1e-9);
        }
    }

    #[test]
    fn convex_cells_get_no_stationary_arc() {
        let net = triangle();
        let bounds = example_bounds();
        let ctx = LinearCtx::build(&net, 1.0, &bounds).unwrap();
        let cells = cell_subdivision_with(&ctx, E12, E23).unwrap();
        let arcs = candidate_arcs_with(&ctx, E12, E23).unwrap();
        // stationary arcs only exist where some cell is concave in ty
        let n_concave = cells.iter().filter(|c| c.quad.kyy < -1e-12).count();
        let n_stationary = arcs
            .iter()
            .filter(|a| {
                matches!(a.piece.curve, YCurve::Const(y)
                    if !ctx.tables.pp.cuts(E23).iter().any(|c| (c - y).abs() < 1e-12))
            })
            .count();
        if n_concave == 0 {
            assert_eq!(n_stationary, 0);
        }
    }

    #[test]
    fn example_solution() {
        let net = triangle();
        let bounds = example_bounds();
        let sol = solve_linear(&net, 1.0, &bounds, 1e-6).unwrap();
        assert_eq!(sol.optimum.edge, E13, "optimum on wrong edge: {:?}", sol.optimum);
        assert!((sol.optimum.t - 0.0533).abs() < 5e-4, "t* = {}", sol.optimum.t);
        assert!((sol.regret - 6.3055).abs() < 5e-4, "r* = {}", sol.regret);
        let m12 = sol.per_edge.iter().find(|m| m.edge == E12).unwrap();
        assert!((m12.t - 0.1572).abs() < 5e-4, "t12 = {}", m12.t);
        assert!((m12.value - 6.4836).abs() < 5e-4, "r12 = {}", m12.value);
        let m23 = sol.per_edge.iter().find(|m| m.edge == E23).unwrap();
        assert!(m23.t.abs() < 5e-4, "t23 = {}", m23.t);
        assert!((m23.value - 7.9023).abs() < 5e-4, "r23 = {}", m23.value);
    }

    #[test]
    fn max_regret_at_linear_examples() {
        let net = triangle();
        let bounds = example_bounds();
        // deterministic-mean optimum is vertex 2 with maximal regret 569/72
        let (r_v2, _) =
            max_regret_at_linear(&net, 1.0, &bounds, PointOnEdge::new(E12, 1.0)).unwrap();
        assert!((r_v2 - 569.0 / 72.0).abs() < 1e-3, "r(v2) = {r_v2}");
        // self-consistency at the solver optimum
        let sol = solve_linear(&net, 1.0, &bounds, 1e-6).unwrap();
        let (r_opt, _) = max_regret_at_linear(&net, 1.0, &bounds, sol.optimum).unwrap();
        assert!((r_opt - sol.regret).abs() < 1e-4, "{r_opt} vs {}", sol.regret);
    }

    #[test]
    fn degenerate_linear_matches_constant() {
        let net = triangle();
        let cbounds =
            crate::constant::ConstantBounds::new(vec![3.0, 1.0, 2.0], vec![15.0, 7.0, 8.0])
                .unwrap();
        let lbounds = LinearBounds::from_constant(&cbounds);
        let lin = solve_linear(&net, 1.0, &lbounds, 1e-6).unwrap();
        let con = crate::constant::solve_constant(&net, 1.0, &cbounds).unwrap();
        assert!((lin.regret - con.regret).abs() < 1e-5);
        assert_eq!(lin.optimum.edge, con.optimum.edge);
        assert!((lin.optimum.t - con.optimum.t).abs() < 1e-4);
    }

    #[test]
    fn regret_nonnegative_at_random_points() {
        let net = triangle();
        let bounds = example_bounds();
        let ctx = LinearCtx::build(&net, 1.0, &bounds).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = PointOnEdge::new(rng.gen_range(0..3), rng.gen_range(0.0..1.0));
            let (r, _) = max_regret_at_linear_with(&ctx, x);
            assert!(r >= -1e-9, "negative regret {r} at {x:?}");
        }
    }
}
