//! Upper envelopes of affine segments (exact, divide-and-conquer) and of
//! parametrized x-monotone arcs (adaptive sampling with exact local
//! refinement), plus envelope minimization. This is the engine behind both
//! solvers.

use crate::error::{Error, Result};
use crate::net::EPS;

/// An affine segment `p + q*t` on `[lo, hi]`, labelled by its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub p: f64,
    pub q: f64,
    pub label: usize,
}

impl Segment {
    pub fn eval(&self, t: f64) -> f64 {
        self.p + self.q * t
    }
}

/// One piece of an envelope with the label of the winning input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvPiece {
    pub lo: f64,
    pub hi: f64,
    pub p: f64,
    pub q: f64,
    pub label: usize,
}

impl EnvPiece {
    pub fn eval(&self, t: f64) -> f64 {
        self.p + self.q * t
    }
}

/// Piecewise-affine upper envelope; pieces are ordered and disjoint, gaps
/// mean the envelope is undefined (-inf) there.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFn {
    pieces: Vec<EnvPiece>,
}

impl EnvelopeFn {
    pub fn pieces(&self) -> &[EnvPiece] {
        &self.pieces
    }

    /// Value at `t`, or `None` in a gap.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let idx = self.pieces.partition_point(|p| p.hi < t);
        let p = self.pieces.get(idx)?;
        (p.lo <= t).then(|| p.eval(t))
    }

    /// True when the pieces cover `[0,1]` without gaps.
    pub fn covers_unit_interval(&self) -> bool {
        if self.pieces.is_empty() {
            return false;
        }
        if self.pieces[0].lo > EPS || self.pieces[self.pieces.len() - 1].hi < 1.0 - EPS {
            return false;
        }
        self.pieces.windows(2).all(|w| w[1].lo - w[0].hi <= EPS)
    }
}

const WIDTH_TOL: f64 = 1e-12;

fn push_piece(out: &mut Vec<EnvPiece>, piece: EnvPiece) {
    if piece.hi - piece.lo <= WIDTH_TOL {
        return;
    }
    if let Some(last) = out.last_mut() {
        let contiguous = (piece.lo - last.hi).abs() <= WIDTH_TOL;
        let same_line = last.p == piece.p && last.q == piece.q;
        let same_label_line = last.label == piece.label
            && (last.p - piece.p).abs() <= WIDTH_TOL
            && (last.q - piece.q).abs() <= WIDTH_TOL;
        if contiguous && (same_line || same_label_line) {
            last.hi = piece.hi;
            return;
        }
    }
    out.push(piece);
}

/// Merges two partial envelopes, splitting at segment crossings.
fn merge(a: &[EnvPiece], b: &[EnvPiece]) -> Vec<EnvPiece> {
    let mut bounds: Vec<f64> = Vec::with_capacity(2 * (a.len() + b.len()));
    for p in a.iter().chain(b.iter()) {
        bounds.push(p.lo);
        bounds.push(p.hi);
    }
    bounds.sort_by(|x, y| x.total_cmp(y));
    bounds.dedup_by(|x, y| (*x - *y).abs() <= WIDTH_TOL);

    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    for w in bounds.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v - u <= WIDTH_TOL {
            continue;
        }
        let mid = 0.5 * (u + v);
        while ia < a.len() && a[ia].hi < mid {
            ia += 1;
        }
        while ib < b.len() && b[ib].hi < mid {
            ib += 1;
        }
        let pa = a.get(ia).filter(|p| p.lo <= mid && mid <= p.hi);
        let pb = b.get(ib).filter(|p| p.lo <= mid && mid <= p.hi);
        match (pa, pb) {
            (None, None) => {}
            (Some(p), None) | (None, Some(p)) => {
                push_piece(&mut out, EnvPiece { lo: u, hi: v, ..*p })
            }
            (Some(pa), Some(pb)) => {
                let da = pa.eval(u) - pb.eval(u);
                let dv = pa.eval(v) - pb.eval(v);
                let pick = |winner: &EnvPiece, lo: f64, hi: f64| EnvPiece { lo, hi, ..*winner };
                if pa.q != pb.q {
                    let tc = (pb.p - pa.p) / (pa.q - pb.q);
                    if tc > u + WIDTH_TOL && tc < v - WIDTH_TOL && (da > 0.0) != (dv > 0.0) {
                        let (first, second) = if da > 0.0 { (pa, pb) } else { (pb, pa) };
                        push_piece(&mut out, pick(first, u, tc));
                        push_piece(&mut out, pick(second, tc, v));
                        continue;
                    }
                }
                let dmid = pa.eval(mid) - pb.eval(mid);
                let winner = if dmid > 0.0 || (dmid == 0.0 && pa.label <= pb.label) {
                    pa
                } else {
                    pb
                };
                push_piece(&mut out, pick(winner, u, v));
            }
        }
    }
    out
}

/// Exact upper envelope of affine segments.
pub fn upper_envelope_segments(segments: &[Segment]) -> Result<EnvelopeFn> {
    let valid: Vec<&Segment> = segments.iter().filter(|s| s.hi - s.lo > WIDTH_TOL).collect();
    if valid.is_empty() {
        return Err(Error::input("upper envelope of an empty segment set"));
    }
    let pieces = envelope_rec(&valid);
    Ok(EnvelopeFn { pieces })
}

fn envelope_rec(segs: &[&Segment]) -> Vec<EnvPiece> {
    if segs.len() == 1 {
        let s = segs[0];
        return vec![EnvPiece { lo: s.lo, hi: s.hi, p: s.p, q: s.q, label: s.label }];
    }
    let mid = segs.len() / 2;
    let left = envelope_rec(&segs[..mid]);
    let right = envelope_rec(&segs[mid..]);
    merge(&left, &right)
}

/// Global minimum of an envelope; pieces are affine so only piece endpoints
/// compete. Ties resolve to the smallest `t`.
pub fn minimize_envelope(env: &EnvelopeFn) -> (f64, f64, usize) {
    let mut best = (f64::INFINITY, f64::INFINITY, usize::MAX);
    for p in env.pieces() {
        for t in [p.lo, p.hi] {
            let v = p.eval(t);
            if v < best.0 - 1e-12 || ((v - best.0).abs() <= 1e-12 && t < best.1) {
                best = (v, t, p.label);
            }
        }
    }
    (best.1, best.0, best.2)
}

/// An x-monotone arc: an evaluable value function over `[lo, hi]`.
pub struct Arc<'a> {
    pub lo: f64,
    pub hi: f64,
    pub label: usize,
    f: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
}

impl<'a> Arc<'a> {
    pub fn new(lo: f64, hi: f64, label: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Arc { lo, hi, label, f: Box::new(f) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl std::fmt::Debug for Arc<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Arc[{}, {}] #{}", self.lo, self.hi, self.label)
    }
}

/// Samples an arc adaptively: 64 initial points, then interval bisection
/// wherever the second difference exceeds `tol`.
fn sample_arc(arc: &Arc, tol: f64) -> Vec<(f64, f64)> {
    const INITIAL: usize = 64;
    const MIN_STEP: f64 = 1e-7;
    let initial: Vec<(f64, f64)> = (0..=INITIAL)
        .map(|i| {
            let t = arc.lo + (arc.hi - arc.lo) * i as f64 / INITIAL as f64;
            (t, arc.eval(t))
        })
        .collect();
    // a second difference of tol equals a chord deviation of tol/2 at the
    // interval midpoint
    let mut queue: std::collections::VecDeque<((f64, f64), (f64, f64))> =
        initial.windows(2).map(|w| (w[0], w[1])).collect();
    let mut out = vec![initial[0]];
    while let Some((a, b)) = queue.pop_front() {
        if b.0 - a.0 <= MIN_STEP {
            out.push(b);
            continue;
        }
        let tm = 0.5 * (a.0 + b.0);
        let vm = arc.eval(tm);
        if (a.1 - 2.0 * vm + b.1).abs() > tol {
            queue.push_front(((tm, vm), b));
            queue.push_front((a, (tm, vm)));
        } else {
            out.push((tm, vm));
            out.push(b);
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out.dedup_by(|x, y| (x.0 - y.0).abs() <= 1e-15);
    out
}

/// Approximate upper envelope of arcs: adaptive sampling into chords, exact
/// chord envelope, then bracketed bisection of every breakpoint between two
/// different arcs down to `tol` in `t`.
pub fn upper_envelope_arcs(arcs: &[Arc<'_>], tol: f64) -> Result<EnvelopeFn> {
    if arcs.is_empty() {
        return Err(Error::input("upper envelope of an empty arc set"));
    }
    let mut chords = Vec::new();
    for (idx, arc) in arcs.iter().enumerate() {
        if arc.hi - arc.lo <= WIDTH_TOL {
            continue;
        }
        let samples = sample_arc(arc, tol);
        for w in samples.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if t1 - t0 <= 1e-15 {
                continue;
            }
            let q = (v1 - v0) / (t1 - t0);
            chords.push(Segment { lo: t0, hi: t1, p: v0 - q * t0, q, label: idx });
        }
    }
    let rough = upper_envelope_segments(&chords)?;

    // refine breakpoints between different arcs on the exact expressions
    let mut pieces: Vec<EnvPiece> = rough.pieces.clone();
    for i in 0..pieces.len().saturating_sub(1) {
        let (la, lb) = (pieces[i].label, pieces[i + 1].label);
        if la == lb {
            continue;
        }
        let bp = pieces[i].hi;
        let (a, b) = (&arcs[la], &arcs[lb]);
        let lo = (bp - (pieces[i].hi - pieces[i].lo)).max(a.lo.max(b.lo));
        let hi = (bp + (pieces[i + 1].hi - pieces[i + 1].lo)).min(a.hi.min(b.hi));
        if lo >= hi {
            continue;
        }
        let g = |t: f64| a.eval(t) - b.eval(t);
        let (mut u, mut v) = (lo.max(bp - 0.05), hi.min(bp + 0.05));
        if g(u) * g(v) > 0.0 {
            continue;
        }
        let (mut gu, _) = (g(u), g(v));
        while v - u > tol {
            let m = 0.5 * (u + v);
            let gm = g(m);
            if gm == 0.0 {
                u = m;
                v = m;
                break;
            }
            if (gu < 0.0) == (gm < 0.0) {
                u = m;
                gu = gm;
            } else {
                v = m;
            }
        }
        let refined = 0.5 * (u + v);
        if refined > pieces[i].lo && refined < pieces[i + 1].hi {
            pieces[i].hi = refined;
            pieces[i + 1].lo = refined;
        }
    }
    pieces.retain(|p| p.hi - p.lo > WIDTH_TOL);
    Ok(EnvelopeFn { pieces })
}

/// Minimizes an arc envelope using the exact arc expressions: per piece a
/// dense scan plus golden-section refinement on the winning arc, global
/// minimum with smallest-`t` tie-breaking.
pub fn minimize_envelope_on_arcs(env: &EnvelopeFn, arcs: &[Arc<'_>], tol: f64) -> (f64, f64, usize) {
    let golden = |f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| -> (f64, f64) {
        const PHI: f64 = 0.618_033_988_749_894_9;
        let mut c = b - PHI * (b - a);
        let mut d = a + PHI * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > tol {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - PHI * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + PHI * (b - a);
                fd = f(d);
            }
        }
        let t = 0.5 * (a + b);
        (t, f(t))
    };

    let mut best = (f64::INFINITY, f64::INFINITY, usize::MAX);
    let consider = |v: f64, t: f64, label: usize, best: &mut (f64, f64, usize)| {
        if v < best.0 - 1e-12 || ((v - best.0).abs() <= 1e-12 && t < best.1) {
            *best = (v, t, label);
        }
    };
    for piece in env.pieces() {
        let arc = &arcs[piece.label];
        let lo = piece.lo.max(arc.lo);
        let hi = piece.hi.min(arc.hi);
        if hi <= lo {
            continue;
        }
        const SCAN: usize = 32;
        let mut scan_best = (f64::INFINITY, 0usize);
        let ts: Vec<f64> = (0..=SCAN)
            .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
            .collect();
        for (i, &t) in ts.iter().enumerate() {
            let v = arc.eval(t);
            if v < scan_best.0 {
                scan_best = (v, i);
            }
        }
        let i = scan_best.1;
        let a = ts[i.saturating_sub(1)];
        let b = ts[(i + 1).min(SCAN)];
        let f = |t: f64| arc.eval(t);
        let (t, v) = golden(&f, a, b);
        consider(v, t, piece.label, &mut best);
        // domain ends compete with the interior minimum
        consider(arc.eval(lo), lo, piece.label, &mut best);
        consider(arc.eval(hi), hi, piece.label, &mut best);
    }
    (best.1, best.0, best.2)
}
