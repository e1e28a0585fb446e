//! Piecewise polynomial functions over `[0,1]` with affine or quadratic
//! pieces. Carrier type for the edge coverage functions, the per-unit
//! coverage functions and the per-pair regret functions.

use crate::error::{Error, Result};
use crate::net::EPS;

/// One domain piece `[lo, hi]` carrying `c0 + c1*t + c2*t^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub coef: [f64; 3],
}

impl Piece {
    pub fn affine(lo: f64, hi: f64, c0: f64, c1: f64) -> Self {
        Piece { lo, hi, coef: [c0, c1, 0.0] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coef[0] + t * (self.coef[1] + t * self.coef[2])
    }

    pub fn is_affine(&self) -> bool {
        self.coef[2].abs() <= EPS
    }
}

/// Ordered pieces partitioning `[0,1]`; adjacent pieces share endpoints and
/// agree in value there (continuity within `EPS`).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
}

impl PiecewiseFn {
    /// Wraps pieces after checking the partition and continuity invariants.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::internal("piecewise function with no pieces"));
        }
        if pieces[0].lo.abs() > EPS || (pieces[pieces.len() - 1].hi - 1.0).abs() > EPS {
            return Err(Error::internal("pieces do not span [0,1]"));
        }
        for w in pieces.windows(2) {
            if (w[0].hi - w[1].lo).abs() > EPS {
                return Err(Error::internal("pieces do not share endpoints"));
            }
            let gap = (w[0].eval(w[0].hi) - w[1].eval(w[1].lo)).abs();
            if gap > 1e-7 {
                return Err(Error::internal(format!(
                    "discontinuity {gap:.3e} at t = {}",
                    w[0].hi
                )));
            }
        }
        for p in &pieces {
            if p.lo >= p.hi - EPS {
                return Err(Error::internal("piece with nonpositive width"));
            }
        }
        Ok(PiecewiseFn { pieces })
    }

    pub fn constant(value: f64) -> Self {
        PiecewiseFn { pieces: vec![Piece { lo: 0.0, hi: 1.0, coef: [value, 0.0, 0.0] }] }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// The piece containing `t` (boundary points resolve to the left piece).
    pub fn piece_at(&self, t: f64) -> &Piece {
        let idx = self
            .pieces
            .partition_point(|p| p.hi < t - EPS)
            .min(self.pieces.len() - 1);
        &self.pieces[idx]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.piece_at(t).eval(t)
    }

    /// Interior breakpoints (piece boundaries excluding 0 and 1).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1].iter().map(|p| p.hi).collect()
    }

    /// Multiplies all coefficients by a scalar.
    pub fn scaled(mut self, s: f64) -> Self {
        for p in &mut self.pieces {
            for c in &mut p.coef {
                *c *= s;
            }
        }
        self
    }

    /// Merges adjacent pieces whose coefficients agree within `EPS`.
    pub fn simplified(mut self) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces.drain(..) {
            if let Some(last) = out.last_mut() {
                let same = last
                    .coef
                    .iter()
                    .zip(p.coef.iter())
                    .all(|(a, b)| (a - b).abs() <= EPS * (1.0 + a.abs().max(b.abs())));
                if same {
                    last.hi = p.hi;
                    continue;
                }
            }
            out.push(p);
        }
        PiecewiseFn { pieces: out }
    }

    /// Sum of piecewise functions on the common breakpoint refinement.
    pub fn sum(fns: &[&PiecewiseFn]) -> Result<PiecewiseFn> {
        if fns.is_empty() {
            return Err(Error::internal("sum of zero piecewise functions"));
        }
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for f in fns {
            cuts.extend(f.breakpoints());
        }
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup_by(|a, b| (*a - *b).abs() <= EPS);
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= EPS {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let mut coef = [0.0; 3];
            for f in fns {
                let p = f.piece_at(mid);
                for (c, pc) in coef.iter_mut().zip(p.coef.iter()) {
                    *c += pc;
                }
            }
            pieces.push(Piece { lo, hi, coef });
        }
        PiecewiseFn::new(pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_piece_lookup() {
        let f = PiecewiseFn::new(vec![
            Piece::affine(0.0, 0.5, 0.0, 1.0),
            Piece::affine(0.5, 1.0, 1.0, -1.0),
        ])
        .unwrap();
        assert!((f.eval(0.25) - 0.25).abs() < EPS);
        assert!((f.eval(0.75) - 0.25).abs() < EPS);
        assert!((f.eval(0.5) - 0.5).abs() < EPS);
        assert_eq!(f.breakpoints(), vec![0.5]);
    }

    #[test]
    fn rejects_discontinuity_and_gaps() {
        assert!(PiecewiseFn::new(vec![
            Piece::affine(0.0, 0.5, 0.0, 0.0),
            Piece::affine(0.5, 1.0, 1.0, 0.0),
        ])
        .is_err());
        assert!(PiecewiseFn::new(vec![
            Piece::affine(0.0, 0.4, 0.0, 0.0),
            Piece::affine(0.6, 1.0, 0.0, 0.0),
        ])
        .is_err());
    }

    #[test]
    fn simplify_merges_equal_pieces() {
        let f = PiecewiseFn::new(vec![
            Piece::affine(0.0, 0.3, 1.0, 2.0),
            Piece::affine(0.3, 1.0, 1.0, 2.0),
        ])
        .unwrap()
        .simplified();
        assert_eq!(f.pieces().len(), 1);
    }

    #[test]
    fn sum_on_common_refinement() {
        let f = PiecewiseFn::new(vec![
            Piece::affine(0.0, 0.5, 0.0, 1.0),
            Piece::affine(0.5, 1.0, 1.0, -1.0),
        ])
        .unwrap();
        let g = PiecewiseFn::constant(2.0);
        let s = PiecewiseFn::sum(&[&f, &g]).unwrap();
        assert!((s.eval(0.25) - 2.25).abs() < EPS);
        assert!((s.eval(0.75) - 2.25).abs() < EPS);
        assert_eq!(s.pieces().len(), 2);
    }
}
