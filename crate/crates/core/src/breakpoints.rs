//! Singularity points on edges: bottleneck points, network intersect points
//! (NIPs), exact coverage points, the per-edge partition point sets, and
//! identical coverage points.
//!
//! Between two consecutive partition points of an edge, the coverage
//! classification of every other edge is constant and all coverage functions
//! are affine; the solvers lean on that everywhere.

use crate::coverage;
use crate::error::Result;
use crate::net::{EdgeId, Network, PointOnEdge, EPS};
use crate::pwl::PiecewiseFn;

/// Origin of a partition point; a point can have several.
pub mod origin {
    pub const ENDPOINT: u8 = 1;
    pub const BOTTLENECK: u8 = 2;
    pub const NETWORK_INTERSECT: u8 = 4;
    pub const EXACT_COVERAGE: u8 = 8;
}

/// A partition point on an edge with its origin tags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedPoint {
    pub t: f64,
    pub origins: u8,
}

/// Partition points for every edge plus the deduplicated global point list
/// (each node appears once, interior points once per edge).
#[derive(Debug, Clone)]
pub struct PartitionPointSet {
    pub per_edge: Vec<Vec<TaggedPoint>>,
    pub global: Vec<PointOnEdge>,
}

impl PartitionPointSet {
    /// Sorted parameter values of the partition points on one edge.
    pub fn cuts(&self, e: EdgeId) -> Vec<f64> {
        self.per_edge[e].iter().map(|p| p.t).collect()
    }

    pub fn total_global(&self) -> usize {
        self.global.len()
    }
}

/// Bottleneck points of edge `e`: interior parameters equidistant from some
/// node via both endpoints, `t = (len + d(l,i) - d(k,i)) / (2 len)`.
pub fn bottleneck_points(net: &Network, e: EdgeId) -> Vec<f64> {
    let edge = net.edge(e);
    let mut out = Vec::new();
    for i in 1..=net.node_count() {
        let t = (edge.len + net.node_distance(edge.l, i) - net.node_distance(edge.k, i))
            / (2.0 * edge.len);
        if t > EPS && t < 1.0 - EPS {
            out.push(t);
        }
    }
    dedup_sorted(&mut out);
    out
}

/// Parameters on `host` at network distance exactly `target` from node `i`,
/// solved per branch of the point-node distance and verified.
pub(crate) fn distance_level_points(
    net: &Network,
    host: EdgeId,
    i: crate::net::NodeId,
    target: f64,
) -> Vec<f64> {
    let edge = net.edge(host);
    let tol = EPS * (1.0 + target.abs());
    let mut out = Vec::new();
    let candidates = [
        (target - net.node_distance(edge.k, i)) / edge.len,
        1.0 - (target - net.node_distance(edge.l, i)) / edge.len,
    ];
    for t in candidates {
        if !(-EPS..=1.0 + EPS).contains(&t) {
            continue;
        }
        let t = t.clamp(0.0, 1.0);
        if (net.point_node_distance(PointOnEdge::new(host, t), i) - target).abs() <= tol {
            out.push(t);
        }
    }
    out
}

/// Network intersect points of edge `e`: parameters at exact distance `R`
/// from some node.
pub fn network_intersect_points(net: &Network, r: f64, e: EdgeId) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..=net.node_count() {
        out.extend(distance_level_points(net, e, i, r));
    }
    dedup_sorted(&mut out);
    out
}

/// Breakpoint grid for the edge coverage functions over `host`:
/// endpoints plus bottleneck and network intersect points.
pub(crate) fn coverage_cuts(net: &Network, r: f64, host: EdgeId) -> Vec<f64> {
    let mut cuts = vec![0.0, 1.0];
    cuts.extend(bottleneck_points(net, host));
    cuts.extend(network_intersect_points(net, r, host));
    dedup_sorted(&mut cuts);
    cuts
}

/// Exact coverage points on `host`: parameters where some edge `e` satisfies
/// `s+ = s-` with common value strictly inside `(0,1)` and full coverage of
/// `e` is lost on at least one side.
pub fn exact_coverage_points(net: &Network, r: f64, host: EdgeId) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for e in 0..net.edge_count() {
        if e == host {
            continue;
        }
        let (sp, sm) = coverage::coverage_profile(net, r, e, host)?;
        // candidate (t, sides to probe): true = probe left, right
        let mut candidates: Vec<(f64, bool, bool)> = Vec::new();
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        cuts.extend(sp.breakpoints());
        cuts.extend(sm.breakpoints());
        dedup_sorted(&mut cuts);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let pp = sp.piece_at(0.5 * (lo + hi));
            let pm = sm.piece_at(0.5 * (lo + hi));
            let da = pm.coef[0] - pp.coef[0];
            let db = pm.coef[1] - pp.coef[1];
            if db.abs() <= EPS {
                if da.abs() <= EPS {
                    // identically covered stretch; its extremes are candidates
                    candidates.push((lo, true, false));
                    candidates.push((hi, false, true));
                }
                continue;
            }
            let t = -da / db;
            if t >= lo - EPS && t <= hi + EPS {
                candidates.push((t.clamp(lo, hi), true, true));
            }
        }
        let partial_at = |t: f64| -> bool {
            let x = PointOnEdge::new(host, t.clamp(0.0, 1.0));
            coverage::s_minus(net, r, e, x) - coverage::s_plus(net, r, e, x) > 1e-12
        };
        for (t, probe_left, probe_right) in candidates {
            let v = sp.eval(t);
            if v <= EPS || v >= 1.0 - EPS {
                continue;
            }
            let step = 10.0 * EPS;
            let lost_left = probe_left && (t - step < 0.0 || partial_at(t - step));
            let lost_right = probe_right && (t + step > 1.0 || partial_at(t + step));
            if lost_left || lost_right {
                out.push(t);
            }
        }
    }
    dedup_sorted(&mut out);
    Ok(out)
}

/// All partition points of the network: per edge the endpoints, bottleneck,
/// network intersect and exact coverage points, sorted and deduplicated with
/// merged origin tags.
pub fn partition_points(net: &Network, r: f64) -> Result<PartitionPointSet> {
    let mut per_edge = Vec::with_capacity(net.edge_count());
    for e in 0..net.edge_count() {
        let mut tagged: Vec<TaggedPoint> = vec![
            TaggedPoint { t: 0.0, origins: origin::ENDPOINT },
            TaggedPoint { t: 1.0, origins: origin::ENDPOINT },
        ];
        for t in bottleneck_points(net, e) {
            tagged.push(TaggedPoint { t, origins: origin::BOTTLENECK });
        }
        for t in network_intersect_points(net, r, e) {
            tagged.push(TaggedPoint { t, origins: origin::NETWORK_INTERSECT });
        }
        for t in exact_coverage_points(net, r, e)? {
            tagged.push(TaggedPoint { t, origins: origin::EXACT_COVERAGE });
        }
        tagged.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut merged: Vec<TaggedPoint> = Vec::with_capacity(tagged.len());
        for p in tagged {
            match merged.last_mut() {
                Some(last) if (p.t - last.t).abs() <= EPS => last.origins |= p.origins,
                _ => merged.push(p),
            }
        }
        per_edge.push(merged);
    }

    let mut global: Vec<PointOnEdge> = (1..=net.node_count()).map(|i| net.node_point(i)).collect();
    for (e, pts) in per_edge.iter().enumerate() {
        for p in pts {
            if p.t > EPS && p.t < 1.0 - EPS {
                global.push(PointOnEdge::new(e, p.t));
            }
        }
    }
    Ok(PartitionPointSet { per_edge, global })
}

/// Solves `c(t) = target` on a piecewise-affine profile. Point solutions are
/// returned directly; whole-piece solutions contribute the piece extremes.
pub(crate) fn ic_points_on_profile(c_prof: &PiecewiseFn, target: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for p in c_prof.pieces() {
        let slope = p.coef[1];
        debug_assert!(p.is_affine());
        if slope.abs() <= EPS {
            if (p.coef[0] - target).abs() <= EPS {
                out.push(p.lo);
                out.push(p.hi);
            }
            continue;
        }
        let t = (target - p.coef[0]) / slope;
        if t >= p.lo - EPS && t <= p.hi + EPS {
            out.push(t.clamp(p.lo, p.hi));
        }
    }
    dedup_sorted(&mut out);
    out
}

/// Identical coverage points on `host` for candidate `y` and edge `e`:
/// parameters `t` with `c_e((host,t)) = c_e(y)`.
pub fn identical_coverage_points(
    net: &Network,
    r: f64,
    host: EdgeId,
    y: PointOnEdge,
    e: EdgeId,
) -> Result<Vec<f64>> {
    let pp = partition_points(net, r)?;
    let (c_prof, _) = coverage::c_profiles(net, r, e, host, &pp.cuts(host))?;
    let target = coverage::c_value(net, r, e, y);
    Ok(ic_points_on_profile(&c_prof, target))
}

/// Per-edge counts of partition point origins, for reporting.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct EdgePointCounts {
    pub n_bp: usize,
    pub n_nip: usize,
    pub n_ep: usize,
    pub n_ic: usize,
}

/// Per-edge origin counters plus the identical coverage points induced on
/// each edge by all partition point candidates (counting only IC points that
/// are not partition points themselves).
pub fn edge_point_counts(tables: &crate::coverage::CoverageTables) -> Vec<EdgePointCounts> {
    let net = tables.net;
    let mut out = Vec::with_capacity(net.edge_count());
    for host in 0..net.edge_count() {
        let mut counts = EdgePointCounts::default();
        for p in &tables.pp.per_edge[host] {
            if p.origins & origin::BOTTLENECK != 0 {
                counts.n_bp += 1;
            }
            if p.origins & origin::NETWORK_INTERSECT != 0 {
                counts.n_nip += 1;
            }
            if p.origins & origin::EXACT_COVERAGE != 0 {
                counts.n_ep += 1;
            }
        }
        let mut ics: Vec<f64> = Vec::new();
        for &y in &tables.pp.global {
            for e in 0..net.edge_count() {
                let target = tables.c_at(e, y);
                ics.extend(ic_points_on_profile(tables.c_profile(host, e), target));
            }
        }
        dedup_sorted(&mut ics);
        let pp_cuts = tables.pp.cuts(host);
        counts.n_ic = ics
            .iter()
            .filter(|t| !pp_cuts.iter().any(|p| (*p - **t).abs() <= EPS))
            .count();
        out.push(counts);
    }
    out
}

pub(crate) fn dedup_sorted(values: &mut Vec<f64>) {
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup_by(|a, b| (*a - *b).abs() <= EPS);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Network {
        Network::new(3, &[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 3.0)]).unwrap()
    }

    const E12: EdgeId = 0;
    const E23: EdgeId = 1;
    const E13: EdgeId = 2;

    #[test]
    fn triangle_bottlenecks() {
        let net = triangle();
        assert!(bottleneck_points(&net, E12).is_empty());
        assert!(bottleneck_points(&net, E23).is_empty());
        let bp = bottleneck_points(&net, E13);
        assert_eq!(bp.len(), 1);
        assert!((bp[0] - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn tree_edge_has_no_interior_bottlenecks() {
        let net = Network::new(2, &[(1, 2, 1.0)]).unwrap();
        assert!(bottleneck_points(&net, 0).is_empty());
    }

    #[test]
    fn triangle_nips() {
        let net = triangle();
        let nip13 = network_intersect_points(&net, 1.0, E13);
        assert_eq!(nip13.iter().filter(|t| **t > EPS && **t < 1.0 - EPS).count(), 2);
        assert!((nip13[1] - 1.0 / 3.0).abs() < EPS);
        assert!((nip13[2] - 2.0 / 3.0).abs() < EPS);
        let nip23 = network_intersect_points(&net, 1.0, E23);
        assert!(nip23.iter().any(|t| (t - 0.5).abs() < EPS));
    }

    #[test]
    fn nip_dedup_on_single_edge() {
        // midpoint reached at distance 1 from both nodes
        let net = Network::new(2, &[(1, 2, 2.0)]).unwrap();
        let nips = network_intersect_points(&net, 1.0, 0);
        let interior: Vec<_> = nips.iter().filter(|t| **t > EPS && **t < 1.0 - EPS).collect();
        assert_eq!(interior.len(), 1);
        assert!((interior[0] - 0.5).abs() < EPS);
    }

    #[test]
    fn huge_radius_no_interior_nips() {
        let net = triangle();
        let nips = network_intersect_points(&net, 100.0, E13);
        assert!(nips.is_empty());
    }

    #[test]
    fn triangle_has_no_exact_coverage_points() {
        let net = triangle();
        for e in 0..3 {
            assert!(exact_coverage_points(&net, 1.0, e).unwrap().is_empty());
        }
    }

    #[test]
    fn identically_covered_stretch_yields_its_extremes() {
        // 4-cycle where edge [3,4] is exactly covered (s+ = s-) from every
        // point of [1,2]: moving along [1,2] trades distance to node 3 for
        // distance to node 4 one-to-one
        let net = Network::new(
            4,
            &[(1, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0), (3, 4, 2.0)],
        )
        .unwrap();
        let r = 2.5;
        let e34 = 3;
        // grid check: the edge is exactly covered along the whole host edge
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let x = PointOnEdge::new(0, t);
            let sp = coverage::s_plus(&net, r, e34, x);
            let sm = coverage::s_minus(&net, r, e34, x);
            assert!((sp - sm).abs() < EPS, "t={t}: {sp} vs {sm}");
            assert!(sp > 0.2 && sp < 0.8);
            assert!(coverage::classify(&net, r, x).is_covered(e34));
        }
        let eps = exact_coverage_points(&net, r, 0).unwrap();
        assert_eq!(eps.len(), 2, "expected the stretch extremes, got {eps:?}");
        assert!(eps[0].abs() < EPS && (eps[1] - 1.0).abs() < EPS);
    }

    #[test]
    fn triangle_partition_points() {
        let net = triangle();
        let pp = partition_points(&net, 1.0).unwrap();
        assert_eq!(pp.cuts(E12), vec![0.0, 1.0]);
        let c23 = pp.cuts(E23);
        assert_eq!(c23.len(), 3);
        assert!((c23[1] - 0.5).abs() < EPS);
        let c13 = pp.cuts(E13);
        assert_eq!(c13.len(), 4);
        assert!((c13[1] - 1.0 / 3.0).abs() < EPS);
        assert!((c13[2] - 2.0 / 3.0).abs() < EPS);
        // 3 vertices + 3 interior points
        assert_eq!(pp.total_global(), 6);
    }

    #[test]
    fn single_edge_large_radius_pp_is_endpoints() {
        let net = Network::new(2, &[(1, 2, 1.0)]).unwrap();
        let pp = partition_points(&net, 2.0).unwrap();
        assert_eq!(pp.cuts(0), vec![0.0, 1.0]);
    }

    #[test]
    fn ic_points_examples() {
        let net = triangle();
        // c_[2,3] over [1,2] is t/2 <= 1/2 < 1 = c_[2,3](([2,3],1/2)): no solution
        let y = PointOnEdge::new(E23, 0.5);
        let ics = identical_coverage_points(&net, 1.0, E12, y, E23).unwrap();
        assert!(ics.is_empty());
        // c_[1,3] over [1,2] is (1-t)/3; target c_[1,3](([1,3],1/3)) = 2/3: empty too
        let y = PointOnEdge::new(E13, 1.0 / 3.0);
        let ics = identical_coverage_points(&net, 1.0, E12, y, E13).unwrap();
        assert!(ics.is_empty());
        // target 1/6 hits (1-t)/3 at t = 1/2
        let prof = coverage::c_profiles(&net, 1.0, E13, E12, &[0.0, 1.0]).unwrap().0;
        let ics = ic_points_on_profile(&prof, 1.0 / 6.0);
        assert_eq!(ics.len(), 1);
        assert!((ics[0] - 0.5).abs() < EPS);
        // constant piece equal to the target yields the extremes
        let flat = coverage::c_profiles(&net, 1.0, E12, E12, &[0.0, 1.0]).unwrap().0;
        let ics = ic_points_on_profile(&flat, 1.0);
        assert_eq!(ics, vec![0.0, 1.0]);
        // parallel with offset mismatch: empty
        let ics = ic_points_on_profile(&flat, 0.5);
        assert!(ics.is_empty());
    }

    #[test]
    fn bottleneck_identity_holds() {
        let net = triangle();
        let edge = net.edge(E13);
        for t in bottleneck_points(&net, E13) {
            for i in 1..=3 {
                let lhs = t * edge.len + net.node_distance(edge.k, i);
                let rhs = (1.0 - t) * edge.len + net.node_distance(edge.l, i);
                if (lhs - rhs).abs() <= EPS * (1.0 + lhs.abs()) {
                    return;
                }
            }
        }
        panic!("no generating node found for bottleneck point");
    }
}
