//! Network data model: undirected graph with rectifiable edges, cached
//! all-pairs node distances, and point/subedge geometry on edges.
//!
//! Nodes are 1-based (matching the instance file format), edges are indexed
//! by insertion order. A `Network` is immutable after construction; all
//! queries are pure reads and safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison tolerance for edge parameters `t` and function values.
pub const EPS: f64 = 1e-9;

/// Index of an edge in the network (insertion order).
pub type EdgeId = usize;

/// 1-based node label.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// First endpoint (the `t = 0` end).
    pub k: NodeId,
    /// Second endpoint (the `t = 1` end).
    pub l: NodeId,
    pub len: f64,
}

/// A point on the network given by an edge and the relative distance from
/// the edge's `k` endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOnEdge {
    pub edge: EdgeId,
    pub t: f64,
}

impl PointOnEdge {
    pub fn new(edge: EdgeId, t: f64) -> Self {
        debug_assert!((-EPS..=1.0 + EPS).contains(&t), "t out of [0,1]: {t}");
        PointOnEdge { edge, t: t.clamp(0.0, 1.0) }
    }
}

/// A closed subedge `(e, [t1, t2])` with `t1 <= t2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subedge {
    pub edge: EdgeId,
    pub t1: f64,
    pub t2: f64,
}

impl Subedge {
    pub fn new(edge: EdgeId, t1: f64, t2: f64) -> Result<Self> {
        if t1 > t2 + EPS {
            return Err(Error::internal(format!("subedge with t1 > t2: [{t1}, {t2}]")));
        }
        Ok(Subedge { edge, t1: t1.min(t2), t2 })
    }

    pub fn length_fraction(&self) -> f64 {
        self.t2 - self.t1
    }
}

/// Immutable network with cached all-pairs shortest-path node distances.
#[derive(Debug, Clone)]
pub struct Network {
    node_count: usize,
    edges: Vec<Edge>,
    /// Row-major `node_count x node_count` distance matrix.
    dist: Vec<f64>,
}

impl Network {
    /// Builds a network from 1-based endpoints and positive lengths and
    /// computes the full node distance matrix.
    ///
    /// Rejects self-loops, parallel edges, nonpositive lengths and
    /// disconnected graphs.
    pub fn new(node_count: usize, edge_list: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::input("network needs at least one node"));
        }
        if edge_list.is_empty() {
            return Err(Error::input("network needs at least one edge"));
        }
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut seen = std::collections::HashSet::new();
        for &(k, l, len) in edge_list {
            if k == 0 || l == 0 || k > node_count || l > node_count {
                return Err(Error::input(format!(
                    "edge [{k},{l}] references a node outside 1..={node_count}"
                )));
            }
            if k == l {
                return Err(Error::input(format!("self-loop at node {k}")));
            }
            if !(len > 0.0) {
                return Err(Error::input(format!("edge [{k},{l}] has nonpositive length {len}")));
            }
            if !seen.insert((k.min(l), k.max(l))) {
                return Err(Error::input(format!("parallel edge [{k},{l}]")));
            }
            edges.push(Edge { k, l, len });
        }

        let dist = all_pairs_distances(node_count, &edges)?;
        Ok(Network { node_count, edges, dist })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Shortest-path distance between two nodes (1-based).
    pub fn node_distance(&self, i: NodeId, j: NodeId) -> f64 {
        self.dist[(i - 1) * self.node_count + (j - 1)]
    }

    /// Largest node-to-node distance in the network.
    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Distance from a point on an edge to a node:
    /// `min(t*len + d(k,i), (1-t)*len + d(l,i))`.
    pub fn point_node_distance(&self, x: PointOnEdge, i: NodeId) -> f64 {
        let e = self.edge(x.edge);
        let via_k = x.t * e.len + self.node_distance(e.k, i);
        let via_l = (1.0 - x.t) * e.len + self.node_distance(e.l, i);
        via_k.min(via_l)
    }

    /// Distance between two points of the network.
    ///
    /// For points on a common edge the direct segment competes with the
    /// detours through the endpoints; otherwise the four endpoint-to-endpoint
    /// routings are compared.
    pub fn point_point_distance(&self, x: PointOnEdge, y: PointOnEdge) -> f64 {
        let ex = self.edge(x.edge);
        let ey = self.edge(y.edge);
        let via = |xi: NodeId, yj: NodeId| -> f64 {
            let dx = if xi == ex.k { x.t * ex.len } else { (1.0 - x.t) * ex.len };
            let dy = if yj == ey.k { y.t * ey.len } else { (1.0 - y.t) * ey.len };
            dx + self.node_distance(xi, yj) + dy
        };
        let mut best = via(ex.k, ey.k)
            .min(via(ex.k, ey.l))
            .min(via(ex.l, ey.k))
            .min(via(ex.l, ey.l));
        if x.edge == y.edge {
            best = best.min((x.t - y.t).abs() * ex.len);
        }
        best
    }

    /// Edges incident to a node.
    pub fn incident_edges(&self, i: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.k == i || e.l == i)
            .map(|(id, _)| id)
    }

    /// A canonical point representation for a node: position 0 or 1 on its
    /// lowest-index incident edge.
    pub fn node_point(&self, i: NodeId) -> PointOnEdge {
        let e = self
            .incident_edges(i)
            .next()
            .expect("connected network: every node has an incident edge");
        let t = if self.edge(e).k == i { 0.0 } else { 1.0 };
        PointOnEdge { edge: e, t }
    }
}

/// Floyd–Warshall over the edge list; errors out if the graph is
/// disconnected.
fn all_pairs_distances(n: usize, edges: &[Edge]) -> Result<Vec<f64>> {
    let mut dist = vec![f64::INFINITY; n * n];
    for i in 0..n {
        dist[i * n + i] = 0.0;
    }
    for e in edges {
        let (a, b) = (e.k - 1, e.l - 1);
        if e.len < dist[a * n + b] {
            dist[a * n + b] = e.len;
            dist[b * n + a] = e.len;
        }
    }
    for h in 0..n {
        for i in 0..n {
            let dih = dist[i * n + h];
            if !dih.is_finite() {
                continue;
            }
            for j in 0..n {
                let cand = dih + dist[h * n + j];
                if cand < dist[i * n + j] {
                    dist[i * n + j] = cand;
                }
            }
        }
    }
    if dist.iter().any(|d| !d.is_finite()) {
        return Err(Error::input("graph is not connected"));
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn triangle() -> Network {
        Network::new(3, &[(1, 2, 1.0), (2, 3, 2.0), (1, 3, 3.0)]).unwrap()
    }

    #[test]
    fn triangle_distances() {
        let net = triangle();
        assert_eq!(net.node_distance(1, 3), 3.0);
        assert_eq!(net.node_distance(1, 2), 1.0);
        assert_eq!(net.node_distance(2, 3), 2.0);
        assert_eq!(net.node_distance(2, 2), 0.0);
    }

    #[test]
    fn single_edge_distance() {
        let net = Network::new(2, &[(1, 2, 5.0)]).unwrap();
        assert_eq!(net.node_distance(1, 2), 5.0);
    }

    #[test]
    fn path_distance_concatenates() {
        let net = Network::new(3, &[(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(net.node_distance(1, 3), 2.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Network::new(3, &[(1, 2, 1.0)]).is_err(), "disconnected");
        assert!(Network::new(2, &[(1, 2, 0.0)]).is_err(), "zero length");
        assert!(Network::new(2, &[(1, 2, -1.0)]).is_err(), "negative length");
        assert!(Network::new(2, &[(1, 1, 1.0)]).is_err(), "self loop");
        assert!(Network::new(2, &[(1, 2, 1.0), (2, 1, 2.0)]).is_err(), "parallel edge");
        assert!(Network::new(2, &[(1, 3, 1.0)]).is_err(), "node out of range");
        assert!(Network::new(1, &[]).is_err(), "edgeless single node");
        assert!(Network::new(0, &[]).is_err(), "empty network");
    }

    #[test]
    fn point_node_distance_cases() {
        let net = triangle();
        // midpoint of [1,2] to node 3: min(0.5 + 3, 0.5 + 2)
        let x = PointOnEdge::new(0, 0.5);
        assert!((net.point_node_distance(x, 3) - 2.5).abs() < EPS);
        assert_eq!(net.point_node_distance(PointOnEdge::new(0, 0.0), 1), 0.0);
        assert_eq!(net.point_node_distance(PointOnEdge::new(0, 1.0), 3), 2.0);
    }

    #[test]
    fn point_point_distance_cases() {
        let net = triangle();
        let x = PointOnEdge::new(0, 0.25);
        let y = PointOnEdge::new(0, 0.75);
        assert!((net.point_point_distance(x, y) - 0.5).abs() < EPS);
        assert_eq!(net.point_point_distance(x, x), 0.0);
        // same physical point through shared node 2
        let a = PointOnEdge::new(0, 1.0);
        let b = PointOnEdge::new(1, 0.0);
        assert!(net.point_point_distance(a, b).abs() < EPS);
    }

    #[test]
    fn node_point_roundtrip() {
        let net = triangle();
        for i in 1..=3 {
            let p = net.node_point(i);
            assert!(net.point_node_distance(p, i).abs() < EPS);
        }
    }
}
