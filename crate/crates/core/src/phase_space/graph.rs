use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, fmt_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Interval,
    Circle,
    Tree,
    Graph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: Q,
}

/// Finite connected graph with positive rational edge lengths, carrying the
/// geodesic (shortest-path) metric.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    vdist: Vec<Q>,
    canon: Vec<(usize, Q)>,
    kind: GraphKind,
}

/// A location on a [`MetricGraph`]: an edge and the fraction `t` of the edge
/// length measured from the edge's first vertex.
///
/// Values produced by the graph are canonical: a vertex is always represented
/// on its lowest-id incident edge, so structural equality is point equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphPoint {
    pub edge: usize,
    pub t: Q,
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}@{}", self.edge, fmt_q(&self.t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Endpoint,
    Ordinary,
    Branch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointClass {
    pub kind: PointKind,
    pub order: usize,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.names.len() == other.names.len() && self.edges == other.edges
    }
}

impl MetricGraph {
    /// Builds a graph from vertex names and `(from, to, length)` edges.
    pub fn new(names: Vec<String>, edges: Vec<(usize, usize, Q)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Graph("a phase space needs at least one edge".into()));
        }
        let nv = names.len();
        let mut incident = vec![Vec::new(); nv];
        let mut out = Vec::with_capacity(edges.len());
        for (id, (from, to, length)) in edges.into_iter().enumerate() {
            if from >= nv || to >= nv {
                return Err(Error::Graph(format!("edge {id} references a missing vertex")));
            }
            if from == to {
                return Err(Error::Graph(format!(
                    "edge {id} is a self-loop; subdivide it with an auxiliary vertex"
                )));
            }
            if length <= Q::zero() {
                return Err(Error::Graph(format!("edge {id} has nonpositive length")));
            }
            incident[from].push(id);
            incident[to].push(id);
            out.push(Edge { from, to, length });
        }
        if let Some(v) = incident.iter().position(|i| i.is_empty()) {
            return Err(Error::Graph(format!("vertex {:?} is isolated", names[v])));
        }
        let vdist = all_pairs(nv, &out)?;
        if vdist.iter().any(|d| d.is_none()) {
            return Err(Error::Graph("graph is disconnected".into()));
        }
        let vdist: Vec<Q> = vdist.into_iter().map(|d| d.unwrap()).collect();
        let canon = (0..nv)
            .map(|v| {
                let e = incident[v][0];
                let t = if out[e].from == v { Q::zero() } else { Q::one() };
                (e, t)
            })
            .collect();
        let kind = classify_kind(nv, &out, &incident);
        Ok(Self { names, edges: out, incident, vdist, canon, kind })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// First Betti number (number of independent cycles).
    pub fn cycle_count(&self) -> usize {
        self.edges.len() + 1 - self.names.len()
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> &Q {
        &self.vdist[u * self.names.len() + v]
    }

    pub fn total_length(&self) -> Q {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn longest_edge(&self) -> Q {
        self.edges.iter().map(|e| e.length).max().unwrap()
    }

    /// Canonical point at `t` on `edge`.
    pub fn point(&self, edge: usize, t: Q) -> Result<GraphPoint> {
        if edge >= self.edges.len() {
            return Err(Error::Point(format!("edge {edge} does not exist")));
        }
        if t < Q::zero() || t > Q::one() {
            return Err(Error::Point(format!("offset {} outside [0,1]", fmt_q(&t))));
        }
        Ok(self.canonicalize(edge, t))
    }

    /// Canonical form of `(edge, t)`; the caller guarantees validity.
    pub fn canonicalize(&self, edge: usize, t: Q) -> GraphPoint {
        if t.is_zero() {
            self.vertex_point(self.edges[edge].from)
        } else if t.is_one() {
            self.vertex_point(self.edges[edge].to)
        } else {
            GraphPoint { edge, t }
        }
    }

    pub fn vertex_point(&self, v: usize) -> GraphPoint {
        let (edge, t) = self.canon[v];
        GraphPoint { edge, t }
    }

    /// The vertex at `p`, if `p` is one.
    pub fn vertex_at(&self, p: &GraphPoint) -> Option<usize> {
        let e = &self.edges[p.edge];
        if p.t.is_zero() {
            Some(e.from)
        } else if p.t.is_one() {
            Some(e.to)
        } else {
            None
        }
    }

    pub fn contains(&self, p: &GraphPoint) -> bool {
        p.edge < self.edges.len() && p.t >= Q::zero() && p.t <= Q::one()
    }

    fn check(&self, p: &GraphPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Point(format!("{p} is not on this graph")))
        }
    }

    /// Exact geodesic distance.
    pub fn distance(&self, p: &GraphPoint, q: &GraphPoint) -> Result<Q> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    pub(crate) fn distance_unchecked(&self, p: &GraphPoint, q: &GraphPoint) -> Q {
        let ep = &self.edges[p.edge];
        let eq = &self.edges[q.edge];
        let p_ends = [(ep.from, p.t * ep.length), (ep.to, (Q::one() - p.t) * ep.length)];
        let q_ends = [(eq.from, q.t * eq.length), (eq.to, (Q::one() - q.t) * eq.length)];
        let mut best: Option<Q> = None;
        if p.edge == q.edge {
            best = Some(rational::abs(&(p.t - q.t)) * ep.length);
        }
        for (u, du) in &p_ends {
            for (v, dv) in &q_ends {
                let d = du + self.vertex_distance(*u, *v) + dv;
                if best.as_ref().map_or(true, |b| d < *b) {
                    best = Some(d);
                }
            }
        }
        best.unwrap()
    }

    /// Point order: number of directions at `p` (equals the number of
    /// components of the complement for trees).
    pub fn classify_point(&self, p: &GraphPoint) -> Result<PointClass> {
        self.check(p)?;
        let order = match self.vertex_at(p) {
            Some(v) => self.degree(v),
            None => 2,
        };
        let kind = match order {
            1 => PointKind::Endpoint,
            2 => PointKind::Ordinary,
            _ => PointKind::Branch,
        };
        Ok(PointClass { kind, order })
    }

    /// Deterministic mesh grid: all vertices plus evenly spaced interior
    /// points on every edge with spacing at most `mesh`, in (edge, t) order.
    pub fn sample_grid(&self, mesh: &Q) -> Result<Vec<GraphPoint>> {
        if *mesh <= Q::zero() {
            return Err(Error::Point("mesh must be positive".into()));
        }
        let mut pts = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let segs = segments_for(&e.length, mesh)?;
            for j in 0..=segs {
                pts.push(self.canonicalize(id, rational::q(j, segs)));
            }
        }
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// Circle coordinate helper for graphs built by [`build_circle`]: the
    /// point at fraction `s` of the circumference from vertex 0.
    pub fn circle_point(&self, s: &Q) -> Result<GraphPoint> {
        if self.kind != GraphKind::Circle || self.edges.len() != 2 {
            return Err(Error::Unsupported("circle_point needs a two-edge circle".into()));
        }
        let s = s - Q::from_integer(s.floor().to_integer());
        let h = rational::half();
        if s <= h {
            self.point(0, s * 2)
        } else {
            self.point(1, s * 2 - Q::one())
        }
    }

    /// Inverse of [`MetricGraph::circle_point`].
    pub fn circle_coordinate(&self, p: &GraphPoint) -> Q {
        let h = rational::half();
        if p.edge == 0 {
            p.t * h
        } else {
            let s = h + p.t * h;
            if s.is_one() {
                Q::zero()
            } else {
                s
            }
        }
    }
}

/// Number of equal segments needed on an edge of `length` for spacing ≤ `mesh`.
pub(crate) fn segments_for(length: &Q, mesh: &Q) -> Result<i128> {
    let ratio = length / mesh;
    let segs = ratio.ceil().to_integer().max(1);
    if segs > 50_000_000 {
        return Err(Error::Resource(format!("{segs} grid segments on one edge")));
    }
    Ok(segs)
}

fn all_pairs(nv: usize, edges: &[Edge]) -> Result<Vec<Option<Q>>> {
    let mut d: Vec<Option<Q>> = vec![None; nv * nv];
    for v in 0..nv {
        d[v * nv + v] = Some(Q::zero());
    }
    for e in edges {
        for (a, b) in [(e.from, e.to), (e.to, e.from)] {
            let slot = &mut d[a * nv + b];
            if slot.as_ref().map_or(true, |x| e.length < *x) {
                *slot = Some(e.length);
            }
        }
    }
    for k in 0..nv {
        for i in 0..nv {
            let Some(dik) = d[i * nv + k] else { continue };
            for j in 0..nv {
                let Some(dkj) = d[k * nv + j] else { continue };
                let via = rational::add(&dik, &dkj)?;
                let slot = &mut d[i * nv + j];
                if slot.as_ref().map_or(true, |x| via < *x) {
                    *slot = Some(via);
                }
            }
        }
    }
    Ok(d)
}

fn classify_kind(nv: usize, edges: &[Edge], incident: &[Vec<usize>]) -> GraphKind {
    let cycles = edges.len() + 1 - nv;
    match cycles {
        0 if edges.len() == 1 => GraphKind::Interval,
        0 => GraphKind::Tree,
        1 if incident.iter().all(|i| i.len() == 2) => GraphKind::Circle,
        _ => GraphKind::Graph,
    }
}

pub fn build_interval(length: Q) -> Result<MetricGraph> {
    if length <= Q::zero() {
        return Err(Error::Graph("interval length must be positive".into()));
    }
    MetricGraph::new(vec!["a".into(), "b".into()], vec![(0, 1, length)])
}

/// Circle of the given circumference, realized as two half-arcs between
/// antipodal vertices `v0` and `v1`.
pub fn build_circle(circumference: Q) -> Result<MetricGraph> {
    if circumference <= Q::zero() {
        return Err(Error::Graph("circumference must be positive".into()));
    }
    let half = circumference / 2;
    MetricGraph::new(vec!["v0".into(), "v1".into()], vec![(0, 1, half), (1, 0, half)])
}

/// Builds a graph from named vertices and `(name, name, length)` edges.
pub fn build_graph(vertices: &[&str], edges: &[(&str, &str, Q)]) -> Result<MetricGraph> {
    let names: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
    let idx = |n: &str| {
        names
            .iter()
            .position(|v| v == n)
            .ok_or_else(|| Error::Graph(format!("unknown vertex {n:?}")))
    };
    let mut es = Vec::with_capacity(edges.len());
    for (a, b, len) in edges {
        es.push((idx(a)?, idx(b)?, *len));
    }
    MetricGraph::new(names, es)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn tripod() -> MetricGraph {
        build_graph(
            &["c", "a", "b", "d"],
            &[("c", "a", qi(1)), ("c", "b", qi(1)), ("c", "d", qi(1))],
        )
        .unwrap()
    }

    #[test]
    fn interval_basics() {
        let g = build_interval(qi(1)).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.kind(), GraphKind::Interval);
        for v in 0..2 {
            let c = g.classify_point(&g.vertex_point(v)).unwrap();
            assert_eq!(c.kind, PointKind::Endpoint);
        }
        let g2 = build_interval(qi(2)).unwrap();
        let d = g2.distance(&g2.vertex_point(0), &g2.vertex_point(1)).unwrap();
        assert_eq!(d, qi(2));
        let p = g.point(0, q(1, 4)).unwrap();
        let r = g.point(0, q(3, 4)).unwrap();
        assert_eq!(g.distance(&p, &r).unwrap(), q(1, 2));
        let mid = g.classify_point(&p).unwrap();
        assert_eq!(mid, PointClass { kind: PointKind::Ordinary, order: 2 });
    }

    #[test]
    fn nonpositive_lengths_rejected() {
        assert!(build_interval(qi(0)).is_err());
        assert!(build_circle(qi(-1)).is_err());
        assert!(build_graph(&["a", "b"], &[("a", "b", qi(0))]).is_err());
    }

    #[test]
    fn disconnected_rejected() {
        let r = build_graph(&["a", "b", "c", "d"], &[("a", "b", qi(1)), ("c", "d", qi(1))]);
        assert!(matches!(r, Err(Error::Graph(_))));
    }

    #[test]
    fn circle_metric_takes_shorter_arc() {
        let g = build_circle(qi(1)).unwrap();
        assert_eq!(g.kind(), GraphKind::Circle);
        let p = g.circle_point(&q(1, 10)).unwrap();
        let r = g.circle_point(&q(9, 10)).unwrap();
        assert_eq!(g.distance(&p, &r).unwrap(), q(1, 5));
        assert_eq!(g.distance(&p, &p).unwrap(), qi(0));
        let zero = g.circle_point(&qi(0)).unwrap();
        let half = g.circle_point(&q(1, 2)).unwrap();
        assert_eq!(g.distance(&zero, &half).unwrap(), q(1, 2));
        let g4 = build_circle(qi(4)).unwrap();
        let a = g4.circle_point(&q(1, 8)).unwrap();
        let b = g4.circle_point(&q(5, 8)).unwrap();
        assert_eq!(g4.distance(&a, &b).unwrap(), qi(2));
    }

    #[test]
    fn tripod_distances_and_orders() {
        let g = tripod();
        assert_eq!(g.kind(), GraphKind::Tree);
        assert_eq!(g.edge_count(), g.vertex_count() - 1);
        let a = g.vertex_point(1);
        let b = g.vertex_point(2);
        assert_eq!(g.distance(&a, &b).unwrap(), qi(2));
        let ma = g.point(0, q(1, 2)).unwrap();
        let mb = g.point(1, q(1, 2)).unwrap();
        assert_eq!(g.distance(&ma, &mb).unwrap(), qi(1));
        let center = g.classify_point(&g.vertex_point(0)).unwrap();
        assert_eq!(center, PointClass { kind: PointKind::Branch, order: 3 });
        let leaf = g.classify_point(&a).unwrap();
        assert_eq!(leaf, PointClass { kind: PointKind::Endpoint, order: 1 });
    }

    #[test]
    fn lollipop_distance() {
        let g = build_graph(
            &["j", "o", "e"],
            &[("j", "o", q(1, 2)), ("o", "j", q(1, 2)), ("j", "e", qi(1))],
        )
        .unwrap();
        assert_eq!(g.kind(), GraphKind::Graph);
        assert_eq!(g.cycle_count(), 1);
        let e = g.vertex_point(2);
        let j = g.vertex_point(0);
        assert_eq!(g.distance(&e, &j).unwrap(), qi(1));
        // along the loop the shorter way round
        let p = g.point(0, q(1, 5)).unwrap();
        let r = g.point(1, q(4, 5)).unwrap();
        assert_eq!(g.distance(&p, &r).unwrap(), q(1, 5));
    }

    #[test]
    fn single_edge_graph_matches_interval() {
        let g = build_graph(&["x", "y"], &[("x", "y", qi(1))]).unwrap();
        let i = build_interval(qi(1)).unwrap();
        assert_eq!(g, i);
        let p = g.point(0, q(1, 3)).unwrap();
        let r = g.point(0, q(5, 6)).unwrap();
        assert_eq!(g.distance(&p, &r).unwrap(), i.distance(&p, &r).unwrap());
    }

    #[test]
    fn canonical_vertices() {
        let g = tripod();
        // the center is the `from` vertex of edges 0,1,2
        for e in 0..3 {
            assert_eq!(g.point(e, qi(0)).unwrap(), g.vertex_point(0));
        }
        assert_eq!(g.vertex_point(0), GraphPoint { edge: 0, t: qi(0) });
        assert!(g.point(5, qi(0)).is_err());
        assert!(g.point(0, qi(2)).is_err());
    }

    #[test]
    fn grids() {
        let i = build_interval(qi(1)).unwrap();
        let ts: Vec<Q> = i.sample_grid(&q(1, 4)).unwrap().into_iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)]);
        assert_eq!(tripod().sample_grid(&q(1, 2)).unwrap().len(), 7);
        let c = build_circle(qi(1)).unwrap();
        assert_eq!(c.sample_grid(&q(1, 4)).unwrap().len(), 4);
        // coarse mesh still yields vertices
        assert_eq!(tripod().sample_grid(&qi(10)).unwrap().len(), 4);
        assert!(i.sample_grid(&qi(0)).is_err());
    }
}
