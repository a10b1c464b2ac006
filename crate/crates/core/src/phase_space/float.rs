use crate::rational::to_f64;

use super::graph::{GraphPoint, MetricGraph};

/// Floating-point location anchored at the nearer end of an edge.
///
/// `offset` is the fraction of the edge length measured from the anchor
/// vertex (`from` when `at_end` is false, `to` otherwise), so points very
/// close to a vertex keep full relative precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Loc {
    pub edge: u32,
    pub at_end: bool,
    pub offset: f64,
}

impl Loc {
    pub fn from_t(edge: usize, t: f64) -> Self {
        if t <= 0.5 {
            Loc { edge: edge as u32, at_end: false, offset: t }
        } else {
            Loc { edge: edge as u32, at_end: true, offset: 1.0 - t }
        }
    }

    /// Offset from the edge's first vertex.
    pub fn t(&self) -> f64 {
        if self.at_end {
            1.0 - self.offset
        } else {
            self.offset
        }
    }

    /// Compact scalar code `2 * edge + t` used in orbit tables.
    pub fn encode(&self) -> f64 {
        2.0 * self.edge as f64 + self.t()
    }

    /// Midpoint of two locations on the same edge, kept anchored.
    pub fn midpoint(&self, other: &Loc) -> Option<Loc> {
        if self.edge != other.edge {
            return None;
        }
        if self.at_end == other.at_end {
            let m = 0.5 * (self.offset + other.offset);
            return Some(Loc { offset: m, ..*self });
        }
        Some(Loc::from_t(self.edge as usize, 0.5 * (self.t() + other.t())))
    }
}

/// Float mirror of a [`MetricGraph`]'s metric.
#[derive(Clone, Debug)]
pub struct FloatGraph {
    nv: usize,
    from: Vec<usize>,
    to: Vec<usize>,
    len: Vec<f64>,
    vdist: Vec<f64>,
    single_edge: bool,
    /// The edge is a shortest path between its endpoints.
    geodesic: Vec<bool>,
}

impl FloatGraph {
    pub fn new(g: &MetricGraph) -> Self {
        let nv = g.vertex_count();
        let mut vdist = vec![0.0; nv * nv];
        for u in 0..nv {
            for v in 0..nv {
                vdist[u * nv + v] = to_f64(g.vertex_distance(u, v));
            }
        }
        let edges = g.edges();
        FloatGraph {
            nv,
            from: edges.iter().map(|e| e.from).collect(),
            to: edges.iter().map(|e| e.to).collect(),
            len: edges.iter().map(|e| to_f64(&e.length)).collect(),
            vdist,
            single_edge: edges.len() == 1,
            geodesic: edges.iter().map(|e| *g.vertex_distance(e.from, e.to) == e.length).collect(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.len.len()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.len[e]
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.from[e], self.to[e])
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.vdist[u * self.nv + v]
    }

    pub fn loc(p: &GraphPoint) -> Loc {
        Loc::from_t(p.edge, to_f64(&p.t))
    }

    /// Distance between `(e1, t1)` and `(e2, t2)`.
    #[inline]
    pub fn dist(&self, e1: usize, t1: f64, e2: usize, t2: f64) -> f64 {
        if e1 == e2 && self.geodesic[e1] {
            return (t1 - t2).abs() * self.len[e1];
        }
        let l1 = self.len[e1];
        let l2 = self.len[e2];
        let (a0, a1) = (t1 * l1, (1.0 - t1) * l1);
        let (b0, b1) = (t2 * l2, (1.0 - t2) * l2);
        let (u0, u1) = (self.from[e1] * self.nv, self.to[e1] * self.nv);
        let (v0, v1) = (self.from[e2], self.to[e2]);
        let mut best = (a0 + self.vdist[u0 + v0] + b0)
            .min(a0 + self.vdist[u0 + v1] + b1)
            .min(a1 + self.vdist[u1 + v0] + b0)
            .min(a1 + self.vdist[u1 + v1] + b1);
        if e1 == e2 {
            best = best.min((t1 - t2).abs() * l1);
        }
        best
    }

    /// Distance between two encoded positions (see [`Loc::encode`]).
    #[inline]
    pub fn dist_code(&self, x: f64, y: f64) -> f64 {
        if self.single_edge {
            return (x - y).abs() * self.len[0];
        }
        let (e1, t1) = decode(x);
        let (e2, t2) = decode(y);
        self.dist(e1, t1, e2, t2)
    }

    pub fn dist_loc(&self, p: &Loc, q: &Loc) -> f64 {
        if p.edge == q.edge {
            let l = self.len[p.edge as usize];
            let along = if p.at_end == q.at_end {
                (p.offset - q.offset).abs() * l
            } else {
                (1.0 - p.offset - q.offset).abs() * l
            };
            if self.single_edge {
                return along;
            }
            return along.min(self.dist(p.edge as usize, p.t(), q.edge as usize, q.t()));
        }
        self.dist(p.edge as usize, p.t(), q.edge as usize, q.t())
    }
}

#[inline]
pub fn decode(x: f64) -> (usize, f64) {
    let e = (x * 0.5).floor();
    (e as usize, x - 2.0 * e)
}
