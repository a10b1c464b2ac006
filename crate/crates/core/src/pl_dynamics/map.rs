use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{GraphPoint, MetricGraph};
use crate::rational::{self, fmt_q, Q};

/// Default cap on the total number of pieces of a composed map.
pub const DEFAULT_PIECE_CAP: usize = 1_000_000;

/// One affine piece `t ↦ a·t + b` of a PL map, defined on `[start, end]` of
/// its source edge and landing on `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub start: Q,
    pub end: Q,
    pub target: usize,
    pub a: Q,
    pub b: Q,
}

impl Piece {
    pub fn eval(&self, t: &Q) -> Result<Q> {
        rational::affine(&self.a, t, &self.b)
    }

    pub fn image_bounds(&self) -> Result<(Q, Q)> {
        let u = self.eval(&self.start)?;
        let v = self.eval(&self.end)?;
        Ok(if u <= v { (u, v) } else { (v, u) })
    }

    pub fn is_flat(&self) -> bool {
        self.a.is_zero()
    }
}

/// Continuous piecewise-linear self-map of a metric graph with exact
/// rational coefficients. `pieces[e]` tiles `[0, 1]` of edge `e`.
#[derive(Clone, Debug)]
pub struct PLMap {
    graph: Arc<MetricGraph>,
    pieces: Vec<Vec<Piece>>,
}

impl PartialEq for PLMap {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.pieces == other.pieces
    }
}

impl PLMap {
    /// Builds a map after structural checks (tiling of every edge, slopes
    /// and images inside the target edge). Continuity is checked by
    /// [`validate_map`](super::validate_map).
    pub fn new(graph: Arc<MetricGraph>, pieces: Vec<Vec<Piece>>) -> Result<Self> {
        if pieces.len() != graph.edge_count() {
            return Err(Error::Map(format!(
                "{} piece lists for {} edges",
                pieces.len(),
                graph.edge_count()
            )));
        }
        for (e, list) in pieces.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Map(format!("edge {e} has no pieces")));
            }
            if !list[0].start.is_zero() || !list.last().unwrap().end.is_one() {
                return Err(Error::Map(format!("pieces of edge {e} do not span [0,1]")));
            }
            for (i, p) in list.iter().enumerate() {
                if p.start >= p.end {
                    return Err(Error::Map(format!("empty piece {i} on edge {e}")));
                }
                if i > 0 && list[i - 1].end != p.start {
                    return Err(Error::Map(format!("gap before piece {i} on edge {e}")));
                }
                if p.target >= graph.edge_count() {
                    return Err(Error::Map(format!("piece {i} on edge {e} targets a missing edge")));
                }
                let (lo, hi) = p.image_bounds()?;
                if lo < Q::zero() || hi > Q::one() {
                    return Err(Error::Map(format!(
                        "piece {i} on edge {e} leaves its target edge ({}..{})",
                        fmt_q(&lo),
                        fmt_q(&hi)
                    )));
                }
            }
        }
        Ok(Self { graph, pieces })
    }

    /// Builds a map on a single-edge interval from graph-of-function
    /// breakpoints `(x_i, y_i)` with `x_0 = 0`, `x_m = 1`.
    pub fn from_interval_points(graph: Arc<MetricGraph>, pts: &[(Q, Q)]) -> Result<Self> {
        if graph.edge_count() != 1 {
            return Err(Error::Unsupported("breakpoint form needs a one-edge interval".into()));
        }
        let pieces = profile_pieces(pts, 0)?;
        let f = Self::new(graph, vec![pieces])?;
        f.require_continuous()?;
        Ok(f)
    }

    pub fn identity(graph: Arc<MetricGraph>) -> Self {
        let pieces = (0..graph.edge_count())
            .map(|e| {
                vec![Piece { start: Q::zero(), end: Q::one(), target: e, a: Q::one(), b: Q::zero() }]
            })
            .collect();
        Self { graph, pieces }
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn pieces(&self) -> &[Vec<Piece>] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    pub fn same_domain(&self, other: &PLMap) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph
    }

    pub(crate) fn piece_at(&self, edge: usize, t: &Q) -> &Piece {
        let list = &self.pieces[edge];
        let idx = list.partition_point(|p| p.end <= *t);
        &list[idx.min(list.len() - 1)]
    }

    /// Exact image of `p`, canonicalized.
    pub fn apply(&self, p: &GraphPoint) -> Result<GraphPoint> {
        if !self.graph.contains(p) {
            return Err(Error::Point(format!("{p} is not on the domain")));
        }
        let piece = self.piece_at(p.edge, &p.t);
        Ok(self.graph.canonicalize(piece.target, piece.eval(&p.t)?))
    }

    /// `k`-fold application.
    pub fn apply_n(&self, p: &GraphPoint, k: usize) -> Result<GraphPoint> {
        let mut x = p.clone();
        for _ in 0..k {
            x = self.apply(&x)?;
        }
        Ok(x)
    }

    pub(crate) fn require_continuous(&self) -> Result<()> {
        let bad = super::validate::continuity_violations(self)?;
        match bad.first() {
            None => Ok(()),
            Some(v) => Err(Error::Map(format!("discontinuous at {}", v.at))),
        }
    }
}

/// Pieces on `edge` from function-graph breakpoints `(x_i, y_i)` with
/// every piece landing on `target`.
pub fn profile_pieces(pts: &[(Q, Q)], target: usize) -> Result<Vec<Piece>> {
    if pts.len() < 2 {
        return Err(Error::Map("need at least two breakpoints".into()));
    }
    let mut out = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        if x1 <= x0 {
            return Err(Error::Map("breakpoints must increase".into()));
        }
        let a = rational::div(&rational::sub(y1, y0)?, &rational::sub(x1, x0)?)?;
        let b = rational::sub(y0, &rational::mul(&a, x0)?)?;
        out.push(Piece { start: *x0, end: *x1, target, a, b });
    }
    Ok(out)
}

/// Merges adjacent pieces that share target and affine coefficients.
pub(crate) fn merge_collinear(list: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(list.len());
    for p in list {
        if let Some(last) = out.last_mut() {
            if last.target == p.target && last.a == p.a && last.b == p.b && last.end == p.start {
                last.end = p.end;
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// Pieces of `f ∘ g` on one source edge, handed one at a time to `sink`
/// before merging. Used by [`compose`] and by streaming lap counts.
pub(crate) fn compose_edge(
    f: &PLMap,
    g_pieces: &[Piece],
    sink: &mut dyn FnMut(Piece) -> Result<()>,
) -> Result<()> {
    for gp in g_pieces {
        let fl = &f.pieces[gp.target];
        if gp.a.is_zero() {
            let y = gp.b;
            let fp = f.piece_at(gp.target, &y);
            let v = fp.eval(&y)?;
            sink(Piece { start: gp.start, end: gp.end, target: fp.target, a: Q::zero(), b: v })?;
            continue;
        }
        let y0 = gp.eval(&gp.start)?;
        let y1 = gp.eval(&gp.end)?;
        let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        // f pieces meeting the open image interval, in increasing y
        let first = fl.partition_point(|p| p.end <= lo);
        let mut last = fl.partition_point(|p| p.start < hi);
        if last <= first {
            last = first + 1;
        }
        let run = &fl[first..last];
        let emit = |fp: &Piece, t0: Q, t1: Q, sink: &mut dyn FnMut(Piece) -> Result<()>| -> Result<()> {
            let a = rational::mul(&fp.a, &gp.a)?;
            let b = rational::affine(&fp.a, &gp.b, &fp.b)?;
            sink(Piece { start: t0, end: t1, target: fp.target, a, b })
        };
        // preimage in t of a y-breakpoint
        let pull = |y: &Q| -> Result<Q> { rational::div(&rational::sub(y, &gp.b)?, &gp.a) };
        if gp.a.is_positive() {
            let mut t0 = gp.start;
            for (i, fp) in run.iter().enumerate() {
                let t1 = if i + 1 == run.len() { gp.end } else { pull(&fp.end)? };
                emit(fp, t0, t1, sink)?;
                t0 = t1;
            }
        } else {
            let mut t0 = gp.start;
            for (i, fp) in run.iter().enumerate().rev() {
                let t1 = if i == 0 { gp.end } else { pull(&fp.start)? };
                emit(fp, t0, t1, sink)?;
                t0 = t1;
            }
        }
    }
    Ok(())
}

/// Exact composition `f ∘ g` with collinear merging.
pub fn compose(f: &PLMap, g: &PLMap) -> Result<PLMap> {
    compose_capped(f, g, DEFAULT_PIECE_CAP)
}

pub fn compose_capped(f: &PLMap, g: &PLMap, cap: usize) -> Result<PLMap> {
    if !f.same_domain(g) {
        return Err(Error::DomainMismatch);
    }
    let mut total = 0usize;
    let mut pieces = Vec::with_capacity(g.pieces.len());
    for gl in &g.pieces {
        let mut raw: Vec<Piece> = Vec::new();
        compose_edge(f, gl, &mut |p| {
            if let Some(last) = raw.last_mut() {
                if last.target == p.target && last.a == p.a && last.b == p.b {
                    last.end = p.end;
                    return Ok(());
                }
            }
            raw.push(p);
            if total + raw.len() > cap {
                return Err(Error::Resource(format!("composition exceeds {cap} pieces")));
            }
            Ok(())
        })?;
        let merged = merge_collinear(raw);
        total += merged.len();
        pieces.push(merged);
    }
    Ok(PLMap { graph: g.graph.clone(), pieces })
}

/// Exact `n`-fold iterate by repeated squaring.
pub fn iterate(f: &PLMap, n: usize) -> Result<PLMap> {
    iterate_capped(f, n, DEFAULT_PIECE_CAP)
}

pub fn iterate_capped(f: &PLMap, n: usize, cap: usize) -> Result<PLMap> {
    if n == 0 {
        return Err(Error::Map("iterate needs n >= 1".into()));
    }
    let mut result: Option<PLMap> = None;
    let mut base = f.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => compose_capped(&base, &r, cap)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = compose_capped(&base, &base, cap)?;
    }
    Ok(result.unwrap())
}
