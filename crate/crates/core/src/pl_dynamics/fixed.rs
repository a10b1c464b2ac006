use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{FloatGraph, GraphPoint, Loc, MetricGraph};
use crate::rational::{self, Q};

use super::float::FloatMap;
use super::map::{iterate, PLMap};
use super::validate::homeo_certificate;

/// Exact fixed-point set: isolated points plus maximal fixed segments
/// `(edge, start, end)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FixedSet {
    pub points: Vec<GraphPoint>,
    pub segments: Vec<(usize, Q, Q)>,
}

impl FixedSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.segments.is_empty()
    }

    pub fn contains(&self, g: &MetricGraph, p: &GraphPoint) -> bool {
        if self.points.contains(p) {
            return true;
        }
        let reps: Vec<(usize, Q)> = match g.vertex_at(p) {
            Some(v) => g
                .incident(v)
                .iter()
                .map(|&e| (e, if g.edge(e).from == v { Q::zero() } else { Q::one() }))
                .collect(),
            None => vec![(p.edge, p.t)],
        };
        self.segments
            .iter()
            .any(|(e, s, u)| reps.iter().any(|(re, rt)| re == e && rt >= s && rt <= u))
    }

    /// True when the segments cover every edge completely.
    pub fn is_everything(&self, g: &MetricGraph) -> bool {
        (0..g.edge_count()).all(|e| {
            self.segments.iter().any(|(se, s, u)| *se == e && s.is_zero() && u.is_one())
        })
    }
}

pub fn fixed_points(f: &PLMap) -> Result<FixedSet> {
    let g = f.graph();
    let mut segments: Vec<(usize, Q, Q)> = Vec::new();
    let mut points = BTreeSet::new();
    for (e, list) in f.pieces().iter().enumerate() {
        for p in list {
            if p.target != e {
                continue;
            }
            if p.a.is_one() {
                if p.b.is_zero() {
                    match segments.last_mut() {
                        Some(last) if last.0 == e && last.2 == p.start => last.2 = p.end,
                        _ => segments.push((e, p.start, p.end)),
                    }
                }
                continue;
            }
            let t = rational::div(&p.b, &rational::sub(&Q::one(), &p.a)?)?;
            if t >= p.start && t <= p.end {
                points.insert(g.canonicalize(e, t));
            }
        }
    }
    for v in 0..g.vertex_count() {
        let x = g.vertex_point(v);
        if f.apply(&x)? == x {
            points.insert(x);
        }
    }
    let set = FixedSet { points: Vec::new(), segments };
    let points = points.into_iter().filter(|p| !set.contains(g, p)).collect();
    Ok(FixedSet { points, ..set })
}

/// `Fix(f^k)`.
pub fn periodic_points(f: &PLMap, k: usize) -> Result<FixedSet> {
    fixed_points(&iterate(f, k)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Wandering {
    Wandering,
    Nonwandering,
    ProbeNonrecurrent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WanderingProbe {
    pub horizon: usize,
    pub radius: f64,
}

impl Default for WanderingProbe {
    fn default() -> Self {
        Self { horizon: 10_000, radius: 1e-2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WanderingVerdict {
    pub status: Wandering,
    /// False when the verdict comes from the orbit probe.
    pub exact: bool,
}

/// Largest return time searched for periodic orbits of circle maps.
pub const CIRCLE_PERIOD_SEARCH: usize = 64;

/// Exponent `M` such that `p` is wandering iff `p ∉ Fix(f^M)`, when the
/// graph has at least one vertex of order ≠ 2.
///
/// `f^M` fixes every such vertex and maps every arc between them onto
/// itself preserving orientation, so on each arc it is an increasing
/// homeomorphism whose non-fixed points drift to the ends of their gap.
fn arc_period(f: &PLMap) -> Result<Option<usize>> {
    let g = f.graph();
    let topo: Vec<usize> = (0..g.vertex_count()).filter(|&v| g.degree(v) != 2).collect();
    if topo.is_empty() {
        return Ok(None);
    }
    let mut m = 1u64;
    let vpoint: Vec<GraphPoint> = topo.iter().map(|&v| g.vertex_point(v)).collect();
    let mut perm = Vec::with_capacity(topo.len());
    for p in &vpoint {
        let img = f.apply(p)?;
        let j = vpoint
            .iter()
            .position(|q| *q == img)
            .ok_or_else(|| Error::NotHomeomorphism("branch structure not preserved".into()))?;
        perm.push(j);
    }
    m = rational::lcm(m, cycle_lcm(&perm));
    let (arc_of_edge, arc_count, loops) = arcs(g);
    let mut arc_perm = vec![usize::MAX; arc_count];
    for (e, &a) in arc_of_edge.iter().enumerate() {
        if arc_perm[a] != usize::MAX {
            continue;
        }
        let img = f.apply(&g.point(e, rational::half())?)?;
        arc_perm[a] = arc_of_edge[img.edge];
    }
    m = rational::lcm(m, cycle_lcm(&arc_perm));
    if loops {
        m *= 2;
    }
    Ok(Some(m as usize))
}

fn cycle_lcm(perm: &[usize]) -> u64 {
    let mut seen = vec![false; perm.len()];
    let mut m = 1u64;
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0u64;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        m = rational::lcm(m, len);
    }
    m
}

/// Arc id per edge, arc count, and whether some arc starts and ends at the
/// same topological vertex.
fn arcs(g: &MetricGraph) -> (Vec<usize>, usize, bool) {
    let ne = g.edge_count();
    let mut arc = vec![usize::MAX; ne];
    let mut count = 0;
    let mut loops = false;
    for e0 in 0..ne {
        if arc[e0] != usize::MAX {
            continue;
        }
        let id = count;
        count += 1;
        arc[e0] = id;
        let mut ends = Vec::new();
        for start in [g.edge(e0).from, g.edge(e0).to] {
            let (mut v, mut e) = (start, e0);
            while g.degree(v) == 2 {
                let next = *g.incident(v).iter().find(|&&x| x != e).unwrap();
                if arc[next] == id {
                    break;
                }
                arc[next] = id;
                let ed = g.edge(next);
                v = if ed.from == v { ed.to } else { ed.from };
                e = next;
            }
            ends.push(v);
        }
        if ends[0] == ends[1] && g.degree(ends[0]) != 2 {
            loops = true;
        }
    }
    (arc, count, loops)
}

/// Wandering classification for a homeomorphism.
///
/// Exact on graphs with a vertex of order ≠ 2 and on circles whose square
/// has a periodic point of period ≤ [`CIRCLE_PERIOD_SEARCH`]; otherwise the
/// orbit of the ball `B(p, r)` is probed for `probe.horizon` steps.
pub fn wandering_status(
    f: &PLMap,
    p: &GraphPoint,
    probe: WanderingProbe,
) -> Result<WanderingVerdict> {
    homeo_certificate(f)?;
    let g = f.graph();
    if !g.contains(p) {
        return Err(Error::Point(format!("{p} is not on the domain")));
    }
    if let Some(set) = exact_recurrent_set(f)? {
        let status = if set.contains(g, p) { Wandering::Nonwandering } else { Wandering::Wandering };
        return Ok(WanderingVerdict { status, exact: true });
    }
    Ok(WanderingVerdict { status: probe_orbit(f, p, probe), exact: false })
}

/// The nonwandering set as a fixed set of some iterate, when a proof-backed
/// criterion applies.
pub fn exact_recurrent_set(f: &PLMap) -> Result<Option<FixedSet>> {
    let attempt = || -> Result<Option<FixedSet>> {
        if let Some(m) = arc_period(f)? {
            return Ok(Some(periodic_points(f, m)?));
        }
        let sq = iterate(f, 2)?;
        let mut power = sq.clone();
        for _ in 1..=CIRCLE_PERIOD_SEARCH {
            let fix = fixed_points(&power)?;
            if !fix.is_empty() {
                return Ok(Some(fix));
            }
            power = super::map::compose(&sq, &power)?;
        }
        Ok(None)
    };
    match attempt() {
        Err(e) if e.is_resource() => Ok(None),
        other => other,
    }
}

fn probe_orbit(f: &PLMap, p: &GraphPoint, probe: WanderingProbe) -> Wandering {
    let fm = FloatMap::new(f);
    let fg = fm.graph();
    let center = FloatGraph::loc(p);
    let r = probe.radius;
    // the ball B(p, r): p, a fine grid on every edge, and a ladder along p's edge
    let mut ball = vec![center];
    for e in 0..fg.edge_count() {
        for k in 0..=64 {
            let loc = Loc::from_t(e, k as f64 / 64.0);
            if fg.dist_loc(&loc, &center) < r {
                ball.push(loc);
            }
        }
    }
    let len = fg.edge_length(center.edge as usize);
    for j in 1..8 {
        let dt = r * j as f64 / (8.0 * len);
        for t in [center.t() - dt, center.t() + dt] {
            if (0.0..=1.0).contains(&t) {
                ball.push(Loc::from_t(center.edge as usize, t));
            }
        }
    }
    for _ in 0..probe.horizon {
        for x in ball.iter_mut() {
            *x = fm.apply(x);
            if fg.dist_loc(x, &center) < r {
                return Wandering::Nonwandering;
            }
        }
    }
    Wandering::ProbeNonrecurrent
}
