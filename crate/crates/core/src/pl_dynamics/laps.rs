use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::phase_space::GraphPoint;
use crate::rational::{self, Q};

use super::map::{compose_edge, iterate_capped, PLMap, Piece, DEFAULT_PIECE_CAP};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Lap {
    Up,
    Down,
    Flat,
}

fn lap_of(p: &Piece) -> Lap {
    if p.a.is_zero() {
        Lap::Flat
    } else if p.a.is_positive() {
        Lap::Up
    } else {
        Lap::Down
    }
}

fn require_interval(f: &PLMap) -> Result<()> {
    if f.graph().edge_count() != 1 {
        return Err(Error::Unsupported("lap numbers need an interval domain".into()));
    }
    f.require_continuous()
}

/// Lap number of `f^n`: the count of maximal intervals of monotonicity.
/// A flat piece is one interval on its own and breaks monotone runs.
pub fn lap_number(f: &PLMap, n: usize) -> Result<u64> {
    lap_number_capped(f, n, DEFAULT_PIECE_CAP)
}

pub fn lap_number_capped(f: &PLMap, n: usize, cap: usize) -> Result<u64> {
    require_interval(f)?;
    if n == 0 {
        return Err(Error::Map("lap number needs n >= 1".into()));
    }
    let mut laps = 0u64;
    let mut last: Option<Lap> = None;
    let mut count = |p: &Piece| {
        let k = lap_of(p);
        if k == Lap::Flat || last != Some(k) {
            laps += 1;
        }
        last = Some(k);
    };
    if n == 1 {
        crate::pl_dynamics::map::merge_collinear(f.pieces()[0].clone()).iter().for_each(&mut count);
        return Ok(laps);
    }
    // the last composition step is streamed so f^n never has to be stored
    let prev = iterate_capped(f, n - 1, cap)?;
    let mut pending: Option<Piece> = None;
    compose_edge(f, &prev.pieces()[0], &mut |p| {
        match pending.as_mut() {
            Some(q) if q.target == p.target && q.a == p.a && q.b == p.b => q.end = p.end,
            _ => {
                if let Some(q) = pending.replace(p) {
                    count(&q);
                }
            }
        }
        Ok(())
    })?;
    if let Some(q) = pending {
        count(&q);
    }
    Ok(laps)
}

/// Number of connected components of `f^{-1}(y)` for a map given by its
/// pieces (any graph).
pub fn preimage_components(f: &PLMap, y: &GraphPoint) -> Result<usize> {
    let g = f.graph();
    // representations of y on the edges it lies on
    let reps: Vec<(usize, Q)> = match g.vertex_at(y) {
        Some(v) => g
            .incident(v)
            .iter()
            .map(|&e| (e, if g.edge(e).from == v { Q::zero() } else { Q::one() }))
            .collect(),
        None => vec![(y.edge, y.t)],
    };
    let ne = g.edge_count();
    let nv = g.vertex_count();
    // per source edge, closed preimage intervals in t
    let mut per_edge: Vec<Vec<(Q, Q)>> = vec![Vec::new(); ne];
    for (e, list) in f.pieces().iter().enumerate() {
        for p in list {
            for (te, ty) in &reps {
                if p.target != *te {
                    continue;
                }
                if p.a.is_zero() {
                    if p.b == *ty {
                        per_edge[e].push((p.start, p.end));
                    }
                } else {
                    let t = rational::div(&rational::sub(ty, &p.b)?, &p.a)?;
                    if t >= p.start && t <= p.end {
                        per_edge[e].push((t, t));
                    }
                }
            }
        }
    }
    // union-find over merged intervals and vertices
    let mut parent: Vec<usize> = (0..nv).collect();
    let mut used = vec![false; nv];
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = 0usize;
    let mut roots_from_vertices = Vec::new();
    for (e, iv) in per_edge.iter_mut().enumerate() {
        if iv.is_empty() {
            continue;
        }
        iv.sort();
        let mut merged: Vec<(Q, Q)> = Vec::new();
        for (lo, hi) in iv.drain(..) {
            match merged.last_mut() {
                Some(m) if lo <= m.1 => {
                    if hi > m.1 {
                        m.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        let edge = g.edge(e);
        for (lo, hi) in merged {
            let touches_from = lo.is_zero();
            let touches_to = hi.is_one();
            match (touches_from, touches_to) {
                (false, false) => components += 1,
                (true, false) => used[edge.from] = true,
                (false, true) => used[edge.to] = true,
                (true, true) => {
                    used[edge.from] = true;
                    used[edge.to] = true;
                    let a = find(&mut parent, edge.from);
                    let b = find(&mut parent, edge.to);
                    parent[a] = b;
                }
            }
        }
    }
    for v in 0..nv {
        if used[v] {
            roots_from_vertices.push(find(&mut parent, v));
        }
    }
    roots_from_vertices.sort_unstable();
    roots_from_vertices.dedup();
    Ok(components + roots_from_vertices.len())
}

/// Candidate points where the preimage-component count of `f` can attain
/// its supremum: images of breakpoints and vertices plus one interior
/// image point per piece.
pub fn phi_candidates(f: &PLMap) -> Result<Vec<GraphPoint>> {
    let g = f.graph();
    let mut set = BTreeSet::new();
    for list in f.pieces() {
        for p in list {
            set.insert(g.canonicalize(p.target, p.eval(&p.start)?));
            set.insert(g.canonicalize(p.target, p.eval(&p.end)?));
            let mid = (p.start + p.end) / 2;
            set.insert(g.canonicalize(p.target, p.eval(&mid)?));
        }
    }
    Ok(set.into_iter().collect())
}

/// `φ(f, n)`: the supremum over `x` of the number of components of
/// `f^{-n}(x)`.
pub fn phi(f: &PLMap, n: usize) -> Result<u64> {
    phi_capped(f, n, DEFAULT_PIECE_CAP)
}

pub fn phi_capped(f: &PLMap, n: usize, cap: usize) -> Result<u64> {
    f.require_continuous()?;
    let fnn = iterate_capped(f, n, cap)?;
    phi_of_map(&fnn)
}

/// Supremum of preimage-component counts of a single map.
pub fn phi_of_map(f: &PLMap) -> Result<u64> {
    let mut best = 0usize;
    for y in phi_candidates(f)? {
        best = best.max(preimage_components(f, &y)?);
    }
    Ok(best as u64)
}
