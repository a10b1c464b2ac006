use std::sync::Arc;

use crate::error::{Error, Result};
use crate::phase_space::{decode, FloatGraph, Loc, MetricGraph};
use crate::pl_dynamics::FloatMap;
use crate::rational::from_f64_exact;

use super::prepared::Prepared;
use super::system::{NetOptions, PlSystem, State};

const MAX_PROBES: usize = 256;
const BISECT_SLACK: f64 = 1e-9;

/// Adaptive `d_n`-net of a PL graph system.
///
/// Starting from an even grid on every edge, consecutive samples are
/// bisected until their `d_n` distance is at most the mesh, so the net
/// resolves the exponentially thin regions near repelling points that an
/// even grid misses. Orbits of all net points are tabulated once and the
/// conflict graph `d_n < ε` is stored in compressed rows.
pub struct PlNet {
    graph: Arc<MetricGraph>,
    fg: FloatGraph,
    n: usize,
    eps: f64,
    mesh: f64,
    len: usize,
    orbits: Vec<f64>,
    nbr_off: Vec<usize>,
    nbr: Vec<u32>,
    flags: Vec<String>,
}

struct RawNet {
    len: usize,
    orbits: Vec<f64>,
    floor_hit: bool,
}

fn orbit_of(fm: &FloatMap, x: &Loc, n: usize, out: &mut Vec<f64>) {
    out.clear();
    fm.orbit_into(x, n, out);
}

fn exceeds(fg: &FloatGraph, a: &[f64], b: &[f64], thr: f64) -> bool {
    a.iter().zip(b).any(|(x, y)| fg.dist_code(*x, *y) > thr)
}

fn adaptive_net(graph: &MetricGraph, fm: &FloatMap, n: usize, mesh: f64, cap: usize) -> Option<RawNet> {
    let fg = fm.graph();
    let thr = mesh * (1.0 + BISECT_SLACK);
    let mut orbits: Vec<f64> = Vec::new();
    let mut len = 0usize;
    let mut floor_hit = false;
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let mut cur_orbit: Vec<f64> = Vec::with_capacity(n);
    for e in 0..fg.edge_count() {
        let segs = (fg.edge_length(e) / mesh).ceil().max(1.0) as usize;
        let grid: Vec<Loc> = (0..=segs)
            .map(|j| {
                if j == segs {
                    Loc { edge: e as u32, at_end: true, offset: 0.0 }
                } else {
                    Loc::from_t(e, j as f64 / segs as f64)
                }
            })
            .collect();
        let (from, to) = fg.endpoints(e);
        let keep_vertex = |v: usize, t_is_zero: bool| {
            let c = graph.vertex_point(v);
            c.edge == e && (c.t == crate::rational::zero()) == t_is_zero
        };
        let mut cur = grid[0];
        orbit_of(fm, &cur, n, &mut cur_orbit);
        if keep_vertex(from, true) {
            orbits.extend_from_slice(&cur_orbit);
            len += 1;
        }
        let mut stack: Vec<(Loc, Vec<f64>)> = Vec::new();
        for (j, &next) in grid.iter().enumerate().skip(1) {
            let mut o = pool.pop().unwrap_or_default();
            orbit_of(fm, &next, n, &mut o);
            stack.push((next, o));
            while let Some((top, top_orbit)) = stack.last() {
                let mut split = None;
                if exceeds(fg, &cur_orbit, top_orbit, thr) {
                    match cur.midpoint(top) {
                        Some(m) if m != cur && m != *top => split = Some(m),
                        _ => floor_hit = true,
                    }
                }
                match split {
                    Some(m) => {
                        let mut o = pool.pop().unwrap_or_default();
                        orbit_of(fm, &m, n, &mut o);
                        stack.push((m, o));
                    }
                    None => {
                        let (top, top_orbit) = stack.pop().expect("nonempty stack");
                        let is_end = stack.is_empty() && j == segs;
                        if !is_end || keep_vertex(to, false) {
                            orbits.extend_from_slice(&top_orbit);
                            len += 1;
                        }
                        cur = top;
                        pool.push(std::mem::replace(&mut cur_orbit, top_orbit));
                    }
                }
                if len > cap {
                    return None;
                }
            }
        }
    }
    Some(RawNet { len, orbits, floor_hit })
}

impl PlNet {
    pub fn build(sys: &PlSystem, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Self> {
        if n == 0 || !(eps > 0.0) || !(mesh > 0.0) {
            return Err(Error::Protocol(format!("bad net request n={n} eps={eps} mesh={mesh}")));
        }
        let fm = sys.float_map();
        let graph = sys.map().graph_arc().clone();
        let mut mesh = mesh;
        let mut flags = Vec::new();
        let raw = loop {
            let cap = opts.orbit_budget / n;
            if let Some(raw) = adaptive_net(&graph, fm, n, mesh, cap) {
                break raw;
            }
            if mesh >= eps {
                return Err(Error::Resource(format!(
                    "net for {} exceeds {} orbit entries at n={n}",
                    sys.map().graph().edge_count(),
                    opts.orbit_budget
                )));
            }
            mesh = (mesh * 2.0).min(eps);
            if !flags.iter().any(|f| f == "mesh_coarsened") {
                flags.push("mesh_coarsened".to_string());
            }
        };
        if raw.floor_hit {
            flags.push("resolution_floor".to_string());
        }
        let len = raw.len;
        let orbits = raw.orbits;
        let fg = fm.graph().clone();
        let mut net = PlNet {
            graph,
            fg,
            n,
            eps,
            mesh,
            len,
            orbits,
            nbr_off: Vec::new(),
            nbr: Vec::new(),
            flags,
        };
        net.build_conflicts();
        Ok(net)
    }

    #[inline]
    pub(crate) fn orbit(&self, i: usize) -> &[f64] {
        &self.orbits[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn float_graph(&self) -> &FloatGraph {
        &self.fg
    }

    pub(crate) fn orbit_len(&self) -> usize {
        self.n
    }

    pub(crate) fn eps(&self) -> f64 {
        self.eps
    }

    pub(crate) fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbr[self.nbr_off[i]..self.nbr_off[i + 1]]
    }

    fn conflict(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.orbit(i), self.orbit(j));
        a.iter().zip(b).all(|(x, y)| self.fg.dist_code(*x, *y) < self.eps)
    }

    fn build_conflicts(&mut self) {
        let fg = &self.fg;
        let eps = self.eps;
        let ne = fg.edge_count();
        let mut base = Vec::with_capacity(ne + 1);
        let mut ncell = Vec::with_capacity(ne);
        let mut total = 0usize;
        for e in 0..ne {
            base.push(total);
            let c = (fg.edge_length(e) / eps).ceil().max(1.0) as usize;
            ncell.push(c);
            total += c;
        }
        base.push(total);
        let cell_of = |code: f64| -> usize {
            let (e, t) = decode(code);
            let e = e.min(ne - 1);
            let c = ((t * fg.edge_length(e)) / eps).floor() as usize;
            base[e] + c.min(ncell[e] - 1)
        };
        // cells at distance below ε (endpoint distances bound the gap)
        let mut bounds = Vec::with_capacity(total);
        for e in 0..ne {
            let l = fg.edge_length(e);
            for c in 0..ncell[e] {
                let lo = (c as f64 * eps / l).min(1.0);
                let hi = (((c + 1) as f64) * eps / l).min(1.0);
                bounds.push((e, lo, hi));
            }
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); total];
        for c1 in 0..total {
            let (e1, a1, b1) = bounds[c1];
            for c2 in 0..total {
                let (e2, a2, b2) = bounds[c2];
                let touching = e1 == e2 && a1 <= b2 && a2 <= b1;
                let gap = [a1, b1]
                    .iter()
                    .flat_map(|&s| [a2, b2].map(move |t| (s, t)))
                    .map(|(s, t)| fg.dist(e1, s, e2, t))
                    .fold(f64::INFINITY, f64::min);
                if touching || gap < eps * (1.0 + 1e-9) {
                    adj[c1].push(c2 as u32);
                }
            }
        }

        let n = self.n;
        let len = self.len;
        let probes: Vec<usize> = {
            let p = n.min(MAX_PROBES);
            let mut v: Vec<usize> =
                (0..p).map(|i| if p == 1 { 0 } else { i * (n - 1) / (p - 1) }).collect();
            v.dedup();
            v
        };
        // cell of every point at every probe time, probe-major
        let np = probes.len();
        let mut cells = vec![0u32; np * len];
        const BLOCK: usize = 64;
        for lo in (0..len).step_by(BLOCK) {
            let hi = (lo + BLOCK).min(len);
            for (pi, &k) in probes.iter().enumerate() {
                for i in lo..hi {
                    cells[pi * len + i] = cell_of(self.orbits[i * n + k]) as u32;
                }
            }
        }
        let mut best = vec![(usize::MAX, 0usize); len];
        let mut counts = vec![0u32; total];
        for pi in 0..np {
            let col = &cells[pi * len..(pi + 1) * len];
            counts.iter_mut().for_each(|c| *c = 0);
            for &c in col {
                counts[c as usize] += 1;
            }
            for (i, &c) in col.iter().enumerate() {
                let cost: usize = adj[c as usize].iter().map(|&d| counts[d as usize] as usize).sum();
                if cost < best[i].0 {
                    best[i] = (cost, pi);
                }
            }
        }

        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut by_probe: Vec<Vec<u32>> = vec![Vec::new(); probes.len()];
        for (i, &(_, pi)) in best.iter().enumerate() {
            by_probe[pi].push(i as u32);
        }
        let mut start = vec![0usize; total + 1];
        let mut bucket = vec![0u32; len];
        let mut w: Vec<u32> = Vec::new();
        for (pi, members) in by_probe.iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            let k = probes[pi];
            let col = &cells[pi * len..(pi + 1) * len];
            start.iter_mut().for_each(|s| *s = 0);
            for &c in col {
                start[c as usize + 1] += 1;
            }
            for c in 0..total {
                start[c + 1] += start[c];
            }
            let mut fill = start.clone();
            for (i, &c) in col.iter().enumerate() {
                bucket[fill[c as usize]] = i as u32;
                fill[c as usize] += 1;
            }
            for &i in members {
                let i = i as usize;
                let xi = self.orbits[i * n + k];
                w.clear();
                for &c in &adj[col[i] as usize] {
                    for &j in &bucket[start[c as usize]..start[c as usize + 1]] {
                        if j as usize != i && fg.dist_code(xi, self.orbits[j as usize * n + k]) < eps {
                            w.push(j);
                        }
                    }
                }
                w.sort_unstable();
                for &j in &w {
                    if j as usize > i && self.conflict(i, j as usize) {
                        pairs.push((i as u32, j));
                    }
                }
            }
        }

        let mut deg = vec![0usize; len + 1];
        for &(i, j) in &pairs {
            deg[i as usize + 1] += 1;
            deg[j as usize + 1] += 1;
        }
        for i in 0..len {
            deg[i + 1] += deg[i];
        }
        let mut nbr = vec![0u32; deg[len]];
        let mut fill = deg.clone();
        for &(i, j) in &pairs {
            nbr[fill[i as usize]] = j;
            fill[i as usize] += 1;
            nbr[fill[j as usize]] = i;
            fill[j as usize] += 1;
        }
        for i in 0..len {
            nbr[deg[i]..deg[i + 1]].sort_unstable();
        }
        self.nbr_off = deg;
        self.nbr = nbr;
    }
}

impl Prepared for PlNet {
    fn len(&self) -> usize {
        self.len
    }

    fn state(&self, i: usize) -> Result<State> {
        let (e, t) = decode(self.orbits[i * self.n]);
        let t = from_f64_exact(t).ok_or_else(|| Error::Point(format!("offset {t}")))?;
        Ok(State::Point(self.graph.canonicalize(e, t)))
    }

    fn dn(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.orbit(i), self.orbit(j));
        a.iter().zip(b).map(|(x, y)| self.fg.dist_code(*x, *y)).fold(0.0, f64::max)
    }

    fn neighbors_until(&self, i: usize, f: &mut dyn FnMut(usize) -> bool) -> bool {
        self.neighbors(i).iter().any(|&j| f(j as usize))
    }

    fn mesh(&self) -> f64 {
        self.mesh
    }

    fn flags(&self) -> Vec<String> {
        self.flags.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_interval;
    use crate::pl_dynamics::PLMap;
    use crate::rational::{q, qi};

    fn sys(points: &[(i128, i128, i128, i128)]) -> PlSystem {
        let g = Arc::new(build_interval(qi(1)).unwrap());
        let pts: Vec<_> = points.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect();
        PlSystem::new("t", PLMap::from_interval_points(g, &pts).unwrap()).unwrap()
    }

    fn brute(net: &PlNet, i: usize) -> Vec<u32> {
        (0..net.len()).filter(|&j| j != i && net.dn(i, j) < net.eps).map(|j| j as u32).collect()
    }

    #[test]
    fn identity_net_is_the_grid() {
        let s = sys(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let net = PlNet::build(&s, 8, 0.25, 1.0 / 16.0, &NetOptions::default()).unwrap();
        assert_eq!(net.len(), 17);
        assert_eq!(net.greedy_separated(), 5);
    }

    #[test]
    fn conflicts_match_brute_force() {
        let s = sys(&[(0, 1, 0, 1), (1, 2, 1, 4), (1, 1, 1, 1)]);
        for n in [1, 7, 40] {
            let net = PlNet::build(&s, n, 0.125, 1.0 / 32.0, &NetOptions::default()).unwrap();
            for i in 0..net.len() {
                assert_eq!(net.neighbors(i), brute(&net, i).as_slice(), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn consecutive_samples_are_mesh_close() {
        let s = sys(&[(0, 1, 0, 1), (1, 2, 1, 4), (1, 1, 1, 1)]);
        let mesh = 1.0 / 32.0;
        let net = PlNet::build(&s, 64, 0.125, mesh, &NetOptions::default()).unwrap();
        for i in 1..net.len() {
            assert!(net.dn(i - 1, i) <= mesh * (1.0 + 1e-6));
        }
        // wandering drift forces refinement near the repelling end
        assert!(net.len() > 33);
    }
}
