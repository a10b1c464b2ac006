use std::sync::Arc;

use serde::Serialize;

use crate::entropy_lab::{
    growth_exponent, EstimationProtocol, GrowthReport, MetricSystem, NetOptions, PlNet, PlSystem, Prepared, State,
};
use crate::error::{Error, Result};
use crate::phase_space::{FloatGraph, GraphPoint, Loc};
use crate::pl_dynamics::PLMap;
use crate::rational::Q;

use super::subset::{hausdorff_distance, induced_map, FiniteSubset};

pub const MAX_SYMMETRIC_POWER: usize = 3;
/// Symmetric-product samples above this size skip greedy spanning.
pub const SYMMETRIC_SPAN_BUDGET: usize = 200_000;

/// `F_k(f)`: the induced map on nonempty subsets of at most `k` points,
/// with the Hausdorff metric.
pub struct SymmetricProductSystem {
    base: PlSystem,
    k: usize,
}

fn as_set(p: &State) -> Result<&FiniteSubset> {
    match p {
        State::Set(s) => Ok(s),
        other => Err(Error::Point(format!("expected a finite subset, got {other}"))),
    }
}

pub fn symmetric_product_system(f: &PLMap, name: &str, k: usize) -> Result<SymmetricProductSystem> {
    if k == 0 || k > MAX_SYMMETRIC_POWER {
        return Err(Error::Unsupported(format!("F_k needs 1 <= k <= {MAX_SYMMETRIC_POWER}")));
    }
    Ok(SymmetricProductSystem { base: PlSystem::new(name, f.clone())?, k })
}

fn binom(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn subset_count(n: usize, k: usize) -> usize {
    (1..=k).fold(0usize, |acc, j| acc.saturating_add(binom(n, j)))
}

impl SymmetricProductSystem {
    pub fn order(&self) -> usize {
        self.k
    }

    fn float_hausdorff(g: &FloatGraph, a: &[Loc], b: &[Loc]) -> f64 {
        let one_way = |x: &[Loc], y: &[Loc]| {
            x.iter()
                .map(|p| y.iter().map(|q| g.dist_loc(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(a, b).max(one_way(b, a))
    }
}

impl MetricSystem for SymmetricProductSystem {
    fn descriptor(&self) -> String {
        format!("F{}({})", self.k, self.base.descriptor())
    }

    fn distance(&self, p: &State, q: &State) -> Result<Q> {
        hausdorff_distance(self.base.map().graph(), as_set(p)?, as_set(q)?)
    }

    fn apply(&self, p: &State) -> Result<State> {
        Ok(State::Set(induced_map(self.base.map(), as_set(p)?)?))
    }

    fn sample(&self, mesh: &Q) -> Result<Vec<State>> {
        let grid: Vec<GraphPoint> = self.base.map().graph().sample_grid(mesh)?;
        let mut out = Vec::new();
        let mut combo = Vec::new();
        for size in 1..=self.k {
            combo.clear();
            combo.extend(0..size);
            if size > grid.len() {
                break;
            }
            loop {
                let pts = combo.iter().map(|&i| grid[i].clone()).collect();
                out.push(State::Set(FiniteSubset::new(pts)?));
                if !next_combination(&mut combo, grid.len()) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn float_dn(&self, n: usize, p: &State, q: &State) -> Result<f64> {
        let fm = self.base.float_map();
        let mut a: Vec<Loc> = as_set(p)?.points().iter().map(FloatGraph::loc).collect();
        let mut b: Vec<Loc> = as_set(q)?.points().iter().map(FloatGraph::loc).collect();
        let mut best = 0.0f64;
        for k in 0..n.max(1) {
            if k > 0 {
                a.iter_mut().for_each(|x| *x = fm.apply(x));
                b.iter_mut().for_each(|x| *x = fm.apply(x));
            }
            best = best.max(Self::float_hausdorff(fm.graph(), &a, &b));
        }
        Ok(best)
    }

    fn prepare(&self, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Box<dyn Prepared>> {
        let mut mesh = mesh;
        let mut coarsened = false;
        loop {
            let net = PlNet::build(&self.base, n, eps, mesh, opts)?;
            let fits = subset_count(net.len(), self.k) <= opts.state_budget
                && bitset_words(net.len(), n) <= SUBSET_BITSET_BUDGET;
            if fits {
                return Ok(Box::new(SubsetNet::new(net, self.k, coarsened, opts)));
            }
            if mesh >= eps {
                return Err(Error::Resource(format!(
                    "F{} sample of {} base points at n={n} exceeds the state or bitset budget",
                    self.k,
                    net.len()
                )));
            }
            mesh = (mesh * 2.0).min(eps);
            coarsened = true;
        }
    }

    fn power(&self, k: usize) -> Result<Arc<dyn MetricSystem>> {
        let base = self.base.power(k)?;
        let f = base.pl_map().expect("power of a PL system is PL");
        Ok(Arc::new(symmetric_product_system(f, &base.descriptor(), self.k)?))
    }
}

/// Advances a strictly increasing index tuple over `0..n` in lexicographic
/// order; false after the last one.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < n - r + i {
            c[i] += 1;
            for j in (i + 1)..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Subsets of at most `k` base-net points, ordered by size and then
/// lexicographically.
///
/// For every time `t < n` and base point `i` the net stores the bitset
/// `W_t(i)` of base points within `ε` of `f^t(i)`. The cover set
/// `S(A) = ⋂_t ⋃_{a ∈ A} W_t(a)` holds the points that stay `ε`-close to
/// `A` for the whole orbit, and `d_n^H(A, B) < ε` exactly when
/// `B ⊆ S(A)` and `A ⊆ S(B)`.
pub struct SubsetNet {
    base: PlNet,
    k: usize,
    words: usize,
    bits: Vec<u64>,
    coarsened: bool,
    span_budget: usize,
}

/// Cap on stored time-slice bitset words.
pub const SUBSET_BITSET_BUDGET: usize = 1 << 27;

fn bitset_words(len: usize, n: usize) -> usize {
    len.saturating_mul(n).saturating_mul(len.div_ceil(64))
}

impl SubsetNet {
    fn new(base: PlNet, k: usize, coarsened: bool, opts: &NetOptions) -> Self {
        let len = base.len();
        let n = base.orbit_len();
        let words = len.div_ceil(64);
        let mut bits = vec![0u64; len * n * words];
        let g = base.float_graph();
        let eps = base.eps();
        let mut col = vec![0f64; len];
        for t in 0..n {
            for (i, c) in col.iter_mut().enumerate() {
                *c = base.orbit(i)[t];
            }
            let slab = &mut bits[t * len * words..(t + 1) * len * words];
            for i in 0..len {
                slab[i * words + i / 64] |= 1 << (i % 64);
                for j in i + 1..len {
                    if g.dist_code(col[i], col[j]) < eps {
                        slab[i * words + j / 64] |= 1 << (j % 64);
                        slab[j * words + i / 64] |= 1 << (i % 64);
                    }
                }
            }
        }
        SubsetNet { base, k, words, bits, coarsened, span_budget: opts.span_budget.min(SYMMETRIC_SPAN_BUDGET) }
    }

    #[inline]
    fn row(&self, t: usize, i: usize) -> &[u64] {
        let off = (t * self.base.len() + i) * self.words;
        &self.bits[off..off + self.words]
    }

    #[inline]
    fn near(&self, t: usize, i: u32, j: u32) -> bool {
        self.row(t, i as usize)[j as usize / 64] >> (j % 64) & 1 == 1
    }

    fn cover(&self, a: &[u32], out: &mut Vec<u64>) {
        out.clear();
        out.resize(self.words, u64::MAX);
        for t in 0..self.base.orbit_len() {
            for (w, o) in out.iter_mut().enumerate() {
                *o &= a.iter().fold(0u64, |u, &x| u | self.row(t, x as usize)[w]);
            }
        }
    }

    #[cfg(test)]
    /// `A ⊆ S(B)`: every point of `A` has a point of `B` within `ε` at
    /// every time.
    fn covered_by(&self, a: &[u32], b: &[u32]) -> bool {
        (0..self.base.orbit_len()).all(|t| a.iter().all(|&x| b.iter().any(|&y| self.near(t, x, y))))
    }

    #[cfg(test)]
    fn close(&self, a: &[u32], b: &[u32]) -> bool {
        self.covered_by(a, b) && self.covered_by(b, a)
    }

    /// Index of a sorted subset of base indices.
    fn rank(&self, c: &[u32]) -> usize {
        let n = self.base.len();
        let r = c.len();
        let mut idx: usize = (1..r).map(|j| binom(n, j)).sum();
        let mut lo = 0usize;
        for (i, &v) in c.iter().enumerate() {
            let rest = r - 1 - i;
            // subsets whose i-th entry lies in lo..v
            idx += binom(n - lo, rest + 1) - binom(n - v as usize, rest + 1);
            lo = v as usize + 1;
        }
        idx
    }

    fn unrank(&self, mut idx: usize) -> Vec<u32> {
        let n = self.base.len();
        let mut r = 1;
        while idx >= binom(n, r) {
            idx -= binom(n, r);
            r += 1;
        }
        let mut out = Vec::with_capacity(r);
        let mut v = 0usize;
        for i in 0..r {
            let rest = r - 1 - i;
            loop {
                let block = binom(n - v - 1, rest);
                if idx < block {
                    break;
                }
                idx -= block;
                v += 1;
            }
            out.push(v as u32);
            v += 1;
        }
        out
    }

    fn dn_sets(&self, a: &[u32], b: &[u32]) -> f64 {
        let g = self.base.float_graph();
        let mut best = 0.0f64;
        for t in 0..self.base.orbit_len() {
            let one_way = |x: &[u32], y: &[u32]| {
                x.iter()
                    .map(|&i| {
                        let xi = self.base.orbit(i as usize)[t];
                        y.iter()
                            .map(|&j| g.dist_code(xi, self.base.orbit(j as usize)[t]))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max)
            };
            best = best.max(one_way(a, b)).max(one_way(b, a));
        }
        best
    }
}

fn members(set: &[u64]) -> Vec<u32> {
    let mut out = Vec::new();
    for (w, &word) in set.iter().enumerate() {
        let mut x = word;
        while x != 0 {
            out.push((w * 64) as u32 + x.trailing_zeros());
            x &= x - 1;
        }
    }
    out
}

fn has(set: &[u64], i: u32) -> bool {
    set[i as usize / 64] >> (i % 64) & 1 == 1
}

impl Prepared for SubsetNet {
    fn len(&self) -> usize {
        subset_count(self.base.len(), self.k)
    }

    fn state(&self, i: usize) -> Result<State> {
        let pts = self
            .unrank(i)
            .iter()
            .map(|&j| match self.base.state(j as usize)? {
                State::Point(p) => Ok(p),
                _ => unreachable!("base net holds graph points"),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(State::Set(FiniteSubset::new(pts)?))
    }

    fn dn(&self, i: usize, j: usize) -> f64 {
        self.dn_sets(&self.unrank(i), &self.unrank(j))
    }

    fn neighbors_until(&self, i: usize, f: &mut dyn FnMut(usize) -> bool) -> bool {
        let a = self.unrank(i);
        let mut s = Vec::new();
        self.cover(&a, &mut s);
        let cand = members(&s);
        // bit t·|A| + r of a profile: the candidate is within ε of a_r at time t
        let bits = self.base.orbit_len() * a.len();
        let pw = bits.div_ceil(64);
        let mut prof = vec![0u64; cand.len() * pw];
        for (ci, &c) in cand.iter().enumerate() {
            for t in 0..self.base.orbit_len() {
                for (r, &x) in a.iter().enumerate() {
                    if self.near(t, x, c) {
                        let b = t * a.len() + r;
                        prof[ci * pw + b / 64] |= 1 << (b % 64);
                    }
                }
            }
        }
        let full = |w: usize| if w + 1 < pw || bits % 64 == 0 { u64::MAX } else { (1u64 << (bits % 64)) - 1 };
        let mut acc = vec![0u64; pw];
        let mut combo = Vec::new();
        for size in 1..=self.k.min(cand.len()) {
            combo.clear();
            combo.extend(0..size);
            loop {
                acc.iter_mut().for_each(|w| *w = 0);
                for &ci in &combo {
                    for (w, p) in acc.iter_mut().zip(&prof[ci * pw..(ci + 1) * pw]) {
                        *w |= p;
                    }
                }
                if acc.iter().enumerate().all(|(w, &x)| x == full(w)) {
                    let b: Vec<u32> = combo.iter().map(|&x| cand[x]).collect();
                    if b != a && f(self.rank(&b)) {
                        return true;
                    }
                }
                if !next_combination(&mut combo, cand.len()) {
                    break;
                }
            }
        }
        false
    }

    fn greedy_separated(&self) -> usize {
        let n = self.base.len();
        let words = self.words;
        // kept sets indexed by their smallest element, with their cover sets
        let mut by_min: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut kept: Vec<Vec<u32>> = Vec::new();
        let mut kept_cover: Vec<u64> = Vec::new();
        let mut s = Vec::new();
        let mut combo = Vec::new();
        for size in 1..=self.k.min(n) {
            combo.clear();
            combo.extend(0..size);
            loop {
                let a: Vec<u32> = combo.iter().map(|&x| x as u32).collect();
                self.cover(&a, &mut s);
                let blocked = members(&s).into_iter().any(|x| {
                    by_min[x as usize].iter().any(|&id| {
                        let sb = &kept_cover[id as usize * words..(id as usize + 1) * words];
                        kept[id as usize].iter().all(|&y| has(&s, y)) && a.iter().all(|&y| has(sb, y))
                    })
                });
                if !blocked {
                    by_min[a[0] as usize].push(kept.len() as u32);
                    kept.push(a);
                    kept_cover.extend_from_slice(&s);
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
        kept.len()
    }

    fn greedy_spanning(&self) -> Option<usize> {
        if self.len() > self.span_budget {
            return None;
        }
        let mut off = vec![0usize];
        let mut flat: Vec<u32> = Vec::new();
        for i in 0..self.len() {
            self.for_each_neighbor(i, &mut |j| flat.push(j as u32));
            off.push(flat.len());
        }
        Some(crate::entropy_lab::lazy_greedy_cover_with(self.len(), &|i, f| {
            flat[off[i]..off[i + 1]].iter().for_each(|&j| f(j as usize))
        }))
    }

    fn mesh(&self) -> f64 {
        self.base.mesh()
    }

    fn flags(&self) -> Vec<String> {
        let mut f = self.base.flags();
        if self.coarsened {
            f.push("subset_mesh_coarsened".into());
        }
        if self.len() > self.span_budget {
            f.push("span_skipped".into());
        }
        f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub k: usize,
    pub exponent: f64,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperspaceTrend {
    pub rows: Vec<TrendRow>,
    /// Each step raises the estimate by at least `min_step`.
    pub increasing: bool,
    pub min_step: f64,
    #[serde(skip)]
    pub reports: Vec<GrowthReport>,
}

/// Exponent estimates of `F_k(f)` for `k = 1..=k_max`.
pub fn hyperspace_growth_trend(
    f: &PLMap,
    name: &str,
    k_max: usize,
    protocol: &EstimationProtocol,
    min_step: f64,
) -> Result<HyperspaceTrend> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for k in 1..=k_max {
        let sys = symmetric_product_system(f, name, k)?;
        let r = growth_exponent(&sys, protocol)?;
        rows.push(TrendRow { k, exponent: r.exponent, flags: r.flags.clone() });
        reports.push(r);
    }
    let increasing = rows.windows(2).all(|w| w[1].exponent >= w[0].exponent + min_step);
    Ok(HyperspaceTrend { rows, increasing, min_step, reports })
}
