use crate::error::{Error, Result};
use crate::rational::Q;

use super::prepared::{lazy_greedy_cover, Prepared};
use super::system::{exact_orbits, MetricSystem, State};

pub const SEP_ORACLE_MAX: usize = 40;
pub const COVER_ORACLE_MAX: usize = 20;

fn canonical(sample: &[State]) -> Vec<State> {
    let mut v = sample.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Greedy `(n, ε)`-separated subset of `sample`, scanned in canonical order.
pub fn greedy_separated(s: &dyn MetricSystem, n: usize, eps: f64, sample: &[State]) -> Result<Vec<State>> {
    let mut kept: Vec<State> = Vec::new();
    for p in canonical(sample) {
        let mut ok = true;
        for k in &kept {
            if s.float_dn(n, &p, k)? < eps {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// Dense float `d_n` matrix over an explicit sample.
pub struct MatrixSample {
    states: Vec<State>,
    dn: Vec<f64>,
    eps: f64,
}

impl MatrixSample {
    pub fn new(s: &dyn MetricSystem, n: usize, eps: f64, sample: &[State]) -> Result<Self> {
        let states = canonical(sample);
        let m = states.len();
        let mut dn = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = s.float_dn(n, &states[i], &states[j])?;
                dn[i * m + j] = d;
                dn[j * m + i] = d;
            }
        }
        Ok(MatrixSample { states, dn, eps })
    }
}

impl Prepared for MatrixSample {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn state(&self, i: usize) -> Result<State> {
        Ok(self.states[i].clone())
    }

    fn dn(&self, i: usize, j: usize) -> f64 {
        self.dn[i * self.states.len() + j]
    }

    fn neighbors_until(&self, i: usize, f: &mut dyn FnMut(usize) -> bool) -> bool {
        let m = self.states.len();
        (0..m).any(|j| j != i && self.dn[i * m + j] < self.eps && f(j))
    }

    fn mesh(&self) -> f64 {
        0.0
    }

    fn flags(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Greedy cover of `sample` by `d_n`-balls of radius `ε` centred at samples.
pub fn greedy_spanning(s: &dyn MetricSystem, n: usize, eps: f64, sample: &[State]) -> Result<usize> {
    Ok(lazy_greedy_cover(&MatrixSample::new(s, n, eps, sample)?))
}

/// Exact `d_n` matrix of a small point set, for the exact oracles.
#[derive(Clone, Debug)]
pub struct ExactDn {
    m: usize,
    d: Vec<Q>,
}

impl ExactDn {
    pub fn new(s: &dyn MetricSystem, n: usize, pts: &[State]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Protocol("d_n needs n >= 1".into()));
        }
        if pts.len() > SEP_ORACLE_MAX {
            return Err(Error::Resource(format!("oracle instance of {} points exceeds {SEP_ORACLE_MAX}", pts.len())));
        }
        let orbits = exact_orbits(s, n, pts)?;
        let m = pts.len();
        let mut d = vec![Q::default(); m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let mut best = Q::default();
                for k in 0..n {
                    best = best.max(s.distance(&orbits[i][k], &orbits[j][k])?);
                }
                d[i * m + j] = best;
                d[j * m + i] = best;
            }
        }
        Ok(ExactDn { m, d })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.d[i * self.m + j]
    }

    /// Bitmask rows of the relation `d_n < ε` (without the diagonal).
    fn close(&self, eps: &Q) -> Vec<u64> {
        (0..self.m)
            .map(|i| {
                (0..self.m).filter(|&j| j != i && self.get(i, j) < eps).fold(0u64, |acc, j| acc | 1 << j)
            })
            .collect()
    }

    /// Largest subset with pairwise `d_n ≥ ε`.
    pub fn sep(&self, eps: &Q) -> usize {
        if self.m == 0 {
            return 0;
        }
        let adj = self.close(eps);
        let all = if self.m == 64 { u64::MAX } else { (1u64 << self.m) - 1 };
        let mut best = 0;
        max_independent(&adj, all, 0, &mut best);
        best as usize
    }

    fn require_cover_size(&self) -> Result<()> {
        if self.m > COVER_ORACLE_MAX {
            return Err(Error::Resource(format!("cover oracle limited to {COVER_ORACLE_MAX} points")));
        }
        Ok(())
    }

    /// Fewest open `d_n`-balls of radius `ε` centred in the set covering it.
    pub fn span(&self, eps: &Q) -> Result<usize> {
        self.require_cover_size()?;
        if self.m == 0 {
            return Ok(0);
        }
        let balls: Vec<u64> = self.close(eps).iter().enumerate().map(|(i, r)| r | 1 << i).collect();
        let all = (1u64 << self.m) - 1;
        let mut best = self.m;
        set_cover(&balls, all, 0, &mut best);
        Ok(best)
    }

    /// Fewest subsets of `d_n`-diameter below `ε` covering the set.
    pub fn cov(&self, eps: &Q) -> Result<usize> {
        self.require_cover_size()?;
        if self.m == 0 {
            return Ok(0);
        }
        let adj = self.close(eps);
        let mut groups: Vec<u64> = Vec::new();
        let mut best = self.m;
        clique_cover(&adj, 0, self.m, &mut groups, &mut best);
        Ok(best)
    }
}

fn max_independent(adj: &[u64], cand: u64, size: u32, best: &mut u32) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() <= *best {
        return;
    }
    let mut v = usize::MAX;
    let mut vdeg = 0;
    let mut bits = cand;
    while bits != 0 {
        let u = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let d = (adj[u] & cand).count_ones();
        if v == usize::MAX || d > vdeg {
            v = u;
            vdeg = d;
        }
    }
    if vdeg == 0 {
        *best = (*best).max(size + cand.count_ones());
        return;
    }
    max_independent(adj, cand & !adj[v] & !(1 << v), size + 1, best);
    max_independent(adj, cand & !(1 << v), size, best);
}

fn set_cover(sets: &[u64], uncovered: u64, used: usize, best: &mut usize) {
    if uncovered == 0 {
        *best = (*best).min(used);
        return;
    }
    if used + 1 >= *best {
        return;
    }
    let e = uncovered.trailing_zeros();
    let mut options: Vec<u64> = sets.iter().copied().filter(|s| s >> e & 1 == 1).collect();
    options.sort_by_key(|s| std::cmp::Reverse((s & uncovered).count_ones()));
    for s in options {
        set_cover(sets, uncovered & !s, used + 1, best);
    }
}

fn clique_cover(adj: &[u64], e: usize, m: usize, groups: &mut Vec<u64>, best: &mut usize) {
    if groups.len() >= *best {
        return;
    }
    if e == m {
        *best = groups.len();
        return;
    }
    for g in 0..groups.len() {
        if groups[g] & !adj[e] == 0 {
            groups[g] |= 1 << e;
            clique_cover(adj, e + 1, m, groups, best);
            groups[g] &= !(1 << e);
        }
    }
    groups.push(1 << e);
    clique_cover(adj, e + 1, m, groups, best);
    groups.pop();
}

/// Exact maximal cardinality of an `(n, ε)`-separated subset of `pts`.
pub fn exact_sep_oracle(s: &dyn MetricSystem, n: usize, eps: &Q, pts: &[State]) -> Result<usize> {
    Ok(ExactDn::new(s, n, &canonical(pts))?.sep(eps))
}

pub fn exact_span_oracle(s: &dyn MetricSystem, n: usize, eps: &Q, pts: &[State]) -> Result<usize> {
    ExactDn::new(s, n, &canonical(pts))?.span(eps)
}

pub fn exact_cov_oracle(s: &dyn MetricSystem, n: usize, eps: &Q, pts: &[State]) -> Result<usize> {
    ExactDn::new(s, n, &canonical(pts))?.cov(eps)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::entropy_lab::pl_system;
    use crate::phase_space::{build_interval, GraphPoint};
    use crate::pl_dynamics::PLMap;
    use crate::rational::{q, qi};

    fn identity() -> Arc<dyn MetricSystem> {
        pl_system("identity", PLMap::identity(Arc::new(build_interval(qi(1)).unwrap()))).unwrap()
    }

    fn pts(ts: &[Q]) -> Vec<State> {
        ts.iter().map(|t| State::Point(GraphPoint { edge: 0, t: *t })).collect()
    }

    // every subset checked directly
    fn brute_sep(d: &ExactDn, eps: &Q) -> usize {
        let m = d.len();
        (0u64..1 << m)
            .filter(|mask| {
                (0..m).all(|i| (0..m).all(|j| i == j || mask >> i & 1 == 0 || mask >> j & 1 == 0 || d.get(i, j) >= eps))
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn oracle_examples() {
        let s = identity();
        let p = pts(&[qi(0), q(3, 10), q(3, 5), q(9, 10)]);
        assert_eq!(exact_sep_oracle(s.as_ref(), 1, &q(1, 2), &p).unwrap(), 2);
        assert_eq!(exact_sep_oracle(s.as_ref(), 4, &qi(2), &p).unwrap(), 1);
        let quarters = pts(&[qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)]);
        assert_eq!(exact_sep_oracle(s.as_ref(), 1, &q(1, 4), &quarters).unwrap(), 5);
        let d = ExactDn::new(s.as_ref(), 1, &p).unwrap();
        assert_eq!(d.sep(&q(1, 2)), brute_sep(&d, &q(1, 2)));
    }

    #[test]
    fn identity_greedy_examples() {
        let s = identity();
        let grid = s.sample(&q(1, 16)).unwrap();
        assert_eq!(grid.len(), 17);
        for n in [1, 5, 50] {
            let kept = greedy_separated(s.as_ref(), n, 0.25, &grid).unwrap();
            assert_eq!(kept, pts(&[qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)]));
        }
        let d = ExactDn::new(s.as_ref(), 1, &grid).unwrap();
        assert_eq!(d.sep(&q(1, 4)), 5);
        let span = greedy_spanning(s.as_ref(), 1, 0.25, &grid).unwrap();
        assert!((3..=5).contains(&span));
        assert!(d.span(&q(1, 4)).unwrap() <= span);
        assert_eq!(greedy_spanning(s.as_ref(), 1, 1.0, &grid).unwrap(), 1);
    }

    #[test]
    fn cover_oracles_on_a_path() {
        // points 0, 0.4, 0.8: conflicts at ε = 1/2 are the two short gaps
        let s = identity();
        let d = ExactDn::new(s.as_ref(), 1, &pts(&[qi(0), q(2, 5), q(4, 5)])).unwrap();
        assert_eq!(d.sep(&q(1, 2)), 2);
        assert_eq!(d.span(&q(1, 2)).unwrap(), 1);
        assert_eq!(d.cov(&q(1, 2)).unwrap(), 2);
        assert_eq!(d.cov(&qi(1)).unwrap(), 1);
    }

    #[test]
    fn size_caps() {
        let s = identity();
        let many: Vec<State> = (0..41).map(|k| State::Point(GraphPoint { edge: 0, t: q(k, 41) })).collect();
        assert!(exact_sep_oracle(s.as_ref(), 1, &q(1, 2), &many).unwrap_err().is_resource());
        assert!(exact_span_oracle(s.as_ref(), 1, &q(1, 2), &many[..21]).unwrap_err().is_resource());
    }
}
