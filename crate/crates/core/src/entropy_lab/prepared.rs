use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Result;

use super::system::{NetOptions, State};

/// A finite sample of a system, fixed `n` and `ε`, with the conflict
/// relation `d_n < ε` available by index. Indices follow the canonical
/// sample order.
pub trait Prepared: Send {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn state(&self, i: usize) -> Result<State>;

    /// Floating-point `d_n` between samples `i` and `j`.
    fn dn(&self, i: usize, j: usize) -> f64;

    /// Calls `f` on every `j ≠ i` with `d_n(i, j) < ε` until it returns true.
    /// Returns whether it stopped early.
    fn neighbors_until(&self, i: usize, f: &mut dyn FnMut(usize) -> bool) -> bool;

    fn for_each_neighbor(&self, i: usize, f: &mut dyn FnMut(usize)) {
        self.neighbors_until(i, &mut |j| {
            f(j);
            false
        });
    }

    /// Size of the greedy maximal separated subset in canonical order.
    fn greedy_separated(&self) -> usize {
        greedy_separated_scan(self)
    }

    /// Greedy set-cover count with `d_n`-balls of radius `ε` centred at
    /// samples, or `None` when the sample is too large for it.
    fn greedy_spanning(&self) -> Option<usize> {
        Some(lazy_greedy_cover(self))
    }

    /// Spacing of the net actually used.
    fn mesh(&self) -> f64;

    /// Notes about coarsening, resolution limits and skipped counts.
    fn flags(&self) -> Vec<String>;
}

pub(crate) fn greedy_separated_scan<P: Prepared + ?Sized>(p: &P) -> usize {
    let mut kept = vec![false; p.len()];
    let mut count = 0;
    for i in 0..p.len() {
        let blocked = p.neighbors_until(i, &mut |j| j < i && kept[j]);
        if !blocked {
            kept[i] = true;
            count += 1;
        }
    }
    count
}

/// Lazy greedy set cover; ties go to the lowest index.
pub(crate) fn lazy_greedy_cover<P: Prepared + ?Sized>(p: &P) -> usize {
    lazy_greedy_cover_with(p.len(), &|i, f| p.for_each_neighbor(i, f))
}

/// Lazy greedy set cover by closed neighbourhoods given as a callback.
pub(crate) fn lazy_greedy_cover_with(n: usize, nbrs: &dyn Fn(usize, &mut dyn FnMut(usize))) -> usize {
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut heap = BinaryHeap::with_capacity(n);
    for i in 0..n {
        let mut deg = 1usize;
        nbrs(i, &mut |_| deg += 1);
        heap.push((deg, Reverse(i)));
    }
    let mut count = 0;
    while remaining > 0 {
        let Some((bound, Reverse(i))) = heap.pop() else { break };
        let mut gain = usize::from(!covered[i]);
        nbrs(i, &mut |j| gain += usize::from(!covered[j]));
        if gain == bound {
            count += 1;
            if !covered[i] {
                covered[i] = true;
                remaining -= 1;
            }
            nbrs(i, &mut |j| {
                if !covered[j] {
                    covered[j] = true;
                    remaining -= 1;
                }
            });
        } else if gain > 0 {
            heap.push((gain, Reverse(i)));
        }
    }
    count
}

/// Cartesian product of two prepared samples under the max metric.
pub struct ProductPrepared {
    a: Box<dyn Prepared>,
    b: Box<dyn Prepared>,
    // closed neighbourhoods, sorted
    na: Vec<Vec<u32>>,
    nb: Vec<Vec<u32>>,
    coarsened: bool,
    span_budget: usize,
}

fn closed_neighborhoods(p: &dyn Prepared) -> Vec<Vec<u32>> {
    (0..p.len())
        .map(|i| {
            let mut v = vec![i as u32];
            p.for_each_neighbor(i, &mut |j| v.push(j as u32));
            v.sort_unstable();
            v
        })
        .collect()
}

impl ProductPrepared {
    pub fn new(a: Box<dyn Prepared>, b: Box<dyn Prepared>, coarsened: bool, opts: &NetOptions) -> Self {
        let na = closed_neighborhoods(a.as_ref());
        let nb = closed_neighborhoods(b.as_ref());
        ProductPrepared { a, b, na, nb, coarsened, span_budget: opts.span_budget }
    }
}

impl Prepared for ProductPrepared {
    fn len(&self) -> usize {
        self.a.len() * self.b.len()
    }

    fn state(&self, i: usize) -> Result<State> {
        let m = self.b.len();
        Ok(State::pair(self.a.state(i / m)?, self.b.state(i % m)?))
    }

    fn dn(&self, i: usize, j: usize) -> f64 {
        let m = self.b.len();
        self.a.dn(i / m, j / m).max(self.b.dn(i % m, j % m))
    }

    fn neighbors_until(&self, i: usize, f: &mut dyn FnMut(usize) -> bool) -> bool {
        let m = self.b.len();
        let (x, y) = (i / m, i % m);
        for &xa in &self.na[x] {
            for &yb in &self.nb[y] {
                let j = xa as usize * m + yb as usize;
                if j != i && f(j) {
                    return true;
                }
            }
        }
        false
    }

    fn greedy_separated(&self) -> usize {
        let m = self.b.len();
        let mut kept = vec![false; self.len()];
        let mut count = 0;
        for x in 0..self.a.len() {
            let rows = &self.na[x];
            let rows = &rows[..rows.partition_point(|&r| r as usize <= x)];
            for y in 0..m {
                let cols = &self.nb[y];
                let blocked = rows.iter().any(|&r| {
                    let base = r as usize * m;
                    if r as usize == x {
                        cols.iter().take_while(|&&c| (c as usize) < y).any(|&c| kept[base + c as usize])
                    } else {
                        cols.iter().any(|&c| kept[base + c as usize])
                    }
                });
                if !blocked {
                    kept[x * m + y] = true;
                    count += 1;
                }
            }
        }
        count
    }

    fn greedy_spanning(&self) -> Option<usize> {
        (self.len() <= self.span_budget).then(|| lazy_greedy_cover(self))
    }

    fn mesh(&self) -> f64 {
        self.a.mesh().max(self.b.mesh())
    }

    fn flags(&self) -> Vec<String> {
        let mut f = self.a.flags();
        for x in self.b.flags() {
            if !f.contains(&x) {
                f.push(x);
            }
        }
        if self.coarsened {
            f.push("product_mesh_coarsened".into());
        }
        if self.len() > self.span_budget {
            f.push("span_skipped".into());
        }
        f
    }
}
