use num_traits::One;

use crate::phase_space::{FloatGraph, Loc};
use crate::rational::{to_f64, Q};

use super::map::PLMap;

#[derive(Clone, Debug)]
struct FPiece {
    end: f64,
    // `1 - end`, the breakpoint measured from the far end
    rend: f64,
    target: u32,
    a: f64,
    b: f64,
    one_minus_b: f64,
    a_plus_b: f64,
    one_minus_a_plus_b: f64,
}

/// Floating-point mirror of a [`PLMap`] acting on anchored locations.
///
/// Each piece carries `b`, `1 - b`, `a + b` and `1 - a - b` rounded once
/// from exact rationals, so an image is computed from the offset to the
/// nearest vertex without cancellation.
#[derive(Clone, Debug)]
pub struct FloatMap {
    graph: FloatGraph,
    edges: Vec<Vec<FPiece>>,
}

impl FloatMap {
    pub fn new(f: &PLMap) -> Self {
        let one = Q::one();
        let edges = f
            .pieces()
            .iter()
            .map(|list| {
                list.iter()
                    .map(|p| FPiece {
                        end: to_f64(&p.end),
                        rend: to_f64(&(one - p.end)),
                        target: p.target as u32,
                        a: to_f64(&p.a),
                        b: to_f64(&p.b),
                        one_minus_b: to_f64(&(one - p.b)),
                        a_plus_b: to_f64(&(p.a + p.b)),
                        one_minus_a_plus_b: to_f64(&(one - p.a - p.b)),
                    })
                    .collect()
            })
            .collect();
        FloatMap { graph: FloatGraph::new(f.graph()), edges }
    }

    pub fn graph(&self) -> &FloatGraph {
        &self.graph
    }

    #[inline]
    pub fn apply(&self, x: &Loc) -> Loc {
        let list = &self.edges[x.edge as usize];
        let p = if list.len() == 1 {
            &list[0]
        } else if !x.at_end {
            let i = list.partition_point(|p| p.end <= x.offset);
            &list[i.min(list.len() - 1)]
        } else {
            let i = list.partition_point(|p| p.rend > x.offset);
            &list[i.min(list.len() - 1)]
        };
        let (t, u) = if !x.at_end {
            (p.b + p.a * x.offset, p.one_minus_b - p.a * x.offset)
        } else {
            (p.a_plus_b - p.a * x.offset, p.one_minus_a_plus_b + p.a * x.offset)
        };
        if t <= u {
            Loc { edge: p.target, at_end: false, offset: t.max(0.0) }
        } else {
            Loc { edge: p.target, at_end: true, offset: u.max(0.0) }
        }
    }

    /// Encoded orbit `x, f(x), …, f^{n-1}(x)` appended to `out`.
    pub fn orbit_into(&self, x: &Loc, n: usize, out: &mut Vec<f64>) {
        let mut y = *x;
        for k in 0..n {
            if k > 0 {
                y = self.apply(&y);
            }
            out.push(y.encode());
        }
    }

    /// Float `d_n` between two starting locations.
    pub fn dn(&self, x: &Loc, y: &Loc, n: usize) -> f64 {
        let (mut a, mut b) = (*x, *y);
        let mut best = self.graph.dist_loc(&a, &b);
        for _ in 1..n {
            a = self.apply(&a);
            b = self.apply(&b);
            best = best.max(self.graph.dist_loc(&a, &b));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::phase_space::build_interval;
    use crate::rational::{q, qi};

    fn contract() -> PLMap {
        let g = Arc::new(build_interval(qi(1)).unwrap());
        PLMap::from_interval_points(g, &[(qi(0), qi(0)), (q(1, 2), q(1, 4)), (qi(1), qi(1))]).unwrap()
    }

    #[test]
    fn mirrors_exact_map() {
        let f = contract();
        let fm = FloatMap::new(&f);
        let g = f.graph();
        for k in 0..=20 {
            let p = g.point(0, q(k, 20)).unwrap();
            let exact = f.apply(&p).unwrap();
            let img = fm.apply(&FloatGraph::loc(&p));
            assert!((img.t() - to_f64(&exact.t)).abs() < 1e-15);
        }
    }

    #[test]
    fn keeps_precision_near_repelling_end() {
        // 1 - δ ↦ 1 - 3δ/2 near the repelling endpoint
        let fm = FloatMap::new(&contract());
        let x = Loc { edge: 0, at_end: true, offset: 1e-250 };
        let y = fm.apply(&x);
        assert!(y.at_end);
        assert!((y.offset / 1.5e-250 - 1.0).abs() < 1e-12);
    }
}
