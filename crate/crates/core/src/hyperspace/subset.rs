use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{GraphPoint, MetricGraph};
use crate::pl_dynamics::PLMap;
use crate::rational::Q;

/// A nonempty finite set of canonical points, stored sorted without
/// duplicates. Sets are ordered by cardinality, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteSubset {
    points: Vec<GraphPoint>,
}

impl FiniteSubset {
    pub fn new(mut points: Vec<GraphPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Point("a finite subset must be nonempty".into()));
        }
        points.sort();
        points.dedup();
        Ok(FiniteSubset { points })
    }

    pub fn singleton(p: GraphPoint) -> Self {
        FiniteSubset { points: vec![p] }
    }

    pub fn points(&self) -> &[GraphPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Ord for FiniteSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.points.len().cmp(&other.points.len()).then_with(|| self.points.cmp(&other.points))
    }
}

impl PartialOrd for FiniteSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// `max(max_a min_b d(a,b), max_b min_a d(a,b))`, exactly.
pub fn hausdorff_distance(g: &MetricGraph, a: &FiniteSubset, b: &FiniteSubset) -> Result<Q> {
    let mut m = vec![Q::zero(); a.len() * b.len()];
    for (i, x) in a.points.iter().enumerate() {
        for (j, y) in b.points.iter().enumerate() {
            m[i * b.len() + j] = g.distance(x, y)?;
        }
    }
    let row = |i: usize| (0..b.len()).map(|j| m[i * b.len() + j]).min().unwrap();
    let col = |j: usize| (0..a.len()).map(|i| m[i * b.len() + j]).min().unwrap();
    let ab = (0..a.len()).map(row).max().unwrap();
    let ba = (0..b.len()).map(col).max().unwrap();
    Ok(ab.max(ba))
}

/// Elementwise image; points merged by `f` collapse.
pub fn induced_map(f: &PLMap, a: &FiniteSubset) -> Result<FiniteSubset> {
    let img = a.points.iter().map(|p| f.apply(p)).collect::<Result<Vec<_>>>()?;
    FiniteSubset::new(img)
}

/// Outcome of checking `π_n ∘ f^{×n} = F_n(f) ∘ π_n` on sample tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorCheck {
    pub checked: usize,
    pub witness: Option<Vec<GraphPoint>>,
}

impl FactorCheck {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Exact check of the factor identity on each tuple.
pub fn factor_map_check(f: &PLMap, tuples: &[Vec<GraphPoint>]) -> Result<FactorCheck> {
    for (i, tuple) in tuples.iter().enumerate() {
        let image_tuple = tuple.iter().map(|p| f.apply(p)).collect::<Result<Vec<_>>>()?;
        let upstairs = FiniteSubset::new(image_tuple)?;
        let downstairs = induced_map(f, &FiniteSubset::new(tuple.clone())?)?;
        if upstairs != downstairs {
            return Ok(FactorCheck { checked: i + 1, witness: Some(tuple.clone()) });
        }
    }
    Ok(FactorCheck { checked: tuples.len(), witness: None })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::phase_space::build_interval;
    use crate::rational::{q, qi};

    fn pts(g: &MetricGraph, ts: &[Q]) -> FiniteSubset {
        FiniteSubset::new(ts.iter().map(|t| g.point(0, *t).unwrap()).collect()).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let g = build_interval(qi(1)).unwrap();
        let a = pts(&g, &[qi(0), qi(1)]);
        assert_eq!(hausdorff_distance(&g, &a, &a).unwrap(), qi(0));
        assert_eq!(hausdorff_distance(&g, &pts(&g, &[qi(0)]), &pts(&g, &[qi(1)])).unwrap(), qi(1));
        assert_eq!(hausdorff_distance(&g, &a, &pts(&g, &[q(1, 2)])).unwrap(), q(1, 2));
    }

    #[test]
    fn induced_map_examples() {
        let g = Arc::new(build_interval(qi(1)).unwrap());
        let c = PLMap::from_interval_points(g.clone(), &[(qi(0), qi(0)), (q(1, 2), q(1, 4)), (qi(1), qi(1))])
            .unwrap();
        let tent = PLMap::from_interval_points(g.clone(), &[(qi(0), qi(0)), (q(1, 2), qi(1)), (qi(1), qi(0))])
            .unwrap();
        let a = pts(&g, &[q(1, 2), q(3, 4)]);
        assert_eq!(induced_map(&c, &a).unwrap(), pts(&g, &[q(1, 4), q(5, 8)]));
        let b = pts(&g, &[q(1, 4), q(3, 4)]);
        assert_eq!(induced_map(&tent, &b).unwrap(), pts(&g, &[q(1, 2)]));
        assert_eq!(induced_map(&PLMap::identity(g.clone()), &b).unwrap(), b);
        let tuple = vec![g.point(0, q(1, 4)).unwrap(), g.point(0, q(3, 4)).unwrap()];
        assert!(factor_map_check(&tent, &[tuple]).unwrap().holds());
    }

    #[test]
    fn order_is_by_size_first() {
        let g = build_interval(qi(1)).unwrap();
        assert!(pts(&g, &[qi(1)]) < pts(&g, &[qi(0), q(1, 2)]));
        assert!(pts(&g, &[qi(0), qi(1)]) < pts(&g, &[q(1, 2), qi(1)]));
    }
}
