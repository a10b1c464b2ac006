use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::GraphPoint;
use crate::rational::{self, Q};

use super::map::{Piece, PLMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Preserving,
    Reversing,
    Flat,
}

/// Two one-sided images that disagree at a domain point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuityViolation {
    pub at: GraphPoint,
    pub left: GraphPoint,
    pub right: GraphPoint,
}

/// Proof that a PL map is a homeomorphism: per-piece orientation and the
/// exact inverse.
#[derive(Clone, Debug)]
pub struct HomeoCertificate {
    pub orientation: Vec<Vec<Orientation>>,
    pub bijective: bool,
    pub inverse: PLMap,
}

impl HomeoCertificate {
    /// Common orientation of every piece, if there is one.
    pub fn uniform_orientation(&self) -> Option<Orientation> {
        let mut it = self.orientation.iter().flatten();
        let first = *it.next()?;
        it.all(|o| *o == first).then_some(first)
    }
}

#[derive(Clone, Debug)]
pub struct ValidityReport {
    pub continuous: bool,
    pub violations: Vec<ContinuityViolation>,
    pub homeomorphism: bool,
    pub reason: Option<String>,
    pub certificate: Option<HomeoCertificate>,
}

pub(crate) fn continuity_violations(f: &PLMap) -> Result<Vec<ContinuityViolation>> {
    let g = f.graph();
    let mut out = Vec::new();
    for (e, list) in f.pieces().iter().enumerate() {
        for w in list.windows(2) {
            let t = w[0].end;
            let l = g.canonicalize(w[0].target, w[0].eval(&t)?);
            let r = g.canonicalize(w[1].target, w[1].eval(&t)?);
            if l != r {
                out.push(ContinuityViolation { at: g.canonicalize(e, t), left: l, right: r });
            }
        }
    }
    for v in 0..g.vertex_count() {
        let mut first: Option<GraphPoint> = None;
        for &e in g.incident(v) {
            let t = if g.edge(e).from == v { Q::zero() } else { Q::one() };
            let list = &f.pieces()[e];
            let p = if t.is_zero() { &list[0] } else { list.last().unwrap() };
            let img = g.canonicalize(p.target, p.eval(&t)?);
            match &first {
                None => first = Some(img),
                Some(f0) if *f0 != img => out.push(ContinuityViolation {
                    at: g.vertex_point(v),
                    left: f0.clone(),
                    right: img,
                }),
                _ => {}
            }
        }
    }
    Ok(out)
}

fn orientation(p: &Piece) -> Orientation {
    if p.a.is_zero() {
        Orientation::Flat
    } else if p.a.is_positive() {
        Orientation::Preserving
    } else {
        Orientation::Reversing
    }
}

/// Continuity and bijectivity report; attaches an exact inverse when `f`
/// is a homeomorphism.
pub fn validate_map(f: &PLMap) -> Result<ValidityReport> {
    let violations = continuity_violations(f)?;
    let continuous = violations.is_empty();
    let fail = |reason: String| ValidityReport {
        continuous,
        violations: violations.clone(),
        homeomorphism: false,
        reason: Some(reason),
        certificate: None,
    };
    if !continuous {
        return Ok(fail("discontinuous".into()));
    }
    match certify(f)? {
        Ok(cert) => Ok(ValidityReport {
            continuous,
            violations: Vec::new(),
            homeomorphism: true,
            reason: None,
            certificate: Some(cert),
        }),
        Err(reason) => Ok(fail(reason)),
    }
}

/// Certificate for a continuous `f`, or the reason it is not a homeomorphism.
fn certify(f: &PLMap) -> Result<std::result::Result<HomeoCertificate, String>> {
    let g = f.graph();
    let ne = g.edge_count();
    // (lo, hi, source edge, piece) per target edge
    let mut tiles: Vec<Vec<(Q, Q, usize, &Piece)>> = vec![Vec::new(); ne];
    for (e, list) in f.pieces().iter().enumerate() {
        for p in list {
            if p.is_flat() {
                return Ok(Err(format!("flat piece on edge {e}")));
            }
            let (lo, hi) = p.image_bounds()?;
            tiles[p.target].push((lo, hi, e, p));
        }
    }
    let mut inv = Vec::with_capacity(ne);
    for (te, list) in tiles.iter_mut().enumerate() {
        list.sort_by(|x, y| x.0.cmp(&y.0));
        let mut cursor = Q::zero();
        let mut pieces = Vec::with_capacity(list.len());
        for (lo, hi, src, p) in list.iter() {
            if *lo != cursor {
                return Ok(Err(format!("images overlap or miss part of edge {te}")));
            }
            let a = rational::div(&Q::one(), &p.a)?;
            let b = rational::div(&-p.b, &p.a)?;
            pieces.push(Piece { start: *lo, end: *hi, target: *src, a, b });
            cursor = *hi;
        }
        if !cursor.is_one() {
            return Ok(Err(format!("edge {te} is not covered")));
        }
        inv.push(pieces);
    }
    // injectivity on breakpoints and vertices
    let mut seen: BTreeMap<GraphPoint, GraphPoint> = BTreeMap::new();
    for (e, list) in f.pieces().iter().enumerate() {
        for p in list {
            for t in [p.start, p.end] {
                let x = g.canonicalize(e, t);
                let y = g.canonicalize(p.target, p.eval(&t)?);
                if let Some(prev) = seen.insert(y.clone(), x.clone()) {
                    if prev != x {
                        return Ok(Err(format!("{prev} and {x} both map to {y}")));
                    }
                }
            }
        }
    }
    let inverse = PLMap::new(f.graph_arc().clone(), inv)?;
    let orientation = f.pieces().iter().map(|l| l.iter().map(orientation).collect()).collect();
    Ok(Ok(HomeoCertificate { orientation, bijective: true, inverse }))
}

/// Certificate or a [`Error::NotHomeomorphism`].
pub fn homeo_certificate(f: &PLMap) -> Result<HomeoCertificate> {
    let report = validate_map(f)?;
    report
        .certificate
        .ok_or_else(|| Error::NotHomeomorphism(report.reason.unwrap_or_default()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::phase_space::{build_interval, MetricGraph};
    use crate::pl_dynamics::compose;
    use crate::rational::{q, qi};

    fn unit() -> Arc<MetricGraph> {
        Arc::new(build_interval(qi(1)).unwrap())
    }

    #[test]
    fn identity_is_a_homeomorphism() {
        let r = validate_map(&PLMap::identity(unit())).unwrap();
        assert!(r.continuous && r.homeomorphism);
    }

    #[test]
    fn tent_is_not_injective() {
        let g = unit();
        let t = PLMap::from_interval_points(g, &[(qi(0), qi(0)), (q(1, 2), qi(1)), (qi(1), qi(0))])
            .unwrap();
        let r = validate_map(&t).unwrap();
        assert!(r.continuous);
        assert!(!r.homeomorphism);
    }

    #[test]
    fn contraction_certificate_inverts() {
        let g = unit();
        let c = PLMap::from_interval_points(
            g.clone(),
            &[(qi(0), qi(0)), (q(1, 2), q(1, 4)), (qi(1), qi(1))],
        )
        .unwrap();
        let cert = homeo_certificate(&c).unwrap();
        assert_eq!(cert.uniform_orientation(), Some(Orientation::Preserving));
        let id = PLMap::identity(g);
        assert_eq!(compose(&cert.inverse, &c).unwrap(), id);
        assert_eq!(compose(&c, &cert.inverse).unwrap(), id);
    }

    #[test]
    fn discontinuity_is_located() {
        let g = unit();
        let f = PLMap::new(
            g,
            vec![vec![
                Piece { start: qi(0), end: q(1, 2), target: 0, a: qi(1), b: qi(0) },
                Piece { start: q(1, 2), end: qi(1), target: 0, a: qi(0), b: qi(1) },
            ]],
        )
        .unwrap();
        let r = validate_map(&f).unwrap();
        assert!(!r.continuous);
        assert_eq!(r.violations[0].at.t, q(1, 2));
    }
}
