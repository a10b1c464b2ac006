use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteSubset;
use crate::phase_space::{FloatGraph, GraphPoint};
use crate::pl_dynamics::{compose, homeo_certificate, iterate_capped, FloatMap, PLMap, DEFAULT_PIECE_CAP};
use crate::rational::Q;

use super::net::PlNet;
use super::prepared::{Prepared, ProductPrepared};

/// A point of some phase space: a graph point, a pair (product systems) or
/// a finite subset (symmetric products).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Point(GraphPoint),
    Pair(Box<State>, Box<State>),
    Set(FiniteSubset),
}

impl State {
    pub fn pair(a: State, b: State) -> Self {
        State::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_point(&self) -> Result<&GraphPoint> {
        match self {
            State::Point(p) => Ok(p),
            other => Err(Error::Point(format!("expected a graph point, got {other}"))),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Point(p) => write!(f, "{p}"),
            State::Pair(a, b) => write!(f, "({a}, {b})"),
            State::Set(s) => write!(f, "{s}"),
        }
    }
}

/// Sizes and budgets used when preparing a sample for counting.
#[derive(Clone, Debug, PartialEq)]
pub struct NetOptions {
    /// Cap on stored orbit entries (points times orbit length).
    pub orbit_budget: usize,
    /// Cap on sample states for product and symmetric-product systems.
    pub state_budget: usize,
    /// Greedy spanning is skipped above this many states.
    pub span_budget: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions { orbit_budget: 60_000_000, state_budget: 4_000_000, span_budget: 4_000_000 }
    }
}

/// A compact metric space with a continuous self-map.
pub trait MetricSystem: Send + Sync {
    fn descriptor(&self) -> String;
    fn distance(&self, p: &State, q: &State) -> Result<Q>;
    fn apply(&self, p: &State) -> Result<State>;
    /// Deterministic grid with spacing at most `mesh`, in canonical order.
    fn sample(&self, mesh: &Q) -> Result<Vec<State>>;
    /// Floating-point dynamic distance `d_n`.
    fn float_dn(&self, n: usize, p: &State, q: &State) -> Result<f64>;
    /// A `d_n`-net at spacing `mesh` together with its `ε`-conflict structure.
    fn prepare(&self, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Box<dyn Prepared>>;
    /// The system `f^k`.
    fn power(&self, k: usize) -> Result<Arc<dyn MetricSystem>>;
    fn pl_map(&self) -> Option<&PLMap> {
        None
    }
}

/// A PL map on a metric graph.
pub struct PlSystem {
    name: String,
    map: PLMap,
    fmap: FloatMap,
}

impl PlSystem {
    pub fn new(name: impl Into<String>, map: PLMap) -> Result<Self> {
        map.require_continuous()?;
        let fmap = FloatMap::new(&map);
        Ok(PlSystem { name: name.into(), map, fmap })
    }

    pub fn map(&self) -> &PLMap {
        &self.map
    }

    pub fn float_map(&self) -> &FloatMap {
        &self.fmap
    }
}

impl MetricSystem for PlSystem {
    fn descriptor(&self) -> String {
        self.name.clone()
    }

    fn distance(&self, p: &State, q: &State) -> Result<Q> {
        self.map.graph().distance(p.as_point()?, q.as_point()?)
    }

    fn apply(&self, p: &State) -> Result<State> {
        Ok(State::Point(self.map.apply(p.as_point()?)?))
    }

    fn sample(&self, mesh: &Q) -> Result<Vec<State>> {
        Ok(self.map.graph().sample_grid(mesh)?.into_iter().map(State::Point).collect())
    }

    fn float_dn(&self, n: usize, p: &State, q: &State) -> Result<f64> {
        let a = FloatGraph::loc(p.as_point()?);
        let b = FloatGraph::loc(q.as_point()?);
        Ok(self.fmap.dn(&a, &b, n.max(1)))
    }

    fn prepare(&self, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Box<dyn Prepared>> {
        Ok(Box::new(PlNet::build(self, n, eps, mesh, opts)?))
    }

    fn power(&self, k: usize) -> Result<Arc<dyn MetricSystem>> {
        if k == 0 {
            return Err(Error::Map("power needs k >= 1".into()));
        }
        let name = if k == 1 { self.name.clone() } else { format!("pow({},{k})", self.name) };
        Ok(Arc::new(PlSystem::new(name, iterate_capped(&self.map, k, DEFAULT_PIECE_CAP)?)?))
    }

    fn pl_map(&self) -> Option<&PLMap> {
        Some(&self.map)
    }
}

/// `f × g` with the max metric.
pub struct ProductSystem {
    a: Arc<dyn MetricSystem>,
    b: Arc<dyn MetricSystem>,
}

fn split(p: &State) -> Result<(&State, &State)> {
    match p {
        State::Pair(x, y) => Ok((x, y)),
        other => Err(Error::Point(format!("expected a pair, got {other}"))),
    }
}

impl MetricSystem for ProductSystem {
    fn descriptor(&self) -> String {
        format!("prod({},{})", self.a.descriptor(), self.b.descriptor())
    }

    fn distance(&self, p: &State, q: &State) -> Result<Q> {
        let (p1, p2) = split(p)?;
        let (q1, q2) = split(q)?;
        Ok(self.a.distance(p1, q1)?.max(self.b.distance(p2, q2)?))
    }

    fn apply(&self, p: &State) -> Result<State> {
        let (x, y) = split(p)?;
        Ok(State::pair(self.a.apply(x)?, self.b.apply(y)?))
    }

    fn sample(&self, mesh: &Q) -> Result<Vec<State>> {
        let sa = self.a.sample(mesh)?;
        let sb = self.b.sample(mesh)?;
        let mut out = Vec::with_capacity(sa.len() * sb.len());
        for x in &sa {
            for y in &sb {
                out.push(State::pair(x.clone(), y.clone()));
            }
        }
        Ok(out)
    }

    fn float_dn(&self, n: usize, p: &State, q: &State) -> Result<f64> {
        let (p1, p2) = split(p)?;
        let (q1, q2) = split(q)?;
        Ok(self.a.float_dn(n, p1, q1)?.max(self.b.float_dn(n, p2, q2)?))
    }

    fn prepare(&self, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Box<dyn Prepared>> {
        let mut mesh = mesh;
        let mut coarsened = false;
        loop {
            let pa = self.a.prepare(n, eps, mesh, opts)?;
            let pb = self.b.prepare(n, eps, mesh, opts)?;
            if pa.len().saturating_mul(pb.len()) <= opts.state_budget || mesh >= eps {
                return Ok(Box::new(ProductPrepared::new(pa, pb, coarsened, opts)));
            }
            mesh = (mesh * 2.0).min(eps);
            coarsened = true;
        }
    }

    fn power(&self, k: usize) -> Result<Arc<dyn MetricSystem>> {
        Ok(Arc::new(ProductSystem { a: self.a.power(k)?, b: self.b.power(k)? }))
    }
}

pub fn pl_system(name: impl Into<String>, map: PLMap) -> Result<Arc<dyn MetricSystem>> {
    Ok(Arc::new(PlSystem::new(name, map)?))
}

pub fn product_system(a: Arc<dyn MetricSystem>, b: Arc<dyn MetricSystem>) -> Arc<dyn MetricSystem> {
    Arc::new(ProductSystem { a, b })
}

pub fn power_system(s: &Arc<dyn MetricSystem>, k: usize) -> Result<Arc<dyn MetricSystem>> {
    if k == 1 {
        return Ok(s.clone());
    }
    s.power(k)
}

/// `h ∘ f ∘ h⁻¹` for a PL system `f` and a certified PL homeomorphism `h`.
pub fn conjugate_system(s: &dyn MetricSystem, h: &PLMap, name: Option<String>) -> Result<Arc<dyn MetricSystem>> {
    let f = s
        .pl_map()
        .ok_or_else(|| Error::Unsupported("conjugation needs a PL graph system".into()))?;
    if !f.same_domain(h) {
        return Err(Error::DomainMismatch);
    }
    let cert = homeo_certificate(h)?;
    let g = compose(h, &compose(f, &cert.inverse)?)?;
    let name = name.unwrap_or_else(|| format!("conj({})", s.descriptor()));
    pl_system(name, g)
}

/// Exact `d_n(p, q) = max_{0 ≤ k < n} d(f^k p, f^k q)`.
pub fn dynamic_distance(s: &dyn MetricSystem, n: usize, p: &State, q: &State) -> Result<Q> {
    if n == 0 {
        return Err(Error::Protocol("d_n needs n >= 1".into()));
    }
    let (mut x, mut y) = (p.clone(), q.clone());
    let mut best = Q::zero();
    for k in 0..n {
        if k > 0 {
            x = s.apply(&x)?;
            y = s.apply(&y)?;
        }
        best = best.max(s.distance(&x, &y)?);
    }
    Ok(best)
}

/// Exact orbits `p, f(p), …, f^{n-1}(p)` of every sample state.
pub(crate) fn exact_orbits(s: &dyn MetricSystem, n: usize, pts: &[State]) -> Result<Vec<Vec<State>>> {
    pts.iter()
        .map(|p| {
            let mut orbit = Vec::with_capacity(n);
            let mut x = p.clone();
            for k in 0..n {
                if k > 0 {
                    x = s.apply(&x)?;
                }
                orbit.push(x.clone());
            }
            Ok(orbit)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::build_interval;
    use crate::rational::{q, qi};

    fn contract() -> Arc<dyn MetricSystem> {
        let g = Arc::new(build_interval(qi(1)).unwrap());
        let f = PLMap::from_interval_points(g, &[(qi(0), qi(0)), (q(1, 2), q(1, 4)), (qi(1), qi(1))]).unwrap();
        pl_system("pl_contract", f).unwrap()
    }

    fn pt(t: Q) -> State {
        State::Point(GraphPoint { edge: 0, t })
    }

    #[test]
    fn contract_d2() {
        let s = contract();
        let d = dynamic_distance(s.as_ref(), 2, &pt(q(1, 2)), &pt(q(3, 4))).unwrap();
        assert_eq!(d, q(3, 8));
        assert_eq!(dynamic_distance(s.as_ref(), 1, &pt(q(1, 2)), &pt(q(3, 4))).unwrap(), q(1, 4));
        let f = s.float_dn(2, &pt(q(1, 2)), &pt(q(3, 4))).unwrap();
        assert!((f - 0.375).abs() < 1e-15);
    }

    #[test]
    fn product_takes_max() {
        let s = product_system(contract(), contract());
        let a = State::pair(pt(q(1, 2)), pt(qi(0)));
        let b = State::pair(pt(q(3, 4)), pt(q(1, 8)));
        assert_eq!(dynamic_distance(s.as_ref(), 2, &a, &b).unwrap(), q(3, 8));
        assert_eq!(s.descriptor(), "prod(pl_contract,pl_contract)");
    }

    #[test]
    fn conjugating_by_identity_keeps_the_map() {
        let s = contract();
        let id = PLMap::identity(s.pl_map().unwrap().graph_arc().clone());
        let c = conjugate_system(s.as_ref(), &id, None).unwrap();
        assert_eq!(c.pl_map().unwrap(), s.pl_map().unwrap());
    }
}
