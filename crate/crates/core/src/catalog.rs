//! Built-in systems, addressed by name.
//!
//! Base maps: `identity`, `tent`, `pl_contract`, `bend`, `flip` (unit
//! interval); `rotation(θ)` with `θ` a fraction, a decimal or `phi`, and
//! `circle_bend` (unit circle); `tripod_rotate`, `tripod_contract`,
//! `tripod_bend` (three unit legs); `lollipop_contract` (unit circle with a
//! unit tail). Wrappers compose by name: `prod(A,B)`, `pow(A,k)`,
//! `conj(A,H)` and `F<k>(A)`.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::entropy_lab::{
    conjugate_system, pl_system, product_system, MetricSystem, NetOptions, Prepared, State,
};
use crate::error::{Error, Result};
use crate::hyperspace::symmetric_product_system;
use crate::phase_space::{build_circle, build_graph, build_interval, MetricGraph};
use crate::pl_dynamics::{iterate, profile_pieces, PLMap, Piece};
use crate::rational::{self, approximate, parse_q, q, qi, Q, MAX_APPROX_DENOM};

/// Golden-mean rotation number as a ratio of consecutive Fibonacci numbers.
pub fn golden() -> Q {
    q(1134903170, 1836311903)
}

pub const INTERVAL_MAPS: &[&str] = &["identity", "tent", "pl_contract", "bend", "flip"];

pub const HOMEOMORPHISMS: &[&str] = &[
    "identity",
    "pl_contract",
    "bend",
    "flip",
    "rotation(phi)",
    "rotation(1/3)",
    "circle_bend",
    "tripod_rotate",
    "tripod_contract",
    "tripod_bend",
    "lollipop_contract",
];

pub const MONOTONE_INTERVAL_HOMEOMORPHISMS: &[&str] = &["identity", "pl_contract", "bend", "flip"];

pub fn unit_interval() -> Arc<MetricGraph> {
    Arc::new(build_interval(qi(1)).expect("unit interval"))
}

pub fn unit_circle() -> Arc<MetricGraph> {
    Arc::new(build_circle(qi(1)).expect("unit circle"))
}

pub fn tripod() -> Arc<MetricGraph> {
    Arc::new(
        build_graph(&["c", "l0", "l1", "l2"], &[("c", "l0", qi(1)), ("c", "l1", qi(1)), ("c", "l2", qi(1))])
            .expect("tripod"),
    )
}

pub fn lollipop() -> Arc<MetricGraph> {
    Arc::new(
        build_graph(&["j", "o", "e"], &[("j", "o", q(1, 2)), ("o", "j", q(1, 2)), ("j", "e", qi(1))])
            .expect("lollipop"),
    )
}

fn profile(pts: &[(i128, i128, i128, i128)]) -> Vec<(Q, Q)> {
    pts.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect()
}

fn contract_profile() -> Vec<(Q, Q)> {
    profile(&[(0, 1, 0, 1), (1, 2, 1, 4), (1, 1, 1, 1)])
}

fn bend_profile() -> Vec<(Q, Q)> {
    profile(&[(0, 1, 0, 1), (1, 2, 3, 4), (1, 1, 1, 1)])
}

fn identity_profile() -> Vec<(Q, Q)> {
    profile(&[(0, 1, 0, 1), (1, 1, 1, 1)])
}

/// PL self-map of the unit circle from an increasing degree-one lift
/// `F: [0,1] → ℝ` given by its breakpoints.
pub fn circle_map_from_lift(lift: &[(Q, Q)]) -> Result<PLMap> {
    let g = unit_circle();
    let h = rational::half();
    if lift.len() < 2 || !lift[0].0.is_zero() || !lift[lift.len() - 1].0.is_one() {
        return Err(Error::Map("a lift must be given on [0, 1]".into()));
    }
    if lift[lift.len() - 1].1 - lift[0].1 != Q::one() {
        return Err(Error::Map("the lift must have degree one".into()));
    }
    if lift.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 <= w[0].1) {
        return Err(Error::Map("the lift must be strictly increasing".into()));
    }
    // breakpoints: lift corners, s = 1/2 and preimages of half-integers
    let mut cuts: Vec<Q> = lift.iter().map(|p| p.0).collect();
    cuts.push(h);
    for w in lift.windows(2) {
        let ((s0, y0), (s1, y1)) = (w[0], w[1]);
        let mut k = (y0 * 2).ceil();
        while k * h < y1 {
            let y = k * h;
            if y > y0 {
                cuts.push(s0 + (y - y0) * (s1 - s0) / (y1 - y0));
            }
            k += Q::one();
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut pieces: Vec<Vec<Piece>> = vec![Vec::new(), Vec::new()];
    for w in cuts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let seg = lift.windows(2).find(|p| p[0].0 <= s0 && s1 <= p[1].0).expect("cut inside a lift segment");
        let alpha = (seg[1].1 - seg[0].1) / (seg[1].0 - seg[0].0);
        let beta = seg[0].1 - alpha * seg[0].0;
        let mid = (alpha * (s0 + s1) / 2 + beta) * 2;
        let k = mid.floor();
        let e = if s0 < h { 0 } else { 1 };
        let eq = Q::from_integer(e as i128);
        let target = k.to_integer().rem_euclid(2) as usize;
        pieces[e].push(Piece {
            start: s0 * 2 - eq,
            end: s1 * 2 - eq,
            target,
            a: alpha,
            b: alpha * eq + beta * 2 - k,
        });
    }
    PLMap::new(g, pieces)
}

pub fn rotation(theta: Q) -> Result<PLMap> {
    let theta = theta - theta.floor();
    circle_map_from_lift(&[(qi(0), theta), (qi(1), theta + Q::one())])
}

fn parse_angle(arg: &str) -> Result<Q> {
    match arg {
        "phi" | "golden" => Ok(golden()),
        _ if arg.contains('.') || arg.contains('e') => {
            let x: f64 = arg.parse().map_err(|_| Error::Parse(format!("bad angle {arg}")))?;
            if !x.is_finite() {
                return Err(Error::Parse(format!("bad angle {arg}")));
            }
            Ok(approximate(x, MAX_APPROX_DENOM))
        }
        _ => parse_q(arg),
    }
}

fn tripod_map(profiles: [Vec<(Q, Q)>; 3], shift: usize) -> Result<PLMap> {
    let g = tripod();
    let pieces = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| profile_pieces(p, (i + shift) % 3))
        .collect::<Result<Vec<_>>>()?;
    PLMap::new(g, pieces)
}

/// The named base PL map.
pub fn base_map(name: &str) -> Result<PLMap> {
    let unit = unit_interval;
    match name {
        "identity" => Ok(PLMap::identity(unit())),
        "tent" => PLMap::from_interval_points(unit(), &profile(&[(0, 1, 0, 1), (1, 2, 1, 1), (1, 1, 0, 1)])),
        "pl_contract" => PLMap::from_interval_points(unit(), &contract_profile()),
        "bend" => PLMap::from_interval_points(unit(), &bend_profile()),
        "flip" => PLMap::from_interval_points(unit(), &profile(&[(0, 1, 1, 1), (1, 1, 0, 1)])),
        "circle_bend" => circle_map_from_lift(&profile(&[(0, 1, 0, 1), (1, 2, 1, 4), (1, 1, 1, 1)])),
        "tripod_rotate" => tripod_map([identity_profile(), identity_profile(), identity_profile()], 1),
        "tripod_contract" => tripod_map([contract_profile(), contract_profile(), contract_profile()], 1),
        "tripod_bend" => tripod_map([bend_profile(), identity_profile(), identity_profile()], 0),
        "lollipop_contract" => {
            let g = lollipop();
            let pieces = (0..3).map(|e| profile_pieces(&contract_profile(), e)).collect::<Result<Vec<_>>>()?;
            PLMap::new(g, pieces)
        }
        _ => Err(Error::UnknownSystem(name.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Atom(String),
    Call(String, Vec<Expr>),
}

fn parse_expr(s: &str) -> Result<(Expr, &str)> {
    let end = s.find(|c: char| c == '(' || c == ')' || c == ',').unwrap_or(s.len());
    let head = &s[..end];
    if head.is_empty() {
        return Err(Error::Parse(format!("expected a name at '{s}'")));
    }
    let rest = &s[end..];
    if let Some(mut rest) = rest.strip_prefix('(') {
        let mut args = Vec::new();
        loop {
            let (arg, r) = parse_expr(rest)?;
            args.push(arg);
            if let Some(r) = r.strip_prefix(',') {
                rest = r;
            } else if let Some(r) = r.strip_prefix(')') {
                return Ok((Expr::Call(head.to_string(), args), r));
            } else {
                return Err(Error::Parse(format!("unbalanced parentheses near '{r}'")));
            }
        }
    }
    Ok((Expr::Atom(head.to_string()), rest))
}

fn render(e: &Expr) -> String {
    match e {
        Expr::Atom(a) => a.clone(),
        Expr::Call(h, args) => format!("{h}({})", args.iter().map(render).collect::<Vec<_>>().join(",")),
    }
}

enum Sys {
    Pl(PLMap),
    Prod(Box<Sys>, Box<Sys>),
    Sym(usize, PLMap),
}

fn atom(e: &Expr) -> Result<&str> {
    match e {
        Expr::Atom(a) => Ok(a),
        other => Err(Error::Parse(format!("expected a plain argument, got {}", render(other)))),
    }
}

fn want(args: &[Expr], k: usize, head: &str) -> Result<()> {
    if args.len() != k {
        return Err(Error::Parse(format!("{head} takes {k} argument(s)")));
    }
    Ok(())
}

fn eval(e: &Expr) -> Result<Sys> {
    match e {
        Expr::Atom(a) => Ok(Sys::Pl(base_map(a)?)),
        Expr::Call(h, args) => match h.as_str() {
            "rotation" => {
                want(args, 1, h)?;
                Ok(Sys::Pl(rotation(parse_angle(atom(&args[0])?)?)?))
            }
            "prod" => {
                want(args, 2, h)?;
                Ok(Sys::Prod(Box::new(eval(&args[0])?), Box::new(eval(&args[1])?)))
            }
            "pow" => {
                want(args, 2, h)?;
                let k: usize = atom(&args[1])?
                    .parse()
                    .ok()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::Parse("pow needs a positive integer".into()))?;
                power(eval(&args[0])?, k)
            }
            "conj" => {
                want(args, 2, h)?;
                let (Sys::Pl(f), Sys::Pl(hm)) = (eval(&args[0])?, eval(&args[1])?) else {
                    return Err(Error::Unsupported("conj needs PL graph maps".into()));
                };
                let sys = conjugate_system(&*pl_system("f", f)?, &hm, None)?;
                Ok(Sys::Pl(sys.pl_map().expect("conjugate of a PL map").clone()))
            }
            _ if h.starts_with('F') => {
                let k: usize = h[1..].parse().map_err(|_| Error::UnknownSystem(render(e)))?;
                want(args, 1, h)?;
                match eval(&args[0])? {
                    Sys::Pl(f) => Ok(Sys::Sym(k, f)),
                    _ => Err(Error::Unsupported("F_k needs a PL graph map".into())),
                }
            }
            _ => Err(Error::UnknownSystem(render(e))),
        },
    }
}

fn power(s: Sys, k: usize) -> Result<Sys> {
    Ok(match s {
        Sys::Pl(f) => Sys::Pl(iterate(&f, k)?),
        Sys::Prod(a, b) => Sys::Prod(Box::new(power(*a, k)?), Box::new(power(*b, k)?)),
        Sys::Sym(n, f) => Sys::Sym(n, iterate(&f, k)?),
    })
}

fn build(s: Sys, name: String) -> Result<Arc<dyn MetricSystem>> {
    match s {
        Sys::Pl(f) => pl_system(name, f),
        Sys::Prod(a, b) => {
            let inner = product_system(build(*a, "a".into())?, build(*b, "b".into())?);
            Ok(Arc::new(Renamed { inner, name }))
        }
        Sys::Sym(k, f) => {
            let inner: Arc<dyn MetricSystem> = Arc::new(symmetric_product_system(&f, "f", k)?);
            Ok(Arc::new(Renamed { inner, name }))
        }
    }
}

fn normalize(name: &str) -> Result<Expr> {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let (e, rest) = parse_expr(&compact)?;
    if !rest.is_empty() {
        return Err(Error::Parse(format!("trailing input '{rest}' in {name}")));
    }
    Ok(e)
}

/// Canonical spelling of a catalog name (whitespace removed).
pub fn canonical_name(name: &str) -> Result<String> {
    Ok(render(&normalize(name)?))
}

/// The system named `name`.
pub fn resolve(name: &str) -> Result<Arc<dyn MetricSystem>> {
    let e = normalize(name)?;
    build(eval(&e)?, render(&e))
}

/// The PL map named `name`; products and hyperspaces are rejected.
pub fn resolve_map(name: &str) -> Result<PLMap> {
    match eval(&normalize(name)?)? {
        Sys::Pl(f) => Ok(f),
        _ => Err(Error::Unsupported(format!("{name} is not a PL graph map"))),
    }
}

/// Forwards to another system under a different name.
struct Renamed {
    inner: Arc<dyn MetricSystem>,
    name: String,
}

impl MetricSystem for Renamed {
    fn descriptor(&self) -> String {
        self.name.clone()
    }
    fn distance(&self, p: &State, q: &State) -> Result<Q> {
        self.inner.distance(p, q)
    }
    fn apply(&self, p: &State) -> Result<State> {
        self.inner.apply(p)
    }
    fn sample(&self, mesh: &Q) -> Result<Vec<State>> {
        self.inner.sample(mesh)
    }
    fn float_dn(&self, n: usize, p: &State, q: &State) -> Result<f64> {
        self.inner.float_dn(n, p, q)
    }
    fn prepare(&self, n: usize, eps: f64, mesh: f64, opts: &NetOptions) -> Result<Box<dyn Prepared>> {
        self.inner.prepare(n, eps, mesh, opts)
    }
    fn power(&self, k: usize) -> Result<Arc<dyn MetricSystem>> {
        Ok(Arc::new(Renamed { inner: self.inner.power(k)?, name: format!("pow({},{k})", self.name) }))
    }
    fn pl_map(&self) -> Option<&PLMap> {
        self.inner.pl_map()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl_dynamics::{fixed_points, homeo_certificate, validate_map};

    #[test]
    fn every_homeomorphism_is_certified() {
        for name in HOMEOMORPHISMS {
            let f = resolve_map(name).unwrap();
            assert!(validate_map(&f).unwrap().homeomorphism, "{name}");
        }
        assert!(!validate_map(&resolve_map("tent").unwrap()).unwrap().homeomorphism);
    }

    #[test]
    fn rotation_moves_points_by_the_angle() {
        let f = resolve_map("rotation(1/3)").unwrap();
        let g = f.graph();
        for k in 0..12 {
            let s = q(k, 12);
            let img = f.apply(&g.circle_point(&s).unwrap()).unwrap();
            assert_eq!(g.circle_coordinate(&img), (s + q(1, 3)) - (s + q(1, 3)).floor());
        }
        assert!(fixed_points(&f).unwrap().is_empty());
        let r = resolve_map("rotation(0.25)").unwrap();
        assert_eq!(r, rotation(q(1, 4)).unwrap());
    }

    #[test]
    fn circle_bend_follows_its_lift() {
        let f = resolve_map("circle_bend").unwrap();
        let g = f.graph();
        let img = f.apply(&g.circle_point(&q(3, 4)).unwrap()).unwrap();
        assert_eq!(g.circle_coordinate(&img), q(5, 8));
        assert!(homeo_certificate(&f).is_ok());
    }

    #[test]
    fn tripod_rotation_has_period_three() {
        let f = resolve_map("tripod_rotate").unwrap();
        assert_eq!(iterate(&f, 3).unwrap(), PLMap::identity(f.graph_arc().clone()));
        assert_eq!(resolve_map("pow(tripod_rotate,3)").unwrap(), PLMap::identity(f.graph_arc().clone()));
    }

    #[test]
    fn wrappers_resolve() {
        assert_eq!(resolve("prod(rotation(phi), pl_contract)").unwrap().descriptor(), "prod(rotation(phi),pl_contract)");
        assert_eq!(resolve("F2(pl_contract)").unwrap().descriptor(), "F2(pl_contract)");
        assert_eq!(resolve("pow(pl_contract,2)").unwrap().descriptor(), "pow(pl_contract,2)");
        let c = resolve_map("conj(pl_contract,bend)").unwrap();
        let f = resolve_map("pl_contract").unwrap();
        let h = resolve_map("bend").unwrap();
        let x = f.graph().point(0, q(3, 4)).unwrap();
        assert_eq!(c.apply(&h.apply(&x).unwrap()).unwrap(), h.apply(&f.apply(&x).unwrap()).unwrap());
        assert!(matches!(resolve("nope"), Err(Error::UnknownSystem(_))));
        assert!(resolve("prod(identity").is_err());
        assert!(resolve_map("F2(identity)").is_err());
    }
}
