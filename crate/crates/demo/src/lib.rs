//! WebAssembly bindings behind `www/index.html`.

use wasm_bindgen::prelude::*;

use polyent::catalog;
use polyent::entropy_lab::{dynamic_distance, growth_exponent, EstimationProtocol, State};
use polyent::phase_space::GraphPoint;
use polyent::pl_dynamics::{lap_number, phi, PLMap};
use polyent::rational::{fmt_q, parse_q};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `t` on edge 0, or `e:t` on edge `e`.
fn parse_point(f: &PLMap, s: &str) -> polyent::Result<GraphPoint> {
    let (edge, t) = match s.split_once(':') {
        Some((e, t)) => (e.trim().parse().map_err(|_| polyent::Error::Parse(format!("bad edge in {s:?}")))?, t),
        None => (0, s),
    };
    f.graph().point(edge, parse_q(t.trim())?)
}

/// Lines `n c_n φ(f,n)` for `n = 1..=n_max`; `c_n` is `-` off the interval.
#[wasm_bindgen]
pub fn lap_table(map: &str, n_max: u32) -> Result<String, JsValue> {
    let f = catalog::resolve_map(map).map_err(err)?;
    let interval = f.graph().edge_count() == 1;
    let mut out = String::from("n\tlaps\tphi\n");
    for n in 1..=n_max as usize {
        let laps = if interval { lap_number(&f, n).map_err(err)?.to_string() } else { "-".into() };
        out.push_str(&format!("{n}\t{laps}\t{}\n", phi(&f, n).map_err(err)?));
    }
    Ok(out)
}

/// Exact `d_n(p, q)` as a fraction.
#[wasm_bindgen]
pub fn orbit_distance(map: &str, p: &str, q: &str, n: u32) -> Result<String, JsValue> {
    let f = catalog::resolve_map(map).map_err(err)?;
    let sys = catalog::resolve(map).map_err(err)?;
    let a = State::Point(parse_point(&f, p).map_err(err)?);
    let b = State::Point(parse_point(&f, q).map_err(err)?);
    Ok(fmt_q(&dynamic_distance(sys.as_ref(), n.max(1) as usize, &a, &b).map_err(err)?))
}

/// Greedy counts (CSV) and exponent estimate for `ε = 2^{-eps_exp}`,
/// `n = 1, 2, …, 2^{n_exp}`.
#[wasm_bindgen]
pub fn growth(system: &str, eps_exp: u32, n_exp: u32) -> Result<String, JsValue> {
    let sys = catalog::resolve(system).map_err(err)?;
    let mut p = EstimationProtocol::with_ranges([eps_exp], 0..=n_exp.min(10));
    p.net.orbit_budget = 4_000_000;
    p.net.state_budget = 200_000;
    let r = growth_exponent(sys.as_ref(), &p).map_err(err)?;
    let mut out = format!("exponent {:.3}\n\nn,sep_greedy,span_greedy\n", r.exponent);
    for row in &r.rows {
        let span = row.span_greedy.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", row.n, row.sep_greedy, span));
    }
    Ok(out)
}
