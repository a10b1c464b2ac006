//! The acceptance suite: twelve criteria, each reported as pass, fail or
//! skip with a one-line detail.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyent::catalog::{self, HOMEOMORPHISMS, MONOTONE_INTERVAL_HOMEOMORPHISMS};
use polyent::entropy_lab::{
    greedy_separated, greedy_spanning, growth_exponent, kato_bound_check, CountRow, EstimationProtocol, ExactDn,
    GrowthReport, State,
};
use polyent::hyperspace::{factor_map_check, hyperspace_growth_trend};
use polyent::pl_dynamics::{
    exact_recurrent_set, homeo_certificate, lap_number, phi, wandering_status, Wandering, WanderingProbe,
};
use polyent::rational::{q, Q};

use crate::random_point;
use crate::report::counts_csv;

pub const REFERENCE_SEED: u64 = 20_240_521;

/// Every base system the suite may draw on.
pub const SUITE_CATALOG: &[&str] = &[
    "identity",
    "tent",
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

pub const ISOMETRIES: &[&str] = &["identity", "flip", "rotation(phi)", "rotation(1/3)", "tripod_rotate"];

pub const CRITERIA: &[(u32, &str)] = &[
    (1, "exact lap numbers"),
    (2, "exact phi"),
    (3, "sandwich chain"),
    (4, "zero-entropy systems"),
    (5, "wandering homeomorphisms"),
    (6, "kato bound"),
    (7, "product formula"),
    (8, "power and conjugacy invariance"),
    (9, "factor identity"),
    (10, "symmetric-product growth"),
    (11, "wandering classifier exactness"),
    (12, "determinism"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {:>2} {} {}: {} [{:.1}s]", self.id, self.status, self.title, self.detail, self.seconds)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Criterion ids to run; all when `None`.
    pub filter: Option<Vec<u32>>,
    /// Multiplies every exponent tolerance; `0` demands the nominal values.
    pub tolerance_scale: f64,
    /// Base systems available to the suite.
    pub catalog: Vec<String>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: REFERENCE_SEED,
            filter: None,
            tolerance_scale: 1.0,
            catalog: SUITE_CATALOG.iter().map(|s| s.to_string()).collect(),
        }
    }
}

pub struct SuiteReport {
    pub results: Vec<CriterionResult>,
    /// Counts of every growth run and sandwich instance, in suite order.
    pub csv: Vec<u8>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Fail)
    }

    pub fn status(&self, id: u32) -> Option<Status> {
        self.results.iter().find(|r| r.id == id).map(|r| r.status)
    }
}

type Outcome = (Status, String);

fn verdict(ok: bool, detail: String) -> Outcome {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

fn skip(why: &str) -> Outcome {
    (Status::Skip, why.to_string())
}

struct Suite {
    opts: SuiteOptions,
    cache: HashMap<(String, &'static str), GrowthReport>,
    rows: Vec<CountRow>,
}

fn protocol(preset: &'static str) -> EstimationProtocol {
    EstimationProtocol::preset(preset).expect("built-in preset")
}

impl Suite {
    fn has(&self, name: &str) -> bool {
        self.opts.catalog.iter().any(|c| c == name)
    }

    fn present<'a>(&self, names: &[&'a str]) -> Vec<&'a str> {
        names.iter().copied().filter(|n| self.has(n)).collect()
    }

    fn tol(&self, t: f64) -> f64 {
        t * self.opts.tolerance_scale
    }

    fn growth(&mut self, name: &str, preset: &'static str) -> Result<f64, String> {
        let key = (name.to_string(), preset);
        if let Some(r) = self.cache.get(&key) {
            return Ok(r.exponent);
        }
        let sys = catalog::resolve(name).map_err(|e| format!("{name}: {e}"))?;
        let r = growth_exponent(sys.as_ref(), &protocol(preset)).map_err(|e| format!("{name}: {e}"))?;
        let e = r.exponent;
        self.rows.extend(r.rows.iter().cloned());
        self.cache.insert(key, r);
        Ok(e)
    }

    /// Estimates for `names`, rendered as `name=x.xxx`, and whether each
    /// satisfies `ok`.
    fn exponents(&mut self, names: &[String], preset: &'static str, ok: impl Fn(f64) -> bool) -> Outcome {
        let mut all = true;
        let mut parts = Vec::new();
        for n in names {
            match self.growth(n, preset) {
                Ok(e) => {
                    all &= ok(e);
                    parts.push(format!("{n}={e:.3}"));
                }
                Err(msg) => {
                    all = false;
                    parts.push(msg);
                }
            }
        }
        verdict(all, parts.join(" "))
    }

    fn run(&mut self, id: u32) -> Outcome {
        match id {
            1 => self.laps(),
            2 => self.phi(),
            3 => self.sandwich(),
            4 => self.zero_entropy(),
            5 => self.wandering(),
            6 => self.kato(),
            7 => self.products(),
            8 => self.invariance(),
            9 => self.factor(),
            10 => self.hyperspace(),
            11 => self.classifier(),
            12 => self.determinism(),
            _ => skip("unknown criterion"),
        }
    }

    fn laps(&mut self) -> Outcome {
        let mut checked = Vec::new();
        let mut bad = Vec::new();
        if self.has("tent") {
            let f = catalog::resolve_map("tent").expect("catalog map");
            for n in 1..=20 {
                match lap_number(&f, n) {
                    Ok(c) if c == 1u64 << n => {}
                    other => bad.push(format!("tent n={n}: {other:?}")),
                }
            }
            checked.push("tent".to_string());
        }
        for name in self.present(MONOTONE_INTERVAL_HOMEOMORPHISMS) {
            let f = catalog::resolve_map(name).expect("catalog map");
            for n in 1..=20 {
                match lap_number(&f, n) {
                    Ok(1) => {}
                    other => bad.push(format!("{name} n={n}: {other:?}")),
                }
            }
            checked.push(name.to_string());
        }
        if checked.is_empty() {
            return skip("no interval maps in the catalog");
        }
        verdict(bad.is_empty(), format!("n=1..20 for {}; mismatches: {}", checked.join(","), list(&bad)))
    }

    fn phi(&mut self) -> Outcome {
        let mut checked = Vec::new();
        let mut bad = Vec::new();
        for name in self.present(HOMEOMORPHISMS) {
            let f = catalog::resolve_map(name).expect("catalog map");
            if homeo_certificate(&f).is_err() {
                bad.push(format!("{name}: no certificate"));
                continue;
            }
            for n in 1..=10 {
                match phi(&f, n) {
                    Ok(1) => {}
                    other => bad.push(format!("{name} n={n}: {other:?}")),
                }
            }
            checked.push(name);
        }
        if self.has("tent") {
            let f = catalog::resolve_map("tent").expect("catalog map");
            for n in 1..=12 {
                match phi(&f, n) {
                    Ok(v) if v == 1u64 << n => {}
                    other => bad.push(format!("tent n={n}: {other:?}")),
                }
            }
            checked.push("tent");
        }
        if checked.is_empty() {
            return skip("no homeomorphisms or tent in the catalog");
        }
        verdict(bad.is_empty(), format!("checked {}; mismatches: {}", checked.join(","), list(&bad)))
    }

    fn sandwich(&mut self) -> Outcome {
        let names: Vec<String> = self.opts.catalog.clone();
        if names.is_empty() {
            return skip("empty catalog");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x5a5d);
        let mut bad = Vec::new();
        let mut broken_links = [0usize; 5];
        for i in 0..50 {
            match sandwich_instance(&names, &mut rng, i) {
                Ok(inst) => {
                    let fails = inst.failures();
                    for &k in &fails {
                        broken_links[k] += 1;
                    }
                    if !fails.is_empty() && bad.len() < 3 {
                        bad.push(inst.describe());
                    }
                    self.rows.push(inst.row);
                }
                Err(e) => bad.push(format!("instance {i}: {e}")),
            }
        }
        let total: usize = broken_links.iter().sum();
        let links = LINKS.iter().zip(broken_links).map(|(l, c)| format!("{l}:{c}")).collect::<Vec<_>>().join(" ");
        verdict(
            total == 0 && bad.is_empty(),
            format!("50 instances; violations per inequality {links}; first: {}", list(&bad)),
        )
    }

    fn zero_entropy(&mut self) -> Outcome {
        let variants: &[(&str, &[&str])] = &[
            ("identity", &["identity", "pow(identity,2)", "conj(identity,bend)"]),
            ("rotation(phi)", &["rotation(phi)", "pow(rotation(phi),2)", "conj(rotation(phi),circle_bend)"]),
            ("tripod_rotate", &["tripod_rotate", "pow(tripod_rotate,2)", "conj(tripod_rotate,tripod_bend)"]),
        ];
        let names: Vec<String> = variants
            .iter()
            .filter(|(base, _)| self.has(base))
            .flat_map(|(_, v)| v.iter().map(|s| s.to_string()))
            .collect();
        if names.is_empty() {
            return skip("no zero-entropy systems in the catalog");
        }
        let tol = self.tol(0.15);
        self.exponents(&names, "default", |e| e <= tol)
    }

    fn wandering(&mut self) -> Outcome {
        let names: Vec<String> =
            self.present(&["pl_contract", "tripod_contract", "lollipop_contract"]).iter().map(|s| s.to_string()).collect();
        if names.is_empty() {
            return skip("no wandering homeomorphisms in the catalog");
        }
        let (lo, hi) = (1.0 - self.tol(0.2), 1.0 + self.tol(0.1));
        self.exponents(&names, "wandering", |e| lo <= e && e <= hi)
    }

    fn kato(&mut self) -> Outcome {
        let names = self.present(HOMEOMORPHISMS);
        if names.is_empty() {
            return skip("no homeomorphisms in the catalog");
        }
        let mut all = true;
        let mut parts = Vec::new();
        for name in names {
            let f = catalog::resolve_map(name).expect("catalog map");
            let preset = match exact_recurrent_set(&f) {
                Ok(Some(set)) if !set.is_everything(f.graph()) => "wandering",
                _ => "default",
            };
            let mut p = protocol(preset);
            p.tolerance = self.tol(0.15);
            let outcome = self.growth(name, preset).and_then(|e| {
                let sys = catalog::resolve(name).map_err(|e| e.to_string())?;
                kato_bound_check(sys.as_ref(), &p, Some(e)).map_err(|e| format!("{name}: {e}"))
            });
            match outcome {
                Ok(r) => {
                    all &= r.satisfied;
                    parts.push(format!("{name}={:.3}<={}", r.exponent_estimate.unwrap_or(f64::NAN), r.bound));
                }
                Err(msg) => {
                    all = false;
                    parts.push(msg);
                }
            }
        }
        verdict(all, parts.join(" "))
    }

    fn products(&mut self) -> Outcome {
        if !(self.has("pl_contract") && self.has("rotation(phi)")) {
            return skip("needs pl_contract and rotation(phi)");
        }
        let (a, b) = (self.tol(0.4), self.tol(0.3));
        let (s1, d1) = self.exponents(&["prod(pl_contract,pl_contract)".into()], "product", |e| {
            2.0 - a <= e && e <= 2.0 + b
        });
        let c = self.tol(0.2);
        let (s2, d2) = self.exponents(&["prod(rotation(phi),pl_contract)".into()], "product", |e| {
            1.0 - c <= e && e <= 1.0 + c
        });
        verdict(s1 == Status::Pass && s2 == Status::Pass, format!("{d1} {d2}"))
    }

    fn invariance(&mut self) -> Outcome {
        if !self.has("pl_contract") {
            return skip("needs pl_contract");
        }
        let tol = self.tol(0.15);
        let base = match self.growth("pl_contract", "wandering") {
            Ok(e) => e,
            Err(msg) => return (Status::Fail, msg),
        };
        let mut all = true;
        let mut parts = vec![format!("pl_contract={base:.3}")];
        for name in ["pow(pl_contract,2)", "conj(pl_contract,bend)"] {
            match self.growth(name, "wandering") {
                Ok(e) => {
                    all &= (e - base).abs() <= tol;
                    parts.push(format!("{name}={e:.3} (diff {:.3})", (e - base).abs()));
                }
                Err(msg) => {
                    all = false;
                    parts.push(msg);
                }
            }
        }
        verdict(all, parts.join(" "))
    }

    fn factor(&mut self) -> Outcome {
        let names = self.present(&["pl_contract", "tent"]);
        if names.is_empty() {
            return skip("needs pl_contract or tent");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0xfac7);
        let mut all = true;
        let mut parts = Vec::new();
        for name in names {
            let f = catalog::resolve_map(name).expect("catalog map");
            let pairs: Vec<_> =
                (0..1000).map(|_| vec![random_point(f.graph(), &mut rng), random_point(f.graph(), &mut rng)]).collect();
            match factor_map_check(&f, &pairs) {
                Ok(c) => {
                    all &= c.holds() && c.checked == 1000;
                    parts.push(match c.witness {
                        None => format!("{name}: {} pairs", c.checked),
                        Some(w) => format!("{name}: fails at {w:?}"),
                    });
                }
                Err(e) => {
                    all = false;
                    parts.push(format!("{name}: {e}"));
                }
            }
        }
        verdict(all, parts.join(" "))
    }

    fn hyperspace(&mut self) -> Outcome {
        if !self.has("pl_contract") {
            return skip("needs pl_contract");
        }
        let (a, b) = (self.tol(0.4), self.tol(0.3));
        let (s1, d1) = self.exponents(&["F2(pl_contract)".into()], "hyperspace", |e| 2.0 - a <= e && e <= 2.0 + b);
        let f = catalog::resolve_map("pl_contract").expect("catalog map");
        let (s2, d2) = match hyperspace_growth_trend(&f, "pl_contract", 3, &protocol("hyperspace_trend"), 0.6) {
            Ok(t) => {
                self.rows.extend(t.reports.iter().flat_map(|r| r.rows.iter().cloned()));
                let ks = t.rows.iter().map(|r| format!("{:.3}", r.exponent)).collect::<Vec<_>>().join(",");
                verdict(t.increasing, format!("trend k=1..3: {ks} (min step 0.6)"))
            }
            Err(e) => (Status::Fail, format!("trend: {e}")),
        };
        let (s3, d3) = if self.has("tripod_rotate") {
            let tol = self.tol(0.2);
            self.exponents(&["F2(tripod_rotate)".into()], "hyperspace", |e| e <= tol)
        } else {
            (Status::Pass, "F2(tripod_rotate) not in catalog".into())
        };
        verdict([s1, s2, s3].iter().all(|&s| s == Status::Pass), format!("{d1}; {d2}; {d3}"))
    }

    fn classifier(&mut self) -> Outcome {
        let names = self.present(MONOTONE_INTERVAL_HOMEOMORPHISMS);
        if names.is_empty() {
            return skip("no interval homeomorphisms in the catalog");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x3a4d);
        let mut bad = Vec::new();
        let mut total = 0;
        for name in &names {
            let f = catalog::resolve_map(name).expect("catalog map");
            let g = f.graph();
            let mut pts = g.sample_grid(&q(1, 64)).expect("grid");
            pts.extend((0..200).map(|_| random_point(g, &mut rng)));
            for p in &pts {
                total += 1;
                let fixed_by_square = f.apply(&f.apply(p).expect("in domain")).expect("in domain") == *p;
                let expected = if fixed_by_square { Wandering::Nonwandering } else { Wandering::Wandering };
                let interior = !p.t.is_integer();
                let forced = match *name {
                    "pl_contract" if interior => Some(Wandering::Wandering),
                    "identity" => Some(Wandering::Nonwandering),
                    _ => None,
                };
                match wandering_status(&f, p, WanderingProbe::default()) {
                    Ok(v) if v.exact && v.status == expected && forced.map_or(true, |s| s == v.status) => {}
                    other => bad.push(format!("{name} at {p}: {other:?}")),
                }
            }
        }
        verdict(bad.is_empty(), format!("{total} points on {}; disagreements: {}", names.join(","), list(&bad)))
    }

    fn determinism(&mut self) -> Outcome {
        let first = determinism_probe(&self.opts);
        let second = determinism_probe(&self.opts);
        match (first, second) {
            (Ok(a), Ok(b)) => verdict(a == b, format!("two runs of the probe set: {} CSV bytes, identical={}", a.len(), a == b)),
            (Err(e), _) | (_, Err(e)) => (Status::Fail, e),
        }
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".into()
    } else {
        items.join("; ")
    }
}

const LINKS: [&str; 5] = ["span2e<=cov", "cov<=sep", "sep<=cov/2", "cov/2<=span/2", "span<=greedy<=sep"];

struct SandwichInstance {
    system: String,
    size: usize,
    n: usize,
    eps: Q,
    /// span(2ε), cov(ε), sep(ε), cov(ε/2), span(ε/2), span(ε), greedy.
    values: [usize; 7],
    row: CountRow,
}

impl SandwichInstance {
    fn failures(&self) -> Vec<usize> {
        let [s2, c1, p1, ch, sh, s1, gr] = self.values;
        let mut out = Vec::new();
        for (k, ok) in [s2 <= c1, c1 <= p1, p1 <= ch, ch <= sh, s1 <= gr && gr <= p1].into_iter().enumerate() {
            if !ok {
                out.push(k);
            }
        }
        out
    }

    fn describe(&self) -> String {
        format!(
            "{} |P|={} n={} eps={} (span2e,cov,sep,cov/2,span/2,span,greedy)={:?}",
            self.system, self.size, self.n, self.eps, self.values
        )
    }
}

/// One random instance: a catalog system, up to 20 random points, `n ≤ 16`
/// and `ε = k/1009`.
fn sandwich_instance(names: &[String], rng: &mut ChaCha8Rng, index: usize) -> Result<SandwichInstance, String> {
    let name = &names[rng.gen_range(0..names.len())];
    let sys = catalog::resolve(name).map_err(|e| e.to_string())?;
    let g = catalog::resolve_map(name).map_err(|e| e.to_string())?.graph_arc().clone();
    let size = rng.gen_range(2..=20);
    let n = rng.gen_range(1..=16);
    let eps = q(rng.gen_range(16..=320), 1009);
    let pts: BTreeSet<State> = (0..size).map(|_| State::Point(random_point(&g, rng))).collect();
    let pts: Vec<State> = pts.into_iter().collect();
    let dn = ExactDn::new(sys.as_ref(), n, &pts).map_err(|e| e.to_string())?;
    let two = Q::from_integer(2);
    let e = |x: Result<usize, polyent::Error>| x.map_err(|e| e.to_string());
    let epsf = polyent::rational::to_f64(&eps);
    let greedy = greedy_separated(sys.as_ref(), n, epsf, &pts).map_err(|e| e.to_string())?.len();
    let values = [
        e(dn.span(&(eps * two)))?,
        e(dn.cov(&eps))?,
        dn.sep(&eps),
        e(dn.cov(&(eps / two)))?,
        e(dn.span(&(eps / two)))?,
        e(dn.span(&eps))?,
        greedy,
    ];
    let row = CountRow {
        system: format!("sandwich{index}:{name}"),
        eps: epsf,
        n,
        sep_greedy: greedy,
        span_greedy: Some(greedy_spanning(sys.as_ref(), n, epsf, &pts).map_err(|e| e.to_string())?),
        sample_size: pts.len(),
        mesh: 0.0,
    };
    Ok(SandwichInstance { system: name.clone(), size: pts.len(), n, eps, values, row })
}

/// CSV of a fixed set of seeded and unseeded computations, compared across
/// two runs by the determinism criterion.
fn determinism_probe(opts: &SuiteOptions) -> Result<Vec<u8>, String> {
    let mut rows = Vec::new();
    let names: Vec<String> = opts.catalog.clone();
    if !names.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5a5d);
        for i in 0..50 {
            rows.push(sandwich_instance(&names, &mut rng, i)?.row);
        }
    }
    let runs: &[(&str, &str, &[&str])] = &[
        ("identity", "default", &["identity"]),
        ("pl_contract", "wandering", &["pl_contract"]),
        ("prod(rotation(phi),pl_contract)", "product", &["rotation(phi)", "pl_contract"]),
        ("F2(pl_contract)", "hyperspace_trend", &["pl_contract"]),
    ];
    for (name, preset, needs) in runs {
        if !needs.iter().all(|b| opts.catalog.iter().any(|c| c == b)) {
            continue;
        }
        let sys = catalog::resolve(name).map_err(|e| e.to_string())?;
        let r = growth_exponent(sys.as_ref(), &protocol(preset)).map_err(|e| format!("{name}: {e}"))?;
        rows.extend(r.rows);
    }
    Ok(counts_csv(&rows))
}

/// Runs the selected criteria in order.
pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    run_suite_with(opts, |_| {})
}

/// Like [`run_suite`], calling `on_result` as each criterion finishes.
pub fn run_suite_with(opts: &SuiteOptions, mut on_result: impl FnMut(&CriterionResult)) -> SuiteReport {
    let mut suite = Suite { opts: opts.clone(), cache: HashMap::new(), rows: Vec::new() };
    let mut results = Vec::new();
    for &(id, title) in CRITERIA {
        if opts.filter.as_ref().is_some_and(|f| !f.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (status, detail) = suite.run(id);
        let r = CriterionResult { id, title, status, detail, seconds: start.elapsed().as_secs_f64() };
        on_result(&r);
        results.push(r);
    }
    SuiteReport { results, csv: counts_csv(&suite.rows) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(filter: &[u32]) -> SuiteOptions {
        SuiteOptions { filter: Some(filter.to_vec()), ..Default::default() }
    }

    #[test]
    fn isometry_catalog_skips_wandering_items() {
        let o = SuiteOptions { catalog: ISOMETRIES.iter().map(|s| s.to_string()).collect(), ..opts(&[5, 7, 8, 10]) };
        let r = run_suite(&o);
        assert_eq!(r.results.len(), 4);
        assert!(r.results.iter().all(|c| c.status == Status::Skip), "{:?}", r.results);
    }

    #[test]
    fn exact_items_ignore_tolerance_scale() {
        let o = SuiteOptions { tolerance_scale: 0.0, ..opts(&[9, 11]) };
        let r = run_suite(&o);
        assert_eq!(r.status(9), Some(Status::Pass));
        assert_eq!(r.status(11), Some(Status::Pass));
    }
}
